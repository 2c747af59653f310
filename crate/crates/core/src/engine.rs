//! The synchronous round loop.
//!
//! Every round, each live process observes its closest-neighbor view, the
//! tie policy picks the neighbor, the orthogonal policy orients the sideways
//! component, and the rule produces a target; then *all* processes jump to
//! their targets at once. Crashed processes never move but remain visible.
//!
//! A run stops for one of three reasons, checked in this order each round:
//! the configuration is gathered (enclosing radius at most `eps_gather`),
//! the step budget is exhausted, or the computed step moves nobody farther
//! than the fixpoint threshold (in which case the step is not applied).

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance, Point};
use crate::model::{process_ranks, Configuration, ModelError, Occupancy, ProcessId};
use crate::policies::{
    next_position, resolve_orthogonal, select_neighbor, ChoiceContext, MoveRule, OrthogonalChoice,
    PolicyError, TiePolicy,
};
use crate::tolerances::{EPS_FIXPOINT, EPS_TIE};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("policy failure at round {time} for {subject}")]
    Policy {
        time: u64,
        subject: ProcessId,
        #[source]
        source: PolicyError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Why a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    /// Enclosing radius dropped to `eps_gather` or below.
    Gathered,
    /// The step budget ran out.
    Budget,
    /// The next step would move no process beyond the fixpoint threshold.
    Fixpoint,
}

/// Knobs for a run. `eps_gather` is zero by default — "gathered" means all
/// processes on one exact position; set a positive radius to stop at
/// ε-convergence instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub max_steps: u64,
    pub eps_tie: f64,
    pub eps_gather: f64,
    pub stop_on_gathered: bool,
    pub stop_on_fixpoint: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            max_steps: 1000,
            eps_tie: EPS_TIE,
            eps_gather: 0.0,
            stop_on_gathered: true,
            stop_on_fixpoint: true,
        }
    }
}

/// Processes that crash (stop moving forever) at the start of round
/// `at_time`, before that round's moves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrashEvent {
    pub at_time: u64,
    pub processes: Vec<ProcessId>,
}

/// One executed round: the choices made in the pre-move configuration and
/// the targets everyone jumped to.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub time: u64,
    /// Chosen neighbor per process; `None` for crashed processes and for
    /// processes with nothing to see.
    pub choices: Vec<Option<ProcessId>>,
    pub targets: Vec<Point>,
}

/// The result of computing (but not applying) one round.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub choices: Vec<Option<ProcessId>>,
    pub targets: Vec<Point>,
    /// Largest displacement any process would make.
    pub max_move: f64,
}

/// A full run description.
#[derive(Clone, Debug)]
pub struct RunPlan {
    pub initial: Configuration,
    pub rule: MoveRule,
    pub tie: TiePolicy,
    pub ortho: OrthogonalChoice,
    pub crashes: Vec<CrashEvent>,
    pub settings: RunSettings,
}

impl RunPlan {
    pub fn new(initial: Configuration, rule: MoveRule) -> Self {
        Self {
            initial,
            rule,
            tie: TiePolicy::OrderBased,
            ortho: OrthogonalChoice::FixedPositive,
            crashes: Vec::new(),
            settings: RunSettings::default(),
        }
    }

    pub fn with_tie(mut self, tie: TiePolicy) -> Self {
        self.tie = tie;
        self
    }

    pub fn with_ortho(mut self, ortho: OrthogonalChoice) -> Self {
        self.ortho = ortho;
        self
    }

    pub fn with_crash(mut self, at_time: u64, processes: Vec<ProcessId>) -> Self {
        self.crashes.push(CrashEvent { at_time, processes });
        self
    }

    pub fn with_settings(mut self, settings: RunSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn execute(&self) -> Result<Trace, EngineError> {
        run(self)
    }
}

/// Everything a run visited. `configs` holds every configuration in order,
/// including the initial and final ones, so `configs.len() == steps.len() + 1`.
#[derive(Clone, Debug)]
pub struct Trace {
    pub configs: Vec<Configuration>,
    pub steps: Vec<StepRecord>,
    pub stop: StopReason,
}

impl Trace {
    pub fn initial(&self) -> &Configuration {
        self.configs.first().expect("trace has at least one configuration")
    }

    pub fn final_config(&self) -> &Configuration {
        self.configs.last().expect("trace has at least one configuration")
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }
}

/// Compute one round's choices and targets without applying them.
pub fn step(
    config: &Configuration,
    rule: &MoveRule,
    tie: &TiePolicy,
    ortho: &OrthogonalChoice,
    eps_tie: f64,
) -> Result<StepOutcome, EngineError> {
    let ranks = process_ranks(config);
    let mut choices = Vec::with_capacity(config.len());
    let mut targets = Vec::with_capacity(config.len());
    let mut max_move = 0.0_f64;
    for r in config.records() {
        if r.crashed {
            choices.push(None);
            targets.push(r.position.clone());
            continue;
        }
        let Some(view) = config.neighbor_view(r.id, eps_tie) else {
            // Everyone shares this location; nothing to see, nowhere to go.
            choices.push(None);
            targets.push(r.position.clone());
            continue;
        };
        let ctx = ChoiceContext {
            config,
            rank: ranks[r.id.0],
            eps_tie,
        };
        let wrap = |source: PolicyError| EngineError::Policy {
            time: config.time(),
            subject: r.id,
            source,
        };
        let chosen = select_neighbor(&view, &ctx, tie).map_err(wrap)?;
        let y_hat = resolve_orthogonal(&view, chosen, &ctx, ortho, rule).map_err(wrap)?;
        let target = next_position(&r.position, config.position(chosen), rule, y_hat.as_ref());
        max_move = max_move.max(distance(&r.position, &target));
        choices.push(Some(chosen));
        targets.push(target);
    }
    Ok(StepOutcome {
        choices,
        targets,
        max_move,
    })
}

/// Execute a plan to completion.
pub fn run(plan: &RunPlan) -> Result<Trace, EngineError> {
    let mut config = plan.initial.clone();
    let mut configs: Vec<Configuration> = Vec::new();
    let mut steps: Vec<StepRecord> = Vec::new();
    let stop = loop {
        let due: Vec<ProcessId> = plan
            .crashes
            .iter()
            .filter(|c| c.at_time == config.time())
            .flat_map(|c| c.processes.iter().copied())
            .collect();
        if !due.is_empty() {
            config = config.with_crashed(&due);
        }
        configs.push(config.clone());
        if plan.settings.stop_on_gathered && config.is_gathered(plan.settings.eps_gather) {
            break StopReason::Gathered;
        }
        if steps.len() as u64 >= plan.settings.max_steps {
            break StopReason::Budget;
        }
        let outcome = step(&config, &plan.rule, &plan.tie, &plan.ortho, plan.settings.eps_tie)?;
        if plan.settings.stop_on_fixpoint && outcome.max_move <= EPS_FIXPOINT {
            break StopReason::Fixpoint;
        }
        steps.push(StepRecord {
            time: config.time(),
            choices: outcome.choices,
            targets: outcome.targets.clone(),
        });
        config = config.advanced(outcome.targets)?;
    };
    Ok(Trace {
        configs,
        steps,
        stop,
    })
}

#[derive(Serialize)]
struct TraceLine<'a> {
    t: u64,
    positions: Vec<&'a Point>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    crashed: Vec<ProcessId>,
    omega: usize,
    r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    choices: Option<&'a [Option<ProcessId>]>,
}

#[derive(Serialize)]
struct TraceSummary {
    stop: StopReason,
    steps: usize,
    final_r: f64,
    final_omega: usize,
}

/// Write a run as JSON Lines: one object per visited configuration (with
/// that round's choices when a move was executed from it), then a summary
/// object.
pub fn write_trace_jsonl(
    trace: &Trace,
    eps_tie: f64,
    writer: &mut impl Write,
) -> io::Result<()> {
    for (i, config) in trace.configs.iter().enumerate() {
        let line = TraceLine {
            t: config.time(),
            positions: config.records().iter().map(|r| &r.position).collect(),
            crashed: config
                .records()
                .iter()
                .filter(|r| r.crashed)
                .map(|r| r.id)
                .collect(),
            omega: Occupancy::of(config, eps_tie).location_count(),
            r: config.enclosing_ball().radius,
            choices: trace.steps.get(i).map(|s| s.choices.as_slice()),
        };
        serde_json::to_writer(&mut *writer, &line)?;
        writer.write_all(b"\n")?;
    }
    let final_config = trace.final_config();
    let summary = TraceSummary {
        stop: trace.stop,
        steps: trace.step_count(),
        final_r: final_config.enclosing_ball().radius,
        final_omega: Occupancy::of(final_config, eps_tie).location_count(),
    };
    serde_json::to_writer(&mut *writer, &summary)?;
    writer.write_all(b"\n")
}
