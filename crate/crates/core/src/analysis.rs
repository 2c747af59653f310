//! Run-level measurements and the certificate checks.
//!
//! A certificate check examines concrete configurations or traces and
//! records every violation of a claimed inequality or structural property
//! into a [`CertificateReport`]. Checks never round in their own favor:
//! comparisons carry an explicit slack built from the documented tolerances,
//! and a check that does not apply to an instance skips it rather than
//! counting it as evidence.

use std::io::{self, Write};

use crate::engine::{step, EngineError, Trace};
use crate::geometry::{distance, midpoint, Point};
use crate::model::{
    distinct_distance_extremes, Configuration, Occupancy, ProcessId,
};
use crate::policies::{MoveRule, OrthogonalChoice, TiePolicy};
use crate::tolerances::{band, slack, CERT_ABS, CERT_REL};

/// One-step enclosing-radius contraction factor for midpoint moves on
/// configurations whose nearest-neighbor distances are at least `radius / k`:
/// `sqrt(1 - 1/(4 k^2))`. Requires `k >= 0.5`; meaningful for `k >= 1`.
pub fn alpha(k: f64) -> f64 {
    assert!(k >= 0.5, "contraction factor needs k >= 0.5, got {k}");
    (1.0 - 1.0 / (4.0 * k * k)).sqrt()
}

/// Per-round contraction factor of the survivor span when all `n` processes
/// chase a single crashed position: `sqrt(1 - 1/(2n)^2)`.
pub fn crash_contraction_factor(n: usize) -> f64 {
    assert!(n >= 1);
    alpha(n as f64)
}

/// Full-precision one-line dump of a configuration, used so every recorded
/// counterexample can be reproduced exactly. Crashed processes carry a `!`.
pub fn configuration_dump(config: &Configuration) -> String {
    let mut parts = Vec::with_capacity(config.len());
    for r in config.records() {
        let coords: Vec<String> = r.position.coords().iter().map(f64::to_string).collect();
        let mark = if r.crashed { "!" } else { "" };
        parts.push(format!("{}{}[{}]", r.id, mark, coords.join(", ")));
    }
    format!("t={} {}", config.time(), parts.join(" "))
}

/// Full-precision one-line dump of a bare point set.
pub fn points_dump(points: &[Point]) -> String {
    let parts: Vec<String> = points
        .iter()
        .map(|p| {
            let coords: Vec<String> = p.coords().iter().map(f64::to_string).collect();
            format!("[{}]", coords.join(", "))
        })
        .collect();
    parts.join(" ")
}

/// Outcome collector for one certificate. `checked` counts instances the
/// check actually applied to; `violation_count` counts failures, with the
/// first few messages kept as examples.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub name: String,
    pub checked: u64,
    pub violation_count: u64,
    pub examples: Vec<String>,
}

const MAX_EXAMPLES: usize = 8;

impl CertificateReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            checked: 0,
            violation_count: 0,
            examples: Vec::new(),
        }
    }

    pub fn tick(&mut self) {
        self.checked += 1;
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.violation_count += 1;
        if self.examples.len() < MAX_EXAMPLES {
            self.examples.push(message.into());
        }
    }

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    /// Fold another report (e.g. from a parallel worker) into this one.
    pub fn absorb(&mut self, other: CertificateReport) {
        self.checked += other.checked;
        self.violation_count += other.violation_count;
        for example in other.examples {
            if self.examples.len() >= MAX_EXAMPLES {
                break;
            }
            self.examples.push(example);
        }
    }

    /// `<name>: pass|FAIL (checked N[, M violations])`
    pub fn summary_line(&self) -> String {
        if self.passed() {
            format!("{}: pass (checked {})", self.name, self.checked)
        } else {
            format!(
                "{}: FAIL (checked {}, {} violations)",
                self.name, self.checked, self.violation_count
            )
        }
    }
}

/// Per-round measurements of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub t: u64,
    /// Reported (clustered) location count.
    pub omega: usize,
    /// Smallest distance between reported locations; `None` when fewer than
    /// two locations are reported.
    pub d_min: Option<f64>,
    /// Largest distance between reported locations.
    pub d_max: Option<f64>,
    /// Enclosing-ball radius over raw positions.
    pub r: f64,
    pub gathered: bool,
    /// Largest survivor distance to the crashed position, when exactly one
    /// distinct crashed position exists.
    pub l: Option<f64>,
}

/// Largest distance from a live process to the crashed position, when the
/// crashed processes occupy exactly one distinct position.
pub fn crash_attraction_span(config: &Configuration) -> Option<f64> {
    let mut crash_pos: Option<&Point> = None;
    for r in config.records() {
        if r.crashed {
            match crash_pos {
                None => crash_pos = Some(&r.position),
                Some(p) if *p == r.position => {}
                Some(_) => return None, // several distinct crashed positions
            }
        }
    }
    let z = crash_pos?;
    Some(
        config
            .records()
            .iter()
            .filter(|r| !r.crashed)
            .map(|r| distance(&r.position, z))
            .fold(0.0_f64, f64::max),
    )
}

pub fn metrics_rows(trace: &Trace, eps_tie: f64, eps_gather: f64) -> Vec<MetricsRow> {
    trace
        .configs
        .iter()
        .map(|config| {
            let occupancy = Occupancy::of(config, eps_tie);
            let extremes = occupancy.distance_extremes();
            MetricsRow {
                t: config.time(),
                omega: occupancy.location_count(),
                d_min: extremes.map(|(lo, _)| lo),
                d_max: extremes.map(|(_, hi)| hi),
                r: config.enclosing_ball().radius,
                gathered: config.is_gathered(eps_gather),
                l: crash_attraction_span(config),
            }
        })
        .collect()
}

/// CSV with header `t,omega,d_min,d_max,R,gathered,L`; undefined cells stay
/// empty.
pub fn write_metrics_csv(
    trace: &Trace,
    eps_tie: f64,
    eps_gather: f64,
    writer: &mut impl Write,
) -> io::Result<()> {
    writeln!(writer, "t,omega,d_min,d_max,R,gathered,L")?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in metrics_rows(trace, eps_tie, eps_gather) {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            row.t,
            row.omega,
            fmt(row.d_min),
            fmt(row.d_max),
            row.r,
            row.gathered,
            fmt(row.l)
        )?;
    }
    Ok(())
}

/// How a process relates to the round's chosen-neighbor graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcessClass {
    Crashed,
    /// The chain of chosen neighbors reaches a process standing at a crashed
    /// position (possibly the process itself).
    Attracted,
    /// On a cycle of the chosen-neighbor graph.
    OnLoop,
    /// The chain ends in a cycle the process is not part of.
    TowardLoop,
    /// No chosen neighbor and nothing to chase: the whole population shares
    /// one location and none of it crashed.
    Stationary,
}

/// The functional graph of one round's neighbor choices.
#[derive(Clone, Debug)]
pub struct ChoiceGraph {
    edges: Vec<Option<ProcessId>>,
    classes: Vec<ProcessClass>,
    loops: Vec<Vec<ProcessId>>,
}

impl ChoiceGraph {
    /// Build from a configuration and that round's recorded choices (one
    /// entry per process, `None` for crashed or fully merged processes).
    pub fn from_choices(config: &Configuration, choices: &[Option<ProcessId>]) -> Self {
        let n = config.len();
        assert_eq!(choices.len(), n);
        let crash_positions: Vec<&Point> = config
            .records()
            .iter()
            .filter(|r| r.crashed)
            .map(|r| &r.position)
            .collect();
        let at_crash_pos: Vec<bool> = config
            .records()
            .iter()
            .map(|r| crash_positions.iter().any(|z| **z == r.position))
            .collect();

        // A chain visits at most n distinct nodes before terminating or
        // revisiting one, so a bounded walk decides attraction exactly.
        let attracted = |start: usize| -> bool {
            let mut current = start;
            for _ in 0..=n {
                if at_crash_pos[current] {
                    return true;
                }
                match choices[current] {
                    Some(next) => current = next.0,
                    None => return false,
                }
            }
            false
        };

        // Cycle detection in the functional graph: walk with a stack of
        // unresolved nodes; hitting an in-progress node closes a cycle.
        let mut state = vec![0_u8; n]; // 0 fresh, 1 in progress, 2 resolved
        let mut on_loop = vec![false; n];
        let mut loops: Vec<Vec<ProcessId>> = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut current = start;
            loop {
                if state[current] == 1 {
                    let cycle_start = path
                        .iter()
                        .position(|&p| p == current)
                        .expect("in-progress node is on the current path");
                    let cycle: Vec<ProcessId> =
                        path[cycle_start..].iter().map(|&p| ProcessId(p)).collect();
                    for node in &cycle {
                        on_loop[node.0] = true;
                    }
                    loops.push(cycle);
                    break;
                }
                if state[current] == 2 {
                    break;
                }
                state[current] = 1;
                path.push(current);
                match choices[current] {
                    Some(next) => current = next.0,
                    None => break,
                }
            }
            for p in path {
                state[p] = 2;
            }
        }

        let classes: Vec<ProcessClass> = (0..n)
            .map(|i| {
                if config.records()[i].crashed {
                    ProcessClass::Crashed
                } else if attracted(i) {
                    ProcessClass::Attracted
                } else if on_loop[i] {
                    ProcessClass::OnLoop
                } else if choices[i].is_some() {
                    ProcessClass::TowardLoop
                } else {
                    ProcessClass::Stationary
                }
            })
            .collect();

        Self {
            edges: choices.to_vec(),
            classes,
            loops,
        }
    }

    pub fn edge(&self, p: ProcessId) -> Option<ProcessId> {
        self.edges[p.0]
    }

    pub fn class(&self, p: ProcessId) -> ProcessClass {
        self.classes[p.0]
    }

    pub fn loops(&self) -> &[Vec<ProcessId>] {
        &self.loops
    }

    /// Pairs (p, q), p < q, that chose each other.
    pub fn mutual_pairs(&self) -> Vec<(ProcessId, ProcessId)> {
        let mut pairs = Vec::new();
        for (i, edge) in self.edges.iter().enumerate() {
            if let Some(q) = edge {
                if q.0 > i && self.edges[q.0] == Some(ProcessId(i)) {
                    pairs.push((ProcessId(i), *q));
                }
            }
        }
        pairs
    }

    /// True when every non-crashed process is attracted to a crashed
    /// position.
    pub fn all_survivors_attracted(&self) -> bool {
        self.classes
            .iter()
            .all(|c| matches!(c, ProcessClass::Crashed | ProcessClass::Attracted))
    }
}

/// Enclosing radius never grows along the trace.
pub fn check_radius_monotone(trace: &Trace, report: &mut CertificateReport) {
    let radii: Vec<f64> = trace
        .configs
        .iter()
        .map(|c| c.enclosing_ball().radius)
        .collect();
    for (t, pair) in radii.windows(2).enumerate() {
        report.tick();
        let allowance = slack(pair[0], CERT_REL, CERT_ABS);
        if pair[1] > pair[0] + allowance {
            report.fail(format!(
                "enclosing radius grew at round {t}: {} -> {}; configuration: {}",
                pair[0],
                pair[1],
                configuration_dump(&trace.configs[t])
            ));
        }
    }
}

/// Largest pairwise distance never grows along the trace.
pub fn check_diameter_monotone(trace: &Trace, report: &mut CertificateReport) {
    let diameters: Vec<f64> = trace.configs.iter().map(|c| c.diameter()).collect();
    for (t, pair) in diameters.windows(2).enumerate() {
        report.tick();
        let allowance = slack(pair[0], CERT_REL, CERT_ABS);
        if pair[1] > pair[0] + allowance {
            report.fail(format!(
                "diameter grew at round {t}: {} -> {}; configuration: {}",
                pair[0],
                pair[1],
                configuration_dump(&trace.configs[t])
            ));
        }
    }
}

/// One-step radius contraction for midpoint moves: on a configuration whose
/// smallest distinct distance is at least `R / k`, one round under any tie
/// policy shrinks the enclosing radius to at most `alpha(k) * R`.
///
/// Returns whether the hypothesis applied (and the instance was counted).
pub fn check_alpha_contraction(
    config: &Configuration,
    tie: &TiePolicy,
    k: f64,
    eps_tie: f64,
    report: &mut CertificateReport,
) -> Result<bool, EngineError> {
    let Some((d_min, _)) = distinct_distance_extremes(config) else {
        return Ok(false); // single location: nothing to contract
    };
    let r = config.enclosing_ball().radius;
    if r > k * d_min {
        return Ok(false); // hypothesis violated: neighbors too close for k
    }
    let rule = MoveRule::move_to_middle();
    let outcome = step(config, &rule, tie, &OrthogonalChoice::FixedPositive, eps_tie)?;
    let next = config.advanced(outcome.targets)?;
    let r_next = next.enclosing_ball().radius;
    let bound = alpha(k) * r;
    report.tick();
    if r_next > bound + slack(bound, CERT_REL, CERT_ABS) {
        report.fail(format!(
            "radius {r} with min distance {d_min} (k = {k}) contracted only to {r_next}, \
             bound {bound}; configuration: {}",
            configuration_dump(config)
        ));
    }
    Ok(true)
}

/// Midpoint-set contraction for five points `[a, b, c, d, e]`: when
/// `x = dist(a, d) / 100` and `dist(a,b) <= x`, `dist(a,c) <= x`,
/// `dist(a,e) <= 100 x`, `dist(d,e) >= 40 x`, the pairwise midpoints of the
/// five points span at most 0.99 times the span of the points themselves.
///
/// Returns whether the hypothesis applied.
pub fn check_midpoint_contraction(points: &[Point], report: &mut CertificateReport) -> bool {
    assert_eq!(points.len(), 5, "the contraction is about five points");
    let (a, b, c, d, e) = (&points[0], &points[1], &points[2], &points[3], &points[4]);
    let x = distance(a, d) / 100.0;
    if x <= 0.0 {
        return false;
    }
    if distance(a, b) > x
        || distance(a, c) > x
        || distance(a, e) > 100.0 * x
        || distance(d, e) < 40.0 * x
    {
        return false;
    }
    let span = |pts: &[Point]| {
        let mut best = 0.0_f64;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                best = best.max(distance(p, q));
            }
        }
        best
    };
    let mut midpoints = Vec::with_capacity(10);
    for i in 0..5 {
        for j in i + 1..5 {
            midpoints.push(midpoint(&points[i], &points[j]));
        }
    }
    let original = span(points);
    let contracted = span(&midpoints);
    let bound = 0.99 * original;
    report.tick();
    if contracted > bound + slack(bound, CERT_REL, CERT_ABS) {
        report.fail(format!(
            "midpoint span {contracted} exceeds 0.99 * {original}; points: {}",
            points_dump(points)
        ));
    }
    true
}

/// Structure of the order-based choice graph on a crash-free configuration:
/// every cycle is a mutual pair, and (when at least two locations are
/// occupied) a mutual pair exists.
pub fn check_pair_structure(
    config: &Configuration,
    eps_tie: f64,
    report: &mut CertificateReport,
) -> Result<(), EngineError> {
    debug_assert!(
        config.records().iter().all(|r| !r.crashed),
        "pair structure is about crash-free configurations"
    );
    let rule = MoveRule::move_to_middle();
    let outcome = step(
        config,
        &rule,
        &TiePolicy::OrderBased,
        &OrthogonalChoice::FixedPositive,
        eps_tie,
    )?;
    let graph = ChoiceGraph::from_choices(config, &outcome.choices);
    report.tick();
    for cycle in graph.loops() {
        if cycle.len() != 2 {
            report.fail(format!(
                "cycle of length {} in the choice graph: {:?}; configuration: {}",
                cycle.len(),
                cycle,
                configuration_dump(config)
            ));
        }
    }
    if config.distinct_positions().len() >= 2 && graph.mutual_pairs().is_empty() {
        report.fail(format!(
            "no mutual pair despite multiple occupied locations; configuration: {}",
            configuration_dump(config)
        ));
    }
    Ok(())
}

/// What the single-crash convergence check measured.
#[derive(Clone, Copy, Debug, Default)]
pub struct FaultReport {
    /// Time of the first configuration containing a crashed process.
    pub crash_onset: Option<u64>,
    /// First round at which every survivor's chosen-neighbor chain reaches
    /// the crash position.
    pub attraction_onset: Option<u64>,
    /// First time the survivor span dropped below the target fraction of
    /// its value at crash onset.
    pub contraction_target: Option<u64>,
    /// Survivor span at crash onset.
    pub initial_span: f64,
}

/// Convergence to a single crashed position: some round sees every survivor
/// attracted, on every such round the survivor span contracts by at least
/// the factor [`crash_contraction_factor`], each attracted survivor's step
/// distance is at least its crash distance divided by `n` (up to band
/// pollution, below), and the span eventually drops below `target_fraction`
/// of its onset value.
///
/// Tie bands are absolute below unit scale, so once the inter-point
/// distances fall within `band(eps_tie, 1)` of each other the simulated
/// candidate sets grow beyond the exact-tie model's: chains gain up to one
/// band per hop and attraction may flicker. The checks stay sound there by
/// carrying an additive `O(n · band)` slack and by checking the contraction
/// bound only on rounds where its hypothesis (everyone attracted) actually
/// holds.
pub fn check_fault_convergence(
    trace: &Trace,
    eps_tie: f64,
    target_fraction: f64,
    report: &mut CertificateReport,
) -> FaultReport {
    let mut result = FaultReport::default();
    let n = trace.initial().len();
    let Some(onset) = trace
        .configs
        .iter()
        .position(|c| c.records().iter().any(|r| r.crashed))
    else {
        report.fail("no crashed process anywhere in the trace".to_owned());
        return result;
    };
    result.crash_onset = Some(trace.configs[onset].time());

    let spans: Vec<Option<f64>> = trace.configs[onset..]
        .iter()
        .map(crash_attraction_span)
        .collect();
    if spans.iter().any(Option::is_none) {
        report.fail("crashed processes occupy more than one position".to_owned());
        return result;
    }
    let spans: Vec<f64> = spans.into_iter().map(Option::unwrap).collect();
    let initial_span = spans[0];
    result.initial_span = initial_span;
    if initial_span == 0.0 {
        result.contraction_target = Some(trace.configs[onset].time());
        return result; // everyone already sits on the crash position
    }

    let target_offset = spans
        .iter()
        .position(|&l| l < target_fraction * initial_span);
    result.contraction_target =
        target_offset.map(|off| trace.configs[onset + off].time());
    if target_offset.is_none() {
        report.fail(format!(
            "survivor span never fell below {target_fraction} of its onset value {initial_span}; \
             onset configuration: {}",
            configuration_dump(&trace.configs[onset])
        ));
    }

    // A chain stacks up to n hops, each off by at most one tie band at the
    // starting diameter; this is the absolute play the banded semantics can
    // inject into the chain-derived step-distance bound. Its effect on the
    // one-round span contraction is even smaller (a band's worth at most),
    // because the span bound depends on the squared step distance.
    let hop_band = band(eps_tie, trace.configs[onset].diameter());
    let chain_pollution = 2.0 * n as f64 * hop_band;
    let factor = crash_contraction_factor(n);
    let z = trace.configs[onset]
        .records()
        .iter()
        .find(|r| r.crashed)
        .map(|r| r.position.clone())
        .expect("onset configuration has a crashed process");

    let mut first_attracted: Option<usize> = None;
    for i in onset..trace.steps.len() {
        let config = &trace.configs[i];
        let graph = ChoiceGraph::from_choices(config, &trace.steps[i].choices);

        // Per-survivor step-length bound for attracted survivors: the chain
        // to the crash position has at most n non-increasing (up to a band)
        // edges, so the first one is at least the crash distance over n.
        for record in config.records() {
            if graph.class(record.id) != ProcessClass::Attracted {
                continue;
            }
            let Some(view) = config.neighbor_view(record.id, eps_tie) else {
                continue;
            };
            let crash_distance = distance(&record.position, &z);
            let bound = crash_distance / n as f64;
            report.tick();
            if view.distance < bound - slack(bound, 1e-6, chain_pollution) {
                report.fail(format!(
                    "round {}: attracted {} has step distance {} below {} / {}; configuration: {}",
                    config.time(),
                    record.id,
                    view.distance,
                    crash_distance,
                    n,
                    configuration_dump(config)
                ));
            }
        }

        // Span contraction, on the rounds where its hypothesis holds.
        if graph.all_survivors_attracted() {
            if first_attracted.is_none() {
                first_attracted = Some(i);
            }
            let l_now = spans[i - onset];
            let l_next = spans[i + 1 - onset];
            let bound = factor * l_now;
            report.tick();
            if l_next > bound + slack(bound, CERT_REL, hop_band) {
                report.fail(format!(
                    "round {}: survivor span {} -> {} exceeds contraction bound {}; \
                     configuration: {}",
                    trace.configs[i].time(),
                    l_now,
                    l_next,
                    bound,
                    configuration_dump(&trace.configs[i])
                ));
            }
        }
    }
    match first_attracted {
        Some(i) => result.attraction_onset = Some(trace.configs[i].time()),
        None if onset < trace.steps.len() => {
            report.fail(format!(
                "survivors never become jointly attracted; onset configuration: {}",
                configuration_dump(&trace.configs[onset])
            ));
        }
        None => {}
    }
    result
}

/// Crashed processes never move: once a process is marked crashed its
/// position is bitwise constant for the rest of the trace.
pub fn check_crash_positions_frozen(trace: &Trace, report: &mut CertificateReport) {
    let n = trace.initial().len();
    for id in 0..n {
        let mut frozen_at: Option<&Point> = None;
        for config in &trace.configs {
            let record = config.record(ProcessId(id));
            match (&frozen_at, record.crashed) {
                (None, true) => frozen_at = Some(&record.position),
                (Some(expected), _) => {
                    report.tick();
                    if record.position != **expected {
                        report.fail(format!(
                            "crashed {} moved from {:?} to {:?} at round {}",
                            record.id,
                            expected,
                            record.position,
                            config.time()
                        ));
                    }
                }
                (None, false) => {}
            }
        }
    }
}

/// With crashed processes at two or more distinct positions, the population
/// can never gather: the enclosing radius stays at least half the largest
/// distance between crashed positions, at every round.
pub fn check_split_crash_blocks_gathering(trace: &Trace, report: &mut CertificateReport) {
    let final_config = trace.final_config();
    let crash_positions: Vec<&Point> = {
        let mut distinct: Vec<&Point> = Vec::new();
        for r in final_config.records() {
            if r.crashed && !distinct.iter().any(|p| **p == r.position) {
                distinct.push(&r.position);
            }
        }
        distinct
    };
    if crash_positions.len() < 2 {
        report.fail(format!(
            "expected crashed processes at two or more distinct positions, found {}",
            crash_positions.len()
        ));
        return;
    }
    let mut crash_spread = 0.0_f64;
    for (i, p) in crash_positions.iter().enumerate() {
        for q in &crash_positions[i + 1..] {
            crash_spread = crash_spread.max(distance(p, q));
        }
    }
    let floor = crash_spread / 2.0;
    for config in &trace.configs {
        if config.records().iter().filter(|r| r.crashed).count() < 2 {
            continue; // before every crash engaged
        }
        report.tick();
        let r = config.enclosing_ball().radius;
        if r < floor - slack(floor, CERT_REL, CERT_ABS) {
            report.fail(format!(
                "round {}: enclosing radius {} below the split floor {}; configuration: {}",
                config.time(),
                r,
                floor,
                configuration_dump(config)
            ));
        }
    }
}
