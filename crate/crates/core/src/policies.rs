//! Movement rules and the adversary's two levers.
//!
//! Each round a process observes the distance `D` to its nearest distinct
//! location and moves to
//!
//! ```text
//! target = p + fx(D) * x + fy(D) * y
//! ```
//!
//! where `x` is the unit vector toward the chosen neighbor and `y` is a unit
//! vector orthogonal to `x`. The adversary controls two things the process
//! cannot: *which* tied nearest neighbor is chosen ([`TiePolicy`]) and which
//! orthogonal direction `y` points ([`OrthogonalChoice`]). Everything here is
//! deterministic given the policy, the configuration, and (for seeded
//! policies) the seed.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    distance, midpoint, orthonormal_complement_sample, position_cmp, GeometryError, OrthoSelector,
    Point, Vector,
};
use crate::model::{Configuration, NeighborView, ProcessId};
use crate::seeds;
use crate::tolerances::{band, EPS_NORM};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("rule parameter {name} is not finite: {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },
    #[error("cannot parse rule spec {input:?}: expected \"mm\" or \"linear:AX,AY\"")]
    UnparsableRule { input: String },
    #[error(
        "cyclic policy needs a near-equilateral triple at {subject}: {detail}"
    )]
    NotEquilateral { subject: ProcessId, detail: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// How far toward (and beside) the chosen neighbor a process moves, as a
/// function of the observed distance.
#[derive(Clone)]
pub struct MoveRule {
    name: String,
    kind: RuleKind,
}

#[derive(Clone)]
enum RuleKind {
    /// `fx(D) = D/2`, `fy = 0`, computed as the exact coordinate-wise
    /// midpoint so that two processes aiming at each other land on
    /// bitwise-identical coordinates.
    MoveToMiddle,
    /// `fx(D) = ax * D`, `fy(D) = ay * D`.
    Linear { ax: f64, ay: f64 },
    /// Arbitrary displacement profiles.
    Custom {
        fx: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        fy: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for MoveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MoveRule({})", self.name)
    }
}

impl MoveRule {
    pub fn move_to_middle() -> Self {
        Self {
            name: "move-to-middle".to_owned(),
            kind: RuleKind::MoveToMiddle,
        }
    }

    pub fn linear(ax: f64, ay: f64) -> Result<Self, PolicyError> {
        if !ax.is_finite() {
            return Err(PolicyError::NonFiniteParameter { name: "ax", value: ax });
        }
        if !ay.is_finite() {
            return Err(PolicyError::NonFiniteParameter { name: "ay", value: ay });
        }
        Ok(Self {
            name: format!("linear(ax={ax}, ay={ay})"),
            kind: RuleKind::Linear { ax, ay },
        })
    }

    pub fn custom(
        name: impl Into<String>,
        fx: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fy: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind: RuleKind::Custom {
                fx: Arc::new(fx),
                fy: Arc::new(fy),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Displacement along the direction toward the chosen neighbor.
    pub fn fx(&self, d: f64) -> f64 {
        match &self.kind {
            RuleKind::MoveToMiddle => d / 2.0,
            RuleKind::Linear { ax, .. } => ax * d,
            RuleKind::Custom { fx, .. } => fx(d),
        }
    }

    /// Displacement along the adversary-chosen orthogonal direction.
    pub fn fy(&self, d: f64) -> f64 {
        match &self.kind {
            RuleKind::MoveToMiddle => 0.0,
            RuleKind::Linear { ay, .. } => ay * d,
            RuleKind::Custom { fy, .. } => fy(d),
        }
    }

    /// True when the rule is the exact-midpoint rule, which takes the
    /// bitwise-exact code path in [`next_position`].
    pub fn is_exact_midpoint(&self) -> bool {
        matches!(self.kind, RuleKind::MoveToMiddle)
    }
}

/// Serializable rule description for scenario files and the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RuleSpec {
    MoveToMiddle,
    Linear { ax: f64, ay: f64 },
}

impl RuleSpec {
    pub fn build(&self) -> Result<MoveRule, PolicyError> {
        match self {
            RuleSpec::MoveToMiddle => Ok(MoveRule::move_to_middle()),
            RuleSpec::Linear { ax, ay } => MoveRule::linear(*ax, *ay),
        }
    }
}

impl FromStr for RuleSpec {
    type Err = PolicyError;

    /// Accepts `mm` (or `move-to-middle`) and `linear:AX,AY`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unparsable = || PolicyError::UnparsableRule { input: s.to_owned() };
        match s.trim() {
            "mm" | "move-to-middle" => Ok(RuleSpec::MoveToMiddle),
            other => {
                let rest = other.strip_prefix("linear:").ok_or_else(unparsable)?;
                let (ax, ay) = rest.split_once(',').ok_or_else(unparsable)?;
                let ax: f64 = ax.trim().parse().map_err(|_| unparsable())?;
                let ay: f64 = ay.trim().parse().map_err(|_| unparsable())?;
                if !(ax.is_finite() && ay.is_finite()) {
                    return Err(unparsable());
                }
                Ok(RuleSpec::Linear { ax, ay })
            }
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::MoveToMiddle => write!(f, "mm"),
            RuleSpec::Linear { ax, ay } => write!(f, "linear:{ax},{ay}"),
        }
    }
}

/// One scripted neighbor choice: at round `t`, the process holding `rank`
/// (in the (position, id) order of that round) picks candidate number
/// `choice` from its view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub t: u64,
    pub rank: usize,
    pub choice: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdversaryScript {
    pub entries: Vec<ScriptEntry>,
}

impl AdversaryScript {
    fn lookup(&self, t: u64, rank: usize) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.t == t && e.rank == rank)
            .map(|e| e.choice)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Positive,
    Negative,
}

/// One scripted orthogonal-direction sign, addressed like [`ScriptEntry`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignEntry {
    pub t: u64,
    pub rank: usize,
    pub sign: Sign,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignScript {
    pub entries: Vec<SignEntry>,
}

impl SignScript {
    fn lookup(&self, t: u64, rank: usize) -> Option<Sign> {
        self.entries
            .iter()
            .find(|e| e.t == t && e.rank == rank)
            .map(|e| e.sign)
    }
}

/// How ties between equally near neighbors are broken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TiePolicy {
    /// The candidate at the lexicographically largest position; among
    /// co-located candidates, the lowest id. The canonical deterministic
    /// choice.
    OrderBased,
    /// The candidate with the smallest id, regardless of position.
    LowestId,
    /// Uniform choice among candidates from a per-(round, process) stream
    /// derived from `seed`.
    SeededRandom { seed: u64 },
    /// Scripted choices; rounds and ranks the script does not mention fall
    /// back to [`TiePolicy::OrderBased`].
    Scripted { script: AdversaryScript },
    /// The rotation-inducing choice on a near-equilateral triple: sort the
    /// subject and its two candidate locations lexicographically and pick
    /// the cyclic successor of the subject. Rejects views that are not a
    /// near-equilateral two-location tie.
    EquilateralCyclic,
}

/// How the orthogonal component's direction is selected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrthogonalChoice {
    /// Canonical orientation (+90 degrees in the plane).
    FixedPositive,
    /// The opposite orientation.
    FixedNegative,
    /// Uniform unit vector in the orthogonal complement from a
    /// per-(round, process) stream derived from `seed`.
    SeededRandom { seed: u64 },
    /// Scripted signs applied to the canonical orientation; unmentioned
    /// rounds and ranks use the positive sign.
    Scripted { script: SignScript },
    /// The in-plane direction that keeps a near-equilateral triple
    /// equilateral: away from the triple's barycenter when the sideways
    /// displacement is nonnegative, toward it otherwise.
    EquilateralCyclic,
}

/// Everything a policy may consult besides the view itself.
#[derive(Clone, Copy)]
pub struct ChoiceContext<'a> {
    pub config: &'a Configuration,
    /// The subject's rank in this round's (position, id) order.
    pub rank: usize,
    pub eps_tie: f64,
}

/// Pick the candidate the subject will treat as its closest neighbor.
pub fn select_neighbor(
    view: &NeighborView,
    ctx: &ChoiceContext<'_>,
    tie: &TiePolicy,
) -> Result<ProcessId, PolicyError> {
    debug_assert!(!view.candidates.is_empty());
    match tie {
        TiePolicy::OrderBased => Ok(order_based(view, ctx.config)),
        TiePolicy::LowestId => Ok(*view
            .candidates
            .iter()
            .min_by_key(|c| c.0)
            .expect("candidates nonempty")),
        TiePolicy::SeededRandom { seed } => {
            let stream = seeds::derive(
                *seed,
                "tie",
                &[ctx.config.time(), view.subject.0 as u64],
            );
            let mut rng = ChaCha8Rng::seed_from_u64(stream);
            let idx = rng.gen_range(0..view.candidates.len());
            Ok(view.candidates[idx])
        }
        TiePolicy::Scripted { script } => {
            match script.lookup(ctx.config.time(), ctx.rank) {
                Some(choice) if choice < view.candidates.len() => Ok(view.candidates[choice]),
                _ => Ok(order_based(view, ctx.config)),
            }
        }
        TiePolicy::EquilateralCyclic => cyclic_successor(view, ctx),
    }
}

/// Largest candidate position; lowest id among candidates standing there.
fn order_based(view: &NeighborView, config: &Configuration) -> ProcessId {
    let last = *view.candidates.last().expect("candidates nonempty");
    let top_pos = config.position(last);
    *view
        .candidates
        .iter()
        .find(|&&c| config.position(c) == top_pos)
        .expect("the maximal position has an occupant")
}

/// The two distinct candidate locations of a near-equilateral tie, as
/// (representative id, position) pairs, after validating that the three
/// pairwise distances agree within the tie band. Single-location views get
/// `Ok(None)` (the choice is forced; no triple to validate).
fn equilateral_pair(
    view: &NeighborView,
    ctx: &ChoiceContext<'_>,
) -> Result<Option<(ProcessId, ProcessId)>, PolicyError> {
    let reps = view.distinct_candidate_positions(ctx.config);
    match reps.len() {
        1 => Ok(None),
        2 => {
            let own = ctx.config.position(view.subject);
            let q1 = ctx.config.position(reps[0]);
            let q2 = ctx.config.position(reps[1]);
            let sides = [distance(own, q1), distance(own, q2), distance(q1, q2)];
            let lo = sides.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = sides.iter().cloned().fold(0.0_f64, f64::max);
            if hi - lo > band(ctx.eps_tie, view.distance) {
                return Err(PolicyError::NotEquilateral {
                    subject: view.subject,
                    detail: format!("side lengths spread over {:e}", hi - lo),
                });
            }
            Ok(Some((reps[0], reps[1])))
        }
        k => Err(PolicyError::NotEquilateral {
            subject: view.subject,
            detail: format!("{k} distinct tied locations"),
        }),
    }
}

fn cyclic_successor(
    view: &NeighborView,
    ctx: &ChoiceContext<'_>,
) -> Result<ProcessId, PolicyError> {
    let Some((r1, r2)) = equilateral_pair(view, ctx)? else {
        return Ok(view.candidates[0]); // single location: forced choice
    };
    let own = ctx.config.position(view.subject);
    let mut triple: Vec<&Point> = vec![own, ctx.config.position(r1), ctx.config.position(r2)];
    triple.sort_by(|a, b| position_cmp(a, b));
    let own_index = triple
        .iter()
        .position(|p| *p == own)
        .expect("subject position is in the triple");
    let successor = triple[(own_index + 1) % 3];
    Ok(*view
        .candidates
        .iter()
        .find(|&&c| ctx.config.position(c) == successor)
        .expect("successor location is a candidate location"))
}

/// Resolve the orthogonal unit vector for one move, or `None` when the rule
/// has no sideways component at this distance or the space is a line.
pub fn resolve_orthogonal(
    view: &NeighborView,
    chosen: ProcessId,
    ctx: &ChoiceContext<'_>,
    ortho: &OrthogonalChoice,
    rule: &MoveRule,
) -> Result<Option<Vector>, PolicyError> {
    let fy = rule.fy(view.distance);
    if fy == 0.0 || ctx.config.dimension() < 2 {
        return Ok(None);
    }
    let own = ctx.config.position(view.subject);
    let x = own.to(ctx.config.position(chosen));
    let y = match ortho {
        OrthogonalChoice::FixedPositive => {
            orthonormal_complement_sample(&x, &OrthoSelector::Positive)?
        }
        OrthogonalChoice::FixedNegative => {
            orthonormal_complement_sample(&x, &OrthoSelector::Negative)?
        }
        OrthogonalChoice::SeededRandom { seed } => {
            let stream = seeds::derive(
                *seed,
                "ortho",
                &[ctx.config.time(), view.subject.0 as u64],
            );
            orthonormal_complement_sample(&x, &OrthoSelector::Seeded(stream))?
        }
        OrthogonalChoice::Scripted { script } => {
            let selector = match script.lookup(ctx.config.time(), ctx.rank) {
                Some(Sign::Negative) => OrthoSelector::Negative,
                _ => OrthoSelector::Positive,
            };
            orthonormal_complement_sample(&x, &selector)?
        }
        OrthogonalChoice::EquilateralCyclic => {
            let Some((r1, r2)) = equilateral_pair(view, ctx)? else {
                return Err(PolicyError::NotEquilateral {
                    subject: view.subject,
                    detail: "single tied location cannot define a plane".to_owned(),
                });
            };
            equilateral_outward(view, chosen, r1, r2, ctx, fy)?
        }
    };
    Ok(Some(y))
}

/// In-plane unit vector orthogonal to the chosen edge, pointing away from
/// the triple's barycenter (or toward it when `fy` is negative), so that a
/// symmetric sideways step preserves the equilateral shape.
fn equilateral_outward(
    view: &NeighborView,
    chosen: ProcessId,
    r1: ProcessId,
    r2: ProcessId,
    ctx: &ChoiceContext<'_>,
    fy: f64,
) -> Result<Vector, PolicyError> {
    let own = ctx.config.position(view.subject);
    let q1 = ctx.config.position(r1);
    let q2 = ctx.config.position(r2);
    let dim = own.dimension();
    let mut g = vec![0.0; dim];
    for p in [own, q1, q2] {
        for (acc, &c) in g.iter_mut().zip(p.coords()) {
            *acc += c / 3.0;
        }
    }
    let barycenter = Point::new(g).expect("finite");
    let x_hat = own.to(ctx.config.position(chosen)).unit()?;
    let toward_center = own.to(&barycenter);
    let mut w = toward_center.add(&x_hat.scale(-toward_center.dot(&x_hat)));
    let norm = w.norm();
    if norm <= EPS_NORM * view.distance.max(1.0) {
        return Err(PolicyError::NotEquilateral {
            subject: view.subject,
            detail: "triple is collinear; no in-plane normal".to_owned(),
        });
    }
    w = w.scale(-1.0 / norm); // away from the barycenter
    Ok(if fy >= 0.0 { w } else { w.negate() })
}

/// Apply the rule: where the subject at `own` moves, given its chosen
/// neighbor's position and (when applicable) the resolved orthogonal
/// direction.
pub fn next_position(
    own: &Point,
    chosen_pos: &Point,
    rule: &MoveRule,
    y_hat: Option<&Vector>,
) -> Point {
    if rule.is_exact_midpoint() {
        return midpoint(own, chosen_pos);
    }
    let d = distance(own, chosen_pos);
    debug_assert!(d > 0.0, "chosen neighbor must be at a distinct location");
    let x_hat = own.to(chosen_pos).scale(1.0 / d);
    let mut target = own.translate(&x_hat.scale(rule.fx(d)));
    if let Some(y) = y_hat {
        target = target.translate(&y.scale(rule.fy(d)));
    }
    target
}
