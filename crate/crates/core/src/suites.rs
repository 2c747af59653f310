//! Named certificate suites.
//!
//! Each suite generates instances from a seed, runs the matching checks from
//! [`crate::analysis`], and returns one [`CertificateReport`]. Trial `i` of a
//! suite draws its randomness from a stream derived from `(seed, suite name,
//! i)`, so results are reproducible and independent of execution order.
//! Engine or construction failures inside a trial are recorded as violations
//! rather than aborting the suite.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{
    check_alpha_contraction, check_crash_positions_frozen, check_diameter_monotone,
    check_fault_convergence, check_midpoint_contraction, check_pair_structure,
    check_radius_monotone, check_split_crash_blocks_gathering, configuration_dump, points_dump,
    CertificateReport,
};
use crate::engine::{RunPlan, RunSettings, StopReason, Trace};
use crate::geometry::{distance, smallest_enclosing_ball, smallest_enclosing_ball_brute_force, Point};
use crate::model::{Configuration, ProcessId};
use crate::policies::{MoveRule, TiePolicy};
use crate::sampling::{sample_cloud, sample_contraction_instance, sample_five_point_set};
use crate::scenarios::ScenarioSpec;
use crate::seeds;
use crate::tolerances::{slack, CERT_ABS, CERT_REL, EPS_TIE};

/// All suite names accepted by [`run_suite`], with one-line descriptions.
pub const SUITES: &[(&str, &str)] = &[
    (
        "monotonicity",
        "enclosing radius and diameter never grow under midpoint runs",
    ),
    (
        "alpha-contraction",
        "one-step radius contraction when spacing is within a factor k of the radius",
    ),
    (
        "midpoint-lemma",
        "pairwise midpoints of a conforming five-point set span at most 0.99 of the set",
    ),
    (
        "order-gathering",
        "order-based midpoint runs gather exactly within population minus one rounds",
    ),
    (
        "pair-structure",
        "order-based choice graphs: every cycle is a mutual pair, and one exists",
    ),
    (
        "fault-f1",
        "one crashed process: survivors become attracted and their span contracts",
    ),
    (
        "fault-f2",
        "two crashed positions: frozen forever and gathering stays impossible",
    ),
    (
        "impossibility-n6",
        "two distant triangles stay apart under the cyclic adversary, for midpoint and sideways rules",
    ),
    (
        "seb-oracle",
        "randomized enclosing-ball construction agrees with exhaustive enumeration",
    ),
];

#[derive(Debug, Error)]
#[error("unknown verification suite {0:?}")]
pub struct UnknownSuite(pub String);

/// How much work a suite does and from which seed it draws instances.
#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub trials: u64,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 0,
        }
    }
}

impl SuiteOptions {
    fn rng(&self, suite: &str, trial: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seeds::derive(self.seed, suite, &[trial]))
    }
}

/// Run a suite by name.
pub fn run_suite(name: &str, options: &SuiteOptions) -> Result<CertificateReport, UnknownSuite> {
    match name {
        "monotonicity" => Ok(monotonicity(options)),
        "alpha-contraction" => Ok(alpha_contraction(options)),
        "midpoint-lemma" => Ok(midpoint_lemma(options)),
        "order-gathering" => Ok(order_gathering(options)),
        "pair-structure" => Ok(pair_structure(options)),
        "fault-f1" => Ok(fault_single_crash(options)),
        "fault-f2" => Ok(fault_double_crash(options)),
        "impossibility-n6" => Ok(split_population(options)),
        "seb-oracle" => Ok(enclosing_ball_oracle(options)),
        other => Err(UnknownSuite(other.to_owned())),
    }
}

fn mixed_tie(rng: &mut impl Rng) -> TiePolicy {
    match rng.gen_range(0..3_u8) {
        0 => TiePolicy::OrderBased,
        1 => TiePolicy::LowestId,
        _ => TiePolicy::SeededRandom { seed: rng.gen() },
    }
}

fn note_error(report: &mut CertificateReport, trial: u64, err: impl std::fmt::Display) {
    report.fail(format!("trial {trial}: {err}"));
}

/// Radius and diameter monotonicity over midpoint runs with mixed tie
/// policies. `trials` = number of traces.
pub fn monotonicity(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("monotonicity");
    for trial in 0..options.trials {
        let mut rng = options.rng("monotonicity", trial);
        let n = rng.gen_range(2..=12);
        let dimension = rng.gen_range(1..=3);
        let scale = 10.0_f64.powf(rng.gen_range(-1.0..1.0));
        let config = sample_cloud(&mut rng, n, dimension, scale);
        let tie = mixed_tie(&mut rng);
        let plan = RunPlan::new(config, MoveRule::move_to_middle())
            .with_tie(tie)
            .with_settings(RunSettings {
                max_steps: 50,
                eps_gather: 0.0,
                ..RunSettings::default()
            });
        match plan.execute() {
            Ok(trace) => {
                check_radius_monotone(&trace, &mut report);
                check_diameter_monotone(&trace, &mut report);
            }
            Err(err) => note_error(&mut report, trial, err),
        }
    }
    report
}

/// One-step radius contraction on conforming instances. `trials` =
/// instances per factor, for factors 1, 2, and 10.
pub fn alpha_contraction(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("alpha-contraction");
    for (which, k) in [1.0, 2.0, 10.0].into_iter().enumerate() {
        for trial in 0..options.trials {
            let mut rng = options.rng("alpha-contraction", trial * 3 + which as u64);
            let dimension = rng.gen_range(1..=3);
            let config = sample_contraction_instance(&mut rng, k, dimension);
            let tie = mixed_tie(&mut rng);
            match check_alpha_contraction(&config, &tie, k, EPS_TIE, &mut report) {
                Ok(applied) => {
                    debug_assert!(applied, "sampled instances satisfy the hypothesis");
                }
                Err(err) => note_error(&mut report, trial, err),
            }
        }
    }
    report
}

/// Midpoint-span contraction on conforming five-point sets. `trials` =
/// number of sets.
pub fn midpoint_lemma(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("midpoint-lemma");
    for trial in 0..options.trials {
        let mut rng = options.rng("midpoint-lemma", trial);
        let points = sample_five_point_set(&mut rng);
        let applied = check_midpoint_contraction(&points, &mut report);
        debug_assert!(applied, "sampled five-point sets satisfy the hypothesis");
    }
    report
}

/// Exact gathering of order-based midpoint runs within `n - 1` rounds.
/// `trials` = total runs, spread round-robin over populations 2..=5 and
/// dimensions 1..=3.
pub fn order_gathering(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("order-gathering");
    let grid: Vec<(usize, usize)> = (2..=5_usize)
        .flat_map(|n| (1..=3_usize).map(move |d| (n, d)))
        .collect();
    for trial in 0..options.trials {
        let mut rng = options.rng("order-gathering", trial);
        let (n, dimension) = grid[(trial % grid.len() as u64) as usize];
        let scale = 10.0_f64.powf(rng.gen_range(-1.0..1.0));
        let config = sample_cloud(&mut rng, n, dimension, scale);
        let plan = RunPlan::new(config, MoveRule::move_to_middle()).with_settings(RunSettings {
            max_steps: n as u64 + 2,
            eps_gather: 0.0,
            ..RunSettings::default()
        });
        match plan.execute() {
            Ok(trace) => {
                report.tick();
                if trace.stop != StopReason::Gathered || trace.step_count() > n - 1 {
                    report.fail(format!(
                        "trial {trial}: n = {n}, d = {dimension} stopped {:?} after {} rounds; \
                         configuration: {}",
                        trace.stop,
                        trace.step_count(),
                        configuration_dump(trace.initial())
                    ));
                }
            }
            Err(err) => note_error(&mut report, trial, err),
        }
    }
    report
}

/// Structure of order-based choice graphs on crash-free clouds, including
/// clouds with exactly co-located processes. `trials` = configurations.
pub fn pair_structure(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("pair-structure");
    for trial in 0..options.trials {
        let mut rng = options.rng("pair-structure", trial);
        let n = rng.gen_range(2..=7);
        let dimension = rng.gen_range(1..=3);
        let mut config = sample_cloud(&mut rng, n, dimension, 1.0);
        if rng.gen_bool(0.2) && n >= 3 {
            // duplicate one position exactly to exercise co-location
            let from = rng.gen_range(0..n);
            let to = (from + 1) % n;
            let mut positions: Vec<Point> = config
                .records()
                .iter()
                .map(|r| r.position.clone())
                .collect();
            positions[to] = positions[from].clone();
            config = Configuration::new(positions).expect("same shape");
        }
        if let Err(err) = check_pair_structure(&config, EPS_TIE, &mut report) {
            note_error(&mut report, trial, err);
        }
    }
    report
}

/// Convergence to a single crashed position. `trials` = runs; populations
/// cycle through 3..=10 and the crash fires in round 0, 1, or 2. Clouds stay
/// within unit diameter so the banded-tie pollution absorbed by the
/// contraction check is at most the flat `band(eps_tie, 1)`.
pub fn fault_single_crash(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("fault-f1");
    for trial in 0..options.trials {
        let mut rng = options.rng("fault-f1", trial);
        let n = 3 + (trial % 8) as usize; // 3..=10
        let dimension = rng.gen_range(1..=3);
        let scale = rng.gen_range(0.05..0.25);
        let config = sample_cloud(&mut rng, n, dimension, scale);
        let crash_at = trial % 3;
        let victim = ProcessId(rng.gen_range(0..n));
        let budget = 2000 * n as u64 + 10;
        let plan = RunPlan::new(config, MoveRule::move_to_middle())
            .with_tie(mixed_tie(&mut rng))
            .with_crash(crash_at, vec![victim])
            .with_settings(RunSettings {
                max_steps: budget,
                eps_gather: 0.0,
                ..RunSettings::default()
            });
        match plan.execute() {
            Ok(trace) => {
                let fault = check_fault_convergence(&trace, EPS_TIE, 1e-6, &mut report);
                if let (Some(onset), Some(target)) =
                    (fault.crash_onset, fault.contraction_target)
                {
                    report.tick();
                    if target - onset > 2000 * n as u64 {
                        report.fail(format!(
                            "trial {trial}: span needed {} rounds to contract, budget {}; \
                             configuration: {}",
                            target - onset,
                            2000 * n,
                            configuration_dump(trace.initial())
                        ));
                    }
                }
            }
            Err(err) => note_error(&mut report, trial, err),
        }
    }
    report
}

/// Two crashed processes at positions exactly one unit apart block gathering
/// forever. `trials` = runs.
pub fn fault_double_crash(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("fault-f2");
    for trial in 0..options.trials {
        let mut rng = options.rng("fault-f2", trial);
        let n = rng.gen_range(4..=10);
        let dimension = rng.gen_range(1..=3);
        let cloud = sample_cloud(&mut rng, n, dimension, 1.0);
        let first = rng.gen_range(0..n);
        let second = (first + 1 + rng.gen_range(0..n - 1)) % n;
        // pin the victims one unit apart along a random axis
        let axis = rng.gen_range(0..dimension);
        let mut positions: Vec<Point> = cloud
            .records()
            .iter()
            .map(|r| r.position.clone())
            .collect();
        let mut far = positions[first].coords().to_vec();
        far[axis] += 1.0;
        positions[second] = Point::new(far).expect("finite");
        let config = Configuration::new(positions).expect("same shape");
        let plan = RunPlan::new(config, MoveRule::move_to_middle())
            .with_tie(mixed_tie(&mut rng))
            .with_crash(0, vec![ProcessId(first), ProcessId(second)])
            .with_settings(RunSettings {
                max_steps: 500,
                ..RunSettings::default()
            });
        match plan.execute() {
            Ok(trace) => {
                report.tick();
                if trace.stop == StopReason::Gathered {
                    report.fail(format!(
                        "trial {trial}: gathered despite two crashed positions; configuration: {}",
                        configuration_dump(trace.initial())
                    ));
                }
                check_crash_positions_frozen(&trace, &mut report);
                check_split_crash_blocks_gathering(&trace, &mut report);
            }
            Err(err) => note_error(&mut report, trial, err),
        }
    }
    report
}

fn split_leg_invariants(
    trace: &Trace,
    side: f64,
    separation: f64,
    trial: u64,
    leg: &str,
    report: &mut CertificateReport,
) {
    for config in &trace.configs {
        // the two groups stay far apart
        let mut cross_min = f64::INFINITY;
        for i in 0..3 {
            for j in 3..6 {
                cross_min = cross_min.min(distance(
                    config.position(ProcessId(i)),
                    config.position(ProcessId(j)),
                ));
            }
        }
        // every vertex stays within one circumradius (side/sqrt(3)) of its
        // group's immovable barycenter
        let floor = (separation - 2.0 / 3.0_f64.sqrt()) * side - slack(side, 1e-6, 0.0);
        report.tick();
        if cross_min < floor {
            report.fail(format!(
                "trial {trial} {leg}: groups came within {cross_min} at round {} (floor {floor})",
                config.time()
            ));
        }
        // group barycenters never drift
        let barycenter = |ids: std::ops::Range<usize>| -> Vec<f64> {
            let dim = config.dimension();
            let mut acc = vec![0.0; dim];
            for id in ids {
                for (a, &c) in acc.iter_mut().zip(config.position(ProcessId(id)).coords()) {
                    *a += c / 3.0;
                }
            }
            acc
        };
        let g1 = barycenter(0..3);
        let g2 = barycenter(3..6);
        let drift: f64 = g1
            .iter()
            .zip(&g2)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let expected = separation * side;
        report.tick();
        if (drift - expected).abs() > slack(expected, 1e-6, CERT_ABS) {
            report.fail(format!(
                "trial {trial} {leg}: barycenter distance {drift} left {expected} at round {}",
                config.time()
            ));
        }
        // each group remains (nearly) equilateral
        for group in [[0, 1, 2], [3, 4, 5]] {
            let sides = [
                distance(
                    config.position(ProcessId(group[0])),
                    config.position(ProcessId(group[1])),
                ),
                distance(
                    config.position(ProcessId(group[1])),
                    config.position(ProcessId(group[2])),
                ),
                distance(
                    config.position(ProcessId(group[0])),
                    config.position(ProcessId(group[2])),
                ),
            ];
            let lo = sides.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = sides.iter().cloned().fold(0.0_f64, f64::max);
            report.tick();
            if hi - lo > slack(hi, CERT_REL, CERT_ABS) {
                report.fail(format!(
                    "trial {trial} {leg}: side spread {:e} at round {}",
                    hi - lo,
                    config.time()
                ));
            }
        }
    }
}

/// The six-process split population under the cyclic adversary: neither the
/// midpoint rule nor a rule with a sideways component ever brings the two
/// triangles together. Trial 0 uses the canonical rotations and demands the
/// midpoint run reach a fixpoint after at least 40 rounds; later trials
/// randomize the rotations with a fixed 40-round budget.
pub fn split_population(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("impossibility-n6");
    let side = 1.0;
    let separation = 10.0;
    for trial in 0..options.trials.max(1) {
        let mut rng = options.rng("impossibility-n6", trial);
        let (rotation_first, rotation_second) = if trial == 0 {
            (0.4, 2.1)
        } else {
            (
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        };
        let spec = ScenarioSpec::TwoTriangles {
            side,
            separation,
            dimension: 2,
            rotation_first,
            rotation_second,
        };
        let built = match spec.build() {
            Ok(built) => built,
            Err(err) => {
                note_error(&mut report, trial, err);
                continue;
            }
        };

        // Midpoint leg. On the canonical rotations the run must die out in a
        // fixpoint (never by gathering) after at least 40 rounds of halving.
        let mm_budget = if trial == 0 { 200 } else { 40 };
        let plan = RunPlan::new(built.config.clone(), MoveRule::move_to_middle())
            .with_tie(built.tie.clone())
            .with_ortho(built.ortho.clone())
            .with_settings(RunSettings {
                max_steps: mm_budget,
                ..RunSettings::default()
            });
        match plan.execute() {
            Ok(trace) => {
                report.tick();
                if trial == 0 {
                    if trace.stop != StopReason::Fixpoint || trace.step_count() < 40 {
                        report.fail(format!(
                            "midpoint leg stopped {:?} after {} rounds; expected a fixpoint after >= 40",
                            trace.stop,
                            trace.step_count()
                        ));
                    }
                } else if trace.stop == StopReason::Gathered {
                    report.fail(format!("trial {trial}: midpoint leg gathered"));
                }
                split_leg_invariants(&trace, side, separation, trial, "midpoint", &mut report);
            }
            Err(err) => note_error(&mut report, trial, err),
        }

        // Sideways leg: a rule that also moves orthogonally, with the
        // adversary keeping both triangles equilateral for 60 rounds.
        let rule = MoveRule::linear(0.05, 0.02).expect("finite parameters");
        let plan = RunPlan::new(built.config.clone(), rule)
            .with_tie(built.tie.clone())
            .with_ortho(built.ortho.clone())
            .with_settings(RunSettings {
                max_steps: 60,
                ..RunSettings::default()
            });
        match plan.execute() {
            Ok(trace) => {
                report.tick();
                if trace.stop != StopReason::Budget || trace.step_count() != 60 {
                    report.fail(format!(
                        "trial {trial}: sideways leg stopped {:?} after {} rounds; expected the full 60",
                        trace.stop,
                        trace.step_count()
                    ));
                }
                split_leg_invariants(&trace, side, separation, trial, "sideways", &mut report);
            }
            Err(err) => note_error(&mut report, trial, err),
        }
    }
    report
}

/// The randomized enclosing-ball construction against the exhaustive
/// enumeration oracle. `trials` = point sets (up to 8 points, dimensions
/// 1..=3, occasionally with duplicates or collinear layouts).
pub fn enclosing_ball_oracle(options: &SuiteOptions) -> CertificateReport {
    let mut report = CertificateReport::new("seb-oracle");
    for trial in 0..options.trials {
        let mut rng = options.rng("seb-oracle", trial);
        let dimension = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=8);
        let mut points: Vec<Point> = match rng.gen_range(0..4_u8) {
            // collinear layout
            0 => {
                let origin: Vec<f64> =
                    (0..dimension).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let step: Vec<f64> = (0..dimension).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (0..n)
                    .map(|i| {
                        Point::new(
                            origin
                                .iter()
                                .zip(&step)
                                .map(|(o, s)| o + s * i as f64)
                                .collect(),
                        )
                        .expect("finite")
                    })
                    .collect()
            }
            _ => sample_cloud(&mut rng, n, dimension, 5.0)
                .records()
                .iter()
                .map(|r| r.position.clone())
                .collect(),
        };
        if n >= 2 && rng.gen_bool(0.25) {
            let from = rng.gen_range(0..points.len());
            let to = (from + 1) % points.len();
            points[to] = points[from].clone();
        }
        let fast = smallest_enclosing_ball(&points);
        let brute = smallest_enclosing_ball_brute_force(&points);
        report.tick();
        match (fast, brute) {
            (Ok(fast), Ok(brute)) => {
                let tolerance = slack(brute.radius, 1e-9, 1e-9);
                if (fast.radius - brute.radius).abs() > tolerance {
                    report.fail(format!(
                        "trial {trial}: radii disagree, {} vs oracle {}; points: {}",
                        fast.radius,
                        brute.radius,
                        points_dump(&points)
                    ));
                }
                for p in &points {
                    if !fast.contains(p, tolerance) {
                        report.fail(format!(
                            "trial {trial}: point {p:?} escapes the fast ball; points: {}",
                            points_dump(&points)
                        ));
                    }
                }
            }
            (Err(err), _) | (_, Err(err)) => note_error(&mut report, trial, err),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: u64) -> SuiteOptions {
        SuiteOptions { trials, seed: 7 }
    }

    #[test]
    fn every_listed_suite_runs_and_passes_at_small_scale() {
        for (name, _) in SUITES {
            let trials = if *name == "impossibility-n6" { 2 } else { 25 };
            let report = run_suite(name, &small(trials)).unwrap();
            assert!(
                report.passed(),
                "suite {name} failed: {:?}",
                report.examples
            );
            assert!(report.checked > 0, "suite {name} checked nothing");
        }
    }

    #[test]
    fn unknown_suites_are_rejected() {
        assert!(run_suite("does-not-exist", &small(1)).is_err());
    }

    #[test]
    fn suite_reports_are_reproducible() {
        let a = run_suite("monotonicity", &small(10)).unwrap();
        let b = run_suite("monotonicity", &small(10)).unwrap();
        assert_eq!(a.checked, b.checked);
        assert_eq!(a.violation_count, b.violation_count);
    }
}
