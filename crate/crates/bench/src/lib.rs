//! Shared fixtures for the criterion benchmarks: deterministic point clouds
//! and ready-to-execute run plans.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use myopic_core::engine::RunPlan;
use myopic_core::sampling::sample_cloud;
use myopic_core::scenarios::ScenarioSpec;
use myopic_core::{Configuration, MoveRule, Point, RunSettings};

/// `n` uniform points in `[-scale, scale]^d`, deterministic in `seed`.
pub fn cloud_points(n: usize, dimension: usize, scale: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_cloud(&mut rng, n, dimension, scale)
        .records()
        .iter()
        .map(|r| r.position.clone())
        .collect()
}

/// A run plan that gathers a unit-spaced collinear chain of `n` processes.
pub fn chain_plan(n: usize) -> RunPlan {
    let positions: Vec<Point> = (0..n)
        .map(|i| Point::new(vec![i as f64]).expect("finite"))
        .collect();
    let config = Configuration::new(positions).expect("nonempty");
    RunPlan::new(config, MoveRule::move_to_middle())
}

/// A run plan that drives a random planar cloud for `steps` rounds.
pub fn cloud_plan(n: usize, steps: u64, seed: u64) -> RunPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = sample_cloud(&mut rng, n, 2, 1.0);
    let mut plan = RunPlan::new(config, MoveRule::move_to_middle());
    plan.settings = RunSettings {
        max_steps: steps,
        ..RunSettings::default()
    };
    plan
}

/// The halving-triangle livelock, bounded to `steps` rounds.
pub fn triangle_plan(steps: u64) -> RunPlan {
    let built = ScenarioSpec::default_of("equilateral-triangle")
        .expect("known kind")
        .build()
        .expect("valid defaults");
    let mut plan = RunPlan::new(built.config, MoveRule::move_to_middle())
        .with_tie(built.tie)
        .with_ortho(built.ortho);
    plan.settings = RunSettings {
        max_steps: steps,
        ..RunSettings::default()
    };
    plan
}
