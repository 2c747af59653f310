//! Random instance generators for the certificate checks.
//!
//! Every generator is driven by a caller-supplied RNG, so instance streams
//! are reproducible from a seed. Generators that target a hypothesis (a
//! radius-to-spacing bound, the five-point layout) resample until the
//! hypothesis verifiably holds, so callers can count each returned instance
//! as an applicable trial.

use rand::Rng;

use crate::geometry::{distance, smallest_enclosing_ball, Point};
use crate::model::{distinct_distance_extremes, Configuration};

/// One standard normal variate (Box-Muller).
fn gaussian(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Uniform point in the ball of the given radius around the origin.
fn ball_offset(rng: &mut impl Rng, dimension: usize, radius: f64) -> Vec<f64> {
    let direction: Vec<f64> = (0..dimension).map(|_| gaussian(rng)).collect();
    let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; dimension];
    }
    let u: f64 = rng.gen_range(0.0..=1.0);
    let r = radius * u.powf(1.0 / dimension as f64);
    direction.iter().map(|c| c / norm * r).collect()
}

fn translate(base: &[f64], offset: &[f64]) -> Point {
    Point::new(base.iter().zip(offset).map(|(a, b)| a + b).collect()).expect("finite")
}

/// `n` uniform positions in the box `[-scale, scale]^d`.
pub fn sample_cloud(
    rng: &mut impl Rng,
    n: usize,
    dimension: usize,
    scale: f64,
) -> Configuration {
    let positions: Vec<Point> = (0..n)
        .map(|_| {
            Point::new(
                (0..dimension)
                    .map(|_| rng.gen_range(-scale..=scale))
                    .collect(),
            )
            .expect("finite")
        })
        .collect();
    Configuration::new(positions).expect("nonempty and uniform")
}

/// A configuration whose enclosing radius is at most `k` times its smallest
/// distinct distance — the hypothesis of the one-step radius contraction.
///
/// Mixes three families: pairs (always conforming), perturbed regular
/// polygons sized so the ratio stays under `k`, and small rejected clouds.
/// The returned instance is re-verified, so it always conforms.
pub fn sample_contraction_instance(
    rng: &mut impl Rng,
    k: f64,
    dimension: usize,
) -> Configuration {
    assert!(k >= 1.0);
    for _ in 0..200 {
        let candidate = match rng.gen_range(0..3_u8) {
            0 => {
                // a pair: radius = spacing / 2, conforming for every k >= 1
                let scale = 10.0_f64.powf(rng.gen_range(-2.0..2.0));
                let a: Vec<f64> = (0..dimension).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let offset = ball_offset(rng, dimension, scale);
                let b: Vec<f64> = a.iter().zip(&offset).map(|(x, o)| x + o).collect();
                if a == b {
                    continue;
                }
                Configuration::new(vec![
                    Point::new(a).expect("finite"),
                    Point::new(b).expect("finite"),
                ])
                .expect("two points")
            }
            1 if dimension >= 2 => {
                // regular polygon with circumradius/side below k, jittered
                let max_sides = (std::f64::consts::PI / (1.0 / (1.8 * k)).asin()).floor() as usize;
                let sides = rng.gen_range(3..=max_sides.max(3));
                let circumradius = 10.0_f64.powf(rng.gen_range(-1.0..1.5));
                let jitter = 0.005 * circumradius;
                let center: Vec<f64> =
                    (0..dimension).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let positions: Vec<Point> = (0..sides)
                    .map(|i| {
                        let angle = phase + i as f64 * std::f64::consts::TAU / sides as f64;
                        let mut base = center.clone();
                        base[0] += circumradius * angle.cos();
                        base[1] += circumradius * angle.sin();
                        translate(&base, &ball_offset(rng, dimension, jitter))
                    })
                    .collect();
                Configuration::new(positions).expect("polygon")
            }
            _ => {
                let n = rng.gen_range(2..=6);
                sample_cloud(rng, n, dimension, 1.0)
            }
        };
        let Some((d_min, _)) = distinct_distance_extremes(&candidate) else {
            continue;
        };
        let positions: Vec<Point> = candidate
            .records()
            .iter()
            .map(|r| r.position.clone())
            .collect();
        let radius = smallest_enclosing_ball(&positions)
            .expect("nonempty")
            .radius;
        if radius <= k * d_min {
            return candidate;
        }
    }
    // A fixed pair conforms for every k >= 1.
    let a = vec![0.0; dimension];
    let mut b = vec![0.0; dimension];
    b[0] = 1.0;
    Configuration::new(vec![
        Point::new(a).expect("finite"),
        Point::new(b).expect("finite"),
    ])
    .expect("two points")
}

/// Five points `[a, b, c, d, e]` satisfying the midpoint-contraction
/// hypothesis: with `x = dist(a, d) / 100`, points `b` and `c` lie within
/// `x` of `a`, `e` lies within `100 x` of `a`, and `e` is at least `40 x`
/// from `d`. Dimension and global scale are randomized.
pub fn sample_five_point_set(rng: &mut impl Rng) -> Vec<Point> {
    let dimension = rng.gen_range(1..=3_usize);
    let x = 10.0_f64.powf(rng.gen_range(-2.0..2.0));
    let a: Vec<f64> = (0..dimension)
        .map(|_| rng.gen_range(-10.0 * x..10.0 * x))
        .collect();
    let b = translate(&a, &ball_offset(rng, dimension, x));
    let c = translate(&a, &ball_offset(rng, dimension, x));
    let direction = {
        let mut v = ball_offset(rng, dimension, 1.0);
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            v[0] = 1.0;
        } else {
            for c in &mut v {
                *c /= norm;
            }
        }
        v
    };
    let d = translate(&a, &direction.iter().map(|c| c * 100.0 * x).collect::<Vec<_>>());
    let a_point = Point::new(a.clone()).expect("finite");
    for _ in 0..1000 {
        let e = translate(&a, &ball_offset(rng, dimension, 100.0 * x));
        if distance(&d, &e) >= 40.0 * x {
            return vec![a_point, b, c, d, e];
        }
    }
    // e at a itself always conforms: dist(a,e) = 0 and dist(d,e) = 100 x.
    let e = a_point.clone();
    vec![a_point, b, c, d, e]
}
