//! Points, vectors, and balls in low-dimensional Euclidean space.
//!
//! Coordinates are `f64` throughout. Positions are compared two ways and the
//! distinction matters everywhere above this module:
//!
//! * **exact** equality (`Point: PartialEq`, coordinate-wise) decides whether
//!   two positions are the same occupied location;
//! * the **lexicographic order** ([`position_cmp`]) is the total order used
//!   for deterministic tie-breaking.
//!
//! The smallest enclosing ball has two independent implementations: the
//! randomized incremental [`smallest_enclosing_ball`] used by the simulation,
//! and the subset-enumeration oracle [`smallest_enclosing_ball_brute_force`]
//! kept separate so each can check the other.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerances::EPS_NORM;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point must have at least one coordinate")]
    EmptyCoordinates,
    #[error("coordinate {index} is not finite: {value}")]
    NonFiniteCoordinate { index: usize, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("no orthogonal complement in dimension 1")]
    NoOrthogonalComplement,
    #[error("direction vector is degenerate (norm {norm:e})")]
    DegenerateDirection { norm: f64 },
}

/// A position in d-dimensional space. Coordinates are finite by construction.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<f64>,
}

/// A displacement in d-dimensional space. Finite by construction.
#[derive(Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector {
    components: Vec<f64>,
}

fn check_finite(values: &[f64]) -> Result<(), GeometryError> {
    if values.is_empty() {
        return Err(GeometryError::EmptyCoordinates);
    }
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(GeometryError::NonFiniteCoordinate { index, value });
        }
    }
    Ok(())
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        check_finite(&coords)?;
        Ok(Self { coords })
    }

    pub fn origin(dimension: usize) -> Self {
        assert!(dimension >= 1, "dimension must be at least 1");
        Self { coords: vec![0.0; dimension] }
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Displacement from `self` to `other`.
    pub fn to(&self, other: &Point) -> Vector {
        assert_same_dim(self.dimension(), other.dimension());
        Vector {
            components: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| b - a)
                .collect(),
        }
    }

    pub fn translate(&self, v: &Vector) -> Point {
        assert_same_dim(self.dimension(), v.dimension());
        Point {
            coords: self
                .coords
                .iter()
                .zip(&v.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let coords = Vec::<f64>::deserialize(deserializer)?;
        Point::new(coords).map_err(serde::de::Error::custom)
    }
}

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self, GeometryError> {
        check_finite(&components)?;
        Ok(Self { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_same_dim(self.dimension(), other.dimension());
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector {
            components: self.components.iter().map(|c| c * factor).collect(),
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_same_dim(self.dimension(), other.dimension());
        Vector {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn negate(&self) -> Vector {
        self.scale(-1.0)
    }

    /// Unit vector in the same direction.
    pub fn unit(&self) -> Result<Vector, GeometryError> {
        let n = self.norm();
        let scale = self
            .components
            .iter()
            .fold(0.0_f64, |acc, c| acc.max(c.abs()));
        if n <= EPS_NORM * scale.max(1.0) {
            return Err(GeometryError::DegenerateDirection { norm: n });
        }
        Ok(self.scale(1.0 / n))
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ">")
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let components = Vec::<f64>::deserialize(deserializer)?;
        Vector::new(components).map_err(serde::de::Error::custom)
    }
}

#[track_caller]
fn assert_same_dim(left: usize, right: usize) {
    assert_eq!(left, right, "dimension mismatch: {left} vs {right}");
}

/// Euclidean distance.
pub fn distance(a: &Point, b: &Point) -> f64 {
    assert_same_dim(a.dimension(), b.dimension());
    a.coords
        .iter()
        .zip(&b.coords)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Coordinate-wise midpoint `(a + b) / 2`.
///
/// This is the exact formula the move-to-the-middle rule uses; callers rely
/// on two processes computing bitwise-identical midpoints from the same pair.
pub fn midpoint(a: &Point, b: &Point) -> Point {
    assert_same_dim(a.dimension(), b.dimension());
    Point {
        coords: a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| (x + y) / 2.0)
            .collect(),
    }
}

/// Lexicographic comparison of positions: first differing coordinate decides.
///
/// Total on finite coordinates, which [`Point`] guarantees.
pub fn position_cmp(a: &Point, b: &Point) -> Ordering {
    assert_same_dim(a.dimension(), b.dimension());
    for (x, y) in a.coords.iter().zip(&b.coords) {
        match x.partial_cmp(y).expect("coordinates are finite") {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

pub fn position_less(a: &Point, b: &Point) -> bool {
    position_cmp(a, b) == Ordering::Less
}

/// A closed ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, p: &Point, slack: f64) -> bool {
        self.radius >= 0.0 && distance(&self.center, p) <= self.radius + slack
    }
}

fn uniform_dimension(points: &[Point]) -> Result<usize, GeometryError> {
    let first = points.first().ok_or(GeometryError::EmptyPointSet)?;
    let dim = first.dimension();
    for p in points {
        if p.dimension() != dim {
            return Err(GeometryError::DimensionMismatch {
                left: dim,
                right: p.dimension(),
            });
        }
    }
    Ok(dim)
}

/// Smallest enclosing ball, randomized incremental (move-to-front Welzl).
///
/// The insertion order is shuffled with a fixed internal seed, so the result
/// is reproducible across runs and platforms while keeping the expected
/// linear running time. Works in any dimension; the support solve handles up
/// to `d + 1` boundary points.
pub fn smallest_enclosing_ball(points: &[Point]) -> Result<Ball, GeometryError> {
    let dim = uniform_dimension(points)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    // Fixed seed: determinism is part of the engine contract; the shuffle
    // only protects the expected running time against adversarial input
    // order.
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eb_0001));
    let mut support = Vec::with_capacity(dim + 1);
    Ok(welzl(points, &order, &mut support, dim))
}

fn welzl(points: &[Point], active: &[usize], support: &mut Vec<usize>, dim: usize) -> Ball {
    if active.is_empty() || support.len() == dim + 1 {
        return support_ball(points, support, dim);
    }
    let (rest, last) = active.split_at(active.len() - 1);
    let idx = last[0];
    let ball = welzl(points, rest, support, dim);
    // Slack must stay *relative* to the radius: an absolute floor would make
    // balls swallow whole configurations whose extent sits below the floor.
    if ball.contains(&points[idx], EPS_NORM * ball.radius) {
        return ball;
    }
    support.push(idx);
    let ball = welzl(points, rest, support, dim);
    support.pop();
    ball
}

/// Ball with all `support` points on its boundary and center in their affine
/// hull. Empty support yields a sentinel with negative radius that contains
/// nothing.
fn support_ball(points: &[Point], support: &[usize], dim: usize) -> Ball {
    match support.len() {
        0 => Ball {
            center: Point::origin(dim.max(1)),
            radius: -1.0,
        },
        1 => Ball {
            center: points[support[0]].clone(),
            radius: 0.0,
        },
        k => {
            let p0 = &points[support[0]];
            let spans: Vec<Vector> = support[1..].iter().map(|&i| p0.to(&points[i])).collect();
            // Solve the Gram system  G lambda = rhs,  G_ij = v_i . v_j,
            // rhs_i = |v_i|^2 / 2;  center = p0 + sum lambda_j v_j.
            let m = k - 1;
            let mut g = vec![vec![0.0; m]; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                for j in 0..m {
                    g[i][j] = spans[i].dot(&spans[j]);
                }
                rhs[i] = spans[i].dot(&spans[i]) / 2.0;
            }
            let lambda = solve_allowing_dependents(&mut g, &mut rhs);
            let mut center = p0.clone();
            for (j, v) in spans.iter().enumerate() {
                center = center.translate(&v.scale(lambda[j]));
            }
            let radius = support
                .iter()
                .map(|&i| distance(&center, &points[i]))
                .fold(0.0_f64, f64::max);
            Ball { center, radius }
        }
    }
}

/// Gaussian elimination with partial pivoting. A pivot below the noise floor
/// marks its unknown as zero instead of failing: an affinely dependent
/// support point then simply drops out of the center combination.
fn solve_allowing_dependents(g: &mut [Vec<f64>], rhs: &mut [f64]) -> Vec<f64> {
    let m = rhs.len();
    let scale = g
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    // The floor must scale with the matrix: an absolute floor would declare
    // every direction of a tiny-but-healthy configuration dependent.
    let floor = EPS_NORM * scale;
    let mut solution = vec![0.0; m];
    let mut used_row = vec![false; m];
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; m];
    for col in 0..m {
        let pivot_row = (0..m)
            .filter(|&r| !used_row[r])
            .max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()));
        let Some(row) = pivot_row else { break };
        if g[row][col].abs() <= floor {
            continue; // dependent direction; lambda stays zero
        }
        used_row[row] = true;
        pivot_of_col[col] = Some(row);
        for r in 0..m {
            if r != row && g[r][col] != 0.0 {
                let factor = g[r][col] / g[row][col];
                for c in 0..m {
                    g[r][c] -= factor * g[row][c];
                }
                rhs[r] -= factor * rhs[row];
            }
        }
    }
    for col in 0..m {
        if let Some(row) = pivot_of_col[col] {
            solution[col] = rhs[row] / g[row][col];
        }
    }
    solution
}

/// Smallest enclosing ball by exhaustive support enumeration.
///
/// Independent oracle for [`smallest_enclosing_ball`]: for every subset of at
/// most `d + 1` points it builds the ball through the subset (center in the
/// subset's affine hull, via Gram-Schmidt coordinates rather than the Gram
/// system) and keeps the smallest ball that contains everything. Exponential
/// in `n`; intended for small instances.
pub fn smallest_enclosing_ball_brute_force(points: &[Point]) -> Result<Ball, GeometryError> {
    let dim = uniform_dimension(points)?;
    let n = points.len();
    let max_support = (dim + 1).min(n);
    let mut best: Option<Ball> = None;
    let mut subset: Vec<usize> = Vec::with_capacity(max_support);
    enumerate_subsets(n, max_support, &mut subset, &mut |subset| {
        if let Some(ball) = hull_circumball(points, subset) {
            let ok = points
                .iter()
                .all(|p| ball.contains(p, 1e-10 * ball.radius));
            if ok && best.as_ref().map_or(true, |b| ball.radius < b.radius) {
                best = Some(ball);
            }
        }
    });
    best.ok_or(GeometryError::EmptyPointSet)
}

fn enumerate_subsets(
    n: usize,
    max_len: usize,
    current: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    let start = current.last().map_or(0, |&last| last + 1);
    for i in start..n {
        current.push(i);
        visit(current);
        if current.len() < max_len {
            enumerate_subsets(n, max_len, current, visit);
        }
        current.pop();
    }
}

/// Ball through all points of `subset` with center in their affine hull.
/// Returns `None` when the subset is affinely dependent (an independent
/// sub-subset appears elsewhere in the enumeration).
fn hull_circumball(points: &[Point], subset: &[usize]) -> Option<Ball> {
    let p0 = &points[subset[0]];
    if subset.len() == 1 {
        return Some(Ball {
            center: p0.clone(),
            radius: 0.0,
        });
    }
    // Orthonormal basis of the subset's span via modified Gram-Schmidt.
    let mut basis: Vec<Vector> = Vec::with_capacity(subset.len() - 1);
    let mut in_basis: Vec<Vec<f64>> = Vec::new(); // span coordinates per point
    for &i in &subset[1..] {
        let mut v = p0.to(&points[i]);
        let original_norm = v.norm();
        let mut coords = Vec::with_capacity(basis.len() + 1);
        for b in &basis {
            let c = v.dot(b);
            coords.push(c);
            v = v.add(&b.scale(-c));
        }
        let residual = v.norm();
        if residual <= EPS_NORM * original_norm {
            return None;
        }
        basis.push(v.scale(1.0 / residual));
        coords.push(residual);
        in_basis.push(coords);
    }
    let m = basis.len();
    // In span coordinates, the center y satisfies 2 q_i . y = |q_i|^2.
    let mut a = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (row, q) in in_basis.iter().enumerate() {
        let mut sq = 0.0;
        for (col, &qc) in q.iter().enumerate() {
            a[row][col] = 2.0 * qc;
            sq += qc * qc;
        }
        rhs[row] = sq;
    }
    let y = solve_square(&mut a, &mut rhs)?;
    let mut center = p0.clone();
    for (j, b) in basis.iter().enumerate() {
        center = center.translate(&b.scale(y[j]));
    }
    let radius = subset
        .iter()
        .map(|&i| distance(&center, &points[i]))
        .fold(0.0_f64, f64::max);
    Some(Ball { center, radius })
}

/// Plain square Gaussian elimination; `None` on a singular system. The rank
/// floor is relative to the matrix scale for the same reason as in
/// [`solve_allowing_dependents`].
fn solve_square(a: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let m = rhs.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let floor = EPS_NORM * scale;
    let mut perm: Vec<usize> = (0..m).collect();
    for col in 0..m {
        let pivot = (col..m).max_by(|&r, &s| {
            a[perm[r]][col].abs().total_cmp(&a[perm[s]][col].abs())
        })?;
        perm.swap(col, pivot);
        let prow = perm[col];
        if a[prow][col].abs() <= floor {
            return None;
        }
        for &r in &perm[col + 1..] {
            let factor = a[r][col] / a[prow][col];
            if factor != 0.0 {
                for c in col..m {
                    a[r][c] -= factor * a[prow][c];
                }
                rhs[r] -= factor * rhs[prow];
            }
        }
    }
    let mut solution = vec![0.0; m];
    for col in (0..m).rev() {
        let prow = perm[col];
        let mut acc = rhs[prow];
        for c in col + 1..m {
            acc -= a[prow][c] * solution[c];
        }
        solution[col] = acc / a[prow][col];
    }
    Some(solution)
}

/// How to pick a unit vector orthogonal to a given direction.
#[derive(Clone, Debug, PartialEq)]
pub enum OrthoSelector {
    /// Canonical choice. In dimension 2 this rotates the direction by +90
    /// degrees counterclockwise; in higher dimensions it is the first vector
    /// of the deterministic complement basis.
    Positive,
    /// Negation of [`OrthoSelector::Positive`].
    Negative,
    /// Uniform direction in the complement from the given stream seed.
    Seeded(u64),
}

/// Deterministic orthonormal basis of the complement of `x` (d - 1 vectors).
pub fn orthonormal_complement_basis(x: &Vector) -> Result<Vec<Vector>, GeometryError> {
    let d = x.dimension();
    if d < 2 {
        return Err(GeometryError::NoOrthogonalComplement);
    }
    let xu = x.unit()?;
    if d == 2 {
        let c = xu.components();
        return Ok(vec![Vector::new(vec![-c[1], c[0]]).expect("finite")]);
    }
    let mut basis: Vec<Vector> = Vec::with_capacity(d - 1);
    for axis in 0..d {
        if basis.len() == d - 1 {
            break;
        }
        let mut components = vec![0.0; d];
        components[axis] = 1.0;
        let mut v = Vector::new(components).expect("finite");
        v = v.add(&xu.scale(-v.dot(&xu)));
        for b in &basis {
            v = v.add(&b.scale(-v.dot(b)));
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v.scale(1.0 / norm));
        }
    }
    debug_assert_eq!(basis.len(), d - 1);
    Ok(basis)
}

/// A unit vector orthogonal to `x`, chosen by `selector`.
pub fn orthonormal_complement_sample(
    x: &Vector,
    selector: &OrthoSelector,
) -> Result<Vector, GeometryError> {
    match selector {
        OrthoSelector::Positive => Ok(orthonormal_complement_basis(x)?[0].clone()),
        OrthoSelector::Negative => Ok(orthonormal_complement_basis(x)?[0].negate()),
        OrthoSelector::Seeded(seed) => {
            let d = x.dimension();
            if d < 2 {
                return Err(GeometryError::NoOrthogonalComplement);
            }
            let xu = x.unit()?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            loop {
                let gauss: Vec<f64> = (0..d)
                    .map(|_| {
                        let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                        let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                        (-2.0 * u.ln()).sqrt() * v.cos()
                    })
                    .collect();
                let mut w = Vector::new(gauss).expect("finite");
                w = w.add(&xu.scale(-w.dot(&xu)));
                let norm = w.norm();
                if norm > 1e-6 {
                    return Ok(w.scale(1.0 / norm));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn distance_345() {
        assert_eq!(distance(&pt(&[0.0, 0.0]), &pt(&[3.0, 4.0])), 5.0);
    }

    #[test]
    fn distance_of_identical_points_is_zero() {
        let p = pt(&[2.0, -7.5, 1.0]);
        assert_eq!(distance(&p, &p), 0.0);
    }

    #[test]
    fn distance_in_one_dimension_is_absolute_difference() {
        assert_eq!(distance(&pt(&[-1.0]), &pt(&[2.5])), 3.5);
    }

    #[test]
    fn midpoint_of_unit_segment() {
        assert_eq!(midpoint(&pt(&[0.0]), &pt(&[1.0])), pt(&[0.5]));
    }

    #[test]
    fn midpoint_in_two_dimensions() {
        assert_eq!(
            midpoint(&pt(&[0.0, 0.0]), &pt(&[2.0, 4.0])),
            pt(&[1.0, 2.0])
        );
    }

    #[test]
    fn lexicographic_order_decides_on_first_differing_coordinate() {
        assert!(position_less(&pt(&[0.0, 9.0]), &pt(&[1.0, 0.0])));
        assert!(position_less(&pt(&[1.0, 0.0]), &pt(&[1.0, 2.0])));
        assert!(!position_less(&pt(&[1.0, 2.0]), &pt(&[1.0, 2.0])));
    }

    #[test]
    fn non_finite_coordinates_are_rejected() {
        assert!(matches!(
            Point::new(vec![0.0, f64::NAN]),
            Err(GeometryError::NonFiniteCoordinate { index: 1, .. })
        ));
        assert!(matches!(
            Point::new(vec![f64::INFINITY]),
            Err(GeometryError::NonFiniteCoordinate { index: 0, .. })
        ));
        assert_eq!(Point::new(vec![]), Err(GeometryError::EmptyCoordinates));
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn distance_panics_on_dimension_mismatch() {
        distance(&pt(&[0.0]), &pt(&[0.0, 1.0]));
    }

    #[test]
    fn seb_of_single_point_is_degenerate() {
        let ball = smallest_enclosing_ball(&[pt(&[3.0, 1.0])]).unwrap();
        assert_eq!(ball.radius, 0.0);
        assert_eq!(ball.center, pt(&[3.0, 1.0]));
    }

    #[test]
    fn seb_of_two_points_is_the_diameter_ball() {
        let ball = smallest_enclosing_ball(&[pt(&[0.0, 0.0]), pt(&[2.0, 0.0])]).unwrap();
        assert!((ball.radius - 1.0).abs() < 1e-12);
        assert!(distance(&ball.center, &pt(&[1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn seb_of_equilateral_triangle_is_its_circumball() {
        let side = 2.0;
        let points = [
            pt(&[0.0, 0.0]),
            pt(&[side, 0.0]),
            pt(&[side / 2.0, side * 3.0_f64.sqrt() / 2.0]),
        ];
        let ball = smallest_enclosing_ball(&points).unwrap();
        let expected = side / 3.0_f64.sqrt();
        assert!((ball.radius - expected).abs() < 1e-12);
    }

    #[test]
    fn seb_ignores_interior_points() {
        let points = [
            pt(&[0.0, 0.0]),
            pt(&[4.0, 0.0]),
            pt(&[2.0, 0.1]),
            pt(&[2.0, -0.7]),
        ];
        let ball = smallest_enclosing_ball(&points).unwrap();
        assert!((ball.radius - 2.0).abs() < 1e-9);
    }

    #[test]
    fn seb_is_scale_invariant_down_to_machine_scales() {
        // The support solve must stay correct when the whole configuration
        // is tiny (or huge): both routes report the circumradius s/sqrt(3)
        // of an equilateral triangle with side s at every scale.
        for exponent in [0, -7, -20, -45, 20] {
            let s = 2.0_f64.powi(exponent);
            let points = [
                pt(&[0.0, 0.0]),
                pt(&[s, 0.0]),
                pt(&[s / 2.0, s * 3.0_f64.sqrt() / 2.0]),
            ];
            let expected = s / 3.0_f64.sqrt();
            let fast = smallest_enclosing_ball(&points).unwrap();
            let brute = smallest_enclosing_ball_brute_force(&points).unwrap();
            assert!(
                (fast.radius - expected).abs() <= 1e-9 * expected,
                "scale 2^{exponent}: fast radius {} vs {expected}",
                fast.radius
            );
            assert!(
                (brute.radius - expected).abs() <= 1e-9 * expected,
                "scale 2^{exponent}: brute radius {} vs {expected}",
                brute.radius
            );
        }
    }

    #[test]
    fn seb_handles_duplicate_points() {
        let p = pt(&[1.0, 2.0, 3.0]);
        let q = pt(&[1.0, 2.0, 5.0]);
        let ball = smallest_enclosing_ball(&[p.clone(), p.clone(), q.clone(), q]).unwrap();
        assert!((ball.radius - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_matches_analytic_circumradius() {
        let side = 1.0;
        let points = [
            pt(&[0.0, 0.0]),
            pt(&[side, 0.0]),
            pt(&[side / 2.0, side * 3.0_f64.sqrt() / 2.0]),
        ];
        let ball = smallest_enclosing_ball_brute_force(&points).unwrap();
        assert!((ball.radius - side / 3.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complement_in_two_dimensions_rotates_counterclockwise() {
        let x = Vector::new(vec![1.0, 0.0]).unwrap();
        let y = orthonormal_complement_sample(&x, &OrthoSelector::Positive).unwrap();
        assert!(distance(
            &Point::origin(2).translate(&y),
            &pt(&[0.0, 1.0])
        ) < 1e-15);
        let neg = orthonormal_complement_sample(&x, &OrthoSelector::Negative).unwrap();
        assert!((neg.components()[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn complement_rejects_dimension_one() {
        let x = Vector::new(vec![1.0]).unwrap();
        assert_eq!(
            orthonormal_complement_sample(&x, &OrthoSelector::Positive),
            Err(GeometryError::NoOrthogonalComplement)
        );
    }

    #[test]
    fn complement_basis_spans_the_complement() {
        let x = Vector::new(vec![1.0, 2.0, -0.5, 0.3]).unwrap();
        let basis = orthonormal_complement_basis(&x).unwrap();
        assert_eq!(basis.len(), 3);
        for (i, b) in basis.iter().enumerate() {
            assert!((b.norm() - 1.0).abs() < 1e-12);
            assert!(b.dot(&x).abs() < 1e-12 * x.norm());
            for other in &basis[i + 1..] {
                assert!(b.dot(other).abs() < 1e-12);
            }
        }
    }

    fn finite_coord() -> impl Strategy<Value = f64> {
        prop_oneof![
            -100.0..100.0_f64,
            Just(0.0),
            Just(1.0),
            Just(-1.0),
        ]
    }

    fn point_strategy(dim: usize) -> impl Strategy<Value = Point> {
        proptest::collection::vec(finite_coord(), dim).prop_map(|c| Point::new(c).unwrap())
    }

    proptest! {
        #[test]
        fn triangle_inequality(dim in 1_usize..4, seeds in proptest::collection::vec(finite_coord(), 12)) {
            let a = Point::new(seeds[0..dim].to_vec()).unwrap();
            let b = Point::new(seeds[4..4 + dim].to_vec()).unwrap();
            let c = Point::new(seeds[8..8 + dim].to_vec()).unwrap();
            let lhs = distance(&a, &c);
            let rhs = distance(&a, &b) + distance(&b, &c);
            prop_assert!(lhs <= rhs + 1e-9 * rhs.max(1.0));
        }

        #[test]
        fn distance_is_symmetric(a in point_strategy(3), b in point_strategy(3)) {
            prop_assert_eq!(distance(&a, &b), distance(&b, &a));
        }

        #[test]
        fn midpoint_is_equidistant(a in point_strategy(3), b in point_strategy(3)) {
            let m = midpoint(&a, &b);
            let d = distance(&a, &b);
            prop_assert!((distance(&a, &m) - d / 2.0).abs() <= 1e-12 * d.max(1.0));
            prop_assert!((distance(&a, &m) - distance(&b, &m)).abs() <= 1e-12 * d.max(1.0));
        }

        #[test]
        fn position_order_is_total_and_transitive(
            a in point_strategy(2),
            b in point_strategy(2),
            c in point_strategy(2),
        ) {
            // antisymmetry
            if position_less(&a, &b) {
                prop_assert!(!position_less(&b, &a));
            }
            // exactly one of <, ==, > holds
            let forward = position_cmp(&a, &b);
            prop_assert_eq!(forward, position_cmp(&b, &a).reverse());
            // transitivity
            if position_less(&a, &b) && position_less(&b, &c) {
                prop_assert!(position_less(&a, &c));
            }
        }

        #[test]
        fn seb_routes_agree(
            dim in 1_usize..4,
            raw in proptest::collection::vec(proptest::collection::vec(-50.0..50.0_f64, 3), 1..9),
        ) {
            let points: Vec<Point> = raw
                .iter()
                .map(|c| Point::new(c[..dim].to_vec()).unwrap())
                .collect();
            let fast = smallest_enclosing_ball(&points).unwrap();
            let brute = smallest_enclosing_ball_brute_force(&points).unwrap();
            prop_assert!(
                (fast.radius - brute.radius).abs() <= 1e-9 * fast.radius.max(1.0),
                "fast {} vs brute {}", fast.radius, brute.radius
            );
            for p in &points {
                prop_assert!(fast.contains(p, 1e-9 * fast.radius.max(1.0)));
            }
        }

        #[test]
        fn complement_samples_are_unit_and_orthogonal(
            raw in proptest::collection::vec(-10.0..10.0_f64, 2..5),
            seed in 0_u64..1000,
        ) {
            let v = Vector::new(raw).unwrap();
            prop_assume!(v.norm() > 1e-6);
            for selector in [OrthoSelector::Positive, OrthoSelector::Negative, OrthoSelector::Seeded(seed)] {
                let y = orthonormal_complement_sample(&v, &selector).unwrap();
                prop_assert!((y.norm() - 1.0).abs() < 1e-9);
                prop_assert!(y.dot(&v).abs() < 1e-9 * v.norm());
            }
        }
    }
}
