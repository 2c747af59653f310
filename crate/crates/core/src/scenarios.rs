//! Canonical starting configurations, buildable from files or the CLI.
//!
//! A scenario bundles an initial configuration with the tie and orthogonal
//! policies that make it interesting: the triangle scenarios bind the
//! rotation-preserving cyclic adversary, everything else defaults to the
//! canonical order-based choice. Scenario files (TOML or JSON) may override
//! the policies and add a crash schedule.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{CrashEvent, RunPlan};
use crate::geometry::{GeometryError, Point};
use crate::model::{Configuration, ModelError};
use crate::policies::{MoveRule, OrthogonalChoice, PolicyError, RuleSpec, TiePolicy};
use crate::seeds;
use crate::tolerances::MAX_DIMENSION;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{kind} needs dimension in {min}..={MAX_DIMENSION}, got {got}")]
    DimensionOutOfRange {
        kind: &'static str,
        min: usize,
        got: usize,
    },
    #[error("{kind} needs {name} > {min}, got {value}")]
    OutOfRange {
        kind: &'static str,
        name: &'static str,
        min: f64,
        value: f64,
    },
    #[error("{kind} needs at least {min} processes, got {got}")]
    TooFewProcesses {
        kind: &'static str,
        min: usize,
        got: usize,
    },
    #[error("unknown scenario kind {0:?}")]
    UnknownKind(String),
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse scenario file {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("scenario file {0} must end in .toml or .json")]
    UnsupportedExtension(PathBuf),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

fn default_side() -> f64 {
    1.0
}
fn default_dimension_planar() -> usize {
    2
}
fn default_dimension_line() -> usize {
    1
}
fn default_separation() -> f64 {
    10.0
}
fn default_rotation_first() -> f64 {
    0.4
}
fn default_rotation_second() -> f64 {
    2.1
}
fn default_spacing() -> f64 {
    1.0
}
fn default_count() -> usize {
    8
}
fn default_scale() -> f64 {
    1.0
}

/// A named family of starting configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum ScenarioSpec {
    /// Three processes at the corners of an equilateral triangle centered on
    /// the origin, bound to the cyclic adversary that keeps it equilateral.
    EquilateralTriangle {
        #[serde(default = "default_side")]
        side: f64,
        #[serde(default = "default_dimension_planar")]
        dimension: usize,
        /// Rotation of the whole triangle, in radians.
        #[serde(default)]
        rotation: f64,
    },
    /// Two equilateral triangles whose barycenters sit `separation` side
    /// lengths apart: the split population that no distance-driven rule can
    /// bring together. Processes 0-2 form the first triangle, 3-5 the
    /// second.
    TwoTriangles {
        #[serde(default = "default_side")]
        side: f64,
        /// Barycenter distance in units of the side length.
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default = "default_dimension_planar")]
        dimension: usize,
        #[serde(default = "default_rotation_first")]
        rotation_first: f64,
        #[serde(default = "default_rotation_second")]
        rotation_second: f64,
    },
    /// `n` processes evenly spaced on the first coordinate axis.
    CollinearChain {
        #[serde(default = "default_count")]
        n: usize,
        #[serde(default = "default_spacing")]
        spacing: f64,
        #[serde(default = "default_dimension_line")]
        dimension: usize,
    },
    /// `n` seeded uniform positions in the box `[-scale, scale]^d`.
    /// Position `i` depends only on `seed` and `i`, not on `n`.
    RandomCloud {
        #[serde(default = "default_count")]
        n: usize,
        #[serde(default = "default_dimension_planar")]
        dimension: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// Positions given verbatim.
    Explicit { positions: Vec<Point> },
}

/// Scenario kinds with one-line descriptions, for listings.
pub const SCENARIO_KINDS: &[(&str, &str)] = &[
    (
        "equilateral-triangle",
        "equilateral triangle bound to the rotation-preserving cyclic adversary",
    ),
    (
        "two-triangles",
        "two distant equilateral triangles; the split that stays split",
    ),
    ("collinear-chain", "evenly spaced processes on a line"),
    ("random-cloud", "seeded uniform positions in a box"),
    ("explicit", "positions given verbatim"),
];

/// A built scenario: the initial configuration plus the policies the
/// scenario binds by default.
#[derive(Clone, Debug)]
pub struct BuiltScenario {
    pub config: Configuration,
    pub tie: TiePolicy,
    pub ortho: OrthogonalChoice,
}

fn equilateral_vertices(
    side: f64,
    center: (f64, f64),
    rotation: f64,
    dimension: usize,
) -> Result<Vec<Point>, GeometryError> {
    let circumradius = side / 3.0_f64.sqrt();
    (0..3)
        .map(|k| {
            let angle = rotation + FRAC_PI_2 + k as f64 * TAU / 3.0;
            let mut coords = vec![0.0; dimension];
            coords[0] = center.0 + circumradius * angle.cos();
            coords[1] = center.1 + circumradius * angle.sin();
            Point::new(coords)
        })
        .collect()
}

impl ScenarioSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ScenarioSpec::EquilateralTriangle { .. } => "equilateral-triangle",
            ScenarioSpec::TwoTriangles { .. } => "two-triangles",
            ScenarioSpec::CollinearChain { .. } => "collinear-chain",
            ScenarioSpec::RandomCloud { .. } => "random-cloud",
            ScenarioSpec::Explicit { .. } => "explicit",
        }
    }

    /// The spec a bare kind name denotes, with every parameter defaulted.
    /// `explicit` has no default (it needs positions).
    pub fn default_of(kind: &str) -> Result<ScenarioSpec, ScenarioError> {
        let value = serde_json::json!({ "kind": kind, "params": {} });
        serde_json::from_value(value).map_err(|_| ScenarioError::UnknownKind(kind.to_owned()))
    }

    pub fn build(&self) -> Result<BuiltScenario, ScenarioError> {
        match self {
            ScenarioSpec::EquilateralTriangle {
                side,
                dimension,
                rotation,
            } => {
                let kind = self.kind_name();
                check_dimension(kind, 2, *dimension)?;
                check_positive(kind, "side", *side)?;
                let config =
                    Configuration::new(equilateral_vertices(*side, (0.0, 0.0), *rotation, *dimension)?)?;
                Ok(BuiltScenario {
                    config,
                    tie: TiePolicy::EquilateralCyclic,
                    ortho: OrthogonalChoice::EquilateralCyclic,
                })
            }
            ScenarioSpec::TwoTriangles {
                side,
                separation,
                dimension,
                rotation_first,
                rotation_second,
            } => {
                let kind = self.kind_name();
                check_dimension(kind, 2, *dimension)?;
                check_positive(kind, "side", *side)?;
                // closer than ~2 sides the triangles' visibility ranges mix
                check_above(kind, "separation", 2.0, *separation)?;
                let mut positions =
                    equilateral_vertices(*side, (0.0, 0.0), *rotation_first, *dimension)?;
                positions.extend(equilateral_vertices(
                    *side,
                    (separation * side, 0.0),
                    *rotation_second,
                    *dimension,
                )?);
                Ok(BuiltScenario {
                    config: Configuration::new(positions)?,
                    tie: TiePolicy::EquilateralCyclic,
                    ortho: OrthogonalChoice::EquilateralCyclic,
                })
            }
            ScenarioSpec::CollinearChain {
                n,
                spacing,
                dimension,
            } => {
                let kind = self.kind_name();
                check_dimension(kind, 1, *dimension)?;
                check_positive(kind, "spacing", *spacing)?;
                if *n < 2 {
                    return Err(ScenarioError::TooFewProcesses {
                        kind,
                        min: 2,
                        got: *n,
                    });
                }
                let positions = (0..*n)
                    .map(|i| {
                        let mut coords = vec![0.0; *dimension];
                        coords[0] = i as f64 * spacing;
                        Point::new(coords)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(BuiltScenario {
                    config: Configuration::new(positions)?,
                    tie: TiePolicy::OrderBased,
                    ortho: OrthogonalChoice::FixedPositive,
                })
            }
            ScenarioSpec::RandomCloud {
                n,
                dimension,
                seed,
                scale,
            } => {
                let kind = self.kind_name();
                check_dimension(kind, 1, *dimension)?;
                check_positive(kind, "scale", *scale)?;
                if *n < 1 {
                    return Err(ScenarioError::TooFewProcesses {
                        kind,
                        min: 1,
                        got: *n,
                    });
                }
                let positions = (0..*n)
                    .map(|i| {
                        let stream = seeds::derive(*seed, "cloud", &[i as u64]);
                        let mut rng = ChaCha8Rng::seed_from_u64(stream);
                        let coords = (0..*dimension)
                            .map(|_| rng.gen_range(-*scale..=*scale))
                            .collect();
                        Point::new(coords)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(BuiltScenario {
                    config: Configuration::new(positions)?,
                    tie: TiePolicy::OrderBased,
                    ortho: OrthogonalChoice::FixedPositive,
                })
            }
            ScenarioSpec::Explicit { positions } => Ok(BuiltScenario {
                config: Configuration::new(positions.clone())?,
                tie: TiePolicy::OrderBased,
                ortho: OrthogonalChoice::FixedPositive,
            }),
        }
    }
}

fn check_dimension(kind: &'static str, min: usize, got: usize) -> Result<(), ScenarioError> {
    if got < min || got > MAX_DIMENSION {
        return Err(ScenarioError::DimensionOutOfRange { kind, min, got });
    }
    Ok(())
}

fn check_above(
    kind: &'static str,
    name: &'static str,
    min: f64,
    value: f64,
) -> Result<(), ScenarioError> {
    if !(value > min) || !value.is_finite() {
        return Err(ScenarioError::OutOfRange {
            kind,
            name,
            min,
            value,
        });
    }
    Ok(())
}

fn check_positive(kind: &'static str, name: &'static str, value: f64) -> Result<(), ScenarioError> {
    check_above(kind, name, 0.0, value)
}

/// Closed-form state of the evenly spaced chain after `k` rounds of the
/// canonical order-based midpoint run: the distinct occupied positions are
/// `(i + k/2) * spacing` for `i` in `0..n-k`. Valid for `k < n`.
pub fn collinear_chain_state(n: usize, spacing: f64, k: usize) -> Vec<f64> {
    assert!(k < n, "the chain has merged after n - 1 rounds");
    (0..n - k)
        .map(|i| (i as f64 + k as f64 / 2.0) * spacing)
        .collect()
}

/// Optional policy overrides inside a scenario file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie: Option<TiePolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ortho: Option<OrthogonalChoice>,
}

/// A scenario file: a spec plus optional policy overrides and a crash
/// schedule. TOML or JSON, decided by the file extension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(flatten)]
    pub spec: ScenarioSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyOverride>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crashes: Vec<CrashEvent>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_owned(),
            source,
        })?;
        let parse_err = |detail: String| ScenarioError::Parse {
            path: path.to_owned(),
            detail,
        };
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| parse_err(e.to_string())),
            Some("json") => serde_json::from_str(&text).map_err(|e| parse_err(e.to_string())),
            _ => Err(ScenarioError::UnsupportedExtension(path.to_owned())),
        }
    }

    /// Build a runnable plan: scenario defaults, then file overrides. The
    /// rule defaults to move-to-the-middle when the file names none.
    pub fn build_plan(&self) -> Result<RunPlan, ScenarioError> {
        let built = self.spec.build()?;
        let overrides = self.policy.clone().unwrap_or_default();
        let rule = match &overrides.rule {
            Some(spec) => spec.build()?,
            None => MoveRule::move_to_middle(),
        };
        let mut plan = RunPlan::new(built.config, rule)
            .with_tie(overrides.tie.unwrap_or(built.tie))
            .with_ortho(overrides.ortho.unwrap_or(built.ortho));
        plan.crashes = self.crashes.clone();
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance;
    use crate::model::ProcessId;

    #[test]
    fn triangle_sides_match_the_requested_length() {
        let built = ScenarioSpec::EquilateralTriangle {
            side: 2.5,
            dimension: 2,
            rotation: 0.3,
        }
        .build()
        .unwrap();
        let c = &built.config;
        for i in 0..3 {
            for j in i + 1..3 {
                let d = distance(c.position(ProcessId(i)), c.position(ProcessId(j)));
                assert!((d - 2.5).abs() < 1e-12, "side {i}-{j} is {d}");
            }
        }
        assert_eq!(built.tie, TiePolicy::EquilateralCyclic);
    }

    #[test]
    fn triangle_embeds_into_higher_dimensions() {
        let built = ScenarioSpec::EquilateralTriangle {
            side: 1.0,
            dimension: 4,
            rotation: 0.0,
        }
        .build()
        .unwrap();
        assert_eq!(built.config.dimension(), 4);
        for r in built.config.records() {
            assert_eq!(r.position.coords()[2], 0.0);
            assert_eq!(r.position.coords()[3], 0.0);
        }
    }

    #[test]
    fn two_triangles_sit_the_requested_distance_apart() {
        let built = ScenarioSpec::default_of("two-triangles").unwrap().build().unwrap();
        let c = &built.config;
        assert_eq!(c.len(), 6);
        // barycenter distance = separation * side = 10
        let bary = |ids: [usize; 3]| {
            let mut acc = [0.0, 0.0];
            for id in ids {
                let p = c.position(ProcessId(id));
                acc[0] += p.coords()[0] / 3.0;
                acc[1] += p.coords()[1] / 3.0;
            }
            acc
        };
        let g1 = bary([0, 1, 2]);
        let g2 = bary([3, 4, 5]);
        let d = ((g1[0] - g2[0]).powi(2) + (g1[1] - g2[1]).powi(2)).sqrt();
        assert!((d - 10.0).abs() < 1e-9);
        // every cross-triangle distance is much larger than every side
        for i in 0..3 {
            for j in 3..6 {
                let d = distance(c.position(ProcessId(i)), c.position(ProcessId(j)));
                assert!(d > 8.0, "cross distance {i}-{j} is {d}");
            }
        }
    }

    #[test]
    fn chain_positions_are_evenly_spaced() {
        let built = ScenarioSpec::CollinearChain {
            n: 5,
            spacing: 0.5,
            dimension: 1,
        }
        .build()
        .unwrap();
        let xs: Vec<f64> = built
            .config
            .records()
            .iter()
            .map(|r| r.position.coords()[0])
            .collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn chain_state_formula_starts_at_the_initial_layout() {
        assert_eq!(collinear_chain_state(4, 1.0, 0), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(collinear_chain_state(4, 1.0, 1), vec![0.5, 1.5, 2.5]);
        assert_eq!(collinear_chain_state(4, 1.0, 3), vec![1.5]);
    }

    #[test]
    fn random_cloud_positions_are_seed_stable_and_prefix_stable() {
        let build = |n: usize, seed: u64| {
            ScenarioSpec::RandomCloud {
                n,
                dimension: 3,
                seed,
                scale: 2.0,
            }
            .build()
            .unwrap()
            .config
        };
        let a = build(4, 9);
        let b = build(4, 9);
        assert_eq!(a, b);
        // growing the cloud keeps the old positions
        let bigger = build(6, 9);
        for i in 0..4 {
            assert_eq!(a.position(ProcessId(i)), bigger.position(ProcessId(i)));
        }
        // a different seed moves the points
        assert_ne!(build(4, 10), a);
        // coordinates respect the box
        for r in a.records() {
            for &c in r.position.coords() {
                assert!((-2.0..=2.0).contains(&c));
            }
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            ScenarioSpec::EquilateralTriangle { side: 0.0, dimension: 2, rotation: 0.0 }.build(),
            Err(ScenarioError::OutOfRange { name: "side", .. })
        ));
        assert!(matches!(
            ScenarioSpec::EquilateralTriangle { side: 1.0, dimension: 1, rotation: 0.0 }.build(),
            Err(ScenarioError::DimensionOutOfRange { .. })
        ));
        assert!(matches!(
            ScenarioSpec::CollinearChain { n: 1, spacing: 1.0, dimension: 1 }.build(),
            Err(ScenarioError::TooFewProcesses { .. })
        ));
        assert!(ScenarioSpec::default_of("no-such-kind").is_err());
    }

    #[test]
    fn scenario_specs_round_trip_through_json_tagging() {
        let spec = ScenarioSpec::TwoTriangles {
            side: 1.0,
            separation: 10.0,
            dimension: 2,
            rotation_first: 0.4,
            rotation_second: 2.1,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"two-triangles\""));
        assert!(json.contains("\"params\""));
        let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn scenario_file_parses_from_toml_with_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chain.toml");
        std::fs::write(
            &path,
            r#"
kind = "collinear-chain"

[params]
n = 4
spacing = 2.0
dimension = 1

[policy]
rule = { kind = "linear", ax = 0.25, ay = 0.0 }
tie = { kind = "lowest-id" }

[[crashes]]
at_time = 3
processes = [0, 2]
"#,
        )
        .unwrap();
        let file = ScenarioFile::load(&path).unwrap();
        assert_eq!(
            file.spec,
            ScenarioSpec::CollinearChain { n: 4, spacing: 2.0, dimension: 1 }
        );
        assert_eq!(file.crashes.len(), 1);
        assert_eq!(file.crashes[0].processes, vec![ProcessId(0), ProcessId(2)]);
        let plan = file.build_plan().unwrap();
        assert_eq!(plan.tie, TiePolicy::LowestId);
        assert_eq!(plan.rule.fx(2.0), 0.5);
    }

    #[test]
    fn scenario_file_parses_from_json_with_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tri.json");
        std::fs::write(&path, r#"{"kind": "equilateral-triangle", "params": {"side": 3.0}}"#)
            .unwrap();
        let file = ScenarioFile::load(&path).unwrap();
        let plan = file.build_plan().unwrap();
        assert_eq!(plan.initial.len(), 3);
        assert_eq!(plan.tie, TiePolicy::EquilateralCyclic);
        assert!(plan.rule.is_exact_midpoint());
    }

    #[test]
    fn unsupported_extension_is_reported() {
        let err = ScenarioFile::load(Path::new("/nonexistent/file.yaml"));
        assert!(matches!(err, Err(ScenarioError::Io { .. })));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.yaml");
        std::fs::write(&path, "kind: nope").unwrap();
        assert!(matches!(
            ScenarioFile::load(&path),
            Err(ScenarioError::UnsupportedExtension(_))
        ));
    }
}
