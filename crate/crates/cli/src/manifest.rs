//! The serializable run manifest and its resolution from flags.
//!
//! A manifest captures everything one `run` invocation does: scenario,
//! policies, engine settings, output paths, and the trace checks applied
//! afterwards. Flags override manifest fields; the resolved manifest is
//! echoed into the run summary, and re-running it with the same seed
//! reproduces the trace and metrics files byte for byte.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use myopic_core::policies::{OrthogonalChoice, RuleSpec, TiePolicy};
use myopic_core::scenarios::{PolicyOverride, ScenarioFile, ScenarioSpec, SCENARIO_KINDS};
use myopic_core::seeds;
use myopic_core::RunSettings;

use crate::RunArgs;

/// Trace certificates `run` can apply after a run.
pub const KNOWN_CHECKS: &[&str] = &["radius-monotone", "diameter-monotone"];

/// Derive a seed that is safe to persist: TOML integers are signed 64-bit,
/// so seeds written into manifests or scenario files stay below `i64::MAX`.
pub fn file_seed(root: u64, label: &str) -> u64 {
    seeds::derive(root, label, &[]) & (i64::MAX as u64)
}

/// Output locations; an omitted path means the file is not written.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    /// JSONL trace: one configuration per line plus a closing summary line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    /// CSV metrics: per-round `t,omega,d_min,d_max,R,gathered,L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<PathBuf>,
    /// JSON summary (default: stdout).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

impl OutputPaths {
    fn is_empty(&self) -> bool {
        self.trace.is_none() && self.metrics.is_none() && self.summary.is_none()
    }
}

/// One fully described run. Everything the engine consumes is spelled out,
/// so a manifest round-trips through JSON or TOML without loss.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Scenario spec with optional policy overrides and crash schedule.
    pub scenario: ScenarioFile,
    /// Root seed for the run's named sub-streams.
    #[serde(default)]
    pub seed: u64,
    /// Engine settings (budget, tolerances, stop conditions).
    #[serde(default)]
    pub settings: RunSettings,
    #[serde(default, skip_serializing_if = "OutputPaths::is_empty")]
    pub outputs: OutputPaths,
    /// Trace certificates checked after the run; violations exit 1.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| anyhow!("{e}")),
            Some("json") => serde_json::from_str(&text).map_err(|e| anyhow!("{e}")),
            _ => Err(anyhow!("manifest must end in .json or .toml")),
        };
        parsed.with_context(|| format!("invalid manifest {}", path.display()))
    }
}

/// Canonical kind for a possibly abbreviated name: exact match first, then
/// a unique substring (`chain` -> `collinear-chain`).
pub fn resolve_kind(input: &str) -> Result<&'static str> {
    let wanted = input.trim();
    if let Some((name, _)) = SCENARIO_KINDS.iter().find(|(name, _)| *name == wanted) {
        return Ok(name);
    }
    let matches: Vec<&'static str> = SCENARIO_KINDS
        .iter()
        .map(|(name, _)| *name)
        .filter(|name| name.contains(wanted))
        .collect();
    let all = || {
        SCENARIO_KINDS
            .iter()
            .map(|(name, _)| *name)
            .collect::<Vec<_>>()
            .join(", ")
    };
    match matches.as_slice() {
        [one] => Ok(one),
        [] => Err(anyhow!("unknown scenario kind {wanted:?}; known kinds: {}", all())),
        several => Err(anyhow!(
            "scenario kind {wanted:?} is ambiguous; matches: {}",
            several.join(", ")
        )),
    }
}

/// Parse a tie-policy flag. `random` without an explicit seed draws one
/// from the root seed's "tie" stream; scripted policies are file-only.
pub fn parse_tie(input: &str, root_seed: u64) -> Result<TiePolicy> {
    match input.trim() {
        "order" | "order-based" => Ok(TiePolicy::OrderBased),
        "lowest" | "lowest-id" => Ok(TiePolicy::LowestId),
        "cyclic" | "equilateral-cyclic" => Ok(TiePolicy::EquilateralCyclic),
        "random" => Ok(TiePolicy::SeededRandom {
            seed: file_seed(root_seed, "tie"),
        }),
        other => {
            if let Some(rest) = other.strip_prefix("random:") {
                let seed = rest
                    .parse()
                    .map_err(|_| anyhow!("bad seed in tie policy {other:?}"))?;
                return Ok(TiePolicy::SeededRandom { seed });
            }
            Err(anyhow!(
                "unknown tie policy {other:?}; expected order, lowest-id, random[:SEED], \
                 or cyclic (scripted ties come from scenario files)"
            ))
        }
    }
}

/// Parse an orthogonal-direction flag, mirroring [`parse_tie`].
pub fn parse_ortho(input: &str, root_seed: u64) -> Result<OrthogonalChoice> {
    match input.trim() {
        "positive" | "fixed-positive" | "+" => Ok(OrthogonalChoice::FixedPositive),
        "negative" | "fixed-negative" | "-" => Ok(OrthogonalChoice::FixedNegative),
        "cyclic" | "equilateral-cyclic" => Ok(OrthogonalChoice::EquilateralCyclic),
        "random" => Ok(OrthogonalChoice::SeededRandom {
            seed: file_seed(root_seed, "ortho"),
        }),
        other => {
            if let Some(rest) = other.strip_prefix("random:") {
                let seed = rest
                    .parse()
                    .map_err(|_| anyhow!("bad seed in orthogonal policy {other:?}"))?;
                return Ok(OrthogonalChoice::SeededRandom { seed });
            }
            Err(anyhow!(
                "unknown orthogonal policy {other:?}; expected positive, negative, \
                 random[:SEED], or cyclic (scripted choices come from scenario files)"
            ))
        }
    }
}

fn scenario_from_arg(arg: &str, from_kind: &mut bool) -> Result<ScenarioFile> {
    let path = Path::new(arg);
    let has_ext = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("json" | "toml")
    );
    if has_ext || path.exists() {
        return Ok(ScenarioFile::load(path)?);
    }
    let kind = resolve_kind(arg)?;
    let spec = ScenarioSpec::default_of(kind).map_err(|_| {
        anyhow!(
            "scenario kind {kind:?} has no defaults; render a file first \
             (myopic scenario render --kind {kind} ...)"
        )
    })?;
    *from_kind = true;
    Ok(ScenarioFile {
        spec,
        policy: None,
        crashes: Vec::new(),
    })
}

fn check_eps(flag: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        bail!("{flag} must be finite and non-negative, got {value}");
    }
    Ok(())
}

/// Resolve the effective manifest: manifest file (or scenario) first, then
/// every given flag on top. The seed resolves before the policies so that
/// `--tie random` pins its sub-stream seed into the echoed manifest.
pub fn resolve_manifest(args: &RunArgs, global_seed: Option<u64>) -> Result<RunManifest> {
    let mut from_kind = false;
    let mut manifest = match (&args.manifest, &args.scenario) {
        (Some(path), _) => RunManifest::load(path)?,
        (None, Some(scenario)) => RunManifest {
            scenario: scenario_from_arg(scenario, &mut from_kind)?,
            seed: 0,
            settings: RunSettings::default(),
            outputs: OutputPaths::default(),
            checks: Vec::new(),
        },
        (None, None) => bail!("nothing to run: pass --scenario FILE|KIND or --manifest FILE"),
    };
    if args.manifest.is_some() {
        if let Some(scenario) = &args.scenario {
            manifest.scenario = scenario_from_arg(scenario, &mut from_kind)?;
        }
    }

    if let Some(seed) = global_seed {
        manifest.seed = seed;
    }
    // A bare `--scenario random-cloud` flows the root seed into the cloud;
    // scenario files keep the seed they recorded.
    if from_kind {
        if let ScenarioSpec::RandomCloud { seed, .. } = &mut manifest.scenario.spec {
            *seed = file_seed(manifest.seed, "scenario");
        }
    }

    if args.rule.is_some() || args.tie.is_some() || args.ortho.is_some() {
        let policy = manifest
            .scenario
            .policy
            .get_or_insert_with(PolicyOverride::default);
        if let Some(rule) = &args.rule {
            policy.rule = Some(rule.parse::<RuleSpec>()?);
        }
        if let Some(tie) = &args.tie {
            policy.tie = Some(parse_tie(tie, manifest.seed)?);
        }
        if let Some(ortho) = &args.ortho {
            policy.ortho = Some(parse_ortho(ortho, manifest.seed)?);
        }
    }

    if let Some(steps) = args.steps {
        manifest.settings.max_steps = steps;
    }
    if let Some(eps) = args.eps_tie {
        check_eps("--eps-tie", eps)?;
        manifest.settings.eps_tie = eps;
    }
    if let Some(eps) = args.eps_gather {
        check_eps("--eps-gather", eps)?;
        manifest.settings.eps_gather = eps;
    }

    if let Some(path) = &args.trace {
        manifest.outputs.trace = Some(path.clone());
    }
    if let Some(path) = &args.metrics {
        manifest.outputs.metrics = Some(path.clone());
    }
    if let Some(path) = &args.summary {
        manifest.outputs.summary = Some(path.clone());
    }

    if !args.checks.is_empty() {
        manifest.checks = args.checks.clone();
    } else if args.check && manifest.checks.is_empty() {
        manifest.checks = KNOWN_CHECKS.iter().map(|s| (*s).to_owned()).collect();
    }
    for check in &manifest.checks {
        if !KNOWN_CHECKS.contains(&check.as_str()) {
            bail!(
                "unknown check {check:?}; known checks: {}",
                KNOWN_CHECKS.join(", ")
            );
        }
    }

    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare_run_args() -> RunArgs {
        RunArgs {
            manifest: None,
            scenario: None,
            rule: None,
            tie: None,
            ortho: None,
            steps: None,
            eps_tie: None,
            eps_gather: None,
            trace: None,
            metrics: None,
            summary: None,
            check: false,
            checks: Vec::new(),
        }
    }

    #[test]
    fn kinds_resolve_exactly_and_by_fragment() {
        assert_eq!(resolve_kind("collinear-chain").unwrap(), "collinear-chain");
        assert_eq!(resolve_kind("chain").unwrap(), "collinear-chain");
        assert_eq!(resolve_kind("equilateral").unwrap(), "equilateral-triangle");
        assert_eq!(resolve_kind("cloud").unwrap(), "random-cloud");
        assert!(resolve_kind("triangle").is_err()); // ambiguous
        assert!(resolve_kind("warp").is_err());
    }

    #[test]
    fn tie_flags_parse_with_seed_resolution() {
        assert_eq!(parse_tie("order", 0).unwrap(), TiePolicy::OrderBased);
        assert_eq!(parse_tie("lowest-id", 0).unwrap(), TiePolicy::LowestId);
        assert_eq!(
            parse_tie("random:9", 0).unwrap(),
            TiePolicy::SeededRandom { seed: 9 }
        );
        let derived = parse_tie("random", 5).unwrap();
        assert_eq!(
            derived,
            TiePolicy::SeededRandom {
                seed: file_seed(5, "tie")
            }
        );
        assert!(parse_tie("psychic", 0).is_err());
    }

    #[test]
    fn flags_override_scenario_and_settings() {
        let mut args = bare_run_args();
        args.scenario = Some("chain".to_owned());
        args.steps = Some(7);
        args.tie = Some("lowest-id".to_owned());
        args.check = true;
        let manifest = resolve_manifest(&args, Some(3)).unwrap();
        assert_eq!(manifest.seed, 3);
        assert_eq!(manifest.settings.max_steps, 7);
        assert_eq!(
            manifest.scenario.policy.as_ref().unwrap().tie,
            Some(TiePolicy::LowestId)
        );
        assert_eq!(manifest.checks, vec!["radius-monotone", "diameter-monotone"]);
        assert!(matches!(
            manifest.scenario.spec,
            ScenarioSpec::CollinearChain { .. }
        ));
    }

    #[test]
    fn bare_random_cloud_draws_its_seed_from_the_root() {
        let mut args = bare_run_args();
        args.scenario = Some("random-cloud".to_owned());
        let manifest = resolve_manifest(&args, Some(11)).unwrap();
        match manifest.scenario.spec {
            ScenarioSpec::RandomCloud { seed, .. } => {
                assert_eq!(seed, file_seed(11, "scenario"));
                assert!(i64::try_from(seed).is_ok(), "persisted seed fits TOML");
            }
            other => panic!("unexpected spec {other:?}"),
        }
    }

    #[test]
    fn missing_scenario_and_unknown_check_are_usage_errors() {
        let args = bare_run_args();
        assert!(resolve_manifest(&args, None).is_err());
        let mut args = bare_run_args();
        args.scenario = Some("chain".to_owned());
        args.checks = vec!["perpetual-motion".to_owned()];
        assert!(resolve_manifest(&args, None).is_err());
    }

    #[test]
    fn manifests_round_trip_through_json_and_toml() {
        let mut args = bare_run_args();
        args.scenario = Some("chain".to_owned());
        args.tie = Some("random".to_owned());
        args.checks = vec!["radius-monotone".to_owned()];
        let manifest = resolve_manifest(&args, Some(4)).unwrap();

        let json = serde_json::to_string_pretty(&manifest).unwrap();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, manifest);

        let toml_text = toml::to_string_pretty(&manifest).unwrap();
        let back: RunManifest = toml::from_str(&toml_text).unwrap();
        assert_eq!(back, manifest);
    }
}
