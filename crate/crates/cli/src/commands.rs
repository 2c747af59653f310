//! Implementations behind the CLI commands.

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use myopic_core::analysis::{
    check_diameter_monotone, check_radius_monotone, write_metrics_csv, CertificateReport,
};
use myopic_core::engine::write_trace_jsonl;
use myopic_core::geometry::{
    smallest_enclosing_ball, smallest_enclosing_ball_brute_force, Point,
};
use myopic_core::scenarios::{PolicyOverride, ScenarioFile, ScenarioSpec, SCENARIO_KINDS};
use myopic_core::suites::{run_suite, SuiteOptions, SUITES};
use myopic_core::tolerances::slack;
use myopic_core::{Configuration, OrthogonalChoice, StopReason, TiePolicy, Trace};

use crate::manifest::{self, resolve_kind, resolve_manifest, RunManifest};
use crate::{RenderArgs, RunArgs, SebArgs, VerifyArgs};

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Gathered => "gathered",
        StopReason::Budget => "budget",
        StopReason::Fixpoint => "fixpoint",
    }
}

#[derive(Serialize)]
struct EndState {
    distinct: usize,
    radius: f64,
    diameter: f64,
}

fn end_state(config: &Configuration) -> EndState {
    EndState {
        distinct: config.distinct_positions().len(),
        radius: config.enclosing_ball().radius,
        diameter: config.diameter(),
    }
}

#[derive(Serialize)]
struct RunResult {
    stop: StopReason,
    steps: usize,
    gathered: bool,
    initial: EndState,
    #[serde(rename = "final")]
    last: EndState,
    elapsed_ms: f64,
}

#[derive(Serialize)]
struct CheckOut<'a> {
    name: &'a str,
    checked: u64,
    violations: u64,
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    examples: &'a [String],
}

#[derive(Serialize)]
struct Summary<'a> {
    manifest: &'a RunManifest,
    result: RunResult,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checks: Vec<CheckOut<'a>>,
}

fn create_output(path: &Path) -> Result<fs::File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create directory {}", parent.display()))?;
        }
    }
    fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))
}

pub fn cmd_run(args: &RunArgs, global_seed: Option<u64>) -> Result<ExitCode> {
    let manifest = resolve_manifest(args, global_seed)?;
    let mut plan = manifest
        .scenario
        .build_plan()
        .context("invalid scenario")?;
    plan.settings = manifest.settings.clone();

    let started = Instant::now();
    let trace = plan.execute().context("run failed")?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;

    if let Some(path) = &manifest.outputs.trace {
        let mut writer = BufWriter::new(create_output(path)?);
        write_trace_jsonl(&trace, manifest.settings.eps_tie, &mut writer)
            .and_then(|()| writer.flush())
            .with_context(|| format!("cannot write trace {}", path.display()))?;
    }
    if let Some(path) = &manifest.outputs.metrics {
        let mut writer = BufWriter::new(create_output(path)?);
        write_metrics_csv(
            &trace,
            manifest.settings.eps_tie,
            manifest.settings.eps_gather,
            &mut writer,
        )
        .and_then(|()| writer.flush())
        .with_context(|| format!("cannot write metrics {}", path.display()))?;
    }

    let reports = run_trace_checks(&manifest.checks, &trace);

    let result = RunResult {
        stop: trace.stop,
        steps: trace.step_count(),
        gathered: trace.stop == StopReason::Gathered,
        initial: end_state(trace.initial()),
        last: end_state(trace.final_config()),
        elapsed_ms,
    };
    let digest = format!(
        "stop={} steps={} gathered={} R0={} Rf={}",
        stop_name(result.stop),
        result.steps,
        result.gathered,
        result.initial.radius,
        result.last.radius
    );
    let summary = Summary {
        manifest: &manifest,
        result,
        checks: reports
            .iter()
            .map(|r| CheckOut {
                name: &r.name,
                checked: r.checked,
                violations: r.violation_count,
                examples: &r.examples,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&summary).context("cannot encode summary")? + "\n";
    match &manifest.outputs.summary {
        Some(path) => {
            create_output(path)?
                .write_all(json.as_bytes())
                .with_context(|| format!("cannot write summary {}", path.display()))?;
            println!("{digest}");
        }
        None => print!("{json}"),
    }

    let mut all_pass = true;
    for report in &reports {
        if !report.passed() {
            all_pass = false;
            eprintln!("check {}", report.summary_line());
            if let Some(example) = report.examples.first() {
                eprintln!("  first counterexample: {example}");
            }
        }
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Check names are validated during manifest resolution, so an unknown name
/// here would be a programming error.
fn run_trace_checks(checks: &[String], trace: &Trace) -> Vec<CertificateReport> {
    checks
        .iter()
        .map(|name| {
            let mut report = CertificateReport::new(name.clone());
            match name.as_str() {
                "radius-monotone" => check_radius_monotone(trace, &mut report),
                "diameter-monotone" => check_diameter_monotone(trace, &mut report),
                other => unreachable!("unvalidated check {other:?}"),
            }
            report
        })
        .collect()
}

fn resolve_suite(name: &str) -> Result<&'static str> {
    SUITES
        .iter()
        .map(|(suite, _)| *suite)
        .find(|suite| *suite == name)
        .ok_or_else(|| {
            anyhow!(
                "unknown suite {name:?}; expected all or one of: {}",
                SUITES
                    .iter()
                    .map(|(suite, _)| *suite)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
}

pub fn cmd_verify(args: &VerifyArgs, global_seed: Option<u64>) -> Result<ExitCode> {
    let names: Vec<&'static str> = if args.suite == "all" {
        SUITES.iter().map(|(suite, _)| *suite).collect()
    } else {
        vec![resolve_suite(&args.suite)?]
    };
    let options = SuiteOptions {
        trials: args.trials.unwrap_or_else(|| SuiteOptions::default().trials),
        seed: global_seed.unwrap_or(0),
    };

    let execute = || -> Vec<CertificateReport> {
        names
            .par_iter()
            .map(|name| run_suite(name, &options).expect("suite names are validated"))
            .collect()
    };
    let reports = match args.jobs {
        Some(jobs) if jobs > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .context("cannot build worker pool")?
            .install(execute),
        _ => execute(),
    };

    let mut all_pass = true;
    for (name, report) in names.iter().zip(&reports) {
        let description = SUITES
            .iter()
            .find(|(suite, _)| suite == name)
            .map(|(_, description)| *description)
            .unwrap_or_default();
        println!("{} - {}", report.summary_line(), description);
        if !report.passed() {
            all_pass = false;
            for (i, example) in report.examples.iter().enumerate() {
                if i == 0 {
                    println!("  first counterexample: {example}");
                } else {
                    println!("  also: {example}");
                }
            }
            let shown = report.examples.len() as u64;
            if report.violation_count > shown {
                println!("  ... and {} more violations", report.violation_count - shown);
            }
        }
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn cmd_scenario_list() -> Result<ExitCode> {
    for (name, description) in SCENARIO_KINDS {
        println!("{name}");
        println!("    {description}");
        match ScenarioSpec::default_of(name) {
            Ok(spec) => {
                let value = serde_json::to_value(&spec).context("cannot encode defaults")?;
                println!("    defaults: {}", value["params"]);
            }
            Err(_) => println!("    params: positions = [[x, ...], ...] (required)"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn spec_from_flags(args: &RenderArgs, root_seed: u64) -> Result<ScenarioSpec> {
    let kind = resolve_kind(&args.kind)?;

    let applicable: &[&str] = match kind {
        "equilateral-triangle" => &["--side", "--d", "--rotation"],
        "two-triangles" => &[
            "--side",
            "--separation",
            "--d",
            "--rotation-first",
            "--rotation-second",
        ],
        "collinear-chain" => &["--n", "--D", "--d"],
        "random-cloud" => &["--n", "--d", "--scale", "--cloud-seed"],
        "explicit" => &["--positions"],
        other => unreachable!("unlisted kind {other:?}"),
    };
    let given = [
        ("--side", args.side.is_some()),
        ("--separation", args.separation.is_some()),
        ("--d", args.dimension.is_some()),
        ("--rotation", args.rotation.is_some()),
        ("--rotation-first", args.rotation_first.is_some()),
        ("--rotation-second", args.rotation_second.is_some()),
        ("--n", args.n.is_some()),
        ("--D", args.spacing.is_some()),
        ("--scale", args.scale.is_some()),
        ("--cloud-seed", args.cloud_seed.is_some()),
        ("--positions", args.positions.is_some()),
    ];
    let stray: Vec<&str> = given
        .iter()
        .filter(|(flag, set)| *set && !applicable.contains(flag))
        .map(|(flag, _)| *flag)
        .collect();
    if !stray.is_empty() {
        bail!(
            "parameters not applicable to {kind}: {} (accepted: {})",
            stray.join(", "),
            applicable.join(", ")
        );
    }

    if kind == "explicit" {
        let text = args
            .positions
            .as_ref()
            .ok_or_else(|| anyhow!("explicit scenarios need --positions"))?;
        let positions: Vec<Point> = serde_json::from_str(text)
            .context("--positions must be a JSON array of coordinate arrays")?;
        return Ok(ScenarioSpec::Explicit { positions });
    }

    let mut spec = ScenarioSpec::default_of(kind).expect("non-explicit kinds have defaults");
    match &mut spec {
        ScenarioSpec::EquilateralTriangle {
            side,
            dimension,
            rotation,
        } => {
            if let Some(v) = args.side {
                *side = v;
            }
            if let Some(v) = args.dimension {
                *dimension = v;
            }
            if let Some(v) = args.rotation {
                *rotation = v;
            }
        }
        ScenarioSpec::TwoTriangles {
            side,
            separation,
            dimension,
            rotation_first,
            rotation_second,
        } => {
            if let Some(v) = args.side {
                *side = v;
            }
            if let Some(v) = args.separation {
                *separation = v;
            }
            if let Some(v) = args.dimension {
                *dimension = v;
            }
            if let Some(v) = args.rotation_first {
                *rotation_first = v;
            }
            if let Some(v) = args.rotation_second {
                *rotation_second = v;
            }
        }
        ScenarioSpec::CollinearChain {
            n,
            spacing,
            dimension,
        } => {
            if let Some(v) = args.n {
                *n = v;
            }
            if let Some(v) = args.spacing {
                *spacing = v;
            }
            if let Some(v) = args.dimension {
                *dimension = v;
            }
        }
        ScenarioSpec::RandomCloud {
            n,
            dimension,
            seed,
            scale,
        } => {
            if let Some(v) = args.n {
                *n = v;
            }
            if let Some(v) = args.dimension {
                *dimension = v;
            }
            if let Some(v) = args.scale {
                *scale = v;
            }
            *seed = args
                .cloud_seed
                .unwrap_or_else(|| manifest::file_seed(root_seed, "scenario"));
        }
        ScenarioSpec::Explicit { .. } => unreachable!("handled above"),
    }
    Ok(spec)
}

pub fn cmd_scenario_render(args: &RenderArgs, global_seed: Option<u64>) -> Result<ExitCode> {
    let spec = spec_from_flags(args, global_seed.unwrap_or(0))?;
    let built = spec.build().context("invalid scenario parameters")?;

    let rendered = if args.spec {
        ScenarioFile {
            spec,
            policy: None,
            crashes: Vec::new(),
        }
    } else {
        // Materialized positions, with the policies the kind binds (the
        // triangle kinds come with the shape-preserving cyclic adversary).
        let positions: Vec<Point> = built
            .config
            .records()
            .iter()
            .map(|r| r.position.clone())
            .collect();
        let policy = if built.tie != TiePolicy::OrderBased
            || built.ortho != OrthogonalChoice::FixedPositive
        {
            Some(PolicyOverride {
                rule: None,
                tie: Some(built.tie),
                ortho: Some(built.ortho),
            })
        } else {
            None
        };
        ScenarioFile {
            spec: ScenarioSpec::Explicit { positions },
            policy,
            crashes: Vec::new(),
        }
    };

    let as_toml = args
        .out
        .as_deref()
        .and_then(|p| p.extension())
        .and_then(|e| e.to_str())
        == Some("toml");
    let text = if as_toml {
        toml::to_string_pretty(&rendered).context("cannot encode scenario")?
    } else {
        serde_json::to_string_pretty(&rendered).context("cannot encode scenario")? + "\n"
    };
    match &args.out {
        Some(path) => {
            create_output(path)?
                .write_all(text.as_bytes())
                .with_context(|| format!("cannot write {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_points(text: &str) -> Result<Vec<Point>> {
    serde_json::from_str(text).context("points must be a JSON array of coordinate arrays")
}

fn collect_points(args: &SebArgs) -> Result<Vec<Point>> {
    if let Some(text) = &args.points {
        return parse_points(text);
    }
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        // Either a bare JSON array of coordinate arrays, or a scenario file.
        if let Ok(points) = serde_json::from_str::<Vec<Point>>(&text) {
            return Ok(points);
        }
        let file = ScenarioFile::load(path).context("input is neither a point array nor a scenario file")?;
        let built = file.spec.build().context("invalid scenario")?;
        return Ok(built
            .config
            .records()
            .iter()
            .map(|r| r.position.clone())
            .collect());
    }
    let mut text = String::new();
    std::io::stdin()
        .read_to_string(&mut text)
        .context("cannot read stdin")?;
    parse_points(&text)
}

#[derive(Serialize)]
struct OracleAgreement {
    radius: f64,
    tolerance: f64,
    agrees: bool,
}

#[derive(Serialize)]
struct SebOut {
    points: usize,
    dimension: usize,
    center: Vec<f64>,
    radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleAgreement>,
}

pub fn cmd_oracle_seb(args: &SebArgs) -> Result<ExitCode> {
    let points = collect_points(args)?;
    let ball = smallest_enclosing_ball(&points).context("cannot build the enclosing ball")?;
    let dimension = ball.center.coords().len();

    let oracle = if args.brute {
        // The oracle enumerates subsets of up to dimension + 1 points.
        let limit = if dimension <= 3 { 48 } else { 16 };
        if points.len() > limit {
            bail!(
                "--brute is exhaustive; limited to {limit} points in dimension {dimension}"
            );
        }
        let brute =
            smallest_enclosing_ball_brute_force(&points).context("oracle construction failed")?;
        let tolerance = slack(brute.radius, 1e-9, 1e-9);
        let agrees = (ball.radius - brute.radius).abs() <= tolerance
            && points.iter().all(|p| ball.contains(p, tolerance));
        Some(OracleAgreement {
            radius: brute.radius,
            tolerance,
            agrees,
        })
    } else {
        None
    };

    let out = SebOut {
        points: points.len(),
        dimension,
        center: ball.center.coords().to_vec(),
        radius: ball.radius,
        oracle,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&out).context("cannot encode result")?
    );
    Ok(match &out.oracle {
        Some(agreement) if !agreement.agrees => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    })
}
