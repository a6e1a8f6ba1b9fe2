//! Subcommand implementations.

use crate::args::{
    BalanceArgs, DgpArgs, EstimandKind, EstimateArgs, Format, GenerateArgs, OutputArgs, PsArg,
    ScenarioArg, SimulateArgs, TiltArgs, TruthArgs,
};
use crate::error::CliError;
use crate::io::{emit, fmt_f64, fmt_opt, read_dataset, write_dataset};
use crate::manifest::{envelope, Clock, RunManifest};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use watt_core::estimands::effective_weights;
use watt_core::rng::{stream, Purpose};
use watt_core::simulation::{monte_carlo, true_watt_many, DEFAULT_BATCHES};
use watt_core::{
    bootstrap_estimate, estimate_watt, fit_logistic, weighted_asd, BootstrapConfig, DgpSpec,
    EstimandSpec, FitOptions, McConfig, Scenario,
};

/// Primary output plus its manifest.
struct Output {
    body: Vec<u8>,
    manifest: Option<RunManifest>,
}

fn csv_bytes(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::usage("io", e.to_string()))
}

/// Write the output. CSV written to a file gets `<file>.manifest.json` beside
/// it; CSV on stdout has its manifest logged to stderr.
fn finish(output: Output, out: Option<&Path>) -> Result<(), CliError> {
    emit(out, &output.body)?;
    if let Some(manifest) = output.manifest {
        let text = serde_json::to_string_pretty(&json!({
            "schema_version": crate::manifest::SCHEMA_VERSION,
            "manifest": manifest,
        }))
        .expect("manifest serializes");
        match out {
            Some(path) => {
                let mut side = path.as_os_str().to_owned();
                side.push(".manifest.json");
                emit(Some(&PathBuf::from(side)), format!("{text}\n").as_bytes())?;
            }
            None => log::info!("manifest: {}", text.replace('\n', "")),
        }
    }
    Ok(())
}

fn render<T: Serialize>(
    format: Format,
    manifest: RunManifest,
    key: &str,
    payload: &T,
    csv: impl FnOnce() -> Result<Vec<u8>, CliError>,
) -> Result<Output, CliError> {
    Ok(match format {
        Format::Json => Output {
            body: envelope(&manifest, key, payload),
            manifest: None,
        },
        Format::Csv => Output {
            body: csv()?,
            manifest: Some(manifest),
        },
    })
}

fn spec_from_kind(kind: EstimandKind, tilt: &TiltArgs) -> Result<EstimandSpec, CliError> {
    let name = match kind {
        EstimandKind::Att => "att",
        EstimandKind::Owatt => "owatt",
        EstimandKind::Trim => "trim",
        EstimandKind::SmoothTrim => "smooth-trim",
        EstimandKind::Truncate => "truncate",
    };
    Ok(spec_from_name(name, tilt)?.expect("kind names are known"))
}

/// Resolve a bare estimand name with the shared flags. `Ok(None)` means the
/// name is not a bare estimand name.
fn spec_from_name(name: &str, tilt: &TiltArgs) -> Result<Option<EstimandSpec>, CliError> {
    let alpha = || {
        tilt.alpha
            .ok_or_else(|| CliError::missing_flag("--alpha", &format!("estimand {name}")))
    };
    let spec = match name {
        "att" => EstimandSpec::Att,
        "owatt" => EstimandSpec::Owatt,
        "trim" => EstimandSpec::trim(alpha()?, tilt.reestimate)?,
        "trim-reest" => EstimandSpec::trim(alpha()?, true)?,
        "smooth-trim" => {
            let epsilon = tilt
                .epsilon
                .ok_or_else(|| CliError::missing_flag("--epsilon", &format!("estimand {name}")))?;
            EstimandSpec::smooth_trim(alpha()?, epsilon)?
        }
        "truncate" => EstimandSpec::truncate(alpha()?)?,
        _ => return Ok(None),
    };
    if tilt.reestimate && !matches!(spec, EstimandSpec::Trim { .. }) {
        log::warn!("--reestimate only applies to trim; ignored for {spec}");
    }
    Ok(Some(spec))
}

/// Comma-separated list of bare names, full forms (`trim:0.1`) or `all`.
fn resolve_list(list: &str, tilt: &TiltArgs) -> Result<Vec<EstimandSpec>, CliError> {
    let mut specs = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let lower = item.to_ascii_lowercase();
        if lower == "all" {
            specs.extend(EstimandSpec::simulation_suite());
        } else if let Some(spec) = spec_from_name(&lower, tilt)? {
            specs.push(spec);
        } else {
            specs.push(lower.parse::<EstimandSpec>()?);
        }
    }
    if specs.is_empty() {
        return Err(CliError::usage("invalid-value", "no estimands given"));
    }
    let mut seen = Vec::new();
    specs.retain(|s| {
        let fresh = !seen.contains(s);
        seen.push(*s);
        fresh
    });
    Ok(specs)
}

fn dgp_spec(args: &DgpArgs) -> Result<DgpSpec, CliError> {
    if args.dgp == 2 {
        return Ok(DgpSpec::Dgp2);
    }
    if !(args.noise_sd.is_finite() && args.noise_sd > 0.0) {
        return Err(CliError::usage(
            "invalid-value",
            format!("--noise-sd must be positive, got {}", args.noise_sd),
        ));
    }
    let scenario = match args.scenario {
        ScenarioArg::Good => Scenario::Good,
        ScenarioArg::Moderate => Scenario::Moderate,
        ScenarioArg::Poor => Scenario::Poor,
    };
    Ok(DgpSpec::Dgp1 {
        scenario,
        noise_sd: args.noise_sd,
    })
}

fn format_of(output: &OutputArgs, default: Format) -> Format {
    output.format.unwrap_or(default)
}

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    let spec = spec_from_kind(args.estimand, &args.tilt)?;
    if args.bootstrap == 1 {
        return Err(CliError::usage(
            "invalid-value",
            "--bootstrap must be 0 or at least 2",
        ));
    }
    let input = read_dataset(&args.data)?;
    let result = if args.bootstrap == 0 {
        estimate_watt(&input.data, &spec, None)?
    } else {
        bootstrap_estimate(
            &input.data,
            &spec,
            &BootstrapConfig::new(args.bootstrap, args.seed),
        )?
    };
    let config = json!({
        "data": args.data.data,
        "outcome": args.data.outcome,
        "treatment": args.data.treatment,
        "covariates": args.data.covariates,
        "estimand": spec.to_string(),
        "bootstrap": args.bootstrap,
    });
    let manifest = clock.finish("estimate", config, Some(args.seed), Some(input.sha256));
    let output = render(
        format_of(&args.output, Format::Json),
        manifest,
        "result",
        &result,
        || {
            csv_bytes(
                &[
                    "estimand",
                    "point",
                    "se",
                    "ci_lower",
                    "ci_upper",
                    "p_value",
                    "n_treated",
                    "n_control_effective",
                ],
                [vec![
                    spec.to_string(),
                    fmt_f64(result.point),
                    fmt_opt(result.se),
                    fmt_opt(result.ci_lower),
                    fmt_opt(result.ci_upper),
                    fmt_opt(result.p_value),
                    result.n_treated.to_string(),
                    result.n_control_effective.to_string(),
                ]],
            )
        },
    )?;
    finish(output, args.output.out.as_deref())
}

#[derive(Serialize)]
struct BalanceRow {
    covariate: String,
    estimand: String,
    asd_weighted: Option<f64>,
    asd_unweighted: Option<f64>,
}

pub fn balance(args: &BalanceArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    let specs = resolve_list(&args.estimand, &args.tilt)?;
    let input = read_dataset(&args.data)?;
    let fit = fit_logistic(&input.data, &FitOptions::default())?;
    let mut rows = Vec::new();
    for spec in &specs {
        let weights = effective_weights(&input.data, spec, &fit)?;
        let report = weighted_asd(&input.data, &weights)?;
        rows.extend(report.records.into_iter().map(|r| BalanceRow {
            covariate: r.name,
            estimand: spec.to_string(),
            asd_weighted: r.asd_weighted,
            asd_unweighted: r.asd_unweighted,
        }));
    }
    let config = json!({
        "data": args.data.data,
        "outcome": args.data.outcome,
        "treatment": args.data.treatment,
        "covariates": args.data.covariates,
        "estimands": specs.iter().map(ToString::to_string).collect::<Vec<_>>(),
    });
    let manifest = clock.finish("balance", config, None, Some(input.sha256));
    let output = render(
        format_of(&args.output, Format::Csv),
        manifest,
        "balance",
        &rows,
        || {
            csv_bytes(
                &["covariate", "estimand", "asd_weighted", "asd_unweighted"],
                rows.iter().map(|r| {
                    vec![
                        r.covariate.clone(),
                        r.estimand.clone(),
                        fmt_opt(r.asd_weighted),
                        fmt_opt(r.asd_unweighted),
                    ]
                }),
            )
        },
    )?;
    finish(output, args.output.out.as_deref())
}

pub fn truth(args: &TruthArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    let dgp = dgp_spec(&args.dgp)?;
    let specs = resolve_list(&args.estimands, &TiltArgs::default())?;
    let truths = true_watt_many(&specs, &dgp, args.size, args.batches, args.seed)?;
    let config = json!({
        "dgp": dgp,
        "estimands": specs.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "size": args.size,
        "batches": args.batches,
    });
    let manifest = clock.finish("truth", config, Some(args.seed), None);
    let output = render(
        format_of(&args.output, Format::Csv),
        manifest,
        "truths",
        &truths,
        || {
            csv_bytes(
                &["estimand", "value", "mc_se", "approximate"],
                truths.iter().map(|t| {
                    vec![
                        t.spec.to_string(),
                        fmt_f64(t.value),
                        fmt_f64(t.mc_se),
                        t.approximate.to_string(),
                    ]
                }),
            )
        },
    )?;
    finish(output, args.output.out.as_deref())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let clock = Clock::start();
    let dgp = dgp_spec(&args.dgp)?;
    let specs = resolve_list(&args.estimands, &TiltArgs::default())?;
    let cfg = McConfig {
        dgp,
        n: args.n,
        m: args.m,
        specs: specs.clone(),
        ps_correct: args.ps == PsArg::Correct,
        bootstrap: BootstrapConfig::new(args.bootstrap, 0),
        seed: args.seed,
    };
    cfg.validate()?;
    log::info!("computing truths for {} estimands", specs.len());
    let truths = true_watt_many(&specs, &dgp, args.truth_size, DEFAULT_BATCHES, args.seed)?;
    log::info!("running {} replicates of n={}", args.m, args.n);
    let report = monte_carlo(&cfg, &truths)?;
    let config = json!({
        "dgp": dgp,
        "n": args.n,
        "m": args.m,
        "bootstrap": args.bootstrap,
        "estimands": specs.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "ps": if cfg.ps_correct { "correct" } else { "misspecified" },
        "truth_size": args.truth_size,
        "truth_batches": DEFAULT_BATCHES,
    });
    let manifest = clock.finish("simulate", config, Some(args.seed), None);
    let output = render(
        format_of(&args.output, Format::Csv),
        manifest,
        "report",
        &report,
        || {
            csv_bytes(
                &[
                    "estimand",
                    "truth",
                    "arbias_pct",
                    "rrmse",
                    "rmse",
                    "re",
                    "cp_pct",
                    "m",
                ],
                report.cells.iter().map(|c| {
                    vec![
                        c.spec.to_string(),
                        fmt_f64(c.truth),
                        fmt_f64(c.arbias_pct),
                        fmt_f64(c.rrmse),
                        fmt_f64(c.rmse),
                        fmt_f64(c.re),
                        fmt_f64(c.cp_pct),
                        c.m_replicates.to_string(),
                    ]
                }),
            )
        },
    )?;
    finish(output, args.output.out.as_deref())
}

/// One draw from stream `(seed, Data, 0)`, the same stream the simulation
/// uses for its first replicate.
pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let dgp = dgp_spec(&args.dgp)?;
    let pop = dgp.generate(args.n, &mut stream(args.seed, Purpose::Data, 0, 0))?;
    let data = pop.observed(args.ps == PsArg::Correct)?;
    let mut body = Vec::new();
    write_dataset(&mut body, &data)?;
    emit(args.out.as_deref(), &body)
}
