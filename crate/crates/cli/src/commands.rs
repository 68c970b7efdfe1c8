//! Subcommand implementations. Every JSON output embeds the fully resolved
//! configuration and seed, so re-running an emitted document reproduces the
//! output byte for byte.

use std::io::Write;

use increlab_core::dissipativity::{
    check_differential_passivity_pointwise, check_dissipation, check_incremental_dissipation,
    search_constant_storage,
};
use increlab_core::falsify::{
    falsify_monotonicity, incremental_gain_lb, validate_certificate, ViolationCertificate,
};
use increlab_core::{Error, Signal};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use crate::config::{CheckMode, DiffpassConfig, RunConfig};
use crate::{CmdResult, CommonArgs, Failure, Outcome};

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Simulation-time failures exit 2; everything else is the caller holding
/// the configuration wrong.
fn classify(e: Error) -> Failure {
    match e {
        Error::DomainExit { .. } | Error::NonFinite { .. } | Error::Io(_) => {
            Failure::Runtime(e.to_string())
        }
        other => Failure::Config(other.to_string()),
    }
}

fn write_output(out: &Option<std::path::PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Failure::Runtime(format!("stdout: {e}"))),
    }
}

fn write_json<T: Serialize>(out: &Option<std::path::PathBuf>, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::Runtime(format!("serialize: {e}")))?;
    text.push('\n');
    write_output(out, text.as_bytes())
}

fn load(args: &CommonArgs) -> Result<RunConfig, Failure> {
    Ok(RunConfig::from_path(&args.config)
        .map_err(config_err)?
        .resolve(args.seed))
}

pub fn simulate(args: &CommonArgs) -> CmdResult {
    let config = load(args)?;
    let model = config.build_model().map_err(config_err)?;
    let input_spec = config
        .input
        .as_ref()
        .ok_or_else(|| config_err("simulate needs `input`"))?;
    let input = input_spec.build(&config.grid).map_err(config_err)?;
    let x0 = config.x0_for(&model);
    let trajectory = increlab_core::simulate(&model, &input, &x0).map_err(classify)?;

    // The resolved config rides along as a comment line so the CSV is
    // self-describing and replayable.
    let mut bytes = Vec::new();
    let echo =
        serde_json::to_string(&config).map_err(|e| Failure::Runtime(format!("serialize: {e}")))?;
    writeln!(bytes, "# config {echo}").expect("vec write");
    trajectory.write_csv(&mut bytes).map_err(classify)?;
    write_output(&args.out, &bytes)?;
    Ok(Outcome::Done)
}

pub fn falsify(args: &CommonArgs) -> CmdResult {
    let config = load(args)?;
    let model = config.build_model().map_err(config_err)?;
    let param_config = config.parameterization.clone().unwrap_or_default();
    let param = param_config
        .build(&model, &config.grid)
        .map_err(config_err)?;
    let x0 = config.x0_for(&model);
    let budget = config.budget.expect("resolved");
    let seed = config.seed.expect("resolved");

    let result = falsify_monotonicity(&model, &param, config.grid.step, &x0, budget, seed)
        .map_err(classify)?;
    match result.certificate {
        Some(mut cert) => {
            // Stamp the zoo key and parameters so the certificate is
            // self-contained for `replay`.
            cert.model_name = config.model.clone();
            cert.model_params = serde_json::Value::Object(config.params.clone());
            let fresh = validate_certificate(&model, &cert)
                .map_err(|e| Failure::Runtime(format!("validation replay failed: {e}")))?;
            if !cert.matches(fresh) {
                return Err(Failure::Runtime(format!(
                    "validation replay mismatch: {fresh} vs {}",
                    cert.value
                )));
            }
            let document = json!({
                "certificate": cert,
                "search": {
                    "best_value": result.best_value,
                    "tol_violation": result.tol_violation,
                    "evaluations": result.evaluations,
                },
                "config": config,
            });
            write_json(&args.out, &document)?;
            Ok(Outcome::Done)
        }
        None => {
            let document = json!({
                "certificate": null,
                "search": {
                    "best_value": result.best_value,
                    "tol_violation": result.tol_violation,
                    "evaluations": result.evaluations,
                },
                "config": config,
            });
            write_json(&args.out, &document)?;
            Ok(Outcome::Negative)
        }
    }
}

pub fn check(args: &CommonArgs) -> CmdResult {
    let config = load(args)?;
    let mode = config
        .mode
        .ok_or_else(|| config_err("check needs `mode`"))?;
    match mode {
        CheckMode::Dissipation => check_dissipation_cmd(args, &config),
        CheckMode::Incremental => check_incremental_cmd(args, &config),
        CheckMode::Diffpass => check_diffpass_cmd(args, &config),
        CheckMode::Gain => check_gain_cmd(args, &config),
        CheckMode::StorageSearch => check_storage_search_cmd(args, &config),
    }
}

fn required_input(config: &RunConfig, which: &str) -> Result<Signal, Failure> {
    let spec = match which {
        "input2" => config.input2.as_ref(),
        _ => config.input.as_ref(),
    };
    spec.ok_or_else(|| config_err(format!("this mode needs `{which}`")))?
        .build(&config.grid)
        .map_err(config_err)
}

fn check_dissipation_cmd(args: &CommonArgs, config: &RunConfig) -> CmdResult {
    let model = config.build_model().map_err(config_err)?;
    let supply = config
        .supply
        .as_ref()
        .ok_or_else(|| config_err("dissipation needs `supply`"))?
        .build()
        .map_err(config_err)?;
    let storage = config
        .storage
        .as_ref()
        .ok_or_else(|| config_err("dissipation needs `storage`"))?
        .build()
        .map_err(config_err)?;
    let input = required_input(config, "input")?;
    let x0 = config.x0_for(&model);
    let report = check_dissipation(&model, &storage, &supply, &input, &x0).map_err(classify)?;
    let pass = report.pass;
    write_json(&args.out, &json!({ "report": report, "config": config }))?;
    Ok(if pass {
        Outcome::Done
    } else {
        Outcome::Negative
    })
}

fn check_incremental_cmd(args: &CommonArgs, config: &RunConfig) -> CmdResult {
    let model = config.build_model().map_err(config_err)?;
    let supply = config
        .supply
        .as_ref()
        .ok_or_else(|| config_err("incremental needs `supply`"))?
        .build()
        .map_err(config_err)?;
    let storage = config
        .storage
        .as_ref()
        .ok_or_else(|| config_err("incremental needs `storage`"))?
        .build()
        .map_err(config_err)?;
    let u1 = required_input(config, "input")?;
    let u2 = required_input(config, "input2")?;
    let x0_1 = config.x0_for(&model);
    let x0_2 = config.x0_2.clone().unwrap_or_else(|| x0_1.clone());
    let report = check_incremental_dissipation(&model, &storage, &supply, &u1, &u2, &x0_1, &x0_2)
        .map_err(classify)?;
    let pass = report.pass;
    write_json(&args.out, &json!({ "report": report, "config": config }))?;
    Ok(if pass {
        Outcome::Done
    } else {
        Outcome::Negative
    })
}

fn check_diffpass_cmd(args: &CommonArgs, config: &RunConfig) -> CmdResult {
    let model = config.build_model().map_err(config_err)?;
    let spec: &DiffpassConfig = config
        .diffpass
        .as_ref()
        .ok_or_else(|| config_err("diffpass needs a `diffpass` block"))?;
    let input = required_input(config, "input")?;
    let x0 = config.x0_for(&model);
    let base = increlab_core::simulate(&model, &input, &x0).map_err(classify)?;

    match (&spec.p, &spec.p_scan_log10) {
        (Some(p), None) => {
            let p = p.build().map_err(config_err)?;
            let report =
                check_differential_passivity_pointwise(&model, &base, &p).map_err(classify)?;
            let pass = report.pass;
            write_json(&args.out, &json!({ "report": report, "config": config }))?;
            Ok(if pass {
                Outcome::Done
            } else {
                Outcome::Negative
            })
        }
        (None, Some(scan)) => {
            if model.n_x() != 1 {
                return Err(config_err("p_scan_log10 applies to one-state models"));
            }
            if scan.count < 2 {
                return Err(config_err("p_scan_log10 needs count >= 2"));
            }
            let mut results = Vec::new();
            let mut any_pass = false;
            for i in 0..scan.count {
                let e = scan.from + (scan.to - scan.from) * i as f64 / (scan.count - 1) as f64;
                let p = DMatrix::from_element(1, 1, 10f64.powf(e));
                let report =
                    check_differential_passivity_pointwise(&model, &base, &p).map_err(classify)?;
                any_pass |= report.pass;
                results.push(json!({ "p": 10f64.powf(e), "report": report }));
            }
            write_json(
                &args.out,
                &json!({ "pass": any_pass, "scan": results, "config": config }),
            )?;
            Ok(if any_pass {
                Outcome::Done
            } else {
                Outcome::Negative
            })
        }
        _ => Err(config_err(
            "diffpass needs exactly one of `p` or `p_scan_log10`",
        )),
    }
}

fn check_gain_cmd(args: &CommonArgs, config: &RunConfig) -> CmdResult {
    let model = config.build_model().map_err(config_err)?;
    let param_config = config.parameterization.clone().unwrap_or_default();
    let param = param_config
        .build(&model, &config.grid)
        .map_err(config_err)?;
    let x0 = config.x0_for(&model);
    let estimate = incremental_gain_lb(
        &model,
        &param,
        config.grid.step,
        &x0,
        config.budget.expect("resolved"),
        config.seed.expect("resolved"),
    )
    .map_err(classify)?;
    write_json(
        &args.out,
        &json!({ "gain_lower_bound": estimate, "config": config }),
    )?;
    Ok(Outcome::Done)
}

fn check_storage_search_cmd(args: &CommonArgs, config: &RunConfig) -> CmdResult {
    let model = config.build_model().map_err(config_err)?;
    let supply = config
        .supply
        .as_ref()
        .ok_or_else(|| config_err("storage_search needs `supply`"))?
        .build()
        .map_err(config_err)?;
    let x0 = config.x0_for(&model);
    let mut bases = vec![
        increlab_core::simulate(&model, &required_input(config, "input")?, &x0)
            .map_err(classify)?,
    ];
    if config.input2.is_some() {
        bases.push(
            increlab_core::simulate(&model, &required_input(config, "input2")?, &x0)
                .map_err(classify)?,
        );
    }
    let found = search_constant_storage(&model, &bases, &supply).map_err(classify)?;
    match found {
        Some(p) => {
            let rows: Vec<Vec<f64>> = (0..p.nrows())
                .map(|i| (0..p.ncols()).map(|j| p[(i, j)]).collect())
                .collect();
            write_json(
                &args.out,
                &json!({ "found": true, "p": rows, "config": config }),
            )?;
            Ok(Outcome::Done)
        }
        None => {
            write_json(
                &args.out,
                &json!({ "found": false, "p": null, "config": config }),
            )?;
            Ok(Outcome::Negative)
        }
    }
}

pub fn replay(args: &CommonArgs) -> CmdResult {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| config_err(format!("cannot read certificate: {e}")))?;
    // Accept both a bare certificate and a falsify output document.
    let cert: ViolationCertificate = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(_) => {
            let doc: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| config_err(format!("parse: {e}")))?;
            let inner = doc
                .get("certificate")
                .cloned()
                .ok_or_else(|| config_err("no certificate in file"))?;
            serde_json::from_value(inner).map_err(|e| config_err(format!("certificate: {e}")))?
        }
    };
    let params = match &cert.model_params {
        serde_json::Value::Object(map) => map.clone(),
        serde_json::Value::Null => serde_json::Map::new(),
        other => {
            return Err(config_err(format!(
                "model_params must be an object, got {other}"
            )))
        }
    };
    let model = increlab_core::zoo::zoo(&cert.model_name, &params)
        .map_err(|e| config_err(e.to_string()))?;
    let fresh = validate_certificate(&model, &cert)
        .map_err(|e| Failure::Runtime(format!("replay simulation failed: {e}")))?;
    if !cert.matches(fresh) {
        return Err(Failure::Runtime(format!(
            "certificate mismatch: stored {} vs fresh {fresh}",
            cert.value
        )));
    }
    write_json(
        &args.out,
        &json!({ "valid": true, "stored_value": cert.value, "fresh_value": fresh }),
    )?;
    Ok(Outcome::Done)
}
