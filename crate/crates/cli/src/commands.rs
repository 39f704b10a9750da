use std::io::Write;
use std::path::Path;

use serde::Serialize;

use hpl_core::algebra::Hermitian2;
use hpl_core::csv_format::{grid_table, samples_table, write_table};
use hpl_core::density::{scalar_cdf_q, TimeHorizon};
use hpl_core::pointer_density::{figure_grid, optimal_pointer_x, optimal_pointer_z, GridKind};
use hpl_core::presets::{parse_bloch, StatePreset};
use hpl_core::reproduce::{constants, ConstantRow};
use hpl_core::simulate::{self, stats, EmpiricalQuality, MIN_EMPIRICAL_SAMPLES};
use hpl_core::verify::{run_suite, Hooks, Level, VerifyReport};
use hpl_core::{BlochVector, PointerFunction, SimConfig, SimMethod};

use crate::args::{Command, StateArgs};
use crate::output::{create, print_json, sibling, write_json, RunManifest, SCHEMA_VERSION};
use crate::Failure;

pub fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Reproduce { beta, json } => reproduce(beta, json),
        Command::Density { which, state, n, t, out } => density(&which, &state, n, t, &out),
        Command::Simulate {
            method,
            state,
            n,
            dt,
            t,
            seed,
            out,
        } => simulate_cmd(&method, &state, n, dt, t, seed, &out),
        Command::Verify { level, json, perturb_i } => verify(&level, json, perturb_i),
    }
}

fn resolve_state(state: &StateArgs) -> Result<(BlochVector, String), Failure> {
    match (&state.bloch, &state.preset) {
        (Some(s), None) => parse_bloch(s).map(|b| (b, s.clone())).map_err(|e| Failure::Usage(e.to_string())),
        (None, Some(p)) => StatePreset::parse(p)
            .map(|p| (p.bloch(), p.name().to_owned()))
            .ok_or_else(|| Failure::Usage(format!("unknown preset `{p}`"))),
        _ => Err(Failure::Usage("give exactly one of --bloch or --preset".into())),
    }
}

fn horizon(t: Option<f64>) -> Result<TimeHorizon, Failure> {
    match t {
        None => Ok(TimeHorizon::infinite()),
        Some(t) => TimeHorizon::finite(t).map_err(|e| Failure::Usage(e.to_string())),
    }
}

#[derive(Serialize)]
struct ReproduceDoc<'a> {
    schema_version: u32,
    beta: f64,
    rows: &'a [ConstantRow],
    passed: Option<bool>,
}

fn reproduce(beta: f64, json: bool) -> Result<(), Failure> {
    let h = TimeHorizon::from_beta(beta).map_err(|e| Failure::Usage(e.to_string()))?;
    let rows = constants(h.beta)?;
    let verdicts: Vec<bool> = rows.iter().filter_map(|r| r.passed).collect();
    let passed = (!verdicts.is_empty()).then(|| verdicts.iter().all(|&p| p));
    if json {
        print_json(&ReproduceDoc {
            schema_version: SCHEMA_VERSION,
            beta: h.beta,
            rows: &rows,
            passed,
        })?;
    } else {
        println!("beta = {}", h.beta);
        if passed.is_some() {
            println!("{:<22} {:>12} {:>10} {:>8}  result", "constant", "computed", "reference", "tol");
        } else {
            println!("{:<22} {:>12}", "constant", "computed");
        }
        for r in &rows {
            match (r.reference, r.tolerance, r.passed) {
                (Some(reference), Some(tol), Some(ok)) => println!(
                    "{:<22} {:>12.6} {:>10.3} {:>8.0e}  {}",
                    r.name,
                    r.computed,
                    reference,
                    tol,
                    if ok { "PASS" } else { "FAIL" }
                ),
                _ => println!("{:<22} {:>12.6}", r.name, r.computed),
            }
        }
    }
    if passed == Some(false) {
        let failed: Vec<&str> = rows.iter().filter(|r| r.passed == Some(false)).map(|r| r.name).collect();
        return Err(Failure::Check(format!("constants out of tolerance: {}", failed.join(", "))));
    }
    Ok(())
}

fn density(which: &str, state: &StateArgs, n: usize, t: Option<f64>, out: &Path) -> Result<(), Failure> {
    let kind = GridKind::parse(which)
        .ok_or_else(|| Failure::Usage(format!("--which must be endpoint, pointer_x or pointer_z, got `{which}`")))?;
    let (rho, label) = resolve_state(state)?;
    let h = horizon(t)?;
    if n < hpl_core::pointer_density::MIN_NODES {
        return Err(Failure::Usage(format!(
            "--n must be at least {}",
            hpl_core::pointer_density::MIN_NODES
        )));
    }
    let grid = figure_grid(kind, &rho, &h, n)?;
    let mut w = create(out)?;
    write_table(&grid_table(&grid), &mut w)?;
    w.flush()?;

    let mut manifest = RunManifest::new("density", None);
    manifest
        .param("which", kind.name())
        .param("state", label)
        .param("n", n)
        .param("t", h.t)
        .param("beta", h.beta)
        .param("support_lo", grid.support.0)
        .param("support_hi", grid.support.1)
        .param("mass", grid.mass());
    if let Some(p) = &grid.pointer {
        manifest.param("pointer", serde_json::to_string(p).map_err(anyhow::Error::from)?);
    }
    manifest.outputs.push(out.to_path_buf());
    let m = manifest.write_beside(out)?;
    println!("wrote {} ({} nodes, mass {:.6})", out.display(), n, grid.mass());
    println!("wrote {}", m.display());
    Ok(())
}

#[derive(Serialize)]
struct PointerSummary {
    pointer: PointerFunction,
    target: &'static str,
    expected_mean: f64,
    #[serde(flatten)]
    stats: EmpiricalQuality,
    z_score: f64,
}

#[derive(Serialize)]
struct SimulateSummary {
    schema_version: u32,
    method: &'static str,
    n: usize,
    seed: u64,
    t: f64,
    dt: f64,
    beta: f64,
    state: BlochVector,
    endpoint_mean: f64,
    endpoint_variance: f64,
    ks_statistic: f64,
    ks_p_value: f64,
    pointers: Vec<PointerSummary>,
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(method: &str, state: &StateArgs, n: usize, dt: f64, t: f64, seed: u64, out: &Path) -> Result<(), Failure> {
    let method = SimMethod::parse(method)
        .ok_or_else(|| Failure::Usage(format!("--method must be endpoint_exact or filter_paths, got `{method}`")))?;
    let (rho, label) = resolve_state(state)?;
    let mut cfg = SimConfig::new(method, n, seed)?;
    cfg.dt = dt;
    cfg.horizon = horizon(Some(t))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let samples = simulate::simulate(&rho, &cfg)?;
    // filter paths cover steps·dt, which may differ from t by rounding
    let h = match method {
        SimMethod::EndpointExact => cfg.horizon,
        SimMethod::FilterPaths => TimeHorizon::finite(cfg.steps() as f64 * cfg.dt)?,
    };
    let ys = simulate::endpoints(&samples);
    let nf = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / nf;
    let variance = if ys.len() > 1 {
        ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let ks = stats::ks_one_sample(&ys, |y| scalar_cdf_q(y, &h, &rho));

    let mut pointers = Vec::new();
    if n >= MIN_EMPIRICAL_SAMPLES {
        for (pointer, target, name, expected) in [
            (optimal_pointer_x(&h)?, Hermitian2::sigma_x(), "sigma_x", rho.px),
            (optimal_pointer_z(&h)?, Hermitian2::sigma_z(), "sigma_z", rho.pz),
        ] {
            let stats = simulate::empirical_quality(&samples, &pointer, &rho, &target)?;
            pointers.push(PointerSummary {
                pointer,
                target: name,
                expected_mean: expected,
                z_score: (stats.mean - expected) / stats.standard_error,
                stats,
            });
        }
    }

    let mut w = create(out)?;
    write_table(&samples_table(&samples), &mut w)?;
    w.flush()?;
    let summary = SimulateSummary {
        schema_version: SCHEMA_VERSION,
        method: method.name(),
        n,
        seed,
        t: h.t,
        dt: cfg.dt,
        beta: h.beta,
        state: rho,
        endpoint_mean: mean,
        endpoint_variance: variance,
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
        pointers,
    };
    let summary_path = sibling(out, "summary.json");
    write_json(&summary_path, &summary)?;

    let mut manifest = RunManifest::new("simulate", Some(seed));
    manifest
        .param("method", method.name())
        .param("state", label)
        .param("n", n)
        .param("dt", dt)
        .param("t", t);
    manifest.outputs = vec![out.to_path_buf(), summary_path.clone()];
    let m = manifest.write_beside(out)?;

    println!("method {} n {} t {} beta {:.8}", method.name(), n, h.t, h.beta);
    println!("endpoint mean {mean:.6} variance {variance:.6}");
    println!("KS vs q: D = {:.4e}, p = {:.4}", ks.statistic, ks.p_value);
    for p in &summary.pointers {
        println!(
            "mean_{} = {:.6} (expected {:.6}, se {:.2e}, z {:+.2}), variance {:.6}",
            &p.target[6..],
            p.stats.mean,
            p.expected_mean,
            p.stats.standard_error,
            p.z_score,
            p.stats.variance
        );
    }
    println!("wrote {}, {}, {}", out.display(), summary_path.display(), m.display());
    Ok(())
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a VerifyReport,
}

fn verify(level: &str, json: bool, perturb_i: f64) -> Result<(), Failure> {
    let level = Level::parse(level).ok_or_else(|| Failure::Usage(format!("--level must be fast or full, got `{level}`")))?;
    let report = run_suite(level, &Hooks { perturb_i });
    if json {
        print_json(&VerifyDoc {
            schema_version: SCHEMA_VERSION,
            report: &report,
        })?;
    } else {
        for c in &report.checks {
            println!(
                "{} {:<30} {:>7.2}s  {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.seconds,
                c.detail
            );
        }
        println!("total {:.2}s", report.seconds);
    }
    if !report.passed {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        return Err(Failure::Check(format!("invariants failed: {}", names.join(", "))));
    }
    Ok(())
}
