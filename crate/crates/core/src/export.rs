//! Deterministic CSV/JSON export.
//!
//! Every file embeds the tool version, the full effective configuration, the
//! seed when one applies, and declared truncation bounds, so a run can be
//! reproduced bit-identically from its own header. Writes are atomic
//! (temp file in the target directory, then rename).

use crate::density::{DensityApprox, UlamDensity};
use crate::error::Result;
use crate::orbit::{EnsembleStats, EsslimRow, OrbitEnsembleConfig};
use crate::response::{AlphaRecord, DerivativeReport, ResponseConfig, ResponseCurve};
use crate::tail::{KacSum, TailProfile};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes bytes to `path` via a temp file and rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn header_lines(out: &mut String, pairs: &[(&str, String)]) {
    let _ = writeln!(out, "# tool_version={TOOL_VERSION}");
    for (k, v) in pairs {
        let _ = writeln!(out, "# {k}={v}");
    }
}

/// Density CSV: `x, h_tilde, rho` with full diagnostics in the header.
pub fn density_csv(d: &DensityApprox, config_echo: &str) -> String {
    let mut out = String::new();
    header_lines(
        &mut out,
        &[
            ("alpha", format!("{}", d.alpha)),
            ("grid_size", format!("{}", d.grid.len())),
            ("residual", format!("{:.6e}", d.residual)),
            ("raw_residual", format!("{:.6e}", d.raw_residual)),
            ("iterations", format!("{}", d.iterations)),
            ("k_max", format!("{}", d.k_max)),
            ("tail_sup_bound", format!("{:.6e}", d.tail_sup_bound)),
            ("norm", "wrt_lambda_tilde".into()),
            ("config", config_echo.into()),
        ],
    );
    out.push_str("x,h_tilde,rho\n");
    for (x, h) in d.grid.iter().zip(&d.values) {
        let _ = writeln!(out, "{x:.17e},{h:.17e},{:.17e}", 2.0 * h);
    }
    out
}

/// Ulam comparison CSV: cell midpoints and piecewise-constant density.
pub fn ulam_csv(u: &UlamDensity, l1_gap: f64, config_echo: &str) -> String {
    let mut out = String::new();
    header_lines(
        &mut out,
        &[
            ("alpha", format!("{}", u.alpha)),
            ("cells", format!("{}", u.cells)),
            ("sub_samples", format!("{}", u.sub_samples)),
            ("iterations", format!("{}", u.iterations)),
            ("residual", format!("{:.6e}", u.residual)),
            ("l1_gap_vs_solver", format!("{:.6e}", l1_gap)),
            ("config", config_echo.into()),
        ],
    );
    out.push_str("x_mid,h_tilde,mass\n");
    let w = 0.5 / u.cells as f64;
    for (i, (v, m)) in u.values.iter().zip(&u.masses).enumerate() {
        let x = 0.5 + (i as f64 + 0.5) * w;
        let _ = writeln!(out, "{x:.17e},{v:.17e},{m:.17e}");
    }
    out
}

/// Tail CSV: `n, tail_mass, model_value, residual`.
pub fn tail_csv(t: &TailProfile, config_echo: &str) -> String {
    let mut out = String::new();
    header_lines(
        &mut out,
        &[
            ("alpha", format!("{}", t.alpha)),
            ("fitted_c", format!("{:.12e}", t.fitted_c)),
            ("fitted_exponent", format!("{:.12e}", t.fitted_exponent)),
            (
                "fit_window",
                format!("{}..{}", t.fit_window.0, t.fit_window.1),
            ),
            ("fit_residual", format!("{:.6e}", t.fit_residual)),
            ("predicted_c", format!("{:.12e}", t.predicted_c)),
            ("config", config_echo.into()),
        ],
    );
    out.push_str("n,tail_mass,model_value,residual\n");
    for (&n, &m) in t.n_values.iter().zip(&t.tail_masses) {
        let model = t.fitted_c * (n as f64).powf(-t.fitted_exponent);
        let _ = writeln!(out, "{n},{m:.17e},{model:.17e},{:.17e}", m - model);
    }
    out
}

/// JSON summary of a tail profile.
pub fn tail_json(t: &TailProfile, config: &ResponseConfig) -> Result<String> {
    let v = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "alpha": t.alpha,
        "fitted_c": t.fitted_c,
        "fitted_exponent": t.fitted_exponent,
        "fit_window": [t.fit_window.0, t.fit_window.1],
        "fit_residual": t.fit_residual,
        "second_order_slope": t.second_order_slope,
        "predicted_c": t.predicted_c,
        "config": config,
    });
    Ok(serde_json::to_string_pretty(&v)?)
}

fn kac_json(k: &KacSum) -> serde_json::Value {
    match k {
        KacSum::Finite {
            partial,
            tail_correction,
            total,
            n_max,
        } => serde_json::json!({
            "kind": "finite",
            "partial": partial,
            "tail_correction": tail_correction,
            "total": total,
            "n_max": n_max,
        }),
        KacSum::Divergent {
            partial,
            n_max,
            growth,
        } => serde_json::json!({
            "kind": "divergent",
            "partial": partial,
            "n_max": n_max,
            "growth": growth,
        }),
    }
}

/// Response-curve CSV: one row per (alpha, potential).
pub fn response_csv(curve: &ResponseCurve, config_echo: &str) -> String {
    let mut out = String::new();
    header_lines(&mut out, &[("config", config_echo.into())]);
    out.push_str("alpha,potential,r_srb,srb_tail_bound,kac,r_phy,quotient\n");
    for rec in &curve.records {
        for (p, name) in curve.potentials.iter().enumerate() {
            let kac = rec
                .kac
                .total()
                .map(|t| format!("{t:.17e}"))
                .unwrap_or_else(|| "inf".into());
            let quotient = rec
                .quotients
                .get(p)
                .map(|q| format!("{q:.17e}"))
                .unwrap_or_else(|| "".into());
            let _ = writeln!(
                out,
                "{:.17e},{},{:.17e},{:.3e},{},{:.17e},{}",
                rec.alpha,
                name,
                rec.srb[p].value,
                rec.srb[p].declared_tail_bound,
                kac,
                rec.r_phy[p],
                quotient
            );
        }
    }
    out
}

/// JSON summary of a response run: derivative reports plus per-alpha rows.
pub fn response_json(
    curve: &ResponseCurve,
    reports: &[DerivativeReport],
    record_at_one: Option<&AlphaRecord>,
    config: &ResponseConfig,
) -> Result<String> {
    let rows: Vec<serde_json::Value> = curve
        .records
        .iter()
        .map(|rec| {
            serde_json::json!({
                "alpha": rec.alpha,
                "h_half": rec.h_half,
                "density_residual": rec.density_residual,
                "fitted_c": rec.tail.fitted_c,
                "fitted_exponent": rec.tail.fitted_exponent,
                "kac": kac_json(&rec.kac),
                "srb": rec.srb,
                "r_phy": rec.r_phy,
                "quotients": rec.quotients,
            })
        })
        .collect();
    let at_one = record_at_one.map(|rec| {
        serde_json::json!({
            "h1_half": rec.h_half,
            "rho1_half": 2.0 * rec.h_half,
            "c1": rec.tail.fitted_c,
            "integrals_nu1": rec.srb,
        })
    });
    let v = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "potentials": curve.potentials,
        "derivatives": reports,
        "at_transition": at_one,
        "rows": rows,
        "config": config,
    });
    Ok(serde_json::to_string_pretty(&v)?)
}

/// Ensemble CSV: `orbit_id, time_average`.
pub fn ensemble_csv(cfg: &OrbitEnsembleConfig, stats: &EnsembleStats, label: &str) -> String {
    let mut out = String::new();
    header_lines(
        &mut out,
        &[
            ("observable", label.into()),
            ("alpha", format!("{}", cfg.alpha)),
            ("n_steps", format!("{}", cfg.n_steps)),
            ("n_orbits", format!("{}", cfg.n_orbits)),
            ("burn_in", format!("{}", cfg.burn_in)),
            ("seed", format!("{}", cfg.seed)),
            ("mean", format!("{:.17e}", stats.mean)),
            ("std_error", format!("{:.17e}", stats.std_error)),
            ("floored_orbits", format!("{}", stats.floored_orbits)),
        ],
    );
    out.push_str("orbit_id,time_average\n");
    for (i, v) in stats.per_orbit.iter().enumerate() {
        let _ = writeln!(out, "{i},{v:.17e}");
    }
    out
}

/// JSON summary of an ensemble run (config echo included).
pub fn ensemble_json(
    cfg: &OrbitEnsembleConfig,
    stats: &EnsembleStats,
    label: &str,
) -> Result<String> {
    let v = serde_json::json!({
        "tool_version": TOOL_VERSION,
        "observable": label,
        "config": cfg,
        "mean": stats.mean,
        "std_error": stats.std_error,
        "median": stats.median,
        "floored_orbits": stats.floored_orbits,
    });
    Ok(serde_json::to_string_pretty(&v)?)
}

/// Esslim table CSV.
pub fn esslim_csv(rows: &[EsslimRow], target: f64, config_echo: &str) -> String {
    let mut out = String::new();
    header_lines(
        &mut out,
        &[
            ("analytic_target", format!("{target:.17e}")),
            ("config", config_echo.into()),
        ],
    );
    out.push_str("alpha,n_steps,median_quotient,mean_quotient,std_error,gap_to_target\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e}",
            r.alpha, r.n_steps, r.median_quotient, r.mean_quotient, r.std_error, r.gap_to_target
        );
    }
    out
}
