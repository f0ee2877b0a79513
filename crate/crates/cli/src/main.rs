//! Command-line pipeline for intermittent-map numerics: induced densities,
//! return-time tails, response curves across the transition, orbit
//! ensembles, zeta evaluation, and the acceptance reproduction run.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 numerical failure.

mod config;

use clap::{Parser, Subcommand};
use config::*;
use lsv_core::export;
use lsv_core::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lsv", version, about = "Intermittent interval-map numerics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Output base path; files get .csv / .json suffixes.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Which formats to write.
    #[arg(long, global = true, value_parser = ["csv", "json", "both"])]
    format: Option<String>,
    /// Ensemble seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Thread-pool size (0 forces the sequential path).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the induced invariant density (optionally vs. the Ulam oracle).
    Density {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        grid_size: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Run the Ulam comparison at this many cells.
        #[arg(long)]
        ulam: Option<usize>,
    },
    /// Tail profile, power-law fit, and Kac sum.
    Tails {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        window_lo: Option<usize>,
        #[arg(long)]
        window_hi: Option<usize>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Response curve on a grid accumulating at the transition, with the
    /// one-sided derivative comparison.
    Response {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        j_lo: Option<u32>,
        #[arg(long)]
        j_hi: Option<u32>,
        /// Explicit alpha grid, comma separated (overrides the j range).
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Builtin tag (x, x2, sqrt, cos2pi) or an expression in x.
        #[arg(long)]
        potential: Option<String>,
        /// Declared Hölder exponent for expression potentials.
        #[arg(long)]
        eta: Option<f64>,
        /// Declared Hölder constant for expression potentials.
        #[arg(long)]
        holder_c: Option<f64>,
    },
    /// Orbit ensembles: Birkhoff averages, occupation fractions, or the
    /// rescaled double-limit table.
    Simulate {
        #[arg(long)]
        config: Option<String>,
        #[arg(long, value_parser = ["birkhoff", "occupation", "esslim"])]
        mode: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        n_steps: Option<usize>,
        #[arg(long)]
        n_orbits: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        potential: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        holder_c: Option<f64>,
    },
    /// Evaluate zeta(s) on the real axis right of the pole.
    Zeta {
        #[arg(long)]
        config: Option<String>,
        /// Evaluation points.
        s: Vec<f64>,
    },
    /// Run the full acceptance suite and print one line per criterion.
    Reproduce,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<lsv_core::Error> for Failure {
    fn from(e: lsv_core::Error) -> Self {
        match e {
            Error::Domain(_) | Error::Config(_) | Error::IllConditionedFit(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Usage(s)
    }
}

struct Output {
    base: PathBuf,
    csv: bool,
    json: bool,
}

impl Output {
    fn new(cli_out: &Option<String>, default_base: &str, format: &Option<String>) -> Self {
        let base = PathBuf::from(cli_out.clone().unwrap_or_else(|| default_base.to_string()));
        let (csv, json) = match format.as_deref() {
            Some("csv") => (true, false),
            Some("json") => (false, true),
            _ => (true, true),
        };
        Self { base, csv, json }
    }

    fn write_csv(&self, suffix: &str, content: &str) -> Result<Vec<String>> {
        if !self.csv {
            return Ok(vec![]);
        }
        let path = self.base.with_extension(format!("{suffix}csv"));
        export::atomic_write(&path, content.as_bytes())?;
        Ok(vec![path.display().to_string()])
    }

    fn write_json(&self, suffix: &str, content: &str) -> Result<Vec<String>> {
        if !self.json {
            return Ok(vec![]);
        }
        let path = self.base.with_extension(format!("{suffix}json"));
        export::atomic_write(&path, content.as_bytes())?;
        Ok(vec![path.display().to_string()])
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            parallel::set_sequential_override(true);
        } else {
            parallel::configure_threads(n);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            // Machine-readable error report on stdout, human text on stderr.
            let report = serde_json::json!({
                "tool_version": export::TOOL_VERSION,
                "error": msg,
                "kind": "numerical",
                "exit_code": 2,
            });
            println!("{report}");
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> std::result::Result<ExitCode, Failure> {
    match cli.cmd {
        Cmd::Density {
            ref config,
            alpha,
            grid_size,
            k_max,
            tol,
            ulam,
        } => {
            let mut p: DensityParams = load(config.as_deref())?;
            if let Some(v) = alpha {
                p.alpha = v;
            }
            if let Some(v) = grid_size {
                p.grid_size = v;
            }
            if let Some(v) = k_max {
                p.k_max = v;
            }
            if let Some(v) = tol {
                p.tol = v;
            }
            if ulam.is_some() {
                p.ulam_cells = ulam;
            }
            check_positive("tol", p.tol)?;
            cmd_density(&cli, p)
        }
        Cmd::Tails {
            ref config,
            alpha,
            window_lo,
            window_hi,
            points,
        } => {
            let mut p: TailsParams = load(config.as_deref())?;
            if let Some(v) = alpha {
                p.alpha = v;
            }
            if let Some(v) = window_lo {
                p.window_lo = v;
            }
            if let Some(v) = window_hi {
                p.window_hi = v;
            }
            if let Some(v) = points {
                p.points = v;
            }
            cmd_tails(&cli, p)
        }
        Cmd::Response {
            ref config,
            j_lo,
            j_hi,
            ref alphas,
            ref potential,
            eta,
            holder_c,
        } => {
            let mut p: ResponseParams = load(config.as_deref())?;
            if let Some(v) = j_lo {
                p.j_lo = v;
            }
            if let Some(v) = j_hi {
                p.j_hi = v;
            }
            if alphas.is_some() {
                p.alphas = alphas.clone();
            }
            if let Some(expr) = potential {
                p.potential.expression = expr.clone();
            }
            if let Some(v) = eta {
                p.potential.eta = v;
            }
            if let Some(v) = holder_c {
                p.potential.c = v;
            }
            cmd_response(&cli, p)
        }
        Cmd::Simulate {
            ref config,
            ref mode,
            alpha,
            n_steps,
            n_orbits,
            burn_in,
            radius,
            ref potential,
            eta,
            holder_c,
        } => {
            let mut p: SimulateParams = load(config.as_deref())?;
            match mode.as_deref() {
                Some("birkhoff") => p.mode = SimulateMode::Birkhoff,
                Some("occupation") => p.mode = SimulateMode::Occupation,
                Some("esslim") => p.mode = SimulateMode::Esslim,
                _ => {}
            }
            if let Some(v) = alpha {
                p.alpha = v;
            }
            if let Some(v) = n_steps {
                p.n_steps = v;
            }
            if let Some(v) = n_orbits {
                p.n_orbits = v;
            }
            if let Some(v) = burn_in {
                p.burn_in = v;
            }
            if let Some(v) = radius {
                p.radius = v;
            }
            if let Some(expr) = potential {
                p.potential.expression = expr.clone();
            }
            if let Some(v) = eta {
                p.potential.eta = v;
            }
            if let Some(v) = holder_c {
                p.potential.c = v;
            }
            if let Some(s) = cli.seed {
                p.seed = s;
            }
            cmd_simulate(&cli, p)
        }
        Cmd::Zeta { ref config, ref s } => {
            let mut p: ZetaParams = load(config.as_deref())?;
            if !s.is_empty() {
                p.s = s.clone();
            }
            cmd_zeta(&cli, p)
        }
        Cmd::Reproduce => {
            let results = lsv_core::criteria::run_acceptance();
            let mut all_ok = true;
            for r in &results {
                println!("{}", r.line());
                all_ok &= r.passed;
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

fn cmd_density(cli: &Cli, p: DensityParams) -> std::result::Result<ExitCode, Failure> {
    let map = LsvMap::lsv(p.alpha)?;
    let sys = InducedSystem::build(map, p.k_max, p.k_max)?;
    let d = solve_density(&sys, p.grid_size, p.tol, p.max_iter)?;
    let echo = serde_json::to_string(&p).map_err(Error::from)?;
    let out = Output::new(&cli.out, "out/density", &cli.format);
    let mut written = out.write_csv("", &export::density_csv(&d, &echo))?;

    let mut ulam_gap = None;
    if let Some(cells) = p.ulam_cells {
        let u = ulam_oracle(&map, cells, p.ulam_sub_samples, 1e-13, 50_000)?;
        let gap = ulam_l1_gap(&d, &u);
        ulam_gap = Some(gap);
        let mut more = out.write_csv("ulam.", &export::ulam_csv(&u, gap, &echo))?;
        written.append(&mut more);
    }
    let summary = serde_json::json!({
        "tool_version": export::TOOL_VERSION,
        "alpha": d.alpha,
        "grid_size": d.grid.len(),
        "residual": d.residual,
        "raw_residual": d.raw_residual,
        "iterations": d.iterations,
        "k_max": d.k_max,
        "tail_sup_bound": d.tail_sup_bound,
        "h_half": d.h_half(),
        "rho_half": 2.0 * d.h_half(),
        "min_value": d.min_value(),
        "max_value": d.max_value(),
        "ulam_l1_gap": ulam_gap,
        "config": p,
    });
    let mut more = out.write_json(
        "",
        &serde_json::to_string_pretty(&summary).map_err(Error::from)?,
    )?;
    written.append(&mut more);
    for w in written {
        eprintln!("wrote {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_tails(cli: &Cli, p: TailsParams) -> std::result::Result<ExitCode, Failure> {
    let map = LsvMap::lsv(p.alpha)?;
    let yseq_len = p.kac_n_max.max(p.window_hi).max(p.k_max);
    let sys = InducedSystem::build(map, p.k_max, yseq_len)?;
    let d = solve_density(&sys, p.grid_size, p.tol, 2000)?;
    let profile = fit_tail(&d, &sys.yseq, (p.window_lo, p.window_hi), p.points)?;
    let kac = kac_sum(&d, &sys.yseq, p.kac_n_max, &profile)?;
    let echo = serde_json::to_string(&p).map_err(Error::from)?;
    let out = Output::new(&cli.out, "out/tails", &cli.format);
    let mut written = out.write_csv("", &export::tail_csv(&profile, &echo))?;
    let summary = serde_json::json!({
        "tool_version": export::TOOL_VERSION,
        "alpha": profile.alpha,
        "fitted_c": profile.fitted_c,
        "fitted_exponent": profile.fitted_exponent,
        "fit_window": [profile.fit_window.0, profile.fit_window.1],
        "fit_residual": profile.fit_residual,
        "second_order_slope": profile.second_order_slope,
        "predicted_c": profile.predicted_c,
        "kac": kac,
        "config": p,
    });
    let mut more = out.write_json(
        "",
        &serde_json::to_string_pretty(&summary).map_err(Error::from)?,
    )?;
    written.append(&mut more);
    for w in written {
        eprintln!("wrote {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_response(cli: &Cli, p: ResponseParams) -> std::result::Result<ExitCode, Failure> {
    let grid = match &p.alphas {
        Some(a) => a.clone(),
        None => {
            if p.j_lo > p.j_hi {
                return Err(Failure::Usage(format!(
                    "empty j range {}..{}",
                    p.j_lo, p.j_hi
                )));
            }
            geometric_alpha_grid(p.j_lo, p.j_hi)
        }
    };
    if grid.iter().any(|&a| a >= 1.0) {
        return Err(Failure::Usage(
            "response grid must lie strictly below 1".into(),
        ));
    }
    let phi = p.potential.build()?;
    let cfg = p.response_config();
    let potentials = vec![phi];
    let curve = build_response_curve(&grid, &potentials, &cfg)?;
    let rec1 = analyze_alpha(1.0, &potentials, &cfg)?;
    let report = one_sided_derivative(&curve, &rec1, 0)?;

    let echo = serde_json::to_string(&p).map_err(Error::from)?;
    let out = Output::new(&cli.out, "out/response", &cli.format);
    let mut written = out.write_csv("", &export::response_csv(&curve, &echo))?;
    let json =
        export::response_json(&curve, &[report], Some(&rec1), &cfg).map_err(Failure::from)?;
    let mut more = out.write_json("", &json)?;
    written.append(&mut more);
    for w in written {
        eprintln!("wrote {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(cli: &Cli, p: SimulateParams) -> std::result::Result<ExitCode, Failure> {
    let phi = p.potential.build()?;
    let cfg = OrbitEnsembleConfig {
        alpha: p.alpha,
        n_steps: p.n_steps,
        n_orbits: p.n_orbits,
        seed: p.seed,
        burn_in: p.burn_in,
        initial_law: p.initial_law,
    };
    let echo = serde_json::to_string(&p).map_err(Error::from)?;
    let out = Output::new(&cli.out, "out/simulate", &cli.format);
    let mut written = Vec::new();
    match p.mode {
        SimulateMode::Birkhoff => {
            let stats = birkhoff_average(&cfg, &phi)?;
            written.extend(out.write_csv("", &export::ensemble_csv(&cfg, &stats, &phi.name))?);
            written.extend(out.write_json(
                "",
                &export::ensemble_json(&cfg, &stats, &phi.name).map_err(Failure::from)?,
            )?);
            println!(
                "birkhoff alpha={} n={} orbits={}: mean={:.8} se={:.2e}",
                p.alpha, p.n_steps, p.n_orbits, stats.mean, stats.std_error
            );
        }
        SimulateMode::Occupation => {
            let stats = occupation_near_zero(&cfg, p.radius)?;
            let label = format!("occupation[0,{})", p.radius);
            written.extend(out.write_csv("", &export::ensemble_csv(&cfg, &stats, &label))?);
            written.extend(out.write_json(
                "",
                &export::ensemble_json(&cfg, &stats, &label).map_err(Failure::from)?,
            )?);
            println!(
                "occupation alpha={} radius={}: mean={:.6} se={:.2e}",
                p.alpha, p.radius, stats.mean, stats.std_error
            );
        }
        SimulateMode::Esslim => {
            let target = match p.esslim_target {
                Some(t) => t,
                None => {
                    let cfg1 = ResponseConfig::default();
                    let rec1 = analyze_alpha(1.0, std::slice::from_ref(&phi), &cfg1)?;
                    -rec1.srb[0].value / rec1.tail.fitted_c
                }
            };
            let rows = esslim_demo(
                &phi,
                &p.esslim_alphas,
                &p.esslim_schedule,
                p.n_orbits,
                p.seed,
                target,
            )?;
            written.extend(out.write_csv("", &export::esslim_csv(&rows, target, &echo))?);
            for r in &rows {
                println!(
                    "esslim alpha={:.6} n={}: median_q={:.5} gap_to_target={:.3e}",
                    r.alpha, r.n_steps, r.median_quotient, r.gap_to_target
                );
            }
        }
    }
    for w in written {
        eprintln!("wrote {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_zeta(cli: &Cli, p: ZetaParams) -> std::result::Result<ExitCode, Failure> {
    if p.s.is_empty() {
        return Err(Failure::Usage(
            "zeta needs at least one evaluation point".into(),
        ));
    }
    let mut lines = String::from("s,zeta\n");
    for &s in &p.s {
        let v = zeta(s)?;
        println!("zeta({s}) = {v:.15}");
        lines.push_str(&format!("{s:.17e},{v:.17e}\n"));
    }
    if cli.out.is_some() {
        let out = Output::new(&cli.out, "out/zeta", &cli.format);
        for w in out.write_csv("", &lines)? {
            eprintln!("wrote {w}");
        }
    }
    Ok(ExitCode::SUCCESS)
}
