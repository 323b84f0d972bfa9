//! Command-line driver: simulation runs, refinement studies, corridor
//! tables and the acceptance suite.

mod csv;
mod error;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use burgers_fsi::diagnostics::{
    decay_fit, empirical_alpha, energy_identity_residual, eps_eta, evaluate_trajectory, h_star_estimate,
    initial_energy, max_weak_residual, stability_constants, standard_family, Corridor, DiagnosticsRecord, Envelope,
};
use burgers_fsi::discretization::config_control;
use burgers_fsi::verification::{convergence_order, mms_study, self_convergence_study, Refinement, RefinementStudy};
use burgers_fsi::{run_with_control, suite, validate_config, Scheme, SimConfig, ValidatedConfig};

pub use error::CliError;

use csv::Table;
use plot::{thin, Chart, Series};

#[derive(Debug, Parser)]
#[command(name = "burgers-fsi", version, about = "Viscous Burgers flow with a feedback-controlled point mass")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Reserved; the dynamics are deterministic
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a configuration and write trajectory, diagnostics and summary
    Run {
        config: PathBuf,
        /// Also write SVG plots
        #[arg(long)]
        plots: bool,
        /// Record every n-th step
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
    /// Refinement study of a configuration
    Converge {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Defaults to diffusive for Crank-Nicolson, uniform otherwise
        #[arg(long, value_enum)]
        refinement: Option<RefinementArg>,
    },
    /// Tabulate corridor and decay constants without solving
    Bounds {
        config: PathBuf,
        /// Defaults to the configured t_final
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Corridor half-width for eps and eta; defaults to min(kappa1, kappa2) per row
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run the acceptance suite
    Verify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RefinementArg {
    Temporal,
    Uniform,
    Diffusive,
}

impl From<RefinementArg> for Refinement {
    fn from(r: RefinementArg) -> Self {
        match r {
            RefinementArg::Temporal => Refinement::Temporal,
            RefinementArg::Uniform => Refinement::Uniform,
            RefinementArg::Diffusive => Refinement::Diffusive,
        }
    }
}

/// Executes a parsed command line, returning the lines to print.
pub fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    match &cli.command {
        Command::Run { config, plots, every } => cmd_run(config, &cli.out, *plots, *every),
        Command::Converge {
            config,
            levels,
            refinement,
        } => cmd_converge(config, &cli.out, *levels, refinement.map(Into::into)),
        Command::Bounds {
            config,
            t_max,
            samples,
            alpha,
        } => cmd_bounds(config, &cli.out, *t_max, *samples, *alpha),
        Command::Verify => cmd_verify(&cli.out),
    }
}

struct LoadedConfig {
    cfg: ValidatedConfig,
    sha256: String,
}

fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Usage(format!("{}: config is not UTF-8", path.display())))?;
    let cfg = validate_config(SimConfig::from_json(&text).map_err(CliError::Config)?).map_err(CliError::Config)?;
    Ok(LoadedConfig {
        cfg,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_run(config: &Path, out: &Path, plots: bool, every: usize) -> Result<Vec<String>, CliError> {
    if every == 0 {
        return Err(CliError::Usage("--every must be at least 1".into()));
    }
    let LoadedConfig { cfg, sha256 } = load_config(config)?;
    let (k, h1) = (cfg.k, cfg.h1);
    let traj = run_with_control(&cfg, &config_control(&cfg), every)?;
    let constants = stability_constants(&cfg, empirical_alpha(&traj))?;
    let records = evaluate_trajectory(&traj, &cfg, constants.eps)?;
    let (residual, residual_max) = energy_identity_residual(&traj, k, h1);

    let mut trajectory = Table::new(&[
        "t", "h", "g", "E", "diss_cum", "u", "P", "A1", "A2", "V_eps", "jump", "kappa1", "kappa2", "residual",
    ]);
    let mut diagnostics = Table::new(&[
        "t", "E", "P", "A1", "A2", "V_eps", "jump", "kappa1", "kappa2", "u", "W1", "W2", "D",
    ]);
    for (i, (s, r)) in traj.states.iter().zip(&records).enumerate() {
        trajectory.row(&[
            s.t,
            s.h,
            s.g,
            r.E,
            traj.dissipation_cum[i],
            r.u,
            r.P,
            r.A1,
            r.A2,
            r.V_eps,
            r.jump,
            r.kappa1,
            r.kappa2,
            residual[i],
        ]);
        diagnostics.row(&[
            r.t, r.E, r.P, r.A1, r.A2, r.V_eps, r.jump, r.kappa1, r.kappa2, r.u, r.W1, r.W2, r.D,
        ]);
    }

    let e0 = records[0].E;
    let envelope = if k > 0.0 {
        Envelope::new(16.0 * e0, constants.eta)
    } else {
        Envelope::new(e0, 0.25)
    };
    let violations = records.iter().filter(|r| envelope.violated_by(r.t, r.E)).count();
    let (times, energy): (Vec<f64>, Vec<f64>) = records.iter().map(|r| (r.t, r.E)).unzip();
    let fit = decay_fit(&times, &energy, None).ok();
    let corridor_violations = records
        .iter()
        .zip(&traj.states)
        .filter(|(r, s)| !(-1.0 + r.kappa1 <= s.h && s.h <= 1.0 - r.kappa2))
        .count();
    let sandwich_violations = records
        .iter()
        .filter(|r| !(0.25 * r.E <= r.V_eps && r.V_eps <= 2.0 * r.E))
        .count();
    let h_star = if k == 0.0 {
        Some(h_star_estimate(&traj, 0.0)?)
    } else {
        None
    };
    let weak = max_weak_residual(&traj, &standard_family())?;

    let summary = json!({
        "config_sha256": sha256,
        "config": cfg.config(),
        "steps": cfg.steps(),
        "samples": traj.len(),
        "stability_constants": constants,
        "energy": {
            "initial": e0,
            "final": records.last().map(|r| r.E),
            "identity_residual_max": residual_max,
        },
        "decay": {
            "envelope": envelope,
            "violations": violations,
            "fitted_rate": fit.as_ref().map(|f| f.rate),
            "fit_window": fit.as_ref().map(|f| f.window),
            "verdict": verdict(violations == 0),
        },
        "corridor": {
            "violations": corridor_violations,
            "verdict": verdict(corridor_violations == 0),
        },
        "lyapunov": {
            "eps": constants.eps,
            "sandwich_violations": sandwich_violations,
            "verdict": verdict(sandwich_violations == 0),
        },
        "weak_residual_max": weak,
        "h_star": h_star,
    });

    let mut files = vec![
        ("trajectory.csv", trajectory.into_string()),
        ("diagnostics.csv", diagnostics.into_string()),
        ("summary.json", serde_json::to_string_pretty(&summary).expect("serializable") + "\n"),
    ];
    if plots {
        files.extend(render_plots(&records, &traj.states, envelope));
    }
    write_files(out, &files)?;

    let mut lines = vec![format!(
        "ran {} steps to t = {}; wrote {} samples to {}",
        cfg.steps(),
        traj.last().t,
        traj.len(),
        out.display()
    )];
    lines.push(format!(
        "decay envelope {}: {violations} violations{}",
        verdict(violations == 0),
        fit.map(|f| format!(", fitted rate {:.4}", f.rate)).unwrap_or_default()
    ));
    lines.push(format!("corridor {}: {corridor_violations} violations", verdict(corridor_violations == 0)));
    if let Some(h) = h_star {
        lines.push(format!("h* = {:.6} ({} violations)", h.h_star, h.violations));
    }
    Ok(lines)
}

fn render_plots(
    records: &[DiagnosticsRecord],
    states: &[burgers_fsi::State],
    envelope: Envelope,
) -> Vec<(&'static str, String)> {
    const MAX_POINTS: usize = 2000;
    let series = |f: &dyn Fn(&DiagnosticsRecord) -> f64| thin(records.iter().map(|r| (r.t, f(r))).collect(), MAX_POINTS);
    let energy = Chart {
        title: "energy and envelope",
        log_y: true,
        series: vec![
            Series { label: "E(t)", points: series(&|r| r.E) },
            Series { label: "envelope", points: series(&|r| envelope.at(r.t)) },
        ],
    };
    let position = Chart {
        title: "particle position and corridor",
        log_y: false,
        series: vec![
            Series {
                label: "h(t)",
                points: thin(states.iter().map(|s| (s.t, s.h)).collect(), MAX_POINTS),
            },
            Series { label: "-1 + kappa1", points: series(&|r| -1.0 + r.kappa1) },
            Series { label: "1 - kappa2", points: series(&|r| 1.0 - r.kappa2) },
        ],
    };
    let lyapunov = Chart {
        title: "perturbed Lyapunov function",
        log_y: true,
        series: vec![
            Series { label: "V_eps(t)", points: series(&|r| r.V_eps) },
            Series { label: "E(t)", points: series(&|r| r.E) },
        ],
    };
    vec![
        ("energy.svg", energy.render()),
        ("position.svg", position.render()),
        ("lyapunov.svg", lyapunov.render()),
    ]
}

fn study_table(study: &RefinementStudy) -> String {
    let mut t = Table::new(&["level", "n_cells", "dt", "error", "order"]);
    for (i, (&(n, dt), &e)) in study.levels.iter().zip(&study.errors).enumerate() {
        let order = i.checked_sub(1).map(|j| study.orders[j]).filter(|p| p.is_finite());
        t.row_partial(&[Some(i as f64), Some(n as f64), Some(dt), Some(e), order]);
    }
    t.into_string()
}

fn cmd_converge(
    config: &Path,
    out: &Path,
    levels: usize,
    refinement: Option<Refinement>,
) -> Result<Vec<String>, CliError> {
    if levels < 3 {
        return Err(CliError::Usage(format!("--levels must be at least 3, got {levels}")));
    }
    let LoadedConfig { cfg, sha256 } = load_config(config)?;
    let refinement = refinement.unwrap_or(match cfg.scheme {
        Scheme::CrankNicolsonPicard => Refinement::Diffusive,
        Scheme::SemiImplicitEuler => Refinement::Uniform,
    });
    let study = if cfg.forcing.is_some() {
        mms_study(&cfg, refinement, levels)?
    } else {
        self_convergence_study(&cfg, refinement, levels)?
    };
    let (status, order) = match convergence_order(&study) {
        Ok(p) => ("OK", Some(p)),
        Err(burgers_fsi::Error::DegenerateStudy(_)) => ("DEGENERATE", None),
        Err(e) => return Err(e.into()),
    };
    let summary = json!({
        "config_sha256": sha256,
        "refinement": refinement,
        "reference": if cfg.forcing.is_some() { "manufactured" } else { "next level" },
        "study": study,
        "observed_order": order,
        "status": status,
    });
    write_files(
        out,
        &[
            ("study.csv", study_table(&study)),
            ("study.json", serde_json::to_string_pretty(&summary).expect("serializable") + "\n"),
        ],
    )?;
    let mut lines: Vec<String> = study
        .levels
        .iter()
        .zip(&study.errors)
        .map(|(&(n, dt), e)| format!("n_cells = {n:>5}, dt = {dt:.3e}: error {e:.6e}"))
        .collect();
    lines.push(match order {
        Some(p) => format!("observed order {p:.4}"),
        None => "study DEGENERATE: an error is zero".into(),
    });
    Ok(lines)
}

fn cmd_bounds(
    config: &Path,
    out: &Path,
    t_max: Option<f64>,
    samples: usize,
    alpha: Option<f64>,
) -> Result<Vec<String>, CliError> {
    let LoadedConfig { cfg, .. } = load_config(config)?;
    let t_max = t_max.unwrap_or(cfg.t_final);
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(CliError::Usage(format!("--t-max must be finite and non-negative, got {t_max}")));
    }
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let q = initial_energy(&cfg)?;
    let corridor = Corridor::new(cfg.h0, cfg.k, q);
    let mut table = Table::new(&["t", "Q", "C", "kappa1", "kappa2", "alpha", "eps", "eta"]);
    for i in 0..samples {
        let t = t_max * i as f64 / (samples - 1) as f64;
        let (k1, k2) = corridor.kappas(t);
        let a = alpha.unwrap_or(k1.min(k2));
        let (eps, eta) = eps_eta(cfg.k, a).map_err(|e| CliError::Usage(e.to_string()))?;
        table.row(&[t, q, corridor.c, k1, k2, a, eps, eta]);
    }
    write_files(out, &[("bounds.csv", table.into_string())])?;
    let (k1, k2) = corridor.kappas(0.0);
    Ok(vec![format!(
        "Q = {q:.6e}, C = {:.6e}, kappa1(0) = {k1:.6e}, kappa2(0) = {k2:.6e}; {samples} rows on [0, {t_max}]",
        corridor.c
    )])
}

fn cmd_verify(out: &Path) -> Result<Vec<String>, CliError> {
    let reports = suite::run_all();
    let failed = reports.iter().filter(|r| !r.passed).count();
    let doc = serde_json::to_string_pretty(&reports).expect("serializable") + "\n";
    write_files(out, &[("verify.json", doc)])?;
    let lines: Vec<String> = reports.iter().map(ToString::to_string).collect();
    if failed > 0 {
        for l in &lines {
            eprintln!("{l}");
        }
        return Err(CliError::VerificationFailed {
            failed,
            total: reports.len(),
        });
    }
    Ok(lines)
}
