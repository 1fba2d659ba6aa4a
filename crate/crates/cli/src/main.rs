use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fracstab::mittleff::{ml_contour, ml_eval, ContourSpec, MlQuery};
use fracstab::report::{analyze, to_canonical_json, RunConfig};
use fracstab::simulate::{run_demo, simulate_with, DemoOptions, SolverKind};
use fracstab::trajectory::write_atomic;
use fracstab::{Complex64, Error};

#[derive(Parser)]
#[command(name = "fracstab", version, about = "Stability analysis for fractional-order systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Pc,
    Perron,
}

#[derive(Subcommand)]
enum Command {
    /// Sector test, decay constants and basin certificate as JSON (exit 2 when not sector-stable).
    Analyze { config: PathBuf },
    /// Integrate from the config's x0 and write the trajectory as CSV (exit 3 on escape).
    Simulate {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "pc")]
        solver: Solver,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate E_{alpha,beta}(z).
    #[command(allow_negative_numbers = true)]
    Ml {
        alpha: f64,
        beta: f64,
        z_re: f64,
        z_im: f64,
        /// Use the contour integral over γ(EPSILON, THETA) instead of automatic routing.
        #[arg(long, num_args = 2, value_names = ["EPSILON", "THETA"])]
        contour: Option<Vec<f64>>,
    },
    /// Open- and closed-loop Lotka-Volterra runs side by side.
    DemoLotka {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}

fn cmd_analyze(path: &Path) -> Result<ExitCode, Error> {
    let cfg = RunConfig::load(path)?;
    let an = analyze(&cfg)?;
    print!("{}", an.report.to_json());
    for w in &an.report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(if an.report.is_stable() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_simulate(path: &Path, solver: Solver, out: &Path) -> Result<ExitCode, Error> {
    let cfg = RunConfig::load(path)?;
    let an = analyze(&cfg)?;
    let kind = match solver {
        Solver::Pc => SolverKind::Pc,
        Solver::Perron => SolverKind::Perron,
    };
    let sim = simulate_with(&an, &cfg, kind)?;
    for w in &sim.summary.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(t) = sim.summary.escape_time {
        eprintln!("escape: state norm exceeded the blow-up guard at t = {t}");
        return Ok(ExitCode::from(3));
    }
    sim.trajectory.write_csv(out)?;
    println!(
        "solver={} nodes={} tail_sup={:.16e} decayed={}",
        match kind {
            SolverKind::Pc => "pc",
            SolverKind::Perron => "perron",
        },
        sim.summary.nodes,
        sim.summary.tail_sup,
        sim.summary.decayed
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_ml(alpha: f64, beta: f64, z: Complex64, contour: Option<Vec<f64>>) -> Result<ExitCode, Error> {
    let q = MlQuery::new(alpha, beta, z)?;
    let out = match contour {
        Some(c) => {
            let spec = ContourSpec::new(alpha, c[0], c[1])?;
            serde_json::json!({
                "alpha": alpha, "beta": beta, "z": z,
                "value": ml_contour(&q, &spec)?, "method": "contour", "contour": spec,
            })
        }
        None => {
            let v = ml_eval(&q)?;
            serde_json::json!({
                "alpha": alpha, "beta": beta, "z": z,
                "value": v.value, "method": v.method, "error_estimate": v.error_estimate,
            })
        }
    };
    print!("{}", to_canonical_json(&out));
    Ok(ExitCode::SUCCESS)
}

fn cmd_demo(out_dir: &Path, opts: DemoOptions) -> Result<ExitCode, Error> {
    std::fs::create_dir_all(out_dir)?;
    let rep = run_demo(&opts)?;
    rep.open_loop.trajectory.write_csv(&out_dir.join("open_loop.csv"))?;
    rep.closed_loop.trajectory.write_csv(&out_dir.join("closed_loop.csv"))?;
    write_atomic(&out_dir.join("demo_report.json"), to_canonical_json(&rep).as_bytes())?;

    let verdict = |r: &fracstab::report::AnalysisReport| if r.is_stable() { "stable" } else { "not-sector-stable" };
    let eigs = |r: &fracstab::report::AnalysisReport| {
        r.spectrum
            .eigenvalues
            .iter()
            .map(|e| {
                format!("{:.6}", e.value.re)
                    + &if e.multiplicity > 1 { format!(" (x{})", e.multiplicity) } else { String::new() }
            })
            .collect::<Vec<_>>()
            .join(", ")
    };
    let (o, c) = (&rep.open_loop, &rep.closed_loop);
    println!("{:<22}{:<28}closed loop", "", "open loop");
    println!("{:<22}{:<28}{}", "eigenvalues", eigs(&o.analysis), eigs(&c.analysis));
    println!("{:<22}{:<28}{}", "verdict", verdict(&o.analysis), verdict(&c.analysis));
    let r_star = c.analysis.basin.as_ref().map_or(String::from("-"), |b| format!("{:.6e}", b.r_star));
    println!("{:<22}{:<28}{}", "r_star", "-", r_star);
    let evidence_open = match (o.simulation.escape_time, &o.growth) {
        (Some(t), _) => format!("escape at t = {t}"),
        (None, Some(g)) if g.exceeds_initial_norm => "grows past ||x0||".to_string(),
        _ => "no growth observed".to_string(),
    };
    let evidence_closed = if c.simulation.decayed {
        format!("decayed, tail_sup = {:.3e}", c.simulation.tail_sup)
    } else {
        format!("not decayed, tail_sup = {:.3e}", c.simulation.tail_sup)
    };
    println!("{:<22}{:<28}{}", "simulation", evidence_open, evidence_closed);
    if let Some(g) = &o.growth {
        println!(
            "open-loop x1 vs E_alpha((h/2)t^alpha)x1(0) while |x1| < {}: {} (min ratio {:.6})",
            g.small_ball_radius,
            if g.dominates { "dominates" } else { "does not dominate" },
            g.min_ratio
        );
    }
    println!("wrote {}", out_dir.join("demo_report.json").display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Analyze { config } => cmd_analyze(&config),
        Command::Simulate { config, solver, out } => cmd_simulate(&config, solver, &out),
        Command::Ml { alpha, beta, z_re, z_im, contour } => cmd_ml(alpha, beta, Complex64::new(z_re, z_im), contour),
        Command::DemoLotka { out_dir, h, r, alpha, step } => {
            let d = DemoOptions::default();
            let opts = DemoOptions {
                h: h.unwrap_or(d.h),
                r: r.unwrap_or(d.r),
                alpha: alpha.unwrap_or(d.alpha),
                step: step.unwrap_or(d.step),
                ..d
            };
            cmd_demo(&out_dir, opts)
        }
    };
    res.unwrap_or_else(|e| fail(&e))
}
