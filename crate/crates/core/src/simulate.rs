//! Trajectory simulation from a run configuration, and the Lotka-Volterra demo.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fodeint::{solve_pc_partial, SolverConfig};
use crate::linalg::max_norm;
use crate::mittleff::ml;
use crate::perron::{attractivity_probe, default_tol, lp_solve};
use crate::report::{analyze, Analysis, AnalysisReport, FeedbackConfig, FeedbackPreset, ModelKind, RunConfig, Scalar};
use crate::trajectory::Trajectory;

/// Imaginary parts above this are flagged for real systems.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;
pub const TAIL_FRACTION: f64 = 0.1;
pub const PICARD_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Pc,
    Perron,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub solver: SolverKind,
    pub horizon: f64,
    pub nodes: usize,
    pub escape_time: Option<f64>,
    pub initial_norm: f64,
    pub tail_sup: f64,
    pub decayed: bool,
    pub max_imag: f64,
    pub picard_iterations: Option<usize>,
    pub picard_residual: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    /// In original coordinates.
    pub trajectory: Trajectory,
    pub summary: SimulationSummary,
}

fn real_system(an: &Analysis) -> bool {
    an.model.a.matrix().iter().all(|z| z.im == 0.0)
}

pub fn simulate(cfg: &RunConfig, solver: SolverKind) -> Result<Simulation> {
    let an = analyze(cfg)?;
    simulate_with(&an, cfg, solver)
}

pub fn simulate_with(an: &Analysis, cfg: &RunConfig, solver: SolverKind) -> Result<Simulation> {
    let x0 = cfg.initial_state().ok_or_else(|| Error::Config("simulation needs 'x0'".into()))?;
    if x0.len() != an.model.dim() {
        return Err(Error::Dimension(format!("x0 has dimension {}, model {}", x0.len(), an.model.dim())));
    }
    let mut warnings = an.report.warnings.clone();
    let (trajectory, escape_time, picard) = match solver {
        SolverKind::Pc => {
            let out = solve_pc_partial(&an.model, &x0, cfg.order()?, &cfg.solver_config()?)?;
            (out.trajectory, out.escape_time, None)
        }
        SolverKind::Perron => {
            let ts = an
                .transformed
                .as_ref()
                .ok_or_else(|| Error::Config("the perron solver needs a sector-stable system".into()))?;
            let grid = cfg.time_grid()?;
            let y0 = ts.to_block(&x0);
            let sol = lp_solve(&y0, ts, &grid, default_tol(&y0), PICARD_MAX_ITER)?;
            let traj = sol.trajectory.map_states(|y| ts.to_original(y))?;
            (traj, None, Some((sol.iterations, sol.residual)))
        }
    };
    let probe = attractivity_probe(&trajectory, TAIL_FRACTION);
    let max_imag = trajectory.max_imag();
    let real_input = x0.iter().all(|z| z.im == 0.0) && real_system(an);
    if real_input && max_imag > IMAG_RESIDUE_TOL * trajectory.norm_sup.max(1.0) {
        warnings.push(format!("imaginary residue {max_imag:e} on a real system"));
    }
    let summary = SimulationSummary {
        solver,
        horizon: trajectory.grid.horizon,
        nodes: trajectory.grid.len(),
        escape_time,
        initial_norm: max_norm(&x0),
        tail_sup: probe.tail_sup,
        decayed: escape_time.is_none() && probe.decayed,
        max_imag,
        picard_iterations: picard.map(|p| p.0),
        picard_residual: picard.map(|p| p.1),
        warnings,
    };
    Ok(Simulation { trajectory, summary })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoOptions {
    pub h: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    /// Open-loop initial state.
    pub open_x0: [f64; 2],
    pub open_horizon: f64,
    pub closed_horizon: f64,
    pub step: f64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        Self {
            h: 1.0,
            r: 2.0,
            a: 1.0,
            b: 1.0,
            c: 1.0,
            alpha: 0.6,
            open_x0: [0.01, 0.0],
            open_horizon: 50.0,
            closed_horizon: 200.0,
            step: 1e-2,
        }
    }
}

impl DemoOptions {
    pub fn config(&self, closed: bool, x0: Option<[f64; 2]>, horizon: f64) -> Result<RunConfig> {
        let params = [("h", self.h), ("r", self.r), ("a", self.a), ("b", self.b), ("c", self.c)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Ok(RunConfig {
            model: ModelKind::LotkaVolterra,
            params,
            alpha: self.alpha,
            a: None,
            q: None,
            feedback: closed.then_some(FeedbackConfig::Preset(FeedbackPreset::Stabilizing)),
            x0: x0.map(|v| v.iter().map(|&x| Scalar::Real(x)).collect()),
            solver: Some(SolverConfig::new(horizon, self.step)?),
            grid: None,
            overrides: Default::default(),
            declared_structure: Vec::new(),
        })
    }
}

/// x₁(t) against the comparison solution E_α((h/2)t^α)x₁(0) while |x₁| < h/(2|a|).
#[derive(Debug, Clone, Serialize)]
pub struct GrowthCheck {
    pub small_ball_radius: f64,
    /// First node where |x₁| reaches the radius, if any.
    pub left_ball_at: Option<f64>,
    pub checked_nodes: usize,
    /// min over checked nodes of x₁(t) / (E_α((h/2)t^α) x₁(0)).
    pub min_ratio: f64,
    pub dominates: bool,
    pub exceeds_initial_norm: bool,
}

pub fn growth_check(traj: &Trajectory, alpha: f64, h: f64, a: f64) -> Result<GrowthCheck> {
    let radius = if a == 0.0 { f64::INFINITY } else { h / (2.0 * a.abs()) };
    let x10 = traj.values[0][0].re;
    let mut left_ball_at = None;
    let mut min_ratio = f64::INFINITY;
    let mut checked = 0;
    for (t, v) in traj.grid.nodes.iter().zip(&traj.values) {
        if v[0].norm() >= radius {
            left_ball_at = Some(*t);
            break;
        }
        let bound = ml(alpha, 1.0, Complex64::new(0.5 * h * t.powf(alpha), 0.0))?.re * x10;
        min_ratio = min_ratio.min(v[0].re / bound);
        checked += 1;
    }
    let init = max_norm(&traj.values[0]);
    Ok(GrowthCheck {
        small_ball_radius: radius,
        left_ball_at,
        checked_nodes: checked,
        min_ratio,
        dominates: checked > 1 && min_ratio >= 1.0,
        exceeds_initial_norm: traj.norm_sup > init,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopResult {
    pub analysis: AnalysisReport,
    pub simulation: SimulationSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthCheck>,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub options: DemoOptions,
    pub open_loop: LoopResult,
    pub closed_loop: LoopResult,
}

/// Real initial state along `direction` whose block coordinates have norm `target`.
pub fn scaled_initial_state(an: &Analysis, direction: &[f64], target: f64) -> Result<Vec<f64>> {
    let ts = an.transformed.as_ref().ok_or_else(|| Error::Config("system is not sector-stable".into()))?;
    let u: Vec<Complex64> = direction.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let n = max_norm(&ts.to_block(&u));
    if !(n > 0.0) {
        return Err(Error::Config("direction must be nonzero".into()));
    }
    Ok(direction.iter().map(|x| x * target / n).collect())
}

pub fn run_demo(opts: &DemoOptions) -> Result<DemoReport> {
    let open_cfg = opts.config(false, Some(opts.open_x0), opts.open_horizon)?;
    let open_an = analyze(&open_cfg)?;
    let open_sim = simulate_with(&open_an, &open_cfg, SolverKind::Pc)?;
    let growth = growth_check(&open_sim.trajectory, opts.alpha, opts.h, opts.a)?;

    let probe_cfg = opts.config(true, None, opts.closed_horizon)?;
    let closed_an = analyze(&probe_cfg)?;
    let r_star = closed_an
        .report
        .basin
        .as_ref()
        .map(|b| b.r_star)
        .ok_or_else(|| Error::Config("closed loop is not sector-stable".into()))?;
    let x0 = scaled_initial_state(&closed_an, &[1.0, 1.0], 0.5 * r_star)?;
    let closed_cfg = opts.config(true, Some([x0[0], x0[1]]), opts.closed_horizon)?;
    let closed_an = analyze(&closed_cfg)?;
    let closed_sim = simulate_with(&closed_an, &closed_cfg, SolverKind::Pc)?;

    Ok(DemoReport {
        options: opts.clone(),
        open_loop: LoopResult {
            analysis: open_an.report,
            simulation: open_sim.summary,
            growth: Some(growth),
            trajectory: open_sim.trajectory,
        },
        closed_loop: LoopResult {
            analysis: closed_an.report,
            simulation: closed_sim.summary,
            growth: None,
            trajectory: closed_sim.trajectory,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Verdict;

    #[test]
    fn zero_state_gives_zero_trajectory() {
        let opts = DemoOptions::default();
        let cfg = opts.config(true, Some([0.0, 0.0]), 5.0).unwrap();
        for kind in [SolverKind::Pc, SolverKind::Perron] {
            let sim = simulate(&cfg, kind).unwrap();
            assert_eq!(sim.trajectory.norm_sup, 0.0);
            assert!(sim.summary.decayed);
        }
    }

    #[test]
    fn perron_needs_stable_system() {
        let cfg = DemoOptions::default().config(false, Some([0.01, 0.0]), 5.0).unwrap();
        assert!(matches!(simulate(&cfg, SolverKind::Perron), Err(Error::Config(_))));
    }

    #[test]
    fn scaled_state_hits_target_norm() {
        let cfg = DemoOptions::default().config(true, None, 5.0).unwrap();
        let an = analyze(&cfg).unwrap();
        let x = scaled_initial_state(&an, &[1.0, -1.0], 1e-3).unwrap();
        let y = an.transformed.as_ref().unwrap().to_block(&[Complex64::new(x[0], 0.0), Complex64::new(x[1], 0.0)]);
        assert!((max_norm(&y) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn demo_with_overridden_h() {
        let opts = DemoOptions { h: 2.0, open_horizon: 5.0, closed_horizon: 5.0, ..Default::default() };
        let rep = run_demo(&opts).unwrap();
        assert_eq!(rep.open_loop.analysis.sector.verdict, Verdict::NotSectorStable);
        // K = (−4, 0) and the default r = 2 give a double eigenvalue −2 with a Jordan block
        let closed = &rep.closed_loop.analysis;
        assert_eq!(closed.sector.verdict, Verdict::LinearlyAsymptoticallyStable);
        assert_eq!(closed.spectrum.eigenvalues.len(), 1);
        assert_eq!(closed.spectrum.eigenvalues[0].multiplicity, 2);
        assert!((closed.spectrum.eigenvalues[0].value + 2.0).norm() < 1e-10);
        assert!(closed.block_form.as_ref().unwrap().has_nilpotent());
        assert!(closed.basin.as_ref().unwrap().r_star > 0.0);
    }
}
