//! Fractional Adams-Bashforth-Moulton integrator for D^α x = A x + f(x),
//! working on the Volterra form x(t) = x0 + (1/Γ(α)) ∫₀ᵗ (t−s)^{α−1} F(x(s)) ds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{mat_vec, max_norm, SquareMatrix};
use crate::mittleff::{FracOrder, MatrixMl};
use crate::models::SystemModel;
use crate::special::gamma;
use crate::trajectory::{TimeGrid, Trajectory};

/// States with max-norm above this are reported as finite-time escape.
pub const BLOW_UP_GUARD: f64 = 1e8;

pub const DEFAULT_MEMORY_WINDOW: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub horizon: f64,
    pub step: f64,
    #[serde(default = "one")]
    pub corrector_sweeps: u32,
    #[serde(default = "yes")]
    pub dense_memory: bool,
    /// History length kept when `dense_memory` is false.
    #[serde(default = "default_window")]
    pub memory_window: usize,
}

fn one() -> u32 {
    1
}
fn yes() -> bool {
    true
}
fn default_window() -> usize {
    DEFAULT_MEMORY_WINDOW
}

impl SolverConfig {
    pub fn new(horizon: f64, step: f64) -> Result<Self> {
        let cfg = Self { horizon, step, corrector_sweeps: 1, dense_memory: true, memory_window: DEFAULT_MEMORY_WINDOW };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sweeps(mut self, sweeps: u32) -> Result<Self> {
        self.corrector_sweeps = sweeps;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.step > 0.0) || !(self.step < self.horizon) {
            return Err(Error::Config(format!("step must satisfy 0 < step < horizon, got {}", self.step)));
        }
        if !(1..=10).contains(&self.corrector_sweeps) {
            return Err(Error::Config(format!("corrector_sweeps must be in 1..=10, got {}", self.corrector_sweeps)));
        }
        if !self.dense_memory && self.memory_window < 2 {
            return Err(Error::Config("memory_window must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PcOutcome {
    /// Nodes up to and including the last one that passed the guard.
    pub trajectory: Trajectory,
    pub escape_time: Option<f64>,
}

/// Like [`solve_pc`] but returns the computed prefix when the guard trips.
pub fn solve_pc_partial(
    model: &SystemModel,
    x0: &[Complex64],
    alpha: FracOrder,
    cfg: &SolverConfig,
) -> Result<PcOutcome> {
    cfg.validate()?;
    let d = model.dim();
    if x0.len() != d {
        return Err(Error::Dimension(format!("x0 has dimension {}, model {d}", x0.len())));
    }
    let a = alpha.value();
    let grid = TimeGrid::with_step(cfg.horizon, cfg.step)?;
    let n_steps = grid.len() - 1;
    let h = grid.step().expect("uniform grid");
    let ha = h.powf(a);
    let pred_scale = ha / gamma(a + 1.0);
    let corr_scale = ha / gamma(a + 2.0);
    let window = if cfg.dense_memory { usize::MAX } else { cfg.memory_window };

    // b[m] = (m+1)^α − m^α, c[m] = (m+2)^{α+1} + m^{α+1} − 2(m+1)^{α+1}
    let b: Vec<f64> = (0..n_steps).map(|m| (m as f64 + 1.0).powf(a) - (m as f64).powf(a)).collect();
    let c: Vec<f64> = (0..n_steps)
        .map(|m| {
            let m = m as f64;
            (m + 2.0).powf(a + 1.0) + m.powf(a + 1.0) - 2.0 * (m + 1.0).powf(a + 1.0)
        })
        .collect();

    // history of F, stored component-major
    let mut hist: Vec<Vec<Complex64>> = vec![Vec::with_capacity(n_steps + 1); d];
    let mut values: Vec<Vec<Complex64>> = Vec::with_capacity(n_steps + 1);
    values.push(x0.to_vec());
    for (i, v) in model.rhs(x0).into_iter().enumerate() {
        hist[i].push(v);
    }

    let mut pred = vec![Complex64::new(0.0, 0.0); d];
    let mut base = vec![Complex64::new(0.0, 0.0); d];
    let mut escape_time = None;
    for n in 0..n_steps {
        // computing x_{n+1} from F_0..F_n
        let lo = (n + 1).saturating_sub(window);
        let a0 = {
            let nf = n as f64;
            nf.powf(a + 1.0) - (nf - a) * (nf + 1.0).powf(a)
        };
        for i in 0..d {
            let f = &hist[i];
            let mut sp = Complex64::new(0.0, 0.0);
            let mut sc = Complex64::new(0.0, 0.0);
            for j in lo..=n {
                sp += f[j] * b[n - j];
            }
            if lo == 0 {
                sc += f[0] * a0;
            }
            for j in lo.max(1)..=n {
                sc += f[j] * c[n - j];
            }
            pred[i] = x0[i] + sp * pred_scale;
            base[i] = x0[i] + sc * corr_scale;
        }
        let mut x = pred.clone();
        for _ in 0..cfg.corrector_sweeps {
            let fx = model.rhs(&x);
            for i in 0..d {
                x[i] = base[i] + fx[i] * corr_scale;
            }
        }
        let norm = max_norm(&x);
        if !(norm <= BLOW_UP_GUARD) {
            escape_time = Some(grid.nodes[n + 1]);
            break;
        }
        for (i, v) in model.rhs(&x).into_iter().enumerate() {
            hist[i].push(v);
        }
        values.push(x);
    }
    let kept = values.len();
    let nodes = grid.nodes[..kept].to_vec();
    let grid =
        if kept == grid.len() { grid } else { TimeGrid { horizon: nodes[kept - 1], nodes, scheme: grid.scheme } };
    let trajectory = Trajectory::new(grid, values)?;
    Ok(PcOutcome { trajectory, escape_time })
}

pub fn solve_pc(model: &SystemModel, x0: &[Complex64], alpha: FracOrder, cfg: &SolverConfig) -> Result<Trajectory> {
    let out = solve_pc_partial(model, x0, alpha, cfg)?;
    match out.escape_time {
        Some(time) => Err(Error::Escape { time }),
        None => Ok(out.trajectory),
    }
}

/// E_α(t^α A) x0 at the given nodes; α may be 1 here.
pub fn linear_solution(a: &SquareMatrix, x0: &[Complex64], alpha: f64, nodes: &[f64]) -> Result<Trajectory> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    if x0.len() != a.dim() {
        return Err(Error::Dimension(format!("x0 has dimension {}, matrix {}", x0.len(), a.dim())));
    }
    let grid = TimeGrid::from_nodes(nodes.to_vec())?;
    let e = MatrixMl::new(alpha, 1.0, a)?;
    let values = nodes
        .iter()
        .map(|&t| Ok(mat_vec(&e.eval(Complex64::new(t.powf(alpha), 0.0))?, x0)))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(grid, values)
}
