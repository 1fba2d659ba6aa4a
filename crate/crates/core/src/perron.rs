//! Lyapunov-Perron operator on a finite time grid:
//!
//! (T_x ξ)_i(t) = E_α(λ_i t^α) x_i + ∫₀ᵗ (t−τ)^{α−1} E_{α,α}(λ_i (t−τ)^α) h_i(ξ(τ)) dτ
//!
//! with h ∘ ξ interpolated linearly between nodes and integrated exactly
//! against the kernel through K1(s) = s^α E_{α,α+1}(λs^α) and
//! K2(s) = s^{α+1} E_{α,α+2}(λs^α), the first two antiderivatives of the kernel.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::max_norm;
use crate::mittleff::ml;
use crate::spectra::TransformedSystem;
use crate::trajectory::{GridScheme, TimeGrid, Trajectory};

const C0: Complex64 = Complex64::new(0.0, 0.0);

enum Weights {
    /// k1[m] = K1(mΔ), d2[m] = (K2(mΔ) − K2((m−1)Δ))/Δ for m ≥ 1.
    Uniform { k1: Vec<Complex64>, d2: Vec<Complex64> },
    /// Row n holds (A, B) weights of g_j and g_{j+1} for every interval j < n.
    General { rows: Vec<Vec<(Complex64, Complex64)>> },
}

struct KernelTable {
    lambda: Complex64,
    /// E_α(λ t_n^α)
    free: Vec<Complex64>,
    weights: Weights,
}

fn k1(alpha: f64, lambda: Complex64, s: f64) -> Result<Complex64> {
    if s == 0.0 {
        return Ok(C0);
    }
    let sa = s.powf(alpha);
    Ok(ml(alpha, alpha + 1.0, lambda * sa)? * sa)
}

fn k2(alpha: f64, lambda: Complex64, s: f64) -> Result<Complex64> {
    if s == 0.0 {
        return Ok(C0);
    }
    let sa = s.powf(alpha);
    Ok(ml(alpha, alpha + 2.0, lambda * sa)? * (sa * s))
}

impl KernelTable {
    fn build(alpha: f64, lambda: Complex64, grid: &TimeGrid) -> Result<Self> {
        let nodes = &grid.nodes;
        let free = nodes.iter().map(|&t| ml(alpha, 1.0, lambda * t.powf(alpha))).collect::<Result<Vec<_>>>()?;
        let weights = match grid.step() {
            Some(h) => {
                let n = nodes.len();
                let k1v = (0..n).map(|m| k1(alpha, lambda, m as f64 * h)).collect::<Result<Vec<_>>>()?;
                let k2v = (0..n).map(|m| k2(alpha, lambda, m as f64 * h)).collect::<Result<Vec<_>>>()?;
                let mut d2 = vec![C0; n];
                for m in 1..n {
                    d2[m] = (k2v[m] - k2v[m - 1]) / h;
                }
                Weights::Uniform { k1: k1v, d2 }
            }
            None => {
                let mut rows = Vec::with_capacity(nodes.len());
                for (n, &tn) in nodes.iter().enumerate() {
                    let mut row = Vec::with_capacity(n);
                    for j in 0..n {
                        let (a, b) = (tn - nodes[j + 1], tn - nodes[j]);
                        let dt = nodes[j + 1] - nodes[j];
                        let (k1a, k1b) = (k1(alpha, lambda, a)?, k1(alpha, lambda, b)?);
                        let d = (k2(alpha, lambda, b)? - k2(alpha, lambda, a)?) / dt;
                        row.push((k1b - d, d - k1a));
                    }
                    rows.push(row);
                }
                Weights::General { rows }
            }
        };
        Ok(Self { lambda, free, weights })
    }

    /// ∫₀^{t_n} kernel(t_n − τ) g(τ) dτ for piecewise-linear g with nodal values `g`.
    fn convolve(&self, g: &[Complex64], n: usize) -> Complex64 {
        let mut acc = C0;
        match &self.weights {
            Weights::Uniform { k1, d2 } => {
                for j in 0..n {
                    let m = n - j;
                    acc += (k1[m] - d2[m]) * g[j] + (d2[m] - k1[m - 1]) * g[j + 1];
                }
            }
            Weights::General { rows } => {
                for (j, &(a, b)) in rows[n].iter().enumerate() {
                    acc += a * g[j] + b * g[j + 1];
                }
            }
        }
        acc
    }
}

/// T_x for a fixed transformed system and grid, with kernel weights precomputed.
pub struct LyapunovPerron<'a> {
    ts: &'a TransformedSystem,
    grid: TimeGrid,
    tables: Vec<KernelTable>,
    /// coordinate → table index
    coord_table: Vec<usize>,
}

impl<'a> LyapunovPerron<'a> {
    pub fn new(ts: &'a TransformedSystem, grid: TimeGrid) -> Result<Self> {
        if grid.nodes.first() != Some(&0.0) || grid.len() < 2 {
            return Err(Error::Dimension("Lyapunov-Perron grid must start at 0 and have ≥ 2 nodes".into()));
        }
        let alpha = ts.alpha.value();
        let mut tables: Vec<KernelTable> = Vec::new();
        let mut coord_table = Vec::with_capacity(ts.dim());
        for lambda in ts.diagonal() {
            let idx = match tables.iter().position(|t| t.lambda == lambda) {
                Some(i) => i,
                None => {
                    tables.push(KernelTable::build(alpha, lambda, &grid)?);
                    tables.len() - 1
                }
            };
            coord_table.push(idx);
        }
        Ok(Self { ts, grid, tables, coord_table })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// E_α(λ_i t^α) x_i on every node.
    pub fn linear_part(&self, x: &[Complex64]) -> Result<Trajectory> {
        self.check_state(x)?;
        let values = (0..self.grid.len())
            .map(|n| x.iter().enumerate().map(|(i, &xi)| self.tables[self.coord_table[i]].free[n] * xi).collect())
            .collect();
        Trajectory::new(self.grid.clone(), values)
    }

    pub fn apply(&self, x: &[Complex64], xi: &Trajectory) -> Result<Trajectory> {
        self.check_state(x)?;
        if xi.grid.len() != self.grid.len() || xi.dim() != x.len() {
            return Err(Error::Dimension("trajectory does not match the operator's grid or dimension".into()));
        }
        let d = x.len();
        let hv: Vec<Vec<Complex64>> = xi.values.iter().map(|v| self.ts.h(v)).collect();
        let mut comp = vec![C0; self.grid.len()];
        let mut values = vec![vec![C0; d]; self.grid.len()];
        for i in 0..d {
            for (c, h) in comp.iter_mut().zip(&hv) {
                *c = h[i];
            }
            let table = &self.tables[self.coord_table[i]];
            for (n, row) in values.iter_mut().enumerate() {
                row[i] = table.free[n] * x[i] + table.convolve(&comp, n);
            }
        }
        Trajectory::new(self.grid.clone(), values)
    }

    fn check_state(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.ts.dim() {
            return Err(Error::Dimension(format!("state has dimension {}, system {}", x.len(), self.ts.dim())));
        }
        Ok(())
    }
}

/// One application of T_x (builds the kernel tables; prefer [`LyapunovPerron`] for repeated use).
pub fn lp_apply(x: &[Complex64], xi: &Trajectory, ts: &TransformedSystem) -> Result<Trajectory> {
    LyapunovPerron::new(ts, xi.grid.clone())?.apply(x, xi)
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub trajectory: Trajectory,
    /// Picard updates that moved the iterate by more than the tolerance.
    pub iterations: usize,
    /// sup-norm of the last update.
    pub residual: f64,
    /// ||ξ_{k+1} − ξ_k|| / ||ξ_k − ξ_{k−1}|| for k = 1, 2, …
    pub ratios: Vec<f64>,
}

/// 10⁻⁸ · max(1, ||x||).
pub fn default_tol(x: &[Complex64]) -> f64 {
    1e-8 * max_norm(x).max(1.0)
}

fn constant(grid: &TimeGrid, x: &[Complex64]) -> Result<Trajectory> {
    Trajectory::new(grid.clone(), vec![x.to_vec(); grid.len()])
}

pub fn lp_solve(
    x: &[Complex64],
    ts: &TransformedSystem,
    grid: &TimeGrid,
    tol: f64,
    max_iter: usize,
) -> Result<LpSolution> {
    let op = LyapunovPerron::new(ts, grid.clone())?;
    lp_solve_with(&op, x, tol, max_iter)
}

pub fn lp_solve_with(op: &LyapunovPerron<'_>, x: &[Complex64], tol: f64, max_iter: usize) -> Result<LpSolution> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let mut xi = constant(op.grid(), x)?;
    let mut ratios = Vec::new();
    let mut prev_diff = f64::NAN;
    for k in 0..max_iter {
        let next = op.apply(x, &xi)?;
        let diff = next.sup_diff(&xi)?;
        if k > 0 && prev_diff > 0.0 {
            ratios.push(diff / prev_diff);
        }
        xi = next;
        if diff <= tol {
            return Ok(LpSolution { trajectory: xi, iterations: k, residual: diff, ratios });
        }
        prev_diff = diff;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: prev_diff,
        ratio: ratios.last().copied().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AttractivityProbe {
    pub decayed: bool,
    pub tail_sup: f64,
    pub initial_norm: f64,
}

/// Max norm over nodes with t ≥ (1 − tail_fraction)·horizon; decayed when below 0.2·||x(0)||.
pub fn attractivity_probe(traj: &Trajectory, tail_fraction: f64) -> AttractivityProbe {
    let start = (1.0 - tail_fraction.clamp(0.0, 1.0)) * traj.grid.horizon;
    let tail_sup = traj
        .grid
        .nodes
        .iter()
        .zip(&traj.values)
        .filter(|(t, _)| **t >= start)
        .map(|(_, v)| max_norm(v))
        .fold(0.0, f64::max);
    let initial_norm = traj.values.first().map_or(0.0, |v| max_norm(v));
    let decayed = if initial_norm == 0.0 { tail_sup == 0.0 } else { tail_sup < 0.2 * initial_norm };
    AttractivityProbe { decayed, tail_sup, initial_norm }
}

/// Uniform grids get O(N) kernel evaluations per eigenvalue; other grids need O(N²).
pub fn weight_evaluations(grid: &TimeGrid) -> usize {
    match grid.scheme {
        GridScheme::Uniform => 3 * grid.len(),
        _ => grid.len() * grid.len() * 2 + grid.len(),
    }
}
