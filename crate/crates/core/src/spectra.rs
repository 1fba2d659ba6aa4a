//! Spectrum of A, the sector test |arg λ| > απ/2, and the similarity
//! y = (TP)⁻¹x that brings A to blockdiag(λ_i + δ_i N).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::LipschitzModulus;
use crate::error::{domain, Error, Result};
use crate::linalg::{
    cluster_eigenvalues, inverse, jordan_decompose, mat_vec, null_space, op_norm, schur_eigenvalues, CMatrix,
    DeclaredCluster, SquareMatrix, CLUSTER_RTOL,
};
use crate::mittleff::FracOrder;
use crate::models::{SystemModel, VectorField};

/// Residual bound for computed eigenpairs, relative to ||A||.
pub const EIGEN_RESIDUAL_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Eigenvalue {
    pub value: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    /// ||A|| in the max-row-sum norm.
    pub scale: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    /// Build from raw values, clustering at the default tolerance.
    pub fn from_values(values: &[Complex64]) -> Self {
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let eigenvalues = cluster_eigenvalues(values, CLUSTER_RTOL * scale.max(f64::MIN_POSITIVE))
            .into_iter()
            .map(|c| Eigenvalue { value: c.value, multiplicity: c.multiplicity })
            .collect();
        Self { eigenvalues, scale }
    }
}

/// Eigenvalues with algebraic multiplicities.
pub fn eigenvalues(a: &SquareMatrix) -> Result<Spectrum> {
    let m = a.matrix();
    let scale = a.max_norm();
    let raw = schur_eigenvalues(m)?;
    let clusters = cluster_eigenvalues(&raw, CLUSTER_RTOL * scale.max(f64::MIN_POSITIVE));
    let d = a.dim();
    for c in clusters.iter().filter(|c| c.multiplicity == 1) {
        let shifted = m - CMatrix::identity(d, d) * c.value;
        let (v, _) = null_space(&shifted, 1);
        let v: Vec<Complex64> = v.column(0).iter().copied().collect();
        let av = mat_vec(m, &v);
        let vn = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let res = av.iter().zip(&v).map(|(x, y)| (x - c.value * y).norm()).fold(0.0, f64::max) / vn;
        if !(res <= EIGEN_RESIDUAL_RTOL * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::EigenNonConvergence { dim: d });
        }
    }
    Ok(Spectrum {
        eigenvalues: clusters
            .into_iter()
            .map(|c| Eigenvalue { value: c.value, multiplicity: c.multiplicity })
            .collect(),
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    LinearlyAsymptoticallyStable,
    NotSectorStable,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenMargin {
    pub lambda: Complex64,
    /// |arg λ| − απ/2; `None` for λ = 0.
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub alpha: FracOrder,
    pub per_eigenvalue: Vec<EigenMargin>,
    pub verdict: Verdict,
}

impl SectorReport {
    pub fn is_stable(&self) -> bool {
        self.verdict == Verdict::LinearlyAsymptoticallyStable
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.per_eigenvalue.iter().filter_map(|e| e.margin).reduce(f64::min)
    }
}

pub fn sector_test(spec: &Spectrum, alpha: FracOrder) -> SectorReport {
    let half = 0.5 * alpha.value() * PI;
    let per_eigenvalue: Vec<EigenMargin> = spec
        .eigenvalues
        .iter()
        .map(|e| EigenMargin {
            lambda: e.value,
            margin: if e.value == Complex64::new(0.0, 0.0) { None } else { Some(e.value.arg().abs() - half) },
        })
        .collect();
    let stable = !per_eigenvalue.is_empty() && per_eigenvalue.iter().all(|e| matches!(e.margin, Some(m) if m > 0.0));
    SectorReport {
        alpha,
        per_eigenvalue,
        verdict: if stable { Verdict::LinearlyAsymptoticallyStable } else { Verdict::NotSectorStable },
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct BlockSpec {
    pub lambda: Complex64,
    pub size: usize,
    /// 1 if the block carries a nilpotent part.
    pub eta: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockForm {
    #[serde(skip)]
    pub t: CMatrix,
    /// Diagonal of P: (1, δ, …, δ^{d_i − 1}) per block.
    pub p: Vec<f64>,
    pub blocks: Vec<BlockSpec>,
    pub delta: f64,
    #[serde(skip)]
    pub tp: CMatrix,
    #[serde(skip)]
    pub tp_inv: CMatrix,
    pub residual: f64,
    /// ||TP|| · ||(TP)⁻¹|| in the max-row-sum norm.
    pub cond: f64,
}

impl BlockForm {
    /// blockdiag(λ_i id + δ_i N).
    pub fn target(&self) -> CMatrix {
        let d = self.t.nrows();
        let mut j = CMatrix::zeros(d, d);
        let mut off = 0;
        for b in &self.blocks {
            for i in 0..b.size {
                j[(off + i, off + i)] = b.lambda;
                if i + 1 < b.size {
                    j[(off + i, off + i + 1)] = Complex64::new(self.delta, 0.0);
                }
            }
            off += b.size;
        }
        j
    }

    /// Eigenvalue of each coordinate in block order.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|b| std::iter::repeat_n(b.lambda, b.size)).collect()
    }

    pub fn has_nilpotent(&self) -> bool {
        self.blocks.iter().any(|b| b.eta == 1)
    }
}

/// Block form with automatically detected Jordan structure.
pub fn block_form(a: &SquareMatrix, delta: f64) -> Result<BlockForm> {
    block_form_declared(a, delta, &[])
}

/// Block form with caller-declared Jordan structure for the listed eigenvalues.
pub fn block_form_declared(a: &SquareMatrix, delta: f64, declared: &[DeclaredCluster]) -> Result<BlockForm> {
    if !(delta > 0.0) || !delta.is_finite() {
        return domain(format!("delta must be positive, got {delta}"));
    }
    let dec = jordan_decompose(a.matrix(), declared)?;
    let d = a.dim();
    let mut p = Vec::with_capacity(d);
    let mut blocks = Vec::with_capacity(dec.blocks.len());
    for b in &dec.blocks {
        let mut s = 1.0;
        for _ in 0..b.size {
            p.push(s);
            s *= delta;
        }
        blocks.push(BlockSpec { lambda: b.lambda, size: b.size, eta: u8::from(b.size > 1) });
    }
    let mut tp = dec.t.clone();
    for (j, &pj) in p.iter().enumerate() {
        tp.column_mut(j).scale_mut(pj);
    }
    let tp_inv = inverse(&tp)?;
    let cond = op_norm(&tp) * op_norm(&tp_inv);
    let mut bf = BlockForm { t: dec.t, p, blocks, delta, tp, tp_inv, residual: 0.0, cond };
    let transformed = &bf.tp_inv * a.matrix() * &bf.tp;
    bf.residual = (transformed - bf.target()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let tol = 1e-8 * cond * a.max_norm().max(f64::MIN_POSITIVE);
    if !(bf.residual <= tol) {
        return Err(Error::SimilarityResidual { residual: bf.residual, tolerance: tol });
    }
    Ok(bf)
}

/// The system D^α y = diag(λ_i) y + h(y) in block coordinates y = (TP)⁻¹x.
#[derive(Clone)]
pub struct TransformedSystem {
    pub alpha: FracOrder,
    pub blocks: Vec<BlockSpec>,
    pub delta: f64,
    pub tp: CMatrix,
    pub tp_inv: CMatrix,
    pub ell_h: LipschitzModulus,
    f: VectorField,
}

impl std::fmt::Debug for TransformedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformedSystem")
            .field("alpha", &self.alpha)
            .field("blocks", &self.blocks)
            .field("delta", &self.delta)
            .field("ell_h", &self.ell_h)
            .finish_non_exhaustive()
    }
}

impl TransformedSystem {
    pub fn dim(&self) -> usize {
        self.tp.nrows()
    }

    /// Eigenvalue of each coordinate in block order.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|b| std::iter::repeat_n(b.lambda, b.size)).collect()
    }

    /// h(y) = blockdiag(δ_i N) y + (TP)⁻¹ f(TP y).
    pub fn h(&self, y: &[Complex64]) -> Vec<Complex64> {
        let x = mat_vec(&self.tp, y);
        let fx = (self.f)(&x);
        let mut out = mat_vec(&self.tp_inv, &fx);
        let mut off = 0;
        for b in &self.blocks {
            for i in 0..b.size.saturating_sub(1) {
                out[off + i] += y[off + i + 1] * self.delta;
            }
            off += b.size;
        }
        out
    }

    pub fn to_block(&self, x: &[Complex64]) -> Vec<Complex64> {
        mat_vec(&self.tp_inv, x)
    }

    pub fn to_original(&self, y: &[Complex64]) -> Vec<Complex64> {
        mat_vec(&self.tp, y)
    }

    pub fn tp_norm(&self) -> f64 {
        op_norm(&self.tp)
    }

    pub fn tp_inv_norm(&self) -> f64 {
        op_norm(&self.tp_inv)
    }
}

/// ℓ_h(r) ≤ δ·[nilpotent] + ||(TP)⁻¹|| · ℓ_f(||TP|| r) · ||TP||.
pub fn transform_system(model: &SystemModel, bf: &BlockForm, alpha: FracOrder) -> Result<TransformedSystem> {
    if model.dim() != bf.tp.nrows() {
        return Err(Error::Dimension(format!("model has dimension {}, block form {}", model.dim(), bf.tp.nrows())));
    }
    let n = op_norm(&bf.tp);
    let n_inv = op_norm(&bf.tp_inv);
    let floor = if bf.has_nilpotent() { bf.delta } else { 0.0 };
    let ell_h = model.ell_f.compose(floor, n_inv * n, n);
    Ok(TransformedSystem {
        alpha,
        blocks: bf.blocks.clone(),
        delta: bf.delta,
        tp: bf.tp.clone(),
        tp_inv: bf.tp_inv.clone(),
        ell_h,
        f: Arc::clone(&model.f),
    })
}
