//! Concrete systems D^α x = A x + f(x) with analytic Lipschitz moduli.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::LipschitzModulus;
use crate::error::{domain, Error, Result};
use crate::linalg::{mat_vec, max_norm, CMatrix, SquareMatrix};

pub type VectorField = Arc<dyn Fn(&[Complex64]) -> Vec<Complex64> + Send + Sync>;

/// Seed for Monte-Carlo checks: `FRACSTAB_SEED`, default 42.
pub fn seed_from_env() -> u64 {
    std::env::var("FRACSTAB_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(42)
}

#[derive(Clone)]
pub struct SystemModel {
    pub name: String,
    pub a: SquareMatrix,
    pub f: VectorField,
    pub ell_f: LipschitzModulus,
    pub params: Vec<(String, f64)>,
}

impl std::fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemModel")
            .field("name", &self.name)
            .field("a", &self.a)
            .field("ell_f", &self.ell_f)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl SystemModel {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn eval_f(&self, x: &[Complex64]) -> Vec<Complex64> {
        (self.f)(x)
    }

    /// A x + f(x).
    pub fn rhs(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = mat_vec(self.a.matrix(), x);
        for (o, v) in out.iter_mut().zip((self.f)(x)) {
            *o += v;
        }
        out
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

/// f ≡ 0.
pub fn linear_model(a: SquareMatrix) -> SystemModel {
    let d = a.dim();
    SystemModel {
        name: "linear".into(),
        a,
        f: Arc::new(move |_| vec![Complex64::new(0.0, 0.0); d]),
        ell_f: LipschitzModulus::Zero,
        params: Vec::new(),
    }
}

/// A = [[h, 0], [0, −r]], f(x) = (a x₁² + b x₁x₂, c x₁x₂).
pub fn lotka_volterra(h: f64, r: f64, a: f64, b: f64, c: f64) -> Result<SystemModel> {
    if !(h > 0.0) || !(r > 0.0) || !h.is_finite() || !r.is_finite() {
        return domain(format!("h and r must be positive, got h = {h}, r = {r}"));
    }
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return domain("a, b, c must be finite");
    }
    let kappa = (2.0 * a.abs() + 2.0 * b.abs()).max(2.0 * c.abs());
    Ok(SystemModel {
        name: "lotka-volterra".into(),
        a: SquareMatrix::from_real_rows(&[&[h, 0.0], &[0.0, -r]])?,
        f: Arc::new(move |x| vec![x[0] * x[0] * a + x[0] * x[1] * b, x[0] * x[1] * c]),
        ell_f: if kappa == 0.0 { LipschitzModulus::Zero } else { LipschitzModulus::Linear { kappa } },
        params: vec![("h".into(), h), ("r".into(), r), ("a".into(), a), ("b".into(), b), ("c".into(), c)],
    })
}

/// Linear state feedback u = K x entering through B.
#[derive(Debug, Clone)]
pub struct FeedbackSpec {
    /// d × m
    pub b: CMatrix,
    /// m × d
    pub k: CMatrix,
}

impl FeedbackSpec {
    pub fn from_real(b: &[f64], k: &[f64], m: usize) -> Result<Self> {
        if m == 0 || !b.len().is_multiple_of(m) || !k.len().is_multiple_of(m) || b.len() / m != k.len() / m {
            return Err(Error::Dimension(format!(
                "B ({} entries) and K ({} entries) are not d×{m} and {m}×d",
                b.len(),
                k.len()
            )));
        }
        let d = b.len() / m;
        let cx = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        Ok(Self { b: CMatrix::from_row_slice(d, m, &cx(b)), k: CMatrix::from_row_slice(m, d, &cx(k)) })
    }
}

/// B = (1, 1)ᵀ, K = (−2h, 0), which places the closed-loop eigenvalues at −h and −r.
pub fn stabilizing_feedback(h: f64) -> FeedbackSpec {
    FeedbackSpec::from_real(&[1.0, 1.0], &[-2.0 * h, 0.0], 1).expect("fixed shapes")
}

/// Same f, A′ = A + B K.
pub fn closed_loop(m: &SystemModel, fb: &FeedbackSpec) -> Result<SystemModel> {
    let d = m.dim();
    if fb.b.nrows() != d || fb.k.ncols() != d || fb.b.ncols() != fb.k.nrows() {
        return Err(Error::Dimension(format!(
            "feedback B is {}x{}, K is {}x{}, system dimension {d}",
            fb.b.nrows(),
            fb.b.ncols(),
            fb.k.nrows(),
            fb.k.ncols()
        )));
    }
    let a = SquareMatrix::new(m.a.matrix() + &fb.b * &fb.k)?;
    Ok(SystemModel {
        name: format!("{}-closed-loop", m.name),
        a,
        f: Arc::clone(&m.f),
        ell_f: m.ell_f.clone(),
        params: m.params.clone(),
    })
}

/// f_i(x) = Σ_{j ≤ k} q[i][j][k] x_j x_k. Entries below the diagonal (j > k) must be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadraticCoefficients(pub Vec<Vec<Vec<f64>>>);

pub fn quadratic_model(a: SquareMatrix, q: &QuadraticCoefficients) -> Result<SystemModel> {
    let d = a.dim();
    let tables = &q.0;
    if tables.len() != d {
        return Err(Error::Config(format!("expected {d} coefficient tables, got {}", tables.len())));
    }
    let mut terms: Vec<Vec<(usize, usize, f64)>> = Vec::with_capacity(d);
    let mut kappa: f64 = 0.0;
    for (i, t) in tables.iter().enumerate() {
        if t.len() != d || t.iter().any(|row| row.len() != d) {
            return Err(Error::Config(format!("coefficient table {i} is not {d}x{d}")));
        }
        let mut row_terms = Vec::new();
        let mut row_sum = 0.0;
        for (j, row) in t.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Config(format!("coefficient q[{i}][{j}][{k}] is not finite")));
                }
                if j > k && v != 0.0 {
                    return Err(Error::Config(format!("coefficient q[{i}][{j}][{k}] lies below the diagonal")));
                }
                if v != 0.0 {
                    row_terms.push((j, k, v));
                    row_sum += v.abs();
                }
            }
        }
        kappa = kappa.max(2.0 * row_sum);
        terms.push(row_terms);
    }
    let ell_f = if kappa == 0.0 { LipschitzModulus::Zero } else { LipschitzModulus::Linear { kappa } };
    Ok(SystemModel {
        name: "quadratic".into(),
        a,
        f: Arc::new(move |x| terms.iter().map(|row| row.iter().map(|&(j, k, v)| x[j] * x[k] * v).sum()).collect()),
        ell_f,
        params: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LipschitzSample {
    pub radius: f64,
    pub pairs: usize,
    pub max_ratio: f64,
    pub modulus: f64,
}

/// Largest ||f(x) − f(y)|| / ||x − y|| over random real pairs in the max-norm ball.
///
/// Half the pairs are independent uniform points, half are close pairs
/// (separation down to 10⁻³ r) that probe the local derivative.
pub fn sample_lipschitz(model: &SystemModel, radius: f64, pairs: usize, seed: u64) -> LipschitzSample {
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_ratio: f64 = 0.0;
    let point = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..d).map(|_| Complex64::new(rng.random_range(-radius..=radius), 0.0)).collect()
    };
    for i in 0..pairs {
        let x = point(&mut rng);
        let y: Vec<Complex64> = if i % 2 == 0 {
            point(&mut rng)
        } else {
            let scale = radius * 10f64.powf(-3.0 * rng.random::<f64>());
            x.iter()
                .map(|xi| {
                    let v = xi.re + scale * rng.random_range(-1.0..=1.0);
                    Complex64::new(v.clamp(-radius, radius), 0.0)
                })
                .collect()
        };
        let diff: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let dn = max_norm(&diff);
        if dn == 0.0 {
            continue;
        }
        let fx = model.eval_f(&x);
        let fy = model.eval_f(&y);
        let fd: Vec<Complex64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
        max_ratio = max_ratio.max(max_norm(&fd) / dn);
    }
    LipschitzSample { radius, pairs, max_ratio, modulus: model.ell_f.eval(radius) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn lotka_volterra_nonlinearity() {
        let m = lotka_volterra(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(m.eval_f(&[c(1.0), c(1.0)]), vec![c(2.0), c(1.0)]);
        assert_eq!(m.eval_f(&[c(0.0), c(0.0)]), vec![c(0.0), c(0.0)]);
        assert_eq!(m.ell_f, LipschitzModulus::Linear { kappa: 4.0 });
        assert!(lotka_volterra(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(lotka_volterra(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lotka_volterra_modulus_is_valid_and_tight() {
        let m = lotka_volterra(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let s = sample_lipschitz(&m, 0.5, 10_000, seed_from_env());
        assert!(s.max_ratio <= s.modulus);
        assert!(s.max_ratio >= 0.5 * s.modulus, "{s:?}");
    }

    #[test]
    fn stabilizing_feedback_closed_loop() {
        let lv = lotka_volterra(1.5, 2.0, 1.0, 1.0, 1.0).unwrap();
        let cl = closed_loop(&lv, &stabilizing_feedback(1.5)).unwrap();
        let expect = SquareMatrix::from_real_rows(&[&[-1.5, 0.0], &[-3.0, -2.0]]).unwrap();
        assert_eq!(cl.a, expect);
        let probe = [c(0.3), c(-0.2)];
        assert_eq!(cl.eval_f(&probe), lv.eval_f(&probe));
        assert_eq!(cl.ell_f, lv.ell_f);
    }

    #[test]
    fn zero_feedback_keeps_a() {
        let lv = lotka_volterra(1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let fb = FeedbackSpec::from_real(&[1.0, 1.0], &[0.0, 0.0], 1).unwrap();
        assert_eq!(closed_loop(&lv, &fb).unwrap().a, lv.a);
        let bad = FeedbackSpec::from_real(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0], 1).unwrap();
        assert!(matches!(closed_loop(&lv, &bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn scalar_square() {
        let q = QuadraticCoefficients(vec![vec![vec![1.0]]]);
        let m = quadratic_model(SquareMatrix::from_real_rows(&[&[-1.0]]).unwrap(), &q).unwrap();
        assert_eq!(m.ell_f.eval(0.7), 1.4);
        // |x² − y²| = |x + y||x − y| approaches 2r|x − y| near x = y = r
        let (x, y) = (0.7, 0.7 - 1e-9);
        let ratio = (x * x - y * y) / (x - y);
        assert!(ratio <= 1.4 && ratio > 1.4 - 1e-6);
    }

    #[test]
    fn zero_coefficients_are_linear() {
        let q = QuadraticCoefficients(vec![vec![vec![0.0; 2]; 2]; 2]);
        let m = quadratic_model(SquareMatrix::identity(2), &q).unwrap();
        assert_eq!(m.ell_f, LipschitzModulus::Zero);
    }

    #[test]
    fn malformed_tables_rejected() {
        let a = SquareMatrix::identity(2);
        assert!(quadratic_model(a.clone(), &QuadraticCoefficients(vec![vec![vec![0.0; 2]; 2]])).is_err());
        let lower = QuadraticCoefficients(vec![vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![vec![0.0; 2]; 2]]);
        assert!(quadratic_model(a, &lower).is_err());
    }

    #[test]
    fn random_quadratic_modulus_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed_from_env());
        let mut q = vec![vec![vec![0.0; 3]; 3]; 3];
        for table in q.iter_mut() {
            for (j, row) in table.iter_mut().enumerate() {
                for x in &mut row[j..] {
                    *x = rng.random_range(-2.0..2.0);
                }
            }
        }
        let m = quadratic_model(SquareMatrix::identity(3), &QuadraticCoefficients(q)).unwrap();
        for r in [0.01, 0.1, 1.0] {
            let s = sample_lipschitz(&m, r, 4000, 7);
            assert!(s.max_ratio <= s.modulus, "{s:?}");
        }
    }
}
