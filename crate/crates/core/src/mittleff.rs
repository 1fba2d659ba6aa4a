//! Mittag-Leffler functions E_{α,β}(z) = Σ_k z^k / Γ(αk + β).
//!
//! Evaluation picks one of three routes:
//!
//! * closed forms for E_{1,1}, E_{1,2}, E_{2,1}, E_{2,2};
//! * the defining power series with compensated summation, accepted only
//!   when its condition number Σ|t_k| / |Σ t_k| is small;
//! * for 0 < α < 1, the contour representation over
//!   γ(ε, θ) = {arg ζ = −θ, |ζ| ≥ ε} ∪ {|ζ| = ε} ∪ {arg ζ = θ, |ζ| ≥ ε}:
//!
//!   E_{α,β}(z) = 1/(2απi) ∫_γ exp(ζ^{1/α}) ζ^{(1−β)/α} / (ζ − z) dζ  for z left of γ,
//!
//!   plus the residue (1/α) z^{(1−β)/α} exp(z^{1/α}) for z right of γ.
//!
//! Each route reports an error estimate, so callers that need to audit a
//! value can use [`ml_eval`] instead of [`ml_scalar`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, MlRegion, Result};
use crate::linalg::{jordan_decompose, max_abs_entry, CMatrix, JordanDecomposition, SquareMatrix};
use crate::quad::{integrate_breaks, QuadOptions};
use crate::special::{gamma, rgamma};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Series terms past which the sum is abandoned.
pub const SERIES_MAX_TERMS: usize = 10_000;
/// Largest Σ|t_k| / |Σ t_k| for which a series value is accepted.
pub const SERIES_MAX_COND: f64 = 1e3;
/// For α < 1 the series is not attempted once |z|^{1/α} exceeds this.
const SERIES_MAX_EXPONENT: f64 = 8.0;
/// Ray truncation: stop once the integrand is e^{-RAY_DECAY} below its arc scale.
const RAY_DECAY: f64 = 50.0;

/// Fractional order α of a system, restricted to 0 < α < 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Arguments of one scalar evaluation E_{α,β}(z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlQuery {
    pub alpha: f64,
    pub beta: f64,
    pub z: Complex64,
}

impl MlQuery {
    pub fn new(alpha: f64, beta: f64, z: Complex64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("alpha must be positive and finite, got {alpha}"));
        }
        if !beta.is_finite() {
            return domain("beta must be finite");
        }
        if !z.re.is_finite() || !z.im.is_finite() {
            return domain("z must be finite");
        }
        Ok(Self { alpha, beta, z })
    }
}

/// Contour γ(ε, θ) with ε > 0 and απ/2 < θ ≤ απ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub epsilon: f64,
    pub theta: f64,
}

impl ContourSpec {
    pub fn new(alpha: f64, epsilon: f64, theta: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return domain(format!("contour radius must be positive, got {epsilon}"));
        }
        if !(theta > 0.5 * alpha * PI && theta <= alpha * PI) {
            return domain(format!(
                "contour angle {theta} outside (απ/2, απ] = ({}, {}]",
                0.5 * alpha * PI,
                alpha * PI
            ));
        }
        Ok(Self { epsilon, theta })
    }

    /// z lies strictly left of the contour (region G⁻).
    pub fn is_left(&self, z: Complex64) -> bool {
        z.norm() < self.epsilon || z.arg().abs() > self.theta
    }

    /// z lies strictly right of the contour (region G⁺).
    pub fn is_right(&self, z: Complex64) -> bool {
        z.norm() > self.epsilon && z.arg().abs() < self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlMethod {
    Identity,
    Series,
    Contour,
    ContourWithResidue,
    BetaRecurrence,
}

/// A value together with how it was obtained.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MlValue {
    pub value: Complex64,
    pub method: MlMethod,
    /// Absolute error estimate.
    pub error_estimate: f64,
    /// Series terms or quadrature panels used.
    pub terms: usize,
}

#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: Complex64,
    comp: Complex64,
}

impl Neumaier {
    fn add(&mut self, x: Complex64) {
        self.sum.re = two_sum(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = two_sum(self.sum.im, x.im, &mut self.comp.im);
    }
    fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn two_sum(s: f64, x: f64, comp: &mut f64) -> f64 {
    let t = s + x;
    if s.abs() >= x.abs() {
        *comp += (s - t) + x;
    } else {
        *comp += (x - t) + s;
    }
    t
}

#[derive(Debug, Clone, Copy)]
struct SeriesSum {
    sum: Complex64,
    abs_sum: f64,
    terms: usize,
    converged: bool,
}

impl SeriesSum {
    fn cond(&self) -> f64 {
        if self.abs_sum == 0.0 {
            1.0
        } else {
            self.abs_sum / self.sum.norm()
        }
    }
    fn acceptable(&self) -> bool {
        self.converged && self.cond() <= SERIES_MAX_COND
    }
    fn error_estimate(&self) -> f64 {
        8.0 * f64::EPSILON * self.abs_sum * (1.0 + (self.terms as f64).sqrt())
    }
}

/// k-th derivative of the series: Σ_{n≥k} n!/(n−k)! z^{n−k} / Γ(αn + β).
fn series_sum(alpha: f64, beta: f64, z: Complex64, k: usize) -> SeriesSum {
    let zabs = z.norm();
    // terms decrease once (αn)^α > |z|
    let n_min = (zabs.powf(1.0 / alpha) / alpha).ceil() as usize + k + 2;
    let mut acc = Neumaier::default();
    let mut abs_sum = 0.0;
    let mut zp = C1;
    let mut small_run = 0;
    for n in k..SERIES_MAX_TERMS {
        let mut ff = 1.0;
        for i in 0..k {
            ff *= (n - i) as f64;
        }
        let term = zp * (ff * rgamma(alpha * n as f64 + beta));
        if !term.re.is_finite() || !term.im.is_finite() {
            return SeriesSum { sum: acc.total(), abs_sum, terms: n, converged: false };
        }
        acc.add(term);
        abs_sum += term.norm();
        let partial = acc.total().norm();
        if term.norm() <= 1e-16 * partial || (term.norm() == 0.0 && partial == 0.0) {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 2 && n >= n_min && alpha * n as f64 + beta > 1.0 {
            return SeriesSum { sum: acc.total(), abs_sum, terms: n + 1, converged: true };
        }
        zp *= z;
        if zp.norm() > 1e300 {
            return SeriesSum { sum: acc.total(), abs_sum, terms: n + 1, converged: false };
        }
    }
    SeriesSum { sum: acc.total(), abs_sum, terms: SERIES_MAX_TERMS, converged: false }
}

fn identity_value(alpha: f64, beta: f64, z: Complex64) -> Option<Complex64> {
    // closed forms lose accuracy at tiny |z| (e.g. (e^z − 1)/z); the series covers that
    if z.norm() < 0.5 {
        return None;
    }
    if alpha == 1.0 && beta == 1.0 {
        Some(z.exp())
    } else if alpha == 1.0 && beta == 2.0 {
        Some((z.exp() - 1.0) / z)
    } else if alpha == 2.0 && beta == 1.0 {
        Some(z.sqrt().cosh())
    } else if alpha == 2.0 && beta == 2.0 {
        let s = z.sqrt();
        Some(s.sinh() / s)
    } else {
        None
    }
}

/// Default contour for evaluating at z, and whether z lies right of it.
///
/// Left of the contour (|arg z| > 3απ/4): θ = (απ/2 + min(|arg z|, απ))/2.
/// Otherwise θ sits midway between max(|arg z|, απ/2) and απ and the
/// residue term is added.
pub fn default_contour(alpha: f64, z: Complex64) -> (ContourSpec, bool) {
    let phi = z.arg().abs();
    let half = 0.5 * alpha * PI;
    let eps = (0.5 * z.norm()).min(1.0);
    if phi > 0.75 * alpha * PI {
        let theta = 0.5 * (half + phi.min(alpha * PI));
        (ContourSpec { epsilon: eps, theta }, false)
    } else {
        let theta = 0.5 * (phi.max(half) + alpha * PI);
        (ContourSpec { epsilon: eps, theta }, true)
    }
}

struct ContourOutcome {
    value: Complex64,
    error: f64,
    panels: usize,
}

/// (1/(2απi)) ∫_γ exp(ζ^{1/α}) ζ^{(1−β)/α} k! / (ζ − z)^{k+1} dζ.
fn contour_integral(alpha: f64, beta: f64, z: Complex64, c: ContourSpec, k: usize) -> Result<ContourOutcome> {
    let p = (1.0 - beta) / alpha;
    let inv_a = 1.0 / alpha;
    let kfact = gamma(k as f64 + 1.0);
    let kp1 = (k + 1) as i32;
    // log of exp(ζ^{1/α}) ζ^{(1−β)/α} with ζ = ρ e^{iφ}
    let log_weight = move |rho: f64, phi: f64| -> Complex64 {
        let lr = rho.ln();
        let w = Complex64::from_polar(rho.powf(inv_a), phi * inv_a);
        w + Complex64::new(p * lr, p * phi)
    };
    let g = move |rho: f64, phi: f64| -> Complex64 {
        let zeta = Complex64::from_polar(rho, phi);
        let den = (zeta - z).powi(kp1);
        log_weight(rho, phi).exp() * kfact / den
    };
    let theta = c.theta;
    let eps = c.epsilon;
    let decay = (theta * inv_a).cos();
    if decay > -1e-3 {
        return Err(Error::Evaluation {
            region: MlRegion::Contour,
            terms: 0,
            reason: format!("rays at angle {theta} do not decay for alpha {alpha}"),
        });
    }

    // scale of the integrand on the arc, used for ray truncation and tolerances
    let mut arc_scale: f64 = 0.0;
    for i in 0..=32 {
        let phi = -theta + 2.0 * theta * i as f64 / 32.0;
        arc_scale = arc_scale.max((g(eps, phi) * eps).norm());
    }
    let log_scale = arc_scale.max(f64::MIN_POSITIVE).ln();
    let dist_log = |rho: f64| -> f64 {
        let zeta = Complex64::from_polar(rho, theta);
        let d = (zeta - z).norm().max((Complex64::from_polar(rho, -theta) - z).norm());
        log_weight(rho, theta).re - (k as f64 + 1.0) * d.ln()
    };
    let mut r_end = (RAY_DECAY / decay.abs()).powf(alpha).max(2.0 * eps);
    let mut guard = 0;
    while dist_log(r_end) > log_scale - RAY_DECAY || r_end < 2.0 * z.norm().min(1e6) {
        r_end *= 1.5;
        guard += 1;
        if guard > 200 {
            return Err(Error::Evaluation {
                region: MlRegion::Contour,
                terms: 0,
                reason: "could not find a ray truncation point".into(),
            });
        }
    }

    let mut breaks = vec![eps];
    let mut b = eps * 2.0;
    while b < r_end {
        breaks.push(b);
        b *= 2.0;
    }
    let near = z.norm() * (z.arg().abs() - theta).cos();
    if near > eps && near < r_end {
        breaks.push(near);
    }
    breaks.push(r_end);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let e_up = Complex64::from_polar(1.0, theta);
    let e_dn = Complex64::from_polar(1.0, -theta);
    let upper = |rho: f64| g(rho, theta) * e_up;
    let lower = |rho: f64| g(rho, -theta) * e_dn;
    let arc = |phi: f64| g(eps, phi) * Complex64::from_polar(eps, phi) * Complex64::i();
    let arc_breaks: Vec<f64> = (0..=8).map(|i| -theta + 2.0 * theta * i as f64 / 8.0).collect();

    // coarse pass for the magnitude of ∫|g|, which sets the absolute tolerance
    let coarse = QuadOptions { abs_tol: f64::INFINITY, rel_tol: 0.0, max_panels: usize::MAX };
    let mag = integrate_breaks(upper, &breaks, coarse).abs_value
        + integrate_breaks(lower, &breaks, coarse).abs_value
        + integrate_breaks(arc, &arc_breaks, coarse).abs_value;
    // the Kronrod error estimate never drops below 50ε·∫|g| per panel
    let opts = QuadOptions { abs_tol: 4e-14 * mag, rel_tol: 1e-13, max_panels: 4000 };
    let ru = integrate_breaks(upper, &breaks, opts);
    let rl = integrate_breaks(lower, &breaks, opts);
    let ra = integrate_breaks(arc, &arc_breaks, opts);
    let panels = ru.panels + rl.panels + ra.panels;
    let integral = ru.value - rl.value + ra.value;
    let error = ru.error + rl.error + ra.error;
    let factor = 1.0 / (2.0 * alpha * PI);
    let value = integral / Complex64::i() * factor;
    // converged, or at least within 1e-12 of the integrand mass
    let ok = (ru.converged && rl.converged && ra.converged) || error <= 1e-12 * mag;
    if !ok || !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Evaluation {
            region: MlRegion::Contour,
            terms: panels,
            reason: format!("contour quadrature error {error:e} against integrand mass {mag:e}"),
        });
    }
    Ok(ContourOutcome { value, error: error * factor, panels })
}

fn residue_term(alpha: f64, beta: f64, z: Complex64) -> Complex64 {
    let lz = z.ln();
    ((lz / alpha).exp() + lz * ((1.0 - beta) / alpha)).exp() / alpha
}

/// E_{α,β}(z) with the route and an error estimate.
pub fn ml_eval(q: &MlQuery) -> Result<MlValue> {
    let MlQuery { alpha, beta, z } = *q;
    if z == C0 {
        return Ok(MlValue {
            value: Complex64::new(rgamma(beta), 0.0),
            method: MlMethod::Series,
            error_estimate: f64::EPSILON * rgamma(beta).abs(),
            terms: 1,
        });
    }
    if let Some(v) = identity_value(alpha, beta, z) {
        return Ok(MlValue {
            value: v,
            method: MlMethod::Identity,
            error_estimate: 4.0 * f64::EPSILON * v.norm(),
            terms: 0,
        });
    }
    let try_series = alpha >= 1.0 || z.norm().powf(1.0 / alpha) <= SERIES_MAX_EXPONENT;
    let mut series_terms = 0;
    if try_series {
        let s = series_sum(alpha, beta, z, 0);
        if s.acceptable() {
            return Ok(MlValue {
                value: s.sum,
                method: MlMethod::Series,
                error_estimate: s.error_estimate(),
                terms: s.terms,
            });
        }
        series_terms = s.terms;
        if alpha >= 1.0 {
            return Err(Error::Evaluation {
                region: MlRegion::Series,
                terms: s.terms,
                reason: format!("series ill-conditioned (cond {:e}) and no contour form for alpha >= 1", s.cond()),
            });
        }
    }
    let (spec, residue) = default_contour(alpha, z);
    let out = contour_integral(alpha, beta, z, spec, 0).map_err(|e| match e {
        Error::Evaluation { region, terms, reason } => {
            Error::Evaluation { region, terms: terms + series_terms, reason }
        }
        other => other,
    })?;
    if residue {
        let r = residue_term(alpha, beta, z);
        let value = out.value + r;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Evaluation {
                region: MlRegion::ContourWithResidue,
                terms: out.panels,
                reason: "overflow in exp(z^{1/alpha})".into(),
            });
        }
        Ok(MlValue {
            value,
            method: MlMethod::ContourWithResidue,
            error_estimate: out.error + 4.0 * f64::EPSILON * r.norm() * (1.0 + z.norm().powf(1.0 / alpha)),
            terms: out.panels,
        })
    } else {
        Ok(MlValue { value: out.value, method: MlMethod::Contour, error_estimate: out.error, terms: out.panels })
    }
}

/// E_{α,β}(z).
pub fn ml_scalar(q: &MlQuery) -> Result<Complex64> {
    ml_eval(q).map(|v| v.value)
}

/// Shorthand for `ml_scalar(&MlQuery::new(alpha, beta, z)?)`.
pub fn ml(alpha: f64, beta: f64, z: Complex64) -> Result<Complex64> {
    ml_scalar(&MlQuery::new(alpha, beta, z)?)
}

/// E_{α,β}(z) from the contour integral over a caller-chosen γ(ε, θ).
/// Requires 0 < α < 1 and z strictly left of the contour.
pub fn ml_contour(q: &MlQuery, c: &ContourSpec) -> Result<Complex64> {
    if !(q.alpha > 0.0 && q.alpha < 1.0) {
        return domain("contour representation needs 0 < alpha < 1");
    }
    ContourSpec::new(q.alpha, c.epsilon, c.theta)?;
    if !c.is_left(q.z) {
        return domain(format!(
            "z = {} is not strictly left of the contour (epsilon {}, theta {})",
            q.z, c.epsilon, c.theta
        ));
    }
    contour_integral(q.alpha, q.beta, q.z, *c, 0).map(|o| o.value)
}

/// d^k/dz^k E_{α,β}(z).
pub fn ml_deriv(q: &MlQuery, k: usize) -> Result<Complex64> {
    let MlQuery { alpha, beta, z } = *q;
    if k == 0 {
        return ml_scalar(q);
    }
    if alpha == 1.0 && beta == 1.0 {
        return Ok(z.exp());
    }
    if z == C0 {
        return Ok(Complex64::new(gamma(k as f64 + 1.0) * rgamma(alpha * k as f64 + beta), 0.0));
    }
    let try_series = alpha >= 1.0 || z.norm().powf(1.0 / alpha) <= SERIES_MAX_EXPONENT;
    if try_series {
        let s = series_sum(alpha, beta, z, k);
        if s.acceptable() {
            return Ok(s.sum);
        }
        if alpha >= 1.0 {
            return Err(Error::Evaluation {
                region: MlRegion::Series,
                terms: s.terms,
                reason: format!("derivative series ill-conditioned (cond {:e})", s.cond()),
            });
        }
    }
    let (spec, residue) = default_contour(alpha, z);
    if !residue {
        return contour_integral(alpha, beta, z, spec, k).map(|o| o.value);
    }
    // α z E^{(m)}_b = E^{(m−1)}_{b−1} − (b − 1 + α(m−1)) E^{(m−1)}_b, with b = β − j
    let mut level: Vec<Complex64> = (0..=k).map(|j| ml(alpha, beta - j as f64, z)).collect::<Result<_>>()?;
    for m in 1..=k {
        let next: Vec<Complex64> = (0..=k - m)
            .map(|j| {
                let b = beta - j as f64;
                (level[j + 1] - level[j] * (b - 1.0 + alpha * (m as f64 - 1.0))) / (z * alpha)
            })
            .collect();
        level = next;
    }
    Ok(level[0])
}

/// Convolution kernel t^{α−1} E_{α,α}(λ t^α), for t > 0.
pub fn ml_kernel(alpha: f64, lambda: Complex64, t: f64) -> Result<Complex64> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("kernel is only defined for t > 0, got {t}"));
    }
    let ta = t.powf(alpha);
    Ok(ml(alpha, alpha, lambda * ta)? * (ta / t))
}

enum MatrixPlan {
    Spectral(JordanDecomposition),
    Series(CMatrix),
}

/// Repeated evaluation of s ↦ E_{α,β}(s·A) from one decomposition of A.
pub struct MatrixMl {
    alpha: f64,
    beta: f64,
    dim: usize,
    plan: MatrixPlan,
}

impl MatrixMl {
    pub fn new(alpha: f64, beta: f64, a: &SquareMatrix) -> Result<Self> {
        MlQuery::new(alpha, beta, C0)?;
        let plan = match jordan_decompose(a.matrix(), &[]) {
            Ok(dec) => MatrixPlan::Spectral(dec),
            Err(Error::StructureAmbiguity { .. }) | Err(Error::SimilarityResidual { .. }) => {
                MatrixPlan::Series(a.matrix().clone())
            }
            Err(e) => return Err(e),
        };
        Ok(Self { alpha, beta, dim: a.dim(), plan })
    }

    pub fn uses_series(&self) -> bool {
        matches!(self.plan, MatrixPlan::Series(_))
    }

    /// E_{α,β}(s·A).
    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        match &self.plan {
            MatrixPlan::Spectral(dec) => {
                let d = self.dim;
                let mut f = CMatrix::zeros(d, d);
                let mut off = 0;
                for b in &dec.blocks {
                    // E(sλ + sN) = Σ_j E^{(j)}(sλ) s^j N^j / j!
                    let q = MlQuery::new(self.alpha, self.beta, b.lambda * s)?;
                    let mut coef = Vec::with_capacity(b.size);
                    let mut sj = C1;
                    for j in 0..b.size {
                        coef.push(ml_deriv(&q, j)? * sj / gamma(j as f64 + 1.0));
                        sj *= s;
                    }
                    for r in 0..b.size {
                        for c in r..b.size {
                            f[(off + r, off + c)] = coef[c - r];
                        }
                    }
                    off += b.size;
                }
                Ok(&dec.t * f * &dec.t_inv)
            }
            MatrixPlan::Series(a) => matrix_series(self.alpha, self.beta, &(a * s)),
        }
    }
}

fn matrix_series(alpha: f64, beta: f64, a: &CMatrix) -> Result<CMatrix> {
    let d = a.nrows();
    let norm = crate::linalg::op_norm(a);
    let n_min = (norm.powf(1.0 / alpha) / alpha).ceil() as usize + 2;
    let mut power = CMatrix::identity(d, d);
    let mut sum = CMatrix::zeros(d, d);
    let mut abs_sum = 0.0;
    let mut small_run = 0;
    for n in 0..SERIES_MAX_TERMS {
        let term = &power * Complex64::new(rgamma(alpha * n as f64 + beta), 0.0);
        let tn = max_abs_entry(&term);
        sum += &term;
        abs_sum += tn;
        let sn = max_abs_entry(&sum);
        if tn <= 1e-16 * sn {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 2 && n >= n_min {
            if abs_sum > 1e6 * sn {
                break;
            }
            return Ok(sum);
        }
        power = &power * a;
        if !max_abs_entry(&power).is_finite() {
            break;
        }
    }
    Err(Error::Evaluation {
        region: MlRegion::MatrixSeries,
        terms: SERIES_MAX_TERMS,
        reason: "matrix series did not converge to a well-conditioned sum".into(),
    })
}

/// E_{α,β}(A).
pub fn ml_matrix(alpha: f64, beta: f64, a: &SquareMatrix) -> Result<SquareMatrix> {
    let m = MatrixMl::new(alpha, beta, a)?.eval(C1)?;
    SquareMatrix::new(m)
}
