//! Globally adaptive Gauss-Kronrod (10/21) quadrature for complex-valued
//! integrands on finite real intervals.
//!
//! Panels are bisected in order of their error estimate until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)` or the panel budget
//! is spent. Integrable endpoint singularities are fine: no node sits on
//! an endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_397,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-12, max_panels: 2000 }
    }
}

impl QuadOptions {
    pub fn tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    /// Integral of |f|, as estimated by the Kronrod rule.
    pub abs_value: f64,
    pub panels: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn into_result(self) -> Result<Complex64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature { estimate: self.value.norm(), error: self.error, panels: self.panels })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err;
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let h = half.abs();
    let err = ((kronrod - gauss) * half).norm();
    Panel { a, b, value: kronrod * half, error: rescale_error(err, res_abs * h, res_asc * h), abs_value: res_abs * h }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    integrate_breaks(f, &[a, b], opts)
}

/// Integrate over consecutive intervals `breaks[i]..breaks[i+1]`, refining globally.
pub fn integrate_breaks<F: FnMut(f64) -> Complex64>(mut f: F, breaks: &[f64], opts: QuadOptions) -> QuadResult {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[0] != w[1] {
            heap.push(gk21(&mut f, w[0], w[1]));
        }
    }
    let totals = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((Complex64::new(0.0, 0.0), 0.0, 0.0), |(v, e, ab), p| (v + p.value, e + p.error, ab + p.abs_value))
    };
    loop {
        let (value, error, abs_value) = totals(&heap);
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        let panels = heap.len();
        if error <= target || heap.is_empty() {
            return QuadResult { value, error, abs_value, panels, converged: true };
        }
        if panels >= opts.max_panels {
            return QuadResult { value, error, abs_value, panels, converged: false };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval at machine resolution: accept what we have
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        heap.push(gk21(&mut f, worst.a, mid));
        heap.push(gk21(&mut f, mid, worst.b));
    }
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate_real(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, QuadOptions::default());
        assert!(r.converged);
        assert!((r.value.re - 13.5).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        // ∫_0^10 exp(i x) dx = (e^{10 i} - 1)/i
        let r = integrate(|x| Complex64::new(0.0, x).exp(), 0.0, 10.0, QuadOptions::default());
        let exact = (Complex64::new(0.0, 10.0).exp() - 1.0) / Complex64::i();
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-0.6} dx = 2.5
        let r = integrate_real(|x| x.powf(-0.6), 0.0, 1.0, QuadOptions::tol(1e-12, 1e-11));
        assert!(r.converged, "{r:?}");
        assert!((r.value.re - 2.5).abs() < 1e-9);
    }

    #[test]
    fn reversed_interval_changes_sign() {
        let f = |x: f64| x.exp();
        let a = integrate_real(f, 0.0, 1.0, QuadOptions::default()).value;
        let b = integrate_real(f, 1.0, 0.0, QuadOptions::default()).value;
        assert!((a + b).norm() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: 0.0, max_panels: 4 };
        let r = integrate_real(|x| (1.0 / x).sin(), 1e-3, 1.0, opts);
        assert!(!r.converged);
        assert!(r.into_result().is_err());
    }
}
