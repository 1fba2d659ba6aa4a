//! Run configuration, the analysis pipeline and canonical JSON output.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    basin, decay_constants_with, default_delta, BasinConfig, BasinEstimate, DecayConstants, DecayOverrides,
    LipschitzModulus,
};
use crate::error::{Error, Result};
use crate::fodeint::SolverConfig;
use crate::linalg::{max_norm, DeclaredCluster, SquareMatrix};
use crate::mittleff::FracOrder;
use crate::models::{
    closed_loop, linear_model, lotka_volterra, quadratic_model, sample_lipschitz, seed_from_env, stabilizing_feedback,
    FeedbackSpec, LipschitzSample, QuadraticCoefficients, SystemModel,
};
use crate::spectra::{
    block_form_declared, eigenvalues, sector_test, transform_system, BlockForm, SectorReport, Spectrum,
    TransformedSystem,
};
use crate::trajectory::{GridScheme, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Linear,
    Quadratic,
    LotkaVolterra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackPreset {
    /// Lotka-Volterra only: B = (1, 1)ᵀ, K = (−2h, 0).
    Stabilizing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeedbackConfig {
    Preset(FeedbackPreset),
    /// B (d×m) and K (m×d), both row-major.
    Explicit {
        b: Vec<f64>,
        k: Vec<f64>,
        #[serde(default = "one_input")]
        inputs: usize,
    },
}

fn one_input() -> usize {
    1
}

/// A state entry: a real number or a [re, im] pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub scheme: GridScheme,
    pub steps: usize,
    /// Defaults to the solver horizon.
    #[serde(default)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub q_target: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub theta0: Option<f64>,
    #[serde(default)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub alpha: f64,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<Scalar>>>,
    #[serde(default, rename = "Q", skip_serializing_if = "Option::is_none")]
    pub q: Option<QuadraticCoefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<Scalar>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub declared_structure: Vec<DeclaredCluster>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn order(&self) -> Result<FracOrder> {
        FracOrder::new(self.alpha)
    }

    fn param(&self, name: &str, default: Option<f64>) -> Result<f64> {
        self.params.get(name).copied().or(default).ok_or_else(|| Error::Config(format!("missing parameter '{name}'")))
    }

    fn matrix(&self) -> Result<SquareMatrix> {
        let rows = self.a.as_ref().ok_or_else(|| Error::Config("model needs the matrix 'A'".into()))?;
        SquareMatrix::from_rows(&rows.iter().map(|r| r.iter().map(|s| s.value()).collect()).collect::<Vec<_>>())
    }

    pub fn build_model(&self) -> Result<SystemModel> {
        let open = match self.model {
            ModelKind::Linear => {
                if self.q.is_some() {
                    return Err(Error::Config("'Q' is only used by the quadratic model".into()));
                }
                linear_model(self.matrix()?)
            }
            ModelKind::Quadratic => {
                let q = self.q.as_ref().ok_or_else(|| Error::Config("quadratic model needs 'Q'".into()))?;
                quadratic_model(self.matrix()?, q)?
            }
            ModelKind::LotkaVolterra => {
                if self.a.is_some() || self.q.is_some() {
                    return Err(Error::Config("Lotka-Volterra takes parameters h, r, a, b, c, not 'A' or 'Q'".into()));
                }
                for key in self.params.keys() {
                    if !matches!(key.as_str(), "h" | "r" | "a" | "b" | "c") {
                        return Err(Error::Config(format!("unknown Lotka-Volterra parameter '{key}'")));
                    }
                }
                lotka_volterra(
                    self.param("h", Some(1.0))?,
                    self.param("r", Some(2.0))?,
                    self.param("a", Some(1.0))?,
                    self.param("b", Some(1.0))?,
                    self.param("c", Some(1.0))?,
                )?
            }
        };
        match &self.feedback {
            None => Ok(open),
            Some(FeedbackConfig::Preset(FeedbackPreset::Stabilizing)) => {
                if self.model != ModelKind::LotkaVolterra {
                    return Err(Error::Config(
                        "the 'stabilizing' feedback preset applies to Lotka-Volterra only".into(),
                    ));
                }
                closed_loop(&open, &stabilizing_feedback(self.param("h", Some(1.0))?))
            }
            Some(FeedbackConfig::Explicit { b, k, inputs }) => {
                closed_loop(&open, &FeedbackSpec::from_real(b, k, *inputs)?)
            }
        }
    }

    pub fn initial_state(&self) -> Option<Vec<Complex64>> {
        self.x0.as_ref().map(|v| v.iter().map(|s| s.value()).collect())
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = self.solver.clone().unwrap_or(SolverConfig::new(50.0, 1e-2)?);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        let solver = self.solver_config()?;
        match &self.grid {
            None => TimeGrid::with_step(solver.horizon, solver.step),
            Some(g) => {
                let horizon = g.horizon.unwrap_or(solver.horizon);
                match g.scheme {
                    GridScheme::Uniform => TimeGrid::uniform(horizon, g.steps),
                    GridScheme::Graded => TimeGrid::graded_for(self.alpha, horizon, g.steps),
                    GridScheme::Custom => Err(Error::Config("grid scheme must be 'uniform' or 'graded'".into())),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelEcho {
    pub name: String,
    /// A after any feedback, as rows of [re, im].
    pub a: Vec<Vec<Complex64>>,
    pub ell_f: LipschitzModulus,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub input: RunConfig,
    pub model: ModelEcho,
    pub spectrum: Spectrum,
    pub sector: SectorReport,
    pub decay_constants: Vec<DecayConstants>,
    pub block_form: Option<BlockForm>,
    pub ell_h: Option<LipschitzModulus>,
    pub basin: Option<BasinEstimate>,
    pub lipschitz_check: Option<LipschitzSample>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn is_stable(&self) -> bool {
        self.sector.is_stable()
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

/// Everything the later stages need: the report plus the live model and transformed system.
pub struct Analysis {
    pub report: AnalysisReport,
    pub model: SystemModel,
    pub transformed: Option<TransformedSystem>,
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis> {
    let alpha = cfg.order()?;
    let model = cfg.build_model()?;
    let mut warnings = Vec::new();
    let spectrum = eigenvalues(&model.a)?;
    let sector = sector_test(&spectrum, alpha);
    let echo = ModelEcho { name: model.name.clone(), a: model.a.rows(), ell_f: model.ell_f.clone() };
    let x0 = cfg.initial_state();
    if let Some(x) = &x0 {
        if x.len() != model.dim() {
            return Err(Error::Dimension(format!("x0 has dimension {}, model {}", x.len(), model.dim())));
        }
    }
    if !sector.is_stable() {
        let report = AnalysisReport {
            input: cfg.clone(),
            model: echo,
            spectrum,
            sector,
            decay_constants: Vec::new(),
            block_form: None,
            ell_h: None,
            basin: None,
            lipschitz_check: None,
            warnings,
        };
        return Ok(Analysis { report, model, transformed: None });
    }

    let ov = DecayOverrides { theta: cfg.overrides.theta, theta0: cfg.overrides.theta0 };
    let constants =
        spectrum.eigenvalues.iter().map(|e| decay_constants_with(alpha, e.value, &ov)).collect::<Result<Vec<_>>>()?;
    let delta = cfg.overrides.delta.unwrap_or_else(|| default_delta(&constants));
    let bf = block_form_declared(&model.a, delta, &cfg.declared_structure)?;
    if bf.has_nilpotent() {
        warnings.push(format!("A is not diagonalizable; nilpotent parts scaled by delta = {delta:e}"));
    }
    let ts = transform_system(&model, &bf, alpha)?;
    let bcfg = BasinConfig {
        q_target: cfg.overrides.q_target.unwrap_or(BasinConfig::default().q_target),
        r_max: cfg.overrides.r_max.unwrap_or(BasinConfig::default().r_max),
        delta: cfg.overrides.delta,
    };
    let est = basin(&ts, &constants, &bcfg)?;
    if est.r >= est.r_max {
        warnings.push(format!("ball radius capped at r_max = {:e}", est.r_max));
    }
    let lipschitz_check = if model.ell_f == LipschitzModulus::Zero {
        None
    } else {
        // the ball of radius r in block coordinates sits inside ||x|| ≤ ||TP|| r
        let radius = ts.tp_norm() * est.r;
        let sample = sample_lipschitz(&model, radius, 2000, seed_from_env());
        if sample.max_ratio > model.ell_f.eval(radius) * (1.0 + 1e-9) {
            warnings.push(format!(
                "sampled Lipschitz ratio {:e} exceeds the declared modulus {:e} at radius {radius:e}",
                sample.max_ratio,
                model.ell_f.eval(radius)
            ));
        }
        Some(sample)
    };
    if let Some(x) = &x0 {
        let y = ts.to_block(x);
        if max_norm(&y) > est.r_star {
            warnings.push(format!(
                "x0 maps to block coordinates of norm {:e}, outside the certified radius {:e}",
                max_norm(&y),
                est.r_star
            ));
        }
    }
    let report = AnalysisReport {
        input: cfg.clone(),
        model: echo,
        spectrum,
        sector,
        decay_constants: constants,
        block_form: Some(bf),
        ell_h: Some(ts.ell_h.clone()),
        basin: Some(est),
        lipschitz_check,
        warnings,
    };
    Ok(Analysis { report, model, transformed: Some(ts) })
}

/// Pretty-printed JSON with every float written as `{:.16e}` (17 significant digits).
struct CanonicalFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let fmt = CanonicalFormatter { inner: serde_json::ser::PrettyFormatter::new() };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Verdict;

    const CLOSED: &str = r#"{"model": "lotka-volterra", "params": {"h": 1, "r": 2, "a": 1, "b": 1, "c": 1},
        "alpha": 0.6, "feedback": "stabilizing"}"#;

    #[test]
    fn closed_loop_lotka_volterra_is_stable() {
        let an = analyze(&RunConfig::from_json(CLOSED).unwrap()).unwrap();
        let r = &an.report;
        assert_eq!(r.sector.verdict, Verdict::LinearlyAsymptoticallyStable);
        assert!(r.basin.as_ref().unwrap().r_star > 0.0);
        assert!(an.transformed.is_some());
    }

    #[test]
    fn open_loop_is_not_sector_stable() {
        let cfg = RunConfig::from_json(r#"{"model": "lotka-volterra", "alpha": 0.6}"#).unwrap();
        let an = analyze(&cfg).unwrap();
        assert_eq!(an.report.sector.verdict, Verdict::NotSectorStable);
        assert!(an.report.basin.is_none());
    }

    #[test]
    fn linear_diagonal_has_zero_q() {
        let cfg = RunConfig::from_json(r#"{"model": "linear", "alpha": 0.5, "A": [[-1, 0], [0, -2]]}"#).unwrap();
        let b = analyze(&cfg).unwrap().report.basin.unwrap();
        assert_eq!(b.q, 0.0);
        assert_eq!(b.r, b.r_max);
    }

    #[test]
    fn report_is_deterministic_and_canonical() {
        let cfg = RunConfig::from_json(CLOSED).unwrap();
        let a = analyze(&cfg).unwrap().report.to_json();
        let b = analyze(&cfg).unwrap().report.to_json();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["model"]["a"][1][0], serde_json::json!([-2.0, 0.0]));
        assert!(a.contains("\"alpha\": 5.9999999999999998e-1"));
    }

    #[test]
    fn config_errors() {
        assert!(RunConfig::from_json(r#"{"model": "linear", "alpha": 0.5}"#).and_then(|c| c.build_model()).is_err());
        assert!(RunConfig::from_json(r#"{"model": "lotka-volterra", "alpha": 0.5, "bogus": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"model": "lotka-volterra", "alpha": 0.5, "params": {"k": 1}}"#)
            .and_then(|c| c.build_model())
            .is_err());
        assert!(RunConfig::from_json(r#"{"model": "lotka-volterra", "alpha": 1.5}"#)
            .and_then(|c| analyze(&c))
            .is_err());
    }

    #[test]
    fn explicit_feedback_and_complex_entries() {
        let cfg = RunConfig::from_json(
            r#"{"model": "linear", "alpha": 0.5, "A": [[[0, 1], 0], [0, 1]],
                "feedback": {"b": [1, 0, 0, 1], "k": [-2, 0, 0, -3], "inputs": 2}}"#,
        )
        .unwrap();
        let m = cfg.build_model().unwrap();
        assert_eq!(m.a.get(0, 0), Complex64::new(-2.0, 1.0));
        assert_eq!(m.a.get(1, 1), Complex64::new(-2.0, 0.0));
    }
}
