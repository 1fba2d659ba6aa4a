//! Time grids, state trajectories and their CSV form.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::max_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridScheme {
    Uniform,
    /// t_k = T (k/n)^γ, clustering nodes at t = 0.
    Graded,
    /// Caller-supplied nodes.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    pub horizon: f64,
    #[serde(skip)]
    pub nodes: Vec<f64>,
    pub scheme: GridScheme,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() || steps == 0 {
            return domain(format!("uniform grid needs horizon > 0 and steps ≥ 1, got {horizon}, {steps}"));
        }
        let h = horizon / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
        nodes[steps] = horizon;
        Ok(Self { horizon, nodes, scheme: GridScheme::Uniform })
    }

    /// Uniform grid whose step is `step` (the horizon is rounded to a whole number of steps).
    pub fn with_step(horizon: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(step < horizon) {
            return domain(format!("step must satisfy 0 < step < horizon, got {step} with horizon {horizon}"));
        }
        let steps = (horizon / step).round() as usize;
        Self::uniform(steps as f64 * step, steps)
    }

    pub fn graded(horizon: f64, steps: usize, exponent: f64) -> Result<Self> {
        if !(exponent >= 1.0) || !exponent.is_finite() {
            return domain(format!("grading exponent must be ≥ 1, got {exponent}"));
        }
        let mut g = Self::uniform(horizon, steps)?;
        for t in g.nodes.iter_mut() {
            *t = horizon * (*t / horizon).powf(exponent);
        }
        g.nodes[steps] = horizon;
        g.scheme = GridScheme::Graded;
        Ok(g)
    }

    /// Graded grid with exponent 1/α clamped to [1, 3].
    pub fn graded_for(alpha: f64, horizon: f64, steps: usize) -> Result<Self> {
        Self::graded(horizon, steps, (1.0 / alpha).clamp(1.0, 3.0))
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || !(nodes[0] >= 0.0) || nodes.iter().any(|t| !t.is_finite()) {
            return domain("nodes must be finite, nonnegative and non-empty");
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("nodes must be strictly increasing");
        }
        let horizon = *nodes.last().expect("non-empty");
        Ok(Self { horizon, nodes, scheme: GridScheme::Custom })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Step of a uniform grid.
    pub fn step(&self) -> Option<f64> {
        (self.scheme == GridScheme::Uniform && self.nodes.len() > 1)
            .then(|| self.horizon / (self.nodes.len() - 1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    /// values[n] is the state at grid.nodes[n].
    pub values: Vec<Vec<Complex64>>,
    pub norm_sup: f64,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!("{} values for {} grid nodes", values.len(), grid.len())));
        }
        let d = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != d) {
            return Err(Error::Dimension("state dimension varies along the trajectory".into()));
        }
        if values.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("trajectory contains non-finite values");
        }
        let norm_sup = values.iter().map(|v| max_norm(v)).fold(0.0, f64::max);
        Ok(Self { grid, values, norm_sup })
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn times(&self) -> &[f64] {
        &self.grid.nodes
    }

    /// Largest |Im x_i(t)|; for real systems this measures embedding round-off.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().flatten().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn map_states(&self, f: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| f(v)).collect())
    }

    /// max_n ||self(t_n) − other(t_n)|| on a common grid.
    pub fn sup_diff(&self, other: &Trajectory) -> Result<f64> {
        if self.grid.len() != other.grid.len()
            || self.grid.nodes.iter().zip(&other.grid.nodes).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(Error::Dimension("trajectories live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max))
    }

    /// Restriction to the nodes of `coarse`, which must be a subset of this grid.
    pub fn sample_at(&self, coarse: &TimeGrid) -> Result<Trajectory> {
        let mut out = Vec::with_capacity(coarse.len());
        let mut k = 0;
        for &t in &coarse.nodes {
            while k < self.grid.len() && self.grid.nodes[k] < t - 1e-9 * t.abs().max(1.0) {
                k += 1;
            }
            if k == self.grid.len() || (self.grid.nodes[k] - t).abs() > 1e-9 * t.abs().max(1.0) {
                return Err(Error::Dimension(format!("node {t} is not on the finer grid")));
            }
            out.push(self.values[k].clone());
        }
        Trajectory::new(coarse.clone(), out)
    }

    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut s = String::from("t");
        for i in 1..=d {
            let _ = write!(s, ",re(x_{i}),im(x_{i})");
        }
        s.push('\n');
        for (t, v) in self.grid.nodes.iter().zip(&self.values) {
            let _ = write!(s, "{t:.16e}");
            for z in v {
                let _ = write!(s, ",{:.16e},{:.16e}", z.re, z.im);
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Write to a sibling temporary file and rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("{} is not a file path", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let res = (|| -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(res?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints() {
        let g = TimeGrid::with_step(20.0, 1e-3).unwrap();
        assert_eq!(g.len(), 20_001);
        assert_eq!(g.nodes[0], 0.0);
        assert_eq!(*g.nodes.last().unwrap(), 20.0);
        assert!((g.step().unwrap() - 1e-3).abs() < 1e-15);
        assert!(TimeGrid::with_step(1.0, 2.0).is_err());
    }

    #[test]
    fn graded_grid_clusters_at_zero() {
        let g = TimeGrid::graded_for(0.5, 10.0, 100).unwrap();
        assert_eq!(g.nodes[0], 0.0);
        assert_eq!(*g.nodes.last().unwrap(), 10.0);
        assert!(g.nodes[1] - g.nodes[0] < g.nodes[100] - g.nodes[99]);
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(g.step().is_none());
    }

    #[test]
    fn csv_layout_and_atomic_write() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        let v = vec![vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)]; 3];
        let tr = Trajectory::new(g, v).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,re(x_1),im(x_1),re(x_2),im(x_2)");
        assert_eq!(csv.lines().count(), 4);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        tr.write_csv(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), csv);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = TimeGrid::uniform(1.0, 1).unwrap();
        assert!(Trajectory::new(g.clone(), vec![vec![Complex64::new(f64::NAN, 0.0)]; 2]).is_err());
        assert!(Trajectory::new(g, vec![vec![Complex64::new(0.0, 0.0)]; 3]).is_err());
    }

    #[test]
    fn sampling_onto_coarser_grid() {
        let fine = TimeGrid::uniform(1.0, 4).unwrap();
        let tr =
            Trajectory::new(fine.clone(), fine.nodes.iter().map(|&t| vec![Complex64::new(t, 0.0)]).collect()).unwrap();
        let coarse = TimeGrid::uniform(1.0, 2).unwrap();
        let s = tr.sample_at(&coarse).unwrap();
        assert_eq!(s.values[1][0].re, 0.5);
    }
}
