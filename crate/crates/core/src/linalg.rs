//! Dense complex linear algebra: the square-matrix newtype, max-norm
//! helpers, eigenvalue clusters and numerical Jordan decompositions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Relative separation below which computed eigenvalues are merged into one cluster.
pub const CLUSTER_RTOL: f64 = 1e-6;
/// T with max-norm condition number above this is treated as numerically singular.
pub const MAX_SIMILARITY_COND: f64 = 1e10;

/// A finite square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix(CMatrix);

impl SquareMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return domain(format!("matrix must be square and non-empty, got {}x{}", m.nrows(), m.ncols()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("matrix entries must be finite");
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return domain("matrix rows must all have length equal to the number of rows");
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn identity(d: usize) -> Self {
        Self(CMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(CMatrix::zeros(d, d))
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        Self(CMatrix::from_diagonal(&CVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Operator norm induced by the max norm (maximum absolute row sum).
    pub fn max_norm(&self) -> f64 {
        op_norm(&self.0)
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim()).map(|i| self.0.row(i).iter().copied().collect()).collect()
    }
}

/// Operator norm induced by the vector max norm: the maximum absolute row sum.
pub fn op_norm(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Vector max norm.
pub fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest absolute entry.
pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn mat_vec(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().lu().try_inverse().ok_or_else(|| Error::Domain("matrix is singular".into()))
}

/// Upper shift matrix N of size d (ones on the first superdiagonal).
pub fn shift_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if j == i + 1 { C1 } else { C0 })
}

/// All eigenvalues of `a` (with repetition) from a complex Schur form.
pub fn schur_eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let d = a.nrows();
    if d == 1 {
        return Ok(vec![a[(0, 0)]]);
    }
    let scale = max_abs_entry(a);
    if scale == 0.0 {
        return Ok(vec![C0; d]);
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100 * d.max(10))
        .ok_or(Error::EigenNonConvergence { dim: d })?;
    let (_, t) = schur.unpack();
    let mut out = Vec::with_capacity(d);
    let mut m = 0;
    while m < d {
        if m + 1 < d && t[(m + 1, m)].norm() > 64.0 * f64::EPSILON * scale {
            // residual 2x2 block: eigenvalues from its characteristic polynomial
            let (p, q, r, s) = (t[(m, m)], t[(m, m + 1)], t[(m + 1, m)], t[(m + 1, m + 1)]);
            let half_tr = (p + s) * 0.5;
            let disc = ((p - s) * 0.5 * ((p - s) * 0.5) + q * r).sqrt();
            out.push(half_tr + disc);
            out.push(half_tr - disc);
            m += 2;
        } else {
            out.push(t[(m, m)]);
            m += 1;
        }
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenNonConvergence { dim: d });
    }
    Ok(out)
}

/// A group of computed eigenvalues treated as one exact eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Mean of the member eigenvalues.
    pub value: Complex64,
    pub multiplicity: usize,
    /// Largest distance of a member from the mean.
    pub spread: f64,
}

/// Group eigenvalues whose pairwise distances chain together below `tol`.
pub fn cluster_eigenvalues(eigs: &[Complex64], tol: f64) -> Vec<Cluster> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eigs[i] - eigs[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for (i, &e) in eigs.iter().enumerate() {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(e),
            None => groups.push((r, vec![e])),
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|(_, g)| {
            let value = g.iter().sum::<Complex64>() / g.len() as f64;
            let spread = g.iter().map(|z| (z - value).norm()).fold(0.0, f64::max);
            Cluster { value, multiplicity: g.len(), spread }
        })
        .collect();
    // deterministic order: descending real part, then descending imaginary part
    clusters.sort_by(|a, b| b.value.re.total_cmp(&a.value.re).then(b.value.im.total_cmp(&a.value.im)));
    clusters
}

/// One Jordan block λ·I + N of size `size`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct JordanBlock {
    pub lambda: Complex64,
    pub size: usize,
}

/// Caller-declared Jordan structure for one eigenvalue cluster.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeclaredCluster {
    /// Approximate eigenvalue; the `sum(sizes)` computed eigenvalues nearest to it are merged.
    pub lambda: Complex64,
    pub sizes: Vec<usize>,
}

/// A = T · blockdiag(λ_i I + N) · T⁻¹.
#[derive(Debug, Clone)]
pub struct JordanDecomposition {
    pub t: CMatrix,
    pub t_inv: CMatrix,
    pub blocks: Vec<JordanBlock>,
    pub cond: f64,
    /// Max entry of T⁻¹AT − J.
    pub residual: f64,
}

impl JordanDecomposition {
    pub fn jordan_matrix(&self) -> CMatrix {
        let d = self.t.nrows();
        let mut j = CMatrix::zeros(d, d);
        let mut off = 0;
        for b in &self.blocks {
            for k in 0..b.size {
                j[(off + k, off + k)] = b.lambda;
                if k + 1 < b.size {
                    j[(off + k, off + k + 1)] = C1;
                }
            }
            off += b.size;
        }
        j
    }

    pub fn is_diagonal(&self) -> bool {
        self.blocks.iter().all(|b| b.size == 1)
    }
}

fn singular_values_and_v(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    // nalgebra's thin SVD needs rows >= cols for a full V; pad with zero rows
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    (sv, vt.adjoint())
}

/// Columns of V for the `k` smallest singular values, plus the singular
/// values in ascending order.
pub(crate) fn null_space(m: &CMatrix, k: usize) -> (CMatrix, Vec<f64>) {
    let (sv, v) = singular_values_and_v(m);
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let n = v.nrows();
    let mut basis = CMatrix::zeros(n, k);
    for (col, &i) in idx.iter().take(k).enumerate() {
        basis.set_column(col, &v.column(i));
    }
    (basis, idx.iter().map(|&i| sv[i]).collect())
}

/// Normalize so the largest-modulus entry of `col0` becomes 1 and apply the same factor to `cols`.
fn normalize_chain(t: &mut CMatrix, first: usize, len: usize) {
    let lead = t.column(first).iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C1);
    if lead.norm() == 0.0 {
        return;
    }
    let s = C1 / lead;
    for c in first..first + len {
        for r in 0..t.nrows() {
            t[(r, c)] *= s;
        }
    }
}

fn jordan_block_sizes_from_ranks(a: &CMatrix, lambda: Complex64, mult: usize, norm: f64) -> Result<Vec<usize>> {
    let d = a.nrows();
    let b = a - CMatrix::identity(d, d) * lambda;
    let mut power = CMatrix::identity(d, d);
    // nullities[k] = dim ker (A - λ)^k
    let mut nullities = vec![0usize];
    for k in 1..=mult {
        power = &power * &b;
        let scale = norm.powi(k as i32).max(f64::MIN_POSITIVE);
        let (sv, _) = singular_values_and_v(&power);
        let zero_tol = 1e-9 * scale;
        let nonzero_tol = 1e-5 * scale;
        let mut nullity = 0;
        for &s in sv.iter().take(d) {
            if s <= zero_tol {
                nullity += 1;
            } else if s < nonzero_tol {
                return Err(Error::StructureAmbiguity {
                    lambda,
                    detail: format!("singular value {s:e} of (A - λI)^{k} falls in the rank gap"),
                });
            }
        }
        nullities.push(nullity);
        if nullity >= mult {
            break;
        }
    }
    let last = *nullities.last().expect("non-empty");
    if last != mult {
        return Err(Error::StructureAmbiguity {
            lambda,
            detail: format!("generalized eigenspace has dimension {last}, expected {mult}"),
        });
    }
    // blocks of size >= k: n_k - n_{k-1}
    let kmax = nullities.len() - 1;
    let at_least: Vec<usize> = (1..=kmax).map(|k| nullities[k] - nullities[k - 1]).collect();
    let mut sizes = Vec::new();
    for k in (1..=kmax).rev() {
        let count_ge_k = at_least[k - 1];
        let count_ge_k1 = if k < kmax { at_least[k] } else { 0 };
        for _ in 0..count_ge_k.saturating_sub(count_ge_k1) {
            sizes.push(k);
        }
    }
    Ok(sizes)
}

/// Columns X (d × m) with A X = X J for J = blockdiag(λI + N) of the given sizes.
fn chains_for_cluster(a: &CMatrix, lambda: Complex64, sizes: &[usize], norm: f64) -> Result<CMatrix> {
    let d = a.nrows();
    let m: usize = sizes.iter().sum();
    if sizes.iter().all(|&s| s == 1) {
        let b = a - CMatrix::identity(d, d) * lambda;
        let (basis, sv) = null_space(&b, m);
        let tol = 1e-7 * norm.max(f64::MIN_POSITIVE);
        if sv[m - 1] > tol || (m < d && sv[m] <= tol) {
            return Err(Error::StructureAmbiguity {
                lambda,
                detail: format!("eigenspace dimension does not match multiplicity {m}"),
            });
        }
        let mut t = basis;
        for c in 0..m {
            normalize_chain(&mut t, c, 1);
        }
        return Ok(t);
    }
    let mut j = CMatrix::zeros(m, m);
    let mut off = 0;
    for &s in sizes {
        for k in 0..s {
            j[(off + k, off + k)] = lambda;
            if k + 1 < s {
                j[(off + k, off + k + 1)] = C1;
            }
        }
        off += s;
    }
    // vec(A X - X J) = (I_m ⊗ A - Jᵀ ⊗ I_d) vec(X), column-major vec
    let n = d * m;
    let mut op = CMatrix::zeros(n, n);
    for col in 0..m {
        for r in 0..d {
            for c in 0..d {
                op[(col * d + r, col * d + c)] += a[(r, c)];
            }
        }
        for k in 0..m {
            let jk = j[(k, col)];
            if jk != C0 {
                for r in 0..d {
                    op[(col * d + r, k * d + r)] -= jk;
                }
            }
        }
    }
    let nu: usize = sizes.iter().map(|&x| sizes.iter().map(|&y| x.min(y)).sum::<usize>()).sum();
    let (basis, sv) = null_space(&op, nu);
    let tol = 1e-7 * norm.max(f64::MIN_POSITIVE);
    if sv[nu - 1] > tol || (nu < n && sv[nu] <= tol) {
        return Err(Error::StructureAmbiguity {
            lambda,
            detail: format!(
                "commutant dimension mismatch for block sizes {sizes:?} (singular values {:e}, {:e})",
                sv[nu - 1],
                sv.get(nu).copied().unwrap_or(f64::INFINITY)
            ),
        });
    }
    // fixed, generic combination of the null-space basis
    let mut vecx = CVector::zeros(n);
    for l in 0..nu {
        let coef = Complex64::from_polar(1.0 / (1.0 + 0.37 * l as f64), 0.7 * l as f64);
        vecx += basis.column(l) * coef;
    }
    let mut x = CMatrix::from_column_slice(d, m, vecx.as_slice());
    let mut off = 0;
    for &s in sizes {
        normalize_chain(&mut x, off, s);
        off += s;
    }
    Ok(x)
}

/// Jordan decomposition following a fixed policy: well-separated eigenvalues
/// are treated as simple; clusters take their structure from `declared` when
/// given, otherwise from the rank sequence of (A − λI)^k when that sequence is
/// unambiguous; anything else is a [`Error::StructureAmbiguity`].
pub fn jordan_decompose(a: &CMatrix, declared: &[DeclaredCluster]) -> Result<JordanDecomposition> {
    let d = a.nrows();
    let norm = op_norm(a);
    let eigs = schur_eigenvalues(a)?;
    let mut clusters = cluster_eigenvalues(&eigs, CLUSTER_RTOL * norm);

    if !declared.is_empty() {
        let mut remaining = eigs.clone();
        let mut forced = Vec::new();
        for dc in declared {
            let m: usize = dc.sizes.iter().sum();
            if m == 0 || m > remaining.len() {
                return domain(format!("declared structure {:?} does not fit the spectrum", dc.sizes));
            }
            remaining.sort_by(|x, y| (x - dc.lambda).norm().total_cmp(&(y - dc.lambda).norm()));
            let taken: Vec<Complex64> = remaining.drain(..m).collect();
            let value = taken.iter().sum::<Complex64>() / m as f64;
            forced.push((value, dc.sizes.clone()));
        }
        clusters = cluster_eigenvalues(&remaining, CLUSTER_RTOL * norm);
        let mut t_cols = Vec::new();
        let mut blocks = Vec::new();
        for (value, sizes) in &forced {
            t_cols.push(chains_for_cluster(a, *value, sizes, norm)?);
            blocks.extend(sizes.iter().map(|&s| JordanBlock { lambda: *value, size: s }));
        }
        for c in &clusters {
            let sizes = structure_for(a, c, norm)?;
            t_cols.push(chains_for_cluster(a, c.value, &sizes, norm)?);
            blocks.extend(sizes.iter().map(|&s| JordanBlock { lambda: c.value, size: s }));
        }
        return assemble(a, t_cols, blocks, norm);
    }

    let mut t_cols = Vec::new();
    let mut blocks = Vec::new();
    for c in &clusters {
        let sizes = structure_for(a, c, norm)?;
        t_cols.push(chains_for_cluster(a, c.value, &sizes, norm)?);
        blocks.extend(sizes.iter().map(|&s| JordanBlock { lambda: c.value, size: s }));
    }
    debug_assert_eq!(blocks.iter().map(|b| b.size).sum::<usize>(), d);
    assemble(a, t_cols, blocks, norm)
}

fn structure_for(a: &CMatrix, c: &Cluster, norm: f64) -> Result<Vec<usize>> {
    if c.multiplicity == 1 {
        Ok(vec![1])
    } else {
        jordan_block_sizes_from_ranks(a, c.value, c.multiplicity, norm)
    }
}

fn assemble(a: &CMatrix, cols: Vec<CMatrix>, blocks: Vec<JordanBlock>, norm: f64) -> Result<JordanDecomposition> {
    let d = a.nrows();
    let mut t = CMatrix::zeros(d, d);
    let mut off = 0;
    for c in &cols {
        t.view_mut((0, off), (d, c.ncols())).copy_from(c);
        off += c.ncols();
    }
    let t_inv = inverse(&t).map_err(|_| Error::StructureAmbiguity {
        lambda: blocks.first().map(|b| b.lambda).unwrap_or(C0),
        detail: "similarity matrix is singular".into(),
    })?;
    let cond = op_norm(&t) * op_norm(&t_inv);
    if !(cond <= MAX_SIMILARITY_COND) {
        return Err(Error::StructureAmbiguity {
            lambda: blocks.first().map(|b| b.lambda).unwrap_or(C0),
            detail: format!("eigenvectors nearly dependent (cond {cond:e})"),
        });
    }
    let mut dec = JordanDecomposition { t, t_inv, blocks, cond, residual: 0.0 };
    let recon = &dec.t_inv * a * &dec.t;
    dec.residual = max_abs_entry(&(recon - dec.jordan_matrix()));
    let tol = 1e-8 * cond * norm.max(f64::MIN_POSITIVE);
    if dec.residual > tol {
        return Err(Error::SimilarityResidual { residual: dec.residual, tolerance: tol });
    }
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> CMatrix {
        SquareMatrix::from_real_rows(rows).unwrap().into_matrix()
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(SquareMatrix::from_rows(&[vec![C1, C0]]).is_err());
        assert!(SquareMatrix::new(CMatrix::from_element(1, 1, Complex64::new(f64::NAN, 0.0))).is_err());
    }

    #[test]
    fn op_norm_is_max_row_sum() {
        let m = real(&[&[1.0, -2.0], &[0.5, 0.25]]);
        assert_eq!(op_norm(&m), 3.0);
    }

    #[test]
    fn clusters_merge_chains() {
        let e = [Complex64::new(1.0, 0.0), Complex64::new(1.0 + 1e-9, 0.0), Complex64::new(-3.0, 0.0)];
        let c = cluster_eigenvalues(&e, 1e-6);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].multiplicity, 2);
        assert_eq!(c[1].value, Complex64::new(-3.0, 0.0));
    }

    #[test]
    fn diagonal_matrix_gives_identity_similarity() {
        let a = real(&[&[-1.0, 0.0], &[0.0, -2.0]]);
        let dec = jordan_decompose(&a, &[]).unwrap();
        assert!(dec.is_diagonal());
        assert!((dec.t.clone() - CMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn single_jordan_block_detected() {
        let a = real(&[&[-1.0, 1.0], &[0.0, -1.0]]);
        let dec = jordan_decompose(&a, &[]).unwrap();
        assert_eq!(dec.blocks, vec![JordanBlock { lambda: Complex64::new(-1.0, 0.0), size: 2 }]);
        assert!(dec.residual < 1e-12);
    }

    #[test]
    fn lower_triangular_defective() {
        let a = real(&[&[-1.0, 0.0], &[-2.0, -1.0]]);
        let dec = jordan_decompose(&a, &[]).unwrap();
        assert_eq!(dec.blocks.len(), 1);
        assert_eq!(dec.blocks[0].size, 2);
        assert!((dec.blocks[0].lambda - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_is_diagonalizable() {
        let dec = jordan_decompose(&CMatrix::identity(3, 3), &[]).unwrap();
        assert!(dec.is_diagonal());
        assert_eq!(dec.blocks.len(), 3);
    }

    #[test]
    fn mixed_structure_with_repeated_eigenvalue() {
        // λ=2 with blocks {2,1}, plus λ=-1
        let j = real(&[&[2.0, 1.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[0.0, 0.0, 0.0, -1.0]]);
        let s = real(&[&[1.0, 0.2, 0.0, 0.1], &[0.0, 1.0, 0.3, 0.0], &[0.1, 0.0, 1.0, 0.2], &[0.0, 0.4, 0.0, 1.0]]);
        let a = &s * &j * inverse(&s).unwrap();
        let dec = jordan_decompose(&a, &[]).unwrap();
        let mut sizes: Vec<usize> = dec.blocks.iter().map(|b| b.size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);
        assert!(dec.residual < 1e-9);
    }

    #[test]
    fn declared_structure_is_honoured() {
        let a = real(&[&[-1.0, 1.0], &[0.0, -1.0]]);
        let dec =
            jordan_decompose(&a, &[DeclaredCluster { lambda: Complex64::new(-1.0, 0.0), sizes: vec![2] }]).unwrap();
        assert_eq!(dec.blocks.len(), 1);
        let wrong = jordan_decompose(&a, &[DeclaredCluster { lambda: Complex64::new(-1.0, 0.0), sizes: vec![1, 1] }]);
        assert!(matches!(wrong, Err(Error::StructureAmbiguity { .. })));
    }

    #[test]
    fn complex_pair_from_real_rotation() {
        let a = real(&[&[0.0, -2.0], &[2.0, 0.0]]);
        let mut e = schur_eigenvalues(&a).unwrap();
        e.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((e[0] - Complex64::new(0.0, -2.0)).norm() < 1e-12);
        assert!((e[1] - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
