//! Dense complex linear algebra over tensor-product spaces.
//!
//! Flat indices follow the standard Kronecker convention: the first factor is
//! the slowest-varying digit, the last factor the fastest. Every routine that
//! touches a subsystem addresses it by factor index and derives strides from
//! [`TruncatedFockSpace`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity tolerance for states built directly from coefficients.
pub const HERMITIAN_TOL_CONSTRUCTED: f64 = 1e-12;
/// Hermiticity tolerance for states produced by time evolution.
pub const HERMITIAN_TOL_EVOLVED: f64 = 1e-10;
/// Lowest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

/// Largest dense matrix side we are willing to allocate.
pub const MAX_DENSE_DIM: usize = 4096;

/// Dimension bookkeeping for a tensor product of truncated factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedFockSpace {
    factor_dims: Vec<usize>,
}

impl TruncatedFockSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        if let Some(i) = factor_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidSpace(format!("factor {i} has dimension 0")));
        }
        factor_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("total dimension overflows".into()))?;
        Ok(Self { factor_dims })
    }

    /// `n` qubit factors.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut factor_dims = self.factor_dims.clone();
        factor_dims.extend_from_slice(&other.factor_dims);
        Self { factor_dims }
    }

    /// Stride of each factor in the flat index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factor_dims.len()];
        for i in (0..self.factor_dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.factor_dims[i + 1];
        }
        strides
    }

    /// Digit of `factor` in the flat index `flat`.
    pub fn digit(&self, flat: usize, factor: usize) -> usize {
        (flat / self.strides()[factor]) % self.factor_dims[factor]
    }

    pub fn flat_index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.factor_dims.len());
        digits
            .iter()
            .zip(&self.factor_dims)
            .fold(0, |acc, (&d, &n)| acc * n + d)
    }

    fn check_factor(&self, index: usize) -> Result<()> {
        if index >= self.factor_dims.len() {
            return Err(Error::FactorOutOfRange {
                index,
                count: self.factor_dims.len(),
            });
        }
        Ok(())
    }
}

/// Dense pure state. `tail_weight` is the probability known to be missing
/// because of truncation; the vector is never renormalised to hide it.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: TruncatedFockSpace,
    amplitudes: CVector,
    tail_weight: f64,
}

impl StateVector {
    pub fn new(space: TruncatedFockSpace, amplitudes: CVector, tail_weight: f64) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                actual: amplitudes.len(),
            });
        }
        if !(0.0..=1.0).contains(&tail_weight) {
            return Err(Error::InvalidState(format!(
                "tail weight {tail_weight} outside [0, 1]"
            )));
        }
        let norm_sqr = amplitudes.norm_squared();
        if norm_sqr > 1.0 + 1e-10 || norm_sqr < 1.0 - tail_weight - 1e-10 {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sqr} inconsistent with tail weight {tail_weight}"
            )));
        }
        Ok(Self {
            space,
            amplitudes,
            tail_weight,
        })
    }

    pub fn basis(space: TruncatedFockSpace, index: usize) -> Result<Self> {
        let dim = space.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amplitudes = CVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            amplitudes,
            tail_weight: 0.0,
        })
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }
}

/// Dense mixed state with its factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: TruncatedFockSpace,
    matrix: CMatrix,
    tail_weight: f64,
}

impl DensityOperator {
    /// Wraps a matrix without checking physical validity; see [`Self::validate`].
    pub fn new(space: TruncatedFockSpace, matrix: CMatrix, tail_weight: f64) -> Result<Self> {
        let dim = space.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            space,
            matrix,
            tail_weight,
        })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        Self {
            space: psi.space().clone(),
            matrix: a * a.adjoint(),
            tail_weight: psi.tail_weight(),
        }
    }

    pub fn space(&self) -> &TruncatedFockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tail_weight(&self) -> f64 {
        self.tail_weight
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = eig_hermitian_with_tol(&self.matrix, HERMITIAN_TOL_EVOLVED)?;
        Ok(eig.first().copied().unwrap_or(0.0))
    }

    /// Checks Hermiticity at `hermitian_tol`, a real trace inside
    /// `[1 - tail_weight - 1e-10, 1 + 1e-10]`, and eigenvalues ≥ −1e-10.
    pub fn validate(&self, hermitian_tol: f64) -> Result<()> {
        let dev = self.hermiticity_error();
        if dev > hermitian_tol {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: hermitian_tol,
            });
        }
        let tr = self.trace();
        if tr.im.abs() > hermitian_tol * self.dim() as f64 {
            return Err(Error::InvalidState(format!("trace has imaginary part {}", tr.im)));
        }
        if tr.re > 1.0 + 1e-10 || tr.re < 1.0 - self.tail_weight - 1e-10 {
            return Err(Error::InvalidState(format!(
                "trace {} outside window for tail weight {:e}",
                tr.re, self.tail_weight
            )));
        }
        let min = self.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

/// Kronecker composition; the receiver supplies the slow index.
pub trait Kron {
    fn kron(&self, other: &Self) -> Self;
}

fn combined_tail(a: f64, b: f64) -> f64 {
    1.0 - (1.0 - a) * (1.0 - b)
}

impl Kron for StateVector {
    fn kron(&self, other: &Self) -> Self {
        Self {
            space: self.space.concat(&other.space),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            tail_weight: combined_tail(self.tail_weight, other.tail_weight),
        }
    }
}

impl Kron for DensityOperator {
    fn kron(&self, other: &Self) -> Self {
        Self {
            space: self.space.concat(&other.space),
            matrix: self.matrix.kronecker(&other.matrix),
            tail_weight: combined_tail(self.tail_weight, other.tail_weight),
        }
    }
}

fn checked_factor_set(space: &TruncatedFockSpace, factors: &[usize]) -> Result<Vec<usize>> {
    let mut set = factors.to_vec();
    for &f in &set {
        space.check_factor(f)?;
    }
    set.sort_unstable();
    set.dedup();
    Ok(set)
}

/// Splits every flat index into (kept part, traced part).
fn split_indices(space: &TruncatedFockSpace, keep: &[usize]) -> (Vec<usize>, Vec<usize>, usize, usize) {
    let dims = space.factor_dims();
    let strides = space.strides();
    let mut kept_idx = vec![0usize; space.total_dim()];
    let mut traced_idx = vec![0usize; space.total_dim()];
    let (mut kept_dim, mut traced_dim) = (1usize, 1usize);
    for f in 0..dims.len() {
        if keep.binary_search(&f).is_ok() {
            kept_dim *= dims[f];
        } else {
            traced_dim *= dims[f];
        }
    }
    for (flat, (k_out, t_out)) in kept_idx.iter_mut().zip(traced_idx.iter_mut()).enumerate() {
        let (mut k, mut t) = (0, 0);
        for f in 0..dims.len() {
            let digit = (flat / strides[f]) % dims[f];
            if keep.binary_search(&f).is_ok() {
                k = k * dims[f] + digit;
            } else {
                t = t * dims[f] + digit;
            }
        }
        *k_out = k;
        *t_out = t;
    }
    (kept_idx, traced_idx, kept_dim, traced_dim)
}

/// Traces out every factor not listed in `keep`. Kept factors retain their
/// relative order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let keep = checked_factor_set(rho.space(), keep)?;
    let (kept_idx, traced_idx, kept_dim, traced_dim) = split_indices(rho.space(), &keep);

    let mut groups: Vec<Vec<usize>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for (flat, &t) in traced_idx.iter().enumerate() {
        groups[t].push(flat);
    }
    let m = rho.matrix();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &i in group {
            for &j in group {
                out[(kept_idx[i], kept_idx[j])] += m[(i, j)];
            }
        }
    }
    let dims = keep.iter().map(|&f| rho.space().factor_dims()[f]).collect();
    DensityOperator::new(TruncatedFockSpace::new(dims)?, out, rho.tail_weight())
}

/// Reduced state of a pure vector: Σ_env |v_env⟩⟨v_env|. Zero amplitudes are
/// skipped, so sparse vectors over large spaces stay cheap.
pub fn partial_trace_pure(psi: &StateVector, keep: &[usize]) -> Result<DensityOperator> {
    let entries = psi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != C64::new(0.0, 0.0))
        .map(|(i, a)| (i, *a));
    partial_trace_sparse(psi.space(), entries, keep, psi.tail_weight())
}

/// As [`partial_trace_pure`] for a vector given by its nonzero entries
/// `(flat index, amplitude)`. Repeated indices are not merged.
pub fn partial_trace_sparse(
    space: &TruncatedFockSpace,
    entries: impl IntoIterator<Item = (usize, C64)>,
    keep: &[usize],
    tail_weight: f64,
) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let keep = checked_factor_set(space, keep)?;
    let dims = space.factor_dims();
    let strides = space.strides();
    let (mut kept_dim, mut traced_dim) = (1usize, 1usize);
    for (f, &d) in dims.iter().enumerate() {
        if keep.binary_search(&f).is_ok() {
            kept_dim *= d;
        } else {
            traced_dim = traced_dim.saturating_mul(d);
        }
    }
    if kept_dim > MAX_DENSE_DIM {
        return Err(Error::TooLarge {
            dim: kept_dim,
            limit: MAX_DENSE_DIM,
        });
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, C64)>> = Default::default();
    for (flat, amp) in entries {
        if flat >= space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                actual: flat,
            });
        }
        let (mut k, mut t) = (0, 0);
        for f in 0..dims.len() {
            let digit = (flat / strides[f]) % dims[f];
            if keep.binary_search(&f).is_ok() {
                k = k * dims[f] + digit;
            } else {
                t = t * dims[f] + digit;
            }
        }
        groups.entry(t).or_default().push((k, amp));
    }
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for group in groups.values() {
        for &(i, a) in group {
            for &(j, b) in group {
                out[(i, j)] += a * b.conj();
            }
        }
    }
    let kept_dims = keep.iter().map(|&f| dims[f]).collect();
    DensityOperator::new(TruncatedFockSpace::new(kept_dims)?, out, tail_weight)
}

/// Transposes the indices of one factor, leaving the others untouched.
pub fn partial_transpose(rho: &DensityOperator, factor: usize) -> Result<DensityOperator> {
    let space = rho.space();
    space.check_factor(factor)?;
    let stride = space.strides()[factor];
    let d = space.factor_dims()[factor];
    let n = rho.dim();
    let m = rho.matrix();
    let out = CMatrix::from_fn(n, n, |i, j| {
        let di = (i / stride) % d;
        let dj = (j / stride) % d;
        let src_i = i - di * stride + dj * stride;
        let src_j = j - dj * stride + di * stride;
        m[(src_i, src_j)]
    });
    DensityOperator::new(space.clone(), out, rho.tail_weight())
}

/// Reorders the factors of an operator: new factor `p` is old factor `order[p]`.
pub fn permute_factors(
    space: &TruncatedFockSpace,
    m: &CMatrix,
    order: &[usize],
) -> Result<(TruncatedFockSpace, CMatrix)> {
    let count = space.num_factors();
    let mut seen = vec![false; count];
    if order.len() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            actual: order.len(),
        });
    }
    for &o in order {
        space.check_factor(o)?;
        if std::mem::replace(&mut seen[o], true) {
            return Err(Error::InvalidSpace(format!("factor {o} repeated in permutation")));
        }
    }
    let new_space = TruncatedFockSpace::new(order.iter().map(|&o| space.factor_dims()[o]).collect())?;
    let n = space.total_dim();
    // map[new_flat] = old_flat
    let mut digits = vec![0usize; count];
    let mut old_digits = vec![0usize; count];
    let map: Vec<usize> = (0..n)
        .map(|flat| {
            for (p, dig) in digits.iter_mut().enumerate() {
                *dig = new_space.digit(flat, p);
            }
            for (p, &o) in order.iter().enumerate() {
                old_digits[o] = digits[p];
            }
            space.flat_index(&old_digits)
        })
        .collect();
    let out = CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]);
    Ok((new_space, out))
}

/// Largest |entry|.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest |a_ij − b_ij|.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest entry of |M − M†|.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Connected components of the nonzero pattern. Rows in distinct components
/// never couple, so the spectrum is the union of the block spectra.
fn nonzero_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)].norm_sqr() != 0.0 || m[(j, i)].norm_sqr() != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[root]].push(i);
    }
    blocks
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian matrix (tolerance 1e-10 on M − M†).
pub fn eig_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    eig_hermitian_with_tol(m, HERMITIAN_TOL_EVOLVED)
}

pub fn eig_hermitian_with_tol(m: &CMatrix, tol: f64) -> Result<Vec<f64>> {
    Ok(eigh_impl(m, tol, false)?.0)
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors (columns).
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let (values, vectors) = eigh_impl(m, HERMITIAN_TOL_EVOLVED, true)?;
    Ok((values, vectors.expect("vectors requested")))
}

fn eigh_impl(m: &CMatrix, tol: f64, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    check_square(m)?;
    let deviation = hermiticity_error(m);
    if deviation > tol {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: tol,
        });
    }
    let n = m.nrows();
    let mut pairs: Vec<(f64, Option<CVector>)> = Vec::with_capacity(n);
    for block in nonzero_blocks(m) {
        let k = block.len();
        let sub = CMatrix::from_fn(k, k, |i, j| {
            (m[(block[i], block[j])] + m[(block[j], block[i])].conj()) * 0.5
        });
        if k == 1 {
            let v = want_vectors.then(|| {
                let mut v = CVector::zeros(n);
                v[block[0]] = C64::new(1.0, 0.0);
                v
            });
            pairs.push((sub[(0, 0)].re, v));
            continue;
        }
        let eig = SymmetricEigen::new(sub);
        for (idx, &value) in eig.eigenvalues.iter().enumerate() {
            let v = want_vectors.then(|| {
                let mut v = CVector::zeros(n);
                for (row, &target) in block.iter().enumerate() {
                    v[target] = eig.eigenvectors[(row, idx)];
                }
                v
            });
            pairs.push((value, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = want_vectors.then(|| {
        let mut out = CMatrix::zeros(n, n);
        for (col, (_, v)) in pairs.iter().enumerate() {
            out.set_column(col, v.as_ref().expect("vector present"));
        }
        out
    });
    Ok((values, vectors))
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// exp(scale · M) by scaling and squaring around a Taylor series.
pub fn mat_exp(m: &CMatrix, scale: f64) -> CMatrix {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "mat_exp needs a square matrix");
    let a = m * C64::new(scale, 0.0);
    let norm = one_norm(&a);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(0.5f64.powi(squarings), 0.0);

    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=40 {
        term = &term * &a * C64::new(1.0 / k as f64, 0.0);
        result += &term;
        if one_norm(&term) <= f64::EPSILON * 1e-2 * one_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Largest |(U†U − I)_ij|.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    fn bell_phi_plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::new(
            TruncatedFockSpace::qubits(2).unwrap(),
            CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]),
            0.0,
        )
        .unwrap();
        DensityOperator::from_pure(&psi)
    }

    fn projector(dim: usize, idx: usize) -> DensityOperator {
        let space = TruncatedFockSpace::new(vec![dim]).unwrap();
        DensityOperator::from_pure(&StateVector::basis(space, idx).unwrap())
    }

    #[test]
    fn space_rejects_zero_factor() {
        assert!(TruncatedFockSpace::new(vec![2, 0, 3]).is_err());
        assert!(TruncatedFockSpace::new(vec![]).is_err());
        let sp = TruncatedFockSpace::new(vec![2, 3, 4]).unwrap();
        assert_eq!(sp.total_dim(), 24);
        assert_eq!(sp.strides(), vec![12, 4, 1]);
        assert_eq!(sp.flat_index(&[1, 2, 3]), 23);
        assert_eq!(sp.digit(23, 1), 2);
    }

    #[test]
    fn state_vector_tracks_norm_deficit() {
        let sp = TruncatedFockSpace::new(vec![2]).unwrap();
        let short = CVector::from_vec(vec![c(0.9, 0.0), c(0.0, 0.0)]);
        assert!(StateVector::new(sp.clone(), short.clone(), 0.0).is_err());
        assert!(StateVector::new(sp, short, 0.2).is_ok());
    }

    #[test]
    fn kron_identities() {
        let i2 = DensityOperator::new(
            TruncatedFockSpace::new(vec![2]).unwrap(),
            CMatrix::identity(2, 2),
            0.0,
        )
        .unwrap();
        let i4 = i2.kron(&i2);
        assert_eq!(i4.matrix(), &CMatrix::identity(4, 4));
        assert_eq!(i4.space().factor_dims(), &[2, 2]);

        let p = projector(2, 0).kron(&projector(2, 1));
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == 1 && j == 1 { 1.0 } else { 0.0 };
                assert_eq!(p.matrix()[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let r = partial_trace(&bell_phi_plus(), &[0]).unwrap();
        let expected = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!((r.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        let rho = bell_phi_plus();
        assert!(matches!(partial_trace(&rho, &[]), Err(Error::EmptyKeep)));
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::FactorOutOfRange { index: 2, count: 2 })
        ));
    }

    #[test]
    fn partial_trace_pure_matches_dense() {
        let sp = TruncatedFockSpace::new(vec![2, 3, 2]).unwrap();
        let raw: Vec<C64> = (0..12).map(|i| c((i as f64).sin(), (i as f64 * 0.7).cos())).collect();
        let v = CVector::from_vec(raw);
        let v = &v / C64::new(v.norm(), 0.0);
        let psi = StateVector::new(sp, v, 0.0).unwrap();
        let dense = partial_trace(&DensityOperator::from_pure(&psi), &[0, 2]).unwrap();
        let sparse = partial_trace_pure(&psi, &[2, 0]).unwrap();
        assert!((dense.matrix() - sparse.matrix()).norm() < 1e-14);
    }

    #[test]
    fn partial_transpose_of_bell_spectrum() {
        let pt = partial_transpose(&bell_phi_plus(), 1).unwrap();
        let eig = eig_hermitian(pt.matrix()).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{eig:?}");
        }
        assert!(partial_transpose(&bell_phi_plus(), 2).is_err());
    }

    #[test]
    fn partial_transpose_is_involution() {
        let rho = bell_phi_plus();
        let twice = partial_transpose(&partial_transpose(&rho, 0).unwrap(), 0).unwrap();
        assert_eq!(twice.matrix(), rho.matrix());
    }

    #[test]
    fn partial_transpose_of_product_is_psd() {
        let rho = projector(2, 0).kron(&projector(3, 2));
        let eig = eig_hermitian(partial_transpose(&rho, 1).unwrap().matrix()).unwrap();
        assert!(eig[0] >= 0.0);
    }

    #[test]
    fn eig_trivial_cases() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]));
        assert_eq!(eig_hermitian(&d).unwrap(), vec![1.0, 2.0, 3.0]);
        let px = eig_hermitian(&pauli_x()).unwrap();
        assert!((px[0] + 1.0).abs() < 1e-14 && (px[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_residuals() {
        let n = 9;
        let m = CMatrix::from_fn(n, n, |i, j| {
            let x = (i * 7 + j * 3) as f64;
            if i == j {
                c(x.sin(), 0.0)
            } else if i < j {
                c((x * 0.3).cos(), (x * 0.11).sin())
            } else {
                let y = (j * 7 + i * 3) as f64;
                c((y * 0.3).cos(), -(y * 0.11).sin())
            }
        });
        let (values, vectors) = eigh(&m).unwrap();
        for (k, &lambda) in values.iter().enumerate() {
            let v = vectors.column(k).into_owned();
            let r = &m * &v - &v * C64::new(lambda, 0.0);
            assert!(r.norm() < 1e-8);
        }
    }

    #[test]
    fn block_decomposition_keeps_full_spectrum() {
        // two decoupled 2x2 blocks interleaved
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        m[(2, 2)] = c(-1.0, 0.0);
        m[(0, 2)] = c(0.0, 0.5);
        m[(2, 0)] = c(0.0, -0.5);
        m[(1, 1)] = c(2.0, 0.0);
        m[(3, 3)] = c(2.0, 0.0);
        m[(1, 3)] = c(1.0, 0.0);
        m[(3, 1)] = c(1.0, 0.0);
        let eig = eig_hermitian(&m).unwrap();
        let r = (1.25f64).sqrt();
        let expected = [-r, 1.0, r, 3.0];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{eig:?}");
        }
    }

    #[test]
    fn mat_exp_known_values() {
        let z = CMatrix::zeros(3, 3);
        assert_eq!(mat_exp(&z, 1.0), CMatrix::identity(3, 3));

        let gen = pauli_x() * c(0.0, -1.0);
        let u = mat_exp(&gen, std::f64::consts::FRAC_PI_2);
        let expected = pauli_x() * c(0.0, -1.0);
        assert!((u - expected).norm() < 1e-14);
    }

    #[test]
    fn permute_factors_swaps_kron_order() {
        let a = projector(2, 1);
        let b = projector(3, 2);
        let ab = a.kron(&b);
        let (space, swapped) = permute_factors(ab.space(), ab.matrix(), &[1, 0]).unwrap();
        assert_eq!(space.factor_dims(), &[3, 2]);
        assert_eq!(&swapped, b.kron(&a).matrix());
        assert!(permute_factors(ab.space(), ab.matrix(), &[0, 0]).is_err());
    }

    #[test]
    fn validate_flags_negative_eigenvalue() {
        let pt = partial_transpose(&bell_phi_plus(), 1).unwrap();
        assert!(bell_phi_plus().validate(HERMITIAN_TOL_CONSTRUCTED).is_ok());
        assert!(pt.validate(HERMITIAN_TOL_CONSTRUCTED).is_err());
    }
}
