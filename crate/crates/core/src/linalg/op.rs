use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Maps a multi-index to its linear position, first factor most significant.
pub fn linear_index(dims: &[usize], digits: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), digits.len());
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

/// Inverse of [`linear_index`].
pub fn multi_index(dims: &[usize], mut index: usize) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, &n) in digits.iter_mut().zip(dims).rev() {
        *slot = index % n;
        index /= n;
    }
    digits
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Square complex operator on a tensor product of subsystems.
///
/// The basis index of `|i_1 ... i_k>` is `i_1 (d_2...d_k) + ... + i_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Op {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl Op {
    pub fn new(dims: Vec<usize>, mat: CMatrix) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("invalid subsystem dims {dims:?}")));
        }
        let side: usize = dims.iter().product();
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, dims {dims:?} require side {side}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Op { dims, mat })
    }

    /// Single-factor operator.
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        Op::new(vec![mat.nrows()], mat)
    }

    /// Build from real entries given row by row.
    pub fn from_real_rows(dims: Vec<usize>, rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mat = CMatrix::from_fn(n, n, |i, j| c(rows[i].get(j).copied().unwrap_or(f64::NAN), 0.0));
        Op::new(dims, mat)
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let side = dims.iter().product();
        Op { dims: dims.to_vec(), mat: CMatrix::zeros(side, side) }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let side = dims.iter().product();
        Op { dims: dims.to_vec(), mat: CMatrix::identity(side, side) }
    }

    /// `I / d`, the maximally mixed state.
    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let side: usize = dims.iter().product();
        Op::identity(dims).scale(1.0 / side as f64)
    }

    /// `|i><j|` on the given dims.
    pub fn matrix_unit(dims: &[usize], i: usize, j: usize) -> Self {
        let mut op = Op::zeros(dims);
        op.mat[(i, j)] = c(1.0, 0.0);
        op
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn real_trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn adjoint(&self) -> Op {
        Op { dims: self.dims.clone(), mat: self.mat.adjoint() }
    }

    pub fn transpose(&self) -> Op {
        Op { dims: self.dims.clone(), mat: self.mat.transpose() }
    }

    pub fn scale(&self, f: f64) -> Op {
        Op { dims: self.dims.clone(), mat: &self.mat * c(f, 0.0) }
    }

    pub fn scale_complex(&self, f: C64) -> Op {
        Op { dims: self.dims.clone(), mat: &self.mat * f }
    }

    /// Matrix product; both factors must carry the same dims.
    pub fn compose(&self, other: &Op) -> Result<Op> {
        self.check_same_dims(other, "product")?;
        Ok(Op { dims: self.dims.clone(), mat: &self.mat * &other.mat })
    }

    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Op> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("conjugating unitary".into()));
        }
        Ok(Op { dims: self.dims.clone(), mat: u * &self.mat * u.adjoint() })
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Op) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on operators of different size");
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Same matrix regrouped into a different factorization of equal total dimension.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Op> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot regroup dimension {} as {dims:?}",
                self.dim()
            )));
        }
        self.dims = dims;
        Ok(self)
    }

    pub fn is_finite(&self) -> bool {
        self.mat.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Hermitian part `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Op {
        Op { dims: self.dims.clone(), mat: (&self.mat + self.mat.adjoint()) * c(0.5, 0.0) }
    }

    fn check_same_dims(&self, other: &Op, what: &str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{what} of operators with dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    /// Checked sum.
    pub fn try_add(&self, other: &Op) -> Result<Op> {
        self.check_same_dims(other, "sum")?;
        Ok(Op { dims: self.dims.clone(), mat: &self.mat + &other.mat })
    }

    /// Accumulate `f * other` into `self`.
    pub fn add_scaled(&mut self, f: f64, other: &Op) {
        assert_eq!(self.dims, other.dims, "add_scaled on mismatched dims");
        self.mat += &other.mat * c(f, 0.0);
    }
}

impl Add for &Op {
    type Output = Op;
    fn add(self, rhs: &Op) -> Op {
        self.try_add(rhs).expect("operator sum with mismatched dims")
    }
}

impl Sub for &Op {
    type Output = Op;
    fn sub(self, rhs: &Op) -> Op {
        assert_eq!(self.dims, rhs.dims, "operator difference with mismatched dims");
        Op { dims: self.dims.clone(), mat: &self.mat - &rhs.mat }
    }
}

impl Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Op {
    type Output = Op;
    fn mul(self, rhs: f64) -> Op {
        self.scale(rhs)
    }
}

/// Pure vector on a tensor product of subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    dims: Vec<usize>,
    vec: CVector,
}

impl Ket {
    pub fn new(dims: Vec<usize>, vec: CVector) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != vec.len() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} with dims {dims:?}",
                vec.len()
            )));
        }
        if vec.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite("ket"));
        }
        Ok(Ket { dims, vec })
    }

    pub fn from_real(dims: Vec<usize>, entries: &[f64]) -> Result<Self> {
        Ket::new(dims, CVector::from_iterator(entries.len(), entries.iter().map(|&x| c(x, 0.0))))
    }

    /// Computational basis vector `|digits>`.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Self {
        let mut vec = CVector::zeros(dims.iter().product());
        vec[linear_index(dims, digits)] = c(1.0, 0.0);
        Ket { dims: dims.to_vec(), vec }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn vector(&self) -> &CVector {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }

    pub fn normalized(&self) -> Ket {
        Ket { dims: self.dims.clone(), vec: self.vec.normalize() }
    }

    pub fn scale(&self, f: f64) -> Ket {
        Ket { dims: self.dims.clone(), vec: &self.vec * c(f, 0.0) }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.vec.dotc(&other.vec)
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ket { dims, vec: self.vec.kronecker(&other.vec) }
    }

    /// Sum of two kets with identical dims.
    pub fn try_add(&self, other: &Ket) -> Result<Ket> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch("ket sum".into()));
        }
        Ok(Ket { dims: self.dims.clone(), vec: &self.vec + &other.vec })
    }

    /// `|self><self|`.
    pub fn projector(&self) -> Op {
        Op { dims: self.dims.clone(), mat: &self.vec * self.vec.adjoint() }
    }

    /// Apply a matrix of matching size.
    pub fn apply(&self, m: &CMatrix) -> Result<Ket> {
        if m.ncols() != self.vec.len() || m.nrows() != self.vec.len() {
            return Err(Error::DimensionMismatch("ket transformation".into()));
        }
        Ok(Ket { dims: self.dims.clone(), vec: m * &self.vec })
    }
}

/// Tensor product; dims concatenate.
pub fn kron(a: &Op, b: &Op) -> Op {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Op { dims, mat: a.mat.kronecker(&b.mat) }
}

/// Tensor product of a sequence of operators.
pub fn kron_all<'a>(ops: impl IntoIterator<Item = &'a Op>) -> Option<Op> {
    let mut iter = ops.into_iter();
    let first = iter.next()?.clone();
    Some(iter.fold(first, |acc, op| kron(&acc, op)))
}

fn normalize_subset(keep: &[usize], len: usize) -> Result<Vec<usize>> {
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if let Some(&bad) = k.iter().find(|&&i| i >= len) {
        return Err(Error::IndexOutOfRange { index: bad, len });
    }
    Ok(k)
}

/// Partial trace keeping the listed subsystems in their original relative order.
///
/// Keeping no subsystem returns the full trace as a 1x1 operator.
pub fn partial_trace(a: &Op, keep: &[usize]) -> Result<Op> {
    let n = a.dims.len();
    let keep = normalize_subset(keep, n)?;
    if keep.len() == n {
        return Ok(a.clone());
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let st = strides(&a.dims);

    let offsets = |subset: &[usize]| -> Vec<usize> {
        let sub_dims: Vec<usize> = subset.iter().map(|&i| a.dims[i]).collect();
        let count: usize = sub_dims.iter().product();
        (0..count)
            .map(|lin| {
                let digits = multi_index(&sub_dims, lin);
                digits.iter().zip(subset).map(|(d, &i)| d * st[i]).sum()
            })
            .collect()
    };
    let keep_off = offsets(&keep);
    let trace_off = offsets(&traced);

    let kd = keep_off.len();
    let mut out = CMatrix::zeros(kd, kd);
    for (r, &ro) in keep_off.iter().enumerate() {
        for (col, &co) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += a.mat[(ro + t, co + t)];
            }
            out[(r, col)] = acc;
        }
    }
    let dims = if keep.is_empty() { vec![1] } else { keep.iter().map(|&i| a.dims[i]).collect() };
    Ok(Op { dims, mat: out })
}

/// Trace out the listed subsystems.
pub fn trace_out(a: &Op, traced: &[usize]) -> Result<Op> {
    let n = a.dims.len();
    let traced = normalize_subset(traced, n)?;
    let keep: Vec<usize> = (0..n).filter(|i| !traced.contains(i)).collect();
    partial_trace(a, &keep)
}

/// Reorder subsystems: factor `i` of the result is factor `perm[i]` of `a`.
pub fn permute_subsystems(a: &Op, perm: &[usize]) -> Result<Op> {
    let n = a.dims.len();
    let mut seen = perm.to_vec();
    seen.sort_unstable();
    if seen != (0..n).collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation of {n} subsystems")));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| a.dims[p]).collect();
    let side = a.dim();
    let map: Vec<usize> = (0..side)
        .map(|old| {
            let digits = multi_index(&a.dims, old);
            let new_digits: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
            linear_index(&new_dims, &new_digits)
        })
        .collect();
    let mut mat = CMatrix::zeros(side, side);
    for i in 0..side {
        for j in 0..side {
            mat[(map[i], map[j])] = a.mat[(i, j)];
        }
    }
    Ok(Op { dims: new_dims, mat })
}

/// Permutation matrix acting on vectors, consistent with [`permute_subsystems`].
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> CMatrix {
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let side: usize = dims.iter().product();
    let mut m = CMatrix::zeros(side, side);
    for old in 0..side {
        let digits = multi_index(dims, old);
        let nd: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
        m[(linear_index(&new_dims, &nd), old)] = c(1.0, 0.0);
    }
    m
}

pub fn is_hermitian(a: &Op, tol: f64) -> bool {
    let n = a.dim();
    for i in 0..n {
        for j in i..n {
            if (a.mat[(i, j)] - a.mat[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues (ascending) of the Hermitian part with unit eigenvectors.
///
/// Backed by faer: nalgebra's symmetric eigensolver returns NaN on some sparse
/// projectors (for instance Choi matrices of permutation unitaries).
pub fn hermitian_eigen(a: &Op) -> (Vec<f64>, Vec<CVector>) {
    let h = a.hermitian_part();
    let n = h.dim();
    let m = faer::Mat::<faer::c64>::from_fn(n, n, |i, j| {
        let z = h.mat[(i, j)];
        faer::c64::new(z.re, z.im)
    });
    let eig = m.self_adjoint_eigen(faer::Side::Lower).expect("Hermitian eigensolver converges on finite input");
    let (s, u) = (eig.S().column_vector(), eig.U());
    let mut pairs: Vec<(f64, CVector)> = (0..n)
        .map(|k| (s[k].re, CVector::from_fn(n, |i, _| C64::new(u[(i, k)].re, u[(i, k)].im))))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(a: &Op) -> Vec<f64> {
    hermitian_eigen(a).0
}

pub fn min_eigenvalue(a: &Op) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

pub fn is_psd(a: &Op, tol: f64) -> bool {
    is_hermitian(a, tol) && min_eigenvalue(a) >= -tol
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values above `rank_rel_tol * sigma_max`.
pub fn rank(a: &Op, rank_rel_tol: f64) -> usize {
    let sv = singular_values(&a.mat);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_rel_tol * smax).count()
}

/// Eigenvalue of largest magnitude of the Hermitian part with a unit eigenvector.
///
/// The eigenvector phase is fixed so that its first entry of significant
/// magnitude is real and positive.
pub fn principal_eigenpair(a: &Op) -> (f64, Ket) {
    let (vals, vecs) = hermitian_eigen(a);
    let (idx, _) = vals
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
    let ket = Ket { dims: a.dims.clone(), vec: vecs[idx].clone() };
    (vals[idx], fix_phase(&ket))
}

/// Rotate the global phase so the first significant component is real positive.
pub fn fix_phase(k: &Ket) -> Ket {
    let scale = k.vec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match k.vec.iter().find(|z| z.norm() > 1e-6 * scale) {
        Some(z) => {
            let phase = z.conj() / z.norm();
            Ket { dims: k.dims.clone(), vec: &k.vec * phase }
        }
        None => k.clone(),
    }
}

/// True iff `a = lambda b` with `lambda > 0`, for operators of rank at most one.
///
/// Two zero operators are proportional; a zero and a nonzero operator are not.
/// Rank-one operators are compared through their principal eigenvectors, which
/// makes the test independent of the vectors' phases.
pub fn proportional_rank_one(a: &Op, b: &Op, abs_tol: f64, rank_rel_tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch("proportionality test".into()));
    }
    let zero_a = a.max_abs() <= abs_tol;
    let zero_b = b.max_abs() <= abs_tol;
    for op in [a, b] {
        let r = rank(op, rank_rel_tol);
        if r > 1 && op.max_abs() > abs_tol {
            return Err(Error::RankTooHigh { rank: r });
        }
    }
    if zero_a || zero_b {
        return Ok(zero_a && zero_b);
    }
    let (la, ua) = principal_eigenpair(a);
    let (lb, ub) = principal_eigenpair(b);
    if la.signum() != lb.signum() {
        return Ok(false);
    }
    Ok(ua.inner(&ub).norm() > 1.0 - abs_tol)
}

/// Real parts row-major, then imaginary parts row-major.
pub fn real_vectorize(a: &Op) -> DVector<f64> {
    let n = a.dim();
    let mut v = DVector::zeros(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let z = a.mat[(i, j)];
            v[i * n + j] = z.re;
            v[n * n + i * n + j] = z.im;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    #[test]
    fn eigenvalues_of_sparse_rank_one_projector_are_finite() {
        // Projector onto (I (x) CNOT (x) I)|phi+> in dimension 64.
        let mut v = vec![0.0; 64];
        for i in 0..8usize {
            let (a, b, c) = (i >> 2 & 1, i >> 1 & 1, i & 1);
            let out = (a << 2) | (b << 1) | (c ^ b);
            v[out * 8 + i] = 1.0 / 8f64.sqrt();
        }
        let p = Ket::from_real(vec![64], &v).unwrap().projector();
        let ev = hermitian_eigenvalues(&p);
        assert!(ev.iter().all(|e| e.is_finite()));
        assert!((ev[63] - 1.0).abs() < 1e-12 && ev[0].abs() < 1e-12);
    }

    use super::*;

    fn sigma_x() -> Op {
        Op::from_real_rows(vec![2], &[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn phi_plus() -> Ket {
        let s = 0.5f64.sqrt();
        Ket::from_real(vec![2, 2], &[s, 0.0, 0.0, s]).unwrap()
    }

    #[test]
    fn kron_follows_big_endian_convention() {
        let p0 = Ket::basis(&[2], &[0]).projector();
        let p1 = Ket::basis(&[2], &[1]).projector();
        let k = kron(&p0, &p1);
        assert_eq!(k.dims(), &[2, 2]);
        assert_eq!(k, Op::matrix_unit(&[2, 2], 1, 1));

        assert_eq!(kron(&Op::identity(&[2]), &Op::identity(&[2])), Op::identity(&[2, 2]));

        let k = kron(&sigma_x(), &p0);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if (i, j) == (0, 2) || (i, j) == (2, 0) { 1.0 } else { 0.0 };
                assert_eq!(k.get(i, j), c(expected, 0.0), "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let rho = phi_plus().projector();
        let red = partial_trace(&rho, &[0]).unwrap();
        assert!(red.max_abs_diff(&Op::maximally_mixed(&[2])) < 1e-15);
        assert_eq!(partial_trace(&rho, &[0, 1]).unwrap(), rho);
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::IndexOutOfRange { index: 2, len: 2 })));
        let full = partial_trace(&rho, &[]).unwrap();
        assert!((full.trace() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_keeps_relative_order() {
        let a = Ket::basis(&[2], &[0]).projector();
        let b = Op::maximally_mixed(&[3]);
        let cc = Ket::basis(&[2], &[1]).projector();
        let abc = kron(&kron(&a, &b), &cc);
        let ac = partial_trace(&abc, &[2, 0]).unwrap();
        assert_eq!(ac.dims(), &[2, 2]);
        assert!(ac.max_abs_diff(&kron(&a, &cc)) < 1e-15);
    }

    #[test]
    fn permutation_swaps_factors() {
        let a = Ket::basis(&[2], &[0]).projector();
        let b = Op::maximally_mixed(&[3]);
        let ab = kron(&a, &b);
        let ba = permute_subsystems(&ab, &[1, 0]).unwrap();
        assert_eq!(ba.dims(), &[3, 2]);
        assert!(ba.max_abs_diff(&kron(&b, &a)) < 1e-15);
        let p = permutation_matrix(&[2, 3], &[1, 0]);
        let via_matrix = Op::new(vec![3, 2], &p * ab.matrix() * p.adjoint()).unwrap();
        assert!(via_matrix.max_abs_diff(&ba) < 1e-15);
        assert!(permute_subsystems(&ab, &[0, 0]).is_err());
    }

    #[test]
    fn hermitian_and_psd_examples() {
        let i4 = Op::identity(&[4]);
        assert!(is_hermitian(&i4, 1e-9) && is_psd(&i4, 1e-9));
        assert!(is_hermitian(&sigma_x(), 1e-9) && !is_psd(&sigma_x(), 1e-9));
        let m = Op::from_real_rows(vec![2], &[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(is_hermitian(&m, 1e-9) && !is_psd(&m, 1e-9));
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
        let skew = Op::from_real_rows(vec![2], &[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        assert!(!is_hermitian(&skew, 1e-9));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&phi_plus().projector(), 1e-8), 1);
        assert_eq!(rank(&Op::zeros(&[2, 2]), 1e-8), 0);
        assert_eq!(rank(&Op::identity(&[4]), 1e-8), 4);
    }

    #[test]
    fn proportionality_examples() {
        let s = 0.5f64.sqrt();
        let phi = phi_plus();
        let varphi = Ket::from_real(vec![2, 2], &[0.0, s, s, 0.0]).unwrap();
        let xi = Ket::from_real(vec![2, 2], &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let theta = Ket::from_real(vec![2, 2], &[0.5, -0.5, -0.5, 0.5]).unwrap();
        assert!(xi.inner(&theta).norm() < 1e-15);
        let p = |k: &Ket| k.projector();
        assert!(!proportional_rank_one(&p(&xi), &p(&theta), 1e-9, 1e-8).unwrap());
        assert!(proportional_rank_one(&p(&phi), &p(&phi).scale(2.0), 1e-9, 1e-8).unwrap());
        assert!(!proportional_rank_one(&p(&phi), &p(&varphi), 1e-9, 1e-8).unwrap());
        let z = Op::zeros(&[2, 2]);
        assert!(proportional_rank_one(&z, &z, 1e-9, 1e-8).unwrap());
        assert!(!proportional_rank_one(&z, &p(&phi), 1e-9, 1e-8).unwrap());
        assert!(!proportional_rank_one(&p(&phi), &p(&phi).scale(-1.0), 1e-9, 1e-8).unwrap());
        // global phase does not matter
        let phased = Ket::new(vec![2, 2], phi.vector() * c(0.0, 1.0)).unwrap();
        assert!(proportional_rank_one(&p(&phi), &p(&phased), 1e-9, 1e-8).unwrap());
        assert!(matches!(
            proportional_rank_one(&Op::identity(&[4]), &p(&phi), 1e-9, 1e-8),
            Err(Error::RankTooHigh { rank: 4 })
        ));
    }

    #[test]
    fn vectorize_examples() {
        assert!(real_vectorize(&Op::zeros(&[2])).iter().all(|&x| x == 0.0));
        let v = real_vectorize(&Op::identity(&[2]));
        assert_eq!(v.as_slice(), &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let m = Op::new(vec![2], CMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, 4.0), c(5.0, 6.0), c(7.0, 8.0)]))
            .unwrap();
        assert_eq!(real_vectorize(&m).as_slice(), &[1.0, 3.0, 5.0, 7.0, 2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Op::new(vec![2, 2], CMatrix::zeros(3, 3)).is_err());
        assert!(Op::new(vec![2], CMatrix::from_element(2, 2, c(f64::NAN, 0.0))).is_err());
        assert!(Op::identity(&[4]).with_dims(vec![2, 3]).is_err());
        assert!(Ket::from_real(vec![3], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let dims = [2, 3, 4];
        for i in 0..24 {
            assert_eq!(linear_index(&dims, &multi_index(&dims, i)), i);
        }
        assert_eq!(linear_index(&dims, &[1, 0, 0]), 12);
    }
}
