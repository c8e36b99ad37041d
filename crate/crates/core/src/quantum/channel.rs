use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, is_psd, kron, min_eigenvalue, partial_trace, permute_subsystems, CMatrix, Ket, Op, C64};
use crate::quantum::State;

/// `(1/sqrt d) sum_i |ii>` on dims `[d, d]`.
pub fn maximally_entangled(d: usize) -> Ket {
    let mut v = crate::linalg::CVector::zeros(d * d);
    let amp = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = c(amp, 0.0);
    }
    Ket::new(vec![d, d], v).expect("consistent dims")
}

/// Channel in Kraus form; an input format only.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(in_dim: usize, out_dim: usize, ops: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::DimensionMismatch("channel without Kraus operators".into()));
        }
        let mut completeness = CMatrix::zeros(in_dim, in_dim);
        for (k, op) in ops.iter().enumerate() {
            if op.nrows() != out_dim || op.ncols() != in_dim {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {out_dim}x{in_dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            if op.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::NonFinite("Kraus operator"));
            }
            completeness += op.adjoint() * op;
        }
        let dev = (completeness - CMatrix::identity(in_dim, in_dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > tol {
            return Err(Error::KrausIncomplete(dev));
        }
        Ok(KrausChannel { in_dim, out_dim, ops })
    }

    pub fn unitary(u: CMatrix, tol: f64) -> Result<Self> {
        let d = u.nrows();
        KrausChannel::new(d, d, vec![u], tol)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }
}

/// Choi matrix `J = (L (x) id)(|phi+><phi+|)` of a linear map `L`, output
/// factors first.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiOp {
    out_dims: Vec<usize>,
    in_dims: Vec<usize>,
    op: Op,
}

impl ChoiOp {
    pub fn new(out_dims: Vec<usize>, in_dims: Vec<usize>, mat: CMatrix) -> Result<Self> {
        let mut dims = out_dims.clone();
        dims.extend_from_slice(&in_dims);
        let op = Op::new(dims, mat)?;
        let scale = 1.0 + op.max_abs();
        if !crate::linalg::is_hermitian(&op, 1e-9 * scale) {
            return Err(Error::DimensionMismatch("Choi matrix is not Hermitian".into()));
        }
        Ok(ChoiOp { out_dims, in_dims, op })
    }

    pub fn from_op(out_dims: Vec<usize>, in_dims: Vec<usize>, op: Op) -> Result<Self> {
        ChoiOp::new(out_dims, in_dims, op.into_matrix())
    }

    /// Choi matrix of the identity channel, `|phi+><phi+|`.
    pub fn identity(d: usize) -> Self {
        ChoiOp { out_dims: vec![d], in_dims: vec![d], op: maximally_entangled(d).projector() }
    }

    /// Build the Choi matrix of an arbitrary linear map by probing matrix units.
    pub fn from_map(in_dims: &[usize], mut map: impl FnMut(&Op) -> Result<Op>) -> Result<Self> {
        let d: usize = in_dims.iter().product();
        let mut acc: Option<Op> = None;
        for i in 0..d {
            for j in 0..d {
                let unit = Op::matrix_unit(in_dims, i, j);
                let image = map(&unit)?;
                let term = kron(&image, &unit).scale(1.0 / d as f64);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.try_add(&term)?,
                });
            }
        }
        let op = acc.expect("dimension at least one");
        let out_dims = op.dims()[..op.dims().len() - in_dims.len()].to_vec();
        Ok(ChoiOp { out_dims, in_dims: in_dims.to_vec(), op })
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn in_dim(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dims.iter().product()
    }

    pub fn op(&self) -> &Op {
        &self.op
    }

    pub fn into_op(self) -> Op {
        self.op
    }

    pub fn scale(&self, f: f64) -> ChoiOp {
        ChoiOp { out_dims: self.out_dims.clone(), in_dims: self.in_dims.clone(), op: self.op.scale(f) }
    }

    /// Same matrix, regrouped input/output factors.
    pub fn with_factors(self, out_dims: Vec<usize>, in_dims: Vec<usize>) -> Result<Self> {
        if out_dims.iter().product::<usize>() != self.out_dim() || in_dims.iter().product::<usize>() != self.in_dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot regroup {}->{} channel as {in_dims:?}->{out_dims:?}",
                self.in_dim(),
                self.out_dim()
            )));
        }
        let mut dims = out_dims.clone();
        dims.extend_from_slice(&in_dims);
        let op = self.op.with_dims(dims)?;
        Ok(ChoiOp { out_dims, in_dims, op })
    }

    /// `Tr_out J`, an operator on the input space.
    pub fn input_marginal(&self) -> Op {
        let k = self.out_dims.len();
        let keep: Vec<usize> = (k..k + self.in_dims.len()).collect();
        partial_trace(&self.op, &keep).expect("indices in range")
    }

    /// Choi-linear sum of two maps with identical signatures.
    pub fn try_add(&self, other: &ChoiOp) -> Result<ChoiOp> {
        if self.in_dims != other.in_dims || self.out_dims != other.out_dims {
            return Err(Error::DimensionMismatch("sum of maps with different signatures".into()));
        }
        Ok(ChoiOp { out_dims: self.out_dims.clone(), in_dims: self.in_dims.clone(), op: self.op.try_add(&other.op)? })
    }
}

/// Choi matrix of a Kraus channel.
pub fn choi_of_kraus(k: &KrausChannel) -> ChoiOp {
    let (din, dout) = (k.in_dim, k.out_dim);
    let amp = 1.0 / (din as f64).sqrt();
    let mut j = CMatrix::zeros(dout * din, dout * din);
    for op in &k.ops {
        // (K (x) I)|phi+> has amplitude K[o, i] / sqrt(d) at |o i>.
        let v = crate::linalg::CVector::from_fn(dout * din, |idx, _| op[(idx / din, idx % din)] * c(amp, 0.0));
        j += &v * v.adjoint();
    }
    ChoiOp { out_dims: vec![dout], in_dims: vec![din], op: Op::new(vec![dout, din], j).expect("square by construction") }
}

/// `L(X) = d_in Tr_in[(I_out (x) X^T) J]`.
pub fn apply_choi(choi: &ChoiOp, x: &Op) -> Result<Op> {
    let din = choi.in_dim();
    let dout = choi.out_dim();
    if x.dim() != din {
        return Err(Error::DimensionMismatch(format!("map input has dimension {din}, operator has {}", x.dim())));
    }
    let j = choi.op.matrix();
    let xm = x.matrix();
    let mut out = CMatrix::zeros(dout, dout);
    // (L(X))[o1,o2] = d sum_{i,j} X[i,j] J[(o1,i),(o2,j)]
    for o1 in 0..dout {
        for o2 in 0..dout {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..din {
                for jj in 0..din {
                    acc += xm[(i, jj)] * j[(o1 * din + i, o2 * din + jj)];
                }
            }
            out[(o1, o2)] = acc * c(din as f64, 0.0);
        }
    }
    Op::new(choi.out_dims.clone(), out)
}

/// Outcome of the Choi-matrix CPTP test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CptpReport {
    pub cp: bool,
    pub tp: bool,
    pub min_eigenvalue: f64,
    /// `max |Tr_out J - I/d_in|`.
    pub tp_deviation: f64,
}

impl CptpReport {
    pub fn is_channel(&self) -> bool {
        self.cp && self.tp
    }
}

/// Completely positive iff `J >= 0`; trace preserving iff `Tr_out J = I/d_in`.
pub fn verify_cptp(choi: &ChoiOp, tol: f64) -> CptpReport {
    let min = min_eigenvalue(&choi.op);
    let cp = is_psd(&choi.op, tol);
    let tp_deviation = choi.input_marginal().max_abs_diff(&Op::maximally_mixed(&choi.in_dims));
    CptpReport { cp, tp: tp_deviation < tol, min_eigenvalue: min, tp_deviation }
}

/// Dilate `E: A -> A' (x) B` to `E~: A (x) B -> A' (x) B` with a fixed ancilla
/// state so that `E~(rho (x) |0><0|) = E(rho)`.
///
/// The last output factor of `e` plays the role of `B`. The construction is
/// `E~ = E o Tr_B`, whose Choi matrix is `J_E (x) I_B / d_B`.
pub fn extend_channel(e: &ChoiOp, tol: f64) -> Result<(State, ChoiOp)> {
    let report = verify_cptp(e, tol);
    if !report.is_channel() {
        return Err(Error::NotCptp { cp: report.cp, tp: report.tp });
    }
    if e.out_dims.len() < 2 {
        return Err(Error::DimensionMismatch("output must factor as A' (x) B".into()));
    }
    let db = *e.out_dims.last().expect("at least two factors");
    let ancilla = State::pure(&Ket::basis(&[db], &[0]))?;
    let op = kron(&e.op, &Op::maximally_mixed(&[db]));
    let mut in_dims = e.in_dims.clone();
    in_dims.push(db);
    Ok((ancilla, ChoiOp { out_dims: e.out_dims.clone(), in_dims, op }))
}

/// Apply `choi` on the listed subsystems of `rho` and the identity elsewhere.
///
/// `targets` gives the order in which subsystems feed the map's input. When the
/// map has as many output factors as targets, each output factor replaces the
/// corresponding target in place; otherwise the targets must be contiguous and
/// the output factors are inserted where they were.
pub fn apply_channel_on_subsystems(choi: &ChoiOp, rho: &Op, targets: &[usize]) -> Result<Op> {
    let n = rho.dims().len();
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != targets.len() || targets.is_empty() {
        return Err(Error::DimensionMismatch(format!("invalid target list {targets:?}")));
    }
    if let Some(&bad) = sorted.iter().find(|&&t| t >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    let target_dims: Vec<usize> = targets.iter().map(|&t| rho.dims()[t]).collect();
    let in_place = choi.out_dims.len() == targets.len();
    let matches = if choi.in_dims.len() == targets.len() {
        choi.in_dims == target_dims
    } else {
        choi.in_dim() == target_dims.iter().product::<usize>()
    };
    if !matches {
        return Err(Error::DimensionMismatch(format!(
            "map input dims {:?} do not match target dims {target_dims:?}",
            choi.in_dims
        )));
    }
    if !in_place && sorted.last().unwrap() - sorted[0] + 1 != sorted.len() {
        return Err(Error::DimensionMismatch("grouped map output requires contiguous targets".into()));
    }

    let rest: Vec<usize> = (0..n).filter(|i| !targets.contains(i)).collect();
    let mut perm = targets.to_vec();
    perm.extend_from_slice(&rest);
    let moved = permute_subsystems(rho, &perm)?;

    let din = choi.in_dim();
    let dout = choi.out_dim();
    let r: usize = rest.iter().map(|&i| rho.dims()[i]).product();
    let j = choi.op.matrix();
    let src = moved.matrix();
    let mut out = CMatrix::zeros(dout * r, dout * r);
    let scale = c(din as f64, 0.0);
    for i in 0..din {
        for jj in 0..din {
            for o1 in 0..dout {
                for o2 in 0..dout {
                    let l = j[(o1 * din + i, o2 * din + jj)] * scale;
                    if l == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s1 in 0..r {
                        for s2 in 0..r {
                            out[(o1 * r + s1, o2 * r + s2)] += l * src[(i * r + s1, jj * r + s2)];
                        }
                    }
                }
            }
        }
    }
    let mut cur_dims = choi.out_dims.clone();
    cur_dims.extend(rest.iter().map(|&i| rho.dims()[i]));
    let current = Op::new(cur_dims, out)?;

    // Layout of `current`: output factors, then untouched factors in order.
    let k = choi.out_dims.len();
    let mut layout = Vec::new();
    let mut rest_pos = 0;
    for pos in 0..n {
        if let Some(t) = targets.iter().position(|&t| t == pos) {
            if in_place {
                layout.push(t);
            } else if pos == sorted[0] {
                layout.extend(0..k);
            }
        } else {
            layout.push(k + rest_pos);
            rest_pos += 1;
        }
    }
    permute_subsystems(&current, &layout)
}
