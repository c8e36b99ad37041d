//! Random states, unitaries, channels and measurements for property tests and
//! sampling experiments. All draws take an explicit generator so results are
//! reproducible from a seed.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMatrix, Ket, Op, C64};
use crate::quantum::{KrausChannel, Povm, State};

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Uniformly random unit ket.
pub fn ket<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Ket {
    let d: usize = dims.iter().product();
    let v = ginibre(rng, d, 1).column(0).into_owned();
    Ket::new(dims.to_vec(), v).expect("dimension matches").normalized()
}

/// Density operator `G G^dag / Tr` with `G` of size `d x rank`.
pub fn state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], rank: usize) -> State {
    let d: usize = dims.iter().product();
    let g = ginibre(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = Op::new(dims.to_vec(), m / c(tr, 0.0)).expect("square");
    State::new(op.hermitian_part(), 1e-9).expect("positive with unit trace")
}

/// Random Hermitian operator with standard normal entries.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Op {
    let d: usize = dims.iter().product();
    let g = ginibre(rng, d, d);
    Op::new(dims.to_vec(), g.clone() + g.adjoint()).expect("square").hermitian_part()
}

/// Channel whose Kraus operators are the blocks of a Haar isometry. The
/// operator count is raised to `ceil(d_in / d_out)` when needed.
pub fn kraus_channel<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, n_ops: usize) -> KrausChannel {
    let n_ops = n_ops.max(d_in.div_ceil(d_out));
    let big = d_out * n_ops;
    let v = unitary(rng, big).columns(0, d_in).into_owned();
    let ops = (0..n_ops).map(|k| v.rows(k * d_out, d_out).into_owned()).collect();
    KrausChannel::new(d_in, d_out, ops, 1e-9).expect("isometry gives a complete Kraus set")
}

/// Projective measurements in Haar-random bases, one basis per setting.
pub fn projective_povm<R: Rng + ?Sized>(rng: &mut R, d: usize, settings: usize) -> Povm {
    let bases: Vec<Vec<Ket>> = (0..settings)
        .map(|_| {
            let u = unitary(rng, d);
            (0..d).map(|k| Ket::new(vec![d], u.column(k).into_owned()).expect("dimension d")).collect()
        })
        .collect();
    Povm::projective(&bases, 1e-9).expect("columns of a unitary")
}

/// General measurement with `outcomes` effects per setting, obtained by
/// compressing a random unitary on `d * outcomes` dimensions.
pub fn povm<R: Rng + ?Sized>(rng: &mut R, d: usize, settings: usize, outcomes: usize) -> Povm {
    let effects = (0..settings)
        .map(|_| {
            let ch = kraus_channel(rng, d, 1, outcomes);
            ch.ops()
                .iter()
                .map(|k| Op::new(vec![d], k.adjoint() * k).expect("square").hermitian_part())
                .collect()
        })
        .collect();
    Povm::new(effects, 1e-9).expect("complete by construction")
}
