use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, min_eigenvalue, Ket, Op};

/// Density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    op: Op,
}

impl State {
    pub fn new(op: Op, tol: f64) -> Result<Self> {
        if !is_hermitian(&op, tol) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let min = min_eigenvalue(&op);
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {:.6} != 1", tr.re)));
        }
        Ok(State { op })
    }

    /// Projector onto the normalized ket.
    pub fn pure(ket: &Ket) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(State { op: ket.scale(1.0 / norm).projector() })
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        State { op: Op::maximally_mixed(dims) }
    }

    pub fn op(&self) -> &Op {
        &self.op
    }

    pub fn into_op(self) -> Op {
        self.op
    }

    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }
}

/// Measurement family: `effects[setting][outcome]`, every setting complete.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<Vec<Op>>,
}

impl Povm {
    pub fn new(effects: Vec<Vec<Op>>, tol: f64) -> Result<Self> {
        let first = effects
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::InvalidPovm("no settings or outcomes".into()))?;
        let dim = first.dim();
        let outcomes = effects[0].len();
        for (x, setting) in effects.iter().enumerate() {
            if setting.len() != outcomes {
                return Err(Error::InvalidPovm(format!(
                    "setting {x} has {} outcomes, expected {outcomes}",
                    setting.len()
                )));
            }
            let mut total = Op::zeros(&[dim]);
            for (a, e) in setting.iter().enumerate() {
                if e.dim() != dim {
                    return Err(Error::InvalidPovm(format!("effect ({x},{a}) has dimension {}", e.dim())));
                }
                if !is_hermitian(e, tol) || min_eigenvalue(e) < -tol {
                    return Err(Error::InvalidPovm(format!("effect ({x},{a}) is not positive")));
                }
                total = total.try_add(&e.clone().with_dims(vec![dim])?)?;
            }
            let dev = total.max_abs_diff(&Op::identity(&[dim]));
            if dev > tol {
                return Err(Error::InvalidPovm(format!("setting {x} effects sum to identity only within {dev:.3e}")));
            }
        }
        let effects = effects
            .into_iter()
            .map(|s| s.into_iter().map(|e| e.with_dims(vec![dim])).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Povm { dim, effects })
    }

    /// Projective measurements given by one orthonormal basis per setting.
    pub fn projective(bases: &[Vec<Ket>], tol: f64) -> Result<Self> {
        Povm::new(bases.iter().map(|b| b.iter().map(Ket::projector).collect()).collect(), tol)
    }

    /// One setting with the single outcome `I`.
    pub fn trivial(dim: usize) -> Self {
        Povm { dim, effects: vec![vec![Op::identity(&[dim])]] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn settings(&self) -> usize {
        self.effects.len()
    }

    pub fn outcomes(&self) -> usize {
        self.effects[0].len()
    }

    pub fn effect(&self, setting: usize, outcome: usize) -> &Op {
        &self.effects[setting][outcome]
    }

    pub fn effects(&self) -> &[Vec<Op>] {
        &self.effects
    }
}
