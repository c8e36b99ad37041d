use crate::assemblage::Assemblage;
use crate::error::{Error, Result};
use crate::linalg::Op;

/// Linear functional `F(s) = sum_{a,x} Tr(rho_{a|x} s_{a|x})` built from a
/// reference assemblage, with `rho_{a|x}` its normalized members (zero where
/// the member is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    reference: Assemblage,
    normalized: Vec<Op>,
}

impl Witness {
    /// Members with trace below `zero_tol` count as zero.
    pub fn new(reference: &Assemblage, zero_tol: f64) -> Self {
        let normalized = reference
            .members()
            .iter()
            .map(|m| {
                let t = m.real_trace();
                if t < zero_tol {
                    Op::zeros(m.dims())
                } else {
                    m.scale(1.0 / t)
                }
            })
            .collect();
        Witness { reference: reference.clone(), normalized }
    }

    pub fn reference(&self) -> &Assemblage {
        &self.reference
    }

    pub fn normalized(&self) -> &[Op] {
        &self.normalized
    }
}

pub fn witness_eval(w: &Witness, s: &Assemblage) -> Result<f64> {
    if s.scenario() != w.reference.scenario() || s.trusted_dim() != w.reference.trusted_dim() {
        return Err(Error::DimensionMismatch("witness and assemblage differ in scenario or dimension".into()));
    }
    Ok(w.normalized
        .iter()
        .zip(s.members())
        .map(|(r, m)| (r.matrix().transpose().component_mul(m.matrix())).sum().re)
        .sum())
}
