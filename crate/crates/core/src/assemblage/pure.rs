use serde::Serialize;

use super::{Assemblage, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{principal_eigenpair, rank, Ket};
use crate::tolerance::Tolerances;

/// A member that is either zero or a positive multiple of a pure state.
#[derive(Debug, Clone, PartialEq)]
pub enum PureMember {
    Zero,
    Pure { weight: f64, ket: Ket },
}

impl PureMember {
    pub fn weight(&self) -> f64 {
        match self {
            PureMember::Zero => 0.0,
            PureMember::Pure { weight, .. } => *weight,
        }
    }

    pub fn ket(&self) -> Option<&Ket> {
        match self {
            PureMember::Zero => None,
            PureMember::Pure { ket, .. } => Some(ket),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PureMember::Zero)
    }
}

impl Serialize for PureMember {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PureMember::Zero => s.serialize_str("ZERO"),
            PureMember::Pure { weight, .. } => s.serialize_f64(*weight),
        }
    }
}

/// Assemblage whose every member is zero or rank one.
#[derive(Debug, Clone, PartialEq)]
pub struct PureAssemblage {
    scenario: Scenario,
    trusted_dims: Vec<usize>,
    members: Vec<PureMember>,
}

impl PureAssemblage {
    pub fn new(scenario: Scenario, trusted_dims: Vec<usize>, members: Vec<PureMember>, tol: f64) -> Result<Self> {
        if members.len() != scenario.position_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} members for {} positions",
                members.len(),
                scenario.position_count()
            )));
        }
        let d: usize = trusted_dims.iter().product();
        for (i, m) in members.iter().enumerate() {
            if let PureMember::Pure { weight, ket } = m {
                let pos = scenario.position(i);
                if !weight.is_finite() || *weight <= 0.0 {
                    return Err(Error::InvalidModel(format!("member {pos} has weight {weight}")));
                }
                if ket.vector().len() != d {
                    return Err(Error::DimensionMismatch(format!("member {pos} ket has wrong dimension")));
                }
                if (ket.norm() - 1.0).abs() > tol {
                    return Err(Error::InvalidModel(format!("member {pos} ket has norm {}", ket.norm())));
                }
            }
        }
        Ok(PureAssemblage { scenario, trusted_dims, members })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn trusted_dims(&self) -> &[usize] {
        &self.trusted_dims
    }

    pub fn member(&self, a: &[usize], x: &[usize]) -> &PureMember {
        &self.members[self.scenario.index(a, x)]
    }

    pub fn members(&self) -> &[PureMember] {
        &self.members
    }

    pub fn zero_count(&self) -> usize {
        self.members.iter().filter(|m| m.is_zero()).count()
    }

    /// Back to operator form: `weight |ket><ket|` or zero.
    pub fn to_assemblage(&self, tol: &Tolerances) -> Result<Assemblage> {
        let members = self
            .members
            .iter()
            .map(|m| match m {
                PureMember::Zero => crate::linalg::Op::zeros(&self.trusted_dims),
                PureMember::Pure { weight, ket } => ket.projector().scale(*weight),
            })
            .collect();
        Assemblage::new(self.scenario.clone(), self.trusted_dims.clone(), members, tol)
    }
}

/// Rewrite every member as zero or `(trace, principal unit eigenvector)`.
///
/// The input must be normalized; an all-zero family is rejected on that ground.
/// Members whose trace is below `abs_tol` become zero; any other member with
/// numerical rank two or more is an error naming its position.
pub fn canonicalize_pure(s: &Assemblage, tol: &Tolerances) -> Result<PureAssemblage> {
    s.check_normalization(tol.abs_tol)?;
    let members = s
        .iter()
        .map(|(pos, m)| {
            let tr = m.real_trace();
            if tr < tol.abs_tol {
                return Ok(PureMember::Zero);
            }
            let r = rank(m, tol.rank_rel_tol);
            if r > 1 {
                return Err(Error::MemberRank { position: pos.to_string(), rank: r });
            }
            let (_, ket) = principal_eigenpair(m);
            Ok(PureMember::Pure { weight: tr, ket })
        })
        .collect::<Result<Vec<_>>>()?;
    PureAssemblage::new(s.scenario().clone(), s.trusted_dims().to_vec(), members, 1e-9)
}
