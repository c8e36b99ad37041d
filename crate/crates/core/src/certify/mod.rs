//! Extremality certificates for pure-member assemblages.
//!
//! With the rank-one supports fixed, any assemblage in a convex decomposition
//! of a pure-member reference has the form `c_i rho_i` on the same supports
//! (zero members stay zero). The decomposition question becomes linear: the
//! reference is extreme within the chosen constraint set iff the affine system
//! `A c = b` has a unique solution. Uniqueness is decided over the affine set
//! without imposing `c >= 0`; since the reference coefficients are strictly
//! positive, any null direction `v` yields two feasible points `p +/- eps v`.

mod structural;
mod system;
mod witness;

use serde::Serialize;

pub use structural::inflexibility_structural_check;
pub use system::{build_constraint_system, LinearSystem};
pub use witness::{witness_eval, Witness};

use crate::assemblage::{PureAssemblage, Position};
use crate::error::{Error, Result};
use crate::linalg::{lstsq, nullspace};
use crate::tolerance::Tolerances;

/// Which no-signaling conditions define the convex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConstraintMode {
    /// Every party is separated from every other one.
    FullNs,
    /// Two parties; the second and the trusted system may signal to each other.
    AsymNs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    UniqueExtreme,
    NonUnique,
}

/// Two distinct feasible coefficient vectors averaging to the reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessPair {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalityCertificate {
    pub mode: ConstraintMode,
    pub rank: usize,
    pub nullity: usize,
    /// Positions whose coefficient is the same in every decomposition: zero
    /// members, then variables left unchanged by every null direction.
    pub pinned: Vec<Position>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_pair: Option<WitnessPair>,
    /// Column order of the coefficient vectors.
    pub variables: Vec<Position>,
    pub reference: Vec<f64>,
    /// Minimum-norm solution of `A c = b` divided by the reference, per variable.
    pub recovered_ratio: Vec<f64>,
    /// `max |A p - b|` at the reference.
    pub reference_residual: f64,
}

impl ExtremalityCertificate {
    pub fn is_pinned(&self, pos: &Position) -> bool {
        self.pinned.contains(pos)
    }
}

/// Rank-nullity analysis of the constraint system of `p`.
pub fn decomposition_analysis(p: &PureAssemblage, mode: ConstraintMode, tol: &Tolerances) -> Result<ExtremalityCertificate> {
    let sys = build_constraint_system(p, mode)?;
    let reference_residual = sys.residual(&sys.reference);
    if reference_residual > tol.abs_tol {
        return Err(Error::InconsistentReference(reference_residual));
    }
    let ns = nullspace(&sys.matrix, tol.rank_rel_tol);
    let nvar = sys.variables.len();
    let sc = p.scenario();
    let pinned = (0..sc.position_count())
        .filter(|&i| p.members()[i].is_zero())
        .map(|i| sc.position(i))
        .chain(
            (0..nvar)
                .filter(|&i| ns.basis.iter().all(|v| v[i].abs() < tol.abs_tol))
                .map(|i| sys.variables[i].clone()),
        )
        .collect();

    let witness_pair = ns.basis.first().map(|v| {
        let t_max = (0..nvar)
            .filter(|&i| v[i].abs() > 0.0)
            .map(|i| sys.reference[i] / v[i].abs())
            .fold(f64::INFINITY, f64::min);
        let step = 0.5 * t_max;
        WitnessPair {
            plus: (&sys.reference + v * step).iter().copied().collect(),
            minus: (&sys.reference - v * step).iter().copied().collect(),
            step,
        }
    });
    let recovered = lstsq(&sys.matrix, &sys.rhs, tol.rank_rel_tol);
    let recovered_ratio = recovered.iter().zip(sys.reference.iter()).map(|(c, r)| c / r).collect();
    let nullity = ns.dim();
    Ok(ExtremalityCertificate {
        mode,
        rank: ns.rank,
        nullity,
        pinned,
        verdict: if nullity == 0 { Verdict::UniqueExtreme } else { Verdict::NonUnique },
        witness_pair,
        variables: sys.variables,
        reference: sys.reference.iter().copied().collect(),
        recovered_ratio,
        reference_residual,
    })
}
