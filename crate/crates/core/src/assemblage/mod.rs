//! State assemblages `{sigma_{a|x}}` on a trusted system, indexed by the
//! outcome and setting vectors of the untrusted parties.

mod lhs;
mod ns;
mod pure;
mod realization;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, linear_index, min_eigenvalue, multi_index, Op};
use crate::tolerance::Tolerances;

pub use lhs::{
    lhs_assemblage, pure_lhs_decide, DeterministicStrategy, LhsModel, LhsVerdict, NoLhsReason, ResponseTable,
};
pub use ns::{marginal, verify_ns, NsConstraint, NsReport, NsViolation};
pub use pure::{canonicalize_pure, PureAssemblage, PureMember};
pub use realization::{
    assemblage_from_realization, realize_members, scenario_of, verify_hermitian_realization, HermitianRealization,
};

/// Settings `m_i` and outcomes `k_i` of every untrusted party.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub struct Scenario {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
}

impl Scenario {
    pub fn new(settings: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        if settings.is_empty() || settings.len() != outcomes.len() {
            return Err(Error::InvalidScenario(format!(
                "{} setting counts and {} outcome counts",
                settings.len(),
                outcomes.len()
            )));
        }
        if settings.iter().chain(&outcomes).any(|&v| v == 0) {
            return Err(Error::InvalidScenario("counts must be at least 1".into()));
        }
        Ok(Scenario { settings, outcomes })
    }

    /// `n` parties with `m` settings and `k` outcomes each.
    pub fn uniform(n: usize, m: usize, k: usize) -> Result<Self> {
        Scenario::new(vec![m; n], vec![k; n])
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn setting_count(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn outcome_count(&self) -> usize {
        self.outcomes.iter().product()
    }

    pub fn position_count(&self) -> usize {
        self.setting_count() * self.outcome_count()
    }

    /// All setting vectors in lexicographic order.
    pub fn setting_vectors(&self) -> Vec<Vec<usize>> {
        (0..self.setting_count()).map(|i| multi_index(&self.settings, i)).collect()
    }

    pub fn outcome_vectors(&self) -> Vec<Vec<usize>> {
        (0..self.outcome_count()).map(|i| multi_index(&self.outcomes, i)).collect()
    }

    pub fn setting_index(&self, x: &[usize]) -> usize {
        linear_index(&self.settings, x)
    }

    pub fn outcome_index(&self, a: &[usize]) -> usize {
        linear_index(&self.outcomes, a)
    }

    /// Storage index of `(a, x)`: setting-major, outcome-minor.
    pub fn index(&self, a: &[usize], x: &[usize]) -> usize {
        self.setting_index(x) * self.outcome_count() + self.outcome_index(a)
    }

    pub fn position(&self, index: usize) -> Position {
        let k = self.outcome_count();
        Position { a: multi_index(&self.outcomes, index % k), x: multi_index(&self.settings, index / k) }
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.position_count()).map(|i| self.position(i))
    }

    pub fn contains(&self, a: &[usize], x: &[usize]) -> bool {
        a.len() == self.parties()
            && x.len() == self.parties()
            && a.iter().zip(&self.outcomes).all(|(v, k)| v < k)
            && x.iter().zip(&self.settings).all(|(v, m)| v < m)
    }
}

/// Outcome vector `a` and setting vector `x`; serializes as `[a, x]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub a: Vec<usize>,
    pub x: Vec<usize>,
}

impl Position {
    pub fn new(a: Vec<usize>, x: Vec<usize>) -> Self {
        Position { a, x }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("");
        write!(f, "({}|{})", join(&self.a), join(&self.x))
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.a, &self.x).serialize(s)
    }
}

/// Family of positive operators indexed by `(a, x)`.
///
/// Construction checks shapes, Hermiticity and positivity. Normalization and
/// no-signaling are properties to verify, not construction invariants, so that
/// perturbed families can still be inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    scenario: Scenario,
    trusted_dims: Vec<usize>,
    members: Vec<Op>,
}

impl Assemblage {
    pub fn new(scenario: Scenario, trusted_dims: Vec<usize>, members: Vec<Op>, tol: &Tolerances) -> Result<Self> {
        if members.len() != scenario.position_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} members for {} positions",
                members.len(),
                scenario.position_count()
            )));
        }
        let d: usize = trusted_dims.iter().product();
        let members = members
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                let pos = scenario.position(i);
                if m.dim() != d {
                    return Err(Error::DimensionMismatch(format!("member {pos} has dimension {}, expected {d}", m.dim())));
                }
                let scale = tol.abs_tol * (1.0 + m.max_abs());
                if !is_hermitian(&m, scale) {
                    return Err(Error::NotPositive { position: pos.to_string(), min_eigenvalue: f64::NAN });
                }
                let min = min_eigenvalue(&m);
                if min < -scale {
                    return Err(Error::NotPositive { position: pos.to_string(), min_eigenvalue: min });
                }
                m.with_dims(trusted_dims.clone())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Assemblage { scenario, trusted_dims, members })
    }

    /// Build by evaluating `f(a, x)` at every position.
    pub fn from_fn(
        scenario: Scenario,
        trusted_dims: Vec<usize>,
        tol: &Tolerances,
        mut f: impl FnMut(&[usize], &[usize]) -> Op,
    ) -> Result<Self> {
        let members = scenario.positions().map(|p| f(&p.a, &p.x)).collect();
        Assemblage::new(scenario, trusted_dims, members, tol)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn trusted_dims(&self) -> &[usize] {
        &self.trusted_dims
    }

    pub fn trusted_dim(&self) -> usize {
        self.trusted_dims.iter().product()
    }

    pub fn member(&self, a: &[usize], x: &[usize]) -> &Op {
        &self.members[self.scenario.index(a, x)]
    }

    pub fn members(&self) -> &[Op] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = (Position, &Op)> {
        self.members.iter().enumerate().map(|(i, m)| (self.scenario.position(i), m))
    }

    /// Replace a single member, keeping every other one.
    pub fn with_member(&self, a: &[usize], x: &[usize], op: Op, tol: &Tolerances) -> Result<Self> {
        let mut members = self.members.clone();
        members[self.scenario.index(a, x)] = op;
        Assemblage::new(self.scenario.clone(), self.trusted_dims.clone(), members, tol)
    }

    /// `sum_a sigma_{a|x}`.
    pub fn total(&self, x: &[usize]) -> Op {
        let base = self.scenario.setting_index(x) * self.scenario.outcome_count();
        let mut acc = Op::zeros(&self.trusted_dims);
        for m in &self.members[base..base + self.scenario.outcome_count()] {
            acc.add_scaled(1.0, m);
        }
        acc
    }

    /// `max_x |Tr sum_a sigma_{a|x} - 1|`.
    pub fn normalization_deviation(&self) -> f64 {
        self.scenario
            .setting_vectors()
            .iter()
            .map(|x| {
                let t = self.total(x).trace();
                (t.re - 1.0).abs().max(t.im.abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn check_normalization(&self, tol: f64) -> Result<()> {
        let dev = self.normalization_deviation();
        if dev > tol {
            return Err(Error::NotNormalized(dev));
        }
        Ok(())
    }

    /// Largest entrywise difference between corresponding members.
    pub fn max_member_diff(&self, other: &Assemblage) -> Result<f64> {
        if self.scenario != other.scenario || self.trusted_dim() != other.trusted_dim() {
            return Err(Error::DimensionMismatch("comparing assemblages of different shape".into()));
        }
        Ok(self.members.iter().zip(&other.members).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max))
    }
}
