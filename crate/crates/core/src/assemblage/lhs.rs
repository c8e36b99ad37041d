//! Local-hidden-state models and an exact LHS decision for pure-member
//! assemblages.
//!
//! # Why strategy enumeration is exact for pure members
//!
//! Every LHS model can be rewritten with deterministic response functions:
//! each table `p_j(a|x)` is a convex mixture of deterministic ones, and
//! expanding the product gives `sigma_{a|x} = sum_s D_s(a|x) tau_s` with
//! `D_s` a global deterministic strategy and `tau_s >= 0`.
//!
//! * If `s` selects a position whose member is zero, then `tau_s` is one term of
//!   a sum of positive operators equal to zero, so `tau_s = 0`.
//! * If `s` selects two positions whose members are rank one but not
//!   proportional, `tau_s` is dominated by both rank-one operators, so its
//!   support lies in two different rays and `tau_s = 0`.
//! * Otherwise every member `s` selects is `w |k><k|` for one ray `k`, and
//!   `tau_s` (dominated by a rank-one operator) is `t_s |k><k|`.
//!
//! The model therefore exists iff nonnegative `t_s` over the consistent
//! strategies solve `sum_s [s selects (a,x)] t_s = weight(a,x)` at every
//! nonzero position. That linear feasibility problem is settled by NNLS.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{Assemblage, PureAssemblage, PureMember, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{multi_index, nnls, NnlsStatus, Op};
use crate::quantum::State;
use crate::tolerance::Tolerances;

/// Conditional distribution `p(a|x)` of one party, stored as `probs[x][a]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseTable {
    probs: Vec<Vec<f64>>,
}

impl ResponseTable {
    pub fn new(probs: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let k = probs.first().map(Vec::len).unwrap_or(0);
        if k == 0 {
            return Err(Error::InvalidModel("response table needs settings and outcomes".into()));
        }
        for (x, row) in probs.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidModel(format!("setting {x} has {} outcomes, expected {k}", row.len())));
            }
            if row.iter().any(|p| !p.is_finite() || *p < -tol) {
                return Err(Error::InvalidModel(format!("setting {x} has a negative probability")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidModel(format!("setting {x} sums to {sum}")));
            }
        }
        Ok(ResponseTable { probs })
    }

    /// Table that answers `choices[x]` with certainty.
    pub fn deterministic(outcomes: usize, choices: &[usize]) -> Result<Self> {
        let probs = choices
            .iter()
            .map(|&a| {
                if a >= outcomes {
                    return Err(Error::IndexOutOfRange { index: a, len: outcomes });
                }
                let mut row = vec![0.0; outcomes];
                row[a] = 1.0;
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        ResponseTable::new(probs, 0.0)
    }

    pub fn prob(&self, a: usize, x: usize) -> f64 {
        self.probs[x][a]
    }

    pub fn settings(&self) -> usize {
        self.probs.len()
    }

    pub fn outcomes(&self) -> usize {
        self.probs[0].len()
    }
}

/// One response function `x_i -> a_i` per party.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DeterministicStrategy {
    choices: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn new(scenario: &Scenario, choices: Vec<Vec<usize>>) -> Result<Self> {
        if choices.len() != scenario.parties() {
            return Err(Error::InvalidModel(format!("{} response functions for {} parties", choices.len(), scenario.parties())));
        }
        for (i, c) in choices.iter().enumerate() {
            if c.len() != scenario.settings()[i] || c.iter().any(|&a| a >= scenario.outcomes()[i]) {
                return Err(Error::InvalidModel(format!("response function of party {i} is out of range")));
            }
        }
        Ok(DeterministicStrategy { choices })
    }

    /// All `prod_i k_i^{m_i}` strategies; the first party's choice varies slowest.
    pub fn enumerate(scenario: &Scenario) -> Vec<DeterministicStrategy> {
        let local: Vec<Vec<Vec<usize>>> = (0..scenario.parties())
            .map(|i| {
                let (m, k) = (scenario.settings()[i], scenario.outcomes()[i]);
                let radix = vec![k; m];
                let count = k.pow(m as u32);
                (0..count).map(|t| multi_index(&radix, t)).collect()
            })
            .collect();
        let sizes: Vec<usize> = local.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        (0..total)
            .map(|g| {
                let digits = multi_index(&sizes, g);
                DeterministicStrategy { choices: digits.iter().enumerate().map(|(i, &t)| local[i][t].clone()).collect() }
            })
            .collect()
    }

    pub fn choices(&self) -> &[Vec<usize>] {
        &self.choices
    }

    pub fn outcome_for(&self, x: &[usize]) -> Vec<usize> {
        self.choices.iter().zip(x).map(|(c, &xi)| c[xi]).collect()
    }

    pub fn selects(&self, a: &[usize], x: &[usize]) -> bool {
        self.choices.iter().zip(a).zip(x).all(|((c, &ai), &xi)| c[xi] == ai)
    }

    pub fn tables(&self, scenario: &Scenario) -> Vec<ResponseTable> {
        self.choices
            .iter()
            .enumerate()
            .map(|(i, c)| ResponseTable::deterministic(scenario.outcomes()[i], c).expect("choices validated in range"))
            .collect()
    }
}

/// `sigma_{a|x} = sum_j q_j prod_i p^{(i)}_j(a_i|x_i) sigma_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct LhsModel {
    weights: Vec<f64>,
    states: Vec<State>,
    responses: Vec<Vec<ResponseTable>>,
}

impl LhsModel {
    pub fn new(weights: Vec<f64>, states: Vec<State>, responses: Vec<Vec<ResponseTable>>, tol: f64) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() || weights.len() != responses.len() {
            return Err(Error::InvalidModel(format!(
                "{} weights, {} states, {} response lists",
                weights.len(),
                states.len(),
                responses.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -tol) {
            return Err(Error::InvalidModel("negative weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidModel(format!("weights sum to {sum}")));
        }
        let dims = states[0].dims();
        if states.iter().any(|s| s.dims().iter().product::<usize>() != dims.iter().product::<usize>()) {
            return Err(Error::InvalidModel("hidden states differ in dimension".into()));
        }
        let shape: Vec<(usize, usize)> = responses[0].iter().map(|t| (t.settings(), t.outcomes())).collect();
        if shape.is_empty() {
            return Err(Error::InvalidModel("no parties".into()));
        }
        for r in &responses {
            let s: Vec<(usize, usize)> = r.iter().map(|t| (t.settings(), t.outcomes())).collect();
            if s != shape {
                return Err(Error::InvalidModel("response tables differ in shape across hidden variables".into()));
            }
        }
        Ok(LhsModel { weights, states, responses })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn responses(&self) -> &[Vec<ResponseTable>] {
        &self.responses
    }

    /// Scenario implied by the response tables.
    pub fn scenario(&self) -> Result<Scenario> {
        Scenario::new(
            self.responses[0].iter().map(ResponseTable::settings).collect(),
            self.responses[0].iter().map(ResponseTable::outcomes).collect(),
        )
    }
}

/// Assemblage generated by an LHS model.
pub fn lhs_assemblage(model: &LhsModel, scenario: &Scenario, tol: &Tolerances) -> Result<Assemblage> {
    if &model.scenario()? != scenario {
        return Err(Error::InvalidModel("model response tables do not match the scenario".into()));
    }
    let dims = model.states[0].dims().to_vec();
    Assemblage::from_fn(scenario.clone(), dims.clone(), tol, |a, x| {
        let mut acc = Op::zeros(&dims);
        for ((q, st), resp) in model.weights.iter().zip(&model.states).zip(&model.responses) {
            let p: f64 = resp.iter().enumerate().map(|(i, t)| t.prob(a[i], x[i])).product();
            if p != 0.0 {
                acc.add_scaled(q * p, st.op());
            }
        }
        acc
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NoLhsReason {
    /// Every deterministic strategy selects a zero member or two non-proportional kets.
    NoConsistentStrategy { strategies: usize, selecting_zero: usize, inconsistent: usize },
    /// The weight system over the consistent strategies has no nonnegative solution.
    Infeasible { residual: f64, consistent_strategies: usize },
    /// NNLS hit its iteration limit above the residual tolerance.
    NotConverged { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LhsVerdict {
    Lhs(LhsModel),
    NoLhs(NoLhsReason),
}

impl LhsVerdict {
    pub fn is_lhs(&self) -> bool {
        matches!(self, LhsVerdict::Lhs(_))
    }
}

/// Decide whether a pure-member assemblage admits an LHS model.
///
/// Cost grows with the number of global deterministic strategies,
/// `prod_i k_i^{m_i}`.
pub fn pure_lhs_decide(p: &PureAssemblage, tol: &Tolerances) -> LhsVerdict {
    let sc = p.scenario();
    let strategies = DeterministicStrategy::enumerate(sc);
    let xs = sc.setting_vectors();
    let mut selecting_zero = 0;
    let mut inconsistent = 0;
    let mut consistent = Vec::new();
    for s in &strategies {
        let selected: Vec<&PureMember> = xs.iter().map(|x| p.member(&s.outcome_for(x), x)).collect();
        if selected.iter().any(|m| m.is_zero()) {
            selecting_zero += 1;
            continue;
        }
        let kets: Vec<_> = selected.iter().filter_map(|m| m.ket()).collect();
        let proportional = kets.iter().skip(1).all(|k| 1.0 - kets[0].inner(k).norm() <= tol.abs_tol);
        if !proportional {
            inconsistent += 1;
            continue;
        }
        consistent.push(s);
    }
    if consistent.is_empty() {
        return LhsVerdict::NoLhs(NoLhsReason::NoConsistentStrategy {
            strategies: strategies.len(),
            selecting_zero,
            inconsistent,
        });
    }

    let rows: Vec<usize> = (0..sc.position_count()).filter(|&i| !p.members()[i].is_zero()).collect();
    let a = DMatrix::from_fn(rows.len(), consistent.len(), |r, c| {
        let pos = sc.position(rows[r]);
        if consistent[c].selects(&pos.a, &pos.x) {
            1.0
        } else {
            0.0
        }
    });
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|&i| p.members()[i].weight()));
    let sol = nnls(&a, &b, 1e-12);
    if sol.residual >= tol.nnls_residual_tol {
        return LhsVerdict::NoLhs(match sol.status {
            NnlsStatus::Converged => {
                NoLhsReason::Infeasible { residual: sol.residual, consistent_strategies: consistent.len() }
            }
            NnlsStatus::IterationLimit => NoLhsReason::NotConverged { residual: sol.residual },
        });
    }

    let total: f64 = sol.x.iter().sum();
    let mut weights = Vec::new();
    let mut states = Vec::new();
    let mut responses = Vec::new();
    for (s, &w) in consistent.iter().zip(sol.x.iter()) {
        if w <= 0.0 {
            continue;
        }
        let ket = p.member(&s.outcome_for(&xs[0]), &xs[0]).ket().expect("consistent strategies avoid zero members");
        weights.push(w / total);
        states.push(State::pure(ket).expect("unit ket"));
        responses.push(s.tables(sc));
    }
    match LhsModel::new(weights, states, responses, 1e-9) {
        Ok(m) => LhsVerdict::Lhs(m),
        Err(_) => LhsVerdict::NoLhs(NoLhsReason::Infeasible {
            residual: sol.residual,
            consistent_strategies: consistent.len(),
        }),
    }
}
