use serde::Serialize;

use super::{Assemblage, Scenario};
use crate::error::{Error, Result};
use crate::linalg::Op;

/// Which family of no-signaling conditions a check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NsConstraint {
    /// Marginal over a proper subset of parties is independent of the others' settings.
    Marginal,
    /// `sum_a sigma_{a|x}` is independent of `x`.
    Total,
    /// The total has unit trace.
    Normalization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsViolation {
    pub constraint: NsConstraint,
    /// Parties whose outcomes are kept fixed.
    pub parties: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub settings: Vec<usize>,
    /// Complementary settings compared against the anchor (lexicographically smallest).
    pub against: Vec<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsReport {
    pub pass: bool,
    pub max_deviation: f64,
    pub constraints_checked: usize,
    pub violations: Vec<NsViolation>,
}

/// Check every no-signaling condition of `s`.
///
/// Deviations are the largest absolute entry of the difference between the two
/// marginal operators being compared.
pub fn verify_ns(s: &Assemblage, tol: f64) -> NsReport {
    let sc = s.scenario();
    let n = sc.parties();
    let mut report = NsReport { pass: true, max_deviation: 0.0, constraints_checked: 0, violations: Vec::new() };
    let record = |report: &mut NsReport, v: NsViolation| {
        report.constraints_checked += 1;
        report.max_deviation = report.max_deviation.max(v.magnitude);
        if v.magnitude.is_nan() || v.magnitude > tol {
            report.pass = false;
            report.violations.push(v);
        }
    };

    for mask in 1..(1usize << n) - 1 {
        let kept: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        let kept_sc = sub_scenario(sc, &kept);
        let rest_sc = sub_scenario(sc, &rest);
        for x_i in kept_sc.setting_vectors() {
            for a_i in kept_sc.outcome_vectors() {
                let mut x_j = vec![0; rest.len()];
                let anchor = sum_complement(s, &kept, &a_i, &x_i, &rest, &x_j);
                for other in rest_sc.setting_vectors().into_iter().skip(1) {
                    x_j = other;
                    let m = sum_complement(s, &kept, &a_i, &x_i, &rest, &x_j);
                    let magnitude = anchor.max_abs_diff(&m);
                    record(
                        &mut report,
                        NsViolation {
                            constraint: NsConstraint::Marginal,
                            parties: kept.clone(),
                            outcomes: a_i.clone(),
                            settings: x_i.clone(),
                            against: x_j.clone(),
                            magnitude,
                        },
                    );
                }
            }
        }
    }

    let xs = sc.setting_vectors();
    let anchor = s.total(&xs[0]);
    for x in &xs {
        let t = s.total(x);
        if x != &xs[0] {
            record(
                &mut report,
                NsViolation {
                    constraint: NsConstraint::Total,
                    parties: Vec::new(),
                    outcomes: Vec::new(),
                    settings: xs[0].clone(),
                    against: x.clone(),
                    magnitude: anchor.max_abs_diff(&t),
                },
            );
        }
        let tr = t.trace();
        record(
            &mut report,
            NsViolation {
                constraint: NsConstraint::Normalization,
                parties: Vec::new(),
                outcomes: Vec::new(),
                settings: x.clone(),
                against: Vec::new(),
                magnitude: (tr.re - 1.0).abs().max(tr.im.abs()),
            },
        );
    }
    report
}

/// The reduced assemblage element `sigma_{a_I|x_I}` for the parties in `subset`.
///
/// Computed at the lexicographically smallest complementary settings after
/// checking that every other choice agrees within `tol`. An empty subset gives
/// the total operator; the full set gives the member itself.
pub fn marginal(s: &Assemblage, subset: &[usize], a_i: &[usize], x_i: &[usize], tol: f64) -> Result<Op> {
    let sc = s.scenario();
    let n = sc.parties();
    let mut kept = subset.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != subset.len() || kept.iter().any(|&i| i >= n) {
        return Err(Error::InvalidScenario(format!("invalid party subset {subset:?}")));
    }
    if a_i.len() != kept.len() || x_i.len() != kept.len() {
        return Err(Error::DimensionMismatch("outcome and setting vectors must match the subset".into()));
    }
    // Reorder the supplied digits to follow the sorted subset.
    let order: Vec<usize> = kept.iter().map(|k| subset.iter().position(|s| s == k).unwrap()).collect();
    let a_i: Vec<usize> = order.iter().map(|&p| a_i[p]).collect();
    let x_i: Vec<usize> = order.iter().map(|&p| x_i[p]).collect();
    let kept_sc = sub_scenario_opt(sc, &kept);
    if let Some(ks) = &kept_sc {
        if !ks.contains(&a_i, &x_i) {
            return Err(Error::InvalidScenario(format!("outcome {a_i:?} or setting {x_i:?} out of range")));
        }
    }
    let rest: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
    let Some(rest_sc) = sub_scenario_opt(sc, &rest) else {
        return Ok(s.member(&a_i, &x_i).clone());
    };
    let settings = rest_sc.setting_vectors();
    let anchor = sum_complement(s, &kept, &a_i, &x_i, &rest, &settings[0]);
    for x_j in &settings[1..] {
        let other = sum_complement(s, &kept, &a_i, &x_i, &rest, x_j);
        let magnitude = anchor.max_abs_diff(&other);
        if magnitude.is_nan() || magnitude > tol {
            return Err(Error::Signaling { location: format!("parties {kept:?} against settings {x_j:?}"), magnitude });
        }
    }
    Ok(anchor)
}

/// `sum_{a_J} sigma_{a_I a_J | x_I x_J}`.
fn sum_complement(s: &Assemblage, kept: &[usize], a_i: &[usize], x_i: &[usize], rest: &[usize], x_j: &[usize]) -> Op {
    let sc = s.scenario();
    let n = sc.parties();
    let mut x = vec![0; n];
    for (k, &p) in kept.iter().enumerate() {
        x[p] = x_i[k];
    }
    for (k, &p) in rest.iter().enumerate() {
        x[p] = x_j[k];
    }
    let mut acc = Op::zeros(s.trusted_dims());
    for a in sc.outcome_vectors() {
        if kept.iter().zip(a_i).all(|(&p, &v)| a[p] == v) {
            acc.add_scaled(1.0, s.member(&a, &x));
        }
    }
    acc
}

fn sub_scenario(sc: &Scenario, parties: &[usize]) -> Scenario {
    sub_scenario_opt(sc, parties).expect("nonempty party subset")
}

fn sub_scenario_opt(sc: &Scenario, parties: &[usize]) -> Option<Scenario> {
    if parties.is_empty() {
        return None;
    }
    Scenario::new(
        parties.iter().map(|&i| sc.settings()[i]).collect(),
        parties.iter().map(|&i| sc.outcomes()[i]).collect(),
    )
    .ok()
}
