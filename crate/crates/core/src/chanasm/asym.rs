use serde::Serialize;

use super::{trace_output, ChannelAssemblage};
use crate::assemblage::Assemblage;
use crate::error::{Error, Result};
use crate::linalg::Op;

/// The three conditions characterizing asymmetric no-signaling in Choi form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymCondition {
    /// `sum_a sigma_{ab|xy}` is independent of `x`.
    AliceOperator,
    /// `sum_b Tr_{C~} sigma_{ab|xy}` is independent of `y`.
    BobTrace,
    /// `sum_{ab} sigma_{ab|xy}` is independent of `(x, y)`.
    Total,
    /// `Tr_{C~}` of the total is `I/d_C`.
    TotalMarginal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymViolation {
    pub condition: AsymCondition,
    /// Fixed outcome (`b` for AliceOperator, `a` for BobTrace), if any.
    pub outcome: Option<usize>,
    /// Fixed setting paired with `outcome`, if any.
    pub setting: Option<usize>,
    /// Settings compared against the anchor.
    pub against: Vec<usize>,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymNsReport {
    pub pass: bool,
    pub max_deviation: f64,
    pub constraints_checked: usize,
    pub violations: Vec<AsymViolation>,
}

/// Asymmetric no-signaling check of a bipartite channel assemblage.
pub fn verify_asym_ns(l: &ChannelAssemblage, tol: f64) -> Result<AsymNsReport> {
    let mut dims = l.out_dims().to_vec();
    dims.extend_from_slice(l.in_dims());
    let members = l.members().iter().map(|m| m.op().clone()).collect::<Vec<_>>();
    check(l.scenario().parties(), l.scenario().settings(), l.scenario().outcomes(), |a, b, x, y| {
        &members[l.scenario().index(&[a, b], &[x, y])]
    }, l.out_dims().len(), &Op::maximally_mixed(l.in_dims()), &dims, tol)
}

/// Same check on a Choi-state assemblage on `C~ (x) C` with `dim C~ = d_out`.
pub fn verify_asym_ns_choi(s: &Assemblage, d_out: usize, tol: f64) -> Result<AsymNsReport> {
    let d = s.trusted_dim();
    if d_out == 0 || !d.is_multiple_of(d_out) {
        return Err(Error::DimensionMismatch(format!("output dimension {d_out} does not divide {d}")));
    }
    let d_in = d / d_out;
    let members = s
        .members()
        .iter()
        .map(|m| m.clone().with_dims(vec![d_out, d_in]))
        .collect::<Result<Vec<_>>>()?;
    let sc = s.scenario();
    check(sc.parties(), sc.settings(), sc.outcomes(), |a, b, x, y| &members[sc.index(&[a, b], &[x, y])], 1, &Op::maximally_mixed(&[d_in]), &[d_out, d_in], tol)
}

#[allow(clippy::too_many_arguments)]
fn check<'a>(
    parties: usize,
    settings: &[usize],
    outcomes: &[usize],
    member: impl Fn(usize, usize, usize, usize) -> &'a Op,
    out_factors: usize,
    marginal_target: &Op,
    dims: &[usize],
    tol: f64,
) -> Result<AsymNsReport> {
    if parties != 2 {
        return Err(Error::InvalidScenario(format!("asymmetric no-signaling needs two parties, got {parties}")));
    }
    let (mx, my) = (settings[0], settings[1]);
    let (ka, kb) = (outcomes[0], outcomes[1]);
    let mut report = AsymNsReport { pass: true, max_deviation: 0.0, constraints_checked: 0, violations: Vec::new() };
    let mut record = |v: AsymViolation| {
        report.constraints_checked += 1;
        report.max_deviation = report.max_deviation.max(v.magnitude);
        if v.magnitude.is_nan() || v.magnitude > tol {
            report.pass = false;
            report.violations.push(v);
        }
    };
    let sum = |terms: &mut dyn Iterator<Item = &'a Op>| {
        let mut acc = Op::zeros(dims);
        for t in terms {
            acc.add_scaled(1.0, t);
        }
        acc
    };

    for y in 0..my {
        for b in 0..kb {
            let anchor = sum(&mut (0..ka).map(|a| member(a, b, 0, y)));
            for x in 1..mx {
                let other = sum(&mut (0..ka).map(|a| member(a, b, x, y)));
                record(AsymViolation {
                    condition: AsymCondition::AliceOperator,
                    outcome: Some(b),
                    setting: Some(y),
                    against: vec![x],
                    magnitude: anchor.max_abs_diff(&other),
                });
            }
        }
    }
    for x in 0..mx {
        for a in 0..ka {
            let anchor = trace_output(&sum(&mut (0..kb).map(|b| member(a, b, x, 0))), out_factors);
            for y in 1..my {
                let other = trace_output(&sum(&mut (0..kb).map(|b| member(a, b, x, y))), out_factors);
                record(AsymViolation {
                    condition: AsymCondition::BobTrace,
                    outcome: Some(a),
                    setting: Some(x),
                    against: vec![y],
                    magnitude: anchor.max_abs_diff(&other),
                });
            }
        }
    }
    let total = |x: usize, y: usize| sum(&mut (0..ka).flat_map(|a| (0..kb).map(move |b| (a, b))).map(|(a, b)| member(a, b, x, y)));
    let anchor = total(0, 0);
    for x in 0..mx {
        for y in 0..my {
            if (x, y) != (0, 0) {
                record(AsymViolation {
                    condition: AsymCondition::Total,
                    outcome: None,
                    setting: None,
                    against: vec![x, y],
                    magnitude: anchor.max_abs_diff(&total(x, y)),
                });
            }
        }
    }
    record(AsymViolation {
        condition: AsymCondition::TotalMarginal,
        outcome: None,
        setting: None,
        against: vec![0, 0],
        magnitude: trace_output(&anchor, out_factors).max_abs_diff(marginal_target),
    });
    Ok(report)
}
