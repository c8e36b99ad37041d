//! Channel assemblages `{Lambda_{a|x}}`: families of completely positive maps
//! from the trusted input `C` to the trusted output `C~`, handled through their
//! Choi matrices.

mod asym;

use serde::Serialize;

pub use asym::{verify_asym_ns, verify_asym_ns_choi, AsymCondition, AsymNsReport, AsymViolation};

use crate::assemblage::{realize_members, verify_ns, Assemblage, NsReport, ResponseTable, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{kron, min_eigenvalue, partial_trace, Op};
use crate::quantum::{apply_channel_on_subsystems, maximally_entangled, verify_cptp, ChoiOp, Povm, State};
use crate::tolerance::Tolerances;

/// Completely positive maps indexed by `(a, x)`, all with the same signature.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAssemblage {
    scenario: Scenario,
    members: Vec<ChoiOp>,
}

impl ChannelAssemblage {
    pub fn new(scenario: Scenario, members: Vec<ChoiOp>, tol: &Tolerances) -> Result<Self> {
        if members.len() != scenario.position_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} members for {} positions",
                members.len(),
                scenario.position_count()
            )));
        }
        let (out_dims, in_dims) = (members[0].out_dims().to_vec(), members[0].in_dims().to_vec());
        for (i, m) in members.iter().enumerate() {
            let pos = scenario.position(i);
            if m.out_dims() != out_dims.as_slice() || m.in_dims() != in_dims.as_slice() {
                return Err(Error::DimensionMismatch(format!("member {pos} has a different signature")));
            }
            let min = min_eigenvalue(m.op());
            if min < -tol.abs_tol * (1.0 + m.op().max_abs()) {
                return Err(Error::NotPositive { position: pos.to_string(), min_eigenvalue: min });
            }
        }
        Ok(ChannelAssemblage { scenario, members })
    }

    /// Interpret a Choi-state assemblage on `C~ (x) C` as a channel assemblage.
    pub fn from_choi_assemblage(s: &Assemblage, out_dims: Vec<usize>, in_dims: Vec<usize>, tol: &Tolerances) -> Result<Self> {
        let members = s
            .members()
            .iter()
            .map(|m| ChoiOp::from_op(out_dims.clone(), in_dims.clone(), m.clone()))
            .collect::<Result<Vec<_>>>()?;
        ChannelAssemblage::new(s.scenario().clone(), members, tol)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn members(&self) -> &[ChoiOp] {
        &self.members
    }

    pub fn member(&self, a: &[usize], x: &[usize]) -> &ChoiOp {
        &self.members[self.scenario.index(a, x)]
    }

    pub fn out_dims(&self) -> &[usize] {
        self.members[0].out_dims()
    }

    pub fn in_dims(&self) -> &[usize] {
        self.members[0].in_dims()
    }

    pub fn d_out(&self) -> usize {
        self.members[0].out_dim()
    }

    pub fn d_in(&self) -> usize {
        self.members[0].in_dim()
    }

    /// Replace a single member.
    pub fn with_member(&self, a: &[usize], x: &[usize], choi: ChoiOp, tol: &Tolerances) -> Result<Self> {
        let mut members = self.members.clone();
        members[self.scenario.index(a, x)] = choi;
        ChannelAssemblage::new(self.scenario.clone(), members, tol)
    }

    /// Choi family as a state assemblage, without checking normalization.
    fn choi_family(&self, tol: &Tolerances) -> Result<Assemblage> {
        let mut dims = self.out_dims().to_vec();
        dims.extend_from_slice(self.in_dims());
        let members = self.members.iter().map(|m| m.op().clone()).collect();
        Assemblage::new(self.scenario.clone(), dims, members, tol)
    }

    /// `sum_a J(Lambda_{a|x})`.
    pub fn total(&self, x: &[usize]) -> ChoiOp {
        let base = self.scenario.setting_index(x) * self.scenario.outcome_count();
        let mut acc = self.members[base].clone();
        for m in &self.members[base + 1..base + self.scenario.outcome_count()] {
            acc = acc.try_add(m).expect("members share a signature");
        }
        acc
    }
}

/// Inputs of a quantum realization: a state on the untrusted systems, their
/// measurements, and a channel on `A_1..A_n C -> A_1..A_n C~`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub rho: State,
    pub povms: Vec<Povm>,
    pub channel: ChoiOp,
}

/// The channel assemblage of a quantum realization.
///
/// Computes `rho_tot = (E (x) id_C)(rho_A (x) phi+_CC)` and measures its
/// untrusted factors; what remains on `C~ (x) C` is the Choi matrix of each
/// member.
pub fn chanasm_from_realization(r: &ChannelRealization, tol: &Tolerances) -> Result<ChannelAssemblage> {
    let n = r.povms.len();
    let a_dims = r.rho.dims().to_vec();
    if a_dims.len() != n {
        return Err(Error::DimensionMismatch(format!("state has {} factors for {n} parties", a_dims.len())));
    }
    let e = &r.channel;
    if e.in_dims().len() != n + 1 || e.out_dims().len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "channel must act on {} factors and return {}, got {:?} -> {:?}",
            n + 1,
            n + 1,
            e.in_dims(),
            e.out_dims()
        )));
    }
    if e.in_dims()[..n] != a_dims[..] || e.out_dims()[..n] != a_dims[..] {
        return Err(Error::DimensionMismatch("channel does not act on the untrusted factors as given".into()));
    }
    let report = verify_cptp(e, tol.abs_tol);
    if !report.is_channel() {
        return Err(Error::NotCptp { cp: report.cp, tp: report.tp });
    }
    let d_c = e.in_dims()[n];
    let d_out = e.out_dims()[n];
    let phi = maximally_entangled(d_c).projector();
    let input = kron(r.rho.op(), &phi);
    let targets: Vec<usize> = (0..=n).collect();
    let rho_tot = apply_channel_on_subsystems(e, &input, &targets)?;
    let (sc, trusted, members) = realize_members(&rho_tot, &r.povms)?;
    debug_assert_eq!(trusted, vec![d_out, d_c]);
    let members = members
        .into_iter()
        .map(|m| ChoiOp::from_op(vec![d_out], vec![d_c], m.hermitian_part()))
        .collect::<Result<Vec<_>>>()?;
    ChannelAssemblage::new(sc, members, tol)
}

/// The Choi matrices as a state assemblage on `C~ (x) C`.
///
/// Fails with `NotNormalized` when some total does not have unit trace.
pub fn to_choi_assemblage(l: &ChannelAssemblage, tol: &Tolerances) -> Result<Assemblage> {
    let s = l.choi_family(tol)?;
    s.check_normalization(tol.abs_tol)?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsChannelReport {
    pub pass: bool,
    /// No-signaling check of the Choi family.
    pub choi_ns: NsReport,
    /// `max |Tr_{C~} total - I/d_C|` at the anchor settings.
    pub tp_deviation: f64,
    pub total_cp: bool,
    pub max_deviation: f64,
}

/// No-signaling check of a channel assemblage in Choi form: the Choi family is
/// no-signaling and its total has input marginal `I/d_C`.
pub fn verify_ns_channel(l: &ChannelAssemblage, tol: f64) -> NsChannelReport {
    let loose = Tolerances { abs_tol: f64::INFINITY, ..Tolerances::default() };
    let s = l.choi_family(&loose).expect("members already validated");
    let choi_ns = verify_ns(&s, tol);
    let x0 = vec![0; l.scenario.parties()];
    let total = l.total(&x0);
    let tp_deviation = total.input_marginal().max_abs_diff(&Op::maximally_mixed(l.in_dims()));
    let total_cp = min_eigenvalue(total.op()) >= -tol;
    let max_deviation = choi_ns.max_deviation.max(tp_deviation);
    NsChannelReport { pass: choi_ns.pass && tp_deviation <= tol, choi_ns, tp_deviation, total_cp, max_deviation }
}

/// `sum_j prod_i p^{(i)}_j(a_i|x_i) Lambda_j`.
///
/// Weights of the hidden variable are carried by the maps themselves, so
/// `sum_j Lambda_j` must be a channel.
pub fn local_channel_assemblage(
    tables: &[Vec<ResponseTable>],
    maps: &[ChoiOp],
    scenario: &Scenario,
    tol: &Tolerances,
) -> Result<ChannelAssemblage> {
    if tables.is_empty() || tables.len() != maps.len() {
        return Err(Error::InvalidModel(format!("{} table lists for {} maps", tables.len(), maps.len())));
    }
    for t in tables {
        let ok = t.len() == scenario.parties()
            && t.iter().enumerate().all(|(i, r)| r.settings() == scenario.settings()[i] && r.outcomes() == scenario.outcomes()[i]);
        if !ok {
            return Err(Error::InvalidModel("response tables do not match the scenario".into()));
        }
    }
    let mut total = maps[0].clone();
    for m in &maps[1..] {
        total = total.try_add(m)?;
    }
    let report = verify_cptp(&total, tol.abs_tol);
    if !report.is_channel() {
        return Err(Error::NotCptp { cp: report.cp, tp: report.tp });
    }
    let members = scenario
        .positions()
        .map(|p| {
            let mut acc = maps[0].scale(0.0);
            for (t, m) in tables.iter().zip(maps) {
                let w: f64 = t.iter().enumerate().map(|(i, r)| r.prob(p.a[i], p.x[i])).product();
                if w != 0.0 {
                    acc = acc.try_add(&m.scale(w))?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelAssemblage::new(scenario.clone(), members, tol)
}

/// The common total map, anchored at the smallest settings.
///
/// Fails with `Signaling` if another setting gives a different total beyond
/// `tol`, and with `NotCptp` if the total is not a channel.
pub fn channel_totals(l: &ChannelAssemblage, tol: f64) -> Result<ChoiOp> {
    let xs = l.scenario.setting_vectors();
    let anchor = l.total(&xs[0]);
    for x in &xs[1..] {
        let magnitude = anchor.op().max_abs_diff(l.total(x).op());
        if magnitude > tol {
            return Err(Error::Signaling { location: format!("total at settings {x:?}"), magnitude });
        }
    }
    let report = verify_cptp(&anchor, tol);
    if !report.is_channel() {
        return Err(Error::NotCptp { cp: report.cp, tp: report.tp });
    }
    Ok(anchor)
}

/// `Tr_{C~}` of a Choi-space operator whose first `out_factors` factors are outputs.
pub(crate) fn trace_output(op: &Op, out_factors: usize) -> Op {
    let keep: Vec<usize> = (out_factors..op.dims().len()).collect();
    partial_trace(op, &keep).expect("indices in range")
}
