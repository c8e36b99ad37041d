use super::{Assemblage, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, kron, partial_trace, Op};
use crate::quantum::{Povm, State};
use crate::tolerance::Tolerances;

/// Hermitian operator `W` on the untrusted factors followed by the trusted
/// ones, together with one measurement family per untrusted party.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianRealization {
    w: Op,
    povms: Vec<Povm>,
}

impl HermitianRealization {
    pub fn new(w: Op, povms: Vec<Povm>, tol: f64) -> Result<Self> {
        if !is_hermitian(&w, tol * (1.0 + w.max_abs())) {
            return Err(Error::InvalidState("realization operator is not Hermitian".into()));
        }
        check_factors(&w, &povms)?;
        Ok(HermitianRealization { w, povms })
    }

    pub fn w(&self) -> &Op {
        &self.w
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }
}

/// Scenario implied by a list of measurement families.
pub fn scenario_of(povms: &[Povm]) -> Result<Scenario> {
    Scenario::new(povms.iter().map(Povm::settings).collect(), povms.iter().map(Povm::outcomes).collect())
}

fn check_factors(w: &Op, povms: &[Povm]) -> Result<()> {
    let dims = w.dims();
    if povms.is_empty() || dims.len() <= povms.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator with {} factors cannot host {} parties and a trusted system",
            dims.len(),
            povms.len()
        )));
    }
    for (i, p) in povms.iter().enumerate() {
        if dims[i] != p.dim() {
            return Err(Error::DimensionMismatch(format!(
                "party {i} measures dimension {} but factor {i} has dimension {}",
                p.dim(),
                dims[i]
            )));
        }
    }
    Ok(())
}

/// `Tr_{A_1..A_n}[(M_{a_1|x_1} x .. x M_{a_n|x_n} x I) W]` at every position.
///
/// The first `povms.len()` factors of `w` are measured; the remaining factors
/// are kept as the trusted system.
pub fn realize_members(w: &Op, povms: &[Povm]) -> Result<(Scenario, Vec<usize>, Vec<Op>)> {
    check_factors(w, povms)?;
    let sc = scenario_of(povms)?;
    let n = povms.len();
    let trusted: Vec<usize> = w.dims()[n..].to_vec();
    let keep: Vec<usize> = (n..w.dims().len()).collect();
    let id = Op::identity(&trusted);
    let members = sc
        .positions()
        .map(|p| {
            let mut m = povms[0].effect(p.x[0], p.a[0]).clone();
            for (i, povm) in povms.iter().enumerate().skip(1) {
                m = kron(&m, povm.effect(p.x[i], p.a[i]));
            }
            let m = kron(&m, &id);
            partial_trace(&m.compose(w)?, &keep)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((sc, trusted, members))
}

/// Assemblage produced by measuring the untrusted factors of `rho`.
pub fn assemblage_from_realization(rho: &State, povms: &[Povm], tol: &Tolerances) -> Result<Assemblage> {
    let (sc, trusted, members) = realize_members(rho.op(), povms)?;
    let members = members.into_iter().map(|m| m.hermitian_part()).collect();
    Assemblage::new(sc, trusted, members, tol)
}

/// Whether `h` reproduces every member of `s` within `tol` (max-abs entry).
pub fn verify_hermitian_realization(h: &HermitianRealization, s: &Assemblage, tol: f64) -> Result<bool> {
    let (sc, trusted, members) = realize_members(h.w(), h.povms())?;
    if &sc != s.scenario() || trusted.iter().product::<usize>() != s.trusted_dim() {
        return Err(Error::DimensionMismatch(format!(
            "realization gives scenario {:?} on dimension {}, assemblage has {:?} on {}",
            sc,
            trusted.iter().product::<usize>(),
            s.scenario(),
            s.trusted_dim()
        )));
    }
    Ok(members.iter().zip(s.members()).all(|(m, t)| m.max_abs_diff(t) <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::verify_ns;
    use crate::linalg::Ket;
    use crate::quantum::maximally_entangled;

    fn z_x_povm() -> Povm {
        let s = 0.5f64.sqrt();
        Povm::projective(
            &[
                vec![Ket::basis(&[2], &[0]), Ket::basis(&[2], &[1])],
                vec![Ket::from_real(vec![2], &[s, s]).unwrap(), Ket::from_real(vec![2], &[s, -s]).unwrap()],
            ],
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn single_party_steering_of_bell_state() {
        let rho = State::pure(&maximally_entangled(2)).unwrap();
        let tol = Tolerances::default();
        let s = assemblage_from_realization(&rho, &[z_x_povm()], &tol).unwrap();
        for (p, m) in s.iter() {
            assert!((m.real_trace() - 0.5).abs() < 1e-12, "{p}");
        }
        // Outcome a of Z steers to |a><a|/2.
        let expect = Ket::basis(&[2], &[1]).projector().scale(0.5);
        assert!(s.member(&[1], &[0]).max_abs_diff(&expect) < 1e-12);
        assert!(verify_ns(&s, 1e-12).pass);
    }

    #[test]
    fn product_state_factorizes() {
        let ra = Op::from_real_rows(vec![2], &[&[0.8, 0.1], &[0.1, 0.2]]).unwrap();
        let rb = Op::from_real_rows(vec![2], &[&[0.3, 0.0], &[0.0, 0.7]]).unwrap();
        let rc = Op::from_real_rows(vec![2], &[&[0.6, 0.2], &[0.2, 0.4]]).unwrap();
        let rho = State::new(kron(&kron(&ra, &rb), &rc), 1e-12).unwrap();
        let p = z_x_povm();
        let s = assemblage_from_realization(&rho, &[p.clone(), p.clone()], &Tolerances::default()).unwrap();
        for (pos, m) in s.iter() {
            let pa = p.effect(pos.x[0], pos.a[0]).compose(&ra).unwrap().real_trace();
            let pb = p.effect(pos.x[1], pos.a[1]).compose(&rb).unwrap().real_trace();
            assert!(m.max_abs_diff(&rc.scale(pa * pb)) < 1e-12, "{pos}");
        }
    }

    #[test]
    fn hermitian_realization_round_trip_and_sign_flip() {
        let rho = State::pure(&maximally_entangled(2)).unwrap();
        let tol = Tolerances::default();
        let s = assemblage_from_realization(&rho, &[z_x_povm()], &tol).unwrap();
        let h = HermitianRealization::new(rho.op().clone(), vec![z_x_povm()], 1e-9).unwrap();
        assert!(verify_hermitian_realization(&h, &s, 1e-9).unwrap());
        let flipped = HermitianRealization::new(rho.op().scale(-1.0), vec![z_x_povm()], 1e-9).unwrap();
        assert!(!verify_hermitian_realization(&flipped, &s, 1e-9).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let rho = State::maximally_mixed(&[3, 2]);
        assert!(matches!(
            assemblage_from_realization(&rho, &[z_x_povm()], &Tolerances::default()),
            Err(Error::DimensionMismatch(_))
        ));
        let rho = State::maximally_mixed(&[2]);
        assert!(assemblage_from_realization(&rho, &[z_x_povm()], &Tolerances::default()).is_err());
    }
}
