use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chansteer::assemblage::{canonicalize_pure, Assemblage, Position, PureAssemblage};
use chansteer::certify::{
    build_constraint_system, decomposition_analysis, inflexibility_structural_check, witness_eval, ConstraintMode, Verdict,
    Witness,
};
use chansteer::chanasm::{chanasm_from_realization, to_choi_assemblage, verify_asym_ns_choi, ChannelRealization};
use chansteer::fixtures::{appendix_realization, example1_asym_split, example1_realization, z_x_povm};
use chansteer::linalg::{lstsq, nullspace, Ket};
use chansteer::quantum::Povm;
use chansteer::{random, Error, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn choi_of(r: &ChannelRealization) -> Assemblage {
    to_choi_assemblage(&chanasm_from_realization(r, &tol()).unwrap(), &tol()).unwrap()
}

fn pure(r: &ChannelRealization) -> PureAssemblage {
    canonicalize_pure(&choi_of(r), &tol()).unwrap()
}

fn example1() -> PureAssemblage {
    pure(&example1_realization())
}

fn appendix() -> PureAssemblage {
    pure(&appendix_realization())
}

/// Example 1 with both parties' setting-1 basis rotated by small random angles.
fn perturbed_example1(r: &mut ChaCha8Rng) -> PureAssemblage {
    let rotated = |r: &mut ChaCha8Rng| {
        let t = std::f64::consts::FRAC_PI_4 + r.random_range(-0.3..0.3);
        let k0 = Ket::from_real(vec![2], &[t.cos(), t.sin()]).unwrap();
        let k1 = Ket::from_real(vec![2], &[-t.sin(), t.cos()]).unwrap();
        let z = vec![Ket::basis(&[2], &[0]), Ket::basis(&[2], &[1])];
        Povm::projective(&[z, vec![k0, k1]], 1e-12).unwrap()
    };
    let mut real = example1_realization();
    real.povms = vec![rotated(r), rotated(r)];
    pure(&real)
}

/// Assemblage obtained by replacing the coefficients of `p` with `coef`.
fn with_coefficients(p: &PureAssemblage, variables: &[Position], coef: &[f64]) -> Assemblage {
    let mut s = p.to_assemblage(&tol()).unwrap();
    for (pos, c) in variables.iter().zip(coef) {
        let m = s.member(&pos.a, &pos.x).clone();
        let scaled = m.scale(c / m.real_trace());
        s = s.with_member(&pos.a, &pos.x, scaled, &tol()).unwrap();
    }
    s
}

#[test]
fn example1_certificates() {
    let p = example1();
    let full = decomposition_analysis(&p, ConstraintMode::FullNs, &tol()).unwrap();
    assert_eq!((full.rank, full.nullity, full.verdict), (14, 0, Verdict::UniqueExtreme));
    assert!(full.witness_pair.is_none());
    assert!(full.recovered_ratio.iter().all(|r| (r - 1.0).abs() < 1e-9));

    let asym = decomposition_analysis(&p, ConstraintMode::AsymNs, &tol()).unwrap();
    assert_eq!((asym.rank, asym.nullity, asym.verdict), (13, 1, Verdict::NonUnique));
    // The free coordinates are exactly the four nonzero (., .|1, 0) members.
    let free: Vec<&Position> = asym.variables.iter().filter(|v| !asym.is_pinned(v)).collect();
    assert_eq!(free.len(), 4);
    assert!(free.iter().all(|v| v.x == vec![1, 0]));
    let pair = asym.witness_pair.as_ref().unwrap();
    assert!((pair.step - 0.25).abs() < 1e-9);
    let mut moved: Vec<f64> = pair.plus.iter().zip(&asym.reference).filter(|(a, b)| (*a - *b).abs() > 1e-9).map(|(a, _)| *a).collect();
    moved.sort_by(f64::total_cmp);
    assert_eq!(moved.len(), 4);
    for (got, want) in moved.iter().zip([0.125, 0.125, 0.375, 0.375]) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn witness_pairs_are_convex_splits() {
    let p = example1();
    let cert = decomposition_analysis(&p, ConstraintMode::AsymNs, &tol()).unwrap();
    let sys = build_constraint_system(&p, ConstraintMode::AsymNs).unwrap();
    let pair = cert.witness_pair.unwrap();
    let reference = p.to_assemblage(&tol()).unwrap();
    let mut halves = Vec::new();
    for coef in [&pair.plus, &pair.minus] {
        assert!(coef.iter().all(|&c| c >= 0.0));
        assert!(sys.residual(&DVector::from_column_slice(coef)) < 1e-9);
        let s = with_coefficients(&p, &cert.variables, coef);
        assert!(verify_asym_ns_choi(&s, 2, 1e-9).unwrap().pass);
        halves.push(s);
    }
    for (i, m) in reference.members().iter().enumerate() {
        let avg = (&halves[0].members()[i] + &halves[1].members()[i]).scale(0.5);
        assert!(m.max_abs_diff(&avg) < 1e-12);
    }
}

#[test]
fn published_split_lies_on_the_null_direction() {
    let p = example1();
    let cert = decomposition_analysis(&p, ConstraintMode::AsymNs, &tol()).unwrap();
    let sys = build_constraint_system(&p, ConstraintMode::AsymNs).unwrap();
    let (s1, _) = example1_asym_split(&tol()).unwrap();
    let c1 = DVector::from_iterator(
        cert.variables.len(),
        cert.variables.iter().map(|v| s1.member(&v.a, &v.x).real_trace()),
    );
    assert!(sys.residual(&c1) < 1e-12);
    let dir = &c1 - &sys.reference;
    let ns = nullspace(&sys.matrix, tol().rank_rel_tol);
    let proj: f64 = ns.basis.iter().map(|v| v.dot(&dir).powi(2)).sum::<f64>().sqrt();
    assert!((proj - dir.norm()).abs() < 1e-12);
}

#[test]
fn full_feasibility_implies_asymmetric_feasibility() {
    for p in [example1(), appendix()] {
        let full = build_constraint_system(&p, ConstraintMode::FullNs).unwrap();
        let asym = build_constraint_system(&p, ConstraintMode::AsymNs).unwrap();
        assert_eq!(full.variables, asym.variables);
        let ns = nullspace(&full.matrix, tol().rank_rel_tol);
        assert!(full.residual(&full.reference) < 1e-12);
        assert!(asym.residual(&full.reference) < 1e-12);
        for v in &ns.basis {
            assert!((&asym.matrix * v).amax() < 1e-9);
        }
        let nf = decomposition_analysis(&p, ConstraintMode::FullNs, &tol()).unwrap().nullity;
        let na = decomposition_analysis(&p, ConstraintMode::AsymNs, &tol()).unwrap().nullity;
        assert!(na >= nf);
    }
}

#[test]
fn unique_verdicts_survive_random_sampling() {
    // Project random coefficient vectors onto the affine solution set; with a
    // unique solution every projection lands on the reference.
    let mut r = ChaCha8Rng::seed_from_u64(17);
    for (p, mode) in [(example1(), ConstraintMode::FullNs), (appendix(), ConstraintMode::AsymNs)] {
        let cert = decomposition_analysis(&p, mode, &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::UniqueExtreme);
        assert!(cert.variables.len() <= 20);
        let sys = build_constraint_system(&p, mode).unwrap();
        for _ in 0..1000 {
            let c = DVector::from_fn(cert.variables.len(), |_, _| r.random_range(0.0..1.0));
            let feasible = &c - lstsq(&sys.matrix, &(&sys.matrix * &c - &sys.rhs), tol().rank_rel_tol);
            assert!(sys.residual(&feasible) < 1e-9);
            assert!((&feasible - &sys.reference).amax() < 1e-9);
        }
    }
}

#[test]
fn appendix_is_extreme_in_both_modes() {
    let p = appendix();
    for mode in [ConstraintMode::FullNs, ConstraintMode::AsymNs] {
        let cert = decomposition_analysis(&p, mode, &tol()).unwrap();
        assert_eq!((cert.nullity, cert.verdict), (0, Verdict::UniqueExtreme));
        assert_eq!(cert.variables.len(), 16);
        assert!(cert.recovered_ratio.iter().all(|r| (r - 1.0).abs() < 1e-9));
    }
}

#[test]
fn structural_check_implies_full_extremality() {
    let p = example1();
    assert_eq!(inflexibility_structural_check(&p, 1e-9).unwrap(), Some((1, 1)));
    let appendix_pair = inflexibility_structural_check(&appendix(), 1e-9).unwrap();
    assert!(appendix_pair.is_some());
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let mut hits = 0;
    for _ in 0..50 {
        let q = perturbed_example1(&mut r);
        if inflexibility_structural_check(&q, 1e-9).unwrap().is_some() {
            hits += 1;
            let cert = decomposition_analysis(&q, ConstraintMode::FullNs, &tol()).unwrap();
            assert_eq!(cert.verdict, Verdict::UniqueExtreme);
        }
    }
    assert!(hits > 0);
}

#[test]
fn structural_check_needs_the_binary_bipartite_scenario() {
    let mut real = example1_realization();
    real.povms = vec![z_x_povm(), Povm::projective(&[vec![Ket::basis(&[2], &[0]), Ket::basis(&[2], &[1])]], 1e-12).unwrap()];
    let p = pure(&real);
    assert!(matches!(inflexibility_structural_check(&p, 1e-9), Err(Error::ModeMismatch(_))));
}

#[test]
fn inconsistent_references_are_rejected() {
    let p = example1();
    let mut s = p.to_assemblage(&tol()).unwrap();
    let m = s.member(&[0, 0], &[0, 0]).scale(1.5);
    s = s.with_member(&[0, 0], &[0, 0], m, &tol()).unwrap();
    // Bypass normalization: the pure form carries the bad weight through.
    let loose = Tolerances { abs_tol: 1.0, ..tol() };
    let q = canonicalize_pure(&s, &loose).unwrap();
    assert!(matches!(decomposition_analysis(&q, ConstraintMode::FullNs, &tol()), Err(Error::InconsistentReference(_))));
}

#[test]
fn witness_is_maximized_by_its_reference() {
    let reference = choi_of(&example1_realization());
    let w = Witness::new(&reference, 1e-12);
    let top = witness_eval(&w, &reference).unwrap();
    assert!((top - 4.0).abs() < 1e-9);
    let mut r = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let mut real = example1_realization();
        real.povms = vec![random::projective_povm(&mut r, 2, 2), random::projective_povm(&mut r, 2, 2)];
        let s = choi_of(&real);
        assert!(witness_eval(&w, &s).unwrap() <= top + 1e-9);
    }
}
