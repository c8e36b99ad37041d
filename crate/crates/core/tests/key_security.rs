use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use chansteer::assemblage::canonicalize_pure;
use chansteer::certify::{decomposition_analysis, ConstraintMode};
use chansteer::chanasm::{chanasm_from_realization, to_choi_assemblage, verify_asym_ns, ChannelAssemblage};
use chansteer::fixtures::{appendix_realization, example1_realization};
use chansteer::linalg::Ket;
use chansteer::quantum::{Povm, State};
use chansteer::random;
use chansteer::security::{correlations, eavesdropper_pinning, perfect_key_check, CorrelationTable, MemberStatus};
use chansteer::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn z_povm(settings: usize) -> Povm {
    let z = vec![Ket::basis(&[2], &[0]), Ket::basis(&[2], &[1])];
    Povm::projective(&vec![z; settings], 1e-12).unwrap()
}

fn ket0() -> State {
    State::pure(&Ket::basis(&[2], &[0])).unwrap()
}

fn example1() -> ChannelAssemblage {
    chanasm_from_realization(&example1_realization(), &tol()).unwrap()
}

#[test]
fn example1_gives_a_perfect_key() {
    let t = correlations(&example1(), &ket0(), &z_povm(2)).unwrap();
    for z in 0..2 {
        assert!((t.get([0, 0, 0], [0, 0, z]) - 0.5).abs() < 1e-12);
        assert!((t.get([1, 1, 1], [0, 0, z]) - 0.5).abs() < 1e-12);
    }
    assert!(t.normalization_deviation() < 1e-12);
    assert!(t.min_entry() > -1e-12);
    assert!(perfect_key_check(&t, 0, 0, 1e-9));
    assert!(!perfect_key_check(&t, 1, 1, 1e-9));
}

#[test]
fn white_noise_spoils_the_key() {
    let t = correlations(&example1(), &ket0(), &z_povm(2)).unwrap().with_white_noise(0.1);
    // 0.9 * 1/2 + 0.1 / 8
    assert!((t.get([0, 0, 0], [0, 0, 0]) - 0.4625).abs() < 1e-12);
    assert!(!perfect_key_check(&t, 0, 0, 1e-9));
}

#[test]
fn tables_are_no_signaling() {
    let mut r = ChaCha8Rng::seed_from_u64(31);
    for l in [example1(), chanasm_from_realization(&appendix_realization(), &tol()).unwrap()] {
        assert!(verify_asym_ns(&l, 1e-9).unwrap().pass);
        for _ in 0..10 {
            let rho = random::state(&mut r, &[2], 2);
            let charlie = random::povm(&mut r, 2, 2, 2);
            let t = correlations(&l, &rho, &charlie).unwrap();
            let [mx, my, mz] = t.settings();
            for x in 0..mx {
                for y in 0..my {
                    // Sum over c does not depend on z.
                    for a in 0..2 {
                        for b in 0..2 {
                            let pz = |z: usize| (0..2).map(|c| t.get([a, b, c], [x, y, z])).sum::<f64>();
                            assert!((0..mz).all(|z| (pz(z) - pz(0)).abs() < 1e-9));
                        }
                    }
                    // Sum over a does not depend on x, sum over b not on y.
                    for z in 0..mz {
                        for b in 0..2 {
                            for c in 0..2 {
                                let px = |x: usize| (0..2).map(|a| t.get([a, b, c], [x, y, z])).sum::<f64>();
                                assert!((px(x) - px(0)).abs() < 1e-9);
                            }
                        }
                        for a in 0..2 {
                            for c in 0..2 {
                                let py = |y: usize| (0..2).map(|b| t.get([a, b, c], [x, y, z])).sum::<f64>();
                                assert!((py(y) - py(0)).abs() < 1e-9);
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn key_check_ignores_the_order_of_charlies_settings() {
    let l = example1();
    let s = 0.5f64.sqrt();
    let z = vec![Ket::basis(&[2], &[0]), Ket::basis(&[2], &[1])];
    let x = vec![Ket::from_real(vec![2], &[s, s]).unwrap(), Ket::from_real(vec![2], &[s, -s]).unwrap()];
    let zx = Povm::projective(&[z.clone(), x.clone()], 1e-12).unwrap();
    let xz = Povm::projective(&[x, z], 1e-12).unwrap();
    let a = perfect_key_check(&correlations(&l, &ket0(), &zx).unwrap(), 0, 0, 1e-9);
    let b = perfect_key_check(&correlations(&l, &ket0(), &xz).unwrap(), 0, 0, 1e-9);
    assert_eq!(a, b);
    let zz = correlations(&l, &ket0(), &z_povm(3)).unwrap();
    assert!(perfect_key_check(&zz, 0, 0, 1e-9));
}

#[test]
fn pinning_on_the_fixtures() {
    let t = tol();
    let p = canonicalize_pure(&to_choi_assemblage(&example1(), &t).unwrap(), &t).unwrap();
    let key = eavesdropper_pinning(&p, 0, 0, &t).unwrap();
    assert!(key.certified);
    let statuses: Vec<MemberStatus> = key.members.iter().map(|m| m.status).collect();
    assert_eq!(statuses, vec![MemberStatus::Pinned, MemberStatus::Zero, MemberStatus::Zero, MemberStatus::Pinned]);
    let other = eavesdropper_pinning(&p, 1, 0, &t).unwrap();
    assert!(!other.certified);
    assert!(other.members.iter().all(|m| m.status == MemberStatus::Free));

    let q = canonicalize_pure(
        &to_choi_assemblage(&chanasm_from_realization(&appendix_realization(), &t).unwrap(), &t).unwrap(),
        &t,
    )
    .unwrap();
    for x in 0..2 {
        for y in 0..2 {
            assert!(eavesdropper_pinning(&q, x, y, &t).unwrap().certified);
        }
    }
    assert!(eavesdropper_pinning(&p, 2, 0, &t).is_err());
}

#[test]
fn pinned_members_agree_across_the_witness_pair() {
    let t = tol();
    let p = canonicalize_pure(&to_choi_assemblage(&example1(), &t).unwrap(), &t).unwrap();
    let cert = eavesdropper_pinning(&p, 0, 0, &t).unwrap();
    assert!(cert.certified);
    let analysis = decomposition_analysis(&p, ConstraintMode::AsymNs, &t).unwrap();
    let pair = analysis.witness_pair.unwrap();
    for (i, v) in analysis.variables.iter().enumerate() {
        if v.x == vec![0, 0] {
            assert!((pair.plus[i] - pair.minus[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn nested_layout_round_trips() {
    let t = correlations(&example1(), &ket0(), &z_povm(2)).unwrap();
    let nested = t.nested();
    assert_eq!((nested.len(), nested[0].len(), nested[0][0].len()), (2, 2, 2));
    assert_eq!(CorrelationTable::from_nested(&nested).unwrap(), t);
    assert_eq!(nested[0][0][1][1][1][1], t.get([1, 1, 1], [0, 0, 1]));
}
