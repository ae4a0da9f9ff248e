use std::collections::HashSet;

use ncgraph_core::linalg::{
    self, contains, joint_eigenprojectors, orthonormalize, rank_of_projector, spectral_projectors,
    subspace_equal, ComplexMatrix, C64, DEFAULT_CLUSTER_TOL, DEFAULT_TOL,
};
use ncgraph_core::ncgraph::{
    build_ncgraph, find_anticliques, is_operator_system, kl_verify, pauli_group_unitaries,
    verify_anticlique,
};
use ncgraph_core::pauli::{
    self, clifford_canonicalize, codespace_projector, normalizer, random_stabilizer_group,
    CliffordCircuit, Letter, PauliGroup, PauliString,
};
use ncgraph_core::stabilizer::{
    self, classical_stabilizer_check, numeric_vm0, perturb_invalid, stabilizer_span,
    valid_m0_check, valid_m0_sample, vm0_characterize, z_form_group,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = DEFAULT_TOL;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let entries = (0..d * d)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(d, entries).unwrap()
}

/// Diagonal roots of unity conjugated by one random Clifford.
fn commuting_family(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    let u = CliffordCircuit::random(n, 6 * n, rng).matrix().unwrap();
    (0..count)
        .map(|_| {
            let order = [2u32, 3, 4, 6, 8][rng.random_range(0..5)];
            let diag: Vec<C64> = (0..1 << n)
                .map(|_| {
                    let k = rng.random_range(0..order) as f64;
                    C64::from_polar(1.0, std::f64::consts::TAU * k / order as f64)
                })
                .collect();
            ComplexMatrix::diagonal(&diag).conjugate_by(&u).unwrap()
        })
        .collect()
}

fn projector_set_matches(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> bool {
    a.len() == b.len()
        && a.iter()
            .all(|p| b.iter().any(|q| p.distance(q).unwrap() <= 1e-9))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_decomposition_invariants(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        for u in commuting_family(n, 2, &mut r) {
            let dec = spectral_projectors(&u, DEFAULT_CLUSTER_TOL).unwrap();
            prop_assert!(dec.completeness_residual() <= 1e-9);
            prop_assert!(dec.orthogonality_residual() <= 1e-9);
            prop_assert!(dec.reconstruction_residual(&u) <= 1e-9);
            for (_, p) in &dec.pairs {
                prop_assert!(linalg::is_projector(p, 1e-9));
            }
        }
    }

    #[test]
    fn orthonormalize_idempotent_and_contains_basis(seed in any::<u64>(), count in 1usize..6) {
        let mut r = rng(seed);
        let mut mats: Vec<ComplexMatrix> = (0..count).map(|_| random_matrix(3, &mut r)).collect();
        // One dependent vector.
        mats.push(&mats[0] + &mats[count - 1].scale(C64::new(0.5, -2.0)));
        let s = orthonormalize(&mats, TOL).unwrap();
        prop_assert_eq!(s.rank(), count);
        let again = orthonormalize(s.basis(), TOL).unwrap();
        prop_assert_eq!(again.rank(), s.rank());
        for (a, b) in s.basis().iter().zip(again.basis()) {
            prop_assert!(a.distance(b).unwrap() <= TOL);
        }
        for b in s.basis() {
            prop_assert!(contains(&s, b, TOL).unwrap());
        }
    }

    #[test]
    fn joint_projectors_are_permutation_invariant(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let family = commuting_family(n, 3, &mut r);
        let forward = joint_eigenprojectors(&family, DEFAULT_CLUSTER_TOL).unwrap();
        let reversed: Vec<_> = family.iter().rev().cloned().collect();
        let backward = joint_eigenprojectors(&reversed, DEFAULT_CLUSTER_TOL).unwrap();
        let f: Vec<_> = forward.iter().map(|j| j.projector.clone()).collect();
        let b: Vec<_> = backward.iter().map(|j| j.projector.clone()).collect();
        prop_assert!(projector_set_matches(&f, &b));
        let total: usize = forward.iter().map(|j| j.rank).sum();
        prop_assert_eq!(total, 1 << n);
        for j in &forward {
            for (u, label) in family.iter().zip(&j.label) {
                let up = u * &j.projector;
                prop_assert!(up.distance(&j.projector.scale(*label)).unwrap() <= 1e-9);
            }
        }
    }

    #[test]
    fn stabilizer_projector_and_canonical_form(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let s = r.random_range(1..=n);
        let g = random_stabilizer_group(n, s, &mut r).unwrap();
        prop_assert!(g.is_stabilizer());
        prop_assert_eq!(g.elements.len(), 1 << s);
        let p = codespace_projector(&g).unwrap();
        prop_assert!(linalg::is_projector(&p, 1e-12));
        prop_assert_eq!(rank_of_projector(&p, 1e-12).unwrap(), 1 << (n - s));

        let c = clifford_canonicalize(&g).unwrap();
        prop_assert!(c.unitary.unitarity_residual() <= 1e-9);
        for (i, gen) in c.generators.iter().enumerate() {
            let zi = pauli::to_matrix(&PauliString::single(n, i, Letter::Z)).unwrap();
            let lhs = zi.conjugate_by(&c.unitary).unwrap();
            prop_assert!(lhs.distance(&pauli::to_matrix(gen).unwrap()).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn normalizer_closed_and_contains_group_for_random_groups() {
    let mut r = rng(7);
    for _ in 0..20 {
        let n = r.random_range(1..=3);
        let s = r.random_range(1..=n);
        let g = random_stabilizer_group(n, s, &mut r).unwrap();
        let norm = normalizer(&g).unwrap();
        assert_eq!(norm.len(), (1 << s) * 4usize.pow((n - s) as u32));
        let keys: HashSet<Vec<u8>> = norm.iter().map(PauliString::sigma_indices).collect();
        for a in &norm {
            for b in &norm {
                let prod = pauli::pauli_mul(a, b).unwrap();
                assert!(keys.contains(&prod.sigma_indices()));
            }
        }
        for e in &g.elements {
            assert!(keys.contains(&e.sigma_indices()));
        }
    }
}

#[test]
fn anticliques_never_fail_on_random_abelian_graphs() {
    let mut r = rng(11);
    let mut certified = 0;
    for trial in 0..60 {
        let n = r.random_range(1..=3);
        let s = r.random_range(1..=n);
        let coeffs = valid_m0_sample(n, s, trial).unwrap();
        let circuit = CliffordCircuit::random(n, 4 * n, &mut r);
        let u = circuit.matrix().unwrap();
        let z_group = z_form_group(n, s).unwrap();
        let gens: Vec<PauliString> = z_group
            .generators
            .iter()
            .map(|g| circuit.conjugate(g))
            .collect();
        let group = PauliGroup::generate(n, &gens).unwrap();
        let m0 = coeffs.to_matrix().unwrap().conjugate_by(&u).unwrap();
        let graph = build_ncgraph(pauli_group_unitaries(&group).unwrap(), m0, TOL).unwrap();
        assert!(is_operator_system(&graph.space, TOL).unwrap().0);
        let found = find_anticliques(&graph, TOL).unwrap();
        assert!(found.counterexamples.is_empty(), "trial {trial}");
        for cert in &found.certificates {
            assert!(
                verify_anticlique(&cert.projector, &graph.space, TOL)
                    .unwrap()
                    .holds
            );
        }
        certified += found.certificates.len();
    }
    assert!(certified > 0);
}

#[test]
fn generators_only_matches_all_elements() {
    for (n, gens) in [
        (1, "Z"),
        (2, "ZZ"),
        (2, "XX,ZZ"),
        (3, "ZZI,IZZ"),
        (3, "XXI,-ZZZ"),
        (3, "-YYI,ZZX"),
    ] {
        let group = PauliGroup::parse(n, gens).unwrap();
        let all = group.matrices().unwrap();
        let few: Vec<ComplexMatrix> = group
            .generators
            .iter()
            .map(|g| pauli::to_matrix(g).unwrap())
            .collect();
        let a = joint_eigenprojectors(&all, DEFAULT_CLUSTER_TOL).unwrap();
        let b = joint_eigenprojectors(&few, DEFAULT_CLUSTER_TOL).unwrap();
        let pa: Vec<_> = a.iter().map(|j| j.projector.clone()).collect();
        let pb: Vec<_> = b.iter().map(|j| j.projector.clone()).collect();
        assert!(projector_set_matches(&pa, &pb), "{gens}");

        // The anticlique search over the full graph sees the same lattice.
        let s = group.independent_generators();
        let u = clifford_canonicalize(&group).unwrap().unitary;
        let m0 = valid_m0_sample(n, s, 3)
            .unwrap()
            .to_matrix()
            .unwrap()
            .conjugate_by(&u)
            .unwrap();
        let graph = build_ncgraph(pauli_group_unitaries(&group).unwrap(), m0, TOL).unwrap();
        let found = find_anticliques(&graph, TOL).unwrap();
        let certified: Vec<_> = found
            .certificates
            .iter()
            .map(|c| c.projector.clone())
            .collect();
        assert!(certified
            .iter()
            .all(|p| pb.iter().any(|q| p.distance(q).unwrap() <= 1e-9)));
        assert_eq!(
            found.certificates.len() + found.counterexamples.len() + found.rank_one,
            pb.len()
        );
    }
}

#[test]
fn rank_one_projectors_always_compress() {
    let mut r = rng(5);
    for _ in 0..20 {
        let d = r.random_range(2..=4);
        let mut mats = vec![ComplexMatrix::identity(d)];
        mats.extend((0..3).map(|_| random_matrix(d, &mut r)));
        let space = orthonormalize(&mats, TOL).unwrap();
        let v: Vec<C64> = (0..d)
            .map(|_| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect();
        let p = ComplexMatrix::outer_projector(&v);
        assert!(verify_anticlique(&p, &space, TOL).unwrap().holds);
    }
}

#[test]
fn kl_lambda_is_hermitian_when_conditions_hold() {
    let mut r = rng(9);
    for _ in 0..10 {
        let g = random_stabilizer_group(3, 2, &mut r).unwrap();
        let p = codespace_projector(&g).unwrap();
        // Errors anticommuting pairwise-products with G, or in G.
        let errors: Vec<ComplexMatrix> = pauli::all_phase_free(3)
            .filter(|e| e.weight() <= 1)
            .map(|e| pauli::to_matrix(&e).unwrap())
            .collect();
        let kl = kl_verify(&p, &errors, TOL).unwrap();
        if kl.holds {
            assert!(kl.hermiticity_residual <= TOL);
        }
        let single = kl_verify(&p, &errors[..1], TOL).unwrap();
        assert!(single.holds);
    }
}

#[test]
fn scaling_m0_keeps_space_and_certificates() {
    let group = PauliGroup::parse(2, "ZZ").unwrap();
    let coeffs = valid_m0_sample(2, 1, 42).unwrap();
    let u = clifford_canonicalize(&group).unwrap().unitary;
    let m0 = coeffs.to_matrix().unwrap().conjugate_by(&u).unwrap();
    let base = build_ncgraph(pauli_group_unitaries(&group).unwrap(), m0.clone(), TOL).unwrap();
    let scaled = build_ncgraph(
        pauli_group_unitaries(&group).unwrap(),
        m0.scale(C64::new(-0.3, 2.5)),
        TOL,
    )
    .unwrap();
    assert!(subspace_equal(&base.space, &scaled.space, TOL).unwrap());
    let a = find_anticliques(&base, TOL).unwrap();
    let b = find_anticliques(&scaled, TOL).unwrap();
    let pa: Vec<_> = a.certificates.iter().map(|c| c.projector.clone()).collect();
    let pb: Vec<_> = b.certificates.iter().map(|c| c.projector.clone()).collect();
    assert!(projector_set_matches(&pa, &pb));
    for p in &pb {
        assert!(verify_anticlique(p, &scaled.space, TOL).unwrap().holds);
    }
}

#[test]
fn lemma_characterization_matches_numeric_operator_system() {
    let mut agree = 0;
    for trial in 0..240u64 {
        let n = 1 + (trial % 2) as usize;
        let s = 1 + (trial / 2 % n as u64) as usize;
        let valid = valid_m0_sample(n, s, trial).unwrap();
        let coeffs = if trial % 2 == 0 {
            valid
        } else {
            perturb_invalid(&valid, trial)
        };
        let analytic = valid_m0_check(&coeffs, TOL).unwrap().0;
        let graph = numeric_vm0(&coeffs, TOL).unwrap();
        let numeric = is_operator_system(&graph.space, TOL).unwrap().0;
        assert_eq!(analytic, numeric, "trial {trial}: {coeffs:?}");
        assert_eq!(analytic, trial % 2 == 0);
        agree += 1;
    }
    assert!(agree >= 200);
}

#[test]
fn analytic_span_matches_numeric_span() {
    for seed in 0..40 {
        let n = 1 + (seed % 3) as usize;
        let s = 1 + (seed as usize / 3) % n;
        let coeffs = valid_m0_sample(n, s, seed).unwrap();
        let analytic = vm0_characterize(&coeffs).unwrap();
        let numeric = numeric_vm0(&coeffs, TOL).unwrap().space;
        assert!(
            subspace_equal(&analytic, &numeric, TOL).unwrap(),
            "{coeffs:?}"
        );
    }
}

#[test]
fn random_samples_do_not_enlarge_the_span() {
    let group = z_form_group(2, 1).unwrap();
    let id = stabilizer_span(&group, TOL).unwrap();
    for seed in 0..15 {
        let coeffs = valid_m0_sample(2, 1, seed).unwrap();
        for b in numeric_vm0(&coeffs, TOL).unwrap().space.basis() {
            assert!(contains(&id.lhs, b, TOL).unwrap());
        }
    }
}

#[test]
fn span_identity_and_classical_check_on_random_groups() {
    let mut r = rng(13);
    for _ in 0..12 {
        let n = r.random_range(1..=3);
        let s = r.random_range(1..=n);
        let g = random_stabilizer_group(n, s, &mut r).unwrap();
        let id = stabilizer_span(&g, TOL).unwrap();
        assert!(id.equal, "{:?}", g.generators);
        assert_eq!(id.lhs.rank(), stabilizer::expected_span_rank(n, s));
        let z = stabilizer_span(&z_form_group(n, s).unwrap(), TOL).unwrap();
        assert_eq!(z.lhs.rank(), id.lhs.rank());
        assert!(classical_stabilizer_check(&g, TOL).unwrap().holds);
    }
}
