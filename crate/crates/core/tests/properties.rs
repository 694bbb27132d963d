use ebitnet::graphs::{
    import_json, symmetrised_edge_weight, CommunicationGraph, EntanglementGraph, GraphKind, Partition,
    ResourceGraphs,
};
use ebitnet::quantum::{
    local_dressing, local_equivalence_conjugate, permutation_unitary, random_state, random_unitary,
    BranchEnsemble, QubitId,
};
use ebitnet::rational::{factorial, ratio, Rational};
use ebitnet::Permutation;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random pure state on `qubits`, qubit `k` held by party `parties[k]`.
fn ensemble(seed: u64, parties: &[usize]) -> (BranchEnsemble, Vec<QubitId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = BranchEnsemble::new();
    let ids = e
        .allocate_with_state(parties, random_state(parties.len(), &mut rng))
        .unwrap();
    (e, ids)
}

fn cut_entropies(e: &BranchEnsemble, n: usize) -> Vec<f64> {
    Partition::all(n)
        .map(|c| {
            let side: Vec<usize> = c.side_a().iter().copied().collect();
            e.entanglement_entropy(&side).unwrap_or(0.0)
        })
        .collect()
}

fn rational_matrix(n: usize, raw: &[(i64, i64)], symmetric: bool) -> Vec<Vec<Rational>> {
    let mut m = vec![vec![ratio(0, 1); n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j || (symmetric && j < i) {
                continue;
            }
            let (p, q) = raw[k % raw.len()];
            k += 1;
            m[i][j] = ratio(p, q);
            if symmetric {
                m[j][i] = ratio(p, q);
            }
        }
    }
    m
}

fn parties_strategy() -> impl Strategy<Value = Vec<usize>> {
    (2usize..=4).prop_flat_map(|n| prop::collection::vec(1..=n, n..=6).prop_map(move |mut v| {
        // make sure every party holds at least one qubit
        for (i, slot) in v.iter_mut().take(n).enumerate() {
            *slot = i + 1;
        }
        v
    }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), k in 1usize..=3) {
        let (mut e, ids) = ensemble(seed, &[1, 1, 2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let u = random_unitary(k, &mut rng);
        e.apply_gate(&u.on(&ids[..k]).unwrap()).unwrap();
        prop_assert!(e.check_invariants().is_ok());
        prop_assert!((e.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_ignores_local_unitaries(seed in any::<u64>(), parties in parties_strategy()) {
        let n = *parties.iter().max().unwrap();
        let (mut e, ids) = ensemble(seed, &parties);
        let before = cut_entropies(&e, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
        for party in 1..=n {
            let local: Vec<QubitId> = ids.iter().copied().filter(|q| q.party == party).collect();
            let u = random_unitary(local.len(), &mut rng);
            e.apply_gate(&u.on(&local).unwrap()).unwrap();
        }
        for (a, b) in before.iter().zip(cut_entropies(&e, n)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_spectra_agree_across_a_cut(seed in any::<u64>(), split in 1usize..=4) {
        let (e, ids) = ensemble(seed, &[1, 1, 1, 1, 1]);
        let (a, b) = ids.split_at(split);
        let spectrum = |qs: &[QubitId]| {
            let rho = e.reduced_density(qs).unwrap();
            let mut ev: Vec<f64> = ebitnet::quantum::entropy::hermitian_eigenvalues(&rho)
                .into_iter()
                .filter(|x| *x > 1e-9)
                .collect();
            ev.sort_by(|x, y| y.total_cmp(x));
            ev
        };
        let (sa, sb) = (spectrum(a), spectrum(b));
        prop_assert_eq!(sa.len(), sb.len());
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn local_operations_never_raise_entanglement(seed in any::<u64>(), parties in parties_strategy()) {
        let n = *parties.iter().max().unwrap();
        let (mut e, ids) = ensemble(seed, &parties);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31));
        let mut last = cut_entropies(&e, n);
        for _ in 0..8 {
            let party = rng.random_range(1..=n);
            let local: Vec<QubitId> = ids.iter().copied().filter(|q| q.party == party).collect();
            if rng.random_bool(0.5) {
                let u = random_unitary(local.len(), &mut rng);
                e.apply_gate(&u.on(&local).unwrap()).unwrap();
            } else {
                let q = local[rng.random_range(0..local.len())];
                e.measure_computational(&[q], false).unwrap();
            }
            let now = cut_entropies(&e, n);
            for (a, b) in last.iter().zip(&now) {
                prop_assert!(*b <= a + 1e-9, "entropy rose from {} to {}", a, b);
            }
            last = now;
        }
    }

    #[test]
    fn symmetrise_is_idempotent_up_to_scale(raw in prop::collection::vec((0i64..9, 1i64..5), 1..12), n in 2usize..=4) {
        let g = EntanglementGraph::new(rational_matrix(n, &raw, true)).unwrap();
        let once = g.symmetrise().unwrap();
        let twice = once.symmetrise().unwrap();
        let scale = factorial(n);
        for i in 1..=n {
            for j in 1..=n {
                prop_assert_eq!(twice.weight(i, j), &(once.weight(i, j) * &scale));
            }
        }
    }

    #[test]
    fn symmetrise_forgets_labels(raw in prop::collection::vec((0i64..9, 1i64..5), 1..20), n in 2usize..=5) {
        let g = CommunicationGraph::new(rational_matrix(n, &raw, false)).unwrap();
        let s = g.symmetrise().unwrap();
        for p in Permutation::all(n).step_by(7) {
            prop_assert_eq!(&g.permuted(&p).symmetrise().unwrap(), &s);
        }
    }

    #[test]
    fn closed_form_matches_brute_force(raw in prop::collection::vec((0i64..9, 1i64..5), 1..30), n in 2usize..=6) {
        let e = EntanglementGraph::new(rational_matrix(n, &raw, true)).unwrap();
        let c = CommunicationGraph::new(rational_matrix(n, &raw, false)).unwrap();
        let se = e.symmetrise().unwrap();
        let sc = c.symmetrise().unwrap();
        let we = symmetrised_edge_weight(GraphKind::Entanglement, &e.total(), n);
        let wc = symmetrised_edge_weight(GraphKind::Communication, &c.total(), n);
        prop_assert_eq!(se.regular_weight(), Some(we));
        prop_assert_eq!(sc.regular_weight(), Some(wc));
    }

    #[test]
    fn graphs_round_trip_through_json(raw in prop::collection::vec((0i64..9, 1i64..5), 1..20), n in 1usize..=5) {
        let g = ResourceGraphs::new(
            EntanglementGraph::new(rational_matrix(n, &raw, true)).unwrap(),
            CommunicationGraph::new(rational_matrix(n, &raw, false)).unwrap(),
        ).unwrap();
        prop_assert_eq!(import_json(&g.to_json()).unwrap(), g);
    }
}

#[test]
fn regular_cut_weight_depends_only_on_side_size() {
    let e = ratio(5, 2);
    for n in 2..=7 {
        let g = EntanglementGraph::regular_complete(n, e.clone());
        for cut in Partition::all(n) {
            let a = cut.side_a().len() as i64;
            let b = cut.side_b().len() as i64;
            assert_eq!(g.cross_partition(&cut).unwrap(), &e * ratio(a * b, 1));
        }
    }
}

#[test]
fn minimum_even_weight_saturates_the_cut() {
    for n in [2usize, 4, 6] {
        let e = factorial(n) * ratio(4, n as i64);
        let g = EntanglementGraph::regular_complete(n, e);
        let cut = Partition::parity(n).unwrap();
        assert_eq!(g.cross_partition(&cut).unwrap(), factorial(n) * ratio(n as i64, 1));
    }
}

#[test]
fn dressed_permutations_conjugate_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let up = permutation_unitary(&Permutation::cycle(3));
    let pre: Vec<_> = (0..3).map(|_| random_unitary(1, &mut rng)).collect();
    let post: Vec<_> = (0..3).map(|_| random_unitary(1, &mut rng)).collect();
    let t = local_dressing(&up, &pre, &post).unwrap();
    let back = local_equivalence_conjugate(&t, &pre, &post).unwrap();
    assert!(back.distance_up_to_phase(&up) < 1e-10);
}
