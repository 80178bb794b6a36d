mod common;

use nalgebra::{DMatrix, DVector};
use netmf_inversion::classify::micro_f1;
use netmf_inversion::graph::{binarize_sample, binarize_topk, generate_sbm, load_edge_list, save_edge_list};
use netmf_inversion::invert_analytical::{invert_limiting, recover_degrees};
use netmf_inversion::invert_opt::lbfgs::{self, LbfgsConfig};
use netmf_inversion::invert_opt::{deepwalk_backwards_opt, LogitMatrix, Objective, OptConfig, NEWTON_ITERS};
use netmf_inversion::metrics::{average_path_length, conductance, rel_frobenius, triangle_count};
use netmf_inversion::netmf::{embedding_from_lowrank, limiting_pmi, low_rank_symmetric, pmi, ppmi};
use netmf_inversion::{Graph, SbmConfig};
use proptest::prelude::*;
use rand::Rng;

fn assert_simple(g: &Graph) {
    let a = g.adjacency();
    for i in 0..g.n() {
        assert_eq!(a[(i, i)], 0.0);
        for j in 0..g.n() {
            assert_eq!(a[(i, j)], a[(j, i)]);
            assert!((0.0..=1.0).contains(&a[(i, j)]));
        }
    }
}

fn permute(m: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(perm[i], perm[j])])
}

fn shuffled(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_graphs_are_simple(seed in any::<u64>(), n in 2usize..40, p in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let g = common::erdos_renyi(&mut rng, n, p);
        assert_simple(&g);
        prop_assert!(g.is_binary());
        prop_assert_eq!(g.volume(), 2.0 * g.edge_count() as f64);
    }

    #[test]
    fn topk_keeps_half_the_volume(seed in any::<u64>(), n in 2usize..25, frac in 0.0f64..1.0) {
        let mut rng = common::rng(seed);
        let w = common::random_weights(&mut rng, n, 0.0, 1.0);
        let capacity = n * (n - 1) / 2;
        let edges = (frac * capacity as f64).floor() as usize;
        let g = binarize_topk(&w, 2 * edges).unwrap();
        assert_simple(&g);
        prop_assert_eq!(g.edge_count(), edges);
    }

    #[test]
    fn sampled_binarization_is_simple(seed in any::<u64>(), n in 2usize..25) {
        let mut rng = common::rng(seed);
        let w = common::random_weights(&mut rng, n, 0.0, 1.0);
        let g = binarize_sample(&w, seed).unwrap();
        assert_simple(&g);
        prop_assert!(g.is_binary());
    }

    #[test]
    fn edge_list_round_trip(seed in any::<u64>(), n in 2usize..25, weighted in any::<bool>()) {
        let mut rng = common::rng(seed);
        let g = if weighted {
            Graph::from_adjacency(common::random_weights(&mut rng, n, 0.01, 1.0)).unwrap()
        } else {
            common::connected_erdos_renyi(&mut rng, n, 0.5)
        };
        let back = load_edge_list(&save_edge_list(&g)).unwrap();
        prop_assert_eq!(back.adjacency(), g.adjacency());
    }

    #[test]
    fn ppmi_symmetric_nonnegative(seed in any::<u64>(), n in 2usize..=30, t in 1usize..8) {
        let mut rng = common::rng(seed);
        let g = common::connected_erdos_renyi(&mut rng, n, 0.3);
        let m = ppmi(&g, t).unwrap().m;
        prop_assert!(m.iter().all(|&x| x.is_finite() && x >= 0.0));
        prop_assert_eq!(&m, &m.transpose());
    }

    #[test]
    fn ppmi_is_clamped_pmi(seed in any::<u64>(), n in 3usize..=20, t in 2usize..8) {
        let mut rng = common::rng(seed);
        let g = common::connected_erdos_renyi(&mut rng, n, 0.4);
        // pmi is defined wherever every pair is joined by a walk of length ≤ T
        if let Ok(full) = pmi(&g, t) {
            let m = ppmi(&g, t).unwrap().m;
            for (a, b) in m.iter().zip(full.iter()) {
                prop_assert!((a - b.max(0.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn low_rank_beats_random_projections(seed in any::<u64>(), k in 1usize..10) {
        let mut rng = common::rng(seed);
        let mut m = DMatrix::from_fn(10, 10, |_, _| rng.random_range(-1.0..1.0));
        m = &m + m.transpose();
        let best = (&m - low_rank_symmetric(&m, k, 1).unwrap().reconstruct()).norm();
        for _ in 0..20 {
            let q = DMatrix::from_fn(10, k, |_, _| rng.random_range(-1.0..1.0)).qr().q();
            let proj = &q * q.transpose();
            let other = (&m - &proj * &m * &proj).norm();
            prop_assert!(best <= other + 1e-12);
        }
    }

    #[test]
    fn embedding_round_trip(seed in any::<u64>(), n in 3usize..20, t in 1usize..6, k_frac in 0.1f64..=1.0) {
        let mut rng = common::rng(seed);
        let g = common::connected_erdos_renyi(&mut rng, n, 0.4);
        let k = ((k_frac * n as f64).ceil() as usize).clamp(1, n);
        let lr = low_rank_symmetric(&ppmi(&g, t).unwrap().m, k, t).unwrap();
        let e = embedding_from_lowrank(&lr);
        prop_assert!((e.gram() - lr.reconstruct()).amax() <= 1e-8);
    }

    #[test]
    fn exact_limit_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let g = common::invertible_graph(&mut rng, 5..=20);
        let m_inf = limiting_pmi(&g).unwrap();
        let d = recover_degrees(&m_inf, g.volume()).unwrap();
        prop_assert!((&d - g.degrees()).amax() <= 1e-6);
        let a = invert_limiting(&m_inf, &d, g.volume()).unwrap();
        prop_assert!((a - g.adjacency()).norm() <= 1e-6);
    }

    #[test]
    fn inversion_is_permutation_equivariant(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let g = common::invertible_graph(&mut rng, 5..=15);
        let perm = shuffled(&mut rng, g.n());
        let m_inf = limiting_pmi(&g).unwrap();
        let d = g.degrees();
        let a = invert_limiting(&m_inf, &d, g.volume()).unwrap();
        let d_perm = DVector::from_iterator(g.n(), perm.iter().map(|&i| d[i]));
        let a_perm = invert_limiting(&permute(&m_inf, &perm), &d_perm, g.volume()).unwrap();
        prop_assert!((a_perm - permute(&a, &perm)).amax() <= 1e-9);
    }

    #[test]
    fn noisy_inversion_stays_in_unit_interval(seed in any::<u64>(), noise in 0.0f64..5.0) {
        let mut rng = common::rng(seed);
        let g = common::invertible_graph(&mut rng, 5..=15);
        let mut m_inf = limiting_pmi(&g).unwrap();
        for x in m_inf.iter_mut() {
            *x += noise * rng.random_range(-1.0..1.0);
        }
        let a = invert_limiting(&m_inf, &g.degrees(), g.volume()).unwrap();
        prop_assert!(a.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn metric_oracles_agree(seed in any::<u64>(), n in 2usize..=30, p in 0.05f64..0.9) {
        let mut rng = common::rng(seed);
        let g = common::connected_erdos_renyi(&mut rng, n, p);
        prop_assert_eq!(triangle_count(&g).unwrap(), common::triangles_by_enumeration(&g));
        prop_assert_eq!(average_path_length(&g).unwrap(), common::apl_floyd_warshall(&g));
    }

    #[test]
    fn conductance_bounded_and_complement_symmetric(seed in any::<u64>(), n in 3usize..30) {
        let mut rng = common::rng(seed);
        let g = common::connected_erdos_renyi(&mut rng, n, 0.3);
        let size = rng.random_range(1..n);
        let perm = shuffled(&mut rng, n);
        let (s, rest) = perm.split_at(size);
        let phi = conductance(&g, s).unwrap();
        prop_assert!((0.0..=1.0).contains(&phi));
        prop_assert!((phi - conductance(&g, rest).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rel_frobenius_of_self_is_zero(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = common::rng(seed);
        let x = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        prop_assert_eq!(rel_frobenius(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn micro_f1_bounded_and_relabeling_invariant(seed in any::<u64>(), n in 1usize..30, labels in 2usize..6) {
        let mut rng = common::rng(seed);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<usize>> {
            (0..n)
                .map(|_| (0..labels).filter(|_| rng.random_bool(0.4)).collect::<Vec<_>>())
                .map(|mut v| { if v.is_empty() { v.push(0); } v })
                .collect()
        };
        let truth = draw(&mut rng);
        let pred = draw(&mut rng);
        let f = micro_f1(&pred, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let perm = shuffled(&mut rng, labels);
        let relabel = |s: &[Vec<usize>]| -> Vec<Vec<usize>> { s.iter().map(|v| v.iter().map(|&l| perm[l]).collect()).collect() };
        prop_assert_eq!(micro_f1(&relabel(&pred), &relabel(&truth)).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn logit_gradient_matches_finite_differences(seed in any::<u64>()) {
        let n = 8;
        let t = 3;
        let mut rng = common::rng(seed);
        let target_graph = common::connected_erdos_renyi(&mut rng, n, 0.4);
        let target = ppmi(&target_graph, t).unwrap().m;
        let volume = target_graph.volume();
        let upper: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random_range(-2.0..2.0)).collect();
        let obj = Objective { m_tk: &target, window_size: t, volume, newton_iters: 30 };
        let x = LogitMatrix::from_upper(n, upper.clone()).unwrap();
        let ev = obj.evaluate(&x).unwrap();
        // skip points next to the clamp kink
        let z = netmf_inversion::netmf::cooccurrence(&ev.adj, t).unwrap();
        prop_assume!(z.iter().all(|&v| (v - 1.0).abs() >= 1e-3));

        let h = 1e-5;
        let scale = lbfgs::inf_norm(&ev.grad).max(1.0);
        for p in 0..upper.len() {
            let mut plus = upper.clone();
            let mut minus = upper.clone();
            plus[p] += h;
            minus[p] -= h;
            let fp = obj.evaluate(&LogitMatrix::from_upper(n, plus).unwrap()).unwrap().loss;
            let fm = obj.evaluate(&LogitMatrix::from_upper(n, minus).unwrap()).unwrap().loss;
            let fd = (fp - fm) / (2.0 * h);
            let denom = ev.grad[p].abs().max(1e-6 * scale);
            prop_assert!((fd - ev.grad[p]).abs() / denom <= 1e-4, "component {p}: fd {fd} vs {}", ev.grad[p]);
        }
    }

    #[test]
    fn optimizer_conserves_volume_and_symmetry(seed in any::<u64>()) {
        let n = 10;
        let t = 4;
        let mut rng = common::rng(seed);
        let g = common::connected_erdos_renyi(&mut rng, n, 0.35);
        let target = ppmi(&g, t).unwrap().m;
        let volume = g.volume();
        let obj = Objective { m_tk: &target, window_size: t, volume, newton_iters: NEWTON_ITERS };
        let mut worst_volume: f64 = 0.0;
        let mut worst_asym: f64 = 0.0;
        let cfg = LbfgsConfig { max_iters: 40, ..LbfgsConfig::default() };
        lbfgs::minimize(
            |u: &[f64]| {
                // the driver treats failed evaluations as infeasible trial points
                let Ok(ev) = obj.evaluate(&LogitMatrix::from_upper(n, u.to_vec()).unwrap()) else {
                    return (f64::INFINITY, vec![0.0; u.len()]);
                };
                worst_volume = worst_volume.max((ev.adj.sum() - volume).abs() / volume);
                worst_asym = worst_asym.max((&ev.adj - ev.adj.transpose()).amax());
                (ev.loss, ev.grad)
            },
            vec![0.0; n * (n - 1) / 2],
            &cfg,
        );
        prop_assert!(worst_volume <= 1e-6, "volume error {worst_volume}");
        prop_assert!(worst_asym <= 1e-12);
    }

    #[test]
    fn optimizer_never_worse_than_start_and_deterministic(seed in any::<u64>()) {
        let n = 9;
        let t = 5;
        let mut rng = common::rng(seed);
        let g = common::connected_erdos_renyi(&mut rng, n, 0.4);
        let k = rng.random_range(2..=n);
        let target = low_rank_symmetric(&ppmi(&g, t).unwrap().m, k, t).unwrap().reconstruct();
        let cfg = OptConfig::with_max_iters(30);
        let a = deepwalk_backwards_opt(&target, t, g.volume(), &cfg).unwrap();
        let b = deepwalk_backwards_opt(&target, t, g.volume(), &cfg).unwrap();
        prop_assert!(a.final_loss <= a.loss_trace[0].loss);
        prop_assert!(a.loss_trace.windows(2).all(|w| w[1].loss <= w[0].loss));
        prop_assert_eq!(&a.adj_weighted, &b.adj_weighted);
        prop_assert_eq!(a.logits, b.logits);
    }
}

#[test]
fn limit_consistency_improves_with_window() {
    // triangle with a pendant path: connected and non-bipartite
    let g = Graph::from_edges(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)]).unwrap();
    let m_inf = limiting_pmi(&g).unwrap();
    let errors: Vec<f64> = [10usize, 100, 1000]
        .iter()
        .map(|&t| {
            let approx = (&m_inf / t as f64).add_scalar(1.0).map(f64::ln);
            (pmi(&g, t).unwrap() - approx).norm()
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn equal_probabilities_give_erdos_renyi_density() {
    let (n, p) = (30usize, 0.2);
    let pairs = (n * (n - 1) / 2) as f64;
    let total: usize = (0..100)
        .map(|seed| generate_sbm(&SbmConfig { n, num_clusters: 3, p_in: p, p_out: p, seed }).unwrap().0.edge_count())
        .sum();
    let trials = 100.0 * pairs;
    let sigma = (trials * p * (1.0 - p)).sqrt();
    assert!((total as f64 - trials * p).abs() <= 4.0 * sigma, "{total} edges over 100 seeds");
}
