mod common;

use std::f64::consts::SQRT_2;

use common::*;
use ctqw_core::dynamics::JohnsonSimulator;
use ctqw_core::framework::{
    analyze, classify, classify_dense, eigenbasis, find_eigenvalues, gamma_asymptotic,
    gamma_midpoint, leakage_bound, midpoint_residual, reconstruct_eigenvector, AsymptoticSums,
    GammaChoice, SearchInstance, SecularMatrix,
};
use ctqw_core::graph::{Graph, MarkedSet};
use ctqw_core::johnson::{johnson_predictions, JohnsonParams};
use ctqw_core::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bipartite(n: usize) -> SearchInstance {
    let g = Graph::complete_bipartite(n, n).unwrap();
    let w = MarkedSet::new((0..n).collect(), 2 * n).unwrap();
    SearchInstance::from_graph(g, w, 1.0 / (2.0 * n as f64)).unwrap()
}

fn johnson(n: usize, k: usize, delta: usize, gamma: f64) -> SearchInstance {
    let g = Graph::johnson(n, k).unwrap();
    let w = MarkedSet::johnson_pair(&g, delta).unwrap();
    SearchInstance::from_graph(g, w, gamma).unwrap()
}

fn johnson_asymptotic(n: usize, k: usize, delta: usize) -> SearchInstance {
    let t = johnson(n, k, delta, 1.0);
    let g = gamma_asymptotic(&AsymptoticSums::new(&t), None).unwrap().gamma;
    t.with_gamma(g).unwrap()
}

#[test]
fn hamiltonian_on_k2() {
    let g = Graph::complete(2).unwrap();
    let inst = SearchInstance::from_graph(g, MarkedSet::new(vec![0, 1], 2).unwrap(), 1.0).unwrap();
    let h = inst.hamiltonian();
    assert_eq!(h, DMatrix::from_element(2, 2, -1.0));
    let e = dense_eigen(&h);
    assert!((e.values[0] + 2.0).abs() < 1e-14 && e.values[1].abs() < 1e-14);
}

#[test]
fn hamiltonian_small_gamma_limit() {
    // As γ → 0 the spectrum tends to {-1, 0, …, 0}.
    let g = Graph::hypercube(3).unwrap();
    let inst = SearchInstance::from_graph(g, MarkedSet::new(vec![5], 8).unwrap(), 1e-9).unwrap();
    let e = dense_eigen(&inst.hamiltonian());
    assert!((e.values[0] + 1.0).abs() < 1e-8);
    assert!(e.values[1..].iter().all(|x| x.abs() < 1e-8));
}

#[test]
fn bipartite_block_on_symmetric_subspace() {
    for n in [2, 4, 7] {
        let inst = bipartite(n);
        let mut basis = DMatrix::zeros(2 * n, 2);
        for v in 0..n {
            basis[(v, 0)] = 1.0 / (n as f64).sqrt();
            basis[(n + v, 1)] = 1.0 / (n as f64).sqrt();
        }
        let block = basis.transpose() * inst.hamiltonian() * &basis;
        let want = DMatrix::from_row_slice(2, 2, &[-1.0, -0.5, -0.5, 0.0]);
        assert!((block - want).amax() < 1e-14);
    }
}

#[test]
fn sparse_and_dense_hamiltonian_agree() {
    let inst = johnson_asymptotic(7, 3, 2);
    let x = DVector::from_fn(inst.num_vertices(), |i, _| (i as f64 * 0.37).sin());
    assert!((inst.apply_hamiltonian(&x) - inst.hamiltonian() * &x).amax() < 1e-13);
}

#[test]
fn secular_matrix_single_vertex() {
    let g = Graph::hypercube(4).unwrap();
    let inst = SearchInstance::from_graph(g, MarkedSet::new(vec![3], 16).unwrap(), 0.2).unwrap();
    let lambda = -1.3;
    let m = SecularMatrix::new(&inst, lambda).unwrap();
    let want: f64 = 1.0
        + inst
            .spectrum()
            .phis()
            .iter()
            .enumerate()
            .map(|(l, phi)| inst.spectrum().projector(l)[(3, 3)] / (lambda + 0.2 * phi))
            .sum::<f64>();
    assert_eq!(m.entries.shape(), (1, 1));
    assert!((m.entries[(0, 0)] - want).abs() < 1e-13);
}

#[test]
fn secular_matrix_shape_and_limits() {
    for delta in 1..=3 {
        let inst = johnson(9, 3, delta, 0.1);
        for lambda in [-5.0, -1.0, -0.35, 0.4] {
            let m = SecularMatrix::new(&inst, lambda).unwrap().entries;
            assert!((m[(0, 0)] - m[(1, 1)]).abs() < 1e-12);
            assert_eq!(m[(0, 1)], m[(1, 0)]);
        }
        let far = SecularMatrix::new(&inst, -1e9).unwrap().entries;
        assert!((far - DMatrix::identity(2, 2)).amax() < 1e-8);
    }
    let inst = johnson(9, 3, 1, 0.1);
    assert!(matches!(SecularMatrix::new(&inst, inst.ground_pole()), Err(Error::Pole { .. })));
}

#[test]
fn johnson_roots_match_dense() {
    let inst = johnson_asymptotic(6, 2, 1);
    let dense = dense_eigen(&inst.hamiltonian());
    let roots = find_eigenvalues(&inst).unwrap();
    assert!(!roots.is_empty());
    for r in &roots {
        let d = dense.values.iter().map(|x| (x - r.lambda).abs()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-9, "root {} off by {d:e}", r.lambda);
    }
    // The ground state is a simple root below the ground pole.
    assert!(roots[0].lambda < inst.ground_pole() && roots[0].nullity == 1);
    assert!((roots[0].lambda - dense.values[0]).abs() < 1e-9);
}

#[test]
fn bipartite_roots() {
    for n in [3, 8] {
        let roots = find_eigenvalues(&bipartite(n)).unwrap();
        for want in [(-1.0 - SQRT_2) / 2.0, (-1.0 + SQRT_2) / 2.0] {
            assert!(roots.iter().any(|r| (r.lambda - want).abs() < 1e-10));
        }
    }
}

#[test]
fn ground_state_of_complete_graph_has_one_sign() {
    let g = Graph::complete(9).unwrap();
    let inst = SearchInstance::from_graph(g, MarkedSet::new(vec![4], 9).unwrap(), 1.0 / 9.0).unwrap();
    let root = &find_eigenvalues(&inst).unwrap()[0];
    let v = reconstruct_eigenvector(&inst, root.lambda, &root.kernel.column(0).into_owned()).unwrap();
    assert!(v.c > 0.0);
    assert!(v.state[4] > 0.0);
    assert!(v.state.iter().all(|x| *x > 0.0));
    assert!(v.residual < 1e-8);
}

#[test]
fn johnson_ground_state_is_symmetric_in_the_pair() {
    let inst = johnson_asymptotic(6, 2, 1);
    let root = &find_eigenvalues(&inst).unwrap()[0];
    let v = reconstruct_eigenvector(&inst, root.lambda, &root.kernel.column(0).into_owned()).unwrap();
    let w = inst.marked().vertices();
    assert!((v.state[w[0]] - v.state[w[1]]).abs() < 1e-12);
}

#[test]
fn reconstruction_rejects_non_kernel_vectors() {
    let inst = johnson_asymptotic(6, 2, 1);
    let u = DVector::from_vec(vec![1.0, 0.0]);
    assert!(matches!(reconstruct_eigenvector(&inst, -3.0, &u), Err(Error::NotInKernel { .. })));
}

#[test]
fn eigenvectors_satisfy_the_eigen_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, g, w) in mixed_instances(&mut rng).into_iter().take(20) {
        let t = SearchInstance::from_graph(g, w, 1.0).unwrap();
        let a = analyze(&t, GammaChoice::Asymptotic).unwrap();
        let h = a.instance.hamiltonian();
        for root in find_eigenvalues(&a.instance).unwrap() {
            for v in eigenbasis(&a.instance, &root).unwrap() {
                assert!((v.state.norm() - 1.0).abs() < 1e-12);
                let r = (&h * &v.state - &v.state * v.lambda).norm();
                assert!(r < 1e-8, "{name}: residual {r:e}");
                assert!(v.c > 0.0);
            }
        }
    }
}

#[test]
fn bipartite_classification() {
    for n in [3, 6] {
        let inst = bipartite(n);
        for c in [classify(&inst).unwrap(), classify_dense(&inst).unwrap()] {
            assert_eq!(c.lambda_plus.position_poles_once, n + 2);
            assert!((c.lambda_plus() - (SQRT_2 - 1.0) / 2.0).abs() < 1e-9);
        }
    }
}

#[test]
fn johnson_lambda_plus_between_first_poles() {
    for delta in 1..=2 {
        let inst = johnson_asymptotic(30, 2, delta);
        let c = classify(&inst).unwrap();
        let poles = inst.poles();
        assert!(c.lambda_plus() > poles[0] && c.lambda_plus() < poles[1]);
        assert_eq!(c.lambda_plus.multiplicity, 1);
    }
}

#[test]
fn single_marked_vertex_takes_second_eigenvalue() {
    let g = Graph::hypercube(5).unwrap();
    let inst = SearchInstance::from_graph(g, MarkedSet::new(vec![0], 32).unwrap(), 0.2).unwrap();
    let c = classify(&inst).unwrap();
    let dense = classify_dense(&inst).unwrap();
    assert!((c.lambda_plus() - dense.lambda_plus()).abs() < 1e-9);
    assert!(c.lambda_plus.position >= 2);
    assert!(c.lambda_plus.skipped.iter().all(|s| s.lambda < c.lambda_plus()));
}

#[test]
fn secular_and_dense_classifications_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, g, w) in mixed_instances(&mut rng) {
        let t = SearchInstance::from_graph(g, w, 1.0).unwrap();
        let gamma = gamma_asymptotic(&AsymptoticSums::new(&t), None).unwrap().gamma;
        let inst = t.with_gamma(gamma).unwrap();
        let (a, b) = (classify(&inst).unwrap(), classify_dense(&inst).unwrap());
        assert!((a.lambda_minus() - b.lambda_minus()).abs() < 1e-9, "{name}");
        assert!((a.lambda_plus() - b.lambda_plus()).abs() < 1e-8, "{name}");
        assert_eq!(a.lambda_plus.multiplicity, b.lambda_plus.multiplicity, "{name}");
    }
}

#[test]
fn midpoint_on_bipartite() {
    for n in [2, 5, 9] {
        let sol = gamma_midpoint(&bipartite(n)).unwrap();
        assert!((sol.gamma - 1.0 / (2.0 * n as f64)).abs() < 1e-8);
        let c = &sol.classification;
        let (em, ep) = (c.lambda_minus() - c.ground_pole, c.lambda_plus() - c.ground_pole);
        assert!((em + ep).abs() < 1e-8);
    }
}

#[test]
fn midpoint_near_asymptotic_gamma_on_johnson() {
    let sol = gamma_midpoint(&johnson(8, 2, 1, 1.0)).unwrap();
    let pred = johnson_predictions(JohnsonParams::new(8, 2, 1).unwrap()).unwrap();
    assert!((sol.gamma / pred.gamma - 1.0).abs() < 0.2, "{} vs {}", sol.gamma, pred.gamma);
    let (g, _) = midpoint_residual(&johnson(8, 2, 1, sol.gamma)).unwrap();
    assert!(g.abs() < 1e-8 * sol.classification.lambda_minus().abs().max(1.0));
}

#[test]
fn asymptotic_gamma_on_johnson_pairs() {
    for (n, k) in [(10, 2), (12, 3), (25, 2)] {
        for delta in 1..=k {
            let t = johnson(n, k, delta, 1.0);
            let a = gamma_asymptotic(&AsymptoticSums::new(&t), None).unwrap();
            let pred = johnson_predictions(JohnsonParams::new(n, k, delta).unwrap()).unwrap();
            assert!((a.gamma - pred.gamma).abs() < 1e-12 * pred.gamma);
            assert!((a.epsilon - pred.epsilon).abs() < 1e-10 * pred.epsilon);
            assert!(a.reduction_exact);
        }
    }
}

#[test]
fn asymptotic_gamma_scaling() {
    let mut last = f64::INFINITY;
    for n in [20, 40, 80, 160] {
        let pred = johnson_predictions(JohnsonParams::new(n, 2, 1).unwrap()).unwrap();
        let dev = (pred.gamma * 2.0 * n as f64 - 1.0).abs();
        assert!(dev < last);
        assert!(dev * (n as f64) < 5.0);
        last = dev;
        assert!((pred.epsilon * pred.num_vertices.sqrt() / SQRT_2 - 1.0).abs() < 20.0 / n as f64);
    }
}

#[test]
fn overlaps_match_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (name, g, w) in mixed_instances(&mut rng).into_iter().take(25) {
        let t = SearchInstance::from_graph(g, w, 1.0).unwrap();
        let a = analyze(&t, GammaChoice::Asymptotic).unwrap();
        let p = &a.pair;
        let v = reconstruct_eigenvector(&a.instance, p.lambda_minus, &p.kernel_minus).unwrap();
        for (i, &m) in a.instance.marked().vertices().iter().enumerate() {
            assert!((v.state[m] - p.overlaps_w_minus[i]).abs() < 1e-8, "{name}");
        }
        assert!((v.state.dot(a.instance.psi0()) - p.psi0_minus).abs() < 1e-8, "{name}");
        if p.lambda_plus_multiplicity == 1 {
            let v = reconstruct_eigenvector(&a.instance, p.lambda_plus, &p.kernel_plus).unwrap();
            for (i, &m) in a.instance.marked().vertices().iter().enumerate() {
                assert!((v.state[m] - p.overlaps_w_plus[i]).abs() < 1e-8, "{name}");
            }
            assert!((v.state.dot(a.instance.psi0()) - p.psi0_plus).abs() < 1e-8, "{name}");
        }
        let (rm, rp) = p.main_relation_residuals(&a.instance.psi0_marked());
        assert!(rm.abs() < 1e-9 && rp.abs() < 1e-9, "{name}");
    }
}

#[test]
fn degenerate_lambda_plus_uses_the_projection() {
    // Symmetric marked vertices on a hypercube give degenerate eigenvalues;
    // compare |⟨ψ(0)|P⁺|ψ(0)⟩| with a dense projector.
    let g = Graph::hypercube(4).unwrap();
    let w = MarkedSet::new(vec![0, 15], 16).unwrap();
    let t = SearchInstance::from_graph(g, w, 1.0).unwrap();
    let a = analyze(&t, GammaChoice::Midpoint).unwrap();
    let dense = dense_eigen(&a.instance.hamiltonian());
    let weight: f64 = clusters(&dense.values, 1e-7)
        .iter()
        .filter(|c| (c.0 - a.pair.lambda_plus).abs() < 1e-7)
        .map(|&(_, s, l)| (dense.vectors.columns(s, l).transpose() * a.instance.psi0()).norm_squared())
        .sum();
    assert!((a.pair.psi0_plus.powi(2) - weight).abs() < 1e-9);
}

#[test]
fn johnson_overlaps_approach_limits() {
    let sim = JohnsonSimulator::new(JohnsonParams::new(40, 2, 2).unwrap()).unwrap();
    let a = analyze(sim.template(), GammaChoice::Asymptotic).unwrap();
    let p = &a.pair;
    for x in p.overlaps_w_minus.iter().chain(&p.overlaps_w_plus) {
        assert!((x.abs() - 0.5).abs() < 0.05, "{x}");
    }
    assert!((p.psi0_minus - 1.0 / SQRT_2).abs() < 0.05);
    assert!((p.psi0_plus + 1.0 / SQRT_2).abs() < 0.05);
}

#[test]
fn regular_graph_projector_sum() {
    for (g, w) in [
        (Graph::hypercube(5).unwrap(), vec![0, 3, 9]),
        (Graph::johnson(7, 2).unwrap(), vec![1, 2]),
        (Graph::complete_bipartite(4, 4).unwrap(), vec![0, 1, 2, 3]),
    ] {
        let n = g.num_vertices();
        let m = w.len();
        let inst = SearchInstance::from_graph(g, MarkedSet::new(w, n).unwrap(), 0.1).unwrap();
        assert!((inst.p0_marked_sum() - (m * m) as f64 / n as f64).abs() < 1e-13);
    }
}

fn dense_leakage(inst: &SearchInstance, lm: f64, lp: f64) -> f64 {
    let dense = dense_eigen(&inst.hamiltonian());
    clusters(&dense.values, 1e-7)
        .iter()
        .filter(|c| (c.0 - lm).abs() > 1e-7 && (c.0 - lp).abs() > 1e-7)
        .map(|&(_, s, l)| (dense.vectors.columns(s, l).transpose() * inst.psi0()).norm_squared())
        .sum()
}

#[test]
fn leakage_bound_on_johnson_midpoint() {
    let a = analyze(&johnson(8, 2, 1, 1.0), GammaChoice::Midpoint).unwrap();
    let leak = dense_leakage(&a.instance, a.pair.lambda_minus, a.pair.lambda_plus);
    assert!(leak <= a.leakage_bound + 1e-12, "{leak} > {}", a.leakage_bound);
    let lc = a.lambda_circ.unwrap();
    assert_eq!(leakage_bound(&a.instance, lc).unwrap(), a.leakage_bound);
    assert!(matches!(leakage_bound(&a.instance, a.instance.ground_pole()), Err(Error::Pole { .. })));
}

#[test]
fn leakage_bound_shrinks_with_n() {
    for delta in 1..=2 {
        let bounds: Vec<f64> = (8..=20)
            .step_by(2)
            .map(|n| {
                let sim = JohnsonSimulator::new(JohnsonParams::new(n, 2, delta).unwrap()).unwrap();
                analyze(sim.template(), GammaChoice::Asymptotic).unwrap().leakage_bound
            })
            .collect();
        assert!(bounds.windows(2).all(|w| w[1] < w[0]), "δ={delta}: {bounds:?}");
    }
}

#[test]
fn marked_free_eigenvectors_are_adjacency_eigenvectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (name, g, w) in mixed_instances(&mut rng).into_iter().take(30) {
        let gamma = 0.3;
        let inst = SearchInstance::from_graph(g, w, gamma).unwrap();
        let dense = dense_eigen(&inst.hamiltonian());
        let a = inst.graph().adjacency() * -gamma;
        for i in 0..dense.values.len() {
            let v = dense.vectors.column(i);
            if inst.marked().vertices().iter().all(|&m| v[m].abs() < 1e-9) {
                let r = (&a * v - v * dense.values[i]).norm();
                assert!(r < 1e-7, "{name}: {r:e}");
            }
        }
    }
}

#[test]
fn ground_state_below_ground_pole_for_all_gamma() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (name, g, w) in mixed_instances(&mut rng).into_iter().take(20) {
        let t = SearchInstance::from_graph(g, w, 1.0).unwrap();
        for gamma in [1e-3, 1e-2, 0.1, 1.0, 10.0] {
            let inst = t.with_gamma(gamma).unwrap();
            let e = dense_eigen(&inst.hamiltonian());
            assert!(e.values[0] < inst.ground_pole(), "{name} γ={gamma}");
            assert!(e.values[1] - e.values[0] > 1e-9, "{name} γ={gamma}: degenerate ground state");
            let c = classify(&inst).unwrap();
            assert!((c.lambda_minus() - e.values[0]).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn secular_inertia_matches_dense_count(seed in 0u64..10_000, gamma in 0.02f64..2.0, probe in -3.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected(&mut rng, 18, 0.3);
        let w = random_marked(&mut rng, g.num_vertices(), 3);
        let inst = SearchInstance::from_graph(g, w, gamma).unwrap();
        let lambda = probe * gamma * inst.spectrum().phi0().max(1.0);
        prop_assume!(inst.poles().iter().all(|p| (p - lambda).abs() > 1e-6));
        let m = SecularMatrix::new(&inst, lambda).unwrap();
        let poles_below: usize = inst
            .poles()
            .iter()
            .zip(inst.spectrum().multiplicities().iter().rev())
            .filter(|(p, _)| **p < lambda)
            .map(|(_, k)| *k)
            .sum();
        let dense = dense_eigen(&inst.hamiltonian());
        prop_assume!(dense.values.iter().all(|x| (x - lambda).abs() > 1e-6));
        let below = dense.values.iter().filter(|x| **x < lambda).count();
        prop_assert_eq!(poles_below + m.negative_count().unwrap(), below);
    }

    #[test]
    fn secular_matrix_is_decreasing(seed in 0u64..10_000, gamma in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected(&mut rng, 15, 0.3);
        let w = random_marked(&mut rng, g.num_vertices(), 3);
        let inst = SearchInstance::from_graph(g, w, gamma).unwrap();
        let lambda = inst.ground_pole() - 0.5;
        let m0 = SecularMatrix::new(&inst, lambda).unwrap().entries;
        let m1 = SecularMatrix::new(&inst, lambda + 1e-3).unwrap().entries;
        let diff = nalgebra::SymmetricEigen::new(m0 - m1).eigenvalues;
        prop_assert!(diff.iter().all(|x| *x > 0.0));
    }
}
