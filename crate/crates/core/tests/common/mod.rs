//! Oracles shared by the integration tests: random instances, dense
//! diagonalisation of `H`, and time stepping by truncated Taylor series.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ctqw_core::graph::{Graph, MarkedSet};
use ctqw_core::Error;

pub type C64 = Complex<f64>;

/// Erdős–Rényi graph conditioned on connectivity.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        match Graph::from_edges(n, &edges) {
            Ok(g) => return g,
            Err(Error::Disconnected) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

pub fn random_marked(rng: &mut ChaCha8Rng, n: usize, max: usize) -> MarkedSet {
    let size = rng.gen_range(1..=max.min(n - 1));
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let mut w = all[..size].to_vec();
    w.sort_unstable();
    MarkedSet::new(w, n).unwrap()
}

/// 50 graphs with marked sets: Johnson `n ≤ 9`, hypercubes `d ≤ 6` and
/// connected random graphs with `N ≤ 60`, `|W| ≤ 3`.
pub fn mixed_instances(rng: &mut ChaCha8Rng) -> Vec<(String, Graph, MarkedSet)> {
    let mut out = Vec::new();
    for i in 0..50 {
        let (name, g) = match i % 3 {
            0 => {
                let n = rng.gen_range(4..=9);
                let k = rng.gen_range(1..=n / 2);
                (format!("J({n},{k})"), Graph::johnson(n, k).unwrap())
            }
            1 => {
                let d = rng.gen_range(2..=6);
                (format!("Q{d}"), Graph::hypercube(d).unwrap())
            }
            _ => {
                let n = rng.gen_range(6..=60);
                let p = rng.gen_range(0.1..0.5);
                (format!("G({n},{p:.2})"), random_connected(rng, n, p))
            }
        };
        let w = random_marked(rng, g.num_vertices(), 3);
        out.push((format!("{name} W={:?}", w.vertices()), g, w));
    }
    out
}

/// Eigenpairs of a symmetric matrix, ascending, computed independently of
/// the library's helper.
pub struct DenseEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn dense_eigen(h: &DMatrix<f64>) -> DenseEigen {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    DenseEigen {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: DMatrix::from_fn(h.nrows(), h.nrows(), |r, c| eig.eigenvectors[(r, order[c])]),
    }
}

/// Distinct values with multiplicities, merging gaps below `tol`.
pub fn clusters(values: &[f64], tol: f64) -> Vec<(f64, usize, usize)> {
    let mut out: Vec<(f64, usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            let mean = values[start..i].iter().sum::<f64>() / (i - start) as f64;
            out.push((mean, start, i - start));
            start = i;
        }
    }
    out
}

/// `e^{-iHt}ψ` by `steps` slices of a 30-term Taylor series.
pub fn taylor_evolve(h: &DMatrix<f64>, psi: &DVector<C64>, t: f64, steps: usize) -> DVector<C64> {
    let hc: DMatrix<C64> = h.map(|x| C64::new(x, 0.0));
    let dt = t / steps as f64;
    let factor = C64::new(0.0, -dt);
    let mut state = psi.clone();
    for _ in 0..steps {
        let mut term = state.clone();
        let mut acc = state.clone();
        for m in 1..=30 {
            term = &hc * term * (factor / m as f64);
            acc += &term;
        }
        state = acc;
    }
    state
}

/// Number of Taylor slices keeping `‖H‖·dt ≤ 0.25`.
pub fn taylor_steps(h: &DMatrix<f64>, t: f64) -> usize {
    let norm: f64 = h.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    ((norm * t / 0.25).ceil() as usize).max(1)
}

pub fn to_complex(v: &DVector<f64>) -> DVector<C64> {
    v.map(|x| C64::new(x, 0.0))
}

/// `Σ_{w∈W} |ψ(w)|²`.
pub fn marked_probability(psi: &DVector<C64>, marked: &[usize]) -> f64 {
    marked.iter().map(|&w| psi[w].norm_sqr()).sum()
}
