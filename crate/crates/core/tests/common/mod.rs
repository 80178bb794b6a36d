#![allow(dead_code)]

use nalgebra::DMatrix;
use netmf_inversion::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn k3() -> Graph {
    Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
}

pub fn erdos_renyi(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

pub fn connected_erdos_renyi(rng: &mut impl Rng, n: usize, p: f64) -> Graph {
    loop {
        let g = erdos_renyi(rng, n, p);
        if g.is_connected() {
            return g;
        }
    }
}

pub fn is_full_rank(a: &DMatrix<f64>) -> bool {
    let sv = a.clone().singular_values();
    let max = sv.max();
    sv.iter().all(|&s| s > 1e-9 * max)
}

/// Connected, non-bipartite, nonsingular adjacency with `n` drawn from `sizes`.
pub fn invertible_graph(rng: &mut impl Rng, sizes: std::ops::RangeInclusive<usize>) -> Graph {
    let n = rng.random_range(sizes);
    loop {
        let p = rng.random_range(0.25..0.6);
        let g = erdos_renyi(rng, n, p);
        if g.is_connected() && !g.is_bipartite() && is_full_rank(g.adjacency()) {
            return g;
        }
    }
}

/// Symmetric weights in `[lo, hi]` with a zero diagonal.
pub fn random_weights(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.random_range(lo..=hi);
            m[(i, j)] = w;
            m[(j, i)] = w;
        }
    }
    m
}

/// Triangles by checking every node triple.
pub fn triangles_by_enumeration(g: &Graph) -> u64 {
    let a = g.adjacency();
    let n = g.n();
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if a[(i, j)] > 0.0 && a[(j, k)] > 0.0 && a[(i, k)] > 0.0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Mean shortest-path length over ordered pairs from Floyd–Warshall.
pub fn apl_floyd_warshall(g: &Graph) -> f64 {
    let n = g.n();
    let inf = u64::MAX / 4;
    let a = g.adjacency();
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[(i, j)] > 0.0 {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let total: u64 = d.iter().flatten().sum();
    total as f64 / (n * (n - 1)) as f64
}

/// Root of `Σ_{i≠j} σ(x_ij + s) = target` by bisection.
pub fn bisect_shift(upper: &[f64], target: f64) -> f64 {
    let sum = |s: f64| upper.iter().map(|x| 2.0 / (1.0 + (-(x + s)).exp())).sum::<f64>();
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
