//! Brute-force reference implementations shared by the integration tests.
//! None of them call into the library's algorithms.

#![allow(dead_code)]

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;
use span_lattice::{Exact, Payoff, Scalar, StateSpace};

/// Every set partition of `0..n`, blocks sorted and ordered by first element.
pub fn all_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn grow(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            grow(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        grow(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    grow(0, n, &mut Vec::new(), &mut out);
    out
}

/// Coarsest partition on whose blocks every vector is constant, found by
/// scanning all partitions.
pub fn brute_sigma(n: usize, vectors: &[Vec<i64>]) -> Vec<Vec<usize>> {
    all_partitions(n)
        .into_iter()
        .filter(|p| {
            p.iter()
                .all(|b| vectors.iter().all(|v| b.iter().all(|&i| v[i] == v[b[0]])))
        })
        .min_by_key(|p| p.len())
        .unwrap()
}

/// `sup_{k <= 64} (k x) ∧ u` coordinatewise.
pub fn brute_band_projection(x: &[f64], u: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(u)
        .map(|(&xi, &ui)| (1..=64).map(|k| (k as f64 * xi).min(ui)).fold(0.0, f64::max))
        .collect()
}

/// Sublattice of `Q^n` generated by nonnegative integer vectors, described by
/// its linkage structure: `None` for states where every generator vanishes,
/// otherwise `Some((class, weight))` where members of the sublattice are
/// exactly the vectors `z` with `z_i = t_class * weight_i`.
///
/// Two states are linked when the generator columns at those states are
/// positive multiples of each other.
pub fn linkage(n: usize, gens: &[Vec<i64>]) -> Vec<Option<(usize, Exact)>> {
    let mut out: Vec<Option<(usize, Exact)>> = vec![None; n];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        let col: Vec<i64> = gens.iter().map(|g| g[i]).collect();
        if col.iter().all(|&c| c == 0) {
            continue;
        }
        let mut found = None;
        for (class, &r) in reps.iter().enumerate() {
            let rc: Vec<i64> = gens.iter().map(|g| g[r]).collect();
            // col = lambda * rc with lambda > 0
            let k = rc.iter().position(|&c| c != 0).unwrap();
            let lambda = Exact::from_ratio(col[k], rc[k]);
            if lambda > Exact::from_ratio(0, 1)
                && col
                    .iter()
                    .zip(&rc)
                    .all(|(&a, &b)| Exact::from_ratio(a, 1) == lambda.clone() * Exact::from_ratio(b, 1))
            {
                found = Some((class, lambda));
                break;
            }
        }
        out[i] = Some(found.unwrap_or_else(|| {
            reps.push(i);
            (reps.len() - 1, Exact::from_ratio(1, 1))
        }));
    }
    out
}

pub fn linkage_dim(link: &[Option<(usize, Exact)>]) -> usize {
    link.iter().flatten().map(|(c, _)| c + 1).max().unwrap_or(0)
}

pub fn linkage_contains(link: &[Option<(usize, Exact)>], z: &[i64]) -> bool {
    let classes = linkage_dim(link);
    let mut t: Vec<Option<Exact>> = vec![None; classes];
    for (i, l) in link.iter().enumerate() {
        let zi = Exact::from_ratio(z[i], 1);
        match l {
            None => {
                if z[i] != 0 {
                    return false;
                }
            }
            Some((c, w)) => {
                let ti = zi / w.clone();
                match &t[*c] {
                    Some(prev) if *prev != ti => return false,
                    Some(_) => {}
                    None => t[*c] = Some(ti),
                }
            }
        }
    }
    true
}

/// Gauss-Jordan rank over the rationals.
pub fn rational_rank(vectors: &[Vec<Exact>]) -> usize {
    let mut rows: Vec<Vec<Exact>> = vectors.to_vec();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != Exact::from_ratio(0, 1)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != Exact::from_ratio(0, 1) {
                let factor = rows[r][c].clone() / pivot.clone();
                for k in 0..cols {
                    let sub = factor.clone() * rows[rank][k].clone();
                    rows[r][k] = rows[r][k].clone() - sub;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn random_probs(rng: &mut StdRng, n: usize) -> Arc<StateSpace> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(1..=20) as f64).collect();
    let total: f64 = w.iter().sum();
    StateSpace::new(w.iter().map(|x| x / total).collect()).unwrap_or_else(|_| StateSpace::uniform(n).unwrap())
}

pub fn payoff(space: &Arc<StateSpace>, v: &[i64]) -> Payoff<f64> {
    Payoff::new(space.clone(), v.iter().map(|&x| x as f64).collect()).unwrap()
}

pub fn exact_payoff(space: &Arc<StateSpace>, v: &[i64]) -> Payoff<Exact> {
    Payoff::new(space.clone(), v.iter().map(|&x| Exact::from_ratio(x, 1)).collect()).unwrap()
}

pub fn canonical(mut blocks: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    blocks
}
