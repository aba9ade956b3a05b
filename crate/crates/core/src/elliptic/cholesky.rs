//! Profile (skyline) Cholesky factorization.
//!
//! Rows are reordered with reverse Cuthill-McKee, then row `i` of the lower
//! factor is stored densely from its first structural nonzero to the
//! diagonal. Fill stays inside that envelope, which keeps mesh Laplacians
//! of a few thousand vertices cheap without a general elimination tree.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone)]
pub struct ProfileCholesky {
    /// `perm[new] = old`
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl ProfileCholesky {
    /// Fails with [`Error::Numeric`] when a pivot is not positive.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(&a.adjacency());
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }

        let mut first = vec![0; n];
        for (i, f) in first.iter_mut().enumerate() {
            *f = a.row(perm[i]).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i).min(i);
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; offset[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let j = inv[j];
                if j <= i {
                    values[offset[i] + j - first[i]] += v;
                }
            }
        }

        let mut f = Self { perm, first, offset, values };
        for i in 0..n {
            for j in f.first[i]..i {
                let start = f.first[i].max(f.first[j]);
                let mut s = f.at(i, j);
                for k in start..j {
                    s -= f.at(i, k) * f.at(j, k);
                }
                let d = f.at(j, j);
                *f.at_mut(i, j) = s / d;
            }
            let mut d = f.at(i, i);
            for k in f.first[i]..i {
                d -= f.at(i, k) * f.at(i, k);
            }
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Numeric(format!(
                    "matrix is not positive definite (pivot {d:e} at row {})",
                    f.perm[i]
                )));
            }
            *f.at_mut(i, i) = d.sqrt();
        }
        Ok(f)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.offset[i] + j - self.first[i]]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.values[self.offset[i] + j - self.first[i]]
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the lower factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let xi = y[i] / self.at(i, i);
            y[i] = xi;
            for k in self.first[i]..i {
                y[k] -= self.at(i, k) * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering; returns `perm[new] = old`.
fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree = |v: usize| adj[v].len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree(v), v));

    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        let start = pseudo_peripheral(adj, seed);
        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !placed[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            next.dedup();
            for w in next {
                placed[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Last vertex of a BFS from `seed`, repeated while eccentricity grows.
fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut current = seed;
    let mut best_depth = 0;
    for _ in 0..8 {
        let (far, depth) = bfs_farthest(adj, current);
        if depth <= best_depth {
            break;
        }
        best_depth = depth;
        current = far;
    }
    current
}

fn bfs_farthest(adj: &[Vec<usize>], start: usize) -> (usize, usize) {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut far = (start, 0);
    while let Some(v) = queue.pop_front() {
        // prefer low degree among the farthest layer
        if dist[v] > far.1 || (dist[v] == far.1 && adj[v].len() < adj[far.0].len()) {
            far = (v, dist[v]);
        }
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    far
}
