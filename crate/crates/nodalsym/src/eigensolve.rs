//! Sparse generalized symmetric eigensolver for `K v = mu M v`.
//!
//! The smallest eigenvalues are found by shift-invert Lanczos in the
//! M-inner product: the operator `(K + sigma M)^{-1} M` is applied through a
//! direct skyline Cholesky factorization with reverse Cuthill-McKee
//! reordering, and the largest Ritz values of the tridiagonal map back via
//! `mu = 1/theta - sigma`.

use crate::fem::SparseSymMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("matrix K + {shift} M is not positive definite; factorization failed")]
    FactorizationFailure { shift: f64 },
    #[error("Lanczos did not converge within {steps} steps (worst residual {worst_residual:e})")]
    NoConvergence {
        steps: usize,
        worst_residual: f64,
        /// Best available approximation at abort time.
        partial: Box<EigenResult>,
    },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Number of smallest eigenpairs requested.
    pub k: usize,
    /// Residual tolerance: a pair counts as converged when
    /// `|| K v - mu M v ||_2 <= tol * (1 + |mu|)` with `v` M-normalized.
    pub tol: f64,
    /// Maximum Lanczos steps; `0` picks a dimension-dependent default.
    pub max_steps: usize,
    /// Seed for the deterministic start vector.
    pub seed: u64,
    /// Spectral shift `sigma`; `None` uses `1e-3 * tr(K) / tr(M)`.
    pub shift: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { k: 6, tol: 1e-9, max_steps: 0, seed: 20177, shift: None }
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EigenStats {
    pub lanczos_steps: usize,
    pub shift: f64,
    pub factor_nnz: usize,
}

/// Eigenpairs sorted ascending; vectors are M-normalized. Residuals are
/// `|| K v - mu M v || / || M v ||`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub stats: EigenStats,
}

/// Group sorted eigenvalues into near-degenerate clusters: consecutive
/// values belong together when their gap is at most `rel_gap * (1 + |mu|)`.
pub fn cluster(eigenvalues: &[f64], rel_gap: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        let split = i == eigenvalues.len()
            || eigenvalues[i] - eigenvalues[i - 1] > rel_gap * (1.0 + eigenvalues[i - 1].abs());
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Convenience wrapper: the `count` smallest eigenpairs at tolerance `tol`
/// with all other options at their defaults.
pub fn smallest_pairs(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    count: usize,
    tol: f64,
) -> Result<EigenResult, EigenError> {
    solve(k, m, &EigenOptions { k: count, tol, ..Default::default() })
}

pub fn solve(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    opts: &EigenOptions,
) -> Result<EigenResult, EigenError> {
    let n = k.n();
    if m.n() != n {
        return Err(EigenError::InvalidRequest("K and M dimensions differ".into()));
    }
    if opts.k == 0 || opts.k > n {
        return Err(EigenError::InvalidRequest(format!(
            "requested {} eigenpairs of an {n}-dimensional system",
            opts.k
        )));
    }

    let base_shift = opts.shift.unwrap_or_else(|| 1e-3 * k.trace() / m.trace());
    let mut shift = base_shift;
    let mut factor = None;
    for _ in 0..4 {
        let a = add_shifted(k, m, shift);
        match SkylineCholesky::factor(&a) {
            Some(f) => {
                factor = Some(f);
                break;
            }
            None => shift *= 10.0,
        }
    }
    let factor = factor.ok_or(EigenError::FactorizationFailure { shift })?;

    lanczos(k, m, &factor, shift, opts)
}

fn add_shifted(k: &SparseSymMatrix, m: &SparseSymMatrix, shift: f64) -> SparseSymMatrix {
    let triplets = k
        .lower_entries()
        .map(|(i, j, v)| (i, j, v))
        .chain(m.lower_entries().map(|(i, j, v)| (i, j, shift * v)));
    SparseSymMatrix::from_triplets(k.n(), triplets)
}

// ---------------------------------------------------------------------------
// reverse Cuthill-McKee

fn adjacency(a: &SparseSymMatrix) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); a.n()];
    for (i, j, _) in a.lower_entries() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    adj
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, visited: &mut [bool], order: &mut Vec<usize>) {
    let mut queue = std::collections::VecDeque::new();
    visited[start] = true;
    queue.push_back(start);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&v| !visited[v]).collect();
        nbrs.sort_by_key(|&v| adj[v].len());
        nbrs.dedup();
        for v in nbrs {
            if !visited[v] {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
}

/// Reverse Cuthill-McKee permutation: `perm[new] = old`.
fn rcm(a: &SparseSymMatrix) -> Vec<usize> {
    let adj = adjacency(a);
    let n = a.n();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        let Some(seed) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| adj[i].len()) else {
            break;
        };
        // pseudo-peripheral start: walk to the far end of the component twice
        let mut start = seed;
        for _ in 0..2 {
            let mut vis = visited.clone();
            let mut comp = Vec::new();
            bfs_levels(&adj, start, &mut vis, &mut comp);
            start = *comp.last().unwrap();
        }
        bfs_levels(&adj, start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

// ---------------------------------------------------------------------------
// skyline Cholesky

struct SkylineCholesky {
    /// `perm[new] = old`
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    first: Vec<usize>,
    ptr: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    fn factor(a: &SparseSymMatrix) -> Option<SkylineCholesky> {
        let n = a.n();
        let perm = rcm(a);
        let mut inv_perm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv_perm[old] = new;
        }

        // envelope: first stored column per (permuted) row
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.lower_entries() {
            let (pi, pj) = (inv_perm[i], inv_perm[j]);
            let (hi, lo) = (pi.max(pj), pi.min(pj));
            first[hi] = first[hi].min(lo);
        }
        let mut ptr = Vec::with_capacity(n + 1);
        ptr.push(0);
        for i in 0..n {
            ptr.push(ptr[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; ptr[n]];
        for (i, j, v) in a.lower_entries() {
            let (pi, pj) = (inv_perm[i], inv_perm[j]);
            let (hi, lo) = (pi.max(pj), pi.min(pj));
            data[ptr[hi] + (lo - first[hi])] += v;
        }

        // in-place LL^T
        for i in 0..n {
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let mut s = data[ptr[i] + (j - first[i])];
                for t in lo..j {
                    s -= data[ptr[i] + (t - first[i])] * data[ptr[j] + (t - first[j])];
                }
                if j < i {
                    data[ptr[i] + (j - first[i])] = s / data[ptr[j] + (j - first[j])];
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return None;
                    }
                    data[ptr[i] + (i - first[i])] = s.sqrt();
                }
            }
        }
        Some(SkylineCholesky { perm, inv_perm, first, ptr, data })
    }

    fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Solve `A x = b` for the original (unpermuted) ordering.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let mut s = x[i];
            for t in self.first[i]..i {
                s -= self.data[self.ptr[i] + (t - self.first[i])] * x[t];
            }
            x[i] = s / self.data[self.ptr[i] + (i - self.first[i])];
        }
        for i in (0..n).rev() {
            x[i] /= self.data[self.ptr[i] + (i - self.first[i])];
            let xi = x[i];
            for t in self.first[i]..i {
                x[t] -= self.data[self.ptr[i] + (t - self.first[i])] * xi;
            }
        }
        (0..n).map(|i| x[self.inv_perm[i]]).collect()
    }
}

// ---------------------------------------------------------------------------
// Lanczos in the M-inner product

fn lanczos(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    factor: &SkylineCholesky,
    shift: f64,
    opts: &EigenOptions,
) -> Result<EigenResult, EigenError> {
    let n = k.n();
    let want = opts.k;
    let max_steps = if opts.max_steps > 0 {
        opts.max_steps.min(n)
    } else {
        (6 * want + 60).min(n)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new(); // betas[j] couples q[j] and q[j+1]

    let m_norm = |v: &[f64]| {
        let mut mv = vec![0.0; n];
        m.matvec(v, &mut mv);
        v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    };
    let random_unit = |rng: &mut ChaCha8Rng, q: &[Vec<f64>]| {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        m_orthogonalize(m, &mut v, q);
        let norm = m_norm(&v);
        for x in &mut v {
            *x /= norm;
        }
        v
    };

    q.push(random_unit(&mut rng, &q));

    while q.len() <= max_steps {
        let j = q.len() - 1;
        // w = (K + shift M)^{-1} M q_j
        let mut mq = vec![0.0; n];
        m.matvec(&q[j], &mut mq);
        let mut w = factor.solve(&mq);
        if j > 0 {
            let b = betas[j - 1];
            for i in 0..n {
                w[i] -= b * q[j - 1][i];
            }
        }
        let mut mw = vec![0.0; n];
        m.matvec(&w, &mut mw);
        let alpha = q[j].iter().zip(&mw).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            w[i] -= alpha * q[j][i];
        }
        // full reorthogonalization, twice for good measure
        m_orthogonalize(m, &mut w, &q);
        m_orthogonalize(m, &mut w, &q);
        alphas.push(alpha);

        let beta = m_norm(&w);
        let d = alphas.len();
        let done = d >= max_steps;
        let check = done || (d >= (2 * want + 8).min(n) && d % 5 == 0);
        if check {
            let (theta, s) = tridiag_eigen(&alphas, &betas);
            // theta sorted ascending; the largest ones map to smallest mu
            let mut ok = d >= n.min(max_steps);
            if !ok && d > want {
                ok = true;
                for r in 0..want {
                    let col = d - 1 - r;
                    let th = theta[col];
                    let proxy = beta * s[(d - 1, col)].abs();
                    let mu = 1.0 / th - shift;
                    // first-order bound on the eigenvalue error of mu
                    if proxy / (th * th) > 0.1 * opts.tol * (1.0 + mu.abs()) {
                        ok = false;
                        break;
                    }
                }
            }
            // the proxy is only a first-order estimate: accept the basis
            // solely when the true residuals pass
            if ok || done {
                let result =
                    assemble_result(k, m, shift, opts, &q, &theta, &s, factor.nnz());
                if result.converged {
                    return Ok(result);
                }
                if done {
                    let worst = result
                        .residuals
                        .iter()
                        .zip(&result.eigenvalues)
                        .map(|(r, mu)| r / (1.0 + mu.abs()))
                        .fold(0.0, f64::max);
                    return Err(EigenError::NoConvergence {
                        steps: alphas.len(),
                        worst_residual: worst,
                        partial: Box::new(result),
                    });
                }
            }
        }

        if beta < 1e-10 {
            // invariant subspace found: restart with a fresh direction
            betas.push(0.0);
            q.push(random_unit(&mut rng, &q));
        } else {
            betas.push(beta);
            let mut next = w;
            for x in &mut next {
                *x /= beta;
            }
            q.push(next);
        }
    }

    // only reachable when the Krylov space could not grow at all
    let (theta, s) = tridiag_eigen(&alphas, &betas);
    let result = assemble_result(k, m, shift, opts, &q, &theta, &s, factor.nnz());
    if result.converged {
        Ok(result)
    } else {
        let worst = result
            .residuals
            .iter()
            .zip(&result.eigenvalues)
            .map(|(r, mu)| r / (1.0 + mu.abs()))
            .fold(0.0, f64::max);
        Err(EigenError::NoConvergence {
            steps: alphas.len(),
            worst_residual: worst,
            partial: Box::new(result),
        })
    }
}

/// Map the `want` smallest-mu Ritz pairs of the tridiagonal factor back to
/// vectors and measure their true residuals.
#[allow(clippy::too_many_arguments)]
fn assemble_result(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    shift: f64,
    opts: &EigenOptions,
    q: &[Vec<f64>],
    theta: &[f64],
    s: &DMatrix<f64>,
    factor_nnz: usize,
) -> EigenResult {
    let n = k.n();
    let want = opts.k;
    let d = theta.len();
    let m_norm = |v: &[f64]| {
        let mut mv = vec![0.0; n];
        m.matvec(v, &mut mv);
        v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
    };

    // assemble the `want` smallest-mu Ritz pairs
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(want);
    for r in 0..want.min(d) {
        let col = d - 1 - r;
        let th = theta[col];
        if th <= 0.0 {
            continue;
        }
        let mu = 1.0 / th - shift;
        let mut v = vec![0.0; n];
        for (jq, qv) in q.iter().take(d).enumerate() {
            let c = s[(jq, col)];
            for i in 0..n {
                v[i] += c * qv[i];
            }
        }
        let norm = m_norm(&v);
        for x in &mut v {
            *x /= norm;
        }
        pairs.push((mu, v));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut eigenvalues = Vec::with_capacity(pairs.len());
    let mut vectors = Vec::with_capacity(pairs.len());
    let mut residuals = Vec::with_capacity(pairs.len());
    let mut converged = pairs.len() == want;
    for (mu, v) in pairs {
        let mut kv = vec![0.0; n];
        let mut mv = vec![0.0; n];
        k.matvec(&v, &mut kv);
        m.matvec(&v, &mut mv);
        let num: f64 = kv
            .iter()
            .zip(&mv)
            .map(|(a, b)| (a - mu * b) * (a - mu * b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = mv.iter().map(|b| b * b).sum::<f64>().sqrt();
        let res = num / den;
        if res > opts.tol * (1.0 + mu.abs()) {
            converged = false;
        }
        eigenvalues.push(mu);
        vectors.push(v);
        residuals.push(res);
    }

    EigenResult {
        eigenvalues,
        vectors,
        residuals,
        converged,
        stats: EigenStats { lanczos_steps: d, shift, factor_nnz },
    }
}

/// Remove the M-projections of `basis` from `v`.
fn m_orthogonalize(m: &SparseSymMatrix, v: &mut [f64], basis: &[Vec<f64>]) {
    if basis.is_empty() {
        return;
    }
    let n = v.len();
    let mut mv = vec![0.0; n];
    m.matvec(v, &mut mv);
    let coeffs: Vec<f64> = basis
        .iter()
        .map(|b| b.iter().zip(&mv).map(|(a, c)| a * c).sum::<f64>())
        .collect();
    for (b, c) in basis.iter().zip(coeffs) {
        for i in 0..n {
            v[i] -= c * b[i];
        }
    }
}

/// Eigen-decomposition of the symmetric tridiagonal `(alphas, betas)`,
/// returned with eigenvalues ascending.
fn tridiag_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let d = alphas.len();
    let mut t = DMatrix::zeros(d, d);
    for i in 0..d {
        t[(i, i)] = alphas[i];
        if i + 1 < d {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let theta: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut s = DMatrix::zeros(d, d);
    for (newc, &oldc) in idx.iter().enumerate() {
        for r in 0..d {
            s[(r, newc)] = eig.eigenvectors[(r, oldc)];
        }
    }
    (theta, s)
}
