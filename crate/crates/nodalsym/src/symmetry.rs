//! Parity classification of eigenfunctions under the rotation `x ↦ -x`.
//!
//! On a symmetric mesh the rotation acts as a vertex permutation `P`, and
//! every eigenfunction of a simple eigenvalue is either even (`Pv = v`) or
//! odd (`Pv = -v`). Degenerate clusters are classified as whole eigenspaces,
//! since the solver returns an arbitrary basis inside a cluster.

use crate::eigensolve::{cluster, EigenResult};
use crate::fem::SparseSymMatrix;
use crate::mesh::Mesh;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use std::ops::Range;
use thiserror::Error;

/// Default classification threshold: scores within `1e-3` of `±1` count as
/// pure parity.
pub const DEFAULT_THETA: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("mesh carries no pairing involution")]
    NoPairing,
    #[error(
        "eigenspace split is indefinite (small-matrix eigenvalue {value}); \
         the cluster likely merges two distinct eigenvalues"
    )]
    IndefiniteSplit { value: f64 },
    #[error("expected at least {expected} eigenvalue clusters, found {found}")]
    TooFewClusters { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Even,
    Odd,
    Mixed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Even => write!(f, "even"),
            Verdict::Odd => write!(f, "odd"),
            Verdict::Mixed => write!(f, "mixed"),
        }
    }
}

/// Parity classification of a single vector or an eigenspace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetryClass {
    pub verdict: Verdict,
    /// The parity score `s = (Pv)^T M v / (v^T M v)`.
    pub score: f64,
    /// `(even_dim, odd_dim)` when a whole cluster was classified.
    pub split: Option<(usize, usize)>,
}

fn pairing(mesh: &Mesh) -> Result<&[usize], SymmetryError> {
    mesh.pairing.as_deref().ok_or(SymmetryError::NoPairing)
}

fn permute(v: &[f64], sigma: &[usize]) -> Vec<f64> {
    (0..v.len()).map(|i| v[sigma[i]]).collect()
}

/// `s = (Pv)^T M v / (v^T M v)`: `+1` for even vectors, `-1` for odd.
pub fn parity_score(
    v: &[f64],
    m: &SparseSymMatrix,
    mesh: &Mesh,
) -> Result<f64, SymmetryError> {
    let sigma = pairing(mesh)?;
    let pv = permute(v, sigma);
    Ok(m.quadratic(&pv, v) / m.quadratic(v, v))
}

/// Verdict from a score with threshold `theta`.
pub fn classify(score: f64, theta: f64) -> Verdict {
    if score >= 1.0 - theta {
        Verdict::Even
    } else if score <= -(1.0 - theta) {
        Verdict::Odd
    } else {
        Verdict::Mixed
    }
}

pub fn classify_vector(
    v: &[f64],
    m: &SparseSymMatrix,
    mesh: &Mesh,
    theta: f64,
) -> Result<SymmetryClass, SymmetryError> {
    let score = parity_score(v, m, mesh)?;
    Ok(SymmetryClass { verdict: classify(score, theta), score, split: None })
}

/// A cluster eigenspace rotated into a parity-pure basis.
#[derive(Debug, Clone)]
pub struct EigenspaceSplit {
    pub even: Vec<Vec<f64>>,
    pub odd: Vec<Vec<f64>>,
    /// Eigenvalues of the small matrix `R = V^T M (PV)`, all near `±1`.
    pub r_eigenvalues: Vec<f64>,
}

impl EigenspaceSplit {
    pub fn dims(&self) -> (usize, usize) {
        (self.even.len(), self.odd.len())
    }
}

/// Split the span of `vectors` (an M-orthonormal cluster basis) into even
/// and odd subspaces.
pub fn split_eigenspace(
    vectors: &[Vec<f64>],
    m: &SparseSymMatrix,
    mesh: &Mesh,
) -> Result<EigenspaceSplit, SymmetryError> {
    let sigma = pairing(mesh)?;
    let d = vectors.len();
    assert!(d > 0, "empty cluster");
    let pv: Vec<Vec<f64>> = vectors.iter().map(|v| permute(v, sigma)).collect();
    let mut r = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            r[(i, j)] = m.quadratic(&vectors[i], &pv[j]);
        }
    }
    let r = (&r + r.transpose()) * 0.5;
    let eig = SymmetricEigen::new(r);
    for &lambda in eig.eigenvalues.iter() {
        if lambda > -0.9 && lambda < 0.9 {
            return Err(SymmetryError::IndefiniteSplit { value: lambda });
        }
    }
    let n = vectors[0].len();
    let mut even = Vec::new();
    let mut odd = Vec::new();
    let mut r_eigenvalues = Vec::new();
    for c in 0..d {
        let lambda = eig.eigenvalues[c];
        let mut v = vec![0.0; n];
        for (j, basis) in vectors.iter().enumerate() {
            let w = eig.eigenvectors[(j, c)];
            for i in 0..n {
                v[i] += w * basis[i];
            }
        }
        r_eigenvalues.push(lambda);
        if lambda > 0.0 {
            even.push(v);
        } else {
            odd.push(v);
        }
    }
    Ok(EigenspaceSplit { even, odd, r_eigenvalues })
}

/// Verdict for the symmetric/antisymmetric principle on the first nontrivial
/// eigenspace.
#[derive(Debug, Clone, Serialize)]
pub struct PrincipleReport {
    /// First nontrivial eigenvalue (representative of its cluster).
    pub mu2: f64,
    /// Indices of the cluster within the eigenvalue list.
    pub cluster: Range<usize>,
    pub even_dim: usize,
    pub odd_dim: usize,
    /// True iff every eigenfunction of the cluster is antisymmetric.
    pub antisymmetric: bool,
}

/// Classify the μ₂ eigenspace of a Neumann solve. `rel_gap` is the relative
/// gap used to delimit eigenvalue clusters; the first cluster must be the
/// simple zero eigenvalue of the constants.
pub fn principle_verdict(
    eigen: &EigenResult,
    m: &SparseSymMatrix,
    mesh: &Mesh,
    rel_gap: f64,
) -> Result<PrincipleReport, SymmetryError> {
    let clusters = cluster(&eigen.eigenvalues, rel_gap);
    if clusters.len() < 2 {
        return Err(SymmetryError::TooFewClusters { expected: 2, found: clusters.len() });
    }
    let range = clusters[1].clone();
    let basis: Vec<Vec<f64>> = range.clone().map(|i| eigen.vectors[i].clone()).collect();
    let split = split_eigenspace(&basis, m, mesh)?;
    let (even_dim, odd_dim) = split.dims();
    Ok(PrincipleReport {
        mu2: eigen.eigenvalues[range.start],
        cluster: range,
        even_dim,
        odd_dim,
        antisymmetric: even_dim == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{solve, EigenOptions};
    use crate::fem::assemble;
    use crate::geometry::DomainSpec;
    use crate::mesh::generate;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn disk_setup() -> (Mesh, SparseSymMatrix, EigenResult) {
        let mesh = generate(&DomainSpec::disk(1.0).unwrap(), 0.2).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let res = solve(&k, &m, &EigenOptions { k: 6, ..Default::default() }).unwrap();
        (mesh, m, res)
    }

    #[test]
    fn constants_are_even() {
        let mesh = generate(&DomainSpec::dumbbell(1.0, 1.0, 0.25).unwrap(), 0.2).unwrap();
        let (_, m) = assemble(&mesh).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        let s = parity_score(&ones, &m, &mesh).unwrap();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn missing_pairing_is_an_error() {
        let mesh = generate(&DomainSpec::half_wheel_y(1.0, 2.0, 3.0, 0.3).unwrap(), 0.25).unwrap();
        let (_, m) = assemble(&mesh).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        assert!(matches!(parity_score(&ones, &m, &mesh), Err(SymmetryError::NoPairing)));
    }

    #[test]
    fn disk_first_modes_have_known_parities() {
        let (mesh, m, res) = disk_setup();
        // mu_2, mu_3: odd pair; mu_4, mu_5: even pair; mu_6: even singleton
        for i in [1, 2] {
            let c = classify_vector(&res.vectors[i], &m, &mesh, DEFAULT_THETA).unwrap();
            assert_eq!(c.verdict, Verdict::Odd, "mode {i}: score {}", c.score);
            assert!(c.score <= -0.999);
        }
        for i in [3, 4, 5] {
            let c = classify_vector(&res.vectors[i], &m, &mesh, DEFAULT_THETA).unwrap();
            assert_eq!(c.verdict, Verdict::Even, "mode {i}: score {}", c.score);
        }
    }

    #[test]
    fn balanced_mixture_scores_zero() {
        let (mesh, m, res) = disk_setup();
        let e = &res.vectors[5]; // even
        let o = &res.vectors[1]; // odd
        // both are M-normalized, so an equal mixture has score 0
        let v: Vec<f64> = e.iter().zip(o).map(|(a, b)| (a + b) / 2f64.sqrt()).collect();
        let s = parity_score(&v, &m, &mesh).unwrap();
        assert!(s.abs() < 1e-6, "score {s}");
        assert_eq!(classify(s, DEFAULT_THETA), Verdict::Mixed);
    }

    #[test]
    fn disk_cluster_splits() {
        let (mesh, m, res) = disk_setup();
        let split = split_eigenspace(&res.vectors[1..3].to_vec(), &m, &mesh).unwrap();
        assert_eq!(split.dims(), (0, 2));
        let split = split_eigenspace(&res.vectors[3..5].to_vec(), &m, &mesh).unwrap();
        assert_eq!(split.dims(), (2, 0));
        let split = split_eigenspace(&res.vectors[5..6].to_vec(), &m, &mesh).unwrap();
        assert_eq!(split.dims(), (1, 0));
    }

    #[test]
    fn split_is_basis_independent() {
        let (mesh, m, res) = disk_setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (c, s) = (phi.cos(), phi.sin());
        let v1: Vec<f64> =
            res.vectors[1].iter().zip(&res.vectors[2]).map(|(a, b)| c * a + s * b).collect();
        let v2: Vec<f64> =
            res.vectors[1].iter().zip(&res.vectors[2]).map(|(a, b)| -s * a + c * b).collect();
        let split = split_eigenspace(&[v1, v2], &m, &mesh).unwrap();
        assert_eq!(split.dims(), (0, 2));
        for lambda in &split.r_eigenvalues {
            assert!((lambda.abs() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn mixing_distinct_eigenvalues_is_indefinite() {
        let (mesh, m, res) = disk_setup();
        // a fake "cluster" mixing an odd mu_2 vector with an even mu_6 vector
        let v: Vec<f64> = res.vectors[1]
            .iter()
            .zip(&res.vectors[5])
            .map(|(a, b)| (a + b) / 2f64.sqrt())
            .collect();
        match split_eigenspace(&[v], &m, &mesh) {
            Err(SymmetryError::IndefiniteSplit { value }) => assert!(value.abs() < 0.5),
            other => panic!("expected IndefiniteSplit, got {other:?}"),
        }
    }

    #[test]
    fn principle_holds_on_disk_and_rectangle() {
        let (mesh, m, res) = disk_setup();
        let report = principle_verdict(&res, &m, &mesh, 0.05).unwrap();
        assert!(report.antisymmetric);
        assert_eq!((report.even_dim, report.odd_dim), (0, 2));

        let mesh = generate(&DomainSpec::rectangle(2.0, 1.0).unwrap(), 0.15).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let res = solve(&k, &m, &EigenOptions { k: 4, ..Default::default() }).unwrap();
        let report = principle_verdict(&res, &m, &mesh, 0.05).unwrap();
        assert!(report.antisymmetric);
        assert_eq!((report.even_dim, report.odd_dim), (0, 1));
    }

    #[test]
    fn projectors_are_idempotent_and_complementary() {
        let mesh = generate(&DomainSpec::wheel(1.0, 2.0, 3.0, 0.3).unwrap(), 0.25).unwrap();
        let sigma = mesh.pairing.clone().unwrap();
        let n = mesh.n_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let pv = permute(&v, &sigma);
        let e: Vec<f64> = v.iter().zip(&pv).map(|(a, b)| 0.5 * (a + b)).collect();
        let o: Vec<f64> = v.iter().zip(&pv).map(|(a, b)| 0.5 * (a - b)).collect();
        let pe = permute(&e, &sigma);
        let po = permute(&o, &sigma);
        for i in 0..n {
            assert_eq!(pe[i], e[i]); // even part exactly invariant
            assert_eq!(po[i], -o[i]); // odd part exactly anti-invariant
            assert_eq!(e[i] + o[i], v[i]);
        }
    }
}
