//! P1 finite element assembly: sparse stiffness and mass matrices for the
//! Neumann (or mixed) Laplace eigenproblem, plus Dirichlet elimination.

use crate::mesh::Mesh;
use std::collections::BTreeMap;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("triangle {tri} is degenerate (area {area:e})")]
    DegenerateElement { tri: usize, area: f64 },
    #[error("all vertices are constrained; nothing to solve")]
    EmptySystem,
}

/// Sparse symmetric matrix in compressed row form. Only the lower triangle
/// (`i >= j`) is stored; the operators account for the mirrored entries.
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl SparseSymMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed and
    /// entries are mirrored into the lower triangle.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in triplets {
            let (i, j) = (i.max(j), i.min(j));
            *rows[i].entry(j).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                col.push(j);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        SparseSymMatrix { n, row_ptr, col, val }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// Entries of the stored lower triangle, row-major.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col[k], self.val[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.max(j), i.min(j));
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col[lo..hi].binary_search(&j) {
            Ok(k) => self.val[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[k];
                let v = self.val[k];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
    }

    /// `x^T A y`.
    pub fn quadratic(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut ay = vec![0.0; self.n];
        self.matvec(y, &mut ay);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// Extract the principal submatrix on the index set `keep` (strictly
    /// increasing vertex ids).
    pub fn submatrix(&self, keep: &[usize]) -> SparseSymMatrix {
        let mut new_id = vec![usize::MAX; self.n];
        for (r, &i) in keep.iter().enumerate() {
            new_id[i] = r;
        }
        let triplets = self.lower_entries().filter_map(|(i, j, v)| {
            let (ni, nj) = (new_id[i], new_id[j]);
            (ni != usize::MAX && nj != usize::MAX).then_some((ni, nj, v))
        });
        SparseSymMatrix::from_triplets(keep.len(), triplets)
    }

    /// Write in MatrixMarket symmetric coordinate format.
    pub fn write_matrix_market<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for (i, j, v) in self.lower_entries() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

/// Assemble the P1 stiffness matrix `K` and consistent mass matrix `M` over
/// all vertices of `mesh` (pure Neumann: no constraints applied).
pub fn assemble(mesh: &Mesh) -> Result<(SparseSymMatrix, SparseSymMatrix), FemError> {
    let n = mesh.n_vertices();
    let mut kt = Vec::with_capacity(6 * mesh.n_triangles());
    let mut mt = Vec::with_capacity(6 * mesh.n_triangles());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        if area < 1e-14 {
            return Err(FemError::DegenerateElement { tri: t, area });
        }
        let [a, b, c] = *tri;
        let (p, q, r) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        // gradient of the barycentric coordinate at each vertex: the inward
        // normal of the opposite edge scaled by 1/(2 area)
        let grads = [
            [(q[1] - r[1]) / (2.0 * area), (r[0] - q[0]) / (2.0 * area)],
            [(r[1] - p[1]) / (2.0 * area), (p[0] - r[0]) / (2.0 * area)],
            [(p[1] - q[1]) / (2.0 * area), (q[0] - p[0]) / (2.0 * area)],
        ];
        for i in 0..3 {
            for j in 0..=i {
                let kij = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                kt.push((tri[i], tri[j], kij));
                let mij = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                mt.push((tri[i], tri[j], mij));
            }
        }
    }
    Ok((SparseSymMatrix::from_triplets(n, kt), SparseSymMatrix::from_triplets(n, mt)))
}

/// Generalized eigensystem with Dirichlet vertices eliminated.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub k: SparseSymMatrix,
    pub m: SparseSymMatrix,
    /// Free (unconstrained) vertex ids, strictly increasing.
    pub free: Vec<usize>,
    /// Vertex count of the originating mesh.
    pub full_n: usize,
}

impl ReducedSystem {
    /// Scatter a reduced vector back to all mesh vertices, zero on
    /// constrained ones.
    pub fn expand(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.free.len());
        let mut full = vec![0.0; self.full_n];
        for (r, &i) in self.free.iter().enumerate() {
            full[i] = v[r];
        }
        full
    }
}

/// Assemble and eliminate Dirichlet-constrained vertices.
pub fn assemble_reduced(mesh: &Mesh) -> Result<ReducedSystem, FemError> {
    let (k, m) = assemble(mesh)?;
    dirichlet_reduce(k, m, mesh)
}

/// Eliminate the rows and columns of Dirichlet-constrained vertices; a mesh
/// without constraints passes through unchanged.
pub fn dirichlet_reduce(
    k: SparseSymMatrix,
    m: SparseSymMatrix,
    mesh: &Mesh,
) -> Result<ReducedSystem, FemError> {
    let constrained = mesh.constrained_vertices();
    let free: Vec<usize> = (0..mesh.n_vertices()).filter(|&i| !constrained[i]).collect();
    if free.is_empty() {
        return Err(FemError::EmptySystem);
    }
    if free.len() == mesh.n_vertices() {
        return Ok(ReducedSystem { k, m, free, full_n: mesh.n_vertices() });
    }
    Ok(ReducedSystem {
        k: k.submatrix(&free),
        m: m.submatrix(&free),
        free,
        full_n: mesh.n_vertices(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;
    use crate::mesh::{generate, BoundaryEdge, Mesh};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn reference_triangle() -> Mesh {
        Mesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![
                BoundaryEdge { a: 0, b: 1, bc: crate::geometry::BcTag::Neumann, curve: 0 },
                BoundaryEdge { a: 1, b: 2, bc: crate::geometry::BcTag::Neumann, curve: 0 },
                BoundaryEdge { a: 2, b: 0, bc: crate::geometry::BcTag::Neumann, curve: 0 },
            ],
            pairing: None,
            corner_marks: vec![],
            dirichlet_vertices: vec![],
            target_h: 1.0,
        }
    }

    #[test]
    fn reference_element_matrices() {
        let (k, m) = assemble(&reference_triangle()).unwrap();
        let k_expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k.get(i, j) - k_expect[i][j]).abs() < 1e-15);
                let m_expect = if i == j { 1.0 / 12.0 } else { 1.0 / 24.0 };
                assert!((m.get(i, j) - m_expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mass_sums_to_area_and_stiffness_kills_constants() {
        let spec = DomainSpec::wheel(1.0, 2.0, 3.0, 0.3).unwrap();
        let mesh = generate(&spec, 0.2).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let ones = vec![1.0; mesh.n_vertices()];
        let total_mass = m.quadratic(&ones, &ones);
        assert!((total_mass - mesh.area()).abs() < 1e-10 * mesh.area());
        let mut k1 = vec![0.0; mesh.n_vertices()];
        k.matvec(&ones, &mut k1);
        let sup = k1.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        assert!(sup < 1e-12, "K * 1 = {sup:e}");
    }

    #[test]
    fn matrices_commute_with_the_symmetry() {
        let spec = DomainSpec::dumbbell(1.0, 1.0, 0.25).unwrap();
        let mesh = generate(&spec, 0.2).unwrap();
        let sigma = mesh.pairing.clone().unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let n = mesh.n_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let px: Vec<f64> = (0..n).map(|i| x[sigma[i]]).collect();
            let py: Vec<f64> = (0..n).map(|i| y[sigma[i]]).collect();
            for mat in [&k, &m] {
                let direct = mat.quadratic(&x, &y);
                let conj = mat.quadratic(&px, &py);
                assert!((direct - conj).abs() < 1e-12 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn dirichlet_reduction_drops_axis_vertices() {
        let spec = DomainSpec::half_wheel_y(1.0, 2.0, 3.0, 0.3).unwrap();
        let mesh = generate(&spec, 0.25).unwrap();
        let sys = assemble_reduced(&mesh).unwrap();
        let n_constrained = mesh.constrained_vertices().iter().filter(|&&c| c).count();
        assert!(n_constrained > 0);
        assert_eq!(sys.free.len(), mesh.n_vertices() - n_constrained);
        assert_eq!(sys.k.n(), sys.free.len());
        let v = vec![1.0; sys.free.len()];
        let full = sys.expand(&v);
        for (i, &c) in mesh.constrained_vertices().iter().enumerate() {
            assert_eq!(full[i], if c { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn degenerate_triangle_is_reported() {
        let mut mesh = reference_triangle();
        mesh.vertices[2] = [2.0, 0.0]; // collinear
        match assemble(&mesh) {
            Err(FemError::DegenerateElement { tri: 0, .. }) => {}
            other => panic!("expected DegenerateElement, got {other:?}"),
        }
    }

    #[test]
    fn matrix_market_round_trip_header() {
        let (k, _) = assemble(&reference_triangle()).unwrap();
        let mut buf = Vec::new();
        k.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "%%MatrixMarket matrix coordinate real symmetric");
        assert_eq!(lines.next().unwrap(), format!("3 3 {}", k.nnz()));
        assert_eq!(text.lines().count(), 2 + k.nnz());
    }
}
