//! Conforming triangulations that carry the domain's point symmetry as an
//! exact vertex involution.

mod generate;
pub mod vtk;

pub use generate::{generate, generate_piece};

use crate::geometry::{BcTag, BoundarySegment, Point};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("target edge length {h} cannot resolve the passages (requires h <= r1*eps = {limit})")]
    InfeasibleResolution { h: f64, limit: f64 },
    #[error("mesh quality target not reached after retries (min angle {min_angle_deg:.2} deg)")]
    QualityFailure { min_angle_deg: f64 },
    #[error("mesh generation failed: {0}")]
    GenerationFailed(String),
    #[error(transparent)]
    Domain(#[from] crate::geometry::DomainError),
}

/// A boundary edge `(a, b)` with its boundary-condition tag and the index of
/// the analytic boundary curve it discretises.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub bc: BcTag,
    pub curve: usize,
}

/// Triangulation with tagged boundary edges and an optional exact vertex
/// involution `sigma` realising `x ↦ -x`.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Vertex index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// `pairing[i] = sigma(i)` with `vertex[sigma(i)] = -vertex[i]` exactly.
    pub pairing: Option<Vec<usize>>,
    /// Vertices closest to reentrant boundary corners.
    pub corner_marks: Vec<usize>,
    /// Individually constrained vertices (used for point-pinned problems).
    pub dirichlet_vertices: Vec<usize>,
    /// Target edge length the mesh was generated for.
    pub target_h: f64,
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Smallest interior angle of triangle `t` in degrees.
    pub fn triangle_min_angle_deg(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let pts = [self.vertices[a], self.vertices[b], self.vertices[c]];
        let mut min = f64::MAX;
        for i in 0..3 {
            let p = pts[i];
            let q = pts[(i + 1) % 3];
            let r = pts[(i + 2) % 3];
            let u = [q[0] - p[0], q[1] - p[1]];
            let v = [r[0] - p[0], r[1] - p[1]];
            let dot = u[0] * v[0] + u[1] * v[1];
            let cross = u[0] * v[1] - u[1] * v[0];
            min = min.min(cross.abs().atan2(dot).to_degrees());
        }
        min
    }

    /// Set of vertices incident to boundary edges.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            on[e.a] = true;
            on[e.b] = true;
        }
        on
    }

    /// Vertices constrained by Dirichlet data: endpoints of Dirichlet-tagged
    /// edges plus explicitly pinned vertices.
    pub fn constrained_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            if e.bc == BcTag::Dirichlet {
                on[e.a] = true;
                on[e.b] = true;
            }
        }
        for &v in &self.dirichlet_vertices {
            on[v] = true;
        }
        on
    }

    /// Structural diagnostics; never panics on a broken mesh.
    pub fn validate(&self) -> MeshDiagnostics {
        let mut diag = MeshDiagnostics::default();
        diag.min_angle_deg = f64::MAX;
        for t in 0..self.triangles.len() {
            let area = self.triangle_area(t);
            if area <= 0.0 {
                diag.orientation_violations += 1;
            }
            diag.min_angle_deg = diag.min_angle_deg.min(self.triangle_min_angle_deg(t));
        }

        // interior edges appear in exactly two triangles, boundary edges in one
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut tagged: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &self.boundary_edges {
            *tagged.entry((e.a.min(e.b), e.a.max(e.b))).or_insert(0) += 1;
        }
        for (&edge, &n) in &counts {
            let t = tagged.get(&edge).copied().unwrap_or(0);
            match n {
                1 if t != 1 => diag.untagged_boundary_edges += 1,
                2 if t != 0 => diag.untagged_boundary_edges += 1, // tagged interior edge
                1 | 2 => {}
                _ => diag.nonmanifold_edges += 1,
            }
        }
        for &edge in tagged.keys() {
            if !counts.contains_key(&edge) {
                diag.untagged_boundary_edges += 1; // tag without an edge
            }
        }

        // boundary edges must form closed loops: degree two at every vertex
        let mut degree: HashMap<usize, usize> = HashMap::new();
        for e in &self.boundary_edges {
            *degree.entry(e.a).or_insert(0) += 1;
            *degree.entry(e.b).or_insert(0) += 1;
        }
        diag.open_boundary_vertices = degree.values().filter(|&&d| d != 2).count();

        if let Some(sigma) = &self.pairing {
            diag.pairing_violations += self.pairing_violations(sigma);
        }
        diag
    }

    fn pairing_violations(&self, sigma: &[usize]) -> usize {
        let mut bad = 0;
        if sigma.len() != self.vertices.len() {
            return 1 + self.vertices.len();
        }
        for (i, &si) in sigma.iter().enumerate() {
            if sigma[si] != i {
                bad += 1;
                continue;
            }
            let v = self.vertices[i];
            let w = self.vertices[si];
            if w[0] != -v[0] || w[1] != -v[1] {
                // -0.0 == 0.0 under IEEE comparison, so this is the exact check
                bad += 1;
            }
        }
        // sigma must map triangles to triangles
        let key = |t: &[usize; 3]| {
            let mut s = *t;
            s.sort_unstable();
            s
        };
        let set: std::collections::HashSet<[usize; 3]> = self.triangles.iter().map(key).collect();
        for t in &self.triangles {
            let img = [sigma[t[0]], sigma[t[1]], sigma[t[2]]];
            if !set.contains(&key(&img)) {
                bad += 1;
            }
        }
        // and tagged edges to tagged edges with the same condition
        let edges: std::collections::HashSet<(usize, usize, BcTag)> = self
            .boundary_edges
            .iter()
            .map(|e| (e.a.min(e.b), e.a.max(e.b), e.bc))
            .collect();
        for e in &self.boundary_edges {
            let (a, b) = (sigma[e.a], sigma[e.b]);
            if !edges.contains(&(a.min(b), a.max(b), e.bc)) {
                bad += 1;
            }
        }
        bad
    }

    /// Uniform red refinement: every triangle splits into four, edge
    /// midpoints become new vertices. Pairing and tags are preserved; when
    /// `curves` is given, boundary midpoints are projected back onto their
    /// analytic curve (symmetrically, so the pairing stays exact).
    pub fn refine_with(&self, curves: Option<&[BoundarySegment]>) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut sigma = self.pairing.clone();
        let boundary_curve: HashMap<(usize, usize), (BcTag, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| ((e.a.min(e.b), e.a.max(e.b)), (e.bc, e.curve)))
            .collect();

        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                if !midpoint.contains_key(&key) {
                    midpoint.insert(key, usize::MAX); // allocated in the ordered pass below
                    edges.push(key);
                }
            }
        }
        edges.sort_unstable();

        let project = |key: (usize, usize), p: Point| -> Point {
            match (curves, boundary_curve.get(&key)) {
                (Some(cs), Some(&(_, c))) => cs[c].curve.project(p),
                _ => p,
            }
        };

        for &key in &edges {
            if midpoint[&key] != usize::MAX {
                continue;
            }
            let (a, b) = key;
            let p = [
                0.5 * (vertices[a][0] + vertices[b][0]),
                0.5 * (vertices[a][1] + vertices[b][1]),
            ];
            let p = project(key, p);
            let idx = vertices.len();
            vertices.push(p);
            midpoint.insert(key, idx);
            if let Some(s) = sigma.as_mut() {
                let ikey = {
                    let (ia, ib) = (s[a], s[b]);
                    (ia.min(ib), ia.max(ib))
                };
                if ikey == key {
                    // an edge through the origin is its own image
                    s.push(idx);
                } else {
                    let q = [neg_zero(p[0]), neg_zero(p[1])];
                    let jdx = vertices.len();
                    vertices.push(q);
                    midpoint.insert(ikey, jdx);
                    s.push(jdx);
                    s.push(idx);
                }
            }
        }

        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let [a, b, c] = *t;
            let key = |x: usize, y: usize| (x.min(y), x.max(y));
            let ab = midpoint[&key(a, b)];
            let bc = midpoint[&key(b, c)];
            let ca = midpoint[&key(c, a)];
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }

        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = midpoint[&(e.a.min(e.b), e.a.max(e.b))];
            boundary_edges.push(BoundaryEdge { a: e.a, b: m, bc: e.bc, curve: e.curve });
            boundary_edges.push(BoundaryEdge { a: m, b: e.b, bc: e.bc, curve: e.curve });
        }

        Mesh {
            vertices,
            triangles,
            boundary_edges,
            pairing: sigma,
            corner_marks: self.corner_marks.clone(),
            dirichlet_vertices: self.dirichlet_vertices.clone(),
            target_h: self.target_h / 2.0,
        }
    }

    /// Red refinement without boundary reprojection.
    pub fn refine(&self) -> Mesh {
        self.refine_with(None)
    }
}

fn neg_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        -x
    }
}

/// Outcome of [`Mesh::validate`].
#[derive(Debug, Default, Clone, Copy)]
pub struct MeshDiagnostics {
    pub min_angle_deg: f64,
    pub orientation_violations: usize,
    pub nonmanifold_edges: usize,
    pub untagged_boundary_edges: usize,
    pub open_boundary_vertices: usize,
    pub pairing_violations: usize,
}

impl MeshDiagnostics {
    pub fn structurally_sound(&self) -> bool {
        self.orientation_violations == 0
            && self.nonmanifold_edges == 0
            && self.untagged_boundary_edges == 0
            && self.open_boundary_vertices == 0
            && self.pairing_violations == 0
    }

    pub fn pass(&self, min_angle_deg: f64) -> bool {
        self.structurally_sound() && self.min_angle_deg >= min_angle_deg
    }
}
