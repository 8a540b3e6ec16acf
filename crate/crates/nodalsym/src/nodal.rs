//! Nodal domain counting for discrete eigenfunctions, Courant's bound, and
//! the closed-ring test on doubly connected domains.

use crate::eigensolve::{cluster, EigenResult};
use crate::mesh::Mesh;
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum NodalError {
    #[error("all vertex values lie below the zero tolerance")]
    AllNeutral,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodalDomain {
    pub sign: i8,
    /// Lumped vertex area of the domain.
    pub area: f64,
    pub touches_boundary: bool,
    /// Ids of the boundary loops this domain touches.
    pub loops_touched: Vec<usize>,
    pub vertex_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodalReport {
    pub domain_count: usize,
    pub domains: Vec<NodalDomain>,
    pub neutral_vertex_count: usize,
    pub zero_tol: f64,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Connected components of the tagged boundary edges; returns a loop id per
/// vertex (`usize::MAX` for interior vertices) and the loop count.
fn boundary_loops(mesh: &Mesh) -> (Vec<usize>, usize) {
    let n = mesh.n_vertices();
    let mut uf = UnionFind::new(n);
    for e in &mesh.boundary_edges {
        uf.union(e.a, e.b);
    }
    let on_boundary = mesh.boundary_vertices();
    let mut loop_id = vec![usize::MAX; n];
    let mut next = 0;
    let mut root_id = std::collections::HashMap::new();
    for i in 0..n {
        if on_boundary[i] {
            let r = uf.find(i);
            let id = *root_id.entry(r).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            loop_id[i] = id;
        }
    }
    (loop_id, next)
}

/// Fraction of the largest value within two edge hops below which a vertex
/// is treated as lying on the nodal set. Catches near-zero vertices at nodal
/// crossings (e.g. the saddle of a quadrant mode), where the discrete value
/// is far above `zero_tol * ||v||_inf` yet would bridge two domains.
const LOCAL_NEUTRAL_FRACTION: f64 = 0.1;

/// Sign-based nodal domain count: vertices with `|v_i| > zero_tol * ||v||_inf`
/// that are not locally negligible carry a sign, and same-sign vertices
/// joined across mesh edges form domains.
pub fn count_nodal_domains(
    mesh: &Mesh,
    v: &[f64],
    zero_tol: f64,
) -> Result<NodalReport, NodalError> {
    nodal_labels(mesh, v, zero_tol).map(|(report, _)| report)
}

/// As [`count_nodal_domains`], additionally returning the domain index of
/// every vertex (`None` for neutral vertices).
pub fn nodal_labels(
    mesh: &Mesh,
    v: &[f64],
    zero_tol: f64,
) -> Result<(NodalReport, Vec<Option<usize>>), NodalError> {
    let n = mesh.n_vertices();
    assert_eq!(v.len(), n);
    let amax = v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut ring1 = vec![0.0f64; n];
    for t in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            ring1[a] = ring1[a].max(v[b].abs());
            ring1[b] = ring1[b].max(v[a].abs());
        }
    }
    let mut neighbor_max = ring1.clone();
    for t in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            neighbor_max[a] = neighbor_max[a].max(ring1[b]);
            neighbor_max[b] = neighbor_max[b].max(ring1[a]);
        }
    }
    let cut = zero_tol * amax;
    let sign = |i: usize| -> i8 {
        if v[i].abs() <= cut.max(LOCAL_NEUTRAL_FRACTION * neighbor_max[i]) {
            0
        } else if v[i] > 0.0 {
            1
        } else {
            -1
        }
    };
    if amax == 0.0 || (0..n).all(|i| sign(i) == 0) {
        return Err(NodalError::AllNeutral);
    }

    let mut uf = UnionFind::new(n);
    for t in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            if sign(a) != 0 && sign(a) == sign(b) {
                uf.union(a, b);
            }
        }
    }

    // lumped vertex areas: a third of each incident triangle
    let mut lumped = vec![0.0; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let third = mesh.triangle_area(t) / 3.0;
        for &i in tri {
            lumped[i] += third;
        }
    }

    let (loop_id, _) = boundary_loops(mesh);
    let mut domains: Vec<NodalDomain> = Vec::new();
    let mut root_domain = std::collections::HashMap::new();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut neutral = 0;
    for i in 0..n {
        let s = sign(i);
        if s == 0 {
            neutral += 1;
            continue;
        }
        let r = uf.find(i);
        let d = *root_domain.entry(r).or_insert_with(|| {
            domains.push(NodalDomain {
                sign: s,
                area: 0.0,
                touches_boundary: false,
                loops_touched: Vec::new(),
                vertex_count: 0,
            });
            domains.len() - 1
        });
        labels[i] = Some(d);
        let dom = &mut domains[d];
        dom.area += lumped[i];
        dom.vertex_count += 1;
        if loop_id[i] != usize::MAX {
            dom.touches_boundary = true;
            if !dom.loops_touched.contains(&loop_id[i]) {
                dom.loops_touched.push(loop_id[i]);
            }
        }
    }
    for d in &mut domains {
        d.loops_touched.sort_unstable();
    }
    // order by area, largest first, and relabel accordingly
    let mut order: Vec<usize> = (0..domains.len()).collect();
    order.sort_by(|&a, &b| domains[b].area.total_cmp(&domains[a].area));
    let mut rank = vec![0; domains.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let mut sorted = Vec::with_capacity(domains.len());
    for &old in &order {
        sorted.push(domains[old].clone());
    }
    for l in labels.iter_mut().flatten() {
        *l = rank[*l];
    }
    Ok((
        NodalReport {
            domain_count: sorted.len(),
            domains: sorted,
            neutral_vertex_count: neutral,
            zero_tol,
        },
        labels,
    ))
}

/// Courant bound per eigenfunction: `(index, nodal count, pass)` with
/// 1-based indices; members of a degenerate cluster are checked against the
/// largest index in the cluster.
pub fn courant_check(
    eigen: &EigenResult,
    mesh: &Mesh,
    rel_gap: f64,
    zero_tol: f64,
) -> Vec<(usize, usize, bool)> {
    let clusters = cluster(&eigen.eigenvalues, rel_gap);
    let mut out = Vec::new();
    for range in clusters {
        let bound = range.end; // largest 1-based index in the cluster
        for i in range {
            let count = match count_nodal_domains(mesh, &eigen.vectors[i], zero_tol) {
                Ok(report) => report.domain_count,
                Err(NodalError::AllNeutral) => 0,
            };
            out.push((i + 1, count, count > 0 && count <= bound));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RingVerdict {
    /// Both nodal domains touch both boundary loops: the nodal line crosses
    /// the annulus.
    TransversalCut,
    /// Each nodal domain touches exactly one loop: the nodal line is a
    /// closed ring around the hole.
    ClosedRing,
    Other,
}

/// Topological test for the nodal line of a sign-changing function on an
/// annulus-like mesh (exactly two boundary loops).
pub fn nodal_ring_test(mesh: &Mesh, v: &[f64], zero_tol: f64) -> RingVerdict {
    let (_, n_loops) = boundary_loops(mesh);
    if n_loops != 2 {
        return RingVerdict::Other;
    }
    let Ok(report) = count_nodal_domains(mesh, v, zero_tol) else {
        return RingVerdict::Other;
    };
    if report.domain_count != 2 {
        return RingVerdict::Other;
    }
    let touched: Vec<&Vec<usize>> = report.domains.iter().map(|d| &d.loops_touched).collect();
    if touched.iter().all(|l| l.len() == 2) {
        RingVerdict::TransversalCut
    } else if touched.iter().all(|l| l.len() == 1) && touched[0] != touched[1] {
        RingVerdict::ClosedRing
    } else {
        RingVerdict::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{solve, EigenOptions};
    use crate::fem::assemble;
    use crate::geometry::DomainSpec;
    use crate::mesh::generate;

    fn disk_solution(h: f64) -> (Mesh, EigenResult) {
        let mesh = generate(&DomainSpec::disk(1.0).unwrap(), h).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let res = solve(&k, &m, &EigenOptions { k: 6, ..Default::default() }).unwrap();
        (mesh, res)
    }

    #[test]
    fn disk_mode_counts_match_figure() {
        let (mesh, res) = disk_solution(0.15);
        let expect = [1, 2, 2, 4, 4, 2];
        for (i, &want) in expect.iter().enumerate() {
            let report = count_nodal_domains(&mesh, &res.vectors[i], DEFAULT_ZERO_TOL).unwrap();
            assert_eq!(report.domain_count, want, "mode {i}");
        }
        // mu_2: both halves touch the boundary
        let r2 = count_nodal_domains(&mesh, &res.vectors[1], DEFAULT_ZERO_TOL).unwrap();
        assert!(r2.domains.iter().all(|d| d.touches_boundary));
        assert_eq!(r2.domains[0].sign * r2.domains[1].sign, -1);
        // mu_6: concentric pattern, inner disk does not touch the boundary
        let r6 = count_nodal_domains(&mesh, &res.vectors[5], DEFAULT_ZERO_TOL).unwrap();
        let touching = r6.domains.iter().filter(|d| d.touches_boundary).count();
        assert_eq!(touching, 1);
    }

    #[test]
    fn courant_bound_on_disk() {
        let (mesh, res) = disk_solution(0.15);
        let rows = courant_check(&res, &mesh, 0.05, DEFAULT_ZERO_TOL);
        assert_eq!(rows.len(), 6);
        let counts: Vec<usize> = rows.iter().map(|r| r.1).collect();
        assert_eq!(counts, vec![1, 2, 2, 4, 4, 2]);
        assert!(rows.iter().all(|r| r.2), "{rows:?}");
    }

    #[test]
    fn invariance_under_flip_and_scale() {
        let (mesh, res) = disk_solution(0.25);
        let v = &res.vectors[3];
        let base = count_nodal_domains(&mesh, v, DEFAULT_ZERO_TOL).unwrap();
        let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
        let f = count_nodal_domains(&mesh, &flipped, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(f.domain_count, base.domain_count);
        for (a, b) in base.domains.iter().zip(&f.domains) {
            assert_eq!(a.sign, -b.sign);
            assert_eq!(a.vertex_count, b.vertex_count);
        }
        let scaled: Vec<f64> = v.iter().map(|x| 3.7e4 * x).collect();
        let s = count_nodal_domains(&mesh, &scaled, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(s.domain_count, base.domain_count);
        assert_eq!(s.neutral_vertex_count, base.neutral_vertex_count);
    }

    #[test]
    fn refinement_keeps_disk_counts() {
        let coarse = generate(&DomainSpec::disk(1.0).unwrap(), 0.2).unwrap();
        let fine = coarse.refine_with(Some(&DomainSpec::disk(1.0).unwrap().boundary_segments()));
        let mut counts = Vec::new();
        for mesh in [&coarse, &fine] {
            let (k, m) = assemble(mesh).unwrap();
            let res = solve(&k, &m, &EigenOptions { k: 6, ..Default::default() }).unwrap();
            let c: Vec<usize> = (0..6)
                .map(|i| {
                    count_nodal_domains(mesh, &res.vectors[i], DEFAULT_ZERO_TOL)
                        .unwrap()
                        .domain_count
                })
                .collect();
            counts.push(c);
        }
        assert_eq!(counts[0], counts[1]);
    }

    #[test]
    fn zero_vector_is_all_neutral() {
        let mesh = generate(&DomainSpec::disk(1.0).unwrap(), 0.4).unwrap();
        let v = vec![0.0; mesh.n_vertices()];
        assert!(matches!(
            count_nodal_domains(&mesh, &v, DEFAULT_ZERO_TOL),
            Err(NodalError::AllNeutral)
        ));
    }

    #[test]
    fn annulus_ring_verdicts() {
        let spec = DomainSpec::annulus(1.0, 2.0).unwrap();
        let mesh = generate(&spec, 0.15).unwrap();
        let (k, m) = assemble(&mesh).unwrap();
        let res = solve(&k, &m, &EigenOptions { k: 2, ..Default::default() }).unwrap();
        // first nontrivial mode: angular, cuts the annulus transversally
        assert_eq!(
            nodal_ring_test(&mesh, &res.vectors[1], DEFAULT_ZERO_TOL),
            RingVerdict::TransversalCut
        );
        // radial sign function: closed ring around the hole
        let radial: Vec<f64> =
            mesh.vertices.iter().map(|p| p[0].hypot(p[1]) - 1.5).collect();
        assert_eq!(nodal_ring_test(&mesh, &radial, DEFAULT_ZERO_TOL), RingVerdict::ClosedRing);
        // constant sign: single domain
        let ones = vec![1.0; mesh.n_vertices()];
        assert_eq!(nodal_ring_test(&mesh, &ones, DEFAULT_ZERO_TOL), RingVerdict::Other);
        // simply connected meshes are rejected outright
        let disk = generate(&DomainSpec::disk(1.0).unwrap(), 0.3).unwrap();
        let ones = vec![1.0; disk.n_vertices()];
        assert_eq!(nodal_ring_test(&disk, &ones, DEFAULT_ZERO_TOL), RingVerdict::Other);
    }
}
