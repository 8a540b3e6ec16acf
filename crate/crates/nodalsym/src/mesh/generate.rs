//! Mesh generation: graded boundary sampling, constrained Delaunay
//! refinement (spade), and the mirror construction that makes the point
//! symmetry exact.
//!
//! Symmetric domains are meshed on the upper half-plane only; the lower half
//! is the image under exact coordinate negation, which yields a bitwise-exact
//! vertex involution. Constraint edges are never split during refinement, so
//! boundary vertices stay on the analytic curves where they were sampled.

use super::{BoundaryEdge, Mesh, MeshError};
use crate::geometry::{snap, BoundarySegment, Curve, DomainSpec, PieceSpec, Point};
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};
use std::collections::HashMap;

/// Generate a conforming triangulation with target edge length `h`.
///
/// Symmetric variants come back with an exact pairing involution; the half
/// variants carry Dirichlet tags on their axis edges instead.
pub fn generate(spec: &DomainSpec, h: f64) -> Result<Mesh, MeshError> {
    spec.validate()?;
    if !(h > 0.0) {
        return Err(MeshError::GenerationFailed("h must be positive".into()));
    }
    if let DomainSpec::Wheel { r1, eps, .. }
    | DomainSpec::HalfWheelX { r1, eps, .. }
    | DomainSpec::HalfWheelY { r1, eps, .. } = *spec
    {
        let limit = r1 * eps;
        if h > limit {
            return Err(MeshError::InfeasibleResolution { h, limit });
        }
    }

    let corners = spec.reentrant_corners();
    let mut h_eff = h;
    let mut last_angle = 0.0;
    for _ in 0..3 {
        let mesh = if spec.is_symmetric() {
            generate_symmetric(spec, h_eff, &corners)?
        } else {
            let segs = spec.boundary_segments();
            let area = spec.area();
            let inside = |p: Point| spec.contains(p);
            build_direct(&segs, &inside, area, &corners, h_eff, h)?
        };
        let diag = mesh.validate();
        if !diag.structurally_sound() {
            return Err(MeshError::GenerationFailed(format!("invalid mesh: {diag:?}")));
        }
        if diag.min_angle_deg >= MIN_ANGLE_DEG {
            return Ok(mesh);
        }
        last_angle = diag.min_angle_deg;
        h_eff *= 0.8;
    }
    Err(MeshError::QualityFailure { min_angle_deg: last_angle })
}

/// Mesh one of the annular-sector decomposition pieces. Quality is reported
/// but not enforced: sector tips with tiny opening angles necessarily carry
/// thin triangles.
pub fn generate_piece(piece: &PieceSpec, h: f64) -> Result<Mesh, MeshError> {
    let segs = piece.boundary_segments();
    let inside = |p: Point| piece.contains(p);
    let mut mesh = build_direct(&segs, &inside, piece.area(), &[], h, h)?;
    if piece.pin_origin {
        let origin = mesh
            .vertices
            .iter()
            .position(|v| v[0] == 0.0 && v[1] == 0.0)
            .ok_or_else(|| MeshError::GenerationFailed("origin vertex missing".into()))?;
        mesh.dirichlet_vertices.push(origin);
    }
    let diag = mesh.validate();
    if !diag.structurally_sound() {
        return Err(MeshError::GenerationFailed(format!("invalid piece mesh: {diag:?}")));
    }
    Ok(mesh)
}

const MIN_ANGLE_DEG: f64 = 20.0;
/// Refinement angle target; spade's termination guarantee weakens above 30.
const REFINE_ANGLE_DEG: f64 = 26.0;

/// Target spacing at `p`: the base length, graded down to a quarter within
/// three base lengths of a reentrant corner.
fn allowed_spacing(p: Point, h: f64, corners: &[Point]) -> f64 {
    let mut d = f64::MAX;
    for c in corners {
        d = d.min((p[0] - c[0]).hypot(p[1] - c[1]));
    }
    (d / 3.0).clamp(h / 4.0, h)
}

fn sample_curve(curve: &Curve, h: f64, corners: &[Point]) -> Vec<Point> {
    let scale = match *curve {
        Curve::Segment { .. } => curve.length(),
        Curve::Arc { radius, .. } => radius,
    };
    let mut points = vec![snap(curve.point(0.0), scale)];
    subdivide(curve, 0.0, 1.0, h, corners, scale, 0, &mut points);
    points
}

fn subdivide(
    curve: &Curve,
    t0: f64,
    t1: f64,
    h: f64,
    corners: &[Point],
    scale: f64,
    depth: usize,
    out: &mut Vec<Point>,
) {
    let len = curve.length() * (t1 - t0);
    let mid = curve.point(0.5 * (t0 + t1));
    if depth >= 24 || len <= allowed_spacing(mid, h, corners) {
        out.push(snap(curve.point(t1), scale));
        return;
    }
    let tm = 0.5 * (t0 + t1);
    subdivide(curve, t0, tm, h, corners, scale, depth + 1, out);
    subdivide(curve, tm, t1, h, corners, scale, depth + 1, out);
}

/// Graded 1D subdivision of `[a, b]` on the x-axis, returning interior and
/// right-endpoint samples.
fn subdivide_axis(a: f64, b: f64, h: f64, corners: &[Point], out: &mut Vec<f64>) {
    let mid = [0.5 * (a + b), 0.0];
    if b - a <= allowed_spacing(mid, h, corners) {
        out.push(b);
        return;
    }
    let m = 0.5 * (a + b);
    subdivide_axis(a, m, h, corners, out);
    subdivide_axis(m, b, h, corners, out);
}

struct RawMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
}

/// Welds points that agree up to a few ulps so that constraint chains from
/// different analytic curves close exactly at shared endpoints. The first
/// inserted coordinate wins, so exactly-placed points (axis samples) are
/// never perturbed.
struct VertexWeld<H> {
    cells: HashMap<(i64, i64), Vec<(Point, H)>>,
    q: f64,
}

impl<H: Copy> VertexWeld<H> {
    fn new(scale: f64) -> Self {
        VertexWeld { cells: HashMap::new(), q: 1e-12 * scale.max(1.0) }
    }

    fn find(&self, p: Point) -> Option<(Point, H)> {
        let (cx, cy) = ((p[0] / self.q).floor() as i64, (p[1] / self.q).floor() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = self.cells.get(&(cx + dx, cy + dy)) {
                    for &(s, handle) in list {
                        if (s[0] - p[0]).hypot(s[1] - p[1]) <= self.q {
                            return Some((s, handle));
                        }
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, p: Point, handle: H) {
        let key = ((p[0] / self.q).floor() as i64, (p[1] / self.q).floor() as i64);
        self.cells.entry(key).or_default().push((p, handle));
    }
}

fn triangulate(
    chains: &[Vec<Point>],
    h: f64,
    area_estimate: f64,
    inside: &dyn Fn(Point) -> bool,
) -> Result<RawMesh, MeshError> {
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let scale = chains
        .iter()
        .flatten()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(0.0, f64::max);
    let mut weld = VertexWeld::new(scale);
    for chain in chains {
        let mut prev = None;
        for &p in chain {
            let handle = match weld.find(p) {
                Some((_, handle)) => handle,
                None => {
                    let handle = cdt
                        .insert(Point2::new(p[0], p[1]))
                        .map_err(|e| MeshError::GenerationFailed(format!("insert: {e:?}")))?;
                    weld.insert(p, handle);
                    handle
                }
            };
            if let Some(prev) = prev {
                if prev != handle {
                    cdt.add_constraint(prev, handle);
                }
            }
            prev = Some(handle);
        }
    }

    let max_area = 0.5 * h * h;
    let budget = (area_estimate / max_area * 8.0) as usize + 20_000;
    let result = cdt.refine(
        RefinementParameters::new()
            .exclude_outer_faces(true)
            .keep_constraint_edges()
            .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(budget),
    );
    if !result.refinement_complete {
        return Err(MeshError::GenerationFailed("refinement vertex budget exhausted".into()));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.into_iter().collect();

    let mut vert_ids: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let vs = face.vertices();
        let ps: Vec<Point> = vs.iter().map(|v| [v.position().x, v.position().y]).collect();
        let centroid = [
            (ps[0][0] + ps[1][0] + ps[2][0]) / 3.0,
            (ps[0][1] + ps[1][1] + ps[2][1]) / 3.0,
        ];
        if !inside(centroid) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (k, v) in vs.iter().enumerate() {
            let id = v.fix().index();
            let next = vertices.len();
            let idx = *vert_ids.entry(id).or_insert_with(|| {
                vertices.push([v.position().x, v.position().y]);
                next
            });
            tri[k] = idx;
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(MeshError::GenerationFailed("no interior triangles produced".into()));
    }
    Ok(RawMesh { vertices, triangles })
}

/// Edges of `triangles` adjacent to exactly one triangle, oriented as in the
/// triangle they belong to.
fn boundary_edge_pairs(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut counts: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
    for t in triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            let e = counts.entry((a.min(b), a.max(b))).or_insert((0, (a, b)));
            e.0 += 1;
        }
    }
    let mut out: Vec<(usize, usize)> =
        counts.into_iter().filter(|(_, (n, _))| *n == 1).map(|(_, (_, e))| e).collect();
    out.sort_unstable();
    out
}

fn nearest_curve(segs: &[BoundarySegment], p: Point, tol: f64) -> Option<usize> {
    let mut best = None;
    let mut best_d = tol;
    for (i, s) in segs.iter().enumerate() {
        let d = s.curve.distance(p);
        if d < best_d {
            best_d = d;
            best = Some(i);
        }
    }
    best
}

fn mark_corners(vertices: &[Point], corners: &[Point], h: f64) -> Vec<usize> {
    let mut marks = Vec::new();
    for c in corners {
        let mut best = None;
        let mut best_d = h;
        for (i, v) in vertices.iter().enumerate() {
            let d = (v[0] - c[0]).hypot(v[1] - c[1]);
            if d < best_d {
                best_d = d;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            marks.push(i);
        }
    }
    marks
}

/// Direct (non-mirrored) generation from a closed set of tagged curves.
fn build_direct(
    segs: &[BoundarySegment],
    inside: &dyn Fn(Point) -> bool,
    area: f64,
    corners: &[Point],
    h: f64,
    target_h: f64,
) -> Result<Mesh, MeshError> {
    let chains: Vec<Vec<Point>> = segs.iter().map(|s| sample_curve(&s.curve, h, corners)).collect();
    let raw = triangulate(&chains, h, area, inside)?;
    let mut boundary_edges = Vec::new();
    for (a, b) in boundary_edge_pairs(&raw.triangles) {
        let m = [
            0.5 * (raw.vertices[a][0] + raw.vertices[b][0]),
            0.5 * (raw.vertices[a][1] + raw.vertices[b][1]),
        ];
        let curve = nearest_curve(segs, m, h).ok_or_else(|| {
            MeshError::GenerationFailed(format!("boundary edge at {m:?} matches no curve"))
        })?;
        boundary_edges.push(BoundaryEdge { a, b, bc: segs[curve].bc, curve });
    }
    let corner_marks = mark_corners(&raw.vertices, corners, h);
    Ok(Mesh {
        vertices: raw.vertices,
        triangles: raw.triangles,
        boundary_edges,
        pairing: None,
        corner_marks,
        dirichlet_vertices: Vec::new(),
        target_h,
    })
}

/// Mesh the upper half of a symmetric domain and mirror it through the
/// origin, producing an exact involution.
fn generate_symmetric(spec: &DomainSpec, h: f64, corners: &[Point]) -> Result<Mesh, MeshError> {
    let full_segs = spec.boundary_segments();
    let involution = spec.curve_involution().expect("symmetric variant");

    // axis constraint chains, sampled symmetrically about the origin
    let mut chains: Vec<Vec<Point>> = Vec::new();
    let mut intervals = spec.axis_intervals();
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut done = vec![false; intervals.len()];
    for i in 0..intervals.len() {
        if done[i] {
            continue;
        }
        let (a, b) = intervals[i];
        if a == -b {
            // symmetric interval through the origin
            let mut pos = Vec::new();
            subdivide_axis(0.0, b, h, corners, &mut pos);
            let mut xs: Vec<f64> = pos.iter().rev().map(|&x| -x).collect();
            xs.push(0.0);
            xs.extend(pos.iter().copied());
            chains.push(xs.into_iter().map(|x| [x, 0.0]).collect());
            done[i] = true;
        } else {
            // paired with its negated partner
            let j = intervals
                .iter()
                .position(|&(c, d)| c == -b && d == -a)
                .expect("axis intervals of a symmetric domain come in pairs");
            let mut xs = vec![a];
            subdivide_axis(a, b, h, corners, &mut xs);
            let neg: Vec<Point> = xs.iter().map(|&x| [-x, 0.0]).collect();
            chains.push(xs.into_iter().map(|x| [x, 0.0]).collect());
            chains.push(neg);
            done[i] = true;
            done[j] = true;
        }
    }

    // boundary pieces strictly above the axis
    let upper = spec.upper_half_curves();
    for (_, curve) in &upper {
        chains.push(sample_curve(curve, h, corners));
    }

    let inside = |p: Point| p[1] > 0.0 && spec.contains(p);
    let raw = triangulate(&chains, h, spec.area() / 2.0, &inside)?;

    // mirror: axis vertices are shared, everything else is negated
    let upper_segs: Vec<BoundarySegment> = upper
        .iter()
        .map(|&(ci, curve)| BoundarySegment { curve, bc: full_segs[ci].bc })
        .collect();

    let n_upper = raw.vertices.len();
    let mut vertices: Vec<Point> = Vec::with_capacity(2 * n_upper);
    let mut sigma: Vec<usize> = Vec::with_capacity(2 * n_upper);
    let mut full_of_upper = vec![usize::MAX; n_upper]; // upper vertex -> full id
    let mut mirror_of_upper = vec![usize::MAX; n_upper]; // sigma image
    let mut axis_lookup: HashMap<u64, usize> = HashMap::new();

    for (i, &v) in raw.vertices.iter().enumerate() {
        if v[1] == 0.0 {
            let id = vertices.len();
            vertices.push([v[0], 0.0]);
            sigma.push(usize::MAX);
            full_of_upper[i] = id;
            axis_lookup.insert((v[0] + 0.0).to_bits(), id);
        }
    }
    for (i, &v) in raw.vertices.iter().enumerate() {
        if v[1] != 0.0 {
            let id = vertices.len();
            vertices.push(v);
            sigma.push(usize::MAX);
            let mid = vertices.len();
            vertices.push([super::neg_zero(v[0]), -v[1]]);
            sigma.push(id);
            sigma[id] = mid;
            full_of_upper[i] = id;
            mirror_of_upper[i] = mid;
        }
    }
    // pair up axis vertices through negation
    for (i, &v) in raw.vertices.iter().enumerate() {
        if v[1] == 0.0 {
            let key = (super::neg_zero(v[0]) + 0.0).to_bits();
            let partner = *axis_lookup.get(&key).ok_or_else(|| {
                MeshError::GenerationFailed(format!("axis vertex {v:?} has no mirror partner"))
            })?;
            let id = full_of_upper[i];
            sigma[id] = partner;
            // the point reflection sends an axis vertex to its negation
            mirror_of_upper[i] = partner;
        }
    }

    let map_up = |i: usize| full_of_upper[i];
    let map_down = |i: usize| mirror_of_upper[i];

    let mut triangles = Vec::with_capacity(2 * raw.triangles.len());
    for t in &raw.triangles {
        triangles.push([map_up(t[0]), map_up(t[1]), map_up(t[2])]);
    }
    for t in &raw.triangles {
        // negation preserves orientation
        triangles.push([map_down(t[0]), map_down(t[1]), map_down(t[2])]);
    }

    let mut boundary_edges = Vec::new();
    for (a, b) in boundary_edge_pairs(&raw.triangles) {
        let (pa, pb) = (raw.vertices[a], raw.vertices[b]);
        if pa[1] == 0.0 && pb[1] == 0.0 {
            continue; // axis edge: interior after mirroring
        }
        let m = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let local = nearest_curve(&upper_segs, m, h).ok_or_else(|| {
            MeshError::GenerationFailed(format!("boundary edge at {m:?} matches no curve"))
        })?;
        let curve = upper[local].0;
        boundary_edges.push(BoundaryEdge {
            a: map_up(a),
            b: map_up(b),
            bc: full_segs[curve].bc,
            curve,
        });
        boundary_edges.push(BoundaryEdge {
            a: map_down(a),
            b: map_down(b),
            bc: full_segs[curve].bc,
            curve: involution[curve],
        });
    }

    let corner_marks = mark_corners(&vertices, corners, h);
    Ok(Mesh {
        vertices,
        triangles,
        boundary_edges,
        pairing: Some(sigma),
        corner_marks,
        dirichlet_vertices: Vec::new(),
        target_h: h,
    })
}

