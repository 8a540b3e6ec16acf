//! Parametric planar domains with point symmetry `x ↦ -x`.
//!
//! Every domain is described exactly: membership predicates, closed-form
//! areas and boundary curves (line segments and circular arcs) carrying
//! boundary-condition tags. The membership predicates are written so that
//! `contains(p) == contains(-p)` holds bitwise for the symmetric variants.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("invalid domain parameters: {0}")]
    InvalidParameters(String),
}

/// Boundary-condition tag attached to a boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BcTag {
    Neumann,
    Dirichlet,
}

/// A single boundary curve: straight segment or circular arc.
///
/// Arcs are parametrised linearly in angle from `a0` to `a1`; the angles may
/// run in either direction and are not normalised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Segment { a: Point, b: Point },
    Arc { center: Point, radius: f64, a0: f64, a1: f64 },
}

impl Curve {
    pub fn point(&self, t: f64) -> Point {
        match *self {
            Curve::Segment { a, b } => [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
            Curve::Arc { center, radius, a0, a1 } => {
                let th = a0 + t * (a1 - a0);
                [center[0] + radius * th.cos(), center[1] + radius * th.sin()]
            }
        }
    }

    pub fn start(&self) -> Point {
        self.point(0.0)
    }

    pub fn end(&self) -> Point {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Curve::Segment { a, b } => (b[0] - a[0]).hypot(b[1] - a[1]),
            Curve::Arc { radius, a0, a1, .. } => radius * (a1 - a0).abs(),
        }
    }

    /// Closest point on the curve to `p`.
    pub fn project(&self, p: Point) -> Point {
        match *self {
            Curve::Segment { a, b } => {
                let d = [b[0] - a[0], b[1] - a[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                let mut t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2;
                t = t.clamp(0.0, 1.0);
                [a[0] + t * d[0], a[1] + t * d[1]]
            }
            Curve::Arc { center, radius, a0, a1 } => {
                let th = (p[1] - center[1]).atan2(p[0] - center[0]);
                let (lo, hi) = if a0 <= a1 { (a0, a1) } else { (a1, a0) };
                // bring th into the arc's angular window if possible
                let mut best = th;
                let mut ok = false;
                for k in -1..=1 {
                    let cand = th + 2.0 * PI * k as f64;
                    if cand >= lo && cand <= hi {
                        best = cand;
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    // clamp to nearest endpoint angle
                    let mut dlo = f64::MAX;
                    let mut dhi = f64::MAX;
                    for k in -1..=1 {
                        let cand = th + 2.0 * PI * k as f64;
                        dlo = dlo.min((cand - lo).abs());
                        dhi = dhi.min((cand - hi).abs());
                    }
                    best = if dlo < dhi { lo } else { hi };
                }
                [center[0] + radius * best.cos(), center[1] + radius * best.sin()]
            }
        }
    }

    pub fn distance(&self, p: Point) -> f64 {
        let q = self.project(p);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }
}

/// A tagged boundary curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySegment {
    pub curve: Curve,
    pub bc: BcTag,
}

fn polar(r: f64, th: f64) -> Point {
    snap([r * th.cos(), r * th.sin()], r)
}

/// Snap coordinates that are zero up to rounding (e.g. `cos(pi/2)`) to exact
/// zero so that coincident constraint endpoints compare bitwise equal.
pub(crate) fn snap(p: Point, scale: f64) -> Point {
    let tol = 1e-14 * scale.max(1.0);
    [
        if p[0].abs() < tol { 0.0 } else { p[0] },
        if p[1].abs() < tol { 0.0 } else { p[1] },
    ]
}

/// Parametric description of one of the built-in domains.
///
/// Serialises as `{"variant": "Wheel", "r1": 1.0, ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum DomainSpec {
    /// Disk of radius `r` centred at the origin.
    Disk { r: f64 },
    /// Rectangle `(-a,a) x (-b,b)`.
    Rectangle { a: f64, b: f64 },
    /// Annulus `r_inner < |x| < r_outer`.
    Annulus { r_inner: f64, r_outer: f64 },
    /// Hub of radius `r1`, tire `r2 < |x| < r3`, joined by two passages of
    /// angular half-width `eps` along the x1-axis.
    Wheel { r1: f64, r2: f64, r3: f64, eps: f64 },
    /// Two disks of radius `r` centred at `(±(r + l/2), 0)` joined by a
    /// rectangular handle of half-width `w` through the origin.
    Dumbbell { r: f64, l: f64, w: f64 },
    /// Wheel restricted to `{x1 > 0}` with Dirichlet data on `{x1 = 0}`.
    HalfWheelX { r1: f64, r2: f64, r3: f64, eps: f64 },
    /// Wheel restricted to `{x2 > 0}` with Dirichlet data on `{x2 = 0}`.
    HalfWheelY { r1: f64, r2: f64, r3: f64, eps: f64 },
}

impl DomainSpec {
    pub fn disk(r: f64) -> Result<Self, DomainError> {
        let s = DomainSpec::Disk { r };
        s.validate().map(|_| s)
    }

    pub fn rectangle(a: f64, b: f64) -> Result<Self, DomainError> {
        let s = DomainSpec::Rectangle { a, b };
        s.validate().map(|_| s)
    }

    pub fn annulus(r_inner: f64, r_outer: f64) -> Result<Self, DomainError> {
        let s = DomainSpec::Annulus { r_inner, r_outer };
        s.validate().map(|_| s)
    }

    pub fn wheel(r1: f64, r2: f64, r3: f64, eps: f64) -> Result<Self, DomainError> {
        let s = DomainSpec::Wheel { r1, r2, r3, eps };
        s.validate().map(|_| s)
    }

    pub fn dumbbell(r: f64, l: f64, w: f64) -> Result<Self, DomainError> {
        let s = DomainSpec::Dumbbell { r, l, w };
        s.validate().map(|_| s)
    }

    pub fn half_wheel_x(r1: f64, r2: f64, r3: f64, eps: f64) -> Result<Self, DomainError> {
        let s = DomainSpec::HalfWheelX { r1, r2, r3, eps };
        s.validate().map(|_| s)
    }

    pub fn half_wheel_y(r1: f64, r2: f64, r3: f64, eps: f64) -> Result<Self, DomainError> {
        let s = DomainSpec::HalfWheelY { r1, r2, r3, eps };
        s.validate().map(|_| s)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let err = |m: &str| Err(DomainError::InvalidParameters(m.to_string()));
        match *self {
            DomainSpec::Disk { r } => {
                if !(r > 0.0) {
                    return err("disk radius must be positive");
                }
            }
            DomainSpec::Rectangle { a, b } => {
                if !(a > 0.0 && b > 0.0) {
                    return err("rectangle half-sides must be positive");
                }
            }
            DomainSpec::Annulus { r_inner, r_outer } => {
                if !(0.0 < r_inner && r_inner < r_outer) {
                    return err("annulus requires 0 < r_inner < r_outer");
                }
            }
            DomainSpec::Wheel { r1, r2, r3, eps }
            | DomainSpec::HalfWheelX { r1, r2, r3, eps }
            | DomainSpec::HalfWheelY { r1, r2, r3, eps } => {
                if !(0.0 < r1 && r1 < r2 && r2 < r3) {
                    return err("wheel requires 0 < r1 < r2 < r3");
                }
                if !(0.0 < eps && eps < PI / 4.0) {
                    return err("wheel requires 0 < eps < pi/4");
                }
            }
            DomainSpec::Dumbbell { r, l, w } => {
                if !(r > 0.0 && l > 0.0 && w > 0.0 && w < r) {
                    return err("dumbbell requires 0 < w < r and l > 0");
                }
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self, DomainError> {
        let spec: DomainSpec = serde_json::from_str(s)
            .map_err(|e| DomainError::InvalidParameters(format!("json: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("domain spec serialises")
    }

    /// True for the full variants invariant under `x ↦ -x`.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, DomainSpec::HalfWheelX { .. } | DomainSpec::HalfWheelY { .. })
    }

    /// Exact membership in the open domain; boundary points return `false`.
    pub fn contains(&self, p: Point) -> bool {
        let [x, y] = p;
        let r2p = x * x + y * y;
        match *self {
            DomainSpec::Disk { r } => r2p < r * r,
            DomainSpec::Rectangle { a, b } => x.abs() < a && y.abs() < b,
            DomainSpec::Annulus { r_inner, r_outer } => {
                r_inner * r_inner < r2p && r2p < r_outer * r_outer
            }
            DomainSpec::Wheel { r1, r2, r3, eps } => wheel_contains(x, y, r1, r2, r3, eps),
            DomainSpec::HalfWheelX { r1, r2, r3, eps } => {
                x > 0.0 && wheel_contains(x, y, r1, r2, r3, eps)
            }
            DomainSpec::HalfWheelY { r1, r2, r3, eps } => {
                y > 0.0 && wheel_contains(x, y, r1, r2, r3, eps)
            }
            DomainSpec::Dumbbell { r, l, w } => {
                let c = r + l / 2.0;
                let dxr = x - c;
                let dxl = x + c;
                (x.abs() < c && y.abs() < w)
                    || dxr * dxr + y * y < r * r
                    || dxl * dxl + y * y < r * r
            }
        }
    }

    /// Closed-form area.
    pub fn area(&self) -> f64 {
        match *self {
            DomainSpec::Disk { r } => PI * r * r,
            DomainSpec::Rectangle { a, b } => 4.0 * a * b,
            DomainSpec::Annulus { r_inner, r_outer } => {
                PI * (r_outer * r_outer - r_inner * r_inner)
            }
            DomainSpec::Wheel { r1, r2, r3, eps } => wheel_area(r1, r2, r3, eps),
            DomainSpec::HalfWheelX { r1, r2, r3, eps }
            | DomainSpec::HalfWheelY { r1, r2, r3, eps } => wheel_area(r1, r2, r3, eps) / 2.0,
            DomainSpec::Dumbbell { r, l, w } => {
                let c = r + l / 2.0;
                let d = (r * r - w * w).sqrt();
                2.0 * PI * r * r + 4.0 * c * w - 2.0 * (w * d + r * r * (w / r).asin())
            }
        }
    }

    /// Tagged boundary curves. Together with [`DomainSpec::boundary_loops`]
    /// they form the closed loops bounding the domain.
    pub fn boundary_segments(&self) -> Vec<BoundarySegment> {
        use BcTag::{Dirichlet, Neumann};
        let seg = |a: Point, b: Point, bc| BoundarySegment { curve: Curve::Segment { a, b }, bc };
        let arc = |center: Point, radius: f64, a0: f64, a1: f64, bc| BoundarySegment {
            curve: Curve::Arc { center, radius, a0, a1 },
            bc,
        };
        match *self {
            DomainSpec::Disk { r } => vec![arc([0.0; 2], r, 0.0, 2.0 * PI, Neumann)],
            DomainSpec::Rectangle { a, b } => vec![
                seg([-a, -b], [a, -b], Neumann),
                seg([a, -b], [a, b], Neumann),
                seg([a, b], [-a, b], Neumann),
                seg([-a, b], [-a, -b], Neumann),
            ],
            DomainSpec::Annulus { r_inner, r_outer } => vec![
                arc([0.0; 2], r_outer, 0.0, 2.0 * PI, Neumann),
                arc([0.0; 2], r_inner, 2.0 * PI, 0.0, Neumann),
            ],
            DomainSpec::Wheel { r1, r2, r3, eps } => {
                let o = [0.0; 2];
                vec![
                    arc(o, r3, 0.0, 2.0 * PI, Neumann),
                    // upper hole
                    arc(o, r1, eps, PI - eps, Neumann),
                    seg(polar(r1, PI - eps), polar(r2, PI - eps), Neumann),
                    arc(o, r2, PI - eps, eps, Neumann),
                    seg(polar(r2, eps), polar(r1, eps), Neumann),
                    // lower hole
                    arc(o, r1, PI + eps, 2.0 * PI - eps, Neumann),
                    seg(polar(r1, 2.0 * PI - eps), polar(r2, 2.0 * PI - eps), Neumann),
                    arc(o, r2, 2.0 * PI - eps, PI + eps, Neumann),
                    seg(polar(r2, PI + eps), polar(r1, PI + eps), Neumann),
                ]
            }
            DomainSpec::Dumbbell { r, l, w } => {
                let c = r + l / 2.0;
                let d = (r * r - w * w).sqrt();
                let beta = w.atan2(d);
                let xj = c - d;
                vec![
                    arc([c, 0.0], r, -(PI - beta), PI - beta, Neumann),
                    seg([xj, w], [-xj, w], Neumann),
                    arc([-c, 0.0], r, beta, 2.0 * PI - beta, Neumann),
                    seg([-xj, -w], [xj, -w], Neumann),
                ]
            }
            DomainSpec::HalfWheelY { r1, r2, r3, eps } => {
                let o = [0.0; 2];
                vec![
                    seg([-r3, 0.0], [r3, 0.0], Dirichlet),
                    arc(o, r3, 0.0, PI, Neumann),
                    // the upper hole of the wheel
                    arc(o, r1, eps, PI - eps, Neumann),
                    seg(polar(r1, PI - eps), polar(r2, PI - eps), Neumann),
                    arc(o, r2, PI - eps, eps, Neumann),
                    seg(polar(r2, eps), polar(r1, eps), Neumann),
                ]
            }
            DomainSpec::HalfWheelX { r1, r2, r3, eps } => {
                let o = [0.0; 2];
                vec![
                    arc(o, r3, -PI / 2.0, PI / 2.0, Neumann),
                    seg([0.0, r3], [0.0, r2], Dirichlet),
                    arc(o, r2, PI / 2.0, eps, Neumann),
                    seg(polar(r2, eps), polar(r1, eps), Neumann),
                    arc(o, r1, eps, PI / 2.0, Neumann),
                    seg([0.0, r1], [0.0, -r1], Dirichlet),
                    arc(o, r1, -PI / 2.0, -eps, Neumann),
                    seg(polar(r1, -eps), polar(r2, -eps), Neumann),
                    arc(o, r2, -eps, -PI / 2.0, Neumann),
                    seg([0.0, -r2], [0.0, -r3], Dirichlet),
                ]
            }
        }
    }

    /// Indices into `boundary_segments` grouped into closed loops, outer
    /// loop first.
    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        match self {
            DomainSpec::Disk { .. } => vec![vec![0]],
            DomainSpec::Rectangle { .. } => vec![vec![0, 1, 2, 3]],
            DomainSpec::Annulus { .. } => vec![vec![0], vec![1]],
            DomainSpec::Wheel { .. } => vec![vec![0], vec![1, 2, 3, 4], vec![5, 6, 7, 8]],
            DomainSpec::Dumbbell { .. } => vec![vec![0, 1, 2, 3]],
            DomainSpec::HalfWheelY { .. } => vec![vec![0, 1], vec![2, 3, 4, 5]],
            DomainSpec::HalfWheelX { .. } => vec![(0..10).collect()],
        }
    }

    /// The involution induced by `x ↦ -x` on boundary curve indices.
    /// `None` for the non-symmetric half variants.
    pub fn curve_involution(&self) -> Option<Vec<usize>> {
        match self {
            DomainSpec::Disk { .. } => Some(vec![0]),
            DomainSpec::Rectangle { .. } => Some(vec![2, 3, 0, 1]),
            DomainSpec::Annulus { .. } => Some(vec![0, 1]),
            DomainSpec::Wheel { .. } => Some(vec![0, 5, 6, 7, 8, 1, 2, 3, 4]),
            DomainSpec::Dumbbell { .. } => Some(vec![2, 3, 0, 1]),
            _ => None,
        }
    }

    /// Reentrant corner points, recorded for local mesh grading.
    pub fn reentrant_corners(&self) -> Vec<Point> {
        match *self {
            DomainSpec::Wheel { r1, r2, eps, .. } => vec![
                polar(r1, eps),
                polar(r1, -eps),
                polar(r2, eps),
                polar(r2, -eps),
                polar(r1, PI - eps),
                polar(r1, PI + eps),
                polar(r2, PI - eps),
                polar(r2, PI + eps),
            ],
            DomainSpec::HalfWheelY { r1, r2, eps, .. } => vec![
                polar(r1, eps),
                polar(r2, eps),
                polar(r1, PI - eps),
                polar(r2, PI - eps),
            ],
            DomainSpec::HalfWheelX { r1, r2, eps, .. } => vec![
                polar(r1, eps),
                polar(r2, eps),
                polar(r1, -eps),
                polar(r2, -eps),
            ],
            DomainSpec::Dumbbell { r, l, w } => {
                let c = r + l / 2.0;
                let xj = c - (r * r - w * w).sqrt();
                vec![[xj, w], [-xj, w], [xj, -w], [-xj, -w]]
            }
            _ => vec![],
        }
    }

    /// Intervals of `Ω ∩ {x2 = 0}` as x-ranges, for symmetric variants.
    pub(crate) fn axis_intervals(&self) -> Vec<(f64, f64)> {
        match *self {
            DomainSpec::Disk { r } => vec![(-r, r)],
            DomainSpec::Rectangle { a, .. } => vec![(-a, a)],
            DomainSpec::Annulus { r_inner, r_outer } => {
                vec![(r_inner, r_outer), (-r_outer, -r_inner)]
            }
            DomainSpec::Wheel { r3, .. } => vec![(-r3, r3)],
            DomainSpec::Dumbbell { r, l, .. } => {
                let c = r + l / 2.0;
                vec![(-(c + r), c + r)]
            }
            _ => panic!("axis_intervals only defined for symmetric variants"),
        }
    }

    /// The pieces of the boundary lying in the open upper half-plane,
    /// each paired with the index of its parent full boundary curve.
    pub(crate) fn upper_half_curves(&self) -> Vec<(usize, Curve)> {
        let o = [0.0; 2];
        match *self {
            DomainSpec::Disk { r } => {
                vec![(0, Curve::Arc { center: o, radius: r, a0: 0.0, a1: PI })]
            }
            DomainSpec::Rectangle { a, b } => vec![
                (1, Curve::Segment { a: [a, 0.0], b: [a, b] }),
                (2, Curve::Segment { a: [a, b], b: [-a, b] }),
                (3, Curve::Segment { a: [-a, b], b: [-a, 0.0] }),
            ],
            DomainSpec::Annulus { r_inner, r_outer } => vec![
                (0, Curve::Arc { center: o, radius: r_outer, a0: 0.0, a1: PI }),
                (1, Curve::Arc { center: o, radius: r_inner, a0: PI, a1: 0.0 }),
            ],
            DomainSpec::Wheel { .. } => {
                let segs = self.boundary_segments();
                let mut out = vec![(
                    0usize,
                    match segs[0].curve {
                        Curve::Arc { center, radius, .. } => {
                            Curve::Arc { center, radius, a0: 0.0, a1: PI }
                        }
                        _ => unreachable!(),
                    },
                )];
                for i in 1..=4 {
                    out.push((i, segs[i].curve));
                }
                out
            }
            DomainSpec::Dumbbell { r, l, w } => {
                let c = r + l / 2.0;
                let d = (r * r - w * w).sqrt();
                let beta = w.atan2(d);
                let xj = c - d;
                vec![
                    (0, Curve::Arc { center: [c, 0.0], radius: r, a0: 0.0, a1: PI - beta }),
                    (1, Curve::Segment { a: [xj, w], b: [-xj, w] }),
                    (2, Curve::Arc { center: [-c, 0.0], radius: r, a0: beta, a1: PI }),
                ]
            }
            _ => panic!("upper_half_curves only defined for symmetric variants"),
        }
    }
}

fn wheel_contains(x: f64, y: f64, r1: f64, r2: f64, r3: f64, eps: f64) -> bool {
    let rr = x * x + y * y;
    if rr < r1 * r1 {
        return true;
    }
    if rr > r2 * r2 && rr < r3 * r3 {
        return true;
    }
    // passages: r1 <= |x| <= r2 (closed in r) within angle eps of the x1-axis
    if rr >= r1 * r1 && rr <= r2 * r2 {
        return x != 0.0 && y.abs() < x.abs() * eps.tan();
    }
    false
}

fn wheel_area(r1: f64, r2: f64, r3: f64, eps: f64) -> f64 {
    PI * r1 * r1 + PI * (r3 * r3 - r2 * r2) + 2.0 * eps * (r2 * r2 - r1 * r1)
}

/// An annular sector `r_in < |x| < r_out`, `th0 < θ < th1`, used for the
/// decomposition pieces in the wheel lower-bound experiment. `r_in = 0`
/// degenerates to a circular sector with its tip at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieceSpec {
    pub r_in: f64,
    pub r_out: f64,
    pub th0: f64,
    pub th1: f64,
    /// Condition on the straight wall at `th0`.
    pub bc0: BcTag,
    /// Condition on the straight wall at `th1`.
    pub bc1: BcTag,
    /// Constrain the value at the origin vertex (sector pieces only).
    pub pin_origin: bool,
}

impl PieceSpec {
    pub fn new(r_in: f64, r_out: f64, th0: f64, th1: f64, bc0: BcTag, bc1: BcTag) -> Self {
        assert!(r_in >= 0.0 && r_in < r_out && th0 < th1 && th1 - th0 < 2.0 * PI);
        PieceSpec { r_in, r_out, th0, th1, bc0, bc1, pin_origin: false }
    }

    pub fn with_pinned_origin(mut self) -> Self {
        assert!(self.r_in == 0.0, "only sector pieces contain the origin");
        self.pin_origin = true;
        self
    }

    pub fn contains(&self, p: Point) -> bool {
        let rr = p[0] * p[0] + p[1] * p[1];
        if rr <= self.r_in * self.r_in || rr >= self.r_out * self.r_out {
            return false;
        }
        let th = p[1].atan2(p[0]);
        (-1..=1).any(|k| {
            let cand = th + 2.0 * PI * k as f64;
            cand > self.th0 && cand < self.th1
        })
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.th1 - self.th0) * (self.r_out * self.r_out - self.r_in * self.r_in)
    }

    pub fn boundary_segments(&self) -> Vec<BoundarySegment> {
        let o = [0.0; 2];
        let wall0 = Curve::Segment { a: polar(self.r_in, self.th0), b: polar(self.r_out, self.th0) };
        let outer = Curve::Arc { center: o, radius: self.r_out, a0: self.th0, a1: self.th1 };
        let wall1 = Curve::Segment { a: polar(self.r_out, self.th1), b: polar(self.r_in, self.th1) };
        let mut segs = vec![
            BoundarySegment { curve: wall0, bc: self.bc0 },
            BoundarySegment { curve: outer, bc: BcTag::Neumann },
            BoundarySegment { curve: wall1, bc: self.bc1 },
        ];
        if self.r_in > 0.0 {
            segs.push(BoundarySegment {
                curve: Curve::Arc { center: o, radius: self.r_in, a0: self.th1, a1: self.th0 },
                bc: BcTag::Neumann,
            });
        }
        segs
    }

    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        vec![(0..self.boundary_segments().len()).collect()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn wheel123(eps: f64) -> DomainSpec {
        DomainSpec::wheel(1.0, 2.0, 3.0, eps).unwrap()
    }

    #[test]
    fn wheel_membership_examples() {
        let w = wheel123(0.1);
        assert!(w.contains([1.5, 0.0]));
        assert!(!w.contains([0.0, 1.5]));
        assert!(w.contains([-1.5, 0.0]));
        // hub and tire
        assert!(w.contains([0.0, 0.5]));
        assert!(w.contains([0.0, 2.5]));
        assert!(!w.contains([0.0, 3.5]));
    }

    #[test]
    fn closed_form_areas() {
        assert!((DomainSpec::disk(1.0).unwrap().area() - PI).abs() < 1e-15);
        assert!((DomainSpec::rectangle(2.0, 1.0).unwrap().area() - 8.0).abs() < 1e-15);
        let w = wheel123(0.1);
        assert!((w.area() - (6.0 * PI + 0.6)).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DomainSpec::wheel(2.0, 1.0, 3.0, 0.1).is_err());
        assert!(DomainSpec::wheel(1.0, 2.0, 3.0, 1.0).is_err());
        assert!(DomainSpec::annulus(2.0, 1.0).is_err());
        assert!(DomainSpec::dumbbell(1.0, 1.0, 1.5).is_err());
    }

    fn all_symmetric() -> Vec<DomainSpec> {
        vec![
            DomainSpec::disk(1.0).unwrap(),
            DomainSpec::rectangle(2.0, 1.0).unwrap(),
            DomainSpec::annulus(1.0, 2.0).unwrap(),
            wheel123(0.3),
            DomainSpec::dumbbell(1.0, 1.0, 0.25).unwrap(),
        ]
    }

    #[test]
    fn point_symmetry_of_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in all_symmetric() {
            for _ in 0..20_000 {
                let p = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
                assert_eq!(spec.contains(p), spec.contains([-p[0], -p[1]]), "{spec:?} at {p:?}");
            }
        }
    }

    #[test]
    fn monte_carlo_area_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut specs = all_symmetric();
        specs.push(DomainSpec::half_wheel_y(1.0, 2.0, 3.0, 0.3).unwrap());
        for spec in specs {
            let ext = 4.5; // all test domains fit in [-4.5, 4.5]^2
            let box_area = (2.0 * ext) * (2.0 * ext);
            let n = 1_000_000usize;
            let mut hits = 0u64;
            for _ in 0..n {
                let p = [rng.random_range(-ext..ext), rng.random_range(-ext..ext)];
                if spec.contains(p) {
                    hits += 1;
                }
            }
            let frac = hits as f64 / n as f64;
            let est = frac * box_area;
            let se = box_area * (frac * (1.0 - frac) / n as f64).sqrt();
            let diff = (est - spec.area()).abs();
            assert!(diff < 3.0 * se, "{spec:?}: MC {est} vs exact {} (3se={})", spec.area(), 3.0 * se);
        }
    }

    #[test]
    fn boundary_loops_close() {
        let mut specs = all_symmetric();
        specs.push(DomainSpec::half_wheel_x(1.0, 2.0, 3.0, 0.3).unwrap());
        specs.push(DomainSpec::half_wheel_y(1.0, 2.0, 3.0, 0.3).unwrap());
        for spec in specs {
            let segs = spec.boundary_segments();
            for lp in spec.boundary_loops() {
                for (i, &ci) in lp.iter().enumerate() {
                    let next = segs[lp[(i + 1) % lp.len()]].curve.start();
                    let end = segs[ci].curve.end();
                    let gap = (end[0] - next[0]).hypot(end[1] - next[1]);
                    assert!(gap < 1e-12, "{spec:?} curve {ci} gap {gap}");
                }
            }
        }
    }

    #[test]
    fn boundary_consistent_with_membership() {
        // points slightly inside/outside across each curve midpoint
        let mut specs = all_symmetric();
        specs.push(DomainSpec::half_wheel_x(1.0, 2.0, 3.0, 0.3).unwrap());
        for spec in specs {
            let segs = spec.boundary_segments();
            for bs in &segs {
                let p = bs.curve.point(0.37);
                // normal direction estimated from nearby curve points
                let q = bs.curve.point(0.38);
                let t = [q[0] - p[0], q[1] - p[1]];
                let n = [-t[1], t[0]];
                let len = n[0].hypot(n[1]);
                let n = [n[0] / len, n[1] / len];
                let d = 1e-6;
                let a = spec.contains([p[0] + d * n[0], p[1] + d * n[1]]);
                let b = spec.contains([p[0] - d * n[0], p[1] - d * n[1]]);
                assert_ne!(a, b, "{spec:?}: curve point {p:?} not separating");
            }
        }
    }

    #[test]
    fn curve_involution_matches_negation() {
        for spec in all_symmetric() {
            let segs = spec.boundary_segments();
            let inv = spec.curve_involution().unwrap();
            for (i, bs) in segs.iter().enumerate() {
                let p = bs.curve.point(0.29);
                let d = segs[inv[i]].curve.distance([-p[0], -p[1]]);
                assert!(d < 1e-12, "{spec:?} curve {i} -> {} distance {d}", inv[i]);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let w = wheel123(0.2);
        let s = w.to_json();
        assert!(s.contains("\"variant\":\"Wheel\""));
        assert_eq!(DomainSpec::from_json(&s).unwrap(), w);
        assert!(DomainSpec::from_json("{\"variant\":\"Disk\",\"r\":-1.0}").is_err());
    }

    #[test]
    fn piece_sector_membership() {
        let v = PieceSpec::new(1.0, 2.0, 0.0, 0.1, BcTag::Dirichlet, BcTag::Neumann);
        assert!(v.contains(polar(1.5, 0.05)));
        assert!(!v.contains(polar(1.5, 0.15)));
        assert!(!v.contains(polar(0.5, 0.05)));
        let s = PieceSpec::new(0.0, 1.0, -0.1, 0.1, BcTag::Neumann, BcTag::Neumann)
            .with_pinned_origin();
        assert!(s.contains([0.5, 0.0]));
        assert!(s.pin_origin);
    }
}
