//! Reference boundary, admissible shape maps, and the discrete boundary map.
//!
//! The hole boundary is the image of a fixed reference curve `γ` under a
//! diffeomorphism `φ` whose image must stay strictly inside the open unit
//! cell `(0,1)²`, scaled by the cell matrix `q`. All boundary functions are
//! represented by their values at `N` equispaced parameter nodes
//! `t_j = 2πj/N`; boundary integrals over the image curve become parameter
//! integrals with weight `|d/dt (qφ∘γ)| · 2π/N`, which is exactly the
//! change-of-variables density realized discretely.

use nalgebra::Vector2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::greens::{PeriodicCell, Vec2};

/// Minimum node count accepted by the admissibility checks.
pub const MIN_NODES: usize = 16;

/// Node-speed tolerance standing in for injectivity of the differential.
pub const SPEED_TOL: f64 = 1e-10;

/// Value, first and second parameter derivative of a curve at one node.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub point: Vec2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

/// Closed reference curve `γ: [0, 2π) → R²`, counterclockwise.
#[derive(Debug, Clone, Serialize)]
pub enum ReferenceCurve {
    /// Unit circle `(cos t, sin t)`.
    Circle,
    /// Unit circle traversed with phase `w(t) = t + warp·sin t`; same image,
    /// non-uniform speed. Requires `|warp| < 1`.
    WarpedCircle { warp: f64 },
}

impl ReferenceCurve {
    /// Phase angle and its first two derivatives.
    fn phase(&self, t: f64) -> (f64, f64, f64) {
        match self {
            ReferenceCurve::Circle => (t, 1.0, 0.0),
            ReferenceCurve::WarpedCircle { warp } => {
                (t + warp * t.sin(), 1.0 + warp * t.cos(), -warp * t.sin())
            }
        }
    }

    pub fn jet(&self, t: f64) -> CurveJet {
        let (w, dw, ddw) = self.phase(t);
        let e = Vec2::new(w.cos(), w.sin());
        let e_perp = Vec2::new(-w.sin(), w.cos());
        CurveJet {
            point: e,
            velocity: dw * e_perp,
            acceleration: ddw * e_perp - dw * dw * e,
        }
    }
}

/// Trigonometric interpolant of values at `M` equispaced nodes (`M` even).
#[derive(Debug, Clone, Serialize)]
pub struct TrigSeries {
    /// Cosine coefficients `a_0 .. a_(M/2)`; the first and last enter halved.
    cos_coeffs: Vec<f64>,
    /// Sine coefficients `b_1 .. b_(M/2 - 1)`.
    sin_coeffs: Vec<f64>,
}

impl TrigSeries {
    /// Interpolates node values sampled at `t_j = 2πj/M`.
    pub fn interpolating(values: &[f64]) -> Result<Self> {
        let m = values.len();
        if m < 4 || m % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "trigonometric interpolation needs an even node count >= 4, got {m}"
            )));
        }
        let half = m / 2;
        let mut cos_coeffs = vec![0.0; half + 1];
        let mut sin_coeffs = vec![0.0; half.saturating_sub(1)];
        for (k, c) in cos_coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                let angle = 2.0 * std::f64::consts::PI * (k * j) as f64 / m as f64;
                acc += v * angle.cos();
            }
            *c = 2.0 * acc / m as f64;
        }
        for (k, s) in sin_coeffs.iter_mut().enumerate() {
            let mode = k + 1;
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                let angle = 2.0 * std::f64::consts::PI * (mode * j) as f64 / m as f64;
                acc += v * angle.sin();
            }
            *s = 2.0 * acc / m as f64;
        }
        Ok(TrigSeries {
            cos_coeffs,
            sin_coeffs,
        })
    }

    /// Value and first two derivatives at parameter `t`.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        let half = self.cos_coeffs.len() - 1;
        let mut v = 0.5 * self.cos_coeffs[0];
        let mut dv = 0.0;
        let mut ddv = 0.0;
        for m in 1..=half {
            let mf = m as f64;
            let (s, c) = (mf * t).sin_cos();
            let a = if m == half {
                0.5 * self.cos_coeffs[m]
            } else {
                self.cos_coeffs[m]
            };
            let b = if m < half { self.sin_coeffs[m - 1] } else { 0.0 };
            v += a * c + b * s;
            dv += mf * (b * c - a * s);
            ddv -= mf * mf * (a * c + b * s);
        }
        (v, dv, ddv)
    }
}

/// Shape map `φ` applied to the reference curve. Images must land strictly
/// inside the open unit cell.
#[derive(Debug, Clone, Serialize)]
pub enum DiffeoMap {
    /// `y ↦ A y + b`, orientation-preserving (`det A > 0`).
    Affine { linear: [[f64; 2]; 2], shift: [f64; 2] },
    /// Sends the phase point `e(α)` of the reference circle to
    /// `center + r(α) e(α)` with
    /// `r(α) = r0 (1 + Σ_m a_m cos mα + b_m sin mα)`.
    RadialFourier {
        center: [f64; 2],
        r0: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    },
    /// `γ(t) ↦ γ(t) + (dx(t), dy(t))` with trigonometrically interpolated
    /// node displacements.
    Displacement { dx: TrigSeries, dy: TrigSeries },
}

impl DiffeoMap {
    /// Circle of radius `r` centered at `center`: the identity-type map for
    /// a circular hole.
    pub fn circle(center: [f64; 2], r: f64) -> Self {
        DiffeoMap::Affine {
            linear: [[r, 0.0], [0.0, r]],
            shift: center,
        }
    }

    /// Axis-aligned ellipse with semi-axes `(a, b)`.
    pub fn ellipse(center: [f64; 2], a: f64, b: f64) -> Self {
        DiffeoMap::Affine {
            linear: [[a, 0.0], [0.0, b]],
            shift: center,
        }
    }

    /// Displacement map from node values (both lists sampled at `2πj/M`).
    pub fn displacement(dx: &[f64], dy: &[f64]) -> Result<Self> {
        if dx.len() != dy.len() {
            return Err(Error::DimensionMismatch {
                expected: dx.len(),
                got: dy.len(),
            });
        }
        Ok(DiffeoMap::Displacement {
            dx: TrigSeries::interpolating(dx)?,
            dy: TrigSeries::interpolating(dy)?,
        })
    }

    fn radial_profile(r0: f64, cos_coeffs: &[f64], sin_coeffs: &[f64], w: f64) -> (f64, f64, f64) {
        let mut r = 1.0;
        let mut dr = 0.0;
        let mut ddr = 0.0;
        for (i, a) in cos_coeffs.iter().enumerate() {
            let m = (i + 1) as f64;
            let (s, c) = (m * w).sin_cos();
            r += a * c;
            dr -= a * m * s;
            ddr -= a * m * m * c;
        }
        for (i, b) in sin_coeffs.iter().enumerate() {
            let m = (i + 1) as f64;
            let (s, c) = (m * w).sin_cos();
            r += b * s;
            dr += b * m * c;
            ddr -= b * m * m * s;
        }
        (r0 * r, r0 * dr, r0 * ddr)
    }

    /// Jet of the composite `t ↦ φ(γ(t))` in unit-cell coordinates.
    pub fn image_jet(&self, curve: &ReferenceCurve, t: f64) -> CurveJet {
        match self {
            DiffeoMap::Affine { linear, shift } => {
                let g = curve.jet(t);
                let apply = |v: Vec2| {
                    Vec2::new(
                        linear[0][0] * v.x + linear[0][1] * v.y,
                        linear[1][0] * v.x + linear[1][1] * v.y,
                    )
                };
                CurveJet {
                    point: apply(g.point) + Vec2::new(shift[0], shift[1]),
                    velocity: apply(g.velocity),
                    acceleration: apply(g.acceleration),
                }
            }
            DiffeoMap::RadialFourier {
                center,
                r0,
                cos_coeffs,
                sin_coeffs,
            } => {
                let (w, dw, ddw) = curve.phase(t);
                let (r, dr, ddr) = Self::radial_profile(*r0, cos_coeffs, sin_coeffs, w);
                let e = Vec2::new(w.cos(), w.sin());
                let e_perp = Vec2::new(-w.sin(), w.cos());
                // d/dw of r(w) e(w) and its second derivative.
                let p_w = dr * e + r * e_perp;
                let p_ww = (ddr - r) * e + 2.0 * dr * e_perp;
                CurveJet {
                    point: Vec2::new(center[0], center[1]) + r * e,
                    velocity: dw * p_w,
                    acceleration: ddw * p_w + dw * dw * p_ww,
                }
            }
            DiffeoMap::Displacement { dx, dy } => {
                let g = curve.jet(t);
                let (vx, dvx, ddvx) = dx.jet(t);
                let (vy, dvy, ddvy) = dy.jet(t);
                CurveJet {
                    point: g.point + Vec2::new(vx, vy),
                    velocity: g.velocity + Vec2::new(dvx, dvy),
                    acceleration: g.acceleration + Vec2::new(ddvx, ddvy),
                }
            }
        }
    }
}

/// Which admissibility condition failed first, and where.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AdmissibilityFailure {
    /// Image node outside the open unit cell.
    Containment { node: usize, point: [f64; 2] },
    /// Composite speed below [`SPEED_TOL`] at a node.
    NodeSpeed { node: usize, speed: f64 },
    /// Image polyline crosses itself.
    SelfIntersection { segment_a: usize, segment_b: usize },
    /// Image polygon is not counterclockwise.
    Orientation { signed_area: f64 },
}

impl std::fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdmissibilityFailure::Containment { node, point } => write!(
                f,
                "containment violated at node {node}: image ({}, {}) not strictly inside (0,1)^2",
                point[0], point[1]
            ),
            AdmissibilityFailure::NodeSpeed { node, speed } => {
                write!(f, "node speed {speed} below tolerance at node {node}")
            }
            AdmissibilityFailure::SelfIntersection {
                segment_a,
                segment_b,
            } => write!(
                f,
                "image polyline self-intersects (segments {segment_a} and {segment_b})"
            ),
            AdmissibilityFailure::Orientation { signed_area } => write!(
                f,
                "image polygon not counterclockwise (signed area {signed_area})"
            ),
        }
    }
}

/// Outcome of the discrete admissibility checks.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub pass: bool,
    pub failure: Option<AdmissibilityFailure>,
    /// Distance from the image to the boundary of the unit cell (smallest
    /// node margin), useful for certifying parameter families.
    pub containment_margin: f64,
    /// Smallest node speed of the composite map.
    pub min_speed: f64,
}

/// Discrete admissibility check of `φ∘γ` at `n` nodes.
///
/// Conditions, in reporting order: containment in the open unit cell,
/// node speeds above tolerance, no polyline self-intersection,
/// counterclockwise orientation. `n` must be even and at least 16.
pub fn check_admissible(
    curve: &ReferenceCurve,
    diffeo: &DiffeoMap,
    n: usize,
) -> Result<AdmissibilityReport> {
    if n < MIN_NODES || n % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "node count must be even and >= {MIN_NODES}, got {n}"
        )));
    }
    let mut points = Vec::with_capacity(n);
    let mut speeds = Vec::with_capacity(n);
    for j in 0..n {
        let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let jet = diffeo.image_jet(curve, t);
        points.push(jet.point);
        speeds.push(jet.velocity.norm());
    }

    let mut margin = f64::INFINITY;
    let mut min_speed = f64::INFINITY;
    let mut failure = None;

    for (j, p) in points.iter().enumerate() {
        let m = p.x.min(p.y).min(1.0 - p.x).min(1.0 - p.y);
        margin = margin.min(m);
        if failure.is_none() && m <= 0.0 {
            failure = Some(AdmissibilityFailure::Containment {
                node: j,
                point: [p.x, p.y],
            });
        }
    }
    for (j, s) in speeds.iter().enumerate() {
        min_speed = min_speed.min(*s);
        if failure.is_none() && *s <= SPEED_TOL {
            failure = Some(AdmissibilityFailure::NodeSpeed { node: j, speed: *s });
        }
    }
    if failure.is_none() {
        if let Some((a, b)) = polyline_self_intersection(&points) {
            failure = Some(AdmissibilityFailure::SelfIntersection {
                segment_a: a,
                segment_b: b,
            });
        }
    }
    if failure.is_none() {
        let area = shoelace_area(&points);
        if area <= 0.0 {
            failure = Some(AdmissibilityFailure::Orientation { signed_area: area });
        }
    }

    Ok(AdmissibilityReport {
        pass: failure.is_none(),
        failure,
        containment_margin: margin,
        min_speed,
    })
}

/// Signed polygon area (shoelace); positive for counterclockwise.
pub fn shoelace_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    0.5 * acc
}

/// Ray-casting point-in-polygon test (closed polygon from the node list).
pub fn point_in_polygon(p: Vec2, polygon: &[Vec2]) -> bool {
    let n = polygon.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn orientation_sign(p: Vec2, q: Vec2, r: Vec2) -> i32 {
    let v = (q.y - p.y) * (r.x - q.x) - (q.x - p.x) * (r.y - q.y);
    let scale = (q - p).norm() * (r - q).norm();
    if v.abs() <= 1e-14 * scale.max(1e-300) {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn on_segment(p: Vec2, q: Vec2, r: Vec2) -> bool {
    q.x <= p.x.max(r.x) && q.x >= p.x.min(r.x) && q.y <= p.y.max(r.y) && q.y >= p.y.min(r.y)
}

fn segments_intersect(p1: Vec2, q1: Vec2, p2: Vec2, q2: Vec2) -> bool {
    let o1 = orientation_sign(p1, q1, p2);
    let o2 = orientation_sign(p1, q1, q2);
    let o3 = orientation_sign(p2, q2, p1);
    let o4 = orientation_sign(p2, q2, q1);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, q2, q1))
        || (o3 == 0 && on_segment(p2, p1, q2))
        || (o4 == 0 && on_segment(p2, q1, q2))
}

/// First pair of non-adjacent polyline segments that intersect, if any.
fn polyline_self_intersection(points: &[Vec2]) -> Option<(usize, usize)> {
    let n = points.len();
    for i in 0..n {
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue; // closing segment is adjacent to the first
            }
            let (p1, q1) = (points[i], points[(i + 1) % n]);
            let (p2, q2) = (points[j], points[(j + 1) % n]);
            if segments_intersect(p1, q1, p2, q2) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Discretized physical hole boundary `t ↦ q φ(γ(t))`: nodes, speeds,
/// outward normals, curvatures, and quadrature weights.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct BoundaryMap {
    cell: PeriodicCell,
    node_params: Vec<f64>,
    nodes: Vec<Vec2>,
    speeds: Vec<f64>,
    normals: Vec<Vec2>,
    curvatures: Vec<f64>,
    weights: Vec<f64>,
    perimeter: f64,
    area: f64,
}

impl BoundaryMap {
    /// Builds the boundary map after re-running the admissibility checks.
    ///
    /// The outward normal is the unit tangent rotated by -90° (the image is
    /// counterclockwise, so this points into the exterior periodic domain).
    pub fn build(
        cell: &PeriodicCell,
        curve: &ReferenceCurve,
        diffeo: &DiffeoMap,
        n: usize,
    ) -> Result<Self> {
        let report = check_admissible(curve, diffeo, n)?;
        if let Some(failure) = report.failure {
            return Err(Error::InvalidGeometry(failure));
        }
        let (q11, q22) = cell.edges();
        let scale = |v: Vec2| Vec2::new(q11 * v.x, q22 * v.y);

        let mut node_params = Vec::with_capacity(n);
        let mut nodes = Vec::with_capacity(n);
        let mut speeds = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut curvatures = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let dt = 2.0 * std::f64::consts::PI / n as f64;

        for j in 0..n {
            let t = dt * j as f64;
            let jet = diffeo.image_jet(curve, t);
            let v = scale(jet.velocity);
            let a = scale(jet.acceleration);
            let s = v.norm();
            let tangent = v / s;
            node_params.push(t);
            nodes.push(scale(jet.point));
            speeds.push(s);
            normals.push(Vec2::new(tangent.y, -tangent.x));
            curvatures.push((v.x * a.y - v.y * a.x) / (s * s * s));
            weights.push(dt * s);
        }

        let perimeter = weights.iter().sum();
        let area = shoelace_area(&nodes);
        Ok(BoundaryMap {
            cell: cell.clone(),
            node_params,
            nodes,
            speeds,
            normals,
            curvatures,
            weights,
            perimeter,
            area,
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell(&self) -> &PeriodicCell {
        &self.cell
    }

    /// Parameter values `t_j = 2πj/N`.
    pub fn node_params(&self) -> &[f64] {
        &self.node_params
    }

    /// Physical node positions `x_j = q φ(γ(t_j))`.
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    /// Parameterization speeds `|d/dt (qφ∘γ)(t_j)|`.
    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    /// Outward unit normals at the nodes.
    pub fn normals(&self) -> &[Vec2] {
        &self.normals
    }

    /// Signed curvatures of the physical curve at the nodes.
    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    /// Quadrature weights `w_j = (2π/N) s_j`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Boundary length `Σ w_j`.
    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Hole area from the shoelace formula on the node polygon.
    pub fn polygon_area(&self) -> f64 {
        self.area
    }

    /// Whether `x` (reduced modulo the lattice) lies inside the hole polygon.
    pub fn point_in_hole(&self, x: Vec2) -> bool {
        point_in_polygon(self.cell.wrap_to_cell(x), &self.nodes)
    }

    /// Distance from `x` to the nearest node, over all lattice images.
    pub fn min_node_distance(&self, x: Vec2) -> f64 {
        self.nodes
            .iter()
            .map(|p| self.cell.nearest_image(x - p).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Copy with negated normals. Diagnostic sabotage hook for the
    /// verification command: downstream operator identities must detect the
    /// wrong sign.
    pub fn flipped_normals(&self) -> Self {
        let mut out = self.clone();
        for nu in &mut out.normals {
            *nu = -*nu;
        }
        out
    }
}
