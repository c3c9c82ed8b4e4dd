//! Planar closed curves represented by their direction function θ(s).
//!
//! A curve parameterized by arc length on `[0, 2π]` has unit tangent
//! `e^{iθ(s)}`. The pre-shape manifold is the level set
//! `φ(θ) = ((1/2π)∫θ, ∫cos θ, ∫sin θ) = (π, 0, 0)`: the mean angle fixes the
//! rotation and the two closure integrals make the curve close up.

use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::manifold::{project_to_manifold, LevelSetManifold, NormalBasis, ProjectionOptions};
use crate::metric::{AmbientVector, QuadratureMetric};

/// Tolerance on `‖φ(θ) − (π, 0, 0)‖∞` for a value to count as a [`Shape`].
pub const ON_MANIFOLD_TOL: f64 = 1e-8;

/// Minimum number of samples / contour points.
pub const MIN_SAMPLES: usize = 8;

/// The shape manifold for `n` samples of θ.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeManifold {
    metric: QuadratureMetric,
}

impl ShapeManifold {
    pub fn new(n: usize) -> Self {
        assert!(n >= MIN_SAMPLES, "need at least {MIN_SAMPLES} samples");
        Self {
            metric: QuadratureMetric::uniform_circle(n),
        }
    }

    pub fn samples(&self) -> usize {
        self.metric.dim()
    }
}

impl LevelSetManifold for ShapeManifold {
    fn ambient_dim(&self) -> usize {
        self.metric.dim()
    }

    fn codim(&self) -> usize {
        3
    }

    fn metric(&self) -> &QuadratureMetric {
        &self.metric
    }

    fn constraint_target(&self) -> DVector<f64> {
        DVector::from_vec(vec![PI, 0.0, 0.0])
    }

    fn constraint_value(&self, p: &AmbientVector) -> DVector<f64> {
        let v = phi_with(&self.metric, p);
        DVector::from_column_slice(v.as_slice())
    }

    fn constraint_differential(&self, p: &AmbientVector, f: &AmbientVector) -> DVector<f64> {
        let v = dphi_with(&self.metric, p, f);
        DVector::from_column_slice(v.as_slice())
    }

    fn normal_generators(&self, p: &AmbientVector) -> Vec<AmbientVector> {
        vec![
            DVector::from_element(p.len(), 1.0),
            p.map(f64::cos),
            p.map(f64::sin),
        ]
    }
}

fn phi_with(metric: &QuadratureMetric, theta: &AmbientVector) -> Vector3<f64> {
    let w = metric.weights();
    let (mut m, mut c, mut s) = (0.0, 0.0, 0.0);
    for (t, wj) in theta.iter().zip(w.iter()) {
        m += wj * t;
        c += wj * t.cos();
        s += wj * t.sin();
    }
    // trapezoid rule with the endpoint θ(2π) = θ(0) + 2π; θ − s is periodic,
    // so this is the periodic rule plus ∫s ds exactly, i.e. an extra π/N
    let n = theta.len() as f64;
    Vector3::new(m / (2.0 * PI) + PI / n, c, s)
}

fn dphi_with(metric: &QuadratureMetric, theta: &AmbientVector, f: &AmbientVector) -> Vector3<f64> {
    let w = metric.weights();
    let (mut m, mut c, mut s) = (0.0, 0.0, 0.0);
    for ((t, fj), wj) in theta.iter().zip(f.iter()).zip(w.iter()) {
        m += wj * fj;
        c -= wj * fj * t.sin();
        s += wj * fj * t.cos();
    }
    Vector3::new(m / (2.0 * PI), c, s)
}

/// Level function `((1/2π)∫θ, ∫cos θ, ∫sin θ)` by the trapezoid rule on the
/// uniform grid.
pub fn phi(theta: &AmbientVector) -> Vector3<f64> {
    phi_with(&QuadratureMetric::uniform_circle(theta.len()), theta)
}

/// Differential of [`phi`] at `theta` along `f`.
pub fn dphi(theta: &AmbientVector, f: &AmbientVector) -> Result<Vector3<f64>> {
    if f.len() != theta.len() {
        return Err(Error::Dimension {
            expected: theta.len(),
            found: f.len(),
        });
    }
    Ok(dphi_with(&QuadratureMetric::uniform_circle(theta.len()), theta, f))
}

/// `‖φ(θ) − (π, 0, 0)‖∞`.
pub fn phi_residual(theta: &AmbientVector) -> f64 {
    (phi(theta) - Vector3::new(PI, 0.0, 0.0)).amax()
}

/// Orthonormal basis of the normal space at θ: Gram–Schmidt of `{1, cos θ, sin θ}`.
pub fn normal_basis(theta: &AmbientVector) -> Result<NormalBasis> {
    NormalBasis::at(&ShapeManifold::new(theta.len()), theta)
}

/// Unit circle, `θ_j = s_j`, exactly on the manifold.
pub fn circle_theta(n: usize) -> AmbientVector {
    DVector::from_fn(n, |j, _| 2.0 * PI * j as f64 / n as f64)
}

/// Grid abscissae `s_j = 2πj/n`.
pub fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
}

/// A direction function on the shape manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    theta: AmbientVector,
}

impl Shape {
    /// Accepts θ if it satisfies the manifold constraints within [`ON_MANIFOLD_TOL`].
    pub fn new(theta: AmbientVector) -> Result<Self> {
        if theta.len() < MIN_SAMPLES {
            return Err(Error::Parameter(format!(
                "shape needs at least {MIN_SAMPLES} samples, got {}",
                theta.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Degenerate("non-finite direction sample".into()));
        }
        let res = phi_residual(&theta);
        if !(res <= ON_MANIFOLD_TOL) {
            return Err(Error::Degenerate(format!(
                "direction function is off the shape manifold (residual {res:.3e})"
            )));
        }
        Ok(Self { theta })
    }

    /// Projects arbitrary samples onto the manifold.
    pub fn project(theta: AmbientVector, opts: ProjectionOptions) -> Result<Self> {
        if theta.len() < MIN_SAMPLES {
            return Err(Error::Parameter(format!(
                "shape needs at least {MIN_SAMPLES} samples, got {}",
                theta.len()
            )));
        }
        let m = ShapeManifold::new(theta.len());
        let q = project_to_manifold(&m, &theta, opts)?;
        Ok(Self { theta: q.point })
    }

    pub fn circle(n: usize) -> Self {
        Self {
            theta: circle_theta(n),
        }
    }

    pub fn theta(&self) -> &AmbientVector {
        &self.theta
    }

    pub fn into_theta(self) -> AmbientVector {
        self.theta
    }

    pub fn samples(&self) -> usize {
        self.theta.len()
    }

    pub fn phi(&self) -> Vector3<f64> {
        phi(&self.theta)
    }

    pub fn to_contour(&self, scale: f64) -> Contour {
        to_contour(&self.theta, scale)
    }
}

/// A closed polygon; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<[f64; 2]>,
}

impl Contour {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < MIN_SAMPLES {
            return Err(Error::Parameter(format!(
                "contour needs at least {MIN_SAMPLES} points, got {}",
                points.len()
            )));
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Degenerate("non-finite contour coordinate".into()));
        }
        for i in 0..points.len() {
            let (a, b) = (points[i], points[(i + 1) % points.len()]);
            if a == b {
                return Err(Error::Degenerate(format!(
                    "contour points {i} and {} coincide",
                    (i + 1) % points.len()
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace signed area; positive for counter-clockwise traversal.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            * 0.5
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| dist(self.points[i], self.points[(i + 1) % n]))
            .sum()
    }

    pub fn centroid(&self) -> [f64; 2] {
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
        [sx / n, sy / n]
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.points {
            for b in &self.points {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    /// Symmetric Hausdorff distance between the vertex sets.
    pub fn hausdorff(&self, other: &Contour) -> f64 {
        fn directed(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
            a.iter()
                .map(|p| b.iter().map(|q| dist(*p, *q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        }
        directed(&self.points, &other.points).max(directed(&other.points, &self.points))
    }

    fn reversed(&self) -> Contour {
        let mut points = self.points.clone();
        points.reverse();
        Contour { points }
    }

    /// `n` points equally spaced in arc length, starting at the first vertex.
    pub fn resample(&self, n: usize) -> Result<Vec<[f64; 2]>> {
        let m = self.points.len();
        let lengths: Vec<f64> = (0..m)
            .map(|i| dist(self.points[i], self.points[(i + 1) % m]))
            .collect();
        let total: f64 = lengths.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("contour has zero length".into()));
        }
        let mut out = Vec::with_capacity(n);
        let mut edge = 0;
        let mut edge_start = 0.0;
        for j in 0..n {
            let target = total * j as f64 / n as f64;
            while edge + 1 < m && edge_start + lengths[edge] <= target {
                edge_start += lengths[edge];
                edge += 1;
            }
            let t = ((target - edge_start) / lengths[edge]).clamp(0.0, 1.0);
            let (a, b) = (self.points[edge], self.points[(edge + 1) % m]);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
        Ok(out)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Result of [`from_contour`].
#[derive(Debug, Clone)]
pub struct ContourConversion {
    pub shape: Shape,
    /// The input was clockwise and was traversed in reverse.
    pub reversed: bool,
}

/// Converts a closed polygon to a shape with `n` direction samples.
///
/// The polygon is resampled uniformly in arc length, edge directions are
/// unwrapped to a continuous θ with total turning 2π, θ is shifted so the
/// mean-angle component of φ is π and finally projected onto the manifold. Clockwise input is reversed and
/// flagged in [`ContourConversion::reversed`].
pub fn from_contour(c: &Contour, n: usize, opts: ProjectionOptions) -> Result<ContourConversion> {
    if n < MIN_SAMPLES {
        return Err(Error::Parameter(format!(
            "need at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let area = c.signed_area();
    let reversed = area < 0.0;
    let oriented = if reversed { c.reversed() } else { c.clone() };
    let pts = oriented.resample(n)?;

    let raw: Vec<f64> = (0..n)
        .map(|j| {
            let (a, b) = (pts[j], pts[(j + 1) % n]);
            (b[1] - a[1]).atan2(b[0] - a[0])
        })
        .collect();
    let mut theta = DVector::zeros(n);
    theta[0] = raw[0];
    for j in 1..n {
        theta[j] = theta[j - 1] + wrap_angle(raw[j] - raw[j - 1]);
    }
    let turning = theta[n - 1] + wrap_angle(raw[0] - raw[n - 1]) - theta[0];
    let winding = (turning / (2.0 * PI)).round();
    if winding != 1.0 {
        return Err(Error::Degenerate(format!(
            "contour has winding number {winding} after orientation; expected a simple closed curve"
        )));
    }
    let shift = PI - phi(&theta)[0];
    theta.add_scalar_mut(shift);
    let shape = Shape::project(theta, opts)?;
    Ok(ContourConversion { shape, reversed })
}

/// Wraps an angle difference into `(−π, π]`.
fn wrap_angle(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Integrates the unit tangent `(cos θ, sin θ)` into a polygon, centred at the
/// origin and scaled by `scale`. Off-manifold input is accepted; the closure
/// gap is then simply nonzero.
pub fn to_contour(theta: &AmbientVector, scale: f64) -> Contour {
    let n = theta.len();
    let h = 2.0 * PI / n as f64;
    let mut points = Vec::with_capacity(n);
    let (mut x, mut y) = (0.0, 0.0);
    for t in theta.iter() {
        points.push([x, y]);
        x += h * t.cos();
        y += h * t.sin();
    }
    let (cx, cy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    let (cx, cy) = (cx / n as f64, cy / n as f64);
    for p in &mut points {
        p[0] = (p[0] - cx) * scale;
        p[1] = (p[1] - cy) * scale;
    }
    Contour { points }
}

/// `‖α_N − α_0‖` of the integrated polygon, i.e. the closure integrals.
pub fn closure_gap(theta: &AmbientVector, scale: f64) -> f64 {
    let v = phi(theta);
    v[1].hypot(v[2]) * scale.abs()
}

/// Moves the start point of θ forward by `m` samples, keeping θ continuous
/// and its mean unchanged.
pub fn cyclic_shift(theta: &AmbientVector, m: usize) -> AmbientVector {
    let n = theta.len();
    let mut out = DVector::from_fn(n, |j, _| {
        let k = j + m % n;
        if k < n {
            theta[k]
        } else {
            theta[k - n] + 2.0 * PI
        }
    });
    let shift = theta.mean() - out.mean();
    out.add_scalar_mut(shift);
    out
}

/// Cyclic shift of `theta` closest to `reference` in L².
///
/// Returns `(shift, aligned, distance)`.
pub fn align_cyclic(theta: &AmbientVector, reference: &AmbientVector) -> (usize, AmbientVector, f64) {
    let metric = QuadratureMetric::uniform_circle(theta.len());
    let mut best = (0, theta.clone(), f64::INFINITY);
    for m in 0..theta.len() {
        let cand = cyclic_shift(theta, m);
        let d = metric.norm(&(&cand - reference));
        if d < best.2 {
            best = (m, cand, d);
        }
    }
    best
}

/// A time-ordered sequence of shapes with common sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCurve {
    shapes: Vec<Shape>,
    dt: f64,
}

impl ShapeCurve {
    pub fn new(shapes: Vec<Shape>, dt: f64) -> Result<Self> {
        if shapes.len() < 2 {
            return Err(Error::Parameter(format!(
                "a shape curve needs at least 2 shapes, got {}",
                shapes.len()
            )));
        }
        let n = shapes[0].samples();
        if let Some(bad) = shapes.iter().find(|s| s.samples() != n) {
            return Err(Error::Dimension {
                expected: n,
                found: bad.samples(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter("dt must be positive".into()));
        }
        Ok(Self { shapes, dt })
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn samples(&self) -> usize {
        self.shapes[0].samples()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn manifold(&self) -> ShapeManifold {
        ShapeManifold::new(self.samples())
    }

    pub fn points(&self) -> Vec<AmbientVector> {
        self.shapes.iter().map(|s| s.theta.clone()).collect()
    }

    /// Wraps points already known to lie on the manifold.
    pub fn from_points(points: Vec<AmbientVector>, dt: f64) -> Result<Self> {
        let shapes = points.into_iter().map(Shape::new).collect::<Result<Vec<_>>>()?;
        Self::new(shapes, dt)
    }
}
