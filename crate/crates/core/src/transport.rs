//! Discrete parallel transport along a sampled curve on a level-set manifold.
//!
//! One step from `p` to `q` moves a tangent vector `v ∈ T_p M` to
//!
//! ```text
//! v' = v + Σ_k a_k B_k(p),   A a = −c,   A_jk = ⟨B_k(p), B_j(q)⟩,   c_j = ⟨v, B_j(q)⟩
//! ```
//!
//! i.e. the ambient derivative of the field is normal at the step's start
//! point and the result is tangent at `q`. The normal basis is taken at the
//! start point of each step.
//!
//! This map `F` is linear but not an isometry: `‖Fv‖² = ‖v‖² + ‖a‖²`.
//! [`Renormalize::Isometric`] replaces it by its orthogonal polar factor
//! `F (FᵀF)^{-1/2}`, which in closed form is
//!
//! ```text
//! v' = v − B(q) A y − B(p) S y,   S = (AᵀA)^{1/2},   y = (I + S)⁻¹ A⁻¹ c.
//! ```
//!
//! On the sphere this is exactly great-circle parallel transport. The
//! backward step (roles of `p` and `q` swapped) is the metric adjoint of the
//! forward step in both variants, so with the isometric correction it is
//! also its exact inverse.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::manifold::{condition_number, LevelSetManifold, NormalBasis};
use crate::metric::{AmbientVector, QuadratureMetric};

/// `cond(A)` above which a step is rejected as too large.
pub const MAX_STEP_CONDITION: f64 = 1e8;

/// Per-step correction applied on top of the literal normal-correction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Renormalize {
    /// The raw step.
    #[default]
    Off,
    /// Raw step, then rescale single vectors to their original norm and
    /// re-orthonormalize frames by Gram–Schmidt.
    Rescale,
    /// The orthogonal polar factor of the raw step.
    Isometric,
}

impl Renormalize {
    pub fn as_str(&self) -> &'static str {
        match self {
            Renormalize::Off => "off",
            Renormalize::Rescale => "rescale",
            Renormalize::Isometric => "isometric",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "off" => Some(Renormalize::Off),
            "rescale" => Some(Renormalize::Rescale),
            "isometric" => Some(Renormalize::Isometric),
            _ => None,
        }
    }
}

/// A tangent vector at curve index `base_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base_index: usize,
    pub values: AmbientVector,
}

/// Ordered tangent vectors sharing a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub base_index: usize,
    pub vectors: Vec<AmbientVector>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `max |G − I|` for the frame's Gram matrix.
    pub fn orthonormality_error(&self, metric: &QuadratureMetric) -> f64 {
        let g = metric.gram(&self.vectors);
        (g - DMatrix::identity(self.len(), self.len())).amax()
    }

    /// Coordinates `⟨v, e_i⟩` of `v` against the frame.
    pub fn coordinates(&self, metric: &QuadratureMetric, v: &AmbientVector) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.vectors.iter().map(|e| metric.dot(e, v)))
    }

    /// `Σ_i c_i e_i`.
    pub fn combine(&self, c: &[f64]) -> AmbientVector {
        let mut out = DVector::zeros(self.vectors[0].len());
        for (e, ci) in self.vectors.iter().zip(c) {
            out.axpy(*ci, e, 1.0);
        }
        out
    }
}

/// Small dense matrices for one oriented step `from → to`.
#[derive(Debug, Clone)]
struct StepMatrices {
    /// `A_jk = ⟨B_k(from), B_j(to)⟩`.
    a: DMatrix<f64>,
    a_inv: DMatrix<f64>,
    /// `(AᵀA)^{1/2}`.
    s: DMatrix<f64>,
    /// `(I + S)⁻¹ A⁻¹`.
    y_map: DMatrix<f64>,
}

impl StepMatrices {
    fn new(a: DMatrix<f64>) -> Option<Self> {
        let k = a.nrows();
        let a_inv = a.clone().try_inverse()?;
        let ata = a.transpose() * &a;
        let eig = ata.symmetric_eigen();
        let sqrt_vals = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
        let s = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        let ips_inv = (DMatrix::identity(k, k) + &s).try_inverse()?;
        let y_map = ips_inv * &a_inv;
        Some(Self { a, a_inv, s, y_map })
    }
}

fn apply_step(
    metric: &QuadratureMetric,
    from: &NormalBasis,
    to: &NormalBasis,
    mats: &StepMatrices,
    v: &AmbientVector,
    renorm: Renormalize,
) -> AmbientVector {
    let c = to.coefficients(metric, v);
    match renorm {
        Renormalize::Off | Renormalize::Rescale => {
            let a = -(&mats.a_inv * c);
            let mut out = v.clone();
            from.add_combination(&mut out, &a, 1.0);
            if renorm == Renormalize::Rescale {
                let (n0, n1) = (metric.norm(v), metric.norm(&out));
                if n1 > 0.0 {
                    out *= n0 / n1;
                }
            }
            out
        }
        Renormalize::Isometric => {
            let y = &mats.y_map * c;
            let mut out = v.clone();
            to.add_combination(&mut out, &(&mats.a * &y), -1.0);
            from.add_combination(&mut out, &(&mats.s * &y), -1.0);
            out
        }
    }
}

/// Precomputed matrices for the segment between curve indices `i` and `i+1`.
#[derive(Debug, Clone)]
struct Segment {
    forward: StepMatrices,
    backward: StepMatrices,
}

fn segment(metric: &QuadratureMetric, p: &NormalBasis, q: &NormalBasis) -> Result<Segment> {
    let a = p.cross(metric, q);
    let cond = condition_number(&a);
    if !(cond <= MAX_STEP_CONDITION) {
        return Err(Error::StepTooLarge { cond, segment: None });
    }
    let singular = || Error::StepTooLarge {
        cond: f64::INFINITY,
        segment: None,
    };
    let backward = StepMatrices::new(a.transpose()).ok_or_else(singular)?;
    let forward = StepMatrices::new(a).ok_or_else(singular)?;
    Ok(Segment { forward, backward })
}

/// Transports the vectors of a frame across one step, given the normal bases
/// at both ends. Used when the next point is only known during the sweep.
pub(crate) fn step_vectors(
    metric: &QuadratureMetric,
    from: &NormalBasis,
    to: &NormalBasis,
    vectors: &[AmbientVector],
    renorm: Renormalize,
) -> Result<Vec<AmbientVector>> {
    let seg = segment(metric, from, to)?;
    let raw = if renorm == Renormalize::Rescale {
        Renormalize::Off
    } else {
        renorm
    };
    let out: Vec<AmbientVector> = vectors
        .iter()
        .map(|v| apply_step(metric, from, to, &seg.forward, v, raw))
        .collect();
    if renorm == Renormalize::Rescale {
        metric.gram_schmidt(&out)
    } else {
        Ok(out)
    }
}

/// One transport step of `v ∈ T_p M` to `T_q M`.
pub fn transport_step<M: LevelSetManifold + ?Sized>(
    m: &M,
    p: &AmbientVector,
    q: &AmbientVector,
    v: &AmbientVector,
    renorm: Renormalize,
) -> Result<AmbientVector> {
    m.metric().check(v)?;
    let bp = NormalBasis::at(m, p)?;
    let bq = NormalBasis::at(m, q)?;
    let seg = segment(m.metric(), &bp, &bq)?;
    Ok(apply_step(m.metric(), &bp, &bq, &seg.forward, v, renorm))
}

/// A sampled curve with its normal bases and per-segment step matrices.
///
/// Building it costs `O(T (kN + k³))`; every transport step afterwards costs
/// `O(kN)`. The structure is immutable and can be shared across threads.
#[derive(Debug, Clone)]
pub struct CurveTransport<'m, M: ?Sized> {
    manifold: &'m M,
    points: Vec<AmbientVector>,
    bases: Vec<NormalBasis>,
    segments: Vec<Segment>,
}

impl<'m, M: LevelSetManifold + ?Sized> CurveTransport<'m, M> {
    pub fn new(manifold: &'m M, points: Vec<AmbientVector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Parameter("curve has no points".into()));
        }
        let bases = points
            .iter()
            .enumerate()
            .map(|(i, p)| NormalBasis::at(manifold, p).map_err(|e| e.at_step(i)))
            .collect::<Result<Vec<_>>>()?;
        let metric = manifold.metric();
        let segments = bases
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                segment(metric, &w[0], &w[1]).map_err(|e| match e {
                    Error::StepTooLarge { cond, .. } => Error::StepTooLarge {
                        cond,
                        segment: Some(i),
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            manifold,
            points,
            bases,
            segments,
        })
    }

    pub fn manifold(&self) -> &'m M {
        self.manifold
    }

    pub fn metric(&self) -> &QuadratureMetric {
        self.manifold.metric()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[AmbientVector] {
        &self.points
    }

    pub fn basis(&self, index: usize) -> &NormalBasis {
        &self.bases[index]
    }

    /// Transport from index `i` to `i + 1`.
    pub fn step_forward(&self, i: usize, v: &AmbientVector, renorm: Renormalize) -> AmbientVector {
        apply_step(
            self.metric(),
            &self.bases[i],
            &self.bases[i + 1],
            &self.segments[i].forward,
            v,
            renorm,
        )
    }

    /// Transport from index `i + 1` back to `i`.
    pub fn step_backward(&self, i: usize, v: &AmbientVector, renorm: Renormalize) -> AmbientVector {
        apply_step(
            self.metric(),
            &self.bases[i + 1],
            &self.bases[i],
            &self.segments[i].backward,
            v,
            renorm,
        )
    }

    /// Composes steps from index `from` to index `to`, in either direction.
    pub fn transport(
        &self,
        v: &AmbientVector,
        from: usize,
        to: usize,
        renorm: Renormalize,
    ) -> Result<AmbientVector> {
        self.check_index(from)?;
        self.check_index(to)?;
        self.metric().check(v)?;
        let mut out = v.clone();
        if to >= from {
            for i in from..to {
                out = self.step_forward(i, &out, renorm);
            }
        } else {
            for i in (to..from).rev() {
                out = self.step_backward(i, &out, renorm);
            }
        }
        Ok(out)
    }

    /// Parallel frame along the whole curve starting from `f0` at index 0.
    pub fn frame_along(&self, f0: &Frame, renorm: Renormalize) -> Result<Vec<Frame>> {
        if f0.base_index != 0 {
            return Err(Error::Parameter("initial frame must be based at index 0".into()));
        }
        for v in &f0.vectors {
            self.metric().check(v)?;
        }
        let mut frames = Vec::with_capacity(self.len());
        frames.push(f0.clone());
        for i in 0..self.len() - 1 {
            let prev = &frames[i];
            let step = if renorm == Renormalize::Rescale {
                Renormalize::Off
            } else {
                renorm
            };
            let mut vectors: Vec<AmbientVector> = prev
                .vectors
                .iter()
                .map(|v| self.step_forward(i, v, step))
                .collect();
            if renorm == Renormalize::Rescale {
                vectors = self
                    .metric()
                    .gram_schmidt(&vectors)
                    .map_err(|e| e.at_step(i + 1))?;
            }
            frames.push(Frame {
                base_index: i + 1,
                vectors,
            });
        }
        Ok(frames)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::Parameter(format!(
                "curve index {i} out of range for {} points",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Transports `v` (based at `v.base_index`) along `points` to index `to`.
pub fn transport_along<M: LevelSetManifold + ?Sized>(
    m: &M,
    points: &[AmbientVector],
    v: &TangentVector,
    to: usize,
    renorm: Renormalize,
) -> Result<TangentVector> {
    let (lo, hi) = (v.base_index.min(to), v.base_index.max(to));
    if hi >= points.len() {
        return Err(Error::Parameter(format!(
            "curve index {hi} out of range for {} points",
            points.len()
        )));
    }
    let sub = CurveTransport::new(m, points[lo..=hi].to_vec()).map_err(|e| shift_segment(e, lo))?;
    let values = sub.transport(&v.values, v.base_index - lo, to - lo, renorm)?;
    Ok(TangentVector {
        base_index: to,
        values,
    })
}

fn shift_segment(e: Error, offset: usize) -> Error {
    match e {
        Error::StepTooLarge {
            cond,
            segment: Some(s),
        } => Error::StepTooLarge {
            cond,
            segment: Some(s + offset),
        },
        Error::AtStep { index, source } => Error::AtStep {
            index: index + offset,
            source,
        },
        other => other,
    }
}

/// Transports `f0` along every point of the curve.
pub fn parallel_frame<M: LevelSetManifold + ?Sized>(
    m: &M,
    points: &[AmbientVector],
    f0: &Frame,
    renorm: Renormalize,
) -> Result<Vec<Frame>> {
    CurveTransport::new(m, points.to_vec())?.frame_along(f0, renorm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::tangent_project;
    use crate::shape::{circle_theta, ShapeManifold};
    use crate::sphere::{from_ambient, to_ambient, transport_closed_form, SphereManifold};
    use nalgebra::Vector3;
    use std::f64::consts::FRAC_PI_2;

    fn equator(steps: usize, total: f64) -> Vec<AmbientVector> {
        (0..=steps)
            .map(|i| {
                let a = total * i as f64 / steps as f64;
                DVector::from_vec(vec![a.cos(), a.sin(), 0.0])
            })
            .collect()
    }

    #[test]
    fn identity_when_points_coincide() {
        let m = ShapeManifold::new(32);
        let p = circle_theta(32);
        let v = tangent_project(&m, &p, &DVector::from_fn(32, |j, _| ((j * 7 % 5) as f64) - 2.0)).unwrap();
        for r in [Renormalize::Off, Renormalize::Isometric, Renormalize::Rescale] {
            let w = transport_step(&m, &p, &p, &v, r).unwrap();
            assert!((w - &v).amax() < 1e-14);
        }
    }

    #[test]
    fn binormal_is_parallel_on_sphere() {
        let m = SphereManifold::new();
        let p = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let q = DVector::from_vec(vec![0.01f64.cos(), 0.01f64.sin(), 0.0]);
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let w = transport_step(&m, &p, &q, &v, Renormalize::Off).unwrap();
        assert!((w - v).amax() < 1e-8);
    }

    #[test]
    fn raw_scheme_grows_velocity_by_secant_factor() {
        // along a great circle the raw step keeps the exact direction and
        // multiplies the in-plane component by sec(h)
        let steps = 1000;
        let h = FRAC_PI_2 / steps as f64;
        let m = SphereManifold::new();
        let curve = CurveTransport::new(&m, equator(steps, FRAC_PI_2)).unwrap();
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let w = curve.transport(&v, 0, steps, Renormalize::Off).unwrap();
        let growth = (1.0 / h.cos()).powi(steps as i32);
        let expected = DVector::from_vec(vec![-growth, 0.0, 0.0]);
        assert!((w - expected).amax() < 1e-12);
    }

    #[test]
    fn isometric_step_matches_closed_form_on_sphere() {
        let steps = 1000;
        let m = SphereManifold::new();
        let curve = CurveTransport::new(&m, equator(steps, FRAC_PI_2)).unwrap();
        let p = Vector3::x();
        let dir = Vector3::y();
        for w in [Vector3::new(0.0, 1.0, 0.0), Vector3::new(0.0, 0.6, -0.8)] {
            let exact = transport_closed_form(&p, &dir, &w, FRAC_PI_2).unwrap();
            let got = from_ambient(&curve.transport(&to_ambient(&w), 0, steps, Renormalize::Isometric).unwrap());
            assert!((got - exact).amax() < 1e-4);
            let rescaled = from_ambient(&curve.transport(&to_ambient(&w), 0, steps, Renormalize::Rescale).unwrap());
            assert!((rescaled.norm() - w.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn output_is_tangent_at_destination() {
        let n = 64;
        let m = ShapeManifold::new(n);
        let p = circle_theta(n);
        let q = crate::shape::Shape::project(
            p.map_with_location(|j, _, x| x + 0.05 * (2.0 * std::f64::consts::PI * 2.0 * j as f64 / n as f64).sin()),
            Default::default(),
        )
        .unwrap()
        .into_theta();
        let v = tangent_project(&m, &p, &DVector::from_fn(n, |j, _| ((j * 13) % 7) as f64 - 3.0)).unwrap();
        let bq = NormalBasis::at(&m, &q).unwrap();
        for r in [Renormalize::Off, Renormalize::Rescale, Renormalize::Isometric] {
            let w = transport_step(&m, &p, &q, &v, r).unwrap();
            assert!(bq.coefficients(m.metric(), &w).amax() <= 1e-10, "{r:?}");
        }
    }

    #[test]
    fn step_too_large_is_rejected() {
        let m = SphereManifold::new();
        let p = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let q = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        assert!(matches!(
            transport_step(&m, &p, &q, &v, Renormalize::Off),
            Err(Error::StepTooLarge { .. })
        ));
        let pts = vec![p.clone(), DVector::from_vec(vec![0.3f64.cos(), 0.0, 0.3f64.sin()]), q];
        match CurveTransport::new(&m, pts) {
            Err(Error::StepTooLarge { segment, .. }) => assert_eq!(segment, Some(1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transport_along_validates_indices() {
        let m = SphereManifold::new();
        let pts = equator(4, 0.1);
        let v = TangentVector {
            base_index: 0,
            values: DVector::from_vec(vec![0.0, 0.0, 1.0]),
        };
        assert!(transport_along(&m, &pts, &v, 7, Renormalize::Off).is_err());
        let same = transport_along(&m, &pts, &v, 0, Renormalize::Off).unwrap();
        assert_eq!(same.values, v.values);
    }
}
