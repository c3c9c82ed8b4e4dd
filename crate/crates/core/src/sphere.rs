//! The unit 2-sphere as a level-set manifold, with closed-form great circles
//! and parallel transport. Used to cross-check the discrete transport.

use nalgebra::{DVector, Vector3};

use crate::error::{Error, Result};
use crate::manifold::LevelSetManifold;
use crate::metric::{AmbientVector, QuadratureMetric};

/// `{x ∈ R³ : ‖x‖² = 1}` with the Euclidean metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereManifold {
    metric: QuadratureMetric,
}

impl SphereManifold {
    pub fn new() -> Self {
        Self {
            metric: QuadratureMetric::euclidean(3),
        }
    }
}

impl Default for SphereManifold {
    fn default() -> Self {
        Self::new()
    }
}

impl LevelSetManifold for SphereManifold {
    fn ambient_dim(&self) -> usize {
        3
    }

    fn codim(&self) -> usize {
        1
    }

    fn metric(&self) -> &QuadratureMetric {
        &self.metric
    }

    fn constraint_target(&self) -> DVector<f64> {
        DVector::from_element(1, 1.0)
    }

    fn constraint_value(&self, p: &AmbientVector) -> DVector<f64> {
        DVector::from_element(1, p.norm_squared())
    }

    fn constraint_differential(&self, p: &AmbientVector, f: &AmbientVector) -> DVector<f64> {
        DVector::from_element(1, 2.0 * p.dot(f))
    }

    fn normal_generators(&self, p: &AmbientVector) -> Vec<AmbientVector> {
        vec![p.clone()]
    }
}

fn check_frame(p: &Vector3<f64>, v: &Vector3<f64>) -> Result<()> {
    if (p.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter("sphere point must have unit norm".into()));
    }
    if p.dot(v).abs() > 1e-10 || (v.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Parameter(
            "great-circle direction must be a unit tangent at the base point".into(),
        ));
    }
    Ok(())
}

/// Points `cos(φ) p + sin(φ) v` for each angle φ.
pub fn great_circle(p: &Vector3<f64>, v: &Vector3<f64>, angles: &[f64]) -> Result<Vec<Vector3<f64>>> {
    check_frame(p, v)?;
    Ok(angles.iter().map(|a| a.cos() * p + a.sin() * v).collect())
}

/// Parallel transport of `w ∈ T_p S²` along the great circle through `p`
/// with direction `v`, by `angle`.
///
/// The binormal `p × v` is parallel; the velocity rotates in the plane of
/// the circle.
pub fn transport_closed_form(
    p: &Vector3<f64>,
    v: &Vector3<f64>,
    w: &Vector3<f64>,
    angle: f64,
) -> Result<Vector3<f64>> {
    check_frame(p, v)?;
    if p.dot(w).abs() > 1e-10 * w.norm().max(1.0) {
        return Err(Error::Parameter("transported vector must be tangent at p".into()));
    }
    let binormal = p.cross(v);
    let a = w.dot(v);
    let b = w.dot(&binormal);
    Ok(a * (-angle.sin() * p + angle.cos() * v) + b * binormal)
}

pub fn to_ambient(x: &Vector3<f64>) -> AmbientVector {
    DVector::from_column_slice(x.as_slice())
}

pub fn from_ambient(x: &AmbientVector) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}
