//! Level-set manifolds `M = c⁻¹(target)` embedded in a weighted inner-product
//! space, with tangent projection and Newton projection onto `M`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::metric::{AmbientVector, QuadratureMetric};

/// A finite-codimension constraint set with explicit normal generators.
///
/// `normal_generators(p)` must span the orthogonal complement of `T_p M`
/// under [`metric`](Self::metric), and `constraint_differential(p, f)` must be
/// the directional derivative of `constraint_value` at `p` along `f`.
pub trait LevelSetManifold {
    fn ambient_dim(&self) -> usize;
    fn codim(&self) -> usize;
    fn metric(&self) -> &QuadratureMetric;
    fn constraint_target(&self) -> DVector<f64>;
    fn constraint_value(&self, p: &AmbientVector) -> DVector<f64>;
    fn constraint_differential(&self, p: &AmbientVector, f: &AmbientVector) -> DVector<f64>;
    fn normal_generators(&self, p: &AmbientVector) -> Vec<AmbientVector>;

    /// `‖c(p) − target‖∞`.
    fn residual(&self, p: &AmbientVector) -> f64 {
        (self.constraint_value(p) - self.constraint_target()).amax()
    }
}

/// Orthonormal basis of the normal space at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalBasis {
    vectors: Vec<AmbientVector>,
}

impl NormalBasis {
    pub fn at<M: LevelSetManifold + ?Sized>(m: &M, p: &AmbientVector) -> Result<Self> {
        m.metric().check(p)?;
        let vectors = m.metric().gram_schmidt(&m.normal_generators(p))?;
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[AmbientVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `(⟨v, B_1⟩, …, ⟨v, B_k⟩)`.
    pub fn coefficients(&self, metric: &QuadratureMetric, v: &AmbientVector) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.vectors.iter().map(|b| metric.dot(b, v)))
    }

    /// `v += Σ_j c_j B_j`.
    pub fn add_combination(&self, v: &mut AmbientVector, c: &DVector<f64>, scale: f64) {
        for (b, cj) in self.vectors.iter().zip(c.iter()) {
            v.axpy(scale * cj, b, 1.0);
        }
    }

    /// `v − Σ_j ⟨v, B_j⟩ B_j`.
    pub fn project_out(&self, metric: &QuadratureMetric, v: &AmbientVector) -> AmbientVector {
        let c = self.coefficients(metric, v);
        let mut out = v.clone();
        self.add_combination(&mut out, &c, -1.0);
        out
    }

    /// Cross Gram matrix `G_jk = ⟨self_k, other_j⟩`.
    pub fn cross(&self, metric: &QuadratureMetric, other: &NormalBasis) -> DMatrix<f64> {
        DMatrix::from_fn(other.len(), self.len(), |j, k| {
            metric.dot(&self.vectors[k], &other.vectors[j])
        })
    }
}

/// Orthogonal projection of an ambient vector onto `T_p M`.
pub fn tangent_project<M: LevelSetManifold + ?Sized>(
    m: &M,
    p: &AmbientVector,
    v: &AmbientVector,
) -> Result<AmbientVector> {
    m.metric().check(v)?;
    let basis = NormalBasis::at(m, p)?;
    Ok(basis.project_out(m.metric(), v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

impl ProjectionOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Parameter(
                "projection needs tol > 0 and max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a Newton projection.
#[derive(Debug, Clone)]
pub struct Projection {
    pub point: AmbientVector,
    pub iterations: usize,
    /// `‖c(q) − target‖∞` before each iteration and after the last one.
    pub residuals: Vec<f64>,
}

/// Newton projection onto `M`, each update in the span of the normal basis
/// at the current iterate.
///
/// Each iteration solves the k×k system `J c = target − c(q)` with
/// `J_ij = dc(q)[B_j]_i` and moves `q ← q + Σ c_j B_j`. Steps that would
/// increase the residual are halved (up to 20 times); if no decrease is
/// possible the call fails with [`Error::NonConvergence`].
pub fn project_to_manifold<M: LevelSetManifold + ?Sized>(
    m: &M,
    p: &AmbientVector,
    opts: ProjectionOptions,
) -> Result<Projection> {
    newton(m, p, None, opts)
}

/// Newton projection with the search directions frozen to `normals`.
///
/// Solves `c(p + Σ c_j B_j) = target` for the coefficients `c`. When
/// `normals` is the normal basis at a point `x` and `p = x + u` with `u`
/// tangent at `x`, the result is the point of `M` whose displacement from `x`
/// has tangent component exactly `u`.
pub fn retract_along<M: LevelSetManifold + ?Sized>(
    m: &M,
    normals: &NormalBasis,
    p: &AmbientVector,
    opts: ProjectionOptions,
) -> Result<Projection> {
    newton(m, p, Some(normals), opts)
}

fn newton<M: LevelSetManifold + ?Sized>(
    m: &M,
    p: &AmbientVector,
    fixed: Option<&NormalBasis>,
    opts: ProjectionOptions,
) -> Result<Projection> {
    opts.validate()?;
    m.metric().check(p)?;
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("non-finite point".into()));
    }
    let target = m.constraint_target();
    let mut q = p.clone();
    let mut r = &target - m.constraint_value(&q);
    let mut res = r.amax();
    let mut residuals = vec![res];
    let mut iterations = 0;
    while res > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let current;
        let basis = match fixed {
            Some(b) => b,
            None => {
                current = NormalBasis::at(m, &q)?;
                &current
            }
        };
        let k = basis.len();
        let mut jac = DMatrix::zeros(k, k);
        for (j, b) in basis.vectors().iter().enumerate() {
            jac.set_column(j, &m.constraint_differential(&q, b));
        }
        let lu = jac.clone().lu();
        let step = lu.solve(&r).ok_or(Error::SingularJacobian)?;
        if step.iter().any(|x| !x.is_finite()) || condition_number(&jac) > 1e14 {
            return Err(Error::SingularJacobian);
        }

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=20 {
            let mut trial = q.clone();
            basis.add_combination(&mut trial, &step, scale);
            let tr = &target - m.constraint_value(&trial);
            let tres = tr.amax();
            if tres < res {
                accepted = Some((trial, tr, tres));
                break;
            }
            scale *= 0.5;
        }
        match accepted {
            Some((trial, tr, tres)) => {
                q = trial;
                r = tr;
                res = tres;
                residuals.push(res);
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: res,
                })
            }
        }
    }
    Ok(Projection {
        point: q,
        iterations,
        residuals,
    })
}

/// 2-norm condition number of a small dense matrix.
pub(crate) fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
