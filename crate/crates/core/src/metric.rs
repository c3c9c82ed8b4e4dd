//! Quadrature-weighted inner products on sampled functions.
//!
//! Ambient vectors are samples `f(s_j)` at `s_j = 2πj/N`. The L² pairing is
//! discretized as `Σ_j w_j f_j g_j`; for the shape manifold the weights are
//! uniform `2π/N`, which is the trapezoid rule on a periodic grid.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Samples of a function on the uniform periodic grid (or a point in R^n).
pub type AmbientVector = DVector<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMetric {
    weights: DVector<f64>,
    uniform: Option<f64>,
}

impl QuadratureMetric {
    /// Uniform weights `2π/n`, so that `⟨1, 1⟩ = 2π`.
    pub fn uniform_circle(n: usize) -> Self {
        Self::uniform(n, 2.0 * std::f64::consts::PI / n as f64)
    }

    /// Plain Euclidean inner product on R^n.
    pub fn euclidean(n: usize) -> Self {
        Self::uniform(n, 1.0)
    }

    pub fn uniform(n: usize, weight: f64) -> Self {
        assert!(weight > 0.0 && weight.is_finite(), "weights must be positive");
        Self {
            weights: DVector::from_element(n, weight),
            uniform: Some(weight),
        }
    }

    pub fn from_weights(weights: DVector<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::Parameter("quadrature weights must be positive".into()));
        }
        Ok(Self {
            weights,
            uniform: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// `Σ_j w_j f_j g_j`, checking lengths.
    pub fn inner(&self, f: &AmbientVector, g: &AmbientVector) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        Ok(self.dot(f, g))
    }

    pub fn check(&self, f: &AmbientVector) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: f.len(),
            });
        }
        Ok(())
    }

    /// Unchecked inner product for hot loops where lengths are already known.
    #[inline]
    pub(crate) fn dot(&self, f: &AmbientVector, g: &AmbientVector) -> f64 {
        debug_assert_eq!(f.len(), g.len());
        match self.uniform {
            Some(w) => w * f.dot(g),
            None => f
                .iter()
                .zip(g.iter())
                .zip(self.weights.iter())
                .map(|((a, b), w)| w * a * b)
                .sum(),
        }
    }

    #[inline]
    pub fn norm_squared(&self, f: &AmbientVector) -> f64 {
        self.dot(f, f)
    }

    #[inline]
    pub fn norm(&self, f: &AmbientVector) -> f64 {
        self.dot(f, f).max(0.0).sqrt()
    }

    /// Gram matrix `G_ij = ⟨v_i, v_j⟩`.
    pub fn gram(&self, vs: &[AmbientVector]) -> nalgebra::DMatrix<f64> {
        let n = vs.len();
        let mut g = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.dot(&vs[i], &vs[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Classical Gram–Schmidt with one re-orthogonalization pass.
    ///
    /// Order is preserved: output `i` spans the same flag as inputs `0..=i`.
    /// A vector whose deflated norm drops below `1e-12 · max(1, ‖v‖)` is
    /// reported as [`Error::RankDeficient`] with its index.
    pub fn gram_schmidt(&self, vs: &[AmbientVector]) -> Result<Vec<AmbientVector>> {
        if vs.is_empty() {
            return Err(Error::Parameter("gram_schmidt needs at least one vector".into()));
        }
        let mut out: Vec<AmbientVector> = Vec::with_capacity(vs.len());
        for (index, v) in vs.iter().enumerate() {
            self.check(v)?;
            let scale = self.norm(v).max(1.0);
            let mut u = v.clone();
            for _pass in 0..2 {
                let coeffs: Vec<f64> = out.iter().map(|b| self.dot(b, &u)).collect();
                for (b, c) in out.iter().zip(coeffs) {
                    u.axpy(-c, b, 1.0);
                }
            }
            let norm = self.norm(&u);
            if !(norm >= 1e-12 * scale) {
                return Err(Error::RankDeficient { index });
            }
            u /= norm;
            out.push(u);
        }
        Ok(out)
    }
}
