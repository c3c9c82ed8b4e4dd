//! Seeded synthetic sequences for tests, demos and benchmarks.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{reconstruct, EmbedOptions, Embedding, Spectrum};
use crate::error::{Error, Result};
use crate::metric::AmbientVector;
use crate::shape::{circle_theta, from_contour, grid, Contour, ShapeCurve, ShapeManifold, MIN_SAMPLES};
use crate::sphere::{great_circle, to_ambient};
use crate::transport::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    EllipseMorph,
    FourierWobble,
    SphereGeodesic,
}

impl SynthKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SynthKind::EllipseMorph => "ellipse-morph",
            SynthKind::FourierWobble => "fourier-wobble",
            SynthKind::SphereGeodesic => "sphere-geodesic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ellipse-morph" => Some(SynthKind::EllipseMorph),
            "fourier-wobble" => Some(SynthKind::FourierWobble),
            "sphere-geodesic" => Some(SynthKind::SphereGeodesic),
            _ => None,
        }
    }
}

/// Parameters shared by the generators. Fields a generator does not use are
/// ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    pub frames: usize,
    pub samples: usize,
    pub seed: u64,
    /// Number of oscillating modes (fourier-wobble).
    pub modes: usize,
    /// Largest per-frame step: tangent norm for fourier-wobble, arc angle
    /// for sphere-geodesic, final aspect-ratio excess for ellipse-morph.
    pub amplitude: f64,
    /// Development substeps per frame (fourier-wobble).
    pub substeps: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            frames: 30,
            samples: 128,
            seed: 1,
            modes: 3,
            amplitude: 0.04,
            substeps: 8,
        }
    }
}

impl SynthParams {
    fn check(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(Error::Parameter(format!("frames must be at least 2, got {}", self.frames)));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Parameter("amplitude must be positive".into()));
        }
        Ok(())
    }

    fn check_shape(&self) -> Result<()> {
        self.check()?;
        if self.samples < MIN_SAMPLES {
            return Err(Error::Parameter(format!(
                "samples must be at least {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        Ok(())
    }
}

/// Unit tangent modes at the circle: cos 2s, sin 2s, cos 3s, sin 3s, …
pub fn circle_modes(n: usize, count: usize) -> Vec<AmbientVector> {
    (0..count)
        .map(|k| {
            let freq = (2 + k / 2) as f64;
            let scale = 1.0 / PI.sqrt();
            if k % 2 == 0 {
                DVector::from_iterator(n, grid(n).map(|s| scale * (freq * s).cos()))
            } else {
                DVector::from_iterator(n, grid(n).map(|s| scale * (freq * s).sin()))
            }
        })
        .collect()
}

/// Seeded sinusoidal coordinates `z_k(τ) = A_k sin(ω_k τ + φ_k)`, shifted to
/// start at zero and scaled so the largest whole-frame step has norm
/// `amplitude`. Returned at `substeps` points per frame.
fn wobble_coordinates(p: &SynthParams) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let waves: Vec<(f64, f64, f64)> = (0..p.modes)
        .map(|_| {
            (
                rng.gen_range(0.5..1.0),
                rng.gen_range(0.15..0.35),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let eval = |tau: f64| -> Vec<f64> {
        waves
            .iter()
            .map(|(a, w, ph)| a * ((w * tau + ph).sin() - ph.sin()))
            .collect()
    };
    let biggest = (0..p.frames - 1)
        .map(|t| {
            let (a, b) = (eval(t as f64), eval(t as f64 + 1.0));
            a.iter().zip(&b).map(|(x, y)| (y - x).powi(2)).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);
    let scale = p.amplitude / biggest;
    let rows = (p.frames - 1) * p.substeps + 1;
    DMatrix::from_fn(rows, p.modes, |r, k| scale * eval(r as f64 / p.substeps as f64)[k])
}

/// Circle plus `modes` seeded low-order oscillations.
///
/// The sequence is developed from seeded coordinates against a parallel frame
/// spanned by the lowest free Fourier modes at the circle, on a grid
/// `substeps` times finer than the output frames. The pulled-back
/// velocities therefore span `modes` directions up to discretization error.
pub fn fourier_wobble(p: &SynthParams) -> Result<ShapeCurve> {
    p.check_shape()?;
    if p.modes == 0 || p.modes > p.samples / 4 {
        return Err(Error::Parameter(format!(
            "modes must be in 1..={}, got {}",
            p.samples / 4,
            p.modes
        )));
    }
    if p.substeps == 0 {
        return Err(Error::Parameter("substeps must be at least 1".into()));
    }
    let m = ShapeManifold::new(p.samples);
    let e = Embedding {
        x0: circle_theta(p.samples),
        frame0: Frame {
            base_index: 0,
            vectors: circle_modes(p.samples, p.modes),
        },
        z: wobble_coordinates(p),
        spectrum: Spectrum {
            eigenvalues: vec![],
            total: 0.0,
        },
        tangent_energy: 0.0,
        options: EmbedOptions::default(),
    };
    let fine = reconstruct(&m, &e)?;
    let points = fine.into_iter().step_by(p.substeps).collect();
    ShapeCurve::from_points(points, 1.0)
}

/// Ellipses whose aspect ratio grows smoothly from 1 to `1 + amplitude`, at
/// a seeded fixed orientation and constant area.
pub fn ellipse_morph(p: &SynthParams) -> Result<ShapeCurve> {
    p.check_shape()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let psi: f64 = rng.gen_range(0.0..PI);
    let (c, s) = (psi.cos(), psi.sin());
    let dense = 8 * p.samples;
    let shapes = (0..p.frames)
        .map(|t| {
            let u = t as f64 / (p.frames - 1) as f64;
            let ratio = 1.0 + p.amplitude * 0.5 * (1.0 - (PI * u).cos());
            let (a, b) = (ratio.sqrt(), 1.0 / ratio.sqrt());
            let pts = (0..dense)
                .map(|j| {
                    let w = 2.0 * PI * j as f64 / dense as f64;
                    let (x, y) = (a * w.cos(), b * w.sin());
                    [c * x - s * y, s * x + c * y]
                })
                .collect();
            Ok(from_contour(&Contour::new(pts)?, p.samples, Default::default())?.shape)
        })
        .collect::<Result<Vec<_>>>()?;
    ShapeCurve::new(shapes, 1.0)
}

/// Equally spaced points on a seeded great circle, `amplitude` radians apart.
pub fn sphere_geodesic(p: &SynthParams) -> Result<Vec<AmbientVector>> {
    p.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut unit = || -> Vector3<f64> { loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    } };
    let base = unit();
    let raw = unit();
    let dir = (raw - base * base.dot(&raw)).normalize();
    let angles: Vec<f64> = (0..p.frames).map(|t| p.amplitude * t as f64).collect();
    Ok(great_circle(&base, &dir, &angles)?.iter().map(to_ambient).collect())
}
