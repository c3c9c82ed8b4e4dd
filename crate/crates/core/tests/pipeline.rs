//! End-to-end examples through the library API.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use moving_frames::embedding::RoundtripRow;
use moving_frames::shape::circle_theta;
use moving_frames::sphere::{from_ambient, great_circle, to_ambient, transport_closed_form};
use moving_frames::synth::{circle_modes, ellipse_morph, fourier_wobble, SynthParams};
use moving_frames::*;

/// Orthogonal Procrustes: the rotation `R` minimizing `‖a R − b‖`.
fn procrustes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = (a.transpose() * b).svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

#[test]
fn recovers_known_development_up_to_rotation() {
    let n = 128;
    let m = ShapeManifold::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let steps = 25;
    let mut z = DMatrix::zeros(steps, 3);
    for t in 1..steps {
        let u = t as f64 / steps as f64;
        z[(t, 0)] = 0.3 * (2.0 * PI * u).sin();
        z[(t, 1)] = 0.2 * (1.0 - (PI * u).cos());
        z[(t, 2)] = z[(t - 1, 2)] + 0.01 * rng.gen_range(-1.0..1.0);
    }
    let truth = Embedding {
        x0: circle_theta(n),
        frame0: Frame {
            base_index: 0,
            vectors: circle_modes(n, 3),
        },
        z: z.clone(),
        spectrum: Spectrum {
            eigenvalues: vec![],
            total: 0.0,
        },
        tangent_energy: 0.0,
        options: EmbedOptions::default(),
    };
    let pts = reconstruct(&m, &truth).unwrap();
    for method in [PcaMethod::Exact, EmbedOptions::default().method] {
        let e = embed(&m, &pts, 3, EmbedOptions { method, ..Default::default() }).unwrap();
        let r = procrustes(&e.z, &z);
        let gap = (&e.z * r - &z).amax();
        assert!(gap <= 1e-3, "{}: {gap:e}", method.name());
    }
}

#[test]
fn sphere_transport_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = Vector3::new(0.0, 0.0, 1.0);
    let v = Vector3::new(1.0, 0.0, 0.0);
    let w = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
    let phi = 0.7;
    let angles: Vec<f64> = (0..=1000).map(|i| phi * i as f64 / 1000.0).collect();
    let pts: Vec<AmbientVector> = great_circle(&p, &v, &angles).unwrap().iter().map(to_ambient).collect();
    let m = SphereManifold::new();
    let start = TangentVector {
        base_index: 0,
        values: to_ambient(&w),
    };
    let exact = transport_closed_form(&p, &v, &w, phi).unwrap();
    let iso = transport_along(&m, &pts, &start, 1000, Renormalize::Isometric).unwrap();
    assert!((from_ambient(&iso.values) - exact).amax() <= 1e-4);

    // the uncorrected step stretches the in-plane part by sec(h) per step
    let raw = transport_along(&m, &pts, &start, 1000, Renormalize::Off).unwrap();
    let h = phi / 1000.0;
    let predicted = w.x.abs() * ((1.0 / h.cos()).powi(1000) - 1.0);
    let err = (from_ambient(&raw.values) - exact).norm();
    assert!((err - predicted).abs() <= 1e-6 * predicted, "{err:e} vs {predicted:e}");
}

#[test]
fn two_point_curve_develops_to_its_step() {
    let curve = fourier_wobble(&SynthParams {
        frames: 2,
        substeps: 16,
        ..Default::default()
    })
    .unwrap();
    let m = curve.manifold();
    let pts = curve.points();
    let e = embed(&m, &pts, 1, EmbedOptions::default()).unwrap();
    let speed = m.metric().norm(&curve_tangents(&m, &pts).unwrap()[0].values);
    assert!((e.z[(1, 0)].abs() - speed).abs() <= 1e-6 * speed);
    assert!((e.captured_energy() - 1.0).abs() <= 1e-12);
}

#[test]
fn streaming_and_exact_agree() {
    let curve = fourier_wobble(&SynthParams {
        frames: 40,
        modes: 4,
        ..Default::default()
    })
    .unwrap();
    let m = curve.manifold();
    let pts = curve.points();
    let a = embed(&m, &pts, 4, EmbedOptions::default()).unwrap();
    let b = embed(
        &m,
        &pts,
        4,
        EmbedOptions {
            method: PcaMethod::Exact,
            ..Default::default()
        },
    )
    .unwrap();
    for i in 0..4 {
        assert!((a.spectrum.eigenvalues[i] - b.spectrum.eigenvalues[i]).abs() <= 1e-10 * b.spectrum.eigenvalues[0]);
    }
    assert!((&a.z - &b.z).amax() <= 1e-8);
}

#[test]
fn ellipse_roundtrip_contours_are_close() {
    let curve = ellipse_morph(&SynthParams {
        frames: 20,
        amplitude: 0.6,
        ..Default::default()
    })
    .unwrap();
    let m = curve.manifold();
    let pts = curve.points();
    let report = roundtrip_report(&m, &pts, &[1, 3], EmbedOptions::default()).unwrap();
    let worst = |row: &RoundtripRow| {
        row.reconstruction
            .iter()
            .zip(&pts)
            .map(|(a, b)| to_contour(a, 1.0).hausdorff(&to_contour(b, 1.0)))
            .fold(0.0, f64::max)
    };
    let (h1, h3) = (worst(&report.rows[0]), worst(&report.rows[1]));
    assert!(h3 <= h1);
    // a unit-perimeter outline: errors well below a percent of the size
    assert!(h3 <= 1e-3, "{h3:e}");
}

#[test]
fn polygon_survives_contour_conversion() {
    let pts: Vec<[f64; 2]> = (0..300)
        .map(|j| {
            let u = 2.0 * PI * j as f64 / 300.0;
            let r = 1.0 + 0.1 * (3.0 * u).cos();
            [2.0 + r * u.cos(), -1.0 + 0.7 * r * u.sin()]
        })
        .collect();
    let c = Contour::new(pts).unwrap();
    let conv = from_contour(&c, 256, Default::default()).unwrap();
    assert!(!conv.reversed);
    let back = to_contour(conv.shape.theta(), c.perimeter() / (2.0 * PI));
    // both start at the first vertex and are uniform in arc length, so
    // samples correspond; remove translation and the normalizing rotation
    let centred = |pts: &[[f64; 2]]| {
        let n = pts.len() as f64;
        let (cx, cy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0] / n, b + p[1] / n));
        pts.iter().map(|p| [p[0] - cx, p[1] - cy]).collect::<Vec<_>>()
    };
    let a = centred(&c.resample(256).unwrap());
    let b = centred(back.points());
    let (mut dot, mut cross) = (0.0, 0.0);
    for (p, q) in a.iter().zip(&b) {
        dot += p[0] * q[0] + p[1] * q[1];
        cross += q[0] * p[1] - q[1] * p[0];
    }
    let (sin, cos) = cross.atan2(dot).sin_cos();
    let rotated: Vec<[f64; 2]> = b.iter().map(|q| [cos * q[0] - sin * q[1], sin * q[0] + cos * q[1]]).collect();
    let h = Contour::new(a).unwrap().hausdorff(&Contour::new(rotated).unwrap());
    assert!(h <= 1e-2 * c.diameter(), "{h}");

    let rev = Contour::new(c.points().iter().rev().copied().collect()).unwrap();
    let conv_rev = from_contour(&rev, 256, Default::default()).unwrap();
    assert!(conv_rev.reversed);
    assert!((conv_rev.shape.theta() - conv.shape.theta()).amax() <= 0.1);
}

#[test]
fn unreachable_step_is_reported_with_its_index() {
    // a sphere step with tangent length above 1 has no retraction along the
    // start normal
    let m = SphereManifold::new();
    let mut z = DMatrix::zeros(4, 1);
    z[(1, 0)] = 0.1;
    z[(2, 0)] = 0.2;
    z[(3, 0)] = 1.7;
    let e = Embedding {
        x0: to_ambient(&Vector3::z()),
        frame0: Frame {
            base_index: 0,
            vectors: vec![to_ambient(&Vector3::x())],
        },
        z,
        spectrum: Spectrum {
            eigenvalues: vec![],
            total: 0.0,
        },
        tangent_energy: 0.0,
        options: EmbedOptions::default(),
    };
    let err = reconstruct(&m, &e).unwrap_err();
    // indexed by the point that could not be produced
    assert!(err.to_string().starts_with("step 3:"), "{err}");
}
