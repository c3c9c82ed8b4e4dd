//! Invariants checked over randomly generated curves.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use moving_frames::embedding::full_spectrum;
use moving_frames::shape::phi_residual;
use moving_frames::synth::{circle_modes, fourier_wobble, sphere_geodesic, SynthParams};
use moving_frames::*;

fn wobble(seed: u64, frames: usize, samples: usize, modes: usize, amplitude: f64) -> (ShapeManifold, Vec<AmbientVector>) {
    let c = fourier_wobble(&SynthParams {
        frames,
        samples,
        modes,
        amplitude,
        seed,
        substeps: 4,
    })
    .unwrap();
    (c.manifold(), c.points())
}

fn random_tangents<M: LevelSetManifold>(m: &M, p: &AmbientVector, count: usize, seed: u64) -> Vec<AmbientVector> {
    let basis = NormalBasis::at(m, p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<AmbientVector> = (0..count)
        .map(|_| {
            let v = DVector::from_fn(m.ambient_dim(), |_, _| rng.gen_range(-1.0..1.0));
            basis.project_out(m.metric(), &v)
        })
        .collect();
    m.metric().gram_schmidt(&raw).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transported_vectors_stay_tangent(seed in 0u64..1000, amp in 0.01f64..0.08, renorm in 0usize..3) {
        let (m, pts) = wobble(seed, 12, 64, 3, amp);
        let renorm = [Renormalize::Off, Renormalize::Rescale, Renormalize::Isometric][renorm];
        let f0 = Frame { base_index: 0, vectors: random_tangents(&m, &pts[0], 4, seed) };
        let frames = parallel_frame(&m, &pts, &f0, renorm).unwrap();
        for (f, p) in frames.iter().zip(&pts) {
            let basis = NormalBasis::at(&m, p).unwrap();
            for v in &f.vectors {
                prop_assert!(basis.coefficients(m.metric(), v).amax() <= 1e-12);
            }
        }
    }

    #[test]
    fn isometric_transport_preserves_inner_products(seed in 0u64..1000, amp in 0.01f64..0.08) {
        let (m, pts) = wobble(seed, 15, 64, 4, amp);
        // deliberately non-orthonormal starting vectors
        let vs: Vec<AmbientVector> = random_tangents(&m, &pts[0], 3, seed)
            .iter()
            .enumerate()
            .map(|(i, v)| v * (1.0 + i as f64))
            .collect();
        let f0 = Frame { base_index: 0, vectors: vec![vs[0].clone(), &vs[1] + &vs[0], vs[2].clone()] };
        let g0 = m.metric().gram(&f0.vectors);
        for f in parallel_frame(&m, &pts, &f0, Renormalize::Isometric).unwrap() {
            prop_assert!((m.metric().gram(&f.vectors) - &g0).amax() <= 1e-12 * g0.amax());
        }
    }

    #[test]
    fn forward_then_backward_isometric_is_identity(seed in 0u64..1000, amp in 0.01f64..0.08) {
        let (m, pts) = wobble(seed, 10, 64, 3, amp);
        let v = random_tangents(&m, &pts[0], 1, seed).remove(0);
        let there = transport_along(&m, &pts, &TangentVector { base_index: 0, values: v.clone() }, 9, Renormalize::Isometric).unwrap();
        let back = transport_along(&m, &pts, &there, 0, Renormalize::Isometric).unwrap();
        // with the polar correction, stepping back undoes the forward step
        prop_assert!(m.metric().norm(&(&back.values - &v)) <= 1e-11);
    }

    #[test]
    fn forward_then_backward_raw_mismatch_is_second_order(seed in 0u64..1000, amp in 0.01f64..0.08) {
        let (m, pts) = wobble(seed, 10, 64, 3, amp);
        let v = random_tangents(&m, &pts[0], 1, seed).remove(0);
        let there = transport_along(&m, &pts, &TangentVector { base_index: 0, values: v.clone() }, 9, Renormalize::Off).unwrap();
        let back = transport_along(&m, &pts, &there, 0, Renormalize::Off).unwrap();
        let mismatch = m.metric().norm(&(&back.values - &v));
        // backward is the swapped step, not the inverse: the gap is real but
        // shrinks like the sum of squared steps
        prop_assert!(mismatch > 1e-9);
        prop_assert!(mismatch <= 0.1 * 9.0 * amp * amp, "{mismatch:e}");
    }

    #[test]
    fn development_is_isometric(seed in 0u64..1000, amp in 0.01f64..0.06, dim in 1usize..4) {
        let (m, pts) = wobble(seed, 14, 64, 3, amp);
        let e = embed(&m, &pts, dim, EmbedOptions::default()).unwrap();
        let dz = e.increments();
        let tangents = curve_tangents(&m, &pts).unwrap();
        for (t, v) in tangents.iter().enumerate() {
            let speed2 = m.metric().norm_squared(&v.values);
            let inc2 = dz.row(t).norm_squared();
            prop_assert!(inc2 <= speed2 * (1.0 + 1e-12) + 1e-300);
            if dim == 3 {
                prop_assert!((inc2 - speed2).abs() <= 1e-6 * speed2);
            }
        }
    }

    #[test]
    fn spectrum_ignores_bookkeeping_basis(seed in 0u64..1000, amp in 0.01f64..0.06) {
        let (m, pts) = wobble(seed, 10, 32, 3, amp);
        let full = m.ambient_dim() - m.codim();
        let a = TangentSet::from_bookkeeping_frame(&m, &pts, &random_tangents(&m, &pts[0], full, seed), Renormalize::Isometric).unwrap();
        let b = TangentSet::from_bookkeeping_frame(&m, &pts, &random_tangents(&m, &pts[0], full, seed + 7), Renormalize::Isometric).unwrap();
        let (sa, sb) = (full_spectrum(&a, m.metric(), false), full_spectrum(&b, m.metric(), false));
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn reconstruction_stays_on_manifold(seed in 0u64..1000, steps in 2usize..20, scale in 0.001f64..0.08) {
        let n = 64;
        let m = ShapeManifold::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = DMatrix::zeros(steps, 4);
        for t in 1..steps {
            for k in 0..4 {
                z[(t, k)] = z[(t - 1, k)] + scale * rng.gen_range(-0.5..0.5);
            }
        }
        let e = Embedding {
            x0: Shape::circle(n).into_theta(),
            frame0: Frame { base_index: 0, vectors: circle_modes(n, 4) },
            z,
            spectrum: moving_frames::Spectrum { eigenvalues: vec![], total: 0.0 },
            tangent_energy: 0.0,
            options: EmbedOptions::default(),
        };
        for x in reconstruct(&m, &e).unwrap() {
            prop_assert!(phi_residual(&x) <= 1e-10);
        }
    }

    #[test]
    fn captured_energy_matches_spectrum(seed in 0u64..1000, amp in 0.01f64..0.06, dim in 1usize..6, exact in any::<bool>()) {
        let (m, pts) = wobble(seed, 16, 64, 5, amp);
        let opts = EmbedOptions {
            method: if exact { PcaMethod::Exact } else { EmbedOptions::default().method },
            ..Default::default()
        };
        let e = embed(&m, &pts, dim, opts).unwrap();
        prop_assert!((e.captured_energy() - e.spectrum.captured(dim)).abs() <= 1e-6);
    }

    #[test]
    fn captured_energy_grows_with_dim(seed in 0u64..1000, amp in 0.01f64..0.06) {
        let (m, pts) = wobble(seed, 16, 64, 4, amp);
        let report = roundtrip_report(&m, &pts, &[1, 2, 3, 4], EmbedOptions::default()).unwrap();
        let energy: Vec<f64> = report.rows.iter().map(|r| r.captured_energy).collect();
        prop_assert!(energy.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", energy);
        prop_assert!(energy[3] >= 1.0 - 1e-6);
    }

    #[test]
    fn geodesic_development_is_a_straight_line(seed in 0u64..1000, step in 0.001f64..0.2, frames in 3usize..60) {
        let m = SphereManifold::new();
        let pts = sphere_geodesic(&SynthParams { frames, amplitude: step, seed, ..Default::default() }).unwrap();
        let e = embed(&m, &pts, 1, EmbedOptions::default()).unwrap();
        let dz = e.increments();
        for t in 0..dz.nrows() {
            prop_assert!((dz[(t, 0)] - dz[(0, 0)]).abs() <= 1e-10 * step);
        }
    }
}
