//! The `movframe` binary, driven as a subprocess.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use nalgebra::{DMatrix, Vector3};

use moving_frames::io::{parse_sequence, write_embedding, EmbeddingFile, ManifoldKind, SequenceData};
use moving_frames::sphere::to_ambient;
use moving_frames::{EmbedOptions, Embedding, Frame, Spectrum};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn movframe(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_movframe"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

fn assert_error(r: &Run, code: i32, tag: &str) {
    assert_eq!(r.code, code, "stderr: {}", r.stderr);
    assert_eq!(r.stderr.lines().count(), 1, "{}", r.stderr);
    assert!(r.stderr.starts_with(&format!("error[{tag}]: ")), "{}", r.stderr);
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["embed", "--help"]] {
        let r = movframe(dir.path(), args);
        assert_eq!(r.code, 0);
        assert!(!r.stdout.is_empty());
    }
}

#[test]
fn argument_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["synth", "--kind", "torus", "--output", "x.fw1"],
        &["embed", "--input", "x.fw1", "--output", "y.fw1"],
        &["roundtrip", "--input", "x.fw1", "--dims", "1,zero"],
    ] {
        assert_eq!(movframe(dir.path(), args).code, 2, "{args:?}");
    }
}

#[test]
fn malformed_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("junk.fw1"), "hello\n").unwrap();
    assert_error(&movframe(d, &["spectrum", "--input", "junk.fw1"]), 2, "input");
    std::fs::write(d.join("short.fw1"), "fw1 sequence\nkind thetas\nn 8\nt 2\ndt 1\n1 2 3\n").unwrap();
    assert_error(&movframe(d, &["embed", "--input", "short.fw1", "--output", "e.fw1", "--dim", "1"]), 2, "input");
}

#[test]
fn unreachable_reconstruction_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut z = DMatrix::zeros(3, 1);
    z[(1, 0)] = 0.1;
    z[(2, 0)] = 1.9;
    let file = EmbeddingFile {
        manifold: ManifoldKind::Sphere,
        embedding: Embedding {
            x0: to_ambient(&Vector3::z()),
            frame0: Frame {
                base_index: 0,
                vectors: vec![to_ambient(&Vector3::y())],
            },
            z,
            spectrum: Spectrum {
                eigenvalues: vec![1.0],
                total: 1.0,
            },
            tangent_energy: 1.0,
            options: EmbedOptions::default(),
        },
    };
    std::fs::write(d.join("e.fw1"), write_embedding(&file)).unwrap();
    let r = movframe(d, &["reconstruct", "--input", "e.fw1", "--output", "r.fw1"]);
    assert_error(&r, 4, "numerical");
    assert!(r.stderr.contains("step 2"), "{}", r.stderr);
}

#[test]
fn contour_csv_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::from("frame,x,y\n");
    for t in 0..6 {
        let stretch = 1.0 + 0.05 * t as f64;
        for j in 0..200 {
            let u = 2.0 * PI * j as f64 / 200.0;
            // frame 2 runs clockwise
            let y = if t == 2 { -u.sin() } else { u.sin() };
            csv += &format!("{t},{},{}\n", stretch * u.cos(), y / stretch);
        }
    }
    std::fs::write(d.join("c.csv"), csv).unwrap();
    let r = movframe(d, &["embed", "--input", "c.csv", "--output", "e.fw1", "--dim", "2", "--samples", "64"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("contour 2 is clockwise"), "{}", r.stderr);
    let r = movframe(d, &["reconstruct", "--input", "e.fw1", "--output", "r.fw1", "--contours"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let back = parse_sequence(&std::fs::read_to_string(d.join("r.fw1")).unwrap()).unwrap();
    match back.data {
        SequenceData::Contours(cs) => {
            assert_eq!(cs.len(), 6);
            assert!(cs.iter().all(|c| c.len() == 64));
        }
        other => panic!("expected contours, got {:?}", other.kind()),
    }
}

#[test]
fn sphere_spectrum_is_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let r = movframe(d, &["synth", "--kind", "sphere-geodesic", "--frames", "40", "--amplitude", "0.05", "--output", "g.fw1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = movframe(d, &["spectrum", "--input", "g.fw1", "--csv", "s.csv"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let values: Vec<f64> = std::fs::read_to_string(d.join("s.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(values[0] >= 1e6 * values[1].max(f64::MIN_POSITIVE));
    let rank = movframe(d, &["embed", "--input", "g.fw1", "--output", "e.fw1", "--dim", "2"]);
    assert_error(&rank, 3, "rank");
}

#[test]
fn roundtrip_svg_has_one_panel_per_plot() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    movframe(d, &["synth", "--kind", "ellipse-morph", "--frames", "12", "--samples", "64", "--output", "a.fw1"]);
    let r = movframe(d, &["roundtrip", "--input", "a.fw1", "--dims", "1,2", "--svg", "p.svg", "--method", "exact"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let svg = std::fs::read_to_string(d.join("p.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let panels: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("g")).collect();
    assert!(!panels.is_empty());
    for g in panels {
        assert!(g.children().any(|c| c.has_tag_name("polyline")));
    }
}

#[test]
fn embed_report_lists_components() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    movframe(d, &["synth", "--kind", "fourier-wobble", "--frames", "20", "--samples", "64", "--output", "a.fw1"]);
    let r = movframe(d, &["embed", "--input", "a.fw1", "--output", "e.fw1", "--dim", "2", "--report", "rep.csv"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rep = std::fs::read_to_string(d.join("rep.csv")).unwrap();
    assert!(rep.starts_with("component,eigenvalue,cum_energy,captured_energy\n"));
    let row2: Vec<&str> = rep.lines().nth(2).unwrap().split(',').collect();
    let (spectrum, captured): (f64, f64) = (row2[2].parse().unwrap(), row2[3].parse().unwrap());
    assert!((spectrum - captured).abs() <= 1e-6);
}
