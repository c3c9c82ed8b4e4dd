//! The `movframe` command line.
//!
//! Exit codes: 0 success, 2 input or parameter error, 3 rank error, 4
//! numerical failure. Errors print one line, `error[input|rank|numerical]: …`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::embedding::{
    embed, full_spectrum, pull_back_tangents, reconstruct, roundtrip_report, EmbedOptions, PcaMethod, Spectrum,
    StreamingOptions,
};
use crate::error::Error;
use crate::io::{
    parse_embedding, parse_sequence_any, read_text, write_embedding, write_sequence, write_text, EmbeddingFile,
    FormatError, ManifoldKind, SequenceData, SequenceFile,
};
use crate::manifold::{project_to_manifold, LevelSetManifold};
use crate::metric::AmbientVector;
use crate::report::{
    development_panel, embedding_csv, error_panel, overlay_panel, render_svg, roundtrip_csv, roundtrip_table,
    spectrum_csv, RoundtripLine,
};
use crate::shape::{from_contour, phi_residual, to_contour, Shape, ShapeManifold, ON_MANIFOLD_TOL};
use crate::sphere::SphereManifold;
use crate::synth::{ellipse_morph, fourier_wobble, sphere_geodesic, SynthKind, SynthParams};
use crate::transport::Renormalize;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Rank(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Rank(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            CliError::Input(_) => "input",
            CliError::Rank(_) => "rank",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Rank(m) | CliError::Numerical(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // keep it on one line whatever the source message looks like
        let msg = self.message().replace('\n', " ");
        write!(f, "error[{}]: {}", self.tag(), msg)
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e.root() {
            Error::Rank { .. } => CliError::Rank(msg),
            Error::NonConvergence { .. }
            | Error::SingularJacobian
            | Error::StepTooLarge { .. }
            | Error::EigenNonConvergence { .. }
            | Error::RankDeficient { .. } => CliError::Numerical(msg),
            Error::Dimension { .. } | Error::Degenerate(_) | Error::Parameter(_) | Error::AtStep { .. } => {
                CliError::Input(msg)
            }
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "movframe", version, about = "Embed shape sequences into R^L with parallel moving frames, and back")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Develop a sequence into an embedding file.
    Embed(EmbedArgs),
    /// Rebuild a sequence from an embedding file.
    Reconstruct(ReconstructArgs),
    /// Embed and reconstruct at several dimensions and report the errors.
    Roundtrip(RoundtripArgs),
    /// Write a synthetic sequence.
    Synth(SynthArgs),
    /// Print the spectrum of the pulled-back velocities.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Subtract the mean pulled-back velocity before PCA.
    #[arg(long)]
    centered: bool,
    /// Eigensolver: streaming (linear in T) or exact (snapshot Gram matrix).
    #[arg(long, default_value = "streaming", value_parser = ["streaming", "exact"])]
    method: String,
    /// Frame correction after each transport step.
    #[arg(long, default_value = "isometric", value_parser = ["isometric", "rescale", "off"])]
    renormalize: String,
    /// Direction samples per shape when the input holds contours.
    #[arg(long, default_value_t = 128)]
    samples: usize,
}

impl PipelineArgs {
    fn options(&self) -> EmbedOptions {
        EmbedOptions {
            centered: self.centered,
            method: match self.method.as_str() {
                "exact" => PcaMethod::Exact,
                _ => PcaMethod::Streaming(StreamingOptions::default()),
            },
            renormalize: Renormalize::parse(&self.renormalize).unwrap_or_default(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
struct EmbedArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Embedding dimension L.
    #[arg(long)]
    dim: usize,
    /// CSV with the spectrum and the captured energy per component.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Write contours instead of direction functions.
    #[arg(long)]
    contours: bool,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated embedding dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_parser = ["ellipse-morph", "fourier-wobble", "sphere-geodesic"])]
    kind: String,
    #[arg(long, default_value_t = 30)]
    frames: usize,
    #[arg(long, default_value_t = 128)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Oscillating modes (fourier-wobble).
    #[arg(long, default_value_t = 3)]
    modes: usize,
    /// Step size: largest tangent step (fourier-wobble, default 0.04), arc
    /// step (sphere-geodesic, default 0.02) or final aspect excess
    /// (ellipse-morph, default 0.5).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Development substeps per frame (fourier-wobble).
    #[arg(long, default_value_t = 8)]
    substeps: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    centered: bool,
    #[arg(long, default_value_t = 128)]
    samples: usize,
}

/// A sequence ready for the pipeline.
struct Loaded {
    kind: ManifoldKind,
    manifold: Box<dyn LevelSetManifold>,
    points: Vec<AmbientVector>,
}

fn load_sequence(path: &Path, samples: usize) -> CliResult<Loaded> {
    let seq = parse_sequence_any(&read_text(path)?)?;
    match seq.data {
        SequenceData::Thetas(thetas) => {
            let n = thetas[0].len();
            let points = thetas
                .into_iter()
                .enumerate()
                .map(|(t, theta)| {
                    // records already on the manifold are kept bit-for-bit
                    let shape = if theta.len() >= crate::shape::MIN_SAMPLES && phi_residual(&theta) <= ON_MANIFOLD_TOL {
                        Shape::new(theta)
                    } else {
                        Shape::project(theta, Default::default())
                    };
                    shape.map(Shape::into_theta).map_err(|e| e.at_record(t))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(Loaded {
                kind: ManifoldKind::Shape,
                manifold: Box::new(ShapeManifold::new(n)),
                points,
            })
        }
        SequenceData::Contours(contours) => {
            let points = contours
                .iter()
                .enumerate()
                .map(|(t, c)| {
                    let r = from_contour(c, samples, Default::default()).map_err(|e| e.at_record(t))?;
                    if r.reversed {
                        eprintln!("warning: contour {t} is clockwise; traversing it in reverse");
                    }
                    Ok(r.shape.into_theta())
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(Loaded {
                kind: ManifoldKind::Shape,
                manifold: Box::new(ShapeManifold::new(samples)),
                points,
            })
        }
        SequenceData::Sphere(points) => {
            let m = SphereManifold::new();
            let points = points
                .into_iter()
                .enumerate()
                .map(|(t, p)| {
                    if (p.norm() - 1.0).abs() <= ON_MANIFOLD_TOL {
                        Ok(p)
                    } else {
                        project_to_manifold(&m, &p, Default::default())
                            .map(|q| q.point)
                            .map_err(|e| e.at_record(t))
                    }
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(Loaded {
                kind: ManifoldKind::Sphere,
                manifold: Box::new(m),
                points,
            })
        }
    }
}

trait AtRecord {
    fn at_record(self, t: usize) -> Error;
}

impl AtRecord for Error {
    fn at_record(self, t: usize) -> Error {
        match self {
            Error::Parameter(m) => Error::Parameter(format!("record {t}: {m}")),
            Error::Degenerate(m) => Error::Degenerate(format!("record {t}: {m}")),
            other => Error::AtStep {
                index: t,
                source: Box::new(other),
            },
        }
    }
}

fn manifold_for(kind: ManifoldKind, n: usize) -> Box<dyn LevelSetManifold> {
    match kind {
        ManifoldKind::Shape => Box::new(ShapeManifold::new(n)),
        ManifoldKind::Sphere => Box::new(SphereManifold::new()),
    }
}

fn cmd_embed(a: &EmbedArgs) -> CliResult<()> {
    if a.dim == 0 {
        return Err(CliError::Input("--dim must be at least 1".into()));
    }
    let seq = load_sequence(&a.input, a.pipeline.samples)?;
    let e = embed(&*seq.manifold, &seq.points, a.dim, a.pipeline.options())?;
    out!(
        "embedded {} frames into R^{}: captured energy {:.10}, spectrum fraction {:.10}",
        e.len(),
        e.dim(),
        e.captured_energy(),
        e.spectrum.captured(e.dim())
    );
    if let Some(path) = &a.report {
        write_text(path, &embedding_csv(&e))?;
    }
    write_text(
        &a.output,
        &write_embedding(&EmbeddingFile {
            manifold: seq.kind,
            embedding: e,
        }),
    )?;
    Ok(())
}

fn cmd_reconstruct(a: &ReconstructArgs) -> CliResult<()> {
    let file = parse_embedding(&read_text(&a.input)?)?;
    let e = &file.embedding;
    let m = manifold_for(file.manifold, e.x0.len());
    if m.residual(&e.x0) > ON_MANIFOLD_TOL {
        return Err(CliError::Input("header field `x0`: base point is not on the manifold".into()));
    }
    let points = reconstruct(&*m, e)?;
    let data = match (file.manifold, a.contours) {
        (ManifoldKind::Shape, false) => SequenceData::Thetas(points),
        (ManifoldKind::Shape, true) => SequenceData::Contours(points.iter().map(|p| to_contour(p, 1.0)).collect()),
        (ManifoldKind::Sphere, false) => SequenceData::Sphere(points),
        (ManifoldKind::Sphere, true) => {
            return Err(CliError::Input("--contours only applies to shape embeddings".into()))
        }
    };
    out!("reconstructed {} frames", data.len());
    write_text(&a.output, &write_sequence(&SequenceFile { dt: 1.0, data }))?;
    Ok(())
}

fn closed(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut v = points.to_vec();
    if let Some(&p) = points.first() {
        v.push(p);
    }
    v
}

fn cmd_roundtrip(a: &RoundtripArgs) -> CliResult<()> {
    if a.dims.contains(&0) {
        return Err(CliError::Input("--dims entries must be at least 1".into()));
    }
    let seq = load_sequence(&a.input, a.pipeline.samples)?;
    let report = roundtrip_report(&*seq.manifold, &seq.points, &a.dims, a.pipeline.options())?;
    let lines: Vec<RoundtripLine> = report
        .rows
        .iter()
        .map(|r| {
            let hausdorff = (seq.kind == ManifoldKind::Shape).then(|| {
                let d: Vec<f64> = seq
                    .points
                    .iter()
                    .zip(&r.reconstruction)
                    .map(|(x, y)| to_contour(x, 1.0).hausdorff(&to_contour(y, 1.0)))
                    .collect();
                (d.iter().sum::<f64>() / d.len() as f64, d.iter().copied().fold(0.0, f64::max))
            });
            RoundtripLine {
                dim: r.dim,
                captured_energy: r.captured_energy,
                spectrum_fraction: r.spectrum_fraction,
                mean_error: r.mean_error,
                max_error: r.max_error,
                hausdorff,
            }
        })
        .collect();
    out!("{}", roundtrip_table(&lines).trim_end());
    if let Some(path) = &a.csv {
        write_text(path, &roundtrip_csv(&lines))?;
    }
    if let Some(path) = &a.svg {
        let shown = report
            .rows
            .iter()
            .rev()
            .find(|r| r.dim <= 3)
            .unwrap_or(&report.rows[0]);
        let best = report.rows.iter().max_by_key(|r| r.dim).unwrap();
        let last = seq.points.len() - 1;
        let overlay = match seq.kind {
            ManifoldKind::Shape => overlay_panel(
                &format!("frame {last}: original vs L = {}", best.dim),
                closed(to_contour(&seq.points[last], 1.0).points()),
                closed(to_contour(&best.reconstruction[last], 1.0).points()),
            ),
            ManifoldKind::Sphere => overlay_panel(
                &format!("path (x, y): original vs L = {}", best.dim),
                seq.points.iter().map(|p| [p[0], p[1]]).collect(),
                best.reconstruction.iter().map(|p| [p[0], p[1]]).collect(),
            ),
        };
        let svg = render_svg(&[development_panel(&shown.embedding), error_panel(&lines), overlay]);
        write_text(path, &svg)?;
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> CliResult<()> {
    let kind = SynthKind::parse(&a.kind).ok_or_else(|| CliError::Input(format!("unknown kind `{}`", a.kind)))?;
    let amplitude = a.amplitude.unwrap_or(match kind {
        SynthKind::FourierWobble => 0.04,
        SynthKind::EllipseMorph => 0.5,
        SynthKind::SphereGeodesic => 0.02,
    });
    let p = SynthParams {
        frames: a.frames,
        samples: a.samples,
        seed: a.seed,
        modes: a.modes,
        amplitude,
        substeps: a.substeps,
    };
    let data = match kind {
        SynthKind::FourierWobble => SequenceData::Thetas(fourier_wobble(&p)?.points()),
        SynthKind::EllipseMorph => SequenceData::Thetas(ellipse_morph(&p)?.points()),
        SynthKind::SphereGeodesic => SequenceData::Sphere(sphere_geodesic(&p)?),
    };
    out!("wrote {} {} frames", data.len(), kind.as_str());
    write_text(&a.output, &write_sequence(&SequenceFile { dt: 1.0, data }))?;
    Ok(())
}

fn cmd_spectrum(a: &SpectrumArgs) -> CliResult<()> {
    let seq = load_sequence(&a.input, a.samples)?;
    let ts = pull_back_tangents(&*seq.manifold, &seq.points, Renormalize::Isometric)?;
    let eigenvalues = full_spectrum(&ts, seq.manifold.metric(), a.centered);
    let spectrum = Spectrum {
        total: eigenvalues.iter().sum(),
        eigenvalues,
    };
    if spectrum.eigenvalues.iter().all(|&l| l <= 1e-12) {
        eprintln!("warning: all eigenvalues are below 1e-12; the sequence is (numerically) constant");
    }
    out!("{:>4} {:>24} {:>14}", "k", "eigenvalue", "cum_energy");
    for (k, (l, c)) in spectrum.eigenvalues.iter().zip(spectrum.energy_fraction()).enumerate() {
        out!("{:>4} {:>24.16e} {:>14.10}", k + 1, l, c);
    }
    if let Some(path) = &a.csv {
        write_text(path, &spectrum_csv(&spectrum))?;
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                out!("{}", e.to_string().trim_end());
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", CliError::Input(first.trim_start_matches("error: ").to_string()));
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Embed(a) => cmd_embed(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Spectrum(a) => cmd_spectrum(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
