//! Versioned text formats for sequences and embeddings.
//!
//! Every file starts with a `fw1 <type>` magic line followed by `key value`
//! header lines and one payload record per line. Reals are written with 17
//! significant digits, so a write/read cycle reproduces every bit.
//!
//! ```text
//! fw1 sequence            fw1 embedding
//! kind thetas             manifold shape
//! n 128                   n 128
//! t 30                    t 30
//! dt 1.0e0                l 3
//! <t lines of n reals>    centered false
//!                         method streaming
//!                         renormalize isometric
//!                         x0 <n reals>
//!                         frame <n reals>        (l lines)
//!                         z <l reals>            (t lines)
//!                         total <real>
//!                         eigenvalues <reals>
//!                         tangent_energy <real>
//! ```
//!
//! Contour sequences store `x y` pairs interleaved, `n` points per record.
//! Plain CSV point lists with a `frame,x,y` header are accepted as input.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::embedding::{EmbedOptions, Embedding, PcaMethod, Spectrum, StreamingOptions};
use crate::metric::{AmbientVector, QuadratureMetric};
use crate::shape::Contour;
use crate::transport::{Frame, Renormalize};

pub const MAGIC: &str = "fw1";

/// Frame rows must be orthonormal to this tolerance when read back.
pub const FRAME_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("header field `{field}`: {reason}")]
    Header { field: String, reason: String },

    #[error("line {line}: {reason}")]
    Payload { line: usize, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn header(field: &str, reason: impl Into<String>) -> FormatError {
    FormatError::Header {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifoldKind {
    Shape,
    Sphere,
}

impl ManifoldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ManifoldKind::Shape => "shape",
            ManifoldKind::Sphere => "sphere",
        }
    }

    /// The metric the payload vectors are measured in.
    pub fn metric(&self, n: usize) -> QuadratureMetric {
        match self {
            ManifoldKind::Shape => QuadratureMetric::uniform_circle(n),
            ManifoldKind::Sphere => QuadratureMetric::euclidean(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceData {
    Thetas(Vec<AmbientVector>),
    Contours(Vec<Contour>),
    Sphere(Vec<AmbientVector>),
}

impl SequenceData {
    pub fn kind(&self) -> &'static str {
        match self {
            SequenceData::Thetas(_) => "thetas",
            SequenceData::Contours(_) => "contours",
            SequenceData::Sphere(_) => "sphere",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SequenceData::Thetas(v) | SequenceData::Sphere(v) => v.len(),
            SequenceData::Contours(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Samples per record (points per contour).
    pub fn width(&self) -> usize {
        match self {
            SequenceData::Thetas(v) | SequenceData::Sphere(v) => v.first().map_or(0, |x| x.len()),
            SequenceData::Contours(c) => c.first().map_or(0, |x| x.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFile {
    pub dt: f64,
    pub data: SequenceData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub manifold: ManifoldKind,
    pub embedding: Embedding,
}

fn push_reals<'a>(out: &mut String, xs: impl IntoIterator<Item = &'a f64>) {
    for (i, x) in xs.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{x:.16e}").unwrap();
    }
    out.push('\n');
}

pub fn write_sequence(seq: &SequenceFile) -> String {
    let mut out = format!(
        "{MAGIC} sequence\nkind {}\nn {}\nt {}\ndt {:.16e}\n",
        seq.data.kind(),
        seq.data.width(),
        seq.data.len(),
        seq.dt
    );
    match &seq.data {
        SequenceData::Thetas(v) | SequenceData::Sphere(v) => v.iter().for_each(|x| push_reals(&mut out, x.iter())),
        SequenceData::Contours(cs) => {
            for c in cs {
                push_reals(&mut out, c.points().iter().flatten());
            }
        }
    }
    out
}

pub fn write_embedding(file: &EmbeddingFile) -> String {
    let e = &file.embedding;
    let n = e.x0.len();
    let mut out = format!(
        "{MAGIC} embedding\nmanifold {}\nn {n}\nt {}\nl {}\ncentered {}\nmethod {}\nrenormalize {}\n",
        file.manifold.as_str(),
        e.len(),
        e.dim(),
        e.options.centered,
        e.options.method.name(),
        e.options.renormalize.as_str(),
    );
    out.push_str("x0 ");
    push_reals(&mut out, e.x0.iter());
    for v in &e.frame0.vectors {
        out.push_str("frame ");
        push_reals(&mut out, v.iter());
    }
    for r in 0..e.len() {
        out.push_str("z ");
        let row: Vec<f64> = e.z.row(r).iter().copied().collect();
        push_reals(&mut out, row.iter());
    }
    writeln!(out, "total {:.16e}", e.spectrum.total).unwrap();
    out.push_str("eigenvalues");
    if e.spectrum.eigenvalues.is_empty() {
        out.push('\n');
    } else {
        out.push(' ');
        push_reals(&mut out, e.spectrum.eigenvalues.iter());
    }
    writeln!(out, "tangent_energy {:.16e}", e.tangent_energy).unwrap();
    out
}

/// Line cursor that reports 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), FormatError> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .ok_or_else(|| header(what, "missing (file truncated)"))
    }

    /// Next line, which must be `key rest`; returns `(line, rest)`.
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str), FormatError> {
        let (no, line) = self.next_line(key)?;
        let (k, rest) = line.split_once(' ').unwrap_or((line, ""));
        if k != key {
            return Err(header(key, format!("expected on line {no}, found `{k}`")));
        }
        Ok((no, rest.trim()))
    }

    fn finish(&mut self) -> Result<(), FormatError> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(FormatError::Payload {
                    line: i + 1,
                    reason: "unexpected trailing content".into(),
                });
            }
        }
        Ok(())
    }
}

fn parse_usize(field: &str, s: &str) -> Result<usize, FormatError> {
    s.parse().map_err(|_| header(field, format!("`{s}` is not a non-negative integer")))
}

fn parse_real(field: &str, s: &str) -> Result<f64, FormatError> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(header(field, format!("`{s}` is not a finite real"))),
    }
}

fn parse_bool(field: &str, s: &str) -> Result<bool, FormatError> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(header(field, format!("`{s}` is not true/false"))),
    }
}

fn parse_reals(line: usize, s: &str, expected: usize) -> Result<Vec<f64>, FormatError> {
    let xs = s
        .split_ascii_whitespace()
        .map(|tok| match tok.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(FormatError::Payload {
                line,
                reason: format!("`{tok}` is not a finite real"),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if xs.len() != expected {
        return Err(FormatError::Payload {
            line,
            reason: format!("expected {expected} values, found {}", xs.len()),
        });
    }
    Ok(xs)
}

fn check_magic(lines: &mut Lines<'_>, kind: &str) -> Result<(), FormatError> {
    let (_, first) = lines.next_line("magic")?;
    let mut parts = first.split_ascii_whitespace();
    match (parts.next(), parts.next()) {
        (Some(MAGIC), Some(k)) if k == kind => Ok(()),
        (Some(MAGIC), other) => Err(header("magic", format!("expected `{MAGIC} {kind}`, found `{MAGIC} {}`", other.unwrap_or("")))),
        _ => Err(header("magic", format!("unrecognized version line `{first}` (expected `{MAGIC} {kind}`)"))),
    }
}

pub fn parse_sequence(text: &str) -> Result<SequenceFile, FormatError> {
    let mut lines = Lines::new(text);
    check_magic(&mut lines, "sequence")?;
    let (_, kind) = lines.keyed("kind")?;
    let n = parse_usize("n", lines.keyed("n")?.1)?;
    let t = parse_usize("t", lines.keyed("t")?.1)?;
    let dt = parse_real("dt", lines.keyed("dt")?.1)?;
    if t < 2 {
        return Err(header("t", format!("a sequence needs at least 2 records, got {t}")));
    }
    if dt <= 0.0 {
        return Err(header("dt", "must be positive"));
    }
    let width = match kind {
        "thetas" => n,
        "contours" => 2 * n,
        "sphere" if n == 3 => 3,
        "sphere" => return Err(header("n", format!("sphere points have 3 coordinates, got {n}"))),
        other => return Err(header("kind", format!("unknown kind `{other}` (thetas|contours|sphere)"))),
    };
    if n == 0 {
        return Err(header("n", "must be positive"));
    }
    let mut records = Vec::with_capacity(t);
    for _ in 0..t {
        let (no, line) = lines.next_line("payload")?;
        records.push((no, parse_reals(no, line, width)?));
    }
    lines.finish()?;
    let data = match kind {
        "thetas" => SequenceData::Thetas(records.into_iter().map(|(_, r)| DVector::from_vec(r)).collect()),
        "sphere" => SequenceData::Sphere(records.into_iter().map(|(_, r)| DVector::from_vec(r)).collect()),
        _ => SequenceData::Contours(
            records
                .into_iter()
                .map(|(no, r)| {
                    Contour::new(r.chunks(2).map(|p| [p[0], p[1]]).collect()).map_err(|e| FormatError::Payload {
                        line: no,
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<_, _>>()?,
        ),
    };
    Ok(SequenceFile { dt, data })
}

/// Reads a `frame,x,y` CSV point list; frames must be numbered `0, 1, …` in
/// order.
pub fn parse_contour_csv(text: &str) -> Result<SequenceFile, FormatError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["frame", "x", "y"] {
        return Err(header("csv header", "expected columns frame,x,y"));
    }
    let mut frames: Vec<Vec<[f64; 2]>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |reason: String| FormatError::Payload { line, reason };
        let frame: usize = rec[0].parse().map_err(|_| bad(format!("bad frame index `{}`", &rec[0])))?;
        let x: f64 = rec[1].parse().map_err(|_| bad(format!("bad x `{}`", &rec[1])))?;
        let y: f64 = rec[2].parse().map_err(|_| bad(format!("bad y `{}`", &rec[2])))?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(bad("non-finite coordinate".into()));
        }
        if frame == frames.len() {
            frames.push(Vec::new());
        } else if frame + 1 != frames.len() {
            return Err(bad(format!("frame {frame} out of order")));
        }
        frames.last_mut().unwrap().push([x, y]);
    }
    if frames.len() < 2 {
        return Err(header("frame", format!("a sequence needs at least 2 frames, got {}", frames.len())));
    }
    let contours = frames
        .into_iter()
        .enumerate()
        .map(|(i, pts)| Contour::new(pts).map_err(|e| header("frame", format!("frame {i}: {e}"))))
        .collect::<Result<_, _>>()?;
    Ok(SequenceFile {
        dt: 1.0,
        data: SequenceData::Contours(contours),
    })
}

/// Sniffs the format: `fw1` files first, otherwise a CSV point list.
pub fn parse_sequence_any(text: &str) -> Result<SequenceFile, FormatError> {
    if text.starts_with(MAGIC) {
        parse_sequence(text)
    } else if text.starts_with("frame") {
        parse_contour_csv(text)
    } else {
        Err(header("magic", format!("not a `{MAGIC} sequence` file or a frame,x,y CSV")))
    }
}

pub fn parse_embedding(text: &str) -> Result<EmbeddingFile, FormatError> {
    let mut lines = Lines::new(text);
    check_magic(&mut lines, "embedding")?;
    let manifold = match lines.keyed("manifold")?.1 {
        "shape" => ManifoldKind::Shape,
        "sphere" => ManifoldKind::Sphere,
        other => return Err(header("manifold", format!("unknown manifold `{other}` (shape|sphere)"))),
    };
    let n = parse_usize("n", lines.keyed("n")?.1)?;
    let t = parse_usize("t", lines.keyed("t")?.1)?;
    let l = parse_usize("l", lines.keyed("l")?.1)?;
    let centered = parse_bool("centered", lines.keyed("centered")?.1)?;
    let method = match lines.keyed("method")?.1 {
        "exact" => PcaMethod::Exact,
        "streaming" => PcaMethod::Streaming(StreamingOptions::default()),
        other => return Err(header("method", format!("unknown method `{other}` (exact|streaming)"))),
    };
    let renormalize = {
        let s = lines.keyed("renormalize")?.1;
        Renormalize::parse(s).ok_or_else(|| header("renormalize", format!("unknown mode `{s}` (off|rescale|isometric)")))?
    };
    if manifold == ManifoldKind::Sphere && n != 3 {
        return Err(header("n", format!("sphere points have 3 coordinates, got {n}")));
    }
    if n == 0 {
        return Err(header("n", "must be positive"));
    }
    if t < 1 {
        return Err(header("t", "must be at least 1"));
    }
    if l == 0 || l > n {
        return Err(header("l", format!("must be in 1..={n}, got {l}")));
    }

    let (no, rest) = lines.keyed("x0")?;
    let x0 = DVector::from_vec(parse_reals(no, rest, n)?);
    let mut frame = Vec::with_capacity(l);
    for _ in 0..l {
        let (no, rest) = lines.keyed("frame")?;
        frame.push(DVector::from_vec(parse_reals(no, rest, n)?));
    }
    let mut z = DMatrix::zeros(t, l);
    for r in 0..t {
        let (no, rest) = lines.keyed("z")?;
        for (c, v) in parse_reals(no, rest, l)?.into_iter().enumerate() {
            z[(r, c)] = v;
        }
    }
    let total = parse_real("total", lines.keyed("total")?.1)?;
    let (no, rest) = lines.keyed("eigenvalues")?;
    let count = rest.split_ascii_whitespace().count();
    let eigenvalues = parse_reals(no, rest, count)?;
    let tangent_energy = parse_real("tangent_energy", lines.keyed("tangent_energy")?.1)?;
    lines.finish()?;

    if z.row(0).amax() != 0.0 {
        return Err(header("z", "first row must be all zeros"));
    }
    let metric = manifold.metric(n);
    let frame0 = Frame {
        base_index: 0,
        vectors: frame,
    };
    let err = frame0.orthonormality_error(&metric);
    if !(err <= FRAME_TOL) {
        return Err(header(
            "frame",
            format!("rows are not orthonormal (Gram deviation {err:.3e} > {FRAME_TOL:e})"),
        ));
    }
    Ok(EmbeddingFile {
        manifold,
        embedding: Embedding {
            x0,
            frame0,
            z,
            spectrum: Spectrum { eigenvalues, total },
            tangent_energy,
            options: EmbedOptions {
                centered,
                method,
                renormalize,
                ..Default::default()
            },
        },
    })
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}
