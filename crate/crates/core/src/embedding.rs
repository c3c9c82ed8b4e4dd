//! Low-dimensional development of a manifold curve and its reconstruction.
//!
//! The curve velocities are pulled back to the tangent space at the first
//! point by parallel transport, the top-L principal directions of that set
//! become the initial frame, the frame is transported forward along the
//! curve, and the velocity coordinates against it are accumulated into a
//! curve in R^L. Reconstruction runs the same recursion in reverse.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::manifold::{retract_along, LevelSetManifold, NormalBasis, ProjectionOptions};
use crate::metric::{AmbientVector, QuadratureMetric};
use crate::transport::{step_vectors, CurveTransport, Frame, Renormalize, TangentVector};

/// Eigenvalues below `RANK_TOL · λ_max` count as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Velocities pulled back to the tangent space at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSet {
    pub base_index: usize,
    pub tangents: Vec<AmbientVector>,
    /// Norms of the velocities before transport.
    pub step_norms: Vec<f64>,
}

/// PCA eigenvalues (descending) and the total energy they are measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub total: f64,
}

impl Spectrum {
    /// Cumulative energy fractions `Σ_{i≤j} λ_i / total`.
    pub fn energy_fraction(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.eigenvalues
            .iter()
            .map(|l| {
                acc += l;
                if self.total > 0.0 {
                    acc / self.total
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Cumulative fraction at `dim` components (clamped to the known spectrum).
    pub fn captured(&self, dim: usize) -> f64 {
        if dim == 0 || self.eigenvalues.is_empty() {
            return 0.0;
        }
        self.energy_fraction()[dim.min(self.eigenvalues.len()) - 1]
    }

    /// Number of eigenvalues at or above `RANK_TOL · λ_max`.
    pub fn rank(&self) -> usize {
        numerical_rank(&self.eigenvalues)
    }
}

fn numerical_rank(desc: &[f64]) -> usize {
    match desc.first() {
        Some(&top) if top > 0.0 => desc.iter().take_while(|&&l| l >= RANK_TOL * top).count(),
        _ => 0,
    }
}

/// Forward-difference velocities projected onto the tangent space at their
/// start point: `v_t = P_{X_t}(X_{t+1} − X_t)`.
pub fn curve_tangents<M: LevelSetManifold + ?Sized>(
    m: &M,
    points: &[AmbientVector],
) -> Result<Vec<TangentVector>> {
    if points.len() < 2 {
        return Err(Error::Parameter("a curve needs at least 2 points".into()));
    }
    points
        .windows(2)
        .enumerate()
        .map(|(t, w)| {
            m.metric().check(&w[1])?;
            let basis = NormalBasis::at(m, &w[0]).map_err(|e| e.at_step(t))?;
            Ok(TangentVector {
                base_index: t,
                values: basis.project_out(m.metric(), &(&w[1] - &w[0])),
            })
        })
        .collect()
}

fn tangents_on<M: LevelSetManifold + ?Sized>(curve: &CurveTransport<'_, M>) -> Vec<AmbientVector> {
    let pts = curve.points();
    (0..pts.len() - 1)
        .map(|t| curve.basis(t).project_out(curve.metric(), &(&pts[t + 1] - &pts[t])))
        .collect()
}

/// Transports every velocity back to index 0 (one transport per velocity).
pub fn pull_back_tangents<M: LevelSetManifold + ?Sized>(
    m: &M,
    points: &[AmbientVector],
    renorm: Renormalize,
) -> Result<TangentSet> {
    if points.len() < 2 {
        return Err(Error::Parameter("a curve needs at least 2 points".into()));
    }
    let curve = CurveTransport::new(m, points.to_vec())?;
    pull_back_on(&curve, &tangents_on(&curve), renorm)
}

fn pull_back_on<M: LevelSetManifold + ?Sized>(
    curve: &CurveTransport<'_, M>,
    tangents: &[AmbientVector],
    renorm: Renormalize,
) -> Result<TangentSet> {
    let metric = curve.metric();
    let pulled = tangents
        .iter()
        .enumerate()
        .map(|(t, v)| curve.transport(v, t, 0, renorm))
        .collect::<Result<Vec<_>>>()?;
    Ok(TangentSet {
        base_index: 0,
        tangents: pulled,
        step_norms: tangents.iter().map(|v| metric.norm(v)).collect(),
    })
}

impl TangentSet {
    /// Builds the pulled-back set through a bookkeeping frame instead:
    /// transport an orthonormal basis of `T_{X_0}M` forward, take velocity
    /// coordinates against it, and recombine them with the initial basis.
    ///
    /// With an isometric transport the result does not depend on the basis.
    pub fn from_bookkeeping_frame<M: LevelSetManifold + ?Sized>(
        m: &M,
        points: &[AmbientVector],
        basis0: &[AmbientVector],
        renorm: Renormalize,
    ) -> Result<TangentSet> {
        let curve = CurveTransport::new(m, points.to_vec())?;
        let metric = curve.metric();
        let tangents = tangents_on(&curve);
        let frame0 = Frame {
            base_index: 0,
            vectors: basis0.to_vec(),
        };
        let frames = curve.frame_along(&frame0, renorm)?;
        let pulled = tangents
            .iter()
            .zip(&frames)
            .map(|(v, f)| frame0.combine(f.coordinates(metric, v).as_slice()))
            .collect();
        Ok(TangentSet {
            base_index: 0,
            tangents: pulled,
            step_norms: tangents.iter().map(|v| metric.norm(v)).collect(),
        })
    }
}

fn centred(ts: &TangentSet, centered: bool) -> Vec<AmbientVector> {
    if !centered || ts.tangents.is_empty() {
        return ts.tangents.clone();
    }
    let n = ts.tangents.len() as f64;
    let mean = ts
        .tangents
        .iter()
        .fold(DVector::zeros(ts.tangents[0].len()), |acc, v| acc + v)
        / n;
    ts.tangents.iter().map(|v| v - &mean).collect()
}

/// Sorted eigen-decomposition of the snapshot Gram matrix `⟨τ_a, τ_b⟩`.
fn snapshot_eigen(metric: &QuadratureMetric, vs: &[AmbientVector]) -> (Vec<f64>, DMatrix<f64>) {
    let g = metric.gram(vs);
    let eig = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..vs.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = DMatrix::from_fn(vs.len(), vs.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// All eigenvalues of the Gram operator `Σ_t τ_t ⟨τ_t, ·⟩` (descending,
/// clamped at zero), one per tangent.
pub fn full_spectrum(ts: &TangentSet, metric: &QuadratureMetric, centered: bool) -> Vec<f64> {
    snapshot_eigen(metric, &centred(ts, centered)).0
}

/// Top-L principal directions of a pulled-back tangent set.
///
/// Uncentered by default: the eigenvectors of `Σ_t τ_t ⟨τ_t, ·⟩` under the
/// quadrature metric, computed from the snapshot Gram matrix. Each
/// eigenvector's largest-magnitude coordinate is made positive.
pub fn pca_frame(
    ts: &TangentSet,
    metric: &QuadratureMetric,
    dim: usize,
    centered: bool,
) -> Result<(Frame, Spectrum)> {
    if dim == 0 {
        return Err(Error::Parameter("embedding dimension must be at least 1".into()));
    }
    let vs = centred(ts, centered);
    let (values, vectors) = snapshot_eigen(metric, &vs);
    let rank = numerical_rank(&values);
    if dim > rank {
        return Err(Error::Rank {
            requested: dim,
            max: rank,
        });
    }
    let mut frame = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut e = DVector::zeros(vs[0].len());
        for (a, v) in vs.iter().enumerate() {
            e.axpy(vectors[(a, i)], v, 1.0);
        }
        frame.push(e / values[i].sqrt());
    }
    let mut frame = metric.gram_schmidt(&frame)?;
    frame.iter_mut().for_each(fix_sign);
    let retained: Vec<f64> = values[..rank].to_vec();
    let total = retained.iter().sum();
    Ok((
        Frame {
            base_index: ts.base_index,
            vectors: frame,
        },
        Spectrum {
            eigenvalues: retained,
            total,
        },
    ))
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
fn fix_sign(v: &mut AmbientVector) {
    let mut best = (0usize, 0.0f64);
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best.1 {
            best = (i, x.abs());
        }
    }
    if v[best.0] < 0.0 {
        v.neg_mut();
    }
}

/// Settings for the streaming subspace eigensolver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamingOptions {
    /// Extra block vectors beyond L.
    pub oversample: usize,
    /// Stop when `‖C x_i − θ_i x_i‖ ≤ tol · θ_1` for the top L Ritz pairs.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for StreamingOptions {
    fn default() -> Self {
        Self {
            oversample: 8,
            tol: 1e-10,
            max_iter: 500,
            seed: 0x5eed,
        }
    }
}

/// How the principal directions are computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PcaMethod {
    /// Pull back every velocity, then diagonalize the snapshot Gram matrix.
    /// `O(T² N)` transport work plus an `O(T³)` eigenproblem.
    Exact,
    /// Subspace iteration on the Gram operator, applied by one forward and
    /// one backward sweep along the curve. `O(T N b)` per iteration.
    Streaming(StreamingOptions),
}

impl PcaMethod {
    pub fn name(&self) -> &'static str {
        match self {
            PcaMethod::Exact => "exact",
            PcaMethod::Streaming(_) => "streaming",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedOptions {
    pub centered: bool,
    pub method: PcaMethod,
    pub renormalize: Renormalize,
    pub projection: ProjectionOptions,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            centered: false,
            method: PcaMethod::Streaming(StreamingOptions::default()),
            renormalize: Renormalize::Isometric,
            projection: ProjectionOptions::default(),
        }
    }
}

/// The invertible compressed form of a curve: start point, initial frame and
/// the developed curve `z` (row 0 is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub x0: AmbientVector,
    pub frame0: Frame,
    pub z: DMatrix<f64>,
    pub spectrum: Spectrum,
    /// `Σ_t ‖v_t‖²` of the embedded curve's velocities.
    pub tangent_energy: f64,
    pub options: EmbedOptions,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn len(&self) -> usize {
        self.z.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.z.nrows() == 0
    }

    /// `dz[t] = z[t+1] − z[t]`.
    pub fn increments(&self) -> DMatrix<f64> {
        let (t, l) = (self.z.nrows(), self.z.ncols());
        DMatrix::from_fn(t.saturating_sub(1), l, |r, c| self.z[(r + 1, c)] - self.z[(r, c)])
    }

    /// `Σ_t Σ_i dz[t][i]² / Σ_t ‖v_t‖²`.
    pub fn captured_energy(&self) -> f64 {
        if self.tangent_energy > 0.0 {
            self.increments().norm_squared() / self.tangent_energy
        } else {
            0.0
        }
    }
}

/// Applies the Gram operator `C w = Σ_t τ_t ⟨τ_t, w⟩` without forming the
/// pulled-back tangents, using `⟨τ_t, w⟩ = ⟨v_t, R_t w⟩` and a Horner sweep
/// `Σ_t R_t* y_t = y_0 + R_1*(y_1 + R_2*(y_2 + …))`.
struct GramOperator<'c, 'm, M: ?Sized> {
    curve: &'c CurveTransport<'m, M>,
    tangents: &'c [AmbientVector],
    renorm: Renormalize,
    mean: Option<AmbientVector>,
}

impl<M: LevelSetManifold + ?Sized> GramOperator<'_, '_, M> {
    /// `Σ_t R_t* (α_t v_t)` for each column of `alpha` (rows indexed by t).
    fn pull_back_sum(&self, alpha: &DMatrix<f64>) -> Vec<AmbientVector> {
        let n = self.tangents.len();
        let last = &self.tangents[n - 1];
        let mut acc: Vec<AmbientVector> = (0..alpha.ncols()).map(|j| last * alpha[(n - 1, j)]).collect();
        for t in (1..n).rev() {
            for (j, a) in acc.iter_mut().enumerate() {
                let mut next = self.curve.step_backward(t - 1, a, self.renorm);
                next.axpy(alpha[(t - 1, j)], &self.tangents[t - 1], 1.0);
                *a = next;
            }
        }
        acc
    }

    fn apply(&self, block: &[AmbientVector]) -> Vec<AmbientVector> {
        let metric = self.curve.metric();
        let n = self.tangents.len();
        let mut alpha = DMatrix::zeros(n, block.len());
        let mut cur: Vec<AmbientVector> = block.to_vec();
        for t in 0..n {
            if t > 0 {
                for v in cur.iter_mut() {
                    *v = self.curve.step_forward(t - 1, v, self.renorm);
                }
            }
            for (j, v) in cur.iter().enumerate() {
                alpha[(t, j)] = metric.dot(&self.tangents[t], v);
            }
        }
        let mut out = self.pull_back_sum(&alpha);
        if let Some(mu) = &self.mean {
            for (o, q) in out.iter_mut().zip(block) {
                o.axpy(-(n as f64) * metric.dot(mu, q), mu, 1.0);
            }
        }
        out
    }
}

/// Orthonormalizes, dropping vectors that fall below `rel · max‖v‖`.
fn orthonormalize_deflating(metric: &QuadratureMetric, vs: &[AmbientVector], rel: f64) -> Vec<AmbientVector> {
    let scale = vs.iter().map(|v| metric.norm(v)).fold(0.0, f64::max);
    let mut out: Vec<AmbientVector> = Vec::with_capacity(vs.len());
    if scale == 0.0 {
        return out;
    }
    for v in vs {
        let mut u = v.clone();
        for _ in 0..2 {
            let coeffs: Vec<f64> = out.iter().map(|b| metric.dot(b, &u)).collect();
            for (b, c) in out.iter().zip(coeffs) {
                u.axpy(-c, b, 1.0);
            }
        }
        let norm = metric.norm(&u);
        if norm > rel * scale {
            out.push(u / norm);
        }
    }
    out
}

fn streaming_pca<M: LevelSetManifold + ?Sized>(
    curve: &CurveTransport<'_, M>,
    tangents: &[AmbientVector],
    dim: usize,
    centered: bool,
    renorm: Renormalize,
    opts: StreamingOptions,
) -> Result<(Frame, Spectrum)> {
    if renorm == Renormalize::Rescale {
        return Err(Error::Parameter(
            "streaming PCA needs a linear transport (off or isometric)".into(),
        ));
    }
    let metric = curve.metric();
    let n = tangents.len();
    let mut op = GramOperator {
        curve,
        tangents,
        renorm,
        mean: None,
    };
    let raw_total: f64 = if renorm == Renormalize::Isometric {
        tangents.iter().map(|v| metric.norm_squared(v)).sum()
    } else {
        // transport does not preserve norms; pull each velocity back
        pull_back_on(curve, tangents, renorm)?
            .tangents
            .iter()
            .map(|v| metric.norm_squared(v))
            .sum()
    };
    let total = if centered {
        let ones = DMatrix::from_element(n, 1, 1.0 / n as f64);
        let mu = op.pull_back_sum(&ones).remove(0);
        let t = raw_total - n as f64 * metric.norm_squared(&mu);
        op.mean = Some(mu);
        t.max(0.0)
    } else {
        raw_total
    };

    let basis0 = curve.basis(0);
    let block = (dim + opts.oversample).min(n).max(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let omega: Vec<AmbientVector> = (0..block)
        .map(|_| {
            let v = DVector::from_fn(metric.dim(), |_, _| rng.gen_range(-1.0..1.0));
            basis0.project_out(metric, &v)
        })
        .collect();
    let mut q = orthonormalize_deflating(metric, &op.apply(&omega), 1e-13);
    let mut residual = f64::INFINITY;
    for iter in 0..opts.max_iter {
        if q.is_empty() {
            break;
        }
        let z = op.apply(&q);
        let b = q.len();
        let h = DMatrix::from_fn(b, b, |i, j| 0.5 * (metric.dot(&q[i], &z[j]) + metric.dot(&q[j], &z[i])));
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let combine = |vs: &[AmbientVector], col: usize| {
            let mut out = DVector::zeros(metric.dim());
            for (r, v) in vs.iter().enumerate() {
                out.axpy(eig.eigenvectors[(r, col)], v, 1.0);
            }
            out
        };
        let ritz: Vec<AmbientVector> = order.iter().map(|&c| combine(&q, c)).collect();
        let top = theta[0];
        let wanted = dim.min(b);
        residual = 0.0;
        for i in 0..wanted {
            let cz = combine(&z, order[i]);
            let r = cz - &ritz[i] * theta[i];
            residual = residual.max(metric.norm(&r));
        }
        // one refinement pass always runs, which keeps the work per call
        // uniform across inputs whose range the first block already spans
        if top == 0.0 || (iter > 0 && residual <= opts.tol * top) {
            let rank = numerical_rank(&theta);
            if dim > rank {
                return Err(Error::Rank {
                    requested: dim,
                    max: rank,
                });
            }
            let mut vectors = metric.gram_schmidt(&ritz[..dim])?;
            vectors.iter_mut().for_each(fix_sign);
            return Ok((
                Frame {
                    base_index: 0,
                    vectors,
                },
                Spectrum {
                    eigenvalues: theta[..rank].to_vec(),
                    total,
                },
            ));
        }
        q = orthonormalize_deflating(metric, &z, 1e-13);
    }
    if q.is_empty() {
        return Err(Error::Rank {
            requested: dim,
            max: 0,
        });
    }
    Err(Error::EigenNonConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Deterministic orthonormal tangent frame at `p`, used when the curve does
/// not move and PCA has nothing to choose from.
fn fallback_frame(metric: &QuadratureMetric, basis: &NormalBasis, dim: usize) -> Result<Vec<AmbientVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf4a3e);
    let vs: Vec<AmbientVector> = (0..dim)
        .map(|_| basis.project_out(metric, &DVector::from_fn(metric.dim(), |_, _| rng.gen_range(-1.0..1.0))))
        .collect();
    let mut out = metric.gram_schmidt(&vs)?;
    out.iter_mut().for_each(fix_sign);
    Ok(out)
}

/// Develops a curve into R^L against its optimal parallel frame.
pub fn embed<M: LevelSetManifold + ?Sized>(
    m: &M,
    points: &[AmbientVector],
    dim: usize,
    opts: EmbedOptions,
) -> Result<Embedding> {
    if dim == 0 {
        return Err(Error::Parameter("embedding dimension must be at least 1".into()));
    }
    if points.len() < 2 {
        return Err(Error::Parameter("a curve needs at least 2 points".into()));
    }
    let curve = CurveTransport::new(m, points.to_vec())?;
    let metric = curve.metric();
    let tangents = tangents_on(&curve);
    let tangent_energy: f64 = tangents.iter().map(|v| metric.norm_squared(v)).sum();

    let (frame0, spectrum) = if tangent_energy == 0.0 {
        let vectors = fallback_frame(metric, curve.basis(0), dim)?;
        (
            Frame {
                base_index: 0,
                vectors,
            },
            Spectrum {
                eigenvalues: vec![],
                total: 0.0,
            },
        )
    } else {
        match opts.method {
            PcaMethod::Exact => {
                let ts = pull_back_on(&curve, &tangents, opts.renormalize)?;
                pca_frame(&ts, metric, dim, opts.centered)?
            }
            PcaMethod::Streaming(s) => {
                streaming_pca(&curve, &tangents, dim, opts.centered, opts.renormalize, s)?
            }
        }
    };

    let t_len = points.len();
    let mut z = DMatrix::zeros(t_len, dim);
    let mut frame = frame0.vectors.clone();
    for t in 0..t_len - 1 {
        if t > 0 {
            frame = if opts.renormalize == Renormalize::Rescale {
                let raw: Vec<AmbientVector> = frame
                    .iter()
                    .map(|v| curve.step_forward(t - 1, v, Renormalize::Off))
                    .collect();
                metric.gram_schmidt(&raw).map_err(|e| e.at_step(t))?
            } else {
                frame
                    .iter()
                    .map(|v| curve.step_forward(t - 1, v, opts.renormalize))
                    .collect()
            };
        }
        for i in 0..dim {
            z[(t + 1, i)] = z[(t, i)] + metric.dot(&tangents[t], &frame[i]);
        }
    }

    Ok(Embedding {
        x0: points[0].clone(),
        frame0,
        z,
        spectrum,
        tangent_energy,
        options: opts,
    })
}

/// Rebuilds the manifold curve from its development.
///
/// `X_k` is the point of `M` reached from `X_{k−1}` by the tangent step
/// `Σ_i V_i(X_{k−1}) dz[k−1][i]`, corrected back onto `M` along the normal
/// space at `X_{k−1}`; the frame is then transported to `X_k`.
pub fn reconstruct<M: LevelSetManifold + ?Sized>(m: &M, e: &Embedding) -> Result<Vec<AmbientVector>> {
    let metric = m.metric();
    metric.check(&e.x0)?;
    if e.frame0.len() != e.dim() {
        return Err(Error::Dimension {
            expected: e.dim(),
            found: e.frame0.len(),
        });
    }
    let dz = e.increments();
    let mut x = e.x0.clone();
    let mut basis = NormalBasis::at(m, &x).map_err(|err| err.at_step(0))?;
    let mut frame = e.frame0.vectors.clone();
    let mut out = Vec::with_capacity(e.len());
    out.push(x.clone());
    for k in 1..e.len() {
        let mut trial = x.clone();
        for (i, v) in frame.iter().enumerate() {
            trial.axpy(dz[(k - 1, i)], v, 1.0);
        }
        let next = retract_along(m, &basis, &trial, e.options.projection)
            .map_err(|err| err.at_step(k))?
            .point;
        let next_basis = NormalBasis::at(m, &next).map_err(|err| err.at_step(k))?;
        frame = step_vectors(metric, &basis, &next_basis, &frame, e.options.renormalize)
            .map_err(|err| err.at_step(k))?;
        x = next;
        basis = next_basis;
        out.push(x.clone());
    }
    Ok(out)
}

/// Reconstruction quality at one embedding dimension.
#[derive(Debug, Clone)]
pub struct RoundtripRow {
    pub dim: usize,
    /// Captured energy computed from the development increments.
    pub captured_energy: f64,
    /// The spectrum's cumulative fraction at `dim`.
    pub spectrum_fraction: f64,
    /// `‖X̂_t − X_t‖` per point.
    pub errors: Vec<f64>,
    pub mean_error: f64,
    pub max_error: f64,
    pub embedding: Embedding,
    pub reconstruction: Vec<AmbientVector>,
}

#[derive(Debug, Clone)]
pub struct RoundtripReport {
    pub rows: Vec<RoundtripRow>,
    /// RMS velocity norm of the input curve.
    pub tangent_scale: f64,
}

/// Embeds and reconstructs at each requested dimension.
pub fn roundtrip_report<M: LevelSetManifold + ?Sized>(
    m: &M,
    points: &[AmbientVector],
    dims: &[usize],
    opts: EmbedOptions,
) -> Result<RoundtripReport> {
    if dims.is_empty() {
        return Err(Error::Parameter("no embedding dimensions requested".into()));
    }
    if let Some(0) = dims.iter().copied().find(|&d| d == 0) {
        return Err(Error::Parameter("embedding dimension must be at least 1".into()));
    }
    let metric = m.metric();
    let mut rows = Vec::with_capacity(dims.len());
    let mut tangent_scale = 0.0;
    for &dim in dims {
        let e = embed(m, points, dim, opts)?;
        tangent_scale = (e.tangent_energy / (points.len() - 1) as f64).sqrt();
        let rec = reconstruct(m, &e)?;
        let errors: Vec<f64> = rec
            .iter()
            .zip(points)
            .map(|(a, b)| metric.norm(&(a - b)))
            .collect();
        let mean_error = errors.iter().sum::<f64>() / errors.len() as f64;
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        rows.push(RoundtripRow {
            dim,
            captured_energy: e.captured_energy(),
            spectrum_fraction: e.spectrum.captured(dim),
            errors,
            mean_error,
            max_error,
            embedding: e,
            reconstruction: rec,
        });
    }
    Ok(RoundtripReport { rows, tangent_scale })
}
