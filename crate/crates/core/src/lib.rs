//! Invertible low-dimensional development of curves on the manifold of
//! closed planar shapes.
//!
//! A sequence of shapes `X_0, …, X_{T−1}` (direction functions θ on a
//! uniform grid) is mapped to a curve `z` in R^L by taking the coordinates of
//! its velocities against a parallel moving frame. The frame's initial
//! condition is chosen by PCA of the velocities transported back to `X_0`.
//! Given `(X_0, frame0, z)` the original sequence is rebuilt by running the
//! development in reverse.
//!
//! The geometric machinery ([`manifold`], [`transport`]) works for any
//! level-set manifold with explicit normal generators; [`shape`] provides the
//! shape manifold and [`sphere`] the unit sphere used as a closed-form check.

pub mod cli;
pub mod embedding;
pub mod error;
pub mod io;
pub mod manifold;
pub mod metric;
pub mod report;
pub mod shape;
pub mod sphere;
pub mod synth;
pub mod transport;

pub use embedding::{
    curve_tangents, embed, pca_frame, pull_back_tangents, reconstruct, roundtrip_report, EmbedOptions,
    Embedding, PcaMethod, Spectrum, StreamingOptions, TangentSet,
};
pub use error::{Error, Result};
pub use manifold::{project_to_manifold, retract_along, tangent_project, LevelSetManifold, NormalBasis, ProjectionOptions};
pub use metric::{AmbientVector, QuadratureMetric};
pub use shape::{from_contour, to_contour, Contour, Shape, ShapeCurve, ShapeManifold};
pub use sphere::SphereManifold;
pub use transport::{parallel_frame, transport_along, transport_step, CurveTransport, Frame, Renormalize, TangentVector};
