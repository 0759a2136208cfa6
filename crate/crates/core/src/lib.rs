//! Rotated coded modulation over Nakagami-m block-fading channels.
//!
//! The crate covers the whole analysis chain for schemes built from a binary
//! code, a complex-plane constellation and `K` real rotations of dimension
//! `N` spread over `B = K N` fading blocks:
//!
//! - [`constellation`]: QPSK / 16-QAM with Gray and set-partitioning labels.
//! - [`rotation`]: the built-in rotation catalog and the exhaustive
//!   full-diversity check.
//! - [`channel`]: Nakagami-m gain sampling and the block-fading channel.
//! - [`mutual_info`]: Gaussian and discrete-input instantaneous mutual
//!   information (closed form, Gauss-Hermite, Monte Carlo).
//! - [`outage`]: Monte Carlo outage probability and slope fitting.
//! - [`exponents`]: closed-form diversity exponents and block diversity.
//! - [`codedmod`]: the (5,7) convolutional BICM chain with exhaustive APP
//!   demapping and BCJR decoding.
//!
//! Monte Carlo work goes through [`exec::Exec`], which runs on rayon when the
//! `parallel` feature is enabled and sequentially otherwise. Every trial draws
//! from its own counter-derived random stream, so results do not depend on
//! the number of worker threads.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod codedmod;
pub mod constellation;
pub mod exec;
pub mod exponents;
pub mod mutual_info;
pub mod outage;
pub mod quadrature;
pub mod rotation;
pub mod stats;

pub use num_complex::Complex64;

pub use channel::{ChannelRealization, FadingSpec, NormalizedFading};
pub use constellation::{Constellation, Labeling};
pub use exec::Exec;
pub use mutual_info::{MiEstimate, MiMethod, Scheme};
pub use outage::{InputModel, SimCurve};
pub use rotation::Rotation;

/// Errors reported by the library.
#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported M={0}: only M=2 (QPSK) and M=4 (16-QAM) are available")]
    UnsupportedBitsPerSymbol(usize),
    #[error("unknown constellation '{0}'")]
    UnknownConstellation(String),
    #[error("unknown rotation '{0}'")]
    UnknownRotation(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("enumeration of {requested} items exceeds the cap of {cap}")]
    CapExceeded { requested: u128, cap: u128 },
    #[error("exhaustive demapping of N={dim} symbols with M={bits_per_symbol} bits needs {candidates} candidates, above the cap of {cap}")]
    DemapperCap { dim: usize, bits_per_symbol: usize, candidates: u128, cap: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("Gauss-Hermite quadrature is limited to N <= 2 (got N={0}); use Monte Carlo")]
    QuadratureDimension(usize),
    #[error("insufficient qualified points for a slope fit: {found} found, 3 required")]
    InsufficientPoints { found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
