//! Bit-interleaved coded modulation with rotations: (5,7) convolutional
//! code, generator-split mapping onto blocks, exhaustive APP demapping and
//! BCJR decoding in an iterative loop.

pub mod conv;
pub mod demap;
pub mod mapping;
pub mod sim;

pub use conv::{BcjrOutput, ConvCode, Metric, LLR_CLAMP};
pub use demap::Demapper;
pub use mapping::{FrameConfig, FrameMapper, MappedFrame};
pub use sim::{simulate_fer, FerConfig, FerCurve, FerPoint, Link, NoiseMode, ReceivedFrame, StopRule};
