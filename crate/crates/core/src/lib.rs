//! Block-permutation-based encryption (BPBE) for encryption-then-compression
//! pipelines, in the shared-key ("conventional") and per-channel-key
//! ("proposed") regimes, plus the tooling used to evaluate it:
//!
//! * [`keyspace`]: exact key-space counts for both regimes,
//! * [`jps`]: a greedy jigsaw-puzzle-solver attack,
//! * [`metrics`]: Dc/Nc/Lc attack scores, 24-bit color entropy and
//!   hue/saturation histograms,
//! * [`codec`]: a LOCO-I style lossless coder for bitrate comparisons.
//!
//! All randomness flows from a [`KeyBundle`] through [`keystream`], so every
//! ciphertext is reproducible bit-for-bit.

pub mod cipher;
pub mod codec;
pub mod dihedral;
mod error;
pub mod jps;
pub mod keyspace;
pub mod keystream;
pub mod metrics;
pub mod model;

pub use cipher::{decrypt, encrypt, CipherConfig, Step, StepSet};
pub use dihedral::Dihedral;
pub use error::{Error, Result};
pub use model::{BlockGrid, BlockSpec, Channel, KeyBundle, Mode, RgbImage};
