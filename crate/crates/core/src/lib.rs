//! Physical-layer tag authentication: tag ensembles, the superposition
//! waveform, threshold detection, eavesdropper attacks and the
//! capacity / sphere-packing limits that bound them.

pub mod adversary;
pub mod bits;
pub mod bounds;
pub mod detector;
pub mod error;
pub mod harness;
pub mod params;
pub mod rng;
pub mod special;
pub mod tag_codec;
pub mod waveform;

pub use bits::BitVector;
pub use error::{Error, Result};
pub use params::SystemParams;
pub use rng::RngStream;
pub use tag_codec::{Key, Message, Tag, TagFunction};
