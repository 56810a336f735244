//! Named random streams derived from one root seed.
//!
//! Every consumer of randomness asks for a stream by path (for example
//! `["scene", 3, "cameras"]`). The stream seed is the SHA-256 digest of the
//! root seed and the path, so streams are independent of evaluation order and
//! of how many workers run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label<'a> {
    Name(&'a str),
    Index(u64),
}

impl<'a> From<&'a str> for Label<'a> {
    fn from(s: &'a str) -> Self {
        Label::Name(s)
    }
}

impl From<u64> for Label<'_> {
    fn from(i: u64) -> Self {
        Label::Index(i)
    }
}

impl From<usize> for Label<'_> {
    fn from(i: usize) -> Self {
        Label::Index(i as u64)
    }
}

impl From<u32> for Label<'_> {
    fn from(i: u32) -> Self {
        Label::Index(i as u64)
    }
}

/// Derives a stream from `root` and a label path.
pub fn stream(root: u64, path: &[Label<'_>]) -> Stream {
    let mut h = Sha256::new();
    h.update(b"pointgen/stream/v1");
    h.update(root.to_le_bytes());
    for label in path {
        match label {
            Label::Name(s) => {
                h.update([0u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
            Label::Index(i) => {
                h.update([1u8]);
                h.update(i.to_le_bytes());
            }
        }
    }
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(seed)
}

#[macro_export]
macro_rules! stream {
    ($root:expr $(, $label:expr)* $(,)?) => {
        $crate::rng::stream($root, &[$($crate::rng::Label::from($label)),*])
    };
}
