//! RecSplit minimal perfect hashing.
//!
//! A [`RecSplit`] maps each of the `n` keys it was built from to a distinct
//! integer in `[0, n)`. Keys are hashed to 128-bit signatures, distributed
//! into buckets of expected size `b`, and each bucket is split recursively
//! until parts have at most `ℓ` keys, where a bijection is found by brute
//! force. Only the indices of the functions that worked are stored, Rice
//! coded, plus a compact table of bucket prefix sums.
//!
//! Queries for keys outside the original set return an arbitrary value in
//! `[0, n)`; there is no membership test.
//!
//! ```
//! use recsplit::{BuildConfig, RecSplit};
//!
//! let keys: Vec<String> = (0..1000).map(|i| format!("key{i}")).collect();
//! let mphf = RecSplit::build(&keys, &BuildConfig::new(8, 100)).unwrap();
//! let mut seen = vec![false; keys.len()];
//! for k in &keys {
//!     let r = mphf.lookup(k);
//!     assert!(!seen[r]);
//!     seen[r] = true;
//! }
//! ```

pub mod analysis;
pub mod bits;
pub mod builder;
pub mod cli;
pub mod eliasfano;
pub mod evaluator;
pub mod format;
pub mod ricecodec;
pub mod signatures;
#[cfg(target_arch = "x86_64")]
mod simd;
pub mod strategy;

use std::io;

pub use builder::BuildConfig;
pub use evaluator::RecSplit;
pub use signatures::Signature;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two keys share a 128-bit signature; with a good hash this means the
    /// input contains a duplicate.
    #[error("duplicate key in input")]
    DuplicateKey,
    #[error("no function found among the first {max_index} for bucket {bucket} ({size} keys)")]
    SearchOverflow {
        bucket: usize,
        size: usize,
        max_index: u64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed structure: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
