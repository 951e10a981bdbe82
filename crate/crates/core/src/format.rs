//! Binary file format.
//!
//! All integers are little-endian; bit arrays are stored as a 64-bit bit
//! length followed by 64-bit words, bits LSB-first within each word.
//!
//! ```text
//! header (46 bytes)
//!   magic          8 bytes  "RECSPLIT"
//!   format_version u32      1
//!   leaf_size      u16
//!   bucket_size    u32
//!   n              u64
//!   seed           u64      seed of the XXH3-128 signature hash
//!   beta           u32      tree bits per key, fixed point with 20 fractional bits
//!   n_buckets      u64
//! Elias-Fano section
//!   entries        u64      n_buckets + 1
//!   delta          2 x i64  (key counts, offsets)
//!   width          2 x u32
//!   abs_shift      u32
//!   lower bits     bit array (interleaved per entry)
//!   upper bits     bit array (key counts)
//!   upper bits     bit array (offsets)
//!   abs inventory  u64 count, then count x u64 (interleaved)
//!   rel inventory  u64 count, then ceil(count / 4) words of packed u16
//! tree section
//!   trees          bit array
//! ```
//!
//! The function with index `i` at depth `d` of a splitting tree maps a
//! signature with low half `x` into `[0, m)` as
//! `(splitmix64(x + (d * 2^32 + i) * 0x9E3779B97F4A7C15) * m) >> 64`.

use std::io::{Read, Write};

use crate::eliasfano::DoubleEliasFano;
use crate::evaluator::RecSplit;
use crate::ricecodec::RiceBitVector;
use crate::strategy::{table_size, SplitStrategy, MAX_LEAF_SIZE};
use crate::{Error, Result};

pub const MAGIC: [u8; 8] = *b"RECSPLIT";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 46;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub format_version: u32,
    pub leaf_size: u16,
    pub bucket_size: u32,
    pub n: u64,
    pub seed: u64,
    pub beta: u32,
    pub n_buckets: u64,
}

impl Header {
    fn write_to<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(HEADER_LEN);
        buf.extend_from_slice(&MAGIC);
        buf.extend_from_slice(&self.format_version.to_le_bytes());
        buf.extend_from_slice(&self.leaf_size.to_le_bytes());
        buf.extend_from_slice(&self.bucket_size.to_le_bytes());
        buf.extend_from_slice(&self.n.to_le_bytes());
        buf.extend_from_slice(&self.seed.to_le_bytes());
        buf.extend_from_slice(&self.beta.to_le_bytes());
        buf.extend_from_slice(&self.n_buckets.to_le_bytes());
        debug_assert_eq!(buf.len(), HEADER_LEN);
        out.write_all(&buf)
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Self> {
        let mut buf = [0u8; HEADER_LEN];
        input.read_exact(&mut buf)?;
        if buf[..8] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u16_at = |i: usize| u16::from_le_bytes(buf[i..i + 2].try_into().unwrap());
        let u32_at = |i: usize| u32::from_le_bytes(buf[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(buf[i..i + 8].try_into().unwrap());
        let header = Header {
            format_version: u32_at(8),
            leaf_size: u16_at(12),
            bucket_size: u32_at(14),
            n: u64_at(18),
            seed: u64_at(26),
            beta: u32_at(34),
            n_buckets: u64_at(38),
        };
        if header.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported format version {}",
                header.format_version
            )));
        }
        if !(1..=MAX_LEAF_SIZE).contains(&(header.leaf_size as usize)) || header.bucket_size == 0 {
            return Err(Error::Format("bad leaf or bucket size".into()));
        }
        if header.n_buckets != header.n.div_ceil(header.bucket_size as u64) {
            return Err(Error::Format("bucket count does not match n".into()));
        }
        Ok(header)
    }
}

impl RecSplit {
    pub fn header(&self) -> Header {
        Header {
            format_version: FORMAT_VERSION,
            leaf_size: self.leaf_size() as u16,
            bucket_size: self.bucket_size() as u32,
            n: self.len() as u64,
            seed: self.seed(),
            beta: u32::try_from(self.beta()).expect("beta fits in 32 bits"),
            n_buckets: self.bucket_count() as u64,
        }
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<()> {
        self.header().write_to(out)?;
        self.elias_fano().write_to(out)?;
        self.trees().write_to(out)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    pub fn serialized_len(&self) -> usize {
        struct Counter(usize);
        impl Write for Counter {
            fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
                self.0 += buf.len();
                Ok(buf.len())
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let mut c = Counter(0);
        self.write_to(&mut c).expect("counting writer");
        c.0
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Self> {
        let h = Header::read_from(input)?;
        let ef = DoubleEliasFano::read_from(input, h.beta as u64)
            .map_err(|e| Error::Format(format!("Elias-Fano section: {e}")))?;
        let trees = RiceBitVector::read_from(input)
            .map_err(|e| Error::Format(format!("tree section: {e}")))?;
        if ef.len() as u64 != h.n_buckets + 1 {
            return Err(Error::Format("Elias-Fano length does not match bucket count".into()));
        }
        let (keys, bits) = ef.get(ef.len() - 1);
        if keys != h.n || bits != trees.len() as u64 {
            return Err(Error::Format("sections disagree on totals".into()));
        }
        let strategy = SplitStrategy::new(h.leaf_size as usize, table_size(h.bucket_size as usize));
        Ok(RecSplit::from_parts(
            h.leaf_size as usize,
            h.bucket_size as usize,
            h.seed,
            h.n,
            strategy,
            ef,
            trees,
        ))
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let r = Self::read_from(&mut bytes)?;
        if !bytes.is_empty() {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(r)
    }
}
