//! Golomb-Rice storage for splitting trees.
//!
//! Each bucket occupies a contiguous, bit-aligned region holding first the
//! fixed parts of all its codes (in preorder), then all the unary parts (in
//! the same order). A value `v` with parameter `r` contributes its low `r`
//! bits to the fixed section and `v >> r` zeros followed by a one to the
//! unary section.
//!
//! Because the fixed section of a subtree has a length known from the
//! strategy tables, skipping a subtree is a pointer bump on the fixed cursor
//! plus a selection of `nodes` ones on the unary cursor.

use std::io::{self, Read, Write};

use crate::bits::{read_bits, select_in_words, BitVec};

/// A value together with its Rice parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RiceCode {
    pub value: u64,
    pub param: u32,
}

impl RiceCode {
    pub fn new(value: u64, param: u32) -> Self {
        debug_assert!(param < 64);
        Self { value, param }
    }

    pub fn bit_len(&self) -> usize {
        self.param as usize + (self.value >> self.param) as usize + 1
    }
}

/// Length in bits of the encoded block for `codes`.
pub fn block_len(codes: &[RiceCode]) -> usize {
    codes.iter().map(RiceCode::bit_len).sum()
}

/// Immutable concatenation of encoded buckets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RiceBitVector {
    bits: BitVec,
}

impl RiceBitVector {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, pos: usize) -> bool {
        self.bits.get(pos)
    }

    pub fn words(&self) -> &[u64] {
        self.bits.words()
    }

    pub fn size_bits(&self) -> usize {
        self.bits.size_bits()
    }

    /// A reader over the bucket starting at `start` whose fixed section is
    /// `fixed_len` bits long.
    #[inline]
    pub fn reader(&self, start: usize, fixed_len: usize) -> RiceReader<'_> {
        RiceReader {
            words: self.bits.words(),
            fixed_pos: start,
            unary_pos: start + fixed_len,
        }
    }

    pub(crate) fn write_to<W: Write>(&self, out: &mut W) -> io::Result<()> {
        self.bits.write_to(out)
    }

    pub(crate) fn read_from<R: Read>(input: &mut R) -> io::Result<Self> {
        Ok(Self {
            bits: BitVec::read_from(input)?,
        })
    }
}

/// Encodes a single bucket.
pub fn encode_bucket(codes: &[RiceCode]) -> RiceBitVector {
    let mut builder = RiceBuilder::new();
    builder.append_bucket(codes);
    builder.finish()
}

#[derive(Debug, Default)]
pub struct RiceBuilder {
    bits: BitVec,
}

impl RiceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends one bucket and returns its starting bit offset.
    pub fn append_bucket(&mut self, codes: &[RiceCode]) -> usize {
        let start = self.bits.len();
        for c in codes {
            self.bits.push_bits(c.value, c.param);
        }
        for c in codes {
            self.bits.push_unary(c.value >> c.param);
        }
        start
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn finish(self) -> RiceBitVector {
        RiceBitVector { bits: self.bits }
    }
}

/// Cursor pair over one bucket. Readers are cheap and never shared.
#[derive(Clone, Debug)]
pub struct RiceReader<'a> {
    words: &'a [u64],
    fixed_pos: usize,
    unary_pos: usize,
}

impl RiceReader<'_> {
    /// Decodes the next code in preorder.
    #[inline]
    pub fn read_next(&mut self, param: u32) -> u64 {
        let fixed = read_bits(self.words, self.fixed_pos, param);
        self.fixed_pos += param as usize;
        let end = select_in_words(self.words, self.unary_pos, 1);
        let quotient = (end - self.unary_pos) as u64;
        self.unary_pos = end + 1;
        quotient << param | fixed
    }

    /// Skips a whole subtree given its total fixed bits and coded nodes.
    #[inline]
    pub fn skip_subtree(&mut self, fixed_bits: usize, nodes: usize) {
        self.fixed_pos += fixed_bits;
        if nodes > 0 {
            self.unary_pos = select_in_words(self.words, self.unary_pos, nodes) + 1;
        }
    }

    pub fn fixed_pos(&self) -> usize {
        self.fixed_pos
    }

    pub fn unary_pos(&self) -> usize {
        self.unary_pos
    }
}
