//! Word-backed bit arrays and broadword selection.
//!
//! Bits are stored LSB-first inside 64-bit words: bit `i` of the array is bit
//! `i % 64` of word `i / 64`. Bits past the logical length are always zero, so
//! two arrays with the same contents have identical word vectors.

use std::io::{self, Read, Write};

const ONES_STEP_4: u64 = 0x1111_1111_1111_1111;
const ONES_STEP_8: u64 = 0x0101_0101_0101_0101;
const MSBS_STEP_8: u64 = 0x80 * ONES_STEP_8;

/// `SELECT_IN_BYTE[b | r << 8]` is the position of the `r`-th (0-based) one in
/// byte `b`, or 8 if `b` has at most `r` ones.
static SELECT_IN_BYTE: [u8; 2048] = build_select_in_byte();

const fn build_select_in_byte() -> [u8; 2048] {
    let mut table = [8u8; 2048];
    let mut byte = 0;
    while byte < 256 {
        let mut rank = 0;
        let mut bit = 0;
        while bit < 8 {
            if byte & (1 << bit) != 0 {
                table[byte | (rank << 8)] = bit as u8;
                rank += 1;
            }
            bit += 1;
        }
        byte += 1;
    }
    table
}

/// Position of the `rank`-th (0-based) one in `word`.
///
/// `rank` must be smaller than `word.count_ones()`.
#[inline]
pub fn select_in_word(word: u64, rank: u32) -> u32 {
    debug_assert!(rank < word.count_ones());
    #[cfg(all(target_arch = "x86_64", target_feature = "bmi2"))]
    {
        // SAFETY: guarded by the bmi2 target feature.
        unsafe { std::arch::x86_64::_pdep_u64(1u64 << rank, word).trailing_zeros() }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "bmi2")))]
    {
        let mut s = word - ((word & (0xA * ONES_STEP_4)) >> 1);
        s = (s & (0x3 * ONES_STEP_4)) + ((s >> 2) & (0x3 * ONES_STEP_4));
        s = (s + (s >> 4)) & (0xF * ONES_STEP_8);
        let byte_sums = s.wrapping_mul(ONES_STEP_8);

        let rank_step_8 = rank as u64 * ONES_STEP_8;
        let geq_rank = ((rank_step_8 | MSBS_STEP_8) - byte_sums) & MSBS_STEP_8;
        let place = geq_rank.count_ones() * 8;
        let byte_rank = rank as u64 - (((byte_sums << 8) >> place) & 0xFF);
        place + SELECT_IN_BYTE[(((word >> place) & 0xFF) | (byte_rank << 8)) as usize] as u32
    }
}

/// Position of the `k`-th one (1-based) at or after bit `start`.
///
/// Scans word by word with popcounts, then selects inside the final word.
/// At least `k` ones must exist at or after `start`.
#[inline]
pub fn select_in_words(words: &[u64], start: usize, k: usize) -> usize {
    debug_assert!(k >= 1);
    let mut idx = start / 64;
    let mut word = words[idx] & (u64::MAX << (start % 64));
    let mut remaining = k;
    loop {
        let ones = word.count_ones() as usize;
        if ones >= remaining {
            return idx * 64 + select_in_word(word, (remaining - 1) as u32) as usize;
        }
        remaining -= ones;
        idx += 1;
        word = words[idx];
    }
}

/// Append-only bit array with random-access reads.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

impl BitVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// An all-zero array of `len` bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Appends the low `width` bits of `value` (`width <= 64`).
    pub fn push_bits(&mut self, value: u64, width: u32) {
        if width == 0 {
            return;
        }
        debug_assert!(width <= 64);
        let value = if width == 64 { value } else { value & ((1u64 << width) - 1) };
        let offset = (self.len % 64) as u32;
        if offset == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().unwrap() |= value << offset;
            if offset + width > 64 {
                self.words.push(value >> (64 - offset));
            }
        }
        self.len += width as usize;
    }

    /// Appends `zeros` zero bits followed by a single one.
    pub fn push_unary(&mut self, zeros: u64) {
        let new_len = self.len + zeros as usize;
        self.words.resize(new_len.div_ceil(64), 0);
        self.len = new_len;
        self.push_bits(1, 1);
    }

    pub fn set(&mut self, pos: usize) {
        debug_assert!(pos < self.len);
        self.words[pos / 64] |= 1u64 << (pos % 64);
    }

    #[inline]
    pub fn get(&self, pos: usize) -> bool {
        debug_assert!(pos < self.len);
        self.words[pos / 64] >> (pos % 64) & 1 == 1
    }

    /// Reads `width <= 64` bits starting at `pos`.
    #[inline]
    pub fn get_bits(&self, pos: usize, width: u32) -> u64 {
        read_bits(&self.words, pos, width)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Size in bits of the backing words.
    pub fn size_bits(&self) -> usize {
        self.words.len() * 64
    }

    pub(crate) fn write_to<W: Write>(&self, out: &mut W) -> io::Result<()> {
        out.write_all(&(self.len as u64).to_le_bytes())?;
        write_words(out, &self.words)
    }

    pub(crate) fn read_from<R: Read>(input: &mut R) -> io::Result<Self> {
        let len = read_u64(input)? as usize;
        let words = read_words(input, len.div_ceil(64))?;
        if !len.is_multiple_of(64) && words.last().is_some_and(|w| w >> (len % 64) != 0) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "nonzero padding bits in bit array",
            ));
        }
        Ok(Self { words, len })
    }
}

/// Reads `width <= 64` bits at `pos` from an LSB-first word array.
#[inline]
pub fn read_bits(words: &[u64], pos: usize, width: u32) -> u64 {
    if width == 0 {
        return 0;
    }
    let idx = pos / 64;
    let offset = (pos % 64) as u32;
    let mut value = words[idx] >> offset;
    if offset + width > 64 {
        value |= words[idx + 1] << (64 - offset);
    }
    if width == 64 {
        value
    } else {
        value & ((1u64 << width) - 1)
    }
}

pub(crate) fn write_words<W: Write>(out: &mut W, words: &[u64]) -> io::Result<()> {
    let mut buf = Vec::with_capacity(words.len() * 8);
    for w in words {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    out.write_all(&buf)
}

pub(crate) fn read_words<R: Read>(input: &mut R, count: usize) -> io::Result<Vec<u64>> {
    let mut buf = vec![0u8; count.checked_mul(8).ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidData, "word count overflow")
    })?];
    input.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub(crate) fn read_u64<R: Read>(input: &mut R) -> io::Result<u64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub(crate) fn read_u32<R: Read>(input: &mut R) -> io::Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_select(word: u64, rank: u32) -> u32 {
        let mut seen = 0;
        for bit in 0..64 {
            if word >> bit & 1 == 1 {
                if seen == rank {
                    return bit;
                }
                seen += 1;
            }
        }
        panic!("not enough ones");
    }

    fn naive_select_from(bits: &BitVec, start: usize, k: usize) -> usize {
        let mut seen = 0;
        for pos in start..bits.len() {
            if bits.get(pos) {
                seen += 1;
                if seen == k {
                    return pos;
                }
            }
        }
        panic!("not enough ones");
    }

    #[test]
    fn select_single_terminator() {
        assert_eq!(select_in_words(&[1], 0, 1), 0);
        assert_eq!(select_in_word(1 << 63, 0), 63);
        assert_eq!(select_in_word(u64::MAX, 63), 63);
    }

    #[test]
    fn select_in_word_matches_naive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            // Vary density so sparse and dense words both appear.
            let word = match rng.gen_range(0..3) {
                0 => rng.gen::<u64>(),
                1 => rng.gen::<u64>() & rng.gen::<u64>() & rng.gen::<u64>(),
                _ => rng.gen::<u64>() | rng.gen::<u64>(),
            };
            if word == 0 {
                continue;
            }
            let rank = rng.gen_range(0..word.count_ones());
            assert_eq!(select_in_word(word, rank), naive_select(word, rank), "{word:#x} {rank}");
        }
    }

    #[test]
    fn push_and_read_across_words() {
        let mut bv = BitVec::new();
        bv.push_bits(0b101, 3);
        bv.push_bits(u64::MAX, 64);
        bv.push_bits(0x1234, 16);
        assert_eq!(bv.len(), 83);
        assert_eq!(bv.get_bits(0, 3), 0b101);
        assert_eq!(bv.get_bits(3, 64), u64::MAX);
        assert_eq!(bv.get_bits(67, 16), 0x1234);
        bv.push_unary(70);
        assert_eq!(bv.len(), 83 + 71);
        assert!(bv.get(83 + 70));
        assert_eq!(bv.count_ones(), 2 + 64 + 5 + 1);
    }

    proptest! {
        #[test]
        fn cross_word_select_matches_naive(
            gaps in prop::collection::vec(0u64..200, 1..200),
            start_frac in 0.0f64..1.0,
        ) {
            let mut bv = BitVec::new();
            for &g in &gaps {
                bv.push_unary(g);
            }
            let start = ((bv.len() - 1) as f64 * start_frac) as usize;
            let available = (start..bv.len()).filter(|&p| bv.get(p)).count();
            for k in 1..=available {
                prop_assert_eq!(select_in_words(bv.words(), start, k), naive_select_from(&bv, start, k));
            }
        }

        #[test]
        fn bits_roundtrip(values in prop::collection::vec((any::<u64>(), 0u32..=64), 0..100)) {
            let mut bv = BitVec::new();
            for &(v, w) in &values {
                bv.push_bits(v, w);
            }
            let mut pos = 0;
            for &(v, w) in &values {
                let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
                prop_assert_eq!(bv.get_bits(pos, w), v & mask);
                pos += w as usize;
            }
            let mut buf = Vec::new();
            bv.write_to(&mut buf).unwrap();
            prop_assert_eq!(BitVec::read_from(&mut buf.as_slice()).unwrap(), bv);
        }
    }
}
