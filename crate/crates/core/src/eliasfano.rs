//! Double Elias-Fano list of per-bucket key prefix sums and bit offsets.
//!
//! Entry `i` stores the number of keys in buckets `< i` and the bit offset of
//! bucket `i` in the tree array. Offsets are stored as
//! `o_i - floor(beta * s_i)`, which removes most of their growth; `beta` is a
//! fixed-point number with [`BETA_FRAC_BITS`] fractional bits, normally the
//! average number of tree bits per key. Each list is then rescaled by
//! subtracting `i * delta` (`delta` being the smallest gap, possibly
//! negative) so it is monotone and starts at zero, and is encoded as
//! Elias-Fano: the lower `max(0, floor(log2(u / n)))` bits of every element
//! explicitly, the upper bits as unary gaps.
//!
//! Layout:
//!
//! * lower bits of the two lists are interleaved per entry (key count bits,
//!   then offset bits), so one lookup touches one region;
//! * each upper array has a two-level select inventory: the absolute position
//!   of every 2^14-th one (64 bits) and, relative to it, the position of
//!   every 2^8-th one (16 bits). Inventory entries of the two lists are
//!   interleaved as well.
//!
//! If a 16-bit relative entry would overflow, the absolute spacing is
//! halved until everything fits (at spacing 2^8 every relative entry is 0).

use std::io::{self, Read, Write};

use crate::bits::{read_bits, read_u32, read_u64, read_words, select_in_words, write_words, BitVec};

/// Fractional bits of the fixed-point offset slope.
pub const BETA_FRAC_BITS: u32 = 20;

/// `floor(beta * keys)` for a fixed-point `beta`.
#[inline]
fn scaled(beta: u64, keys: u64) -> i64 {
    ((beta as u128 * keys as u128) >> BETA_FRAC_BITS) as i64
}

/// Default log2 spacing of the absolute inventory.
pub const ABS_INVENTORY_SHIFT: u32 = 14;
/// log2 spacing of the relative inventory (`q`).
pub const REL_INVENTORY_SHIFT: u32 = 8;

const KEYS: usize = 0;
const BITS: usize = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleEliasFano {
    len: usize,
    beta: u64,
    delta: [i64; 2],
    width: [u32; 2],
    lower: BitVec,
    upper: [BitVec; 2],
    abs_shift: u32,
    inventory_abs: Vec<u64>,
    inventory_rel: Vec<u16>,
}

struct EncodedList {
    delta: i64,
    width: u32,
    values: Vec<u64>,
    upper: BitVec,
}

fn encode_list(values: &[i64]) -> EncodedList {
    let n = values.len();
    let delta = values.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
    let rescaled: Vec<u64> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = v - i as i64 * delta;
            debug_assert!(r >= 0);
            r as u64
        })
        .collect();
    debug_assert!(rescaled.windows(2).all(|w| w[0] <= w[1]));
    let universe = *rescaled.last().unwrap();
    let width = if universe >= n as u64 { (universe / n as u64).ilog2() } else { 0 };
    let mut upper = BitVec::zeros((universe >> width) as usize + n);
    for (i, &v) in rescaled.iter().enumerate() {
        upper.set((v >> width) as usize + i);
    }
    EncodedList {
        delta,
        width,
        values: rescaled,
        upper,
    }
}

/// Positions of every `2^REL_INVENTORY_SHIFT`-th one.
fn sampled_ones(upper: &BitVec) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rank = 0u64;
    for (idx, &word) in upper.words().iter().enumerate() {
        let mut w = word;
        while w != 0 {
            if rank.is_multiple_of(1 << REL_INVENTORY_SHIFT) {
                out.push(idx as u64 * 64 + w.trailing_zeros() as u64);
            }
            rank += 1;
            w &= w - 1;
        }
    }
    out
}

/// Builds interleaved inventories with the largest absolute spacing whose
/// relative entries fit in 16 bits.
fn build_inventories(samples: &[Vec<u64>; 2]) -> (u32, Vec<u64>, Vec<u16>) {
    let per_abs = |shift: u32| 1usize << (shift - REL_INVENTORY_SHIFT);
    let fits = |shift: u32| {
        samples.iter().all(|s| {
            s.iter()
                .enumerate()
                .all(|(j, &pos)| pos - s[j / per_abs(shift) * per_abs(shift)] <= u16::MAX as u64)
        })
    };
    let abs_shift = (REL_INVENTORY_SHIFT..=ABS_INVENTORY_SHIFT)
        .rev()
        .find(|&shift| fits(shift))
        .expect("spacing 2^8 always fits");
    let step = per_abs(abs_shift);
    let count = samples[0].len();
    let mut abs = Vec::with_capacity(2 * count.div_ceil(step));
    let mut rel = Vec::with_capacity(2 * count);
    for j in 0..count {
        if j % step == 0 {
            abs.push(samples[KEYS][j]);
            abs.push(samples[BITS][j]);
        }
        let base = j / step * step;
        rel.push((samples[KEYS][j] - samples[KEYS][base]) as u16);
        rel.push((samples[BITS][j] - samples[BITS][base]) as u16);
    }
    (abs_shift, abs, rel)
}

impl DoubleEliasFano {
    /// Builds the structure from key prefix sums and bucket bit offsets.
    ///
    /// Both lists have `n_buckets + 1` entries, start at zero and are
    /// non-decreasing.
    pub fn build(cum_keys: &[u64], bit_offsets: &[u64], beta: u64) -> Self {
        assert_eq!(cum_keys.len(), bit_offsets.len());
        assert!(!cum_keys.is_empty());
        assert!(cum_keys[0] == 0 && bit_offsets[0] == 0);
        assert!(cum_keys.windows(2).all(|w| w[0] <= w[1]), "key counts not monotone");
        assert!(bit_offsets.windows(2).all(|w| w[0] <= w[1]), "offsets not monotone");
        let len = cum_keys.len();

        let keys: Vec<i64> = cum_keys.iter().map(|&s| s as i64).collect();
        let bits: Vec<i64> = cum_keys
            .iter()
            .zip(bit_offsets)
            .map(|(&s, &o)| o as i64 - scaled(beta, s))
            .collect();
        let lists = [encode_list(&keys), encode_list(&bits)];

        let mut lower = BitVec::new();
        for i in 0..len {
            for list in &lists {
                lower.push_bits(list.values[i], list.width);
            }
        }
        let samples = [sampled_ones(&lists[KEYS].upper), sampled_ones(&lists[BITS].upper)];
        let (abs_shift, inventory_abs, inventory_rel) = build_inventories(&samples);
        let [k, b] = lists;
        Self {
            len,
            beta,
            delta: [k.delta, b.delta],
            width: [k.width, b.width],
            lower,
            upper: [k.upper, b.upper],
            abs_shift,
            inventory_abs,
            inventory_rel,
        }
    }

    /// Number of entries (`n_buckets + 1`).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn beta(&self) -> u64 {
        self.beta
    }

    /// log2 of the absolute inventory spacing actually used.
    pub fn abs_inventory_shift(&self) -> u32 {
        self.abs_shift
    }

    pub fn lower_widths(&self) -> (u32, u32) {
        (self.width[KEYS], self.width[BITS])
    }

    /// Position of the `k`-th one (0-based) of one upper array.
    #[inline]
    fn select(&self, list: usize, k: usize) -> usize {
        let abs = self.inventory_abs[2 * (k >> self.abs_shift) + list] as usize;
        let rel = self.inventory_rel[2 * (k >> REL_INVENTORY_SHIFT) + list] as usize;
        let pos = abs + rel;
        let rest = k & ((1 << REL_INVENTORY_SHIFT) - 1);
        if rest == 0 {
            pos
        } else {
            select_in_words(self.upper[list].words(), pos + 1, rest)
        }
    }

    /// Upper-bits array of the key-count (`list == 0`) or offset (`list == 1`) list.
    pub fn upper_bits(&self, list: usize) -> &BitVec {
        &self.upper[list]
    }

    /// Position of the `k`-th one of the key-count (`list == 0`) or offset
    /// (`list == 1`) upper array.
    pub fn select_upper(&self, list: usize, k: usize) -> usize {
        assert!(list < 2 && k < self.len);
        self.select(list, k)
    }

    #[inline]
    fn lower_pos(&self, i: usize) -> usize {
        i * (self.width[KEYS] + self.width[BITS]) as usize
    }

    #[inline]
    fn decode(&self, list: usize, i: usize, upper_pos: usize, lower_pos: usize) -> i64 {
        let low = read_bits(self.lower.words(), lower_pos, self.width[list]);
        let stored = ((upper_pos - i) as u64) << self.width[list] | low;
        stored as i64 + i as i64 * self.delta[list]
    }

    #[inline]
    fn offset(&self, keys: i64, rebased: i64) -> u64 {
        (rebased + scaled(self.beta, keys as u64)) as u64
    }

    /// `(keys before bucket i, bit offset of bucket i)`, for `i <= n_buckets`.
    pub fn get(&self, i: usize) -> (u64, u64) {
        assert!(i < self.len);
        let lp = self.lower_pos(i);
        let keys = self.decode(KEYS, i, self.select(KEYS, i), lp);
        let bits = self.decode(BITS, i, self.select(BITS, i), lp + self.width[KEYS] as usize);
        (keys as u64, self.offset(keys, bits))
    }

    /// `(keys before bucket i, keys before bucket i + 1, bit offset of
    /// bucket i)`, for `i < n_buckets`.
    #[inline]
    pub fn get_pair(&self, i: usize) -> (u64, u64, u64) {
        debug_assert!(i + 1 < self.len);
        let lp = self.lower_pos(i);
        let pk = self.select(KEYS, i);
        let keys = self.decode(KEYS, i, pk, lp);
        let pk_next = select_in_words(self.upper[KEYS].words(), pk + 1, 1);
        let keys_next = self.decode(KEYS, i + 1, pk_next, self.lower_pos(i + 1));
        let bits = self.decode(BITS, i, self.select(BITS, i), lp + self.width[KEYS] as usize);
        (keys as u64, keys_next as u64, self.offset(keys, bits))
    }

    /// Bits used by the lower array, the two upper arrays and the inventories.
    pub fn size_bits(&self) -> usize {
        self.lower.size_bits()
            + self.upper[KEYS].size_bits()
            + self.upper[BITS].size_bits()
            + self.inventory_abs.len() * 64
            + self.inventory_rel.len() * 16
    }

    /// Exact payload bits, before word rounding and without inventories.
    pub fn payload_bits(&self) -> usize {
        self.lower.len() + self.upper[KEYS].len() + self.upper[BITS].len()
    }

    pub(crate) fn write_to<W: Write>(&self, out: &mut W) -> io::Result<()> {
        out.write_all(&(self.len as u64).to_le_bytes())?;
        for d in self.delta {
            out.write_all(&d.to_le_bytes())?;
        }
        for w in self.width {
            out.write_all(&w.to_le_bytes())?;
        }
        out.write_all(&self.abs_shift.to_le_bytes())?;
        self.lower.write_to(out)?;
        self.upper[KEYS].write_to(out)?;
        self.upper[BITS].write_to(out)?;
        out.write_all(&(self.inventory_abs.len() as u64).to_le_bytes())?;
        write_words(out, &self.inventory_abs)?;
        out.write_all(&(self.inventory_rel.len() as u64).to_le_bytes())?;
        write_words(out, &pack_u16(&self.inventory_rel))
    }

    pub(crate) fn read_from<R: Read>(input: &mut R, beta: u64) -> io::Result<Self> {
        let invalid = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
        let len = read_u64(input)? as usize;
        let delta = [read_u64(input)? as i64, read_u64(input)? as i64];
        let width = [read_u32(input)?, read_u32(input)?];
        let abs_shift = read_u32(input)?;
        if !(REL_INVENTORY_SHIFT..=ABS_INVENTORY_SHIFT).contains(&abs_shift) {
            return Err(invalid("bad inventory spacing"));
        }
        if width.iter().any(|&w| w >= 64) {
            return Err(invalid("bad lower-bit width"));
        }
        let lower = BitVec::read_from(input)?;
        let upper = [BitVec::read_from(input)?, BitVec::read_from(input)?];
        let abs_len = read_u64(input)? as usize;
        let inventory_abs = read_words(input, abs_len)?;
        let rel_len = read_u64(input)? as usize;
        let inventory_rel = unpack_u16(&read_words(input, rel_len.div_ceil(4))?, rel_len);

        let rel_entries = len.div_ceil(1 << REL_INVENTORY_SHIFT);
        let abs_entries = len.div_ceil(1 << abs_shift);
        if len == 0
            || lower.len() != len * (width[0] + width[1]) as usize
            || upper.iter().any(|u| u.count_ones() != len)
            || inventory_rel.len() != 2 * rel_entries
            || inventory_abs.len() != 2 * abs_entries
        {
            return Err(invalid("inconsistent Elias-Fano section"));
        }
        Ok(Self {
            len,
            beta,
            delta,
            width,
            lower,
            upper,
            abs_shift,
            inventory_abs,
            inventory_rel,
        })
    }
}

fn pack_u16(values: &[u16]) -> Vec<u64> {
    values
        .chunks(4)
        .map(|c| c.iter().enumerate().fold(0u64, |w, (j, &v)| w | (v as u64) << (16 * j)))
        .collect()
}

fn unpack_u16(words: &[u64], len: usize) -> Vec<u16> {
    (0..len).map(|i| (words[i / 4] >> (16 * (i % 4))) as u16).collect()
}
