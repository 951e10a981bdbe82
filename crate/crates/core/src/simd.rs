//! AVX-512 versions of the two searches. Each trial round evaluates eight
//! consecutive function indices on one key at a time, so the first
//! successful lane is the same minimal index the scalar loops find.

use std::arch::x86_64::*;

use crate::signatures::GOLDEN_GAMMA;
use crate::strategy::MAX_FANOUT;

pub(crate) fn available() -> bool {
    std::arch::is_x86_feature_detected!("avx512dq")
}

/// `remap(key, f_j, m)` in every lane, given `key + f_j * GOLDEN_GAMMA`.
#[inline]
#[target_feature(enable = "avx512f,avx512dq")]
fn remap8(x: __m512i, m: __m512i) -> __m512i {
    let mut z = x;
    z = _mm512_xor_si512(z, _mm512_srli_epi64::<30>(z));
    z = _mm512_mullo_epi64(z, _mm512_set1_epi64(0xBF58_476D_1CE4_E5B9u64 as i64));
    z = _mm512_xor_si512(z, _mm512_srli_epi64::<27>(z));
    z = _mm512_mullo_epi64(z, _mm512_set1_epi64(0x94D0_49BB_1331_11EBu64 as i64));
    z = _mm512_xor_si512(z, _mm512_srli_epi64::<31>(z));
    // High 64 bits of z * m for m < 2^32, from two 32 x 32 products.
    let lo = _mm512_mul_epu32(z, m);
    let hi = _mm512_mul_epu32(_mm512_srli_epi64::<32>(z), m);
    _mm512_srli_epi64::<32>(_mm512_add_epi64(hi, _mm512_srli_epi64::<32>(lo)))
}

#[inline]
#[target_feature(enable = "avx512f,avx512dq")]
fn lane_offsets(base: u64) -> __m512i {
    let offsets: [u64; 8] = std::array::from_fn(|j| (base + j as u64).wrapping_mul(GOLDEN_GAMMA));
    // SAFETY: an array of eight u64 is 64 bytes; the load is unaligned.
    unsafe { _mm512_loadu_si512(offsets.as_ptr().cast()) }
}

/// Index of the first set lane among those below `max_index - i`.
#[inline]
fn first_hit(hits: u8, i: u64, max_index: u64) -> Option<Option<u64>> {
    if hits == 0 {
        return None;
    }
    let index = i + hits.trailing_zeros() as u64;
    Some((index < max_index).then_some(index))
}

#[target_feature(enable = "avx512f,avx512dq")]
pub(crate) fn find_bijection(keys: &[u64], base: u64, max_index: u64) -> Option<u64> {
    let m = keys.len();
    debug_assert!((2..=32).contains(&m));
    let mv = _mm512_set1_epi64(m as i64);
    let full = _mm512_set1_epi64(((1u64 << m) - 1) as i64);
    let one = _mm512_set1_epi64(1);
    let step = _mm512_set1_epi64(8u64.wrapping_mul(GOLDEN_GAMMA) as i64);
    let mut offsets = lane_offsets(base);
    let mut i = 0;
    while i < max_index {
        let mut mask = _mm512_setzero_si512();
        for &k in keys {
            let r = remap8(_mm512_add_epi64(_mm512_set1_epi64(k as i64), offsets), mv);
            mask = _mm512_or_si512(mask, _mm512_sllv_epi64(one, r));
        }
        if let Some(found) = first_hit(_mm512_cmpeq_epi64_mask(mask, full), i, max_index) {
            return found;
        }
        offsets = _mm512_add_epi64(offsets, step);
        i += 8;
    }
    None
}

/// A split succeeds iff for every boundary `j * unit` (`j < fanout`) exactly
/// `j * unit` keys fall below it.
#[target_feature(enable = "avx512f,avx512dq")]
pub(crate) fn find_split(keys: &[u64], unit: usize, base: u64, max_index: u64) -> Option<u64> {
    let m = keys.len();
    let fanout = m.div_ceil(unit);
    debug_assert!((2..=MAX_FANOUT).contains(&fanout));
    let mv = _mm512_set1_epi64(m as i64);
    let one = _mm512_set1_epi64(1);
    let step = _mm512_set1_epi64(8u64.wrapping_mul(GOLDEN_GAMMA) as i64);
    let bounds: [__m512i; MAX_FANOUT - 1] =
        std::array::from_fn(|j| _mm512_set1_epi64(((j + 1) * unit) as i64));
    let mut offsets = lane_offsets(base);
    let mut i = 0;
    while i < max_index {
        let mut below = [_mm512_setzero_si512(); MAX_FANOUT - 1];
        for &k in keys {
            let r = remap8(_mm512_add_epi64(_mm512_set1_epi64(k as i64), offsets), mv);
            for j in 0..fanout - 1 {
                let lt = _mm512_cmplt_epu64_mask(r, bounds[j]);
                below[j] = _mm512_mask_add_epi64(below[j], lt, below[j], one);
            }
        }
        let mut hits = 0xFFu8;
        for j in 0..fanout - 1 {
            hits &= _mm512_cmpeq_epi64_mask(below[j], bounds[j]);
        }
        if let Some(found) = first_hit(hits, i, max_index) {
            return found;
        }
        offsets = _mm512_add_epi64(offsets, step);
        i += 8;
    }
    None
}
