//! The splitting strategy: tree shape, Golomb-Rice parameters and skip tables
//! as pure functions of the leaf size and the number of keys at a node.
//!
//! A node with `m > leaf` keys is split into parts of a common *unit* size,
//! except possibly the last part:
//!
//! * `m <= s * leaf`: unit `leaf` (leaves are aggregated `s` at a time);
//! * `m <= s * t * leaf`: unit `s * leaf`;
//! * otherwise fanout 2 with unit `ceil(floor(m / 2) / (s t leaf)) * s t leaf`,
//!
//! where `s = max(2, ceil(0.35 leaf + 0.5))` and `t = ceil(0.21 leaf + 0.9)`
//! (or 2 when `leaf < 7`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::analysis::TreeShape;

pub const MAX_LEAF_SIZE: usize = 24;

/// Node sizes up to this value always get exact Rice parameters.
pub const MIN_TABLE_SIZE: usize = 2000;

/// Largest fanout any strategy can produce (`s` at `leaf = 24`).
pub const MAX_FANOUT: usize = 9;

/// `floor(log2 x)`, undefined for zero.
#[inline]
pub fn lambda(x: u64) -> u32 {
    debug_assert!(x > 0);
    63 - x.leading_zeros()
}

/// Integer approximation of `floor(log2 x + 1/2)`.
#[inline]
pub fn ilog2_round(x: u64) -> u32 {
    lambda(x + (x >> 1))
}

/// Optimal Rice parameter for a geometric source with success probability
/// `p`: `max(0, ceil(log2(ln(phi) / -ln(1 - p))))`.
pub fn rice_param(p: f64) -> u32 {
    debug_assert!(p > 0.0 && p <= 1.0);
    if p >= 1.0 {
        return 0;
    }
    let ln_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let target = ln_phi / -(-p).ln_1p();
    target.log2().ceil().max(0.0) as u32
}

/// Integer-only Rice parameter estimate for splitting `m` keys into `parts`.
pub fn rice_param_approx(m: usize, parts: &[usize]) -> u32 {
    let fanout = parts.len() as i64;
    let sum: i64 = parts.iter().map(|&k| ilog2_round(k as u64) as i64).sum();
    let v = (((fanout - 1) * 5) >> 1) + sum - lambda(m as u64) as i64;
    (v.max(0) >> 1) as u32
}

fn factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * i)
}

fn power(base: usize, exp: usize) -> BigInt {
    Pow::pow(BigInt::from(base), exp)
}

/// Exact probability that a uniform function `m -> m` sends exactly `k_i`
/// keys into the `i`-th consecutive interval of sizes `parts`.
pub fn split_probability(parts: &[usize]) -> BigRational {
    let m: usize = parts.iter().sum();
    let mut num = factorial(m);
    let mut den = power(m, m);
    for &k in parts {
        num *= power(k, k);
        den *= factorial(k);
    }
    BigRational::new(num, den)
}

/// Exact probability `m! / m^m` that a uniform function `m -> m` is a bijection.
pub fn bijection_probability(m: usize) -> BigRational {
    BigRational::new(factorial(m), power(m, m))
}

/// Shape of one internal node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NodeSpec {
    pub fanout: usize,
    pub unit: usize,
    /// Size of the last part, `1 <= last <= unit`.
    pub last: usize,
    pub rice: u32,
    pub subtree_fixed_bits: usize,
    pub subtree_nodes: usize,
}

impl NodeSpec {
    pub fn part_sizes(&self) -> Vec<usize> {
        let mut parts = vec![self.unit; self.fanout - 1];
        parts.push(self.last);
        parts
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Entry {
    rice: u8,
    fixed_bits: u32,
    nodes: u32,
}

/// Precomputed splitting strategy for one leaf size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitStrategy {
    leaf: usize,
    lower_aggr: usize,
    upper_aggr: usize,
    lower_unit: usize,
    upper_unit: usize,
    table: Vec<Entry>,
}

impl SplitStrategy {
    /// Strategy for `leaf` (1..=24) with exact tables up to `table_max` keys.
    ///
    /// The builder and the evaluator both use `table_size(bucket_size)`,
    /// which keeps the encoding a function of the header alone.
    pub fn new(leaf: usize, table_max: usize) -> Self {
        assert!((1..=MAX_LEAF_SIZE).contains(&leaf), "leaf size {leaf} out of range");
        let lower_aggr = lower_aggregation(leaf);
        let upper_aggr = lower_aggr * upper_aggregation(leaf);
        let mut strategy = Self {
            leaf,
            lower_aggr,
            upper_aggr,
            lower_unit: lower_aggr * leaf,
            upper_unit: upper_aggr * leaf,
            table: Vec::with_capacity(table_max + 1),
        };

        let mut ln_fact = vec![0.0f64; table_max + 1];
        for k in 1..=table_max {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let ln_kk = |k: usize| if k == 0 { 0.0 } else { k as f64 * (k as f64).ln() };

        for m in 0..=table_max {
            let entry = if m <= 1 {
                Entry::default()
            } else if m <= leaf {
                let rice = rice_param((ln_fact[m] - ln_kk(m)).exp());
                Entry {
                    rice: rice as u8,
                    fixed_bits: rice,
                    nodes: 1,
                }
            } else {
                let (fanout, unit, last) = strategy.shape(m);
                let ln_p = ln_fact[m] - ln_kk(m)
                    + (fanout - 1) as f64 * (ln_kk(unit) - ln_fact[unit])
                    + (ln_kk(last) - ln_fact[last]);
                let rice = rice_param(ln_p.exp());
                let (u, l) = (strategy.table[unit], strategy.table[last]);
                Entry {
                    rice: rice as u8,
                    fixed_bits: rice + (fanout as u32 - 1) * u.fixed_bits + l.fixed_bits,
                    nodes: 1 + (fanout as u32 - 1) * u.nodes + l.nodes,
                }
            };
            strategy.table.push(entry);
        }
        strategy
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf
    }

    /// `s`: leaves aggregated by a lowest-level split.
    pub fn lower_aggr(&self) -> usize {
        self.lower_aggr
    }

    /// `s * t`: leaves covered by a second-level unit.
    pub fn upper_aggr(&self) -> usize {
        self.upper_aggr
    }

    pub fn table_max(&self) -> usize {
        self.table.len() - 1
    }

    /// Unit size for a node with `m > leaf` keys.
    #[inline]
    pub fn unit(&self, m: usize) -> usize {
        debug_assert!(m > self.leaf);
        if m <= self.lower_unit {
            self.leaf
        } else if m <= self.upper_unit {
            self.lower_unit
        } else {
            (m / 2).div_ceil(self.upper_unit) * self.upper_unit
        }
    }

    /// `(fanout, unit, last part size)` for `m > leaf`.
    #[inline]
    pub fn shape(&self, m: usize) -> (usize, usize, usize) {
        let unit = self.unit(m);
        let fanout = m.div_ceil(unit);
        (fanout, unit, m - (fanout - 1) * unit)
    }

    /// Rice parameter of the bijection index of a leaf with `2 <= m <= leaf` keys.
    #[inline]
    pub fn leaf_rice(&self, m: usize) -> u32 {
        debug_assert!((2..=self.leaf).contains(&m));
        self.table[m].rice as u32
    }

    /// Rice parameter of the split index of a node with `m > leaf` keys.
    #[inline]
    pub fn split_rice(&self, m: usize) -> u32 {
        match self.table.get(m) {
            Some(e) => e.rice as u32,
            None => {
                let (fanout, unit, last) = self.shape(m);
                let mut parts = [unit; MAX_FANOUT];
                parts[fanout - 1] = last;
                rice_param_approx(m, &parts[..fanout])
            }
        }
    }

    /// Rice parameter of the index stored at a node of `m >= 2` keys.
    #[inline]
    pub fn rice(&self, m: usize) -> u32 {
        if m <= self.leaf {
            self.leaf_rice(m)
        } else {
            self.split_rice(m)
        }
    }

    /// Total fixed-part bits and number of coded nodes in the subtree over `m` keys.
    #[inline]
    pub fn skip_info(&self, m: usize) -> (usize, usize) {
        match self.table.get(m) {
            Some(e) => (e.fixed_bits as usize, e.nodes as usize),
            None => {
                let (fanout, unit, last) = self.shape(m);
                let (uf, un) = self.skip_info(unit);
                let (lf, ln) = self.skip_info(last);
                (
                    self.split_rice(m) as usize + (fanout - 1) * uf + lf,
                    1 + (fanout - 1) * un + ln,
                )
            }
        }
    }

    /// Full description of a node with `m > leaf` keys.
    pub fn node_spec(&self, m: usize) -> NodeSpec {
        assert!(m > self.leaf, "node of {m} keys is a leaf for leaf size {}", self.leaf);
        let (fanout, unit, last) = self.shape(m);
        let (subtree_fixed_bits, subtree_nodes) = self.skip_info(m);
        NodeSpec {
            fanout,
            unit,
            last,
            rice: self.split_rice(m),
            subtree_fixed_bits,
            subtree_nodes,
        }
    }

    /// Number of split levels above the deepest leaf of a tree over `m` keys.
    pub fn depth(&self, m: usize) -> usize {
        if m <= self.leaf {
            0
        } else {
            let (_, unit, last) = self.shape(m);
            1 + self.depth(unit).max(self.depth(last))
        }
    }

    /// The tree this strategy builds over `m >= 1` keys.
    pub fn tree_shape(&self, m: usize) -> TreeShape {
        if m <= self.leaf {
            TreeShape::Leaf(m)
        } else {
            let (fanout, unit, last) = self.shape(m);
            let mut children: Vec<_> = (1..fanout).map(|_| self.tree_shape(unit)).collect();
            children.push(self.tree_shape(last));
            TreeShape::Split(children)
        }
    }
}

/// Table extent used for a given expected bucket size.
pub fn table_size(bucket_size: usize) -> usize {
    MIN_TABLE_SIZE.max(bucket_size.saturating_mul(2))
}

/// `s = max(2, ceil(0.35 leaf + 0.5))`, evaluated exactly.
pub fn lower_aggregation(leaf: usize) -> usize {
    2.max((35 * leaf + 50).div_ceil(100))
}

/// `t = ceil(0.21 leaf + 0.9)` for `leaf >= 7`, otherwise 2.
pub fn upper_aggregation(leaf: usize) -> usize {
    if leaf >= 7 {
        (21 * leaf + 90).div_ceil(100)
    } else {
        2
    }
}
