//! Exact probability model of the searches, used as a test oracle and by the
//! benchmark reporter.
//!
//! All probabilities are exact rationals; floating point only appears in the
//! asymptotic approximations and the code-length model.

use std::f64::consts::{E, PI};
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::strategy::{bijection_probability, split_probability};

pub type ExactRational = BigRational;

/// Shape of a splitting tree: leaves carry their size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeShape {
    Leaf(usize),
    Split(Vec<TreeShape>),
}

impl TreeShape {
    pub fn size(&self) -> usize {
        match self {
            TreeShape::Leaf(m) => *m,
            TreeShape::Split(children) => children.iter().map(TreeShape::size).sum(),
        }
    }

    /// Product of the success probabilities of every search in the tree.
    pub fn probability(&self) -> ExactRational {
        match self {
            TreeShape::Leaf(m) => bijection_probability(*m),
            TreeShape::Split(children) => {
                let parts: Vec<_> = children.iter().map(TreeShape::size).collect();
                children
                    .iter()
                    .fold(split_probability(&parts), |acc, c| acc * c.probability())
            }
        }
    }
}

/// `1 / p` for the split into `parts`.
pub fn expected_split_trials(parts: &[usize]) -> ExactRational {
    split_probability(parts).recip()
}

/// `m^m / m!`.
pub fn expected_bijection_trials(m: usize) -> ExactRational {
    bijection_probability(m).recip()
}

/// Stirling estimate `sqrt((2 pi)^(s-1) prod k_i / m)` of the split trials.
pub fn asymptotic_split_trials(parts: &[usize]) -> f64 {
    let m: usize = parts.iter().sum();
    let prod: f64 = parts.iter().map(|&k| k as f64).product();
    ((2.0 * PI).powi(parts.len() as i32 - 1) * prod / m as f64).sqrt()
}

/// Stirling estimate `e^m / sqrt(2 pi m)` of the bijection trials.
pub fn asymptotic_bijection_trials(m: usize) -> f64 {
    E.powi(m as i32) / (2.0 * PI * m as f64).sqrt()
}

/// Checks that the searches along `tree` succeed jointly with probability
/// exactly `m! / m^m`, the probability of hitting a bijection directly.
pub fn verify_invariance(tree: &TreeShape) -> bool {
    tree.probability() == bijection_probability(tree.size())
}

/// Enumerates every ordered splitting tree over `m` keys whose leaves have at
/// most `leaf` keys (splits have fanout >= 2 and non-empty parts).
pub fn all_trees(m: usize, leaf: usize) -> Vec<TreeShape> {
    let mut out = Vec::new();
    if m <= leaf {
        out.push(TreeShape::Leaf(m));
    }
    if m >= 2 {
        for composition in compositions(m) {
            if composition.len() < 2 {
                continue;
            }
            let options: Vec<Vec<TreeShape>> =
                composition.iter().map(|&k| all_trees(k, leaf)).collect();
            let mut stack = vec![Vec::new()];
            for opts in &options {
                stack = stack
                    .into_iter()
                    .flat_map(|prefix| {
                        opts.iter().map(move |o| {
                            let mut next = prefix.clone();
                            next.push(o.clone());
                            next
                        })
                    })
                    .collect();
            }
            out.extend(stack.into_iter().map(TreeShape::Split));
        }
    }
    out
}

fn compositions(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    (1..=m)
        .flat_map(|first| {
            compositions(m - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Expected Rice code length `r + 1 / (1 - (1-p)^(2^r))` of a geometric
/// value with success probability `p`.
pub fn expected_code_length(p: f64, r: u32) -> f64 {
    r as f64 + expected_unary_length(p, r)
}

/// Expected unary-part length `1 / (1 - (1-p)^(2^r))`.
pub fn expected_unary_length(p: f64, r: u32) -> f64 {
    let q_pow = ((-p).ln_1p() * 2f64.powi(r as i32)).exp();
    1.0 / (1.0 - q_pow)
}

/// Expected Rice code length by direct summation over the geometric
/// distribution, grouping values by their quotient. Stops once the remaining
/// probability mass is below `1e-12`.
pub fn summed_code_length(p: f64, r: u32) -> f64 {
    summed_code_length_bounded(p, r, f64::INFINITY).unwrap()
}

/// Like [`summed_code_length`], giving up (`None`) as soon as the partial
/// sum exceeds `bound`.
fn summed_code_length_bounded(p: f64, r: u32, bound: f64) -> Option<f64> {
    let block = 2f64.powi(r as i32);
    // Probability that a value has quotient exactly j: q^(j 2^r) (1 - q^(2^r)).
    let q_block = ((-p).ln_1p() * block).exp();
    let mut tail = 1.0;
    let mut total = 0.0;
    let mut quotient = 0u64;
    while tail > 1e-12 {
        let mass = tail * (1.0 - q_block);
        total += mass * (r as f64 + quotient as f64 + 1.0);
        if total > bound {
            return None;
        }
        tail -= mass;
        quotient += 1;
    }
    Some(total)
}

/// Rice parameter in `[0, 64)` minimizing the summed expected length (the
/// smallest one on ties).
pub fn brute_force_rice_param(p: f64) -> u32 {
    let mut best = (0, f64::INFINITY);
    // Large parameters first: their sums are short and give a tight bound
    // that prunes the long sums of small parameters.
    for r in (0..64).rev() {
        if let Some(len) = summed_code_length_bounded(p, r, best.1) {
            if len <= best.1 {
                best = (r, len);
            }
        }
    }
    best.0
}

/// Converts an exact rational for tolerance comparisons.
pub fn to_f64(x: &ExactRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// One benchmark measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub leaf: usize,
    pub bucket: usize,
    pub n: usize,
    pub bits_per_key: f64,
    pub build_ns_per_key: f64,
    pub lookup_ns_per_key: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str =
        "leaf,bucket,n,bits_per_key,build_ns_per_key,lookup_ns_per_key";
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{:.4},{:.1},{:.1}",
            self.leaf,
            self.bucket,
            self.n,
            self.bits_per_key,
            self.build_ns_per_key,
            self.lookup_ns_per_key
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::One;

    fn ratio(a: i64, b: i64) -> ExactRational {
        ExactRational::new(BigInt::from(a), BigInt::from(b))
    }

    /// Counts maps from a 4-set to itself sending exactly two keys below 2.
    #[test]
    fn split_2_2_by_enumeration() {
        let mut hits = 0;
        for code in 0..256u32 {
            let low = (0..4).filter(|i| (code >> (2 * i)) & 3 < 2).count();
            hits += (low == 2) as u32;
        }
        assert_eq!(hits, 96);
        assert_eq!(split_probability(&[2, 2]), ratio(96, 256));
        assert_eq!(expected_split_trials(&[2, 2]), ratio(8, 3));
    }

    #[test]
    fn split_1_1_by_enumeration() {
        let hits = (0..4u32).filter(|c| (c & 1) != (c >> 1)).count();
        assert_eq!(hits, 2);
        assert_eq!(split_probability(&[1, 1]), ratio(1, 2));
    }

    #[test]
    fn bijection_trials() {
        assert!(expected_bijection_trials(1).is_one());
        assert_eq!(expected_bijection_trials(3), ratio(27, 6));
        let exact = to_f64(&expected_bijection_trials(16));
        let asym = asymptotic_bijection_trials(16);
        assert!((exact / asym - 1.0).abs() < 0.05, "{exact} vs {asym}");
        assert!((to_f64(&expected_bijection_trials(8)) - 416.1).abs() < 0.05);
    }

    #[test]
    fn split_trials_asymptotics() {
        assert!(expected_split_trials(&[5]).is_one());
        let exact = to_f64(&expected_split_trials(&[8, 8]));
        let asym = asymptotic_split_trials(&[8, 8]);
        assert!((asym - (8.0 * PI).sqrt()).abs() < 1e-12);
        assert!((exact / asym - 1.0).abs() < 0.10, "{exact} vs {asym}");
    }

    #[test]
    fn invariance_over_every_tree() {
        for leaf in 1..=4 {
            for m in 1..=7 {
                for tree in all_trees(m, leaf) {
                    assert!(verify_invariance(&tree), "{tree:?}");
                }
            }
        }
    }

    #[test]
    fn invariance_negative_control() {
        let tree = TreeShape::Split(vec![TreeShape::Leaf(2), TreeShape::Leaf(2)]);
        assert!(verify_invariance(&tree));
        let perturbed = tree.probability() * ratio(1_000_000_001, 1_000_000_000);
        assert_ne!(perturbed, bijection_probability(4));
        // A tree over a different key count does not satisfy m = 4.
        assert_ne!(tree.probability(), bijection_probability(5));
    }

    #[test]
    fn code_length_model() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let r = crate::strategy::rice_param(p);
            let u = expected_unary_length(p, r);
            // With r clamped at 0 (p > 1/phi) the unary part is just 1/p.
            let lower = if r == 0 { 1.0 / p } else { phi };
            assert!(u >= lower - 1e-9 && u <= 1.0 + phi + 1e-9, "p {p} r {r} unary {u}");
            assert!((summed_code_length(p, r) - expected_code_length(p, r)).abs() < 1e-9);
        }
        assert!((expected_code_length(1.0 - 1e-12, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_matches_closed_form() {
        for i in 1..200 {
            let p = (i as f64 / 200.0).powi(6);
            assert_eq!(brute_force_rice_param(p), crate::strategy::rice_param(p), "p {p}");
        }
        assert_eq!(brute_force_rice_param(1e-9), crate::strategy::rice_param(1e-9));
    }

    #[test]
    fn bench_row_csv() {
        let row = BenchRow {
            leaf: 8,
            bucket: 100,
            n: 1000,
            bits_per_key: 1.8,
            build_ns_per_key: 1000.0,
            lookup_ns_per_key: 50.0,
        };
        assert_eq!(row.to_string(), "8,100,1000,1.8000,1000.0,50.0");
        assert_eq!(BenchRow::CSV_HEADER.split(',').count(), 6);
    }
}
