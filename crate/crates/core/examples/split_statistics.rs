//! Exact and asymptotic trial counts next to what the searches really take.
//!
//! `cargo run --release --example split_statistics`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recsplit::analysis::{
    all_trees, asymptotic_bijection_trials, asymptotic_split_trials, expected_bijection_trials,
    expected_split_trials, to_f64, verify_invariance,
};
use recsplit::builder::{find_bijection, find_split};

const SAMPLES: usize = 2000;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sample = |m: usize| -> Vec<u64> { (0..m).map(|_| rng.gen()).collect() };

    println!("bijections     exact    stirling    measured");
    for m in [2, 4, 6, 8, 10] {
        let mut total = 0u64;
        for _ in 0..SAMPLES {
            total += find_bijection(&sample(m), 0, u64::MAX).unwrap() + 1;
        }
        println!(
            "  m={m:<3} {:>12.2} {:>11.2} {:>11.2}",
            to_f64(&expected_bijection_trials(m)),
            asymptotic_bijection_trials(m),
            total as f64 / SAMPLES as f64
        );
    }

    println!("splits         exact    stirling    measured");
    for (unit, fanout) in [(8, 2), (16, 2), (8, 4), (4, 6), (100, 2)] {
        let parts = vec![unit; fanout];
        let mut total = 0u64;
        for _ in 0..SAMPLES {
            total += find_split(&sample(unit * fanout), unit, 0, u64::MAX).unwrap() + 1;
        }
        println!(
            "  {unit}x{fanout:<4} {:>11.2} {:>11.2} {:>11.2}",
            to_f64(&expected_split_trials(&parts)),
            asymptotic_split_trials(&parts),
            total as f64 / SAMPLES as f64
        );
    }

    // However a set of 7 keys is split into leaves of at most 3, the joint
    // success probability equals that of a direct bijection.
    let trees = all_trees(7, 3);
    assert!(trees.iter().all(verify_invariance));
    println!("{} trees over 7 keys: all match 7!/7^7", trees.len());
}
