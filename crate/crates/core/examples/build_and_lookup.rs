//! Build a function over a word list and map every word to its slot.
//!
//! `cargo run --example build_and_lookup`

use recsplit::{BuildConfig, RecSplit};

fn main() -> recsplit::Result<()> {
    let words: Vec<String> = (0..50_000).map(|i| format!("word-{i:06}")).collect();
    let mphf = RecSplit::build(&words, &BuildConfig::new(8, 100))?;

    // Every key lands on its own slot in 0..n.
    let mut seen = vec![false; words.len()];
    for w in &words {
        let slot = mphf.lookup(w);
        assert!(!seen[slot], "collision on {w}");
        seen[slot] = true;
    }
    println!("{} keys, {:.4} bits/key", mphf.len(), mphf.bits_per_key());
    for w in &words[..5] {
        println!("{w:>12} -> {}", mphf.lookup(w));
    }

    // Keys outside the set still get an index in range, just not a unique one.
    let stranger = "not-in-the-set";
    println!("{stranger:>12} -> {} (arbitrary)", mphf.lookup(stranger));

    // A slot table turns the function into a static dictionary.
    let mut values = vec![0usize; words.len()];
    for (i, w) in words.iter().enumerate() {
        values[mphf.lookup(w)] = i * 7;
    }
    assert_eq!(values[mphf.lookup("word-000042")], 42 * 7);
    Ok(())
}
