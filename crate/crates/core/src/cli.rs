//! Command-line front end. The `recsplit` binary is a thin wrapper over
//! [`run`].

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::BenchRow;
use crate::builder::{default_threads, BuildConfig};
use crate::{Error, RecSplit, Result};

#[derive(Debug, Parser)]
#[command(name = "recsplit", version, about = "Minimal perfect hashing by recursive splitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a structure and write it to a file.
    Build(BuildArgs),
    /// Print the rank of keys, one per line.
    Query(QueryArgs),
    /// Exit 0 iff the keys are mapped to a permutation of [0, n).
    Verify(VerifyArgs),
    /// Build over random keys and print a CSV row.
    Bench(BenchArgs),
    /// Print the header and a space breakdown.
    Info(InfoArgs),
}

#[derive(Debug, Args)]
pub struct KeySource {
    /// Key file: one key per line, or length-prefixed records with --binary.
    #[arg(long, conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Use N random 16-byte keys instead of a file.
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    /// Seed of the random key generator.
    #[arg(long, default_value_t = 0)]
    pub key_seed: u64,
    /// Records are a 32-bit little-endian length followed by the key bytes.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Args)]
pub struct TuningArgs {
    #[arg(long, default_value_t = 8)]
    pub leaf: usize,
    #[arg(long, default_value_t = 100)]
    pub bucket: usize,
    /// Seed of the signature hash.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "RECSPLIT_THREADS")]
    pub threads: Option<usize>,
}

impl TuningArgs {
    fn config(&self) -> BuildConfig {
        BuildConfig::new(self.leaf, self.bucket)
            .with_seed(self.seed)
            .with_threads(self.threads.unwrap_or_else(default_threads))
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub keys: KeySource,
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub mphf: PathBuf,
    #[arg(long, conflicts_with = "keys", required_unless_present = "keys")]
    pub key: Option<String>,
    #[arg(long)]
    pub keys: Option<PathBuf>,
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub mphf: PathBuf,
    #[command(flatten)]
    pub keys: KeySource,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub tuning: TuningArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub lookups: usize,
    #[arg(long, default_value_t = 0)]
    pub key_seed: u64,
    /// Omit the CSV header line.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub mphf: PathBuf,
}

/// `n` random 16-byte keys.
pub fn random_keys(n: usize, seed: u64) -> Vec<[u8; 16]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut k = [0u8; 16];
            rng.fill_bytes(&mut k);
            k
        })
        .collect()
}

/// Splits newline-delimited keys. A trailing newline does not start a key;
/// a `\r` before the newline is kept as part of the key.
pub fn parse_text_keys(data: &[u8]) -> Vec<Vec<u8>> {
    let data = data.strip_suffix(b"\n").unwrap_or(data);
    if data.is_empty() {
        return Vec::new();
    }
    data.split(|&b| b == b'\n').map(<[u8]>::to_vec).collect()
}

pub fn parse_binary_keys(mut data: &[u8]) -> Result<Vec<Vec<u8>>> {
    let mut keys = Vec::new();
    while !data.is_empty() {
        let Some((len, rest)) = data.split_first_chunk::<4>() else {
            return Err(Error::Format("truncated record length".into()));
        };
        let len = u32::from_le_bytes(*len) as usize;
        if rest.len() < len {
            return Err(Error::Format("truncated record".into()));
        }
        keys.push(rest[..len].to_vec());
        data = &rest[len..];
    }
    Ok(keys)
}

pub fn write_binary_keys<W: Write, K: AsRef<[u8]>>(out: &mut W, keys: &[K]) -> io::Result<()> {
    for k in keys {
        let k = k.as_ref();
        out.write_all(&(k.len() as u32).to_le_bytes())?;
        out.write_all(k)?;
    }
    Ok(())
}

fn read_key_file(path: &Path, binary: bool) -> Result<Vec<Vec<u8>>> {
    let data = std::fs::read(path)?;
    if binary {
        parse_binary_keys(&data)
    } else {
        Ok(parse_text_keys(&data))
    }
}

fn load_keys(src: &KeySource) -> Result<Vec<Vec<u8>>> {
    match (&src.input, src.random) {
        (Some(path), _) => read_key_file(path, src.binary),
        (None, Some(n)) => Ok(random_keys(n, src.key_seed).iter().map(|k| k.to_vec()).collect()),
        (None, None) => Err(Error::InvalidConfig("either --input or --random is required".into())),
    }
}

fn load_mphf(path: &Path) -> Result<RecSplit> {
    let mut input = BufReader::new(File::open(path)?);
    let mphf = RecSplit::read_from(&mut input)?;
    if input.read(&mut [0u8])? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok(mphf)
}

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failure,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Build(args) => build(args, out),
        Command::Query(args) => query(args, out),
        Command::Verify(args) => verify(args, out),
        Command::Bench(args) => bench(args, out),
        Command::Info(args) => info(args, out),
    }
}

fn build(args: BuildArgs, out: &mut dyn Write) -> Result<Outcome> {
    let keys = load_keys(&args.keys)?;
    let start = Instant::now();
    let mphf = RecSplit::build(&keys, &args.tuning.config())?;
    let elapsed = start.elapsed();
    let mut file = BufWriter::new(File::create(&args.output)?);
    mphf.write_to(&mut file)?;
    file.flush()?;
    writeln!(out, "n: {}", mphf.len())?;
    writeln!(out, "bits/key: {:.4}", mphf.bits_per_key())?;
    writeln!(out, "bits/key with header: {:.4}", mphf.bits_per_key_with_header())?;
    writeln!(
        out,
        "build time: {:.3} s ({:.1} ns/key)",
        elapsed.as_secs_f64(),
        elapsed.as_nanos() as f64 / mphf.len().max(1) as f64
    )?;
    Ok(Outcome::Success)
}

fn query(args: QueryArgs, out: &mut dyn Write) -> Result<Outcome> {
    let mphf = load_mphf(&args.mphf)?;
    let mut out = BufWriter::new(out);
    if let Some(key) = &args.key {
        writeln!(out, "{}", mphf.lookup(key))?;
    } else if let Some(path) = &args.keys {
        for k in read_key_file(path, args.binary)? {
            writeln!(out, "{}", mphf.lookup(&k))?;
        }
    }
    out.flush()?;
    Ok(Outcome::Success)
}

fn verify(args: VerifyArgs, out: &mut dyn Write) -> Result<Outcome> {
    let mphf = load_mphf(&args.mphf)?;
    let keys = load_keys(&args.keys)?;
    if keys.len() != mphf.len() {
        writeln!(out, "FAIL: {} keys for a structure over {}", keys.len(), mphf.len())?;
        return Ok(Outcome::Failure);
    }
    let mut seen = vec![false; keys.len()];
    for k in &keys {
        let r = mphf.lookup(k);
        if r >= seen.len() || seen[r] {
            writeln!(out, "FAIL: rank {r} out of range or repeated")?;
            return Ok(Outcome::Failure);
        }
        seen[r] = true;
    }
    writeln!(out, "OK: {} keys map to a permutation", keys.len())?;
    Ok(Outcome::Success)
}

/// Builds over `n` random keys and times `lookups` queries.
pub fn bench_row(config: &BuildConfig, n: usize, lookups: usize, key_seed: u64) -> Result<BenchRow> {
    let keys = random_keys(n, key_seed);
    let start = Instant::now();
    let mphf = RecSplit::build(&keys, config)?;
    let build_ns = start.elapsed().as_nanos() as f64;
    let mut lookup_ns = 0.0;
    if n > 0 && lookups > 0 {
        let start = Instant::now();
        let mut acc = 0usize;
        for i in 0..lookups {
            acc = acc.wrapping_add(mphf.lookup(&keys[i % n]));
        }
        std::hint::black_box(acc);
        lookup_ns = start.elapsed().as_nanos() as f64 / lookups as f64;
    }
    Ok(BenchRow {
        leaf: config.leaf_size,
        bucket: config.bucket_size,
        n,
        bits_per_key: mphf.bits_per_key(),
        build_ns_per_key: build_ns / n.max(1) as f64,
        lookup_ns_per_key: lookup_ns,
    })
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> Result<Outcome> {
    let row = bench_row(&args.tuning.config(), args.n, args.lookups, args.key_seed)?;
    if !args.no_header {
        writeln!(out, "{}", BenchRow::CSV_HEADER)?;
    }
    writeln!(out, "{row}")?;
    Ok(Outcome::Success)
}

fn info(args: InfoArgs, out: &mut dyn Write) -> Result<Outcome> {
    let mphf = load_mphf(&args.mphf)?;
    let h = mphf.header();
    let ef = mphf.elias_fano();
    let (wk, wo) = ef.lower_widths();
    writeln!(out, "format version: {}", h.format_version)?;
    writeln!(out, "leaf size: {}", h.leaf_size)?;
    writeln!(out, "bucket size: {}", h.bucket_size)?;
    writeln!(out, "keys: {}", h.n)?;
    writeln!(out, "seed: {}", h.seed)?;
    writeln!(out, "beta: {}", h.beta)?;
    writeln!(out, "buckets: {}", h.n_buckets)?;
    writeln!(out, "lower bit widths: {wk} (keys), {wo} (offsets)")?;
    writeln!(out, "elias-fano bits: {}", ef.size_bits())?;
    writeln!(out, "fixed bits: {}", mphf.fixed_bits())?;
    writeln!(out, "unary bits: {}", mphf.unary_bits())?;
    writeln!(out, "file bytes: {}", mphf.serialized_len())?;
    writeln!(out, "bits/key: {:.4}", mphf.bits_per_key())?;
    writeln!(out, "bits/key with header: {:.4}", mphf.bits_per_key_with_header())?;
    Ok(Outcome::Success)
}
