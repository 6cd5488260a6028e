use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tlmbreak_core::addxor::pass_probability_curve;
use tlmbreak_core::cpa::{build_marker_query, build_uniform_query, key_oracle};
use tlmbreak_core::imgio::{read_ppm, synth_random, synth_uniform, write_ppm};
use tlmbreak_core::randomness::{battery, control_sequences, mtlm_sequences, BitSource};
use tlmbreak_core::{
    cpa_attack, decrypt, decrypt_with_equivalent_key, encrypt, generate_keystream, kpa_attack,
    pixel_accuracy, EncryptionOracle, EquivalentKey, KnownPair, RgbImage, ScanMode, SecretKey,
};

/// Encrypt images with the MTLM chaotic cipher and break it.
#[derive(Parser)]
#[command(name = "tlmbreak", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random valid key.
    Keygen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// With --width, redraw permutation integers until usable at this size.
        #[arg(long, requires = "width")]
        height: Option<usize>,
        #[arg(long, requires = "height")]
        width: Option<usize>,
        /// Defaults to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Encrypt(CryptArgs),
    Decrypt(CryptArgs),
    /// Write a synthetic PPM image.
    Synth {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        /// Constant colour `r,g,b` instead of random bytes.
        #[arg(long, value_parser = parse_rgb)]
        uniform: Option<[u8; 3]>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the two chosen plain-images as plain1.ppm and plain2.ppm.
    CpaQueries {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Two-image chosen-plaintext attack.
    AttackCpa {
        /// Encrypt queries with this key.
        #[arg(long, required_unless_present = "pairs", conflicts_with = "pairs")]
        oracle_key: Option<PathBuf>,
        /// Directory with plain1/cipher1/plain2/cipher2 .ppm answering the queries.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, requires = "oracle_key")]
        height: Option<usize>,
        #[arg(long, requires = "oracle_key")]
        width: Option<usize>,
        /// Seed of the fresh image used to check the recovered key.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Known-plaintext attack from one or two pairs.
    AttackKpa {
        /// Directory with plain1/cipher1 and, unless --one-pair, plain2/cipher2 .ppm.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        one_pair: bool,
        /// Verify every anchor for every candidate.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Statistical battery over seeded keystreams.
    Randomness {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Test the ChaCha20 control generator instead.
        #[arg(long)]
        control: bool,
        /// Use X bytes only instead of interleaved X, Y, Z.
        #[arg(long, conflicts_with = "control")]
        x_only: bool,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dump `length` keystream triples for external test suites.
    Dump {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        length: usize,
        /// ASCII 0/1 instead of raw bytes.
        #[arg(long)]
        ascii: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Pass probability of a wrong guess against each difference y, as CSV.
    FigureProb {
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct CryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct TargetArgs {
    /// Cipher image to decrypt with the recovered key.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Its plain image, for accuracy.
    #[arg(long, requires = "target")]
    target_plain: Option<PathBuf>,
    /// Where to write the decrypted target.
    #[arg(short, long, requires = "target")]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_rgb(s: &str) -> Result<[u8; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [r, g, b] = parts.as_slice() else {
        return Err(format!("expected r,g,b, got `{s}`"));
    };
    let p = |v: &str| v.trim().parse::<u8>().map_err(|e| format!("`{v}`: {e}"));
    Ok([p(r)?, p(g)?, p(b)?])
}

fn emit(report: &str, path: Option<&Path>) -> Result<()> {
    print!("{report}");
    if let Some(p) = path {
        fs::write(p, report).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn load_key(path: &Path) -> Result<SecretKey> {
    SecretKey::load(path).with_context(|| format!("loading key {}", path.display()))
}

fn load_image(path: &Path) -> Result<RgbImage> {
    read_ppm(path).with_context(|| format!("reading {}", path.display()))
}

fn save_image(img: &RgbImage, path: &Path) -> Result<()> {
    write_ppm(img, path).with_context(|| format!("writing {}", path.display()))
}

/// Answers queries from pre-encrypted pairs.
struct PairsOracle {
    pairs: Vec<(RgbImage, RgbImage)>,
    queries: usize,
}

impl EncryptionOracle for PairsOracle {
    fn query(&mut self, plain: &RgbImage) -> tlmbreak_core::Result<RgbImage> {
        self.queries += 1;
        self.pairs
            .iter()
            .find(|(p, _)| p == plain)
            .map(|(_, c)| c.clone())
            .ok_or_else(|| {
                tlmbreak_core::Error::Format(
                    "no pair matches the requested chosen image; create plains with cpa-queries"
                        .into(),
                )
            })
    }

    fn queries(&self) -> usize {
        self.queries
    }
}

fn load_pairs(dir: &Path, count: usize) -> Result<Vec<(RgbImage, RgbImage)>> {
    ensure!(
        dir.is_dir(),
        "pair directory {} does not exist",
        dir.display()
    );
    (1..=count)
        .map(|k| {
            let plain = load_image(&dir.join(format!("plain{k}.ppm")))?;
            let cipher = load_image(&dir.join(format!("cipher{k}.ppm")))?;
            ensure!(
                plain.same_shape(&cipher),
                "plain{k}.ppm and cipher{k}.ppm differ in size"
            );
            Ok((plain, cipher))
        })
        .collect()
}

fn key_summary(out: &mut String, key: &EquivalentKey) {
    writeln!(out, "size = {}x{}", key.height, key.width).unwrap();
    writeln!(out, "r = {:?}", key.r).unwrap();
    writeln!(out, "ambiguous = {}", key.ambiguous_count()).unwrap();
}

/// Decrypts the target, if any, and appends its accuracy to the report.
fn finish_target(out: &mut String, key: &EquivalentKey, t: &TargetArgs) -> Result<()> {
    let Some(target) = &t.target else {
        return Ok(());
    };
    let plain = decrypt_with_equivalent_key(&load_image(target)?, key)?;
    if let Some(truth) = &t.target_plain {
        let acc = pixel_accuracy(&plain, &load_image(truth)?)?;
        writeln!(out, "target_accuracy = {acc:.6}").unwrap();
    }
    if let Some(path) = &t.output {
        save_image(&plain, path)?;
    }
    Ok(())
}

fn attack_cpa(
    oracle_key: Option<PathBuf>,
    pairs: Option<PathBuf>,
    dims: (Option<usize>, Option<usize>),
    seed: u64,
    target: TargetArgs,
) -> Result<()> {
    let mut out = String::new();
    let key = match (oracle_key, pairs) {
        (Some(path), _) => {
            let (Some(h), Some(w)) = dims else {
                bail!("--oracle-key needs --height and --width");
            };
            let secret = load_key(&path)?;
            let mut oracle = key_oracle(secret);
            let key = cpa_attack(&mut oracle, h, w)?;
            writeln!(out, "queries = {}", oracle.queries()).unwrap();
            let fresh = synth_random(h, w, seed)?;
            let back = decrypt_with_equivalent_key(&encrypt(&fresh, &secret)?, &key)?;
            key_summary(&mut out, &key);
            writeln!(
                out,
                "fresh_accuracy = {:.6}",
                pixel_accuracy(&back, &fresh)?
            )
            .unwrap();
            key
        }
        (None, Some(dir)) => {
            let pairs = load_pairs(&dir, 2)?;
            let (h, w) = (pairs[0].0.height(), pairs[0].0.width());
            let mut oracle = PairsOracle { pairs, queries: 0 };
            let key = cpa_attack(&mut oracle, h, w)?;
            writeln!(out, "queries = {}", oracle.queries()).unwrap();
            key_summary(&mut out, &key);
            key
        }
        (None, None) => bail!("one of --oracle-key or --pairs is required"),
    };
    finish_target(&mut out, &key, &target)?;
    emit(&out, target.report.as_deref())
}

fn attack_kpa(dir: &Path, one_pair: bool, strict: bool, target: TargetArgs) -> Result<()> {
    let pairs = load_pairs(dir, if one_pair { 1 } else { 2 })?;
    let known: Vec<KnownPair> = pairs
        .iter()
        .map(|(p, c)| KnownPair::new(p, c))
        .collect::<tlmbreak_core::Result<_>>()?;
    let mode = if strict {
        ScanMode::Strict
    } else {
        ScanMode::Default
    };
    let outcome = kpa_attack(&known, mode)?;
    let mut out = format!("pairs = {}\n", known.len());
    out.push_str(&outcome.report(None));
    finish_target(&mut out, &outcome.key, &target)?;
    emit(&out, target.report.as_deref())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Keygen {
            seed,
            height,
            width,
            output,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let key = match (height, width) {
                (Some(h), Some(w)) => SecretKey::random_for(h, w, &mut rng)?,
                _ => SecretKey::random(&mut rng),
            };
            match output {
                Some(p) => key
                    .save(&p)
                    .with_context(|| format!("writing {}", p.display()))?,
                None => print!("{}", key.to_text()),
            }
        }
        Cmd::Encrypt(a) => {
            let key = load_key(&a.key)?;
            save_image(&encrypt(&load_image(&a.input)?, &key)?, &a.output)?;
        }
        Cmd::Decrypt(a) => {
            let key = load_key(&a.key)?;
            save_image(&decrypt(&load_image(&a.input)?, &key)?, &a.output)?;
        }
        Cmd::Synth {
            height,
            width,
            uniform,
            seed,
            output,
        } => {
            let img = match uniform {
                Some([r, g, b]) => synth_uniform(height, width, r, g, b)?,
                None => synth_random(height, width, seed)?,
            };
            save_image(&img, &output)?;
        }
        Cmd::CpaQueries {
            height,
            width,
            out_dir,
        } => {
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            save_image(
                &build_uniform_query(height, width)?,
                &out_dir.join("plain1.ppm"),
            )?;
            save_image(
                &build_marker_query(height, width)?,
                &out_dir.join("plain2.ppm"),
            )?;
        }
        Cmd::AttackCpa {
            oracle_key,
            pairs,
            height,
            width,
            seed,
            target,
        } => attack_cpa(oracle_key, pairs, (height, width), seed, target)?,
        Cmd::AttackKpa {
            pairs,
            one_pair,
            strict,
            target,
        } => attack_kpa(&pairs, one_pair, strict, target)?,
        Cmd::Randomness {
            count,
            seed,
            control,
            x_only,
            report,
            csv,
        } => {
            let seqs = if control {
                control_sequences(count, seed)
            } else {
                let source = if x_only {
                    BitSource::XOnly
                } else {
                    BitSource::Interleaved
                };
                mtlm_sequences(count, seed, source)?
            };
            let result = battery(&seqs)?;
            let source = match (control, x_only) {
                (true, _) => "ChaCha20 control",
                (false, true) => "MTLM, X bytes",
                (false, false) => "MTLM, interleaved X Y Z",
            };
            let table = format!("# {source}, seed {seed}\n{}", result.to_table());
            emit(&table, report.as_deref())?;
            if let Some(p) = csv {
                fs::write(&p, result.to_csv())
                    .with_context(|| format!("writing {}", p.display()))?;
            }
        }
        Cmd::Dump {
            key,
            length,
            ascii,
            output,
        } => {
            let ks = generate_keystream(&load_key(&key)?, length)?;
            let file = fs::File::create(&output)
                .with_context(|| format!("creating {}", output.display()))?;
            let w = std::io::BufWriter::new(file);
            if ascii {
                ks.write_ascii_bits(w)?;
            } else {
                ks.write_raw(w)?;
            }
        }
        Cmd::FigureProb { output } => {
            let mut csv = String::from("y,probability\n");
            for (y, p) in pass_probability_curve().iter().enumerate() {
                writeln!(csv, "{y},{p}").unwrap();
            }
            fs::write(&output, csv).with_context(|| format!("writing {}", output.display()))?;
        }
    }
    Ok(())
}
