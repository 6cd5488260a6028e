//! A subset of the NIST SP 800-22 statistical tests and a battery runner.
//!
//! Each test returns one or more p-values; a sequence passes when every
//! p-value is at least [`SIGNIFICANCE`].

use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rayon::prelude::*;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::cipher::SecretKey;
use crate::error::{Error, Result};
use crate::mtlm::generate_keystream;

pub const SIGNIFICANCE: f64 = 0.01;
/// Bits per tested sequence: 256 x 256 x 3.
pub const SEQUENCE_BITS: usize = 196_608;
pub const MIN_BITS: usize = 100;

pub const BLOCK_FREQUENCY_M: usize = 128;
pub const APPROXIMATE_ENTROPY_M: u32 = 10;
pub const SERIAL_M: u32 = 16;

/// Bits stored one per byte, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence(Vec<u8>);

impl BitSequence {
    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Self(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn truncate(&mut self, n: usize) {
        self.0.truncate(n);
    }

    pub fn reversed(&self) -> Self {
        Self(self.0.iter().rev().copied().collect())
    }
}

/// Most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> BitSequence {
    BitSequence(
        bytes
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1))
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: &'static str,
    pub p_values: Vec<f64>,
}

impl TestReport {
    fn new(name: &'static str, p_values: Vec<f64>) -> Self {
        let p_values = p_values.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        Self { name, p_values }
    }

    /// Smallest p-value.
    pub fn p_value(&self) -> f64 {
        self.p_values.iter().copied().fold(1.0, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.p_value() >= SIGNIFICANCE
    }
}

fn require(b: &BitSequence, needed: usize) -> Result<()> {
    if b.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: b.len(),
        });
    }
    Ok(())
}

fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

/// Standard normal CDF.
fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn ones(b: &BitSequence) -> usize {
    b.0.iter().filter(|&&v| v == 1).count()
}

pub fn frequency_test(b: &BitSequence) -> Result<TestReport> {
    require(b, MIN_BITS)?;
    let n = b.len() as f64;
    let s = 2.0 * ones(b) as f64 - n;
    let s_obs = s.abs() / n.sqrt();
    Ok(TestReport::new(
        "Frequency",
        vec![erfc(s_obs / std::f64::consts::SQRT_2)],
    ))
}

pub fn block_frequency_test(b: &BitSequence, m: usize) -> Result<TestReport> {
    require(b, MIN_BITS.max(m))?;
    let blocks = b.len() / m;
    let chi2: f64 = b.0[..blocks * m]
        .chunks_exact(m)
        .map(|blk| {
            let pi = blk.iter().filter(|&&v| v == 1).count() as f64 / m as f64;
            (pi - 0.5).powi(2)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    Ok(TestReport::new(
        "Block Frequency",
        vec![igamc(blocks as f64 / 2.0, chi2 / 2.0)],
    ))
}

/// Fails outright (p = 0) when the monobit prerequisite does not hold.
pub fn runs_test(b: &BitSequence) -> Result<TestReport> {
    require(b, MIN_BITS)?;
    let n = b.len() as f64;
    let pi = ones(b) as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(TestReport::new("Runs", vec![0.0]));
    }
    let v = 1 + b.0.windows(2).filter(|w| w[0] != w[1]).count();
    let q = pi * (1.0 - pi);
    let p = erfc((v as f64 - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q));
    Ok(TestReport::new("Runs", vec![p]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CusumMode {
    Forward,
    Reverse,
}

pub fn cumulative_sums_test(b: &BitSequence, mode: CusumMode) -> Result<TestReport> {
    require(b, MIN_BITS)?;
    let n = b.len() as i64;
    let walk = |it: &mut dyn Iterator<Item = &u8>| {
        let mut s = 0i64;
        let mut z = 0i64;
        for &v in it {
            s += 2 * v as i64 - 1;
            z = z.max(s.abs());
        }
        z
    };
    let (name, z) = match mode {
        CusumMode::Forward => ("Cumulative Sums (Forward)", walk(&mut b.0.iter())),
        CusumMode::Reverse => ("Cumulative Sums (Reverse)", walk(&mut b.0.iter().rev())),
    };
    let sqrt_n = (n as f64).sqrt();
    let zf = z as f64;
    // integer division truncates toward zero, as in the reference code
    let mut sum1 = 0.0;
    for k in (-n / z + 1) / 4..=(n / z - 1) / 4 {
        let k = k as f64;
        sum1 += phi((4.0 * k + 1.0) * zf / sqrt_n) - phi((4.0 * k - 1.0) * zf / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in (-n / z - 3) / 4..=(n / z - 1) / 4 {
        let k = k as f64;
        sum2 += phi((4.0 * k + 3.0) * zf / sqrt_n) - phi((4.0 * k + 1.0) * zf / sqrt_n);
    }
    Ok(TestReport::new(name, vec![1.0 - sum1 + sum2]))
}

/// Overlapping `m`-bit pattern counts with wrap-around.
fn pattern_counts(b: &BitSequence, m: u32) -> Vec<u32> {
    let mut counts = vec![0u32; 1 << m];
    if m == 0 {
        counts[0] = b.len() as u32;
        return counts;
    }
    let n = b.len();
    let mask = (1usize << m) - 1;
    let mut window = 0usize;
    for &bit in &b.0[..(m as usize - 1).min(n)] {
        window = (window << 1) | bit as usize;
    }
    for i in 0..n {
        let bit = b.0[(i + m as usize - 1) % n] as usize;
        window = ((window << 1) | bit) & mask;
        counts[window] += 1;
    }
    counts
}

pub fn approximate_entropy_test(b: &BitSequence, m: u32) -> Result<TestReport> {
    require(b, MIN_BITS.max(10 << m))?;
    let n = b.len() as f64;
    let phi_m = |m: u32| -> f64 {
        pattern_counts(b, m)
            .into_iter()
            .filter(|&c| c > 0)
            .map(|c| {
                let p = c as f64 / n;
                p * p.ln()
            })
            .sum()
    };
    let ap_en = phi_m(m) - phi_m(m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - ap_en);
    Ok(TestReport::new(
        "Approximate Entropy",
        vec![igamc(2f64.powi(m as i32 - 1), chi2 / 2.0)],
    ))
}

/// Both p-values must pass.
pub fn serial_test(b: &BitSequence, m: u32) -> Result<TestReport> {
    if m < 2 {
        return Err(Error::Format(format!("serial test needs m >= 2, got {m}")));
    }
    require(b, MIN_BITS.max(1 << m))?;
    let n = b.len() as f64;
    let psi2 = |m: u32| -> f64 {
        let sum: f64 = pattern_counts(b, m)
            .into_iter()
            .map(|c| (c as f64).powi(2))
            .sum();
        2f64.powi(m as i32) / n * sum - n
    };
    let (p0, p1, p2) = (psi2(m), psi2(m - 1), psi2(m - 2));
    let d1 = p0 - p1;
    let d2 = p0 - 2.0 * p1 + p2;
    Ok(TestReport::new(
        "Serial",
        vec![
            igamc(2f64.powi(m as i32 - 2), d1 / 2.0),
            igamc(2f64.powi(m as i32 - 3), d2 / 2.0),
        ],
    ))
}

/// Every implemented test with its default parameters.
pub fn run_all(b: &BitSequence) -> Result<Vec<TestReport>> {
    Ok(vec![
        frequency_test(b)?,
        block_frequency_test(b, BLOCK_FREQUENCY_M)?,
        cumulative_sums_test(b, CusumMode::Forward)?,
        cumulative_sums_test(b, CusumMode::Reverse)?,
        runs_test(b)?,
        approximate_entropy_test(b, APPROXIMATE_ENTROPY_M)?,
        serial_test(b, SERIAL_M)?,
    ])
}

/// Pass counts per test over a set of sequences.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BatteryReport {
    pub sequences: usize,
    pub rows: Vec<(&'static str, usize)>,
}

impl BatteryReport {
    pub fn passes(&self, name: &str) -> Option<usize> {
        self.rows.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
    }

    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|(n, _)| n.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let mut s = String::new();
        writeln!(s, "{:<width$}  Pass ({} sequences)", "Test", self.sequences).unwrap();
        for (name, count) in &self.rows {
            writeln!(s, "{name:<width$}  {count}").unwrap();
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("test,passes,sequences\n");
        for (name, count) in &self.rows {
            writeln!(s, "{name},{count},{}", self.sequences).unwrap();
        }
        s
    }
}

pub fn battery(sequences: &[BitSequence]) -> Result<BatteryReport> {
    let reports: Vec<Vec<TestReport>> = sequences.par_iter().map(run_all).collect::<Result<_>>()?;
    let Some(first) = reports.first() else {
        return Ok(BatteryReport::default());
    };
    let rows = first
        .iter()
        .enumerate()
        .map(|(t, r)| (r.name, reports.iter().filter(|rs| rs[t].passed()).count()))
        .collect();
    Ok(BatteryReport {
        sequences: sequences.len(),
        rows,
    })
}

/// Which keystream bytes form the tested sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitSource {
    /// `X_1 Y_1 Z_1 X_2 ...`
    #[default]
    Interleaved,
    XOnly,
}

/// `bits` bits of keystream from `key`, MSB first.
pub fn keystream_bits(key: &SecretKey, bits: usize, source: BitSource) -> Result<BitSequence> {
    let bytes = bits.div_ceil(8);
    let mut seq = match source {
        BitSource::Interleaved => {
            let ks = generate_keystream(key, bytes.div_ceil(3))?;
            bytes_to_bits(&ks.interleaved()[..bytes])
        }
        BitSource::XOnly => bytes_to_bits(generate_keystream(key, bytes)?.x()),
    };
    seq.truncate(bits);
    Ok(seq)
}

/// `count` keystream sequences under keys drawn from `seed`.
pub fn mtlm_sequences(count: usize, seed: u64, source: BitSource) -> Result<Vec<BitSequence>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keys: Vec<SecretKey> = (0..count).map(|_| SecretKey::random(&mut rng)).collect();
    keys.par_iter()
        .map(|k| keystream_bits(k, SEQUENCE_BITS, source))
        .collect()
}

/// Control sequences from ChaCha20, one stream per sequence.
pub fn control_sequences(count: usize, seed: u64) -> Vec<BitSequence> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut bytes = vec![0u8; SEQUENCE_BITS / 8];
            rng.fill_bytes(&mut bytes);
            bytes_to_bits(&bytes)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(bits: impl IntoIterator<Item = u8>) -> BitSequence {
        BitSequence::from_bits(bits.into_iter().collect())
    }

    fn alternating(n: usize) -> BitSequence {
        seq((0..n).map(|i| (i % 2) as u8))
    }

    #[test]
    fn bit_order() {
        assert_eq!(bytes_to_bits(&[0x80]).bits(), [1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(bytes_to_bits(&[0x01]).bits(), [0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(bytes_to_bits(&[0xAA]).bits(), [1, 0, 1, 0, 1, 0, 1, 0]);
        assert_eq!(bytes_to_bits(&[1, 2, 3]).len(), 24);
    }

    #[test]
    fn degenerate_sequences() {
        let alt = alternating(10_000);
        let ones = seq(std::iter::repeat(1).take(10_000));
        assert_eq!(frequency_test(&alt).unwrap().p_value(), 1.0);
        assert!(!frequency_test(&ones).unwrap().passed());
        let bf = block_frequency_test(&alt, 128).unwrap();
        assert_eq!(bf.p_value(), 1.0);
        assert!(!block_frequency_test(&ones, 128).unwrap().passed());
        assert!(!runs_test(&alt).unwrap().passed());
        assert_eq!(runs_test(&ones).unwrap().p_value(), 0.0);
        assert!(!cumulative_sums_test(&ones, CusumMode::Forward)
            .unwrap()
            .passed());
        assert!(!cumulative_sums_test(&ones, CusumMode::Reverse)
            .unwrap()
            .passed());
        let periodic = seq((0..20_000).map(|i| [0, 0, 1][i % 3]));
        assert!(!approximate_entropy_test(&periodic, 10).unwrap().passed());
        let long_periodic = seq((0..70_000).map(|i| [0, 1, 1, 0, 1][i % 5]));
        assert!(!serial_test(&long_periodic, 16).unwrap().passed());
    }

    #[test]
    fn cusum_symmetry() {
        // a palindrome reads the same both ways
        let half: Vec<u8> = (0..500u32)
            .map(|i| (i.wrapping_mul(2654435761) >> 31) as u8)
            .collect();
        let mut bits = half.clone();
        bits.extend(half.iter().rev());
        let b = seq(bits);
        let f = cumulative_sums_test(&b, CusumMode::Forward).unwrap();
        let r = cumulative_sums_test(&b, CusumMode::Reverse).unwrap();
        assert_eq!(f.p_values, r.p_values);
    }

    #[test]
    fn length_guards() {
        let short = alternating(99);
        assert!(matches!(
            frequency_test(&short),
            Err(Error::TooShort {
                needed: 100,
                got: 99
            })
        ));
        assert!(approximate_entropy_test(&alternating(10_239), 10).is_err());
        assert!(approximate_entropy_test(&alternating(10_240), 10).is_ok());
        assert!(serial_test(&alternating(65_535), 16).is_err());
    }

    #[test]
    fn pattern_counts_wrap() {
        // 0011 with wrap: 00 01 11 10
        let c = pattern_counts(&seq([0, 0, 1, 1]), 2);
        assert_eq!(c, vec![1, 1, 1, 1]);
        let c = pattern_counts(&seq([0, 1, 1]), 3);
        assert_eq!(c.iter().sum::<u32>(), 3);
        assert_eq!((c[0b011], c[0b110], c[0b101]), (1, 1, 1));
    }

    #[test]
    fn p_values_are_probabilities() {
        for s in control_sequences(3, 5)
            .iter()
            .chain(&mtlm_sequences(2, 5, BitSource::Interleaved).unwrap())
        {
            for r in run_all(s).unwrap() {
                assert!(r.p_values.iter().all(|p| (0.0..=1.0).contains(p)), "{r:?}");
                assert_eq!(r.passed(), r.p_value() >= SIGNIFICANCE);
            }
        }
    }

    #[test]
    fn sequence_lengths() {
        let key = SecretKey::sample();
        let s = keystream_bits(&key, SEQUENCE_BITS, BitSource::Interleaved).unwrap();
        assert_eq!(s.len(), SEQUENCE_BITS);
        let ks = generate_keystream(&key, 2).unwrap();
        assert_eq!(&s.bits()[..48], bytes_to_bits(&ks.interleaved()).bits());
        let x = keystream_bits(&key, 20, BitSource::XOnly).unwrap();
        assert_eq!(
            x.bits(),
            &bytes_to_bits(ks.x()).bits()[..16]
                .iter()
                .chain(&bytes_to_bits(&generate_keystream(&key, 3).unwrap().x()[2..]).bits()[..4])
                .copied()
                .collect::<Vec<_>>()[..]
        );
        assert_eq!(control_sequences(2, 1)[0].len(), SEQUENCE_BITS);
        assert_ne!(control_sequences(2, 1)[0], control_sequences(2, 1)[1]);
    }

    #[test]
    fn empty_battery() {
        let r = battery(&[]).unwrap();
        assert_eq!(r.sequences, 0);
        assert!(r.rows.is_empty());
    }
}
