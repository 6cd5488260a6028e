//! Solving `y = ((alpha + x) mod 256) ^ ((beta + x) mod 256)` for `x`.
//!
//! Both attacks reduce to this map: XOR-ing two neighbouring ciphertext
//! differences cancels the `Y ^ Z` keystream and leaves the map with
//! `alpha`, `beta` the nibble-rotated plain bytes and `x` the unknown `X`
//! keystream byte. Since `(a + (x ^ 128)) mod 256 = ((a + x) mod 256) ^ 128`,
//! the map cannot see bit 7 of `x` and every candidate set is closed under
//! `x -> x ^ 128`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[inline]
pub fn core_map(x: u8, alpha: u8, beta: u8) -> u8 {
    alpha.wrapping_add(x) ^ beta.wrapping_add(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub y: u8,
    pub alpha: u8,
    pub beta: u8,
}

impl Constraint {
    pub fn new(y: u8, alpha: u8, beta: u8) -> Self {
        Self { y, alpha, beta }
    }

    /// The constraint a known `x` produces under `(alpha, beta)`.
    pub fn observe(x: u8, alpha: u8, beta: u8) -> Self {
        Self::new(core_map(x, alpha, beta), alpha, beta)
    }

    #[inline]
    pub fn satisfied_by(&self, x: u8) -> bool {
        core_map(x, self.alpha, self.beta) == self.y
    }
}

/// A subset of `0..=255` as a 256-bit mask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CandidateSet([u64; 4]);

impl CandidateSet {
    pub const fn empty() -> Self {
        Self([0; 4])
    }

    pub const fn full() -> Self {
        Self([u64::MAX; 4])
    }

    pub fn from_values<I: IntoIterator<Item = u8>>(values: I) -> Self {
        let mut s = Self::empty();
        for v in values {
            s.insert(v);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, v: u8) {
        self.0[(v >> 6) as usize] |= 1 << (v & 63);
    }

    #[inline]
    pub fn remove(&mut self, v: u8) {
        self.0[(v >> 6) as usize] &= !(1 << (v & 63));
    }

    #[inline]
    pub fn contains(&self, v: u8) -> bool {
        self.0[(v >> 6) as usize] >> (v & 63) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0) {
            *a &= b;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(move |&v| self.contains(v))
    }

    pub fn least(&self) -> Option<u8> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| (i as u32 * 64 + w.trailing_zeros()) as u8)
    }

    /// Members with bit 7 clear: one representative per `x ^ 128` class.
    pub fn canonical(&self) -> CandidateSet {
        Self([self.0[0] | self.0[2], self.0[1] | self.0[3], 0, 0])
    }

    /// `x in S <=> x ^ 128 in S`.
    pub fn is_msb_closed(&self) -> bool {
        self.0[0] == self.0[2] && self.0[1] == self.0[3]
    }

    /// Bits on which all members agree, as `(mask, value)`.
    pub fn agreed_bits(&self) -> (u8, u8) {
        let mut and = 0xFFu8;
        let mut or = 0u8;
        for v in self.iter() {
            and &= v;
            or |= v;
        }
        if self.is_empty() {
            return (0, 0);
        }
        let mask = !(and ^ or);
        (mask, and & mask)
    }
}

impl fmt::Debug for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<u8> for CandidateSet {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        Self::from_values(iter)
    }
}

/// All `x` satisfying every constraint, by exhaustive evaluation.
pub fn candidates(constraints: &[Constraint]) -> CandidateSet {
    let mut set = CandidateSet::empty();
    for x in 0..=255u8 {
        if constraints.iter().all(|c| c.satisfied_by(x)) {
            set.insert(x);
        }
    }
    set
}

/// Whether some `x` in `0..=127` maps to `y` under `(alpha, beta)`.
#[inline]
pub fn verify_exists(y: u8, alpha: u8, beta: u8) -> bool {
    let mut evals = 0;
    verify_exists_counted(y, alpha, beta, &mut evals)
}

/// [`verify_exists`], adding the number of map evaluations to `evals`.
#[inline]
pub fn verify_exists_counted(y: u8, alpha: u8, beta: u8, evals: &mut u64) -> bool {
    for x in 0..128u8 {
        *evals += 1;
        if core_map(x, alpha, beta) == y {
            return true;
        }
    }
    false
}

/// Fraction of the 65536 ordered pairs `(alpha, beta)` that pass
/// [`verify_exists`] for `y`.
pub fn pass_probability(y: u8) -> f64 {
    let passing: u32 = (0..=255u8)
        .into_par_iter()
        .map(|alpha| {
            (0..=255u8)
                .filter(|&beta| verify_exists(y, alpha, beta))
                .count() as u32
        })
        .sum();
    passing as f64 / 65536.0
}

/// [`pass_probability`] for every `y`, computed in one sweep: each pair
/// `(alpha, beta)` marks the outputs its 128 inputs reach.
pub fn pass_probability_curve() -> [f64; 256] {
    let counts = (0..=255u8)
        .into_par_iter()
        .map(|alpha| {
            let mut counts = [0u32; 256];
            for beta in 0..=255u8 {
                let mut reached = CandidateSet::empty();
                for x in 0..128u8 {
                    reached.insert(core_map(x, alpha, beta));
                }
                for y in reached.iter() {
                    counts[y as usize] += 1;
                }
            }
            counts
        })
        .reduce(
            || [0u32; 256],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    counts.map(|c| c as f64 / 65536.0)
}

/// Monte-Carlo estimate of the probability that a single constraint from
/// uniform `(x, alpha, beta)` pins bit `bit` of `x`, i.e. every candidate
/// agrees on it.
pub fn bit_confirm_probability(bit: u32, trials: usize, seed: u64) -> f64 {
    assert!(bit < 8, "bit index {bit} out of range");
    assert!(trials > 0, "at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut confirmed = 0usize;
    for _ in 0..trials {
        let (x, alpha, beta): (u8, u8, u8) = rng.gen();
        let set = candidates(&[Constraint::observe(x, alpha, beta)]);
        let (mask, _) = set.agreed_bits();
        if mask >> bit & 1 == 1 {
            confirmed += 1;
        }
    }
    confirmed as f64 / trials as f64
}

/// Exact value of [`bit_confirm_probability`] for all eight bits, by
/// enumerating all `2^24` triples `(x, alpha, beta)`.
pub fn bit_confirm_probability_exact() -> [f64; 8] {
    let counts = (0..=255u8)
        .into_par_iter()
        .map(|alpha| {
            let mut counts = [0u64; 8];
            for beta in 0..=255u8 {
                // per output y: AND / OR of the preimages and their count
                let mut and = [0xFFu8; 256];
                let mut or = [0u8; 256];
                let mut size = [0u64; 256];
                for x in 0..=255u8 {
                    let y = core_map(x, alpha, beta) as usize;
                    and[y] &= x;
                    or[y] |= x;
                    size[y] += 1;
                }
                for y in 0..256 {
                    if size[y] == 0 {
                        continue;
                    }
                    let agreed = !(and[y] ^ or[y]);
                    for (bit, c) in counts.iter_mut().enumerate() {
                        if agreed >> bit & 1 == 1 {
                            *c += size[y];
                        }
                    }
                }
            }
            counts
        })
        .reduce(
            || [0u64; 8],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    counts.map(|c| c as f64 / (1u64 << 24) as f64)
}

/// Whether the queries determine every `x` modulo 128, i.e. the candidate
/// set of each `x` is exactly `{x, x ^ 128}`.
pub fn queries_resolve_mod_128(queries: &[(u8, u8)]) -> bool {
    (0..=255u8).all(|x| {
        let cons: Vec<Constraint> = queries
            .iter()
            .map(|&(a, b)| Constraint::observe(x, a, b))
            .collect();
        candidates(&cons) == CandidateSet::from_values([x, x ^ 128])
    })
}

/// Single queries `(alpha, beta)` that determine every `x` modulo 128.
/// Uses the output histogram: by the `x ^ 128` closure a query resolves all
/// `x` iff every reached output has exactly two preimages.
pub fn resolving_single_queries() -> Vec<(u8, u8)> {
    (0..=255u8)
        .into_par_iter()
        .flat_map_iter(|alpha| {
            (0..=255u8).filter_map(move |beta| {
                let mut hist = [0u16; 256];
                for x in 0..=255u8 {
                    hist[core_map(x, alpha, beta) as usize] += 1;
                }
                hist.iter()
                    .all(|&h| h == 0 || h == 2)
                    .then_some((alpha, beta))
            })
        })
        .collect()
}
