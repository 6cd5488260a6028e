//! Known-plaintext attacks.
//!
//! Along the last column every destination pixel reads plain column 0, and
//! along the last row it reads plain row 0, so one permutation parameter
//! can be tested at a time. For two known pairs encrypted under the same key
//! the neighbour-XOR of the ciphertexts at such an anchor satisfies
//!
//! ```text
//! C1'(q)^C1'(q-1)^C2'(q)^C2'(q-1) = (rot(P1[s]) + X) ^ (rot(P2[s]) + X)
//! ```
//!
//! where `s` is the source the candidate parameter predicts. A candidate
//! whose predicted sources admit no `X` is rejected. With the permutation
//! known, every position yields 15 such constraints across the six known
//! bytes, which narrow `X~` and then give `w` directly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::addxor::{core_map, verify_exists_counted, CandidateSet};
use crate::cipher::{
    check_permutation, gcd, inverse_permute, permute, rotate_nibbles, unchain, RgbImage, ZigzagMap,
};
use crate::cpa::{canonical_param, strip_diffusion, EquivalentKey};
use crate::error::{Error, Result};

/// Discriminative passes after which a candidate is accepted.
pub const REQUIRED_PASSES: usize = 3;

#[derive(Debug, Clone, Copy)]
pub struct KnownPair<'a> {
    pub plain: &'a RgbImage,
    pub cipher: &'a RgbImage,
}

impl<'a> KnownPair<'a> {
    pub fn new(plain: &'a RgbImage, cipher: &'a RgbImage) -> Result<Self> {
        plain.ensure_same_shape(cipher)?;
        Ok(Self { plain, cipher })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanMode {
    /// Stop after [`REQUIRED_PASSES`]; survivors that tie keep scanning.
    #[default]
    Default,
    /// Verify every anchor for every candidate.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Row,
    Col,
}

/// One image channel seen through its neighbour-XORed ciphertext.
struct Side<'a> {
    plain: &'a [u8],
    diff: Vec<u8>,
}

impl<'a> Side<'a> {
    fn new(pair: &KnownPair<'a>, c: usize) -> Self {
        Self {
            plain: pair.plain.channel(c),
            diff: unchain(pair.cipher.channel(c)).collect(),
        }
    }
}

struct Geometry {
    height: usize,
    width: usize,
    zz: ZigzagMap,
}

impl Geometry {
    fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            zz: ZigzagMap::new(height, width),
        }
    }

    fn dim(&self, axis: Axis) -> usize {
        match axis {
            Axis::Row => self.height,
            Axis::Col => self.width,
        }
    }

    /// Sequence positions of the anchors, skipping the corner.
    fn anchors(&self, axis: Axis) -> Vec<usize> {
        let (h, w) = (self.height, self.width);
        match axis {
            Axis::Row => (1..h).map(|i| self.zz.from_raster(i * w - 1)).collect(),
            Axis::Col => (1..w)
                .map(|j| self.zz.from_raster((h - 1) * w + j - 1))
                .collect(),
        }
    }

    /// Raster source of anchor `k` (zero-based) under axis parameter `step = 31 r mod dim`.
    fn source(&self, axis: Axis, k: usize, step: usize) -> usize {
        let dim = self.dim(axis);
        let s = (k + 1) * step % dim;
        match axis {
            Axis::Row => s * self.width,
            Axis::Col => s,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Scan {
    failed: bool,
    passes: usize,
    evals: u64,
}

/// Verifies anchors in order until one fails or `limit` discriminative
/// passes accumulate.
fn scan(
    geo: &Geometry,
    axis: Axis,
    anchors: &[usize],
    (a, b): (&Side, &Side),
    (step_a, step_b): (usize, usize),
    limit: Option<usize>,
) -> Scan {
    let mut out = Scan {
        failed: false,
        passes: 0,
        evals: 0,
    };
    for (k, &q) in anchors.iter().enumerate() {
        let pa = a.plain[geo.source(axis, k, step_a)];
        let pb = b.plain[geo.source(axis, k, step_b)];
        if pa == pb {
            continue;
        }
        let d = a.diff[q] ^ b.diff[q];
        if !verify_exists_counted(d, rotate_nibbles(pa), rotate_nibbles(pb), &mut out.evals) {
            out.failed = true;
            return out;
        }
        out.passes += 1;
        if limit == Some(out.passes) {
            break;
        }
    }
    out
}

/// Odd parameters worth testing on an axis of length `dim`: one per
/// permutation class, bijective only.
fn axis_classes(dim: usize) -> Vec<u8> {
    (1..=255u8)
        .step_by(2)
        .filter(|&r| gcd(31 * r as usize, dim) == 1 && canonical_param(r, dim) == r)
        .collect()
}

/// Result of testing a family of hypotheses.
struct Search<H> {
    survivors: Vec<H>,
    /// Some hypothesis was never refuted, possibly for lack of anchors.
    unrefuted: bool,
    best_passes: usize,
    evals: u64,
}

/// Runs the accept/reject rule over `hyps`. `run(h, limit)` scans one
/// hypothesis.
fn search<H, F>(hyps: &[H], mode: ScanMode, run: F) -> Search<H>
where
    H: Copy + Send + Sync,
    F: Fn(H, Option<usize>) -> Scan + Sync,
{
    if let [only] = hyps {
        return Search {
            survivors: vec![*only],
            unrefuted: true,
            best_passes: 0,
            evals: 0,
        };
    }
    let first_limit = match mode {
        ScanMode::Default => Some(REQUIRED_PASSES),
        ScanMode::Strict => None,
    };
    let scans: Vec<(H, Scan)> = hyps.par_iter().map(|&h| (h, run(h, first_limit))).collect();
    let mut evals: u64 = scans.iter().map(|(_, s)| s.evals).sum();
    let unrefuted = scans.iter().any(|(_, s)| !s.failed);
    let best_passes = scans
        .iter()
        .filter(|(_, s)| !s.failed)
        .map(|(_, s)| s.passes)
        .max()
        .unwrap_or(0);
    let mut survivors: Vec<H> = scans
        .iter()
        .filter(|(_, s)| !s.failed && s.passes >= REQUIRED_PASSES)
        .map(|(h, _)| *h)
        .collect();
    if mode == ScanMode::Default && survivors.len() > 1 {
        let rescans: Vec<(H, Scan)> = survivors.par_iter().map(|&h| (h, run(h, None))).collect();
        evals += rescans.iter().map(|(_, s)| s.evals).sum::<u64>();
        survivors = rescans
            .into_iter()
            .filter(|(_, s)| !s.failed)
            .map(|(h, _)| h)
            .collect();
    }
    Search {
        survivors,
        unrefuted,
        best_passes,
        evals,
    }
}

fn settle<H: Copy>(index: usize, found: &Search<H>) -> Result<H> {
    match found.survivors.as_slice() {
        [h] => Ok(*h),
        [] if found.unrefuted => Err(Error::InsufficientContrast {
            index,
            found: found.best_passes,
            needed: REQUIRED_PASSES,
        }),
        [] => Err(Error::NoCandidate { index }),
        _ => Err(Error::AmbiguousParameter {
            index,
            candidates: Vec::new(),
        }),
    }
}

fn with_candidates(e: Error, survivors: &[u8]) -> Error {
    match e {
        Error::AmbiguousParameter { index, .. } => Error::AmbiguousParameter {
            index,
            candidates: survivors.to_vec(),
        },
        other => other,
    }
}

fn step(r: u8, dim: usize) -> usize {
    31 * r as usize % dim
}

/// Parameter recovery with evaluation count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamRecovery {
    /// Smallest member of the recovered permutation class.
    pub value: u8,
    /// Core-map evaluations spent.
    pub evaluations: u64,
}

/// Recovers the permutation parameter `r[index]` (zero-based: even indices
/// drive rows, odd ones columns, channel `index / 2`) from two known pairs.
pub fn recover_permutation_param(
    index: usize,
    first: KnownPair,
    second: KnownPair,
    mode: ScanMode,
) -> Result<ParamRecovery> {
    if index >= 6 {
        return Err(Error::Shape(format!(
            "parameter index {index} out of range"
        )));
    }
    first.plain.ensure_same_shape(second.plain)?;
    let geo = Geometry::new(first.plain.height(), first.plain.width());
    let axis = if index.is_multiple_of(2) { Axis::Row } else { Axis::Col };
    let dim = geo.dim(axis);
    let c = index / 2;
    let (a, b) = (Side::new(&first, c), Side::new(&second, c));
    let anchors = geo.anchors(axis);
    let found = search(&axis_classes(dim), mode, |r, limit| {
        let s = step(r, dim);
        scan(&geo, axis, &anchors, (&a, &b), (s, s), limit)
    });
    let value = settle(index + 1, &found).map_err(|e| with_candidates(e, &found.survivors))?;
    Ok(ParamRecovery {
        value,
        evaluations: found.evals,
    })
}

/// All six parameters from two pairs, with the total evaluation count.
pub fn recover_all_permutation_params(
    first: KnownPair,
    second: KnownPair,
    mode: ScanMode,
) -> Result<([u8; 6], u64)> {
    let mut r = [0u8; 6];
    let mut evals = 0;
    for (u, slot) in r.iter_mut().enumerate() {
        let rec = recover_permutation_param(u, first, second, mode)?;
        *slot = rec.value;
        evals += rec.evaluations;
    }
    Ok((r, evals))
}

/// All six parameters from a single pair.
///
/// Channels are compared against each other instead of across images, so
/// the red and green parameters of an axis are enumerated jointly, then blue
/// against the recovered red.
pub fn recover_permutation_params_one_pair(
    pair: KnownPair,
    mode: ScanMode,
) -> Result<([u8; 6], u64)> {
    let geo = Geometry::new(pair.plain.height(), pair.plain.width());
    let sides = [0, 1, 2].map(|c| Side::new(&pair, c));
    let mut r = [0u8; 6];
    let mut evals = 0;
    for (offset, axis) in [(0, Axis::Row), (1, Axis::Col)] {
        let dim = geo.dim(axis);
        let anchors = geo.anchors(axis);
        let classes = axis_classes(dim);
        let joint: Vec<(u8, u8)> = classes
            .iter()
            .flat_map(|&ra| classes.iter().map(move |&rb| (ra, rb)))
            .collect();
        let found = search(&joint, mode, |(ra, rb), limit| {
            scan(
                &geo,
                axis,
                &anchors,
                (&sides[0], &sides[1]),
                (step(ra, dim), step(rb, dim)),
                limit,
            )
        });
        evals += found.evals;
        let firsts: Vec<u8> = found.survivors.iter().map(|h| h.0).collect();
        let (ra, rb) = settle(offset + 1, &found).map_err(|e| with_candidates(e, &firsts))?;
        let found = search(&classes, mode, |rc, limit| {
            scan(
                &geo,
                axis,
                &anchors,
                (&sides[0], &sides[2]),
                (step(ra, dim), step(rc, dim)),
                limit,
            )
        });
        evals += found.evals;
        let rc = settle(offset + 5, &found).map_err(|e| with_candidates(e, &found.survivors))?;
        r[offset] = ra;
        r[offset + 2] = rb;
        r[offset + 4] = rc;
    }
    Ok((r, evals))
}

/// Candidate sets for `X~`, in sequence order, from every pairwise
/// constraint among the known bytes at each position.
pub fn confirm_x_candidates(pairs: &[KnownPair], r: &[u8; 6]) -> Result<Vec<CandidateSet>> {
    let Some(first) = pairs.first() else {
        return Err(Error::Shape("no known pairs".into()));
    };
    let (h, w) = (first.plain.height(), first.plain.width());
    for p in pairs {
        p.plain.ensure_same_shape(first.plain)?;
        p.cipher.ensure_same_shape(first.plain)?;
    }
    check_permutation(r, h, w)?;
    let zz = ZigzagMap::new(h, w);
    // (rotated known byte, neighbour-XORed cipher byte) per image channel
    let mut known: Vec<(Vec<u8>, Vec<u8>)> = Vec::with_capacity(3 * pairs.len());
    for p in pairs {
        let permuted = permute(p.plain, r)?;
        for c in 0..3 {
            let rot = zz
                .gather(permuted.channel(c))
                .into_iter()
                .map(rotate_nibbles)
                .collect();
            known.push((rot, unchain(p.cipher.channel(c)).collect()));
        }
    }
    (0..h * w)
        .into_par_iter()
        .map(|p| {
            let mut cons = Vec::with_capacity(known.len() * (known.len() - 1) / 2);
            for i in 0..known.len() {
                for j in i + 1..known.len() {
                    cons.push((known[i].1[p] ^ known[j].1[p], known[i].0[p], known[j].0[p]));
                }
            }
            let mut set = CandidateSet::empty();
            for x in 0..128u8 {
                if cons.iter().all(|&(y, a, b)| core_map(x, a, b) == y) {
                    set.insert(x);
                    set.insert(x | 0x80);
                }
            }
            if set.is_empty() {
                Err(Error::EmptyCandidate { position: p })
            } else {
                Ok(set)
            }
        })
        .collect()
}

/// `w` from one known pair and a chosen `X~` per sequence position.
pub fn derive_w_stream(pair: KnownPair, r: &[u8; 6], x_choice: &[u8]) -> Result<Vec<u8>> {
    if x_choice.len() != pair.plain.len() {
        return Err(Error::Shape(format!(
            "{} X~ bytes for {} pixels",
            x_choice.len(),
            pair.plain.len()
        )));
    }
    pair.plain.ensure_same_shape(pair.cipher)?;
    let zz = ZigzagMap::new(pair.plain.height(), pair.plain.width());
    let permuted = permute(pair.plain, r)?;
    let known = zz.gather(permuted.channel(0));
    Ok(unchain(pair.cipher.channel(0))
        .zip(known)
        .zip(x_choice)
        .map(|((d, a), &x)| d ^ rotate_nibbles(a).wrapping_add(x))
        .collect())
}

/// Outcome of a known-plaintext attack.
#[derive(Debug, Clone)]
pub struct KpaOutcome {
    pub key: EquivalentKey,
    /// Core-map evaluations spent recovering the permutation.
    pub evaluations: u64,
    /// Positions by candidate-set size.
    pub set_sizes: BTreeMap<usize, usize>,
    pub elapsed: Duration,
}

impl KpaOutcome {
    pub fn report(&self, accuracy: Option<f64>) -> String {
        let mut s = String::new();
        let r = self.key.r;
        writeln!(s, "r = {r:?}").unwrap();
        writeln!(s, "evaluations = {}", self.evaluations).unwrap();
        writeln!(s, "positions = {}", self.key.len()).unwrap();
        writeln!(s, "ambiguous = {}", self.key.ambiguous_count()).unwrap();
        for (size, count) in &self.set_sizes {
            writeln!(s, "candidates[{size}] = {count}").unwrap();
        }
        if let Some(acc) = accuracy {
            writeln!(s, "accuracy = {acc:.4}").unwrap();
        }
        writeln!(s, "elapsed_ms = {:.3}", self.elapsed.as_secs_f64() * 1e3).unwrap();
        s
    }
}

/// Recovers an equivalent key from one or two known pairs. Where several
/// values of `X~` remain, the least one is used and the position is marked
/// ambiguous.
pub fn kpa_attack(pairs: &[KnownPair], mode: ScanMode) -> Result<KpaOutcome> {
    let start = Instant::now();
    let (r, evaluations) = match pairs {
        [one] => recover_permutation_params_one_pair(*one, mode)?,
        [first, second] => recover_all_permutation_params(*first, *second, mode)?,
        _ => {
            return Err(Error::Shape(format!(
                "expected one or two known pairs, got {}",
                pairs.len()
            )))
        }
    };
    let sets = confirm_x_candidates(pairs, &r)?;
    let mut set_sizes = BTreeMap::new();
    let mut x_tilde = Vec::with_capacity(sets.len());
    let mut ambiguous = Vec::with_capacity(sets.len());
    for set in &sets {
        *set_sizes.entry(set.len()).or_insert(0) += 1;
        x_tilde.push(set.least().expect("non-empty"));
        ambiguous.push(set.len() > 2);
    }
    let w = derive_w_stream(pairs[0], &r, &x_tilde)?;
    let (height, width) = (pairs[0].plain.height(), pairs[0].plain.width());
    Ok(KpaOutcome {
        key: EquivalentKey {
            height,
            width,
            r,
            x_tilde,
            w,
            ambiguous,
        },
        evaluations,
        set_sizes,
        elapsed: start.elapsed(),
    })
}

pub fn decrypt_with_equivalent_key(cipher: &RgbImage, key: &EquivalentKey) -> Result<RgbImage> {
    key.check_shape(cipher)?;
    let permuted = strip_diffusion(cipher, &key.x_tilde, &key.w)?;
    inverse_permute(&permuted, &key.r)
}

/// Fraction of pixels whose three channel bytes all match.
pub fn pixel_accuracy(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    a.ensure_same_shape(b)?;
    if a.is_empty() {
        return Ok(1.0);
    }
    let hits = (0..a.len()).filter(|&i| a.pixel(i) == b.pixel(i)).count();
    Ok(hits as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::{encrypt, SecretKey};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        key: SecretKey,
        plains: Vec<RgbImage>,
        ciphers: Vec<RgbImage>,
    }

    impl Setup {
        fn new(h: usize, w: usize, n: usize, rng: &mut ChaCha8Rng) -> Self {
            let key = SecretKey::random_for(h, w, rng).unwrap();
            Self::with_key(key, h, w, n, rng)
        }

        fn with_key(key: SecretKey, h: usize, w: usize, n: usize, rng: &mut ChaCha8Rng) -> Self {
            let plains: Vec<_> = (0..n)
                .map(|_| RgbImage::random(h, w, rng).unwrap())
                .collect();
            let ciphers = plains.iter().map(|p| encrypt(p, &key).unwrap()).collect();
            Self {
                key,
                plains,
                ciphers,
            }
        }

        fn pair(&self, k: usize) -> KnownPair<'_> {
            KnownPair::new(&self.plains[k], &self.ciphers[k]).unwrap()
        }

        fn truth(&self) -> EquivalentKey {
            let p = &self.plains[0];
            EquivalentKey::from_secret(&self.key, p.height(), p.width()).unwrap()
        }
    }

    #[test]
    fn recovers_sample_key_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = Setup::with_key(SecretKey::sample(), 256, 256, 2, &mut rng);
        let (r, evals) =
            recover_all_permutation_params(s.pair(0), s.pair(1), ScanMode::Default).unwrap();
        assert_eq!(r, [123, 57, 67, 89, 253, 221]);
        assert!(evals <= 2 << 18, "{evals}");
        let (strict, _) =
            recover_all_permutation_params(s.pair(0), s.pair(1), ScanMode::Strict).unwrap();
        assert_eq!(strict, r);
    }

    #[test]
    fn recovers_parameters_on_odd_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (h, w) in [(48, 80), (37, 53), (96, 160), (128, 128)] {
            for _ in 0..3 {
                let s = Setup::new(h, w, 2, &mut rng);
                let (r, _) =
                    recover_all_permutation_params(s.pair(0), s.pair(1), ScanMode::Default)
                        .unwrap();
                assert_eq!(r, s.truth().r, "{h}x{w}");
            }
        }
    }

    #[test]
    fn identical_plains_lack_contrast() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Setup::new(32, 32, 1, &mut rng);
        let p = s.pair(0);
        assert!(matches!(
            recover_permutation_param(0, p, p, ScanMode::Default),
            Err(Error::InsufficientContrast {
                index: 1,
                found: 0,
                ..
            })
        ));
        let flat = RgbImage::filled(32, 32, [9, 9, 9]).unwrap();
        let c = encrypt(&flat, &s.key).unwrap();
        let q = KnownPair::new(&flat, &c).unwrap();
        assert!(recover_all_permutation_params(q, q, ScanMode::Strict).is_err());
    }

    #[test]
    fn unrelated_pairs_find_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Setup::new(64, 64, 1, &mut rng);
        let b = Setup::new(64, 64, 1, &mut rng);
        let res = recover_all_permutation_params(a.pair(0), b.pair(0), ScanMode::Strict);
        assert!(res.is_err());
    }

    #[test]
    fn true_parameter_is_never_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = Setup::new(64, 64, 2, &mut rng);
            let truth = s.truth().r;
            let geo = Geometry::new(64, 64);
            for u in 0..6 {
                let axis = if u % 2 == 0 { Axis::Row } else { Axis::Col };
                let (a, b) = (Side::new(&s.pair(0), u / 2), Side::new(&s.pair(1), u / 2));
                let st = step(truth[u], 64);
                let res = scan(&geo, axis, &geo.anchors(axis), (&a, &b), (st, st), None);
                assert!(!res.failed);
                assert!(res.passes > 40);
            }
        }
    }

    #[test]
    fn confirmed_sets_contain_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let s = Setup::new(32, 48, 2, &mut rng);
            let truth = s.truth();
            let sets = confirm_x_candidates(&[s.pair(0), s.pair(1)], &truth.r).unwrap();
            for (p, set) in sets.iter().enumerate() {
                assert!(set.contains(truth.x_tilde[p]), "position {p}");
                assert!(set.is_msb_closed());
            }
        }
    }

    #[test]
    fn equal_bytes_give_degenerate_constraints() {
        // alpha = beta forces the difference to zero for every x
        for x in 0..=255u8 {
            assert_eq!(core_map(x, 77, 77), 0);
        }
    }

    #[test]
    fn w_is_exact_where_x_is_right() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = Setup::new(24, 40, 2, &mut rng);
        let truth = s.truth();
        assert_eq!(
            derive_w_stream(s.pair(0), &truth.r, &truth.x_tilde).unwrap(),
            truth.w
        );
        assert_eq!(
            derive_w_stream(s.pair(1), &truth.r, &truth.x_tilde).unwrap(),
            truth.w
        );
    }

    #[test]
    fn single_pixel() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = Setup::new(1, 1, 2, &mut rng);
        let truth = s.truth();
        let w = derive_w_stream(s.pair(0), &truth.r, &truth.x_tilde).unwrap();
        assert_eq!(w, truth.w);
        let out = kpa_attack(&[s.pair(0), s.pair(1)], ScanMode::Default).unwrap();
        assert_eq!(out.key.r, [1; 6]);
    }

    #[test]
    fn wrong_x_corrupts_one_pixel_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = Setup::new(16, 16, 2, &mut rng);
        let mut key = s.truth();
        let p = 100;
        key.x_tilde[p] = (key.x_tilde[p] + 1) & 0x7F;
        key.w = derive_w_stream(s.pair(0), &key.r, &key.x_tilde).unwrap();
        let target = RgbImage::random(16, 16, &mut rng).unwrap();
        let out = decrypt_with_equivalent_key(&encrypt(&target, &s.key).unwrap(), &key).unwrap();
        // one byte per channel, landing wherever that channel's permutation sends it
        for c in 0..3 {
            let wrong = (0..256)
                .filter(|&i| out.channel(c)[i] != target.channel(c)[i])
                .count();
            assert!(wrong <= 1, "channel {c}: {wrong}");
        }
    }

    #[test]
    fn true_equivalent_key_decrypts() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (h, w) in [(1, 1), (5, 9), (64, 64)] {
            let key = SecretKey::random_for(h, w, &mut rng).unwrap();
            let ek = EquivalentKey::from_secret(&key, h, w).unwrap();
            let img = RgbImage::random(h, w, &mut rng).unwrap();
            let c = encrypt(&img, &key).unwrap();
            assert_eq!(decrypt_with_equivalent_key(&c, &ek).unwrap(), img);
        }
    }

    #[test]
    fn two_pairs_beat_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = Setup::new(64, 64, 3, &mut rng);
        let two = kpa_attack(&[s.pair(0), s.pair(1)], ScanMode::Default).unwrap();
        let one = kpa_attack(&[s.pair(0)], ScanMode::Default).unwrap();
        assert_eq!(two.key.r, s.truth().r);
        assert_eq!(one.key.r, s.truth().r);
        let acc = |k: &EquivalentKey| {
            pixel_accuracy(
                &decrypt_with_equivalent_key(&s.ciphers[2], k).unwrap(),
                &s.plains[2],
            )
            .unwrap()
        };
        let (a2, a1) = (acc(&two.key), acc(&one.key));
        assert!(a2 > a1, "{a2} vs {a1}");
        assert!(a2 > 0.8 && (0.1..0.6).contains(&a1), "{a2} {a1}");
        assert!(two.report(Some(a2)).contains("accuracy = "));
    }

    #[test]
    fn shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = Setup::new(8, 8, 1, &mut rng);
        let b = Setup::new(8, 9, 1, &mut rng);
        assert!(matches!(
            kpa_attack(&[a.pair(0), b.pair(0)], ScanMode::Default),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            kpa_attack(&[], ScanMode::Default),
            Err(Error::Shape(_))
        ));
        assert!(decrypt_with_equivalent_key(&b.ciphers[0], &a.truth()).is_err());
    }

    #[test]
    fn accuracy_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = RgbImage::random(4, 4, &mut rng).unwrap();
        assert_eq!(pixel_accuracy(&a, &a).unwrap(), 1.0);
        let mut inv = a.clone();
        for c in 0..3 {
            inv.channel_mut(c).iter_mut().for_each(|v| *v = !*v);
        }
        assert_eq!(pixel_accuracy(&a, &inv).unwrap(), 0.0);
        let mut half = a.clone();
        for i in 0..8 {
            half.channel_mut(rng.gen_range(0..3))[i] ^= 1;
        }
        assert_eq!(pixel_accuracy(&a, &half).unwrap(), 0.5);
        assert!(pixel_accuracy(&a, &RgbImage::random(4, 5, &mut rng).unwrap()).is_err());
    }
}
