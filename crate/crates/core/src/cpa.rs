//! Chosen-plaintext attacks.
//!
//! Encrypting the uniform image `(R, G, B) = (0, 170, 85)` removes the
//! permutation (uniform channels are permutation invariant) and the nibble
//! rotation (all three values are rotation invariant). Neighbouring
//! ciphertext differences then give, at every sequence position `p`,
//!
//! ```text
//! R'(p)^R'(p-1)^G'(p)^G'(p-1) = X~_p ^ (170 + X~_p)
//! G'(p)^G'(p-1)^B'(p)^B'(p-1) = (170 + X~_p) ^ (85 + X~_p)
//! ```
//!
//! which together fix `X~_p` modulo 128. A second image carrying a few
//! marker pixels then exposes the permutation once diffusion is stripped.

use std::sync::OnceLock;

use crate::addxor::{CandidateSet, Constraint};
use crate::cipher::{
    check_permutation, permutation_axis, rotate_nibbles, unchain, RgbImage, SecretKey, ZigzagMap,
};
use crate::error::{Error, Result};
use crate::mtlm::generate_keystream;

/// Background of the uniform query, per channel.
pub const UNIFORM_QUERY: [u8; 3] = [0, 170, 85];
/// Marker values placed on top of the uniform query, per marker.
pub const MARKER_VALUES: [u8; 3] = [17, 34, 51];

/// What an attacker needs to decrypt without the chaotic parameters.
///
/// Streams are indexed by zigzag sequence position. `x_tilde` is the `X`
/// keystream byte consumed at the raster pixel that lands at that position,
/// with bit 7 cleared; `w` is `Y~ ^ Z` with the cleared bit folded in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalentKey {
    pub height: usize,
    pub width: usize,
    /// Canonical permutation parameters, see [`canonical_permutation_params`].
    pub r: [u8; 6],
    pub x_tilde: Vec<u8>,
    pub w: Vec<u8>,
    /// Positions where `x_tilde` was not uniquely determined modulo 128.
    pub ambiguous: Vec<bool>,
}

impl EquivalentKey {
    /// The equivalent key a perfect attacker would recover for `key` on
    /// `height x width` images.
    pub fn from_secret(key: &SecretKey, height: usize, width: usize) -> Result<Self> {
        key.check_dimensions(height, width)?;
        let len = height * width;
        let ks = generate_keystream(key, len)?;
        let zz = ZigzagMap::new(height, width);
        let mut x_tilde = Vec::with_capacity(len);
        let mut w = Vec::with_capacity(len);
        for p in 0..len {
            let i = zz.to_raster(p);
            let x = ks.x()[i];
            x_tilde.push(x & 0x7F);
            w.push(ks.y()[i] ^ ks.z()[p] ^ (x & 0x80));
        }
        Ok(Self {
            height,
            width,
            r: canonical_permutation_params(&key.r, height, width),
            x_tilde,
            w,
            ambiguous: vec![false; len],
        })
    }

    pub fn len(&self) -> usize {
        self.x_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_tilde.is_empty()
    }

    pub fn ambiguous_count(&self) -> usize {
        self.ambiguous.iter().filter(|a| **a).count()
    }

    pub(crate) fn check_shape(&self, img: &RgbImage) -> Result<()> {
        let len = self.height * self.width;
        if img.height() != self.height
            || img.width() != self.width
            || self.x_tilde.len() != len
            || self.w.len() != len
            || self.ambiguous.len() != len
        {
            return Err(Error::Shape(format!(
                "equivalent key for {}x{} applied to {}x{} image",
                self.height,
                self.width,
                img.height(),
                img.width()
            )));
        }
        Ok(())
    }
}

/// Smallest odd `r` in `[1, 255]` inducing the same permutation axis as the
/// given one. Parameters congruent modulo the dimension are
/// indistinguishable, so recovered keys are reported in this form.
pub fn canonical_param(r: u8, dim: usize) -> u8 {
    let target = permutation_axis(r, dim);
    (1..=255u8)
        .step_by(2)
        .find(|&c| permutation_axis(c, dim) == target)
        .unwrap_or(r)
}

pub fn canonical_permutation_params(r: &[u8; 6], height: usize, width: usize) -> [u8; 6] {
    let mut out = *r;
    for (u, v) in out.iter_mut().enumerate() {
        *v = canonical_param(*v, if u % 2 == 0 { height } else { width });
    }
    out
}

/// Undoes zigzag and nonlinear diffusion with recovered streams, returning
/// the permuted image in raster order.
pub fn strip_diffusion(cipher: &RgbImage, x_tilde: &[u8], w: &[u8]) -> Result<RgbImage> {
    let len = cipher.len();
    if x_tilde.len() != len || w.len() != len {
        return Err(Error::Shape(format!(
            "streams of length {} / {} for {len} pixels",
            x_tilde.len(),
            w.len()
        )));
    }
    let zz = ZigzagMap::new(cipher.height(), cipher.width());
    let mut chans: [Vec<u8>; 3] = Default::default();
    for (c, out) in chans.iter_mut().enumerate() {
        *out = vec![0u8; len];
        for (p, d) in unchain(cipher.channel(c)).enumerate() {
            let rotated = (d ^ w[p]).wrapping_sub(x_tilde[p]);
            out[zz.to_raster(p)] = rotate_nibbles(rotated);
        }
    }
    let [r, g, b] = chans;
    RgbImage::new(cipher.height(), cipher.width(), r, g, b)
}

/// An encryption oracle under a fixed hidden key.
pub trait EncryptionOracle {
    fn query(&mut self, plain: &RgbImage) -> Result<RgbImage>;

    /// Number of queries answered so far.
    fn queries(&self) -> usize;
}

/// Oracle backed by a closure, counting every call.
pub struct CountingOracle<F> {
    encrypt: F,
    queries: usize,
}

impl<F> CountingOracle<F>
where
    F: FnMut(&RgbImage) -> Result<RgbImage>,
{
    pub fn new(encrypt: F) -> Self {
        Self {
            encrypt,
            queries: 0,
        }
    }
}

/// Oracle that encrypts with a known secret key.
pub fn key_oracle(key: SecretKey) -> CountingOracle<impl FnMut(&RgbImage) -> Result<RgbImage>> {
    CountingOracle::new(move |img: &RgbImage| crate::cipher::encrypt(img, &key))
}

impl<F> EncryptionOracle for CountingOracle<F>
where
    F: FnMut(&RgbImage) -> Result<RgbImage>,
{
    fn query(&mut self, plain: &RgbImage) -> Result<RgbImage> {
        self.queries += 1;
        (self.encrypt)(plain)
    }

    fn queries(&self) -> usize {
        self.queries
    }
}

/// Refuses queries beyond a fixed budget.
struct Budgeted<'a, O: ?Sized> {
    inner: &'a mut O,
    used: usize,
    budget: usize,
}

impl<'a, O: EncryptionOracle + ?Sized> Budgeted<'a, O> {
    fn new(inner: &'a mut O, budget: usize) -> Self {
        Self {
            inner,
            used: 0,
            budget,
        }
    }

    fn query(&mut self, plain: &RgbImage) -> Result<RgbImage> {
        if self.used == self.budget {
            return Err(Error::QueryBudgetExceeded {
                budget: self.budget,
            });
        }
        self.used += 1;
        let cipher = self.inner.query(plain)?;
        cipher.ensure_same_shape(plain)?;
        Ok(cipher)
    }
}

pub fn build_uniform_query(height: usize, width: usize) -> Result<RgbImage> {
    RgbImage::filled(height, width, UNIFORM_QUERY)
}

/// `(y1, y2) -> canonical x` for the query pair `(0, 170)`, `(170, 85)`;
/// 0xFF marks unreachable pairs.
fn uniform_query_table() -> &'static [u8] {
    static TABLE: OnceLock<Vec<u8>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0xFFu8; 1 << 16];
        for x in 0..128u8 {
            let y1 = crate::addxor::core_map(x, 0, 170) as usize;
            let y2 = crate::addxor::core_map(x, 170, 85) as usize;
            debug_assert_eq!(t[y1 << 8 | y2], 0xFF, "pair must separate x mod 128");
            t[y1 << 8 | y2] = x;
        }
        t
    })
}

/// Recovers `X~` modulo 128 from the ciphertext of the uniform query.
pub fn recover_x_stream(cipher: &RgbImage) -> Result<Vec<u8>> {
    let table = uniform_query_table();
    let dr = unchain(cipher.channel(0));
    let dg = unchain(cipher.channel(1));
    let db = unchain(cipher.channel(2));
    dr.zip(dg)
        .zip(db)
        .enumerate()
        .map(|(p, ((r, g), b))| {
            let (y1, y2) = ((r ^ g) as usize, (g ^ b) as usize);
            match table[y1 << 8 | y2] {
                0xFF => Err(Error::EmptyCandidate { position: p }),
                x => Ok(x),
            }
        })
        .collect()
}

/// Recovers `w = Y~ ^ Z` (with bit 7 of `X~` folded in) from the uniform
/// query ciphertext, cross-checking all three channels.
pub fn recover_w_stream(cipher: &RgbImage, x_tilde: &[u8]) -> Result<Vec<u8>> {
    if x_tilde.len() != cipher.len() {
        return Err(Error::Shape(format!(
            "X~ has {} bytes for {} pixels",
            x_tilde.len(),
            cipher.len()
        )));
    }
    let dr = unchain(cipher.channel(0));
    let dg = unchain(cipher.channel(1));
    let db = unchain(cipher.channel(2));
    dr.zip(dg)
        .zip(db)
        .zip(x_tilde)
        .enumerate()
        .map(|(p, (((r, g), b), &x))| {
            let w = r ^ x;
            let wg = g ^ UNIFORM_QUERY[1].wrapping_add(x);
            let wb = b ^ UNIFORM_QUERY[2].wrapping_add(x);
            if w == wg && w == wb {
                Ok(w)
            } else {
                Err(Error::CrossCheckMismatch { position: p })
            }
        })
        .collect()
}

/// Marker positions (zero-based row, col) for an `height x width` query.
///
/// Rows and columns are drawn from the even 1-based indices when at least
/// three exist, spread evenly, so marker `k` sits at row/column
/// `pool[k * |pool| / 3]`. Smaller images fall back to all indices, and
/// coincident positions are replaced by the first free raster positions.
pub fn marker_positions(height: usize, width: usize) -> Vec<(usize, usize)> {
    fn pick(dim: usize) -> [usize; 3] {
        // zero-based index i is even 1-based when i is odd
        let even: Vec<usize> = (1..dim).step_by(2).collect();
        let pool: Vec<usize> = if even.len() >= 3 {
            even
        } else {
            (0..dim).collect()
        };
        [0, 1, 2].map(|k| pool[k * pool.len() / 3])
    }
    let (rows, cols) = (pick(height), pick(width));
    let mut out: Vec<(usize, usize)> = Vec::with_capacity(3);
    for k in 0..3 {
        let pos = (rows[k], cols[k]);
        if !out.contains(&pos) {
            out.push(pos);
        }
    }
    let mut fill = (0..height * width).map(|i| (i / width, i % width));
    while out.len() < 3.min(height * width) {
        let pos = fill.next().expect("enough pixels");
        if !out.contains(&pos) {
            out.push(pos);
        }
    }
    out
}

/// The uniform query with up to three marker pixels per channel.
pub fn build_marker_query(height: usize, width: usize) -> Result<RgbImage> {
    let mut img = build_uniform_query(height, width)?;
    for (k, &(row, col)) in marker_positions(height, width).iter().enumerate() {
        img.set_pixel(row * width + col, [MARKER_VALUES[k]; 3]);
    }
    Ok(img)
}

/// Odd parameters consistent with "destination `dst` reads source `src`"
/// along one axis of length `dim` (zero-based indices).
fn axis_candidates(dst: usize, src: usize, dim: usize) -> Vec<u8> {
    (1..=255u8)
        .step_by(2)
        .filter(|&r| ((dst + 1) % dim * (31 * r as usize % dim)) % dim == src)
        .collect()
}

/// Collapses candidates to one permutation class and returns its smallest
/// member.
fn resolve_class(index: usize, survivors: &[u8], dim: usize) -> Result<u8> {
    let Some(&first) = survivors.first() else {
        return Err(Error::NoCandidate { index });
    };
    let axis = permutation_axis(first, dim);
    if survivors[1..]
        .iter()
        .all(|&r| permutation_axis(r, dim) == axis)
    {
        Ok(first)
    } else {
        Err(Error::AmbiguousParameter {
            index,
            candidates: survivors.to_vec(),
        })
    }
}

/// Recovers the six permutation parameters from the marker query, given
/// the diffusion streams. Markers are the plain pixels that differ from the
/// uniform background.
pub fn recover_permutation_params(
    marker_cipher: &RgbImage,
    x_tilde: &[u8],
    w: &[u8],
    marker_plain: &RgbImage,
) -> Result<[u8; 6]> {
    marker_cipher.ensure_same_shape(marker_plain)?;
    let (h, wd) = (marker_plain.height(), marker_plain.width());
    let permuted = strip_diffusion(marker_cipher, x_tilde, w)?;
    let mut r = [0u8; 6];
    for c in 0..3 {
        let bg = UNIFORM_QUERY[c];
        let plain = marker_plain.channel(c);
        let seen = permuted.channel(c);
        let mut rows: Vec<u8> = (1..=255u8).step_by(2).collect();
        let mut cols = rows.clone();
        for (src, &v) in plain.iter().enumerate().filter(|(_, &v)| v != bg) {
            let mut hits = seen.iter().enumerate().filter(|(_, &s)| s == v);
            let (dst, _) = hits.next().ok_or_else(|| {
                Error::MarkerNotFound(format!("channel {c}: value {v} is absent"))
            })?;
            if hits.next().is_some() {
                return Err(Error::MarkerNotFound(format!(
                    "channel {c}: value {v} appears more than once"
                )));
            }
            let row_ok = axis_candidates(dst / wd, src / wd, h);
            let col_ok = axis_candidates(dst % wd, src % wd, wd);
            rows.retain(|x| row_ok.contains(x));
            cols.retain(|x| col_ok.contains(x));
        }
        if seen.iter().filter(|&&s| s != bg).count() != plain.iter().filter(|&&v| v != bg).count() {
            return Err(Error::MarkerNotFound(format!(
                "channel {c}: stripped image has stray non-background pixels"
            )));
        }
        r[2 * c] = resolve_class(2 * c + 1, &rows, h)?;
        r[2 * c + 1] = resolve_class(2 * c + 2, &cols, wd)?;
    }
    check_permutation(&r, h, wd)?;
    Ok(r)
}

/// The two-query attack: one uniform image for the diffusion streams, one
/// marker image for the permutation.
pub fn cpa_attack<O>(oracle: &mut O, height: usize, width: usize) -> Result<EquivalentKey>
where
    O: EncryptionOracle + ?Sized,
{
    let mut oracle = Budgeted::new(oracle, 2);
    let uniform = oracle.query(&build_uniform_query(height, width)?)?;
    let x_tilde = recover_x_stream(&uniform)?;
    let w = recover_w_stream(&uniform, &x_tilde)?;
    let marker_plain = build_marker_query(height, width)?;
    let marker_cipher = oracle.query(&marker_plain)?;
    let r = recover_permutation_params(&marker_cipher, &x_tilde, &w, &marker_plain)?;
    let len = height * width;
    Ok(EquivalentKey {
        height,
        width,
        r,
        x_tilde,
        w,
        ambiguous: vec![false; len],
    })
}

/// Channel values of the `k`-th baseline query: `3k, 3k + 1, 3k + 2`,
/// with values past 255 replaced by 0.
pub fn baseline_query_values(k: usize) -> [u8; 3] {
    [0, 1, 2].map(|c| u8::try_from(3 * k + c).unwrap_or(0))
}

pub const BASELINE_UNIFORM_QUERIES: usize = 86;

/// The earlier 87-image attack: 86 uniform images whose channels sweep all
/// 256 byte values narrow `X~` by intersection, then one marker image
/// recovers the permutation.
pub fn zhang_baseline_attack<O>(
    oracle: &mut O,
    height: usize,
    width: usize,
) -> Result<EquivalentKey>
where
    O: EncryptionOracle + ?Sized,
{
    let mut oracle = Budgeted::new(oracle, BASELINE_UNIFORM_QUERIES + 1);
    let len = height * width;
    let mut sets = vec![CandidateSet::full(); len];
    let mut first_cipher = None;
    for k in 0..BASELINE_UNIFORM_QUERIES {
        let vals = baseline_query_values(k);
        let cipher = oracle.query(&RgbImage::filled(height, width, vals)?)?;
        let rot = vals.map(rotate_nibbles);
        let d: Vec<Vec<u8>> = (0..3)
            .map(|c| unchain(cipher.channel(c)).collect())
            .collect();
        for (p, set) in sets.iter_mut().enumerate() {
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                let con = Constraint::new(d[a][p] ^ d[b][p], rot[a], rot[b]);
                for x in set.iter().collect::<Vec<_>>() {
                    if !con.satisfied_by(x) {
                        set.remove(x);
                    }
                }
            }
        }
        if k == 0 {
            first_cipher = Some(cipher);
        }
    }
    let mut x_tilde = Vec::with_capacity(len);
    for (p, set) in sets.iter().enumerate() {
        let canon = set.canonical();
        match canon.len() {
            0 => return Err(Error::EmptyCandidate { position: p }),
            1 => x_tilde.push(canon.least().unwrap()),
            _ => {
                return Err(Error::AmbiguousParameter {
                    index: 0,
                    candidates: canon.iter().collect(),
                })
            }
        }
    }
    // the first query is all-zero red, so its R-channel difference is X~ ^ w
    let first = first_cipher.expect("at least one uniform query");
    let vals = baseline_query_values(0).map(rotate_nibbles);
    let d: Vec<Vec<u8>> = (0..3)
        .map(|c| unchain(first.channel(c)).collect())
        .collect();
    let mut w = Vec::with_capacity(len);
    for p in 0..len {
        let est = [0, 1, 2].map(|c| d[c][p] ^ vals[c].wrapping_add(x_tilde[p]));
        if est[0] != est[1] || est[0] != est[2] {
            return Err(Error::CrossCheckMismatch { position: p });
        }
        w.push(est[0]);
    }
    let marker_plain = build_marker_query(height, width)?;
    let marker_cipher = oracle.query(&marker_plain)?;
    let r = recover_permutation_params(&marker_cipher, &x_tilde, &w, &marker_plain)?;
    Ok(EquivalentKey {
        height,
        width,
        r,
        x_tilde,
        w,
        ambiguous: vec![false; len],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addxor::candidates;
    use crate::cipher::encrypt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0xC0A)
    }

    #[test]
    fn uniform_query_is_rotation_invariant() {
        for v in UNIFORM_QUERY {
            assert_eq!(rotate_nibbles(v), v);
        }
        let q = build_uniform_query(1, 1).unwrap();
        assert_eq!(q.pixel(0), [0, 170, 85]);
        let q = build_uniform_query(3, 4).unwrap();
        assert!((0..12).all(|i| q.pixel(i) == [0, 170, 85]));
    }

    #[test]
    fn table_agrees_with_candidates() {
        let t = uniform_query_table();
        for x in 0..=255u8 {
            let c = candidates(&[
                Constraint::observe(x, 0, 170),
                Constraint::observe(x, 170, 85),
            ]);
            let key = (c_y(x, 0, 170) as usize) << 8 | c_y(x, 170, 85) as usize;
            assert_eq!(t[key], c.canonical().least().unwrap());
            assert_eq!(t[key], x & 0x7F);
        }
        fn c_y(x: u8, a: u8, b: u8) -> u8 {
            crate::addxor::core_map(x, a, b)
        }
    }

    #[test]
    fn recovers_streams_single_pixel() {
        let mut rng = rng();
        let key = SecretKey::random(&mut rng);
        let cipher = encrypt(&build_uniform_query(1, 1).unwrap(), &key).unwrap();
        let truth = EquivalentKey::from_secret(&key, 1, 1).unwrap();
        let x = recover_x_stream(&cipher).unwrap();
        assert_eq!(x, truth.x_tilde);
        assert_eq!(recover_w_stream(&cipher, &x).unwrap(), truth.w);
    }

    #[test]
    fn recovers_streams_against_ground_truth() {
        let mut rng = rng();
        for _ in 0..5 {
            let key = SecretKey::random_for(64, 64, &mut rng).unwrap();
            let cipher = encrypt(&build_uniform_query(64, 64).unwrap(), &key).unwrap();
            let truth = EquivalentKey::from_secret(&key, 64, 64).unwrap();
            let x = recover_x_stream(&cipher).unwrap();
            assert_eq!(x, truth.x_tilde);
            let w = recover_w_stream(&cipher, &x).unwrap();
            assert_eq!(w, truth.w);
        }
    }

    #[test]
    fn all_zero_cipher_is_rejected() {
        let zero = RgbImage::filled(4, 4, [0, 0, 0]).unwrap();
        assert!(matches!(
            recover_x_stream(&zero),
            Err(Error::EmptyCandidate { position: 0 })
        ));
        assert!(matches!(
            recover_w_stream(&zero, &[5; 16]),
            Err(Error::CrossCheckMismatch { position: 0 })
        ));
    }

    #[test]
    fn single_byte_tampering_is_detected() {
        let mut rng = rng();
        let (h, w) = (16, 16);
        let key = SecretKey::random_for(h, w, &mut rng).unwrap();
        let cipher = encrypt(&build_uniform_query(h, w).unwrap(), &key).unwrap();
        for _ in 0..200 {
            let mut bad = cipher.clone();
            let (c, p) = (rng.gen_range(0..3), rng.gen_range(0..h * w));
            let flip = rng.gen_range(1..=255u8);
            bad.channel_mut(c)[p] ^= flip;
            let detected = match recover_x_stream(&bad) {
                Err(Error::EmptyCandidate { .. }) => true,
                Ok(x) => recover_w_stream(&bad, &x).is_err(),
                Err(e) => panic!("unexpected {e}"),
            };
            assert!(detected, "channel {c} position {p} flip {flip:#x}");
        }
    }

    #[test]
    fn marker_layout_256() {
        let pos = marker_positions(256, 256);
        // even 1-based rows 2, 86, 172
        assert_eq!(pos, vec![(1, 1), (85, 85), (171, 171)]);
        let q = build_marker_query(256, 256).unwrap();
        for c in 0..3 {
            let odd: Vec<_> = q
                .channel(c)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != UNIFORM_QUERY[c])
                .map(|(i, &v)| (i, v))
                .collect();
            assert_eq!(odd.len(), 3);
            let vals: Vec<u8> = odd.iter().map(|x| x.1).collect();
            assert_eq!(vals, MARKER_VALUES);
        }
    }

    #[test]
    fn marker_layout_small_images() {
        for (h, w) in [(2, 2), (2, 5), (3, 3), (1, 1), (1, 7), (5, 2)] {
            let pos = marker_positions(h, w);
            assert_eq!(pos.len(), 3.min(h * w), "{h}x{w}");
            let mut uniq = pos.clone();
            uniq.dedup();
            assert_eq!(uniq.len(), pos.len());
            assert!(pos.iter().all(|&(r, c)| r < h && c < w));
        }
        assert!(MARKER_VALUES.iter().all(|v| !UNIFORM_QUERY.contains(v)));
    }

    #[test]
    fn single_marker_is_unique_for_power_of_two() {
        // marker at 1-based row 2: 31 * i * r = 1 (mod 256) has one odd root
        for r in (1..=255u8).step_by(2) {
            let axis = permutation_axis(r, 256);
            let dst = axis.iter().position(|&s| s == 1).unwrap();
            assert_eq!(axis_candidates(dst, 1, 256), vec![r]);
        }
    }

    #[test]
    fn canonical_params() {
        assert_eq!(canonical_param(123, 256), 123);
        assert_eq!(canonical_param(123, 64), 59);
        assert_eq!(canonical_param(3, 1), 1);
        // odd dimension: 7 + 5 = 12 is even, next is 17
        assert_eq!(canonical_param(17, 5), 7);
    }

    #[test]
    fn attack_recovers_key_and_counts_queries() {
        let mut rng = rng();
        for (h, w) in [
            (64, 64),
            (16, 48),
            (96, 160),
            (2, 2),
            (1, 1),
            (1, 9),
            (15, 21),
        ] {
            let key = SecretKey::random_for(h, w, &mut rng).unwrap();
            let mut oracle = key_oracle(key);
            let ek = cpa_attack(&mut oracle, h, w).unwrap();
            assert_eq!(oracle.queries(), 2);
            assert_eq!(
                ek,
                EquivalentKey::from_secret(&key, h, w).unwrap(),
                "{h}x{w}"
            );
        }
    }

    #[test]
    fn baseline_matches_optimum() {
        let mut rng = rng();
        let (h, w) = (16, 24);
        let key = SecretKey::random_for(h, w, &mut rng).unwrap();
        let mut oracle = key_oracle(key);
        let base = zhang_baseline_attack(&mut oracle, h, w).unwrap();
        assert_eq!(oracle.queries(), 87);
        let mut oracle = key_oracle(key);
        assert_eq!(base, cpa_attack(&mut oracle, h, w).unwrap());
    }

    #[test]
    fn baseline_query_packing() {
        assert_eq!(baseline_query_values(0), [0, 1, 2]);
        assert_eq!(baseline_query_values(85), [255, 0, 0]);
        let mut seen = [false; 256];
        for k in 0..BASELINE_UNIFORM_QUERIES {
            for v in baseline_query_values(k) {
                seen[v as usize] = true;
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn budget_is_enforced() {
        let key = SecretKey::sample();
        let mut inner = key_oracle(key);
        let mut budget = Budgeted::new(&mut inner, 1);
        let q = build_uniform_query(4, 4).unwrap();
        assert!(budget.query(&q).is_ok());
        assert!(matches!(
            budget.query(&q),
            Err(Error::QueryBudgetExceeded { budget: 1 })
        ));
        assert_eq!(inner.queries(), 1);
    }
}
