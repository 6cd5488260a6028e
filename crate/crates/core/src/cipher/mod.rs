//! The MTLM image cipher.
//!
//! Encryption is three cascaded stages over an `H x W` RGB image:
//!
//! 1. **Permutation**: output pixel `(i, j)` of channel `c` takes input pixel
//!    `(t_row, t_col)` with `t_row = 1 + (31 * i * r[2c]) mod H` and
//!    `t_col = 1 + (31 * j * r[2c + 1]) mod W` (1-based).
//! 2. **Nonlinear diffusion**: at raster index `i`,
//!    `C(i) = ((rotate_nibbles(C(i)) + X_i) mod 256) ^ Y_i`.
//! 3. **Zigzag diffusion**: the raster is re-read in [`ZigzagMap`] order and
//!    chained as `C'(p) = C(p) ^ C'(p - 1) ^ Z_p` with `C'(-1) = 0`.
//!
//! The ciphertext is the chained sequence itself: its raster buffer holds
//! `C'(p)` at index `p`. Consequently the nonlinear stage consumes `X`, `Y`
//! at raster indices while the chain consumes `Z` at sequence positions.

mod image;
mod key;
mod zigzag;

pub use image::RgbImage;
pub use key::SecretKey;
pub use zigzag::ZigzagMap;

pub(crate) use key::{check_permutation, gcd};

use crate::error::{Error, Result};
use crate::mtlm::{generate_keystream, Keystream};

/// Swaps the high and low nibble: `16 * (a mod 16) + a / 16`.
#[inline]
pub const fn rotate_nibbles(a: u8) -> u8 {
    a.rotate_left(4)
}

/// Zero-based source row (or column) for every destination row (or column):
/// `src[i - 1] = (31 * i * r) mod dim`.
pub(crate) fn permutation_axis(r: u8, dim: usize) -> Vec<usize> {
    let step = (31 * r as usize) % dim;
    (1..=dim).map(|i| (i % dim * step) % dim).collect()
}

/// Raster source index for every destination index of channel `c`.
pub(crate) fn permutation_sources(
    r: &[u8; 6],
    c: usize,
    height: usize,
    width: usize,
) -> Vec<usize> {
    let rows = permutation_axis(r[2 * c], height);
    let cols = permutation_axis(r[2 * c + 1], width);
    let mut src = Vec::with_capacity(height * width);
    for &sr in &rows {
        src.extend(cols.iter().map(|&sc| sr * width + sc));
    }
    src
}

pub fn permute(img: &RgbImage, r: &[u8; 6]) -> Result<RgbImage> {
    let (h, w) = (img.height(), img.width());
    check_permutation(r, h, w)?;
    Ok(img.map_channels(|c, plain| {
        permutation_sources(r, c, h, w)
            .into_iter()
            .map(|s| plain[s])
            .collect()
    }))
}

pub fn inverse_permute(img: &RgbImage, r: &[u8; 6]) -> Result<RgbImage> {
    let (h, w) = (img.height(), img.width());
    check_permutation(r, h, w)?;
    Ok(img.map_channels(|c, permuted| {
        let mut out = vec![0u8; permuted.len()];
        for (dst, s) in permutation_sources(r, c, h, w).into_iter().enumerate() {
            out[s] = permuted[dst];
        }
        out
    }))
}

fn check_stream(name: &str, stream: &[u8], len: usize) -> Result<()> {
    if stream.len() == len {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "{name} stream has {} bytes for {len} pixels",
            stream.len()
        )))
    }
}

#[inline]
pub(crate) fn diffuse_byte(a: u8, x: u8, y: u8) -> u8 {
    rotate_nibbles(a).wrapping_add(x) ^ y
}

#[inline]
pub(crate) fn undiffuse_byte(c: u8, x: u8, y: u8) -> u8 {
    rotate_nibbles((c ^ y).wrapping_sub(x))
}

pub fn nonlinear_diffuse(img: &RgbImage, x: &[u8], y: &[u8]) -> Result<RgbImage> {
    check_stream("X", x, img.len())?;
    check_stream("Y", y, img.len())?;
    Ok(img.map_channels(|_, ch| {
        ch.iter()
            .zip(x.iter().zip(y))
            .map(|(&a, (&xi, &yi))| diffuse_byte(a, xi, yi))
            .collect()
    }))
}

pub fn nonlinear_undiffuse(img: &RgbImage, x: &[u8], y: &[u8]) -> Result<RgbImage> {
    check_stream("X", x, img.len())?;
    check_stream("Y", y, img.len())?;
    Ok(img.map_channels(|_, ch| {
        ch.iter()
            .zip(x.iter().zip(y))
            .map(|(&c, (&xi, &yi))| undiffuse_byte(c, xi, yi))
            .collect()
    }))
}

fn check_zigzag(img: &RgbImage, zz: &ZigzagMap) -> Result<()> {
    if zz.height() == img.height() && zz.width() == img.width() {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "zigzag map is {}x{}, image is {}x{}",
            zz.height(),
            zz.width(),
            img.height(),
            img.width()
        )))
    }
}

/// Reorders each channel into zigzag sequence order and XOR-chains it with
/// `z`. The result is stored in sequence order.
pub fn zigzag_diffuse(img: &RgbImage, z: &[u8], zz: &ZigzagMap) -> Result<RgbImage> {
    check_stream("Z", z, img.len())?;
    check_zigzag(img, zz)?;
    Ok(img.map_channels(|_, ch| {
        let mut prev = 0u8;
        zz.gather(ch)
            .into_iter()
            .zip(z)
            .map(|(v, &zp)| {
                prev ^= v ^ zp;
                prev
            })
            .collect()
    }))
}

/// Inverse of [`zigzag_diffuse`], returning the raster-ordered input.
pub fn zigzag_undiffuse(img: &RgbImage, z: &[u8], zz: &ZigzagMap) -> Result<RgbImage> {
    check_stream("Z", z, img.len())?;
    check_zigzag(img, zz)?;
    Ok(img.map_channels(|_, ch| {
        let seq: Vec<u8> = unchain(ch).zip(z).map(|(d, &zp)| d ^ zp).collect();
        zz.scatter(&seq)
    }))
}

/// `C'(p) ^ C'(p - 1)` for every position, with `C'(-1) = 0`.
pub(crate) fn unchain(seq: &[u8]) -> impl Iterator<Item = u8> + '_ {
    std::iter::once(0)
        .chain(seq.iter().copied())
        .zip(seq)
        .map(|(prev, &cur)| prev ^ cur)
}

fn keystream_for(img: &RgbImage, key: &SecretKey) -> Result<Keystream> {
    key.check_dimensions(img.height(), img.width())?;
    generate_keystream(key, img.len())
}

pub fn encrypt(img: &RgbImage, key: &SecretKey) -> Result<RgbImage> {
    let ks = keystream_for(img, key)?;
    encrypt_with_keystream(img, &key.r, &ks)
}

pub fn decrypt(cipher: &RgbImage, key: &SecretKey) -> Result<RgbImage> {
    let ks = keystream_for(cipher, key)?;
    decrypt_with_keystream(cipher, &key.r, &ks)
}

/// Encryption with an explicit keystream, for callers that reuse one.
pub fn encrypt_with_keystream(img: &RgbImage, r: &[u8; 6], ks: &Keystream) -> Result<RgbImage> {
    let zz = ZigzagMap::new(img.height(), img.width());
    let permuted = permute(img, r)?;
    let diffused = nonlinear_diffuse(&permuted, ks.x(), ks.y())?;
    zigzag_diffuse(&diffused, ks.z(), &zz)
}

pub fn decrypt_with_keystream(cipher: &RgbImage, r: &[u8; 6], ks: &Keystream) -> Result<RgbImage> {
    let zz = ZigzagMap::new(cipher.height(), cipher.width());
    let diffused = zigzag_undiffuse(cipher, ks.z(), &zz)?;
    let permuted = nonlinear_undiffuse(&diffused, ks.x(), ks.y())?;
    inverse_permute(&permuted, r)
}
