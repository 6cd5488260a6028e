//! Binary PPM (P6, maxval 255) and synthetic images.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cipher::RgbImage;
use crate::error::{Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(format!("PPM: {}", msg.into()))
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while self
                    .data
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&[u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(bad("truncated header"));
        }
        Ok(&self.data[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("bad {what} `{}`", String::from_utf8_lossy(tok))))
    }
}

pub fn decode_ppm(data: &[u8]) -> Result<RgbImage> {
    let mut h = Header { data, pos: 0 };
    if data.get(..2) != Some(b"P6") {
        return Err(bad("missing P6 magic"));
    }
    h.pos = 2;
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(bad(format!("maxval {maxval} unsupported, only 255")));
    }
    match data.get(h.pos) {
        Some(c) if c.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(bad("expected whitespace after maxval")),
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| bad("dimensions overflow"))?;
    let pixels = &data[h.pos..];
    if pixels.len() != expected {
        return Err(bad(format!(
            "{width}x{height} needs {expected} sample bytes, found {}",
            pixels.len()
        )));
    }
    RgbImage::from_interleaved(height, width, pixels)
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_interleaved());
    out
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    decode_ppm(&std::fs::read(path)?).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_ppm(img))?;
    Ok(())
}

pub fn synth_uniform(height: usize, width: usize, r: u8, g: u8, b: u8) -> Result<RgbImage> {
    RgbImage::filled(height, width, [r, g, b])
}

/// Uniform random bytes from ChaCha8 seeded with `seed`, filling R, then G,
/// then B in raster order.
pub fn synth_random(height: usize, width: usize, seed: u64) -> Result<RgbImage> {
    RgbImage::random(height, width, &mut ChaCha8Rng::seed_from_u64(seed))
}
