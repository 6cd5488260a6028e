use rand::Rng;

use crate::error::{Error, Result};

/// An `H x W` 8-bit RGB raster, stored as three planar channels in
/// row-major order (index `row * width + col`, zero based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    height: usize,
    width: usize,
    channels: [Vec<u8>; 3],
}

impl RgbImage {
    pub fn new(height: usize, width: usize, r: Vec<u8>, g: Vec<u8>, b: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Shape(format!("empty image {height}x{width}")));
        }
        let len = height
            .checked_mul(width)
            .ok_or_else(|| Error::Shape(format!("image {height}x{width} is too large")))?;
        for (name, c) in [("R", &r), ("G", &g), ("B", &b)] {
            if c.len() != len {
                return Err(Error::Shape(format!(
                    "channel {name} has {} samples, expected {len}",
                    c.len()
                )));
            }
        }
        Ok(Self {
            height,
            width,
            channels: [r, g, b],
        })
    }

    /// Every pixel set to `rgb`.
    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Result<Self> {
        let len = height * width;
        Self::new(
            height,
            width,
            vec![rgb[0]; len],
            vec![rgb[1]; len],
            vec![rgb[2]; len],
        )
    }

    pub fn random<R: Rng + ?Sized>(height: usize, width: usize, rng: &mut R) -> Result<Self> {
        let len = height * width;
        let mut channel = || {
            let mut v = vec![0u8; len];
            rng.fill(&mut v[..]);
            v
        };
        let (r, g, b) = (channel(), channel(), channel());
        Self::new(height, width, r, g, b)
    }

    /// Builds an image from `RGBRGB...` samples.
    pub fn from_interleaved(height: usize, width: usize, data: &[u8]) -> Result<Self> {
        if data.len() != 3 * height * width {
            return Err(Error::Shape(format!(
                "{} interleaved samples for a {height}x{width} image",
                data.len()
            )));
        }
        let mut chans: [Vec<u8>; 3] = Default::default();
        for (c, chan) in chans.iter_mut().enumerate() {
            *chan = data.iter().skip(c).step_by(3).copied().collect();
        }
        let [r, g, b] = chans;
        Self::new(height, width, r, g, b)
    }

    pub fn to_interleaved(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 * self.len());
        for i in 0..self.len() {
            out.extend_from_slice(&self.pixel(i));
        }
        out
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of pixels, `H * W`.
    pub fn len(&self) -> usize {
        self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, c: usize) -> &[u8] {
        &self.channels[c]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [u8] {
        &mut self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<u8>; 3] {
        &self.channels
    }

    pub fn pixel(&self, index: usize) -> [u8; 3] {
        [
            self.channels[0][index],
            self.channels[1][index],
            self.channels[2][index],
        ]
    }

    pub fn set_pixel(&mut self, index: usize, rgb: [u8; 3]) {
        for (c, v) in rgb.into_iter().enumerate() {
            self.channels[c][index] = v;
        }
    }

    pub fn same_shape(&self, other: &RgbImage) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub fn ensure_same_shape(&self, other: &RgbImage) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )))
        }
    }

    /// Same shape, channels replaced by `f(channel_index, channel)`.
    pub(crate) fn map_channels<F>(&self, mut f: F) -> RgbImage
    where
        F: FnMut(usize, &[u8]) -> Vec<u8>,
    {
        let [r, g, b] = [0, 1, 2].map(|c| f(c, &self.channels[c]));
        RgbImage {
            height: self.height,
            width: self.width,
            channels: [r, g, b],
        }
    }
}
