//! Anti-diagonal zigzag scan of an `H x W` raster.
//!
//! Diagonals are visited by increasing `row + col`. With 1-based coordinates,
//! a diagonal with even `row + col` is walked with the row decreasing
//! (up and to the right) and an odd one with the row increasing (down and to
//! the left), clipped to the rectangle. On 8x8 this is the JPEG order.

/// Bijection between zigzag sequence positions and raster indices
/// (both zero based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZigzagMap {
    height: usize,
    width: usize,
    to_raster: Vec<usize>,
    from_raster: Vec<usize>,
}

impl ZigzagMap {
    pub fn new(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "zigzag map of an empty raster");
        let len = height * width;
        let mut to_raster = Vec::with_capacity(len);
        for d in 0..(height + width - 1) {
            let lo = d.saturating_sub(width - 1);
            let hi = d.min(height - 1);
            if d % 2 == 0 {
                for row in (lo..=hi).rev() {
                    to_raster.push(row * width + (d - row));
                }
            } else {
                for row in lo..=hi {
                    to_raster.push(row * width + (d - row));
                }
            }
        }
        let mut from_raster = vec![usize::MAX; len];
        for (p, &i) in to_raster.iter().enumerate() {
            debug_assert_eq!(from_raster[i], usize::MAX);
            from_raster[i] = p;
        }
        assert!(
            to_raster.len() == len && from_raster.iter().all(|&p| p < len),
            "zigzag scan is not a bijection for {height}x{width}"
        );
        Self {
            height,
            width,
            to_raster,
            from_raster,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.to_raster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_raster.is_empty()
    }

    /// Raster index visited at sequence position `p`.
    #[inline]
    pub fn to_raster(&self, p: usize) -> usize {
        self.to_raster[p]
    }

    /// Sequence position at which raster index `i` is visited.
    #[inline]
    pub fn from_raster(&self, i: usize) -> usize {
        self.from_raster[i]
    }

    /// `out[p] = data[to_raster(p)]`.
    pub fn gather<T: Copy>(&self, data: &[T]) -> Vec<T> {
        debug_assert_eq!(data.len(), self.len());
        self.to_raster.iter().map(|&i| data[i]).collect()
    }

    /// Inverse of [`gather`](Self::gather): `out[to_raster(p)] = seq[p]`.
    pub fn scatter<T: Copy + Default>(&self, seq: &[T]) -> Vec<T> {
        debug_assert_eq!(seq.len(), self.len());
        let mut out = vec![T::default(); seq.len()];
        for (p, &i) in self.to_raster.iter().enumerate() {
            out[i] = seq[p];
        }
        out
    }
}
