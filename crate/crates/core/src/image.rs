//! Core image types and the integral-image (summed-area table)
//! representation that gives constant-time box pixel counts.
//!
//! Pixels are addressed as `(row, col)` with row-major storage. A binary
//! pixel of value 1 is an object pixel; file-format polarity is resolved at
//! load time and flipped with [`BinaryImage::invert`] when needed.

use crate::error::{Error, Result};

/// Rectangular grid of `{0, 1}` pixels; 1 marks an object pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryImage {
    /// Build from row-major pixel data. Every value must be 0 or 1 and the
    /// buffer length must equal `width * height`.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        if let Some(pos) = pixels.iter().position(|&p| p > 1) {
            return Err(Error::InvalidImage(format!(
                "pixel at index {pos} has value {} outside {{0, 1}}",
                pixels[pos]
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Build by evaluating a predicate at every `(row, col)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut object: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        assert!(width > 0 && height > 0, "dimensions must be at least 1x1");
        let mut pixels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                pixels.push(u8::from(object(r, c)));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    /// All-zero (no object) image.
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::from_fn(width, height, |_, _| false)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major pixel data.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row * self.width + col]
    }

    /// Number of object (value 1) pixels.
    pub fn object_count(&self) -> u64 {
        self.pixels.iter().map(|&p| u64::from(p)).sum()
    }

    /// Flip every pixel 0 <-> 1. Applying twice restores the original.
    pub fn invert(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| 1 - p).collect(),
        }
    }

    /// True when the image is square with a power-of-two side.
    pub fn is_pow2_square(&self) -> bool {
        self.width == self.height && self.width.is_power_of_two()
    }

    /// Embed the image at the top-left of the smallest power-of-two square
    /// that contains it, filling the margin with non-object pixels. Returns
    /// a clone when the image is already a power-of-two square.
    pub fn pad_to_pow2(&self) -> BinaryImage {
        if self.is_pow2_square() {
            return self.clone();
        }
        let side = self.width.max(self.height).next_power_of_two();
        let mut pixels = vec![0u8; side * side];
        for r in 0..self.height {
            let src = &self.pixels[r * self.width..(r + 1) * self.width];
            pixels[r * side..r * side + self.width].copy_from_slice(src);
        }
        BinaryImage {
            width: side,
            height: side,
            pixels,
        }
    }
}

/// 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }
}

/// 8-bit-per-channel RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }
}

/// Any image a netpbm file can decode to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Image {
    Binary(BinaryImage),
    Gray(GrayImage),
    Color(ColorImage),
}

/// Summed-area table over a binary image.
///
/// The table has one extra row and column of zeros; entry `(r, c)` holds the
/// number of object pixels in the half-open rectangle `[0, r) x [0, c)`, so
/// any rectangle sum is four lookups.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<u64>,
}

impl IntegralImage {
    pub fn new(image: &BinaryImage) -> Self {
        let (w, h) = (image.width(), image.height());
        let stride = w + 1;
        let mut table = vec![0u64; stride * (h + 1)];
        for r in 0..h {
            let mut row_sum = 0u64;
            for c in 0..w {
                row_sum += u64::from(image.get(r, c));
                table[(r + 1) * stride + (c + 1)] = table[r * stride + (c + 1)] + row_sum;
            }
        }
        Self {
            width: w,
            height: h,
            table,
        }
    }

    /// Source image width.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Source image height.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Raw cumulative value at table position `(r, c)`, `r <= height`,
    /// `c <= width`.
    pub fn entry(&self, r: usize, c: usize) -> u64 {
        assert!(
            r <= self.height && c <= self.width,
            "table index out of range"
        );
        self.table[r * (self.width + 1) + c]
    }

    /// Object pixels in the whole source image.
    pub fn total(&self) -> u64 {
        self.table[self.table.len() - 1]
    }

    /// Object pixels in the half-open rectangle `[r0, r1) x [c0, c1)`.
    pub fn rect_sum(&self, r0: usize, c0: usize, r1: usize, c1: usize) -> u64 {
        assert!(
            r0 <= r1 && c0 <= c1 && r1 <= self.height && c1 <= self.width,
            "rectangle [{r0}, {r1}) x [{c0}, {c1}) out of bounds for {}x{}",
            self.height,
            self.width,
        );
        let stride = self.width + 1;
        self.table[r1 * stride + c1] + self.table[r0 * stride + c0]
            - self.table[r0 * stride + c1]
            - self.table[r1 * stride + c0]
    }

    /// Object pixels in the `w`-wide square box anchored at `(row, col)`.
    /// The box must lie entirely within the image; callers pad first.
    pub fn box_sum(&self, row: usize, col: usize, w: usize) -> u64 {
        assert!(
            row + w <= self.height && col + w <= self.width,
            "box at ({row}, {col}) of width {w} exceeds {}x{} image",
            self.height,
            self.width,
        );
        self.rect_sum(row, col, row + w, col + w)
    }
}
