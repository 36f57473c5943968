//! Synthetic images with known analytic dimensions, plus noise fields and
//! simple primitives used as calibration references and test fixtures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::BinaryImage;
use crate::rng;

/// Sierpinski triangle of side `2^order` via the Pascal-mod-2 rule:
/// pixel `(i, j)` is an object pixel iff `i & j == 0`.
///
/// The construction is exact: the object count is `3^order` and the
/// occupied-box count at scale `s` is exactly `3^(order - s)`.
pub fn sierpinski_triangle(order: u32) -> Result<BinaryImage> {
    if !(1..=14).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "triangle order {order} out of range 1-14"
        )));
    }
    let side = 1usize << order;
    Ok(BinaryImage::from_fn(side, side, |r, c| r & c == 0))
}

/// Sierpinski carpet of side `3^order`: a pixel is an object pixel unless
/// some base-3 digit pair of its coordinates is `(1, 1)`. Object count is
/// `8^order`.
pub fn sierpinski_carpet(order: u32) -> Result<BinaryImage> {
    if !(1..=8).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "carpet order {order} out of range 1-8"
        )));
    }
    let side = 3usize.pow(order);
    Ok(BinaryImage::from_fn(side, side, |r, c| {
        let (mut r, mut c) = (r, c);
        while r > 0 || c > 0 {
            if r % 3 == 1 && c % 3 == 1 {
                return false;
            }
            r /= 3;
            c /= 3;
        }
        true
    }))
}

/// Bernoulli noise field: each pixel is independently an object pixel with
/// probability `density`, drawn from a per-pixel keyed hash.
pub fn salt_pepper(width: usize, height: usize, density: f64, seed: u64) -> Result<BinaryImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!(
            "density {density} outside [0, 1]"
        )));
    }
    // Domain tag keeps pixel draws disjoint from box-filter draws.
    const NOISE_DOMAIN: u64 = 0x6e6f_6973_655f_7632;
    Ok(BinaryImage::from_fn(width, height, |r, c| {
        rng::unit_f64(rng::hash3(seed ^ NOISE_DOMAIN, r as u64, c as u64, 0)) < density
    }))
}

/// Canonical deterministic shapes for trivial-dimension cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimitiveKind {
    /// All object pixels.
    FilledRect,
    /// Row 0 fully set.
    HLine,
    /// Single object pixel at the origin.
    Point,
    /// Boundary of the centered `(size - 2)`-square.
    Ring,
}

/// A `size x size` image holding the requested primitive.
pub fn primitive(kind: PrimitiveKind, size: usize) -> Result<BinaryImage> {
    if size == 0 {
        return Err(Error::InvalidParameter("size must be at least 1".into()));
    }
    Ok(match kind {
        PrimitiveKind::FilledRect => BinaryImage::from_fn(size, size, |_, _| true),
        PrimitiveKind::HLine => BinaryImage::from_fn(size, size, |r, _| r == 0),
        PrimitiveKind::Point => BinaryImage::from_fn(size, size, |r, c| r == 0 && c == 0),
        PrimitiveKind::Ring if size < 3 => BinaryImage::zeros(size, size),
        PrimitiveKind::Ring => BinaryImage::from_fn(size, size, |r, c| {
            (1..size - 1).contains(&r)
                && (1..size - 1).contains(&c)
                && (r == 1 || r == size - 2 || c == 1 || c == size - 2)
        }),
    })
}
