//! Per-scale box enumeration and counting.
//!
//! Boxes are axis-aligned squares of side `2^s`, tiled from the origin of
//! the power-of-two padded image. The classical count keeps every box that
//! contains an object pixel. The filtered count additionally discards boxes
//! without a single non-object pixel and then rolls an `(n1 + 1)`-face die
//! per box, discarding on one face, where `n1` is the box's object-pixel
//! count. The die is realized as a keyed hash of `(seed, s, box_row,
//! box_col)`, so results do not depend on enumeration order or worker
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryImage, IntegralImage};
use crate::rng;

/// One row of the scale table: scale exponent, box side in pixels, and the
/// (possibly fractional) surviving box count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleEntry {
    pub s: u32,
    pub box_size: u64,
    pub count: f64,
}

/// The ordered per-scale box counts for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScaleCounts {
    entries: Vec<ScaleEntry>,
}

impl ScaleCounts {
    /// Build a table from raw entries, checking the structural invariants:
    /// `s` runs 0, 1, 2, ... with `box_size = 2^s`, and counts are finite
    /// and non-negative.
    pub fn new(entries: Vec<ScaleEntry>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.s as usize != i {
                return Err(Error::InvalidParameter(format!(
                    "scale entry {i} has s = {}, expected consecutive scales from 0",
                    e.s
                )));
            }
            if e.box_size != 1u64 << e.s {
                return Err(Error::InvalidParameter(format!(
                    "scale {} has box_size {}, expected {}",
                    e.s,
                    e.box_size,
                    1u64 << e.s
                )));
            }
            if !e.count.is_finite() || e.count < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "scale {} has invalid count {}",
                    e.s, e.count
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ScaleEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries with a strictly positive count.
    pub fn nonzero(&self) -> impl Iterator<Item = &ScaleEntry> {
        self.entries.iter().filter(|e| e.count > 0.0)
    }
}

/// How the probabilistic box filter is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Roll the die per box; counts are integers.
    Stochastic,
    /// Replace each roll by its keep probability; counts are reals and the
    /// result is seed-free and deterministic.
    Expectation,
}

/// Configuration of the probabilistic discard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub mode: FilterMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u32,
}

fn default_trials() -> u32 {
    1
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            mode: FilterMode::Stochastic,
            seed: 0,
            trials: 1,
        }
    }
}

impl FilterConfig {
    pub fn expectation() -> Self {
        Self {
            mode: FilterMode::Expectation,
            seed: 0,
            trials: 1,
        }
    }

    pub fn stochastic(seed: u64) -> Self {
        Self {
            mode: FilterMode::Stochastic,
            seed,
            trials: 1,
        }
    }
}

/// Classical occupancy counts: for each scale `s` in `[0, S]` with
/// `2^S` the padded side, the number of non-overlapping `2^s` boxes
/// containing at least one object pixel.
pub fn hfd_counts(image: &BinaryImage) -> Result<ScaleCounts> {
    if image.object_count() == 0 {
        return Err(Error::EmptyObject);
    }
    let padded = image.pad_to_pow2();
    let integral = IntegralImage::new(&padded);
    let side = padded.width();
    let s_max = side.trailing_zeros();

    let entries = (0..=s_max)
        .map(|s| {
            let b = 1usize << s;
            let grid = side / b;
            let row_counts: Vec<u64> = (0..grid)
                .into_par_iter()
                .map(|br| {
                    (0..grid)
                        .filter(|&bc| integral.box_sum(br * b, bc * b, b) > 0)
                        .count() as u64
                })
                .collect();
            let count: u64 = row_counts.iter().sum();
            ScaleEntry {
                s,
                box_size: b as u64,
                count: count as f64,
            }
        })
        .collect();
    Ok(ScaleCounts { entries })
}

/// Probability that a box with `n1` object and `n0` non-object pixels
/// survives both filters: 0 without an object pixel, 0 without a non-object
/// pixel, otherwise `n1 / (n1 + 1)` (an `(n1 + 1)`-face die with one
/// discarding face).
pub fn keep_probability(n1: u64, n0: u64) -> f64 {
    if n1 == 0 || n0 == 0 {
        return 0.0;
    }
    n1 as f64 / (n1 + 1) as f64
}

/// Keyed uniform draw in `[0, 1)` for the box at `(box_row, box_col)` of
/// scale `s`. Identical inputs always produce the identical value.
pub fn uniform(seed: u64, s: u32, box_row: u64, box_col: u64) -> f64 {
    rng::unit_f64(rng::hash3(seed, s as u64, box_row, box_col))
}

/// Filtered counts over scales `[0, S + 1]` with `2^S` the padded side.
///
/// The extra top scale uses a single box clipped to the padded image, so its
/// pixel tallies match the full image. Scales whose count is zero stay in
/// the table; the regression layer drops them.
pub fn mhfd_counts(image: &BinaryImage, config: &FilterConfig) -> Result<ScaleCounts> {
    if image.object_count() == 0 {
        return Err(Error::EmptyObject);
    }
    let padded = image.pad_to_pow2();
    let integral = IntegralImage::new(&padded);
    let side = padded.width();
    let s_top = side.trailing_zeros() + 1;

    let entries = (0..=s_top)
        .map(|s| {
            let b = 1u64 << s;
            let grid = (side as u64).div_ceil(b);
            let row_totals: Vec<f64> = (0..grid)
                .into_par_iter()
                .map(|br| {
                    let r0 = (br * b) as usize;
                    let r1 = ((br + 1) * b).min(side as u64) as usize;
                    let mut total = 0.0;
                    for bc in 0..grid {
                        let c0 = (bc * b) as usize;
                        let c1 = ((bc + 1) * b).min(side as u64) as usize;
                        let area = ((r1 - r0) * (c1 - c0)) as u64;
                        let n1 = integral.rect_sum(r0, c0, r1, c1);
                        let p = keep_probability(n1, area - n1);
                        match config.mode {
                            FilterMode::Expectation => total += p,
                            FilterMode::Stochastic => {
                                if p > 0.0 && uniform(config.seed, s, br, bc) < p {
                                    total += 1.0;
                                }
                            }
                        }
                    }
                    total
                })
                .collect();
            // Fixed-order reduction keeps expectation-mode sums byte-stable.
            let count = row_totals.iter().sum();
            ScaleEntry {
                s,
                box_size: b,
                count,
            }
        })
        .collect();
    Ok(ScaleCounts { entries })
}
