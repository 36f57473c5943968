//! Box-counting fractal dimension estimation for binary images.
//!
//! The crate measures image complexity as the slope of occupied-box counts
//! against box size on a log-log scale, over a dyadic ladder of square boxes.
//! Two estimators are provided: the classical occupancy count (HFD) and a
//! filtered variant (MHFD) that discards fully saturated boxes and randomly
//! drops boxes with few object pixels, making the estimate more robust on
//! noisy, non-fractal inputs. Supporting modules cover netpbm I/O, binary
//! preprocessing (Otsu, denoising, edges, thinning), weighted log-log
//! regression with an optional deflection-corrected model, synthetic fractal
//! generators, and a class-separability evaluation harness.

pub mod boxcount;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod generators;
pub mod image;
pub mod netpbm;
pub mod preprocess;
pub mod regression;

mod rng;

pub use error::{Error, Result};
pub use image::{BinaryImage, ColorImage, GrayImage, Image, IntegralImage};
