//! Optional preprocessing chain: color-to-gray conversion, Otsu
//! binarization, majority denoising, interior edge extraction, and
//! Zhang-Suen skeletonization.
//!
//! All functions are pure; the estimator applies them in the fixed order
//! denoise -> edge -> skeleton.

use crate::error::Result;
use crate::image::{BinaryImage, ColorImage, GrayImage, Image};

/// Result of Otsu binarization.
///
/// `degenerate` is set when the input was constant, in which case
/// `threshold` is that constant and `binary` has no object pixels.
#[derive(Debug, Clone)]
pub struct OtsuResult {
    pub threshold: u8,
    pub binary: BinaryImage,
    pub degenerate: bool,
}

/// Min-average color-to-gray transform:
/// `gray = round((min(R, G, B) + mean(R, G, B)) / 2)`.
pub fn min_average_gray(image: &ColorImage) -> GrayImage {
    let pixels = image
        .pixels()
        .iter()
        .map(|&[r, g, b]| {
            let min = r.min(g).min(b) as f64;
            let mean = (r as f64 + g as f64 + b as f64) / 3.0;
            ((min + mean) / 2.0).round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(image.width(), image.height(), pixels).expect("same dimensions")
}

/// Otsu's method over the 256-bin histogram.
///
/// The returned threshold maximizes the between-class variance of the split
/// `{v < t} / {v >= t}`, with ties broken toward the lowest maximizing
/// threshold. Object pixels are the dark side: `binary = 1` iff
/// `intensity < threshold`. A constant image yields that constant as the
/// threshold, an all-zero binary, and the `degenerate` flag.
pub fn otsu_threshold(image: &GrayImage) -> OtsuResult {
    let mut hist = [0u64; 256];
    for &v in image.pixels() {
        hist[v as usize] += 1;
    }

    let lowest = image
        .pixels()
        .iter()
        .copied()
        .min()
        .expect("at least one pixel");
    let highest = image
        .pixels()
        .iter()
        .copied()
        .max()
        .expect("at least one pixel");
    if lowest == highest {
        return OtsuResult {
            threshold: lowest,
            binary: BinaryImage::zeros(image.width(), image.height()),
            degenerate: true,
        };
    }

    let total: u64 = image.pixels().len() as u64;
    let total_sum: u64 = hist.iter().enumerate().map(|(v, &n)| v as u64 * n).sum();

    // Counts and sums stay integer-exact in f64 (well below 2^53), so the
    // variance expression is reproducible by any oracle using the same split.
    let mut best_t = 0u8;
    let mut best_var = f64::NEG_INFINITY;
    let mut w0 = 0u64; // pixels with value < t
    let mut sum0 = 0u64;
    for t in 0..=255u16 {
        if t > 0 {
            w0 += hist[(t - 1) as usize];
            sum0 += (t - 1) as u64 * hist[(t - 1) as usize];
        }
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let mu0 = sum0 as f64 / w0 as f64;
        let mu1 = (total_sum - sum0) as f64 / w1 as f64;
        let var = w0 as f64 * w1 as f64 * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }

    let threshold = best_t;
    let binary = BinaryImage::new(
        image.width(),
        image.height(),
        image
            .pixels()
            .iter()
            .map(|&v| u8::from(v < threshold))
            .collect(),
    )
    .expect("same dimensions");
    OtsuResult {
        threshold,
        binary,
        degenerate: false,
    }
}

/// Majority filter over each pixel's 3x3 neighborhood (clipped at borders);
/// ties keep the original value.
pub fn denoise_median3(image: &BinaryImage) -> BinaryImage {
    let (w, h) = (image.width(), image.height());
    BinaryImage::from_fn(w, h, |r, c| {
        let mut ones = 0u32;
        let mut cells = 0u32;
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr >= 0 && nr < h as i64 && nc >= 0 && nc < w as i64 {
                    cells += 1;
                    ones += u32::from(image.get(nr as usize, nc as usize));
                }
            }
        }
        match (2 * ones).cmp(&cells) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => image.get(r, c) == 1,
        }
    })
}

/// Interior boundary: a pixel survives iff it is an object pixel with at
/// least one 4-neighbor that is 0 or out of bounds.
pub fn extract_edges(image: &BinaryImage) -> BinaryImage {
    let (w, h) = (image.width(), image.height());
    BinaryImage::from_fn(w, h, |r, c| {
        if image.get(r, c) == 0 {
            return false;
        }
        let neighbors = [
            (r.wrapping_sub(1), c),
            (r + 1, c),
            (r, c.wrapping_sub(1)),
            (r, c + 1),
        ];
        neighbors
            .iter()
            .any(|&(nr, nc)| nr >= h || nc >= w || image.get(nr, nc) == 0)
    })
}

/// Zhang-Suen thinning iterated to a fixpoint.
///
/// Each pass runs the two sub-iterations with deferred deletion; the output
/// is a subset of the input object pixels and keeps each component
/// 8-connected.
pub fn skeletonize(image: &BinaryImage) -> BinaryImage {
    let (w, h) = (image.width(), image.height());
    let mut pixels: Vec<u8> = image.pixels().to_vec();
    let at = |pixels: &[u8], r: i64, c: i64| -> u8 {
        if r < 0 || c < 0 || r >= h as i64 || c >= w as i64 {
            0
        } else {
            pixels[r as usize * w + c as usize]
        }
    };

    let mut to_delete = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            to_delete.clear();
            for r in 0..h as i64 {
                for c in 0..w as i64 {
                    if at(&pixels, r, c) != 1 {
                        continue;
                    }
                    // P2..P9 clockwise from north.
                    let p = [
                        at(&pixels, r - 1, c),
                        at(&pixels, r - 1, c + 1),
                        at(&pixels, r, c + 1),
                        at(&pixels, r + 1, c + 1),
                        at(&pixels, r + 1, c),
                        at(&pixels, r + 1, c - 1),
                        at(&pixels, r, c - 1),
                        at(&pixels, r - 1, c - 1),
                    ];
                    let b: u8 = p.iter().sum();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| p[k] == 0 && p[(k + 1) % 8] == 1).count();
                    if a != 1 {
                        continue;
                    }
                    let ok = if step == 0 {
                        p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0
                    } else {
                        p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0
                    };
                    if ok {
                        to_delete.push((r as usize, c as usize));
                    }
                }
            }
            if !to_delete.is_empty() {
                changed = true;
                for &(r, c) in &to_delete {
                    pixels[r * w + c] = 0;
                }
            }
        }
        if !changed {
            break;
        }
    }
    BinaryImage::new(w, h, pixels).expect("same dimensions")
}

/// Reduce any loaded image to binary: color goes through the min-average
/// gray transform, gray through Otsu, and binary passes through unchanged.
pub fn reduce_to_binary(image: &Image) -> Result<(BinaryImage, Option<OtsuResult>)> {
    match image {
        Image::Binary(b) => Ok((b.clone(), None)),
        Image::Gray(g) => {
            let otsu = otsu_threshold(g);
            Ok((otsu.binary.clone(), Some(otsu)))
        }
        Image::Color(c) => {
            let gray = min_average_gray(c);
            let otsu = otsu_threshold(&gray);
            Ok((otsu.binary.clone(), Some(otsu)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{hash3, unit_f64};

    fn from_rows(rows: &[&str]) -> BinaryImage {
        let h = rows.len();
        let w = rows[0].len();
        BinaryImage::from_fn(w, h, |r, c| rows[r].as_bytes()[c] == b'1')
    }

    fn rows_of(img: &BinaryImage) -> Vec<String> {
        (0..img.height())
            .map(|r| {
                (0..img.width())
                    .map(|c| if img.get(r, c) == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn min_average_gray_fixed_points_and_formula() {
        let img =
            ColorImage::new(3, 1, vec![[100, 100, 100], [0, 0, 255], [255, 255, 255]]).unwrap();
        let gray = min_average_gray(&img);
        // (0,0,255): min 0, mean 85 -> round(42.5) = 43.
        assert_eq!(gray.pixels(), &[100, 43, 255]);
    }

    #[test]
    fn otsu_separates_bimodal_image() {
        let mut pixels = vec![10u8; 50];
        pixels.extend(vec![200u8; 50]);
        let img = GrayImage::new(10, 10, pixels).unwrap();
        let otsu = otsu_threshold(&img);
        assert!(!otsu.degenerate);
        for (i, &v) in img.pixels().iter().enumerate() {
            let bit = otsu.binary.pixels()[i];
            assert_eq!(bit, u8::from(v == 10), "pixel {i} value {v}");
        }
    }

    #[test]
    fn otsu_constant_image_is_degenerate() {
        let img = GrayImage::new(4, 4, vec![77; 16]).unwrap();
        let otsu = otsu_threshold(&img);
        assert!(otsu.degenerate);
        assert_eq!(otsu.threshold, 77);
        assert_eq!(otsu.binary.object_count(), 0);
    }

    #[test]
    fn otsu_matches_exhaustive_search() {
        // Oracle: per candidate threshold, recompute class statistics by
        // scanning the pixels directly.
        for seed in 0..30u64 {
            let levels: Vec<u8> = (0..8)
                .map(|i| (hash3(seed, 60 + i, 0, 0) % 256) as u8)
                .collect();
            let img = GrayImage::new(
                16,
                16,
                (0..256u64)
                    .map(|i| levels[(hash3(seed, 61, i, 0) % 8) as usize])
                    .collect(),
            )
            .unwrap();
            if img.pixels().iter().min() == img.pixels().iter().max() {
                continue;
            }

            let mut best_t = 0u8;
            let mut best_var = f64::NEG_INFINITY;
            for t in 0..=255u16 {
                let below: Vec<u64> = img
                    .pixels()
                    .iter()
                    .filter(|&&v| (v as u16) < t)
                    .map(|&v| v as u64)
                    .collect();
                let above: Vec<u64> = img
                    .pixels()
                    .iter()
                    .filter(|&&v| (v as u16) >= t)
                    .map(|&v| v as u64)
                    .collect();
                if below.is_empty() || above.is_empty() {
                    continue;
                }
                let w0 = below.len() as f64;
                let w1 = above.len() as f64;
                let mu0 = below.iter().sum::<u64>() as f64 / w0;
                let mu1 = above.iter().sum::<u64>() as f64 / w1;
                let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
                if var > best_var {
                    best_var = var;
                    best_t = t as u8;
                }
            }

            let otsu = otsu_threshold(&img);
            assert_eq!(otsu.threshold, best_t, "seed {seed}");
        }
    }

    #[test]
    fn denoise_removes_isolated_pixel() {
        let img = BinaryImage::from_fn(5, 5, |r, c| r == 2 && c == 2);
        assert_eq!(denoise_median3(&img).object_count(), 0);
    }

    #[test]
    fn denoise_keeps_solid_regions() {
        let ones = BinaryImage::from_fn(6, 6, |_, _| true);
        assert_eq!(denoise_median3(&ones), ones);
    }

    #[test]
    fn denoise_restores_most_flipped_pixels() {
        // Flip ~5% of a filled 64x64 square, then measure how many of the
        // flipped pixels the filter repairs.
        let seed = 11u64;
        let mut flipped = Vec::new();
        let noisy = BinaryImage::from_fn(64, 64, |r, c| {
            if unit_f64(hash3(seed, r as u64, c as u64, 5)) < 0.05 {
                flipped.push((r, c));
                false
            } else {
                true
            }
        });
        assert!(!flipped.is_empty());
        let cleaned = denoise_median3(&noisy);
        let restored = flipped
            .iter()
            .filter(|&&(r, c)| cleaned.get(r, c) == 1)
            .count();
        let fraction = restored as f64 / flipped.len() as f64;
        assert!(fraction >= 0.9, "restored only {fraction:.3} of flips");
    }

    #[test]
    fn edges_of_filled_square_is_ring() {
        let img = from_rows(&["00000", "01110", "01110", "01110", "00000"]);
        let edges = extract_edges(&img);
        let expected = from_rows(&["00000", "01110", "01010", "01110", "00000"]);
        assert_eq!(rows_of(&edges), rows_of(&expected));
    }

    #[test]
    fn edges_of_thin_line_unchanged_and_zeros_stay_zero() {
        let line = BinaryImage::from_fn(8, 8, |r, _| r == 0);
        assert_eq!(extract_edges(&line), line);
        let zeros = BinaryImage::zeros(4, 4);
        assert_eq!(extract_edges(&zeros), zeros);
    }

    #[test]
    fn edge_output_is_subset_and_second_pass_stable() {
        for seed in 0..10 {
            let img = BinaryImage::from_fn(20, 20, |r, c| {
                unit_f64(hash3(seed, r as u64, c as u64, 9)) < 0.6
            });
            let e1 = extract_edges(&img);
            for r in 0..20 {
                for c in 0..20 {
                    assert!(e1.get(r, c) <= img.get(r, c));
                }
            }
            let e2 = extract_edges(&e1);
            assert_eq!(extract_edges(&e2), e2);
        }
    }

    #[test]
    fn skeleton_of_bar_is_single_line() {
        let bar = BinaryImage::from_fn(10, 3, |_, _| true);
        let skel = skeletonize(&bar);
        assert_eq!(
            rows_of(&skel),
            vec!["0000000000", "0111111100", "0000000000"]
        );
    }

    #[test]
    fn skeleton_fixture() {
        // Frozen output of the canonical two-subiteration thinning on the
        // widely used 32x10 sample pattern.
        let input = from_rows(&[
            "00000000000000000000000000000000",
            "01111111110000000111111110000000",
            "01110001111000001111001111000000",
            "01110000111000001110000111000000",
            "01110001111000001110000000000000",
            "01111111110000001110000000000000",
            "01110111100000001110000111000000",
            "01110011110011101111001111011100",
            "01110001111011100111111110011100",
            "00000000000000000000000000000000",
        ]);
        let expected = vec![
            "00000000000000000000000000000000",
            "00111111100000000011111100000000",
            "00100000100000000110000000000000",
            "00100000010000000100000000000000",
            "00100000100000000100000000000000",
            "00111110100000000100000000000000",
            "00000001100000000100000000000000",
            "00000000100001000110000110001000",
            "00000000010000000001111000000000",
            "00000000000000000000000000000000",
        ];
        assert_eq!(rows_of(&skeletonize(&input)), expected);
    }

    #[test]
    fn skeleton_leaves_thin_shapes_alone() {
        let diagonal = BinaryImage::from_fn(8, 8, |r, c| r == c);
        assert_eq!(skeletonize(&diagonal), diagonal);
        let zeros = BinaryImage::zeros(5, 5);
        assert_eq!(skeletonize(&zeros), zeros);
    }

    #[test]
    fn skeleton_subset_and_idempotent() {
        for seed in 0..8 {
            let img = BinaryImage::from_fn(24, 24, |r, c| {
                unit_f64(hash3(seed, r as u64 / 3, c as u64 / 3, 13)) < 0.55
            });
            let s1 = skeletonize(&img);
            for r in 0..24 {
                for c in 0..24 {
                    assert!(s1.get(r, c) <= img.get(r, c));
                }
            }
            assert_eq!(skeletonize(&s1), s1);
        }
    }

    #[test]
    fn reduce_to_binary_passthrough_and_otsu_path() {
        let bin = BinaryImage::from_fn(3, 3, |r, _| r == 1);
        let (out, otsu) = reduce_to_binary(&Image::Binary(bin.clone())).unwrap();
        assert_eq!(out, bin);
        assert!(otsu.is_none());

        let mut pixels = vec![20u8; 8];
        pixels.extend(vec![230u8; 8]);
        let gray = GrayImage::new(4, 4, pixels).unwrap();
        let (out, otsu) = reduce_to_binary(&Image::Gray(gray)).unwrap();
        assert_eq!(out.object_count(), 8);
        assert!(otsu.is_some());
    }
}
