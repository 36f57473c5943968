//! Netpbm (P1-P6) reading and writing.
//!
//! P1/P4 decode to [`BinaryImage`], P2/P5 to [`GrayImage`], P3/P6 to
//! [`ColorImage`]. The PBM convention that 1 means black is kept as-is:
//! a file bit of 1 becomes an object pixel, and polarity is flipped
//! downstream with [`BinaryImage::invert`] when the white pixels are the
//! object. Writing always uses maxval 255 and round-trips bit-exactly.

use crate::error::{Error, Result};
use crate::image::{BinaryImage, ColorImage, GrayImage, Image};

const MAX_PIXELS: usize = 1 << 30;

/// Decode a netpbm byte stream into the image kind its magic number selects.
pub fn load(bytes: &[u8]) -> Result<Image> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.magic()?;
    match magic {
        b'1' => {
            let (w, h) = cur.dimensions()?;
            let mut pixels = Vec::with_capacity(w * h);
            for _ in 0..w * h {
                pixels.push(cur.ascii_bit()?);
            }
            Ok(Image::Binary(BinaryImage::new(w, h, pixels)?))
        }
        b'2' => {
            let (w, h) = cur.dimensions()?;
            cur.maxval()?;
            let mut pixels = Vec::with_capacity(w * h);
            for _ in 0..w * h {
                pixels.push(cur.ascii_sample()?);
            }
            Ok(Image::Gray(GrayImage::new(w, h, pixels)?))
        }
        b'3' => {
            let (w, h) = cur.dimensions()?;
            cur.maxval()?;
            let mut pixels = Vec::with_capacity(w * h);
            for _ in 0..w * h {
                let r = cur.ascii_sample()?;
                let g = cur.ascii_sample()?;
                let b = cur.ascii_sample()?;
                pixels.push([r, g, b]);
            }
            Ok(Image::Color(ColorImage::new(w, h, pixels)?))
        }
        b'4' => {
            let (w, h) = cur.dimensions()?;
            cur.single_whitespace()?;
            let row_bytes = w.div_ceil(8);
            let mut pixels = Vec::with_capacity(w * h);
            for _ in 0..h {
                let row = cur.raw(row_bytes)?;
                for c in 0..w {
                    let bit = (row[c / 8] >> (7 - c % 8)) & 1;
                    pixels.push(bit);
                }
            }
            Ok(Image::Binary(BinaryImage::new(w, h, pixels)?))
        }
        b'5' => {
            let (w, h) = cur.dimensions()?;
            cur.maxval()?;
            cur.single_whitespace()?;
            let pixels = cur.raw(w * h)?.to_vec();
            Ok(Image::Gray(GrayImage::new(w, h, pixels)?))
        }
        b'6' => {
            let (w, h) = cur.dimensions()?;
            cur.maxval()?;
            cur.single_whitespace()?;
            let raw = cur.raw(3 * w * h)?;
            let pixels = raw.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
            Ok(Image::Color(ColorImage::new(w, h, pixels)?))
        }
        _ => unreachable!("magic() only returns P1-P6"),
    }
}

/// Encode an image as netpbm bytes; `ascii` selects P1/P2/P3 over P4/P5/P6.
pub fn save(image: &Image, ascii: bool) -> Vec<u8> {
    match image {
        Image::Binary(img) => save_binary(img, ascii),
        Image::Gray(img) => save_gray(img, ascii),
        Image::Color(img) => save_color(img, ascii),
    }
}

/// Encode a binary image as P1 (ascii) or P4 (packed bits).
pub fn save_binary(img: &BinaryImage, ascii: bool) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    if ascii {
        let mut out = format!("P1\n{w} {h}\n").into_bytes();
        for r in 0..h {
            let row = &img.pixels()[r * w..(r + 1) * w];
            // Keep lines within the format's 70-character guideline.
            for chunk in row.chunks(35) {
                let line: Vec<&str> = chunk
                    .iter()
                    .map(|&p| if p == 1 { "1" } else { "0" })
                    .collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        out
    } else {
        let mut out = format!("P4\n{w} {h}\n").into_bytes();
        let row_bytes = w.div_ceil(8);
        for r in 0..h {
            let mut packed = vec![0u8; row_bytes];
            for c in 0..w {
                if img.get(r, c) == 1 {
                    packed[c / 8] |= 1 << (7 - c % 8);
                }
            }
            out.extend_from_slice(&packed);
        }
        out
    }
}

/// Encode a gray image as P2 (ascii) or P5 (raw), maxval 255.
pub fn save_gray(img: &GrayImage, ascii: bool) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    if ascii {
        let mut out = format!("P2\n{w} {h}\n255\n").into_bytes();
        for r in 0..h {
            let row = &img.pixels()[r * w..(r + 1) * w];
            for chunk in row.chunks(17) {
                let line: Vec<String> = chunk.iter().map(|p| p.to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        out
    } else {
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.extend_from_slice(img.pixels());
        out
    }
}

/// Encode a color image as P3 (ascii) or P6 (raw), maxval 255.
pub fn save_color(img: &ColorImage, ascii: bool) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    if ascii {
        let mut out = format!("P3\n{w} {h}\n255\n").into_bytes();
        for r in 0..h {
            let row = &img.pixels()[r * w..(r + 1) * w];
            for chunk in row.chunks(5) {
                let line: Vec<String> = chunk
                    .iter()
                    .flat_map(|p| p.iter().map(|v| v.to_string()))
                    .collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
        out
    } else {
        let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
        for p in img.pixels() {
            out.extend_from_slice(p);
        }
        out
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, at: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: at,
            message: message.into(),
        }
    }

    fn magic(&mut self) -> Result<u8> {
        if self.bytes.len() < 2 {
            return Err(self.err(0, "missing netpbm magic number"));
        }
        if self.bytes[0] != b'P' {
            return Err(self.err(0, "not a netpbm file (expected magic P1-P6)"));
        }
        let kind = self.bytes[1];
        if !(b'1'..=b'6').contains(&kind) {
            return Err(self.err(
                1,
                format!("unsupported netpbm format P{}", self.bytes[1] as char),
            ));
        }
        self.pos = 2;
        Ok(kind)
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn uint(&mut self, what: &str) -> Result<(usize, usize)> {
        self.skip_space_and_comments();
        let start = self.pos;
        if start >= self.bytes.len() {
            return Err(self.err(start, format!("unexpected end of data reading {what}")));
        }
        let mut value: usize = 0;
        let mut digits = 0;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((self.bytes[self.pos] - b'0') as usize))
                .ok_or_else(|| self.err(start, format!("{what} overflows")))?;
            self.pos += 1;
            digits += 1;
        }
        if digits == 0 {
            return Err(self.err(
                self.pos,
                format!("expected {what}, found byte 0x{:02x}", self.bytes[self.pos]),
            ));
        }
        Ok((value, start))
    }

    fn dimensions(&mut self) -> Result<(usize, usize)> {
        let (w, at_w) = self.uint("width")?;
        let (h, at_h) = self.uint("height")?;
        if w == 0 {
            return Err(self.err(at_w, "width must be at least 1"));
        }
        if h == 0 {
            return Err(self.err(at_h, "height must be at least 1"));
        }
        if w.checked_mul(h).is_none_or(|n| n > MAX_PIXELS) {
            return Err(self.err(at_w, format!("image {w}x{h} is too large")));
        }
        Ok((w, h))
    }

    fn maxval(&mut self) -> Result<usize> {
        let (maxval, at) = self.uint("maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(self.err(at, format!("unsupported maxval {maxval} (must be 1-255)")));
        }
        Ok(maxval)
    }

    /// The single whitespace byte separating the header from raw data.
    fn single_whitespace(&mut self) -> Result<()> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err(self.err(self.pos, "expected whitespace before raw pixel data"));
        }
        self.pos += 1;
        Ok(())
    }

    fn ascii_bit(&mut self) -> Result<u8> {
        self.skip_space_and_comments();
        if self.pos >= self.bytes.len() {
            return Err(self.err(self.pos, "unexpected end of data reading P1 pixels"));
        }
        // P1 permits bits with no separating whitespace.
        let bit = match self.bytes[self.pos] {
            b'0' => 0,
            b'1' => 1,
            other => {
                return Err(self.err(
                    self.pos,
                    format!("expected P1 pixel 0 or 1, found byte 0x{other:02x}"),
                ))
            }
        };
        self.pos += 1;
        Ok(bit)
    }

    fn ascii_sample(&mut self) -> Result<u8> {
        let (value, at) = self.uint("pixel sample")?;
        u8::try_from(value).map_err(|_| self.err(at, format!("sample value {value} exceeds 255")))
    }

    fn raw(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.err(
                self.bytes.len(),
                format!(
                    "unexpected end of data: need {n} raw bytes, have {}",
                    self.bytes.len() - self.pos
                ),
            ));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{hash3, unit_f64};

    fn random_binary(width: usize, height: usize, seed: u64) -> BinaryImage {
        BinaryImage::from_fn(width, height, |r, c| {
            unit_f64(hash3(seed, r as u64, c as u64, 1)) < 0.5
        })
    }

    #[test]
    fn p1_decodes_bits() {
        let img = load(b"P1\n2 2\n1 0\n0 1\n").unwrap();
        match img {
            Image::Binary(b) => assert_eq!(b.pixels(), &[1, 0, 0, 1]),
            _ => panic!("expected binary image"),
        }
    }

    #[test]
    fn p1_accepts_packed_bits_and_comments() {
        let img = load(b"P1\n# comment\n2 2\n1001\n").unwrap();
        match img {
            Image::Binary(b) => assert_eq!(b.pixels(), &[1, 0, 0, 1]),
            _ => panic!("expected binary image"),
        }
    }

    #[test]
    fn p4_matches_p1_for_same_content() {
        // P4 of [[1,0],[0,1]]: rows packed MSB-first -> 0x80, 0x40.
        let p4 = load(b"P4\n2 2\n\x80\x40").unwrap();
        let p1 = load(b"P1\n2 2\n1 0 0 1\n").unwrap();
        assert_eq!(p4, p1);
    }

    #[test]
    fn p1_and_p4_decoders_agree_on_random_images() {
        for seed in 0..24 {
            let w = 1 + (hash3(seed, 3, 0, 0) % 40) as usize;
            let h = 1 + (hash3(seed, 4, 0, 0) % 40) as usize;
            let img = random_binary(w, h, seed);
            let via_p1 = load(&save_binary(&img, true)).unwrap();
            let via_p4 = load(&save_binary(&img, false)).unwrap();
            assert_eq!(via_p1, via_p4);
            assert_eq!(via_p1, Image::Binary(img));
        }
    }

    #[test]
    fn unknown_magic_is_rejected() {
        match load(b"P7\nWIDTH 2\n") {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, 1);
                assert!(message.contains("P7"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_raw_data_names_offset() {
        let err = load(b"P5\n4 4\n255\n\x00\x01").unwrap_err();
        match err {
            Error::Parse { offset, message } => {
                assert_eq!(offset, 13);
                assert!(message.contains("unexpected end"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn oversized_maxval_is_rejected() {
        assert!(matches!(
            load(b"P2\n1 1\n65535\n12\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn malformed_header_is_rejected() {
        assert!(matches!(
            load(b"P2\n1 x\n255\n0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(load(b"P1\n0 3\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn gray_round_trip_single_pixel() {
        let img = GrayImage::new(1, 1, vec![128]).unwrap();
        let bytes = save_gray(&img, true);
        assert_eq!(bytes, b"P2\n1 1\n255\n128\n");
        assert_eq!(load(&bytes).unwrap(), Image::Gray(img));
    }

    #[test]
    fn round_trip_all_kinds_both_encodings() {
        let binary = Image::Binary(random_binary(17, 9, 7));
        let gray =
            Image::Gray(GrayImage::new(5, 4, (0..20).map(|i| (i * 13) as u8).collect()).unwrap());
        let color = Image::Color(
            ColorImage::new(
                3,
                2,
                (0..6)
                    .map(|i| [i as u8, (i * 40) as u8, 255 - i as u8])
                    .collect(),
            )
            .unwrap(),
        );
        for img in [binary, gray, color] {
            for ascii in [true, false] {
                let bytes = save(&img, ascii);
                assert_eq!(load(&bytes).unwrap(), img, "ascii={ascii}");
            }
        }
    }
}
