//! Binary 8-bit PGM (`P5`) images.
//!
//! The writer always emits `P5\n<width> <height>\n255\n` followed by the raw
//! row-major bytes. The reader accepts any whitespace between header tokens
//! and `#` comments, but only a maxval of 255.

use crate::error::{Error, Result};
use crate::preprocess::GrayImage;

pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    let mut token = || -> Result<&[u8]> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::Pgm("truncated header".into())),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            pos += 1;
        }
        Ok(&bytes[start..pos])
    };

    if token()? != b"P5" {
        return Err(Error::Pgm("expected magic `P5`".into()));
    }
    let mut number = |what: &str| -> Result<usize> {
        std::str::from_utf8(token()?)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("bad {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(Error::Pgm(format!("maxval {maxval} unsupported, need 255")));
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(Error::Pgm("missing raster".into()));
    }
    let raster = &bytes[pos + 1..];
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("image too large".into()))?;
    if raster.len() != n {
        return Err(Error::Pgm(format!(
            "expected {n} pixel bytes, found {}",
            raster.len()
        )));
    }
    GrayImage::new(width, height, raster.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_header() {
        let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
        assert_eq!(write_pgm(&img), b"P5\n2 1\n255\n\x00\xff".to_vec());
    }

    #[test]
    fn reads_comments_and_whitespace() {
        let bytes = b"P5 # made by hand\n 3\t1 \n# max\n255\n\x01\x02\x0a";
        let img = read_pgm(bytes).unwrap();
        assert_eq!(img.pixels(), &[1, 2, 10]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(read_pgm(b"P5\n2 2\n255\n\x00").is_err());
        assert!(read_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(read_pgm(b"P5\n1").is_err());
        assert!(read_pgm(b"").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(w in 0usize..20, h in 0usize..20, seed: u8) {
            let px: Vec<u8> = (0..w * h).map(|i| (i as u8).wrapping_mul(31).wrapping_add(seed)).collect();
            let img = GrayImage::new(w, h, px).unwrap();
            prop_assert_eq!(read_pgm(&write_pgm(&img)).unwrap(), img);
        }
    }
}
