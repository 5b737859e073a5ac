//! Binary PGM (P5, maxval 255) read/write and 8-bit PNG read.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use super::GrayImage;
use crate::error::{Error, Result};

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Loads a grayscale image. RGB input is converted with
/// `0.299 R + 0.587 G + 0.114 B`; any alpha channel is ignored.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes).map_err(|reason| Error::Format {
        path: path.to_path_buf(),
        reason,
    })
}

/// Writes a P5 PGM. Values are rounded half away from zero and clamped to
/// `[0, 255]` on the way out; the in-memory image is not modified.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub(crate) fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.data().iter().map(|&v| to_byte(v)));
    out
}

fn to_byte(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub(crate) fn decode_image(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(format!(
            "netpbm variant P{} is not supported (binary P5 only)",
            bytes[1] as char
        ))
    } else {
        Err("not a PGM or PNG file".into())
    }
}

fn decode_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // whitespace and comments between header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err("truncated PGM header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err("malformed PGM header".into());
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed PGM header")?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(format!("PGM maxval {maxval} is not supported (255 only)"));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err("malformed PGM header".into()),
    }
    let n = width.checked_mul(height).ok_or("PGM dimensions overflow")?;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or_else(|| format!("PGM raster truncated: expected {n} bytes"))?;
    GrayImage::new(
        width,
        height,
        raster.iter().map(|&b| f64::from(b)).collect(),
    )
    .map_err(|e| e.to_string())
}

fn decode_png(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| e.to_string())?;
    let size = reader
        .output_buffer_size()
        .ok_or("PNG too large to decode")?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(format!(
            "PNG bit depth {:?} is not supported (8-bit only)",
            info.bit_depth
        ));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err("unexpanded palette PNG".into()),
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let mut data = Vec::with_capacity(width * height);
    for row in 0..height {
        let line = &buf[row * info.line_size..row * info.line_size + width * channels];
        for px in line.chunks_exact(channels) {
            data.push(if channels < 3 {
                f64::from(px[0])
            } else {
                luma(px[0], px[1], px[2])
            });
        }
    }
    GrayImage::new(width, height, data).map_err(|e| e.to_string())
}

pub(crate) fn luma(r: u8, g: u8, b: u8) -> f64 {
    LUMA_R * f64::from(r) + LUMA_G * f64::from(g) + LUMA_B * f64::from(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Coord;

    #[test]
    fn decodes_tiny_pgm() {
        let bytes = b"P5\n2 2\n255\n\x00\x80\xff\x40";
        let img = decode_image(bytes).unwrap();
        assert_eq!(img.data(), &[0.0, 128.0, 255.0, 64.0]);
    }

    #[test]
    fn header_comments_are_skipped() {
        let bytes = b"P5 # comment\n# another\n1 2 255\n\x07\x09";
        let img = decode_image(bytes).unwrap();
        assert_eq!((img.width(), img.height()), (1, 2));
        assert_eq!(img.data(), &[7.0, 9.0]);
    }

    #[test]
    fn rejects_other_maxval_and_truncation() {
        assert!(decode_image(b"P5\n1 1\n65535\n\x00\x00")
            .unwrap_err()
            .contains("maxval"));
        assert!(decode_image(b"P5\n2 2\n255\n\x00").is_err());
        assert!(decode_image(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_image(b"GIF89a").is_err());
    }

    #[test]
    fn export_rounds_and_clamps() {
        let img = GrayImage::new(4, 1, vec![254.6, -3.2, 100.0, 2.5]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[bytes.len() - 4..], &[255, 0, 100, 3]);
        assert_eq!(img.data()[1], -3.2);
    }

    #[test]
    fn luma_weights() {
        assert!((luma(255, 255, 255) - 255.0).abs() < 1e-12);
        assert!((luma(255, 0, 0) - 76.245).abs() < 1e-12);
    }

    fn encode_png(width: u32, height: u32, color: png::ColorType, pixels: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, width, height);
            enc.set_color(color);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(pixels).unwrap();
        }
        out
    }

    #[test]
    fn decodes_gray_and_rgb_png() {
        let gray = encode_png(2, 1, png::ColorType::Grayscale, &[10, 250]);
        assert_eq!(decode_image(&gray).unwrap().data(), &[10.0, 250.0]);

        let rgb = encode_png(2, 1, png::ColorType::Rgb, &[255, 255, 255, 255, 0, 0]);
        let img = decode_image(&rgb).unwrap();
        assert!((img.get(Coord::new(0, 0)) - 255.0).abs() < 1e-12);
        assert!((img.get(Coord::new(0, 1)) - 76.245).abs() < 1e-12);

        let rgba = encode_png(1, 1, png::ColorType::Rgba, &[0, 0, 255, 7]);
        assert!((decode_image(&rgba).unwrap().data()[0] - 0.114 * 255.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_16_bit_png() {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, 1, 1);
            enc.set_color(png::ColorType::Grayscale);
            enc.set_depth(png::BitDepth::Sixteen);
            let mut w = enc.write_header().unwrap();
            w.write_image_data(&[1, 2]).unwrap();
        }
        assert!(decode_image(&out).unwrap_err().contains("bit depth"));
    }
}
