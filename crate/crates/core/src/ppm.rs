//! Binary PPM (P6) reading and writing.
//!
//! Output is always maxval 255 with channels rounded half-up from `[0, 1]`.
//! Input accepts any maxval up to 255 and `#` comments in the header.
//! Texture files use pure magenta (255, 0, 255) to mark transparent texels.

use std::io::Write;
use std::path::Path;

use crate::render::{Image, Rgb};
use crate::scene::Texture;
use crate::{Error, Result};

/// Channel value in `[0, 1]` to an 8-bit sample, rounding half up.
#[inline]
pub fn quantize(v: f64) -> u8 {
    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    (v * 255.0 + 0.5).floor() as u8
}

pub fn encode(image: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.reserve(image.pixels.len() * 3);
    for p in &image.pixels {
        out.extend_from_slice(&[quantize(p.r), quantize(p.g), quantize(p.b)]);
    }
    out
}

pub fn write(image: &Image, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&encode(image))?;
    f.flush()?;
    Ok(())
}

/// Raw decoded samples: `(width, height, maxval, rgb bytes)`.
fn decode_raw(bytes: &[u8]) -> Result<(usize, usize, u32, &[u8])> {
    let mut pos = 0usize;
    let mut fields = [0u64; 3];

    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(Error::Ppm("missing P6 magic number".into()));
    }
    pos += 2;
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Ppm("malformed header".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::Ppm("malformed header".into()))?;
        *field = text.parse().map_err(|_| Error::Ppm("header value out of range".into()))?;
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Ppm("missing whitespace after maxval".into())),
    }

    let [w, h, maxval] = fields;
    if w == 0 || h == 0 {
        return Err(Error::Ppm("image dimensions must be positive".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Ppm("only maxval 1..=255 is supported".into()));
    }
    let n = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(3))
        .filter(|&n| n <= (bytes.len() - pos) as u64)
        .ok_or_else(|| Error::Ppm("raster is truncated".into()))? as usize;
    Ok((w as usize, h as usize, maxval as u32, &bytes[pos..pos + n]))
}

pub fn decode(bytes: &[u8]) -> Result<Image> {
    let (w, h, maxval, raster) = decode_raw(bytes)?;
    let scale = 1.0 / maxval as f64;
    let pixels = raster
        .chunks_exact(3)
        .map(|c| {
            Rgb::new(
                (c[0] as f64 * scale).min(1.0),
                (c[1] as f64 * scale).min(1.0),
                (c[2] as f64 * scale).min(1.0),
            )
        })
        .collect();
    Ok(Image { width: w, height: h, pixels })
}

pub fn read(path: &Path) -> Result<Image> {
    decode(&std::fs::read(path)?)
}

/// Decodes a texture; magenta texels become transparent.
pub fn decode_texture(bytes: &[u8]) -> Result<Texture> {
    let (w, h, maxval, raster) = decode_raw(bytes)?;
    let scale = 1.0 / maxval as f64;
    let m = maxval as u8;
    let texels = raster
        .chunks_exact(3)
        .map(|c| {
            if c[0] == m && c[1] == 0 && c[2] == m {
                None
            } else {
                Some(Rgb::new(
                    (c[0] as f64 * scale).min(1.0),
                    (c[1] as f64 * scale).min(1.0),
                    (c[2] as f64 * scale).min(1.0),
                ))
            }
        })
        .collect();
    Texture::new(w, h, texels)
}

pub fn read_texture(path: &Path) -> Result<Texture> {
    decode_texture(&std::fs::read(path)?)
}
