//! Binary PGM (P5) with maxval 255.

use thiserror::Error;

use crate::grid::{PixelGrid, Raster};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("unsupported PGM maxval {0} (only 255)")]
    UnsupportedMaxval(u32),
    #[error("PGM pixel data truncated: expected {expected} bytes, got {found}")]
    Truncated { expected: usize, found: usize },
}

struct Header {
    width: usize,
    height: usize,
    data_start: usize,
}

fn read_header(bytes: &[u8]) -> Result<Header, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::MalformedHeader("missing P5 magic".into()));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(PgmError::MalformedHeader(format!(
                "expected {} at byte {start}",
                ["width", "height", "maxval"][i]
            )));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                PgmError::MalformedHeader(format!("number too large at byte {start}"))
            })?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(PgmError::MalformedHeader(
            "no whitespace after maxval".into(),
        ));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(PgmError::MalformedHeader(format!(
            "zero dimension {width}×{height}"
        )));
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    Ok(Header {
        width: width as usize,
        height: height as usize,
        data_start: pos + 1,
    })
}

/// Reads a P5 image at its true size.
pub fn parse_pgm_raster(bytes: &[u8]) -> Result<Raster, PgmError> {
    let h = read_header(bytes)?;
    let expected = h.width * h.height;
    let data = &bytes[h.data_start..];
    if data.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            found: data.len(),
        });
    }
    Ok(Raster::from_u8(h.width, h.height, &data[..expected]).expect("dimensions checked"))
}

/// Reads a P5 image into 8×8 blocks, edge-replicating into the padding.
pub fn parse_pgm(bytes: &[u8]) -> Result<PixelGrid, PgmError> {
    Ok(parse_pgm_raster(bytes)?.to_pixel_grid())
}

pub fn emit_pgm_raster(raster: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", raster.width(), raster.height()).into_bytes();
    out.extend(raster.to_u8());
    out
}

/// Writes the grid cropped to its pixel size, rounding half away from zero
/// and clamping to 0..=255.
pub fn emit_pgm(grid: &PixelGrid) -> Vec<u8> {
    emit_pgm_raster(&grid.to_raster())
}
