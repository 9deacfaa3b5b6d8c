//! Baseline sequential grayscale JPEG in the coefficient domain, plus binary
//! PGM for raw rasters.
//!
//! [`parse_jpeg`] stops after entropy decoding: it returns the quantized
//! levels and the stream's table with no inverse transform. [`emit_jpeg`]
//! writes such an image back out with the Annex K luminance Huffman tables.
//! Restart markers are accepted when reading and never written.

mod decode;
mod encode;
pub mod huffman;
mod pgm;

use thiserror::Error;

pub use decode::parse_jpeg;
pub use encode::{emit_jpeg, encode_raster};
pub use pgm::{emit_pgm, emit_pgm_raster, parse_pgm, parse_pgm_raster, PgmError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("malformed JPEG at byte {offset} ({marker}): {reason}")]
    MalformedStream {
        marker: String,
        offset: usize,
        reason: String,
    },
    #[error("unsupported JPEG at byte {offset} ({marker}): {reason}")]
    Unsupported {
        marker: String,
        offset: usize,
        reason: String,
    },
    #[error("block {block}: {what} {value} outside the baseline range")]
    CoefficientOutOfRange {
        block: usize,
        what: &'static str,
        value: i32,
    },
    #[error("only quantized images can be entropy coded")]
    NotQuantized,
    #[error("image {width}×{height} exceeds the 65535 pixel JPEG limit")]
    TooLarge { width: usize, height: usize },
}

impl CodecError {
    /// Byte offset for stream errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            CodecError::MalformedStream { offset, .. } | CodecError::Unsupported { offset, .. } => {
                Some(*offset)
            }
            _ => None,
        }
    }
}

pub(crate) mod marker {
    pub const SOI: u8 = 0xd8;
    pub const EOI: u8 = 0xd9;
    pub const SOF0: u8 = 0xc0;
    pub const DHT: u8 = 0xc4;
    pub const DAC: u8 = 0xcc;
    pub const DQT: u8 = 0xdb;
    pub const DRI: u8 = 0xdd;
    pub const DNL: u8 = 0xdc;
    pub const SOS: u8 = 0xda;
    pub const APP0: u8 = 0xe0;
    pub const COM: u8 = 0xfe;
    pub const RST0: u8 = 0xd0;
    pub const RST7: u8 = 0xd7;

    pub fn name(code: u8) -> String {
        match code {
            SOI => "SOI".into(),
            EOI => "EOI".into(),
            DHT => "DHT".into(),
            DAC => "DAC".into(),
            DQT => "DQT".into(),
            DRI => "DRI".into(),
            DNL => "DNL".into(),
            SOS => "SOS".into(),
            COM => "COM".into(),
            0xc0..=0xcf => format!("SOF{}", code - 0xc0),
            RST0..=RST7 => format!("RST{}", code - RST0),
            0xe0..=0xef => format!("APP{}", code - APP0),
            _ => format!("0xFF{code:02X}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marker_names() {
        assert_eq!(marker::name(0xc2), "SOF2");
        assert_eq!(marker::name(0xd3), "RST3");
        assert_eq!(marker::name(0xe1), "APP1");
        assert_eq!(marker::name(0x01), "0xFF01");
    }
}
