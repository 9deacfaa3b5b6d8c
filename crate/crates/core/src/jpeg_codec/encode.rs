use crate::blockdct::{CoeffForm, QuantTable, BLOCK_LEN, MAX_QUANT_AC, MAX_QUANT_DC};
use crate::grid::{BlockImage, Raster};

use super::huffman::{category, EncodeTable, HuffmanSpec, ZIGZAG};
use super::{marker, CodecError};

struct BitWriter {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

impl BitWriter {
    fn new(out: Vec<u8>) -> Self {
        Self {
            out,
            acc: 0,
            nbits: 0,
        }
    }

    fn put(&mut self, bits: u32, len: u8) {
        if len == 0 {
            return;
        }
        let len = u32::from(len);
        self.acc = (self.acc << len) | u64::from(bits & ((1 << len) - 1));
        self.nbits += len;
        while self.nbits >= 8 {
            let byte = (self.acc >> (self.nbits - 8)) as u8;
            self.out.push(byte);
            if byte == 0xff {
                self.out.push(0x00);
            }
            self.nbits -= 8;
        }
    }

    /// Pads the final partial byte with one-bits.
    fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits as u8;
            self.put((1 << pad) - 1, pad);
        }
        self.out
    }
}

fn segment(out: &mut Vec<u8>, code: u8, payload: &[u8]) {
    out.extend_from_slice(&[0xff, code]);
    out.extend_from_slice(&((payload.len() + 2) as u16).to_be_bytes());
    out.extend_from_slice(payload);
}

fn dht_payload(class_id: u8, spec: &HuffmanSpec, payload: &mut Vec<u8>) {
    payload.push(class_id);
    payload.extend_from_slice(&spec.bits);
    payload.extend_from_slice(&spec.values);
}

/// Writes a quantized image as a baseline grayscale JFIF stream.
///
/// Output is a pure function of the image: SOI, APP0, DQT, SOF0, DHT, SOS,
/// scan, EOI. No restart markers are written.
pub fn emit_jpeg(image: &BlockImage) -> Result<Vec<u8>, CodecError> {
    if image.form() != CoeffForm::Quantized {
        return Err(CodecError::NotQuantized);
    }
    let (width, height) = (image.width(), image.height());
    if width > u16::MAX as usize || height > u16::MAX as usize {
        return Err(CodecError::TooLarge { width, height });
    }

    let mut out = Vec::with_capacity(1024 + image.blocks().len() * 16);
    out.extend_from_slice(&[0xff, marker::SOI]);
    segment(
        &mut out,
        marker::APP0,
        &[b'J', b'F', b'I', b'F', 0, 1, 1, 0, 0, 1, 0, 1, 0, 0],
    );

    let mut dqt = Vec::with_capacity(65);
    dqt.push(0x00);
    dqt.extend(ZIGZAG.iter().map(|&n| image.quant().entries()[n] as u8));
    segment(&mut out, marker::DQT, &dqt);

    let mut sof = Vec::with_capacity(9);
    sof.push(8);
    sof.extend_from_slice(&(height as u16).to_be_bytes());
    sof.extend_from_slice(&(width as u16).to_be_bytes());
    sof.extend_from_slice(&[1, 1, 0x11, 0]);
    segment(&mut out, marker::SOF0, &sof);

    let dc_spec = HuffmanSpec::std_dc_luma();
    let ac_spec = HuffmanSpec::std_ac_luma();
    let mut dht = Vec::new();
    dht_payload(0x00, &dc_spec, &mut dht);
    dht_payload(0x10, &ac_spec, &mut dht);
    segment(&mut out, marker::DHT, &dht);

    segment(&mut out, marker::SOS, &[1, 1, 0x00, 0, 63, 0]);

    let dc = EncodeTable::new(&dc_spec).expect("standard DC table is valid");
    let ac = EncodeTable::new(&ac_spec).expect("standard AC table is valid");
    let mut w = BitWriter::new(out);
    let mut pred = 0i32;
    for (index, block) in image.blocks().iter().enumerate() {
        let levels = block.levels().map_err(|_| CodecError::NotQuantized)?;
        encode_block(&mut w, &levels, &mut pred, &dc, &ac, index)?;
    }
    let mut out = w.finish();
    out.extend_from_slice(&[0xff, marker::EOI]);
    Ok(out)
}

fn encode_block(
    w: &mut BitWriter,
    levels: &[i32; BLOCK_LEN],
    pred: &mut i32,
    dc: &EncodeTable,
    ac: &EncodeTable,
    block: usize,
) -> Result<(), CodecError> {
    let dc_level = levels[0];
    if dc_level.abs() > MAX_QUANT_DC {
        return Err(CodecError::CoefficientOutOfRange {
            block,
            what: "DC",
            value: dc_level,
        });
    }
    let diff = dc_level - *pred;
    *pred = dc_level;
    let cat = category(diff);
    if cat > 11 {
        return Err(CodecError::CoefficientOutOfRange {
            block,
            what: "DC difference",
            value: diff,
        });
    }
    put_symbol(w, dc, cat);
    put_magnitude(w, diff, cat);

    let mut run = 0u8;
    for &n in &ZIGZAG[1..] {
        let v = levels[n];
        if v == 0 {
            run += 1;
            continue;
        }
        if v.abs() > MAX_QUANT_AC {
            return Err(CodecError::CoefficientOutOfRange {
                block,
                what: "AC",
                value: v,
            });
        }
        while run >= 16 {
            put_symbol(w, ac, 0xf0);
            run -= 16;
        }
        let cat = category(v);
        put_symbol(w, ac, (run << 4) | cat);
        put_magnitude(w, v, cat);
        run = 0;
    }
    if run > 0 {
        put_symbol(w, ac, 0x00);
    }
    Ok(())
}

fn put_symbol(w: &mut BitWriter, table: &EncodeTable, symbol: u8) {
    let (code, len) = table.get(symbol);
    debug_assert!(len > 0, "symbol {symbol:#x} missing from table");
    w.put(u32::from(code), len);
}

fn put_magnitude(w: &mut BitWriter, v: i32, cat: u8) {
    if cat == 0 {
        return;
    }
    let bits = if v < 0 { v - 1 } else { v };
    w.put(bits as u32, cat);
}

/// Convenience: level shift, transform, quantize with `quality` and emit.
pub fn encode_raster(raster: &Raster, quality: u8) -> Result<Vec<u8>, CodecError> {
    emit_jpeg(&BlockImage::from_raster(
        raster,
        &QuantTable::for_quality(quality),
    ))
}
