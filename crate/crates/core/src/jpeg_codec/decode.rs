use crate::blockdct::{CoeffBlock, CoeffForm, QuantTable, BLOCK_LEN, MAX_QUANT_DC};
use crate::grid::{BlockGrid, BlockImage};

use super::huffman::{DecodeTable, HuffmanSpec, ZIGZAG};
use super::{marker, CodecError};

fn malformed(code: u8, offset: usize, reason: impl Into<String>) -> CodecError {
    CodecError::MalformedStream {
        marker: marker::name(code),
        offset,
        reason: reason.into(),
    }
}

fn unsupported(code: u8, offset: usize, reason: impl Into<String>) -> CodecError {
    CodecError::Unsupported {
        marker: marker::name(code),
        offset,
        reason: reason.into(),
    }
}

struct Frame {
    width: usize,
    height: usize,
    component_id: u8,
    quant_id: u8,
}

#[derive(Default)]
struct Parser<'a> {
    data: &'a [u8],
    quant: [Option<[u16; BLOCK_LEN]>; 4],
    dc_tables: [Option<DecodeTable>; 4],
    ac_tables: [Option<DecodeTable>; 4],
    restart_interval: usize,
    frame: Option<Frame>,
    blocks: Option<Vec<CoeffBlock>>,
}

/// Entropy-decodes a baseline grayscale stream into quantized coefficient
/// blocks. No dequantization or inverse transform is applied.
pub fn parse_jpeg(data: &[u8]) -> Result<BlockImage, CodecError> {
    Parser {
        data,
        ..Default::default()
    }
    .run()
}

impl<'a> Parser<'a> {
    fn run(mut self) -> Result<BlockImage, CodecError> {
        if self.data.len() < 2 || self.data[0] != 0xff || self.data[1] != marker::SOI {
            return Err(malformed(marker::SOI, 0, "stream does not start with SOI"));
        }
        let mut pos = 2;
        loop {
            let (code, at) = self.next_marker(pos)?;
            pos = at + 2;
            match code {
                marker::EOI => break,
                marker::SOF0 => {
                    let body = self.segment(code, at)?;
                    self.read_frame(body, at)?;
                    pos += body.len() + 2;
                }
                0xc1..=0xc3 | 0xc5..=0xc7 => {
                    let reason = match code {
                        0xc2 | 0xc6 => "progressive coding",
                        0xc3 | 0xc7 => "lossless coding",
                        0xc1 => "extended sequential coding",
                        _ => "hierarchical coding",
                    };
                    return Err(unsupported(code, at, reason));
                }
                0xc9..=0xcb | 0xcd..=0xcf | marker::DAC => {
                    return Err(unsupported(code, at, "arithmetic coding"));
                }
                0xc8 => return Err(unsupported(code, at, "JPEG extension frame")),
                marker::DNL => return Err(unsupported(code, at, "DNL-defined height")),
                marker::DQT => {
                    let body = self.segment(code, at)?;
                    self.read_dqt(body, at)?;
                    pos += body.len() + 2;
                }
                marker::DHT => {
                    let body = self.segment(code, at)?;
                    self.read_dht(body, at)?;
                    pos += body.len() + 2;
                }
                marker::DRI => {
                    let body = self.segment(code, at)?;
                    if body.len() != 2 {
                        return Err(malformed(code, at, "DRI length must be 4"));
                    }
                    self.restart_interval = usize::from(u16::from_be_bytes([body[0], body[1]]));
                    pos += 4;
                }
                marker::SOS => {
                    let body = self.segment(code, at)?;
                    pos += body.len() + 2;
                    pos = self.read_scan(body, at, pos)?;
                }
                marker::RST0..=marker::RST7 => {}
                0xe0..=0xef | marker::COM => {
                    let body = self.segment(code, at)?;
                    pos += body.len() + 2;
                }
                marker::SOI => return Err(malformed(code, at, "nested SOI")),
                _ => {
                    let body = self.segment(code, at)?;
                    pos += body.len() + 2;
                }
            }
        }
        let eoi_at = pos - 2;
        let frame = self
            .frame
            .take()
            .ok_or_else(|| malformed(marker::EOI, eoi_at, "no SOF0 frame before EOI"))?;
        let blocks = self
            .blocks
            .take()
            .ok_or_else(|| malformed(marker::EOI, eoi_at, "no scan before EOI"))?;
        let table = self.quant[frame.quant_id as usize].ok_or_else(|| {
            malformed(marker::SOF0, eoi_at, "frame references an undefined table")
        })?;
        let quant =
            QuantTable::new(table).map_err(|e| unsupported(marker::DQT, eoi_at, e.to_string()))?;
        let grid = BlockGrid::new(frame.width, frame.height, blocks)
            .map_err(|e| malformed(marker::SOF0, eoi_at, e.to_string()))?;
        Ok(BlockImage::from_parts(grid, quant, CoeffForm::Quantized))
    }

    /// Finds the next marker at or after `pos`, skipping fill bytes and any
    /// stray non-marker bytes. Returns the marker code and the offset of its
    /// leading 0xFF.
    fn next_marker(&self, mut pos: usize) -> Result<(u8, usize), CodecError> {
        let d = self.data;
        loop {
            while pos < d.len() && d[pos] != 0xff {
                pos += 1;
            }
            while pos + 1 < d.len() && d[pos + 1] == 0xff {
                pos += 1;
            }
            if pos + 1 >= d.len() {
                return Err(malformed(marker::EOI, d.len(), "stream ends without EOI"));
            }
            let code = d[pos + 1];
            if code != 0x00 {
                return Ok((code, pos));
            }
            pos += 2;
        }
    }

    /// Payload of the length-prefixed segment whose marker sits at `at`.
    fn segment(&self, code: u8, at: usize) -> Result<&'a [u8], CodecError> {
        let d = self.data;
        if at + 4 > d.len() {
            return Err(malformed(code, d.len(), "segment length truncated"));
        }
        let len = usize::from(u16::from_be_bytes([d[at + 2], d[at + 3]]));
        if len < 2 {
            return Err(malformed(code, at + 2, "segment length below 2"));
        }
        let end = at + 2 + len;
        if end > d.len() {
            return Err(malformed(code, d.len(), "segment runs past end of stream"));
        }
        Ok(&d[at + 4..end])
    }

    fn read_frame(&mut self, body: &[u8], at: usize) -> Result<(), CodecError> {
        let code = marker::SOF0;
        if self.frame.is_some() {
            return Err(malformed(code, at, "more than one frame"));
        }
        if body.len() < 6 {
            return Err(malformed(code, at, "frame header truncated"));
        }
        if body[0] != 8 {
            return Err(unsupported(
                code,
                at,
                format!("{}-bit sample precision", body[0]),
            ));
        }
        let height = usize::from(u16::from_be_bytes([body[1], body[2]]));
        let width = usize::from(u16::from_be_bytes([body[3], body[4]]));
        let ncomp = body[5];
        if ncomp != 1 {
            return Err(unsupported(
                code,
                at,
                format!("{ncomp} components (only grayscale)"),
            ));
        }
        if body.len() != 9 {
            return Err(malformed(
                code,
                at,
                "frame header length does not match one component",
            ));
        }
        if height == 0 {
            return Err(unsupported(code, at, "zero height (DNL) frames"));
        }
        if width == 0 {
            return Err(malformed(code, at, "zero width"));
        }
        let quant_id = body[8];
        if quant_id > 3 {
            return Err(malformed(
                code,
                at,
                format!("quantization table id {quant_id}"),
            ));
        }
        self.frame = Some(Frame {
            width,
            height,
            component_id: body[6],
            quant_id,
        });
        Ok(())
    }

    fn read_dqt(&mut self, mut body: &[u8], at: usize) -> Result<(), CodecError> {
        let code = marker::DQT;
        while !body.is_empty() {
            let precision = body[0] >> 4;
            let id = body[0] & 0x0f;
            if id > 3 {
                return Err(malformed(code, at, format!("table id {id}")));
            }
            let size = match precision {
                0 => 64,
                1 => 128,
                p => return Err(malformed(code, at, format!("table precision {p}"))),
            };
            if body.len() < 1 + size {
                return Err(malformed(code, at, "table truncated"));
            }
            let mut table = [0u16; BLOCK_LEN];
            for (k, &n) in ZIGZAG.iter().enumerate() {
                table[n] = if precision == 0 {
                    u16::from(body[1 + k])
                } else {
                    u16::from_be_bytes([body[1 + 2 * k], body[2 + 2 * k]])
                };
            }
            if table.contains(&0) {
                return Err(malformed(code, at, "zero quantizer"));
            }
            self.quant[id as usize] = Some(table);
            body = &body[1 + size..];
        }
        Ok(())
    }

    fn read_dht(&mut self, mut body: &[u8], at: usize) -> Result<(), CodecError> {
        let code = marker::DHT;
        while !body.is_empty() {
            if body.len() < 17 {
                return Err(malformed(code, at, "table header truncated"));
            }
            let class = body[0] >> 4;
            let id = body[0] & 0x0f;
            if class > 1 || id > 3 {
                return Err(malformed(code, at, format!("table class {class} id {id}")));
            }
            let mut bits = [0u8; 16];
            bits.copy_from_slice(&body[1..17]);
            let count: usize = bits.iter().map(|&b| b as usize).sum();
            if body.len() < 17 + count {
                return Err(malformed(code, at, "table values truncated"));
            }
            let spec = HuffmanSpec {
                bits,
                values: body[17..17 + count].to_vec(),
            };
            let table = DecodeTable::new(&spec)
                .ok_or_else(|| malformed(code, at, "code lengths overflow"))?;
            if class == 0 {
                self.dc_tables[id as usize] = Some(table);
            } else {
                self.ac_tables[id as usize] = Some(table);
            }
            body = &body[17 + count..];
        }
        Ok(())
    }

    /// Decodes the scan whose entropy data starts at `start`. Returns the
    /// offset just past the consumed entropy data.
    fn read_scan(&mut self, body: &[u8], at: usize, start: usize) -> Result<usize, CodecError> {
        let code = marker::SOS;
        let frame = self
            .frame
            .as_ref()
            .ok_or_else(|| malformed(code, at, "scan before frame header"))?;
        if self.blocks.is_some() {
            return Err(unsupported(code, at, "multiple scans"));
        }
        if body.len() != 6 || body[0] != 1 {
            return Err(malformed(
                code,
                at,
                "scan header must name exactly one component",
            ));
        }
        if body[1] != frame.component_id {
            return Err(malformed(
                code,
                at,
                format!("unknown component {}", body[1]),
            ));
        }
        let (dc_id, ac_id) = ((body[2] >> 4) as usize, (body[2] & 0x0f) as usize);
        if body[3] != 0 || body[4] != 63 || body[5] != 0 {
            return Err(unsupported(
                code,
                at,
                "spectral selection or successive approximation",
            ));
        }
        let dc = self
            .dc_tables
            .get(dc_id)
            .and_then(Option::as_ref)
            .ok_or_else(|| malformed(code, at, format!("undefined DC table {dc_id}")))?;
        let ac = self
            .ac_tables
            .get(ac_id)
            .and_then(Option::as_ref)
            .ok_or_else(|| malformed(code, at, format!("undefined AC table {ac_id}")))?;

        let cols = frame.width.div_ceil(8);
        let rows = frame.height.div_ceil(8);
        let total = cols * rows;
        let mut blocks = Vec::with_capacity(total);
        let mut reader = BitReader::new(self.data, start);
        let mut pred = 0i32;
        for index in 0..total {
            if self.restart_interval > 0 && index > 0 && index % self.restart_interval == 0 {
                reader.restart()?;
                pred = 0;
            }
            blocks.push(decode_block(&mut reader, dc, ac, &mut pred)?);
        }
        self.blocks = Some(blocks);
        Ok(reader.pos)
    }
}

fn decode_block(
    r: &mut BitReader,
    dc: &DecodeTable,
    ac: &DecodeTable,
    pred: &mut i32,
) -> Result<CoeffBlock, CodecError> {
    let mut levels = [0i32; BLOCK_LEN];
    let cat = r.symbol(dc)?;
    if cat > 11 {
        return Err(r.error(format!("DC category {cat}")));
    }
    let diff = r.receive_extend(cat)?;
    *pred += diff;
    if pred.abs() > MAX_QUANT_DC {
        return Err(r.error(format!("DC value {pred} out of range")));
    }
    levels[0] = *pred;
    let mut k = 1;
    while k < BLOCK_LEN {
        let rs = r.symbol(ac)?;
        let run = usize::from(rs >> 4);
        let size = rs & 0x0f;
        if size == 0 {
            if run == 15 {
                k += 16;
                continue;
            }
            break;
        }
        if size > 10 {
            return Err(r.error(format!("AC category {size}")));
        }
        k += run;
        if k >= BLOCK_LEN {
            return Err(r.error("AC run past end of block"));
        }
        levels[ZIGZAG[k]] = r.receive_extend(size)?;
        k += 1;
    }
    if k > BLOCK_LEN {
        return Err(r.error("zero run past end of block"));
    }
    Ok(CoeffBlock::quantized(levels))
}

/// MSB-first reader over entropy-coded bytes that undoes byte stuffing and
/// refuses to read across a marker.
struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u64,
    nbits: u32,
    /// Offset of a marker that ended the entropy data, if one was hit.
    stopped_at: Option<usize>,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8], pos: usize) -> Self {
        Self {
            data,
            pos,
            acc: 0,
            nbits: 0,
            stopped_at: None,
        }
    }

    fn fill(&mut self) {
        while self.nbits <= 56 && self.stopped_at.is_none() {
            let Some(&byte) = self.data.get(self.pos) else {
                return;
            };
            if byte == 0xff {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => self.pos += 2,
                    Some(_) => {
                        self.stopped_at = Some(self.pos);
                        return;
                    }
                    None => return,
                }
            } else {
                self.pos += 1;
            }
            self.acc = (self.acc << 8) | u64::from(byte);
            self.nbits += 8;
        }
    }

    fn error(&self, reason: impl Into<String>) -> CodecError {
        malformed(marker::SOS, self.pos, reason)
    }

    fn exhausted(&self) -> CodecError {
        match self.stopped_at {
            Some(at) => malformed(
                self.data[at + 1],
                at,
                "entropy-coded data ends before the scan is complete",
            ),
            None => malformed(marker::SOS, self.data.len(), "truncated entropy-coded data"),
        }
    }

    /// Next 16 bits, zero-padded past the available data.
    fn peek16(&mut self) -> u32 {
        if self.nbits < 16 {
            self.fill();
        }
        if self.nbits >= 16 {
            ((self.acc >> (self.nbits - 16)) & 0xffff) as u32
        } else {
            ((self.acc << (16 - self.nbits)) & 0xffff) as u32
        }
    }

    fn consume(&mut self, n: u32) -> Result<(), CodecError> {
        if n > self.nbits {
            return Err(self.exhausted());
        }
        self.nbits -= n;
        self.acc &= (1u64 << self.nbits) - 1;
        Ok(())
    }

    fn bits(&mut self, n: u8) -> Result<u32, CodecError> {
        if n == 0 {
            return Ok(0);
        }
        let n = u32::from(n);
        if self.nbits < n {
            self.fill();
        }
        if self.nbits < n {
            return Err(self.exhausted());
        }
        let v = (self.acc >> (self.nbits - n)) as u32 & ((1 << n) - 1);
        self.consume(n)?;
        Ok(v)
    }

    fn symbol(&mut self, table: &DecodeTable) -> Result<u8, CodecError> {
        let peek = self.peek16();
        let (sym, len) = table
            .decode(peek)
            .ok_or_else(|| self.error("invalid Huffman code"))?;
        self.consume(u32::from(len))?;
        Ok(sym)
    }

    fn receive_extend(&mut self, size: u8) -> Result<i32, CodecError> {
        if size == 0 {
            return Ok(0);
        }
        let v = self.bits(size)? as i32;
        Ok(if v < (1 << (size - 1)) {
            v - (1 << size) + 1
        } else {
            v
        })
    }

    /// Drops buffered bits and consumes the expected RSTn marker.
    fn restart(&mut self) -> Result<(), CodecError> {
        self.acc = 0;
        self.nbits = 0;
        let at = self.stopped_at.take().unwrap_or(self.pos);
        match self.data.get(at..at + 2) {
            Some([0xff, m]) if (marker::RST0..=marker::RST7).contains(m) => {
                self.pos = at + 2;
                Ok(())
            }
            Some(_) => Err(malformed(marker::RST0, at, "expected restart marker")),
            None => Err(malformed(
                marker::RST0,
                self.data.len(),
                "truncated before restart marker",
            )),
        }
    }
}
