//! Canonical Huffman tables for baseline JPEG.

/// Natural-order index of the `k`-th coefficient in zigzag order.
pub const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, //
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28, //
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, //
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

pub const STD_DC_LUMA_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
pub const STD_DC_LUMA_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub const STD_AC_LUMA_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d];
pub const STD_AC_LUMA_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
    0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0,
    0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
    0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
    0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5,
    0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
    0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8,
    0xf9, 0xfa,
];

/// Table as carried in a DHT segment: code counts per length and symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanSpec {
    pub bits: [u8; 16],
    pub values: Vec<u8>,
}

impl HuffmanSpec {
    pub fn std_dc_luma() -> Self {
        Self {
            bits: STD_DC_LUMA_BITS,
            values: STD_DC_LUMA_VALUES.to_vec(),
        }
    }

    pub fn std_ac_luma() -> Self {
        Self {
            bits: STD_AC_LUMA_BITS,
            values: STD_AC_LUMA_VALUES.to_vec(),
        }
    }

    /// Assigns canonical codes, returning `(symbol, code, length)` triples in
    /// table order, or `None` when the counts overflow a length.
    fn canonical_codes(&self) -> Option<Vec<(u8, u16, u8)>> {
        let total: usize = self.bits.iter().map(|&b| b as usize).sum();
        if total != self.values.len() || total > 256 {
            return None;
        }
        let mut out = Vec::with_capacity(total);
        let mut code: u32 = 0;
        let mut k = 0;
        for len in 1..=16u8 {
            for _ in 0..self.bits[len as usize - 1] {
                if code >= (1 << len) {
                    return None;
                }
                out.push((self.values[k], code as u16, len));
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        Some(out)
    }
}

/// Symbol → (code, length) lookup used when writing.
#[derive(Debug, Clone)]
pub struct EncodeTable {
    codes: [(u16, u8); 256],
}

impl EncodeTable {
    pub fn new(spec: &HuffmanSpec) -> Option<Self> {
        let mut codes = [(0u16, 0u8); 256];
        for (sym, code, len) in spec.canonical_codes()? {
            codes[sym as usize] = (code, len);
        }
        Some(Self { codes })
    }

    /// `(code, length)`; length 0 means the symbol has no code.
    pub fn get(&self, symbol: u8) -> (u16, u8) {
        self.codes[symbol as usize]
    }
}

pub const LOOKUP_BITS: u32 = 9;

/// Decoding tables: a direct lookup for short codes plus the classic
/// per-length `maxcode`/`valptr` arrays for the rest.
#[derive(Debug, Clone)]
pub struct DecodeTable {
    /// Indexed by the next `LOOKUP_BITS` bits: `(length, symbol)`, length 0 if
    /// the code is longer.
    lookup: Vec<(u8, u8)>,
    maxcode: [i32; 17],
    valptr: [i32; 17],
    mincode: [i32; 17],
    values: Vec<u8>,
}

impl DecodeTable {
    pub fn new(spec: &HuffmanSpec) -> Option<Self> {
        let codes = spec.canonical_codes()?;
        let mut lookup = vec![(0u8, 0u8); 1 << LOOKUP_BITS];
        let mut maxcode = [-1i32; 17];
        let mut valptr = [0i32; 17];
        let mut mincode = [0i32; 17];
        let mut k = 0usize;
        for len in 1..=16usize {
            let n = spec.bits[len - 1] as usize;
            if n > 0 {
                valptr[len] = k as i32;
                mincode[len] = codes[k].1 as i32;
                maxcode[len] = codes[k + n - 1].1 as i32;
            }
            k += n;
        }
        for &(sym, code, len) in &codes {
            if u32::from(len) <= LOOKUP_BITS {
                let shift = LOOKUP_BITS - u32::from(len);
                let base = (code as usize) << shift;
                for slot in &mut lookup[base..base + (1 << shift)] {
                    *slot = (len, sym);
                }
            }
        }
        Some(Self {
            lookup,
            maxcode,
            valptr,
            mincode,
            values: spec.values.clone(),
        })
    }

    /// Resolves a symbol from the next 16 bits (MSB first). Returns the symbol
    /// and the number of bits it occupies.
    pub fn decode(&self, peek16: u32) -> Option<(u8, u8)> {
        let (len, sym) = self.lookup[(peek16 >> (16 - LOOKUP_BITS)) as usize];
        if len != 0 {
            return Some((sym, len));
        }
        for len in (LOOKUP_BITS as usize + 1)..=16 {
            let code = (peek16 >> (16 - len)) as i32;
            if code <= self.maxcode[len] {
                let idx = self.valptr[len] + code - self.mincode[len];
                return self.values.get(idx as usize).map(|&s| (s, len as u8));
            }
        }
        None
    }
}

/// Magnitude category: number of bits needed to represent `|v|`.
pub fn category(v: i32) -> u8 {
    (32 - v.unsigned_abs().leading_zeros()) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zigzag_matches_diagonal_walk() {
        let mut order: Vec<usize> = Vec::new();
        for s in 0..15usize {
            let cells: Vec<usize> = (0..8)
                .filter_map(|r| s.checked_sub(r).filter(|&c| c < 8).map(|c| r * 8 + c))
                .collect();
            // even anti-diagonals run bottom-left to top-right
            if s % 2 == 0 {
                order.extend(cells.iter().rev());
            } else {
                order.extend(cells.iter());
            }
        }
        assert_eq!(order, ZIGZAG.to_vec());
    }

    #[test]
    fn std_tables_decode_every_symbol() {
        for spec in [HuffmanSpec::std_dc_luma(), HuffmanSpec::std_ac_luma()] {
            let enc = EncodeTable::new(&spec).unwrap();
            let dec = DecodeTable::new(&spec).unwrap();
            for &sym in &spec.values {
                let (code, len) = enc.get(sym);
                assert!(len > 0);
                let peek = u32::from(code) << (16 - len);
                assert_eq!(dec.decode(peek), Some((sym, len)));
            }
        }
    }

    #[test]
    fn overfull_spec_is_rejected() {
        let mut bits = [0u8; 16];
        bits[0] = 3;
        let spec = HuffmanSpec {
            bits,
            values: vec![0, 1, 2],
        };
        assert!(DecodeTable::new(&spec).is_none());
    }

    #[test]
    fn categories() {
        assert_eq!(category(0), 0);
        assert_eq!(category(1), 1);
        assert_eq!(category(-1), 1);
        assert_eq!(category(-2), 2);
        assert_eq!(category(1023), 10);
        assert_eq!(category(2047), 11);
    }
}
