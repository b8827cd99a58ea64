//! MSB-first bit packing and Exp-Golomb codes.

use super::CodecError;

/// Number of bits needed to represent every value in `0..=max`.
pub fn bits_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}

#[derive(Clone, Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bits written so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn put_bit(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn put(&mut self, value: u64, width: u32) {
        debug_assert!(
            width == 64 || value >> width == 0,
            "{value} does not fit {width} bits"
        );
        for i in (0..width).rev() {
            self.put_bit((value >> i) & 1 == 1);
        }
    }

    /// Unsigned Exp-Golomb: `M` zeros then `v + 1` in `M + 1` bits.
    pub fn put_ue(&mut self, v: u64) {
        let v1 = v as u128 + 1;
        let m = 127 - v1.leading_zeros();
        for _ in 0..m {
            self.put_bit(false);
        }
        for i in (0..=m).rev() {
            self.put_bit((v1 >> i) & 1 == 1);
        }
    }

    /// Signed Exp-Golomb via the zig-zag map `k > 0 -> 2k - 1`, `k <= 0 -> -2k`.
    pub fn put_se(&mut self, k: i64) {
        self.put_ue(zigzag(k));
    }

    pub fn finish(self) -> (Vec<u8>, usize) {
        (self.bytes, self.len)
    }
}

pub fn zigzag(k: i64) -> u64 {
    if k > 0 {
        (k as u64) * 2 - 1
    } else {
        k.unsigned_abs() * 2
    }
}

pub fn unzigzag(v: u64) -> i64 {
    if v % 2 == 1 {
        (v / 2 + 1) as i64
    } else {
        -((v / 2) as i64)
    }
}

/// Length in bits of the unsigned Exp-Golomb codeword for `v`.
pub fn ue_len(v: u64) -> u32 {
    2 * (127 - (v as u128 + 1).leading_zeros()) + 1
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    limit: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    /// Reader over the first `limit` bits of `bytes`.
    pub fn new(bytes: &'a [u8], limit: usize) -> Self {
        BitReader {
            bytes,
            limit: limit.min(bytes.len() * 8),
            pos: 0,
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.pos
    }

    #[inline]
    pub fn bit(&mut self) -> Result<bool, CodecError> {
        if self.pos >= self.limit {
            return Err(CodecError::Truncated { at_bit: self.pos });
        }
        let b = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(b)
    }

    pub fn get(&mut self, width: u32) -> Result<u64, CodecError> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.bit()? as u64;
        }
        Ok(v)
    }

    pub fn get_ue(&mut self) -> Result<u64, CodecError> {
        let start = self.pos;
        let mut zeros = 0u32;
        while !self.bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(CodecError::Invalid(format!(
                    "Exp-Golomb prefix too long at bit {start}"
                )));
            }
        }
        let rest = self.get(zeros)?;
        Ok(((1u64 << zeros) | rest) - 1)
    }

    pub fn get_se(&mut self) -> Result<i64, CodecError> {
        Ok(unzigzag(self.get_ue()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exp_golomb_codewords() {
        // 0 -> 1, 1 -> 010, 2 -> 011, 3 -> 00100
        let mut w = BitWriter::new();
        for v in 0..4 {
            w.put_ue(v);
        }
        let (bytes, len) = w.finish();
        assert_eq!(len, 1 + 3 + 3 + 5);
        assert_eq!(bytes, vec![0b1010_0110, 0b0100_0000]);
        assert_eq!(ue_len(0), 1);
        assert_eq!(ue_len(6), 5);
        assert_eq!(ue_len(7), 7);
    }

    #[test]
    fn zigzag_order() {
        let got: Vec<u64> = [0, 1, -1, 2, -2].iter().map(|&k| zigzag(k)).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
        assert_eq!(zigzag(i64::MIN + 1), u64::MAX - 1);
    }

    #[test]
    fn widths() {
        assert_eq!(bits_for(0), 0);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(4), 3);
        assert_eq!(bits_for(512), 10);
        assert_eq!(bits_for(65535), 16);
    }

    #[test]
    fn reader_stops_at_limit() {
        let mut r = BitReader::new(&[0xff], 3);
        assert_eq!(r.get(3).unwrap(), 7);
        assert!(matches!(r.bit(), Err(CodecError::Truncated { at_bit: 3 })));
    }

    proptest! {
        #[test]
        fn mixed_fields_round_trip(fields in proptest::collection::vec((any::<u32>(), 0u32..=32, any::<i32>()), 0..40)) {
            let mut w = BitWriter::new();
            for &(v, width, s) in &fields {
                let v = if width == 32 { v as u64 } else { v as u64 & ((1u64 << width) - 1) };
                w.put(v, width);
                w.put_ue(v);
                w.put_se(s as i64);
            }
            let (bytes, len) = w.finish();
            let mut r = BitReader::new(&bytes, len);
            for &(v, width, s) in &fields {
                let v = if width == 32 { v as u64 } else { v as u64 & ((1u64 << width) - 1) };
                prop_assert_eq!(r.get(width).unwrap(), v);
                prop_assert_eq!(r.get_ue().unwrap(), v);
                prop_assert_eq!(r.get_se().unwrap(), s as i64);
            }
            prop_assert_eq!(r.remaining(), 0);
        }
    }
}
