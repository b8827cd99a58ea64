//! Predictive OAR source codec.
//!
//! Stream layout, MSB first, no byte alignment inside the stream:
//!
//! ```text
//! header   "OARS" u32 | version u8 | width u16 | height u16 | T u16
//!          | q_angle u8 | category count u8 | relation label count u8
//!          | payload bit length u32
//! payload  T frame records (frame 1 intra, frames 2..T inter)
//! trailer  CRC-16/CCITT-FALSE over header and payload
//! ```
//!
//! Intra records code every object in full: ID as a signed Exp-Golomb delta
//! to the previous ID, category (3 bits), `x`, `w` in `ceil(log2(W + 1))`
//! bits, `y`, `h` in `ceil(log2(H + 1))` bits, angle bin in `q` bits. Inter
//! records list dead objects by index into the previous frame, then code each
//! current object either as a persisting reference (survivor index plus
//! signed Exp-Golomb deltas of `x, y, w, h` and the circular angle-bin delta)
//! or as a birth in full. Relations are coded as a complete set per frame.

mod account;
mod bits;
mod container;
mod crc;
mod gop;
mod quant;

use thiserror::Error;

pub use account::{bit_account, kbps, BitAccount};
pub use bits::{bits_for, ue_len, BitReader, BitWriter};
pub use container::{read_container, write_container};
pub use crc::crc16_bits;
pub use gop::{decode_gop, encode_gop, parse_stream, ParsedStream};
pub use quant::{angle_bin, bin_angle, quantize_frame, quantize_gop, QuantParams};

use crate::oar::{FrameViolation, GopViolation};

pub const MAGIC: [u8; 4] = *b"OARS";
pub const VERSION: u8 = 1;
/// Fixed header size in bits.
pub const HEADER_BITS: usize = 32 + 8 + 16 + 16 + 16 + 8 + 8 + 8 + 32;
pub const CRC_BITS: usize = 16;
/// Objects allowed in one frame.
pub const MAX_OBJECTS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("stream truncated at bit {at_bit}")]
    Truncated { at_bit: usize },
    #[error("bad magic, not an OAR stream")]
    BadMagic,
    #[error("unsupported stream version {0}")]
    UnsupportedVersion(u8),
    #[error("crc mismatch: stream says {stored:#06x}, payload gives {computed:#06x}")]
    CrcMismatch { stored: u16, computed: u16 },
    #[error("invalid stream: {0}")]
    Invalid(String),
    #[error("frame {frame} holds {count} objects, more than {MAX_OBJECTS}")]
    Capacity { frame: u32, count: usize },
    #[error("frame rate must be positive, got {0}")]
    FrameRate(f64),
    #[error("q_angle must be in 1..=16, got {0}")]
    QuantBits(u8),
    #[error(transparent)]
    InvalidGop(#[from] GopViolation),
    #[error("decoded frame {frame} is inconsistent: {source}")]
    InvalidFrame {
        frame: u32,
        #[source]
        source: FrameViolation,
    },
}

/// Bit-packed OAR stream.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bitstream {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl std::fmt::Debug for Bitstream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bitstream({} bits)", self.bit_len)
    }
}

impl Bitstream {
    /// Wraps the first `bit_len` bits of `bytes`; any later bits are dropped.
    pub fn from_parts(mut bytes: Vec<u8>, bit_len: usize) -> Bitstream {
        let bit_len = bit_len.min(bytes.len() * 8);
        bytes.truncate(bit_len.div_ceil(8));
        if !bit_len.is_multiple_of(8) {
            let last = bytes.len() - 1;
            bytes[last] &= 0xffu8 << (8 - bit_len % 8);
        }
        Bitstream { bytes, bit_len }
    }

    /// Packs a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Bitstream {
        let mut w = BitWriter::new();
        for &b in bits {
            w.put_bit(b != 0);
        }
        let (bytes, len) = w.finish();
        Bitstream {
            bytes,
            bit_len: len,
        }
    }

    /// Unpacks into one 0/1 value per bit.
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.bit_len)
            .map(|i| (self.bytes[i / 8] >> (7 - i % 8)) & 1)
            .collect()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    /// Bytes, zero-padded after the last bit.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader::new(&self.bytes, self.bit_len)
    }

    /// Flips bit `i` in place.
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.bit_len, "bit {i} out of range");
        self.bytes[i / 8] ^= 0x80 >> (i % 8);
    }
}

/// Fixed-size stream header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub version: u8,
    pub width: u32,
    pub height: u32,
    pub gop_length: u32,
    pub q_angle: u8,
    pub category_count: u8,
    pub relation_count: u8,
    pub payload_bits: usize,
}

impl StreamHeader {
    pub fn write(&self, w: &mut BitWriter) {
        for b in MAGIC {
            w.put(b as u64, 8);
        }
        w.put(self.version as u64, 8);
        w.put(self.width as u64, 16);
        w.put(self.height as u64, 16);
        w.put(self.gop_length as u64, 16);
        w.put(self.q_angle as u64, 8);
        w.put(self.category_count as u64, 8);
        w.put(self.relation_count as u64, 8);
        w.put(self.payload_bits as u64, 32);
    }

    pub fn read(r: &mut BitReader<'_>) -> Result<StreamHeader, CodecError> {
        let mut magic = [0u8; 4];
        for m in &mut magic {
            *m = r.get(8)? as u8;
        }
        if magic != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = r.get(8)? as u8;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        Ok(StreamHeader {
            version,
            width: r.get(16)? as u32,
            height: r.get(16)? as u32,
            gop_length: r.get(16)? as u32,
            q_angle: r.get(8)? as u8,
            category_count: r.get(8)? as u8,
            relation_count: r.get(8)? as u8,
            payload_bits: r.get(32)? as usize,
        })
    }

    /// Full stream length in bits, CRC included.
    pub fn stream_bits(&self) -> usize {
        HEADER_BITS + self.payload_bits + CRC_BITS
    }
}
