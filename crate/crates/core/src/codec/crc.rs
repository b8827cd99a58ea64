//! CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no xorout)
//! over an arbitrary number of bits.

const POLY: u16 = 0x1021;

pub fn crc16_bits(bytes: &[u8], bit_len: usize) -> u16 {
    let mut crc: u16 = 0xffff;
    for i in 0..bit_len {
        let bit = bytes[i / 8] & (0x80 >> (i % 8)) != 0;
        let top = crc & 0x8000 != 0;
        crc <<= 1;
        if top ^ bit {
            crc ^= POLY;
        }
    }
    crc
}
