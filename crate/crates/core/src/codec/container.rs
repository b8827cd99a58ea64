use super::{Bitstream, CodecError, StreamHeader, HEADER_BITS};

/// Concatenates streams, each padded with zeros to a byte boundary.
pub fn write_container(streams: &[Bitstream]) -> Vec<u8> {
    let mut out = Vec::new();
    for s in streams {
        out.extend_from_slice(s.as_bytes());
    }
    out
}

/// Splits a container back into streams using each header's length field.
pub fn read_container(bytes: &[u8]) -> Result<Vec<Bitstream>, CodecError> {
    let mut streams = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let rest = &bytes[offset..];
        if rest.len() * 8 < HEADER_BITS {
            return Err(CodecError::Truncated {
                at_bit: offset * 8 + rest.len() * 8,
            });
        }
        let header = StreamHeader::read(&mut super::BitReader::new(rest, HEADER_BITS))?;
        let len = header.stream_bits();
        let byte_len = len.div_ceil(8);
        if rest.len() < byte_len {
            return Err(CodecError::Truncated {
                at_bit: (offset + rest.len()) * 8,
            });
        }
        streams.push(Bitstream::from_parts(rest[..byte_len].to_vec(), len));
        offset += byte_len;
    }
    Ok(streams)
}
