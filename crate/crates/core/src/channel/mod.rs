//! LDPC coding, constellation mapping and the AWGN channel.

mod awgn;
mod code;
mod decoder;
mod link;
mod modulation;

use thiserror::Error;

pub use awgn::{awgn, write_trace, ChannelConfig};
pub use code::{
    cached_code, DecoderKind, LdpcCode, LdpcConfig, MatrixSource, ParityCheck, PEG_COLUMN_DEGREE,
    PEG_SEED,
};
pub use decoder::{DecodeOutcome, Decoder, LLR_CLAMP};
pub use link::{send_bits, LinkReport};
pub use modulation::{
    demodulate_llr, hard_decide, modulate, Modulation, SymbolBlock, NOISELESS_LLR,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("channel configuration: {0}")]
    Config(String),
    #[error("parity-check matrix: {0}")]
    Matrix(String),
}

/// SplitMix64 step; derives independent per-trial seeds from one base seed.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_eq!(trial_seed(7, 3), trial_seed(7, 3));
        assert_ne!(trial_seed(7, 3), trial_seed(8, 3));
    }
}
