use serde::Serialize;

use super::awgn::{awgn, ChannelConfig};
use super::code::LdpcCode;
use super::decoder::Decoder;
use super::modulation::{demodulate_llr, Modulation};
use crate::Scalar;

/// Outcome of sending one bit string over code, mapper and channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkReport {
    /// Decoded info bits, padding removed.
    #[serde(skip)]
    pub bits: Vec<u8>,
    pub blocks: usize,
    pub failed_blocks: usize,
    pub padding: usize,
    /// Info bit errors against the input.
    pub bit_errors: usize,
    pub symbols: usize,
    pub iterations: u64,
}

impl LinkReport {
    pub fn success(&self) -> bool {
        self.failed_blocks == 0
    }
}

/// Encodes, maps, adds noise, demaps and decodes. LLR arithmetic runs in `T`.
pub fn send_bits<T: Scalar>(
    info: &[u8],
    code: &LdpcCode,
    scheme: Modulation,
    channel: &ChannelConfig,
) -> LinkReport {
    let (coded, padding) = code.encode(info);
    let tx = super::modulation::modulate(&coded, scheme);
    let rx = awgn(&tx, channel);
    let llr = demodulate_llr::<T>(&rx, channel.noise_var());
    let decoder = Decoder::new(code);
    let n = code.n();
    let mut bits = Vec::with_capacity(coded.len() / n * code.k());
    let mut failed = 0;
    let mut iterations = 0u64;
    for block in llr.chunks_exact(n) {
        let out = decoder.decode(block);
        failed += !out.converged as usize;
        iterations += out.iterations as u64;
        bits.extend(code.extract_info(&out.codeword));
    }
    bits.truncate(info.len());
    let bit_errors = bits.iter().zip(info).filter(|(a, b)| a != b).count();
    LinkReport {
        bits,
        blocks: coded.len() / n,
        failed_blocks: failed,
        padding,
        bit_errors,
        symbols: tx.len(),
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::code::{cached_code, LdpcConfig};

    #[test]
    fn noiseless_link_is_identity() {
        let code = cached_code(&LdpcConfig::rate_1_3()).unwrap();
        let info: Vec<u8> = (0..2000).map(|i| (i * 7 % 3 == 0) as u8).collect();
        let r = send_bits::<f32>(&info, &code, Modulation::Qam4, &ChannelConfig::noiseless());
        assert_eq!(r.bits, info);
        assert_eq!((r.blocks, r.padding, r.failed_blocks), (2, 1072, 0));
        assert_eq!(r.symbols, 2 * 4608 / 2);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn low_rate_at_zero_db() {
        let code = cached_code(&LdpcConfig::rate_1_3()).unwrap();
        let info = vec![1u8; 1536];
        for seed in 0..5 {
            let r = send_bits::<f32>(
                &info,
                &code,
                Modulation::Qam4,
                &ChannelConfig::new(0.0, seed),
            );
            assert!(r.success());
            assert_eq!(r.bit_errors, 0);
        }
    }
}
