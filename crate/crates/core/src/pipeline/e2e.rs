use rayon::prelude::*;
use serde::Serialize;

use super::cbr::cbr;
use super::transmit::{transmit_oar, transmit_reference, TransmissionPlan};
use super::PipelineError;
use crate::channel::{trial_seed, ChannelConfig, LinkReport};
use crate::codec::encode_gop;
use crate::oar::GopStream;
use crate::raster::RasterFrame;
use crate::reconstruct::reconstruct_gop;
use crate::Scalar;

/// One group of pictures at the sender.
#[derive(Clone, Debug)]
pub struct GopInput {
    pub gop: GopStream,
    /// First frame of the group, sent as pixels.
    pub reference: RasterFrame,
}

/// Per-GoP outcome of both paths. `None` marks a lost stream.
#[derive(Clone, Debug, Serialize)]
pub struct TransmissionResult {
    pub gop_index: usize,
    pub oar_seed: u64,
    pub reference_seed: u64,
    #[serde(skip)]
    pub gop: Option<GopStream>,
    #[serde(skip)]
    pub reference: Option<RasterFrame>,
    pub oar_bits: usize,
    pub reference_bits: usize,
    pub oar_symbols: u64,
    pub reference_symbols: u64,
    pub oar_cbr: f64,
    pub reference_cbr: f64,
    pub total_cbr: f64,
    pub oar_link: LinkReport,
    pub reference_link: LinkReport,
}

impl TransmissionResult {
    pub fn oar_ok(&self) -> bool {
        self.gop.is_some()
    }

    pub fn reference_ok(&self) -> bool {
        self.reference.is_some()
    }

    /// Failed codewords over all codewords, both paths.
    pub fn fer(&self) -> f64 {
        let blocks = self.oar_link.blocks + self.reference_link.blocks;
        (self.oar_link.failed_blocks + self.reference_link.failed_blocks) as f64
            / blocks.max(1) as f64
    }

    pub fn ber(&self) -> f64 {
        let bits = self.oar_bits + self.reference_bits;
        (self.oar_link.bit_errors + self.reference_link.bit_errors) as f64 / bits.max(1) as f64
    }
}

#[derive(Clone, Debug)]
pub struct EndToEnd {
    pub result: TransmissionResult,
    /// Reconstructed frames; `None` unless both paths arrived.
    pub frames: Option<Vec<RasterFrame>>,
}

/// Seeds of the OAR and reference channel realisations of GoP `index`.
pub fn gop_seeds(base: u64, index: usize) -> (u64, u64) {
    (
        trial_seed(base, 2 * index as u64),
        trial_seed(base, 2 * index as u64 + 1),
    )
}

/// Sends every GoP over its own noise realisation (derived from
/// `channel.seed`) and rebuilds the frames of those that arrive intact.
/// GoPs run in parallel; output order follows input order.
pub fn run_end_to_end<T: Scalar>(
    inputs: &[GopInput],
    plan: &TransmissionPlan,
    channel: &ChannelConfig,
) -> Result<Vec<EndToEnd>, PipelineError> {
    plan.validate()?;
    let q = plan.quant()?;
    inputs
        .par_iter()
        .enumerate()
        .map(|(index, input)| {
            let gop = &input.gop;
            let (oar_seed, reference_seed) = gop_seeds(channel.seed, index);
            let bits = encode_gop(gop, q)?;
            let oar = transmit_oar::<T>(&bits, plan, &channel.with_seed(oar_seed))?;
            let reference = transmit_reference::<T>(
                &input.reference,
                plan,
                &channel.with_seed(reference_seed),
            )?;
            let oar_cbr = cbr(oar.path.symbols, gop.width, gop.height, gop.gop_length)?;
            let reference_cbr = cbr(
                reference.path.symbols,
                gop.width,
                gop.height,
                gop.gop_length,
            )?;
            let frames = match (&oar.gop, &reference.frame) {
                (Some(g), Some(r)) => Some(reconstruct_gop(g, r)?),
                _ => None,
            };
            let result = TransmissionResult {
                gop_index: index,
                oar_seed,
                reference_seed,
                gop: oar.gop,
                reference: reference.frame,
                oar_bits: oar.path.info_bits,
                reference_bits: reference.path.info_bits,
                oar_symbols: oar.path.symbols,
                reference_symbols: reference.path.symbols,
                oar_cbr,
                reference_cbr,
                total_cbr: oar_cbr + reference_cbr,
                oar_link: oar.path.link,
                reference_link: reference.path.link,
            };
            Ok(EndToEnd { result, frames })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{LdpcConfig, Modulation};
    use crate::codec::{decode_gop, QuantParams};
    use crate::ingest::{generate_synthetic, SyntheticSceneSpec};
    use crate::pipeline::PathPlan;

    fn inputs(n: u64) -> Vec<GopInput> {
        (0..n)
            .map(|s| {
                let scene =
                    generate_synthetic(&SyntheticSceneSpec::traffic(s, 3, 32, 24, 6)).unwrap();
                GopInput {
                    gop: scene.gop,
                    reference: scene.frames[0].clone(),
                }
            })
            .collect()
    }

    #[test]
    fn noiseless_matches_offline() {
        let ins = inputs(2);
        let out = run_end_to_end::<f32>(
            &ins,
            &TransmissionPlan::default(),
            &ChannelConfig::noiseless(),
        )
        .unwrap();
        for (i, e) in ins.iter().zip(&out) {
            let offline = decode_gop(&encode_gop(&i.gop, QuantParams::default()).unwrap()).unwrap();
            assert_eq!(e.result.gop.as_ref(), Some(&offline));
            assert_eq!(
                e.frames.as_ref().unwrap(),
                &reconstruct_gop(&offline, &i.reference).unwrap()
            );
            assert_eq!(
                e.result.total_cbr,
                e.result.oar_cbr + e.result.reference_cbr
            );
            assert_eq!(e.result.fer(), 0.0);
        }
    }

    #[test]
    fn semantic_path_outlives_texture_path() {
        let ins = inputs(1);
        let mut plan = TransmissionPlan::default();
        plan.reference.path = PathPlan::new(LdpcConfig::rate_2_3(), Modulation::Qam64);
        let out = run_end_to_end::<f32>(&ins, &plan, &ChannelConfig::new(0.0, 5)).unwrap();
        assert!(out[0].result.oar_ok());
        assert!(!out[0].result.reference_ok());
        assert!(out[0].frames.is_none());
    }

    #[test]
    fn deterministic_given_seed() {
        let ins = inputs(3);
        let ch = ChannelConfig::new(2.0, 9);
        let a = run_end_to_end::<f32>(&ins, &TransmissionPlan::default(), &ch).unwrap();
        let b = run_end_to_end::<f32>(&ins, &TransmissionPlan::default(), &ch).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.result.oar_link, y.result.oar_link);
            assert_eq!(x.frames, y.frames);
        }
    }
}
