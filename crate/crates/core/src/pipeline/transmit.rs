use serde::{Deserialize, Serialize};

use super::cbr::{channel_symbols, CbrMode};
use super::image::ImageCodec;
use super::PipelineError;
use crate::channel::{cached_code, send_bits, ChannelConfig, LdpcConfig, LinkReport, Modulation};
use crate::codec::{decode_gop, Bitstream, QuantParams};
use crate::oar::GopStream;
use crate::raster::RasterFrame;
use crate::Scalar;

/// Code and constellation for one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub ldpc: LdpcConfig,
    pub modulation: Modulation,
}

impl PathPlan {
    pub fn new(ldpc: LdpcConfig, modulation: Modulation) -> PathPlan {
        PathPlan { ldpc, modulation }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePlan {
    pub codec: ImageCodec,
    pub path: PathPlan,
}

/// Everything but the channel realisation, so one plan serves every trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPlan {
    pub oar: PathPlan,
    pub reference: ReferencePlan,
    pub cbr_mode: CbrMode,
    /// Angle quantisation bits of the OAR stream.
    pub q_angle: u8,
    pub fps: f64,
}

impl Default for TransmissionPlan {
    fn default() -> Self {
        TransmissionPlan {
            oar: PathPlan::new(LdpcConfig::rate_1_3(), Modulation::Qam4),
            reference: ReferencePlan {
                codec: ImageCodec::Raw,
                path: PathPlan::new(LdpcConfig::rate_2_3(), Modulation::Qam16),
            },
            cbr_mode: CbrMode::Ideal,
            q_angle: 8,
            fps: 25.0,
        }
    }
}

impl TransmissionPlan {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.oar.ldpc.validate()?;
        self.reference.path.ldpc.validate()?;
        QuantParams::new(self.q_angle)?;
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(PipelineError::Config(format!(
                "frame rate must be positive, got {}",
                self.fps
            )));
        }
        Ok(())
    }

    pub fn quant(&self) -> Result<QuantParams, PipelineError> {
        Ok(QuantParams::new(self.q_angle)?)
    }
}

/// Link statistics and channel accounting for one path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathOutcome {
    pub info_bits: usize,
    /// Symbols charged under the plan's CBR mode.
    pub symbols: u64,
    /// Symbols physically modulated.
    pub transmitted_symbols: usize,
    pub link: LinkReport,
}

#[derive(Clone, Debug)]
pub struct OarOutcome {
    /// `None` when a block failed or the stream did not parse.
    pub stream: Option<Bitstream>,
    pub gop: Option<GopStream>,
    pub path: PathOutcome,
}

impl OarOutcome {
    pub fn success(&self) -> bool {
        self.gop.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct ReferenceOutcome {
    pub frame: Option<RasterFrame>,
    pub path: PathOutcome,
}

impl ReferenceOutcome {
    pub fn success(&self) -> bool {
        self.frame.is_some()
    }
}

fn send<T: Scalar>(
    bits: &[u8],
    plan: &PathPlan,
    mode: CbrMode,
    channel: &ChannelConfig,
) -> Result<PathOutcome, PipelineError> {
    let code = cached_code(&plan.ldpc)?;
    let link = send_bits::<T>(bits, &code, plan.modulation, channel);
    Ok(PathOutcome {
        info_bits: bits.len(),
        symbols: channel_symbols(bits.len() as u64, &plan.ldpc, plan.modulation, mode),
        transmitted_symbols: link.symbols,
        link,
    })
}

/// Sends an OAR stream. Any unconverged block or a stream that fails its
/// checksum or parse is reported as a failure, never as a partial result.
pub fn transmit_oar<T: Scalar>(
    bits: &Bitstream,
    plan: &TransmissionPlan,
    channel: &ChannelConfig,
) -> Result<OarOutcome, PipelineError> {
    plan.validate()?;
    let path = send::<T>(&bits.to_bits(), &plan.oar, plan.cbr_mode, channel)?;
    if !path.link.success() {
        return Ok(OarOutcome {
            stream: None,
            gop: None,
            path,
        });
    }
    let stream = Bitstream::from_bits(&path.link.bits);
    match decode_gop(&stream) {
        Ok(gop) => Ok(OarOutcome {
            stream: Some(stream),
            gop: Some(gop),
            path,
        }),
        Err(_) => Ok(OarOutcome {
            stream: None,
            gop: None,
            path,
        }),
    }
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect()
}

/// Sends the reference frame through the image codec and the reference path.
/// One failed block loses the whole frame.
pub fn transmit_reference<T: Scalar>(
    frame: &RasterFrame,
    plan: &TransmissionPlan,
    channel: &ChannelConfig,
) -> Result<ReferenceOutcome, PipelineError> {
    plan.validate()?;
    let codec = &plan.reference.codec;
    let bytes = codec.encode(frame)?;
    let path = send::<T>(
        &bytes_to_bits(&bytes),
        &plan.reference.path,
        plan.cbr_mode,
        channel,
    )?;
    if !path.link.success() {
        return Ok(ReferenceOutcome { frame: None, path });
    }
    let received = bits_to_bytes(&path.link.bits);
    // undetected errors can leave an undecodable image: that too is a loss
    let frame = codec.decode(&received, frame.width(), frame.height()).ok();
    Ok(ReferenceOutcome { frame, path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode_gop;
    use crate::ingest::{generate_synthetic, SyntheticSceneSpec};

    fn scene() -> (Bitstream, RasterFrame) {
        let s = generate_synthetic(&SyntheticSceneSpec::traffic(3, 4, 64, 48, 15)).unwrap();
        (
            encode_gop(&s.gop, QuantParams::default()).unwrap(),
            s.frames[0].clone(),
        )
    }

    #[test]
    fn noiseless_oar_identical() {
        let (bits, _) = scene();
        let out = transmit_oar::<f64>(
            &bits,
            &TransmissionPlan::default(),
            &ChannelConfig::noiseless(),
        )
        .unwrap();
        assert_eq!(out.stream.as_ref(), Some(&bits));
        assert_eq!(out.path.link.iterations, 0);
        assert_eq!(out.path.info_bits, bits.bit_len());
    }

    #[test]
    fn noiseless_reference_identical() {
        let (_, frame) = scene();
        let mut plan = TransmissionPlan::default();
        for codec in [ImageCodec::Raw, ImageCodec::Ppm] {
            plan.reference.codec = codec;
            let out =
                transmit_reference::<f32>(&frame, &plan, &ChannelConfig::noiseless()).unwrap();
            assert_eq!(out.frame.as_ref(), Some(&frame));
        }
    }

    #[test]
    fn dense_constellation_fails_at_zero_db() {
        let (bits, frame) = scene();
        let mut plan = TransmissionPlan {
            oar: PathPlan::new(LdpcConfig::rate_2_3(), Modulation::Qam64),
            ..TransmissionPlan::default()
        };
        plan.reference.path = PathPlan::new(LdpcConfig::rate_2_3(), Modulation::Qam64);
        let ch = ChannelConfig::new(0.0, 11);
        assert!(!transmit_oar::<f32>(&bits, &plan, &ch).unwrap().success());
        assert!(!transmit_reference::<f32>(&frame, &plan, &ch)
            .unwrap()
            .success());
    }

    #[test]
    fn invalid_plan() {
        let (bits, _) = scene();
        let plan = TransmissionPlan {
            q_angle: 0,
            ..TransmissionPlan::default()
        };
        assert!(transmit_oar::<f64>(&bits, &plan, &ChannelConfig::noiseless()).is_err());
    }

    #[test]
    fn bit_packing() {
        let bytes = vec![0xa5, 0x01, 0xff];
        assert_eq!(bits_to_bytes(&bytes_to_bits(&bytes)), bytes);
        assert_eq!(bytes_to_bits(&[0x80])[0], 1);
    }
}
