use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::raster::RasterFrame;

/// Environment variable naming the external image codec command.
pub const CODEC_ENV: &str = "OARVC_IMAGE_CODEC";

/// Reference-frame image codec.
///
/// External codecs are shell commands called as
/// `<command> encode <in.ppm> <out> <quality>` and
/// `<command> decode <in> <out.ppm> <quality>`; the size of the encoded file
/// is what gets charged to the channel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ImageCodec {
    /// Interleaved RGB bytes, dimensions known out of band.
    Raw,
    /// Binary PPM, self-describing.
    Ppm,
    External {
        command: String,
        quality: u32,
    },
}

impl ImageCodec {
    /// `raw`, `ppm`, or `external` (command taken from the environment).
    pub fn resolve(id: &str, quality: u32) -> Result<ImageCodec, PipelineError> {
        match id.trim().to_ascii_lowercase().as_str() {
            "raw" => Ok(ImageCodec::Raw),
            "ppm" => Ok(ImageCodec::Ppm),
            "external" => match std::env::var(CODEC_ENV) {
                Ok(command) if !command.trim().is_empty() => {
                    Ok(ImageCodec::External { command, quality })
                }
                _ => Err(PipelineError::Config(format!(
                    "external image codec requested but {CODEC_ENV} is not set"
                ))),
            },
            other => Err(PipelineError::Config(format!(
                "unknown image codec {other:?} (expected raw, ppm or external)"
            ))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            ImageCodec::Raw => "raw",
            ImageCodec::Ppm => "ppm",
            ImageCodec::External { .. } => "external",
        }
    }

    pub fn encode(&self, frame: &RasterFrame) -> Result<Vec<u8>, PipelineError> {
        match self {
            ImageCodec::Raw => Ok(frame.as_raw().to_vec()),
            ImageCodec::Ppm => Ok(frame.to_ppm_bytes()),
            ImageCodec::External { command, quality } => {
                let scratch = Scratch::new()?;
                let input = scratch.path("in.ppm");
                let output = scratch.path("out.bin");
                frame.save_ppm(&input)?;
                run(command, "encode", &input, &output, *quality)?;
                Ok(std::fs::read(&output).map_err(|e| external(command, e))?)
            }
        }
    }

    pub fn decode(
        &self,
        bytes: &[u8],
        width: u32,
        height: u32,
    ) -> Result<RasterFrame, PipelineError> {
        let frame = match self {
            ImageCodec::Raw => RasterFrame::from_raw(width, height, bytes.to_vec())?,
            ImageCodec::Ppm => RasterFrame::read_ppm(bytes)?,
            ImageCodec::External { command, quality } => {
                let scratch = Scratch::new()?;
                let input = scratch.path("in.bin");
                let output = scratch.path("out.ppm");
                std::fs::write(&input, bytes).map_err(|e| external(command, e))?;
                run(command, "decode", &input, &output, *quality)?;
                RasterFrame::load_ppm(&output)?
            }
        };
        if (frame.width(), frame.height()) != (width, height) {
            return Err(PipelineError::Shape(format!(
                "decoded {}x{}, expected {width}x{height}",
                frame.width(),
                frame.height()
            )));
        }
        Ok(frame)
    }
}

fn external(command: &str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::ExternalCodec(format!("{command}: {e}"))
}

fn run(
    command: &str,
    verb: &str,
    input: &PathBuf,
    output: &PathBuf,
    quality: u32,
) -> Result<(), PipelineError> {
    let status = Command::new("sh")
        .arg("-c")
        .arg(format!("{command} \"$@\""))
        .arg("sh")
        .arg(verb)
        .arg(input)
        .arg(output)
        .arg(quality.to_string())
        .status()
        .map_err(|e| external(command, e))?;
    if !status.success() {
        return Err(external(command, format!("{verb} exited with {status}")));
    }
    Ok(())
}

/// Private scratch directory removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new() -> Result<Scratch, PipelineError> {
        static COUNTER: AtomicU64 = AtomicU64::new(0);
        let dir = std::env::temp_dir().join(format!(
            "oarvc-codec-{}-{}",
            std::process::id(),
            COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        std::fs::create_dir_all(&dir).map_err(|e| PipelineError::ExternalCodec(e.to_string()))?;
        Ok(Scratch(dir))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RasterFrame {
        let mut f = RasterFrame::new(5, 3);
        f.put(4, 2, [1, 2, 3]);
        f
    }

    #[test]
    fn builtin_round_trips() {
        for codec in [ImageCodec::Raw, ImageCodec::Ppm] {
            let bytes = codec.encode(&sample()).unwrap();
            assert_eq!(codec.decode(&bytes, 5, 3).unwrap(), sample());
        }
        assert_eq!(ImageCodec::Raw.encode(&sample()).unwrap().len(), 45);
        assert!(ImageCodec::Raw.decode(&[0; 44], 5, 3).is_err());
    }

    #[test]
    fn external_copy_codec() {
        let codec = ImageCodec::External {
            command: "f() { cp \"$2\" \"$3\"; }; f".into(),
            quality: 30,
        };
        let bytes = codec.encode(&sample()).unwrap();
        assert_eq!(bytes, sample().to_ppm_bytes());
        assert_eq!(codec.decode(&bytes, 5, 3).unwrap(), sample());
    }

    #[test]
    fn failing_external_codec() {
        let codec = ImageCodec::External {
            command: "false".into(),
            quality: 1,
        };
        assert!(matches!(
            codec.encode(&sample()),
            Err(PipelineError::ExternalCodec(_))
        ));
    }

    #[test]
    fn unknown_codec_id() {
        assert!(ImageCodec::resolve("bpg", 1).is_err());
        assert_eq!(ImageCodec::resolve("RAW", 1).unwrap(), ImageCodec::Raw);
    }
}
