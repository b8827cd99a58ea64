//! 8-bit RGB frames and binary PPM (P6) I/O.

use std::io::{self, BufRead, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("not a binary PPM: {0}")]
    Format(String),
    #[error("frame shape mismatch: {0}x{1} vs {2}x{3}")]
    Shape(u32, u32, u32, u32),
}

/// `H × W × 3` image, row-major, interleaved RGB.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterFrame {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl std::fmt::Debug for RasterFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RasterFrame({}x{})", self.width, self.height)
    }
}

impl RasterFrame {
    pub fn new(width: u32, height: u32) -> RasterFrame {
        RasterFrame::filled(width, height, [0, 0, 0])
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> RasterFrame {
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            data.extend_from_slice(&rgb);
        }
        RasterFrame {
            width,
            height,
            data,
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Result<RasterFrame, RasterError> {
        if data.len() != width as usize * height as usize * 3 {
            return Err(RasterError::Format(format!(
                "expected {} bytes for {width}x{height}, got {}",
                width as usize * height as usize * 3,
                data.len()
            )));
        }
        Ok(RasterFrame {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn same_shape(&self, other: &RasterFrame) -> Result<(), RasterError> {
        if self.width != other.width || self.height != other.height {
            return Err(RasterError::Shape(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }

    #[inline]
    fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 3
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let o = self.offset(x, y);
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let o = self.offset(x, y);
        self.data[o..o + 3].copy_from_slice(&rgb);
    }

    /// Pixel with coordinates clamped to the frame.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> [u8; 3] {
        let x = x.clamp(0, self.width as i64 - 1) as u32;
        let y = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(x, y)
    }

    pub fn write_ppm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P6\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.data)
    }

    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.data.len() + 20);
        self.write_ppm(&mut v)
            .expect("writing to a Vec cannot fail");
        v
    }

    pub fn read_ppm<R: BufRead>(mut input: R) -> Result<RasterFrame, RasterError> {
        let mut fields = Vec::with_capacity(4);
        let mut token = Vec::new();
        let mut byte = [0u8; 1];
        while fields.len() < 4 {
            if input.read(&mut byte)? == 0 {
                return Err(RasterError::Format("truncated header".into()));
            }
            match byte[0] {
                b'#' if token.is_empty() => {
                    let mut skip = Vec::new();
                    input.read_until(b'\n', &mut skip)?;
                }
                c if c.is_ascii_whitespace() => {
                    if !token.is_empty() {
                        fields.push(String::from_utf8_lossy(&token).into_owned());
                        token.clear();
                    }
                }
                c => token.push(c),
            }
        }
        if fields[0] != "P6" {
            return Err(RasterError::Format(format!("magic {:?}", fields[0])));
        }
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| RasterError::Format(format!("bad header field {s:?}")))
        };
        let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval != 255 {
            return Err(RasterError::Format(format!("maxval {maxval} unsupported")));
        }
        let mut data = vec![0u8; width as usize * height as usize * 3];
        input.read_exact(&mut data)?;
        RasterFrame::from_raw(width, height, data)
    }

    pub fn load_ppm(path: &Path) -> Result<RasterFrame, RasterError> {
        let f = std::fs::File::open(path)?;
        RasterFrame::read_ppm(io::BufReader::new(f))
    }

    pub fn save_ppm(&self, path: &Path) -> Result<(), RasterError> {
        let f = std::fs::File::create(path)?;
        let mut w = io::BufWriter::new(f);
        self.write_ppm(&mut w)?;
        w.flush()?;
        Ok(())
    }
}
