//! Radar cube container and its on-disk formats.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! magic "ODSPCUBE" | version u16 | frames u32 | antennas u32
//! | range_bins u32 | chirps u32 | frame_rate_hz f64 | wavelength_m f64
//! | samples: frames × antennas × range_bins × chirps × (re f64, im f64)
//! ```
//!
//! CSV import for small fixtures: a header line
//! `frames,antennas,range_bins,chirps,frame_rate_hz,wavelength_m` followed
//! by one `t,a,r,c,re,im` line per sample (missing samples default to 0).

use std::io::{self, BufRead, Read, Write};

use num_complex::Complex64;

pub const CUBE_MAGIC: &[u8; 8] = b"ODSPCUBE";
pub const CUBE_VERSION: u16 = 1;

/// Complex radar samples indexed (frame, antenna, range bin, chirp).
#[derive(Clone, Debug, PartialEq)]
pub struct RadarCube {
    pub samples: Vec<Complex64>,
    pub frames: usize,
    pub antennas: usize,
    pub range_bins: usize,
    pub chirps: usize,
    pub frame_rate_hz: f64,
    pub wavelength_m: f64,
}

#[derive(Debug)]
pub enum CubeError {
    Io(io::Error),
    Format(String),
}

impl std::fmt::Display for CubeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CubeError::Io(e) => write!(f, "io error: {e}"),
            CubeError::Format(m) => write!(f, "malformed cube: {m}"),
        }
    }
}

impl std::error::Error for CubeError {}

impl From<io::Error> for CubeError {
    fn from(e: io::Error) -> Self {
        CubeError::Io(e)
    }
}

impl RadarCube {
    pub fn zeros(
        frames: usize,
        antennas: usize,
        range_bins: usize,
        chirps: usize,
        frame_rate_hz: f64,
        wavelength_m: f64,
    ) -> Self {
        RadarCube {
            samples: vec![Complex64::new(0.0, 0.0); frames * antennas * range_bins * chirps],
            frames,
            antennas,
            range_bins,
            chirps,
            frame_rate_hz,
            wavelength_m,
        }
    }

    #[inline]
    pub fn index(&self, t: usize, a: usize, r: usize, c: usize) -> usize {
        ((t * self.antennas + a) * self.range_bins + r) * self.chirps + c
    }

    #[inline]
    pub fn at(&self, t: usize, a: usize, r: usize, c: usize) -> Complex64 {
        self.samples[self.index(t, a, r, c)]
    }

    pub fn at_mut(&mut self, t: usize, a: usize, r: usize, c: usize) -> &mut Complex64 {
        let i = self.index(t, a, r, c);
        &mut self.samples[i]
    }

    pub fn validate(&self) -> Result<(), CubeError> {
        let expect = self.frames * self.antennas * self.range_bins * self.chirps;
        if self.samples.len() != expect {
            return Err(CubeError::Format(format!(
                "sample count {} does not match dims ({expect})",
                self.samples.len()
            )));
        }
        if self.frames == 0 || self.antennas == 0 || self.range_bins == 0 || self.chirps == 0 {
            return Err(CubeError::Format("all dimensions must be ≥ 1".into()));
        }
        if !self
            .samples
            .iter()
            .all(|s| s.re.is_finite() && s.im.is_finite())
        {
            return Err(CubeError::Format("non-finite sample".into()));
        }
        Ok(())
    }

    pub fn write_binary(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(CUBE_MAGIC)?;
        w.write_all(&CUBE_VERSION.to_le_bytes())?;
        for dim in [self.frames, self.antennas, self.range_bins, self.chirps] {
            w.write_all(&(dim as u32).to_le_bytes())?;
        }
        w.write_all(&self.frame_rate_hz.to_le_bytes())?;
        w.write_all(&self.wavelength_m.to_le_bytes())?;
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<Self, CubeError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CUBE_MAGIC {
            return Err(CubeError::Format("bad magic".into()));
        }
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != CUBE_VERSION {
            return Err(CubeError::Format(format!("unsupported version {version}")));
        }
        let mut b4 = [0u8; 4];
        let mut dims = [0usize; 4];
        for d in dims.iter_mut() {
            r.read_exact(&mut b4)?;
            *d = u32::from_le_bytes(b4) as usize;
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let frame_rate_hz = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let wavelength_m = f64::from_le_bytes(b8);
        let count = dims.iter().product::<usize>();
        if count > 1 << 28 {
            return Err(CubeError::Format("cube too large".into()));
        }
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            samples.push(Complex64::new(re, im));
        }
        let cube = RadarCube {
            samples,
            frames: dims[0],
            antennas: dims[1],
            range_bins: dims[2],
            chirps: dims[3],
            frame_rate_hz,
            wavelength_m,
        };
        cube.validate()?;
        Ok(cube)
    }

    pub fn read_csv(r: &mut impl BufRead) -> Result<Self, CubeError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| CubeError::Format("empty file".into()))??;
        let head: Vec<&str> = header.trim().split(',').collect();
        if head.len() != 6 {
            return Err(CubeError::Format(
                "header must be frames,antennas,range_bins,chirps,frame_rate_hz,wavelength_m"
                    .into(),
            ));
        }
        let parse_usize = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CubeError::Format(format!("bad integer {s:?}")))
        };
        let parse_f64 = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CubeError::Format(format!("bad float {s:?}")))
        };
        let mut cube = RadarCube::zeros(
            parse_usize(head[0])?,
            parse_usize(head[1])?,
            parse_usize(head[2])?,
            parse_usize(head[3])?,
            parse_f64(head[4])?,
            parse_f64(head[5])?,
        );
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(CubeError::Format(format!(
                    "expected t,a,r,c,re,im: {line:?}"
                )));
            }
            let (t, a, rr, c) = (
                parse_usize(cols[0])?,
                parse_usize(cols[1])?,
                parse_usize(cols[2])?,
                parse_usize(cols[3])?,
            );
            if t >= cube.frames || a >= cube.antennas || rr >= cube.range_bins || c >= cube.chirps {
                return Err(CubeError::Format(format!("index out of range: {line:?}")));
            }
            *cube.at_mut(t, a, rr, c) = Complex64::new(parse_f64(cols[4])?, parse_f64(cols[5])?);
        }
        Ok(cube)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            self.frames,
            self.antennas,
            self.range_bins,
            self.chirps,
            self.frame_rate_hz,
            self.wavelength_m
        )?;
        for t in 0..self.frames {
            for a in 0..self.antennas {
                for r in 0..self.range_bins {
                    for c in 0..self.chirps {
                        let z = self.at(t, a, r, c);
                        writeln!(w, "{t},{a},{r},{c},{:.17e},{:.17e}", z.re, z.im)?;
                    }
                }
            }
        }
        Ok(())
    }
}
