//! Pipeline configuration: every public parameter in one place, plus the
//! key=value config-file format and a stable digest.
//!
//! File schema (order-free, `#` comments allowed, unknown keys rejected):
//!
//! ```text
//! # dimensions
//! range_bins = 16        chirps = 8 (power of two)
//! antennas = 2           frames = 16
//! # kernel knobs
//! gamma = 2              gamma_doppler = 4
//! p_phi = 2              taylor_order = 3
//! taylor_cubic = 1.1666666666666667
//! fir_taps = 61          notch_width = 1
//! resp_low_hz = 0.1      resp_high_hz = 0.6
//! heart_low_hz = 0.8     heart_high_hz = 2.5
//! fir_norm_resp = 1.0    fir_norm_heart = 1.0
//! fc_dims = 256 32 5
//! fir_impl = toeplitz    # or rotation
//! return_phase_waveform = false
//! # scene/radio
//! frame_rate_hz = 20.0   wavelength_m = 0.005
//! seed = 1
//! # ckks
//! ring_dim = 4096        scaling_bits = 40
//! first_bits = 60        depth = 11
//! sigma = 3.2            profile = desk   # or standard128
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ckks::{CkksParams, SecurityProfile};
use crate::kernels::{FirImpl, KernelConfig};
use crate::Fnv1a;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub kernel: KernelConfig,
    pub ckks: CkksParams,
    pub frame_rate_hz: f64,
    pub wavelength_m: f64,
    pub seed: u64,
    pub fir_impl: String,
    /// Cubic coefficient for K7 order 3; 7/6 cancels the unit-magnitude
    /// cubic error (arcsin series), -1/3 reproduces the plain arctan form.
    pub taylor_cubic: f64,
    pub return_phase_waveform: bool,
}

#[derive(Debug)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(m: impl Into<String>) -> ConfigError {
    ConfigError { message: m.into() }
}

impl PipelineConfig {
    /// Vital-signs defaults: 10 s window at 20 Hz, desk-scale chain of
    /// depth 11. N = 8192 so the packed window (frames × range_bins
    /// slots) fits in half the ring.
    pub fn default_vitals() -> Self {
        let mut ckks = CkksParams::desk(11);
        ckks.ring_dim = 8192;
        PipelineConfig {
            kernel: KernelConfig {
                range_bins: 16,
                chirps: 1,
                antennas: 1,
                frames: 200,
                gamma: 2,
                gamma_doppler: 4,
                p_phi: 2,
                taylor_order: 3,
                fir_taps: 61,
                resp_band: (0.1, 0.6),
                heart_band: (0.8, 2.5),
                fir_norm_resp: 1.0,
                fir_norm_heart: 1.0,
                notch_width: 1,
                fc_dims: vec![16, 8, 5],
            },
            ckks,
            frame_rate_hz: 20.0,
            wavelength_m: 0.005,
            seed: 1,
            fir_impl: "toeplitz".into(),
            taylor_cubic: crate::kernels::ARCSIN_CUBIC,
            return_phase_waveform: false,
        }
    }

    /// Dynamic-classification defaults: interleaved A=3, R=16, D=32
    /// (1536 active slots), desk-scale depth 11.
    pub fn default_gesture() -> Self {
        PipelineConfig {
            kernel: KernelConfig {
                range_bins: 16,
                chirps: 32,
                antennas: 3,
                frames: 16,
                gamma: 2,
                gamma_doppler: 4,
                p_phi: 2,
                taylor_order: 3,
                fir_taps: 61,
                resp_band: (0.1, 0.6),
                heart_band: (0.8, 2.5),
                fir_norm_resp: 1.0,
                fir_norm_heart: 1.0,
                notch_width: 1,
                fc_dims: vec![1536, 32, 16, 5],
            },
            ckks: CkksParams::desk(11),
            frame_rate_hz: 33.0,
            wavelength_m: 0.005,
            seed: 1,
            fir_impl: "toeplitz".into(),
            taylor_cubic: crate::kernels::ARCSIN_CUBIC,
            return_phase_waveform: false,
        }
    }

    pub fn fir_impl_kind(&self) -> FirImpl {
        if self.fir_impl == "rotation" {
            FirImpl::RotationAccumulation
        } else {
            FirImpl::Toeplitz
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.kernel.validate().map_err(err)?;
        self.ckks.validate().map_err(err)?;
        if self.frame_rate_hz <= 0.0 || self.wavelength_m <= 0.0 {
            return Err(err("frame_rate_hz and wavelength_m must be positive"));
        }
        if !["toeplitz", "rotation"].contains(&self.fir_impl.as_str()) {
            return Err(err(format!(
                "fir_impl {:?} must be toeplitz or rotation",
                self.fir_impl
            )));
        }
        let bands = [self.kernel.resp_band, self.kernel.heart_band];
        for (lo, hi) in bands {
            if !(0.0 < lo && lo < hi && hi < self.frame_rate_hz / 2.0) {
                return Err(err(format!("band ({lo}, {hi}) outside (0, Nyquist)")));
            }
        }
        Ok(())
    }

    /// Stable fingerprint over every public parameter.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.update(self.to_text().as_bytes());
        h.finish()
    }

    /// Canonical key=value rendering (also the config file writer).
    pub fn to_text(&self) -> String {
        let k = &self.kernel;
        let c = &self.ckks;
        let fc: Vec<String> = k.fc_dims.iter().map(|d| d.to_string()).collect();
        format!(
            "range_bins = {}\nchirps = {}\nantennas = {}\nframes = {}\n\
             gamma = {}\ngamma_doppler = {}\np_phi = {}\ntaylor_order = {}\n\
             taylor_cubic = {}\nfir_taps = {}\nnotch_width = {}\n\
             resp_low_hz = {}\nresp_high_hz = {}\nheart_low_hz = {}\nheart_high_hz = {}\n\
             fir_norm_resp = {}\nfir_norm_heart = {}\nfc_dims = {}\nfir_impl = {}\n\
             return_phase_waveform = {}\nframe_rate_hz = {}\nwavelength_m = {}\nseed = {}\n\
             ring_dim = {}\nscaling_bits = {}\nfirst_bits = {}\ndepth = {}\nsigma = {}\nprofile = {}\n",
            k.range_bins,
            k.chirps,
            k.antennas,
            k.frames,
            k.gamma,
            k.gamma_doppler,
            k.p_phi,
            k.taylor_order,
            self.taylor_cubic,
            k.fir_taps,
            k.notch_width,
            k.resp_band.0,
            k.resp_band.1,
            k.heart_band.0,
            k.heart_band.1,
            k.fir_norm_resp,
            k.fir_norm_heart,
            fc.join(" "),
            self.fir_impl,
            self.return_phase_waveform,
            self.frame_rate_hz,
            self.wavelength_m,
            self.seed,
            c.ring_dim,
            c.scaling_bits,
            c.first_bits,
            c.depth,
            c.sigma,
            match c.profile {
                SecurityProfile::DeskScale => "desk",
                SecurityProfile::Standard128 => "standard128",
            }
        )
    }

    /// Apply key=value lines on top of this config.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key = value", lineno + 1)))?;
            self.apply_key(key.trim(), value.trim())
                .map_err(|e| err(format!("line {}: {}", lineno + 1, e.message)))?;
        }
        Ok(())
    }

    pub fn apply_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
            v.parse()
                .map_err(|_| err(format!("bad value {v:?} for {key}")))
        }
        let k = &mut self.kernel;
        match key {
            "range_bins" => k.range_bins = parse(key, value)?,
            "chirps" => k.chirps = parse(key, value)?,
            "antennas" => k.antennas = parse(key, value)?,
            "frames" => k.frames = parse(key, value)?,
            "gamma" => k.gamma = parse(key, value)?,
            "gamma_doppler" => k.gamma_doppler = parse(key, value)?,
            "p_phi" => k.p_phi = parse(key, value)?,
            "taylor_order" => k.taylor_order = parse(key, value)?,
            "taylor_cubic" => self.taylor_cubic = parse(key, value)?,
            "fir_taps" => k.fir_taps = parse(key, value)?,
            "notch_width" => k.notch_width = parse(key, value)?,
            "resp_low_hz" => k.resp_band.0 = parse(key, value)?,
            "resp_high_hz" => k.resp_band.1 = parse(key, value)?,
            "heart_low_hz" => k.heart_band.0 = parse(key, value)?,
            "heart_high_hz" => k.heart_band.1 = parse(key, value)?,
            "fir_norm_resp" => k.fir_norm_resp = parse(key, value)?,
            "fir_norm_heart" => k.fir_norm_heart = parse(key, value)?,
            "fc_dims" => {
                let dims: Result<Vec<usize>, _> =
                    value.split_whitespace().map(|t| t.parse()).collect();
                k.fc_dims = dims.map_err(|_| err(format!("bad fc_dims {value:?}")))?;
            }
            "fir_impl" => self.fir_impl = value.to_string(),
            "return_phase_waveform" => self.return_phase_waveform = parse(key, value)?,
            "frame_rate_hz" => self.frame_rate_hz = parse(key, value)?,
            "wavelength_m" => self.wavelength_m = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "ring_dim" => self.ckks.ring_dim = parse(key, value)?,
            "scaling_bits" => self.ckks.scaling_bits = parse(key, value)?,
            "first_bits" => self.ckks.first_bits = parse(key, value)?,
            "depth" => self.ckks.depth = parse(key, value)?,
            "sigma" => self.ckks.sigma = parse(key, value)?,
            "profile" => {
                self.ckks.profile = match value {
                    "desk" => SecurityProfile::DeskScale,
                    "standard128" => SecurityProfile::Standard128,
                    other => return Err(err(format!("unknown profile {other:?}"))),
                }
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip_preserves_digest() {
        let cfg = PipelineConfig::default_gesture();
        let text = cfg.to_text();
        let mut back = PipelineConfig::default_vitals();
        back.apply_text(&text).unwrap();
        assert_eq!(back.digest(), cfg.digest());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut cfg = PipelineConfig::default_vitals();
        assert!(cfg.apply_text("no_such_key = 3").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let mut cfg = PipelineConfig::default_vitals();
        cfg.apply_text("# comment\n\ngamma = 4  # inline\n")
            .unwrap();
        assert_eq!(cfg.kernel.gamma, 4);
    }

    #[test]
    fn defaults_validate() {
        PipelineConfig::default_vitals().validate().unwrap();
        PipelineConfig::default_gesture().validate().unwrap();
    }
}
