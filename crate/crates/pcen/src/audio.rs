//! Mono audio buffers and loudness scaling.

use crate::error::{Error, Result};

/// A mono sample sequence. Samples are nominally in `[-1, 1]` with digital
/// full scale at 1.0, but nothing clips values outside that range.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParam("sample_rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParam(
                "audio samples must be finite (no NaN/Inf)".into(),
            ));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Root-mean-square level of the samples.
pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let sum_sq: f64 = samples.iter().map(|s| s * s).sum();
    (sum_sq / samples.len() as f64).sqrt()
}

/// RMS level in dB relative to full scale 1.0.
pub fn measure_dbfs(audio: &AudioBuffer) -> f64 {
    20.0 * rms(&audio.samples).log10()
}

/// Applies the gain that moves the RMS level to `target_dbfs`.
///
/// No clipping: the scaled samples may leave `[-1, 1]`, which keeps the
/// operation linear and exactly invertible.
pub fn scale_to_dbfs(audio: &AudioBuffer, target_dbfs: f64) -> Result<AudioBuffer> {
    let level = rms(&audio.samples);
    if level == 0.0 {
        return Err(Error::SilentAudio);
    }
    let current_dbfs = 20.0 * level.log10();
    let gain = 10f64.powf((target_dbfs - current_dbfs) / 20.0);
    Ok(AudioBuffer {
        samples: audio.samples.iter().map(|s| s * gain).collect(),
        sample_rate: audio.sample_rate,
    })
}
