//! Framing, windowing and power spectra.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::mel::FrontendConfig;

/// Symmetric Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Cuts the signal into Hann-windowed frames.
///
/// Frame `t` covers samples `[t*hop, t*hop + win)`; there is no padding at
/// the signal edges, so `T = floor((len - win) / hop) + 1`.
pub fn frame_signal(audio: &AudioBuffer, cfg: &FrontendConfig) -> Result<Vec<Vec<f64>>> {
    let win = cfg.window_samples(audio.sample_rate);
    let hop = cfg.hop_samples(audio.sample_rate);
    cfg.validate(audio.sample_rate)?;
    if audio.len() < win {
        return Err(Error::InputTooShort(format!(
            "signal of {} samples is shorter than one {win}-sample window",
            audio.len()
        )));
    }
    let window = hann_window(win);
    let n_frames = (audio.len() - win) / hop + 1;
    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let start = t * hop;
        let frame: Vec<f64> = audio.samples[start..start + win]
            .iter()
            .zip(&window)
            .map(|(s, w)| s * w)
            .collect();
        frames.push(frame);
    }
    Ok(frames)
}

/// Reusable FFT plan for squared-magnitude spectra of a fixed size.
pub struct PowerSpectrum {
    fft: std::sync::Arc<dyn rustfft::Fft<f64>>,
    fft_size: usize,
}

impl PowerSpectrum {
    pub fn new(fft_size: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        Self { fft, fft_size }
    }

    /// Zero-pads `frame` to the FFT size and returns `|DFT_k|^2` for
    /// `k = 0 ..= fft_size/2`. No normalization is applied.
    pub fn compute(&self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() > self.fft_size {
            return Err(Error::ShapeMismatch(format!(
                "frame of {} samples exceeds fft size {}",
                frame.len(),
                self.fft_size
            )));
        }
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&s| Complex::new(s, 0.0)).collect();
        buf.resize(self.fft_size, Complex::new(0.0, 0.0));
        self.fft.process(&mut buf);
        Ok(buf[..=self.fft_size / 2]
            .iter()
            .map(|c| c.re * c.re + c.im * c.im)
            .collect())
    }
}

/// One-shot power spectrum of a single frame.
pub fn power_spectrum(frame: &[f64], fft_size: usize) -> Result<Vec<f64>> {
    PowerSpectrum::new(fft_size).compute(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn audio(samples: Vec<f64>) -> AudioBuffer {
        AudioBuffer::new(samples, 16_000).unwrap()
    }

    #[test]
    fn frame_counts_at_boundaries() {
        let cfg = FrontendConfig::default();
        // 400 samples at 16 kHz is exactly one 25 ms window.
        assert_eq!(frame_signal(&audio(vec![0.1; 400]), &cfg).unwrap().len(), 1);
        // 560 samples: frames start at 0 and 160.
        let frames = frame_signal(&audio(vec![0.1; 560]), &cfg).unwrap();
        assert_eq!(frames.len(), 2);
        // 559 samples: still one frame.
        assert_eq!(frame_signal(&audio(vec![0.1; 559]), &cfg).unwrap().len(), 1);
    }

    #[test]
    fn frame_starts_follow_hop() {
        let cfg = FrontendConfig::default();
        let mut samples = vec![0.0; 560];
        samples[160] = 1.0; // lands at index 0 of the second frame
        let frames = frame_signal(&audio(samples), &cfg).unwrap();
        let window = hann_window(400);
        assert_eq!(frames[1][0], window[0]);
        assert_eq!(frames[0][160], window[160]);
    }

    #[test]
    fn constant_signal_yields_the_window() {
        let cfg = FrontendConfig::default();
        let frames = frame_signal(&audio(vec![1.0; 400]), &cfg).unwrap();
        assert_eq!(frames[0], hann_window(400));
    }

    #[test]
    fn short_signal_is_an_error() {
        let cfg = FrontendConfig::default();
        assert!(matches!(
            frame_signal(&audio(vec![0.0; 399]), &cfg),
            Err(Error::InputTooShort(_))
        ));
    }

    #[test]
    fn zero_frame_zero_spectrum() {
        let spec = power_spectrum(&[0.0; 64], 64).unwrap();
        assert_eq!(spec, vec![0.0; 33]);
    }

    #[test]
    fn impulse_spectrum_is_flat() {
        let mut frame = vec![0.0; 8];
        frame[0] = 1.0;
        let spec = power_spectrum(&frame, 8).unwrap();
        assert_eq!(spec.len(), 5);
        for &p in &spec {
            assert!((p - 1.0).abs() < 1e-12, "impulse bin {p}");
        }
    }

    #[test]
    fn oversized_frame_is_rejected() {
        assert!(matches!(
            power_spectrum(&[0.0; 16], 8),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
