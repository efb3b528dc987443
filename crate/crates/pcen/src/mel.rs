//! Mel filterbank construction and energy extraction.

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::stft::{frame_signal, PowerSpectrum};

/// Geometry of the feature frontend.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontendConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
    pub n_mels: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
}

impl Default for FrontendConfig {
    /// 40 mel channels over 25 ms windows with a 10 ms shift; 512-point FFT
    /// (next power of two above the 400-sample window at 16 kHz) and a
    /// 125–7500 Hz band.
    fn default() -> Self {
        Self {
            window_ms: 25.0,
            hop_ms: 10.0,
            fft_size: 512,
            n_mels: 40,
            fmin_hz: 125.0,
            fmax_hz: 7500.0,
        }
    }
}

impl FrontendConfig {
    pub fn window_samples(&self, sample_rate: u32) -> usize {
        (self.window_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        (self.hop_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let win = self.window_samples(sample_rate);
        let hop = self.hop_samples(sample_rate);
        if hop == 0 || self.hop_ms > self.window_ms {
            return Err(Error::InvalidConfig(format!(
                "need 0 < hop ({} ms) <= window ({} ms)",
                self.hop_ms, self.window_ms
            )));
        }
        if win == 0 {
            return Err(Error::InvalidConfig("window rounds to zero samples".into()));
        }
        if self.fft_size < win {
            return Err(Error::InvalidConfig(format!(
                "fft_size {} is smaller than the {win}-sample window",
                self.fft_size
            )));
        }
        if self.n_mels == 0 {
            return Err(Error::InvalidConfig("n_mels must be at least 1".into()));
        }
        if !(0.0 <= self.fmin_hz && self.fmin_hz < self.fmax_hz) {
            return Err(Error::InvalidConfig(format!(
                "need 0 <= fmin ({}) < fmax ({})",
                self.fmin_hz, self.fmax_hz
            )));
        }
        if self.fmax_hz > sample_rate as f64 / 2.0 {
            return Err(Error::InvalidConfig(format!(
                "fmax {} Hz exceeds Nyquist for {sample_rate} Hz",
                self.fmax_hz
            )));
        }
        Ok(())
    }
}

/// Smallest power of two at or above `n`.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// T×F non-negative linear filterbank energies.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyGram {
    mat: Mat,
}

impl EnergyGram {
    pub fn new(mat: Mat) -> Result<Self> {
        if mat.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParam(
                "energy gram entries must be finite and non-negative".into(),
            ));
        }
        Ok(Self { mat })
    }

    pub fn frames(&self) -> usize {
        self.mat.rows()
    }

    pub fn channels(&self) -> usize {
        self.mat.cols()
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    /// First `n` frames as a new gram.
    pub fn truncated(&self, n: usize) -> EnergyGram {
        EnergyGram {
            mat: self.mat.truncated(n),
        }
    }
}

/// Builds the F×(fft_size/2+1) triangular mel filterbank.
///
/// Centers are equally spaced on the mel scale between `fmin` and `fmax`;
/// each triangle is linear in Hz and normalized to a unit peak over the
/// sampled bins, so every row has max exactly 1.0.
pub fn mel_filterbank_matrix(cfg: &FrontendConfig, sample_rate: u32) -> Result<Mat> {
    cfg.validate(sample_rate)?;
    let n_bins = cfg.n_bins();
    let mel_lo = hz_to_mel(cfg.fmin_hz);
    let mel_hi = hz_to_mel(cfg.fmax_hz);
    // n_mels + 2 edge points; filter i spans points i .. i+2 with its
    // center at point i+1.
    let edges_hz: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();
    let bin_hz: Vec<f64> = (0..n_bins)
        .map(|k| k as f64 * sample_rate as f64 / cfg.fft_size as f64)
        .collect();

    let mut fb = Mat::zeros(cfg.n_mels, n_bins);
    for m in 0..cfg.n_mels {
        let (lo, center, hi) = (edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]);
        let row = fb.row_mut(m);
        let mut peak = 0.0f64;
        for (k, &hz) in bin_hz.iter().enumerate() {
            let w = if hz <= lo || hz >= hi {
                0.0
            } else if hz <= center {
                (hz - lo) / (center - lo)
            } else {
                (hi - hz) / (hi - center)
            };
            row[k] = w;
            peak = peak.max(w);
        }
        if peak == 0.0 {
            return Err(Error::InvalidConfig(format!(
                "mel filter {m} covers no FFT bin; reduce n_mels or enlarge fft_size"
            )));
        }
        for w in row.iter_mut() {
            *w /= peak;
        }
    }
    Ok(fb)
}

/// Center frequencies (Hz) of the filters produced by
/// [`mel_filterbank_matrix`], before bin sampling.
pub fn mel_center_frequencies(cfg: &FrontendConfig) -> Vec<f64> {
    let mel_lo = hz_to_mel(cfg.fmin_hz);
    let mel_hi = hz_to_mel(cfg.fmax_hz);
    (1..cfg.n_mels + 1)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect()
}

/// Full signal-to-energy pipeline: framing, power spectrum, mel filtering.
pub fn filterbank_energies(audio: &AudioBuffer, cfg: &FrontendConfig) -> Result<EnergyGram> {
    let frames = frame_signal(audio, cfg)?;
    let fb = mel_filterbank_matrix(cfg, audio.sample_rate)?;
    let spectrum = PowerSpectrum::new(cfg.fft_size);
    let mut mat = Mat::zeros(frames.len(), cfg.n_mels);
    for (t, frame) in frames.iter().enumerate() {
        let power = spectrum.compute(frame)?;
        let row = mat.row_mut(t);
        for m in 0..cfg.n_mels {
            let filter = fb.row(m);
            let mut acc = 0.0;
            for (k, &p) in power.iter().enumerate() {
                acc += filter[k] * p;
            }
            // Filter weights and powers are non-negative, so any negative
            // value could only be a rounding artifact; there is none to
            // clamp, but keep the invariant explicit.
            row[m] = acc;
        }
    }
    EnergyGram::new(mat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_filter_peaks_at_mel_midpoint() {
        let cfg = FrontendConfig {
            n_mels: 1,
            ..FrontendConfig::default()
        };
        let centers = mel_center_frequencies(&cfg);
        let expected = mel_to_hz((hz_to_mel(125.0) + hz_to_mel(7500.0)) / 2.0);
        assert!((centers[0] - expected).abs() < 1e-9);
        // And the matrix builds fine with one row.
        let fb = mel_filterbank_matrix(&cfg, 16_000).unwrap();
        assert_eq!(fb.rows(), 1);
    }

    #[test]
    fn rows_have_unit_peak() {
        let fb = mel_filterbank_matrix(&FrontendConfig::default(), 16_000).unwrap();
        for m in 0..fb.rows() {
            let peak = fb.row(m).iter().cloned().fold(0.0f64, f64::max);
            assert_eq!(peak, 1.0, "filter {m} peak");
            assert!(fb.row(m).iter().all(|&w| w >= 0.0));
        }
    }

    #[test]
    fn centers_increase_within_band() {
        let cfg = FrontendConfig::default();
        let centers = mel_center_frequencies(&cfg);
        assert_eq!(centers.len(), 40);
        assert!(centers[0] > 125.0);
        assert!(centers[39] < 7500.0);
        for w in centers.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn too_many_filters_for_fft_is_a_config_error() {
        let cfg = FrontendConfig {
            n_mels: 300,
            fft_size: 512,
            ..FrontendConfig::default()
        };
        assert!(matches!(
            mel_filterbank_matrix(&cfg, 16_000),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn zero_signal_zero_energies() {
        let audio = AudioBuffer::new(vec![0.0; 1600], 16_000).unwrap();
        let gram = filterbank_energies(&audio, &FrontendConfig::default()).unwrap();
        assert!(gram.mat().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn doubling_amplitude_quadruples_energy_exactly() {
        // Multiplication by 2 is exact in binary floating point, so the
        // whole linear pipeline scales exactly and energies scale by 4.
        let samples: Vec<f64> = (0..800).map(|i| ((i as f64) * 0.11).sin() * 0.3).collect();
        let a = AudioBuffer::new(samples.clone(), 16_000).unwrap();
        let b = AudioBuffer::new(samples.iter().map(|s| s * 2.0).collect(), 16_000).unwrap();
        let cfg = FrontendConfig::default();
        let ga = filterbank_energies(&a, &cfg).unwrap();
        let gb = filterbank_energies(&b, &cfg).unwrap();
        for (x, y) in ga.mat().iter().zip(gb.mat().iter()) {
            assert_eq!(*y, *x * 4.0);
        }
    }

    #[test]
    fn white_noise_excites_every_channel() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<f64> = (0..3200).map(|_| rng.random_range(-0.5..0.5)).collect();
        let audio = AudioBuffer::new(samples, 16_000).unwrap();
        let gram = filterbank_energies(&audio, &FrontendConfig::default()).unwrap();
        assert!(gram.mat().iter().all(|&e| e > 0.0));
    }
}
