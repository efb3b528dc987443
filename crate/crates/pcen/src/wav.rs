//! Minimal RIFF/WAVE codec: PCM16 and IEEE float32, mono or multi-channel.
//!
//! Decoding averages multi-channel files down to mono and scales integer
//! samples to `[-1, 1)` by `2^(bits-1)`. Unknown chunks are skipped. The
//! encoder writes mono files only, which is all the toolkit produces.

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

fn decode_err(chunk: &str, detail: impl Into<String>) -> Error {
    Error::WavDecode {
        chunk: chunk.to_string(),
        detail: detail.into(),
    }
}

fn read_u16(bytes: &[u8], at: usize, chunk: &str) -> Result<u16> {
    bytes
        .get(at..at + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or_else(|| decode_err(chunk, format!("truncated at byte {at}")))
}

fn read_u32(bytes: &[u8], at: usize, chunk: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| decode_err(chunk, format!("truncated at byte {at}")))
}

struct Fmt {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Decodes a RIFF/WAVE byte buffer into a mono [`AudioBuffer`].
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 {
        return Err(decode_err("RIFF header", "file shorter than 12 bytes"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(decode_err("RIFF header", "missing RIFF magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(decode_err("RIFF header", "missing WAVE form type"));
    }

    let mut fmt: Option<Fmt> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
        let size = read_u32(bytes, pos + 4, "chunk header")? as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                decode_err(
                    &String::from_utf8_lossy(&id),
                    format!("declared size {size} exceeds file"),
                )
            })?;
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(decode_err("fmt ", format!("chunk size {size} < 16")));
                }
                fmt = Some(Fmt {
                    format: read_u16(bytes, body_start, "fmt ")?,
                    channels: read_u16(bytes, body_start + 2, "fmt ")?,
                    sample_rate: read_u32(bytes, body_start + 4, "fmt ")?,
                    bits_per_sample: read_u16(bytes, body_start + 14, "fmt ")?,
                });
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| decode_err("fmt ", "chunk not found"))?;
    let data = data.ok_or_else(|| decode_err("data", "chunk not found"))?;
    if fmt.channels == 0 {
        return Err(decode_err("fmt ", "zero channels"));
    }
    if fmt.sample_rate == 0 {
        return Err(decode_err("fmt ", "zero sample rate"));
    }

    let interleaved: Vec<f64> = match (fmt.format, fmt.bits_per_sample) {
        (FORMAT_PCM, 16) => {
            if data.len() % 2 != 0 {
                return Err(decode_err("data", "odd byte count for 16-bit samples"));
            }
            data.chunks_exact(2)
                .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
                .collect()
        }
        (FORMAT_IEEE_FLOAT, 32) => {
            if data.len() % 4 != 0 {
                return Err(decode_err("data", "byte count not a multiple of 4"));
            }
            data.chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect()
        }
        (format, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "format tag {format} with {bits} bits per sample (supported: PCM16, float32)"
            )));
        }
    };

    let channels = fmt.channels as usize;
    if interleaved.len() % channels != 0 {
        return Err(decode_err("data", "sample count not divisible by channels"));
    }
    let mono: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };

    AudioBuffer::new(mono, fmt.sample_rate)
}

fn riff_container(fmt_body: &[u8], data: &[u8]) -> Vec<u8> {
    let riff_size = 4 + (8 + fmt_body.len()) + (8 + data.len());
    let mut out = Vec::with_capacity(8 + riff_size);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(riff_size as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&(fmt_body.len() as u32).to_le_bytes());
    out.extend_from_slice(fmt_body);
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data.len() as u32).to_le_bytes());
    out.extend_from_slice(data);
    out
}

fn fmt_body(format: u16, sample_rate: u32, bits: u16) -> Vec<u8> {
    let block_align = bits / 8; // mono
    let byte_rate = sample_rate * block_align as u32;
    let mut body = Vec::with_capacity(16);
    body.extend_from_slice(&format.to_le_bytes());
    body.extend_from_slice(&1u16.to_le_bytes());
    body.extend_from_slice(&sample_rate.to_le_bytes());
    body.extend_from_slice(&byte_rate.to_le_bytes());
    body.extend_from_slice(&block_align.to_le_bytes());
    body.extend_from_slice(&bits.to_le_bytes());
    body
}

/// Encodes a mono buffer as a 32-bit float WAV (lossless enough for
/// augmented low-level clips; PCM16 would quantize them).
pub fn encode_wav_f32(audio: &AudioBuffer) -> Vec<u8> {
    let mut data = Vec::with_capacity(audio.samples.len() * 4);
    for &s in &audio.samples {
        data.extend_from_slice(&(s as f32).to_le_bytes());
    }
    riff_container(&fmt_body(FORMAT_IEEE_FLOAT, audio.sample_rate, 32), &data)
}

/// Encodes a mono buffer as PCM16, clamping to the representable range.
pub fn encode_wav_pcm16(audio: &AudioBuffer) -> Vec<u8> {
    let mut data = Vec::with_capacity(audio.samples.len() * 2);
    for &s in &audio.samples {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        data.extend_from_slice(&q.to_le_bytes());
    }
    riff_container(&fmt_body(FORMAT_PCM, audio.sample_rate, 16), &data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcm16_bytes(samples: &[i16], channels: u16, sample_rate: u32) -> Vec<u8> {
        let mut data = Vec::new();
        for s in samples {
            data.extend_from_slice(&s.to_le_bytes());
        }
        let mut fmt = Vec::new();
        fmt.extend_from_slice(&FORMAT_PCM.to_le_bytes());
        fmt.extend_from_slice(&channels.to_le_bytes());
        fmt.extend_from_slice(&sample_rate.to_le_bytes());
        fmt.extend_from_slice(&(sample_rate * 2 * channels as u32).to_le_bytes());
        fmt.extend_from_slice(&(2 * channels).to_le_bytes());
        fmt.extend_from_slice(&16u16.to_le_bytes());
        riff_container(&fmt, &data)
    }

    #[test]
    fn zero_pcm16_decodes_to_zeros() {
        let wav = pcm16_bytes(&[0; 100], 1, 16_000);
        let audio = decode_wav(&wav).unwrap();
        assert_eq!(audio.sample_rate, 16_000);
        assert_eq!(audio.samples, vec![0.0; 100]);
    }

    #[test]
    fn full_scale_negative_maps_to_minus_one() {
        let wav = pcm16_bytes(&[-32768], 1, 8_000);
        let audio = decode_wav(&wav).unwrap();
        assert_eq!(audio.samples, vec![-1.0]);
    }

    #[test]
    fn stereo_averages_to_mono() {
        // +0.5 and -0.5 per frame average to exactly 0.
        let wav = pcm16_bytes(&[16384, -16384, 16384, -16384], 2, 44_100);
        let audio = decode_wav(&wav).unwrap();
        assert_eq!(audio.samples, vec![0.0, 0.0]);
    }

    #[test]
    fn float32_roundtrip() {
        let orig = AudioBuffer::new(vec![0.25, -0.125, 0.0625, 1.5], 16_000).unwrap();
        let decoded = decode_wav(&encode_wav_f32(&orig)).unwrap();
        // These values are exactly representable in f32.
        assert_eq!(decoded.samples, orig.samples);
        assert_eq!(decoded.sample_rate, 16_000);
    }

    #[test]
    fn malformed_header_names_the_chunk() {
        let err = decode_wav(b"RIFX....WAVE").unwrap_err();
        match err {
            Error::WavDecode { chunk, .. } => assert_eq!(chunk, "RIFF header"),
            other => panic!("unexpected error {other:?}"),
        }

        let mut missing_data = pcm16_bytes(&[0; 4], 1, 16_000);
        missing_data.truncate(12 + 8 + 16); // keep only the fmt chunk
        missing_data[4..8].copy_from_slice(&(4u32 + 24).to_le_bytes());
        let err = decode_wav(&missing_data).unwrap_err();
        match err {
            Error::WavDecode { chunk, .. } => assert_eq!(chunk, "data"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unsupported_codec_is_reported() {
        let mut wav = pcm16_bytes(&[0; 4], 1, 16_000);
        // Rewrite the format tag to 2 (ADPCM).
        wav[20..22].copy_from_slice(&2u16.to_le_bytes());
        assert!(matches!(
            decode_wav(&wav),
            Err(Error::UnsupportedFormat(_))
        ));
    }
}
