use std::fs;
use std::io::Write;
use std::path::Path;

use super::{AudioBuffer, SAMPLE_RATE_HZ};
use crate::error::{Error, Result};

const WAVE_FORMAT_PCM: u16 = 1;

/// Reads a 16-bit PCM mono 16 kHz RIFF/WAVE file.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let bytes = fs::read(path.as_ref())?;
    read_wav(&bytes)
}

/// Parses WAV bytes; see [`load_wav`].
pub fn read_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::NotWav("missing RIFF/WAVE header".into()));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if body + 16 > bytes.len() || size < 16 {
                    return Err(Error::TruncatedFile("fmt chunk".into()));
                }
                let b = &bytes[body..body + 16];
                let tag = u16::from_le_bytes([b[0], b[1]]);
                let channels = u16::from_le_bytes([b[2], b[3]]);
                let rate = u32::from_le_bytes([b[4], b[5], b[6], b[7]]);
                let bits = u16::from_le_bytes([b[14], b[15]]);
                format = Some((tag, channels, rate, bits));
            }
            b"data" => {
                let (tag, channels, rate, bits) =
                    format.ok_or_else(|| Error::NotWav("data chunk before fmt chunk".into()))?;
                if tag != WAVE_FORMAT_PCM || bits != 16 {
                    return Err(Error::UnsupportedEncoding(format!(
                        "format tag {tag}, {bits} bits; need 16-bit PCM"
                    )));
                }
                if channels != 1 {
                    return Err(Error::UnsupportedEncoding(format!("{channels} channels; need mono")));
                }
                if rate != SAMPLE_RATE_HZ {
                    return Err(Error::UnsupportedEncoding(format!(
                        "{rate} Hz; resample to {SAMPLE_RATE_HZ} Hz first"
                    )));
                }
                if body + size > bytes.len() || size % 2 != 0 {
                    return Err(Error::TruncatedFile(format!(
                        "data chunk declares {size} bytes, {} available",
                        bytes.len().saturating_sub(body)
                    )));
                }
                let samples = bytes[body..body + size]
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
                    .collect::<Vec<_>>();
                return AudioBuffer::new(samples, rate);
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body + size + (size & 1);
    }
    if format.is_none() {
        Err(Error::NotWav("no fmt chunk".into()))
    } else {
        Err(Error::TruncatedFile("no data chunk".into()))
    }
}

/// Writes 16-bit PCM mono. Samples are clipped to `[-1, 1)` and rounded.
pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    let n = audio.len();
    let data_len = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&WAVE_FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&audio.sample_rate_hz().to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate_hz() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in audio.samples() {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    let mut f = fs::File::create(path.as_ref())?;
    f.write_all(&out)?;
    Ok(())
}
