use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{default_roles, ChannelRole, MultiChannelAudio};
use crate::error::{Error, Result};

const FULL_SCALE: f64 = 32768.0;

/// How channel roles are assigned on read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RoleLayout {
    #[default]
    Generic,
    /// Six-channel files become Mic0..Mic3, Ref0, Ref1.
    AlphaMini,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn map_hound(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => io_err(path, io),
        hound::Error::FormatError(msg) => Error::Format(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedFormat("unsupported wav feature".into()),
        other => Error::Format(other.to_string()),
    }
}

/// Reads a 16-bit PCM WAV; samples are scaled by 1/32768 into [-1, 1).
pub fn read_wav(path: impl AsRef<Path>, layout: RoleLayout) -> Result<MultiChannelAudio> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int {
        return Err(Error::UnsupportedFormat("only integer PCM is supported".into()));
    }
    if spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat(format!(
            "{}-bit samples, only 16-bit is supported",
            spec.bits_per_sample
        )));
    }
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format("zero channels".into()));
    }
    let frames = reader.duration() as usize;
    let mut samples = vec![Vec::with_capacity(frames); channels];
    for (i, s) in reader.into_samples::<i16>().enumerate() {
        let s = s.map_err(|e| map_hound(path, e))?;
        samples[i % channels].push(f64::from(s) / FULL_SCALE);
    }
    let len = samples[channels - 1].len();
    for c in &mut samples {
        c.truncate(len);
    }
    let roles = if layout == RoleLayout::AlphaMini && channels == 6 {
        ChannelRole::alpha_mini().to_vec()
    } else {
        default_roles(channels)
    };
    MultiChannelAudio::new(samples, spec.sample_rate, roles)
}

pub(crate) fn quantize(x: f64) -> i16 {
    (x * FULL_SCALE).round().clamp(-32768.0, 32767.0) as i16
}

/// Writes 16-bit PCM, interleaved in channel order, clamping to the i16 range.
pub fn write_wav(path: impl AsRef<Path>, audio: &MultiChannelAudio) -> Result<()> {
    let path = path.as_ref();
    if audio.channels().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::param("cannot write non-finite samples"));
    }
    let spec = WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| map_hound(path, e))?;
    for t in 0..audio.len() {
        for c in audio.channels() {
            writer
                .write_sample(quantize(c[t]))
                .map_err(|e| map_hound(path, e))?;
        }
    }
    writer.finalize().map_err(|e| map_hound(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal RIFF writer/reader used as an oracle independent of `hound`.
    fn raw_wav(channels: u16, rate: u32, bits: u16, format_tag: u16, data: &[u8]) -> Vec<u8> {
        let block_align = channels * bits / 8;
        let mut v = Vec::new();
        v.extend_from_slice(b"RIFF");
        v.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        v.extend_from_slice(b"WAVEfmt ");
        v.extend_from_slice(&16u32.to_le_bytes());
        v.extend_from_slice(&format_tag.to_le_bytes());
        v.extend_from_slice(&channels.to_le_bytes());
        v.extend_from_slice(&rate.to_le_bytes());
        v.extend_from_slice(&(rate * u32::from(block_align)).to_le_bytes());
        v.extend_from_slice(&block_align.to_le_bytes());
        v.extend_from_slice(&bits.to_le_bytes());
        v.extend_from_slice(b"data");
        v.extend_from_slice(&(data.len() as u32).to_le_bytes());
        v.extend_from_slice(data);
        v
    }

    fn raw_samples(bytes: &[u8]) -> Vec<i16> {
        let data = bytes.windows(4).position(|w| w == b"data").unwrap() + 8;
        bytes[data..]
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]))
            .collect()
    }

    #[test]
    fn zero_mono_second() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.wav");
        std::fs::write(&p, raw_wav(1, 16_000, 16, 1, &vec![0u8; 32_000])).unwrap();
        let a = read_wav(&p, RoleLayout::Generic).unwrap();
        assert_eq!((a.num_channels(), a.len(), a.sample_rate()), (1, 16_000, 16_000));
        assert!(a.channel(0).iter().all(|&v| v == 0.0));
        assert_eq!(a.roles(), &[ChannelRole::Mono]);
    }

    #[test]
    fn six_channel_gets_alpha_mini_roles() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("six.wav");
        std::fs::write(&p, raw_wav(6, 16_000, 16, 1, &[0u8; 6 * 2 * 10])).unwrap();
        let a = read_wav(&p, RoleLayout::AlphaMini).unwrap();
        assert_eq!(a.roles(), &ChannelRole::alpha_mini());
        let g = read_wav(&p, RoleLayout::Generic).unwrap();
        assert_eq!(g.roles()[5], ChannelRole::Mic(5));
    }

    #[test]
    fn full_scale_square_wave_scaling() {
        let ints: Vec<i16> = (0..64).map(|i| if (i / 8) % 2 == 0 { 32767 } else { -32768 }).collect();
        let data: Vec<u8> = ints.iter().flat_map(|s| s.to_le_bytes()).collect();
        let bytes = raw_wav(1, 16_000, 16, 1, &data);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sq.wav");
        std::fs::write(&p, &bytes).unwrap();
        let a = read_wav(&p, RoleLayout::Generic).unwrap();
        let oracle: Vec<f64> = raw_samples(&bytes).iter().map(|&s| f64::from(s) / 32768.0).collect();
        assert_eq!(a.channel(0), &oracle[..]);
        assert!(a.channel(0).iter().all(|&v| (-1.0..1.0).contains(&v)));
        assert_eq!(a.channel(0)[0], 32767.0 / 32768.0);
        assert_eq!(a.channel(0)[8], -1.0);
    }

    #[test]
    fn write_clamps_and_interleaves() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.wav");
        let a = MultiChannelAudio::with_default_roles(vec![vec![1.0, -1.5], vec![0.5, 0.0]], 16_000).unwrap();
        write_wav(&p, &a).unwrap();
        let raw = raw_samples(&std::fs::read(&p).unwrap());
        assert_eq!(raw, vec![32767, 16384, -32768, 0]);
    }

    #[test]
    fn rejects_non_16_bit_and_non_pcm() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("8.wav");
        std::fs::write(&p, raw_wav(1, 16_000, 8, 1, &[128u8; 10])).unwrap();
        assert!(matches!(read_wav(&p, RoleLayout::Generic), Err(Error::UnsupportedFormat(_))));

        let p = dir.path().join("f.wav");
        std::fs::write(&p, raw_wav(1, 16_000, 32, 3, &[0u8; 16])).unwrap();
        assert!(matches!(read_wav(&p, RoleLayout::Generic), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn rejects_malformed_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.wav");
        std::fs::write(&p, b"RIFX\0\0\0\0garbage").unwrap();
        assert!(matches!(read_wav(&p, RoleLayout::Generic), Err(Error::Format(_))));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let a = MultiChannelAudio::mono(vec![0.0; 4], 16_000).unwrap();
        let err = write_wav("/nonexistent-dir/x/y.wav", &a).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn random_six_channel_round_trip_within_one_lsb() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let chans: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..16_000).map(|_| rng.random_range(-0.5..=0.5)).collect())
            .collect();
        let a = MultiChannelAudio::alpha_mini(chans, 16_000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.wav");
        write_wav(&p, &a).unwrap();
        let b = read_wav(&p, RoleLayout::AlphaMini).unwrap();
        assert_eq!(a.roles(), b.roles());
        let max_err = a
            .channels()
            .iter()
            .flatten()
            .zip(b.channels().iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 1.0 / 32768.0, "{max_err}");
    }
}
