//! Loading, validation, and gating of raw phonation recordings.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Cohort label of a recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Label {
    Pd,
    Hc,
    Unknown,
}

impl Label {
    pub fn parse(s: &str) -> Result<Label> {
        match s.trim() {
            "PD" | "pd" => Ok(Label::Pd),
            "HC" | "hc" => Ok(Label::Hc),
            "" => Ok(Label::Unknown),
            other => Err(Error::InvalidInput(format!("unknown label {other:?}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Pd => write!(f, "PD"),
            Label::Hc => write!(f, "HC"),
            Label::Unknown => Ok(()),
        }
    }
}

/// Participant sex as self-reported in the metadata sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sex {
    F,
    M,
    Unknown,
}

impl Sex {
    pub fn parse(s: &str) -> Result<Sex> {
        match s.trim() {
            "F" | "f" => Ok(Sex::F),
            "M" | "m" => Ok(Sex::M),
            "" => Ok(Sex::Unknown),
            other => Err(Error::InvalidInput(format!("unknown sex {other:?}"))),
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sex::F => write!(f, "F"),
            Sex::M => write!(f, "M"),
            Sex::Unknown => Ok(()),
        }
    }
}

/// A mono phonation recording with its metadata.
#[derive(Debug, Clone)]
pub struct Recording {
    pub id: String,
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub label: Label,
    pub age: Option<u32>,
    pub sex: Sex,
}

impl Recording {
    pub fn new(id: impl Into<String>, samples: Vec<f64>, sample_rate: u32) -> Result<Recording> {
        if sample_rate == 0 {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput("samples must be finite".into()));
        }
        Ok(Recording {
            id: id.into(),
            samples,
            sample_rate,
            label: Label::Unknown,
            age: None,
            sex: Sex::Unknown,
        })
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Load a mono 16-bit PCM WAV file. Samples are normalized to [-1, 1] by
/// dividing by 32768; the id defaults to the file stem.
pub fn load_wav(path: impl AsRef<Path>) -> Result<Recording> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(map_hound_err)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedChannels(spec.channels));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedCodec(format!(
            "{:?} {} bit",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let samples: Vec<f64> = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| v as f64 / 32768.0))
        .collect::<std::result::Result<_, _>>()
        .map_err(map_hound_err)?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut rec = Recording::new(id, samples, spec.sample_rate)?;
    rec.label = Label::Unknown;
    Ok(rec)
}

fn map_hound_err(e: hound::Error) -> Error {
    match e {
        // hound reports truncated/garbled containers as read failures.
        hound::Error::IoError(io)
            if matches!(
                io.kind(),
                std::io::ErrorKind::UnexpectedEof | std::io::ErrorKind::Other
            ) =>
        {
            Error::WavFormat(format!("truncated or malformed wav: {io}"))
        }
        hound::Error::IoError(io) => Error::Io(io),
        hound::Error::Unsupported => Error::UnsupportedCodec("unsupported wav encoding".into()),
        other => Error::WavFormat(other.to_string()),
    }
}

/// Write a recording as mono 16-bit PCM. Round-trips losslessly with
/// [`load_wav`] for samples that originated from 16-bit PCM.
pub fn save_wav(rec: &Recording, path: impl AsRef<Path>) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: rec.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_hound_err)?;
    for &s in &rec.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(map_hound_err)?;
    }
    writer.finalize().map_err(map_hound_err)?;
    Ok(())
}

/// Leading/trailing silence trim configuration.
#[derive(Debug, Clone, Copy)]
pub struct TrimConfig {
    /// Short-time RMS window in seconds.
    pub window_s: f64,
    /// Keep threshold as a fraction of the peak short-time RMS.
    pub threshold_frac: f64,
}

impl Default for TrimConfig {
    fn default() -> Self {
        TrimConfig {
            window_s: 0.025,
            threshold_frac: 0.05,
        }
    }
}

/// Remove leading and trailing segments whose short-time RMS falls below
/// `threshold_frac` x peak RMS. The interior is untouched and the operation
/// is idempotent: the RMS is evaluated at every sample position, so the kept
/// span re-evaluates identically on a second pass.
pub fn trim_phonation(rec: &Recording, cfg: &TrimConfig) -> Result<Recording> {
    let n = rec.samples.len();
    if n == 0 {
        return Err(Error::EmptyAfterTrim);
    }
    let wlen = ((cfg.window_s * rec.sample_rate as f64).round() as usize).max(1);
    let wlen = wlen.min(n);
    // Prefix sums of x^2 give O(1) windowed energy.
    let mut prefix = vec![0.0f64; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + rec.samples[i] * rec.samples[i];
    }
    let n_pos = n - wlen + 1;
    let rms_at = |p: usize| ((prefix[p + wlen] - prefix[p]) / wlen as f64).sqrt();
    let peak = (0..n_pos).map(rms_at).fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Err(Error::EmptyAfterTrim);
    }
    let thr = cfg.threshold_frac * peak;
    let first = (0..n_pos).find(|&p| rms_at(p) >= thr);
    let last = (0..n_pos).rev().find(|&p| rms_at(p) >= thr);
    match (first, last) {
        (Some(f), Some(l)) => {
            let mut out = rec.clone();
            out.samples = rec.samples[f..l + wlen].to_vec();
            Ok(out)
        }
        _ => Err(Error::EmptyAfterTrim),
    }
}

/// Outcome of the minimum-duration gate.
#[derive(Debug, Clone)]
pub struct GateDecision {
    pub accepted: bool,
    /// Voiced duration in seconds (after silence trimming).
    pub voiced_duration_s: f64,
    pub reason: Option<String>,
}

/// Accept or reject a recording by voiced duration. Gating is total: an
/// all-silent recording yields a rejection, never an error. The threshold is
/// a strict "less than": exactly `min_duration` seconds is accepted.
pub fn gate_recording(rec: &Recording, min_duration: f64, trim: &TrimConfig) -> GateDecision {
    debug_assert!(min_duration > 0.0);
    let voiced = match trim_phonation(rec, trim) {
        Ok(trimmed) => trimmed.duration(),
        Err(_) => 0.0,
    };
    if voiced < min_duration {
        GateDecision {
            accepted: false,
            voiced_duration_s: voiced,
            reason: Some(format!(
                "voiced duration {voiced:.3} s below minimum {min_duration:.3} s"
            )),
        }
    } else {
        GateDecision {
            accepted: true,
            voiced_duration_s: voiced,
            reason: None,
        }
    }
}

/// Resample to `target_rate` with a 64-tap windowed-sinc interpolator.
/// Returns a clone when the rate already matches.
pub fn resample(rec: &Recording, target_rate: u32) -> Recording {
    if rec.sample_rate == target_rate || rec.samples.is_empty() {
        let mut out = rec.clone();
        out.sample_rate = if rec.samples.is_empty() {
            target_rate
        } else {
            out.sample_rate
        };
        return out;
    }
    const TAPS: i64 = 64;
    let src_rate = rec.sample_rate as f64;
    let ratio = src_rate / target_rate as f64;
    // Anti-alias cutoff at the smaller Nyquist, normalized to input rate.
    let cutoff = 0.5 * (target_rate as f64).min(src_rate) / src_rate * 0.95;
    let out_len = (rec.samples.len() as f64 / ratio).floor() as usize;
    let n = rec.samples.len() as i64;
    let sinc = |t: f64| {
        if t.abs() < 1e-12 {
            1.0
        } else {
            let a = std::f64::consts::PI * t;
            a.sin() / a
        }
    };
    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let pos = m as f64 * ratio;
        let center = pos.floor() as i64;
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for k in (center - TAPS / 2 + 1)..=(center + TAPS / 2) {
            let t = pos - k as f64;
            // Hann-windowed sinc over the tap span.
            let w = 0.5 + 0.5 * (std::f64::consts::PI * t / (TAPS / 2) as f64).cos();
            let h = 2.0 * cutoff * sinc(2.0 * cutoff * t) * w;
            let x = if k < 0 || k >= n {
                0.0
            } else {
                rec.samples[k as usize]
            };
            acc += x * h;
            wsum += h;
        }
        // Normalize for DC flatness.
        out.push(if wsum.abs() > 1e-9 { acc / wsum } else { acc });
    }
    let mut res = rec.clone();
    res.samples = out;
    res.sample_rate = target_rate;
    res
}

/// One row of the metadata sidecar CSV (`id,path,label,age,sex`).
#[derive(Debug, Clone)]
pub struct MetaRow {
    pub id: String,
    pub path: String,
    pub label: Label,
    pub age: Option<u32>,
    pub sex: Sex,
}

/// Parse a metadata sidecar CSV. Lines starting with `#` are ignored.
pub fn read_metadata_csv(path: impl AsRef<Path>) -> Result<Vec<MetaRow>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut rows = Vec::new();
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("metadata csv is empty".into()))?;
    if header.trim() != "id,path,label,age,sex" {
        return Err(Error::InvalidInput(format!(
            "metadata header must be id,path,label,age,sex (got {header:?})"
        )));
    }
    for (lineno, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(Error::InvalidInput(format!(
                "metadata line {}: expected 5 fields, got {}",
                lineno + 2,
                parts.len()
            )));
        }
        let age = match parts[3].trim() {
            "" => None,
            s => Some(s.parse::<u32>().map_err(|_| {
                Error::InvalidInput(format!("metadata line {}: bad age {s:?}", lineno + 2))
            })?),
        };
        rows.push(MetaRow {
            id: parts[0].trim().to_string(),
            path: parts[1].trim().to_string(),
            label: Label::parse(parts[2])?,
            age,
            sex: Sex::parse(parts[4])?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, dur: f64, sr: u32, amp: f64) -> Vec<f64> {
        (0..(dur * sr as f64) as usize)
            .map(|i| amp * (2.0 * std::f64::consts::PI * f * i as f64 / sr as f64).sin())
            .collect()
    }

    #[test]
    fn load_wav_decodes_silence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("silence.wav");
        let rec = Recording::new("silence", vec![0.0; 8000], 8000).unwrap();
        save_wav(&rec, &path).unwrap();
        let loaded = load_wav(&path).unwrap();
        assert_eq!(loaded.samples.len(), 8000);
        assert!(loaded.samples.iter().all(|&s| s == 0.0));
        assert_eq!(loaded.sample_rate, 8000);
    }

    #[test]
    fn full_scale_sample_normalizes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fs.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        w.write_sample(32767i16).unwrap();
        w.write_sample(-32768i16).unwrap();
        w.finalize().unwrap();
        let rec = load_wav(&path).unwrap();
        assert!((rec.samples[0] - 32767.0 / 32768.0).abs() < 1e-12);
        assert!((rec.samples[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stereo_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stereo.wav");
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..100 {
            w.write_sample(0i16).unwrap();
            w.write_sample(0i16).unwrap();
        }
        w.finalize().unwrap();
        match load_wav(&path) {
            Err(Error::UnsupportedChannels(2)) => {}
            other => panic!("expected channel error, got {other:?}"),
        }
    }

    #[test]
    fn float_wav_is_unsupported_codec() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("float.wav");
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: hound::SampleFormat::Float,
        };
        let mut w = hound::WavWriter::create(&path, spec).unwrap();
        for _ in 0..10 {
            w.write_sample(0.0f32).unwrap();
        }
        w.finalize().unwrap();
        assert!(matches!(load_wav(&path), Err(Error::UnsupportedCodec(_))));
    }

    #[test]
    fn malformed_header_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wav");
        std::fs::write(&path, b"RIFFxxxxWAVEjunkjunkjunk").unwrap();
        match load_wav(&path) {
            Err(Error::WavFormat(_)) | Err(Error::UnsupportedCodec(_)) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn trim_removes_silence_edges() {
        let sr = 8000;
        let mut samples = vec![0.0; 4000]; // 0.5 s silence
        samples.extend(tone(150.0, 3.0, sr, 0.8));
        samples.extend(vec![0.0; 4000]);
        let rec = Recording::new("t", samples, sr).unwrap();
        let trimmed = trim_phonation(&rec, &TrimConfig::default()).unwrap();
        let dur = trimmed.duration();
        assert!((dur - 3.0).abs() < 0.1, "kept {dur} s");
        // Retained RMS profile: one window in from the cut, the signal is hot.
        // (The boundary itself carries up to one 25 ms window of slack.)
        let head_rms: f64 =
            (trimmed.samples[200..400].iter().map(|s| s * s).sum::<f64>() / 200.0).sqrt();
        assert!(head_rms > 0.1, "head rms {head_rms}");
        let tail = &trimmed.samples[trimmed.samples.len() - 400..trimmed.samples.len() - 200];
        let tail_rms: f64 = (tail.iter().map(|s| s * s).sum::<f64>() / 200.0).sqrt();
        assert!(tail_rms > 0.1, "tail rms {tail_rms}");
    }

    #[test]
    fn trim_is_identity_without_silence() {
        let rec = Recording::new("t", tone(150.0, 1.0, 8000, 0.5), 8000).unwrap();
        let trimmed = trim_phonation(&rec, &TrimConfig::default()).unwrap();
        assert_eq!(trimmed.samples.len(), rec.samples.len());
    }

    #[test]
    fn trim_all_zeros_errors() {
        let rec = Recording::new("z", vec![0.0; 8000], 8000).unwrap();
        assert!(matches!(
            trim_phonation(&rec, &TrimConfig::default()),
            Err(Error::EmptyAfterTrim)
        ));
    }

    #[test]
    fn trim_is_idempotent() {
        let sr = 8000;
        let mut samples = vec![0.0; 1000];
        samples.extend(tone(120.0, 2.0, sr, 0.7));
        // Quiet interior dip stays untouched.
        for i in 8000..8400 {
            samples[i] *= 0.2;
        }
        samples.extend(vec![0.0; 700]);
        let rec = Recording::new("t", samples, sr).unwrap();
        let once = trim_phonation(&rec, &TrimConfig::default()).unwrap();
        let twice = trim_phonation(&once, &TrimConfig::default()).unwrap();
        assert_eq!(once.samples, twice.samples);
    }

    #[test]
    fn gate_thresholds() {
        let sr = 8000;
        let mk = |dur: f64| Recording::new("g", tone(150.0, dur, sr, 0.6), sr).unwrap();
        let trim = TrimConfig::default();
        assert!(!gate_recording(&mk(1.9), 2.0, &trim).accepted);
        assert!(gate_recording(&mk(2.5), 2.0, &trim).accepted);
        // Exactly at threshold: strict "less than" rejects, so 2.0 s passes.
        let d = gate_recording(&mk(2.0), 2.0, &trim);
        assert!(d.accepted, "2.0 s should be accepted, measured {}", d.voiced_duration_s);
    }

    #[test]
    fn gate_is_total_on_silence() {
        let rec = Recording::new("z", vec![0.0; 8000], 8000).unwrap();
        let d = gate_recording(&rec, 2.0, &TrimConfig::default());
        assert!(!d.accepted);
        assert_eq!(d.voiced_duration_s, 0.0);
    }

    #[test]
    fn resample_preserves_tone_frequency() {
        let rec = Recording::new("r", tone(440.0, 1.0, 44100, 0.5), 44100).unwrap();
        let out = resample(&rec, 8000);
        assert_eq!(out.sample_rate, 8000);
        assert!((out.samples.len() as f64 - 8000.0).abs() < 2.0);
        // Zero crossings per second approximate 2f.
        let zc = out
            .samples
            .windows(2)
            .filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0))
            .count();
        assert!((zc as f64 - 880.0).abs() < 10.0, "zero crossings {zc}");
    }

    #[test]
    fn metadata_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta.csv");
        std::fs::write(
            &path,
            "id,path,label,age,sex\nr1,a.wav,PD,63,F\nr2,b.wav,HC,,\n",
        )
        .unwrap();
        let rows = read_metadata_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].label, Label::Pd);
        assert_eq!(rows[0].age, Some(63));
        assert_eq!(rows[1].sex, Sex::Unknown);
        assert_eq!(rows[1].age, None);
    }
}
