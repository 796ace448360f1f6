//! On-disk formats.
//!
//! A recording file is the 4-byte magic `EEGR`, a little-endian `u32` header
//! length, a JSON header, then the samples as little-endian `f64`, channel
//! after channel. Membership functions are plain JSON.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Channel, Interval, MembershipFunction, Recording};
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"EEGR";
pub const FORMAT_VERSION: u32 = 1;
pub const ENCODING: &str = "f64le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingHeader {
    pub version: u32,
    pub sample_rate: f64,
    pub channel_labels: Vec<String>,
    pub eog_index: Option<usize>,
    pub trigger_index: Option<usize>,
    pub sample_count: usize,
    pub encoding: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trial_bounds: Option<Vec<Interval>>,
}

impl RecordingHeader {
    pub fn of<T: Real>(recording: &Recording<T>) -> Self {
        Self {
            version: FORMAT_VERSION,
            sample_rate: recording.sample_rate(),
            channel_labels: recording.labels(),
            eog_index: recording.eog_index(),
            trigger_index: recording.trigger_index(),
            sample_count: recording.len(),
            encoding: ENCODING.into(),
            trial_bounds: recording.trial_bounds().map(<[Interval]>::to_vec),
        }
    }

    pub fn payload_bytes(&self) -> usize {
        8 * self.channel_labels.len() * self.sample_count
    }
}

/// Serialises a recording; samples are widened to `f64`.
pub fn encode_recording<T: Real>(recording: &Recording<T>) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&RecordingHeader::of(recording))?;
    let len = u32::try_from(header.len())
        .map_err(|_| Error::Argument("recording header exceeds 4 GiB".into()))?;
    let mut out = Vec::with_capacity(8 + header.len() + 8 * recording.n_channels() * recording.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&header);
    for ch in recording.channels() {
        for v in &ch.samples {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    Ok(out)
}

/// Reads just the header of an encoded recording.
pub fn decode_header(bytes: &[u8]) -> Result<(RecordingHeader, usize)> {
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(Error::MalformedHeader("missing recording magic".into()));
    }
    let len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = bytes
        .get(8..8 + len)
        .ok_or_else(|| Error::MalformedHeader(format!("header of {len} bytes runs past end of file")))?;
    let value: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let version = value.get("version").and_then(serde_json::Value::as_u64);
    match version {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::Version {
                found: u32::try_from(v).unwrap_or(u32::MAX),
                expected: FORMAT_VERSION,
            })
        }
        None => return Err(Error::MalformedHeader("header has no numeric version".into())),
    }
    let header: RecordingHeader =
        serde_json::from_value(value).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    if header.encoding != ENCODING {
        return Err(Error::MalformedHeader(format!("unsupported encoding {:?}", header.encoding)));
    }
    Ok((header, 8 + len))
}

pub fn decode_recording(bytes: &[u8]) -> Result<Recording<f64>> {
    let (header, offset) = decode_header(bytes)?;
    let payload = &bytes[offset..];
    let expected = header.payload_bytes();
    if payload.len() != expected {
        return Err(Error::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    let n = header.sample_count;
    let channels = header
        .channel_labels
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let samples = payload[8 * n * c..8 * n * (c + 1)]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
            Channel::new(label.clone(), samples)
        })
        .collect();
    Recording::new(header.sample_rate, channels, header.eog_index, header.trigger_index)?
        .with_trial_bounds(header.trial_bounds)
}

pub fn save_recording<T: Real>(recording: &Recording<T>, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, &encode_recording(recording)?)
}

pub fn load_recording(path: impl AsRef<Path>) -> Result<Recording<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_recording(&bytes)
}

/// JSON form of a membership function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsfFile {
    pub length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<f64>,
    pub intervals: Vec<Interval>,
}

impl MsfFile {
    pub fn new(msf: &MembershipFunction, sample_rate: Option<f64>) -> Self {
        Self {
            length: msf.length,
            sample_rate,
            intervals: msf.intervals.clone(),
        }
    }

    pub fn msf(&self) -> MembershipFunction {
        MembershipFunction::new(self.length, self.intervals.clone())
    }
}

/// Reads and range-checks a membership function (not normalised).
pub fn load_msf(path: impl AsRef<Path>) -> Result<MsfFile> {
    let file: MsfFile = serde_json::from_slice(&fs::read(path)?).map_err(|e| Error::Schema(e.to_string()))?;
    file.msf().check_range()?;
    Ok(file)
}

pub fn save_msf(file: &MsfFile, path: impl AsRef<Path>) -> Result<()> {
    write_json(path, file)
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn write_json<V: Serialize + ?Sized>(path: impl AsRef<Path>, value: &V) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| Error::Argument(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Recording<f64> {
        Recording::new(
            250.0,
            vec![
                Channel::new("Fz", vec![1.5, -0.25, f64::MIN_POSITIVE, 3.0]),
                Channel::new("EOG", vec![0.1, 0.2, 0.3, -1e300]),
                Channel::new("TRIG", vec![0.0, 1.0, 0.0, 0.0]),
            ],
            Some(1),
            Some(2),
        )
        .unwrap()
        .with_trial_bounds(Some(vec![(1, 3)]))
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let r = sample();
        let back = decode_recording(&encode_recording(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        let r32 = r.cast::<f32>();
        let back32 = decode_recording(&encode_recording(&r32).unwrap()).unwrap().cast::<f32>();
        assert_eq!(back32, r32);
    }

    #[test]
    fn truncated_payload_names_sizes() {
        let bytes = encode_recording(&sample()).unwrap();
        match decode_recording(&bytes[..bytes.len() - 5]) {
            Err(Error::Truncated { expected, actual }) => {
                assert_eq!(expected, 96);
                assert_eq!(actual, 91);
            }
            other => panic!("{other:?}"),
        }
    }

    fn with_header(json: &str) -> Vec<u8> {
        let mut b = MAGIC.to_vec();
        b.extend_from_slice(&(json.len() as u32).to_le_bytes());
        b.extend_from_slice(json.as_bytes());
        b
    }

    #[test]
    fn version_and_header_errors_are_distinct() {
        let v2 = with_header(
            r#"{"version":2,"sample_rate":250,"channel_labels":[],"eog_index":null,"trigger_index":null,"sample_count":0,"encoding":"f64le"}"#,
        );
        assert!(matches!(decode_recording(&v2), Err(Error::Version { found: 2, expected: 1 })));
        assert!(matches!(decode_recording(&with_header("{not json")), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode_recording(b"XXXX\0\0\0\0"), Err(Error::MalformedHeader(_))));
        let extra = with_header(
            r#"{"version":1,"sample_rate":250,"channel_labels":[],"eog_index":null,"trigger_index":null,"sample_count":0,"encoding":"f64le","colour":1}"#,
        );
        assert!(matches!(decode_recording(&extra), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.eeg");
        save_recording(&sample(), &p).unwrap();
        assert_eq!(load_recording(&p).unwrap(), sample());
        let m = MsfFile::new(&MembershipFunction::new(10, vec![(2, 4)]), Some(250.0));
        let q = dir.path().join("m.json");
        save_msf(&m, &q).unwrap();
        assert_eq!(load_msf(&q).unwrap(), m);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }

    #[test]
    fn out_of_range_msf_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let q = dir.path().join("m.json");
        fs::write(&q, r#"{"length": 10, "intervals": [[5, 12]]}"#).unwrap();
        assert!(load_msf(&q).is_err());
    }
}
