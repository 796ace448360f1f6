//! Unmixing fitted on artifact-free samples only, and its comparison with
//! the standard unmixing matrix.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ica::{fit_ica, IcaConfig, UnmixingKind, UnmixingMatrix};
use crate::linalg::Matrix;
use crate::model::{msf_normalize, Channel, MembershipFunction, Recording};
use crate::scalar::Real;

/// Removes every marked sample from every channel at once.
///
/// The trial partition no longer applies to the shortened data and is dropped.
pub fn excise_artifacts<T: Real>(recording: &Recording<T>, msf: &MembershipFunction) -> Result<Recording<T>> {
    if msf.length != recording.len() {
        return Err(Error::Schema(format!(
            "membership function covers {} samples, recording has {}",
            msf.length,
            recording.len()
        )));
    }
    let msf = msf_normalize(msf)?;
    if msf.marked_count() == recording.len() {
        return Err(Error::EmptyData("every sample is marked as artifact".into()));
    }
    let keep = msf.to_mask();
    let channels = recording
        .channels()
        .iter()
        .map(|ch| {
            let samples = ch
                .samples
                .iter()
                .zip(&keep)
                .filter(|(_, &marked)| !marked)
                .map(|(&v, _)| v)
                .collect();
            Channel::new(ch.label.clone(), samples)
        })
        .collect();
    Recording::new(
        recording.sample_rate(),
        channels,
        recording.eog_index(),
        recording.trigger_index(),
    )
}

/// Fits ICA on the excised EEG channels. The result applies sample by sample,
/// so it can unmix the full-length recording, but its components are flagged
/// as unfit for artifact selection.
pub fn fit_diminished_unmixing<T: Real>(
    recording: &Recording<T>,
    msf: &MembershipFunction,
    config: &IcaConfig,
) -> Result<UnmixingMatrix<T>> {
    let excised = excise_artifacts(recording, msf)?;
    let mut w = fit_ica(&excised, config)?;
    w.kind = UnmixingKind::Diminished;
    Ok(w)
}

/// One entry of the logarithmic relative difference matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelDiffCell<T> {
    Finite(T),
    /// The two matrices agree exactly at this entry (`log10 0`).
    NegInfinity,
    /// The reference entry is zero, so the ratio is undefined.
    Undefined,
}

impl<T: Real> RelDiffCell<T> {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v.as_f64()),
            Self::NegInfinity => Some(f64::NEG_INFINITY),
            Self::Undefined => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Self::Finite(v) => v.to_string(),
            Self::NegInfinity => "-inf".into(),
            Self::Undefined => String::new(),
        }
    }
}

impl<T: Real> Serialize for RelDiffCell<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => v.serialize(s),
            Self::NegInfinity => s.serialize_str("-inf"),
            Self::Undefined => s.serialize_none(),
        }
    }
}

/// `D = W' - W` and `D_LR = log10 |D / W|` over row-norm-sorted matrices.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct UnmixingDifference<T> {
    pub channel_labels: Vec<String>,
    pub w_sorted: Matrix<T>,
    pub w_prime_sorted: Matrix<T>,
    pub d: Matrix<T>,
    pub d_lr: Vec<Vec<RelDiffCell<T>>>,
}

pub fn unmixing_difference<T: Real>(
    w: &UnmixingMatrix<T>,
    w_prime: &UnmixingMatrix<T>,
) -> Result<UnmixingDifference<T>> {
    let (a, b) = (&w.w, &w_prime.w);
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::Schema(format!(
            "W is {}x{} but W' is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if w.channel_labels != w_prime.channel_labels {
        return Err(Error::Schema(format!(
            "channel labels differ: {:?} vs {:?}",
            w.channel_labels, w_prime.channel_labels
        )));
    }
    let ws = a.select_rows(&a.rows_by_descending_norm());
    let wps = b.select_rows(&b.rows_by_descending_norm());
    let d = wps.sub(&ws)?;
    let d_lr = (0..d.nrows())
        .map(|r| {
            (0..d.ncols())
                .map(|c| {
                    let den = ws[(r, c)];
                    let num = d[(r, c)];
                    if den == T::zero() {
                        RelDiffCell::Undefined
                    } else if num == T::zero() {
                        RelDiffCell::NegInfinity
                    } else {
                        RelDiffCell::Finite((num / den).abs().log10())
                    }
                })
                .collect()
        })
        .collect();
    Ok(UnmixingDifference {
        channel_labels: w.channel_labels.clone(),
        w_sorted: ws,
        w_prime_sorted: wps,
        d,
        d_lr,
    })
}

impl<T: Real> UnmixingDifference<T> {
    /// `D` as CSV: a header of channel labels, one row per component.
    pub fn d_csv(&self) -> String {
        let mut out = self.header();
        for r in 0..self.d.nrows() {
            let row: Vec<String> = self.d.row(r).iter().map(T::to_string).collect();
            out.push_str(&format!("{},{}\n", r + 1, row.join(",")));
        }
        out
    }

    /// `D_LR` as CSV; exact agreement prints `-inf`, undefined cells are blank.
    pub fn d_lr_csv(&self) -> String {
        let mut out = self.header();
        for (r, cells) in self.d_lr.iter().enumerate() {
            let row: Vec<String> = cells.iter().map(RelDiffCell::csv).collect();
            out.push_str(&format!("{},{}\n", r + 1, row.join(",")));
        }
        out
    }

    fn header(&self) -> String {
        format!("component,{}\n", self.channel_labels.join(","))
    }

    /// True when every `D_LR` cell is a sentinel rather than a number.
    pub fn all_sentinel(&self) -> bool {
        self.d_lr
            .iter()
            .flatten()
            .all(|c| !matches!(c, RelDiffCell::Finite(_)))
    }
}
