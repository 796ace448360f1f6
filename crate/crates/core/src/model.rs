//! Shared data types: multichannel recordings and artifact membership functions.
//!
//! Sample intervals are half-open `[start, end)` everywhere in the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-open sample interval `[start, end)`.
pub type Interval = (usize, usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Channel<T> {
    pub label: String,
    pub samples: Vec<T>,
}

impl<T: Real> Channel<T> {
    pub fn new(label: impl Into<String>, samples: Vec<T>) -> Self {
        Self {
            label: label.into(),
            samples,
        }
    }
}

/// A sampled multichannel session, optionally with designated EOG and
/// trigger channels and a trial partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Recording<T> {
    sample_rate: f64,
    channels: Vec<Channel<T>>,
    eog_index: Option<usize>,
    trigger_index: Option<usize>,
    trial_bounds: Option<Vec<Interval>>,
}

impl<T: Real> Recording<T> {
    pub fn new(
        sample_rate: f64,
        channels: Vec<Channel<T>>,
        eog_index: Option<usize>,
        trigger_index: Option<usize>,
    ) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::Argument(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if let Some(first) = channels.first() {
            let len = first.samples.len();
            if let Some(bad) = channels.iter().find(|c| c.samples.len() != len) {
                return Err(Error::Schema(format!(
                    "channel {:?} has {} samples, expected {len}",
                    bad.label,
                    bad.samples.len()
                )));
            }
        }
        for (name, idx) in [("eog", eog_index), ("trigger", trigger_index)] {
            if let Some(i) = idx {
                if i >= channels.len() {
                    return Err(Error::Range(format!(
                        "{name} index {i} out of range for {} channels",
                        channels.len()
                    )));
                }
            }
        }
        if eog_index.is_some() && eog_index == trigger_index {
            return Err(Error::Argument(
                "eog and trigger cannot designate the same channel".into(),
            ));
        }
        Ok(Self {
            sample_rate,
            channels,
            eog_index,
            trigger_index,
            trial_bounds: None,
        })
    }

    /// Attaches a trial partition. Bounds must be sorted, non-overlapping and in range.
    pub fn with_trial_bounds(mut self, bounds: Option<Vec<Interval>>) -> Result<Self> {
        if let Some(b) = &bounds {
            validate_bounds(b, self.len())?;
        }
        self.trial_bounds = bounds;
        Ok(self)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Channel<T>> {
        self.channels
    }

    pub fn channel(&self, i: usize) -> &Channel<T> {
        &self.channels[i]
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c.samples.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.label == label)
    }

    pub fn eog_index(&self) -> Option<usize> {
        self.eog_index
    }

    pub fn trigger_index(&self) -> Option<usize> {
        self.trigger_index
    }

    pub fn eog(&self) -> Option<&[T]> {
        self.eog_index.map(|i| self.channels[i].samples.as_slice())
    }

    pub fn trigger(&self) -> Option<&[T]> {
        self.trigger_index.map(|i| self.channels[i].samples.as_slice())
    }

    /// Indices of channels that are neither EOG nor trigger.
    pub fn eeg_indices(&self) -> Vec<usize> {
        (0..self.channels.len())
            .filter(|&i| Some(i) != self.eog_index && Some(i) != self.trigger_index)
            .collect()
    }

    pub fn trial_bounds(&self) -> Option<&[Interval]> {
        self.trial_bounds.as_deref()
    }

    /// Trial bounds, or the whole recording as a single trial when none are set.
    pub fn trials_or_whole(&self) -> Vec<Interval> {
        match &self.trial_bounds {
            Some(b) if !b.is_empty() => b.clone(),
            _ => vec![(0, self.len())],
        }
    }

    /// Returns a copy whose channels carrying the given labels are replaced.
    pub fn with_replaced_channels(&self, replacements: &[Channel<T>]) -> Result<Self> {
        let mut out = self.clone();
        for ch in replacements {
            let i = self
                .index_of(&ch.label)
                .ok_or_else(|| Error::Schema(format!("no channel labelled {:?}", ch.label)))?;
            if ch.samples.len() != self.len() {
                return Err(Error::Schema(format!(
                    "replacement {:?} has {} samples, expected {}",
                    ch.label,
                    ch.samples.len(),
                    self.len()
                )));
            }
            out.channels[i] = ch.clone();
        }
        Ok(out)
    }

    /// Applies `f` to every channel selected by `select`, keeping all metadata.
    pub fn map_channels(
        &self,
        select: impl Fn(usize) -> bool,
        f: impl Fn(&[T]) -> Result<Vec<T>>,
    ) -> Result<Self> {
        let mut channels = Vec::with_capacity(self.channels.len());
        for (i, ch) in self.channels.iter().enumerate() {
            let samples = if select(i) {
                f(&ch.samples)?
            } else {
                ch.samples.clone()
            };
            channels.push(Channel::new(ch.label.clone(), samples));
        }
        Recording::new(self.sample_rate, channels, self.eog_index, self.trigger_index)
    }

    pub fn cast<U: Real>(&self) -> Recording<U> {
        Recording {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| Channel::new(c.label.clone(), c.samples.iter().map(|&v| U::of(v.as_f64())).collect()))
                .collect(),
            eog_index: self.eog_index,
            trigger_index: self.trigger_index,
            trial_bounds: self.trial_bounds.clone(),
        }
    }
}

fn validate_bounds(bounds: &[Interval], len: usize) -> Result<()> {
    let mut prev_end = 0;
    for (k, &(s, e)) in bounds.iter().enumerate() {
        if s >= e || e > len {
            return Err(Error::Range(format!(
                "trial {k} bounds ({s}, {e}) invalid for length {len}"
            )));
        }
        if k > 0 && s < prev_end {
            return Err(Error::Structure(format!(
                "trial {k} starts at {s} before previous trial ends at {prev_end}"
            )));
        }
        prev_end = e;
    }
    Ok(())
}

/// Binary per-sample artifact marking stored as half-open intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipFunction {
    pub length: usize,
    pub intervals: Vec<Interval>,
}

impl MembershipFunction {
    pub fn empty(length: usize) -> Self {
        Self {
            length,
            intervals: Vec::new(),
        }
    }

    pub fn new(length: usize, intervals: Vec<Interval>) -> Self {
        Self { length, intervals }
    }

    /// Builds the interval form of a per-sample mask.
    pub fn from_mask(mask: &[bool]) -> Self {
        let mut intervals = Vec::new();
        let mut start = None;
        for (i, &m) in mask.iter().enumerate() {
            match (m, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    intervals.push((s, i));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            intervals.push((s, mask.len()));
        }
        Self {
            length: mask.len(),
            intervals,
        }
    }

    pub fn check_range(&self) -> Result<()> {
        for &(s, e) in &self.intervals {
            if s > e || e > self.length {
                return Err(Error::Range(format!(
                    "interval ({s}, {e}) outside [0, {}]",
                    self.length
                )));
            }
        }
        Ok(())
    }

    /// Per-sample 0/1 view. Intervals need not be normalized.
    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.length];
        for &(s, e) in &self.intervals {
            let e = e.min(self.length);
            if s < e {
                mask[s..e].iter_mut().for_each(|m| *m = true);
            }
        }
        mask
    }

    pub fn values<T: Real>(&self) -> Vec<T> {
        self.to_mask()
            .into_iter()
            .map(|m| if m { T::one() } else { T::zero() })
            .collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.intervals.iter().all(|&(s, e)| s < e && e <= self.length)
            && self.intervals.windows(2).all(|w| w[0].1 < w[1].0)
    }

    /// Number of marked samples; assumes normalized intervals.
    pub fn marked_count(&self) -> usize {
        self.intervals.iter().map(|&(s, e)| e - s).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        msf_normalize(self)
    }
}

/// Sorts, merges overlapping or touching intervals and drops empty ones.
pub fn msf_normalize(msf: &MembershipFunction) -> Result<MembershipFunction> {
    msf.check_range()?;
    let mut iv: Vec<Interval> = msf.intervals.iter().copied().filter(|&(s, e)| s < e).collect();
    iv.sort_unstable();
    let mut merged: Vec<Interval> = Vec::with_capacity(iv.len());
    for (s, e) in iv {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    Ok(MembershipFunction {
        length: msf.length,
        intervals: merged,
    })
}

/// Count and duration summary of annotated artifacts.
///
/// `std_s` is the population standard deviation of interval durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationStats {
    pub count: usize,
    pub marked_samples: usize,
    pub total_samples: usize,
    pub duration_fraction: f64,
    pub mean_s: f64,
    pub std_s: f64,
    pub median_s: f64,
}

pub fn msf_stats(msf: &MembershipFunction, sample_rate: f64) -> AnnotationStats {
    let mut durations: Vec<f64> = msf
        .intervals
        .iter()
        .map(|&(s, e)| (e - s) as f64 / sample_rate)
        .collect();
    let count = durations.len();
    let marked = msf.marked_count();
    let fraction = if msf.length == 0 {
        0.0
    } else {
        marked as f64 / msf.length as f64
    };
    if count == 0 {
        return AnnotationStats {
            count: 0,
            marked_samples: 0,
            total_samples: msf.length,
            duration_fraction: 0.0,
            mean_s: 0.0,
            std_s: 0.0,
            median_s: 0.0,
        };
    }
    let mean = durations.iter().sum::<f64>() / count as f64;
    let var = durations.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / count as f64;
    durations.sort_by(f64::total_cmp);
    let median = if count % 2 == 1 {
        durations[count / 2]
    } else {
        0.5 * (durations[count / 2 - 1] + durations[count / 2])
    };
    AnnotationStats {
        count,
        marked_samples: marked,
        total_samples: msf.length,
        duration_fraction: fraction,
        mean_s: mean,
        std_s: var.sqrt(),
        median_s: median,
    }
}

/// Smoothed membership in `[0, 1]`, produced by `artifact::msf_to_wmsf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WindowedMembershipFunction<T> {
    pub length: usize,
    pub values: Vec<T>,
    pub slope_samples: usize,
}

impl<T: Real> WindowedMembershipFunction<T> {
    /// Membership 1 everywhere; turns partial rejection into complete removal.
    pub fn ones(length: usize) -> Self {
        Self {
            length,
            values: vec![T::one(); length],
            slope_samples: 0,
        }
    }

    pub fn zeros(length: usize) -> Self {
        Self {
            length,
            values: vec![T::zero(); length],
            slope_samples: 0,
        }
    }
}
