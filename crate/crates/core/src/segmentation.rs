//! Trigger-pulse detection and trial slicing.
//!
//! Each trial is delimited by two narrow pulses on the trigger channel (onset
//! and offset); an optional extra pulse marks the end of the session. Rising
//! edges are paired in order, and an unpaired final edge is taken to be the
//! end marker.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Interval, Recording};
use crate::scalar::Real;

/// Edges closer than this are treated as one event.
pub const DEBOUNCE_S: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriggerEvents {
    pub rising_edges: Vec<usize>,
    pub threshold: f64,
}

impl TriggerEvents {
    /// Number of complete trials encoded by the edges.
    pub fn trial_count(&self) -> usize {
        self.rising_edges.len() / 2
    }
}

/// Upward crossings of the mid-range level, debounced by [`DEBOUNCE_S`].
pub fn detect_triggers<T: Real>(trigger: &[T], sample_rate: f64) -> Result<TriggerEvents> {
    if trigger.is_empty() {
        return Err(Error::NoEvents("trigger channel is empty".into()));
    }
    let (lo, hi) = trigger
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let v = v.as_f64();
            (lo.min(v), hi.max(v))
        });
    if !(hi > lo) {
        return Err(Error::NoEvents(format!("trigger channel is flat at {lo}")));
    }
    let threshold = 0.5 * (lo + hi);
    let gap = (DEBOUNCE_S * sample_rate).round() as usize;
    let mut edges: Vec<usize> = Vec::new();
    for i in 1..trigger.len() {
        if trigger[i - 1].as_f64() < threshold && trigger[i].as_f64() >= threshold {
            match edges.last() {
                Some(&last) if i - last < gap => {}
                _ => edges.push(i),
            }
        }
    }
    if edges.is_empty() {
        return Err(Error::NoEvents("no rising edge crosses the mid-range threshold".into()));
    }
    Ok(TriggerEvents {
        rising_edges: edges,
        threshold,
    })
}

/// Pairs consecutive edges into trial bounds.
pub fn trial_bounds_from_edges(edges: &[usize], length: usize) -> Result<Vec<Interval>> {
    if edges.len() < 2 {
        return Err(Error::Structure(format!(
            "expected at least 2 trigger edges (one onset/offset pair), found {}",
            edges.len()
        )));
    }
    if let Some(w) = edges.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Structure(format!(
            "trigger edges must be strictly increasing, found {} followed by {}",
            w[0], w[1]
        )));
    }
    if let Some(&e) = edges.iter().find(|&&e| e >= length) {
        return Err(Error::Range(format!("edge {e} beyond recording length {length}")));
    }
    Ok(edges.chunks_exact(2).map(|p| (p[0], p[1])).collect())
}

/// Sets the recording's trial bounds from detected trigger events.
pub fn segment<T: Real>(recording: &Recording<T>, events: &TriggerEvents) -> Result<Recording<T>> {
    let bounds = trial_bounds_from_edges(&events.rising_edges, recording.len())?;
    recording.clone().with_trial_bounds(Some(bounds))
}

/// Slices `samples` into the given trials.
pub fn slice_trials<'a, T>(samples: &'a [T], bounds: &[Interval]) -> Vec<&'a [T]> {
    bounds.iter().map(|&(s, e)| &samples[s..e]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;

    fn pulse_train(len: usize, edges: &[usize], width: usize) -> Vec<f64> {
        let mut x = vec![0.0; len];
        for &e in edges {
            x[e..(e + width).min(len)].iter_mut().for_each(|v| *v = 1.0);
        }
        x
    }

    #[test]
    fn eleven_pulses_for_five_trials() {
        let edges: Vec<usize> = (0..11).map(|k| 500 + k * 1000).collect();
        let x = pulse_train(12_000, &edges, 5);
        let ev = detect_triggers(&x, 250.0).unwrap();
        assert_eq!(ev.rising_edges, edges);
        assert_eq!(ev.trial_count(), 5);
        assert_eq!((ev.rising_edges.len() - 1) / 2, 5);
    }

    #[test]
    fn flat_signal_has_no_events() {
        assert!(matches!(detect_triggers(&[0.0f64; 100], 250.0), Err(Error::NoEvents(_))));
    }

    #[test]
    fn chatter_is_debounced() {
        let mut x = vec![0.0; 1000];
        // 0 1 0 1 1 1 ... : two crossings 2 samples apart
        x[300] = 1.0;
        x[302..320].iter_mut().for_each(|v| *v = 1.0);
        let ev = detect_triggers(&x, 250.0).unwrap();
        assert_eq!(ev.rising_edges, vec![300]);
    }

    #[test]
    fn two_edges_make_one_trial() {
        assert_eq!(trial_bounds_from_edges(&[10, 90], 100).unwrap(), vec![(10, 90)]);
    }

    #[test]
    fn end_marker_is_consumed() {
        assert_eq!(
            trial_bounds_from_edges(&[10, 20, 30, 40, 50], 100).unwrap(),
            vec![(10, 20), (30, 40)]
        );
    }

    #[test]
    fn shuffled_edges_are_a_structure_error() {
        assert!(matches!(
            trial_bounds_from_edges(&[10, 40, 30, 50], 100),
            Err(Error::Structure(_))
        ));
        assert!(matches!(trial_bounds_from_edges(&[10], 100), Err(Error::Structure(_))));
    }

    #[test]
    fn slices_and_gaps_reconstruct_channel() {
        let x: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let rec = Recording::new(250.0, vec![Channel::new("a", x.clone())], None, None).unwrap();
        let ev = TriggerEvents {
            rising_edges: vec![20, 120, 200, 310, 400],
            threshold: 0.5,
        };
        let seg = segment(&rec, &ev).unwrap();
        let bounds = seg.trial_bounds().unwrap();
        let mut rebuilt = Vec::new();
        let mut cursor = 0;
        for (&(s, e), trial) in bounds.iter().zip(slice_trials(&x, bounds)) {
            rebuilt.extend_from_slice(&x[cursor..s]);
            rebuilt.extend_from_slice(trial);
            cursor = e;
        }
        rebuilt.extend_from_slice(&x[cursor..]);
        assert_eq!(rebuilt, x);
    }
}
