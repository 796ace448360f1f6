//! Resampling and the preprocessing filter bank, applied with zero phase.

mod fir;
mod iir;
mod resample;
pub mod window;
mod zerophase;

use serde::{Deserialize, Serialize};

pub use fir::{design_fir, fir_order, FirDesign, FirFilter, FirKind, GRID_DENSITY};
pub use iir::{design_bandstop, BandstopDesign, Biquad, IirBandstop};
pub use resample::{rational_ratio, resample, Resampler, ANTI_ALIAS_FRACTION};
pub use zerophase::{apply_zero_phase, pad_len};

use crate::error::Result;
use crate::model::Recording;
use crate::scalar::Real;

/// A causal linear filter that can be run forward over a signal.
pub trait LinearFilter<T: Real> {
    /// Effective order used to size edge padding.
    fn order(&self) -> usize;

    /// Single-pass magnitude response at `freq_hz`.
    fn magnitude(&self, freq_hz: f64) -> f64;

    /// Causal filtering, started from the steady state for a constant `x[0]`.
    fn filter_forward(&self, x: &[T]) -> Vec<T>;
}

/// Parameters of the preprocessing chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    pub target_rate: f64,
    pub highpass_hz: f64,
    pub lowpass_hz: f64,
    pub bandstop_low_hz: f64,
    pub bandstop_high_hz: f64,
    pub bandstop_order: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            target_rate: 250.0,
            highpass_hz: 1.0,
            lowpass_hz: 47.0,
            bandstop_low_hz: 49.0,
            bandstop_high_hz: 51.0,
            bandstop_order: 4,
        }
    }
}

/// The three filters of the chain, designed for one sample rate.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "T: Real")]
pub struct FilterBank<T> {
    pub highpass: FirFilter<T>,
    pub lowpass: FirFilter<T>,
    pub bandstop: IirBandstop<T>,
}

impl<T: Real> FilterBank<T> {
    pub fn design(config: &FilterConfig) -> Result<Self> {
        let fs = config.target_rate;
        Ok(Self {
            highpass: design_fir(FirKind::Highpass, fs, config.highpass_hz)?,
            lowpass: design_fir(FirKind::Lowpass, fs, config.lowpass_hz)?,
            bandstop: design_bandstop(
                fs,
                config.bandstop_low_hz,
                config.bandstop_high_hz,
                config.bandstop_order,
            )?,
        })
    }

    /// High-pass, low-pass, then band-stop, each forward and backward.
    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        let y = apply_zero_phase(x, &self.highpass)?;
        let y = apply_zero_phase(&y, &self.lowpass)?;
        apply_zero_phase(&y, &self.bandstop)
    }
}

/// Resamples every channel to the target rate and filters the EEG and EOG
/// channels. The trigger channel is only resampled so its edges survive.
pub fn preprocess<T: Real>(recording: &Recording<T>, config: &FilterConfig) -> Result<Recording<T>> {
    let resampler = Resampler::<T>::new(recording.sample_rate(), config.target_rate)?;
    let bank = FilterBank::<T>::design(config)?;
    let trigger = recording.trigger_index();
    let channels = recording
        .channels()
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let resampled = resampler.process(&ch.samples);
            let samples = if Some(i) == trigger {
                resampled
            } else {
                bank.apply(&resampled)?
            };
            Ok(crate::model::Channel::new(ch.label.clone(), samples))
        })
        .collect::<Result<Vec<_>>>()?;
    Recording::new(
        config.target_rate,
        channels,
        recording.eog_index(),
        recording.trigger_index(),
    )
}
