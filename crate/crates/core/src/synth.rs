//! Synthetic sessions with known ground truth.
//!
//! Neural sources alternate between autoregressive Laplace noise and
//! random-phase sinusoids; source 0 additionally carries a response that
//! repeats every second from each trial onset, so epoch averaging has
//! something to recover. Blinks form an extra source: a Poisson train of
//! biphasic raised-cosine pulses that projects positively onto every scalp
//! channel and with inverted sign onto the EOG channel. The trigger channel
//! carries one pulse at each trial onset and offset plus an end marker.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{msf_normalize, Channel, Interval, MembershipFunction, Recording};

/// Trial durations of the reference session, in seconds.
pub const REFERENCE_DURATIONS_S: [f64; 5] = [433.0, 331.0, 474.0, 487.0, 80.0];

/// Scalp channel names used for the first channels of a synthetic session.
pub const CHANNEL_NAMES: [&str; 14] = [
    "Fz", "F3", "F4", "FCz", "Cz", "C3", "C4", "T7", "T8", "CPz", "Pz", "P3", "P4", "POz",
];

pub const EOG_LABEL: &str = "EOG";
pub const TRIGGER_LABEL: &str = "TRIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    /// Neural sources; the blink source is extra.
    pub n_sources: usize,
    pub n_channels: usize,
    pub sample_rate: f64,
    pub trial_durations_s: Vec<f64>,
    /// Silence before the first trial and between trials.
    pub gap_s: f64,
    pub blink_rate_per_min: f64,
    /// Peak of the blink pulse relative to unit-variance neural sources.
    pub blink_amplitude: f64,
    pub blink_duration_s: f64,
    /// Amplitude of the trial-locked response carried by source 0.
    pub evoked_amplitude: f64,
    /// Standard deviation of the EOG's own (non-ocular, non-neural) noise.
    pub eog_noise: f64,
    /// Fraction of the summed neural sources leaking into the EOG.
    pub eog_leakage: f64,
    /// Independent white noise added to every scalp channel.
    pub sensor_noise: f64,
    /// Amplitude of an optional mains tone added to every scalp channel.
    pub line_noise_amplitude: f64,
    pub line_noise_hz: f64,
    /// Channels x neural sources; drawn from the seed when absent.
    pub mixing: Option<Matrix<f64>>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_sources: 8,
            n_channels: 9,
            sample_rate: 250.0,
            trial_durations_s: scaled_reference_durations(0.1),
            gap_s: 3.0,
            blink_rate_per_min: 20.0,
            blink_amplitude: 6.0,
            blink_duration_s: 0.3,
            evoked_amplitude: 1.0,
            eog_noise: 0.5,
            eog_leakage: 0.05,
            sensor_noise: 0.0,
            line_noise_amplitude: 0.0,
            line_noise_hz: 50.0,
            mixing: None,
            seed: 0,
        }
    }
}

/// The reference trial durations multiplied by `factor`.
pub fn scaled_reference_durations(factor: f64) -> Vec<f64> {
    REFERENCE_DURATIONS_S.iter().map(|d| d * factor).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Channels x sources, blink column last when present.
    pub mixing: Matrix<f64>,
    pub sources: Vec<Vec<f64>>,
    pub blink_source: Option<usize>,
    /// Exact union of the blink pulse supports.
    pub msf: MembershipFunction,
    pub trial_bounds: Vec<Interval>,
    /// Rising edges written to the trigger channel.
    pub trigger_edges: Vec<usize>,
    pub blink_onsets: Vec<usize>,
}

impl GroundTruth {
    /// Mixing restricted to the neural sources.
    pub fn neural_mixing(&self) -> Matrix<f64> {
        let n = self.blink_source.unwrap_or(self.mixing.ncols());
        Matrix::from_fn(self.mixing.nrows(), n, |r, c| self.mixing[(r, c)])
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Argument(m));
        if self.n_sources == 0 {
            return bad("at least one source is required".into());
        }
        if self.n_channels < self.n_sources {
            return bad(format!(
                "{} channels cannot carry {} sources",
                self.n_channels, self.n_sources
            ));
        }
        if self.n_channels > CHANNEL_NAMES.len() {
            return bad(format!("at most {} scalp channels are supported", CHANNEL_NAMES.len()));
        }
        if !(self.sample_rate > 0.0) {
            return bad(format!("sample rate must be positive, got {}", self.sample_rate));
        }
        if self.trial_durations_s.is_empty() || self.trial_durations_s.iter().any(|d| !(*d > 0.0)) {
            return bad("trial durations must be positive and non-empty".into());
        }
        let nonneg = [
            ("gap_s", self.gap_s),
            ("blink_rate_per_min", self.blink_rate_per_min),
            ("blink_amplitude", self.blink_amplitude),
            ("evoked_amplitude", self.evoked_amplitude),
            ("eog_noise", self.eog_noise),
            ("eog_leakage", self.eog_leakage),
            ("sensor_noise", self.sensor_noise),
            ("line_noise_amplitude", self.line_noise_amplitude),
        ];
        if let Some((name, v)) = nonneg.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return bad(format!("{name} must be finite and non-negative, got {v}"));
        }
        if self.gap_s * self.sample_rate < 20.0 {
            return bad("gap between trials must span at least 20 samples".into());
        }
        if self.has_blink() && !(self.blink_duration_s * self.sample_rate >= 3.0) {
            return bad("blink pulse must span at least 3 samples".into());
        }
        if let Some(m) = &self.mixing {
            if m.nrows() != self.n_channels || m.ncols() != self.n_sources {
                return bad(format!(
                    "mixing is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    self.n_channels,
                    self.n_sources
                ));
            }
            m.transpose()
                .matmul(m)?
                .inverse()
                .map_err(|_| Error::Argument("mixing lacks full column rank".into()))?;
        }
        Ok(())
    }

    fn has_blink(&self) -> bool {
        self.blink_amplitude > 0.0 && self.blink_rate_per_min > 0.0
    }
}

/// Biphasic pulse of `len` samples: a raised-cosine positive lobe over the
/// first two thirds and a negative lobe of 30 % depth over the rest. It is
/// non-zero at every one of its samples.
pub fn blink_template(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let u = (i as f64 + 0.5) / len as f64;
            if u < 2.0 / 3.0 {
                0.5 * (1.0 - (2.0 * PI * u * 1.5).cos())
            } else {
                -0.3 * 0.5 * (1.0 - (2.0 * PI * (u - 2.0 / 3.0) * 3.0).cos())
            }
        })
        .collect()
}

/// Response repeated every second from each trial onset.
fn evoked_waveform(t: f64) -> f64 {
    let phase = t.rem_euclid(1.0);
    (2.0 * PI * 4.0 * phase).sin() * (-((phase - 0.3) / 0.12).powi(2)).exp()
}

/// Generates a session and its ground truth; identical specs give identical output.
pub fn generate(spec: &SynthSpec) -> Result<(Recording<f64>, GroundTruth)> {
    spec.validate()?;
    let fs = spec.sample_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // timeline: gap, trial, gap, trial, ..., gap, end marker, gap
    let gap = (spec.gap_s * fs).round() as usize;
    let mut trial_bounds = Vec::new();
    let mut cursor = gap;
    for d in &spec.trial_durations_s {
        let len = (d * fs).round() as usize;
        trial_bounds.push((cursor, cursor + len));
        cursor += len + gap;
    }
    let end_marker = cursor - gap + gap / 2;
    let total = cursor;
    let mut trigger_edges: Vec<usize> = trial_bounds.iter().flat_map(|&(s, e)| [s, e]).collect();
    trigger_edges.push(end_marker);

    let ns = spec.n_sources;
    let mut sources: Vec<Vec<f64>> = (0..ns).map(|k| neural_source(k, total, fs, &mut rng)).collect();
    if spec.evoked_amplitude > 0.0 {
        for &(s, e) in &trial_bounds {
            for i in s..e {
                sources[0][i] += spec.evoked_amplitude * evoked_waveform((i - s) as f64 / fs);
            }
        }
    }

    let neural_mixing = match &spec.mixing {
        Some(m) => m.clone(),
        None => random_mixing(spec.n_channels, ns, &mut rng),
    };

    let mut blink_onsets = Vec::new();
    let mut blink_intervals = Vec::new();
    let blink_source = spec.has_blink().then_some(ns);
    let mut mixing = neural_mixing.clone();
    if spec.has_blink() {
        let len = (spec.blink_duration_s * fs).round() as usize;
        let template = blink_template(len);
        let mut blink = vec![0.0; total];
        let exp = Exp::new(spec.blink_rate_per_min / 60.0).expect("positive rate");
        let mut t: f64 = exp.sample(&mut rng);
        while ((t * fs) as usize) < total {
            let onset = (t * fs) as usize;
            blink_onsets.push(onset);
            let end = (onset + len).min(total);
            for (b, v) in blink[onset..end].iter_mut().zip(&template) {
                *b += spec.blink_amplitude * v;
            }
            blink_intervals.push((onset, end));
            t += exp.sample(&mut rng);
        }
        let proj: Vec<f64> = (0..spec.n_channels)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z.abs() + 0.5
            })
            .collect();
        mixing = Matrix::from_fn(spec.n_channels, ns + 1, |r, c| {
            if c < ns {
                neural_mixing[(r, c)]
            } else {
                proj[r]
            }
        });
        sources.push(blink);
    }
    let msf = msf_normalize(&MembershipFunction::new(total, blink_intervals))?;

    let mut channels: Vec<Channel<f64>> = (0..spec.n_channels)
        .map(|r| {
            let mut x = vec![0.0; total];
            for (c, s) in sources.iter().enumerate() {
                let a = mixing[(r, c)];
                for (xv, sv) in x.iter_mut().zip(s) {
                    *xv += a * sv;
                }
            }
            Channel::new(CHANNEL_NAMES[r], x)
        })
        .collect();
    if spec.sensor_noise > 0.0 {
        let nd = Normal::new(0.0, spec.sensor_noise).expect("finite noise");
        for ch in channels.iter_mut() {
            ch.samples.iter_mut().for_each(|v| *v += nd.sample(&mut rng));
        }
    }
    if spec.line_noise_amplitude > 0.0 {
        for ch in channels.iter_mut() {
            for (i, v) in ch.samples.iter_mut().enumerate() {
                *v += spec.line_noise_amplitude * (2.0 * PI * spec.line_noise_hz * i as f64 / fs).sin();
            }
        }
    }

    let mut eog = vec![0.0; total];
    if let Some(b) = blink_source {
        eog.iter_mut().zip(&sources[b]).for_each(|(e, s)| *e -= s);
    }
    if spec.eog_noise > 0.0 {
        let nd = Normal::new(0.0, spec.eog_noise).expect("finite noise");
        eog.iter_mut().for_each(|e| *e += nd.sample(&mut rng));
    }
    for s in &sources[..ns] {
        eog.iter_mut().zip(s).for_each(|(e, v)| *e += spec.eog_leakage * v);
    }
    channels.push(Channel::new(EOG_LABEL, eog));

    let pulse = ((0.02 * fs).round() as usize).max(1);
    let mut trig = vec![0.0; total];
    for &e in &trigger_edges {
        trig[e..(e + pulse).min(total)].iter_mut().for_each(|v| *v = 1.0);
    }
    channels.push(Channel::new(TRIGGER_LABEL, trig));

    let n = channels.len();
    let recording = Recording::new(fs, channels, Some(n - 2), Some(n - 1))?;
    Ok((
        recording,
        GroundTruth {
            mixing,
            sources,
            blink_source,
            msf,
            trial_bounds,
            trigger_edges,
            blink_onsets,
        },
    ))
}

/// Even sources: AR(1) Laplace noise; odd sources: random-phase sinusoids at
/// distinct frequencies. Both have unit variance and are non-Gaussian.
fn neural_source(k: usize, len: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if k % 2 == 0 {
        const PHI: f64 = 0.5;
        let gain = (1.0 - PHI * PHI).sqrt() / 2f64.sqrt();
        let mut prev = 0.0;
        (0..len)
            .map(|_| {
                let magnitude: f64 = Exp1.sample(rng);
                let laplace = if rng.random_bool(0.5) { magnitude } else { -magnitude };
                prev = PHI * prev + gain * laplace;
                prev
            })
            .collect()
    } else {
        let freq = 6.0 + 2.7 * k as f64;
        let phase = rng.random_range(0.0..2.0 * PI);
        (0..len)
            .map(|i| 2f64.sqrt() * (2.0 * PI * freq * i as f64 / fs + phase).sin())
            .collect()
    }
}

fn random_mixing(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix<f64> {
    loop {
        let m = Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
        let gram = m.transpose().matmul(&m).expect("conformable");
        if gram.inverse().is_ok() {
            return m;
        }
    }
}

/// Widens every interval by `widen_s` on both sides and merges the result,
/// modelling generous manual marking.
pub fn perturb_msf(msf: &MembershipFunction, widen_s: f64, sample_rate: f64) -> Result<MembershipFunction> {
    if !(widen_s >= 0.0) {
        return Err(Error::Argument(format!("widening must be non-negative, got {widen_s}")));
    }
    let w = (widen_s * sample_rate).round() as usize;
    let intervals = msf
        .intervals
        .iter()
        .map(|&(s, e)| (s.saturating_sub(w), (e + w).min(msf.length)))
        .collect();
    msf_normalize(&MembershipFunction::new(msf.length, intervals))
}
