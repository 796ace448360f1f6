//! Cleaning quality: per-channel EOG correlation and its reduction, an
//! epoch-averaging SNR, and the Amari index for scoring ICA recovery.

use serde::{Deserialize, Serialize};

use crate::artifact::cumulative_correlation;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::Recording;
use crate::scalar::{mean, Real};

/// Default epoch length of the SNR metric.
pub const DEFAULT_EPOCH_S: f64 = 1.0;

/// Cumulative EOG coefficient of every EEG channel, keyed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelCorrelation {
    pub labels: Vec<String>,
    pub cc: Vec<f64>,
}

/// Applies the component correlation measure to the EEG channels themselves,
/// trial by trial (the whole record when no trials are set).
pub fn channel_eog_cc<T: Real>(recording: &Recording<T>, max_lag: usize) -> Result<ChannelCorrelation> {
    let eog = recording
        .eog()
        .ok_or_else(|| Error::Schema("recording has no EOG channel".into()))?;
    let idx = recording.eeg_indices();
    let signals: Vec<&[T]> = idx.iter().map(|&i| recording.channel(i).samples.as_slice()).collect();
    let cum = cumulative_correlation(eog, &signals, &recording.trials_or_whole(), max_lag)?;
    Ok(ChannelCorrelation {
        labels: idx.iter().map(|&i| recording.channel(i).label.clone()).collect(),
        cc: cum.cc.iter().map(|v| v.as_f64()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub labels: Vec<String>,
    pub per_channel_before: Vec<f64>,
    pub per_channel_after: Vec<f64>,
    /// `100 * (1 - mean(after) / mean(before))`.
    pub reduction_percent: f64,
}

pub fn reduction(before: &ChannelCorrelation, after: &ChannelCorrelation) -> Result<ReductionReport> {
    if before.labels != after.labels {
        return Err(Error::Schema(format!(
            "channel sets differ: {:?} vs {:?}",
            before.labels, after.labels
        )));
    }
    if before.cc.len() != before.labels.len() || after.cc.len() != after.labels.len() {
        return Err(Error::Schema("one coefficient per channel label expected".into()));
    }
    let reduction_percent = reduction_percent(&before.cc, &after.cc)?;
    Ok(ReductionReport {
        labels: before.labels.clone(),
        per_channel_before: before.cc.clone(),
        per_channel_after: after.cc.clone(),
        reduction_percent,
    })
}

/// Relative drop of the mean coefficient, in percent.
pub fn reduction_percent(before: &[f64], after: &[f64]) -> Result<f64> {
    if before.is_empty() || before.len() != after.len() {
        return Err(Error::Schema(format!(
            "{} values before and {} after",
            before.len(),
            after.len()
        )));
    }
    if let Some(v) = before.iter().chain(after).find(|v| !(**v >= 0.0)) {
        return Err(Error::Argument(format!("coefficients must be non-negative, got {v}")));
    }
    let mb = mean(before);
    if mb == 0.0 {
        return Err(Error::Degenerate("mean coefficient before cleaning is zero".into()));
    }
    Ok(100.0 * (1.0 - mean(after) / mb))
}

impl ReductionReport {
    /// One row per channel, then a `mean` row and the reduction.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,before,after\n");
        for ((l, b), a) in self.labels.iter().zip(&self.per_channel_before).zip(&self.per_channel_after) {
            out.push_str(&format!("{l},{b},{a}\n"));
        }
        out.push_str(&format!(
            "mean,{},{}\nreduction_percent,{}\n",
            mean(&self.per_channel_before),
            mean(&self.per_channel_after),
            self.reduction_percent
        ));
        out
    }
}

/// Epoch-averaging signal-to-noise ratio. Infinite when epochs are identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrReport {
    pub epoch_len_s: f64,
    pub epoch_samples: usize,
    pub per_trial: Vec<f64>,
    pub epochs_per_trial: Vec<usize>,
    /// Computed over the epochs of all trials pooled together.
    pub global: f64,
}

impl SnrReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,epochs,snr\n");
        for (k, (s, e)) in self.per_trial.iter().zip(&self.epochs_per_trial).enumerate() {
            out.push_str(&format!("{},{e},{s}\n", k + 1));
        }
        let total: usize = self.epochs_per_trial.iter().sum();
        out.push_str(&format!("all,{total},{}\n", self.global));
        out
    }
}

/// Splits every trial into non-overlapping epochs of `epoch_len_s`, averages
/// them per channel and divides the mean power of the average by the mean
/// squared deviation of the epochs from it. Channel ratios are averaged over
/// the EEG channels. Epoch means are kept, so the metric is invariant to
/// scaling a channel but not to offsetting it.
pub fn snr<T: Real>(recording: &Recording<T>, epoch_len_s: f64) -> Result<SnrReport> {
    let epoch = (epoch_len_s * recording.sample_rate()).round();
    if !(epoch >= 2.0) {
        return Err(Error::Argument(format!(
            "epoch of {epoch_len_s} s is shorter than 2 samples"
        )));
    }
    let epoch = epoch as usize;
    let idx = recording.eeg_indices();
    if idx.is_empty() {
        return Err(Error::Schema("recording has no EEG channels".into()));
    }
    let trials = recording.trials_or_whole();
    let mut per_trial = Vec::with_capacity(trials.len());
    let mut epochs_per_trial = Vec::with_capacity(trials.len());
    let mut starts_all = Vec::new();
    for (k, &(s, e)) in trials.iter().enumerate() {
        let n = (e - s) / epoch;
        if n < 2 {
            return Err(Error::Argument(format!(
                "trial {} holds {n} epochs of {epoch} samples; at least 2 are needed",
                k + 1
            )));
        }
        let starts: Vec<usize> = (0..n).map(|j| s + j * epoch).collect();
        per_trial.push(channel_mean_snr(recording, &idx, &starts, epoch));
        epochs_per_trial.push(n);
        starts_all.extend(starts);
    }
    Ok(SnrReport {
        epoch_len_s,
        epoch_samples: epoch,
        global: channel_mean_snr(recording, &idx, &starts_all, epoch),
        per_trial,
        epochs_per_trial,
    })
}

fn channel_mean_snr<T: Real>(recording: &Recording<T>, idx: &[usize], starts: &[usize], epoch: usize) -> f64 {
    let ratios: Vec<f64> = idx
        .iter()
        .map(|&c| epoch_snr(&recording.channel(c).samples, starts, epoch))
        .collect();
    mean(&ratios)
}

fn epoch_snr<T: Real>(x: &[T], starts: &[usize], epoch: usize) -> f64 {
    let n = starts.len() as f64;
    let mut avg = vec![0.0; epoch];
    for &s in starts {
        for (a, v) in avg.iter_mut().zip(&x[s..s + epoch]) {
            *a += v.as_f64();
        }
    }
    avg.iter_mut().for_each(|a| *a /= n);
    let power = avg.iter().map(|a| a * a).sum::<f64>() / epoch as f64;
    let noise = starts
        .iter()
        .map(|&s| {
            x[s..s + epoch]
                .iter()
                .zip(&avg)
                .map(|(v, a)| (v.as_f64() - a).powi(2))
                .sum::<f64>()
        })
        .sum::<f64>()
        / (n * epoch as f64);
    if noise == 0.0 {
        f64::INFINITY
    } else {
        power / noise
    }
}

/// Amari index of `estimated * true_mixing`, in `[0, 1]` with 0 for perfect
/// recovery up to scaling and permutation.
///
/// Both inputs must be square, of equal size and invertible.
pub fn amari_index<T: Real>(estimated: &Matrix<T>, true_mixing: &Matrix<T>) -> Result<f64> {
    if !estimated.is_square() || !true_mixing.is_square() || estimated.nrows() != true_mixing.nrows() {
        return Err(Error::Schema(format!(
            "Amari index needs two square matrices of one size, got {}x{} and {}x{}",
            estimated.nrows(),
            estimated.ncols(),
            true_mixing.nrows(),
            true_mixing.ncols()
        )));
    }
    for (name, m) in [("estimated", estimated), ("true mixing", true_mixing)] {
        m.inverse()
            .map_err(|_| Error::Degenerate(format!("{name} matrix is singular")))?;
    }
    amari_of_product(&estimated.matmul(true_mixing)?)
}

/// The Amari index of an already formed product `P`:
/// `sum_i (sum_j |p_ij| / max_j |p_ij| - 1) + sum_j (sum_i |p_ij| / max_i |p_ij| - 1)`
/// divided by `2 n (n - 1)`. Only an all-zero row or column is rejected.
pub fn amari_of_product<T: Real>(p: &Matrix<T>) -> Result<f64> {
    if !p.is_square() || p.nrows() == 0 {
        return Err(Error::Schema(format!("{}x{} is not a non-empty square matrix", p.nrows(), p.ncols())));
    }
    let n = p.nrows();
    if n == 1 {
        return if p[(0, 0)] == T::zero() {
            Err(Error::Degenerate("zero 1x1 product".into()))
        } else {
            Ok(0.0)
        };
    }
    let a = |i: usize, j: usize| p[(i, j)].as_f64().abs();
    let mut total = 0.0;
    for i in 0..n {
        let (sum, max) = (0..n).fold((0.0, 0.0f64), |(s, m), j| (s + a(i, j), m.max(a(i, j))));
        if max == 0.0 {
            return Err(Error::Degenerate(format!("row {i} of the product is zero")));
        }
        total += sum / max - 1.0;
    }
    for j in 0..n {
        let (sum, max) = (0..n).fold((0.0, 0.0f64), |(s, m), i| (s + a(i, j), m.max(a(i, j))));
        if max == 0.0 {
            return Err(Error::Degenerate(format!("column {j} of the product is zero")));
        }
        total += sum / max - 1.0;
    }
    Ok(total / (2 * n * (n - 1)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn cc(labels: &[&str], v: &[f64]) -> ChannelCorrelation {
        ChannelCorrelation {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            cc: v.to_vec(),
        }
    }

    #[test]
    fn negated_eog_over_five_trials_scores_five() {
        let eog = noise(5000, 1);
        let neg: Vec<f64> = eog.iter().map(|v| -v).collect();
        let rec = Recording::new(
            250.0,
            vec![Channel::new("EOG", eog), Channel::new("Fz", neg), Channel::new("Cz", noise(5000, 2))],
            Some(0),
            None,
        )
        .unwrap()
        .with_trial_bounds(Some((0..5).map(|k| (k * 1000, k * 1000 + 1000)).collect()))
        .unwrap();
        let c = channel_eog_cc(&rec, 7).unwrap();
        assert_eq!(c.labels, vec!["Fz", "Cz"]);
        assert!((c.cc[0] - 5.0).abs() < 1e-9);
        assert!(c.cc[1] < 0.5);
    }

    #[test]
    fn independent_noise_channel_is_near_zero() {
        let rec = Recording::new(
            250.0,
            vec![Channel::new("EOG", noise(100_000, 3)), Channel::new("Cz", noise(100_000, 4))],
            Some(0),
            None,
        )
        .unwrap();
        assert!(channel_eog_cc(&rec, 7).unwrap().cc[0] < 0.1);
    }

    #[test]
    fn missing_eog_is_schema_error() {
        let rec = Recording::new(250.0, vec![Channel::new("Cz", noise(100, 4))], None, None).unwrap();
        assert!(matches!(channel_eog_cc(&rec, 7), Err(Error::Schema(_))));
    }

    #[test]
    fn reduction_examples() {
        let b = cc(&["a", "b"], &[1.0, 3.0]);
        assert_eq!(reduction(&b, &b).unwrap().reduction_percent, 0.0);
        assert_eq!(reduction(&b, &cc(&["a", "b"], &[0.0, 0.0])).unwrap().reduction_percent, 100.0);
        assert!(matches!(reduction(&b, &cc(&["b", "a"], &[0.0, 0.0])), Err(Error::Schema(_))));
        let r = reduction(&b, &cc(&["a", "b"], &[0.5, 0.5])).unwrap();
        assert!((r.reduction_percent - 75.0).abs() < 1e-12);
        // scale invariance
        let r2 = reduction(&cc(&["a", "b"], &[7.0, 21.0]), &cc(&["a", "b"], &[3.5, 3.5])).unwrap();
        assert!((r.reduction_percent - r2.reduction_percent).abs() < 1e-12);
        assert!(r.to_csv().starts_with("channel,before,after\na,1,0.5\n"));
    }

    fn single_channel(x: Vec<f64>) -> Recording<f64> {
        Recording::new(100.0, vec![Channel::new("Cz", x)], None, None).unwrap()
    }

    #[test]
    fn identical_epochs_have_infinite_snr() {
        let x: Vec<f64> = (0..1000).map(|i| (i % 100) as f64 - 40.0).collect();
        let r = snr(&single_channel(x), 1.0).unwrap();
        assert_eq!(r.global, f64::INFINITY);
        assert_eq!(r.epochs_per_trial, vec![10]);
    }

    #[test]
    fn white_noise_snr_shrinks_with_epoch_count() {
        // E[avg^2] = s^2 / n, E[dev^2] = s^2 (n - 1) / n  =>  SNR ~ 1 / (n - 1)
        let few = snr(&single_channel(noise(100 * 10, 5)), 1.0).unwrap().global;
        let many = snr(&single_channel(noise(100 * 200, 6)), 1.0).unwrap().global;
        assert!(many < few);
        assert!((few - 1.0 / 9.0).abs() < 0.05);
        assert!((many - 1.0 / 199.0).abs() < 0.002);
    }

    #[test]
    fn template_plus_noise_matches_power_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sigma = 0.5;
        let nd = Normal::new(0.0, sigma).unwrap();
        let template: Vec<f64> = (0..100).map(|i| (2.0 * std::f64::consts::PI * i as f64 / 100.0).sin()).collect();
        let x: Vec<f64> = (0..200 * 100).map(|i| template[i % 100] + nd.sample(&mut rng)).collect();
        let r = snr(&single_channel(x), 1.0).unwrap();
        let expected = 0.5 / (sigma * sigma);
        assert!((r.global / expected - 1.0).abs() < 0.1, "{} vs {expected}", r.global);
    }

    #[test]
    fn snr_is_scale_invariant_and_rejects_short_trials() {
        let x = noise(1000, 8);
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v).collect();
        let a = snr(&single_channel(x.clone()), 1.0).unwrap().global;
        let b = snr(&single_channel(y), 1.0).unwrap().global;
        assert!((a - b).abs() < 1e-12 * a);
        assert!(matches!(snr(&single_channel(x.clone()), 6.0), Err(Error::Argument(_))));
        assert!(matches!(snr(&single_channel(x), 0.01), Err(Error::Argument(_))));
    }

    #[test]
    fn amari_examples() {
        let i = Matrix::<f64>::identity(3);
        assert_eq!(amari_of_product(&i).unwrap(), 0.0);
        let sp = Matrix::from_rows(&[vec![0.0, -2.0, 0.0], vec![0.0, 0.0, 0.5], vec![3.0, 0.0, 0.0]]).unwrap();
        assert_eq!(amari_of_product(&sp).unwrap(), 0.0);
        // all ones, n = 2: every row and column contributes 2/1 - 1 = 1; 4 / (2*2*1) = 1
        let ones = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(amari_of_product(&ones).unwrap(), 1.0);
        assert!(matches!(amari_index(&ones, &i.select_rows(&[0, 1])), Err(Error::Schema(_))));
        assert!(matches!(
            amari_index(&ones, &Matrix::identity(2)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn amari_of_inverse_pair_is_zero() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0, 0.3], vec![-0.5, 1.5, 0.2], vec![0.1, 0.4, 3.0]]).unwrap();
        let v = amari_index(&a.inverse().unwrap(), &a).unwrap();
        assert!(v < 1e-12);
    }
}
