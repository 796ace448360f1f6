//! Lagged EOG cross-correlation, the per-trial coefficient matrix and
//! artifactual component selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ica::ComponentSet;
use crate::linalg::Matrix;
use crate::model::Interval;
use crate::scalar::Real;

/// Lags searched satisfy `|lag| < DEFAULT_MAX_LAG` (+-6 samples, about 20 ms at 250 Hz).
pub const DEFAULT_MAX_LAG: usize = 7;

/// Most negative lagged correlation between an EOG excerpt and a signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LaggedCorrelation<T> {
    /// Clamped to `<= 0`.
    pub rho: T,
    /// Lag at which the minimum was found (`signal` delayed by `lag`).
    pub lag: isize,
}

/// Lags in search order: 0, -1, 1, -2, 2, ... so ties resolve to the smaller |lag|.
fn lag_order(max_lag: usize) -> impl Iterator<Item = isize> {
    let span = max_lag.max(1) as isize;
    (0..span).flat_map(|k| if k == 0 { vec![0] } else { vec![-k, k] })
}

/// Minimum over `|lag| < max_lag` of the normalised cross-correlation
/// `sum_i eog(i) * s(i - lag) / (T * sd(eog) * sd(s))` on mean-removed inputs,
/// with out-of-range products taken as zero. Non-negative minima clamp to 0.
///
/// Dividing by `T` makes `(x, -x)` score exactly -1. `max_lag = 0` searches
/// lag 0 only.
pub fn eog_component_correlation<T: Real>(eog: &[T], signal: &[T], max_lag: usize) -> Result<T> {
    Ok(lagged_correlation(eog, signal, max_lag)?.rho)
}

pub fn lagged_correlation<T: Real>(
    eog: &[T],
    signal: &[T],
    max_lag: usize,
) -> Result<LaggedCorrelation<T>> {
    if eog.len() != signal.len() {
        return Err(Error::Schema(format!(
            "EOG excerpt has {} samples but signal has {}",
            eog.len(),
            signal.len()
        )));
    }
    let n = eog.len();
    if n == 0 {
        return Err(Error::UndefinedCorrelation("empty excerpt".into()));
    }
    let tn = T::of_usize(n);
    let me = eog.iter().copied().sum::<T>() / tn;
    let ms = signal.iter().copied().sum::<T>() / tn;
    let e: Vec<T> = eog.iter().map(|&v| v - me).collect();
    let s: Vec<T> = signal.iter().map(|&v| v - ms).collect();
    let ve = e.iter().map(|&v| v * v).sum::<T>() / tn;
    let vs = s.iter().map(|&v| v * v).sum::<T>() / tn;
    if !(ve > T::zero()) || !(vs > T::zero()) {
        return Err(Error::UndefinedCorrelation("zero-variance input".into()));
    }
    let norm = tn * (ve * vs).sqrt();

    let mut best = LaggedCorrelation {
        rho: T::infinity(),
        lag: 0,
    };
    for lag in lag_order(max_lag) {
        let k = lag.unsigned_abs();
        if k >= n {
            continue;
        }
        // sum_i e(i) * s(i - lag) over indices where both exist
        let acc: T = if lag >= 0 {
            e[k..].iter().zip(&s[..n - k]).map(|(&a, &b)| a * b).sum()
        } else {
            e[..n - k].iter().zip(&s[k..]).map(|(&a, &b)| a * b).sum()
        };
        let r = acc / norm;
        if r < best.rho {
            best = LaggedCorrelation { rho: r, lag };
        }
    }
    if best.rho >= T::zero() {
        best.rho = T::zero();
    }
    Ok(best)
}

/// Per-signal, per-trial coefficients and their cumulative absolute sums.
pub(crate) struct CumulativeCorrelation<T> {
    pub c: Matrix<T>,
    pub lags: Vec<Vec<isize>>,
    pub cc: Vec<T>,
}

pub(crate) fn cumulative_correlation<T: Real>(
    eog: &[T],
    signals: &[&[T]],
    trials: &[Interval],
    max_lag: usize,
) -> Result<CumulativeCorrelation<T>> {
    if trials.is_empty() {
        return Err(Error::Schema("no trials to correlate over".into()));
    }
    let len = eog.len();
    if let Some(bad) = signals.iter().find(|s| s.len() != len) {
        return Err(Error::Schema(format!(
            "EOG has {len} samples but a signal has {}",
            bad.len()
        )));
    }
    if let Some(&(s, e)) = trials.iter().find(|&&(s, e)| s >= e || e > len) {
        return Err(Error::Schema(format!("trial ({s}, {e}) does not fit {len} samples")));
    }
    let m = trials.len();
    let mut c = Matrix::zeros(signals.len(), m);
    let mut lags = vec![vec![0isize; m]; signals.len()];
    for (i, sig) in signals.iter().enumerate() {
        for (j, &(s, e)) in trials.iter().enumerate() {
            let lc = lagged_correlation(&eog[s..e], &sig[s..e], max_lag)?;
            c[(i, j)] = lc.rho;
            lags[i][j] = lc.lag;
        }
    }
    let cc = (0..signals.len())
        .map(|i| c.row(i).iter().map(|v| v.abs()).sum())
        .collect();
    Ok(CumulativeCorrelation { c, lags, cc })
}

/// Matrix of per-trial EOG correlations for every component plus the
/// cumulative vector and (after [`select_artifactual`]) the chosen indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CorrelationReport<T> {
    /// Components x trials; every entry in `[-1, 0]`.
    pub c: Matrix<T>,
    /// Lag of each entry's minimum.
    pub lags: Vec<Vec<isize>>,
    /// `cc[n] = sum_m |c[n, m]|`.
    pub cc: Vec<T>,
    /// Selected components in descending `cc` order.
    pub selected: Vec<usize>,
    pub max_lag_samples: usize,
}

/// Correlates each component with the EOG channel trial by trial.
///
/// `eog` is the full-length EOG channel; it is sliced with the component
/// set's trial bounds (the whole record when none are set).
pub fn build_correlation_report<T: Real>(
    eog: &[T],
    components: &ComponentSet<T>,
    max_lag: usize,
) -> Result<CorrelationReport<T>> {
    if !components.is_selectable() {
        return Err(Error::Argument(
            "components from an artifact-diminished unmixing cannot be used for artifact selection"
                .into(),
        ));
    }
    let signals: Vec<&[T]> = components.components.iter().map(Vec::as_slice).collect();
    let cum = cumulative_correlation(eog, &signals, &components.trials_or_whole(), max_lag)?;
    Ok(CorrelationReport {
        c: cum.c,
        lags: cum.lags,
        cc: cum.cc,
        selected: Vec::new(),
        max_lag_samples: max_lag,
    })
}

/// Marks the `k` components with the largest cumulative coefficient.
/// Ties go to the lower index.
pub fn select_artifactual<T: Real>(report: &CorrelationReport<T>, k: usize) -> Result<CorrelationReport<T>> {
    let n = report.cc.len();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("k = {k} must be within 1..={n}")));
    }
    let mut out = report.clone();
    out.selected = report.ranking().into_iter().take(k).collect();
    Ok(out)
}

impl<T: Real> CorrelationReport<T> {
    /// All component indices by descending `cc`, ties by ascending index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.cc.len()).collect();
        order.sort_by(|&a, &b| {
            self.cc[b]
                .partial_cmp(&self.cc[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }

    /// `cc` of the top component minus that of the runner-up.
    pub fn dominance_margin(&self) -> T {
        let r = self.ranking();
        match r.as_slice() {
            [a, b, ..] => self.cc[*a] - self.cc[*b],
            [a] => self.cc[*a],
            [] => T::zero(),
        }
    }

    /// One row per component: trial coefficients, cumulative value, selection flag.
    pub fn to_csv(&self) -> String {
        let m = self.c.ncols();
        let mut out = String::from("component");
        for j in 0..m {
            out.push_str(&format!(",trial_{}", j + 1));
        }
        out.push_str(",cc,selected\n");
        for i in 0..self.c.nrows() {
            out.push_str(&format!("{}", i + 1));
            for j in 0..m {
                out.push_str(&format!(",{}", self.c[(i, j)]));
            }
            let sel = u8::from(self.selected.contains(&i));
            out.push_str(&format!(",{},{}\n", self.cc[i], sel));
        }
        out
    }
}
