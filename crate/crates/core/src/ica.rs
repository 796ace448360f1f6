//! Whitening and symmetric fixed-point ICA.
//!
//! The fitted [`UnmixingMatrix`] maps mean-removed raw channels to components,
//! `s = W (x - mean)`, and its inverse remixes components back into channels
//! with the stored means restored.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{Channel, Interval, Recording};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Nonlinearity {
    /// `g(u) = tanh(u)`, robust for both sub- and super-Gaussian sources.
    Tanh,
    /// `g(u) = u^3` (kurtosis-based).
    Cube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IcaConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub nonlinearity: Nonlinearity,
}

impl Default for IcaConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-6,
            seed: 0,
            nonlinearity: Nonlinearity::Tanh,
        }
    }
}

impl IcaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Argument("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Whether an unmixing matrix was fitted on the full data or on data with
/// annotated artifacts excised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnmixingKind {
    Standard,
    /// Fitted on excised data. Components from it carry no dedicated artifact
    /// source and must not be fed to artifact selection.
    Diminished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct UnmixingMatrix<T> {
    /// Components x channels.
    pub w: Matrix<T>,
    /// Channels x components; the inverse of `w`.
    pub mixing: Matrix<T>,
    pub channel_labels: Vec<String>,
    pub whitener: Matrix<T>,
    /// Orthonormal rotation applied after whitening (`w = rotation * whitener`).
    pub rotation: Matrix<T>,
    pub means: Vec<T>,
    pub converged: bool,
    pub iterations: usize,
    pub config: IcaConfig,
    pub kind: UnmixingKind,
}

impl<T: Real> UnmixingMatrix<T> {
    pub fn identity(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            w: Matrix::identity(n),
            mixing: Matrix::identity(n),
            channel_labels: labels,
            whitener: Matrix::identity(n),
            rotation: Matrix::identity(n),
            means: vec![T::zero(); n],
            converged: true,
            iterations: 0,
            config: IcaConfig::default(),
            kind: UnmixingKind::Standard,
        }
    }

    /// Builds an unmixing matrix from an explicit `w`; the mixing matrix is its inverse.
    pub fn from_matrix(w: Matrix<T>, labels: Vec<String>, means: Vec<T>) -> Result<Self> {
        if !w.is_square() || w.nrows() != labels.len() || means.len() != labels.len() {
            return Err(Error::Schema(format!(
                "unmixing matrix {}x{} does not fit {} labels and {} means",
                w.nrows(),
                w.ncols(),
                labels.len(),
                means.len()
            )));
        }
        let mixing = w.inverse()?;
        let n = labels.len();
        Ok(Self {
            rotation: Matrix::identity(n),
            whitener: w.clone(),
            w,
            mixing,
            channel_labels: labels,
            means,
            converged: true,
            iterations: 0,
            config: IcaConfig::default(),
            kind: UnmixingKind::Standard,
        })
    }

    pub fn n_components(&self) -> usize {
        self.w.nrows()
    }
}

/// Independent components, keeping the trial partition of their recording.
#[derive(Debug, Clone)]
pub struct ComponentSet<T> {
    pub components: Vec<Vec<T>>,
    pub trial_bounds: Option<Vec<Interval>>,
    pub sample_rate: f64,
    pub source: Arc<UnmixingMatrix<T>>,
}

impl<T: Real> ComponentSet<T> {
    pub fn len(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn trials_or_whole(&self) -> Vec<Interval> {
        match &self.trial_bounds {
            Some(b) if !b.is_empty() => b.clone(),
            _ => vec![(0, self.len())],
        }
    }

    /// Components from a diminished unmixing are not eligible for artifact selection.
    pub fn is_selectable(&self) -> bool {
        self.source.kind == UnmixingKind::Standard
    }

    pub fn with_components(&self, components: Vec<Vec<T>>) -> Self {
        Self {
            components,
            trial_bounds: self.trial_bounds.clone(),
            sample_rate: self.sample_rate,
            source: Arc::clone(&self.source),
        }
    }
}

/// Output of [`whiten`].
#[derive(Debug, Clone)]
pub struct Whitened<T> {
    pub data: Vec<Vec<T>>,
    pub matrix: Matrix<T>,
    pub means: Vec<T>,
    /// Covariance eigenvalues, descending.
    pub eigenvalues: Vec<T>,
}

fn condition_limit<T: Real>() -> f64 {
    1e12f64.min(0.01 / T::epsilon().as_f64())
}

/// Centres the channels and decorrelates them to unit variance using the
/// eigendecomposition of the channel covariance.
pub fn whiten<T: Real>(data: &[&[T]]) -> Result<Whitened<T>> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyData("no channels to whiten".into()));
    }
    let t = data[0].len();
    if data.iter().any(|c| c.len() != t) {
        return Err(Error::Schema("channels differ in length".into()));
    }
    if t <= n {
        return Err(Error::Argument(format!(
            "need more samples than channels to whiten ({t} samples, {n} channels)"
        )));
    }
    let tn = T::of_usize(t);
    let means: Vec<T> = data.iter().map(|c| c.iter().copied().sum::<T>() / tn).collect();
    let centred: Vec<Vec<T>> = data
        .iter()
        .zip(&means)
        .map(|(c, &m)| c.iter().map(|&v| v - m).collect())
        .collect();
    let cov = covariance(&centred);
    let (vals, vecs) = cov.symmetric_eigen()?;
    let top = vals[0];
    let limit = condition_limit::<T>();
    if !(top > T::zero()) {
        return Err(Error::Degenerate("covariance is zero".into()));
    }
    for (k, &v) in vals.iter().enumerate() {
        if !(v > T::zero()) || (top / v).as_f64() >= limit {
            return Err(Error::Degenerate(format!(
                "covariance is rank deficient: eigen-dimension {k} of {n} has eigenvalue {v} (largest {top})"
            )));
        }
    }
    let matrix = Matrix::from_fn(n, n, |r, c| vecs[(c, r)] / vals[r].sqrt());
    let refs: Vec<&[T]> = centred.iter().map(Vec::as_slice).collect();
    let data = project(&matrix, &refs);
    Ok(Whitened {
        data,
        matrix,
        means,
        eigenvalues: vals,
    })
}

fn covariance<T: Real>(centred: &[Vec<T>]) -> Matrix<T> {
    let n = centred.len();
    let tn = T::of_usize(centred[0].len());
    let mut cov = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = centred[i]
                .iter()
                .zip(&centred[j])
                .map(|(&a, &b)| a * b)
                .sum::<T>()
                / tn;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// `out[r] = sum_c m[r][c] * data[c]`.
fn project<T: Real>(m: &Matrix<T>, data: &[&[T]]) -> Vec<Vec<T>> {
    let t = data.first().map_or(0, |c| c.len());
    (0..m.nrows())
        .map(|r| {
            let mut out = vec![T::zero(); t];
            for (c, chan) in data.iter().enumerate() {
                let coef = m[(r, c)];
                if coef == T::zero() {
                    continue;
                }
                for (o, &v) in out.iter_mut().zip(chan.iter()) {
                    *o += coef * v;
                }
            }
            out
        })
        .collect()
}

/// `(W W^T)^(-1/2) W`.
fn symmetric_decorrelation<T: Real>(w: &Matrix<T>) -> Result<Matrix<T>> {
    let wwt = w.matmul(&w.transpose())?;
    let (vals, vecs) = wwt.symmetric_eigen()?;
    if vals.iter().any(|&v| !(v > T::zero())) {
        return Err(Error::Degenerate("rotation collapsed during decorrelation".into()));
    }
    let n = w.nrows();
    let inv_sqrt = Matrix::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| vecs[(r, k)] * vecs[(c, k)] / vals[k].sqrt())
            .sum::<T>()
    });
    inv_sqrt.matmul(w)
}

/// Fits ICA on the EEG channels of a recording (EOG and trigger excluded).
pub fn fit_ica<T: Real>(recording: &Recording<T>, config: &IcaConfig) -> Result<UnmixingMatrix<T>> {
    let idx = recording.eeg_indices();
    let data: Vec<&[T]> = idx.iter().map(|&i| recording.channel(i).samples.as_slice()).collect();
    let labels = idx.iter().map(|&i| recording.channel(i).label.clone()).collect();
    fit_ica_channels(&data, labels, config)
}

/// Fits ICA on explicit channel data.
///
/// Components are ordered by descending row norm of the composed unmixing matrix.
pub fn fit_ica_channels<T: Real>(
    data: &[&[T]],
    labels: Vec<String>,
    config: &IcaConfig,
) -> Result<UnmixingMatrix<T>> {
    config.validate()?;
    if labels.len() != data.len() {
        return Err(Error::Schema(format!(
            "{} labels for {} channels",
            labels.len(),
            data.len()
        )));
    }
    let white = whiten(data)?;
    let n = data.len();
    let t = white.data[0].len();
    let tn = T::of_usize(t);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = Matrix::from_fn(n, n, |_, _| {
        let v: f64 = StandardNormal.sample(&mut rng);
        T::of(v)
    });
    let mut rot = symmetric_decorrelation(&init)?;
    let tol = T::of(config.tolerance);
    let three = T::of(3.0);

    let mut converged = false;
    let mut iterations = 0;
    let zrefs: Vec<&[T]> = white.data.iter().map(Vec::as_slice).collect();
    for it in 1..=config.max_iterations {
        iterations = it;
        let mut next = Matrix::zeros(n, n);
        for i in 0..n {
            let wi = rot.row(i).to_vec();
            let mut y = vec![T::zero(); t];
            for (k, z) in zrefs.iter().enumerate() {
                let c = wi[k];
                for (yv, &zv) in y.iter_mut().zip(z.iter()) {
                    *yv += c * zv;
                }
            }
            let mut dsum = T::zero();
            for yv in y.iter_mut() {
                let u = *yv;
                let (g, dg) = match config.nonlinearity {
                    Nonlinearity::Tanh => {
                        let g = u.tanh();
                        (g, T::one() - g * g)
                    }
                    Nonlinearity::Cube => (u * u * u, three * u * u),
                };
                *yv = g;
                dsum += dg;
            }
            let dmean = dsum / tn;
            let row = next.row_mut(i);
            for (k, z) in zrefs.iter().enumerate() {
                let e = z.iter().zip(&y).map(|(&a, &b)| a * b).sum::<T>() / tn;
                row[k] = e - dmean * wi[k];
            }
        }
        let next = symmetric_decorrelation(&next)?;
        let change = (0..n)
            .map(|i| {
                let d: T = next.row(i).iter().zip(rot.row(i)).map(|(&a, &b)| a * b).sum();
                (d.abs() - T::one()).abs()
            })
            .fold(T::zero(), T::max);
        rot = next;
        if change < tol {
            converged = true;
            break;
        }
    }

    let w = rot.matmul(&white.matrix)?;
    let order = w.rows_by_descending_norm();
    let mut w = w.select_rows(&order);
    let mut rotation = rot.select_rows(&order);
    let mut mixing = w.inverse()?;
    orient_components(&mut w, &mut rotation, &mut mixing);
    Ok(UnmixingMatrix {
        w,
        mixing,
        channel_labels: labels,
        whitener: white.matrix,
        rotation,
        means: white.means,
        converged,
        iterations,
        config: config.clone(),
        kind: UnmixingKind::Standard,
    })
}

/// Fixes the sign ambiguity of ICA: every component is flipped so that the
/// largest-magnitude entry of its scalp projection (its mixing column) is
/// positive. Scalp-positive artifacts therefore appear with positive sign in
/// their component, which the EOG polarity rule of artifact selection relies on.
fn orient_components<T: Real>(w: &mut Matrix<T>, rotation: &mut Matrix<T>, mixing: &mut Matrix<T>) {
    for c in 0..mixing.ncols() {
        let col = mixing.column(c);
        let peak = col
            .iter()
            .copied()
            .fold(T::zero(), |best, v| if v.abs() > best.abs() { v } else { best });
        if peak < T::zero() {
            w.row_mut(c).iter_mut().for_each(|v| *v = -*v);
            rotation.row_mut(c).iter_mut().for_each(|v| *v = -*v);
            for r in 0..mixing.nrows() {
                mixing[(r, c)] = -mixing[(r, c)];
            }
        }
    }
}

/// `s = W (x - mean)` for the channels named by `w`.
pub fn unmix<T: Real>(w: &UnmixingMatrix<T>, recording: &Recording<T>) -> Result<ComponentSet<T>> {
    let data = w
        .channel_labels
        .iter()
        .map(|l| {
            recording
                .index_of(l)
                .map(|i| recording.channel(i).samples.as_slice())
                .ok_or_else(|| Error::Schema(format!("recording has no channel labelled {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let centred: Vec<Vec<T>> = data
        .iter()
        .zip(&w.means)
        .map(|(c, &m)| c.iter().map(|&v| v - m).collect())
        .collect();
    let refs: Vec<&[T]> = centred.iter().map(Vec::as_slice).collect();
    Ok(ComponentSet {
        components: project(&w.w, &refs),
        trial_bounds: recording.trial_bounds().map(<[Interval]>::to_vec),
        sample_rate: recording.sample_rate(),
        source: Arc::new(w.clone()),
    })
}

/// `x = W^-1 s + mean`; returns a recording holding only the unmixed channels.
pub fn remix<T: Real>(w: &UnmixingMatrix<T>, components: &ComponentSet<T>) -> Result<Recording<T>> {
    if components.n_components() != w.n_components() {
        return Err(Error::Schema(format!(
            "{} components for a {}-component unmixing matrix",
            components.n_components(),
            w.n_components()
        )));
    }
    let refs: Vec<&[T]> = components.components.iter().map(Vec::as_slice).collect();
    let mut chans = project(&w.mixing, &refs);
    for (c, &m) in chans.iter_mut().zip(&w.means) {
        c.iter_mut().for_each(|v| *v += m);
    }
    let channels = w
        .channel_labels
        .iter()
        .zip(chans)
        .map(|(l, s)| Channel::new(l.clone(), s))
        .collect();
    Recording::new(components.sample_rate, channels, None, None)?
        .with_trial_bounds(components.trial_bounds.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::Uniform;

    fn uniform_sources(n: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Uniform::new(-1.0, 1.0).unwrap();
        (0..n).map(|_| (0..t).map(|_| u.sample(&mut rng)).collect()).collect()
    }

    fn mix(a: &Matrix<f64>, s: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let refs: Vec<&[f64]> = s.iter().map(Vec::as_slice).collect();
        project(a, &refs)
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    /// Amari index computed independently of the eval module.
    fn amari(p: &Matrix<f64>) -> f64 {
        let n = p.nrows();
        let a = p.map(f64::abs);
        let mut total = 0.0;
        for i in 0..n {
            let row = a.row(i);
            let m = row.iter().copied().fold(0.0, f64::max);
            total += row.iter().sum::<f64>() / m - 1.0;
        }
        for j in 0..n {
            let col = a.column(j);
            let m = col.iter().copied().fold(0.0, f64::max);
            total += col.iter().sum::<f64>() / m - 1.0;
        }
        total / (2.0 * n as f64 * (n as f64 - 1.0))
    }

    #[test]
    fn whitened_covariance_is_identity() {
        let s = uniform_sources(3, 20_000, 1);
        let a = Matrix::from_rows(&[vec![1.0, 0.5, 0.2], vec![0.3, 2.0, 0.1], vec![0.0, 0.4, 1.5]])
            .unwrap();
        let mut x = mix(&a, &s);
        x[0].iter_mut().for_each(|v| *v += 7.0);
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let wh = whiten(&refs).unwrap();
        let cov = covariance(&wh.data);
        assert!(cov.max_abs_diff(&Matrix::identity(3)) < 1e-6);
        for c in &wh.data {
            assert!(c.iter().sum::<f64>().abs() / 20_000.0 < 1e-9);
        }
        assert!(wh.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn white_noise_gives_near_orthogonal_whitener() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let wh = whiten(&refs).unwrap();
        let wwt = wh.matrix.matmul(&wh.matrix.transpose()).unwrap();
        assert!(wwt.max_abs_diff(&Matrix::identity(4)) < 5e-2);
    }

    #[test]
    fn duplicated_channel_is_degenerate() {
        let s = uniform_sources(2, 1000, 2);
        let refs: Vec<&[f64]> = vec![&s[0], &s[1], &s[0]];
        let err = whiten(&refs).unwrap_err();
        assert!(matches!(err, Error::Degenerate(ref m) if m.contains("eigen-dimension 2")), "{err}");
    }

    #[test]
    fn constant_channel_is_degenerate() {
        let s = uniform_sources(2, 1000, 2);
        let flat = vec![4.0; 1000];
        let refs: Vec<&[f64]> = vec![&s[0], &flat, &s[1]];
        assert!(matches!(whiten(&refs), Err(Error::Degenerate(_))));
    }

    #[test]
    fn recovers_two_uniform_sources() {
        let s = uniform_sources(2, 100_000, 7);
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let x = mix(&a, &s);
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let w = fit_ica_channels(&refs, labels(2), &IcaConfig::default()).unwrap();
        assert!(w.converged);
        let p = w.w.matmul(&a).unwrap();
        assert!(amari(&p) < 0.05, "amari {}", amari(&p));
    }

    #[test]
    fn identity_mixing_recovers_whitening_inverse() {
        let s = uniform_sources(3, 100_000, 11);
        let refs: Vec<&[f64]> = s.iter().map(Vec::as_slice).collect();
        let w = fit_ica_channels(&refs, labels(3), &IcaConfig::default()).unwrap();
        assert!(amari(&w.w) < 0.05);
    }

    #[test]
    fn rotation_rows_are_orthonormal_and_w_inverts() {
        let s = uniform_sources(4, 20_000, 5);
        let a = Matrix::from_fn(4, 4, |r, c| if r == c { 2.0 } else { 0.3 * (r + c) as f64 });
        let x = mix(&a, &s);
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let w = fit_ica_channels(&refs, labels(4), &IcaConfig::default()).unwrap();
        let rrt = w.rotation.matmul(&w.rotation.transpose()).unwrap();
        assert!(rrt.max_abs_diff(&Matrix::identity(4)) < 1e-6);
        let wm = w.w.matmul(&w.mixing).unwrap();
        assert!(wm.max_abs_diff(&Matrix::identity(4)) < 1e-8);
        let norms: Vec<f64> = (0..4).map(|r| w.w.row_norm(r)).collect();
        assert!(norms.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn component_signs_follow_scalp_projection() {
        let s = uniform_sources(3, 20_000, 13);
        let a = Matrix::from_rows(&[vec![1.0, -0.5, 0.2], vec![0.3, -2.0, 0.1], vec![0.0, 0.4, -1.5]])
            .unwrap();
        let x = mix(&a, &s);
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        for seed in 0..4 {
            let cfg = IcaConfig { seed, ..IcaConfig::default() };
            let w = fit_ica_channels(&refs, labels(3), &cfg).unwrap();
            for c in 0..3 {
                let col = w.mixing.column(c);
                let peak = col.iter().copied().fold(0.0f64, |b, v| if v.abs() > b.abs() { v } else { b });
                assert!(peak > 0.0);
            }
            assert!(w.w.matmul(&w.mixing).unwrap().max_abs_diff(&Matrix::identity(3)) < 1e-8);
        }
    }

    #[test]
    fn fit_is_deterministic_for_a_seed() {
        let s = uniform_sources(3, 10_000, 9);
        let refs: Vec<&[f64]> = s.iter().map(Vec::as_slice).collect();
        let cfg = IcaConfig { seed: 42, ..IcaConfig::default() };
        let a = fit_ica_channels(&refs, labels(3), &cfg).unwrap();
        let b = fit_ica_channels(&refs, labels(3), &cfg).unwrap();
        assert_eq!(a.w.as_slice(), b.w.as_slice());
    }

    #[test]
    fn gaussian_sources_do_not_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let cfg = IcaConfig { max_iterations: 100, ..IcaConfig::default() };
        let w = fit_ica_channels(&refs, labels(4), &cfg).unwrap();
        assert!(!w.converged);
        assert_eq!(w.iterations, 100);
    }

    #[test]
    fn cube_nonlinearity_separates_sub_gaussian_sources() {
        let s = uniform_sources(2, 50_000, 13);
        let a = Matrix::from_rows(&[vec![1.0, 0.6], vec![0.4, 1.0]]).unwrap();
        let x = mix(&a, &s);
        let refs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let cfg = IcaConfig { nonlinearity: Nonlinearity::Cube, ..IcaConfig::default() };
        let w = fit_ica_channels(&refs, labels(2), &cfg).unwrap();
        assert!(amari(&w.w.matmul(&a).unwrap()) < 0.05);
    }

    fn recording_of(x: Vec<Vec<f64>>) -> Recording<f64> {
        let chans = x
            .into_iter()
            .enumerate()
            .map(|(i, s)| Channel::new(format!("c{i}"), s))
            .collect();
        Recording::new(250.0, chans, None, None).unwrap()
    }

    #[test]
    fn identity_unmix_returns_channels() {
        let rec = recording_of(uniform_sources(3, 100, 1));
        let w = UnmixingMatrix::identity(rec.labels());
        let comps = unmix(&w, &rec).unwrap();
        for (c, ch) in comps.components.iter().zip(rec.channels()) {
            assert_eq!(c, &ch.samples);
        }
    }

    #[test]
    fn remix_inverts_unmix() {
        let s = uniform_sources(3, 5000, 4);
        let a = Matrix::from_rows(&[vec![1.0, 0.5, 0.2], vec![0.3, 2.0, 0.1], vec![0.0, 0.4, 1.5]])
            .unwrap();
        let mut x = mix(&a, &s);
        x[1].iter_mut().for_each(|v| *v -= 3.0);
        let rec = recording_of(x);
        let w = fit_ica(&rec, &IcaConfig::default()).unwrap();
        let back = remix(&w, &unmix(&w, &rec).unwrap()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (a, b) in back.channels().iter().zip(rec.channels()) {
            for (u, v) in a.samples.iter().zip(&b.samples) {
                num += (u - v) * (u - v);
                den += v * v;
            }
        }
        assert!((num / den).sqrt() < 1e-8);
    }

    #[test]
    fn zeroed_components_remix_to_channel_means() {
        let s = uniform_sources(2, 5000, 4);
        let mut x = s.clone();
        x[0].iter_mut().for_each(|v| *v += 5.0);
        let rec = recording_of(x);
        let w = fit_ica(&rec, &IcaConfig::default()).unwrap();
        let comps = unmix(&w, &rec).unwrap();
        let zeroed = comps.with_components(vec![vec![0.0; 5000]; 2]);
        let back = remix(&w, &zeroed).unwrap();
        for (ch, &m) in back.channels().iter().zip(&w.means) {
            assert!(ch.samples.iter().all(|&v| v == m));
        }
    }

    #[test]
    fn unmix_rejects_unknown_labels() {
        let rec = recording_of(uniform_sources(2, 100, 1));
        let w = UnmixingMatrix::<f64>::identity(vec!["c0".into(), "zz".into()]);
        assert!(matches!(unmix(&w, &rec), Err(Error::Schema(_))));
    }

    #[test]
    fn remix_rejects_wrong_component_count() {
        let rec = recording_of(uniform_sources(2, 100, 1));
        let w = UnmixingMatrix::identity(rec.labels());
        let comps = unmix(&w, &rec).unwrap();
        let w3 = UnmixingMatrix::<f64>::identity(labels(3));
        assert!(matches!(remix(&w3, &comps), Err(Error::Schema(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let s = uniform_sources(2, 50_000, 17);
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let x: Vec<Vec<f32>> = mix(&a, &s)
            .into_iter()
            .map(|c| c.into_iter().map(|v| v as f32).collect())
            .collect();
        let refs: Vec<&[f32]> = x.iter().map(Vec::as_slice).collect();
        let cfg = IcaConfig { tolerance: 1e-4, ..IcaConfig::default() };
        let w = fit_ica_channels(&refs, labels(2), &cfg).unwrap();
        let p = w.w.cast::<f64>().matmul(&a).unwrap();
        assert!(amari(&p) < 0.05);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let s = uniform_sources(2, 100, 1);
        let refs: Vec<&[f64]> = s.iter().map(Vec::as_slice).collect();
        let cfg = IcaConfig { tolerance: 0.0, ..IcaConfig::default() };
        assert!(matches!(fit_ica_channels(&refs, labels(2), &cfg), Err(Error::Argument(_))));
    }
}
