//! Linear-phase FIR design: least-squares fit to a brick-wall response,
//! then Hamming-windowed.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::window::hamming;
use super::LinearFilter;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirKind {
    Lowpass,
    Highpass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirDesign {
    pub kind: FirKind,
    pub cutoff_hz: f64,
    pub sample_rate: f64,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FirFilter<T> {
    pub taps: Vec<T>,
    pub design: FirDesign,
}

/// Filter order rule: `floor(3 * fs / fc)`.
pub fn fir_order(sample_rate: f64, cutoff_hz: f64) -> usize {
    (3.0 * sample_rate / cutoff_hz).floor() as usize
}

/// Frequency grid points per tap used by the least-squares fit.
pub const GRID_DENSITY: usize = 16;

/// Designs a lowpass or highpass linear-phase FIR filter.
///
/// The order follows [`fir_order`]. A highpass of odd order cannot have unit
/// gain at Nyquist (even tap count forces a zero there), so its order is
/// raised by one.
pub fn design_fir<T: Real>(kind: FirKind, sample_rate: f64, cutoff_hz: f64) -> Result<FirFilter<T>> {
    if !(sample_rate > 0.0) {
        return Err(Error::Argument(format!("sample rate must be positive, got {sample_rate}")));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < sample_rate / 2.0) {
        return Err(Error::Argument(format!(
            "cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({} Hz)",
            sample_rate / 2.0
        )));
    }
    let mut order = fir_order(sample_rate, cutoff_hz);
    if order == 0 {
        order = 1;
    }
    if kind == FirKind::Highpass && order % 2 == 1 {
        order += 1;
    }
    let wc = 2.0 * PI * cutoff_hz / sample_rate;
    let desired = |w: f64| -> f64 {
        let pass = w < wc;
        match kind {
            FirKind::Lowpass => f64::from(u8::from(pass)),
            FirKind::Highpass => f64::from(u8::from(!pass)),
        }
    };

    let taps_len = order + 1;
    let grid = GRID_DENSITY * taps_len;
    let omegas: Vec<f64> = (0..grid).map(|i| (i as f64 + 0.5) * PI / grid as f64).collect();

    // Amplitude response A(w) = sum_k a_k * cos(phi_k w). On the midpoint grid
    // the cosine basis is orthogonal, so each coefficient is a projection.
    let mut h = vec![0.0f64; taps_len];
    if order % 2 == 0 {
        let m = order / 2;
        for k in 0..=m {
            let (mut num, mut den) = (0.0, 0.0);
            for &w in &omegas {
                let c = (k as f64 * w).cos();
                num += desired(w) * c;
                den += c * c;
            }
            let a = num / den;
            if k == 0 {
                h[m] = a;
            } else {
                h[m - k] = a / 2.0;
                h[m + k] = a / 2.0;
            }
        }
    } else {
        let l = taps_len / 2;
        for k in 1..=l {
            let phi = k as f64 - 0.5;
            let (mut num, mut den) = (0.0, 0.0);
            for &w in &omegas {
                let c = (phi * w).cos();
                num += desired(w) * c;
                den += c * c;
            }
            let b = num / den / 2.0;
            h[l - k] = b;
            h[l + k - 1] = b;
        }
    }

    for (t, w) in h.iter_mut().zip(hamming(taps_len)) {
        *t *= w;
    }

    // unit gain at the centre of the passband
    let gain = match kind {
        FirKind::Lowpass => h.iter().sum::<f64>(),
        FirKind::Highpass => h
            .iter()
            .enumerate()
            .map(|(n, &v)| if n % 2 == 0 { v } else { -v })
            .sum::<f64>(),
    };
    if gain.abs() < 1e-12 {
        return Err(Error::Internal("designed filter has zero passband gain".into()));
    }
    for t in &mut h {
        *t /= gain;
    }
    // enforce exact symmetry
    for i in 0..taps_len / 2 {
        let avg = 0.5 * (h[i] + h[order - i]);
        h[i] = avg;
        h[order - i] = avg;
    }

    Ok(FirFilter {
        taps: h.into_iter().map(T::of).collect(),
        design: FirDesign {
            kind,
            cutoff_hz,
            sample_rate,
            order,
        },
    })
}

impl<T: Real> FirFilter<T> {
    pub fn order(&self) -> usize {
        self.taps.len() - 1
    }

    /// Complex single-pass frequency response at `freq_hz`.
    pub fn response(&self, freq_hz: f64) -> Complex<f64> {
        let w = 2.0 * PI * freq_hz / self.design.sample_rate;
        self.taps
            .iter()
            .enumerate()
            .map(|(n, &h)| Complex::from_polar(h.as_f64(), -w * n as f64))
            .sum()
    }
}

impl<T: Real> LinearFilter<T> for FirFilter<T> {
    fn order(&self) -> usize {
        FirFilter::order(self)
    }

    fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    /// Direct-form convolution; samples before the start are held at `x[0]`,
    /// which is the steady-state initial condition for a step of that level.
    fn filter_forward(&self, x: &[T]) -> Vec<T> {
        let taps = &self.taps;
        let n = x.len();
        let mut y = vec![T::zero(); n];
        if n == 0 {
            return y;
        }
        let x0 = x[0];
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            if i + 1 >= taps.len() {
                let base = i + 1 - taps.len();
                let window = &x[base..=i];
                for (h, &v) in taps.iter().zip(window.iter().rev()) {
                    acc += *h * v;
                }
            } else {
                for (k, &h) in taps.iter().enumerate() {
                    let v = if k <= i { x[i - k] } else { x0 };
                    acc += h * v;
                }
            }
            *out = acc;
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(x: f64) -> f64 {
        20.0 * x.log10()
    }

    #[test]
    fn orders_follow_rule() {
        let lp = design_fir::<f64>(FirKind::Lowpass, 250.0, 47.0).unwrap();
        assert_eq!(lp.design.order, 15);
        assert_eq!(lp.taps.len(), 16);
        let hp = design_fir::<f64>(FirKind::Highpass, 250.0, 1.0).unwrap();
        assert_eq!(hp.design.order, 750);
        assert_eq!(hp.taps.len(), 751);
    }

    #[test]
    fn odd_highpass_order_is_raised() {
        // floor(3 * 250 / 50) = 15
        let hp = design_fir::<f64>(FirKind::Highpass, 250.0, 50.0).unwrap();
        assert_eq!(hp.design.order, 16);
        assert!((hp.magnitude(125.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn taps_are_symmetric() {
        for (kind, fc) in [(FirKind::Lowpass, 47.0), (FirKind::Highpass, 1.0), (FirKind::Lowpass, 10.0)] {
            let f = design_fir::<f64>(kind, 250.0, fc).unwrap();
            let n = f.order();
            for i in 0..=n {
                assert!((f.taps[i] - f.taps[n - i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn passband_gains() {
        let lp = design_fir::<f64>(FirKind::Lowpass, 250.0, 47.0).unwrap();
        assert!((lp.magnitude(0.0) - 1.0).abs() < 1e-3);
        let g10 = db(lp.magnitude(10.0));
        assert!(g10.abs() <= 1.0, "lowpass gain at 10 Hz = {g10} dB");
        let hp = design_fir::<f64>(FirKind::Highpass, 250.0, 1.0).unwrap();
        assert!((hp.magnitude(125.0) - 1.0).abs() < 1e-3);
        assert!(db(hp.magnitude(10.0)).abs() < 0.1);
        assert!(db(hp.magnitude(0.1)) < -20.0);
    }

    #[test]
    fn cutoff_at_nyquist_is_rejected() {
        assert!(matches!(
            design_fir::<f64>(FirKind::Lowpass, 250.0, 125.0),
            Err(Error::Argument(_))
        ));
        assert!(design_fir::<f64>(FirKind::Highpass, 250.0, 0.0).is_err());
    }

    #[test]
    fn least_squares_matches_truncated_ideal_response() {
        // With a zero-width transition the continuous least-squares optimum is
        // the truncated ideal impulse response; the dense grid must agree.
        let order = 20usize;
        let fs = 250.0;
        let fc = fs * 3.0 / order as f64 * 0.999; // keeps floor(3 fs / fc) == order
        let f = design_fir::<f64>(FirKind::Lowpass, fs, fc).unwrap();
        assert_eq!(f.order(), order);
        let wc = 2.0 * PI * fc / fs;
        let win = hamming(order + 1);
        let ideal: Vec<f64> = (0..=order)
            .map(|n| {
                let k = n as f64 - order as f64 / 2.0;
                if k == 0.0 { wc / PI } else { (wc * k).sin() / (PI * k) }
            })
            .zip(&win)
            .map(|(h, w)| h * w)
            .collect();
        let s: f64 = ideal.iter().sum();
        for (a, b) in f.taps.iter().zip(&ideal) {
            assert!((a - b / s).abs() < 2e-3, "{a} vs {}", b / s);
        }
    }
}
