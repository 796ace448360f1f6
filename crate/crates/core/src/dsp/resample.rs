//! Rational-ratio polyphase resampling with a Kaiser-windowed sinc prototype.

use std::f64::consts::PI;

use super::window::{kaiser, kaiser_beta};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Anti-alias cutoff as a fraction of the lower of the two Nyquist rates.
pub const ANTI_ALIAS_FRACTION: f64 = 0.8;
const STOPBAND_DB: f64 = 80.0;

/// Reduced `up / down` ratio such that `to_rate / from_rate = up / down`.
pub fn rational_ratio(from_rate: f64, to_rate: f64) -> Result<(usize, usize)> {
    if !(from_rate > 0.0 && to_rate > 0.0 && from_rate.is_finite() && to_rate.is_finite()) {
        return Err(Error::Argument(format!(
            "rates must be positive, got {from_rate} -> {to_rate}"
        )));
    }
    let mut scale = 1.0;
    for _ in 0..7 {
        let (a, b) = (from_rate * scale, to_rate * scale);
        if (a - a.round()).abs() < 1e-9 * scale && (b - b.round()).abs() < 1e-9 * scale {
            let (a, b) = (a.round() as usize, b.round() as usize);
            let g = gcd(a, b);
            return Ok((b / g, a / g));
        }
        scale *= 10.0;
    }
    Err(Error::Argument(format!(
        "ratio {to_rate}/{from_rate} is not a rational with a small denominator"
    )))
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Polyphase resampler for a fixed `up / down` ratio.
#[derive(Debug, Clone)]
pub struct Resampler<T> {
    up: usize,
    down: usize,
    delay: usize,
    /// `branches[r][q]` = prototype tap `r + q * up`, each branch summing to one.
    branches: Vec<Vec<T>>,
}

impl<T: Real> Resampler<T> {
    pub fn new(from_rate: f64, to_rate: f64) -> Result<Self> {
        let (up, down) = rational_ratio(from_rate, to_rate)?;
        if up == 1 && down == 1 {
            return Ok(Self {
                up,
                down,
                delay: 0,
                branches: vec![vec![T::one()]],
            });
        }
        // all frequencies below are normalised to the upsampled rate (cycles/sample)
        let nyq_min = 0.5 / up.max(down) as f64;
        let cutoff = ANTI_ALIAS_FRACTION * nyq_min;
        let transition = 2.0 * (1.0 - ANTI_ALIAS_FRACTION) * nyq_min;
        let mut len = ((STOPBAND_DB - 8.0) / (2.285 * 2.0 * PI * transition)).ceil() as usize;
        len += 1 - len % 2;
        let win = kaiser(len, kaiser_beta(STOPBAND_DB));
        let mid = (len - 1) / 2;
        let proto: Vec<f64> = (0..len)
            .map(|n| {
                let k = n as f64 - mid as f64;
                let s = if k == 0.0 {
                    2.0 * cutoff
                } else {
                    (2.0 * PI * cutoff * k).sin() / (PI * k)
                };
                s * win[n]
            })
            .collect();
        let branches = (0..up)
            .map(|r| {
                let taps: Vec<f64> = proto.iter().skip(r).step_by(up).copied().collect();
                let sum: f64 = taps.iter().sum();
                taps.into_iter().map(|t| T::of(t / sum)).collect()
            })
            .collect();
        Ok(Self {
            up,
            down,
            delay: mid,
            branches,
        })
    }

    pub fn ratio(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        (input_len as f64 * self.up as f64 / self.down as f64).round() as usize
    }

    pub fn process(&self, x: &[T]) -> Vec<T> {
        let n_out = self.output_len(x.len());
        let n_in = x.len() as isize;
        (0..n_out)
            .map(|j| {
                let t = j * self.down + self.delay;
                let r = t % self.up;
                let base = ((t - r) / self.up) as isize;
                let mut acc = T::zero();
                for (q, &g) in self.branches[r].iter().enumerate() {
                    let idx = base - q as isize;
                    if idx < 0 {
                        break;
                    }
                    if idx < n_in {
                        acc += g * x[idx as usize];
                    }
                }
                acc
            })
            .collect()
    }
}

/// One-shot convenience wrapper around [`Resampler`].
pub fn resample<T: Real>(signal: &[T], from_rate: f64, to_rate: f64) -> Result<Vec<T>> {
    Ok(Resampler::new(from_rate, to_rate)?.process(signal))
}
