//! Butterworth band-stop design realised as cascaded second-order sections.

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::LinearFilter;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One biquad `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Biquad<T> {
    pub b: [T; 3],
    pub a: [T; 2],
}

impl<T: Real> Biquad<T> {
    fn response(&self, z_inv: Complex<f64>) -> Complex<f64> {
        let [b0, b1, b2] = self.b.map(Real::as_f64);
        let [a1, a2] = self.a.map(Real::as_f64);
        let z2 = z_inv * z_inv;
        (b0 + z_inv * b1 + z2 * b2) / (1.0 + z_inv * a1 + z2 * a2)
    }

    /// Both roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex<f64>; 2] {
        let a1 = self.a[0].as_f64();
        let a2 = self.a[1].as_f64();
        let disc = Complex::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-a1 + disc) / 2.0, (-a1 - disc) / 2.0]
    }

    fn dc_gain(&self) -> T {
        (self.b[0] + self.b[1] + self.b[2]) / (T::one() + self.a[0] + self.a[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandstopDesign {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Order of the lowpass prototype; the band-stop has twice as many poles.
    pub order: usize,
    pub sample_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IirBandstop<T> {
    pub sections: Vec<Biquad<T>>,
    pub design: BandstopDesign,
}

/// Designs a digital Butterworth band-stop filter via the bilinear transform.
///
/// `order` is the prototype order (the convention of `butter(N, ..., 'stop')`),
/// so the result has `2 * order` poles in `order` biquads.
pub fn design_bandstop<T: Real>(
    sample_rate: f64,
    low_hz: f64,
    high_hz: f64,
    order: usize,
) -> Result<IirBandstop<T>> {
    let nyq = sample_rate / 2.0;
    if !(sample_rate > 0.0 && low_hz > 0.0 && low_hz < high_hz && high_hz < nyq) {
        return Err(Error::Argument(format!(
            "band edges must satisfy 0 < {low_hz} < {high_hz} < {nyq}"
        )));
    }
    if order == 0 || order % 2 != 0 {
        return Err(Error::Argument(format!("order must be even and positive, got {order}")));
    }

    let fs2 = 2.0 * sample_rate;
    let w1 = fs2 * (PI * low_hz / sample_rate).tan();
    let w2 = fs2 * (PI * high_hz / sample_rate).tan();
    let bw = w2 - w1;
    let w0sq = w1 * w2;
    // digital notch frequency of every section
    let theta0 = 2.0 * (w0sq.sqrt() / fs2).atan();
    let notch = [1.0, -2.0 * theta0.cos(), 1.0];

    let mut sections = Vec::with_capacity(order);
    for k in 0..order / 2 {
        // upper-half-plane prototype pole; its conjugate yields the mirrored sections
        let angle = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let p = Complex::from_polar(1.0, angle);
        // lowpass -> bandstop: s^2 - (bw / p) s + w0^2 = 0
        let b = -(bw / p);
        let disc = (b * b - 4.0 * w0sq).sqrt();
        for s in [(-b + disc) / 2.0, (-b - disc) / 2.0] {
            let z = (fs2 + s) / (fs2 - s);
            let a1 = -2.0 * z.re;
            let a2 = z.norm_sqr();
            let den_dc = 1.0 + a1 + a2;
            let num_dc: f64 = notch.iter().sum();
            let g = den_dc / num_dc;
            sections.push(Biquad {
                b: notch.map(|c| T::of(c * g)),
                a: [T::of(a1), T::of(a2)],
            });
        }
    }

    let filter = IirBandstop {
        sections,
        design: BandstopDesign {
            low_hz,
            high_hz,
            order,
            sample_rate,
        },
    };
    if filter.max_pole_modulus() >= 1.0 {
        return Err(Error::Internal(format!(
            "unstable band-stop realisation (max pole modulus {})",
            filter.max_pole_modulus()
        )));
    }
    Ok(filter)
}

impl<T: Real> IirBandstop<T> {
    pub fn response(&self, freq_hz: f64) -> Complex<f64> {
        let z_inv = Complex::from_polar(1.0, -2.0 * PI * freq_hz / self.design.sample_rate);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .product()
    }

    pub fn poles(&self) -> Vec<Complex<f64>> {
        self.sections.iter().flat_map(Biquad::poles).collect()
    }

    pub fn max_pole_modulus(&self) -> f64 {
        self.poles().iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

impl<T: Real> LinearFilter<T> for IirBandstop<T> {
    fn order(&self) -> usize {
        2 * self.sections.len()
    }

    fn magnitude(&self, freq_hz: f64) -> f64 {
        self.response(freq_hz).norm()
    }

    /// Cascaded transposed direct form II, each section started in the
    /// steady state for a constant input equal to `x[0]`.
    fn filter_forward(&self, x: &[T]) -> Vec<T> {
        let mut y = x.to_vec();
        if y.is_empty() {
            return y;
        }
        let mut level = x[0];
        for s in &self.sections {
            let [b0, b1, b2] = s.b;
            let [a1, a2] = s.a;
            let out_level = level * s.dc_gain();
            let mut z2 = b2 * level - a2 * out_level;
            let mut z1 = b1 * level - a1 * out_level + z2;
            for v in y.iter_mut() {
                let xin = *v;
                let out = b0 * xin + z1;
                z1 = b1 * xin - a1 * out + z2;
                z2 = b2 * xin - a2 * out;
                *v = out;
            }
            level = out_level;
        }
        y
    }
}
