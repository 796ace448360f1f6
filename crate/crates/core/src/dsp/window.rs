//! Symmetric window functions.

use std::f64::consts::PI;

/// Symmetric Hamming window of `len` points.
pub fn hamming(len: usize) -> Vec<f64> {
    generalized_cosine(len, &[0.54, 0.46])
}

/// Symmetric Blackman window of `len` points (a0 = 0.42, a1 = 0.5, a2 = 0.08).
pub fn blackman(len: usize) -> Vec<f64> {
    generalized_cosine(len, &[0.42, 0.5, 0.08])
}

fn generalized_cosine(len: usize, coeffs: &[f64]) -> Vec<f64> {
    match len {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let denom = (len - 1) as f64;
            (0..len)
                .map(|n| {
                    let x = 2.0 * PI * n as f64 / denom;
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, &a)| {
                            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                            sign * a * (k as f64 * x).cos()
                        })
                        .sum::<f64>()
                        .max(0.0)
                })
                .collect()
        }
    }
}

/// Kaiser window of `len` points with shape parameter `beta`.
pub fn kaiser(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let half = (len - 1) as f64 / 2.0;
    (0..len)
        .map(|n| {
            let r = (n as f64 - half) / half;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Kaiser's empirical beta for a stopband attenuation in dB.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}
