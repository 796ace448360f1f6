//! Smoothing binary artifact marks with Blackman-window slopes.

use crate::dsp::window::blackman;
use crate::error::Result;
use crate::model::{msf_normalize, MembershipFunction, WindowedMembershipFunction};
use crate::scalar::Real;

/// Adds a rising slope before and a falling slope after every marked interval.
///
/// The slopes are the two halves of a symmetric Blackman window of
/// `2 * slope_samples + 1` points whose unit peak sits on the first (or last)
/// marked sample, so the marked core stays at 1 and the slopes extend
/// outward. Overlapping contributions combine by pointwise maximum.
/// `slope_samples = 0` reproduces the binary marks exactly.
pub fn msf_to_wmsf<T: Real>(msf: &MembershipFunction, slope_samples: usize) -> Result<WindowedMembershipFunction<T>> {
    let msf = msf_normalize(msf)?;
    let len = msf.length;
    let mut values = vec![0.0f64; len];
    let win = blackman(2 * slope_samples + 1);
    for &(start, end) in &msf.intervals {
        values[start..end].iter_mut().for_each(|v| *v = 1.0);
        for d in 1..=slope_samples {
            let w = win[slope_samples - d];
            if let Some(i) = start.checked_sub(d) {
                values[i] = values[i].max(w);
            }
            let j = end - 1 + d;
            if j < len {
                values[j] = values[j].max(w);
            }
        }
    }
    Ok(WindowedMembershipFunction {
        length: len,
        values: values.into_iter().map(|v| T::of(v.clamp(0.0, 1.0))).collect(),
        slope_samples,
    })
}
