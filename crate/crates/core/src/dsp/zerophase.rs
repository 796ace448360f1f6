//! Forward-backward (zero-phase) filtering with odd-reflection edge padding.

use super::LinearFilter;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Padding length on each side: three times the filter order.
pub fn pad_len<T: Real, F: LinearFilter<T> + ?Sized>(filter: &F) -> usize {
    3 * filter.order()
}

/// Filters forward, then backward, trimming the reflected padding.
///
/// The effective magnitude response is `|H|^2` and the group delay is zero.
pub fn apply_zero_phase<T: Real, F: LinearFilter<T> + ?Sized>(signal: &[T], filter: &F) -> Result<Vec<T>> {
    let pad = pad_len(filter);
    if signal.len() <= pad {
        return Err(Error::Argument(format!(
            "signal of {} samples is too short for zero-phase filtering (needs more than {pad})",
            signal.len()
        )));
    }
    let ext = odd_extend(signal, pad);
    let mut y = filter.filter_forward(&ext);
    y.reverse();
    let mut y = filter.filter_forward(&y);
    y.reverse();
    Ok(y[pad..pad + signal.len()].to_vec())
}

/// Point reflection about the first and last samples.
fn odd_extend<T: Real>(x: &[T], pad: usize) -> Vec<T> {
    let n = x.len();
    let two = T::of(2.0);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| two * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| two * x[n - 1] - x[n - 1 - i]));
    ext
}
