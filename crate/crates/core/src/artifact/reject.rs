//! Complete and partial rejection of selected components.

use crate::error::{Error, Result};
use crate::ica::ComponentSet;
use crate::model::WindowedMembershipFunction;
use crate::scalar::Real;

/// Default attenuation strength.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Multiplies each selected component by `1 - alpha * wmsf(t)`.
///
/// `alpha = 0` leaves the components untouched; `alpha = 1` removes them
/// wherever the membership is 1. Unselected components are copied verbatim.
pub fn partial_reject<T: Real>(
    components: &ComponentSet<T>,
    selected: &[usize],
    wmsf: &WindowedMembershipFunction<T>,
    alpha: T,
) -> Result<ComponentSet<T>> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::Argument(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if wmsf.values.len() != components.len() {
        return Err(Error::Schema(format!(
            "membership has {} samples, components have {}",
            wmsf.values.len(),
            components.len()
        )));
    }
    check_selection(components, selected)?;
    let gain: Vec<T> = wmsf.values.iter().map(|&m| T::one() - alpha * m).collect();
    let out = components
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if selected.contains(&i) {
                c.iter().zip(&gain).map(|(&v, &g)| v * g).collect()
            } else {
                c.clone()
            }
        })
        .collect();
    Ok(components.with_components(out))
}

/// Zeroes the selected components everywhere.
///
/// Defined as [`partial_reject`] with `alpha = 1` and a membership of 1 at
/// every sample, so the two agree bit for bit.
pub fn complete_reject<T: Real>(components: &ComponentSet<T>, selected: &[usize]) -> Result<ComponentSet<T>> {
    partial_reject(
        components,
        selected,
        &WindowedMembershipFunction::ones(components.len()),
        T::one(),
    )
}

fn check_selection<T: Real>(components: &ComponentSet<T>, selected: &[usize]) -> Result<()> {
    let n = components.n_components();
    match selected.iter().find(|&&i| i >= n) {
        Some(i) => Err(Error::Range(format!("component {i} out of range for {n} components"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::artifact::msf_to_wmsf;
    use crate::ica::UnmixingMatrix;
    use crate::model::MembershipFunction;
    use proptest::prelude::*;

    fn set(comps: Vec<Vec<f64>>) -> ComponentSet<f64> {
        let labels = (0..comps.len()).map(|i| format!("c{i}")).collect();
        ComponentSet {
            components: comps,
            trial_bounds: None,
            sample_rate: 250.0,
            source: Arc::new(UnmixingMatrix::identity(labels)),
        }
    }

    fn ramp(n: usize, k: f64) -> Vec<f64> {
        (0..n).map(|i| (i as f64 * k).sin() + 0.1).collect()
    }

    #[test]
    fn alpha_zero_is_identity() {
        let s = set(vec![ramp(300, 0.1), ramp(300, 0.3)]);
        let w = msf_to_wmsf(&MembershipFunction::new(300, vec![(50, 100)]), 20).unwrap();
        let out = partial_reject(&s, &[0, 1], &w, 0.0).unwrap();
        assert_eq!(out.components, s.components);
    }

    #[test]
    fn unit_membership_zeroes_selected() {
        let s = set(vec![ramp(300, 0.1), ramp(300, 0.3)]);
        let out = partial_reject(&s, &[1], &WindowedMembershipFunction::ones(300), 1.0).unwrap();
        assert!(out.components[1].iter().all(|&v| v == 0.0));
        assert_eq!(out.components[0], s.components[0]);
    }

    #[test]
    fn single_interval_attenuation_matches_pointwise_oracle() {
        let s = set(vec![ramp(400, 0.05)]);
        let w = msf_to_wmsf::<f64>(&MembershipFunction::new(400, vec![(150, 250)]), 50).unwrap();
        let out = partial_reject(&s, &[0], &w, 1.0).unwrap();
        for i in 0..400 {
            let expected = s.components[0][i] * (1.0 - w.values[i]);
            assert_eq!(out.components[0][i], expected);
            if (150..250).contains(&i) {
                assert_eq!(out.components[0][i], 0.0);
            }
            if !(100..300).contains(&i) {
                assert_eq!(out.components[0][i], s.components[0][i]);
            }
        }
    }

    #[test]
    fn complete_equals_partial_with_ones() {
        let s = set(vec![ramp(100, 0.2), ramp(100, -0.7), ramp(100, 1.1)]);
        let cr = complete_reject(&s, &[0, 2]).unwrap();
        let pr = partial_reject(&s, &[0, 2], &WindowedMembershipFunction::ones(100), 1.0).unwrap();
        for (a, b) in cr.components.iter().zip(&pr.components) {
            let ab: Vec<u64> = a.iter().map(|v| v.to_bits()).collect();
            let bb: Vec<u64> = b.iter().map(|v| v.to_bits()).collect();
            assert_eq!(ab, bb);
        }
    }

    #[test]
    fn empty_selection_is_identity() {
        let s = set(vec![ramp(100, 0.2)]);
        assert_eq!(complete_reject(&s, &[]).unwrap().components, s.components);
    }

    #[test]
    fn errors() {
        let s = set(vec![ramp(100, 0.2)]);
        let ones = WindowedMembershipFunction::ones(100);
        assert!(matches!(partial_reject(&s, &[0], &ones, 1.5), Err(Error::Argument(_))));
        assert!(matches!(partial_reject(&s, &[0], &ones, -0.1), Err(Error::Argument(_))));
        assert!(matches!(
            partial_reject(&s, &[0], &WindowedMembershipFunction::ones(99), 1.0),
            Err(Error::Schema(_))
        ));
        assert!(matches!(complete_reject(&s, &[1]), Err(Error::Range(_))));
    }

    proptest! {
        #[test]
        fn attenuation_is_monotone_in_alpha(a1 in 0.0f64..=1.0, a2 in 0.0f64..=1.0, seed in 0u64..50) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let s = set(vec![ramp(200, 0.01 * (seed + 1) as f64)]);
            let w = msf_to_wmsf::<f64>(&MembershipFunction::new(200, vec![(60, 90), (120, 125)]), 15).unwrap();
            let x = partial_reject(&s, &[0], &w, lo).unwrap();
            let y = partial_reject(&s, &[0], &w, hi).unwrap();
            for (u, v) in x.components[0].iter().zip(&y.components[0]) {
                prop_assert!(v.abs() <= u.abs() + 1e-15);
            }
        }
    }
}
