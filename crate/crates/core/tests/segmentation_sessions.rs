use eegclean::segmentation::{detect_triggers, segment, slice_trials};
use eegclean::synth::{generate, SynthSpec, REFERENCE_DURATIONS_S};

fn five_trial_session(rate: f64) -> SynthSpec {
    SynthSpec {
        n_sources: 2,
        n_channels: 2,
        sample_rate: rate,
        trial_durations_s: REFERENCE_DURATIONS_S.to_vec(),
        blink_amplitude: 0.0,
        evoked_amplitude: 0.0,
        gap_s: 4.0,
        ..SynthSpec::default()
    }
}

#[test]
fn reference_durations_are_recovered_to_one_sample() {
    let (rec, truth) = generate(&five_trial_session(250.0)).unwrap();
    let events = detect_triggers(rec.trigger().unwrap(), rec.sample_rate()).unwrap();
    // five onset/offset pairs plus the end marker
    assert_eq!(events.rising_edges.len(), 11);
    assert_eq!((events.rising_edges.len() - 1) / 2, 5);
    let seg = segment(&rec, &events).unwrap();
    let bounds = seg.trial_bounds().unwrap();
    assert_eq!(bounds, truth.trial_bounds.as_slice());
    for (&(s, e), d) in bounds.iter().zip(REFERENCE_DURATIONS_S) {
        let expected = d * 250.0;
        assert!(((e - s) as f64 - expected).abs() <= 1.0, "{} vs {expected}", e - s);
    }
    let eog_trials = slice_trials(rec.eog().unwrap(), bounds);
    assert_eq!(eog_trials.len(), 5);
    assert_eq!(eog_trials[4].len(), 80 * 250);
}

#[test]
fn session_without_end_marker_still_pairs() {
    let (rec, truth) = generate(&SynthSpec {
        trial_durations_s: vec![10.0, 12.0],
        ..five_trial_session(250.0)
    })
    .unwrap();
    let mut events = detect_triggers(rec.trigger().unwrap(), 250.0).unwrap();
    events.rising_edges.pop();
    let seg = segment(&rec, &events).unwrap();
    assert_eq!(seg.trial_bounds().unwrap(), truth.trial_bounds.as_slice());
}
