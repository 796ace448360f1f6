//! End-to-end driver: preprocess, segment, decompose, select, clean, evaluate.
//!
//! Every report is written deterministically (no timestamps, ordered keys)
//! and embeds the configuration that produced it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::artifact::{
    build_correlation_report, complete_reject, fit_diminished_unmixing, msf_to_wmsf,
    partial_reject, select_artifactual, unmixing_difference, CorrelationReport, DEFAULT_MAX_LAG,
};
use crate::dsp::{preprocess, FilterConfig};
use crate::error::{Error, Result, StageContext};
use crate::eval::{channel_eog_cc, reduction, snr, ReductionReport, SnrReport, DEFAULT_EPOCH_S};
use crate::ica::{fit_ica, remix, unmix, IcaConfig, UnmixingMatrix};
use crate::io::{load_msf, load_recording, save_recording, write_atomic, write_json, MsfFile};
use crate::model::{msf_normalize, MembershipFunction, Recording};
use crate::segmentation::{detect_triggers, segment, TriggerEvents};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Run resampling and filtering first; disable for already processed input.
    pub preprocess: bool,
    pub filter: FilterConfig,
    pub max_lag: usize,
    pub k_selected: usize,
    pub alpha: f64,
    pub wmsf_slope_s: f64,
    pub snr_epoch_s: f64,
    pub ica: IcaConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            preprocess: true,
            filter: FilterConfig::default(),
            max_lag: DEFAULT_MAX_LAG,
            k_selected: 2,
            alpha: 1.0,
            wmsf_slope_s: 0.5,
            snr_epoch_s: DEFAULT_EPOCH_S,
            ica: IcaConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.ica.validate()?;
        if self.k_selected == 0 {
            return Err(Error::Argument("k_selected must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Argument(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.wmsf_slope_s >= 0.0 && self.wmsf_slope_s.is_finite()) {
            return Err(Error::Argument(format!(
                "wmsf_slope_s must be non-negative, got {}",
                self.wmsf_slope_s
            )));
        }
        if !(self.snr_epoch_s > 0.0) {
            return Err(Error::Argument(format!("snr_epoch_s must be positive, got {}", self.snr_epoch_s)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Complete removal of the selected components.
    Cr,
    /// Partial rejection inside the windowed membership function.
    Pr,
    /// Refit on artifact-free samples and compare the unmixing matrices.
    Diminished,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Cr => "cr",
            Mode::Pr => "pr",
            Mode::Diminished => "diminished",
        }
    }

    fn needs_msf(&self) -> bool {
        !matches!(self, Mode::Cr)
    }
}

/// Wrapper giving every JSON report its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, D: Serialize> {
    pub mode: Mode,
    pub config: &'a PipelineConfig,
    pub data: D,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub sample_rate: f64,
    pub samples: usize,
    pub trials: usize,
    pub eeg_channels: Vec<String>,
    pub ica_converged: bool,
    pub ica_iterations: usize,
    pub selected_components: Vec<usize>,
    pub marked_fraction: Option<f64>,
    pub reduction_percent: Option<f64>,
    pub snr_before: Option<f64>,
    pub snr_after: Option<f64>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
}

/// Everything computed by one run, kept in memory for callers and tests.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub processed: Recording<f64>,
    pub unmixing: UnmixingMatrix<f64>,
    pub correlation: CorrelationReport<f64>,
    pub cleaned: Option<Recording<f64>>,
    pub reduction: Option<ReductionReport>,
    pub snr_before: Option<SnrReport>,
    pub snr_after: Option<SnrReport>,
    pub diminished: Option<UnmixingMatrix<f64>>,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Resamples and filters a recording file into another.
pub fn preprocess_file(config: &FilterConfig, input: &Path, output: &Path) -> Result<Recording<f64>> {
    let raw = load_recording(input).stage("load")?;
    let out = preprocess(&raw, config).stage("preprocess")?;
    save_recording(&out, output).stage("write")?;
    Ok(out)
}

/// Sets trial bounds from the trigger channel, or keeps existing bounds when
/// the recording has no trigger channel.
pub fn segment_recording(recording: Recording<f64>) -> Result<(Recording<f64>, Option<TriggerEvents>)> {
    match recording.trigger() {
        Some(trig) => {
            let events = detect_triggers(trig, recording.sample_rate())?;
            let seg = segment(&recording, &events)?;
            Ok((seg, Some(events)))
        }
        None => Ok((recording, None)),
    }
}

/// Maps a membership function onto a recording of `length` samples at `rate`.
/// Intervals marked at a different rate are rescaled; otherwise the lengths
/// must agree.
pub fn align_msf(file: &MsfFile, length: usize, rate: f64) -> Result<MembershipFunction> {
    let msf = msf_normalize(&file.msf())?;
    if msf.length == length {
        return Ok(msf);
    }
    match file.sample_rate {
        Some(from) if from != rate => {
            let scale = rate / from;
            let map = |i: usize| (((i as f64) * scale).round() as usize).min(length);
            let intervals = msf.intervals.iter().map(|&(s, e)| (map(s), map(e))).collect();
            msf_normalize(&MembershipFunction::new(length, intervals))
        }
        _ => Err(Error::Schema(format!(
            "membership function covers {} samples, processed recording has {length}",
            msf.length
        ))),
    }
}

/// Runs the full chain on `input` and writes the reports into `out_dir`.
pub fn run_pipeline(
    config: &PipelineConfig,
    input: &Path,
    msf_path: Option<&Path>,
    mode: Mode,
    out_dir: &Path,
) -> Result<PipelineOutput> {
    config.validate().stage("config")?;
    if mode.needs_msf() && msf_path.is_none() {
        return Err(Error::Argument(format!("mode {} needs a membership function", mode.as_str())))
            .stage("config");
    }
    let raw = load_recording(input).stage("load")?;
    let msf_file = msf_path.map(load_msf).transpose().stage("load")?;
    let output = run_on_recording(config, raw, msf_file.as_ref(), mode)?;
    write_outputs(config, mode, output, out_dir).stage("write")
}

/// The in-memory part of [`run_pipeline`].
pub fn run_on_recording(
    config: &PipelineConfig,
    raw: Recording<f64>,
    msf_file: Option<&MsfFile>,
    mode: Mode,
) -> Result<PipelineOutput> {
    config.validate().stage("config")?;
    if mode.needs_msf() && msf_file.is_none() {
        return Err(Error::Argument(format!("mode {} needs a membership function", mode.as_str())))
            .stage("config");
    }
    let mut warnings = Vec::new();

    let processed = if config.preprocess {
        preprocess(&raw, &config.filter).stage("preprocess")?
    } else {
        raw
    };
    let (processed, _) = segment_recording(processed).stage("segment")?;
    let msf = msf_file
        .map(|f| align_msf(f, processed.len(), processed.sample_rate()))
        .transpose()
        .stage("msf")?;

    let unmixing = fit_ica(&processed, &config.ica).stage("ica")?;
    if !unmixing.converged {
        warnings.push(format!(
            "ICA did not converge within {} iterations",
            unmixing.iterations
        ));
    }
    let components = unmix(&unmixing, &processed).stage("ica")?;
    let eog = processed
        .eog()
        .ok_or_else(|| Error::Schema("recording has no EOG channel".into()))
        .stage("select")?;
    let report = build_correlation_report(eog, &components, config.max_lag).stage("select")?;
    let k = config.k_selected.min(components.n_components());
    if k < config.k_selected {
        warnings.push(format!("k_selected reduced to {k}, the number of components"));
    }
    let correlation = select_artifactual(&report, k).stage("select")?;

    let mut cleaned = None;
    let mut diminished = None;
    match mode {
        Mode::Cr | Mode::Pr => {
            let rejected = if mode == Mode::Cr {
                complete_reject(&components, &correlation.selected)
            } else {
                let msf = msf.as_ref().expect("checked by needs_msf");
                let slope = (config.wmsf_slope_s * processed.sample_rate()).round() as usize;
                let wmsf = msf_to_wmsf(msf, slope).stage("reject")?;
                partial_reject(&components, &correlation.selected, &wmsf, config.alpha)
            }
            .stage("reject")?;
            let rebuilt = remix(&unmixing, &rejected).stage("reconstruct")?;
            cleaned = Some(processed.with_replaced_channels(rebuilt.channels()).stage("reconstruct")?);
        }
        Mode::Diminished => {
            let msf = msf.as_ref().expect("checked by needs_msf");
            let w_prime = fit_diminished_unmixing(&processed, msf, &config.ica).stage("diminished")?;
            if !w_prime.converged {
                warnings.push(format!(
                    "diminished ICA did not converge within {} iterations",
                    w_prime.iterations
                ));
            }
            diminished = Some(w_prime);
        }
    }

    let reduction_report = match &cleaned {
        Some(c) => {
            let before = channel_eog_cc(&processed, config.max_lag).stage("eval")?;
            let after = channel_eog_cc(c, config.max_lag).stage("eval")?;
            Some(reduction(&before, &after).stage("eval")?)
        }
        None => None,
    };
    let mut snr_of = |r: &Recording<f64>| match snr(r, config.snr_epoch_s) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(format!("SNR unavailable: {e}"));
            None
        }
    };
    let snr_before = snr_of(&processed);
    let snr_after = cleaned.as_ref().and_then(&mut snr_of);

    let summary = Summary {
        sample_rate: processed.sample_rate(),
        samples: processed.len(),
        trials: processed.trials_or_whole().len(),
        eeg_channels: unmixing.channel_labels.clone(),
        ica_converged: unmixing.converged,
        ica_iterations: unmixing.iterations,
        selected_components: correlation.selected.clone(),
        marked_fraction: msf
            .as_ref()
            .map(|m| m.marked_count() as f64 / m.length.max(1) as f64),
        reduction_percent: reduction_report.as_ref().map(|r| r.reduction_percent),
        snr_before: snr_before.as_ref().map(|s| s.global),
        snr_after: snr_after.as_ref().map(|s| s.global),
        warnings,
        files: Vec::new(),
    };
    Ok(PipelineOutput {
        processed,
        unmixing,
        correlation,
        cleaned,
        reduction: reduction_report,
        snr_before,
        snr_after,
        diminished,
        summary,
        files: Vec::new(),
    })
}

fn csv_with_header(config: &PipelineConfig, mode: Mode, body: &str) -> Result<Vec<u8>> {
    let mut out = format!("# mode: {}\n# config: {}\n", mode.as_str(), serde_json::to_string(config)?);
    out.push_str(body);
    Ok(out.into_bytes())
}

#[derive(Serialize)]
struct SnrPair<'a> {
    before: Option<&'a SnrReport>,
    after: Option<&'a SnrReport>,
}

struct Writer<'a> {
    dir: &'a Path,
    mode: Mode,
    config: &'a PipelineConfig,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn json<D: Serialize>(&mut self, name: &str, data: D) -> Result<()> {
        let p = self.dir.join(name);
        write_json(
            &p,
            &Report {
                mode: self.mode,
                config: self.config,
                data,
            },
        )?;
        self.files.push(p);
        Ok(())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.dir.join(name);
        write_atomic(&p, &csv_with_header(self.config, self.mode, body)?)?;
        self.files.push(p);
        Ok(())
    }
}

fn snr_csv(before: Option<&SnrReport>, after: Option<&SnrReport>) -> Option<String> {
    let mut out = String::new();
    for (stage, rep) in [("before", before), ("after", after)] {
        let Some(r) = rep else { continue };
        let body = r.to_csv();
        let mut lines = body.lines();
        let head = lines.next().unwrap_or_default();
        if out.is_empty() {
            out.push_str(&format!("stage,{head}\n"));
        }
        for l in lines {
            out.push_str(&format!("{stage},{l}\n"));
        }
    }
    (!out.is_empty()).then_some(out)
}

fn write_outputs(
    config: &PipelineConfig,
    mode: Mode,
    mut out: PipelineOutput,
    dir: &Path,
) -> Result<PipelineOutput> {
    std::fs::create_dir_all(dir)?;
    let mut w = Writer {
        dir,
        mode,
        config,
        files: Vec::new(),
    };
    w.json("correlation.json", &out.correlation)?;
    w.csv("correlation.csv", &out.correlation.to_csv())?;
    w.json("unmixing.json", &out.unmixing)?;
    if let Some(cleaned) = &out.cleaned {
        let p = dir.join("cleaned.eeg");
        save_recording(cleaned, &p)?;
        w.files.push(p);
    }
    if let Some(r) = &out.reduction {
        w.json("reduction.json", r)?;
        w.csv("reduction.csv", &r.to_csv())?;
    }
    w.json(
        "snr.json",
        SnrPair {
            before: out.snr_before.as_ref(),
            after: out.snr_after.as_ref(),
        },
    )?;
    if let Some(body) = snr_csv(out.snr_before.as_ref(), out.snr_after.as_ref()) {
        w.csv("snr.csv", &body)?;
    }
    if let Some(w_prime) = &out.diminished {
        w.json("unmixing_diminished.json", w_prime)?;
        let diff = unmixing_difference(&out.unmixing, w_prime)?;
        w.json("difference.json", &diff)?;
        w.csv("d.csv", &diff.d_csv())?;
        w.csv("d_lr.csv", &diff.d_lr_csv())?;
    }
    let summary_path = dir.join("summary.json");
    let mut files = w.files;
    files.push(summary_path.clone());
    out.summary.files = files
        .iter()
        .map(|p| p.file_name().unwrap_or_default().to_string_lossy().into_owned())
        .collect();
    write_json(
        &summary_path,
        &Report {
            mode,
            config,
            data: &out.summary,
        },
    )?;
    out.files = files;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthSpec};

    fn small_session() -> Recording<f64> {
        let spec = SynthSpec {
            n_sources: 4,
            n_channels: 5,
            trial_durations_s: vec![20.0, 15.0],
            ..SynthSpec::default()
        };
        generate(&spec).unwrap().0
    }

    fn fast() -> PipelineConfig {
        PipelineConfig {
            preprocess: false,
            k_selected: 1,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"alpah": 1}"#).is_err());
        let c: PipelineConfig = serde_json::from_str(r#"{"alpha": 0.5, "ica": {"seed": 3}}"#).unwrap();
        assert_eq!(c.alpha, 0.5);
        assert_eq!(c.ica.seed, 3);
        assert_eq!(c.max_lag, 7);
        assert!(PipelineConfig { alpha: 2.0, ..c.clone() }.validate().is_err());
        assert!(PipelineConfig { k_selected: 0, ..c }.validate().is_err());
    }

    #[test]
    fn complete_removal_reduces_eog_correlation() {
        let out = run_on_recording(&fast(), small_session(), None, Mode::Cr).unwrap();
        assert_eq!(out.summary.trials, 2);
        assert!(out.reduction.unwrap().reduction_percent > 0.0);
    }

    #[test]
    fn partial_rejection_with_empty_msf_is_a_round_trip() {
        let rec = small_session();
        let empty = MsfFile::new(&MembershipFunction::empty(rec.len()), None);
        let out = run_on_recording(&fast(), rec, Some(&empty), Mode::Pr).unwrap();
        let cleaned = out.cleaned.unwrap();
        let comps = unmix(&out.unmixing, &out.processed).unwrap();
        let round = remix(&out.unmixing, &comps).unwrap();
        for ch in round.channels() {
            let a = &cleaned.channel(cleaned.index_of(&ch.label).unwrap()).samples;
            for (x, y) in a.iter().zip(&ch.samples) {
                assert!((x - y).abs() <= 1e-8 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn diminished_with_empty_msf_has_zero_difference() {
        let rec = small_session();
        let empty = MsfFile::new(&MembershipFunction::empty(rec.len()), None);
        let out = run_on_recording(&fast(), rec, Some(&empty), Mode::Diminished).unwrap();
        let d = unmixing_difference(&out.unmixing, out.diminished.as_ref().unwrap()).unwrap();
        assert!(d.d.as_slice().iter().all(|&v| v == 0.0));
        assert!(d.all_sentinel());
    }

    #[test]
    fn msf_marked_at_another_rate_is_rescaled() {
        let f = MsfFile {
            length: 2048,
            sample_rate: Some(2048.0),
            intervals: vec![(1024, 1536)],
        };
        assert_eq!(align_msf(&f, 250, 250.0).unwrap().intervals, vec![(125, 188)]);
        let g = MsfFile { sample_rate: None, ..f };
        assert!(matches!(align_msf(&g, 250, 250.0), Err(Error::Schema(_))));
    }

    #[test]
    fn missing_msf_fails_in_config_stage() {
        let dir = tempfile::tempdir().unwrap();
        let err = run_pipeline(&fast(), &dir.path().join("x.eeg"), None, Mode::Pr, dir.path()).unwrap_err();
        assert!(err.to_string().starts_with("config:"), "{err}");
        let err = run_pipeline(&fast(), &dir.path().join("x.eeg"), None, Mode::Cr, dir.path()).unwrap_err();
        assert!(err.to_string().starts_with("load:"), "{err}");
    }
}
