//! Command-line driver for `eegclean`.
//!
//! Every subcommand is a thin wrapper over the library; configuration comes
//! from an optional JSON file with individual flags layered on top.

pub mod server;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use eegclean::eval::{channel_eog_cc, reduction, snr};
use eegclean::io::{load_msf, load_recording, save_msf, save_recording, write_atomic, write_json, MsfFile};
use eegclean::pipeline::{preprocess_file, run_pipeline, segment_recording, Mode, PipelineConfig};
use eegclean::synth::{generate, SynthSpec};
use eegclean::{msf_normalize, msf_stats, Interval, Matrix};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "eegclean", version, about = "EEG eye-artifact preprocessing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic recording with known sources and blink marks.
    Synth(SynthArgs),
    /// Resample and filter a recording.
    Preprocess(PreprocessArgs),
    /// Detect trials from the trigger channel.
    Segment(SegmentArgs),
    /// Run the full cleaning pipeline.
    Run(RunArgs),
    /// Compare EOG correlation and SNR of two recordings.
    Eval(EvalArgs),
    /// Summarise a membership function, or serve it for annotation.
    Annotate(AnnotateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Cr,
    Pr,
    Diminished,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cr => Mode::Cr,
            ModeArg::Pr => Mode::Pr,
            ModeArg::Diminished => Mode::Diminished,
        }
    }
}

/// Pipeline configuration: a JSON file plus overrides.
#[derive(Debug, Default, Args)]
pub struct ConfigArgs {
    /// JSON configuration; omitted keys keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub target_rate: Option<f64>,
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Number of components rejected.
    #[arg(long = "k")]
    pub k_selected: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub wmsf_slope_s: Option<f64>,
    #[arg(long)]
    pub snr_epoch_s: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Treat the input as already resampled and filtered.
    #[arg(long)]
    pub no_preprocess: bool,
}

impl ConfigArgs {
    pub fn resolve(&self) -> anyhow::Result<PipelineConfig> {
        let mut c: PipelineConfig = match &self.config {
            Some(p) => serde_json::from_slice(&fs::read(p).with_context(|| format!("reading {}", p.display()))?)
                .with_context(|| format!("parsing {}", p.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.target_rate {
            c.filter.target_rate = v;
        }
        if let Some(v) = self.max_lag {
            c.max_lag = v;
        }
        if let Some(v) = self.k_selected {
            c.k_selected = v;
        }
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.wmsf_slope_s {
            c.wmsf_slope_s = v;
        }
        if let Some(v) = self.snr_epoch_s {
            c.snr_epoch_s = v;
        }
        if let Some(v) = self.seed {
            c.ica.seed = v;
        }
        if let Some(v) = self.max_iterations {
            c.ica.max_iterations = v;
        }
        if self.no_preprocess {
            c.preprocess = false;
        }
        c.validate().context("config")?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON generator settings; omitted keys keep their defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the true blink membership function.
    #[arg(long)]
    pub msf_out: Option<PathBuf>,
    /// Where to write mixing matrix, trial bounds and blink onsets.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Write the recording with trial bounds attached.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the trial table (JSON) here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub input: PathBuf,
    /// Membership function; required for `pr` and `diminished`.
    #[arg(long)]
    pub msf: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub before: PathBuf,
    #[arg(long)]
    pub after: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct AnnotateArgs {
    /// Membership function to summarise or edit.
    #[arg(long)]
    pub msf: PathBuf,
    /// Recording being annotated; required with --serve.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Sample rate used for durations when the file does not record one.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Run the HTTP annotation service.
    #[arg(long)]
    pub serve: bool,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Directory with the annotation UI's static files.
    #[arg(long)]
    pub assets: Option<PathBuf>,
    #[arg(long, default_value_t = eegclean::artifact::DEFAULT_MAX_LAG)]
    pub max_lag: usize,
}

#[derive(Serialize)]
struct TruthFile<'a> {
    spec: &'a SynthSpec,
    mixing: &'a Matrix<f64>,
    blink_source: Option<usize>,
    trial_bounds: &'a [Interval],
    trigger_edges: &'a [usize],
    blink_onsets: &'a [usize],
}

#[derive(Serialize)]
struct TrialTable {
    sample_rate: f64,
    rising_edges: Vec<usize>,
    trials: Vec<Trial>,
}

#[derive(Serialize)]
struct Trial {
    start: usize,
    end: usize,
    duration_s: f64,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Preprocess(a) => {
            let c = a.config.resolve()?;
            let out = preprocess_file(&c.filter, &a.input, &a.output)?;
            eprintln!("wrote {} ({} samples at {} Hz)", a.output.display(), out.len(), out.sample_rate());
            Ok(())
        }
        Command::Segment(a) => segment(a),
        Command::Run(a) => {
            let c = a.config.resolve()?;
            let out = run_pipeline(&c, &a.input, a.msf.as_deref(), a.mode.into(), &a.out_dir)?;
            for w in &out.summary.warnings {
                eprintln!("warning: {w}");
            }
            for f in &out.files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::Eval(a) => eval(a),
        Command::Annotate(a) => annotate(a),
    }
}

fn synth(a: SynthArgs) -> anyhow::Result<()> {
    let mut spec: SynthSpec = match &a.spec {
        Some(p) => serde_json::from_slice(&fs::read(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => SynthSpec::default(),
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let (rec, truth) = generate(&spec)?;
    save_recording(&rec, &a.out)?;
    if let Some(p) = &a.msf_out {
        save_msf(&MsfFile::new(&truth.msf, Some(rec.sample_rate())), p)?;
    }
    if let Some(p) = &a.truth_out {
        write_json(
            p,
            &TruthFile {
                spec: &spec,
                mixing: &truth.mixing,
                blink_source: truth.blink_source,
                trial_bounds: &truth.trial_bounds,
                trigger_edges: &truth.trigger_edges,
                blink_onsets: &truth.blink_onsets,
            },
        )?;
    }
    Ok(())
}

fn segment(a: SegmentArgs) -> anyhow::Result<()> {
    let rec = load_recording(&a.input).context("load")?;
    let rate = rec.sample_rate();
    let (rec, events) = segment_recording(rec).context("segment")?;
    let Some(events) = events else {
        bail!("segment: recording has no trigger channel");
    };
    let table = TrialTable {
        sample_rate: rate,
        rising_edges: events.rising_edges.clone(),
        trials: rec
            .trial_bounds()
            .unwrap_or_default()
            .iter()
            .map(|&(start, end)| Trial {
                start,
                end,
                duration_s: (end - start) as f64 / rate,
            })
            .collect(),
    };
    match &a.report {
        Some(p) => write_json(p, &table)?,
        None => println!("{}", serde_json::to_string_pretty(&table)?),
    }
    if let Some(p) = &a.output {
        save_recording(&rec, p)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct EvalReport<'a, D: Serialize> {
    config: &'a PipelineConfig,
    before: &'a Path,
    after: &'a Path,
    data: D,
}

fn eval(a: EvalArgs) -> anyhow::Result<()> {
    let c = a.config.resolve()?;
    let before = load_recording(&a.before).context("load")?;
    let after = load_recording(&a.after).context("load")?;
    let cc_before = channel_eog_cc(&before, c.max_lag).context("eval")?;
    let cc_after = channel_eog_cc(&after, c.max_lag).context("eval")?;
    let red = reduction(&cc_before, &cc_after).context("eval")?;
    let snr_before = snr(&before, c.snr_epoch_s).context("eval")?;
    let snr_after = snr(&after, c.snr_epoch_s).context("eval")?;
    fs::create_dir_all(&a.out_dir)?;
    let wrap = |data| EvalReport {
        config: &c,
        before: &a.before,
        after: &a.after,
        data,
    };
    let header = format!("# config: {}\n", serde_json::to_string(&c)?);
    write_json(a.out_dir.join("reduction.json"), &wrap(serde_json::to_value(&red)?))?;
    write_atomic(a.out_dir.join("reduction.csv"), format!("{header}{}", red.to_csv()).as_bytes())?;
    write_json(
        a.out_dir.join("snr.json"),
        &wrap(serde_json::json!({ "before": snr_before, "after": snr_after })),
    )?;
    let mut snr_body = String::from("stage,trial,epochs,snr\n");
    for (stage, r) in [("before", &snr_before), ("after", &snr_after)] {
        for line in r.to_csv().lines().skip(1) {
            snr_body.push_str(&format!("{stage},{line}\n"));
        }
    }
    write_atomic(a.out_dir.join("snr.csv"), format!("{header}{snr_body}").as_bytes())?;
    println!(
        "reduction {:.2}%  snr {:.4} -> {:.4}",
        red.reduction_percent, snr_before.global, snr_after.global
    );
    Ok(())
}

fn annotate(a: AnnotateArgs) -> anyhow::Result<()> {
    if a.serve {
        let Some(input) = &a.input else {
            bail!("annotate --serve needs --input");
        };
        let rec = load_recording(input).context("load")?;
        let (rec, _) = segment_recording(rec).context("segment")?;
        let state = Arc::new(server::AppState::new(rec, &a.msf, a.max_lag)?);
        let rt = tokio::runtime::Runtime::new()?;
        return rt.block_on(server::serve(state, a.assets.clone(), &a.bind));
    }
    let file = load_msf(&a.msf).context("load")?;
    let rate = match (file.sample_rate, a.sample_rate, &a.input) {
        (_, Some(r), _) | (Some(r), None, _) => r,
        (None, None, Some(p)) => load_recording(p).context("load")?.sample_rate(),
        (None, None, None) => bail!("annotate: the sample rate is unknown; pass --sample-rate"),
    };
    let stats = msf_stats(&msf_normalize(&file.msf())?, rate);
    println!("{}", serde_json::to_string_pretty(&stats)?);
    Ok(())
}
