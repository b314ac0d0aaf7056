use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use envalign_core::averaging::{average_template, build_aligned_set, template_distance};
use envalign_core::pipeline;
use envalign_core::synth::{BurstTrain, Window};
use envalign_core::{AlignedSet, TimeSeries};
use hound::{SampleFormat, WavSpec, WavWriter};

use crate::config::{Overrides, Settings};
use crate::error::{exit, Error, Result};
use crate::input::read_input;
use crate::output::{
    aligned_csv, format_number, mse_curve_csv, parse_aligned_csv, segments_csv, template_csv, write_file, InputRecord,
    Manifest, Stage, ALIGNED_FILE, MANIFEST_FILE, MSE_CURVE_FILE, SEGMENTS_FILE, TEMPLATE_FILE,
};
use crate::plot;
use crate::scenario::TrainPlan;

#[derive(Debug, Parser)]
#[command(
    name = "envalign",
    version,
    about = "Segment, align and average repeated pulses in a 1-D signal"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cut the input into segments.
    Segment(StageArgs),
    /// Segment, then anchor and align the segments.
    Align(StageArgs),
    /// Average an aligned matrix written by `align`.
    Average(AverageArgs),
    /// Segment, align and average.
    Run(StageArgs),
    /// Write a synthetic burst train and its ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct StageArgs {
    /// WAV or CSV input.
    pub input: PathBuf,
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    /// Output directory of an earlier `align` run.
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WindowArg {
    Gaussian,
    Hann,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "synth")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 2000.0)]
    pub carrier: f64,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub window: WindowArg,
    #[arg(long, default_value_t = 80.0)]
    pub duration_ms: f64,
    #[arg(long, default_value_t = 150.0)]
    pub gap_ms: f64,
    /// Relative duration jitter, e.g. 0.1 for ±10 %.
    #[arg(long, default_value_t = 0.0)]
    pub duration_jitter: f64,
    /// Relative amplitude jitter.
    #[arg(long, default_value_t = 0.0)]
    pub amplitude_jitter: f64,
    #[arg(long, default_value_t = 0.0)]
    pub onset_jitter_ms: f64,
    #[arg(long, default_value_t = 44_100)]
    pub rate: u32,
    /// Signal-to-noise ratio in dB.
    #[arg(long, default_value_t = 20.0, conflicts_with = "clean")]
    pub snr: f64,
    /// Render without noise.
    #[arg(long)]
    pub clean: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Parses `args` and runs the command. Returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            print!("{summary}");
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<String> {
    match command {
        Command::Segment(a) => stage(Stage::Segment, &a),
        Command::Align(a) => stage(Stage::Align, &a),
        Command::Run(a) => stage(Stage::Run, &a),
        Command::Average(a) => average(&a),
        Command::Synth(a) => synth(&a),
    }
}

fn settings(config: Option<&Path>, flags: Overrides) -> Result<Settings> {
    let file = match config {
        Some(p) => Overrides::load(p)?,
        None => Overrides::default(),
    };
    Settings::resolve(file.layered(flags))
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn stage(kind: Stage, args: &StageArgs) -> Result<String> {
    let s = settings(args.config.as_deref(), args.overrides.clone())?;
    let series = read_input(&args.input, &s.input)?;
    let cfg = &s.analysis;
    let seg = pipeline::segment(&series, cfg)?;
    let mut manifest = Manifest::new(
        kind,
        InputRecord::new(&args.input, &series, s.input.channel),
        s.effective(),
        &seg.segments,
    );
    prepare_out(&s.out)?;
    if s.plots {
        write_file(&s.out, "signal.svg", &plot::signal_plot(&series, &seg))?;
    }
    if kind == Stage::Segment {
        return finish(&s.out, &manifest);
    }

    let solution = pipeline::align(&series, &seg.segments, cfg)?;
    let aligned = build_aligned_set(
        &series,
        &seg.segments,
        &solution,
        cfg.segmentation.smoothing_hz,
        cfg.template_length,
    )?;
    manifest.set_anchor(&solution, &aligned);
    let anchor = manifest.anchor.as_ref().expect("anchor was just set");
    write_file(&s.out, MSE_CURVE_FILE, &mse_curve_csv(&anchor.curve))?;
    write_file(&s.out, ALIGNED_FILE, &aligned_csv(aligned.rows()))?;
    if s.plots {
        write_file(
            &s.out,
            "mse_curve.svg",
            &plot::mse_plot(&anchor.curve, solution.threshold),
        )?;
        write_file(&s.out, "aligned.svg", &plot::aligned_plot(&aligned))?;
    }
    if kind == Stage::Align {
        return finish(&s.out, &manifest);
    }

    write_template(&s, &aligned, &mut manifest)?;
    finish(&s.out, &manifest)
}

fn write_template(s: &Settings, aligned: &AlignedSet, manifest: &mut Manifest) -> Result<()> {
    let template = average_template(aligned)?;
    let distances = aligned
        .rows()
        .iter()
        .map(|r| template_distance(r, &template))
        .collect::<Result<Vec<_>, _>>()?;
    manifest.set_template(&template, aligned.anchor_row(), &distances);
    write_file(&s.out, TEMPLATE_FILE, &template_csv(&template, aligned.anchor_row()))?;
    if s.plots {
        write_file(&s.out, "template.svg", &plot::template_plot(&template))?;
    }
    Ok(())
}

fn average(args: &AverageArgs) -> Result<String> {
    let s = settings(args.config.as_deref(), args.overrides.clone())?;
    let mut manifest = Manifest::read(&args.from.join(MANIFEST_FILE))?;
    let anchor = manifest
        .anchor
        .as_ref()
        .ok_or_else(|| Error::parse(&args.from.join(MANIFEST_FILE), "no anchor section; run `align` first"))?;
    let aligned_path = args.from.join(ALIGNED_FILE);
    let text = fs::read_to_string(&aligned_path).map_err(|e| Error::io(&aligned_path, e))?;
    let rows = parse_aligned_csv(&text).map_err(|m| Error::parse(&aligned_path, m))?;
    if rows.len() != manifest.segments.len() {
        return Err(Error::parse(
            &aligned_path,
            format!("{} rows for {} segments", rows.len(), manifest.segments.len()),
        ));
    }
    let durations = manifest.segments.iter().map(|r| r.duration_s).collect();
    let aligned = AlignedSet::new(rows, durations, anchor.anchor_position)?;
    manifest.stage = Stage::Average;
    prepare_out(&s.out)?;
    write_template(&s, &aligned, &mut manifest)?;
    finish(&s.out, &manifest)
}

fn finish(out: &Path, manifest: &Manifest) -> Result<String> {
    write_file(out, SEGMENTS_FILE, &segments_csv(&manifest.segments))?;
    write_file(out, MANIFEST_FILE, &manifest.to_json())?;
    Ok(summary(manifest))
}

fn summary(m: &Manifest) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "segments: {}", m.n_segments);
    if let Some(a) = &m.anchor {
        let threshold = a.threshold.map(format_number).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "anchor: {:?} a={threshold} mse={}",
            a.strategy,
            format_number(a.mse)
        );
    }
    if let Some(t) = &m.template {
        let _ = writeln!(
            out,
            "template: {} points, mean duration {} s",
            t.length,
            format_number(t.mean_duration_s)
        );
        for r in &m.segments {
            if let Some(d) = r.distance {
                let _ = writeln!(
                    out,
                    "  segment {:>3}  start {:>10} s  distance {}",
                    r.index,
                    format_number(r.start_s),
                    format_number(d)
                );
            }
        }
    }
    out
}

fn synth(args: &SynthArgs) -> Result<String> {
    let plan = TrainPlan {
        count: args.count,
        carrier_hz: args.carrier,
        window: match args.window {
            WindowArg::Gaussian => Window::Gaussian,
            WindowArg::Hann => Window::Hann,
        },
        duration_s: args.duration_ms / 1000.0,
        gap_s: args.gap_ms / 1000.0,
        duration_jitter: args.duration_jitter,
        amplitude_jitter: args.amplitude_jitter,
        onset_jitter_s: args.onset_jitter_ms / 1000.0,
        sample_rate: f64::from(args.rate),
        snr_db: if args.clean { None } else { Some(args.snr) },
        seed: args.seed,
    };
    let train = plan.render()?;
    prepare_out(&args.out)?;
    let wav = args.out.join("signal.wav");
    write_wav(&wav, &train.series)?;
    write_file(&args.out, "truth.csv", &truth_csv(&train))?;
    Ok(format!(
        "wrote {} bursts to {}\n",
        train.truth.len(),
        args.out.display()
    ))
}

/// Writes a mono 32-bit float WAV file.
pub fn write_wav(path: &Path, series: &TimeSeries) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: series.sample_rate().round() as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let wav_err = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::parse(path, other.to_string()),
    };
    let mut w = WavWriter::create(path, spec).map_err(wav_err)?;
    for &v in series.samples() {
        w.write_sample(v as f32).map_err(wav_err)?;
    }
    w.finalize().map_err(wav_err)
}

pub fn truth_csv(train: &BurstTrain) -> String {
    let mut out = String::from("index,onset_s,duration_s,amplitude,center_s\n");
    for (i, t) in train.truth.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            format_number(t.onset_s),
            format_number(t.duration_s),
            format_number(t.amplitude),
            format_number(t.center_s)
        );
    }
    out
}
