use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use densemocap::error::{Error, Result};
use densemocap::formats::calibration::read_calibration;
use densemocap::formats::config::{read_fit_config, read_markers};
use densemocap::formats::landmarks::{read_landmarks, write_landmarks};
use densemocap::formats::model::{load_model, BUILTIN_TOY};
use densemocap::formats::motion::read_motion;
use densemocap::formats::observations::read_observations;
use densemocap::io::read_json;
use densemocap::pipeline::{self, with_threads};
use densemocap::scene::{FpsSpec, SceneConfig};
use densemocap_core::fit::FitConfig;
use densemocap_core::landmarks::{count_by_part, sample_model_landmarks};

#[derive(Parser)]
#[command(name = "densemocap", version, about = "Multi-view dense-landmark body fitting")]
struct Cli {
    /// Configuration file for the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed (landmarks: first vertex; synth: noise).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Only report warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a landmark set by weighted farthest point sampling.
    Landmarks {
        /// Model file or `builtin:toy`.
        #[arg(long, default_value = BUILTIN_TOY)]
        model: String,
        /// Number of landmarks; overrides the config.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Generate a synthetic scene described by `--config`.
    Synth,
    /// Fit observations. Inputs default to the files `synth` writes in `--input`.
    Fit {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long)]
        observations: Option<PathBuf>,
        #[arg(long)]
        landmarks: Option<PathBuf>,
    },
    /// Compare a fitted motion against ground truth.
    Eval {
        /// Directory holding the `synth` and `fit` outputs.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Held-out marker file.
        #[arg(long)]
        markers: Option<PathBuf>,
        /// Also compute silhouette mIoU over the calibration's cameras.
        #[arg(long)]
        miou: bool,
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Mask resolution for mIoU as WIDTHxHEIGHT; defaults to the first camera's.
        #[arg(long)]
        resolution: Option<String>,
    },
}

fn input_file(explicit: Option<PathBuf>, input: Option<&Path>, default: &str, flag: &str) -> Result<PathBuf> {
    explicit
        .or_else(|| input.map(|d| d.join(default)))
        .ok_or_else(|| Error::config(flag, "missing; pass it or --input"))
}

fn model_source(explicit: Option<String>, input: Option<&Path>) -> Result<String> {
    explicit
        .or_else(|| input.map(|d| d.join(pipeline::MODEL_FILE).display().to_string()))
        .ok_or_else(|| Error::config("model", "missing; pass it or --input"))
}

fn parse_resolution(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::config("resolution", format!("expected WIDTHxHEIGHT, got {s:?}"));
    let (w, h) = s.split_once('x').ok_or_else(bad)?;
    let (w, h) = (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let out = cli.out.as_path();
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };
    match cli.command {
        Command::Landmarks { model, count } => {
            let model = load_model(&model, Path::new(""))?;
            let mut spec = match &cli.config {
                Some(p) => read_json::<FpsSpec>(p)?,
                None => FpsSpec::default(),
            };
            if let Some(n) = count {
                spec.n = n;
            }
            if let Some(s) = cli.seed {
                spec.seed_index = usize::try_from(s).map_err(|_| Error::config("seed", "too large"))?;
            }
            let set = sample_model_landmarks(&model, &spec.weights, spec.n, spec.seed_index)
                .map_err(|e| Error::config("landmarks", e))?;
            write_landmarks(&out.join(pipeline::LANDMARKS_FILE), &model, &set)?;
            for (part, n) in count_by_part(&model, &set) {
                say(format!("{:<11} {n}", part.as_str()));
            }
        }
        Command::Synth => {
            let path = cli.config.as_deref().ok_or_else(|| Error::config("config", "synth needs a scene file"))?;
            let mut scene = SceneConfig::read(path)?;
            if let Some(s) = cli.seed {
                scene.noise.rng_seed = s;
            }
            let base = path.parent().unwrap_or(Path::new(""));
            let s = with_threads(cli.threads, || pipeline::synthesize(&scene, base))??;
            with_threads(cli.threads, || pipeline::write_synthesis(out, &s, scene.dump_masks, scene.dump_depth))??;
            say(format!(
                "{} frames, {} persons, {} cameras, {} landmarks -> {}",
                s.observations.len(),
                s.truth.persons.len(),
                s.rig.len(),
                s.landmarks.len(),
                out.display()
            ));
        }
        Command::Fit { input, model, calibration, observations, landmarks } => {
            let input = input.as_deref();
            let model = load_model(&model_source(model, input)?, Path::new(""))?;
            let rig = read_calibration(&input_file(calibration, input, pipeline::CALIBRATION_FILE, "calibration")?)?;
            let (info, obs) =
                read_observations(&input_file(observations, input, pipeline::OBSERVATIONS_FILE, "observations")?)?;
            let landmarks = read_landmarks(&input_file(landmarks, input, pipeline::LANDMARKS_FILE, "landmarks")?, &model)?;
            let config = match &cli.config {
                Some(p) => read_fit_config(p)?,
                None => FitConfig::default(),
            };
            pipeline::check_fit_inputs(&model, &rig, &landmarks, &info)?;
            let fit = with_threads(cli.threads, || pipeline::fit_observations(&model, &rig, &landmarks, &obs, &config))??;
            pipeline::write_fit(out, &model, info.fps, &fit)?;
            for p in &fit.persons {
                let iterations: usize = p.summaries.iter().map(|s| s.iterations).sum();
                let last = p.energies.last().map_or(0.0, |e| e.total);
                say(format!("person {}: {iterations} iterations, final-frame energy {last:.6e}", p.person_id));
            }
        }
        Command::Eval { input, model, gt, pred, markers, miou, calibration, resolution } => {
            let input = input.as_deref();
            let model = load_model(&model_source(model, input)?, Path::new(""))?;
            let gt = read_motion(&input_file(gt, input, pipeline::GT_MOTION_FILE, "gt")?)?;
            let pred = read_motion(&input_file(pred, input, pipeline::FIT_MOTION_FILE, "pred")?)?;
            let markers = markers.as_deref().map(read_markers).transpose()?;
            let rig = if miou {
                Some(read_calibration(&input_file(calibration, input, pipeline::CALIBRATION_FILE, "calibration")?)?)
            } else {
                None
            };
            let miou = match &rig {
                Some(rig) => {
                    let (w, h) = match &resolution {
                        Some(r) => parse_resolution(r)?,
                        None => {
                            let c = rig.cameras.first().ok_or_else(|| Error::config("calibration", "no cameras"))?;
                            (c.width, c.height)
                        }
                    };
                    Some((rig, w, h))
                }
                None => None,
            };
            let report = with_threads(cli.threads, || {
                pipeline::evaluate_motions(&model, &gt, &pred, markers.as_deref(), miou)
            })??;
            pipeline::write_eval(out, &report)?;
            say(format!("MPJPE {:.3} mm, PVE {:.3} mm", report.mpjpe * 1e3, report.pve * 1e3));
            if let Some(m) = report.heldout_marker {
                say(format!("held-out markers {:.3} mm", m * 1e3));
            }
            if let Some(m) = report.miou {
                say(format!("mIoU {m:.4}"));
            }
        }
    }
    log::info!("done in {:.2} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
