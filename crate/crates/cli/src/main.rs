use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evline::camera::StereoRig;
use evline::config::PipelineConfig;
use evline::eval::report;
use evline::event::{CameraId, EventStream};
use evline::init::initialize_model;
use evline::io::read_events_csv;
use evline::model::WireframeModel;
use evline::pipeline::{run_all, simulate, Stage};
use evline::synth::{export_scene, SceneConfig};
use evline::track::{stereo_clusters, track_sequence};
use evline::trajectory::Trajectory;

const INIT_FAILED: u8 = 2;
const LOST: u8 = 3;
const BAD_INPUT: u8 = 4;

/// Wireframe reconstruction and pose tracking from stereo event streams.
#[derive(Parser)]
#[command(name = "evline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene description into event streams and ground truth.
    Simulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a wireframe from the first stereo clusters.
    Init {
        #[arg(long)]
        events_l: PathBuf,
        #[arg(long)]
        events_r: PathBuf,
        #[arg(long)]
        rig: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Track a model through both streams. Per-cluster diagnostics go to
    /// `<out stem>_diagnostics.csv`.
    Track {
        #[arg(long)]
        events_l: PathBuf,
        #[arg(long)]
        events_r: PathBuf,
        #[arg(long)]
        rig: PathBuf,
        /// Model in the left camera frame at the first cluster. Built from
        /// the first clusters when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare an estimated trajectory with ground truth.
    Eval {
        #[arg(long)]
        est: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// RPE window, seconds.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
        /// Compare the estimate as is. By default it is first moved into
        /// the ground-truth frame at its first sample.
        #[arg(long)]
        no_anchor: bool,
    },
    /// simulate, init, track and eval in one go.
    RunAll {
        #[arg(long)]
        scene: PathBuf,
        /// Defaults to `<scene stem>_run` in the working directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8) -> impl Fn(evline::Error) -> Failure {
    move |e| Failure { code, message: e.to_string() }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    let config = match path {
        Some(p) => PipelineConfig::load(p).map_err(fail(BAD_INPUT))?,
        None => PipelineConfig::default(),
    };
    config.validate().map_err(fail(BAD_INPUT))?;
    Ok(config)
}

fn load_streams(left: &Path, right: &Path, rig: &Path) -> Result<(StereoRig, EventStream, EventStream), Failure> {
    let rig = StereoRig::load(rig).map_err(fail(BAD_INPUT))?;
    let read = |path: &Path, id| {
        let cam = rig.camera(id);
        read_events_csv(path, cam.width, cam.height, id).map_err(fail(BAD_INPUT))
    };
    let l = read(left, CameraId::Left)?;
    let r = read(right, CameraId::Right)?;
    Ok((rig, l, r))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate { scene, out } => {
            let config = SceneConfig::load(&scene).map_err(fail(BAD_INPUT))?;
            let base = scene.parent().unwrap_or(Path::new("."));
            let (model, rig, rendered) = simulate(&config, base).map_err(fail(BAD_INPUT))?;
            export_scene(&out, &model, &rig, &rendered).map_err(fail(BAD_INPUT))?;
            log::info!(
                "{} left and {} right events written to {}",
                rendered.left.stream.len(),
                rendered.right.stream.len(),
                out.display()
            );
        }
        Command::Init { events_l, events_r, rig, config, out } => {
            let config = load_config(config.as_deref())?;
            let (rig, left, right) = load_streams(&events_l, &events_r, &rig)?;
            let (cl, cr) = stereo_clusters(&left, &right, &config).map_err(fail(INIT_FAILED))?;
            let model = initialize_model(&cl[0], &cr[0], &rig, &config.init_params()).map_err(fail(INIT_FAILED))?;
            model.save(&out).map_err(fail(BAD_INPUT))?;
            log::info!("{} segments written to {}", model.len(), out.display());
        }
        Command::Track { events_l, events_r, rig, model, config, out } => {
            let config = load_config(config.as_deref())?;
            let (rig, left, right) = load_streams(&events_l, &events_r, &rig)?;
            let model = match model {
                Some(p) => Some(WireframeModel::load(&p).map_err(fail(BAD_INPUT))?),
                None => None,
            };
            let code = if model.is_some() { BAD_INPUT } else { INIT_FAILED };
            let output = track_sequence(&left, &right, &rig, &config, model).map_err(fail(code))?;
            output.trajectory.save(&out).map_err(fail(BAD_INPUT))?;
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("traj");
            let diag = out.with_file_name(format!("{stem}_diagnostics.csv"));
            std::fs::write(&diag, output.diagnostics_csv()).map_err(|e| fail(BAD_INPUT)(e.into()))?;
            log::info!(
                "{} clusters, {} lost, {} re-initializations",
                output.steps.len(),
                output.lost_clusters,
                output.reinitializations
            );
            if output.ended_lost {
                return Err(Failure { code: LOST, message: "tracking lost and not recovered".into() });
            }
        }
        Command::Eval { est, gt, delta, out, no_anchor } => {
            let est = Trajectory::load(&est).map_err(fail(BAD_INPUT))?;
            let gt = Trajectory::load(&gt).map_err(fail(BAD_INPUT))?;
            let rep = report(&est, &gt, delta, !no_anchor, &out).map_err(fail(BAD_INPUT))?;
            print!("{}", rep.table_row());
        }
        Command::RunAll { scene, out } => {
            let out = out.unwrap_or_else(|| {
                let stem = scene.file_stem().and_then(|s| s.to_str()).unwrap_or("scene");
                PathBuf::from(format!("{stem}_run"))
            });
            let summary = run_all(&scene, &out).map_err(|e| Failure {
                code: if e.stage == Stage::Initialize { INIT_FAILED } else { BAD_INPUT },
                message: e.to_string(),
            })?;
            print!("{}", summary.report.table_row());
            log::info!(
                "{} clusters, {} lost, {} re-initializations; output in {}",
                summary.tracking.steps.len(),
                summary.tracking.lost_clusters,
                summary.tracking.reinitializations,
                out.display()
            );
            if summary.tracking.ended_lost {
                return Err(Failure { code: LOST, message: "tracking lost and not recovered".into() });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(BAD_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
