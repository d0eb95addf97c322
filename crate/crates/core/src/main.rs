use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use composite_detect::harness::csvio::{default_names, matrix_to_string, read_matrix_file, write_atomic};
use composite_detect::harness::{generate_scene, load_config, run_experiment, ExperimentConfig, Stage};
use composite_detect::{Error, ErrorClass, PixelMatrix, Result};

#[derive(Parser)]
#[command(name = "composite-detect", version, about = "Score, evaluate and compare weak-target detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration, or a results document to re-run.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured scene (CSV pixels, or the full scene as JSON
    /// when --out ends in .json).
    Generate(Common),
    /// Score pixels with every configured detector, one column per detector.
    Score {
        #[command(flatten)]
        common: Common,
        /// Pixel matrix to score instead of the generated scene.
        #[arg(long)]
        pixels: Option<PathBuf>,
    },
    /// ROC curves and score agreement on the generated scene.
    Roc(Common),
    /// Power curves and pairwise dominance.
    Power(Common),
    /// Convergence of the finite-epsilon mixed detector.
    Converge(Common),
    /// Search for sculpting weights.
    Sculpt(Common),
    /// Mixed-prior density tables (CSV when --out ends in .csv).
    Fig1(Common),
    /// Every stage listed in the configured pipeline.
    Run(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = load_config(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn has_ext(p: Option<&Path>, ext: &str) -> bool {
    p.and_then(Path::extension).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn run_stage(common: &Common, stage: Option<Stage>) -> Result<()> {
    let mut cfg = load(common)?;
    if let Some(s) = stage {
        cfg.pipeline = vec![s];
    }
    let doc = run_experiment(&cfg)?;
    if !common.quiet {
        for (stage, ms) in &doc.timings_ms {
            eprintln!("{stage}: {ms:.1} ms");
        }
    }
    let out = common.out.as_deref();
    if stage == Some(Stage::Fig1) && has_ext(out, "csv") {
        let rows: Vec<Vec<f64>> = doc.tables.fig1.iter().map(|r| vec![r.epsilon, r.a, r.q]).collect();
        let m = PixelMatrix::from_rows(3, &rows)?;
        return emit(out, &matrix_to_string(&m, &["epsilon".into(), "a".into(), "q".into()])?);
    }
    emit(out, &(doc.to_json()? + "\n"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = load(&common)?;
            cfg.validate()?;
            let scene = generate_scene(&cfg, cfg.seed)?;
            if !common.quiet {
                let m = &scene.provenance.manifest;
                eprintln!("generated {} background and {} target pixels", m.n_background, m.n_target);
            }
            let out = common.out.as_deref();
            if has_ext(out, "json") {
                emit(out, &(serde_json::to_string_pretty(&scene)? + "\n"))
            } else {
                emit(out, &matrix_to_string(&scene.pixels, &default_names(scene.pixels.dim()))?)
            }
        }
        Command::Score { common, pixels } => {
            let cfg = load(&common)?;
            if cfg.detectors.is_empty() {
                return Err(Error::Config("detector list is empty".into()));
            }
            cfg.validate()?;
            let problem = cfg.problem()?;
            let px = match &pixels {
                Some(p) => read_matrix_file(p)?.0,
                None => generate_scene(&cfg, cfg.seed)?.pixels,
            };
            let columns = cfg
                .detectors
                .iter()
                .map(|d| problem.batch_scores(&d.spec, &px))
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<f64>> = (0..px.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
            let m = PixelMatrix::from_rows(columns.len(), &rows)?;
            let names: Vec<String> = cfg.detectors.iter().map(|d| d.label()).collect();
            emit(common.out.as_deref(), &matrix_to_string(&m, &names)?)
        }
        Command::Roc(c) => run_stage(&c, Some(Stage::Roc)),
        Command::Power(c) => run_stage(&c, Some(Stage::Power)),
        Command::Converge(c) => run_stage(&c, Some(Stage::Converge)),
        Command::Sculpt(c) => run_stage(&c, Some(Stage::Sculpt)),
        Command::Fig1(c) => run_stage(&c, Some(Stage::Fig1)),
        Command::Run(c) => run_stage(&c, None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut record = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
            });
            if let Error::Numeric { abundance: Some(a), .. } = &e {
                record["abundance"] = serde_json::json!(a);
            }
            eprintln!("{record}");
            ExitCode::from(match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numeric => 3,
                ErrorClass::Io => 1,
            })
        }
    }
}
