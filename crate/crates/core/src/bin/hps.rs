use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use hps_core::case::CaseDescription;
use hps_core::dataset::read_image;
use hps_core::encode::{encode_image, image_glyph, vectorize};
use hps_core::glyph::{read_detection_jsonl, Sketch};
use hps_core::harness::{
    encode_sample, inspect_pool, load_split, run_experiment, train_model, Encoded, ExperimentConfig,
    Model,
};
use hps_core::relations::encode_scene_with;
use hps_core::vrd::{all_triples, evaluate, load_pools, predict, save_pools, train_predicates, PredicatePools};
use hps_core::{HpsError, Result};

#[derive(Parser)]
#[command(name = "hps", version, about = "Qualitative sketch encoding and analogical classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Skeletonize an image and print its strokes as JSON.
    Vectorize {
        image: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the case of an image, or one scene case per line of a detection JSONL file.
    Encode {
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train pools from the configured training split.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Pool directory; defaults to `<output>/pools`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify one image against a directory of trained pools.
    Classify {
        #[arg(long)]
        pools: PathBuf,
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train and evaluate; writes report.json, timing.json and pools/.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Use the part-based cascade.
        #[arg(long)]
        phal: bool,
        /// Write per-item cascade traces to trace.json.
        #[arg(long)]
        trace: bool,
    },
    /// Relationship predicate detection.
    #[command(subcommand)]
    Vrd(VrdCommand),
    /// Describe a persisted pool.
    Inspect {
        pool: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VrdCommand {
    /// Train one pool per predicate from the training JSONL.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank (pair, predicate) candidates for every image of a JSONL file.
    Predict {
        #[arg(long)]
        pools: PathBuf,
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        top: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train (unless --pools is given) and report recall@1/50/100 on the test JSONL.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        pools: Option<PathBuf>,
    },
}

fn config_or_default(path: Option<&Path>) -> Result<ExperimentConfig> {
    path.map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::load)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| HpsError::io(path, e))
}

fn output_dir(cfg: &ExperimentConfig, explicit: Option<PathBuf>, sub: &str) -> Result<PathBuf> {
    explicit
        .or_else(|| cfg.output.as_ref().map(|o| o.join(sub)))
        .ok_or_else(|| HpsError::Config("no output directory: pass --out or set `output` in the config".into()))
}

fn case_json(c: &CaseDescription) -> String {
    serde_json::to_string(&c.to_json()).expect("case serializes")
}

fn vrd_train(cfg: &ExperimentConfig) -> Result<PredicatePools> {
    let records = read_detection_jsonl(&cfg.dataset.train[0])?;
    let mut pools = PredicatePools::new();
    let n = train_predicates(&all_triples(&records)?, &mut pools, &cfg.sage, &cfg.vrd_params())?;
    log::info!("trained {} predicate pools from {n} triples", pools.len());
    Ok(pools)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Vectorize { image, svg, config } => {
            let cfg = config_or_default(config.as_deref())?;
            let img = read_image(&image)?;
            let strokes = vectorize(&img, &cfg.encode)?;
            let out: Vec<_> = strokes
                .iter()
                .map(|s| json!({"closed": s.closed, "points": s.points.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>()}))
                .collect();
            println!("{}", serde_json::to_string(&out)?);
            if let Some(path) = svg {
                let glyph = image_glyph(&img, None, &cfg.encode)?;
                let scale = cfg.encode.upscale as f64;
                let sketch = Sketch::new(vec![glyph], img.width() as f64 * scale, img.height() as f64 * scale)?;
                write(&path, &sketch.to_svg())?;
            }
        }
        Command::Encode { input, config } => {
            let cfg = config_or_default(config.as_deref())?;
            if input.extension().is_some_and(|x| x == "jsonl") {
                for rec in read_detection_jsonl(&input)? {
                    let mut case = encode_scene_with(&rec.sketch()?, &cfg.relations)?;
                    case.provenance = rec.image_id.clone();
                    println!("{}", case_json(&case));
                }
            } else {
                let img = read_image(&input)?;
                println!("{}", case_json(&encode_image(&img, &cfg.encode, &input.display().to_string())?));
            }
        }
        Command::Train { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = output_dir(&cfg, out, "pools")?;
            let (train, _) = load_split(&cfg)?;
            let items = train
                .iter()
                .enumerate()
                .map(|(i, s)| Ok((encode_sample(&s.image, &cfg, &format!("train/{i}"))?, s.label.clone())))
                .collect::<Result<Vec<(Encoded, String)>>>()?;
            let model = train_model(&items, &cfg.sage, None)?;
            model.save_dir(&dir)?;
            println!("trained {} items into {}", items.len(), dir.display());
        }
        Command::Classify { pools, input, config } => {
            let mut cfg = config_or_default(config.as_deref())?;
            let model = Model::load_dir(&pools, &cfg.sage)?;
            cfg.phal = matches!(model, Model::Phal(_));
            let item = encode_sample(&read_image(&input)?, &cfg, &input.display().to_string())?;
            let (concept, trace) = model.classify(&item, &cfg)?;
            let out = match trace {
                Some(t) => json!({"concept": concept, "score": t.score, "trace": t}),
                None => json!({"concept": concept}),
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Eval { config, phal, trace } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.phal |= phal;
            cfg.validate()?;
            let out = run_experiment(&cfg)?;
            if let (true, Some(dir)) = (trace, &cfg.output) {
                write(&dir.join("trace.json"), &serde_json::to_string_pretty(&out.traces)?)?;
            }
            let r = &out.report;
            println!(
                "{} accuracy {:.2}% ({} train, {} test, {:.1}s)",
                r.mode, r.accuracy, r.n_train, r.n_test, out.wall_seconds
            );
            if cfg.output.is_none() {
                println!("{}", r.to_json_pretty());
            }
        }
        Command::Vrd(VrdCommand::Train { config, out }) => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = output_dir(&cfg, out, "vrd-pools")?;
            let pools = vrd_train(&cfg)?;
            save_pools(&pools, &dir)?;
            println!("trained {} predicate pools into {}", pools.len(), dir.display());
        }
        Command::Vrd(VrdCommand::Predict { pools, input, top, config }) => {
            let cfg = config_or_default(config.as_deref())?;
            let pools = load_pools(&pools, &cfg.sage)?;
            for rec in read_detection_jsonl(&input)? {
                let mut preds = predict(&rec.detections()?, &pools, &cfg.vrd_params())?;
                preds.truncate(top);
                println!("{}", json!({"image_id": rec.image_id, "predictions": preds}));
            }
        }
        Command::Vrd(VrdCommand::Eval { config, pools }) => {
            let cfg = ExperimentConfig::load(&config)?;
            let pools = match pools {
                Some(dir) => load_pools(&dir, &cfg.sage)?,
                None => vrd_train(&cfg)?,
            };
            let metrics = evaluate(&read_detection_jsonl(&cfg.dataset.test[0])?, &pools, &cfg.vrd_params())?;
            let text = serde_json::to_string_pretty(&metrics)?;
            if let Some(dir) = &cfg.output {
                std::fs::create_dir_all(dir).map_err(|e| HpsError::io(dir, e))?;
                write(&dir.join("metrics.json"), &text)?;
                save_pools(&pools, &dir.join("vrd-pools"))?;
            }
            println!("{text}");
        }
        Command::Inspect { pool, svg } => {
            let (text, chart) = inspect_pool(&pool)?;
            print!("{text}");
            if let Some(path) = svg {
                write(&path, &chart)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
