//! Experiment configuration, the train/classify driver, and reports.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Instant;

use ini::Ini;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::case::CaseDescription;
use crate::dataset::{load_idx, load_png_dir, stratified_indices, Sample};
use crate::encode::{encode_image, encode_image_levels, EncodeParams};
use crate::error::{HpsError, Result};
use crate::glyph::ConceptLabel;
use crate::phal::{classify_cascade, CascadeParams, CascadeResult, HierarchicalConcept, LevelDescription, LEVELS};
use crate::raster::Polarity;
use crate::relations::RelationParams;
use crate::sage::{classify, GeneralizationPool, SageParams};
use crate::vrd::VrdParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Idx,
    PngDir,
    VrdJsonl,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    /// IDX: image file and label file. PNG: one class-directory root.
    /// VRD: one JSONL file. The second path is empty when unused.
    pub train: [PathBuf; 2],
    pub test: [PathBuf; 2],
    /// Training examples per class; 0 keeps everything.
    pub train_per_class: usize,
    /// Test examples per class; 0 keeps everything.
    pub test_per_class: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub seed: u64,
    pub encode: EncodeParams,
    pub sage: SageParams,
    /// MAC width for flat classification over the union of pools.
    pub classify_k: usize,
    /// Use the part-based cascade instead of flat retrieval.
    pub phal: bool,
    pub cascade: CascadeParams,
    /// Pair relations for scene and predicate encodings.
    pub relations: RelationParams,
    /// Where pools, the report and the timing sidecar are written.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetConfig {
                kind: DatasetKind::Idx,
                train: Default::default(),
                test: Default::default(),
                train_per_class: 10,
                test_per_class: 0,
            },
            seed: 0,
            encode: EncodeParams::default(),
            sage: SageParams::default(),
            classify_k: 3,
            phal: false,
            cascade: CascadeParams::default(),
            relations: RelationParams::default(),
            output: None,
        }
    }
}

fn parse_val<T: std::str::FromStr>(section: &str, key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| HpsError::Config(format!("[{section}] {key}: cannot parse {v:?}")))
}

fn parse_bool(section: &str, key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(HpsError::Config(format!("[{section}] {key}: expected a boolean, got {v:?}"))),
    }
}

impl ExperimentConfig {
    /// Parses the INI text. Relative paths are resolved against `base`.
    /// Unknown sections or keys are rejected so typos cannot silently fall
    /// back to defaults.
    pub fn from_ini_str(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| HpsError::Config(e.to_string()))?;
        let mut cfg = ExperimentConfig::default();
        let path = |v: &str| {
            let p = PathBuf::from(v.trim());
            if p.as_os_str().is_empty() || p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (section, props) in ini.iter() {
            let sec = section.unwrap_or("");
            for (key, v) in props.iter() {
                match (sec, key) {
                    ("" | "experiment", "seed") => cfg.seed = parse_val(sec, key, v)?,
                    ("" | "experiment", "phal") => cfg.phal = parse_bool(sec, key, v)?,
                    ("" | "experiment", "classify_k") => cfg.classify_k = parse_val(sec, key, v)?,
                    ("" | "experiment", "output") => cfg.output = Some(path(v)),
                    ("dataset", "kind") => {
                        cfg.dataset.kind = match v.trim() {
                            "idx" => DatasetKind::Idx,
                            "png-dir" => DatasetKind::PngDir,
                            "vrd-jsonl" => DatasetKind::VrdJsonl,
                            other => return Err(HpsError::Config(format!("unknown dataset kind {other:?}"))),
                        }
                    }
                    ("dataset", "train_images" | "train_dir" | "train_jsonl") => cfg.dataset.train[0] = path(v),
                    ("dataset", "train_labels") => cfg.dataset.train[1] = path(v),
                    ("dataset", "test_images" | "test_dir" | "test_jsonl") => cfg.dataset.test[0] = path(v),
                    ("dataset", "test_labels") => cfg.dataset.test[1] = path(v),
                    ("dataset", "train_per_class") => cfg.dataset.train_per_class = parse_val(sec, key, v)?,
                    ("dataset", "test_per_class") => cfg.dataset.test_per_class = parse_val(sec, key, v)?,
                    ("encode", "max_dim") => cfg.encode.max_dim = parse_val(sec, key, v)?,
                    ("encode", "upscale") => cfg.encode.upscale = parse_val(sec, key, v)?,
                    ("encode", "threshold") => cfg.encode.threshold = parse_val(sec, key, v)?,
                    ("encode", "polarity") => {
                        cfg.encode.polarity = match v.trim() {
                            "bright-ink" => Polarity::BrightInk,
                            "dark-ink" => Polarity::DarkInk,
                            other => return Err(HpsError::Config(format!("unknown polarity {other:?}"))),
                        }
                    }
                    ("encode", "simplify_eps") => cfg.encode.simplify_eps = parse_val(sec, key, v)?,
                    ("encode", "min_stroke_len") => cfg.encode.min_stroke_len = parse_val(sec, key, v)?,
                    ("shape", "corner_angle") => cfg.encode.shape.corner_angle = parse_val(sec, key, v)?,
                    ("shape", "straight_tol") => cfg.encode.shape.straight_tol = parse_val(sec, key, v)?,
                    ("shape", "snap") => cfg.encode.shape.snap = parse_val(sec, key, v)?,
                    ("shape", "placement_gap") => cfg.encode.shape.placement_gap = parse_val(sec, key, v)?,
                    ("sage", "threshold") => cfg.sage.threshold = parse_val(sec, key, v)?,
                    ("sage", "prune_cutoff") => cfg.sage.prune_cutoff = parse_val(sec, key, v)?,
                    ("sage", "exhaustive_limit") => cfg.sage.exhaustive_limit = parse_val(sec, key, v)?,
                    ("sage", "large_pool_k") => cfg.sage.large_pool_k = parse_val(sec, key, v)?,
                    ("sme", "trickle") => cfg.sage.sme.trickle = parse_val(sec, key, v)?,
                    ("sme", "max_mappings") => cfg.sage.sme.max_mappings = parse_val(sec, key, v)?,
                    ("relations", "eps") => cfg.relations.eps = parse_val(sec, key, v)?,
                    ("relations", "gap_ratio") => cfg.relations.gap_ratio = parse_val(sec, key, v)?,
                    ("relations", "proximity") => cfg.relations.proximity = parse_val(sec, key, v)?,
                    ("cascade", "k") => cfg.cascade.k = parse_val(sec, key, v)?,
                    ("cascade", "q") => cfg.cascade.q = parse_val(sec, key, v)?,
                    ("cascade", "v") => cfg.cascade.v = parse_val(sec, key, v)?,
                    ("cascade", "level_weights") => {
                        let w: Vec<f64> = v
                            .split(',')
                            .map(|x| parse_val(sec, key, x))
                            .collect::<Result<_>>()?;
                        cfg.cascade.level_weights = w
                            .try_into()
                            .map_err(|_| HpsError::Config("level_weights needs 3 values".into()))?;
                    }
                    ("cascade", "distinct_bonus") => cfg.cascade.distinct_bonus = parse_val(sec, key, v)?,
                    ("cascade", "level_top_n") => cfg.cascade.level_top_n = parse_val(sec, key, v)?,
                    ("cascade", "mac_k") => cfg.cascade.mac_k = parse_val(sec, key, v)?,
                    _ => return Err(HpsError::Config(format!("unknown key [{sec}] {key}"))),
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HpsError::io(path, e))?;
        Self::from_ini_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Predicate-detection parameters; MAC width is `classify_k`.
    pub fn vrd_params(&self) -> VrdParams {
        VrdParams {
            relations: self.relations,
            mac_k: self.classify_k,
            sme: self.sage.sme,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sage.threshold) || !(0.0..=1.0).contains(&self.sage.prune_cutoff) {
            return Err(HpsError::Config("sage threshold and prune_cutoff must lie in [0, 1]".into()));
        }
        if self.classify_k == 0 || self.encode.upscale == 0 || self.encode.max_dim == 0 {
            return Err(HpsError::Config("classify_k, upscale and max_dim must be positive".into()));
        }
        if !(self.encode.shape.corner_angle > 0.0 && self.encode.shape.corner_angle < 180.0) {
            return Err(HpsError::Config("corner_angle must be in (0, 180)".into()));
        }
        if self.phal {
            self.cascade.validate()?;
        }
        Ok(())
    }
}

/// Encoded form of one item: a flat case or a level hierarchy.
#[derive(Clone, Debug)]
pub enum Encoded {
    Flat(CaseDescription),
    Levels(Vec<LevelDescription>),
}

impl Encoded {
    /// The level-1 (or only) case.
    pub fn top(&self) -> &CaseDescription {
        match self {
            Encoded::Flat(c) => c,
            Encoded::Levels(l) => &l[0].case,
        }
    }
}

pub fn encode_sample(img: &crate::raster::GrayImage, cfg: &ExperimentConfig, id: &str) -> Result<Encoded> {
    Ok(if cfg.phal {
        Encoded::Levels(encode_image_levels(img, &cfg.encode, id)?)
    } else {
        Encoded::Flat(encode_image(img, &cfg.encode, id)?)
    })
}

/// Trained classifier state: flat pools or per-level pools, one per label.
#[derive(Clone, Debug)]
pub enum Model {
    Flat(Vec<GeneralizationPool>),
    Phal(Vec<HierarchicalConcept>),
}

impl Model {
    pub fn labels(&self) -> Vec<String> {
        match self {
            Model::Flat(p) => p.iter().map(|p| p.concept.as_str().to_owned()).collect(),
            Model::Phal(c) => c.iter().map(|c| c.concept.as_str().to_owned()).collect(),
        }
    }

    /// Writes every pool as `<label>.json` (flat) or `<label>.L<n>.json`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| HpsError::io(dir, e))?;
        match self {
            Model::Flat(pools) => {
                for p in pools {
                    p.save(&dir.join(format!("{}.json", p.concept.as_str())))?;
                }
            }
            Model::Phal(concepts) => {
                for c in concepts {
                    for (i, p) in c.pools.iter().enumerate() {
                        p.save(&dir.join(format!("{}.L{}.json", c.concept.as_str(), i + 1)))?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Loads a directory written by [`Model::save_dir`].
    pub fn load_dir(dir: &Path, sage: &SageParams) -> Result<Model> {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| HpsError::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        let leveled = |p: &PathBuf| {
            p.file_stem()
                .and_then(|s| s.to_str())
                .is_some_and(|s| s.ends_with(".L1") || s.ends_with(".L2") || s.ends_with(".L3"))
        };
        if files.is_empty() {
            return Err(HpsError::Data(format!("no pool files in {}", dir.display())));
        }
        if files.iter().all(leveled) {
            let mut by_label: BTreeMap<String, Vec<GeneralizationPool>> = BTreeMap::new();
            for f in &files {
                let pool = GeneralizationPool::load(f, sage.sme)?;
                by_label.entry(pool.concept.as_str().to_owned()).or_default().push(pool);
            }
            let concepts = by_label
                .into_iter()
                .map(|(label, pools)| {
                    let pools: [GeneralizationPool; LEVELS] = pools
                        .try_into()
                        .map_err(|_| HpsError::Data(format!("concept {label} needs exactly {LEVELS} level pools")))?;
                    Ok(HierarchicalConcept {
                        concept: ConceptLabel::new(&label)?,
                        pools,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(Model::Phal(concepts))
        } else {
            Ok(Model::Flat(
                files
                    .iter()
                    .map(|f| GeneralizationPool::load(f, sage.sme))
                    .collect::<Result<_>>()?,
            ))
        }
    }

    pub fn classify(&self, item: &Encoded, cfg: &ExperimentConfig) -> Result<(String, Option<CascadeResult>)> {
        match (self, item) {
            (Model::Flat(pools), e) => Ok((classify(e.top(), pools, cfg.classify_k, &cfg.sage.sme)?.concept, None)),
            (Model::Phal(concepts), Encoded::Levels(levels)) => {
                let r = classify_cascade(levels, concepts, &cfg.cascade, &cfg.sage.sme)?;
                Ok((r.concept.clone(), Some(r)))
            }
            (Model::Phal(_), Encoded::Flat(_)) => Err(HpsError::invalid("cascade model needs level descriptions")),
        }
    }
}

/// Counts encodes and pool additions per training item.
#[derive(Debug)]
pub struct PassCounter {
    encoded: Vec<AtomicU32>,
    added: Vec<AtomicU32>,
}

impl PassCounter {
    pub fn new(n: usize) -> Self {
        PassCounter {
            encoded: (0..n).map(|_| AtomicU32::new(0)).collect(),
            added: (0..n).map(|_| AtomicU32::new(0)).collect(),
        }
    }

    pub fn record_encode(&self, i: usize) {
        self.encoded[i].fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_add(&self, i: usize) {
        self.added[i].fetch_add(1, Ordering::Relaxed);
    }

    pub fn encode_counts(&self) -> Vec<u32> {
        self.encoded.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    pub fn add_counts(&self) -> Vec<u32> {
        self.added.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }

    /// Ok iff every item was encoded and added exactly once.
    pub fn verify(&self) -> Result<()> {
        let bad = self
            .encode_counts()
            .iter()
            .zip(self.add_counts())
            .position(|(&e, a)| e != 1 || a != 1);
        match bad {
            Some(i) => Err(HpsError::Invariant(format!("training item {i} was not processed exactly once"))),
            None => Ok(()),
        }
    }
}

/// Trains one pool (or level hierarchy) per label in item order.
pub fn train_model(items: &[(Encoded, String)], sage: &SageParams, counter: Option<&PassCounter>) -> Result<Model> {
    let mut labels: Vec<&str> = items.iter().map(|(_, l)| l.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let phal = matches!(items.first(), Some((Encoded::Levels(_), _)));
    if phal {
        let mut concepts: Vec<HierarchicalConcept> = labels
            .iter()
            .map(|l| Ok(HierarchicalConcept::new(ConceptLabel::new(l)?, *sage)))
            .collect::<Result<_>>()?;
        for (i, (e, l)) in items.iter().enumerate() {
            let Encoded::Levels(levels) = e else {
                return Err(HpsError::invalid("mixed flat and level encodings"));
            };
            concepts[index[l.as_str()]].train(levels.clone());
            if let Some(c) = counter {
                c.record_add(i);
            }
        }
        Ok(Model::Phal(concepts))
    } else {
        let mut pools: Vec<GeneralizationPool> = labels
            .iter()
            .map(|l| Ok(GeneralizationPool::new(ConceptLabel::new(l)?, *sage)))
            .collect::<Result<_>>()?;
        for (i, (e, l)) in items.iter().enumerate() {
            let Encoded::Flat(c) = e else {
                return Err(HpsError::invalid("mixed flat and level encodings"));
            };
            pools[index[l.as_str()]].add_example(c.clone());
            if let Some(c) = counter {
                c.record_add(i);
            }
        }
        Ok(Model::Flat(pools))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub label: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    /// Percentage of test items classified correctly.
    pub accuracy: f64,
    pub labels: Vec<String>,
    /// `confusion[truth][predicted]`, indexed like `labels`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassAccuracy>,
    /// Every training item's encode and add count; all 1 on a valid run.
    pub train_encodes: usize,
    pub train_adds: usize,
    pub pool_sizes: BTreeMap<String, usize>,
    pub config: ExperimentConfig,
}

impl EvalReport {
    pub fn build(
        truth: &[String],
        predicted: &[String],
        mut labels: Vec<String>,
        config: &ExperimentConfig,
    ) -> EvalReport {
        labels.extend(truth.iter().cloned());
        labels.extend(predicted.iter().cloned());
        labels.sort();
        labels.dedup();
        let pos: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
        for (t, p) in truth.iter().zip(predicted) {
            confusion[pos[t.as_str()]][pos[p.as_str()]] += 1;
        }
        let correct: usize = (0..labels.len()).map(|i| confusion[i][i]).sum();
        let per_class = labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| {
                let total: usize = confusion[i].iter().sum();
                (total > 0).then(|| ClassAccuracy {
                    label: l.clone(),
                    correct: confusion[i][i],
                    total,
                    accuracy: 100.0 * confusion[i][i] as f64 / total as f64,
                })
            })
            .collect();
        EvalReport {
            mode: if config.phal { "phal" } else { "flat" }.into(),
            seed: config.seed,
            n_train: 0,
            n_test: truth.len(),
            accuracy: if truth.is_empty() {
                0.0
            } else {
                100.0 * correct as f64 / truth.len() as f64
            },
            labels,
            confusion,
            per_class,
            train_encodes: 0,
            train_adds: 0,
            pool_sizes: BTreeMap::new(),
            config: config.clone(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Everything a run produces.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub report: EvalReport,
    pub model: Model,
    /// Cascade result per test item (PHAL runs only).
    pub traces: Vec<Option<CascadeResult>>,
    pub wall_seconds: f64,
}

/// Train and test samples selected by the config.
pub fn load_split(cfg: &ExperimentConfig) -> Result<(Vec<Sample>, Vec<Sample>)> {
    let load = |paths: &[PathBuf; 2]| match cfg.dataset.kind {
        DatasetKind::Idx => load_idx(&paths[0], &paths[1]),
        DatasetKind::PngDir => load_png_dir(&paths[0]),
        DatasetKind::VrdJsonl => Err(HpsError::Config("vrd-jsonl datasets are run with `hps vrd`".into())),
    };
    let pick = |samples: Vec<Sample>, per_class: usize, seed: u64| {
        if per_class == 0 {
            return samples;
        }
        let labels: Vec<String> = samples.iter().map(|s| s.label.clone()).collect();
        let keep = stratified_indices(&labels, per_class, seed);
        let mut samples: Vec<Option<Sample>> = samples.into_iter().map(Some).collect();
        keep.into_iter().map(|i| samples[i].take().unwrap()).collect()
    };
    let train = pick(load(&cfg.dataset.train)?, cfg.dataset.train_per_class, cfg.seed);
    let test = pick(load(&cfg.dataset.test)?, cfg.dataset.test_per_class, cfg.seed.wrapping_add(1));
    Ok((train, test))
}

/// Encode, train and evaluate on preloaded samples.
pub fn run_on_samples(train: &[Sample], test: &[Sample], cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let counter = PassCounter::new(train.len());
    let encoded: Vec<(Encoded, String)> = train
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            counter.record_encode(i);
            Ok((encode_sample(&s.image, cfg, &format!("train/{i}"))?, s.label.clone()))
        })
        .collect::<Result<_>>()?;
    let model = train_model(&encoded, &cfg.sage, Some(&counter))?;
    counter.verify()?;
    let results: Vec<(String, Option<CascadeResult>)> = test
        .par_iter()
        .enumerate()
        .map(|(i, s)| model.classify(&encode_sample(&s.image, cfg, &format!("test/{i}"))?, cfg))
        .collect::<Result<_>>()?;
    let truth: Vec<String> = test.iter().map(|s| s.label.clone()).collect();
    let predicted: Vec<String> = results.iter().map(|r| r.0.clone()).collect();
    let mut report = EvalReport::build(&truth, &predicted, model.labels(), cfg);
    report.n_train = train.len();
    report.train_encodes = counter.encode_counts().iter().map(|&c| c as usize).sum();
    report.train_adds = counter.add_counts().iter().map(|&c| c as usize).sum();
    report.pool_sizes = match &model {
        Model::Flat(p) => p.iter().map(|p| (p.concept.as_str().to_owned(), p.len())).collect(),
        Model::Phal(c) => c
            .iter()
            .map(|c| (c.concept.as_str().to_owned(), c.pools.iter().map(GeneralizationPool::len).sum()))
            .collect(),
    };
    Ok(ExperimentOutcome {
        report,
        model,
        traces: results.into_iter().map(|r| r.1).collect(),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Loads the configured data and runs the experiment. When an output
/// directory is configured, writes `report.json`, `pools/` and the
/// `timing.json` sidecar (kept apart so reports stay byte-identical).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let (train, test) = load_split(cfg)?;
    let out = run_on_samples(&train, &test, cfg)?;
    if let Some(dir) = &cfg.output {
        write_outputs(&out, dir)?;
    }
    Ok(out)
}

pub fn write_outputs(out: &ExperimentOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HpsError::io(dir, e))?;
    let report = dir.join("report.json");
    std::fs::write(&report, out.report.to_json_pretty()).map_err(|e| HpsError::io(&report, e))?;
    let timing = dir.join("timing.json");
    let t = serde_json::json!({ "wall_seconds": out.wall_seconds });
    std::fs::write(&timing, t.to_string()).map_err(|e| HpsError::io(&timing, e))?;
    let pools = dir.join("pools");
    if pools.exists() {
        std::fs::remove_dir_all(&pools).map_err(|e| HpsError::io(&pools, e))?;
    }
    out.model.save_dir(&pools)
}

/// Text listing and SVG chart of a persisted pool: one bar per fact,
/// proportional to its probability, grouped by generalization.
pub fn inspect_pool(path: &Path) -> Result<(String, String)> {
    let pool = GeneralizationPool::load(path, Default::default())?;
    Ok((pool.inspect(), pool_svg(&pool)))
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn pool_svg(pool: &GeneralizationPool) -> String {
    const ROW: f64 = 16.0;
    const BAR: f64 = 200.0;
    let mut rows: Vec<(f64, String)> = Vec::new();
    for g in &pool.generalizations {
        rows.push((-1.0, format!("{} (n={})", g.id, g.n_examples)));
        rows.extend(g.listing().into_iter().map(|(f, p)| (p, f)));
    }
    if rows.is_empty() {
        rows.push((-1.0, format!("{}: empty", pool.concept.as_str())));
    }
    let height = ROW * (rows.len() as f64 + 1.0);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"{height}\" font-family=\"monospace\" font-size=\"11\">\n"
    );
    for (i, (p, text)) in rows.iter().enumerate() {
        let y = ROW * (i as f64 + 1.0);
        if *p < 0.0 {
            out.push_str(&format!("  <text x=\"4\" y=\"{y}\" font-weight=\"bold\">{}</text>\n", xml_escape(text)));
        } else {
            out.push_str(&format!(
                "  <rect x=\"12\" y=\"{}\" width=\"{:.1}\" height=\"{}\" fill=\"steelblue\"/>\n",
                y - ROW + 4.0,
                BAR * p,
                ROW - 4.0
            ));
            out.push_str(&format!(
                "  <text x=\"{}\" y=\"{y}\">{p:.2} {}</text>\n",
                BAR + 20.0,
                xml_escape(text)
            ));
        }
    }
    out.push_str("</svg>\n");
    out
}
