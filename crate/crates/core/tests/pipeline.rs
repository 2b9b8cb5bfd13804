//! End-to-end stages: relation detection, datasets, pool inspection, and
//! whole experiment runs.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use common::repo_root;
use hps_core::dataset::{load_idx, load_png_dir};
use hps_core::geom::BBox;
use hps_core::glyph::{glyph_from_detection, ConceptLabel, Detection, DetectionJson, DetectionRecord};
use hps_core::harness::{load_split, run_on_samples, ExperimentConfig};
use hps_core::raster::GrayImage;
use hps_core::relations::encode_pair;
use hps_core::sage::{GeneralizationPool, SageParams};
use hps_core::vrd::{
    all_triples, evaluate, hits_at_k, predict, recall_at_k, train_predicates, PredicatePools, RankedPrediction,
    TruthTriple, VrdParams,
};

fn det(b: [f64; 4], label: &str) -> DetectionJson {
    DetectionJson {
        bbox: b,
        label: label.to_owned(),
        score: 1.0,
        mask: None,
    }
}

fn record(id: &str, dets: Vec<DetectionJson>, triples: &[(usize, &str, usize)]) -> DetectionRecord {
    DetectionRecord {
        image_id: id.to_owned(),
        width: 200,
        height: 200,
        detections: dets,
        triples: Some(triples.iter().map(|&(s, p, o)| (s, p.to_owned(), o)).collect()),
    }
}

#[test]
fn predicate_pools_count_every_triple_once() {
    let preds = ["on", "near", "under"];
    let mut recs = Vec::new();
    let mut tally: BTreeMap<&str, u64> = BTreeMap::new();
    for i in 0..10 {
        let x = 10.0 + i as f64 * 5.0;
        let dets = vec![
            det([x, 10.0, x + 30.0, 40.0], "cup"),
            det([x, 40.0, x + 60.0, 60.0], "table"),
            det([x + 80.0, 10.0, x + 100.0, 60.0], "lamp"),
        ];
        let (p, q) = (preds[i % 3], preds[(i + 1) % 3]);
        *tally.entry(p).or_default() += 1;
        *tally.entry(q).or_default() += 1;
        recs.push(record(&format!("img{i}"), dets, &[(0, p, 1), (1, q, 2)]));
    }
    let triples = all_triples(&recs).unwrap();
    assert_eq!(triples.len(), 20);
    let mut pools = PredicatePools::new();
    let n = train_predicates(&triples, &mut pools, &SageParams::default(), &VrdParams::default()).unwrap();
    assert_eq!(n, 20);
    let got: BTreeMap<&str, u64> = pools.iter().map(|(k, p)| (k.as_str(), p.n_added)).collect();
    assert_eq!(got, tally);
    for pool in pools.values() {
        let held: u64 = pool.generalizations.iter().map(|g| g.n_examples as u64).sum::<u64>()
            + pool.outliers.len() as u64;
        assert_eq!(held, pool.n_added);
    }
}

#[test]
fn every_ordered_pair_is_scored_against_every_pool() {
    let mut pools = PredicatePools::new();
    let train = vec![
        record("a", vec![det([0.0, 0.0, 50.0, 50.0], "cup"), det([0.0, 50.0, 100.0, 90.0], "table")], &[(0, "on", 1)]),
        record("b", vec![det([0.0, 0.0, 50.0, 50.0], "cup"), det([60.0, 0.0, 110.0, 50.0], "cup")], &[(0, "near", 1)]),
        record("c", vec![det([0.0, 100.0, 50.0, 150.0], "cat"), det([0.0, 0.0, 100.0, 90.0], "table")], &[(0, "under", 1)]),
    ];
    train_predicates(&all_triples(&train).unwrap(), &mut pools, &SageParams::default(), &VrdParams::default())
        .unwrap();
    let dets: Vec<Detection> = vec![
        Detection::new(BBox::new(0.0, 0.0, 40.0, 40.0), ConceptLabel::new("cup").unwrap(), 1.0),
        Detection::new(BBox::new(0.0, 40.0, 90.0, 80.0), ConceptLabel::new("table").unwrap(), 1.0),
        Detection::new(BBox::new(120.0, 0.0, 160.0, 80.0), ConceptLabel::new("lamp").unwrap(), 1.0),
    ];
    let out = predict(&dets, &pools, &VrdParams::default()).unwrap();
    assert_eq!(out.len(), 3 * 2 * pools.len());
    let keys: BTreeSet<(usize, usize, &str)> = out.iter().map(|p| (p.subject, p.object, p.predicate.as_str())).collect();
    assert_eq!(keys.len(), out.len());
    assert!(out.windows(2).all(|w| w[0].score >= w[1].score - 1e-9));
}

fn pred(s: usize, o: usize, p: &str, boxes: &[BBox]) -> RankedPrediction {
    RankedPrediction {
        subject: s,
        object: o,
        subject_box: boxes[s],
        object_box: boxes[o],
        predicate: p.to_owned(),
        score: 0.0,
    }
}

fn truth(s: usize, p: &str, o: usize, boxes: &[BBox]) -> TruthTriple {
    TruthTriple {
        subject_box: boxes[s],
        predicate: p.to_owned(),
        object_box: boxes[o],
    }
}

#[test]
fn recall_matches_hand_count_on_two_images() {
    let b1 = [BBox::new(0.0, 0.0, 1.0, 1.0), BBox::new(2.0, 2.0, 3.0, 3.0), BBox::new(4.0, 4.0, 5.0, 5.0)];
    let b2 = [BBox::new(0.0, 0.0, 9.0, 9.0), BBox::new(1.0, 1.0, 2.0, 2.0)];
    // Image 1: truth at ranks 1 and 3; image 2: truth at rank 2, one miss.
    let img1 = (
        vec![pred(0, 1, "on", &b1), pred(1, 2, "on", &b1), pred(1, 2, "near", &b1)],
        vec![truth(0, "on", 1, &b1), truth(1, "near", 2, &b1)],
    );
    let img2 = (
        vec![pred(1, 0, "near", &b2), pred(1, 0, "in", &b2)],
        vec![truth(1, "in", 0, &b2), truth(0, "has", 1, &b2)],
    );
    let images = vec![img1, img2];
    assert_eq!(hits_at_k(&images[0].0, &images[0].1, 1), 1);
    assert_eq!(hits_at_k(&images[1].0, &images[1].1, 1), 0);
    // 4 truth triples: @1 hits 1, @2 hits 2, @3 and beyond hits 3.
    assert_eq!(recall_at_k(&images, 1), Some(25.0));
    assert_eq!(recall_at_k(&images, 2), Some(50.0));
    assert_eq!(recall_at_k(&images, 3), Some(75.0));
    assert_eq!(recall_at_k(&images, 100), Some(75.0));
    assert_eq!(recall_at_k(&[], 1), None);

    // Duplicate predictions cannot claim the same truth twice.
    let dup = vec![pred(0, 1, "on", &b1), pred(0, 1, "on", &b1)];
    assert_eq!(hits_at_k(&dup, &[truth(0, "on", 1, &b1)], 2), 1);
}

#[test]
fn recall_is_monotone_in_k_on_the_synthetic_split() {
    let root = repo_root().join("data/vrd");
    let train = hps_core::glyph::read_detection_jsonl(&root.join("synthetic_train.jsonl")).unwrap();
    let test = hps_core::glyph::read_detection_jsonl(&root.join("synthetic_test.jsonl")).unwrap();
    let mut pools = PredicatePools::new();
    let p = VrdParams::default();
    train_predicates(&all_triples(&train).unwrap(), &mut pools, &SageParams::default(), &p).unwrap();
    let m = evaluate(&test[..20], &pools, &p).unwrap();
    let (r1, r50, r100) = (m.r1.unwrap(), m.r50.unwrap(), m.r100.unwrap());
    assert!(r1 <= r50 && r50 <= r100, "{r1} {r50} {r100}");
    assert_eq!(m.n_images, 20);
}

#[test]
fn mnist_files_have_the_expected_shape() {
    let root = repo_root().join("data/mnist");
    let test = load_idx(&root.join("t10k-images-idx3-ubyte.gz"), &root.join("t10k-labels-idx1-ubyte.gz")).unwrap();
    let train = load_idx(&root.join("train-images-idx3-ubyte.gz"), &root.join("train-labels-idx1-ubyte.gz")).unwrap();
    let hist = |s: &[hps_core::dataset::Sample]| {
        let mut h: BTreeMap<String, usize> = BTreeMap::new();
        for x in s {
            *h.entry(x.label.clone()).or_default() += 1;
        }
        h
    };
    let th = hist(&test);
    assert_eq!(th.keys().cloned().collect::<Vec<_>>(), (0..10).map(|d| d.to_string()).collect::<Vec<_>>());
    assert_eq!(train.len(), 5000);
    assert!(train.iter().all(|s| (s.image.width(), s.image.height()) == (28, 28)));
    assert_eq!(hist(&train).len(), 10);
}

fn count_images(dir: &Path) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .flatten()
        .map(|e| {
            let p = e.path();
            if p.is_dir() {
                count_images(&p)
            } else {
                usize::from(p.extension().is_some_and(|x| x == "png" || x == "pgm"))
            }
        })
        .sum()
}

#[test]
fn png_tree_loads_every_file() {
    for split in ["train", "test"] {
        let dir = repo_root().join("data/parts").join(split);
        let samples = load_png_dir(&dir).unwrap();
        assert_eq!(samples.len(), count_images(&dir), "{split}");
        let labels: BTreeSet<&str> = samples.iter().map(|s| s.label.as_str()).collect();
        let dirs = std::fs::read_dir(&dir).unwrap().flatten().filter(|e| e.path().is_dir()).count();
        assert_eq!(labels.len(), dirs);
    }
}

fn pool(threshold: f64) -> GeneralizationPool {
    GeneralizationPool::new(
        ConceptLabel::new("wears").unwrap(),
        SageParams {
            threshold,
            ..SageParams::default()
        },
    )
}

#[test]
fn listing_shows_probability_bands() {
    let mut p = pool(0.4);
    p.add_example(common::case(&[("red", &["a"]), ("small", &["a"]), ("above", &["a", "b"])]));
    p.add_example(common::case(&[("red", &["x"]), ("large", &["x"]), ("above", &["x", "y"])]));
    assert_eq!(p.generalizations.len(), 1);
    let text = p.inspect();
    assert!(text.contains("1.000  above("), "{text}");
    assert!(text.contains("1.000  red("), "{text}");
    assert!(text.contains("0.500  "), "{text}");
    assert!(pool(0.8).inspect().contains("empty"));
}

#[test]
fn relation_pool_listing_shows_overlap_size_and_label_alternatives() {
    let person = |x: f64| Detection::new(BBox::new(x, 50.0, x + 100.0, 400.0), ConceptLabel::new("person").unwrap(), 1.0);
    let worn = |x: f64, label: &str| {
        Detection::new(BBox::new(x + 70.0, 250.0, x + 120.0, 400.0), ConceptLabel::new(label).unwrap(), 1.0)
    };
    let mut p = pool(0.5);
    for (i, label) in ["jeans", "jeans", "shorts"].iter().enumerate() {
        let x = 100.0 + 20.0 * i as f64;
        let case = encode_pair(&glyph_from_detection(&person(x)).unwrap(), &glyph_from_detection(&worn(x, label)).unwrap())
            .unwrap();
        p.add_example(case);
    }
    assert_eq!(p.generalizations.len(), 1, "{}", p.inspect());
    let text = p.inspect();
    assert!(text.contains("rccPO("), "{text}");
    assert!(text.contains("muchSmaller(") || text.contains("smaller("), "{text}");
    assert!(text.contains("jeans 0.67, shorts 0.33"), "{text}");
}

#[test]
fn single_class_run_is_always_right() {
    let img = |v: u8| {
        let mut g = GrayImage::filled(28, 28, 0).unwrap();
        for y in 6..22 {
            for x in 8..20 {
                if (x == 8 || x == 19 || y == 6 || y == 21) || (v > 0 && x == 14) {
                    g.set(x, y, 255);
                }
            }
        }
        g
    };
    let sample = |v| hps_core::dataset::Sample {
        image: img(v),
        label: "box".to_owned(),
    };
    let train = vec![sample(0), sample(1), sample(0)];
    let test = vec![sample(1), sample(0)];
    let cfg = ExperimentConfig::default();
    let out = run_on_samples(&train, &test, &cfg).unwrap();
    assert_eq!(out.report.accuracy, 100.0);
    assert_eq!(out.report.n_test, 2);
}

#[test]
fn shipped_configs_load_and_validate() {
    for name in ["mnist-10.ini", "mnist-100.ini", "mnist-500.ini", "parts.ini", "vrd-synthetic.ini"] {
        let cfg = ExperimentConfig::load(&repo_root().join("configs").join(name)).unwrap();
        cfg.validate().unwrap();
    }
    let cfg = ExperimentConfig::load(&repo_root().join("configs/mnist-10.ini")).unwrap();
    let (train, test) = load_split(&cfg).unwrap();
    assert_eq!(train.len(), 100);
    let per: BTreeMap<&str, usize> = train.iter().fold(BTreeMap::new(), |mut m, s| {
        *m.entry(s.label.as_str()).or_default() += 1;
        m
    });
    assert!(per.values().all(|&n| n == 10));
    assert_eq!(test.len(), 1000);
}
