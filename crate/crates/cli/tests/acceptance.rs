//! End-to-end acceptance checks. Each check prints one PASS or FAIL line;
//! the process fails if any check fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::Q;
use edgehealth::data::{feature, generate_synthetic, train_test_split, Dataset, Health, Sample};
use edgehealth::eval::{compare, metrics, Classifier, GaussianNb, KnnClassifier};
use edgehealth::explain::{explain_dataset, shapley_exact, BackgroundSet};
use edgehealth::gbdt::{
    best_split, grad_hess, initial_log_loss, train, BoostHyperparams, GradPair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> String;

fn efficiency() -> String {
    let data = generate_synthetic::<f64>(2000, 0.3, 42).unwrap();
    let (tr, te) = train_test_split(&data, 0.2, 42).unwrap();
    let model = train(&tr, &BoostHyperparams::default()).unwrap().model;
    let bg = BackgroundSet::sample_from(&tr, 256, 42).unwrap();
    assert_eq!(bg.len(), 256);
    let idx: Vec<usize> = (0..200).collect();
    let start = Instant::now();
    let expl = explain_dataset(&model, &te, Some(&idx), &bg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let worst = expl
        .iter()
        .map(|e| e.efficiency_error())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "largest efficiency error {worst:e}");
    assert!(secs < 60.0, "took {secs:.1} s");
    format!("200 samples, max |phi0 + sum phi - margin| = {worst:.1e}, {secs:.2} s")
}

fn permutation_oracle() -> String {
    let mut checked = 0;
    let mut worst = 0.0f64;
    for n in 3..=6usize {
        let cols: Vec<usize> = (0..n).map(|i| (i * 3 + n) % 8).collect();
        let data = generate_synthetic::<f64>(500, 0.3, n as u64)
            .unwrap()
            .select_features(&cols)
            .unwrap();
        let params = BoostHyperparams {
            num_rounds: 15,
            max_depth: 3,
            ..BoostHyperparams::default()
        };
        let model = train(&data, &params).unwrap().model;
        let bg = BackgroundSet::sample_from(&data, 16, 1).unwrap();
        for i in (0..data.len()).step_by(37).take(13) {
            let x = &data.samples()[i].features;
            let e = shapley_exact(&model, x, &bg, i).unwrap();
            let oracle = common::permutation_shapley(&model, x, bg.rows());
            for (a, b) in e.phi.iter().zip(&oracle) {
                worst = worst.max((a - b).abs());
            }
            checked += 1;
        }
    }
    assert!(checked >= 50);
    assert!(worst < 1e-9, "largest deviation {worst:e}");
    format!("{checked} samples over n = 3..6, max deviation {worst:.1e}")
}

fn dummy_feature() -> String {
    let raw = generate_synthetic::<f64>(1000, 0.3, 11).unwrap();
    let samples = raw
        .samples()
        .iter()
        .map(|s| {
            let mut f = s.features.clone();
            f[feature::DISK_IO] = 100.0;
            Sample::new(f, s.label)
        })
        .collect();
    let data = Dataset::new(raw.schema().clone(), samples).unwrap();
    let model = train(&data, &BoostHyperparams::default()).unwrap().model;
    assert!(model
        .trees()
        .iter()
        .all(|t| !t.features_used().contains(&feature::DISK_IO)));
    let bg = BackgroundSet::sample_from(&raw, 64, 2).unwrap();
    let idx: Vec<usize> = (0..200).collect();
    let expl = explain_dataset(&model, &data, Some(&idx), &bg).unwrap();
    let worst = expl
        .iter()
        .map(|e| e.phi[feature::DISK_IO].abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12, "largest |phi| {worst:e}");
    format!("unused feature, max |phi| = {worst:e} over 200 samples")
}

fn split_oracle() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut splits = 0;
    let cases = 200;
    for i in 0..cases {
        let n = rng.random_range(2..=32);
        let d = rng.random_range(1..=3);
        let coarse = i % 2 == 0;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        if coarse {
                            rng.random_range(0..4) as f64
                        } else {
                            rng.random_range(0.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let g: Vec<i64> = (0..n).map(|_| rng.random_range(-64..=64)).collect();
        let h: Vec<i64> = (0..n).map(|_| rng.random_range(1..=16)).collect();
        let gamma = [0, 2, 16][i % 3];
        let params = BoostHyperparams {
            gamma: gamma as f64 / 64.0,
            min_child_hessian: 1.0 / 64.0,
            ..BoostHyperparams::default()
        };
        let grads: Vec<GradPair<f64>> = g
            .iter()
            .zip(&h)
            .map(|(&a, &b)| GradPair::new(a as f64 / 64.0, b as f64 / 64.0))
            .collect();
        let rows: Vec<usize> = (0..n).collect();
        let xs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let got = best_split(&xs, &rows, &grads, &params).map(|s| (s.feature, s.threshold));
        let q = |v: &[i64]| v.iter().map(|&k| Q::new(k as i128, 64)).collect::<Vec<_>>();
        let want = common::exhaustive_split(
            &x,
            &q(&g),
            &q(&h),
            Q::from_integer(1),
            Q::new(gamma as i128, 64),
            Q::new(1, 64),
        )
        .map(|s| (s.feature, s.threshold));
        assert_eq!(got, want, "case {i}: x = {x:?}");
        splits += got.is_some() as usize;
    }
    format!("{cases} random nodes agree ({splits} with a split)")
}

fn gradient_check() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m: f64 = rng.random_range(-20.0..20.0);
        let y = Health::from(rng.random_bool(0.5));
        let (g, h) = common::fd_grad_hess(m, y);
        let gh = grad_hess(m, y);
        worst = worst
            .max((gh.g - g).abs() / g.abs())
            .max((gh.h - h).abs() / h.abs());
    }
    assert!(worst < 1e-6, "largest relative error {worst:e}");
    format!("1000 pairs, max relative error {worst:.1e}")
}

fn monotone_training() -> String {
    for seed in 100..120u64 {
        let data = generate_synthetic::<f64>(1000, 0.3, seed).unwrap();
        let params = BoostHyperparams {
            gamma: 0.0,
            learning_rate: 0.1,
            seed,
            ..BoostHyperparams::default()
        };
        let out = train(&data, &params).unwrap();
        let mut prev = initial_log_loss(&out.model, &data.labels().unwrap());
        for (k, &l) in out.round_log_loss.iter().enumerate() {
            assert!(l <= prev, "seed {seed}, round {}: {l} > {prev}", k + 1);
            prev = l;
        }
    }
    "20 seeds, 50 rounds each, log-loss non-increasing".into()
}

fn benchmark_ordering() -> String {
    let data = generate_synthetic::<f64>(10_000, 0.3, 1).unwrap();
    let (tr, te) = train_test_split(&data, 0.2, 1).unwrap();
    let model = train(&tr, &BoostHyperparams::default()).unwrap().model;
    let knn = KnnClassifier::fit(&tr, 5).unwrap();
    let nb = GaussianNb::fit(&tr).unwrap();
    let models: Vec<(&str, &dyn Classifier<f64>)> =
        vec![("XGBoost", &model), ("KNN", &knn), ("Naive Bayes", &nb)];
    let rows = compare(&models, &te).unwrap();
    let summary = rows
        .iter()
        .map(|r| format!("{} {:.2}%", r.model, r.accuracy))
        .collect::<Vec<_>>()
        .join(", ");
    assert!(rows[0].accuracy >= 90.0, "{summary}");
    assert!(
        rows[0].accuracy >= rows[1].accuracy && rows[0].accuracy >= rows[2].accuracy,
        "{summary}"
    );
    summary
}

fn run_pipeline(dir: &Path) {
    let bin = env!("CARGO_BIN_EXE_edgehealth");
    let steps: [&[&str]; 4] = [
        &[
            "generate",
            "--samples",
            "800",
            "--anomaly-rate",
            "0.3",
            "--seed",
            "7",
            "--out",
            "data.csv",
        ],
        &[
            "train",
            "--data",
            "data.csv",
            "--out",
            "model.json",
            "--seed",
            "7",
        ],
        &[
            "explain",
            "--model",
            "model.json",
            "--data",
            "data.csv",
            "--background-size",
            "64",
            "--seed",
            "7",
            "--out",
            "shap.csv",
        ],
        &[
            "report",
            "--model",
            "model.json",
            "--data",
            "data.csv",
            "--shap",
            "shap.csv",
            "--seed",
            "7",
            "--outdir",
            "report",
        ],
    ];
    for args in steps {
        let out = Command::new(bin)
            .args(args)
            .current_dir(dir)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for sub in [dir.to_path_buf(), dir.join("report")] {
        for entry in std::fs::read_dir(&sub).unwrap() {
            let p = entry.unwrap().path();
            let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("");
            if ["csv", "json", "svg"].contains(&ext) {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                files.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn determinism() -> String {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(a.path());
    run_pipeline(b.path());
    let (fa, fb) = (artifacts(a.path()), artifacts(b.path()));
    assert_eq!(
        fa.len(),
        12,
        "{:?}",
        fa.iter().map(|f| &f.0).collect::<Vec<_>>()
    );
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.0, y.0);
        assert!(x.1 == y.1, "{} differs between runs", x.0);
    }
    format!(
        "{} CSV/JSON/SVG artifacts byte-identical across two runs",
        fa.len()
    )
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

fn report_integrity() -> String {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(dir.path());
    let report = dir.path().join("report");
    let mut names: Vec<String> = std::fs::read_dir(&report)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let expected = [
        "dependence_cpu_usage.csv",
        "dependence_cpu_usage.svg",
        "shap_beeswarm.csv",
        "shap_beeswarm.svg",
        "shap_importance.csv",
        "shap_importance.svg",
        "weight_importance.csv",
        "weight_importance.svg",
    ];
    assert_eq!(names, expected);

    let model_json = std::fs::read_to_string(dir.path().join("model.json")).unwrap();
    let counts = common::split_counts_from_json(&model_json, 8);
    let names8 = edgehealth::data::TELEMETRY_FEATURES;
    for row in csv_rows(&report.join("weight_importance.csv")) {
        let f = names8.iter().position(|n| *n == &row[1]).unwrap();
        assert_eq!(
            row[2].parse::<usize>().unwrap(),
            counts[f],
            "split count of {}",
            &row[1]
        );
    }

    let mut marks = 0;
    for stem in [
        "weight_importance",
        "shap_importance",
        "shap_beeswarm",
        "dependence_cpu_usage",
    ] {
        let svg = std::fs::read_to_string(report.join(format!("{stem}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap_or_else(|e| panic!("{stem}.svg: {e}"));
        let n = doc
            .descendants()
            .filter(|n| n.attribute("class") == Some("mark"))
            .count();
        let rows = csv_rows(&report.join(format!("{stem}.csv"))).len();
        assert_eq!(n, rows, "{stem}: {n} marks for {rows} rows");
        marks += n;
    }
    format!("8 files, split counts re-derived from model JSON, {marks} marks match data rows")
}

fn metric_arithmetic() -> String {
    let mut p = Vec::new();
    let mut y = Vec::new();
    for (n, pred, label) in [(3, 1, 1), (1, 1, 0), (1, 0, 1), (5, 0, 0)] {
        for _ in 0..n {
            p.push(Health::from_u8(pred).unwrap());
            y.push(Health::from_u8(label).unwrap());
        }
    }
    let m = metrics(&p, &y).unwrap();
    assert_eq!(
        (m.counts.tp, m.counts.fp, m.counts.fn_, m.counts.tn),
        (3, 1, 1, 5)
    );
    assert_eq!(m.accuracy, 0.8);
    assert_eq!(m.f1, 0.75);
    let all = metrics(&y, &y).unwrap();
    assert_eq!((all.accuracy, all.f1), (1.0, 1.0));
    let none = vec![Health::Abnormal; 4];
    let empty = metrics(&none, &none).unwrap();
    assert!(empty.f1 == 0.0 && empty.undefined.f1);
    "tp=3 fp=1 fn=1 tn=5 gives accuracy 0.8 and F1 0.75 exactly".into()
}

fn main() {
    let checks: [(&str, Check); 10] = [
        ("Shapley efficiency", efficiency),
        ("Shapley permutation oracle", permutation_oracle),
        ("dummy feature", dummy_feature),
        ("split search oracle", split_oracle),
        ("gradient finite differences", gradient_check),
        ("training monotonicity", monotone_training),
        ("synthetic benchmark ordering", benchmark_ordering),
        ("pipeline determinism", determinism),
        ("report integrity", report_integrity),
        ("metric arithmetic", metric_arithmetic),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[{:>2}] PASS  {name}: {detail} ({secs:.1} s)", i + 1),
            Err(panic) => {
                failed += 1;
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("[{:>2}] FAIL  {name}: {msg} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} acceptance checks passed",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
