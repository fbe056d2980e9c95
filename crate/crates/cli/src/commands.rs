use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use edgehealth::data::{generate_synthetic, load_csv, train_test_split, write_csv, Dataset};
use edgehealth::eval::{
    compare, compare_predictions, read_predictions, render_comparison_text, write_comparison_csv,
    Classifier, ComparisonRow, GaussianNb, KnnClassifier,
};
use edgehealth::explain::{
    beeswarm_data, dependence_data, explain_dataset, mean_abs_shap, read_shap_csv,
    weight_importance, write_shap_csv, BackgroundSet, Explanation,
};
use edgehealth::gbdt::{sigmoid, train, BoostedModel};
use serde::Serialize;

use crate::cli::{
    Baseline, Cli, Command, EvaluateArgs, ExplainArgs, GenerateArgs, PredictArgs, ReportArgs,
    TrainArgs,
};
use crate::config::{echo_path, RunConfig};
use crate::output::Bundle;
use crate::plot;

/// A required input was given neither as a flag nor in the config file.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn require(value: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    match value {
        Some(p) => Ok(p.clone()),
        None => Err(UsageError(format!("the argument '--{flag} <PATH>' is required")).into()),
    }
}

fn override_with<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn override_some<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        *slot = value.clone();
    }
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    override_with(&mut config.seed, &cli.seed);
    config.command = Some(cli.command.name().to_string());
    match &cli.command {
        Command::Generate(args) => generate(args, config),
        Command::Train(args) => train_model(args, config),
        Command::Predict(args) => predict(args, config),
        Command::Evaluate(args) => evaluate(args, config),
        Command::Explain(args) => explain(args, config),
        Command::Report(args) => report(args, config),
    }
}

fn csv_bytes(data: &Dataset<f64>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(data, &mut buf)?;
    Ok(buf)
}

fn load_data(path: &Path) -> Result<Dataset<f64>> {
    load_csv(path).with_context(|| format!("loading {}", path.display()))
}

fn load_model(path: &Path) -> Result<BoostedModel<f64>> {
    BoostedModel::load(path).with_context(|| format!("loading model {}", path.display()))
}

fn check_schema(model: &BoostedModel<f64>, data: &Dataset<f64>, path: &Path) -> Result<()> {
    if model.schema() != data.schema() {
        bail!(
            "{} has features [{}] but the model expects [{}]",
            path.display(),
            data.schema().names().join(", "),
            model.schema().names().join(", ")
        );
    }
    Ok(())
}

fn echo(bundle: &mut Bundle, primary: &Path, config: &RunConfig) -> Result<()> {
    bundle.add(echo_path(primary), config.to_toml()?);
    Ok(())
}

fn generate(args: &GenerateArgs, mut config: RunConfig) -> Result<()> {
    override_with(&mut config.generator.samples, &args.samples);
    override_with(&mut config.generator.anomaly_rate, &args.anomaly_rate);
    override_some(&mut config.generator.test_fraction, &args.test_fraction);
    override_some(&mut config.paths.test_out, &args.test_out);
    override_some(&mut config.paths.out, &args.out);
    let out = require(&config.paths.out, "out")?;
    let g = &config.generator;

    let data = generate_synthetic::<f64>(g.samples, g.anomaly_rate, config.seed)?;
    let mut bundle = Bundle::default();
    match g.test_fraction {
        Some(fraction) => {
            let test_out = require(&config.paths.test_out, "test-out")?;
            let (train_part, test_part) = train_test_split(&data, fraction, config.seed)?;
            bundle.add(&out, csv_bytes(&train_part)?);
            bundle.add(test_out, csv_bytes(&test_part)?);
        }
        None => bundle.add(&out, csv_bytes(&data)?),
    }
    echo(&mut bundle, &out, &config)?;
    bundle.commit()
}

fn train_model(args: &TrainArgs, mut config: RunConfig) -> Result<()> {
    override_some(&mut config.paths.data, &args.data);
    override_some(&mut config.paths.out, &args.out);
    override_some(&mut config.paths.log, &args.log);
    let b = &mut config.boost;
    override_with(&mut b.trees, &args.trees);
    override_with(&mut b.max_depth, &args.max_depth);
    override_with(&mut b.learning_rate, &args.learning_rate);
    override_with(&mut b.lambda, &args.lambda);
    override_with(&mut b.gamma, &args.gamma);
    override_with(&mut b.min_child_hessian, &args.min_child_hessian);
    let data_path = require(&config.paths.data, "data")?;
    let out = require(&config.paths.out, "out")?;
    let log = config
        .paths
        .log
        .clone()
        .unwrap_or_else(|| out.with_extension("log.csv"));

    let data = load_data(&data_path)?;
    let outcome = train(&data, &config.boost.hyperparams(config.seed))?;

    let mut log_csv = csv::Writer::from_writer(Vec::new());
    log_csv.write_record(["round", "log_loss"])?;
    for (k, loss) in outcome.round_log_loss.iter().enumerate() {
        log_csv.write_record([(k + 1).to_string(), loss.to_string()])?;
    }

    let mut bundle = Bundle::default();
    bundle.add(&out, outcome.model.to_json()?);
    bundle.add(log, log_csv.into_inner()?);
    echo(&mut bundle, &out, &config)?;
    bundle.commit()
}

fn predict(args: &PredictArgs, mut config: RunConfig) -> Result<()> {
    override_some(&mut config.paths.model, &args.model);
    override_some(&mut config.paths.data, &args.data);
    override_some(&mut config.paths.out, &args.out);
    let model_path = require(&config.paths.model, "model")?;
    let data_path = require(&config.paths.data, "data")?;
    let out = require(&config.paths.out, "out")?;

    let model = load_model(&model_path)?;
    let data = load_data(&data_path)?;
    check_schema(&model, &data, &data_path)?;
    let margins = model.predict_margins(&data)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sample_index", "probability", "prediction"])?;
    for (i, m) in margins.iter().enumerate() {
        let p = sigmoid(*m);
        w.write_record([i.to_string(), p.to_string(), u8::from(p >= 0.5).to_string()])?;
    }
    let mut bundle = Bundle::default();
    bundle.add(&out, w.into_inner()?);
    echo(&mut bundle, &out, &config)?;
    bundle.commit()
}

#[derive(Serialize)]
struct MetricsReport<'a> {
    positive_class: &'static str,
    rows: &'a [ComparisonRow],
}

fn evaluate(args: &EvaluateArgs, mut config: RunConfig) -> Result<()> {
    override_some(&mut config.paths.model, &args.model);
    override_some(&mut config.paths.data, &args.data);
    override_some(&mut config.paths.train, &args.train);
    override_some(&mut config.paths.outdir, &args.outdir);
    let e = &mut config.evaluate;
    if !args.baselines.is_empty() {
        e.baselines = args.baselines.clone();
    }
    if !args.external.is_empty() {
        e.external = args.external.clone();
    }
    override_with(&mut e.k, &args.k);
    override_with(&mut e.model_name, &args.name);
    let model_path = require(&config.paths.model, "model")?;
    let data_path = require(&config.paths.data, "data")?;
    let outdir = require(&config.paths.outdir, "outdir")?;
    let e = &config.evaluate;

    let model = load_model(&model_path)?;
    let test = load_data(&data_path)?;
    check_schema(&model, &test, &data_path)?;

    let mut fitted: Vec<(&str, Box<dyn Classifier<f64>>)> = Vec::new();
    if !e.baselines.is_empty() {
        let train_path = require(&config.paths.train, "train")?;
        let train_data = load_data(&train_path)?;
        for baseline in &e.baselines {
            match baseline {
                Baseline::Knn => {
                    fitted.push(("KNN", Box::new(KnnClassifier::fit(&train_data, e.k)?)))
                }
                Baseline::Nb => {
                    fitted.push(("Naive Bayes", Box::new(GaussianNb::fit(&train_data)?)))
                }
            }
        }
    }
    let mut models: Vec<(&str, &dyn Classifier<f64>)> = vec![(e.model_name.as_str(), &model)];
    models.extend(fitted.iter().map(|(n, c)| (*n, c.as_ref())));
    let mut rows = compare(&models, &test)?;

    let labels = test.labels().context("test data must be fully labeled")?;
    for pair in &e.external {
        let (name, path) = pair
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--external expects NAME=PATH, got `{pair}`")))?;
        let file = std::fs::File::open(path).with_context(|| format!("opening {path}"))?;
        let preds = read_predictions(file).with_context(|| format!("reading {path}"))?;
        rows.push(
            compare_predictions(name, &preds, &labels)
                .with_context(|| format!("scoring {path}"))?,
        );
    }

    let mut table = Vec::new();
    write_comparison_csv(&rows, &mut table)?;
    let report = MetricsReport {
        positive_class: "healthy (1)",
        rows: &rows,
    };
    let mut bundle = Bundle::default();
    bundle.add(outdir.join("comparison.csv"), table);
    bundle.add(outdir.join("comparison.txt"), render_comparison_text(&rows));
    bundle.add(
        outdir.join("metrics.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    );
    echo(&mut bundle, &outdir, &config)?;
    print!("{}", render_comparison_text(&rows));
    bundle.commit()
}

fn background(config: &RunConfig, data: &Dataset<f64>) -> Result<BackgroundSet<f64>> {
    let size = config.explain.background_size;
    let set = match &config.paths.background {
        Some(path) => BackgroundSet::sample_from(&load_data(path)?, size, config.seed)?,
        None => BackgroundSet::sample_from(data, size, config.seed)?,
    };
    Ok(set)
}

fn explain(args: &ExplainArgs, mut config: RunConfig) -> Result<()> {
    override_some(&mut config.paths.model, &args.model);
    override_some(&mut config.paths.data, &args.data);
    override_some(&mut config.paths.background, &args.background);
    override_some(&mut config.paths.out, &args.out);
    override_with(&mut config.explain.background_size, &args.background_size);
    override_some(&mut config.explain.sample, &args.sample);
    let model_path = require(&config.paths.model, "model")?;
    let data_path = require(&config.paths.data, "data")?;
    let out = require(&config.paths.out, "out")?;

    let model = load_model(&model_path)?;
    let data = load_data(&data_path)?;
    check_schema(&model, &data, &data_path)?;
    let bg = background(&config, &data)?;
    let single = config.explain.sample.map(|i| [i]);
    let explanations = explain_dataset(&model, &data, single.as_ref().map(|s| &s[..]), &bg)?;

    let mut buf = Vec::new();
    write_shap_csv(&explanations, model.schema(), &mut buf)?;
    let mut bundle = Bundle::default();
    bundle.add(&out, buf);
    echo(&mut bundle, &out, &config)?;
    bundle.commit()
}

fn feature_index(model: &BoostedModel<f64>, name: &str) -> Result<usize> {
    model
        .schema()
        .index_of(name)
        .with_context(|| format!("unknown feature `{name}`"))
}

fn report(args: &ReportArgs, mut config: RunConfig) -> Result<()> {
    override_some(&mut config.paths.model, &args.model);
    override_some(&mut config.paths.data, &args.data);
    override_some(&mut config.paths.shap, &args.shap);
    override_some(&mut config.paths.background, &args.background);
    override_some(&mut config.paths.outdir, &args.outdir);
    override_with(&mut config.explain.background_size, &args.background_size);
    override_with(
        &mut config.report.dependence_feature,
        &args.dependence_feature,
    );
    override_some(&mut config.report.color_feature, &args.color_feature);
    let model_path = require(&config.paths.model, "model")?;
    let data_path = require(&config.paths.data, "data")?;
    let outdir = require(&config.paths.outdir, "outdir")?;

    let model = load_model(&model_path)?;
    let data = load_data(&data_path)?;
    check_schema(&model, &data, &data_path)?;
    let explanations: Vec<Explanation<f64>> = match &config.paths.shap {
        Some(path) => {
            let file =
                std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            read_shap_csv(file, model.schema())
                .with_context(|| format!("reading {}", path.display()))?
        }
        None => explain_dataset(&model, &data, None, &background(&config, &data)?)?,
    };
    let dep_feature = feature_index(&model, &config.report.dependence_feature)?;
    let color_feature = config
        .report
        .color_feature
        .as_deref()
        .map(|n| feature_index(&model, n))
        .transpose()?;

    let names = model.schema().names();
    let mut bundle = Bundle::default();

    let weights = weight_importance(&model);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature", "splits"])?;
    for (rank, s) in weights.iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            names[s.feature].clone(),
            s.value.to_string(),
        ])?;
    }
    bundle.add(outdir.join("weight_importance.csv"), w.into_inner()?);
    let bars: Vec<(String, f64)> = weights
        .iter()
        .map(|s| (names[s.feature].clone(), s.value as f64))
        .collect();
    bundle.add(
        outdir.join("weight_importance.svg"),
        plot::bar_chart(
            "Feature importance (split count)",
            "Number of splits",
            &bars,
        ),
    );

    let shap_rank = mean_abs_shap(&explanations)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "feature", "mean_abs_shap"])?;
    for (rank, s) in shap_rank.iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            names[s.feature].clone(),
            s.value.to_string(),
        ])?;
    }
    bundle.add(outdir.join("shap_importance.csv"), w.into_inner()?);
    let bars: Vec<(String, f64)> = shap_rank
        .iter()
        .map(|s| (names[s.feature].clone(), s.value))
        .collect();
    bundle.add(
        outdir.join("shap_importance.svg"),
        plot::bar_chart("Mean absolute Shapley value", "mean |Shapley value|", &bars),
    );

    let swarm = beeswarm_data(&explanations, &data)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["feature", "sample_index", "phi", "normalized_value"])?;
    for r in &swarm {
        w.write_record([
            names[r.feature].clone(),
            r.sample_index.to_string(),
            r.phi.to_string(),
            r.normalized.to_string(),
        ])?;
    }
    bundle.add(outdir.join("shap_beeswarm.csv"), w.into_inner()?);
    // Rows ordered by importance, most important on top.
    let strips: Vec<plot::Strip> = shap_rank
        .iter()
        .map(|s| plot::Strip {
            label: names[s.feature].clone(),
            points: swarm
                .iter()
                .filter(|r| r.feature == s.feature)
                .map(|r| (r.phi, r.normalized))
                .collect(),
        })
        .collect();
    bundle.add(
        outdir.join("shap_beeswarm.svg"),
        plot::beeswarm("Shapley values by feature", &strips, config.seed),
    );

    let dep = dependence_data(&explanations, &data, dep_feature, color_feature)?;
    let (dep_name, color_name) = (&names[dep.feature], &names[dep.color_feature]);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "sample_index",
        "feature",
        "value",
        "phi",
        "color_feature",
        "color_value",
    ])?;
    for r in &dep.rows {
        w.write_record([
            r.sample_index.to_string(),
            dep_name.clone(),
            r.value.to_string(),
            r.phi.to_string(),
            color_name.clone(),
            r.color.to_string(),
        ])?;
    }
    bundle.add(
        outdir.join(format!("dependence_{dep_name}.csv")),
        w.into_inner()?,
    );
    let (lo, hi) = dep
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.color), hi.max(r.color))
        });
    let points: Vec<(f64, f64, f64)> = dep
        .rows
        .iter()
        .map(|r| {
            let t = if hi > lo {
                (r.color - lo) / (hi - lo)
            } else {
                0.5
            };
            (r.value, r.phi, t)
        })
        .collect();
    bundle.add(
        outdir.join(format!("dependence_{dep_name}.svg")),
        plot::scatter(
            &format!("Dependence of {dep_name}"),
            dep_name,
            &format!("Shapley value of {dep_name}"),
            color_name,
            &points,
        ),
    );

    echo(&mut bundle, &outdir, &config)?;
    bundle.commit()
}
