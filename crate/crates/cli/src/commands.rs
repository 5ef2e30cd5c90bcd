//! Subcommand bodies. Each returns the text it would write, so the binary
//! and the tests share one code path.

use crate::error::ApiError;
use psight_core::advisor::generate_suggestions;
use psight_core::annotations::load_corpus;
use psight_core::chart::{parse_chart, ChartDocument};
use psight_core::evaluation::{evaluate_corpus, generate_planted_corpus, split_corpus, PlantedConfig};
use psight_core::model::{load_model, save_model, ModelConfig, PerceptionModel};
use psight_core::pipeline::{assess, report_json, train_on_corpus};
use serde::de::DeserializeOwned;
use std::path::{Path, PathBuf};

fn read_text(path: &Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path)
        .map_err(|e| ApiError::not_found(format!("cannot read {}", path.display())).with_detail(e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), ApiError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| ApiError::internal(e.to_string()))?;
    }
    std::fs::write(path, text)
        .map_err(|e| ApiError::internal(format!("cannot write {}", path.display())).with_detail(e.to_string()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ApiError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| ApiError::bad_request(format!("invalid JSON in {}", path.display())).with_detail(e.to_string()))
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

pub fn load_chart(path: &Path) -> Result<ChartDocument, ApiError> {
    Ok(parse_chart(&read_text(path)?)?)
}

pub fn open_model(path: &Path) -> Result<PerceptionModel, ApiError> {
    Ok(load_model(path)?)
}

/// Split a comma separated id list, dropping blanks.
pub fn id_list(text: &str) -> Vec<String> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// PatternReport JSON for a chart at revision 0.
pub fn assess_file(svg: &Path, model: &Path, excluded: &[String]) -> Result<String, ApiError> {
    let doc = load_chart(svg)?;
    let model = open_model(model)?;
    Ok(report_json(&assess(&model, &doc, excluded, 0)?))
}

pub struct TrainOptions {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub train_fraction: Option<f64>,
}

pub struct TrainOutcome {
    pub model: PerceptionModel,
    pub loss_csv: PathBuf,
    pub warnings: Vec<String>,
}

/// The loss curve sits next to the model as `<out>.loss.csv`.
pub fn loss_csv_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".loss.csv");
    out.with_file_name(name)
}

pub fn train_command(opts: &TrainOptions) -> Result<TrainOutcome, ApiError> {
    let mut config: ModelConfig = match &opts.config {
        Some(path) => read_json(path)?,
        None => ModelConfig::default(),
    };
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    let corpus = load_corpus(&opts.corpus)?;
    let corpus = match opts.train_fraction {
        Some(f) if !(0.0..=1.0).contains(&f) => {
            return Err(ApiError::bad_request(format!("train fraction {f} is outside [0, 1]")));
        }
        Some(f) => split_corpus(&corpus, f).0,
        None => corpus,
    };
    let (run, warnings) = train_on_corpus(&config, &corpus)?;
    save_model(&run.model, &opts.out)?;
    let mut csv = String::from("epoch,loss\n");
    for (epoch, loss) in run.losses.iter().enumerate() {
        csv.push_str(&format!("{epoch},{loss}\n"));
    }
    let loss_csv = loss_csv_path(&opts.out);
    write_text(&loss_csv, &csv)?;
    Ok(TrainOutcome {
        model: run.model,
        loss_csv,
        warnings,
    })
}

/// Per-chart and overall metrics. With `test_fraction`, only the trailing
/// charts of the split are scored.
pub fn evaluate_command(corpus: &Path, model: &Path, test_fraction: Option<f64>) -> Result<String, ApiError> {
    let corpus = load_corpus(corpus)?;
    let model = open_model(model)?;
    let corpus = match test_fraction {
        Some(f) if !(0.0..=1.0).contains(&f) => {
            return Err(ApiError::bad_request(format!("test fraction {f} is outside [0, 1]")));
        }
        Some(f) => split_corpus(&corpus, 1.0 - f).1,
        None => corpus,
    };
    Ok(pretty(&evaluate_corpus(&model, &corpus)?))
}

pub fn suggest_command(svg: &Path, model: &Path, group: &[String], excluded: &[String]) -> Result<String, ApiError> {
    if group.is_empty() {
        return Err(ApiError::bad_request("--group needs at least one element id"));
    }
    let doc = load_chart(svg)?;
    let model = open_model(model)?;
    Ok(pretty(&generate_suggestions(&model, &doc, excluded, group)?))
}

/// Writes the corpus under `out` and returns the corpus file path.
pub fn gen_corpus_command(config: &Path, out: &Path) -> Result<PathBuf, ApiError> {
    let config: PlantedConfig = read_json(config)?;
    generate_planted_corpus(&config)
        .write_to(out)
        .map_err(|e| ApiError::internal(format!("cannot write corpus to {}", out.display())).with_detail(e.to_string()))
}
