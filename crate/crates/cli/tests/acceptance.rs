//! Acceptance suite. Runs every primary criterion at its stated tolerance,
//! prints one PASS/FAIL line each and exits nonzero if any fails.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use psight_cli::api::{router, AppState};
use psight_core::advisor::{conflicts, generate_suggestions, usage_summary, ConflictRule, SuggestionKind};
use psight_core::annotations::Polarity;
use psight_core::chart::{apply_edit, parse_chart};
use psight_core::effects::{extract_features, DIMENSION_NAMES, DIM_COUNT};
use psight_core::evaluation::{
    ac, ega, evaluate_corpus, generate_planted_corpus, pcr, split_corpus, Count, GroupingChannel, PlantedConfig,
};
use psight_core::model::{load_model, loss_and_gradients, save_model, ModelConfig, PairBatch, PerceptionModel};
use psight_core::patterns::{
    salience, summarize, ChartScorer, ElementGroup, GroupOrigin, Pattern, PatternError, SalienceScore,
};
use psight_core::pipeline::train_on_corpus;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};
use tower::ServiceExt;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

fn core_fixture(name: &str) -> String {
    let path = format!("{}/../core/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Outcome {
    if elapsed < limit {
        Ok(format!("{detail}; {:.2}s", elapsed.as_secs_f64()))
    } else {
        Err(format!("{detail}; took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()))
    }
}

fn salience_oracle() -> Outcome {
    let start = Instant::now();
    let model = oracles::fixture_model();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (c, svg) in oracles::SALIENCE_CHARTS.iter().enumerate() {
        let table = extract_features(&parse_chart(svg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let scorer = ChartScorer::new(&model, &table).map_err(|e| e.to_string())?;
        let n = table.len();
        if n > 6 {
            return Err(format!("chart {c} has {n} elements"));
        }
        for mask in 1..(1u32 << n) - 1 {
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let got = scorer.salience_of(&members).map_err(|e| e.to_string())?;
            let (intra, inter, ratio, display) = oracles::brute_salience(&model, &table.vectors, mask);
            let errs = [
                (got.intra_avg - intra).abs(),
                (got.inter_avg - inter).abs(),
                (got.ratio - ratio).abs() / ratio.abs().max(1.0),
                (got.display - display).abs(),
            ];
            worst = errs.into_iter().fold(worst, f64::max);
            checked += 1;
        }
        if scorer.salience_of(&(0..n).collect::<Vec<_>>()) != Err(PatternError::WholeChartGroup) {
            return Err(format!("chart {c}: whole-chart group was scored"));
        }
    }
    let elapsed = start.elapsed();
    if worst >= 1e-9 {
        return Err(format!("max error {worst:.3e} over {checked} groups"));
    }
    within(elapsed, Duration::from_secs(1), format!("{checked} groups, max error {worst:.1e}"))
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let config = ModelConfig {
        input_dim: 5,
        hidden_dim: 4,
        embed_dim: 3,
        n_subreps: 1,
        margin: 0.1,
        aux_weight: 0.5,
        learning_rate: 0.1,
        epochs: 1,
        seed: 11,
    };
    let mut params = PerceptionModel::initialize(&config).map_err(|e| e.to_string())?.params;
    for a in params.arrays_mut() {
        a.iter_mut().for_each(|v| *v *= 8.0);
    }
    let model = PerceptionModel::from_parts(config, params).map_err(|e| e.to_string())?;
    let batch = PairBatch::new(
        vec![
            vec![0.9, 0.1, 0.4, 0.0, 0.3],
            vec![0.8, 0.3, 0.5, 0.2, 0.3],
            vec![0.1, 0.7, 0.6, 0.9, 0.5],
            vec![0.2, 0.6, 0.1, 0.8, 0.0],
        ],
        vec![
            (0, 1, Polarity::Positive),
            (2, 3, Polarity::Positive),
            (0, 2, Polarity::Negative),
            (1, 3, Polarity::Negative),
        ],
    );
    let (_, grads) = loss_and_gradients(&model, &batch).map_err(|e| e.to_string())?;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (k, analytic) in grads.arrays().iter().enumerate() {
        for (idx, &a) in analytic.iter().enumerate() {
            let mut plus = model.clone();
            plus.params.arrays_mut()[k][idx] += h;
            let mut minus = model.clone();
            minus.params.arrays_mut()[k][idx] -= h;
            let lp = loss_and_gradients(&plus, &batch).map_err(|e| e.to_string())?.0.total;
            let lm = loss_and_gradients(&minus, &batch).map_err(|e| e.to_string())?.0.total;
            let numeric = (lp - lm) / (2.0 * h);
            let scale = a.abs().max(numeric.abs());
            if scale > 1e-8 {
                worst = worst.max((a - numeric).abs() / scale);
            }
            count += 1;
        }
    }
    let elapsed = start.elapsed();
    if worst >= 1e-4 {
        return Err(format!("max relative error {worst:.3e} over {count} parameters"));
    }
    within(elapsed, Duration::from_secs(5), format!("{count} parameters, max relative error {worst:.1e}"))
}

fn random_groups(rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    let n = rng.random_range(1..=5);
    (0..n)
        .map(|_| {
            let size = rng.random_range(1..=6);
            (0..size).map(|_| rng.random_range(0..10u8)).collect()
        })
        .collect()
}

fn metric_oracles() -> Outcome {
    let cases = oracles::metric_cases();
    let mut worst: f64 = 0.0;
    for c in &cases {
        let (m, h) = (oracles::letters(&c.model), oracles::letters(&c.human));
        let got = [
            ega(&m, &h).map_err(|e| e.to_string())?,
            pcr(&m, &h).map_err(|e| e.to_string())?,
            ac(&m, &h),
        ];
        for (g, want) in got.iter().zip([c.ega, c.pcr, c.ac]) {
            let err = (g - want).abs();
            if err >= 1e-12 {
                return Err(format!("case `{}`: got {g}, want {want}", c.name));
            }
            worst = worst.max(err);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..1000 {
        let (m, h) = (random_groups(&mut rng), random_groups(&mut rng));
        let values = [ega(&m, &h).unwrap(), pcr(&m, &h).unwrap(), ac(&m, &h)];
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(format!("trial {trial}: {values:?} outside [0, 1]"));
        }
    }
    Ok(format!("{} hand cases, max error {worst:.1e}; 1000 random lists in [0, 1]", cases.len()))
}

fn planted_run() -> Result<(String, Vec<u8>), String> {
    let planted = generate_planted_corpus(&PlantedConfig {
        n_charts: 20,
        groups_per_chart: Count::Range([2, 3]),
        elements_per_group: Count::Range([3, 6]),
        grouping_channel: GroupingChannel::FillHue,
        seed: 0,
    });
    let (train, test) = split_corpus(&planted.corpus, 0.8);
    if (train.charts.len(), test.charts.len()) != (16, 4) {
        return Err(format!("split gave {} / {}", train.charts.len(), test.charts.len()));
    }
    let (run, _) = train_on_corpus(&ModelConfig::default(), &train).map_err(|e| e.to_string())?;
    let report = evaluate_corpus(&run.model, &test).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("m.psim");
    save_model(&run.model, &path).map_err(|e| e.to_string())?;
    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    Ok((serde_json::to_string(&report).map_err(|e| e.to_string())?, bytes))
}

fn planted_end_to_end() -> Outcome {
    let start = Instant::now();
    let (first, model_a) = planted_run()?;
    let (second, model_b) = planted_run()?;
    let elapsed = start.elapsed();
    if first != second || model_a != model_b {
        return Err("two runs with the same seed differ".into());
    }
    let report: serde_json::Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    let mean = &report["overall"]["mean"];
    let get = |k: &str| mean[k].as_f64().unwrap_or(f64::NAN);
    let (e, p, a) = (get("ega"), get("pcr"), get("ac"));
    let detail = format!("EGA {e:.3} PCR {p:.3} AC {a:.3}, deterministic");
    if !(e >= 0.90 && p >= 0.90 && a >= 0.85) {
        return Err(detail);
    }
    within(elapsed, Duration::from_secs(120), detail)
}

fn golden_features() -> Outcome {
    let table = extract_features(&parse_chart(&core_fixture("bars6.svg")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let golden = core_fixture("bars6_features.csv");
    let mut reader = csv::Reader::from_reader(golden.as_bytes());
    let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    if header[1..] != DIMENSION_NAMES.map(String::from) {
        return Err("golden header does not list the dimensions in order".into());
    }
    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    if rows.len() != 6 || table.len() != 6 {
        return Err(format!("expected 6 rows, golden {} table {}", rows.len(), table.len()));
    }
    let round = |v: f64| (v * 1e9).round() as i64;
    for (i, row) in rows.iter().enumerate() {
        if row[0] != table.element_ids[i] {
            return Err(format!("row {i}: {} vs {}", &row[0], table.element_ids[i]));
        }
        let v = &table.vectors[i];
        for d in 0..DIM_COUNT {
            let cell = &row[d + 1];
            let ok = if cell.is_empty() {
                !v.presence_mask[d]
            } else {
                let want: f64 = cell.parse().map_err(|_| format!("bad cell {cell}"))?;
                v.presence_mask[d] && round(v.values[d]) == round(want)
            };
            if !ok {
                return Err(format!("{} {}: got {} want `{cell}`", &row[0], header[d + 1], v.values[d]));
            }
        }
    }
    Ok("6x23 table equal at 1e-9".into())
}

fn scored_pattern(ids: &[String], ratio: f64) -> Pattern {
    Pattern {
        group: ElementGroup {
            element_ids: ids.to_vec(),
            origin: GroupOrigin::ModelFull,
        },
        salience: Some(SalienceScore::from_averages(ratio, 1.0)),
        contributing_dims: vec![],
        type_counts: BTreeMap::new(),
    }
}

fn core_pattern_rule() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let universe: Vec<String> = (0..12).map(|i| format!("e{i:02}")).collect();
    let mut links = 0;
    for trial in 0..1000 {
        let draw = |rng: &mut ChaCha8Rng| {
            let mut pool = universe.clone();
            pool.shuffle(rng);
            let mut g = pool[..rng.random_range(1..=10)].to_vec();
            g.sort();
            g
        };
        let a = draw(&mut rng);
        // half the trials perturb `a` slightly so near-threshold overlaps occur
        let b = if trial % 2 == 0 {
            let mut b = a.clone();
            if rng.random_bool(0.5) && b.len() > 1 {
                b.remove(rng.random_range(0..b.len()));
            }
            if let Some(extra) = universe.iter().find(|id| !b.contains(id)) {
                if rng.random_bool(0.5) {
                    b.push(extra.clone());
                    b.sort();
                }
            }
            b
        } else {
            draw(&mut rng)
        };
        if a == b {
            continue;
        }
        let sa: BTreeSet<&String> = a.iter().collect();
        let sb: BTreeSet<&String> = b.iter().collect();
        let inter: BTreeSet<&String> = sa.intersection(&sb).copied().collect();
        let union = sa.union(&sb).count();
        let expect_link = 5 * inter.len() > 4 * union;
        let report = summarize(vec![scored_pattern(&a, 2.0), scored_pattern(&b, 1.0)], 0);
        if report.similar_links.len() != usize::from(expect_link) {
            return Err(format!("trial {trial}: {a:?} {b:?} link mismatch"));
        }
        if let Some(link) = report.similar_links.first() {
            links += 1;
            let core: BTreeSet<&String> = report.core_patterns[link.core].iter().collect();
            if core != inter {
                return Err(format!("trial {trial}: core {core:?} is not the intersection"));
            }
        }
    }
    Ok(format!("1000 pairs, {links} linked, every core equals the intersection"))
}

fn advisor_cases() -> Vec<(&'static str, Vec<String>)> {
    let ids = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    vec![
        ("bars6.svg", vec!["b4".into(), "b5".into()]),
        ("bars3series.svg", (0..8).map(|c| format!("s1c{c}")).collect()),
        ("scatter.svg", ids("g", 5)),
        ("lines.svg", ids("ma", 5)),
        ("heatmap.svg", ids("h0", 5)),
    ]
}

fn suggestion_fidelity() -> Outcome {
    let model = oracles::fixture_model();
    let rules = ConflictRule::builtin();
    let mut total = 0;
    let mut worst: f64 = 0.0;
    for (name, group) in advisor_cases() {
        let doc = parse_chart(&core_fixture(name)).map_err(|e| e.to_string())?;
        let suggestions = generate_suggestions::<&str, _>(&model, &doc, &[], &group).map_err(|e| e.to_string())?;
        let all: Vec<&str> = doc.elements.iter().map(|e| e.id.as_str()).collect();
        let usage = usage_summary(&doc, &all).map_err(|e| e.to_string())?;
        let before = salience(&model, &group, &extract_features(&doc).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for s in &suggestions {
            let edited = apply_edit(&doc, &s.edit_command).map_err(|e| e.to_string())?;
            let after = salience(&model, &group, &extract_features(&edited).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let err = (after.display - before.display - s.gain).abs();
            if err >= 1e-6 {
                return Err(format!("{name} `{}`: gain off by {err:.3e}", s.code_expression));
            }
            worst = worst.max(err);
            if s.kind == SuggestionKind::AddDimension {
                if let Some(d) = s.dim.and_then(|c| c.dims().iter().find(|&&d| conflicts(d, &usage, &rules))) {
                    return Err(format!("{name} `{}` conflicts on {}", s.code_expression, d.name()));
                }
            }
        }
        total += suggestions.len();
    }
    Ok(format!("{total} suggestions on 5 fixtures, max gain error {worst:.1e}, no conflicts"))
}

fn model_fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted.psim")
}

async fn service_report(model: PerceptionModel, svg: &str) -> Result<Vec<u8>, String> {
    let app = router(AppState::new(model, None), None);
    let upload = Request::post("/api/charts")
        .header("content-type", "application/json")
        .body(Body::from(serde_json::json!({ "svg": svg }).to_string()))
        .map_err(|e| e.to_string())?;
    let resp = app.clone().oneshot(upload).await.map_err(|e| e.to_string())?;
    if resp.status() != StatusCode::OK {
        return Err(format!("upload returned {}", resp.status()));
    }
    let created: serde_json::Value =
        serde_json::from_slice(&to_bytes(resp.into_body(), usize::MAX).await.map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let id = created["chart_id"].as_str().ok_or("no chart_id")?;
    let get = Request::get(format!("/api/charts/{id}/patterns"))
        .body(Body::empty())
        .map_err(|e| e.to_string())?;
    let resp = app.oneshot(get).await.map_err(|e| e.to_string())?;
    if resp.status() != StatusCode::OK {
        return Err(format!("patterns returned {}", resp.status()));
    }
    Ok(to_bytes(resp.into_body(), usize::MAX).await.map_err(|e| e.to_string())?.to_vec())
}

fn cli_service_parity() -> Outcome {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let model_path = model_fixture();
    let model = load_model(&model_path).map_err(|e| e.to_string())?;
    let mut bytes = 0;
    for (name, _) in advisor_cases() {
        let svg_path = format!("{}/../core/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
        let out = Command::new(env!("CARGO_BIN_EXE_psight"))
            .args(["assess", "--svg", &svg_path, "--model"])
            .arg(&model_path)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{name}: assess failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        let served = rt.block_on(service_report(model.clone(), &core_fixture(name)))?;
        if out.stdout != served {
            return Err(format!("{name}: CLI and service reports differ"));
        }
        serde_json::from_slice::<psight_core::patterns::PatternReport>(&served).map_err(|e| format!("{name}: {e}"))?;
        bytes += served.len();
    }
    Ok(format!("5 fixtures byte-identical ({bytes} bytes)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 8] = [
        ("salience oracle", salience_oracle),
        ("gradient check", gradient_check),
        ("metric oracles", metric_oracles),
        ("planted-corpus end-to-end", planted_end_to_end),
        ("feature extraction golden file", golden_features),
        ("core-pattern rule", core_pattern_rule),
        ("suggestion gain fidelity", suggestion_fidelity),
        ("CLI/service parity", cli_service_parity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
