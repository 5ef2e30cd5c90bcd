//! Benchmark-only crate; see `benches/`.

use std::path::PathBuf;

/// Chart fixtures shared with the core integration tests.
pub const CHARTS: [&str; 5] = ["bars6.svg", "bars3series.svg", "scatter.svg", "lines.svg", "heatmap.svg"];

pub fn chart_source(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn trained_model() -> psight_core::model::PerceptionModel {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/tests/fixtures/planted.psim");
    psight_core::model::load_model(&path).expect("fixture model loads")
}
