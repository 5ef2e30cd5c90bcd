use crate::error::ApiError;
use psight_core::advisor::Suggestion;
use psight_core::chart::{parse_chart, ChartDocument};
use psight_core::effects::{extract_features_scoped, ChartFeatureTable};
use psight_core::model::PerceptionModel;
use psight_core::patterns::PatternReport;
use psight_core::pipeline::{assess, report_json};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Mutex, MutexGuard, RwLock};

/// Features and report for one (revision, scope) pair.
pub struct Analysis {
    pub revision: u64,
    pub table: ChartFeatureTable,
    pub report: PatternReport,
}

/// One chart being edited: its current revision, scope and derived state.
pub struct Session {
    pub id: String,
    pub document: ChartDocument,
    pub revision: u64,
    pub excluded: Vec<String>,
    /// Last selection posted at this revision; read-side bookkeeping.
    pub selection: Mutex<Option<Vec<String>>>,
    /// Suggestions generated against the current revision, by id.
    pub suggestions: Mutex<HashMap<String, Suggestion>>,
    analysis: Option<Analysis>,
    persist_dir: Option<PathBuf>,
}

impl Session {
    pub fn new(id: String, svg: &str, persist_root: Option<&PathBuf>) -> Result<Self, ApiError> {
        let document = parse_chart(svg)?;
        let session = Session {
            persist_dir: persist_root.map(|root| root.join(&id)),
            id,
            document,
            revision: 0,
            excluded: Vec::new(),
            selection: Mutex::new(None),
            suggestions: Mutex::new(HashMap::new()),
            analysis: None,
        };
        session.persist_svg()?;
        Ok(session)
    }

    /// Cached analysis when it belongs to the current revision and scope.
    pub fn fresh_analysis(&self) -> Option<&Analysis> {
        self.analysis.as_ref().filter(|a| a.revision == self.revision)
    }

    /// Features and pattern report for the current revision, computed on demand.
    pub fn analysis(&mut self, model: &PerceptionModel) -> Result<&Analysis, ApiError> {
        if self.fresh_analysis().is_none() {
            let table = extract_features_scoped(&self.document, &self.excluded)?;
            let report = assess(model, &self.document, &self.excluded, self.revision)?;
            self.persist_report(&report)?;
            self.analysis = Some(Analysis {
                revision: self.revision,
                table,
                report,
            });
        }
        Ok(self.analysis.as_ref().expect("analysis just computed"))
    }

    pub fn set_scope(&mut self, excluded: Vec<String>) -> Result<(), ApiError> {
        if let Some(missing) = excluded.iter().find(|id| self.document.element(id).is_none()) {
            return Err(ApiError::not_found(format!("unknown element id `{missing}`")));
        }
        self.excluded = excluded;
        self.analysis = None;
        guard(&self.suggestions).clear();
        Ok(())
    }

    /// Install an edited document as the next revision.
    pub fn commit(&mut self, document: ChartDocument) -> Result<(), ApiError> {
        self.document = document;
        self.revision += 1;
        self.analysis = None;
        guard(&self.suggestions).clear();
        let doc = &self.document;
        self.excluded.retain(|id| doc.element(id).is_some());
        let mut selection = guard(&self.selection);
        if selection.as_ref().is_some_and(|sel| sel.iter().any(|id| doc.element(id).is_none())) {
            *selection = None;
        }
        drop(selection);
        self.persist_svg()
    }

    fn persist_svg(&self) -> Result<(), ApiError> {
        let Some(dir) = &self.persist_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir).map_err(|e| ApiError::internal(e.to_string()))?;
        std::fs::write(dir.join(format!("rev-{}.svg", self.revision)), self.document.serialize())
            .map_err(|e| ApiError::internal(e.to_string()))
    }

    fn persist_report(&self, report: &PatternReport) -> Result<(), ApiError> {
        let Some(dir) = &self.persist_dir else {
            return Ok(());
        };
        std::fs::create_dir_all(dir).map_err(|e| ApiError::internal(e.to_string()))?;
        std::fs::write(dir.join(format!("rev-{}.report.json", self.revision)), report_json(report))
            .map_err(|e| ApiError::internal(e.to_string()))
    }
}

pub fn guard<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// Run `f` on the session and its current analysis. Reads share the lock;
/// only a cache miss takes it exclusively.
pub fn with_analysis<R>(
    session: &RwLock<Session>,
    model: &PerceptionModel,
    f: impl FnOnce(&Session, &Analysis) -> Result<R, ApiError>,
) -> Result<R, ApiError> {
    {
        let s = session.read().unwrap_or_else(|p| p.into_inner());
        if let Some(a) = s.fresh_analysis() {
            return f(&s, a);
        }
    }
    let mut s = session.write().unwrap_or_else(|p| p.into_inner());
    s.analysis(model)?;
    let a = s.fresh_analysis().expect("analysis just computed");
    f(&s, a)
}
