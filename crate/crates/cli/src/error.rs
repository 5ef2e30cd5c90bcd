use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use psight_core::advisor::AdvisorError;
use psight_core::annotations::AnnotationError;
use psight_core::chart::ChartError;
use psight_core::effects::FeatureError;
use psight_core::model::ModelError;
use psight_core::patterns::PatternError;
use psight_core::pipeline::PipelineError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    Unprocessable,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Process exit status for the CLI: 2 for problems with the input, 1 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Internal => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    pub detail: Option<String>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Conflict, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Internal, message)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serialises")
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), axum::Json(self)).into_response()
    }
}

fn from_error(code: ErrorCode, e: &impl std::fmt::Display) -> ApiError {
    ApiError::new(code, e.to_string())
}

impl From<ChartError> for ApiError {
    fn from(e: ChartError) -> Self {
        let code = match e {
            ChartError::UnknownElementId(_) => ErrorCode::NotFound,
            ChartError::MalformedSvg(_) | ChartError::NoCanvas | ChartError::InvalidAttributeValue { .. } => {
                ErrorCode::BadRequest
            }
        };
        from_error(code, &e)
    }
}

impl From<FeatureError> for ApiError {
    fn from(e: FeatureError) -> Self {
        let code = match e {
            FeatureError::EmptyChart => ErrorCode::Unprocessable,
            FeatureError::UnknownElementId(_) => ErrorCode::NotFound,
            FeatureError::InvalidDistanceMatrix => ErrorCode::Internal,
        };
        from_error(code, &e)
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::InvalidConfig(_) | ModelError::VersionMismatch { .. } | ModelError::CorruptFile(_) => {
                ErrorCode::BadRequest
            }
            ModelError::Io(_) | ModelError::UnknownElement { .. } => ErrorCode::NotFound,
            ModelError::EmptyPairSet
            | ModelError::NoPositivePairs
            | ModelError::NonFiniteLoss { .. }
            | ModelError::DimensionMismatch { .. } => ErrorCode::Unprocessable,
            ModelError::MissingFeatures(_) => ErrorCode::Internal,
        };
        from_error(code, &e)
    }
}

impl From<PatternError> for ApiError {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::Model(m) => m.into(),
            PatternError::TooFewElements | PatternError::WholeChartGroup => from_error(ErrorCode::Unprocessable, &e),
            PatternError::EmptyGroup => from_error(ErrorCode::BadRequest, &e),
            PatternError::UnknownElementId(_) => from_error(ErrorCode::NotFound, &e),
        }
    }
}

impl From<AnnotationError> for ApiError {
    fn from(e: AnnotationError) -> Self {
        let code = match &e {
            AnnotationError::Chart { source, .. } => ApiError::from(source.clone()).code,
            AnnotationError::Features { source, .. } => ApiError::from(source.clone()).code,
            AnnotationError::Io { .. } | AnnotationError::UnknownChart(_) | AnnotationError::UnknownElement { .. } => {
                ErrorCode::NotFound
            }
            AnnotationError::Json(_)
            | AnnotationError::DuplicateChart(_)
            | AnnotationError::EmptyGroup(_)
            | AnnotationError::RatingOutOfRange { .. } => ErrorCode::BadRequest,
            AnnotationError::MissingFeatures(_) => ErrorCode::Internal,
        };
        from_error(code, &e)
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Chart(e) => e.into(),
            PipelineError::Features(e) => e.into(),
            PipelineError::Patterns(e) => e.into(),
            PipelineError::Model(e) => e.into(),
            PipelineError::Annotations(e) => e.into(),
        }
    }
}

impl From<AdvisorError> for ApiError {
    fn from(e: AdvisorError) -> Self {
        match e {
            AdvisorError::Chart(e) => e.into(),
            AdvisorError::Features(e) => e.into(),
            AdvisorError::Patterns(e) => e.into(),
            AdvisorError::Model(e) => e.into(),
            AdvisorError::EmptyScope | AdvisorError::EmptyGroup => from_error(ErrorCode::BadRequest, &e),
            AdvisorError::UnknownElementId(_) => from_error(ErrorCode::NotFound, &e),
            AdvisorError::WholeChartGroup => from_error(ErrorCode::Unprocessable, &e),
            AdvisorError::StaleSuggestion => from_error(ErrorCode::Conflict, &e),
        }
    }
}
