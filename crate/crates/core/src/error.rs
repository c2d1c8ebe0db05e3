use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("illegal exponent: {0}")]
    IllegalExponent(String),
    #[error("elements belong to different presentations ({0})")]
    PresentationMismatch(String),
    #[error("coefficient base mismatch: {0}")]
    BaseMismatch(String),
    #[error("degree basis is infinite: {0}")]
    InfiniteBasis(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    #[error("Gamma is not free over A on the declared generators: {0}")]
    NotFreeOverA(String),
    #[error("points are not composable: {0}")]
    NotComposable(String),
    #[error("search budget exceeded: {0}")]
    SearchBudgetExceeded(String),
    #[error("groupoid axiom failure: {0}")]
    AxiomFailure(String),
    #[error("not a cover: {0}")]
    NotACover(String),
    #[error("family is not quasi-coherent: {0}")]
    NotQuasiCoherent(String),
    #[error("unsupported base map: {0}")]
    UnsupportedBaseMap(String),
    #[error("integrality failure: {0}")]
    IntegralityFailure(String),
    #[error("solve failure: {0}")]
    SolveFailure(String),
    #[error("not an equivalence: {0}")]
    NotAnEquivalence(String),
    #[error("filtration violation: {0}")]
    FiltrationViolation(String),
    #[error("parse error{}: {message}", location.as_ref().map(|l| format!(" at {l}")).unwrap_or_default())]
    Parse {
        location: Option<String>,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl AlgebraError {
    pub fn parse(message: impl Into<String>) -> Self {
        AlgebraError::Parse {
            location: None,
            message: message.into(),
        }
    }

    pub fn parse_at(location: impl Into<String>, message: impl Into<String>) -> Self {
        AlgebraError::Parse {
            location: Some(location.into()),
            message: message.into(),
        }
    }

    /// Budget-type failures get their own exit status in the CLI.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            AlgebraError::SearchBudgetExceeded(_) | AlgebraError::InfiniteBasis(_)
        )
    }

    pub fn is_input(&self) -> bool {
        matches!(
            self,
            AlgebraError::Parse { .. }
                | AlgebraError::Io(_)
                | AlgebraError::InvalidPresentation(_)
                | AlgebraError::IllegalExponent(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, AlgebraError>;
