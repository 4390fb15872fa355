use std::fmt;
use std::path::PathBuf;

/// Pipeline stage a registration error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    SceneSampling,
    ObjectSampling,
    Initialisation,
    Optimisation,
    Substitution,
    Benchmark,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::SceneSampling => "scene sampling",
            Stage::ObjectSampling => "object sampling",
            Stage::Initialisation => "initialisation",
            Stage::Optimisation => "optimisation",
            Stage::Substitution => "substitution",
            Stage::Benchmark => "benchmark generation",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("cannot read `{}`: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write `{}`: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("malformed JSON in `{}`: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("load error: {0}")]
    Load(String),

    #[error("invalid configuration: {0}")]
    Config(#[source] sdfreg_core::Error),

    #[error("{stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: sdfreg_core::Error,
    },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    pub(crate) fn stage(stage: Stage) -> impl FnOnce(sdfreg_core::Error) -> Self {
        move |source| HarnessError::Stage { stage, source }
    }

    pub(crate) fn load(msg: impl Into<String>) -> Self {
        HarnessError::Load(msg.into())
    }

    /// Process exit code: 2 for load errors, 3 for registration failures,
    /// 4 for internal aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Read { .. } | HarnessError::Json { .. } | HarnessError::Load(_) | HarnessError::Config(_) => 2,
            HarnessError::Stage {
                source: sdfreg_core::Error::OptimizationAbort { .. },
                ..
            } => 4,
            HarnessError::Stage { .. } => 3,
            HarnessError::Write { .. } | HarnessError::Csv(_) | HarnessError::ThreadPool(_) => 4,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
