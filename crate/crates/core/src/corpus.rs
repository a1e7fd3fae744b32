//! Corpus files and training run settings.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::chart::{tokenize, ParseConfig};
use crate::lexicon::Lexicon;
use crate::model::{Alpha, ModelError};
use crate::vb::TrainConfig;

/// One sentence per line, whitespace-tokenized; blank lines are dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    sentences: Vec<Vec<String>>,
    source: Option<PathBuf>,
}

impl Corpus {
    pub fn parse(text: &str) -> Self {
        Corpus {
            sentences: text
                .lines()
                .map(tokenize)
                .filter(|s| !s.is_empty())
                .collect(),
            source: None,
        }
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let mut corpus = Corpus::parse(&fs::read_to_string(path)?);
        corpus.source = Some(path.to_path_buf());
        Ok(corpus)
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    /// The same pseudo-count on every item.
    Symmetric(f64),
    File(PathBuf),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("{name} must be at least 1")]
    Cap { name: &'static str },
    #[error("alpha must be positive, got {0}")]
    Alpha(f64),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub start_category: String,
    pub alpha: AlphaSpec,
    pub tol: f64,
    pub max_iters: usize,
    pub max_derivations: usize,
    pub max_covert: usize,
    pub seed: u64,
    pub skip_unparsed: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let parse = ParseConfig::default();
        let train = TrainConfig::default();
        RunConfig {
            start_category: parse.start_category,
            alpha: AlphaSpec::Symmetric(1.0),
            tol: train.tol,
            max_iters: train.max_iters,
            max_derivations: parse.max_derivations,
            max_covert: parse.max_covert,
            seed: 0,
            skip_unparsed: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0) {
            return Err(ConfigError::Tolerance(self.tol));
        }
        if self.max_derivations < 1 {
            return Err(ConfigError::Cap { name: "max-derivations" });
        }
        if let AlphaSpec::Symmetric(a) = self.alpha {
            if !(a > 0.0) || !a.is_finite() {
                return Err(ConfigError::Alpha(a));
            }
        }
        Ok(())
    }

    pub fn parse_config(&self) -> ParseConfig {
        ParseConfig {
            start_category: self.start_category.clone(),
            max_derivations: self.max_derivations,
            max_covert: self.max_covert,
            ..ParseConfig::default()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            tol: self.tol,
            max_iters: self.max_iters,
            parse: self.parse_config(),
            skip_unparsed: self.skip_unparsed,
        }
    }

    pub fn load_alpha(&self, lex: &Lexicon) -> Result<Alpha, ConfigError> {
        match &self.alpha {
            AlphaSpec::Symmetric(a) => Ok(Alpha::symmetric(lex, *a)?),
            AlphaSpec::File(path) => {
                let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                let value = serde_json::from_str(&text).map_err(|source| ConfigError::Json {
                    path: path.clone(),
                    source,
                })?;
                Ok(Alpha::from_json(lex, &value)?)
            }
        }
    }
}
