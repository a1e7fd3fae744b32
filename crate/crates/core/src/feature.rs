//! Syntactic features and validated feature sequences.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The five kinds of syntactic feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    /// Bare category, e.g. `v`.
    Category,
    /// Selects its argument to the right, written `=x`.
    SelectRight,
    /// Selects its argument to the left, written `x=`.
    SelectLeft,
    /// Attracts a mover, written `+y`.
    Licensor,
    /// Marks a mover, written `-y`.
    Licensee,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature {
    pub kind: FeatureKind,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("malformed feature token `{0}`")]
    BadToken(String),
    #[error("feature name `{0}` must match [a-z][a-z0-9_]*")]
    BadName(String),
    #[error("feature sequence has {0} category features, expected exactly one")]
    CategoryCount(usize),
    #[error("feature `{found}` cannot follow `{after}`")]
    Order { after: String, found: String },
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Feature {
    pub fn new(kind: FeatureKind, name: impl Into<String>) -> Result<Self, FeatureError> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(FeatureError::BadName(name));
        }
        Ok(Feature { kind, name })
    }

    pub fn category(name: &str) -> Self {
        Self::new(FeatureKind::Category, name).expect("valid feature name")
    }

    pub fn is_category(&self) -> bool {
        self.kind == FeatureKind::Category
    }

    pub fn is_selector(&self) -> bool {
        matches!(self.kind, FeatureKind::SelectRight | FeatureKind::SelectLeft)
    }

    pub fn is_licensor(&self) -> bool {
        self.kind == FeatureKind::Licensor
    }

    pub fn is_licensee(&self) -> bool {
        self.kind == FeatureKind::Licensee
    }

    /// Position class in the canonical order
    /// `(selector)* (licensor)* category (licensee)*`.
    fn rank(&self) -> u8 {
        match self.kind {
            FeatureKind::SelectRight | FeatureKind::SelectLeft => 0,
            FeatureKind::Licensor => 1,
            FeatureKind::Category => 2,
            FeatureKind::Licensee => 3,
        }
    }
}

impl FromStr for Feature {
    type Err = FeatureError;

    fn from_str(token: &str) -> Result<Self, Self::Err> {
        let (kind, name) = if let Some(rest) = token.strip_prefix('=') {
            (FeatureKind::SelectRight, rest)
        } else if let Some(rest) = token.strip_suffix('=') {
            (FeatureKind::SelectLeft, rest)
        } else if let Some(rest) = token.strip_prefix('+') {
            (FeatureKind::Licensor, rest)
        } else if let Some(rest) = token.strip_prefix('-') {
            (FeatureKind::Licensee, rest)
        } else {
            (FeatureKind::Category, token)
        };
        if name.is_empty() {
            return Err(FeatureError::BadToken(token.to_string()));
        }
        Feature::new(kind, name).map_err(|_| FeatureError::BadToken(token.to_string()))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FeatureKind::Category => write!(f, "{}", self.name),
            FeatureKind::SelectRight => write!(f, "={}", self.name),
            FeatureKind::SelectLeft => write!(f, "{}=", self.name),
            FeatureKind::Licensor => write!(f, "+{}", self.name),
            FeatureKind::Licensee => write!(f, "-{}", self.name),
        }
    }
}

/// A feature sequence satisfying the ordering constraint with exactly one
/// category feature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureSeq(Vec<Feature>);

impl FeatureSeq {
    pub fn new(features: Vec<Feature>) -> Result<Self, FeatureError> {
        let categories = features.iter().filter(|f| f.is_category()).count();
        if categories != 1 {
            return Err(FeatureError::CategoryCount(categories));
        }
        for pair in features.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if b.rank() < a.rank() {
                return Err(FeatureError::Order {
                    after: a.to_string(),
                    found: b.to_string(),
                });
            }
        }
        Ok(FeatureSeq(features))
    }

    pub fn features(&self) -> &[Feature] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn category(&self) -> &Feature {
        self.0
            .iter()
            .find(|f| f.is_category())
            .expect("validated sequence has a category")
    }

    /// Index of the category feature.
    pub fn category_position(&self) -> usize {
        self.0.iter().position(|f| f.is_category()).unwrap()
    }

    pub fn selectors(&self) -> impl Iterator<Item = &Feature> {
        self.0.iter().filter(|f| f.is_selector())
    }

    pub fn licensors(&self) -> impl Iterator<Item = &Feature> {
        self.0.iter().filter(|f| f.is_licensor())
    }

    pub fn licensees(&self) -> impl Iterator<Item = &Feature> {
        self.0.iter().filter(|f| f.is_licensee())
    }

    /// True when the sequence is a single category feature.
    pub fn is_bare_category(&self) -> bool {
        self.0.len() == 1
    }
}

impl FromStr for FeatureSeq {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let features = s
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Feature>, _>>()?;
        FeatureSeq::new(features)
    }
}

impl fmt::Display for FeatureSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_features(f, &self.0)
    }
}

/// Writes features separated by single spaces.
pub fn write_features(f: &mut fmt::Formatter<'_>, features: &[Feature]) -> fmt::Result {
    for (i, feat) in features.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{feat}")?;
    }
    Ok(())
}

/// Renders a feature slice as space-separated tokens.
pub fn features_to_string(features: &[Feature]) -> String {
    features
        .iter()
        .map(Feature::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}
