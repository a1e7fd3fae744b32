//! Per-category probabilities over lexical items, derivation scoring, the
//! Dirichlet-Categorical generative model and rejection sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::lexicon::{ItemId, ItemSequence, Lexicon, LexiconError};
use crate::special::{ln_gamma, DomainError};
use crate::wellformed::is_wellformed;

/// Tolerance on Σ_m θ_km = 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("expected {expected:?} entries per category, found {found:?}")]
    Shape { expected: Vec<usize>, found: Vec<usize> },
    #[error("category `{category}` entry {index}: {value} is not a valid {what}")]
    InvalidEntry {
        category: String,
        index: usize,
        value: f64,
        what: &'static str,
    },
    #[error("category `{category}` sums to {sum}, not 1")]
    NotNormalized { category: String, sum: f64 },
    #[error("sequence is not a well-formed derivation")]
    IllFormed,
    #[error("parameter file: {0}")]
    Json(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

fn check_shape(lex: &Lexicon, rows: &[Vec<f64>]) -> Result<(), ModelError> {
    let expected = lex.category_sizes();
    let found: Vec<usize> = rows.iter().map(Vec::len).collect();
    if expected != found {
        return Err(ModelError::Shape { expected, found });
    }
    Ok(())
}

/// Renders per-category vectors as `{"category": [values...]}` in lexicon
/// order.
pub fn table_to_json(lex: &Lexicon, rows: &[Vec<f64>]) -> Value {
    let mut map = Map::new();
    for (name, row) in lex.categories().iter().zip(rows) {
        map.insert(name.clone(), Value::from(row.clone()));
    }
    Value::Object(map)
}

/// Reads per-category vectors keyed by category name; every category of
/// the lexicon must be present.
pub fn table_from_json(lex: &Lexicon, value: &Value) -> Result<Vec<Vec<f64>>, ModelError> {
    let map = value
        .as_object()
        .ok_or_else(|| ModelError::Json("expected an object keyed by category".into()))?;
    for key in map.keys() {
        if lex.category_index(key).is_none() {
            return Err(ModelError::Lexicon(LexiconError::UnknownCategory(key.clone())));
        }
    }
    lex.categories()
        .iter()
        .map(|name| {
            let row = map
                .get(name)
                .and_then(Value::as_array)
                .ok_or_else(|| ModelError::Json(format!("missing array for category `{name}`")))?;
            row.iter()
                .map(|v| {
                    v.as_f64()
                        .ok_or_else(|| ModelError::Json(format!("non-numeric entry for `{name}`")))
                })
                .collect()
        })
        .collect()
}

/// θ: one probability vector per category.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta(Vec<Vec<f64>>);

impl Theta {
    pub fn new(lex: &Lexicon, rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        check_shape(lex, &rows)?;
        for (k, row) in rows.iter().enumerate() {
            for (m, &p) in row.iter().enumerate() {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(ModelError::InvalidEntry {
                        category: lex.categories()[k].clone(),
                        index: m,
                        value: p,
                        what: "probability",
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(ModelError::NotNormalized {
                    category: lex.categories()[k].clone(),
                    sum,
                });
            }
        }
        Ok(Theta(rows))
    }

    pub fn uniform(lex: &Lexicon) -> Self {
        Theta(
            lex.category_sizes()
                .into_iter()
                .map(|m| vec![1.0 / m as f64; m])
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn prob(&self, id: ItemId) -> f64 {
        self.0[id.category][id.index]
    }

    pub fn to_json(&self, lex: &Lexicon) -> Value {
        table_to_json(lex, &self.0)
    }

    pub fn from_json(lex: &Lexicon, value: &Value) -> Result<Self, ModelError> {
        Theta::new(lex, table_from_json(lex, value)?)
    }
}

/// α: Dirichlet pseudo-counts, one positive vector per category.
#[derive(Debug, Clone, PartialEq)]
pub struct Alpha(Vec<Vec<f64>>);

impl Alpha {
    pub fn new(lex: &Lexicon, rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        check_shape(lex, &rows)?;
        for (k, row) in rows.iter().enumerate() {
            for (m, &a) in row.iter().enumerate() {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(ModelError::InvalidEntry {
                        category: lex.categories()[k].clone(),
                        index: m,
                        value: a,
                        what: "pseudo-count",
                    });
                }
            }
        }
        Ok(Alpha(rows))
    }

    /// The same pseudo-count `a` on every item.
    pub fn symmetric(lex: &Lexicon, a: f64) -> Result<Self, ModelError> {
        Alpha::new(
            lex,
            lex.category_sizes().into_iter().map(|m| vec![a; m]).collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn get(&self, id: ItemId) -> f64 {
        self.0[id.category][id.index]
    }

    /// Prior mean α_km / Σ_m α_km.
    pub fn mean(&self) -> Vec<Vec<f64>> {
        self.0
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|a| a / s).collect()
            })
            .collect()
    }

    pub fn to_json(&self, lex: &Lexicon) -> Value {
        table_to_json(lex, &self.0)
    }

    pub fn from_json(lex: &Lexicon, value: &Value) -> Result<Self, ModelError> {
        Alpha::new(lex, table_from_json(lex, value)?)
    }
}

/// ln Dirichlet(θ; α). A single-item category is a point mass with
/// density 1.
pub fn dirichlet_log_density(theta: &[f64], alpha: &[f64]) -> Result<f64, DomainError> {
    if theta.len() <= 1 {
        return Ok(0.0);
    }
    let total: f64 = alpha.iter().sum();
    let mut out = ln_gamma(total)?;
    for (&t, &a) in theta.iter().zip(alpha) {
        out -= ln_gamma(a)?;
        out += (a - 1.0) * t.ln();
    }
    Ok(out)
}

/// A lexicon with item probabilities.
#[derive(Debug, Clone)]
pub struct Pdmg {
    lexicon: Lexicon,
    theta: Theta,
}

impl Pdmg {
    pub fn new(lexicon: Lexicon, theta: Theta) -> Result<Self, ModelError> {
        check_shape(&lexicon, theta.rows())?;
        Ok(Pdmg { lexicon, theta })
    }

    pub fn uniform(lexicon: Lexicon) -> Self {
        let theta = Theta::uniform(&lexicon);
        Pdmg { lexicon, theta }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    /// ln P(d): the sum of item log-probabilities when `seq` is
    /// well-formed, −∞ otherwise.
    pub fn log_prob_of_derivation(&self, seq: &ItemSequence) -> Result<f64, ModelError> {
        let items = self.lexicon.resolve(seq)?;
        if !is_wellformed(&items) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(seq.ids().iter().map(|&id| self.theta.prob(id).ln()).sum())
    }

    pub fn prob_of_derivation(&self, seq: &ItemSequence) -> Result<f64, ModelError> {
        Ok(self.log_prob_of_derivation(seq)?.exp())
    }

    /// ln P(d, θ | α) = ln P(d | θ) + Σ_k ln Dirichlet(θ_k; α_k).
    pub fn log_joint(&self, seq: &ItemSequence, alpha: &Alpha) -> Result<f64, ModelError> {
        check_shape(&self.lexicon, alpha.rows())?;
        let items = self.lexicon.resolve(seq)?;
        if !is_wellformed(&items) {
            return Err(ModelError::IllFormed);
        }
        let mut out: f64 = seq.ids().iter().map(|&id| self.theta.prob(id).ln()).sum();
        for (theta_k, alpha_k) in self.theta.rows().iter().zip(alpha.rows()) {
            out += dirichlet_log_density(theta_k, alpha_k)?;
        }
        Ok(out)
    }
}

/// Draws θ_k ~ Dirichlet(α_k) for every category from a seeded stream.
pub fn sample_theta(alpha: &Alpha, seed: u64) -> Theta {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_theta_with(alpha, &mut rng)
}

pub fn sample_theta_with<R: Rng + ?Sized>(alpha: &Alpha, rng: &mut R) -> Theta {
    let rows = alpha
        .rows()
        .iter()
        .map(|row| {
            if row.len() == 1 {
                return vec![1.0];
            }
            let draws: Vec<f64> = row
                .iter()
                .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
                .collect();
            let total: f64 = draws.iter().sum();
            if total > 0.0 {
                draws.iter().map(|g| g / total).collect()
            } else {
                // every gamma draw underflowed; the largest α wins
                let best = row
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap();
                (0..row.len()).map(|i| if i == best { 1.0 } else { 0.0 }).collect()
            }
        })
        .collect();
    Theta(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleConfig {
    pub max_depth: usize,
    pub max_rejections: usize,
    /// Bound on items in one draft derivation.
    pub max_items: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            max_depth: 50,
            max_rejections: 10_000,
            max_items: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("unknown start category `{0}`")]
    UnknownStart(String),
    #[error("no draft derivation finished within depth {0}")]
    DepthExceeded(usize),
    #[error("no well-formed derivation after {0} draws")]
    RejectionsExceeded(usize),
}

enum Draft {
    Done,
    /// Depth or size bound hit.
    Runaway,
    /// A selector names a category with no items or zero mass.
    Stuck,
}

fn categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if u < acc {
                return Some(i);
            }
        }
    }
    last
}

fn draft<R: Rng + ?Sized>(
    g: &Pdmg,
    k: usize,
    depth: usize,
    cfg: &SampleConfig,
    out: &mut Vec<ItemId>,
    rng: &mut R,
) -> Draft {
    if depth > cfg.max_depth || out.len() >= cfg.max_items {
        return Draft::Runaway;
    }
    let Some(m) = categorical(&g.theta.rows()[k], rng) else {
        return Draft::Stuck;
    };
    let id = ItemId::new(k, m);
    out.push(id);
    let item = g.lexicon.item(id).expect("sampled id exists");
    for sel in item.features.selectors() {
        let Some(child) = g.lexicon.category_index(&sel.name) else {
            return Draft::Stuck;
        };
        match draft(g, child, depth + 1, cfg, out, rng) {
            Draft::Done => {}
            other => return other,
        }
    }
    Draft::Done
}

/// Draws a derivation rooted in `start`: the root from θ_start, then one
/// child per selector, depth-first, each from the θ of the selected
/// category. Drafts that fail the well-formedness check are redrawn.
pub fn sample_derivation_with<R: Rng + ?Sized>(
    g: &Pdmg,
    start: &str,
    cfg: &SampleConfig,
    rng: &mut R,
) -> Result<ItemSequence, SampleError> {
    let k = g
        .lexicon
        .category_index(start)
        .ok_or_else(|| SampleError::UnknownStart(start.to_string()))?;
    let mut finished_any = false;
    let mut ids = Vec::new();
    for _ in 0..cfg.max_rejections.max(1) {
        ids.clear();
        match draft(g, k, 0, cfg, &mut ids, rng) {
            Draft::Done => {
                finished_any = true;
                let seq = ItemSequence::new(ids.clone());
                let items = g.lexicon.resolve(&seq).expect("sampled ids exist");
                if is_wellformed(&items) {
                    return Ok(seq);
                }
            }
            Draft::Stuck => finished_any = true,
            Draft::Runaway => {}
        }
    }
    if finished_any {
        Err(SampleError::RejectionsExceeded(cfg.max_rejections))
    } else {
        Err(SampleError::DepthExceeded(cfg.max_depth))
    }
}

pub fn sample_derivation(
    g: &Pdmg,
    start: &str,
    cfg: &SampleConfig,
    seed: u64,
) -> Result<ItemSequence, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_derivation_with(g, start, cfg, &mut rng)
}

/// `n` accepted samples from one seeded stream.
pub fn sample_derivations(
    g: &Pdmg,
    start: &str,
    cfg: &SampleConfig,
    seed: u64,
    n: usize,
) -> Result<Vec<ItemSequence>, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| sample_derivation_with(g, start, cfg, &mut rng))
        .collect()
}
