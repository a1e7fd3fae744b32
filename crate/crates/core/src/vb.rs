//! Mean-field variational Bayes over a fixed lexicon.
//!
//! Derivation sets are enumerated once per sentence; each iteration
//! reweights them with θ* = exp(ψ(ω) − ψ(Σω)) and adds the expected
//! item counts to the prior.

use rayon::prelude::*;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::chart::{parse, ParseConfig, ParseError};
use crate::lexicon::{ItemSequence, Lexicon};
use crate::model::{table_to_json, Alpha, ModelError};
use crate::special::{digamma, ln_gamma, DomainError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VbError {
    #[error("sentence {index} has no derivation")]
    Unparsed { index: usize },
    #[error("sentence {index}: {source}")]
    Parse { index: usize, source: ParseError },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape { expected: Vec<usize>, found: Vec<usize> },
    #[error("category {category}: θ* sums to {sum}")]
    NotSubNormalized { category: usize, sum: f64 },
    #[error("surrogate became {value} at iteration {iteration}")]
    NonFinite { iteration: usize, value: f64 },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn shape(rows: &[Vec<f64>]) -> Vec<usize> {
    rows.iter().map(Vec::len).collect()
}

fn same_shape(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<(), VbError> {
    if shape(a) != shape(b) {
        return Err(VbError::Shape {
            expected: shape(a),
            found: shape(b),
        });
    }
    Ok(())
}

/// Variational Dirichlet parameters ω.
#[derive(Debug, Clone, PartialEq)]
pub struct Omega(Vec<Vec<f64>>);

impl Omega {
    pub fn from_alpha(alpha: &Alpha) -> Self {
        Omega(alpha.rows().to_vec())
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Omega(rows)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    /// Posterior mean ω_km / Σ_m ω_km.
    pub fn mean(&self) -> Vec<Vec<f64>> {
        self.0
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|w| w / s).collect()
            })
            .collect()
    }

    pub fn to_json(&self, lex: &Lexicon) -> Value {
        table_to_json(lex, &self.0)
    }
}

/// exp of the Dirichlet log-expectations, kept in log space as well.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaStar {
    log: Vec<Vec<f64>>,
}

impl ThetaStar {
    pub fn log_rows(&self) -> &[Vec<f64>] {
        &self.log
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.log
            .iter()
            .map(|row| row.iter().map(|l| l.exp()).collect())
            .collect()
    }
}

/// θ*_km = exp(ψ(ω_km) − ψ(Σ_m ω_km)); fails if any category sums
/// above one.
pub fn theta_star(omega: &Omega) -> Result<ThetaStar, VbError> {
    let mut log = Vec::with_capacity(omega.0.len());
    for (k, row) in omega.0.iter().enumerate() {
        if row.len() == 1 {
            log.push(vec![0.0]);
            continue;
        }
        let total = digamma(row.iter().sum())?;
        let lrow = row
            .iter()
            .map(|&w| Ok(digamma(w)? - total))
            .collect::<Result<Vec<f64>, DomainError>>()?;
        let sum: f64 = lrow.iter().map(|l| l.exp()).sum();
        if !(sum <= 1.0) {
            return Err(VbError::NotSubNormalized { category: k, sum });
        }
        log.push(lrow);
    }
    Ok(ThetaStar { log })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentencePosterior {
    pub weights: Vec<f64>,
    pub log_z: f64,
}

/// E_q[c(l_km)], summed over sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCounts(pub Vec<Vec<f64>>);

impl ExpectedCounts {
    pub fn zeros(shape: &[usize]) -> Self {
        ExpectedCounts(shape.iter().map(|&m| vec![0.0; m]).collect())
    }

    pub fn total(&self) -> f64 {
        self.0.iter().flatten().sum()
    }
}

/// q(d_j) ∝ Π θ*, normalized after shifting by the largest log score.
pub fn sentence_posterior(derivations: &[ItemSequence], w: &ThetaStar) -> SentencePosterior {
    let scores: Vec<f64> = derivations
        .iter()
        .map(|d| d.ids().iter().map(|id| w.log[id.category][id.index]).sum())
        .collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return SentencePosterior {
            weights: vec![0.0; scores.len()],
            log_z: max,
        };
    }
    let shifted: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    SentencePosterior {
        weights: shifted.iter().map(|e| e / total).collect(),
        log_z: max + total.ln(),
    }
}

/// Posteriors and expected counts for every sentence. Sentences are
/// processed in parallel and reduced in corpus order.
pub fn e_step(
    derivations: &[Vec<ItemSequence>],
    w: &ThetaStar,
) -> Result<(Vec<SentencePosterior>, ExpectedCounts), VbError> {
    if let Some(index) = derivations.iter().position(Vec::is_empty) {
        return Err(VbError::Unparsed { index });
    }
    let posteriors: Vec<SentencePosterior> = derivations
        .par_iter()
        .map(|ds| sentence_posterior(ds, w))
        .collect();
    let mut counts = ExpectedCounts::zeros(&shape(&w.log));
    for (ds, post) in derivations.iter().zip(&posteriors) {
        for (d, &q) in ds.iter().zip(&post.weights) {
            for id in d.ids() {
                counts.0[id.category][id.index] += q;
            }
        }
    }
    Ok((posteriors, counts))
}

/// ω = α + counts.
pub fn m_step(alpha: &Alpha, counts: &ExpectedCounts) -> Result<Omega, VbError> {
    same_shape(alpha.rows(), &counts.0)?;
    Ok(Omega(
        alpha
            .rows()
            .iter()
            .zip(&counts.0)
            .map(|(a, c)| a.iter().zip(c).map(|(a, c)| a + c).collect())
            .collect(),
    ))
}

/// KL(Dirichlet(ω) ‖ Dirichlet(α)).
pub fn dirichlet_kl(omega: &[f64], alpha: &[f64]) -> Result<f64, DomainError> {
    if omega.len() <= 1 {
        return Ok(0.0);
    }
    let so: f64 = omega.iter().sum();
    let sa: f64 = alpha.iter().sum();
    let dso = digamma(so)?;
    let mut kl = ln_gamma(so)? - ln_gamma(sa)?;
    for (&o, &a) in omega.iter().zip(alpha) {
        kl += ln_gamma(a)? - ln_gamma(o)? + (o - a) * (digamma(o)? - dso);
    }
    Ok(kl)
}

/// Σ_n ln Z_n − Σ_k KL(Dir(ω_k) ‖ Dir(α_k)).
pub fn elbo_surrogate(omega: &Omega, alpha: &Alpha, log_z: &[f64]) -> Result<f64, VbError> {
    same_shape(alpha.rows(), &omega.0)?;
    let mut kl = 0.0;
    for (o, a) in omega.0.iter().zip(alpha.rows()) {
        kl += dirichlet_kl(o, a)?;
    }
    Ok(log_z.iter().sum::<f64>() - kl)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub parse: ParseConfig,
    /// Drop sentences without derivations instead of failing.
    pub skip_unparsed: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            tol: 1e-6,
            max_iters: 100,
            parse: ParseConfig::default(),
            skip_unparsed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub omega: Omega,
    pub theta_mean: Vec<Vec<f64>>,
    /// Surrogate at ω⁽⁰⁾ = α, then after every update.
    pub elbo_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Indices of skipped sentences.
    pub unparsed: Vec<usize>,
    /// Derivations of the sentences that were kept, in corpus order.
    pub derivations: Vec<Vec<ItemSequence>>,
    /// q under the final ω.
    pub posteriors: Vec<SentencePosterior>,
}

impl TrainState {
    /// `{"omega", "theta_mean", "elbo_trace", "iterations", "converged", "unparsed"}`.
    pub fn to_json(&self, lex: &Lexicon) -> Value {
        let mut map = Map::new();
        map.insert("omega".into(), self.omega.to_json(lex));
        map.insert("theta_mean".into(), table_to_json(lex, &self.theta_mean));
        map.insert("elbo_trace".into(), Value::from(self.elbo_trace.clone()));
        map.insert("iterations".into(), Value::from(self.iterations));
        map.insert("converged".into(), Value::from(self.converged));
        map.insert("unparsed".into(), Value::from(self.unparsed.clone()));
        Value::Object(map)
    }
}

/// Parses every sentence once and runs coordinate ascent from ω = α.
pub fn train(
    corpus: &[Vec<String>],
    lex: &Lexicon,
    alpha: &Alpha,
    cfg: &TrainConfig,
) -> Result<TrainState, VbError> {
    if corpus.is_empty() {
        return Err(VbError::EmptyCorpus);
    }
    same_shape(&lex.category_sizes().iter().map(|&m| vec![0.0; m]).collect::<Vec<_>>(), alpha.rows())?;
    let parsed: Vec<Result<Vec<ItemSequence>, ParseError>> = corpus
        .par_iter()
        .map(|s| parse(s, lex, &cfg.parse).map(|f| f.into_sequences()))
        .collect();
    let mut derivations = Vec::with_capacity(corpus.len());
    let mut unparsed = Vec::new();
    for (index, r) in parsed.into_iter().enumerate() {
        let ds = r.map_err(|source| VbError::Parse { index, source })?;
        if ds.is_empty() {
            if cfg.skip_unparsed {
                unparsed.push(index);
                continue;
            }
            return Err(VbError::Unparsed { index });
        }
        derivations.push(ds);
    }
    train_on_derivations(derivations, unparsed, alpha, cfg)
}

/// The ascent loop over already-enumerated derivation sets.
pub fn train_on_derivations(
    derivations: Vec<Vec<ItemSequence>>,
    unparsed: Vec<usize>,
    alpha: &Alpha,
    cfg: &TrainConfig,
) -> Result<TrainState, VbError> {
    let surrogate = |omega: &Omega, iteration: usize| -> Result<_, VbError> {
        let w = theta_star(omega)?;
        let (posteriors, counts) = e_step(&derivations, &w)?;
        let log_z: Vec<f64> = posteriors.iter().map(|p| p.log_z).collect();
        let s = elbo_surrogate(omega, alpha, &log_z)?;
        if !s.is_finite() {
            return Err(VbError::NonFinite { iteration, value: s });
        }
        Ok((s, posteriors, counts))
    };

    let mut omega = Omega::from_alpha(alpha);
    let (mut s, mut posteriors, mut counts) = surrogate(&omega, 0)?;
    let mut trace = vec![s];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        omega = m_step(alpha, &counts)?;
        iterations += 1;
        let (next, p, c) = surrogate(&omega, iterations)?;
        trace.push(next);
        posteriors = p;
        counts = c;
        let delta = (next - s).abs();
        s = next;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(TrainState {
        theta_mean: omega.mean(),
        omega,
        elbo_trace: trace,
        iterations,
        converged,
        unparsed,
        derivations,
        posteriors,
    })
}
