//! Probabilistic directional minimalist grammars.
//!
//! Lexicons of feature-bearing items ([`lexicon`]), two independent
//! well-formedness checks over polish-order item sequences
//! ([`wellformed`], [`structure`]), span-based chart parsing that
//! enumerates every derivation of a sentence ([`chart`]), derivation
//! scoring and sampling ([`model`]), and mean-field variational Bayesian
//! estimation of lexical-item probabilities ([`vb`]).

pub mod chart;
pub mod corpus;
pub mod feature;
pub mod fixtures;
pub mod lexicon;
pub mod model;
pub mod special;
pub mod structure;
pub mod vb;
pub mod wellformed;

pub use feature::{Feature, FeatureKind, FeatureSeq};
pub use lexicon::{ItemId, ItemSequence, LexicalItem, Lexicon, LexiconError};
pub use model::{Alpha, Pdmg, Theta};
pub use special::{digamma, ln_gamma, log_sum_exp};
pub use structure::{eval_sequence, seq_to_tree, DerivationTree, Expression};
pub use vb::{train, Omega, TrainConfig, TrainState};
pub use wellformed::{is_wellformed, trace_wellformed, CursorTrace};
