//! Merge and move over string-valued chains, derivation trees rebuilt from
//! polish-order sequences, and bottom-up evaluation.
//!
//! This is a second, independent definition of well-formedness: a
//! sequence is accepted when its tree evaluates with every feature
//! checked.

use std::fmt;

use thiserror::Error;

use crate::feature::{features_to_string, Feature, FeatureKind};
use crate::lexicon::LexicalItem;

/// A word string paired with its unchecked features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub phon: String,
    pub features: Vec<Feature>,
}

impl Chain {
    pub fn new(phon: impl Into<String>, features: Vec<Feature>) -> Self {
        Chain {
            phon: phon.into(),
            features,
        }
    }

    fn first(&self) -> Option<&Feature> {
        self.features.first()
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phon = if self.phon.is_empty() { "ε" } else { &self.phon };
        write!(f, "{phon} : {}", features_to_string(&self.features))
    }
}

/// A head chain plus the chains still waiting to move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expression {
    pub head: Chain,
    pub movers: Vec<Chain>,
}

impl Expression {
    pub fn lexical(item: &LexicalItem) -> Self {
        Expression {
            head: Chain::new(item.phon.clone(), item.features.features().to_vec()),
            movers: Vec::new(),
        }
    }

    pub fn new(head: Chain, movers: Vec<Chain>) -> Self {
        Expression { head, movers }
    }

    fn mover_position(&self, licensee: &str) -> Option<usize> {
        self.movers.iter().position(|m| {
            m.first()
                .is_some_and(|f| f.kind == FeatureKind::Licensee && f.name == licensee)
        })
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.head)?;
        for m in &self.movers {
            write!(f, ", {m}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("feature mismatch: `{functor}` cannot combine with `{argument}`")]
    FeatureMismatch { functor: String, argument: String },
    #[error("rule precondition failed: {0}")]
    Precondition(&'static str),
    #[error("shortest move constraint: two movers lead with -{0}")]
    Smc(String),
    #[error("no mover leads with -{0}")]
    NoMatchingMover(String),
}

/// Joins word strings with one space, leaving covert strings invisible.
pub fn concat(left: &str, right: &str) -> String {
    match (left.is_empty(), right.is_empty()) {
        (true, _) => right.to_string(),
        (_, true) => left.to_string(),
        _ => format!("{left} {right}"),
    }
}

fn check_smc(movers: &[Chain]) -> Result<(), OpError> {
    for (i, a) in movers.iter().enumerate() {
        let Some(fa) = a.first() else { continue };
        if movers[i + 1..].iter().any(|b| b.first().is_some_and(|fb| fb.name == fa.name)) {
            return Err(OpError::Smc(fa.name.clone()));
        }
    }
    Ok(())
}

fn selector_of(s: &Expression, kinds: &[FeatureKind]) -> Result<String, OpError> {
    match s.head.first() {
        Some(f) if kinds.contains(&f.kind) => Ok(f.name.clone()),
        _ => Err(OpError::Precondition("functor head does not start with the required selector")),
    }
}

fn mismatch(s: &Expression, t: &Expression) -> OpError {
    OpError::FeatureMismatch {
        functor: s.head.to_string(),
        argument: t.head.to_string(),
    }
}

/// Argument head must be exactly the category `x`.
fn final_category(t: &Expression, x: &str) -> bool {
    t.head.features.len() == 1 && t.head.features[0].is_category() && t.head.features[0].name == x
}

/// `[s : x= γ, λ..] [t : x, ι..]  =>  [t s : γ, ι.., λ..]`
pub fn merge_left(s: &Expression, t: &Expression) -> Result<Expression, OpError> {
    let x = selector_of(s, &[FeatureKind::SelectLeft])?;
    if !final_category(t, &x) {
        return Err(mismatch(s, t));
    }
    let movers: Vec<Chain> = t.movers.iter().chain(&s.movers).cloned().collect();
    check_smc(&movers)?;
    Ok(Expression {
        head: Chain::new(concat(&t.head.phon, &s.head.phon), s.head.features[1..].to_vec()),
        movers,
    })
}

/// `[s : =x γ, λ..] [t : x, ι..]  =>  [s t : γ, λ.., ι..]`
pub fn merge_right(s: &Expression, t: &Expression) -> Result<Expression, OpError> {
    let x = selector_of(s, &[FeatureKind::SelectRight])?;
    if !final_category(t, &x) {
        return Err(mismatch(s, t));
    }
    let movers: Vec<Chain> = s.movers.iter().chain(&t.movers).cloned().collect();
    check_smc(&movers)?;
    Ok(Expression {
        head: Chain::new(concat(&s.head.phon, &t.head.phon), s.head.features[1..].to_vec()),
        movers,
    })
}

/// `[s : =x γ | x= γ, λ..] [t : x δ, ι..]  =>  [s : γ, λ.., t : δ, ι..]`
/// with `δ` non-empty.
pub fn merge_mover(s: &Expression, t: &Expression) -> Result<Expression, OpError> {
    let x = selector_of(s, &[FeatureKind::SelectRight, FeatureKind::SelectLeft])?;
    match t.head.first() {
        Some(f) if f.is_category() && f.name == x => {}
        _ => return Err(mismatch(s, t)),
    }
    if t.head.features.len() < 2 {
        return Err(OpError::Precondition("argument has no licensee left; use merge_left/merge_right"));
    }
    let mut movers = s.movers.clone();
    movers.push(Chain::new(t.head.phon.clone(), t.head.features[1..].to_vec()));
    movers.extend(t.movers.iter().cloned());
    check_smc(&movers)?;
    Ok(Expression {
        head: Chain::new(s.head.phon.clone(), s.head.features[1..].to_vec()),
        movers,
    })
}

fn licensor_of(s: &Expression) -> Result<String, OpError> {
    match s.head.first() {
        Some(f) if f.is_licensor() => Ok(f.name.clone()),
        _ => Err(OpError::Precondition("head does not start with a licensor")),
    }
}

/// `[s : +y γ, t : -y, λ..]  =>  [t s : γ, λ..]`
pub fn move_final(s: &Expression) -> Result<Expression, OpError> {
    let y = licensor_of(s)?;
    let at = s.mover_position(&y).ok_or_else(|| OpError::NoMatchingMover(y.clone()))?;
    if s.movers[at].features.len() != 1 {
        return Err(OpError::Precondition("mover moves again; use move_again"));
    }
    let mut movers = s.movers.clone();
    let mover = movers.remove(at);
    Ok(Expression {
        head: Chain::new(concat(&mover.phon, &s.head.phon), s.head.features[1..].to_vec()),
        movers,
    })
}

/// `[s : +y γ, t : -y δ, λ..]  =>  [s : γ, t : δ, λ..]` with `δ` non-empty.
pub fn move_again(s: &Expression) -> Result<Expression, OpError> {
    let y = licensor_of(s)?;
    let at = s.mover_position(&y).ok_or_else(|| OpError::NoMatchingMover(y.clone()))?;
    if s.movers[at].features.len() < 2 {
        return Err(OpError::Precondition("mover lands here; use move_final"));
    }
    let mut movers = s.movers.clone();
    movers[at].features.remove(0);
    check_smc(&movers)?;
    Ok(Expression {
        head: Chain::new(s.head.phon.clone(), s.head.features[1..].to_vec()),
        movers,
    })
}

/// A derivation tree over borrowed lexical items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivationTree<'a> {
    Leaf(&'a LexicalItem),
    /// Functor first, argument second.
    Merge(Box<DerivationTree<'a>>, Box<DerivationTree<'a>>),
    Move(Box<DerivationTree<'a>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("empty sequence")]
    Empty,
    #[error("sequence ended while {0} argument slot(s) were still open")]
    Exhausted(usize),
    #[error("{0} item(s) left over after the tree was complete")]
    Leftover(usize),
}

/// Rebuilds the tree a polish-order sequence encodes: each item takes one
/// argument subtree per selector, consumed depth-first, and one move node
/// per licensor above its last merge.
pub fn seq_to_tree<'a>(seq: &[&'a LexicalItem]) -> Result<DerivationTree<'a>, TreeError> {
    if seq.is_empty() {
        return Err(TreeError::Empty);
    }
    let mut rest = seq;
    let tree = build(&mut rest)?;
    if !rest.is_empty() {
        return Err(TreeError::Leftover(rest.len()));
    }
    Ok(tree)
}

fn build<'a>(rest: &mut &[&'a LexicalItem]) -> Result<DerivationTree<'a>, TreeError> {
    let (&item, tail) = rest.split_first().ok_or(TreeError::Exhausted(1))?;
    *rest = tail;
    let mut tree = DerivationTree::Leaf(item);
    let selectors = item.features.selectors().count();
    for open in (1..=selectors).rev() {
        let arg = build(rest).map_err(|e| match e {
            TreeError::Exhausted(n) => TreeError::Exhausted(n + open - 1),
            other => other,
        })?;
        tree = DerivationTree::Merge(Box::new(tree), Box::new(arg));
    }
    for _ in item.features.licensors() {
        tree = DerivationTree::Move(Box::new(tree));
    }
    Ok(tree)
}

impl<'a> DerivationTree<'a> {
    /// Leaves in depth-first order; the inverse of [`seq_to_tree`].
    pub fn leaves(&self) -> Vec<&'a LexicalItem> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<&'a LexicalItem>) {
        match self {
            DerivationTree::Leaf(item) => out.push(item),
            DerivationTree::Merge(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            DerivationTree::Move(a) => a.collect_leaves(out),
        }
    }

    pub fn merge_count(&self) -> usize {
        match self {
            DerivationTree::Leaf(_) => 0,
            DerivationTree::Merge(a, b) => 1 + a.merge_count() + b.merge_count(),
            DerivationTree::Move(a) => a.merge_count(),
        }
    }

    pub fn move_count(&self) -> usize {
        match self {
            DerivationTree::Leaf(_) => 0,
            DerivationTree::Merge(a, b) => a.move_count() + b.move_count(),
            DerivationTree::Move(a) => 1 + a.move_count(),
        }
    }

    /// Evaluates bottom-up, picking the rule variant from the features.
    pub fn evaluate(&self) -> Result<Expression, OpError> {
        match self {
            DerivationTree::Leaf(item) => Ok(Expression::lexical(item)),
            DerivationTree::Merge(a, b) => {
                let s = a.evaluate()?;
                let t = b.evaluate()?;
                apply_merge(&s, &t)
            }
            DerivationTree::Move(a) => apply_move(&a.evaluate()?),
        }
    }

    /// Bracketed rendering with the rule and resulting expression at every
    /// internal node.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let pad = "  ".repeat(depth);
        let label = match self.evaluate() {
            Ok(e) => e.to_string(),
            Err(err) => format!("<{err}>"),
        };
        match self {
            DerivationTree::Leaf(item) => {
                out.push_str(&format!("{pad}[{item}]"));
            }
            DerivationTree::Merge(a, b) => {
                out.push_str(&format!("{pad}[merge {label}\n"));
                a.render_into(out, depth + 1);
                out.push('\n');
                b.render_into(out, depth + 1);
                out.push(']');
            }
            DerivationTree::Move(a) => {
                out.push_str(&format!("{pad}[move {label}\n"));
                a.render_into(out, depth + 1);
                out.push(']');
            }
        }
    }
}

/// Dispatches to merge-L, merge-R or merge-m.
pub fn apply_merge(s: &Expression, t: &Expression) -> Result<Expression, OpError> {
    let Some(sel) = s.head.first().filter(|f| f.is_selector()) else {
        return Err(OpError::Precondition("functor head does not start with a selector"));
    };
    match t.head.first() {
        Some(f) if f.is_category() && f.name == sel.name => {}
        _ => return Err(mismatch(s, t)),
    }
    if t.head.features.len() > 1 {
        merge_mover(s, t)
    } else if sel.kind == FeatureKind::SelectLeft {
        merge_left(s, t)
    } else {
        merge_right(s, t)
    }
}

/// Dispatches to move-1 or move-2.
pub fn apply_move(s: &Expression) -> Result<Expression, OpError> {
    let y = licensor_of(s)?;
    let at = s.mover_position(&y).ok_or(OpError::NoMatchingMover(y))?;
    if s.movers[at].features.len() == 1 {
        move_final(s)
    } else {
        move_again(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("{0} mover(s) never reached a landing site")]
    LeftoverMovers(usize),
    #[error("head ends with unchecked features `{0}`")]
    LeftoverFeatures(String),
}

/// A complete derivation: the surface string and the root category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derived {
    pub surface: String,
    pub category: String,
}

/// Evaluates a polish-order sequence. Succeeds when the tree's features
/// are all checked except the root's category, and no movers remain.
pub fn eval_sequence(seq: &[&LexicalItem]) -> Result<Derived, EvalError> {
    let tree = seq_to_tree(seq)?;
    let e = tree.evaluate()?;
    if !e.movers.is_empty() {
        return Err(EvalError::LeftoverMovers(e.movers.len()));
    }
    match e.head.features.as_slice() {
        [cat] if cat.is_category() => Ok(Derived {
            surface: e.head.phon,
            category: cat.name.clone(),
        }),
        rest => Err(EvalError::LeftoverFeatures(features_to_string(rest))),
    }
}
