//! Agenda-based deductive parsing over span-valued chains.
//!
//! Every chain of an expression covers a span of the input. String
//! concatenation in merge and move becomes span adjacency: merge-L and
//! move-1 need the incoming chain to end where the head starts, merge-R
//! needs the head to end where the argument starts, and merge-m / move-2
//! leave spans where they are. Covert items are axioms at every position.
//!
//! The closure runs to a fixed point and records back-pointers; derivations
//! are then enumerated from the goal items with a bound on covert leaves.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::rc::Rc;

use rayon::prelude::*;
use thiserror::Error;

use crate::feature::{Feature, FeatureKind};
use crate::lexicon::{ItemSequence, Lexicon};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseConfig {
    pub start_category: String,
    /// Maximum number of derivations per sentence; more is an error.
    pub max_derivations: usize,
    /// Maximum number of covert leaves in one derivation.
    pub max_covert: usize,
    /// Work bound for closure and enumeration.
    pub max_eval_steps: usize,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            start_category: "c".to_string(),
            max_derivations: 10_000,
            max_covert: 3,
            max_eval_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("start category `{0}` does not occur in the lexicon")]
    UnknownStart(String),
    #[error("more than {limit} derivations")]
    CapExceeded { limit: usize },
    #[error("work bound of {limit} steps exceeded (covert cycle?)")]
    StepLimit { limit: usize },
}

/// Half-open token interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start.max(other.start) < self.end.min(other.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.start, self.end)
    }
}

/// A chain: a span plus the unchecked tail of one lexical item's
/// features, `features[position..]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanChain {
    pub span: Span,
    /// Index into [`Lexicon::items`].
    pub item: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChartItem {
    pub head: SpanChain,
    /// Kept sorted by leading licensee name; unique under the SMC.
    pub movers: Vec<SpanChain>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    MergeLeft,
    MergeRight,
    MergeMover,
    MoveFinal,
    MoveAgain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackPointer {
    Axiom,
    Merge { rule: Rule, functor: usize, argument: usize },
    Move { rule: Rule, source: usize },
}

/// The closed chart of one sentence and its extracted derivations.
#[derive(Debug, Clone)]
pub struct DerivationForest {
    sentence: Vec<String>,
    items: Vec<ChartItem>,
    back: Vec<Vec<BackPointer>>,
    goals: Vec<usize>,
    sequences: Vec<ItemSequence>,
}

impl DerivationForest {
    pub fn sentence(&self) -> &[String] {
        &self.sentence
    }

    pub fn items(&self) -> &[ChartItem] {
        &self.items
    }

    pub fn back_pointers(&self, item: usize) -> &[BackPointer] {
        &self.back[item]
    }

    pub fn goals(&self) -> &[usize] {
        &self.goals
    }

    /// Extracted derivations, sorted lexicographically by item ids.
    pub fn sequences(&self) -> &[ItemSequence] {
        &self.sequences
    }

    pub fn count(&self) -> usize {
        self.sequences.len()
    }

    pub fn into_sequences(self) -> Vec<ItemSequence> {
        self.sequences
    }
}

/// Splits on whitespace, preserving case.
pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence.split_whitespace().map(str::to_string).collect()
}

/// Parses one tokenized sentence: closes the chart and extracts every
/// derivation of the start category.
pub fn parse(sentence: &[String], lex: &Lexicon, cfg: &ParseConfig) -> Result<DerivationForest, ParseError> {
    if lex.category_index(&cfg.start_category).is_none() {
        return Err(ParseError::UnknownStart(cfg.start_category.clone()));
    }
    let mut chart = Chart::new(lex, sentence, cfg);
    chart.close()?;
    let goals = chart.goals();
    let mut forest = DerivationForest {
        sentence: sentence.to_vec(),
        items: chart.items,
        back: chart.back,
        goals,
        sequences: Vec::new(),
    };
    forest.sequences = extract_sequences(&forest, lex, cfg)?;
    Ok(forest)
}

/// Parses sentences in parallel; results come back in input order.
pub fn parse_all(
    sentences: &[Vec<String>],
    lex: &Lexicon,
    cfg: &ParseConfig,
) -> Vec<Result<DerivationForest, ParseError>> {
    sentences.par_iter().map(|s| parse(s, lex, cfg)).collect()
}

/// Enumerates derivation trees from the goal items as polish-order
/// sequences, deduplicated and sorted.
pub fn extract_sequences(
    forest: &DerivationForest,
    lex: &Lexicon,
    cfg: &ParseConfig,
) -> Result<Vec<ItemSequence>, ParseError> {
    let mut enumerator = Enumerator {
        forest,
        covert: lex.items().iter().map(|it| it.is_covert()).collect(),
        memo: HashMap::new(),
        active: HashSet::new(),
        work: 0,
        limit: cfg.max_eval_steps,
    };
    let mut all: Vec<Vec<usize>> = Vec::new();
    for &goal in &forest.goals {
        let found = enumerator.run(goal, cfg.max_covert)?;
        all.extend(found.iter().map(|(seq, _)| seq.clone()));
        if all.len() > cfg.max_derivations {
            all.sort();
            all.dedup();
            if all.len() > cfg.max_derivations {
                return Err(ParseError::CapExceeded { limit: cfg.max_derivations });
            }
        }
    }
    let mut seqs: Vec<ItemSequence> = all
        .into_iter()
        .map(|g| ItemSequence::new(g.into_iter().map(|i| lex.items()[i].id).collect()))
        .collect();
    seqs.sort();
    seqs.dedup();
    if seqs.len() > cfg.max_derivations {
        return Err(ParseError::CapExceeded { limit: cfg.max_derivations });
    }
    Ok(seqs)
}

type Derivations = Rc<Vec<(Vec<usize>, usize)>>;

struct Enumerator<'f> {
    forest: &'f DerivationForest,
    covert: Vec<bool>,
    memo: HashMap<(usize, usize), Derivations>,
    active: HashSet<(usize, usize)>,
    work: usize,
    limit: usize,
}

impl Enumerator<'_> {
    /// All leaf sequences of `item` using at most `budget` covert leaves,
    /// with their covert counts.
    fn run(&mut self, item: usize, budget: usize) -> Result<Derivations, ParseError> {
        if let Some(found) = self.memo.get(&(item, budget)) {
            return Ok(found.clone());
        }
        if !self.active.insert((item, budget)) {
            return Err(ParseError::StepLimit { limit: self.limit });
        }
        let mut out: Vec<(Vec<usize>, usize)> = Vec::new();
        for bp in self.forest.back[item].clone() {
            match bp {
                BackPointer::Axiom => {
                    let leaf = self.forest.items[item].head.item;
                    let c = usize::from(self.covert[leaf]);
                    if c <= budget {
                        out.push((vec![leaf], c));
                    }
                }
                BackPointer::Merge { functor, argument, .. } => {
                    let left = self.run(functor, budget)?;
                    for (fs, fc) in left.iter() {
                        let right = self.run(argument, budget - fc)?;
                        for (args, ac) in right.iter() {
                            let mut seq = Vec::with_capacity(fs.len() + args.len());
                            seq.extend_from_slice(fs);
                            seq.extend_from_slice(args);
                            out.push((seq, fc + ac));
                            self.work += 1;
                        }
                        if self.work > self.limit {
                            return Err(ParseError::StepLimit { limit: self.limit });
                        }
                    }
                }
                BackPointer::Move { source, .. } => {
                    let inner = self.run(source, budget)?;
                    out.extend(inner.iter().cloned());
                }
            }
        }
        out.sort();
        out.dedup();
        self.work += out.len();
        if self.work > self.limit {
            return Err(ParseError::StepLimit { limit: self.limit });
        }
        self.active.remove(&(item, budget));
        let out = Rc::new(out);
        self.memo.insert((item, budget), out.clone());
        Ok(out)
    }
}

struct Chart<'a> {
    lex: &'a Lexicon,
    n: usize,
    cfg: &'a ParseConfig,
    items: Vec<ChartItem>,
    back: Vec<Vec<BackPointer>>,
    index: HashMap<ChartItem, usize>,
    agenda: VecDeque<usize>,
    /// Processed items by the selector their head starts with.
    functors: HashMap<&'a str, Vec<usize>>,
    /// Processed items by the category their head starts with.
    arguments: HashMap<&'a str, Vec<usize>>,
    steps: usize,
}

impl<'a> Chart<'a> {
    fn new(lex: &'a Lexicon, sentence: &[String], cfg: &'a ParseConfig) -> Self {
        let mut chart = Chart {
            lex,
            n: sentence.len(),
            cfg,
            items: Vec::new(),
            back: Vec::new(),
            index: HashMap::new(),
            agenda: VecDeque::new(),
            functors: HashMap::new(),
            arguments: HashMap::new(),
            steps: 0,
        };
        for (i, token) in sentence.iter().enumerate() {
            for (g, item) in lex.items().iter().enumerate() {
                if !item.is_covert() && item.phon == *token {
                    chart.axiom(g, Span::new(i, i + 1));
                }
            }
        }
        for (g, item) in lex.items().iter().enumerate() {
            if item.is_covert() {
                for i in 0..=chart.n {
                    chart.axiom(g, Span::new(i, i));
                }
            }
        }
        chart
    }

    fn axiom(&mut self, item: usize, span: Span) {
        let head = SpanChain { span, item, position: 0 };
        self.add(ChartItem { head, movers: Vec::new() }, BackPointer::Axiom);
    }

    fn features(&self, chain: &SpanChain) -> &'a [Feature] {
        &self.lex.items()[chain.item].features.features()[chain.position..]
    }

    fn first(&self, chain: &SpanChain) -> Option<&'a Feature> {
        self.features(chain).first()
    }

    fn add(&mut self, item: ChartItem, bp: BackPointer) {
        if let Some(&at) = self.index.get(&item) {
            if !self.back[at].contains(&bp) {
                self.back[at].push(bp);
            }
            return;
        }
        let at = self.items.len();
        self.index.insert(item.clone(), at);
        self.items.push(item);
        self.back.push(vec![bp]);
        self.agenda.push_back(at);
    }

    fn close(&mut self) -> Result<(), ParseError> {
        while let Some(at) = self.agenda.pop_front() {
            self.steps += 1;
            if self.steps > self.cfg.max_eval_steps {
                return Err(ParseError::StepLimit { limit: self.cfg.max_eval_steps });
            }
            let head = self.items[at].head;
            let Some(first) = self.first(&head) else { continue };
            match first.kind {
                FeatureKind::SelectLeft | FeatureKind::SelectRight => {
                    let partners = self.arguments.get(first.name.as_str()).cloned().unwrap_or_default();
                    for t in partners {
                        self.combine(at, t);
                    }
                    self.functors.entry(first.name.as_str()).or_default().push(at);
                }
                FeatureKind::Category => {
                    let partners = self.functors.get(first.name.as_str()).cloned().unwrap_or_default();
                    for s in partners {
                        self.combine(s, at);
                    }
                    self.arguments.entry(first.name.as_str()).or_default().push(at);
                }
                FeatureKind::Licensor => self.apply_move(at),
                FeatureKind::Licensee => {}
            }
        }
        Ok(())
    }

    fn leading_name(&self, chain: &SpanChain) -> &'a str {
        self.first(chain).map(|f| f.name.as_str()).unwrap_or("")
    }

    /// Sorts movers and rejects SMC violations.
    fn normalize(&self, mut movers: Vec<SpanChain>) -> Option<Vec<SpanChain>> {
        movers.sort_by(|a, b| self.leading_name(a).cmp(self.leading_name(b)).then(a.cmp(b)));
        let clash = movers
            .windows(2)
            .any(|w| self.leading_name(&w[0]) == self.leading_name(&w[1]));
        (!clash).then_some(movers)
    }

    fn combine(&mut self, s_at: usize, t_at: usize) {
        let s = self.items[s_at].clone();
        let t = self.items[t_at].clone();
        let sel = self.first(&s.head).expect("functor has a selector");
        let s_chains = std::iter::once(&s.head).chain(&s.movers);
        let disjoint = s_chains
            .into_iter()
            .all(|a| std::iter::once(&t.head).chain(&t.movers).all(|b| !a.span.overlaps(&b.span)));
        if !disjoint {
            return;
        }
        let next_head = |span: Span| SpanChain {
            span,
            item: s.head.item,
            position: s.head.position + 1,
        };
        let mut movers: Vec<SpanChain> = s.movers.iter().chain(&t.movers).copied().collect();
        let t_rest = self.features(&t.head).len() - 1;
        let (head, rule) = if t_rest > 0 {
            movers.push(SpanChain {
                span: t.head.span,
                item: t.head.item,
                position: t.head.position + 1,
            });
            (next_head(s.head.span), Rule::MergeMover)
        } else if sel.kind == FeatureKind::SelectLeft {
            if t.head.span.end != s.head.span.start {
                return;
            }
            (next_head(Span::new(t.head.span.start, s.head.span.end)), Rule::MergeLeft)
        } else {
            if s.head.span.end != t.head.span.start {
                return;
            }
            (next_head(Span::new(s.head.span.start, t.head.span.end)), Rule::MergeRight)
        };
        let Some(movers) = self.normalize(movers) else { return };
        self.add(
            ChartItem { head, movers },
            BackPointer::Merge { rule, functor: s_at, argument: t_at },
        );
    }

    fn apply_move(&mut self, at: usize) {
        let s = self.items[at].clone();
        let y = self.leading_name(&s.head);
        let Some(m) = s.movers.iter().position(|c| {
            self.first(c)
                .is_some_and(|f| f.kind == FeatureKind::Licensee && f.name == y)
        }) else {
            return;
        };
        let mover = s.movers[m];
        let mut movers = s.movers.clone();
        let advanced = SpanChain {
            position: s.head.position + 1,
            ..s.head
        };
        if self.features(&mover).len() == 1 {
            if mover.span.end != s.head.span.start {
                return;
            }
            movers.remove(m);
            let head = SpanChain {
                span: Span::new(mover.span.start, s.head.span.end),
                ..advanced
            };
            self.add(ChartItem { head, movers }, BackPointer::Move { rule: Rule::MoveFinal, source: at });
        } else {
            movers[m].position += 1;
            let Some(movers) = self.normalize(movers) else { return };
            self.add(
                ChartItem { head: advanced, movers },
                BackPointer::Move { rule: Rule::MoveAgain, source: at },
            );
        }
    }

    fn goals(&self) -> Vec<usize> {
        let whole = Span::new(0, self.n);
        (0..self.items.len())
            .filter(|&i| {
                let it = &self.items[i];
                it.movers.is_empty()
                    && it.head.span == whole
                    && matches!(self.features(&it.head), [f] if f.is_category() && f.name == self.cfg.start_category)
            })
            .collect()
    }
}
