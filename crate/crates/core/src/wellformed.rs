//! Cursor-driven well-formedness check over polish-order item sequences.
//!
//! The check walks a working copy of the sequence with a cursor, deleting
//! matched selector/category and licensor/licensee pairs and emptied
//! items. The sequence is well-formed iff everything gets deleted.
//!
//! Cursor rules, applied to the first remaining feature of the current
//! item:
//!
//! 1. selector: move right to the next item, skipping items that hold only
//!    licensees (arguments already merged that are waiting to move);
//! 2. category: on the root, delete it; otherwise the nearest item to the
//!    left that does not hold only licensees must start with a matching
//!    selector (either direction), and both features are deleted (2b),
//!    else the sequence is ill-formed (2c);
//! 3. licensee: move to the item on the left;
//! 4. licensor `+y`: the first item to the right starting with `-y` must
//!    exist (4a) with no category-bearing item in between (4b); both
//!    features are deleted;
//! 5. no features left: delete the item and move left, or right if
//!    nothing is to the left.

use std::fmt;

use crate::feature::{features_to_string, Feature, FeatureKind};
use crate::lexicon::LexicalItem;

/// Why a sequence was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    /// Nothing to check.
    EmptyInput,
    /// A selector has no item to its right.
    NoArgument,
    /// Rule 2c: no matching selector on the nearest category-bearing item
    /// to the left.
    NoSelectingItem,
    /// A licensee has no item to its left.
    StrandedLicensee,
    /// Rule 4a: no item to the right starts with the matching licensee.
    NoLicensee,
    /// Rule 4b: a category-bearing item sits between licensor and licensee.
    InterveningCategory,
    /// Step budget exhausted without a verdict.
    StepLimit,
}

/// One cursor action. Item positions are indices into the input sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Rule 1: selector first, cursor moves right to `to`.
    SkipSelector { to: usize },
    /// Rule 2a: the root's category feature is deleted.
    DeleteRootCategory,
    /// Rule 2b: category deleted together with the selector on `selector_item`.
    CheckCategory { selector_item: usize },
    /// Rule 3: licensee first, cursor moves left to `to`.
    RetreatFromLicensee { to: usize },
    /// Rule 4c: licensor deleted together with the licensee on `licensee_item`.
    CheckLicensor { licensee_item: usize },
    /// Rule 5: the emptied item is removed; the cursor moves to `next`.
    DeleteEmpty { next: Option<usize> },
    /// Every item has been deleted.
    Accept,
    Reject(Failure),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    /// Cursor position when the action was taken.
    pub cursor: usize,
    pub action: Action,
    /// Surviving items and their remaining features after the action.
    pub remaining: Vec<(usize, Vec<Feature>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CursorTrace {
    pub steps: Vec<TraceStep>,
    pub verdict: bool,
}

/// Decides whether `items` encodes a well-formed derivation tree.
pub fn is_wellformed(items: &[&LexicalItem]) -> bool {
    run(items, None)
}

/// Same decision as [`is_wellformed`], recording every cursor action.
pub fn trace_wellformed(items: &[&LexicalItem]) -> CursorTrace {
    let mut steps = Vec::new();
    let verdict = run(items, Some(&mut steps));
    CursorTrace { steps, verdict }
}

struct Work<'a> {
    feats: Vec<&'a [Feature]>,
    pos: Vec<usize>,
    prev: Vec<Option<usize>>,
    next: Vec<Option<usize>>,
    alive: Vec<bool>,
}

impl<'a> Work<'a> {
    fn new(items: &[&'a LexicalItem]) -> Self {
        let n = items.len();
        Work {
            feats: items.iter().map(|it| it.features.features()).collect(),
            pos: vec![0; n],
            prev: (0..n).map(|i| i.checked_sub(1)).collect(),
            next: (0..n).map(|i| (i + 1 < n).then_some(i + 1)).collect(),
            alive: vec![true; n],
        }
    }

    fn first(&self, i: usize) -> Option<&'a Feature> {
        self.feats[i].get(self.pos[i])
    }

    /// Remaining features are all licensees (the order puts them last, so
    /// checking the first suffices).
    fn licensee_only(&self, i: usize) -> bool {
        self.first(i).is_some_and(Feature::is_licensee)
    }

    fn unlink(&mut self, i: usize) {
        let (p, n) = (self.prev[i], self.next[i]);
        if let Some(p) = p {
            self.next[p] = n;
        }
        if let Some(n) = n {
            self.prev[n] = p;
        }
        self.alive[i] = false;
    }

    fn snapshot(&self) -> Vec<(usize, Vec<Feature>)> {
        (0..self.feats.len())
            .filter(|&i| self.alive[i])
            .map(|i| (i, self.feats[i][self.pos[i]..].to_vec()))
            .collect()
    }
}

fn run(items: &[&LexicalItem], mut trace: Option<&mut Vec<TraceStep>>) -> bool {
    let mut record = |work: &Work, cursor: usize, action: Action| {
        if let Some(steps) = trace.as_deref_mut() {
            steps.push(TraceStep {
                cursor,
                action,
                remaining: work.snapshot(),
            });
        }
    };

    if items.is_empty() {
        let work = Work::new(items);
        record(&work, 0, Action::Reject(Failure::EmptyInput));
        return false;
    }

    let mut work = Work::new(items);
    let total_features: usize = work.feats.iter().map(|f| f.len()).sum();
    let n = items.len();
    let budget = (total_features + n + 1) * (2 * n + 2);
    let root = 0;
    let mut cur = root;

    for _ in 0..budget {
        let Some(feature) = work.first(cur) else {
            let next = work.prev[cur].or(work.next[cur]);
            work.unlink(cur);
            record(&work, cur, Action::DeleteEmpty { next });
            match next {
                None => {
                    record(&work, cur, Action::Accept);
                    return true;
                }
                Some(next) => {
                    cur = next;
                    continue;
                }
            }
        };

        match feature.kind {
            FeatureKind::SelectRight | FeatureKind::SelectLeft => {
                let mut j = work.next[cur];
                while let Some(at) = j {
                    if !work.licensee_only(at) {
                        break;
                    }
                    j = work.next[at];
                }
                match j {
                    Some(to) => {
                        record(&work, cur, Action::SkipSelector { to });
                        cur = to;
                    }
                    None => {
                        record(&work, cur, Action::Reject(Failure::NoArgument));
                        return false;
                    }
                }
            }
            FeatureKind::Category => {
                if cur == root {
                    work.pos[cur] += 1;
                    record(&work, cur, Action::DeleteRootCategory);
                    continue;
                }
                let mut j = work.prev[cur];
                while let Some(at) = j {
                    if !work.licensee_only(at) {
                        break;
                    }
                    j = work.prev[at];
                }
                let selector = j.filter(|&at| {
                    work.first(at)
                        .is_some_and(|f| f.is_selector() && f.name == feature.name)
                });
                match selector {
                    Some(at) => {
                        work.pos[at] += 1;
                        work.pos[cur] += 1;
                        record(&work, cur, Action::CheckCategory { selector_item: at });
                    }
                    None => {
                        record(&work, cur, Action::Reject(Failure::NoSelectingItem));
                        return false;
                    }
                }
            }
            FeatureKind::Licensee => match work.prev[cur] {
                Some(to) => {
                    record(&work, cur, Action::RetreatFromLicensee { to });
                    cur = to;
                }
                None => {
                    record(&work, cur, Action::Reject(Failure::StrandedLicensee));
                    return false;
                }
            },
            FeatureKind::Licensor => {
                let mut j = work.next[cur];
                let mut intervening = false;
                let mut found = None;
                while let Some(at) = j {
                    match work.first(at) {
                        Some(f) if f.kind == FeatureKind::Licensee && f.name == feature.name => {
                            found = Some(at);
                            break;
                        }
                        Some(f) if f.is_licensee() => {}
                        _ => intervening = true,
                    }
                    j = work.next[at];
                }
                match found {
                    None => {
                        record(&work, cur, Action::Reject(Failure::NoLicensee));
                        return false;
                    }
                    Some(_) if intervening => {
                        record(&work, cur, Action::Reject(Failure::InterveningCategory));
                        return false;
                    }
                    Some(at) => {
                        work.pos[at] += 1;
                        work.pos[cur] += 1;
                        record(&work, cur, Action::CheckLicensor { licensee_item: at });
                    }
                }
            }
        }
    }
    record(&work, cur, Action::Reject(Failure::StepLimit));
    false
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::SkipSelector { to } => write!(f, "selector: move right to #{to}"),
            Action::DeleteRootCategory => write!(f, "root category: delete"),
            Action::CheckCategory { selector_item } => {
                write!(f, "category: check against selector on #{selector_item}")
            }
            Action::RetreatFromLicensee { to } => write!(f, "licensee: move left to #{to}"),
            Action::CheckLicensor { licensee_item } => {
                write!(f, "licensor: check against licensee on #{licensee_item}")
            }
            Action::DeleteEmpty { next: Some(n) } => write!(f, "empty: delete, move to #{n}"),
            Action::DeleteEmpty { next: None } => write!(f, "empty: delete"),
            Action::Accept => write!(f, "sequence empty: well-formed"),
            Action::Reject(why) => write!(f, "ill-formed: {why:?}"),
        }
    }
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{} {} | ", self.cursor, self.action)?;
        for (i, (item, feats)) in self.remaining.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "#{item}:{}", features_to_string(feats))?;
        }
        Ok(())
    }
}
