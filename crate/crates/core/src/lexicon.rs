//! Lexical items, category-indexed lexicons and the lexicon file format.
//!
//! A lexicon file holds one item per line, `phon :: f1 f2 ...`. An empty
//! phon (or the glyph `ε`) marks a covert item. `#` starts a comment.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::feature::{FeatureError, FeatureSeq};

/// Glyph accepted as an alias for the empty phon.
pub const EPSILON: &str = "ε";

/// Position of an item: category index `k` and index `m` within `l_k`,
/// both zero-based. Rendered as `k.m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId {
    pub category: usize,
    pub index: usize,
}

impl ItemId {
    pub fn new(category: usize, index: usize) -> Self {
        ItemId { category, index }
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.category, self.index)
    }
}

impl FromStr for ItemId {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LexiconError::BadReference(s.to_string());
        let (k, m) = s.split_once('.').ok_or_else(bad)?;
        Ok(ItemId {
            category: k.parse().map_err(|_| bad())?,
            index: m.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LexicalItem {
    /// Orthographic word; empty for covert items.
    pub phon: String,
    pub features: FeatureSeq,
    pub id: ItemId,
}

impl LexicalItem {
    pub fn is_covert(&self) -> bool {
        self.phon.is_empty()
    }

    /// Phon as written in diagnostics, `ε` for covert items.
    pub fn display_phon(&self) -> &str {
        if self.phon.is_empty() {
            EPSILON
        } else {
            &self.phon
        }
    }
}

impl fmt::Display for LexicalItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.display_phon(), self.features)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Feature {
        line: usize,
        #[source]
        source: FeatureError,
    },
    #[error("line {line}: duplicate of the item on line {first}")]
    Duplicate { line: usize, first: usize },
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("item {0} is not in the lexicon")]
    ForeignItem(ItemId),
    #[error("malformed item reference `{0}`")]
    BadReference(String),
    #[error("no item matches `{0}`")]
    UnknownItem(String),
    #[error("`{0}` matches several items; use phon@k.m")]
    AmbiguousItem(String),
}

/// An ordered, validated set of lexical items indexed by category.
///
/// Categories are numbered by first appearance and items keep file order
/// within their category, so ids are stable for a given file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    items: Vec<LexicalItem>,
    categories: Vec<String>,
    by_category: Vec<Vec<usize>>,
}

fn normalize_phon(phon: &str) -> &str {
    if phon == EPSILON {
        ""
    } else {
        phon
    }
}

impl Lexicon {
    /// Builds a lexicon from (phon, features) pairs in order.
    pub fn from_entries<I, S>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (S, FeatureSeq)>,
        S: Into<String>,
    {
        let mut builder = Builder::default();
        for (i, (phon, features)) in entries.into_iter().enumerate() {
            let phon = phon.into();
            builder.push(i + 1, normalize_phon(&phon).to_string(), features)?;
        }
        Ok(builder.finish())
    }

    /// Parses the lexicon file format.
    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut builder = Builder::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(at) => &raw[..at],
                None => raw,
            };
            if content.trim().is_empty() {
                continue;
            }
            let (phon, feats) = content.split_once("::").ok_or_else(|| LexiconError::Syntax {
                line,
                message: "expected `phon :: features`".into(),
            })?;
            let phon = phon.trim();
            if phon.split_whitespace().count() > 1 {
                return Err(LexiconError::Syntax {
                    line,
                    message: format!("phon `{phon}` must be a single word"),
                });
            }
            if feats.contains("::") {
                return Err(LexiconError::Syntax {
                    line,
                    message: "more than one `::` separator".into(),
                });
            }
            let features: FeatureSeq = feats
                .parse()
                .map_err(|source| LexiconError::Feature { line, source })?;
            builder.push(line, normalize_phon(phon).to_string(), features)?;
        }
        Ok(builder.finish())
    }

    /// All items in load order.
    pub fn items(&self) -> &[LexicalItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Category names `c_1..c_K` in first-appearance order.
    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == name)
    }

    /// `M_k` for every category.
    pub fn category_sizes(&self) -> Vec<usize> {
        self.by_category.iter().map(Vec::len).collect()
    }

    /// The list `l_k` for category `name`, in load order.
    pub fn items_of_category(&self, name: &str) -> Result<Vec<&LexicalItem>, LexiconError> {
        let k = self
            .category_index(name)
            .ok_or_else(|| LexiconError::UnknownCategory(name.to_string()))?;
        Ok(self.by_category[k].iter().map(|&i| &self.items[i]).collect())
    }

    pub fn item(&self, id: ItemId) -> Option<&LexicalItem> {
        self.by_category
            .get(id.category)
            .and_then(|l| l.get(id.index))
            .map(|&i| &self.items[i])
    }

    /// Position of `id` in [`Lexicon::items`].
    pub fn global_index(&self, id: ItemId) -> Option<usize> {
        self.by_category
            .get(id.category)
            .and_then(|l| l.get(id.index))
            .copied()
    }

    /// Overt items whose phon equals `token`.
    pub fn items_for_word<'a>(&'a self, token: &'a str) -> impl Iterator<Item = &'a LexicalItem> + 'a {
        self.items.iter().filter(move |it| !it.phon.is_empty() && it.phon == token)
    }

    pub fn covert_items(&self) -> impl Iterator<Item = &LexicalItem> {
        self.items.iter().filter(|it| it.is_covert())
    }

    /// Resolves every id of `seq`, failing on the first foreign one.
    pub fn resolve(&self, seq: &ItemSequence) -> Result<Vec<&LexicalItem>, LexiconError> {
        seq.ids()
            .iter()
            .map(|&id| self.item(id).ok_or(LexiconError::ForeignItem(id)))
            .collect()
    }

    /// Resolves an item reference: `phon@k.m`, `@k.m`, or a bare phon that
    /// names exactly one item.
    pub fn parse_ref(&self, reference: &str) -> Result<ItemId, LexiconError> {
        if let Some((phon, id)) = reference.split_once('@') {
            let id: ItemId = id.parse()?;
            let item = self.item(id).ok_or(LexiconError::ForeignItem(id))?;
            let phon = normalize_phon(phon);
            if !phon.is_empty() && phon != item.phon {
                return Err(LexiconError::UnknownItem(reference.to_string()));
            }
            return Ok(id);
        }
        let phon = normalize_phon(reference);
        let mut matches = self.items.iter().filter(|it| it.phon == phon);
        match (matches.next(), matches.next()) {
            (Some(item), None) => Ok(item.id),
            (None, _) => Err(LexiconError::UnknownItem(reference.to_string())),
            (Some(_), Some(_)) => Err(LexiconError::AmbiguousItem(reference.to_string())),
        }
    }

    /// Parses a whitespace-separated line of item references.
    pub fn parse_sequence(&self, line: &str) -> Result<ItemSequence, LexiconError> {
        line.split_whitespace()
            .map(|r| self.parse_ref(r))
            .collect::<Result<Vec<_>, _>>()
            .map(ItemSequence::new)
    }

    /// Renders a reference that [`Lexicon::parse_ref`] reads back.
    pub fn format_ref(&self, id: ItemId) -> String {
        match self.item(id) {
            Some(item) => format!("{}@{}", item.display_phon(), id),
            None => format!("?@{id}"),
        }
    }
}

impl FromStr for Lexicon {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Lexicon::parse(s)
    }
}

/// Serializes in the file format, one item per line in load order.
impl fmt::Display for Lexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            if item.phon.is_empty() {
                writeln!(f, ":: {}", item.features)?;
            } else {
                writeln!(f, "{} :: {}", item.phon, item.features)?;
            }
        }
        Ok(())
    }
}

#[derive(Default)]
struct Builder {
    items: Vec<LexicalItem>,
    categories: Vec<String>,
    by_category: Vec<Vec<usize>>,
    seen: HashMap<(String, FeatureSeq), usize>,
}

impl Builder {
    fn push(&mut self, line: usize, phon: String, features: FeatureSeq) -> Result<(), LexiconError> {
        if let Some(&first) = self.seen.get(&(phon.clone(), features.clone())) {
            return Err(LexiconError::Duplicate { line, first });
        }
        self.seen.insert((phon.clone(), features.clone()), line);
        let cat = &features.category().name;
        let k = match self.categories.iter().position(|c| c == cat) {
            Some(k) => k,
            None => {
                self.categories.push(cat.clone());
                self.by_category.push(Vec::new());
                self.categories.len() - 1
            }
        };
        let id = ItemId::new(k, self.by_category[k].len());
        self.by_category[k].push(self.items.len());
        self.items.push(LexicalItem { phon, features, id });
        Ok(())
    }

    fn finish(self) -> Lexicon {
        Lexicon {
            items: self.items,
            categories: self.categories,
            by_category: self.by_category,
        }
    }
}

/// A depth-first (polish order) listing of lexical items; the first item
/// is the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ItemSequence(Vec<ItemId>);

impl ItemSequence {
    pub fn new(ids: Vec<ItemId>) -> Self {
        ItemSequence(ids)
    }

    pub fn ids(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_items(items: &[&LexicalItem]) -> Self {
        ItemSequence(items.iter().map(|it| it.id).collect())
    }
}

impl fmt::Display for ItemSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

impl From<Vec<ItemId>> for ItemSequence {
    fn from(ids: Vec<ItemId>) -> Self {
        ItemSequence(ids)
    }
}
