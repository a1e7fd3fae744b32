//! Brute-force reference implementations for the test suite.
//!
//! Nothing here calls the library's checker, evaluator or parser. Items
//! are re-read from their printed feature strings into a local
//! representation, and every procedure works on full copies with linear
//! scans.
#![allow(dead_code)]

use std::collections::BTreeMap;

use pdmg::Lexicon;

/// Wh-movement: the wh-question items plus a second wh-word and a covert
/// declarative complementizer.
pub const STRESS_WH: &str = "\
:: =i +wh c
:: =v c
did :: =v i
see :: d= =d v
what :: d -wh
you :: d
who :: d -wh
";

/// Two-step movement: `it` is first licensed by +p, then moves again
/// to +q.
pub const STRESS_TWO_STEP: &str = "\
:: =t +q c
:: =v +p t
likes :: =d d= v
mary :: d
it :: d -p -q
";

/// Attachment ambiguity: "saw men with hats".
pub const STRESS_AMBIGUOUS: &str = "\
:: =v c
saw :: =d =p v
saw :: =d v
men :: =p d
men :: d
with :: =d p
hats :: d
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum F {
    /// `=x` when the flag is true, `x=` otherwise.
    Sel(String, bool),
    Cat(String),
    Plus(String),
    Minus(String),
}

fn read_feature(tok: &str) -> F {
    if let Some(x) = tok.strip_prefix('=') {
        F::Sel(x.to_string(), true)
    } else if let Some(x) = tok.strip_suffix('=') {
        F::Sel(x.to_string(), false)
    } else if let Some(x) = tok.strip_prefix('+') {
        F::Plus(x.to_string())
    } else if let Some(x) = tok.strip_prefix('-') {
        F::Minus(x.to_string())
    } else {
        F::Cat(tok.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct OItem {
    pub id: (usize, usize),
    /// Empty for covert items.
    pub phon: String,
    pub feats: Vec<F>,
}

impl OItem {
    fn arity(&self) -> usize {
        self.feats.iter().filter(|f| matches!(f, F::Sel(..))).count()
    }

    fn category(&self) -> String {
        self.feats
            .iter()
            .find_map(|f| match f {
                F::Cat(x) => Some(x.clone()),
                _ => None,
            })
            .unwrap()
    }
}

pub fn items_of(lex: &Lexicon) -> Vec<OItem> {
    lex.items()
        .iter()
        .map(|it| OItem {
            id: (it.id.category, it.id.index),
            phon: if it.is_covert() { String::new() } else { it.phon.clone() },
            feats: it
                .features
                .to_string()
                .split_whitespace()
                .map(read_feature)
                .collect(),
        })
        .collect()
}

fn licensee_first(feats: &[F]) -> bool {
    matches!(feats.first(), Some(F::Minus(_)))
}

/// The cursor procedure on a vector of feature lists; deletions are
/// `Vec::remove`.
pub fn naive_wellformed(seq: &[&OItem]) -> bool {
    let mut list: Vec<(usize, Vec<F>)> = seq
        .iter()
        .enumerate()
        .map(|(i, it)| (i, it.feats.clone()))
        .collect();
    if list.is_empty() {
        return false;
    }
    let mut c = 0;
    for _ in 0..100_000 {
        if list[c].1.is_empty() {
            list.remove(c);
            if list.is_empty() {
                return true;
            }
            c = c.saturating_sub(1);
            continue;
        }
        match list[c].1[0].clone() {
            F::Sel(..) => match (c + 1..list.len()).find(|&j| !licensee_first(&list[j].1)) {
                Some(j) => c = j,
                None => return false,
            },
            F::Cat(x) => {
                if list[c].0 == 0 {
                    list[c].1.remove(0);
                    continue;
                }
                let Some(j) = (0..c).rev().find(|&j| !licensee_first(&list[j].1)) else {
                    return false;
                };
                match list[j].1.first() {
                    Some(F::Sel(y, _)) if *y == x => {
                        list[j].1.remove(0);
                        list[c].1.remove(0);
                    }
                    _ => return false,
                }
            }
            F::Minus(_) => {
                if c == 0 {
                    return false;
                }
                c -= 1;
            }
            F::Plus(y) => {
                let target = (c + 1..list.len())
                    .find(|&j| list[j].1.first() == Some(&F::Minus(y.clone())));
                let Some(j) = target else {
                    return false;
                };
                if (c + 1..j).any(|k| !licensee_first(&list[k].1)) {
                    return false;
                }
                list[j].1.remove(0);
                list[c].1.remove(0);
            }
        }
    }
    false
}

#[derive(Debug, Clone)]
struct Node {
    item: usize,
    kids: Vec<Node>,
}

fn build(seq: &[&OItem], pos: &mut usize) -> Option<Node> {
    let item = *pos;
    if item >= seq.len() {
        return None;
    }
    *pos += 1;
    let kids = (0..seq[item].arity())
        .map(|_| build(seq, pos))
        .collect::<Option<Vec<_>>>()?;
    Some(Node { item, kids })
}

fn join(a: &str, b: &str) -> String {
    [a, b]
        .iter()
        .filter(|w| !w.is_empty())
        .cloned()
        .collect::<Vec<_>>()
        .join(" ")
}

struct Expr {
    phon: String,
    feats: Vec<F>,
    movers: Vec<(String, Vec<F>)>,
}

fn smc_ok(movers: &[(String, Vec<F>)]) -> bool {
    for a in 0..movers.len() {
        for b in a + 1..movers.len() {
            if movers[a].1.first() == movers[b].1.first() {
                return false;
            }
        }
    }
    true
}

fn eval(seq: &[&OItem], node: &Node) -> Option<Expr> {
    let it = seq[node.item];
    let mut e = Expr {
        phon: it.phon.clone(),
        feats: it.feats.clone(),
        movers: Vec::new(),
    };
    for kid in &node.kids {
        let a = eval(seq, kid)?;
        let (x, right) = match e.feats.first() {
            Some(F::Sel(x, right)) => (x.clone(), *right),
            _ => return None,
        };
        if a.feats.first() != Some(&F::Cat(x)) {
            return None;
        }
        e.feats.remove(0);
        let rest = a.feats[1..].to_vec();
        e.movers.extend(a.movers);
        if rest.is_empty() {
            e.phon = if right { join(&e.phon, &a.phon) } else { join(&a.phon, &e.phon) };
        } else {
            e.movers.push((a.phon, rest));
        }
        if !smc_ok(&e.movers) {
            return None;
        }
    }
    while let Some(F::Plus(y)) = e.feats.first().cloned() {
        let hits: Vec<usize> = (0..e.movers.len())
            .filter(|&i| e.movers[i].1.first() == Some(&F::Minus(y.clone())))
            .collect();
        if hits.len() != 1 {
            return None;
        }
        let i = hits[0];
        e.feats.remove(0);
        e.movers[i].1.remove(0);
        if e.movers[i].1.is_empty() {
            let (p, _) = e.movers.remove(i);
            e.phon = join(&p, &e.phon);
        }
        if !smc_ok(&e.movers) {
            return None;
        }
    }
    Some(e)
}

/// Surface string and category of a complete derivation, by building the
/// tree from the sequence and evaluating it bottom-up.
pub fn naive_yield(seq: &[&OItem]) -> Option<(String, String)> {
    let mut pos = 0;
    let root = build(seq, &mut pos)?;
    if pos != seq.len() {
        return None;
    }
    let e = eval(seq, &root)?;
    match (e.movers.is_empty(), e.feats.as_slice()) {
        (true, [F::Cat(c)]) => Some((e.phon, c.clone())),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_len: usize,
    pub max_overt: usize,
    pub max_covert: usize,
    /// Bound on generated candidates.
    pub max_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    Budget,
    EmptySupport,
}

pub type Ids = Vec<(usize, usize)>;

/// Every item sequence shaped like a tree (each item followed by as many
/// subtrees as it has selectors), rooted in an item from `roots`, within
/// the budget. Slot fillers are unconstrained by category.
pub fn tree_shaped(items: &[OItem], roots: &[usize], budget: &OracleBudget) -> Result<Vec<Vec<usize>>, OracleError> {
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<usize>, usize, usize, usize)> = Vec::new();
    for &r in roots {
        let it = &items[r];
        let (o, c) = if it.phon.is_empty() { (0, 1) } else { (1, 0) };
        stack.push((vec![r], it.arity(), o, c));
    }
    let mut generated = 0;
    while let Some((seq, open, overt, covert)) = stack.pop() {
        generated += 1;
        if generated > budget.max_count {
            return Err(OracleError::Budget);
        }
        if overt > budget.max_overt || covert > budget.max_covert || seq.len() > budget.max_len {
            continue;
        }
        if open == 0 {
            out.push(seq);
            continue;
        }
        if seq.len() + open > budget.max_len {
            continue;
        }
        for (i, it) in items.iter().enumerate() {
            let mut next = seq.clone();
            next.push(i);
            let (o, c) = if it.phon.is_empty() { (0, 1) } else { (1, 0) };
            stack.push((next, open - 1 + it.arity(), overt + o, covert + c));
        }
    }
    Ok(out)
}

/// Every well-formed sequence within the budget, by the naive checker.
pub fn enumerate_wellformed(lex: &Lexicon, budget: &OracleBudget) -> Result<Vec<Ids>, OracleError> {
    let items = items_of(lex);
    let roots: Vec<usize> = (0..items.len()).collect();
    let mut out: Vec<Ids> = tree_shaped(&items, &roots, budget)?
        .into_iter()
        .filter(|s| {
            let refs: Vec<&OItem> = s.iter().map(|&i| &items[i]).collect();
            naive_wellformed(&refs)
        })
        .map(|s| s.iter().map(|&i| items[i].id).collect())
        .collect();
    out.sort();
    Ok(out)
}

pub type ByYield = BTreeMap<String, Vec<Ids>>;

/// Well-formed derivations rooted in `start`, grouped by surface string.
/// Also returns sequences on which the checker and the evaluator
/// disagree.
pub fn derivations_by_yield(
    lex: &Lexicon,
    start: &str,
    budget: &OracleBudget,
) -> Result<(ByYield, Vec<Ids>), OracleError> {
    let items = items_of(lex);
    let roots: Vec<usize> = (0..items.len()).filter(|&i| items[i].category() == start).collect();
    let mut groups: BTreeMap<String, Vec<Ids>> = BTreeMap::new();
    let mut disagreements = Vec::new();
    for s in tree_shaped(&items, &roots, budget)? {
        let refs: Vec<&OItem> = s.iter().map(|&i| &items[i]).collect();
        let ids: Ids = s.iter().map(|&i| items[i].id).collect();
        let wf = naive_wellformed(&refs);
        let y = naive_yield(&refs);
        if wf != y.is_some() {
            disagreements.push(ids.clone());
        }
        if let (true, Some((surface, cat))) = (wf, y) {
            if cat == start {
                groups.entry(surface).or_default().push(ids);
            }
        }
    }
    for v in groups.values_mut() {
        v.sort();
    }
    Ok((groups, disagreements))
}

/// Exact posterior over the derivations of `sentence`: products of θ
/// renormalized over the enumerated support.
pub fn exact_posterior(
    lex: &Lexicon,
    theta: &[Vec<f64>],
    sentence: &str,
    start: &str,
    budget: &OracleBudget,
) -> Result<Vec<(Ids, f64)>, OracleError> {
    let (groups, _) = derivations_by_yield(lex, start, budget)?;
    let key = sentence.split_whitespace().collect::<Vec<_>>().join(" ");
    let support = groups.get(&key).ok_or(OracleError::EmptySupport)?;
    let weights: Vec<f64> = support
        .iter()
        .map(|d| d.iter().map(|&(k, m)| theta[k][m]).product())
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(OracleError::EmptySupport);
    }
    Ok(support
        .iter()
        .cloned()
        .zip(weights.iter().map(|w| w / total))
        .collect())
}

/// Every sequence of length 1..=max_len over all items, in lexicographic
/// order of item indices.
pub fn all_sequences(n_items: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &layer {
            for i in 0..n_items {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Sentences of 1..=max_len tokens over the overt vocabulary.
pub fn all_sentences(lex: &Lexicon, max_len: usize) -> Vec<String> {
    let mut vocab: Vec<String> = items_of(lex)
        .into_iter()
        .filter(|it| !it.phon.is_empty())
        .map(|it| it.phon)
        .collect();
    vocab.sort();
    vocab.dedup();
    all_sequences(vocab.len(), max_len)
        .into_iter()
        .map(|s| s.iter().map(|&i| vocab[i].as_str()).collect::<Vec<_>>().join(" "))
        .collect()
}
