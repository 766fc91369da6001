//! Agenda-based A* decoder. Chart items are scored by their inside score
//! plus an admissible outside estimate; the agenda is drained until the
//! best completed derivation provably dominates everything left, so ties
//! are resolved by the same canonical key as the CKY oracle.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::category::{apply_unary, combine, Combinator, HeadSide};
use crate::derivation::{tree_score, Derivation, DerivationNode, TieKey};
use crate::parser::{check_penalties, CatInterner, ParseError};
use crate::sentence::{ParseConfig, ScoredSentence};

/// Item signature: span, category id, head token, via-unary flag.
type Sig = (usize, usize, u32, usize, bool);

#[derive(Clone)]
enum Back {
    Leaf { cat_index: usize },
    Unary { child: Sig, rule_index: usize },
    Binary {
        left: Sig,
        right: Sig,
        rule: Combinator,
        head_side: HeadSide,
    },
}

#[derive(Clone)]
struct Settled {
    score: f64,
    key: TieKey,
    back: Back,
}

enum Kind {
    Span { sig: Sig, score: f64, back: Back },
    Goal { sig: Sig, total: f64 },
}

struct Item {
    priority: f64,
    key: TieKey,
    kind: Kind,
}

impl Item {
    fn sig(&self) -> &Sig {
        match &self.kind {
            Kind::Span { sig, .. } | Kind::Goal { sig, .. } => sig,
        }
    }
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: higher priority first, then smaller canonical key
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.key.cmp(&self.key))
            .then_with(|| other.sig().cmp(self.sig()))
    }
}

struct Search<'a> {
    s: &'a ScoredSentence,
    cfg: &'a ParseConfig,
    interner: CatInterner,
    /// per-token optimistic completion contribution (best penalized tag over
    /// the candidate set plus best dependency score), as a prefix sum
    prefix: Vec<f64>,
    max_dep: Vec<f64>,
    agenda: BinaryHeap<Item>,
    settled: HashMap<Sig, Settled>,
    starts_at: HashMap<usize, Vec<Sig>>,
    ends_at: HashMap<usize, Vec<Sig>>,
}

impl<'a> Search<'a> {
    fn outside(&self, i: usize, j: usize) -> f64 {
        let total = self.prefix[self.s.len()];
        total - (self.prefix[j] - self.prefix[i])
    }

    fn span_priority(&self, sig: &Sig, score: f64) -> f64 {
        // the item's own head is unattached: bound it by its best dependency
        score + self.max_dep[sig.3] + self.outside(sig.0, sig.1)
    }

    fn push_span(&mut self, sig: Sig, score: f64, key: TieKey, back: Back) {
        if let Some(old) = self.settled.get(&sig) {
            if !(score > old.score || (score == old.score && key < old.key)) {
                return;
            }
        }
        let priority = self.span_priority(&sig, score);
        self.agenda.push(Item {
            priority,
            key,
            kind: Kind::Span { sig, score, back },
        });
    }

    fn expand(&mut self, sig: Sig, score: f64, key: TieKey) {
        let (i, j, cat_id, head, via_unary) = sig;
        let m = self.s.len();

        if i == 0 && j == m {
            let total = score + self.s.dep_log_prob[head][0];
            self.agenda.push(Item {
                priority: total,
                key: key.clone(),
                kind: Kind::Goal { sig, total },
            });
        }

        if !via_unary {
            let rewrites = apply_unary(self.interner.get(cat_id), &self.cfg.rules);
            for (idx, (cat, _label)) in rewrites.into_iter().enumerate() {
                let id = self.interner.intern(&cat);
                self.push_span(
                    (i, j, id, head, true),
                    score,
                    key.with_unary(idx as u32 + 1),
                    Back::Unary {
                        child: sig,
                        rule_index: idx,
                    },
                );
            }
        }

        // pair with settled right neighbors
        let rights = self.starts_at.get(&j).cloned().unwrap_or_default();
        for rsig in rights {
            let re = self.settled[&rsig].clone();
            self.combine_pair(sig, score, &key, rsig, re.score, &re.key);
        }
        // pair with settled left neighbors
        let lefts = self.ends_at.get(&i).cloned().unwrap_or_default();
        for lsig in lefts {
            let le = self.settled[&lsig].clone();
            self.combine_pair(lsig, le.score, &le.key.clone(), sig, score, &key);
        }
    }

    fn combine_pair(
        &mut self,
        lsig: Sig,
        lscore: f64,
        lkey: &TieKey,
        rsig: Sig,
        rscore: f64,
        rkey: &TieKey,
    ) {
        let (i, split, lcat, lhead, _) = lsig;
        let (_, j, rcat, rhead, _) = rsig;
        let lc = self.interner.get(lcat).clone();
        let rc = self.interner.get(rcat).clone();
        let results = combine(&lc, &rc, &self.cfg.rules);
        for (cat, rule, head_side) in results {
            let (head, dep) = match head_side {
                HeadSide::Left => (lhead, rhead),
                HeadSide::Right => (rhead, lhead),
            };
            let score = lscore + rscore + self.s.dep_log_prob[dep][head + 1];
            let key = TieKey::binary(lkey, rkey, split - i, rule.code());
            let id = self.interner.intern(&cat);
            self.push_span(
                (i, j, id, head, false),
                score,
                key,
                Back::Binary {
                    left: lsig,
                    right: rsig,
                    rule,
                    head_side,
                },
            );
        }
    }
}

/// Exact penalized decoding by A* search; identical results to
/// [`super::parse_exhaustive`] on every instance, including ties.
pub fn parse_astar(
    s: &ScoredSentence,
    cfg: &ParseConfig,
    penalties: Option<&[Vec<f64>]>,
) -> Result<Derivation, ParseError> {
    check_penalties(s, penalties)?;
    let m = s.len();
    let candidates = cfg.candidates(s);
    for (t, c) in candidates.iter().enumerate() {
        if c.is_empty() {
            return Err(ParseError::NoCandidates { token: t });
        }
    }

    let interner = CatInterner::for_sentence(s);
    let mut prefix = vec![0.0; m + 1];
    let mut max_dep = vec![0.0; m];
    for t in 0..m {
        let best_tag = candidates[t]
            .iter()
            .map(|&c| s.tag_log_prob[t][c] - penalties.map_or(0.0, |p| p[t][c]))
            .fold(f64::NEG_INFINITY, f64::max);
        max_dep[t] = s.dep_log_prob[t]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        prefix[t + 1] = prefix[t] + best_tag + max_dep[t];
    }

    let mut search = Search {
        s,
        cfg,
        interner,
        prefix,
        max_dep,
        agenda: BinaryHeap::new(),
        settled: HashMap::new(),
        starts_at: HashMap::new(),
        ends_at: HashMap::new(),
    };

    for t in 0..m {
        for &c in &candidates[t] {
            let id = search.interner.intern(&s.categories[c]);
            let score = s.tag_log_prob[t][c] - penalties.map_or(0.0, |p| p[t][c]);
            search.push_span(
                (t, t + 1, id, t, false),
                score,
                TieKey::leaf_key(c),
                Back::Leaf { cat_index: c },
            );
        }
    }

    let mut best_goal: Option<(f64, TieKey, Sig)> = None;
    while let Some(item) = search.agenda.pop() {
        if let Some((bt, _, _)) = &best_goal {
            if item.priority < *bt {
                break;
            }
        }
        match item.kind {
            Kind::Goal { sig, total } => {
                let replace = match &best_goal {
                    None => true,
                    Some((bt, bk, _)) => total > *bt || (total == *bt && item.key < *bk),
                };
                if replace {
                    best_goal = Some((total, item.key, sig));
                }
            }
            Kind::Span { sig, score, back } => {
                if let Some(old) = search.settled.get(&sig) {
                    if !(score > old.score || (score == old.score && item.key < old.key)) {
                        continue;
                    }
                } else {
                    search.starts_at.entry(sig.0).or_default().push(sig);
                    search.ends_at.entry(sig.1).or_default().push(sig);
                }
                search.settled.insert(
                    sig,
                    Settled {
                        score,
                        key: item.key.clone(),
                        back,
                    },
                );
                search.expand(sig, score, item.key);
            }
        }
    }

    let Some((_, _, root_sig)) = best_goal else {
        return Err(ParseError::NoParse { length: m });
    };

    let root = rebuild(&search, root_sig);
    let mut d = Derivation::from_root(root);
    d.score = tree_score(&d, s, penalties).expect("shape checked");
    Ok(d)
}

fn rebuild(search: &Search<'_>, sig: Sig) -> DerivationNode {
    let entry = &search.settled[&sig];
    match &entry.back {
        Back::Leaf { cat_index } => DerivationNode::Leaf {
            index: sig.0,
            cat_index: *cat_index,
            category: search.interner.get(sig.2).clone(),
        },
        Back::Unary { child, rule_index } => {
            let node = rebuild(search, *child);
            let (cat, label) = apply_unary(search.interner.get(child.2), &search.cfg.rules)
                .into_iter()
                .nth(*rule_index)
                .expect("unary rule index");
            DerivationNode::Unary {
                category: cat,
                rule: label,
                child: Box::new(node),
            }
        }
        Back::Binary {
            left,
            right,
            rule,
            head_side,
        } => DerivationNode::Binary {
            category: search.interner.get(sig.2).clone(),
            rule: *rule,
            head_side: *head_side,
            left: Box::new(rebuild(search, *left)),
            right: Box::new(rebuild(search, *right)),
        },
    }
}
