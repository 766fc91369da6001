//! Exhaustive CKY decoder. Serves as the exact oracle for the A* decoder:
//! full bottom-up dynamic programming over all pruned candidates, carrying
//! the canonical tie-break key alongside the score.

use std::collections::HashMap;

use crate::category::{apply_unary, combine, Combinator, HeadSide};
use crate::derivation::{tree_score, Derivation, DerivationNode, TieKey};
use crate::parser::{check_penalties, CatInterner, ParseError};
use crate::sentence::{ParseConfig, ScoredSentence};

/// Cell entry key: (category id, head token, reached via a unary rewrite).
type EntryKey = (u32, usize, bool);

#[derive(Clone)]
enum Back {
    Leaf { cat_index: usize },
    Unary { child: EntryKey, rule_index: usize },
    Binary {
        split: usize,
        left: EntryKey,
        right: EntryKey,
        rule: Combinator,
        head_side: HeadSide,
    },
}

#[derive(Clone)]
struct Entry {
    score: f64,
    key: TieKey,
    back: Back,
}

fn better(score: f64, key: &TieKey, old: &Entry) -> bool {
    score > old.score || (score == old.score && *key < old.key)
}

/// Exact maximizer of the penalized tree score by full CKY.
pub fn parse_exhaustive(
    s: &ScoredSentence,
    cfg: &ParseConfig,
    penalties: Option<&[Vec<f64>]>,
) -> Result<Derivation, ParseError> {
    if s.len() > cfg.oracle_limit {
        return Err(ParseError::OracleLimit {
            length: s.len(),
            limit: cfg.oracle_limit,
        });
    }
    let candidates = cfg.candidates(s);
    parse_exhaustive_with_candidates(s, cfg, penalties, &candidates)
}

/// CKY over an explicit per-token candidate set. Used by the joint oracle
/// to decode with some tokens pinned to a single category.
pub fn parse_exhaustive_with_candidates(
    s: &ScoredSentence,
    cfg: &ParseConfig,
    penalties: Option<&[Vec<f64>]>,
    candidates: &[Vec<usize>],
) -> Result<Derivation, ParseError> {
    check_penalties(s, penalties)?;
    let m = s.len();
    for (t, c) in candidates.iter().enumerate() {
        if c.is_empty() {
            return Err(ParseError::NoCandidates { token: t });
        }
    }
    let mut interner = CatInterner::for_sentence(s);
    let mut cells: HashMap<(usize, usize), HashMap<EntryKey, Entry>> = HashMap::new();

    // leaves
    for t in 0..m {
        let mut cell: HashMap<EntryKey, Entry> = HashMap::new();
        for &c in &candidates[t] {
            let id = interner.intern(&s.categories[c]);
            let score = s.tag_log_prob[t][c] - penalties.map_or(0.0, |p| p[t][c]);
            let key = TieKey::leaf_key(c);
            let entry = Entry {
                score,
                key,
                back: Back::Leaf { cat_index: c },
            };
            insert(&mut cell, (id, t, false), entry);
        }
        apply_unary_pass(&mut cell, cfg, &mut interner);
        cells.insert((t, t + 1), cell);
    }

    // wider spans
    for width in 2..=m {
        for i in 0..=(m - width) {
            let j = i + width;
            let mut cell: HashMap<EntryKey, Entry> = HashMap::new();
            for split in (i + 1)..j {
                let left_cell = cells.get(&(i, split)).unwrap();
                let right_cell = cells.get(&(split, j)).unwrap();
                let mut products = Vec::new();
                for (&(lcat, lhead, lun), le) in left_cell.iter() {
                    for (&(rcat, rhead, run), re) in right_cell.iter() {
                        for (cat, rule, head_side) in
                            combine(interner.get(lcat), interner.get(rcat), &cfg.rules)
                        {
                            let (head, dep) = match head_side {
                                HeadSide::Left => (lhead, rhead),
                                HeadSide::Right => (rhead, lhead),
                            };
                            let score =
                                le.score + re.score + s.dep_log_prob[dep][head + 1];
                            let key =
                                TieKey::binary(&le.key, &re.key, split - i, rule.code());
                            products.push((
                                cat,
                                head,
                                Entry {
                                    score,
                                    key,
                                    back: Back::Binary {
                                        split,
                                        left: (lcat, lhead, lun),
                                        right: (rcat, rhead, run),
                                        rule,
                                        head_side,
                                    },
                                },
                            ));
                        }
                    }
                }
                for (cat, head, entry) in products {
                    let id = interner.intern(&cat);
                    insert(&mut cell, (id, head, false), entry);
                }
            }
            apply_unary_pass(&mut cell, cfg, &mut interner);
            cells.insert((i, j), cell);
        }
    }

    // attach the root
    let top = cells.get(&(0, m)).unwrap();
    let mut best: Option<(f64, TieKey, EntryKey)> = None;
    for (&ek, e) in top.iter() {
        let total = e.score + s.dep_log_prob[ek.1][0];
        let replace = match &best {
            None => true,
            Some((bt, bk, _)) => total > *bt || (total == *bt && e.key < *bk),
        };
        if replace {
            best = Some((total, e.key.clone(), ek));
        }
    }
    let Some((_, _, root_key)) = best else {
        return Err(ParseError::NoParse { length: m });
    };

    let root = rebuild(&cells, &interner, cfg, 0, m, root_key);
    let mut d = Derivation::from_root(root);
    d.score = tree_score(&d, s, penalties).expect("shape checked");
    Ok(d)
}

fn insert(cell: &mut HashMap<EntryKey, Entry>, k: EntryKey, entry: Entry) {
    match cell.get(&k) {
        Some(old) if !better(entry.score, &entry.key, old) => {}
        _ => {
            cell.insert(k, entry);
        }
    }
}

fn apply_unary_pass(
    cell: &mut HashMap<EntryKey, Entry>,
    cfg: &ParseConfig,
    interner: &mut CatInterner,
) {
    let base: Vec<(EntryKey, Entry)> = cell
        .iter()
        .filter(|((_, _, via_unary), _)| !via_unary)
        .map(|(k, e)| (*k, e.clone()))
        .collect();
    for (k, e) in base {
        for (idx, (cat, _label)) in apply_unary(interner.get(k.0), &cfg.rules)
            .into_iter()
            .enumerate()
        {
            let id = interner.intern(&cat);
            let entry = Entry {
                score: e.score,
                key: e.key.with_unary(idx as u32 + 1),
                back: Back::Unary {
                    child: k,
                    rule_index: idx,
                },
            };
            insert(cell, (id, k.1, true), entry);
        }
    }
}

fn rebuild(
    cells: &HashMap<(usize, usize), HashMap<EntryKey, Entry>>,
    interner: &CatInterner,
    cfg: &ParseConfig,
    i: usize,
    j: usize,
    key: EntryKey,
) -> DerivationNode {
    let entry = &cells[&(i, j)][&key];
    match &entry.back {
        Back::Leaf { cat_index } => DerivationNode::Leaf {
            index: i,
            cat_index: *cat_index,
            category: interner.get(key.0).clone(),
        },
        Back::Unary { child, rule_index } => {
            let node = rebuild(cells, interner, cfg, i, j, *child);
            let (cat, label) = apply_unary(interner.get(child.0), &cfg.rules)
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
            split,
            left,
            right,
            rule,
            head_side,
        } => {
            let l = rebuild(cells, interner, cfg, i, *split, *left);
            let r = rebuild(cells, interner, cfg, *split, j, *right);
            DerivationNode::Binary {
                category: interner.get(key.0).clone(),
                rule: *rule,
                head_side: *head_side,
                left: Box::new(l),
                right: Box::new(r),
            }
        }
    }
}
