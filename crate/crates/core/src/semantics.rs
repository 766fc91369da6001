//! λ-calculus semantic composition: category-indexed lexical templates,
//! combinator-directed composition over derivations, normal-order
//! β-reduction, and predicate–argument extraction from the normal forms.
//!
//! Formulas are neo-Davidsonian: verbs introduce an event variable bound by
//! `exists`, with `subj`/`obj` role constants linked to it through `eq`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::category::{parse_category, unify, Binding, Category, Combinator};
use crate::derivation::{Derivation, DerivationNode};
use crate::sentence::ScoredSentence;

pub const DEFAULT_STEP_LIMIT: usize = 10_000;

/// An untyped λ-term. The logical connectives are the reserved constants
/// `and`, `exists`, `not`, and `eq`, applied to their arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LambdaTerm {
    Var(String),
    Const(String),
    Abs(String, Box<LambdaTerm>),
    App(Box<LambdaTerm>, Box<LambdaTerm>),
}

use LambdaTerm::{Abs, App, Const, Var};

impl LambdaTerm {
    pub fn abs(v: &str, body: LambdaTerm) -> LambdaTerm {
        Abs(v.to_string(), Box::new(body))
    }

    pub fn app(f: LambdaTerm, a: LambdaTerm) -> LambdaTerm {
        App(Box::new(f), Box::new(a))
    }

    fn free_in(&self, v: &str) -> bool {
        match self {
            Var(x) => x == v,
            Const(_) => false,
            Abs(x, b) => x != v && b.free_in(v),
            App(f, a) => f.free_in(v) || a.free_in(v),
        }
    }

    pub fn is_closed(&self) -> bool {
        fn go(t: &LambdaTerm, bound: &mut Vec<String>) -> bool {
            match t {
                Var(x) => bound.iter().any(|b| b == x),
                Const(_) => true,
                Abs(x, b) => {
                    bound.push(x.clone());
                    let ok = go(b, bound);
                    bound.pop();
                    ok
                }
                App(f, a) => go(f, bound) && go(a, bound),
            }
        }
        go(self, &mut Vec::new())
    }
}

#[derive(Debug, Error)]
pub enum SemanticsError {
    #[error("syntax error in λ-term at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("no semantic template covers token {token} {word:?} with category {category}")]
    TemplateGap {
        token: usize,
        word: String,
        category: String,
    },
    #[error("no semantic shift registered for unary rule {label:?}")]
    MissingShift { label: String },
    #[error("β-reduction exceeded {limit} steps; a template combination does not normalize")]
    StepLimit { limit: usize },
    #[error("derivation has {leaves} leaves but {terms} leaf terms were supplied")]
    LeafMismatch { leaves: usize, terms: usize },
    #[error("template category {category:?} is not parseable: {source}")]
    BadTemplateCategory {
        category: String,
        source: crate::category::CategoryParseError,
    },
}

// ---------------------------------------------------------------------------
// Plain-text term syntax: `\x.` abstraction, juxtaposition application
// (left-associative), parentheses, identifiers. Identifiers bound by an
// enclosing abstraction are variables; everything else is a constant.

pub fn parse_term(input: &str) -> Result<LambdaTerm, SemanticsError> {
    let mut p = TermParser {
        bytes: input.as_bytes(),
        pos: 0,
        scope: Vec::new(),
    };
    let t = p.term()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(t)
}

/// Renders a term in the plain-text syntax accepted by [`parse_term`]:
/// `\x.` for abstraction, juxtaposition for application, parentheses only
/// where the grammar requires them.
pub fn render_term(t: &LambdaTerm) -> String {
    fn atom(t: &LambdaTerm, out: &mut String) {
        match t {
            Var(x) | Const(x) => out.push_str(x),
            _ => {
                out.push('(');
                term(t, out);
                out.push(')');
            }
        }
    }
    fn appl(t: &LambdaTerm, out: &mut String) {
        match t {
            App(f, a) => {
                appl(f, out);
                out.push(' ');
                atom(a, out);
            }
            _ => atom(t, out),
        }
    }
    fn term(t: &LambdaTerm, out: &mut String) {
        match t {
            Abs(x, b) => {
                out.push('\\');
                out.push_str(x);
                out.push('.');
                term(b, out);
            }
            _ => appl(t, out),
        }
    }
    let mut out = String::new();
    term(t, &mut out);
    out
}

struct TermParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    scope: Vec<String>,
}

impl<'a> TermParser<'a> {
    fn err(&self, message: &str) -> SemanticsError {
        SemanticsError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn ident(&mut self) -> Result<String, SemanticsError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_' || *b == b'\'')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an identifier"));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn term(&mut self) -> Result<LambdaTerm, SemanticsError> {
        match self.peek() {
            Some(b'\\') => {
                self.pos += 1;
                let v = self.ident()?;
                if self.peek() != Some(b'.') {
                    return Err(self.err("expected '.' after the abstraction variable"));
                }
                self.pos += 1;
                self.scope.push(v.clone());
                let body = self.term()?;
                self.scope.pop();
                Ok(LambdaTerm::abs(&v, body))
            }
            _ => self.application(),
        }
    }

    fn application(&mut self) -> Result<LambdaTerm, SemanticsError> {
        let mut t = self.atom()?.ok_or_else(|| self.err("expected a term"))?;
        while let Some(next) = self.atom()? {
            t = LambdaTerm::app(t, next);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Option<LambdaTerm>, SemanticsError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(Some(t))
            }
            Some(b) if b.is_ascii_alphanumeric() || b == b'_' => {
                let name = self.ident()?;
                if self.scope.contains(&name) {
                    Ok(Some(Var(name)))
                } else {
                    Ok(Some(Const(name)))
                }
            }
            _ => Ok(None),
        }
    }
}

// ---------------------------------------------------------------------------
// β-reduction

struct Fresh(usize);

impl Fresh {
    fn next(&mut self, base: &str) -> String {
        self.0 += 1;
        let stem: String = base.chars().take_while(|c| *c != '\'').collect();
        format!("{}'{}", stem, self.0)
    }
}

fn substitute(t: &LambdaTerm, v: &str, arg: &LambdaTerm, fresh: &mut Fresh) -> LambdaTerm {
    match t {
        Var(x) if x == v => arg.clone(),
        Var(_) | Const(_) => t.clone(),
        App(f, a) => LambdaTerm::app(
            substitute(f, v, arg, fresh),
            substitute(a, v, arg, fresh),
        ),
        Abs(x, b) => {
            if x == v {
                t.clone()
            } else if arg.free_in(x) && b.free_in(v) {
                // rename the binder to avoid capturing arg's free x
                let x2 = fresh.next(x);
                let renamed = substitute(b, x, &Var(x2.clone()), fresh);
                Abs(x2, Box::new(substitute(&renamed, v, arg, fresh)))
            } else {
                Abs(x.clone(), Box::new(substitute(b, v, arg, fresh)))
            }
        }
    }
}

fn step(t: &LambdaTerm, fresh: &mut Fresh) -> Option<LambdaTerm> {
    match t {
        App(f, a) => {
            if let Abs(v, b) = f.as_ref() {
                return Some(substitute(b, v, a, fresh));
            }
            if let Some(f2) = step(f, fresh) {
                return Some(LambdaTerm::app(f2, (**a).clone()));
            }
            step(a, fresh).map(|a2| LambdaTerm::app((**f).clone(), a2))
        }
        Abs(v, b) => step(b, fresh).map(|b2| Abs(v.clone(), Box::new(b2))),
        Var(_) | Const(_) => None,
    }
}

/// Canonical alpha-renaming: bound variables become `x1`, `x2`, … in
/// preorder, so alpha-equivalent terms become identical.
pub fn canonicalize(t: &LambdaTerm) -> LambdaTerm {
    fn go(t: &LambdaTerm, env: &mut Vec<(String, String)>, n: &mut usize) -> LambdaTerm {
        match t {
            Var(x) => Var(env
                .iter()
                .rev()
                .find(|(orig, _)| orig == x)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| x.clone())),
            Const(c) => Const(c.clone()),
            Abs(x, b) => {
                *n += 1;
                let new = format!("x{}", n);
                env.push((x.clone(), new.clone()));
                let body = go(b, env, n);
                env.pop();
                Abs(new, Box::new(body))
            }
            App(f, a) => LambdaTerm::app(go(f, env, n), go(a, env, n)),
        }
    }
    go(t, &mut Vec::new(), &mut 0)
}

/// Normal-order reduction to β-normal form, followed by canonical
/// alpha-renaming. Errors after `max_steps` reductions.
pub fn beta_reduce(t: &LambdaTerm, max_steps: usize) -> Result<LambdaTerm, SemanticsError> {
    let mut fresh = Fresh(0);
    let mut cur = t.clone();
    for _ in 0..=max_steps {
        match step(&cur, &mut fresh) {
            Some(next) => cur = next,
            None => return Ok(canonicalize(&cur)),
        }
    }
    Err(SemanticsError::StepLimit { limit: max_steps })
}

// ---------------------------------------------------------------------------
// Templates

/// One lexical rule: a category pattern (feature variables allowed) with
/// optional POS and surface guards, and a schema whose `__W__` hole receives
/// the word's base form.
#[derive(Clone, Debug)]
pub struct Template {
    pub category: Category,
    pub pos_guard: Option<String>,
    pub surface_guard: Option<String>,
    pub schema: LambdaTerm,
}

/// Ordered lexical templates plus the shift terms for unary rules, keyed by
/// the rule label (for example `"N->NP"`). First matching template wins.
#[derive(Clone, Debug)]
pub struct TemplateSet {
    pub templates: Vec<Template>,
    pub unary_shifts: HashMap<String, LambdaTerm>,
}

#[derive(Deserialize)]
struct RawTemplate {
    category: String,
    #[serde(default)]
    pos: Option<String>,
    #[serde(default)]
    surface: Option<String>,
    schema: String,
}

#[derive(Deserialize)]
struct RawTemplateSet {
    templates: Vec<RawTemplate>,
    #[serde(default)]
    unary_shifts: HashMap<String, String>,
}

impl TemplateSet {
    pub fn from_json(json: &str) -> Result<TemplateSet, Box<dyn std::error::Error>> {
        let raw: RawTemplateSet = serde_json::from_str(json)?;
        let mut templates = Vec::new();
        for r in raw.templates {
            let category = parse_category(&r.category).map_err(|source| {
                SemanticsError::BadTemplateCategory {
                    category: r.category.clone(),
                    source,
                }
            })?;
            templates.push(Template {
                category,
                pos_guard: r.pos,
                surface_guard: r.surface,
                schema: parse_term(&r.schema)?,
            });
        }
        let mut unary_shifts = HashMap::new();
        for (label, schema) in raw.unary_shifts {
            unary_shifts.insert(label, parse_term(&schema)?);
        }
        Ok(TemplateSet {
            templates,
            unary_shifts,
        })
    }

    fn push(&mut self, category: &str, surface: Option<&str>, schema: &str) {
        self.templates.push(Template {
            category: parse_category(category).unwrap(),
            pos_guard: None,
            surface_guard: surface.map(str::to_string),
            schema: parse_term(schema).unwrap(),
        });
    }

    /// Finds the first template matching a leaf. The category match uses
    /// unification so patterns like `S[X]\NP` cover every feature.
    pub fn lookup(
        &self,
        word: &str,
        pos: Option<&str>,
        category: &Category,
    ) -> Option<&Template> {
        let surface = word.to_lowercase();
        self.templates.iter().find(|t| {
            if let Some(g) = &t.surface_guard {
                if *g != surface {
                    return false;
                }
            }
            if let Some(g) = &t.pos_guard {
                if pos != Some(g.as_str()) {
                    return false;
                }
            }
            let mut binding = Binding::default();
            unify(&t.category, category, &mut binding)
        })
    }
}

fn fill_hole(schema: &LambdaTerm, word: &str) -> LambdaTerm {
    match schema {
        Const(c) if c == "__W__" => Const(word.to_string()),
        Var(_) | Const(_) => schema.clone(),
        Abs(v, b) => Abs(v.clone(), Box::new(fill_hole(b, word))),
        App(f, a) => LambdaTerm::app(fill_hole(f, word), fill_hole(a, word)),
    }
}

impl Default for TemplateSet {
    /// The built-in English template set. event-style verb templates plus
    /// neo-Davidsonian nouns, modifiers, determiners, and the copula.
    fn default() -> Self {
        let mut t = TemplateSet {
            templates: Vec::new(),
            unary_shifts: HashMap::new(),
        };
        // copula as a raising auxiliary: semantically transparent
        for surface in ["is", "are", "was", "were", "am", "be", "been", "being"] {
            t.push("(S[dcl]\\NP)/(S[ng]\\NP)", Some(surface), "\\F.F");
        }
        // determiners
        for surface in ["a", "an", "some", "the"] {
            t.push(
                "NP/N",
                Some(surface),
                "\\N.\\P.exists (\\x.and (N x) (P x))",
            );
        }
        t.push(
            "NP/N",
            Some("no"),
            "\\N.\\P.not (exists (\\x.and (N x) (P x)))",
        );
        for surface in ["every", "all", "each"] {
            t.push(
                "NP/N",
                Some(surface),
                "\\N.\\P.not (exists (\\x.and (N x) (not (P x))))",
            );
        }
        // open-class defaults
        t.push("N", None, "\\x.__W__ x");
        t.push("N/N", None, "\\P.\\x.and (P x) (__W__ x)");
        t.push("NP", None, "__W__");
        t.push("S[X]\\NP", None, "\\x.exists (\\e.and (__W__ e) (eq (subj e) x))");
        t.push(
            "(S[X]\\NP)/NP",
            None,
            "\\y.\\x.exists (\\e.and (__W__ e) (and (eq (subj e) x) (eq (obj e) y)))",
        );
        t.push(
            "(S[X]\\NP)/PP",
            None,
            "\\y.\\x.exists (\\e.and (__W__ e) (and (eq (subj e) x) (eq (obj e) y)))",
        );
        t.push("PP/NP", None, "\\x.x");
        // generic determiner fallback
        t.push("NP/N", None, "\\N.\\P.exists (\\x.and (N x) (P x))");
        t.push("conj", None, "\\X.\\P.\\x.and (P x) (X x)");
        // bare N used as NP: existential closure over the property
        t.unary_shifts.insert(
            "N->NP".to_string(),
            parse_term("\\N.\\P.exists (\\x.and (N x) (P x))").unwrap(),
        );
        // present participle used as a noun modifier
        t.unary_shifts.insert(
            "S[ng]\\NP->N/N".to_string(),
            parse_term("\\V.\\P.\\x.and (P x) (V x)").unwrap(),
        );
        t
    }
}

/// One closed λ-term per token, with the lowercased word filled into the
/// matching template's hole.
pub fn assign_lexical_terms(
    d: &Derivation,
    s: &ScoredSentence,
    templates: &TemplateSet,
) -> Result<Vec<LambdaTerm>, SemanticsError> {
    let mut out = Vec::with_capacity(s.len());
    for (token, &cat_index) in d.leaf_cats.iter().enumerate() {
        let category = &s.categories[cat_index];
        let pos = s.pos.as_ref().map(|p| p[token].as_str());
        let word = s.tokens[token].to_lowercase();
        let t = templates.lookup(&s.tokens[token], pos, category).ok_or_else(|| {
            SemanticsError::TemplateGap {
                token,
                word: s.tokens[token].clone(),
                category: category.to_string(),
            }
        })?;
        out.push(fill_hole(&t.schema, &word));
    }
    Ok(out)
}

/// Composes leaf terms bottom-up along the derivation: application rules
/// apply the functor's term to the argument's, composition rules build
/// λx.f(g x), conjunction applies the conjunction word's term, and unary
/// rules wrap with their registered shift term. The result is β-normalized.
pub fn compose_semantics(
    d: &Derivation,
    leaf_terms: &[LambdaTerm],
    templates: &TemplateSet,
) -> Result<LambdaTerm, SemanticsError> {
    if leaf_terms.len() != d.leaf_cats.len() {
        return Err(SemanticsError::LeafMismatch {
            leaves: d.leaf_cats.len(),
            terms: leaf_terms.len(),
        });
    }
    let raw = compose_node(&d.root, leaf_terms, templates)?;
    beta_reduce(&raw, DEFAULT_STEP_LIMIT)
}

fn glue(outer: &[&str], body: LambdaTerm) -> LambdaTerm {
    outer
        .iter()
        .rev()
        .fold(body, |acc, v| LambdaTerm::abs(v, acc))
}

fn compose_node(
    node: &DerivationNode,
    leaf_terms: &[LambdaTerm],
    templates: &TemplateSet,
) -> Result<LambdaTerm, SemanticsError> {
    match node {
        DerivationNode::Leaf { index, .. } => Ok(leaf_terms[*index].clone()),
        DerivationNode::Unary { rule, child, .. } => {
            let inner = compose_node(child, leaf_terms, templates)?;
            let shift = templates
                .unary_shifts
                .get(rule)
                .ok_or_else(|| SemanticsError::MissingShift { label: rule.clone() })?;
            Ok(LambdaTerm::app(shift.clone(), inner))
        }
        DerivationNode::Binary {
            rule, left, right, ..
        } => {
            let l = compose_node(left, leaf_terms, templates)?;
            let r = compose_node(right, leaf_terms, templates)?;
            // glue variables are renamed away by the final canonicalization
            let gv = "_g";
            let gw = "_h";
            Ok(match rule {
                Combinator::ForwardApplication => LambdaTerm::app(l, r),
                Combinator::BackwardApplication => LambdaTerm::app(r, l),
                Combinator::ForwardComposition => glue(
                    &[gv],
                    LambdaTerm::app(l, LambdaTerm::app(r, Var(gv.into()))),
                ),
                Combinator::BackwardComposition => glue(
                    &[gv],
                    LambdaTerm::app(r, LambdaTerm::app(l, Var(gv.into()))),
                ),
                Combinator::ForwardComposition2 => glue(
                    &[gv, gw],
                    LambdaTerm::app(
                        l,
                        LambdaTerm::app(LambdaTerm::app(r, Var(gv.into())), Var(gw.into())),
                    ),
                ),
                Combinator::BackwardComposition2 => glue(
                    &[gv, gw],
                    LambdaTerm::app(
                        r,
                        LambdaTerm::app(LambdaTerm::app(l, Var(gv.into())), Var(gw.into())),
                    ),
                ),
                Combinator::Conjunction => LambdaTerm::app(l, r),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Predicate–argument extraction

/// The predicates (with arity) of a formula and the role constants linked
/// to each predicate through a shared event variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredArgStructure {
    pub predicates: BTreeSet<(String, usize)>,
    pub role_links: BTreeSet<(String, String)>,
}

impl PredArgStructure {
    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty() && self.role_links.is_empty()
    }

    /// The predicates and role links mentioning one symbol — the motivating example’s
    /// "argument structure of a word" comparison.
    pub fn of_predicate(&self, name: &str) -> PredArgStructure {
        PredArgStructure {
            predicates: self
                .predicates
                .iter()
                .filter(|(p, _)| p == name)
                .cloned()
                .collect(),
            role_links: self
                .role_links
                .iter()
                .filter(|(_, p)| p == name)
                .cloned()
                .collect(),
        }
    }
}

const CONNECTIVES: [&str; 4] = ["and", "exists", "not", "eq"];
const ROLES: [&str; 2] = ["subj", "obj"];

fn spine(t: &LambdaTerm) -> (&LambdaTerm, Vec<&LambdaTerm>) {
    let mut head = t;
    let mut args = Vec::new();
    while let App(f, a) = head {
        args.push(a.as_ref());
        head = f.as_ref();
    }
    args.reverse();
    (head, args)
}

/// Walks a β-normal formula collecting every applied constant's arity plus
/// `subj`/`obj` links: `eq (role e) x` links `role` to each predicate
/// applied to the same event variable `e`.
pub fn extract_pred_args(t: &LambdaTerm) -> PredArgStructure {
    // first pass: predicate atoms (constant head, at least one argument)
    let mut atoms: Vec<(String, Vec<&LambdaTerm>)> = Vec::new();
    fn collect<'a>(t: &'a LambdaTerm, atoms: &mut Vec<(String, Vec<&'a LambdaTerm>)>) {
        let (head, args) = spine(t);
        if let Const(c) = head {
            if !args.is_empty() {
                atoms.push((c.clone(), args.clone()));
            }
        }
        match t {
            App(f, a) => {
                collect(f, atoms);
                collect(a, atoms);
            }
            Abs(_, b) => collect(b, atoms),
            Var(_) | Const(_) => {}
        }
    }
    collect(t, &mut atoms);

    let mut out = PredArgStructure::default();
    for (name, args) in &atoms {
        if !CONNECTIVES.contains(&name.as_str()) && !ROLES.contains(&name.as_str()) {
            out.predicates.insert((name.clone(), args.len()));
        }
    }
    for (name, args) in &atoms {
        if name == "eq" && args.len() == 2 {
            let (head, rargs) = spine(args[0]);
            if let (Const(role), [Var(e)]) = (head, rargs.as_slice()) {
                if ROLES.contains(&role.as_str()) {
                    for (p, pargs) in &atoms {
                        if !CONNECTIVES.contains(&p.as_str())
                            && !ROLES.contains(&p.as_str())
                            && matches!(pargs.as_slice(), [Var(v)] if v == e)
                        {
                            out.role_links.insert((role.clone(), p.clone()));
                        }
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// First-order pretty printing

/// Renders a term in first-order syntax: `∃x.(…)`, `∧`, `¬`, `=`, and
/// `pred(a, b)` application; residual abstractions print as `λx.`.
pub struct Fol<'a>(pub &'a LambdaTerm);

impl fmt::Display for Fol<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_fol(self.0, f)
    }
}

fn write_fol(t: &LambdaTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let (head, args) = spine(t);
    match (head, args.as_slice()) {
        (Const(c), [a, b]) if c == "and" => {
            write!(f, "(")?;
            write_fol(a, f)?;
            write!(f, " ∧ ")?;
            write_fol(b, f)?;
            write!(f, ")")
        }
        (Const(c), [a, b]) if c == "eq" => {
            write_fol(a, f)?;
            write!(f, "=")?;
            write_fol(b, f)
        }
        (Const(c), [a]) if c == "not" => {
            write!(f, "¬")?;
            write_fol(a, f)
        }
        (Const(c), [Abs(v, b)]) if c == "exists" => {
            write!(f, "∃{}.", v)?;
            write_fol(b, f)
        }
        (Const(c), rest) if !rest.is_empty() => {
            write!(f, "{}(", c)?;
            for (i, a) in rest.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_fol(a, f)?;
            }
            write!(f, ")")
        }
        _ => match t {
            Var(v) => write!(f, "{}", v),
            Const(c) => write!(f, "{}", c),
            Abs(v, b) => {
                write!(f, "λ{}.", v)?;
                write_fol(b, f)
            }
            App(g, a) => {
                write_fol(g, f)?;
                write!(f, "(")?;
                write_fol(a, f)?;
                write!(f, ")")
            }
        },
    }
}

pub fn render_formula(t: &LambdaTerm) -> String {
    Fol(t).to_string()
}
