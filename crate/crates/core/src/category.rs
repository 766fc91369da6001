//! CCG categories: atoms with optional morphosyntactic features, slashed
//! functors, feature unification and the `simplify` operation.
//!
//! The string grammar is the usual one: features in square brackets
//! (`S[dcl]`), `/` and `\` left-associative, parentheses where needed.
//! The feature spelled `X` denotes a feature variable; it may only occur
//! on `S`-rooted atoms.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A feature slot on an atomic category.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    /// A concrete feature value such as `dcl` or `ng`.
    Value(String),
    /// The feature variable, written `X`.
    Variable,
}

/// Slash direction of a functor category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Slash {
    Forward,
    Backward,
}

impl fmt::Display for Slash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slash::Forward => write!(f, "/"),
            Slash::Backward => write!(f, "\\"),
        }
    }
}

/// A CCG category tree. Serializes as its category string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Atomic {
        base: String,
        feature: Option<Feature>,
    },
    Functor {
        result: Box<Category>,
        slash: Slash,
        argument: Box<Category>,
    },
}

impl Category {
    pub fn atom(base: &str) -> Category {
        Category::Atomic {
            base: base.to_string(),
            feature: None,
        }
    }

    pub fn atom_feat(base: &str, feature: &str) -> Category {
        Category::Atomic {
            base: base.to_string(),
            feature: Some(if feature == "X" {
                Feature::Variable
            } else {
                Feature::Value(feature.to_string())
            }),
        }
    }

    pub fn functor(result: Category, slash: Slash, argument: Category) -> Category {
        Category::Functor {
            result: Box::new(result),
            slash,
            argument: Box::new(argument),
        }
    }

    pub fn forward(result: Category, argument: Category) -> Category {
        Category::functor(result, Slash::Forward, argument)
    }

    pub fn backward(result: Category, argument: Category) -> Category {
        Category::functor(result, Slash::Backward, argument)
    }

    pub fn is_functor(&self) -> bool {
        matches!(self, Category::Functor { .. })
    }

    /// Strips every feature (and feature variable) from every atom.
    pub fn simplify(&self) -> Category {
        match self {
            Category::Atomic { base, .. } => Category::Atomic {
                base: base.clone(),
                feature: None,
            },
            Category::Functor {
                result,
                slash,
                argument,
            } => Category::Functor {
                result: Box::new(result.simplify()),
                slash: *slash,
                argument: Box::new(argument.simplify()),
            },
        }
    }

    /// True for modifier-shaped functors `X/X` and `X\X`.
    pub fn is_modifier(&self) -> bool {
        match self {
            Category::Functor {
                result, argument, ..
            } => result == argument,
            Category::Atomic { .. } => false,
        }
    }

    /// True if a feature variable occurs anywhere in the tree.
    pub fn has_variable(&self) -> bool {
        match self {
            Category::Atomic { feature, .. } => matches!(feature, Some(Feature::Variable)),
            Category::Functor {
                result, argument, ..
            } => result.has_variable() || argument.has_variable(),
        }
    }

    /// Replaces every feature variable with `binding` (`None` erases it).
    pub fn substitute(&self, binding: &Option<Feature>) -> Category {
        match self {
            Category::Atomic { base, feature } => Category::Atomic {
                base: base.clone(),
                feature: match feature {
                    Some(Feature::Variable) => binding.clone(),
                    other => other.clone(),
                },
            },
            Category::Functor {
                result,
                slash,
                argument,
            } => Category::Functor {
                result: Box::new(result.substitute(binding)),
                slash: *slash,
                argument: Box::new(argument.substitute(binding)),
            },
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Atomic { base, feature } => {
                write!(f, "{base}")?;
                match feature {
                    Some(Feature::Value(v)) => write!(f, "[{v}]"),
                    Some(Feature::Variable) => write!(f, "[X]"),
                    None => Ok(()),
                }
            }
            Category::Functor {
                result,
                slash,
                argument,
            } => {
                if result.is_functor() {
                    write!(f, "({result})")?;
                } else {
                    write!(f, "{result}")?;
                }
                write!(f, "{slash}")?;
                if argument.is_functor() {
                    write!(f, "({argument})")
                } else {
                    write!(f, "{argument}")
                }
            }
        }
    }
}

/// Renders a category to its canonical string. Functor subterms are always
/// parenthesized, so `render(parse(s))` is a fixed point.
pub fn render_category(c: &Category) -> String {
    c.to_string()
}

impl Serialize for Category {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_category(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("category parse error at byte {offset}: {message}")]
pub struct CategoryParseError {
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: &str) -> Result<T, CategoryParseError> {
        Err(CategoryParseError {
            offset: self.pos,
            message: message.to_string(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn category(&mut self) -> Result<Category, CategoryParseError> {
        let mut left = self.part()?;
        while let Some(b) = self.peek() {
            let slash = match b {
                b'/' => Slash::Forward,
                b'\\' => Slash::Backward,
                _ => break,
            };
            self.pos += 1;
            let right = self.part()?;
            left = Category::functor(left, slash, right);
        }
        Ok(left)
    }

    fn part(&mut self) -> Result<Category, CategoryParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.category()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => self.atom(),
            None => self.err("unexpected end of input"),
        }
    }

    fn atom(&mut self) -> Result<Category, CategoryParseError> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || matches!(b, b'.' | b',' | b':' | b';') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return self.err("expected an atomic category");
        }
        let base = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string();
        let feature = if self.peek() == Some(b'[') {
            self.pos += 1;
            let fstart = self.pos;
            while let Some(b) = self.peek() {
                if b == b']' {
                    break;
                }
                self.pos += 1;
            }
            if self.peek() != Some(b']') {
                return self.err("unterminated feature bracket");
            }
            let name = std::str::from_utf8(&self.bytes[fstart..self.pos])
                .unwrap()
                .to_string();
            self.pos += 1;
            if name.is_empty() {
                return self.err("empty feature");
            }
            if name == "X" {
                if base != "S" {
                    return self.err("feature variable only allowed on S");
                }
                Some(Feature::Variable)
            } else {
                Some(Feature::Value(name))
            }
        } else {
            None
        };
        Ok(Category::Atomic { base, feature })
    }
}

/// Parses a category string such as `(S[dcl]\NP)/NP`.
pub fn parse_category(text: &str) -> Result<Category, CategoryParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    if text.is_empty() {
        return p.err("empty category string");
    }
    let cat = p.category()?;
    if p.pos != p.bytes.len() {
        return p.err("trailing input");
    }
    Ok(cat)
}

/// A single feature-variable binding shared across one rule application.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Binding {
    #[default]
    Unbound,
    Bound(Option<Feature>),
}

/// Unifies `a` against `b` under a shared binding. The variable matches any
/// concrete feature (or its absence), binding on first match; two concrete
/// features must be equal.
pub fn unify(a: &Category, b: &Category, binding: &mut Binding) -> bool {
    match (a, b) {
        (
            Category::Atomic {
                base: ba,
                feature: fa,
            },
            Category::Atomic {
                base: bb,
                feature: fb,
            },
        ) => {
            if ba != bb {
                return false;
            }
            match (fa, fb) {
                (Some(Feature::Variable), Some(Feature::Variable)) => true,
                (Some(Feature::Variable), other) | (other, Some(Feature::Variable)) => {
                    match binding {
                        Binding::Unbound => {
                            *binding = Binding::Bound(other.clone());
                            true
                        }
                        Binding::Bound(bound) => bound == other,
                    }
                }
                (x, y) => x == y,
            }
        }
        (
            Category::Functor {
                result: ra,
                slash: sa,
                argument: aa,
            },
            Category::Functor {
                result: rb,
                slash: sb,
                argument: ab,
            },
        ) => sa == sb && unify(ra, rb, binding) && unify(aa, ab, binding),
        _ => false,
    }
}

/// Which child supplies the head token of a combined constituent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadSide {
    Left,
    Right,
}

/// Head selection policy for a binary combinator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadRule {
    /// The functor (primary functor for composition) is the head.
    Functor,
    /// The functor is the head unless it is modifier-shaped (`X/X`, `X\X`),
    /// in which case headship passes to the argument.
    FunctorUnlessModifier,
    Left,
    Right,
}

/// Binary combinator identifiers, used as rule labels and tie-break codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combinator {
    ForwardApplication,
    BackwardApplication,
    ForwardComposition,
    BackwardComposition,
    ForwardComposition2,
    BackwardComposition2,
    Conjunction,
}

impl Combinator {
    pub fn label(&self) -> &'static str {
        match self {
            Combinator::ForwardApplication => ">",
            Combinator::BackwardApplication => "<",
            Combinator::ForwardComposition => ">B",
            Combinator::BackwardComposition => "<B",
            Combinator::ForwardComposition2 => ">B2",
            Combinator::BackwardComposition2 => "<B2",
            Combinator::Conjunction => "conj",
        }
    }

    pub fn code(&self) -> u32 {
        match self {
            Combinator::ForwardApplication => 1,
            Combinator::BackwardApplication => 2,
            Combinator::ForwardComposition => 3,
            Combinator::BackwardComposition => 4,
            Combinator::ForwardComposition2 => 5,
            Combinator::BackwardComposition2 => 6,
            Combinator::Conjunction => 7,
        }
    }
}

/// A unary rewrite `pattern -> result`; the pattern may contain the feature
/// variable, whose binding carries over into the result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnaryRule {
    pub pattern: Category,
    pub result: Category,
    #[serde(skip_serializing)]
    pub label: String,
}

impl<'de> Deserialize<'de> for UnaryRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            pattern: Category,
            result: Category,
        }
        let raw = Raw::deserialize(d)?;
        let label = format!("{}->{}", raw.pattern, raw.result);
        Ok(UnaryRule {
            pattern: raw.pattern,
            result: raw.result,
            label,
        })
    }
}

impl UnaryRule {
    pub fn new(pattern: &str, result: &str) -> Self {
        let pattern = parse_category(pattern).expect("unary rule pattern");
        let result = parse_category(result).expect("unary rule result");
        let label = format!("{pattern}->{result}");
        UnaryRule {
            pattern,
            result,
            label,
        }
    }
}

/// The enabled combinator inventory and head policy. Fields omitted in a
/// config file keep their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    #[serde(default = "yes")]
    pub forward_application: bool,
    #[serde(default = "yes")]
    pub backward_application: bool,
    #[serde(default = "yes")]
    pub forward_composition: bool,
    #[serde(default = "yes")]
    pub backward_composition: bool,
    /// Second-order (harmonic) composition; off by default.
    #[serde(default)]
    pub second_order_composition: bool,
    #[serde(default = "yes")]
    pub conjunction: bool,
    #[serde(default = "default_unary")]
    pub unary: Vec<UnaryRule>,
    #[serde(default = "default_application_head")]
    pub application_head: HeadRule,
    #[serde(default = "default_composition_head")]
    pub composition_head: HeadRule,
    #[serde(default = "default_conjunction_head")]
    pub conjunction_head: HeadRule,
}

fn yes() -> bool {
    true
}

fn default_unary() -> Vec<UnaryRule> {
    vec![UnaryRule::new("N", "NP")]
}

fn default_application_head() -> HeadRule {
    HeadRule::FunctorUnlessModifier
}

fn default_composition_head() -> HeadRule {
    HeadRule::Functor
}

fn default_conjunction_head() -> HeadRule {
    HeadRule::Right
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            forward_application: true,
            backward_application: true,
            forward_composition: true,
            backward_composition: true,
            second_order_composition: false,
            conjunction: true,
            unary: vec![UnaryRule::new("N", "NP")],
            application_head: HeadRule::FunctorUnlessModifier,
            composition_head: HeadRule::Functor,
            conjunction_head: HeadRule::Right,
        }
    }
}

fn head_for(rule: HeadRule, functor_side: HeadSide, functor: &Category) -> HeadSide {
    match rule {
        HeadRule::Left => HeadSide::Left,
        HeadRule::Right => HeadSide::Right,
        HeadRule::Functor => functor_side,
        HeadRule::FunctorUnlessModifier => {
            if functor.is_modifier() {
                match functor_side {
                    HeadSide::Left => HeadSide::Right,
                    HeadSide::Right => HeadSide::Left,
                }
            } else {
                functor_side
            }
        }
    }
}

/// Returns every combination of `left` and `right` licensed by the enabled
/// combinators, in a fixed order. Empty when nothing applies.
pub fn combine(
    left: &Category,
    right: &Category,
    rules: &RuleSet,
) -> Vec<(Category, Combinator, HeadSide)> {
    let mut out = Vec::new();

    // X/Y Y => X
    if rules.forward_application {
        if let Category::Functor {
            result,
            slash: Slash::Forward,
            argument,
        } = left
        {
            let mut binding = Binding::default();
            if unify(argument, right, &mut binding) {
                let bound = match &binding {
                    Binding::Bound(f) => f.clone(),
                    Binding::Unbound => Some(Feature::Variable),
                };
                out.push((
                    result.substitute(&bound),
                    Combinator::ForwardApplication,
                    head_for(rules.application_head, HeadSide::Left, left),
                ));
            }
        }
    }

    // Y X\Y => X
    if rules.backward_application {
        if let Category::Functor {
            result,
            slash: Slash::Backward,
            argument,
        } = right
        {
            let mut binding = Binding::default();
            if unify(argument, left, &mut binding) {
                let bound = match &binding {
                    Binding::Bound(f) => f.clone(),
                    Binding::Unbound => Some(Feature::Variable),
                };
                out.push((
                    result.substitute(&bound),
                    Combinator::BackwardApplication,
                    head_for(rules.application_head, HeadSide::Right, right),
                ));
            }
        }
    }

    // X/Y Y/Z => X/Z
    if rules.forward_composition {
        if let (
            Category::Functor {
                result: x,
                slash: Slash::Forward,
                argument: y1,
            },
            Category::Functor {
                result: y2,
                slash: Slash::Forward,
                argument: z,
            },
        ) = (left, right)
        {
            let mut binding = Binding::default();
            if unify(y1, y2, &mut binding) {
                let bound = match &binding {
                    Binding::Bound(f) => f.clone(),
                    Binding::Unbound => Some(Feature::Variable),
                };
                out.push((
                    Category::forward(x.substitute(&bound), z.substitute(&bound)),
                    Combinator::ForwardComposition,
                    head_for(rules.composition_head, HeadSide::Left, left),
                ));
            }
        }
    }

    // Y\Z X\Y => X\Z
    if rules.backward_composition {
        if let (
            Category::Functor {
                result: y1,
                slash: Slash::Backward,
                argument: z,
            },
            Category::Functor {
                result: x,
                slash: Slash::Backward,
                argument: y2,
            },
        ) = (left, right)
        {
            let mut binding = Binding::default();
            if unify(y2, y1, &mut binding) {
                let bound = match &binding {
                    Binding::Bound(f) => f.clone(),
                    Binding::Unbound => Some(Feature::Variable),
                };
                out.push((
                    Category::backward(x.substitute(&bound), z.substitute(&bound)),
                    Combinator::BackwardComposition,
                    head_for(rules.composition_head, HeadSide::Right, right),
                ));
            }
        }
    }

    if rules.second_order_composition {
        // X/Y (Y/Z)/W => (X/Z)/W
        if let (
            Category::Functor {
                result: x,
                slash: Slash::Forward,
                argument: y1,
            },
            Category::Functor {
                result: inner,
                slash: Slash::Forward,
                argument: w,
            },
        ) = (left, right)
        {
            if let Category::Functor {
                result: y2,
                slash: Slash::Forward,
                argument: z,
            } = inner.as_ref()
            {
                let mut binding = Binding::default();
                if unify(y1, y2, &mut binding) {
                    let bound = match &binding {
                        Binding::Bound(f) => f.clone(),
                        Binding::Unbound => Some(Feature::Variable),
                    };
                    out.push((
                        Category::forward(
                            Category::forward(x.substitute(&bound), z.substitute(&bound)),
                            w.substitute(&bound),
                        ),
                        Combinator::ForwardComposition2,
                        head_for(rules.composition_head, HeadSide::Left, left),
                    ));
                }
            }
        }
        // (Y\Z)\W X\Y => (X\Z)\W
        if let (
            Category::Functor {
                result: inner,
                slash: Slash::Backward,
                argument: w,
            },
            Category::Functor {
                result: x,
                slash: Slash::Backward,
                argument: y2,
            },
        ) = (left, right)
        {
            if let Category::Functor {
                result: y1,
                slash: Slash::Backward,
                argument: z,
            } = inner.as_ref()
            {
                let mut binding = Binding::default();
                if unify(y2, y1, &mut binding) {
                    let bound = match &binding {
                        Binding::Bound(f) => f.clone(),
                        Binding::Unbound => Some(Feature::Variable),
                    };
                    out.push((
                        Category::backward(
                            Category::backward(x.substitute(&bound), z.substitute(&bound)),
                            w.substitute(&bound),
                        ),
                        Combinator::BackwardComposition2,
                        head_for(rules.composition_head, HeadSide::Right, right),
                    ));
                }
            }
        }
    }

    // conj X => X\X
    if rules.conjunction {
        if let Category::Atomic { base, feature: None } = left {
            if base == "conj" {
                out.push((
                    Category::backward(right.clone(), right.clone()),
                    Combinator::Conjunction,
                    head_for(rules.conjunction_head, HeadSide::Right, right),
                ));
            }
        }
    }

    out
}

/// Applies every enabled unary rewrite matching `c`, in table order.
pub fn apply_unary(c: &Category, rules: &RuleSet) -> Vec<(Category, String)> {
    let mut out = Vec::new();
    for rule in &rules.unary {
        let mut binding = Binding::default();
        if unify(&rule.pattern, c, &mut binding) {
            let bound = match &binding {
                Binding::Bound(f) => f.clone(),
                Binding::Unbound => Some(Feature::Variable),
            };
            out.push((rule.result.substitute(&bound), rule.label.clone()));
        }
    }
    out
}
