//! Many-sorted syntax: signatures, variables, terms, k-formulas, sequents,
//! substitutions and one-sided matching.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Interned-ish identifier. Cloning is a reference-count bump.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SortError {
    #[error("unknown sort `{0}`")]
    UnknownSort(Name),
    #[error("unknown operation `{0}`")]
    UnknownOp(Name),
    #[error("operation `{op}` expects {expected} arguments, got {actual} in `{term}`")]
    Arity {
        op: Name,
        expected: usize,
        actual: usize,
        term: String,
    },
    #[error("in `{term}`: expected sort `{expected}`, found `{actual}`")]
    Mismatch {
        term: String,
        expected: Name,
        actual: Name,
    },
    #[error("formula components disagree on sort: `{0}`")]
    MixedFormula(String),
    #[error("formula `{formula}` has dimension {actual}, expected {expected}")]
    Dimension {
        formula: String,
        expected: usize,
        actual: usize,
    },
    #[error("empty formula")]
    EmptyFormula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula `{0}` contains frozen variable `{1}`")]
pub struct FrozenVariableError(pub String, pub Name);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("operation `{op}` mentions undeclared sort `{sort}`")]
    UndeclaredSort { op: Name, sort: Name },
    #[error("operation `{0}` declared twice")]
    DuplicateOp(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpProfile {
    pub args: Vec<Name>,
    pub result: Name,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub sorts: BTreeSet<Name>,
    pub ops: BTreeMap<Name, OpProfile>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, s: &str) -> &mut Self {
        self.sorts.insert(name(s));
        self
    }

    pub fn add_op(&mut self, op: &str, args: &[&str], result: &str) -> Result<&mut Self, SignatureError> {
        let op_name = name(op);
        if self.ops.contains_key(&op_name) {
            return Err(SignatureError::DuplicateOp(op_name));
        }
        for s in args.iter().chain(std::iter::once(&result)) {
            if !self.sorts.contains(*s) {
                return Err(SignatureError::UndeclaredSort { op: op_name, sort: name(s) });
            }
        }
        self.ops.insert(
            op_name,
            OpProfile { args: args.iter().map(|s| name(s)).collect(), result: name(result) },
        );
        Ok(self)
    }

    /// Builder shorthand for fixtures and tests; panics on malformed input.
    pub fn with_op(mut self, op: &str, args: &[&str], result: &str) -> Self {
        self.add_op(op, args, result).expect("well-formed operation");
        self
    }

    pub fn with_sort(mut self, s: &str) -> Self {
        self.add_sort(s);
        self
    }

    pub fn op(&self, op: &str) -> Option<&OpProfile> {
        self.ops.get(op)
    }

    /// Merge another signature in. Shared operation names must agree on profile.
    pub fn union(&mut self, other: &Signature) -> Result<(), SignatureError> {
        self.sorts.extend(other.sorts.iter().cloned());
        for (op, prof) in &other.ops {
            match self.ops.get(op) {
                Some(p) if p != prof => return Err(SignatureError::DuplicateOp(op.clone())),
                Some(_) => {}
                None => {
                    self.ops.insert(op.clone(), prof.clone());
                }
            }
        }
        Ok(())
    }

    /// True when every sort and operation of `self` occurs identically in `other`.
    pub fn is_subsignature_of(&self, other: &Signature) -> bool {
        self.sorts.is_subset(&other.sorts)
            && self.ops.iter().all(|(op, p)| other.ops.get(op) == Some(p))
    }

    pub fn constants_of<'a>(&'a self, sort: &'a str) -> impl Iterator<Item = &'a Name> + 'a {
        self.ops
            .iter()
            .filter(move |(_, p)| p.args.is_empty() && &*p.result == sort)
            .map(|(n, _)| n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Variable {
    pub name: Name,
    pub sort: Name,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub frozen: bool,
}

impl Variable {
    pub fn new(n: &str, sort: &str) -> Self {
        Variable { name: name(n), sort: name(sort), frozen: false }
    }

    pub fn frozen(&self) -> Self {
        Variable { frozen: true, ..self.clone() }
    }

    pub fn thawed(&self) -> Self {
        Variable { frozen: false, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(Variable),
    App(Name, Arc<[Term]>),
}

impl Term {
    pub fn var(n: &str, sort: &str) -> Term {
        Term::Var(Variable::new(n, sort))
    }

    pub fn app(op: &str, args: Vec<Term>) -> Term {
        Term::App(name(op), args.into())
    }

    pub fn constant(op: &str) -> Term {
        Term::App(name(op), Arc::from(Vec::new()))
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    pub fn head(&self) -> Option<&Name> {
        match self {
            Term::Var(_) => None,
            Term::App(op, _) => Some(op),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Height; variables and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| a.depth() + 1).max().unwrap_or(0),
        }
    }

    /// Sort of a term assumed well-sorted over `sig`.
    pub fn sort_in(&self, sig: &Signature) -> Option<Name> {
        match self {
            Term::Var(v) => Some(v.sort.clone()),
            Term::App(op, _) => sig.op(op).map(|p| p.result.clone()),
        }
    }

    pub fn has_frozen(&self) -> bool {
        match self {
            Term::Var(v) => v.frozen,
            Term::App(_, args) => args.iter().any(Term::has_frozen),
        }
    }

    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a Variable)) {
        match self {
            Term::Var(v) => f(v),
            Term::App(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    pub fn subterms_into(&self, out: &mut BTreeSet<Term>) {
        if out.insert(self.clone()) {
            if let Term::App(_, args) = self {
                args.iter().for_each(|a| a.subterms_into(out));
            }
        }
    }

    /// Rebuild the term with every variable replaced by `f(v)`.
    pub fn map_vars(&self, f: &mut impl FnMut(&Variable) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::App(op, args) => {
                Term::App(op.clone(), args.iter().map(|a| a.map_vars(f)).collect::<Vec<_>>().into())
            }
        }
    }
}

fn is_symbolic(op: &str) -> bool {
    op.chars().next().is_some_and(|c| !(c.is_alphanumeric() || c == '_'))
}

/// Display mode for terms: plain, or with every variable annotated by its sort.
#[derive(Clone, Copy, PartialEq, Eq)]
enum VarStyle {
    Plain,
    Sorted,
}

fn write_term(t: &Term, f: &mut fmt::Formatter<'_>, style: VarStyle, nested: bool) -> fmt::Result {
    match t {
        Term::Var(v) => match style {
            VarStyle::Plain => write!(f, "{}", v.name),
            VarStyle::Sorted => write!(f, "{}:{}", v.name, v.sort),
        },
        Term::App(op, args) if args.is_empty() => write!(f, "{op}"),
        Term::App(op, args) if is_symbolic(op) && args.len() == 1 => {
            write!(f, "{op}")?;
            write_term(&args[0], f, style, true)
        }
        Term::App(op, args) if is_symbolic(op) && args.len() == 2 => {
            if nested {
                write!(f, "(")?;
            }
            write_term(&args[0], f, style, true)?;
            write!(f, " {op} ")?;
            write_term(&args[1], f, style, true)?;
            if nested {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::App(op, args) => {
            write!(f, "{op}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(a, f, style, false)?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f, VarStyle::Plain, false)
    }
}

/// Wrapper printing a term with sort-annotated variables (`x:nat`).
pub struct Annotated<'a, T>(pub &'a T);

impl fmt::Display for Annotated<'_, Term> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self.0, f, VarStyle::Sorted, false)
    }
}

impl fmt::Display for Annotated<'_, KFormula> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self.0, f, VarStyle::Sorted)
    }
}

impl fmt::Display for Annotated<'_, Sequent> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sequent(self.0, f, VarStyle::Sorted)
    }
}

/// A k-tuple of terms of one sort.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KFormula {
    pub sort: Name,
    pub components: Vec<Term>,
}

impl KFormula {
    /// Build a formula over `sig`, inferring and checking the common sort.
    pub fn new(sig: &Signature, components: Vec<Term>) -> Result<Self, SortError> {
        let first = components.first().ok_or(SortError::EmptyFormula)?;
        let sort = check_well_sorted(sig, first)?;
        for c in &components[1..] {
            let s = check_well_sorted(sig, c)?;
            if s != sort {
                return Err(SortError::Mismatch { term: c.to_string(), expected: sort, actual: s });
            }
        }
        Ok(KFormula { sort, components })
    }

    /// Unchecked constructor; the caller vouches for well-sortedness.
    pub fn raw(sort: Name, components: Vec<Term>) -> Self {
        KFormula { sort, components }
    }

    pub fn eq(sig: &Signature, l: Term, r: Term) -> Result<Self, SortError> {
        Self::new(sig, vec![l, r])
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn has_frozen(&self) -> bool {
        self.components.iter().any(Term::has_frozen)
    }

    pub fn size(&self) -> usize {
        self.components.iter().map(Term::size).sum()
    }

    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> KFormula {
        KFormula { sort: self.sort.clone(), components: self.components.iter().map(&mut f).collect() }
    }

    pub fn check(&self, sig: &Signature, k: usize) -> Result<(), SortError> {
        if self.dim() != k {
            return Err(SortError::Dimension { formula: self.to_string(), expected: k, actual: self.dim() });
        }
        for c in &self.components {
            let s = check_well_sorted(sig, c)?;
            if s != self.sort {
                return Err(SortError::Mismatch { term: c.to_string(), expected: self.sort.clone(), actual: s });
            }
        }
        Ok(())
    }
}

fn write_formula(phi: &KFormula, f: &mut fmt::Formatter<'_>, style: VarStyle) -> fmt::Result {
    write!(f, "<")?;
    for (i, c) in phi.components.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_term(c, f, style, false)?;
    }
    write!(f, ">")
}

impl fmt::Display for KFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f, VarStyle::Plain)
    }
}

/// An inference rule or conditional statement `premises |- conclusion`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sequent {
    pub premises: BTreeSet<KFormula>,
    pub conclusion: KFormula,
}

impl Sequent {
    pub fn new(premises: impl IntoIterator<Item = KFormula>, conclusion: KFormula) -> Self {
        Sequent { premises: premises.into_iter().collect(), conclusion }
    }

    pub fn axiom(conclusion: KFormula) -> Self {
        Sequent { premises: BTreeSet::new(), conclusion }
    }

    pub fn formulas(&self) -> impl Iterator<Item = &KFormula> {
        self.premises.iter().chain(std::iter::once(&self.conclusion))
    }

    pub fn check(&self, sig: &Signature, k: usize) -> Result<(), SortError> {
        self.formulas().try_for_each(|f| f.check(sig, k))
    }
}

fn write_sequent(s: &Sequent, f: &mut fmt::Formatter<'_>, style: VarStyle) -> fmt::Result {
    for (i, p) in s.premises.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write_formula(p, f, style)?;
    }
    if !s.premises.is_empty() {
        write!(f, " ")?;
    }
    write!(f, "|- ")?;
    write_formula(&s.conclusion, f, style)
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sequent(self, f, VarStyle::Plain)
    }
}

/// Check term formation and return the term's sort.
pub fn check_well_sorted(sig: &Signature, t: &Term) -> Result<Name, SortError> {
    match t {
        Term::Var(v) => {
            if sig.sorts.contains(&v.sort) {
                Ok(v.sort.clone())
            } else {
                Err(SortError::UnknownSort(v.sort.clone()))
            }
        }
        Term::App(op, args) => {
            let prof = sig.op(op).ok_or_else(|| SortError::UnknownOp(op.clone()))?;
            if prof.args.len() != args.len() {
                return Err(SortError::Arity {
                    op: op.clone(),
                    expected: prof.args.len(),
                    actual: args.len(),
                    term: t.to_string(),
                });
            }
            for (a, want) in args.iter().zip(&prof.args) {
                let got = check_well_sorted(sig, a)?;
                if &got != want {
                    return Err(SortError::Mismatch { term: a.to_string(), expected: want.clone(), actual: got });
                }
            }
            Ok(prof.result.clone())
        }
    }
}

/// Sort-respecting finite map from variables to terms; identity elsewhere.
/// Serialized as a list of pairs, since JSON keys must be strings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Substitution(#[serde(with = "pairs")] pub BTreeMap<Variable, Term>);

pub(crate) mod pairs {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<K: Serialize, V: Serialize, S: Serializer>(m: &BTreeMap<K, V>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, K, V, D>(d: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        Ok(Vec::<(K, V)>::deserialize(d)?.into_iter().collect())
    }
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Variable, Term)>) -> Self {
        Substitution(pairs.into_iter().collect())
    }

    pub fn get(&self, v: &Variable) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn insert(&mut self, v: Variable, t: Term) {
        self.0.insert(v, t);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    /// `self ; then`: first apply `self`, then `then`.
    pub fn then(&self, then: &Substitution) -> Substitution {
        let mut out: BTreeMap<Variable, Term> =
            self.0.iter().map(|(v, t)| (v.clone(), apply_term(then, t))).collect();
        for (v, t) in &then.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }

    /// Sort-respect check; also rejects bindings of frozen variables.
    pub fn check(&self, sig: &Signature) -> Result<(), SortError> {
        for (v, t) in &self.0 {
            let s = check_well_sorted(sig, t)?;
            if s != v.sort {
                return Err(SortError::Mismatch { term: t.to_string(), expected: v.sort.clone(), actual: s });
            }
        }
        Ok(())
    }

    pub fn binds_frozen(&self) -> bool {
        self.0.keys().any(|v| v.frozen)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} |-> {}", v.name, t)?;
        }
        write!(f, "}}")
    }
}

pub fn apply_term(theta: &Substitution, t: &Term) -> Term {
    if theta.is_empty() {
        return t.clone();
    }
    match t {
        Term::Var(v) => theta.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(op, args) => {
            Term::App(op.clone(), args.iter().map(|a| apply_term(theta, a)).collect::<Vec<_>>().into())
        }
    }
}

/// Things a substitution can act on.
pub trait Substitutable: Sized {
    fn apply(&self, theta: &Substitution) -> Self;
}

impl Substitutable for Term {
    fn apply(&self, theta: &Substitution) -> Self {
        apply_term(theta, self)
    }
}

impl Substitutable for KFormula {
    fn apply(&self, theta: &Substitution) -> Self {
        self.map_terms(|t| apply_term(theta, t))
    }
}

impl Substitutable for Sequent {
    fn apply(&self, theta: &Substitution) -> Self {
        Sequent {
            premises: self.premises.iter().map(|p| p.apply(theta)).collect(),
            conclusion: self.conclusion.apply(theta),
        }
    }
}

pub fn apply_substitution<T: Substitutable>(theta: &Substitution, x: &T) -> T {
    x.apply(theta)
}

/// Extend `theta` so that `theta(pattern) = subject`. Subject variables are
/// treated as constants. Returns false (leaving `theta` possibly extended) on failure.
pub fn match_term_into(pattern: &Term, subject: &Term, theta: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => {
            if v.frozen {
                return pattern == subject;
            }
            if &v.sort != term_sort_hint(subject, &v.sort) {
                return false;
            }
            match theta.get(v) {
                Some(bound) => bound == subject,
                None => {
                    theta.insert(v.clone(), subject.clone());
                    true
                }
            }
        }
        Term::App(op, args) => match subject {
            Term::App(sop, sargs) if sop == op && sargs.len() == args.len() => {
                args.iter().zip(sargs.iter()).all(|(p, s)| match_term_into(p, s, theta))
            }
            _ => false,
        },
    }
}

// Matching happens between well-sorted terms over one signature; a variable
// subject carries its sort, an application is trusted to have the pattern's sort.
fn term_sort_hint<'a>(subject: &'a Term, expected: &'a Name) -> &'a Name {
    match subject {
        Term::Var(v) => &v.sort,
        Term::App(..) => expected,
    }
}

pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut theta = Substitution::new();
    match_term_into(pattern, subject, &mut theta).then_some(theta)
}

pub fn match_formula_into(pattern: &KFormula, subject: &KFormula, theta: &mut Substitution) -> bool {
    pattern.sort == subject.sort
        && pattern.dim() == subject.dim()
        && pattern.components.iter().zip(&subject.components).all(|(p, s)| match_term_into(p, s, theta))
}

pub fn match_formula(pattern: &KFormula, subject: &KFormula) -> Option<Substitution> {
    let mut theta = Substitution::new();
    match_formula_into(pattern, subject, &mut theta).then_some(theta)
}

/// Things whose variables can be collected.
pub trait HasVars {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>);
}

impl HasVars for Term {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
    }
}

impl HasVars for KFormula {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        self.components.iter().for_each(|c| c.collect_vars(out));
    }
}

impl HasVars for Sequent {
    fn collect_vars(&self, out: &mut BTreeSet<Variable>) {
        self.formulas().for_each(|f| f.collect_vars(out));
    }
}

pub fn free_variables<T: HasVars + ?Sized>(x: &T) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    x.collect_vars(&mut out);
    out
}

/// Variables in first-occurrence order (left to right, depth first).
pub fn vars_in_order(phi: &KFormula) -> Vec<Variable> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for c in &phi.components {
        c.visit_vars(&mut |v| {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        });
    }
    out
}

/// Rename variables to `v0, v1, …` per sort in first-occurrence order.
pub fn canonicalize(phi: &KFormula) -> Result<KFormula, FrozenVariableError> {
    let order = vars_in_order(phi);
    if let Some(v) = order.iter().find(|v| v.frozen) {
        return Err(FrozenVariableError(phi.to_string(), v.name.clone()));
    }
    Ok(phi.apply(&canonical_renaming(&order, "v")))
}

/// Injective renaming of `order` into `{prefix}0, {prefix}1, …`, counted per sort.
pub fn canonical_renaming(order: &[Variable], prefix: &str) -> Substitution {
    let mut counters: BTreeMap<Name, usize> = BTreeMap::new();
    let mut theta = Substitution::new();
    for v in order {
        let n = counters.entry(v.sort.clone()).or_default();
        theta.insert(v.clone(), Term::Var(Variable::new(&format!("{prefix}{n}"), &v.sort)));
        *n += 1;
    }
    theta
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn nat_sig() -> Signature {
        Signature::new()
            .with_sort("nat")
            .with_op("z", &[], "nat")
            .with_op("s", &["nat"], "nat")
            .with_op("+", &["nat", "nat"], "nat")
    }

    pub fn meet_sig() -> Signature {
        Signature::new().with_sort("s").with_op("/\\", &["s", "s"], "s")
    }

    pub fn x(n: &str) -> Term {
        Term::var(n, "nat")
    }

    pub fn p(n: &str) -> Term {
        Term::var(n, "s")
    }

    pub fn meet(a: Term, b: Term) -> Term {
        Term::app("/\\", vec![a, b])
    }

    fn plus(a: Term, b: Term) -> Term {
        Term::app("+", vec![a, b])
    }

    fn succ(a: Term) -> Term {
        Term::app("s", vec![a])
    }

    #[test]
    fn well_sorted_unary_application() {
        let sig = Signature::new().with_sort("s").with_op("f", &["s"], "s");
        let t = Term::app("f", vec![Term::var("x", "s")]);
        assert_eq!(&*check_well_sorted(&sig, &t).unwrap(), "s");
    }

    #[test]
    fn well_sorted_nat_term() {
        let t = plus(succ(x("x")), Term::constant("z"));
        assert_eq!(&*check_well_sorted(&nat_sig(), &t).unwrap(), "nat");
    }

    #[test]
    fn ill_sorted_foreign_constant() {
        let t = succ(Term::constant("tt"));
        assert!(matches!(check_well_sorted(&nat_sig(), &t), Err(SortError::UnknownOp(op)) if &*op == "tt"));
    }

    #[test]
    fn sort_mismatch_names_subterm() {
        let sig = nat_sig().with_sort("bool").with_op("tt", &[], "bool");
        let err = check_well_sorted(&sig, &succ(Term::constant("tt"))).unwrap_err();
        assert_eq!(
            err,
            SortError::Mismatch { term: "tt".into(), expected: name("nat"), actual: name("bool") }
        );
    }

    #[test]
    fn empty_substitution_is_identity() {
        let t = plus(succ(x("x")), x("y"));
        assert_eq!(apply_substitution(&Substitution::new(), &t), t);
    }

    #[test]
    fn substitution_replaces_simultaneously() {
        let theta = Substitution::from_pairs([
            (Variable::new("x", "nat"), Term::constant("z")),
            (Variable::new("y", "nat"), succ(Term::constant("z"))),
        ]);
        let got = apply_substitution(&theta, &plus(x("x"), x("y")));
        assert_eq!(got, plus(Term::constant("z"), succ(Term::constant("z"))));
    }

    #[test]
    fn substitution_on_semilattice_axiom() {
        let sig = meet_sig();
        let phi = KFormula::new(&sig, vec![p("p"), meet(p("p"), p("p"))]).unwrap();
        let qq = meet(p("q"), p("q"));
        let theta = Substitution::from_pairs([(Variable::new("p", "s"), qq.clone())]);
        let got = apply_substitution(&theta, &phi);
        assert_eq!(got.components, vec![qq.clone(), meet(qq.clone(), qq)]);
    }

    #[test]
    fn matching_binds_pattern_variables() {
        let theta = match_term(&plus(x("x"), x("y")), &plus(succ(x("z")), x("z"))).unwrap();
        assert_eq!(theta.get(&Variable::new("x", "nat")), Some(&succ(x("z"))));
        assert_eq!(theta.get(&Variable::new("y", "nat")), Some(&x("z")));
        assert_eq!(theta.len(), 2);
    }

    #[test]
    fn matching_semilattice_projection() {
        let sig = meet_sig();
        let pat = KFormula::new(&sig, vec![meet(p("p"), p("q")), p("p")]).unwrap();
        let subj = KFormula::new(&sig, vec![meet(p("p"), p("p")), p("p")]).unwrap();
        let theta = match_formula(&pat, &subj).unwrap();
        assert_eq!(theta.get(&Variable::new("q", "s")), Some(&p("p")));
        assert_eq!(theta.get(&Variable::new("p", "s")), Some(&p("p")));
        assert_eq!(pat.apply(&theta), subj);
    }

    #[test]
    fn matching_head_mismatch() {
        let f = Term::app("f", vec![Term::var("x", "s")]);
        let g = Term::app("g", vec![Term::constant("a")]);
        assert_eq!(match_term(&f, &g), None);
    }

    #[test]
    fn frozen_pattern_variable_is_rigid() {
        let fx = Variable::new("x", "nat").frozen();
        assert_eq!(match_term(&Term::Var(fx.clone()), &x("y")), None);
        assert!(match_term(&Term::Var(fx.clone()), &Term::Var(fx)).is_some());
    }

    #[test]
    fn free_variables_examples() {
        assert!(free_variables(&Term::constant("z")).is_empty());
        let sig = Signature::new()
            .with_sort("Sys")
            .with_sort("Ac")
            .with_sort("Int")
            .with_op("deposit", &["Sys", "Ac", "Int"], "Sys")
            .with_op("bal", &["Sys", "Ac"], "Int")
            .with_op("+", &["Int", "Int"], "Int");
        let (s, i, n) = (Term::var("s", "Sys"), Term::var("i", "Ac"), Term::var("n", "Int"));
        let lhs = Term::app("bal", vec![Term::app("deposit", vec![s.clone(), i.clone(), n.clone()]), i.clone()]);
        let rhs = Term::app("+", vec![Term::app("bal", vec![s, i]), n]);
        let phi = KFormula::eq(&sig, lhs, rhs).unwrap();
        let names: Vec<_> = free_variables(&phi).into_iter().map(|v| v.name.to_string()).collect();
        assert_eq!(names, vec!["i", "n", "s"]);
        assert_eq!(free_variables(&plus(x("x"), x("x"))).len(), 1);
    }

    #[test]
    fn canonical_forms() {
        let sig = meet_sig();
        let yy = KFormula::new(&sig, vec![p("y"), p("y")]).unwrap();
        assert_eq!(canonicalize(&yy).unwrap().to_string(), "<v0, v0>");
        let qp = KFormula::new(&sig, vec![meet(p("q"), p("p")), p("p")]).unwrap();
        assert_eq!(canonicalize(&qp).unwrap().to_string(), "<v0 /\\ v1, v1>");
    }

    #[test]
    fn canonicalize_rejects_frozen() {
        let sig = meet_sig();
        let phi = KFormula::new(&sig, vec![Term::Var(Variable::new("p", "s").frozen()), p("q")]).unwrap();
        assert!(canonicalize(&phi).is_err());
    }

    #[test]
    fn display_parenthesizes_nested_infix() {
        let t = meet(p("p"), meet(p("q"), p("r")));
        assert_eq!(t.to_string(), "p /\\ (q /\\ r)");
        let neg = Term::app("!", vec![Term::app("!", vec![meet(p("p"), p("q"))])]);
        assert_eq!(neg.to_string(), "!!(p /\\ q)");
    }
}
