//! Hilbert-style presentations of k-dimensional deductive systems, bounded
//! forward-saturation proof search and proof checking.

mod proof;
mod search;

pub use proof::{check_proof, Justification, Proof, ProofRejection, Step, Violation};
pub use search::{bounded_consequences, derive, directly_derivable};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::FiniteKStructure;
use crate::sigterm::{name, KFormula, Name, Sequent, Signature, SortError, Term, Variable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeductionError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("dimension mismatch: expected {expected}, found {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("inference rule `{0}` has no premises")]
    EmptyRule(String),
    #[error("invalid budget: {0}")]
    Budget(String),
}

/// Whether an item was generated as equality machinery (reflexivity,
/// symmetry, transitivity, congruence) or written by the author.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Proper,
    Equality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    pub formula: KFormula,
    /// Short identifier, e.g. `refl[s]` or `ax2`.
    pub name: Name,
    /// Declaring block, e.g. `DISTLATTICE` for spliced items.
    pub origin: Name,
    pub kind: ItemKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub sequent: Sequent,
    pub name: Name,
    pub origin: Name,
    pub kind: ItemKind,
}

impl Rule {
    pub fn premises(&self) -> impl Iterator<Item = &KFormula> {
        self.sequent.premises.iter()
    }
}

/// A finitely presented k-deductive system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub name: Name,
    pub signature: Signature,
    pub dim: usize,
    pub axioms: Vec<Axiom>,
    pub rules: Vec<Rule>,
    /// Built from (conditional) equations over the equality base.
    pub horn: bool,
}

impl Presentation {
    pub fn empty(pname: &str, signature: Signature, dim: usize) -> Self {
        Presentation { name: name(pname), signature, dim, axioms: Vec::new(), rules: Vec::new(), horn: false }
    }

    pub fn named(mut self, pname: &str) -> Self {
        self.name = name(pname);
        self
    }

    /// Add an axiom; duplicates of an existing axiom formula are ignored.
    pub fn push_axiom(&mut self, formula: KFormula, item: &str, origin: &str, kind: ItemKind) -> Result<(), DeductionError> {
        self.check_formula(&formula)?;
        if !self.axioms.iter().any(|a| a.formula == formula) {
            self.axioms.push(Axiom { formula, name: name(item), origin: name(origin), kind });
        }
        Ok(())
    }

    /// Add a rule; a premise-free sequent becomes an axiom.
    pub fn push_rule(&mut self, sequent: Sequent, item: &str, origin: &str, kind: ItemKind) -> Result<(), DeductionError> {
        if sequent.premises.is_empty() {
            return self.push_axiom(sequent.conclusion, item, origin, kind);
        }
        sequent.formulas().try_for_each(|f| self.check_formula(f))?;
        if !self.rules.iter().any(|r| r.sequent == sequent) {
            self.rules.push(Rule { sequent, name: name(item), origin: name(origin), kind });
        }
        Ok(())
    }

    pub fn check_formula(&self, f: &KFormula) -> Result<(), DeductionError> {
        if f.dim() != self.dim {
            return Err(DeductionError::Dimension { expected: self.dim, actual: f.dim() });
        }
        f.check(&self.signature, self.dim)?;
        Ok(())
    }

    /// Proper (author-written) axioms and rules; for Horn presentations this
    /// is the sentence set the presentation was built from.
    pub fn proper_axioms(&self) -> impl Iterator<Item = &Axiom> {
        self.axioms.iter().filter(|a| a.kind == ItemKind::Proper)
    }

    pub fn proper_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.kind == ItemKind::Proper)
    }

    /// Number of proper sentences declared by block `origin`.
    pub fn count_from(&self, origin: &str) -> usize {
        self.proper_axioms().filter(|a| &*a.origin == origin).count()
            + self.proper_rules().filter(|r| &*r.origin == origin).count()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (dim {}, {} axioms, {} rules)", self.name, self.dim, self.axioms.len(), self.rules.len())?;
        for a in &self.axioms {
            writeln!(f, "  {}: {}", a.name, a.formula)?;
        }
        for r in &self.rules {
            writeln!(f, "  {}: {}", r.name, r.sequent)?;
        }
        Ok(())
    }
}

fn eq2(sort: &Name, l: Term, r: Term) -> KFormula {
    KFormula::raw(sort.clone(), vec![l, r])
}

/// The free 2-dimensional system over `sig`: reflexivity per sort, symmetry
/// and transitivity per sort, congruence per non-constant operation.
pub fn free_equational_presentation(sig: &Signature) -> Presentation {
    let mut p = Presentation::empty("EQ", sig.clone(), 2);
    let origin = "EQ";
    for s in &sig.sorts {
        let x = Term::Var(Variable::new("x", s));
        p.axioms.push(Axiom {
            formula: eq2(s, x.clone(), x),
            name: name(&format!("refl[{s}]")),
            origin: name(origin),
            kind: ItemKind::Equality,
        });
    }
    for s in &sig.sorts {
        let v = |n: &str| Term::Var(Variable::new(n, s));
        p.rules.push(Rule {
            sequent: Sequent::new([eq2(s, v("x"), v("y"))], eq2(s, v("y"), v("x"))),
            name: name(&format!("sym[{s}]")),
            origin: name(origin),
            kind: ItemKind::Equality,
        });
        p.rules.push(Rule {
            sequent: Sequent::new([eq2(s, v("x"), v("y")), eq2(s, v("y"), v("z"))], eq2(s, v("x"), v("z"))),
            name: name(&format!("trans[{s}]")),
            origin: name(origin),
            kind: ItemKind::Equality,
        });
    }
    for (op, prof) in &sig.ops {
        if prof.args.is_empty() {
            continue;
        }
        let xs: Vec<Term> = prof.args.iter().enumerate().map(|(i, s)| Term::Var(Variable::new(&format!("x{i}"), s))).collect();
        let ys: Vec<Term> = prof.args.iter().enumerate().map(|(i, s)| Term::Var(Variable::new(&format!("y{i}"), s))).collect();
        let premises = prof.args.iter().zip(xs.iter().zip(&ys)).map(|(s, (x, y))| eq2(s, x.clone(), y.clone()));
        let conclusion = eq2(&prof.result, Term::App(op.clone(), xs.clone().into()), Term::App(op.clone(), ys.clone().into()));
        p.rules.push(Rule {
            sequent: Sequent::new(premises, conclusion),
            name: name(&format!("cong[{op}]")),
            origin: name(origin),
            kind: ItemKind::Equality,
        });
    }
    p
}

/// Horn presentation: the equality base plus `eqs` as axioms and `ceqs` as rules.
pub fn horn_presentation(sig: &Signature, eqs: &[KFormula], ceqs: &[Sequent]) -> Result<Presentation, DeductionError> {
    let mut p = free_equational_presentation(sig).named("HORN");
    p.horn = true;
    for (i, e) in eqs.iter().enumerate() {
        p.push_axiom(e.clone(), &format!("eq{i}"), "HORN", ItemKind::Proper)?;
    }
    for (i, c) in ceqs.iter().enumerate() {
        p.push_rule(c.clone(), &format!("ceq{i}"), "HORN", ItemKind::Proper)?;
    }
    Ok(p)
}

/// Extension by axioms and rules over the same signature and dimension.
pub fn extend_presentation(p: &Presentation, axioms: &[KFormula], rules: &[Sequent]) -> Result<Presentation, DeductionError> {
    let mut out = p.clone();
    let origin = p.name.to_string();
    for (i, a) in axioms.iter().enumerate() {
        out.push_axiom(a.clone(), &format!("ext-ax{i}"), &origin, ItemKind::Proper)?;
    }
    for (i, r) in rules.iter().enumerate() {
        out.push_rule(r.clone(), &format!("ext-rule{i}"), &origin, ItemKind::Proper)?;
    }
    Ok(out)
}

/// Search limits. All components are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_rounds: usize,
    pub max_derived: usize,
    pub max_instantiation_depth: usize,
    pub time_cap_ms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_rounds: 8, max_derived: 20_000, max_instantiation_depth: 1, time_cap_ms: 10_000 }
    }
}

impl Budget {
    pub fn new(max_rounds: usize, max_derived: usize, depth: usize, time_cap_ms: u64) -> Result<Self, DeductionError> {
        let b = Budget { max_rounds, max_derived, max_instantiation_depth: depth, time_cap_ms };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), DeductionError> {
        if self.max_rounds == 0 || self.max_derived == 0 || self.max_instantiation_depth == 0 || self.time_cap_ms == 0 {
            return Err(DeductionError::Budget(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn minimal() -> Self {
        Budget { max_rounds: 1, max_derived: 1, max_instantiation_depth: 1, time_cap_ms: 1 }
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Budget) -> bool {
        self.max_rounds <= other.max_rounds
            && self.max_derived <= other.max_derived
            && self.max_instantiation_depth <= other.max_instantiation_depth
            && self.time_cap_ms <= other.time_cap_ms
    }

    pub fn with_time_cap(mut self, ms: u64) -> Self {
        self.time_cap_ms = ms.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExhaustionReason {
    /// The round limit was reached.
    Rounds,
    /// The derived-formula limit was reached.
    Derived,
    /// The time cap was reached.
    Time,
    /// Saturation reached a fixpoint inside the bounded term universe.
    Saturated,
    /// Model search ran out of its size or node bound.
    SearchSpace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exhaustion {
    pub reason: ExhaustionReason,
    pub rounds: usize,
    pub derived: usize,
    pub universe: usize,
    pub depth: usize,
}

impl fmt::Display for Exhaustion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} after {} rounds, {} formulas, universe {} terms at depth {}",
            self.reason, self.rounds, self.derived, self.universe, self.depth
        )
    }
}

/// Three-valued outcome of a derivability question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Proved(Proof),
    Refuted(Box<FiniteKStructure>),
    Unknown(Exhaustion),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proved(_) => "Proved",
            Verdict::Refuted(_) => "Refuted",
            Verdict::Unknown(_) => "Unknown",
        }
    }

    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    pub fn proof(&self) -> Option<&Proof> {
        match self {
            Verdict::Proved(p) => Some(p),
            _ => None,
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::sigterm::tests::nat_sig;

    pub fn unary_sig() -> Signature {
        Signature::new().with_sort("s").with_op("f", &["s"], "s")
    }

    #[test]
    fn free_system_over_unary_signature() {
        let p = free_equational_presentation(&unary_sig());
        assert_eq!(p.axioms.len(), 1);
        let names: Vec<_> = p.rules.iter().map(|r| r.name.to_string()).collect();
        assert_eq!(names, vec!["sym[s]", "trans[s]", "cong[f]"]);
        assert_eq!(p.axioms[0].formula.to_string(), "<x, x>");
        assert_eq!(p.rules[2].sequent.to_string(), "<x0, y0> |- <f(x0), f(y0)>");
    }

    #[test]
    fn free_system_without_operations() {
        let p = free_equational_presentation(&Signature::new().with_sort("s"));
        assert_eq!((p.axioms.len(), p.rules.len()), (1, 2));
    }

    #[test]
    fn free_system_over_nat() {
        // one reflexivity per sort; sym and trans per sort; one congruence per
        // non-constant operation
        let sig = nat_sig();
        let p = free_equational_presentation(&sig);
        let non_constants = sig.ops.values().filter(|o| !o.args.is_empty()).count();
        assert_eq!(p.axioms.len(), sig.sorts.len());
        assert_eq!(p.rules.len(), 2 * sig.sorts.len() + non_constants);
        let mut names: Vec<_> = p.rules.iter().map(|r| r.name.to_string()).collect();
        names.sort();
        assert_eq!(names, vec!["cong[+]", "cong[s]", "sym[nat]", "trans[nat]"]);
        let cong_plus = p.rules.iter().find(|r| &*r.name == "cong[+]").unwrap();
        assert_eq!(cong_plus.sequent.premises.len(), 2);
    }

    fn nat_axioms(sig: &Signature) -> (Vec<KFormula>, Vec<Sequent>) {
        let x = Term::var("x", "nat");
        let y = Term::var("y", "nat");
        let z = Term::constant("z");
        let s = |t: Term| Term::app("s", vec![t]);
        let plus = |a: Term, b: Term| Term::app("+", vec![a, b]);
        let eqs = vec![
            KFormula::eq(sig, plus(x.clone(), z), x.clone()).unwrap(),
            KFormula::eq(sig, s(plus(x.clone(), y.clone())), plus(x.clone(), s(y.clone()))).unwrap(),
        ];
        let ceqs = vec![Sequent::new(
            [KFormula::eq(sig, s(x.clone()), s(y.clone())).unwrap()],
            KFormula::eq(sig, x, y).unwrap(),
        )];
        (eqs, ceqs)
    }

    #[test]
    fn horn_nat() {
        let sig = nat_sig();
        let (eqs, ceqs) = nat_axioms(&sig);
        let p = horn_presentation(&sig, &eqs, &ceqs).unwrap();
        let base = free_equational_presentation(&sig);
        assert_eq!(p.axioms.len(), base.axioms.len() + 2);
        assert_eq!(p.rules.len(), base.rules.len() + 1);
        assert_eq!(p.proper_axioms().count(), 2);
        assert_eq!(p.proper_rules().next().unwrap().sequent.to_string(), "<s(x), s(y)> |- <x, y>");
        assert!(p.horn);
    }

    #[test]
    fn horn_without_sentences_is_free_system() {
        let sig = nat_sig();
        let p = horn_presentation(&sig, &[], &[]).unwrap();
        let base = free_equational_presentation(&sig);
        assert_eq!((p.axioms, p.rules), (base.axioms, base.rules));
    }

    #[test]
    fn horn_rejects_ill_sorted() {
        let sig = nat_sig();
        let bad = KFormula::raw(name("nat"), vec![Term::constant("tt"), Term::constant("z")]);
        assert!(matches!(horn_presentation(&sig, &[bad], &[]), Err(DeductionError::Sort(_))));
    }

    #[test]
    fn extension_by_nothing_is_identity() {
        let p = free_equational_presentation(&unary_sig());
        assert_eq!(extend_presentation(&p, &[], &[]).unwrap(), p);
    }

    #[test]
    fn extension_checks_dimension() {
        let sig = unary_sig();
        let p = free_equational_presentation(&sig);
        let one = KFormula::new(&sig, vec![Term::var("x", "s")]).unwrap();
        assert!(matches!(extend_presentation(&p, &[one], &[]), Err(DeductionError::Dimension { .. })));
    }

    #[test]
    fn budget_positivity() {
        assert!(Budget::new(0, 1, 1, 1).is_err());
        assert!(Budget::new(1, 1, 1, 1).is_ok());
        assert!(Budget::minimal().le(&Budget::default()));
    }
}
