use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Presentation;
use crate::sigterm::{HasVars, KFormula, Substitutable, Substitution, Term, Variable};

/// How a proof step is justified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Justification {
    /// Index into the proof's hypothesis list.
    Hyp(usize),
    /// Instance of the presentation's axiom at index `axiom`.
    Axiom { axiom: usize, subst: Substitution },
    /// Rule instance whose premises are earlier steps, in the rule's premise order.
    Rule { rule: usize, subst: Substitution, premises: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub formula: KFormula,
    pub justification: Justification,
}

/// A Hilbert-style derivation; the last step is the conclusion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub hypotheses: Vec<KFormula>,
    pub steps: Vec<Step>,
}

impl Proof {
    pub fn conclusion(&self) -> Option<&KFormula> {
        self.steps.last().map(|s| &s.formula)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Apply `theta` to every formula and compose it into every step substitution.
    pub fn substitute(&self, theta: &Substitution, p: &Presentation) -> Proof {
        let compose = |subst: &Substitution, vars: BTreeSet<Variable>| {
            let full = subst.then(theta);
            Substitution(full.0.into_iter().filter(|(v, _)| vars.contains(v)).collect())
        };
        let mut vars = BTreeSet::new();
        let steps = self
            .steps
            .iter()
            .map(|s| {
                let justification = match &s.justification {
                    Justification::Hyp(i) => Justification::Hyp(*i),
                    Justification::Axiom { axiom, subst } => {
                        vars.clear();
                        if let Some(a) = p.axioms.get(*axiom) {
                            a.formula.collect_vars(&mut vars);
                        }
                        Justification::Axiom { axiom: *axiom, subst: compose(subst, vars.clone()) }
                    }
                    Justification::Rule { rule, subst, premises } => {
                        vars.clear();
                        if let Some(r) = p.rules.get(*rule) {
                            r.sequent.collect_vars(&mut vars);
                        }
                        Justification::Rule { rule: *rule, subst: compose(subst, vars.clone()), premises: premises.clone() }
                    }
                };
                Step { formula: s.formula.apply(theta), justification }
            })
            .collect();
        Proof { hypotheses: self.hypotheses.iter().map(|h| h.apply(theta)).collect(), steps }
    }

    /// Human-readable listing against the presentation the proof was built in.
    pub fn render(&self, p: &Presentation) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let why = match &s.justification {
                Justification::Hyp(h) => format!("hyp {h}"),
                Justification::Axiom { axiom, subst } => {
                    let n = p.axioms.get(*axiom).map(|a| a.name.to_string()).unwrap_or_else(|| "?".into());
                    format!("axiom {n} {subst}")
                }
                Justification::Rule { rule, subst, premises } => {
                    let n = p.rules.get(*rule).map(|r| r.name.to_string()).unwrap_or_else(|| "?".into());
                    let ps: Vec<String> = premises.iter().map(|j| j.to_string()).collect();
                    format!("rule {n} [{}] {subst}", ps.join(", "))
                }
            };
            out.push_str(&format!("{i:>3}. {}    ({why})\n", s.formula));
        }
        out
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{i:>3}. {}", s.formula)?;
        }
        Ok(())
    }
}

/// Which proof-formation condition a step breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Violation {
    EmptyProof,
    NoSuchHypothesis(usize),
    NotTheHypothesis,
    NoSuchAxiom(usize),
    NotAnAxiomInstance,
    NoSuchRule(usize),
    PremiseNotEarlier(usize),
    PremiseCount { expected: usize, actual: usize },
    PremiseMismatch(usize),
    ConclusionMismatch,
    IllSortedSubstitution(String),
    IllFormedStep(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyProof => write!(f, "proof has no steps"),
            Violation::NoSuchHypothesis(i) => write!(f, "hypothesis {i} does not exist"),
            Violation::NotTheHypothesis => write!(f, "formula differs from the cited hypothesis"),
            Violation::NoSuchAxiom(i) => write!(f, "axiom {i} does not exist"),
            Violation::NotAnAxiomInstance => write!(f, "formula is not the stated axiom instance"),
            Violation::NoSuchRule(i) => write!(f, "rule {i} does not exist"),
            Violation::PremiseNotEarlier(j) => write!(f, "premise step {j} is not an earlier step"),
            Violation::PremiseCount { expected, actual } => {
                write!(f, "rule needs {expected} premises, {actual} cited")
            }
            Violation::PremiseMismatch(j) => write!(f, "premise {j} is not the stated rule instance"),
            Violation::ConclusionMismatch => write!(f, "formula is not the stated rule conclusion"),
            Violation::IllSortedSubstitution(e) => write!(f, "substitution not sort-respecting: {e}"),
            Violation::IllFormedStep(e) => write!(f, "step formula ill-formed: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("step {step}: {violation}")]
pub struct ProofRejection {
    pub step: usize,
    pub violation: Violation,
}

/// Accept iff every step is a hypothesis, an axiom instance, or directly
/// derivable by a rule instance from earlier steps.
pub fn check_proof(p: &Presentation, proof: &Proof) -> Result<(), ProofRejection> {
    if proof.steps.is_empty() {
        return Err(ProofRejection { step: 0, violation: Violation::EmptyProof });
    }
    for (i, step) in proof.steps.iter().enumerate() {
        let reject = |violation| Err(ProofRejection { step: i, violation });
        if let Err(e) = p.check_formula(&step.formula) {
            return reject(Violation::IllFormedStep(e.to_string()));
        }
        match &step.justification {
            Justification::Hyp(h) => match proof.hypotheses.get(*h) {
                None => return reject(Violation::NoSuchHypothesis(*h)),
                Some(f) if f != &step.formula => return reject(Violation::NotTheHypothesis),
                Some(_) => {}
            },
            Justification::Axiom { axiom, subst } => {
                let Some(a) = p.axioms.get(*axiom) else {
                    return reject(Violation::NoSuchAxiom(*axiom));
                };
                if let Err(e) = subst.check(&p.signature) {
                    return reject(Violation::IllSortedSubstitution(e.to_string()));
                }
                if a.formula.apply(subst) != step.formula {
                    return reject(Violation::NotAnAxiomInstance);
                }
            }
            Justification::Rule { rule, subst, premises } => {
                let Some(r) = p.rules.get(*rule) else {
                    return reject(Violation::NoSuchRule(*rule));
                };
                if let Err(e) = subst.check(&p.signature) {
                    return reject(Violation::IllSortedSubstitution(e.to_string()));
                }
                if premises.len() != r.sequent.premises.len() {
                    return reject(Violation::PremiseCount { expected: r.sequent.premises.len(), actual: premises.len() });
                }
                for (pattern, &j) in r.sequent.premises.iter().zip(premises) {
                    if j >= i {
                        return reject(Violation::PremiseNotEarlier(j));
                    }
                    if pattern.apply(subst) != proof.steps[j].formula {
                        return reject(Violation::PremiseMismatch(j));
                    }
                }
                if r.sequent.conclusion.apply(subst) != step.formula {
                    return reject(Violation::ConclusionMismatch);
                }
            }
        }
    }
    Ok(())
}

/// Replace frozen variables by their thawed counterparts.
pub(crate) fn thaw_term(t: &Term) -> Term {
    t.map_vars(&mut |v| Term::Var(v.thawed()))
}

pub(crate) fn thaw_formula(f: &KFormula) -> KFormula {
    f.map_terms(thaw_term)
}

pub(crate) fn thaw_subst(s: &Substitution) -> Substitution {
    Substitution(s.0.iter().map(|(v, t)| (v.clone(), thaw_term(t))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::tests::unary_sig;
    use crate::deduction::free_equational_presentation;
    use crate::sigterm::Variable;

    fn fx(t: Term) -> Term {
        Term::app("f", vec![t])
    }

    #[test]
    fn single_hypothesis_proof() {
        let p = free_equational_presentation(&unary_sig());
        let phi = KFormula::raw("s".into(), vec![fx(Term::var("a", "s")), Term::var("b", "s")]);
        let proof = Proof {
            hypotheses: vec![phi.clone()],
            steps: vec![Step { formula: phi, justification: Justification::Hyp(0) }],
        };
        assert!(check_proof(&p, &proof).is_ok());
    }

    #[test]
    fn symmetric_step_and_tampering() {
        let p = free_equational_presentation(&unary_sig());
        let a = Term::var("a", "s");
        let b = Term::var("b", "s");
        let ab = KFormula::raw("s".into(), vec![a.clone(), b.clone()]);
        let ba = KFormula::raw("s".into(), vec![b.clone(), a.clone()]);
        let subst = Substitution::from_pairs([
            (Variable::new("x", "s"), a.clone()),
            (Variable::new("y", "s"), b.clone()),
        ]);
        let sym = p.rules.iter().position(|r| &*r.name == "sym[s]").unwrap();
        let mut proof = Proof {
            hypotheses: vec![ab.clone()],
            steps: vec![
                Step { formula: ab, justification: Justification::Hyp(0) },
                Step { formula: ba, justification: Justification::Rule { rule: sym, subst, premises: vec![0] } },
            ],
        };
        assert!(check_proof(&p, &proof).is_ok());
        if let Justification::Rule { subst, .. } = &mut proof.steps[1].justification {
            subst.insert(Variable::new("y", "s"), a);
        }
        let err = check_proof(&p, &proof).unwrap_err();
        assert_eq!(err.step, 1);
        assert!(matches!(err.violation, Violation::PremiseMismatch(0)));
    }

    #[test]
    fn forward_reference_rejected() {
        let p = free_equational_presentation(&unary_sig());
        let a = Term::var("a", "s");
        let aa = KFormula::raw("s".into(), vec![a.clone(), a.clone()]);
        let proof = Proof {
            hypotheses: vec![],
            steps: vec![Step {
                formula: aa,
                justification: Justification::Rule {
                    rule: 0,
                    subst: Substitution::from_pairs([
                        (Variable::new("x", "s"), a.clone()),
                        (Variable::new("y", "s"), a),
                    ]),
                    premises: vec![0],
                },
            }],
        };
        assert!(matches!(check_proof(&p, &proof).unwrap_err().violation, Violation::PremiseNotEarlier(0)));
    }

    #[test]
    fn empty_proof_rejected() {
        let p = free_equational_presentation(&unary_sig());
        let proof = Proof { hypotheses: vec![], steps: vec![] };
        assert_eq!(check_proof(&p, &proof).unwrap_err().violation, Violation::EmptyProof);
    }
}
