//! Refinement checks: by interpretation, along signature morphisms, logical
//! refinement, vertical composition, and bounded reflection search.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deduction::{
    bounded_consequences, check_proof, derive, horn_presentation, Budget, DeductionError, Exhaustion, ExhaustionReason,
    Presentation, Verdict,
};
use crate::models::{consequence_witness, countermodel_search, is_model_of, CountermodelOptions, ModelError, SearchOutcome};
use crate::par;
use crate::sigterm::{name, KFormula, Name, Sequent, Signature, Term, Variable};
use crate::translation::{
    check_substitution_commutation, compose_translations, translate_formula, translate_sequent, translation_from_morphism,
    SignatureMorphism, TermSampler, Translation, TranslationError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefinementError {
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("presentation `{0}` is not a Horn presentation")]
    NotHorn(Name),
    #[error("cannot chain: first step ends at `{first}`, second starts at `{second}`")]
    ChainMismatch { first: Name, second: Name },
    #[error("certificate {0} is not Proved")]
    NotProved(String),
    #[error("translation `{0}` failed the substitution-commutation check")]
    CommutationFailed(Name),
    #[error("internal soundness alarm: {0}")]
    InternalSoundness(String),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Translation(#[from] TranslationError),
}

/// Limits shared by every obligation of a check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub proof: Budget,
    pub models: CountermodelOptions,
    /// Samples for the substitution-commutation check.
    pub commutation_samples: usize,
    pub seed: u64,
    /// Maximum term depth of candidate sequents in reflection search.
    pub reflection_depth: usize,
    /// Maximum number of candidates examined by reflection search.
    pub reflection_candidates: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            proof: Budget::default(),
            models: CountermodelOptions::default(),
            commutation_samples: 200,
            seed: 0,
            reflection_depth: 2,
            reflection_candidates: 200,
        }
    }
}

/// Fuse proof search and countermodel search; each gets half the time cap.
pub fn decide(p: &Presentation, gamma: &[KFormula], goal: &KFormula, budgets: &Budgets) -> Result<Verdict, RefinementError> {
    let half = (budgets.proof.time_cap_ms / 2).max(1);
    let verdict = derive(p, gamma, goal, &budgets.proof.with_time_cap(half))?;
    match verdict {
        Verdict::Proved(proof) => {
            if let Err(r) = check_proof(p, &proof) {
                return Err(RefinementError::InternalSoundness(format!("derived proof rejected: {r}")));
            }
            // no shipped model of p may refute a proved goal
            for m in &budgets.models.fixtures {
                if m.signature == p.signature && m.dim == p.dim && is_model_of(m, p) && consequence_witness(m, gamma, goal)?.is_some() {
                    return Err(RefinementError::InternalSoundness(format!("{goal} proved but refuted by {}", m.name)));
                }
            }
            Ok(Verdict::Proved(proof))
        }
        Verdict::Refuted(_) => unreachable!("proof search never refutes"),
        Verdict::Unknown(ex) => {
            let opts = CountermodelOptions { time_cap_ms: half, ..budgets.models.clone() };
            match countermodel_search(p, gamma, goal, &opts)? {
                SearchOutcome::Found(m) if is_model_of(&m, p) && consequence_witness(&m, gamma, goal)?.is_some() => Ok(Verdict::Refuted(m)),
                SearchOutcome::Found(_) => Ok(Verdict::Unknown(ex)),
                SearchOutcome::NotFound { .. } => Ok(Verdict::Unknown(Exhaustion {
                    reason: if ex.reason == ExhaustionReason::Saturated { ExhaustionReason::SearchSpace } else { ex.reason },
                    ..ex
                })),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Overall {
    Proved,
    Unknown,
    Failed,
}

impl Overall {
    pub fn exit_code(self) -> i32 {
        match self {
            Overall::Proved => 0,
            Overall::Failed => 1,
            Overall::Unknown => 2,
        }
    }
}

/// One translated axiom or rule and its verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Obligation {
    /// Source item identifier.
    pub source: String,
    pub source_statement: String,
    pub translated: Sequent,
    pub verdict: Verdict,
    pub millis: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementCertificate {
    pub source: Name,
    pub target: Name,
    pub translation: String,
    pub obligations: Vec<Obligation>,
    /// Unverified hypotheses the verdict rests on.
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
    pub overall: Overall,
    #[serde(skip)]
    pub tau: Option<Translation>,
}

impl RefinementCertificate {
    fn assemble(
        source: &Presentation,
        target: &Presentation,
        translation: String,
        obligations: Vec<Obligation>,
        assumptions: Vec<String>,
        warnings: Vec<String>,
        tau: Option<Translation>,
    ) -> Self {
        let overall = if obligations.iter().any(|o| o.verdict.is_refuted()) {
            Overall::Failed
        } else if obligations.iter().all(|o| o.verdict.is_proved()) && warnings.is_empty() {
            Overall::Proved
        } else {
            Overall::Unknown
        };
        RefinementCertificate { source: source.name.clone(), target: target.name.clone(), translation, obligations, assumptions, warnings, overall, tau }
    }
}

impl fmt::Display for RefinementCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} => {} via {}: {:?}", self.source, self.target, self.translation, self.overall)?;
        for o in &self.obligations {
            writeln!(f, "  [{}] {}  from {} ({})", o.verdict.label(), o.translated, o.source, o.source_statement)?;
        }
        for a in &self.assumptions {
            writeln!(f, "  assumes: {a}")?;
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        Ok(())
    }
}

/// Items of `sp` that generate obligations: proper items for Horn
/// presentations, every item otherwise. Returned as (identifier, sequent).
fn obligation_items(sp: &Presentation) -> Vec<(Name, Sequent)> {
    let keep = |k| !sp.horn || k == crate::deduction::ItemKind::Proper;
    sp.axioms
        .iter()
        .filter(|a| keep(a.kind))
        .map(|a| (a.name.clone(), Sequent::axiom(a.formula.clone())))
        .chain(sp.rules.iter().filter(|r| keep(r.kind)).map(|r| (r.name.clone(), r.sequent.clone())))
        .collect()
}

fn discharge(target: &Presentation, items: Vec<(Name, Sequent, Sequent)>, budgets: &Budgets) -> Result<Vec<Obligation>, RefinementError> {
    par::map(&items, |(id, src, s)| {
        let start = Instant::now();
        let gamma: Vec<KFormula> = s.premises.iter().cloned().collect();
        let verdict = decide(target, &gamma, &s.conclusion, budgets)?;
        Ok(Obligation {
            source: id.to_string(),
            source_statement: src.to_string(),
            translated: s.clone(),
            verdict,
            millis: start.elapsed().as_millis() as u64,
        })
    })
    .into_iter()
    .collect()
}

fn check_interface(sp: &Presentation, sp2: &Presentation, tau: &Translation) -> Result<(), RefinementError> {
    if !sp.signature.is_subsignature_of(&tau.source) || tau.source_dim != sp.dim {
        return Err(RefinementError::InterfaceMismatch(format!("{} does not start from {}", tau.name, sp.name)));
    }
    if !tau.target.is_subsignature_of(&sp2.signature) || tau.target_dim != sp2.dim {
        return Err(RefinementError::InterfaceMismatch(format!("{} does not land in {}", tau.name, sp2.name)));
    }
    Ok(())
}

fn commutation_warning(tau: &Translation, budgets: &Budgets) -> Result<Option<String>, RefinementError> {
    if tau.is_structurally_schematic() {
        return Ok(None);
    }
    let report = check_substitution_commutation(tau, budgets.commutation_samples, budgets.seed)?;
    Ok(report.witness.map(|w| {
        format!(
            "{} does not commute with substitutions (at {} under {}); axiom-and-rule obligations are not conclusive",
            tau.name, w.formula, w.substitution
        )
    }))
}

fn interprets(tau: &Translation, sp: &Presentation) -> String {
    format!("{} interprets {}", tau.name, sp.name)
}

/// `SP ⇀_τ SP′` checked on the translated axioms and rules of `sp`.
pub fn check_refinement_by_interpretation(sp: &Presentation, sp2: &Presentation, tau: &Translation, budgets: &Budgets) -> Result<RefinementCertificate, RefinementError> {
    let mut cert = preservation(sp, sp2, tau, budgets)?;
    cert.assumptions.push(interprets(tau, sp));
    Ok(cert)
}

fn preservation(sp: &Presentation, sp2: &Presentation, tau: &Translation, budgets: &Budgets) -> Result<RefinementCertificate, RefinementError> {
    check_interface(sp, sp2, tau)?;
    let warnings: Vec<String> = commutation_warning(tau, budgets)?.into_iter().collect();
    let mut items = Vec::new();
    for (id, s) in obligation_items(sp) {
        for t in translate_sequent(tau, &s)? {
            items.push((id.clone(), s.clone(), t));
        }
    }
    let obligations = discharge(sp2, items, budgets)?;
    Ok(RefinementCertificate::assemble(sp, sp2, tau.to_string(), obligations, Vec::new(), warnings, Some(tau.clone())))
}

/// `SP^τ`: the Horn presentation over the target whose axioms are the
/// translated equations and conditional equations of `sp`.
pub fn tau_image_presentation(sp: &Presentation, tau: &Translation, budgets: &Budgets) -> Result<Presentation, RefinementError> {
    if !sp.horn || tau.target_dim != 2 {
        return Err(RefinementError::NotHorn(sp.name.clone()));
    }
    if commutation_warning(tau, budgets)?.is_some() {
        return Err(RefinementError::CommutationFailed(tau.name.clone()));
    }
    let mut eqs = Vec::new();
    let mut ceqs = Vec::new();
    for a in sp.proper_axioms() {
        eqs.extend(translate_formula(tau, &a.formula)?);
    }
    for r in sp.proper_rules() {
        ceqs.extend(translate_sequent(tau, &r.sequent)?);
    }
    let p = horn_presentation(&tau.target, &eqs, &ceqs)?;
    Ok(p.named(&format!("{}^{}", sp.name, tau.name)))
}

/// `SP ⇝_σ SP′` for a Horn `sp`: `sp2` must entail the σ-images of its
/// proper equations and conditional equations.
pub fn check_sigma_refinement(sp: &Presentation, sp2: &Presentation, sigma: &SignatureMorphism, budgets: &Budgets) -> Result<RefinementCertificate, RefinementError> {
    if !sp.horn {
        return Err(RefinementError::NotHorn(sp.name.clone()));
    }
    if sigma.source != sp.signature || !sigma.target.is_subsignature_of(&sp2.signature) || sp.dim != sp2.dim {
        return Err(RefinementError::InterfaceMismatch(format!("{} does not connect {} and {}", sigma.name, sp.name, sp2.name)));
    }
    let items = obligation_items(sp).into_iter().map(|(id, s)| (id, s.clone(), sigma.sequent(&s))).collect();
    let obligations = discharge(sp2, items, budgets)?;
    Ok(RefinementCertificate::assemble(sp, sp2, format!("morphism {}", sigma.name), obligations, Vec::new(), Vec::new(), None))
}

/// `L ⇝ L′`: every axiom and rule of `l` is derivable in `l2`.
pub fn check_logical_refinement(l: &Presentation, l2: &Presentation, budgets: &Budgets) -> Result<RefinementCertificate, RefinementError> {
    if !l.signature.is_subsignature_of(&l2.signature) || l.dim != l2.dim {
        return Err(RefinementError::InterfaceMismatch(format!("signature of {} is not included in that of {}", l.name, l2.name)));
    }
    preservation(l, l2, &inclusion_translation(&l.signature, &l2.signature, l.dim)?, budgets)
}

fn inclusion_translation(sub: &Signature, sup: &Signature, k: usize) -> Result<Translation, RefinementError> {
    if sub == sup {
        return Ok(Translation::identity(sub, k));
    }
    let mut t = translation_from_morphism(SignatureMorphism::inclusion(sub, sup)?, k);
    t.name = name("inclusion");
    Ok(t)
}

/// Chain `SP ⇀_τ SP′` and `SP′ ⇀_ρ SP″` into `SP ⇀_{ρ∘τ} SP″`.
pub fn vertical_compose(c1: &RefinementCertificate, c2: &RefinementCertificate) -> Result<RefinementCertificate, RefinementError> {
    if c1.target != c2.source {
        return Err(RefinementError::ChainMismatch { first: c1.target.clone(), second: c2.source.clone() });
    }
    for c in [c1, c2] {
        if c.overall != Overall::Proved {
            return Err(RefinementError::NotProved(format!("{} => {}", c.source, c.target)));
        }
    }
    let (tau, rho) = match (&c1.tau, &c2.tau) {
        (Some(t), Some(r)) => (t, r),
        _ => return Err(RefinementError::InterfaceMismatch("composition needs translation-based certificates".into())),
    };
    let composed = compose_translations(rho, tau)?;
    let mut assumptions = c1.assumptions.clone();
    for a in &c2.assumptions {
        if !assumptions.contains(a) {
            assumptions.push(a.clone());
        }
    }
    assumptions.push(format!("{} interprets {}^{}", rho.name, c1.source, tau.name));
    let obligations = c1
        .obligations
        .iter()
        .map(|o| Obligation { source: format!("step1:{}", o.source), ..o.clone() })
        .chain(c2.obligations.iter().map(|o| Obligation { source: format!("step2:{}", o.source), ..o.clone() }))
        .collect();
    Ok(RefinementCertificate {
        source: c1.source.clone(),
        target: c2.target.clone(),
        translation: composed.to_string(),
        obligations,
        assumptions,
        warnings: Vec::new(),
        overall: Overall::Proved,
        tau: Some(composed),
    })
}

/// Terms of each sort up to `depth` over the variables `x`, `y`, ordered by
/// size and then structurally.
fn small_terms(sig: &Signature, depth: usize) -> Vec<Vec<Term>> {
    let sorts: Vec<&Name> = sig.sorts.iter().collect();
    let mut layers: Vec<BTreeSet<Term>> = sorts
        .iter()
        .map(|s| ["x", "y"].iter().map(|v| Term::Var(Variable::new(v, s))).collect())
        .collect();
    for _ in 0..depth {
        let mut next = layers.clone();
        for (op, prof) in &sig.ops {
            let ri = sorts.iter().position(|s| **s == prof.result).expect("declared sort");
            let lists: Vec<Vec<Term>> = prof
                .args
                .iter()
                .map(|a| layers[sorts.iter().position(|s| *s == a).expect("declared sort")].iter().cloned().collect())
                .collect();
            let mut idx = vec![0usize; lists.len()];
            if lists.iter().any(Vec::is_empty) {
                continue;
            }
            loop {
                let args: Vec<Term> = idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
                next[ri].insert(Term::App(op.clone(), args.into()));
                let mut k = lists.len();
                let mut done = true;
                while k > 0 {
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < lists[k].len() {
                        done = false;
                        break;
                    }
                    idx[k] = 0;
                }
                if done {
                    break;
                }
            }
        }
        layers = next;
    }
    layers
        .into_iter()
        .map(|l| {
            let mut v: Vec<Term> = l.into_iter().collect();
            v.sort_by_key(|t| t.size());
            v
        })
        .collect()
}

/// Premise-free candidate sequents ⟨t1, …, tk⟩ with non-increasing
/// components, ordered by total size.
fn reflection_candidates(sig: &Signature, k: usize, depth: usize) -> Vec<KFormula> {
    let mut out = Vec::new();
    for (sort, terms) in sig.sorts.iter().zip(small_terms(sig, depth)) {
        let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
        for _ in 0..k {
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    terms
                        .iter()
                        .filter(|t| prefix.last().map_or(true, |last: &Term| *t <= last))
                        .map(|t| {
                            let mut p = prefix.clone();
                            p.push(t.clone());
                            p
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|c| KFormula::raw(sort.clone(), c)));
    }
    out.sort_by(|a, b| (a.size(), a).cmp(&(b.size(), b)));
    out
}

/// A sequent that `sp` does not entail (with a finite witness) but whose
/// translation `sp2` proves: a failure of reflection.
pub fn search_reflection_counterexample(
    sp: &Presentation,
    sp2: &Presentation,
    tau: &Translation,
    budgets: &Budgets,
) -> Result<Option<(Sequent, crate::models::FiniteKStructure)>, RefinementError> {
    check_interface(sp, sp2, tau)?;
    for xi in reflection_candidates(&sp.signature, sp.dim, budgets.reflection_depth).into_iter().take(budgets.reflection_candidates) {
        let SearchOutcome::Found(m) = countermodel_search(sp, &[], &xi, &budgets.models)? else {
            continue;
        };
        let mut all = true;
        for t in translate_formula(tau, &xi)? {
            if !derive(sp2, &[], &t, &budgets.proof)?.is_proved() {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Some((Sequent::axiom(xi), *m)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reflection {
    /// Nothing found among the first `candidates` sequents.
    CleanUpToBudget { depth: usize, candidates: usize },
    Counterexample { sequent: Sequent, witness: Box<crate::models::FiniteKStructure> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretationReport {
    pub preservation: RefinementCertificate,
    pub reflection: Reflection,
    pub summary: String,
}

/// Preservation plus bounded reflection search. Never claims a full
/// interpretation.
pub fn check_interpretation(sp: &Presentation, tau: &Translation, sp2: &Presentation, budgets: &Budgets) -> Result<InterpretationReport, RefinementError> {
    let mut preservation = preservation(sp, sp2, tau, budgets)?;
    let reflection = match search_reflection_counterexample(sp, sp2, tau, budgets)? {
        Some((sequent, witness)) => Reflection::Counterexample { sequent, witness: Box::new(witness) },
        None => Reflection::CleanUpToBudget { depth: budgets.reflection_depth, candidates: budgets.reflection_candidates },
    };
    let summary = match &reflection {
        Reflection::CleanUpToBudget { .. } => {
            preservation.assumptions.push(format!("{} (reflection search clean up to budget)", interprets(tau, sp)));
            "interpretation consistent up to budgets".to_string()
        }
        Reflection::Counterexample { sequent, witness } => {
            preservation.assumptions.push(interprets(tau, sp));
            format!("{} does not interpret {}: {} holds after translation but fails in {}", tau.name, sp.name, sequent, witness.name)
        }
    };
    Ok(InterpretationReport { preservation, reflection, summary })
}

/// Non-conclusive diagnostic for injectivity of the induced map on theories:
/// counts sampled formula pairs whose bounded theories in `l` differ while
/// their translated bounded theories in `k` coincide.
pub fn injectivity_diagnostic(l: &Presentation, k: &Presentation, tau: &Translation, samples: usize, budgets: &Budgets) -> Result<(usize, usize), RefinementError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(budgets.seed);
    let sampler = TermSampler::new(&l.signature);
    let mut theories = Vec::new();
    for _ in 0..samples {
        let phi = sampler.formula(&mut rng, l.dim, 1);
        let src = bounded_consequences(l, std::slice::from_ref(&phi), &budgets.proof)?;
        let img: Vec<KFormula> = translate_formula(tau, &phi)?.into_iter().collect();
        let tgt = bounded_consequences(k, &img, &budgets.proof)?;
        theories.push((src, tgt));
    }
    let mut pairs = 0;
    let mut collisions = 0;
    for i in 0..theories.len() {
        for j in i + 1..theories.len() {
            if theories[i].0 != theories[j].0 {
                pairs += 1;
                if theories[i].1 == theories[j].1 {
                    collisions += 1;
                }
            }
        }
    }
    Ok((collisions, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{extend_presentation, free_equational_presentation};
    use crate::sigterm::Signature;

    fn unary() -> Signature {
        Signature::new().with_sort("s").with_op("f", &["s"], "s")
    }

    fn x() -> Term {
        Term::var("x", "s")
    }

    fn fx_x() -> KFormula {
        KFormula::raw(name("s"), vec![Term::app("f", vec![x()]), x()])
    }

    fn quick() -> Budgets {
        Budgets {
            proof: Budget { time_cap_ms: 2000, ..Budget::default() },
            models: CountermodelOptions { default_max: 2, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn decide_three_ways() {
        let p = free_equational_presentation(&unary());
        let refl = KFormula::raw(name("s"), vec![x(), x()]);
        assert!(decide(&p, &[], &refl, &quick()).unwrap().is_proved());
        match decide(&p, &[], &fx_x(), &quick()).unwrap() {
            Verdict::Refuted(m) => assert_eq!(m.tables[&name("f")], vec![1, 0]),
            v => panic!("expected refutation, got {}", v.label()),
        }
        let tiny = Budgets { proof: Budget::minimal(), models: CountermodelOptions { default_max: 1, ..Default::default() }, ..quick() };
        let ffx = KFormula::raw(name("s"), vec![Term::app("f", vec![Term::app("f", vec![x()])]), x()]);
        let sp = extend_presentation(&p, &[fx_x()], &[]).unwrap();
        assert!(matches!(decide(&sp, &[], &ffx, &tiny).unwrap(), Verdict::Unknown(_)));
    }

    #[test]
    fn reflection_finds_fixpoint_equation() {
        let p = free_equational_presentation(&unary());
        let p2 = extend_presentation(&p, &[fx_x()], &[]).unwrap();
        let tau = Translation::identity(&unary(), 2);
        let (xi, m) = search_reflection_counterexample(&p, &p2, &tau, &quick()).unwrap().expect("counterexample");
        assert_eq!(xi.conclusion, fx_x());
        assert_eq!(m.tables[&name("f")], vec![1, 0]);
        assert!(search_reflection_counterexample(&p, &p, &tau, &quick()).unwrap().is_none());
    }

    #[test]
    fn logical_refinement_of_extension() {
        let p = free_equational_presentation(&unary());
        let p2 = extend_presentation(&p, &[fx_x()], &[]).unwrap();
        let c = check_logical_refinement(&p, &p2, &quick()).unwrap();
        assert_eq!(c.overall, Overall::Proved);
        let back = check_logical_refinement(&p2, &p, &quick()).unwrap();
        assert_eq!(back.overall, Overall::Failed);
        let id = Translation::identity(&unary(), 2);
        let via = check_refinement_by_interpretation(&p, &p2, &id, &quick()).unwrap();
        let labels = |c: &RefinementCertificate| c.obligations.iter().map(|o| o.verdict.label()).collect::<Vec<_>>();
        assert_eq!(labels(&c), labels(&via));
    }

    #[test]
    fn composition_records_side_condition() {
        let p = free_equational_presentation(&unary());
        let p2 = extend_presentation(&p, &[fx_x()], &[]).unwrap().named("P2");
        let c1 = check_logical_refinement(&p, &p2, &quick()).unwrap();
        let c2 = check_logical_refinement(&p2, &p2, &quick()).unwrap();
        let c = vertical_compose(&c1, &c2).unwrap();
        assert_eq!(c.target, name("P2"));
        assert!(c.assumptions.iter().any(|a| a.contains("interprets EQ^identity")));
        assert!(vertical_compose(&c2, &c2.clone()).is_ok());
        assert!(matches!(vertical_compose(&c2, &c1), Err(RefinementError::ChainMismatch { .. })));
    }

    #[test]
    fn candidates_prefer_larger_left_side() {
        let c = reflection_candidates(&unary(), 2, 1);
        let fx = c.iter().position(|f| *f == fx_x()).unwrap();
        let xf = c.iter().position(|f| *f == KFormula::raw(name("s"), vec![x(), Term::app("f", vec![x()])]));
        assert!(xf.is_none());
        assert!(c[..fx].iter().all(|f| f.size() <= fx_x().size()));
    }
}
