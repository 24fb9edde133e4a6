//! Running directives and shaping their results into reports.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::resolve::{filter_mode, Directive, DirectiveKind, Document};
use super::FrontendError;
use crate::deduction::{check_proof, derive, Exhaustion, Presentation, Proof, Verdict};
use crate::models::{countermodel_search, FiniteKStructure, SearchOutcome};
use crate::refinement::{
    check_interpretation, check_logical_refinement, check_refinement_by_interpretation, check_sigma_refinement,
    decide, search_reflection_counterexample, vertical_compose, Budgets, Obligation, Overall, Reflection,
    RefinementCertificate, RefinementError,
};
use crate::sigterm::{KFormula, Sequent};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Refinement(#[from] RefinementError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Frontend(_) => 3,
            RunError::Refinement(RefinementError::InterfaceMismatch(_) | RefinementError::NotHorn(_) | RefinementError::ChainMismatch { .. }) => 3,
            _ => 4,
        }
    }
}

/// Budget settings from `with` clauses or command-line flags. Unset fields
/// leave the underlying value alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub rounds: Option<usize>,
    pub derived: Option<usize>,
    pub depth: Option<usize>,
    pub time_ms: Option<u64>,
    pub default_size: Option<usize>,
    pub sizes: BTreeMap<String, usize>,
    pub nodes: Option<u64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub reflect_depth: Option<usize>,
    pub reflect_candidates: Option<usize>,
    pub filters: Option<String>,
}

impl Overrides {
    /// Read validated `key = value` pairs.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, FrontendError> {
        let mut o = Overrides::default();
        for (k, v) in pairs {
            let bad = || FrontendError::Resolution { msg: format!("bad value `{v}` for `{k}`"), span: Default::default() };
            let n = || v.parse::<u64>().map_err(|_| bad());
            match k.as_str() {
                "rounds" => o.rounds = Some(n()? as usize),
                "derived" => o.derived = Some(n()? as usize),
                "depth" => o.depth = Some(n()? as usize),
                "time" => o.time_ms = Some(n()?),
                "size" => o.default_size = Some(n()? as usize),
                "nodes" => o.nodes = Some(n()?),
                "samples" => o.samples = Some(n()? as usize),
                "seed" => o.seed = Some(n()?),
                "reflect_depth" => o.reflect_depth = Some(n()? as usize),
                "reflect_candidates" => o.reflect_candidates = Some(n()? as usize),
                "filters" => {
                    filter_mode(v).ok_or_else(bad)?;
                    o.filters = Some(v.clone());
                }
                _ => match k.strip_prefix("size.") {
                    Some(sort) => {
                        o.sizes.insert(sort.to_string(), n()? as usize);
                    }
                    None => {
                        return Err(FrontendError::Resolution { msg: format!("unknown budget key `{k}`"), span: Default::default() })
                    }
                },
            }
        }
        Ok(o)
    }

    pub fn apply(&self, b: &mut Budgets) {
        if let Some(x) = self.rounds {
            b.proof.max_rounds = x;
        }
        if let Some(x) = self.derived {
            b.proof.max_derived = x;
        }
        if let Some(x) = self.depth {
            b.proof.max_instantiation_depth = x;
        }
        if let Some(x) = self.time_ms {
            b.proof.time_cap_ms = x;
            b.models.time_cap_ms = x;
        }
        if let Some(x) = self.default_size {
            b.models.default_max = x;
        }
        for (s, n) in &self.sizes {
            b.models.max_sizes.insert(crate::sigterm::name(s), *n);
        }
        if let Some(x) = self.nodes {
            b.models.node_cap = x;
        }
        if let Some(x) = self.samples {
            b.commutation_samples = x;
        }
        if let Some(x) = self.seed {
            b.seed = x;
        }
        if let Some(x) = self.reflect_depth {
            b.reflection_depth = x;
        }
        if let Some(x) = self.reflect_candidates {
            b.reflection_candidates = x;
        }
        if let Some(m) = self.filters.as_deref().and_then(filter_mode) {
            b.models.filter_mode = Some(m);
        }
    }
}

/// Budgets as they appear in a report; fixtures are listed by name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BudgetSummary {
    pub max_rounds: usize,
    pub max_derived: usize,
    pub max_instantiation_depth: usize,
    pub time_cap_ms: u64,
    pub max_sizes: BTreeMap<String, usize>,
    pub default_max_size: usize,
    pub filter_mode: Option<String>,
    pub node_cap: u64,
    pub fixtures: Vec<String>,
    pub commutation_samples: usize,
    pub seed: u64,
    pub reflection_depth: usize,
    pub reflection_candidates: usize,
}

impl From<&Budgets> for BudgetSummary {
    fn from(b: &Budgets) -> Self {
        BudgetSummary {
            max_rounds: b.proof.max_rounds,
            max_derived: b.proof.max_derived,
            max_instantiation_depth: b.proof.max_instantiation_depth,
            time_cap_ms: b.proof.time_cap_ms,
            max_sizes: b.models.max_sizes.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            default_max_size: b.models.default_max,
            filter_mode: b.models.filter_mode.map(|m| format!("{m:?}").to_lowercase()),
            node_cap: b.models.node_cap,
            fixtures: b.models.fixtures.iter().map(|m| m.name.to_string()).collect(),
            commutation_samples: b.commutation_samples,
            seed: b.seed,
            reflection_depth: b.reflection_depth,
            reflection_candidates: b.reflection_candidates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObligationReport {
    pub source: String,
    pub translated: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proof: Option<Proof>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<FiniteKStructure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustion: Option<Exhaustion>,
    pub millis: u64,
    /// Proof listing for text output.
    #[serde(skip)]
    pub proof_text: Option<String>,
}

impl ObligationReport {
    fn new(source: &str, translated: String, verdict: &Verdict, target: &Presentation, millis: u64) -> Self {
        let (proof, countermodel, exhaustion) = match verdict {
            Verdict::Proved(p) => (Some(p.clone()), None, None),
            Verdict::Refuted(m) => (None, Some((**m).clone()), None),
            Verdict::Unknown(e) => (None, None, Some(e.clone())),
        };
        ObligationReport {
            source: source.to_string(),
            translated,
            verdict: verdict.label().to_string(),
            proof_text: proof.as_ref().map(|p| p.render(target)),
            proof,
            countermodel,
            exhaustion,
            millis,
        }
    }

    fn from_obligation(o: &Obligation, target: &Presentation) -> Self {
        Self::new(&o.source, o.translated.to_string(), &o.verdict, target, o.millis)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub directive: String,
    pub budgets: BudgetSummary,
    pub obligations: Vec<ObligationReport>,
    pub assumptions: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
    pub overall: String,
    pub exit_code: i32,
}

impl Report {
    fn new(d: &Directive, b: &Budgets) -> Self {
        Report {
            tool_version: TOOL_VERSION.to_string(),
            directive: d.text.clone(),
            budgets: b.into(),
            obligations: Vec::new(),
            assumptions: Vec::new(),
            warnings: b
                .models
                .fixtures
                .iter()
                .filter(|m| m.is_bounded_approximation())
                .map(|m| format!("fixture {} is a bounded approximation", m.name))
                .collect(),
            summary: None,
            overall: String::new(),
            exit_code: 0,
        }
    }

    fn finish(mut self, overall: &str, exit_code: i32) -> Self {
        self.overall = overall.to_string();
        self.exit_code = exit_code;
        self
    }

    fn certificate(mut self, c: &RefinementCertificate, target: &Presentation) -> Self {
        self.obligations = c.obligations.iter().map(|o| ObligationReport::from_obligation(o, target)).collect();
        self.assumptions = c.assumptions.clone();
        self.warnings.extend(c.warnings.iter().cloned());
        self.summary = Some(format!("{} => {} via {}", c.source, c.target, c.translation));
        self.finish(&format!("{:?}", c.overall), c.overall.exit_code())
    }

    /// JSON text with timing fields zeroed, for reproducibility comparisons.
    pub fn json_without_timing(&self) -> String {
        let mut r = self.clone();
        r.obligations.iter_mut().for_each(|o| o.millis = 0);
        serde_json::to_string_pretty(&r).expect("reports serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Human-readable text; `proofs` adds full proof listings.
    pub fn render(&self, proofs: bool) -> String {
        let mut out = format!("{}\n", self.directive);
        if let Some(s) = &self.summary {
            out.push_str(&format!("  {s}\n"));
        }
        for o in &self.obligations {
            out.push_str(&format!("  [{}] {}  ({}, {} ms)\n", o.verdict, o.translated, o.source, o.millis));
            if let (true, Some(p)) = (proofs, &o.proof_text) {
                for line in p.lines() {
                    out.push_str(&format!("      {line}\n"));
                }
            }
            if let Some(m) = &o.countermodel {
                for line in m.to_string().lines() {
                    out.push_str(&format!("      {line}\n"));
                }
            }
            if let Some(e) = &o.exhaustion {
                out.push_str(&format!("      budget exhausted: {e}\n"));
            }
        }
        for a in &self.assumptions {
            out.push_str(&format!("  assumes: {a}\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("  warning: {w}\n"));
        }
        out.push_str(&format!("  overall: {} (exit {})\n", self.overall, self.exit_code));
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// Budgets for `d`: defaults, then the directive's `with` clause, then
/// `global` (command-line) overrides. Document structures become fixtures.
pub fn budgets_for(d: &Directive, doc: &Document, global: &Overrides) -> Result<Budgets, FrontendError> {
    let mut b = Budgets::default();
    b.models.fixtures = doc.structures.clone();
    Overrides::from_pairs(&d.with)?.apply(&mut b);
    global.apply(&mut b);
    Ok(b)
}

fn presentation<'a>(doc: &'a Document, n: &str) -> Result<&'a Presentation, RunError> {
    doc.presentation(n).ok_or_else(|| FrontendError::Resolution { msg: format!("unknown presentation `{n}`"), span: Default::default() }.into())
}

fn goal_text(from: &[KFormula], goal: &KFormula) -> String {
    Sequent::new(from.iter().cloned(), goal.clone()).to_string()
}

/// Execute one directive.
pub fn run(d: &Directive, doc: &Document, global: &Overrides) -> Result<Report, RunError> {
    let budgets = budgets_for(d, doc, global)?;
    let report = Report::new(d, &budgets);
    let p = |i: usize| presentation(doc, &d.operands[i]);
    let tr = |i: usize| {
        doc.translation(&d.via[i])
            .ok_or_else(|| RunError::from(FrontendError::Resolution { msg: format!("unknown translation `{}`", d.via[i]), span: Default::default() }))
    };
    let missing_goal = || RunError::Internal("directive without goal".into());
    match d.kind {
        DirectiveKind::Derive => {
            let (sp, goal) = (p(0)?, d.goal.as_ref().ok_or_else(missing_goal)?);
            let start = Instant::now();
            let v = derive(sp, &d.from, goal, &budgets.proof).map_err(RefinementError::from)?;
            if let Some(pr) = v.proof() {
                check_proof(sp, pr).map_err(|e| RunError::Internal(format!("derived proof rejected: {e}")))?;
            }
            let o = ObligationReport::new("goal", goal_text(&d.from, goal), &v, sp, start.elapsed().as_millis() as u64);
            let mut r = report;
            r.obligations.push(o);
            Ok(if v.is_proved() { r.finish("Proved", 0) } else { r.finish("Unknown", 2) })
        }
        DirectiveKind::Decide => {
            let (sp, goal) = (p(0)?, d.goal.as_ref().ok_or_else(missing_goal)?);
            let start = Instant::now();
            let v = decide(sp, &d.from, goal, &budgets)?;
            let mut r = report;
            r.obligations.push(ObligationReport::new("goal", goal_text(&d.from, goal), &v, sp, start.elapsed().as_millis() as u64));
            Ok(match v {
                Verdict::Proved(_) => r.finish("Proved", 0),
                Verdict::Refuted(_) => r.finish("Refuted", 1),
                Verdict::Unknown(_) => r.finish("Unknown", 2),
            })
        }
        DirectiveKind::Countermodel => {
            let (sp, goal) = (p(0)?, d.goal.as_ref().ok_or_else(missing_goal)?);
            let start = Instant::now();
            let out = countermodel_search(sp, &d.from, goal, &budgets.models).map_err(RefinementError::from)?;
            let millis = start.elapsed().as_millis() as u64;
            let mut r = report;
            Ok(match out {
                SearchOutcome::Found(m) => {
                    r.obligations.push(ObligationReport::new("goal", goal_text(&d.from, goal), &Verdict::Refuted(m), sp, millis));
                    r.finish("Found", 0)
                }
                SearchOutcome::NotFound { exhaustive } => {
                    r.summary = Some(if exhaustive { "no countermodel within the size bounds" } else { "search cut short by its caps" }.into());
                    r.finish("NotFound", 2)
                }
            })
        }
        DirectiveKind::RefineInterp => {
            let (sp, sp2, tau) = (p(0)?, p(1)?, tr(0)?);
            Ok(report.certificate(&check_refinement_by_interpretation(sp, sp2, tau, &budgets)?, sp2))
        }
        DirectiveKind::RefineSigma => {
            let (sp, sp2) = (p(0)?, p(1)?);
            let sigma = doc.morphism(&d.via[0]).ok_or_else(|| RunError::Internal("morphism vanished".into()))?;
            Ok(report.certificate(&check_sigma_refinement(sp, sp2, sigma, &budgets)?, sp2))
        }
        DirectiveKind::RefineLogical => {
            let (l, l2) = (p(0)?, p(1)?);
            Ok(report.certificate(&check_logical_refinement(l, l2, &budgets)?, l2))
        }
        DirectiveKind::Interpret => {
            let (sp, sp2, tau) = (p(0)?, p(1)?, tr(0)?);
            let ir = check_interpretation(sp, tau, sp2, &budgets)?;
            let mut r = report.certificate(&ir.preservation, sp2);
            r.summary = Some(ir.summary.clone());
            Ok(match &ir.reflection {
                Reflection::Counterexample { sequent, witness } => {
                    r.obligations.push(reflection_obligation(sequent, witness));
                    r.finish("Failed", 1)
                }
                Reflection::CleanUpToBudget { .. } if ir.preservation.overall == Overall::Failed => r.finish("Failed", 1),
                Reflection::CleanUpToBudget { .. } => r.finish("Unknown", 2),
            })
        }
        DirectiveKind::Reflect => {
            let (sp, sp2, tau) = (p(0)?, p(1)?, tr(0)?);
            let mut r = report;
            Ok(match search_reflection_counterexample(sp, sp2, tau, &budgets)? {
                Some((sequent, witness)) => {
                    r.summary = Some(format!("{} does not reflect {}", tau.name, sequent));
                    r.obligations.push(reflection_obligation(&sequent, &witness));
                    r.finish("Failed", 1)
                }
                None => {
                    r.summary = Some(format!(
                        "no reflection counterexample among {} candidates up to depth {}",
                        budgets.reflection_candidates, budgets.reflection_depth
                    ));
                    r.finish("Unknown", 2)
                }
            })
        }
        DirectiveKind::Compose => {
            let (a, b, c) = (p(0)?, p(1)?, p(2)?);
            let (c1, c2) = if d.via.is_empty() {
                (check_logical_refinement(a, b, &budgets)?, check_logical_refinement(b, c, &budgets)?)
            } else {
                let (tau, rho) = (tr(0)?, tr(1)?);
                (check_refinement_by_interpretation(a, b, tau, &budgets)?, check_refinement_by_interpretation(b, c, rho, &budgets)?)
            };
            match vertical_compose(&c1, &c2) {
                Ok(cert) => {
                    let mut r = report.certificate(&cert, c);
                    // step-1 proofs live in the middle presentation
                    let n1 = c1.obligations.len();
                    for (o, src) in r.obligations.iter_mut().zip(&cert.obligations).take(n1) {
                        o.proof_text = src.verdict.proof().map(|pr| pr.render(b));
                    }
                    Ok(r)
                }
                Err(RefinementError::NotProved(step)) => {
                    let mut r = report;
                    for (tag, cert, tgt) in [("step1", &c1, b), ("step2", &c2, c)] {
                        for o in &cert.obligations {
                            let mut rep = ObligationReport::from_obligation(o, tgt);
                            rep.source = format!("{tag}:{}", rep.source);
                            r.obligations.push(rep);
                        }
                        r.assumptions.extend(cert.assumptions.iter().cloned());
                    }
                    r.summary = Some(format!("cannot compose: {step} is not proved"));
                    let failed = [&c1, &c2].iter().any(|c| c.overall == Overall::Failed);
                    Ok(if failed { r.finish("Failed", 1) } else { r.finish("Unknown", 2) })
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn reflection_obligation(sequent: &Sequent, witness: &FiniteKStructure) -> ObligationReport {
    ObligationReport {
        source: "reflection".into(),
        translated: sequent.to_string(),
        verdict: "Refuted".into(),
        proof: None,
        countermodel: Some(witness.clone()),
        exhaustion: None,
        millis: 0,
        proof_text: None,
    }
}

/// Run every directive of a document in order. The combined exit code is 1
/// if any directive failed, else 2 if any is undecided, else 0.
pub fn run_all(doc: &Document, global: &Overrides) -> Result<Vec<Report>, RunError> {
    doc.directives.iter().map(|d| run(d, doc, global)).collect()
}

pub fn combined_exit(reports: &[Report]) -> i32 {
    if reports.iter().any(|r| r.exit_code == 1) {
        1
    } else if reports.iter().any(|r| r.exit_code == 2) {
        2
    } else {
        0
    }
}
