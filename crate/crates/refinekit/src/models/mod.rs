//! Finite k-structures: evaluation, satisfaction, model checking,
//! enumeration, reducts, τ-models and countermodel search.

pub mod fixtures;
mod search;

pub use search::{countermodel_search, models_of, CountermodelOptions, ModelSearch, SearchOutcome};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deduction::Presentation;
use crate::sigterm::{free_variables, name, HasVars, KFormula, Name, Sequent, Signature, SortError, Term, Variable};
use crate::translation::{translate_sequent, SignatureMorphism, Translation, TranslationError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("variable `{0}` is unassigned")]
    UnassignedVariable(Name),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("search space too large: {0}")]
    Budget(String),
    #[error("malformed structure `{0}`: {1}")]
    Malformed(Name, String),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error(transparent)]
    Translation(#[from] TranslationError),
}

/// A finite algebra over carriers `0..n` with a filter per sort.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteKStructure {
    pub name: Name,
    pub signature: Signature,
    pub dim: usize,
    pub carriers: BTreeMap<Name, usize>,
    /// Row-major tables; argument tuples ordered lexicographically.
    pub tables: BTreeMap<Name, Vec<usize>>,
    pub filters: BTreeMap<Name, BTreeSet<Vec<usize>>>,
    /// Display names for elements, when the fixture provides them.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub element_names: BTreeMap<Name, Vec<String>>,
    /// Free-form labels such as "bounded approximation".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

/// Which filters a search or enumeration may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Only the diagonal `{(a, …, a)}`: ordinary algebras.
    Identity,
    /// Every subset of `A_s^k`.
    All,
}

impl FilterMode {
    /// Identity filters for dimension 2, arbitrary filters otherwise.
    pub fn default_for(dim: usize) -> FilterMode {
        if dim == 2 {
            FilterMode::Identity
        } else {
            FilterMode::All
        }
    }
}

pub fn diagonal(n: usize, k: usize) -> BTreeSet<Vec<usize>> {
    (0..n).map(|a| vec![a; k]).collect()
}

/// Number of rows of an operation table: product of argument carrier sizes.
pub(crate) fn rows(carriers: &BTreeMap<Name, usize>, args: &[Name]) -> usize {
    args.iter().map(|s| carriers.get(s).copied().unwrap_or(0)).product()
}

impl FiniteKStructure {
    /// Validate totality and ranges.
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::Malformed(self.name.clone(), m));
        for s in &self.signature.sorts {
            match self.carriers.get(s) {
                Some(&n) if n > 0 => {}
                _ => return bad(format!("carrier of `{s}` missing or empty")),
            }
        }
        for (op, prof) in &self.signature.ops {
            let Some(t) = self.tables.get(op) else {
                return bad(format!("no table for `{op}`"));
            };
            let r = rows(&self.carriers, &prof.args);
            if t.len() != r {
                return bad(format!("table of `{op}` has {} entries, expected {r}", t.len()));
            }
            let n = self.carriers[&prof.result];
            if let Some(v) = t.iter().find(|&&v| v >= n) {
                return bad(format!("table of `{op}` has out-of-range value {v}"));
            }
        }
        for (s, f) in &self.filters {
            let Some(&n) = self.carriers.get(s) else {
                return bad(format!("filter on unknown sort `{s}`"));
            };
            if f.iter().any(|t| t.len() != self.dim || t.iter().any(|&a| a >= n)) {
                return bad(format!("filter of `{s}` has a malformed tuple"));
            }
        }
        Ok(())
    }

    pub fn carrier(&self, sort: &str) -> usize {
        self.carriers.get(sort).copied().unwrap_or(0)
    }

    pub fn in_filter(&self, sort: &str, tuple: &[usize]) -> bool {
        self.filters.get(sort).is_some_and(|f| f.contains(tuple))
    }

    /// Replace every filter by the diagonal.
    pub fn with_identity_filters(mut self) -> Self {
        self.filters = self.carriers.iter().map(|(s, &n)| (s.clone(), diagonal(n, self.dim))).collect();
        self
    }

    pub fn has_identity_filters(&self) -> bool {
        self.carriers.iter().all(|(s, &n)| self.filters.get(s).map_or(n == 0, |f| *f == diagonal(n, self.dim)))
    }

    pub fn apply(&self, op: &str, args: &[usize]) -> usize {
        let prof = &self.signature.ops[op];
        let mut idx = 0;
        for (a, s) in args.iter().zip(&prof.args) {
            idx = idx * self.carriers[s] + a;
        }
        self.tables[op][idx]
    }

    pub fn element_name(&self, sort: &str, a: usize) -> String {
        self.element_names.get(sort).and_then(|v| v.get(a).cloned()).unwrap_or_else(|| a.to_string())
    }

    pub fn is_bounded_approximation(&self) -> bool {
        self.labels.iter().any(|l| l == "bounded approximation")
    }
}

impl fmt::Display for FiniteKStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure {} (dim {})", self.name, self.dim)?;
        for l in &self.labels {
            writeln!(f, "  [{l}]")?;
        }
        for (s, n) in &self.carriers {
            let els: Vec<String> = (0..*n).map(|a| self.element_name(s, a)).collect();
            writeln!(f, "  carrier {s} = {{{}}}", els.join(", "))?;
        }
        for (op, t) in &self.tables {
            let res = &self.signature.ops[op].result;
            let vals: Vec<String> = t.iter().map(|&v| self.element_name(res, v)).collect();
            writeln!(f, "  op {op} = [{}]", vals.join(", "))?;
        }
        for (s, fl) in &self.filters {
            if fl == &diagonal(self.carrier(s), self.dim) {
                writeln!(f, "  filter {s} = identity")?;
            } else {
                let tuples: Vec<String> = fl
                    .iter()
                    .map(|t| format!("<{}>", t.iter().map(|&a| self.element_name(s, a)).collect::<Vec<_>>().join(", ")))
                    .collect();
                writeln!(f, "  filter {s} = {{{}}}", tuples.join(", "))?;
            }
        }
        Ok(())
    }
}

/// Sort-respecting map from variables to carrier elements.
pub type Assignment = BTreeMap<Variable, usize>;

pub fn eval_term(m: &FiniteKStructure, h: &Assignment, t: &Term) -> Result<usize, ModelError> {
    match t {
        Term::Var(v) => h.get(v).copied().ok_or_else(|| ModelError::UnassignedVariable(v.name.clone())),
        Term::App(op, args) => {
            let vals = args.iter().map(|a| eval_term(m, h, a)).collect::<Result<Vec<_>, _>>()?;
            if !m.tables.contains_key(op) {
                return Err(SortError::UnknownOp(op.clone()).into());
            }
            Ok(m.apply(op, &vals))
        }
    }
}

pub fn holds(m: &FiniteKStructure, h: &Assignment, phi: &KFormula) -> Result<bool, ModelError> {
    let vals = phi.components.iter().map(|c| eval_term(m, h, c)).collect::<Result<Vec<_>, _>>()?;
    Ok(m.in_filter(&phi.sort, &vals))
}

/// Compiled form of a structure for repeated evaluation.
pub(crate) struct Evaluator<'a> {
    m: &'a FiniteKStructure,
    op_ids: BTreeMap<&'a Name, usize>,
    tables: Vec<&'a [usize]>,
    strides: Vec<Vec<usize>>,
}

/// Term with variables replaced by slot indices and operations by ids.
#[derive(Debug, Clone)]
pub(crate) enum CTerm {
    Var(usize),
    App(usize, Vec<CTerm>),
}

#[derive(Debug, Clone)]
pub(crate) struct CFormula {
    pub sort: Name,
    pub comps: Vec<CTerm>,
}

impl<'a> Evaluator<'a> {
    pub fn new(m: &'a FiniteKStructure) -> Self {
        let mut op_ids = BTreeMap::new();
        let mut tables = Vec::new();
        let mut strides = Vec::new();
        for (i, (op, prof)) in m.signature.ops.iter().enumerate() {
            op_ids.insert(op, i);
            tables.push(m.tables.get(op).map(Vec::as_slice).unwrap_or(&[]));
            let mut st = vec![1; prof.args.len()];
            for j in (0..prof.args.len().saturating_sub(1)).rev() {
                st[j] = st[j + 1] * m.carrier(&prof.args[j + 1]);
            }
            strides.push(st);
        }
        Evaluator { m, op_ids, tables, strides }
    }

    pub fn compile_term(&self, t: &Term, slots: &BTreeMap<Variable, usize>) -> Result<CTerm, ModelError> {
        Ok(match t {
            Term::Var(v) => CTerm::Var(*slots.get(v).ok_or_else(|| ModelError::UnassignedVariable(v.name.clone()))?),
            Term::App(op, args) => {
                let id = *self.op_ids.get(op).ok_or_else(|| SortError::UnknownOp(op.clone()))?;
                CTerm::App(id, args.iter().map(|a| self.compile_term(a, slots)).collect::<Result<_, _>>()?)
            }
        })
    }

    pub fn compile(&self, f: &KFormula, slots: &BTreeMap<Variable, usize>) -> Result<CFormula, ModelError> {
        Ok(CFormula { sort: f.sort.clone(), comps: f.components.iter().map(|c| self.compile_term(c, slots)).collect::<Result<_, _>>()? })
    }

    pub fn eval(&self, t: &CTerm, vals: &[usize]) -> usize {
        match t {
            CTerm::Var(i) => vals[*i],
            CTerm::App(op, args) => {
                let idx: usize = args.iter().zip(&self.strides[*op]).map(|(a, s)| self.eval(a, vals) * s).sum();
                self.tables[*op][idx]
            }
        }
    }

    pub fn holds(&self, f: &CFormula, vals: &[usize]) -> bool {
        let tuple: Vec<usize> = f.comps.iter().map(|c| self.eval(c, vals)).collect();
        self.m.in_filter(&f.sort, &tuple)
    }
}

/// Odometer over all assignments of `sizes`.
pub(crate) fn for_each_tuple(sizes: &[usize], mut f: impl FnMut(&[usize]) -> bool) {
    if sizes.contains(&0) {
        return;
    }
    let mut cur = vec![0; sizes.len()];
    loop {
        if !f(&cur) {
            return;
        }
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < sizes[k] {
                break;
            }
            cur[k] = 0;
        }
    }
}

fn slots_for<'x>(items: impl Iterator<Item = &'x KFormula>) -> (Vec<Variable>, BTreeMap<Variable, usize>) {
    let mut vars = BTreeSet::new();
    items.for_each(|f| f.collect_vars(&mut vars));
    let vars: Vec<Variable> = vars.into_iter().collect();
    let slots = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    (vars, slots)
}

/// An assignment satisfying every member of `gamma` and falsifying `phi`.
pub fn consequence_witness(m: &FiniteKStructure, gamma: &[KFormula], phi: &KFormula) -> Result<Option<Assignment>, ModelError> {
    Ok(falsifying_assignments(m, gamma, phi, 1)?.into_iter().next())
}

/// Up to `limit` falsifying assignments in lexicographic order.
pub fn falsifying_assignments(m: &FiniteKStructure, gamma: &[KFormula], phi: &KFormula, limit: usize) -> Result<Vec<Assignment>, ModelError> {
    let ev = Evaluator::new(m);
    let (vars, slots) = slots_for(gamma.iter().chain(std::iter::once(phi)));
    let cg: Vec<CFormula> = gamma.iter().map(|g| ev.compile(g, &slots)).collect::<Result<_, _>>()?;
    let cphi = ev.compile(phi, &slots)?;
    let sizes: Vec<usize> = vars.iter().map(|v| m.carrier(&v.sort)).collect();
    let mut out = Vec::new();
    for_each_tuple(&sizes, |vals| {
        if cg.iter().all(|g| ev.holds(g, vals)) && !ev.holds(&cphi, vals) {
            out.push(vars.iter().cloned().zip(vals.iter().copied()).collect());
        }
        out.len() < limit
    });
    Ok(out)
}

/// `Γ ⊨_M φ`: exhaustive over all assignments.
pub fn semantic_consequence(m: &FiniteKStructure, gamma: &[KFormula], phi: &KFormula) -> bool {
    matches!(consequence_witness(m, gamma, phi), Ok(None))
}

pub fn sequent_valid(m: &FiniteKStructure, s: &Sequent) -> bool {
    let gamma: Vec<KFormula> = s.premises.iter().cloned().collect();
    semantic_consequence(m, &gamma, &s.conclusion)
}

/// First axiom or rule of a presentation that a structure violates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelViolation {
    pub item: Name,
    pub statement: String,
    pub assignment: Vec<(String, usize)>,
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h: Vec<String> = self.assignment.iter().map(|(v, a)| format!("{v}={a}")).collect();
        write!(f, "{} ({}) fails at {{{}}}", self.item, self.statement, h.join(", "))
    }
}

fn check_interface(m: &FiniteKStructure, p: &Presentation) -> Result<(), ModelError> {
    if !p.signature.is_subsignature_of(&m.signature) || m.dim != p.dim {
        return Err(ModelError::SignatureMismatch(format!("structure {} does not interpret presentation {}", m.name, p.name)));
    }
    Ok(())
}

/// `None` when `m` is a model of `p`; otherwise the first violated item.
pub fn model_violation(m: &FiniteKStructure, p: &Presentation) -> Result<Option<ModelViolation>, ModelError> {
    check_interface(m, p)?;
    let items = p
        .axioms
        .iter()
        .map(|a| (a.name.clone(), Sequent::axiom(a.formula.clone())))
        .chain(p.rules.iter().map(|r| (r.name.clone(), r.sequent.clone())));
    for (item, s) in items {
        let gamma: Vec<KFormula> = s.premises.iter().cloned().collect();
        if let Some(h) = consequence_witness(m, &gamma, &s.conclusion)? {
            return Ok(Some(ModelViolation {
                item,
                statement: s.to_string(),
                assignment: h.into_iter().map(|(v, a)| (v.name.to_string(), a)).collect(),
            }));
        }
    }
    Ok(None)
}

pub fn is_model_of(m: &FiniteKStructure, p: &Presentation) -> bool {
    matches!(model_violation(m, p), Ok(None))
}

/// Pull a structure back along `sigma` (whose target is the structure's signature).
pub fn reduct(m: &FiniteKStructure, sigma: &SignatureMorphism) -> Result<FiniteKStructure, ModelError> {
    if !sigma.target.is_subsignature_of(&m.signature) {
        return Err(ModelError::SignatureMismatch(format!("morphism {} does not land in {}", sigma.name, m.name)));
    }
    let carriers = sigma.source.sorts.iter().map(|s| (s.clone(), m.carrier(&sigma.sort_map[s]))).collect();
    let tables = sigma.source.ops.keys().map(|o| (o.clone(), m.tables[&sigma.op_map[o]].clone())).collect();
    let filters = sigma
        .source
        .sorts
        .iter()
        .map(|s| (s.clone(), m.filters.get(&sigma.sort_map[s]).cloned().unwrap_or_default()))
        .collect();
    let element_names = sigma
        .source
        .sorts
        .iter()
        .filter_map(|s| m.element_names.get(&sigma.sort_map[s]).map(|n| (s.clone(), n.clone())))
        .collect();
    Ok(FiniteKStructure {
        name: name(&format!("{}|{}", m.name, sigma.name)),
        signature: sigma.source.clone(),
        dim: m.dim,
        carriers,
        tables,
        filters,
        element_names,
        labels: m.labels.clone(),
    })
}

/// Outcome of a τ-model check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauModel {
    True,
    False { probe: String, translated: String, assignment: Vec<(String, usize)> },
    Unknown(String),
}

/// Does `m` satisfy the τ-image of every probe? Probes default to the
/// source presentation's axioms and rules.
pub fn is_tau_model(m: &FiniteKStructure, sp: &Presentation, tau: &Translation, probes: Option<&[Sequent]>) -> Result<TauModel, ModelError> {
    if !tau.target.is_subsignature_of(&m.signature) || tau.target_dim != m.dim {
        return Err(ModelError::SignatureMismatch(format!("structure {} is not over the target of {}", m.name, tau.name)));
    }
    let default: Vec<Sequent>;
    let probes = match probes {
        Some(p) => p,
        None => {
            default = sp
                .axioms
                .iter()
                .map(|a| Sequent::axiom(a.formula.clone()))
                .chain(sp.rules.iter().map(|r| r.sequent.clone()))
                .collect();
            &default
        }
    };
    for xi in probes {
        for t in translate_sequent(tau, xi)? {
            let gamma: Vec<KFormula> = t.premises.iter().cloned().collect();
            if let Some(h) = consequence_witness(m, &gamma, &t.conclusion)? {
                return Ok(TauModel::False {
                    probe: xi.to_string(),
                    translated: t.to_string(),
                    assignment: h.into_iter().map(|(v, a)| (v.name.to_string(), a)).collect(),
                });
            }
        }
    }
    Ok(TauModel::True)
}

/// Number of structures `enumerate_structures` would produce.
pub fn structure_count(sig: &Signature, k: usize, sizes: &BTreeMap<Name, usize>, mode: FilterMode) -> Option<u128> {
    let mut total: u128 = 1;
    for prof in sig.ops.values() {
        let r = rows(sizes, &prof.args) as u32;
        let n = *sizes.get(&prof.result)? as u128;
        total = total.checked_mul(n.checked_pow(r)?)?;
    }
    if mode == FilterMode::All {
        for s in &sig.sorts {
            let n = *sizes.get(s)? as u32;
            let bits = n.checked_pow(k as u32)?;
            total = total.checked_mul(2u128.checked_pow(bits)?)?;
        }
    }
    Some(total)
}

/// Exhaustive lexicographic stream of structures with exactly the given
/// carrier sizes: tables first (operations by name, rows in order), then filters.
pub struct StructureStream {
    template: FiniteKStructure,
    cells: Vec<(Option<Name>, Name, usize, usize)>,
    filter_tuples: BTreeMap<Name, Vec<Vec<usize>>>,
    cur: Vec<usize>,
    done: bool,
}

impl Iterator for StructureStream {
    type Item = FiniteKStructure;

    fn next(&mut self) -> Option<FiniteKStructure> {
        if self.done {
            return None;
        }
        let mut m = self.template.clone();
        for ((op, sort, idx, _), &v) in self.cells.iter().zip(&self.cur) {
            match op {
                Some(op) => m.tables.get_mut(op).expect("table")[*idx] = v,
                None => {
                    if v == 1 {
                        let t = self.filter_tuples[sort][*idx].clone();
                        m.filters.get_mut(sort).expect("filter").insert(t);
                    }
                }
            }
        }
        // advance the odometer, last cell fastest
        let mut k = self.cur.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.cur[k] += 1;
            if self.cur[k] < self.cells[k].3 {
                break;
            }
            self.cur[k] = 0;
        }
        Some(m)
    }
}

/// Enumerate every structure of exactly `sizes`; fails when more than `cap`
/// structures would be produced.
pub fn enumerate_structures(sig: &Signature, k: usize, sizes: &BTreeMap<Name, usize>, mode: FilterMode, cap: u128) -> Result<StructureStream, ModelError> {
    for s in &sig.sorts {
        if sizes.get(s).copied().unwrap_or(0) == 0 {
            return Err(ModelError::Budget(format!("no positive size for sort `{s}`")));
        }
    }
    let count = structure_count(sig, k, sizes, mode).unwrap_or(u128::MAX);
    if count > cap {
        return Err(ModelError::Budget(format!("{count} structures exceed the bound {cap}")));
    }
    let carriers: BTreeMap<Name, usize> = sig.sorts.iter().map(|s| (s.clone(), sizes[s])).collect();
    let mut cells = Vec::new();
    let mut tables = BTreeMap::new();
    for (op, prof) in &sig.ops {
        let r = rows(&carriers, &prof.args);
        tables.insert(op.clone(), vec![0; r]);
        for i in 0..r {
            cells.push((Some(op.clone()), prof.result.clone(), i, carriers[&prof.result]));
        }
    }
    let mut filter_tuples = BTreeMap::new();
    let mut filters = BTreeMap::new();
    for (s, &n) in &carriers {
        match mode {
            FilterMode::Identity => {
                filters.insert(s.clone(), diagonal(n, k));
            }
            FilterMode::All => {
                let mut tuples = Vec::new();
                for_each_tuple(&vec![n; k], |t| {
                    tuples.push(t.to_vec());
                    true
                });
                for i in 0..tuples.len() {
                    cells.push((None, s.clone(), i, 2));
                }
                filter_tuples.insert(s.clone(), tuples);
                filters.insert(s.clone(), BTreeSet::new());
            }
        }
    }
    let template = FiniteKStructure {
        name: name("enumerated"),
        signature: sig.clone(),
        dim: k,
        carriers,
        tables,
        filters,
        element_names: BTreeMap::new(),
        labels: Vec::new(),
    };
    let cur = vec![0; cells.len()];
    Ok(StructureStream { template, cells, filter_tuples, cur, done: false })
}

/// All size vectors with every sort between 1 and its bound, in ascending
/// order of total size, then lexicographically.
pub fn size_vectors(sig: &Signature, max: &BTreeMap<Name, usize>) -> Vec<BTreeMap<Name, usize>> {
    let sorts: Vec<&Name> = sig.sorts.iter().collect();
    let bounds: Vec<usize> = sorts.iter().map(|s| max.get(*s).copied().unwrap_or(1).max(1)).collect();
    let mut out = Vec::new();
    for_each_tuple(&bounds, |t| {
        out.push(sorts.iter().zip(t).map(|(s, &n)| ((*s).clone(), n + 1)).collect::<BTreeMap<_, _>>());
        true
    });
    out.sort_by_key(|m: &BTreeMap<Name, usize>| (m.values().sum::<usize>(), m.values().copied().collect::<Vec<_>>()));
    out
}

/// Variables of a sequent list, for diagnostics.
pub fn query_vars(gamma: &[KFormula], phi: &KFormula) -> BTreeSet<Variable> {
    let mut v = free_variables(phi);
    gamma.iter().for_each(|g| g.collect_vars(&mut v));
    v
}

#[cfg(test)]
mod tests {
    use super::fixtures::{boolean2, heyting_chain, lattice_sig};
    use super::*;
    use crate::deduction::free_equational_presentation;

    fn unary_sig() -> Signature {
        Signature::new().with_sort("s").with_op("f", &["s"], "s")
    }

    fn swap() -> FiniteKStructure {
        FiniteKStructure {
            name: name("swap"),
            signature: unary_sig(),
            dim: 2,
            carriers: [(name("s"), 2)].into_iter().collect(),
            tables: [(name("f"), vec![1, 0])].into_iter().collect(),
            filters: [(name("s"), diagonal(2, 2))].into_iter().collect(),
            element_names: BTreeMap::new(),
            labels: vec![],
        }
    }

    fn b(n: &str) -> Term {
        Term::var(n, "bool")
    }

    #[test]
    fn variable_evaluates_to_assignment() {
        let m = swap();
        let h: Assignment = [(Variable::new("x", "s"), 1)].into_iter().collect();
        assert_eq!(eval_term(&m, &h, &Term::var("x", "s")).unwrap(), 1);
        assert!(matches!(eval_term(&m, &Assignment::new(), &Term::var("y", "s")), Err(ModelError::UnassignedVariable(_))));
    }

    #[test]
    fn excluded_middle_in_two_element_algebra() {
        let m = boolean2();
        let h: Assignment = [(Variable::new("p", "bool"), 1)].into_iter().collect();
        let t = Term::app("\\/", vec![b("p"), Term::app("!", vec![b("p")])]);
        assert_eq!(eval_term(&m, &h, &t).unwrap(), 1);
        let contra = KFormula::raw(name("bool"), vec![Term::app("/\\", vec![b("p"), Term::app("!", vec![b("p")])]), Term::constant("tt")]);
        assert!(!holds(&m, &h, &contra).unwrap());
    }

    #[test]
    fn double_negation_in_three_chain() {
        let m = heyting_chain(3);
        let h: Assignment = [(Variable::new("p", "bool"), 1)].into_iter().collect();
        let nn = Term::app("!", vec![Term::app("!", vec![b("p")])]);
        assert_eq!(eval_term(&m, &h, &nn).unwrap(), 2);
        let nnlem = KFormula::raw(
            name("bool"),
            vec![
                Term::app("!", vec![Term::app("!", vec![Term::app("\\/", vec![b("p"), Term::app("!", vec![b("p")])])])]),
                Term::app("!", vec![Term::app("!", vec![Term::constant("tt")])]),
            ],
        );
        assert!(semantic_consequence(&m, &[], &nnlem));
    }

    #[test]
    fn swap_refutes_fixpoint() {
        let m = swap();
        let f = KFormula::raw(name("s"), vec![Term::app("f", vec![Term::var("x", "s")]), Term::var("x", "s")]);
        assert!(!semantic_consequence(&m, &[], &f));
        assert!(semantic_consequence(&m, std::slice::from_ref(&f), &f));
        assert!(is_model_of(&m, &free_equational_presentation(&unary_sig())));
    }

    #[test]
    fn reflexivity_under_identity_filter() {
        let m = heyting_chain(4);
        let t = Term::app("->", vec![b("p"), b("q")]);
        let f = KFormula::raw(name("bool"), vec![t.clone(), t]);
        assert!(semantic_consequence(&m, &[], &f));
    }

    #[test]
    fn enumeration_counts() {
        let sizes = |n| [(name("s"), n)].into_iter().collect::<BTreeMap<_, _>>();
        assert_eq!(enumerate_structures(&unary_sig(), 2, &sizes(2), FilterMode::Identity, 1000).unwrap().count(), 4);
        let bare = Signature::new().with_sort("s");
        assert_eq!(enumerate_structures(&bare, 2, &sizes(1), FilterMode::All, 1000).unwrap().count(), 2);
        let constant = Signature::new().with_sort("s").with_op("c", &[], "s");
        assert_eq!(enumerate_structures(&constant, 2, &sizes(2), FilterMode::Identity, 1000).unwrap().count(), 2);
        assert!(matches!(enumerate_structures(&unary_sig(), 2, &sizes(3), FilterMode::Identity, 5), Err(ModelError::Budget(_))));
    }

    #[test]
    fn enumeration_matches_closed_form() {
        let sig = Signature::new().with_sort("s").with_sort("t").with_op("g", &["s", "t"], "s").with_op("c", &[], "t");
        let sizes: BTreeMap<Name, usize> = [(name("s"), 2), (name("t"), 2)].into_iter().collect();
        // g: 2^(2*2) tables, c: 2 choices
        let n = enumerate_structures(&sig, 2, &sizes, FilterMode::Identity, 10_000).unwrap().count();
        assert_eq!(n, 16 * 2);
        assert_eq!(structure_count(&sig, 2, &sizes, FilterMode::Identity), Some(32));
    }

    #[test]
    fn identity_reduct() {
        let m = heyting_chain(3);
        let id = SignatureMorphism::identity(&m.signature);
        let r = reduct(&m, &id).unwrap();
        assert_eq!((r.carriers, r.tables, r.filters), (m.carriers.clone(), m.tables.clone(), m.filters.clone()));
    }

    #[test]
    fn inclusion_reduct_forgets() {
        let small = lattice_sig();
        let m = heyting_chain(3);
        let inc = SignatureMorphism::inclusion(&small, &m.signature).unwrap();
        let r = reduct(&m, &inc).unwrap();
        assert!(r.tables.contains_key("/\\"));
        assert!(!r.tables.contains_key("->"));
    }

    #[test]
    fn size_vectors_ascend() {
        let sig = Signature::new().with_sort("a").with_sort("b");
        let max: BTreeMap<Name, usize> = [(name("a"), 2), (name("b"), 2)].into_iter().collect();
        let v = size_vectors(&sig, &max);
        assert_eq!(v.len(), 4);
        assert_eq!(v[0].values().sum::<usize>(), 2);
        assert_eq!(v[3].values().sum::<usize>(), 4);
    }
}
