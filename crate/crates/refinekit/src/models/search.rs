//! Backtracking model finder.
//!
//! Unknowns ("cells") are the operation-table entries, ops by name and rows
//! in order, followed by filter membership bits when filters are free. Every
//! axiom and rule is grounded over all assignments into a clause
//! `premises -> conclusion`; each clause watches the first unset cell its
//! evaluation ran into and is re-examined only when that cell is assigned.
//! Values are tried in increasing order, so the first model found is the
//! lexicographically least one.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    diagonal, falsifying_assignments, for_each_tuple, is_model_of, reduct, rows, size_vectors, CTerm, FilterMode,
    FiniteKStructure, ModelError,
};
use crate::deduction::{ItemKind, Presentation};
use crate::par;
use crate::sigterm::{name, HasVars, KFormula, Name, Signature, Variable};
use crate::translation::SignatureMorphism;

const UNSET: u8 = u8::MAX;

#[derive(Debug, Clone)]
struct CAtom {
    sort: usize,
    comps: Vec<CTerm>,
}

/// `premises -> conclusion`; a missing conclusion means falsum.
#[derive(Debug, Clone)]
struct Template {
    premises: Vec<CAtom>,
    conclusion: Option<CAtom>,
}

#[derive(Debug, Clone)]
struct Clause {
    template: usize,
    vals: Vec<u8>,
}

enum Status {
    Satisfied,
    Violated,
    Pending(usize),
}

enum Trail {
    Moved(usize),
    Taken(usize, Vec<u32>),
}

enum Flow {
    Continue,
    Stop,
    Abort,
}

/// A grounded model-finding problem over fixed carrier sizes.
pub struct ModelSearch {
    sig: Signature,
    dim: usize,
    carriers: BTreeMap<Name, usize>,
    mode: FilterMode,
    sort_sizes: Vec<usize>,
    sort_names: Vec<Name>,
    op_base: Vec<usize>,
    op_strides: Vec<Vec<usize>>,
    filter_base: Vec<usize>,
    domains: Vec<u8>,
    templates: Vec<Template>,
    clauses: Vec<Clause>,
    /// Set when some ground clause fails before any cell is assigned.
    trivially_unsat: bool,
    pub node_cap: u64,
}

struct State {
    vals: Vec<u8>,
    watches: Vec<Vec<u32>>,
    trail: Vec<Trail>,
    nodes: u64,
}

impl ModelSearch {
    pub fn new(sig: &Signature, dim: usize, carriers: &BTreeMap<Name, usize>, mode: FilterMode) -> Result<Self, ModelError> {
        let sort_names: Vec<Name> = sig.sorts.iter().cloned().collect();
        let mut sort_sizes = Vec::new();
        for s in &sort_names {
            match carriers.get(s) {
                Some(&n) if n > 0 && n < UNSET as usize => sort_sizes.push(n),
                _ => return Err(ModelError::Budget(format!("carrier size for `{s}` must be between 1 and 254"))),
            }
        }
        let sort_id = |s: &Name| sort_names.iter().position(|x| x == s).expect("declared sort");
        let mut domains = Vec::new();
        let mut op_base = Vec::new();
        let mut op_strides = Vec::new();
        for prof in sig.ops.values() {
            op_base.push(domains.len());
            let r = rows(carriers, &prof.args);
            let n = carriers[&prof.result] as u8;
            domains.extend(std::iter::repeat(n).take(r));
            let mut st = vec![1; prof.args.len()];
            for j in (0..prof.args.len().saturating_sub(1)).rev() {
                st[j] = st[j + 1] * carriers[&prof.args[j + 1]];
            }
            op_strides.push(st);
        }
        let mut filter_base = Vec::new();
        if mode == FilterMode::All {
            for &n in &sort_sizes {
                filter_base.push(domains.len());
                domains.extend(std::iter::repeat(2).take(n.pow(dim as u32)));
            }
        }
        let _ = sort_id;
        Ok(ModelSearch {
            sig: sig.clone(),
            dim,
            carriers: carriers.clone(),
            mode,
            sort_sizes,
            sort_names,
            op_base,
            op_strides,
            filter_base,
            domains,
            templates: Vec::new(),
            clauses: Vec::new(),
            trivially_unsat: false,
            node_cap: 2_000_000,
        })
    }

    pub fn cells(&self) -> usize {
        self.domains.len()
    }

    fn compile_term(&self, t: &crate::sigterm::Term, slots: &BTreeMap<Variable, usize>) -> Result<CTerm, ModelError> {
        use crate::sigterm::Term;
        Ok(match t {
            Term::Var(v) => CTerm::Var(*slots.get(v).ok_or_else(|| ModelError::UnassignedVariable(v.name.clone()))?),
            Term::App(op, args) => {
                let id = self.sig.ops.keys().position(|o| o == op).ok_or_else(|| crate::sigterm::SortError::UnknownOp(op.clone()))?;
                CTerm::App(id, args.iter().map(|a| self.compile_term(a, slots)).collect::<Result<_, _>>()?)
            }
        })
    }

    fn compile(&self, f: &KFormula, slots: &BTreeMap<Variable, usize>) -> Result<CAtom, ModelError> {
        let sort = self.sort_names.iter().position(|s| *s == f.sort).ok_or_else(|| crate::sigterm::SortError::UnknownSort(f.sort.clone()))?;
        Ok(CAtom { sort, comps: f.components.iter().map(|c| self.compile_term(c, slots)).collect::<Result<_, _>>()? })
    }

    /// Require `premises -> conclusion` under every assignment
    /// (`conclusion = None` forbids the premises from holding together).
    pub fn require(&mut self, premises: &[KFormula], conclusion: Option<&KFormula>) -> Result<(), ModelError> {
        self.require_at(premises, conclusion, None)
    }

    /// As `require`, but only under the single assignment `fixed`.
    pub fn require_at(&mut self, premises: &[KFormula], conclusion: Option<&KFormula>, fixed: Option<&BTreeMap<Variable, usize>>) -> Result<(), ModelError> {
        let mut vars = BTreeSet::new();
        premises.iter().chain(conclusion).for_each(|f| f.collect_vars(&mut vars));
        let vars: Vec<Variable> = vars.into_iter().collect();
        let slots: BTreeMap<Variable, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let template = Template {
            premises: premises.iter().map(|p| self.compile(p, &slots)).collect::<Result<_, _>>()?,
            conclusion: conclusion.map(|c| self.compile(c, &slots)).transpose()?,
        };
        let tid = self.templates.len();
        self.templates.push(template);
        match fixed {
            Some(h) => {
                let vals = vars.iter().map(|v| h.get(v).copied().unwrap_or(0) as u8).collect();
                self.clauses.push(Clause { template: tid, vals });
            }
            None => {
                let sizes: Vec<usize> = vars
                    .iter()
                    .map(|v| self.carriers.get(&v.sort).copied().ok_or_else(|| crate::sigterm::SortError::UnknownSort(v.sort.clone())))
                    .collect::<Result<_, _>>()?;
                let mut new = Vec::new();
                for_each_tuple(&sizes, |t| {
                    new.push(Clause { template: tid, vals: t.iter().map(|&a| a as u8).collect() });
                    true
                });
                self.clauses.extend(new);
            }
        }
        Ok(())
    }

    /// Add every axiom and rule of `p`. With identity filters the equality
    /// machinery holds automatically and is skipped.
    pub fn require_presentation(&mut self, p: &Presentation) -> Result<(), ModelError> {
        let skip_eq = self.mode == FilterMode::Identity && self.dim == 2;
        for a in &p.axioms {
            if !(skip_eq && a.kind == ItemKind::Equality) {
                self.require(&[], Some(&a.formula))?;
            }
        }
        for r in &p.rules {
            if !(skip_eq && r.kind == ItemKind::Equality) {
                let prem: Vec<KFormula> = r.sequent.premises.iter().cloned().collect();
                self.require(&prem, Some(&r.sequent.conclusion))?;
            }
        }
        Ok(())
    }

    fn eval(&self, t: &CTerm, env: &[u8], vals: &[u8]) -> Result<u8, usize> {
        match t {
            CTerm::Var(i) => Ok(env[*i]),
            CTerm::App(op, args) => {
                let mut idx = self.op_base[*op];
                for (a, s) in args.iter().zip(&self.op_strides[*op]) {
                    idx += self.eval(a, env, vals)? as usize * s;
                }
                match vals[idx] {
                    UNSET => Err(idx),
                    v => Ok(v),
                }
            }
        }
    }

    fn atom(&self, a: &CAtom, env: &[u8], vals: &[u8]) -> Result<bool, usize> {
        let mut tuple = Vec::with_capacity(a.comps.len());
        for c in &a.comps {
            tuple.push(self.eval(c, env, vals)?);
        }
        match self.mode {
            FilterMode::Identity => Ok(tuple.windows(2).all(|w| w[0] == w[1])),
            FilterMode::All => {
                let n = self.sort_sizes[a.sort];
                let idx = self.filter_base[a.sort] + tuple.iter().fold(0, |acc, &v| acc * n + v as usize);
                match vals[idx] {
                    UNSET => Err(idx),
                    v => Ok(v == 1),
                }
            }
        }
    }

    fn status(&self, c: &Clause, vals: &[u8]) -> Status {
        let t = &self.templates[c.template];
        let mut pending = None;
        for p in &t.premises {
            match self.atom(p, &c.vals, vals) {
                Ok(false) => return Status::Satisfied,
                Ok(true) => {}
                Err(cell) => pending = pending.or(Some(cell)),
            }
        }
        if let Some(concl) = &t.conclusion {
            match self.atom(concl, &c.vals, vals) {
                Ok(true) => return Status::Satisfied,
                Ok(false) => {}
                Err(cell) => pending = pending.or(Some(cell)),
            }
        }
        match pending {
            Some(cell) => Status::Pending(cell),
            None => Status::Violated,
        }
    }

    fn initial_state(&self) -> Option<State> {
        let vals = vec![UNSET; self.cells()];
        let mut watches = vec![Vec::new(); self.cells()];
        for (i, c) in self.clauses.iter().enumerate() {
            match self.status(c, &vals) {
                Status::Satisfied => {}
                Status::Violated => return None,
                Status::Pending(cell) => watches[cell].push(i as u32),
            }
        }
        Some(State { vals, watches, trail: Vec::new(), nodes: 0 })
    }

    /// Assign and propagate; false on conflict. Undo with `undo_to`.
    fn assign(&self, st: &mut State, cell: usize, v: u8) -> bool {
        st.vals[cell] = v;
        let list = std::mem::take(&mut st.watches[cell]);
        let mut ok = true;
        for &ci in &list {
            match self.status(&self.clauses[ci as usize], &st.vals) {
                Status::Satisfied => {}
                Status::Violated => {
                    ok = false;
                    break;
                }
                Status::Pending(c2) => {
                    st.watches[c2].push(ci);
                    st.trail.push(Trail::Moved(c2));
                }
            }
        }
        st.trail.push(Trail::Taken(cell, list));
        ok
    }

    fn undo_to(&self, st: &mut State, mark: usize, cell: usize) {
        while st.trail.len() > mark {
            match st.trail.pop().expect("trail entry") {
                Trail::Moved(c) => {
                    st.watches[c].pop();
                }
                Trail::Taken(c, list) => st.watches[c] = list,
            }
        }
        st.vals[cell] = UNSET;
    }

    fn dfs(&self, st: &mut State, cell: usize, order: &mut Option<ChaCha8Rng>, on_model: &mut dyn FnMut(&[u8]) -> bool) -> Flow {
        if cell == self.cells() {
            return if on_model(&st.vals) { Flow::Continue } else { Flow::Stop };
        }
        let mut values: Vec<u8> = (0..self.domains[cell]).collect();
        if let Some(rng) = order.as_mut() {
            values.shuffle(rng);
        }
        for v in values {
            st.nodes += 1;
            if st.nodes > self.node_cap {
                return Flow::Abort;
            }
            let mark = st.trail.len();
            if self.assign(st, cell, v) {
                match self.dfs(st, cell + 1, order, on_model) {
                    Flow::Continue => {}
                    other => {
                        self.undo_to(st, mark, cell);
                        return other;
                    }
                }
            }
            self.undo_to(st, mark, cell);
        }
        Flow::Continue
    }

    /// The lexicographically least model, searching the first cell's values
    /// in parallel. `Err(())` when the node cap stopped a branch before any
    /// smaller branch succeeded.
    /// `Err` when a node or time cap aborted the search.
    pub(crate) fn first_model(&self) -> Result<Option<FiniteKStructure>, ()> {
        if self.trivially_unsat {
            return Ok(None);
        }
        let Some(init) = self.initial_state() else {
            return Ok(None);
        };
        if self.cells() == 0 {
            return Ok(Some(self.build(&init.vals)));
        }
        let branches = par::map_range(self.domains[0] as usize, |v| {
            let mut st = State { vals: init.vals.clone(), watches: init.watches.clone(), trail: Vec::new(), nodes: 0 };
            if !self.assign(&mut st, 0, v as u8) {
                return Ok(None);
            }
            let mut found = None;
            let flow = self.dfs(&mut st, 1, &mut None, &mut |vals| {
                found = Some(vals.to_vec());
                false
            });
            match (found, flow) {
                (Some(v), _) => Ok(Some(v)),
                (None, Flow::Abort) => Err(()),
                (None, _) => Ok(None),
            }
        });
        for b in branches {
            match b {
                Ok(Some(vals)) => return Ok(Some(self.build(&vals))),
                Ok(None) => {}
                Err(()) => return Err(()),
            }
        }
        Ok(None)
    }

    /// Every model in lexicographic order, up to `limit`. The flag reports
    /// whether the enumeration was exhaustive.
    pub fn all_models(&self, limit: usize) -> (Vec<FiniteKStructure>, bool) {
        let Some(mut st) = self.initial_state() else {
            return (Vec::new(), true);
        };
        let mut out = Vec::new();
        let flow = self.dfs(&mut st, 0, &mut None, &mut |vals| {
            out.push(self.build(vals));
            out.len() < limit
        });
        let complete = matches!(flow, Flow::Continue);
        (out, complete)
    }

    /// Up to `count` models found by randomized depth-first descents.
    pub fn sample_models(&self, count: usize, seed: u64) -> Vec<FiniteKStructure> {
        let mut out: Vec<FiniteKStructure> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let Some(mut st) = self.initial_state() else {
                return out;
            };
            let mut order = Some(ChaCha8Rng::seed_from_u64(rand::Rng::gen(&mut rng)));
            let mut found = None;
            self.dfs(&mut st, 0, &mut order, &mut |vals| {
                found = Some(self.build(vals));
                false
            });
            if let Some(m) = found {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        out
    }

    fn build(&self, vals: &[u8]) -> FiniteKStructure {
        let mut tables = BTreeMap::new();
        for (i, (op, prof)) in self.sig.ops.iter().enumerate() {
            let r = rows(&self.carriers, &prof.args);
            let base = self.op_base[i];
            tables.insert(op.clone(), vals[base..base + r].iter().map(|&v| v as usize).collect());
        }
        let mut filters = BTreeMap::new();
        for (si, s) in self.sort_names.iter().enumerate() {
            let n = self.sort_sizes[si];
            let f = match self.mode {
                FilterMode::Identity => diagonal(n, self.dim),
                FilterMode::All => {
                    let mut set = BTreeSet::new();
                    let base = self.filter_base[si];
                    let mut idx = 0;
                    for_each_tuple(&vec![n; self.dim], |t| {
                        if vals[base + idx] == 1 {
                            set.insert(t.to_vec());
                        }
                        idx += 1;
                        true
                    });
                    set
                }
            };
            filters.insert(s.clone(), f);
        }
        FiniteKStructure {
            name: name("model"),
            signature: self.sig.clone(),
            dim: self.dim,
            carriers: self.carriers.clone(),
            tables,
            filters,
            element_names: BTreeMap::new(),
            labels: Vec::new(),
        }
    }
}

/// Models of `p` with exactly the given carrier sizes.
pub fn models_of(p: &Presentation, sizes: &BTreeMap<Name, usize>, mode: FilterMode, limit: usize, node_cap: u64) -> Result<(Vec<FiniteKStructure>, bool), ModelError> {
    let mut s = ModelSearch::new(&p.signature, p.dim, sizes, mode)?;
    s.node_cap = node_cap;
    s.require_presentation(p)?;
    Ok(s.all_models(limit))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountermodelOptions {
    /// Per-sort carrier bounds; sorts not listed use `default_max`.
    pub max_sizes: BTreeMap<Name, usize>,
    pub default_max: usize,
    /// Filter discipline; `None` picks identity for dimension 2.
    pub filter_mode: Option<FilterMode>,
    /// Named structures tried before any search, in order.
    pub fixtures: Vec<FiniteKStructure>,
    pub node_cap: u64,
    pub time_cap_ms: u64,
}

impl Default for CountermodelOptions {
    fn default() -> Self {
        CountermodelOptions {
            max_sizes: BTreeMap::new(),
            default_max: 3,
            filter_mode: None,
            fixtures: Vec::new(),
            node_cap: 200_000,
            time_cap_ms: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchOutcome {
    Found(Box<FiniteKStructure>),
    /// No countermodel within the bounds; `exhaustive` is false when a node
    /// or time cap cut the search short.
    NotFound { exhaustive: bool },
}

impl SearchOutcome {
    pub fn structure(&self) -> Option<&FiniteKStructure> {
        match self {
            SearchOutcome::Found(m) => Some(m),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

fn fixture_over(m: &FiniteKStructure, p: &Presentation) -> Option<FiniteKStructure> {
    if m.dim != p.dim || !p.signature.is_subsignature_of(&m.signature) {
        return None;
    }
    if m.signature == p.signature {
        return Some(m.clone());
    }
    let inc = SignatureMorphism::inclusion(&p.signature, &m.signature).ok()?;
    let mut r = reduct(m, &inc).ok()?;
    r.name = m.name.clone();
    Some(r)
}

/// A model of `p` in which `gamma` does not entail `phi`.
///
/// Fixtures are tried first. Then carrier sizes grow; at the first size level
/// with countermodels, the one falsifying the query under the most
/// assignments is returned (ties: least tables).
pub fn countermodel_search(p: &Presentation, gamma: &[KFormula], phi: &KFormula, opts: &CountermodelOptions) -> Result<SearchOutcome, ModelError> {
    for f in gamma.iter().chain(std::iter::once(phi)) {
        p.check_formula(f).map_err(|e| ModelError::SignatureMismatch(e.to_string()))?;
    }
    let deadline = Instant::now() + Duration::from_millis(opts.time_cap_ms);
    for fx in &opts.fixtures {
        if let Some(m) = fixture_over(fx, p) {
            if is_model_of(&m, p) && !falsifying_assignments(&m, gamma, phi, 1)?.is_empty() {
                return Ok(SearchOutcome::Found(Box::new(m)));
            }
        }
    }
    let mode = opts.filter_mode.unwrap_or(FilterMode::default_for(p.dim));
    let max: BTreeMap<Name, usize> = p
        .signature
        .sorts
        .iter()
        .map(|s| (s.clone(), opts.max_sizes.get(s).copied().unwrap_or(opts.default_max)))
        .collect();
    let mut qvars = BTreeSet::new();
    gamma.iter().chain(std::iter::once(phi)).for_each(|f| f.collect_vars(&mut qvars));
    let qvars: Vec<Variable> = qvars.into_iter().collect();
    let mut exhaustive = true;
    for sizes in size_vectors(&p.signature, &max) {
        if Instant::now() >= deadline {
            return Ok(SearchOutcome::NotFound { exhaustive: false });
        }
        let mut base = ModelSearch::new(&p.signature, p.dim, &sizes, mode)?;
        base.node_cap = opts.node_cap;
        base.require_presentation(p)?;
        let qsizes: Vec<usize> = qvars.iter().map(|v| sizes[&v.sort]).collect();
        let mut assignments = Vec::new();
        for_each_tuple(&qsizes, |t| {
            assignments.push(qvars.iter().cloned().zip(t.iter().copied()).collect::<BTreeMap<_, _>>());
            true
        });
        let mut candidates: Vec<FiniteKStructure> = Vec::new();
        for h in &assignments {
            if Instant::now() >= deadline {
                exhaustive = false;
                break;
            }
            let mut s = ModelSearch { templates: base.templates.clone(), clauses: base.clauses.clone(), ..ModelSearch::new(&p.signature, p.dim, &sizes, mode)? };
            s.node_cap = opts.node_cap;
            for g in gamma {
                s.require_at(&[], Some(g), Some(h))?;
            }
            s.require_at(std::slice::from_ref(phi), None, Some(h))?;
            match s.first_model() {
                Ok(Some(m)) => {
                    if !candidates.contains(&m) {
                        candidates.push(m);
                    }
                }
                Ok(None) => {}
                Err(()) => exhaustive = false,
            }
        }
        if !candidates.is_empty() {
            let mut best: Option<(usize, FiniteKStructure)> = None;
            for m in candidates {
                let n = falsifying_assignments(&m, gamma, phi, usize::MAX)?.len();
                let better = match &best {
                    None => true,
                    Some((bn, bm)) => n > *bn || (n == *bn && m.tables < bm.tables),
                };
                if better {
                    best = Some((n, m));
                }
            }
            let (_, mut m) = best.expect("nonempty");
            m.name = name("countermodel");
            return Ok(SearchOutcome::Found(Box::new(m)));
        }
    }
    Ok(SearchOutcome::NotFound { exhaustive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{free_equational_presentation, horn_presentation};
    use crate::models::fixtures::bool_sig;
    use crate::models::semantic_consequence;
    use crate::sigterm::{Signature, Term};

    fn unary() -> Signature {
        Signature::new().with_sort("s").with_op("f", &["s"], "s")
    }

    fn fx_is_x() -> KFormula {
        KFormula::raw(name("s"), vec![Term::app("f", vec![Term::var("x", "s")]), Term::var("x", "s")])
    }

    #[test]
    fn swap_is_preferred() {
        let p = free_equational_presentation(&unary());
        let opts = CountermodelOptions { default_max: 2, ..Default::default() };
        let m = countermodel_search(&p, &[], &fx_is_x(), &opts).unwrap();
        let m = m.structure().expect("countermodel");
        assert_eq!(m.tables[&name("f")], vec![1, 0]);
        assert!(is_model_of(m, &p));
        assert!(!semantic_consequence(m, &[], &fx_is_x()));
    }

    #[test]
    fn reflexivity_has_no_countermodel() {
        let p = free_equational_presentation(&unary());
        let x = Term::var("x", "s");
        let refl = KFormula::raw(name("s"), vec![x.clone(), x]);
        for n in 1..=3 {
            let opts = CountermodelOptions { default_max: n, ..Default::default() };
            assert_eq!(countermodel_search(&p, &[], &refl, &opts).unwrap(), SearchOutcome::NotFound { exhaustive: true });
        }
    }

    fn bool_presentation() -> Presentation {
        let sig = bool_sig();
        let v = |n: &str| Term::var(n, "bool");
        let app = |o: &str, a: Vec<Term>| Term::app(o, a);
        let tt = Term::constant("tt");
        let ff = Term::constant("ff");
        let eq = |a: Term, b: Term| KFormula::raw(name("bool"), vec![a, b]);
        let p = v("p");
        let q = v("q");
        let r = v("r");
        let eqs = vec![
            eq(app("\\/", vec![p.clone(), app("!", vec![p.clone()])]), tt.clone()),
            eq(app("/\\", vec![p.clone(), app("!", vec![p.clone()])]), ff.clone()),
            eq(app("\\/", vec![p.clone(), tt.clone()]), tt.clone()),
            eq(app("/\\", vec![p.clone(), ff.clone()]), ff.clone()),
            eq(app("/\\", vec![p.clone(), q.clone()]), app("/\\", vec![q.clone(), p.clone()])),
            eq(app("\\/", vec![p.clone(), q.clone()]), app("\\/", vec![q.clone(), p.clone()])),
            eq(app("/\\", vec![p.clone(), app("\\/", vec![p.clone(), q.clone()])]), p.clone()),
            eq(app("\\/", vec![p.clone(), app("/\\", vec![p.clone(), q.clone()])]), p.clone()),
            eq(
                app("/\\", vec![p.clone(), app("\\/", vec![q.clone(), r.clone()])]),
                app("\\/", vec![app("/\\", vec![p.clone(), q.clone()]), app("/\\", vec![p.clone(), r.clone()])]),
            ),
        ];
        horn_presentation(&sig, &eqs, &[]).unwrap()
    }

    #[test]
    fn boolean_countermodel_for_p_eq_q() {
        let p = bool_presentation();
        let goal = KFormula::raw(name("bool"), vec![Term::var("p", "bool"), Term::var("q", "bool")]);
        let m = countermodel_search(&p, &[], &goal, &CountermodelOptions::default()).unwrap();
        let m = m.structure().expect("countermodel");
        assert_eq!(m.carrier("bool"), 2);
        assert!(is_model_of(m, &p));
    }

    #[test]
    fn enumerated_models_are_models() {
        let p = bool_presentation();
        let sizes: BTreeMap<Name, usize> = [(name("bool"), 2)].into_iter().collect();
        let (ms, complete) = models_of(&p, &sizes, FilterMode::Identity, 100, 1_000_000).unwrap();
        assert!(complete);
        assert!(!ms.is_empty());
        assert!(ms.iter().all(|m| is_model_of(m, &p)));
    }

    #[test]
    fn search_agrees_with_brute_force() {
        // every structure the exhaustive stream admits as a model is found by
        // the backtracking search and vice versa
        let p = free_equational_presentation(&unary());
        let p = crate::deduction::extend_presentation(&p, &[], &[]).unwrap();
        let sizes: BTreeMap<Name, usize> = [(name("s"), 3)].into_iter().collect();
        let (ms, _) = models_of(&p, &sizes, FilterMode::Identity, 1000, 1_000_000).unwrap();
        let brute: Vec<_> = crate::models::enumerate_structures(&p.signature, 2, &sizes, FilterMode::Identity, 1000)
            .unwrap()
            .filter(|m| is_model_of(m, &p))
            .map(|m| m.tables)
            .collect();
        assert_eq!(ms.into_iter().map(|m| m.tables).collect::<Vec<_>>(), brute);
    }
}
