//! Bounded forward saturation.
//!
//! Each search phase fixes a finite term universe `U_d`: the subterms of the
//! hypotheses and goal (their variables frozen), the signature's constants,
//! a fresh variable for every sort that would otherwise be empty, all closed
//! under the operations `d` times. Only formulas whose components lie in
//! `U_d` are ever stored, so a phase always terminates. Phases deepen
//! `d = 1..=max_instantiation_depth`, each starting from scratch.
//!
//! Round 1 adds the hypotheses and every axiom instance inside the universe.
//! Every further round fires each rule semi-naively: at least one premise must
//! come from the previous round's additions. Rule jobs run on the worker pool
//! and are merged in job order, so the outcome does not depend on the number
//! of workers.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use super::proof::{thaw_formula, thaw_subst};
use super::{Budget, DeductionError, Exhaustion, ExhaustionReason, Justification, Presentation, Proof, Step, Verdict};
use crate::par;
use crate::sigterm::{
    free_variables, match_formula_into, match_term_into, HasVars, KFormula, Name, Sequent, Substitutable,
    Substitution, Term, Variable,
};

/// Hard ceiling on universe size, independent of the budget.
const UNIVERSE_CAP: usize = 50_000;

fn freeze_term(t: &Term) -> Term {
    t.map_vars(&mut |v| Term::Var(v.frozen()))
}

fn freeze(f: &KFormula) -> KFormula {
    f.map_terms(freeze_term)
}

/// All variables of `t` are frozen or bound by `theta`.
fn bound(t: &Term, theta: &Substitution) -> bool {
    match t {
        Term::Var(v) => v.frozen || theta.get(v).is_some(),
        Term::App(_, args) => args.iter().all(|a| bound(a, theta)),
    }
}

fn restrict(theta: &Substitution, vars: &BTreeSet<Variable>) -> Substitution {
    Substitution(theta.0.iter().filter(|(v, _)| vars.contains(*v)).map(|(v, t)| (v.clone(), t.clone())).collect())
}

struct Universe {
    terms: Vec<Term>,
    ids: HashMap<Term, usize>,
    by_sort: HashMap<Name, Vec<usize>>,
    by_head: HashMap<Name, Vec<usize>>,
    by_arg: HashMap<(Name, usize, Term), Vec<usize>>,
}

impl Universe {
    fn build(p: &Presentation, seeds: &[&KFormula], depth: usize) -> Universe {
        let mut base = BTreeSet::new();
        for f in seeds {
            f.components.iter().for_each(|c| c.subterms_into(&mut base));
        }
        for (op, prof) in &p.signature.ops {
            if prof.args.is_empty() {
                base.insert(Term::App(op.clone(), Vec::new().into()));
            }
        }
        let mut u = Universe {
            terms: Vec::new(),
            ids: HashMap::new(),
            by_sort: HashMap::new(),
            by_head: HashMap::new(),
            by_arg: HashMap::new(),
        };
        for t in base {
            let s = t.sort_in(&p.signature).expect("seed terms are well-sorted");
            u.insert(t, s);
        }
        for s in &p.signature.sorts {
            if !u.by_sort.contains_key(s) {
                u.insert(Term::Var(Variable::new("v0", s)), s.clone());
            }
        }
        for _ in 0..depth {
            let level: Vec<usize> = (0..u.terms.len()).collect();
            let mut fresh = Vec::new();
            'ops: for (op, prof) in &p.signature.ops {
                if prof.args.is_empty() {
                    continue;
                }
                let pools: Vec<Vec<usize>> = prof
                    .args
                    .iter()
                    .map(|s| u.by_sort.get(s).map(|v| v.iter().copied().filter(|i| *i < level.len()).collect()).unwrap_or_default())
                    .collect();
                if pools.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut idx = vec![0usize; pools.len()];
                loop {
                    let args: Vec<Term> = idx.iter().zip(&pools).map(|(i, pool)| u.terms[pool[*i]].clone()).collect();
                    let t = Term::App(op.clone(), args.into());
                    if !u.ids.contains_key(&t) {
                        fresh.push((t, prof.result.clone()));
                        if u.terms.len() + fresh.len() >= UNIVERSE_CAP {
                            break 'ops;
                        }
                    }
                    // odometer over argument positions, last position fastest
                    let mut k = idx.len();
                    loop {
                        if k == 0 {
                            continue 'ops;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < pools[k].len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            for (t, s) in fresh {
                if !u.ids.contains_key(&t) {
                    u.insert(t, s);
                }
            }
        }
        u
    }

    fn insert(&mut self, t: Term, sort: Name) {
        let id = self.terms.len();
        self.by_sort.entry(sort).or_default().push(id);
        if let Term::App(op, args) = &t {
            self.by_head.entry(op.clone()).or_default().push(id);
            for (j, a) in args.iter().enumerate() {
                self.by_arg.entry((op.clone(), j, a.clone())).or_default().push(id);
            }
        }
        self.ids.insert(t.clone(), id);
        self.terms.push(t);
    }

    fn len(&self) -> usize {
        self.terms.len()
    }

    fn contains(&self, t: &Term) -> bool {
        self.ids.contains_key(t)
    }

    fn candidates(&self, pattern: &Term, theta: &Substitution) -> &[usize] {
        match pattern {
            Term::Var(v) => self.by_sort.get(&v.sort).map(Vec::as_slice).unwrap_or(&[]),
            Term::App(op, args) => {
                let mut best: &[usize] = self.by_head.get(op).map(Vec::as_slice).unwrap_or(&[]);
                for (j, a) in args.iter().enumerate() {
                    if bound(a, theta) {
                        let key = (op.clone(), j, a.apply(theta));
                        let list = self.by_arg.get(&key).map(Vec::as_slice).unwrap_or(&[]);
                        if list.len() < best.len() {
                            best = list;
                        }
                    }
                }
                best
            }
        }
    }

    /// Every extension of `theta` placing all `patterns` inside the universe.
    fn instances(&self, patterns: &[Term], theta: &Substitution, out: &mut Vec<Substitution>, stop: &Guard) {
        if stop.tripped() {
            return;
        }
        let Some((first, rest)) = patterns.split_first() else {
            out.push(theta.clone());
            return;
        };
        if bound(first, theta) {
            if self.contains(&first.apply(theta)) {
                self.instances(rest, theta, out, stop);
            }
            return;
        }
        for &id in self.candidates(first, theta) {
            let mut th = theta.clone();
            if match_term_into(first, &self.terms[id], &mut th) {
                self.instances(rest, &th, out, stop);
            }
        }
    }
}

/// Formula store with join indexes. Ids are assigned in insertion order.
#[derive(Default)]
struct Store {
    entries: Vec<(KFormula, Just)>,
    ids: HashMap<KFormula, usize>,
    by_sort: HashMap<Name, Vec<usize>>,
    by_comp: HashMap<(usize, Term), Vec<usize>>,
    by_head: HashMap<(usize, Name), Vec<usize>>,
    by_arg: HashMap<(usize, Name, usize, Term), Vec<usize>>,
}

#[derive(Clone)]
enum Just {
    Hyp(usize),
    Axiom(usize, Substitution),
    Rule(usize, Substitution, Vec<usize>),
}

fn in_range(list: &[usize], lo: usize, hi: usize) -> &[usize] {
    let a = list.partition_point(|&i| i < lo);
    let b = list.partition_point(|&i| i < hi);
    &list[a..b]
}

impl Store {
    fn len(&self) -> usize {
        self.entries.len()
    }

    fn insert(&mut self, f: KFormula, just: Just) -> bool {
        if self.ids.contains_key(&f) {
            return false;
        }
        let id = self.entries.len();
        self.by_sort.entry(f.sort.clone()).or_default().push(id);
        for (i, c) in f.components.iter().enumerate() {
            self.by_comp.entry((i, c.clone())).or_default().push(id);
            if let Term::App(op, args) = c {
                self.by_head.entry((i, op.clone())).or_default().push(id);
                for (j, a) in args.iter().enumerate() {
                    self.by_arg.entry((i, op.clone(), j, a.clone())).or_default().push(id);
                }
            }
        }
        self.ids.insert(f.clone(), id);
        self.entries.push((f, just));
        true
    }

    fn lookup(&self, f: &KFormula, lo: usize, hi: usize) -> Option<usize> {
        self.ids.get(f).copied().filter(|&i| i >= lo && i < hi)
    }

    /// Ids in `[lo, hi)` that might match `pattern` under `theta`, ascending.
    fn candidates(&self, pattern: &KFormula, theta: &Substitution, lo: usize, hi: usize) -> &[usize] {
        const EMPTY: &[usize] = &[];
        let mut best: &[usize] = self.by_sort.get(&pattern.sort).map(Vec::as_slice).unwrap_or(EMPTY);
        for (i, c) in pattern.components.iter().enumerate() {
            let list = if bound(c, theta) {
                self.by_comp.get(&(i, c.apply(theta))).map(Vec::as_slice).unwrap_or(EMPTY)
            } else if let Term::App(op, args) = c {
                let mut l = self.by_head.get(&(i, op.clone())).map(Vec::as_slice).unwrap_or(EMPTY);
                for (j, a) in args.iter().enumerate() {
                    if bound(a, theta) {
                        let key = (i, op.clone(), j, a.apply(theta));
                        let m = self.by_arg.get(&key).map(Vec::as_slice).unwrap_or(EMPTY);
                        if m.len() < l.len() {
                            l = m;
                        }
                    }
                }
                l
            } else {
                continue;
            };
            if list.len() < best.len() {
                best = list;
            }
        }
        in_range(best, lo, hi)
    }
}

/// Cooperative cancellation for one round: a deadline and an output cap.
struct Guard {
    deadline: Instant,
    timed_out: AtomicBool,
}

impl Guard {
    fn tripped(&self) -> bool {
        if self.timed_out.load(Ordering::Relaxed) {
            return true;
        }
        if Instant::now() >= self.deadline {
            self.timed_out.store(true, Ordering::Relaxed);
            return true;
        }
        false
    }
}

/// Output of one job: candidate formulas in generation order.
#[derive(Default)]
struct JobOut {
    items: Vec<(KFormula, Just)>,
    overflow: bool,
}

struct JobSink<'a> {
    store: &'a Store,
    seen: HashSet<KFormula>,
    out: JobOut,
    cap: usize,
}

impl<'a> JobSink<'a> {
    fn new(store: &'a Store, cap: usize) -> Self {
        JobSink { store, seen: HashSet::new(), out: JobOut::default(), cap }
    }

    fn offer(&mut self, f: KFormula, just: Just) {
        if self.out.overflow || self.store.ids.contains_key(&f) || !self.seen.insert(f.clone()) {
            return;
        }
        self.out.items.push((f, just));
        if self.out.items.len() > self.cap {
            self.out.overflow = true;
        }
    }

    fn full(&self) -> bool {
        self.out.overflow
    }
}

/// How a rule is fired: from its premises, or from its conclusion's
/// universe instances followed by exact premise lookups.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    PremiseDriven,
    ConclusionDriven,
}

struct PreparedRule {
    premises: Vec<KFormula>,
    conclusion: KFormula,
    vars: BTreeSet<Variable>,
    mode: Mode,
}

fn prepare(rule: &Sequent) -> PreparedRule {
    let premises: Vec<KFormula> = rule.premises.iter().cloned().collect();
    let cvars = free_variables(&rule.conclusion);
    let mut pvars = BTreeSet::new();
    premises.iter().for_each(|p| p.collect_vars(&mut pvars));
    let covers = pvars.is_subset(&cvars);
    let apps = rule.conclusion.components.iter().all(|c| matches!(c, Term::App(..)));
    let mode = if covers && apps { Mode::ConclusionDriven } else { Mode::PremiseDriven };
    PreparedRule { premises, conclusion: rule.conclusion.clone(), vars: free_variables(rule), mode }
}

struct Phase<'a> {
    p: &'a Presentation,
    rules: Vec<PreparedRule>,
    universe: Universe,
    store: Store,
    goal: Option<KFormula>,
    budget: Budget,
    deadline: Instant,
    /// Store length after each complete round.
    snapshots: Vec<usize>,
}

enum PhaseEnd {
    Goal(usize),
    Stopped(ExhaustionReason),
}

impl<'a> Phase<'a> {
    fn new(p: &'a Presentation, hyps: &[KFormula], goal: Option<KFormula>, depth: usize, budget: Budget, deadline: Instant) -> Self {
        let seeds: Vec<&KFormula> = hyps.iter().chain(goal.iter()).collect();
        let universe = Universe::build(p, &seeds, depth);
        let rules = p.rules.iter().map(|r| prepare(&r.sequent)).collect();
        let mut store = Store::default();
        for (i, h) in hyps.iter().enumerate() {
            store.insert(h.clone(), Just::Hyp(i));
        }
        Phase { p, rules, universe, store, goal, budget, deadline, snapshots: Vec::new() }
    }

    fn goal_id(&self) -> Option<usize> {
        self.goal.as_ref().and_then(|g| self.store.ids.get(g).copied())
    }

    fn cap(&self) -> usize {
        self.budget.max_derived.saturating_sub(self.store.len())
    }

    /// Merge job outputs in order; returns (added, over budget).
    fn merge(&mut self, outs: Vec<JobOut>) -> (usize, bool) {
        let mut added = 0;
        let mut overflow = false;
        for o in outs {
            overflow |= o.overflow;
            for (f, j) in o.items {
                if self.store.insert(f, j) {
                    added += 1;
                }
            }
        }
        (added, overflow || self.store.len() > self.budget.max_derived)
    }

    fn axiom_round(&mut self, guard: &Guard) -> Vec<JobOut> {
        let cap = self.cap();
        let (universe, store, axioms) = (&self.universe, &self.store, &self.p.axioms);
        par::map_range(axioms.len(), |idx| {
            let ax = &axioms[idx];
            let mut sink = JobSink::new(store, cap);
            let mut found = Vec::new();
            universe.instances(&ax.formula.components, &Substitution::new(), &mut found, guard);
            let vars = free_variables(&ax.formula);
            for th in found {
                if sink.full() {
                    break;
                }
                let f = ax.formula.apply(&th);
                sink.offer(f, Just::Axiom(idx, restrict(&th, &vars)));
            }
            sink.out
        })
    }

    fn rule_round(&self, delta_lo: usize, hi: usize, guard: &Guard) -> Vec<JobOut> {
        let jobs: Vec<(usize, usize)> = self
            .rules
            .iter()
            .enumerate()
            .flat_map(|(r, pr)| (0..pr.premises.len()).map(move |i| (r, i)))
            .collect();
        let cap = self.cap();
        par::map(&jobs, |&(r, i)| {
            let mut sink = JobSink::new(&self.store, cap);
            self.fire(r, i, delta_lo, hi, &mut sink, guard);
            sink.out
        })
    }

    /// Fire rule `r` with premise `i` drawn from the delta `[delta_lo, hi)`;
    /// premises before `i` come from older formulas, later ones from anything
    /// below `hi`.
    fn fire(&self, r: usize, i: usize, delta_lo: usize, hi: usize, sink: &mut JobSink, guard: &Guard) {
        let pr = &self.rules[r];
        let seed = &pr.premises[i];
        for &id in self.store.candidates(seed, &Substitution::new(), delta_lo, hi) {
            if sink.full() || guard.tripped() {
                return;
            }
            let mut theta = Substitution::new();
            if !match_formula_into(seed, &self.store.entries[id].0, &mut theta) {
                continue;
            }
            let mut chosen = vec![usize::MAX; pr.premises.len()];
            chosen[i] = id;
            match pr.mode {
                Mode::ConclusionDriven => {
                    let mut found = Vec::new();
                    self.universe.instances(&pr.conclusion.components, &theta, &mut found, guard);
                    'inst: for th in found {
                        let mut ids = chosen.clone();
                        for (j, prem) in pr.premises.iter().enumerate() {
                            if j == i {
                                continue;
                            }
                            let lo_hi = if j < i { (0, delta_lo) } else { (0, hi) };
                            match self.store.lookup(&prem.apply(&th), lo_hi.0, lo_hi.1) {
                                Some(pid) => ids[j] = pid,
                                None => continue 'inst,
                            }
                        }
                        self.emit(r, &th, ids, sink);
                    }
                }
                Mode::PremiseDriven => self.join(r, i, delta_lo, hi, theta, chosen, sink, guard),
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn join(
        &self,
        r: usize,
        i: usize,
        delta_lo: usize,
        hi: usize,
        theta: Substitution,
        chosen: Vec<usize>,
        sink: &mut JobSink,
        guard: &Guard,
    ) {
        if sink.full() || guard.tripped() {
            return;
        }
        let pr = &self.rules[r];
        // pick the open premise with the fewest candidates
        let mut best: Option<(usize, &[usize])> = None;
        for (j, prem) in pr.premises.iter().enumerate() {
            if chosen[j] != usize::MAX {
                continue;
            }
            let hi_j = if j < i { delta_lo } else { hi };
            let c = self.store.candidates(prem, &theta, 0, hi_j);
            if best.map_or(true, |(_, b)| c.len() < b.len()) {
                best = Some((j, c));
            }
        }
        let Some((j, cands)) = best else {
            if bound_formula(&pr.conclusion, &theta) {
                self.emit(r, &theta, chosen, sink);
            } else {
                let mut found = Vec::new();
                self.universe.instances(&pr.conclusion.components, &theta, &mut found, guard);
                for th in found {
                    self.emit(r, &th, chosen.clone(), sink);
                }
            }
            return;
        };
        let prem = &pr.premises[j];
        for &id in cands {
            let mut th = theta.clone();
            if match_formula_into(prem, &self.store.entries[id].0, &mut th) {
                let mut ch = chosen.clone();
                ch[j] = id;
                self.join(r, i, delta_lo, hi, th, ch, sink, guard);
            }
        }
    }

    fn emit(&self, r: usize, theta: &Substitution, premises: Vec<usize>, sink: &mut JobSink) {
        let pr = &self.rules[r];
        let f = pr.conclusion.apply(theta);
        if f.components.iter().all(|c| self.universe.contains(c)) {
            sink.offer(f, Just::Rule(r, restrict(theta, &pr.vars), premises));
        }
    }

    /// Run rounds until the goal appears, the phase saturates, or a limit hits.
    fn run(&mut self) -> PhaseEnd {
        let mut delta_lo = 0;
        for round in 1..=self.budget.max_rounds {
            let guard = Guard { deadline: self.deadline, timed_out: AtomicBool::new(false) };
            let hi = self.store.len();
            let outs = if round == 1 { self.axiom_round(&guard) } else { self.rule_round(delta_lo, hi, &guard) };
            // a partial round is discarded, never merged
            if guard.timed_out.load(Ordering::Relaxed) {
                return PhaseEnd::Stopped(ExhaustionReason::Time);
            }
            let (added, overflow) = self.merge(outs);
            if let Some(g) = self.goal_id() {
                return PhaseEnd::Goal(g);
            }
            if overflow {
                return PhaseEnd::Stopped(ExhaustionReason::Derived);
            }
            self.snapshots.push(self.store.len());
            if added == 0 && round > 1 {
                return PhaseEnd::Stopped(ExhaustionReason::Saturated);
            }
            delta_lo = if round == 1 { 0 } else { hi };
        }
        PhaseEnd::Stopped(ExhaustionReason::Rounds)
    }

    fn extract(&self, goal: usize, hyps_orig: &[KFormula]) -> Proof {
        let mut needed = BTreeSet::new();
        let mut stack = vec![goal];
        while let Some(id) = stack.pop() {
            if needed.insert(id) {
                if let Just::Rule(_, _, ps) = &self.store.entries[id].1 {
                    stack.extend(ps.iter().copied());
                }
            }
        }
        let order: Vec<usize> = needed.into_iter().collect();
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        let mut hyp_pos: HashMap<usize, usize> = HashMap::new();
        let mut hypotheses = Vec::new();
        let mut steps = Vec::new();
        for &id in &order {
            let (f, just) = &self.store.entries[id];
            let justification = match just {
                Just::Hyp(h) => {
                    let k = *hyp_pos.entry(*h).or_insert_with(|| {
                        hypotheses.push(hyps_orig[*h].clone());
                        hypotheses.len() - 1
                    });
                    Justification::Hyp(k)
                }
                Just::Axiom(a, th) => Justification::Axiom { axiom: *a, subst: thaw_subst(th) },
                Just::Rule(r, th, ps) => Justification::Rule {
                    rule: *r,
                    subst: thaw_subst(th),
                    premises: ps.iter().map(|p| pos[p]).collect(),
                },
            };
            steps.push(Step { formula: thaw_formula(f), justification });
        }
        Proof { hypotheses, steps }
    }
}

fn bound_formula(f: &KFormula, theta: &Substitution) -> bool {
    f.components.iter().all(|c| bound(c, theta))
}

fn validate(p: &Presentation, gamma: &[KFormula], goal: Option<&KFormula>, b: &Budget) -> Result<(), DeductionError> {
    b.validate()?;
    gamma.iter().chain(goal).try_for_each(|f| p.check_formula(f))
}

/// Sorted, deduplicated hypotheses: (originals, frozen copies).
fn prepare_hyps(gamma: &[KFormula]) -> (Vec<KFormula>, Vec<KFormula>) {
    let set: BTreeSet<KFormula> = gamma.iter().cloned().collect();
    let orig: Vec<KFormula> = set.into_iter().collect();
    let frozen = orig.iter().map(freeze).collect();
    (orig, frozen)
}

/// Bounded search for a proof of `goal` from `gamma`. Never refutes.
pub fn derive(p: &Presentation, gamma: &[KFormula], goal: &KFormula, b: &Budget) -> Result<Verdict, DeductionError> {
    validate(p, gamma, Some(goal), b)?;
    let (orig, frozen) = prepare_hyps(gamma);
    let fgoal = freeze(goal);
    if let Some(h) = orig.iter().position(|f| f == goal) {
        let proof = Proof {
            hypotheses: vec![orig[h].clone()],
            steps: vec![Step { formula: goal.clone(), justification: Justification::Hyp(0) }],
        };
        return Ok(Verdict::Proved(proof));
    }
    let deadline = Instant::now() + Duration::from_millis(b.time_cap_ms);
    let mut last = Exhaustion { reason: ExhaustionReason::Rounds, rounds: 0, derived: 0, universe: 0, depth: 0 };
    for d in 1..=b.max_instantiation_depth {
        let mut phase = Phase::new(p, &frozen, Some(fgoal.clone()), d, *b, deadline);
        let end = phase.run();
        match end {
            PhaseEnd::Goal(id) => return Ok(Verdict::Proved(phase.extract(id, &orig))),
            PhaseEnd::Stopped(reason) => {
                last = Exhaustion {
                    reason,
                    rounds: phase.snapshots.len(),
                    derived: phase.store.len(),
                    universe: phase.universe.len(),
                    depth: d,
                };
                if reason == ExhaustionReason::Time {
                    break;
                }
            }
        }
    }
    Ok(Verdict::Unknown(last))
}

/// Under-approximation of the consequences of `gamma`: the union over depths
/// of the last complete round that fits in `max_derived`. Fresh variables in
/// the result stand for arbitrary terms of their sort.
pub fn bounded_consequences(p: &Presentation, gamma: &[KFormula], b: &Budget) -> Result<BTreeSet<KFormula>, DeductionError> {
    validate(p, gamma, None, b)?;
    let (orig, frozen) = prepare_hyps(gamma);
    let mut out: BTreeSet<KFormula> = orig.iter().cloned().collect();
    // Results must not depend on wall time, so phases here are uncapped in time.
    let deadline = Instant::now() + Duration::from_secs(3600);
    for d in 1..=b.max_instantiation_depth {
        let mut phase = Phase::new(p, &frozen, None, d, *b, deadline);
        phase.run();
        let keep = phase.snapshots.last().copied().unwrap_or(0);
        out.extend(phase.store.entries[..keep].iter().map(|(f, _)| thaw_formula(f)));
    }
    Ok(out)
}

/// Find `h` with `h(conclusion) = psi` and every `h(premise)` in `gamma`.
pub fn directly_derivable(rule: &Sequent, gamma: &[KFormula], psi: &KFormula) -> Option<Substitution> {
    let mut theta = Substitution::new();
    if !match_formula_into(&rule.conclusion, psi, &mut theta) {
        return None;
    }
    let premises: Vec<&KFormula> = rule.premises.iter().collect();
    fn go(premises: &[&KFormula], gamma: &[KFormula], theta: Substitution) -> Option<Substitution> {
        let Some((first, rest)) = premises.split_first() else {
            return Some(theta);
        };
        gamma.iter().find_map(|g| {
            let mut th = theta.clone();
            if match_formula_into(first, g, &mut th) {
                go(rest, gamma, th)
            } else {
                None
            }
        })
    }
    if premises.is_empty() {
        return None;
    }
    go(&premises, gamma, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::tests::unary_sig;
    use crate::deduction::{check_proof, free_equational_presentation, horn_presentation};
    use crate::sigterm::{name, Signature};

    fn eq(sort: &str, a: Term, b: Term) -> KFormula {
        KFormula::raw(name(sort), vec![a, b])
    }

    fn s(n: &str) -> Term {
        Term::var(n, "s")
    }

    #[test]
    fn transitivity_directly_derivable() {
        let p = free_equational_presentation(&Signature::new().with_sort("s"));
        let trans = &p.rules.iter().find(|r| &*r.name == "trans[s]").unwrap().sequent;
        let gamma = vec![eq("s", s("a"), s("b")), eq("s", s("b"), s("c"))];
        let h = directly_derivable(trans, &gamma, &eq("s", s("a"), s("c"))).unwrap();
        let want = Substitution::from_pairs([
            (Variable::new("x", "s"), s("a")),
            (Variable::new("y", "s"), s("b")),
            (Variable::new("z", "s"), s("c")),
        ]);
        assert_eq!(h, want);
    }

    #[test]
    fn symmetry_from_nothing() {
        let p = free_equational_presentation(&Signature::new().with_sort("s"));
        let sym = &p.rules.iter().find(|r| &*r.name == "sym[s]").unwrap().sequent;
        assert!(directly_derivable(sym, &[], &eq("s", s("a"), s("b"))).is_none());
    }

    fn nateq_sig() -> Signature {
        Signature::new()
            .with_sort("nat")
            .with_sort("bool")
            .with_op("z", &[], "nat")
            .with_op("s", &["nat"], "nat")
            .with_op("eq", &["nat", "nat"], "bool")
            .with_op("tt", &[], "bool")
    }

    #[test]
    fn successor_rule_directly_derivable() {
        let n = |v: &str| Term::var(v, "nat");
        let e = |a: Term, b: Term| Term::app("eq", vec![a, b]);
        let su = |a: Term| Term::app("s", vec![a]);
        let tt = Term::constant("tt");
        let rule = Sequent::new([eq("bool", e(n("x"), n("y")), tt.clone())], eq("bool", e(su(n("x")), su(n("y"))), tt.clone()));
        let z = Term::constant("z");
        let gamma = vec![eq("bool", e(z.clone(), z.clone()), tt.clone())];
        let psi = eq("bool", e(su(z.clone()), su(z.clone())), tt);
        let h = directly_derivable(&rule, &gamma, &psi).unwrap();
        assert_eq!(h.get(&Variable::new("x", "nat")), Some(&z));
        assert_eq!(h.get(&Variable::new("y", "nat")), Some(&z));
        let _ = nateq_sig();
    }

    #[test]
    fn hypothesis_is_proved_at_minimal_budget() {
        let p = free_equational_presentation(&unary_sig());
        let phi = eq("s", Term::app("f", vec![s("a")]), s("b"));
        let v = derive(&p, std::slice::from_ref(&phi), &phi, &Budget::minimal()).unwrap();
        let proof = v.proof().unwrap();
        assert_eq!(proof.len(), 1);
        assert!(check_proof(&p, proof).is_ok());
    }

    #[test]
    fn meet_projection_axiom_instance() {
        let sig = Signature::new().with_sort("s").with_op("/\\", &["s", "s"], "s");
        let mut p = Presentation::empty("SLP", sig.clone(), 2);
        let m = |a: Term, b: Term| Term::app("/\\", vec![a, b]);
        p.push_axiom(eq("s", m(s("p"), s("q")), s("p")), "ax", "SLP", super::super::ItemKind::Proper).unwrap();
        let goal = eq("s", m(s("p"), s("p")), s("p"));
        let v = derive(&p, &[], &goal, &Budget::default()).unwrap();
        let proof = v.proof().expect("proved");
        assert_eq!(proof.conclusion(), Some(&goal));
        assert!(check_proof(&p, proof).is_ok());
        match &proof.steps[0].justification {
            Justification::Axiom { subst, .. } => assert_eq!(subst.get(&Variable::new("q", "s")), Some(&s("p"))),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tampered_proof_rejected() {
        let sig = crate::sigterm::tests::nat_sig();
        let x = Term::var("x", "nat");
        let ax = KFormula::eq(&sig, Term::app("+", vec![x.clone(), Term::constant("z")]), x.clone()).unwrap();
        let p = horn_presentation(&sig, std::slice::from_ref(&ax), &[]).unwrap();
        let goal = KFormula::eq(&sig, x.clone(), Term::app("+", vec![x.clone(), Term::constant("z")])).unwrap();
        let v = derive(&p, &[], &goal, &Budget::default()).unwrap();
        let mut proof = v.proof().expect("proved").clone();
        assert!(check_proof(&p, &proof).is_ok());
        let k = proof
            .steps
            .iter()
            .position(|s| matches!(s.justification, Justification::Axiom { .. } | Justification::Rule { .. }))
            .unwrap();
        match &mut proof.steps[k].justification {
            Justification::Axiom { subst, .. } | Justification::Rule { subst, .. } => {
                let v = subst.0.keys().next().unwrap().clone();
                subst.insert(v, Term::constant("z"));
            }
            Justification::Hyp(_) => unreachable!(),
        }
        assert_eq!(check_proof(&p, &proof).unwrap_err().step, k);
    }

    #[test]
    fn consequences_of_bare_sort() {
        let p = free_equational_presentation(&Signature::new().with_sort("s"));
        let out = bounded_consequences(&p, &[], &Budget::default()).unwrap();
        let want: BTreeSet<_> = [eq("s", s("v0"), s("v0"))].into_iter().collect();
        assert_eq!(out, want);
    }

    #[test]
    fn consequences_of_one_equation() {
        let p = free_equational_presentation(&Signature::new().with_sort("s"));
        let ab = eq("s", s("a"), s("b"));
        let out = bounded_consequences(&p, std::slice::from_ref(&ab), &Budget::default()).unwrap();
        for f in [ab, eq("s", s("b"), s("a")), eq("s", s("a"), s("a")), eq("s", s("b"), s("b"))] {
            assert!(out.contains(&f), "missing {f}");
        }
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn unprovable_goal_is_unknown() {
        let p = free_equational_presentation(&unary_sig());
        let goal = eq("s", Term::app("f", vec![s("x")]), s("x"));
        let v = derive(&p, &[], &goal, &Budget::default()).unwrap();
        assert!(matches!(v, Verdict::Unknown(Exhaustion { reason: ExhaustionReason::Saturated, .. })));
    }
}
