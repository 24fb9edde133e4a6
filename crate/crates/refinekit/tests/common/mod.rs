//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde_json::Value;

use refinekit::deduction::{bounded_consequences, check_proof, derive, Budget, Presentation, Proof};
use refinekit::frontend::{load_corpus, Document};
use refinekit::models::{diagonal, FiniteKStructure};
use refinekit::sigterm::{name, KFormula, Name, Sequent, Signature, Substitutable, Substitution, Term};
use refinekit::translation::{SignatureMorphism, TermSampler};

pub const CORPUS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus");
pub const SCHEMA: &str = include_str!("../../../../docs/report.schema.json");

pub fn corpus_path(file: &str) -> String {
    format!("{CORPUS_DIR}/{file}")
}

pub fn corpus() -> &'static [(&'static str, Document)] {
    static C: OnceLock<Vec<(&'static str, Document)>> = OnceLock::new();
    C.get_or_init(load_corpus)
}

pub fn doc(file: &str) -> &'static Document {
    &corpus().iter().find(|(n, _)| *n == file).unwrap_or_else(|| panic!("no corpus file {file}")).1
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Run the command-line tool in-process.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("refinekit").chain(args.iter().copied());
    let code = refinekit::frontend::cli::execute(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

// ---------------------------------------------------------------------------
// A deliberately small JSON Schema checker: type, enum, required, properties,
// additionalProperties, items, minimum and local $ref.

pub fn validate(schema: &Value, v: &Value) -> Result<(), String> {
    check(schema, schema, v, "$")
}

fn type_ok(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => false,
    }
}

fn check(root: &Value, s: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        let def = r.strip_prefix("#/$defs/").and_then(|d| root["$defs"].get(d)).ok_or(format!("bad ref {r}"))?;
        return check(root, def, v, at);
    }
    match s.get("type") {
        Some(Value::String(t)) if !type_ok(t, v) => return Err(format!("{at}: expected {t}")),
        Some(Value::Array(ts)) if !ts.iter().any(|t| type_ok(t.as_str().unwrap_or(""), v)) => {
            return Err(format!("{at}: expected one of {ts:?}"))
        }
        _ => {}
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{at}: {v} not in {e:?}"));
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return Err(format!("{at}: {x} below {min}"));
        }
    }
    if let Some(obj) = v.as_object() {
        for r in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            let k = r.as_str().unwrap();
            if !obj.contains_key(k) {
                return Err(format!("{at}: missing {k}"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, x) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(ps) => check(root, ps, x, &format!("{at}.{k}"))?,
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => return Err(format!("{at}: unexpected {k}")),
                    Some(ap @ Value::Object(_)) => check(root, ap, x, &format!("{at}.{k}"))?,
                    _ => {}
                },
            }
        }
    }
    if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            check(root, items, x, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random instances for the deduction laws.

pub fn small_budget() -> Budget {
    Budget { max_rounds: 3, max_derived: 400, max_instantiation_depth: 1, time_cap_ms: 10_000 }
}

/// Random hypotheses over `p`'s signature (terms of depth at most 1).
pub fn random_gamma(p: &Presentation, r: &mut impl Rng) -> Vec<KFormula> {
    let s = TermSampler::new(&p.signature);
    (0..r.gen_range(1..=2)).map(|_| s.formula(r, p.dim, 1)).collect()
}

/// A derivable goal together with its proof: a random member of the
/// bounded consequences of random hypotheses.
pub fn proved_case(p: &Presentation, r: &mut impl Rng) -> (Vec<KFormula>, KFormula, Proof) {
    loop {
        let gamma = random_gamma(p, r);
        let cons: Vec<KFormula> = bounded_consequences(p, &gamma, &small_budget()).unwrap().into_iter().collect();
        let Some(goal) = cons.choose(r).cloned() else { continue };
        if let Some(proof) = derive(p, &gamma, &goal, &Budget::default()).unwrap().proof() {
            return (gamma, goal, proof.clone());
        }
    }
}

pub fn random_substitution(p: &Presentation, fs: &[KFormula], r: &mut impl Rng) -> Substitution {
    let s = TermSampler::new(&p.signature);
    let mut theta = Substitution::new();
    for f in fs {
        for (v, t) in s.substitution_for(r, f, 1).iter() {
            if theta.get(v).is_none() {
                theta.insert(v.clone(), t.clone());
            }
        }
    }
    theta
}

// ---------------------------------------------------------------------------
// Random triples for the satisfaction condition under reducts.

pub fn triple_source() -> Signature {
    Signature::new()
        .with_sort("a")
        .with_sort("b")
        .with_op("f", &["a"], "a")
        .with_op("g", &["a", "b"], "a")
        .with_op("c", &[], "b")
        .with_op("h", &["b"], "b")
}

/// A target signature, a morphism into it from [`triple_source`], and a
/// random structure over the target with carriers of size at most 3.
pub fn random_morphism_and_structure(r: &mut impl Rng) -> (SignatureMorphism, FiniteKStructure) {
    let src = triple_source();
    let tsorts = ["u", "v"];
    let sort_map: BTreeMap<Name, Name> = src.sorts.iter().map(|s| (s.clone(), name(tsorts[r.gen_range(0..2)]))).collect();
    let mut tgt = Signature::new();
    for s in tsorts {
        tgt.add_sort(s);
    }
    let mut op_map = BTreeMap::new();
    for (o, prof) in &src.ops {
        let args: Vec<Name> = prof.args.iter().map(|s| sort_map[s].clone()).collect();
        let res = sort_map[&prof.result].clone();
        // reuse an existing target op with the same profile half of the time
        let existing = tgt.ops.iter().find(|(_, q)| q.args == args && q.result == res).map(|(n, _)| n.clone());
        let img = match existing {
            Some(n) if r.gen_bool(0.5) => n,
            _ => {
                let n = format!("{o}'");
                let a: Vec<&str> = args.iter().map(|s| &**s).collect();
                tgt.add_op(&n, &a, &res).unwrap();
                name(&n)
            }
        };
        op_map.insert(o.clone(), img);
    }
    tgt.add_op("extra", &["u"], "v").unwrap();
    let sigma = SignatureMorphism::new("sigma", src, tgt.clone(), sort_map, op_map, BTreeMap::new()).unwrap();

    let carriers: BTreeMap<Name, usize> = tsorts.iter().map(|s| (name(s), r.gen_range(1..=3))).collect();
    let tables = tgt
        .ops
        .iter()
        .map(|(o, prof)| {
            let rows: usize = prof.args.iter().map(|s| carriers[s]).product();
            (o.clone(), (0..rows).map(|_| r.gen_range(0..carriers[&prof.result])).collect())
        })
        .collect();
    let m = FiniteKStructure {
        name: name("m"),
        signature: tgt,
        dim: 2,
        filters: carriers.iter().map(|(s, n)| (s.clone(), diagonal(*n, 2))).collect(),
        carriers,
        tables,
        element_names: BTreeMap::new(),
        labels: Vec::new(),
    };
    (sigma, m)
}

/// A conditional equation over [`triple_source`] with up to two premises.
pub fn random_conditional_equation(r: &mut impl Rng) -> Sequent {
    let sig = triple_source();
    let s = TermSampler::new(&sig);
    let n = r.gen_range(0..=2);
    let premises: Vec<KFormula> = (0..n).map(|_| random_equation(&s, r)).collect();
    Sequent::new(premises, random_equation(&s, r))
}

fn random_equation(s: &TermSampler, r: &mut impl Rng) -> KFormula {
    let sort = if r.gen_bool(0.5) { name("a") } else { name("b") };
    KFormula::raw(sort.clone(), vec![s.term(r, &sort, 2), s.term(r, &sort, 2)])
}

pub fn var(n: &str, s: &str) -> Term {
    Term::var(n, s)
}

// ---------------------------------------------------------------------------
// The consequence-relation laws, one random case each. Shared by the
// proptest suite and the acceptance run.

pub fn law_systems() -> Vec<&'static Presentation> {
    vec![
        doc("slp.rspec").presentation("SLP").unwrap(),
        doc("nat.rspec").presentation("NAT").unwrap(),
        doc("s_dt.rspec").presentation("DT").unwrap(),
    ]
}

fn pick(seed: u64) -> &'static Presentation {
    let s = law_systems();
    s[(seed % s.len() as u64) as usize]
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Every hypothesis is derivable from the hypotheses, with a checkable proof.
pub fn law_reflexivity(seed: u64) -> Result<(), String> {
    let p = pick(seed);
    let mut r = rng(seed);
    let gamma = random_gamma(p, &mut r);
    let phi = gamma[r.gen_range(0..gamma.len())].clone();
    let v = derive(p, &gamma, &phi, &Budget::minimal()).map_err(|e| e.to_string())?;
    let proof = v.proof().ok_or_else(|| format!("{phi} not derived from itself in {}", p.name))?;
    check_proof(p, proof).map_err(|e| e.to_string())
}

/// A proof stays valid when unused hypotheses are added.
pub fn law_monotonicity(seed: u64) -> Result<(), String> {
    let p = pick(seed);
    let mut r = rng(seed);
    let (gamma, goal, proof) = proved_case(p, &mut r);
    let extra = random_gamma(p, &mut r);
    ensure(proof.hypotheses.iter().all(|h| gamma.contains(h)), || "proof cites a foreign hypothesis".into())?;
    let mut wider = proof.clone();
    wider.hypotheses.extend(extra);
    check_proof(p, &wider).map_err(|e| e.to_string())?;
    ensure(wider.conclusion() == Some(&goal), || format!("conclusion is not {goal}"))
}

/// More budget never loses consequences.
pub fn law_budget_monotonicity(seed: u64) -> Result<(), String> {
    let p = pick(seed);
    let mut r = rng(seed);
    let gamma = random_gamma(p, &mut r);
    let small = Budget { max_rounds: r.gen_range(1..=2), max_derived: r.gen_range(20..200), max_instantiation_depth: 1, time_cap_ms: 1 };
    let large = Budget {
        max_rounds: small.max_rounds + r.gen_range(0..=1),
        max_derived: small.max_derived + r.gen_range(0..200),
        max_instantiation_depth: 1,
        time_cap_ms: 1,
    };
    ensure(small.le(&large), || "budgets not ordered".into())?;
    let a = bounded_consequences(p, &gamma, &small).map_err(|e| e.to_string())?;
    let b = bounded_consequences(p, &gamma, &large).map_err(|e| e.to_string())?;
    ensure(a.is_subset(&b), || format!("{} consequences lost", a.difference(&b).count()))
}

/// Substituting into a proof yields a proof of the substituted goal.
pub fn law_substitution_replay(seed: u64) -> Result<(), String> {
    let p = pick(seed);
    let mut r = rng(seed);
    let (gamma, goal, proof) = proved_case(p, &mut r);
    let fs: Vec<_> = gamma.iter().chain(std::iter::once(&goal)).cloned().collect();
    let theta = random_substitution(p, &fs, &mut r);
    let replayed = proof.substitute(&theta, p);
    check_proof(p, &replayed).map_err(|e| e.to_string())?;
    ensure(replayed.conclusion() == Some(&goal.apply(&theta)), || "replayed conclusion differs".into())?;
    let hyps: Vec<_> = proof.hypotheses.iter().map(|g| g.apply(&theta)).collect();
    ensure(replayed.hypotheses == hyps, || "replayed hypotheses differ".into())
}
