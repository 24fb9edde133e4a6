//! The acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 3 (the bank-account refinements) is known not to hold as stated:
//! under the validating translation the deposit axiom's image is refuted by a
//! model where validation returns zero. It is checked faithfully and expected
//! to fail; every other criterion must pass.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use common::*;
use refinekit::deduction::{check_proof, derive, Budget, Justification, Presentation, Proof};
use refinekit::frontend::report::{run, run_all, Overrides, Report};
use refinekit::frontend::Document;
use refinekit::models::{models_of, reduct, semantic_consequence, sequent_valid, size_vectors, FilterMode, FiniteKStructure};
use refinekit::par;
use refinekit::refinement::{
    check_logical_refinement, check_refinement_by_interpretation, search_reflection_counterexample, tau_image_presentation, vertical_compose,
    Budgets, Overall,
};
use refinekit::sigterm::{canonicalize, Name, Sequent};
use refinekit::translation::{apply_signature_morphism, translate_sequent};

/// Criteria allowed to fail, with the reason recorded alongside the code.
const EXPECTED_FAILURES: &[u32] = &[3];

type Outcome = Result<String, String>;
type Law = fn(u64) -> Result<(), String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, cap: Duration, what: &str) -> Result<(), String> {
    let el = t.elapsed();
    ensure(el < cap, || format!("{what} took {el:?}, cap {cap:?}"))
}

fn run_directive(file: &str, i: usize, ov: &Overrides) -> Result<Report, String> {
    let d = doc(file);
    run(&d.directives[i], d, ov).map_err(|e| e.to_string())
}

fn verdicts(r: &Report) -> String {
    r.obligations.iter().map(|o| format!("{}:{}", o.source, o.verdict)).collect::<Vec<_>>().join(", ")
}

fn non_hyp_steps(p: &Proof) -> usize {
    p.steps.iter().filter(|s| !matches!(s.justification, Justification::Hyp(_))).count()
}

fn pres(file: &str, n: &str) -> &'static Presentation {
    doc(file).presentation(n).unwrap_or_else(|| panic!("{n} missing from {file}"))
}

// ---------------------------------------------------------------------------

fn c1_nat_nateq() -> Outcome {
    let t = Instant::now();
    let r = run_directive("nat_nateq.rspec", 0, &Overrides::default())?;
    within(t, Duration::from_secs(1), "NAT => NATEQ")?;
    ensure(r.overall == "Proved", || format!("overall {} ({})", r.overall, verdicts(&r)))?;
    ensure(r.obligations.len() == 3, || format!("{} obligations", r.obligations.len()))?;
    for o in &r.obligations {
        let p = o.proof.as_ref().ok_or_else(|| format!("{} is {}", o.source, o.verdict))?;
        ensure(p.len() <= 3, || format!("{} proof has {} steps", o.source, p.len()))?;
    }
    Ok(format!("3/3 Proved in {:?}", t.elapsed()))
}

fn c2_s_dt() -> Outcome {
    let t = Instant::now();
    let r = run_directive("s_dt.rspec", 0, &Overrides::default())?;
    within(t, Duration::from_secs(1), "S => DT")?;
    ensure(r.overall == "Proved", || format!("overall {} ({})", r.overall, verdicts(&r)))?;
    for o in &r.obligations {
        let p = o.proof.as_ref().ok_or_else(|| format!("{} is {}", o.source, o.verdict))?;
        ensure(non_hyp_steps(p) == 1, || format!("{} needs {} inference steps", o.source, non_hyp_steps(p)))?;
    }
    Ok(format!("{} obligations, each one direct match", r.obligations.len()))
}

fn c3_bams() -> Outcome {
    let t = Instant::now();
    let ov = Overrides { depth: Some(1), ..Overrides::default() };
    let mut bad = Vec::new();
    for i in 0..3 {
        let r = run_directive("bams.rspec", i, &ov)?;
        if r.overall != "Proved" {
            let failing: Vec<_> = r.obligations.iter().filter(|o| o.verdict != "Proved").map(|o| format!("{}:{}", o.source, o.verdict)).collect();
            bad.push(format!("{} -> {} [{}]", r.directive, r.overall, failing.join(", ")));
        }
    }
    ensure(bad.is_empty(), || bad.join("; "))?;
    within(t, Duration::from_secs(2), "bank refinements")?;
    Ok("three refinements Proved".into())
}

fn c4_glivenko() -> Outcome {
    let t = Instant::now();
    let d = doc("glivenko.rspec");
    let bool_p = d.presentation("BOOL").unwrap();
    let heyting = d.presentation("HEYTING").unwrap();
    let tau = d.translation("glivenko").unwrap();
    let fixtures: Vec<&FiniteKStructure> =
        ["chain-2", "chain-3", "chain-4", "boolean-4"].iter().map(|n| d.structure(n).ok_or(format!("no fixture {n}"))).collect::<Result<_, _>>()?;

    // (a) the translated BOOL axioms hold in every Heyting fixture
    let own: Vec<_> = bool_p.axioms.iter().filter(|a| &*a.origin == "BOOL").collect();
    ensure(own.len() == 4, || format!("{} BOOL axioms", own.len()))?;
    let mut translated = Vec::new();
    for a in &own {
        translated.extend(translate_sequent(tau, &Sequent::axiom(a.formula.clone())).map_err(|e| e.to_string())?);
    }
    for m in &fixtures {
        for s in &translated {
            ensure(sequent_valid(m, s), || format!("{s} fails in {}", m.name))?;
        }
    }

    // (b) the untranslated excluded middle is refuted via chain-3
    let r = run_directive("glivenko.rspec", 1, &Overrides::default())?;
    ensure(r.overall == "Refuted", || format!("decide gave {}", r.overall))?;
    let cm = r.obligations[0].countermodel.as_ref().ok_or("no countermodel")?;
    ensure(&*cm.name == "chain-3", || format!("countermodel {}", cm.name))?;

    // (c) proof search may give up, but never with a bad proof
    let budget = Budget { time_cap_ms: 5_000, ..Budget::default() };
    let mut proved = 0;
    for s in &translated {
        let v = derive(heyting, &s.premises.iter().cloned().collect::<Vec<_>>(), &s.conclusion, &budget).map_err(|e| e.to_string())?;
        if let Some(p) = v.proof() {
            check_proof(heyting, p).map_err(|e| format!("{s}: {e}"))?;
            proved += 1;
        }
    }
    within(t, Duration::from_secs(30), "Glivenko")?;
    Ok(format!("{} sequents valid in 4 fixtures; chain-3 refutes p \\/ !p ~ tt; {proved}/{} proved", translated.len(), translated.len()))
}

fn c5_slv_slp() -> Outcome {
    let t = Instant::now();
    let r = run_directive("slv_slp.rspec", 0, &Overrides::default())?;
    within(t, Duration::from_secs(5), "SLV => SLP")?;
    ensure(r.budgets.max_instantiation_depth <= 2, || format!("depth {}", r.budgets.max_instantiation_depth))?;
    ensure(r.overall == "Proved", || format!("overall {} ({})", r.overall, verdicts(&r)))?;
    Ok(format!("{} obligations Proved at depth {}", r.obligations.len(), r.budgets.max_instantiation_depth))
}

fn c6_cpc_k_s5() -> Outcome {
    let t = Instant::now();
    let (cpc, k, s5) = (pres("cpc_modal.rspec", "CPC"), pres("cpc_modal.rspec", "K"), pres("cpc_modal.rspec", "S5"));
    let b = Budgets::default();
    let c1 = check_logical_refinement(cpc, k, &b).map_err(|e| e.to_string())?;
    let c2 = check_logical_refinement(k, s5, &b).map_err(|e| e.to_string())?;
    ensure(c1.overall == Overall::Proved, || format!("CPC => K is {:?}", c1.overall))?;
    ensure(c2.overall == Overall::Proved, || format!("K => S5 is {:?}", c2.overall))?;
    let c = vertical_compose(&c1, &c2).map_err(|e| e.to_string())?;
    ensure(&*c.source == "CPC" && &*c.target == "S5" && c.overall == Overall::Proved, || format!("composite {} => {} {:?}", c.source, c.target, c.overall))?;
    for i in 0..3 {
        let r = run_directive("cpc_modal.rspec", i, &Overrides::default())?;
        ensure(r.overall == "Proved", || format!("{} gave {}", r.directive, r.overall))?;
    }
    within(t, Duration::from_secs(2), "CPC => K => S5")?;
    Ok(format!("CPC => S5 certificate with {} obligations", c.obligations.len()))
}

fn c7_satisfaction() -> Outcome {
    let t = Instant::now();
    let mut r = rng(7);
    let n = 200;
    for i in 0..n {
        let (sigma, m) = random_morphism_and_structure(&mut r);
        let xi = random_conditional_equation(&mut r);
        let image = apply_signature_morphism(&sigma, &xi).map_err(|e| e.to_string())?;
        let red = reduct(&m, &sigma).map_err(|e| e.to_string())?;
        ensure(sequent_valid(&m, &image) == sequent_valid(&red, &xi), || format!("triple {i} disagrees on {xi}"))?;
    }
    within(t, Duration::from_secs(10), "satisfaction triples")?;
    Ok(format!("{n}/{n} triples agree"))
}

/// Models of `p` with every carrier of size at most 3.
fn small_models(p: &Presentation) -> Result<Vec<FiniteKStructure>, String> {
    let mode = if p.dim == 2 { FilterMode::Identity } else { FilterMode::All };
    let max: BTreeMap<Name, usize> = p.signature.sorts.iter().map(|s| (s.clone(), 3)).collect();
    let mut out = Vec::new();
    for sizes in size_vectors(&p.signature, &max) {
        let (ms, _complete) = models_of(p, &sizes, mode, 40, 20_000).map_err(|e| e.to_string())?;
        out.extend(ms);
    }
    Ok(out)
}

/// Every Proved obligation of every corpus run, with its document.
fn proved_corpus_proofs() -> Result<Vec<(&'static str, &'static Document, Proof)>, String> {
    let mut out = Vec::new();
    for (file, d) in corpus() {
        for r in run_all(d, &Overrides::default()).map_err(|e| format!("{file}: {e}"))? {
            out.extend(r.obligations.into_iter().filter_map(|o| o.proof).map(|p| (*file, d, p)));
        }
    }
    Ok(out)
}

fn c8_soundness() -> Outcome {
    let t = Instant::now();
    let proofs = proved_corpus_proofs()?;
    let mut cache: BTreeMap<String, Vec<FiniteKStructure>> = BTreeMap::new();
    let (mut pairs, mut checked) = (0usize, 0usize);
    for (file, d, proof) in &proofs {
        let concl = proof.conclusion().ok_or("empty proof")?;
        for p in d.presentations.iter().filter(|p| check_proof(p, proof).is_ok()) {
            let key = format!("{file}/{}", p.name);
            if !cache.contains_key(&key) {
                cache.insert(key.clone(), small_models(p)?);
            }
            for m in &cache[&key] {
                ensure(semantic_consequence(m, &proof.hypotheses, concl), || format!("{file}: {concl} fails in a model of {}", p.name))?;
                checked += 1;
            }
            pairs += 1;
        }
    }
    ensure(pairs >= proofs.len(), || "some proof checks in no presentation".into())?;
    within(t, Duration::from_secs(60), "soundness cross-check")?;
    Ok(format!("{} proofs, {checked} model checks, 0 violations", proofs.len()))
}

fn c9_reflection() -> Outcome {
    let t = Instant::now();
    let d = doc("free_f.rspec");
    let (free, fix) = (d.presentation("FREE").unwrap(), d.presentation("FREEFIX").unwrap());
    let tau = d.translation("id_free").unwrap();
    let (xi, m) = search_reflection_counterexample(free, fix, tau, &Budgets::default()).map_err(|e| e.to_string())?.ok_or("no counterexample")?;
    within(t, Duration::from_secs(1), "reflection search")?;
    let law = &fix.proper_axioms().next().ok_or("FREEFIX has no axiom")?.formula;
    ensure(xi.premises.is_empty(), || format!("{xi} has premises"))?;
    ensure(canonicalize(&xi.conclusion).ok() == canonicalize(law).ok(), || format!("found {xi}"))?;
    ensure(m.carrier("s") == 2 && m.tables.get("f").map(Vec::as_slice) == Some(&[1, 0][..]), || format!("witness {m:?}"))?;
    Ok(format!("{xi} refuted by the swap on two elements"))
}

fn c10_coherence() -> Outcome {
    let mut b = Budgets::default();
    b.proof.time_cap_ms = 1_000;
    b.models.time_cap_ms = 1_000;
    let cases = [("nat_nateq.rspec", "NAT", "NATEQ", "eqtt"), ("glivenko.rspec", "BOOL", "HEYTING", "glivenko")];
    let mut report = Vec::new();
    for (file, a, c, via) in cases {
        let d = doc(file);
        let (sp, sp2, tau) = (d.presentation(a).unwrap(), d.presentation(c).unwrap(), d.translation(via).unwrap());
        let mut bb = b.clone();
        bb.models.fixtures = d.structures.clone();
        let interp = check_refinement_by_interpretation(sp, sp2, tau, &bb).map_err(|e| e.to_string())?;
        let image = tau_image_presentation(sp, tau, &bb).map_err(|e| e.to_string())?;
        let logical = check_logical_refinement(&image, sp2, &bb).map_err(|e| e.to_string())?;
        let by_sequent: BTreeMap<&Sequent, &str> = logical.obligations.iter().map(|o| (&o.translated, o.verdict.label())).collect();
        let (mut both, mut matched) = (0, 0);
        for o in &interp.obligations {
            let Some(&other) = by_sequent.get(&o.translated) else { continue };
            matched += 1;
            let mine = o.verdict.label();
            if mine != "Unknown" && other != "Unknown" {
                ensure(mine == other, || format!("{file}: {} is {mine} vs {other}", o.translated))?;
                both += 1;
            }
        }
        ensure(both > 0, || format!("{file}: no obligation decided by both checks"))?;
        report.push(format!("{a}/{via}: {both}/{matched} agree"));
    }
    Ok(report.join("; "))
}

fn c11_laws() -> Outcome {
    let n = 500u64;
    let laws: [(&str, Law); 4] = [
        ("reflexivity", law_reflexivity),
        ("monotonicity", law_monotonicity),
        ("budget monotonicity", law_budget_monotonicity),
        ("substitution replay", law_substitution_replay),
    ];
    for (what, law) in laws {
        let mut r = rng(11);
        for _ in 0..n {
            let seed = rand::Rng::gen::<u64>(&mut r);
            law(seed).map_err(|e| format!("{what} (seed {seed}): {e}"))?;
        }
    }
    let proofs = proved_corpus_proofs()?;
    for (file, d, proof) in &proofs {
        ensure(d.presentations.iter().any(|p| check_proof(p, proof).is_ok()), || format!("{file}: proof of {:?} does not check", proof.conclusion()))?;
    }
    Ok(format!("4 laws x {n} cases; {} corpus proofs re-checked", proofs.len()))
}

fn c12_determinism() -> Outcome {
    let all = |threads| -> Result<Vec<String>, String> {
        par::with_threads(threads, || {
            let mut out = Vec::new();
            for (file, d) in corpus() {
                for r in run_all(d, &Overrides::default()).map_err(|e| format!("{file}: {e}"))? {
                    out.push(r.json_without_timing());
                }
            }
            Ok(out)
        })
    };
    let (one, four) = (all(1)?, all(4)?);
    ensure(one.len() == four.len(), || "report counts differ".into())?;
    for (i, (a, b)) in one.iter().zip(&four).enumerate() {
        ensure(a == b, || format!("report {i} differs between 1 and 4 workers"))?;
    }
    Ok(format!("{} reports byte-identical across 1 and 4 workers", one.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        (1, "NAT => NATEQ via eqtt", c1_nat_nateq),
        (2, "EQ(S) => DT by direct matches", c2_s_dt),
        (3, "BAMS => B2/B3/B4 via tau1/tau2/tau3", c3_bams),
        (4, "Glivenko: semantics, contrast, sound search", c4_glivenko),
        (5, "SLV => SLP via sym_pair", c5_slv_slp),
        (6, "CPC => K => S5 and composition", c6_cpc_k_s5),
        (7, "satisfaction under reducts", c7_satisfaction),
        (8, "soundness against small models", c8_soundness),
        (9, "reflection counterexample", c9_reflection),
        (10, "interpretation vs image presentation", c10_coherence),
        (11, "deductive-system laws", c11_laws),
        (12, "determinism across worker counts", c12_determinism),
    ];
    let mut failed = BTreeSet::new();
    for (n, what, f) in criteria {
        let t = Instant::now();
        match f() {
            Ok(detail) => println!("PASS {n:>2} {what}: {detail} [{:?}]", t.elapsed()),
            Err(why) => {
                println!("FAIL {n:>2} {what}: {why} [{:?}]", t.elapsed());
                failed.insert(n);
            }
        }
    }
    let expected: BTreeSet<u32> = EXPECTED_FAILURES.iter().copied().collect();
    assert!(failed.is_subset(&expected), "unexpected failures: {:?}", failed.difference(&expected).collect::<Vec<_>>());
}
