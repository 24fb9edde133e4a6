//! (k,l)-translations: globally finite multifunctions from k-formulas to sets
//! of l-formulas, plus signature morphisms and the conjunction fold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sigterm::{
    canonicalize, check_well_sorted, free_variables, match_formula, name, KFormula, Name, Sequent, Signature,
    SortError, Substitutable, Substitution, Term, Variable,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslationError {
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("translation `{translation}` has no template for sort `{sort}`")]
    MissingTemplate { translation: Name, sort: Name },
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("translation `{0}` is not a self-translation")]
    NotSelfTranslation(Name),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("translation `{0}` produced an empty image")]
    EmptyImage(Name),
    #[error("ill-formed signature morphism: {0}")]
    Morphism(String),
    #[error("ill-formed translation `{0}`: {1}")]
    IllFormed(Name, String),
}

/// A signature morphism with an explicit variable component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureMorphism {
    pub name: Name,
    pub source: Signature,
    pub target: Signature,
    pub sort_map: BTreeMap<Name, Name>,
    pub op_map: BTreeMap<Name, Name>,
    /// Explicit variable renamings; other variables follow the default rule.
    #[serde(with = "crate::sigterm::pairs")]
    pub var_map: BTreeMap<Variable, Variable>,
}

impl SignatureMorphism {
    /// Build and validate. Sorts and operations missing from the maps are
    /// mapped to the same name.
    pub fn new(
        mname: &str,
        source: Signature,
        target: Signature,
        sort_map: BTreeMap<Name, Name>,
        op_map: BTreeMap<Name, Name>,
        var_map: BTreeMap<Variable, Variable>,
    ) -> Result<Self, TranslationError> {
        let mut m = SignatureMorphism { name: name(mname), source, target, sort_map, op_map, var_map };
        for s in &m.source.sorts {
            m.sort_map.entry(s.clone()).or_insert_with(|| s.clone());
        }
        for o in m.source.ops.keys() {
            m.op_map.entry(o.clone()).or_insert_with(|| o.clone());
        }
        m.validate()?;
        Ok(m)
    }

    pub fn identity(sig: &Signature) -> Self {
        Self::inclusion(sig, sig).expect("identity is a morphism")
    }

    pub fn inclusion(sub: &Signature, sup: &Signature) -> Result<Self, TranslationError> {
        Self::new("id", sub.clone(), sup.clone(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new())
    }

    fn validate(&self) -> Result<(), TranslationError> {
        let bad = |m: String| Err(TranslationError::Morphism(m));
        for (s, t) in &self.sort_map {
            if !self.source.sorts.contains(s) {
                return bad(format!("`{s}` is not a source sort"));
            }
            if !self.target.sorts.contains(t) {
                return bad(format!("sort `{s}` maps to `{t}`, not a target sort"));
            }
        }
        for (o, prof) in &self.source.ops {
            let img = &self.op_map[o];
            let Some(tp) = self.target.op(img) else {
                return bad(format!("operation `{o}` maps to `{img}`, not a target operation"));
            };
            let want: Vec<&Name> = prof.args.iter().map(|s| &self.sort_map[s]).collect();
            let got: Vec<&Name> = tp.args.iter().collect();
            if want != got || self.sort_map[&prof.result] != tp.result {
                return bad(format!("profile of `{o}` is not preserved by `{img}`"));
            }
        }
        let mut seen = BTreeSet::new();
        for (v, w) in &self.var_map {
            if self.sort_map.get(&v.sort) != Some(&w.sort) {
                return bad(format!("variable `{}` maps across sorts", v.name));
            }
            if !seen.insert(w) {
                return bad(format!("variable map is not injective at `{}`", w.name));
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.sort_map.iter().all(|(a, b)| a == b)
            && self.op_map.iter().all(|(a, b)| a == b)
            && self.var_map.iter().all(|(a, b)| a == b)
    }

    fn sort_map_injective(&self) -> bool {
        let imgs: BTreeSet<&Name> = self.sort_map.values().collect();
        imgs.len() == self.sort_map.len()
    }

    /// Variable component: explicit entries, else the same name in the image
    /// sort (suffixed by the source sort when sorts get identified).
    pub fn var(&self, v: &Variable) -> Variable {
        if let Some(w) = self.var_map.get(v) {
            return w.clone();
        }
        let sort = self.sort_map.get(&v.sort).cloned().unwrap_or_else(|| v.sort.clone());
        let n = if self.sort_map_injective() { v.name.to_string() } else { format!("{}_{}", v.name, v.sort) };
        Variable { name: name(&n), sort, frozen: v.frozen }
    }

    pub fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => Term::Var(self.var(v)),
            Term::App(op, args) => Term::App(
                self.op_map.get(op).cloned().unwrap_or_else(|| op.clone()),
                args.iter().map(|a| self.term(a)).collect::<Vec<_>>().into(),
            ),
        }
    }

    pub fn formula(&self, f: &KFormula) -> KFormula {
        KFormula {
            sort: self.sort_map.get(&f.sort).cloned().unwrap_or_else(|| f.sort.clone()),
            components: f.components.iter().map(|c| self.term(c)).collect(),
        }
    }

    pub fn sequent(&self, s: &Sequent) -> Sequent {
        Sequent::new(s.premises.iter().map(|p| self.formula(p)), self.formula(&s.conclusion))
    }

    pub fn substitution(&self, theta: &Substitution) -> Substitution {
        Substitution(theta.iter().map(|(v, t)| (self.var(v), self.term(t))).collect())
    }
}

/// Something a signature morphism can be applied to.
pub trait MorphismImage: Sized {
    fn check_source(&self, sig: &Signature) -> Result<(), SortError>;
    fn image(&self, sigma: &SignatureMorphism) -> Self;
}

impl MorphismImage for Term {
    fn check_source(&self, sig: &Signature) -> Result<(), SortError> {
        check_well_sorted(sig, self).map(|_| ())
    }
    fn image(&self, sigma: &SignatureMorphism) -> Self {
        sigma.term(self)
    }
}

impl MorphismImage for KFormula {
    fn check_source(&self, sig: &Signature) -> Result<(), SortError> {
        self.check(sig, self.dim())
    }
    fn image(&self, sigma: &SignatureMorphism) -> Self {
        sigma.formula(self)
    }
}

impl MorphismImage for Sequent {
    fn check_source(&self, sig: &Signature) -> Result<(), SortError> {
        self.check(sig, self.conclusion.dim())
    }
    fn image(&self, sigma: &SignatureMorphism) -> Self {
        sigma.sequent(self)
    }
}

/// The homomorphic extension `σ*` applied to a well-sorted source item.
pub fn apply_signature_morphism<T: MorphismImage>(sigma: &SignatureMorphism, x: &T) -> Result<T, TranslationError> {
    x.check_source(&sigma.source)?;
    Ok(x.image(sigma))
}

/// Template set for one operation of a term-homomorphic translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTemplates {
    /// Placeholder variables standing for the translated arguments.
    pub placeholders: Vec<Variable>,
    pub images: Vec<Term>,
}

/// One clause of a case-split translation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub pattern: KFormula,
    pub images: Vec<KFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationBody {
    /// Per-sort templates in the placeholders; components are substituted
    /// for the placeholders after embedding them into the target.
    Schematic {
        sort_map: BTreeMap<Name, Name>,
        placeholders: BTreeMap<Name, Vec<Variable>>,
        templates: BTreeMap<Name, Vec<KFormula>>,
        embed: Option<SignatureMorphism>,
    },
    /// Per-operation term templates; unlisted operations map homomorphically.
    TermHomomorphic { ops: BTreeMap<Name, OpTemplates> },
    MorphismInduced(SignatureMorphism),
    Composed { outer: Box<Translation>, inner: Box<Translation> },
    /// First matching pattern wins; unmatched formulas map to themselves.
    /// Not substitution-commuting in general.
    Cases(Vec<Case>),
    /// Conjunction fold of a 1-dimensional translation's image.
    Folded { inner: Box<Translation>, conj: Name },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translation {
    pub name: Name,
    pub source: Signature,
    pub source_dim: usize,
    pub target: Signature,
    pub target_dim: usize,
    pub body: TranslationBody,
}

impl fmt::Display for Translation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.body {
            TranslationBody::Schematic { .. } => "schematic".to_string(),
            TranslationBody::TermHomomorphic { .. } => "term-homomorphic".to_string(),
            TranslationBody::MorphismInduced(m) => format!("induced by morphism {}", m.name),
            TranslationBody::Composed { outer, inner } => format!("{} after {}", outer.name, inner.name),
            TranslationBody::Cases(_) => "case split".to_string(),
            TranslationBody::Folded { inner, conj } => format!("{conj}-fold of {}", inner.name),
        };
        write!(f, "{} ({}, {}->{})", self.name, kind, self.source_dim, self.target_dim)
    }
}

impl Translation {
    pub fn identity(sig: &Signature, k: usize) -> Translation {
        let mut t = translation_from_morphism(SignatureMorphism::identity(sig), k);
        t.name = name("identity");
        t
    }

    /// Schematic translation. `templates[s]` is a list of target l-formulas over
    /// `placeholders[s]` (k variables of sort `sort_map[s]`).
    pub fn schematic(
        tname: &str,
        source: (Signature, usize),
        target: (Signature, usize),
        sort_map: BTreeMap<Name, Name>,
        placeholders: BTreeMap<Name, Vec<Variable>>,
        templates: BTreeMap<Name, Vec<KFormula>>,
        embed: Option<SignatureMorphism>,
    ) -> Result<Translation, TranslationError> {
        let t = Translation {
            name: name(tname),
            source: source.0,
            source_dim: source.1,
            target: target.0,
            target_dim: target.1,
            body: TranslationBody::Schematic { sort_map, placeholders, templates, embed },
        };
        t.validate()?;
        Ok(t)
    }

    pub fn term_homomorphic(
        tname: &str,
        source: Signature,
        target: Signature,
        k: usize,
        ops: BTreeMap<Name, OpTemplates>,
    ) -> Result<Translation, TranslationError> {
        let t = Translation {
            name: name(tname),
            source,
            source_dim: k,
            target,
            target_dim: k,
            body: TranslationBody::TermHomomorphic { ops },
        };
        t.validate()?;
        Ok(t)
    }

    pub fn cases(tname: &str, sig: Signature, k: usize, cases: Vec<Case>) -> Result<Translation, TranslationError> {
        let t = Translation {
            name: name(tname),
            source: sig.clone(),
            source_dim: k,
            target: sig,
            target_dim: k,
            body: TranslationBody::Cases(cases),
        };
        t.validate()?;
        Ok(t)
    }

    fn ill(&self, msg: String) -> TranslationError {
        TranslationError::IllFormed(self.name.clone(), msg)
    }

    fn validate(&self) -> Result<(), TranslationError> {
        match &self.body {
            TranslationBody::Schematic { sort_map, placeholders, templates, embed } => {
                for (s, ts) in templates {
                    let Some(ts_sort) = sort_map.get(s) else {
                        return Err(self.ill(format!("sort `{s}` has templates but no correspondence")));
                    };
                    let ph = placeholders.get(s).ok_or_else(|| self.ill(format!("no placeholders for `{s}`")))?;
                    if ph.len() != self.source_dim || ph.iter().any(|v| &v.sort != ts_sort) {
                        return Err(self.ill(format!("placeholders for `{s}` must be {} variables of sort `{ts_sort}`", self.source_dim)));
                    }
                    for t in ts {
                        t.check(&self.target, self.target_dim)?;
                    }
                }
                if let Some(m) = embed {
                    if m.source != self.source || m.target != self.target {
                        return Err(self.ill("embedding morphism does not connect source and target".into()));
                    }
                } else if !self.source.is_subsignature_of(&self.target) {
                    return Err(self.ill("source signature is not included in the target".into()));
                }
                Ok(())
            }
            TranslationBody::TermHomomorphic { ops } => {
                if !self.source.sorts.is_subset(&self.target.sorts) || self.source_dim != self.target_dim {
                    return Err(self.ill("term-homomorphic translations keep sorts and dimension".into()));
                }
                for (op, t) in ops {
                    let prof = self.source.op(op).ok_or_else(|| SortError::UnknownOp(op.clone()))?;
                    if t.placeholders.len() != prof.args.len()
                        || t.placeholders.iter().zip(&prof.args).any(|(v, s)| &v.sort != s)
                    {
                        return Err(self.ill(format!("placeholders of `{op}` do not follow its profile")));
                    }
                    if t.images.is_empty() {
                        return Err(TranslationError::EmptyImage(self.name.clone()));
                    }
                    for img in &t.images {
                        let s = check_well_sorted(&self.target, img)?;
                        if s != prof.result {
                            return Err(self.ill(format!("template `{img}` has sort `{s}`, expected `{}`", prof.result)));
                        }
                    }
                }
                for op in self.source.ops.keys().filter(|o| !ops.contains_key(*o)) {
                    if self.target.op(op) != self.source.op(op) {
                        return Err(self.ill(format!("unlisted operation `{op}` is missing from the target")));
                    }
                }
                Ok(())
            }
            TranslationBody::Cases(cases) => {
                for c in cases {
                    c.pattern.check(&self.source, self.source_dim)?;
                    for i in &c.images {
                        i.check(&self.target, self.target_dim)?;
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_morphism_induced(&self) -> bool {
        matches!(self.body, TranslationBody::MorphismInduced(_))
    }

    pub fn is_self_translation(&self) -> bool {
        self.source == self.target && self.source_dim == self.target_dim
    }

    /// True when the variant is substitution-commuting by construction.
    pub fn is_structurally_schematic(&self) -> bool {
        match &self.body {
            TranslationBody::Schematic { .. } | TranslationBody::MorphismInduced(_) => true,
            TranslationBody::Composed { outer, inner } => {
                outer.is_structurally_schematic() && inner.is_structurally_schematic()
            }
            _ => false,
        }
    }
}

/// Image of a term under the `#` extension of a term-homomorphic body.
fn hash_image(ops: &BTreeMap<Name, OpTemplates>, t: &Term) -> BTreeSet<Term> {
    match t {
        Term::Var(_) => [t.clone()].into_iter().collect(),
        Term::App(op, args) => {
            let arg_imgs: Vec<Vec<Term>> = args.iter().map(|a| hash_image(ops, a).into_iter().collect()).collect();
            let mut out = BTreeSet::new();
            for choice in product(&arg_imgs) {
                match ops.get(op) {
                    None => {
                        out.insert(Term::App(op.clone(), choice.into()));
                    }
                    Some(tpl) => {
                        let theta = Substitution::from_pairs(tpl.placeholders.iter().cloned().zip(choice));
                        out.extend(tpl.images.iter().map(|i| i.apply(&theta)));
                    }
                }
            }
            out
        }
    }
}

/// Cartesian product in lexicographic order.
fn product<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for l in lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                l.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Image of a k-formula: a finite nonempty set of l-formulas.
pub fn translate_formula(tau: &Translation, phi: &KFormula) -> Result<BTreeSet<KFormula>, TranslationError> {
    phi.check(&tau.source, tau.source_dim)?;
    let out = translate_unchecked(tau, phi)?;
    if out.is_empty() {
        return Err(TranslationError::EmptyImage(tau.name.clone()));
    }
    Ok(out)
}

fn translate_unchecked(tau: &Translation, phi: &KFormula) -> Result<BTreeSet<KFormula>, TranslationError> {
    match &tau.body {
        TranslationBody::Schematic { placeholders, templates, embed, .. } => {
            let missing = || TranslationError::MissingTemplate { translation: tau.name.clone(), sort: phi.sort.clone() };
            let ts = templates.get(&phi.sort).ok_or_else(missing)?;
            let ph = placeholders.get(&phi.sort).ok_or_else(missing)?;
            let comps = phi.components.iter().map(|c| match embed {
                Some(m) => m.term(c),
                None => c.clone(),
            });
            let theta = Substitution::from_pairs(ph.iter().cloned().zip(comps));
            Ok(ts.iter().map(|t| t.apply(&theta)).collect())
        }
        TranslationBody::TermHomomorphic { ops } => {
            let imgs: Vec<Vec<Term>> = phi.components.iter().map(|c| hash_image(ops, c).into_iter().collect()).collect();
            Ok(product(&imgs).into_iter().map(|cs| KFormula::raw(phi.sort.clone(), cs)).collect())
        }
        TranslationBody::MorphismInduced(m) => Ok([m.formula(phi)].into_iter().collect()),
        TranslationBody::Composed { outer, inner } => {
            let mut out = BTreeSet::new();
            for psi in translate_unchecked(inner, phi)? {
                out.extend(translate_unchecked(outer, &psi)?);
            }
            Ok(out)
        }
        TranslationBody::Cases(cases) => {
            for c in cases {
                if let Some(theta) = match_formula(&c.pattern, phi) {
                    return Ok(c.images.iter().map(|i| i.apply(&theta)).collect());
                }
            }
            Ok([phi.clone()].into_iter().collect())
        }
        TranslationBody::Folded { inner, conj } => {
            let img = translate_unchecked(inner, phi)?;
            fold(&tau.name, img, conj).map(|f| [f].into_iter().collect())
        }
    }
}

/// `⟨Γ, e⟩ ↦ {⟨⋃ τ(Γ), e′⟩ | e′ ∈ τ(e)}`.
pub fn translate_sequent(tau: &Translation, seq: &Sequent) -> Result<Vec<Sequent>, TranslationError> {
    let mut premises = BTreeSet::new();
    for p in &seq.premises {
        premises.extend(translate_formula(tau, p)?);
    }
    Ok(translate_formula(tau, &seq.conclusion)?
        .into_iter()
        .map(|c| Sequent { premises: premises.clone(), conclusion: c })
        .collect())
}

pub fn translation_from_morphism(sigma: SignatureMorphism, k: usize) -> Translation {
    Translation {
        name: name(&format!("{}*", sigma.name)),
        source: sigma.source.clone(),
        source_dim: k,
        target: sigma.target.clone(),
        target_dim: k,
        body: TranslationBody::MorphismInduced(sigma),
    }
}

/// `ρ ∘ τ`: first `tau`, then `rho`.
pub fn compose_translations(rho: &Translation, tau: &Translation) -> Result<Translation, TranslationError> {
    if tau.target_dim != rho.source_dim || !tau.target.is_subsignature_of(&rho.source) {
        return Err(TranslationError::InterfaceMismatch(format!(
            "{} produces {}-formulas over a signature that {} does not accept",
            tau.name, tau.target_dim, rho.name
        )));
    }
    Ok(Translation {
        name: name(&format!("{}.{}", rho.name, tau.name)),
        source: tau.source.clone(),
        source_dim: tau.source_dim,
        target: rho.target.clone(),
        target_dim: rho.target_dim,
        body: TranslationBody::Composed { outer: Box::new(rho.clone()), inner: Box::new(tau.clone()) },
    })
}

fn fold_key(f: &KFormula) -> (KFormula, KFormula) {
    (canonicalize(f).unwrap_or_else(|_| f.clone()), f.clone())
}

fn fold(tname: &Name, img: BTreeSet<KFormula>, conj: &Name) -> Result<KFormula, TranslationError> {
    let mut items: Vec<KFormula> = img.into_iter().collect();
    items.sort_by_cached_key(fold_key);
    let mut it = items.into_iter();
    let first = it.next().ok_or_else(|| TranslationError::EmptyImage(tname.clone()))?;
    Ok(it.fold(first, |acc, f| {
        KFormula::raw(acc.sort.clone(), vec![Term::App(conj.clone(), vec![acc.components[0].clone(), f.components[0].clone()].into())])
    }))
}

/// The functional translation folding each image with `conj`.
pub fn associated_function(tau: &Translation, conj: &str) -> Result<Translation, TranslationError> {
    if tau.source_dim != 1 || tau.target_dim != 1 {
        return Err(TranslationError::Dimension(format!("{} is a ({},{})-translation", tau.name, tau.source_dim, tau.target_dim)));
    }
    let prof = tau.target.op(conj).ok_or_else(|| SortError::UnknownOp(name(conj)))?;
    if prof.args.len() != 2 || prof.args[0] != prof.result || prof.args[1] != prof.result {
        return Err(TranslationError::Dimension(format!("`{conj}` is not a binary operation on one sort")));
    }
    Ok(Translation {
        name: name(&format!("f_{}", tau.name)),
        source: tau.source.clone(),
        source_dim: 1,
        target: tau.target.clone(),
        target_dim: 1,
        body: TranslationBody::Folded { inner: Box::new(tau.clone()), conj: name(conj) },
    })
}

/// First failure of substitution commutation found by sampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationWitness {
    pub formula: KFormula,
    pub substitution: Substitution,
    /// `τ(θ(φ))`
    pub translated_instance: Vec<KFormula>,
    /// `θ(τ(φ))`, with `θ` carried to the target.
    pub instantiated_translation: Vec<KFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutationReport {
    pub translation: Name,
    pub samples: usize,
    pub passed: usize,
    pub witness: Option<CommutationWitness>,
}

impl CommutationReport {
    pub fn ok(&self) -> bool {
        self.witness.is_none()
    }
}

/// Random well-sorted terms over a signature.
pub struct TermSampler<'a> {
    sig: &'a Signature,
    vars: Vec<&'static str>,
}

impl<'a> TermSampler<'a> {
    pub fn new(sig: &'a Signature) -> Self {
        TermSampler { sig, vars: vec!["x", "y", "z"] }
    }

    pub fn term(&self, rng: &mut impl Rng, sort: &Name, depth: usize) -> Term {
        let ops: Vec<(&Name, &crate::sigterm::OpProfile)> =
            self.sig.ops.iter().filter(|(_, p)| &p.result == sort).collect();
        let leaf = depth == 0 || ops.is_empty() || rng.gen_bool(0.3);
        if leaf {
            let consts: Vec<&Name> = ops.iter().filter(|(_, p)| p.args.is_empty()).map(|(n, _)| *n).collect();
            if !consts.is_empty() && rng.gen_bool(0.25) {
                return Term::App(consts[rng.gen_range(0..consts.len())].clone(), Vec::new().into());
            }
            let v = self.vars[rng.gen_range(0..self.vars.len())];
            return Term::var(v, sort);
        }
        let (op, prof) = ops[rng.gen_range(0..ops.len())];
        let args: Vec<Term> = prof.args.iter().map(|s| self.term(rng, s, depth - 1)).collect();
        Term::App(op.clone(), args.into())
    }

    pub fn formula(&self, rng: &mut impl Rng, k: usize, depth: usize) -> KFormula {
        let sorts: Vec<&Name> = self.sig.sorts.iter().collect();
        let sort = sorts[rng.gen_range(0..sorts.len())].clone();
        let comps = (0..k).map(|_| self.term(rng, &sort, depth)).collect();
        KFormula::raw(sort, comps)
    }

    /// Substitution on the variables of `f` with random images.
    pub fn substitution_for(&self, rng: &mut impl Rng, f: &KFormula, depth: usize) -> Substitution {
        Substitution(free_variables(f).into_iter().map(|v| {
            let t = self.term(rng, &v.sort, depth);
            (v, t)
        }).collect())
    }
}

/// Right-hand side `θ(τ(φ))` with `θ` carried along the translation.
fn instantiate_image(tau: &Translation, phi: &KFormula, theta: &Substitution) -> Result<Option<BTreeSet<KFormula>>, TranslationError> {
    let img = translate_unchecked(tau, phi)?;
    Ok(match &tau.body {
        TranslationBody::Schematic { embed, .. } => {
            let th = match embed {
                Some(m) => m.substitution(theta),
                None => theta.clone(),
            };
            Some(img.iter().map(|f| f.apply(&th)).collect())
        }
        TranslationBody::MorphismInduced(m) => {
            let th = m.substitution(theta);
            Some(img.iter().map(|f| f.apply(&th)).collect())
        }
        TranslationBody::TermHomomorphic { ops } => {
            // each variable picks one image of its substituted term, uniformly
            // across all of its occurrences
            let vars: Vec<(Variable, Vec<Term>)> = theta
                .iter()
                .map(|(v, t)| (v.clone(), hash_image(ops, t).into_iter().collect()))
                .collect();
            let lists: Vec<Vec<Term>> = vars.iter().map(|(_, l)| l.clone()).collect();
            let mut out = BTreeSet::new();
            for choice in product(&lists) {
                let th = Substitution::from_pairs(vars.iter().map(|(v, _)| v.clone()).zip(choice));
                out.extend(img.iter().map(|f| f.apply(&th)));
            }
            Some(out)
        }
        TranslationBody::Cases(_) | TranslationBody::Folded { .. } => {
            if !tau.is_self_translation() {
                return Err(TranslationError::NotSelfTranslation(tau.name.clone()));
            }
            Some(img.iter().map(|f| f.apply(theta)).collect())
        }
        TranslationBody::Composed { .. } => None,
    })
}

/// Sample `samples` pairs `(θ, φ)` and compare `τ(θφ)` with `θ(τφ)`.
/// Composite translations are checked component by component.
pub fn check_substitution_commutation(tau: &Translation, samples: usize, seed: u64) -> Result<CommutationReport, TranslationError> {
    if let TranslationBody::Composed { outer, inner } = &tau.body {
        let a = check_substitution_commutation(inner, samples, seed)?;
        if !a.ok() {
            return Ok(CommutationReport { translation: tau.name.clone(), ..a });
        }
        let b = check_substitution_commutation(outer, samples, seed.wrapping_add(1))?;
        return Ok(CommutationReport { translation: tau.name.clone(), samples: a.samples + b.samples, passed: a.passed + b.passed, witness: b.witness });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = TermSampler::new(&tau.source);
    let mut report = CommutationReport { translation: tau.name.clone(), samples: 0, passed: 0, witness: None };
    for _ in 0..samples {
        let phi = sampler.formula(&mut rng, tau.source_dim, 2);
        let theta = sampler.substitution_for(&mut rng, &phi, 2);
        let lhs = match translate_unchecked(tau, &phi.apply(&theta)) {
            Ok(l) => l,
            Err(TranslationError::MissingTemplate { .. }) => continue,
            Err(e) => return Err(e),
        };
        let rhs = instantiate_image(tau, &phi, &theta)?.expect("composites handled above");
        report.samples += 1;
        if lhs == rhs {
            report.passed += 1;
        } else if report.witness.is_none() {
            report.witness = Some(CommutationWitness {
                formula: phi,
                substitution: theta,
                translated_instance: lhs.into_iter().collect(),
                instantiated_translation: rhs.into_iter().collect(),
            });
        }
    }
    Ok(report)
}

/// Deterministic witness search for a case-split translation: tries each
/// pattern's instance by a one-step substitution into a bare variable formula.
pub fn commutation_witness_for(tau: &Translation, phi: &KFormula, theta: &Substitution) -> Result<Option<CommutationWitness>, TranslationError> {
    let lhs = translate_unchecked(tau, &phi.apply(theta))?;
    let rhs = instantiate_image(tau, phi, theta)?.unwrap_or_default();
    Ok((lhs != rhs).then(|| CommutationWitness {
        formula: phi.clone(),
        substitution: theta.clone(),
        translated_instance: lhs.into_iter().collect(),
        instantiated_translation: rhs.into_iter().collect(),
    }))
}
