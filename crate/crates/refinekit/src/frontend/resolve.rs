//! Name resolution and sort checking: surface declarations become
//! presentations, morphisms, translations and structures.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::parser::parse;
use super::printer;
use super::{FrontendError, Span};
use crate::deduction::{free_equational_presentation, ItemKind, Presentation};
use crate::models::{diagonal, FiniteKStructure, FilterMode};
use crate::sigterm::{check_well_sorted, name, KFormula, Name, Sequent, Signature, Term, Variable};
use crate::translation::{
    translation_from_morphism, Case, OpTemplates, SignatureMorphism, Translation,
};

/// Variable declarations of one block: name to sort.
pub type Scope = BTreeMap<String, Name>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectiveKind {
    Derive,
    Decide,
    Countermodel,
    RefineInterp,
    RefineSigma,
    RefineLogical,
    Interpret,
    Reflect,
    Compose,
}

impl DirectiveKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "derive" => Self::Derive,
            "decide" => Self::Decide,
            "countermodel" => Self::Countermodel,
            "refine-interp" => Self::RefineInterp,
            "refine-sigma" => Self::RefineSigma,
            "refine-logical" => Self::RefineLogical,
            "interpret" => Self::Interpret,
            "reflect" => Self::Reflect,
            "compose" => Self::Compose,
            _ => return None,
        })
    }
}

/// A resolved `check` declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Directive {
    pub kind: DirectiveKind,
    pub operands: Vec<String>,
    pub via: Vec<String>,
    pub goal: Option<KFormula>,
    pub from: Vec<KFormula>,
    /// Budget overrides, validated.
    pub with: Vec<(String, String)>,
    /// Canonical source text, used as the report's directive field.
    pub text: String,
}

pub const BUDGET_KEYS: &[&str] =
    &["rounds", "derived", "depth", "time", "size", "nodes", "samples", "seed", "reflect_depth", "reflect_candidates", "filters"];

/// A fully resolved document. Every list is in declaration order; each
/// presentation also contributes its signature under its own name.
#[derive(Debug, Clone, Default)]
pub struct Document {
    pub signatures: Vec<(String, Signature)>,
    pub presentations: Vec<Presentation>,
    pub scopes: BTreeMap<String, Scope>,
    pub morphisms: Vec<SignatureMorphism>,
    pub translations: Vec<Translation>,
    pub structures: Vec<FiniteKStructure>,
    pub directives: Vec<Directive>,
}

impl Document {
    pub fn presentation(&self, n: &str) -> Option<&Presentation> {
        self.presentations.iter().find(|p| &*p.name == n)
    }

    pub fn translation(&self, n: &str) -> Option<&Translation> {
        self.translations.iter().find(|t| &*t.name == n)
    }

    pub fn morphism(&self, n: &str) -> Option<&SignatureMorphism> {
        self.morphisms.iter().find(|m| &*m.name == n)
    }

    pub fn structure(&self, n: &str) -> Option<&FiniteKStructure> {
        self.structures.iter().find(|m| &*m.name == n)
    }

    /// The signature of a signature declaration or of a presentation.
    pub fn signature(&self, n: &str) -> Option<&Signature> {
        self.signatures.iter().find(|(k, _)| k == n).map(|(_, s)| s)
    }

    pub fn scope(&self, n: &str) -> Option<&Scope> {
        self.scopes.get(n)
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
            && self.presentations.is_empty()
            && self.morphisms.is_empty()
            && self.translations.is_empty()
            && self.structures.is_empty()
            && self.directives.is_empty()
    }

    /// Resolve a formula against the signature and variables of `block`.
    pub fn formula_in(&self, block: &str, f: &SFormula) -> Result<KFormula, FrontendError> {
        let sig = self.signature(block).ok_or_else(|| unresolved(block, f.span()))?;
        let scope = self.scopes.get(block).cloned().unwrap_or_default();
        let dim = self.presentation(block).map(|p| p.dim);
        formula(sig, &scope, f, dim)
    }

    /// Parse and resolve a formula given as text.
    pub fn parse_formula_in(&self, block: &str, src: &str) -> Result<KFormula, FrontendError> {
        self.formula_in(block, &super::parser::parse_formula(src)?)
    }
}

fn res<T>(msg: impl Into<String>, span: Span) -> Result<T, FrontendError> {
    Err(FrontendError::Resolution { msg: msg.into(), span })
}

fn unresolved(n: &str, span: Span) -> FrontendError {
    FrontendError::Resolution { msg: format!("unknown name `{n}`"), span }
}

fn sort_err(e: impl std::fmt::Display, span: Span) -> FrontendError {
    FrontendError::Sort { msg: e.to_string(), span }
}

pub fn term(sig: &Signature, scope: &Scope, t: &STerm) -> Result<Term, FrontendError> {
    match t {
        STerm::Ident(n, span) => {
            if let Some(sort) = scope.get(n) {
                return Ok(Term::var(n, sort));
            }
            match sig.op(n) {
                Some(p) if p.args.is_empty() => Ok(Term::constant(n)),
                Some(p) => Err(sort_err(format!("`{n}` expects {} arguments", p.args.len()), *span)),
                None => res(format!("unknown identifier `{n}`"), *span),
            }
        }
        STerm::App(op, args, span) => {
            let Some(p) = sig.op(op) else {
                return res(format!("unknown operation `{op}`"), *span);
            };
            if p.args.len() != args.len() {
                return Err(sort_err(format!("`{op}` expects {} arguments, found {}", p.args.len(), args.len()), *span));
            }
            let args = args.iter().map(|a| term(sig, scope, a)).collect::<Result<Vec<_>, _>>()?;
            let t = Term::app(op, args);
            check_well_sorted(sig, &t).map_err(|e| sort_err(e, *span))?;
            Ok(t)
        }
    }
}

pub fn formula(sig: &Signature, scope: &Scope, f: &SFormula, dim: Option<usize>) -> Result<KFormula, FrontendError> {
    let comps = match f {
        SFormula::Tuple(ts, _) => ts.iter().map(|t| term(sig, scope, t)).collect::<Result<Vec<_>, _>>()?,
        SFormula::Eq(l, r, _) => vec![term(sig, scope, l)?, term(sig, scope, r)?],
        SFormula::Bare(t) => vec![term(sig, scope, t)?],
    };
    let k = KFormula::new(sig, comps).map_err(|e| sort_err(e, f.span()))?;
    if let Some(d) = dim {
        if k.dim() != d {
            return Err(sort_err(format!("expected a {d}-formula, found `{}` of dimension {}", k, k.dim()), f.span()));
        }
    }
    Ok(k)
}

/// Accumulates one `signature`, `dsystem` or `spec` block.
struct Block {
    name: String,
    sig: Signature,
    vars: Scope,
    dim: Option<usize>,
    equality: bool,
    entries: Vec<(Sequent, Name, Name, ItemKind)>,
    axioms: usize,
    rules: usize,
}

struct Resolver<'a> {
    doc: Document,
    names: BTreeSet<String>,
    imported: BTreeSet<String>,
    loader: &'a mut dyn FnMut(&str) -> Result<String, FrontendError>,
}

/// Parse and resolve `text`; imports are looked up in the shipped corpus.
pub fn parse_document(text: &str) -> Result<Document, FrontendError> {
    let mut load = |n: &str| {
        super::corpus::corpus_file(n).map(|f| f.text.to_string()).ok_or_else(|| FrontendError::Io(format!("no corpus file `{n}`")))
    };
    parse_document_with(text, &mut load)
}

/// Parse and resolve `text` with a custom import loader.
pub fn parse_document_with(
    text: &str,
    loader: &mut dyn FnMut(&str) -> Result<String, FrontendError>,
) -> Result<Document, FrontendError> {
    let mut r = Resolver { doc: Document::default(), names: BTreeSet::new(), imported: BTreeSet::new(), loader };
    r.decls(&parse(text)?, true)?;
    Ok(r.doc)
}

impl Resolver<'_> {
    fn decls(&mut self, decls: &[Decl], top: bool) -> Result<(), FrontendError> {
        for d in decls {
            match d {
                Decl::Import(path, span) => {
                    if self.imported.insert(path.clone()) {
                        let text = (self.loader)(path).map_err(|e| FrontendError::Resolution {
                            msg: format!("cannot import `{path}`: {e}"),
                            span: *span,
                        })?;
                        let inner = parse(&text)?;
                        self.decls(&inner, false)?;
                    }
                }
                Decl::Check(c) if !top => {
                    let _ = c;
                }
                Decl::Check(c) => {
                    let dir = self.directive(c)?;
                    self.doc.directives.push(dir);
                }
                Decl::Signature { name, items, span } => {
                    self.claim(name, *span)?;
                    let b = self.block(name, items, None)?;
                    self.doc.scopes.insert(name.clone(), b.vars);
                    self.doc.signatures.push((name.clone(), b.sig));
                }
                Decl::System { kind, name, items, span } => {
                    self.claim(name, *span)?;
                    let b = self.block(name, items, Some(*kind))?;
                    self.doc.scopes.insert(name.clone(), b.vars.clone());
                    let p = self.presentation(b, *kind, *span)?;
                    self.doc.signatures.push((name.clone(), p.signature.clone()));
                    self.doc.presentations.push(p);
                }
                Decl::Morphism { name, source, target, sorts, ops, span } => {
                    self.claim(name, *span)?;
                    let m = self.morphism(name, source, target, sorts, ops, *span)?;
                    self.doc.morphisms.push(m);
                }
                Decl::Translation { name, source, source_dim, target, target_dim, body, span } => {
                    self.claim(name, *span)?;
                    let t = self.translation(name, (source, *source_dim), (target, *target_dim), body, *span)?;
                    self.doc.translations.push(t);
                }
                Decl::Structure { name, over, items, span } => {
                    self.claim(name, *span)?;
                    let m = self.structure(name, over, items, *span)?;
                    self.doc.structures.push(m);
                }
            }
        }
        Ok(())
    }

    fn claim(&mut self, n: &str, span: Span) -> Result<(), FrontendError> {
        if !self.names.insert(n.to_string()) {
            return res(format!("duplicate declaration of `{n}`"), span);
        }
        Ok(())
    }

    /// Signature, variables and dimension of a named block.
    fn endpoint(&self, n: &str, span: Span) -> Result<(Signature, Scope, Option<usize>), FrontendError> {
        let sig = self.doc.signature(n).ok_or_else(|| unresolved(n, span))?;
        let scope = self.doc.scopes.get(n).cloned().unwrap_or_default();
        Ok((sig.clone(), scope, self.doc.presentation(n).map(|p| p.dim)))
    }

    fn block(&mut self, bname: &str, items: &[Item], kind: Option<SystemKind>) -> Result<Block, FrontendError> {
        let mut b = Block {
            name: bname.to_string(),
            sig: Signature::new(),
            vars: Scope::new(),
            dim: if kind == Some(SystemKind::Spec) { Some(2) } else { None },
            equality: false,
            entries: Vec::new(),
            axioms: 0,
            rules: 0,
        };
        let only_system = |what: &str, span: Span| -> Result<(), FrontendError> {
            if kind.is_none() {
                return res(format!("`{what}` is not allowed in a signature block"), span);
            }
            Ok(())
        };
        for it in items {
            match it {
                Item::Dim(k) => {
                    only_system("dim", Span::default())?;
                    if *k == 0 || (kind == Some(SystemKind::Spec) && *k != 2) {
                        return res(format!("`{bname}` cannot have dimension {k}"), Span::default());
                    }
                    if b.dim.is_some_and(|d| d != *k) && !b.entries.is_empty() {
                        return res(format!("dimension {k} conflicts with earlier items of `{bname}`"), Span::default());
                    }
                    b.dim = Some(*k);
                }
                Item::Include(n, span) => self.include(&mut b, n, *span)?,
                Item::Sorts(ss) => {
                    for s in ss {
                        b.sig.add_sort(s);
                    }
                }
                Item::Ops(ops, span) => {
                    for o in ops {
                        let args: Vec<&str> = o.args.iter().map(String::as_str).collect();
                        if let Some(p) = b.sig.op(&o.name) {
                            let same = p.args.iter().map(|a| &**a).eq(args.iter().copied()) && &*p.result == o.result.as_str();
                            if same {
                                continue;
                            }
                        }
                        b.sig.add_op(&o.name, &args, &o.result).map_err(|e| FrontendError::Resolution { msg: e.to_string(), span: *span })?;
                    }
                }
                Item::Vars(vs, sort, span) => {
                    if !b.sig.sorts.contains(sort.as_str()) {
                        return res(format!("unknown sort `{sort}`"), *span);
                    }
                    for v in vs {
                        match b.vars.get(v) {
                            Some(s) if &**s != sort.as_str() => {
                                return res(format!("variable `{v}` redeclared with sort `{sort}`"), *span);
                            }
                            _ => {
                                b.vars.insert(v.clone(), name(sort));
                            }
                        }
                    }
                }
                Item::Equality => {
                    only_system("equality", Span::default())?;
                    b.equality = true;
                }
                Item::Axioms(axs) => {
                    for (label, f) in axs {
                        only_system("axioms", f.span())?;
                        let k = self.block_formula(&mut b, f)?;
                        b.axioms += 1;
                        let item = label.clone().unwrap_or_else(|| format!("ax{}", b.axioms));
                        b.entries.push((Sequent::axiom(k), name(&item), name(bname), ItemKind::Proper));
                    }
                }
                Item::Rule { label, premises, conclusion, .. } => {
                    only_system("rule", conclusion.span())?;
                    let ps = premises.iter().map(|p| self.block_formula(&mut b, p)).collect::<Result<Vec<_>, _>>()?;
                    let c = self.block_formula(&mut b, conclusion)?;
                    b.rules += 1;
                    let item = label.clone().unwrap_or_else(|| format!("rule{}", b.rules));
                    b.entries.push((Sequent::new(ps, c), name(&item), name(bname), ItemKind::Proper));
                }
            }
        }
        for v in b.vars.keys() {
            if b.sig.op(v).is_some_and(|p| p.args.is_empty()) {
                return res(format!("variable `{v}` of `{bname}` clashes with a constant"), Span::default());
            }
        }
        Ok(b)
    }

    fn block_formula(&self, b: &mut Block, f: &SFormula) -> Result<KFormula, FrontendError> {
        let k = formula(&b.sig, &b.vars, f, b.dim)?;
        b.dim.get_or_insert(k.dim());
        Ok(k)
    }

    fn include(&self, b: &mut Block, n: &str, span: Span) -> Result<(), FrontendError> {
        let (sig, scope, dim) = self.endpoint(n, span)?;
        b.sig.union(&sig).map_err(|e| FrontendError::Resolution { msg: format!("including `{n}`: {e}"), span })?;
        for (v, s) in scope {
            match b.vars.get(&v) {
                Some(t) if t != &s => return res(format!("including `{n}`: variable `{v}` has two sorts"), span),
                _ => {
                    b.vars.insert(v, s);
                }
            }
        }
        if let Some(d) = dim {
            match b.dim {
                Some(e) if e != d => return res(format!("including `{n}`: dimension {d} differs from {e}"), span),
                _ => b.dim = Some(d),
            }
        }
        if let Some(p) = self.doc.presentation(n) {
            b.equality |= p.rules.iter().any(|r| r.kind == ItemKind::Equality);
            for a in &p.axioms {
                b.entries.push((Sequent::axiom(a.formula.clone()), a.name.clone(), a.origin.clone(), a.kind));
            }
            for r in &p.rules {
                b.entries.push((r.sequent.clone(), r.name.clone(), r.origin.clone(), r.kind));
            }
        }
        Ok(())
    }

    fn presentation(&self, b: Block, kind: SystemKind, span: Span) -> Result<Presentation, FrontendError> {
        let dim = b.dim.unwrap_or(2);
        let horn = kind == SystemKind::Spec;
        if b.equality && dim != 2 {
            return res(format!("`{}`: equality needs dimension 2", b.name), span);
        }
        let mut p = if horn || b.equality {
            free_equational_presentation(&b.sig).named(&b.name)
        } else {
            Presentation::empty(&b.name, b.sig.clone(), dim)
        };
        p.horn = horn;
        for (seq, item, origin, k) in b.entries {
            if k == ItemKind::Equality && (horn || b.equality) {
                continue;
            }
            p.push_rule(seq, &item, &origin, k).map_err(|e| sort_err(e, span))?;
        }
        Ok(p)
    }

    fn morphism(
        &self,
        mname: &str,
        source: &str,
        target: &str,
        sorts: &[(String, String)],
        ops: &[(String, String)],
        span: Span,
    ) -> Result<SignatureMorphism, FrontendError> {
        let (src, ..) = self.endpoint(source, span)?;
        let (tgt, ..) = self.endpoint(target, span)?;
        let sort_map = sorts.iter().map(|(a, b)| (name(a), name(b))).collect();
        let op_map = ops.iter().map(|(a, b)| (name(a), name(b))).collect();
        SignatureMorphism::new(mname, src, tgt, sort_map, op_map, BTreeMap::new()).map_err(|e| sort_err(e, span))
    }

    fn translation(
        &self,
        tname: &str,
        (source, sdim): (&str, usize),
        (target, tdim): (&str, usize),
        body: &TransBody,
        span: Span,
    ) -> Result<Translation, FrontendError> {
        let (ssig, sscope, sd) = self.endpoint(source, span)?;
        let (tsig, tscope, td) = self.endpoint(target, span)?;
        if sd.is_some_and(|d| d != sdim) || td.is_some_and(|d| d != tdim) || sdim == 0 || tdim == 0 {
            return Err(sort_err(format!("dimensions of `{tname}` do not match its endpoints"), span));
        }
        let tr = |e| sort_err(e, span);
        let clauses = match body {
            TransBody::Morphism(m) => {
                let m = self.doc.morphism(m).ok_or_else(|| unresolved(m, span))?;
                if m.source != ssig || m.target != tsig || sdim != tdim {
                    return Err(sort_err(format!("morphism `{}` does not connect `{source}` and `{target}`", m.name), span));
                }
                let mut t = translation_from_morphism(m.clone(), sdim);
                t.name = name(tname);
                return Ok(t);
            }
            TransBody::Clauses(cs) => cs,
        };
        let has = |f: fn(&TransClause) -> bool| clauses.iter().any(f);
        let sorts = has(|c| matches!(c, TransClause::Sort { .. } | TransClause::Embed(..)));
        let ops = has(|c| matches!(c, TransClause::Op { .. }));
        let cases = has(|c| matches!(c, TransClause::Case { .. }));
        if [sorts, ops, cases].iter().filter(|x| **x).count() > 1 {
            return res(format!("`{tname}` mixes sort, op and case clauses"), span);
        }
        if ops {
            let mut map = BTreeMap::new();
            for c in clauses {
                let TransClause::Op { op, placeholders, images, span } = c else { unreachable!() };
                let prof = ssig.op(op).ok_or_else(|| unresolved(op, *span))?;
                if prof.args.len() != placeholders.len() {
                    return Err(sort_err(format!("`{op}` takes {} arguments", prof.args.len()), *span));
                }
                let mut scope = tscope.clone();
                let vars: Vec<Variable> = placeholders
                    .iter()
                    .zip(&prof.args)
                    .map(|(x, s)| {
                        scope.insert(x.clone(), s.clone());
                        Variable::new(x, s)
                    })
                    .collect();
                let imgs = images.iter().map(|i| term(&tsig, &scope, i)).collect::<Result<Vec<_>, _>>()?;
                map.insert(name(op), OpTemplates { placeholders: vars, images: imgs });
            }
            if sdim != tdim {
                return Err(sort_err(format!("term-homomorphic `{tname}` must keep the dimension"), span));
            }
            return Translation::term_homomorphic(tname, ssig, tsig, sdim, map).map_err(tr);
        }
        if cases {
            if ssig != tsig || sdim != tdim {
                return Err(sort_err(format!("case translation `{tname}` must be a self-translation"), span));
            }
            let mut out = Vec::new();
            for c in clauses {
                let TransClause::Case { pattern, images, .. } = c else { unreachable!() };
                let pattern = formula(&ssig, &sscope, pattern, Some(sdim))?;
                let images = images.iter().map(|i| formula(&tsig, &tscope, i, Some(tdim))).collect::<Result<Vec<_>, _>>()?;
                out.push(Case { pattern, images });
            }
            return Translation::cases(tname, ssig, sdim, out).map_err(tr);
        }
        let (mut sort_map, mut placeholders, mut templates, mut embed) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), None);
        for c in clauses {
            match c {
                TransClause::Embed(m, span) => {
                    let m = self.doc.morphism(m).ok_or_else(|| unresolved(m, *span))?;
                    embed = Some(m.clone());
                }
                TransClause::Sort { sort, target_sort, placeholders: ph, images, span } => {
                    if !ssig.sorts.contains(sort.as_str()) {
                        return res(format!("unknown sort `{sort}`"), *span);
                    }
                    let ts = name(target_sort.as_deref().unwrap_or(sort));
                    if !tsig.sorts.contains(&ts) {
                        return res(format!("unknown target sort `{ts}`"), *span);
                    }
                    if ph.len() != sdim {
                        return Err(sort_err(format!("sort `{sort}` needs {sdim} placeholders"), *span));
                    }
                    let mut scope = tscope.clone();
                    for x in ph {
                        if tsig.op(x).is_some() {
                            return res(format!("placeholder `{x}` clashes with an operation"), *span);
                        }
                        scope.insert(x.clone(), ts.clone());
                    }
                    let imgs = images.iter().map(|i| formula(&tsig, &scope, i, Some(tdim))).collect::<Result<Vec<_>, _>>()?;
                    sort_map.insert(name(sort), ts.clone());
                    placeholders.insert(name(sort), ph.iter().map(|x| Variable::new(x, &ts)).collect::<Vec<_>>());
                    templates.insert(name(sort), imgs);
                }
                _ => unreachable!(),
            }
        }
        // unlisted sorts translate to themselves when that type-checks
        if sdim == tdim {
            for s in &ssig.sorts {
                if !templates.contains_key(s) && tsig.sorts.contains(s) {
                    let ph: Vec<Variable> = (1..=sdim).map(|i| Variable::new(&format!("X{i}"), s)).collect();
                    let t = KFormula::raw(s.clone(), ph.iter().cloned().map(Term::Var).collect());
                    sort_map.insert(s.clone(), s.clone());
                    placeholders.insert(s.clone(), ph);
                    templates.insert(s.clone(), vec![t]);
                }
            }
        }
        Translation::schematic(tname, (ssig, sdim), (tsig, tdim), sort_map, placeholders, templates, embed).map_err(tr)
    }

    fn structure(&self, sname: &str, over: &str, items: &[StructItem], span: Span) -> Result<FiniteKStructure, FrontendError> {
        let (sig, _, pdim) = self.endpoint(over, span)?;
        let mut dim = pdim.unwrap_or(2);
        let mut carriers: BTreeMap<Name, Vec<String>> = BTreeMap::new();
        let mut named: BTreeSet<Name> = BTreeSet::new();
        let mut tables = BTreeMap::new();
        let mut filters = BTreeMap::new();
        let mut labels = Vec::new();
        let index = |carriers: &BTreeMap<Name, Vec<String>>, sort: &Name, e: &str, span: Span| {
            carriers
                .get(sort)
                .and_then(|els| els.iter().position(|x| x == e))
                .ok_or_else(|| FrontendError::Resolution { msg: format!("`{e}` is not an element of `{sort}`"), span })
        };
        for it in items {
            match it {
                StructItem::Dim(k) => dim = *k,
                StructItem::Carrier { sort, elements, sized, span } => {
                    if !sig.sorts.contains(sort.as_str()) {
                        return res(format!("unknown sort `{sort}`"), *span);
                    }
                    let distinct: BTreeSet<&String> = elements.iter().collect();
                    if elements.is_empty() || distinct.len() != elements.len() {
                        return res(format!("carrier of `{sort}` must list distinct elements"), *span);
                    }
                    if !sized {
                        named.insert(name(sort));
                    }
                    carriers.insert(name(sort), elements.clone());
                }
                StructItem::Table { op, entries, span } => {
                    let prof = sig.op(op).ok_or_else(|| unresolved(op, *span))?;
                    let vals = entries.iter().map(|e| index(&carriers, &prof.result, e, *span)).collect::<Result<Vec<_>, _>>()?;
                    tables.insert(name(op), vals);
                }
                StructItem::Filter { sort, tuples, span } => {
                    let s = name(sort);
                    let n = carriers.get(&s).map(Vec::len).ok_or_else(|| unresolved(sort, *span))?;
                    let f = match tuples {
                        None => diagonal(n, dim),
                        Some(ts) => ts
                            .iter()
                            .map(|t| t.iter().map(|e| index(&carriers, &s, e, *span)).collect::<Result<Vec<_>, _>>())
                            .collect::<Result<BTreeSet<_>, _>>()?,
                    };
                    filters.insert(s, f);
                }
                StructItem::Label(l) => labels.push(l.clone()),
            }
        }
        for (s, els) in &carriers {
            filters.entry(s.clone()).or_insert_with(|| diagonal(els.len(), dim));
        }
        let m = FiniteKStructure {
            name: name(sname),
            signature: sig,
            dim,
            carriers: carriers.iter().map(|(s, e)| (s.clone(), e.len())).collect(),
            tables,
            filters,
            element_names: carriers.into_iter().filter(|(s, _)| named.contains(s)).collect(),
            labels,
        };
        m.validate().map_err(|e| FrontendError::Resolution { msg: format!("structure `{sname}`: {e}"), span })?;
        Ok(m)
    }

    fn directive(&self, c: &CheckDecl) -> Result<Directive, FrontendError> {
        use DirectiveKind::*;
        let kind = DirectiveKind::parse(&c.kind).ok_or_else(|| FrontendError::Resolution {
            msg: format!("unknown check kind `{}`", c.kind),
            span: c.span,
        })?;
        let (operands, vias, needs_goal): (usize, &[usize], bool) = match kind {
            Derive | Decide | Countermodel => (1, &[0], true),
            RefineInterp | Interpret | Reflect | RefineSigma => (2, &[1], false),
            RefineLogical => (2, &[0], false),
            Compose => (3, &[0, 2], false),
        };
        if c.operands.len() != operands || !vias.contains(&c.via.len()) {
            return res(format!("`check {}` takes {operands} operands and {:?} via names", c.kind, vias), c.span);
        }
        if needs_goal != c.goal.is_some() || (!needs_goal && !c.from.is_empty()) {
            let msg = if needs_goal { "needs a goal" } else { "takes no goal" };
            return res(format!("`check {}` {msg}", c.kind), c.span);
        }
        for o in &c.operands {
            if self.doc.presentation(o).is_none() {
                return Err(unresolved(o, c.span));
            }
        }
        for v in &c.via {
            let found = match kind {
                RefineSigma => self.doc.morphism(v).is_some(),
                _ => self.doc.translation(v).is_some(),
            };
            if !found {
                return Err(unresolved(v, c.span));
            }
        }
        for (k, v) in &c.with {
            let base = k.split('.').next().unwrap_or(k);
            if !BUDGET_KEYS.contains(&base) || (k.contains('.') && base != "size") {
                return res(format!("unknown budget key `{k}`"), c.span);
            }
            let ok = if base == "filters" { v == "identity" || v == "all" } else { v.parse::<u64>().is_ok() };
            if !ok {
                return res(format!("bad value `{v}` for `{k}`"), c.span);
            }
        }
        let block = &c.operands[0];
        let goal = c.goal.as_ref().map(|g| self.doc.formula_in(block, g)).transpose()?;
        let from = c.from.iter().map(|f| self.doc.formula_in(block, f)).collect::<Result<Vec<_>, _>>()?;
        Ok(Directive {
            kind,
            operands: c.operands.clone(),
            via: c.via.clone(),
            goal,
            from,
            with: c.with.clone(),
            text: printer::check(c),
        })
    }
}

/// Filter mode named in a `filters = ...` override.
pub fn filter_mode(v: &str) -> Option<FilterMode> {
    match v {
        "identity" => Some(FilterMode::Identity),
        "all" => Some(FilterMode::All),
        _ => None,
    }
}
