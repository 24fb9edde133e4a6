//! Canonical text for surface documents. Output reparses to an equal AST.

use std::fmt::Write;

use super::ast::*;
use super::lexer::is_symbolic_name;

fn is_infix(t: &STerm) -> bool {
    matches!(t, STerm::App(op, args, _) if args.len() == 2 && is_symbolic_name(op) && op != "!")
}

fn is_prefix(t: &STerm) -> bool {
    matches!(t, STerm::App(op, args, _) if args.len() == 1 && is_symbolic_name(op))
}

fn operand(t: &STerm) -> String {
    if is_infix(t) {
        format!("({})", term(t))
    } else {
        term(t)
    }
}

pub fn term(t: &STerm) -> String {
    match t {
        STerm::Ident(s, _) => s.clone(),
        STerm::App(op, args, _) if is_symbolic_name(op) => match args.as_slice() {
            [a] if op == "!" || !is_prefix(a) => format!("{op}{}", operand(a)),
            [a, b] if op != "!" => format!("{} {op} {}", operand(a), operand(b)),
            _ => format!("{op}({})", join(args.iter().map(term))),
        },
        STerm::App(op, args, _) => format!("{op}({})", join(args.iter().map(term))),
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

pub fn formula(f: &SFormula) -> String {
    match f {
        SFormula::Tuple(ts, _) => format!("<{}>", join(ts.iter().map(term))),
        SFormula::Eq(l, r, _) => format!("{} ~ {}", term(l), term(r)),
        SFormula::Bare(t) => term(t),
    }
}

fn labeled(label: &Option<String>, body: String) -> String {
    match label {
        Some(l) => format!("{l}: {body}"),
        None => body,
    }
}

fn item(out: &mut String, it: &Item) {
    let line = match it {
        Item::Dim(k) => format!("dim {k};"),
        Item::Include(n, _) => format!("include {n};"),
        Item::Sorts(ss) => format!("sorts {};", ss.join(", ")),
        Item::Ops(ops, _) => {
            let ds = ops.iter().map(|o| {
                let args = if o.args.is_empty() { String::new() } else { format!("{} ", o.args.join(" * ")) };
                format!("{} : {args}-> {}", o.name, o.result)
            });
            format!("ops {};", join(ds))
        }
        Item::Vars(vs, s, _) => format!("vars {} : {s};", vs.join(", ")),
        Item::Equality => "equality;".into(),
        Item::Axioms(axs) => format!("axioms {};", join(axs.iter().map(|(l, f)| labeled(l, formula(f))))),
        Item::Rule { label, premises, conclusion, style } => {
            let ps = join(premises.iter().map(formula));
            match style {
                RuleStyle::Turnstile => {
                    let lhs = if ps.is_empty() { String::new() } else { format!("{ps} ") };
                    format!("rule {};", labeled(label, format!("{lhs}|- {}", formula(conclusion))))
                }
                RuleStyle::Conditional => format!("cond {};", labeled(label, format!("{ps} => {}", formula(conclusion)))),
            }
        }
    };
    let _ = writeln!(out, "  {line}");
}

fn clause(out: &mut String, c: &TransClause) {
    let line = match c {
        TransClause::Sort { sort, target_sort, placeholders, images, .. } => {
            let tgt = target_sort.as_ref().map(|t| format!(" as {t}")).unwrap_or_default();
            format!("sort {sort}{tgt}: <{}> ~> {{ {} }};", placeholders.join(", "), join(images.iter().map(formula)))
        }
        TransClause::Op { op, placeholders, images, .. } => {
            let ph = if placeholders.is_empty() { String::new() } else { format!("({})", placeholders.join(", ")) };
            format!("op {op}{ph} ~> {{ {} }};", join(images.iter().map(term)))
        }
        TransClause::Case { pattern, images, .. } => {
            format!("case {} ~> {{ {} }};", formula(pattern), join(images.iter().map(formula)))
        }
        TransClause::Embed(m, _) => format!("embed {m};"),
    };
    let _ = writeln!(out, "  {line}");
}

fn struct_item(out: &mut String, it: &StructItem) {
    let line = match it {
        StructItem::Dim(k) => format!("dim {k};"),
        StructItem::Carrier { sort, elements, sized: true, .. } => format!("carrier {sort} = {};", elements.len()),
        StructItem::Carrier { sort, elements, .. } => format!("carrier {sort} = {{{}}};", elements.join(", ")),
        StructItem::Table { op, entries, .. } => format!("table {op} = [{}];", entries.join(", ")),
        StructItem::Filter { sort, tuples: None, .. } => format!("filter {sort} = identity;"),
        StructItem::Filter { sort, tuples: Some(ts), .. } => {
            format!("filter {sort} = {{{}}};", join(ts.iter().map(|t| format!("<{}>", t.join(", ")))))
        }
        StructItem::Label(l) => format!("label \"{l}\";"),
    };
    let _ = writeln!(out, "  {line}");
}

pub fn check(c: &CheckDecl) -> String {
    let mut s = format!("check {}", c.kind);
    for o in &c.operands {
        s.push(' ');
        s.push_str(o);
    }
    if !c.via.is_empty() {
        let _ = write!(s, " via {}", c.via.join(", "));
    }
    if let Some(g) = &c.goal {
        let _ = write!(s, " goal {}", formula(g));
    }
    if !c.from.is_empty() {
        let _ = write!(s, " from {}", join(c.from.iter().map(formula)));
    }
    if !c.with.is_empty() {
        let _ = write!(s, " with {}", join(c.with.iter().map(|(k, v)| format!("{k} = {v}"))));
    }
    s.push(';');
    s
}

pub fn print_document(decls: &[Decl]) -> String {
    let mut out = String::new();
    for (i, d) in decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match d {
            Decl::Import(p, _) => {
                let _ = writeln!(out, "import \"{p}\";");
            }
            Decl::Signature { name, items, .. } | Decl::System { name, items, .. } => {
                let kw = match d {
                    Decl::Signature { .. } => "signature",
                    Decl::System { kind: SystemKind::Spec, .. } => "spec",
                    _ => "dsystem",
                };
                let _ = writeln!(out, "{kw} {name} {{");
                items.iter().for_each(|it| item(&mut out, it));
                out.push_str("}\n");
            }
            Decl::Morphism { name, source, target, sorts, ops, .. } => {
                let _ = writeln!(out, "morphism {name} : {source} -> {target} {{");
                for (a, b) in sorts {
                    let _ = writeln!(out, "  sort {a} ~> {b};");
                }
                for (a, b) in ops {
                    let _ = writeln!(out, "  op {a} ~> {b};");
                }
                out.push_str("}\n");
            }
            Decl::Translation { name, source, source_dim, target, target_dim, body, .. } => {
                let _ = write!(out, "translation {name} : {source}({source_dim}) -> {target}({target_dim})");
                match body {
                    TransBody::Morphism(m) => {
                        let _ = writeln!(out, " from morphism {m};");
                    }
                    TransBody::Clauses(cs) => {
                        out.push_str(" {\n");
                        cs.iter().for_each(|c| clause(&mut out, c));
                        out.push_str("}\n");
                    }
                }
            }
            Decl::Structure { name, over, items, .. } => {
                let _ = writeln!(out, "structure {name} : {over} {{");
                items.iter().for_each(|it| struct_item(&mut out, it));
                out.push_str("}\n");
            }
            Decl::Check(c) => {
                let _ = writeln!(out, "{}", check(c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse, parse_formula};
    use super::*;

    #[test]
    fn nested_prefix_and_infix_round_trip() {
        for src in ["!!(p -> q)", "(p -> q) -> r", "p -> q -> r", "-(-x)", "neg(x) + s(0)", "a - (b - c)", "<x, f(x, y)>", "c()"] {
            let f = parse_formula(src).unwrap();
            assert_eq!(parse_formula(&formula(&f)).unwrap(), f, "{src}");
        }
    }

    #[test]
    fn document_round_trip() {
        let src = "spec A { sorts s; ops f : s -> s, c : -> s; vars x : s; axioms l: f(x) ~ x; cond f(x) ~ c => x ~ c; }\n\
                   structure M : A { carrier s = {a, b}; table f = [b, a]; table c = [a]; filter s = {<a, a>}; label \"demo\"; }\n\
                   check decide A goal f(c) ~ c with size.s = 2;";
        let d = parse(src).unwrap();
        assert_eq!(parse(&print_document(&d)).unwrap(), d);
    }
}
