//! Recursive-descent parser producing the surface AST.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{FrontendError, Span};

/// Symbols with a fixed role that never act as infix operators.
const RESERVED: &[&str] = &["~", "~>", "|-", "=>", "=", "!"];

/// Binding power and associativity of an infix operator.
pub fn precedence(op: &str) -> (u8, bool) {
    match op {
        "->" => (1, true),
        "\\/" => (2, false),
        "/\\" => (3, false),
        "*" | "/" => (5, false),
        _ => (4, false),
    }
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

pub fn parse(src: &str) -> Result<Vec<Decl>, FrontendError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0 };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(decls)
}

/// Parse a single formula, e.g. a goal given on the command line.
pub fn parse_formula(src: &str) -> Result<SFormula, FrontendError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0 };
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, what: &str) -> Result<T, FrontendError> {
        Err(FrontendError::Parse { msg: format!("expected {what}, found {}", self.peek().describe()), span: self.span() })
    }

    fn expect_eof(&self) -> Result<(), FrontendError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.err("end of input")
        }
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek() == &Tok::Punct(c)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn punct(&mut self, c: char) -> Result<(), FrontendError> {
        if self.is_punct(c) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{c}`"))
        }
    }

    fn sym(&mut self, s: &str) -> Result<(), FrontendError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }

    fn kw(&mut self, k: &str) -> Result<(), FrontendError> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.err(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("an identifier"),
        }
    }

    fn number(&mut self) -> Result<usize, FrontendError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let span = self.span();
                self.bump();
                s.parse().map_err(|_| FrontendError::Parse { msg: format!("number `{s}` out of range"), span })
            }
            _ => self.err("a number"),
        }
    }

    /// Operation names may be identifiers, numerals or symbols.
    fn op_name(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Number(s) => {
                self.bump();
                Ok(s)
            }
            Tok::Sym(s) if !RESERVED.contains(&s.as_str()) || s == "!" => {
                self.bump();
                Ok(s)
            }
            _ => self.err("an operation name"),
        }
    }

    fn comma_list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, FrontendError>) -> Result<Vec<T>, FrontendError> {
        let mut out = vec![item(self)?];
        while self.is_punct(',') {
            self.bump();
            out.push(item(self)?);
        }
        Ok(out)
    }

    fn decl(&mut self) -> Result<Decl, FrontendError> {
        let span = self.span();
        let Tok::Ident(k) = self.peek().clone() else {
            return self.err("a declaration");
        };
        match k.as_str() {
            "import" => {
                self.bump();
                let Tok::Str(path) = self.bump() else {
                    self.pos -= 1;
                    return self.err("a quoted file name");
                };
                self.punct(';')?;
                Ok(Decl::Import(path, span))
            }
            "signature" => {
                self.bump();
                let name = self.ident()?;
                let items = self.block_items()?;
                Ok(Decl::Signature { name, items, span })
            }
            "dsystem" | "spec" => {
                self.bump();
                let kind = if k == "spec" { SystemKind::Spec } else { SystemKind::DSystem };
                let name = self.ident()?;
                let items = self.block_items()?;
                Ok(Decl::System { kind, name, items, span })
            }
            "morphism" => self.morphism(span),
            "translation" => self.translation(span),
            "structure" => self.structure(span),
            "check" => self.check(span),
            _ => self.err("a declaration"),
        }
    }

    fn block_items(&mut self) -> Result<Vec<Item>, FrontendError> {
        self.punct('{')?;
        let mut items = Vec::new();
        while !self.is_punct('}') {
            items.push(self.item()?);
        }
        self.bump();
        Ok(items)
    }

    fn op_decl(&mut self) -> Result<OpDecl, FrontendError> {
        let name = self.op_name()?;
        self.punct(':')?;
        let mut args = Vec::new();
        if !self.is_sym("->") {
            args.push(self.ident()?);
            while self.is_sym("*") {
                self.bump();
                args.push(self.ident()?);
            }
        }
        self.sym("->")?;
        let result = self.ident()?;
        Ok(OpDecl { name, args, result })
    }

    /// An optional `name:` prefix; names may be hyphenated.
    fn label(&mut self) -> Option<String> {
        let Tok::Ident(first) = self.peek().clone() else { return None };
        let mut l = first;
        let mut n = 1;
        while matches!(self.peek_at(n), Tok::Sym(s) if s == "-") {
            match self.peek_at(n + 1) {
                Tok::Ident(s) | Tok::Number(s) => {
                    l.push('-');
                    l.push_str(s);
                    n += 2;
                }
                _ => return None,
            }
        }
        if self.peek_at(n) != &Tok::Punct(':') {
            return None;
        }
        for _ in 0..=n {
            self.bump();
        }
        Some(l)
    }

    fn item(&mut self) -> Result<Item, FrontendError> {
        let span = self.span();
        let k = self.ident()?;
        let item = match k.as_str() {
            "dim" => Item::Dim(self.number()?),
            "include" => Item::Include(self.ident()?, span),
            "sorts" | "sort" => Item::Sorts(self.comma_list(Self::ident)?),
            "ops" | "op" => Item::Ops(self.comma_list(Self::op_decl)?, span),
            "vars" | "var" => {
                let names = self.comma_list(Self::ident)?;
                self.punct(':')?;
                Item::Vars(names, self.ident()?, span)
            }
            "equality" => Item::Equality,
            "axioms" | "axiom" => Item::Axioms(self.comma_list(|p| {
                let l = p.label();
                Ok((l, p.formula()?))
            })?),
            "rule" | "rules" => {
                let label = self.label();
                let mut premises = Vec::new();
                if !self.is_sym("|-") {
                    premises = self.comma_list(Self::formula)?;
                }
                self.sym("|-")?;
                Item::Rule { label, premises, conclusion: self.formula()?, style: RuleStyle::Turnstile }
            }
            "cond" => {
                let label = self.label();
                let premises = self.comma_list(Self::formula)?;
                self.sym("=>")?;
                Item::Rule { label, premises, conclusion: self.formula()?, style: RuleStyle::Conditional }
            }
            _ => {
                self.pos -= 1;
                return self.err("a block item (dim, include, sorts, ops, vars, equality, axioms, rule, cond)");
            }
        };
        self.punct(';')?;
        Ok(item)
    }

    fn morphism(&mut self, span: Span) -> Result<Decl, FrontendError> {
        self.kw("morphism")?;
        let name = self.ident()?;
        self.punct(':')?;
        let source = self.ident()?;
        self.sym("->")?;
        let target = self.ident()?;
        self.punct('{')?;
        let (mut sorts, mut ops) = (Vec::new(), Vec::new());
        while !self.is_punct('}') {
            if self.is_kw("sort") {
                self.bump();
                let a = self.ident()?;
                self.sym("~>")?;
                sorts.push((a, self.ident()?));
            } else {
                self.kw("op")?;
                let a = self.op_name()?;
                self.sym("~>")?;
                ops.push((a, self.op_name()?));
            }
            self.punct(';')?;
        }
        self.bump();
        Ok(Decl::Morphism { name, source, target, sorts, ops, span })
    }

    fn translation(&mut self, span: Span) -> Result<Decl, FrontendError> {
        self.kw("translation")?;
        let name = self.ident()?;
        self.punct(':')?;
        let source = self.ident()?;
        self.punct('(')?;
        let source_dim = self.number()?;
        self.punct(')')?;
        self.sym("->")?;
        let target = self.ident()?;
        self.punct('(')?;
        let target_dim = self.number()?;
        self.punct(')')?;
        if self.is_kw("from") {
            self.bump();
            self.kw("morphism")?;
            let m = self.ident()?;
            self.punct(';')?;
            return Ok(Decl::Translation { name, source, source_dim, target, target_dim, body: TransBody::Morphism(m), span });
        }
        self.punct('{')?;
        let mut clauses = Vec::new();
        while !self.is_punct('}') {
            clauses.push(self.clause()?);
        }
        self.bump();
        Ok(Decl::Translation { name, source, source_dim, target, target_dim, body: TransBody::Clauses(clauses), span })
    }

    fn braced<T>(&mut self, item: impl FnMut(&mut Self) -> Result<T, FrontendError>) -> Result<Vec<T>, FrontendError> {
        self.punct('{')?;
        let out = self.comma_list(item)?;
        self.punct('}')?;
        Ok(out)
    }

    fn clause(&mut self) -> Result<TransClause, FrontendError> {
        let span = self.span();
        let k = self.ident()?;
        let c = match k.as_str() {
            "sort" => {
                let sort = self.ident()?;
                let target_sort = if self.is_kw("as") {
                    self.bump();
                    Some(self.ident()?)
                } else {
                    None
                };
                self.punct(':')?;
                self.punct('<')?;
                let placeholders = self.comma_list(Self::ident)?;
                self.punct('>')?;
                self.sym("~>")?;
                TransClause::Sort { sort, target_sort, placeholders, images: self.braced(Self::formula)?, span }
            }
            "op" => {
                let op = self.op_name()?;
                let mut placeholders = Vec::new();
                if self.is_punct('(') {
                    self.bump();
                    placeholders = self.comma_list(Self::ident)?;
                    self.punct(')')?;
                }
                self.sym("~>")?;
                TransClause::Op { op, placeholders, images: self.braced(|p| p.term())?, span }
            }
            "case" => {
                let pattern = self.formula()?;
                self.sym("~>")?;
                TransClause::Case { pattern, images: self.braced(Self::formula)?, span }
            }
            "embed" => TransClause::Embed(self.ident()?, span),
            _ => {
                self.pos -= 1;
                return self.err("a translation clause (sort, op, case, embed)");
            }
        };
        self.punct(';')?;
        Ok(c)
    }

    fn element(&mut self) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Number(s) => {
                self.bump();
                Ok(s)
            }
            Tok::Sym(s) if s == "-" => {
                self.bump();
                let Tok::Number(n) = self.peek().clone() else {
                    return self.err("a number after `-`");
                };
                self.bump();
                Ok(format!("-{n}"))
            }
            _ => self.err("an element name"),
        }
    }

    /// `chain-3`, `boolean-4`: identifiers joined by hyphens.
    fn hyphenated(&mut self) -> Result<String, FrontendError> {
        let mut out = self.ident()?;
        while self.is_sym("-") && matches!(self.peek_at(1), Tok::Ident(_) | Tok::Number(_)) {
            self.bump();
            match self.bump() {
                Tok::Ident(s) | Tok::Number(s) => {
                    out.push('-');
                    out.push_str(&s);
                }
                _ => unreachable!(),
            }
        }
        Ok(out)
    }

    fn structure(&mut self, span: Span) -> Result<Decl, FrontendError> {
        self.kw("structure")?;
        let name = self.hyphenated()?;
        self.punct(':')?;
        let over = self.ident()?;
        self.punct('{')?;
        let mut items = Vec::new();
        while !self.is_punct('}') {
            let ispan = self.span();
            let k = self.ident()?;
            let item = match k.as_str() {
                "dim" => StructItem::Dim(self.number()?),
                "carrier" => {
                    let sort = self.ident()?;
                    self.sym("=")?;
                    if let Tok::Number(_) = self.peek() {
                        let n = self.number()?;
                        StructItem::Carrier { sort, elements: (0..n).map(|i| i.to_string()).collect(), sized: true, span: ispan }
                    } else {
                        StructItem::Carrier { sort, elements: self.braced(Self::element)?, sized: false, span: ispan }
                    }
                }
                "table" => {
                    let op = self.op_name()?;
                    self.sym("=")?;
                    self.punct('[')?;
                    let entries = self.comma_list(Self::element)?;
                    self.punct(']')?;
                    StructItem::Table { op, entries, span: ispan }
                }
                "filter" => {
                    let sort = self.ident()?;
                    self.sym("=")?;
                    if self.is_kw("identity") {
                        self.bump();
                        StructItem::Filter { sort, tuples: None, span: ispan }
                    } else {
                        self.punct('{')?;
                        let mut tuples = Vec::new();
                        if !self.is_punct('}') {
                            tuples = self.comma_list(|p| {
                                p.punct('<')?;
                                let t = p.comma_list(Self::element)?;
                                p.punct('>')?;
                                Ok(t)
                            })?;
                        }
                        self.punct('}')?;
                        StructItem::Filter { sort, tuples: Some(tuples), span: ispan }
                    }
                }
                "label" => match self.bump() {
                    Tok::Str(s) => StructItem::Label(s),
                    _ => {
                        self.pos -= 1;
                        return self.err("a quoted label");
                    }
                },
                _ => {
                    self.pos -= 1;
                    return self.err("a structure item (dim, carrier, table, filter, label)");
                }
            };
            self.punct(';')?;
            items.push(item);
        }
        self.bump();
        Ok(Decl::Structure { name, over, items, span })
    }

    fn check(&mut self, span: Span) -> Result<Decl, FrontendError> {
        self.kw("check")?;
        let mut kind = self.ident()?;
        while self.is_sym("-") {
            self.bump();
            kind.push('-');
            kind.push_str(&self.ident()?);
        }
        let keywords = ["via", "goal", "from", "with"];
        let mut operands = Vec::new();
        while let Tok::Ident(s) = self.peek().clone() {
            if keywords.contains(&s.as_str()) {
                break;
            }
            self.bump();
            operands.push(s);
        }
        let mut c = CheckDecl { kind, operands, via: Vec::new(), goal: None, from: Vec::new(), with: Vec::new(), span };
        if self.is_kw("via") {
            self.bump();
            c.via = self.comma_list(Self::ident)?;
        }
        if self.is_kw("goal") {
            self.bump();
            c.goal = Some(self.formula()?);
        }
        if self.is_kw("from") {
            self.bump();
            c.from = self.comma_list(Self::formula)?;
        }
        if self.is_kw("with") {
            self.bump();
            c.with = self.comma_list(|p| {
                let mut key = p.ident()?;
                if p.is_sym(".") {
                    p.bump();
                    key.push('.');
                    key.push_str(&p.ident()?);
                }
                p.sym("=")?;
                let v = match p.bump() {
                    Tok::Ident(v) | Tok::Number(v) => v,
                    _ => {
                        p.pos -= 1;
                        return p.err("a value");
                    }
                };
                Ok((key, v))
            })?;
        }
        self.punct(';')?;
        Ok(Decl::Check(c))
    }

    pub fn formula(&mut self) -> Result<SFormula, FrontendError> {
        let span = self.span();
        if self.is_punct('<') {
            self.bump();
            let comps = self.comma_list(|p| p.term())?;
            self.punct('>')?;
            return Ok(SFormula::Tuple(comps, span));
        }
        let l = self.term()?;
        if self.is_sym("~") {
            self.bump();
            let r = self.term()?;
            return Ok(SFormula::Eq(l, r, span));
        }
        Ok(SFormula::Bare(l))
    }

    pub fn term(&mut self) -> Result<STerm, FrontendError> {
        self.binary(0)
    }

    fn infix_op(&self) -> Option<String> {
        match self.peek() {
            Tok::Sym(s) if !RESERVED.contains(&s.as_str()) => Some(s.clone()),
            _ => None,
        }
    }

    fn binary(&mut self, min: u8) -> Result<STerm, FrontendError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.infix_op() {
            let (prec, right) = precedence(&op);
            if prec < min {
                break;
            }
            let span = self.span();
            self.bump();
            let rhs = self.binary(if right { prec } else { prec + 1 })?;
            lhs = STerm::App(op, vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn args(&mut self) -> Result<Vec<STerm>, FrontendError> {
        self.punct('(')?;
        if self.is_punct(')') {
            self.bump();
            return Ok(Vec::new());
        }
        let a = self.comma_list(|p| p.term())?;
        self.punct(')')?;
        Ok(a)
    }

    fn unary(&mut self) -> Result<STerm, FrontendError> {
        let span = self.span();
        if let Tok::Sym(op) = self.peek().clone() {
            if op == "!" || !RESERVED.contains(&op.as_str()) {
                self.bump();
                if self.is_punct('(') {
                    let a = self.args()?;
                    return Ok(STerm::App(op, a, span));
                }
                let a = self.unary()?;
                return Ok(STerm::App(op, vec![a], span));
            }
        }
        match self.peek().clone() {
            Tok::Punct('(') => {
                self.bump();
                let t = self.term()?;
                self.punct(')')?;
                Ok(t)
            }
            Tok::Ident(s) | Tok::Number(s) => {
                self.bump();
                if self.is_punct('(') {
                    Ok(STerm::App(s, self.args()?, span))
                } else {
                    Ok(STerm::Ident(s, span))
                }
            }
            _ => self.err("a term"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> STerm {
        match parse_formula(s).unwrap() {
            SFormula::Bare(t) => t,
            f => panic!("not a bare term: {f:?}"),
        }
    }

    fn app(op: &str, args: Vec<STerm>) -> STerm {
        STerm::App(op.into(), args, Span::default())
    }

    fn id(s: &str) -> STerm {
        STerm::Ident(s.into(), Span::default())
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(t("p \\/ q /\\ r"), app("\\/", vec![id("p"), app("/\\", vec![id("q"), id("r")])]));
        assert_eq!(t("p -> q -> r"), app("->", vec![id("p"), app("->", vec![id("q"), id("r")])]));
        assert_eq!(t("a + b + c"), app("+", vec![app("+", vec![id("a"), id("b")]), id("c")]));
        assert_eq!(t("!!p"), app("!", vec![app("!", vec![id("p")])]));
        assert_eq!(t("!(p \\/ q)"), app("!", vec![app("\\/", vec![id("p"), id("q")])]));
    }

    #[test]
    fn equation_sugar_and_tuples() {
        assert!(matches!(parse_formula("x + z ~ x").unwrap(), SFormula::Eq(..)));
        assert!(matches!(parse_formula("<p /\\ p, p>").unwrap(), SFormula::Tuple(ref v, _) if v.len() == 2));
    }

    #[test]
    fn empty_document() {
        assert!(parse("  -- nothing here\n").unwrap().is_empty());
    }

    #[test]
    fn errors_carry_positions() {
        match parse("spec A {\n  sorts s\n}") {
            Err(FrontendError::Parse { span, .. }) => assert_eq!(span.line, 3),
            other => panic!("{other:?}"),
        }
    }
}
