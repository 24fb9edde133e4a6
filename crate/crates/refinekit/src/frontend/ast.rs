//! Surface syntax. Spans compare equal unconditionally, so structural
//! equality of two documents ignores layout.

use super::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum STerm {
    /// A variable or a constant, decided during resolution.
    Ident(String, Span),
    App(String, Vec<STerm>, Span),
}

impl STerm {
    pub fn span(&self) -> Span {
        match self {
            STerm::Ident(_, s) | STerm::App(_, _, s) => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SFormula {
    Tuple(Vec<STerm>, Span),
    /// `t ~ t'`
    Eq(STerm, STerm, Span),
    /// A bare term, for 1-dimensional systems.
    Bare(STerm),
}

impl SFormula {
    pub fn span(&self) -> Span {
        match self {
            SFormula::Tuple(_, s) | SFormula::Eq(_, _, s) => *s,
            SFormula::Bare(t) => t.span(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpDecl {
    pub name: String,
    pub args: Vec<String>,
    pub result: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleStyle {
    /// `P, Q |- C`
    Turnstile,
    /// `cond P, Q => C`
    Conditional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Dim(usize),
    Include(String, Span),
    Sorts(Vec<String>),
    Ops(Vec<OpDecl>, Span),
    Vars(Vec<String>, String, Span),
    /// Add the equality machinery for the final signature.
    Equality,
    Axioms(Vec<(Option<String>, SFormula)>),
    Rule { label: Option<String>, premises: Vec<SFormula>, conclusion: SFormula, style: RuleStyle },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// `dsystem`: an explicit Hilbert presentation.
    DSystem,
    /// `spec`: a flat specification read as a Horn presentation.
    Spec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransClause {
    Sort { sort: String, target_sort: Option<String>, placeholders: Vec<String>, images: Vec<SFormula>, span: Span },
    Op { op: String, placeholders: Vec<String>, images: Vec<STerm>, span: Span },
    Case { pattern: SFormula, images: Vec<SFormula>, span: Span },
    Embed(String, Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransBody {
    Morphism(String),
    Clauses(Vec<TransClause>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructItem {
    Dim(usize),
    /// Named elements, or a bare size.
    Carrier { sort: String, elements: Vec<String>, sized: bool, span: Span },
    Table { op: String, entries: Vec<String>, span: Span },
    Filter { sort: String, tuples: Option<Vec<Vec<String>>>, span: Span },
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckDecl {
    pub kind: String,
    pub operands: Vec<String>,
    pub via: Vec<String>,
    pub goal: Option<SFormula>,
    pub from: Vec<SFormula>,
    pub with: Vec<(String, String)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decl {
    Import(String, Span),
    Signature { name: String, items: Vec<Item>, span: Span },
    System { kind: SystemKind, name: String, items: Vec<Item>, span: Span },
    Morphism { name: String, source: String, target: String, sorts: Vec<(String, String)>, ops: Vec<(String, String)>, span: Span },
    Translation { name: String, source: String, source_dim: usize, target: String, target_dim: usize, body: TransBody, span: Span },
    Structure { name: String, over: String, items: Vec<StructItem>, span: Span },
    Check(CheckDecl),
}

impl Decl {
    pub fn span(&self) -> Span {
        match self {
            Decl::Import(_, s) => *s,
            Decl::Signature { span, .. }
            | Decl::System { span, .. }
            | Decl::Morphism { span, .. }
            | Decl::Translation { span, .. }
            | Decl::Structure { span, .. } => *span,
            Decl::Check(c) => c.span,
        }
    }
}
