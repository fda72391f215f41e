use std::fmt;

/// Source position (1-based). Positions never take part in structural
/// equality, so re-parsed pretty-printed programs compare equal.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub operations: Vec<OperationDef>,
}

impl Program {
    pub fn operation(&self, name: &str) -> Option<&OperationDef> {
        self.operations.iter().find(|o| o.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperationDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Type {
    Int,
    Double,
    Qubit,
    QubitArray,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Type::Int => "Int",
            Type::Double => "Double",
            Type::Qubit => "Qubit",
            Type::QubitArray => "Qubit[]",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureBasis {
    Z,
    X,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    /// `use name = Qubit();` (size `None`) or `use name = Qubit[size];`
    Use { name: String, size: Option<Expr> },
    Let { name: String, value: Expr },
    For { var: String, iter: Iterable, body: Block },
    ParallelFor { var: String, iter: Iterable, fanout: Option<FanoutClause>, body: Block },
    ParallelSections { sections: Vec<Block> },
    WithinApply { within: Block, apply: Block },
    IfResult { basis: MeasureBasis, qubit: Expr, body: Block },
    Call { adjoint: bool, callee: String, args: Vec<Expr> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FanoutClause {
    pub target: String,
    pub replicas: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Iterable {
    /// Inclusive range `lo..hi`.
    Range(Expr, Expr),
    Array(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Real(f64),
    Pi,
    Var(String),
    Index(String, Box<Expr>),
    Len(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

/// Gate names callable from source. `MResetZ`/`MResetX` are only valid as
/// the condition of an `if`.
pub const INTRINSICS: [&str; 16] = [
    "H", "X", "Y", "Z", "S", "Sdg", "T", "Tdg", "Rz", "CNOT", "CZ", "CCX", "SWAP", "CSWAP",
    "MResetZ", "MResetX",
];

pub fn is_intrinsic(name: &str) -> bool {
    INTRINSICS.contains(&name)
}
