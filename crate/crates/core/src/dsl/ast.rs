use super::Pos;
use crate::backend::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    In,
    Out,
    Var,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeName {
    Float,
    Int,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub ty: TypeName,
    pub name: String,
    pub len: Option<usize>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub name: String,
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    pub name: String,
    pub index: Option<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cond {
    pub lhs: Expr,
    pub rel: Relation,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign { target: LValue, value: Expr, pos: Pos },
    For { var: String, from: Expr, to: Expr, body: Vec<Stmt>, pos: Pos },
    If { cond: Cond, then: Vec<Stmt>, otherwise: Option<Vec<Stmt>>, pos: Pos },
    Trace { label: String, value: Expr, pos: Pos },
    Return { value: Option<Expr>, pos: Pos },
}

impl Stmt {
    pub fn pos(&self) -> Pos {
        match self {
            Stmt::Assign { pos, .. }
            | Stmt::For { pos, .. }
            | Stmt::If { pos, .. }
            | Stmt::Trace { pos, .. }
            | Stmt::Return { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Rem => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Sqrt,
    Fabs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    /// Float literal as written.
    Float(String),
    Var(String),
    Index(String, Box<Expr>),
    Binary(ArithOp, Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Call(Builtin, Box<Expr>),
}
