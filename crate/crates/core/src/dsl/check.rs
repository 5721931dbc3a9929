//! Name resolution and typing. Produces a slot-addressed program the
//! interpreter can run without any lookups.

use std::collections::HashMap;

use super::ast::*;
use super::Pos;
use crate::backend::Relation;
use crate::carrier::{Carrier, CarrierFormat};
use crate::double_word::BinaryOp;
use crate::error::CheckError;

/// A float literal rounded once to each carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatLit {
    pub text: String,
    pub binary32: f32,
    pub binary64: f64,
}

impl FloatLit {
    fn parse(text: &str, pos: Pos) -> Result<Self, CheckError> {
        let bad = || CheckError::Invalid { detail: format!("malformed float literal `{text}`"), pos };
        Ok(Self {
            text: text.to_string(),
            binary32: f32::parse_decimal(text).ok_or_else(bad)?,
            binary64: f64::parse_decimal(text).ok_or_else(bad)?,
        })
    }

    pub fn value<C: Carrier>(&self) -> C {
        match C::FORMAT {
            CarrierFormat::Binary32 => C::from_f64(self.binary32 as f64),
            CarrierFormat::Binary64 => C::from_f64(self.binary64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FExpr {
    /// Index into the literal table.
    Lit(usize),
    Var(usize),
    Index { array: usize, index: Box<IExpr>, pos: Pos },
    Bin(BinaryOp, Box<FExpr>, Box<FExpr>),
    Neg(Box<FExpr>),
    Sqrt(Box<FExpr>),
    Fabs(Box<FExpr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IExpr {
    Lit(i64),
    Var(usize),
    Bin(ArithOp, Box<IExpr>, Box<IExpr>, Pos),
    Neg(Box<IExpr>, Pos),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CCond {
    Float(Relation, FExpr, FExpr),
    Int(Relation, IExpr, IExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceExpr {
    Float(FExpr),
    Int(IExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CStmt {
    SetF(usize, FExpr),
    SetI(usize, IExpr),
    Store { array: usize, index: IExpr, value: FExpr, pos: Pos },
    For { counter: usize, from: IExpr, to: IExpr, body: Vec<CStmt> },
    If { cond: CCond, then: Vec<CStmt>, otherwise: Vec<CStmt> },
    Trace { label: usize, value: TraceExpr },
    Return,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayInfo {
    pub name: String,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputKind {
    Float(usize),
    Int(usize),
    Array(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputBinding {
    pub name: String,
    pub kind: InputKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputKind {
    Scalar(usize),
    Array(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputBinding {
    pub name: String,
    pub kind: OutputKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckedProgram {
    pub name: String,
    pub float_slots: usize,
    pub int_slots: usize,
    pub arrays: Vec<ArrayInfo>,
    pub literals: Vec<FloatLit>,
    pub inputs: Vec<InputBinding>,
    pub outputs: Vec<OutputBinding>,
    pub labels: Vec<String>,
    pub body: Vec<CStmt>,
}

impl CheckedProgram {
    /// Output names with arrays flattened to `name[i]`.
    pub fn output_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for o in &self.outputs {
            match o.kind {
                OutputKind::Scalar(_) => names.push(o.name.clone()),
                OutputKind::Array(a) => {
                    names.extend((0..self.arrays[a].len).map(|i| format!("{}[{i}]", o.name)))
                }
            }
        }
        names
    }
}

/// Name used for the value of `return e;` when the program declares no outputs.
pub const IMPLICIT_OUTPUT: &str = "result";

#[derive(Debug, Clone, Copy)]
enum Sym {
    Float(usize),
    Int(usize),
    Array(usize),
}

enum Typed {
    F(FExpr),
    /// `literal` is set for a (possibly negated) integer literal, the only
    /// integer form allowed to stand in for a float.
    I { expr: IExpr, konst: Option<i64>, literal: bool },
}

struct Checker {
    scopes: Vec<HashMap<String, Sym>>,
    float_slots: usize,
    int_slots: usize,
    arrays: Vec<ArrayInfo>,
    literals: Vec<FloatLit>,
    labels: Vec<String>,
    /// Int slots that may not be assigned: loop counters and bound variables.
    protected: Vec<(usize, String)>,
    return_slot: Option<usize>,
}

pub fn check(p: &Program) -> Result<CheckedProgram, CheckError> {
    let mut c = Checker {
        scopes: vec![HashMap::new()],
        float_slots: 0,
        int_slots: 0,
        arrays: Vec::new(),
        literals: Vec::new(),
        labels: Vec::new(),
        protected: Vec::new(),
        return_slot: None,
    };
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for d in &p.decls {
        let sym = match (d.ty, d.len) {
            (TypeName::Int, Some(_)) => {
                return Err(CheckError::Invalid {
                    detail: format!("integer array `{}` is not supported", d.name),
                    pos: d.pos,
                })
            }
            (TypeName::Int, None) => {
                if d.kind == DeclKind::Out {
                    return Err(CheckError::Invalid {
                        detail: format!("output `{}` must be float", d.name),
                        pos: d.pos,
                    });
                }
                Sym::Int(c.new_int())
            }
            (TypeName::Float, None) => Sym::Float(c.new_float()),
            (TypeName::Float, Some(len)) => {
                c.arrays.push(ArrayInfo { name: d.name.clone(), len });
                Sym::Array(c.arrays.len() - 1)
            }
        };
        c.declare(&d.name, sym, d.pos)?;
        match d.kind {
            DeclKind::In => inputs.push(InputBinding {
                name: d.name.clone(),
                kind: match sym {
                    Sym::Float(s) => InputKind::Float(s),
                    Sym::Int(s) => InputKind::Int(s),
                    Sym::Array(a) => InputKind::Array(a),
                },
            }),
            DeclKind::Out => outputs.push(OutputBinding {
                name: d.name.clone(),
                kind: match sym {
                    Sym::Float(s) => OutputKind::Scalar(s),
                    Sym::Array(a) => OutputKind::Array(a),
                    Sym::Int(_) => unreachable!(),
                },
            }),
            DeclKind::Var => {}
        }
    }

    if outputs.is_empty() && p.body.iter().any(returns_value) {
        let slot = c.new_float();
        outputs.push(OutputBinding { name: IMPLICIT_OUTPUT.into(), kind: OutputKind::Scalar(slot) });
        c.return_slot = Some(slot);
    } else if let [OutputBinding { kind: OutputKind::Scalar(slot), .. }] = outputs.as_slice() {
        c.return_slot = Some(*slot);
    }

    let body = c.block(&p.body)?;
    Ok(CheckedProgram {
        name: p.name.clone(),
        float_slots: c.float_slots,
        int_slots: c.int_slots,
        arrays: c.arrays,
        literals: c.literals,
        inputs,
        outputs,
        labels: c.labels,
        body,
    })
}

fn returns_value(s: &Stmt) -> bool {
    match s {
        Stmt::Return { value, .. } => value.is_some(),
        Stmt::For { body, .. } => body.iter().any(returns_value),
        Stmt::If { then, otherwise, .. } => {
            then.iter().chain(otherwise.iter().flatten()).any(returns_value)
        }
        _ => false,
    }
}

fn mismatch(detail: impl Into<String>, pos: Pos) -> CheckError {
    CheckError::TypeMismatch { detail: detail.into(), pos }
}

impl Checker {
    fn new_float(&mut self) -> usize {
        self.float_slots += 1;
        self.float_slots - 1
    }

    fn new_int(&mut self) -> usize {
        self.int_slots += 1;
        self.int_slots - 1
    }

    fn lookup(&self, name: &str) -> Option<Sym> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn declare(&mut self, name: &str, sym: Sym, pos: Pos) -> Result<(), CheckError> {
        if self.lookup(name).is_some() {
            return Err(CheckError::Redeclared { name: name.to_string(), pos });
        }
        self.scopes.last_mut().unwrap().insert(name.to_string(), sym);
        Ok(())
    }

    fn resolve(&self, name: &str, pos: Pos) -> Result<Sym, CheckError> {
        self.lookup(name).ok_or_else(|| CheckError::Undeclared { name: name.to_string(), pos })
    }

    fn literal(&mut self, lit: FloatLit) -> FExpr {
        let idx = match self.literals.iter().position(|l| l.text == lit.text) {
            Some(i) => i,
            None => {
                self.literals.push(lit);
                self.literals.len() - 1
            }
        };
        FExpr::Lit(idx)
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<Vec<CStmt>, CheckError> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            self.stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Vec<CStmt>) -> Result<(), CheckError> {
        match s {
            Stmt::Assign { target, value, pos } => {
                let sym = self.resolve(&target.name, target.pos)?;
                match (sym, &target.index) {
                    (Sym::Float(slot), None) => {
                        let v = self.float(value)?;
                        out.push(CStmt::SetF(slot, v));
                    }
                    (Sym::Int(slot), None) => {
                        if let Some((_, name)) = self.protected.iter().find(|(s, _)| *s == slot) {
                            return Err(CheckError::LoopVariableModified { name: name.clone(), pos: *pos });
                        }
                        let v = self.int(value, "assignment to an int variable")?;
                        out.push(CStmt::SetI(slot, v));
                    }
                    (Sym::Array(array), Some(idx)) => {
                        let index = self.index(array, idx)?;
                        let v = self.float(value)?;
                        out.push(CStmt::Store { array, index, value: v, pos: *pos });
                    }
                    (Sym::Array(_), None) => {
                        return Err(mismatch(format!("array `{}` assigned without an index", target.name), *pos))
                    }
                    (_, Some(_)) => {
                        return Err(mismatch(format!("`{}` is not an array", target.name), *pos))
                    }
                }
            }
            Stmt::For { var, from, to, body, pos } => {
                let lo = self.int(from, "").map_err(|_| CheckError::NonIntegerLoopBound { pos: from.pos })?;
                let hi = self.int(to, "").map_err(|_| CheckError::NonIntegerLoopBound { pos: to.pos })?;
                let counter = self.new_int();
                self.scopes.push(HashMap::new());
                self.declare(var, Sym::Int(counter), *pos)?;
                let mark = self.protected.len();
                self.protected.push((counter, var.clone()));
                for (slot, name) in int_vars(&lo).into_iter().chain(int_vars(&hi)) {
                    self.protected.push((slot, self.int_name(slot).unwrap_or(name)));
                }
                let body = self.block(body);
                self.protected.truncate(mark);
                self.scopes.pop();
                out.push(CStmt::For { counter, from: lo, to: hi, body: body? });
            }
            Stmt::If { cond, then, otherwise, .. } => {
                let cond = self.cond(cond)?;
                self.scopes.push(HashMap::new());
                let then = self.block(then);
                self.scopes.pop();
                self.scopes.push(HashMap::new());
                let otherwise = match otherwise {
                    Some(b) => self.block(b),
                    None => Ok(Vec::new()),
                };
                self.scopes.pop();
                out.push(CStmt::If { cond, then: then?, otherwise: otherwise? });
            }
            Stmt::Trace { label, value, .. } => {
                let label = match self.labels.iter().position(|l| l == label) {
                    Some(i) => i,
                    None => {
                        self.labels.push(label.clone());
                        self.labels.len() - 1
                    }
                };
                let value = match self.expr(value)? {
                    Typed::F(e) => TraceExpr::Float(e),
                    Typed::I { expr, .. } => TraceExpr::Int(expr),
                };
                out.push(CStmt::Trace { label, value });
            }
            Stmt::Return { value, pos } => {
                if let Some(v) = value {
                    let slot = self.return_slot.ok_or_else(|| CheckError::Invalid {
                        detail: "`return` with a value needs exactly one scalar float output".into(),
                        pos: *pos,
                    })?;
                    let v = self.float(v)?;
                    out.push(CStmt::SetF(slot, v));
                }
                out.push(CStmt::Return);
            }
        }
        Ok(())
    }

    fn int_name(&self, slot: usize) -> Option<String> {
        self.scopes.iter().rev().flat_map(|s| s.iter()).find_map(|(n, sym)| match sym {
            Sym::Int(s) if *s == slot => Some(n.clone()),
            _ => None,
        })
    }

    fn cond(&mut self, c: &Cond) -> Result<CCond, CheckError> {
        let l = self.expr(&c.lhs)?;
        let r = self.expr(&c.rhs)?;
        Ok(match (l, r) {
            (Typed::I { expr: a, .. }, Typed::I { expr: b, .. }) => CCond::Int(c.rel, a, b),
            (l, r) => {
                let a = self.coerce(l, c.lhs.pos)?;
                let b = self.coerce(r, c.rhs.pos)?;
                CCond::Float(c.rel, a, b)
            }
        })
    }

    fn index(&mut self, array: usize, idx: &Expr) -> Result<IExpr, CheckError> {
        let (expr, konst) = match self.expr(idx)? {
            Typed::I { expr, konst, .. } => (expr, konst),
            Typed::F(_) => return Err(mismatch("array index must be an integer", idx.pos)),
        };
        if let Some(k) = konst {
            let info = &self.arrays[array];
            if k < 0 || k as usize >= info.len {
                return Err(CheckError::IndexOutOfBounds {
                    name: info.name.clone(),
                    index: k,
                    len: info.len,
                    pos: idx.pos,
                });
            }
        }
        Ok(expr)
    }

    fn float(&mut self, e: &Expr) -> Result<FExpr, CheckError> {
        let t = self.expr(e)?;
        self.coerce(t, e.pos)
    }

    fn int(&mut self, e: &Expr, what: &str) -> Result<IExpr, CheckError> {
        match self.expr(e)? {
            Typed::I { expr, .. } => Ok(expr),
            Typed::F(_) => Err(mismatch(format!("float value in {what}"), e.pos)),
        }
    }

    fn coerce(&mut self, t: Typed, pos: Pos) -> Result<FExpr, CheckError> {
        match t {
            Typed::F(e) => Ok(e),
            Typed::I { konst: Some(k), literal: true, .. } => {
                let lit = FloatLit::parse(&k.to_string(), pos)?;
                Ok(self.literal(lit))
            }
            Typed::I { .. } => Err(mismatch("int expression used where a float is required", pos)),
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<Typed, CheckError> {
        Ok(match &e.kind {
            ExprKind::Int(v) => Typed::I { expr: IExpr::Lit(*v), konst: Some(*v), literal: true },
            ExprKind::Float(text) => {
                let lit = FloatLit::parse(text, e.pos)?;
                Typed::F(self.literal(lit))
            }
            ExprKind::Var(name) => match self.resolve(name, e.pos)? {
                Sym::Float(s) => Typed::F(FExpr::Var(s)),
                Sym::Int(s) => Typed::I { expr: IExpr::Var(s), konst: None, literal: false },
                Sym::Array(_) => return Err(mismatch(format!("array `{name}` used without an index"), e.pos)),
            },
            ExprKind::Index(name, idx) => match self.resolve(name, e.pos)? {
                Sym::Array(array) => {
                    let index = self.index(array, idx)?;
                    Typed::F(FExpr::Index { array, index: Box::new(index), pos: e.pos })
                }
                _ => return Err(mismatch(format!("`{name}` is not an array"), e.pos)),
            },
            ExprKind::Neg(inner) => match self.expr(inner)? {
                Typed::F(f) => Typed::F(FExpr::Neg(Box::new(f))),
                Typed::I { expr, konst, literal } => {
                    let konst = konst.and_then(i64::checked_neg);
                    Typed::I { expr: IExpr::Neg(Box::new(expr), e.pos), konst, literal: literal && konst.is_some() }
                }
            },
            ExprKind::Call(f, arg) => {
                let a = Box::new(self.float(arg)?);
                Typed::F(match f {
                    Builtin::Sqrt => FExpr::Sqrt(a),
                    Builtin::Fabs => FExpr::Fabs(a),
                })
            }
            ExprKind::Binary(op, l, r) => {
                let lt = self.expr(l)?;
                let rt = self.expr(r)?;
                match (lt, rt) {
                    (Typed::I { expr: a, konst: ka, .. }, Typed::I { expr: b, konst: kb, .. }) => {
                        let konst = match (ka, kb) {
                            (Some(x), Some(y)) => fold(*op, x, y),
                            _ => None,
                        };
                        Typed::I { expr: IExpr::Bin(*op, Box::new(a), Box::new(b), e.pos), konst, literal: false }
                    }
                    (lt, rt) => {
                        let fop = match op {
                            ArithOp::Add => BinaryOp::Add,
                            ArithOp::Sub => BinaryOp::Sub,
                            ArithOp::Mul => BinaryOp::Mul,
                            ArithOp::Div => BinaryOp::Div,
                            ArithOp::Rem => return Err(mismatch("`%` needs integer operands", e.pos)),
                        };
                        let a = self.coerce(lt, l.pos)?;
                        let b = self.coerce(rt, r.pos)?;
                        Typed::F(FExpr::Bin(fop, Box::new(a), Box::new(b)))
                    }
                }
            }
        })
    }
}

fn fold(op: ArithOp, x: i64, y: i64) -> Option<i64> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
        ArithOp::Div => x.checked_div(y),
        ArithOp::Rem => x.checked_rem(y),
    }
}

fn int_vars(e: &IExpr) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    fn walk(e: &IExpr, out: &mut Vec<(usize, String)>) {
        match e {
            IExpr::Lit(_) => {}
            IExpr::Var(s) => out.push((*s, String::new())),
            IExpr::Bin(_, a, b, _) => {
                walk(a, out);
                walk(b, out);
            }
            IExpr::Neg(a, _) => walk(a, out),
        }
    }
    walk(e, &mut out);
    out
}
