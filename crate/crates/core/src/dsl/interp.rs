//! Tree-walking evaluator. Every float operation and comparison goes through
//! the configured [`Arithmetic`].

use std::collections::BTreeMap;
use std::sync::Arc;

use super::check::*;
use super::ast::ArithOp;
use super::Pos;
use crate::backend::{Arithmetic, Exceptions, OutputValue};
use crate::carrier::Carrier;
use crate::error::RuntimeError;

#[derive(Debug, Clone, PartialEq)]
pub enum InputValue {
    Scalar(f64),
    Int(i64),
    Array(Vec<f64>),
}

pub type Inputs = BTreeMap<String, InputValue>;

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub label: Arc<str>,
    /// Innermost loop counter, or the label's occurrence count outside loops.
    pub iteration: i64,
    pub value: OutputValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Flattened outputs in declaration order.
    pub outputs: Vec<(String, OutputValue)>,
    pub trace: Vec<TracePoint>,
    pub exceptions: Exceptions,
}

enum Flow {
    Next,
    Return,
}

/// Zero-sized marker for a failed run; the diagnostic waits in `Machine::fault`
/// so the hot paths only move small values.
struct Trap;

struct Machine<'a, A: Arithmetic> {
    prog: &'a CheckedProgram,
    arith: &'a mut A,
    lits: Vec<A::Value>,
    floats: Vec<A::Value>,
    ints: Vec<i64>,
    arrays: Vec<Vec<A::Value>>,
    tracing: bool,
    labels: Vec<Arc<str>>,
    occurrences: Vec<i64>,
    trace: Vec<TracePoint>,
    fault: Option<RuntimeError>,
}

pub fn evaluate<A: Arithmetic>(
    prog: &CheckedProgram,
    arith: &mut A,
    inputs: &Inputs,
    trace: bool,
) -> Result<Evaluation, RuntimeError> {
    let zero = arith.lift(A::Carrier::ZERO);
    let lits = prog.literals.iter().map(|l| arith.lift(l.value::<A::Carrier>())).collect();
    let mut m = Machine {
        prog,
        lits,
        floats: vec![zero; prog.float_slots],
        ints: vec![0; prog.int_slots],
        arrays: prog.arrays.iter().map(|a| vec![zero; a.len]).collect(),
        tracing: trace,
        labels: prog.labels.iter().map(|l| Arc::from(l.as_str())).collect(),
        occurrences: vec![0; prog.labels.len()],
        trace: Vec::new(),
        fault: None,
        arith,
    };
    m.bind_inputs(inputs)?;
    if m.exec(&prog.body, None).is_err() {
        return Err(m.fault.take().expect("trap without a diagnostic"));
    }

    let mut outputs = Vec::new();
    for o in &prog.outputs {
        match o.kind {
            OutputKind::Scalar(s) => outputs.push((o.name.clone(), m.arith.output(m.floats[s]))),
            OutputKind::Array(a) => {
                for (i, v) in m.arrays[a].iter().enumerate() {
                    outputs.push((format!("{}[{i}]", o.name), m.arith.output(*v)));
                }
            }
        }
    }
    Ok(Evaluation { outputs, trace: m.trace, exceptions: m.arith.exceptions() })
}

impl<A: Arithmetic> Machine<'_, A> {
    fn bind_inputs(&mut self, inputs: &Inputs) -> Result<(), RuntimeError> {
        for name in inputs.keys() {
            if !self.prog.inputs.iter().any(|b| &b.name == name) {
                return Err(RuntimeError::UnknownInput(name.clone()));
            }
        }
        for b in &self.prog.inputs {
            let v = inputs.get(&b.name).ok_or_else(|| RuntimeError::MissingInput(b.name.clone()))?;
            let bad = |detail: String| RuntimeError::BadInput { name: b.name.clone(), detail };
            match (&b.kind, v) {
                (InputKind::Float(s), InputValue::Scalar(x)) => {
                    self.floats[*s] = self.arith.lift(A::Carrier::from_f64(*x))
                }
                (InputKind::Float(s), InputValue::Int(k)) => {
                    self.floats[*s] = self.arith.lift(A::Carrier::from_f64(*k as f64))
                }
                (InputKind::Int(s), InputValue::Int(k)) => self.ints[*s] = *k,
                (InputKind::Array(a), InputValue::Array(xs)) => {
                    let len = self.prog.arrays[*a].len;
                    if xs.len() != len {
                        return Err(bad(format!("expected {len} values, got {}", xs.len())));
                    }
                    for (slot, x) in self.arrays[*a].iter_mut().zip(xs) {
                        *slot = self.arith.lift(A::Carrier::from_f64(*x));
                    }
                }
                (kind, _) => {
                    let want = match kind {
                        InputKind::Float(_) => "a float scalar",
                        InputKind::Int(_) => "an integer",
                        InputKind::Array(_) => "a float array",
                    };
                    return Err(bad(format!("expected {want}")));
                }
            }
        }
        Ok(())
    }

    fn exec(&mut self, stmts: &[CStmt], innermost: Option<usize>) -> Result<Flow, Trap> {
        for s in stmts {
            match s {
                CStmt::SetF(slot, e) => {
                    let v = self.float_operand(e)?;
                    self.floats[*slot] = v;
                }
                CStmt::SetI(slot, e) => {
                    let v = self.int(e)?;
                    self.ints[*slot] = v;
                }
                CStmt::Store { array, index, value, pos } => {
                    let i = self.int(index)?;
                    let i = self.check_index(*array, i, *pos)?;
                    let v = self.float(value)?;
                    self.arrays[*array][i] = v;
                }
                CStmt::For { counter, from, to, body } => {
                    let lo = self.int(from)?;
                    let hi = self.int(to)?;
                    let mut i = lo;
                    while i <= hi {
                        self.ints[*counter] = i;
                        if let Flow::Return = self.exec(body, Some(*counter))? {
                            return Ok(Flow::Return);
                        }
                        i += 1;
                    }
                }
                CStmt::If { cond, then, otherwise } => {
                    let taken = match cond {
                        CCond::Float(rel, a, b) => {
                            let a = self.float_operand(a)?;
                            let b = self.float_operand(b)?;
                            self.arith.compare(*rel, a, b)
                        }
                        CCond::Int(rel, a, b) => {
                            let a = self.int_operand(a)?;
                            let b = self.int_operand(b)?;
                            rel.holds(a, b)
                        }
                    };
                    let branch = if taken { then } else { otherwise };
                    if let Flow::Return = self.exec(branch, innermost)? {
                        return Ok(Flow::Return);
                    }
                }
                CStmt::Trace { label, value } => {
                    let value = match value {
                        TraceExpr::Float(e) => {
                            let v = self.float(e)?;
                            self.arith.output(v)
                        }
                        TraceExpr::Int(e) => OutputValue::Scalar(self.int(e)? as f64),
                    };
                    let occurrence = self.occurrences[*label];
                    self.occurrences[*label] += 1;
                    if self.tracing {
                        let iteration = match innermost {
                            Some(c) => self.ints[c],
                            None => occurrence,
                        };
                        self.trace.push(TracePoint { label: self.labels[*label].clone(), iteration, value });
                    }
                }
                CStmt::Return => return Ok(Flow::Return),
            }
        }
        Ok(Flow::Next)
    }

    fn trap(&mut self, e: RuntimeError) -> Trap {
        self.fault = Some(e);
        Trap
    }

    #[inline]
    fn check_index(&mut self, array: usize, i: i64, pos: Pos) -> Result<usize, Trap> {
        let len = self.arrays[array].len();
        if i < 0 || i as usize >= len {
            let name = self.prog.arrays[array].name.clone();
            return Err(self.trap(RuntimeError::IndexOutOfBounds { name, index: i, len, pos }));
        }
        Ok(i as usize)
    }

    /// Leaves are resolved in place; only compound operands recurse.
    #[inline(always)]
    fn float_operand(&mut self, e: &FExpr) -> Result<A::Value, Trap> {
        match e {
            FExpr::Lit(i) => Ok(self.lits[*i]),
            FExpr::Var(s) => Ok(self.floats[*s]),
            _ => self.float(e),
        }
    }

    #[inline(always)]
    fn int_operand(&mut self, e: &IExpr) -> Result<i64, Trap> {
        match e {
            IExpr::Lit(v) => Ok(*v),
            IExpr::Var(s) => Ok(self.ints[*s]),
            _ => self.int(e),
        }
    }

    fn float(&mut self, e: &FExpr) -> Result<A::Value, Trap> {
        Ok(match e {
            FExpr::Lit(i) => self.lits[*i],
            FExpr::Var(s) => self.floats[*s],
            FExpr::Index { array, index, pos } => {
                let i = self.int(index)?;
                let i = self.check_index(*array, i, *pos)?;
                self.arrays[*array][i]
            }
            FExpr::Bin(op, a, b) => {
                let a = self.float_operand(a)?;
                let b = self.float_operand(b)?;
                self.arith.binary(*op, a, b)
            }
            FExpr::Neg(a) => {
                let a = self.float(a)?;
                self.arith.neg(a)
            }
            FExpr::Sqrt(a) => {
                let a = self.float(a)?;
                self.arith.sqrt(a)
            }
            FExpr::Fabs(a) => {
                let a = self.float(a)?;
                self.arith.fabs(a)
            }
        })
    }

    fn int(&mut self, e: &IExpr) -> Result<i64, Trap> {
        match e {
            IExpr::Lit(v) => Ok(*v),
            IExpr::Var(s) => Ok(self.ints[*s]),
            IExpr::Neg(a, pos) => {
                let x = self.int(a)?;
                x.checked_neg().ok_or_else(|| self.trap(RuntimeError::Integer { detail: "overflow", pos: *pos }))
            }
            IExpr::Bin(op, a, b, pos) => {
                let x = self.int_operand(a)?;
                let y = self.int_operand(b)?;
                let r = match op {
                    ArithOp::Add => x.checked_add(y),
                    ArithOp::Sub => x.checked_sub(y),
                    ArithOp::Mul => x.checked_mul(y),
                    ArithOp::Div | ArithOp::Rem if y == 0 => {
                        return Err(self.trap(RuntimeError::Integer { detail: "division by zero", pos: *pos }))
                    }
                    // power-of-two modulus of a non-negative value: skip the divide
                    ArithOp::Rem if x >= 0 && y > 0 && y & (y - 1) == 0 => Some(x & (y - 1)),
                    ArithOp::Div => x.checked_div(y),
                    ArithOp::Rem => x.checked_rem(y),
                };
                r.ok_or_else(|| self.trap(RuntimeError::Integer { detail: "overflow", pos: *pos }))
            }
        }
    }
}
