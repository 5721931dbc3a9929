//! Recursive-descent parser; one token of lookahead suffices everywhere.

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::Pos;
use crate::backend::Relation;
use crate::error::ParseError;

pub fn parse(src: &str) -> Result<Program, ParseError> {
    parse_named("main", src)
}

pub fn parse_named(name: &str, src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, at: 0 };
    let mut decls = Vec::new();
    while matches!(p.peek(), Tok::In | Tok::Out | Tok::Var) {
        decls.push(p.decl()?);
    }
    let mut body = Vec::new();
    while *p.peek() != Tok::Eof {
        body.push(p.stmt(&["in", "out", "var"])?);
    }
    Ok(Program { name: name.to_string(), decls, body })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

const STMT_START: &[&str] = &["identifier", "for", "if", "trace", "return"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            pos: self.pos(),
            expected: expected.iter().map(|s| format!("`{s}`")).collect(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.advance().1)
        } else {
            Err(self.error(&[tok.spelling()]))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.advance().1;
                Ok((s, pos))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let (kw, pos) = self.advance();
        let kind = match kw {
            Tok::In => DeclKind::In,
            Tok::Out => DeclKind::Out,
            _ => DeclKind::Var,
        };
        let ty = match self.peek() {
            Tok::FloatTy => {
                self.advance();
                TypeName::Float
            }
            Tok::IntTy => {
                self.advance();
                TypeName::Int
            }
            Tok::Ident(_) => TypeName::Float,
            _ => return Err(self.error(&["float", "int", "identifier"])),
        };
        let (name, _) = self.ident()?;
        let len = if *self.peek() == Tok::LBracket {
            self.advance();
            let len = match *self.peek() {
                Tok::Int(v) if v > 0 => v as usize,
                _ => return Err(self.error(&["positive integer length"])),
            };
            self.advance();
            self.expect(Tok::RBracket)?;
            Some(len)
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        Ok(Decl { kind, ty, name, len, pos })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while *self.peek() != Tok::RBrace {
            body.push(self.stmt(&["}"])?);
        }
        self.advance();
        Ok(body)
    }

    /// `extra` lists what else could legally appear here, for the error message.
    fn stmt(&mut self, extra: &[&str]) -> Result<Stmt, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                let index = if *self.peek() == Tok::LBracket {
                    self.advance();
                    let e = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    Some(e)
                } else {
                    None
                };
                if *self.peek() != Tok::Assign {
                    let mut exp = vec!["="];
                    if index.is_none() {
                        exp.push("[");
                    }
                    return Err(self.error(&exp));
                }
                self.advance();
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Assign { target: LValue { name, index, pos }, value, pos })
            }
            Tok::For => {
                self.advance();
                let (var, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let from = self.expr()?;
                self.expect(Tok::To)?;
                let to = self.expr()?;
                let body = self.block()?;
                Ok(Stmt::For { var, from, to, body, pos })
            }
            Tok::If => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let then = self.block()?;
                let otherwise = if *self.peek() == Tok::Else {
                    self.advance();
                    Some(self.block()?)
                } else {
                    None
                };
                Ok(Stmt::If { cond, then, otherwise, pos })
            }
            Tok::Trace => {
                self.advance();
                self.expect(Tok::LParen)?;
                let label = match self.peek().clone() {
                    Tok::Str(s) => {
                        self.advance();
                        s
                    }
                    _ => return Err(self.error(&["string"])),
                };
                self.expect(Tok::Comma)?;
                let value = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                Ok(Stmt::Trace { label, value, pos })
            }
            Tok::Return => {
                self.advance();
                let value = if *self.peek() == Tok::Semi { None } else { Some(self.expr()?) };
                self.expect(Tok::Semi)?;
                Ok(Stmt::Return { value, pos })
            }
            _ => {
                let mut exp: Vec<&str> = STMT_START.to_vec();
                exp.extend_from_slice(extra);
                Err(self.error(&exp))
            }
        }
    }

    fn cond(&mut self) -> Result<Cond, ParseError> {
        let pos = self.pos();
        let lhs = self.expr()?;
        let rel = match self.peek() {
            Tok::Lt => Relation::Lt,
            Tok::Le => Relation::Le,
            Tok::Gt => Relation::Gt,
            Tok::Ge => Relation::Ge,
            Tok::EqEq => Relation::Eq,
            Tok::Ne => Relation::Ne,
            _ => return Err(self.error(&["<", "<=", ">", ">=", "==", "!="])),
        };
        self.advance();
        let rhs = self.expr()?;
        Ok(Cond { lhs, rel, rhs, pos })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.advance().1;
            let rhs = self.term()?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                Tok::Percent => ArithOp::Rem,
                _ => return Ok(lhs),
            };
            let pos = self.advance().1;
            let rhs = self.unary()?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            let pos = self.advance().1;
            let inner = self.unary()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), pos });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                ExprKind::Int(v)
            }
            Tok::Float(s) => {
                self.advance();
                ExprKind::Float(s)
            }
            Tok::Ident(name) => {
                self.advance();
                if *self.peek() == Tok::LBracket {
                    self.advance();
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    ExprKind::Index(name, Box::new(idx))
                } else {
                    ExprKind::Var(name)
                }
            }
            t @ (Tok::Sqrt | Tok::Fabs) => {
                self.advance();
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                let f = if t == Tok::Sqrt { Builtin::Sqrt } else { Builtin::Fabs };
                ExprKind::Call(f, Box::new(arg))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            _ => {
                return Err(self.error(&["integer", "float literal", "identifier", "sqrt", "fabs", "(", "-"]))
            }
        };
        Ok(Expr { kind, pos })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_add() {
        let p = parse("out s; s = 1.0 + 2.0; return s;").unwrap();
        assert_eq!(p.decls.len(), 1);
        assert_eq!(p.decls[0].ty, TypeName::Float);
        match &p.body[0] {
            Stmt::Assign { value, .. } => {
                assert!(matches!(value.kind, ExprKind::Binary(ArithOp::Add, _, _)))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(p.body[1], Stmt::Return { value: Some(_), .. }));
    }

    #[test]
    fn missing_operand() {
        let e = parse("x = ;").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 5 });
        assert!(e.found.contains(';'));
        assert!(e.expected.iter().any(|s| s.contains("identifier")));
    }

    #[test]
    fn precedence() {
        let p = parse("x = 1 - 2 * 3 - -4;").unwrap();
        let Stmt::Assign { value, .. } = &p.body[0] else { panic!() };
        // ((1 - (2*3)) - (-4))
        let ExprKind::Binary(ArithOp::Sub, l, r) = &value.kind else { panic!() };
        assert!(matches!(r.kind, ExprKind::Neg(_)));
        let ExprKind::Binary(ArithOp::Sub, _, m) = &l.kind else { panic!() };
        assert!(matches!(m.kind, ExprKind::Binary(ArithOp::Mul, _, _)));
    }

    #[test]
    fn decl_after_stmt_rejected() {
        assert!(parse("x = 1; var y;").is_err());
    }

    #[test]
    fn unstable_branch_listing() {
        let src = r#"
            out c;
            var a; var b;
            a = 2.0 * sqrt(3.0) / 3.0;
            b = a * a - a * a;
            if (b >= 0) { c = sqrt(b) + 10.0; } else { c = sqrt(-b) + 10.0; }
        "#;
        let p = parse(src).unwrap();
        let ifs: Vec<_> = p.body.iter().filter(|s| matches!(s, Stmt::If { .. })).collect();
        assert_eq!(ifs.len(), 1);
        let Stmt::If { then, otherwise, .. } = ifs[0] else { panic!() };
        fn sqrt_calls(e: &Expr) -> usize {
            match &e.kind {
                ExprKind::Call(Builtin::Sqrt, a) => 1 + sqrt_calls(a),
                ExprKind::Call(_, a) | ExprKind::Neg(a) | ExprKind::Index(_, a) => sqrt_calls(a),
                ExprKind::Binary(_, a, b) => sqrt_calls(a) + sqrt_calls(b),
                _ => 0,
            }
        }
        let branch_calls: usize = then
            .iter()
            .chain(otherwise.as_ref().unwrap())
            .map(|s| match s {
                Stmt::Assign { value, .. } => sqrt_calls(value),
                _ => 0,
            })
            .sum();
        assert_eq!(branch_calls, 2);
    }

    #[test]
    fn error_mentions_position() {
        let e = parse("for i = 1 to 3 { x = 1 }").unwrap_err();
        assert!(e.to_string().starts_with("1:24"), "{e}");
    }
}
