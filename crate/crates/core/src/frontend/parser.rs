//! Recursive-descent parser producing the surface [`Program`].
//!
//! Levels, loosest first: comparison (non-chaining), `->` `<->`, `|`, `&`,
//! `!`, binary `+` `-`, `*` `/` `DIV` `MOD`, `^` (right-associative),
//! unary `-`, infix atom `term rel term`, `$`.

use super::ast::*;
use super::lexer::{tokenize, Keyword, Tok, Token};
use crate::error::Error;
use crate::relation::{CmpOp, Quantifier};

pub fn parse_program(src: &str) -> Result<Program, Error> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, at: 0 };
    let mut stmts = Vec::new();
    while p.peek() != &Tok::Eof {
        stmts.push(p.stmt()?);
    }
    Ok(Program { stmts })
}

/// Parses a single expression; used by tests and tools.
pub fn parse_expr(src: &str) -> Result<Expr, Error> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, at: 0 };
    let e = p.expr()?;
    p.expect(Tok::Eof, "end of expression")?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

fn cmp_op(t: &Tok) -> Option<CmpOp> {
    Some(match t {
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &str) -> Error {
        Error::syntax(self.pos(), format!("expected {expected}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Pos, Error> {
        if self.peek() == &tok {
            Ok(self.next().pos)
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), Error> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.next().pos;
                Ok((s, pos))
            }
            Tok::Keyword(k) => Err(Error::syntax(
                self.pos(),
                format!("keyword {} cannot be used as an identifier", k.as_str()),
            )),
            _ => Err(self.error("identifier")),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, Error> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            if self.peek() == &Tok::Eof {
                return Err(self.error("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<Stmt, Error> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Keyword(Keyword::If) => {
                self.next();
                let cond = self.expr()?;
                let then = self.block()?;
                let otherwise = if self.eat(&Tok::Keyword(Keyword::Else)) {
                    Some(self.block()?)
                } else {
                    None
                };
                StmtKind::If { cond, then, otherwise }
            }
            Tok::Keyword(Keyword::While) => {
                self.next();
                let cond = self.expr()?;
                StmtKind::While { cond, body: self.block()? }
            }
            Tok::Keyword(Keyword::For) => {
                self.next();
                let (var, _) = self.ident()?;
                self.expect(Tok::Keyword(Keyword::In), "`IN`")?;
                let set = self.expr()?;
                StmtKind::For { var, set, body: self.block()? }
            }
            Tok::Keyword(Keyword::Print) => {
                self.next();
                self.print()?
            }
            Tok::Keyword(Keyword::Exec) => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Exec(e)
            }
            Tok::Keyword(Keyword::Exit) => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                StmtKind::Exit(e)
            }
            Tok::LBrace => StmtKind::Block(self.block()?),
            Tok::Ident(_) | Tok::Keyword(_) => {
                let (name, _) = self.ident()?;
                if self.eat(&Tok::Assign) {
                    let value = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    StmtKind::VarAssign { name, value }
                } else if self.eat(&Tok::LParen) {
                    let terms = self.args()?;
                    let value = if self.eat(&Tok::Assign) {
                        self.expr()?
                    } else {
                        let call = ExprKind::Call {
                            name: "TRUE".into(),
                            args: terms.clone(),
                        };
                        Expr::new(call, pos)
                    };
                    self.expect(Tok::Semi, "`;`")?;
                    StmtKind::RelAssign { rel: name, terms, value }
                } else {
                    return Err(self.error("`:=` or `(`"));
                }
            }
            _ => return Err(self.error("statement")),
        };
        Ok(Stmt { kind, pos })
    }

    fn print(&mut self) -> Result<StmtKind, Error> {
        let mut items = Vec::new();
        loop {
            let item = match self.peek() {
                Tok::Keyword(Keyword::Endl) => PrintItem::Endl(self.next().pos),
                Tok::Keyword(Keyword::Relinfo) => {
                    self.next();
                    self.expect(Tok::LParen, "`(`")?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    PrintItem::RelInfo(e)
                }
                Tok::LBracket => {
                    self.next();
                    let prefix = self.expr()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    PrintItem::Prefixed { prefix, rel: self.expr()? }
                }
                _ => PrintItem::Value(self.expr()?),
            };
            items.push(item);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let target = if self.eat(&Tok::Keyword(Keyword::To)) {
            if self.eat(&Tok::Keyword(Keyword::Stderr)) {
                PrintTarget::Stderr
            } else {
                PrintTarget::File(self.expr()?)
            }
        } else {
            PrintTarget::Stdout
        };
        self.expect(Tok::Semi, "`,` or `;`")?;
        Ok(StmtKind::Print { items, target })
    }

    /// Comma-separated expressions up to and including `)`.
    fn args(&mut self) -> Result<Vec<Expr>, Error> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma, "`,` or `)`")?;
        }
    }

    pub fn expr(&mut self) -> Result<Expr, Error> {
        let lhs = self.implication()?;
        if let Some(op) = cmp_op(self.peek()) {
            let pos = self.next().pos;
            let rhs = self.implication()?;
            if cmp_op(self.peek()).is_some() {
                return Err(Error::syntax(
                    self.pos(),
                    "comparisons cannot be chained; use parentheses",
                ));
            }
            let kind = ExprKind::Compare {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                prefix: false,
            };
            return Ok(Expr::new(kind, pos));
        }
        Ok(lhs)
    }

    fn binary_level(
        &mut self,
        ops: &[(Tok, BinaryOp)],
        next: fn(&mut Self) -> Result<Expr, Error>,
    ) -> Result<Expr, Error> {
        let mut lhs = next(self)?;
        while let Some(&(_, op)) = ops.iter().find(|(t, _)| t == self.peek()) {
            let pos = self.next().pos;
            let rhs = next(self)?;
            lhs = Expr::new(
                ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                pos,
            );
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Expr, Error> {
        self.binary_level(
            &[(Tok::Arrow, BinaryOp::Implies), (Tok::DoubleArrow, BinaryOp::Iff)],
            Self::disjunction,
        )
    }

    fn disjunction(&mut self) -> Result<Expr, Error> {
        self.binary_level(&[(Tok::Pipe, BinaryOp::Or)], Self::conjunction)
    }

    fn conjunction(&mut self) -> Result<Expr, Error> {
        self.binary_level(&[(Tok::Amp, BinaryOp::And)], Self::negation)
    }

    fn negation(&mut self) -> Result<Expr, Error> {
        if self.peek() == &Tok::Bang {
            let pos = self.next().pos;
            let e = self.negation()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(e)), pos));
        }
        self.additive()
    }

    fn additive(&mut self) -> Result<Expr, Error> {
        self.binary_level(
            &[(Tok::Plus, BinaryOp::Add), (Tok::Minus, BinaryOp::Sub)],
            Self::multiplicative,
        )
    }

    fn multiplicative(&mut self) -> Result<Expr, Error> {
        self.binary_level(
            &[
                (Tok::Star, BinaryOp::Mul),
                (Tok::Slash, BinaryOp::Div),
                (Tok::Keyword(Keyword::Div), BinaryOp::IntDiv),
                (Tok::Keyword(Keyword::Mod), BinaryOp::Mod),
            ],
            Self::power,
        )
    }

    fn power(&mut self) -> Result<Expr, Error> {
        let base = self.unary()?;
        if self.peek() == &Tok::Caret {
            let pos = self.next().pos;
            let exp = self.power()?;
            let kind = ExprKind::Binary {
                op: BinaryOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
            };
            return Ok(Expr::new(kind, pos));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, Error> {
        if self.peek() == &Tok::Minus {
            let pos = self.next().pos;
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(e)), pos));
        }
        self.infix_atom()
    }

    /// `term rel term`: a term followed directly by an identifier.
    fn infix_atom(&mut self) -> Result<Expr, Error> {
        let lhs = self.dollar()?;
        if let Tok::Ident(name) = self.peek().clone() {
            let pos = self.next().pos;
            let rhs = self.dollar()?;
            let kind = ExprKind::InfixAtom {
                name,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
            return Ok(Expr::new(kind, pos));
        }
        Ok(lhs)
    }

    fn dollar(&mut self) -> Result<Expr, Error> {
        if self.peek() == &Tok::Dollar {
            let pos = self.next().pos;
            let e = self.dollar()?;
            return Ok(Expr::new(ExprKind::Arg(Box::new(e)), pos));
        }
        self.primary()
    }

    fn paren_arg(&mut self) -> Result<Expr, Error> {
        self.expect(Tok::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn quantified(&mut self, kind: Quantifier, pos: Pos) -> Result<Expr, Error> {
        self.expect(Tok::LParen, "`(`")?;
        let mut attrs = vec![self.ident()?];
        self.expect(Tok::Comma, "`,`")?;
        // Further attributes: an identifier directly followed by a comma.
        while matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::Comma {
            attrs.push(self.ident()?);
            self.next();
        }
        let mut body = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        for (attr, attr_pos) in attrs.into_iter().rev() {
            body = Expr::new(
                ExprKind::Quantified {
                    kind,
                    attr,
                    attr_pos,
                    body: Box::new(body),
                },
                pos,
            );
        }
        Ok(body)
    }

    fn regex_pattern(&mut self) -> Result<Expr, Error> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(Expr::new(ExprKind::Str(s), pos))
            }
            Tok::Ident(s) => {
                self.next();
                Ok(Expr::new(ExprKind::Ident(s), pos))
            }
            Tok::LParen => self.paren_arg(),
            Tok::Keyword(Keyword::String) => {
                self.next();
                let arg = Box::new(self.paren_arg()?);
                Ok(Expr::new(ExprKind::Func { func: Func::String, arg }, pos))
            }
            _ => Err(self.error("regular expression string")),
        }
    }

    fn primary(&mut self) -> Result<Expr, Error> {
        let pos = self.pos();
        let tok = self.next();
        let kind = match tok.tok {
            Tok::Num(n) => ExprKind::Num(n),
            Tok::Str(s) => ExprKind::Str(s),
            Tok::Anon => ExprKind::Anon,
            Tok::Ident(name) => {
                if self.eat(&Tok::LParen) {
                    ExprKind::Call { name, args: self.args()? }
                } else {
                    ExprKind::Ident(name)
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(e);
            }
            Tok::At => {
                let pattern = Box::new(self.regex_pattern()?);
                let term = Box::new(self.paren_arg()?);
                ExprKind::Regex { pattern, term }
            }
            Tok::Hash => ExprKind::Func {
                func: Func::Count,
                arg: Box::new(self.paren_arg()?),
            },
            ref t if cmp_op(t).is_some() => {
                let op = cmp_op(t).unwrap();
                self.expect(Tok::LParen, "`(` after prefix comparison")?;
                let lhs = Box::new(self.expr()?);
                self.expect(Tok::Comma, "`,`")?;
                let rhs = Box::new(self.expr()?);
                self.expect(Tok::RParen, "`)`")?;
                ExprKind::Compare { op, lhs, rhs, prefix: true }
            }
            Tok::Keyword(k) => {
                let func = match k {
                    Keyword::Ex => return self.quantified(Quantifier::Exists, pos),
                    Keyword::Fa => return self.quantified(Quantifier::Forall, pos),
                    Keyword::Tc | Keyword::Tcfast => {
                        let body = Box::new(self.paren_arg()?);
                        let fast = k == Keyword::Tcfast;
                        return Ok(Expr::new(ExprKind::Closure { fast, body }, pos));
                    }
                    Keyword::Number => Func::Number,
                    Keyword::String => Func::String,
                    Keyword::Min => Func::Min,
                    Keyword::Max => Func::Max,
                    Keyword::Sum => Func::Sum,
                    Keyword::Avg => Func::Avg,
                    _ => {
                        self.at -= 1;
                        return Err(self.error("expression"));
                    }
                };
                ExprKind::Func {
                    func,
                    arg: Box::new(self.paren_arg()?),
                }
            }
            _ => {
                self.at -= 1;
                return Err(self.error("expression"));
            }
        };
        Ok(Expr::new(kind, pos))
    }
}
