//! Recursive-descent parser for `.qpl` programs: a small Q#-like host
//! language extended with `parallel sections`, `parallel for` and `fanout`.

pub mod ast;
mod lexer;
mod printer;
mod resolve;

use std::fmt;

use thiserror::Error;

pub use ast::*;
pub use printer::pretty_print;

use lexer::{punct, Tok, Token};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical(String),
    Syntax { expected: Vec<String>, found: String },
    Resolution(String),
    Type(String),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
}

impl ParseError {
    pub(crate) fn lexical(span: Span, msg: String) -> Self {
        ParseError { kind: ParseErrorKind::Lexical(msg), span }
    }

    pub(crate) fn resolution(span: Span, msg: impl Into<String>) -> Self {
        ParseError { kind: ParseErrorKind::Resolution(msg.into()), span }
    }

    pub(crate) fn type_error(span: Span, msg: impl Into<String>) -> Self {
        ParseError { kind: ParseErrorKind::Type(msg.into()), span }
    }

    pub fn line(&self) -> usize {
        self.span.line
    }

    pub fn col(&self) -> usize {
        self.span.col
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.span)?;
        match &self.kind {
            ParseErrorKind::Lexical(m) => write!(f, "lexical error: {m}"),
            ParseErrorKind::Syntax { expected, found } => {
                write!(f, "syntax error: expected {}, found {found}", expected.join(" or "))
            }
            ParseErrorKind::Resolution(m) => write!(f, "resolution error: {m}"),
            ParseErrorKind::Type(m) => write!(f, "type error: {m}"),
        }
    }
}

const KEYWORDS: [&str; 20] = [
    "operation", "Unit", "Int", "Double", "Qubit", "use", "let", "for", "in", "parallel",
    "sections", "section", "fanout", "within", "apply", "if", "One", "Adjoint", "pi", "len",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Parse and resolve a program.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let program = parse_unresolved(source)?;
    resolve::check(&program)?;
    Ok(program)
}

/// Syntax-only parse, without scope and type checks.
pub fn parse_unresolved(source: &str) -> Result<Program, ParseError> {
    let tokens = lexer::tokenize(source)?;
    Parser { tokens, pos: 0 }.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            kind: ParseErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: self.peek().describe(),
            },
            span: self.span(),
        })
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn expect_word(&mut self, word: &str) -> PResult<Span> {
        if self.is_word(word) {
            Ok(self.bump().span)
        } else {
            self.error(&[&format!("`{word}`")])
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            let want = format!("`{}`", punct(&tok));
            self.error(&[&want])
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(w) if !is_keyword(&w) => {
                let span = self.bump().span;
                Ok((w, span))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut operations = Vec::new();
        while *self.peek() != Tok::Eof {
            if !self.is_word("operation") {
                return self.error(&["`operation`", "end of input"]);
            }
            operations.push(self.operation()?);
        }
        Ok(Program { operations })
    }

    fn operation(&mut self) -> PResult<OperationDef> {
        let span = self.expect_word("operation")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let (pname, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.param_type()?;
                params.push(Param { name: pname, ty });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Colon)?;
        self.expect_word("Unit")?;
        let body = self.block()?;
        Ok(OperationDef { name, params, body, span })
    }

    fn param_type(&mut self) -> PResult<Type> {
        let ty = if self.is_word("Int") {
            Type::Int
        } else if self.is_word("Double") {
            Type::Double
        } else if self.is_word("Qubit") {
            if *self.peek_at(1) == Tok::LBracket {
                self.bump();
                self.bump();
                self.expect(Tok::RBracket)?;
                return Ok(Type::QubitArray);
            }
            Type::Qubit
        } else {
            return self.error(&["`Int`", "`Double`", "`Qubit`", "`Qubit[]`"]);
        };
        self.bump();
        Ok(ty)
    }

    fn block(&mut self) -> PResult<Block> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Block { stmts })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return self.stmt_error(),
        };
        let kind = match word.as_str() {
            "use" => self.use_stmt()?,
            "let" => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Let { name, value }
            }
            "for" => {
                self.bump();
                let (var, iter) = self.for_header()?;
                let body = self.block()?;
                StmtKind::For { var, iter, body }
            }
            "parallel" => self.parallel()?,
            "within" => {
                self.bump();
                let within = self.block()?;
                self.expect_word("apply")?;
                let apply = self.block()?;
                StmtKind::WithinApply { within, apply }
            }
            "if" => self.if_result()?,
            "Adjoint" => {
                self.bump();
                self.call(true)?
            }
            w if !is_keyword(w) => self.call(false)?,
            _ => return self.stmt_error(),
        };
        Ok(Stmt { kind, span })
    }

    fn stmt_error<T>(&self) -> PResult<T> {
        self.error(&[
            "`use`", "`let`", "`for`", "`parallel`", "`within`", "`if`", "`Adjoint`",
            "identifier", "`}`",
        ])
    }

    fn use_stmt(&mut self) -> PResult<StmtKind> {
        self.bump();
        let (name, _) = self.ident()?;
        self.expect(Tok::Assign)?;
        self.expect_word("Qubit")?;
        let size = match self.peek() {
            Tok::LParen => {
                self.bump();
                self.expect(Tok::RParen)?;
                None
            }
            Tok::LBracket => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RBracket)?;
                Some(e)
            }
            _ => return self.error(&["`(`", "`[`"]),
        };
        self.expect(Tok::Semi)?;
        Ok(StmtKind::Use { name, size })
    }

    fn for_header(&mut self) -> PResult<(String, Iterable)> {
        let (var, _) = self.ident()?;
        self.expect_word("in")?;
        let first = self.expr()?;
        if *self.peek() == Tok::DotDot {
            self.bump();
            let hi = self.expr()?;
            return Ok((var, Iterable::Range(first, hi)));
        }
        match first.kind {
            ExprKind::Var(name) => Ok((var, Iterable::Array(name))),
            _ => self.error(&["`..`"]),
        }
    }

    fn parallel(&mut self) -> PResult<StmtKind> {
        self.bump();
        if self.is_word("for") {
            self.bump();
            let (var, iter) = self.for_header()?;
            let fanout = if self.is_word("fanout") {
                self.bump();
                self.expect(Tok::LParen)?;
                let (target, _) = self.ident()?;
                self.expect(Tok::Comma)?;
                let replicas = self.expr()?;
                self.expect(Tok::RParen)?;
                Some(FanoutClause { target, replicas })
            } else {
                None
            };
            let body = self.block()?;
            return Ok(StmtKind::ParallelFor { var, iter, fanout, body });
        }
        if self.is_word("sections") {
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut sections = Vec::new();
            while self.is_word("section") {
                self.bump();
                sections.push(self.block()?);
            }
            if sections.is_empty() {
                return self.error(&["`section`"]);
            }
            self.expect(Tok::RBrace).or_else(|_| self.error(&["`section`", "`}`"]))?;
            return Ok(StmtKind::ParallelSections { sections });
        }
        self.error(&["`for`", "`sections`"])
    }

    fn if_result(&mut self) -> PResult<StmtKind> {
        self.bump();
        let basis = if self.is_word("MResetZ") {
            MeasureBasis::Z
        } else if self.is_word("MResetX") {
            MeasureBasis::X
        } else {
            return self.error(&["`MResetZ`", "`MResetX`"]);
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let qubit = self.expr()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::EqEq)?;
        self.expect_word("One")?;
        let body = self.block()?;
        Ok(StmtKind::IfResult { basis, qubit, body })
    }

    fn call(&mut self, adjoint: bool) -> PResult<StmtKind> {
        let (callee, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                args.push(self.expr()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Semi)?;
        Ok(StmtKind::Call { adjoint, callee, args })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), span));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(v), span))
            }
            Tok::Real(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Real(v), span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(w) if w == "pi" => {
                self.bump();
                Ok(Expr::new(ExprKind::Pi, span))
            }
            Tok::Ident(w) if w == "len" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (name, _) = self.ident()?;
                self.expect(Tok::RParen)?;
                Ok(Expr::new(ExprKind::Len(name), span))
            }
            Tok::Ident(w) if !is_keyword(&w) => {
                self.bump();
                if *self.peek() == Tok::LBracket {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    return Ok(Expr::new(ExprKind::Index(w, Box::new(idx)), span));
                }
                Ok(Expr::new(ExprKind::Var(w), span))
            }
            _ => self.error(&["expression"]),
        }
    }
}
