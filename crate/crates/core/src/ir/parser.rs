//! Recursive-descent parser for the MOL surface syntax.
//!
//! Syntax errors are reported with the position of the offending token and
//! the set of tokens that would have been accepted there. After an error the
//! parser skips to the next top-level item and keeps going, so one pass
//! reports at most one syntax error per item.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::diag::Diagnostic;

struct SyntaxError {
    pos: Pos,
    expected: Vec<String>,
    found: Tok,
}

impl SyntaxError {
    fn into_diagnostic(self, scope: &str) -> Diagnostic {
        let expected = match self.expected.as_slice() {
            [one] => one.clone(),
            many => format!("one of {}", many.join(", ")),
        };
        Diagnostic::error(
            "syntax",
            scope,
            self.pos,
            format!("expected {expected}, found {}", self.found),
        )
    }
}

type PResult<T> = Result<T, SyntaxError>;

struct Parser {
    toks: Vec<Token>,
    at: usize,
    scope: String,
}

const ITEM_KEYWORDS: &[&str] = &["classifier", "face", "class", "method"];

/// Parses program text without semantic validation.
pub fn parse_syntax(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let toks = match tokenize(src) {
        Ok(t) => t,
        Err(e) => return Err(vec![Diagnostic::error("syntax", "-", e.pos, e.message)]),
    };
    let mut p = Parser {
        toks,
        at: 0,
        scope: String::new(),
    };
    let mut program = Program::default();
    let mut diags = Vec::new();
    while !p.check(&Tok::Eof) {
        let start = p.at;
        p.scope.clear();
        match p.item() {
            Ok(item) => program.items.push(item),
            Err(e) => {
                let scope = if p.scope.is_empty() {
                    "-".to_string()
                } else {
                    p.scope.clone()
                };
                diags.push(e.into_diagnostic(&scope));
                p.recover(start);
            }
        }
    }
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(diags)
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn check(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn check_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Keyword(k) if *k == kw)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(SyntaxError {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().clone(),
        })
    }

    fn expect(&mut self, t: Tok) -> PResult<Pos> {
        if self.check(&t) {
            Ok(self.advance().pos)
        } else {
            let expected = t.to_string();
            self.fail(&[expected.as_str()])
        }
    }

    fn expect_kw(&mut self, kw: &'static str) -> PResult<Pos> {
        if self.check_kw(kw) {
            Ok(self.advance().pos)
        } else {
            self.fail(&[&format!("`{kw}`")])
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.check(t) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.check_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    /// Skips to the next top-level item keyword after a syntax error in the
    /// item that started at token `start`.
    fn recover(&mut self, start: usize) {
        let mut depth: i64 = 0;
        for t in &self.toks[start..self.at] {
            match t.tok {
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth -= 1,
                _ => {}
            }
        }
        if self.at == start {
            self.advance();
        }
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Keyword(k) if depth <= 0 && ITEM_KEYWORDS.contains(k) => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth -= 1,
                _ => {}
            }
            self.advance();
        }
    }

    fn item(&mut self) -> PResult<Item> {
        if self.check_kw("classifier") {
            self.classifier().map(Item::Classifier)
        } else if self.check_kw("face") {
            self.face().map(Item::Face)
        } else if self.check_kw("class") {
            self.class().map(Item::Class)
        } else if self.check_kw("method") {
            self.method(None).map(Item::Method)
        } else {
            self.fail(&["`classifier`", "`face`", "`class`", "`method`"])
        }
    }

    fn classifier(&mut self) -> PResult<ClassifierDecl> {
        let pos = self.expect_kw("classifier")?;
        let name = self.ident()?;
        self.scope = name.clone();
        let mut parents = Vec::new();
        if self.eat_kw("extends") {
            parents.push(self.ident()?);
            while self.eat(&Tok::Comma) {
                parents.push(self.ident()?);
            }
        }
        self.expect(Tok::Semi)?;
        Ok(ClassifierDecl { name, parents, pos })
    }

    fn face(&mut self) -> PResult<FaceDecl> {
        let pos = self.expect_kw("face")?;
        let name = self.ident()?;
        self.scope = name.clone();
        self.expect(Tok::LBrace)?;
        let mut signatures = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let sig_name = match self.peek() {
                Tok::Ident(_) => self.ident()?,
                _ => return self.fail(&["identifier", "`}`"]),
            };
            let params = self.param_list()?;
            self.expect(Tok::Semi)?;
            signatures.push(MethodSignature { name: sig_name, params });
        }
        Ok(FaceDecl { name, signatures, pos })
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        let pos = self.expect_kw("class")?;
        let name = self.ident()?;
        self.scope = name.clone();
        self.expect_kw("is")?;
        let classifier = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        loop {
            if self.eat(&Tok::RBrace) {
                break;
            }
            if self.check_kw("method") {
                methods.push(self.method(Some(name.clone()))?);
                continue;
            }
            if !methods.is_empty() {
                return self.fail(&["`method`", "`}`"]);
            }
            let fpos = self.pos();
            // Fields default to optional.
            let nullability = if self.eat_kw("req") {
                Nullability::Required
            } else if self.eat_kw("opt") || matches!(self.peek(), Tok::Ident(_)) {
                Nullability::Optional
            } else {
                return self.fail(&["`req`", "`opt`", "identifier", "`method`", "`}`"]);
            };
            let fname = self.ident()?;
            self.expect(Tok::Colon)?;
            let type_name = self.ident()?;
            self.expect(Tok::Semi)?;
            fields.push(FieldDecl {
                name: fname,
                type_name,
                nullability,
                pos: fpos,
            });
        }
        Ok(ClassDecl {
            name,
            classifier,
            fields,
            methods,
            pos,
        })
    }

    fn method(&mut self, owner: Option<String>) -> PResult<MethodDecl> {
        let pos = self.expect_kw("method")?;
        let name = self.ident()?;
        self.scope = name.clone();
        let params = self.param_list()?;
        let body = self.block()?;
        Ok(MethodDecl {
            owner,
            signature: MethodSignature { name, params },
            body,
            pos,
        })
    }

    fn param_list(&mut self) -> PResult<Vec<Param>> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(params);
        }
        loop {
            params.push(self.param()?);
            if self.eat(&Tok::RParen) {
                return Ok(params);
            }
            // Separators are optional.
            self.eat(&Tok::Comma);
        }
    }

    fn param(&mut self) -> PResult<Param> {
        if self.eat_kw("val") {
            let name = self.ident()?;
            return Ok(Param {
                name,
                ty: ParamType::Value,
            });
        }
        let nullability = if self.eat_kw("req") {
            Nullability::Required
        } else if self.eat_kw("opt") {
            Nullability::Optional
        } else if matches!(self.peek(), Tok::Ident(_)) {
            Nullability::Required
        } else {
            return self.fail(&["`req`", "`opt`", "`val`", "identifier", "`)`"]);
        };
        let name = self.ident()?;
        self.expect(Tok::Colon)?;
        let type_name = self.ident()?;
        Ok(Param {
            name,
            ty: ParamType::Reference { type_name, nullability },
        })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while !self.eat(&Tok::RBrace) {
            stmts.push(self.stmt()?);
        }
        Ok(stmts)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Keyword("deref") => {
                self.advance();
                let v = self.ident()?;
                self.expect(Tok::Semi)?;
                StmtKind::Deref(v)
            }
            Tok::Keyword("call") => {
                self.advance();
                let callee = self.ident()?;
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                while !self.eat(&Tok::RParen) {
                    if self.eat_kw("null") {
                        args.push(Arg::Null);
                    } else if matches!(self.peek(), Tok::Ident(_)) {
                        args.push(Arg::Var(self.ident()?));
                    } else {
                        return self.fail(&["identifier", "`null`", "`)`"]);
                    }
                    if !self.check(&Tok::RParen) {
                        self.eat(&Tok::Comma);
                    }
                }
                self.expect(Tok::Semi)?;
                StmtKind::Call { callee, args }
            }
            Tok::Keyword("return") => {
                self.advance();
                self.expect(Tok::Semi)?;
                StmtKind::Return
            }
            Tok::Keyword("fail") => {
                self.advance();
                self.expect(Tok::Semi)?;
                StmtKind::Fail
            }
            Tok::Keyword("if") => {
                self.advance();
                let cond = self.cond()?;
                let then_body = self.block()?;
                let else_body = if self.eat_kw("else") { self.block()? } else { Vec::new() };
                StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                }
            }
            Tok::Keyword("while") => {
                self.advance();
                let cond = self.cond()?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Ident(target) => {
                self.advance();
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { target, value }
            }
            _ => {
                return self.fail(&[
                    "`deref`",
                    "`call`",
                    "`return`",
                    "`fail`",
                    "`if`",
                    "`while`",
                    "identifier",
                    "`}`",
                ])
            }
        };
        Ok(Stmt { kind, pos })
    }

    fn expr(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Keyword("null") => {
                self.advance();
                Ok(Expr::Null)
            }
            Tok::Keyword("opaque") => {
                self.advance();
                Ok(Expr::Opaque)
            }
            Tok::Keyword("new") => {
                self.advance();
                Ok(Expr::New(self.ident()?))
            }
            Tok::Ident(v) => {
                self.advance();
                Ok(Expr::Var(v))
            }
            _ => self.fail(&["`null`", "`new`", "`opaque`", "identifier"]),
        }
    }

    fn cond(&mut self) -> PResult<Cond> {
        if self.eat_kw("opaque") {
            return Ok(Cond::Opaque);
        }
        let v = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return self.fail(&["`opaque`", "identifier"]),
        };
        let is_null = if self.eat(&Tok::EqEq) {
            true
        } else if self.eat(&Tok::NotEq) {
            false
        } else {
            return self.fail(&["`==`", "`!=`"]);
        };
        self.expect_kw("null")?;
        Ok(if is_null { Cond::IsNull(v) } else { Cond::NotNull(v) })
    }
}
