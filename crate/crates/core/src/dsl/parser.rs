use crate::diag::{DiagCode, Diagnostic, Span};
use crate::dsl::ast::*;
use crate::dsl::lexer::{tokenize, unescape, Token, TokenKind};
use crate::expr::{
    ArithOp, CmpOp, FunctionExpr, FunctionKind, Ident, Literal, Predicate, PredicateKind, RowExpr,
    RowExprKind,
};

const MAX_DEPTH: usize = 128;

type PResult<T> = Result<T, Diagnostic>;

/// Parses a complete spec. Returns every lexical and syntax error found; after
/// an error the parser skips ahead to the next `bias "..."` header.
pub fn parse_spec(text: &str) -> Result<RawSpec, Vec<Diagnostic>> {
    let (tokens, mut diags) = tokenize(text);
    let mut p = Parser::new(&tokens, text);
    let spec = p.spec();
    diags.extend(p.diags);
    diags.sort_by_key(|d| d.span.start);
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(diags)
    }
}

/// Parses a standalone row predicate such as `frequency == 0 and ranking == 1`.
pub fn parse_predicate(text: &str) -> Result<Predicate, Vec<Diagnostic>> {
    standalone(text, |p| p.predicate())
}

/// Parses a standalone metric function expression.
pub fn parse_function(text: &str) -> Result<FunctionExpr, Vec<Diagnostic>> {
    standalone(text, |p| p.fexpr())
}

fn standalone<T>(
    text: &str,
    f: impl FnOnce(&mut Parser<'_, '_>) -> PResult<T>,
) -> Result<T, Vec<Diagnostic>> {
    let (tokens, mut diags) = tokenize(text);
    let mut p = Parser::new(&tokens, text);
    let result = f(&mut p).and_then(|v| {
        if p.at_end() {
            Ok(v)
        } else {
            Err(p.unexpected("end of input"))
        }
    });
    match result {
        Ok(v) if diags.is_empty() => Ok(v),
        Ok(_) => Err(diags),
        Err(e) => {
            diags.push(e);
            diags.sort_by_key(|d| d.span.start);
            Err(diags)
        }
    }
}

struct Parser<'t, 'src> {
    tokens: Vec<&'t Token<'src>>,
    pos: usize,
    eof: Span,
    depth: usize,
    diags: Vec<Diagnostic>,
}

impl<'t, 'src> Parser<'t, 'src> {
    fn new(all: &'t [Token<'src>], text: &str) -> Self {
        let tokens: Vec<_> = all
            .iter()
            .filter(|t| !t.kind.is_trivia() && t.kind != TokenKind::Error)
            .collect();
        let (line, column) = end_position(text);
        Parser {
            tokens,
            pos: 0,
            eof: Span::new(text.len(), 0, line, column),
            depth: 0,
            diags: Vec::new(),
        }
    }

    // --- token helpers -------------------------------------------------

    fn peek(&self) -> Option<&'t Token<'src>> {
        self.tokens.get(self.pos).copied()
    }

    fn peek_nth(&self, n: usize) -> Option<&'t Token<'src>> {
        self.tokens.get(self.pos + n).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn current_span(&self) -> Span {
        self.peek().map(|t| t.span).unwrap_or(self.eof)
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            return self.current_span();
        }
        self.tokens[self.pos - 1].span
    }

    /// Zero-length span just past the previous token.
    fn after_prev(&self) -> Span {
        if self.pos == 0 {
            return self.current_span();
        }
        let t = self.tokens[self.pos - 1];
        Span::new(
            t.span.end(),
            0,
            t.span.line,
            t.span.column + t.lexeme.chars().count() as u32,
        )
    }

    fn is_punct(&self, p: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Punct && t.lexeme == p)
    }

    fn is_word(&self, w: &str) -> bool {
        self.peek().is_some_and(|t| {
            matches!(t.kind, TokenKind::Keyword | TokenKind::Ident) && t.lexeme == w
        })
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        let found = match self.peek() {
            Some(t) => format!("`{}`", t.lexeme),
            None => "end of input".to_string(),
        };
        Diagnostic::new(
            DiagCode::ParseError,
            self.current_span(),
            format!("expected {}, found {}", expected, found),
        )
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Span> {
        if self.eat_punct(p) {
            Ok(self.prev_span())
        } else {
            Err(self.unexpected(&format!("`{}`", p)))
        }
    }

    /// Closing brace of a block. When missing, the error points just past the
    /// last token of the block.
    fn expect_close(&mut self, what: &str) -> PResult<Span> {
        if self.eat_punct("}") {
            Ok(self.prev_span())
        } else {
            let mut d = self.unexpected(&format!("`}}` to close {}", what));
            d.span = self.after_prev();
            Err(d)
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.eat_word(w) {
            Ok(self.prev_span())
        } else {
            Err(self.unexpected(&format!("`{}`", w)))
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(t) if matches!(t.kind, TokenKind::Ident | TokenKind::Keyword) => {
                self.pos += 1;
                Ok(Ident::new(t.lexeme, t.span))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// Identifier inside a predicate: `and`, `or`, `not` are operators there.
    fn column_ident(&mut self) -> PResult<Ident> {
        if self.is_word("and") || self.is_word("or") || self.is_word("not") {
            return Err(self.unexpected("column name"));
        }
        self.ident()
    }

    fn string(&mut self) -> PResult<StrLit> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::String => {
                self.pos += 1;
                Ok(StrLit {
                    value: unescape(t.lexeme),
                    span: t.span,
                })
            }
            _ => Err(self.unexpected("string literal")),
        }
    }

    /// NUMBER with an optional leading sign.
    fn number(&mut self) -> PResult<NumLit> {
        let start = self.current_span();
        let negative = if self.eat_punct("-") {
            true
        } else {
            self.eat_punct("+");
            false
        };
        match self.peek() {
            Some(t) if t.kind == TokenKind::Number => {
                self.pos += 1;
                let text = t.lexeme.trim_end_matches('.');
                let v: f64 = text.parse().map_err(|_| {
                    Diagnostic::new(DiagCode::ParseError, t.span, "malformed number")
                })?;
                Ok(NumLit {
                    value: if negative { -v } else { v },
                    span: start.to(t.span),
                })
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(Diagnostic::new(
                DiagCode::ParseError,
                self.current_span(),
                "expression nested too deeply",
            ))
        } else {
            Ok(())
        }
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    // --- spec structure ------------------------------------------------

    fn spec(&mut self) -> RawSpec {
        let mut spec = RawSpec::default();
        if self.at_end() {
            self.diags.push(self.unexpected("`bias`"));
            return spec;
        }
        while !self.at_end() {
            let before = self.pos;
            match self.bias() {
                Ok(b) => spec.biases.push(b),
                Err(d) => {
                    self.diags.push(d);
                    self.depth = 0;
                    if self.pos == before {
                        self.pos += 1;
                    }
                    self.recover_to_bias();
                }
            }
        }
        spec
    }

    fn recover_to_bias(&mut self) {
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword
                && t.lexeme == "bias"
                && self
                    .peek_nth(1)
                    .is_some_and(|n| n.kind == TokenKind::String)
            {
                return;
            }
            self.pos += 1;
        }
    }

    fn bias(&mut self) -> PResult<RawBias> {
        let start = self.expect_word("bias")?;
        let name = self.string()?;
        self.expect_punct("{")?;

        self.expect_word("kind")?;
        self.expect_punct(":")?;
        let kind_span = self.current_span();
        let kind = if self.eat_word("group") {
            RawKind::Group
        } else if self.eat_word("individual") {
            RawKind::Individual
        } else {
            return Err(self.unexpected("`group` or `individual`"));
        };

        self.expect_word("domain")?;
        self.expect_punct(":")?;
        let domain = self.string()?;

        let mut sources = Vec::new();
        if self.eat_word("sources") {
            self.expect_punct(":")?;
            self.expect_punct("[")?;
            sources.push(self.ident()?);
            while self.eat_punct(",") {
                sources.push(self.ident()?);
            }
            self.expect_punct("]")?;
        }

        let mut variables = Vec::new();
        loop {
            variables.push(self.variable()?);
            if !self.is_word("sensitive") {
                break;
            }
        }

        self.expect_word("positive")?;
        self.expect_word("outcome")?;
        let outcome = self.ident()?;

        let groups = vec![self.group()?, self.group()?];

        let mut analyses = Vec::new();
        loop {
            analyses.push(self.analysis()?);
            if !self.is_word("analysis") {
                break;
            }
        }
        let end = self.expect_close("bias block")?;
        Ok(RawBias {
            name,
            kind,
            kind_span,
            domain,
            sources,
            variables,
            outcome,
            groups,
            analyses,
            span: start.to(end),
        })
    }

    fn variable(&mut self) -> PResult<RawVariable> {
        let start = self.expect_word("sensitive")?;
        self.expect_word("variable")?;
        let name = self.ident()?;
        self.expect_punct("{")?;
        self.expect_word("values")?;
        self.expect_punct(":")?;
        self.expect_punct("[")?;
        let mut values = vec![self.ident()?];
        while self.eat_punct(",") {
            values.push(self.ident()?);
        }
        self.expect_punct("]")?;
        let end = self.expect_close("sensitive variable block")?;
        Ok(RawVariable {
            name,
            values,
            span: start.to(end),
        })
    }

    fn group(&mut self) -> PResult<RawGroup> {
        let start = self.current_span();
        let role = if self.eat_word("privileged") {
            GroupRole::Privileged
        } else if self.eat_word("unprivileged") {
            GroupRole::Unprivileged
        } else {
            return Err(self.unexpected("`privileged` or `unprivileged`"));
        };
        self.expect_word("group")?;
        self.expect_punct("{")?;
        let mut members = Vec::new();
        loop {
            let var = self.ident()?;
            self.expect_punct("=")?;
            let val = self.ident()?;
            members.push((var, val));
            if self.is_punct("}") || self.at_end() {
                break;
            }
        }
        let end = self.expect_close("group block")?;
        Ok(RawGroup {
            role,
            members,
            span: start.to(end),
        })
    }

    fn analysis(&mut self) -> PResult<RawAnalysis> {
        let start = self.expect_word("analysis")?;
        let name = self.string()?;
        self.expect_punct("{")?;
        let scope = if self.eat_word("scope") {
            self.expect_punct(":")?;
            Some(self.string()?)
        } else {
            None
        };
        let dataset = self.dataset()?;
        let mut metrics = Vec::new();
        loop {
            metrics.push(self.metric()?);
            if !self.is_word("metric") {
                break;
            }
        }
        let end = self.expect_close("analysis block")?;
        Ok(RawAnalysis {
            name,
            scope,
            dataset,
            metrics,
            span: start.to(end),
        })
    }

    fn dataset(&mut self) -> PResult<RawDataset> {
        let start = self.expect_word("dataset")?;
        self.expect_punct("{")?;
        self.expect_word("path")?;
        self.expect_punct(":")?;
        let path = self.string()?;
        let prediction = if self.eat_word("prediction") {
            self.expect_punct(":")?;
            Some(self.ident()?)
        } else {
            None
        };
        let ground_truth = if self.eat_word("ground_truth") {
            self.expect_punct(":")?;
            Some(self.ident()?)
        } else {
            None
        };
        let mut mappings = Vec::new();
        loop {
            mappings.push(self.mapping()?);
            if !self.is_word("map") {
                break;
            }
        }
        let end = self.expect_close("dataset block")?;
        Ok(RawDataset {
            path,
            prediction,
            ground_truth,
            mappings,
            span: start.to(end),
        })
    }

    fn mapping(&mut self) -> PResult<RawMapping> {
        let start = self.expect_word("map")?;
        let is_outcome = self.is_word("outcome")
            && self
                .peek_nth(1)
                .is_some_and(|t| t.kind == TokenKind::Punct && t.lexeme == "->");
        if is_outcome {
            self.pos += 1;
            self.expect_punct("->")?;
            self.expect_word("column")?;
            let column = self.ident()?;
            self.expect_punct("{")?;
            self.expect_word("positive")?;
            self.expect_punct("=")?;
            let positive = self.selector()?;
            let end = self.expect_close("outcome mapping")?;
            return Ok(RawMapping::Outcome {
                column,
                positive,
                span: start.to(end),
            });
        }
        let variable = self.ident()?;
        self.expect_punct("->")?;
        self.expect_word("column")?;
        let column = self.ident()?;
        self.expect_punct("{")?;
        let mut values = Vec::new();
        loop {
            let name = self.ident()?;
            self.expect_punct("=")?;
            values.push((name, self.selector()?));
            if self.is_punct("}") || self.at_end() {
                break;
            }
        }
        let end = self.expect_close("variable mapping")?;
        Ok(RawMapping::Variable {
            variable,
            column,
            values,
            span: start.to(end),
        })
    }

    fn selector(&mut self) -> PResult<RawSelector> {
        let start = self.current_span();
        let kind = if self.eat_word("top") {
            SelectorKind::Top(self.number()?.value)
        } else if self.eat_word("bottom") {
            SelectorKind::Bottom(self.number()?.value)
        } else if self.peek().is_some_and(|t| t.kind == TokenKind::String) {
            SelectorKind::Text(self.string()?.value)
        } else if self.is_punct("-")
            || self.is_punct("+")
            || self.peek().is_some_and(|t| t.kind == TokenKind::Number)
        {
            SelectorKind::Number(self.number()?.value)
        } else {
            return Err(self.unexpected("number, string, `top` or `bottom`"));
        };
        Ok(RawSelector {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn metric(&mut self) -> PResult<RawMetric> {
        let start = self.expect_word("metric")?;
        let name = self.ident()?;
        let mut params = Vec::new();
        if self.eat_punct("(") {
            params.push(self.number()?);
            while self.eat_punct(",") {
                params.push(self.number()?);
            }
            self.expect_punct(")")?;
        }
        let body = if self.eat_punct("=") {
            Some(self.fexpr()?)
        } else {
            None
        };
        self.expect_punct("{")?;
        self.expect_word("require")?;
        let comparator = self.comparator()?;
        let tolerance = if self.eat_word("tolerance") {
            Some(self.number()?)
        } else {
            None
        };
        let end = self.expect_close("metric block")?;
        Ok(RawMetric {
            name,
            params,
            body,
            comparator,
            tolerance,
            span: start.to(end),
        })
    }

    fn comparator(&mut self) -> PResult<RawComparator> {
        let start = self.current_span();
        if self.eat_word("in") {
            self.expect_punct("[")?;
            let lower = self.number()?;
            self.expect_punct(",")?;
            let upper = self.number()?;
            let end = self.expect_punct("]")?;
            return Ok(RawComparator::Range {
                lower,
                upper,
                span: start.to(end),
            });
        }
        let op = if self.eat_punct("==") {
            SingleOp::Eq
        } else if self.eat_punct("<=") {
            SingleOp::Le
        } else if self.eat_punct(">=") {
            SingleOp::Ge
        } else if self.eat_punct("<") {
            SingleOp::Lt
        } else if self.eat_punct(">") {
            SingleOp::Gt
        } else {
            return Err(self.unexpected("comparison operator or `in`"));
        };
        let value = self.number()?;
        Ok(RawComparator::Single {
            op,
            span: start.to(value.span),
            value,
        })
    }

    // --- metric functions ----------------------------------------------

    fn fexpr(&mut self) -> PResult<FunctionExpr> {
        self.enter()?;
        let mut lhs = self.fterm()?;
        loop {
            let op = if self.eat_punct("+") {
                ArithOp::Add
            } else if self.eat_punct("-") {
                ArithOp::Sub
            } else {
                break;
            };
            let rhs = self.fterm()?;
            lhs = FunctionExpr::binary(op, lhs, rhs);
        }
        self.leave();
        Ok(lhs)
    }

    fn fterm(&mut self) -> PResult<FunctionExpr> {
        let mut lhs = self.ffact()?;
        loop {
            let op = if self.eat_punct("*") {
                ArithOp::Mul
            } else if self.eat_punct("/") {
                ArithOp::Div
            } else {
                break;
            };
            let rhs = self.ffact()?;
            lhs = FunctionExpr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn ffact(&mut self) -> PResult<FunctionExpr> {
        let start = self.current_span();
        let kind = if self.eat_punct("(") {
            let inner = self.fexpr()?;
            self.expect_punct(")")?;
            return Ok(FunctionExpr {
                kind: inner.kind,
                span: start.to(self.prev_span()),
            });
        } else if self.is_word("log") && self.next_is_open_paren() {
            self.pos += 2;
            let base = self.number()?.value;
            self.expect_punct(",")?;
            let arg = self.fexpr()?;
            self.expect_punct(")")?;
            FunctionKind::Log {
                base,
                arg: Box::new(arg),
            }
        } else if self.is_word("group_size") && self.next_is_open_paren() {
            self.pos += 2;
            let pred = self.predicate()?;
            self.expect_punct(")")?;
            FunctionKind::GroupSize(pred)
        } else if self.is_word("probability") && self.next_is_open_paren() {
            self.pos += 2;
            let event = self.predicate()?;
            let given = if self.eat_punct("|") {
                Some(self.predicate()?)
            } else {
                None
            };
            self.expect_punct(")")?;
            FunctionKind::Probability { event, given }
        } else if self.is_word("expected") && self.next_is_open_paren() {
            self.pos += 2;
            let body = self.rexpr()?;
            let given = if self.eat_punct("|") {
                Some(self.predicate()?)
            } else {
                None
            };
            self.expect_punct(")")?;
            FunctionKind::Expected { body, given }
        } else if self.is_word("sum") && self.next_is_open_paren() {
            self.pos += 2;
            let over = self.predicate()?;
            self.expect_punct(",")?;
            let body = self.rexpr()?;
            self.expect_punct(")")?;
            FunctionKind::Sum { over, body }
        } else if self.is_punct("-")
            || self.is_punct("+")
            || self.peek().is_some_and(|t| t.kind == TokenKind::Number)
        {
            FunctionKind::Const(self.number()?.value)
        } else {
            return Err(self.unexpected(
                "number, `(`, `log`, `group_size`, `probability`, `expected` or `sum`",
            ));
        };
        Ok(FunctionExpr {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn next_is_open_paren(&self) -> bool {
        self.peek_nth(1)
            .is_some_and(|t| t.kind == TokenKind::Punct && t.lexeme == "(")
    }

    // --- row expressions ----------------------------------------------

    fn rexpr(&mut self) -> PResult<RowExpr> {
        self.enter()?;
        let mut lhs = self.rterm()?;
        loop {
            let op = if self.eat_punct("+") {
                ArithOp::Add
            } else if self.eat_punct("-") {
                ArithOp::Sub
            } else {
                break;
            };
            let rhs = self.rterm()?;
            lhs = RowExpr::binary(op, lhs, rhs);
        }
        self.leave();
        Ok(lhs)
    }

    fn rterm(&mut self) -> PResult<RowExpr> {
        let mut lhs = self.rfact()?;
        loop {
            let op = if self.eat_punct("*") {
                ArithOp::Mul
            } else if self.eat_punct("/") {
                ArithOp::Div
            } else {
                break;
            };
            let rhs = self.rfact()?;
            lhs = RowExpr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn rfact(&mut self) -> PResult<RowExpr> {
        let start = self.current_span();
        if self.eat_punct("(") {
            let inner = self.rexpr()?;
            self.expect_punct(")")?;
            return Ok(RowExpr {
                kind: inner.kind,
                span: start.to(self.prev_span()),
            });
        }
        if self.is_punct("-")
            || self.is_punct("+")
            || self.peek().is_some_and(|t| t.kind == TokenKind::Number)
        {
            let n = self.number()?;
            return Ok(RowExpr {
                kind: RowExprKind::Number(n.value),
                span: n.span,
            });
        }
        match self.peek() {
            Some(t) if matches!(t.kind, TokenKind::Ident | TokenKind::Keyword) => {
                let id = self.column_ident()?;
                Ok(RowExpr {
                    span: id.span,
                    kind: RowExprKind::Column(id),
                })
            }
            _ => Err(self.unexpected("number, column name or `(`")),
        }
    }

    // --- predicates ----------------------------------------------------

    fn predicate(&mut self) -> PResult<Predicate> {
        self.enter()?;
        let mut lhs = self.pred_and()?;
        while self.eat_word("or") {
            let rhs = self.pred_and()?;
            lhs = lhs.or(rhs);
        }
        self.leave();
        Ok(lhs)
    }

    fn pred_and(&mut self) -> PResult<Predicate> {
        let mut lhs = self.pred_unary()?;
        while self.eat_word("and") {
            let rhs = self.pred_unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn pred_unary(&mut self) -> PResult<Predicate> {
        let start = self.current_span();
        if self.eat_word("not") {
            self.enter()?;
            let inner = self.pred_unary()?;
            self.leave();
            return Ok(Predicate {
                span: start.to(inner.span),
                kind: PredicateKind::Not(Box::new(inner)),
            });
        }
        if self.eat_punct("(") {
            let inner = self.predicate()?;
            self.expect_punct(")")?;
            return Ok(Predicate {
                kind: inner.kind,
                span: start.to(self.prev_span()),
            });
        }
        let column = self.column_ident()?;
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Punct => match t.lexeme {
                "==" => CmpOp::Eq,
                "!=" => CmpOp::Ne,
                "<" => CmpOp::Lt,
                "<=" => CmpOp::Le,
                ">" => CmpOp::Gt,
                ">=" => CmpOp::Ge,
                _ => return Err(self.unexpected("comparison operator")),
            },
            _ => return Err(self.unexpected("comparison operator")),
        };
        self.pos += 1;
        let value = if self.peek().is_some_and(|t| t.kind == TokenKind::String) {
            Literal::Text(self.string()?.value)
        } else {
            Literal::Number(self.number()?.value)
        };
        Ok(Predicate {
            span: start.to(self.prev_span()),
            kind: PredicateKind::Cmp { column, op, value },
        })
    }
}

fn end_position(text: &str) -> (u32, u32) {
    let mut line = 1;
    let mut column = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }
    }
    (line, column)
}
