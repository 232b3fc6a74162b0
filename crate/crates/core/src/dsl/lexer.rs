//! Lossless tokenizer. Trivia (whitespace, comments) and malformed input are
//! kept as tokens so the concatenated lexemes always reproduce the source.

use crate::diag::{DiagCode, Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    String,
    Number,
    Punct,
    Whitespace,
    Comment,
    /// Illegal character or unterminated string; a diagnostic is emitted alongside.
    Error,
}

impl TokenKind {
    pub fn is_trivia(&self) -> bool {
        matches!(self, TokenKind::Whitespace | TokenKind::Comment)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub lexeme: &'a str,
    pub span: Span,
}

/// Words with a fixed role somewhere in the grammar. They are still accepted
/// wherever an identifier is expected, except `and`/`or`/`not` inside predicates.
pub const KEYWORDS: &[&str] = &[
    "bias",
    "kind",
    "group",
    "individual",
    "domain",
    "sources",
    "sensitive",
    "variable",
    "values",
    "positive",
    "outcome",
    "privileged",
    "unprivileged",
    "analysis",
    "scope",
    "dataset",
    "path",
    "prediction",
    "ground_truth",
    "map",
    "column",
    "top",
    "bottom",
    "metric",
    "require",
    "tolerance",
    "in",
    "log",
    "group_size",
    "probability",
    "expected",
    "sum",
    "and",
    "or",
    "not",
];

const PUNCT: &[&str] = &[
    "->", "==", "!=", "<=", ">=", "{", "}", "[", "]", "(", ")", ":", ",", "=", "<", ">", "+", "-",
    "*", "/", "|",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, mut pred: impl FnMut(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
    }
}

/// Tokenizes `src`, including trivia. Lexical errors are reported through the
/// returned diagnostics and represented by `TokenKind::Error` tokens.
pub fn tokenize(src: &str) -> (Vec<Token<'_>>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();

    while let Some(c) = cur.peek() {
        let start = cur.pos;
        let (line, column) = (cur.line, cur.column);
        let kind = if c.is_whitespace() {
            cur.eat_while(char::is_whitespace);
            TokenKind::Whitespace
        } else if c == '#' {
            cur.eat_while(|c| c != '\n');
            TokenKind::Comment
        } else if c == '_' || c.is_ascii_alphabetic() {
            cur.eat_while(|c| c == '_' || c.is_ascii_alphanumeric());
            if is_keyword(&src[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit()
            || (c == '.' && cur.peek_second().is_some_and(|d| d.is_ascii_digit()))
        {
            cur.eat_while(|c| c.is_ascii_digit());
            if cur.peek() == Some('.') && cur.peek_second().is_some_and(|d| d.is_ascii_digit()) {
                cur.bump();
                cur.eat_while(|c| c.is_ascii_digit());
            } else if cur.peek() == Some('.') {
                // trailing dot: `1.` is accepted as `1`
                cur.bump();
            }
            TokenKind::Number
        } else if c == '"' {
            cur.bump();
            let mut terminated = false;
            while let Some(c) = cur.peek() {
                match c {
                    '\\' => {
                        cur.bump();
                        cur.bump();
                    }
                    '"' => {
                        cur.bump();
                        terminated = true;
                        break;
                    }
                    '\n' => break,
                    _ => {
                        cur.bump();
                    }
                }
            }
            if terminated {
                TokenKind::String
            } else {
                diags.push(Diagnostic::new(
                    DiagCode::LexError,
                    Span::new(start, cur.pos - start, line, column),
                    "unterminated string literal",
                ));
                TokenKind::Error
            }
        } else if let Some(p) = PUNCT.iter().find(|p| src[cur.pos..].starts_with(**p)) {
            for _ in 0..p.len() {
                cur.bump();
            }
            TokenKind::Punct
        } else {
            cur.bump();
            diags.push(Diagnostic::new(
                DiagCode::LexError,
                Span::new(start, cur.pos - start, line, column),
                format!("illegal character {:?}", c),
            ));
            TokenKind::Error
        };
        tokens.push(Token {
            kind,
            lexeme: &src[start..cur.pos],
            span: Span::new(start, cur.pos - start, line, column),
        });
    }
    (tokens, diags)
}

/// Decodes the body of a string token (without surrounding quotes).
pub fn unescape(lexeme: &str) -> String {
    let inner = lexeme
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(lexeme);
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, &str)> {
        tokenize(src)
            .0
            .into_iter()
            .filter(|t| !t.kind.is_trivia())
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn punctuation_prefers_longest_match() {
        let k = kinds("-> == <= >= != < > = -");
        let lex: Vec<_> = k.iter().map(|(_, l)| *l).collect();
        assert_eq!(lex, ["->", "==", "<=", ">=", "!=", "<", ">", "=", "-"]);
    }

    #[test]
    fn keywords_and_identifiers() {
        let k = kinds("bias race __outcome x1");
        assert_eq!(k[0], (TokenKind::Keyword, "bias"));
        assert_eq!(k[1], (TokenKind::Ident, "race"));
        assert_eq!(k[2], (TokenKind::Ident, "__outcome"));
        assert_eq!(k[3], (TokenKind::Ident, "x1"));
    }

    #[test]
    fn numbers_and_strings() {
        let k = kinds(r#"0.2 10 .5 "a \"b\"""#);
        assert_eq!(k[0], (TokenKind::Number, "0.2"));
        assert_eq!(k[1], (TokenKind::Number, "10"));
        assert_eq!(k[2], (TokenKind::Number, ".5"));
        assert_eq!(k[3].0, TokenKind::String);
        assert_eq!(unescape(k[3].1), "a \"b\"");
    }

    #[test]
    fn comments_run_to_end_of_line() {
        let (toks, diags) = tokenize("bias # a comment\n\"x\"");
        assert!(diags.is_empty());
        assert_eq!(toks[2].kind, TokenKind::Comment);
        assert_eq!(toks[2].lexeme, "# a comment");
        assert_eq!(toks[4].span.line, 2);
    }

    #[test]
    fn unterminated_string_and_illegal_char_are_reported() {
        let (_, diags) = tokenize("bias \"abc\n$");
        assert_eq!(diags.len(), 2);
        assert_eq!(diags[0].code, DiagCode::LexError);
        assert_eq!((diags[0].line(), diags[0].column()), (1, 6));
        assert_eq!((diags[1].line(), diags[1].column()), (2, 1));
    }

    #[test]
    fn lossless_on_mixed_input() {
        let src = "bias \"é\" { kind: group } # trailing\r\n\t@@ \"open";
        let (toks, _) = tokenize(src);
        let joined: String = toks.iter().map(|t| t.lexeme).collect();
        assert_eq!(joined, src);
    }
}
