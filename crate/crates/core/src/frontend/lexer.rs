//! Tokenizer for RML source text.

use std::fmt;

use super::ast::Pos;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Avg,
    Div,
    Else,
    Endl,
    Ex,
    Exec,
    Exit,
    Fa,
    For,
    If,
    In,
    Max,
    Min,
    Mod,
    Number,
    Print,
    Relinfo,
    Stderr,
    String,
    Sum,
    Tc,
    Tcfast,
    To,
    While,
}

pub const KEYWORDS: [(&str, Keyword); 24] = [
    ("AVG", Keyword::Avg),
    ("DIV", Keyword::Div),
    ("ELSE", Keyword::Else),
    ("ENDL", Keyword::Endl),
    ("EX", Keyword::Ex),
    ("EXEC", Keyword::Exec),
    ("EXIT", Keyword::Exit),
    ("FA", Keyword::Fa),
    ("FOR", Keyword::For),
    ("IF", Keyword::If),
    ("IN", Keyword::In),
    ("MAX", Keyword::Max),
    ("MIN", Keyword::Min),
    ("MOD", Keyword::Mod),
    ("NUMBER", Keyword::Number),
    ("PRINT", Keyword::Print),
    ("RELINFO", Keyword::Relinfo),
    ("STDERR", Keyword::Stderr),
    ("STRING", Keyword::String),
    ("SUM", Keyword::Sum),
    ("TC", Keyword::Tc),
    ("TCFAST", Keyword::Tcfast),
    ("TO", Keyword::To),
    ("WHILE", Keyword::While),
];

impl Keyword {
    pub fn lookup(s: &str) -> Option<Keyword> {
        KEYWORDS.iter().find(|(k, _)| *k == s).map(|&(_, kw)| kw)
    }

    pub fn as_str(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).unwrap().0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Keyword(Keyword),
    Str(String),
    Num(f64),
    /// `_`
    Anon,
    Assign,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Arrow,
    DoubleArrow,
    Bang,
    Amp,
    Pipe,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Dollar,
    Hash,
    At,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Keyword(k) => return write!(f, "`{}`", k.as_str()),
            Tok::Str(s) => return write!(f, "string \"{s}\""),
            Tok::Num(n) => return write!(f, "number {n}"),
            Tok::Eof => return write!(f, "end of input"),
            Tok::Anon => "_",
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Arrow => "->",
            Tok::DoubleArrow => "<->",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Dollar => "$",
            Tok::Hash => "#",
            Tok::At => "@",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// True for letter or underscore followed by letters, digits, underscores.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Length in bytes of the numeric literal at the start of `s`, if any:
/// digits, optional fraction, optional exponent, with at least one digit
/// before the exponent.
pub fn numeric_prefix(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    let digits = |mut i: usize| {
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let int_end = digits(0);
    let mut end = int_end;
    let mut mantissa_digits = int_end;
    if end < b.len() && b[end] == b'.' {
        let frac_end = digits(end + 1);
        mantissa_digits += frac_end - end - 1;
        end = frac_end;
    }
    if mantissa_digits == 0 {
        return None;
    }
    if end < b.len() && (b[end] == b'e' || b[end] == b'E') {
        let mut i = end + 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_end = digits(i);
        if exp_end > i {
            end = exp_end;
        }
    }
    Some(end)
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Error> {
    Lexer::new(src).run()
}

struct Lexer<'a> {
    src: &'a str,
    at: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            at: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.at..]
    }

    fn bump(&mut self, bytes: usize) {
        for c in self.src[self.at..self.at + bytes].chars() {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        self.at += bytes;
    }

    fn skip_trivia(&mut self) -> Result<(), Error> {
        loop {
            let rest = self.rest();
            if let Some(c) = rest.chars().next().filter(|c| c.is_whitespace()) {
                self.bump(c.len_utf8());
            } else if rest.starts_with("//") {
                let end = rest.find('\n').unwrap_or(rest.len());
                self.bump(end);
            } else if rest.starts_with("/*") {
                let start = self.pos();
                match rest[2..].find("*/") {
                    Some(end) => self.bump(end + 4),
                    None => return Err(Error::lexical(start, "unterminated comment")),
                }
            } else {
                return Ok(());
            }
        }
    }

    fn run(mut self) -> Result<Vec<Token>, Error> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let pos = self.pos();
            let rest = self.rest();
            let Some(c) = rest.chars().next() else {
                out.push(Token { tok: Tok::Eof, pos });
                return Ok(out);
            };
            let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
                let len = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(rest.len());
                let word = &rest[..len];
                let tok = if word == "_" {
                    Tok::Anon
                } else if let Some(k) = Keyword::lookup(word) {
                    Tok::Keyword(k)
                } else {
                    Tok::Ident(word.to_string())
                };
                (tok, len)
            } else if c.is_ascii_digit() || (c == '.' && numeric_prefix(rest).is_some()) {
                let len = numeric_prefix(rest).unwrap();
                let value = rest[..len]
                    .parse::<f64>()
                    .map_err(|_| Error::lexical(pos, format!("bad number `{}`", &rest[..len])))?;
                (Tok::Num(value), len)
            } else if c == '"' {
                match rest[1..].find('"') {
                    Some(end) => (Tok::Str(rest[1..1 + end].to_string()), end + 2),
                    None => return Err(Error::lexical(pos, "unterminated string literal")),
                }
            } else {
                const OPS: [(&str, Tok); 28] = [
                    ("<->", Tok::DoubleArrow),
                    (":=", Tok::Assign),
                    ("!=", Tok::Ne),
                    ("<=", Tok::Le),
                    (">=", Tok::Ge),
                    ("->", Tok::Arrow),
                    (";", Tok::Semi),
                    (",", Tok::Comma),
                    ("(", Tok::LParen),
                    (")", Tok::RParen),
                    ("{", Tok::LBrace),
                    ("}", Tok::RBrace),
                    ("[", Tok::LBracket),
                    ("]", Tok::RBracket),
                    ("=", Tok::Eq),
                    ("<", Tok::Lt),
                    (">", Tok::Gt),
                    ("!", Tok::Bang),
                    ("&", Tok::Amp),
                    ("|", Tok::Pipe),
                    ("+", Tok::Plus),
                    ("-", Tok::Minus),
                    ("*", Tok::Star),
                    ("/", Tok::Slash),
                    ("^", Tok::Caret),
                    ("$", Tok::Dollar),
                    ("#", Tok::Hash),
                    ("@", Tok::At),
                ];
                match OPS.iter().find(|(s, _)| rest.starts_with(s)) {
                    Some((s, tok)) => (tok.clone(), s.len()),
                    None => {
                        return Err(Error::lexical(pos, format!("unexpected character `{c}`")))
                    }
                }
            };
            self.bump(len);
            out.push(Token { tok, pos });
        }
    }
}
