//! Tokenizer and untyped syntax tree shared by scalar expressions and the
//! map-composition language. Every node remembers the byte offset where it
//! starts so later validation can point back into the source.

#[derive(Debug, Clone, PartialEq)]
pub enum Syntax {
    Num(f64),
    Ident(String),
    Call { name: String, args: Vec<Node> },
    Tuple(Vec<Node>),
    Neg(Box<Node>),
    Binary { op: BinOp, lhs: Box<Node>, rhs: Box<Node> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub syntax: Syntax,
    pub offset: usize,
}

/// A syntax error at a byte offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        Self { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::End => "end of input".into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap_or('\0');
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            _ if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| SyntaxError::new(start, format!("malformed number `{text}`")))?;
                out.push((Tok::Num(v), start));
                continue;
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(SyntaxError::new(start, format!("unexpected character `{c}`")));
            }
        };
        i += c.len_utf8();
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

/// Recursive-descent parser over the token stream.
pub struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Self { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<usize, SyntaxError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(SyntaxError::new(
                self.offset(),
                format!("expected {}, found {}", describe(&want), describe(self.peek())),
            ))
        }
    }

    pub fn at_end(&self) -> bool {
        *self.peek() == Tok::End
    }

    /// Consumes the identifier `word` if it is next.
    pub fn eat_keyword(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == word) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, usize), SyntaxError> {
        match self.bump() {
            (Tok::Ident(s), off) => Ok((s, off)),
            (t, off) => Err(SyntaxError::new(off, format!("expected identifier, found {}", describe(&t)))),
        }
    }

    /// `[lo, hi]` with signed numeric literals.
    pub fn bracket_pair(&mut self) -> Result<((f64, f64), usize), SyntaxError> {
        let off = self.expect(Tok::LBracket)?;
        let lo = self.signed_number()?;
        self.expect(Tok::Comma)?;
        let hi = self.signed_number()?;
        self.expect(Tok::RBracket)?;
        Ok(((lo, hi), off))
    }

    fn signed_number(&mut self) -> Result<f64, SyntaxError> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            (Tok::Num(v), _) => Ok(if neg { -v } else { v }),
            (t, off) => Err(SyntaxError::new(off, format!("expected number, found {}", describe(&t)))),
        }
    }

    pub fn finish(&self) -> Result<(), SyntaxError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(SyntaxError::new(self.offset(), format!("unexpected {}", describe(self.peek()))))
        }
    }

    pub fn expression(&mut self) -> Result<Node, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let (_, off) = self.bump();
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs, off);
        }
    }

    fn term(&mut self) -> Result<Node, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let (_, off) = self.bump();
            let rhs = self.unary()?;
            lhs = binary(op, lhs, rhs, off);
        }
    }

    fn unary(&mut self) -> Result<Node, SyntaxError> {
        match self.peek() {
            Tok::Minus => {
                let (_, off) = self.bump();
                let inner = self.unary()?;
                Ok(Node { syntax: Syntax::Neg(Box::new(inner)), offset: off })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, SyntaxError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            let (_, off) = self.bump();
            let exp = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exp, off));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, SyntaxError> {
        let (tok, off) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node { syntax: Syntax::Num(v), offset: off }),
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        args.push(self.expression()?);
                        while *self.peek() == Tok::Comma {
                            self.bump();
                            args.push(self.expression()?);
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Node { syntax: Syntax::Call { name, args }, offset: off })
                } else {
                    Ok(Node { syntax: Syntax::Ident(name), offset: off })
                }
            }
            Tok::LParen => {
                let first = self.expression()?;
                if *self.peek() == Tok::Comma {
                    let mut items = vec![first];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        items.push(self.expression()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Node { syntax: Syntax::Tuple(items), offset: off })
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            other => Err(SyntaxError::new(off, format!("expected expression, found {}", describe(&other)))),
        }
    }
}

fn binary(op: BinOp, lhs: Node, rhs: Node, offset: usize) -> Node {
    Node {
        syntax: Syntax::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
        offset,
    }
}
