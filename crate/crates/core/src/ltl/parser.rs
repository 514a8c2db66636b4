//! Recursive-descent parser for the formula text syntax.
//!
//! ```text
//! formula := implied ;
//! implied := ored ( "->" implied )? ;
//! ored    := anded ( "|" anded )* ;
//! anded   := until ( "&" until )* ;
//! until   := unary ( "U" until )? ;
//! unary   := "!" unary | "X" unary | "F" unary | "G" unary | atom ;
//! atom    := "true" | "false" | IDENT | "(" formula ")" ;
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use super::{Alphabet, Formula, LtlError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Eventually,
    Globally,
    LParen,
    RParen,
    True,
    False,
    Ident(String),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Next => "`X`".into(),
            Tok::Until => "`U`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Globally => "`G`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> LtlError {
    LtlError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, LtlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0, 1, 1);

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, column);
        let mut push = |tok, width: usize, i: &mut usize, column: &mut usize| {
            out.push(Spanned {
                tok,
                line: tl,
                column: tc,
            });
            *i += width;
            *column += width;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                column += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '!' => push(Tok::Not, 1, &mut i, &mut column),
            '&' => push(Tok::And, 1, &mut i, &mut column),
            '|' => push(Tok::Or, 1, &mut i, &mut column),
            '(' => push(Tok::LParen, 1, &mut i, &mut column),
            ')' => push(Tok::RParen, 1, &mut i, &mut column),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Implies, 2, &mut i, &mut column),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut end = i + 1;
                while end < chars.len() {
                    let d = chars[end];
                    // `a->b` must split before the arrow.
                    let arrow = d == '-' && chars.get(end + 1) == Some(&'>');
                    if (d.is_ascii_alphanumeric() || d == '_' || d == '-') && !arrow {
                        end += 1;
                    } else {
                        break;
                    }
                }
                let word: String = chars[start..end].iter().collect();
                let tok = match word.as_str() {
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "F" => Tok::Eventually,
                    "G" => Tok::Globally,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word),
                };
                push(tok, end - start, &mut i, &mut column);
            }
            other => return Err(syntax(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Spanned>,
    pos: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn implied(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.ored()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implied()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ored(&mut self) -> Result<Formula, LtlError> {
        let mut acc = self.anded()?;
        while self.eat(&Tok::Or) {
            acc = Formula::or(acc, self.anded()?);
        }
        Ok(acc)
    }

    fn anded(&mut self) -> Result<Formula, LtlError> {
        let mut acc = self.until()?;
        while self.eat(&Tok::And) {
            acc = Formula::and(acc, self.until()?);
        }
        Ok(acc)
    }

    fn until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Until) {
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        match self.peek().tok {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Next => {
                self.bump();
                Ok(Formula::next(self.unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Tok::Globally => {
                self.bump();
                Ok(Formula::globally(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, LtlError> {
        let t = self.bump();
        match t.tok {
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Ident(name) => match self.alphabet.get(&name) {
                Some(a) => Ok(Formula::Atom(a)),
                None => Err(LtlError::UnknownActivity {
                    token: name,
                    line: t.line,
                    column: t.column,
                }),
            },
            Tok::LParen => {
                let inner = self.implied()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(syntax(
                        close.line,
                        close.column,
                        format!("expected `)`, found {}", close.tok.describe()),
                    ));
                }
                Ok(inner)
            }
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected a formula, found {}", other.describe()),
            )),
        }
    }
}

/// Parses `text` into a desugared core formula over `alphabet`.
///
/// Every identifier must already name an activity of the alphabet; parsing
/// never extends it.
pub fn parse_formula(text: &str, alphabet: &Alphabet) -> Result<Formula, LtlError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        alphabet,
    };
    let formula = parser.implied()?;
    let rest = parser.peek();
    if rest.tok != Tok::End {
        return Err(syntax(
            rest.line,
            rest.column,
            format!("unexpected {} after formula", rest.tok.describe()),
        ));
    }
    Ok(formula)
}
