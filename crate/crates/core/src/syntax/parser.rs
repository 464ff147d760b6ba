//! Recursive-descent parser for the ASCII grammar.
//!
//! Positions in errors are 1-based character offsets; running off the end
//! reports the position just past the last character.

use super::{Formula, Rule, Sig};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Top,
    Bot,
    And,
    Or,
    Imp,
    Iff,
    Not,
    Box,
    BoxI,
    BoxM,
    LParen,
    RParen,
    Comma,
    Slash,
    Dot,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Top => "`T`".into(),
        Tok::Bot => "`F`".into(),
        Tok::And => "`/\\`".into(),
        Tok::Or => "`\\/`".into(),
        Tok::Imp => "`->`".into(),
        Tok::Iff => "`<->`".into(),
        Tok::Not => "`~`".into(),
        Tok::Box => "`box`".into(),
        Tok::BoxI => "`boxI`".into(),
        Tok::BoxM => "`boxM`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Dot => "`.`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '/' if next == Some('\\') => (Tok::And, 2),
            '/' => (Tok::Slash, 1),
            '\\' if next == Some('/') => (Tok::Or, 2),
            '-' if next == Some('>') => (Tok::Imp, 2),
            '<' if next == Some('-') && chars.get(i + 2) == Some(&'>') => (Tok::Iff, 3),
            '~' => (Tok::Not, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.as_str() {
                    "T" => Tok::Top,
                    "F" => Tok::Bot,
                    "box" => Tok::Box,
                    "boxI" => Tok::BoxI,
                    "boxM" => Tok::BoxM,
                    _ => Tok::Ident(word),
                };
                (tok, j - i)
            }
            other => {
                return Err(Error::Parse { pos, msg: format!("unexpected character `{other}`") })
            }
        };
        out.push((tok, pos));
        i += len;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    sig: Sig,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: format!("expected {wanted}, found {}", describe(self.peek())),
        })
    }

    fn wrong_sig<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: format!("connective {what} is not available in signature {}", self.sig),
        })
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(self.sig, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Imp {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(self.sig, lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Not => {
                if self.sig != Sig::Bi {
                    return self.wrong_sig("`~`");
                }
                self.bump();
                Ok(Formula::neg(self.unary()?))
            }
            Tok::Box => {
                if self.sig != Sig::Im {
                    return self.wrong_sig("`box`");
                }
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::BoxI | Tok::BoxM => {
                if self.sig != Sig::Bi {
                    return self.wrong_sig(&describe(self.peek()));
                }
                let t = self.bump();
                let arg = self.unary()?;
                Ok(if t == Tok::BoxI { Formula::box_i(arg) } else { Formula::box_m(arg) })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Var(name))
            }
            Tok::Top => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::Bot => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                if *self.peek() != Tok::RParen {
                    return self.unexpected("`)`");
                }
                self.bump();
                Ok(f)
            }
            _ => self.unexpected("a formula"),
        }
    }

    fn side(&mut self) -> Result<Vec<Formula>> {
        if *self.peek() == Tok::Dot {
            self.bump();
            return Ok(vec![]);
        }
        let mut out = vec![self.formula()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.formula()?);
        }
        Ok(out)
    }

    fn expect_end(&self) -> Result<()> {
        if *self.peek() != Tok::End {
            return self.unexpected("end of input");
        }
        Ok(())
    }
}

/// Parses a single formula in the given signature.
pub fn parse_formula(text: &str, sig: Sig) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, at: 0, sig };
    let f = p.formula()?;
    p.expect_end()?;
    Ok(f)
}

/// Parses `g1, g2 / d1, d2`, with `.` for an empty side.
pub fn parse_rule(text: &str, sig: Sig) -> Result<Rule> {
    let mut p = Parser { toks: lex(text)?, at: 0, sig };
    let premises = p.side()?;
    if *p.peek() != Tok::Slash {
        return p.unexpected("`/`");
    }
    p.bump();
    let conclusions = p.side()?;
    p.expect_end()?;
    Rule::new(sig, premises, conclusions)
}
