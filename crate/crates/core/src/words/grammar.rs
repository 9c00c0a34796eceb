//! Text and JSON forms of generator words.
//!
//! ```text
//! word   := "1" | factor (("*")? factor)*
//! factor := atom ("^" "-"? digits)?
//! atom   := "t" | "b" | "g" digit "[" perm "]" | "h" digit "[" idx ("," idx)* ";" perm "]"
//!         | "h[" perm "]" | "h[" step ("," step)* ";" perm "]"
//! step   := "(" idx "," "-"? "1" ")"
//! ```
//!
//! Permutation text is kept as normalized cycle notation; its degree is
//! only known once a family interprets the token.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "gen", rename_all = "snake_case")]
pub enum Generator {
    /// `g<side>[perm]`
    G {
        side: u8,
        perm: String,
    },
    /// `h<side>[i1,...,in;perm]`
    H {
        side: u8,
        path: Vec<u32>,
        perm: String,
    },
    /// `h[perm]`
    Top {
        perm: String,
    },
    /// `h[(i1,e1),...;perm]`
    Path {
        steps: Vec<(u32, i8)>,
        perm: String,
    },
    T,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    #[serde(flatten)]
    pub gen: Generator,
    pub power: i64,
}

impl Token {
    pub fn new(gen: Generator, power: i64) -> Self {
        Token { gen, power }
    }

    pub fn inverse(&self) -> Token {
        Token {
            gen: self.gen.clone(),
            power: -self.power,
        }
    }
}

pub fn invert_word(word: &[Token]) -> Vec<Token> {
    word.iter().rev().map(Token::inverse).collect()
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::G { side, perm } => write!(f, "g{side}[{perm}]"),
            Generator::H { side, path, perm } => {
                let idx: Vec<String> = path.iter().map(|i| i.to_string()).collect();
                write!(f, "h{side}[{};{perm}]", idx.join(","))
            }
            Generator::Top { perm } => write!(f, "h[{perm}]"),
            Generator::Path { steps, perm } => {
                let s: Vec<String> = steps.iter().map(|(i, e)| format!("({i},{e})")).collect();
                write!(f, "h[{};{perm}]", s.join(","))
            }
            Generator::T => f.write_str("t"),
            Generator::B => f.write_str("b"),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.power {
            1 => write!(f, "{}", self.gen),
            k => write!(f, "{}^{k}", self.gen),
        }
    }
}

pub fn print_word(word: &[Token]) -> String {
    if word.is_empty() {
        return "1".to_string();
    }
    word.iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(" * ")
}

pub fn parse_word(text: &str) -> Result<Vec<Token>> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.peek().is_none() {
        return Ok(Vec::new());
    }
    if p.peek() == Some(b'1') {
        p.pos += 1;
        p.skip_ws();
        return match p.peek() {
            None => Ok(Vec::new()),
            Some(_) => Err(Error::parse(p.pos, "trailing input after identity")),
        };
    }
    let mut tokens = vec![p.factor()?];
    loop {
        p.skip_ws();
        match p.peek() {
            None => return Ok(tokens),
            Some(b'*') => {
                p.pos += 1;
                p.skip_ws();
                tokens.push(p.factor()?);
            }
            Some(_) => tokens.push(p.factor()?),
        }
    }
}

/// Collapses cycle notation to single-spaced form, `"()"` for the identity.
pub fn normalize_perm(text: &str) -> Result<String> {
    let mut cycles: Vec<Vec<u32>> = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::InvalidPerm(format!("expected '(' in {text:?}")))?;
        let close = body
            .find(')')
            .ok_or_else(|| Error::InvalidPerm(format!("unclosed cycle in {text:?}")))?;
        let points = body[..close]
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<u32>()
                    .map_err(|_| Error::InvalidPerm(format!("bad point {s:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if points.len() > 1 {
            cycles.push(points);
        }
        rest = body[close + 1..].trim_start();
    }
    if cycles.is_empty() {
        return Ok("()".to_string());
    }
    Ok(cycles
        .iter()
        .map(|c| {
            format!(
                "({})",
                c.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        })
        .collect())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::parse(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<i64>().ok())
            .ok_or_else(|| Error::parse(start, "expected an integer"))
    }

    fn index(&mut self) -> Result<u32> {
        let at = self.pos;
        let k = self.integer()?;
        u32::try_from(k).map_err(|_| Error::parse(at, "index must be nonnegative"))
    }

    fn factor(&mut self) -> Result<Token> {
        let gen = self.atom()?;
        self.skip_ws();
        let power = if self.peek() == Some(b'^') {
            self.pos += 1;
            self.integer()?
        } else {
            1
        };
        Ok(Token { gen, power })
    }

    fn atom(&mut self) -> Result<Generator> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b't') => {
                self.pos += 1;
                Ok(Generator::T)
            }
            Some(b'b') => {
                self.pos += 1;
                Ok(Generator::B)
            }
            Some(b'g') => {
                self.pos += 1;
                let side = self.side()?;
                self.expect(b'[')?;
                let perm = self.perm_until(b']')?;
                self.expect(b']')?;
                Ok(Generator::G { side, perm })
            }
            Some(b'h') => {
                self.pos += 1;
                if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let side = self.side()?;
                    self.expect(b'[')?;
                    let mut path = vec![self.index()?];
                    loop {
                        self.skip_ws();
                        match self.peek() {
                            Some(b',') => {
                                self.pos += 1;
                                path.push(self.index()?);
                            }
                            Some(b';') => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(Error::parse(self.pos, "expected ',' or ';'")),
                        }
                    }
                    let perm = self.perm_until(b']')?;
                    self.expect(b']')?;
                    Ok(Generator::H { side, path, perm })
                } else {
                    self.expect(b'[')?;
                    self.hnn_body()
                }
            }
            Some(c) => Err(Error::parse(
                start,
                format!("unknown generator '{}'", c as char),
            )),
            None => Err(Error::parse(start, "unexpected end of input")),
        }
    }

    fn side(&mut self) -> Result<u8> {
        match self.peek() {
            Some(c @ (b'0' | b'1')) => {
                self.pos += 1;
                Ok(c - b'0')
            }
            _ => Err(Error::parse(self.pos, "expected side 0 or 1")),
        }
    }

    fn hnn_body(&mut self) -> Result<Generator> {
        let close = self.src[self.pos..]
            .iter()
            .position(|&c| c == b']')
            .map(|k| self.pos + k)
            .ok_or_else(|| Error::parse(self.pos, "unclosed '['"))?;
        let has_path = self.src[self.pos..close].contains(&b';');
        if !has_path {
            let perm = self.perm_until(b']')?;
            self.expect(b']')?;
            return Ok(Generator::Top { perm });
        }
        let mut steps = Vec::new();
        loop {
            self.expect(b'(')?;
            let i = self.index()?;
            self.expect(b',')?;
            let at = self.pos;
            let e = match self.integer()? {
                1 => 1i8,
                -1 => -1i8,
                _ => return Err(Error::parse(at, "step sign must be 1 or -1")),
            };
            self.expect(b')')?;
            steps.push((i, e));
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b';') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(Error::parse(self.pos, "expected ',' or ';'")),
            }
        }
        let perm = self.perm_until(b']')?;
        self.expect(b']')?;
        Ok(Generator::Path { steps, perm })
    }

    fn perm_until(&mut self, end: u8) -> Result<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c != end) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| Error::parse(start, "invalid utf-8"))?;
        normalize_perm(text).map_err(|e| Error::parse(start, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_amalgam_generators() {
        let w = parse_word("g0[(1 2)]").unwrap();
        assert_eq!(
            w,
            vec![Token::new(
                Generator::G {
                    side: 0,
                    perm: "(1 2)".into()
                },
                1
            )]
        );

        let w = parse_word("h0[1,2;(1 2)] * g1[(0 1 2)]^-1").unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(
            w[0].gen,
            Generator::H {
                side: 0,
                path: vec![1, 2],
                perm: "(1 2)".into()
            }
        );
        assert_eq!(w[1].power, -1);
    }

    #[test]
    fn parses_hnn_and_bs23_generators() {
        let w = parse_word("t^-1 * b^2 * t").unwrap();
        assert_eq!(
            w,
            vec![
                Token::new(Generator::T, -1),
                Token::new(Generator::B, 2),
                Token::new(Generator::T, 1)
            ]
        );
        let w = parse_word("h[(0 1)] h[(1,1),(0,-1);(2 3)]^3").unwrap();
        assert_eq!(
            w[0].gen,
            Generator::Top {
                perm: "(0 1)".into()
            }
        );
        assert_eq!(
            w[1],
            Token::new(
                Generator::Path {
                    steps: vec![(1, 1), (0, -1)],
                    perm: "(2 3)".into()
                },
                3
            )
        );
    }

    #[test]
    fn identity_and_whitespace() {
        assert!(parse_word("").unwrap().is_empty());
        assert!(parse_word("  1 ").unwrap().is_empty());
        assert_eq!(
            parse_word("g0[ ( 1  2 ) ]").unwrap(),
            parse_word("g0[(1 2)]").unwrap()
        );
        assert_eq!(print_word(&[]), "1");
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            parse_word("t * x"),
            Err(Error::Parse {
                pos: 4,
                msg: "unknown generator 'x'".into()
            })
        );
        assert!(matches!(
            parse_word("g2[()]"),
            Err(Error::Parse { pos: 1, .. })
        ));
        assert!(matches!(
            parse_word("h[(0,2);()]"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(parse_word("g0[(1 2)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_word("t^"), Err(Error::Parse { pos: 2, .. })));
    }

    #[test]
    fn tokens_serialize_as_tagged_objects() {
        let w = parse_word("h1[2;(0 1)]^-2 * t").unwrap();
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(
            json,
            r#"[{"gen":"h","side":1,"path":[2],"perm":"(0 1)","power":-2},{"gen":"t","power":1}]"#
        );
        let back: Vec<Token> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
    }

    fn arb_perm_text() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("()".to_string()),
            Just("(0 1)".to_string()),
            Just("(0 1 2)".to_string()),
            Just("(0 2)(1 3)".to_string()),
        ]
    }

    fn arb_token() -> impl Strategy<Value = Token> {
        let gen = prop_oneof![
            (0u8..2, arb_perm_text()).prop_map(|(side, perm)| Generator::G { side, perm }),
            (
                0u8..2,
                proptest::collection::vec(0u32..5, 1..4),
                arb_perm_text()
            )
                .prop_map(|(side, path, perm)| Generator::H { side, path, perm }),
            arb_perm_text().prop_map(|perm| Generator::Top { perm }),
            (
                proptest::collection::vec((0u32..4, prop_oneof![Just(1i8), Just(-1i8)]), 1..4),
                arb_perm_text()
            )
                .prop_map(|(steps, perm)| Generator::Path { steps, perm }),
            Just(Generator::T),
            Just(Generator::B),
        ];
        (gen, -4i64..5).prop_map(|(gen, power)| Token { gen, power })
    }

    proptest! {
        #[test]
        fn printer_round_trips(word in proptest::collection::vec(arb_token(), 0..6)) {
            prop_assert_eq!(parse_word(&print_word(&word)).unwrap(), word);
        }
    }
}
