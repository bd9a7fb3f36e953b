//! Text grammar for schemas.
//!
//! ```text
//! set := finite(n,...) | periodic(bits;bits) | not(set) | and(set,set)
//!      | or(set,set) | seeded(u64) | intervals(gen,...,even|odd)
//! gen := factorial | power,BASE | linear,STEP | table,0,B1,B2,...
//! ```
//!
//! `omega`, `evens`, `odds`, `empty` and `multiples(k)` are accepted as
//! shorthands; printing always uses the canonical forms above.

use super::{BoundaryGenerator, IntervalPartition, Parity, SetError, SetSchema};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("schema parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Canonical text of a boundary generator, as it appears inside
/// `intervals(..)`.
pub fn generator_text(g: &BoundaryGenerator) -> String {
    match g {
        BoundaryGenerator::Factorial => "factorial".into(),
        BoundaryGenerator::Power { base } => format!("power,{base}"),
        BoundaryGenerator::Linear { step } => format!("linear,{step}"),
        BoundaryGenerator::Table(t) => {
            let mut s = String::from("table");
            for b in t {
                s.push(',');
                s.push_str(&b.to_string());
            }
            s
        }
    }
}

pub(super) fn parse_schema(text: &str) -> Result<SetSchema, SetError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let s = p.set()?;
    p.ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input").into());
    }
    Ok(s)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { pos: self.pos, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn word(&mut self) -> String {
        self.ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        self.ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a natural number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| ParseError { pos: start, msg: "number out of range".into() })
    }

    /// Comma-separated naturals up to (not including) `close`.
    fn nat_list(&mut self, close: u8) -> Result<Vec<u64>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == Some(close) {
            return Ok(out);
        }
        loop {
            out.push(self.nat()?);
            if !self.eat(b',') {
                return Ok(out);
            }
        }
    }

    fn bit_list(&mut self, close: u8) -> Result<Vec<bool>, ParseError> {
        let start = self.pos;
        self.nat_list(close)?
            .into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(ParseError { pos: start, msg: "bits must be 0 or 1".into() }),
            })
            .collect()
    }

    fn set(&mut self) -> Result<SetSchema, SetError> {
        let at = self.pos;
        let name = self.word();
        let simple = match name.as_str() {
            "omega" => Some(SetSchema::omega()),
            "evens" => Some(SetSchema::evens()),
            "odds" => Some(SetSchema::odds()),
            "empty" => Some(SetSchema::empty()),
            _ => None,
        };
        if let Some(s) = simple {
            return Ok(s);
        }
        self.expect(b'(')?;
        let s = match name.as_str() {
            "finite" => SetSchema::finite(self.nat_list(b')')?),
            "periodic" => {
                let prefix = self.bit_list(b';')?;
                self.expect(b';')?;
                let period = self.bit_list(b')')?;
                SetSchema::periodic(prefix, period)?
            }
            "not" => self.set()?.complement(),
            "and" | "or" => {
                let a = self.set()?;
                self.expect(b',')?;
                let b = self.set()?;
                if name == "and" {
                    a.intersection(b)
                } else {
                    a.union(b)
                }
            }
            "seeded" => SetSchema::seeded(self.nat()?),
            "multiples" => {
                let k = self.nat()?;
                if k == 0 || k > super::MAX_COMBINED_PERIOD as u64 {
                    return Err(self.err("multiples needs 1 <= k <= 10^7").into());
                }
                SetSchema::multiples_of(k as usize)
            }
            "intervals" => self.intervals()?,
            "" => return Err(ParseError { pos: at, msg: "expected a set".into() }.into()),
            other => {
                return Err(ParseError { pos: at, msg: format!("unknown set form {other:?}") }.into())
            }
        };
        self.expect(b')')?;
        Ok(s)
    }

    fn intervals(&mut self) -> Result<SetSchema, SetError> {
        let at = self.pos;
        let gen_name = self.word();
        let mut args = Vec::new();
        let parity;
        loop {
            self.expect(b',')?;
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                args.push(self.nat()?);
            } else {
                parity = match self.word().as_str() {
                    "even" => Parity::Even,
                    "odd" => Parity::Odd,
                    _ => return Err(self.err("expected even or odd").into()),
                };
                break;
            }
        }
        let one = |args: &[u64]| match args {
            [v] => Ok(*v),
            _ => Err(ParseError { pos: at, msg: format!("{gen_name} takes one argument") }),
        };
        let generator = match gen_name.as_str() {
            "factorial" if args.is_empty() => BoundaryGenerator::Factorial,
            "power" => BoundaryGenerator::Power { base: one(&args)? },
            "linear" => BoundaryGenerator::Linear { step: one(&args)? },
            "table" => BoundaryGenerator::Table(args),
            _ => {
                return Err(ParseError { pos: at, msg: format!("bad generator {gen_name:?}") }.into())
            }
        };
        Ok(SetSchema::intervals(IntervalPartition::new(generator)?, parity))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(text: &str) -> String {
        text.parse::<SetSchema>().unwrap().to_string()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(round("finite( 7, 3 ,3)"), "finite(3,7)");
        assert_eq!(round("evens"), "periodic(;1,0)");
        assert_eq!(round("multiples(3)"), "periodic(;1,0,0)");
        assert_eq!(round("not(omega)"), "not(periodic(;1))");
        assert_eq!(round("and(evens,seeded(9))"), "and(periodic(;1,0),seeded(9))");
        assert_eq!(round("intervals(factorial,even)"), "intervals(factorial,even)");
        assert_eq!(round("intervals(power,3,odd)"), "intervals(power,3,odd)");
        assert_eq!(round("intervals(table,0,2,5,odd)"), "intervals(table,0,2,5,odd)");
        assert_eq!(round("finite()"), "finite()");
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "",
            "finite(1,",
            "periodic(1;)",
            "periodic(;2)",
            "nope(1)",
            "seeded(-1)",
            "and(evens)",
            "intervals(power,1,even)",
            "intervals(table,1,2,even)",
            "intervals(factorial,sideways)",
            "evens extra",
        ] {
            assert!(bad.parse::<SetSchema>().is_err(), "{bad:?} parsed");
        }
    }
}
