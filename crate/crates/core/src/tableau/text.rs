//! Plain-text tableau format.
//!
//! ```text
//! r s
//! <s rows of A_1>
//! ...
//! <s rows of A_r>
//! <b_1>
//! ...
//! <b_r>
//! ```
//!
//! Entries are whitespace separated (`1/2`, `0`, and for floating point
//! tableaus also decimals). Blank lines and `#` comments are ignored.

use std::fmt::Write as _;

use super::PrkTableau;
use crate::error::{Error, Result};
use crate::scalar::Coefficient;

pub fn parse_tableau<C: Coefficient>(text: &str) -> Result<PrkTableau<C>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty input".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse { line: hline, msg: "header must be `r s`".into() })?;
    let [r, s] = dims[..] else {
        return Err(Error::Parse { line: hline, msg: "header must be `r s`".into() });
    };

    let mut row = |what: &str| -> Result<Vec<C>> {
        let (line, l) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: format!("unexpected end of input while reading {what}"),
        })?;
        let vals = l
            .split_whitespace()
            .map(|t| {
                C::parse_coefficient(t).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("bad coefficient `{t}`"),
                })
            })
            .collect::<Result<Vec<C>>>()?;
        if vals.len() != s {
            return Err(Error::Parse {
                line,
                msg: format!("expected {s} entries in {what}, found {}", vals.len()),
            });
        }
        Ok(vals)
    };

    let mut a = Vec::with_capacity(r);
    for k in 0..r {
        let mut ak = Vec::with_capacity(s);
        for _ in 0..s {
            ak.push(row(&format!("A_{}", k + 1))?);
        }
        a.push(ak);
    }
    let mut b = Vec::with_capacity(r);
    for k in 0..r {
        b.push(row(&format!("b_{}", k + 1))?);
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse { line, msg: "trailing data".into() });
    }
    PrkTableau::new(a, b)
}

pub fn write_tableau<C: Coefficient>(t: &PrkTableau<C>) -> String {
    let mut out = String::new();
    let join = |v: &[C]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{} {}", t.parts(), t.stages());
    for k in 0..t.parts() {
        for row in t.a(k) {
            let _ = writeln!(out, "{}", join(row));
        }
    }
    for k in 0..t.parts() {
        let _ = writeln!(out, "{}", join(t.b(k)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{builtin_tableau, BUILTIN_NAMES};
    use num_rational::Rational64;

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let t = builtin_tableau(name).unwrap();
            let back: PrkTableau<Rational64> = parse_tableau(&write_tableau(&t)).unwrap();
            assert_eq!(t, back, "{name}");
        }
    }

    #[test]
    fn float_parse_accepts_decimals() {
        let t: PrkTableau<f64> = parse_tableau("1 2\n0 0\n0.5 0\n0 1\n").unwrap();
        assert_eq!(t.c(), &[0.0, 0.5]);
        assert_eq!(t.classical_order(), 2);
    }

    #[test]
    fn reports_line_of_bad_entry() {
        let err = parse_tableau::<Rational64>("1 2\n0 0\n1 x\n1/2 1/2\n").unwrap_err();
        assert_eq!(err, Error::Parse { line: 3, msg: "bad coefficient `x`".into() });
    }

    #[test]
    fn short_rows_and_trailing_data_are_rejected() {
        assert!(parse_tableau::<Rational64>("1 2\n0\n1 0\n1 0\n").is_err());
        assert!(parse_tableau::<Rational64>("1 1\n0\n1\n1\n").is_err());
        assert!(parse_tableau::<Rational64>("2\n").is_err());
    }
}
