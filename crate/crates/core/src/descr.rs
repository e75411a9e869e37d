//! The text grammar for sheaves and spectrum descriptions, shared between
//! the library and the command line. Sheaf expressions:
//!
//! ```text
//! O(n)            line bundle
//! T(poly, m)      torsion sheaf at the monic irreducible poly in x
//! T(inf, m)       torsion sheaf at infinity
//! F ++ G          direct sum        (loosest)
//! F * G           tensor product    (binds tighter than ++)
//! twist(F, n)     twist
//! 0               zero sheaf
//! ```
//!
//! Polynomials use the variable `x` with integer or `a/b` rational
//! coefficients, e.g. `x^2+1` or `2x - 3/2`. Spectrum points are `LB(n)`,
//! `T(pt, m)`, `Prufer(pt)`, `Adic(pt)`, `Gen`; descriptions are
//! comma-separated items, with the families `LB(>=n)`, `LB(<=n)`, `LB(*)`,
//! `T(pt, *)`, `Prufer(*)`, `Adic(*)`. All input is whitespace-insensitive
//! and diagnostics carry byte offsets.

use crate::error::Result as CoreResult;
use crate::exactlinear::{Field, Ring, RingElem};
use crate::sheafp1::{
    line_bundle, tensor_sheaf, torsion_sheaf, twist, ClosedPoint, CoherentSheaf,
};
use crate::ziegler::{LbFamily, PointSetDescription, ZgPoint};
use std::fmt;

/// A parse diagnostic: byte offset into the input plus a message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diag {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for Diag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.offset, self.message)
    }
}

pub type ParseResult<T> = std::result::Result<T, Diag>;

/// Abstract sheaf expression; building a [`CoherentSheaf`] from it may still
/// fail mathematically (a reducible point, a zero length).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SheafExpr {
    Zero,
    LineBundle(i64),
    Torsion(PointExpr, u32),
    Sum(Box<SheafExpr>, Box<SheafExpr>),
    Tensor(Box<SheafExpr>, Box<SheafExpr>),
    Twist(Box<SheafExpr>, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointExpr {
    Infinity,
    Poly(RingElem),
}

impl fmt::Display for PointExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointExpr::Infinity => write!(f, "inf"),
            PointExpr::Poly(p) => write!(f, "{p}"),
        }
    }
}

impl fmt::Display for SheafExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SheafExpr::Zero => write!(f, "0"),
            SheafExpr::LineBundle(n) => write!(f, "O({n})"),
            SheafExpr::Torsion(p, m) => write!(f, "T({p}, {m})"),
            SheafExpr::Sum(a, b) => write!(f, "{a} ++ {b}"),
            SheafExpr::Tensor(a, b) => {
                let wrap = |e: &SheafExpr| matches!(e, SheafExpr::Sum(..));
                if wrap(a) {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, " * ")?;
                if wrap(b) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            SheafExpr::Twist(a, n) => write!(f, "twist({a}, {n})"),
        }
    }
}

impl SheafExpr {
    pub fn build(&self, field: Field) -> CoreResult<CoherentSheaf> {
        match self {
            SheafExpr::Zero => Ok(CoherentSheaf::zero(field)),
            SheafExpr::LineBundle(n) => Ok(line_bundle(field, *n)),
            SheafExpr::Torsion(p, m) => {
                let pt = p.resolve(field)?;
                torsion_sheaf(field, &pt, *m)
            }
            SheafExpr::Sum(a, b) => Ok(a.build(field)?.direct_sum(&b.build(field)?)),
            SheafExpr::Tensor(a, b) => tensor_sheaf(&a.build(field)?, &b.build(field)?),
            SheafExpr::Twist(a, n) => Ok(twist(&a.build(field)?, *n)),
        }
    }
}

impl PointExpr {
    pub fn resolve(&self, field: Field) -> CoreResult<ClosedPoint> {
        match self {
            PointExpr::Infinity => Ok(ClosedPoint::Infinity),
            PointExpr::Poly(p) => {
                assert_eq!(p.ring.field, field, "point parsed over a different field");
                ClosedPoint::finite(p.monic())
            }
        }
    }
}

struct Cursor<'a> {
    input: &'a str,
    pos: usize,
    field: Field,
}

impl<'a> Cursor<'a> {
    fn new(input: &'a str, field: Field) -> Self {
        Cursor { input, pos: 0, field }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len()
            && self.input.as_bytes()[self.pos].is_ascii_whitespace()
        {
            self.pos += 1;
        }
    }

    fn peek_raw(&self) -> Option<u8> {
        self.input.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.input[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> ParseResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn error(&self, message: impl Into<String>) -> Diag {
        Diag { offset: self.pos, message: message.into() }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.input.len()
    }

    fn integer(&mut self) -> ParseResult<i64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek_raw(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.peek_raw().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.input[start..self.pos]
            .parse()
            .map_err(|_| Diag { offset: start, message: "expected an integer".into() })
    }

    fn unsigned(&mut self) -> ParseResult<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.peek_raw().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        self.input[start..self.pos]
            .parse()
            .map_err(|_| Diag { offset: start, message: "expected a count".into() })
    }

    /// `a` or `a/b` rational coefficient.
    fn coefficient(&mut self, sign: i64) -> ParseResult<crate::exactlinear::Scalar> {
        let num = self.integer()?;
        if self.eat("/") {
            let start = self.pos;
            let den = self.integer()?;
            if den == 0 {
                return Err(Diag { offset: start, message: "zero denominator".into() });
            }
            Ok(self.field.from_ratio(sign * num, den))
        } else {
            Ok(self.field.from_i64(sign * num))
        }
    }

    /// Polynomial in `x`, read until a delimiter (`,` or `)`).
    fn polynomial(&mut self) -> ParseResult<RingElem> {
        let ring = Ring::poly_u(self.field);
        let mut out = RingElem::zero(ring);
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = if self.eat("-") {
                -1
            } else if self.eat("+") {
                1
            } else if first {
                1
            } else {
                break;
            };
            first = false;
            self.skip_ws();
            let coeff = if self.peek_raw().is_some_and(|c| c.is_ascii_digit()) {
                self.coefficient(sign)?
            } else {
                self.field.from_i64(sign)
            };
            let exp = if self.eat("x") {
                if self.eat("^") {
                    let e = self.integer()?;
                    if e < 0 {
                        return Err(self.error("negative exponent in a polynomial"));
                    }
                    e
                } else {
                    1
                }
            } else {
                0
            };
            out = out.add(&RingElem::monomial(ring, coeff, exp));
            self.skip_ws();
            if !matches!(self.peek_raw(), Some(b'+') | Some(b'-')) {
                break;
            }
        }
        if out.is_zero() && first {
            return Err(self.error("expected a polynomial"));
        }
        Ok(out)
    }

    fn point(&mut self) -> ParseResult<PointExpr> {
        if self.eat("inf") {
            return Ok(PointExpr::Infinity);
        }
        Ok(PointExpr::Poly(self.polynomial()?))
    }

    fn atom(&mut self) -> ParseResult<SheafExpr> {
        self.skip_ws();
        if self.eat("(") {
            let e = self.sum()?;
            self.expect(")")?;
            return Ok(e);
        }
        if self.eat("twist") {
            self.expect("(")?;
            let e = self.sum()?;
            self.expect(",")?;
            let n = self.integer()?;
            self.expect(")")?;
            return Ok(SheafExpr::Twist(Box::new(e), n));
        }
        if self.eat("O") {
            self.expect("(")?;
            let n = self.integer()?;
            self.expect(")")?;
            return Ok(SheafExpr::LineBundle(n));
        }
        if self.eat("T") {
            self.expect("(")?;
            let p = self.point()?;
            self.expect(",")?;
            let m = self.unsigned()?;
            self.expect(")")?;
            return Ok(SheafExpr::Torsion(p, m));
        }
        if self.eat("0") {
            return Ok(SheafExpr::Zero);
        }
        Err(self.error("expected a sheaf term: O(n), T(p, m), twist(F, n), 0 or parentheses"))
    }

    fn tensor(&mut self) -> ParseResult<SheafExpr> {
        let mut acc = self.atom()?;
        loop {
            self.skip_ws();
            // `*` is tensor; make sure this is not part of `++`
            if self.input[self.pos..].starts_with('*') {
                self.pos += 1;
                let rhs = self.atom()?;
                acc = SheafExpr::Tensor(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }

    fn sum(&mut self) -> ParseResult<SheafExpr> {
        let mut acc = self.tensor()?;
        loop {
            self.skip_ws();
            if self.input[self.pos..].starts_with("++") {
                self.pos += 2;
                let rhs = self.tensor()?;
                acc = SheafExpr::Sum(Box::new(acc), Box::new(rhs));
            } else {
                return Ok(acc);
            }
        }
    }
}

pub fn parse_sheaf_expr(input: &str, field: Field) -> ParseResult<SheafExpr> {
    let mut c = Cursor::new(input, field);
    let e = c.sum()?;
    if !c.at_end() {
        return Err(c.error("trailing input after sheaf expression"));
    }
    Ok(e)
}

pub fn parse_point(input: &str, field: Field) -> ParseResult<PointExpr> {
    let mut c = Cursor::new(input, field);
    let p = c.point()?;
    if !c.at_end() {
        return Err(c.error("trailing input after point"));
    }
    Ok(p)
}

/// An arrow chain `A -> B -> C`, optionally wrapped in leading and trailing
/// zero terms. Exactly three nonzero-position terms are required.
pub fn parse_chain(input: &str, field: Field) -> ParseResult<Vec<SheafExpr>> {
    let mut c = Cursor::new(input, field);
    let mut terms = vec![c.sum()?];
    loop {
        c.skip_ws();
        if c.input[c.pos..].starts_with("->") {
            c.pos += 2;
            terms.push(c.sum()?);
        } else {
            break;
        }
    }
    if !c.at_end() {
        return Err(c.error("trailing input after the arrow chain"));
    }
    // strip the optional bounding zeros
    if terms.len() == 5 {
        if terms[0] != SheafExpr::Zero || terms[4] != SheafExpr::Zero {
            return Err(Diag {
                offset: 0,
                message: "a five-term chain must start and end with 0".into(),
            });
        }
        terms = terms[1..4].to_vec();
    }
    if terms.len() != 3 {
        return Err(Diag {
            offset: 0,
            message: format!(
                "expected a three-term chain (optionally bounded by zeros), got {} terms",
                terms.len()
            ),
        });
    }
    Ok(terms)
}

/// A spectrum point.
pub fn parse_zg_point(input: &str, field: Field) -> ParseResult<ZgPoint> {
    let mut c = Cursor::new(input, field);
    let p = zg_point(&mut c)?;
    if !c.at_end() {
        return Err(c.error("trailing input after spectrum point"));
    }
    Ok(p)
}

fn zg_point(c: &mut Cursor) -> ParseResult<ZgPoint> {
    if c.eat("LB") {
        c.expect("(")?;
        let n = c.integer()?;
        c.expect(")")?;
        return Ok(ZgPoint::Lb(n));
    }
    if c.eat("T") {
        c.expect("(")?;
        let p = c.point()?;
        c.expect(",")?;
        let m = c.unsigned()?;
        c.expect(")")?;
        let pt = p.resolve(c.field).map_err(|e| c.error(e.to_string()))?;
        return Ok(ZgPoint::Tors(pt, m));
    }
    if c.eat("Prufer") {
        c.expect("(")?;
        let p = c.point()?;
        c.expect(")")?;
        let pt = p.resolve(c.field).map_err(|e| c.error(e.to_string()))?;
        return Ok(ZgPoint::Prufer(pt));
    }
    if c.eat("Adic") {
        c.expect("(")?;
        let p = c.point()?;
        c.expect(")")?;
        let pt = p.resolve(c.field).map_err(|e| c.error(e.to_string()))?;
        return Ok(ZgPoint::Adic(pt));
    }
    if c.eat("Gen") {
        return Ok(ZgPoint::Generic);
    }
    Err(c.error("expected a spectrum point: LB(n), T(pt,m), Prufer(pt), Adic(pt) or Gen"))
}

/// A comma-separated point-set description with the family shorthands.
pub fn parse_zg_description(input: &str, field: Field) -> ParseResult<PointSetDescription> {
    let mut c = Cursor::new(input, field);
    let mut desc = PointSetDescription::empty();
    let mut lb_finite = std::collections::BTreeSet::new();
    loop {
        c.skip_ws();
        if c.eat("LB") {
            c.expect("(")?;
            if c.eat(">=") {
                let n = c.integer()?;
                desc.lb_part = merge_lb(&desc.lb_part, &LbFamily::AllAtLeast(n), &lb_finite, &mut c)?;
            } else if c.eat("<=") {
                let n = c.integer()?;
                desc.lb_part = merge_lb(&desc.lb_part, &LbFamily::AllAtMost(n), &lb_finite, &mut c)?;
            } else if c.eat("*") {
                desc.lb_part = LbFamily::All;
            } else {
                let n = c.integer()?;
                lb_finite.insert(n);
            }
            c.expect(")")?;
        } else if c.eat("Prufer") {
            c.expect("(")?;
            if c.eat("*") {
                desc.prufer_points.union_all();
            } else {
                let p = c.point()?;
                let pt = p.resolve(field).map_err(|e| c.error(e.to_string()))?;
                desc.prufer_points.insert(pt);
            }
            c.expect(")")?;
        } else if c.eat("Adic") {
            c.expect("(")?;
            if c.eat("*") {
                desc.adic_points.union_all();
            } else {
                let p = c.point()?;
                let pt = p.resolve(field).map_err(|e| c.error(e.to_string()))?;
                desc.adic_points.insert(pt);
            }
            c.expect(")")?;
        } else if c.eat("T") {
            c.expect("(")?;
            let p = c.point()?;
            c.expect(",")?;
            let pt = p.resolve(field).map_err(|e| c.error(e.to_string()))?;
            if c.eat("*") {
                desc.tors_all_lengths.insert(pt);
            } else {
                let m = c.unsigned()?;
                desc.tors_finite.insert((pt, m));
            }
            c.expect(")")?;
        } else if c.eat("Gen") {
            desc.generic = true;
        } else {
            return Err(c.error("expected a description item"));
        }
        if !c.eat(",") {
            break;
        }
    }
    if !c.at_end() {
        return Err(c.error("trailing input after description"));
    }
    if matches!(desc.lb_part, LbFamily::FiniteSet(_)) && !lb_finite.is_empty() {
        desc.lb_part = LbFamily::FiniteSet(lb_finite);
    }
    desc.canonicalize();
    Ok(desc)
}

fn merge_lb(
    current: &LbFamily,
    incoming: &LbFamily,
    finite: &std::collections::BTreeSet<i64>,
    c: &mut Cursor,
) -> ParseResult<LbFamily> {
    if !finite.is_empty() {
        return Err(c.error("a line-bundle family cannot be mixed with single twists"));
    }
    match current {
        LbFamily::FiniteSet(s) if s.is_empty() => Ok(incoming.clone()),
        _ => Err(c.error("only one line-bundle family per description")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheafp1::decompose_sheaf;
    use crate::sheafp1::SheafLabel;

    fn q() -> Field {
        Field::Rationals
    }

    #[test]
    fn parses_the_worked_examples() {
        let e = parse_sheaf_expr("O(1) ++ T(x, 2)", q()).unwrap();
        assert_eq!(e.to_string(), "O(1) ++ T(x, 2)");
        let chain = parse_chain("0 -> O(0) -> O(1)++O(1) -> O(2)  -> 0", q()).unwrap();
        assert_eq!(chain.len(), 3);
        assert_eq!(chain[1].to_string(), "O(1) ++ O(1)");
        let p = parse_zg_description("LB(>=0)", q()).unwrap();
        assert!(!p.lb_part.bounded_above());
    }

    #[test]
    fn polynomial_coefficients() {
        let e = parse_sheaf_expr("T(x^2+1, 1)", q()).unwrap();
        let sheaf = e.build(q()).unwrap();
        assert_eq!(sheaf.chart_u.gens, 1);
        let rational = parse_sheaf_expr("T(x - 3/2, 1)", q()).unwrap();
        rational.build(q()).unwrap();
    }

    #[test]
    fn tensor_binds_tighter_than_sum() {
        let e = parse_sheaf_expr("O(1) ++ O(1) * O(2)", q()).unwrap();
        assert!(matches!(e, SheafExpr::Sum(_, _)));
        let built = e.build(q()).unwrap();
        let labels = decompose_sheaf(&built).unwrap();
        assert_eq!(labels.count(&SheafLabel::Lb(1)), 1);
        assert_eq!(labels.count(&SheafLabel::Lb(3)), 1);
    }

    #[test]
    fn diagnostics_carry_offsets() {
        let err = parse_sheaf_expr("O(1) ++ Q(2)", q()).unwrap_err();
        assert_eq!(err.offset, 8);
        let err = parse_sheaf_expr("O(1))", q()).unwrap_err();
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn print_parse_round_trip() {
        let inputs = [
            "O(-3)",
            "T(inf, 2)",
            "T(x^2+1, 1) ++ O(0)",
            "twist(O(1) ++ T(x, 1), -2)",
            "(O(1) ++ O(2)) * O(-1)",
            "0",
        ];
        for input in inputs {
            let e = parse_sheaf_expr(input, q()).unwrap();
            let printed = e.to_string();
            let reparsed = parse_sheaf_expr(&printed, q()).unwrap();
            assert_eq!(e, reparsed, "round trip failed for {input}");
        }
    }

    #[test]
    fn zg_points_and_families() {
        assert_eq!(parse_zg_point("Gen", q()).unwrap(), ZgPoint::Generic);
        assert!(matches!(parse_zg_point("LB(-2)", q()).unwrap(), ZgPoint::Lb(-2)));
        let d = parse_zg_description("T(x, *), Adic(inf), Gen", q()).unwrap();
        assert!(d.generic);
        assert!(!d.tors_all_lengths.is_empty());
        let reducible = parse_zg_description("T(x^2-1, 1)", q());
        assert!(reducible.is_err());
    }

    #[test]
    fn five_term_chains_must_be_zero_bounded() {
        assert!(parse_chain("O(1) -> O(2) -> O(3) -> O(4) -> 0", q()).is_err());
        assert!(parse_chain("0 -> T(x,1) -> T(x,2) -> T(x,1) -> 0", q()).is_ok());
    }
}
