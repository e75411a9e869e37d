use super::scalar::{Field, Scalar};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// The three coordinate rings of the two-chart cover: `PolyU = k[x]`,
/// `PolyV = k[y]` and `Laurent = k[x, x^-1]`. `PolyV` is a separate tag, not
/// an alias of `PolyU`, so chart provenance is never lost; the `y -> x^-1`
/// substitution happens only at base change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RingId {
    PolyU,
    PolyV,
    Laurent,
}

/// A coordinate ring together with its base field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ring {
    pub id: RingId,
    pub field: Field,
}

impl Ring {
    pub fn poly_u(field: Field) -> Self {
        Ring { id: RingId::PolyU, field }
    }

    pub fn poly_v(field: Field) -> Self {
        Ring { id: RingId::PolyV, field }
    }

    pub fn laurent(field: Field) -> Self {
        Ring { id: RingId::Laurent, field }
    }

    pub fn is_laurent(&self) -> bool {
        self.id == RingId::Laurent
    }

    pub fn var_symbol(&self) -> char {
        match self.id {
            RingId::PolyU | RingId::Laurent => 'x',
            RingId::PolyV => 'y',
        }
    }
}

impl fmt::Display for RingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingId::PolyU => write!(f, "k[x]"),
            RingId::PolyV => write!(f, "k[y]"),
            RingId::Laurent => write!(f, "k[x,x^-1]"),
        }
    }
}

/// A ring element as a finite exponent-to-coefficient map. No zero
/// coefficients are stored; polynomial rings only carry nonnegative
/// exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingElem {
    pub ring: Ring,
    coeffs: BTreeMap<i64, Scalar>,
}

impl RingElem {
    pub fn zero(ring: Ring) -> Self {
        RingElem { ring, coeffs: BTreeMap::new() }
    }

    pub fn one(ring: Ring) -> Self {
        Self::monomial(ring, ring.field.one(), 0)
    }

    pub fn constant(ring: Ring, c: Scalar) -> Self {
        Self::monomial(ring, c, 0)
    }

    pub fn monomial(ring: Ring, c: Scalar, exp: i64) -> Self {
        assert!(ring.is_laurent() || exp >= 0, "negative exponent in polynomial ring");
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        RingElem { ring, coeffs }
    }

    pub fn variable(ring: Ring) -> Self {
        Self::monomial(ring, ring.field.one(), 1)
    }

    /// Builds from `(exponent, coefficient)` pairs, dropping zeros.
    pub fn from_coeffs(ring: Ring, pairs: impl IntoIterator<Item = (i64, Scalar)>) -> Self {
        let mut out = Self::zero(ring);
        for (e, c) in pairs {
            out.add_term(e, c);
        }
        out
    }

    /// Convenience: dense coefficients `c0 + c1 x + ...` from integers.
    pub fn from_int_coeffs(ring: Ring, coeffs: &[i64]) -> Self {
        Self::from_coeffs(
            ring,
            coeffs.iter().enumerate().map(|(e, c)| (e as i64, ring.field.from_i64(*c))),
        )
    }

    fn add_term(&mut self, exp: i64, c: Scalar) {
        assert!(self.ring.is_laurent() || exp >= 0, "negative exponent in polynomial ring");
        if c.is_zero() {
            return;
        }
        let field = self.ring.field;
        match self.coeffs.remove(&exp) {
            None => {
                self.coeffs.insert(exp, c);
            }
            Some(old) => {
                let s = field.add(&old, &c);
                if !s.is_zero() {
                    self.coeffs.insert(exp, s);
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    /// Degree of the highest term; `None` for the zero element.
    pub fn degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Exponent of the lowest term; `None` for the zero element.
    pub fn low_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Largest absolute exponent, used by degree-budget guards.
    pub fn degree_span(&self) -> i64 {
        self.coeffs.keys().map(|e| e.abs()).max().unwrap_or(0)
    }

    pub fn coeff(&self, exp: i64) -> Scalar {
        self.coeffs.get(&exp).cloned().unwrap_or_else(|| self.ring.field.zero())
    }

    pub fn leading_coeff(&self) -> Scalar {
        match self.degree() {
            Some(d) => self.coeff(d),
            None => self.ring.field.zero(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Scalar)> {
        self.coeffs.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring, "ring mismatch");
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let field = self.ring.field;
        RingElem {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, field.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring, "ring mismatch");
        let field = self.ring.field;
        let mut out = Self::zero(self.ring);
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                out.add_term(e1 + e2, field.mul(c1, c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let field = self.ring.field;
        if c.is_zero() {
            return Self::zero(self.ring);
        }
        RingElem {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|(e, k)| (*e, field.mul(k, c))).collect(),
        }
    }

    pub fn mul_monomial(&self, c: &Scalar, exp: i64) -> Self {
        if c.is_zero() {
            return Self::zero(self.ring);
        }
        let field = self.ring.field;
        RingElem {
            ring: self.ring,
            coeffs: self.coeffs.iter().map(|(e, k)| (*e + exp, field.mul(k, c))).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.ring);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Whether the element is a unit of its ring: a nonzero constant, or for
    /// the Laurent ring a nonzero monomial.
    pub fn is_unit(&self) -> bool {
        match self.coeffs.len() {
            1 => {
                let e = *self.coeffs.keys().next().unwrap();
                e == 0 || self.ring.is_laurent()
            }
            _ => false,
        }
    }

    /// Euclidean division in `k[x]` or `k[y]`: returns `(q, r)` with
    /// `self = q * div + r` and `deg r < deg div`.
    pub fn div_rem(&self, div: &Self) -> Result<(Self, Self)> {
        assert_eq!(self.ring, other_ring_check(self, div)?, "ring mismatch");
        if self.ring.is_laurent() {
            return Err(Error::UnsupportedRing("euclidean division over the Laurent ring".into()));
        }
        if div.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let field = self.ring.field;
        let dd = div.degree().unwrap();
        let lc_inv = field.inv(&div.leading_coeff()).unwrap();
        let mut rem = self.clone();
        let mut quo = Self::zero(self.ring);
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = field.mul(&rem.coeff(rd), &lc_inv);
            let shift = rd - dd;
            quo.add_term(shift, c.clone());
            rem = rem.sub(&div.mul_monomial(&c, shift));
        }
        Ok((quo, rem))
    }

    /// Exact division; `None` when the remainder is nonzero.
    pub fn div_exact(&self, div: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(div).ok()?;
        r.is_zero().then_some(q)
    }

    /// Monic gcd in `k[x]` or `k[y]`; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a.monic())
    }

    /// Canonical associate. In a polynomial ring this is the monic rescaling;
    /// in the Laurent ring also the power of the variable is stripped so the
    /// result has a nonzero constant term.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let field = self.ring.field;
        let shifted = if self.ring.is_laurent() {
            self.mul_monomial(&field.one(), -self.low_degree().unwrap())
        } else {
            self.clone()
        };
        let lc_inv = field.inv(&shifted.leading_coeff()).unwrap();
        shifted.scale(&lc_inv)
    }

    pub fn derivative(&self) -> Self {
        let field = self.ring.field;
        Self::from_coeffs(
            self.ring,
            self.coeffs
                .iter()
                .filter(|(e, _)| **e != 0)
                .map(|(e, c)| (*e - 1, field.mul(c, &field.from_i64(*e)))),
        )
    }

    pub fn eval(&self, at: &Scalar) -> Scalar {
        let field = self.ring.field;
        let mut acc = field.zero();
        // Horner over the nonnegative part; negative exponents need a unit.
        let mut last: Option<i64> = None;
        for (e, c) in self.coeffs.iter().rev() {
            assert!(*e >= 0, "eval with negative exponents unsupported");
            if let Some(prev) = last {
                for _ in 0..(prev - e) {
                    acc = field.mul(&acc, at);
                }
            }
            acc = field.add(&acc, c);
            last = Some(*e);
        }
        if let Some(e) = last {
            for _ in 0..e {
                acc = field.mul(&acc, at);
            }
        }
        acc
    }

    /// Reinterprets the element in another ring with the same variable
    /// behaviour (exponents are preserved).
    pub fn cast(&self, ring: Ring) -> Self {
        assert_eq!(self.ring.field, ring.field, "field mismatch in cast");
        assert!(
            ring.is_laurent() || self.coeffs.keys().all(|e| *e >= 0),
            "negative exponents cannot enter a polynomial ring"
        );
        RingElem { ring, coeffs: self.coeffs.clone() }
    }

    /// The substitution `var -> var^-1`, landing in the Laurent ring. This is
    /// how `k[y]` elements are base-changed to the overlap chart.
    pub fn substitute_inverse(&self, laurent: Ring) -> Self {
        assert!(laurent.is_laurent());
        assert_eq!(self.ring.field, laurent.field);
        RingElem {
            ring: laurent,
            coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// The monic reciprocal `p^(y) = y^(deg p) p(1/y)` rescaled monic,
    /// reinterpreted in the target polynomial ring. Requires `p(0) != 0`.
    pub fn reciprocal(&self, target: Ring) -> Self {
        assert!(!self.is_zero() && !self.coeff(0).is_zero(), "reciprocal needs p(0) != 0");
        let d = self.degree().unwrap();
        let flipped = RingElem {
            ring: target,
            coeffs: self.coeffs.iter().map(|(e, c)| (d - e, c.clone())).collect(),
        };
        flipped.monic()
    }
}

fn other_ring_check(a: &RingElem, b: &RingElem) -> Result<Ring> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch(format!("{} vs {}", a.ring.id, b.ring.id)));
    }
    Ok(a.ring)
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let var = self.ring.var_symbol();
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            let cs = c.to_string();
            let (sign, mag) = match cs.strip_prefix('-') {
                Some(rest) => ("-", rest.to_string()),
                None => ("+", cs),
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            match (*e, mag.as_str()) {
                (0, m) => write!(f, "{m}")?,
                (1, "1") => write!(f, "{var}")?,
                (1, m) => write!(f, "{m}{var}")?,
                (exp, "1") => write!(f, "{var}^{exp}")?,
                (exp, m) => write!(f, "{m}{var}^{exp}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qx() -> Ring {
        Ring::poly_u(Field::Rationals)
    }

    #[test]
    fn div_rem_roundtrip() {
        let r = qx();
        let f = RingElem::from_int_coeffs(r, &[1, 0, 2, 1]); // x^3 + 2x^2 + 1
        let g = RingElem::from_int_coeffs(r, &[-1, 1]); // x - 1
        let (q, rem) = f.div_rem(&g).unwrap();
        assert_eq!(q.mul(&g).add(&rem), f);
        assert!(rem.degree().unwrap_or(-1) < g.degree().unwrap());
    }

    #[test]
    fn gcd_is_monic() {
        let r = qx();
        let f = RingElem::from_int_coeffs(r, &[0, 2]); // 2x
        let g = RingElem::from_int_coeffs(r, &[0, 0, 3]); // 3x^2
        let d = f.gcd(&g).unwrap();
        assert_eq!(d, RingElem::variable(r));
    }

    #[test]
    fn laurent_monic_strips_units() {
        let l = Ring::laurent(Field::Rationals);
        // 2 x^-3 (x - 1) = 2x^-2 - 2x^-3
        let f = RingElem::from_coeffs(
            l,
            [(-2, Field::Rationals.from_i64(2)), (-3, Field::Rationals.from_i64(-2))],
        );
        let m = f.monic();
        assert_eq!(m, RingElem::from_int_coeffs(l, &[-1, 1]));
    }

    #[test]
    fn reciprocal_of_x_minus_one() {
        let u = qx();
        let v = Ring::poly_v(Field::Rationals);
        let p = RingElem::from_int_coeffs(u, &[-1, 1]); // x - 1
        let rec = p.reciprocal(v);
        assert_eq!(rec, RingElem::from_int_coeffs(v, &[-1, 1])); // y - 1
    }

    #[test]
    fn display_reads_naturally() {
        let r = qx();
        let f = RingElem::from_int_coeffs(r, &[1, -2, 1]);
        assert_eq!(f.to_string(), "x^2 - 2x + 1");
    }
}
