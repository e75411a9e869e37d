use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;

/// Base field of all computations: the rationals or a prime field.
/// The prime is a runtime parameter; the rationals are the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Rationals,
    Prime(u64),
}

/// An exact field element. Arithmetic never rounds; division by zero is
/// rejected. Prime-field values are stored reduced, the modulus lives in the
/// surrounding [`Field`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Mod(u64),
}

impl Field {
    pub fn zero(&self) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::zero()),
            Field::Prime(_) => Scalar::Mod(0),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::one()),
            Field::Prime(_) => Scalar::Mod(1),
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            Field::Rationals => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            Field::Prime(p) => Scalar::Mod(n.rem_euclid(*p as i64) as u64),
        }
    }

    /// Builds `num/den`; the denominator must be invertible.
    pub fn from_ratio(&self, num: i64, den: i64) -> Scalar {
        assert!(den != 0, "zero denominator");
        match self {
            Field::Rationals => {
                Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
            Field::Prime(_) => {
                let d = self.from_i64(den);
                let inv = self.inv(&d).expect("denominator not invertible mod p");
                self.mul(&self.from_i64(num), &inv)
            }
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Field::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Field::Prime(p), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u128 + *y as u128) % *p as u128) as u64)
            }
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (Field::Rationals, Scalar::Rat(x)) => Scalar::Rat(-x),
            (Field::Prime(p), Scalar::Mod(x)) => Scalar::Mod(if *x == 0 { 0 } else { p - x }),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Field::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Field::Prime(p), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            _ => panic!("scalar/field mismatch"),
        }
    }

    /// Multiplicative inverse; `None` on zero.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return None;
        }
        match (self, a) {
            (Field::Rationals, Scalar::Rat(x)) => Scalar::Rat(x.recip()).into(),
            (Field::Prime(p), Scalar::Mod(x)) => Some(Scalar::Mod(mod_inverse(*x, *p))),
            _ => panic!("scalar/field mismatch"),
        }
    }

    pub fn div(&self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        self.inv(b).map(|binv| self.mul(a, &binv))
    }
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Mod(x) => *x == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(x) => x.is_one(),
            Scalar::Mod(x) => *x == 1,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(x) => Some(x),
            Scalar::Mod(_) => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(x) => {
                if x.denom().is_one() {
                    write!(f, "{}", x.numer())
                } else if x.is_negative() {
                    write!(f, "-{}/{}", x.numer().abs(), x.denom())
                } else {
                    write!(f, "{}/{}", x.numer(), x.denom())
                }
            }
            Scalar::Mod(x) => write!(f, "{x}"),
        }
    }
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p); p prime and a nonzero mod p
    let (mut r0, mut r1) = (a as i128, p as i128);
    let (mut t0, mut t1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert!(r0 == 1 || r0 == -1, "not invertible mod p");
    let mut t = t0 * r0.signum();
    t = t.rem_euclid(p as i128);
    t as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_exact() {
        let k = Field::Rationals;
        let a = k.from_ratio(1, 3);
        let b = k.from_ratio(1, 6);
        let s = k.add(&a, &b);
        assert_eq!(s, k.from_ratio(1, 2));
        assert_eq!(k.mul(&s, &k.from_i64(2)), k.one());
    }

    #[test]
    fn prime_field_inverse() {
        let k = Field::Prime(5);
        for x in 1..5 {
            let v = Scalar::Mod(x);
            let inv = k.inv(&v).unwrap();
            assert_eq!(k.mul(&v, &inv), k.one());
        }
        assert_eq!(k.inv(&k.zero()), None);
    }

    #[test]
    fn division_by_zero_is_rejected() {
        let k = Field::Rationals;
        assert_eq!(k.div(&k.one(), &k.zero()), None);
    }
}
