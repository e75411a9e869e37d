//! Irreducible factorization of univariate polynomials over the base
//! fields: squarefree/distinct-degree/equal-degree splitting over a prime
//! field, and squarefree decomposition plus Hensel lifting with subset
//! recombination over the rationals.

use super::poly::{Ring, RingElem};
use super::scalar::{Field, Scalar};
use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

/// Monic irreducible factors with multiplicities, sorted canonically. The
/// unit part (leading coefficient, and a power of the variable for Laurent
/// input) is dropped; for Laurent input the factor `x` never appears.
pub fn irreducible_factors(f: &RingElem) -> Result<Vec<(RingElem, u32)>> {
    if f.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let laurent = f.ring.is_laurent();
    // a Laurent canonical associate has nonnegative exponents and nonzero
    // constant term, so it factors in the polynomial subring
    let poly_ring = if laurent {
        Ring { id: super::poly::RingId::PolyU, field: f.ring.field }
    } else {
        f.ring
    };
    let g = f.monic().cast(poly_ring);
    if g.is_one() {
        return Ok(Vec::new());
    }
    let factors = match f.ring.field {
        Field::Prime(p) => factor_mod_p(&g, p)?,
        Field::Rationals => factor_rational(&g)?,
    };
    let mut out: Vec<(RingElem, u32)> =
        factors.into_iter().map(|(h, m)| (h.cast(f.ring), m)).collect();
    out.sort();
    Ok(out)
}

pub fn is_irreducible(f: &RingElem) -> Result<bool> {
    if f.is_zero() || f.monic().is_one() {
        return Ok(false);
    }
    if f.degree() == f.low_degree() {
        // single monomial: irreducible only when it is an associate of the variable
        return Ok(!f.ring.is_laurent() && f.degree() == Some(1));
    }
    let factors = irreducible_factors(f)?;
    Ok(factors.len() == 1 && factors[0].1 == 1)
}

/// Product of the distinct irreducible factors (the squarefree part).
pub fn factor_squarefree_part(f: &RingElem) -> Result<RingElem> {
    let mut acc = RingElem::one(f.ring);
    for (g, _) in irreducible_factors(f)? {
        acc = acc.mul(&g);
    }
    Ok(acc)
}

// ---------------------------------------------------------------- mod p ---

/// Dense coefficient vector, index = exponent, trimmed, over Z/p.
type FpPoly = Vec<u64>;

struct Fp {
    p: u64,
}

impl Fp {
    fn trim(&self, mut f: FpPoly) -> FpPoly {
        while f.last() == Some(&0) {
            f.pop();
        }
        f
    }

    fn deg(&self, f: &FpPoly) -> i64 {
        f.len() as i64 - 1
    }

    fn is_one(&self, f: &FpPoly) -> bool {
        f.len() == 1 && f[0] == 1
    }

    fn add(&self, a: &FpPoly, b: &FpPoly) -> FpPoly {
        let n = a.len().max(b.len());
        let mut out = vec![0; n];
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0) as u128;
            let y = b.get(i).copied().unwrap_or(0) as u128;
            out[i] = ((x + y) % self.p as u128) as u64;
        }
        self.trim(out)
    }

    fn sub(&self, a: &FpPoly, b: &FpPoly) -> FpPoly {
        let n = a.len().max(b.len());
        let mut out = vec![0; n];
        for i in 0..n {
            let x = a.get(i).copied().unwrap_or(0) as i128;
            let y = b.get(i).copied().unwrap_or(0) as i128;
            out[i] = (x - y).rem_euclid(self.p as i128) as u64;
        }
        self.trim(out)
    }

    fn mul(&self, a: &FpPoly, b: &FpPoly) -> FpPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = (out[i + j] as u128 + *x as u128 * *y as u128) % self.p as u128;
                out[i + j] = t as u64;
            }
        }
        self.trim(out)
    }

    fn inv_scalar(&self, a: u64) -> u64 {
        let (mut r0, mut r1) = (a as i128, self.p as i128);
        let (mut t0, mut t1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        (t0 * r0.signum()).rem_euclid(self.p as i128) as u64
    }

    fn monic(&self, f: &FpPoly) -> FpPoly {
        match f.last() {
            None | Some(1) => f.clone(),
            Some(lc) => {
                let inv = self.inv_scalar(*lc) as u128;
                self.trim(f.iter().map(|c| ((*c as u128 * inv) % self.p as u128) as u64).collect())
            }
        }
    }

    fn div_rem(&self, a: &FpPoly, b: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!b.is_empty(), "division by zero");
        let mut rem = a.clone();
        let db = self.deg(b);
        let lc_inv = self.inv_scalar(*b.last().unwrap());
        let mut quo = vec![0u64; a.len().saturating_sub(b.len()) + 1];
        while self.deg(&rem) >= db && !rem.is_empty() {
            let shift = (self.deg(&rem) - db) as usize;
            let c = ((*rem.last().unwrap() as u128 * lc_inv as u128) % self.p as u128) as u64;
            quo[shift] = c;
            let mut sub = vec![0u64; shift];
            sub.extend(b.iter().map(|x| ((*x as u128 * c as u128) % self.p as u128) as u64));
            rem = self.sub(&rem, &sub);
        }
        (self.trim(quo), rem)
    }

    fn gcd(&self, a: &FpPoly, b: &FpPoly) -> FpPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_empty() {
            let (_, r) = self.div_rem(&x, &y);
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    fn derivative(&self, f: &FpPoly) -> FpPoly {
        if f.len() <= 1 {
            return Vec::new();
        }
        self.trim(
            (1..f.len())
                .map(|i| ((f[i] as u128 * (i as u128 % self.p as u128)) % self.p as u128) as u64)
                .collect(),
        )
    }

    fn pow_mod(&self, base: &FpPoly, mut e: u128, m: &FpPoly) -> FpPoly {
        let mut acc = vec![1u64];
        let mut b = self.div_rem(base, m).1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.div_rem(&self.mul(&acc, &b), m).1;
            }
            b = self.div_rem(&self.mul(&b, &b), m).1;
            e >>= 1;
        }
        acc
    }
}

fn factor_mod_p(f: &RingElem, p: u64) -> Result<Vec<(RingElem, u32)>> {
    let ring = f.ring;
    let fp = Fp { p };
    let dense = to_dense_fp(f);
    let mut out = Vec::new();
    for (sf, mult) in squarefree_mod_p(&fp, &dense) {
        for (df, d) in distinct_degree(&fp, &sf) {
            for irr in equal_degree(&fp, &df, d) {
                out.push((from_dense_fp(ring, &irr), mult));
            }
        }
    }
    Ok(out)
}

fn to_dense_fp(f: &RingElem) -> FpPoly {
    let d = f.degree().unwrap_or(0);
    let low = f.low_degree().unwrap_or(0);
    assert!(low >= 0, "factor input must be polynomial after normalization");
    let mut out = vec![0u64; (d + 1) as usize];
    for (e, c) in f.terms() {
        if let Scalar::Mod(v) = c {
            out[*e as usize] = *v;
        } else {
            panic!("field mismatch");
        }
    }
    out
}

fn from_dense_fp(ring: Ring, f: &FpPoly) -> RingElem {
    RingElem::from_coeffs(
        ring,
        f.iter().enumerate().filter(|(_, c)| **c != 0).map(|(e, c)| (e as i64, Scalar::Mod(*c))),
    )
}

fn squarefree_mod_p(fp: &Fp, f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let mut out: Vec<(FpPoly, u32)> = Vec::new();
    let f = fp.monic(f);
    if fp.deg(&f) < 1 {
        return out;
    }
    let fd = fp.derivative(&f);
    if fd.is_empty() {
        // f = g(x^p); over the prime field the p-th root keeps coefficients
        let root: FpPoly =
            (0..f.len()).step_by(fp.p as usize).map(|i| f[i]).collect();
        for (g, m) in squarefree_mod_p(fp, &fp.trim(root)) {
            out.push((g, m * fp.p as u32));
        }
        return out;
    }
    let mut c = fp.gcd(&f, &fd);
    let mut w = fp.div_rem(&f, &c).0;
    let mut i = 1u32;
    while !fp.is_one(&w) {
        let y = fp.gcd(&w, &c);
        let z = fp.div_rem(&w, &y).0;
        if !fp.is_one(&z) {
            out.push((z, i));
        }
        i += 1;
        w = y;
        c = fp.div_rem(&c, &w).0;
    }
    if !fp.is_one(&c) {
        let root: FpPoly = (0..c.len()).step_by(fp.p as usize).map(|i| c[i]).collect();
        for (g, m) in squarefree_mod_p(fp, &fp.trim(root)) {
            out.push((g, m * fp.p as u32));
        }
    }
    out
}

fn distinct_degree(fp: &Fp, f: &FpPoly) -> Vec<(FpPoly, i64)> {
    let mut out = Vec::new();
    let mut g = f.clone();
    let x: FpPoly = vec![0, 1];
    let mut h = fp.div_rem(&x, &g).1;
    let mut d = 0i64;
    while fp.deg(&g) >= 2 * (d + 1) {
        d += 1;
        h = fp.pow_mod(&h, fp.p as u128, &g);
        let gd = fp.gcd(&g, &fp.sub(&h, &x));
        if !fp.is_one(&gd) {
            out.push((gd.clone(), d));
            g = fp.div_rem(&g, &gd).0;
            h = fp.div_rem(&h, &g).1;
        }
    }
    if fp.deg(&g) > 0 {
        out.push((g.clone(), fp.deg(&g)));
    }
    out
}

/// Cantor–Zassenhaus equal-degree splitting, deterministic via an LCG seeded
/// from the input coefficients so repeated runs agree.
fn equal_degree(fp: &Fp, f: &FpPoly, d: i64) -> Vec<FpPoly> {
    if fp.deg(f) == d {
        return vec![fp.monic(f)];
    }
    let mut seed: u64 = 0x9e3779b97f4a7c15;
    for c in f {
        seed = seed.wrapping_mul(0x100000001b3).wrapping_add(*c);
    }
    loop {
        let a = random_poly(fp, fp.deg(f) as usize, &mut seed);
        if fp.deg(&a) < 1 {
            continue;
        }
        let b = if fp.p % 2 == 1 {
            let e = (fp.p as u128).pow(d as u32) / 2; // (p^d - 1)/2 for odd p
            let t = fp.pow_mod(&a, e, f);
            fp.sub(&t, &[1].to_vec())
        } else {
            // trace map for characteristic two
            let mut acc = fp.div_rem(&a, f).1;
            let mut t = acc.clone();
            for _ in 1..d {
                t = fp.pow_mod(&t, 2, f);
                acc = fp.add(&acc, &t);
            }
            acc
        };
        let g = fp.gcd(&b, f);
        if fp.deg(&g) > 0 && fp.deg(&g) < fp.deg(f) {
            let rest = fp.div_rem(f, &g).0;
            let mut out = equal_degree(fp, &g, d);
            out.extend(equal_degree(fp, &rest, d));
            return out;
        }
    }
}

fn random_poly(fp: &Fp, deg_bound: usize, seed: &mut u64) -> FpPoly {
    let mut out = Vec::with_capacity(deg_bound);
    for _ in 0..deg_bound {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        out.push((*seed >> 16) % fp.p);
    }
    fp.trim(out)
}

// ------------------------------------------------------------ rationals ---

type ZPoly = Vec<BigInt>;

fn z_trim(mut f: ZPoly) -> ZPoly {
    while f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

fn z_deg(f: &ZPoly) -> i64 {
    f.len() as i64 - 1
}

fn z_mul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    z_trim(out)
}

/// Division in Z[x] by a monic divisor.
fn z_div_rem_monic(a: &ZPoly, b: &ZPoly) -> (ZPoly, ZPoly) {
    assert!(b.last().is_some_and(|c| c.is_one()), "divisor must be monic");
    let mut rem = a.clone();
    let db = z_deg(b);
    let mut quo = vec![BigInt::zero(); a.len().saturating_sub(b.len()) + 1];
    while z_deg(&rem) >= db {
        let shift = (z_deg(&rem) - db) as usize;
        let c = rem.last().unwrap().clone();
        quo[shift] = c.clone();
        for (i, bc) in b.iter().enumerate() {
            rem[shift + i] -= &c * bc;
        }
        rem = z_trim(rem);
    }
    (z_trim(quo), rem)
}

fn content(f: &ZPoly) -> BigInt {
    f.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c))
}

fn primitive_part(f: &ZPoly) -> ZPoly {
    let c = content(f);
    if c.is_zero() || c.is_one() {
        return f.clone();
    }
    f.iter().map(|x| x / &c).collect()
}

fn factor_rational(f: &RingElem) -> Result<Vec<(RingElem, u32)>> {
    let ring = f.ring;
    // squarefree decomposition over Q by repeated gcd with the derivative
    let mut parts: Vec<(RingElem, u32)> = Vec::new();
    let mut rest = f.monic();
    let mut mult = 1u32;
    // rest = prod of factors with multiplicity >= mult
    loop {
        if rest.is_one() {
            break;
        }
        let g = rest.gcd(&rest.derivative())?;
        let squarefree = rest.div_exact(&g).expect("gcd divides");
        // squarefree carries each distinct factor of `rest` exactly once
        parts.push((squarefree, mult));
        mult += 1;
        rest = g;
    }
    // convert "at least" counts into exact multiplicities
    let mut exact: Vec<(RingElem, u32)> = Vec::new();
    for i in 0..parts.len() {
        let next = parts.get(i + 1).map(|p| p.0.clone()).unwrap_or_else(|| RingElem::one(ring));
        let only_here = parts[i].0.div_exact(&next).expect("nested squarefree parts divide");
        if !only_here.is_one() {
            for irr in factor_squarefree_rational(&only_here)? {
                exact.push((irr, parts[i].1));
            }
        }
    }
    Ok(exact)
}

/// Zassenhaus on a squarefree monic rational polynomial.
fn factor_squarefree_rational(f: &RingElem) -> Result<Vec<RingElem>> {
    let ring = f.ring;
    if f.degree() == Some(1) || f.degree() == Some(0) {
        return Ok(if f.is_one() { vec![] } else { vec![f.clone()] });
    }
    // clear denominators, then monicize over Z via y = lc * x
    let denom_lcm = f
        .terms()
        .map(|(_, c)| c.as_rational().unwrap().denom().clone())
        .fold(BigInt::one(), |acc, d| acc.lcm(&d));
    let int_poly: ZPoly = {
        let d = f.degree().unwrap() as usize;
        let mut out = vec![BigInt::zero(); d + 1];
        for (e, c) in f.terms() {
            let r = c.as_rational().unwrap();
            out[*e as usize] = r.numer() * (&denom_lcm / r.denom());
        }
        z_trim(out)
    };
    let prim = primitive_part(&int_poly);
    let lc = prim.last().unwrap().clone();
    let monic_z: ZPoly = if lc.is_one() {
        prim.clone()
    } else {
        // g(x) = lc^(n-1) f(x/lc) is monic with integer coefficients:
        // coefficient i picks up lc^(n-1-i), the top coefficient becomes 1
        let n = z_deg(&prim) as usize;
        let mut out: ZPoly = (0..n)
            .map(|i| &prim[i] * lc.pow((n - 1 - i) as u32))
            .collect();
        out.push(BigInt::one());
        out
    };

    let monic_factors = zassenhaus_monic(&monic_z)?;
    let lc_rat = BigRational::from_integer(lc);
    let out = monic_factors
        .into_iter()
        .map(|w| {
            // undo the substitution: factor of f is monic(w(lc * x))
            RingElem::from_coeffs(
                ring,
                w.iter().enumerate().map(|(e, c)| {
                    (
                        e as i64,
                        Scalar::Rat(BigRational::from_integer(c.clone()) * lc_rat.pow(e as i32)),
                    )
                }),
            )
            .monic()
        })
        .collect();
    Ok(out)
}

/// Factors a squarefree monic integer polynomial into monic irreducibles.
fn zassenhaus_monic(f: &ZPoly) -> Result<Vec<ZPoly>> {
    let n = z_deg(f);
    if n <= 1 {
        return Ok(vec![f.clone()]);
    }
    // prime keeping f squarefree
    let primes: [u64; 12] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    let mut chosen = None;
    'outer: for p in primes {
        let fp = Fp { p };
        let dense: FpPoly = f.iter().map(|c| big_mod(c, p)).collect();
        let dense = fp.trim(dense);
        if z_deg(f) != fp.deg(&dense) {
            continue; // leading coefficient vanished (cannot happen, monic)
        }
        let der = fp.derivative(&dense);
        if der.is_empty() {
            continue 'outer;
        }
        if fp.is_one(&fp.gcd(&dense, &der)) {
            chosen = Some((p, dense));
            break;
        }
    }
    let Some((p, dense)) = chosen else {
        return Err(Error::Internal("no squarefree reduction prime found".into()));
    };
    let fp = Fp { p };
    let mut modular: Vec<FpPoly> = Vec::new();
    for (g, d) in distinct_degree(&fp, &fp.monic(&dense)) {
        modular.extend(equal_degree(&fp, &g, d));
    }
    if modular.len() == 1 {
        return Ok(vec![f.clone()]);
    }

    // lift to p^k beyond twice the factor coefficient bound
    let height = f.iter().map(|c| c.abs()).max().unwrap();
    let bound: BigInt = (BigInt::from(n + 1)) * (BigInt::one() << (n as usize + 1)) * height;
    let mut pk = BigInt::from(p);
    let mut k = 1u32;
    while pk < BigInt::from(2) * &bound {
        pk *= p;
        k += 1;
    }
    let lifted = hensel_lift_tree(f, &modular, p, k);

    // subset recombination
    let modulus = BigInt::from(p).pow(k);
    let mut pool: Vec<ZPoly> = lifted;
    let mut remaining = f.clone();
    let mut out = Vec::new();
    let mut size = 1usize;
    while 2 * size <= pool.len() {
        let mut found = None;
        for combo in combinations(pool.len(), size) {
            let mut cand: ZPoly = vec![BigInt::one()];
            for i in &combo {
                cand = z_mul(&cand, &pool[*i]);
                cand = cand.iter().map(|c| balanced_mod(c, &modulus)).collect();
            }
            let (q, r) = z_div_rem_monic(&remaining, &cand);
            if r.is_empty() {
                found = Some((combo, cand, q));
                break;
            }
        }
        match found {
            Some((combo, cand, q)) => {
                out.push(cand);
                remaining = q;
                let keep: Vec<ZPoly> = pool
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !combo.contains(i))
                    .map(|(_, g)| g.clone())
                    .collect();
                pool = keep;
            }
            None => size += 1,
        }
    }
    if z_deg(&remaining) > 0 {
        out.push(remaining);
    }
    Ok(out)
}

fn big_mod(c: &BigInt, p: u64) -> u64 {
    let m = c.mod_floor(&BigInt::from(p));
    m.to_u64_digits().1.first().copied().unwrap_or(0)
}

fn balanced_mod(c: &BigInt, m: &BigInt) -> BigInt {
    let r = c.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Lifts the factorization `f = prod(parts) mod p` to `mod p^k`, all monic.
fn hensel_lift_tree(f: &ZPoly, parts: &[FpPoly], p: u64, k: u32) -> Vec<ZPoly> {
    if parts.len() == 1 {
        let modulus = BigInt::from(p).pow(k);
        return vec![f.iter().map(|c| balanced_mod(c, &modulus)).collect()];
    }
    let fp = Fp { p };
    let mid = parts.len() / 2;
    let (ls, rs) = parts.split_at(mid);
    let mut g: FpPoly = vec![1];
    for part in ls {
        g = fp.mul(&g, part);
    }
    let mut h: FpPoly = vec![1];
    for part in rs {
        h = fp.mul(&h, part);
    }
    let (s, t) = fp_bezout(&fp, &g, &h);
    let (g_lift, h_lift) = hensel_pair(f, &g, &h, &s, &t, p, k);
    let mut out = hensel_lift_tree(&g_lift, ls, p, k);
    out.extend(hensel_lift_tree(&h_lift, rs, p, k));
    out
}

/// `s * g + t * h = 1 mod p` for coprime monic g, h.
fn fp_bezout(fp: &Fp, g: &FpPoly, h: &FpPoly) -> (FpPoly, FpPoly) {
    let (mut r0, mut r1) = (g.clone(), h.clone());
    let (mut s0, mut s1): (FpPoly, FpPoly) = (vec![1], vec![]);
    let (mut t0, mut t1): (FpPoly, FpPoly) = (vec![], vec![1]);
    while !r1.is_empty() {
        let (q, r) = fp.div_rem(&r0, &r1);
        let ns = fp.sub(&s0, &fp.mul(&q, &s1));
        let nt = fp.sub(&t0, &fp.mul(&q, &t1));
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, ns);
        (t0, t1) = (t1, nt);
    }
    // r0 = gcd = nonzero constant
    let c = r0[0];
    let inv = fp.inv_scalar(c);
    let scale = |f: &FpPoly| {
        fp.trim(f.iter().map(|x| ((*x as u128 * inv as u128) % fp.p as u128) as u64).collect())
    };
    (scale(&s0), scale(&t0))
}

/// Quadratic Hensel lifting of `f = g * h` from mod p to mod p^k (monic).
fn hensel_pair(
    f: &ZPoly,
    g0: &FpPoly,
    h0: &FpPoly,
    s0: &FpPoly,
    t0: &FpPoly,
    p: u64,
    k: u32,
) -> (ZPoly, ZPoly) {
    let to_z = |f: &FpPoly| -> ZPoly { f.iter().map(|c| BigInt::from(*c)).collect() };
    let mut g: ZPoly = to_z(g0);
    let mut h: ZPoly = to_z(h0);
    let mut s: ZPoly = to_z(s0);
    let mut t: ZPoly = to_z(t0);
    let target = BigInt::from(p).pow(k);
    let mut m = BigInt::from(p);
    while m < target {
        let m2 = (&m * &m).min(target.clone());
        let red = |f: &ZPoly| -> ZPoly { z_trim(f.iter().map(|c| balanced_mod(c, &m2)).collect()) };
        // e = f - g h
        let e = red(&z_sub(f, &z_mul(&g, &h)));
        let se = red(&z_mul(&s, &e));
        let (q, r) = z_div_rem_monic(&se, &h);
        let g_new = red(&z_add(&z_add(&g, &z_mul(&t, &e)), &z_mul(&q, &g)));
        let h_new = red(&z_add(&h, &r));
        // refresh the Bezout pair
        let b = red(&z_sub(&z_add(&z_mul(&s, &g_new), &z_mul(&t, &h_new)), &[BigInt::one()].to_vec()));
        let sb = red(&z_mul(&s, &b));
        let (c, d) = z_div_rem_monic(&sb, &h_new);
        let s_new = red(&z_sub(&s, &d));
        let t_new = red(&z_sub(&z_sub(&t, &z_mul(&t, &b)), &z_mul(&c, &g_new)));
        g = g_new;
        h = h_new;
        s = s_new;
        t = t_new;
        m = m2;
    }
    (g, h)
}

fn z_add(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let n = a.len().max(b.len());
    z_trim(
        (0..n)
            .map(|i| {
                a.get(i).cloned().unwrap_or_else(BigInt::zero)
                    + b.get(i).cloned().unwrap_or_else(BigInt::zero)
            })
            .collect(),
    )
}

fn z_sub(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let n = a.len().max(b.len());
    z_trim(
        (0..n)
            .map(|i| {
                a.get(i).cloned().unwrap_or_else(BigInt::zero)
                    - b.get(i).cloned().unwrap_or_else(BigInt::zero)
            })
            .collect(),
    )
}
