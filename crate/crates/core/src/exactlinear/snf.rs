use super::matrix::RingMat;
use super::poly::{Ring, RingElem, RingId};
use super::scalar::Scalar;
use super::DEFAULT_DEGREE_BUDGET;
use crate::error::{Error, Result};

/// Smith normal form data: `u * m * v = s` with `s` diagonal, diagonal
/// entries monic with `d1 | d2 | ...` followed by zeros, and `u`, `v`
/// unimodular. The inverses of the transforms are accumulated alongside.
#[derive(Debug, Clone)]
pub struct Snf {
    pub s: RingMat,
    pub u: RingMat,
    pub u_inv: RingMat,
    pub v: RingMat,
    pub v_inv: RingMat,
}

impl Snf {
    /// Nonzero diagonal entries `d1 | d2 | ...` (units included).
    pub fn diagonal(&self) -> Vec<RingElem> {
        let n = self.s.rows().min(self.s.cols());
        (0..n).map(|i| self.s.at(i, i).clone()).filter(|d| !d.is_zero()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().len()
    }
}

struct Work {
    m: RingMat,
    u: RingMat,
    u_inv: RingMat,
    v: RingMat,
    v_inv: RingMat,
}

impl Work {
    fn new(m: RingMat) -> Self {
        let ring = m.ring;
        let (r, c) = (m.rows(), m.cols());
        Work {
            m,
            u: RingMat::identity(ring, r),
            u_inv: RingMat::identity(ring, r),
            v: RingMat::identity(ring, c),
            v_inv: RingMat::identity(ring, c),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.m.cols() {
            let (x, y) = (self.m.at(a, j).clone(), self.m.at(b, j).clone());
            *self.m.at_mut(a, j) = y;
            *self.m.at_mut(b, j) = x;
        }
        for j in 0..self.u.cols() {
            let (x, y) = (self.u.at(a, j).clone(), self.u.at(b, j).clone());
            *self.u.at_mut(a, j) = y;
            *self.u.at_mut(b, j) = x;
        }
        for i in 0..self.u_inv.rows() {
            let (x, y) = (self.u_inv.at(i, a).clone(), self.u_inv.at(i, b).clone());
            *self.u_inv.at_mut(i, a) = y;
            *self.u_inv.at_mut(i, b) = x;
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.m.rows() {
            let (x, y) = (self.m.at(i, a).clone(), self.m.at(i, b).clone());
            *self.m.at_mut(i, a) = y;
            *self.m.at_mut(i, b) = x;
        }
        for i in 0..self.v.rows() {
            let (x, y) = (self.v.at(i, a).clone(), self.v.at(i, b).clone());
            *self.v.at_mut(i, a) = y;
            *self.v.at_mut(i, b) = x;
        }
        for j in 0..self.v_inv.cols() {
            let (x, y) = (self.v_inv.at(a, j).clone(), self.v_inv.at(b, j).clone());
            *self.v_inv.at_mut(a, j) = y;
            *self.v_inv.at_mut(b, j) = x;
        }
    }

    /// row a += f * row b
    fn row_op(&mut self, a: usize, b: usize, f: &RingElem) {
        for j in 0..self.m.cols() {
            let t = self.m.at(a, j).add(&self.m.at(b, j).mul(f));
            *self.m.at_mut(a, j) = t;
        }
        for j in 0..self.u.cols() {
            let t = self.u.at(a, j).add(&self.u.at(b, j).mul(f));
            *self.u.at_mut(a, j) = t;
        }
        // u_inv := u_inv * E^-1 : col b -= f * col a
        for i in 0..self.u_inv.rows() {
            let t = self.u_inv.at(i, b).sub(&self.u_inv.at(i, a).mul(f));
            *self.u_inv.at_mut(i, b) = t;
        }
    }

    /// col a += f * col b
    fn col_op(&mut self, a: usize, b: usize, f: &RingElem) {
        for i in 0..self.m.rows() {
            let t = self.m.at(i, a).add(&self.m.at(i, b).mul(f));
            *self.m.at_mut(i, a) = t;
        }
        for i in 0..self.v.rows() {
            let t = self.v.at(i, a).add(&self.v.at(i, b).mul(f));
            *self.v.at_mut(i, a) = t;
        }
        // v_inv := E^-1 * v_inv : row b -= f * row a
        for j in 0..self.v_inv.cols() {
            let t = self.v_inv.at(b, j).sub(&self.v_inv.at(a, j).mul(f));
            *self.v_inv.at_mut(b, j) = t;
        }
    }

    /// Scales row `a` by a unit.
    fn scale_row(&mut self, a: usize, unit: &RingElem, unit_inv: &RingElem) {
        for j in 0..self.m.cols() {
            let t = self.m.at(a, j).mul(unit);
            *self.m.at_mut(a, j) = t;
        }
        for j in 0..self.u.cols() {
            let t = self.u.at(a, j).mul(unit);
            *self.u.at_mut(a, j) = t;
        }
        for i in 0..self.u_inv.rows() {
            let t = self.u_inv.at(i, a).mul(unit_inv);
            *self.u_inv.at_mut(i, a) = t;
        }
    }

    /// Scales column `a` by a unit.
    fn scale_col(&mut self, a: usize, unit: &RingElem, unit_inv: &RingElem) {
        for i in 0..self.m.rows() {
            let t = self.m.at(i, a).mul(unit);
            *self.m.at_mut(i, a) = t;
        }
        for i in 0..self.v.rows() {
            let t = self.v.at(i, a).mul(unit);
            *self.v.at_mut(i, a) = t;
        }
        for j in 0..self.v_inv.cols() {
            let t = self.v_inv.at(a, j).mul(unit_inv);
            *self.v_inv.at_mut(a, j) = t;
        }
    }

    fn max_span(&self) -> i64 {
        self.m
            .max_degree_span()
            .max(self.u.max_degree_span())
            .max(self.v.max_degree_span())
    }
}

/// Smith normal form with the default degree budget.
pub fn smith_normal_form(m: &RingMat) -> Result<Snf> {
    smith_normal_form_with_budget(m, DEFAULT_DEGREE_BUDGET)
}

/// Smith normal form over any of the three coordinate rings. Laurent
/// matrices are first cleared of denominators column by column (a unimodular
/// rescaling) and the diagonal is normalized to canonical associates.
pub fn smith_normal_form_with_budget(m: &RingMat, budget: i64) -> Result<Snf> {
    let ring = m.ring;
    let mut w = Work::new(m.clone());

    if ring.is_laurent() {
        // clear denominators: multiply each column by the minimal power of x
        // (a unit) lifting every entry into the polynomial subring
        let one = ring.field.one();
        for j in 0..w.m.cols() {
            let min_low = (0..w.m.rows())
                .filter_map(|i| w.m.at(i, j).low_degree())
                .min()
                .unwrap_or(0);
            if min_low < 0 {
                let unit = RingElem::monomial(ring, one.clone(), -min_low);
                let unit_inv = RingElem::monomial(ring, one.clone(), min_low);
                w.scale_col(j, &unit, &unit_inv);
            }
        }
    }

    diagonalize(&mut w, budget)?;
    normalize_diagonal(&mut w);

    // divisibility chain sanity; stripping Laurent unit powers preserves it
    let n = w.m.rows().min(w.m.cols());
    for i in 1..n {
        let (prev, cur) = (w.m.at(i - 1, i - 1), w.m.at(i, i));
        if !cur.is_zero() {
            debug_assert!(
                divides(prev, cur),
                "divisibility chain broken: {prev} does not divide {cur}"
            );
        }
    }

    Ok(Snf { s: w.m, u: w.u, u_inv: w.u_inv, v: w.v, v_inv: w.v_inv })
}

fn poly_view(e: &RingElem) -> RingElem {
    // entries are polynomial in x by the time this is called
    if e.ring.id == RingId::Laurent {
        e.cast(Ring { id: RingId::PolyU, field: e.ring.field })
    } else {
        e.clone()
    }
}

fn divides(a: &RingElem, b: &RingElem) -> bool {
    if a.is_zero() {
        return b.is_zero();
    }
    if a.ring.is_laurent() {
        return poly_view(&b.monic()).div_exact(&poly_view(&a.monic())).is_some();
    }
    b.div_exact(a).is_some()
}

fn diagonalize(w: &mut Work, budget: i64) -> Result<()> {
    let ring = w.m.ring;
    let rows = w.m.rows();
    let cols = w.m.cols();
    let mut n = 0;
    while n < rows && n < cols {
        let span = w.max_span();
        if span > budget {
            return Err(Error::DegreeBudgetExceeded { budget, reached: span });
        }

        // pivot: nonzero entry of minimal degree in the remaining block
        let mut pivot: Option<(usize, usize, i64)> = None;
        for i in n..rows {
            for j in n..cols {
                if let Some(d) = w.m.at(i, j).degree() {
                    let span = d - w.m.at(i, j).low_degree().unwrap();
                    if pivot.is_none() || span < pivot.unwrap().2 {
                        pivot = Some((i, j, span));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = pivot else { break };
        w.swap_rows(n, pi);
        w.swap_cols(n, pj);

        let mut cleared = false;
        while !cleared {
            cleared = true;
            let pivot_poly = poly_view(&w.m.at(n, n).monic());
            // clear the pivot row by column operations
            for j in n + 1..cols {
                if w.m.at(n, j).is_zero() {
                    continue;
                }
                let target = poly_view(&w.m.at(n, j).monic());
                let (q, r) = target.div_rem(&pivot_poly)?;
                let q_full = rebuild_quotient(w.m.at(n, j), w.m.at(n, n), &q, ring);
                w.col_op(j, n, &q_full.neg());
                if !r.is_zero() {
                    w.swap_cols(n, j);
                    cleared = false;
                    break;
                }
            }
            if !cleared {
                continue;
            }
            let pivot_poly = poly_view(&w.m.at(n, n).monic());
            for i in n + 1..rows {
                if w.m.at(i, n).is_zero() {
                    continue;
                }
                let target = poly_view(&w.m.at(i, n).monic());
                let (q, r) = target.div_rem(&pivot_poly)?;
                let q_full = rebuild_quotient(w.m.at(i, n), w.m.at(n, n), &q, ring);
                w.row_op(i, n, &q_full.neg());
                if !r.is_zero() {
                    w.swap_rows(n, i);
                    cleared = false;
                    break;
                }
            }
            if !cleared {
                continue;
            }
            // pivot must divide the remaining block to keep the chain
            'search: for i in n + 1..rows {
                for j in n + 1..cols {
                    if !w.m.at(i, j).is_zero() && !divides(w.m.at(n, n), w.m.at(i, j)) {
                        let one = RingElem::one(ring);
                        w.row_op(n, i, &one);
                        cleared = false;
                        break 'search;
                    }
                }
            }
        }
        n += 1;
    }
    Ok(())
}

/// Reconstructs the true ring quotient from the monic-normalized division
/// `target_monic = q * pivot_monic + r`: the column/row operation must use
/// `lead(target)/lead(pivot) * x^(shift) * q` so that subtracting
/// `q_full * pivot` reproduces the remainder up to a unit.
fn rebuild_quotient(target: &RingElem, pivot: &RingElem, q: &RingElem, ring: Ring) -> RingElem {
    let field = ring.field;
    let t_unit = unit_part(target);
    let p_unit = unit_part(pivot);
    let scale = field.div(&t_unit.0, &p_unit.0).unwrap();
    let shift = t_unit.1 - p_unit.1;
    let q_cast = q.cast(ring);
    q_cast.mul_monomial(&scale, shift)
}

/// Decomposes `e = c * x^a * monic(e)`; returns `(c, a)`.
fn unit_part(e: &RingElem) -> (Scalar, i64) {
    assert!(!e.is_zero());
    if e.ring.is_laurent() {
        (e.leading_coeff(), e.low_degree().unwrap())
    } else {
        (e.leading_coeff(), 0)
    }
}

fn normalize_diagonal(w: &mut Work) {
    let ring = w.m.ring;
    let field = ring.field;
    let n = w.m.rows().min(w.m.cols());
    for i in 0..n {
        let d = w.m.at(i, i).clone();
        if d.is_zero() {
            continue;
        }
        let (c, a) = unit_part(&d);
        let c_inv = field.inv(&c).unwrap();
        let unit = RingElem::monomial(ring, c_inv.clone(), -a);
        let unit_inv = RingElem::monomial(ring, c, a);
        if !unit.is_one() {
            w.scale_row(i, &unit, &unit_inv);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinear::Field;

    fn qx() -> Ring {
        Ring::poly_u(Field::Rationals)
    }

    fn check(m: &RingMat) -> Snf {
        let snf = smith_normal_form(m).unwrap();
        // re-multiplied exactly
        assert_eq!(snf.u.mul(m).mul(&snf.v), snf.s, "u*m*v != s");
        assert_eq!(
            snf.u.mul(&snf.u_inv),
            RingMat::identity(m.ring, m.rows()),
            "u_inv wrong"
        );
        assert_eq!(
            snf.v.mul(&snf.v_inv),
            RingMat::identity(m.ring, m.cols()),
            "v_inv wrong"
        );
        // diagonal shape and chain
        for i in 0..snf.s.rows() {
            for j in 0..snf.s.cols() {
                if i != j {
                    assert!(snf.s.at(i, j).is_zero(), "off-diagonal garbage");
                }
            }
        }
        let diag = snf.diagonal();
        for pair in diag.windows(2) {
            assert!(divides(&pair[0], &pair[1]), "chain broken");
        }
        snf
    }

    #[test]
    fn already_diagonal_1x1() {
        let r = qx();
        let x2 = RingElem::variable(r).pow(2);
        let m = RingMat::from_rows(r, vec![vec![x2.clone()]]);
        let snf = check(&m);
        assert_eq!(snf.diagonal(), vec![x2]);
        assert!(snf.u.at(0, 0).is_one());
        assert!(snf.v.at(0, 0).is_one());
    }

    #[test]
    fn permutes_to_divisibility_order() {
        let r = qx();
        let x = RingElem::variable(r);
        let m = RingMat::from_rows(
            r,
            vec![
                vec![x.clone(), RingElem::zero(r)],
                vec![RingElem::zero(r), RingElem::one(r)],
            ],
        );
        let snf = check(&m);
        assert_eq!(snf.diagonal(), vec![RingElem::one(r), x]);
    }

    #[test]
    fn laurent_units_are_cleared() {
        let l = Ring::laurent(Field::Rationals);
        let f = Field::Rationals;
        // [x^-1, x^-2(x-1)] column-cleared then diagonalized
        let m = RingMat::from_rows(
            l,
            vec![vec![
                RingElem::monomial(l, f.one(), -1),
                RingElem::from_coeffs(l, [(-1, f.from_i64(1)), (-2, f.from_i64(-1))]),
            ]],
        );
        let snf = check(&m);
        assert_eq!(snf.diagonal(), vec![RingElem::one(l)]);
    }

    #[test]
    fn random_matrices_over_f5_match_minor_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let r = Ring::poly_u(Field::Prime(5));
        for _ in 0..25 {
            let m = RingMat::from_fn(r, 3, 3, |_, _| {
                RingElem::from_coeffs(
                    r,
                    (0..=2).map(|e| (e, r.field.from_i64(rng.gen_range(0..5)))),
                )
            });
            let snf = check(&m);
            // det(S) is an associate of det(m)
            let dm = m.det().unwrap().monic();
            let ds = snf.s.det().unwrap().monic();
            assert_eq!(dm, ds);
        }
    }
}
