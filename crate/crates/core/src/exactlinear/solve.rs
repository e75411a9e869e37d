use super::matrix::RingMat;
use super::poly::{Ring, RingElem, RingId};
use super::snf::{smith_normal_form_with_budget, Snf};
use super::DEFAULT_DEGREE_BUDGET;
use crate::error::{Error, Result};

/// Solution of `a * x = b` over the coordinate ring: one particular solution
/// together with a basis of the homogeneous solution module (which is free).
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub particular: RingMat,
    pub homogeneous: Vec<Vec<RingElem>>,
}

pub fn solve_linear(a: &RingMat, b: &RingMat) -> Result<Option<LinearSolution>> {
    solve_linear_with_budget(a, b, DEFAULT_DEGREE_BUDGET)
}

/// Certified exact solving via Smith normal form: every returned `x`
/// satisfies `a * x = b` on the nose, and `None` is only returned when the
/// diagonalized system exhibits a non-divisible or inconsistent row.
pub fn solve_linear_with_budget(
    a: &RingMat,
    b: &RingMat,
    budget: i64,
) -> Result<Option<LinearSolution>> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "coefficient matrix has {} rows, right-hand side {}",
            a.rows(),
            b.rows()
        )));
    }
    if a.ring != b.ring {
        return Err(Error::RingMismatch(format!("{} vs {}", a.ring.id, b.ring.id)));
    }
    let ring = a.ring;
    let snf = smith_normal_form_with_budget(a, budget)?;
    let c = snf.u.mul(b);
    let rank = snf.rank();

    let mut y = RingMat::zeros(ring, a.cols(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let rhs = c.at(i, j);
            if i < rank {
                let d = snf.s.at(i, i);
                match ring_divide(rhs, d) {
                    Some(q) => *y.at_mut(i, j) = q,
                    None => return Ok(None),
                }
            } else if !rhs.is_zero() {
                return Ok(None);
            }
        }
    }
    let particular = snf.v.mul(&y);
    let homogeneous = kernel_from_snf(&snf);
    Ok(Some(LinearSolution { particular, homogeneous }))
}

/// Basis of the right kernel of `a` as a free module over the ring.
pub fn kernel_basis(a: &RingMat) -> Result<Vec<Vec<RingElem>>> {
    let snf = smith_normal_form_with_budget(a, DEFAULT_DEGREE_BUDGET)?;
    Ok(kernel_from_snf(&snf))
}

fn kernel_from_snf(snf: &Snf) -> Vec<Vec<RingElem>> {
    let rank = snf.rank();
    (rank..snf.v.cols()).map(|j| snf.v.column(j)).collect()
}

/// Exact ring division `b / a`. Over the Laurent ring units of the form
/// `c * x^n` are divided out first.
pub fn ring_divide(b: &RingElem, a: &RingElem) -> Option<RingElem> {
    if a.is_zero() {
        return None;
    }
    if b.is_zero() {
        return Some(RingElem::zero(b.ring));
    }
    if !b.ring.is_laurent() {
        return b.div_exact(a);
    }
    let field = b.ring.field;
    let poly = Ring { id: RingId::PolyU, field };
    let (b_low, a_low) = (b.low_degree().unwrap(), a.low_degree().unwrap());
    let b_shift = b.mul_monomial(&field.one(), -b_low).cast(poly);
    let a_shift = a.mul_monomial(&field.one(), -a_low).cast(poly);
    let q = b_shift.div_exact(&a_shift)?;
    Some(q.cast(b.ring).mul_monomial(&field.one(), b_low - a_low))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinear::{Field, Scalar};

    fn qx() -> Ring {
        Ring::poly_u(Field::Rationals)
    }

    fn elem(r: Ring, coeffs: &[i64]) -> RingElem {
        RingElem::from_int_coeffs(r, coeffs)
    }

    #[test]
    fn solves_x_times_unknown_equals_x_cubed() {
        let r = qx();
        let a = RingMat::from_rows(r, vec![vec![RingElem::variable(r)]]);
        let b = RingMat::from_rows(r, vec![vec![RingElem::variable(r).pow(3)]]);
        let sol = solve_linear(&a, &b).unwrap().unwrap();
        assert_eq!(*sol.particular.at(0, 0), RingElem::variable(r).pow(2));
        assert!(sol.homogeneous.is_empty());
    }

    #[test]
    fn one_is_not_in_the_ideal_x() {
        let r = qx();
        let a = RingMat::from_rows(r, vec![vec![RingElem::variable(r)]]);
        let b = RingMat::from_rows(r, vec![vec![RingElem::one(r)]]);
        assert!(solve_linear(&a, &b).unwrap().is_none());
    }

    #[test]
    fn x_is_invertible_in_the_laurent_ring() {
        let l = Ring::laurent(Field::Rationals);
        let a = RingMat::from_rows(l, vec![vec![RingElem::variable(l)]]);
        let b = RingMat::from_rows(l, vec![vec![RingElem::one(l)]]);
        let sol = solve_linear(&a, &b).unwrap().unwrap();
        assert_eq!(
            *sol.particular.at(0, 0),
            RingElem::monomial(l, Field::Rationals.one(), -1)
        );
    }

    #[test]
    fn substitution_reproduces_rhs_on_random_solvable_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for field in [Field::Rationals, Field::Prime(5)] {
            let r = Ring::poly_u(field);
            for _ in 0..20 {
                let a = RingMat::from_fn(r, 3, 2, |_, _| {
                    RingElem::from_coeffs(
                        r,
                        (0..=1).map(|e| {
                            (
                                e,
                                match field {
                                    Field::Rationals => field.from_i64(rng.gen_range(-2..=2)),
                                    Field::Prime(p) => {
                                        Scalar::Mod(rng.gen_range(0..p))
                                    }
                                },
                            )
                        }),
                    )
                });
                let x0 = RingMat::from_fn(r, 2, 1, |_, _| {
                    RingElem::from_int_coeffs(r, &[rng.gen_range(-2..=2), rng.gen_range(-2..=2)])
                });
                let b = a.mul(&x0);
                let sol = solve_linear(&a, &b).unwrap().expect("built to be solvable");
                assert_eq!(a.mul(&sol.particular), b);
                for h in &sol.homogeneous {
                    assert!(a.mul_vec(h).iter().all(|e| e.is_zero()));
                }
            }
        }
    }

    #[test]
    fn kernel_is_exact() {
        let r = qx();
        // a = [x, x^2]: kernel generated by (x, -1) up to unit
        let a = RingMat::from_rows(r, vec![vec![elem(r, &[0, 1]), elem(r, &[0, 0, 1])]]);
        let ker = kernel_basis(&a).unwrap();
        assert_eq!(ker.len(), 1);
        assert!(a.mul_vec(&ker[0]).iter().all(|e| e.is_zero()));
        assert!(!ker[0].iter().all(|e| e.is_zero()));
    }
}
