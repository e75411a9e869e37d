//! Deterministic pseudo-random generators backing the randomized suites:
//! labelled sheaves, random chart re-presentations and random unimodular
//! transforms. Everything is driven by a caller-provided seeded generator so
//! failures replay from the seed.

use crate::error::Result;
use crate::exactlinear::{Field, Ring, RingElem, RingMat};
use crate::fpmod::FpModule;
use crate::sheafp1::{sheaf_of_labels, ClosedPoint, CoherentSheaf, LabelMultiset, SheafLabel};
use rand::Rng;

/// Closed points used by the random suites; the quadratic point is chosen
/// irreducible over the requested field.
pub fn point_pool(field: Field) -> Vec<ClosedPoint> {
    let ring = Ring::poly_u(field);
    let lin = |c: i64| ClosedPoint::finite(RingElem::from_int_coeffs(ring, &[c, 1])).unwrap();
    let quad = match field {
        // x^2 + 1 is irreducible over the rationals, x^2 + 2 over F_5
        Field::Rationals => RingElem::from_int_coeffs(ring, &[1, 0, 1]),
        Field::Prime(_) => RingElem::from_int_coeffs(ring, &[2, 0, 1]),
    };
    let mut pool = vec![lin(0), lin(-1), lin(1), ClosedPoint::Infinity];
    if let Ok(pt) = ClosedPoint::finite(quad) {
        pool.push(pt);
    }
    pool
}

pub fn random_label(field: Field, rng: &mut impl Rng) -> SheafLabel {
    if rng.gen_bool(0.5) {
        SheafLabel::Lb(rng.gen_range(-3..=3))
    } else {
        let pool = point_pool(field);
        let pt = pool[rng.gen_range(0..pool.len())].clone();
        SheafLabel::Tors(pt, rng.gen_range(1..=2))
    }
}

/// A random multiset of labels with at most `max_summands` entries.
pub fn random_labels(
    field: Field,
    rng: &mut impl Rng,
    max_summands: usize,
) -> LabelMultiset {
    let n = rng.gen_range(1..=max_summands);
    LabelMultiset::from_labels((0..n).map(|_| random_label(field, rng)))
}

/// A random coherent sheaf together with its construction labels; the
/// presentation is scrambled so decomposition has work to do.
pub fn random_sheaf(
    field: Field,
    rng: &mut impl Rng,
    max_summands: usize,
) -> Result<(CoherentSheaf, LabelMultiset)> {
    let labels = random_labels(field, rng, max_summands);
    let plain = sheaf_of_labels(field, &labels)?;
    let scrambled = re_present(&plain, rng)?;
    Ok((scrambled, labels))
}

fn random_scalar_elem(ring: Ring, rng: &mut impl Rng) -> RingElem {
    let c = match ring.field {
        Field::Rationals => ring.field.from_i64(rng.gen_range(-2i64..=2)),
        Field::Prime(p) => crate::exactlinear::Scalar::Mod(rng.gen_range(0..p)),
    };
    // mostly constant shears: repeated degree-one shears blow up the data
    // degree and with it every cohomology window downstream
    let deg = if rng.gen_bool(0.25) { 1 } else { 0 };
    RingElem::monomial(ring, c, deg)
}

/// A random unimodular matrix built from elementary shears and swaps,
/// returned with its inverse.
pub fn random_unimodular(ring: Ring, n: usize, rng: &mut impl Rng) -> (RingMat, RingMat) {
    let mut t = RingMat::identity(ring, n);
    let mut t_inv = RingMat::identity(ring, n);
    if n < 2 {
        return (t, t_inv);
    }
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let c = random_scalar_elem(ring, rng);
        // t := E t with E adding c * row j to row i; t_inv := t_inv E^-1
        for col in 0..n {
            let v = t.at(i, col).add(&t.at(j, col).mul(&c));
            *t.at_mut(i, col) = v;
        }
        for row in 0..n {
            let v = t_inv.at(row, j).sub(&t_inv.at(row, i).mul(&c));
            *t_inv.at_mut(row, j) = v;
        }
    }
    (t, t_inv)
}

/// Conjugates both chart presentations by random unimodular transforms and
/// mixes relation columns; the glue is transported accordingly, so the
/// result is isomorphic to the input but presented differently.
pub fn re_present(f: &CoherentSheaf, rng: &mut impl Rng) -> Result<CoherentSheaf> {
    let laurent = Ring::laurent(f.field());

    let (tu, tu_inv) = random_unimodular(f.chart_u.ring, f.chart_u.gens, rng);
    let (tv, tv_inv) = random_unimodular(f.chart_v.ring, f.chart_v.gens, rng);
    let (su, _) = random_unimodular(f.chart_u.ring, f.chart_u.relations.cols(), rng);
    let (sv, _) = random_unimodular(f.chart_v.ring, f.chart_v.relations.cols(), rng);

    let chart_u = FpModule::new(
        f.chart_u.ring,
        f.chart_u.gens,
        tu.mul(&f.chart_u.relations).mul(&su),
    )?;
    let chart_v = FpModule::new(
        f.chart_v.ring,
        f.chart_v.gens,
        tv.mul(&f.chart_v.relations).mul(&sv),
    )?;

    let tu_l = crate::fpmod::base_change_matrix(&tu, laurent);
    let tu_inv_l = crate::fpmod::base_change_matrix(&tu_inv, laurent);
    let tv_l = crate::fpmod::base_change_matrix(&tv, laurent);
    let tv_inv_l = crate::fpmod::base_change_matrix(&tv_inv, laurent);
    let glue_u_to_v = tv_l.mul(&f.glue_u_to_v).mul(&tu_inv_l);
    let glue_v_to_u = tu_l.mul(&f.glue_v_to_u).mul(&tv_inv_l);

    CoherentSheaf::new(chart_u, chart_v, glue_u_to_v, glue_v_to_u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn re_presented_sheaves_still_certify() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let (f, labels) = random_sheaf(Field::Rationals, &mut rng, 3).unwrap();
            assert!(labels.total() >= 1);
            // the constructor inside re_present already certified the glue
            assert_eq!(f.chart_u.gens + f.chart_v.gens > 0, true);
        }
    }

    #[test]
    fn unimodular_pairs_are_inverse() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let ring = Ring::poly_u(Field::Prime(5));
        let (t, t_inv) = random_unimodular(ring, 4, &mut rng);
        assert_eq!(t.mul(&t_inv), RingMat::identity(ring, 4));
    }
}
