//! The tilting functor into representations of the two-arrow quiver, and
//! full decomposition of finite-dimensional representations into
//! preprojective, preinjective and regular summands.
//!
//! A representation is a pair of scalar matrices `map_a, map_b : V1 -> V0`,
//! where `V1` carries the `Hom(O(1), -)` sort and `V0` the `Hom(O, -)`
//! sort. Tilting sends a coherent sheaf to two such representations, one
//! from global Hom and one from first cohomology, with the structure maps
//! given by precomposition with the two independent sections of `O(1)`.

use crate::error::{Error, Result};
use crate::exactlinear::{
    irreducible_factors, smith_normal_form, Field, KMat, Ring, RingElem, RingMat, Scalar,
};
use crate::homalg::{global_hom, CechModel};
use crate::sheafp1::{line_bundle, line_bundle_map, ClosedPoint, CoherentSheaf, SheafLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;

/// A finite-dimensional representation of the two-arrow quiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KroneckerRep {
    pub field: Field,
    pub d1: usize,
    pub d0: usize,
    pub map_a: KMat,
    pub map_b: KMat,
}

impl KroneckerRep {
    pub fn new(field: Field, d1: usize, d0: usize, map_a: KMat, map_b: KMat) -> Result<Self> {
        if map_a.rows() != d0 || map_a.cols() != d1 || map_b.rows() != d0 || map_b.cols() != d1 {
            return Err(Error::ShapeMismatch(format!(
                "maps must be {d0}x{d1}, got {}x{} and {}x{}",
                map_a.rows(),
                map_a.cols(),
                map_b.rows(),
                map_b.cols()
            )));
        }
        Ok(KroneckerRep { field, d1, d0, map_a, map_b })
    }

    pub fn zero(field: Field) -> Self {
        KroneckerRep {
            field,
            d1: 0,
            d0: 0,
            map_a: KMat::zeros(field, 0, 0),
            map_b: KMat::zeros(field, 0, 0),
        }
    }

    pub fn dim_vector(&self) -> (usize, usize) {
        (self.d1, self.d0)
    }

    pub fn is_zero_rep(&self) -> bool {
        self.d1 == 0 && self.d0 == 0
    }

    pub fn direct_sum(&self, other: &KroneckerRep) -> KroneckerRep {
        let field = self.field;
        let block = |a: &KMat, b: &KMat, rows: usize, cols: usize| {
            let mut m = KMat::zeros(field, rows, cols);
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    m.set(i, j, a.at(i, j).clone());
                }
            }
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    m.set(a.rows() + i, a.cols() + j, b.at(i, j).clone());
                }
            }
            m
        };
        KroneckerRep {
            field,
            d1: self.d1 + other.d1,
            d0: self.d0 + other.d0,
            map_a: block(&self.map_a, &other.map_a, self.d0 + other.d0, self.d1 + other.d1),
            map_b: block(&self.map_b, &other.map_b, self.d0 + other.d0, self.d1 + other.d1),
        }
    }
}

/// Label of an indecomposable representation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RepLabel {
    Preproj(u32),
    Preinj(u32),
    Regular(ClosedPoint, u32),
}

impl RepLabel {
    pub fn dim_vector(&self) -> (usize, usize) {
        match self {
            RepLabel::Preproj(n) => (*n as usize, *n as usize + 1),
            RepLabel::Preinj(n) => (*n as usize + 1, *n as usize),
            RepLabel::Regular(pt, m) => {
                let d = (*m as i64 * pt.degree()) as usize;
                (d, d)
            }
        }
    }

    pub fn defect(&self) -> i64 {
        match self {
            RepLabel::Preproj(_) => 1,
            RepLabel::Preinj(_) => -1,
            RepLabel::Regular(..) => 0,
        }
    }
}

impl fmt::Display for RepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepLabel::Preproj(n) => write!(f, "Preproj({n})"),
            RepLabel::Preinj(n) => write!(f, "Preinj({n})"),
            RepLabel::Regular(pt, m) => write!(f, "Regular({pt}, {m})"),
        }
    }
}

/// Multiset of representation labels.
pub type RepMultiset = BTreeMap<RepLabel, usize>;

/// Canonical form of an indecomposable representation.
pub fn canonical_rep(field: Field, label: &RepLabel) -> KroneckerRep {
    match label {
        RepLabel::Preproj(n) => {
            let n = *n as usize;
            let mut a = KMat::zeros(field, n + 1, n);
            let mut b = KMat::zeros(field, n + 1, n);
            for i in 0..n {
                a.set(i, i, field.one());
                b.set(i + 1, i, field.one());
            }
            KroneckerRep { field, d1: n, d0: n + 1, map_a: a, map_b: b }
        }
        RepLabel::Preinj(n) => {
            let n = *n as usize;
            let mut a = KMat::zeros(field, n, n + 1);
            let mut b = KMat::zeros(field, n, n + 1);
            for i in 0..n {
                a.set(i, i, field.one());
                b.set(i, i + 1, field.one());
            }
            KroneckerRep { field, d1: n + 1, d0: n, map_a: a, map_b: b }
        }
        RepLabel::Regular(ClosedPoint::Infinity, m) => {
            let m = *m as usize;
            let mut a = KMat::zeros(field, m, m);
            let b = KMat::identity(field, m);
            for i in 0..m.saturating_sub(1) {
                a.set(i, i + 1, field.one());
            }
            KroneckerRep { field, d1: m, d0: m, map_a: a, map_b: b }
        }
        RepLabel::Regular(ClosedPoint::Finite(p), m) => {
            // companion matrix of p^m acting as the pencil parameter
            let q = p.pow(*m);
            let d = q.degree().unwrap() as usize;
            let a = KMat::identity(field, d);
            let mut b = KMat::zeros(field, d, d);
            for i in 0..d.saturating_sub(1) {
                b.set(i + 1, i, field.one());
            }
            for i in 0..d {
                b.set(i, d - 1, field.neg(&q.coeff(i as i64)));
            }
            KroneckerRep { field, d1: d, d0: d, map_a: a, map_b: b }
        }
    }
}

/// The bigraded image of a coherent sheaf under tilting: degree zero from
/// global Hom, degree one from first cohomology. For coherent input the
/// degree-zero part contains no preinjective summand and the degree-one
/// part only preinjectives; the two degrees never interact.
#[derive(Debug, Clone)]
pub struct TiltImage {
    pub deg0: KroneckerRep,
    pub deg1: KroneckerRep,
}

/// Tilting against `O ⊕ O(1)`. The two sections of `O(1)` used for the
/// structure maps are `(1, y)` and `(x, 1)` in chart coordinates.
pub fn tilt(f: &CoherentSheaf) -> Result<TiltImage> {
    let field = f.field();
    let ring_u = Ring::poly_u(field);
    let one_poly = RingElem::one(ring_u);
    let x_poly = RingElem::variable(ring_u);
    let s0 = line_bundle_map(field, 0, 1, &one_poly)?;
    let s1 = line_bundle_map(field, 0, 1, &x_poly)?;

    // degree zero: Hom(O, f) and Hom(O(1), f) with precomposition
    let hom0 = global_hom(&line_bundle(field, 0), f)?;
    let hom1 = global_hom(&line_bundle(field, 1), f)?;
    let d0 = hom0.dim();
    let d1 = hom1.dim();
    let mut a_cols = Vec::with_capacity(d1);
    let mut b_cols = Vec::with_capacity(d1);
    for phi in &hom1.basis {
        a_cols.push(hom0.coords_of(&s0.then(phi))?);
        b_cols.push(hom0.coords_of(&s1.then(phi))?);
    }
    let deg0 = KroneckerRep::new(
        field,
        d1,
        d0,
        KMat::from_columns(field, d0, a_cols),
        KMat::from_columns(field, d0, b_cols),
    )?;

    // degree one: cokernels of the twisted Čech models; the maps multiply
    // overlap representatives by the chart values 1 and x of the sections
    let model1 = CechModel::stabilized(f, -1)?;
    let model0 = CechModel::stabilized(f, 0)?;
    let e1 = model1.h1;
    let e0 = model0.h1;
    let laurent = Ring::laurent(field);
    let x_laurent = RingElem::variable(laurent);
    let mut a_cols = Vec::with_capacity(e1);
    let mut b_cols = Vec::with_capacity(e1);
    for rep in model1.coker_elements() {
        a_cols.push(model0.coker_coords(&rep)?);
        let moved: Vec<RingElem> = rep.iter().map(|c| c.mul(&x_laurent)).collect();
        b_cols.push(model0.coker_coords(&moved)?);
    }
    let deg1 = KroneckerRep::new(
        field,
        e1,
        e0,
        KMat::from_columns(field, e0, a_cols),
        KMat::from_columns(field, e0, b_cols),
    )?;

    Ok(TiltImage { deg0, deg1 })
}

/// Basis of the intertwiner space `Hom(x, m)`: pairs `(t1, t0)` with
/// `m.a t1 = t0 x.a` and `m.b t1 = t0 x.b`.
pub fn intertwiner_basis(x: &KroneckerRep, m: &KroneckerRep) -> Vec<(KMat, KMat)> {
    let field = x.field;
    let n1 = m.d1 * x.d1;
    let n0 = m.d0 * x.d0;
    // vec is column-major: vec(M t1) = (I_{x.d1} ⊗ m.a) vec(t1),
    // vec(t0 X) = (x.a^T ⊗ I_{m.d0}) vec(t0)
    let i_x1 = KMat::identity(field, x.d1);
    let i_m0 = KMat::identity(field, m.d0);
    let row_a = i_x1
        .kronecker(&m.map_a)
        .hstack(&x.map_a.transpose().kronecker(&i_m0).scale(&field.from_i64(-1)));
    let row_b = i_x1
        .kronecker(&m.map_b)
        .hstack(&x.map_b.transpose().kronecker(&i_m0).scale(&field.from_i64(-1)));
    let system = row_a.vstack(&row_b);
    let kernel = if n1 + n0 == 0 { Vec::new() } else { system.kernel_basis() };
    kernel
        .into_iter()
        .map(|v| {
            let t1 = unvec(field, m.d1, x.d1, &v[..n1]);
            let t0 = unvec(field, m.d0, x.d0, &v[n1..]);
            (t1, t0)
        })
        .collect()
}

pub fn intertwiner_dim(x: &KroneckerRep, m: &KroneckerRep) -> usize {
    intertwiner_basis(x, m).len()
}

fn unvec(field: Field, rows: usize, cols: usize, v: &[Scalar]) -> KMat {
    let mut m = KMat::zeros(field, rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m.set(i, j, v[j * rows + i].clone());
        }
    }
    m
}

/// Decomposition result: the label multiset together with an explicit
/// isomorphism to the canonical direct sum.
#[derive(Debug, Clone)]
pub struct RepDecomposition {
    pub labels: RepMultiset,
    pub iso_t1: KMat,
    pub iso_t0: KMat,
}

/// Full decomposition of a representation. Regular summands are read off
/// the elementary divisors of the affine pencil `t a - b` (with the tube at
/// infinity handled on the dual chart); preprojective and preinjective
/// multiplicities come from second differences of Hom dimensions against the
/// canonical chain. The returned isomorphism is the certificate.
pub fn decompose_rep(r: &KroneckerRep) -> Result<RepDecomposition> {
    let field = r.field;
    let mut labels: RepMultiset = BTreeMap::new();

    // finite regular part: elementary divisors of t*a - b over k[t]
    let ring = Ring::poly_u(field);
    let t_var = RingElem::variable(ring);
    let pencil = RingMat::from_fn(ring, r.d0, r.d1, |i, j| {
        let ta = RingElem::constant(ring, r.map_a.at(i, j).clone()).mul(&t_var);
        ta.sub(&RingElem::constant(ring, r.map_b.at(i, j).clone()))
    });
    let snf = smith_normal_form(&pencil)?;
    let rank = snf.rank();
    for d in snf.diagonal() {
        if d.is_unit() {
            continue;
        }
        for (p, m) in irreducible_factors(&d)? {
            let pt = ClosedPoint::Finite(p);
            *labels.entry(RepLabel::Regular(pt, m)).or_insert(0) += 1;
        }
    }

    // tube at infinity: u-power elementary divisors of u*b - a
    let dual = RingMat::from_fn(ring, r.d0, r.d1, |i, j| {
        let ub = RingElem::constant(ring, r.map_b.at(i, j).clone()).mul(&t_var);
        ub.sub(&RingElem::constant(ring, r.map_a.at(i, j).clone()))
    });
    let dual_snf = smith_normal_form(&dual)?;
    for d in dual_snf.diagonal() {
        if d.is_unit() {
            continue;
        }
        let low = d.low_degree().unwrap();
        if low > 0 {
            *labels.entry(RepLabel::Regular(ClosedPoint::Infinity, low as u32)).or_insert(0) += 1;
        }
    }

    // block counts from the generic rank of the pencil
    let preinj_blocks = r.d1 - rank;
    let preproj_blocks = r.d0 - rank;

    // preinjective multiplicities: second differences of j -> dim Hom(I_j, r)
    if preinj_blocks > 0 {
        let mut found = 0usize;
        let mut g_prev2 = 0usize; // G(k-2)
        let mut g_prev1 = 0usize; // G(k-1)
        let mut k = 0u32;
        while found < preinj_blocks {
            if k as usize > r.d1 + 1 {
                return Err(Error::Internal("preinjective count extraction ran away".into()));
            }
            let g_k = intertwiner_dim(&canonical_rep(field, &RepLabel::Preinj(k)), r);
            let m_k = g_k as i64 - 2 * g_prev1 as i64 + g_prev2 as i64;
            if m_k < 0 {
                return Err(Error::Internal("negative preinjective multiplicity".into()));
            }
            if m_k > 0 {
                *labels.entry(RepLabel::Preinj(k)).or_insert(0) += m_k as usize;
                found += m_k as usize;
            }
            g_prev2 = g_prev1;
            g_prev1 = g_k;
            k += 1;
        }
    }

    // preprojective multiplicities, dual side: k -> dim Hom(r, P_k)
    if preproj_blocks > 0 {
        let mut found = 0usize;
        let mut g_prev2 = 0usize;
        let mut g_prev1 = 0usize;
        let mut k = 0u32;
        while found < preproj_blocks {
            if k as usize > r.d0 + 1 {
                return Err(Error::Internal("preprojective count extraction ran away".into()));
            }
            let g_k = intertwiner_dim(r, &canonical_rep(field, &RepLabel::Preproj(k)));
            let m_k = g_k as i64 - 2 * g_prev1 as i64 + g_prev2 as i64;
            if m_k < 0 {
                return Err(Error::Internal("negative preprojective multiplicity".into()));
            }
            if m_k > 0 {
                *labels.entry(RepLabel::Preproj(k)).or_insert(0) += m_k as usize;
                found += m_k as usize;
            }
            g_prev2 = g_prev1;
            g_prev1 = g_k;
            k += 1;
        }
    }

    // dimension bookkeeping
    let mut total = (0usize, 0usize);
    let mut defect = 0i64;
    for (label, count) in &labels {
        let (a, b) = label.dim_vector();
        total.0 += a * count;
        total.1 += b * count;
        defect += label.defect() * *count as i64;
    }
    if total != (r.d1, r.d0) {
        return Err(Error::Internal(format!(
            "label dimensions {total:?} do not match the representation {:?}",
            (r.d1, r.d0)
        )));
    }
    if defect != r.d0 as i64 - r.d1 as i64 {
        return Err(Error::Internal("defect bookkeeping failed".into()));
    }

    let (iso_t1, iso_t0) = certify_iso(r, &labels)?;
    Ok(RepDecomposition { labels, iso_t1, iso_t0 })
}

/// Builds the canonical direct sum of the labels.
pub fn canonical_sum(field: Field, labels: &RepMultiset) -> KroneckerRep {
    let mut acc = KroneckerRep::zero(field);
    for (label, count) in labels {
        for _ in 0..*count {
            acc = acc.direct_sum(&canonical_rep(field, label));
        }
    }
    acc
}

/// Searches for an explicit isomorphism `r -> canonical_sum(labels)` by
/// drawing deterministic pseudo-random combinations from the per-block
/// intertwiner spaces.
fn certify_iso(r: &KroneckerRep, labels: &RepMultiset) -> Result<(KMat, KMat)> {
    let field = r.field;
    // per distinct label, a basis of Hom(r, Z)
    let mut block_data: Vec<(&RepLabel, usize, Vec<(KMat, KMat)>)> = Vec::new();
    for (label, count) in labels {
        let z = canonical_rep(field, label);
        let basis = intertwiner_basis(r, &z);
        if basis.is_empty() && !z.is_zero_rep() {
            return Err(Error::IsoSearchExhausted);
        }
        block_data.push((label, *count, basis));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x6b72_6f6e);
    for _attempt in 0..256 {
        let mut t1 = KMat::zeros(field, 0, r.d1);
        let mut t0 = KMat::zeros(field, 0, r.d0);
        for (_, count, basis) in &block_data {
            for _ in 0..*count {
                let mut c1 = KMat::zeros(field, basis[0].0.rows(), r.d1);
                let mut c0 = KMat::zeros(field, basis[0].1.rows(), r.d0);
                for (b1, b0) in basis {
                    let c = random_scalar(field, &mut rng);
                    c1 = c1.add(&b1.scale(&c));
                    c0 = c0.add(&b0.scale(&c));
                }
                t1 = t1.vstack(&c1);
                t0 = t0.vstack(&c0);
            }
        }
        if t1.rows() == r.d1
            && t0.rows() == r.d0
            && (r.d1 == 0 || !t1.det().is_zero())
            && (r.d0 == 0 || !t0.det().is_zero())
        {
            return Ok((t1, t0));
        }
    }
    Err(Error::IsoSearchExhausted)
}

fn random_scalar(field: Field, rng: &mut ChaCha8Rng) -> Scalar {
    match field {
        Field::Rationals => field.from_i64(rng.gen_range(-9i64..=9)),
        Field::Prime(p) => Scalar::Mod(rng.gen_range(0..p)),
    }
}

/// Translates a representation label back to a sheaf label, respecting the
/// cohomological degree it was found in.
pub fn sheaf_label_from_rep(label: &RepLabel, degree: u8) -> Result<SheafLabel> {
    match (degree, label) {
        (0, RepLabel::Preproj(n)) => Ok(SheafLabel::Lb(*n as i64)),
        (0, RepLabel::Regular(pt, m)) => Ok(SheafLabel::Tors(pt.clone(), *m)),
        (1, RepLabel::Preinj(m)) => Ok(SheafLabel::Lb(-(*m as i64) - 1)),
        _ => Err(Error::NotCoherentImage),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sheafp1::torsion_sheaf;

    fn q() -> Field {
        Field::Rationals
    }

    fn xp(coeffs: &[i64]) -> RingElem {
        RingElem::from_int_coeffs(Ring::poly_u(q()), coeffs)
    }

    fn labels_of(r: &KroneckerRep) -> RepMultiset {
        decompose_rep(r).unwrap().labels
    }

    #[test]
    fn tilt_of_nonnegative_twists_is_preprojective() {
        for n in 0..=3i64 {
            let t = tilt(&line_bundle(q(), n)).unwrap();
            assert_eq!(t.deg0.dim_vector(), (n as usize, n as usize + 1), "O({n}) deg0");
            assert!(t.deg1.is_zero_rep(), "O({n}) deg1");
        }
    }

    #[test]
    fn tilt_of_negative_twists_is_shifted_preinjective() {
        for n in -4..=-1i64 {
            let t = tilt(&line_bundle(q(), n)).unwrap();
            assert!(t.deg0.is_zero_rep(), "O({n}) deg0");
            assert_eq!(t.deg1.dim_vector(), ((-n) as usize, (-n - 1) as usize), "O({n}) deg1");
        }
    }

    #[test]
    fn tilt_of_torsion_is_regular_square() {
        for (pt, m) in [
            (ClosedPoint::finite(xp(&[0, 1])).unwrap(), 2u32),
            (ClosedPoint::finite(xp(&[-1, 1])).unwrap(), 1),
            (ClosedPoint::Infinity, 2),
            (ClosedPoint::finite(xp(&[1, 0, 1])).unwrap(), 1),
        ] {
            let t = tilt(&torsion_sheaf(q(), &pt, m).unwrap()).unwrap();
            let d = (m as i64 * pt.degree()) as usize;
            assert_eq!(t.deg0.dim_vector(), (d, d), "T({pt},{m})");
            assert!(t.deg1.is_zero_rep());
        }
    }

    #[test]
    fn simple_projective_decomposes() {
        let r = KroneckerRep::new(
            q(),
            0,
            1,
            KMat::zeros(q(), 1, 0),
            KMat::zeros(q(), 1, 0),
        )
        .unwrap();
        let labels = labels_of(&r);
        assert_eq!(labels.get(&RepLabel::Preproj(0)), Some(&1));
        assert_eq!(labels.len(), 1);
    }

    #[test]
    fn canonical_preprojective_one_decomposes() {
        // (1, 2, a = (1,0)^T, b = (0,1)^T) is the tilt of O(1)
        let r = KroneckerRep::new(
            q(),
            1,
            2,
            KMat::from_int_rows(q(), &[&[1], &[0]]),
            KMat::from_int_rows(q(), &[&[0], &[1]]),
        )
        .unwrap();
        let labels = labels_of(&r);
        assert_eq!(labels.get(&RepLabel::Preproj(1)), Some(&1));
        assert_eq!(labels.len(), 1);
    }

    #[test]
    fn scalar_pencil_is_regular_at_x_minus_one() {
        let r = KroneckerRep::new(
            q(),
            1,
            1,
            KMat::from_int_rows(q(), &[&[1]]),
            KMat::from_int_rows(q(), &[&[1]]),
        )
        .unwrap();
        let labels = labels_of(&r);
        let pt = ClosedPoint::finite(xp(&[-1, 1])).unwrap();
        assert_eq!(labels.get(&RepLabel::Regular(pt, 1)), Some(&1));
        assert_eq!(labels.len(), 1);
    }

    #[test]
    fn support_convention_is_calibrated_on_three_points() {
        // frozen dictionary: tilt(T(pt, 1)) must decompose as Regular(pt, 1)
        // for the origin, the unit point and infinity
        for pt in [
            ClosedPoint::finite(xp(&[0, 1])).unwrap(),
            ClosedPoint::finite(xp(&[-1, 1])).unwrap(),
            ClosedPoint::Infinity,
        ] {
            let t = tilt(&torsion_sheaf(q(), &pt, 1).unwrap()).unwrap();
            let labels = labels_of(&t.deg0);
            assert_eq!(
                labels.get(&RepLabel::Regular(pt.clone(), 1)),
                Some(&1),
                "calibration at {pt}"
            );
            assert_eq!(labels.len(), 1);
        }
    }

    #[test]
    fn quadratic_point_pencil_decomposes() {
        let pt = ClosedPoint::finite(xp(&[1, 0, 1])).unwrap();
        let t = tilt(&torsion_sheaf(q(), &pt, 1).unwrap()).unwrap();
        let labels = labels_of(&t.deg0);
        assert_eq!(labels.get(&RepLabel::Regular(pt, 1)), Some(&1));
    }

    #[test]
    fn mixed_sum_decomposes_with_certified_iso() {
        let field = q();
        let mut expected: RepMultiset = BTreeMap::new();
        expected.insert(RepLabel::Preproj(0), 1);
        expected.insert(RepLabel::Preinj(1), 1);
        expected.insert(
            RepLabel::Regular(ClosedPoint::finite(xp(&[2, 1])).unwrap(), 2),
            1,
        );
        let sum = canonical_sum(field, &expected);
        let dec = decompose_rep(&sum).unwrap();
        assert_eq!(dec.labels, expected);
        // the certificate intertwines: t0 a = a' t1 etc.
        let target = canonical_sum(field, &dec.labels);
        let lhs = target.map_a.mul(&dec.iso_t1);
        let rhs = dec.iso_t0.mul(&sum.map_a);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugated_reps_decompose_identically() {
        use rand::{Rng, SeedableRng};
        let field = q();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut expected: RepMultiset = BTreeMap::new();
        expected.insert(RepLabel::Preproj(1), 1);
        expected.insert(RepLabel::Regular(ClosedPoint::Infinity, 1), 1);
        let base = canonical_sum(field, &expected);
        for _ in 0..10 {
            // conjugate by random invertible matrices
            let t1 = loop {
                let m = KMat::from_rows(
                    field,
                    (0..base.d1)
                        .map(|_| {
                            (0..base.d1).map(|_| field.from_i64(rng.gen_range(-3..=3))).collect()
                        })
                        .collect(),
                );
                if !m.det().is_zero() {
                    break m;
                }
            };
            let t0 = loop {
                let m = KMat::from_rows(
                    field,
                    (0..base.d0)
                        .map(|_| {
                            (0..base.d0).map(|_| field.from_i64(rng.gen_range(-3..=3))).collect()
                        })
                        .collect(),
                );
                if !m.det().is_zero() {
                    break m;
                }
            };
            let conj = KroneckerRep::new(
                field,
                base.d1,
                base.d0,
                t0.mul(&base.map_a).mul(&t1.inverse().unwrap()),
                t0.mul(&base.map_b).mul(&t1.inverse().unwrap()),
            )
            .unwrap();
            assert_eq!(labels_of(&conj), expected);
        }
    }

    #[test]
    fn label_translation_rules() {
        assert_eq!(
            sheaf_label_from_rep(&RepLabel::Preproj(3), 0).unwrap(),
            SheafLabel::Lb(3)
        );
        assert_eq!(
            sheaf_label_from_rep(&RepLabel::Preinj(0), 1).unwrap(),
            SheafLabel::Lb(-1)
        );
        let pt = ClosedPoint::finite(xp(&[-1, 1])).unwrap();
        assert_eq!(
            sheaf_label_from_rep(&RepLabel::Regular(pt.clone(), 2), 0).unwrap(),
            SheafLabel::Tors(pt.clone(), 2)
        );
        assert_eq!(
            sheaf_label_from_rep(&RepLabel::Preinj(1), 0).unwrap_err(),
            Error::NotCoherentImage
        );
        assert_eq!(
            sheaf_label_from_rep(&RepLabel::Regular(pt, 1), 1).unwrap_err(),
            Error::NotCoherentImage
        );
    }

    #[test]
    fn defect_bookkeeping_on_random_sums() {
        use rand::{Rng, SeedableRng};
        let field = q();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let mut expected: RepMultiset = BTreeMap::new();
            for _ in 0..rng.gen_range(1..=3) {
                let label = match rng.gen_range(0..3) {
                    0 => RepLabel::Preproj(rng.gen_range(0..3)),
                    1 => RepLabel::Preinj(rng.gen_range(0..3)),
                    _ => RepLabel::Regular(
                        ClosedPoint::finite(xp(&[rng.gen_range(-2..=2), 1])).unwrap(),
                        rng.gen_range(1..=2),
                    ),
                };
                *expected.entry(label).or_insert(0) += 1;
            }
            let sum = canonical_sum(field, &expected);
            let dec = decompose_rep(&sum).unwrap();
            assert_eq!(dec.labels, expected);
            let defect: i64 =
                dec.labels.iter().map(|(l, c)| l.defect() * *c as i64).sum();
            assert_eq!(defect, sum.d0 as i64 - sum.d1 as i64);
        }
    }
}
