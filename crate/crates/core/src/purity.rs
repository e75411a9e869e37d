//! The purity testers for short exact sequences of coherent sheaves:
//! categorical purity (a global splitting), geometric purity (chart
//! splittings), and the two torsion criteria (tensoring and Hom), plus the
//! seeded extension sampler the agreement harness runs on.

use crate::error::Result;
use crate::exactlinear::{irreducible_factors, Field, KMat, RingElem, RingId, Scalar};
use crate::fpmod::{self, ModuleMorphism};
use crate::homalg::{ext1, global_hom, Ext1Data};
use crate::sheafp1::{torsion_sheaf, ClosedPoint, SheafLabel, SheafMorphism, ShortExactSeq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Outcome of the four purity testers on one sequence; categorical purity
/// implies geometric purity, and the three geometric routes must agree.
#[derive(Debug)]
pub struct PurityReport {
    pub c_pure: bool,
    pub g_pure: bool,
    pub g_pure_via_tensor: bool,
    pub g_pure_via_torsion_hom: bool,
    pub criteria_agreement: bool,
    pub global_section: Option<SheafMorphism>,
    pub chart_retractions: (Option<ModuleMorphism>, Option<ModuleMorphism>),
    pub failing_tensor_test: Option<SheafLabel>,
    pub failing_hom_test: Option<SheafLabel>,
}

/// Categorical purity of a certified sequence: for finitely presented data
/// this is a global splitting, sought as a section of the quotient map over
/// the Hom basis.
pub fn is_c_pure(s: &ShortExactSeq) -> Result<(bool, Option<SheafMorphism>)> {
    let c = s.quotient();
    let b = s.middle();
    let field = c.field();
    let hom_cb = global_hom(c, b)?;
    if hom_cb.dim() == 0 {
        // only the zero quotient splits without morphisms
        return Ok((c.is_zero_sheaf()?, None));
    }
    let hom_cc = global_hom(c, c)?;
    let cols: Vec<Vec<Scalar>> = hom_cb
        .basis
        .iter()
        .map(|sec| hom_cc.coords_of(&sec.then(&s.second)))
        .collect::<Result<_>>()?;
    let id_coords = hom_cc.coords_of(&SheafMorphism::identity(c))?;
    let matrix = KMat::from_columns(field, id_coords.len(), cols);
    match matrix.solve(&id_coords) {
        None => Ok((false, None)),
        Some(sol) => {
            let section = hom_cb.from_coords(&sol)?;
            Ok((true, Some(section)))
        }
    }
}

/// Geometric purity: both chart monomorphisms split, with the retractions
/// as witnesses.
pub fn is_g_pure(
    s: &ShortExactSeq,
) -> Result<(bool, (Option<ModuleMorphism>, Option<ModuleMorphism>))> {
    let rep_u = fpmod::is_split_mono(&s.first.map_u)?;
    let rep_v = fpmod::is_split_mono(&s.first.map_v)?;
    Ok((rep_u.split && rep_v.split, (rep_u.retraction, rep_v.retraction)))
}

/// The canonical torsion test set of a sequence: every point in the support
/// of the invariant factors of all six chart modules, with lengths up to the
/// largest occurring power plus one.
pub fn canonical_test_set(s: &ShortExactSeq) -> Result<Vec<(ClosedPoint, u32)>> {
    let mut max_len: BTreeMap<ClosedPoint, u32> = BTreeMap::new();
    let modules = [
        (&s.first.source.chart_u, true),
        (&s.first.source.chart_v, false),
        (&s.middle().chart_u, true),
        (&s.middle().chart_v, false),
        (&s.quotient().chart_u, true),
        (&s.quotient().chart_v, false),
    ];
    for (module, is_u) in modules {
        let dec = fpmod::decompose(module)?;
        for factor in &dec.invariant_factors {
            for (q, mult) in irreducible_factors(factor)? {
                let pt = if is_u {
                    ClosedPoint::Finite(q)
                } else if q == RingElem::variable(q.ring) {
                    ClosedPoint::Infinity
                } else {
                    // a chart-V factor names the point by its reciprocal
                    let ring_u = crate::exactlinear::Ring {
                        id: RingId::PolyU,
                        field: q.ring.field,
                    };
                    ClosedPoint::Finite(q.reciprocal(ring_u))
                };
                let entry = max_len.entry(pt).or_insert(0);
                *entry = (*entry).max(mult);
            }
        }
    }
    let mut out = Vec::new();
    for (pt, max) in max_len {
        for len in 1..=max + 1 {
            out.push((pt.clone(), len));
        }
    }
    Ok(out)
}

/// Geometric purity via the tensor criterion: tensoring with every torsion
/// sheaf in the canonical test set must keep the left map injective. The
/// first failing test sheaf is reported.
pub fn g_pure_via_tensor(s: &ShortExactSeq) -> Result<(bool, Option<SheafLabel>)> {
    for (pt, len) in canonical_test_set(s)? {
        let t = torsion_sheaf(s.sub().field(), &pt, len)?;
        let tu = fpmod::tensor_morphism_left(&t.chart_u, &s.first.map_u)?;
        let tv = fpmod::tensor_morphism_left(&t.chart_v, &s.first.map_v)?;
        if !fpmod::is_injective(&tu)? || !fpmod::is_injective(&tv)? {
            return Ok((false, Some(SheafLabel::Tors(pt, len))));
        }
    }
    Ok((true, None))
}

/// Geometric purity via the torsion-Hom criterion: for every test sheaf the
/// induced three-term complex of Hom spaces must be exact.
pub fn g_pure_via_torsion_hom(s: &ShortExactSeq) -> Result<(bool, Option<SheafLabel>)> {
    let field = s.sub().field();
    for (pt, len) in canonical_test_set(s)? {
        let t = torsion_sheaf(field, &pt, len)?;
        let hom_ta = global_hom(&t, s.sub())?;
        let hom_tb = global_hom(&t, s.middle())?;
        let hom_tc = global_hom(&t, s.quotient())?;
        let m1_cols: Vec<Vec<Scalar>> = hom_ta
            .basis
            .iter()
            .map(|phi| hom_tb.coords_of(&phi.then(&s.first)))
            .collect::<Result<_>>()?;
        let m2_cols: Vec<Vec<Scalar>> = hom_tb
            .basis
            .iter()
            .map(|phi| hom_tc.coords_of(&phi.then(&s.second)))
            .collect::<Result<_>>()?;
        let m1 = KMat::from_columns(field, hom_tb_len(&hom_tb), m1_cols);
        let m2 = KMat::from_columns(field, hom_tc_len(&hom_tc), m2_cols);
        let injective = m1.rank() == hom_ta.dim();
        let surjective = m2.rank() == hom_tc.dim();
        let middle_exact = m1.rank() + m2.rank() == hom_tb.dim()
            && (m1.cols() == 0 || m2.mul(&m1).is_zero());
        if !(injective && surjective && middle_exact) {
            return Ok((false, Some(SheafLabel::Tors(pt, len))));
        }
    }
    Ok((true, None))
}

fn hom_tb_len(h: &crate::homalg::HomBasis) -> usize {
    h.dim()
}

fn hom_tc_len(h: &crate::homalg::HomBasis) -> usize {
    h.dim()
}

/// All four testers plus the agreement flags and witnesses.
pub fn purity_report(s: &ShortExactSeq) -> Result<PurityReport> {
    let (c_pure, global_section) = is_c_pure(s)?;
    let (g_pure, chart_retractions) = is_g_pure(s)?;
    let (via_tensor, failing_tensor_test) = g_pure_via_tensor(s)?;
    let (via_hom, failing_hom_test) = g_pure_via_torsion_hom(s)?;
    let criteria_agreement =
        g_pure == via_tensor && g_pure == via_hom && (!c_pure || g_pure);
    Ok(PurityReport {
        c_pure,
        g_pure,
        g_pure_via_tensor: via_tensor,
        g_pure_via_torsion_hom: via_hom,
        criteria_agreement,
        global_section,
        chart_retractions,
        failing_tensor_test,
        failing_hom_test,
    })
}

/// A seeded random extension of `c` by `a`: the class coordinates are drawn
/// from the seed, the sequence is certified exact, and the drawn class is
/// kept for reproducibility and for the class-vanishing cross-check.
pub struct RandomExtension {
    pub sequence: ShortExactSeq,
    pub class_coords: Vec<Scalar>,
    pub ext: Ext1Data,
    pub seed: u64,
}

pub fn random_extension(
    a: &crate::sheafp1::CoherentSheaf,
    c: &crate::sheafp1::CoherentSheaf,
    seed: u64,
) -> Result<RandomExtension> {
    let field = a.field();
    let ext = ext1(c, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_coords: Vec<Scalar> = (0..ext.dim)
        .map(|_| match field {
            Field::Rationals => field.from_i64(rng.gen_range(-2i64..=2)),
            Field::Prime(p) => Scalar::Mod(rng.gen_range(0..p)),
        })
        .collect();
    let sequence = ext.extension(&class_coords)?;
    Ok(RandomExtension { sequence, class_coords, ext, seed })
}

/// The canonical sequence `0 -> O(a) -> O(b) ⊕ O(c) -> O(d) -> 0` with
/// `a < b <= c < d` and `a + d = b + c`: the maps are `(x^(b-a), 1)` into
/// the middle and `(1, -x^(d-c))` out of it, certified exact.
pub fn twist_square_sequence(
    field: Field,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
) -> Result<ShortExactSeq> {
    use crate::exactlinear::{Ring, RingMat};
    use crate::sheafp1::{line_bundle, line_bundle_map};
    if a + d != b + c || a >= b || c >= d {
        return Err(crate::error::Error::NotExact(
            "twist square needs a < b <= c < d with a + d = b + c".into(),
        ));
    }
    let one = RingElem::one(Ring::poly_u(field));
    let left_b = line_bundle_map(field, a, b, &RingElem::monomial(Ring::poly_u(field), field.one(), b - a))?;
    let left_c = line_bundle_map(field, a, c, &one)?;
    let middle = line_bundle(field, b).direct_sum(&line_bundle(field, c));
    let first_u = left_b.map_u.matrix.vstack(&left_c.map_u.matrix);
    let first_v = left_b.map_v.matrix.vstack(&left_c.map_v.matrix);
    let first = SheafMorphism::new(line_bundle(field, a), middle.clone(), first_u, first_v)?;
    let right_b = line_bundle_map(field, b, d, &one)?;
    let right_c = line_bundle_map(
        field,
        c,
        d,
        &RingElem::monomial(Ring::poly_u(field), field.from_i64(-1), d - c),
    )?;
    let second_u = right_b.map_u.matrix.hstack(&right_c.map_u.matrix);
    let second_v = right_b.map_v.matrix.hstack(&right_c.map_v.matrix);
    let second = SheafMorphism::new(middle, line_bundle(field, d), second_u, second_v)?;
    ShortExactSeq::new(first, second)
}
