//! Symbolic catalog of the Ziegler spectrum of quasicoherent sheaves on the
//! line: the point list, per-point attributes, the closure operator on
//! point-set descriptions, and the geometric part. Finite-length data comes
//! from the coherent layer; the infinite-dimensional points (Prüfer, adic,
//! generic) exist only symbolically.
//!
//! The closure rules for the geometric part follow the classical description
//! of the spectrum of a Dedekind domain and are tagged as externally sourced
//! in reports; the line-bundle rules are native.

use crate::error::Result;
use crate::sheafp1::{decompose_sheaf, ClosedPoint, CoherentSheaf, SheafLabel};
use std::collections::BTreeSet;
use std::fmt;

/// A point of the spectrum: a line bundle, a finite-length torsion sheaf, or
/// one of the symbolic infinite points at a closed point, plus the generic
/// point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ZgPoint {
    Lb(i64),
    Tors(ClosedPoint, u32),
    Prufer(ClosedPoint),
    Adic(ClosedPoint),
    Generic,
}

impl fmt::Display for ZgPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZgPoint::Lb(n) => write!(f, "LB({n})"),
            ZgPoint::Tors(pt, m) => write!(f, "T({pt}, {m})"),
            ZgPoint::Prufer(pt) => write!(f, "Prufer({pt})"),
            ZgPoint::Adic(pt) => write!(f, "Adic({pt})"),
            ZgPoint::Generic => write!(f, "Gen"),
        }
    }
}

/// Per-point attributes. Line bundles are the non-geometric points: closed,
/// isolated, and not g-pure-injective; everything else is g-pure-injective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointAttributes {
    pub g_pure_injective: bool,
    pub is_line_bundle: bool,
    pub isolated: bool,
    pub closed_singleton: bool,
}

pub fn attributes(p: &ZgPoint) -> PointAttributes {
    match p {
        ZgPoint::Lb(_) => PointAttributes {
            g_pure_injective: false,
            is_line_bundle: true,
            isolated: true,
            closed_singleton: true,
        },
        ZgPoint::Tors(..) => PointAttributes {
            g_pure_injective: true,
            is_line_bundle: false,
            isolated: true,
            closed_singleton: true,
        },
        ZgPoint::Prufer(_) | ZgPoint::Adic(_) => PointAttributes {
            g_pure_injective: true,
            is_line_bundle: false,
            isolated: false,
            closed_singleton: false,
        },
        ZgPoint::Generic => PointAttributes {
            g_pure_injective: true,
            is_line_bundle: false,
            isolated: false,
            closed_singleton: true,
        },
    }
}

/// Whether arbitrary direct sums of copies stay c-pure-injective; recorded
/// as a catalog fact for line bundles, not computed. `None` means the
/// catalog stores no claim for the point.
pub fn sigma_c_pure_injective(p: &ZgPoint) -> Option<bool> {
    match p {
        ZgPoint::Lb(_) => Some(true),
        _ => None,
    }
}

/// The line-bundle part of a description: a finite set of twists or a
/// half-bounded or unbounded family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LbFamily {
    FiniteSet(BTreeSet<i64>),
    AllAtMost(i64),
    AllAtLeast(i64),
    All,
}

impl LbFamily {
    pub fn empty() -> Self {
        LbFamily::FiniteSet(BTreeSet::new())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, LbFamily::FiniteSet(s) if s.is_empty())
    }

    pub fn bounded_above(&self) -> bool {
        matches!(self, LbFamily::FiniteSet(_) | LbFamily::AllAtMost(_))
    }

    pub fn contains(&self, n: i64) -> bool {
        match self {
            LbFamily::FiniteSet(s) => s.contains(&n),
            LbFamily::AllAtMost(b) => n <= *b,
            LbFamily::AllAtLeast(b) => n >= *b,
            LbFamily::All => true,
        }
    }
}

/// A finite-or-cofinite set of closed points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointSet {
    Finite(BTreeSet<ClosedPoint>),
    All,
}

impl PointSet {
    pub fn empty() -> Self {
        PointSet::Finite(BTreeSet::new())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, PointSet::Finite(s) if s.is_empty())
    }

    pub fn insert(&mut self, pt: ClosedPoint) {
        if let PointSet::Finite(s) = self {
            s.insert(pt);
        }
    }

    pub fn union_all(&mut self) {
        *self = PointSet::All;
    }

    pub fn contains(&self, pt: &ClosedPoint) -> bool {
        match self {
            PointSet::Finite(s) => s.contains(pt),
            PointSet::All => true,
        }
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        match (self, other) {
            (PointSet::All, _) | (_, PointSet::All) => PointSet::All,
            (PointSet::Finite(a), PointSet::Finite(b)) => {
                PointSet::Finite(a.union(b).cloned().collect())
            }
        }
    }
}

/// A possibly infinite family of points, canonicalized: the torsion part
/// stores finite `(point, length)` pairs plus per-point all-length flags,
/// and finite pairs at a flagged point are absorbed into the flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSetDescription {
    pub lb_part: LbFamily,
    pub tors_finite: BTreeSet<(ClosedPoint, u32)>,
    pub tors_all_lengths: PointSet,
    pub prufer_points: PointSet,
    pub adic_points: PointSet,
    pub generic: bool,
}

impl PointSetDescription {
    pub fn empty() -> Self {
        PointSetDescription {
            lb_part: LbFamily::empty(),
            tors_finite: BTreeSet::new(),
            tors_all_lengths: PointSet::empty(),
            prufer_points: PointSet::empty(),
            adic_points: PointSet::empty(),
            generic: false,
        }
    }

    pub fn from_points(points: impl IntoIterator<Item = ZgPoint>) -> Self {
        let mut out = Self::empty();
        let mut lbs = BTreeSet::new();
        for p in points {
            match p {
                ZgPoint::Lb(n) => {
                    lbs.insert(n);
                }
                ZgPoint::Tors(pt, m) => {
                    out.tors_finite.insert((pt, m));
                }
                ZgPoint::Prufer(pt) => out.prufer_points.insert(pt),
                ZgPoint::Adic(pt) => out.adic_points.insert(pt),
                ZgPoint::Generic => out.generic = true,
            }
        }
        out.lb_part = LbFamily::FiniteSet(lbs);
        out.canonicalize();
        out
    }

    /// Absorbs finite torsion pairs into all-length flags.
    pub fn canonicalize(&mut self) {
        let flagged = self.tors_all_lengths.clone();
        self.tors_finite.retain(|(pt, _)| !flagged.contains(pt));
    }

    pub fn contains_point(&self, p: &ZgPoint) -> bool {
        match p {
            ZgPoint::Lb(n) => self.lb_part.contains(*n),
            ZgPoint::Tors(pt, m) => {
                self.tors_all_lengths.contains(pt) || self.tors_finite.contains(&(pt.clone(), *m))
            }
            ZgPoint::Prufer(pt) => self.prufer_points.contains(pt),
            ZgPoint::Adic(pt) => self.adic_points.contains(pt),
            ZgPoint::Generic => self.generic,
        }
    }

    /// Containment, decidable on the canonical form.
    pub fn subset_of(&self, other: &PointSetDescription) -> bool {
        let lb_ok = match (&self.lb_part, &other.lb_part) {
            (LbFamily::FiniteSet(s), _) => s.iter().all(|n| other.lb_part.contains(*n)),
            (LbFamily::AllAtMost(a), LbFamily::AllAtMost(b)) => a <= b,
            (LbFamily::AllAtLeast(a), LbFamily::AllAtLeast(b)) => a >= b,
            (_, LbFamily::All) => true,
            _ => false,
        };
        let tors_ok = self.tors_finite.iter().all(|(pt, m)| {
            other.tors_all_lengths.contains(pt) || other.tors_finite.contains(&(pt.clone(), *m))
        }) && match (&self.tors_all_lengths, &other.tors_all_lengths) {
            (PointSet::Finite(a), b) => a.iter().all(|pt| b.contains(pt)),
            (PointSet::All, PointSet::All) => true,
            (PointSet::All, PointSet::Finite(_)) => false,
        };
        let ps_ok = |a: &PointSet, b: &PointSet| match (a, b) {
            (PointSet::Finite(s), t) => s.iter().all(|pt| t.contains(pt)),
            (PointSet::All, PointSet::All) => true,
            (PointSet::All, PointSet::Finite(_)) => false,
        };
        lb_ok
            && tors_ok
            && ps_ok(&self.prufer_points, &other.prufer_points)
            && ps_ok(&self.adic_points, &other.adic_points)
            && (!self.generic || other.generic)
    }
}

/// Topological closure of a description.
///
/// Line-bundle families bounded above are already closed; unbounded-above
/// families pull in every adic point and the generic point. The geometric
/// rules (imported from the Dedekind-domain spectrum): a point with
/// unbounded torsion lengths adds its Prüfer and adic points and the
/// generic point; any Prüfer or adic point adds the generic point; finite
/// data is closed. The operator is idempotent.
pub fn closure(s: &PointSetDescription) -> PointSetDescription {
    let mut out = s.clone();
    if !out.lb_part.bounded_above() && !out.lb_part.is_empty() {
        out.adic_points.union_all();
        out.generic = true;
    }
    match &out.tors_all_lengths {
        PointSet::All => {
            out.prufer_points.union_all();
            out.adic_points.union_all();
            out.generic = true;
        }
        PointSet::Finite(pts) => {
            for pt in pts.clone() {
                out.prufer_points.insert(pt.clone());
                out.adic_points.insert(pt);
                out.generic = true;
            }
        }
    }
    if !out.prufer_points.is_empty() || !out.adic_points.is_empty() {
        out.generic = true;
    }
    out.canonicalize();
    out
}

/// The geometric part: every torsion, Prüfer and adic point and the generic
/// point, and no line bundle. Closed and quasicompact.
pub fn geometric_part() -> PointSetDescription {
    PointSetDescription {
        lb_part: LbFamily::empty(),
        tors_finite: BTreeSet::new(),
        tors_all_lengths: PointSet::All,
        prufer_points: PointSet::All,
        adic_points: PointSet::All,
        generic: true,
    }
}

/// The spectrum trace of a coherent sheaf: its indecomposable summands as
/// catalog points, with multiplicity collapsed.
pub fn coherent_zg_trace(f: &CoherentSheaf) -> Result<BTreeSet<ZgPoint>> {
    let labels = decompose_sheaf(f)?;
    Ok(labels
        .distinct()
        .map(|l| match l {
            SheafLabel::Lb(n) => ZgPoint::Lb(*n),
            SheafLabel::Tors(pt, m) => ZgPoint::Tors(pt.clone(), *m),
        })
        .collect())
}

/// Whether every point of a trace lies in a description.
pub fn trace_subset(trace: &BTreeSet<ZgPoint>, desc: &PointSetDescription) -> bool {
    trace.iter().all(|p| desc.contains_point(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinear::{Field, Ring, RingElem};
    use crate::sheafp1::{line_bundle, torsion_sheaf};
    use rand::{Rng, SeedableRng};

    fn pt(coeffs: &[i64]) -> ClosedPoint {
        ClosedPoint::finite(RingElem::from_int_coeffs(
            Ring::poly_u(Field::Rationals),
            coeffs,
        ))
        .unwrap()
    }

    #[test]
    fn line_bundles_are_closed_isolated_non_geometric() {
        let a = attributes(&ZgPoint::Lb(0));
        assert!(!a.g_pure_injective);
        assert!(a.isolated && a.closed_singleton && a.is_line_bundle);
    }

    #[test]
    fn torsion_and_generic_points_are_g_pure_injective() {
        assert!(attributes(&ZgPoint::Tors(pt(&[0, 1]), 2)).g_pure_injective);
        assert!(attributes(&ZgPoint::Generic).g_pure_injective);
        assert!(attributes(&ZgPoint::Prufer(pt(&[0, 1]))).g_pure_injective);
        assert!(attributes(&ZgPoint::Adic(ClosedPoint::Infinity)).g_pure_injective);
    }

    #[test]
    fn unbounded_above_family_attracts_adics_and_generic() {
        let s = PointSetDescription {
            lb_part: LbFamily::AllAtLeast(0),
            ..PointSetDescription::empty()
        };
        let c = closure(&s);
        assert_eq!(c.lb_part, LbFamily::AllAtLeast(0));
        assert_eq!(c.adic_points, PointSet::All);
        assert!(c.generic);
        assert!(c.prufer_points.is_empty());
    }

    #[test]
    fn bounded_above_families_are_closed() {
        let s = PointSetDescription {
            lb_part: LbFamily::AllAtMost(0),
            ..PointSetDescription::empty()
        };
        assert_eq!(closure(&s), s);
        let singleton = PointSetDescription::from_points([ZgPoint::Lb(5)]);
        assert_eq!(closure(&singleton), singleton);
    }

    #[test]
    fn torsion_singletons_are_closed() {
        let s = PointSetDescription::from_points([ZgPoint::Tors(pt(&[-1, 1]), 3)]);
        assert_eq!(closure(&s), s);
    }

    #[test]
    fn unbounded_lengths_attract_the_tube_limits() {
        let mut s = PointSetDescription::empty();
        s.tors_all_lengths.insert(pt(&[0, 1]));
        let c = closure(&s);
        assert!(c.prufer_points.contains(&pt(&[0, 1])));
        assert!(c.adic_points.contains(&pt(&[0, 1])));
        assert!(c.generic);
    }

    #[test]
    fn geometric_part_is_closed_and_without_line_bundles() {
        let g = geometric_part();
        assert_eq!(closure(&g), g);
        assert!(g.lb_part.is_empty());
        for n in -3..=3 {
            assert!(!g.contains_point(&ZgPoint::Lb(n)));
        }
        assert!(g.contains_point(&ZgPoint::Generic));
        assert!(g.contains_point(&ZgPoint::Tors(pt(&[0, 1]), 7)));
    }

    #[test]
    fn every_g_pure_injective_point_lies_in_the_geometric_part() {
        let g = geometric_part();
        let points = [
            ZgPoint::Lb(-2),
            ZgPoint::Lb(4),
            ZgPoint::Tors(pt(&[0, 1]), 1),
            ZgPoint::Prufer(ClosedPoint::Infinity),
            ZgPoint::Adic(pt(&[1, 1])),
            ZgPoint::Generic,
        ];
        for p in points {
            assert_eq!(attributes(&p).g_pure_injective, g.contains_point(&p), "{p}");
        }
    }

    #[test]
    fn closure_is_idempotent_and_extensive_on_random_descriptions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let pool = [pt(&[0, 1]), pt(&[-1, 1]), ClosedPoint::Infinity];
        for _ in 0..100 {
            let lb_part = match rng.gen_range(0..4) {
                0 => LbFamily::FiniteSet(
                    (0..rng.gen_range(0..3)).map(|_| rng.gen_range(-4..=4)).collect(),
                ),
                1 => LbFamily::AllAtMost(rng.gen_range(-3..=3)),
                2 => LbFamily::AllAtLeast(rng.gen_range(-3..=3)),
                _ => LbFamily::All,
            };
            let mut s = PointSetDescription {
                lb_part,
                ..PointSetDescription::empty()
            };
            for _ in 0..rng.gen_range(0..3) {
                let p = pool[rng.gen_range(0..pool.len())].clone();
                match rng.gen_range(0..4) {
                    0 => {
                        s.tors_finite.insert((p, rng.gen_range(1..=3)));
                    }
                    1 => s.tors_all_lengths.insert(p),
                    2 => s.prufer_points.insert(p),
                    _ => s.adic_points.insert(p),
                }
            }
            s.canonicalize();
            let c = closure(&s);
            assert!(s.subset_of(&c), "extensive");
            assert_eq!(closure(&c), c, "idempotent");
        }
    }

    #[test]
    fn coherent_traces_translate_labels() {
        let q = Field::Rationals;
        let p0 = pt(&[0, 1]);
        let f = line_bundle(q, 2).direct_sum(&torsion_sheaf(q, &p0, 1).unwrap());
        let trace = coherent_zg_trace(&f).unwrap();
        let expected: BTreeSet<ZgPoint> =
            [ZgPoint::Lb(2), ZgPoint::Tors(p0, 1)].into_iter().collect();
        assert_eq!(trace, expected);
        assert!(coherent_zg_trace(&crate::sheafp1::CoherentSheaf::zero(q))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn trace_membership_matches_d_membership() {
        let q = Field::Rationals;
        let g = geometric_part();
        let p0 = pt(&[0, 1]);
        let inside = torsion_sheaf(q, &p0, 2).unwrap();
        let outside = line_bundle(q, 1).direct_sum(&inside);
        assert!(trace_subset(&coherent_zg_trace(&inside).unwrap(), &g));
        assert!(!trace_subset(&coherent_zg_trace(&outside).unwrap(), &g));
        assert!(crate::homalg::is_in_d(&inside).unwrap());
        assert!(!crate::homalg::is_in_d(&outside).unwrap());
    }

    #[test]
    fn finite_power_products_equal_finite_sums() {
        // the desk-scale shadow of the stored sigma-attribute: a finite
        // power of the structure sheaf decomposes as the matching sum
        assert_eq!(sigma_c_pure_injective(&ZgPoint::Lb(0)), Some(true));
        assert_eq!(sigma_c_pure_injective(&ZgPoint::Generic), None);
        let q = Field::Rationals;
        let o = line_bundle(q, 0);
        let cube = o.direct_sum(&o).direct_sum(&o);
        let labels = crate::sheafp1::decompose_sheaf(&cube).unwrap();
        assert_eq!(labels.count(&SheafLabel::Lb(0)), 3);
        assert_eq!(labels.total(), 3);
    }
}
