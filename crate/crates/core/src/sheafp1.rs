//! Coherent sheaves on the projective line as pairs of chart modules glued
//! over the punctured line. Charts are `k[x]` and `k[y]` modules, the glue
//! is a certified pair of mutually inverse Laurent morphisms between the
//! base-changed charts. The transition convention: the chart-`U` generator
//! of the twist `O(n)` maps to `x^-n` times the chart-`V` generator, so
//! global sections of `O(n)` are the polynomials of degree at most `n`.

use crate::error::{Error, Result};
use crate::exactlinear::{is_irreducible, Field, Ring, RingElem, RingMat};
use crate::fpmod::{self, base_change_laurent, base_change_matrix, FpModule, ModuleMorphism};
use std::collections::BTreeMap;
use std::fmt;

/// A closed point of the line: a monic irreducible polynomial in `x`, or the
/// point at infinity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ClosedPoint {
    Finite(RingElem),
    Infinity,
}

impl ClosedPoint {
    /// Validates monicity and irreducibility over the active field.
    pub fn finite(p: RingElem) -> Result<Self> {
        if p.ring.id != crate::exactlinear::RingId::PolyU {
            return Err(Error::UnsupportedRing("closed points live over k[x]".into()));
        }
        if p.monic() != p || !is_irreducible(&p)? {
            return Err(Error::NotIrreducible(p.to_string()));
        }
        Ok(ClosedPoint::Finite(p))
    }

    pub fn degree(&self) -> i64 {
        match self {
            ClosedPoint::Finite(p) => p.degree().unwrap(),
            ClosedPoint::Infinity => 1,
        }
    }

    pub fn field(&self) -> Option<Field> {
        match self {
            ClosedPoint::Finite(p) => Some(p.ring.field),
            ClosedPoint::Infinity => None,
        }
    }
}

impl fmt::Display for ClosedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedPoint::Finite(p) => write!(f, "{p}"),
            ClosedPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Label of an indecomposable coherent sheaf: a line bundle twist or a
/// torsion sheaf at a closed point with a length.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SheafLabel {
    Lb(i64),
    Tors(ClosedPoint, u32),
}

impl fmt::Display for SheafLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SheafLabel::Lb(n) => write!(f, "O({n})"),
            SheafLabel::Tors(pt, m) => write!(f, "T({pt}, {m})"),
        }
    }
}

/// Multiset of indecomposable labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelMultiset {
    counts: BTreeMap<SheafLabel, usize>,
}

impl LabelMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, label: SheafLabel) {
        *self.counts.entry(label).or_insert(0) += 1;
    }

    pub fn insert_many(&mut self, label: SheafLabel, count: usize) {
        if count > 0 {
            *self.counts.entry(label).or_insert(0) += count;
        }
    }

    pub fn union(&self, other: &LabelMultiset) -> LabelMultiset {
        let mut out = self.clone();
        for (l, c) in &other.counts {
            out.insert_many(l.clone(), *c);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SheafLabel, &usize)> {
        self.counts.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, label: &SheafLabel) -> usize {
        self.counts.get(label).copied().unwrap_or(0)
    }

    pub fn has_line_bundle(&self) -> bool {
        self.counts.keys().any(|l| matches!(l, SheafLabel::Lb(_)))
    }

    pub fn distinct(&self) -> impl Iterator<Item = &SheafLabel> {
        self.counts.keys()
    }

    pub fn from_labels(labels: impl IntoIterator<Item = SheafLabel>) -> Self {
        let mut out = Self::new();
        for l in labels {
            out.insert(l);
        }
        out
    }
}

impl fmt::Display for LabelMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (label, count) in &self.counts {
            for _ in 0..*count {
                if !first {
                    write!(f, " ++ ")?;
                }
                write!(f, "{label}")?;
                first = false;
            }
        }
        Ok(())
    }
}

/// A coherent sheaf: chart modules over `k[x]` and `k[y]` together with a
/// certified pair of mutually inverse Laurent isomorphisms between their
/// base changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherentSheaf {
    pub chart_u: FpModule,
    pub chart_v: FpModule,
    pub glue_u_to_v: RingMat,
    pub glue_v_to_u: RingMat,
}

impl CoherentSheaf {
    /// Builds and certifies: glue matrices are morphisms between the
    /// base-changed charts and compose to identities on both sides.
    pub fn new(
        chart_u: FpModule,
        chart_v: FpModule,
        glue_u_to_v: RingMat,
        glue_v_to_u: RingMat,
    ) -> Result<Self> {
        let field = chart_u.ring.field;
        if chart_u.ring.id != crate::exactlinear::RingId::PolyU
            || chart_v.ring.id != crate::exactlinear::RingId::PolyV
        {
            return Err(Error::UnsupportedRing("charts must live over k[x] and k[y]".into()));
        }
        if chart_v.ring.field != field {
            return Err(Error::RingMismatch("chart fields differ".into()));
        }
        let laurent = Ring::laurent(field);
        if glue_u_to_v.ring != laurent || glue_v_to_u.ring != laurent {
            return Err(Error::RingMismatch("glue must live over the Laurent ring".into()));
        }
        if glue_u_to_v.rows() != chart_v.gens
            || glue_u_to_v.cols() != chart_u.gens
            || glue_v_to_u.rows() != chart_u.gens
            || glue_v_to_u.cols() != chart_v.gens
        {
            return Err(Error::ShapeMismatch("glue shapes do not match chart generators".into()));
        }

        let base_u = base_change_laurent(&chart_u)?;
        let base_v = base_change_laurent(&chart_v)?;
        let nf_u = base_u.nf()?;
        let nf_v = base_v.nf()?;

        // morphism conditions
        for j in 0..base_u.relations.cols() {
            let img = glue_u_to_v.mul_vec(&base_u.relations.column(j));
            if !nf_v.is_zero_elem(&img) {
                return Err(Error::BadGlue("u-to-v does not respect relations".into()));
            }
        }
        for j in 0..base_v.relations.cols() {
            let img = glue_v_to_u.mul_vec(&base_v.relations.column(j));
            if !nf_u.is_zero_elem(&img) {
                return Err(Error::BadGlue("v-to-u does not respect relations".into()));
            }
        }
        // two-sided inverse certificates
        let vu_uv = glue_v_to_u.mul(&glue_u_to_v).sub(&RingMat::identity(laurent, chart_u.gens));
        for j in 0..chart_u.gens {
            if !nf_u.is_zero_elem(&vu_uv.column(j)) {
                return Err(Error::BadGlue("v∘u is not the identity".into()));
            }
        }
        let uv_vu = glue_u_to_v.mul(&glue_v_to_u).sub(&RingMat::identity(laurent, chart_v.gens));
        for j in 0..chart_v.gens {
            if !nf_v.is_zero_elem(&uv_vu.column(j)) {
                return Err(Error::BadGlue("u∘v is not the identity".into()));
            }
        }
        Ok(CoherentSheaf { chart_u, chart_v, glue_u_to_v, glue_v_to_u })
    }

    pub fn field(&self) -> Field {
        self.chart_u.ring.field
    }

    pub fn zero(field: Field) -> Self {
        let laurent = Ring::laurent(field);
        CoherentSheaf {
            chart_u: FpModule::zero(Ring::poly_u(field)),
            chart_v: FpModule::zero(Ring::poly_v(field)),
            glue_u_to_v: RingMat::zeros(laurent, 0, 0),
            glue_v_to_u: RingMat::zeros(laurent, 0, 0),
        }
    }

    pub fn is_zero_sheaf(&self) -> Result<bool> {
        Ok(self.chart_u.is_zero_module()? && self.chart_v.is_zero_module()?)
    }

    pub fn direct_sum(&self, other: &CoherentSheaf) -> CoherentSheaf {
        CoherentSheaf {
            chart_u: self.chart_u.direct_sum(&other.chart_u),
            chart_v: self.chart_v.direct_sum(&other.chart_v),
            glue_u_to_v: self.glue_u_to_v.block_diag(&other.glue_u_to_v),
            glue_v_to_u: self.glue_v_to_u.block_diag(&other.glue_v_to_u),
        }
    }

    /// Largest degree appearing in presentations and glue; windows and
    /// resolution twists are derived from this.
    pub fn data_degree(&self) -> i64 {
        self.chart_u
            .max_degree_span()
            .max(self.chart_v.max_degree_span())
            .max(self.glue_u_to_v.max_degree_span())
            .max(self.glue_v_to_u.max_degree_span())
    }

    pub fn base_u(&self) -> Result<FpModule> {
        base_change_laurent(&self.chart_u)
    }

    pub fn base_v(&self) -> Result<FpModule> {
        base_change_laurent(&self.chart_v)
    }
}

/// The line bundle `O(n)`.
pub fn line_bundle(field: Field, n: i64) -> CoherentSheaf {
    let laurent = Ring::laurent(field);
    let one = field.one();
    CoherentSheaf {
        chart_u: FpModule::free(Ring::poly_u(field), 1),
        chart_v: FpModule::free(Ring::poly_v(field), 1),
        glue_u_to_v: RingMat::from_rows(laurent, vec![vec![RingElem::monomial(laurent, one.clone(), -n)]]),
        glue_v_to_u: RingMat::from_rows(laurent, vec![vec![RingElem::monomial(laurent, one, n)]]),
    }
}

/// The torsion sheaf of given length at a closed point. At a finite point
/// away from `x = 0` both charts carry cyclic torsion modules identified by
/// the canonical glue; at `x = 0` and at infinity one chart vanishes.
pub fn torsion_sheaf(field: Field, pt: &ClosedPoint, length: u32) -> Result<CoherentSheaf> {
    if length == 0 {
        return Err(Error::ZeroLength);
    }
    let ring_u = Ring::poly_u(field);
    let ring_v = Ring::poly_v(field);
    let laurent = Ring::laurent(field);
    match pt {
        ClosedPoint::Infinity => {
            let m_v = FpModule::cyclic(&RingElem::variable(ring_v).pow(length));
            CoherentSheaf::new(
                FpModule::zero(ring_u),
                m_v,
                RingMat::zeros(laurent, 1, 0),
                RingMat::zeros(laurent, 0, 1),
            )
        }
        ClosedPoint::Finite(p) => {
            if p.ring.field != field {
                return Err(Error::RingMismatch("point field differs".into()));
            }
            if *p == RingElem::variable(ring_u) {
                let m_u = FpModule::cyclic(&p.pow(length));
                return CoherentSheaf::new(
                    m_u,
                    FpModule::zero(ring_v),
                    RingMat::zeros(laurent, 0, 1),
                    RingMat::zeros(laurent, 1, 0),
                );
            }
            let m_u = FpModule::cyclic(&p.pow(length));
            let p_rec = p.reciprocal(ring_v);
            let m_v = FpModule::cyclic(&p_rec.pow(length));
            CoherentSheaf::new(
                m_u,
                m_v,
                RingMat::identity(laurent, 1),
                RingMat::identity(laurent, 1),
            )
        }
    }
}

/// Builds the sheaf of a label.
pub fn sheaf_of_label(field: Field, label: &SheafLabel) -> Result<CoherentSheaf> {
    match label {
        SheafLabel::Lb(n) => Ok(line_bundle(field, *n)),
        SheafLabel::Tors(pt, m) => torsion_sheaf(field, pt, *m),
    }
}

/// Direct sum of labelled indecomposables.
pub fn sheaf_of_labels(field: Field, labels: &LabelMultiset) -> Result<CoherentSheaf> {
    let mut acc = CoherentSheaf::zero(field);
    for (label, count) in labels.iter() {
        for _ in 0..*count {
            acc = acc.direct_sum(&sheaf_of_label(field, label)?);
        }
    }
    Ok(acc)
}

/// Twist by `n`: the glue picks up `x^-n`, charts are untouched.
pub fn twist(f: &CoherentSheaf, n: i64) -> CoherentSheaf {
    let laurent = Ring::laurent(f.field());
    let one = f.field().one();
    let down = RingElem::monomial(laurent, one.clone(), -n);
    let up = RingElem::monomial(laurent, one, n);
    CoherentSheaf {
        chart_u: f.chart_u.clone(),
        chart_v: f.chart_v.clone(),
        glue_u_to_v: f.glue_u_to_v.scale(&down),
        glue_v_to_u: f.glue_v_to_u.scale(&up),
    }
}

/// Chartwise tensor product with the induced glue.
pub fn tensor_sheaf(f: &CoherentSheaf, g: &CoherentSheaf) -> Result<CoherentSheaf> {
    let chart_u = fpmod::tensor_module(&f.chart_u, &g.chart_u)?;
    let chart_v = fpmod::tensor_module(&f.chart_v, &g.chart_v)?;
    let glue_u_to_v = f.glue_u_to_v.kronecker(&g.glue_u_to_v);
    let glue_v_to_u = f.glue_v_to_u.kronecker(&g.glue_v_to_u);
    let raw = CoherentSheaf { chart_u, chart_v, glue_u_to_v, glue_v_to_u };
    minimize_sheaf(&raw).map(|(s, _, _)| s)
}

/// A sheaf morphism is a pair of chart morphisms whose square with the glue
/// commutes exactly over the Laurent ring.
#[derive(Debug, Clone)]
pub struct SheafMorphism {
    pub source: CoherentSheaf,
    pub target: CoherentSheaf,
    pub map_u: ModuleMorphism,
    pub map_v: ModuleMorphism,
}

impl SheafMorphism {
    pub fn new(
        source: CoherentSheaf,
        target: CoherentSheaf,
        matrix_u: RingMat,
        matrix_v: RingMat,
    ) -> Result<Self> {
        let map_u = ModuleMorphism::new(source.chart_u.clone(), target.chart_u.clone(), matrix_u)?;
        let map_v = ModuleMorphism::new(source.chart_v.clone(), target.chart_v.clone(), matrix_v)?;
        let morphism = SheafMorphism { source, target, map_u, map_v };
        morphism.certify_square()?;
        Ok(morphism)
    }

    pub fn from_chart_morphisms(
        source: CoherentSheaf,
        target: CoherentSheaf,
        map_u: ModuleMorphism,
        map_v: ModuleMorphism,
    ) -> Result<Self> {
        let morphism = SheafMorphism { source, target, map_u, map_v };
        morphism.certify_square()?;
        Ok(morphism)
    }

    fn certify_square(&self) -> Result<()> {
        let laurent = Ring::laurent(self.source.field());
        let fu = base_change_matrix(&self.map_u.matrix, laurent);
        let fv = base_change_matrix(&self.map_v.matrix, laurent);
        let lhs = self.target.glue_u_to_v.mul(&fu);
        let rhs = fv.mul(&self.source.glue_u_to_v);
        let diff = lhs.sub(&rhs);
        let base_v_target = self.target.base_v()?;
        let nf = base_v_target.nf()?;
        for j in 0..diff.cols() {
            if !nf.is_zero_elem(&diff.column(j)) {
                return Err(Error::Internal(
                    "chart morphisms do not commute with the glue".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn identity(f: &CoherentSheaf) -> Self {
        SheafMorphism {
            source: f.clone(),
            target: f.clone(),
            map_u: ModuleMorphism::identity(&f.chart_u),
            map_v: ModuleMorphism::identity(&f.chart_v),
        }
    }

    pub fn zero(source: &CoherentSheaf, target: &CoherentSheaf) -> Self {
        SheafMorphism {
            source: source.clone(),
            target: target.clone(),
            map_u: ModuleMorphism::zero(&source.chart_u, &target.chart_u),
            map_v: ModuleMorphism::zero(&source.chart_v, &target.chart_v),
        }
    }

    pub fn then(&self, other: &SheafMorphism) -> SheafMorphism {
        SheafMorphism {
            source: self.source.clone(),
            target: other.target.clone(),
            map_u: self.map_u.then(&other.map_u),
            map_v: self.map_v.then(&other.map_v),
        }
    }

    pub fn add(&self, other: &SheafMorphism) -> SheafMorphism {
        SheafMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            map_u: self.map_u.add(&other.map_u),
            map_v: self.map_v.add(&other.map_v),
        }
    }

    pub fn direct_sum(&self, other: &SheafMorphism) -> SheafMorphism {
        SheafMorphism {
            source: self.source.direct_sum(&other.source),
            target: self.target.direct_sum(&other.target),
            map_u: self.map_u.direct_sum(&other.map_u),
            map_v: self.map_v.direct_sum(&other.map_v),
        }
    }

    pub fn is_zero_morphism(&self) -> Result<bool> {
        Ok(self.map_u.is_zero_morphism()? && self.map_v.is_zero_morphism()?)
    }

    pub fn is_mono(&self) -> Result<bool> {
        Ok(fpmod::is_injective(&self.map_u)? && fpmod::is_injective(&self.map_v)?)
    }

    pub fn is_epi(&self) -> Result<bool> {
        Ok(fpmod::is_surjective(&self.map_u)? && fpmod::is_surjective(&self.map_v)?)
    }

    pub fn is_isomorphism(&self) -> Result<bool> {
        Ok(self.is_mono()? && self.is_epi()?)
    }
}

/// A morphism of line bundles `O(a) -> O(b)` is determined by a `k[x]`
/// polynomial of degree at most `b - a`; the `k[y]` part is the matching
/// reciprocal.
pub fn line_bundle_map(
    field: Field,
    a: i64,
    b: i64,
    u_poly: &RingElem,
) -> Result<SheafMorphism> {
    let ring_v = Ring::poly_v(field);
    if let Some(d) = u_poly.degree() {
        if d > b - a {
            return Err(Error::Internal("polynomial degree exceeds the twist gap".into()));
        }
    }
    let v_poly = RingElem::from_coeffs(
        ring_v,
        u_poly.terms().map(|(e, c)| (b - a - e, c.clone())),
    );
    SheafMorphism::new(
        line_bundle(field, a),
        line_bundle(field, b),
        RingMat::from_rows(u_poly.ring, vec![vec![u_poly.clone()]]),
        RingMat::from_rows(ring_v, vec![vec![v_poly]]),
    )
}

/// Normalizes chart presentations to their minimal diagonal form and
/// transports the glue; the result is certified again.
pub fn minimize_sheaf(
    f: &CoherentSheaf,
) -> Result<(CoherentSheaf, SheafMorphism, SheafMorphism)> {
    let laurent = Ring::laurent(f.field());
    let (min_u, to_u, from_u) = fpmod::minimize(&f.chart_u)?;
    let (min_v, to_v, from_v) = fpmod::minimize(&f.chart_v)?;
    let to_u_l = base_change_matrix(&to_u.matrix, laurent);
    let from_u_l = base_change_matrix(&from_u.matrix, laurent);
    let to_v_l = base_change_matrix(&to_v.matrix, laurent);
    let from_v_l = base_change_matrix(&from_v.matrix, laurent);
    let glue_u_to_v = to_v_l.mul(&f.glue_u_to_v).mul(&from_u_l);
    let glue_v_to_u = to_u_l.mul(&f.glue_v_to_u).mul(&from_v_l);
    let min = CoherentSheaf::new(min_u, min_v, glue_u_to_v, glue_v_to_u)?;
    let to_min = SheafMorphism {
        source: f.clone(),
        target: min.clone(),
        map_u: to_u,
        map_v: to_v,
    };
    let from_min = SheafMorphism {
        source: min.clone(),
        target: f.clone(),
        map_u: from_u,
        map_v: from_v,
    };
    Ok((min, to_min, from_min))
}

/// Kernel, image and cokernel of a sheaf morphism, with the connecting
/// morphisms. Chart modules are minimized and the induced glue is certified.
#[derive(Debug, Clone)]
pub struct KernelImageCokernel {
    pub kernel: CoherentSheaf,
    pub kernel_inclusion: SheafMorphism,
    pub image: CoherentSheaf,
    pub image_inclusion: SheafMorphism,
    pub image_projection: SheafMorphism,
    pub cokernel: CoherentSheaf,
    pub cokernel_projection: SheafMorphism,
}

pub fn kernel_image_cokernel(f: &SheafMorphism) -> Result<KernelImageCokernel> {
    let field = f.source.field();
    let laurent = Ring::laurent(field);

    // kernels chartwise, glue restricted by solving
    let (ker_u, incl_u) = fpmod::kernel(&f.map_u)?;
    let (ker_v, incl_v) = fpmod::kernel(&f.map_v)?;
    let ker_glue_uv = restrict_glue(
        &f.source.glue_u_to_v,
        &incl_u.matrix,
        &incl_v.matrix,
        &f.source.base_v()?,
        laurent,
    )?;
    let ker_glue_vu = restrict_glue(
        &f.source.glue_v_to_u,
        &incl_v.matrix,
        &incl_u.matrix,
        &f.source.base_u()?,
        laurent,
    )?;
    let kernel = CoherentSheaf::new(
        ker_u.clone(),
        ker_v.clone(),
        ker_glue_uv,
        ker_glue_vu,
    )?;
    let kernel_inclusion = SheafMorphism::from_chart_morphisms(
        kernel.clone(),
        f.source.clone(),
        rebase_morphism(&kernel.chart_u, &f.source.chart_u, &incl_u.matrix)?,
        rebase_morphism(&kernel.chart_v, &f.source.chart_v, &incl_v.matrix)?,
    )?;

    // images: epi from the source, mono into the target
    let (im_u, mono_u, epi_u) = fpmod::image(&f.map_u)?;
    let (im_v, mono_v, epi_v) = fpmod::image(&f.map_v)?;
    // glue transported along the epi and its section
    let from_epi_u = section_of_surjection(&epi_u)?;
    let from_epi_v = section_of_surjection(&epi_v)?;
    let im_glue_uv = base_change_matrix(&epi_v.matrix, laurent)
        .mul(&f.source.glue_u_to_v)
        .mul(&base_change_matrix(&from_epi_u, laurent));
    let im_glue_vu = base_change_matrix(&epi_u.matrix, laurent)
        .mul(&f.source.glue_v_to_u)
        .mul(&base_change_matrix(&from_epi_v, laurent));
    let image = CoherentSheaf::new(
        im_u.clone(),
        im_v.clone(),
        im_glue_uv,
        im_glue_vu,
    )?;
    let image_inclusion = SheafMorphism::from_chart_morphisms(
        image.clone(),
        f.target.clone(),
        rebase_morphism(&image.chart_u, &f.target.chart_u, &mono_u.matrix)?,
        rebase_morphism(&image.chart_v, &f.target.chart_v, &mono_v.matrix)?,
    )?;
    let image_projection = SheafMorphism::from_chart_morphisms(
        f.source.clone(),
        image.clone(),
        rebase_morphism(&f.source.chart_u, &image.chart_u, &epi_u.matrix)?,
        rebase_morphism(&f.source.chart_v, &image.chart_v, &epi_v.matrix)?,
    )?;

    // cokernels with glue transported along projection and section
    let (cok_u, proj_u) = fpmod::cokernel(&f.map_u)?;
    let (cok_v, proj_v) = fpmod::cokernel(&f.map_v)?;
    let sect_u = section_of_surjection(&proj_u)?;
    let sect_v = section_of_surjection(&proj_v)?;
    let cok_glue_uv = base_change_matrix(&proj_v.matrix, laurent)
        .mul(&f.target.glue_u_to_v)
        .mul(&base_change_matrix(&sect_u, laurent));
    let cok_glue_vu = base_change_matrix(&proj_u.matrix, laurent)
        .mul(&f.target.glue_v_to_u)
        .mul(&base_change_matrix(&sect_v, laurent));
    let cokernel = CoherentSheaf::new(
        cok_u.clone(),
        cok_v.clone(),
        cok_glue_uv,
        cok_glue_vu,
    )?;
    let cokernel_projection = SheafMorphism::from_chart_morphisms(
        f.target.clone(),
        cokernel.clone(),
        rebase_morphism(&f.target.chart_u, &cokernel.chart_u, &proj_u.matrix)?,
        rebase_morphism(&f.target.chart_v, &cokernel.chart_v, &proj_v.matrix)?,
    )?;

    Ok(KernelImageCokernel {
        kernel,
        kernel_inclusion,
        image,
        image_inclusion,
        image_projection,
        cokernel,
        cokernel_projection,
    })
}

fn rebase_morphism(src: &FpModule, tgt: &FpModule, matrix: &RingMat) -> Result<ModuleMorphism> {
    ModuleMorphism::new(src.clone(), tgt.clone(), matrix.clone())
}

/// Solves `incl_tgt ∘ w = glue ∘ incl_src` modulo the ambient relations,
/// returning the restricted glue `w`.
fn restrict_glue(
    glue: &RingMat,
    incl_src: &RingMat,
    incl_tgt: &RingMat,
    ambient_tgt: &FpModule,
    laurent: Ring,
) -> Result<RingMat> {
    let incl_src_l = base_change_matrix(incl_src, laurent);
    let incl_tgt_l = base_change_matrix(incl_tgt, laurent);
    let rhs = glue.mul(&incl_src_l);
    let stacked = incl_tgt_l.hstack(&ambient_tgt.relations);
    let sol = crate::exactlinear::solve_linear(&stacked, &rhs)?
        .ok_or_else(|| Error::BadGlue("glue does not restrict to the kernel".into()))?;
    let k = incl_tgt_l.cols();
    Ok(RingMat::from_fn(laurent, k, rhs.cols(), |i, j| sol.particular.at(i, j).clone()))
}

/// A right inverse modulo relations of a surjective chart morphism, used to
/// transport glue along image and cokernel projections.
fn section_of_surjection(epi: &ModuleMorphism) -> Result<RingMat> {
    let identity = RingMat::identity(epi.target.ring, epi.target.gens);
    let stacked = epi.matrix.hstack(&epi.target.relations);
    let sol = crate::exactlinear::solve_linear(&stacked, &identity)?
        .ok_or_else(|| Error::Internal("surjection has no section".into()))?;
    Ok(RingMat::from_fn(epi.matrix.ring, epi.matrix.cols(), epi.target.gens, |i, j| {
        sol.particular.at(i, j).clone()
    }))
}

/// A certified short exact sequence of coherent sheaves.
#[derive(Debug, Clone)]
pub struct ShortExactSeq {
    pub first: SheafMorphism,
    pub second: SheafMorphism,
}

impl ShortExactSeq {
    /// Certifies chartwise: `first` injective, `second` surjective, the
    /// composite zero, and the kernel of `second` contained in the image of
    /// `first`.
    pub fn new(first: SheafMorphism, second: SheafMorphism) -> Result<Self> {
        if !first.is_mono()? {
            return Err(Error::NotExact("left map is not injective".into()));
        }
        if !second.is_epi()? {
            return Err(Error::NotExact("right map is not surjective".into()));
        }
        if !first.then(&second).is_zero_morphism()? {
            return Err(Error::NotExact("composite is nonzero".into()));
        }
        chart_middle_exact(&first.map_u, &second.map_u)?;
        chart_middle_exact(&first.map_v, &second.map_v)?;
        Ok(ShortExactSeq { first, second })
    }

    pub fn sub(&self) -> &CoherentSheaf {
        &self.first.source
    }

    pub fn middle(&self) -> &CoherentSheaf {
        &self.first.target
    }

    pub fn quotient(&self) -> &CoherentSheaf {
        &self.second.target
    }

    /// The split sequence `0 -> a -> a ⊕ c -> c -> 0`.
    pub fn split(a: &CoherentSheaf, c: &CoherentSheaf) -> Result<ShortExactSeq> {
        let middle = a.direct_sum(c);
        let ring_u = a.chart_u.ring;
        let ring_v = a.chart_v.ring;
        let inc_u = RingMat::identity(ring_u, a.chart_u.gens)
            .vstack(&RingMat::zeros(ring_u, c.chart_u.gens, a.chart_u.gens));
        let inc_v = RingMat::identity(ring_v, a.chart_v.gens)
            .vstack(&RingMat::zeros(ring_v, c.chart_v.gens, a.chart_v.gens));
        let pr_u = RingMat::zeros(ring_u, c.chart_u.gens, a.chart_u.gens)
            .hstack(&RingMat::identity(ring_u, c.chart_u.gens));
        let pr_v = RingMat::zeros(ring_v, c.chart_v.gens, a.chart_v.gens)
            .hstack(&RingMat::identity(ring_v, c.chart_v.gens));
        let first = SheafMorphism::new(a.clone(), middle.clone(), inc_u, inc_v)?;
        let second = SheafMorphism::new(middle, c.clone(), pr_u, pr_v)?;
        ShortExactSeq::new(first, second)
    }
}

/// Middle exactness on a chart: every kernel generator of `g` lies in the
/// image of `f` (modulo relations).
fn chart_middle_exact(f: &ModuleMorphism, g: &ModuleMorphism) -> Result<()> {
    let (_, incl) = fpmod::kernel(g)?;
    let stacked = f.matrix.hstack(&f.target.relations);
    for j in 0..incl.matrix.cols() {
        let col = RingMat::from_columns(
            f.matrix.ring,
            f.target.gens,
            vec![incl.matrix.column(j)],
        );
        if crate::exactlinear::solve_linear(&stacked, &col)?.is_none() {
            return Err(Error::NotExact("kernel escapes the image on a chart".into()));
        }
    }
    Ok(())
}


/// Krull–Schmidt decomposition into labelled indecomposables, computed by
/// tilting to quiver representations, decomposing there and translating
/// labels back. The result is certified by an explicit isomorphism with the
/// labelled direct sum.
pub fn decompose_sheaf(f: &CoherentSheaf) -> Result<LabelMultiset> {
    decompose_sheaf_certified(f).map(|(labels, _)| labels)
}

/// As [`decompose_sheaf`], also returning the certifying isomorphism.
pub fn decompose_sheaf_certified(f: &CoherentSheaf) -> Result<(LabelMultiset, SheafMorphism)> {
    let tilted = crate::kronecker::tilt(f)?;
    let dec0 = crate::kronecker::decompose_rep(&tilted.deg0)?;
    let dec1 = crate::kronecker::decompose_rep(&tilted.deg1)?;
    let mut labels = LabelMultiset::new();
    for (l, c) in &dec0.labels {
        labels.insert_many(crate::kronecker::sheaf_label_from_rep(l, 0)?, *c);
    }
    for (l, c) in &dec1.labels {
        labels.insert_many(crate::kronecker::sheaf_label_from_rep(l, 1)?, *c);
    }
    let iso = iso_to_labelled_sum(f, &labels)?;
    Ok((labels, iso))
}

/// Deterministic pseudo-random search for an isomorphism between `f` and the
/// direct sum built from `labels`, assembled blockwise from Hom bases.
pub fn iso_to_labelled_sum(f: &CoherentSheaf, labels: &LabelMultiset) -> Result<SheafMorphism> {
    use rand::{Rng, SeedableRng};
    let field = f.field();
    let sum = sheaf_of_labels(field, labels)?;
    if f.is_zero_sheaf()? && sum.is_zero_sheaf()? {
        return SheafMorphism::from_chart_morphisms(
            f.clone(),
            sum.clone(),
            ModuleMorphism::new_unchecked(
                f.chart_u.clone(),
                sum.chart_u.clone(),
                RingMat::zeros(f.chart_u.ring, sum.chart_u.gens, f.chart_u.gens),
            ),
            ModuleMorphism::new_unchecked(
                f.chart_v.clone(),
                sum.chart_v.clone(),
                RingMat::zeros(f.chart_v.ring, sum.chart_v.gens, f.chart_v.gens),
            ),
        );
    }
    // Hom(f, Z) bases per distinct label
    let mut block_bases = Vec::new();
    for (label, count) in labels.iter() {
        let z = sheaf_of_label(field, label)?;
        let basis = crate::homalg::global_hom(f, &z)?;
        if basis.dim() == 0 {
            return Err(Error::IsoSearchExhausted);
        }
        block_bases.push((label.clone(), *count, z, basis));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7368_6561);
    for _attempt in 0..128 {
        let mut mat_u: Option<RingMat> = None;
        let mut mat_v: Option<RingMat> = None;
        for (_, count, z, basis) in &block_bases {
            for _ in 0..*count {
                let mut bu = RingMat::zeros(z.chart_u.ring, z.chart_u.gens, f.chart_u.gens);
                let mut bv = RingMat::zeros(z.chart_v.ring, z.chart_v.gens, f.chart_v.gens);
                for b in &basis.basis {
                    let c = match field {
                        Field::Rationals => field.from_i64(rng.gen_range(-9i64..=9)),
                        Field::Prime(p) => {
                            crate::exactlinear::Scalar::Mod(rng.gen_range(0..p))
                        }
                    };
                    bu = bu.add(&b.map_u.matrix.scale(&RingElem::constant(z.chart_u.ring, c.clone())));
                    bv = bv.add(&b.map_v.matrix.scale(&RingElem::constant(z.chart_v.ring, c)));
                }
                mat_u = Some(match mat_u {
                    None => bu,
                    Some(m) => m.vstack(&bu),
                });
                mat_v = Some(match mat_v {
                    None => bv,
                    Some(m) => m.vstack(&bv),
                });
            }
        }
        let mat_u = mat_u.unwrap_or_else(|| RingMat::zeros(sum.chart_u.ring, 0, f.chart_u.gens));
        let mat_v = mat_v.unwrap_or_else(|| RingMat::zeros(sum.chart_v.ring, 0, f.chart_v.gens));
        let candidate = SheafMorphism::new(f.clone(), sum.clone(), mat_u, mat_v)?;
        if candidate.is_isomorphism()? {
            return Ok(candidate);
        }
    }
    Err(Error::IsoSearchExhausted)
}

#[cfg(test)]
mod decompose_tests {
    use super::*;
    use crate::homalg::{cech, is_in_d};

    fn q() -> Field {
        Field::Rationals
    }

    fn xp(coeffs: &[i64]) -> RingElem {
        RingElem::from_int_coeffs(Ring::poly_u(q()), coeffs)
    }

    #[test]
    fn single_line_bundle_decomposes_to_itself() {
        let labels = decompose_sheaf(&line_bundle(q(), 5)).unwrap();
        assert_eq!(labels, LabelMultiset::from_labels([SheafLabel::Lb(5)]));
    }

    #[test]
    fn sum_with_torsion_survives_re_presentation() {
        use rand::SeedableRng;
        let pt = ClosedPoint::finite(xp(&[0, 1])).unwrap();
        let expected = LabelMultiset::from_labels([
            SheafLabel::Lb(1),
            SheafLabel::Tors(pt.clone(), 2),
        ]);
        let f = sheaf_of_labels(q(), &expected).unwrap();
        // conjugate the chart presentations by a random automorphism
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let g = crate::samples::re_present(&f, &mut rng).unwrap();
        assert_eq!(decompose_sheaf(&g).unwrap(), expected);
    }

    #[test]
    fn generic_extension_of_twists_is_the_balanced_bundle() {
        // cokernel of a generic map O(-1) -> O(0)^2 is O(1): the dimension
        // oracle h0 = 2, h1 = 0 separates O(1) from O(0) ⊕ T
        let o0 = line_bundle(q(), 0);
        let middle = o0.direct_sum(&o0);
        let fu = RingMat::from_rows(
            Ring::poly_u(q()),
            vec![vec![xp(&[0, 1])], vec![xp(&[1, 1])]],
        );
        let ring_v = Ring::poly_v(q());
        let fv = RingMat::from_rows(
            ring_v,
            vec![
                vec![RingElem::from_int_coeffs(ring_v, &[1])],
                vec![RingElem::from_int_coeffs(ring_v, &[1, 1])],
            ],
        );
        let f = SheafMorphism::new(line_bundle(q(), -1), middle, fu, fv).unwrap();
        let kic = kernel_image_cokernel(&f).unwrap();
        assert!(kic.kernel.is_zero_sheaf().unwrap());
        let datum = cech(&kic.cokernel).unwrap();
        assert_eq!((datum.h0, datum.h1), (2, 0));
        let labels = decompose_sheaf(&kic.cokernel).unwrap();
        assert_eq!(labels, LabelMultiset::from_labels([SheafLabel::Lb(1)]));
    }

    #[test]
    fn membership_examples() {
        let pt = ClosedPoint::finite(xp(&[-1, 1])).unwrap();
        assert!(!is_in_d(&line_bundle(q(), 3)).unwrap());
        assert!(is_in_d(&torsion_sheaf(q(), &pt, 2).unwrap()).unwrap());
        assert!(is_in_d(&CoherentSheaf::zero(q())).unwrap());
    }

    #[test]
    fn twist_fixes_torsion_labels() {
        let pt = ClosedPoint::finite(xp(&[0, 1])).unwrap();
        let t = torsion_sheaf(q(), &pt, 2).unwrap();
        let labels = decompose_sheaf(&twist(&t, 3)).unwrap();
        assert_eq!(labels, LabelMultiset::from_labels([SheafLabel::Tors(pt, 2)]));
    }

    #[test]
    fn tensor_distributes_over_sums() {
        let pt = ClosedPoint::finite(xp(&[-1, 1])).unwrap();
        let f = line_bundle(q(), 1).direct_sum(&torsion_sheaf(q(), &pt, 1).unwrap());
        let g = line_bundle(q(), -1);
        let t = tensor_sheaf(&f, &g).unwrap();
        let labels = decompose_sheaf(&t).unwrap();
        assert_eq!(
            labels,
            LabelMultiset::from_labels([SheafLabel::Lb(0), SheafLabel::Tors(pt, 1)])
        );
    }
}
