//! Čech cohomology on the two-chart cover, global Hom and Ext¹ of coherent
//! sheaves, and the membership test for the definable class cut out by the
//! torsion part. All cohomology is computed on a degree window that is
//! widened until two consecutive widenings agree.

use crate::error::{Error, Result};
use crate::exactlinear::{KMat, Ring, RingElem, RingId, RingMat, Scalar};
use crate::fpmod::{self, ModuleMorphism, ModuleNf};
use crate::sheafp1::{
    kernel_image_cokernel, line_bundle, twist, CoherentSheaf, SheafMorphism, ShortExactSeq,
};

/// How far the stabilization loop is allowed to push the window.
const WINDOW_BUDGET: i64 = 200;

/// Čech data of a coherent sheaf on the standard cover: compatible section
/// pairs, overlap-section cosets and the measured window.
#[derive(Debug, Clone)]
pub struct CechDatum {
    pub h0: usize,
    pub h1: usize,
    pub h0_basis: Vec<(Vec<RingElem>, Vec<RingElem>)>,
    pub h1_basis: Vec<Vec<RingElem>>,
    pub window: (i64, i64),
}

/// Internal windowed model of the two-term Čech complex of `f` twisted by
/// `t`: the differential sends a section pair `(s, v)` to
/// `s - x^t * glue_vu * v` in the base-changed `U`-chart.
pub struct CechModel {
    pub sheaf: CoherentSheaf,
    pub twist_by: i64,
    pub h0: usize,
    pub h1: usize,
    domain_window: (i64, i64),
    measured_window: (i64, i64),
    ambient_window: (i64, i64),
    nf_u: ModuleNf,
    nf_v: ModuleNf,
    nf_base: ModuleNf,
    image: KMat,
    kernel: Vec<Vec<Scalar>>,
    coker_reps: Vec<Vec<Scalar>>,
}

fn vec_base_change(v: &[RingElem], laurent: Ring) -> Vec<RingElem> {
    v.iter()
        .map(|e| match e.ring.id {
            RingId::PolyV => e.substitute_inverse(laurent),
            _ => e.cast(laurent),
        })
        .collect()
}

impl CechModel {
    fn build(f: &CoherentSheaf, twist_by: i64, w: i64) -> Result<CechModel> {
        let field = f.field();
        let laurent = Ring::laurent(field);
        let margin = f.data_degree() + twist_by.abs() + 2;
        let nf_u = f.chart_u.nf()?;
        let nf_v = f.chart_v.nf()?;
        let base = f.base_u()?;
        let nf_base = base.nf()?;
        let domain_window = (-w, w);
        let measured_window = (-(w - margin).max(1), (w - margin).max(1));

        let basis_u = nf_u.k_basis(domain_window);
        let basis_v = nf_v.k_basis(domain_window);

        // images of domain basis vectors in the base-changed U chart
        let mut images: Vec<Vec<RingElem>> = Vec::with_capacity(basis_u.len() + basis_v.len());
        for (i, e) in &basis_u {
            let mut y = vec![RingElem::zero(f.chart_u.ring); f.chart_u.gens];
            y[*i] = RingElem::monomial(f.chart_u.ring, field.one(), *e);
            let x = nf_u.from_diag(&y);
            let xl = vec_base_change(&x, laurent);
            images.push(nf_base.reduce(&xl));
        }
        let twist_unit = RingElem::monomial(laurent, field.one(), twist_by);
        for (i, e) in &basis_v {
            let mut y = vec![RingElem::zero(f.chart_v.ring); f.chart_v.gens];
            y[*i] = RingElem::monomial(f.chart_v.ring, field.one(), *e);
            let x = nf_v.from_diag(&y);
            let xl = vec_base_change(&x, laurent);
            let mapped = f.glue_v_to_u.mul_vec(&xl);
            let negated: Vec<RingElem> =
                mapped.iter().map(|c| c.mul(&twist_unit).neg()).collect();
            images.push(nf_base.reduce(&negated));
        }

        // ambient window: hull of measured window and everything the images touch
        let mut lo = measured_window.0;
        let mut hi = measured_window.1;
        for img in &images {
            for e in img {
                if let (Some(l), Some(h)) = (e.low_degree(), e.degree()) {
                    lo = lo.min(l);
                    hi = hi.max(h);
                }
            }
        }
        let ambient_window = (lo, hi);

        let ambient_len = nf_base.k_basis(ambient_window).len();
        let cols: Vec<Vec<Scalar>> = images
            .iter()
            .map(|img| {
                nf_base
                    .elem_to_k(img, ambient_window)
                    .ok_or_else(|| Error::Internal("image escapes the ambient window".into()))
            })
            .collect::<Result<_>>()?;
        let image = KMat::from_columns(field, ambient_len, cols);
        let kernel = image.kernel_basis();
        let h0 = kernel.len();

        // measured coordinates inside the ambient basis
        let ambient_basis = nf_base.k_basis(ambient_window);
        let measured: Vec<usize> = ambient_basis
            .iter()
            .enumerate()
            .filter(|(_, (i, e))| {
                // torsion coordinates always count; free coordinates only
                // inside the measured window
                match &nf_base.kinds[*i] {
                    fpmod::CoordKind::Free => *e >= measured_window.0 && *e <= measured_window.1,
                    _ => true,
                }
            })
            .map(|(pos, _)| pos)
            .collect();
        let meet = image.column_span_meet_coords(&measured);
        let h1 = measured.len() - meet;

        // coker representatives: greedily extend the image span by measured
        // coordinate vectors
        let mut coker_reps: Vec<Vec<Scalar>> = Vec::new();
        let mut span = image.clone();
        let mut rank = span.rank();
        for pos in &measured {
            if coker_reps.len() == h1 {
                break;
            }
            let mut v = vec![field.zero(); ambient_len];
            v[*pos] = field.one();
            let bigger = span.hstack(&KMat::from_columns(field, ambient_len, vec![v.clone()]));
            let r = bigger.rank();
            if r > rank {
                rank = r;
                span = bigger;
                coker_reps.push(v);
            }
        }
        if coker_reps.len() != h1 {
            return Err(Error::Internal("cokernel representative search fell short".into()));
        }

        Ok(CechModel {
            sheaf: f.clone(),
            twist_by,
            h0,
            h1,
            domain_window,
            measured_window,
            ambient_window,
            nf_u,
            nf_v,
            nf_base,
            image,
            kernel,
            coker_reps,
        })
    }

    /// Stabilized model: widen until two consecutive windows agree on
    /// `(h0, h1)`.
    pub fn stabilized(f: &CoherentSheaf, twist_by: i64) -> Result<CechModel> {
        let margin = f.data_degree() + twist_by.abs() + 2;
        let mut w = 2 * margin + 2;
        let mut prev = CechModel::build(f, twist_by, w)?;
        loop {
            w += 4;
            if w > WINDOW_BUDGET {
                return Err(Error::WindowNotStabilized);
            }
            let next = CechModel::build(f, twist_by, w)?;
            if next.h0 == prev.h0 && next.h1 == prev.h1 {
                return Ok(next);
            }
            prev = next;
        }
    }

    /// Section pairs spanning the kernel, in chart generator coordinates.
    pub fn section_pairs(&self) -> Vec<(Vec<RingElem>, Vec<RingElem>)> {
        let basis_u = self.nf_u.k_basis(self.domain_window);
        let split = basis_u.len();
        self.kernel
            .iter()
            .map(|v| {
                let yu = self.nf_u.k_to_elem(&v[..split], self.domain_window);
                let yv = self.nf_v.k_to_elem(&v[split..], self.domain_window);
                (self.nf_u.from_diag(&yu), self.nf_v.from_diag(&yv))
            })
            .collect()
    }

    /// Overlap-section representatives of the cokernel, in base-chart
    /// generator coordinates.
    pub fn coker_elements(&self) -> Vec<Vec<RingElem>> {
        self.coker_reps
            .iter()
            .map(|v| {
                let y = self.nf_base.k_to_elem(v, self.ambient_window);
                self.nf_base.from_diag(&y)
            })
            .collect()
    }

    /// Coordinates of an overlap element against the cokernel basis; the
    /// element must be expressible over image plus representatives.
    pub fn coker_coords(&self, elem: &[RingElem]) -> Result<Vec<Scalar>> {
        let field = self.sheaf.field();
        let reduced = self.nf_base.reduce(elem);
        let v = self
            .nf_base
            .elem_to_k(&reduced, self.ambient_window)
            .ok_or(Error::WindowNotStabilized)?;
        let reps = KMat::from_columns(
            field,
            self.image.rows(),
            self.coker_reps.clone(),
        );
        let combined = self.image.hstack(&reps);
        let sol = combined.solve(&v).ok_or(Error::WindowNotStabilized)?;
        Ok(sol[self.image.cols()..].to_vec())
    }

    pub fn measured_window(&self) -> (i64, i64) {
        self.measured_window
    }
}

/// Čech cohomology of a coherent sheaf with stabilization certificate.
pub fn cech(f: &CoherentSheaf) -> Result<CechDatum> {
    let model = CechModel::stabilized(f, 0)?;
    Ok(CechDatum {
        h0: model.h0,
        h1: model.h1,
        h0_basis: model.section_pairs(),
        h1_basis: model.coker_elements(),
        window: model.measured_window,
    })
}

pub fn euler_char(f: &CoherentSheaf) -> Result<i64> {
    let d = cech(f)?;
    Ok(d.h0 as i64 - d.h1 as i64)
}

/// A k-basis of the sheaf morphisms `source -> target`, with the coordinate
/// data needed to express further morphisms in this basis.
pub struct HomBasis {
    pub source: CoherentSheaf,
    pub target: CoherentSheaf,
    pub basis: Vec<SheafMorphism>,
    window: (i64, i64),
    nf_tu: ModuleNf,
    nf_tv: ModuleNf,
    coord_columns: KMat,
}

impl HomBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of `m` (a morphism `source -> target`) in this basis.
    pub fn coords_of(&self, m: &SheafMorphism) -> Result<Vec<Scalar>> {
        let v = morphism_coord_vector(m, &self.nf_tu, &self.nf_tv, self.window)
            .ok_or(Error::WindowNotStabilized)?;
        self.coord_columns.solve(&v).ok_or(Error::WindowNotStabilized)
    }

    pub fn from_coords(&self, coords: &[Scalar]) -> Result<SheafMorphism> {
        assert_eq!(coords.len(), self.basis.len());
        let field = self.source.field();
        let mut out = SheafMorphism::zero(&self.source, &self.target);
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                let cu = RingElem::constant(self.source.chart_u.ring, c.clone());
                let cv = RingElem::constant(self.source.chart_v.ring, c.clone());
                let scaled = SheafMorphism {
                    source: b.source.clone(),
                    target: b.target.clone(),
                    map_u: b.map_u.scale(&cu),
                    map_v: b.map_v.scale(&cv),
                };
                out = out.add(&scaled);
            }
        }
        let _ = field;
        Ok(out)
    }
}

/// NF coordinate vector of a morphism: reduced generator images on both
/// charts, concatenated.
fn morphism_coord_vector(
    m: &SheafMorphism,
    nf_tu: &ModuleNf,
    nf_tv: &ModuleNf,
    window: (i64, i64),
) -> Option<Vec<Scalar>> {
    let mut out = Vec::new();
    for j in 0..m.source.chart_u.gens {
        let reduced = nf_tu.reduce(&m.map_u.matrix.column(j));
        out.extend(nf_tu.elem_to_k(&reduced, window)?);
    }
    for j in 0..m.source.chart_v.gens {
        let reduced = nf_tv.reduce(&m.map_v.matrix.column(j));
        out.extend(nf_tv.elem_to_k(&reduced, window)?);
    }
    Some(out)
}

/// Global Hom: all glue-compatible chart morphism pairs, computed as the
/// kernel of a windowed k-linear system and stabilized in the window size.
pub fn global_hom(source: &CoherentSheaf, target: &CoherentSheaf) -> Result<HomBasis> {
    let d = source.data_degree().max(target.data_degree()) + 2;
    let mut w = d;
    let mut prev = global_hom_window(source, target, w)?;
    loop {
        w += 4;
        if w > WINDOW_BUDGET {
            return Err(Error::WindowNotStabilized);
        }
        let next = global_hom_window(source, target, w)?;
        if next.basis.len() == prev.basis.len() {
            return Ok(next);
        }
        prev = next;
    }
}

fn global_hom_window(source: &CoherentSheaf, target: &CoherentSheaf, w: i64) -> Result<HomBasis> {
    let field = source.field();
    let laurent = Ring::laurent(field);
    let window = (-w, w);
    let nf_tu = target.chart_u.nf()?;
    let nf_tv = target.chart_v.nf()?;
    let basis_tu = nf_tu.k_basis(window);
    let basis_tv = nf_tv.k_basis(window);
    let gu = source.chart_u.gens;
    let gv = source.chart_v.gens;
    let n_unknowns = gu * basis_tu.len() + gv * basis_tv.len();

    // unknown (chart U, source gen j, target basis b) -> target element
    let elem_tu: Vec<Vec<RingElem>> = basis_tu
        .iter()
        .map(|(i, e)| {
            let mut y = vec![RingElem::zero(target.chart_u.ring); target.chart_u.gens];
            y[*i] = RingElem::monomial(target.chart_u.ring, field.one(), *e);
            nf_tu.from_diag(&y)
        })
        .collect();
    let elem_tv: Vec<Vec<RingElem>> = basis_tv
        .iter()
        .map(|(i, e)| {
            let mut y = vec![RingElem::zero(target.chart_v.ring); target.chart_v.gens];
            y[*i] = RingElem::monomial(target.chart_v.ring, field.one(), *e);
            nf_tv.from_diag(&y)
        })
        .collect();

    // constraint rows are collected as reduced elements, then coordinatized
    // over hull windows per block
    struct Block {
        rows_per_col: Vec<Vec<RingElem>>, // indexed by unknown
        nf: ModuleNf,
    }

    let mut blocks: Vec<Block> = Vec::new();

    // chart U relation conditions: for each relation column rho of the
    // source U chart, sum_j rho_j * image_j = 0
    {
        let rel = &source.chart_u.relations;
        for rc in 0..rel.cols() {
            let mut rows_per_col = vec![Vec::new(); n_unknowns];
            for j in 0..gu {
                let coeff = rel.at(j, rc);
                if coeff.is_zero() {
                    continue;
                }
                for (b, elem) in elem_tu.iter().enumerate() {
                    let scaled: Vec<RingElem> = elem.iter().map(|c| c.mul(coeff)).collect();
                    rows_per_col[j * basis_tu.len() + b] = nf_tu.reduce(&scaled);
                }
            }
            blocks.push(Block { rows_per_col, nf: nf_tu.clone() });
        }
    }
    // chart V relation conditions
    {
        let rel = &source.chart_v.relations;
        let offset = gu * basis_tu.len();
        for rc in 0..rel.cols() {
            let mut rows_per_col = vec![Vec::new(); n_unknowns];
            for j in 0..gv {
                let coeff = rel.at(j, rc);
                if coeff.is_zero() {
                    continue;
                }
                for (b, elem) in elem_tv.iter().enumerate() {
                    let scaled: Vec<RingElem> = elem.iter().map(|c| c.mul(coeff)).collect();
                    rows_per_col[offset + j * basis_tv.len() + b] = nf_tv.reduce(&scaled);
                }
            }
            blocks.push(Block { rows_per_col, nf: nf_tv.clone() });
        }
    }
    // glue compatibility: for each source U generator j,
    //   glue_t ∘ (phi_u e_j) - (phi_v ∘ glue_s) e_j = 0 in base_v(target)
    {
        let base_tv = target.base_v()?;
        let nf_btv = base_tv.nf()?;
        // images of target U basis elements through the target glue
        let glue_images_u: Vec<Vec<RingElem>> = elem_tu
            .iter()
            .map(|elem| {
                let l = vec_base_change(elem, laurent);
                nf_btv.reduce(&target.glue_u_to_v.mul_vec(&l))
            })
            .collect();
        let base_elem_tv: Vec<Vec<RingElem>> =
            elem_tv.iter().map(|elem| vec_base_change(elem, laurent)).collect();
        let offset = gu * basis_tu.len();
        for j in 0..gu {
            let mut rows_per_col = vec![Vec::new(); n_unknowns];
            for (b, img) in glue_images_u.iter().enumerate() {
                rows_per_col[j * basis_tu.len() + b] = img.clone();
            }
            for i in 0..gv {
                let coeff = source.glue_u_to_v.at(i, j);
                if coeff.is_zero() {
                    continue;
                }
                for (b, elem) in base_elem_tv.iter().enumerate() {
                    let scaled: Vec<RingElem> =
                        elem.iter().map(|c| c.mul(coeff).neg()).collect();
                    rows_per_col[offset + i * basis_tv.len() + b] = nf_btv.reduce(&scaled);
                }
            }
            blocks.push(Block { rows_per_col, nf: nf_btv.clone() });
        }
    }

    // coordinatize each block over the hull of its exponents
    let mut all_rows: Vec<Vec<Scalar>> = Vec::new();
    for block in &blocks {
        let mut lo = -1i64;
        let mut hi = 1i64;
        for elem in &block.rows_per_col {
            for e in elem {
                if let (Some(l), Some(h)) = (e.low_degree(), e.degree()) {
                    lo = lo.min(l);
                    hi = hi.max(h);
                }
            }
        }
        let hull = (lo, hi);
        let len = block.nf.k_basis(hull).len();
        let mut cols = Vec::with_capacity(n_unknowns);
        for elem in &block.rows_per_col {
            if elem.is_empty() {
                cols.push(vec![field.zero(); len]);
            } else {
                cols.push(block.nf.elem_to_k(elem, hull).ok_or_else(|| {
                    Error::Internal("constraint row escapes its hull window".into())
                })?);
            }
        }
        // transpose columns into rows of the big system
        for r in 0..len {
            all_rows.push(cols.iter().map(|c| c[r].clone()).collect());
        }
    }

    let system = KMat::from_rows(field, all_rows);
    let solutions = if system.rows() == 0 {
        KMat::identity(field, n_unknowns)
            .kernel_basis()
            .into_iter()
            .map(|_| Vec::new())
            .collect::<Vec<_>>()
    } else {
        system.kernel_basis()
    };
    let solutions = if system.rows() == 0 {
        // no constraints: every unknown vector is a morphism
        (0..n_unknowns)
            .map(|i| {
                let mut v = vec![field.zero(); n_unknowns];
                v[i] = field.one();
                v
            })
            .collect()
    } else {
        solutions
    };

    // assemble morphisms from solution coordinates
    let mut basis = Vec::new();
    let mut coord_cols = Vec::new();
    for sol in &solutions {
        let mut mat_u = RingMat::zeros(target.chart_u.ring, target.chart_u.gens, gu);
        for j in 0..gu {
            let coords = &sol[j * basis_tu.len()..(j + 1) * basis_tu.len()];
            let y = nf_tu.k_to_elem(coords, window);
            let x = nf_tu.from_diag(&y);
            for (r, val) in x.into_iter().enumerate() {
                *mat_u.at_mut(r, j) = val;
            }
        }
        let offset = gu * basis_tu.len();
        let mut mat_v = RingMat::zeros(target.chart_v.ring, target.chart_v.gens, gv);
        for j in 0..gv {
            let coords = &sol[offset + j * basis_tv.len()..offset + (j + 1) * basis_tv.len()];
            let y = nf_tv.k_to_elem(coords, window);
            let x = nf_tv.from_diag(&y);
            for (r, val) in x.into_iter().enumerate() {
                *mat_v.at_mut(r, j) = val;
            }
        }
        let m = SheafMorphism::new(source.clone(), target.clone(), mat_u, mat_v)?;
        let coord_vec = morphism_coord_vector(&m, &nf_tu, &nf_tv, window)
            .ok_or_else(|| Error::Internal("basis morphism escapes its own window".into()))?;
        basis.push(m);
        coord_cols.push(coord_vec);
    }

    let coord_len = coord_cols.first().map_or(
        gu * basis_tu.len() + gv * basis_tv.len(),
        |c| c.len(),
    );
    Ok(HomBasis {
        source: source.clone(),
        target: target.clone(),
        basis,
        window,
        nf_tu,
        nf_tv,
        coord_columns: KMat::from_columns(field, coord_len, coord_cols),
    })
}

/// Data of `Ext^1(f, g)` computed from a two-term resolution of `f` by
/// copies of `O(-n)`, with `n` certified by the vanishing of `h1(g(n))`.
pub struct Ext1Data {
    pub dim: usize,
    pub resolution_twist: i64,
    f: CoherentSheaf,
    g: CoherentSheaf,
    hom_kg: HomBasis,
    /// image of the precomposition map in `hom_kg` coordinates
    precomp_image: KMat,
    /// coset representatives: indices into the `hom_kg` basis
    class_reps: Vec<usize>,
    kernel_inclusion: SheafMorphism,
    cover: SheafMorphism,
}

impl Ext1Data {
    /// A certified short exact sequence `0 -> g -> b -> f -> 0` whose class
    /// has the given coordinates against the class representatives.
    pub fn extension(&self, coords: &[Scalar]) -> Result<ShortExactSeq> {
        assert_eq!(coords.len(), self.class_reps.len());
        let field = self.g.field();
        let mut hom_coords = vec![field.zero(); self.hom_kg.dim()];
        for (c, rep) in coords.iter().zip(&self.class_reps) {
            hom_coords[*rep] = c.clone();
        }
        let phi = self.hom_kg.from_coords(&hom_coords)?;
        self.pushout(&phi)
    }

    /// Pushout of the kernel sequence along `phi: K -> g`.
    fn pushout(&self, phi: &SheafMorphism) -> Result<ShortExactSeq> {
        let g = &self.g;
        let f = &self.f;
        let p = &self.cover.source; // the covering sum of line bundles
        let ring_u = g.chart_u.ring;
        let ring_v = g.chart_v.ring;

        // K -> g ⊕ P, k |-> (phi k, -iota k)
        let gp = g.direct_sum(p);
        let mat_u = phi.map_u.matrix.vstack(&self.kernel_inclusion.map_u.matrix.neg());
        let mat_v = phi.map_v.matrix.vstack(&self.kernel_inclusion.map_v.matrix.neg());
        let into = SheafMorphism::new(
            self.kernel_inclusion.source.clone(),
            gp.clone(),
            mat_u,
            mat_v,
        )?;
        let kic = kernel_image_cokernel(&into)?;
        let b = kic.cokernel.clone();

        // g -> B: include and project
        let inc_u = RingMat::identity(ring_u, g.chart_u.gens)
            .vstack(&RingMat::zeros(ring_u, p.chart_u.gens, g.chart_u.gens));
        let inc_v = RingMat::identity(ring_v, g.chart_v.gens)
            .vstack(&RingMat::zeros(ring_v, p.chart_v.gens, g.chart_v.gens));
        let left_u = kic.cokernel_projection.map_u.matrix.mul(&inc_u);
        let left_v = kic.cokernel_projection.map_v.matrix.mul(&inc_v);
        let first = SheafMorphism::new(g.clone(), b.clone(), left_u, left_v)?;

        // B -> f: kill g, apply the cover, transported along a section of
        // the cokernel projection
        let zero_then_e_u =
            RingMat::zeros(ring_u, f.chart_u.gens, g.chart_u.gens).hstack(&self.cover.map_u.matrix);
        let zero_then_e_v =
            RingMat::zeros(ring_v, f.chart_v.gens, g.chart_v.gens).hstack(&self.cover.map_v.matrix);
        let sect_u = right_inverse(&kic.cokernel_projection.map_u)?;
        let sect_v = right_inverse(&kic.cokernel_projection.map_v)?;
        let second_u = zero_then_e_u.mul(&sect_u);
        let second_v = zero_then_e_v.mul(&sect_v);
        let second = SheafMorphism::new(b, f.clone(), second_u, second_v)?;

        ShortExactSeq::new(first, second)
    }

    /// Coordinates of the class of a short exact sequence `0 -> g -> b -> f
    /// -> 0` against the class representatives. The lift of the cover
    /// through the quotient map must be a single sheaf morphism: chartwise
    /// lifts carry independent gauges and would misreport the class.
    pub fn class_of(&self, s: &ShortExactSeq) -> Result<Vec<Scalar>> {
        let field = self.g.field();
        let p = &self.cover.source;
        let hom_pb = global_hom(p, s.middle())?;
        let hom_pf = global_hom(p, &self.f)?;
        let compose_cols: Vec<Vec<Scalar>> = hom_pb
            .basis
            .iter()
            .map(|lam| hom_pf.coords_of(&lam.then(&s.second)))
            .collect::<Result<_>>()?;
        let compose = KMat::from_columns(field, {
            // coordinate length of hom_pf
            hom_pf.coords_of(&self.cover)?.len()
        }, compose_cols);
        let target = hom_pf.coords_of(&self.cover)?;
        let lam_coords = compose
            .solve(&target)
            .ok_or_else(|| Error::Internal("cover does not lift through the sequence".into()))?;
        let lam = hom_pb.from_coords(&lam_coords)?;
        // restrict to the kernel and factor through g -> b
        let comp = self.kernel_inclusion.then(&lam);
        let fac_u = factor_through_mono(&s.first.map_u, &comp.map_u.matrix)?;
        let fac_v = factor_through_mono(&s.first.map_v, &comp.map_v.matrix)?;
        let phi = SheafMorphism::new(
            self.kernel_inclusion.source.clone(),
            self.g.clone(),
            fac_u,
            fac_v,
        )?;
        let coords = self.hom_kg.coords_of(&phi)?;
        // subtract the image part: express over [precomp_image | reps]
        let reps = KMat::from_columns(
            field,
            self.hom_kg.dim(),
            self.class_reps
                .iter()
                .map(|r| {
                    let mut v = vec![field.zero(); self.hom_kg.dim()];
                    v[*r] = field.one();
                    v
                })
                .collect(),
        );
        let combined = self.precomp_image.hstack(&reps);
        let sol = combined
            .solve(&coords)
            .ok_or_else(|| Error::Internal("class does not decompose over the basis".into()))?;
        Ok(sol[self.precomp_image.cols()..].to_vec())
    }

    /// The classes of the basis, realized as short exact sequences.
    pub fn classes(&self) -> Result<Vec<ShortExactSeq>> {
        let field = self.g.field();
        (0..self.dim)
            .map(|i| {
                let mut coords = vec![field.zero(); self.dim];
                coords[i] = field.one();
                self.extension(&coords)
            })
            .collect()
    }
}

/// Solves `mono ∘ x = given` modulo target relations.
fn factor_through_mono(mono: &ModuleMorphism, given: &RingMat) -> Result<RingMat> {
    let stacked = mono.matrix.hstack(&mono.target.relations);
    let sol = crate::exactlinear::solve_linear(&stacked, given)?
        .ok_or_else(|| Error::Internal("no factorization through mono".into()))?;
    Ok(RingMat::from_fn(mono.matrix.ring, mono.matrix.cols(), given.cols(), |i, j| {
        sol.particular.at(i, j).clone()
    }))
}

fn right_inverse(epi: &ModuleMorphism) -> Result<RingMat> {
    let identity = RingMat::identity(epi.target.ring, epi.target.gens);
    let stacked = epi.matrix.hstack(&epi.target.relations);
    let sol = crate::exactlinear::solve_linear(&stacked, &identity)?
        .ok_or_else(|| Error::Internal("no section of the surjection".into()))?;
    Ok(RingMat::from_fn(epi.matrix.ring, epi.matrix.cols(), epi.target.gens, |i, j| {
        sol.particular.at(i, j).clone()
    }))
}

/// `Ext^1(f, g)` with an explicit basis of extension classes.
pub fn ext1(f: &CoherentSheaf, g: &CoherentSheaf) -> Result<Ext1Data> {
    let field = f.field();
    let d = f.data_degree().max(g.data_degree()) + 2;

    // resolution twist: smallest n >= d with h1(g(n)) = 0, certified
    let mut n = d;
    loop {
        let datum = cech(&twist(g, n))?;
        if datum.h1 == 0 {
            break;
        }
        n += 1;
        if n > WINDOW_BUDGET {
            return Err(Error::WindowNotStabilized);
        }
    }
    // the same vanishing must hold for every summand of the cover, which is
    // what makes the two-term formula exact; the cover uses O(-n)

    // build a surjection from copies of O(-n): steepest-descent greedy on
    // the cokernel size keeps the cover small
    let line = line_bundle(field, -n);
    let sections = global_hom(&line, f)?;
    let mut chosen: Vec<usize> = Vec::new();
    let mut cover: Option<SheafMorphism> = None;
    let mut measure = cover_measure_of(&SheafMorphism::zero(&CoherentSheaf::zero(field), f))?;
    while measure != (0, 0) {
        let mut best: Option<(usize, (usize, usize), SheafMorphism)> = None;
        for (i, phi) in sections.basis.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let candidate = match &cover {
                None => phi.clone(),
                Some(c) => {
                    let src = c.source.direct_sum(&line);
                    let mat_u = c.map_u.matrix.hstack(&phi.map_u.matrix);
                    let mat_v = c.map_v.matrix.hstack(&phi.map_v.matrix);
                    SheafMorphism::new(src, f.clone(), mat_u, mat_v)?
                }
            };
            let m = cover_measure_of(&candidate)?;
            if m < measure && best.as_ref().is_none_or(|(_, bm, _)| m < *bm) {
                best = Some((i, m, candidate));
            }
        }
        match best {
            Some((i, m, candidate)) => {
                chosen.push(i);
                cover = Some(candidate);
                measure = m;
            }
            None => break,
        }
    }
    let cover = match cover {
        Some(c) if measure == (0, 0) => c,
        None if f.is_zero_sheaf()? => SheafMorphism::zero(&CoherentSheaf::zero(field), f),
        _ => return Err(Error::Internal("no covering by line bundles found".into())),
    };

    let kic = kernel_image_cokernel(&cover)?;
    if !kic.cokernel.is_zero_sheaf()? {
        return Err(Error::Internal("cover is not surjective".into()));
    }
    // the kernel of a surjection from a sum of line bundles is again a sum
    // of line bundles; swap in its canonical model so every Hom window
    // downstream stays small (the raw glue carries solver-sized degrees)
    let (k, kernel_inclusion) =
        normalize_free_kernel(&kic.kernel, &kic.kernel_inclusion)?;

    // Hom(O(-n), g) and Hom(K, g)
    let hom_line_g = global_hom(&line, g)?;
    let hom_kg = global_hom(&k, g)?;

    // precomposition matrix: for each cover summand i and each basis
    // element psi of Hom(O(-n), g), the morphism (psi at slot i) ∘ iota
    let s = chosen.len();
    let mut cols = Vec::new();
    for i in 0..s {
        for psi in &hom_line_g.basis {
            // place psi in slot i of Hom(P, g), then precompose with iota
            let pu = placed_matrix(&psi.map_u.matrix, i, s);
            let pv = placed_matrix(&psi.map_v.matrix, i, s);
            let mu = pu.mul(&kernel_inclusion.map_u.matrix);
            let mv = pv.mul(&kernel_inclusion.map_v.matrix);
            let m = SheafMorphism::new(k.clone(), g.clone(), mu, mv)?;
            cols.push(hom_kg.coords_of(&m)?);
        }
    }
    let precomp_image = KMat::from_columns(field, hom_kg.dim(), cols);
    let rank = precomp_image.rank();
    let dim = hom_kg.dim() - rank;

    // coset representatives among the hom_kg basis vectors
    let mut class_reps = Vec::new();
    let mut span = precomp_image.clone();
    let mut cur = rank;
    for i in 0..hom_kg.dim() {
        if class_reps.len() == dim {
            break;
        }
        let mut v = vec![field.zero(); hom_kg.dim()];
        v[i] = field.one();
        let bigger = span.hstack(&KMat::from_columns(field, hom_kg.dim(), vec![v]));
        if bigger.rank() > cur {
            cur += 1;
            span = bigger;
            class_reps.push(i);
        }
    }

    Ok(Ext1Data {
        dim,
        resolution_twist: n,
        f: f.clone(),
        g: g.clone(),
        hom_kg,
        precomp_image,
        class_reps,
        kernel_inclusion,
        cover,
    })
}

/// Splitting type of a torsion-free sheaf with free charts: the multiset of
/// line-bundle twists, recovered from second differences of
/// `t -> dim Hom(f, O(t))` and cross-checked against the glue determinant.
pub fn splitting_type(f: &CoherentSheaf) -> Result<crate::sheafp1::LabelMultiset> {
    use crate::sheafp1::{LabelMultiset, SheafLabel};
    let field = f.field();
    let rank = f.chart_u.gens;
    if f.chart_u.relations.cols() != 0 || f.chart_v.relations.cols() != 0 {
        return Err(Error::Internal("splitting type needs free charts".into()));
    }
    let mut labels = LabelMultiset::new();
    if rank == 0 {
        return Ok(labels);
    }
    let d = f.data_degree();
    let mut t = -(d + 2);
    let mut h_prev2 = 0usize;
    let mut h_prev1 = 0usize;
    let mut found = 0usize;
    while found < rank {
        if t > d * rank as i64 + 4 {
            return Err(Error::Internal("splitting type extraction ran away".into()));
        }
        let h_t = global_hom(f, &line_bundle(field, t))?.dim();
        let m = h_t as i64 - 2 * h_prev1 as i64 + h_prev2 as i64;
        if m < 0 {
            return Err(Error::Internal("negative splitting multiplicity".into()));
        }
        if m > 0 {
            labels.insert_many(SheafLabel::Lb(t), m as usize);
            found += m as usize;
        }
        h_prev2 = h_prev1;
        h_prev1 = h_t;
        t += 1;
    }
    // determinant certificate: the glue determinant is a unit times
    // x^(-sum of twists)
    let det = f.glue_u_to_v.det()?;
    let total: i64 = labels
        .iter()
        .map(|(l, c)| match l {
            SheafLabel::Lb(n) => n * *c as i64,
            _ => 0,
        })
        .sum();
    if det.is_zero() || det.low_degree() != det.degree() || det.low_degree() != Some(-total) {
        return Err(Error::Internal("splitting type disagrees with the glue determinant".into()));
    }
    Ok(labels)
}

/// Chartwise inverse of a sheaf isomorphism, certified on construction.
pub fn sheaf_iso_inverse(iso: &SheafMorphism) -> Result<SheafMorphism> {
    let inv_u = right_inverse(&iso.map_u)?;
    let inv_v = right_inverse(&iso.map_v)?;
    SheafMorphism::new(iso.target.clone(), iso.source.clone(), inv_u, inv_v)
}

/// Replaces a torsion-free kernel by its canonical line-bundle sum, with
/// the inclusion transported through the certified isomorphism.
fn normalize_free_kernel(
    kernel: &CoherentSheaf,
    inclusion: &SheafMorphism,
) -> Result<(CoherentSheaf, SheafMorphism)> {
    if kernel.is_zero_sheaf()? {
        return Ok((kernel.clone(), inclusion.clone()));
    }
    // the raw kernel glue carries solver-sized degrees; swapping in the
    // canonical model only pays when they are genuinely large
    if kernel.data_degree() <= inclusion.target.data_degree() + 4 {
        return Ok((kernel.clone(), inclusion.clone()));
    }
    let labels = splitting_type(kernel)?;
    let iso = crate::sheafp1::iso_to_labelled_sum(kernel, &labels)?;
    let back = sheaf_iso_inverse(&iso)?;
    let model = iso.target.clone();
    let new_inclusion = back.then(inclusion);
    Ok((model, new_inclusion))
}

fn placed_matrix(m: &RingMat, slot: usize, total: usize) -> RingMat {
    // m is (target gens) x 1; the result is (target gens) x total
    let mut out = RingMat::zeros(m.ring, m.rows(), total);
    for i in 0..m.rows() {
        *out.at_mut(i, slot) = m.at(i, 0).clone();
    }
    out
}

/// Size of the cokernel of a candidate cover, lexicographic in
/// `(total free rank, total torsion dimension)` over both charts. The
/// measure strictly drops exactly when the image grows, and `(0, 0)` means
/// the candidate is surjective.
fn cover_measure_of(candidate: &SheafMorphism) -> Result<(usize, usize)> {
    let (cu, _) = fpmod::cokernel(&candidate.map_u)?;
    let (cv, _) = fpmod::cokernel(&candidate.map_v)?;
    let du = fpmod::decompose(&cu)?;
    let dv = fpmod::decompose(&cv)?;
    let torsion: usize = du
        .invariant_factors
        .iter()
        .chain(dv.invariant_factors.iter())
        .map(|d| d.degree().unwrap() as usize)
        .sum();
    Ok((du.free_rank + dv.free_rank, torsion))
}

pub fn ext1_dim(f: &CoherentSheaf, g: &CoherentSheaf) -> Result<usize> {
    Ok(ext1(f, g)?.dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinear::Field;
    use crate::sheafp1::{torsion_sheaf, ClosedPoint};

    fn q() -> Field {
        Field::Rationals
    }

    fn o(n: i64) -> CoherentSheaf {
        line_bundle(q(), n)
    }

    fn point(coeffs: &[i64]) -> ClosedPoint {
        ClosedPoint::finite(RingElem::from_int_coeffs(Ring::poly_u(q()), coeffs)).unwrap()
    }

    /// Monomial-matching oracle: sections of O(n) are pairs (x^i, y^j)
    /// with i + j = n; overlap cosets are the monomials strictly between
    /// the images of the two charts.
    fn oracle_h0_line_bundle(n: i64) -> usize {
        let mut count = 0;
        for i in 0..=n.max(0) {
            let j = n - i;
            if i >= 0 && j >= 0 {
                count += 1;
            }
        }
        count as usize
    }

    fn oracle_h1_line_bundle(n: i64) -> usize {
        // exponents e with n < e < 0 are hit by neither chart
        let mut count = 0;
        let mut e = n + 1;
        while e < 0 {
            count += 1;
            e += 1;
        }
        count as usize
    }

    #[test]
    fn cech_of_line_bundles_matches_monomial_oracle() {
        for n in -4..=4i64 {
            let datum = cech(&o(n)).unwrap();
            assert_eq!(datum.h0, oracle_h0_line_bundle(n), "h0 of O({n})");
            assert_eq!(datum.h1, oracle_h1_line_bundle(n), "h1 of O({n})");
        }
    }

    #[test]
    fn cech_of_torsion_sheaves_is_flasque_and_counts_length() {
        for (pt, m) in [
            (point(&[0, 1]), 2u32),
            (point(&[-1, 1]), 1),
            (point(&[1, 0, 1]), 1),
            (ClosedPoint::Infinity, 3),
        ] {
            let t = torsion_sheaf(q(), &pt, m).unwrap();
            let datum = cech(&t).unwrap();
            assert_eq!(datum.h0 as i64, m as i64 * pt.degree(), "h0 of T({pt},{m})");
            assert_eq!(datum.h1, 0, "h1 of T({pt},{m})");
        }
    }

    #[test]
    fn cech_of_o_minus_two() {
        let datum = cech(&o(-2)).unwrap();
        assert_eq!((datum.h0, datum.h1), (0, 1));
    }

    #[test]
    fn global_sections_satisfy_the_glue_equation() {
        let datum = cech(&o(2)).unwrap();
        assert_eq!(datum.h0_basis.len(), 3);
        let f = o(2);
        let laurent = Ring::laurent(q());
        let base = f.base_u().unwrap();
        let nf = base.nf().unwrap();
        for (su, sv) in &datum.h0_basis {
            let left = vec_base_change(su, laurent);
            let right = f.glue_v_to_u.mul_vec(&vec_base_change(sv, laurent));
            let diff: Vec<RingElem> =
                left.iter().zip(&right).map(|(a, b)| a.sub(b)).collect();
            assert!(nf.is_zero_elem(&diff));
        }
    }

    #[test]
    fn hom_dimensions_of_line_bundles_match_counting_oracle() {
        for m in -2..=2i64 {
            for n in -2..=2i64 {
                let hom = global_hom(&o(m), &o(n)).unwrap();
                // oracle: count monomial section pairs of the gap twist
                let expected = oracle_h0_line_bundle(n - m);
                assert_eq!(hom.dim(), expected, "Hom(O({m}), O({n}))");
            }
        }
    }

    #[test]
    fn hom_from_higher_twist_vanishes() {
        let target = o(1).direct_sum(&o(1));
        let hom = global_hom(&o(2), &target).unwrap();
        assert_eq!(hom.dim(), 0);
    }

    #[test]
    fn hom_of_torsion_endomorphisms_counts_length_times_degree() {
        for (pt, m) in [
            (point(&[0, 1]), 2u32),
            (point(&[-1, 1]), 2),
            (ClosedPoint::Infinity, 1),
            (point(&[1, 0, 1]), 1),
        ] {
            let t = torsion_sheaf(q(), &pt, m).unwrap();
            let hom = global_hom(&t, &t).unwrap();
            assert_eq!(hom.dim() as i64, m as i64 * pt.degree(), "End(T({pt},{m}))");
        }
    }

    #[test]
    fn euler_characteristic_of_line_bundles() {
        for n in -4..=4 {
            assert_eq!(euler_char(&o(n)).unwrap(), n + 1);
        }
    }

    #[test]
    fn ext_dimensions_via_serre_duality_oracle() {
        // dim Ext^1(O(m), O(n)) equals dim Hom(O(n), O(m-2)) by the duality
        // oracle; both sides are computed through independent routes
        for m in -2..=2i64 {
            for n in -2..=2i64 {
                let ext = ext1(&o(m), &o(n)).unwrap();
                let dual = global_hom(&o(n), &o(m - 2)).unwrap();
                assert_eq!(ext.dim, dual.dim(), "Ext1(O({m}), O({n}))");
            }
        }
    }

    #[test]
    fn ext_from_small_sums_into_torsion_vanishes() {
        let source = o(0).direct_sum(&o(1));
        for (pt, m) in [(point(&[0, 1]), 1u32), (point(&[-1, 1]), 2)] {
            let t = torsion_sheaf(q(), &pt, m).unwrap();
            let ext = ext1(&source, &t).unwrap();
            assert_eq!(ext.dim, 0);
        }
    }

    #[test]
    fn ext_of_twist_two_gap_is_one_dimensional_with_nonsplit_witness() {
        let ext = ext1(&o(2), &o(0)).unwrap();
        assert_eq!(ext.dim, 1);
        let classes = ext.classes().unwrap();
        assert_eq!(classes.len(), 1);
        let middle = &classes[0].middle().clone();
        // the middle of the nonsplit extension has two generators per chart
        assert_eq!(middle.chart_u.gens, 2);
    }

    #[test]
    fn extension_class_zero_gives_split_sequence() {
        let ext = ext1(&o(2), &o(0)).unwrap();
        let split = ext.extension(&[q().zero()]).unwrap();
        // the middle decomposes with a section of the quotient: computing
        // the class back gives zero
        let class = ext.class_of(&split).unwrap();
        assert!(class.iter().all(|c| c.is_zero()));
        let nonsplit = ext.extension(&[q().one()]).unwrap();
        let class = ext.class_of(&nonsplit).unwrap();
        assert_eq!(class, vec![q().one()]);
    }

    #[test]
    fn twist_invariance_of_hom_dimensions() {
        let pt = point(&[-1, 1]);
        let f = o(1).direct_sum(&torsion_sheaf(q(), &pt, 1).unwrap());
        let g = o(0);
        let d0 = global_hom(&f, &g).unwrap().dim();
        for n in [-2i64, 1, 3] {
            let dn = global_hom(&twist(&f, n), &twist(&g, n)).unwrap().dim();
            assert_eq!(d0, dn, "twist by {n}");
        }
    }

    #[test]
    fn window_doubling_does_not_change_cech() {
        let pt = point(&[0, 1]);
        let f = o(-3).direct_sum(&torsion_sheaf(q(), &pt, 2).unwrap());
        let model = CechModel::stabilized(&f, 0).unwrap();
        let doubled = CechModel::build(&f, 0, 2 * (model.domain_window.1)).unwrap();
        assert_eq!((model.h0, model.h1), (doubled.h0, doubled.h1));
    }
}


/// Membership in the definable class generated by the geometric points: a
/// coherent sheaf belongs exactly when its decomposition carries no line
/// bundle. A windowed Hom/Ext vanishing probe over twists bounded by the
/// data degree cross-checks the structural answer.
pub fn is_in_d(f: &CoherentSheaf) -> Result<bool> {
    let field = f.field();
    let labels = crate::sheafp1::decompose_sheaf(f)?;
    let structural = !labels.has_line_bundle();
    let d = f.data_degree() + 2;
    let mut probe = true;
    for n in -d..=d {
        let lb = line_bundle(field, n);
        if global_hom(f, &lb)?.dim() != 0 || ext1(&lb, f)?.dim != 0 {
            probe = false;
            break;
        }
    }
    if probe != structural {
        return Err(Error::Internal(
            "structural and windowed membership probes disagree".into(),
        ));
    }
    Ok(structural)
}
