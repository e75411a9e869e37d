//! Turning an arrow chain of sheaf descriptions into a certified short
//! exact sequence: the tool searches for a monomorphism from the Hom space
//! with the requested cokernel, deterministically from the seed, and
//! certifies exactness before any purity test runs. When no realization is
//! found the chain is reported as not exact.

use purisheaf_core::error::{Error, Result};
use purisheaf_core::exactlinear::{Field, Scalar};
use purisheaf_core::homalg::global_hom;
use purisheaf_core::sheafp1::{
    decompose_sheaf, kernel_image_cokernel, CoherentSheaf, SheafMorphism, ShortExactSeq,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn realize_sequence(
    a: &CoherentSheaf,
    b: &CoherentSheaf,
    c: &CoherentSheaf,
    seed: u64,
) -> Result<ShortExactSeq> {
    let field = a.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if a.is_zero_sheaf()? {
        // 0 -> B -> C must be an isomorphism
        let f = SheafMorphism::zero(a, b);
        let iso = find_iso(b, c, &mut rng)?;
        return ShortExactSeq::new(f, iso);
    }

    let hom_ab = global_hom(a, b)?;
    if hom_ab.dim() == 0 {
        return Err(Error::NotExact("no nonzero morphisms from the subobject".into()));
    }
    let c_labels = decompose_sheaf(c)?;

    for _ in 0..48 {
        let coords = random_coords(field, hom_ab.dim(), &mut rng);
        if coords.iter().all(|x| x.is_zero()) {
            continue;
        }
        let f = hom_ab.from_coords(&coords)?;
        if !f.is_mono()? {
            continue;
        }
        let kic = kernel_image_cokernel(&f)?;
        if decompose_sheaf(&kic.cokernel)? != c_labels {
            continue;
        }
        let iso = find_iso(&kic.cokernel, c, &mut rng)?;
        let second = kic.cokernel_projection.then(&iso);
        return ShortExactSeq::new(f, second);
    }
    Err(Error::NotExact(
        "no exact sequence with these terms was found within the seeded search".into(),
    ))
}

fn find_iso(
    from: &CoherentSheaf,
    to: &CoherentSheaf,
    rng: &mut ChaCha8Rng,
) -> Result<SheafMorphism> {
    if from.is_zero_sheaf()? && to.is_zero_sheaf()? {
        return Ok(SheafMorphism::zero(from, to));
    }
    let hom = global_hom(from, to)?;
    if hom.dim() == 0 {
        return Err(Error::NotExact("the quotients are not isomorphic".into()));
    }
    let field = from.field();
    for _ in 0..32 {
        let coords = random_coords(field, hom.dim(), rng);
        let candidate = hom.from_coords(&coords)?;
        if candidate.is_isomorphism()? {
            return Ok(candidate);
        }
    }
    Err(Error::NotExact("the quotients are not isomorphic".into()))
}

fn random_coords(field: Field, n: usize, rng: &mut ChaCha8Rng) -> Vec<Scalar> {
    (0..n)
        .map(|_| match field {
            Field::Rationals => field.from_i64(rng.gen_range(-3i64..=3)),
            Field::Prime(p) => Scalar::Mod(rng.gen_range(0..p)),
        })
        .collect()
}
