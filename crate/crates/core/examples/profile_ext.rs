use purisheaf_core::exactlinear::Field;
use purisheaf_core::purity::*;
use purisheaf_core::samples::random_sheaf;
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1006);
    for i in 0..200u64 {
        let field = if i % 2 == 0 { Field::Rationals } else { Field::Prime(5) };
        eprintln!("extension {i} starting");
        let (a, la) = random_sheaf(field, &mut rng, 3).unwrap();
        let (c, lc) = random_sheaf(field, &mut rng, 3).unwrap();
        let seed = 40_000 + i;
        if i >= 170 { eprintln!("  pair: a={la} c={lc}"); }
        let r = match random_extension(&a, &c, seed) {
            Ok(r) => r,
            Err(e) => { println!("[{i}] ext FAILED: {e} | a={la} c={lc}"); continue; }
        };
        if i < 170 { continue; }
        eprintln!("  a={la} c={lc} ext built, middle gens ({},{}) data degree {}",
            r.sequence.middle().chart_u.gens,
            r.sequence.middle().chart_v.gens,
            r.sequence.middle().data_degree());
        let checks: [(&str, Box<dyn Fn() -> Result<bool, purisheaf_core::Error>>); 4] = [
            ("cpure", Box::new(|| is_c_pure(&r.sequence).map(|x| x.0))),
            ("gpure", Box::new(|| is_g_pure(&r.sequence).map(|x| x.0))),
            ("tensor", Box::new(|| g_pure_via_tensor(&r.sequence).map(|x| x.0))),
            ("hom", Box::new(|| g_pure_via_torsion_hom(&r.sequence).map(|x| x.0))),
        ];
        for (name, f) in checks {
            eprintln!("  {name}");
            if let Err(e) = f() {
                let b = r.sequence.middle();
                println!(
                    "[{i}] {name} FAILED: {e} | a={la} c={lc} | middle gens ({},{}) deg {}",
                    b.chart_u.gens, b.chart_v.gens, b.data_degree()
                );
            }
        }
    }
    println!("scan done");
}
