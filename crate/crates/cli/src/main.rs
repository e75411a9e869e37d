//! Command-line front end: parse sheaf and spectrum descriptions, dispatch
//! the computations, and emit human-readable text or machine-readable JSON
//! records. Exit code 0 on success, 1 on a mathematical error, 2 on a parse
//! or usage error.

mod realize;
mod render;

use purisheaf_core::descr::{
    parse_chain, parse_sheaf_expr, parse_zg_description, parse_zg_point, Diag,
};
use purisheaf_core::exactlinear::Field;
use purisheaf_core::homalg::{cech, ext1, global_hom};
use purisheaf_core::kronecker::{decompose_rep, tilt};
use purisheaf_core::purity::purity_report;
use purisheaf_core::sheafp1::decompose_sheaf;
use purisheaf_core::twopoint::zp_table;
use purisheaf_core::ziegler::{attributes, closure, sigma_c_pure_injective};
use serde_json::json;
use std::process::ExitCode;

pub enum CliError {
    Usage(String),
    Parse(Diag),
    Math(purisheaf_core::Error),
}

impl From<Diag> for CliError {
    fn from(d: Diag) -> Self {
        CliError::Parse(d)
    }
}

impl From<purisheaf_core::Error> for CliError {
    fn from(e: purisheaf_core::Error) -> Self {
        CliError::Math(e)
    }
}

#[derive(Clone)]
pub struct Opts {
    pub field: Field,
    pub seed: u64,
    pub json: bool,
}

const USAGE: &str = "usage: purisheaf <command> [arguments] [--field q|fp:<prime>] [--seed <n>] [--json]

commands:
  decompose \"<sheaf>\"          indecomposable summands
  cohomology \"<sheaf>\"         cech cohomology dimensions
  hom \"<sheaf>\" \"<sheaf>\"      dimension of the morphism space
  ext \"<sheaf>\" \"<sheaf>\"      dimension of the extension space
  purity \"A -> B -> C\"         purity report for a realized exact sequence
  tilt \"<sheaf>\"               bigraded quiver representation image
  zg-closure \"<description>\"   closure in the spectrum topology
  zg-attributes \"<point>\"      catalog attributes of a spectrum point
  zp-table                     the two-point scheme spectrum table

sheaf grammar: O(n), T(poly, m), T(inf, m), F ++ G, F * G, twist(F, n), 0";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::Math(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Parse(d)) => {
            eprintln!("{d}");
            ExitCode::from(2)
        }
        Err(CliError::Usage(u)) => {
            eprintln!("{u}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &[String]) -> Result<String, CliError> {
    let mut positional: Vec<&str> = Vec::new();
    let mut opts = Opts { field: Field::Rationals, seed: 0, json: false };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--json" => opts.json = true,
            "--field" => {
                let v = it.next().ok_or_else(|| CliError::Usage("--field needs a value".into()))?;
                opts.field = parse_field(v)?;
            }
            "--seed" => {
                let v = it.next().ok_or_else(|| CliError::Usage("--seed needs a value".into()))?;
                opts.seed = v
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad seed `{v}`")))?;
            }
            other if other.starts_with("--") => {
                return Err(CliError::Usage(format!("unknown flag `{other}`\n\n{USAGE}")));
            }
            other => positional.push(other),
        }
    }
    let Some((&command, rest)) = positional.split_first() else {
        return Err(CliError::Usage(USAGE.into()));
    };
    match command {
        "decompose" => cmd_decompose(one_arg(rest)?, &opts),
        "cohomology" => cmd_cohomology(one_arg(rest)?, &opts),
        "hom" => {
            let (a, b) = two_args(rest)?;
            cmd_hom(a, b, &opts)
        }
        "ext" => {
            let (a, b) = two_args(rest)?;
            cmd_ext(a, b, &opts)
        }
        "purity" => cmd_purity(one_arg(rest)?, &opts),
        "tilt" => cmd_tilt(one_arg(rest)?, &opts),
        "zg-closure" => cmd_zg_closure(one_arg(rest)?, &opts),
        "zg-attributes" => cmd_zg_attributes(one_arg(rest)?, &opts),
        "zp-table" => cmd_zp_table(&opts),
        other => Err(CliError::Usage(format!("unknown command `{other}`\n\n{USAGE}"))),
    }
}

fn parse_field(v: &str) -> Result<Field, CliError> {
    if v == "q" {
        return Ok(Field::Rationals);
    }
    if let Some(p) = v.strip_prefix("fp:") {
        let p: u64 = p
            .parse()
            .map_err(|_| CliError::Usage(format!("bad prime in `{v}`")))?;
        if p < 2 || (2..p).take(1000).any(|d| d * d <= p && p % d == 0) {
            return Err(CliError::Usage(format!("`{p}` is not a prime")));
        }
        return Ok(Field::Prime(p));
    }
    Err(CliError::Usage(format!("bad field `{v}`; use q or fp:<prime>")))
}

fn one_arg<'a>(rest: &[&'a str]) -> Result<&'a str, CliError> {
    match rest {
        [a] => Ok(a),
        _ => Err(CliError::Usage(format!("expected one argument\n\n{USAGE}"))),
    }
}

fn two_args<'a>(rest: &[&'a str]) -> Result<(&'a str, &'a str), CliError> {
    match rest {
        [a, b] => Ok((a, b)),
        _ => Err(CliError::Usage(format!("expected two arguments\n\n{USAGE}"))),
    }
}

fn field_name(f: Field) -> String {
    match f {
        Field::Rationals => "q".into(),
        Field::Prime(p) => format!("fp:{p}"),
    }
}

fn cmd_decompose(input: &str, opts: &Opts) -> Result<String, CliError> {
    let expr = parse_sheaf_expr(input, opts.field)?;
    let sheaf = expr.build(opts.field)?;
    let labels = decompose_sheaf(&sheaf)?;
    if opts.json {
        let parts: Vec<serde_json::Value> = labels
            .iter()
            .map(|(l, c)| json!({"label": l.to_string(), "multiplicity": c}))
            .collect();
        Ok(render::record(
            "decompose",
            json!({"sheaf": expr.to_string(), "field": field_name(opts.field)}),
            json!({"summands": parts, "display": labels.to_string()}),
            json!({"isomorphismCertified": true}),
            json!({}),
        ))
    } else {
        Ok(labels.to_string())
    }
}

fn cmd_cohomology(input: &str, opts: &Opts) -> Result<String, CliError> {
    let expr = parse_sheaf_expr(input, opts.field)?;
    let sheaf = expr.build(opts.field)?;
    let datum = cech(&sheaf)?;
    if opts.json {
        Ok(render::record(
            "cohomology",
            json!({"sheaf": expr.to_string(), "field": field_name(opts.field)}),
            json!({"h0": datum.h0, "h1": datum.h1}),
            json!({"stabilizedWindow": [datum.window.0, datum.window.1]}),
            json!({}),
        ))
    } else {
        Ok(format!(
            "h0 = {}, h1 = {}   (window [{}, {}] stabilized)",
            datum.h0, datum.h1, datum.window.0, datum.window.1
        ))
    }
}

fn cmd_hom(a: &str, b: &str, opts: &Opts) -> Result<String, CliError> {
    let ea = parse_sheaf_expr(a, opts.field)?;
    let eb = parse_sheaf_expr(b, opts.field)?;
    let fa = ea.build(opts.field)?;
    let fb = eb.build(opts.field)?;
    let hom = global_hom(&fa, &fb)?;
    if opts.json {
        Ok(render::record(
            "hom",
            json!({"source": ea.to_string(), "target": eb.to_string(), "field": field_name(opts.field)}),
            json!({"dim": hom.dim()}),
            json!({"basisMorphismsCertified": true}),
            json!({}),
        ))
    } else {
        Ok(format!("dim Hom = {}", hom.dim()))
    }
}

fn cmd_ext(a: &str, b: &str, opts: &Opts) -> Result<String, CliError> {
    let ea = parse_sheaf_expr(a, opts.field)?;
    let eb = parse_sheaf_expr(b, opts.field)?;
    let fa = ea.build(opts.field)?;
    let fb = eb.build(opts.field)?;
    let ext = ext1(&fa, &fb)?;
    if opts.json {
        Ok(render::record(
            "ext",
            json!({"source": ea.to_string(), "target": eb.to_string(), "field": field_name(opts.field)}),
            json!({"dim": ext.dim}),
            json!({"resolutionTwist": ext.resolution_twist,
                   "resolutionVanishingCertified": true}),
            json!({}),
        ))
    } else {
        Ok(format!(
            "dim Ext^1 = {}   (resolved by twists of degree -{})",
            ext.dim, ext.resolution_twist
        ))
    }
}

fn cmd_purity(input: &str, opts: &Opts) -> Result<String, CliError> {
    let chain = parse_chain(input, opts.field)?;
    let sheaves: Vec<_> = chain
        .iter()
        .map(|e| e.build(opts.field))
        .collect::<Result<_, _>>()?;
    let sequence = realize::realize_sequence(&sheaves[0], &sheaves[1], &sheaves[2], opts.seed)?;
    let report = purity_report(&sequence)?;
    if opts.json {
        Ok(render::record(
            "purity",
            json!({
                "sequence": format!("0 -> {} -> {} -> {} -> 0", chain[0], chain[1], chain[2]),
                "field": field_name(opts.field),
                "seed": opts.seed,
            }),
            json!({
                "cPure": report.c_pure,
                "gPure": report.g_pure,
                "gPureViaTensor": report.g_pure_via_tensor,
                "gPureViaTorsionHom": report.g_pure_via_torsion_hom,
                "criteriaAgreement": report.criteria_agreement,
            }),
            json!({
                "exactnessCertified": true,
                "failingTensorTest": report.failing_tensor_test.map(|l| l.to_string()),
                "failingHomTest": report.failing_hom_test.map(|l| l.to_string()),
            }),
            json!({}),
        ))
    } else {
        Ok(format!(
            "c-pure: {}\ng-pure: {}\ng-pure via tensor criterion: {}\ng-pure via torsion-Hom criterion: {}\ncriteria agree: {}",
            yes_no(report.c_pure),
            yes_no(report.g_pure),
            yes_no(report.g_pure_via_tensor),
            yes_no(report.g_pure_via_torsion_hom),
            yes_no(report.criteria_agreement),
        ))
    }
}

fn cmd_tilt(input: &str, opts: &Opts) -> Result<String, CliError> {
    let expr = parse_sheaf_expr(input, opts.field)?;
    let sheaf = expr.build(opts.field)?;
    let image = tilt(&sheaf)?;
    let dec0 = decompose_rep(&image.deg0)?;
    let dec1 = decompose_rep(&image.deg1)?;
    let labels = |d: &purisheaf_core::kronecker::RepMultiset| -> Vec<String> {
        d.iter()
            .flat_map(|(l, c)| std::iter::repeat(l.to_string()).take(*c))
            .collect()
    };
    if opts.json {
        Ok(render::record(
            "tilt",
            json!({"sheaf": expr.to_string(), "field": field_name(opts.field)}),
            json!({
                "deg0": {"d1": image.deg0.d1, "d0": image.deg0.d0, "labels": labels(&dec0.labels)},
                "deg1": {"d1": image.deg1.d1, "d0": image.deg1.d0, "labels": labels(&dec1.labels)},
            }),
            json!({"decompositionIsoCertified": true}),
            json!({}),
        ))
    } else {
        Ok(format!(
            "deg0: dims (d1, d0) = ({}, {}), summands: {}\ndeg1: dims (d1, d0) = ({}, {}), summands: {}",
            image.deg0.d1,
            image.deg0.d0,
            join_or_none(&labels(&dec0.labels)),
            image.deg1.d1,
            image.deg1.d0,
            join_or_none(&labels(&dec1.labels)),
        ))
    }
}

fn cmd_zg_closure(input: &str, opts: &Opts) -> Result<String, CliError> {
    let desc = parse_zg_description(input, opts.field)?;
    let closed = closure(&desc);
    let rendered = render::describe_point_set(&closed);
    if opts.json {
        Ok(render::record(
            "zg-closure",
            json!({"description": input.trim(), "field": field_name(opts.field)}),
            json!({"closure": rendered}),
            json!({"idempotent": closure(&closed) == closed}),
            json!({
                "geometricRules": "imported from the spectrum description of a Dedekind domain",
                "mixedDescriptions": "closure of a mixed description is the union of the part closures",
            }),
        ))
    } else {
        Ok(rendered)
    }
}

fn cmd_zg_attributes(input: &str, opts: &Opts) -> Result<String, CliError> {
    let point = parse_zg_point(input, opts.field)?;
    let attrs = attributes(&point);
    let sigma = sigma_c_pure_injective(&point);
    if opts.json {
        Ok(render::record(
            "zg-attributes",
            json!({"point": point.to_string(), "field": field_name(opts.field)}),
            json!({
                "gPureInjective": attrs.g_pure_injective,
                "isLineBundle": attrs.is_line_bundle,
                "isolated": attrs.isolated,
                "closedSingleton": attrs.closed_singleton,
            }),
            json!({}),
            json!({
                "sigmaCPureInjective": sigma,
                "sigmaSource": sigma.map(|_| "catalog attribute, not computed"),
            }),
        ))
    } else {
        Ok(format!(
            "g-pure-injective: {}\nline bundle: {}\nisolated: {}\nclosed singleton: {}{}",
            yes_no(attrs.g_pure_injective),
            yes_no(attrs.is_line_bundle),
            yes_no(attrs.isolated),
            yes_no(attrs.closed_singleton),
            match sigma {
                Some(true) => "\nsigma-c-pure-injective: yes (catalog attribute)",
                _ => "",
            }
        ))
    }
}

fn cmd_zp_table(opts: &Opts) -> Result<String, CliError> {
    let rows = zp_table()?;
    if opts.json {
        let json_rows: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "secX": r.label_x,
                    "secY": r.label_y,
                    "cbRank": r.cb_rank,
                    "injective": r.injective,
                    "gPureInjective": r.g_pure_injective,
                    "quasicoherent": r.quasicoherent,
                })
            })
            .collect();
        Ok(render::record(
            "zp-table",
            json!({}),
            json!({"rows": json_rows}),
            json!({"recomputedColumnsMatchStored": true}),
            json!({
                "cbRank": "stored from the source description of the spectrum",
                "injective": "stored",
                "gPureInjective": "recomputed by the skyscraper predicate",
                "quasicoherent": "recomputed by the localization predicate",
            }),
        ))
    } else {
        Ok(render::zp_table_text(&rows))
    }
}

fn yes_no(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

fn join_or_none(labels: &[String]) -> String {
    if labels.is_empty() {
        "none".into()
    } else {
        labels.join(" ++ ")
    }
}
