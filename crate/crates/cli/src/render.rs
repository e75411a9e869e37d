//! Rendering helpers: the stable JSON record shape and the aligned text
//! layout of the spectrum table.

use purisheaf_core::twopoint::TableRow;
use purisheaf_core::ziegler::{LbFamily, PointSet, PointSetDescription};
use serde_json::{json, Value};

/// The one record shape every command emits: command, inputs, result,
/// certificates, provenance.
pub fn record(
    command: &str,
    inputs: Value,
    result: Value,
    certificates: Value,
    provenance: Value,
) -> String {
    let v = json!({
        "command": command,
        "inputs": inputs,
        "result": result,
        "certificates": certificates,
        "provenance": provenance,
    });
    serde_json::to_string_pretty(&v).expect("serializable record")
}

/// Point-set descriptions in the same grammar the parser accepts.
pub fn describe_point_set(d: &PointSetDescription) -> String {
    let mut items: Vec<String> = Vec::new();
    match &d.lb_part {
        LbFamily::FiniteSet(s) => {
            for n in s {
                items.push(format!("LB({n})"));
            }
        }
        LbFamily::AllAtMost(n) => items.push(format!("LB(<={n})")),
        LbFamily::AllAtLeast(n) => items.push(format!("LB(>={n})")),
        LbFamily::All => items.push("LB(*)".into()),
    }
    for (pt, m) in &d.tors_finite {
        items.push(format!("T({pt}, {m})"));
    }
    match &d.tors_all_lengths {
        PointSet::All => items.push("T(*, *)".into()),
        PointSet::Finite(s) => {
            for pt in s {
                items.push(format!("T({pt}, *)"));
            }
        }
    }
    match &d.prufer_points {
        PointSet::All => items.push("Prufer(*)".into()),
        PointSet::Finite(s) => {
            for pt in s {
                items.push(format!("Prufer({pt})"));
            }
        }
    }
    match &d.adic_points {
        PointSet::All => items.push("Adic(*)".into()),
        PointSet::Finite(s) => {
            for pt in s {
                items.push(format!("Adic({pt})"));
            }
        }
    }
    if d.generic {
        items.push("Gen".into());
    }
    if items.is_empty() {
        "(empty)".into()
    } else {
        items.join(", ")
    }
}

/// The spectrum table in an aligned text layout mirroring the source.
pub fn zp_table_text(rows: &[TableRow]) -> String {
    let mut lines = Vec::new();
    let headers = ["N(X)", "N(Y)", "CB rank", "injective", "g-pure-inj.", "quasicoh."];
    let mut table: Vec<[String; 6]> = vec![headers.map(str::to_string)];
    for r in rows {
        let mark = |b: bool| if b { "x".to_string() } else { String::new() };
        table.push([
            r.label_x.clone(),
            r.label_y.clone(),
            r.cb_rank.to_string(),
            mark(r.injective),
            mark(r.g_pure_injective),
            mark(r.quasicoherent),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    for (i, row) in table.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        lines.push(cells.join(" | ").trim_end().to_string());
        if i == 0 {
            let sep: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            lines.push(sep.join("-+-"));
        }
    }
    lines.join("\n")
}
