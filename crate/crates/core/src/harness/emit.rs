use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::config::OutputFormat;
use super::study::StudyTable;
use crate::analysis::{ConvergenceRecord, Status};
use crate::wgspace::Stabilizer;

const HEADER: [&str; 7] = [
    "h_label",
    "tau",
    "triple_bar_error",
    "triple_bar_order",
    "l2_error",
    "l2_order",
    "status",
];

/// Six significant digits with a signed two-digit exponent, `7.16917e-02`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// `1/n` for `h = 1/n`.
pub fn format_h(h: f64) -> String {
    let n = (1.0 / h).round();
    if (n * h - 1.0).abs() < 1e-12 {
        format!("1/{n}")
    } else {
        format_sci(h)
    }
}

fn error_cell(r: &ConvergenceRecord, e: Option<f64>) -> String {
    if r.status.is_ni() {
        "NI".into()
    } else {
        e.map(format_sci).unwrap_or_default()
    }
}

fn order_cell(o: Option<f64>) -> String {
    o.map(format_sci).unwrap_or_default()
}

fn row_cells(r: &ConvergenceRecord) -> [String; 7] {
    [
        format_h(r.h_label),
        format_sci(r.tau),
        error_cell(r, r.triple_bar_error),
        order_cell(r.triple_bar_order),
        error_cell(r, r.l2_error),
        order_cell(r.l2_order),
        r.status.to_string(),
    ]
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

/// One table. NI tables render their error cells as `NI`; the first row
/// has blank orders.
pub fn emit_table(records: &[ConvergenceRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => csv_text(&HEADER, records.iter().map(|r| row_cells(r).to_vec())),
        OutputFormat::Markdown => {
            let mut out = String::from("| h | τ | \\|\\|\\|e\\|\\|\\| | order | ‖e‖ | order | status |\n");
            out.push_str("|---|---|---|---|---|---|---|\n");
            for r in records {
                out.push_str("| ");
                out.push_str(&row_cells(r).join(" | "));
                out.push_str(" |\n");
            }
            out
        }
    }
}

/// Several tables: CSV gains leading `k,j,l,stabilizer` columns when more
/// than one combination is present; Markdown gets one section per table
/// followed by finest-pair order grids.
pub fn emit_study(tables: &[StudyTable], format: OutputFormat) -> String {
    match (format, tables) {
        (OutputFormat::Csv, [single]) => emit_table(&single.records, format),
        (OutputFormat::Csv, _) => {
            let header: Vec<&str> = ["k", "j", "l", "stabilizer"].into_iter().chain(HEADER).collect();
            csv_text(
                &header,
                tables.iter().flat_map(|t| {
                    let c = t.combination;
                    t.records.iter().map(move |r| {
                        let mut row = vec![c.k.to_string(), c.j.to_string(), c.l.to_string(), c.stabilizer.to_string()];
                        row.extend(row_cells(r));
                        row
                    })
                }),
            )
        }
        (OutputFormat::Markdown, _) => {
            let mut out = String::new();
            for t in tables {
                let _ = writeln!(out, "### {}: {}\n", t.combination, t.status);
                out.push_str(&emit_table(&t.records, format));
                out.push('\n');
            }
            if tables.len() > 1 {
                out.push_str(&order_grids(tables));
            }
            out
        }
    }
}

/// Cell text of a finest-pair order grid: `NI`, or both orders to two
/// decimals.
pub fn grid_cell(t: &StudyTable) -> String {
    if t.status == Status::NiUnstable {
        return "NI".into();
    }
    let (a, b) = t.finest_orders();
    let f = |o: Option<f64>| o.map_or("-".to_string(), |o| format!("{o:.2}"));
    let cell = format!("{}/{}", f(a), f(b));
    if t.status.is_ni() {
        format!("NI ({cell})")
    } else {
        cell
    }
}

/// Markdown grids (rows `l`, columns `j`) per `(k, stabilizer)`.
pub fn order_grids(tables: &[StudyTable]) -> String {
    let keys: BTreeSet<(usize, Stabilizer)> = tables.iter().map(|t| (t.combination.k, t.combination.stabilizer)).collect();
    let mut out = String::new();
    for (k, stab) in keys {
        let sub: Vec<&StudyTable> = tables
            .iter()
            .filter(|t| t.combination.k == k && t.combination.stabilizer == stab)
            .collect();
        let js: BTreeSet<usize> = sub.iter().map(|t| t.combination.j).collect();
        let ls: BTreeSet<usize> = sub.iter().map(|t| t.combination.l).collect();
        let _ = writeln!(out, "### Finest-pair orders, k={k}, {stab}\n");
        let _ = write!(out, "| k={k} |");
        for j in &js {
            let _ = write!(out, " j={j} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(js.len()));
        out.push('\n');
        for l in &ls {
            let _ = write!(out, "| l={l} |");
            for j in &js {
                let cell = sub
                    .iter()
                    .find(|t| t.combination.j == *j && t.combination.l == *l)
                    .map(|t| grid_cell(t))
                    .unwrap_or_default();
                let _ = write!(out, " {cell} |");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::finalize_table;
    use crate::harness::config::Combination;

    fn table16() -> Vec<ConvergenceRecord> {
        let mut r = vec![
            ConvergenceRecord::new(0.25, 1e-4, 7.169166e-02, 6.189540e-03),
            ConvergenceRecord::new(0.125, 1e-4, 1.805445e-02, 7.725189e-04),
            ConvergenceRecord::new(0.0625, 1e-4, 4.522790e-03, 9.652195e-05),
            ConvergenceRecord::new(0.03125, 1e-4, 1.131375e-03, 1.208548e-05),
        ];
        finalize_table(&mut r);
        r
    }

    #[test]
    fn scientific_format() {
        assert_eq!(format_sci(7.169166e-02), "7.16917e-02");
        assert_eq!(format_sci(1.989451), "1.98945e+00");
        assert_eq!(format_sci(-5.850856e-02), "-5.85086e-02");
        assert_eq!(format_sci(1e-100), "1.00000e-100");
        assert_eq!(format_sci(0.0), "0.00000e+00");
        assert_eq!(format_h(1.0 / 32.0), "1/32");
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(
            emit_table(&[], OutputFormat::Csv),
            "h_label,tau,triple_bar_error,triple_bar_order,l2_error,l2_order,status\n"
        );
    }

    #[test]
    fn four_rows_first_orders_blank() {
        let text = emit_table(&table16(), OutputFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[1], "1/4,1.00000e-04,7.16917e-02,,6.18954e-03,,converged");
        assert!(lines[2].starts_with("1/8,1.00000e-04,1.80544e-02,1.98945e+00,7.72519e-04,3.00219e+00"), "{}", lines[2]);
    }

    #[test]
    fn ni_renders_error_cells() {
        let mut r = vec![
            ConvergenceRecord::failed(0.25, 1e-3, Status::NiUnstable),
            ConvergenceRecord::failed(0.125, 1e-3, Status::NiUnstable),
        ];
        finalize_table(&mut r);
        let text = emit_table(&r, OutputFormat::Csv);
        assert_eq!(text.lines().nth(2).unwrap(), "1/8,1.00000e-03,NI,,NI,,NI_unstable");
        let md = emit_table(&r, OutputFormat::Markdown);
        assert!(md.lines().nth(3).unwrap().contains("| NI |"));
    }

    #[test]
    fn multi_table_csv_and_grid() {
        let t = |j, records: Vec<ConvergenceRecord>| StudyTable {
            combination: Combination::new(2, j, 1, Stabilizer::Projected),
            status: crate::analysis::classify(&records),
            records,
            failures: vec![],
        };
        let tables = vec![
            t(0, vec![ConvergenceRecord::failed(0.25, 1e-3, Status::NiUnstable)]),
            t(1, table16()),
        ];
        let csv = emit_study(&tables, OutputFormat::Csv);
        assert!(csv.starts_with("k,j,l,stabilizer,h_label,"));
        assert_eq!(csv.lines().count(), 6);
        let md = emit_study(&tables, OutputFormat::Markdown);
        assert!(md.contains("| l=1 | NI | 2.00/3.00 |"), "{md}");
    }
}
