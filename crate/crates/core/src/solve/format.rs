//! Free-format MPS and CPLEX-LP emission. Output depends only on the model,
//! so the same model always yields byte-identical text.

use std::fmt::Write;

use crate::model::{MilpModel, Sense};

const OBJECTIVE_ROW: &str = "obj";
const TERMS_PER_LINE: usize = 8;

/// Shortest text that parses back to exactly `x`.
pub fn format_number(x: f64) -> String {
    let abs = x.abs();
    if x == 0.0 {
        "0".to_owned()
    } else if (1e-5..1e15).contains(&abs) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Column-major view of the constraint matrix.
fn columns(model: &MilpModel) -> Vec<Vec<(usize, f64)>> {
    let mut cols = vec![Vec::new(); model.num_columns()];
    for (i, row) in model.constraints().iter().enumerate() {
        for &(col, a) in &row.coefficients {
            cols[col].push((i, a));
        }
    }
    cols
}

pub fn write_mps(model: &MilpModel) -> String {
    let rows = model.constraints();
    let row_names: Vec<String> = rows.iter().map(|r| r.file_name()).collect();
    let mut out = String::new();

    out.push_str("NAME UC\nROWS\n");
    let _ = writeln!(out, " N  {OBJECTIVE_ROW}");
    for (row, name) in rows.iter().zip(&row_names) {
        let kind = match row.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        let _ = writeln!(out, " {kind}  {name}");
    }

    out.push_str("COLUMNS\n");
    let cols = columns(model);
    let mut in_integer_block = false;
    let mut marker = 0;
    for var in model.variables() {
        if var.is_binary() != in_integer_block {
            let tag = if var.is_binary() { "INTORG" } else { "INTEND" };
            let _ = writeln!(out, "    MARKER{marker}  'MARKER'  '{tag}'");
            marker += 1;
            in_integer_block = var.is_binary();
        }
        let name = var.name();
        let cost = model.objective_coefficient(var.column);
        if cost != 0.0 || cols[var.column].is_empty() {
            let _ = writeln!(out, "    {name}  {OBJECTIVE_ROW}  {}", format_number(cost));
        }
        for &(i, a) in &cols[var.column] {
            let _ = writeln!(out, "    {name}  {}  {}", row_names[i], format_number(a));
        }
    }
    if in_integer_block {
        let _ = writeln!(out, "    MARKER{marker}  'MARKER'  'INTEND'");
    }

    out.push_str("RHS\n");
    for (row, name) in rows.iter().zip(&row_names) {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    RHS  {name}  {}", format_number(row.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for var in model.variables().iter().filter(|v| v.is_binary()) {
        let _ = writeln!(out, " BV BND  {}", var.name());
    }
    out.push_str("ENDATA\n");
    out
}

/// Appends `a·name` terms, wrapping long expressions.
fn push_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) -> bool {
    let mut any = false;
    for (n, (a, name)) in terms.enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let (sign, magnitude) = if a < 0.0 { ("-", -a) } else { ("+", a) };
        if n == 0 {
            let sign = if a < 0.0 { "-" } else { "" };
            let _ = write!(out, " {sign}{} {name}", format_number(magnitude));
        } else {
            let _ = write!(out, " {sign} {} {name}", format_number(magnitude));
        }
        any = true;
    }
    any
}

pub fn write_lp(model: &MilpModel) -> String {
    let vars = model.variables();
    let names: Vec<String> = vars.iter().map(|v| v.name()).collect();
    let mut out = String::new();

    out.push_str("Minimize\n obj:");
    if !push_terms(
        &mut out,
        model
            .objective()
            .iter()
            .map(|&(c, a)| (a, names[c].clone())),
    ) {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");

    let mut used = vec![false; vars.len()];
    for &(c, _) in model.objective() {
        used[c] = true;
    }
    for row in model.constraints() {
        let _ = write!(out, " {}:", row.file_name());
        if !push_terms(
            &mut out,
            row.coefficients.iter().map(|&(c, a)| (a, names[c].clone())),
        ) {
            out.push_str(" 0");
            if let Some(first) = names.first() {
                let _ = write!(out, " {first}");
            }
        }
        for &(c, _) in &row.coefficients {
            used[c] = true;
        }
        let _ = writeln!(out, " {} {}", row.sense.symbol(), format_number(row.rhs));
    }

    // Continuous columns that appear nowhere else still need a declaration.
    let orphans: Vec<&String> = vars
        .iter()
        .filter(|v| !v.is_binary() && !used[v.column])
        .map(|v| &names[v.column])
        .collect();
    if !orphans.is_empty() {
        out.push_str("Bounds\n");
        for name in orphans {
            let _ = writeln!(out, " {name} >= 0");
        }
    }
    let binaries: Vec<&String> = vars
        .iter()
        .filter(|v| v.is_binary())
        .map(|v| &names[v.column])
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Family, RowKey, VarKind};

    fn single_row_model() -> MilpModel {
        // min x s.t. x <= 5
        let key = RowKey {
            family: Family::Demand,
            unit: None,
            period: 1,
            inner: 0,
        };
        MilpModel::from_parts(
            vec![(VarKind::UnderProduction, None, 1)],
            vec![(key, vec![(0, 1.0)], Sense::Le, 5.0)],
            vec![(0, 1.0)],
        )
        .unwrap()
    }

    fn empty_model() -> MilpModel {
        MilpModel::from_parts(vec![], vec![], vec![]).unwrap()
    }

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            -0.0,
            1.0,
            -2.5,
            0.1,
            1.0 / 3.0,
            1e-7,
            123456789.125,
            2e20,
            -4.4e-9,
            f64::MAX,
        ] {
            let text = format_number(x);
            assert_eq!(text.parse::<f64>().unwrap(), x, "{text}");
        }
        assert_eq!(format_number(5.0), "5");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1e-7), "1e-7");
    }

    #[test]
    fn empty_mps_is_a_skeleton() {
        let mps = write_mps(&empty_model());
        let sections: Vec<&str> = mps.lines().filter(|l| !l.starts_with(' ')).collect();
        assert_eq!(
            sections,
            ["NAME UC", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]
        );
    }

    #[test]
    fn single_constraint_mps() {
        let mps = write_mps(&single_row_model());
        let rows: Vec<&str> = mps
            .lines()
            .skip_while(|l| *l != "ROWS")
            .skip(1)
            .take_while(|l| l.starts_with(' '))
            .collect();
        assert_eq!(rows, [" N  obj", " L  demand_1"]);
        assert!(mps.contains("    RHS  demand_1  5\n"));
        assert!(mps.contains("    pu_1  obj  1\n    pu_1  demand_1  1\n"));
    }

    #[test]
    fn empty_lp_shape() {
        assert_eq!(
            write_lp(&empty_model()),
            "Minimize\n obj: 0\nSubject To\nEnd\n"
        );
    }

    #[test]
    fn single_constraint_lp() {
        assert_eq!(
            write_lp(&single_row_model()),
            "Minimize\n obj: 1 pu_1\nSubject To\n demand_1: 1 pu_1 <= 5\nEnd\n"
        );
    }

    #[test]
    fn binaries_are_marked() {
        let key = RowKey {
            family: Family::Bounds,
            unit: Some(1),
            period: 1,
            inner: 1,
        };
        let model = MilpModel::from_parts(
            vec![
                (VarKind::OnOff, Some(1), 1),
                (VarKind::Production, Some(1), 1),
            ],
            vec![(key, vec![(0, 50.0), (1, -1.0)], Sense::Le, 0.0)],
            vec![],
        )
        .unwrap();
        let lp = write_lp(&model);
        assert!(lp.contains("\nBinaries\n v_1_1\nEnd\n"), "{lp}");
        assert!(
            lp.contains(" bounds_1_1_1: 50 v_1_1 - 1 p_1_1 <= 0\n"),
            "{lp}"
        );
        let mps = write_mps(&model);
        assert!(
            mps.contains(
                "'INTORG'\n    v_1_1  bounds_1_1_1  50\n    MARKER1  'MARKER'  'INTEND'\n"
            ),
            "{mps}"
        );
        assert!(mps.contains(" BV BND  v_1_1\n"));
    }

    #[test]
    fn long_rows_wrap() {
        let vars: Vec<_> = (1..=20)
            .map(|k| (VarKind::Production, Some(1), k))
            .collect();
        let key = RowKey {
            family: Family::Demand,
            unit: None,
            period: 1,
            inner: 0,
        };
        let terms = (0..20).map(|c| (c, 1.0)).collect();
        let model =
            MilpModel::from_parts(vars, vec![(key, terms, Sense::Eq, 1.0)], vec![]).unwrap();
        let lp = write_lp(&model);
        assert!(lp.lines().all(|l| l.len() < 120), "{lp}");
        assert_eq!(lp.matches(" + 1 p_1_").count(), 19);
    }
}
