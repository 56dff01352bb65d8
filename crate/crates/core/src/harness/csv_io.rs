use std::path::Path;
use std::str::FromStr;

use super::sweep::SweepRow;
use crate::error::{Error, Result};
use crate::sellers::PenaltySemantics;

pub const CSV_HEADER: [&str; 20] = [
    "seller",
    "buyer",
    "semantics",
    "T",
    "gamma",
    "gamma0",
    "v",
    "r",
    "beta",
    "grid_step",
    "revenue",
    "regret",
    "surplus",
    "kappa_star",
    "lie_count",
    "best_false_valuation",
    "bound_eq_reggamma",
    "bound_thm1",
    "lower_prop1",
    "wall_ms",
];

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn format12(x: f64) -> String {
    round12(x).to_string()
}

/// The row as it reads back from CSV: every float rounded to 12 significant
/// digits.
pub fn rounded(row: &SweepRow) -> SweepRow {
    let r = |x: Option<f64>| x.map(round12);
    SweepRow {
        gamma: round12(row.gamma),
        gamma0: r(row.gamma0),
        v: round12(row.v),
        beta: r(row.beta),
        grid_step: r(row.grid_step),
        revenue: r(row.revenue),
        regret: r(row.regret),
        surplus: r(row.surplus),
        best_false_valuation: r(row.best_false_valuation),
        bound_eq_reggamma: r(row.bound_eq_reggamma),
        bound_thm1: r(row.bound_thm1),
        lower_prop1: round12(row.lower_prop1),
        wall_ms: r(row.wall_ms),
        ..row.clone()
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn optf(x: Option<f64>) -> String {
    x.map_or(String::new(), format12)
}

fn record(row: &SweepRow) -> [String; 20] {
    [
        row.seller.clone(),
        row.buyer.clone(),
        opt(row.semantics),
        row.horizon.to_string(),
        format12(row.gamma),
        optf(row.gamma0),
        format12(row.v),
        opt(row.r),
        optf(row.beta),
        optf(row.grid_step),
        optf(row.revenue),
        optf(row.regret),
        optf(row.surplus),
        opt(row.kappa_star),
        opt(row.lie_count),
        optf(row.best_false_valuation),
        optf(row.bound_eq_reggamma),
        optf(row.bound_thm1),
        format12(row.lower_prop1),
        optf(row.wall_ms),
    ]
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Write `rows` under the fixed header.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    write_csv(rows, file, path)
}

/// Write `rows` under the fixed header to any writer; `label` names the
/// destination in errors.
pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W, label: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err(label))?;
    for row in rows {
        w.write_record(record(row)).map_err(csv_err(label))?;
    }
    w.flush().map_err(|e| Error::Io {
        path: label.to_path_buf(),
        source: e,
    })
}

fn parse_field<T: FromStr>(field: &str, column: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Parameter(format!("line {line}: bad {column} value '{field}'")))
}

fn parse_opt<T: FromStr>(field: &str, column: &str, line: usize) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_field(field, column, line).map(Some)
    }
}

fn parse_semantics(field: &str, line: usize) -> Result<Option<PenaltySemantics>> {
    match field {
        "" => Ok(None),
        "strict" => Ok(Some(PenaltySemantics::Strict)),
        "literal" => Ok(Some(PenaltySemantics::Literal)),
        other => Err(Error::Parameter(format!("line {line}: bad semantics '{other}'"))),
    }
}

/// Read rows written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parameter(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = i + 2;
        let f = |k: usize| &rec[k];
        rows.push(SweepRow {
            seller: f(0).to_string(),
            buyer: f(1).to_string(),
            semantics: parse_semantics(f(2), line)?,
            horizon: parse_field(f(3), CSV_HEADER[3], line)?,
            gamma: parse_field(f(4), CSV_HEADER[4], line)?,
            gamma0: parse_opt(f(5), CSV_HEADER[5], line)?,
            v: parse_field(f(6), CSV_HEADER[6], line)?,
            r: parse_opt(f(7), CSV_HEADER[7], line)?,
            beta: parse_opt(f(8), CSV_HEADER[8], line)?,
            grid_step: parse_opt(f(9), CSV_HEADER[9], line)?,
            revenue: parse_opt(f(10), CSV_HEADER[10], line)?,
            regret: parse_opt(f(11), CSV_HEADER[11], line)?,
            surplus: parse_opt(f(12), CSV_HEADER[12], line)?,
            kappa_star: parse_opt(f(13), CSV_HEADER[13], line)?,
            lie_count: parse_opt(f(14), CSV_HEADER[14], line)?,
            best_false_valuation: parse_opt(f(15), CSV_HEADER[15], line)?,
            bound_eq_reggamma: parse_opt(f(16), CSV_HEADER[16], line)?,
            bound_thm1: parse_opt(f(17), CSV_HEADER[17], line)?,
            lower_prop1: parse_field(f(18), CSV_HEADER[18], line)?,
            wall_ms: parse_opt(f(19), CSV_HEADER[19], line)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepRow {
        SweepRow {
            seller: "pfs".into(),
            buyer: "grid".into(),
            semantics: Some(PenaltySemantics::Strict),
            horizon: 1000,
            gamma: 0.85,
            gamma0: None,
            v: 0.75,
            r: Some(7),
            beta: None,
            grid_step: Some(0.03),
            revenue: Some(700.123456789012345),
            regret: Some(49.876543210987654),
            surplus: Some(1.0 / 3.0),
            kappa_star: Some(4),
            lie_count: Some(2),
            best_false_valuation: Some(0.69),
            bound_eq_reggamma: Some(123.456),
            bound_thm1: None,
            lower_prop1: 7.7,
            wall_ms: None,
        }
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(format12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format12(0.75), "0.75");
        assert_eq!(format12(100.0), "100");
        assert_eq!(format12(2.0 / 3.0 * 1e-7), "0.0000000666666666667");
    }

    #[test]
    fn header_only_for_no_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.csv");
        emit_csv(&[], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
        assert!(read_csv(&p).unwrap().is_empty());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rows.csv");
        let mut skipped = sample();
        skipped.buyer = "skipped:dp state cap 10 exceeded".into();
        skipped.regret = None;
        skipped.kappa_star = None;
        let rows = vec![sample(), skipped];
        emit_csv(&rows, &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 3);
        let back = read_csv(&p).unwrap();
        let expected: Vec<_> = rows.iter().map(rounded).collect();
        assert_eq!(back, expected);
        let p2 = dir.path().join("again.csv");
        emit_csv(&back, &p2).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn io_error_names_path() {
        let err = emit_csv(&[], Path::new("/nonexistent/dir/rows.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/rows.csv"), "{err}");
    }
}
