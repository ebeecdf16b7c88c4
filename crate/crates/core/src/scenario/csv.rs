//! Data CSV: header `time,INJ:<name>...,PRD:<name>...,BHP:<name>...`, one row
//! per timestep. PRD and BHP groups are each optional; producers are declared
//! by whichever of them is present, and must agree when both are.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::series::{RateSeries, WellField};

#[derive(Clone, Copy, PartialEq)]
enum Group {
    Inj,
    Prd,
    Bhp,
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<(WellField, RateSeries)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(Error::file(path))?;
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(file);
    let csv_err = |line: u64, msg: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let schema = |msg: String| Error::Schema {
        path: path.to_path_buf(),
        msg,
    };

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::NoData(path.to_path_buf())),
        Some(r) => r.map_err(|e| csv_err(1, e.to_string()))?,
    };
    if header.iter().all(str::is_empty) {
        return Err(Error::NoData(path.to_path_buf()));
    }
    if !header.get(0).is_some_and(|h| h.eq_ignore_ascii_case("time")) {
        return Err(schema("first column must be `time`".into()));
    }

    let mut columns: Vec<(Group, String)> = Vec::new();
    for name in header.iter().skip(1) {
        let (group, well) = if let Some(w) = name.strip_prefix("INJ:") {
            (Group::Inj, w)
        } else if let Some(w) = name.strip_prefix("PRD:") {
            (Group::Prd, w)
        } else if let Some(w) = name.strip_prefix("BHP:") {
            (Group::Bhp, w)
        } else {
            return Err(schema(format!("column `{name}` lacks an INJ:, PRD: or BHP: prefix")));
        };
        if columns.iter().any(|(g, w)| *g == group && w == well) {
            return Err(schema(format!("duplicate column `{name}`")));
        }
        columns.push((group, well.to_string()));
    }
    let names = |group: Group| -> Vec<String> {
        columns
            .iter()
            .filter(|(g, _)| *g == group)
            .map(|(_, w)| w.clone())
            .collect()
    };
    let injectors = names(Group::Inj);
    let prd = names(Group::Prd);
    let bhp = names(Group::Bhp);
    if injectors.is_empty() {
        return Err(schema("no INJ: columns".into()));
    }
    if !prd.is_empty() && !bhp.is_empty() {
        if let Some(w) = bhp.iter().find(|w| !prd.contains(w)) {
            return Err(schema(format!("missing column `PRD:{w}` for declared producer `{w}`")));
        }
        if let Some(w) = prd.iter().find(|w| !bhp.contains(w)) {
            return Err(schema(format!("missing column `BHP:{w}` for declared producer `{w}`")));
        }
    }
    let producers = if prd.is_empty() { bhp.clone() } else { prd.clone() };
    if producers.is_empty() {
        return Err(schema("no PRD: or BHP: columns declare any producer".into()));
    }
    let field = WellField::new(injectors.clone(), producers.clone()).map_err(|e| schema(e.to_string()))?;

    // column index of each matrix entry
    let locate = |group: Group, order: &[String]| -> Vec<usize> {
        order
            .iter()
            .map(|w| 1 + columns.iter().position(|(g, n)| *g == group && n == w).unwrap())
            .collect()
    };
    let inj_cols = locate(Group::Inj, &injectors);
    let prd_cols = (!prd.is_empty()).then(|| locate(Group::Prd, &producers));
    let bhp_cols = (!bhp.is_empty()).then(|| locate(Group::Bhp, &producers));

    let width = header.len();
    let mut times = Vec::new();
    let mut inj = Vec::new();
    let mut prod = Vec::new();
    let mut pres = Vec::new();
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != width {
            return Err(csv_err(
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let parse = |c: usize| -> Result<f64> {
            let field = &record[c];
            field
                .parse::<f64>()
                .map_err(|_| csv_err(line, format!("cannot parse `{field}` in column `{}`", &header[c])))
        };
        times.push(parse(0)?);
        for &c in &inj_cols {
            inj.push(parse(c)?);
        }
        if let Some(cols) = &prd_cols {
            for &c in cols {
                prod.push(parse(c)?);
            }
        }
        if let Some(cols) = &bhp_cols {
            for &c in cols {
                pres.push(parse(c)?);
            }
        }
    }
    let n = times.len();
    if n == 0 {
        return Err(Error::NoData(path.to_path_buf()));
    }
    let to_matrix = |v: Vec<f64>, m: usize| Array2::from_shape_vec((n, m), v).expect("row-major fill");
    let series = RateSeries::new(
        times,
        to_matrix(inj, field.n_inj()),
        prd_cols.map(|_| to_matrix(prod, field.n_pro())),
        bhp_cols.map(|_| to_matrix(pres, field.n_pro())),
    );
    let series = series.validate(&field)?;
    Ok((field, series))
}

pub fn write_csv(field: &WellField, series: &RateSeries, path: impl AsRef<Path>) -> Result<()> {
    series.check(field)?;
    let mut out = String::new();
    out.push_str("time");
    for w in field.injectors() {
        out.push_str(&format!(",INJ:{w}"));
    }
    if series.production.is_some() {
        for w in field.producers() {
            out.push_str(&format!(",PRD:{w}"));
        }
    }
    if series.bhp.is_some() {
        for w in field.producers() {
            out.push_str(&format!(",BHP:{w}"));
        }
    }
    out.push('\n');
    for n in 0..series.n_steps() {
        out.push_str(&series.times[n].to_string());
        let groups = [Some(&series.injection), series.production.as_ref(), series.bhp.as_ref()];
        for m in groups.into_iter().flatten() {
            for v in m.row(n) {
                out.push(',');
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    let mut f = File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate, streak_preset};

    fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn round_trip_generated_series() {
        let dir = tempfile::tempdir().unwrap();
        let spec = streak_preset();
        let s = generate(&spec).unwrap();
        let p = dir.path().join("s.csv");
        write_csv(&spec.field, &s, &p).unwrap();
        let (field, back) = read_csv(&p).unwrap();
        assert_eq!(field, spec.field);
        assert_eq!(back, s);
    }

    #[test]
    fn round_trip_with_bhp_and_awkward_values() {
        let dir = tempfile::tempdir().unwrap();
        let field = WellField::numbered(1, 2).unwrap();
        let s = RateSeries::new(
            vec![0.0, 0.1, 1.0 / 3.0],
            ndarray::array![[1e-300], [0.1 + 0.2], [12345.678901234567]],
            Some(ndarray::array![[1.0, 2.0], [f64::MIN_POSITIVE, 3.0], [-0.0, 5e20]]),
            Some(ndarray::array![[100.0, 99.5], [98.25, 97.0], [96.0, 95.125]]),
        );
        let p = dir.path().join("b.csv");
        write_csv(&field, &s, &p).unwrap();
        let (_, back) = read_csv(&p).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn missing_producer_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "m.csv", "time,INJ:I1,PRD:P1,BHP:P1,BHP:P2\n0,1,1,1,1\n");
        match read_csv(&p) {
            Err(Error::Schema { msg, .. }) => assert!(msg.contains("PRD:P2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_no_data() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "e.csv", "");
        assert!(matches!(read_csv(&p), Err(Error::NoData(_))));
        let p = write_file(&dir, "h.csv", "time,INJ:I1,PRD:P1\n");
        assert!(matches!(read_csv(&p), Err(Error::NoData(_))));
    }

    #[test]
    fn ragged_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "r.csv", "time,INJ:I1,PRD:P1\n0,1,2\n1,2\n");
        match read_csv(&p) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unparseable_number_reports_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "n.csv", "time, INJ:I1, PRD:P1\n0, 1, 2\n1, abc, 3\n");
        match read_csv(&p) {
            Err(Error::Csv { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("INJ:I1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_file(&dir, "x.csv", "t,INJ:I1\n0,1\n");
        assert!(matches!(read_csv(&p), Err(Error::Schema { .. })));
        let p = write_file(&dir, "y.csv", "time,I1,PRD:P1\n0,1,1\n");
        assert!(matches!(read_csv(&p), Err(Error::Schema { .. })));
    }
}
