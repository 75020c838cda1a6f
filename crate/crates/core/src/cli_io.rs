//! CSV ingestion, bundled datasets, and emission of coordinates, dispersion
//! tables, and SVG biplot maps.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::decomposition::TsvdStrategy;
use crate::error::{Error, Result};
use crate::pipelines::{Method, MethodResult};
use crate::tables::{default_labels, CountTable};

/// One full run: input, methods, and output settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub methods: Vec<Method>,
    pub n_axes: usize,
    pub tsvd_strategy: TsvdStrategy,
    pub ipf_tol: f64,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub plot_axes: (usize, usize),
}

#[derive(Debug, Clone)]
pub enum InputSource {
    Csv(PathBuf),
    Builtin(String),
}

impl RunConfig {
    pub fn load_table(&self) -> Result<CountTable> {
        match &self.input {
            InputSource::Csv(path) => load_csv(path),
            InputSource::Builtin(name) => builtin_dataset(name),
        }
    }
}

/// Read a labelled CSV: first row holds column labels (corner cell ignored),
/// first column holds row labels, body is numeric.
pub fn load_csv(path: &Path) -> Result<CountTable> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(rec)) => rec,
        Some(Err(e)) => {
            return Err(Error::Parse {
                line: 1,
                col: 1,
                msg: e.to_string(),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                col: 1,
                msg: "empty file".into(),
            })
        }
    };
    let col_labels: Vec<String> = header.iter().skip(1).map(|s| s.to_string()).collect();
    if col_labels.is_empty() {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "header row has no column labels".into(),
        });
    }

    let mut row_labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in records.enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            col: 1,
            msg: e.to_string(),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != col_labels.len() + 1 {
            return Err(Error::Parse {
                line,
                col: rec.len(),
                msg: format!(
                    "expected {} fields (label + {} values), found {}",
                    col_labels.len() + 1,
                    col_labels.len(),
                    rec.len()
                ),
            });
        }
        let label = rec.get(0).unwrap_or("").to_string();
        let mut row = Vec::with_capacity(col_labels.len());
        for (j, field) in rec.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                col: j + 2,
                msg: format!("'{field}' is not a number"),
            })?;
            if v < 0.0 {
                return Err(Error::InvalidTable(format!(
                    "negative count {v} at ({label}, {})",
                    col_labels[j]
                )));
            }
            row.push(v);
        }
        row_labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 2,
            col: 1,
            msg: "no data rows".into(),
        });
    }
    let n_cols = col_labels.len();
    let values = DMatrix::from_fn(rows.len(), n_cols, |i, j| rows[i][j]);
    CountTable::new(values, row_labels, col_labels)
}

/// Write a count table back to the CSV layout accepted by [`load_csv`].
pub fn write_csv(table: &CountTable, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("table");
    for label in table.col_labels() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for i in 0..table.n_rows() {
        out.push_str(&table.row_labels()[i]);
        for j in 0..table.n_cols() {
            out.push(',');
            out.push_str(&format_sig(table.values()[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Embedded example tables.
pub fn builtin_dataset(name: &str) -> Result<CountTable> {
    match name {
        "goodman1991" => {
            let values = DMatrix::from_row_slice(
                3,
                3,
                &[4.0, 10.0, 1.0, 10.0, 50.0, 10.0, 1.0, 10.0, 4.0],
            );
            CountTable::new(values, default_labels("R", 3), default_labels("C", 3))
        }
        other => Err(Error::UnknownDataset(other.to_string())),
    }
}

/// Render a value with six significant digits, without exponent notation for
/// desk-scale magnitudes.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-4..9).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Write `<method>_rows.csv`, `<method>_cols.csv`, `<method>_dispersion.csv`
/// and optionally `<method>_map.svg`; returns the paths written.
pub fn write_outputs(result: &MethodResult, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out_dir).map_err(|source| Error::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let mut written = Vec::new();
    let n_axes = result.decomposition.axes().len();
    let method = result.method.name().replace('-', "_");

    let write = |name: String, body: String, written: &mut Vec<PathBuf>| -> Result<()> {
        let path = cfg.out_dir.join(name);
        fs::write(&path, body).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
        Ok(())
    };

    let coord_csv = |labels: &[String], coords: &[Vec<f64>]| {
        let mut body = String::from("label");
        for a in 1..=n_axes {
            body.push_str(&format!(",f{a}"));
        }
        body.push('\n');
        for (label, row) in labels.iter().zip(coords) {
            body.push_str(label);
            for v in row {
                body.push(',');
                body.push_str(&format_sig(*v));
            }
            body.push('\n');
        }
        body
    };

    write(
        format!("{method}_rows.csv"),
        coord_csv(&result.row_labels, &result.row_coords()),
        &mut written,
    )?;
    write(
        format!("{method}_cols.csv"),
        coord_csv(&result.col_labels, &result.col_coords()),
        &mut written,
    )?;

    let mut disp = String::from("axis,delta\n");
    for (a, d) in result.dispersion().iter().enumerate() {
        disp.push_str(&format!("{},{}\n", a + 1, format_sig(*d)));
    }
    write(format!("{method}_dispersion.csv"), disp, &mut written)?;

    if cfg.svg {
        let svg = render_biplot(result, cfg.plot_axes)?;
        write(format!("{method}_map.svg"), svg, &mut written)?;
    }
    Ok(written)
}

/// Geometry for a symmetric map on one axis pair.
#[derive(Debug, Clone)]
pub struct BiplotSpec {
    pub row_points: Vec<(String, f64, f64)>,
    pub col_points: Vec<(String, f64, f64)>,
    pub x_caption: String,
    pub y_caption: String,
}

/// Collect the symmetric-map coordinates for 1-based axes (a, b).
pub fn biplot_spec(result: &MethodResult, axes: (usize, usize)) -> Result<BiplotSpec> {
    let available = result.decomposition.axes().len();
    for axis in [axes.0, axes.1] {
        if axis == 0 || axis > available {
            return Err(Error::MissingAxis { axis, available });
        }
    }
    let ax = &result.decomposition.axes()[axes.0 - 1];
    let ay = &result.decomposition.axes()[axes.1 - 1];
    let row_points = result
        .row_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), ax.row_factors[i], ay.row_factors[i]))
        .collect();
    let col_points = result
        .col_labels
        .iter()
        .enumerate()
        .map(|(j, l)| (l.clone(), ax.col_factors[j], ay.col_factors[j]))
        .collect();
    Ok(BiplotSpec {
        row_points,
        col_points,
        x_caption: format!("Axis {} (delta={:.3})", axes.0, ax.delta),
        y_caption: format!("Axis {} (delta={:.3})", axes.1, ay.delta),
    })
}

/// Render the symmetric map as an SVG 1.1 document: rows as circles, columns
/// as squares, origin cross-hairs, equal aspect ratio. The larger coordinate
/// range maps to 400 px with 10% margins.
pub fn render_biplot(result: &MethodResult, axes: (usize, usize)) -> Result<String> {
    let spec = biplot_spec(result, axes)?;
    let all = spec.row_points.iter().chain(spec.col_points.iter());
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, x, y) in all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    // include the origin so the cross-hairs are always visible
    x_min = x_min.min(0.0);
    x_max = x_max.max(0.0);
    y_min = y_min.min(0.0);
    y_max = y_max.max(0.0);

    let span = (x_max - x_min).max(y_max - y_min).max(1e-9);
    let scale = 400.0 / span;
    let margin = 0.10 * 400.0 + 20.0; // pixel margin plus room for captions
    let width = (x_max - x_min) * scale + 2.0 * margin;
    let height = (y_max - y_min) * scale + 2.0 * margin;
    let px = |x: f64| margin + (x - x_min) * scale;
    let py = |y: f64| height - margin - (y - y_min) * scale;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{width:.1}\" height=\"{height:.1}\" \
         viewBox=\"0 0 {width:.1} {height:.1}\">\n"
    ));
    svg.push_str(&format!(
        "  <line class=\"axis\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
        px(x_min), py(0.0), px(x_max), py(0.0)
    ));
    svg.push_str(&format!(
        "  <line class=\"axis\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
        px(0.0), py(y_min), px(0.0), py(y_max)
    ));
    for (label, x, y) in &spec.row_points {
        svg.push_str(&format!(
            "  <circle class=\"row\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"#1f6fb2\"/>\n",
            px(*x),
            py(*y)
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#1f6fb2\">{}</text>\n",
            px(*x) + 6.0,
            py(*y) - 4.0,
            escape_xml(label)
        ));
    }
    for (label, x, y) in &spec.col_points {
        svg.push_str(&format!(
            "  <rect class=\"col\" x=\"{:.2}\" y=\"{:.2}\" width=\"7\" height=\"7\" fill=\"#c23b22\"/>\n",
            px(*x) - 3.5,
            py(*y) - 3.5
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#c23b22\">{}</text>\n",
            px(*x) + 6.0,
            py(*y) + 12.0,
            escape_xml(label)
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        width / 2.0,
        height - 6.0,
        escape_xml(&spec.x_caption)
    ));
    svg.push_str(&format!(
        "  <text x=\"12\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {:.2})\">{}</text>\n",
        height / 2.0,
        height / 2.0,
        escape_xml(&spec.y_caption)
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipelines::{run_method, MethodOptions};
    use crate::testutil::goodman;
    use std::io::Write;

    fn goodman_csv() -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        writeln!(f, ",C1,C2,C3").unwrap();
        writeln!(f, "R1,4,10,1").unwrap();
        writeln!(f, "R2,10,50,10").unwrap();
        writeln!(f, "R3,1,10,4").unwrap();
        f.flush().unwrap();
        f
    }

    fn config(dir: &Path) -> RunConfig {
        RunConfig {
            input: InputSource::Builtin("goodman1991".into()),
            methods: vec![Method::Ca],
            n_axes: 2,
            tsvd_strategy: TsvdStrategy::Exhaustive,
            ipf_tol: 1e-10,
            out_dir: dir.to_path_buf(),
            svg: true,
            plot_axes: (1, 2),
        }
    }

    #[test]
    fn load_csv_goodman_fixture() {
        let f = goodman_csv();
        let t = load_csv(f.path()).unwrap();
        assert_eq!(t.values(), builtin_dataset("goodman1991").unwrap().values());
        assert_eq!(t.row_labels(), ["R1", "R2", "R3"]);
        assert_eq!(t.col_labels(), ["C1", "C2", "C3"]);
    }

    #[test]
    fn load_csv_rejects_negative_cell() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, ",A,B\nr1,1,-2\nr2,3,4").unwrap();
        f.flush().unwrap();
        let err = load_csv(f.path()).unwrap_err();
        assert!(err.to_string().contains('B'), "{err}");
    }

    #[test]
    fn load_csv_reports_parse_position() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, ",A,B\nr1,1,x\nr2,3,4").unwrap();
        f.flush().unwrap();
        match load_csv(f.path()).unwrap_err() {
            Error::Parse { line, col, .. } => {
                assert_eq!((line, col), (2, 3));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn load_csv_rejects_ragged_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, ",A,B\nr1,1\nr2,3,4").unwrap();
        f.flush().unwrap();
        assert!(matches!(load_csv(f.path()), Err(Error::Parse { .. })));
    }

    #[test]
    fn builtin_goodman_properties() {
        let t = builtin_dataset("goodman1991").unwrap();
        assert_eq!(t.total(), 100.0);
        assert_eq!(t.values().transpose(), *t.values());
        assert!(matches!(
            builtin_dataset("nosuch"),
            Err(Error::UnknownDataset(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let t = goodman();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&t, &path).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn outputs_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path());
        let t = cfg.load_table().unwrap();
        let result = run_method(&t, Method::Ca, 2, &MethodOptions::default()).unwrap();

        let paths = write_outputs(&result, &cfg).unwrap();
        assert_eq!(paths.len(), 4);
        let rows = fs::read_to_string(dir.path().join("ca_rows.csv")).unwrap();
        assert_eq!(rows.lines().count(), 4);
        let disp = fs::read_to_string(dir.path().join("ca_dispersion.csv")).unwrap();
        let deltas: Vec<f64> = disp
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!((deltas[0] - 0.20).abs() < 5e-4);
        assert!((deltas[1] - 0.048).abs() < 5e-4);

        // identical rerun produces byte-identical files
        let snapshot: Vec<_> = paths.iter().map(|p| fs::read(p).unwrap()).collect();
        write_outputs(&result, &cfg).unwrap();
        for (p, before) in paths.iter().zip(snapshot) {
            assert_eq!(fs::read(p).unwrap(), before, "{p:?} changed");
        }
    }

    #[test]
    fn single_axis_output() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(dir.path());
        cfg.svg = false;
        let t = cfg.load_table().unwrap();
        let result = run_method(&t, Method::Ca, 1, &MethodOptions::default()).unwrap();
        write_outputs(&result, &cfg).unwrap();
        let rows = fs::read_to_string(dir.path().join("ca_rows.csv")).unwrap();
        assert!(rows.starts_with("label,f1\n"));
    }

    #[test]
    fn biplot_structure() {
        let t = goodman();
        let result = run_method(&t, Method::Mfca, 2, &MethodOptions::default()).unwrap();
        let svg = render_biplot(&result, (1, 2)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<rect").count(), 3);
        assert_eq!(svg.matches("class=\"axis\"").count(), 2);
        assert!(svg.contains("Axis 1 (delta=0.410)"));
    }

    #[test]
    fn biplot_missing_axis() {
        let t = goodman();
        let result = run_method(&t, Method::Ca, 2, &MethodOptions::default()).unwrap();
        assert!(matches!(
            render_biplot(&result, (1, 3)),
            Err(Error::MissingAxis { .. })
        ));
    }

    #[test]
    fn biplot_degenerate_axis_still_renders() {
        // collapse one axis by hand: all row factors equal
        let t = goodman();
        let mut result = run_method(&t, Method::Ca, 2, &MethodOptions::default()).unwrap();
        // shrink to points on a line by plotting axis 1 against itself
        let svg = render_biplot(&result, (1, 1)).unwrap();
        assert!(svg.contains("<svg") && svg.contains("</svg>"));
        result.row_labels[0] = "a&b".into();
        let svg = render_biplot(&result, (1, 2)).unwrap();
        assert!(svg.contains("a&amp;b"));
    }

    #[test]
    fn format_sig_examples() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(0.047619047), "0.047619");
        assert_eq!(format_sig(123456.789), "123457");
        assert_eq!(format_sig(-0.25), "-0.25");
        assert_eq!(format_sig(1.23456789e-7), "1.23457e-7");
    }
}
