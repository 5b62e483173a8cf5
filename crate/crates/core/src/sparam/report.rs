//! Report emission: `<name>.report.json`, `<name>.csv` and `<name>.svg`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::svg;
use crate::error::{Error, Result};

/// Sampled curves written to CSV. Column 0 is the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Non-finite values are written as empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                if v.is_finite() {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_column: String,
    pub y_columns: Vec<String>,
}

/// Anything that can be written out as a report.
pub trait Reportable {
    /// Report kind, recorded in the JSON document.
    fn kind(&self) -> &'static str;
    /// All scalars, metadata and per-sample arrays.
    fn json(&self) -> Value;
    fn series(&self) -> Series;
    fn plot(&self) -> Option<PlotSpec> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
}

impl EmittedFiles {
    pub fn all(&self) -> Vec<PathBuf> {
        let mut v = vec![self.json.clone(), self.csv.clone()];
        v.extend(self.svg.clone());
        v
    }
}

pub fn render_json(result: &dyn Reportable) -> Result<String> {
    let doc = serde_json::json!({
        "kind": result.kind(),
        "result": result.json(),
    });
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn render_svg(result: &dyn Reportable) -> Option<String> {
    let spec = result.plot()?;
    Some(svg::line_plot(&spec, &result.series()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the report triple into `dir`. An empty series is refused and
/// nothing is written.
pub fn emit_report(result: &dyn Reportable, dir: &Path, name: &str) -> Result<EmittedFiles> {
    let series = result.series();
    if series.is_empty() {
        return Err(Error::EmptyReport(format!(
            "{} `{name}` has no samples",
            result.kind()
        )));
    }
    let json = render_json(result)?;
    let svg = render_svg(result);
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let files = EmittedFiles {
        json: dir.join(format!("{name}.report.json")),
        csv: dir.join(format!("{name}.csv")),
        svg: svg.as_ref().map(|_| dir.join(format!("{name}.svg"))),
    };
    write(&files.json, &json)?;
    write(&files.csv, &series.to_csv())?;
    if let (Some(path), Some(svg)) = (&files.svg, &svg) {
        write(path, svg)?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Toy(Vec<(f64, f64)>);

    impl Reportable for Toy {
        fn kind(&self) -> &'static str {
            "toy"
        }
        fn json(&self) -> Value {
            serde_json::json!({ "n": self.0.len() })
        }
        fn series(&self) -> Series {
            let mut s = Series::new(&["x", "y"]);
            for (x, y) in &self.0 {
                s.push(vec![*x, *y]);
            }
            s
        }
        fn plot(&self) -> Option<PlotSpec> {
            Some(PlotSpec {
                title: "toy".into(),
                x_label: "x".into(),
                y_label: "y".into(),
                x_column: "x".into(),
                y_columns: vec!["y".into()],
            })
        }
    }

    #[test]
    fn csv_formatting() {
        let s = Toy(vec![(0.1, f64::NAN), (33e9, -3.5)]).series();
        assert_eq!(s.to_csv(), "x,y\n0.1,\n33000000000,-3.5\n");
    }

    #[test]
    fn empty_refused() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_report(&Toy(vec![]), dir.path(), "t").unwrap_err();
        assert!(matches!(err, Error::EmptyReport(_)));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&Toy(vec![(0.0, 1.0), (1.0, 2.0)]), dir.path(), "t").unwrap();
        assert_eq!(files.all().len(), 3);
        let svg = fs::read_to_string(files.svg.unwrap()).unwrap();
        assert!(svg.starts_with("<svg") && !svg.contains("href"));
        let json: Value = serde_json::from_str(&fs::read_to_string(files.json).unwrap()).unwrap();
        assert_eq!(json["kind"], "toy");
        assert_eq!(json["result"]["n"], 2);
    }
}
