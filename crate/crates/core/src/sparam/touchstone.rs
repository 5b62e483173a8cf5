//! Touchstone v1 one-port (`.s1p`) reader and writer.
//!
//! The document keeps data rows exactly as written in the file (frequency in
//! the option-line unit, value pair in the option-line format), so that
//! `parse(serialize(doc)) == doc` holds bit for bit. Conversion to Hz and
//! linear complex S₁₁ happens in [`TouchstoneDocument::s11_series`].

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn factor(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn token(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Real / imaginary.
    Ri,
    /// Linear magnitude / angle in degrees.
    Ma,
    /// Magnitude in dB / angle in degrees.
    Db,
}

impl DataFormat {
    fn token(self) -> &'static str {
        match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        }
    }

    pub fn to_complex(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::Ri => Complex64::new(a, b),
            DataFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            DataFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    pub fn from_complex(self, z: Complex64) -> (f64, f64) {
        match self {
            DataFormat::Ri => (z.re, z.im),
            DataFormat::Ma => (z.norm(), z.arg().to_degrees()),
            DataFormat::Db => (20.0 * z.norm().log10(), z.arg().to_degrees()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionLine {
    pub unit: FrequencyUnit,
    pub format: DataFormat,
    pub reference_impedance: f64,
}

impl Default for OptionLine {
    /// Touchstone defaults: `# GHz S MA R 50`.
    fn default() -> Self {
        Self {
            unit: FrequencyUnit::GHz,
            format: DataFormat::Ma,
            reference_impedance: 50.0,
        }
    }
}

/// One data row as written: frequency in file units and the value pair in
/// file format.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataRow {
    pub frequency: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouchstoneDocument {
    pub options: OptionLine,
    pub comments: Vec<String>,
    pub rows: Vec<DataRow>,
}

impl TouchstoneDocument {
    /// Builds a document from (Hz, linear S₁₁) samples.
    pub fn from_series(
        series: &[(f64, Complex64)],
        unit: FrequencyUnit,
        format: DataFormat,
        reference_impedance: f64,
    ) -> Self {
        let rows = series
            .iter()
            .map(|(f, s)| {
                let (a, b) = format.from_complex(*s);
                DataRow {
                    frequency: f / unit.factor(),
                    a,
                    b,
                }
            })
            .collect();
        Self {
            options: OptionLine {
                unit,
                format,
                reference_impedance,
            },
            comments: Vec::new(),
            rows,
        }
    }

    /// (frequency in Hz, linear complex S₁₁) per row.
    pub fn s11_series(&self) -> Vec<(f64, Complex64)> {
        let factor = self.options.unit.factor();
        self.rows
            .iter()
            .map(|r| {
                (
                    r.frequency * factor,
                    self.options.format.to_complex(r.a, r.b),
                )
            })
            .collect()
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "!{c}");
        }
        let _ = writeln!(
            out,
            "# {} S {} R {}",
            self.options.unit.token(),
            self.options.format.token(),
            self.options.reference_impedance
        );
        for r in &self.rows {
            let _ = writeln!(out, "{} {} {}", r.frequency, r.a, r.b);
        }
        out
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_option_line(body: &str, line: usize) -> Result<OptionLine> {
    let mut opt = OptionLine::default();
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.unit = FrequencyUnit::Hz,
            "KHZ" => opt.unit = FrequencyUnit::KHz,
            "MHZ" => opt.unit = FrequencyUnit::MHz,
            "GHZ" => opt.unit = FrequencyUnit::GHz,
            "S" => {}
            "Y" | "Z" | "G" | "H" => {
                return Err(parse_err(
                    line,
                    format!("parameter type {tok} not supported, only S parameters"),
                ))
            }
            "RI" => opt.format = DataFormat::Ri,
            "MA" => opt.format = DataFormat::Ma,
            "DB" => opt.format = DataFormat::Db,
            "R" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| parse_err(line, "option line: R without impedance value"))?;
                opt.reference_impedance = value.parse().map_err(|_| {
                    parse_err(
                        line,
                        format!("option line: bad reference impedance `{value}`"),
                    )
                })?;
                if !(opt.reference_impedance > 0.0) {
                    return Err(parse_err(
                        line,
                        "option line: reference impedance must be > 0",
                    ));
                }
            }
            other => {
                return Err(parse_err(
                    line,
                    format!("option line: unrecognized token `{other}`"),
                ))
            }
        }
    }
    Ok(opt)
}

/// Parses Touchstone v1 one-port content.
pub fn parse_touchstone(text: &[u8]) -> Result<TouchstoneDocument> {
    let text = std::str::from_utf8(text)
        .map_err(|e| parse_err(1, format!("input is not valid UTF-8: {e}")))?;

    let mut options: Option<OptionLine> = None;
    let mut comments = Vec::new();
    let mut rows: Vec<DataRow> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (content, comment) = match raw.find('!') {
            Some(pos) => (&raw[..pos], Some(&raw[pos + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if content.trim().is_empty() {
                comments.push(c.to_string());
            }
        }
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            return Err(parse_err(
                line_no,
                format!("Touchstone v2 keyword `{content}` found; only v1 files are supported"),
            ));
        }
        if let Some(body) = content.strip_prefix('#') {
            if options.is_some() {
                return Err(parse_err(line_no, "more than one option line"));
            }
            if !rows.is_empty() {
                return Err(parse_err(line_no, "option line after data rows"));
            }
            options = Some(parse_option_line(body, line_no)?);
            continue;
        }
        if options.is_none() {
            return Err(parse_err(line_no, "data row before option line"));
        }
        let values = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("bad number `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != 3 {
            return Err(parse_err(
                line_no,
                format!(
                    "expected 3 values per row for a one-port file, found {} (wrong port count)",
                    values.len()
                ),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(line_no, "non-finite value"));
        }
        let row = DataRow {
            frequency: values[0],
            a: values[1],
            b: values[2],
        };
        if row.frequency < 0.0 {
            return Err(parse_err(line_no, "negative frequency"));
        }
        if let Some(prev) = rows.last() {
            if row.frequency <= prev.frequency {
                return Err(parse_err(
                    line_no,
                    format!(
                        "frequency {} not strictly greater than previous {}",
                        row.frequency, prev.frequency
                    ),
                ));
            }
        }
        rows.push(row);
    }

    let options =
        options.ok_or_else(|| parse_err(text.lines().count().max(1), "missing option line"))?;
    if rows.is_empty() {
        return Err(parse_err(text.lines().count().max(1), "no data rows"));
    }
    Ok(TouchstoneDocument {
        options,
        comments,
        rows,
    })
}
