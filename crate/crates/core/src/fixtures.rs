//! Shipped synthetic unit-cell datasets.
//!
//! Each state's surface impedance is two parallel-RLC tanks in series: a
//! strong resonance near one band edge and a weaker one inside the band.
//! Oblique incidence uses the TM wave impedance η₀·cosθ. The parameters
//! were fitted offline to a target ON/OFF phase-contrast profile
//! and are frozen here.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{CellState, FrequencyGrid, UnitCellResponse, ETA0};
use crate::sparam::table::save_response_table;
use crate::sparam::touchstone::{DataFormat, FrequencyUnit, TouchstoneDocument};

/// Parallel tank: Z = 1/(1/(Q·X) + 1/(jXw) + jw/X), w = f/f₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tank {
    pub f0_ghz: f64,
    /// Characteristic reactance ω₀L = 1/(ω₀C) (Ω).
    pub reactance: f64,
    /// R/X.
    pub q: f64,
}

impl Tank {
    pub fn impedance(&self, f: f64) -> Complex64 {
        let w = f / (self.f0_ghz * 1e9);
        let x = self.reactance;
        let y = Complex64::new(1.0 / (self.q * x), 0.0)
            + Complex64::new(0.0, x * w).inv()
            + Complex64::new(0.0, w / x);
        y.inv()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureCell {
    pub off: [Tank; 2],
    pub on: [Tank; 2],
}

fn tanks(p: [f64; 6]) -> [Tank; 2] {
    [
        Tank {
            f0_ghz: p[0],
            reactance: p[1],
            q: p[2],
        },
        Tank {
            f0_ghz: p[3],
            reactance: p[4],
            q: p[5],
        },
    ]
}

/// Contrast ≈ 160°–195° over 29.1–36.1 GHz at normal incidence, degrading
/// to ≈ 140° at 50°.
pub fn prototype_fixture() -> FixtureCell {
    FixtureCell {
        off: tanks([
            27.7895409189045,
            55.030868621800124,
            74.11811779594017,
            31.554795918558767,
            30.339670594970563,
            276.31750681710224,
        ]),
        on: tanks([
            37.89170750417429,
            106.75836177381633,
            246.8840531821125,
            30.277785303932408,
            23.25084267604061,
            243.52411196181572,
        ]),
    }
}

/// Re-tuned cell: contrast within 160°–200° at 50° incidence over 31–35 GHz.
pub fn retuned_fixture() -> FixtureCell {
    FixtureCell {
        off: tanks([
            27.914199417800045,
            35.37375024969858,
            115.14805417209958,
            33.04560135900428,
            18.489378120678552,
            291.9023818176836,
        ]),
        on: tanks([
            38.0172449928355,
            89.88112922726279,
            265.6917707628496,
            30.790242189742713,
            50.7873928527578,
            298.7637813656879,
        ]),
    }
}

pub const FIXTURE_ANGLES: [f64; 4] = [0.0, 40.0, 50.0, 60.0];

/// 26–40 GHz in 50 MHz steps.
pub fn fixture_grid() -> FrequencyGrid<f64> {
    FrequencyGrid::linspace(26e9, 40e9, 281).expect("static grid")
}

impl FixtureCell {
    pub fn surface_impedance(&self, state: CellState, f: f64) -> Complex64 {
        let t = match state {
            CellState::On => &self.on,
            CellState::Off => &self.off,
        };
        t[0].impedance(f) + t[1].impedance(f)
    }

    pub fn gamma(&self, state: CellState, f: f64, angle_deg: f64) -> Complex64 {
        let z = self.surface_impedance(state, f);
        let e = ETA0 * angle_deg.to_radians().cos();
        (z - e) / (z + e)
    }

    pub fn response(
        &self,
        grid: &FrequencyGrid<f64>,
        angles: &[f64],
    ) -> Result<UnitCellResponse<f64>> {
        let table = |state| {
            angles
                .iter()
                .map(|a| {
                    grid.points()
                        .iter()
                        .map(|f| self.gamma(state, *f, *a))
                        .collect()
                })
                .collect()
        };
        UnitCellResponse::new(
            angles.to_vec(),
            grid.clone(),
            table(CellState::On),
            table(CellState::Off),
        )
    }

    pub fn default_response(&self) -> UnitCellResponse<f64> {
        self.response(&fixture_grid(), &FIXTURE_ANGLES)
            .expect("fixture grid and angles are valid")
    }

    /// Normal-incidence S₁₁ of one state, reference plane on the surface.
    pub fn touchstone(&self, state: CellState) -> TouchstoneDocument {
        let grid = fixture_grid();
        let series: Vec<(f64, Complex64)> = grid
            .points()
            .iter()
            .map(|f| (*f, self.gamma(state, *f, 0.0)))
            .collect();
        let mut doc =
            TouchstoneDocument::from_series(&series, FrequencyUnit::GHz, DataFormat::Ri, 50.0);
        doc.comments = vec![format!(
            "synthetic two-tank unit cell, {} state, normal incidence",
            state.label()
        )];
        doc
    }
}

/// Run configuration reproducing the 10x20 / 1.728 mm / 0.29 m experiment
/// set at 33 GHz for 40, 50 and 60 degrees.
pub fn prototype_preset(cells_file: &str) -> serde_json::Value {
    serde_json::json!({
        "layout": { "rows": 10, "cols": 20, "pitch": 1.728e-3 },
        "mode": "measured",
        "cells": cells_file,
        "design_frequency": 33e9,
        "steering": [
            { "theta_deg": 40.0 },
            { "theta_deg": 50.0 },
            { "theta_deg": 60.0 }
        ],
        "band": { "start": 26e9, "stop": 40e9, "points": 141 },
        "scenario": { "range": 0.29, "horn_gain_dbi": 12.5, "efficiency": 1.0 },
        "toggles": { "illumination": true, "smoothing": 0.02, "projection": false },
        "output_dir": "out"
    })
}

pub const PROTOTYPE_RESPONSE_FILE: &str = "prototype-response.csv";
pub const RETUNED_RESPONSE_FILE: &str = "retuned-response.csv";
pub const PRESET_FILE: &str = "paper-33ghz.json";

/// Writes every shipped dataset into `dir` and returns the paths.
pub fn write_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let proto = prototype_fixture();
    let mut files: Vec<(String, String)> = vec![
        (
            PROTOTYPE_RESPONSE_FILE.into(),
            save_response_table(&proto.default_response()),
        ),
        (
            RETUNED_RESPONSE_FILE.into(),
            save_response_table(&retuned_fixture().default_response()),
        ),
    ];
    for state in CellState::ALL {
        files.push((
            format!("prototype-{}.s1p", state.label().to_ascii_lowercase()),
            proto.touchstone(state).serialize(),
        ));
    }
    let mut preset = serde_json::to_string_pretty(&prototype_preset(PROTOTYPE_RESPONSE_FILE))?;
    preset.push('\n');
    files.push((PRESET_FILE.into(), preset));

    let mut out = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}
