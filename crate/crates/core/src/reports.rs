//! Report adapters for the module outputs.

use serde_json::{json, Value};

use crate::farfield::{FarFieldPattern, Lobe, LobeReport, Normalization};
use crate::impedance::{ImpedanceExtraction, ResonanceKind, ResonanceList};
use crate::linkbudget::{AngularScan, LinkBudgetSweep};
use crate::sparam::{PlotSpec, Reportable, Series};
use crate::synthesis::CodingPattern;

fn plot(title: &str, x: (&str, &str), y_label: &str, ys: &[&str]) -> Option<PlotSpec> {
    Some(PlotSpec {
        title: title.into(),
        x_label: x.1.into(),
        y_label: y_label.into(),
        x_column: x.0.into(),
        y_columns: ys.iter().map(|s| s.to_string()).collect(),
    })
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn opt(v: Option<f64>) -> Value {
    v.map(finite).unwrap_or(Value::Null)
}

pub struct ImpedanceReport<'a> {
    pub extraction: &'a ImpedanceExtraction<f64>,
    pub resonances: &'a ResonanceList<f64>,
    pub label: String,
}

impl Reportable for ImpedanceReport<'_> {
    fn kind(&self) -> &'static str {
        "surface-impedance"
    }

    fn json(&self) -> Value {
        let zx = self.extraction;
        let res: Vec<Value> = self
            .resonances
            .entries
            .iter()
            .map(|r| {
                json!({
                    "frequency_hz": r.frequency,
                    "kind": match r.kind {
                        ResonanceKind::Resonance => "resonance",
                        ResonanceKind::AntiResonance => "anti-resonance",
                    },
                    "re_peak_ohm": r.re_peak,
                    "quality": r.quality,
                })
            })
            .collect();
        json!({
            "label": self.label,
            "ref_distance_m": zx.ref_distance,
            "eta0_ohm": zx.eta0,
            "resonance_count": self.resonances.resonances().count(),
            "resonances": res,
            "freq_hz": zx.grid.points(),
            "zs_re": zx.zs.iter().map(|z| z.re).collect::<Vec<_>>(),
            "zs_im": zx.zs.iter().map(|z| z.im).collect::<Vec<_>>(),
        })
    }

    fn series(&self) -> Series {
        let mut s = Series::new(&["freq_hz", "zs_re", "zs_im"]);
        for (f, z) in self
            .extraction
            .grid
            .points()
            .iter()
            .zip(&self.extraction.zs)
        {
            s.push(vec![*f, z.re, z.im]);
        }
        s
    }

    fn plot(&self) -> Option<PlotSpec> {
        plot(
            &format!("Surface impedance ({})", self.label),
            ("freq_hz", "frequency (Hz)"),
            "Zs (ohm)",
            &["zs_re", "zs_im"],
        )
    }
}

impl Reportable for CodingPattern<f64> {
    fn kind(&self) -> &'static str {
        "coding-pattern"
    }

    fn json(&self) -> Value {
        let profile = self.profile();
        json!({
            "columns": self.cols(),
            "rule": self.rule().id(),
            "theta_r_deg": profile.map(|p| p.theta_r_deg()),
            "design_frequency_hz": profile.map(|p| p.design_frequency()),
            "layout": profile.map(|p| json!({
                "rows": p.layout().rows(),
                "cols": p.layout().cols(),
                "pitch_m": p.layout().pitch(),
            })),
            "states": self.states().iter().map(|s| s.bit()).collect::<Vec<_>>(),
            "phase_rad": profile.map(|p| p.column_phase().to_vec()),
        })
    }

    fn series(&self) -> Series {
        let mut s = Series::new(&["column", "state", "phase_rad"]);
        for (n, st) in self.states().iter().enumerate() {
            let phase = self
                .profile()
                .map(|p| p.column_phase()[n])
                .unwrap_or(f64::NAN);
            s.push(vec![n as f64, f64::from(st.bit()), phase]);
        }
        s
    }

    fn plot(&self) -> Option<PlotSpec> {
        plot("Column coding", ("column", "column"), "state", &["state"])
    }
}

/// Steering-plane cut with its lobe analysis.
pub struct CutReport<'a> {
    pub pattern: &'a FarFieldPattern<f64>,
    pub lobes: &'a LobeReport<f64>,
    pub theta_r_deg: f64,
    pub peak_directivity_dbi: Option<f64>,
}

fn lobe(l: &Lobe<f64>) -> Value {
    json!({ "angle_deg": l.angle_deg, "level_db": finite(l.level_db) })
}

impl Reportable for CutReport<'_> {
    fn kind(&self) -> &'static str {
        "farfield-cut"
    }

    fn json(&self) -> Value {
        let l = self.lobes;
        json!({
            "frequency_hz": self.pattern.frequency,
            "theta_r_deg": self.theta_r_deg,
            "normalization": self.pattern.normalization.label(),
            "peak_directivity_dbi": opt(self.peak_directivity_dbi),
            "lobes": {
                "main": lobe(&l.main),
                "quantization": l.quantization.as_ref().map(lobe),
                "specular": lobe(&l.specular),
                "peak_sidelobe": l.peak_sidelobe.as_ref().map(lobe),
                "beamwidth_3db_deg": opt(l.beamwidth_3db),
                "unreliable": l.unreliable,
            },
            "theta_deg": self.pattern.samples.iter().map(|s| s.theta_deg).collect::<Vec<_>>(),
            "gain_db": self.pattern.samples.iter().map(|s| finite(s.level_db())).collect::<Vec<_>>(),
        })
    }

    fn series(&self) -> Series {
        let mut s = Series::new(&["theta_deg", "gain_db"]);
        for p in &self.pattern.samples {
            s.push(vec![p.theta_deg, p.level_db()]);
        }
        s
    }

    fn plot(&self) -> Option<PlotSpec> {
        let y = match self.pattern.normalization {
            Normalization::Directivity => "directivity (dBi)",
            Normalization::PeakNormalized => "normalized level (dB)",
            Normalization::Raw => "level (dB)",
        };
        plot(
            &format!("Far-field cut, theta_r = {} deg", self.theta_r_deg),
            ("theta_deg", "theta (deg)"),
            y,
            &["gain_db"],
        )
    }
}

impl Reportable for LinkBudgetSweep<f64> {
    fn kind(&self) -> &'static str {
        "link-budget-sweep"
    }

    fn json(&self) -> Value {
        let enh: Vec<Value> = self.enhancement_db.iter().map(|e| opt(*e)).collect();
        json!({
            "rx_angle_deg": self.rx_angle_deg,
            "cancellation_residual_db": self.cancellation_residual_db,
            "smoothing_window_fraction": self.smoothing.as_ref().map(|s| s.window_fraction),
            "freq_hz": self.grid.points(),
            "ratio_on": self.ratio_on,
            "ratio_off": self.ratio_off,
            "enhancement_db": enh,
            "smoothed_enhancement_db": self.smoothing.as_ref().map(|s| {
                s.enhancement_db.iter().map(|e| opt(*e)).collect::<Vec<_>>()
            }),
        })
    }

    fn series(&self) -> Series {
        let smoothed = self.smoothing.as_ref();
        let mut cols = vec!["freq_hz", "ratio_on", "ratio_off", "enhancement_db"];
        if smoothed.is_some() {
            cols.push("smoothed_db");
        }
        let mut s = Series::new(&cols);
        for (i, f) in self.grid.points().iter().enumerate() {
            let mut row = vec![
                *f,
                self.ratio_on[i],
                self.ratio_off[i],
                self.enhancement_db[i].unwrap_or(f64::NAN),
            ];
            if let Some(sm) = smoothed {
                row.push(sm.enhancement_db[i].unwrap_or(f64::NAN));
            }
            s.push(row);
        }
        s
    }

    fn plot(&self) -> Option<PlotSpec> {
        let ys: &[&str] = if self.smoothing.is_some() {
            &["enhancement_db", "smoothed_db"]
        } else {
            &["enhancement_db"]
        };
        plot(
            &format!("Gain enhancement toward {} deg", self.rx_angle_deg),
            ("freq_hz", "frequency (Hz)"),
            "enhancement (dB)",
            ys,
        )
    }
}

impl Reportable for AngularScan<f64> {
    fn kind(&self) -> &'static str {
        "angular-scan"
    }

    fn json(&self) -> Value {
        json!({
            "frequency_hz": self.frequency,
            "peak_theta_deg": self.peak_angle(),
            "theta_deg": self.theta_deg,
            "ratio": self.ratio,
            "normalized_db": self.normalized_db.iter().map(|v| finite(*v)).collect::<Vec<_>>(),
        })
    }

    fn series(&self) -> Series {
        let mut s = Series::new(&["theta_deg", "ratio", "normalized_db"]);
        for i in 0..self.theta_deg.len() {
            s.push(vec![
                self.theta_deg[i],
                self.ratio[i],
                self.normalized_db[i],
            ]);
        }
        s
    }

    fn plot(&self) -> Option<PlotSpec> {
        plot(
            "Normalized angular gain",
            ("theta_deg", "receive angle (deg)"),
            "normalized P_R/P_T (dB)",
            &["normalized_db"],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::farfield::{lobe_metrics, radiate, FarFieldConfig, Sampling};
    use crate::model::{ApertureLayout, CellState, FrequencyGrid};
    use crate::synthesis::{ApertureField, CodingPattern};
    use num_complex::Complex;

    #[test]
    fn cut_csv_columns() {
        let l = ApertureLayout::prototype();
        let a = ApertureField::from_fn(10, 20, |_, _| Complex::new(1.0, 0.0)).unwrap();
        let p = radiate(
            &a,
            &l,
            33e9,
            &Sampling::full_cut(),
            &FarFieldConfig::default(),
        )
        .unwrap()
        .peak_normalized();
        let lobes = lobe_metrics(&p, 0.0).unwrap();
        let r = CutReport {
            pattern: &p,
            lobes: &lobes,
            theta_r_deg: 0.0,
            peak_directivity_dbi: None,
        };
        let csv = r.series().to_csv();
        assert!(csv.starts_with("theta_deg,gain_db\n-90,"));
        assert_eq!(csv.lines().count(), 362);
        assert!(r.json()["lobes"]["quantization"].is_null());
    }

    #[test]
    fn sweep_json_has_ratios() {
        let sweep = LinkBudgetSweep {
            grid: FrequencyGrid::new(vec![33e9]).unwrap(),
            rx_angle_deg: 40.0,
            ratio_on: vec![2e-5],
            ratio_off: vec![1e-6],
            enhancement_db: vec![Some(13.0)],
            cancellation_residual_db: 0.0,
            smoothing: None,
        };
        let j = sweep.json();
        assert_eq!(j["ratio_on"][0], 2e-5);
        assert_eq!(j["ratio_off"][0], 1e-6);
    }

    #[test]
    fn explicit_pattern_has_empty_phase() {
        let p = CodingPattern::uniform(&ApertureLayout::new(1, 2, 1e-3).unwrap(), CellState::On);
        assert_eq!(p.series().to_csv(), "column,state,phase_rad\n0,1,\n1,1,\n");
    }
}
