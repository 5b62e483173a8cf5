//! Config-driven run: synthesize → farfield → linkbudget for every steering
//! spec, with a manifest recording hashes and emitted artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::farfield::{directivity, lobe_metrics, ApertureSpectrum, FarFieldConfig, Sampling};
use crate::linkbudget::{gain_enhancement, Efficiency, GainTable, LinkBudgetSweep, LinkScenario};
use crate::model::{ApertureLayout, FrequencyGrid, Source, SteeringSpec, UnitCellResponse};
use crate::reports::CutReport;
use crate::sparam::{emit_report, load_response_table, Reportable};
use crate::synthesis::{
    compose_aperture_phase, illumination_phase, quantize_1bit, steering_phase, CellModel,
    CodingPattern,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            rows: 10,
            cols: 20,
            pitch: 1.728e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    #[default]
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringEntry {
    pub theta_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_frequency: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl BandConfig {
    pub fn grid(&self) -> Result<FrequencyGrid<f64>> {
        FrequencyGrid::linspace(self.start, self.stop, self.points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub range: f64,
    pub horn_gain_dbi: f64,
    pub efficiency: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            range: 0.29,
            horn_gain_dbi: 12.5,
            efficiency: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Toggles {
    /// Spherical illumination from a horn at the scenario range.
    pub illumination: bool,
    /// Moving-window fraction for enhancement smoothing.
    pub smoothing: Option<f64>,
    pub projection: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FarFieldSettings {
    pub min_fft_size: usize,
    pub fft_budget: usize,
}

impl Default for FarFieldSettings {
    fn default() -> Self {
        let d = FarFieldConfig::default();
        Self {
            min_fft_size: d.min_fft_size,
            fft_budget: d.fft_budget,
        }
    }
}

fn default_design_frequency() -> f64 {
    SteeringSpec::<f64>::DEFAULT_DESIGN_FREQUENCY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub layout: LayoutConfig,
    #[serde(default)]
    pub mode: Mode,
    /// Response table; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<PathBuf>,
    #[serde(default = "default_design_frequency")]
    pub design_frequency: f64,
    #[serde(default)]
    pub steering: Vec<SteeringEntry>,
    pub band: BandConfig,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub toggles: Toggles,
    #[serde(default)]
    pub farfield: FarFieldSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn cells_path(&self) -> Option<PathBuf> {
        self.cells.as_deref().map(|p| self.resolve(p))
    }

    /// Output directory from the config, else the default.
    pub fn output_path(&self) -> PathBuf {
        self.output_dir
            .as_deref()
            .map(|p| self.resolve(p))
            .unwrap_or_else(|| self.resolve(Path::new(DEFAULT_OUTPUT_DIR)))
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn layout(&self) -> Result<ApertureLayout<f64>> {
        ApertureLayout::new(self.layout.rows, self.layout.cols, self.layout.pitch)
    }

    pub fn farfield_config(&self) -> FarFieldConfig {
        FarFieldConfig {
            min_fft_size: self.farfield.min_fft_size,
            fft_budget: self.farfield.fft_budget,
            ..FarFieldConfig::default()
        }
    }

    pub fn source(&self) -> Source<f64> {
        if self.toggles.illumination {
            Source::PointSource {
                distance: self.scenario.range,
            }
        } else {
            Source::PlaneWave
        }
    }

    pub fn steering_specs(&self) -> Result<Vec<SteeringSpec<f64>>> {
        self.steering
            .iter()
            .map(|s| {
                SteeringSpec::new(
                    s.theta_deg,
                    s.design_frequency.unwrap_or(self.design_frequency),
                    self.source(),
                )
            })
            .collect()
    }

    pub fn scenario(&self, rx_angle_deg: f64) -> Result<LinkScenario<f64>> {
        let mut scn = LinkScenario::new(
            self.scenario.range,
            self.scenario.horn_gain_dbi,
            self.layout()?,
            rx_angle_deg,
        )?;
        scn.tx_horn_gain = GainTable::Flat(self.scenario.horn_gain_dbi);
        scn.rx_horn_gain = GainTable::Flat(self.scenario.horn_gain_dbi);
        scn.aperture_efficiency = Efficiency::Constant(self.scenario.efficiency);
        scn.project_receive_aperture = self.toggles.projection;
        scn.illumination = self.source();
        scn.farfield = self.farfield_config();
        Ok(scn)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub build_hash: String,
    pub config_sha256: String,
    pub mode: Mode,
    pub steering_count: usize,
    pub inputs: Vec<InputDigest>,
    /// File names relative to the output directory, in emission order.
    pub artifacts: Vec<String>,
}

/// Validated inputs, loaded before any computation starts.
struct Prepared {
    layout: ApertureLayout<f64>,
    grid: FrequencyGrid<f64>,
    specs: Vec<SteeringSpec<f64>>,
    response: Option<UnitCellResponse<f64>>,
    inputs: Vec<InputDigest>,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let layout = cfg.layout().map_err(|e| Error::Config(e.to_string()))?;
    let grid = cfg
        .band
        .grid()
        .map_err(|e| Error::Config(format!("band: {e}")))?;
    let specs = cfg
        .steering_specs()
        .map_err(|e| Error::Config(e.to_string()))?;
    if let Some(w) = cfg.toggles.smoothing {
        if !(w > 0.0 && w < 0.5) {
            return Err(Error::Config(format!(
                "smoothing fraction {w} outside (0, 0.5)"
            )));
        }
    }
    let mut inputs = Vec::new();
    let mut response = None;
    if let Some(path) = cfg.cells_path() {
        if !path.is_file() {
            return Err(Error::Config(format!(
                "cell data `{}` does not exist",
                path.display()
            )));
        }
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        inputs.push(InputDigest {
            path: cfg
                .cells
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        if cfg.mode == Mode::Measured {
            let r = load_response_table(&bytes)
                .map_err(|e| Error::Config(format!("cell data: {e}")))?;
            let span = r.grid();
            if !(span.contains(grid.first()) && span.contains(grid.last())) {
                return Err(Error::Config(format!(
                    "band [{}, {}] Hz outside cell-data span [{}, {}] Hz",
                    grid.first(),
                    grid.last(),
                    span.first(),
                    span.last()
                )));
            }
            for s in &specs {
                s.validate(Some(span))
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
            response = Some(r);
        }
    } else if cfg.mode == Mode::Measured {
        return Err(Error::Config("measured mode needs a `cells` table".into()));
    }
    Ok(Prepared {
        layout,
        grid,
        specs,
        response,
        inputs,
    })
}

pub struct SpecOutputs {
    pub theta_r_deg: f64,
    pub pattern: CodingPattern<f64>,
    pub cut: crate::farfield::FarFieldPattern<f64>,
    pub lobes: crate::farfield::LobeReport<f64>,
    pub peak_directivity_dbi: f64,
    pub sweep: LinkBudgetSweep<f64>,
}

fn run_spec(cfg: &RunConfig, prep: &Prepared, spec: &SteeringSpec<f64>) -> Result<SpecOutputs> {
    let cells = match &prep.response {
        Some(r) => CellModel::measured(r),
        None => CellModel::Ideal,
    };
    let f0 = spec.design_frequency;
    let cell_angle = spec.theta_r_deg.abs();

    let pattern = steering_phase(&prep.layout, spec)
        .and_then(|p| quantize_1bit(&p))
        .map_err(|e| e.in_stage("synthesize"))?;

    let ff = || -> Result<_> {
        let illum = illumination_phase(&prep.layout, spec)?;
        let aperture = compose_aperture_phase(&pattern, &illum, &cells, f0, cell_angle)?;
        let spectrum = ApertureSpectrum::new(&aperture, &prep.layout, f0, &cfg.farfield_config())?;
        let d = directivity(&spectrum.sample(&Sampling::hemisphere())?)?;
        let cut = spectrum
            .sample(&Sampling::full_cut())?
            .to_directivity(d.radiated_power)?;
        let lobes = lobe_metrics(&cut, spec.theta_r_deg)?;
        Ok((cut, lobes, d.peak_dbi))
    };
    let (cut, lobes, peak) = ff().map_err(|e| e.in_stage("farfield"))?;

    let sweep = (|| -> Result<_> {
        let mut scn = cfg.scenario(spec.theta_r_deg)?;
        scn.cell_angle_deg = Some(cell_angle);
        let sweep = gain_enhancement(&scn, &pattern, &cells, &prep.grid)?;
        match cfg.toggles.smoothing {
            Some(w) => sweep.with_smoothing(w),
            None => Ok(sweep),
        }
    })()
    .map_err(|e| e.in_stage("linkbudget"))?;

    Ok(SpecOutputs {
        theta_r_deg: spec.theta_r_deg,
        pattern,
        cut,
        lobes,
        peak_directivity_dbi: peak,
        sweep,
    })
}

fn tag(theta: f64) -> String {
    format!("theta{theta}")
}

/// Runs every steering spec (concurrently), then writes reports and the
/// manifest into `out_dir` in spec order. On failure every file written by
/// this run is removed.
pub fn run_pipeline(cfg: &RunConfig, out_dir: &Path) -> Result<RunManifest> {
    let prep = prepare(cfg)?;
    let config_sha256 = cfg.hash()?;

    let results = prep
        .specs
        .par_iter()
        .map(|s| run_spec(cfg, &prep, s))
        .collect::<Result<Vec<_>>>()?;

    let mut written: Vec<PathBuf> = Vec::new();
    let outcome = (|| -> Result<RunManifest> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let mut artifacts = Vec::new();
        let mut emit = |r: &dyn Reportable, name: String| -> Result<()> {
            let files = emit_report(r, out_dir, &name).map_err(|e| e.in_stage("emit"))?;
            for p in files.all() {
                artifacts.push(
                    p.file_name()
                        .unwrap_or_default()
                        .to_string_lossy()
                        .into_owned(),
                );
                written.push(p);
            }
            Ok(())
        };
        for o in &results {
            let t = tag(o.theta_r_deg);
            emit(&o.pattern, format!("pattern-{t}"))?;
            let cut = CutReport {
                pattern: &o.cut,
                lobes: &o.lobes,
                theta_r_deg: o.theta_r_deg,
                peak_directivity_dbi: Some(o.peak_directivity_dbi),
            };
            emit(&cut, format!("cut-{t}"))?;
            emit(&o.sweep, format!("sweep-{t}"))?;
        }
        let manifest = RunManifest {
            tool: "risim".into(),
            version: crate::VERSION.into(),
            build_hash: crate::BUILD_HASH.into(),
            config_sha256: config_sha256.clone(),
            mode: cfg.mode,
            steering_count: prep.specs.len(),
            inputs: prep.inputs.clone(),
            artifacts,
        };
        let path = out_dir.join(MANIFEST_FILE);
        let mut body = serde_json::to_string_pretty(&manifest)?;
        body.push('\n');
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(manifest)
    })();

    if outcome.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    outcome
}

/// Results of a run without touching the filesystem.
pub fn evaluate(cfg: &RunConfig) -> Result<Vec<SpecOutputs>> {
    let prep = prepare(cfg)?;
    prep.specs
        .par_iter()
        .map(|s| run_spec(cfg, &prep, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(dir: &Path, steering: &str) -> RunConfig {
        let text = format!(
            r#"{{
                "layout": {{ "rows": 4, "cols": 8, "pitch": 1.728e-3 }},
                "mode": "ideal",
                "steering": {steering},
                "band": {{ "start": 32e9, "stop": 34e9, "points": 3 }},
                "farfield": {{ "min_fft_size": 64 }}
            }}"#
        );
        RunConfig::from_json(&text, dir).unwrap()
    }

    #[test]
    fn empty_steering_writes_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path(), "[]");
        let out = dir.path().join("o");
        let m = run_pipeline(&cfg, &out).unwrap();
        assert!(m.artifacts.is_empty());
        let names: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec![std::ffi::OsString::from(MANIFEST_FILE)]);
    }

    #[test]
    fn dangling_cells_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path(), r#"[{"theta_deg": 40}]"#);
        cfg.mode = Mode::Measured;
        cfg.cells = Some("missing.csv".into());
        let out = dir.path().join("o");
        assert!(matches!(run_pipeline(&cfg, &out), Err(Error::Config(_))));
        assert!(!out.exists());
    }

    #[test]
    fn stage_errors_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path(), r#"[{"theta_deg": 40}]"#);
        cfg.farfield.fft_budget = 10;
        let err = run_pipeline(&cfg, &dir.path().join("o")).unwrap_err();
        match err {
            Error::Stage { stage, .. } => assert_eq!(stage, "farfield"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::from_json(
            r#"{"band": {"start":1,"stop":2,"points":2}, "bogus": 1}"#,
            Path::new(".")
        )
        .is_err());
    }

    #[test]
    fn runs_and_lists_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path(), r#"[{"theta_deg": 40}, {"theta_deg": -30}]"#);
        let m = run_pipeline(&cfg, &dir.path().join("o")).unwrap();
        assert_eq!(m.artifacts.len(), 2 * 9);
        assert!(m.artifacts.contains(&"cut-theta-30.csv".to_string()));
        assert_eq!(m.config_sha256, cfg.hash().unwrap());
        assert_eq!(m.config_sha256.len(), 64);
    }
}
