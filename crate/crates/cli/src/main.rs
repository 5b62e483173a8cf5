use std::fs;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use risim::farfield::{directivity, lobe_metrics, ApertureSpectrum, FarFieldConfig, Sampling};
use risim::impedance::{extract_surface_impedance, find_resonances};
use risim::linkbudget::{angle_range, angular_scan, gain_enhancement, LinkScenario};
use risim::model::{ApertureLayout, FrequencyGrid, SteeringSpec};
use risim::pipeline::{
    run_pipeline, Mode, RunConfig, SteeringEntry, DEFAULT_OUTPUT_DIR, MANIFEST_FILE,
};
use risim::reports::{CutReport, ImpedanceReport};
use risim::sparam::report::{emit_report, Reportable};
use risim::sparam::table::load_response_table;
use risim::sparam::touchstone::parse_touchstone;
use risim::synthesis::{
    compose_aperture_phase, illumination_phase_at, quantize_1bit, steering_phase, CellModel,
    CodingPattern,
};
use risim::{Response, SourceSpec};

static LONG_VERSION: LazyLock<String> =
    LazyLock::new(|| format!("{} ({})", risim::VERSION, risim::BUILD_HASH));

#[derive(Parser)]
#[command(name = "risim", version = LONG_VERSION.as_str(), about = "Column-coded 1-bit RIS modeling chain")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "RISIM_OUT_DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Surface impedance and resonances from a one-port Touchstone file.
    ExtractZ {
        #[arg(long)]
        input: PathBuf,
        /// Reference-plane offset above the ground plane (m).
        #[arg(long, default_value_t = 0.0)]
        ref_distance: f64,
    },
    /// 1-bit column coding for a steering angle.
    Synthesize {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 33e9)]
        freq: f64,
        #[command(flatten)]
        layout: LayoutArgs,
        /// `plane` or `point:<distance m>`.
        #[arg(long, default_value = "plane", value_parser = parse_source)]
        source: SourceSpec,
    },
    /// Steering-plane cut, lobe report and directivity.
    Farfield {
        #[command(flatten)]
        input: PatternArgs,
        #[arg(long, default_value_t = 33e9)]
        freq: f64,
        #[arg(long, value_enum, default_value_t = Cut::Yz)]
        cut: Cut,
    },
    /// Gain enhancement over a band.
    Linkbudget {
        #[command(flatten)]
        input: PatternArgs,
        #[command(flatten)]
        link: LinkArgs,
        /// `start:stop:points` (Hz).
        #[arg(long, default_value = "26e9:40e9:141", value_parser = parse_band)]
        band: FrequencyGrid<f64>,
        /// Moving-window fraction for smoothing.
        #[arg(long)]
        smooth: Option<f64>,
    },
    /// Received power against receive-horn angle.
    Scan {
        #[command(flatten)]
        input: PatternArgs,
        #[command(flatten)]
        link: LinkArgs,
        /// `start:stop:step` (degrees).
        #[arg(long, default_value = "27.5:62.5:0.5", allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value_t = 33e9)]
        freq: f64,
    },
    /// Full pipeline from a JSON config; flags override config fields.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        cells: Option<PathBuf>,
        /// Replaces the steering list, e.g. `40,50,60`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        steering: Option<Vec<f64>>,
        #[arg(long)]
        smooth: Option<f64>,
    },
    /// Writes the shipped synthetic cell datasets and the 33 GHz preset.
    Fixtures,
}

#[derive(Args)]
struct LayoutArgs {
    #[arg(long, default_value_t = 10)]
    rows: usize,
    #[arg(long, default_value_t = 20)]
    cols: usize,
    #[arg(long, default_value_t = 1.728e-3)]
    pitch: f64,
}

#[derive(Args)]
struct PatternArgs {
    /// Pattern CSV (`column,state[,phase_rad]`).
    #[arg(long)]
    pattern: PathBuf,
    /// Response table; ideal ±1 cells when absent.
    #[arg(long)]
    cells: Option<PathBuf>,
    /// Ignore `--cells` and use ideal cells.
    #[arg(long)]
    ideal: bool,
    /// Rows of the aperture; columns come from the pattern.
    #[arg(long, default_value_t = 10)]
    rows: usize,
    #[arg(long, default_value_t = 1.728e-3)]
    pitch: f64,
    /// Commanded angle; defaults to the one recorded in the pattern file.
    #[arg(long, allow_hyphen_values = true)]
    steer: Option<f64>,
    /// Incidence angle for cell lookups; defaults to |steer|.
    #[arg(long)]
    cell_angle: Option<f64>,
    #[arg(long, default_value = "plane", value_parser = parse_source)]
    source: SourceSpec,
}

#[derive(Args)]
struct LinkArgs {
    #[arg(long, default_value_t = 0.29)]
    range: f64,
    #[arg(long, default_value_t = 12.5)]
    horn_gain: f64,
    #[arg(long, default_value_t = 1.0)]
    efficiency: f64,
    /// Receive aperture projected by cos(receive angle).
    #[arg(long)]
    projection: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cut {
    Yz,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ideal,
    Measured,
}

fn parse_source(s: &str) -> Result<SourceSpec, String> {
    match s.split_once(':') {
        None if s == "plane" => Ok(SourceSpec::PlaneWave),
        Some(("point", d)) => d
            .parse()
            .map(|distance| SourceSpec::PointSource { distance })
            .map_err(|_| format!("bad distance `{d}`")),
        _ => Err(format!("expected `plane` or `point:<m>`, got `{s}`")),
    }
}

fn parse_band(s: &str) -> Result<FrequencyGrid<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("expected start:stop:points, got `{s}`"));
    };
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("bad number `{x}`"));
    let n: usize = n.parse().map_err(|_| format!("bad point count `{n}`"))?;
    FrequencyGrid::linspace(num(a)?, num(b)?, n).map_err(|e| e.to_string())
}

fn parse_angles(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.parse::<f64>().with_context(|| format!("bad angle `{x}`")))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [a] => Ok(vec![*a]),
        [a, b, step] => Ok(angle_range(*a, *b, *step)?),
        _ => bail!("expected <deg> or start:stop:step, got `{s}`"),
    }
}

struct PatternFile {
    pattern: CodingPattern<f64>,
    theta_r_deg: Option<f64>,
}

/// Pattern CSVs written here carry `# theta_r_deg=..,design_frequency_hz=..`.
fn pattern_csv(pattern: &CodingPattern<f64>) -> String {
    let mut out = String::new();
    if let Some(p) = pattern.profile() {
        out.push_str(&format!(
            "# theta_r_deg={},design_frequency_hz={}\n",
            p.theta_r_deg(),
            p.design_frequency()
        ));
    }
    out + &pattern.to_csv()
}

fn read_pattern(path: &Path) -> Result<PatternFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pattern =
        CodingPattern::from_csv(&text).with_context(|| format!("parsing {}", path.display()))?;
    let theta_r_deg = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .flat_map(|l| l.split(','))
        .filter_map(|kv| kv.trim().strip_prefix("theta_r_deg="))
        .find_map(|v| v.parse().ok());
    Ok(PatternFile {
        pattern,
        theta_r_deg,
    })
}

fn load_cells(path: &Path) -> Result<Response> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_response_table(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// Pattern, layout, steer angle and cell data shared by the evaluation commands.
struct Loaded {
    pattern: CodingPattern<f64>,
    layout: ApertureLayout<f64>,
    steer: f64,
    cell_angle: f64,
    source: SourceSpec,
    response: Option<Response>,
}

impl Loaded {
    fn new(a: &PatternArgs) -> Result<Self> {
        let file = read_pattern(&a.pattern)?;
        let steer = a
            .steer
            .or(file.theta_r_deg)
            .context("pattern file records no steering angle; pass --steer")?;
        let layout = ApertureLayout::new(a.rows, file.pattern.cols(), a.pitch)?;
        let response = match (&a.cells, a.ideal) {
            (Some(p), false) => Some(load_cells(p)?),
            _ => None,
        };
        Ok(Self {
            pattern: file.pattern,
            layout,
            steer,
            cell_angle: a.cell_angle.unwrap_or(steer.abs()),
            source: a.source,
            response,
        })
    }

    fn cells(&self) -> CellModel<'_, f64> {
        match &self.response {
            Some(r) => CellModel::measured(r),
            None => CellModel::Ideal,
        }
    }

    fn scenario(&self, link: &LinkArgs) -> Result<LinkScenario<f64>> {
        let mut scn = LinkScenario::new(link.range, link.horn_gain, self.layout, self.steer)?;
        scn.aperture_efficiency = risim::linkbudget::Efficiency::Constant(link.efficiency);
        scn.project_receive_aperture = link.projection;
        scn.illumination = self.source;
        scn.cell_angle_deg = Some(self.cell_angle);
        Ok(scn)
    }
}

fn emit(r: &dyn Reportable, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    Ok(emit_report(r, dir, name)?.all())
}

fn out_dir(cli_out: &Option<PathBuf>) -> PathBuf {
    cli_out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::ExtractZ {
            input,
            ref_distance,
        } => {
            let text = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let doc =
                parse_touchstone(&text).with_context(|| format!("parsing {}", input.display()))?;
            let series = doc.s11_series();
            let grid = FrequencyGrid::new(series.iter().map(|(f, _)| *f).collect())?;
            let s11: Vec<_> = series.iter().map(|(_, s)| *s).collect();
            let extraction = extract_surface_impedance(&s11, ref_distance, &grid)?;
            let resonances = find_resonances(&extraction);
            let label = input
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            for r in resonances.resonances() {
                println!("resonance {:.4} GHz", r.frequency / 1e9);
            }
            let report = ImpedanceReport {
                extraction: &extraction,
                resonances: &resonances,
                label,
            };
            emit(&report, &out_dir(&cli.out), "impedance")
        }
        Command::Synthesize {
            theta,
            freq,
            layout,
            source,
        } => {
            let layout = ApertureLayout::new(layout.rows, layout.cols, layout.pitch)?;
            let spec = SteeringSpec::new(theta, freq, source)?;
            let pattern = quantize_1bit(&steering_phase(&layout, &spec)?)?;
            let dir = out_dir(&cli.out);
            let files = emit(&pattern, &dir, "pattern")?;
            // The report CSV is replaced by the round-trippable pattern file.
            fs::write(&files[1], pattern_csv(&pattern))
                .with_context(|| format!("writing {}", files[1].display()))?;
            let bits: String = pattern
                .states()
                .iter()
                .map(|s| char::from(b'0' + s.bit()))
                .collect();
            println!("{bits}");
            Ok(files)
        }
        Command::Farfield {
            input,
            freq,
            cut: Cut::Yz,
        } => {
            let l = Loaded::new(&input)?;
            let cells = l.cells();
            let illum = illumination_phase_at(&l.layout, l.source, freq)?;
            let aperture = compose_aperture_phase(&l.pattern, &illum, &cells, freq, l.cell_angle)?;
            let spectrum =
                ApertureSpectrum::new(&aperture, &l.layout, freq, &FarFieldConfig::default())?;
            let d = directivity(&spectrum.sample(&Sampling::hemisphere())?)?;
            let cut = spectrum
                .sample(&Sampling::full_cut())?
                .to_directivity(d.radiated_power)?;
            let lobes = lobe_metrics(&cut, l.steer)?;
            println!(
                "main lobe {:.1} deg, peak directivity {:.2} dBi",
                lobes.main.angle_deg, d.peak_dbi
            );
            let report = CutReport {
                pattern: &cut,
                lobes: &lobes,
                theta_r_deg: l.steer,
                peak_directivity_dbi: Some(d.peak_dbi),
            };
            emit(&report, &out_dir(&cli.out), "cut")
        }
        Command::Linkbudget {
            input,
            link,
            band,
            smooth,
        } => {
            let l = Loaded::new(&input)?;
            let scn = l.scenario(&link)?;
            let mut sweep = gain_enhancement(&scn, &l.pattern, &l.cells(), &band)?;
            if let Some(w) = smooth {
                sweep = sweep.with_smoothing(w)?;
            }
            emit(&sweep, &out_dir(&cli.out), "sweep")
        }
        Command::Scan {
            input,
            link,
            theta,
            freq,
        } => {
            let l = Loaded::new(&input)?;
            let scn = l.scenario(&link)?;
            let thetas = parse_angles(&theta)?;
            let scan = angular_scan(&scn, &l.pattern, &l.cells(), freq, &thetas)?;
            if let Some(p) = scan.peak_angle() {
                println!("peak at {p} deg");
            }
            emit(&scan, &out_dir(&cli.out), "scan")
        }
        Command::Run {
            config,
            mode,
            cells,
            steering,
            smooth,
        } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(m) = mode {
                cfg.mode = match m {
                    ModeArg::Ideal => Mode::Ideal,
                    ModeArg::Measured => Mode::Measured,
                };
            }
            if let Some(c) = cells {
                cfg.cells = Some(std::path::absolute(c)?);
            }
            if let Some(list) = steering {
                cfg.steering = list
                    .into_iter()
                    .map(|theta_deg| SteeringEntry {
                        theta_deg,
                        design_frequency: None,
                    })
                    .collect();
            }
            if smooth.is_some() {
                cfg.toggles.smoothing = smooth;
            }
            let dir = cli.out.clone().unwrap_or_else(|| cfg.output_path());
            let manifest = run_pipeline(&cfg, &dir)?;
            println!("config sha256 {}", manifest.config_sha256);
            let mut files: Vec<PathBuf> = manifest.artifacts.iter().map(|a| dir.join(a)).collect();
            files.push(dir.join(MANIFEST_FILE));
            Ok(files)
        }
        Command::Fixtures => Ok(risim::fixtures::write_fixtures(&out_dir(&cli.out))?),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    for f in run(cli)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
