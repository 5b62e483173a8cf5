//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero on any failure outside `KNOWN_RED`, or if a known-red
//! criterion starts passing (the list must then be updated).

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use risim::farfield::{directivity, lobe_metrics, ApertureSpectrum, FarFieldConfig, Sampling};
use risim::fixtures::{
    prototype_fixture, prototype_preset, retuned_fixture, PROTOTYPE_RESPONSE_FILE,
};
use risim::impedance::{extract_surface_impedance, reflection_from_impedance};
use risim::linkbudget::{angular_scan, default_scan_angles, gain_enhancement};
use risim::model::{wavelength, ApertureLayout, FrequencyGrid, Source, SteeringSpec, ETA0};
use risim::pipeline::{evaluate, run_pipeline, RunConfig};
use risim::sparam::table::save_response_table;
use risim::sparam::touchstone::{parse_touchstone, DataFormat, FrequencyUnit, TouchstoneDocument};
use risim::synthesis::{
    compose_aperture_phase, illumination_phase_at, quantize_1bit, steering_phase, ApertureField,
    CellModel, CodingPattern,
};
use risim::Error;

/// Criteria that cannot pass under the implemented model; each has a
/// written analysis outside the repository.
const KNOWN_RED: &[u32] = &[2, 3];

const F0: f64 = 33e9;
const ANGLES: [f64; 3] = [40.0, 50.0, 60.0];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn ideal_pattern(theta: f64) -> CodingPattern<f64> {
    let layout = ApertureLayout::prototype();
    let spec = SteeringSpec::new(theta, F0, Source::PlaneWave).unwrap();
    quantize_1bit(&steering_phase(&layout, &spec).unwrap()).unwrap()
}

fn ideal_aperture(pattern: &CodingPattern<f64>, theta: f64) -> ApertureField<f64> {
    let layout = ApertureLayout::prototype();
    let illum = illumination_phase_at(&layout, Source::PlaneWave, F0).unwrap();
    compose_aperture_phase(pattern, &illum, &CellModel::Ideal, F0, theta).unwrap()
}

/// Direct array-factor sum with centered positions.
fn direct_af(a: &ApertureField<f64>, pitch: f64, f: f64, u: f64, v: f64) -> Complex64 {
    let k0 = 2.0 * PI / wavelength(f);
    let (rows, cols) = (a.rows(), a.cols());
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..rows {
        let x = (m as f64 - (rows as f64 - 1.0) / 2.0) * pitch;
        for n in 0..cols {
            let y = (n as f64 - (cols as f64 - 1.0) / 2.0) * pitch;
            acc += a.get(m, n) * Complex64::from_polar(1.0, k0 * (u * x + v * y));
        }
    }
    acc
}

fn quantization_symmetry() -> Outcome {
    let a = ideal_aperture(&ideal_pattern(40.0), 40.0);
    let s = ApertureSpectrum::new(
        &a,
        &ApertureLayout::prototype(),
        F0,
        &FarFieldConfig::default(),
    )
    .unwrap();
    let t = 40f64.to_radians();
    let (p, m) = (s.cut_field(t).norm(), s.cut_field(-t).norm());
    let rel = (p - m).abs() / p.max(m);
    let v = t.sin();
    let (dp, dm) = (
        direct_af(&a, 1.728e-3, F0, 0.0, v).norm(),
        direct_af(&a, 1.728e-3, F0, 0.0, -v).norm(),
    );
    let rel_direct = (dp - dm).abs() / dp.max(dm);
    Outcome {
        id: 1,
        name: "quantization-lobe symmetry",
        pass: rel <= 1e-12,
        detail: format!(
            "||E(+40)|-|E(-40)||/max = {rel:.2e} (direct sum {rel_direct:.2e}), tol 1e-12"
        ),
    }
}

fn directivity_window() -> Outcome {
    let layout = ApertureLayout::prototype();
    let mut peaks = Vec::new();
    let mut slowest: f64 = 0.0;
    for theta in ANGLES {
        let start = Instant::now();
        let a = ideal_aperture(&ideal_pattern(theta), theta);
        let s = ApertureSpectrum::new(&a, &layout, F0, &FarFieldConfig::default()).unwrap();
        assert_eq!(s.fft_size(), (512, 512));
        let d = directivity(&s.sample(&Sampling::hemisphere()).unwrap()).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        peaks.push(d.peak_dbi);
    }
    let in_window = peaks.iter().all(|d| (10.0..=12.0).contains(d));
    let monotonic = peaks.windows(2).all(|w| w[1] < w[0]);
    let drop = peaks[0] - peaks[2];
    let drop_ok = (drop - 2.0).abs() <= 0.7;
    let fast = slowest < 10.0;
    Outcome {
        id: 2,
        name: "directivity window",
        pass: in_window && monotonic && drop_ok && fast,
        detail: format!(
            "D = {:.2}/{:.2}/{:.2} dBi (window 10-12: {}), decreasing: {monotonic}, drop {drop:.2} dB (2 +/- 0.7: {drop_ok}), slowest {slowest:.2} s (< 10 s: {fast})",
            peaks[0], peaks[1], peaks[2], ok(in_window)
        ),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISSED"
    }
}

fn preset_config(dir: &std::path::Path) -> RunConfig {
    let table = save_response_table(&prototype_fixture().default_response());
    fs::write(dir.join(PROTOTYPE_RESPONSE_FILE), table).unwrap();
    let text = serde_json::to_string(&prototype_preset(PROTOTYPE_RESPONSE_FILE)).unwrap();
    RunConfig::from_json(&text, dir).unwrap()
}

fn beam_pointing(cfg: &RunConfig) -> Outcome {
    let resp = prototype_fixture().default_response();
    let cells = CellModel::measured(&resp);
    let mut parts = Vec::new();
    let mut pass = true;
    for theta in ANGLES {
        let spec = SteeringSpec::new(theta, F0, cfg.source()).unwrap();
        let pattern =
            quantize_1bit(&steering_phase(&cfg.layout().unwrap(), &spec).unwrap()).unwrap();
        let mut scn = cfg.scenario(theta).unwrap();
        scn.cell_angle_deg = Some(theta);
        let scan = angular_scan(&scn, &pattern, &cells, F0, &default_scan_angles()).unwrap();
        let peak = scan.peak_angle().unwrap();
        let hit = (peak - theta).abs() <= 1.5;
        pass &= hit;
        parts.push(format!("{theta}->{peak} ({})", ok(hit)));
    }
    Outcome {
        id: 3,
        name: "beam pointing",
        pass,
        detail: format!("scan peaks {}, tol +/-1.5 deg", parts.join(", ")),
    }
}

fn illumination_spread() -> Outcome {
    let layout = ApertureLayout::prototype();
    let (w, h) = layout.extent();
    let spread = illumination_phase_at(&layout, Source::PointSource { distance: 0.29 }, F0)
        .unwrap()
        .spread_deg();
    Outcome {
        id: 4,
        name: "illumination phase",
        pass: (spread - 22.0).abs() <= 1.0,
        detail: format!(
            "{:.2} x {:.2} cm aperture, R = 0.29 m: center-to-corner {spread:.2} deg, target 22 +/- 1",
            h * 100.0,
            w * 100.0
        ),
    }
}

fn band_min(grid: &FrequencyGrid<f64>, values: &[Option<f64>], lo: f64, hi: f64) -> Option<f64> {
    grid.points()
        .iter()
        .zip(values)
        .filter(|(f, _)| **f >= lo - 1.0 && **f <= hi + 1.0)
        .map(|(_, v)| *v)
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
}

fn enhancement_band(cfg: &RunConfig) -> Outcome {
    let outputs = evaluate(cfg).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut residual: f64 = 0.0;
    for o in &outputs {
        let sweep = &o.sweep;
        residual = residual.max(sweep.cancellation_residual_db);
        let best = sweep.best_enhancement();
        // Band edges may move inward by the stated edge tolerance.
        let tolerant = band_min(&sweep.grid, best, 30.7e9, 35.7e9);
        let strict = band_min(&sweep.grid, best, 30.2e9, 36.2e9);
        let hit = tolerant.is_some_and(|m| m >= 10.0);
        pass &= hit;
        parts.push(format!(
            "{}: min {:.2} dB over 30.7-35.7 GHz ({:.2} over 30.2-36.2)",
            o.theta_r_deg,
            tolerant.unwrap_or(f64::NAN),
            strict.unwrap_or(f64::NAN)
        ));
    }

    // Everything but the steering pattern's radiation must cancel.
    let resp = prototype_fixture().default_response();
    let cells = CellModel::measured(&resp);
    let grid = FrequencyGrid::linspace(30e9, 36e9, 13).unwrap();
    let pattern = &outputs[1].pattern;
    let mut base = cfg.scenario(50.0).unwrap();
    base.cell_angle_deg = Some(50.0);
    let mut other = base.clone();
    other.range = 0.75;
    other.tx_horn_gain = risim::linkbudget::GainTable::Flat(20.0);
    other.rx_horn_gain = risim::linkbudget::GainTable::Flat(7.0);
    other.aperture_efficiency = risim::linkbudget::Efficiency::Constant(0.55);
    let a = gain_enhancement(&base, pattern, &cells, &grid).unwrap();
    let b = gain_enhancement(&other, pattern, &cells, &grid).unwrap();
    let independence = a
        .enhancement_db
        .iter()
        .zip(&b.enhancement_db)
        .map(|(x, y)| (x.unwrap() - y.unwrap()).abs())
        .fold(0.0, f64::max);
    residual = residual
        .max(a.cancellation_residual_db)
        .max(b.cancellation_residual_db);
    let cancel = residual < 1e-9 && independence < 1e-9;
    Outcome {
        id: 5,
        name: "gain-enhancement band",
        pass: pass && cancel,
        detail: format!(
            "{}; >= 10 dB required; cancellation residual {residual:.1e} dB, scenario independence {independence:.1e} dB (< 1e-9)",
            parts.join("; ")
        ),
    }
}

fn specular_margin(cells: CellModel<'_, f64>) -> f64 {
    let layout = ApertureLayout::prototype();
    let source = Source::PointSource { distance: 0.29 };
    let spec = SteeringSpec::new(50.0, F0, source).unwrap();
    let pattern = quantize_1bit(&steering_phase(&layout, &spec).unwrap()).unwrap();
    let illum = illumination_phase_at(&layout, source, F0).unwrap();
    let a = compose_aperture_phase(&pattern, &illum, &cells, F0, 50.0).unwrap();
    let s = ApertureSpectrum::new(&a, &layout, F0, &FarFieldConfig::default()).unwrap();
    let cut = s.sample(&Sampling::full_cut()).unwrap();
    let lobes = lobe_metrics(&cut, 50.0).unwrap();
    lobes.specular.level_db - lobes.main.level_db
}

fn specular_suppression() -> Outcome {
    let before_resp = prototype_fixture().default_response();
    let after_resp = retuned_fixture().default_response();
    let before = specular_margin(CellModel::measured(&before_resp));
    let after = specular_margin(CellModel::measured(&after_resp));
    let b_ok = (before + 4.0).abs() <= 1.5;
    let a_ok = (after + 8.0).abs() <= 1.5;
    Outcome {
        id: 6,
        name: "specular suppression",
        pass: b_ok && a_ok && after < before,
        detail: format!(
            "50 deg specular margin {before:.2} dB -> {after:.2} dB (targets -4 / -8, tol +/-1.5)"
        ),
    }
}

fn random_aperture(rng: &mut StdRng) -> ApertureField<f64> {
    ApertureField::from_fn(10, 20, |_, _| {
        Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(-PI..PI))
    })
    .unwrap()
}

fn fft_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let layout = ApertureLayout::prototype();
    let mut worst: f64 = 0.0;
    let mut bins = 0;
    for case in 0..100 {
        let a = random_aperture(&mut rng);
        let f = rng.random_range(26e9..40e9);
        // A few full-size grids, the rest coarse to bound the direct-sum cost.
        let min_fft_size = if case < 3 { 512 } else { 64 };
        let cfg = FarFieldConfig {
            min_fft_size,
            ..Default::default()
        };
        let s = ApertureSpectrum::new(&a, &layout, f, &cfg).unwrap();
        let native = s.sample(&Sampling::Native).unwrap();
        let k0 = 2.0 * PI / wavelength(f);
        let p = layout.pitch();
        let sinc = |x: f64| if x == 0.0 { 1.0 } else { x.sin() / x };
        let oracle: Vec<(Complex64, Complex64)> = native
            .samples
            .iter()
            .map(|smp| {
                let ef = p * p * sinc(k0 * p * smp.u / 2.0) * sinc(k0 * p * smp.v / 2.0);
                let fld = direct_af(&a, p, f, smp.u, smp.v) * ef;
                let rho = smp.u.hypot(smp.v);
                let (sp, cp) = if rho > 0.0 {
                    (smp.v / rho, smp.u / rho)
                } else {
                    (0.0, 1.0)
                };
                let ct = (1.0 - rho * rho).max(0.0).sqrt();
                (fld * sp, fld * cp * ct)
            })
            .collect();
        let peak = oracle
            .iter()
            .map(|(t, q)| t.norm().hypot(q.norm()))
            .fold(0.0, f64::max);
        for (smp, (t, q)) in native.samples.iter().zip(&oracle) {
            let err = (smp.e_theta - t).norm().hypot((smp.e_phi - q).norm());
            worst = worst.max(err / peak);
        }
        bins += native.samples.len();
    }
    Outcome {
        id: 7,
        name: "FFT vs direct DFT",
        pass: worst <= 1e-9,
        detail: format!("100 random 10x20 apertures, {bins} native bins: worst error {worst:.2e} of peak, tol 1e-9"),
    }
}

fn impedance_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let grid = FrequencyGrid::linspace(26e9, 40e9, 100).unwrap();
        let d = rng.random_range(0.0..3e-3);
        let gammas: Vec<Complex64> = (0..100)
            .map(|_| {
                Complex64::from_polar(rng.random_range(0.01..0.999), rng.random_range(-PI..PI))
            })
            .collect();
        let zx = extract_surface_impedance(&gammas, d, &grid).unwrap();
        for ((g, z), f) in gammas.iter().zip(&zx.zs).zip(grid.points()) {
            let back = reflection_from_impedance(*z, d, *f);
            worst = worst.max((back - g).norm() / g.norm());
        }
    }
    let grid = FrequencyGrid::new(vec![33e9]).unwrap();
    let one = |g: f64| extract_surface_impedance(&[Complex64::new(g, 0.0)], 0.0, &grid);
    let pec = one(-1.0).unwrap().zs[0] == Complex64::new(0.0, 0.0)
        && reflection_from_impedance(Complex64::new(0.0, 0.0), 0.0, 33e9)
            == Complex64::new(-1.0, 0.0);
    let matched = one(0.0).unwrap().zs[0] == Complex64::new(ETA0, 0.0)
        && reflection_from_impedance(Complex64::new(ETA0, 0.0), 0.0, 33e9)
            == Complex64::new(0.0, 0.0);
    let open = matches!(one(1.0), Err(Error::Pole { .. }));
    Outcome {
        id: 8,
        name: "reflection/impedance round trip",
        pass: worst <= 1e-10 && pec && matched && open,
        detail: format!(
            "1000 random passive cases: worst {worst:.2e} relative (tol 1e-10); PEC exact {pec}, matched exact {matched}, open -> pole {open}"
        ),
    }
}

fn uniform_aperture() -> Outcome {
    let layout = ApertureLayout::prototype();
    let a = ApertureField::from_fn(10, 20, |_, _| Complex64::new(1.0, 0.0)).unwrap();
    let cfg = FarFieldConfig {
        min_fft_size: 2048,
        ..Default::default()
    };
    let s = ApertureSpectrum::new(&a, &layout, F0, &cfg).unwrap();
    let cut = s.sample(&Sampling::full_cut()).unwrap();
    let k0 = 2.0 * PI / wavelength(F0);
    let p = layout.pitch();
    let closed = |v: f64| {
        let psi = k0 * p * v;
        let af = if psi.abs() < 1e-12 {
            20.0
        } else {
            (10.0 * psi).sin() / (psi / 2.0).sin()
        };
        let x = psi / 2.0;
        let ef = if x == 0.0 { 1.0 } else { x.sin() / x };
        10.0 * (af * ef).powi(2)
    };
    let ref_peak = closed(0.0);
    let got_peak = cut.peak().unwrap().power();
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for smp in &cut.samples {
        let want = db(closed(smp.theta_deg.to_radians().sin()) / ref_peak);
        if want < -30.0 {
            continue;
        }
        compared += 1;
        worst = worst.max((db(smp.power() / got_peak) - want).abs());
    }
    let d = directivity(&s.sample(&Sampling::hemisphere()).unwrap()).unwrap();
    let lam = wavelength(F0);
    let oracle = db(4.0 * PI * layout.physical_area() / (lam * lam));
    let d_err = (d.peak_dbi - oracle).abs();
    Outcome {
        id: 9,
        name: "uniform aperture",
        pass: worst <= 0.1 && d_err <= 0.5,
        detail: format!(
            "{compared} cut samples above -30 dB: worst {worst:.3} dB (tol 0.1); D {:.2} dBi vs 4piA/lambda^2 {oracle:.2} dBi (tol 0.5)",
            d.peak_dbi
        ),
    }
}

fn touchstone_formats() -> Outcome {
    let mut rng = StdRng::seed_from_u64(13);
    let series: Vec<(f64, Complex64)> = (0..200)
        .map(|k| {
            let f = 26e9 + 0.07e9 * k as f64;
            (
                f,
                Complex64::from_polar(rng.random_range(0.01..1.0), rng.random_range(-PI..PI)),
            )
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut identity = true;
    for format in [DataFormat::Ri, DataFormat::Ma, DataFormat::Db] {
        let doc = TouchstoneDocument::from_series(&series, FrequencyUnit::GHz, format, 50.0);
        let text = doc.serialize();
        let parsed = parse_touchstone(text.as_bytes()).unwrap();
        identity &= parsed == doc && parsed.serialize() == text;
        for ((f0, s0), (f1, s1)) in series.iter().zip(parsed.s11_series()) {
            worst = worst.max((s1 - s0).norm() / s0.norm());
            worst = worst.max((f1 - f0).abs() / f0);
        }
    }
    Outcome {
        id: 10,
        name: "Touchstone formats",
        pass: worst <= 1e-9 && identity,
        detail: format!("RI/MA/DB cross-format worst {worst:.2e} (tol 1e-9); parse/serialize identity {identity}"),
    }
}

fn pipeline_determinism(cfg: &RunConfig, dir: &std::path::Path) -> Outcome {
    let a = run_pipeline(cfg, &dir.join("run-a")).unwrap();
    let b = run_pipeline(cfg, &dir.join("run-b")).unwrap();
    let same_hash = a.config_sha256 == b.config_sha256;
    let mut identical = a.artifacts == b.artifacts;
    let mut csvs = 0;
    for name in &a.artifacts {
        let x = fs::read(dir.join("run-a").join(name)).unwrap();
        let y = fs::read(dir.join("run-b").join(name)).unwrap();
        identical &= x == y;
        csvs += usize::from(name.ends_with(".csv"));
    }
    let manifests = fs::read(dir.join("run-a/manifest.json")).unwrap()
        == fs::read(dir.join("run-b/manifest.json")).unwrap();
    Outcome {
        id: 11,
        name: "pipeline determinism",
        pass: same_hash && identical && manifests && a.artifacts.len() == 27,
        detail: format!(
            "preset run twice: {} artifacts ({csvs} CSV), hash match {same_hash}, byte-identical {identical}, manifests identical {manifests}",
            a.artifacts.len()
        ),
    }
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = preset_config(tmp.path());

    let runs: Vec<Box<dyn Fn() -> Outcome + '_>> = vec![
        Box::new(quantization_symmetry),
        Box::new(directivity_window),
        Box::new(|| beam_pointing(&cfg)),
        Box::new(illumination_spread),
        Box::new(|| enhancement_band(&cfg)),
        Box::new(specular_suppression),
        Box::new(fft_oracle),
        Box::new(impedance_round_trip),
        Box::new(uniform_aperture),
        Box::new(touchstone_formats),
        Box::new(|| pipeline_determinism(&cfg, tmp.path())),
    ];

    let mut unexpected = Vec::new();
    for run in &runs {
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_RED.contains(&o.id);
        let note = match (o.pass, known) {
            (false, true) => " [known red]",
            (true, true) => " [known red now passing: update KNOWN_RED]",
            _ => "",
        };
        println!(
            "{verdict} criterion {:>2} {}: {} ({:.1} s){note}",
            o.id,
            o.name,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if o.pass == known {
            unexpected.push(o.id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected (known red: {KNOWN_RED:?})");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
