//! Cascaded two-hop Friis link through the surface, gain-enhancement
//! spectra and angular scans.
//!
//! P_R/P_T = G_Thorn·G_RRIS·(λ/4πd)² · G_Rhorn·G_TRIS·(λ/4πd)², with
//! G_RRIS = 4π·η·A_phys/λ² and G_TRIS(θ) = D(θ)·mean|a|².

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::farfield::{ApertureSpectrum, FarFieldConfig, MAX_PHI_STEP_DEG, MAX_THETA_STEP_DEG};
use crate::model::{wavelength, ApertureLayout, CellState, FrequencyGrid, Source};
use crate::scalar::{db10, from_db10, Real};
use crate::synthesis::{compose_aperture_phase, illumination_phase_at, CellModel, CodingPattern};

/// Largest tolerated disagreement between the full-chain enhancement and
/// the transmit-gain ratio alone.
pub const CANCELLATION_LIMIT_DB: f64 = 1e-9;
pub const DEFAULT_SMOOTHING: f64 = 0.02;

/// Horn gain spectrum in dBi.
#[derive(Debug, Clone, PartialEq)]
pub enum GainTable<T> {
    Flat(T),
    /// Linear in dB between points; no extrapolation.
    Tabulated {
        grid: FrequencyGrid<T>,
        dbi: Vec<T>,
    },
}

fn table_lookup<T: Real>(grid: &FrequencyGrid<T>, values: &[T], f: T, what: &str) -> Result<T> {
    let (i, t) = grid
        .bracket(f)
        .map_err(|_| Error::Lookup(format!("{what} table does not cover {f} Hz")))?;
    if t == T::zero() || i + 1 >= values.len() {
        return Ok(values[i]);
    }
    Ok(values[i] * (T::one() - t) + values[i + 1] * t)
}

impl<T: Real> GainTable<T> {
    pub fn tabulated(grid: FrequencyGrid<T>, dbi: Vec<T>) -> Result<Self> {
        if grid.len() != dbi.len() {
            return Err(Error::InvalidInput(format!(
                "gain table has {} values for {} frequencies",
                dbi.len(),
                grid.len()
            )));
        }
        Ok(GainTable::Tabulated { grid, dbi })
    }

    pub fn dbi_at(&self, f: T) -> Result<T> {
        match self {
            GainTable::Flat(g) => Ok(*g),
            GainTable::Tabulated { grid, dbi } => table_lookup(grid, dbi, f, "gain"),
        }
    }

    pub fn linear_at(&self, f: T) -> Result<T> {
        self.dbi_at(f).map(from_db10)
    }
}

/// Receive aperture efficiency η ∈ (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Efficiency<T> {
    Constant(T),
    Tabulated {
        grid: FrequencyGrid<T>,
        values: Vec<T>,
    },
}

impl<T: Real> Default for Efficiency<T> {
    fn default() -> Self {
        Efficiency::Constant(T::one())
    }
}

impl<T: Real> Efficiency<T> {
    pub fn at(&self, f: T) -> Result<T> {
        let eta = match self {
            Efficiency::Constant(e) => *e,
            Efficiency::Tabulated { grid, values } => table_lookup(grid, values, f, "efficiency")?,
        };
        if !(eta > T::zero() && eta <= T::one()) {
            return Err(Error::InvalidInput(format!(
                "aperture efficiency {eta} outside (0, 1]"
            )));
        }
        Ok(eta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario<T> {
    /// Horn-to-surface distance, both hops (m).
    pub range: T,
    pub tx_horn_gain: GainTable<T>,
    pub rx_horn_gain: GainTable<T>,
    pub layout: ApertureLayout<T>,
    pub aperture_efficiency: Efficiency<T>,
    /// Receive horn direction on the steering cut (degrees).
    pub rx_angle_deg: T,
    /// Multiply the receive aperture by cos(rx_angle).
    pub project_receive_aperture: bool,
    /// Illumination applied to the aperture field.
    pub illumination: Source<T>,
    /// Incidence angle for cell-table lookups; defaults to |θ_r| of the
    /// pattern's profile, else |rx_angle|.
    pub cell_angle_deg: Option<T>,
    pub farfield: FarFieldConfig,
}

impl<T: Real> LinkScenario<T> {
    /// Flat horn gains, unit efficiency, plane-wave illumination.
    pub fn new(
        range: T,
        horn_gain_dbi: T,
        layout: ApertureLayout<T>,
        rx_angle_deg: T,
    ) -> Result<Self> {
        let scn = Self {
            range,
            tx_horn_gain: GainTable::Flat(horn_gain_dbi),
            rx_horn_gain: GainTable::Flat(horn_gain_dbi),
            layout,
            aperture_efficiency: Efficiency::default(),
            rx_angle_deg,
            project_receive_aperture: false,
            illumination: Source::PlaneWave,
            cell_angle_deg: None,
            farfield: FarFieldConfig::default(),
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.range.is_finite() && self.range > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "range {} must be > 0",
                self.range
            )));
        }
        if !(self.rx_angle_deg.is_finite() && self.rx_angle_deg.abs() <= T::lit(90.0)) {
            return Err(Error::InvalidInput(format!(
                "receive angle {} deg outside [-90, 90]",
                self.rx_angle_deg
            )));
        }
        Ok(())
    }

    pub fn with_rx_angle(&self, rx_angle_deg: T) -> Self {
        Self {
            rx_angle_deg,
            ..self.clone()
        }
    }

    fn cell_angle(&self, pattern: &CodingPattern<T>) -> T {
        self.cell_angle_deg
            .or_else(|| pattern.profile().map(|p| p.theta_r_deg().abs()))
            .unwrap_or_else(|| self.rx_angle_deg.abs())
    }
}

/// 4π·η·A_phys/λ².
pub fn ris_receive_gain<T: Real>(layout: &ApertureLayout<T>, f: T, eta: T) -> T {
    let lam = wavelength(f);
    T::lit(4.0) * T::PI() * eta * layout.physical_area() / (lam * lam)
}

/// Transmit-side view of one pattern at one frequency: the FFT spectrum,
/// its hemisphere power and the reflection efficiency.
struct Radiator<T> {
    spectrum: ApertureSpectrum<T>,
    total_power: T,
    efficiency: T,
}

impl<T: Real> Radiator<T> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        pattern: &CodingPattern<T>,
        cells: &CellModel<'_, T>,
        layout: &ApertureLayout<T>,
        f: T,
        illumination: Source<T>,
        cell_angle_deg: T,
        config: &FarFieldConfig,
    ) -> Result<Self> {
        let illum = illumination_phase_at(layout, illumination, f)?;
        let aperture = compose_aperture_phase(pattern, &illum, cells, f, cell_angle_deg)?;
        let efficiency = aperture.reflection_efficiency();
        let spectrum = ApertureSpectrum::new(&aperture, layout, f, config)?;
        let total_power = if efficiency > T::zero() {
            spectrum.radiated_power(T::lit(MAX_THETA_STEP_DEG), T::lit(MAX_PHI_STEP_DEG))?
        } else {
            T::zero()
        };
        Ok(Self {
            spectrum,
            total_power,
            efficiency,
        })
    }

    /// D(θ)·η_refl on the steering cut.
    fn gain(&self, theta_deg: T) -> T {
        if self.efficiency == T::zero() || self.total_power <= T::zero() {
            return T::zero();
        }
        let e = self.spectrum.cut_field(theta_deg.to_radians());
        T::lit(4.0) * T::PI() * e.norm_sqr() / self.total_power * self.efficiency
    }
}

/// G_TRIS(θ) = D(θ)·mean|a|² for a plane-wave-illuminated surface looked up
/// at incidence `|theta|`.
pub fn ris_transmit_gain<T: Real>(
    pattern: &CodingPattern<T>,
    cells: &CellModel<'_, T>,
    layout: &ApertureLayout<T>,
    f: T,
    theta_deg: T,
) -> Result<T> {
    let cell_angle = pattern
        .profile()
        .map(|p| p.theta_r_deg().abs())
        .unwrap_or_else(|| theta_deg.abs());
    Radiator::new(
        pattern,
        cells,
        layout,
        f,
        Source::PlaneWave,
        cell_angle,
        &FarFieldConfig::default(),
    )
    .map(|r| r.gain(theta_deg))
}

/// Everything in the chain except G_TRIS.
fn chain_factor<T: Real>(scn: &LinkScenario<T>, f: T, rx_angle_deg: T) -> Result<T> {
    let lam = wavelength(f);
    let path = lam / (T::lit(4.0) * T::PI() * scn.range);
    let mut g_rris = ris_receive_gain(&scn.layout, f, scn.aperture_efficiency.at(f)?);
    if scn.project_receive_aperture {
        g_rris = g_rris * rx_angle_deg.to_radians().cos();
    }
    Ok(scn.tx_horn_gain.linear_at(f)?
        * g_rris
        * path
        * path
        * scn.rx_horn_gain.linear_at(f)?
        * path
        * path)
}

fn chain<T: Real>(tx_horn: T, g_rris: T, rx_horn: T, g_tris: T, lam: T, d: T) -> T {
    let path = lam / (T::lit(4.0) * T::PI() * d);
    tx_horn * g_rris * path * path * rx_horn * g_tris * path * path
}

/// Linear P_R/P_T toward `scn.rx_angle_deg`.
pub fn power_ratio<T: Real>(
    scn: &LinkScenario<T>,
    pattern: &CodingPattern<T>,
    cells: &CellModel<'_, T>,
    f: T,
) -> Result<T> {
    scn.validate()?;
    let rad = Radiator::new(
        pattern,
        cells,
        &scn.layout,
        f,
        scn.illumination,
        scn.cell_angle(pattern),
        &scn.farfield,
    )?;
    Ok(chain_factor(scn, f, scn.rx_angle_deg)? * rad.gain(scn.rx_angle_deg))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudgetSweep<T> {
    pub grid: FrequencyGrid<T>,
    pub rx_angle_deg: T,
    pub ratio_on: Vec<T>,
    pub ratio_off: Vec<T>,
    /// 10·log10(on/off); None where either ratio is zero.
    pub enhancement_db: Vec<Option<T>>,
    /// Largest |enhancement − 10·log10(G_TRIS,on/G_TRIS,off)| seen (dB).
    pub cancellation_residual_db: T,
    pub smoothing: Option<Smoothed<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed<T> {
    pub window_fraction: T,
    pub enhancement_db: Vec<Option<T>>,
}

impl<T: Real> LinkBudgetSweep<T> {
    pub fn with_smoothing(mut self, window_fraction: T) -> Result<Self> {
        let s = smooth(self.grid.points(), &self.enhancement_db, window_fraction)?;
        self.smoothing = Some(Smoothed {
            window_fraction,
            enhancement_db: s,
        });
        Ok(self)
    }

    /// Smoothed curve if present, else the raw one.
    pub fn best_enhancement(&self) -> &[Option<T>] {
        self.smoothing
            .as_ref()
            .map(|s| s.enhancement_db.as_slice())
            .unwrap_or(&self.enhancement_db)
    }
}

/// Steering pattern vs the all-OFF surface, toward the same receive angle.
pub fn gain_enhancement<T: Real>(
    scn: &LinkScenario<T>,
    pattern: &CodingPattern<T>,
    cells: &CellModel<'_, T>,
    grid: &FrequencyGrid<T>,
) -> Result<LinkBudgetSweep<T>> {
    scn.validate()?;
    let cell_angle = scn.cell_angle(pattern);
    let off = CodingPattern::uniform(&scn.layout, CellState::Off);
    let limit = T::lit(CANCELLATION_LIMIT_DB);

    let rows: Vec<(T, T, Option<T>, T)> = grid
        .points()
        .par_iter()
        .map(|&f| {
            let make = |p: &CodingPattern<T>| {
                Radiator::new(
                    p,
                    cells,
                    &scn.layout,
                    f,
                    scn.illumination,
                    cell_angle,
                    &scn.farfield,
                )
            };
            let g_on = make(pattern)?.gain(scn.rx_angle_deg);
            let g_off = make(&off)?.gain(scn.rx_angle_deg);
            let lam = wavelength(f);
            let mut g_rris = ris_receive_gain(&scn.layout, f, scn.aperture_efficiency.at(f)?);
            if scn.project_receive_aperture {
                g_rris = g_rris * scn.rx_angle_deg.to_radians().cos();
            }
            let tx = scn.tx_horn_gain.linear_at(f)?;
            let rx = scn.rx_horn_gain.linear_at(f)?;
            let on = chain(tx, g_rris, rx, g_on, lam, scn.range);
            let off = chain(tx, g_rris, rx, g_off, lam, scn.range);
            if on > T::zero() && off > T::zero() {
                let enh = db10(on / off);
                let residual = (enh - db10(g_on / g_off)).abs();
                if residual > limit {
                    return Err(Error::Cancellation {
                        frequency_hz: f.to_f64_lossy(),
                        residual_db: residual.to_f64_lossy(),
                        limit_db: CANCELLATION_LIMIT_DB,
                    });
                }
                Ok((on, off, Some(enh), residual))
            } else {
                Ok((on, off, None, T::zero()))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LinkBudgetSweep {
        grid: grid.clone(),
        rx_angle_deg: scn.rx_angle_deg,
        ratio_on: rows.iter().map(|r| r.0).collect(),
        ratio_off: rows.iter().map(|r| r.1).collect(),
        enhancement_db: rows.iter().map(|r| r.2).collect(),
        cancellation_residual_db: rows.iter().fold(T::zero(), |a, r| a.max(r.3)),
        smoothing: None,
    })
}

/// Centered moving average in the dB domain: sample i averages every
/// present value within ±(fraction/2)·f_i. Windows truncate at the edges
/// and gaps stay gaps.
pub fn smooth<T: Real>(
    freqs: &[T],
    values: &[Option<T>],
    window_fraction: T,
) -> Result<Vec<Option<T>>> {
    if !(window_fraction > T::zero() && window_fraction < T::lit(0.5)) {
        return Err(Error::InvalidInput(format!(
            "window fraction {window_fraction} outside (0, 0.5)"
        )));
    }
    if freqs.len() != values.len() {
        return Err(Error::InvalidInput(
            "smoothing series length mismatch".into(),
        ));
    }
    let half = window_fraction / T::lit(2.0);
    let mut out = Vec::with_capacity(values.len());
    let mut lo = 0;
    let mut hi = 0;
    for (i, f) in freqs.iter().enumerate() {
        if values[i].is_none() {
            out.push(None);
            continue;
        }
        let w = half * *f;
        while freqs[lo] < *f - w {
            lo += 1;
        }
        hi = hi.max(i);
        while hi + 1 < freqs.len() && freqs[hi + 1] <= *f + w {
            hi += 1;
        }
        let (sum, count) = values[lo..=hi]
            .iter()
            .flatten()
            .fold((T::zero(), 0usize), |(s, c), v| (s + *v, c + 1));
        out.push(Some(sum / T::from_usize_lossy(count)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularScan<T> {
    pub frequency: T,
    pub theta_deg: Vec<T>,
    pub ratio: Vec<T>,
    /// 10·log10(ratio/max ratio).
    pub normalized_db: Vec<T>,
}

impl<T: Real> AngularScan<T> {
    pub fn peak_angle(&self) -> Option<T> {
        let i = (0..self.ratio.len()).fold(None, |best: Option<usize>, i| match best {
            Some(b) if self.ratio[b] >= self.ratio[i] => Some(b),
            _ => Some(i),
        })?;
        Some(self.theta_deg[i])
    }
}

/// Angles `start, start+step, …, ≤ stop`.
pub fn angle_range<T: Real>(start: T, stop: T, step: T) -> Result<Vec<T>> {
    let ninety = T::lit(90.0);
    if !(step > T::zero() && start <= stop && start >= -ninety && stop <= ninety) {
        return Err(Error::InvalidInput(format!(
            "angle range {start}:{stop}:{step} must satisfy -90 <= start <= stop <= 90, step > 0"
        )));
    }
    let count = ((stop - start) / step + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(0)
        + 1;
    Ok((0..count)
        .map(|k| start + step * T::from_usize_lossy(k))
        .collect())
}

/// The measured span around the design angles: 27.5°..62.5° in 0.5° steps.
pub fn default_scan_angles<T: Real>() -> Vec<T> {
    angle_range(T::lit(27.5), T::lit(62.5), T::lit(0.5)).expect("valid preset")
}

/// P_R/P_T with the receive horn moved over `thetas`.
pub fn angular_scan<T: Real>(
    scn: &LinkScenario<T>,
    pattern: &CodingPattern<T>,
    cells: &CellModel<'_, T>,
    f: T,
    thetas: &[T],
) -> Result<AngularScan<T>> {
    scn.validate()?;
    if thetas.is_empty() {
        return Err(Error::InvalidInput(
            "angular scan needs at least one angle".into(),
        ));
    }
    if let Some(bad) = thetas.iter().find(|t| !(t.abs() <= T::lit(90.0))) {
        return Err(Error::InvalidInput(format!(
            "scan angle {bad} outside [-90, 90]"
        )));
    }
    let rad = Radiator::new(
        pattern,
        cells,
        &scn.layout,
        f,
        scn.illumination,
        scn.cell_angle(pattern),
        &scn.farfield,
    )?;
    let ratio = thetas
        .par_iter()
        .map(|&t| Ok(chain_factor(scn, f, t)? * rad.gain(t)))
        .collect::<Result<Vec<T>>>()?;
    let max = ratio.iter().fold(T::zero(), |a, r| a.max(*r));
    let normalized_db = ratio
        .iter()
        .map(|r| {
            if max > T::zero() {
                db10(*r / max)
            } else {
                T::neg_infinity()
            }
        })
        .collect();
    Ok(AngularScan {
        frequency: f,
        theta_deg: thetas.to_vec(),
        ratio,
        normalized_db,
    })
}
