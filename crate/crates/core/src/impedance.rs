//! Surface-impedance extraction from reflection data, resonance
//! identification and ON/OFF phase-contrast analysis.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{
    wavenumber, wrap_degrees_signed, wrap_phase, CellState, FrequencyGrid, UnitCellResponse, ETA0,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceConfig<T> {
    /// Minimum |1 − S₁₁e^{2jβd}| before the sample is treated as a pole.
    pub pole_threshold: T,
    /// Half-width (samples) of the Re(Zs) extremum search around a crossing.
    pub peak_window: usize,
}

impl<T: Real> Default for ImpedanceConfig<T> {
    fn default() -> Self {
        Self {
            pole_threshold: T::lit(1e-12),
            peak_window: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceExtraction<T> {
    pub ref_distance: T,
    pub eta0: T,
    pub grid: FrequencyGrid<T>,
    pub zs: Vec<Complex<T>>,
}

/// S₁₁ rotated from the reference plane onto the cell surface.
fn deembed<T: Real>(s11: Complex<T>, d: T, f: T) -> Complex<T> {
    let beta = wavenumber(f);
    s11 * Complex::from_polar(T::one(), T::lit(2.0) * beta * d)
}

pub fn extract_surface_impedance<T: Real>(
    s11: &[Complex<T>],
    ref_distance: T,
    grid: &FrequencyGrid<T>,
) -> Result<ImpedanceExtraction<T>> {
    extract_surface_impedance_with(s11, ref_distance, grid, &ImpedanceConfig::default())
}

pub fn extract_surface_impedance_with<T: Real>(
    s11: &[Complex<T>],
    ref_distance: T,
    grid: &FrequencyGrid<T>,
    cfg: &ImpedanceConfig<T>,
) -> Result<ImpedanceExtraction<T>> {
    if s11.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "{} S11 samples for {} grid points",
            s11.len(),
            grid.len()
        )));
    }
    if !(ref_distance.is_finite() && ref_distance >= T::zero()) {
        return Err(Error::InvalidInput(format!(
            "reference distance {ref_distance} must be >= 0"
        )));
    }
    let eta0 = T::lit(ETA0);
    let one = Complex::new(T::one(), T::zero());
    let zs = s11
        .iter()
        .zip(grid.points())
        .map(|(s, f)| {
            let g = deembed(*s, ref_distance, *f);
            let den = one - g;
            if den.norm() <= cfg.pole_threshold {
                return Err(Error::Pole {
                    frequency_hz: f.to_f64_lossy(),
                    magnitude: den.norm().to_f64_lossy(),
                });
            }
            Ok((one + g) / den * eta0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImpedanceExtraction {
        ref_distance,
        eta0,
        grid: grid.clone(),
        zs,
    })
}

/// Reflection coefficient at the reference plane for a surface impedance:
/// Γ = (Zs − η₀)/(Zs + η₀)·e^{−2jβd}.
pub fn reflection_from_impedance<T: Real>(zs: Complex<T>, ref_distance: T, f: T) -> Complex<T> {
    let eta0 = T::lit(ETA0);
    let g = (zs - eta0) / (zs + eta0);
    g * Complex::from_polar(T::one(), -T::lit(2.0) * wavenumber(f) * ref_distance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceKind {
    /// Im(Zs) zero crossing paired with a Re(Zs) local maximum.
    Resonance,
    /// Im(Zs) zero crossing paired with a Re(Zs) local minimum.
    AntiResonance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance<T> {
    /// Interpolated Im(Zs) zero crossing (Hz).
    pub frequency: T,
    pub kind: ResonanceKind,
    /// Re(Zs) at the paired extremum (Ω). For anti-resonances this is the minimum.
    pub re_peak: T,
    /// Relative prominence of the extremum within the search window. A
    /// heuristic stand-in for "strongly excited"; not a loaded Q.
    pub quality: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResonanceList<T> {
    pub entries: Vec<Resonance<T>>,
}

impl<T: Real> ResonanceList<T> {
    pub fn resonances(&self) -> impl Iterator<Item = &Resonance<T>> {
        self.entries
            .iter()
            .filter(|r| r.kind == ResonanceKind::Resonance)
    }

    pub fn anti_resonances(&self) -> impl Iterator<Item = &Resonance<T>> {
        self.entries
            .iter()
            .filter(|r| r.kind == ResonanceKind::AntiResonance)
    }
}

pub fn find_resonances<T: Real>(zx: &ImpedanceExtraction<T>) -> ResonanceList<T> {
    find_resonances_with(zx, ImpedanceConfig::<T>::default().peak_window)
}

pub fn find_resonances_with<T: Real>(
    zx: &ImpedanceExtraction<T>,
    window: usize,
) -> ResonanceList<T> {
    let n = zx.zs.len();
    let mut entries = Vec::new();
    if n < 3 {
        return ResonanceList { entries };
    }
    let f = zx.grid.points();
    let re: Vec<T> = zx.zs.iter().map(|z| z.re).collect();
    let im: Vec<T> = zx.zs.iter().map(|z| z.im).collect();
    let w = window.max(1);

    for i in 0..n - 1 {
        let a = im[i];
        if a == T::zero() {
            continue;
        }
        // next non-zero sample decides whether the sign really changes
        let mut k = i + 1;
        while k < n && im[k] == T::zero() {
            k += 1;
        }
        if k >= n || (a > T::zero()) == (im[k] > T::zero()) {
            continue;
        }
        let freq = if k == i + 1 {
            let b = im[k];
            f[i] + (f[k] - f[i]) * a / (a - b)
        } else {
            f[i + 1]
        };
        if !(freq > f[0] && freq < f[n - 1]) {
            continue;
        }

        let lo = (i + 1).saturating_sub(w);
        let hi = (k + w - 1).min(n - 1);
        let window_re = &re[lo..=hi];
        let is_local_max =
            |j: usize| j > 0 && j + 1 < n && re[j] >= re[j - 1] && re[j] >= re[j + 1];
        let is_local_min =
            |j: usize| j > 0 && j + 1 < n && re[j] <= re[j - 1] && re[j] <= re[j + 1];

        let jmax = lo + argext(window_re, |x, y| x > y);
        let jmin = lo + argext(window_re, |x, y| x < y);
        if is_local_max(jmax) {
            let base = side_extreme(&re, lo, jmax, hi, |x, y| x < y);
            let quality = if re[jmax].abs() > T::zero() {
                (re[jmax] - base) / re[jmax].abs()
            } else {
                T::zero()
            };
            entries.push(Resonance {
                frequency: freq,
                kind: ResonanceKind::Resonance,
                re_peak: re[jmax],
                quality,
            });
        } else if is_local_min(jmin) {
            let top = side_extreme(&re, lo, jmin, hi, |x, y| x > y);
            let quality = if top.abs() > T::zero() {
                (top - re[jmin]) / top.abs()
            } else {
                T::zero()
            };
            entries.push(Resonance {
                frequency: freq,
                kind: ResonanceKind::AntiResonance,
                re_peak: re[jmin],
                quality,
            });
        }
    }
    ResonanceList { entries }
}

fn argext<T: Real>(v: &[T], better: impl Fn(T, T) -> bool) -> usize {
    let mut best = 0;
    for (j, x) in v.iter().enumerate() {
        if better(*x, v[best]) {
            best = j;
        }
    }
    best
}

/// The less extreme of the two one-sided extremes around `center` (the
/// higher of the two minima for a peak, the lower of the maxima for a dip).
fn side_extreme<T: Real>(
    v: &[T],
    lo: usize,
    center: usize,
    hi: usize,
    better: impl Fn(T, T) -> bool + Copy,
) -> T {
    let left = &v[lo..=center];
    let right = &v[center..=hi];
    let l = left[argext(left, better)];
    let r = right[argext(right, better)];
    if better(l, r) {
        r
    } else {
        l
    }
}

/// Contiguous band of grid samples, inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band<T> {
    pub start: T,
    pub stop: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseContrast<T> {
    pub angle_deg: T,
    pub grid: FrequencyGrid<T>,
    /// φ_on − φ_off in (−180°, 180°].
    pub delta_deg: Vec<T>,
    /// Widest contiguous run where wrap(φ_on − φ_off) ∈ [160°, 200°].
    pub contrast_band: Option<Band<T>>,
    /// Widest contiguous run where both states lose at most 3 dB on reflection.
    pub low_loss_band: Option<Band<T>>,
}

pub const CONTRAST_MIN_DEG: f64 = 160.0;
pub const CONTRAST_MAX_DEG: f64 = 200.0;
pub const MAX_REFLECTION_LOSS_DB: f64 = 3.0;

fn widest_run<T: Real>(grid: &FrequencyGrid<T>, mask: &[bool]) -> Option<Band<T>> {
    let f = grid.points();
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, m) in mask.iter().chain(std::iter::once(&false)).enumerate() {
        match (*m, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                let e = i - 1;
                let wider = best.is_none_or(|(bs, be)| f[e] - f[s] > f[be] - f[bs]);
                if wider {
                    best = Some((s, e));
                }
                start = None;
            }
            _ => {}
        }
    }
    best.map(|(s, e)| Band {
        start: f[s],
        stop: f[e],
    })
}

pub fn phase_contrast<T: Real>(
    resp: &UnitCellResponse<T>,
    angle_deg: T,
) -> Result<PhaseContrast<T>> {
    let a = resp.angle_index(angle_deg)?;
    let on = resp.series(CellState::On, a);
    let off = resp.series(CellState::Off, a);
    let mut delta = Vec::with_capacity(on.len());
    let mut in_contrast = Vec::with_capacity(on.len());
    let mut low_loss = Vec::with_capacity(on.len());
    let lo = T::lit(CONTRAST_MIN_DEG);
    let hi = T::lit(CONTRAST_MAX_DEG);
    let max_loss = T::lit(MAX_REFLECTION_LOSS_DB);
    for (g_on, g_off) in on.iter().zip(off) {
        let raw = g_on.arg() - g_off.arg();
        let wrapped = wrap_phase(raw)?.to_degrees();
        delta.push(wrap_degrees_signed(raw.to_degrees())?);
        in_contrast.push(wrapped >= lo && wrapped <= hi);
        let loss = |g: &Complex<T>| -T::lit(20.0) * g.norm().log10();
        low_loss.push(loss(g_on) <= max_loss && loss(g_off) <= max_loss);
    }
    Ok(PhaseContrast {
        angle_deg: resp.angles_deg()[a],
        grid: resp.grid().clone(),
        contrast_band: widest_run(resp.grid(), &in_contrast),
        low_loss_band: widest_run(resp.grid(), &low_loss),
        delta_deg: delta,
    })
}
