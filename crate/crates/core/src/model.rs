//! Shared domain types, physical constants and the angle/phase conventions.
//!
//! Conventions used throughout the crate:
//!
//! * time dependence `e^{+jωt}`; the aperture-to-far-field kernel is
//!   `e^{+jk₀(ux + vy)}` with `u = sinθ cosφ`, `v = sinθ sinφ`;
//! * angles cross public boundaries in degrees and are converted to radians
//!   internally;
//! * the aperture is centered on the origin, rows run along x and columns
//!   along y (the steering axis).

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space intrinsic impedance (Ω).
pub const ETA0: f64 = 376.730313668;

/// Free-space wavenumber k₀ = 2πf/c (rad/m). Identical to the propagation
/// constant β used when de-embedding reflection data.
pub fn wavenumber<T: Real>(frequency: T) -> T {
    T::two_pi() * frequency / T::lit(SPEED_OF_LIGHT)
}

pub fn wavelength<T: Real>(frequency: T) -> T {
    T::lit(SPEED_OF_LIGHT) / frequency
}

/// Maps a phase onto `[0, 2π)`.
pub fn wrap_phase<T: Real>(phi: T) -> Result<T> {
    if !phi.is_finite() {
        return Err(Error::Domain(format!("cannot wrap non-finite phase {phi}")));
    }
    let two_pi = T::two_pi();
    let mut w = phi % two_pi;
    if w < T::zero() {
        w = w + two_pi;
    }
    // -tiny + 2π rounds to 2π
    if w >= two_pi {
        w = w - two_pi;
    }
    Ok(w)
}

/// Maps a phase in degrees onto `(-180, 180]`.
pub fn wrap_degrees_signed<T: Real>(deg: T) -> Result<T> {
    let w = wrap_phase(deg.to_radians())?.to_degrees();
    let half = T::lit(180.0);
    Ok(if w > half { w - T::lit(360.0) } else { w })
}

/// Strictly increasing list of positive frequencies (Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid<T> {
    points: Vec<T>,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("frequency grid is empty".into()));
        }
        if let Some(bad) = points.iter().find(|f| !(f.is_finite() && **f > T::zero())) {
            return Err(Error::InvalidInput(format!(
                "frequency grid point {bad} is not a positive finite value"
            )));
        }
        if let Some(w) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "frequency grid not strictly increasing at index {}",
                w + 1
            )));
        }
        Ok(Self { points })
    }

    /// `count` points evenly spaced over `[start, stop]` (inclusive).
    pub fn linspace(start: T, stop: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidInput("grid needs at least one point".into()));
        }
        if count == 1 {
            return Self::new(vec![start]);
        }
        let step = (stop - start) / T::from_usize_lossy(count - 1);
        let mut points: Vec<T> = (0..count)
            .map(|i| start + step * T::from_usize_lossy(i))
            .collect();
        points[count - 1] = stop;
        Self::new(points)
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> T {
        self.points[0]
    }

    pub fn last(&self) -> T {
        self.points[self.points.len() - 1]
    }

    pub fn contains(&self, f: T) -> bool {
        f >= self.first() && f <= self.last()
    }

    /// Index `i` and weight `t` such that `f = (1-t)·points[i] + t·points[i+1]`.
    /// A single-point grid only resolves its own frequency.
    pub fn bracket(&self, f: T) -> Result<(usize, T)> {
        if !self.contains(f) {
            return Err(Error::Lookup(format!(
                "frequency {f} Hz outside grid span [{}, {}] Hz",
                self.first(),
                self.last()
            )));
        }
        let n = self.points.len();
        if n == 1 {
            return Ok((0, T::zero()));
        }
        let hi = self.points.partition_point(|p| *p <= f).clamp(1, n - 1);
        let lo = hi - 1;
        let t = (f - self.points[lo]) / (self.points[hi] - self.points[lo]);
        Ok((lo, t))
    }
}

/// Binary switching state of a cell (and of a whole column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellState {
    Off,
    On,
}

impl CellState {
    pub const ALL: [CellState; 2] = [CellState::On, CellState::Off];

    pub fn label(self) -> &'static str {
        match self {
            CellState::On => "ON",
            CellState::Off => "OFF",
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            CellState::Off => 0,
            CellState::On => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(CellState::Off),
            1 => Some(CellState::On),
            _ => None,
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        match label.trim().to_ascii_uppercase().as_str() {
            "ON" | "1" => Some(CellState::On),
            "OFF" | "0" => Some(CellState::Off),
            _ => None,
        }
    }

    pub fn complement(self) -> Self {
        match self {
            CellState::On => CellState::Off,
            CellState::Off => CellState::On,
        }
    }

    fn slot(self) -> usize {
        match self {
            CellState::On => 0,
            CellState::Off => 1,
        }
    }
}

impl fmt::Display for CellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How reflection data is looked up between tabulated incidence angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleInterp {
    #[default]
    Nearest,
    Linear,
}

/// A reported |Γ| > 1 + ε sample. Flagged, not fatal.
#[derive(Debug, Clone, PartialEq)]
pub struct PassivityViolation<T> {
    pub state: CellState,
    pub angle_deg: T,
    pub frequency: T,
    pub magnitude: T,
}

/// Complex reflection coefficients of the ON and OFF cell states, indexed by
/// incidence angle and frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCellResponse<T> {
    angles_deg: Vec<T>,
    grid: FrequencyGrid<T>,
    // [state slot][angle][freq]
    gamma: [Vec<Vec<Complex<T>>>; 2],
}

impl<T: Real> UnitCellResponse<T> {
    pub const PASSIVITY_TOLERANCE: f64 = 1e-6;

    /// `on[a][f]` / `off[a][f]` for angle index `a` and frequency index `f`.
    pub fn new(
        angles_deg: Vec<T>,
        grid: FrequencyGrid<T>,
        on: Vec<Vec<Complex<T>>>,
        off: Vec<Vec<Complex<T>>>,
    ) -> Result<Self> {
        if angles_deg.is_empty() {
            return Err(Error::InvalidInput(
                "response needs at least one angle".into(),
            ));
        }
        if angles_deg.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "response angles must be strictly increasing".into(),
            ));
        }
        for (state, table) in [(CellState::On, &on), (CellState::Off, &off)] {
            if table.len() != angles_deg.len() {
                return Err(Error::InvalidInput(format!(
                    "{state} data has {} angles, expected {}",
                    table.len(),
                    angles_deg.len()
                )));
            }
            for (a, row) in table.iter().enumerate() {
                if row.len() != grid.len() {
                    return Err(Error::InvalidInput(format!(
                        "{state} data at angle {} has {} frequencies, expected {}",
                        angles_deg[a],
                        row.len(),
                        grid.len()
                    )));
                }
            }
        }
        Ok(Self {
            angles_deg,
            grid,
            gamma: [on, off],
        })
    }

    pub fn angles_deg(&self) -> &[T] {
        &self.angles_deg
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn series(&self, state: CellState, angle_index: usize) -> &[Complex<T>] {
        &self.gamma[state.slot()][angle_index]
    }

    pub fn gamma(&self, state: CellState, angle_index: usize, freq_index: usize) -> Complex<T> {
        self.gamma[state.slot()][angle_index][freq_index]
    }

    /// Exact (to 1e-9 deg) match of a tabulated angle.
    pub fn angle_index(&self, angle_deg: T) -> Result<usize> {
        self.angles_deg
            .iter()
            .position(|a| (*a - angle_deg).abs() <= T::lit(1e-9))
            .ok_or_else(|| {
                Error::Lookup(format!(
                    "angle {angle_deg} deg not present in response table"
                ))
            })
    }

    pub fn passivity_violations(&self) -> Vec<PassivityViolation<T>> {
        let limit = T::one() + T::lit(Self::PASSIVITY_TOLERANCE);
        let mut out = Vec::new();
        for state in CellState::ALL {
            for (a, angle) in self.angles_deg.iter().enumerate() {
                for (i, g) in self.series(state, a).iter().enumerate() {
                    let m = g.norm();
                    if m > limit {
                        out.push(PassivityViolation {
                            state,
                            angle_deg: *angle,
                            frequency: self.grid.points()[i],
                            magnitude: m,
                        });
                    }
                }
            }
        }
        out
    }

    fn at_angle_index(&self, state: CellState, a: usize, f: T) -> Result<Complex<T>> {
        let (i, t) = self.grid.bracket(f)?;
        let s = self.series(state, a);
        if t == T::zero() || i + 1 >= s.len() {
            return Ok(s[i]);
        }
        Ok(s[i] * (T::one() - t) + s[i + 1] * t)
    }

    /// Γ of `state` at frequency `f` and incidence `angle_deg`: linear in
    /// frequency, nearest or linear in angle (clamped to the tabulated span).
    pub fn interpolate(
        &self,
        state: CellState,
        f: T,
        angle_deg: T,
        interp: AngleInterp,
    ) -> Result<Complex<T>> {
        if !angle_deg.is_finite() {
            return Err(Error::Domain("non-finite angle".into()));
        }
        let n = self.angles_deg.len();
        match interp {
            AngleInterp::Nearest => {
                let mut best = 0;
                for a in 1..n {
                    if (self.angles_deg[a] - angle_deg).abs()
                        < (self.angles_deg[best] - angle_deg).abs()
                    {
                        best = a;
                    }
                }
                self.at_angle_index(state, best, f)
            }
            AngleInterp::Linear => {
                if n == 1 || angle_deg <= self.angles_deg[0] {
                    return self.at_angle_index(state, 0, f);
                }
                if angle_deg >= self.angles_deg[n - 1] {
                    return self.at_angle_index(state, n - 1, f);
                }
                let hi = self.angles_deg.partition_point(|a| *a <= angle_deg);
                let lo = hi - 1;
                let t =
                    (angle_deg - self.angles_deg[lo]) / (self.angles_deg[hi] - self.angles_deg[lo]);
                let g0 = self.at_angle_index(state, lo, f)?;
                let g1 = self.at_angle_index(state, hi, f)?;
                Ok(g0 * (T::one() - t) + g1 * t)
            }
        }
    }
}

/// Rectangular grid of square cells centered on the origin.
///
/// Rows (`M`) run along x, columns (`N`) along y, the steering axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureLayout<T> {
    rows: usize,
    cols: usize,
    pitch: T,
}

impl<T: Real> ApertureLayout<T> {
    pub fn new(rows: usize, cols: usize, pitch: T) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "layout needs at least one row and column (got {rows}x{cols})"
            )));
        }
        if !(pitch.is_finite() && pitch > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "cell pitch {pitch} must be > 0"
            )));
        }
        Ok(Self { rows, cols, pitch })
    }

    /// 10 x 20 cells of 1.728 mm.
    pub fn prototype() -> Self {
        Self {
            rows: 10,
            cols: 20,
            pitch: T::lit(1.728e-3),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pitch(&self) -> T {
        self.pitch
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn x(&self, m: usize) -> T {
        (T::from_usize_lossy(m) - T::from_usize_lossy(self.rows - 1) / T::lit(2.0)) * self.pitch
    }

    pub fn y(&self, n: usize) -> T {
        (T::from_usize_lossy(n) - T::from_usize_lossy(self.cols - 1) / T::lit(2.0)) * self.pitch
    }

    pub fn position(&self, m: usize, n: usize) -> (T, T) {
        (self.x(m), self.y(n))
    }

    pub fn cell_area(&self) -> T {
        self.pitch * self.pitch
    }

    pub fn physical_area(&self) -> T {
        T::from_usize_lossy(self.cell_count()) * self.cell_area()
    }

    /// Extent along x (rows) and y (columns).
    pub fn extent(&self) -> (T, T) {
        (
            T::from_usize_lossy(self.rows) * self.pitch,
            T::from_usize_lossy(self.cols) * self.pitch,
        )
    }

    /// Row-major flat index of cell (m, n).
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.cols + n
    }
}

/// Excitation of the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source<T> {
    /// Normally incident plane wave.
    PlaneWave,
    /// Isotropic source on the broadside axis at `distance` meters.
    PointSource { distance: T },
}

/// Target reflection angle in the yz-plane plus design frequency and source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringSpec<T> {
    pub theta_r_deg: T,
    pub design_frequency: T,
    pub source: Source<T>,
}

impl<T: Real> SteeringSpec<T> {
    pub const DEFAULT_DESIGN_FREQUENCY: f64 = 33e9;

    pub fn new(theta_r_deg: T, design_frequency: T, source: Source<T>) -> Result<Self> {
        let spec = Self {
            theta_r_deg,
            design_frequency,
            source,
        };
        spec.validate(None)?;
        Ok(spec)
    }

    /// Checks the angle range and, when a grid is given, that the design
    /// frequency lies within it.
    pub fn validate(&self, grid: Option<&FrequencyGrid<T>>) -> Result<()> {
        if !(self.theta_r_deg.is_finite() && self.theta_r_deg.abs() < T::lit(90.0)) {
            return Err(Error::InvalidInput(format!(
                "steering angle {} deg must satisfy |theta| < 90",
                self.theta_r_deg
            )));
        }
        if !(self.design_frequency.is_finite() && self.design_frequency > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "design frequency {} must be > 0",
                self.design_frequency
            )));
        }
        if let Source::PointSource { distance } = self.source {
            if !(distance.is_finite() && distance > T::zero()) {
                return Err(Error::InvalidInput(format!(
                    "point source distance {distance} must be > 0"
                )));
            }
        }
        if let Some(grid) = grid {
            if !grid.contains(self.design_frequency) {
                return Err(Error::InvalidInput(format!(
                    "design frequency {} Hz outside cell-data span [{}, {}] Hz",
                    self.design_frequency,
                    grid.first(),
                    grid.last()
                )));
            }
        }
        Ok(())
    }
}
