//! Beam-steering phase profiles, 1-bit column coding and aperture-field
//! composition (cell reflection times incident phase).

use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{
    wavenumber, wrap_phase, AngleInterp, ApertureLayout, CellState, Source, SteeringSpec,
    UnitCellResponse,
};
use crate::scalar::Real;

/// Continuous steering phase. Column-wise control means one value per
/// column; every row of column `n` carries `column_phase[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile<T> {
    layout: ApertureLayout<T>,
    design_frequency: T,
    theta_r_deg: T,
    column_phase: Vec<T>,
}

impl<T: Real> PhaseProfile<T> {
    pub fn layout(&self) -> &ApertureLayout<T> {
        &self.layout
    }

    pub fn design_frequency(&self) -> T {
        self.design_frequency
    }

    pub fn theta_r_deg(&self) -> T {
        self.theta_r_deg
    }

    /// Raw (unwrapped) phase per column, radians.
    pub fn column_phase(&self) -> &[T] {
        &self.column_phase
    }

    pub fn phase(&self, _m: usize, n: usize) -> T {
        self.column_phase[n]
    }

    pub fn negated(&self) -> Self {
        Self {
            column_phase: self.column_phase.iter().map(|p| -*p).collect(),
            ..self.clone()
        }
    }
}

/// φ_s(n) = −k₀·y_n·sin θ_r at the design frequency.
pub fn steering_phase<T: Real>(
    layout: &ApertureLayout<T>,
    spec: &SteeringSpec<T>,
) -> Result<PhaseProfile<T>> {
    spec.validate(None)?;
    let k0 = wavenumber(spec.design_frequency);
    let s = spec.theta_r_deg.to_radians().sin();
    Ok(PhaseProfile {
        layout: *layout,
        design_frequency: spec.design_frequency,
        theta_r_deg: spec.theta_r_deg,
        column_phase: (0..layout.cols()).map(|n| -k0 * layout.y(n) * s).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizationRule {
    /// OFF for wrapped phase in [0, π), ON for [π, 2π).
    HalfOpen1Bit,
    /// States supplied directly (loaded pattern or uniform surface).
    Explicit,
}

impl QuantizationRule {
    pub fn id(self) -> &'static str {
        match self {
            QuantizationRule::HalfOpen1Bit => "1bit-halfopen",
            QuantizationRule::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodingPattern<T> {
    states: Vec<CellState>,
    profile: Option<PhaseProfile<T>>,
    rule: QuantizationRule,
}

impl<T: Real> CodingPattern<T> {
    pub fn from_states(states: Vec<CellState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidInput("coding pattern has no columns".into()));
        }
        Ok(Self {
            states,
            profile: None,
            rule: QuantizationRule::Explicit,
        })
    }

    pub fn uniform(layout: &ApertureLayout<T>, state: CellState) -> Self {
        Self {
            states: vec![state; layout.cols()],
            profile: None,
            rule: QuantizationRule::Explicit,
        }
    }

    pub fn states(&self) -> &[CellState] {
        &self.states
    }

    pub fn cols(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, _m: usize, n: usize) -> CellState {
        self.states[n]
    }

    pub fn profile(&self) -> Option<&PhaseProfile<T>> {
        self.profile.as_ref()
    }

    pub fn rule(&self) -> QuantizationRule {
        self.rule
    }

    pub fn complemented(&self) -> Self {
        Self {
            states: self.states.iter().map(|s| s.complement()).collect(),
            ..self.clone()
        }
    }

    /// `column,state,phase_rad`; the phase field is empty without a profile.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("column,state,phase_rad\n");
        for (n, s) in self.states.iter().enumerate() {
            let _ = write!(out, "{n},{}", s.bit());
            match &self.profile {
                Some(p) => {
                    let _ = writeln!(out, ",{}", p.column_phase[n]);
                }
                None => out.push_str(",\n"),
            }
        }
        out
    }

    /// Reads the `column,state[,phase_rad]` format. States may be 0/1 or
    /// OFF/ON; columns must be 0..N in order. Phases are informational and
    /// not retained.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty pattern file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "column" || cols[1] != "state" {
            return Err(Error::Parse {
                line: 1,
                message: format!("pattern header must start with `column,state`, found `{header}`"),
            });
        }
        let mut states = Vec::new();
        for (line, l) in lines {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            let bad = |message: String| Error::Parse { line, message };
            let n: usize = fields[0]
                .parse()
                .map_err(|_| bad(format!("bad column index `{}`", fields[0])))?;
            if n != states.len() {
                return Err(bad(format!("expected column {}, found {n}", states.len())));
            }
            let s = fields
                .get(1)
                .and_then(|s| CellState::parse(s))
                .ok_or_else(|| bad(format!("bad state in `{l}`")))?;
            states.push(s);
        }
        Self::from_states(states)
    }
}

/// 1-bit rule: wrapped phase in [0, π) → OFF, [π, 2π) → ON.
pub fn quantize_1bit<T: Real>(profile: &PhaseProfile<T>) -> Result<CodingPattern<T>> {
    let states = profile
        .column_phase
        .iter()
        .map(|p| {
            let w = wrap_phase(*p)?;
            Ok(if w < T::PI() {
                CellState::Off
            } else {
                CellState::On
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodingPattern {
        states,
        profile: Some(profile.clone()),
        rule: QuantizationRule::HalfOpen1Bit,
    })
}

/// Incident phase per cell, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationPhase<T> {
    rows: usize,
    cols: usize,
    source: Source<T>,
    phase: Vec<T>,
}

impl<T: Real> IlluminationPhase<T> {
    pub fn plane_wave(layout: &ApertureLayout<T>) -> Self {
        Self {
            rows: layout.rows(),
            cols: layout.cols(),
            source: Source::PlaneWave,
            phase: vec![T::zero(); layout.cell_count()],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn source(&self) -> Source<T> {
        self.source
    }

    pub fn phase(&self, m: usize, n: usize) -> T {
        self.phase[m * self.cols + n]
    }

    pub fn values(&self) -> &[T] {
        &self.phase
    }

    /// Largest minus smallest |φ_i| over the cells, degrees: the
    /// center-to-corner phase difference for an on-axis source.
    pub fn spread_deg(&self) -> T {
        let (lo, hi) = self
            .phase
            .iter()
            .fold((T::infinity(), T::zero()), |(lo, hi), p| {
                (lo.min(p.abs()), hi.max(p.abs()))
            });
        (hi - lo).to_degrees()
    }
}

/// Incident phase of `spec.source` at the design frequency.
pub fn illumination_phase<T: Real>(
    layout: &ApertureLayout<T>,
    spec: &SteeringSpec<T>,
) -> Result<IlluminationPhase<T>> {
    illumination_phase_at(layout, spec.source, spec.design_frequency)
}

/// φ_i(m,n) = −k₀(√(R² + x² + y²) − R) for a point source, 0 for a plane wave.
pub fn illumination_phase_at<T: Real>(
    layout: &ApertureLayout<T>,
    source: Source<T>,
    f: T,
) -> Result<IlluminationPhase<T>> {
    let r = match source {
        Source::PlaneWave => return Ok(IlluminationPhase::plane_wave(layout)),
        Source::PointSource { distance } => distance,
    };
    if !(r.is_finite() && r > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "point source distance {r} must be > 0"
        )));
    }
    let k0 = wavenumber(f);
    let mut phase = Vec::with_capacity(layout.cell_count());
    for m in 0..layout.rows() {
        for n in 0..layout.cols() {
            let (x, y) = layout.position(m, n);
            // √(R²+ρ²) − R without cancellation
            let rho2 = x * x + y * y;
            let excess = rho2 / ((r * r + rho2).sqrt() + r);
            phase.push(-k0 * excess);
        }
    }
    Ok(IlluminationPhase {
        rows: layout.rows(),
        cols: layout.cols(),
        source,
        phase,
    })
}

/// Source of per-state reflection coefficients.
#[derive(Debug, Clone, Copy)]
pub enum CellModel<'a, T> {
    /// Γ_ON = −1, Γ_OFF = +1 at every frequency and angle.
    Ideal,
    Measured {
        response: &'a UnitCellResponse<T>,
        interp: AngleInterp,
    },
}

impl<'a, T: Real> CellModel<'a, T> {
    pub fn measured(response: &'a UnitCellResponse<T>) -> Self {
        CellModel::Measured {
            response,
            interp: AngleInterp::default(),
        }
    }

    pub fn gamma(&self, state: CellState, f: T, angle_deg: T) -> Result<Complex<T>> {
        match self {
            CellModel::Ideal => Ok(match state {
                CellState::On => Complex::new(-T::one(), T::zero()),
                CellState::Off => Complex::new(T::one(), T::zero()),
            }),
            CellModel::Measured { response, interp } => {
                response.interpolate(state, f, angle_deg, *interp)
            }
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, CellModel::Ideal)
    }
}

/// Complex reflected-field coefficient per cell, row-major (M × N).
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureField<T> {
    rows: usize,
    cols: usize,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> ApertureField<T> {
    pub fn new(rows: usize, cols: usize, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if rows == 0 || cols == 0 || coeffs.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "aperture of {} coefficients does not match {rows}x{cols}",
                coeffs.len()
            )));
        }
        Ok(Self { rows, cols, coeffs })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for n in 0..cols {
                coeffs.push(f(m, n));
            }
        }
        Self::new(rows, cols, coeffs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, n: usize) -> Complex<T> {
        self.coeffs[m * self.cols + n]
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Mean |a|² over the cells.
    pub fn reflection_efficiency(&self) -> T {
        let sum = self
            .coeffs
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr());
        sum / T::from_usize_lossy(self.coeffs.len())
    }

    pub fn matches(&self, layout: &ApertureLayout<T>) -> bool {
        self.rows == layout.rows() && self.cols == layout.cols()
    }
}

/// a(m,n) = Γ_{s_n}(f, angle)·e^{jφ_i(m,n)}.
pub fn compose_aperture_phase<T: Real>(
    pattern: &CodingPattern<T>,
    illum: &IlluminationPhase<T>,
    cells: &CellModel<'_, T>,
    f: T,
    angle_deg: T,
) -> Result<ApertureField<T>> {
    if pattern.cols() != illum.cols() {
        return Err(Error::InvalidInput(format!(
            "pattern has {} columns, illumination {}",
            pattern.cols(),
            illum.cols()
        )));
    }
    let g_on = cells.gamma(CellState::On, f, angle_deg)?;
    let g_off = cells.gamma(CellState::Off, f, angle_deg)?;
    let plane = matches!(illum.source(), Source::PlaneWave);
    ApertureField::from_fn(illum.rows(), illum.cols(), |m, n| {
        let g = match pattern.state(m, n) {
            CellState::On => g_on,
            CellState::Off => g_off,
        };
        if plane {
            g
        } else {
            g * Complex::from_polar(T::one(), illum.phase(m, n))
        }
    })
}
