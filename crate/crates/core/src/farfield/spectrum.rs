//! Zero-padded 2D FFT of the aperture coefficients and its evaluation at
//! arbitrary direction cosines.

use num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use super::{ElementModel, FarFieldConfig};
use crate::error::{Error, Result};
use crate::model::{wavelength, wavenumber, ApertureLayout};
use crate::scalar::{sinc, Real};
use crate::synthesis::ApertureField;

/// Raw FFT of the aperture plus what is needed to turn bins back into
/// fields: `raw[p·ly + q]` is Σ a_mn e^{+j2π(mp/lx + nq/ly)}.
#[derive(Debug, Clone)]
pub struct ApertureSpectrum<T> {
    frequency: T,
    pitch: T,
    lx: usize,
    ly: usize,
    // (M−1)/2 and (N−1)/2 in cells
    cx: T,
    cy: T,
    element: ElementModel,
    raw: Vec<Complex<T>>,
}

fn padded_len(cells: usize, min: usize) -> usize {
    cells.next_power_of_two().max(min.next_power_of_two())
}

impl<T: Real> ApertureSpectrum<T> {
    pub fn new(
        aperture: &ApertureField<T>,
        layout: &ApertureLayout<T>,
        frequency: T,
        config: &FarFieldConfig,
    ) -> Result<Self> {
        if !aperture.matches(layout) {
            return Err(Error::InvalidInput(format!(
                "aperture is {}x{}, layout {}x{}",
                aperture.rows(),
                aperture.cols(),
                layout.rows(),
                layout.cols()
            )));
        }
        if !(frequency.is_finite() && frequency > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "frequency {frequency} must be > 0"
            )));
        }
        let (m, n) = (layout.rows(), layout.cols());
        let lx = padded_len(m, config.min_fft_size);
        let ly = padded_len(n, config.min_fft_size);
        let requested = lx.saturating_mul(ly);
        if requested > config.fft_budget {
            return Err(Error::FftBudget {
                requested,
                budget: config.fft_budget,
            });
        }

        let mut raw = vec![Complex::new(T::zero(), T::zero()); lx * ly];
        for r in 0..m {
            for c in 0..n {
                raw[r * ly + c] = aperture.get(r, c);
            }
        }
        let mut planner = FftPlanner::<T>::new();
        // only the first m rows are non-zero before the column pass
        let row_fft = planner.plan_fft(ly, FftDirection::Inverse);
        for row in raw.chunks_exact_mut(ly).take(m) {
            row_fft.process(row);
        }
        let col_fft = planner.plan_fft(lx, FftDirection::Inverse);
        let mut column = vec![Complex::new(T::zero(), T::zero()); lx];
        for q in 0..ly {
            for p in 0..lx {
                column[p] = raw[p * ly + q];
            }
            col_fft.process(&mut column);
            for p in 0..lx {
                raw[p * ly + q] = column[p];
            }
        }

        let half = T::lit(0.5);
        Ok(Self {
            frequency,
            pitch: layout.pitch(),
            lx,
            ly,
            cx: T::from_usize_lossy(m - 1) * half,
            cy: T::from_usize_lossy(n - 1) * half,
            element: config.element,
            raw,
        })
    }

    pub fn frequency(&self) -> T {
        self.frequency
    }

    pub fn fft_size(&self) -> (usize, usize) {
        (self.lx, self.ly)
    }

    /// Direction-cosine spacing of the bins along x and y.
    pub fn bin_spacing(&self) -> (T, T) {
        let lam = wavelength(self.frequency);
        (
            lam / (T::from_usize_lossy(self.lx) * self.pitch),
            lam / (T::from_usize_lossy(self.ly) * self.pitch),
        )
    }

    /// Array factor with the aperture centered on the origin, at integer
    /// (unwrapped) bin indices.
    fn centered(&self, i: i64, j: i64) -> Complex<T> {
        let p = i.rem_euclid(self.lx as i64) as usize;
        let q = j.rem_euclid(self.ly as i64) as usize;
        let arg = -T::two_pi()
            * (T::lit(i as f64) * self.cx / T::from_usize_lossy(self.lx)
                + T::lit(j as f64) * self.cy / T::from_usize_lossy(self.ly));
        self.raw[p * self.ly + q] * Complex::from_polar(T::one(), arg)
    }

    /// Exact array factor at signed bin (i, j).
    pub fn array_factor_bin(&self, i: i64, j: i64) -> Complex<T> {
        self.centered(i, j)
    }

    /// Array factor at (u, v), bilinear between bins.
    pub fn array_factor(&self, u: T, v: T) -> Complex<T> {
        let (du, dv) = self.bin_spacing();
        let tx = u / du;
        let ty = v / dv;
        let fx = tx.floor();
        let fy = ty.floor();
        let wx = tx - fx;
        let wy = ty - fy;
        let i0 = fx.to_i64().unwrap_or(0);
        let j0 = fy.to_i64().unwrap_or(0);
        let one = T::one();
        let mut acc = Complex::new(T::zero(), T::zero());
        for (di, a) in [(0, one - wx), (1, wx)] {
            if a == T::zero() {
                continue;
            }
            for (dj, b) in [(0, one - wy), (1, wy)] {
                if b == T::zero() {
                    continue;
                }
                acc = acc + self.centered(i0 + di, j0 + dj) * (a * b);
            }
        }
        acc
    }

    pub fn element_factor(&self, u: T, v: T) -> T {
        let area = self.pitch * self.pitch;
        match self.element {
            ElementModel::PointSource => area,
            ElementModel::UniformPatch => {
                let h = wavenumber(self.frequency) * self.pitch * T::lit(0.5);
                area * sinc(h * u) * sinc(h * v)
            }
        }
    }

    /// (E_θ, E_φ) at a general direction; angles in radians.
    pub fn field(&self, theta: T, phi: T) -> (Complex<T>, Complex<T>) {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let u = st * cp;
        let v = st * sp;
        let f = self.array_factor(u, v) * self.element_factor(u, v);
        (f * sp, f * (cp * ct))
    }

    /// Field on the yz steering cut for signed θ (radians): u = 0, v = sin θ.
    pub fn cut_field(&self, theta: T) -> Complex<T> {
        let v = theta.sin();
        self.array_factor(T::zero(), v) * self.element_factor(T::zero(), v)
    }

    /// Visible-region bins as (i, j, u, v).
    pub fn visible_bins(&self) -> Vec<(i64, i64, T, T)> {
        let (du, dv) = self.bin_spacing();
        let ri = (T::one() / du).floor().to_i64().unwrap_or(0);
        let rj = (T::one() / dv).floor().to_i64().unwrap_or(0);
        let mut out = Vec::new();
        for i in -ri..=ri {
            let u = T::lit(i as f64) * du;
            for j in -rj..=rj {
                let v = T::lit(j as f64) * dv;
                if u * u + v * v <= T::one() {
                    out.push((i, j, u, v));
                }
            }
        }
        out
    }

    /// (1/λ²)·Σ_visible |EF·AF|²·Δu·Δv: the plane-wave-spectrum power in
    /// the visible region, comparable with Σ|a|²·P².
    pub fn visible_power(&self) -> T {
        let (du, dv) = self.bin_spacing();
        let lam = wavelength(self.frequency);
        let sum = self
            .visible_bins()
            .into_iter()
            .fold(T::zero(), |acc, (i, j, u, v)| {
                acc + (self.centered(i, j) * self.element_factor(u, v)).norm_sqr()
            });
        sum * du * dv / (lam * lam)
    }
}
