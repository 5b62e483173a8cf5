//! Far-zone radiation of the composed aperture field, directivity and
//! lobe metrics.
//!
//! E(θ,φ) = (θ̂ sinφ + φ̂ cosφ cosθ)·EF(u,v)·AF(u,v), with
//! AF = Σ a_mn e^{+jk₀(u x_m + v y_n)}. The r-dependent prefactor is dropped.

mod lobes;
mod spectrum;

pub use lobes::{lobe_metrics, Lobe, LobeReport};
pub use spectrum::ApertureSpectrum;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::ApertureLayout;
use crate::scalar::Real;
use crate::synthesis::ApertureField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElementModel {
    /// Uniformly illuminated square patch: P²·sinc(k₀uP/2)·sinc(k₀vP/2).
    #[default]
    UniformPatch,
    /// Isotropic point radiators weighted by P².
    PointSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldConfig {
    /// Smallest padded FFT length per axis.
    pub min_fft_size: usize,
    /// Upper limit on padded FFT points (Lx·Ly).
    pub fft_budget: usize,
    pub element: ElementModel,
}

impl Default for FarFieldConfig {
    fn default() -> Self {
        Self {
            min_fft_size: 512,
            fft_budget: 1 << 24,
            element: ElementModel::UniformPatch,
        }
    }
}

pub const MAX_CUT_STEP_DEG: f64 = 0.5;
pub const MAX_THETA_STEP_DEG: f64 = 0.5;
pub const MAX_PHI_STEP_DEG: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling<T> {
    /// yz-plane cut over signed θ (negative θ lies at φ = 270°).
    Cut {
        start_deg: T,
        stop_deg: T,
        step_deg: T,
    },
    /// Upper hemisphere, θ ∈ [0, 90], φ ∈ [0, 360).
    Hemisphere { theta_step_deg: T, phi_step_deg: T },
    /// Visible FFT bins themselves, no resampling.
    Native,
}

impl<T: Real> Sampling<T> {
    pub fn full_cut() -> Self {
        Sampling::Cut {
            start_deg: T::lit(-90.0),
            stop_deg: T::lit(90.0),
            step_deg: T::lit(MAX_CUT_STEP_DEG),
        }
    }

    pub fn hemisphere() -> Self {
        Sampling::Hemisphere {
            theta_step_deg: T::lit(MAX_THETA_STEP_DEG),
            phi_step_deg: T::lit(MAX_PHI_STEP_DEG),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Raw,
    PeakNormalized,
    /// |E|² equals directivity (linear).
    Directivity,
}

impl Normalization {
    pub fn label(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::PeakNormalized => "peak-normalized",
            Normalization::Directivity => "directivity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub theta_deg: T,
    pub phi_deg: T,
    pub u: T,
    pub v: T,
    pub e_theta: Complex<T>,
    pub e_phi: Complex<T>,
}

impl<T: Real> FieldSample<T> {
    pub fn power(&self) -> T {
        self.e_theta.norm_sqr() + self.e_phi.norm_sqr()
    }

    pub fn magnitude(&self) -> T {
        self.power().sqrt()
    }

    /// 10·log10 |E|².
    pub fn level_db(&self) -> T {
        T::lit(10.0) * self.power().log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingKind<T> {
    Cut,
    /// Row-major [θ index][φ index].
    Hemisphere {
        n_theta: usize,
        n_phi: usize,
        theta_step_deg: T,
        phi_step_deg: T,
    },
    Native,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern<T> {
    pub frequency: T,
    pub kind: SamplingKind<T>,
    pub normalization: Normalization,
    pub samples: Vec<FieldSample<T>>,
}

impl<T: Real> FarFieldPattern<T> {
    pub fn peak(&self) -> Option<&FieldSample<T>> {
        self.samples
            .iter()
            .fold(None, |best: Option<&FieldSample<T>>, s| match best {
                Some(b) if b.power() >= s.power() => Some(b),
                _ => Some(s),
            })
    }

    fn scaled(&self, k: T, normalization: Normalization) -> Self {
        Self {
            frequency: self.frequency,
            kind: self.kind,
            normalization,
            samples: self
                .samples
                .iter()
                .map(|s| FieldSample {
                    e_theta: s.e_theta * k,
                    e_phi: s.e_phi * k,
                    ..*s
                })
                .collect(),
        }
    }

    /// Scales so that |E|² is directivity, given the raw hemisphere power
    /// integral of the same aperture.
    pub fn to_directivity(&self, radiated_power: T) -> Result<Self> {
        if !(radiated_power > T::zero()) {
            return Err(Error::Domain("pattern radiates no power".into()));
        }
        Ok(self.scaled(
            (T::lit(4.0) * T::PI() / radiated_power).sqrt(),
            Normalization::Directivity,
        ))
    }

    /// Divides by the peak magnitude. An all-zero pattern is returned unchanged.
    pub fn peak_normalized(&self) -> Self {
        match self.peak().map(|p| p.magnitude()) {
            Some(m) if m > T::zero() => self.scaled(T::one() / m, Normalization::PeakNormalized),
            _ => Self {
                normalization: Normalization::PeakNormalized,
                ..self.clone()
            },
        }
    }
}

fn cut_thetas<T: Real>(start: T, stop: T, step: T) -> Result<Vec<T>> {
    let ninety = T::lit(90.0);
    if !(step > T::zero() && step <= T::lit(MAX_CUT_STEP_DEG)) {
        return Err(Error::Sampling(format!(
            "cut step {step} deg must be in (0, {MAX_CUT_STEP_DEG}]"
        )));
    }
    if !(start >= -ninety && stop <= ninety && start <= stop) {
        return Err(Error::Sampling(format!(
            "cut range [{start}, {stop}] deg must lie within [-90, 90]"
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

/// Sample counts and actual steps of a hemisphere grid: θ spans [0, 90]
/// inclusive, φ is periodic.
fn hemisphere_grid<T: Real>(theta_step: T, phi_step: T) -> Result<(usize, usize, T, T)> {
    if !(theta_step > T::zero() && theta_step <= T::lit(MAX_THETA_STEP_DEG) + T::lit(1e-12)) {
        return Err(Error::Sampling(format!(
            "theta step {theta_step} deg must be in (0, {MAX_THETA_STEP_DEG}]"
        )));
    }
    if !(phi_step > T::zero() && phi_step <= T::lit(MAX_PHI_STEP_DEG) + T::lit(1e-12)) {
        return Err(Error::Sampling(format!(
            "phi step {phi_step} deg must be in (0, {MAX_PHI_STEP_DEG}]"
        )));
    }
    let nt = (T::lit(90.0) / theta_step - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let np = (T::lit(360.0) / phi_step - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    Ok((
        nt + 1,
        np,
        T::lit(90.0) / T::from_usize_lossy(nt),
        T::lit(360.0) / T::from_usize_lossy(np),
    ))
}

impl<T: Real> ApertureSpectrum<T> {
    pub fn sample(&self, sampling: &Sampling<T>) -> Result<FarFieldPattern<T>> {
        let (kind, samples) = match *sampling {
            Sampling::Cut {
                start_deg,
                stop_deg,
                step_deg,
            } => {
                let samples = cut_thetas(start_deg, stop_deg, step_deg)?
                    .into_iter()
                    .map(|t| {
                        let e = self.cut_field(t.to_radians());
                        FieldSample {
                            theta_deg: t,
                            phi_deg: if t < T::zero() {
                                T::lit(270.0)
                            } else {
                                T::lit(90.0)
                            },
                            u: T::zero(),
                            v: t.to_radians().sin(),
                            e_theta: e,
                            e_phi: Complex::new(T::zero(), T::zero()),
                        }
                    })
                    .collect();
                (SamplingKind::Cut, samples)
            }
            Sampling::Hemisphere {
                theta_step_deg,
                phi_step_deg,
            } => {
                let (nt, np, dt, dp) = hemisphere_grid(theta_step_deg, phi_step_deg)?;
                let mut samples = Vec::with_capacity(nt * np);
                for i in 0..nt {
                    let theta_deg = dt * T::from_usize_lossy(i);
                    let theta = theta_deg.to_radians();
                    for j in 0..np {
                        let phi_deg = dp * T::from_usize_lossy(j);
                        let phi = phi_deg.to_radians();
                        let (e_theta, e_phi) = self.field(theta, phi);
                        samples.push(FieldSample {
                            theta_deg,
                            phi_deg,
                            u: theta.sin() * phi.cos(),
                            v: theta.sin() * phi.sin(),
                            e_theta,
                            e_phi,
                        });
                    }
                }
                (
                    SamplingKind::Hemisphere {
                        n_theta: nt,
                        n_phi: np,
                        theta_step_deg: dt,
                        phi_step_deg: dp,
                    },
                    samples,
                )
            }
            Sampling::Native => {
                let samples = self
                    .visible_bins()
                    .into_iter()
                    .map(|(i, j, u, v)| {
                        let rho = (u * u + v * v).sqrt();
                        let ct = (T::one() - rho * rho).max(T::zero()).sqrt();
                        let (sp, cp) = if rho > T::zero() {
                            (v / rho, u / rho)
                        } else {
                            (T::zero(), T::one())
                        };
                        let f = self.array_factor_bin(i, j) * self.element_factor(u, v);
                        FieldSample {
                            theta_deg: rho.min(T::one()).asin().to_degrees(),
                            phi_deg: v.atan2(u).to_degrees(),
                            u,
                            v,
                            e_theta: f * sp,
                            e_phi: f * (cp * ct),
                        }
                    })
                    .collect();
                (SamplingKind::Native, samples)
            }
        };
        Ok(FarFieldPattern {
            frequency: self.frequency(),
            kind,
            normalization: Normalization::Raw,
            samples,
        })
    }

    /// ∫∫(|E_θ|²+|E_φ|²) sinθ dθ dφ over the upper hemisphere.
    pub fn radiated_power(&self, theta_step_deg: T, phi_step_deg: T) -> Result<T> {
        let pattern = self.sample(&Sampling::Hemisphere {
            theta_step_deg,
            phi_step_deg,
        })?;
        hemisphere_integral(&pattern)
    }

    /// Directivity (linear) toward signed θ on the steering cut, integrating
    /// the total power on the default hemisphere grid.
    pub fn cut_directivity(&self, theta_deg: T) -> Result<T> {
        let total = self.radiated_power(T::lit(MAX_THETA_STEP_DEG), T::lit(MAX_PHI_STEP_DEG))?;
        if total <= T::zero() {
            return Ok(T::zero());
        }
        let e = self.cut_field(theta_deg.to_radians());
        Ok(T::lit(4.0) * T::PI() * e.norm_sqr() / total)
    }
}

/// Evaluates the far field of `aperture` over `sampling`.
pub fn radiate<T: Real>(
    aperture: &ApertureField<T>,
    layout: &ApertureLayout<T>,
    f: T,
    sampling: &Sampling<T>,
    config: &FarFieldConfig,
) -> Result<FarFieldPattern<T>> {
    ApertureSpectrum::new(aperture, layout, f, config)?.sample(sampling)
}

fn hemisphere_integral<T: Real>(pattern: &FarFieldPattern<T>) -> Result<T> {
    let SamplingKind::Hemisphere {
        n_theta,
        n_phi,
        theta_step_deg,
        phi_step_deg,
    } = pattern.kind
    else {
        return Err(Error::Sampling(
            "directivity needs a hemisphere grid".into(),
        ));
    };
    if theta_step_deg > T::lit(MAX_THETA_STEP_DEG) + T::lit(1e-12)
        || phi_step_deg > T::lit(MAX_PHI_STEP_DEG) + T::lit(1e-12)
    {
        return Err(Error::Sampling(format!(
            "hemisphere steps ({theta_step_deg}, {phi_step_deg}) deg exceed ({MAX_THETA_STEP_DEG}, {MAX_PHI_STEP_DEG})"
        )));
    }
    if pattern.samples.len() != n_theta * n_phi || n_theta < 2 {
        return Err(Error::Sampling("hemisphere grid is incomplete".into()));
    }
    let dt = theta_step_deg.to_radians();
    let dp = phi_step_deg.to_radians();
    let half = T::lit(0.5);
    let mut total = T::zero();
    for i in 0..n_theta {
        // trapezoid in θ; φ is periodic so its trapezoid weights are uniform
        let w = if i == 0 || i + 1 == n_theta {
            half
        } else {
            T::one()
        };
        let row = &pattern.samples[i * n_phi..(i + 1) * n_phi];
        let ring = row.iter().fold(T::zero(), |acc, s| acc + s.power());
        total = total + w * ring * row[0].theta_deg.to_radians().sin();
    }
    Ok(total * dt * dp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Directivity<T> {
    /// |E|² equals D (linear).
    pub pattern: FarFieldPattern<T>,
    pub peak_dbi: T,
    pub peak_theta_deg: T,
    pub peak_phi_deg: T,
    /// Raw hemisphere power integral used for the normalization.
    pub radiated_power: T,
}

/// D(θ,φ) = 4π|E|² / ∫∫|E|² sinθ dθ dφ over the upper hemisphere.
pub fn directivity<T: Real>(pattern: &FarFieldPattern<T>) -> Result<Directivity<T>> {
    let total = hemisphere_integral(pattern)?;
    if !(total > T::zero()) {
        return Err(Error::Domain("pattern radiates no power".into()));
    }
    let k = (T::lit(4.0) * T::PI() / total).sqrt();
    let scaled = pattern.scaled(k, Normalization::Directivity);
    let peak = *scaled.peak().expect("non-empty grid");
    Ok(Directivity {
        peak_dbi: peak.level_db(),
        peak_theta_deg: peak.theta_deg,
        peak_phi_deg: peak.phi_deg,
        pattern: scaled,
        radiated_power: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::wavelength;
    use std::f64::consts::PI;

    type C = Complex<f64>;

    fn uniform(rows: usize, cols: usize) -> ApertureField<f64> {
        ApertureField::from_fn(rows, cols, |_, _| C::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn hemisphere_isotropic_is_two() {
        let (nt, np, dt, dp) = hemisphere_grid(0.5, 1.0).unwrap();
        let mut samples = Vec::new();
        for i in 0..nt {
            for j in 0..np {
                samples.push(FieldSample {
                    theta_deg: dt * i as f64,
                    phi_deg: dp * j as f64,
                    u: 0.0,
                    v: 0.0,
                    e_theta: C::new(1.0, 0.0),
                    e_phi: C::new(0.0, 0.0),
                });
            }
        }
        let p = FarFieldPattern {
            frequency: 33e9,
            kind: SamplingKind::Hemisphere {
                n_theta: nt,
                n_phi: np,
                theta_step_deg: dt,
                phi_step_deg: dp,
            },
            normalization: Normalization::Raw,
            samples,
        };
        let d = directivity(&p).unwrap();
        assert!(
            (d.peak_dbi - 10.0 * 2f64.log10()).abs() < 1e-4,
            "{}",
            d.peak_dbi
        );
    }

    #[test]
    fn coarse_sampling_rejected() {
        let l = ApertureLayout::new(2, 2, 1e-3).unwrap();
        let s =
            ApertureSpectrum::new(&uniform(2, 2), &l, 33e9, &FarFieldConfig::default()).unwrap();
        assert!(s
            .sample(&Sampling::Hemisphere {
                theta_step_deg: 1.0,
                phi_step_deg: 1.0
            })
            .is_err());
        assert!(s
            .sample(&Sampling::Hemisphere {
                theta_step_deg: 0.5,
                phi_step_deg: 2.0
            })
            .is_err());
        assert!(s
            .sample(&Sampling::Cut {
                start_deg: -90.0,
                stop_deg: 90.0,
                step_deg: 1.0
            })
            .is_err());
        assert!(s
            .sample(&Sampling::Cut {
                start_deg: -95.0,
                stop_deg: 90.0,
                step_deg: 0.5
            })
            .is_err());
        let cut = directivity(&s.sample(&Sampling::full_cut()).unwrap());
        assert!(matches!(cut, Err(Error::Sampling(_))));
    }

    #[test]
    fn budget_enforced() {
        let l = ApertureLayout::prototype();
        let cfg = FarFieldConfig {
            fft_budget: 1000,
            ..Default::default()
        };
        match ApertureSpectrum::new(&uniform(10, 20), &l, 33e9, &cfg) {
            Err(Error::FftBudget { requested, budget }) => {
                assert_eq!(requested, 512 * 512);
                assert_eq!(budget, 1000);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_cell_is_element_factor() {
        let l = ApertureLayout::new(1, 1, 2e-3).unwrap();
        let a = ApertureField::new(1, 1, vec![C::new(1.0, 0.0)]).unwrap();
        let p = radiate(
            &a,
            &l,
            33e9,
            &Sampling::full_cut(),
            &FarFieldConfig::default(),
        )
        .unwrap();
        let k0 = 2.0 * PI / wavelength(33e9);
        for s in &p.samples {
            let v = s.theta_deg.to_radians().sin();
            let x = k0 * v * 1e-3;
            let ef = 4e-6 * if x == 0.0 { 1.0 } else { x.sin() / x };
            assert!(
                (s.e_theta - C::new(ef, 0.0)).norm() < 1e-12 * 4e-6,
                "{}",
                s.theta_deg
            );
        }
    }

    #[test]
    fn linear_in_aperture() {
        let l = ApertureLayout::new(3, 5, 1.728e-3).unwrap();
        let a =
            ApertureField::from_fn(3, 5, |m, n| C::new(m as f64 - 1.0, n as f64 * 0.3)).unwrap();
        let b = ApertureField::from_fn(3, 5, |m, n| C::from_polar(1.0, (m * n) as f64)).unwrap();
        let sum = ApertureField::from_fn(3, 5, |m, n| a.get(m, n) + b.get(m, n)).unwrap();
        let cfg = FarFieldConfig::default();
        let s = Sampling::full_cut();
        let pa = radiate(&a, &l, 33e9, &s, &cfg).unwrap();
        let pb = radiate(&b, &l, 33e9, &s, &cfg).unwrap();
        let ps = radiate(&sum, &l, 33e9, &s, &cfg).unwrap();
        let scale = ps.peak().unwrap().magnitude();
        for ((x, y), z) in pa.samples.iter().zip(&pb.samples).zip(&ps.samples) {
            assert!((x.e_theta + y.e_theta - z.e_theta).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn peak_normalized_max_is_one() {
        let l = ApertureLayout::prototype();
        let p = radiate(
            &uniform(10, 20),
            &l,
            33e9,
            &Sampling::full_cut(),
            &FarFieldConfig::default(),
        )
        .unwrap()
        .peak_normalized();
        let m = p.peak().unwrap().magnitude();
        assert!((m - 1.0).abs() <= f64::EPSILON);
        assert_eq!(p.normalization, Normalization::PeakNormalized);
    }

    #[test]
    fn directivity_integrates_to_unity() {
        let l = ApertureLayout::prototype();
        let p = radiate(
            &uniform(10, 20),
            &l,
            33e9,
            &Sampling::hemisphere(),
            &FarFieldConfig::default(),
        )
        .unwrap();
        let d = directivity(&p).unwrap();
        let again = hemisphere_integral(&d.pattern).unwrap() / (4.0 * PI);
        assert!(again <= 1.0 + 1e-9, "{again}");
        // uniform aperture oracle 4πA/λ²
        let lam = wavelength(33e9);
        let oracle = 10.0 * (4.0 * PI * l.physical_area() / (lam * lam)).log10();
        assert!(
            (d.peak_dbi - oracle).abs() < 0.5,
            "{} vs {oracle}",
            d.peak_dbi
        );
        assert!(d.peak_theta_deg.abs() < 1e-12);
    }

    #[test]
    fn parseval_visible_power() {
        // half-wavelength pitch keeps almost all power visible
        let f = 30e9;
        let l = ApertureLayout::new(16, 16, wavelength(f) / 2.0).unwrap();
        let s = ApertureSpectrum::new(&uniform(16, 16), &l, f, &FarFieldConfig::default()).unwrap();
        let aperture_power = 256.0 * l.cell_area();
        let ratio = s.visible_power() / aperture_power;
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn padding_convergence_of_peak() {
        let l = ApertureLayout::prototype();
        let a = ApertureField::from_fn(10, 20, |_, n| {
            C::new(if n % 8 < 4 { 1.0 } else { -1.0 }, 0.0)
        })
        .unwrap();
        let lvl = |min_fft_size| {
            let cfg = FarFieldConfig {
                min_fft_size,
                ..Default::default()
            };
            let p = radiate(&a, &l, 33e9, &Sampling::full_cut(), &cfg).unwrap();
            p.peak().unwrap().level_db()
        };
        assert!((lvl(512) - lvl(1024)).abs() < 0.05);
    }

    #[test]
    fn single_precision_runs() {
        let l = ApertureLayout::<f32>::prototype();
        let a = ApertureField::from_fn(10, 20, |_, _| Complex::new(1.0f32, 0.0)).unwrap();
        let p = radiate(
            &a,
            &l,
            33e9,
            &Sampling::full_cut(),
            &FarFieldConfig::default(),
        )
        .unwrap();
        assert_eq!(p.peak().unwrap().theta_deg, 0.0);
    }
}
