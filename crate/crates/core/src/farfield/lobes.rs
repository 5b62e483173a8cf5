//! Main, quantization, specular and sidelobe extraction from a steering cut.

use super::{FarFieldPattern, SamplingKind};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Half-width of the quantization and specular windows (degrees).
pub const LOBE_WINDOW_DEG: f64 = 5.0;
/// Relative power difference under which two samples count as the same peak.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe<T> {
    pub angle_deg: T,
    /// dB relative to the main lobe.
    pub level_db: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LobeReport<T> {
    pub main: Lobe<T>,
    /// None when the main lobe is within the window of broadside.
    pub quantization: Option<Lobe<T>>,
    pub specular: Lobe<T>,
    pub peak_sidelobe: Option<Lobe<T>>,
    pub beamwidth_3db: Option<T>,
    /// Main lobe sits on the first or last cut sample.
    pub unreliable: bool,
}

fn window_max<T: Real>(theta: &[T], db: &[T], center: T, half: T) -> Option<usize> {
    (0..theta.len())
        .filter(|&i| (theta[i] - center).abs() <= half)
        .fold(None, |best, i| match best {
            Some(b) if db[b] >= db[i] => Some(b),
            _ => Some(i),
        })
}

fn crossing<T: Real>(theta: &[T], db: &[T], from: usize, step: isize, level: T) -> Option<T> {
    let mut i = from as isize;
    loop {
        let j = i + step;
        if j < 0 || j as usize >= db.len() {
            return None;
        }
        let (a, b) = (i as usize, j as usize);
        if db[b] <= level {
            let t = (db[a] - level) / (db[a] - db[b]);
            return Some(theta[a] + (theta[b] - theta[a]) * t);
        }
        i = j;
    }
}

/// Walks away from the peak while the level keeps falling; stops at the
/// first local minimum.
fn first_min<T: Real>(db: &[T], from: usize, step: isize) -> usize {
    let mut i = from as isize;
    loop {
        let j = i + step;
        if j < 0 || j as usize >= db.len() || db[j as usize] > db[i as usize] {
            return i as usize;
        }
        i = j;
    }
}

pub fn lobe_metrics<T: Real>(
    pattern: &FarFieldPattern<T>,
    theta_r_deg: T,
) -> Result<LobeReport<T>> {
    if pattern.kind != SamplingKind::Cut {
        return Err(Error::Sampling(
            "lobe metrics need a steering-plane cut".into(),
        ));
    }
    let n = pattern.samples.len();
    if n < 3 {
        return Err(Error::Sampling("cut has fewer than 3 samples".into()));
    }
    let theta: Vec<T> = pattern.samples.iter().map(|s| s.theta_deg).collect();
    let power: Vec<T> = pattern.samples.iter().map(|s| s.power()).collect();
    let max = power.iter().fold(T::zero(), |a, p| a.max(*p));
    if !(max > T::zero()) {
        return Err(Error::Domain("cut has no radiated field".into()));
    }
    let db: Vec<T> = power
        .iter()
        .map(|p| T::lit(10.0) * (*p / max).log10())
        .collect();

    // ties (exact ±θ symmetry) resolve toward the commanded side
    let tie = T::one() - T::lit(TIE_TOLERANCE);
    let preferred = |i: usize| {
        let t = theta[i];
        if theta_r_deg > T::zero() {
            t > T::zero()
        } else if theta_r_deg < T::zero() {
            t < T::zero()
        } else {
            true
        }
    };
    let candidates: Vec<usize> = (0..n).filter(|&i| power[i] >= max * tie).collect();
    let strongest = |set: &mut dyn Iterator<Item = usize>| {
        set.fold(None::<usize>, |best, i| match best {
            Some(b) if power[b] >= power[i] => Some(b),
            _ => Some(i),
        })
    };
    let main_idx = strongest(&mut candidates.iter().copied().filter(|&i| preferred(i)))
        .or_else(|| strongest(&mut candidates.iter().copied()))
        .expect("at least one candidate");
    let main_theta = theta[main_idx];
    let main = Lobe {
        angle_deg: main_theta,
        level_db: T::zero(),
    };
    let half = T::lit(LOBE_WINDOW_DEG);
    let lobe_at = |i: usize| Lobe {
        angle_deg: theta[i],
        level_db: db[i],
    };

    let quant_idx = if main_theta.abs() < half {
        None
    } else {
        window_max(&theta, &db, -main_theta, half)
    };
    let spec_idx = if main_theta.abs() <= half {
        Some(main_idx)
    } else {
        window_max(&theta, &db, T::zero(), half)
    };
    let specular = spec_idx.map(lobe_at).unwrap_or(main);

    let lo = first_min(&db, main_idx, -1);
    let hi = first_min(&db, main_idx, 1);
    let excluded = |i: usize| {
        (lo..=hi).contains(&i)
            || (theta[i] - main_theta).abs() <= half
            || (theta[i] + main_theta).abs() <= half
            || theta[i].abs() <= half
    };
    let side_idx = (0..n)
        .filter(|&i| !excluded(i))
        .fold(None, |best, i| match best {
            Some(b) if db[b] >= db[i] => Some(b),
            _ => Some(i),
        });

    let level = T::lit(-3.0);
    let beamwidth = match (
        crossing(&theta, &db, main_idx, -1, level),
        crossing(&theta, &db, main_idx, 1, level),
    ) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };

    Ok(LobeReport {
        main,
        quantization: quant_idx.map(lobe_at),
        specular,
        peak_sidelobe: side_idx.map(lobe_at),
        beamwidth_3db: beamwidth,
        unreliable: main_idx == 0 || main_idx + 1 == n,
    })
}
