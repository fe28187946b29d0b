//! Regime classification (independent vs. collective decoherence) and the
//! disorder averages behind the independent-decoherence limit.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{coth_factor, normalized_weights, BathSpectrum, SpectralMoments, WeightKind};
use crate::dephasing::{lambda1, lambda2, one_minus_cos, BasisLabel, DephasingModel};
use crate::error::{invalid, Result};
use crate::geometry::{RegisterGeometry, Vec3};
use crate::numeric::{derive_seed, pairwise_sum, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "Independent-1")]
    Independent1,
    #[serde(rename = "Independent-2")]
    Independent2,
    #[serde(rename = "Collective-1")]
    Collective1,
    #[serde(rename = "Collective-2")]
    Collective2,
    Intermediate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Independent1 => "Independent-1",
            Regime::Independent2 => "Independent-2",
            Regime::Collective1 => "Collective-1",
            Regime::Collective2 => "Collective-2",
            Regime::Intermediate => "Intermediate",
        })
    }
}

/// Cutoffs applied by [`classify`]. `≫`/`≪` are read as a factor of ten.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub independent_disorder: f64,
    pub independent_width: f64,
    pub collective: f64,
    pub collective_pairing: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            independent_disorder: PI,
            independent_width: 10.0,
            collective: PI / 10.0,
            collective_pairing: 0.1,
        }
    }
}

/// Dimensionless regime parameters and the resulting classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// ω̄₁δ/v
    pub p_ind1a: f64,
    /// ω̄₂δ/v
    pub p_ind1b: f64,
    /// Δω₁d/v
    pub p_ind2a: f64,
    /// Δω₂d/v
    pub p_ind2b: f64,
    /// ω̄₁d/v
    pub p_coll1a: f64,
    /// ω̄₂d/v
    pub p_coll1b: f64,
    /// max(Δω₁, Δω₂)·m·d/v
    pub p_coll2: f64,
    pub m: usize,
    pub classification: Regime,
}

impl RegimeReport {
    /// `key=value` lines in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("p_ind1a", format!("{:.11e}", self.p_ind1a)),
            ("p_ind1b", format!("{:.11e}", self.p_ind1b)),
            ("p_ind2a", format!("{:.11e}", self.p_ind2a)),
            ("p_ind2b", format!("{:.11e}", self.p_ind2b)),
            ("p_coll1a", format!("{:.11e}", self.p_coll1a)),
            ("p_coll1b", format!("{:.11e}", self.p_coll1b)),
            ("p_coll2", format!("{:.11e}", self.p_coll2)),
            ("m", self.m.to_string()),
            ("classification", self.classification.to_string()),
        ]
    }
}

pub fn classify(
    geometry: &RegisterGeometry,
    velocity: f64,
    moments: &SpectralMoments,
    m: usize,
) -> Result<RegimeReport> {
    classify_with(geometry, velocity, moments, m, &Thresholds::default())
}

pub fn classify_with(
    geometry: &RegisterGeometry,
    velocity: f64,
    moments: &SpectralMoments,
    m: usize,
    th: &Thresholds,
) -> Result<RegimeReport> {
    if m == 0 {
        return Err(invalid("m", "pairing distance must be >= 1"));
    }
    if !(velocity > 0.0) {
        return Err(invalid("bath.v", "velocity must be > 0"));
    }
    let (d, delta, v) = (geometry.d, geometry.delta, velocity);
    let mut r = RegimeReport {
        p_ind1a: moments.mean1 * delta / v,
        p_ind1b: moments.mean2 * delta / v,
        p_ind2a: moments.width1 * d / v,
        p_ind2b: moments.width2 * d / v,
        p_coll1a: moments.mean1 * d / v,
        p_coll1b: moments.mean2 * d / v,
        p_coll2: moments.max_width() * m as f64 * d / v,
        m,
        classification: Regime::Intermediate,
    };
    let small_disorder = r.p_ind1a <= th.collective && r.p_ind1b <= th.collective;
    r.classification = if r.p_ind1a >= th.independent_disorder && r.p_ind1b >= th.independent_disorder {
        Regime::Independent1
    } else if r.p_ind2a >= th.independent_width && r.p_ind2b >= th.independent_width {
        Regime::Independent2
    } else if small_disorder && r.p_coll1a <= th.collective && r.p_coll1b <= th.collective {
        Regime::Collective1
    } else if small_disorder && r.p_coll2 <= th.collective_pairing {
        Regime::Collective2
    } else {
        Regime::Intermediate
    };
    Ok(r)
}

/// Disorder-averaged λ₁ and λ₂ for one wave vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaAverages {
    pub lambda1: Estimate,
    pub lambda2: Estimate,
}

/// Averages λ₁, λ₂ at fixed `k` over `samples` disorder realizations of
/// `geometry` (sample `s` uses seed `derive_seed(geometry.seed, s)`).
pub fn disorder_average_lambdas(
    i: &BasisLabel,
    j: &BasisLabel,
    k: &Vec3,
    geometry: &RegisterGeometry,
    samples: usize,
) -> Result<LambdaAverages> {
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 samples for an error estimate"));
    }
    let values: Vec<(f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let g = geometry.reseeded(derive_seed(geometry.seed, s))?;
            Ok((lambda1(i, j, k, g.positions())?, lambda2(i, j, k, g.positions())?))
        })
        .collect::<Result<_>>()?;
    let (l1, l2): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
    Ok(LambdaAverages {
        lambda1: Estimate::from_samples(&l1),
        lambda2: Estimate::from_samples(&l2),
    })
}

/// `exp[-(Δω·s·d/v)²]`.
pub fn fourier_suppression(width: f64, s: f64, d: f64, v: f64) -> Result<f64> {
    for (name, x) in [("width", width), ("s", s), ("d", d)] {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(invalid(name, format!("must be finite and >= 0, got {x}")));
        }
    }
    if !(v > 0.0) {
        return Err(invalid("v", "velocity must be > 0"));
    }
    let a = width * s * d / v;
    Ok((-a * a).exp())
}

/// `|Σ_k h(ω_k) e^{iτω_k}|` under the normalized weight `kind`, with
/// `τ = s·d/v`.
pub fn grid_fourier_average(bath: &BathSpectrum, kind: WeightKind, tau: f64) -> Result<f64> {
    let h = normalized_weights(bath, kind)?;
    let (re, im): (Vec<f64>, Vec<f64>) = h
        .iter()
        .zip(bath.modes())
        .map(|(w, m)| {
            let z = Complex64::from_polar(*w, tau * m.omega);
            (z.re, z.im)
        })
        .unzip();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)).norm())
}

/// `x(t) = Σ_k |g_k|² coth(ω_k/2T)(1 - cos ω_k t)/ω_k²`.
pub fn damping_normalization(t: f64, bath: &BathSpectrum) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid("t", "time must be >= 0"));
    }
    let terms: Vec<f64> = bath
        .modes()
        .iter()
        .map(|m| m.g2 * coth_factor(m.omega, bath.temperature) * one_minus_cos(m.omega * t) / (m.omega * m.omega))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Independent-decoherence limit: `η = x(t)·Σ_l (i_l - j_l)²`, `φ = 0`.
pub fn independent_limit_factors(i: &BasisLabel, j: &BasisLabel, t: f64, bath: &BathSpectrum) -> Result<(f64, f64)> {
    if i.len() != j.len() {
        return Err(crate::error::Error::LengthMismatch {
            expected: i.len(),
            actual: j.len(),
        });
    }
    Ok((damping_normalization(t, bath)? * i.squared_difference(j), 0.0))
}

/// Disorder averages of the exact η, Lamb phase φ and total phase φ + χ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorAverages {
    pub eta: Estimate,
    pub lamb_phase: Estimate,
    pub total_phase: Estimate,
}

pub fn disorder_average_factors(
    i: &BasisLabel,
    j: &BasisLabel,
    t: f64,
    bath: &BathSpectrum,
    geometry: &RegisterGeometry,
    samples: usize,
) -> Result<FactorAverages> {
    if samples < 2 {
        return Err(invalid("samples", "need at least 2 samples for an error estimate"));
    }
    let values: Vec<(f64, f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let g = geometry.reseeded(derive_seed(geometry.seed, s))?;
            let pf = DephasingModel::new(bath, g.positions()).pair_factors(i, j, t)?;
            Ok((pf.eta, pf.phi, pf.phase()))
        })
        .collect::<Result<_>>()?;
    let eta: Vec<f64> = values.iter().map(|v| v.0).collect();
    let phi: Vec<f64> = values.iter().map(|v| v.1).collect();
    let total: Vec<f64> = values.iter().map(|v| v.2).collect();
    Ok(FactorAverages {
        eta: Estimate::from_samples(&eta),
        lamb_phase: Estimate::from_samples(&phi),
        total_phase: Estimate::from_samples(&total),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{CouplingForm, Dimensionality};
    use approx::assert_relative_eq;

    fn lab(s: &str) -> BasisLabel {
        s.parse().unwrap()
    }

    fn moments(mean: f64, width: f64) -> SpectralMoments {
        SpectralMoments {
            mean1: mean,
            width1: width,
            mean2: mean,
            width2: width,
        }
    }

    #[test]
    fn classification_examples() {
        // ω̄δ/v = 4 on both channels
        let g = RegisterGeometry::new([4, 1, 1], 1.0, 0.4, 1).unwrap();
        let r = classify(&g, 1.0, &moments(10.0, 0.1), 1).unwrap();
        assert_relative_eq!(r.p_ind1a, 4.0, epsilon = 1e-12);
        assert_eq!(r.classification, Regime::Independent1);

        // ω̄d/v = 0.01, δ ≪ d
        let g = RegisterGeometry::new([4, 1, 1], 1.0, 1e-3, 1).unwrap();
        let r = classify(&g, 1.0, &moments(0.01, 0.001), 1).unwrap();
        assert_eq!(r.classification, Regime::Collective1);

        // everything of order one
        let g = RegisterGeometry::new([4, 1, 1], 1.0, 1.0, 1).unwrap();
        let r = classify(&g, 1.0, &moments(1.0, 1.0), 1).unwrap();
        assert_eq!(r.classification, Regime::Intermediate);
    }

    #[test]
    fn other_regimes() {
        let g = RegisterGeometry::new([4, 1, 1], 1.0, 0.01, 1).unwrap();
        let r = classify(&g, 1.0, &moments(20.0, 15.0), 1).unwrap();
        assert_eq!(r.classification, Regime::Independent2);
        // kd ~ π but a narrow peak: pairing works
        let g = RegisterGeometry::new([6, 1, 1], 1.0, 0.001, 1).unwrap();
        let r = classify(&g, 1.0, &moments(1.07, 0.01), 3).unwrap();
        assert_relative_eq!(r.p_coll2, 0.03, epsilon = 1e-12);
        assert_eq!(r.classification, Regime::Collective2);
        assert!(classify(&g, 1.0, &moments(1.0, 0.1), 0).is_err());
    }

    #[test]
    fn lambda_average_of_identical_labels() {
        let g = RegisterGeometry::new([4, 1, 1], 1.0, 0.5, 3).unwrap();
        let a = disorder_average_lambdas(&lab("++-+"), &lab("++-+"), &[9.0, 0.0, 0.0], &g, 50).unwrap();
        assert_eq!(a.lambda1.mean, 0.0);
        assert_eq!(a.lambda1.stderr, 0.0);
        assert_eq!(a.lambda2.mean, 0.0);
        assert!(disorder_average_lambdas(&lab("++"), &lab("+-"), &[1.0; 3], &g, 1).is_err());
    }

    #[test]
    fn lambda_averages_in_strong_disorder() {
        // kδ = 8π: every cross term is suppressed by exp(-k²δ²/3)
        let g = RegisterGeometry::new([4, 1, 1], 1.0, 1.0, 11).unwrap();
        let k = [8.0 * PI, 0.0, 0.0];
        let a = disorder_average_lambdas(&lab("++++"), &lab("+-++"), &k, &g, 4000).unwrap();
        // a single flip gives λ₁ = 4 on every realization
        assert_relative_eq!(a.lambda1.mean, 4.0, epsilon = 1e-12);
        let a = disorder_average_lambdas(&lab("++++"), &lab("----"), &k, &g, 4000).unwrap();
        assert!(a.lambda1.z_score(16.0) < 3.0);
        assert!(a.lambda2.mean.abs() < 1e-12);
        let a = disorder_average_lambdas(&lab("++++"), &lab("+-+-"), &k, &g, 4000).unwrap();
        assert!(a.lambda1.z_score(8.0) < 3.0, "{:?}", a.lambda1);
        assert!(a.lambda2.z_score(0.0) < 3.0, "{:?}", a.lambda2);
    }

    #[test]
    fn lambda1_bounded_by_coherent_sum() {
        let g = RegisterGeometry::new([3, 1, 1], 1.0, 0.3, 5).unwrap();
        let a = disorder_average_lambdas(&lab("+++"), &lab("---"), &[0.1, 0.0, 0.0], &g, 100).unwrap();
        assert!(a.lambda1.mean <= 4.0 * 9.0 + 1e-9);
        assert!(a.lambda1.mean > 30.0);
    }

    #[test]
    fn fourier_examples() {
        assert_eq!(fourier_suppression(0.0, 1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(fourier_suppression(3.0, 1.0, 1.0, 1.0).unwrap(), (-9.0f64).exp());
        assert_relative_eq!(fourier_suppression(1.5, 2.0, 0.5, 0.5).unwrap(), (-9.0f64).exp());
        assert!(fourier_suppression(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(fourier_suppression(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_grid_transform_at_two() {
        // Δω s d/v = 2 with the Gaussian weight exp(-(ω-ω̄)²/(4Δω²)).
        let (dw, center) = (0.5, 10.0);
        let form = CouplingForm::GaussianPeak {
            amplitude: 1.0,
            center,
            width: std::f64::consts::SQRT_2 * dw,
        };
        let bath = BathSpectrum::discretized(form, 1.0, 0.0, Dimensionality::One, 4000, 20.0).unwrap();
        let tau = 2.0 / dw;
        let exact = grid_fourier_average(&bath, WeightKind::Phase, tau).unwrap();
        let formula = fourier_suppression(dw, tau, 1.0, 1.0).unwrap();
        assert!(exact / formula < 2.0 && formula / exact < 2.0, "{exact} vs {formula}");
    }

    #[test]
    fn independent_limit_examples() {
        let bath = BathSpectrum::discretized(
            CouplingForm::ohmic(0.1, 2.0),
            1.0,
            0.5,
            Dimensionality::Three,
            200,
            10.0,
        )
        .unwrap();
        let (eta, phi) = independent_limit_factors(&lab("+-+"), &lab("+-+"), 2.0, &bath).unwrap();
        assert_eq!((eta, phi), (0.0, 0.0));
        let t = 1.7;
        let x = damping_normalization(t, &bath).unwrap();
        let (eta, phi) = independent_limit_factors(&lab("+-+"), &lab("++-"), t, &bath).unwrap();
        assert_relative_eq!(eta, 8.0 * x);
        assert_eq!(phi, 0.0);
        // cross-module identity: single-flip damping equals 4x for any positions
        let g = RegisterGeometry::new([3, 1, 1], 1.0, 0.2, 9).unwrap();
        let single = DephasingModel::new(&bath, g.positions())
            .damping_factor(&lab("+-+"), &lab("+++"), t)
            .unwrap();
        assert_relative_eq!(single, 4.0 * x, max_relative = 1e-12);
    }
}
