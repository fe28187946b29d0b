//! The bosonic environment: linear dispersion, coupling spectrum, thermal
//! occupation, a discretized mode set and the spectral moments used to
//! classify decoherence regimes. Units have ħ = k_B = 1.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{norm, Vec3};
use crate::numeric::pairwise_sum;

/// Shape of |g(ω)|².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CouplingForm {
    /// `A · ω^p · exp(-ω/ω_c)`; `p = 1` is the ohmic bath.
    PowerLaw { amplitude: f64, exponent: f64, cutoff: f64 },
    /// `A · ω² · exp(-(ω-ω̄)²/(2w²))`, chosen so that the phase-shift weight
    /// `|g|²/ω²` is exactly a Gaussian of mean `center` and width `width`.
    GaussianPeak { amplitude: f64, center: f64, width: f64 },
}

impl CouplingForm {
    pub fn ohmic(amplitude: f64, cutoff: f64) -> Self {
        CouplingForm::PowerLaw {
            amplitude,
            exponent: 1.0,
            cutoff,
        }
    }

    /// |g(ω)|² per unit frequency.
    pub fn strength(&self, omega: f64) -> f64 {
        match *self {
            CouplingForm::PowerLaw {
                amplitude,
                exponent,
                cutoff,
            } => amplitude * omega.powf(exponent) * (-omega / cutoff).exp(),
            CouplingForm::GaussianPeak {
                amplitude,
                center,
                width,
            } => {
                let z = (omega - center) / width;
                amplitude * omega * omega * (-0.5 * z * z).exp()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CouplingForm::PowerLaw {
                amplitude,
                exponent,
                cutoff,
            } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(invalid("coupling.A", "amplitude must be finite and >= 0"));
                }
                if !exponent.is_finite() {
                    return Err(invalid("coupling.p", "exponent must be finite"));
                }
                if !(cutoff > 0.0) {
                    return Err(invalid("coupling.cutoff", "cutoff must be > 0"));
                }
            }
            CouplingForm::GaussianPeak {
                amplitude,
                center,
                width,
            } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(invalid("coupling.A", "amplitude must be finite and >= 0"));
                }
                if !(center > 0.0 && center.is_finite()) {
                    return Err(invalid("peak.center", "peak frequency must be > 0"));
                }
                if !(width > 0.0 && width.is_finite()) {
                    return Err(invalid("peak.width", "peak width must be > 0"));
                }
            }
        }
        Ok(())
    }
}

/// Which directions the wave vectors of the mode set span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimensionality {
    One,
    Three,
}

impl Dimensionality {
    pub fn from_int(n: u32) -> Result<Self> {
        match n {
            1 => Ok(Self::One),
            3 => Ok(Self::Three),
            _ => Err(invalid("dimensionality", format!("must be 1 or 3, got {n}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            Self::One => 1,
            Self::Three => 3,
        }
    }
}

/// One bath oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: Vec3,
    pub omega: f64,
    /// |g_k|², already multiplied by the quadrature weight.
    pub g2: f64,
}

/// Immutable description of the bath: modes plus temperature and velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpectrum {
    pub velocity: f64,
    pub temperature: f64,
    /// Qubit splitting ω₀. It drops out of the interaction-picture dynamics
    /// and is kept only as metadata.
    pub qubit_splitting: f64,
    pub dimensionality: Dimensionality,
    modes: Vec<Mode>,
}

impl BathSpectrum {
    /// Discretizes `form` on `mode_count` modes up to `omega_max`.
    pub fn discretized(
        form: CouplingForm,
        velocity: f64,
        temperature: f64,
        dimensionality: Dimensionality,
        mode_count: usize,
        omega_max: f64,
    ) -> Result<Self> {
        check_velocity(velocity)?;
        check_temperature(temperature)?;
        let modes = discretize_spectrum(&form, velocity, dimensionality, mode_count, omega_max)?;
        Ok(Self {
            velocity,
            temperature,
            qubit_splitting: 0.0,
            dimensionality,
            modes,
        })
    }

    /// Builds a bath from explicit modes. Every mode must satisfy
    /// `ω = v|k| > 0` and `g2 >= 0`.
    pub fn from_modes(velocity: f64, temperature: f64, modes: Vec<Mode>) -> Result<Self> {
        check_velocity(velocity)?;
        check_temperature(temperature)?;
        let mut one_d = true;
        for (idx, m) in modes.iter().enumerate() {
            if !(m.omega > 0.0 && m.omega.is_finite()) {
                return Err(invalid("modes", format!("mode {idx} has omega {} <= 0", m.omega)));
            }
            let expected = velocity * norm(&m.k);
            if (expected - m.omega).abs() > 1e-9 * m.omega {
                return Err(invalid(
                    "modes",
                    format!("mode {idx} violates omega = v|k| ({} vs {expected})", m.omega),
                ));
            }
            if !(m.g2 >= 0.0 && m.g2.is_finite()) {
                return Err(invalid("modes", format!("mode {idx} has negative coupling")));
            }
            one_d &= m.k[1] == 0.0 && m.k[2] == 0.0;
        }
        Ok(Self {
            velocity,
            temperature,
            qubit_splitting: 0.0,
            dimensionality: if one_d {
                Dimensionality::One
            } else {
                Dimensionality::Three
            },
            modes,
        })
    }

    /// A single mode with wave vector `k`; `ω = v|k|`.
    pub fn single_mode(k: Vec3, g2: f64, velocity: f64, temperature: f64) -> Result<Self> {
        let omega = velocity * norm(&k);
        Self::from_modes(velocity, temperature, vec![Mode { k, omega, g2 }])
    }

    pub fn with_qubit_splitting(mut self, omega0: f64) -> Self {
        self.qubit_splitting = omega0;
        self
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// `coth(ω/2T)` for every mode.
    pub fn coth_factors(&self) -> Vec<f64> {
        self.modes
            .iter()
            .map(|m| coth_factor(m.omega, self.temperature))
            .collect()
    }
}

fn check_velocity(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid("bath.v", format!("velocity must be > 0, got {v}")))
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("bath.T", format!("temperature must be >= 0, got {t}")))
    }
}

/// Bose-Einstein occupation `1/(e^{ω/T} - 1)`; zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("frequency must be > 0, got {omega}")));
    }
    check_temperature(temperature)?;
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// `coth(ω/2T) = 1 + 2⟨N⟩`, exactly 1 at `T = 0`.
pub fn coth_factor(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        1.0 / (0.5 * omega / temperature).tanh()
    }
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Uniform right-endpoint grid `ω_n = n·ω_max/M`, `n = 1..=M`, each mode
/// carrying `|g(ω_n)|²·Δω`. In 1-D the wave vector sign alternates along the
/// grid; in 3-D mode `n` takes the `n`-th point of a Fibonacci sphere.
pub fn discretize_spectrum(
    form: &CouplingForm,
    velocity: f64,
    dimensionality: Dimensionality,
    mode_count: usize,
    omega_max: f64,
) -> Result<Vec<Mode>> {
    form.validate()?;
    check_velocity(velocity)?;
    if mode_count == 0 {
        return Err(invalid("grid.modes", "need at least one mode"));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(invalid("grid.omega_max", format!("must be > 0, got {omega_max}")));
    }
    let step = omega_max / mode_count as f64;
    Ok((0..mode_count)
        .map(|idx| {
            let omega = (idx + 1) as f64 * step;
            let kmag = omega / velocity;
            let dir = match dimensionality {
                Dimensionality::One => {
                    let s = if idx % 2 == 0 { 1.0 } else { -1.0 };
                    [s, 0.0, 0.0]
                }
                Dimensionality::Three => fibonacci_direction(idx, mode_count),
            };
            Mode {
                k: [kmag * dir[0], kmag * dir[1], kmag * dir[2]],
                omega,
                g2: form.strength(omega) * step,
            }
        })
        .collect())
}

fn fibonacci_direction(idx: usize, count: usize) -> Vec3 {
    let z = 1.0 - (2 * idx + 1) as f64 / count as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = idx as f64 * GOLDEN_ANGLE;
    [r * phi.cos(), r * phi.sin(), z]
}

/// Mode weight family used for the regime moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightKind {
    /// Damping weight, `|g|² coth(ω/2T)/ω²`.
    Damping,
    /// Phase-shift weight, `|g|²/ω²`.
    Phase,
}

/// Normalized weights (summing to 1) over the bath modes.
pub fn normalized_weights(bath: &BathSpectrum, kind: WeightKind) -> Result<Vec<f64>> {
    let raw: Vec<f64> = bath
        .modes()
        .iter()
        .map(|m| {
            let base = m.g2 / (m.omega * m.omega);
            match kind {
                WeightKind::Damping => base * coth_factor(m.omega, bath.temperature),
                WeightKind::Phase => base,
            }
        })
        .collect();
    let total = pairwise_sum(&raw);
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateWeight);
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Means and standard deviations of ω under the damping (h₁) and
/// phase-shift (h₂) weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMoments {
    pub mean1: f64,
    pub width1: f64,
    pub mean2: f64,
    pub width2: f64,
}

impl SpectralMoments {
    pub fn max_width(&self) -> f64 {
        self.width1.max(self.width2)
    }
}

/// The time-dependent factor `1 - cos ωt` is left out: the moments describe
/// the time-independent envelope of each weight.
pub fn spectral_moments(bath: &BathSpectrum) -> Result<SpectralMoments> {
    if bath.modes().is_empty() {
        return Err(invalid("bath", "no modes"));
    }
    let (mean1, width1) = weighted_moments(bath, WeightKind::Damping)?;
    let (mean2, width2) = weighted_moments(bath, WeightKind::Phase)?;
    Ok(SpectralMoments {
        mean1,
        width1,
        mean2,
        width2,
    })
}

fn weighted_moments(bath: &BathSpectrum, kind: WeightKind) -> Result<(f64, f64)> {
    let h = normalized_weights(bath, kind)?;
    let first: Vec<f64> = h.iter().zip(bath.modes()).map(|(w, m)| w * m.omega).collect();
    let mean = pairwise_sum(&first);
    let second: Vec<f64> = h
        .iter()
        .zip(bath.modes())
        .map(|(w, m)| w * (m.omega - mean) * (m.omega - mean))
        .collect();
    Ok((mean, pairwise_sum(&second).max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn occupation_examples() {
        assert_eq!(thermal_occupation(1.0, 0.0).unwrap(), 0.0);
        let t = 0.8;
        assert_relative_eq!(thermal_occupation(t * 2f64.ln(), t).unwrap(), 1.0, epsilon = 1e-12);
        // 1/(e^{0.01} - 1) = 1/x - 1/2 + x/12 - ... = 99.50083333194...
        assert_relative_eq!(
            thermal_occupation(1.0, 100.0).unwrap(),
            99.500_833_331_944_4,
            max_relative = 1e-9
        );
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
        assert!(thermal_occupation(1.0, -1.0).is_err());
    }

    #[test]
    fn occupation_monotonicity() {
        let temps = [0.1, 0.5, 1.0, 3.0, 10.0];
        for w in temps.windows(2) {
            assert!(thermal_occupation(1.0, w[0]).unwrap() < thermal_occupation(1.0, w[1]).unwrap());
            assert!(thermal_occupation(w[0], 1.0).unwrap() > thermal_occupation(w[1], 1.0).unwrap());
        }
    }

    #[test]
    fn coth_is_one_plus_twice_occupation() {
        for (w, t) in [(1.0, 0.3), (0.2, 5.0), (4.0, 1.0)] {
            let n = thermal_occupation(w, t).unwrap();
            assert_relative_eq!(coth_factor(w, t), 1.0 + 2.0 * n, max_relative = 1e-12);
        }
        assert_eq!(coth_factor(3.0, 0.0), 1.0);
    }

    #[test]
    fn degenerate_grid() {
        let modes = discretize_spectrum(&CouplingForm::ohmic(1.0, 1.0), 1.0, Dimensionality::One, 1, 2.0).unwrap();
        assert_eq!(modes.len(), 1);
        assert_eq!(modes[0].omega, 2.0);
    }

    #[test]
    fn grid_invariants() {
        for dim in [Dimensionality::One, Dimensionality::Three] {
            let modes = discretize_spectrum(&CouplingForm::ohmic(0.5, 2.0), 1.5, dim, 257, 10.0).unwrap();
            assert_eq!(modes.len(), 257);
            for m in &modes {
                assert!(m.omega > 0.0);
                assert!(m.g2 >= 0.0);
                assert_relative_eq!(1.5 * norm(&m.k), m.omega, max_relative = 1e-12);
            }
            if dim == Dimensionality::One {
                let plus = modes.iter().filter(|m| m.k[0] > 0.0).count();
                assert_eq!(plus, 129);
            }
        }
    }

    #[test]
    fn ohmic_vanishes_at_zero_frequency() {
        let f = CouplingForm::ohmic(1.0, 1.0);
        assert!(f.strength(1e-9) < 1e-8);
        assert!(f.strength(1e-6) < f.strength(1e-3));
    }

    fn damping_sum(m: usize, t: f64) -> f64 {
        let modes = discretize_spectrum(&CouplingForm::ohmic(1.0, 1.0), 1.0, Dimensionality::One, m, 40.0).unwrap();
        let terms: Vec<f64> = modes
            .iter()
            .map(|m| m.g2 * (1.0 - (m.omega * t).cos()) / (m.omega * m.omega))
            .collect();
        pairwise_sum(&terms)
    }

    #[test]
    fn ohmic_grid_refinement_converges() {
        for t in [0.5, 2.0, 5.0] {
            let a = damping_sum(10_000, t);
            let b = damping_sum(20_000, t);
            assert!(((a - b) / b).abs() < 1e-3, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn moments_of_point_and_two_point_masses() {
        let b = BathSpectrum::single_mode([3.0, 0.0, 0.0], 0.2, 1.0, 0.0).unwrap();
        let m = spectral_moments(&b).unwrap();
        assert_relative_eq!(m.mean1, 3.0);
        assert_relative_eq!(m.mean2, 3.0);
        assert_eq!(m.width1, 0.0);
        assert_eq!(m.width2, 0.0);

        // equal h-weights: g2/ω² equal => g2 = c·ω²
        let modes = vec![
            Mode {
                k: [1.0, 0.0, 0.0],
                omega: 1.0,
                g2: 0.1,
            },
            Mode {
                k: [0.0, 3.0, 0.0],
                omega: 3.0,
                g2: 0.9,
            },
        ];
        let b = BathSpectrum::from_modes(1.0, 0.0, modes).unwrap();
        let m = spectral_moments(&b).unwrap();
        assert_relative_eq!(m.mean2, 2.0, epsilon = 1e-12);
        assert_relative_eq!(m.width2, 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.mean1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_weight_is_rejected() {
        let b = BathSpectrum::single_mode([1.0, 0.0, 0.0], 0.0, 1.0, 0.0).unwrap();
        assert_eq!(spectral_moments(&b), Err(Error::DegenerateWeight));
    }

    #[test]
    fn weights_are_normalized() {
        let b = BathSpectrum::discretized(CouplingForm::ohmic(1.0, 1.0), 1.0, 0.7, Dimensionality::Three, 300, 8.0)
            .unwrap();
        for kind in [WeightKind::Damping, WeightKind::Phase] {
            let h = normalized_weights(&b, kind).unwrap();
            assert!(h.iter().all(|&w| w >= 0.0));
            assert_relative_eq!(pairwise_sum(&h), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ohmic_phase_moments_match_quadrature() {
        // h₂ ∝ |g|²/ω² = e^{-ω}/ω, which is log-divergent at ω → 0, so the
        // comparison uses an infrared window [0.1, 30]. Independent oracle:
        // composite Simpson in u = ln ω over the midpoint cells of the grid.
        let step: f64 = 1e-3;
        let (w_lo, w_hi): (f64, f64) = (0.1, 30.0);
        let simpson = |f: &dyn Fn(f64) -> f64| {
            let n = 20_000;
            let (a, b) = ((w_lo - 0.5 * step).ln(), (w_hi + 0.5 * step).ln());
            let h = (b - a) / n as f64;
            let g = |u: f64| f(u.exp()) * u.exp();
            let mut s = g(a) + g(b);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(a + i as f64 * h);
            }
            s * h / 3.0
        };
        let z = simpson(&|w| (-w).exp() / w);
        let m1 = simpson(&|w| (-w).exp()) / z;
        let m2 = simpson(&|w| w * (-w).exp()) / z;
        let sd = (m2 - m1 * m1).sqrt();

        let count = (w_hi / step).round() as usize;
        let bath = BathSpectrum::discretized(
            CouplingForm::ohmic(1.0, 1.0),
            1.0,
            0.0,
            Dimensionality::One,
            count,
            w_hi,
        )
        .unwrap();
        let modes: Vec<Mode> = bath
            .modes()
            .iter()
            .copied()
            .filter(|m| m.omega >= w_lo - 1e-9)
            .collect();
        let bath = BathSpectrum::from_modes(1.0, 0.0, modes).unwrap();
        let m = spectral_moments(&bath).unwrap();
        assert!(((m.mean2 - m1) / m1).abs() < 0.01, "{} vs {m1}", m.mean2);
        assert!(((m.width2 - sd) / sd).abs() < 0.01, "{} vs {sd}", m.width2);
        // at T = 0 the damping weight coincides with the phase weight
        assert_relative_eq!(m.mean1, m.mean2, max_relative = 1e-12);
    }
}
