//! Brute-force reference dynamics in a truncated Fock space.
//!
//! The interaction Hamiltonian
//! `H_I(t) = Σ_k (G_k a_k e^{-iω_k t} + G_k* a_k† e^{iω_k t})`,
//! `G_k = Σ_l g_k e^{-ik·r_l} σᶻ_l`, is diagonal in the register basis, so
//! each register basis component carries its own bath state, and for a
//! product initial bath state that bath state stays a product over modes.
//! The oracle integrates `H_I` step by step for every (label, mode) block
//! and never uses the closed-form damping/phase factors. A separate
//! closed-form propagator (displacement times `e^{if(t)}`) is provided for
//! cross-checking.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{thermal_occupation, BathSpectrum, Mode};
use crate::dephasing::{BasisLabel, ReducedDensity, RegisterState};
use crate::error::{invalid, Error, Result};
use crate::geometry::{dot, Vec3};
use crate::numeric::{derive_seed, mean_and_stderr};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

/// Largest tolerated population of the top Fock level of any mode.
pub const LEAKAGE_LIMIT: f64 = 1e-6;
/// Largest tolerated drift of the joint-state norm.
pub const NORM_LIMIT: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One register basis component and its per-mode bath vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub label: BasisLabel,
    pub amplitude: Complex64,
    pub modes: Vec<CVector>,
}

impl Component {
    fn norm_sqr(&self) -> f64 {
        self.amplitude.norm_sqr() * self.modes.iter().map(|v| v.norm_squared()).product::<f64>()
    }
}

/// Register ⊗ bath state, `Σ_i c_i |i⟩ ⊗ Π_k |ψ_ik⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub components: Vec<Component>,
}

impl JointState {
    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(Component::norm_sqr).sum()
    }

    /// Largest top-level population (relative to the mode vector norm) over
    /// all components and modes, with the offending mode index.
    pub fn leakage(&self) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for c in &self.components {
            for (k, v) in c.modes.iter().enumerate() {
                let top = v[v.len() - 1].norm_sqr() / v.norm_squared();
                if top > worst.1 {
                    worst = (k, top);
                }
            }
        }
        worst
    }

    fn check(&self) -> Result<()> {
        let (mode, leakage) = self.leakage();
        if leakage > LEAKAGE_LIMIT {
            return Err(Error::TruncationLeakage { mode, leakage });
        }
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_LIMIT {
            return Err(Error::NormDrift(n));
        }
        Ok(())
    }

    /// Largest deviation between the two joint states, component by
    /// component. Single-mode components are compared amplitude-wise;
    /// with several modes the tensor 2-norm of the difference is used,
    /// which bounds every amplitude deviation.
    pub fn max_amplitude_deviation(&self, other: &JointState) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.components {
            let Some(b) = other.components.iter().find(|c| c.label == a.label) else {
                worst = worst.max(a.norm_sqr().sqrt());
                continue;
            };
            let dev = if a.modes.len() == 1 {
                (&a.modes[0] * a.amplitude - &b.modes[0] * b.amplitude).camax()
            } else {
                let overlap: Complex64 = a.amplitude.conj()
                    * b.amplitude
                    * a.modes
                        .iter()
                        .zip(&b.modes)
                        .map(|(x, y)| x.dotc(y))
                        .product::<Complex64>();
                (a.norm_sqr() + b.norm_sqr() - 2.0 * overlap.re).max(0.0).sqrt()
            };
            worst = worst.max(dev);
        }
        worst
    }
}

/// Truncated coherent state `e^{-|α|²/2} Σ_n αⁿ/√n! |n⟩`.
pub fn coherent_vector(alpha: Complex64, dim: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        v[n] = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    v
}

/// Eigendecomposition of the truncated quadrature `a + a†`.
#[derive(Debug, Clone)]
struct Quadrature {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

impl Quadrature {
    fn new(dim: usize) -> Self {
        let mut x = DMatrix::<f64>::zeros(dim, dim);
        for n in 0..dim.saturating_sub(1) {
            let s = ((n + 1) as f64).sqrt();
            x[(n, n + 1)] = s;
            x[(n + 1, n)] = s;
        }
        let eig = SymmetricEigen::new(x);
        Self {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        }
    }

    fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-iτ(z a + z* a†))`. With `z = |z|e^{iθ}` and `R = diag(e^{-inθ})`
    /// the generator is `|z| R (a + a†) R†`.
    fn coupling_exp(&self, z: Complex64, tau: f64) -> CMatrix {
        let dim = self.dim();
        let (r, theta) = z.to_polar();
        let phases: Vec<Complex64> = (0..self.values.len())
            .map(|e| Complex64::from_polar(1.0, -tau * r * self.values[e]))
            .collect();
        let rot: Vec<Complex64> = (0..dim)
            .map(|n| Complex64::from_polar(1.0, -(n as f64) * theta))
            .collect();
        CMatrix::from_fn(dim, dim, |m, n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (e, p) in phases.iter().enumerate() {
                acc += p * (self.vectors[(m, e)] * self.vectors[(n, e)]);
            }
            rot[m] * acc * rot[n].conj()
        })
    }
}

fn diag_scale_rows(d: &[Complex64], m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| d[r] * m[(r, c)])
}

fn diag_scale_cols(m: &CMatrix, d: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * d[c])
}

fn matrix_power(base: &CMatrix, mut exp: usize) -> CMatrix {
    let mut result = CMatrix::identity(base.nrows(), base.ncols());
    let mut sq = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = &result * &sq;
        }
        exp >>= 1;
        if exp > 0 {
            sq = &sq * &sq;
        }
    }
    result
}

/// Whether the closed-form propagator includes the `e^{if(t)}` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseFactor {
    Include,
    Omit,
}

/// Reference simulator for a bath and a set of qubit positions.
#[derive(Debug, Clone)]
pub struct Oracle {
    positions: Vec<Vec3>,
    modes: Vec<Mode>,
    temperature: f64,
    quadratures: Vec<Quadrature>,
}

impl Oracle {
    /// Uses per-mode truncation `dims[k]`.
    pub fn with_truncation(bath: &BathSpectrum, positions: &[Vec3], dims: &[usize]) -> Result<Self> {
        if dims.len() != bath.modes().len() {
            return Err(Error::LengthMismatch {
                expected: bath.modes().len(),
                actual: dims.len(),
            });
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(invalid("truncation", "every mode needs at least 2 levels"));
        }
        Ok(Self {
            positions: positions.to_vec(),
            modes: bath.modes().to_vec(),
            temperature: bath.temperature,
            quadratures: dims.iter().map(|&d| Quadrature::new(d)).collect(),
        })
    }

    /// Truncation from thermal occupation plus displacement headroom, for
    /// the given labels and any time.
    pub fn new(bath: &BathSpectrum, positions: &[Vec3], labels: &[BasisLabel]) -> Result<Self> {
        let dims = default_truncation(bath, positions, labels)?;
        Self::with_truncation(bath, positions, &dims)
    }

    pub fn truncation(&self) -> Vec<usize> {
        self.quadratures.iter().map(Quadrature::dim).collect()
    }

    /// `G_k(i) = √g2 Σ_l i_l e^{-ik·r_l}`.
    pub fn coupling(&self, label: &BasisLabel, mode: usize) -> Result<Complex64> {
        coupling(&self.modes[mode], label, &self.positions)
    }

    /// `Π_k |α_k⟩` attached to every component of `state`.
    pub fn coherent_joint(&self, state: &RegisterState, alphas: &[Complex64]) -> Result<JointState> {
        if alphas.len() != self.modes.len() {
            return Err(Error::LengthMismatch {
                expected: self.modes.len(),
                actual: alphas.len(),
            });
        }
        if state.qubits() != self.positions.len() {
            return Err(Error::LengthMismatch {
                expected: self.positions.len(),
                actual: state.qubits(),
            });
        }
        let modes: Vec<CVector> = alphas
            .iter()
            .zip(&self.quadratures)
            .map(|(&a, q)| coherent_vector(a, q.dim()))
            .collect();
        Ok(JointState {
            components: state
                .iter()
                .map(|(l, c)| Component {
                    label: l.clone(),
                    amplitude: *c,
                    modes: modes.clone(),
                })
                .collect(),
        })
    }

    pub fn vacuum_joint(&self, state: &RegisterState) -> Result<JointState> {
        self.coherent_joint(state, &vec![Complex64::default(); self.modes.len()])
    }

    /// Interaction-picture propagator of one (label, mode) block from 0 to
    /// `t` by the exponential midpoint rule with `steps` steps:
    /// `U = Π_m exp(-i dt H_I(t_m))`, `t_m = (m + ½)dt`. Since
    /// `H_I(t) = R(t)(G a + G* a†)R(t)†` with `R(t) = e^{iωnt}`, each factor
    /// is `R_m M R_m†` for one fixed `M`, and consecutive `R_m† R_{m-1}`
    /// collapse to `D = e^{-iωn dt}`:
    /// `U = R_{N-1} M (D M)^{N-1} R_0†`. The power is taken by repeated
    /// squaring, which is the same product of step operators.
    pub fn trotter_propagator(&self, label: &BasisLabel, mode: usize, t: f64, steps: usize) -> Result<CMatrix> {
        if steps == 0 {
            return Err(invalid("steps", "need at least one step"));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid("t", "time must be >= 0"));
        }
        let q = &self.quadratures[mode];
        let dim = q.dim();
        let g = self.coupling(label, mode)?;
        let omega = self.modes[mode].omega;
        let dt = t / steps as f64;
        let step = q.coupling_exp(g, dt);
        let rot = |time: f64| -> Vec<Complex64> {
            (0..dim)
                .map(|n| Complex64::from_polar(1.0, omega * n as f64 * time))
                .collect()
        };
        let drift: Vec<Complex64> = rot(-dt);
        let dm = diag_scale_rows(&drift, &step);
        let body = &step * matrix_power(&dm, steps - 1);
        let first: Vec<Complex64> = rot(0.5 * dt).into_iter().map(|z| z.conj()).collect();
        let last = rot((steps as f64 - 0.5) * dt);
        Ok(diag_scale_cols(&diag_scale_rows(&last, &body), &first))
    }

    /// Propagators for every (label, mode) block, indexed `[label][mode]`.
    pub fn trotter_propagators(&self, labels: &[BasisLabel], t: f64, steps: usize) -> Result<Vec<Vec<CMatrix>>> {
        labels
            .par_iter()
            .map(|l| {
                (0..self.modes.len())
                    .map(|k| self.trotter_propagator(l, k, t, steps))
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    }

    /// Integrates the joint state from 0 to `t`.
    pub fn trotter_evolve(&self, initial: &JointState, t: f64, steps: usize) -> Result<JointState> {
        initial.check()?;
        let labels: Vec<BasisLabel> = initial.components.iter().map(|c| c.label.clone()).collect();
        let props = self.trotter_propagators(&labels, t, steps)?;
        let out = JointState {
            components: initial
                .components
                .iter()
                .zip(&props)
                .map(|(c, u)| Component {
                    label: c.label.clone(),
                    amplitude: c.amplitude,
                    modes: c.modes.iter().zip(u).map(|(v, m)| m * v).collect(),
                })
                .collect(),
        };
        out.check()?;
        Ok(out)
    }

    /// `ξ_k(i, t) = G_k(i)(1 - e^{-iω_k t})/ω_k`.
    pub fn xi(&self, label: &BasisLabel, mode: usize, t: f64) -> Result<Complex64> {
        let omega = self.modes[mode].omega;
        Ok(self.coupling(label, mode)? * (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -omega * t)) / omega)
    }

    /// `f_i(t) = Σ_k (ω_k t - sin ω_k t)/ω_k² · |G_k(i)|²`.
    pub fn f_phase(&self, label: &BasisLabel, t: f64) -> Result<f64> {
        let mut f = 0.0;
        for (k, m) in self.modes.iter().enumerate() {
            let x = m.omega * t;
            f += (x - x.sin()) / (m.omega * m.omega) * self.coupling(label, k)?.norm_sqr();
        }
        Ok(f)
    }

    /// Applies `exp{Σ_k (ξ_k* a_k† - ξ_k a_k)} e^{if(t)}` to each component
    /// exactly in the truncated space.
    pub fn closed_form_unitary_apply(&self, initial: &JointState, t: f64, phase: PhaseFactor) -> Result<JointState> {
        initial.check()?;
        let components = initial
            .components
            .iter()
            .map(|c| {
                let mut modes = Vec::with_capacity(c.modes.len());
                for (k, v) in c.modes.iter().enumerate() {
                    let xi = self.xi(&c.label, k, t)?;
                    // ξ* a† - ξ a = -i(z a + z* a†) with z = -iξ
                    let d = self.quadratures[k].coupling_exp(-I * xi, 1.0);
                    modes.push(d * v);
                }
                let amplitude = match phase {
                    PhaseFactor::Include => c.amplitude * Complex64::from_polar(1.0, self.f_phase(&c.label, t)?),
                    PhaseFactor::Omit => c.amplitude,
                };
                Ok(Component {
                    label: c.label.clone(),
                    amplitude,
                    modes,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let out = JointState { components };
        out.check()?;
        Ok(out)
    }

    /// Traces out the bath: `ρ_ij = c_i c_j* Π_k ⟨ψ_jk|ψ_ik⟩`.
    pub fn reduced_density(&self, joint: &JointState) -> ReducedDensity {
        let n = joint.components.len();
        let mut entries = Vec::with_capacity(n * n);
        for a in &joint.components {
            for b in &joint.components {
                let overlap: Complex64 = a.modes.iter().zip(&b.modes).map(|(x, y)| y.dotc(x)).product();
                entries.push(a.amplitude * b.amplitude.conj() * overlap);
            }
        }
        let labels = joint.components.iter().map(|c| c.label.clone()).collect();
        ReducedDensity::from_parts(labels, entries).expect("square by construction")
    }

    /// Thermal average over coherent-state samples `α_k` drawn from the
    /// complex Gaussian with `⟨|α_k|²⟩ = ⟨N_k⟩`. At `T = 0` a single vacuum
    /// sample is exact.
    pub fn thermal_reduced_density(
        &self,
        state: &RegisterState,
        t: f64,
        samples: usize,
        seed: u64,
        steps: usize,
    ) -> Result<ThermalEstimate> {
        let labels: Vec<BasisLabel> = state.labels().cloned().collect();
        let props = self.trotter_propagators(&labels, t, steps)?;
        let amps: Vec<Complex64> = labels.iter().map(|l| state.amplitude(l)).collect();
        let occupations: Vec<f64> = self
            .modes
            .iter()
            .map(|m| thermal_occupation(m.omega, self.temperature))
            .collect::<Result<_>>()?;
        let samples = if self.temperature == 0.0 { 1 } else { samples.max(2) };
        let n = labels.len();
        let per_sample: Vec<Vec<Complex64>> = (0..samples as u64)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, s));
                let mut vecs: Vec<Vec<CVector>> = vec![Vec::with_capacity(self.modes.len()); n];
                for (k, q) in self.quadratures.iter().enumerate() {
                    let alpha = if occupations[k] > 0.0 {
                        let normal = Normal::new(0.0, (0.5 * occupations[k]).sqrt()).expect("finite sigma");
                        Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
                    } else {
                        Complex64::default()
                    };
                    let v0 = coherent_vector(alpha, q.dim());
                    for (a, row) in vecs.iter_mut().enumerate() {
                        let v = &props[a][k] * &v0;
                        let top = v[v.len() - 1].norm_sqr() / v.norm_squared();
                        if top > LEAKAGE_LIMIT {
                            return Err(Error::TruncationLeakage { mode: k, leakage: top });
                        }
                        row.push(v);
                    }
                }
                let mut out = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        let overlap: Complex64 = vecs[a].iter().zip(&vecs[b]).map(|(x, y)| y.dotc(x)).product();
                        out.push(amps[a] * amps[b].conj() * overlap);
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut entries = Vec::with_capacity(n * n);
        let mut stderr = Vec::with_capacity(n * n);
        for e in 0..n * n {
            let re: Vec<f64> = per_sample.iter().map(|s| s[e].re).collect();
            let im: Vec<f64> = per_sample.iter().map(|s| s[e].im).collect();
            let (mr, sr) = mean_and_stderr(&re);
            let (mi, si) = mean_and_stderr(&im);
            entries.push(Complex64::new(mr, mi));
            stderr.push(if samples > 1 { (sr, si) } else { (0.0, 0.0) });
        }
        Ok(ThermalEstimate {
            density: ReducedDensity::from_parts(labels, entries)?,
            stderr,
            samples,
        })
    }
}

/// Monte Carlo reduced density with per-entry standard errors of the real
/// and imaginary parts (row-major, like the density).
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEstimate {
    pub density: ReducedDensity,
    pub stderr: Vec<(f64, f64)>,
    pub samples: usize,
}

impl ThermalEstimate {
    /// Largest deviation from `reference` in units of the standard error,
    /// taken over real and imaginary parts of every entry; entries with a
    /// vanishing standard error are compared against `floor` instead.
    pub fn max_z_score(&self, reference: &ReducedDensity, floor: f64) -> f64 {
        let labels = self.density.labels();
        let n = labels.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let diff = self.density.at(a, b) - reference.entry(&labels[a], &labels[b]);
                let (sr, si) = self.stderr[a * n + b];
                for (d, s) in [(diff.re.abs(), sr), (diff.im.abs(), si)] {
                    let z = if s > 0.0 {
                        d / s
                    } else if d <= floor {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    worst = worst.max(z);
                }
            }
        }
        worst
    }
}

impl ThermalEstimate {
    /// Largest `|Δρ_ab| / √(σ_re² + σ_im²)` over off-diagonal entries;
    /// diagonal entries carry no sampling noise and are skipped.
    pub fn max_complex_z(&self, reference: &ReducedDensity) -> f64 {
        let labels = self.density.labels();
        let n = labels.len();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let diff = (self.density.at(a, b) - reference.entry(&labels[a], &labels[b])).norm();
                let (sr, si) = self.stderr[a * n + b];
                let s = sr.hypot(si);
                let z = if s > 0.0 {
                    diff / s
                } else if diff == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
            }
        }
        worst
    }
}

fn coupling(mode: &Mode, label: &BasisLabel, positions: &[Vec3]) -> Result<Complex64> {
    if label.len() != positions.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            actual: label.len(),
        });
    }
    let s: Complex64 = label
        .spins()
        .iter()
        .zip(positions)
        .map(|(&s, r)| Complex64::from_polar(f64::from(s), -dot(&mode.k, r)))
        .sum();
    Ok(s * mode.g2.sqrt())
}

/// `N_max = ⌈μ + 6√(μ+1) + 10⌉` with
/// `μ = (√(⟨N⟩ + 6√(⟨N⟩+1)) + |ξ|_max)²`, `|ξ|_max = 2 max_i |G(i)|/ω`.
pub fn default_truncation(bath: &BathSpectrum, positions: &[Vec3], labels: &[BasisLabel]) -> Result<Vec<usize>> {
    bath.modes()
        .iter()
        .map(|m| {
            let occ = thermal_occupation(m.omega, bath.temperature)?;
            let mut gmax = 0.0f64;
            for l in labels {
                gmax = gmax.max(coupling(m, l, positions)?.norm());
            }
            let xi = 2.0 * gmax / m.omega;
            let thermal = occ + 6.0 * (occ + 1.0).sqrt();
            let mu = (thermal.sqrt() + xi).powi(2);
            Ok((mu + 6.0 * (mu + 1.0).sqrt() + 10.0).ceil() as usize)
        })
        .collect()
}

/// Default number of midpoint steps per propagator.
pub const DEFAULT_STEPS: usize = 1 << 16;
/// Absolute tolerance on reduced-density entries at `T = 0`.
pub const ZERO_T_TOLERANCE: f64 = 1e-4;
/// Largest accepted deviation in complex standard errors at `T > 0`.
pub const THERMAL_Z_LIMIT: f64 = 3.0;

/// One small register + bath configuration with a random superposition.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub positions: Vec<Vec3>,
    pub bath: BathSpectrum,
    pub state: RegisterState,
    pub t: f64,
}

impl Instance {
    /// Random instance: `qubits` sites spaced ~1 along x with jitter, `modes`
    /// modes with `|k| ∈ [0.5, 2]` in random directions, `v = 1`,
    /// `g² ∈ [0.005, 0.05]`, `t ∈ [0.5, 6]` and a random superposition over
    /// all basis labels.
    pub fn random(name: impl Into<String>, qubits: usize, modes: usize, temperature: f64, seed: u64) -> Result<Self> {
        use rand::Rng;
        if qubits == 0 || modes == 0 {
            return Err(invalid("instance", "need at least one qubit and one mode"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions: Vec<Vec3> = (0..qubits)
            .map(|l| {
                [
                    l as f64 + rng.gen_range(-0.3..0.3),
                    rng.gen_range(-0.3..0.3),
                    rng.gen_range(-0.3..0.3),
                ]
            })
            .collect();
        let gauss = Normal::new(0.0, 1.0).expect("unit normal");
        let bath_modes = (0..modes)
            .map(|_| {
                let dir: Vec3 = [gauss.sample(&mut rng), gauss.sample(&mut rng), gauss.sample(&mut rng)];
                let n = crate::geometry::norm(&dir).max(1e-12);
                let kmag = rng.gen_range(0.5..2.0);
                Mode {
                    k: [dir[0] / n * kmag, dir[1] / n * kmag, dir[2] / n * kmag],
                    omega: kmag,
                    g2: rng.gen_range(0.005..0.05),
                }
            })
            .collect();
        let bath = BathSpectrum::from_modes(1.0, temperature, bath_modes)?;
        let state = RegisterState::normalized(
            BasisLabel::all(qubits)
                .map(|l| (l, Complex64::new(gauss.sample(&mut rng), gauss.sample(&mut rng))))
                .collect::<Vec<_>>(),
        )?;
        let t = rng.gen_range(0.5..6.0);
        Ok(Self {
            name: name.into(),
            positions,
            bath,
            state,
            t,
        })
    }
}

/// Outcome of comparing the closed-form reduced density with the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub name: String,
    pub qubits: usize,
    pub modes: usize,
    pub temperature: f64,
    pub t: f64,
    pub truncation: usize,
    pub samples: usize,
    /// Largest absolute entry deviation.
    pub max_deviation: f64,
    /// Largest deviation in complex standard errors (0 at `T = 0`).
    pub max_z: f64,
    pub passed: bool,
}

/// Runs one instance. At `T = 0` the check is absolute; at `T > 0` every
/// entry must lie within [`THERMAL_Z_LIMIT`] complex standard errors,
/// where the standard error of a complex mean is `√(σ_re² + σ_im²)`.
pub fn run_instance(instance: &Instance, samples: usize, seed: u64, steps: usize) -> Result<InstanceReport> {
    let labels: Vec<BasisLabel> = instance.state.labels().cloned().collect();
    let oracle = Oracle::new(&instance.bath, &instance.positions, &labels)?;
    let est = oracle.thermal_reduced_density(&instance.state, instance.t, samples, seed, steps)?;
    let reference = crate::dephasing::evolve(&instance.state, instance.t, &instance.bath, &instance.positions)?;
    let max_deviation = est.density.max_deviation(&reference);
    let thermal = instance.bath.temperature > 0.0;
    let max_z = if thermal { est.max_complex_z(&reference) } else { 0.0 };
    let passed = if thermal {
        max_z <= THERMAL_Z_LIMIT
    } else {
        max_deviation <= ZERO_T_TOLERANCE
    };
    Ok(InstanceReport {
        name: instance.name.clone(),
        qubits: instance.positions.len(),
        modes: instance.bath.modes().len(),
        temperature: instance.bath.temperature,
        t: instance.t,
        truncation: oracle.truncation().into_iter().max().unwrap_or(0),
        samples: est.samples,
        max_deviation,
        max_z,
        passed,
    })
}

/// The named default suite: 21 zero-temperature instances cycling through
/// 1–3 qubits and 1–4 modes, plus 5 thermal 2-qubit, 3-mode instances.
pub fn default_suite(seed: u64) -> Result<Vec<Instance>> {
    use rand::Rng;
    let mut out = Vec::new();
    for n in 0..21u64 {
        let qubits = 1 + (n % 3) as usize;
        let modes = 1 + (n % 4) as usize;
        out.push(Instance::random(
            format!("zero-t-{n:02}"),
            qubits,
            modes,
            0.0,
            derive_seed(seed, n),
        )?);
    }
    for n in 0..5u64 {
        let s = derive_seed(seed, 1000 + n);
        let temp = ChaCha8Rng::seed_from_u64(s ^ 0x5eed).gen_range(0.3..1.0);
        out.push(Instance::random(format!("thermal-{n:02}"), 2, 3, temp, s)?);
    }
    Ok(out)
}

/// Runs every instance; thermal ones use `samples` coherent-state samples.
pub fn run_suite(instances: &[Instance], samples: usize, seed: u64, steps: usize) -> Result<Vec<InstanceReport>> {
    instances
        .iter()
        .enumerate()
        .map(|(n, inst)| run_instance(inst, samples, derive_seed(seed, n as u64), steps))
        .collect()
}

/// Maximum amplitude deviation between the midpoint integrator and the
/// closed-form propagator, with and without the `e^{if(t)}` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorComparison {
    pub with_phase: f64,
    pub without_phase: f64,
}

pub fn compare_propagators(
    bath: &BathSpectrum,
    positions: &[Vec3],
    initial: &RegisterState,
    alphas: &[Complex64],
    t: f64,
    steps: usize,
) -> Result<PropagatorComparison> {
    let labels: Vec<BasisLabel> = initial.labels().cloned().collect();
    let oracle = Oracle::new(bath, positions, &labels)?;
    let dims = oracle.truncation();
    let extra: Vec<usize> = dims
        .iter()
        .zip(alphas)
        .map(|(d, a)| d + (a.norm_sqr() + 6.0 * a.norm() + 6.0).ceil() as usize)
        .collect();
    let oracle = Oracle::with_truncation(bath, positions, &extra)?;
    let init = oracle.coherent_joint(initial, alphas)?;
    let stepped = oracle.trotter_evolve(&init, t, steps)?;
    let with = oracle.closed_form_unitary_apply(&init, t, PhaseFactor::Include)?;
    let without = oracle.closed_form_unitary_apply(&init, t, PhaseFactor::Omit)?;
    Ok(PropagatorComparison {
        with_phase: stepped.max_amplitude_deviation(&with),
        without_phase: stepped.max_amplitude_deviation(&without),
    })
}
