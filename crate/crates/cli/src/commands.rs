//! Subcommand implementations. Each returns the text printed to stdout;
//! files go through [`Artifacts`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use qreg_dephasing::bath::spectral_moments;
use qreg_dephasing::codes::find_pairing;
use qreg_dephasing::oracle::{default_suite, run_suite};
use qreg_dephasing::regimes::{classify, disorder_average_factors, independent_limit_factors};
use qreg_dephasing::{
    BasisLabel, BathSpectrum, CouplingForm, DephasingModel, Dimensionality, PairingCode, PairingPlan, RegisterGeometry,
    RegisterState,
};

use crate::config::{Code, Form, Preset, RunConfig, Suite};
use crate::error::CliError;
use crate::output::{fmt_num, Artifacts};

/// Normalization tolerance for explicit amplitudes and state files.
pub const STATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Classify,
    Encode,
    Pairing,
    DisorderScan,
    ValidateOracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Classify => "classify",
            Command::Encode => "encode",
            Command::Pairing => "pairing",
            Command::DisorderScan => "disorder-scan",
            Command::ValidateOracle => "validate-oracle",
        }
    }
}

pub fn geometry(cfg: &RunConfig) -> Result<RegisterGeometry, CliError> {
    let g = &cfg.geometry;
    Ok(RegisterGeometry::new(g.dims, g.d, g.delta, g.seed)?)
}

pub fn bath(cfg: &RunConfig) -> Result<BathSpectrum, CliError> {
    let c = &cfg.coupling;
    let v = cfg.bath.v;
    let form = match c.form {
        Form::PowerLaw => CouplingForm::PowerLaw {
            amplitude: c.amplitude,
            exponent: c.exponent,
            cutoff: c.cutoff,
        },
        Form::GaussianPeak => CouplingForm::GaussianPeak {
            amplitude: c.amplitude,
            center: v * c.center,
            width: v * c.width,
        },
    };
    let dim = Dimensionality::from_int(cfg.bath.dimensionality)?;
    Ok(
        BathSpectrum::discretized(form, v, cfg.bath.temperature, dim, cfg.grid.modes, cfg.grid.omega_max)?
            .with_qubit_splitting(cfg.bath.omega0),
    )
}

/// Reads `label re im` lines; `#` starts a comment.
pub fn parse_state_file(text: &str) -> Result<RegisterState, CliError> {
    let mut entries = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| CliError::Semantic {
            key: format!("state file line {}", n + 1),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad("expected '<label> <re> <im>'"));
        }
        let label: BasisLabel = parts[0].parse().map_err(|_| bad("bad basis label"))?;
        let re: f64 = parts[1].parse().map_err(|_| bad("bad real part"))?;
        let im: f64 = parts[2].parse().map_err(|_| bad("bad imaginary part"))?;
        entries.push((label, Complex64::new(re, im)));
    }
    Ok(RegisterState::with_tolerance(entries, STATE_TOLERANCE)?)
}

pub fn format_state(state: &RegisterState, precision: usize) -> String {
    let mut o = String::new();
    for (l, c) in state.iter() {
        let _ = writeln!(o, "{l} {} {}", fmt_num(c.re, precision), fmt_num(c.im, precision));
    }
    o
}

/// The configured register state; `base` resolves a relative state file.
pub fn state(cfg: &RunConfig, default_qubits: usize, base: &Path) -> Result<RegisterState, CliError> {
    let s = &cfg.state;
    let qubits = s.qubits.unwrap_or(default_qubits);
    let state = match s.preset {
        Preset::Cat => RegisterState::cat(qubits),
        Preset::SingleFlip => {
            if s.qubit >= qubits {
                return Err(CliError::Semantic {
                    key: "state.qubit".into(),
                    reason: format!("must be < {qubits}"),
                });
            }
            RegisterState::single_flip(qubits, s.qubit)
        }
        Preset::Explicit => {
            let entries = s
                .amplitudes
                .iter()
                .map(|a| {
                    let l: BasisLabel = a.label.parse()?;
                    Ok((l, Complex64::new(a.re, a.im)))
                })
                .collect::<Result<Vec<_>, qreg_dephasing::Error>>()?;
            RegisterState::with_tolerance(entries, STATE_TOLERANCE)?
        }
        Preset::File => {
            let path = base.join(s.file.as_deref().expect("validated"));
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            parse_state_file(&text)?
        }
    };
    Ok(state)
}

fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    let r = &cfg.run;
    if r.steps == 1 {
        return vec![r.t0];
    }
    let h = (r.t1 - r.t0) / (r.steps - 1) as f64;
    (0..r.steps)
        .map(|n| if n + 1 == r.steps { r.t1 } else { r.t0 + n as f64 * h })
        .collect()
}

fn kbar(cfg: &RunConfig) -> Result<f64, CliError> {
    match (cfg.run.kbar, cfg.coupling.form) {
        (Some(k), _) => Ok(k),
        (None, Form::GaussianPeak) => Ok(cfg.coupling.center),
        (None, Form::PowerLaw) => Err(CliError::Semantic {
            key: "run.kbar".into(),
            reason: "required unless the coupling is a gaussian peak".into(),
        }),
    }
}

fn pairing_plan(cfg: &RunConfig) -> Result<PairingPlan, CliError> {
    Ok(find_pairing(
        kbar(cfg)?,
        cfg.geometry.d,
        cfg.run.m_max,
        cfg.run.eps_tol,
    )?)
}

fn key_values(kv: &[(&str, String)]) -> String {
    kv.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn run(cfg: &RunConfig, command: Command, base: &Path, files: &mut Artifacts) -> Result<String, CliError> {
    let p = cfg.output.precision;
    match command {
        Command::Simulate => {
            let g = geometry(cfg)?;
            let b = bath(cfg)?;
            let st = state(cfg, g.len(), base)?;
            let model = DephasingModel::new(&b, g.positions());
            let mut body = String::from("t,F\n");
            let mut last = 1.0;
            for t in time_grid(cfg) {
                last = model.fidelity(&st, t)?;
                let _ = writeln!(body, "{},{}", fmt_num(t, p), fmt_num(last, p));
            }
            files.write("simulate.csv", &body)?;
            Ok(format!("rows={}\nfinal_F={}\n", cfg.run.steps, fmt_num(last, p)))
        }
        Command::Classify => {
            let g = geometry(cfg)?;
            let b = bath(cfg)?;
            let report = classify(&g, cfg.bath.v, &spectral_moments(&b)?, cfg.run.m)?;
            let text = key_values(&report.to_key_values());
            files.write("classify.txt", &text)?;
            let json = serde_json::to_string_pretty(&report).expect("plain data serializes");
            files.write("classify.json", &format!("{json}\n"))?;
            Ok(text)
        }
        Command::Encode => {
            let logical = state(cfg, cfg.state.qubits.unwrap_or(geometry(cfg)?.len()), base)?;
            let code = match cfg.run.code {
                Code::Adjacent => PairingCode::Adjacent,
                Code::Modulated => PairingCode::Modulated(pairing_plan(cfg)?),
            };
            let physical = code.physical_len(logical.qubits())?;
            let encoded = code.encode_state(&logical, physical)?;
            files.write("encoded.state", &format_state(&encoded, p))?;
            let mut out = format!(
                "code={}\nlogical={}\nphysical={physical}\n",
                cfg.run.code.as_str(),
                logical.qubits()
            );
            if let PairingCode::Modulated(plan) = code {
                out.push_str(&key_values(&plan.to_key_values()));
            }
            Ok(out)
        }
        Command::Pairing => {
            let text = key_values(&pairing_plan(cfg)?.to_key_values());
            files.write("pairing.txt", &text)?;
            Ok(text)
        }
        Command::DisorderScan => {
            let g = geometry(cfg)?;
            let b = bath(cfg)?;
            let (i, j) = match &cfg.run.pair {
                Some((i, j)) => (i.parse::<BasisLabel>()?, j.parse::<BasisLabel>()?),
                None => {
                    let up = BasisLabel::uniform(g.len(), 1);
                    let flip = up.flipped(0);
                    (up, flip)
                }
            };
            let t = cfg.run.t1;
            let (eta_ind, _) = independent_limit_factors(&i, &j, t, &b)?;
            let r = &cfg.run;
            let mut body = String::from(
                "delta,eta_mean,eta_stderr,lamb_phase_mean,lamb_phase_stderr,total_phase_mean,total_phase_stderr,eta_independent\n",
            );
            for n in 0..r.delta_steps {
                let delta = if r.delta_steps == 1 {
                    r.delta_min
                } else {
                    r.delta_min + (r.delta_max - r.delta_min) * n as f64 / (r.delta_steps - 1) as f64
                };
                let a = disorder_average_factors(&i, &j, t, &b, &g.with_delta(delta)?, r.samples)?;
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},{},{}",
                    fmt_num(delta, p),
                    fmt_num(a.eta.mean, p),
                    fmt_num(a.eta.stderr, p),
                    fmt_num(a.lamb_phase.mean, p),
                    fmt_num(a.lamb_phase.stderr, p),
                    fmt_num(a.total_phase.mean, p),
                    fmt_num(a.total_phase.stderr, p),
                    fmt_num(eta_ind, p),
                );
            }
            files.write("disorder_scan.csv", &body)?;
            Ok(format!("pair={i} {j}\nt={}\nrows={}\n", fmt_num(t, p), r.delta_steps))
        }
        Command::ValidateOracle => {
            let seed = cfg.geometry.seed;
            let mut instances = default_suite(seed)?;
            if cfg.run.suite == Suite::Quick {
                instances.retain(|inst| {
                    matches!(
                        inst.name.as_str(),
                        "zero-t-00" | "zero-t-01" | "zero-t-02" | "zero-t-03" | "thermal-00"
                    )
                });
            }
            let reports = run_suite(&instances, cfg.run.oracle_samples, seed, cfg.run.oracle_steps)?;
            let mut body = String::from("instance,qubits,modes,T,t,truncation,samples,max_deviation,max_z,passed\n");
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.name,
                    r.qubits,
                    r.modes,
                    fmt_num(r.temperature, p),
                    fmt_num(r.t, p),
                    r.truncation,
                    r.samples,
                    fmt_num(r.max_deviation, p),
                    fmt_num(r.max_z, p),
                    r.passed
                );
                let _ = writeln!(
                    out,
                    "{} max_deviation={} max_z={} passed={}",
                    r.name,
                    fmt_num(r.max_deviation, p),
                    fmt_num(r.max_z, p),
                    r.passed
                );
            }
            files.write("validate_oracle.csv", &body)?;
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
            if !failed.is_empty() {
                return Err(CliError::Tolerance(format!(
                    "{out}failed instances: {}",
                    failed.join(", ")
                )));
            }
            Ok(out)
        }
    }
}
