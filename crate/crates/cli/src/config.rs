//! INI run configuration: parsing, validation and canonical serialization.

use std::fmt::Write as _;
use std::str::FromStr;

use ini::{Ini, ParseOption};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    PowerLaw,
    GaussianPeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Cat,
    SingleFlip,
    Explicit,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Adjacent,
    Modulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Default,
    Quick,
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$variant => $text),+ }
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($ty::$variant),)+
                    _ => Err(format!("expected one of {}", [$($text),+].join(", "))),
                }
            }
        }
    };
}

keyword_enum!(Form { PowerLaw => "power-law", GaussianPeak => "gaussian-peak" });
keyword_enum!(Preset { Cat => "cat", SingleFlip => "single-flip", Explicit => "explicit", File => "file" });
keyword_enum!(Code { Adjacent => "adjacent", Modulated => "modulated" });
keyword_enum!(Suite { Default => "default", Quick => "quick" });

#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySection {
    pub dims: [usize; 3],
    pub d: f64,
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathSection {
    pub v: f64,
    pub temperature: f64,
    pub omega0: f64,
    pub dimensionality: u32,
}

/// `center` and `width` are wave numbers; the frequency peak sits at
/// `v·center` with width `v·width`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSection {
    pub form: Form,
    pub amplitude: f64,
    pub exponent: f64,
    pub cutoff: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub modes: usize,
    pub omega_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Amplitude {
    pub label: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSection {
    pub preset: Preset,
    /// Register size for presets; defaults to the geometry size.
    pub qubits: Option<usize>,
    pub qubit: usize,
    pub amplitudes: Vec<Amplitude>,
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub m: usize,
    pub kbar: Option<f64>,
    pub m_max: usize,
    pub eps_tol: f64,
    pub code: Code,
    pub pair: Option<(String, String)>,
    pub samples: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
    pub suite: Suite,
    pub oracle_samples: usize,
    pub oracle_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub dir: String,
    pub precision: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub bath: BathSection,
    pub coupling: CouplingSection,
    pub grid: GridSection,
    pub state: StateSection,
    pub run: RunSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometrySection {
                dims: [4, 1, 1],
                d: 1.0,
                delta: 0.0,
                seed: 0,
            },
            bath: BathSection {
                v: 1.0,
                temperature: 0.0,
                omega0: 0.0,
                dimensionality: 1,
            },
            coupling: CouplingSection {
                form: Form::PowerLaw,
                amplitude: 0.01,
                exponent: 1.0,
                cutoff: 5.0,
                center: 10.0,
                width: 1.0,
            },
            grid: GridSection {
                modes: 256,
                omega_max: 25.0,
            },
            state: StateSection {
                preset: Preset::Cat,
                qubits: None,
                qubit: 0,
                amplitudes: Vec::new(),
                file: None,
            },
            run: RunSection {
                t0: 0.0,
                t1: 10.0,
                steps: 101,
                m: 1,
                kbar: None,
                m_max: 16,
                eps_tol: 0.05,
                code: Code::Adjacent,
                pair: None,
                samples: 1000,
                delta_min: 0.0,
                delta_max: 1.0,
                delta_steps: 11,
                suite: Suite::Default,
                oracle_samples: 10_000,
                oracle_steps: 1 << 16,
            },
            output: OutputSection {
                dir: "out".into(),
                precision: 12,
            },
        }
    }
}

/// Line-level syntax check with 1-based positions; the INI reader itself
/// reports unterminated headers only at end of input.
fn check_lines(text: &str) -> Result<(), CliError> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim_start();
        let indent = raw.len() - line.len();
        let line = line.trim_end();
        let err = |col: usize, msg: &str| CliError::Syntax {
            line: n + 1,
            col,
            msg: msg.to_string(),
        };
        if line.is_empty() || line.starts_with(';') || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            match line.find(']') {
                None => return Err(err(indent + line.len() + 1, "expected ']' to close the section header")),
                Some(close) if close + 1 != line.len() => {
                    return Err(err(indent + close + 2, "unexpected text after section header"))
                }
                Some(_) => {}
            }
        } else {
            match line.find(['=', ':']) {
                None => return Err(err(indent + 1, "expected 'key = value'")),
                Some(0) => return Err(err(indent + 1, "missing key before '='")),
                Some(_) => {}
            }
        }
    }
    Ok(())
}

fn semantic(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Semantic {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| semantic(key, format!("cannot parse '{raw}'")))
}

fn keyword<T: FromStr<Err = String>>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim().parse().map_err(|e| semantic(key, e))
}

impl RunConfig {
    /// Parses and validates `text`; missing keys take their defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        check_lines(text)?;
        let opt = ParseOption {
            enabled_quote: false,
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| CliError::Syntax {
            line: e.line,
            col: e.col,
            msg: e.msg.to_string(),
        })?;
        let mut cfg = RunConfig::default();
        for (section, props) in ini.iter() {
            let section = match section {
                Some(s) => s,
                None if props.is_empty() => continue,
                None => {
                    let (k, _) = props.iter().next().expect("non-empty");
                    return Err(CliError::UnknownKey(k.to_string()));
                }
            };
            for (k, raw) in props.iter() {
                cfg.set(section, k, raw)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, raw: &str) -> Result<(), CliError> {
        let full = format!("{section}.{key}");
        let k = full.as_str();
        match (section, key) {
            ("geometry", "dims") => {
                let parts: Vec<&str> = raw.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(semantic(k, "expected three integers"));
                }
                for (slot, p) in self.geometry.dims.iter_mut().zip(parts) {
                    *slot = value(k, p)?;
                }
            }
            ("geometry", "d") => self.geometry.d = value(k, raw)?,
            ("geometry", "delta") => self.geometry.delta = value(k, raw)?,
            ("geometry", "seed") => self.geometry.seed = value(k, raw)?,
            ("bath", "v") => self.bath.v = value(k, raw)?,
            ("bath", "T") => self.bath.temperature = value(k, raw)?,
            ("bath", "omega0") => self.bath.omega0 = value(k, raw)?,
            ("bath", "dimensionality") => self.bath.dimensionality = value(k, raw)?,
            ("coupling", "form") => self.coupling.form = keyword(k, raw)?,
            ("coupling", "A") => self.coupling.amplitude = value(k, raw)?,
            ("coupling", "p") => self.coupling.exponent = value(k, raw)?,
            ("coupling", "cutoff") => self.coupling.cutoff = value(k, raw)?,
            ("coupling", "center") => self.coupling.center = value(k, raw)?,
            ("coupling", "width") => self.coupling.width = value(k, raw)?,
            ("grid", "modes") => self.grid.modes = value(k, raw)?,
            ("grid", "omega_max") => self.grid.omega_max = value(k, raw)?,
            ("state", "preset") => self.state.preset = keyword(k, raw)?,
            ("state", "qubits") => self.state.qubits = Some(value(k, raw)?),
            ("state", "qubit") => self.state.qubit = value(k, raw)?,
            ("state", "amplitude") => {
                let parts: Vec<&str> = raw.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(semantic(k, "expected '<label> <re> <im>'"));
                }
                self.state.amplitudes.push(Amplitude {
                    label: parts[0].to_string(),
                    re: value(k, parts[1])?,
                    im: value(k, parts[2])?,
                });
            }
            ("state", "file") => self.state.file = Some(raw.trim().to_string()),
            ("run", "t0") => self.run.t0 = value(k, raw)?,
            ("run", "t1") => self.run.t1 = value(k, raw)?,
            ("run", "steps") => self.run.steps = value(k, raw)?,
            ("run", "m") => self.run.m = value(k, raw)?,
            ("run", "kbar") => self.run.kbar = Some(value(k, raw)?),
            ("run", "m_max") => self.run.m_max = value(k, raw)?,
            ("run", "eps_tol") => self.run.eps_tol = value(k, raw)?,
            ("run", "code") => self.run.code = keyword(k, raw)?,
            ("run", "pair") => {
                let parts: Vec<&str> = raw.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(semantic(k, "expected two basis labels"));
                }
                self.run.pair = Some((parts[0].to_string(), parts[1].to_string()));
            }
            ("run", "samples") => self.run.samples = value(k, raw)?,
            ("run", "delta_min") => self.run.delta_min = value(k, raw)?,
            ("run", "delta_max") => self.run.delta_max = value(k, raw)?,
            ("run", "delta_steps") => self.run.delta_steps = value(k, raw)?,
            ("run", "suite") => self.run.suite = keyword(k, raw)?,
            ("run", "oracle_samples") => self.run.oracle_samples = value(k, raw)?,
            ("run", "oracle_steps") => self.run.oracle_steps = value(k, raw)?,
            ("output", "dir") => self.output.dir = raw.trim().to_string(),
            ("output", "precision") => self.output.precision = value(k, raw)?,
            _ => return Err(CliError::UnknownKey(full)),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let finite_pos = |k: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(semantic(k, format!("must be finite and > 0, got {x}")))
            }
        };
        let finite_nonneg = |k: &str, x: f64| {
            if x >= 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(semantic(k, format!("must be finite and >= 0, got {x}")))
            }
        };
        let at_least = |k: &str, x: usize, min: usize| {
            if x >= min {
                Ok(())
            } else {
                Err(semantic(k, format!("must be >= {min}, got {x}")))
            }
        };
        let g = &self.geometry;
        if g.dims.contains(&0) {
            return Err(semantic("geometry.dims", "every extent must be >= 1"));
        }
        finite_pos("geometry.d", g.d)?;
        finite_nonneg("geometry.delta", g.delta)?;
        finite_pos("bath.v", self.bath.v)?;
        finite_nonneg("bath.T", self.bath.temperature)?;
        finite_nonneg("bath.omega0", self.bath.omega0)?;
        if !matches!(self.bath.dimensionality, 1 | 3) {
            return Err(semantic("bath.dimensionality", "must be 1 or 3"));
        }
        let c = &self.coupling;
        finite_nonneg("coupling.A", c.amplitude)?;
        if !c.exponent.is_finite() {
            return Err(semantic("coupling.p", "must be finite"));
        }
        finite_pos("coupling.cutoff", c.cutoff)?;
        finite_pos("coupling.center", c.center)?;
        finite_pos("coupling.width", c.width)?;
        at_least("grid.modes", self.grid.modes, 1)?;
        finite_pos("grid.omega_max", self.grid.omega_max)?;
        let s = &self.state;
        if let Some(q) = s.qubits {
            at_least("state.qubits", q, 1)?;
        }
        match s.preset {
            Preset::Explicit if s.amplitudes.is_empty() => {
                return Err(semantic(
                    "state.amplitude",
                    "explicit preset needs at least one amplitude",
                ))
            }
            Preset::File if s.file.is_none() => return Err(semantic("state.file", "file preset needs a path")),
            _ => {}
        }
        for a in &s.amplitudes {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(semantic("state.amplitude", "amplitudes must be finite"));
            }
            if a.label.parse::<qreg_dephasing::BasisLabel>().is_err() {
                return Err(semantic("state.amplitude", format!("bad basis label '{}'", a.label)));
            }
        }
        let r = &self.run;
        finite_nonneg("run.t0", r.t0)?;
        finite_nonneg("run.t1", r.t1)?;
        if r.t1 < r.t0 {
            return Err(semantic("run.t1", "must be >= run.t0"));
        }
        at_least("run.steps", r.steps, 1)?;
        at_least("run.m", r.m, 1)?;
        at_least("run.m_max", r.m_max, 1)?;
        finite_pos("run.eps_tol", r.eps_tol)?;
        if let Some(k) = r.kbar {
            finite_pos("run.kbar", k)?;
        }
        if let Some((i, j)) = &r.pair {
            for l in [i, j] {
                if l.parse::<qreg_dephasing::BasisLabel>().is_err() {
                    return Err(semantic("run.pair", format!("bad basis label '{l}'")));
                }
            }
        }
        at_least("run.samples", r.samples, 2)?;
        finite_nonneg("run.delta_min", r.delta_min)?;
        finite_nonneg("run.delta_max", r.delta_max)?;
        if r.delta_max < r.delta_min {
            return Err(semantic("run.delta_max", "must be >= run.delta_min"));
        }
        at_least("run.delta_steps", r.delta_steps, 1)?;
        at_least("run.oracle_samples", r.oracle_samples, 2)?;
        at_least("run.oracle_steps", r.oracle_steps, 1)?;
        if !(1..=17).contains(&self.output.precision) {
            return Err(semantic("output.precision", "must be between 1 and 17"));
        }
        Ok(())
    }

    /// Canonical text with every key written out; parsing it yields `self`.
    pub fn serialize(&self) -> String {
        let mut o = String::new();
        let g = &self.geometry;
        let _ = writeln!(o, "[geometry]");
        let _ = writeln!(o, "dims = {} {} {}", g.dims[0], g.dims[1], g.dims[2]);
        let _ = writeln!(o, "d = {:?}", g.d);
        let _ = writeln!(o, "delta = {:?}", g.delta);
        let _ = writeln!(o, "seed = {}", g.seed);
        let b = &self.bath;
        let _ = writeln!(o, "\n[bath]");
        let _ = writeln!(o, "v = {:?}", b.v);
        let _ = writeln!(o, "T = {:?}", b.temperature);
        let _ = writeln!(o, "omega0 = {:?}", b.omega0);
        let _ = writeln!(o, "dimensionality = {}", b.dimensionality);
        let c = &self.coupling;
        let _ = writeln!(o, "\n[coupling]");
        let _ = writeln!(o, "form = {}", c.form.as_str());
        let _ = writeln!(o, "A = {:?}", c.amplitude);
        let _ = writeln!(o, "p = {:?}", c.exponent);
        let _ = writeln!(o, "cutoff = {:?}", c.cutoff);
        let _ = writeln!(o, "center = {:?}", c.center);
        let _ = writeln!(o, "width = {:?}", c.width);
        let _ = writeln!(o, "\n[grid]");
        let _ = writeln!(o, "modes = {}", self.grid.modes);
        let _ = writeln!(o, "omega_max = {:?}", self.grid.omega_max);
        let s = &self.state;
        let _ = writeln!(o, "\n[state]");
        let _ = writeln!(o, "preset = {}", s.preset.as_str());
        if let Some(q) = s.qubits {
            let _ = writeln!(o, "qubits = {q}");
        }
        let _ = writeln!(o, "qubit = {}", s.qubit);
        for a in &s.amplitudes {
            let _ = writeln!(o, "amplitude = {} {:?} {:?}", a.label, a.re, a.im);
        }
        if let Some(f) = &s.file {
            let _ = writeln!(o, "file = {f}");
        }
        let r = &self.run;
        let _ = writeln!(o, "\n[run]");
        let _ = writeln!(o, "t0 = {:?}", r.t0);
        let _ = writeln!(o, "t1 = {:?}", r.t1);
        let _ = writeln!(o, "steps = {}", r.steps);
        let _ = writeln!(o, "m = {}", r.m);
        if let Some(k) = r.kbar {
            let _ = writeln!(o, "kbar = {k:?}");
        }
        let _ = writeln!(o, "m_max = {}", r.m_max);
        let _ = writeln!(o, "eps_tol = {:?}", r.eps_tol);
        let _ = writeln!(o, "code = {}", r.code.as_str());
        if let Some((i, j)) = &r.pair {
            let _ = writeln!(o, "pair = {i} {j}");
        }
        let _ = writeln!(o, "samples = {}", r.samples);
        let _ = writeln!(o, "delta_min = {:?}", r.delta_min);
        let _ = writeln!(o, "delta_max = {:?}", r.delta_max);
        let _ = writeln!(o, "delta_steps = {}", r.delta_steps);
        let _ = writeln!(o, "suite = {}", r.suite.as_str());
        let _ = writeln!(o, "oracle_samples = {}", r.oracle_samples);
        let _ = writeln!(o, "oracle_steps = {}", r.oracle_steps);
        let _ = writeln!(o, "\n[output]");
        let _ = writeln!(o, "dir = {}", self.output.dir);
        let _ = writeln!(o, "precision = {}", self.output.precision);
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_delta_names_the_key() {
        let err = RunConfig::parse("[geometry]\ndelta = -1\n").unwrap_err();
        assert!(
            matches!(err, CliError::Semantic { ref key, .. } if key == "geometry.delta"),
            "{err}"
        );
    }

    #[test]
    fn unknown_key_and_section_are_errors() {
        assert!(matches!(
            RunConfig::parse("[geometry]\nsize = 3\n"),
            Err(CliError::UnknownKey(k)) if k == "geometry.size"
        ));
        assert!(matches!(
            RunConfig::parse("[extra]\nx = 1\n"),
            Err(CliError::UnknownKey(k)) if k == "extra.x"
        ));
        assert!(matches!(RunConfig::parse("x = 1\n"), Err(CliError::UnknownKey(_))));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = RunConfig::parse("[geometry]\nd = 1\n[bath\n").unwrap_err();
        match err {
            CliError::Syntax { line, col, .. } => assert_eq!((line, col), (3, 6)),
            other => panic!("unexpected {other}"),
        }
        match RunConfig::parse("[geometry]\n  oops\n").unwrap_err() {
            CliError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 3)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn full_config_round_trips() {
        let text = "\
[geometry]
dims = 3 2 1
d = 0.5
delta = 0.125
seed = 42

[bath]
v = 2
T = 0.3
omega0 = 1.5
dimensionality = 3

[coupling]
form = gaussian-peak
A = 0.002
center = 20
width = 1.5

[grid]
modes = 64
omega_max = 30

[state]
preset = explicit
amplitude = ++++++ 0.6 0
amplitude = ------ 0 0.8

[run]
t0 = 0.5
t1 = 4
steps = 9
kbar = 1.0471975511965976
code = modulated
pair = ++++++ +-+-+-
suite = quick
oracle_samples = 500

[output]
dir = results
precision = 10
";
        let a = RunConfig::parse(text).unwrap();
        assert_eq!(a.state.amplitudes.len(), 2);
        assert_eq!(a.coupling.form, Form::GaussianPeak);
        let b = RunConfig::parse(&a.serialize()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
    }

    #[test]
    fn bad_values_are_semantic_errors() {
        for (text, key) in [
            ("[bath]\ndimensionality = 2\n", "bath.dimensionality"),
            ("[run]\nt0 = 5\nt1 = 1\n", "run.t1"),
            ("[coupling]\nform = flat\n", "coupling.form"),
            ("[geometry]\nd = abc\n", "geometry.d"),
            ("[state]\npreset = explicit\n", "state.amplitude"),
            ("[output]\nprecision = 0\n", "output.precision"),
        ] {
            match RunConfig::parse(text) {
                Err(CliError::Semantic { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
