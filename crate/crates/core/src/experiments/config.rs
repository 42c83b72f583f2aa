//! Experiment configuration: INI-style `key = value` text with `[section]`
//! headers, layered over the embedded defaults.

use ini::{Ini, ParseOption};

use crate::air::Relaxation;
use crate::cases::CASE_NAMES;
use crate::error::{Error, Result};
use crate::mesh::MeshMode;
use crate::solver::SolverParams;

/// The complete default configuration, printed by `sthdg defaults`.
pub const DEFAULTS: &str = "\
# Every key below may be overridden by a user config file. Unknown sections
# and keys are rejected.

[solver]
tol = 1e-12
maxit = 5000
relaxation = f_then_all_fgs
theta_c = 0.2
theta_r = 0.3
max_coarse = 40
block_scaling = true

[converge]
case = pulse1d
mode = all, slab
p = 1, 2, 3
nu = 1e-2, 1e-6
deform = true
meshes = 12x8, 24x16, 48x32, 96x64
# p = 1 needs finer meshes before its rate settles
meshes_p1 = 48x32, 96x64, 192x128, 384x256

[iterations]
case = pulse1d
mode = all
p = 1
nu = 1e-1, 1e-2, 1e-6
deform = true
meshes = 12x8, 24x16, 48x32, 96x64

[stagnation]
case = pulse1d
mode = all
p = 2
nu = 1e-6, 1e-4
deform = true
meshes = 48x32

[amr]
case = layer1d
mode = all
p = 1
nu = 0
meshes = 12x8, 24x16, 48x32, 96x64
cycles = 6
fraction = 0.1

[relaxcompare]
case = layer1d
mode = all
p = 1
nu = 0
meshes = 12x8
cycles = 6
fraction = 0.1

[ordercheck]
case = layer1d
mode = all
p = 1
nu = 0, 1e-2
meshes = 12x8, 24x16, 48x32

[export]
case = layer1d
mode = all
p = 1
nu = 0
meshes = 12x8
";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExperimentKind {
    Converge,
    Iterations,
    Stagnation,
    Amr,
    RelaxCompare,
    OrderCheck,
    Export,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Converge,
        ExperimentKind::Iterations,
        ExperimentKind::Stagnation,
        ExperimentKind::Amr,
        ExperimentKind::RelaxCompare,
        ExperimentKind::OrderCheck,
        ExperimentKind::Export,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Converge => "converge",
            ExperimentKind::Iterations => "iterations",
            ExperimentKind::Stagnation => "stagnation",
            ExperimentKind::Amr => "amr",
            ExperimentKind::RelaxCompare => "relaxcompare",
            ExperimentKind::OrderCheck => "ordercheck",
            ExperimentKind::Export => "export",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// One experiment, fully resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub case: String,
    pub modes: Vec<MeshMode>,
    pub p: Vec<usize>,
    pub nu: Vec<f64>,
    pub deform: bool,
    /// Uniform `(nx, nt)` ladder; the AMR experiments start from its first entry.
    pub meshes: Vec<(usize, usize)>,
    /// Per-degree ladders that replace `meshes`, indexed by `p - 1`.
    pub meshes_for_p: [Option<Vec<(usize, usize)>>; 3],
    pub cycles: usize,
    pub fraction: f64,
    pub solver: SolverParams,
}

impl ExperimentConfig {
    pub fn ladder(&self, p: usize) -> &[(usize, usize)] {
        p.checked_sub(1)
            .and_then(|i| self.meshes_for_p.get(i))
            .and_then(|m| m.as_deref())
            .unwrap_or(&self.meshes)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(c) = &o.case {
            self.case = c.clone();
        }
        if let Some(p) = o.p {
            self.p = vec![p];
        }
        if let Some(nu) = o.nu {
            self.nu = vec![nu];
        }
        if let Some(m) = o.mode {
            self.modes = vec![m];
        }
        self.validate()
            .map_err(|message| Error::Config { line: 0, message })
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !CASE_NAMES.contains(&self.case.as_str()) {
            return Err(format!(
                "unknown case '{}' (known: {})",
                self.case,
                CASE_NAMES.join(", ")
            ));
        }
        if self.modes.is_empty() || self.p.is_empty() || self.nu.is_empty() {
            return Err(format!(
                "[{}]: mode, p and nu must be nonempty",
                self.kind.name()
            ));
        }
        if let Some(p) = self.p.iter().find(|&&p| !(1..=3).contains(&p)) {
            return Err(format!("[{}]: p = {p} outside 1..=3", self.kind.name()));
        }
        if let Some(nu) = self.nu.iter().find(|nu| !(nu.is_finite() && **nu >= 0.0)) {
            return Err(format!(
                "[{}]: nu = {nu} must be finite and nonnegative",
                self.kind.name()
            ));
        }
        if self.p.iter().any(|&p| self.ladder(p).is_empty()) {
            return Err(format!("[{}]: empty mesh ladder", self.kind.name()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(format!(
                "[{}]: fraction = {} outside (0, 1]",
                self.kind.name(),
                self.fraction
            ));
        }
        let s = &self.solver;
        if !(s.tol > 0.0) {
            return Err(format!("tol = {} must be positive", s.tol));
        }
        if s.maxit == 0 {
            return Err("maxit must be positive".into());
        }
        Ok(())
    }
}

/// Command-line overrides applied after the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub case: Option<String>,
    pub p: Option<usize>,
    pub nu: Option<f64>,
    pub mode: Option<MeshMode>,
}

/// Solver settings plus one section per experiment kind.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub solver: SolverParams,
    pub experiments: Vec<ExperimentConfig>,
}

impl Default for Config {
    fn default() -> Self {
        let mut cfg = Config {
            solver: SolverParams::default(),
            experiments: ExperimentKind::ALL
                .into_iter()
                .map(|kind| ExperimentConfig {
                    kind,
                    case: "pulse1d".into(),
                    modes: vec![MeshMode::AllAtOnce],
                    p: vec![1],
                    nu: vec![0.0],
                    deform: false,
                    meshes: Vec::new(),
                    meshes_for_p: [None, None, None],
                    cycles: 0,
                    fraction: crate::amr::DEFAULT_MARK_FRACTION,
                    solver: SolverParams::default(),
                })
                .collect(),
        };
        cfg.merge(DEFAULTS).expect("embedded defaults parse");
        cfg
    }
}

fn parse_mode(s: &str) -> Option<MeshMode> {
    match s {
        "all" | "all_at_once" => Some(MeshMode::AllAtOnce),
        "slab" | "slab_by_slab" => Some(MeshMode::SlabBySlab),
        _ => None,
    }
}

pub fn mode_name(m: MeshMode) -> &'static str {
    match m {
        MeshMode::AllAtOnce => "all",
        MeshMode::SlabBySlab => "slab",
    }
}

/// Parses a `--mode` value.
pub fn parse_mode_arg(s: &str) -> Result<MeshMode> {
    parse_mode(s).ok_or_else(|| Error::Config {
        line: 0,
        message: format!("mode '{s}' is neither slab nor all"),
    })
}

fn list<T>(v: &str, f: impl Fn(&str) -> Option<T>) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).ok_or_else(|| format!("cannot parse '{s}'")))
        .collect()
}

fn parse_mesh(s: &str) -> Option<(usize, usize)> {
    let (a, b) = s.split_once('x')?;
    let nx: usize = a.trim().parse().ok()?;
    let nt: usize = b.trim().parse().ok()?;
    (nx > 0 && nt > 0).then_some((nx, nt))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn one<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse '{v}'"))
}

/// 1-based line of `key` inside `[section]`, or of the section header when
/// `key` is `None`. Zero when not found.
fn locate(text: &str, section: Option<&str>, key: Option<&str>) -> usize {
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim().to_string());
            if key.is_none() && current.as_deref() == section {
                return i + 1;
            }
            continue;
        }
        if let (Some(k), true) = (key, current.as_deref() == section) {
            let lhs = line.split(['=', ':']).next().unwrap_or("").trim();
            if lhs == k {
                return i + 1;
            }
        }
    }
    0
}

impl Config {
    /// Defaults overridden by `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.merge(text)?;
        Ok(cfg)
    }

    pub fn experiment(&self, kind: ExperimentKind) -> ExperimentConfig {
        let mut e = self
            .experiments
            .iter()
            .find(|e| e.kind == kind)
            .expect("every kind has a section")
            .clone();
        e.solver = self.solver.clone();
        e
    }

    fn merge(&mut self, text: &str) -> Result<()> {
        let opt = ParseOption {
            enabled_quote: false,
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(text, opt).map_err(|e| Error::Config {
            line: e.line + 1,
            message: e.msg.to_string(),
        })?;
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(Error::Config {
                        line: locate(text, None, Some(k)),
                        message: format!("key '{k}' outside any section"),
                    });
                }
                continue;
            };
            for (key, value) in props.iter() {
                let value = value.trim();
                let res = if section == "solver" {
                    set_solver(&mut self.solver, key, value)
                } else if let Some(kind) = ExperimentKind::from_name(section) {
                    let e = self
                        .experiments
                        .iter_mut()
                        .find(|e| e.kind == kind)
                        .expect("all kinds present");
                    set_experiment(e, key, value)
                } else {
                    return Err(Error::Config {
                        line: locate(text, Some(section), None),
                        message: format!("unknown section [{section}]"),
                    });
                };
                res.map_err(|message| Error::Config {
                    line: locate(text, Some(section), Some(key)),
                    message: format!("[{section}] {key}: {message}"),
                })?;
            }
        }
        for e in &self.experiments {
            let mut e = e.clone();
            e.solver = self.solver.clone();
            e.validate().map_err(|message| {
                let line = locate(text, Some(e.kind.name()), None);
                Error::Config { line, message }
            })?;
        }
        Ok(())
    }
}

fn set_solver(s: &mut SolverParams, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "tol" => {
            s.tol = one(v)?;
            if !(s.tol > 0.0) {
                return Err("must be positive".into());
            }
        }
        "maxit" => s.maxit = one(v)?,
        "relaxation" => {
            s.air.relaxation =
                Relaxation::from_name(v).ok_or_else(|| format!("unknown relaxation '{v}'"))?;
        }
        "theta_c" => s.air.theta_c = one(v)?,
        "theta_r" => s.air.theta_r = one(v)?,
        "max_coarse" => s.air.max_coarse = one(v)?,
        "block_scaling" => {
            s.block_scaling = parse_bool(v).ok_or_else(|| format!("'{v}' is not a boolean"))?
        }
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

fn set_experiment(e: &mut ExperimentConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "case" => {
            if !CASE_NAMES.contains(&v) {
                return Err(format!(
                    "unknown case '{v}' (known: {})",
                    CASE_NAMES.join(", ")
                ));
            }
            e.case = v.to_string();
        }
        "mode" => e.modes = list(v, parse_mode)?,
        "p" => e.p = list(v, |s| s.parse().ok())?,
        "nu" => e.nu = list(v, |s| s.parse().ok())?,
        "deform" => e.deform = parse_bool(v).ok_or_else(|| format!("'{v}' is not a boolean"))?,
        "meshes" => e.meshes = list(v, parse_mesh)?,
        "meshes_p1" | "meshes_p2" | "meshes_p3" => {
            let i = (key.as_bytes()[8] - b'1') as usize;
            e.meshes_for_p[i] = Some(list(v, parse_mesh)?);
        }
        "cycles" => e.cycles = one(v)?,
        "fraction" => e.fraction = one(v)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let cfg = Config::default();
        assert_eq!(cfg.solver, SolverParams::default());
        let c = cfg.experiment(ExperimentKind::Converge);
        assert_eq!(c.p, vec![1, 2, 3]);
        assert_eq!(c.ladder(1)[0], (48, 32));
        assert_eq!(c.ladder(2)[0], (12, 8));
        assert_eq!(c.modes, vec![MeshMode::AllAtOnce, MeshMode::SlabBySlab]);
        assert_eq!(cfg.experiment(ExperimentKind::Amr).cycles, 6);
    }

    #[test]
    fn user_text_overrides() {
        let cfg =
            Config::parse("[solver]\ntol = 1e-8\n[iterations]\nnu = 1e-3\nmeshes = 4x4, 8x8\n")
                .unwrap();
        assert_eq!(cfg.solver.tol, 1e-8);
        let e = cfg.experiment(ExperimentKind::Iterations);
        assert_eq!(e.nu, vec![1e-3]);
        assert_eq!(e.meshes, vec![(4, 4), (8, 8)]);
        assert_eq!(e.solver.tol, 1e-8);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = |t: &str| match Config::parse(t) {
            Err(Error::Config { line, message }) => (line, message),
            other => panic!("{other:?}"),
        };
        assert_eq!(err("[solver]\ntol = 1e-8\nbogus = 1\n").0, 3);
        assert_eq!(err("\n[nonsense]\nx = 1\n").0, 2);
        assert_eq!(err("[solver]\n\n\ntol = -1\n").0, 4);
        assert_eq!(err("[converge]\ncase = nowhere\n").0, 2);
        assert_eq!(err("[iterations]\nmeshes =\n").0, 1);
        assert_eq!(err("[amr]\nmeshes = 12by8\n").0, 2);
        assert_eq!(err("stray = 1\n").0, 1);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let mut e = Config::default().experiment(ExperimentKind::Converge);
        e.apply(&Overrides {
            p: Some(2),
            nu: Some(1e-3),
            mode: Some(MeshMode::SlabBySlab),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!((e.p.as_slice(), e.nu.as_slice()), (&[2][..], &[1e-3][..]));
        assert_eq!(e.modes, vec![MeshMode::SlabBySlab]);
        let bad = Overrides {
            case: Some("nope".into()),
            ..Overrides::default()
        };
        assert!(matches!(e.apply(&bad), Err(Error::Config { .. })));
        assert!(parse_mode_arg("sideways").is_err());
    }
}
