//! Scenario files: a flat sectioned key-value format.
//!
//! ```text
//! # comment
//! name = nilpotent
//! tasks = all
//!
//! [space]
//! theta = mono(2)
//! phi = 1
//! psi = mono(3)
//!
//! [symbol]
//! g = mono(3)
//! ```
//!
//! Sections and keys:
//! - top level: `name`, `tasks` (comma list of validate, spectrum, kernel,
//!   factorize, resolvent, norm, or `all`).
//! - `[space]`: `mode` (realized, free, pointwise), `theta`, `phi`, `psi`, `aplus`, `aminus`.
//! - `[symbol]`: `g`.
//! - `[spectrum]`: `queries`, `adc` (lists of points).
//! - `[factorize]`: `lambda`, `r` (list of symbols), `l2` (boundary points).
//! - `[resolvent]`: `lambda`, `h` (vector of length 2n).
//! - `[numeric]`: `grid`, `cutoff`, `contract_tol` and any field of the tolerance set.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::{self, Value};
use crate::grid::C64;
use crate::symbol::{InnerFunction, LaurentSymbol};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Factorize,
    Kernel,
    Norm,
    Resolvent,
    Spectrum,
    Validate,
}

impl Task {
    pub const ALL: [Task; 6] = [Task::Factorize, Task::Kernel, Task::Norm, Task::Resolvent, Task::Spectrum, Task::Validate];

    pub fn name(self) -> &'static str {
        match self {
            Task::Factorize => "factorize",
            Task::Kernel => "kernel",
            Task::Norm => "norm",
            Task::Resolvent => "resolvent",
            Task::Spectrum => "spectrum",
            Task::Validate => "validate",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown task '{s}'")))
    }
}

/// Task selection: everything applicable, or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskSet {
    All,
    List(Vec<Task>),
}

impl FromStr for TaskSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        if parts.is_empty() {
            return Err(Error::Invalid("empty task list".into()));
        }
        if parts.contains(&"all") {
            return Ok(TaskSet::All);
        }
        let mut v = parts.into_iter().map(Task::from_str).collect::<Result<Vec<_>>>()?;
        v.sort();
        v.dedup();
        Ok(TaskSet::List(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceMode {
    /// theta, phi, psi given; A+/A- extracted or supplied.
    Realized,
    /// theta, A+, A- given.
    Free,
    /// Only pointwise data: any inner theta with optional A+, A-.
    Pointwise,
}

#[derive(Debug, Clone)]
pub struct SpaceSpec {
    pub mode: SpaceMode,
    pub theta: InnerFunction,
    pub phi: Option<LaurentSymbol>,
    pub psi: Option<LaurentSymbol>,
    pub aplus: Option<LaurentSymbol>,
    pub aminus: Option<LaurentSymbol>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub tasks: TaskSet,
    pub space: SpaceSpec,
    pub g: Option<LaurentSymbol>,
    pub spectrum_queries: Vec<C64>,
    pub adc_points: Vec<C64>,
    pub factor_lambdas: Vec<C64>,
    pub factor_r: Vec<LaurentSymbol>,
    pub l2_points: Vec<C64>,
    pub resolvent_lambdas: Vec<C64>,
    pub h: Option<Vec<C64>>,
    pub grid: Option<usize>,
    pub cutoff: Option<usize>,
    pub contract_tol: Option<f64>,
    pub tol: Tolerances,
    /// sha256 of the file contents, hex.
    pub digest: String,
}

struct Entry {
    value: String,
    line: usize,
    column: usize,
}

const SECTIONS: [(&str, &[&str]); 7] = [
    ("", &["name", "tasks"]),
    ("space", &["mode", "theta", "phi", "psi", "aplus", "aminus"]),
    ("symbol", &["g"]),
    ("spectrum", &["queries", "adc"]),
    ("factorize", &["lambda", "r", "l2"]),
    ("resolvent", &["lambda", "h"]),
    (
        "numeric",
        &[
            "grid", "cutoff", "contract_tol", "root", "disc", "eval", "alias", "orthogonality", "degeneracy", "rank",
            "circle_band", "delta_zero",
        ],
    ),
];

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

fn collect(src: &str) -> Result<BTreeMap<(String, String), Entry>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = raw.split('#').next().unwrap_or("");
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = text.len() - text.trim_start().len();
        if trimmed.starts_with('[') {
            let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) else {
                return Err(perr(line, indent + 1, "malformed section header"));
            };
            let name = name.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) || name.is_empty() {
                return Err(perr(line, indent + 2, format!("unknown section '{name}'")));
            }
            section = name.to_string();
            continue;
        }
        let Some(eq) = text.find('=') else {
            return Err(perr(line, indent + 1, "expected 'key = value'"));
        };
        let key = text[..eq].trim();
        let allowed = SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            let place = if section.is_empty() { "top level".to_string() } else { format!("section [{section}]") };
            return Err(perr(line, indent + 1, format!("unknown key '{key}' in {place}")));
        }
        let rest = &text[eq + 1..];
        let lead = rest.len() - rest.trim_start().len();
        let value = rest.trim().to_string();
        if value.is_empty() {
            return Err(perr(line, eq + 2, format!("missing value for '{key}'")));
        }
        let entry = Entry { value, line, column: eq + 2 + lead };
        if out.insert((section.clone(), key.to_string()), entry).is_some() {
            return Err(perr(line, indent + 1, format!("duplicate key '{key}'")));
        }
    }
    Ok(out)
}

struct Reader {
    entries: BTreeMap<(String, String), Entry>,
    tol: Tolerances,
}

impl Reader {
    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn value(&self, section: &str, key: &str) -> Result<Option<(Value, &Entry)>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(e) => Ok(Some((expr::parse_at(&e.value, e.line, e.column, &self.tol)?, e))),
        }
    }

    fn symbol(&self, section: &str, key: &str) -> Result<Option<LaurentSymbol>> {
        match self.value(section, key)? {
            None => Ok(None),
            Some((v, e)) => v.into_symbol().map(Some).map_err(|er| perr(e.line, e.column, er.to_string())),
        }
    }

    fn points(&self, section: &str, key: &str) -> Result<Vec<C64>> {
        match self.value(section, key)? {
            None => Ok(Vec::new()),
            Some((Value::List(items), e)) => items
                .iter()
                .map(|x| x.as_num().ok_or_else(|| perr(e.line, e.column, format!("{key}: expected a list of numbers"))))
                .collect(),
            Some((v, e)) => match v.as_num() {
                Some(x) => Ok(vec![x]),
                None => Err(perr(e.line, e.column, format!("{key}: expected a list of numbers"))),
            },
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        match self.get("numeric", key) {
            None => Ok(None),
            Some(e) => match e.value.parse::<f64>() {
                Ok(x) if x.is_finite() && x > 0.0 => Ok(Some(x)),
                _ => Err(perr(e.line, e.column, format!("{key}: expected a positive number"))),
            },
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.get("numeric", key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| perr(e.line, e.column, format!("{key}: expected a non-negative integer"))),
        }
    }
}

impl Scenario {
    pub fn parse(src: &str) -> Result<Self> {
        let entries = collect(src)?;
        let mut r = Reader { entries, tol: Tolerances::default() };

        let mut tol = Tolerances::default();
        let fields: [(&str, &mut f64); 9] = [
            ("root", &mut tol.root),
            ("disc", &mut tol.disc),
            ("eval", &mut tol.eval),
            ("alias", &mut tol.alias),
            ("orthogonality", &mut tol.orthogonality),
            ("degeneracy", &mut tol.degeneracy),
            ("rank", &mut tol.rank),
            ("circle_band", &mut tol.circle_band),
            ("delta_zero", &mut tol.delta_zero),
        ];
        for (key, slot) in fields {
            if let Some(x) = r.real(key)? {
                *slot = x;
            }
        }
        r.tol = tol;
        let grid = r.count("grid")?;
        if let (Some(g), Some(e)) = (grid, r.get("numeric", "grid")) {
            if !crate::grid::is_valid_grid(g) {
                return Err(perr(e.line, e.column, Error::BadGrid(g).to_string()));
            }
        }
        let cutoff = r.count("cutoff")?;
        let contract_tol = r.real("contract_tol")?;

        let name = match r.get("", "name") {
            Some(e) if e.value.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') => e.value.clone(),
            Some(e) => return Err(perr(e.line, e.column, "name may contain only letters, digits, '_' and '-'")),
            None => return Err(perr(1, 1, "missing 'name'")),
        };
        let tasks = match r.get("", "tasks") {
            None => TaskSet::All,
            Some(e) => e.value.parse().map_err(|er: Error| perr(e.line, e.column, er.to_string()))?,
        };

        let Some((theta_v, te)) = r.value("space", "theta")? else {
            return Err(perr(1, 1, "missing 'theta' in [space]"));
        };
        let theta = theta_v.into_inner().map_err(|er| perr(te.line, te.column, er.to_string()))?;
        let phi = r.symbol("space", "phi")?;
        let psi = r.symbol("space", "psi")?;
        let aplus = r.symbol("space", "aplus")?;
        let aminus = r.symbol("space", "aminus")?;
        let mode = match r.get("space", "mode") {
            Some(e) => match e.value.as_str() {
                "realized" => SpaceMode::Realized,
                "free" => SpaceMode::Free,
                "pointwise" => SpaceMode::Pointwise,
                other => return Err(perr(e.line, e.column, format!("unknown mode '{other}'"))),
            },
            None if phi.is_some() || psi.is_some() => SpaceMode::Realized,
            None if theta.is_finite_blaschke() && aplus.is_some() => SpaceMode::Free,
            None => SpaceMode::Pointwise,
        };
        let need = |ok: bool, what: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(perr(te.line, 1, format!("[space] {what}")))
            }
        };
        match mode {
            SpaceMode::Realized => need(phi.is_some() && psi.is_some(), "realized mode requires phi and psi")?,
            SpaceMode::Free => {
                need(aplus.is_some() && aminus.is_some(), "free mode requires aplus and aminus")?;
                need(phi.is_none() && psi.is_none(), "free mode does not take phi or psi")?;
            }
            SpaceMode::Pointwise => {
                need(phi.is_none() && psi.is_none(), "pointwise mode does not take phi or psi")?;
                need(aplus.is_some() == aminus.is_some(), "aplus and aminus must be given together")?;
            }
        }
        if aplus.is_some() != aminus.is_some() {
            need(false, "aplus and aminus must be given together")?;
        }

        let g = r.symbol("symbol", "g")?;
        let factor_r = match r.value("factorize", "r")? {
            None => Vec::new(),
            Some((Value::List(items), e)) => items
                .into_iter()
                .map(|v| v.into_symbol().map_err(|er| perr(e.line, e.column, er.to_string())))
                .collect::<Result<Vec<_>>>()?,
            Some((v, e)) => vec![v.into_symbol().map_err(|er| perr(e.line, e.column, er.to_string()))?],
        };
        let h = match r.get("resolvent", "h") {
            None => None,
            Some(_) => Some(r.points("resolvent", "h")?),
        };

        let sc = Scenario {
            name,
            tasks,
            space: SpaceSpec { mode, theta, phi, psi, aplus, aminus },
            g,
            spectrum_queries: r.points("spectrum", "queries")?,
            adc_points: r.points("spectrum", "adc")?,
            factor_lambdas: r.points("factorize", "lambda")?,
            factor_r,
            l2_points: r.points("factorize", "l2")?,
            resolvent_lambdas: r.points("resolvent", "lambda")?,
            h,
            grid,
            cutoff,
            contract_tol,
            tol,
            digest: hex::encode(Sha256::digest(src.as_bytes())),
        };
        if let TaskSet::List(ts) = &sc.tasks {
            for t in ts {
                if let Some(why) = sc.missing_prerequisite(*t) {
                    let e = r.get("", "tasks").expect("explicit task list");
                    return Err(perr(e.line, e.column, format!("task '{t}' {why}")));
                }
            }
        }
        Ok(sc)
    }

    /// Why `task` cannot run on this scenario, if it cannot.
    pub fn missing_prerequisite(&self, task: Task) -> Option<&'static str> {
        let pointwise = self.space.mode == SpaceMode::Pointwise;
        let has_a = self.space.aplus.is_some() || (self.space.mode == SpaceMode::Realized && self.space.theta.is_monomial());
        match task {
            Task::Validate | Task::Kernel if pointwise => Some("requires a finite Blaschke space"),
            Task::Kernel | Task::Norm if self.g.is_none() => Some("requires the symbol g"),
            Task::Norm if pointwise => Some("requires a finite Blaschke space"),
            Task::Spectrum if !has_a => Some("requires aplus and aminus"),
            Task::Spectrum if pointwise && self.spectrum_queries.is_empty() && self.adc_points.is_empty() => {
                Some("requires queries or adc points in pointwise mode")
            }
            Task::Factorize if self.factor_lambdas.is_empty() && self.factor_r.is_empty() && self.l2_points.is_empty() => {
                Some("requires lambda, r or l2 in [factorize]")
            }
            Task::Factorize if !has_a && (!self.factor_lambdas.is_empty() || !self.factor_r.is_empty()) => {
                Some("requires aplus and aminus")
            }
            Task::Resolvent if self.resolvent_lambdas.is_empty() => Some("requires lambda in [resolvent]"),
            Task::Resolvent if pointwise || !has_a => Some("requires a finite Blaschke space with aplus and aminus"),
            _ => None,
        }
    }

    /// Tasks to run: the explicit list, or every task whose prerequisites hold.
    pub fn selected_tasks(&self, over: Option<&TaskSet>) -> std::result::Result<Vec<Task>, (Task, &'static str)> {
        match over.unwrap_or(&self.tasks) {
            TaskSet::All => Ok(Task::ALL.into_iter().filter(|t| self.missing_prerequisite(*t).is_none()).collect()),
            TaskSet::List(v) => {
                for t in v {
                    if let Some(why) = self.missing_prerequisite(*t) {
                        return Err((*t, why));
                    }
                }
                Ok(v.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NILPOTENT: &str = "\
# nilpotent shift
name = nilpotent
tasks = all

[space]
theta = mono(2)
phi = 1
psi = mono(3)

[symbol]
g = mono(3)

[spectrum]
queries = [0, 0.5, 2]
";

    #[test]
    fn parses_sections() {
        let s = Scenario::parse(NILPOTENT).unwrap();
        assert_eq!(s.name, "nilpotent");
        assert_eq!(s.space.mode, SpaceMode::Realized);
        assert_eq!(s.space.theta, InnerFunction::monomial(2));
        assert_eq!(s.spectrum_queries.len(), 3);
        assert_eq!(s.digest.len(), 64);
        let all = s.selected_tasks(None).unwrap();
        assert!(all.contains(&Task::Spectrum) && all.contains(&Task::Norm) && !all.contains(&Task::Resolvent));
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        let e = Scenario::parse("name = x\n[space]\ntheta = mono(2)\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, column: 1, .. }), "{e}");
        let e = Scenario::parse("name = x\n[spaces]\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = Scenario::parse("name = x\nname = y\n").unwrap_err();
        assert!(e.to_string().contains("duplicate"));
    }

    #[test]
    fn expression_errors_are_located() {
        let e = Scenario::parse("name = x\n[space]\ntheta = mono(2)\nphi = poly([1,)\n").unwrap_err();
        match e {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (4, 15)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn prerequisites() {
        let src = "name = x\ntasks = resolvent\n[space]\ntheta = mono(2)\nphi = 1\npsi = mono(3)\n";
        let e = Scenario::parse(src).unwrap_err();
        assert!(e.to_string().contains("requires lambda"), "{e}");
        let src = "name = x\ntasks = norm\n[space]\ntheta = mono(2)\nphi = 1\npsi = mono(3)\n";
        assert!(Scenario::parse(src).unwrap_err().to_string().contains("requires the symbol g"));
    }

    #[test]
    fn numeric_overrides() {
        let src = "name = x\n[space]\ntheta = atomic([(1, 1)])\naplus = 1\naminus = 1\n[spectrum]\nadc = [1]\n[numeric]\ngrid = 2048\nrank = 1e-9\n";
        let s = Scenario::parse(src).unwrap();
        assert_eq!(s.space.mode, SpaceMode::Pointwise);
        assert_eq!(s.grid, Some(2048));
        assert_eq!(s.tol.rank, 1e-9);
        assert!(Scenario::parse("name = x\n[numeric]\ngrid = 1000\n").is_err());
    }
}
