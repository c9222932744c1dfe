//! Run configuration files.
//!
//! ```toml
//! [domain]
//! kind = "rectangle"          # interval | rectangle | disk
//! bounds = [-1, 1, -1, 1]     # [a, b] for an interval
//! n = 201                     # nodes per axis
//!
//! [system]
//! m = 4
//! epsilon = 1e-8
//! alpha = [1, 1, 1, 1]
//! A = [1, 1, 1, 1]            # numbers or expressions in x, y
//!
//! [boundary.1]
//! piece = "top: 1 - x^2"      # or an array of pieces, first match wins
//!
//! [solver]
//! tol_linear = 1e-10
//! tol_fp = 1e-8
//! max_sweeps = 5000
//! ```
//!
//! Parsing reports every problem it finds at once, then fills defaults. The
//! canonical form (sorted keys, defaults included) is what run manifests hash.

use std::path::Path;
use std::sync::Arc;

use toml::{Table, Value};

use crate::elliptic::{LinearSettings, DEFAULT_LINEAR_TOL};
use crate::epsilon::{FixedPointSettings, DEFAULT_MAX_SWEEPS, DEFAULT_TOL_FP};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::field::ScalarField;
use crate::geometry::{build_grid, Domain, Grid};
use crate::problem::{BoundaryDatum, CouplingWeights, Exponents, Piece, Problem, Weight};

pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_NODES: usize = 201;

/// Violations listed per component before the report is truncated.
const REPORT_NODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol_linear: f64,
    pub tol_fp: f64,
    pub max_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol_linear: DEFAULT_LINEAR_TOL, tol_fp: DEFAULT_TOL_FP, max_sweeps: DEFAULT_MAX_SWEEPS }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingSpec {
    Constant(f64),
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub domain: Domain,
    pub n: usize,
    pub epsilon: f64,
    pub alpha: Vec<f64>,
    pub coupling: Vec<CouplingSpec>,
    pub boundary: Vec<BoundaryDatum>,
    pub solver: SolverConfig,
    problem: Problem,
    canonical: String,
}

impl SystemConfig {
    pub fn m(&self) -> usize {
        self.boundary.len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.problem.grid()
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Sorted-key TOML with every default written out.
    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn linear_settings(&self) -> LinearSettings {
        LinearSettings { tol: self.solver.tol_linear, ..LinearSettings::default() }
    }

    pub fn fixed_point_settings(&self) -> FixedPointSettings {
        FixedPointSettings { tol_fp: self.solver.tol_fp, max_sweeps: self.solver.max_sweeps, linear: self.linear_settings() }
    }

    /// Whether every `A_i` is the same constant.
    pub fn uniform_coupling(&self) -> bool {
        self.problem.coupling().all_constant() && self.problem.coupling().all_equal()
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let src = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config_str(&src)
}

/// Collects problems while walking the table.
struct Reader {
    problems: Vec<String>,
}

impl Reader {
    fn table<'a>(&mut self, root: &'a Table, key: &str, allowed: &[&str]) -> Option<&'a Table> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => {
                for k in t.keys().filter(|k| !allowed.contains(&k.as_str())) {
                    self.problems.push(format!("unknown key `{k}` in [{key}]"));
                }
                Some(t)
            }
            Some(_) => {
                self.problems.push(format!("`{key}` must be a section"));
                None
            }
        }
    }

    fn number(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Integer(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            _ => {
                self.problems.push(format!("{section}.{key} must be a number"));
                None
            }
        }
    }

    fn count(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<usize> {
        match t?.get(key)? {
            Value::Integer(v) if *v >= 0 => Some(*v as usize),
            _ => {
                self.problems.push(format!("{section}.{key} must be a nonnegative integer"));
                None
            }
        }
    }

    fn numbers(&mut self, t: Option<&Table>, section: &str, key: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = t?.get(key)? else {
            self.problems.push(format!("{section}.{key} must be an array of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for v in items {
            match v {
                Value::Integer(v) => out.push(*v as f64),
                Value::Float(v) => out.push(*v),
                _ => {
                    self.problems.push(format!("{section}.{key} must be an array of numbers"));
                    return None;
                }
            }
        }
        Some(out)
    }
}

fn positive(r: &mut Reader, v: f64, what: &str) -> f64 {
    if !(v > 0.0 && v.is_finite()) {
        r.problems.push(format!("{what} must be positive and finite, got {v}"));
    }
    v
}

fn parse_domain(r: &mut Reader, t: Option<&Table>) -> Option<(Domain, Table)> {
    let mut echo = Table::new();
    let Some(t) = t else {
        r.problems.push("missing [domain] section".to_string());
        return None;
    };
    let kind = match t.get("kind") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => {
            r.problems.push("domain.kind must be a string".to_string());
            return None;
        }
        None => {
            r.problems.push("domain.kind is required".to_string());
            return None;
        }
    };
    echo.insert("kind".into(), kind.into());
    let bounds = r.numbers(Some(t), "domain", "bounds");
    let domain = match kind {
        "interval" => {
            if t.contains_key("radius") || t.contains_key("center") {
                r.problems.push("an interval takes `bounds`, not `radius`/`center`".to_string());
            }
            let b = bounds.unwrap_or_else(|| vec![0.0, 1.0]);
            if b.len() != 2 {
                r.problems.push("interval bounds must be [a, b]".to_string());
                return None;
            }
            Domain::Interval { a: b[0], b: b[1] }
        }
        "rectangle" => {
            if t.contains_key("radius") || t.contains_key("center") {
                r.problems.push("a rectangle takes `bounds`, not `radius`/`center`".to_string());
            }
            let b = bounds.unwrap_or_else(|| vec![-1.0, 1.0, -1.0, 1.0]);
            if b.len() != 4 {
                r.problems.push("rectangle bounds must be [x0, x1, y0, y1]".to_string());
                return None;
            }
            Domain::Rectangle { x0: b[0], x1: b[1], y0: b[2], y1: b[3] }
        }
        "disk" => {
            if t.contains_key("bounds") {
                r.problems.push("a disk takes `center` and `radius`, not `bounds`".to_string());
            }
            let c = r.numbers(Some(t), "domain", "center").unwrap_or_else(|| vec![0.0, 0.0]);
            let radius = r.number(Some(t), "domain", "radius").unwrap_or(1.0);
            if c.len() != 2 {
                r.problems.push("disk center must be [x, y]".to_string());
                return None;
            }
            Domain::Disk { center: [c[0], c[1]], radius: positive(r, radius, "domain.radius") }
        }
        other => {
            r.problems.push(format!("unknown domain kind `{other}` (expected interval, rectangle or disk)"));
            return None;
        }
    };
    match &domain {
        Domain::Interval { a, b } => {
            echo.insert("bounds".into(), Value::Array(vec![(*a).into(), (*b).into()]));
        }
        Domain::Rectangle { x0, x1, y0, y1 } => {
            echo.insert("bounds".into(), Value::Array([*x0, *x1, *y0, *y1].map(Value::from).to_vec()));
        }
        Domain::Disk { center, radius } => {
            echo.insert("center".into(), Value::Array(center.map(Value::from).to_vec()));
            echo.insert("radius".into(), (*radius).into());
        }
    }
    Some((domain, echo))
}

fn parse_pieces(r: &mut Reader, index: usize, t: &Table) -> Option<(BoundaryDatum, Vec<String>)> {
    let sources: Vec<String> = match t.get("piece") {
        None => Vec::new(),
        Some(Value::String(s)) => vec![s.clone()],
        Some(Value::Array(items)) if items.iter().all(Value::is_str) => {
            items.iter().filter_map(|v| v.as_str().map(str::to_string)).collect()
        }
        Some(_) => {
            r.problems.push(format!("boundary.{index}.piece must be a string or an array of strings"));
            return None;
        }
    };
    let mut pieces = Vec::with_capacity(sources.len());
    for s in &sources {
        match Piece::parse(s) {
            Ok(p) => pieces.push(p),
            Err(e) => r.problems.push(format!("boundary.{index}: {e}")),
        }
    }
    (pieces.len() == sources.len()).then(|| (BoundaryDatum::new(index, pieces), sources))
}

fn coupling_specs(r: &mut Reader, t: Option<&Table>, m: usize) -> (Vec<CouplingSpec>, Value) {
    let Some(value) = t.and_then(|t| t.get("A")) else {
        return (vec![CouplingSpec::Constant(1.0); m], Value::Array(vec![Value::from(1.0); m]));
    };
    let Value::Array(items) = value else {
        r.problems.push("system.A must be an array".to_string());
        return (Vec::new(), value.clone());
    };
    let mut specs = Vec::with_capacity(items.len());
    let mut echo = Vec::with_capacity(items.len());
    for (i, v) in items.iter().enumerate() {
        match v {
            Value::Integer(a) => {
                specs.push(CouplingSpec::Constant(*a as f64));
                echo.push(Value::from(*a as f64));
            }
            Value::Float(a) => {
                specs.push(CouplingSpec::Constant(*a));
                echo.push(Value::from(*a));
            }
            Value::String(s) => match Expr::parse(s) {
                Ok(e) => {
                    echo.push(Value::from(e.to_string()));
                    specs.push(CouplingSpec::Expr(e));
                }
                Err(e) => r.problems.push(format!("A_{}: {e}", i + 1)),
            },
            _ => r.problems.push(format!("A_{} must be a number or an expression string", i + 1)),
        }
    }
    (specs, Value::Array(echo))
}

fn weights(grid: &Arc<Grid>, specs: &[CouplingSpec]) -> CouplingWeights {
    CouplingWeights::new(
        specs
            .iter()
            .map(|s| match s {
                CouplingSpec::Constant(a) => Weight::Constant(*a),
                CouplingSpec::Expr(e) => {
                    Weight::Field(ScalarField::from_fn(grid, |[x, y]| e.eval(x, y, y.atan2(x).rem_euclid(std::f64::consts::TAU))))
                }
            })
            .collect(),
    )
}

pub fn parse_config_str(src: &str) -> Result<SystemConfig> {
    let root: Table = src.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string().trim().to_string()]))?;
    let mut r = Reader { problems: Vec::new() };
    for k in root.keys().filter(|k| !["domain", "system", "boundary", "solver"].contains(&k.as_str())) {
        r.problems.push(format!("unknown section [{k}]"));
    }
    let domain_t = r.table(&root, "domain", &["kind", "bounds", "center", "radius", "n"]);
    let system_t = r.table(&root, "system", &["m", "epsilon", "alpha", "A"]);
    let solver_t = r.table(&root, "solver", &["tol_linear", "tol_fp", "max_sweeps"]);

    let domain = parse_domain(&mut r, domain_t);
    let n = r.count(domain_t, "domain", "n").unwrap_or(DEFAULT_NODES);

    let m = match r.count(system_t, "system", "m") {
        Some(m) if m >= 1 => Some(m),
        Some(_) => {
            r.problems.push("system.m must be at least 1".to_string());
            None
        }
        None => {
            if !system_t.is_some_and(|t| t.contains_key("m")) {
                r.problems.push("system.m is required".to_string());
            }
            None
        }
    };
    let epsilon = r.number(system_t, "system", "epsilon").map_or(DEFAULT_EPSILON, |e| positive(&mut r, e, "system.epsilon"));

    let solver = SolverConfig {
        tol_linear: r.number(solver_t, "solver", "tol_linear").map_or(DEFAULT_LINEAR_TOL, |v| positive(&mut r, v, "solver.tol_linear")),
        tol_fp: r.number(solver_t, "solver", "tol_fp").map_or(DEFAULT_TOL_FP, |v| positive(&mut r, v, "solver.tol_fp")),
        max_sweeps: r.count(solver_t, "solver", "max_sweeps").unwrap_or(DEFAULT_MAX_SWEEPS),
    };
    if solver.max_sweeps == 0 {
        r.problems.push("solver.max_sweeps must be at least 1".to_string());
    }

    let m_or = m.unwrap_or(0);
    let alpha = r.numbers(system_t, "system", "alpha").unwrap_or_else(|| vec![1.0; m_or]);
    let (coupling, coupling_echo) = coupling_specs(&mut r, system_t, m_or);
    if m.is_some() {
        if alpha.len() != m_or {
            r.problems.push(format!("system.alpha has {} entries for m = {m_or}", alpha.len()));
        }
        if coupling.len() != m_or && !r.problems.iter().any(|p| p.starts_with("A_")) {
            r.problems.push(format!("system.A has {} entries for m = {m_or}", coupling.len()));
        }
    }
    for (i, a) in alpha.iter().enumerate() {
        if !(*a >= 1.0 && a.is_finite()) {
            r.problems.push(format!("alpha_{} = {a} must be a finite number >= 1", i + 1));
        }
    }

    let mut boundary: Vec<Option<(BoundaryDatum, Vec<String>)>> = vec![None; m_or];
    let mut boundary_echo = Table::new();
    match root.get("boundary") {
        None => {}
        Some(Value::Table(sections)) => {
            for (key, section) in sections {
                let index = key.parse::<usize>().ok().filter(|&i| i >= 1 && (m.is_none() || i <= m_or));
                let (Some(index), Value::Table(section)) = (index, section) else {
                    r.problems.push(format!("unexpected boundary entry `boundary.{key}` (expected sections 1..={m_or})"));
                    continue;
                };
                for k in section.keys().filter(|k| k.as_str() != "piece") {
                    r.problems.push(format!("unknown key `{k}` in [boundary.{index}]"));
                }
                if let Some(parsed) = parse_pieces(&mut r, index, section) {
                    if index <= m_or {
                        boundary[index - 1] = Some(parsed);
                    }
                }
            }
        }
        Some(_) => r.problems.push("`boundary` must hold [boundary.<i>] sections".to_string()),
    }
    if m.is_some() {
        for (i, b) in boundary.iter().enumerate() {
            if b.is_none() && !r.problems.iter().any(|p| p.starts_with(&format!("boundary.{}", i + 1))) {
                r.problems.push(format!("missing [boundary.{}] section", i + 1));
            }
        }
    }

    let (Some((domain, domain_echo)), Some(m)) = (domain, m) else {
        return Err(Error::Config(r.problems));
    };
    if !r.problems.is_empty() {
        return Err(Error::Config(r.problems));
    }
    let (boundary, sources): (Vec<BoundaryDatum>, Vec<Vec<String>>) =
        boundary.into_iter().map(|b| b.expect("checked above")).unzip();

    let grid = match build_grid(&domain, n) {
        Ok(g) => Arc::new(g),
        Err(e) => return Err(Error::Config(vec![e.to_string()])),
    };
    let exponents = Exponents::new(alpha.clone())?;
    let problem = Problem::new(Arc::clone(&grid), &boundary, weights(&grid, &coupling), exponents)?;

    let seg = problem.segregation_report(None);
    if !seg.is_valid() {
        let mut msg = format!(
            "boundary data are not partially segregated: product of phi_i exceeds {:e} at {} boundary node(s):",
            seg.tol,
            seg.violations.len()
        );
        for v in seg.violations.iter().take(REPORT_NODES) {
            msg.push_str(&format!("\n      node {} at ({:.6}, {:.6}): product {:e}", v.node, v.coord[0], v.coord[1], v.product));
        }
        if seg.violations.len() > REPORT_NODES {
            msg.push_str(&format!("\n      ... and {} more", seg.violations.len() - REPORT_NODES));
        }
        r.problems.push(msg);
    }
    let coupling_report = problem.coupling_report();
    for i in 0..m {
        let bad: Vec<_> = coupling_report.violations.iter().filter(|v| v.component == i).collect();
        if let Some(first) = bad.first() {
            let c = grid.coord(first.node);
            r.problems.push(format!(
                "coupling condition 0 < A_i <= sum of the others fails for A_{} at {} interior node(s), e.g. node {} at ({:.6}, {:.6}): A_{} = {}, others sum to {} ({})",
                i + 1,
                bad.len(),
                first.node,
                c[0],
                c[1],
                i + 1,
                first.value,
                first.others,
                first.issue
            ));
        }
    }
    if !r.problems.is_empty() {
        return Err(Error::Config(r.problems));
    }

    let mut domain_echo = domain_echo;
    domain_echo.insert("n".into(), Value::Integer(n as i64));
    let mut system_echo = Table::new();
    system_echo.insert("m".into(), Value::Integer(m as i64));
    system_echo.insert("epsilon".into(), epsilon.into());
    system_echo.insert("alpha".into(), Value::Array(alpha.iter().map(|&a| a.into()).collect()));
    system_echo.insert("A".into(), coupling_echo);
    for (i, s) in sources.iter().enumerate() {
        let mut t = Table::new();
        t.insert("piece".into(), Value::Array(s.iter().map(|p| Value::from(p.trim())).collect()));
        boundary_echo.insert((i + 1).to_string(), Value::Table(t));
    }
    let mut solver_echo = Table::new();
    solver_echo.insert("tol_linear".into(), solver.tol_linear.into());
    solver_echo.insert("tol_fp".into(), solver.tol_fp.into());
    solver_echo.insert("max_sweeps".into(), Value::Integer(solver.max_sweeps as i64));
    let mut canon = Table::new();
    canon.insert("domain".into(), Value::Table(domain_echo));
    canon.insert("system".into(), Value::Table(system_echo));
    canon.insert("boundary".into(), Value::Table(boundary_echo));
    canon.insert("solver".into(), Value::Table(solver_echo));
    let canonical = toml::to_string(&canon).map_err(|e| Error::Config(vec![e.to_string()]))?;

    Ok(SystemConfig { domain, n, epsilon, alpha, coupling, boundary, solver, problem, canonical })
}
