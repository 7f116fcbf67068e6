//! JSON problem configuration.
//!
//! ```json
//! {
//!   "partition": { "points": [0, 3, 7], "durations": [1] },
//!   "x0": 2.0,
//!   "f": "0.5*x + 1",              // variables n, x, y
//!   "F": "0.5*z",                  // variables k, z
//!   "g": "0.25*x + 0.5*y",         // variables n, x, y
//!   "P": 0.5, "K": 0, "T": 0.5, "M": 0.25, "L": 0.5,
//!   "alpha0": 0, "beta0": "2 + 0*n",
//!   "solver": { "tol": 1e-10, "residual_tol": 1e-8, "max_iter": 500,
//!               "samples_per_axis": 17, "trace": false },
//!   "oracle": { "bracket": [-10, 10], "tol": 1e-12, "scan_points": 256,
//!               "max_bisect": 200 },
//!   "linear": { "Q": 2, "sigma": 1, "T": 3, "mu": 0, "M": 0.5, "L": 1, "gamma": 0 }
//! }
//! ```
//!
//! Coefficients are a number or an expression in `n` (`T` and `mu`: in
//! `k`). Brackets are a number, an expression in `n`, or one value per node.
//! Every problem found while loading is reported, each with a JSON pointer.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde_json::{Map, Value};

use nide_core::expr::Expression;
use nide_core::grid::{GridFunction, TimePartition};
use nide_core::linear::LinearNIDE;
use nide_core::monotone::{IterationCoefficients, IterationOptions, NonlinearNIDE, DEFAULT_SAMPLES_PER_AXIS};
use nide_core::oracle::RootOptions;

use crate::CliError;

pub const NODE_VARS: &[&str] = &["n"];
pub const IMPULSE_VARS: &[&str] = &["k"];
pub const RHS_VARS: &[&str] = &["n", "x", "y"];
pub const JUMP_VARS: &[&str] = &["k", "z"];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pointer, self.message)
    }
}

/// A coefficient given as a constant or an expression in one index variable.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSpec {
    Constant(f64),
    Expr(Expression),
}

impl CoefficientSpec {
    pub fn value(&self, at: i64) -> Result<f64, nide_core::expr::ExprError> {
        match self {
            CoefficientSpec::Constant(v) => Ok(*v),
            CoefficientSpec::Expr(e) => e.eval_positional(&[at as f64]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BracketSpec {
    Constant(f64),
    Expr(Expression),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearConfig {
    pub f: Expression,
    pub impulse: Option<Expression>,
    pub g: Option<Expression>,
    pub p: CoefficientSpec,
    pub k: CoefficientSpec,
    pub t: Option<CoefficientSpec>,
    pub m: Option<CoefficientSpec>,
    pub l: Option<CoefficientSpec>,
    pub alpha0: BracketSpec,
    pub beta0: BracketSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConfig {
    pub q: CoefficientSpec,
    pub sigma: CoefficientSpec,
    pub t: Option<CoefficientSpec>,
    pub mu: Option<CoefficientSpec>,
    pub m: Option<CoefficientSpec>,
    pub l: Option<CoefficientSpec>,
    pub gamma: Option<CoefficientSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub residual_tol: f64,
    pub max_iter: usize,
    pub samples_per_axis: usize,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let defaults = IterationOptions::default();
        SolverConfig {
            tol: defaults.tol,
            residual_tol: defaults.residual_tol,
            max_iter: defaults.max_iter,
            samples_per_axis: DEFAULT_SAMPLES_PER_AXIS,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub bracket: Option<(f64, f64)>,
    pub tol: f64,
    pub scan_points: usize,
    pub max_bisect: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            bracket: None,
            tol: RootOptions::DEFAULT_TOL,
            scan_points: RootOptions::DEFAULT_SCAN_POINTS,
            max_bisect: RootOptions::DEFAULT_MAX_BISECT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub partition: Arc<TimePartition>,
    pub x0: f64,
    pub nonlinear: Option<NonlinearConfig>,
    pub linear: Option<LinearConfig>,
    pub solver: SolverConfig,
    pub oracle: OracleConfig,
}

pub fn load_config(path: &Path) -> Result<ProblemConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        CliError::Config(vec![ConfigIssue {
            pointer: String::new(),
            message: format!("invalid JSON: {e}"),
        }])
    })?;
    let mut reader = Reader::default();
    let config = reader.problem(&value);
    match config {
        Some(config) if reader.issues.is_empty() => Ok(config),
        _ => Err(CliError::Config(reader.issues)),
    }
}

const TOP_KEYS: &[&str] = &[
    "partition", "x0", "f", "F", "g", "P", "K", "T", "M", "L", "alpha0", "beta0", "solver", "oracle", "linear",
];
const NONLINEAR_KEYS: &[&str] = &["f", "F", "g", "P", "K", "T", "M", "L", "alpha0", "beta0"];

#[derive(Default)]
struct Reader {
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn issue(&mut self, pointer: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            pointer: pointer.to_string(),
            message: message.into(),
        });
    }

    fn object<'v>(&mut self, value: &'v Value, pointer: &str, allowed: &[&str]) -> Option<&'v Map<String, Value>> {
        match value.as_object() {
            Some(map) => {
                for key in map.keys() {
                    if !allowed.contains(&key.as_str()) {
                        self.issue(&format!("{pointer}/{key}"), "unknown field");
                    }
                }
                Some(map)
            }
            None => {
                self.issue(pointer, "expected an object");
                None
            }
        }
    }

    fn number(&mut self, value: &Value, pointer: &str) -> Option<f64> {
        match value.as_f64() {
            Some(v) if v.is_finite() => Some(v),
            _ => {
                self.issue(pointer, "expected a finite number");
                None
            }
        }
    }

    fn count(&mut self, value: &Value, pointer: &str) -> Option<usize> {
        match value.as_u64() {
            Some(v) => Some(v as usize),
            None => {
                self.issue(pointer, "expected a non-negative integer");
                None
            }
        }
    }

    fn integers(&mut self, value: &Value, pointer: &str) -> Option<Vec<i64>> {
        let items = match value.as_array() {
            Some(items) => items,
            None => {
                self.issue(pointer, "expected an array of integers");
                return None;
            }
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match item.as_i64() {
                Some(v) => out.push(v),
                None => {
                    self.issue(&format!("{pointer}/{i}"), "expected an integer");
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn expression(&mut self, value: &Value, pointer: &str, vars: &[&str]) -> Option<Expression> {
        match value.as_str() {
            Some(text) => match Expression::parse(text, vars) {
                Ok(e) => Some(e),
                Err(e) => {
                    self.issue(pointer, e.to_string());
                    None
                }
            },
            None => {
                self.issue(pointer, "expected an expression string");
                None
            }
        }
    }

    fn coefficient(&mut self, value: &Value, pointer: &str, vars: &[&str]) -> Option<CoefficientSpec> {
        match value {
            Value::String(_) => self.expression(value, pointer, vars).map(CoefficientSpec::Expr),
            _ => self.number(value, pointer).map(CoefficientSpec::Constant),
        }
    }

    fn bracket(&mut self, value: &Value, pointer: &str, len: Option<usize>) -> Option<BracketSpec> {
        match value {
            Value::String(_) => self.expression(value, pointer, NODE_VARS).map(BracketSpec::Expr),
            Value::Array(items) => {
                if let Some(len) = len {
                    if items.len() != len {
                        self.issue(pointer, format!("expected {len} values, one per node, got {}", items.len()));
                        return None;
                    }
                }
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    out.push(self.number(item, &format!("{pointer}/{i}"))?);
                }
                Some(BracketSpec::Values(out))
            }
            _ => self.number(value, pointer).map(BracketSpec::Constant),
        }
    }

    fn required<'v>(&mut self, map: &'v Map<String, Value>, pointer: &str, key: &str) -> Option<&'v Value> {
        let value = map.get(key);
        if value.is_none() {
            self.issue(&format!("{pointer}/{key}"), "missing required field");
        }
        value
    }

    fn partition(&mut self, value: &Value) -> Option<TimePartition> {
        let map = self.object(value, "/partition", &["points", "durations"])?;
        let points = self
            .required(map, "/partition", "points")
            .and_then(|v| self.integers(v, "/partition/points"))?;
        let durations = match map.get("durations") {
            Some(v) => self.integers(v, "/partition/durations")?,
            None if points.len() > 2 => {
                self.issue("/partition/durations", format!("missing; {} impulse point(s) need durations", points.len() - 2));
                return None;
            }
            None => Vec::new(),
        };
        match TimePartition::new(points, durations) {
            Ok(t) => Some(t),
            Err(e) => {
                let pointer = match e {
                    nide_core::GridError::DurationViolation { .. } | nide_core::GridError::DurationCount { .. } => {
                        "/partition/durations"
                    }
                    _ => "/partition/points",
                };
                self.issue(pointer, e.to_string());
                None
            }
        }
    }

    fn problem(&mut self, value: &Value) -> Option<ProblemConfig> {
        let root = self.object(value, "", TOP_KEYS)?;
        let partition = self.required(root, "", "partition").and_then(|v| self.partition(v));
        let impulses = partition.as_ref().map(|t| t.impulse_count());
        let x0 = self.required(root, "", "x0").and_then(|v| self.number(v, "/x0"));

        let wants_nonlinear = !root.contains_key("linear") || NONLINEAR_KEYS.iter().any(|k| root.contains_key(*k));
        let nonlinear = if wants_nonlinear {
            self.nonlinear(root, impulses, partition.as_ref().map(|t| t.len()))
        } else {
            None
        };
        let linear = match root.get("linear") {
            Some(v) => self.linear(v, impulses),
            None => None,
        };
        let solver = match root.get("solver") {
            Some(v) => self.solver(v),
            None => Some(SolverConfig::default()),
        };
        let oracle = match root.get("oracle") {
            Some(v) => self.oracle(v),
            None => Some(OracleConfig::default()),
        };

        if wants_nonlinear && nonlinear.is_none() {
            return None;
        }
        if root.contains_key("linear") && linear.is_none() {
            return None;
        }
        Some(ProblemConfig {
            partition: Arc::new(partition?),
            x0: x0?,
            nonlinear,
            linear,
            solver: solver?,
            oracle: oracle?,
        })
    }

    /// Parses `key` if present; when `needed`, reports it missing otherwise.
    fn optional_coefficient(
        &mut self,
        map: &Map<String, Value>,
        pointer: &str,
        key: &str,
        vars: &[&str],
        needed: bool,
    ) -> Result<Option<CoefficientSpec>, ()> {
        match map.get(key) {
            Some(v) => self
                .coefficient(v, &format!("{pointer}/{key}"), vars)
                .map(Some)
                .ok_or(()),
            None if needed => {
                self.issue(&format!("{pointer}/{key}"), "missing; required when the partition has impulse points");
                Err(())
            }
            None => Ok(None),
        }
    }

    fn nonlinear(
        &mut self,
        root: &Map<String, Value>,
        impulses: Option<usize>,
        len: Option<usize>,
    ) -> Option<NonlinearConfig> {
        let has_impulses = impulses.is_some_and(|p| p > 0);
        let f = self.required(root, "", "f").and_then(|v| self.expression(v, "/f", RHS_VARS));
        let impulse = self.optional_expression(root, "F", JUMP_VARS, has_impulses);
        let g = self.optional_expression(root, "g", RHS_VARS, has_impulses);
        let p = self.required(root, "", "P").and_then(|v| self.coefficient(v, "/P", NODE_VARS));
        let k = self.required(root, "", "K").and_then(|v| self.coefficient(v, "/K", NODE_VARS));
        let t = self.optional_coefficient(root, "", "T", IMPULSE_VARS, has_impulses);
        let m = self.optional_coefficient(root, "", "M", NODE_VARS, has_impulses);
        let l = self.optional_coefficient(root, "", "L", NODE_VARS, has_impulses);
        let alpha0 = self.required(root, "", "alpha0").and_then(|v| self.bracket(v, "/alpha0", len));
        let beta0 = self.required(root, "", "beta0").and_then(|v| self.bracket(v, "/beta0", len));
        Some(NonlinearConfig {
            f: f?,
            impulse: impulse.ok()?,
            g: g.ok()?,
            p: p?,
            k: k?,
            t: t.ok()?,
            m: m.ok()?,
            l: l.ok()?,
            alpha0: alpha0?,
            beta0: beta0?,
        })
    }

    fn optional_expression(
        &mut self,
        map: &Map<String, Value>,
        key: &str,
        vars: &[&str],
        needed: bool,
    ) -> Result<Option<Expression>, ()> {
        match map.get(key) {
            Some(v) => self.expression(v, &format!("/{key}"), vars).map(Some).ok_or(()),
            None if needed => {
                self.issue(&format!("/{key}"), "missing; required when the partition has impulse points");
                Err(())
            }
            None => Ok(None),
        }
    }

    fn linear(&mut self, value: &Value, impulses: Option<usize>) -> Option<LinearConfig> {
        let map = self.object(value, "/linear", &["Q", "sigma", "T", "mu", "M", "L", "gamma"])?;
        let has_impulses = impulses.is_some_and(|p| p > 0);
        let q = self
            .required(map, "/linear", "Q")
            .and_then(|v| self.coefficient(v, "/linear/Q", NODE_VARS));
        let sigma = self
            .required(map, "/linear", "sigma")
            .and_then(|v| self.coefficient(v, "/linear/sigma", NODE_VARS));
        let t = self.optional_coefficient(map, "/linear", "T", IMPULSE_VARS, has_impulses);
        let mu = self.optional_coefficient(map, "/linear", "mu", IMPULSE_VARS, has_impulses);
        let m = self.optional_coefficient(map, "/linear", "M", NODE_VARS, has_impulses);
        let l = self.optional_coefficient(map, "/linear", "L", NODE_VARS, has_impulses);
        let gamma = self.optional_coefficient(map, "/linear", "gamma", NODE_VARS, has_impulses);
        Some(LinearConfig {
            q: q?,
            sigma: sigma?,
            t: t.ok()?,
            mu: mu.ok()?,
            m: m.ok()?,
            l: l.ok()?,
            gamma: gamma.ok()?,
        })
    }

    fn solver(&mut self, value: &Value) -> Option<SolverConfig> {
        let map = self.object(
            value,
            "/solver",
            &["tol", "residual_tol", "max_iter", "samples_per_axis", "trace"],
        )?;
        let mut solver = SolverConfig::default();
        let before = self.issues.len();
        if let Some(v) = map.get("tol") {
            solver.tol = self.positive(v, "/solver/tol").unwrap_or(solver.tol);
        }
        if let Some(v) = map.get("residual_tol") {
            solver.residual_tol = self.positive(v, "/solver/residual_tol").unwrap_or(solver.residual_tol);
        }
        if let Some(v) = map.get("max_iter") {
            solver.max_iter = self.count(v, "/solver/max_iter").unwrap_or(solver.max_iter);
        }
        if let Some(v) = map.get("samples_per_axis") {
            match self.count(v, "/solver/samples_per_axis") {
                Some(s) if s >= 2 => solver.samples_per_axis = s,
                Some(_) => self.issue("/solver/samples_per_axis", "must be at least 2"),
                None => {}
            }
        }
        if let Some(v) = map.get("trace") {
            match v.as_bool() {
                Some(b) => solver.trace = b,
                None => self.issue("/solver/trace", "expected true or false"),
            }
        }
        (self.issues.len() == before).then_some(solver)
    }

    fn positive(&mut self, value: &Value, pointer: &str) -> Option<f64> {
        let v = self.number(value, pointer)?;
        if v > 0.0 {
            Some(v)
        } else {
            self.issue(pointer, "must be positive");
            None
        }
    }

    fn oracle(&mut self, value: &Value) -> Option<OracleConfig> {
        let map = self.object(value, "/oracle", &["bracket", "tol", "scan_points", "max_bisect"])?;
        let mut oracle = OracleConfig::default();
        let before = self.issues.len();
        if let Some(v) = map.get("bracket") {
            match v.as_array().map(|a| a.as_slice()) {
                Some([lo, hi]) => {
                    let lo = self.number(lo, "/oracle/bracket/0");
                    let hi = self.number(hi, "/oracle/bracket/1");
                    if let (Some(lo), Some(hi)) = (lo, hi) {
                        oracle.bracket = Some((lo, hi));
                    }
                }
                _ => self.issue("/oracle/bracket", "expected [lo, hi]"),
            }
        }
        if let Some(v) = map.get("tol") {
            oracle.tol = self.positive(v, "/oracle/tol").unwrap_or(oracle.tol);
        }
        if let Some(v) = map.get("scan_points") {
            match self.count(v, "/oracle/scan_points") {
                Some(s) if s >= 2 => oracle.scan_points = s,
                Some(_) => self.issue("/oracle/scan_points", "must be at least 2"),
                None => {}
            }
        }
        if let Some(v) = map.get("max_bisect") {
            oracle.max_bisect = self.count(v, "/oracle/max_bisect").unwrap_or(oracle.max_bisect);
        }
        (self.issues.len() == before).then_some(oracle)
    }
}

fn coefficient_error(name: &str, at: i64, e: nide_core::expr::ExprError) -> CliError {
    CliError::Evaluation(format!("{name} at {at}: {e}"))
}

fn nan_on_error(result: Result<f64, nide_core::expr::ExprError>) -> f64 {
    result.unwrap_or(f64::NAN)
}

impl ProblemConfig {
    pub fn nonlinear_config(&self) -> Result<&NonlinearConfig, CliError> {
        self.nonlinear
            .as_ref()
            .ok_or_else(|| CliError::Usage("the config has no nonlinear problem (f, P, K, alpha0, beta0)".into()))
    }

    pub fn linear_config(&self) -> Result<&LinearConfig, CliError> {
        self.linear
            .as_ref()
            .ok_or_else(|| CliError::Usage("the config has no \"linear\" section".into()))
    }

    /// The nonlinear problem; expression evaluation errors surface as
    /// non-finite values and are reported by the solvers with their node.
    pub fn nonlinear_problem(&self) -> Result<NonlinearNIDE, CliError> {
        let cfg = self.nonlinear_config()?;
        let f = cfg.f.clone();
        let impulse = cfg.impulse.clone();
        let g = cfg.g.clone();
        Ok(NonlinearNIDE::new(
            self.partition.clone(),
            self.x0,
            move |n, x, y| nan_on_error(f.eval_positional(&[n as f64, x, y])),
            move |k, z| match &impulse {
                Some(e) => nan_on_error(e.eval_positional(&[k as f64, z])),
                None => z,
            },
            move |n, x, y| match &g {
                Some(e) => nan_on_error(e.eval_positional(&[n as f64, x, y])),
                None => y,
            },
        ))
    }

    pub fn iteration_coefficients(&self) -> Result<IterationCoefficients, CliError> {
        let cfg = self.nonlinear_config()?;
        let t = &self.partition;
        let one = CoefficientSpec::Constant(1.0);
        let zero = CoefficientSpec::Constant(0.0);
        let (tc, mc, lc) = (
            cfg.t.as_ref().unwrap_or(&one),
            cfg.m.as_ref().unwrap_or(&zero),
            cfg.l.as_ref().unwrap_or(&one),
        );

        let mut pk = Vec::new();
        for n in t.all_difference_sources() {
            let p = cfg.p.value(n).map_err(|e| coefficient_error("P", n, e))?;
            let k = cfg.k.value(n).map_err(|e| coefficient_error("K", n, e))?;
            pk.push((n, (p, k)));
        }
        let mut ts = Vec::new();
        for k in 1..=t.impulse_count() {
            ts.push(tc.value(k as i64).map_err(|e| coefficient_error("T", k as i64, e))?);
        }
        let mut ml = Vec::new();
        for (_, n) in t.all_sustained_nodes() {
            let m = mc.value(n).map_err(|e| coefficient_error("M", n, e))?;
            let l = lc.value(n).map_err(|e| coefficient_error("L", n, e))?;
            ml.push((n, (m, l)));
        }
        let lookup = |table: &[(i64, (f64, f64))], n: i64| table.iter().find(|(m, _)| *m == n).unwrap().1;
        Ok(IterationCoefficients::from_fns(
            t.clone(),
            |n| lookup(&pk, n),
            |k| ts[k - 1],
            |n| lookup(&ml, n),
        )?)
    }

    fn bracket_function(&self, spec: &BracketSpec, name: &str) -> Result<GridFunction, CliError> {
        let t = self.partition.clone();
        let values = match spec {
            BracketSpec::Constant(v) => vec![*v; t.len()],
            BracketSpec::Values(values) => values.clone(),
            BracketSpec::Expr(e) => t
                .nodes()
                .map(|n| e.eval_positional(&[n as f64]).map_err(|e| coefficient_error(name, n, e)))
                .collect::<Result<_, _>>()?,
        };
        Ok(GridFunction::new(t, values)?)
    }

    pub fn alpha0(&self) -> Result<GridFunction, CliError> {
        self.bracket_function(&self.nonlinear_config()?.alpha0, "alpha0")
    }

    pub fn beta0(&self) -> Result<GridFunction, CliError> {
        self.bracket_function(&self.nonlinear_config()?.beta0, "beta0")
    }

    pub fn iteration_options(&self) -> IterationOptions {
        IterationOptions {
            tol: self.solver.tol,
            residual_tol: self.solver.residual_tol,
            max_iter: self.solver.max_iter,
            trace: self.solver.trace,
        }
    }

    /// Oracle options; without an explicit bracket the bracket is padded
    /// around `[min alpha0, max beta0]`, or around `x0` when no bracket
    /// functions are configured.
    pub fn root_options(&self) -> Result<RootOptions, CliError> {
        let base = match self.oracle.bracket {
            Some((lo, hi)) => RootOptions::with_bracket(lo, hi),
            None if self.nonlinear.is_some() => RootOptions::for_sector(&self.alpha0()?, &self.beta0()?),
            None => RootOptions::around(self.x0),
        };
        Ok(RootOptions {
            tol: self.oracle.tol,
            scan_points: self.oracle.scan_points,
            max_bisect: self.oracle.max_bisect,
            ..base
        })
    }

    pub fn linear_problem(&self) -> Result<LinearNIDE, CliError> {
        let cfg = self.linear_config()?;
        let t = &self.partition;
        let zero = CoefficientSpec::Constant(0.0);
        let one = CoefficientSpec::Constant(1.0);
        let mut builder = LinearNIDE::builder(t.clone(), self.x0);
        for n in t.all_difference_sources() {
            let q = cfg.q.value(n).map_err(|e| coefficient_error("Q", n, e))?;
            let s = cfg.sigma.value(n).map_err(|e| coefficient_error("sigma", n, e))?;
            builder.set_difference(n, q, s);
        }
        for k in 1..=t.impulse_count() {
            let at = k as i64;
            let tv = cfg.t.as_ref().unwrap_or(&one).value(at).map_err(|e| coefficient_error("T", at, e))?;
            let mu = cfg.mu.as_ref().unwrap_or(&zero).value(at).map_err(|e| coefficient_error("mu", at, e))?;
            builder.set_impulse(k, tv, mu);
        }
        for (_, n) in t.all_sustained_nodes() {
            let m = cfg.m.as_ref().unwrap_or(&zero).value(n).map_err(|e| coefficient_error("M", n, e))?;
            let l = cfg.l.as_ref().unwrap_or(&one).value(n).map_err(|e| coefficient_error("L", n, e))?;
            let g = cfg.gamma.as_ref().unwrap_or(&zero).value(n).map_err(|e| coefficient_error("gamma", n, e))?;
            builder.set_sustained(n, m, l, g);
        }
        Ok(builder.build()?)
    }
}
