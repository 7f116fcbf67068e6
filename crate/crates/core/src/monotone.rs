//! Monotone iteration between a lower and an upper solution.
//!
//! For a nonlinear problem
//!
//! ```text
//! x(n+1) = f(n, x(n), x(n+1))   n ∈ ∪ I_k
//! x(n_k) = F(k, x(n_k - 1))     k ∈ [1, p]
//! x(n)   = g(n, x(n), x(n_k))   n ∈ J_k
//! x(n_0) = x_0
//! ```
//!
//! and one-sided bounds `P, K, T, M, L`, the sweep operator maps a grid
//! function `η` to the solution of the linear problem obtained by freezing
//! the nonlinear remainder at `η`. Starting from a lower solution `α` and an
//! upper solution `β ≥ α`, repeated sweeps increase `α` and decrease `β`
//! towards the minimal and maximal solutions inside the sector.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::grid::{sup_norm_diff, GridError, GridFunction, NodeKind, TimePartition};
use crate::linear::{solve_forward, LinearError, LinearNIDE, Site};
use crate::SLACK;

/// Smallest admissible `1 - K(n)`.
pub const MIN_ONE_MINUS_K: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonotoneError {
    #[error("degenerate K: K({n}) = {k} leaves 1 - K(n) below {MIN_ONE_MINUS_K:e}")]
    DegenerateK { n: i64, k: f64 },
    #[error("coefficient {name} at {at} is {value}, required {requirement}")]
    InvalidCoefficient {
        name: &'static str,
        at: i64,
        value: f64,
        requirement: &'static str,
    },
    #[error("invalid initial bracket: {0}")]
    InvalidInitialBracket(String),
    #[error("sector is empty at node {n}: alpha = {alpha} > beta = {beta}")]
    EmptySector { n: i64, alpha: f64, beta: f64 },
    #[error("samples_per_axis must be at least 2, got {0}")]
    InvalidSamples(usize),
    #[error("{rule} evaluated to a non-finite value at node {n}")]
    NonFinite { n: i64, rule: &'static str },
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type DifferenceMap = Arc<dyn Fn(i64, f64, f64) -> f64 + Send + Sync>;
pub type ImpulseMap = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// Initial value problem with right side `f`, impulse map `F` and
/// sustained relation `g`.
#[derive(Clone)]
pub struct NonlinearNIDE {
    partition: Arc<TimePartition>,
    f: DifferenceMap,
    impulse: ImpulseMap,
    g: DifferenceMap,
    x0: f64,
}

impl NonlinearNIDE {
    pub fn new(
        partition: Arc<TimePartition>,
        x0: f64,
        f: impl Fn(i64, f64, f64) -> f64 + Send + Sync + 'static,
        impulse: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(i64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NonlinearNIDE {
            partition,
            f: Arc::new(f),
            impulse: Arc::new(impulse),
            g: Arc::new(g),
            x0,
        }
    }

    /// A problem without impulses. Panics if the partition has impulse points.
    pub fn without_impulses(
        partition: Arc<TimePartition>,
        x0: f64,
        f: impl Fn(i64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(partition.impulse_count(), 0, "partition has impulse points");
        Self::new(partition, x0, f, |_, z| z, |_, _, y| y)
    }

    pub fn partition(&self) -> &Arc<TimePartition> {
        &self.partition
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn f(&self, n: i64, x: f64, y: f64) -> f64 {
        (self.f)(n, x, y)
    }

    pub fn impulse(&self, k: usize, z: f64) -> f64 {
        (self.impulse)(k, z)
    }

    pub fn g(&self, n: i64, x: f64, y: f64) -> f64 {
        (self.g)(n, x, y)
    }

    /// Right-hand side of the rule defining `u(n)`, evaluated on `u`.
    pub(crate) fn rule_value(&self, u: &GridFunction, n: i64, kind: NodeKind) -> Result<f64, MonotoneError> {
        let (rule, value) = match kind {
            NodeKind::Initial => ("x0", self.x0),
            NodeKind::Difference(_) => ("f", self.f(n - 1, u.at(n - 1), u.at(n))),
            NodeKind::Impulse(k) => ("F", self.impulse(k, u.at(n - 1))),
            NodeKind::Sustained(k) => ("g", self.g(n, u.at(n), u.at(self.partition.point(k)))),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(MonotoneError::NonFinite { n, rule })
        }
    }

    fn check_domain(&self, u: &GridFunction) -> Result<(), GridError> {
        if Arc::ptr_eq(u.partition(), &self.partition) || **u.partition() == *self.partition {
            Ok(())
        } else {
            Err(GridError::DomainMismatch)
        }
    }
}

impl fmt::Debug for NonlinearNIDE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearNIDE")
            .field("partition", &self.partition)
            .field("x0", &self.x0)
            .finish_non_exhaustive()
    }
}

/// One-sided bounds `P, K` on `∪ I_k`, `T` on impulses and `M, L` on `∪ J_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationCoefficients {
    partition: Arc<TimePartition>,
    p: Vec<f64>,
    k: Vec<f64>,
    t: Vec<f64>,
    m: Vec<f64>,
    l: Vec<f64>,
}

impl IterationCoefficients {
    /// `pk(n) = (P(n), K(n))`, `t(k) = T(k)`, `ml(n) = (M(n), L(n))`.
    ///
    /// Requires `P > 0`, `K < 1` with `1 - K ≥ MIN_ONE_MINUS_K`, `T > 0`,
    /// `M < 1` and `L > 0`.
    pub fn from_fns(
        partition: Arc<TimePartition>,
        mut pk: impl FnMut(i64) -> (f64, f64),
        t: impl FnMut(usize) -> f64,
        mut ml: impl FnMut(i64) -> (f64, f64),
    ) -> Result<Self, MonotoneError> {
        let len = partition.len();
        let start = partition.start();
        let mut coeffs = IterationCoefficients {
            p: vec![0.0; len],
            k: vec![0.0; len],
            t: (1..=partition.impulse_count()).map(t).collect(),
            m: vec![0.0; len],
            l: vec![0.0; len],
            partition: partition.clone(),
        };
        for n in partition.all_difference_sources() {
            let (p, k) = pk(n);
            let i = (n - start) as usize;
            coeffs.p[i] = p;
            coeffs.k[i] = k;
        }
        for (_, n) in partition.all_sustained_nodes() {
            let (m, l) = ml(n);
            let i = (n - start) as usize;
            coeffs.m[i] = m;
            coeffs.l[i] = l;
        }
        coeffs.validate()?;
        Ok(coeffs)
    }

    /// Constant bounds on every index set.
    pub fn constant(
        partition: Arc<TimePartition>,
        p: f64,
        k: f64,
        t: f64,
        m: f64,
        l: f64,
    ) -> Result<Self, MonotoneError> {
        Self::from_fns(partition, |_| (p, k), |_| t, |_| (m, l))
    }

    fn validate(&self) -> Result<(), MonotoneError> {
        let invalid = |name, at, value, requirement| MonotoneError::InvalidCoefficient {
            name,
            at,
            value,
            requirement,
        };
        for n in self.partition.all_difference_sources() {
            let (p, k) = (self.p(n), self.k(n));
            if !(p > 0.0 && p.is_finite()) {
                return Err(invalid("P", n, p, "P(n) > 0"));
            }
            if !(k.is_finite() && 1.0 - k >= MIN_ONE_MINUS_K) {
                return Err(MonotoneError::DegenerateK { n, k });
            }
        }
        for k in 1..=self.partition.impulse_count() {
            let t = self.t(k);
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("T", k as i64, t, "T(k) > 0"));
            }
        }
        for (_, n) in self.partition.all_sustained_nodes() {
            let (m, l) = (self.m(n), self.l(n));
            if !(m < 1.0 && m.is_finite()) {
                return Err(invalid("M", n, m, "M(n) < 1"));
            }
            if !(l > 0.0 && l.is_finite()) {
                return Err(invalid("L", n, l, "L(n) > 0"));
            }
        }
        Ok(())
    }

    pub fn partition(&self) -> &Arc<TimePartition> {
        &self.partition
    }

    fn slot(&self, n: i64) -> usize {
        (n - self.partition.start()) as usize
    }

    pub fn p(&self, n: i64) -> f64 {
        self.p[self.slot(n)]
    }

    pub fn k(&self, n: i64) -> f64 {
        self.k[self.slot(n)]
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t[k - 1]
    }

    pub fn m(&self, n: i64) -> f64 {
        self.m[self.slot(n)]
    }

    pub fn l(&self, n: i64) -> f64 {
        self.l[self.slot(n)]
    }
}

/// A pair `α ≤ β` bounding the functions of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    alpha: GridFunction,
    beta: GridFunction,
}

impl Sector {
    pub fn new(alpha: GridFunction, beta: GridFunction) -> Result<Self, MonotoneError> {
        alpha.check_domain(&beta)?;
        for ((n, a), b) in alpha.iter().zip(beta.values()) {
            if a > b + SLACK {
                return Err(MonotoneError::EmptySector { n, alpha: a, beta: *b });
            }
        }
        Ok(Sector { alpha, beta })
    }

    pub fn alpha(&self) -> &GridFunction {
        &self.alpha
    }

    pub fn beta(&self) -> &GridFunction {
        &self.beta
    }

    /// `[α(n), β(n)]`.
    pub fn range(&self, n: i64) -> (f64, f64) {
        (self.alpha.at(n), self.beta.at(n))
    }
}

/// A node whose defining rule is violated beyond [`SLACK`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDefect {
    pub n: i64,
    pub kind: NodeKind,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionVerdict {
    pub violations: Vec<NodeDefect>,
    /// Largest signed defect over all nodes; positive means violated.
    pub worst_defect: f64,
    pub worst_node: i64,
}

impl SolutionVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn verify_one_sided(
    problem: &NonlinearNIDE,
    u: &GridFunction,
    sign: f64,
) -> Result<SolutionVerdict, MonotoneError> {
    problem.check_domain(u)?;
    let partition = problem.partition();
    let mut verdict = SolutionVerdict {
        violations: Vec::new(),
        worst_defect: f64::NEG_INFINITY,
        worst_node: partition.start(),
    };
    for (n, &kind) in partition.nodes().zip(partition.kinds()) {
        let rhs = problem.rule_value(u, n, kind)?;
        let defect = sign * (u.at(n) - rhs);
        if defect > verdict.worst_defect {
            verdict.worst_defect = defect;
            verdict.worst_node = n;
        }
        if defect > SLACK {
            verdict.violations.push(NodeDefect { n, kind, defect });
        }
    }
    Ok(verdict)
}

/// Checks that `alpha` satisfies every defining rule with `≤`.
pub fn verify_lower(problem: &NonlinearNIDE, alpha: &GridFunction) -> Result<SolutionVerdict, MonotoneError> {
    verify_one_sided(problem, alpha, 1.0)
}

/// Checks that `beta` satisfies every defining rule with `≥`.
pub fn verify_upper(problem: &NonlinearNIDE, beta: &GridFunction) -> Result<SolutionVerdict, MonotoneError> {
    verify_one_sided(problem, beta, -1.0)
}

/// Largest absolute defect of `u` in its defining rules.
pub fn residual(problem: &NonlinearNIDE, u: &GridFunction) -> Result<f64, MonotoneError> {
    problem.check_domain(u)?;
    let partition = problem.partition();
    let mut worst: f64 = 0.0;
    for (n, &kind) in partition.nodes().zip(partition.kinds()) {
        let rhs = problem.rule_value(u, n, kind)?;
        worst = worst.max((u.at(n) - rhs).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// `f(n,x₁,x₃) − f(n,x₂,x₄) ≤ P(n)(x₁−x₂) + K(n)(x₃−x₄)`.
    Difference,
    /// `F(k,z₁) − F(k,z₂) ≤ T(k)(z₁−z₂)`.
    Impulse,
    /// `g(n,y₁,y₃) − g(n,y₂,y₄) ≤ M(n)(y₁−y₂) + L(n)(y₃−y₄)`.
    Sustained,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Difference => "difference bound (P, K)",
            Condition::Impulse => "impulse bound (T)",
            Condition::Sustained => "sustained bound (M, L)",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub condition: Condition,
    /// Smallest `bound − difference` seen; negative beyond tolerance means Fail.
    pub worst_margin: f64,
    pub worst_site: Option<Site>,
    pub samples: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneSidedVerdict {
    pub reports: Vec<ConditionReport>,
}

impl OneSidedVerdict {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed)
    }
}

pub const DEFAULT_SAMPLES_PER_AXIS: usize = 17;

struct MarginTracker {
    condition: Condition,
    worst_margin: f64,
    worst_site: Option<Site>,
    samples: usize,
    passed: bool,
}

impl MarginTracker {
    fn new(condition: Condition) -> Self {
        MarginTracker {
            condition,
            worst_margin: f64::INFINITY,
            worst_site: None,
            samples: 0,
            passed: true,
        }
    }

    /// Records `bound - difference`; `scale` sets the rounding allowance.
    fn record(&mut self, site: Site, margin: f64, scale: f64) -> Result<(), MonotoneError> {
        if !margin.is_finite() {
            let n = match site {
                Site::Node(n) => n,
                Site::Impulse(k) => k as i64,
            };
            return Err(MonotoneError::NonFinite {
                n,
                rule: match self.condition {
                    Condition::Difference => "f",
                    Condition::Impulse => "F",
                    Condition::Sustained => "g",
                },
            });
        }
        self.samples += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_site = Some(site);
        }
        if margin < -SLACK * (1.0 + scale) {
            self.passed = false;
        }
        Ok(())
    }

    fn finish(self) -> ConditionReport {
        ConditionReport {
            condition: self.condition,
            worst_margin: if self.samples == 0 { 0.0 } else { self.worst_margin },
            worst_site: self.worst_site,
            samples: self.samples,
            passed: self.passed,
        }
    }
}

fn axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// Samples the one-sided bounds on a uniform grid inside the sector.
///
/// Every ordered pair `x₁ ≤ x₂` (and `x₃ ≤ x₄`) of grid points in the
/// per-node ranges is tried. A Pass only means no counterexample was found.
pub fn check_one_sided_conditions(
    problem: &NonlinearNIDE,
    coeffs: &IterationCoefficients,
    sector: &Sector,
    samples_per_axis: usize,
) -> Result<OneSidedVerdict, MonotoneError> {
    if samples_per_axis < 2 {
        return Err(MonotoneError::InvalidSamples(samples_per_axis));
    }
    problem.check_domain(sector.alpha())?;
    let partition = problem.partition();
    let s = samples_per_axis;

    let mut difference = MarginTracker::new(Condition::Difference);
    for n in partition.all_difference_sources() {
        let (lo1, hi1) = sector.range(n);
        let (lo2, hi2) = sector.range(n + 1);
        let xs = axis(lo1, hi1, s);
        let ys = axis(lo2, hi2, s);
        let (p, k) = (coeffs.p(n), coeffs.k(n));
        let values: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| problem.f(n, x, y)).collect())
            .collect();
        for i1 in 0..s {
            for i2 in i1..s {
                for i3 in 0..s {
                    for i4 in i3..s {
                        let (a, b) = (values[i1][i3], values[i2][i4]);
                        let margin = p * (xs[i1] - xs[i2]) + k * (ys[i3] - ys[i4]) - (a - b);
                        difference.record(Site::Node(n), margin, a.abs().max(b.abs()))?;
                    }
                }
            }
        }
    }

    let mut impulse = MarginTracker::new(Condition::Impulse);
    for k in 1..=partition.impulse_count() {
        let (lo, hi) = sector.range(partition.point(k) - 1);
        let zs = axis(lo, hi, s);
        let values: Vec<f64> = zs.iter().map(|&z| problem.impulse(k, z)).collect();
        let t = coeffs.t(k);
        for i1 in 0..s {
            for i2 in i1..s {
                let margin = t * (zs[i1] - zs[i2]) - (values[i1] - values[i2]);
                impulse.record(Site::Impulse(k), margin, values[i1].abs().max(values[i2].abs()))?;
            }
        }
    }

    let mut sustained = MarginTracker::new(Condition::Sustained);
    for (k, n) in partition.all_sustained_nodes() {
        let (lo1, hi1) = sector.range(n);
        let (lo2, hi2) = sector.range(partition.point(k));
        let xs = axis(lo1, hi1, s);
        let ys = axis(lo2, hi2, s);
        let (m, l) = (coeffs.m(n), coeffs.l(n));
        let values: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| problem.g(n, x, y)).collect())
            .collect();
        for i1 in 0..s {
            for i2 in i1..s {
                for i3 in 0..s {
                    for i4 in i3..s {
                        let (a, b) = (values[i1][i3], values[i2][i4]);
                        let margin = m * (xs[i1] - xs[i2]) + l * (ys[i3] - ys[i4]) - (a - b);
                        sustained.record(Site::Node(n), margin, a.abs().max(b.abs()))?;
                    }
                }
            }
        }
    }

    Ok(OneSidedVerdict {
        reports: vec![difference.finish(), impulse.finish(), sustained.finish()],
    })
}

/// The linear problem whose solution is the sweep of `eta`:
///
/// ```text
/// Q_n = P(n) / (1 - K(n))
/// σ_n = [f(n, η(n), η(n+1)) - P(n) η(n) - K(n) η(n+1)] / (1 - K(n))
/// T_k = T(k),  μ_k = F(k, η(n_k - 1)) - T(k) η(n_k - 1)
/// M_n = M(n),  L_n = L(n),  γ_n = g(n, η(n), η(n_k)) - M(n) η(n) - L(n) η(n_k)
/// ```
pub fn linearize(
    problem: &NonlinearNIDE,
    coeffs: &IterationCoefficients,
    eta: &GridFunction,
) -> Result<LinearNIDE, MonotoneError> {
    problem.check_domain(eta)?;
    let partition = problem.partition();
    let mut builder = LinearNIDE::builder(partition.clone(), problem.x0());
    for n in partition.all_difference_sources() {
        let (p, k) = (coeffs.p(n), coeffs.k(n));
        if !(1.0 - k >= MIN_ONE_MINUS_K) {
            return Err(MonotoneError::DegenerateK { n, k });
        }
        let (x, y) = (eta.at(n), eta.at(n + 1));
        let fv = problem.f(n, x, y);
        if !fv.is_finite() {
            return Err(MonotoneError::NonFinite { n: n + 1, rule: "f" });
        }
        let psi = fv - p * x - k * y;
        builder.set_difference(n, p / (1.0 - k), psi / (1.0 - k));
    }
    for k in 1..=partition.impulse_count() {
        let nk = partition.point(k);
        let t = coeffs.t(k);
        let z = eta.at(nk - 1);
        let fv = problem.impulse(k, z);
        if !fv.is_finite() {
            return Err(MonotoneError::NonFinite { n: nk, rule: "F" });
        }
        builder.set_impulse(k, t, fv - t * z);
    }
    for (k, n) in partition.all_sustained_nodes() {
        let (m, l) = (coeffs.m(n), coeffs.l(n));
        let (x, y) = (eta.at(n), eta.at(partition.point(k)));
        let gv = problem.g(n, x, y);
        if !gv.is_finite() {
            return Err(MonotoneError::NonFinite { n, rule: "g" });
        }
        builder.set_sustained(n, m, l, gv - m * x - l * y);
    }
    Ok(builder.build()?)
}

/// One monotone-iteration step: the solution of `linearize(problem, coeffs, eta)`.
pub fn sweep(
    problem: &NonlinearNIDE,
    coeffs: &IterationCoefficients,
    eta: &GridFunction,
) -> Result<GridFunction, MonotoneError> {
    Ok(solve_forward(&linearize(problem, coeffs, eta)?)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    /// Stop once `sup |β − α| ≤ tol` ...
    pub tol: f64,
    /// ... and both one-step residuals are at most `residual_tol`.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Keep every iterate in the result.
    pub trace: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions {
            tol: 1e-10,
            residual_tol: 1e-8,
            max_iter: 500,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IterationStatus {
    Converged,
    MaxIterReached,
    MonotonicityBreach,
}

impl fmt::Display for IterationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IterationStatus::Converged => "Converged",
            IterationStatus::MaxIterReached => "MaxIterReached",
            IterationStatus::MonotonicityBreach => "MonotonicityBreach",
        })
    }
}

/// Which link of `α⁽ʲ⁻¹⁾ ≤ α⁽ʲ⁾ ≤ β⁽ʲ⁾ ≤ β⁽ʲ⁻¹⁾` broke.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainLink {
    LowerIncreasing,
    Ordered,
    UpperDecreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Breach {
    pub iteration: usize,
    pub link: ChainLink,
    pub n: i64,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationResult {
    /// `α⁽⁰⁾ … α⁽ᴶ⁾`; empty unless tracing.
    pub alphas: Vec<GridFunction>,
    pub betas: Vec<GridFunction>,
    pub a: GridFunction,
    pub b: GridFunction,
    pub status: IterationStatus,
    pub iterations: usize,
    pub gap: f64,
    pub residual_a: f64,
    pub residual_b: f64,
    pub breach: Option<Breach>,
}

fn first_excess(lower: &GridFunction, upper: &GridFunction) -> Option<(i64, f64)> {
    lower
        .iter()
        .zip(upper.values())
        .map(|((n, a), b)| (n, a - b))
        .find(|&(_, excess)| excess > SLACK)
}

/// Iterates the sweep from `alpha0` and `beta0` until the bracket closes on
/// a fixed point, `max_iter` sweeps were made, or the monotone chain breaks.
pub fn run_monotone_iteration(
    problem: &NonlinearNIDE,
    coeffs: &IterationCoefficients,
    alpha0: &GridFunction,
    beta0: &GridFunction,
    options: &IterationOptions,
) -> Result<IterationResult, MonotoneError> {
    let lower = verify_lower(problem, alpha0)?;
    if !lower.passed() {
        return Err(MonotoneError::InvalidInitialBracket(format!(
            "alpha0 is not a lower solution (defect {:e} at node {})",
            lower.worst_defect, lower.worst_node
        )));
    }
    let upper = verify_upper(problem, beta0)?;
    if !upper.passed() {
        return Err(MonotoneError::InvalidInitialBracket(format!(
            "beta0 is not an upper solution (defect {:e} at node {})",
            upper.worst_defect, upper.worst_node
        )));
    }
    if let Some((n, excess)) = first_excess(alpha0, beta0) {
        return Err(MonotoneError::InvalidInitialBracket(format!(
            "alpha0 exceeds beta0 by {excess:e} at node {n}"
        )));
    }

    let mut alpha = alpha0.clone();
    let mut beta = beta0.clone();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    if options.trace {
        alphas.push(alpha.clone());
        betas.push(beta.clone());
    }
    let mut iterations = 0;
    let mut breach = None;

    let status = loop {
        let gap = sup_norm_diff(&alpha, &beta)?;
        if gap <= options.tol
            && residual(problem, &alpha)? <= options.residual_tol
            && residual(problem, &beta)? <= options.residual_tol
        {
            break IterationStatus::Converged;
        }
        if iterations >= options.max_iter {
            break IterationStatus::MaxIterReached;
        }

        let next_alpha = sweep(problem, coeffs, &alpha)?;
        let next_beta = sweep(problem, coeffs, &beta)?;
        iterations += 1;

        let checks = [
            (ChainLink::LowerIncreasing, &alpha, &next_alpha),
            (ChainLink::Ordered, &next_alpha, &next_beta),
            (ChainLink::UpperDecreasing, &next_beta, &beta),
        ];
        breach = checks.iter().find_map(|(link, lo, hi)| {
            first_excess(lo, hi).map(|(n, excess)| Breach {
                iteration: iterations,
                link: *link,
                n,
                excess,
            })
        });

        alpha = next_alpha;
        beta = next_beta;
        if options.trace {
            alphas.push(alpha.clone());
            betas.push(beta.clone());
        }
        if breach.is_some() {
            break IterationStatus::MonotonicityBreach;
        }
    };

    Ok(IterationResult {
        gap: sup_norm_diff(&alpha, &beta)?,
        residual_a: residual(problem, &alpha)?,
        residual_b: residual(problem, &beta)?,
        alphas,
        betas,
        a: alpha,
        b: beta,
        status,
        iterations,
        breach,
    })
}
