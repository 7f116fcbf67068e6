//! Linear difference equations with non-instantaneous impulses.
//!
//! ```text
//! u(n+1) = Q_n u(n) + σ_n                 n ∈ ∪ I_k
//! u(n_k) = T_k u(n_k - 1) + μ_k           k ∈ [1, p]
//! u(n)   = M_n u(n) + L_n u(n_k) + γ_n    n ∈ J_k
//! u(n_0) = x_0
//! ```
//!
//! [`solve_forward`] marches node by node and is the canonical solver.
//! [`solve_closed_form`] evaluates the explicit sum-of-products
//! representation built from [`ClosedFormTables`] and serves as an
//! independent cross-check.

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{GridError, GridFunction, NodeKind, TimePartition};
use crate::SLACK;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("sustained node {n} has M_n = 1; the sustained relation cannot be solved")]
    SingularSustained { n: i64 },
    #[error("non-finite value at node {n}")]
    NonFinite { n: i64 },
    #[error("coefficient {name} is not finite at {at}")]
    NonFiniteCoefficient { name: &'static str, at: i64 },
    #[error("table {name} has {got} entries, expected {expected}")]
    TableLength {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Coefficient tables listed per index set: `q`, `sigma` follow `∪ I_k` in
/// increasing order, `t`, `mu` follow `k = 1..=p`, and `m`, `l`, `gamma`
/// follow `∪ J_k` in increasing order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearCoefficients {
    pub q: Vec<f64>,
    pub sigma: Vec<f64>,
    pub t: Vec<f64>,
    pub mu: Vec<f64>,
    pub m: Vec<f64>,
    pub l: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// A validated linear initial value problem.
///
/// Per-node tables are stored densely over the whole horizon; entries
/// outside the relevant index set are zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNIDE {
    partition: Arc<TimePartition>,
    q: Vec<f64>,
    sigma: Vec<f64>,
    t: Vec<f64>,
    mu: Vec<f64>,
    m: Vec<f64>,
    l: Vec<f64>,
    gamma: Vec<f64>,
    x0: f64,
}

impl LinearNIDE {
    pub fn new(
        partition: Arc<TimePartition>,
        coeffs: LinearCoefficients,
        x0: f64,
    ) -> Result<Self, LinearError> {
        let sources: Vec<i64> = partition.all_difference_sources().collect();
        let sustained: Vec<i64> = partition.all_sustained_nodes().map(|(_, n)| n).collect();
        let p = partition.impulse_count();
        check_len("Q", &coeffs.q, sources.len())?;
        check_len("sigma", &coeffs.sigma, sources.len())?;
        check_len("T", &coeffs.t, p)?;
        check_len("mu", &coeffs.mu, p)?;
        check_len("M", &coeffs.m, sustained.len())?;
        check_len("L", &coeffs.l, sustained.len())?;
        check_len("gamma", &coeffs.gamma, sustained.len())?;

        let mut builder = LinearNIDE::builder(partition, x0);
        for (i, &n) in sources.iter().enumerate() {
            builder.set_difference(n, coeffs.q[i], coeffs.sigma[i]);
        }
        for k in 1..=p {
            builder.set_impulse(k, coeffs.t[k - 1], coeffs.mu[k - 1]);
        }
        for (i, &n) in sustained.iter().enumerate() {
            builder.set_sustained(n, coeffs.m[i], coeffs.l[i], coeffs.gamma[i]);
        }
        builder.build()
    }

    pub fn builder(partition: Arc<TimePartition>, x0: f64) -> LinearBuilder {
        let len = partition.len();
        let p = partition.impulse_count();
        LinearBuilder {
            problem: LinearNIDE {
                partition,
                q: vec![0.0; len],
                sigma: vec![0.0; len],
                t: vec![0.0; p],
                mu: vec![0.0; p],
                m: vec![0.0; len],
                l: vec![0.0; len],
                gamma: vec![0.0; len],
                x0,
            },
        }
    }

    /// Builds a problem from per-index closures: `difference(n) = (Q_n, σ_n)`,
    /// `impulse(k) = (T_k, μ_k)`, `sustained(n) = (M_n, L_n, γ_n)`.
    pub fn from_fns(
        partition: Arc<TimePartition>,
        x0: f64,
        mut difference: impl FnMut(i64) -> (f64, f64),
        mut impulse: impl FnMut(usize) -> (f64, f64),
        mut sustained: impl FnMut(i64) -> (f64, f64, f64),
    ) -> Result<Self, LinearError> {
        let mut builder = LinearNIDE::builder(partition.clone(), x0);
        for n in partition.all_difference_sources() {
            let (q, s) = difference(n);
            builder.set_difference(n, q, s);
        }
        for k in 1..=partition.impulse_count() {
            let (t, mu) = impulse(k);
            builder.set_impulse(k, t, mu);
        }
        for (_, n) in partition.all_sustained_nodes() {
            let (m, l, g) = sustained(n);
            builder.set_sustained(n, m, l, g);
        }
        builder.build()
    }

    pub fn partition(&self) -> &Arc<TimePartition> {
        &self.partition
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    fn slot(&self, n: i64) -> usize {
        (n - self.partition.start()) as usize
    }

    pub fn q(&self, n: i64) -> f64 {
        self.q[self.slot(n)]
    }

    pub fn sigma(&self, n: i64) -> f64 {
        self.sigma[self.slot(n)]
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t[k - 1]
    }

    pub fn mu(&self, k: usize) -> f64 {
        self.mu[k - 1]
    }

    pub fn m(&self, n: i64) -> f64 {
        self.m[self.slot(n)]
    }

    pub fn l(&self, n: i64) -> f64 {
        self.l[self.slot(n)]
    }

    pub fn gamma(&self, n: i64) -> f64 {
        self.gamma[self.slot(n)]
    }

    /// The homogeneous coefficients, as used by the comparison checks.
    pub fn comparison_coefficients(&self) -> ComparisonCoefficients {
        ComparisonCoefficients {
            partition: self.partition.clone(),
            q: self.q.clone(),
            t: self.t.clone(),
            m: self.m.clone(),
            l: self.l.clone(),
        }
    }
}

fn check_len(name: &'static str, table: &[f64], expected: usize) -> Result<(), LinearError> {
    if table.len() == expected {
        Ok(())
    } else {
        Err(LinearError::TableLength {
            name,
            expected,
            got: table.len(),
        })
    }
}

/// Incremental construction of a [`LinearNIDE`]. Unset coefficients are 0.
#[derive(Debug, Clone)]
pub struct LinearBuilder {
    problem: LinearNIDE,
}

impl LinearBuilder {
    pub fn set_difference(&mut self, n: i64, q: f64, sigma: f64) -> &mut Self {
        let i = self.problem.slot(n);
        self.problem.q[i] = q;
        self.problem.sigma[i] = sigma;
        self
    }

    pub fn set_impulse(&mut self, k: usize, t: f64, mu: f64) -> &mut Self {
        self.problem.t[k - 1] = t;
        self.problem.mu[k - 1] = mu;
        self
    }

    pub fn set_sustained(&mut self, n: i64, m: f64, l: f64, gamma: f64) -> &mut Self {
        let i = self.problem.slot(n);
        self.problem.m[i] = m;
        self.problem.l[i] = l;
        self.problem.gamma[i] = gamma;
        self
    }

    pub fn build(&self) -> Result<LinearNIDE, LinearError> {
        let problem = self.problem.clone();
        let partition = &problem.partition;
        if !problem.x0.is_finite() {
            return Err(LinearError::NonFiniteCoefficient {
                name: "x0",
                at: partition.start(),
            });
        }
        for n in partition.all_difference_sources() {
            finite("Q", problem.q(n), n)?;
            finite("sigma", problem.sigma(n), n)?;
        }
        for k in 1..=partition.impulse_count() {
            finite("T", problem.t(k), k as i64)?;
            finite("mu", problem.mu(k), k as i64)?;
        }
        for (_, n) in partition.all_sustained_nodes() {
            finite("M", problem.m(n), n)?;
            finite("L", problem.l(n), n)?;
            finite("gamma", problem.gamma(n), n)?;
            if problem.m(n) == 1.0 {
                return Err(LinearError::SingularSustained { n });
            }
        }
        Ok(problem)
    }
}

fn finite(name: &'static str, value: f64, at: i64) -> Result<(), LinearError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(LinearError::NonFiniteCoefficient { name, at })
    }
}

/// Marches the linear problem from `n_0` to `n_{p+1}`.
pub fn solve_forward(problem: &LinearNIDE) -> Result<GridFunction, LinearError> {
    let partition = problem.partition();
    let n0 = partition.start();
    let mut u = vec![0.0; partition.len()];
    for (i, &kind) in partition.kinds().iter().enumerate() {
        let n = n0 + i as i64;
        let value = match kind {
            NodeKind::Initial => problem.x0,
            NodeKind::Difference(_) => problem.q(n - 1) * u[i - 1] + problem.sigma(n - 1),
            NodeKind::Impulse(k) => problem.t(k) * u[i - 1] + problem.mu(k),
            NodeKind::Sustained(k) => {
                let anchor = u[(partition.point(k) - n0) as usize];
                let m = problem.m(n);
                if m == 1.0 {
                    return Err(LinearError::SingularSustained { n });
                }
                (problem.l(n) * anchor + problem.gamma(n)) / (1.0 - m)
            }
        };
        if !value.is_finite() {
            return Err(LinearError::NonFinite { n });
        }
        u[i] = value;
    }
    Ok(GridFunction::new(partition.clone(), u)?)
}

/// Auxiliary tables of the explicit solution formula.
///
/// `sigma_ext` and `q_ext` cover `[n_0 - 1, n_{p+1}]`: `σ_{n_0-1} = x_0`,
/// and off `∪ I_k` the conventions `σ_n = 0`, `Q_n = 1` apply.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormTables {
    start: i64,
    pub n_factor: Vec<f64>,
    pub tau: Vec<f64>,
    pub r: Vec<f64>,
    pub zeta: Vec<f64>,
    pub sigma_ext: Vec<f64>,
    pub q_ext: Vec<f64>,
}

impl ClosedFormTables {
    fn slot(&self, n: i64) -> usize {
        (n - self.start) as usize
    }

    /// `N(n) = L_n / (1 - M_n)` on `∪ J_k`, else 1.
    pub fn n_at(&self, n: i64) -> f64 {
        self.n_factor[self.slot(n)]
    }

    /// `τ(n) = γ_n / (1 - M_n)` on `∪ J_k`, else 0.
    pub fn tau_at(&self, n: i64) -> f64 {
        self.tau[self.slot(n)]
    }

    /// `R(n_k) = T_k`, `R(n_k + d_k + 1) = N(n_k + d_k)`, else 1.
    pub fn r_at(&self, n: i64) -> f64 {
        self.r[self.slot(n)]
    }

    /// `ζ(n_k) = μ_k`, `ζ(n_k + d_k + 1) = τ(n_k + d_k)`, else 0.
    pub fn zeta_at(&self, n: i64) -> f64 {
        self.zeta[self.slot(n)]
    }

    /// Extended `σ_n` for `n ∈ [n_0 - 1, n_{p+1}]`.
    pub fn sigma_at(&self, n: i64) -> f64 {
        self.sigma_ext[(n - self.start + 1) as usize]
    }

    /// Extended `Q_n` for `n ∈ [n_0 - 1, n_{p+1}]`.
    pub fn q_at(&self, n: i64) -> f64 {
        self.q_ext[(n - self.start + 1) as usize]
    }
}

pub fn closed_form_tables(problem: &LinearNIDE) -> Result<ClosedFormTables, LinearError> {
    let partition = problem.partition();
    let len = partition.len();
    let start = partition.start();
    let mut tables = ClosedFormTables {
        start,
        n_factor: vec![1.0; len],
        tau: vec![0.0; len],
        r: vec![1.0; len],
        zeta: vec![0.0; len],
        sigma_ext: vec![0.0; len + 1],
        q_ext: vec![1.0; len + 1],
    };
    tables.sigma_ext[0] = problem.x0();
    for n in partition.all_difference_sources() {
        let i = (n - start + 1) as usize;
        tables.sigma_ext[i] = problem.sigma(n);
        tables.q_ext[i] = problem.q(n);
    }
    for (_, n) in partition.all_sustained_nodes() {
        let m = problem.m(n);
        if m == 1.0 {
            return Err(LinearError::SingularSustained { n });
        }
        let i = (n - start) as usize;
        tables.n_factor[i] = problem.l(n) / (1.0 - m);
        tables.tau[i] = problem.gamma(n) / (1.0 - m);
    }
    for k in 1..=partition.impulse_count() {
        let nk = partition.point(k);
        let last = nk + partition.duration(k);
        let i = (nk - start) as usize;
        tables.r[i] = problem.t(k);
        tables.zeta[i] = problem.mu(k);
        let after = (last + 1 - start) as usize;
        tables.r[after] = tables.n_at(last);
        tables.zeta[after] = tables.tau_at(last);
    }
    Ok(tables)
}

/// Evaluates the explicit solution
///
/// ```text
/// u(n) = N(n) [ Σ_{j=n_0-1}^{n-1} σ_j Π_{i=j+2}^{n} R(i) Π_{i=j+1}^{n-1} Q_i
///             + Σ_{j=n_0}^{n}   ζ(j) Π_{i=j+1}^{n} R(i) Π_{i=j-1}^{n-1} Q_i ] + τ(n)
/// ```
///
/// A forcing `σ_j` enters at node `j + 1` and is not scaled by `R(j + 1)`;
/// the jump term `ζ(j)` at `j = n_k + d_k + 1` is carried through
/// `Q_{n_k + d_k}` like the anchor it replaces.
pub fn solve_closed_form(problem: &LinearNIDE) -> Result<GridFunction, LinearError> {
    let tables = closed_form_tables(problem)?;
    let partition = problem.partition();
    let n0 = partition.start();
    let mut u = Vec::with_capacity(partition.len());
    for n in partition.nodes() {
        let mut forcing = 0.0;
        let (mut r_prod, mut q_prod) = (1.0, 1.0);
        for j in (n0 - 1..n).rev() {
            forcing += tables.sigma_at(j) * r_prod * q_prod;
            if j > n0 - 1 {
                r_prod *= tables.r_at(j + 1);
                q_prod *= tables.q_at(j);
            }
        }

        let mut jumps = 0.0;
        let mut r_prod = 1.0;
        let mut q_prod = tables.q_at(n - 1);
        for j in (n0..=n).rev() {
            jumps += tables.zeta_at(j) * r_prod * q_prod;
            if j > n0 {
                r_prod *= tables.r_at(j);
                q_prod *= tables.q_at(j - 2);
            }
        }

        let value = tables.n_at(n) * (forcing + jumps) + tables.tau_at(n);
        if !value.is_finite() {
            return Err(LinearError::NonFinite { n });
        }
        u.push(value);
    }
    Ok(GridFunction::new(partition.clone(), u)?)
}

/// Where a comparison condition or inequality applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Node(i64),
    Impulse(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignViolation {
    pub site: Site,
    pub condition: &'static str,
    pub value: f64,
}

/// Homogeneous coefficients `Q`, `T`, `M`, `L` of a linear problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCoefficients {
    partition: Arc<TimePartition>,
    q: Vec<f64>,
    t: Vec<f64>,
    m: Vec<f64>,
    l: Vec<f64>,
}

impl ComparisonCoefficients {
    /// `q(n) = Q_n` on `∪ I_k`, `t(k) = T_k`, `ml(n) = (M_n, L_n)` on `∪ J_k`.
    pub fn from_fns(
        partition: Arc<TimePartition>,
        mut q: impl FnMut(i64) -> f64,
        mut t: impl FnMut(usize) -> f64,
        mut ml: impl FnMut(i64) -> (f64, f64),
    ) -> Self {
        let len = partition.len();
        let start = partition.start();
        let mut coeffs = ComparisonCoefficients {
            q: vec![0.0; len],
            t: (1..=partition.impulse_count()).map(&mut t).collect(),
            m: vec![0.0; len],
            l: vec![0.0; len],
            partition: partition.clone(),
        };
        for n in partition.all_difference_sources() {
            coeffs.q[(n - start) as usize] = q(n);
        }
        for (_, n) in partition.all_sustained_nodes() {
            let (m, l) = ml(n);
            coeffs.m[(n - start) as usize] = m;
            coeffs.l[(n - start) as usize] = l;
        }
        coeffs
    }

    pub fn partition(&self) -> &Arc<TimePartition> {
        &self.partition
    }

    fn slot(&self, n: i64) -> usize {
        (n - self.partition.start()) as usize
    }

    pub fn q(&self, n: i64) -> f64 {
        self.q[self.slot(n)]
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

/// Outcome of the sign-condition check; empty `violations` means Pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisVerdict {
    pub violations: Vec<SignViolation>,
}

impl HypothesisVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `Q_n > 0`, `T_k > 0`, `L_n > 0` and `M_n < 1`, listing every failure.
pub fn check_comparison_hypotheses(coeffs: &ComparisonCoefficients) -> HypothesisVerdict {
    let partition = coeffs.partition();
    let mut violations = Vec::new();
    for n in partition.all_difference_sources() {
        let q = coeffs.q(n);
        if !(q > 0.0) {
            violations.push(SignViolation {
                site: Site::Node(n),
                condition: "Q_n > 0",
                value: q,
            });
        }
    }
    for k in 1..=partition.impulse_count() {
        let t = coeffs.t(k);
        if !(t > 0.0) {
            violations.push(SignViolation {
                site: Site::Impulse(k),
                condition: "T_k > 0",
                value: t,
            });
        }
    }
    for (_, n) in partition.all_sustained_nodes() {
        let (m, l) = (coeffs.m(n), coeffs.l(n));
        if !(l > 0.0) {
            violations.push(SignViolation {
                site: Site::Node(n),
                condition: "L_n > 0",
                value: l,
            });
        }
        if !(m < 1.0) {
            violations.push(SignViolation {
                site: Site::Node(n),
                condition: "M_n < 1",
                value: m,
            });
        }
    }
    HypothesisVerdict { violations }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Whether `m` satisfies the four comparison inequalities within [`SLACK`].
    pub inequalities_hold: bool,
    /// Largest violation of any inequality (non-positive when they hold).
    pub worst_defect: f64,
    /// Whether `m(n) ≤ SLACK` everywhere.
    pub conclusion_holds: bool,
    pub max_value: f64,
}

/// Evaluates the inequalities
///
/// ```text
/// m(n+1) ≤ Q_n m(n)               n ∈ ∪ I_k
/// m(n_k) ≤ T_k m(n_k - 1)
/// m(n)   ≤ M_n m(n) + L_n m(n_k)  n ∈ J_k
/// m(n_0) ≤ 0
/// ```
///
/// and whether `m` is non-positive. Under passing sign conditions the first
/// implies the second.
pub fn comparison_conclusion_holds(
    m: &GridFunction,
    coeffs: &ComparisonCoefficients,
) -> Result<ComparisonReport, LinearError> {
    let partition = coeffs.partition();
    if !(Arc::ptr_eq(m.partition(), partition) || **m.partition() == **partition) {
        return Err(GridError::DomainMismatch.into());
    }
    let mut worst = m.at(partition.start());
    for n in partition.all_difference_sources() {
        worst = worst.max(m.at(n + 1) - coeffs.q(n) * m.at(n));
    }
    for k in 1..=partition.impulse_count() {
        let nk = partition.point(k);
        worst = worst.max(m.at(nk) - coeffs.t(k) * m.at(nk - 1));
    }
    for (k, n) in partition.all_sustained_nodes() {
        let anchor = m.at(partition.point(k));
        worst = worst.max(m.at(n) - coeffs.m(n) * m.at(n) - coeffs.l(n) * anchor);
    }
    let max_value = m.max();
    Ok(ComparisonReport {
        inequalities_hold: worst <= SLACK,
        worst_defect: worst,
        conclusion_holds: max_value <= SLACK,
        max_value,
    })
}
