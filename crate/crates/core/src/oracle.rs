//! Direct solver for the nonlinear problem by forward marching.
//!
//! Implicit relations are solved per node with a sign-change scan over a
//! fixed bracket followed by bisection. Nothing here depends on the
//! iteration machinery, so its output serves as ground truth for it.

use std::sync::Arc;

use thiserror::Error;

use crate::grid::{GridError, GridFunction, NodeKind};
use crate::monotone::NonlinearNIDE;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("no sign change of the implicit relation in [{lo}, {hi}]{}", node_suffix(*.n))]
    NoRootInBracket { lo: f64, hi: f64, n: Option<i64> },
    #[error("non-finite value at x = {x}{}", node_suffix(*.n))]
    NonFinite { x: f64, n: Option<i64> },
    #[error("invalid root options: {0}")]
    InvalidOptions(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn node_suffix(n: Option<i64>) -> String {
    n.map(|n| format!(" at node {n}")).unwrap_or_default()
}

impl OracleError {
    fn at_node(self, node: i64) -> Self {
        match self {
            OracleError::NoRootInBracket { lo, hi, .. } => OracleError::NoRootInBracket {
                lo,
                hi,
                n: Some(node),
            },
            OracleError::NonFinite { x, .. } => OracleError::NonFinite { x, n: Some(node) },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tol: f64,
    pub max_bisect: usize,
    pub scan_points: usize,
}

impl RootOptions {
    pub const DEFAULT_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_BISECT: usize = 200;
    pub const DEFAULT_SCAN_POINTS: usize = 256;

    pub fn with_bracket(lo: f64, hi: f64) -> Self {
        RootOptions {
            bracket_lo: lo,
            bracket_hi: hi,
            tol: Self::DEFAULT_TOL,
            max_bisect: Self::DEFAULT_MAX_BISECT,
            scan_points: Self::DEFAULT_SCAN_POINTS,
        }
    }

    /// `[x0 - 100, x0 + 100]`.
    pub fn around(x0: f64) -> Self {
        Self::with_bracket(x0 - 100.0, x0 + 100.0)
    }

    /// `[min α - 5(1 + span), max β + 5(1 + span)]` with `span = max β - min α`.
    pub fn for_sector(alpha: &GridFunction, beta: &GridFunction) -> Self {
        let (lo, hi) = (alpha.min(), beta.max());
        let pad = 5.0 * (1.0 + (hi - lo));
        Self::with_bracket(lo - pad, hi + pad)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.bracket_lo.is_finite() && self.bracket_hi.is_finite()) {
            return Err(OracleError::InvalidOptions("bracket bounds must be finite"));
        }
        if !(self.bracket_lo < self.bracket_hi) {
            return Err(OracleError::InvalidOptions("bracket_lo must be below bracket_hi"));
        }
        if !(self.tol > 0.0) {
            return Err(OracleError::InvalidOptions("tol must be positive"));
        }
        if self.scan_points < 2 {
            return Err(OracleError::InvalidOptions("scan_points must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    /// Leftmost root found by the scan.
    pub x: f64,
    pub value: f64,
    /// More than one root was seen in the bracket.
    pub multiple: bool,
    pub roots_seen: usize,
}

fn eval(h: &mut impl FnMut(f64) -> f64, x: f64) -> Result<f64, OracleError> {
    let v = h(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(OracleError::NonFinite { x, n: None })
    }
}

fn bisect(
    h: &mut impl FnMut(f64) -> f64,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    opts: &RootOptions,
) -> Result<(f64, f64), OracleError> {
    let mut fb = eval(h, b)?;
    for _ in 0..opts.max_bisect {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = eval(h, mid)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Ok(if fa.abs() <= fb.abs() { (a, fa) } else { (b, fb) })
}

/// Finds the leftmost root of `h` in the bracket.
///
/// The bracket is scanned on `scan_points` uniform points; an exact zero on
/// a scan point or a strict sign change between neighbours counts as one
/// root. The leftmost sign change is refined by bisection until the
/// interval stops shrinking or `max_bisect` halvings were done.
pub fn scalar_root(mut h: impl FnMut(f64) -> f64, opts: &RootOptions) -> Result<Root, OracleError> {
    opts.validate()?;
    let (lo, hi) = (opts.bracket_lo, opts.bracket_hi);
    let count = opts.scan_points;
    let grid: Vec<f64> = (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    let values = grid
        .iter()
        .map(|&x| eval(&mut h, x))
        .collect::<Result<Vec<_>, _>>()?;

    let mut first: Option<(usize, bool)> = None;
    let mut roots_seen = 0;
    for i in 0..count {
        let exact = values[i] == 0.0;
        let change = i + 1 < count
            && values[i] != 0.0
            && values[i + 1] != 0.0
            && (values[i] < 0.0) != (values[i + 1] < 0.0);
        if exact || change {
            roots_seen += 1;
            if first.is_none() {
                first = Some((i, exact));
            }
        }
    }

    let (x, value) = match first {
        None => return Err(OracleError::NoRootInBracket { lo, hi, n: None }),
        Some((i, true)) => (grid[i], 0.0),
        Some((i, false)) => bisect(&mut h, grid[i], values[i], grid[i + 1], opts)?,
    };
    Ok(Root {
        x,
        value,
        multiple: roots_seen > 1,
        roots_seen,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectSolution {
    pub u: GridFunction,
    /// Nodes whose implicit relation had more than one root in the bracket.
    pub multiple_roots: Vec<i64>,
}

impl DirectSolution {
    pub fn is_unique(&self) -> bool {
        self.multiple_roots.is_empty()
    }
}

/// Marches from `n_0` to `n_{p+1}`, solving `y = f(n-1, u(n-1), y)` and
/// `x = g(n, x, u(n_k))` for their leftmost roots.
pub fn solve_nonlinear_direct(
    problem: &NonlinearNIDE,
    opts: &RootOptions,
) -> Result<DirectSolution, OracleError> {
    opts.validate()?;
    let partition = problem.partition();
    let n0 = partition.start();
    let mut u = vec![0.0; partition.len()];
    let mut multiple_roots = Vec::new();

    for (i, &kind) in partition.kinds().iter().enumerate() {
        let n = n0 + i as i64;
        let value = match kind {
            NodeKind::Initial => problem.x0(),
            NodeKind::Impulse(k) => problem.impulse(k, u[i - 1]),
            NodeKind::Difference(_) => {
                let previous = u[i - 1];
                let root = scalar_root(|y| y - problem.f(n - 1, previous, y), opts)
                    .map_err(|e| e.at_node(n))?;
                if root.multiple {
                    multiple_roots.push(n);
                }
                root.x
            }
            NodeKind::Sustained(k) => {
                let anchor = u[(partition.point(k) - n0) as usize];
                let root = scalar_root(|x| x - problem.g(n, x, anchor), opts)
                    .map_err(|e| e.at_node(n))?;
                if root.multiple {
                    multiple_roots.push(n);
                }
                root.x
            }
        };
        if !value.is_finite() {
            return Err(OracleError::NonFinite { x: value, n: Some(n) });
        }
        u[i] = value;
    }

    Ok(DirectSolution {
        u: GridFunction::new(Arc::clone(partition), u)?,
        multiple_roots,
    })
}
