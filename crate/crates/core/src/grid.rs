//! Partitioned integer time horizon and real-valued functions on it.
//!
//! A [`TimePartition`] is built from impulse points `n_0 < n_1 < … < n_{p+1}`
//! and sustained-impulse durations `d_1 … d_p`. Between two consecutive
//! points the state evolves as
//!
//! ```text
//! n_k            impulse node          x(n_k) = F(k, x(n_k - 1))
//! n_k+1..n_k+d_k sustained nodes (J_k) x(n)   = g(n, x(n), x(n_k))
//! n_k+d_k+1..    difference nodes      x(n)   = f(n-1, x(n-1), x(n))
//! ```
//!
//! with `d_0 = 0` and `n_0` carrying the initial condition. The set of
//! difference sources `I_k = [n_k + d_k, n_{k+1} - 2]` (`n_{p+1} - 1` for the
//! last interval) is the set of `n` for which the difference rule defines
//! `x(n + 1)`.

use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("a partition needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("expected {expected} durations for {points} points, got {got}")]
    DurationCount {
        points: usize,
        expected: usize,
        got: usize,
    },
    #[error("points must be strictly increasing: n_{index} = {value} follows {previous}")]
    NotIncreasing {
        index: usize,
        value: i64,
        previous: i64,
    },
    #[error("n_{index} = {value} must be at least n_{} + 3 = {}", index - 1, previous + 3)]
    SpacingViolation {
        index: usize,
        value: i64,
        previous: i64,
    },
    #[error("d_{index} = {value} must lie in [1, {max}]")]
    DurationViolation { index: usize, value: i64, max: i64 },
    #[error("node {n} lies outside [{start}, {end}]")]
    OutOfDomain { n: i64, start: i64, end: i64 },
    #[error("grid functions are defined on different partitions")]
    DomainMismatch,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value at node {n} is not finite ({value})")]
    NonFinite { n: i64, value: f64 },
}

/// The defining rule for the state at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// `x(n_0) = x_0`.
    Initial,
    /// `x(n) = f(n - 1, x(n - 1), x(n))` with `n - 1 ∈ I_k`.
    Difference(usize),
    /// `x(n_k) = F(k, x(n_k - 1))`.
    Impulse(usize),
    /// `x(n) = g(n, x(n), x(n_k))` with `n ∈ J_k`.
    Sustained(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimePartition {
    points: Vec<i64>,
    durations: Vec<i64>,
    kinds: Vec<NodeKind>,
    // interval index k with n ∈ I_k, per node
    source_of: Vec<Option<usize>>,
}

impl TimePartition {
    /// Validates the points and durations and precomputes the node table.
    pub fn new(points: Vec<i64>, durations: Vec<i64>) -> Result<Self, GridError> {
        if points.len() < 2 {
            return Err(GridError::TooFewPoints(points.len()));
        }
        let p = points.len() - 2;
        if durations.len() != p {
            return Err(GridError::DurationCount {
                points: points.len(),
                expected: p,
                got: durations.len(),
            });
        }
        for i in 1..points.len() {
            let (previous, value) = (points[i - 1], points[i]);
            if value <= previous {
                return Err(GridError::NotIncreasing {
                    index: i,
                    value,
                    previous,
                });
            }
            if value < previous + 3 {
                return Err(GridError::SpacingViolation {
                    index: i,
                    value,
                    previous,
                });
            }
        }
        for (i, &d) in durations.iter().enumerate() {
            let k = i + 1;
            let max = points[k + 1] - points[k] - 2;
            if d < 1 || d > max {
                return Err(GridError::DurationViolation {
                    index: k,
                    value: d,
                    max,
                });
            }
        }

        let mut partition = TimePartition {
            points,
            durations,
            kinds: Vec::new(),
            source_of: Vec::new(),
        };
        partition.build_tables();
        Ok(partition)
    }

    fn build_tables(&mut self) {
        let len = self.len();
        let n0 = self.start();
        let mut kinds = vec![NodeKind::Initial; len];
        let mut source_of = vec![None; len];
        for k in 0..=self.impulse_count() {
            for n in self.difference_sources(k) {
                source_of[(n - n0) as usize] = Some(k);
                kinds[(n + 1 - n0) as usize] = NodeKind::Difference(k);
            }
            if k >= 1 {
                kinds[(self.points[k] - n0) as usize] = NodeKind::Impulse(k);
                for n in self.sustained_nodes(k) {
                    kinds[(n - n0) as usize] = NodeKind::Sustained(k);
                }
            }
        }
        self.kinds = kinds;
        self.source_of = source_of;
    }

    pub fn points(&self) -> &[i64] {
        &self.points
    }

    pub fn durations(&self) -> &[i64] {
        &self.durations
    }

    /// Number of impulse points `p`.
    pub fn impulse_count(&self) -> usize {
        self.points.len() - 2
    }

    /// `n_k`, for `k` in `0..=p+1`.
    pub fn point(&self, k: usize) -> i64 {
        self.points[k]
    }

    /// `d_k`, with `d_0 = 0`.
    pub fn duration(&self, k: usize) -> i64 {
        if k == 0 {
            0
        } else {
            self.durations[k - 1]
        }
    }

    pub fn start(&self) -> i64 {
        self.points[0]
    }

    pub fn end(&self) -> i64 {
        *self.points.last().unwrap()
    }

    /// Number of nodes in `[n_0, n_{p+1}]`.
    pub fn len(&self) -> usize {
        (self.end() - self.start() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> RangeInclusive<i64> {
        self.start()..=self.end()
    }

    pub fn contains(&self, n: i64) -> bool {
        self.nodes().contains(&n)
    }

    /// Dense index `n - n_0`.
    pub fn index(&self, n: i64) -> Result<usize, GridError> {
        if self.contains(n) {
            Ok((n - self.start()) as usize)
        } else {
            Err(GridError::OutOfDomain {
                n,
                start: self.start(),
                end: self.end(),
            })
        }
    }

    /// `I_k`, the difference sources of interval `k ∈ [0, p]`.
    pub fn difference_sources(&self, k: usize) -> RangeInclusive<i64> {
        let p = self.impulse_count();
        let lo = self.points[k] + self.duration(k);
        let hi = if k < p {
            self.points[k + 1] - 2
        } else {
            self.points[k + 1] - 1
        };
        lo..=hi
    }

    /// `J_k`, the sustained nodes of impulse `k ∈ [1, p]`.
    pub fn sustained_nodes(&self, k: usize) -> RangeInclusive<i64> {
        debug_assert!(k >= 1 && k <= self.impulse_count());
        self.points[k] + 1..=self.points[k] + self.duration(k)
    }

    /// All of `∪ I_k` in increasing order.
    pub fn all_difference_sources(&self) -> impl Iterator<Item = i64> + '_ {
        (0..=self.impulse_count()).flat_map(move |k| self.difference_sources(k))
    }

    /// All of `∪ J_k` in increasing order, paired with their impulse index.
    pub fn all_sustained_nodes(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        (1..=self.impulse_count()).flat_map(move |k| self.sustained_nodes(k).map(move |n| (k, n)))
    }

    /// Interval index `k` with `n ∈ I_k`, if any.
    pub fn source_interval(&self, n: i64) -> Option<usize> {
        self.index(n).ok().and_then(|i| self.source_of[i])
    }

    pub fn is_difference_source(&self, n: i64) -> bool {
        self.source_interval(n).is_some()
    }

    /// Impulse index `k` with `n ∈ J_k`, if any.
    pub fn sustained_owner(&self, n: i64) -> Option<usize> {
        match self.classify(n) {
            Ok(NodeKind::Sustained(k)) => Some(k),
            _ => None,
        }
    }

    /// The rule that defines the state at `n`.
    pub fn classify(&self, n: i64) -> Result<NodeKind, GridError> {
        self.index(n).map(|i| self.kinds[i])
    }

    /// Node kinds in node order.
    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }
}

impl fmt::Display for TimePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "points {:?}, durations {:?}", self.points, self.durations)
    }
}

/// A real-valued function on `[n_0, n_{p+1}]`, stored densely by `n - n_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    partition: Arc<TimePartition>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(partition: Arc<TimePartition>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != partition.len() {
            return Err(GridError::LengthMismatch {
                expected: partition.len(),
                got: values.len(),
            });
        }
        if let Some((i, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite {
                n: partition.start() + i as i64,
                value,
            });
        }
        Ok(GridFunction { partition, values })
    }

    pub fn from_fn(
        partition: Arc<TimePartition>,
        f: impl FnMut(i64) -> f64,
    ) -> Result<Self, GridError> {
        let values = partition.nodes().map(f).collect();
        Self::new(partition, values)
    }

    pub fn constant(partition: Arc<TimePartition>, value: f64) -> Result<Self, GridError> {
        Self::from_fn(partition, |_| value)
    }

    pub fn partition(&self) -> &Arc<TimePartition> {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at node `n`. Panics outside the domain.
    pub fn at(&self, n: i64) -> f64 {
        self.values[(n - self.partition.start()) as usize]
    }

    pub fn get(&self, n: i64) -> Result<f64, GridError> {
        self.partition.index(n).map(|i| self.values[i])
    }

    /// `(n, value)` pairs in node order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.partition.nodes().zip(self.values.iter().copied())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn same_domain(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.partition, &other.partition) || self.partition == other.partition
    }

    pub(crate) fn check_domain(&self, other: &GridFunction) -> Result<(), GridError> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(GridError::DomainMismatch)
        }
    }

    /// Largest `self(n) - other(n)`; non-positive iff `self ≤ other` pointwise.
    pub fn max_excess_over(&self, other: &GridFunction) -> Result<f64, GridError> {
        self.check_domain(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(f64::NEG_INFINITY, |acc, (a, b)| acc.max(a - b)))
    }

    /// `self ≤ other + slack` at every node.
    pub fn le_within(&self, other: &GridFunction, slack: f64) -> Result<bool, GridError> {
        Ok(self.max_excess_over(other)? <= slack)
    }
}

/// `max_n |u(n) - v(n)|`.
pub fn sup_norm_diff(u: &GridFunction, v: &GridFunction) -> Result<f64, GridError> {
    u.check_domain(v)?;
    Ok(u.values
        .iter()
        .zip(&v.values)
        .fold(0.0, |acc, (a, b)| acc.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TimePartition {
        TimePartition::new(vec![0, 3, 7], vec![1]).unwrap()
    }

    #[test]
    fn derived_sets_of_small_partition() {
        let t = sample();
        assert_eq!(t.difference_sources(0), 0..=1);
        assert_eq!(t.sustained_nodes(1), 4..=4);
        assert_eq!(t.difference_sources(1), 4..=6);
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn rejects_tight_spacing() {
        assert!(matches!(
            TimePartition::new(vec![0, 2], vec![]),
            Err(GridError::SpacingViolation { index: 1, .. })
        ));
    }

    #[test]
    fn rejects_long_duration() {
        assert!(matches!(
            TimePartition::new(vec![0, 3, 7], vec![3]),
            Err(GridError::DurationViolation { index: 1, value: 3, max: 2 })
        ));
        assert!(matches!(
            TimePartition::new(vec![0, 3, 7], vec![0]),
            Err(GridError::DurationViolation { .. })
        ));
    }

    #[test]
    fn rejects_unordered_and_malformed() {
        assert!(matches!(
            TimePartition::new(vec![5, 0], vec![]),
            Err(GridError::NotIncreasing { .. })
        ));
        assert!(matches!(
            TimePartition::new(vec![0], vec![]),
            Err(GridError::TooFewPoints(1))
        ));
        assert!(matches!(
            TimePartition::new(vec![0, 4, 9], vec![]),
            Err(GridError::DurationCount { expected: 1, .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let t = sample();
        assert_eq!(t.classify(0), Ok(NodeKind::Initial));
        assert_eq!(t.classify(1), Ok(NodeKind::Difference(0)));
        assert_eq!(t.classify(3), Ok(NodeKind::Impulse(1)));
        assert_eq!(t.classify(4), Ok(NodeKind::Sustained(1)));
        assert_eq!(t.classify(5), Ok(NodeKind::Difference(1)));
        assert_eq!(t.classify(7), Ok(NodeKind::Difference(1)));
        assert!(matches!(t.classify(8), Err(GridError::OutOfDomain { .. })));
        assert!(matches!(t.classify(-1), Err(GridError::OutOfDomain { .. })));
    }

    #[test]
    fn last_sustained_node_is_also_a_source() {
        let t = sample();
        assert_eq!(t.sustained_owner(4), Some(1));
        assert_eq!(t.source_interval(4), Some(1));
        assert_eq!(t.source_interval(2), None);
        assert_eq!(t.source_interval(3), None);
    }

    #[test]
    fn no_impulses() {
        let t = TimePartition::new(vec![2, 6], vec![]).unwrap();
        assert_eq!(t.impulse_count(), 0);
        assert_eq!(t.difference_sources(0), 2..=5);
        assert_eq!(t.classify(2), Ok(NodeKind::Initial));
        for n in 3..=6 {
            assert_eq!(t.classify(n), Ok(NodeKind::Difference(0)));
        }
    }

    #[test]
    fn sup_norm_examples() {
        let t = Arc::new(sample());
        let u = GridFunction::from_fn(t.clone(), |n| n as f64).unwrap();
        assert_eq!(sup_norm_diff(&u, &u).unwrap(), 0.0);
        let one = GridFunction::constant(t.clone(), 1.0).unwrap();
        let zero = GridFunction::constant(t.clone(), 0.0).unwrap();
        assert_eq!(sup_norm_diff(&one, &zero).unwrap(), 1.0);
        let v = GridFunction::from_fn(t.clone(), |n| {
            n as f64 + if n % 2 == 0 { 0.5 } else { -0.5 }
        })
        .unwrap();
        assert_eq!(sup_norm_diff(&u, &v).unwrap(), 0.5);

        let other = Arc::new(TimePartition::new(vec![0, 7], vec![]).unwrap());
        let w = GridFunction::constant(other, 0.0).unwrap();
        assert_eq!(sup_norm_diff(&u, &w), Err(GridError::DomainMismatch));
    }

    #[test]
    fn grid_function_validation() {
        let t = Arc::new(sample());
        assert!(matches!(
            GridFunction::new(t.clone(), vec![0.0; 3]),
            Err(GridError::LengthMismatch { expected: 8, got: 3 })
        ));
        let mut values = vec![0.0; 8];
        values[5] = f64::NAN;
        assert!(matches!(
            GridFunction::new(t, values),
            Err(GridError::NonFinite { n: 5, .. })
        ));
    }
}
