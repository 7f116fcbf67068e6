//! Random instance generators and a fixed problem catalog shared by the
//! integration tests (the CLI acceptance target includes this file too).
#![allow(dead_code)]

pub mod catalog;

use std::sync::Arc;

use nide_core::linear::ComparisonCoefficients;
use nide_core::{GridFunction, IterationCoefficients, IterationResult, LinearNIDE, NodeKind, NonlinearNIDE, TimePartition};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random partition with at most `max_p` impulse points and
/// `n_{p+1} - n_0 <= max_span`. `max_span` must be at least `3 (max_p + 1)`.
pub fn random_partition(rng: &mut impl Rng, max_p: usize, max_span: i64) -> Arc<TimePartition> {
    let p = rng.gen_range(0..=max_p);
    let gaps_count = p + 1;
    let mut gaps = vec![3i64; gaps_count];
    let extra = rng.gen_range(0..=max_span - 3 * gaps_count as i64);
    for _ in 0..extra {
        let i = rng.gen_range(0..gaps_count);
        gaps[i] += 1;
    }
    let n0 = rng.gen_range(-5..=5);
    let mut points = vec![n0];
    for g in &gaps {
        points.push(points.last().unwrap() + g);
    }
    let durations = (1..=p).map(|k| rng.gen_range(1..=gaps[k] - 2)).collect();
    Arc::new(TimePartition::new(points, durations).expect("generated partition is valid"))
}

/// Every partition with `n_0 = 0`, `n_{p+1} <= max_span` and `p <= max_p`.
pub fn all_partitions(max_span: i64, max_p: usize) -> Vec<TimePartition> {
    fn point_sets(points: &mut Vec<i64>, max_span: i64, max_p: usize, out: &mut Vec<Vec<i64>>) {
        let last = *points.last().unwrap();
        for next in last + 3..=max_span {
            points.push(next);
            out.push(points.clone());
            if points.len() - 1 <= max_p {
                point_sets(points, max_span, max_p, out);
            }
            points.pop();
        }
    }

    fn duration_sets(points: &[i64], k: usize, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if k + 1 == points.len() - 1 {
            out.push(current.clone());
            return;
        }
        for d in 1..=points[k + 2] - points[k + 1] - 2 {
            current.push(d);
            duration_sets(points, k + 1, current, out);
            current.pop();
        }
    }

    let mut sets = Vec::new();
    point_sets(&mut vec![0], max_span, max_p, &mut sets);
    let mut out = Vec::new();
    for points in sets {
        let mut durations = Vec::new();
        duration_sets(&points, 0, &mut Vec::new(), &mut durations);
        for ds in durations {
            out.push(TimePartition::new(points.clone(), ds).unwrap());
        }
    }
    out
}

/// Node classification straight from the interval definitions, listing
/// every rule a node falls under.
pub fn memberships(t: &TimePartition, n: i64) -> Vec<NodeKind> {
    let pts = t.points();
    let p = t.impulse_count();
    let mut kinds = Vec::new();
    if n == pts[0] {
        kinds.push(NodeKind::Initial);
    }
    for k in 0..=p {
        let d = if k == 0 { 0 } else { t.durations()[k - 1] };
        let lo = pts[k] + d;
        let hi = if k == p { pts[k + 1] - 1 } else { pts[k + 1] - 2 };
        if (lo..=hi).contains(&(n - 1)) {
            kinds.push(NodeKind::Difference(k));
        }
        if k >= 1 {
            if n == pts[k] {
                kinds.push(NodeKind::Impulse(k));
            }
            if (pts[k] + 1..=pts[k] + d).contains(&n) {
                kinds.push(NodeKind::Sustained(k));
            }
        }
    }
    kinds
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..=hi)
}

/// A random linear problem with `|1 - M_n| >= 0.1`.
pub fn random_linear(rng: &mut impl Rng, t: Arc<TimePartition>) -> LinearNIDE {
    let x0 = uniform(rng, -2.0, 2.0);
    let difference: Vec<(f64, f64)> = t
        .all_difference_sources()
        .map(|_| (uniform(rng, -2.0, 2.0), uniform(rng, -1.0, 1.0)))
        .collect();
    let impulse: Vec<(f64, f64)> = (0..t.impulse_count())
        .map(|_| (uniform(rng, -2.0, 2.0), uniform(rng, -1.0, 1.0)))
        .collect();
    let mut sustained = Vec::new();
    for _ in t.all_sustained_nodes() {
        let mut m = uniform(rng, -2.0, 2.0);
        while (1.0 - m).abs() < 0.1 {
            m = uniform(rng, -2.0, 2.0);
        }
        sustained.push((m, uniform(rng, -2.0, 2.0), uniform(rng, -1.0, 1.0)));
    }
    let (mut d, mut i, mut s) = (difference.into_iter(), impulse.into_iter(), sustained.into_iter());
    LinearNIDE::from_fns(
        t,
        x0,
        |_| d.next().unwrap(),
        |_| i.next().unwrap(),
        |_| s.next().unwrap(),
    )
    .expect("M stays away from 1")
}

/// Sign-valid comparison coefficients and an `m` built node by node to
/// satisfy the comparison inequalities, sometimes with equality.
pub fn comparison_instance(rng: &mut impl Rng, t: Arc<TimePartition>) -> (ComparisonCoefficients, GridFunction) {
    let mut q = Vec::new();
    for _ in t.all_difference_sources() {
        q.push(uniform(rng, 1e-3, 2.0));
    }
    let ts: Vec<f64> = (0..t.impulse_count()).map(|_| uniform(rng, 1e-3, 2.0)).collect();
    let mut ml = Vec::new();
    for _ in t.all_sustained_nodes() {
        ml.push((uniform(rng, -2.0, 0.95), uniform(rng, 1e-3, 2.0)));
    }
    let sources: Vec<i64> = t.all_difference_sources().collect();
    let sustained: Vec<i64> = t.all_sustained_nodes().map(|(_, n)| n).collect();
    let q_at = |n: i64| q[sources.iter().position(|&s| s == n).unwrap()];
    let ml_at = |n: i64| ml[sustained.iter().position(|&s| s == n).unwrap()];
    let coeffs = ComparisonCoefficients::from_fns(t.clone(), q_at, |k| ts[k - 1], ml_at);

    let exact = rng.gen_bool(0.3);
    let slack = |rng: &mut dyn rand::RngCore| if exact { 0.0 } else { rng.gen_range(0.0..1.0) };
    let n0 = t.start();
    let mut m = vec![0.0; t.len()];
    for (i, &kind) in t.kinds().iter().enumerate() {
        let n = n0 + i as i64;
        let s = slack(rng);
        m[i] = match kind {
            NodeKind::Initial => -s,
            NodeKind::Difference(_) => coeffs.q(n - 1) * m[i - 1] - s,
            NodeKind::Impulse(k) => coeffs.t(k) * m[i - 1] - s,
            NodeKind::Sustained(k) => {
                let anchor = m[(t.point(k) - n0) as usize];
                coeffs.l(n) * anchor / (1.0 - coeffs.m(n)) - s
            }
        };
    }
    (coeffs, GridFunction::new(t, m).unwrap())
}

/// A nonlinear problem with sine perturbations of affine maps, bounds that
/// hold globally, and a lower/upper pair built by perturbed forward marching.
pub struct RandomSetup {
    pub problem: NonlinearNIDE,
    pub coeffs: IterationCoefficients,
    pub alpha: GridFunction,
    pub beta: GridFunction,
}

#[derive(Clone, Copy)]
struct Wiggle {
    a: f64,
    b: f64,
    c: f64,
    e: f64,
    h: f64,
}

impl Wiggle {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y + self.c * x.sin() + self.e * y.sin() + self.h
    }

    /// Solves `v = self(x, v) + shift` by contraction (`|b| + |e| < 1`).
    fn solve_second(&self, x: f64, shift: f64) -> f64 {
        let mut v = x;
        for _ in 0..400 {
            v = self.eval(x, v) + shift;
        }
        v
    }
}

pub fn random_setup(rng: &mut impl Rng, t: Arc<TimePartition>) -> RandomSetup {
    let len = t.len();
    let n0 = t.start();
    let mut fs = vec![None; len];
    let mut gs = vec![None; len];
    for n in t.all_difference_sources() {
        let a = uniform(rng, 0.3, 1.0);
        let c = uniform(rng, -0.25, 0.25);
        let b = uniform(rng, -0.4, 0.4);
        let e = uniform(rng, -0.2, 0.2);
        fs[(n - n0) as usize] = Some(Wiggle { a, b, c, e, h: uniform(rng, -0.5, 0.5) });
    }
    for (_, n) in t.all_sustained_nodes() {
        // g(n, x, y) = w(y, x): a, c act on the anchor y and b, e on x
        let a = uniform(rng, 0.3, 1.0);
        let c = uniform(rng, -0.2, 0.2);
        let b = uniform(rng, -0.5, 0.5);
        let e = uniform(rng, -0.2, 0.2);
        gs[(n - n0) as usize] = Some(Wiggle { a, b, c, e, h: uniform(rng, -0.5, 0.5) });
    }
    let impulses: Vec<Wiggle> = (0..t.impulse_count())
        .map(|_| Wiggle {
            a: uniform(rng, 0.3, 1.2),
            b: 0.0,
            c: uniform(rng, -0.25, 0.25),
            e: 0.0,
            h: uniform(rng, -0.5, 0.5),
        })
        .collect();
    let x0 = uniform(rng, -1.0, 1.0);

    let march = |sign: f64, rng: &mut dyn rand::RngCore| {
        let mut u = vec![0.0; len];
        for (i, &kind) in t.kinds().iter().enumerate() {
            let shift = sign * rng.gen_range(1e-6..0.3);
            u[i] = match kind {
                NodeKind::Initial => x0 + shift,
                NodeKind::Difference(_) => fs[i - 1].unwrap().solve_second(u[i - 1], shift),
                NodeKind::Impulse(k) => impulses[k - 1].eval(u[i - 1], 0.0) + shift,
                NodeKind::Sustained(k) => {
                    let anchor = u[(t.point(k) - n0) as usize];
                    gs[i].unwrap().solve_second(anchor, shift)
                }
            };
        }
        GridFunction::new(t.clone(), u).unwrap()
    };
    let alpha = march(-1.0, rng);
    let beta = march(1.0, rng);

    let (f_tab, g_tab, i_tab) = (fs.clone(), gs.clone(), impulses.clone());
    let problem = NonlinearNIDE::new(
        t.clone(),
        x0,
        move |n, x, y| f_tab[(n - n0) as usize].unwrap().eval(x, y),
        move |k, z| i_tab[k - 1].eval(z, 0.0),
        move |n, x, y| g_tab[(n - n0) as usize].unwrap().eval(y, x),
    );
    let coeffs = IterationCoefficients::from_fns(
        t.clone(),
        |n| {
            let w = fs[(n - n0) as usize].unwrap();
            (w.a - w.c.abs(), w.b - w.e.abs())
        },
        |k| impulses[k - 1].a - impulses[k - 1].c.abs(),
        |n| {
            let w = gs[(n - n0) as usize].unwrap();
            (w.b - w.e.abs(), w.a - w.c.abs())
        },
    )
    .expect("bounds are valid");
    RandomSetup { problem, coeffs, alpha, beta }
}

/// Links of `α⁽ʲ⁻¹⁾ ≤ α⁽ʲ⁾ ≤ β⁽ʲ⁾ ≤ β⁽ʲ⁻¹⁾` (and `α⁽⁰⁾ ≤ β⁽⁰⁾`) violated
/// by more than `slack` anywhere in a traced run.
pub fn sandwich_violations(result: &IterationResult, slack: f64) -> usize {
    let count = |lo: &GridFunction, hi: &GridFunction| {
        lo.values().iter().zip(hi.values()).filter(|(a, b)| **a > **b + slack).count()
    };
    let (alphas, betas) = (&result.alphas, &result.betas);
    let mut violations = count(&alphas[0], &betas[0]);
    for j in 1..alphas.len() {
        violations += count(&alphas[j - 1], &alphas[j]);
        violations += count(&alphas[j], &betas[j]);
        violations += count(&betas[j], &betas[j - 1]);
    }
    violations
}
