//! Fixed problems with hand-checked brackets: affine and nonlinear right
//! hand sides, with and without impulses.

use std::sync::Arc;

use nide_core::{GridFunction, IterationCoefficients, LinearNIDE, NonlinearNIDE, TimePartition};

pub struct Entry {
    pub name: &'static str,
    pub problem: NonlinearNIDE,
    pub coeffs: IterationCoefficients,
    pub alpha0: GridFunction,
    pub beta0: GridFunction,
    /// The same problem written as a linear one, when f, F, g are affine with
    /// slopes equal to the iteration bounds.
    pub linear: Option<LinearNIDE>,
}

fn partition(points: &[i64], durations: &[i64]) -> Arc<TimePartition> {
    Arc::new(TimePartition::new(points.to_vec(), durations.to_vec()).unwrap())
}

fn constant(t: &Arc<TimePartition>, v: f64) -> GridFunction {
    GridFunction::constant(t.clone(), v).unwrap()
}

/// Affine problem `f = P x + K y + c`, `F = T z`, `g = M x + L y + γ`.
#[allow(clippy::too_many_arguments)]
fn affine(
    name: &'static str,
    t: Arc<TimePartition>,
    x0: f64,
    (p, k, c): (f64, f64, f64),
    tk: f64,
    (m, l, gamma): (f64, f64, f64),
    bracket: (f64, f64),
) -> Entry {
    let problem = NonlinearNIDE::new(
        t.clone(),
        x0,
        move |_, x, y| p * x + k * y + c,
        move |_, z| tk * z,
        move |_, x, y| m * x + l * y + gamma,
    );
    // the explicit form of y = P x + K y + c
    let linear = LinearNIDE::from_fns(
        t.clone(),
        x0,
        |_| (p / (1.0 - k), c / (1.0 - k)),
        |_| (tk, 0.0),
        |_| (m, l, gamma),
    )
    .unwrap();
    Entry {
        name,
        problem,
        coeffs: IterationCoefficients::constant(t.clone(), p, k, tk, m, l).unwrap(),
        alpha0: constant(&t, bracket.0),
        beta0: constant(&t, bracket.1),
        linear: Some(linear),
    }
}

pub fn catalog() -> Vec<Entry> {
    let mut entries = vec![
        affine("affine, no impulses", partition(&[0, 4], &[]), 0.0, (0.5, 0.0, 1.0), 1.0, (0.0, 1.0, 0.0), (0.0, 2.0)),
        affine(
            "affine, one impulse",
            partition(&[0, 3, 7], &[1]),
            2.0,
            (0.5, 0.0, 1.0),
            0.5,
            (0.25, 0.5, 0.0),
            (0.0, 2.0),
        ),
        affine(
            "affine, two impulses",
            partition(&[0, 4, 9, 14], &[2, 1]),
            1.0,
            (0.8, 0.1, 0.3),
            0.5,
            (0.3, 0.4, 0.2),
            (0.0, 3.0),
        ),
        affine(
            "affine, implicit",
            partition(&[0, 8], &[]),
            0.0,
            (0.5, 0.3, 0.2),
            1.0,
            (0.0, 1.0, 0.0),
            (0.0, 1.0),
        ),
    ];

    let t = partition(&[0, 10], &[]);
    entries.push(Entry {
        name: "x + 0.1 sin x",
        problem: NonlinearNIDE::without_impulses(t.clone(), 1.0, |_, x, _| x + 0.1 * x.sin()),
        coeffs: IterationCoefficients::constant(t.clone(), 0.9, 0.0, 1.0, 0.0, 1.0).unwrap(),
        alpha0: constant(&t, 1.0),
        beta0: constant(&t, std::f64::consts::PI),
        linear: None,
    });

    let t = partition(&[0, 5, 10, 15], &[2, 2]);
    entries.push(Entry {
        name: "x + 0.1 sin x, halving impulses",
        problem: NonlinearNIDE::new(
            t.clone(),
            1.0,
            |_, x, _| x + 0.1 * x.sin(),
            |_, z| 0.5 * z,
            |_, x, y| 0.25 * x + 0.5 * y + 0.2,
        ),
        coeffs: IterationCoefficients::constant(t.clone(), 0.9, 0.0, 0.5, 0.25, 0.5).unwrap(),
        alpha0: constant(&t, 0.0),
        beta0: constant(&t, std::f64::consts::PI),
        linear: None,
    });

    let t = partition(&[0, 4, 9, 14], &[2, 1]);
    entries.push(Entry {
        name: "x + 0.1 sin x, impulse factors 0.6 and 0.9",
        problem: NonlinearNIDE::new(
            t.clone(),
            1.0,
            |_, x, _| x + 0.1 * x.sin(),
            |k, z| if k == 1 { 0.6 * z } else { 0.9 * z },
            |_, x, y| 0.5 * x + 0.25 * y + 0.1,
        ),
        coeffs: IterationCoefficients::from_fns(
            t.clone(),
            |_| (0.9, 0.0),
            |k| if k == 1 { 0.6 } else { 0.9 },
            |_| (0.5, 0.25),
        )
        .unwrap(),
        alpha0: constant(&t, 0.0),
        beta0: constant(&t, std::f64::consts::PI),
        linear: None,
    });

    let t = partition(&[0, 12], &[]);
    entries.push(Entry {
        name: "x - 0.1 x^2",
        problem: NonlinearNIDE::without_impulses(t.clone(), 0.5, |_, x, _| x - 0.1 * x * x),
        coeffs: IterationCoefficients::constant(t.clone(), 0.8, 0.0, 1.0, 0.0, 1.0).unwrap(),
        alpha0: constant(&t, 0.0),
        beta0: constant(&t, 1.0),
        linear: None,
    });

    let t = partition(&[0, 4, 8, 12], &[1, 2]);
    entries.push(Entry {
        name: "x - 0.1 x^2, impulses",
        problem: NonlinearNIDE::new(
            t.clone(),
            0.5,
            |_, x, _| x - 0.1 * x * x,
            |_, z| 0.8 * z,
            |_, x, y| 0.2 * x + 0.6 * y + 0.1,
        ),
        coeffs: IterationCoefficients::constant(t.clone(), 0.8, 0.0, 0.8, 0.2, 0.6).unwrap(),
        alpha0: constant(&t, 0.0),
        beta0: constant(&t, 1.0),
        linear: None,
    });

    let t = partition(&[0, 8], &[]);
    entries.push(Entry {
        name: "implicit 0.5 x + 0.2 sin y + 0.5",
        problem: NonlinearNIDE::without_impulses(t.clone(), 1.0, |_, x, y| 0.5 * x + 0.2 * y.sin() + 0.5),
        coeffs: IterationCoefficients::constant(t.clone(), 0.5, -0.2, 1.0, 0.0, 1.0).unwrap(),
        alpha0: constant(&t, 0.0),
        beta0: constant(&t, 2.0),
        linear: None,
    });

    entries
}
