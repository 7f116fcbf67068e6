mod common;

use nide_core::monotone::{check_one_sided_conditions, verify_lower, verify_upper};
use nide_core::{
    residual, run_monotone_iteration, solve_forward, solve_nonlinear_direct, sup_norm_diff, sweep, GridFunction,
    IterationOptions, IterationStatus, RootOptions, Sector,
};
use proptest::prelude::*;
use rand::Rng;

const SLACK: f64 = 1e-12;

fn setup(seed: u64) -> common::RandomSetup {
    let mut rng = common::rng(seed);
    let t = common::random_partition(&mut rng, 3, 30);
    common::random_setup(&mut rng, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sweep_is_monotone_and_preserves_bounds(seed in any::<u64>()) {
        let s = setup(seed);
        prop_assert!(verify_lower(&s.problem, &s.alpha).unwrap().passed());
        prop_assert!(verify_upper(&s.problem, &s.beta).unwrap().passed());
        let sector = Sector::new(s.alpha.clone(), s.beta.clone()).unwrap();
        prop_assert!(check_one_sided_conditions(&s.problem, &s.coeffs, &sector, 5).unwrap().passed());

        let a1 = sweep(&s.problem, &s.coeffs, &s.alpha).unwrap();
        let b1 = sweep(&s.problem, &s.coeffs, &s.beta).unwrap();
        prop_assert!(s.alpha.le_within(&a1, SLACK).unwrap());
        prop_assert!(b1.le_within(&s.beta, SLACK).unwrap());
        prop_assert!(verify_lower(&s.problem, &a1).unwrap().passed());
        prop_assert!(verify_upper(&s.problem, &b1).unwrap().passed());

        let mut rng = common::rng(seed ^ 0x5eed);
        let eta1 = GridFunction::from_fn(s.alpha.partition().clone(), |n| {
            let (a, b) = (s.alpha.at(n), s.beta.at(n));
            a + rng.gen_range(0.0..=1.0) * (b - a)
        })
        .unwrap();
        let eta2 = GridFunction::from_fn(s.alpha.partition().clone(), |n| {
            let (a, b) = (eta1.at(n), s.beta.at(n));
            a + rng.gen_range(0.0..=1.0) * (b - a)
        })
        .unwrap();
        let s1 = sweep(&s.problem, &s.coeffs, &eta1).unwrap();
        let s2 = sweep(&s.problem, &s.coeffs, &eta2).unwrap();
        prop_assert!(s1.le_within(&s2, SLACK).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn converged_runs_keep_the_sandwich(seed in any::<u64>()) {
        let s = setup(seed);
        let options = IterationOptions { trace: true, ..IterationOptions::default() };
        let result = run_monotone_iteration(&s.problem, &s.coeffs, &s.alpha, &s.beta, &options).unwrap();
        prop_assert_eq!(result.status, IterationStatus::Converged);
        prop_assert_eq!(common::sandwich_violations(&result, SLACK), 0);
        prop_assert!(result.residual_a <= 1e-8 && result.residual_b <= 1e-8);
    }
}

#[test]
fn catalog_brackets_are_valid() {
    for entry in common::catalog::catalog() {
        assert!(verify_lower(&entry.problem, &entry.alpha0).unwrap().passed(), "{}", entry.name);
        assert!(verify_upper(&entry.problem, &entry.beta0).unwrap().passed(), "{}", entry.name);
        let sector = Sector::new(entry.alpha0.clone(), entry.beta0.clone()).unwrap();
        let verdict = check_one_sided_conditions(&entry.problem, &entry.coeffs, &sector, 9).unwrap();
        assert!(verdict.passed(), "{}: {:?}", entry.name, verdict.reports);
    }
}

#[test]
fn catalog_converges_onto_the_direct_solution() {
    for entry in common::catalog::catalog() {
        let result = run_monotone_iteration(
            &entry.problem,
            &entry.coeffs,
            &entry.alpha0,
            &entry.beta0,
            &IterationOptions { trace: true, ..IterationOptions::default() },
        )
        .unwrap();
        assert_eq!(result.status, IterationStatus::Converged, "{}", entry.name);
        assert!(result.iterations <= 200);
        assert_eq!(common::sandwich_violations(&result, SLACK), 0, "{}", entry.name);
        assert!(residual(&entry.problem, &result.a).unwrap() <= 1e-8);

        let direct = solve_nonlinear_direct(&entry.problem, &RootOptions::for_sector(&entry.alpha0, &entry.beta0)).unwrap();
        assert!(direct.is_unique(), "{}", entry.name);
        assert!(sup_norm_diff(&result.a, &direct.u).unwrap() <= 1e-6, "{}", entry.name);

        if let Some(linear) = &entry.linear {
            assert_eq!(result.iterations, 1, "{}", entry.name);
            let exact = solve_forward(linear).unwrap();
            assert!(sup_norm_diff(&result.a, &exact).unwrap() <= 1e-10);
            assert!(sup_norm_diff(&result.b, &exact).unwrap() <= 1e-10);
        }
    }
}
