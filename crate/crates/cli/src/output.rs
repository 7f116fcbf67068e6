//! CSV and JSON serialization of solver results.
//!
//! CSV numbers carry 17 significant digits so doubles round-trip exactly.

use std::fmt::Write as _;

use serde::Serialize;

use nide_core::linear::LinearNIDE;
use nide_core::monotone::{Breach, ChainLink, IterationResult};
use nide_core::oracle::DirectSolution;
use nide_core::GridFunction;

/// 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn solve_csv(result: &IterationResult, trace: bool) -> String {
    let mut out = String::new();
    if trace {
        out.push_str("iter,n,alpha,beta\n");
        for (j, (alpha, beta)) in result.alphas.iter().zip(&result.betas).enumerate() {
            for ((n, a), b) in alpha.iter().zip(beta.values()) {
                let _ = writeln!(out, "{j},{n},{},{}", fmt17(a), fmt17(*b));
            }
        }
    } else {
        out.push_str("n,A,B,gap\n");
        for ((n, a), b) in result.a.iter().zip(result.b.values()) {
            let _ = writeln!(out, "{n},{},{},{}", fmt17(a), fmt17(*b), fmt17(b - a));
        }
    }
    out
}

#[derive(Serialize)]
struct BreachJson {
    iteration: usize,
    link: &'static str,
    n: i64,
    excess: f64,
}

impl From<&Breach> for BreachJson {
    fn from(b: &Breach) -> Self {
        BreachJson {
            iteration: b.iteration,
            link: match b.link {
                ChainLink::LowerIncreasing => "alpha_nondecreasing",
                ChainLink::Ordered => "alpha_below_beta",
                ChainLink::UpperDecreasing => "beta_nonincreasing",
            },
            n: b.n,
            excess: b.excess,
        }
    }
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct IterationJson<'a> {
    status: String,
    iterations: usize,
    nodes: Vec<i64>,
    alphas: Vec<&'a [f64]>,
    betas: Vec<&'a [f64]>,
    A: &'a [f64],
    B: &'a [f64],
    gap: f64,
    residual_A: f64,
    residual_B: f64,
    breach: Option<BreachJson>,
}

pub fn solve_json(result: &IterationResult) -> String {
    let doc = IterationJson {
        status: result.status.to_string(),
        iterations: result.iterations,
        nodes: result.a.partition().nodes().collect(),
        alphas: result.alphas.iter().map(GridFunction::values).collect(),
        betas: result.betas.iter().map(GridFunction::values).collect(),
        A: result.a.values(),
        B: result.b.values(),
        gap: result.gap,
        residual_A: result.residual_a,
        residual_B: result.residual_b,
        breach: result.breach.as_ref().map(BreachJson::from),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

fn trajectory_csv(u: &GridFunction) -> String {
    let mut out = String::from("n,u\n");
    for (n, v) in u.iter() {
        let _ = writeln!(out, "{n},{}", fmt17(v));
    }
    out
}

pub fn oracle_csv(solution: &DirectSolution) -> String {
    trajectory_csv(&solution.u)
}

#[derive(Serialize)]
struct OracleJson<'a> {
    nodes: Vec<i64>,
    u: &'a [f64],
    multiple_roots: &'a [i64],
}

pub fn oracle_json(solution: &DirectSolution) -> String {
    let doc = OracleJson {
        nodes: solution.u.partition().nodes().collect(),
        u: solution.u.values(),
        multiple_roots: &solution.multiple_roots,
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn linear_csv(u: &GridFunction) -> String {
    trajectory_csv(u)
}

#[derive(Serialize)]
struct LinearJson<'a> {
    nodes: Vec<i64>,
    u: &'a [f64],
    closed_form: &'a [f64],
    discrepancy: f64,
    x0: f64,
}

pub fn linear_json(problem: &LinearNIDE, u: &GridFunction, closed: &GridFunction, discrepancy: f64) -> String {
    let doc = LinearJson {
        nodes: u.partition().nodes().collect(),
        u: u.values(),
        closed_form: closed.values(),
        discrepancy,
        x0: problem.x0(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}
