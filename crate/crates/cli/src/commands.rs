use std::io::Write;
use std::path::Path;

use nide_core::linear::Site;
use nide_core::monotone::{check_one_sided_conditions, verify_lower, verify_upper, SolutionVerdict};
use nide_core::{
    run_monotone_iteration, solve_closed_form, solve_forward, solve_nonlinear_direct, sup_norm_diff, IterationStatus,
    Sector,
};

use crate::config::ProblemConfig;
use crate::output;
use crate::{CliError, Format, EXIT_BREACH, EXIT_ERROR, EXIT_MAX_ITER, EXIT_MULTIPLE, EXIT_OK};

/// Writes `body` to `out` or to stdout.
fn emit(body: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => Ok(stdout.write_all(body.as_bytes())?),
    }
}

/// The summary goes next to the data on stdout only when the data went to a
/// file; otherwise it would corrupt the CSV/JSON stream.
fn summary_sink<'a>(out: Option<&Path>, stdout: &'a mut dyn Write, stderr: &'a mut dyn Write) -> &'a mut dyn Write {
    if out.is_some() {
        stdout
    } else {
        stderr
    }
}

pub fn cmd_solve(
    config: &ProblemConfig,
    out: Option<&Path>,
    format: Format,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let problem = config.nonlinear_problem()?;
    let coeffs = config.iteration_coefficients()?;
    let options = config.iteration_options();
    let result = run_monotone_iteration(&problem, &coeffs, &config.alpha0()?, &config.beta0()?, &options)?;

    let body = match format {
        Format::Csv => output::solve_csv(&result, options.trace),
        Format::Json => output::solve_json(&result),
    };
    emit(&body, out, stdout)?;

    let sink = summary_sink(out, stdout, stderr);
    writeln!(
        sink,
        "status={} iterations={} gap={:e} residual_A={:e} residual_B={:e}",
        result.status, result.iterations, result.gap, result.residual_a, result.residual_b
    )?;
    if let Some(b) = &result.breach {
        writeln!(sink, "breach: iteration {} node {} excess {:e} ({:?})", b.iteration, b.n, b.excess, b.link)?;
    }
    Ok(match result.status {
        IterationStatus::Converged => EXIT_OK,
        IterationStatus::MaxIterReached => EXIT_MAX_ITER,
        IterationStatus::MonotonicityBreach => EXIT_BREACH,
    })
}

fn verdict_line(name: &str, v: &SolutionVerdict) -> String {
    if v.passed() {
        format!("{name}: Pass (worst defect {:e})", v.worst_defect)
    } else {
        format!(
            "{name}: Fail ({} nodes violated, worst defect {:e} at n={})",
            v.violations.len(),
            v.worst_defect,
            v.worst_node
        )
    }
}

fn site_label(site: Option<Site>) -> String {
    match site {
        Some(Site::Node(n)) => format!(" at n={n}"),
        Some(Site::Impulse(k)) => format!(" at k={k}"),
        None => String::new(),
    }
}

/// Prints one Pass/Fail line per check; exit 1 when any check fails.
pub fn cmd_verify(config: &ProblemConfig, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let problem = config.nonlinear_problem()?;
    let coeffs = config.iteration_coefficients()?;
    let alpha = config.alpha0()?;
    let beta = config.beta0()?;

    let lower = verify_lower(&problem, &alpha)?;
    let upper = verify_upper(&problem, &beta)?;
    writeln!(stdout, "{}", verdict_line("lower solution", &lower))?;
    writeln!(stdout, "{}", verdict_line("upper solution", &upper))?;
    let mut ok = lower.passed() && upper.passed();

    let excess = alpha.max_excess_over(&beta)?;
    let sector = match Sector::new(alpha, beta) {
        Ok(sector) => {
            writeln!(stdout, "ordering: Pass")?;
            Some(sector)
        }
        Err(_) => {
            writeln!(stdout, "ordering: Fail (alpha0 exceeds beta0 by {excess:e})")?;
            None
        }
    };

    match sector {
        Some(sector) => {
            let verdict = check_one_sided_conditions(&problem, &coeffs, &sector, config.solver.samples_per_axis)?;
            for r in &verdict.reports {
                writeln!(
                    stdout,
                    "{}: {} (worst margin {:e}{}, {} samples)",
                    r.condition,
                    if r.passed { "Pass" } else { "Fail" },
                    r.worst_margin,
                    site_label(r.worst_site),
                    r.samples
                )?;
            }
            ok &= verdict.passed();
        }
        None => {
            writeln!(stdout, "one-sided bounds: Fail (no sector to sample)")?;
            ok = false;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_ERROR })
}

pub fn cmd_oracle(
    config: &ProblemConfig,
    out: Option<&Path>,
    format: Format,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let problem = config.nonlinear_problem()?;
    let solution = solve_nonlinear_direct(&problem, &config.root_options()?)?;
    let body = match format {
        Format::Csv => output::oracle_csv(&solution),
        Format::Json => output::oracle_json(&solution),
    };
    emit(&body, out, stdout)?;
    if solution.is_unique() {
        Ok(EXIT_OK)
    } else {
        let sink = summary_sink(out, stdout, stderr);
        writeln!(sink, "multiple roots at nodes {:?}; reported the leftmost", solution.multiple_roots)?;
        Ok(EXIT_MULTIPLE)
    }
}

pub fn cmd_linear(
    config: &ProblemConfig,
    out: Option<&Path>,
    format: Format,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let problem = config.linear_problem()?;
    let u = solve_forward(&problem)?;
    let closed = solve_closed_form(&problem)?;
    let discrepancy = sup_norm_diff(&u, &closed)?;
    let body = match format {
        Format::Csv => output::linear_csv(&u),
        Format::Json => output::linear_json(&problem, &u, &closed, discrepancy),
    };
    emit(&body, out, stdout)?;
    writeln!(summary_sink(out, stdout, stderr), "closed-form discrepancy={discrepancy:e}")?;
    Ok(EXIT_OK)
}
