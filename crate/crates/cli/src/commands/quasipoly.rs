use heun_spectra::quasipoly::{
    solve_quasipoly, validate_quasipoly, QuasiPolyProblem, AGREEMENT_TOLERANCE, MISMATCH_TOLERANCE, RESIDUAL_TOLERANCE,
    TERMINATION_TOLERANCE,
};

use crate::cli::QuasipolyArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult, Stage};
use crate::output::{Fields, Output};

pub fn run(args: &QuasipolyArgs, settings: &Settings) -> CliResult<Output> {
    let z = args.z.unwrap_or(settings.charge);
    let problem = QuasiPolyProblem::new(args.p, args.l, z).map_err(|e| CliError::Usage(e.to_string()))?;
    let result = solve_quasipoly(&problem).stage("quasi-polynomial roots")?;
    let report = validate_quasipoly(&result, &settings.shooting).stage("quasi-polynomial validation")?;

    let mut out = Output::new("quasipoly", "exact polynomial conditions");
    out.inputs = Fields::new().with("p", args.p).with("l", args.l).with("Z", z);
    out.tolerances = Fields::new()
        .with("procedure_agreement", AGREEMENT_TOLERANCE)
        .with("mismatch", MISMATCH_TOLERANCE)
        .with("residual", RESIDUAL_TOLERANCE)
        .with("termination", TERMINATION_TOLERANCE);
    out.outputs.push("energy", result.energy.0);
    out.outputs.push("polynomial", result.polynomial.polynomial.to_string());
    out.outputs.push("degree", result.polynomial.degree());
    out.outputs.push("procedure_agreement", result.agreement);
    out.outputs.push("positive_roots", result.roots.len());
    out.outputs.push("non_positive_roots", result.non_positive.len());
    out.outputs.push("complex_roots", result.complex.len());
    out.outputs.push("note", result.note.clone());
    for (root, check) in result.roots.iter().zip(&report.roots) {
        out.records.push(
            Fields::new()
                .with("beta", root.beta)
                .with("A", root.a)
                .with("mismatch", check.mismatch)
                .with("residual", check.residual)
                .with("termination", check.termination)
                .with("polynomial_nodes", check.polynomial_nodes)
                .with("shooting_nodes", check.shooting_nodes)
                .with("genuine", check.is_genuine()),
        );
        for f in &check.failures {
            out.failures.push(format!("beta = {:.12e}: {f}", root.beta));
        }
    }
    Ok(out)
}
