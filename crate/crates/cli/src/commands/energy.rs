use crate::cli::EnergyArgs;
use crate::config::Settings;
use crate::error::CliResult;
use crate::output::Output;

use super::{cross_check, params, solve_level, solver_tolerances, state_inputs};

pub fn run(args: &EnergyArgs, settings: &Settings) -> CliResult<Output> {
    let s = &args.state;
    let p = params(s.a, s.z.unwrap_or(settings.charge), s.l)?;
    let method = args.method.unwrap_or(settings.method);
    let level = solve_level(&p, s.n, settings, method)?;
    let mut out = Output::new("energy", method.label());
    out.inputs = state_inputs(&p, s.n);
    out.tolerances = solver_tolerances(settings, method);
    level.fields(&mut out.outputs);
    cross_check(&level, settings, "energy", &mut out.failures);
    Ok(out)
}
