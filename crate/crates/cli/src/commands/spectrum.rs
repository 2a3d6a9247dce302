use rayon::prelude::*;

use crate::cli::SpectrumArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{Fields, Output};

use super::{cross_check, params, solve_levels, solver_tolerances};

pub fn run(args: &SpectrumArgs, settings: &Settings) -> CliResult<Output> {
    if args.levels == 0 {
        return Err(CliError::Usage("--levels must be at least 1".into()));
    }
    let z = args.z.unwrap_or(settings.charge);
    let method = args.method.unwrap_or(settings.method);
    let cells = args
        .l
        .iter()
        .flat_map(|&l| args.a.iter().map(move |&a| params(a, z, l)))
        .collect::<CliResult<Vec<_>>>()?;
    let solved: Vec<_> = cells
        .par_iter()
        .map(|p| solve_levels(p, args.levels, settings, method))
        .collect::<CliResult<_>>()?;

    let mut out = Output::new("spectrum", method.label());
    let join = |v: Vec<String>| v.join(",");
    out.inputs
        .push("A", join(args.a.iter().map(|a| crate::output::sci(*a)).collect()));
    out.inputs.push("l", join(args.l.iter().map(u32::to_string).collect()));
    out.inputs.push("levels", args.levels);
    out.inputs.push("Z", z);
    out.tolerances = solver_tolerances(settings, method);
    for (p, levels) in cells.iter().zip(solved) {
        for (n, level) in levels.iter().enumerate() {
            let mut f = Fields::new().with("A", p.a).with("l", p.l).with("n", n);
            level.fields(&mut f);
            cross_check(
                level,
                settings,
                &format!("A={} l={} n={n}", p.a, p.l),
                &mut out.failures,
            );
            out.records.push(f);
        }
    }
    out.outputs.push("levels_found", out.records.len());
    Ok(out)
}
