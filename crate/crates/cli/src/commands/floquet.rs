use heun_spectra::floquet::{connection_levels, find_indices, laurent_coefficients, minimal_half_width};
use heun_spectra::Energy;
use num_complex::Complex64;

use crate::cli::FloquetArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult, Stage};
use crate::output::{Cell, Fields, Output};

/// Connection data available when the energy is an eigenvalue.
struct ConnectionData {
    zeta1: Complex64,
    zeta2: Complex64,
    a0: Complex64,
    b0: Complex64,
}

pub fn run(args: &FloquetArgs, settings: &Settings) -> CliResult<Output> {
    let p = super::params(args.a, args.z.unwrap_or(settings.charge), args.l)?;
    let window = args.half_width.unwrap_or(settings.half_width);
    if window == 0 {
        return Err(CliError::Usage("--N must be at least 1".into()));
    }
    let (energy, nu1, nu2, index_residual, connection) = match (args.e, args.n) {
        (_, Some(n)) => {
            let mut levels = connection_levels(&p, n + 1, &settings.connection).stage("floquet connection")?;
            let r = levels.swap_remove(n);
            let data = ConnectionData {
                zeta1: r.zeta1,
                zeta2: r.zeta2,
                a0: r.a0,
                b0: r.b0,
            };
            (r.energy, r.nu1, r.nu2, r.connection.indices.residual, Some(data))
        }
        (Some(e), None) => {
            let energy = Energy(e).require_bound().map_err(|e| CliError::Usage(e.to_string()))?;
            let pair = find_indices(energy, &p, window).stage("index search")?;
            (energy, pair.nu1, pair.nu2, pair.residual, None)
        }
        (None, None) => return Err(CliError::Usage("either --E or --n is required".into())),
    };
    let width = window.max(minimal_half_width(&p, energy));
    let s1 = laurent_coefficients(nu1, energy, &p, width).stage("laurent coefficients")?;
    let s2 = laurent_coefficients(nu2, energy, &p, width).stage("laurent coefficients")?;

    let mut out = Output::new(
        "floquet",
        if connection.is_some() {
            "floquet connection"
        } else {
            "index search"
        },
    );
    out.inputs = Fields::new().with("A", p.a).with("l", p.l).with("Z", p.z);
    match args.n {
        Some(n) => out.inputs.push("n", n),
        None => out.inputs.push("E", energy.0),
    }
    out.inputs.push("N", window);
    out.tolerances
        .push("series_tolerance", settings.connection.series_tolerance);
    if connection.is_some() {
        out.tolerances
            .push("energy_tolerance", settings.connection.energy_tolerance);
    }
    out.outputs.push("energy", energy.0);
    out.outputs.push("nu1", nu1);
    out.outputs.push("nu2", nu2);
    out.outputs.push("index_residual", index_residual);
    let pick = |f: fn(&ConnectionData) -> Complex64| connection.as_ref().map_or(Cell::Missing, |d| Cell::Complex(f(d)));
    out.outputs.push("zeta1", pick(|d| d.zeta1));
    out.outputs.push("zeta2", pick(|d| d.zeta2));
    out.outputs.push("a0", pick(|d| d.a0));
    out.outputs.push("b0", pick(|d| d.b0));
    out.outputs.push(
        "recurrence_residual",
        s1.recurrence_residual().max(s2.recurrence_residual()),
    );
    out.outputs.push("half_width_used", width);

    let w = window as i64;
    for n in -w..=w {
        out.records.push(
            Fields::new()
                .with("n", n)
                .with("c1", s1.coefficient(n))
                .with("c2", s2.coefficient(n)),
        );
    }
    Ok(out)
}
