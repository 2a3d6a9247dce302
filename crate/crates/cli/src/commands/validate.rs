use heun_spectra::series::wronskian;
use heun_spectra::shooting::count_nodes;
use num_complex::Complex64;

use crate::cli::{Method, StateArgs};
use crate::config::Settings;
use crate::error::{CliResult, Stage};
use crate::output::{Fields, Output};

use super::{params, solve_level, solver_tolerances, state_inputs};

const WRONSKIAN_TOLERANCE: f64 = 1e-9;
const RESIDUAL_TOLERANCE: f64 = 1e-10;
const NORM_TOLERANCE: f64 = 1e-6;

pub fn run(args: &StateArgs, settings: &Settings) -> CliResult<Output> {
    let p = params(args.a, args.z.unwrap_or(settings.charge), args.l)?;
    let level = solve_level(&p, args.n, settings, Method::Both)?;
    let shooting = level.shooting.as_ref().expect("both methods ran");
    let floquet = level.floquet.as_ref().expect("both methods ran");

    let c = &floquet.connection;
    let zs = [
        c.z_ref,
        c.z_ref * (c.z_far / c.z_ref).powf(0.25),
        c.z_ref * (c.z_near / c.z_ref).powf(0.25),
    ];
    let ws = zs
        .iter()
        .map(|&z| {
            let a = floquet.floquet1.evaluate(z)?;
            let b = floquet.floquet2.evaluate(z)?;
            Ok(wronskian(a.value, a.derivative, b.value, b.derivative))
        })
        .collect::<heun_spectra::Result<Vec<Complex64>>>()
        .stage("floquet evaluation")?;
    let spread = ws.iter().map(|w| (w - ws[0]).norm()).fold(0.0, f64::max) / ws[0].norm();
    let residual = floquet
        .floquet1
        .recurrence_residual()
        .max(floquet.floquet2.recurrence_residual());
    let nodes = count_nodes(&shooting.wave_samples).stage("node count")?;
    let norm = shooting.norm_squared();

    let mut out = Output::new("validate", "both");
    out.inputs = state_inputs(&p, args.n);
    out.tolerances = solver_tolerances(settings, Method::Both);
    out.tolerances.push("wronskian", WRONSKIAN_TOLERANCE);
    out.tolerances.push("recurrence_residual", RESIDUAL_TOLERANCE);
    out.tolerances.push("norm", NORM_TOLERANCE);
    level.fields(&mut out.outputs);

    let discrepancy = level.discrepancy().expect("both methods ran");
    let checks: [(&str, f64, f64, bool); 5] = [
        (
            "energy_discrepancy",
            discrepancy,
            settings.cross_tolerance,
            discrepancy <= settings.cross_tolerance,
        ),
        (
            "wronskian_spread",
            spread,
            WRONSKIAN_TOLERANCE,
            spread <= WRONSKIAN_TOLERANCE,
        ),
        (
            "recurrence_residual",
            residual,
            RESIDUAL_TOLERANCE,
            residual <= RESIDUAL_TOLERANCE,
        ),
        ("node_count", nodes as f64, args.n as f64, nodes == args.n),
        (
            "norm_squared",
            norm,
            NORM_TOLERANCE,
            (norm - 1.0).abs() <= NORM_TOLERANCE,
        ),
    ];
    for (name, value, limit, pass) in checks {
        out.records.push(
            Fields::new()
                .with("check", name)
                .with("value", value)
                .with("limit", limit)
                .with("pass", pass),
        );
        if !pass {
            out.failures.push(format!("{name}: {value:.3e} against {limit:.1e}"));
        }
    }
    Ok(out)
}
