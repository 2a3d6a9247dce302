use heun_spectra::shooting::{count_nodes, find_energy};

use crate::cli::{Spacing, WavefunctionArgs};
use crate::config::Settings;
use crate::error::{CliError, CliResult, Stage};
use crate::output::{Fields, Output};

use super::{params, state_inputs};

fn grid(lo: f64, hi: f64, points: usize, spacing: Spacing) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| {
            let t = i as f64 / last;
            match spacing {
                Spacing::Log => lo * (hi / lo).powf(t),
                Spacing::Linear => lo + (hi - lo) * t,
            }
        })
        .collect()
}

pub fn run(args: &WavefunctionArgs, settings: &Settings) -> CliResult<Output> {
    let s = &args.state;
    if !(args.zmin > 0.0 && args.zmax > args.zmin && args.zmax.is_finite()) {
        return Err(CliError::Usage("require 0 < zmin < zmax".into()));
    }
    if args.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let p = params(s.a, s.z.unwrap_or(settings.charge), s.l)?;
    let state = find_energy(&p, s.n, &settings.shooting).stage("shooting")?;
    let zs = grid(args.zmin, args.zmax, args.points, args.spacing);
    let samples = state
        .sample_at(&zs, &settings.shooting)
        .stage("wave function sampling")?;
    let nodes = count_nodes(&samples).stage("node count")?;

    let mut out = Output::new("wavefunction", "shooting");
    out.inputs = state_inputs(&p, s.n);
    out.inputs.push("zmin", args.zmin);
    out.inputs.push("zmax", args.zmax);
    out.inputs.push("points", args.points);
    out.inputs.push(
        "spacing",
        match args.spacing {
            Spacing::Log => "log",
            Spacing::Linear => "linear",
        },
    );
    out.tolerances.push("rk_tolerance", settings.shooting.rk_tolerance);
    out.tolerances
        .push("series_tolerance", settings.shooting.series_tolerance);
    out.outputs.push("energy", state.energy.0);
    out.outputs.push("nodes_in_samples", nodes);
    out.outputs.push("z_near", state.points.z_near);
    out.outputs.push("z_match", state.points.z_match);
    out.outputs.push("z_far", state.points.z_far);
    for w in samples {
        out.records.push(
            Fields::new()
                .with("z", w.z)
                .with("w", w.w)
                .with("dw", w.dw)
                .with("method", w.method.label()),
        );
    }
    Ok(out)
}
