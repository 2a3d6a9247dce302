mod energy;
mod floquet;
mod quasipoly;
mod spectrum;
mod tables;
mod validate;
mod wavefunction;

use heun_spectra::floquet::{connection_levels, ConnectionResult};
use heun_spectra::shooting::{find_energy, find_levels, BoundState};
use heun_spectra::ProblemParams;

use crate::cli::{Command, Method};
use crate::config::Settings;
use crate::error::{CliError, CliResult, Stage};
use crate::output::{Fields, Output};

pub fn run(command: &Command, settings: &Settings) -> CliResult<Output> {
    match command {
        Command::Energy(args) => energy::run(args, settings),
        Command::Spectrum(args) => spectrum::run(args, settings),
        Command::Floquet(args) => floquet::run(args, settings),
        Command::Wavefunction(args) => wavefunction::run(args, settings),
        Command::Quasipoly(args) => quasipoly::run(args, settings),
        Command::Tables(args) => tables::run(args, settings),
        Command::Validate(args) => validate::run(args, settings),
    }
}

/// Validated supersingular parameters; invalid values are usage errors.
fn params(a: f64, z: f64, l: u32) -> CliResult<ProblemParams> {
    let p = ProblemParams::new(a, z, l).map_err(|e| CliError::Usage(e.to_string()))?;
    p.require_supersingular().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(p)
}

fn state_inputs(p: &ProblemParams, n: usize) -> Fields {
    Fields::new().with("A", p.a).with("l", p.l).with("n", n).with("Z", p.z)
}

fn solver_tolerances(settings: &Settings, method: Method) -> Fields {
    let mut f = Fields::new();
    if method != Method::Floquet {
        f.push("rk_tolerance", settings.shooting.rk_tolerance);
    }
    f.push("series_tolerance", settings.shooting.series_tolerance);
    if method != Method::Shooting {
        f.push("energy_tolerance", settings.connection.energy_tolerance);
    }
    if method == Method::Both {
        f.push("cross_tolerance", settings.cross_tolerance);
    }
    f
}

/// One level solved by the requested methods.
struct Level {
    shooting: Option<BoundState>,
    floquet: Option<ConnectionResult>,
}

impl Level {
    fn energy(&self) -> f64 {
        self.shooting
            .as_ref()
            .map(|s| s.energy.0)
            .or(self.floquet.as_ref().map(|f| f.energy.0))
            .expect("at least one method ran")
    }

    fn discrepancy(&self) -> Option<f64> {
        Some((self.shooting.as_ref()?.energy.0 - self.floquet.as_ref()?.energy.0).abs())
    }

    fn fields(&self, fields: &mut Fields) {
        match (&self.shooting, &self.floquet) {
            (Some(s), Some(f)) => {
                fields.push("energy_shooting", s.energy.0);
                fields.push("energy_floquet", f.energy.0);
                fields.push("discrepancy", (s.energy.0 - f.energy.0).abs());
            }
            _ => fields.push("energy", self.energy()),
        }
    }
}

fn solve_level(p: &ProblemParams, n: usize, settings: &Settings, method: Method) -> CliResult<Level> {
    let shooting = match method {
        Method::Floquet => None,
        _ => Some(find_energy(p, n, &settings.shooting).stage("shooting")?),
    };
    let floquet = match method {
        Method::Shooting => None,
        _ => {
            let mut levels = connection_levels(p, n + 1, &settings.connection).stage("floquet connection")?;
            Some(levels.swap_remove(n))
        }
    };
    Ok(Level { shooting, floquet })
}

fn solve_levels(p: &ProblemParams, count: usize, settings: &Settings, method: Method) -> CliResult<Vec<Level>> {
    let shooting = match method {
        Method::Floquet => None,
        _ => {
            let s = find_levels(p, count, &settings.shooting).stage("shooting")?;
            if s.len() < count {
                return Err(CliError::Solver {
                    stage: "shooting",
                    source: heun_spectra::Error::NoEigenvalue(format!(
                        "found {} of {count} levels for A = {}, l = {}",
                        s.len(),
                        p.a,
                        p.l
                    )),
                });
            }
            Some(s)
        }
    };
    let floquet = match method {
        Method::Shooting => None,
        _ => Some(connection_levels(p, count, &settings.connection).stage("floquet connection")?),
    };
    let mut shooting = shooting.map(Vec::into_iter);
    let mut floquet = floquet.map(Vec::into_iter);
    Ok((0..count)
        .map(|_| Level {
            shooting: shooting.as_mut().and_then(Iterator::next),
            floquet: floquet.as_mut().and_then(Iterator::next),
        })
        .collect())
}

fn cross_check(level: &Level, settings: &Settings, label: &str, failures: &mut Vec<String>) {
    if let Some(d) = level.discrepancy() {
        if d > settings.cross_tolerance {
            failures.push(format!(
                "{label}: shooting and floquet energies differ by {d:.3e} (tolerance {:.1e})",
                settings.cross_tolerance
            ));
        }
    }
}
