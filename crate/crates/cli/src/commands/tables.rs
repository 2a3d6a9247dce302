use std::collections::BTreeMap;
use std::path::Path;

use heun_spectra::floquet::{canonical_index, find_indices, laurent_coefficients, minimal_half_width};
use heun_spectra::quasipoly::{solve_quasipoly, QuasiPolyProblem};
use heun_spectra::reference;
use heun_spectra::shooting::find_levels;
use heun_spectra::{Energy, ProblemParams};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::cli::{TablesArgs, Which};
use crate::config::Settings;
use crate::error::{CliError, CliResult, Stage};
use crate::output::{sci, Fields, Output};

const LAURENT_RELATIVE: f64 = 1e-6;
const LAURENT_ABSOLUTE: f64 = 1e-12;
const INDEX_TOLERANCE: f64 = 1e-9;
const ROOT_RELATIVE: f64 = 1e-10;
/// Window of the worked-example coefficient table.
const LAURENT_WINDOW: usize = 20;

/// One compared cell.
struct Diff {
    table: u32,
    cell: String,
    computed: Complex64,
    reference: Complex64,
    diff: f64,
    tolerance: f64,
}

impl Diff {
    fn pass(&self) -> bool {
        self.diff <= self.tolerance
    }

    fn fields(&self) -> Fields {
        Fields::new()
            .with("table", self.table)
            .with("cell", self.cell.as_str())
            .with("computed", self.computed)
            .with("reference", self.reference)
            .with("diff", self.diff)
            .with("tolerance", self.tolerance)
            .with("pass", self.pass())
    }
}

/// A recomputed table written with `--dir`.
struct Sheet {
    name: &'static str,
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn unit(a: f64, l: u32) -> CliResult<ProblemParams> {
    ProblemParams::unit_charge(a, l).map_err(|e| CliError::Usage(e.to_string()))
}

fn levels(settings: &Settings) -> CliResult<(Vec<Diff>, Sheet)> {
    let table = reference::levels();
    let mut cells: Vec<(u32, f64)> = Vec::new();
    for r in &table {
        if !cells.contains(&(r.l, r.a)) {
            cells.push((r.l, r.a));
        }
    }
    let solved: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(l, a)| {
            let count = table
                .iter()
                .filter(|r| r.l == l && r.a == a)
                .map(|r| r.n + 1)
                .max()
                .unwrap_or(0);
            let states = find_levels(&unit(a, l)?, count, &settings.shooting).stage("shooting")?;
            Ok(states.into_iter().map(|s| s.energy.0).collect())
        })
        .collect::<CliResult<_>>()?;
    let lookup: BTreeMap<(u32, u64), &Vec<f64>> = cells
        .iter()
        .zip(&solved)
        .map(|(&(l, a), e)| ((l, a.to_bits()), e))
        .collect();
    let mut diffs = Vec::new();
    let mut rows = Vec::new();
    for r in &table {
        let computed = lookup[&(r.l, r.a.to_bits())].get(r.n).copied().unwrap_or(f64::NAN);
        rows.push(vec![r.l.to_string(), sci(r.a), r.n.to_string(), sci(computed)]);
        diffs.push(Diff {
            table: 1,
            cell: format!("l={} A={} n={}", r.l, r.a, r.n),
            computed: real(computed),
            reference: real(r.energy),
            diff: (computed - r.energy).abs(),
            tolerance: r.tolerance,
        });
    }
    Ok((
        diffs,
        Sheet {
            name: "levels.csv",
            headers: vec!["l", "A", "n", "energy"],
            rows,
        },
    ))
}

fn laurent() -> CliResult<(Vec<Diff>, Sheet)> {
    let w = reference::worked_connection();
    let p = unit(10.0, 0)?;
    let energy = Energy(w.energy);
    let width = LAURENT_WINDOW.max(minimal_half_width(&p, energy));
    let s = laurent_coefficients(w.nu, energy, &p, width).stage("laurent coefficients")?;
    let table = reference::worked_laurent();
    let max = table.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let mut diffs = Vec::new();
    let mut rows = Vec::new();
    for (n, want) in table {
        let got = s.coefficient(n).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        rows.push(vec![n.to_string(), sci(got.re), sci(got.im)]);
        let (diff, tolerance) = if want.norm() > LAURENT_RELATIVE {
            ((got - want).norm() / want.norm(), LAURENT_RELATIVE)
        } else {
            ((got - want).norm(), LAURENT_ABSOLUTE * max)
        };
        diffs.push(Diff {
            table: 2,
            cell: format!("n={n}"),
            computed: got,
            reference: want,
            diff,
            tolerance,
        });
    }
    Ok((
        diffs,
        Sheet {
            name: "laurent.csv",
            headers: vec!["n", "re", "im"],
            rows,
        },
    ))
}

fn indices() -> CliResult<(Vec<Diff>, Sheet)> {
    let table = reference::indices();
    let solved: Vec<Complex64> = table
        .par_iter()
        .map(|r| {
            let p = unit(r.a, r.l)?;
            let e = Energy(r.energy);
            let pair = find_indices(e, &p, minimal_half_width(&p, e).max(40)).stage("index search")?;
            Ok(canonical_index(pair.nu1))
        })
        .collect::<CliResult<_>>()?;
    let mut diffs = Vec::new();
    let mut rows = Vec::new();
    for (r, got) in table.iter().zip(solved) {
        let want = canonical_index(r.nu);
        rows.push(vec![r.l.to_string(), sci(r.a), sci(r.energy), sci(got.re), sci(got.im)]);
        diffs.push(Diff {
            table: 3,
            cell: format!("l={} A={} E={}", r.l, r.a, r.energy),
            computed: got,
            reference: want,
            diff: (got.re - want.re).abs().max((got.im - want.im).abs()),
            tolerance: INDEX_TOLERANCE,
        });
    }
    Ok((
        diffs,
        Sheet {
            name: "indices.csv",
            headers: vec!["l", "A", "energy", "nu_re", "nu_im"],
            rows,
        },
    ))
}

fn quasipoly(failures: &mut Vec<String>) -> CliResult<(Vec<Diff>, Sheet)> {
    let table = reference::quasipoly_roots();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for r in &table {
        if !pairs.contains(&(r.p, r.l)) {
            pairs.push((r.p, r.l));
        }
    }
    let solved: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(p, l)| {
            let problem = QuasiPolyProblem::unit_charge(p, l).map_err(|e| CliError::Usage(e.to_string()))?;
            Ok(solve_quasipoly(&problem).stage("quasi-polynomial roots")?.betas())
        })
        .collect::<CliResult<_>>()?;
    let mut diffs = Vec::new();
    let mut rows = Vec::new();
    for (&(p, l), betas) in pairs.iter().zip(&solved) {
        let listed: Vec<f64> = table.iter().filter(|r| r.p == p && r.l == l).map(|r| r.beta).collect();
        if listed.len() != betas.len() {
            failures.push(format!(
                "table 4 p={p} l={l}: {} positive roots computed, {} listed",
                betas.len(),
                listed.len()
            ));
        }
        for &b in betas {
            rows.push(vec![p.to_string(), l.to_string(), sci(b)]);
        }
        for want in listed {
            let got = betas
                .iter()
                .copied()
                .min_by(|x, y| (x - want).abs().total_cmp(&(y - want).abs()))
                .unwrap_or(f64::NAN);
            diffs.push(Diff {
                table: 4,
                cell: format!("p={p} l={l} beta={want}"),
                computed: real(got),
                reference: real(want),
                diff: (got - want).abs() / want,
                tolerance: ROOT_RELATIVE,
            });
        }
    }
    Ok((
        diffs,
        Sheet {
            name: "quasipoly.csv",
            headers: vec!["p", "l", "beta"],
            rows,
        },
    ))
}

fn write_sheet(dir: &Path, sheet: &Sheet) -> CliResult<()> {
    let mut w = csv::Writer::from_path(dir.join(sheet.name)).map_err(|e| std::io::Error::other(e.to_string()))?;
    w.write_record(&sheet.headers)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    for r in &sheet.rows {
        w.write_record(r).map_err(|e| std::io::Error::other(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &TablesArgs, settings: &Settings) -> CliResult<Output> {
    let selected: Vec<u32> = match args.which {
        Which::Levels => vec![1],
        Which::Laurent => vec![2],
        Which::Indices => vec![3],
        Which::Quasipoly => vec![4],
        Which::All => vec![1, 2, 3, 4],
    };
    let mut out = Output::new("tables", "shooting, floquet and exact polynomial conditions");
    out.inputs.push(
        "which",
        selected.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
    );
    out.tolerances = Fields::new()
        .with("levels", "per cell, from the printed digits")
        .with("laurent_relative", LAURENT_RELATIVE)
        .with("laurent_absolute_scaled", LAURENT_ABSOLUTE)
        .with("index", INDEX_TOLERANCE)
        .with("root_relative", ROOT_RELATIVE);
    let mut failures = Vec::new();
    let mut all = Vec::new();
    for t in selected {
        let (diffs, sheet) = match t {
            1 => levels(settings)?,
            2 => laurent()?,
            3 => indices()?,
            _ => quasipoly(&mut failures)?,
        };
        if let Some(dir) = &args.dir {
            std::fs::create_dir_all(dir)?;
            write_sheet(dir, &sheet)?;
        }
        let worst = diffs.iter().map(|d| d.diff).fold(0.0, f64::max);
        let passed = diffs.iter().filter(|d| d.pass()).count();
        out.outputs.push(&format!("table{t}_cells"), diffs.len());
        out.outputs.push(&format!("table{t}_within_tolerance"), passed);
        out.outputs.push(&format!("table{t}_max_diff"), worst);
        all.extend(diffs);
    }
    for d in &all {
        if !d.pass() {
            failures.push(format!(
                "table {} {}: diff {:.3e} exceeds {:.1e}",
                d.table, d.cell, d.diff, d.tolerance
            ));
        }
    }
    out.records = all.iter().map(Diff::fields).collect();
    out.failures = failures;
    Ok(out)
}
