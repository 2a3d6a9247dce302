//! Published reference values bundled with the crate.

use num_complex::Complex64;

const LEVELS: &str = include_str!("../fixtures/levels.csv");
const LAURENT: &str = include_str!("../fixtures/laurent_worked.csv");
const INDICES: &str = include_str!("../fixtures/indices.csv");
const QUASIPOLY: &str = include_str!("../fixtures/quasipoly_roots.csv");
const CONNECTION: &str = include_str!("../fixtures/worked_connection.csv");

fn records(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(str::trim).collect())
}

fn num(s: &str) -> f64 {
    s.parse()
        .unwrap_or_else(|_| panic!("bad number in bundled fixture: {s}"))
}

/// A tabulated energy level at `Z = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceLevel {
    pub l: u32,
    pub a: f64,
    pub n: usize,
    pub energy: f64,
    /// Absolute tolerance implied by the printed digits.
    pub tolerance: f64,
}

pub fn levels() -> Vec<ReferenceLevel> {
    records(LEVELS)
        .map(|r| ReferenceLevel {
            l: r[0].parse().expect("integer l"),
            a: num(r[1]),
            n: r[2].parse().expect("integer n"),
            energy: num(r[3]),
            tolerance: num(r[4]),
        })
        .collect()
}

/// Laurent coefficients `(n, c_n)` of one Floquet solution of the worked
/// example (`A = 10`, `l = 0`), normalised to `c₀ = 1`.
pub fn worked_laurent() -> Vec<(i64, Complex64)> {
    records(LAURENT)
        .map(|r| (r[0].parse().expect("integer n"), Complex64::new(num(r[1]), num(r[2]))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceIndex {
    pub l: u32,
    pub a: f64,
    pub nu: Complex64,
    pub energy: f64,
}

pub fn indices() -> Vec<ReferenceIndex> {
    records(INDICES)
        .map(|r| ReferenceIndex {
            l: r[0].parse().expect("integer l"),
            a: num(r[1]),
            nu: Complex64::new(num(r[2]), num(r[3])),
            energy: num(r[4]),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRoot {
    pub p: u32,
    pub l: u32,
    pub beta: f64,
}

pub fn quasipoly_roots() -> Vec<ReferenceRoot> {
    records(QUASIPOLY)
        .map(|r| ReferenceRoot {
            p: r[0].parse().expect("integer p"),
            l: r[1].parse().expect("integer l"),
            beta: num(r[2]),
        })
        .collect()
}

/// Connection data of the worked example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkedConnection {
    pub energy: f64,
    pub nu: Complex64,
    pub zeta1: Complex64,
    pub a0: Complex64,
    pub b0: Complex64,
}

pub fn worked_connection() -> WorkedConnection {
    let get = |key: &str| {
        records(CONNECTION)
            .find(|r| r[0] == key)
            .map(|r| num(r[1]))
            .unwrap_or_else(|| panic!("missing key {key}"))
    };
    WorkedConnection {
        energy: get("energy"),
        nu: Complex64::new(0.0, get("nu_im")),
        zeta1: Complex64::new(get("zeta1_re"), get("zeta1_im")),
        a0: Complex64::new(0.0, get("a0_im")),
        b0: Complex64::new(0.0, get("b0_im")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_sizes() {
        assert_eq!(levels().len(), 45);
        assert_eq!(worked_laurent().len(), 41);
        assert_eq!(indices().len(), 9);
        assert_eq!(quasipoly_roots().len(), 20);
        let w = worked_connection();
        assert!((w.zeta1.norm() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn laurent_fixture_is_normalised() {
        let c = worked_laurent();
        let c0 = c.iter().find(|(n, _)| *n == 0).unwrap().1;
        assert_eq!(c0, Complex64::new(1.0, 0.0));
    }
}
