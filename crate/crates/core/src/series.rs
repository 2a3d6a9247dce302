//! Asymptotic expansions of the reduced wave function at the two irregular
//! singular points.
//!
//! At infinity the solutions behave as `exp(∓αz) z^{±μ} Σ a_m z^{-m}` and at
//! the origin as `exp(∓β/z) z Σ b_m z^m`; the upper sign is the recessive
//! (physical) branch. Both series diverge, so they are summed up to their
//! smallest term and the first omitted term serves as error estimate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{derive_exponents, Energy, Exponents, ProblemParams};

/// Number of coefficients generated by the convenience constructors.
pub const DEFAULT_TERMS: usize = 400;

/// Relative error bound used to pick the evaluation points near the
/// singularities.
pub const DEFAULT_TOLERANCE: f64 = 1e-11;

/// Coefficients are not generated past this magnitude.
const COEFFICIENT_CEILING: f64 = 1e250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    InfinityRecessive,
    InfinityDominant,
    ZeroRecessive,
    ZeroDominant,
}

impl SeriesKind {
    pub fn at_infinity(self) -> bool {
        matches!(self, SeriesKind::InfinityRecessive | SeriesKind::InfinityDominant)
    }

    pub fn is_recessive(self) -> bool {
        matches!(self, SeriesKind::InfinityRecessive | SeriesKind::ZeroRecessive)
    }

    fn sign(self) -> f64 {
        if self.is_recessive() {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticSeries {
    pub kind: SeriesKind,
    /// `a_m` (or `b_m`), starting at `m = 0`.
    pub coefficients: Vec<Complex64>,
    pub leading_coefficient: Complex64,
    pub params: ProblemParams,
    pub energy: Energy,
    pub exponents: Exponents,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEvaluation {
    pub value: Complex64,
    pub derivative: Complex64,
    pub second_derivative: Complex64,
    /// Index of the first omitted term.
    pub truncation_index: usize,
    /// Absolute error estimate, the magnitude of the omitted terms at the
    /// truncation point (including the prefactor).
    pub error_estimate: f64,
}

impl SeriesEvaluation {
    pub fn relative_error(&self) -> f64 {
        self.error_estimate / self.value.norm()
    }
}

/// `a_m` for the recessive expansion at infinity.
pub fn asym_coeffs_infinity(
    params: &ProblemParams,
    energy: Energy,
    a0: Complex64,
    terms: usize,
) -> Result<AsymptoticSeries> {
    build(SeriesKind::InfinityRecessive, params, energy, a0, terms)
}

/// `b_m` for the recessive expansion at the origin.
pub fn asym_coeffs_zero(
    params: &ProblemParams,
    energy: Energy,
    b0: Complex64,
    terms: usize,
) -> Result<AsymptoticSeries> {
    build(SeriesKind::ZeroRecessive, params, energy, b0, terms)
}

/// Growing counterparts, obtained from the recessive recurrences with
/// `α → −α, μ → −μ` (infinity) or `β → −β` (origin).
pub fn dominant_coeffs(
    kind: SeriesKind,
    params: &ProblemParams,
    energy: Energy,
    leading: Complex64,
    terms: usize,
) -> Result<AsymptoticSeries> {
    if kind.is_recessive() {
        return Err(Error::Domain(format!("{kind:?} is not a dominant series kind")));
    }
    build(kind, params, energy, leading, terms)
}

fn build(
    kind: SeriesKind,
    params: &ProblemParams,
    energy: Energy,
    leading: Complex64,
    terms: usize,
) -> Result<AsymptoticSeries> {
    let exponents = derive_exponents(params, energy)?;
    if terms < 1 {
        return Err(Error::Domain("at least one series coefficient is required".into()));
    }
    let s = kind.sign();
    let l_term = params.centrifugal();
    let mut c: Vec<Complex64> = Vec::with_capacity(terms + 1);
    c.push(leading);
    let get = |c: &[Complex64], k: isize| -> Complex64 {
        if k < 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c[k as usize]
        }
    };
    if kind.at_infinity() {
        let alpha = s * exponents.alpha;
        let mu = s * exponents.mu;
        if alpha == 0.0 {
            return Err(Error::Domain("alpha vanishes; no expansion at infinity".into()));
        }
        for m in 1..=terms {
            let mf = m as f64;
            let k = m as isize;
            let rhs = get(&c, k - 1) * ((mf - mu) * (mf - 1.0 - mu) - l_term) - get(&c, k - 3) * params.a;
            let next = rhs / (-2.0 * alpha * mf);
            if !representable(next) {
                break;
            }
            c.push(next);
        }
    } else {
        let beta = s * exponents.beta;
        if beta == 0.0 {
            return Err(Error::Domain(
                "beta vanishes (A = 0); no expansion at the origin".into(),
            ));
        }
        for m in 1..=terms {
            let mf = m as f64;
            let k = m as isize;
            let rhs =
                get(&c, k - 1) * (mf * (mf - 1.0) - l_term) + get(&c, k - 2) * params.z + get(&c, k - 3) * energy.0;
            let next = rhs / (-2.0 * beta * mf);
            if !representable(next) {
                break;
            }
            c.push(next);
        }
    }
    Ok(AsymptoticSeries {
        kind,
        coefficients: c,
        leading_coefficient: leading,
        params: *params,
        energy,
        exponents,
    })
}

/// Finite, below the ceiling and not underflowed. Exact zeros are kept.
fn representable(c: Complex64) -> bool {
    let r = c.norm();
    r.is_finite() && r <= COEFFICIENT_CEILING && (r == 0.0 || r >= f64::MIN_POSITIVE)
}

impl AsymptoticSeries {
    /// Residual of the defining recurrence at row `m ≥ 1`, relative to the
    /// largest term of that row.
    pub fn recurrence_residual(&self, m: usize) -> f64 {
        let c = &self.coefficients;
        let get = |k: isize| -> Complex64 {
            if k < 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c[k as usize]
            }
        };
        let s = self.kind.sign();
        let mf = m as f64;
        let k = m as isize;
        let l_term = self.params.centrifugal();
        let terms: [Complex64; 4] = if self.kind.at_infinity() {
            let alpha = s * self.exponents.alpha;
            let mu = s * self.exponents.mu;
            [
                get(k) * (2.0 * alpha * mf),
                get(k - 1) * ((mf - mu) * (mf - 1.0 - mu) - l_term),
                -get(k - 3) * self.params.a,
                Complex64::new(0.0, 0.0),
            ]
        } else {
            let beta = s * self.exponents.beta;
            [
                get(k) * (2.0 * beta * mf),
                get(k - 1) * (mf * (mf - 1.0) - l_term),
                get(k - 2) * self.params.z,
                get(k - 3) * self.energy.0,
            ]
        };
        let sum: Complex64 = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            sum.norm() / scale
        }
    }

    /// `(ln g, g'/g, g''/g)` of the exponential prefactor.
    fn prefactor(&self, z: f64) -> (f64, f64, f64) {
        let s = self.kind.sign();
        let Exponents { alpha, mu, beta } = self.exponents;
        if self.kind.at_infinity() {
            let log = -s * alpha * z + s * mu * z.ln();
            let g = -s * alpha + s * mu / z;
            let dg = -s * mu / (z * z);
            (log, g, g * g + dg)
        } else {
            let log = -s * beta / z + z.ln();
            let g = s * beta / (z * z) + 1.0 / z;
            let dg = -2.0 * s * beta / (z * z * z) - 1.0 / (z * z);
            (log, g, g * g + dg)
        }
    }

    /// `ln |c_m x^m|` with `x = 1/z` at infinity and `x = z` at the origin.
    fn log_term(&self, m: usize, log_x: f64) -> f64 {
        let c = self.coefficients[m].norm();
        if c == 0.0 {
            f64::NEG_INFINITY
        } else {
            c.ln() + m as f64 * log_x
        }
    }

    /// Sums the series up to its smallest term (optimal truncation).
    ///
    /// The smallest term is located on a sliding window of three
    /// consecutive terms, since individual coefficients may vanish (for
    /// instance `b_1 = 0` when `l = 0`).
    pub fn evaluate(&self, z: f64) -> SeriesEvaluation {
        let log_x = if self.kind.at_infinity() { -z.ln() } else { z.ln() };
        let len = self.coefficients.len();
        let logs: Vec<f64> = (0..len).map(|m| self.log_term(m, log_x)).collect();
        let window = |k: usize| -> f64 {
            logs[k..(k + 3).min(len)]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let (mut cut, mut best) = (len, f64::NEG_INFINITY);
        if len > 1 {
            cut = 1;
            best = window(1);
            for k in 2..len {
                let w = window(k);
                if w < best {
                    best = w;
                    cut = k;
                }
            }
        }

        let (mut s0, mut s1, mut s2) = (Complex64::default(), Complex64::default(), Complex64::default());
        for (m, &c) in self.coefficients.iter().enumerate().take(cut) {
            if c.norm() == 0.0 {
                continue;
            }
            let t = c.unscale(c.norm()) * logs[m].exp();
            let mf = m as f64;
            if self.kind.at_infinity() {
                s0 += t;
                s1 += t * (-mf / z);
                s2 += t * (mf * (mf + 1.0) / (z * z));
            } else {
                s0 += t;
                s1 += t * (mf / z);
                s2 += t * (mf * (mf - 1.0) / (z * z));
            }
        }
        let (log_g, g1, g2) = self.prefactor(z);
        let pre = log_g.exp();
        SeriesEvaluation {
            value: s0 * pre,
            derivative: (s0 * g1 + s1) * pre,
            second_derivative: (s0 * g2 + s1 * (2.0 * g1) + s2) * pre,
            truncation_index: cut,
            error_estimate: if cut < len { (best + log_g).exp() } else { 0.0 },
        }
    }

    /// Like [`AsymptoticSeries::evaluate`], failing when the relative error
    /// estimate exceeds `tolerance`.
    pub fn evaluate_within(&self, z: f64, tolerance: f64) -> Result<SeriesEvaluation> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("evaluation point must be positive, got {z}")));
        }
        let ev = self.evaluate(z);
        let rel = ev.relative_error();
        if rel.is_finite() && rel <= tolerance {
            Ok(ev)
        } else {
            Err(Error::AsymptoticRegime {
                z,
                estimate: rel,
                tolerance,
            })
        }
    }
}

/// Evaluates with the default tolerance.
pub fn eval_asymptotic(series: &AsymptoticSeries, z: f64) -> Result<SeriesEvaluation> {
    series.evaluate_within(z, DEFAULT_TOLERANCE)
}

/// `f g' − f' g`
pub fn wronskian(f: Complex64, df: Complex64, g: Complex64, dg: Complex64) -> Complex64 {
    f * dg - df * g
}

/// Smallest `z ≥ 10/α` (on a geometric ladder of ratio 1.05) at which the
/// recessive expansion at infinity meets `tolerance`.
pub fn far_point(params: &ProblemParams, energy: Energy, tolerance: f64) -> Result<f64> {
    let series = asym_coeffs_infinity(params, energy, Complex64::new(1.0, 0.0), DEFAULT_TERMS)?;
    let mut z = 10.0 / series.exponents.alpha;
    let mut last = f64::INFINITY;
    for _ in 0..400 {
        let rel = series.evaluate(z).relative_error();
        if rel <= tolerance {
            return Ok(z);
        }
        last = rel;
        z *= 1.05;
    }
    Err(Error::AsymptoticRegime {
        z,
        estimate: last,
        tolerance,
    })
}

/// Largest `z ≤ β/10` at which the recessive expansion at the origin meets
/// `tolerance`. Points below `β/40` are not considered: the recessive
/// solution is too small there to start an integration from.
pub fn near_point(params: &ProblemParams, energy: Energy, tolerance: f64) -> Result<f64> {
    params.require_supersingular()?;
    let series = asym_coeffs_zero(params, energy, Complex64::new(1.0, 0.0), DEFAULT_TERMS)?;
    let beta = series.exponents.beta;
    let floor = beta / 40.0;
    let mut z = beta / 10.0;
    let mut last = f64::INFINITY;
    while z >= floor {
        let rel = series.evaluate(z).relative_error();
        if rel <= tolerance {
            return Ok(z);
        }
        last = rel;
        z /= 1.05;
    }
    Err(Error::AsymptoticRegime {
        z,
        estimate: last,
        tolerance,
    })
}
