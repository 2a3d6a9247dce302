//! Intensities `A` at which a bound state is elementary,
//! `w(z) = exp(−αz − β/z) · z · v(z)` with `β = √A` and `v` a polynomial of
//! degree `p − 1`.
//!
//! Such states exist only at `E = −Z²/(4p²)`. The admissible `β` are the
//! positive roots of a closure polynomial, derived here exactly in three
//! ways: from the expansion at infinity, from the expansion at the origin,
//! and from the recurrence obeyed by the coefficients of `v`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{Energy, ProblemParams};
use crate::shooting::{integrate_from_infinity, integrate_from_zero, mismatch, ShootingConfig};

/// Relative agreement required between the roots of the three procedures.
pub const AGREEMENT_TOLERANCE: f64 = 1e-10;

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} has no exact rational form")))
}

fn factorial(n: usize) -> BigRational {
    (1..=n as i64).fold(BigRational::one(), |acc, k| acc * rational(k))
}

/// Univariate polynomial with exact rational coefficients, lowest degree
/// first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coefficients: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coefficients: Vec<BigRational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn variable() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coefficients.iter().map(|a| a * c).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coefficients = vec![BigRational::zero(); k];
        coefficients.extend(self.coefficients.iter().cloned());
        Self::new(coefficients)
    }

    /// Removes the factor `x^k` of highest `k`, returning the quotient and
    /// `k`.
    pub fn strip_zero_roots(&self) -> (Self, usize) {
        let k = self.coefficients.iter().take_while(|c| c.is_zero()).count();
        (Self::new(self.coefficients[k..].to_vec()), k)
    }

    /// Same roots, leading coefficient one.
    pub fn monic(&self) -> Self {
        match self.coefficients.last() {
            Some(lead) => self.scale(&lead.recip()),
            None => Self::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rational(k as i64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.to_f64().iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Sign of the exact value at `x`.
    fn sign_at(&self, x: f64) -> Option<i8> {
        let v = self.eval(&BigRational::from_float(x)?);
        Some(if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        })
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let m = c.abs();
            match k {
                0 => write!(f, "{m}")?,
                _ if m.is_one() => {}
                _ => write!(f, "{m}*")?,
            }
            match k {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{k}")?,
            }
        }
        Ok(())
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coefficients.len().max(rhs.coefficients.len());
        let get = |p: &RationalPoly, k: usize| p.coefficients.get(k).cloned().unwrap_or_else(BigRational::zero);
        RationalPoly::new((0..n).map(|k| get(self, k) + get(rhs, k)).collect())
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::new(self.coefficients.iter().map(|c| -c).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        self + &(-rhs)
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coefficients.len() + rhs.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in rhs.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

/// An order `p`, angular momentum `l` and Coulomb intensity `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiPolyProblem {
    pub p: u32,
    pub l: u32,
    pub z: f64,
}

impl QuasiPolyProblem {
    pub fn new(p: u32, l: u32, z: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("the order p must be at least 1".into()));
        }
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::Domain(format!(
                "Coulomb intensity Z must be finite and positive, got {z}"
            )));
        }
        Ok(Self { p, l, z })
    }

    pub fn unit_charge(p: u32, l: u32) -> Result<Self> {
        Self::new(p, l, 1.0)
    }

    /// `E = −Z²/(4p²)`
    pub fn energy(&self) -> Energy {
        let p = f64::from(self.p);
        Energy(-self.z * self.z / (4.0 * p * p))
    }

    /// `α = Z/(2p)`
    pub fn alpha(&self) -> f64 {
        self.z / (2.0 * f64::from(self.p))
    }

    fn exact(&self) -> Result<ExactParams> {
        let z = exact(self.z)?;
        let alpha = &z / rational(2 * i64::from(self.p));
        let l = i64::from(self.l);
        Ok(ExactParams {
            p: self.p as usize,
            centrifugal: rational(l * (l + 1)),
            energy: -(&alpha * &alpha),
            alpha,
            z,
        })
    }
}

struct ExactParams {
    p: usize,
    centrifugal: BigRational,
    alpha: BigRational,
    z: BigRational,
    energy: BigRational,
}

/// Route by which the closure polynomial was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Procedure {
    /// Matching against the asymptotic expansion at infinity.
    InfinityExpansion,
    /// Matching against the expansion at the origin.
    ZeroExpansion,
    /// The three-term recurrence of the coefficients of `v`.
    DirectRecurrence,
}

impl Procedure {
    pub const ALL: [Procedure; 3] = [Self::InfinityExpansion, Self::ZeroExpansion, Self::DirectRecurrence];

    pub fn label(self) -> &'static str {
        match self {
            Procedure::InfinityExpansion => "infinity-expansion",
            Procedure::ZeroExpansion => "zero-expansion",
            Procedure::DirectRecurrence => "recurrence",
        }
    }
}

/// The coefficients `v_0, …, v_{p−1}` of `v` as rational functions
/// `numerator_k(β) / β^{power_k}`, together with the closure expression that
/// must vanish, `closure(β) / β^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialChain {
    pub procedure: Procedure,
    pub numerators: Vec<RationalPoly>,
    pub denominator_powers: Vec<usize>,
    pub closure: RationalPoly,
}

impl PolynomialChain {
    /// Coefficients of `v` at a numeric `β`, normalised to `v_0 = 1`.
    pub fn coefficients_at(&self, beta: f64) -> Vec<f64> {
        let raw: Vec<f64> = self
            .numerators
            .iter()
            .zip(&self.denominator_powers)
            .map(|(n, &k)| n.eval_f64(beta) / beta.powi(k as i32))
            .collect();
        let v0 = raw[0];
        raw.into_iter().map(|c| c / v0).collect()
    }
}

/// Chain obtained by matching `exp(−β/z) v(z)` against `z^{p−1}` times the
/// recessive expansion at infinity (leading coefficient one).
pub fn chain_from_infinity(problem: &QuasiPolyProblem) -> Result<PolynomialChain> {
    let ex = problem.exact()?;
    let p = ex.p;
    let mu = rational(p as i64);
    let beta = RationalPoly::variable();
    let a_int = &beta * &beta;
    let mut a: Vec<RationalPoly> = vec![RationalPoly::constant(BigRational::one())];
    for m in 1..=p {
        let mm = rational(m as i64);
        let c = (&mm - &mu) * (&mm - rational(1) - &mu) - &ex.centrifugal;
        let mut t = a[m - 1].scale(&c);
        if m >= 3 {
            t = &t - &(&a_int * &a[m - 3]);
        }
        let denom = -(rational(2) * &ex.alpha * &mm);
        a.push(t.scale(&denom.recip()));
    }
    let minus_beta_power = |s: usize| {
        let sign = if s.is_multiple_of(2) { rational(1) } else { rational(-1) };
        RationalPoly::constant(sign / factorial(s)).shift(s)
    };
    let mut xi = vec![RationalPoly::zero(); p];
    for k in 0..p {
        let mut v = a[k].clone();
        for s in 1..=k {
            v = &v - &(&minus_beta_power(s) * &xi[p - 1 - k + s]);
        }
        xi[p - 1 - k] = v;
    }
    let mut closure = a[p].clone();
    for s in 1..=p {
        closure = &closure - &(&minus_beta_power(s) * &xi[s - 1]);
    }
    Ok(PolynomialChain {
        procedure: Procedure::InfinityExpansion,
        denominator_powers: vec![0; p],
        numerators: xi,
        closure: closure.shift(p),
    })
}

/// Chain obtained by matching `exp(−αz) v(z)` against the recessive
/// expansion at the origin (leading coefficient one).
pub fn chain_from_zero(problem: &QuasiPolyProblem) -> Result<PolynomialChain> {
    let ex = problem.exact()?;
    let p = ex.p;
    let beta = RationalPoly::variable();
    let beta2 = &beta * &beta;
    // b_m = scaled[m] / β^m
    let mut scaled: Vec<RationalPoly> = vec![RationalPoly::constant(BigRational::one())];
    for m in 1..=p {
        let mm = m as i64;
        let mut t = scaled[m - 1].scale(&(rational(mm * (mm - 1)) - &ex.centrifugal));
        if m >= 2 {
            t = &t + &(&beta * &scaled[m - 2]).scale(&ex.z);
        }
        if m >= 3 {
            t = &t + &(&beta2 * &scaled[m - 3]).scale(&ex.energy);
        }
        scaled.push(t.scale(&rational(-2 * mm).recip()));
    }
    let minus_alpha = -ex.alpha.clone();
    let weight = |s: usize| {
        let mut c = BigRational::one();
        for _ in 0..s {
            c *= &minus_alpha;
        }
        c / factorial(s)
    };
    // v_k = xi[k] / β^k
    let mut xi: Vec<RationalPoly> = Vec::with_capacity(p + 1);
    for k in 0..=p {
        let mut v = scaled[k].clone();
        for s in 1..=k {
            v = &v - &xi[k - s].shift(s).scale(&weight(s));
        }
        xi.push(v);
    }
    let closure = xi.pop().expect("chain has p + 1 entries");
    Ok(PolynomialChain {
        procedure: Procedure::ZeroExpansion,
        numerators: xi,
        denominator_powers: (0..p).collect(),
        closure,
    })
}

/// Chain generated by the recurrence
/// `−2βj v_j = (j(j−1) − l(l+1) − 2αβ) v_{j−1} + (Z − 2α(j−1)) v_{j−2}`
/// from `v_0 = 1`.
pub fn chain_from_recurrence(problem: &QuasiPolyProblem) -> Result<PolynomialChain> {
    let ex = problem.exact()?;
    let p = ex.p;
    let beta = RationalPoly::variable();
    // v_j = scaled[j] / β^j
    let mut scaled: Vec<RationalPoly> = vec![RationalPoly::constant(BigRational::one())];
    for j in 1..=p {
        let jj = j as i64;
        let linear = RationalPoly::new(vec![
            rational(jj * (jj - 1)) - &ex.centrifugal,
            -(rational(2) * &ex.alpha),
        ]);
        let mut t = &linear * &scaled[j - 1];
        if j >= 2 {
            let c = &ex.z - rational(2) * &ex.alpha * rational(jj - 1);
            t = &t + &(&beta * &scaled[j - 2]).scale(&c);
        }
        scaled.push(t.scale(&rational(-2 * jj).recip()));
    }
    let closure = scaled.pop().expect("chain has p + 1 entries");
    Ok(PolynomialChain {
        procedure: Procedure::DirectRecurrence,
        numerators: scaled,
        denominator_powers: (0..p).collect(),
        closure,
    })
}

pub fn chain(problem: &QuasiPolyProblem, procedure: Procedure) -> Result<PolynomialChain> {
    match procedure {
        Procedure::InfinityExpansion => chain_from_infinity(problem),
        Procedure::ZeroExpansion => chain_from_zero(problem),
        Procedure::DirectRecurrence => chain_from_recurrence(problem),
    }
}

/// Monic closure polynomial in `β` with the factor `β^k` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPolynomial {
    pub polynomial: RationalPoly,
    pub procedure: Procedure,
    /// Multiplicity of the removed root at `β = 0`.
    pub zero_roots: usize,
}

impl BetaPolynomial {
    pub fn degree(&self) -> usize {
        self.polynomial.degree().unwrap_or(0)
    }
}

pub fn beta_polynomial(problem: &QuasiPolyProblem, procedure: Procedure) -> Result<BetaPolynomial> {
    let chain = chain(problem, procedure)?;
    if chain.closure.is_zero() {
        return Err(Error::Degenerate(format!(
            "closure vanishes identically for p = {}, l = {}",
            problem.p, problem.l
        )));
    }
    let (polynomial, zero_roots) = chain.closure.strip_zero_roots();
    Ok(BetaPolynomial {
        polynomial: polynomial.monic(),
        procedure,
        zero_roots,
    })
}

fn companion_roots(coefficients: &[f64]) -> Vec<Complex64> {
    let n = coefficients.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = coefficients[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coefficients[i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Newton iteration with exact evaluation of the polynomial and its
/// derivative at each floating-point iterate.
fn polish(poly: &RationalPoly, x0: f64) -> f64 {
    let d = poly.derivative();
    let mut x = x0;
    for _ in 0..50 {
        let Some(xr) = BigRational::from_float(x) else {
            return x;
        };
        let dv = d.eval(&xr);
        if dv.is_zero() {
            return x;
        }
        let step = (poly.eval(&xr) / dv).to_f64().unwrap_or(0.0);
        let next = x - step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs() || next == x {
            return next;
        }
        x = next;
    }
    x
}

/// A real root confirmed by an exact sign change, or a rejected candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSplit {
    pub real: Vec<f64>,
    pub complex: Vec<Complex64>,
}

/// Real and complex roots of an exact polynomial.
pub fn split_roots(poly: &RationalPoly) -> RootSplit {
    let mut real = Vec::new();
    let mut complex = Vec::new();
    for r in companion_roots(&poly.to_f64()) {
        if r.im.abs() > 1e-7 * r.norm().max(1.0) {
            complex.push(r);
            continue;
        }
        let x = polish(poly, r.re);
        let delta = 1e-12 * x.abs().max(1e-300);
        let confirmed = match (poly.sign_at(x - delta), poly.sign_at(x), poly.sign_at(x + delta)) {
            (_, Some(0), _) => true,
            (Some(a), _, Some(b)) => a * b < 0,
            _ => false,
        };
        if confirmed {
            real.push(x);
        } else {
            complex.push(r);
        }
    }
    real.sort_by(f64::total_cmp);
    real.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()));
    RootSplit { real, complex }
}

/// One admissible `β` with the coefficients of `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPolyRoot {
    pub beta: f64,
    /// `A = β²`
    pub a: f64,
    /// `v_0, …, v_{p−1}` with `v_0 = 1`.
    pub coefficients: Vec<f64>,
    /// `max_{p ≤ j ≤ p+3} |v_j| / max_{j<p} |v_j|` from the numeric
    /// recurrence.
    pub termination: f64,
    alpha: f64,
    l: u32,
    z: f64,
}

impl QuasiPolyRoot {
    fn new(problem: &QuasiPolyProblem, beta: f64) -> Self {
        let p = problem.p as usize;
        let alpha = problem.alpha();
        let v = numeric_recurrence(problem, beta, p + 3);
        let head = v[..p].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let tail = v[p..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Self {
            beta,
            a: beta * beta,
            coefficients: v[..p].to_vec(),
            termination: tail / head,
            alpha,
            l: problem.l,
            z: problem.z,
        }
    }

    /// Values of `v`, `v'` and `v''` at `z`.
    pub fn polynomial(&self, z: f64) -> (f64, f64, f64) {
        let mut v = (0.0, 0.0, 0.0);
        for c in self.coefficients.iter().rev() {
            v = (v.0 * z + c, v.1 * z + v.0, v.2 * z + 2.0 * v.1);
        }
        v
    }

    /// `w(z) = exp(−αz − β/z) · z · v(z)` and its first two derivatives.
    pub fn wave_function(&self, z: f64) -> (f64, f64, f64) {
        let (e, d1, d2) = self.factored(z);
        let g = (-self.alpha * z - self.beta / z).exp();
        (g * e, g * d1, g * d2)
    }

    /// Terms of `exp(αz + β/z) · (w, w', w'')`.
    fn factored(&self, z: f64) -> (f64, f64, f64) {
        let (u, du, d2u) = self.shifted(z);
        let phi1 = -self.alpha + self.beta / (z * z);
        let phi2 = -2.0 * self.beta / (z * z * z);
        (u, du + phi1 * u, d2u + 2.0 * phi1 * du + (phi2 + phi1 * phi1) * u)
    }

    fn shifted(&self, z: f64) -> (f64, f64, f64) {
        let (v, dv, d2v) = self.polynomial(z);
        (z * v, v + z * dv, 2.0 * dv + z * d2v)
    }

    /// Residual of `z² w'' + q(z) w = 0` relative to the magnitude of its
    /// terms.
    pub fn residual(&self, z: f64, energy: Energy) -> f64 {
        let (u, du, d2u) = self.shifted(z);
        let phi1 = -self.alpha + self.beta / (z * z);
        let phi2 = -2.0 * self.beta / (z * z * z);
        let q = ProblemParams {
            a: self.a,
            z: self.z,
            l: self.l,
        }
        .reduced_coefficient(energy, z);
        let terms = [
            z * z * d2u,
            z * z * 2.0 * phi1 * du,
            z * z * (phi2 + phi1 * phi1) * u,
            q * u,
        ];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        terms.iter().sum::<f64>().abs() / scale
    }

    /// Sign changes of `v` on `(0, ∞)`.
    pub fn polynomial_nodes(&self) -> usize {
        let v = |z: f64| self.polynomial(z).0;
        companion_roots(&self.coefficients)
            .into_iter()
            .filter(|r| r.im.abs() <= 1e-7 * r.norm().max(1.0) && r.re > 0.0)
            .filter(|r| {
                let d = 1e-9 * r.re;
                v(r.re - d).signum() != v(r.re + d).signum()
            })
            .count()
    }
}

/// `v_0, …, v_{max}` at numeric `β` with `v_0 = 1`.
pub fn numeric_recurrence(problem: &QuasiPolyProblem, beta: f64, max: usize) -> Vec<f64> {
    let alpha = problem.alpha();
    let centrifugal = {
        let l = f64::from(problem.l);
        l * (l + 1.0)
    };
    let mut v = vec![1.0];
    for j in 1..=max {
        let jf = j as f64;
        let mut t = (jf * (jf - 1.0) - centrifugal - 2.0 * alpha * beta) * v[j - 1];
        if j >= 2 {
            t += (problem.z - 2.0 * alpha * (jf - 1.0)) * v[j - 2];
        }
        v.push(t / (-2.0 * beta * jf));
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPolyResult {
    pub problem: QuasiPolyProblem,
    pub energy: Energy,
    /// Closure polynomial from the recurrence.
    pub polynomial: BetaPolynomial,
    /// Admissible roots in ascending `β`.
    pub roots: Vec<QuasiPolyRoot>,
    /// Real roots with `β ≤ 0`, including removed roots at zero.
    pub non_positive: Vec<f64>,
    pub complex: Vec<Complex64>,
    /// Largest relative difference between matched roots of the three
    /// procedures.
    pub agreement: f64,
    pub note: Option<String>,
}

impl QuasiPolyResult {
    pub fn betas(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.beta).collect()
    }
}

fn positive_roots(poly: &BetaPolynomial) -> (Vec<f64>, RootSplit) {
    let split = split_roots(&poly.polynomial);
    (split.real.iter().copied().filter(|&b| b > 0.0).collect(), split)
}

/// All positive `β` for which `(p, l, Z)` has an elementary bound state.
pub fn solve_quasipoly(problem: &QuasiPolyProblem) -> Result<QuasiPolyResult> {
    let polynomial = beta_polynomial(problem, Procedure::DirectRecurrence)?;
    let (betas, split) = positive_roots(&polynomial);
    let mut agreement: f64 = 0.0;
    for procedure in [Procedure::InfinityExpansion, Procedure::ZeroExpansion] {
        let other = beta_polynomial(problem, procedure)?;
        let (other_betas, _) = positive_roots(&other);
        if other_betas.len() != betas.len() {
            return Err(Error::Disagreement(format!(
                "{} gives {} positive roots, {} gives {}",
                procedure.label(),
                other_betas.len(),
                Procedure::DirectRecurrence.label(),
                betas.len()
            )));
        }
        for (a, b) in betas.iter().zip(&other_betas) {
            agreement = agreement.max((a - b).abs() / a.abs());
        }
    }
    if agreement > AGREEMENT_TOLERANCE {
        return Err(Error::Disagreement(format!(
            "roots differ by {agreement:e} relative between procedures"
        )));
    }
    let mut non_positive: Vec<f64> = split.real.iter().copied().filter(|&b| b <= 0.0).collect();
    non_positive.extend(std::iter::repeat_n(0.0, polynomial.zero_roots));
    non_positive.sort_by(f64::total_cmp);
    let note = (problem.p == 1)
        .then(|| "no elementary state with A > 0 exists at p = 1: the closure forces β = −l(l+1)/(2α) ≤ 0".to_string());
    Ok(QuasiPolyResult {
        problem: *problem,
        energy: problem.energy(),
        roots: betas.iter().map(|&b| QuasiPolyRoot::new(problem, b)).collect(),
        polynomial,
        non_positive,
        complex: split.complex,
        agreement,
        note,
    })
}

/// Checks of one root against the general solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct RootValidation {
    pub beta: f64,
    /// Scale-free shooting mismatch at `E = −Z²/(4p²)`.
    pub mismatch: Option<f64>,
    /// Largest relative residual of the closed form over the sample points.
    pub residual: f64,
    pub termination: f64,
    /// Positive roots of `v`.
    pub polynomial_nodes: usize,
    /// Nodes seen by the shooting integrators.
    pub shooting_nodes: Option<usize>,
    pub failures: Vec<String>,
}

impl RootValidation {
    pub fn is_genuine(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiPolyReport {
    pub roots: Vec<RootValidation>,
}

impl QuasiPolyReport {
    pub fn all_genuine(&self) -> bool {
        self.roots.iter().all(RootValidation::is_genuine)
    }
}

pub const MISMATCH_TOLERANCE: f64 = 1e-9;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const TERMINATION_TOLERANCE: f64 = 1e-10;
pub const RESIDUAL_SAMPLES: usize = 20;

/// Log-spaced points covering the bulk of the closed-form state.
pub fn residual_points(problem: &QuasiPolyProblem, beta: f64) -> Vec<f64> {
    let p = f64::from(problem.p);
    let lo = (beta / (10.0 * p)).min(0.5);
    let hi = (20.0 * p / problem.z).max(4.0 * lo);
    let n = RESIDUAL_SAMPLES;
    (0..n)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn validate_root(problem: &QuasiPolyProblem, root: &QuasiPolyRoot, cfg: &ShootingConfig) -> RootValidation {
    let energy = problem.energy();
    let mut failures = Vec::new();
    let residual = residual_points(problem, root.beta)
        .into_iter()
        .map(|z| root.residual(z, energy))
        .fold(0.0, f64::max);
    if !(residual < RESIDUAL_TOLERANCE) {
        failures.push(format!("closed-form residual {residual:e}"));
    }
    if !(root.termination < TERMINATION_TOLERANCE) {
        failures.push(format!("coefficients do not terminate ({:e})", root.termination));
    }
    let polynomial_nodes = root.polynomial_nodes();
    let shooting = ProblemParams::new(root.a, problem.z, problem.l).and_then(|params| {
        let m = mismatch(energy, &params, cfg)?;
        let out = integrate_from_zero(energy, &params, cfg)?;
        let inw = integrate_from_infinity(energy, &params, cfg)?;
        Ok((m, out.nodes + inw.nodes))
    });
    let (mismatch, shooting_nodes) = match shooting {
        Ok((m, nodes)) => {
            if !(m.abs() < MISMATCH_TOLERANCE) {
                failures.push(format!("shooting mismatch {m:e}"));
            }
            if nodes != polynomial_nodes {
                failures.push(format!(
                    "shooting counts {nodes} nodes, the polynomial has {polynomial_nodes}"
                ));
            }
            (Some(m), Some(nodes))
        }
        Err(e) => {
            failures.push(format!("shooting failed: {e}"));
            (None, None)
        }
    };
    RootValidation {
        beta: root.beta,
        mismatch,
        residual,
        termination: root.termination,
        polynomial_nodes,
        shooting_nodes,
        failures,
    }
}

/// Confirms every root of `result` as a bound state of the general problem.
pub fn validate_quasipoly(result: &QuasiPolyResult, cfg: &ShootingConfig) -> Result<QuasiPolyReport> {
    cfg.validate()?;
    Ok(QuasiPolyReport {
        roots: result
            .roots
            .iter()
            .map(|r| validate_root(&result.problem, r, cfg))
            .collect(),
    })
}
