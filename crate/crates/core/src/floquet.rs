//! Floquet solutions `w = z^ν Σ c_n z^n` of the reduced equation and the
//! connection problem built on them.
//!
//! The Laurent coefficients obey the four-term recurrence
//!
//! ```text
//! −A c_{n+2} + ((n+ν)(n−1+ν) − l(l+1)) c_n + Z c_{n−1} + E c_{n−2} = 0,
//! ```
//!
//! which has a two-dimensional space of solutions decaying as `n → +∞` and
//! another decaying as `n → −∞`. An index `ν` is admissible when the two
//! spaces intersect, i.e. when the determinant formed from both bases at
//! four central indices vanishes.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{derive_exponents, Energy, Exponents, ProblemParams};
use crate::roots::{brent, golden_min};
use crate::series::{asym_coeffs_infinity, asym_coeffs_zero, far_point, near_point, wronskian, DEFAULT_TERMS};

const PAD: i64 = 24;
const ACCEPT: f64 = 1e-10;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// The same equation in `x = z/R` with `R = (A/|E|)^{1/4}`: `A/R²`, `ZR` and
/// `ER²` replace `A`, `Z` and `E`. The indices are unchanged and the Laurent
/// coefficients become `c_n Rⁿ`, which stay representable for large `A`.
#[derive(Debug, Clone, Copy)]
struct Balanced {
    params: ProblemParams,
    energy: Energy,
    radius: f64,
}

fn balance(params: &ProblemParams, energy: Energy) -> Balanced {
    let r = (params.a / energy.0.abs()).powf(0.25);
    if !(r.is_finite() && r > 0.0) {
        return Balanced {
            params: *params,
            energy,
            radius: 1.0,
        };
    }
    Balanced {
        params: ProblemParams {
            a: params.a / (r * r),
            z: params.z * r,
            l: params.l,
        },
        energy: Energy(energy.0 * r * r),
        radius: r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy)]
struct Recurrence {
    a: f64,
    z: f64,
    /// Angular momentum, an integer.
    l: f64,
    e: f64,
    nu: C,
}

impl Recurrence {
    fn new(params: &ProblemParams, energy: Energy, nu: C) -> Result<Self> {
        if params.a == 0.0 {
            return Err(Error::Domain("the recurrence degenerates for A = 0".into()));
        }
        if energy.0 == 0.0 {
            return Err(Error::Domain("the recurrence degenerates for E = 0".into()));
        }
        if !(nu.re.is_finite() && nu.im.is_finite()) {
            return Err(Error::Domain(format!("index must be finite, got {nu}")));
        }
        Ok(Self {
            a: params.a,
            z: params.z,
            l: f64::from(params.l),
            e: energy.0,
            nu,
        })
    }

    fn diag(&self, n: i64) -> C {
        // x(x − 1) − l(l + 1) with x = ν + n, factored to avoid cancellation
        // when x is close to l + 1 or −l
        let n = n as f64;
        (self.nu + (n - self.l - 1.0)) * (self.nu + (n + self.l))
    }

    /// Row `n` of the recurrence: `(sum, largest term magnitude)`.
    fn row(&self, n: i64, get: impl Fn(i64) -> C) -> (C, f64) {
        let t = [
            get(n + 2) * (-self.a),
            get(n) * self.diag(n),
            get(n - 1) * self.z,
            get(n - 2) * self.e,
        ];
        (t.iter().sum(), t.iter().map(|x| x.norm()).fold(0.0, f64::max))
    }
}

/// Orthonormalises the pair of 4-states in place and returns the 2×2
/// transform `T` with `new = old · T`.
fn orthonormalize(st: &mut [[C; 4]; 2]) -> [[C; 2]; 2] {
    let n1 = st[0].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in st[0].iter_mut() {
        *x /= n1;
    }
    let r12: C = st[0].iter().zip(st[1].iter()).map(|(q, s)| q.conj() * s).sum();
    let (q1, s2) = (st[0], &mut st[1]);
    for (s, q) in s2.iter_mut().zip(q1.iter()) {
        *s -= r12 * q;
    }
    let n2 = st[1].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in st[1].iter_mut() {
        *x /= n2;
    }
    [[c(1.0 / n1, 0.0), -r12 / (n1 * n2)], [c(0.0, 0.0), c(1.0 / n2, 0.0)]]
}

fn mat_mul(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> [[C; 2]; 2] {
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

/// Two solutions spanning the decaying subspace on one side.
#[derive(Debug, Clone)]
pub struct TailBasis {
    pub side: Side,
    /// Index of the first entry of each sequence.
    pub first_index: i64,
    /// The sequences are scaled so that their values at the central indices
    /// `−1..=2` form an orthonormal pair.
    pub sequences: [Vec<C>; 2],
}

impl TailBasis {
    pub fn last_index(&self) -> i64 {
        self.first_index + self.sequences[0].len() as i64 - 1
    }

    pub fn get(&self, j: usize, n: i64) -> Option<C> {
        let k = n - self.first_index;
        if k < 0 {
            return None;
        }
        self.sequences[j].get(k as usize).copied()
    }

    /// Sequence `j` rescaled to unit maximum magnitude.
    pub fn unit_max(&self, j: usize) -> Vec<C> {
        let m = self.sequences[j].iter().map(|x| x.norm()).fold(0.0, f64::max);
        self.sequences[j].iter().map(|x| x / m).collect()
    }
}

struct Propagation {
    central: [[C; 4]; 2],
    basis: Option<TailBasis>,
}

fn propagate(rec: &Recurrence, side: Side, top: i64, keep: bool) -> Propagation {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let mut frames: Vec<[[C; 2]; 2]> = Vec::new();
    let mut written: Vec<(i64, [C; 2], usize)> = Vec::new();
    let mut st: [[C; 4]; 2];
    match side {
        Side::Plus => {
            // st[j] = (c_k, c_{k+1}, c_{k+2}, c_{k+3})
            let mut k = top;
            st = [[one, zero, zero, zero], [zero, one, zero, zero]];
            if keep {
                for (i, (a, b)) in st[0].iter().zip(&st[1]).enumerate() {
                    written.push((k + i as i64, [*a, *b], 0));
                }
            }
            while k > -1 {
                let d = rec.diag(k + 1);
                let mut vals = [zero; 2];
                for (j, s) in st.iter_mut().enumerate() {
                    let new = (s[3] * rec.a - s[1] * d - s[0] * rec.z) / rec.e;
                    *s = [new, s[0], s[1], s[2]];
                    vals[j] = new;
                }
                k -= 1;
                if keep {
                    written.push((k, vals, frames.len()));
                }
                frames.push(orthonormalize(&mut st));
            }
        }
        Side::Minus => {
            // st[j] = (c_{k−3}, c_{k−2}, c_{k−1}, c_k)
            let mut k = -top;
            st = [[zero, zero, zero, one], [zero, zero, one, zero]];
            if keep {
                for (i, (a, b)) in st[0].iter().zip(&st[1]).enumerate() {
                    written.push((k - 3 + i as i64, [*a, *b], 0));
                }
            }
            while k < 2 {
                let d = rec.diag(k - 1);
                let mut vals = [zero; 2];
                for (j, s) in st.iter_mut().enumerate() {
                    let new = (s[2] * d + s[1] * rec.z + s[0] * rec.e) / rec.a;
                    *s = [s[1], s[2], s[3], new];
                    vals[j] = new;
                }
                k += 1;
                if keep {
                    written.push((k, vals, frames.len()));
                }
                frames.push(orthonormalize(&mut st));
            }
        }
    }
    let basis = keep.then(|| {
        let identity = [[one, zero], [zero, one]];
        let mut cumulative = vec![identity; frames.len() + 1];
        for t in (0..frames.len()).rev() {
            cumulative[t] = mat_mul(&frames[t], &cumulative[t + 1]);
        }
        let lo = written.iter().map(|w| w.0).min().unwrap_or(0);
        let hi = written.iter().map(|w| w.0).max().unwrap_or(0);
        let len = (hi - lo + 1) as usize;
        let mut seqs = [vec![zero; len], vec![zero; len]];
        for (n, v, f) in &written {
            let m = &cumulative[*f];
            let idx = (n - lo) as usize;
            seqs[0][idx] = v[0] * m[0][0] + v[1] * m[1][0];
            seqs[1][idx] = v[0] * m[0][1] + v[1] * m[1][1];
        }
        TailBasis {
            side,
            first_index: lo,
            sequences: seqs,
        }
    });
    Propagation { central: st, basis }
}

/// `max(A, |E|, Z)` of the balanced equation.
fn window_scale(params: &ProblemParams, energy: Energy) -> f64 {
    let b = balance(params, energy);
    b.params.a.max(b.energy.0.abs()).max(b.params.z)
}

fn check_window(params: &ProblemParams, energy: Energy, half_width: usize) -> Result<()> {
    let scale = window_scale(params, energy);
    let n = half_width as f64;
    if half_width < 20 || n * n <= 100.0 * scale {
        return Err(Error::Domain(format!(
            "window half-width {half_width} is too small for the balanced scale {scale}"
        )));
    }
    Ok(())
}

/// Smallest admissible window half-width for the given parameters.
pub fn minimal_half_width(params: &ProblemParams, energy: Energy) -> usize {
    let scale = window_scale(params, energy);
    ((10.0 * scale.sqrt()).floor() as usize + 1).max(20)
}

/// Basis of the solutions decaying on `side`, generated from index
/// `±(half_width + pad)` towards the centre with re-orthonormalisation after
/// every step. The sequences are those of the unscaled recurrence.
pub fn tail_basis(nu: C, energy: Energy, params: &ProblemParams, half_width: usize, side: Side) -> Result<TailBasis> {
    check_window(params, energy, half_width)?;
    let rec = Recurrence::new(params, energy, nu)?;
    let basis = propagate(&rec, side, half_width as i64 + PAD, true).basis;
    Ok(basis.expect("basis requested"))
}

fn central_matrix(rec: &Recurrence, half_width: usize) -> Matrix4<C> {
    let top = half_width as i64 + PAD;
    let p = propagate(rec, Side::Plus, top, false).central;
    let m = propagate(rec, Side::Minus, top, false).central;
    Matrix4::from_fn(|i, j| match j {
        0 => p[0][i],
        1 => p[1][i],
        2 => m[0][i],
        _ => m[1][i],
    })
}

/// Determinant of the orthonormal central states of both tail bases; its
/// modulus lies in `[0, 1]` and vanishes exactly at admissible indices.
pub fn floquet_determinant(nu: C, energy: Energy, params: &ProblemParams, half_width: usize) -> Result<C> {
    check_window(params, energy, half_width)?;
    let b = balance(params, energy);
    let rec = Recurrence::new(&b.params, b.energy, nu)?;
    Ok(central_matrix(&rec, half_width).determinant())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexPair {
    pub nu1: C,
    pub nu2: C,
    /// `|det|` at `nu1`.
    pub residual: f64,
}

/// Whether the index lies on the line `Re ν = 1/2`, where the partner index
/// is taken as the complex conjugate.
fn on_half_line(nu: C) -> bool {
    (nu.re - 0.5).abs() < 1e-6 && nu.im.abs() > 1e-8
}

/// Distance from `Re ν = 0` or `Re ν = 1/2` within which an index counts as
/// lying on that line.
const LINE_TOLERANCE: f64 = 1e-9;

/// Reduces to `Re ν ∈ [0, 1/2]` using `ν ↦ ν + k` and `ν ↦ −ν`, then to
/// `Im ν ≥ 0` on the lines `Re ν = 0` and `Re ν = 1/2`, where conjugate
/// indices are equivalent.
pub fn canonical_index(nu: C) -> C {
    let mut v = c(nu.re - nu.re.round(), nu.im);
    if v.re < 0.0 {
        v = -v;
    }
    let on_line = v.re < LINE_TOLERANCE || 0.5 - v.re < LINE_TOLERANCE;
    if v.im < 0.0 && on_line {
        v = v.conj();
    }
    v
}

fn pair_for(nu1: C) -> C {
    if on_half_line(nu1) {
        1.0 - nu1
    } else {
        -nu1
    }
}

struct IndexSearch<'a> {
    params: &'a ProblemParams,
    energy: Energy,
    half_width: usize,
}

impl IndexSearch<'_> {
    fn det(&self, nu: C) -> Result<C> {
        let rec = Recurrence::new(self.params, self.energy, nu)?;
        Ok(central_matrix(&rec, self.half_width).determinant())
    }

    /// Two-dimensional Newton iteration on `(Re det, Im det)` with a
    /// finite-difference Jacobian and step halving.
    fn newton(&self, seed: C) -> Result<(C, f64)> {
        let mut nu = seed;
        let mut f = self.det(nu)?;
        for _ in 0..60 {
            if f.norm() == 0.0 {
                break;
            }
            let h = 1e-7 * nu.norm().max(1e-6);
            let fx = (self.det(nu + h)? - f) / h;
            let fy = (self.det(nu + c(0.0, h))? - f) / h;
            let jac = Matrix2::new(fx.re, fy.re, fx.im, fy.im);
            let Some(inv) = jac.try_inverse() else { break };
            let step = inv * nalgebra::Vector2::new(-f.re, -f.im);
            let mut delta = c(step[0], step[1]);
            if !(delta.re.is_finite() && delta.im.is_finite()) {
                break;
            }
            if delta.norm() > 0.25 {
                delta *= 0.25 / delta.norm();
            }
            let mut improved = false;
            for _ in 0..12 {
                let trial = nu + delta;
                let ft = self.det(trial)?;
                if ft.norm() < f.norm() {
                    nu = trial;
                    f = ft;
                    improved = true;
                    break;
                }
                delta *= 0.5;
            }
            if !improved || delta.norm() <= 4.0 * f64::EPSILON * nu.norm() {
                break;
            }
        }
        Ok((nu, f.norm()))
    }

    fn finish(&self, nu: C, residual: f64) -> IndexPair {
        let nu1 = canonical_index(nu);
        IndexPair {
            nu1,
            nu2: pair_for(nu1),
            residual,
        }
    }

    fn scan(&self) -> Result<IndexPair> {
        type Line = fn(f64) -> C;
        let lines: [(Line, f64, f64); 3] = [
            (|t| c(t, 0.0), 0.5, 0.0125),
            (|t| c(0.0, t), 3.0, 0.025),
            (|t| c(0.5, t), 3.0, 0.025),
        ];
        let mut tried = 0usize;
        let mut best: Option<(C, f64)> = None;
        for extent in [1.0, 8.0 / 3.0] {
            let mut candidates: Vec<(f64, Line, f64, f64)> = Vec::new();
            for (line, end, step) in lines {
                let end = if step == 0.0125 { end } else { end * extent };
                let count = (end / step).round() as usize;
                let ts: Vec<f64> = (0..=count).map(|i| i as f64 * step).collect();
                let vals: Vec<f64> = ts
                    .iter()
                    .map(|&t| self.det(line(t)).map(|d| d.norm()))
                    .collect::<Result<_>>()?;
                for i in 0..vals.len() {
                    let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
                    let right = if i + 1 == vals.len() {
                        f64::INFINITY
                    } else {
                        vals[i + 1]
                    };
                    if vals[i] <= left && vals[i] <= right {
                        let lo = if i == 0 { ts[0] } else { ts[i - 1] };
                        let hi = if i + 1 == ts.len() { ts[i] } else { ts[i + 1] };
                        candidates.push((vals[i], line, lo, hi));
                    }
                }
            }
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (_, line, lo, hi) in candidates.into_iter().take(8) {
                tried += 1;
                let (t, _) = golden_min(|t| self.det(line(t)).map(|d| d.norm()), lo, hi, 1e-10, 80)?;
                let (nu, res) = self.newton(line(t))?;
                if res < ACCEPT {
                    return Ok(self.finish(nu, res));
                }
                if best.is_none_or(|b| res < b.1) {
                    best = Some((nu, res));
                }
            }
        }
        let (nu, res) = best.unwrap_or((c(f64::NAN, f64::NAN), f64::NAN));
        Err(Error::IndexSearch(format!(
            "{tried} candidates refined on the real, imaginary and half-integer lines; best |det| = {res:e} at nu = {nu}"
        )))
    }
}

fn search_width(params: &ProblemParams, energy: Energy, half_width: usize) -> Result<usize> {
    if params.a <= 0.0 {
        return Err(Error::Domain("index search requires A > 0".into()));
    }
    energy.require_bound()?;
    Ok(half_width.max(minimal_half_width(params, energy)))
}

/// Locates the Floquet index pair by scanning `|det|` along the three lines
/// on which indices of real-parameter problems lie, followed by Newton
/// polishing in the complex plane.
pub fn find_indices(energy: Energy, params: &ProblemParams, half_width: usize) -> Result<IndexPair> {
    let half_width = search_width(params, energy, half_width)?;
    let b = balance(params, energy);
    IndexSearch {
        params: &b.params,
        energy: b.energy,
        half_width,
    }
    .scan()
}

/// Like [`find_indices`], starting with Newton from `seed` (for instance the
/// index at a nearby energy) and scanning only if that fails.
pub fn find_indices_near(energy: Energy, params: &ProblemParams, half_width: usize, seed: C) -> Result<IndexPair> {
    let half_width = search_width(params, energy, half_width)?;
    let b = balance(params, energy);
    let search = IndexSearch {
        params: &b.params,
        energy: b.energy,
        half_width,
    };
    let (nu, res) = search.newton(seed)?;
    if res < ACCEPT {
        let pair = search.finish(nu, res);
        if (pair.nu1 - canonical_index(seed)).norm() < 0.05 {
            return Ok(pair);
        }
    }
    search.scan()
}

#[derive(Debug, Clone)]
pub struct FloquetSolution {
    pub nu: C,
    pub half_width: usize,
    pub params: ProblemParams,
    pub energy: Energy,
    /// `c_n Rⁿ` for `n = −N..=N`.
    balanced: Vec<C>,
    radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetEvaluation {
    pub value: C,
    pub derivative: C,
    pub second_derivative: C,
    /// `Σ |c_n z^{n+ν}|`; its ratio to `|value|` measures cancellation in the
    /// sum.
    pub magnitude: f64,
}

impl FloquetSolution {
    /// Radius `R` of the circle on which the coefficients are balanced.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn balanced_coefficient(&self, n: i64) -> Option<C> {
        let k = n + self.half_width as i64;
        if k < 0 {
            return None;
        }
        self.balanced.get(k as usize).copied()
    }

    /// `c_n`; it may overflow or underflow when `R` is far from one.
    pub fn coefficient(&self, n: i64) -> Option<C> {
        self.balanced_coefficient(n)
            .map(|v| v * (-(n as f64) * self.radius.ln()).exp())
    }

    /// Indices `−N..=N` paired with their coefficients `c_n`.
    pub fn indexed(&self) -> impl Iterator<Item = (i64, C)> + '_ {
        let n = self.half_width as i64;
        (-n..=n).map(|k| (k, self.coefficient(k).unwrap_or_default()))
    }

    /// Largest `|c_n Rⁿ|`.
    pub fn max_magnitude(&self) -> f64 {
        self.balanced.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// `(|sum|, largest term)` for every interior row of the balanced
    /// recurrence. Row `n` is row `n` of the original recurrence times `Rⁿ`.
    fn row_residuals(&self) -> Vec<(f64, f64)> {
        let b = balance(&self.params, self.energy);
        let rec = Recurrence {
            a: b.params.a,
            z: b.params.z,
            l: f64::from(self.params.l),
            e: b.energy.0,
            nu: self.nu,
        };
        let n = self.half_width as i64;
        let get = |k: i64| self.balanced_coefficient(k).unwrap_or_default();
        (-n + 2..=n - 2)
            .map(|k| {
                let (sum, scale) = rec.row(k, get);
                (sum.norm(), scale)
            })
            .collect()
    }

    /// Normwise backward error of the balanced recurrence: the largest row
    /// residual relative to the largest term over all interior rows.
    pub fn recurrence_residual(&self) -> f64 {
        let rows = self.row_residuals();
        let scale = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let worst = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Largest residual of a single row relative to the largest term of that
    /// row. Near-resonant indices, where the coefficients span many orders of
    /// magnitude, raise it to about `ε · max|c_n| / |c_k|`.
    pub fn row_residual(&self) -> f64 {
        self.row_residuals()
            .iter()
            .map(|&(sum, scale)| if scale == 0.0 { 0.0 } else { sum / scale })
            .fold(0.0, f64::max)
    }

    /// `max(|c_N R^N|, |c_{−N} R^{−N}|)` relative to the largest balanced
    /// coefficient.
    pub fn edge_ratio(&self) -> f64 {
        let n = self.half_width as i64;
        let edge = |k: i64| self.balanced_coefficient(k).unwrap_or_default().norm();
        let edge = edge(n).max(edge(-n));
        edge / self.max_magnitude()
    }

    /// Value and derivatives of `z^ν Σ c_n z^n`, failing when `z` lies
    /// outside the annulus in which the window truncation is negligible.
    pub fn evaluate(&self, z: f64) -> Result<FloquetEvaluation> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("evaluation point must be positive, got {z}")));
        }
        let lz = z.ln();
        let lx = (z / self.radius).ln();
        let (mut s0, mut s1, mut s2) = (C::default(), C::default(), C::default());
        let mut total = 0.0;
        let n = self.half_width as i64;
        for (k, cn) in (-n..=n).zip(&self.balanced) {
            let m = cn.norm();
            if m == 0.0 {
                continue;
            }
            let mag = (m.ln() + k as f64 * lx).exp();
            let t = cn / m * mag;
            let x = self.nu + k as f64;
            s0 += t;
            s1 += t * x;
            s2 += t * x * (x - 1.0);
            total += mag;
        }
        let edge = |k: i64| {
            let v = self.balanced_coefficient(k).unwrap_or_default().norm();
            if v == 0.0 {
                0.0
            } else {
                (v.ln() + k as f64 * lx).exp()
            }
        };
        if !(edge(n) + edge(-n) < 1e-10 * total) || !total.is_finite() {
            return Err(Error::AnnulusTooNarrow {
                z,
                half_width: self.half_width,
            });
        }
        let p = (self.nu * lz).exp();
        Ok(FloquetEvaluation {
            value: p * s0,
            derivative: p * s1 / z,
            second_derivative: p * s2 / (z * z),
            magnitude: total * p.norm(),
        })
    }
}

/// The two-sided decaying solution at index `nu`, normalised to `c₀ = 1`.
pub fn laurent_coefficients(
    nu: C,
    energy: Energy,
    params: &ProblemParams,
    half_width: usize,
) -> Result<FloquetSolution> {
    check_window(params, energy, half_width)?;
    let b = balance(params, energy);
    let rec = Recurrence::new(&b.params, b.energy, nu)?;
    let top = half_width as i64 + PAD;
    let plus = propagate(&rec, Side::Plus, top, true).basis.expect("basis requested");
    let minus = propagate(&rec, Side::Minus, top, true).basis.expect("basis requested");
    let g = Matrix4::from_fn(|i, j| {
        let n = i as i64 - 1;
        match j {
            0 => plus.get(0, n).unwrap(),
            1 => plus.get(1, n).unwrap(),
            2 => minus.get(0, n).unwrap(),
            _ => minus.get(1, n).unwrap(),
        }
    });
    let svd = g.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let (largest, second, smallest) = (svd.singular_values[order[0]], svd.singular_values[order[2]], order[3]);
    if second < 1e-6 * largest {
        return Err(Error::Degenerate(format!(
            "null space of the matching matrix is not one-dimensional (singular values {:?})",
            svd.singular_values.as_slice()
        )));
    }
    let x: Vec<C> = (0..4).map(|j| v_t[(smallest, j)].conj()).collect();
    let n = half_width as i64;
    let mut coeffs = Vec::with_capacity(2 * half_width + 1);
    for k in -n..=n {
        let v = if k >= 0 {
            x[0] * plus.get(0, k).unwrap() + x[1] * plus.get(1, k).unwrap()
        } else {
            -(x[2] * minus.get(0, k).unwrap() + x[3] * minus.get(1, k).unwrap())
        };
        coeffs.push(v);
    }
    let c0 = coeffs[half_width];
    let max = coeffs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if c0.norm() < 1e-13 * max {
        return Err(Error::Degenerate(
            "central coefficient vanishes; c0 = 1 normalisation impossible".into(),
        ));
    }
    for v in coeffs.iter_mut() {
        *v /= c0;
    }
    Ok(FloquetSolution {
        nu,
        half_width,
        balanced: coeffs,
        radius: b.radius,
        params: *params,
        energy,
    })
}

/// Evaluates a Floquet solution (value and derivative).
pub fn eval_floquet(solution: &FloquetSolution, z: f64) -> Result<(C, C)> {
    let ev = solution.evaluate(z)?;
    Ok((ev.value, ev.derivative))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionConfig {
    /// Relative accuracy demanded from the asymptotic series at the two
    /// matching points.
    pub series_tolerance: f64,
    /// Largest window half-width tried before giving up.
    pub max_half_width: usize,
    /// Step of the level scan in `μ = Z / (2√−E)`.
    pub mu_step: f64,
    /// Absolute tolerance on eigenvalues.
    pub energy_tolerance: f64,
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        Self {
            series_tolerance: 1e-11,
            max_half_width: 2560,
            mu_step: 0.1,
            energy_tolerance: 1e-13,
        }
    }
}

/// Dominant-solution content of both Floquet solutions at the two singular
/// points, together with the data needed to decompose the recessive
/// solutions in the Floquet basis.
#[derive(Debug, Clone)]
pub struct Connection {
    pub energy: Energy,
    pub exponents: Exponents,
    pub indices: IndexPair,
    pub floquet: [FloquetSolution; 2],
    /// Row 0: content of `w_j` along the solution dominant at infinity; row 1:
    /// along the solution dominant at the origin.
    pub matrix: [[C; 2]; 2],
    /// `W[w₁, w₂]`.
    pub wronskian: C,
    /// Coefficients of the recessive solution at infinity (`a₀ = 1`) on
    /// `(w₁, w₂)`.
    pub infinity_recessive: [C; 2],
    /// Coefficients of the recessive solution at the origin (`b₀ = 1`).
    pub zero_recessive: [C; 2],
    pub z_near: f64,
    pub z_far: f64,
    pub z_ref: f64,
    quantization: C,
}

impl Connection {
    pub fn determinant(&self) -> C {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `|det M|` divided by the product of the row norms.
    pub fn normalized_determinant(&self) -> f64 {
        let row = |r: &[C; 2]| r[0].norm().hypot(r[1].norm());
        self.determinant().norm() / (row(&self.matrix[0]) * row(&self.matrix[1]))
    }

    /// Real quantisation function: the Wronskian of the two recessive
    /// solutions, made scale-free. It changes sign at each eigenvalue.
    pub fn quantization(&self) -> f64 {
        self.quantization.re
    }

    /// Imaginary part of the quantisation function relative to its modulus
    /// (zero up to rounding for real parameters).
    pub fn quantization_imaginary_fraction(&self) -> f64 {
        self.quantization.im.abs() / self.quantization.norm()
    }
}

fn window_guess(params: &ProblemParams, energy: Energy, x: &Exponents, z_near: f64, z_far: f64) -> usize {
    let reach = (x.alpha * z_far).max(x.beta / z_near);
    minimal_half_width(params, energy).max((3.0 * reach).ceil() as usize + 20)
}

/// Builds the connection data at `energy`.
pub fn connection_matrix(energy: Energy, params: &ProblemParams, cfg: &ConnectionConfig) -> Result<Connection> {
    connection_with_seed(energy, params, cfg, None)
}

/// Relative error expected from summing a Laurent series in double
/// precision, given its cancellation ratio.
fn summation_error(ev: &FloquetEvaluation) -> f64 {
    f64::EPSILON * ev.magnitude / ev.value.norm()
}

/// Picks the matching point on a geometric ladder that minimises the sum of
/// the series truncation error and the Floquet summation error.
fn best_point(
    ladder: impl Iterator<Item = f64>,
    series: &crate::series::AsymptoticSeries,
    w: [&FloquetSolution; 2],
) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for z in ladder {
        let s = series.evaluate(z).relative_error();
        let e1 = w[0].evaluate(z)?;
        let e2 = w[1].evaluate(z)?;
        let total = s + summation_error(&e1).max(summation_error(&e2));
        if total.is_finite() && best.is_none_or(|b| total < b.1) {
            best = Some((z, total));
        }
    }
    best.ok_or_else(|| Error::Degenerate("no usable matching point".into()))
}

fn connection_with_seed(
    energy: Energy,
    params: &ProblemParams,
    cfg: &ConnectionConfig,
    seed: Option<C>,
) -> Result<Connection> {
    energy.require_bound()?;
    params.require_supersingular()?;
    let x = derive_exponents(params, energy)?;
    let far_limit = far_point(params, energy, cfg.series_tolerance)?;
    let near_limit = near_point(params, energy, cfg.series_tolerance)?;
    let one = c(1.0, 0.0);
    let inf_series = asym_coeffs_infinity(params, energy, one, DEFAULT_TERMS)?;
    let zero_series = asym_coeffs_zero(params, energy, one, DEFAULT_TERMS)?;
    let far_ladder = || {
        let floor = (2.0 / x.alpha).min(far_limit);
        std::iter::successors(Some(far_limit), move |z| Some(z / 1.05)).take_while(move |z| *z >= floor)
    };
    let near_ladder = || {
        let ceiling = (x.beta / 2.0).max(near_limit);
        std::iter::successors(Some(near_limit), move |z| Some(z * 1.05)).take_while(move |z| *z <= ceiling)
    };

    let mut half_width = window_guess(params, energy, &x, near_limit, far_limit);
    let mut indices: Option<IndexPair> = None;
    loop {
        let pair = match (indices, seed) {
            (Some(p), _) => p,
            (None, Some(s)) => find_indices_near(energy, params, half_width, s)?,
            (None, None) => find_indices(energy, params, half_width)?,
        };
        indices = Some(pair);
        let w1 = laurent_coefficients(pair.nu1, energy, params, half_width)?;
        let w2 = laurent_coefficients(pair.nu2, energy, params, half_width)?;
        let evals = (|| -> Result<_> {
            let (z_far, _) = best_point(far_ladder(), &inf_series, [&w1, &w2])?;
            let (z_near, _) = best_point(near_ladder(), &zero_series, [&w1, &w2])?;
            let z_ref = (z_near * z_far).sqrt();
            Ok((
                z_far,
                z_near,
                z_ref,
                [
                    [w1.evaluate(z_far)?, w2.evaluate(z_far)?],
                    [w1.evaluate(z_near)?, w2.evaluate(z_near)?],
                    [w1.evaluate(z_ref)?, w2.evaluate(z_ref)?],
                ],
            ))
        })();
        let (z_far, z_near, z_ref, [far, near, mid]) = match evals {
            Ok(v) => v,
            Err(Error::AnnulusTooNarrow { .. }) if half_width * 2 <= cfg.max_half_width => {
                half_width *= 2;
                continue;
            }
            Err(e) => return Err(e),
        };
        let rinf = inf_series.evaluate(z_far);
        let r0 = zero_series.evaluate(z_near);
        let w12 = wronskian(mid[0].value, mid[0].derivative, mid[1].value, mid[1].derivative);
        if w12.norm() == 0.0 {
            return Err(Error::Degenerate("Floquet solutions are linearly dependent".into()));
        }
        let w_inf = |j: usize| wronskian(far[j].value, far[j].derivative, rinf.value, rinf.derivative);
        let w_zero = |j: usize| wronskian(near[j].value, near[j].derivative, r0.value, r0.derivative);
        let matrix = [
            [w_inf(0) / (-2.0 * x.alpha), w_inf(1) / (-2.0 * x.alpha)],
            [w_zero(0) / (2.0 * x.beta), w_zero(1) / (2.0 * x.beta)],
        ];
        let infinity_recessive = [-w_inf(1) / w12, w_inf(0) / w12];
        let zero_recessive = [-w_zero(1) / w12, w_zero(0) / w12];
        let combine = |k: &[C; 2]| {
            (
                k[0] * mid[0].value + k[1] * mid[1].value,
                k[0] * mid[0].derivative + k[1] * mid[1].derivative,
            )
        };
        let (fi, dfi) = combine(&infinity_recessive);
        let (f0, df0) = combine(&zero_recessive);
        let size = |f: C, df: C| f.norm().hypot((df * z_ref).norm());
        let quantization = wronskian(fi, dfi, f0, df0) * z_ref / (size(fi, dfi) * size(f0, df0));
        return Ok(Connection {
            energy,
            exponents: x,
            indices: pair,
            floquet: [w1, w2],
            matrix,
            wronskian: w12,
            infinity_recessive,
            zero_recessive,
            z_near,
            z_far,
            z_ref,
            quantization,
        });
    }
}

#[derive(Debug, Clone)]
pub struct ConnectionResult {
    pub energy: Energy,
    pub nu1: C,
    pub nu2: C,
    pub zeta1: C,
    pub zeta2: C,
    /// Leading coefficient of the physical solution's expansion at infinity.
    pub a0: C,
    /// Leading coefficient of its expansion at the origin.
    pub b0: C,
    pub floquet1: FloquetSolution,
    pub floquet2: FloquetSolution,
    pub connection: Connection,
}

impl ConnectionResult {
    /// `ζ₁w₁ + ζ₂w₂` and its derivative.
    pub fn evaluate(&self, z: f64) -> Result<(C, C)> {
        let e1 = self.floquet1.evaluate(z)?;
        let e2 = self.floquet2.evaluate(z)?;
        Ok((
            self.zeta1 * e1.value + self.zeta2 * e2.value,
            self.zeta1 * e1.derivative + self.zeta2 * e2.derivative,
        ))
    }

    /// Dominant content of the physical solution at infinity and at the
    /// origin, each relative to the recessive content there.
    pub fn dominant_fractions(&self) -> [f64; 2] {
        let m = &self.connection.matrix;
        let d = |r: usize| (m[r][0] * self.zeta1 + m[r][1] * self.zeta2).norm();
        [d(0) / self.a0.norm(), d(1) / self.b0.norm()]
    }
}

/// Normalises the null vector of `M` and derives `a₀`, `b₀`.
///
/// For complex-conjugate index pairs `|ζ₁| = 1`, `ζ₂ = −conj(ζ₁)` and
/// `Im ζ₁ > 0`; for real index pairs `ζ₁ = 1`.
fn resolve(connection: Connection) -> Result<ConnectionResult> {
    let m = &connection.matrix;
    let row = |r: usize| m[r][0].norm().hypot(m[r][1].norm());
    let r = if row(0) >= row(1) { 0 } else { 1 };
    let (mut z1, mut z2) = (m[r][1], -m[r][0]);
    if z1.norm() == 0.0 && z2.norm() == 0.0 {
        return Err(Error::Degenerate("connection matrix vanishes".into()));
    }
    let nu1 = connection.indices.nu1;
    let conjugate_pair = nu1.im.abs() > 1e-8;
    if conjugate_pair {
        let s = z1.norm();
        z1 /= s;
        z2 /= s;
        let target = -z1.conj() / z2;
        let phase = (target / target.norm()).sqrt();
        z1 *= phase;
        if z1.im < 0.0 || (z1.im == 0.0 && z1.re < 0.0) {
            z1 = -z1;
        }
        z2 = -z1.conj();
    } else {
        if z1.norm() == 0.0 {
            return Err(Error::Degenerate(
                "first Floquet solution absent from the bound state".into(),
            ));
        }
        z2 /= z1;
        z1 = c(1.0, 0.0);
    }
    let project = |k: &[C; 2]| (z1 * k[0].conj() + z2 * k[1].conj()) / (k[0].norm_sqr() + k[1].norm_sqr());
    let a0 = project(&connection.infinity_recessive);
    let b0 = project(&connection.zero_recessive);
    Ok(ConnectionResult {
        energy: connection.energy,
        nu1,
        nu2: connection.indices.nu2,
        zeta1: z1,
        zeta2: z2,
        a0,
        b0,
        floquet1: connection.floquet[0].clone(),
        floquet2: connection.floquet[1].clone(),
        connection,
    })
}

struct Quantizer<'a> {
    params: &'a ProblemParams,
    cfg: &'a ConnectionConfig,
    seed: Option<C>,
}

impl Quantizer<'_> {
    /// Connection at `e`, or at a relative offset of at most `1e-7` where `e`
    /// itself gives coinciding indices.
    fn connect(&mut self, e: f64) -> Result<Connection> {
        let mut last = None;
        for nudge in [0.0, 1e-9, -1e-9, 1e-7] {
            let energy = Energy(e * (1.0 + nudge));
            match connection_with_seed(energy, self.params, self.cfg, self.seed) {
                Ok(conn) => {
                    self.seed = Some(conn.indices.nu1);
                    return Ok(conn);
                }
                Err(err @ (Error::Degenerate(_) | Error::IndexSearch(_))) => {
                    self.seed = None;
                    last = Some(err);
                }
                Err(err) => return Err(err),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn eval(&mut self, e: f64) -> Result<f64> {
        Ok(self.connect(e)?.quantization())
    }

    fn refine(&mut self, lo: (f64, f64), hi: (f64, f64)) -> Result<ConnectionResult> {
        let tol = self.cfg.energy_tolerance;
        let root = brent(|e| self.eval(e), lo.0, hi.0, lo.1, hi.1, tol, 200)?;
        resolve(self.connect(root)?)
    }
}

/// Eigenvalue of the connection problem inside `bracket`, located by a sign
/// change of the quantisation function.
pub fn eigen_connection(
    params: &ProblemParams,
    bracket: (f64, f64),
    cfg: &ConnectionConfig,
) -> Result<ConnectionResult> {
    let (lo, hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    if !(hi < 0.0) {
        return Err(Error::Domain(format!(
            "energy bracket must be negative, got [{lo}, {hi}]"
        )));
    }
    let mut q = Quantizer {
        params,
        cfg,
        seed: None,
    };
    let steps = ((hi - lo) / 0.002).ceil().max(4.0) as usize;
    let mut prev = (lo, q.eval(lo)?);
    for i in 1..=steps {
        let e = lo + (hi - lo) * i as f64 / steps as f64;
        let cur = (e, q.eval(e)?);
        if prev.1.signum() != cur.1.signum() {
            return q.refine(prev, cur);
        }
        prev = cur;
    }
    Err(Error::NoEigenvalue(format!(
        "no sign change of the quantisation function on [{lo}, {hi}]"
    )))
}

/// The lowest `count` eigenvalues for the given `l`, found by scanning
/// upward in `μ` from slightly below the hydrogenic ground level.
pub fn connection_levels(
    params: &ProblemParams,
    count: usize,
    cfg: &ConnectionConfig,
) -> Result<Vec<ConnectionResult>> {
    params.require_supersingular()?;
    let mut q = Quantizer {
        params,
        cfg,
        seed: None,
    };
    let mut found = Vec::with_capacity(count);
    let energy_of = |mu: f64| -params.z * params.z / (4.0 * mu * mu);
    let mut mu = (params.l as f64 + 1.0) / 1.2f64.sqrt();
    let mut prev = (energy_of(mu), q.eval(energy_of(mu))?);
    let mu_max = params.l as f64 + 1.0 + count as f64 + 60.0;
    while found.len() < count && mu < mu_max {
        mu += cfg.mu_step;
        let e = energy_of(mu);
        let cur = (e, q.eval(e)?);
        if prev.1.signum() != cur.1.signum() {
            let seed = q.seed;
            found.push(q.refine(prev, cur)?);
            q.seed = seed;
        }
        prev = cur;
    }
    if found.len() < count {
        return Err(Error::NoEigenvalue(format!(
            "found {} of {count} levels below mu = {mu_max}",
            found.len()
        )));
    }
    Ok(found)
}
