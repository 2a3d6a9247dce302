//! Eigenvalues and eigenfunctions by shooting from both singular points.
//!
//! The reduced equation is integrated in `t = ln z`, where it reads
//! `w_tt − w_t + q(e^t) w = 0`, outward from a point near the origin and
//! inward from a point far out, both started on the recessive asymptotic
//! solution. The scale-free Wronskian of the two branches at the matching
//! point vanishes exactly at eigenvalues.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Energy, ProblemParams};
use crate::ode::{Integrator, State};
use crate::roots::brent;
use crate::series::{asym_coeffs_infinity, asym_coeffs_zero, far_point, near_point, DEFAULT_TERMS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Matching point; the minimum of the effective potential when unset.
    pub z_match: Option<f64>,
    /// Local relative error of the integrator.
    pub rk_tolerance: f64,
    /// Restricts the level scan to this energy interval.
    pub e_bracket: Option<(f64, f64)>,
    /// Iteration cap of the energy refinement.
    pub max_bisections: usize,
    /// Relative accuracy of the boundary data from the asymptotic series.
    pub series_tolerance: f64,
    /// Step of the level scan in `μ = Z / (2√−E)`.
    pub mu_step: f64,
    /// Number of wave-function samples between the boundary points.
    pub samples: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            z_match: None,
            rk_tolerance: 1e-12,
            e_bracket: None,
            max_bisections: 200,
            series_tolerance: 1e-11,
            mu_step: 0.1,
            samples: 2000,
        }
    }
}

impl ShootingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-6).contains(&self.rk_tolerance) {
            return Err(Error::Domain(format!(
                "rk_tolerance must lie in [1e-14, 1e-6], got {}",
                self.rk_tolerance
            )));
        }
        if let Some(z) = self.z_match {
            if !(z > 0.0 && z.is_finite()) {
                return Err(Error::Domain(format!("z_match must be positive, got {z}")));
            }
        }
        if let Some((lo, hi)) = self.e_bracket {
            if !(lo < hi && hi < 0.0) {
                return Err(Error::Domain(format!(
                    "energy bracket must satisfy lo < hi < 0, got [{lo}, {hi}]"
                )));
            }
        }
        if !(self.mu_step > 0.0) || self.samples < 16 {
            return Err(Error::Domain("mu_step must be positive and samples at least 16".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoints {
    pub z_near: f64,
    pub z_match: f64,
    pub z_far: f64,
}

/// Minimum of the effective potential `A/z⁴ + l(l+1)/z² − Z/z`, the positive
/// root of `Z z³ − 2l(l+1) z² − 4A = 0`.
pub fn potential_minimum(params: &ProblemParams) -> f64 {
    let l2 = params.centrifugal();
    let f = |z: f64| params.z * z * z * z - 2.0 * l2 * z * z - 4.0 * params.a;
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Zero of `q` between `inside`, where `q > 0`, and `outside`, where `q ≤ 0`.
fn bisect_turning_point(params: &ProblemParams, energy: Energy, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if params.reduced_coefficient(energy, mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    outside
}

/// Inner and outer zeros of `q`, outside of which solutions do not
/// oscillate; `None` when the energy lies below the effective potential.
/// The effective potential has a single minimum, so there are at most two.
pub fn turning_points(params: &ProblemParams, energy: Energy) -> Option<(f64, f64)> {
    params.require_supersingular().ok()?;
    energy.require_bound().ok()?;
    let z_min = potential_minimum(params);
    if params.reduced_coefficient(energy, z_min) <= 0.0 {
        return None;
    }
    // q(Z/|E|) = −A/z² − l(l+1) < 0
    let outer = bisect_turning_point(params, energy, z_min, params.z / -energy.0);
    let inner = bisect_turning_point(params, energy, z_min, 0.0);
    Some((inner, outer))
}

/// Boundary points for shooting. Both lie outside the turning points, so the
/// recessive solutions have no nodes in the series regions.
pub fn boundary_points(params: &ProblemParams, energy: Energy, cfg: &ShootingConfig) -> Result<BoundaryPoints> {
    energy.require_bound()?;
    let mut z_near = near_point(params, energy, cfg.series_tolerance)?;
    let mut z_far = far_point(params, energy, cfg.series_tolerance)?;
    if let Some((inner, outer)) = turning_points(params, energy) {
        z_near = z_near.min(inner);
        z_far = z_far.max(outer);
    }
    let z_match = match cfg.z_match {
        Some(z) => z,
        None => {
            let z = potential_minimum(params);
            if z > z_near && z < z_far {
                z
            } else {
                (z_near * z_far).sqrt()
            }
        }
    };
    if !(z_near < z_match && z_match < z_far) {
        return Err(Error::Domain(format!(
            "matching point {z_match} outside ({z_near}, {z_far})"
        )));
    }
    Ok(BoundaryPoints { z_near, z_match, z_far })
}

/// One integrated branch at the matching point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub z: f64,
    pub w: f64,
    /// `dw/dz`
    pub dw: f64,
    /// Sign changes of `w` between the start point and `z`.
    pub nodes: usize,
    /// Point where the branch starts from the series data.
    pub start: f64,
}

struct Problem {
    params: ProblemParams,
    energy: Energy,
}

impl Problem {
    fn rhs(&self) -> impl Fn(f64, &State) -> State + '_ {
        move |t, y| {
            let q = self.params.reduced_coefficient(self.energy, t.exp());
            [y[1], y[1] - q * y[0]]
        }
    }
}

/// Initial `(w, z w')` from a series evaluation, scaled by a positive factor
/// so that it varies continuously with the energy even where `w` vanishes.
fn series_state(value: Complex64, derivative: Complex64, z: f64) -> (State, f64) {
    let (w, zdw) = (value.re, z * derivative.re);
    let m = w.abs().max(zdw.abs());
    ([w / m, zdw / m], m)
}

fn start_zero(params: &ProblemParams, energy: Energy, z: f64, cfg: &ShootingConfig) -> Result<State> {
    let s = asym_coeffs_zero(params, energy, Complex64::new(1.0, 0.0), DEFAULT_TERMS)?;
    let ev = s.evaluate_within(z, cfg.series_tolerance)?;
    Ok(series_state(ev.value, ev.derivative, z).0)
}

fn start_infinity(params: &ProblemParams, energy: Energy, z: f64, cfg: &ShootingConfig) -> Result<State> {
    let s = asym_coeffs_infinity(params, energy, Complex64::new(1.0, 0.0), DEFAULT_TERMS)?;
    let ev = s.evaluate_within(z, cfg.series_tolerance)?;
    Ok(series_state(ev.value, ev.derivative, z).0)
}

fn branch(
    params: &ProblemParams,
    energy: Energy,
    cfg: &ShootingConfig,
    start: f64,
    initial: State,
    end: f64,
) -> Result<Branch> {
    let problem = Problem {
        params: *params,
        energy,
    };
    let mut it = Integrator::new(problem.rhs(), start.ln(), initial, 0.0, cfg.rk_tolerance);
    it.advance_to(end.ln())?;
    let y = it.state();
    Ok(Branch {
        z: end,
        w: y[0],
        dw: y[1] / end,
        nodes: it.sign_changes,
        start,
    })
}

/// Recessive solution at the origin (started from the series at `z_near`) advanced to the
/// matching point.
pub fn integrate_from_zero(energy: Energy, params: &ProblemParams, cfg: &ShootingConfig) -> Result<Branch> {
    cfg.validate()?;
    let pts = boundary_points(params, energy, cfg)?;
    let g = start_zero(params, energy, pts.z_near, cfg)?;
    branch(params, energy, cfg, pts.z_near, g, pts.z_match)
}

/// Recessive solution at infinity (started from the series at `z_far`) integrated inward to
/// the matching point.
pub fn integrate_from_infinity(energy: Energy, params: &ProblemParams, cfg: &ShootingConfig) -> Result<Branch> {
    cfg.validate()?;
    let pts = boundary_points(params, energy, cfg)?;
    let g = start_infinity(params, energy, pts.z_far, cfg)?;
    branch(params, energy, cfg, pts.z_far, g, pts.z_match)
}

fn normalized_wronskian(out: &Branch, inw: &Branch) -> f64 {
    let w = out.w * inw.dw - out.dw * inw.w;
    w / ((out.w * inw.dw).abs() + (out.dw * inw.w).abs())
}

/// Scale-free Wronskian of the two branches at the matching point, in
/// `[−1, 1]`.
pub fn mismatch(energy: Energy, params: &ProblemParams, cfg: &ShootingConfig) -> Result<f64> {
    let (out, inw) = branches(energy, params, cfg)?;
    Ok(normalized_wronskian(&out, &inw))
}

fn branches(energy: Energy, params: &ProblemParams, cfg: &ShootingConfig) -> Result<(Branch, Branch)> {
    cfg.validate()?;
    let pts = boundary_points(params, energy, cfg)?;
    let g0 = start_zero(params, energy, pts.z_near, cfg)?;
    let g1 = start_infinity(params, energy, pts.z_far, cfg)?;
    Ok((
        branch(params, energy, cfg, pts.z_near, g0, pts.z_match)?,
        branch(params, energy, cfg, pts.z_far, g1, pts.z_match)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleMethod {
    ZeroSeries,
    OutwardIntegration,
    InwardIntegration,
    InfinitySeries,
    Floquet,
}

impl SampleMethod {
    pub fn label(self) -> &'static str {
        match self {
            SampleMethod::ZeroSeries => "series-zero",
            SampleMethod::OutwardIntegration => "ode-outward",
            SampleMethod::InwardIntegration => "ode-inward",
            SampleMethod::InfinitySeries => "series-infinity",
            SampleMethod::Floquet => "floquet",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub z: f64,
    pub w: f64,
    pub dw: f64,
    pub method: SampleMethod,
}

#[derive(Debug, Clone)]
pub struct BoundState {
    pub energy: Energy,
    /// Radial quantum number, the number of nodes.
    pub n: usize,
    pub l: u32,
    pub params: ProblemParams,
    /// Normalised samples, positive near the origin.
    pub wave_samples: Vec<WaveSample>,
    /// `(∫ w² dz)^{1/2}` of the unnormalised assembly.
    pub norm: f64,
    pub points: BoundaryPoints,
    pub mismatch: f64,
}

impl BoundState {
    /// Trapezoidal `∫ w² dz` over the samples.
    pub fn norm_squared(&self) -> f64 {
        trapezoid(&self.wave_samples)
    }

    /// Normalised wave function at arbitrary points, using the series beyond
    /// the boundary points and integration in between.
    pub fn sample_at(&self, zs: &[f64], cfg: &ShootingConfig) -> Result<Vec<WaveSample>> {
        let cfg = ShootingConfig {
            z_match: Some(self.points.z_match),
            ..*cfg
        };
        let trace = trace(self.energy, &self.params, &cfg, zs)?;
        Ok(trace
            .samples
            .into_iter()
            .map(|s| WaveSample {
                w: s.w / self.norm,
                dw: s.dw / self.norm,
                ..s
            })
            .collect())
    }
}

fn trapezoid(samples: &[WaveSample]) -> f64 {
    samples
        .windows(2)
        .map(|p| 0.5 * (p[1].z - p[0].z) * (p[0].w * p[0].w + p[1].w * p[1].w))
        .sum()
}

struct Trace {
    samples: Vec<WaveSample>,
    nodes: usize,
    points: BoundaryPoints,
    mismatch: f64,
}

/// Assembles the unnormalised eigenfunction candidate at `zs` (any order),
/// with the inward branch scaled to the outward one at the matching point.
fn trace(energy: Energy, params: &ProblemParams, cfg: &ShootingConfig, zs: &[f64]) -> Result<Trace> {
    cfg.validate()?;
    if zs.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
        return Err(Error::Domain("sample points must be positive".into()));
    }
    let pts = boundary_points(params, energy, cfg)?;
    let one = Complex64::new(1.0, 0.0);
    let zero_series = asym_coeffs_zero(params, energy, one, DEFAULT_TERMS)?;
    let inf_series = asym_coeffs_infinity(params, energy, one, DEFAULT_TERMS)?;
    let near = zero_series.evaluate_within(pts.z_near, cfg.series_tolerance)?;
    let far = inf_series.evaluate_within(pts.z_far, cfg.series_tolerance)?;
    let (near_state, near_scale) = series_state(near.value, near.derivative, pts.z_near);
    let (far_state, far_scale) = series_state(far.value, far.derivative, pts.z_far);
    let problem = Problem {
        params: *params,
        energy,
    };

    let mut order: Vec<usize> = (0..zs.len()).collect();
    order.sort_by(|&a, &b| zs[a].total_cmp(&zs[b]));
    let mut out: Vec<Option<WaveSample>> = vec![None; zs.len()];

    let mut up = Integrator::new(problem.rhs(), pts.z_near.ln(), near_state, 0.0, cfg.rk_tolerance);
    for &i in &order {
        let z = zs[i];
        if z < pts.z_near {
            let ev = zero_series.evaluate(z);
            out[i] = Some(WaveSample {
                z,
                w: ev.value.re / near_scale,
                dw: ev.derivative.re / near_scale,
                method: SampleMethod::ZeroSeries,
            });
        } else if z <= pts.z_match {
            up.advance_to(z.ln())?;
            let y = up.state();
            out[i] = Some(WaveSample {
                z,
                w: y[0],
                dw: y[1] / z,
                method: SampleMethod::OutwardIntegration,
            });
        }
    }
    up.advance_to(pts.z_match.ln())?;
    let ym = up.state();

    let mut down = Integrator::new(problem.rhs(), pts.z_far.ln(), far_state, 0.0, cfg.rk_tolerance);
    let mut inward: Vec<(usize, WaveSample)> = Vec::new();
    for &i in order.iter().rev() {
        let z = zs[i];
        if z > pts.z_far {
            let ev = inf_series.evaluate(z);
            inward.push((
                i,
                WaveSample {
                    z,
                    w: ev.value.re / far_scale,
                    dw: ev.derivative.re / far_scale,
                    method: SampleMethod::InfinitySeries,
                },
            ));
        } else if z > pts.z_match {
            down.advance_to(z.ln())?;
            let y = down.state();
            inward.push((
                i,
                WaveSample {
                    z,
                    w: y[0],
                    dw: y[1] / z,
                    method: SampleMethod::InwardIntegration,
                },
            ));
        }
    }
    down.advance_to(pts.z_match.ln())?;
    let yi = down.state();

    // least-squares scale of the inward branch onto the outward one in (w, z w')
    let scale = (ym[0] * yi[0] + ym[1] * yi[1]) / (yi[0] * yi[0] + yi[1] * yi[1]);
    for (i, s) in inward {
        out[i] = Some(WaveSample {
            w: s.w * scale,
            dw: s.dw * scale,
            ..s
        });
    }
    // a node at the matching point shows up only as a sign change across the junction
    let junction = usize::from(ym[0] * yi[0] * scale < 0.0);
    let wronskian = ym[0] * yi[1] - ym[1] * yi[0];
    let mismatch = wronskian / ((ym[0] * yi[1]).abs() + (ym[1] * yi[0]).abs());
    Ok(Trace {
        samples: out.into_iter().map(|s| s.expect("every sample assigned")).collect(),
        nodes: up.sign_changes + down.sign_changes + junction,
        points: pts,
        mismatch,
    })
}

/// Number of strict sign changes in the samples.
///
/// Fails when two sign changes are fewer than three samples apart, which
/// signals that the sampling cannot resolve the nodes.
pub fn count_nodes(samples: &[WaveSample]) -> Result<usize> {
    let mut last_sign = 0.0;
    let mut last_change: Option<usize> = None;
    let mut count = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.w == 0.0 || !s.w.is_finite() {
            continue;
        }
        let sign = s.w.signum();
        if last_sign != 0.0 && sign != last_sign {
            if let Some(prev) = last_change {
                if i - prev < 3 {
                    return Err(Error::Sampling(format!(
                        "sign changes at samples {prev} and {i} are too close"
                    )));
                }
            }
            last_change = Some(i);
            count += 1;
        }
        last_sign = sign;
    }
    Ok(count)
}

fn sample_grid(points: &BoundaryPoints, count: usize) -> Vec<f64> {
    let (a, b) = (points.z_near.ln(), points.z_far.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn assemble(energy: Energy, params: &ProblemParams, cfg: &ShootingConfig) -> Result<BoundState> {
    let pts = boundary_points(params, energy, cfg)?;
    let grid = sample_grid(&pts, cfg.samples);
    let cfg_fixed = ShootingConfig {
        z_match: Some(pts.z_match),
        ..*cfg
    };
    let trace = trace(energy, params, &cfg_fixed, &grid)?;
    let sampled_nodes = count_nodes(&trace.samples)?;
    if sampled_nodes != trace.nodes {
        return Err(Error::Sampling(format!(
            "integrator saw {} nodes but the samples show {sampled_nodes}",
            trace.nodes
        )));
    }
    let norm = trapezoid(&trace.samples).sqrt();
    let wave_samples = trace
        .samples
        .iter()
        .map(|s| WaveSample {
            w: s.w / norm,
            dw: s.dw / norm,
            ..*s
        })
        .collect();
    Ok(BoundState {
        energy,
        n: trace.nodes,
        l: params.l,
        params: *params,
        wave_samples,
        norm,
        points: trace.points,
        mismatch: trace.mismatch,
    })
}

/// Energies at which the level scan evaluates the mismatch.
fn scan_range(params: &ProblemParams, cfg: &ShootingConfig) -> (f64, f64) {
    let mu_of = |e: f64| params.z / (2.0 * (-e).sqrt());
    match cfg.e_bracket {
        Some((lo, hi)) => (mu_of(lo), mu_of(hi)),
        None => ((params.l as f64 + 1.0) / 1.2f64.sqrt(), mu_of(-1e-4)),
    }
}

/// The lowest `count` bound states for the given parameters (within the
/// configured bracket), in ascending energy.
pub fn find_levels(params: &ProblemParams, count: usize, cfg: &ShootingConfig) -> Result<Vec<BoundState>> {
    cfg.validate()?;
    params.require_supersingular()?;
    let energy_of = |mu: f64| -params.z * params.z / (4.0 * mu * mu);
    let (mu_lo, mu_hi) = scan_range(params, cfg);
    let f = |e: f64| mismatch(Energy(e), params, cfg);
    let mut states = Vec::with_capacity(count);
    let mut mu = mu_lo;
    let mut prev = (energy_of(mu), f(energy_of(mu))?);
    while states.len() < count && mu < mu_hi {
        mu = (mu + cfg.mu_step).min(mu_hi);
        let e = energy_of(mu);
        let cur = (e, f(e)?);
        if prev.1.signum() != cur.1.signum() {
            let root = brent(f, prev.0, cur.0, prev.1, cur.1, 1e-14, cfg.max_bisections)?;
            states.push(assemble(Energy(root), params, cfg)?);
        }
        prev = cur;
    }
    Ok(states)
}

/// Bound state with `n` nodes.
pub fn find_energy(params: &ProblemParams, n: usize, cfg: &ShootingConfig) -> Result<BoundState> {
    let states = find_levels(params, n + 1, cfg)?;
    states.into_iter().find(|s| s.n == n).ok_or_else(|| {
        Error::NoEigenvalue(format!(
            "no bound state with {n} nodes for A = {}, l = {} in the scanned range",
            params.a, params.l
        ))
    })
}
