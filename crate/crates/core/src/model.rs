//! Problem parameters and the dimensionless conventions of the reduced radial
//! equation
//!
//! ```text
//! z² w''(z) + (−A/z² − l(l+1) + Z z + E z²) w(z) = 0,
//! ```
//!
//! obtained from the Schrödinger equation with `V(r) ∝ A r⁻⁴ − Z r⁻¹` after
//! measuring lengths in units of `r₀` and energies in units of `ħ²/2m r₀²`.
//! The same equation is the double confluent Heun equation `D²y + B(z) y = 0`
//! (`D = z d/dz`) for `y = z^{-1/2} w`.

use std::fmt;

use crate::error::{Error, Result};

/// The dimensionless triple `(A, Z, l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Intensity of the repulsive `r⁻⁴` term.
    pub a: f64,
    /// Intensity of the attractive Coulomb term.
    pub z: f64,
    /// Angular momentum quantum number.
    pub l: u32,
}

impl ProblemParams {
    /// Builds a parameter set, rejecting `A < 0`, `Z ≤ 0` and non-finite input.
    ///
    /// `A = 0` (pure Coulomb) is accepted here; the Floquet and shooting
    /// solvers reject it through [`ProblemParams::require_supersingular`].
    pub fn new(a: f64, z: f64, l: u32) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::Domain(format!(
                "supersingular intensity A must be finite and non-negative, got {a}"
            )));
        }
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::Domain(format!(
                "Coulomb intensity Z must be finite and positive, got {z}"
            )));
        }
        Ok(Self { a, z, l })
    }

    /// Parameters with the Coulomb intensity fixed to one.
    pub fn unit_charge(a: f64, l: u32) -> Result<Self> {
        Self::new(a, 1.0, l)
    }

    /// `l(l+1)`
    pub fn centrifugal(&self) -> f64 {
        let l = f64::from(self.l);
        l * (l + 1.0)
    }

    /// Fails unless `A > 0`. With `A = 0` the origin stops being an irregular
    /// singular point and the boundary behaviour `exp(−√A/z)` degenerates.
    pub fn require_supersingular(&self) -> Result<()> {
        if self.a > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "A must be strictly positive for this solver, got {}",
                self.a
            )))
        }
    }

    /// `q(z) = −A/z² − l(l+1) + Z z + E z²`, so that the reduced equation
    /// reads `z² w'' + q(z) w = 0`.
    pub fn reduced_coefficient(&self, energy: Energy, z: f64) -> f64 {
        -self.a / (z * z) - self.centrifugal() + self.z * z + energy.0 * z * z
    }
}

/// Dimensionless energy in units of `ħ²/2m r₀²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Energy(pub f64);

impl Energy {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Fails unless the energy is a bound-state candidate (`E < 0`).
    pub fn require_bound(self) -> Result<Self> {
        if self.0.is_finite() && self.0 < 0.0 {
            Ok(self)
        } else {
            Err(Error::Domain(format!(
                "energy must be finite and negative for a bound state, got {}",
                self.0
            )))
        }
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Exponents governing the boundary behaviour
/// `w ∝ exp(−αz) z^μ` at infinity and `w ∝ exp(−β/z) z` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub alpha: f64,
    pub mu: f64,
    pub beta: f64,
}

pub fn derive_exponents(params: &ProblemParams, energy: Energy) -> Result<Exponents> {
    let energy = energy.require_bound()?;
    let alpha = (-energy.0).sqrt();
    Ok(Exponents {
        alpha,
        mu: params.z / (2.0 * alpha),
        beta: params.a.sqrt(),
    })
}

/// Coefficients of `B(z) = Σ_{p=-2}^{2} B_p z^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcheCoefficients {
    pub b_minus2: f64,
    pub b_minus1: f64,
    pub b_0: f64,
    pub b_1: f64,
    pub b_2: f64,
}

impl DcheCoefficients {
    /// `B_p` for `p ∈ [−2, 2]`.
    pub fn get(&self, p: i32) -> Option<f64> {
        match p {
            -2 => Some(self.b_minus2),
            -1 => Some(self.b_minus1),
            0 => Some(self.b_0),
            1 => Some(self.b_1),
            2 => Some(self.b_2),
            _ => None,
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.b_minus2 / (z * z) + self.b_minus1 / z + self.b_0 + self.b_1 * z + self.b_2 * z * z
    }
}

pub fn dche_coefficients(params: &ProblemParams, energy: Energy) -> DcheCoefficients {
    DcheCoefficients {
        b_minus2: -params.a,
        b_minus1: 0.0,
        b_0: -params.centrifugal() - 0.25,
        b_1: params.z,
        b_2: energy.0,
    }
}

/// Maps a `Z = 1` eigenpair `(A, E)` onto the equation with Coulomb
/// intensity `Ẑ`: `Â = A/Ẑ²`, `Ê = Ẑ² E`.
pub fn rescale(a_ref: f64, e_ref: Energy, z_hat: f64) -> Result<(f64, Energy)> {
    if !z_hat.is_finite() || z_hat <= 0.0 {
        return Err(Error::Domain(format!(
            "target Coulomb intensity must be positive, got {z_hat}"
        )));
    }
    Ok((a_ref / (z_hat * z_hat), Energy(z_hat * z_hat * e_ref.0)))
}

/// Pure Coulomb level `−1/(4(n+l+1)²)` at `Z = 1`.
pub fn coulomb_energy(n: u32, l: u32) -> Energy {
    coulomb_energy_with_charge(n, l, 1.0)
}

/// Pure Coulomb level `−Z²/(4(n+l+1)²)`.
pub fn coulomb_energy_with_charge(n: u32, l: u32, z: f64) -> Energy {
    let k = f64::from(n + l + 1);
    Energy(-z * z / (4.0 * k * k))
}
