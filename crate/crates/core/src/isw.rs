//! The infinite square well with the potential written as a distribution.
//!
//! Inside the well `Ψ = F(x) θ(x) θ(L - x)`, and the potential enters only
//! through the product
//!
//! ```text
//! V(x) Ψ(x) = ħ²/2m · [ δ(x)/x + δ(L - x)/(L - x) ] F(x)
//! ```
//!
//! which is a pair of singular delta atoms. Both spectrum solvers below work
//! from this product alone; no boundary condition is imposed by hand.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distcalc::{AtomOrder, DeltaAtom, DistError, Distribution, SmoothExpr, ZERO_TOL};

/// Residual limits above this magnitude fail the Schrödinger check, scaled
/// by `max(1, ‖F′‖)` where `‖·‖` is the largest coefficient.
pub const LIMIT_TOL: f64 = 1e-9;
/// Allowed disagreement between the two routes to `ΔΨ′`.
pub const JUMP_ROUTE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IswError {
    #[error("well parameters must be strictly positive (hbar={hbar}, mass={mass}, width={width})")]
    InvalidConfig { hbar: f64, mass: f64, width: f64 },
    #[error("quantum number must be at least 1, got {0}")]
    InvalidQuantumNumber(u32),
    #[error("jump at x={edge}: potential route gives {via_potential}, derivative route gives {via_derivative}")]
    InternalMismatch {
        edge: f64,
        via_potential: Complex64,
        via_derivative: Complex64,
    },
    #[error("wall matching failed for n={n} (k={k})")]
    MatchingFailed { n: u32, k: f64 },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Units and width of the well `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellConfig {
    hbar: f64,
    mass: f64,
    width: f64,
}

impl WellConfig {
    pub fn new(hbar: f64, mass: f64, width: f64) -> Result<Self, IswError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(hbar) && ok(mass) && ok(width) {
            Ok(WellConfig { hbar, mass, width })
        } else {
            Err(IswError::InvalidConfig { hbar, mass, width })
        }
    }

    /// ħ = m = L = 1
    pub fn unit() -> Self {
        WellConfig {
            hbar: 1.0,
            mass: 1.0,
            width: 1.0,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// ħ²/2m
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    /// `k_n = nπ/L`
    pub fn wavenumber(&self, n: u32) -> f64 {
        n as f64 * PI / self.width
    }

    pub fn energy_of(&self, k: f64) -> f64 {
        self.kinetic_scale() * k * k
    }

    /// `√(2/L)`, the amplitude of a normalised eigenstate.
    pub fn amplitude(&self) -> f64 {
        (2.0 / self.width).sqrt()
    }
}

impl Default for WellConfig {
    fn default() -> Self {
        Self::unit()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSolution {
    pub n: u32,
    pub k: f64,
    pub energy: f64,
    pub psi: Distribution,
}

/// `D_n(x) = √(2/L) sin(k_n x)`, the interior part of the n-th eigenstate.
pub fn interior_eigenfunction(cfg: &WellConfig, n: u32) -> SmoothExpr {
    SmoothExpr::sin(cfg.amplitude(), cfg.wavenumber(n), 0.0)
}

fn build_eigenstate(cfg: &WellConfig, n: u32) -> EigenSolution {
    let k = cfg.wavenumber(n);
    let psi = Distribution::window(interior_eigenfunction(cfg, n), 0.0, cfg.width)
        .expect("well width is positive");
    EigenSolution {
        n,
        k,
        energy: cfg.energy_of(k),
        psi,
    }
}

pub fn eigenstate(cfg: &WellConfig, n: u32) -> Result<EigenSolution, IswError> {
    if n < 1 {
        return Err(IswError::InvalidQuantumNumber(n));
    }
    Ok(build_eigenstate(cfg, n))
}

/// `V Ψ` for `Ψ = F θ(x) θ(L - x)`: two singular atoms, no smooth part.
pub fn potential_term(cfg: &WellConfig, f: &SmoothExpr) -> Distribution {
    let w = f.scale(cfg.kinetic_scale());
    Distribution::from_atoms(vec![
        DeltaAtom::new(0.0, AtomOrder::Delta, w.clone(), 1),
        DeltaAtom::reflected(cfg.width, AtomOrder::Delta, w, 1),
    ])
}

/// A limit that may fail to exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Finite(Complex64),
    Divergent,
}

impl Limit {
    fn from_weight(w: Result<Complex64, DistError>) -> Result<Limit, DistError> {
        match w {
            Ok(v) => Ok(Limit::Finite(v)),
            Err(DistError::Divergent { .. }) => Ok(Limit::Divergent),
            Err(e) => Err(e),
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Limit::Divergent)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match self {
            Limit::Finite(v) => Some(*v),
            Limit::Divergent => None,
        }
    }

    fn vanishes(&self, tol: f64) -> bool {
        matches!(self, Limit::Finite(v) if v.norm() < tol)
    }

    fn scaled(self, s: f64) -> Limit {
        match self {
            Limit::Finite(v) => Limit::Finite(v * s),
            Limit::Divergent => Limit::Divergent,
        }
    }
}

/// Outcome of substituting `F θ(x) θ(L - x)` into the Schrödinger equation.
///
/// `c0` is `F″ + (2mE/ħ²) F`, `c1_limit` is `lim_{x→0} F/x − F′(0)` and
/// `c2_limit` is `lim_{x→L} F/(L − x) + F′(L)`. `dipoles` holds the `δ′`
/// weights `[−F(0), F(L)]` (in the same normalisation), which vanish
/// exactly when the wave function is continuous at the walls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub c0: SmoothExpr,
    pub c1_limit: Limit,
    pub c2_limit: Limit,
    pub dipoles: [Complex64; 2],
    pub passes: bool,
}

pub fn schrodinger_residual(cfg: &WellConfig, f: &SmoothExpr, energy: f64) -> ResidualReport {
    let s = cfg.kinetic_scale();
    let l = cfg.width;
    let psi = Distribution::window(f.clone(), 0.0, l).expect("well width is positive");
    let d2 = psi
        .differentiate()
        .and_then(|d| d.differentiate())
        .expect("window has no dipole atoms");

    // −(ħ²/2m) Ψ″ + VΨ − EΨ
    let total = d2
        .scale(-s)
        .add(&potential_term(cfg, f))
        .add(&psi.scale(-energy));

    let c0 = total
        .pieces()
        .iter()
        .find(|p| p.start == 0.0)
        .map_or_else(SmoothExpr::zero, |p| p.expr.scale(-1.0 / s));

    let limit_at = |x: f64| -> Limit {
        total
            .atom_at(x, AtomOrder::Delta)
            .map_or(Limit::Finite(Complex64::new(0.0, 0.0)), |a| {
                Limit::from_weight(a.weight())
                    .expect("atom weights only fail by divergence")
                    .scaled(1.0 / s)
            })
    };
    let dipole_at = |x: f64| -> Complex64 {
        total
            .atom_at(x, AtomOrder::Dipole)
            .map_or(Complex64::new(0.0, 0.0), |a| {
                a.weight().unwrap_or(Complex64::new(f64::NAN, 0.0)) / s
            })
    };

    let c1_limit = limit_at(0.0);
    let c2_limit = limit_at(l);
    let dipoles = [dipole_at(0.0), dipole_at(l)];
    // thresholds follow the size of the quantities being cancelled
    let d1 = f.derivative();
    let bulk_scale = d1.derivative().max_coeff().max(1.0);
    let wall_scale = d1.max_coeff().max(1.0);
    let value_scale = f.max_coeff().max(1.0);
    let passes = c0.is_zero(ZERO_TOL * bulk_scale)
        && c1_limit.vanishes(LIMIT_TOL * wall_scale)
        && c2_limit.vanishes(LIMIT_TOL * wall_scale)
        && dipoles.iter().all(|d| d.norm() < LIMIT_TOL * value_scale);
    ResidualReport {
        c0,
        c1_limit,
        c2_limit,
        dipoles,
        passes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySign {
    Positive,
    Zero,
    Negative,
}

/// Direct substitution into the reformed model. For `E > 0` the general
/// interior solution `A sin kx + B cos kx` must have `B = 0` for the atom at
/// the origin to be finite, and then `sin kL = 0`; `E = 0` and `E < 0`
/// admit only `Ψ = 0`.
pub fn solve_spectrum(
    cfg: &WellConfig,
    sign: EnergySign,
    n_max: u32,
) -> Result<Vec<EigenSolution>, IswError> {
    if n_max < 1 {
        return Err(IswError::InvalidQuantumNumber(n_max));
    }
    match sign {
        EnergySign::Positive => Ok((1..=n_max).map(|n| build_eigenstate(cfg, n)).collect()),
        EnergySign::Zero | EnergySign::Negative => Ok(Vec::new()),
    }
}

/// `ΔΨ′` at both walls for the interior solution `a_sin sin kx + a_cos cos kx`,
/// obtained by integrating `(2m/ħ²) VΨ` across each wall.
pub fn matching_jumps(cfg: &WellConfig, k: f64, a_sin: f64, a_cos: f64) -> (Limit, Limit) {
    let f = SmoothExpr::sin(a_sin, k, 0.0) + SmoothExpr::cos(a_cos, k, 0.0);
    let v_psi = potential_term(cfg, &f);
    let l = cfg.width;
    let eps = l / 4.0;
    let across = |a: f64, b: f64| {
        Limit::from_weight(v_psi.integrate(a, b))
            .expect("only divergence can fail here")
            .scaled(1.0 / cfg.kinetic_scale())
    };
    (across(-eps, eps), across(l - eps, l + eps))
}

/// Solves region by region and connects the pieces through the derivative
/// jumps generated by `VΨ`.
pub fn solve_by_matching(cfg: &WellConfig, n_max: u32) -> Result<Vec<EigenSolution>, IswError> {
    if n_max < 1 {
        return Err(IswError::InvalidQuantumNumber(n_max));
    }
    let amp = cfg.amplitude();
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        // the cos component cannot be matched at the origin
        let k = cfg.wavenumber(n);
        let (cos_at_0, _) = matching_jumps(cfg, k, 0.0, 1.0);
        let (at_0, at_l) = matching_jumps(cfg, k, amp, 0.0);
        let matched = cos_at_0.is_divergent() && !at_0.is_divergent() && !at_l.is_divergent();
        if !matched {
            return Err(IswError::MatchingFailed { n, k });
        }
        out.push(build_eigenstate(cfg, n));
    }
    Ok(out)
}

/// `(ΔΨ_n′(0), ΔΨ_n′(L))` computed from the potential atoms and from direct
/// differentiation of `Ψ_n`; the two must agree.
pub fn edge_jumps(cfg: &WellConfig, n: u32) -> Result<(f64, f64), IswError> {
    let state = eigenstate(cfg, n)?;
    let v_psi = potential_term(cfg, &interior_eigenfunction(cfg, n));
    let dpsi = state.psi.differentiate()?;
    let l = cfg.width;
    let eps = l / 4.0;
    let mut out = [0.0; 2];
    for (slot, edge) in out.iter_mut().zip([0.0, l]) {
        let via_potential = v_psi.integrate(edge - eps, edge + eps)? / cfg.kinetic_scale();
        let via_derivative = dpsi.jump(edge);
        if (via_potential - via_derivative).norm() > JUMP_ROUTE_TOL {
            return Err(IswError::InternalMismatch {
                edge,
                via_potential,
                via_derivative,
            });
        }
        *slot = via_derivative.re;
    }
    Ok((out[0], out[1]))
}
