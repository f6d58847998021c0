//! Finite square well of depth `V₀` on `[0, L]` and its approach to the
//! infinite well.
//!
//! Bound states have `E = ħ²k²/2m` and `V₀ − E = ħ²q²/2m`; `k` solves
//! `tan(kL) = 2kq/(k² − q²)`, which is located here through the pole-free
//! form `sin(kL)(k² − q²) − cos(kL)·2kq = 0`. Writing `k² − q² = K² cos φ`
//! and `2kq = K² sin φ` shows the residual equals `K² sin(kL − φ)` with
//! `kL − φ` strictly increasing in `k`, so each bound state is a simple
//! sign change.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::distcalc::{DistError, Distribution, Piece, SmoothExpr};
use crate::isw::WellConfig;

/// Energy identity `ħ²(k² + q²)/2m = V₀`, relative.
pub const ENERGY_TOL: f64 = 1e-10;
/// Quantisation and parity identities (dimensionless, residual divided by k² + q²).
pub const BRANCH_TOL: f64 = 1e-9;
/// `∫|ψ|² = 1`
pub const NORM_TOL: f64 = 1e-8;
/// Potential recovery: interior residual and atom weights.
pub const RECOVERY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiniteWellError {
    #[error("well depth must be positive and finite, got {0}")]
    InvalidDepth(f64),
    #[error("k = {k} lies outside the bound-state window (0, {k_max})")]
    OutOfWindow { k: f64, k_max: f64 },
    #[error("no bound states found")]
    NoBoundStates,
    #[error("depth {depth} binds {found} states, state {needed} requested")]
    InsufficientDepth {
        depth: f64,
        found: usize,
        needed: usize,
    },
    #[error("depths must be strictly ascending")]
    UnsortedDepths,
    #[error("quantum number must be at least 1")]
    InvalidQuantumNumber,
    #[error("invariant `{name}` violated for k = {k}: deviation {deviation:e}")]
    InvariantViolation {
        name: &'static str,
        k: f64,
        deviation: f64,
    },
    #[error("potential recovery failed: {what} deviates by {deviation:e}")]
    RecoveryMismatch { what: &'static str, deviation: f64 },
    #[error("limit study: {0}")]
    LimitViolation(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteWellConfig {
    well: WellConfig,
    depth: f64,
}

impl FiniteWellConfig {
    pub fn new(well: WellConfig, depth: f64) -> Result<Self, FiniteWellError> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(FiniteWellError::InvalidDepth(depth));
        }
        Ok(FiniteWellConfig { well, depth })
    }

    pub fn well(&self) -> &WellConfig {
        &self.well
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// `2mV₀/ħ²`
    fn k_max_sq(&self) -> f64 {
        self.depth / self.well.kinetic_scale()
    }

    /// Upper end of the bound-state window, `√(2mV₀)/ħ`.
    pub fn k_max(&self) -> f64 {
        self.k_max_sq().sqrt()
    }

    /// `q = √(2mV₀/ħ² − k²)`
    pub fn decay_rate(&self, k: f64) -> f64 {
        (self.k_max_sq() - k * k).max(0.0).sqrt()
    }

    fn residual_at(&self, k: f64) -> f64 {
        let q = self.decay_rate(k);
        let kl = k * self.well.width();
        kl.sin() * (k * k - q * q) - kl.cos() * 2.0 * k * q
    }
}

/// The sign `a` relating the two walls: `ψ(x > L) = a A e^{−q(x−L)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }
}

impl Serialize for Parity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign() as i8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteWellSolution {
    pub k: f64,
    pub q: f64,
    #[serde(rename = "a")]
    pub parity: Parity,
    #[serde(rename = "A")]
    pub norm: f64,
    #[serde(skip)]
    pub energy: f64,
    pub psi: Distribution,
}

impl FiniteWellSolution {
    /// Checks energy consistency, quantisation, both parity identities and
    /// normalisation.
    pub fn check_invariants(&self, fw: &FiniteWellConfig) -> Result<(), FiniteWellError> {
        let (k, q) = (self.k, self.q);
        let big_k2 = k * k + q * q;
        let kl = k * fw.well.width();
        let a = self.parity.sign();
        let fail =
            |name, deviation: f64| FiniteWellError::InvariantViolation { name, k, deviation };

        let energy = fw.well.kinetic_scale() * big_k2;
        let dev = (energy - fw.depth).abs() / fw.depth;
        if dev > ENERGY_TOL {
            return Err(fail("energy", dev));
        }
        let dev = (kl.sin() * (k * k - q * q) - kl.cos() * 2.0 * k * q).abs() / big_k2;
        if dev > BRANCH_TOL {
            return Err(fail("quantization", dev));
        }
        let dev = (kl.sin() - a * 2.0 * k * q / big_k2).abs();
        if dev > BRANCH_TOL {
            return Err(fail("branch sin", dev));
        }
        let dev = (kl.cos() - a * (k * k - q * q) / big_k2).abs();
        if dev > BRANCH_TOL {
            return Err(fail("branch cos", dev));
        }
        let dev = (probability(&self.psi, f64::NEG_INFINITY, f64::INFINITY)? - 1.0).abs();
        if dev > NORM_TOL {
            return Err(fail("normalization", dev));
        }
        Ok(())
    }
}

fn probability(psi: &Distribution, a: f64, b: f64) -> Result<f64, DistError> {
    Ok(psi.conj().product(psi)?.integrate(a, b)?.re)
}

/// `sin(kL)(k² − q²) − cos(kL)·2kq`, zero exactly at bound states.
pub fn quantization_residual(fw: &FiniteWellConfig, k: f64) -> Result<f64, FiniteWellError> {
    let k_max = fw.k_max();
    if !(k > 0.0 && k < k_max) {
        return Err(FiniteWellError::OutOfWindow { k, k_max });
    }
    Ok(fw.residual_at(k))
}

/// `A = √(2/L) (k/q) / √((1 + 2/(qL)) (1 + k²/q²))`
pub fn normalization(fw: &FiniteWellConfig, k: f64, q: f64) -> f64 {
    let l = fw.well.width();
    (2.0 / l).sqrt() * (k / q) / ((1.0 + 2.0 / (q * l)) * (1.0 + k * k / (q * q))).sqrt()
}

fn build_psi(fw: &FiniteWellConfig, k: f64, q: f64, parity: Parity, norm: f64) -> Distribution {
    let l = fw.well.width();
    let interior = SmoothExpr::sin(norm * q / k, k, 0.0) + SmoothExpr::cos(norm, k, 0.0);
    Distribution::new(
        vec![
            Piece::new(f64::NEG_INFINITY, 0.0, SmoothExpr::exp(norm, q, 0.0)),
            Piece::new(0.0, l, interior),
            Piece::new(
                l,
                f64::INFINITY,
                SmoothExpr::exp(parity.sign() * norm, -q, q * l),
            ),
        ],
        Vec::new(),
    )
    .expect("pieces are ordered and disjoint")
}

/// `A[e^{qx} θ(−x) + D(x) θ(x) θ(L−x) + a e^{−q(x−L)} θ(x−L)]` with
/// `D(x) = (q/k) sin kx + cos kx`.
pub fn eigenfunction(fw: &FiniteWellConfig, sol: &FiniteWellSolution) -> Distribution {
    build_psi(fw, sol.k, sol.q, sol.parity, sol.norm)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn solution_at(fw: &FiniteWellConfig, k: f64) -> FiniteWellSolution {
    let q = fw.decay_rate(k);
    let kl = k * fw.well.width();
    let big_k2 = k * k + q * q;
    // read a from whichever identity is better conditioned
    let s = kl.sin() * big_k2 / (2.0 * k * q);
    let c = kl.cos() * big_k2 / (k * k - q * q);
    let a = if (2.0 * k * q).abs() >= (k * k - q * q).abs() {
        s
    } else {
        c
    };
    let parity = if a >= 0.0 {
        Parity::Plus
    } else {
        Parity::Minus
    };
    let norm = normalization(fw, k, q);
    let psi = build_psi(fw, k, q, parity, norm);
    FiniteWellSolution {
        k,
        q,
        parity,
        norm,
        energy: fw.well.energy_of(k),
        psi,
    }
}

/// All bound states, ordered by energy. The window `(0, √(2mV₀)/ħ)` is
/// scanned with step `min(π/(4L), window/1000)`, which isolates every root
/// in its own cell, and each sign change is bisected to full precision.
pub fn solve_bound_states(
    fw: &FiniteWellConfig,
) -> Result<Vec<FiniteWellSolution>, FiniteWellError> {
    let k_max = fw.k_max();
    let step = (PI / (4.0 * fw.well.width())).min(k_max / 1000.0);
    let cells = (k_max / step).ceil() as usize;
    let grid: Vec<f64> = (1..=cells).map(|i| (i as f64 * step).min(k_max)).collect();

    let mut roots = Vec::new();
    let mut prev = (grid[0], fw.residual_at(grid[0]));
    for &k in &grid[1..] {
        let r = fw.residual_at(k);
        if k >= k_max {
            // q = 0 is a threshold, not a bound state
            if prev.1 != 0.0 && r != 0.0 && (r < 0.0) != (prev.1 < 0.0) {
                roots.push(bisect(|x| fw.residual_at(x), prev.0, k));
            }
            break;
        }
        if r == 0.0 {
            roots.push(k);
        } else if prev.1 != 0.0 && (r < 0.0) != (prev.1 < 0.0) {
            roots.push(bisect(|x| fw.residual_at(x), prev.0, k));
        }
        prev = (k, r);
    }
    if roots.is_empty() {
        return Err(FiniteWellError::NoBoundStates);
    }
    let solutions: Vec<FiniteWellSolution> =
        roots.into_iter().map(|k| solution_at(fw, k)).collect();
    for s in &solutions {
        s.check_invariants(fw)?;
    }
    Ok(solutions)
}

/// `(ħ²/2m) ψ″ + E ψ`, which must reproduce `V₀ θ(−x) ψ + V₀ θ(x−L) ψ`
/// with no interior part and no delta atoms. Sub-tolerance residue is
/// chopped from the returned distribution.
pub fn potential_recovery(
    fw: &FiniteWellConfig,
    sol: &FiniteWellSolution,
) -> Result<Distribution, FiniteWellError> {
    let s = fw.well.kinetic_scale();
    let psi = &sol.psi;
    let d2 = psi.differentiate()?.differentiate()?;
    let v_psi = d2.scale(s).add(&psi.scale(sol.energy));
    let l = fw.well.width();

    let interior = v_psi
        .pieces()
        .iter()
        .filter(|p| p.start < l && p.end > 0.0)
        .map(|p| p.expr.max_coeff())
        .fold(0.0, f64::max);
    if interior > RECOVERY_TOL {
        return Err(FiniteWellError::RecoveryMismatch {
            what: "interior",
            deviation: interior,
        });
    }
    for atom in v_psi.atoms() {
        let w = atom.weight().map(|w| w.norm()).unwrap_or(f64::INFINITY);
        if w > RECOVERY_TOL {
            return Err(FiniteWellError::RecoveryMismatch {
                what: "atom weight",
                deviation: w,
            });
        }
    }
    let expected = psi
        .sub(&Distribution::window(psi_interior(psi, l), 0.0, l)?)
        .scale(fw.depth);
    let diff = v_psi.sub(&expected);
    let exterior = diff
        .pieces()
        .iter()
        .filter(|p| p.end <= 0.0 || p.start >= l)
        .map(|p| p.expr.max_coeff())
        .fold(0.0, f64::max);
    if exterior > RECOVERY_TOL * fw.depth.max(1.0) {
        return Err(FiniteWellError::RecoveryMismatch {
            what: "exterior",
            deviation: exterior,
        });
    }
    Ok(v_psi.chop(RECOVERY_TOL))
}

fn psi_interior(psi: &Distribution, l: f64) -> SmoothExpr {
    psi.pieces()
        .iter()
        .find(|p| p.start == 0.0 && p.end == l)
        .map_or_else(SmoothExpr::zero, |p| p.expr.clone())
}

/// One depth of the `V₀ → ∞` ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    #[serde(rename = "V0")]
    pub depth: f64,
    pub k: f64,
    /// `nπ/L − k_n(V₀)`
    pub gap: f64,
    /// `ψ′(0⁺)`, the finite-well counterpart of the infinite-well `ΔΨ′(0)`
    pub edge_slope: f64,
    pub exterior_prob: f64,
}

/// Tracks the n-th bound state over ascending depths. The gap to the
/// infinite-well wavenumber must be positive and shrink at every step, and
/// the edge slope must move monotonically towards `√(2/L) k_n`.
pub fn limit_study(
    cfg: &WellConfig,
    n: usize,
    depths: &[f64],
) -> Result<Vec<LimitRow>, FiniteWellError> {
    if n < 1 {
        return Err(FiniteWellError::InvalidQuantumNumber);
    }
    if depths
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(FiniteWellError::UnsortedDepths);
    }
    let l = cfg.width();
    let k_inf = cfg.wavenumber(n as u32);
    let slope_inf = cfg.amplitude() * k_inf;
    let mut rows: Vec<LimitRow> = Vec::with_capacity(depths.len());
    for &depth in depths {
        let fw = FiniteWellConfig::new(*cfg, depth)?;
        let states = solve_bound_states(&fw)?;
        let sol = states
            .get(n - 1)
            .ok_or(FiniteWellError::InsufficientDepth {
                depth,
                found: states.len(),
                needed: n,
            })?;
        let edge_slope = sol.psi.differentiate()?.right_limit(0.0).re;
        let exterior_prob = probability(&sol.psi, f64::NEG_INFINITY, 0.0)?
            + probability(&sol.psi, l, f64::INFINITY)?;
        let row = LimitRow {
            depth,
            k: sol.k,
            gap: k_inf - sol.k,
            edge_slope,
            exterior_prob,
        };
        if row.gap <= 0.0 {
            return Err(FiniteWellError::LimitViolation(format!(
                "gap {} at V0 = {depth} is not positive",
                row.gap
            )));
        }
        if let Some(prev) = rows.last() {
            if row.gap >= prev.gap {
                return Err(FiniteWellError::LimitViolation(format!(
                    "gap does not shrink between V0 = {} and V0 = {depth}",
                    prev.depth
                )));
            }
            if (row.edge_slope - slope_inf).abs() >= (prev.edge_slope - slope_inf).abs() {
                return Err(FiniteWellError::LimitViolation(format!(
                    "edge slope does not approach {slope_inf} at V0 = {depth}"
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
