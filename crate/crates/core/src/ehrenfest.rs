//! Wave packets in the reformed well and the momentum balance
//! `d⟨p⟩/dt = −⟨dV/dx⟩`.
//!
//! For `Ψ(x, t) = Σ a_n Ψ_n(x) e^{−iω_n t}` all three expectation values are
//! finite double series over the packet's modes:
//!
//! ```text
//! ⟨p⟩       = −iħ (2/L) Σ_{n≠j} a_n* a_j k_n k_j/(k_n² − k_j²) β_nj e^{i(ω_n−ω_j)t}
//! d⟨p⟩/dt   =  ħ²/(mL)  Σ      a_n* a_j k_n k_j β_nj e^{i(ω_n−ω_j)t}
//! ⟨dV/dx⟩   = −ħ²/(mL)  Σ      a_n* a_j k_n k_j β_nj e^{i(ω_n−ω_j)t}
//! ```
//!
//! with `β_nj = 1 − (−1)^{n+j}`. The force series is assembled from pair
//! integrals `∫ Ψ_n′ · (VΨ_j) dx` evaluated by the distribution calculus, so
//! it shares no code with the closed-form rate series it is compared to.
//!
//! Series are summed at the packet's own truncation. `⟨p⟩` converges slowly
//! in the number of modes for packets whose derivative jumps at the walls,
//! but both sides of the balance truncate identically.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distcalc::{DistError, Distribution, SmoothExpr};
use crate::isw::{interior_eigenfunction, potential_term, IswError, WellConfig};

/// Allowed departure of `Σ|a_n|²` from one for a packet taken as given.
pub const NORM_TOL: f64 = 1e-12;
/// Imaginary residue allowed in a Hermitian series, relative to its scale.
pub const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EhrenfestError {
    #[error("a wave packet needs at least one mode")]
    Empty,
    #[error("coefficients are not normalised: sum |a_n|^2 = {0}")]
    NotNormalized(f64),
    #[error("coefficients are all zero")]
    ZeroNorm,
    #[error("series is not Hermitian: imaginary residue {imag:e} at scale {scale:e}")]
    NonHermitian { imag: f64, scale: f64 },
    #[error("quadrature needs at least 100 grid points, got {0}")]
    TooFewGridPoints(usize),
    #[error(transparent)]
    Isw(#[from] IswError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Reject coefficients whose squared norm is not one.
    Require,
    /// Divide by the norm.
    Rescale,
}

/// Superposition of infinite-well eigenstates, modes `n = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    cfg: WellConfig,
    coeffs: Vec<Complex64>,
    // −(M_nj + M_jn), row-major, M from `force_pair_element`
    force: Vec<Complex64>,
}

impl WavePacket {
    pub fn new(
        cfg: WellConfig,
        mut coeffs: Vec<Complex64>,
        normalization: Normalization,
    ) -> Result<Self, EhrenfestError> {
        if coeffs.is_empty() {
            return Err(EhrenfestError::Empty);
        }
        let norm2: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
        match normalization {
            Normalization::Require if (norm2 - 1.0).abs() > NORM_TOL => {
                return Err(EhrenfestError::NotNormalized(norm2))
            }
            Normalization::Require => {}
            Normalization::Rescale => {
                if norm2 == 0.0 || !norm2.is_finite() {
                    return Err(EhrenfestError::ZeroNorm);
                }
                let s = norm2.sqrt();
                coeffs.iter_mut().for_each(|a| *a /= s);
            }
        }
        let n = coeffs.len();
        let mut pair = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                pair[i * n + j] = force_pair_element(&cfg, i as u32 + 1, j as u32 + 1)?;
            }
        }
        let mut force = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                force[i * n + j] = -(pair[i * n + j] + pair[j * n + i]);
            }
        }
        Ok(WavePacket { cfg, coeffs, force })
    }

    /// Random complex amplitudes with `modes` entries, normalised.
    pub fn random<R: Rng + ?Sized>(cfg: WellConfig, modes: usize, rng: &mut R) -> Self {
        let coeffs = (0..modes)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Self::new(cfg, coeffs, Normalization::Rescale).expect("random packet is non-degenerate")
    }

    pub fn cfg(&self) -> &WellConfig {
        &self.cfg
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    fn omega(&self, n: u32) -> f64 {
        self.cfg.energy_of(self.cfg.wavenumber(n)) / self.cfg.hbar()
    }

    /// `a_n e^{−iω_n t}` for each mode.
    fn phased(&self, t: f64) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * Complex64::from_polar(1.0, -self.omega(i as u32 + 1) * t))
            .collect()
    }

    /// `Σ_nj conj(b_n) b_j m(n, j)` with `b = phased(t)`, plus the sum of
    /// term magnitudes.
    fn double_series(&self, t: f64, m: impl Fn(usize, usize) -> Complex64) -> (Complex64, f64) {
        let b = self.phased(t);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (i, bi) in b.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                let term = bi.conj() * bj * m(i, j);
                sum += term;
                scale += term.norm();
            }
        }
        (sum, scale)
    }

    pub fn to_file(&self) -> PacketFile {
        PacketFile {
            width: self.cfg.width(),
            hbar: self.cfg.hbar(),
            mass: self.cfg.mass(),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| CoeffRepr { re: c.re, im: c.im })
                .collect(),
        }
    }
}

/// JSON packet description: `{L, hbar, mass, coeffs: [{re, im}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketFile {
    #[serde(rename = "L")]
    pub width: f64,
    pub hbar: f64,
    pub mass: f64,
    pub coeffs: Vec<CoeffRepr>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffRepr {
    pub re: f64,
    pub im: f64,
}

impl PacketFile {
    pub fn into_packet(self, normalization: Normalization) -> Result<WavePacket, EhrenfestError> {
        let cfg = WellConfig::new(self.hbar, self.mass, self.width)?;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| Complex64::new(c.re, c.im))
            .collect();
        WavePacket::new(cfg, coeffs, normalization)
    }
}

fn hermitian_real((sum, scale): (Complex64, f64)) -> Result<f64, EhrenfestError> {
    if sum.im.abs() > HERMITICITY_TOL * scale.max(1.0) {
        return Err(EhrenfestError::NonHermitian {
            imag: sum.im,
            scale,
        });
    }
    Ok(sum.re)
}

/// `β_nj = 1 − (−1)^{n+j}`: 2 for modes of opposite parity, 0 otherwise.
pub fn beta(n: u32, j: u32) -> i64 {
    if (n + j) % 2 == 1 {
        2
    } else {
        0
    }
}

/// `∫ Ψ_n′ (VΨ_j) dx` over the well: the potential atoms of `Ψ_j` sifted by
/// the interior slope of `Ψ_n`, each counted with half weight at its wall.
pub fn force_pair_element(cfg: &WellConfig, n: u32, j: u32) -> Result<Complex64, DistError> {
    let slope = interior_eigenfunction(cfg, n).derivative();
    let v_psi = potential_term(cfg, &interior_eigenfunction(cfg, j));
    v_psi.multiply_smooth(&slope).integrate(0.0, cfg.width())
}

/// Matrix element of `d⟨p⟩/dt` between modes `n` and `j`:
/// `ħ²/(mL) k_n k_j β_nj`.
pub fn rate_element(cfg: &WellConfig, n: u32, j: u32) -> f64 {
    let scale = cfg.hbar() * cfg.hbar() / (cfg.mass() * cfg.width());
    scale * cfg.wavenumber(n) * cfg.wavenumber(j) * beta(n, j) as f64
}

/// Matrix element of `⟨dV/dx⟩` between modes `n` and `j`, from the pair
/// integrals: `−(M_nj + M_jn)`.
pub fn gradient_element(cfg: &WellConfig, n: u32, j: u32) -> Result<Complex64, DistError> {
    Ok(-(force_pair_element(cfg, n, j)? + force_pair_element(cfg, j, n)?))
}

/// `Σ a_n e^{−iω_n t} Ψ_n` as a single distribution on `[0, L)`.
pub fn evolve(p: &WavePacket, t: f64) -> Distribution {
    let expr = p
        .phased(t)
        .iter()
        .enumerate()
        .fold(SmoothExpr::zero(), |acc, (i, b)| {
            acc + interior_eigenfunction(&p.cfg, i as u32 + 1).scale(*b)
        });
    Distribution::window(expr, 0.0, p.cfg.width()).expect("well width is positive")
}

pub fn momentum_expectation(p: &WavePacket, t: f64) -> Result<f64, EhrenfestError> {
    let cfg = p.cfg;
    let prefactor = Complex64::new(0.0, -cfg.hbar() * 2.0 / cfg.width());
    let series = p.double_series(t, |i, j| {
        let (n, m) = (i as u32 + 1, j as u32 + 1);
        let b = beta(n, m);
        if b == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let (kn, km) = (cfg.wavenumber(n), cfg.wavenumber(m));
        prefactor * (kn * km / (kn * kn - km * km) * b as f64)
    });
    hermitian_real(series)
}

pub fn momentum_rate(p: &WavePacket, t: f64) -> Result<f64, EhrenfestError> {
    hermitian_real(rate_series(p, t))
}

pub fn potential_gradient_expectation(p: &WavePacket, t: f64) -> Result<f64, EhrenfestError> {
    hermitian_real(gradient_series(p, t))
}

fn rate_series(p: &WavePacket, t: f64) -> (Complex64, f64) {
    let cfg = p.cfg;
    p.double_series(t, |i, j| {
        rate_element(&cfg, i as u32 + 1, j as u32 + 1).into()
    })
}

fn gradient_series(p: &WavePacket, t: f64) -> (Complex64, f64) {
    let n = p.modes();
    p.double_series(t, |i, j| p.force[i * n + j])
}

/// `|d⟨p⟩/dt + ⟨dV/dx⟩|`, zero up to rounding.
pub fn ehrenfest_residual(p: &WavePacket, t: f64) -> f64 {
    let (rate, _) = rate_series(p, t);
    let (grad, _) = gradient_series(p, t);
    (rate.re + grad.re).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub norm: f64,
    pub momentum: f64,
}

/// Composite Simpson estimate of `∫|Ψ|²` and `∫Ψ* (−iħ ∂ₓΨ)` over `[0, L]`
/// from samples of the evolved packet and its piecewise derivative.
pub fn quadrature_oracle(
    p: &WavePacket,
    t: f64,
    gridpoints: usize,
) -> Result<QuadratureResult, EhrenfestError> {
    if gridpoints < 100 {
        return Err(EhrenfestError::TooFewGridPoints(gridpoints));
    }
    let intervals = gridpoints + gridpoints % 2;
    let l = p.cfg.width();
    let h = l / intervals as f64;
    let psi = evolve(p, t);
    let dpsi = psi.differentiate()?;
    // interior limits, so samples on the walls come from inside the well
    let inner = |d: &Distribution, i: usize, x: f64| {
        if i == 0 {
            d.right_limit(x)
        } else {
            d.left_limit(x)
        }
    };
    let mut norm = 0.0;
    let mut mom = Complex64::new(0.0, 0.0);
    for i in 0..=intervals {
        let x = if i == intervals { l } else { i as f64 * h };
        let w = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let v = inner(&psi, i, x);
        let dv = inner(&dpsi, i, x);
        norm += w * v.norm_sqr();
        mom += w * v.conj() * dv;
    }
    let third = h / 3.0;
    let momentum = (Complex64::new(0.0, -p.cfg.hbar()) * mom * third).re;
    Ok(QuadratureResult {
        norm: norm * third,
        momentum,
    })
}
