//! Exact term algebra for smooth functions of one real variable.
//!
//! A [`SmoothExpr`] is a finite sum of terms
//!
//! ```text
//! c · x^p · e^(γx + ψ) · f(αx + φ),    f ∈ {1, sin, cos}
//! ```
//!
//! with a complex coefficient `c` and real structure constants. The set is
//! closed under addition, multiplication (product-to-sum for the trig
//! factors, rate addition for the exponentials) and differentiation, and
//! every term has a closed-form antiderivative. The exponential shift `ψ`
//! lets decaying tails such as `e^(-q(x-L))` be stored without overflowing
//! the coefficient.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DistError;

/// Oscillating factor of a term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oscillator {
    One,
    Sin { rate: f64, phase: f64 },
    Cos { rate: f64, phase: f64 },
}

impl Oscillator {
    fn tag(&self) -> u8 {
        match self {
            Oscillator::One => 0,
            Oscillator::Sin { .. } => 1,
            Oscillator::Cos { .. } => 2,
        }
    }

    fn rate_phase(&self) -> (f64, f64) {
        match *self {
            Oscillator::One => (0.0, 0.0),
            Oscillator::Sin { rate, phase } | Oscillator::Cos { rate, phase } => (rate, phase),
        }
    }
}

/// One term `coeff · x^power · e^(exp_rate·x + exp_shift) · osc(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub power: u32,
    pub exp_rate: f64,
    pub exp_shift: f64,
    pub osc: Oscillator,
}

impl Term {
    pub fn new(coeff: Complex64, power: u32, osc: Oscillator) -> Self {
        Term {
            coeff,
            power,
            exp_rate: 0.0,
            exp_shift: 0.0,
            osc,
        }
    }

    pub fn with_exp(mut self, rate: f64, shift: f64) -> Self {
        self.exp_rate = rate;
        self.exp_shift = shift;
        self
    }

    /// Canonical representation: non-negative trig rates, zero-rate trig
    /// folded into the coefficient, phases reduced to (-π, π].
    fn canonical(mut self) -> Self {
        self.exp_rate = clean_zero(self.exp_rate);
        self.exp_shift = clean_zero(self.exp_shift);
        self.osc = match self.osc {
            Oscillator::One => Oscillator::One,
            Oscillator::Sin { rate, phase } => {
                let (rate, phase) = if rate < 0.0 {
                    self.coeff = -self.coeff;
                    (-rate, -phase)
                } else {
                    (rate, phase)
                };
                if rate == 0.0 {
                    self.coeff *= phase.sin();
                    Oscillator::One
                } else {
                    Oscillator::Sin {
                        rate,
                        phase: reduce_phase(phase),
                    }
                }
            }
            Oscillator::Cos { rate, phase } => {
                let (rate, phase) = if rate < 0.0 {
                    (-rate, -phase)
                } else {
                    (rate, phase)
                };
                if rate == 0.0 {
                    self.coeff *= phase.cos();
                    Oscillator::One
                } else {
                    Oscillator::Cos {
                        rate,
                        phase: reduce_phase(phase),
                    }
                }
            }
        };
        self
    }

    fn key_cmp(&self, other: &Term) -> Ordering {
        let (ra, pa) = self.osc.rate_phase();
        let (rb, pb) = other.osc.rate_phase();
        self.power
            .cmp(&other.power)
            .then(self.exp_rate.total_cmp(&other.exp_rate))
            .then(self.exp_shift.total_cmp(&other.exp_shift))
            .then(self.osc.tag().cmp(&other.osc.tag()))
            .then(ra.total_cmp(&rb))
            .then(pa.total_cmp(&pb))
    }

    fn key_bits(&self) -> (u32, u64, u64, u8, u64, u64) {
        let (r, p) = self.osc.rate_phase();
        (
            self.power,
            self.exp_rate.to_bits(),
            self.exp_shift.to_bits(),
            self.osc.tag(),
            r.to_bits(),
            p.to_bits(),
        )
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let osc = match self.osc {
            Oscillator::One => 1.0,
            Oscillator::Sin { rate, phase } => (rate * x + phase).sin(),
            Oscillator::Cos { rate, phase } => (rate * x + phase).cos(),
        };
        let growth = if self.exp_rate == 0.0 && self.exp_shift == 0.0 {
            1.0
        } else {
            (self.exp_rate * x + self.exp_shift).exp()
        };
        self.coeff * (x.powi(self.power as i32) * growth * osc)
    }

    fn derivative(&self) -> Vec<Term> {
        let mut out = Vec::with_capacity(3);
        if self.power > 0 {
            out.push(Term {
                coeff: self.coeff * self.power as f64,
                power: self.power - 1,
                ..*self
            });
        }
        if self.exp_rate != 0.0 {
            out.push(Term {
                coeff: self.coeff * self.exp_rate,
                ..*self
            });
        }
        match self.osc {
            Oscillator::One => {}
            Oscillator::Sin { rate, phase } => out.push(Term {
                coeff: self.coeff * rate,
                osc: Oscillator::Cos { rate, phase },
                ..*self
            }),
            Oscillator::Cos { rate, phase } => out.push(Term {
                coeff: -self.coeff * rate,
                osc: Oscillator::Sin { rate, phase },
                ..*self
            }),
        }
        out
    }

    fn product(&self, other: &Term) -> Vec<Term> {
        let base = Term {
            coeff: self.coeff * other.coeff,
            power: self.power + other.power,
            exp_rate: self.exp_rate + other.exp_rate,
            exp_shift: self.exp_shift + other.exp_shift,
            osc: Oscillator::One,
        };
        use Oscillator::*;
        match (self.osc, other.osc) {
            (One, osc) | (osc, One) => vec![Term { osc, ..base }],
            (Sin { rate: a, phase: p }, Sin { rate: b, phase: q }) => vec![
                Term {
                    coeff: base.coeff * 0.5,
                    osc: Cos {
                        rate: a - b,
                        phase: p - q,
                    },
                    ..base
                },
                Term {
                    coeff: -base.coeff * 0.5,
                    osc: Cos {
                        rate: a + b,
                        phase: p + q,
                    },
                    ..base
                },
            ],
            (Cos { rate: a, phase: p }, Cos { rate: b, phase: q }) => vec![
                Term {
                    coeff: base.coeff * 0.5,
                    osc: Cos {
                        rate: a - b,
                        phase: p - q,
                    },
                    ..base
                },
                Term {
                    coeff: base.coeff * 0.5,
                    osc: Cos {
                        rate: a + b,
                        phase: p + q,
                    },
                    ..base
                },
            ],
            (Sin { rate: a, phase: p }, Cos { rate: b, phase: q })
            | (Cos { rate: b, phase: q }, Sin { rate: a, phase: p }) => vec![
                Term {
                    coeff: base.coeff * 0.5,
                    osc: Sin {
                        rate: a + b,
                        phase: p + q,
                    },
                    ..base
                },
                Term {
                    coeff: base.coeff * 0.5,
                    osc: Sin {
                        rate: a - b,
                        phase: p - q,
                    },
                    ..base
                },
            ],
        }
    }

    /// Taylor coefficients `t_0..=t_order` of the term about `x0`.
    fn taylor(&self, x0: f64, order: usize) -> Vec<Complex64> {
        let n = order + 1;
        // (x0 + h)^p
        let mut poly = vec![0.0; n];
        for (i, slot) in poly
            .iter_mut()
            .enumerate()
            .take((self.power as usize + 1).min(n))
        {
            *slot = binomial(self.power, i as u32) * x0.powi(self.power as i32 - i as i32);
        }
        // e^(γ(x0 + h) + ψ)
        let e0 = (self.exp_rate * x0 + self.exp_shift).exp();
        let mut growth = vec![0.0; n];
        let mut fact = 1.0;
        let mut pow = 1.0;
        for (i, slot) in growth.iter_mut().enumerate() {
            if i > 0 {
                fact *= i as f64;
                pow *= self.exp_rate;
            }
            *slot = e0 * pow / fact;
        }
        // f(θ + αh): derivatives cycle with period four
        let mut osc = vec![0.0; n];
        match self.osc {
            Oscillator::One => osc[0] = 1.0,
            Oscillator::Sin { rate, phase } | Oscillator::Cos { rate, phase } => {
                let theta = rate * x0 + phase;
                let (s, c) = theta.sin_cos();
                let cycle = if matches!(self.osc, Oscillator::Sin { .. }) {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                let mut fact = 1.0;
                let mut pow = 1.0;
                for (i, slot) in osc.iter_mut().enumerate() {
                    if i > 0 {
                        fact *= i as f64;
                        pow *= rate;
                    }
                    *slot = cycle[i % 4] * pow / fact;
                }
            }
        }
        let pg = convolve(&poly, &growth);
        let full = convolve(&pg, &osc);
        full.into_iter().map(|v| self.coeff * v).collect()
    }

    /// Splits the term into complex exponentials `c · x^p · e^(λx + μ)`.
    fn exponentials(&self) -> Vec<(Complex64, Complex64, Complex64)> {
        let i = Complex64::i();
        let lam = Complex64::new(self.exp_rate, 0.0);
        let mu = Complex64::new(self.exp_shift, 0.0);
        match self.osc {
            Oscillator::One => vec![(self.coeff, lam, mu)],
            Oscillator::Sin { rate, phase } => {
                let half = self.coeff / (2.0 * i);
                vec![
                    (half, lam + i * rate, mu + i * phase),
                    (-half, lam - i * rate, mu - i * phase),
                ]
            }
            Oscillator::Cos { rate, phase } => {
                let half = self.coeff * 0.5;
                vec![
                    (half, lam + i * rate, mu + i * phase),
                    (half, lam - i * rate, mu - i * phase),
                ]
            }
        }
    }

    fn integrate(&self, a: f64, b: f64) -> Result<Complex64, DistError> {
        let mut total = Complex64::new(0.0, 0.0);
        for (c, lam, mu) in self.exponentials() {
            total += c * integrate_power_exp(self.power, lam, mu, a, b)?;
        }
        Ok(total)
    }
}

fn clean_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn reduce_phase(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        clean_zero(phase)
    } else {
        let two_pi = 2.0 * PI;
        let mut r = phase - two_pi * (phase / two_pi).round();
        if r <= -PI {
            r += two_pi;
        }
        clean_zero(r)
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate().take(n) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `∫_a^b x^p e^(λx + μ) dx` in closed form; endpoints may be infinite when
/// the integrand decays there.
fn integrate_power_exp(
    p: u32,
    lam: Complex64,
    mu: Complex64,
    a: f64,
    b: f64,
) -> Result<Complex64, DistError> {
    let finite = a.is_finite() && b.is_finite();
    if lam == Complex64::new(0.0, 0.0) {
        if !finite {
            return Err(DistError::UnboundedIntegral { a, b });
        }
        let n = (p + 1) as f64;
        return Ok(mu.exp() * ((b.powi(p as i32 + 1) - a.powi(p as i32 + 1)) / n));
    }
    if finite && lam.norm() * a.abs().max(b.abs()) <= 0.5 {
        return Ok(series_power_exp(p, lam, mu, a, b));
    }
    Ok(antiderivative(p, lam, mu, b)? - antiderivative(p, lam, mu, a)?)
}

fn antiderivative(p: u32, lam: Complex64, mu: Complex64, x: f64) -> Result<Complex64, DistError> {
    if x.is_infinite() {
        // decays iff Re(λ)·x → -∞
        if lam.re * x.signum() < 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(DistError::UnboundedIntegral { a: x, b: x });
    }
    // e^(λx+μ) Σ_j (-1)^j p!/(p-j)! x^(p-j) / λ^(j+1)
    let mut poly = Complex64::new(0.0, 0.0);
    let mut falling = 1.0;
    let mut lam_pow = lam;
    for j in 0..=p {
        if j > 0 {
            falling *= (p - j + 1) as f64;
            lam_pow *= lam;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        poly += sign * falling * x.powi((p - j) as i32) / lam_pow;
    }
    Ok((lam * x + mu).exp() * poly)
}

fn series_power_exp(p: u32, lam: Complex64, mu: Complex64, a: f64, b: f64) -> Complex64 {
    // e^μ Σ_m λ^m/m! (b^(p+m+1) - a^(p+m+1))/(p+m+1)
    // terms can cancel exactly on symmetric intervals, so stop on a bound
    // for the term size rather than on the term itself
    let reach = a.abs().max(b.abs());
    let mut sum = Complex64::new(0.0, 0.0);
    let mut weight = Complex64::new(1.0, 0.0);
    for m in 0..80u32 {
        if m > 0 {
            weight = weight * lam / m as f64;
        }
        let e = (p + m + 1) as i32;
        sum += weight * ((b.powi(e) - a.powi(e)) / e as f64);
        let bound = weight.norm() * reach.powi(e);
        if m > 4 && bound <= 1e-18 * (sum.norm() + (b - a).abs() * reach.powi(p as i32)) {
            break;
        }
    }
    mu.exp() * sum
}

/// Finite sum of [`Term`]s kept in canonical order with like terms merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SmoothExpr {
    terms: Vec<Term>,
}

impl SmoothExpr {
    pub fn zero() -> Self {
        SmoothExpr { terms: Vec::new() }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = Term>) -> Self {
        let mut merged: BTreeMap<(u32, u64, u64, u8, u64, u64), Term> = BTreeMap::new();
        for t in terms.into_iter().map(Term::canonical) {
            merged
                .entry(t.key_bits())
                .and_modify(|acc| acc.coeff += t.coeff)
                .or_insert(t);
        }
        let mut terms: Vec<Term> = merged
            .into_values()
            .filter(|t| t.coeff != Complex64::new(0.0, 0.0))
            .collect();
        terms.sort_by(|a, b| a.key_cmp(b));
        SmoothExpr { terms }
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::from_terms([Term::new(c.into(), 0, Oscillator::One)])
    }

    /// `c · x^power`
    pub fn monomial(c: impl Into<Complex64>, power: u32) -> Self {
        Self::from_terms([Term::new(c.into(), power, Oscillator::One)])
    }

    /// `c · sin(rate·x + phase)`
    pub fn sin(c: impl Into<Complex64>, rate: f64, phase: f64) -> Self {
        Self::from_terms([Term::new(c.into(), 0, Oscillator::Sin { rate, phase })])
    }

    /// `c · cos(rate·x + phase)`
    pub fn cos(c: impl Into<Complex64>, rate: f64, phase: f64) -> Self {
        Self::from_terms([Term::new(c.into(), 0, Oscillator::Cos { rate, phase })])
    }

    /// `c · exp(rate·x + shift)`
    pub fn exp(c: impl Into<Complex64>, rate: f64, shift: f64) -> Self {
        Self::from_terms([Term::new(c.into(), 0, Oscillator::One).with_exp(rate, shift)])
    }

    /// `(x - anchor)^power` expanded into monomials.
    pub fn shifted_power(anchor: f64, power: u32) -> Self {
        Self::from_terms((0..=power).map(|i| {
            let c = binomial(power, i) * (-anchor).powi((power - i) as i32);
            Term::new(Complex64::new(c, 0.0), i, Oscillator::One)
        }))
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.terms.iter().all(|t| t.coeff.norm() < tol)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &SmoothExpr, tol: f64) -> bool {
        (self.clone() - other.clone()).is_zero(tol)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn derivative(&self) -> SmoothExpr {
        Self::from_terms(self.terms.iter().flat_map(Term::derivative))
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> SmoothExpr {
        let c = c.into();
        Self::from_terms(self.terms.iter().map(|t| Term {
            coeff: t.coeff * c,
            ..*t
        }))
    }

    pub fn conj(&self) -> SmoothExpr {
        Self::from_terms(self.terms.iter().map(|t| Term {
            coeff: t.coeff.conj(),
            ..*t
        }))
    }

    /// Taylor coefficients `t_0..=t_order` about `x0`, i.e.
    /// `f(x0 + h) = Σ t_i h^i + O(h^(order+1))`.
    pub fn taylor(&self, x0: f64, order: usize) -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); order + 1];
        for t in &self.terms {
            for (slot, v) in acc.iter_mut().zip(t.taylor(x0, order)) {
                *slot += v;
            }
        }
        acc
    }

    /// Definite integral over `[a, b]`; infinite endpoints are allowed when
    /// every term decays there.
    pub fn integrate(&self, a: f64, b: f64) -> Result<Complex64, DistError> {
        let mut total = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            total += t.integrate(a, b)?;
        }
        Ok(total)
    }
}

impl Add for SmoothExpr {
    type Output = SmoothExpr;
    fn add(self, rhs: SmoothExpr) -> SmoothExpr {
        SmoothExpr::from_terms(self.terms.into_iter().chain(rhs.terms))
    }
}

impl Sub for SmoothExpr {
    type Output = SmoothExpr;
    fn sub(self, rhs: SmoothExpr) -> SmoothExpr {
        self + (-rhs)
    }
}

impl Neg for SmoothExpr {
    type Output = SmoothExpr;
    fn neg(self) -> SmoothExpr {
        self.scale(-1.0)
    }
}

impl Mul for &SmoothExpr {
    type Output = SmoothExpr;
    fn mul(self, rhs: &SmoothExpr) -> SmoothExpr {
        SmoothExpr::from_terms(
            self.terms
                .iter()
                .flat_map(|a| rhs.terms.iter().flat_map(move |b| a.product(b))),
        )
    }
}

impl Mul for SmoothExpr {
    type Output = SmoothExpr;
    fn mul(self, rhs: SmoothExpr) -> SmoothExpr {
        &self * &rhs
    }
}

// JSON form: one flat record per term. `kind` is const/sin/cos/exp; a trig
// term that also carries an exponential factor adds exp_rate/exp_shift.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct TermRepr {
    re: f64,
    im: f64,
    power: u32,
    kind: String,
    rate: f64,
    phase: f64,
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    exp_rate: f64,
    #[serde(default, skip_serializing_if = "is_zero_f64")]
    exp_shift: f64,
}

fn is_zero_f64(v: &f64) -> bool {
    *v == 0.0
}

impl From<&Term> for TermRepr {
    fn from(t: &Term) -> Self {
        let (kind, rate, phase, exp_rate, exp_shift) = match t.osc {
            Oscillator::One if t.exp_rate == 0.0 && t.exp_shift == 0.0 => {
                ("const", 0.0, 0.0, 0.0, 0.0)
            }
            Oscillator::One => ("exp", t.exp_rate, t.exp_shift, 0.0, 0.0),
            Oscillator::Sin { rate, phase } => ("sin", rate, phase, t.exp_rate, t.exp_shift),
            Oscillator::Cos { rate, phase } => ("cos", rate, phase, t.exp_rate, t.exp_shift),
        };
        TermRepr {
            re: t.coeff.re,
            im: t.coeff.im,
            power: t.power,
            kind: kind.to_string(),
            rate,
            phase,
            exp_rate,
            exp_shift,
        }
    }
}

impl TryFrom<TermRepr> for Term {
    type Error = DistError;
    fn try_from(r: TermRepr) -> Result<Self, DistError> {
        let coeff = Complex64::new(r.re, r.im);
        let term = match r.kind.as_str() {
            "const" => Term::new(coeff, r.power, Oscillator::One),
            "exp" => Term::new(coeff, r.power, Oscillator::One).with_exp(r.rate, r.phase),
            "sin" => Term::new(
                coeff,
                r.power,
                Oscillator::Sin {
                    rate: r.rate,
                    phase: r.phase,
                },
            )
            .with_exp(r.exp_rate, r.exp_shift),
            "cos" => Term::new(
                coeff,
                r.power,
                Oscillator::Cos {
                    rate: r.rate,
                    phase: r.phase,
                },
            )
            .with_exp(r.exp_rate, r.exp_shift),
            other => return Err(DistError::Schema(format!("unknown term kind `{other}`"))),
        };
        Ok(term)
    }
}

impl Serialize for SmoothExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let reprs: Vec<TermRepr> = self.terms.iter().map(TermRepr::from).collect();
        reprs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SmoothExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let reprs = Vec::<TermRepr>::deserialize(d)?;
        let terms = reprs
            .into_iter()
            .map(Term::try_from)
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Ok(SmoothExpr::from_terms(terms))
    }
}
