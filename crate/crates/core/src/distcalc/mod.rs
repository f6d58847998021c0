//! One-dimensional distributions built from smooth pieces and delta atoms.
//!
//! A [`Distribution`] is a piecewise smooth function (pieces on half-open
//! intervals `[a, b)`) plus a finite list of [`DeltaAtom`]s. Differentiation
//! turns every jump of the smooth part into a `δ` atom, so products like
//! `F(x) θ(x) θ(L - x)` can be pushed through the Schrödinger operator
//! exactly.
//!
//! Singular coefficients such as `F(x)/x · δ(x)` are kept symbolic: an atom
//! stores the numerator and a pole order, and its numeric weight is the
//! limit obtained from the Taylor expansion of the numerator at the anchor.

mod atom;
mod expr;

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use atom::{AtomOrder, DeltaAtom};
pub use expr::{Oscillator, SmoothExpr, Term};

/// Coefficient magnitude below which smooth expressions and atoms are
/// considered zero in normal form.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistError {
    #[error("differentiating a δ′ atom is not supported")]
    UnsupportedOrder,
    #[error("atom at {anchor} diverges: Taylor coefficient of order {order} is {magnitude:e}")]
    Divergent {
        anchor: f64,
        order: usize,
        magnitude: f64,
    },
    #[error("x = {0} is the anchor of a delta atom and has no pointwise value")]
    AtomAnchor(f64),
    #[error("invalid interval [{a}, {b})")]
    InvalidInterval { a: f64, b: f64 },
    #[error("pieces [{0}, ..) and [{1}, ..) overlap")]
    OverlappingPieces(f64, f64),
    #[error("integral over [{a}, {b}] does not converge")]
    UnboundedIntegral { a: f64, b: f64 },
    #[error("pointwise product is only defined for atom-free distributions")]
    AtomProduct,
    #[error("schema error: {0}")]
    Schema(String),
}

/// A smooth expression supported on `[start, end)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub expr: SmoothExpr,
}

impl Piece {
    pub fn new(start: f64, end: f64, expr: SmoothExpr) -> Self {
        Piece { start, end, expr }
    }

    fn covers(&self, x: f64) -> bool {
        self.start <= x && x < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Distribution {
    pieces: Vec<Piece>,
    atoms: Vec<DeltaAtom>,
}

impl Distribution {
    pub fn zero() -> Self {
        Distribution::default()
    }

    /// Validates the pieces (ordered, disjoint, `start < end`) and returns
    /// the normal form.
    pub fn new(mut pieces: Vec<Piece>, atoms: Vec<DeltaAtom>) -> Result<Self, DistError> {
        for p in &pieces {
            if p.start.is_nan() || p.end.is_nan() || p.start >= p.end {
                return Err(DistError::InvalidInterval {
                    a: p.start,
                    b: p.end,
                });
            }
        }
        pieces.sort_by(|a, b| a.start.total_cmp(&b.start));
        for w in pieces.windows(2) {
            if w[1].start < w[0].end {
                return Err(DistError::OverlappingPieces(w[0].start, w[1].start));
            }
        }
        Ok(Distribution { pieces, atoms }.normalized())
    }

    /// `expr · θ(x - a) θ(b - x)`
    pub fn window(expr: SmoothExpr, a: f64, b: f64) -> Result<Self, DistError> {
        Self::new(vec![Piece::new(a, b, expr)], Vec::new())
    }

    pub fn from_atoms(atoms: Vec<DeltaAtom>) -> Self {
        Distribution {
            pieces: Vec::new(),
            atoms,
        }
        .normalized()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn atoms(&self) -> &[DeltaAtom] {
        &self.atoms
    }

    pub fn atom_at(&self, anchor: f64, order: AtomOrder) -> Option<&DeltaAtom> {
        self.atoms
            .iter()
            .find(|a| a.anchor() == anchor && a.order() == order)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty() && self.atoms.is_empty()
    }

    /// Finite piece endpoints, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.start, p.end])
            .filter(|x| x.is_finite())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Normal form: zero pieces dropped, adjacent equal pieces merged, atoms
    /// with a common anchor and order combined, zero atoms removed.
    pub fn normalized(self) -> Self {
        let mut pieces: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        for p in self.pieces {
            if p.expr.is_zero(ZERO_TOL) {
                continue;
            }
            match pieces.last_mut() {
                Some(last) if last.end == p.start && last.expr.approx_eq(&p.expr, ZERO_TOL) => {
                    last.end = p.end;
                }
                _ => pieces.push(p),
            }
        }

        let mut atoms: Vec<DeltaAtom> = Vec::with_capacity(self.atoms.len());
        for a in self.atoms {
            match atoms
                .iter_mut()
                .find(|b| b.anchor() == a.anchor() && b.order() == a.order())
            {
                Some(b) => *b = b.merged(&a),
                None => atoms.push(a),
            }
        }
        atoms.retain(|a| !a.weight_expr().is_zero(ZERO_TOL));
        atoms.sort_by(|a, b| {
            a.anchor()
                .total_cmp(&b.anchor())
                .then(a.order().cmp(&b.order()))
        });
        Distribution { pieces, atoms }
    }

    /// Value of the covering piece at `x` (pieces are `[a, b)`), zero where
    /// no piece covers `x`.
    pub fn evaluate(&self, x: f64) -> Result<Complex64, DistError> {
        if self.atoms.iter().any(|a| a.anchor() == x) {
            return Err(DistError::AtomAnchor(x));
        }
        Ok(self.right_limit(x))
    }

    pub fn right_limit(&self, x: f64) -> Complex64 {
        self.pieces
            .iter()
            .find(|p| p.covers(x))
            .map_or(Complex64::new(0.0, 0.0), |p| p.expr.eval(x))
    }

    pub fn left_limit(&self, x: f64) -> Complex64 {
        self.pieces
            .iter()
            .find(|p| p.start < x && x <= p.end)
            .map_or(Complex64::new(0.0, 0.0), |p| p.expr.eval(x))
    }

    /// Right limit minus left limit of the smooth part at `x0`.
    pub fn jump(&self, x0: f64) -> Complex64 {
        self.right_limit(x0) - self.left_limit(x0)
    }

    /// Distributional derivative. Jumps of the smooth part become `δ` atoms
    /// and existing `δ` atoms become `δ′` atoms with the same weight data.
    pub fn differentiate(&self) -> Result<Distribution, DistError> {
        if self.atoms.iter().any(|a| a.order() == AtomOrder::Dipole) {
            return Err(DistError::UnsupportedOrder);
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.start, p.end, p.expr.derivative()))
            .collect();
        let mut atoms: Vec<DeltaAtom> = self.atoms.iter().map(DeltaAtom::raised).collect();
        for x0 in self.breakpoints() {
            let j = self.jump(x0);
            atoms.push(DeltaAtom::new(
                x0,
                AtomOrder::Delta,
                SmoothExpr::constant(j),
                0,
            ));
        }
        Ok(Distribution { pieces, atoms }.normalized())
    }

    /// Multiplies every piece and every atom numerator by `g`. Sifting is
    /// deferred to weight evaluation.
    pub fn multiply_smooth(&self, g: &SmoothExpr) -> Distribution {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.start, p.end, &p.expr * g))
            .collect();
        let atoms = self.atoms.iter().map(|a| a.multiplied(g)).collect();
        Distribution { pieces, atoms }.normalized()
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Distribution {
        self.multiply_smooth(&SmoothExpr::constant(c))
    }

    pub fn conj(&self) -> Distribution {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece::new(p.start, p.end, p.expr.conj()))
            .collect();
        let atoms = self.atoms.iter().map(DeltaAtom::conj).collect();
        Distribution { pieces, atoms }.normalized()
    }

    pub fn add(&self, other: &Distribution) -> Distribution {
        self.combine(
            other,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(a.clone() + b.clone()),
                (Some(a), None) | (None, Some(a)) => Some(a.clone()),
                (None, None) => None,
            },
            true,
        )
    }

    pub fn sub(&self, other: &Distribution) -> Distribution {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product of two atom-free distributions.
    pub fn product(&self, other: &Distribution) -> Result<Distribution, DistError> {
        if !self.atoms.is_empty() || !other.atoms.is_empty() {
            return Err(DistError::AtomProduct);
        }
        Ok(self.combine(
            other,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
            false,
        ))
    }

    fn combine(
        &self,
        other: &Distribution,
        op: impl Fn(Option<&SmoothExpr>, Option<&SmoothExpr>) -> Option<SmoothExpr>,
        keep_atoms: bool,
    ) -> Distribution {
        let mut cuts: Vec<f64> = self
            .pieces
            .iter()
            .chain(&other.pieces)
            .flat_map(|p| [p.start, p.end])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let find = |d: &Distribution, a: f64, b: f64| -> Option<SmoothExpr> {
            d.pieces
                .iter()
                .find(|p| p.start <= a && b <= p.end)
                .map(|p| p.expr.clone())
        };
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let lhs = find(self, a, b);
            let rhs = find(other, a, b);
            if let Some(expr) = op(lhs.as_ref(), rhs.as_ref()) {
                pieces.push(Piece::new(a, b, expr));
            }
        }
        let atoms = if keep_atoms {
            self.atoms.iter().chain(&other.atoms).cloned().collect()
        } else {
            Vec::new()
        };
        Distribution { pieces, atoms }.normalized()
    }

    /// `∫_a^b` of the distribution against the unit test function. An order-0
    /// atom counts fully when strictly inside `(a, b)` and by half when it
    /// sits on an endpoint; `δ′` atoms contribute nothing.
    pub fn integrate(&self, a: f64, b: f64) -> Result<Complex64, DistError> {
        if a.partial_cmp(&b) != Some(Ordering::Less) {
            return Err(DistError::InvalidInterval { a, b });
        }
        let mut total = Complex64::new(0.0, 0.0);
        for p in &self.pieces {
            let lo = p.start.max(a);
            let hi = p.end.min(b);
            if lo < hi {
                total += p.expr.integrate(lo, hi)?;
            }
        }
        for atom in self
            .atoms
            .iter()
            .filter(|at| at.order() == AtomOrder::Delta)
        {
            let x = atom.anchor();
            let share = match x.partial_cmp(&a).zip(x.partial_cmp(&b)) {
                Some((Ordering::Greater, Ordering::Less)) => 1.0,
                Some((Ordering::Equal, _)) | Some((_, Ordering::Equal)) => 0.5,
                _ => 0.0,
            };
            if share > 0.0 {
                total += share * atom.weight()?;
            }
        }
        Ok(total)
    }

    /// Drops atoms whose finite weight is within `tol` of zero and pieces
    /// whose coefficients are all below `tol`.
    pub fn chop(&self, tol: f64) -> Distribution {
        let pieces = self
            .pieces
            .iter()
            .filter(|p| !p.expr.is_zero(tol))
            .cloned()
            .collect();
        let atoms = self
            .atoms
            .iter()
            .filter(|a| !matches!(a.weight(), Ok(w) if w.norm() <= tol))
            .cloned()
            .collect();
        Distribution { pieces, atoms }.normalized()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, DistError> {
        serde_json::from_str(s).map_err(|e| DistError::Schema(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct PieceRepr {
    // null encodes an unbounded end
    a: Option<f64>,
    b: Option<f64>,
    terms: SmoothExpr,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    pieces: Vec<PieceRepr>,
    atoms: Vec<DeltaAtom>,
}

impl Serialize for Distribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let repr = DistributionRepr {
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceRepr {
                    a: p.start.is_finite().then_some(p.start),
                    b: p.end.is_finite().then_some(p.end),
                    terms: p.expr.clone(),
                })
                .collect(),
            atoms: self.atoms.clone(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(d)?;
        let pieces = repr
            .pieces
            .into_iter()
            .map(|p| {
                Piece::new(
                    p.a.unwrap_or(f64::NEG_INFINITY),
                    p.b.unwrap_or(f64::INFINITY),
                    p.terms,
                )
            })
            .collect();
        Distribution::new(pieces, repr.atoms).map_err(serde::de::Error::custom)
    }
}
