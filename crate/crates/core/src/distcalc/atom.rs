use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DistError, SmoothExpr};

/// Lower Taylor coefficients above this magnitude make an atom divergent.
pub const DIVERGENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomOrder {
    /// `δ(x - a)`
    Delta,
    /// `δ′(x - a)`
    Dipole,
}

impl AtomOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            AtomOrder::Delta => 0,
            AtomOrder::Dipole => 1,
        }
    }
}

/// `weight_expr(x) / (x - anchor)^pole · δ^(order)(x - anchor)`.
///
/// The numeric weight is `lim_{x→anchor} weight_expr(x) / (x - anchor)^pole`,
/// read off the Taylor expansion of `weight_expr`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaAtom {
    anchor: f64,
    order: AtomOrder,
    weight_expr: SmoothExpr,
    pole: u32,
}

impl DeltaAtom {
    pub fn new(anchor: f64, order: AtomOrder, weight_expr: SmoothExpr, pole: u32) -> Self {
        DeltaAtom {
            anchor,
            order,
            weight_expr,
            pole,
        }
    }

    /// Plain `c · δ(x - anchor)`.
    pub fn delta(anchor: f64, c: impl Into<Complex64>) -> Self {
        Self::new(anchor, AtomOrder::Delta, SmoothExpr::constant(c), 0)
    }

    /// Atom written with the reflected denominator `(anchor - x)^pole`, as in
    /// `F(x)/(L - x) · δ(L - x)`. Stored in the canonical `(x - anchor)` form.
    pub fn reflected(anchor: f64, order: AtomOrder, weight_expr: SmoothExpr, pole: u32) -> Self {
        let sign = if pole.is_multiple_of(2) { 1.0 } else { -1.0 };
        Self::new(anchor, order, weight_expr.scale(sign), pole)
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn order(&self) -> AtomOrder {
        self.order
    }

    pub fn weight_expr(&self) -> &SmoothExpr {
        &self.weight_expr
    }

    pub fn pole(&self) -> u32 {
        self.pole
    }

    /// Limit-defined weight. Fails with [`DistError::Divergent`] when a
    /// Taylor coefficient below the pole order does not vanish.
    pub fn weight(&self) -> Result<Complex64, DistError> {
        let p = self.pole as usize;
        let taylor = self.weight_expr.taylor(self.anchor, p + 2);
        if let Some((order, t)) = taylor[..p]
            .iter()
            .enumerate()
            .find(|(_, t)| t.norm() > DIVERGENCE_TOL)
        {
            return Err(DistError::Divergent {
                anchor: self.anchor,
                order,
                magnitude: t.norm(),
            });
        }
        Ok(taylor[p])
    }

    pub fn is_divergent(&self) -> bool {
        self.weight().is_err()
    }

    pub(crate) fn raised(&self) -> DeltaAtom {
        DeltaAtom {
            order: AtomOrder::Dipole,
            ..self.clone()
        }
    }

    pub(crate) fn multiplied(&self, g: &SmoothExpr) -> DeltaAtom {
        DeltaAtom {
            weight_expr: &self.weight_expr * g,
            ..self.clone()
        }
    }

    pub(crate) fn conj(&self) -> DeltaAtom {
        DeltaAtom {
            weight_expr: self.weight_expr.conj(),
            ..self.clone()
        }
    }

    /// Numerator over the pole order `pole`, which must be at least the
    /// current one.
    fn lifted(&self, pole: u32) -> SmoothExpr {
        debug_assert!(pole >= self.pole);
        if pole == self.pole {
            self.weight_expr.clone()
        } else {
            &self.weight_expr * &SmoothExpr::shifted_power(self.anchor, pole - self.pole)
        }
    }

    /// Sum of two atoms sharing anchor and order, over their common pole.
    pub(crate) fn merged(&self, other: &DeltaAtom) -> DeltaAtom {
        debug_assert!(self.anchor == other.anchor && self.order == other.order);
        let pole = self.pole.max(other.pole);
        DeltaAtom {
            anchor: self.anchor,
            order: self.order,
            weight_expr: self.lifted(pole) + other.lifted(pole),
            pole,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    anchor: f64,
    order: u8,
    pole: u32,
    weight_terms: SmoothExpr,
}

impl Serialize for DeltaAtom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AtomRepr {
            anchor: self.anchor,
            order: self.order.as_u8(),
            pole: self.pole,
            weight_terms: self.weight_expr.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DeltaAtom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = AtomRepr::deserialize(d)?;
        let order = match r.order {
            0 => AtomOrder::Delta,
            1 => AtomOrder::Dipole,
            o => {
                return Err(serde::de::Error::custom(format!(
                    "unsupported atom order {o}"
                )))
            }
        };
        Ok(DeltaAtom::new(r.anchor, order, r.weight_terms, r.pole))
    }
}
