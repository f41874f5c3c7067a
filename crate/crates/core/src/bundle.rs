//! Chart-level elements of TM, TTM and TTTM and the structural maps
//! between them.
//!
//! A `TTVector` is the quadruple `(x, xi; eta, zeta)` of m-blocks. The
//! canonical projection takes `(x, xi)`, the tangent of the base projection
//! takes `(x, eta)`, and the two vector bundle structures add `(eta, zeta)`
//! (fibers of the canonical projection) respectively `(xi, zeta)` (fibers of
//! the projected bundle). The canonical flip swaps `xi` and `eta` and
//! exchanges the two structures. A `TTTVector` stores the same shape one
//! level up: four 2m-blocks.
//!
//! The conversions `to_nested`/`from_nested` identify a TTM element with a
//! TM element over tangent scalars (and TTTM with TTM over tangent scalars):
//! the outer tangent level carries the velocity blocks. Every higher tangent
//! prolongation in the crate is obtained through these identifications.

use crate::linalg;
use crate::scalar::{Scalar, Tangent};
use crate::{Error, Result, BASE_MATCH_TOL};

/// Element of TM in a chart: base point and tangent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<S> {
    pub base: Vec<S>,
    pub vec: Vec<S>,
}

impl<S: Scalar> TangentVector<S> {
    pub fn new(base: Vec<S>, vec: Vec<S>) -> Self {
        debug_assert_eq!(base.len(), vec.len());
        TangentVector { base, vec }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Lift plain real data to the scalar type `S`.
    pub fn lift(base: &[f64], vec: &[f64]) -> Self {
        TangentVector::new(linalg::from_f64s(base), linalg::from_f64s(vec))
    }

    /// Pair base and vector into tangent scalars, coordinate by coordinate.
    pub fn to_scalars(&self) -> Vec<Tangent<S>> {
        self.base
            .iter()
            .zip(&self.vec)
            .map(|(&b, &v)| Tangent::new(b, v))
            .collect()
    }

    pub fn from_scalars(s: &[Tangent<S>]) -> Self {
        TangentVector::new(
            s.iter().map(|t| t.val).collect(),
            s.iter().map(|t| t.dot).collect(),
        )
    }

    pub fn value_parts(&self) -> TangentVector<f64> {
        TangentVector::new(linalg::values(&self.base), linalg::values(&self.vec))
    }
}

impl TangentVector<f64> {
    pub fn from_f64(base: &[f64], vec: &[f64]) -> Self {
        TangentVector::new(base.to_vec(), vec.to_vec())
    }
}

/// Element of TTM in a chart: the quadruple `(x, xi; eta, zeta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TTVector<S> {
    pub x: Vec<S>,
    pub xi: Vec<S>,
    pub eta: Vec<S>,
    pub zeta: Vec<S>,
}

impl<S: Scalar> TTVector<S> {
    pub fn new(x: Vec<S>, xi: Vec<S>, eta: Vec<S>, zeta: Vec<S>) -> Self {
        debug_assert!(x.len() == xi.len() && x.len() == eta.len() && x.len() == zeta.len());
        TTVector { x, xi, eta, zeta }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Lift plain real data to the scalar type `S`.
    pub fn lift(x: &[f64], xi: &[f64], eta: &[f64], zeta: &[f64]) -> Self {
        TTVector::new(
            linalg::from_f64s(x),
            linalg::from_f64s(xi),
            linalg::from_f64s(eta),
            linalg::from_f64s(zeta),
        )
    }

    /// All 4m entries, value lane only. Used for magnitude estimates in
    /// tolerance scaling.
    pub fn flat_values(&self) -> Vec<f64> {
        let mut out = linalg::values(&self.x);
        out.extend(linalg::values(&self.xi));
        out.extend(linalg::values(&self.eta));
        out.extend(linalg::values(&self.zeta));
        out
    }

    pub fn value_parts(&self) -> TTVector<f64> {
        TTVector::new(
            linalg::values(&self.x),
            linalg::values(&self.xi),
            linalg::values(&self.eta),
            linalg::values(&self.zeta),
        )
    }

    /// View as a TM element over tangent scalars: the outer level carries the
    /// velocity blocks `(eta, zeta)`.
    pub fn to_nested(&self) -> TangentVector<Tangent<S>> {
        TangentVector::new(
            self.x
                .iter()
                .zip(&self.eta)
                .map(|(&a, &b)| Tangent::new(a, b))
                .collect(),
            self.xi
                .iter()
                .zip(&self.zeta)
                .map(|(&a, &b)| Tangent::new(a, b))
                .collect(),
        )
    }

    pub fn from_nested(tv: &TangentVector<Tangent<S>>) -> Self {
        TTVector::new(
            tv.base.iter().map(|t| t.val).collect(),
            tv.vec.iter().map(|t| t.val).collect(),
            tv.base.iter().map(|t| t.dot).collect(),
            tv.vec.iter().map(|t| t.dot).collect(),
        )
    }
}

impl TTVector<f64> {
    pub fn from_f64(x: &[f64], xi: &[f64], eta: &[f64], zeta: &[f64]) -> Self {
        TTVector::new(x.to_vec(), xi.to_vec(), eta.to_vec(), zeta.to_vec())
    }
}

/// Element of TTTM: the shape of [`TTVector`] one level up, four 2m-blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct TTTVector<S> {
    pub x: Vec<S>,
    pub xi: Vec<S>,
    pub eta: Vec<S>,
    pub zeta: Vec<S>,
}

impl<S: Scalar> TTTVector<S> {
    pub fn new(x: Vec<S>, xi: Vec<S>, eta: Vec<S>, zeta: Vec<S>) -> Self {
        debug_assert!(x.len() == xi.len() && x.len() == eta.len() && x.len() == zeta.len());
        TTTVector { x, xi, eta, zeta }
    }

    /// Chart dimension m (blocks have length 2m).
    pub fn dim(&self) -> usize {
        self.x.len() / 2
    }

    /// Base point in TTM: the first two blocks.
    pub fn base_tt(&self) -> TTVector<S> {
        let m = self.dim();
        TTVector::new(
            self.x[..m].to_vec(),
            self.x[m..].to_vec(),
            self.xi[..m].to_vec(),
            self.xi[m..].to_vec(),
        )
    }

    /// Velocity in TTM-chart coordinates: the last two blocks, flattened in
    /// `(x, xi, eta, zeta)` order.
    pub fn fiber_flat(&self) -> Vec<f64> {
        let mut out = linalg::values(&self.eta);
        out.extend(linalg::values(&self.zeta));
        out
    }

    /// View as a TTM element over tangent scalars (outer level = velocity).
    pub fn to_nested(&self) -> TTVector<Tangent<S>> {
        let m = self.dim();
        let pair = |a: &[S], b: &[S], lo: usize| -> Vec<Tangent<S>> {
            (lo..lo + m).map(|j| Tangent::new(a[j], b[j])).collect()
        };
        TTVector::new(
            pair(&self.x, &self.eta, 0),
            pair(&self.x, &self.eta, m),
            pair(&self.xi, &self.zeta, 0),
            pair(&self.xi, &self.zeta, m),
        )
    }

    pub fn from_nested(tt: &TTVector<Tangent<S>>) -> Self {
        let vals = |a: &[Tangent<S>], b: &[Tangent<S>]| -> Vec<S> {
            a.iter().map(|t| t.val).chain(b.iter().map(|t| t.val)).collect()
        };
        let dots = |a: &[Tangent<S>], b: &[Tangent<S>]| -> Vec<S> {
            a.iter().map(|t| t.dot).chain(b.iter().map(|t| t.dot)).collect()
        };
        TTTVector::new(
            vals(&tt.x, &tt.xi),
            vals(&tt.eta, &tt.zeta),
            dots(&tt.x, &tt.xi),
            dots(&tt.eta, &tt.zeta),
        )
    }
}

/// Canonical flip on TTM: `(x, xi; eta, zeta) -> (x, eta; xi, zeta)`.
/// A pure block permutation, hence an exact involution.
pub fn flip<S: Scalar>(t: &TTVector<S>) -> TTVector<S> {
    TTVector::new(t.x.clone(), t.eta.clone(), t.xi.clone(), t.zeta.clone())
}

/// Canonical flip on TTTM (the flip of TT applied with model TM): swaps the
/// second and third 2m-blocks.
pub fn flip_level2<S: Scalar>(t: &TTTVector<S>) -> TTTVector<S> {
    TTTVector::new(t.x.clone(), t.eta.clone(), t.xi.clone(), t.zeta.clone())
}

/// Canonical projection of TTM: `(x, xi)`.
pub fn pi_tm<S: Scalar>(t: &TTVector<S>) -> TangentVector<S> {
    TangentVector::new(t.x.clone(), t.xi.clone())
}

/// Tangent of the base projection: `(x, eta)`.
pub fn t_pi_m<S: Scalar>(t: &TTVector<S>) -> TangentVector<S> {
    TangentVector::new(t.x.clone(), t.eta.clone())
}

/// Vertical lift `(y, v) -> (y, 0; 0, v)`: the velocity of fiber scaling.
pub fn vertical_lift<S: Scalar>(v: &TangentVector<S>) -> TTVector<S> {
    let m = v.dim();
    TTVector::new(
        v.base.clone(),
        linalg::zeros(m),
        linalg::zeros(m),
        v.vec.clone(),
    )
}

/// Big vertical lift: the velocity at t = 0 of `t -> u + t v` in the fiber
/// over the common base point, i.e. `(y, u; 0, v)`.
pub fn vertical_lift_big<S: Scalar>(
    u: &TangentVector<S>,
    v: &TangentVector<S>,
) -> Result<TTVector<S>> {
    check_bases_match(&u.base, &v.base)?;
    let m = u.dim();
    Ok(TTVector::new(
        u.base.clone(),
        u.vec.clone(),
        linalg::zeros(m),
        v.vec.clone(),
    ))
}

/// Vertical lift of a TTM element for the canonical bundle structure:
/// the velocity of scaling the `(eta, zeta)` fiber.
pub fn vertical_lift_tt<S: Scalar>(t: &TTVector<S>) -> TTTVector<S> {
    let m = t.dim();
    let mut x = t.x.clone();
    x.extend_from_slice(&t.xi);
    let mut zeta = t.eta.clone();
    zeta.extend_from_slice(&t.zeta);
    TTTVector::new(x, linalg::zeros(2 * m), linalg::zeros(2 * m), zeta)
}

/// Inverse of the vertical lift on vertical vectors: requires `eta ~ 0` and
/// returns `(x, zeta)`. A failed check signals that upstream maps were
/// composed against the wrong bundle structure.
pub fn vertical_projection<S: Scalar>(t: &TTVector<S>, tol: f64) -> Result<TangentVector<S>> {
    let defect = linalg::norm(&linalg::values(&t.eta));
    let scale = 1.0 + linalg::norm(&t.flat_values());
    if defect > tol * scale {
        return Err(Error::NotVertical {
            defect,
            tol: tol * scale,
        });
    }
    Ok(TangentVector::new(t.x.clone(), t.zeta.clone()))
}

fn check_bases_match<S: Scalar>(a: &[S], b: &[S]) -> Result<()> {
    let av = linalg::values(a);
    let bv = linalg::values(b);
    let defect = linalg::max_abs_diff(&av, &bv);
    let tol = BASE_MATCH_TOL * (1.0 + linalg::norm(&av).max(linalg::norm(&bv)));
    if defect > tol {
        return Err(Error::BaseMismatch { defect, tol });
    }
    Ok(())
}

/// Fiber addition of the canonical structure on TTM: bases `(x, xi)` must
/// agree, the `(eta, zeta)` blocks add.
pub fn add_over_e<S: Scalar>(a: &TTVector<S>, b: &TTVector<S>) -> Result<TTVector<S>> {
    check_bases_match(&a.x, &b.x)?;
    check_bases_match(&a.xi, &b.xi)?;
    Ok(TTVector::new(
        a.x.clone(),
        a.xi.clone(),
        linalg::add(&a.eta, &b.eta),
        linalg::add(&a.zeta, &b.zeta),
    ))
}

pub fn sub_over_e<S: Scalar>(a: &TTVector<S>, b: &TTVector<S>) -> Result<TTVector<S>> {
    check_bases_match(&a.x, &b.x)?;
    check_bases_match(&a.xi, &b.xi)?;
    Ok(TTVector::new(
        a.x.clone(),
        a.xi.clone(),
        linalg::sub(&a.eta, &b.eta),
        linalg::sub(&a.zeta, &b.zeta),
    ))
}

pub fn scale_over_e<S: Scalar>(c: S, t: &TTVector<S>) -> TTVector<S> {
    TTVector::new(
        t.x.clone(),
        t.xi.clone(),
        linalg::scale(c, &t.eta),
        linalg::scale(c, &t.zeta),
    )
}

/// Fiber addition of the derived structure (tangent of fiberwise addition):
/// bases `(x, eta)` must agree, the `(xi, zeta)` blocks add.
pub fn add_over_tm<S: Scalar>(a: &TTVector<S>, b: &TTVector<S>) -> Result<TTVector<S>> {
    check_bases_match(&a.x, &b.x)?;
    check_bases_match(&a.eta, &b.eta)?;
    Ok(TTVector::new(
        a.x.clone(),
        linalg::add(&a.xi, &b.xi),
        a.eta.clone(),
        linalg::add(&a.zeta, &b.zeta),
    ))
}

pub fn sub_over_tm<S: Scalar>(a: &TTVector<S>, b: &TTVector<S>) -> Result<TTVector<S>> {
    check_bases_match(&a.x, &b.x)?;
    check_bases_match(&a.eta, &b.eta)?;
    Ok(TTVector::new(
        a.x.clone(),
        linalg::sub(&a.xi, &b.xi),
        a.eta.clone(),
        linalg::sub(&a.zeta, &b.zeta),
    ))
}

pub fn scale_over_tm<S: Scalar>(c: S, t: &TTVector<S>) -> TTVector<S> {
    TTVector::new(
        t.x.clone(),
        linalg::scale(c, &t.xi),
        t.eta.clone(),
        linalg::scale(c, &t.zeta),
    )
}

/// Maximum componentwise difference of two TTM elements (value lanes).
pub fn tt_distance<S: Scalar>(a: &TTVector<S>, b: &TTVector<S>) -> f64 {
    linalg::max_abs_diff(&a.flat_values(), &b.flat_values())
}
