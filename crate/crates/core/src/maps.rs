//! Smooth chart maps and their tangent prolongations.
//!
//! [`SmoothMap`] is the interface every model callback goes through: a map
//! evaluable over any scalar depth. Prolongations never differentiate
//! anything by hand: `tangent_map` evaluates the same map over scalars one
//! level deeper, `double_tangent_map` two levels deeper, and the bundle
//! conversions reassemble the blocks.
//!
//! Polynomials and rationals double as the data-driven expression family for
//! custom metrics and for the randomized test fields.

use serde::{Deserialize, Serialize};

use crate::bundle::{TTTVector, TTVector, TangentVector};
use crate::rng::SplitMix64;
use crate::scalar::{Scalar, Tangent};
use crate::Result;

/// A smooth map between chart spaces, evaluable over nested tangent scalars.
///
/// Implementations must perform the same sequence of floating operations for
/// every scalar type (generic code guarantees this), so value lanes of a
/// nested evaluation reproduce the plain evaluation bit for bit.
pub trait SmoothMap: Sync {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>>;
}

impl<M: SmoothMap + ?Sized> SmoothMap for &M {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        (**self).eval(y)
    }
}

/// Tangent prolongation of `f`: the input velocity rides on a fresh tangent
/// level, so the output pairs `f(base)` with its directional derivative.
pub fn tangent_map<F: SmoothMap + ?Sized, S: Scalar>(
    f: &F,
    at: &TangentVector<S>,
) -> Result<TangentVector<S>> {
    let out = f.eval(&at.to_scalars())?;
    Ok(TangentVector::from_scalars(&out))
}

/// Second prolongation of `f` applied to a TTM element.
pub fn double_tangent_map<F: SmoothMap + ?Sized, S: Scalar>(
    f: &F,
    at: &TTVector<S>,
) -> Result<TTVector<S>> {
    let seeds = at.to_nested().to_scalars();
    let out = f.eval(&seeds)?;
    let nested = TangentVector::from_scalars(&out);
    Ok(TTVector::from_nested(&nested))
}

/// Prolongation of a vector field's graph `y -> (y, X(y))` along a tangent
/// vector: produces the TTM element `(x, X(x); v, DX(x) v)`.
pub fn field_prolongation<F: SmoothMap + ?Sized, S: Scalar>(
    field: &F,
    at: &TangentVector<S>,
) -> Result<TTVector<S>> {
    let out = field.eval(&at.to_scalars())?;
    Ok(TTVector::new(
        at.base.clone(),
        out.iter().map(|t| t.val).collect(),
        at.vec.clone(),
        out.iter().map(|t| t.dot).collect(),
    ))
}

/// Second prolongation of a section's graph applied to a TTM element,
/// producing the TTTM element the curvature operator consumes.
pub fn section_double_prolongation<F: SmoothMap + ?Sized, S: Scalar>(
    section: &F,
    at: &TTVector<S>,
) -> Result<TTTVector<S>> {
    let seeds = at.to_nested().to_scalars();
    let out = section.eval(&seeds)?;
    // Graph map (y, s(y)): the identity part is the seeds themselves. The
    // result is a TT-element over the 2m-dimensional bundle chart, whose
    // quadruple is the TTTM block layout verbatim.
    let graph: Vec<Tangent<Tangent<S>>> = seeds.iter().chain(out.iter()).copied().collect();
    let nested = TangentVector::from_scalars(&graph);
    let tt = TTVector::from_nested(&nested);
    Ok(TTTVector::new(tt.x, tt.xi, tt.eta, tt.zeta))
}

/// Multivariate polynomial, a sum of `coeff * prod(y_i^powers_i)` terms.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Polynomial {
            terms: vec![Term {
                coeff: c,
                powers: Vec::new(),
            }],
        }
    }

    /// The coordinate function `y_i`.
    pub fn coordinate(i: usize, dim: usize) -> Self {
        let mut powers = vec![0u32; dim];
        powers[i] = 1;
        Polynomial {
            terms: vec![Term { coeff: 1.0, powers }],
        }
    }

    pub fn eval<S: Scalar>(&self, y: &[S]) -> S {
        let mut acc = S::zero();
        for term in &self.terms {
            let mut t = S::constant(term.coeff);
            for (i, &p) in term.powers.iter().enumerate() {
                if p > 0 {
                    t = t * y[i].powi(p as i32);
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Random polynomial of total degree <= 2 in `dim` variables with
    /// coefficients in [-1, 1]. Dense in the monomial basis.
    pub fn random_quadratic(rng: &mut SplitMix64, dim: usize) -> Self {
        let mut terms = vec![Term {
            coeff: rng.uniform(-1.0, 1.0),
            powers: vec![0; dim],
        }];
        for i in 0..dim {
            let mut powers = vec![0u32; dim];
            powers[i] = 1;
            terms.push(Term {
                coeff: rng.uniform(-1.0, 1.0),
                powers,
            });
        }
        for i in 0..dim {
            for j in i..dim {
                let mut powers = vec![0u32; dim];
                powers[i] += 1;
                powers[j] += 1;
                terms.push(Term {
                    coeff: rng.uniform(-1.0, 1.0),
                    powers,
                });
            }
        }
        Polynomial { terms }
    }
}

/// Ratio of two polynomials; the denominator defaults to 1.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Rational {
    pub num: Polynomial,
    #[serde(default = "one_polynomial")]
    pub den: Polynomial,
}

fn one_polynomial() -> Polynomial {
    Polynomial::constant(1.0)
}

impl Rational {
    pub fn polynomial(num: Polynomial) -> Self {
        Rational {
            num,
            den: one_polynomial(),
        }
    }

    pub fn eval<S: Scalar>(&self, y: &[S]) -> Result<S> {
        let n = self.num.eval(y);
        let d = self.den.eval(y);
        n.checked_div(d)
    }
}

/// Vector-valued polynomial map: one polynomial per output component.
#[derive(Debug, Clone)]
pub struct PolyMap {
    pub components: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(components: Vec<Polynomial>) -> Self {
        PolyMap { components }
    }

    /// Random field with quadratic components, for the probe suites.
    pub fn random_quadratic(rng: &mut SplitMix64, dim_in: usize, dim_out: usize) -> Self {
        PolyMap::new(
            (0..dim_out)
                .map(|_| Polynomial::random_quadratic(rng, dim_in))
                .collect(),
        )
    }
}

impl SmoothMap for PolyMap {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        Ok(self.components.iter().map(|p| p.eval(y)).collect())
    }
}

/// The constant map `y -> c`.
#[derive(Debug, Clone)]
pub struct ConstMap {
    pub value: Vec<f64>,
}

impl ConstMap {
    pub fn new(value: &[f64]) -> Self {
        ConstMap {
            value: value.to_vec(),
        }
    }
}

impl SmoothMap for ConstMap {
    fn eval<S: Scalar>(&self, _y: &[S]) -> Result<Vec<S>> {
        Ok(self.value.iter().map(|&c| S::constant(c)).collect())
    }
}

/// A field multiplied by a scalar polynomial, `y -> h(y) * f(y)`.
#[derive(Debug, Clone)]
pub struct ScaledMap<F> {
    pub factor: Polynomial,
    pub inner: F,
}

impl<F: SmoothMap> SmoothMap for ScaledMap<F> {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        let h = self.factor.eval(y);
        Ok(self.inner.eval(y)?.into_iter().map(|c| h * c).collect())
    }
}
