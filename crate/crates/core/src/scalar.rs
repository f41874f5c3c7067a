//! Nestable forward-mode scalars.
//!
//! A [`Tangent<S>`] carries a value and a directional derivative, each of the
//! underlying scalar type `S`. Nesting (`Tangent<Tangent<f64>>`, ...) makes
//! evaluation of a chart map over depth-k scalars compute its k-fold tangent
//! prolongation. Everything downstream (connectors applied through one more
//! tangent level, double prolongations of sections, the Jacobi flow field)
//! is obtained by instantiating generic code at a deeper scalar type, never
//! by hand-coded derivative formulas, symbolic work or finite differences.
//!
//! Depth is a property of the type, fixed at compile time; the deepest type
//! the library instantiates is [`D3`] (three levels, enough for TTTM plus a
//! metric derivative inside a connector). Arithmetic is plain IEEE f64 at the
//! bottom with no reassociation, so identical inputs give bit-identical
//! outputs on one platform, and the value lanes of a nested evaluation
//! perform exactly the same operations as an undifferentiated one.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::{Error, Result};

/// Scalar types usable in chart maps: `f64` and tangent towers over it.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Nesting depth: 0 for `f64`, one more per tangent level.
    const DEPTH: usize;

    /// Embed a constant: value tower equal to `c`, every derivative slot zero.
    fn constant(c: f64) -> Self;

    /// The real value at the bottom of the tower.
    fn value(self) -> f64;

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn one() -> Self {
        Self::constant(1.0)
    }

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    /// IEEE semantics: negative values produce NaN. Use [`Scalar::checked_sqrt`]
    /// where the domain is not known in advance.
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;

    /// Division that reports a zero denominator (zero at the bottom of the
    /// value tower) instead of producing IEEE infinities. The error carries
    /// the nesting depth at which the operation was evaluated.
    fn checked_div(self, rhs: Self) -> Result<Self> {
        if rhs.value() == 0.0 {
            Err(Error::DivisionByZero { depth: Self::DEPTH })
        } else {
            Ok(self / rhs)
        }
    }

    /// Square root requiring a strictly positive value (the derivative slots
    /// need 1/sqrt, so zero is rejected too).
    fn checked_sqrt(self) -> Result<Self> {
        if self.value() <= 0.0 {
            Err(Error::SqrtDomain {
                depth: Self::DEPTH,
                value: self.value(),
            })
        } else {
            Ok(self.sqrt())
        }
    }
}

impl Scalar for f64 {
    const DEPTH: usize = 0;

    #[inline]
    fn constant(c: f64) -> Self {
        c
    }

    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }

    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }

    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// Value-and-derivative pair over a scalar `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tangent<S> {
    pub val: S,
    pub dot: S,
}

impl<S: Scalar> Tangent<S> {
    #[inline]
    pub fn new(val: S, dot: S) -> Self {
        Tangent { val, dot }
    }

    /// A variable seeded with derivative `dot` in the direction being traced.
    #[inline]
    pub fn seed(val: S, dot: S) -> Self {
        Tangent { val, dot }
    }
}

/// Embed `c` at the depth chosen by the caller's type, with all derivative
/// slots zero. Depth lives in the type system (see [`D0`]–[`D3`]), so an
/// out-of-range depth is unrepresentable rather than a runtime error.
pub fn lift_constant<S: Scalar>(c: f64) -> S {
    S::constant(c)
}

/// Depth-1 seed over plain reals: value `c`, derivative `d`.
pub fn seed(c: f64, d: f64) -> Tangent<f64> {
    Tangent::new(c, d)
}

pub type D0 = f64;
pub type D1 = Tangent<f64>;
pub type D2 = Tangent<Tangent<f64>>;
pub type D3 = Tangent<Tangent<Tangent<f64>>>;

/// Deepest nesting the library instantiates.
pub const MAX_DEPTH: usize = 3;

impl<S: Scalar> Add for Tangent<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Tangent::new(self.val + rhs.val, self.dot + rhs.dot)
    }
}

impl<S: Scalar> Sub for Tangent<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Tangent::new(self.val - rhs.val, self.dot - rhs.dot)
    }
}

impl<S: Scalar> Mul for Tangent<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        // Leibniz rule, always evaluated in this operand order.
        Tangent::new(
            self.val * rhs.val,
            self.dot * rhs.val + self.val * rhs.dot,
        )
    }
}

impl<S: Scalar> Div for Tangent<S> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        Tangent::new(
            self.val / rhs.val,
            (self.dot * rhs.val - self.val * rhs.dot) / (rhs.val * rhs.val),
        )
    }
}

impl<S: Scalar> Neg for Tangent<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Tangent::new(-self.val, -self.dot)
    }
}

impl<S: Scalar> Scalar for Tangent<S> {
    const DEPTH: usize = S::DEPTH + 1;

    #[inline]
    fn constant(c: f64) -> Self {
        Tangent::new(S::constant(c), S::zero())
    }

    #[inline]
    fn value(self) -> f64 {
        self.val.value()
    }

    #[inline]
    fn sin(self) -> Self {
        Tangent::new(self.val.sin(), self.dot * self.val.cos())
    }

    #[inline]
    fn cos(self) -> Self {
        Tangent::new(self.val.cos(), -(self.dot * self.val.sin()))
    }

    #[inline]
    fn exp(self) -> Self {
        let e = self.val.exp();
        Tangent::new(e, self.dot * e)
    }

    #[inline]
    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        Tangent::new(r, self.dot / (S::constant(2.0) * r))
    }

    #[inline]
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        Tangent::new(
            self.val.powi(n),
            S::constant(f64::from(n)) * self.val.powi(n - 1) * self.dot,
        )
    }
}
