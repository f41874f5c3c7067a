//! Linear connections on the tangent bundle: connector, horizontal lift,
//! covariant derivatives, curvature by two routes, torsion and the Lie
//! bracket through the canonical flip.
//!
//! Everything that needs a derivative of the Christoffel map or of a field
//! obtains it by evaluating the same generic code over scalars one level
//! deeper. The curvature operator pushes a section's graph through two
//! tangent levels and applies the connector twice, once conjugated by the
//! level-two flip; its agreement with the nested-covariant-derivative
//! commutator is one of the central checks of the crate.

use crate::bundle::{
    flip, flip_level2, sub_over_e, vertical_projection, TTVector, TangentVector,
};
use crate::linalg;
use crate::maps::{field_prolongation, section_double_prolongation, ConstMap, SmoothMap};
use crate::models::{ChristoffelMap, ManifoldModel, Metric};
use crate::scalar::{Scalar, Tangent};
use crate::{Result, VERTICAL_TOL};

/// Connector of the model's connection: `(x, xi; eta, zeta) -> (x, zeta - Gamma_x(xi, eta))`.
///
/// Fiber-linear for both bundle structures and a left inverse of the
/// vertical lift.
pub fn connector<S: Scalar>(model: &ManifoldModel, t: &TTVector<S>) -> Result<TangentVector<S>> {
    model.check_point(&linalg::values(&t.x))?;
    let gamma = model.christoffel.eval(&t.x, &t.xi, &t.eta)?;
    Ok(TangentVector::new(
        t.x.clone(),
        linalg::sub(&t.zeta, &gamma),
    ))
}

/// Horizontal lift: `C((y, xi), (y, v)) = (y, v; xi, Gamma_y(v, xi))`,
/// the section of `(Tp, pi)` whose image the connector annihilates.
pub fn horizontal_lift<S: Scalar>(
    model: &ManifoldModel,
    xi: &[S],
    at: &TangentVector<S>,
) -> Result<TTVector<S>> {
    model.check_point(&linalg::values(&at.base))?;
    let gamma = model.christoffel.eval(&at.base, &at.vec, xi)?;
    Ok(TTVector::new(
        at.base.clone(),
        at.vec.clone(),
        xi.to_vec(),
        gamma,
    ))
}

/// Covariant derivative of a section along a direction field, as the
/// connector applied to the tangent prolongation of the section:
/// in coordinates `Ds(at) X(at) - Gamma_at(s(at), X(at))`.
pub fn covariant_derivative_field<S, X, F>(
    model: &ManifoldModel,
    direction: &X,
    section: &F,
    at: &[S],
) -> Result<Vec<S>>
where
    S: Scalar,
    X: SmoothMap + ?Sized,
    F: SmoothMap + ?Sized,
{
    let dir = direction.eval(at)?;
    let ts = field_prolongation(
        section,
        &TangentVector::new(at.to_vec(), dir),
    )?;
    Ok(connector(model, &ts)?.vec)
}

/// The field `y -> (covariant derivative of `section` along `direction`)(y)`,
/// itself a smooth map so covariant derivatives can nest.
pub struct CovariantDerivativeField<'a, X, F> {
    pub model: &'a ManifoldModel,
    pub direction: &'a X,
    pub section: &'a F,
}

impl<X: SmoothMap, F: SmoothMap> SmoothMap for CovariantDerivativeField<'_, X, F> {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        covariant_derivative_field(self.model, self.direction, self.section, y)
    }
}

/// Covariant derivative of a field `J` along a curve with velocity `c_dot`,
/// given the chart derivative `j_dot`: the connector applied to
/// `(x, J; c_dot, J_dot)`, i.e. `J_dot - Gamma_x(J, c_dot)`.
pub fn covariant_derivative_along_curve<S: Scalar>(
    model: &ManifoldModel,
    x: &[S],
    c_dot: &[S],
    j: &[S],
    j_dot: &[S],
) -> Result<Vec<S>> {
    let t = TTVector::new(x.to_vec(), j.to_vec(), c_dot.to_vec(), j_dot.to_vec());
    Ok(connector(model, &t)?.vec)
}

/// Jacobian-form Lie bracket `[X, Y] = DY X - DX Y`, computed by tangent
/// evaluation of both fields. Serves as the independent oracle for
/// [`lie_bracket_via_flip`] and supplies the bracket inside the curvature
/// commutator.
pub fn ad_bracket<S, X, Y>(x_field: &X, y_field: &Y, at: &[S]) -> Result<Vec<S>>
where
    S: Scalar,
    X: SmoothMap + ?Sized,
    Y: SmoothMap + ?Sized,
{
    let xv = x_field.eval(at)?;
    let yv = y_field.eval(at)?;
    let ty = field_prolongation(y_field, &TangentVector::new(at.to_vec(), xv))?;
    let tx = field_prolongation(x_field, &TangentVector::new(at.to_vec(), yv))?;
    Ok(linalg::sub(&ty.zeta, &tx.zeta))
}

/// The bracket of two fields as a field.
pub struct BracketField<'a, X, Y> {
    pub x: &'a X,
    pub y: &'a Y,
}

impl<X: SmoothMap, Y: SmoothMap> SmoothMap for BracketField<'_, X, Y> {
    fn eval<S: Scalar>(&self, at: &[S]) -> Result<Vec<S>> {
        ad_bracket(self.x, self.y, at)
    }
}

/// Lie bracket through the canonical flip: prolong `Y` along `X`, flip the
/// prolongation of `X` along `Y`, subtract in the canonical bundle
/// structure and project the (vertical) difference.
pub fn lie_bracket_via_flip<X, Y>(x_field: &X, y_field: &Y, at: &[f64]) -> Result<Vec<f64>>
where
    X: SmoothMap + ?Sized,
    Y: SmoothMap + ?Sized,
{
    let xv = x_field.eval(at)?;
    let yv = y_field.eval(at)?;
    let ty_x = field_prolongation(y_field, &TangentVector::new(at.to_vec(), xv))?;
    let tx_y = field_prolongation(x_field, &TangentVector::new(at.to_vec(), yv))?;
    let diff = sub_over_e(&ty_x, &flip(&tx_y))?;
    Ok(vertical_projection(&diff, VERTICAL_TOL)?.vec)
}

/// Curvature by the operator route: `R(u, v) w` from
/// `(K . TK . kappa - K . TK)` applied to the double prolongation of the
/// constant section `w` along the constant fields `u`, `v`. Tensoriality
/// makes the constant extension immaterial; the Christoffel derivative
/// survives through the tangent evaluation of the connector.
pub fn curvature_operator(
    model: &ManifoldModel,
    x: &[f64],
    u: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<Vec<f64>> {
    let x_field = ConstMap::new(u);
    let y_field = ConstMap::new(v);
    let section = ConstMap::new(w);
    let flipped = curvature_branch(model, &x_field, &y_field, &section, x, true)?;
    let straight = curvature_branch(model, &x_field, &y_field, &section, x, false)?;
    Ok(linalg::sub(&flipped, &straight))
}

/// One branch of the operator route: `K . TK [. kappa] . TTs . TX . Y` at `x`.
fn curvature_branch<X, Y, F>(
    model: &ManifoldModel,
    x_field: &X,
    y_field: &Y,
    section: &F,
    at: &[f64],
    apply_flip: bool,
) -> Result<Vec<f64>>
where
    X: SmoothMap + ?Sized,
    Y: SmoothMap + ?Sized,
    F: SmoothMap + ?Sized,
{
    let yv = y_field.eval(at)?;
    let tx = field_prolongation(x_field, &TangentVector::new(at.to_vec(), yv))?;
    let tts = section_double_prolongation(section, &tx)?;
    let t = if apply_flip { flip_level2(&tts) } else { tts };
    // TK: the connector evaluated over one extra tangent level.
    let tk: TangentVector<Tangent<f64>> = connector(model, &t.to_nested())?;
    let k = connector(model, &TTVector::from_nested(&tk))?;
    Ok(k.vec)
}

/// Curvature by its defining commutator,
/// `(nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]) s`, with the nesting
/// realized by covariant-derivative fields and the bracket by tangent
/// evaluation.
pub fn curvature_commutator_oracle<X, Y, F>(
    model: &ManifoldModel,
    x_field: &X,
    y_field: &Y,
    section: &F,
    at: &[f64],
) -> Result<Vec<f64>>
where
    X: SmoothMap,
    Y: SmoothMap,
    F: SmoothMap,
{
    let nabla_y_s = CovariantDerivativeField {
        model,
        direction: y_field,
        section,
    };
    let first = covariant_derivative_field(model, x_field, &nabla_y_s, at)?;

    let nabla_x_s = CovariantDerivativeField {
        model,
        direction: x_field,
        section,
    };
    let second = covariant_derivative_field(model, y_field, &nabla_x_s, at)?;

    let bracket = BracketField {
        x: x_field,
        y: y_field,
    };
    let third = covariant_derivative_field(model, &bracket, section, at)?;

    Ok(linalg::sub(&linalg::sub(&first, &second), &third))
}

/// Torsion in coordinates: `Gamma_x(u, v) - Gamma_x(v, u)`.
pub fn torsion<S: Scalar>(
    model: &ManifoldModel,
    x: &[S],
    u: &[S],
    v: &[S],
) -> Result<Vec<S>> {
    model.check_point(&linalg::values(x))?;
    let guv = model.christoffel.eval(x, u, v)?;
    let gvu = model.christoffel.eval(x, v, u)?;
    Ok(linalg::sub(&guv, &gvu))
}

/// Torsion by the operator route, `(K . kappa - K)` applied to the
/// prolongation of `X` along `Y`; field derivatives cancel, leaving the
/// antisymmetrized Christoffel map at the point.
pub fn torsion_operator_route<X, Y>(
    model: &ManifoldModel,
    x_field: &X,
    y_field: &Y,
    at: &[f64],
) -> Result<Vec<f64>>
where
    X: SmoothMap + ?Sized,
    Y: SmoothMap + ?Sized,
{
    let yv = y_field.eval(at)?;
    let tx = field_prolongation(x_field, &TangentVector::new(at.to_vec(), yv))?;
    let k_flip = connector(model, &flip(&tx))?;
    let k = connector(model, &tx)?;
    Ok(linalg::sub(&k_flip.vec, &k.vec))
}

/// Torsion-free metric connection from a metric; see
/// [`ChristoffelMap::levi_civita`] for the formula and sign convention.
pub fn levi_civita_from_metric(metric: Metric) -> ChristoffelMap {
    ChristoffelMap::levi_civita(metric)
}
