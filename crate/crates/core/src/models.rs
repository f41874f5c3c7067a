//! Single-chart manifold models: domain predicates, metrics, Christoffel
//! maps and the builders that assemble them.
//!
//! Sign convention: the Christoffel map here parametrizes the horizontal
//! bundle, so it is the *negative* of the traditional symbol and the
//! geodesic equation reads `c'' = Gamma_c(c', c')` with no minus sign. The
//! Levi-Civita builder bakes the minus into its formula, so metric models
//! follow the classical geodesics.

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::maps::{Polynomial, Rational};
use crate::scalar::{Scalar, Tangent};
use crate::{Error, Result};

/// Chart domain predicate.
#[derive(Debug, Clone)]
pub enum Domain {
    All,
    /// Open ball |x| < radius around the chart origin.
    Ball { radius: f64 },
    /// Second coordinate strictly positive (dimension 2).
    UpperHalfPlane,
}

impl Domain {
    pub fn contains(&self, y: &[f64]) -> bool {
        if !y.iter().all(|c| c.is_finite()) {
            return false;
        }
        match self {
            Domain::All => true,
            Domain::Ball { radius } => linalg::norm(y) < *radius,
            Domain::UpperHalfPlane => y[1] > 0.0,
        }
    }
}

/// Riemannian metric on the chart, evaluable over nested scalars so that its
/// derivatives come from tangent-number evaluation.
#[derive(Debug, Clone)]
pub enum Metric {
    Euclidean,
    /// Round sphere of the given radius in its stereographic chart:
    /// `g_ij = 4 R^4 / (R^2 + |x|^2)^2 * delta_ij`.
    Stereographic { radius: f64 },
    /// Hyperbolic upper half-plane, `g = diag(1, 1) / y^2`.
    HalfPlane,
    /// Entrywise rational functions of the chart point.
    Rational(RationalMetric),
}

/// Symmetric matrix of rational entries; only the lower triangle is
/// consulted, mirrored to keep the matrix exactly symmetric.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RationalMetric {
    pub entries: Vec<Vec<Rational>>,
}

impl Metric {
    pub fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<Vec<S>>> {
        let m = y.len();
        match self {
            Metric::Euclidean => {
                let mut g = vec![vec![S::zero(); m]; m];
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = S::one();
                }
                Ok(g)
            }
            Metric::Stereographic { radius } => {
                let r2 = S::constant(radius * radius);
                let norm2 = linalg::dot(y, y);
                let den = r2 + norm2;
                let factor = (S::constant(4.0) * r2 * r2).checked_div(den * den)?;
                let mut g = vec![vec![S::zero(); m]; m];
                for (i, row) in g.iter_mut().enumerate() {
                    row[i] = factor;
                }
                Ok(g)
            }
            Metric::HalfPlane => {
                let inv = S::one().checked_div(y[1] * y[1])?;
                Ok(vec![vec![inv, S::zero()], vec![S::zero(), inv]])
            }
            Metric::Rational(rm) => {
                let mut g = vec![vec![S::zero(); m]; m];
                for i in 0..m {
                    for j in 0..=i {
                        let e = rm.entries[i][j].eval(y)?;
                        g[i][j] = e;
                        g[j][i] = e;
                    }
                }
                Ok(g)
            }
        }
    }

    /// Inner product of two chart vectors at `y`.
    pub fn inner(&self, y: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let g = self.eval(y)?;
        let mut acc = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, gij) in row.iter().enumerate() {
                acc += gij * u[i] * v[j];
            }
        }
        Ok(acc)
    }

    pub fn norm(&self, y: &[f64], v: &[f64]) -> Result<f64> {
        Ok(self.inner(y, v, v)?.sqrt())
    }
}

/// Christoffel symbols `Gamma^i_{jk}(y)` given as polynomial entries;
/// `gamma(y, v, xi)^i = sum_jk Gamma^i_{jk}(y) v^j xi^k`.
#[derive(Debug, Clone)]
pub struct PolyGamma {
    pub coeffs: Vec<Vec<Vec<Polynomial>>>,
}

#[derive(Debug, Clone)]
enum GammaKind {
    Zero,
    Poly(PolyGamma),
    LeviCivita(Metric),
}

/// The point-dependent bilinear map `(v, xi) -> Gamma_y(v, xi)` of a linear
/// connection, evaluable over nested scalars to depth 3.
#[derive(Debug, Clone)]
pub struct ChristoffelMap {
    kind: GammaKind,
}

impl ChristoffelMap {
    pub fn zero() -> Self {
        ChristoffelMap {
            kind: GammaKind::Zero,
        }
    }

    pub fn polynomial(coeffs: PolyGamma) -> Self {
        ChristoffelMap {
            kind: GammaKind::Poly(coeffs),
        }
    }

    /// Torsion-free metric connection:
    /// `Gamma_y(v, xi)^i = -1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk) v^j xi^k`,
    /// with the metric derivatives obtained by evaluating the metric over one
    /// extra tangent level and the inverse applied by a direct solve.
    pub fn levi_civita(metric: Metric) -> Self {
        ChristoffelMap {
            kind: GammaKind::LeviCivita(metric),
        }
    }

    /// The metric this connection was built from, if any.
    pub fn metric(&self) -> Option<&Metric> {
        match &self.kind {
            GammaKind::LeviCivita(g) => Some(g),
            _ => None,
        }
    }

    pub fn eval<S: Scalar>(&self, y: &[S], v: &[S], xi: &[S]) -> Result<Vec<S>> {
        let m = y.len();
        if v.len() != m || xi.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: v.len().max(xi.len()),
            });
        }
        match &self.kind {
            GammaKind::Zero => Ok(linalg::zeros(m)),
            GammaKind::Poly(pg) => {
                let mut out = linalg::zeros::<S>(m);
                for i in 0..m {
                    let mut acc = S::zero();
                    for j in 0..m {
                        for k in 0..m {
                            acc = acc + pg.coeffs[i][j][k].eval(y) * v[j] * xi[k];
                        }
                    }
                    out[i] = acc;
                }
                Ok(out)
            }
            GammaKind::LeviCivita(metric) => levi_civita_eval(metric, y, v, xi),
        }
    }
}

fn levi_civita_eval<S: Scalar>(metric: &Metric, y: &[S], v: &[S], xi: &[S]) -> Result<Vec<S>> {
    let m = y.len();

    // dg[l][j][k] = d_l g_jk, from m tangent-number evaluations of the metric.
    let mut g = Vec::new();
    let mut dg = Vec::with_capacity(m);
    for l in 0..m {
        let seeds: Vec<Tangent<S>> = (0..m)
            .map(|i| Tangent::new(y[i], if i == l { S::one() } else { S::zero() }))
            .collect();
        let gt = metric.eval(&seeds)?;
        if l == 0 {
            g = gt
                .iter()
                .map(|row| row.iter().map(|e| e.val).collect::<Vec<S>>())
                .collect();
        }
        dg.push(
            gt.iter()
                .map(|row| row.iter().map(|e| e.dot).collect::<Vec<S>>())
                .collect::<Vec<Vec<S>>>(),
        );
    }

    // b_l = -1/2 (d_j g_lk + d_k g_lj - d_l g_jk) v^j xi^k
    let half = S::constant(-0.5);
    let mut b = linalg::zeros::<S>(m);
    for l in 0..m {
        let mut acc = S::zero();
        for j in 0..m {
            for k in 0..m {
                let sym = dg[j][l][k] + dg[k][l][j] - dg[l][j][k];
                acc = acc + sym * v[j] * xi[k];
            }
        }
        b[l] = half * acc;
    }

    linalg::solve(g, b)
}

/// A chart model: dimension, domain predicate and connection.
#[derive(Debug, Clone)]
pub struct ManifoldModel {
    pub name: String,
    pub dim: usize,
    pub domain: Domain,
    pub christoffel: ChristoffelMap,
}

impl ManifoldModel {
    pub fn check_point(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        if !self.domain.contains(y) {
            return Err(Error::OutsideDomain {
                model: self.name.clone(),
            });
        }
        Ok(())
    }

    pub fn metric(&self) -> Option<&Metric> {
        self.christoffel.metric()
    }
}

/// Serializable description of a model, the JSON configuration format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub dim: usize,
    #[serde(default)]
    pub params: ModelParams,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Euclidean,
    Sphere,
    HalfPlane,
    TorsionDemo,
    CustomMetric,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct ModelParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pole_guard: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<RationalMetric>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, dim: usize) -> Self {
        ModelSpec {
            kind,
            dim,
            params: ModelParams::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidSpec {
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

fn invalid(reason: impl Into<String>) -> Error {
    Error::InvalidSpec {
        reason: reason.into(),
    }
}

/// Build a model from its spec, validating parameters and (for metric
/// models) positive-definiteness at sample points.
pub fn build(spec: &ModelSpec) -> Result<ManifoldModel> {
    if spec.dim == 0 || spec.dim > 4 {
        return Err(invalid(format!(
            "dimension must be in 1..=4, got {}",
            spec.dim
        )));
    }
    match spec.kind {
        ModelKind::Euclidean => Ok(ManifoldModel {
            name: format!("euclidean-{}d", spec.dim),
            dim: spec.dim,
            domain: Domain::All,
            christoffel: ChristoffelMap::zero(),
        }),
        ModelKind::Sphere => {
            let radius = spec.params.radius.unwrap_or(1.0);
            if !(radius > 0.0) {
                return Err(invalid("sphere radius must be positive"));
            }
            let guard = spec.params.pole_guard.unwrap_or(10.0 * radius);
            if !(guard > 0.0) {
                return Err(invalid("pole guard must be positive"));
            }
            Ok(ManifoldModel {
                name: format!("sphere-r{radius}-{}d", spec.dim),
                dim: spec.dim,
                domain: Domain::Ball { radius: guard },
                christoffel: ChristoffelMap::levi_civita(Metric::Stereographic { radius }),
            })
        }
        ModelKind::HalfPlane => {
            if spec.dim != 2 {
                return Err(invalid("the half-plane model is two-dimensional"));
            }
            Ok(ManifoldModel {
                name: "half-plane".to_string(),
                dim: 2,
                domain: Domain::UpperHalfPlane,
                christoffel: ChristoffelMap::levi_civita(Metric::HalfPlane),
            })
        }
        ModelKind::TorsionDemo => {
            if spec.dim != 2 {
                return Err(invalid("the torsion demo model is two-dimensional"));
            }
            let beta = spec.params.beta.unwrap_or(1.0);
            // Gamma_y(v, xi) = beta (v1 xi2 - v2 xi1) e2: purely antisymmetric.
            let zero = Polynomial::constant(0.0);
            let b = Polynomial::constant(beta);
            let nb = Polynomial::constant(-beta);
            let coeffs = vec![
                vec![vec![zero.clone(), zero.clone()], vec![zero.clone(), zero.clone()]],
                vec![vec![zero.clone(), b], vec![nb, zero]],
            ];
            Ok(ManifoldModel {
                name: format!("torsion-demo-b{beta}"),
                dim: 2,
                domain: Domain::All,
                christoffel: ChristoffelMap::polynomial(PolyGamma { coeffs }),
            })
        }
        ModelKind::CustomMetric => {
            let rm = spec
                .params
                .metric
                .clone()
                .ok_or_else(|| invalid("custom_metric requires params.metric"))?;
            if rm.entries.len() != spec.dim
                || rm.entries.iter().enumerate().any(|(i, row)| row.len() < i + 1)
            {
                return Err(invalid(
                    "params.metric.entries must be an m x m (lower-triangle filled) array",
                ));
            }
            let metric = Metric::Rational(rm);
            let model = ManifoldModel {
                name: format!("custom-metric-{}d", spec.dim),
                dim: spec.dim,
                domain: Domain::All,
                christoffel: ChristoffelMap::levi_civita(metric),
            };
            check_positive_definite(&model)?;
            Ok(model)
        }
    }
}

/// Sample-point validation that a custom metric is symmetric positive
/// definite (via a Cholesky-style pivot sweep on the value lane).
fn check_positive_definite(model: &ManifoldModel) -> Result<()> {
    let metric = model.metric().expect("metric model");
    let samples: &[f64] = &[0.0, 0.5, -0.5, 1.0, -1.0];
    for &s in samples {
        let y = vec![s; model.dim];
        if !model.domain.contains(&y) {
            continue;
        }
        let g = metric.eval(&y)?;
        let mut a: Vec<Vec<f64>> = g;
        let n = model.dim;
        for k in 0..n {
            let pivot = a[k][k];
            if !(pivot > 0.0) {
                return Err(invalid(format!(
                    "metric is not positive definite at sample point {y:?}"
                )));
            }
            for i in (k + 1)..n {
                let f = a[i][k] / pivot;
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
    }
    Ok(())
}

/// The model set exercised by the verification suites.
pub fn standard_models() -> Vec<ManifoldModel> {
    let mut sphere = ModelSpec::new(ModelKind::Sphere, 2);
    sphere.params.radius = Some(1.0);
    let mut torsion = ModelSpec::new(ModelKind::TorsionDemo, 2);
    torsion.params.beta = Some(0.5);
    vec![
        build(&ModelSpec::new(ModelKind::Euclidean, 2)).expect("euclidean-2"),
        build(&ModelSpec::new(ModelKind::Euclidean, 3)).expect("euclidean-3"),
        build(&sphere).expect("sphere"),
        build(&ModelSpec::new(ModelKind::HalfPlane, 2)).expect("half-plane"),
        build(&torsion).expect("torsion-demo"),
    ]
}

/// The curved trio used by the curvature and Jacobi cross-checks.
pub fn curved_models() -> Vec<ManifoldModel> {
    standard_models()
        .into_iter()
        .filter(|m| matches!(m.name.as_str(), n if n.starts_with("sphere") || n == "half-plane" || n.starts_with("torsion")))
        .collect()
}

/// A point comfortably inside the model's domain, for randomized probes.
/// Ball domains are guard regions around a chart center; samples stay near
/// the center so that moderate-length geodesics from them remain inside.
pub fn sample_point(model: &ManifoldModel, rng: &mut crate::rng::SplitMix64) -> Vec<f64> {
    match model.domain {
        Domain::All => rng.vector(model.dim, -1.5, 1.5),
        Domain::Ball { radius } => {
            let half = (0.035 * radius).min(1.0);
            rng.vector(model.dim, -half, half)
        }
        Domain::UpperHalfPlane => {
            vec![rng.uniform(-1.5, 1.5), rng.uniform(0.5, 2.5)]
        }
    }
}
