//! Named, seeded verification suites.
//!
//! Every operator identity the library claims is packaged here as a check
//! with a fixed probe count and tolerance. Checks draw their inputs from
//! per-probe generators derived from the master seed, so a given seed
//! produces the same report byte for byte, in any execution order and with
//! any thread count. Tolerances can be overridden by check name.
//!
//! Suites are named after the layers they exercise: `double_tangent`
//! (flips, lifts, bundle structures), `connection` (connector, curvature,
//! torsion, bracket), `spray_flow` (spray axioms, geodesics, the Jacobi
//! flow and its oracles).

use std::collections::BTreeMap;

use crate::batch;
use crate::bundle::{
    add_over_e, add_over_tm, flip, pi_tm, t_pi_m, tt_distance, vertical_lift, vertical_lift_big,
    vertical_lift_tt, vertical_projection, TTVector, TangentVector,
};
use crate::connection::{
    ad_bracket, connector, covariant_derivative_field, curvature_commutator_oracle,
    curvature_operator, horizontal_lift, lie_bracket_via_flip, torsion, torsion_operator_route,
};
use crate::flow::{
    classical_jacobi_oracle, covariant_deviation_velocity, geo, geodesic_state_at,
    integrate_geodesic, integrate_jacobi_flow, jacobi_residual, spray, variation_oracle,
    JacobiState,
};
use crate::linalg;
use crate::maps::{double_tangent_map, tangent_map, PolyMap, Polynomial, ScaledMap, SmoothMap};
use crate::models::{curved_models, sample_point, standard_models, ManifoldModel};
use crate::rng::{probe_rng, salt, SplitMix64};
use crate::scalar::Scalar;
use crate::{Error, Result};

/// Configuration of a verification run.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Tolerance overrides keyed by check name.
    pub tol: BTreeMap<String, f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 42,
            tol: BTreeMap::new(),
        }
    }
}

impl VerifyConfig {
    pub fn with_seed(seed: u64) -> Self {
        VerifyConfig {
            seed,
            ..Default::default()
        }
    }
}

/// Result of one named check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub cases: usize,
    pub max_defect: f64,
    pub tol: f64,
    pub passed: bool,
    pub note: String,
}

impl CheckReport {
    fn render(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{status} {:<42} cases={:<6} max={:<12e} tol={:e}",
            self.name, self.cases, self.max_defect, self.tol
        );
        if !self.note.is_empty() {
            line.push(' ');
            line.push_str(&self.note);
        }
        line
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    DoubleTangent,
    Connection,
    SprayFlow,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double_tangent" => Ok(Suite::DoubleTangent),
            "connection" => Ok(Suite::Connection),
            "spray_flow" => Ok(Suite::SprayFlow),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument {
                reason: format!(
                    "unknown suite `{other}` (expected double_tangent, connection, spray_flow or all)"
                ),
            }),
        }
    }
}

type CheckFn = fn(&VerifyConfig) -> Vec<CheckReport>;

fn suite_checks(suite: Suite) -> Vec<CheckFn> {
    let double_tangent: Vec<CheckFn> = vec![
        kernel_finite_difference_agreement,
        kernel_pushforward_linear,
        flip_involution,
        flip_projection_exchange,
        flip_exchanges_additions,
        vertical_projection_inverts_lift,
        flip_naturality,
        mixed_partials_flip,
        vertical_lift_naturality,
    ];
    let connection: Vec<CheckFn> = vec![
        christoffel_bilinear,
        connector_inverts_vertical_lift,
        horizontal_lift_is_section,
        connector_annihilates_horizontal,
        connector_fiber_linear,
        vertical_lift_connector_commute,
        bracket_via_flip_vs_jacobian,
        covariant_derivative_tensorial,
        covariant_derivative_leibniz,
        curvature_two_routes,
        curvature_antisymmetry,
        constant_curvature_closed_form,
        torsion_two_routes,
        torsion_vanishes_levi_civita,
    ];
    let spray_flow: Vec<CheckFn> = vec![
        spray_double_section,
        connector_annihilates_spray,
        spray_quadratic,
        geodesic_homogeneity,
        geodesic_flow_property,
        geodesic_speed_conservation,
        jacobi_three_way,
        jacobi_closed_forms,
        geodesic_subsystem_bit_identical,
        rk4_convergence_order,
        variation_oracle_convergence,
    ];
    match suite {
        Suite::DoubleTangent => double_tangent,
        Suite::Connection => connection,
        Suite::SprayFlow => spray_flow,
        Suite::All => {
            let mut all = double_tangent;
            all.extend(connection);
            all.extend(spray_flow);
            all
        }
    }
}

/// Run a suite; checks execute as an independent batch but report in a
/// fixed order.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Vec<CheckReport> {
    let checks = suite_checks(suite);
    batch::map_batch(checks, |check| check(cfg))
        .into_iter()
        .flatten()
        .collect()
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

pub fn render_report(reports: &[CheckReport], seed: u64) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&r.render());
        out.push('\n');
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    out.push_str(&format!(
        "{} checks, {} passed, {} failed (seed {seed})\n",
        reports.len(),
        passed,
        reports.len() - passed
    ));
    out
}

fn finish(
    cfg: &VerifyConfig,
    name: &'static str,
    cases: usize,
    max_defect: f64,
    default_tol: f64,
    note: String,
) -> Vec<CheckReport> {
    let tol = cfg.tol.get(name).copied().unwrap_or(default_tol);
    vec![CheckReport {
        name,
        cases,
        max_defect,
        tol,
        passed: max_defect <= tol,
        note,
    }]
}

/// Relative defect: componentwise distance scaled by the reference size.
fn rel(defect: f64, scale: f64) -> f64 {
    defect / (1.0 + scale)
}

fn rand_tt(rng: &mut SplitMix64, m: usize, lo: f64, hi: f64) -> TTVector<f64> {
    TTVector::from_f64(
        &rng.vector(m, lo, hi),
        &rng.vector(m, lo, hi),
        &rng.vector(m, lo, hi),
        &rng.vector(m, lo, hi),
    )
}

/// Smooth test map built from the arithmetic kernel: per component
/// `a sin(l1(y)) + b exp(0.3 l2(y)) + quadratic(y)`.
struct KernelMap {
    lin1: Vec<Vec<f64>>,
    lin2: Vec<Vec<f64>>,
    amp1: Vec<f64>,
    amp2: Vec<f64>,
    poly: PolyMap,
}

impl KernelMap {
    fn random(rng: &mut SplitMix64, dim_in: usize, dim_out: usize) -> Self {
        KernelMap {
            lin1: (0..dim_out).map(|_| rng.vector(dim_in, -1.0, 1.0)).collect(),
            lin2: (0..dim_out).map(|_| rng.vector(dim_in, -1.0, 1.0)).collect(),
            amp1: rng.vector(dim_out, -1.0, 1.0),
            amp2: rng.vector(dim_out, -0.5, 0.5),
            poly: PolyMap::random_quadratic(rng, dim_in, dim_out),
        }
    }
}

fn linear_form<S: Scalar>(coeffs: &[f64], y: &[S]) -> S {
    coeffs
        .iter()
        .zip(y)
        .fold(S::zero(), |acc, (&c, &v)| acc + S::constant(c) * v)
}

impl SmoothMap for KernelMap {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        let q = self.poly.eval(y)?;
        Ok((0..self.amp1.len())
            .map(|i| {
                let s = linear_form(&self.lin1[i], y).sin();
                let e = (S::constant(0.3) * linear_form(&self.lin2[i], y)).exp();
                S::constant(self.amp1[i]) * s + S::constant(self.amp2[i]) * e + q[i]
            })
            .collect())
    }
}

/// Fiberwise-linear bundle map `(y, v) -> (base(y), mat(y) v)` as a chart
/// map on the doubled space.
struct BundleHom {
    dim_in: usize,
    base: KernelMap,
    mat: Vec<Vec<Polynomial>>,
}

impl BundleHom {
    fn random(rng: &mut SplitMix64, dim_in: usize, dim_out: usize) -> Self {
        BundleHom {
            dim_in,
            base: KernelMap::random(rng, dim_in, dim_out),
            mat: (0..dim_out)
                .map(|_| {
                    (0..dim_in)
                        .map(|_| Polynomial::random_quadratic(rng, dim_in))
                        .collect()
                })
                .collect(),
        }
    }
}

impl SmoothMap for BundleHom {
    fn eval<S: Scalar>(&self, y: &[S]) -> Result<Vec<S>> {
        let (point, fiber) = y.split_at(self.dim_in);
        let mut out = self.base.eval(point)?;
        for row in &self.mat {
            let mut acc = S::zero();
            for (p, &v) in row.iter().zip(fiber) {
                acc = acc + p.eval(point) * v;
            }
            out.push(acc);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// double_tangent suite
// ---------------------------------------------------------------------------

/// Tangent-number derivatives of kernel-built maps agree with central
/// finite differences at the usual O(h^2) accuracy.
fn kernel_finite_difference_agreement(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "kernel_finite_difference_agreement";
    let seed = cfg.seed ^ salt(name);
    let n = 500;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let m = 1 + (rng.next_u64() % 3) as usize;
        let f = KernelMap::random(&mut rng, m, m);
        let at = rng.vector(m, -1.0, 1.0);
        let dir = rng.vector(m, -1.0, 1.0);

        let seeds: Vec<crate::scalar::Tangent<f64>> = at
            .iter()
            .zip(&dir)
            .map(|(&a, &d)| crate::scalar::Tangent::new(a, d))
            .collect();
        let ad: Vec<f64> = f.eval(&seeds).expect("smooth").iter().map(|t| t.dot).collect();

        let h = 1e-5;
        let shift = |sign: f64| -> Vec<f64> {
            (0..m).map(|j| at[j] + sign * h * dir[j]).collect()
        };
        let fp = f.eval(&shift(1.0)).expect("smooth");
        let fm = f.eval(&shift(-1.0)).expect("smooth");
        let fd: Vec<f64> = (0..m).map(|j| (fp[j] - fm[j]) / (2.0 * h)).collect();
        rel(linalg::max_abs_diff(&ad, &fd), linalg::norm(&ad))
    });
    finish(cfg, name, n, max, 1e-8, format!("worst_probe={worst}"))
}

/// The derivative slot is linear in the seed direction.
fn kernel_pushforward_linear(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "kernel_pushforward_linear";
    let seed = cfg.seed ^ salt(name);
    let n = 500;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let m = 1 + (rng.next_u64() % 3) as usize;
        let f = KernelMap::random(&mut rng, m, m);
        let at = rng.vector(m, -1.0, 1.0);
        let d1 = rng.vector(m, -1.0, 1.0);
        let d2 = rng.vector(m, -1.0, 1.0);
        let a = rng.uniform(-2.0, 2.0);
        let b = rng.uniform(-2.0, 2.0);

        let push = |dir: &[f64]| -> Vec<f64> {
            let seeds: Vec<crate::scalar::Tangent<f64>> = at
                .iter()
                .zip(dir)
                .map(|(&p, &d)| crate::scalar::Tangent::new(p, d))
                .collect();
            f.eval(&seeds).expect("smooth").iter().map(|t| t.dot).collect()
        };
        let combo: Vec<f64> = (0..m).map(|j| a * d1[j] + b * d2[j]).collect();
        let lhs = push(&combo);
        let p1 = push(&d1);
        let p2 = push(&d2);
        let rhs: Vec<f64> = (0..m).map(|j| a * p1[j] + b * p2[j]).collect();
        rel(linalg::max_abs_diff(&lhs, &rhs), linalg::norm(&rhs))
    });
    finish(cfg, name, n, max, 1e-13, format!("worst_probe={worst}"))
}

fn flip_involution(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "flip_involution";
    let seed = cfg.seed ^ salt(name);
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let m = 1 + (rng.next_u64() % 4) as usize;
        let t = rand_tt(&mut rng, m, -5.0, 5.0);
        tt_distance(&flip(&flip(&t)), &t)
    });
    finish(cfg, name, n, max, 0.0, format!("worst_probe={worst}"))
}

fn flip_projection_exchange(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "flip_projection_exchange";
    let seed = cfg.seed ^ salt(name);
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let m = 1 + (rng.next_u64() % 4) as usize;
        let t = rand_tt(&mut rng, m, -5.0, 5.0);
        let f = flip(&t);
        let a = linalg::max_abs_diff(&pi_tm(&f).vec, &t_pi_m(&t).vec);
        let b = linalg::max_abs_diff(&t_pi_m(&f).vec, &pi_tm(&t).vec);
        a.max(b)
    });
    finish(cfg, name, n, max, 0.0, format!("worst_probe={worst}"))
}

fn flip_exchanges_additions(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "flip_exchanges_additions";
    let seed = cfg.seed ^ salt(name);
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let m = 1 + (rng.next_u64() % 4) as usize;
        let x = rng.vector(m, -3.0, 3.0);
        let eta = rng.vector(m, -3.0, 3.0);
        let a = TTVector::from_f64(&x, &rng.vector(m, -3.0, 3.0), &eta, &rng.vector(m, -3.0, 3.0));
        let b = TTVector::from_f64(&x, &rng.vector(m, -3.0, 3.0), &eta, &rng.vector(m, -3.0, 3.0));
        let lhs = flip(&add_over_tm(&a, &b).expect("same base"));
        let rhs = add_over_e(&flip(&a), &flip(&b)).expect("same base");
        tt_distance(&lhs, &rhs)
    });
    finish(cfg, name, n, max, 0.0, format!("worst_probe={worst}"))
}

fn vertical_projection_inverts_lift(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "vertical_projection_inverts_lift";
    let seed = cfg.seed ^ salt(name);
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let m = 1 + (rng.next_u64() % 4) as usize;
        let base = rng.vector(m, -3.0, 3.0);
        let u = TangentVector::from_f64(&base, &rng.vector(m, -3.0, 3.0));
        let v = TangentVector::from_f64(&base, &rng.vector(m, -3.0, 3.0));
        let lifted = vertical_lift_big(&u, &v).expect("same base");
        let back = vertical_projection(&lifted, crate::VERTICAL_TOL).expect("vertical");
        linalg::max_abs_diff(&back.vec, &v.vec)
    });
    finish(cfg, name, n, max, 0.0, format!("worst_probe={worst}"))
}

fn flip_naturality(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "flip_naturality";
    let seed = cfg.seed ^ salt(name);
    let n = 400;
    let shapes = [(2usize, 2usize), (2, 3), (3, 2)];
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let (m_in, m_out) = shapes[i % shapes.len()];
        let f = KernelMap::random(&mut rng, m_in, m_out);
        let t = rand_tt(&mut rng, m_in, -1.0, 1.0);
        let lhs = double_tangent_map(&f, &flip(&t)).expect("smooth");
        let rhs = flip(&double_tangent_map(&f, &t).expect("smooth"));
        rel(tt_distance(&lhs, &rhs), linalg::norm(&rhs.flat_values()))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn mixed_partials_flip(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "mixed_partials_flip";
    let seed = cfg.seed ^ salt(name);
    let n = 400;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let m = 1 + (rng.next_u64() % 4) as usize;
        let surface = KernelMap::random(&mut rng, 2, m);
        let at = rng.vector(2, -1.0, 1.0);
        // seed the two parameter directions on the two tangent levels
        let w = TTVector::from_f64(&at, &[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]);
        let dts = double_tangent_map(&surface, &w).expect("smooth");
        let dst = double_tangent_map(&surface, &flip(&w)).expect("smooth");
        rel(
            tt_distance(&dst, &flip(&dts)),
            linalg::norm(&dts.flat_values()),
        )
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn vertical_lift_naturality(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "vertical_lift_naturality";
    let seed = cfg.seed ^ salt(name);
    let n = 400;
    let shapes = [(2usize, 2usize), (2, 3), (3, 2)];
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let (m_in, m_out) = shapes[i % shapes.len()];
        let hom = BundleHom::random(&mut rng, m_in, m_out);
        let y = rng.vector(m_in, -1.0, 1.0);
        let v = rng.vector(m_in, -1.0, 1.0);

        // vl(v_y) in the doubled chart: base (y, 0), velocity (0, v)
        let mut base = y.clone();
        base.extend(vec![0.0; m_in]);
        let mut vel = vec![0.0; m_in];
        vel.extend(v.clone());
        let lifted = TangentVector::from_f64(&base, &vel);
        let lhs = tangent_map(&hom, &lifted).expect("smooth");

        // vl of the image point
        let mut image = y.clone();
        image.extend(v.clone());
        let phi = hom.eval(&image).expect("smooth");
        let mut exp_base = phi[..m_out].to_vec();
        exp_base.extend(vec![0.0; m_out]);
        let mut exp_vel = vec![0.0; m_out];
        exp_vel.extend_from_slice(&phi[m_out..]);

        let d1 = linalg::max_abs_diff(&lhs.base, &exp_base);
        let d2 = linalg::max_abs_diff(&lhs.vec, &exp_vel);
        rel(d1.max(d2), linalg::norm(&phi))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

// ---------------------------------------------------------------------------
// connection suite
// ---------------------------------------------------------------------------

/// Probe generator plus round-robin model index.
fn per_model_probe(seed: u64, i: usize, count: usize) -> (SplitMix64, usize) {
    (probe_rng(seed, i as u64), i % count)
}

fn christoffel_bilinear(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "christoffel_bilinear";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 1000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let y = sample_point(model, &mut rng);
        let u = rng.vector(m, -1.0, 1.0);
        let v = rng.vector(m, -1.0, 1.0);
        let w = rng.vector(m, -1.0, 1.0);
        let a = rng.uniform(-2.0, 2.0);
        let b = rng.uniform(-2.0, 2.0);
        let combo: Vec<f64> = (0..m).map(|j| a * u[j] + b * v[j]).collect();

        let left = model.christoffel.eval(&y, &combo, &w).expect("gamma");
        let gu = model.christoffel.eval(&y, &u, &w).expect("gamma");
        let gv = model.christoffel.eval(&y, &v, &w).expect("gamma");
        let expect: Vec<f64> = (0..m).map(|j| a * gu[j] + b * gv[j]).collect();
        let d1 = rel(linalg::max_abs_diff(&left, &expect), linalg::norm(&expect));

        let left = model.christoffel.eval(&y, &w, &combo).expect("gamma");
        let gu = model.christoffel.eval(&y, &w, &u).expect("gamma");
        let gv = model.christoffel.eval(&y, &w, &v).expect("gamma");
        let expect: Vec<f64> = (0..m).map(|j| a * gu[j] + b * gv[j]).collect();
        let d2 = rel(linalg::max_abs_diff(&left, &expect), linalg::norm(&expect));
        d1.max(d2)
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn connector_inverts_vertical_lift(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "connector_inverts_vertical_lift";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let p = sample_point(model, &mut rng);
        let v = rng.vector(model.dim, -2.0, 2.0);
        let tv = TangentVector::from_f64(&p, &v);
        let back = connector(model, &vertical_lift(&tv)).expect("in domain");
        rel(linalg::max_abs_diff(&back.vec, &v), linalg::norm(&v))
    });
    finish(cfg, name, n, max, 1e-13, format!("worst_probe={worst}"))
}

fn horizontal_lift_is_section(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "horizontal_lift_is_section";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let at = TangentVector::from_f64(
            &sample_point(model, &mut rng),
            &rng.vector(model.dim, -2.0, 2.0),
        );
        let xi = rng.vector(model.dim, -2.0, 2.0);
        let c = horizontal_lift(model, &xi, &at).expect("in domain");
        let d1 = linalg::max_abs_diff(&c.eta, &xi);
        let d2 = linalg::max_abs_diff(&c.x, &at.base);
        let d3 = linalg::max_abs_diff(&c.xi, &at.vec);
        d1.max(d2).max(d3)
    });
    finish(cfg, name, n, max, 0.0, format!("worst_probe={worst}"))
}

fn connector_annihilates_horizontal(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "connector_annihilates_horizontal";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let at = TangentVector::from_f64(
            &sample_point(model, &mut rng),
            &rng.vector(model.dim, -2.0, 2.0),
        );
        let xi = rng.vector(model.dim, -2.0, 2.0);
        let c = horizontal_lift(model, &xi, &at).expect("in domain");
        let k = connector(model, &c).expect("in domain");
        rel(linalg::max_abs(&k.vec), linalg::norm(&xi))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn connector_fiber_linear(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "connector_fiber_linear";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 1000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let p = sample_point(model, &mut rng);
        let xi = rng.vector(m, -1.5, 1.5);
        let eta = rng.vector(m, -1.5, 1.5);

        // canonical structure: (eta, zeta) fibers add
        let a = TTVector::from_f64(&p, &xi, &rng.vector(m, -1.5, 1.5), &rng.vector(m, -1.5, 1.5));
        let b = TTVector::from_f64(&p, &xi, &rng.vector(m, -1.5, 1.5), &rng.vector(m, -1.5, 1.5));
        let sum = add_over_e(&a, &b).expect("base");
        let lhs = connector(model, &sum).expect("domain").vec;
        let rhs = linalg::add(
            &connector(model, &a).expect("domain").vec,
            &connector(model, &b).expect("domain").vec,
        );
        let d1 = rel(linalg::max_abs_diff(&lhs, &rhs), linalg::norm(&rhs));

        // derived structure: (xi, zeta) fibers add
        let c = TTVector::from_f64(&p, &rng.vector(m, -1.5, 1.5), &eta, &rng.vector(m, -1.5, 1.5));
        let d = TTVector::from_f64(&p, &rng.vector(m, -1.5, 1.5), &eta, &rng.vector(m, -1.5, 1.5));
        let sum = add_over_tm(&c, &d).expect("base");
        let lhs = connector(model, &sum).expect("domain").vec;
        let rhs = linalg::add(
            &connector(model, &c).expect("domain").vec,
            &connector(model, &d).expect("domain").vec,
        );
        let d2 = rel(linalg::max_abs_diff(&lhs, &rhs), linalg::norm(&rhs));
        d1.max(d2)
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn vertical_lift_connector_commute(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "vertical_lift_connector_commute";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let t = TTVector::from_f64(
            &sample_point(model, &mut rng),
            &rng.vector(m, -1.5, 1.5),
            &rng.vector(m, -1.5, 1.5),
            &rng.vector(m, -1.5, 1.5),
        );
        let lhs = vertical_lift(&connector(model, &t).expect("domain"));
        let tk = connector(model, &vertical_lift_tt(&t).to_nested()).expect("domain");
        let rhs = TTVector::from_nested(&tk);
        rel(tt_distance(&lhs, &rhs), linalg::norm(&t.flat_values()))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn bracket_via_flip_vs_jacobian(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "bracket_via_flip_vs_jacobian";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 100 * models.len();
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let at = sample_point(model, &mut rng);
        let x_field = PolyMap::random_quadratic(&mut rng, m, m);
        let y_field = PolyMap::random_quadratic(&mut rng, m, m);
        let via_flip = lie_bracket_via_flip(&x_field, &y_field, &at).expect("vertical");
        let direct = ad_bracket(&x_field, &y_field, &at).expect("smooth");
        rel(
            linalg::max_abs_diff(&via_flip, &direct),
            linalg::norm(&direct),
        )
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn covariant_derivative_tensorial(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "covariant_derivative_tensorial";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 200;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let at = sample_point(model, &mut rng);
        let x_field = PolyMap::random_quadratic(&mut rng, m, m);
        let section = PolyMap::random_quadratic(&mut rng, m, m);
        let h = Polynomial::random_quadratic(&mut rng, m);
        let hx = ScaledMap {
            factor: h.clone(),
            inner: x_field.clone(),
        };
        let lhs = covariant_derivative_field(model, &hx, &section, &at).expect("domain");
        let nabla = covariant_derivative_field(model, &x_field, &section, &at).expect("domain");
        let hv = h.eval(&at);
        let rhs: Vec<f64> = nabla.iter().map(|c| hv * c).collect();
        rel(linalg::max_abs_diff(&lhs, &rhs), linalg::norm(&rhs))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn covariant_derivative_leibniz(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "covariant_derivative_leibniz";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 200;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let at = sample_point(model, &mut rng);
        let x_field = PolyMap::random_quadratic(&mut rng, m, m);
        let section = PolyMap::random_quadratic(&mut rng, m, m);
        let h = Polynomial::random_quadratic(&mut rng, m);
        let hs = ScaledMap {
            factor: h.clone(),
            inner: section.clone(),
        };
        let lhs = covariant_derivative_field(model, &x_field, &hs, &at).expect("domain");

        let xv = x_field.eval(&at).expect("smooth");
        let dh = {
            let seeds: Vec<crate::scalar::Tangent<f64>> = at
                .iter()
                .zip(&xv)
                .map(|(&a, &b)| crate::scalar::Tangent::new(a, b))
                .collect();
            h.eval(&seeds).dot
        };
        let sv = section.eval(&at).expect("smooth");
        let nabla = covariant_derivative_field(model, &x_field, &section, &at).expect("domain");
        let hv = h.eval(&at);
        let rhs: Vec<f64> = (0..m).map(|j| dh * sv[j] + hv * nabla[j]).collect();
        rel(linalg::max_abs_diff(&lhs, &rhs), linalg::norm(&rhs))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn curvature_two_routes(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "curvature_two_routes";
    let seed = cfg.seed ^ salt(name);
    let models = curved_models();
    let n = 50 * models.len();
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let at = sample_point(model, &mut rng);
        let xf = PolyMap::random_quadratic(&mut rng, m, m);
        let yf = PolyMap::random_quadratic(&mut rng, m, m);
        let s = PolyMap::random_quadratic(&mut rng, m, m);
        let commutator = curvature_commutator_oracle(model, &xf, &yf, &s, &at).expect("domain");
        let xv = xf.eval(&at).expect("smooth");
        let yv = yf.eval(&at).expect("smooth");
        let sv = s.eval(&at).expect("smooth");
        let operator = curvature_operator(model, &at, &xv, &yv, &sv).expect("domain");
        rel(
            linalg::max_abs_diff(&commutator, &operator),
            linalg::norm(&commutator),
        )
    });
    finish(cfg, name, n, max, 1e-9, format!("worst_probe={worst}"))
}

fn curvature_antisymmetry(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "curvature_antisymmetry";
    let seed = cfg.seed ^ salt(name);
    let models = curved_models();
    let n = 150;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let at = sample_point(model, &mut rng);
        let u = rng.vector(m, -1.0, 1.0);
        let v = rng.vector(m, -1.0, 1.0);
        let w = rng.vector(m, -1.0, 1.0);
        let ruv = curvature_operator(model, &at, &u, &v, &w).expect("domain");
        let rvu = curvature_operator(model, &at, &v, &u, &w).expect("domain");
        rel(
            linalg::max_abs(&linalg::add(&ruv, &rvu)),
            linalg::norm(&ruv),
        )
    });
    finish(cfg, name, n, max, 1e-10, format!("worst_probe={worst}"))
}

fn constant_curvature_closed_form(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "constant_curvature_closed_form";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let cases: Vec<(&ManifoldModel, f64)> = models
        .iter()
        .filter_map(|m| match m.name.as_str() {
            n if n.starts_with("sphere") => Some((m, 1.0)),
            "half-plane" => Some((m, -1.0)),
            _ => None,
        })
        .collect();
    let n = 100;
    let (max, worst) = batch::worst_probe(n, |i| {
        let mut rng = probe_rng(seed, i as u64);
        let (model, k0) = cases[i % cases.len()];
        let metric = model.metric().expect("metric model");
        let at = sample_point(model, &mut rng);
        let u = rng.vector(2, -1.0, 1.0);
        let v = rng.vector(2, -1.0, 1.0);
        let w = rng.vector(2, -1.0, 1.0);
        let r = curvature_operator(model, &at, &u, &v, &w).expect("domain");
        let gvw = metric.inner(&at, &v, &w).expect("metric");
        let guw = metric.inner(&at, &u, &w).expect("metric");
        let expect: Vec<f64> = (0..2).map(|j| k0 * (gvw * u[j] - guw * v[j])).collect();
        rel(linalg::max_abs_diff(&r, &expect), linalg::norm(&expect))
    });
    finish(cfg, name, n, max, 1e-8, format!("worst_probe={worst}"))
}

fn torsion_two_routes(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "torsion_two_routes";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 2000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let at = sample_point(model, &mut rng);
        let xf = PolyMap::random_quadratic(&mut rng, m, m);
        let yf = PolyMap::random_quadratic(&mut rng, m, m);
        let op = torsion_operator_route(model, &xf, &yf, &at).expect("domain");
        let xv = xf.eval(&at).expect("smooth");
        let yv = yf.eval(&at).expect("smooth");
        let coord = torsion(model, &at, &xv, &yv).expect("domain");
        rel(linalg::max_abs_diff(&op, &coord), linalg::norm(&coord))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn torsion_vanishes_levi_civita(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "torsion_vanishes_levi_civita";
    let seed = cfg.seed ^ salt(name);
    let models: Vec<ManifoldModel> = standard_models()
        .into_iter()
        .filter(|m| m.metric().is_some())
        .collect();
    let n = 2000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let m = model.dim;
        let at = sample_point(model, &mut rng);
        let u = rng.vector(m, -2.0, 2.0);
        let v = rng.vector(m, -2.0, 2.0);
        let t = torsion(model, &at, &u, &v).expect("domain");
        rel(linalg::max_abs(&t), linalg::norm(&u) * linalg::norm(&v))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

// ---------------------------------------------------------------------------
// spray_flow suite
// ---------------------------------------------------------------------------

fn spray_double_section(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "spray_double_section";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let at = TangentVector::from_f64(
            &sample_point(model, &mut rng),
            &rng.vector(model.dim, -2.0, 2.0),
        );
        let s = spray(model, &at).expect("domain");
        let d1 = linalg::max_abs_diff(&pi_tm(&s).vec, &at.vec);
        let d2 = linalg::max_abs_diff(&t_pi_m(&s).vec, &at.vec);
        let d3 = linalg::max_abs_diff(&s.x, &at.base);
        d1.max(d2).max(d3)
    });
    finish(cfg, name, n, max, 0.0, format!("worst_probe={worst}"))
}

fn connector_annihilates_spray(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "connector_annihilates_spray";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 10_000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let at = TangentVector::from_f64(
            &sample_point(model, &mut rng),
            &rng.vector(model.dim, -2.0, 2.0),
        );
        let s = spray(model, &at).expect("domain");
        let k = connector(model, &s).expect("domain");
        rel(linalg::max_abs(&k.vec), linalg::norm(&at.vec))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

fn spray_quadratic(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "spray_quadratic";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = 2000;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let p = sample_point(model, &mut rng);
        let v = rng.vector(model.dim, -2.0, 2.0);
        let t = rng.uniform(-3.0, 3.0);
        let lhs = spray(model, &TangentVector::from_f64(&p, &linalg::scale(t, &v)))
            .expect("domain");
        let s = spray(model, &TangentVector::from_f64(&p, &v)).expect("domain");
        let ms = crate::bundle::scale_over_e(t, &s);
        let rhs = TTVector::new(
            ms.x.clone(),
            linalg::scale(t, &ms.xi),
            ms.eta.clone(),
            linalg::scale(t, &ms.zeta),
        );
        rel(tt_distance(&lhs, &rhs), linalg::norm(&rhs.flat_values()))
    });
    finish(cfg, name, n, max, 1e-12, format!("worst_probe={worst}"))
}

/// Deterministic trajectory seed for a model: start point, velocity of
/// moderate metric length, and deviation data.
fn flow_case(
    model: &ManifoldModel,
    rng: &mut SplitMix64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = model.dim;
    let x0 = sample_point(model, rng);
    let mut v0 = rng.vector(m, -0.5, 0.5);
    if let Some(metric) = model.metric() {
        let n = metric.norm(&x0, &v0).expect("metric");
        v0 = linalg::scale(0.5 / n, &v0);
    }
    let j0 = rng.vector(m, -0.5, 0.5);
    let nabla_j0 = rng.vector(m, -0.5, 0.5);
    (x0, v0, j0, nabla_j0)
}

fn geodesic_homogeneity(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "geodesic_homogeneity";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = models.len() * 3;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let (x0, v0, _, _) = flow_case(model, &mut rng);
        let x = TangentVector::from_f64(&x0, &v0);
        let doubled = TangentVector::from_f64(&x0, &linalg::scale(2.0, &v0));
        let a = geo(model, &doubled, 0.5, 1e-3).expect("domain");
        let b = geo(model, &x, 1.0, 1e-3).expect("domain");
        linalg::max_abs_diff(&a, &b)
    });
    finish(cfg, name, n, max, 1e-7, format!("worst_probe={worst}"))
}

fn geodesic_flow_property(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "geodesic_flow_property";
    let seed = cfg.seed ^ salt(name);
    let models = standard_models();
    let n = models.len() * 3;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let (x0, v0, _, _) = flow_case(model, &mut rng);
        let x = TangentVector::from_f64(&x0, &v0);
        let mid = geodesic_state_at(model, &x, 0.3, 1e-3).expect("domain");
        let a = geo(model, &mid, 0.4, 1e-3).expect("domain");
        let b = geo(model, &x, 0.7, 1e-3).expect("domain");
        let aligned = linalg::max_abs_diff(&a, &b);

        // A restart time off the step grid forces a partial step, so the two
        // legs really are different discretizations of the same flow.
        let mid = geodesic_state_at(model, &x, 0.3115, 1e-3).expect("domain");
        let a = geo(model, &mid, 0.3885, 1e-3).expect("domain");
        let off_grid = linalg::max_abs_diff(&a, &b);
        aligned.max(off_grid)
    });
    finish(cfg, name, n, max, 1e-7, format!("worst_probe={worst}"))
}

fn geodesic_speed_conservation(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "geodesic_speed_conservation";
    let seed = cfg.seed ^ salt(name);
    let models: Vec<ManifoldModel> = standard_models()
        .into_iter()
        .filter(|m| m.metric().is_some())
        .collect();
    let n = models.len() * 2;
    let (max, worst) = batch::worst_probe(n, |i| {
        let (mut rng, k) = per_model_probe(seed, i, models.len());
        let model = &models[k];
        let (x0, v0, _, _) = flow_case(model, &mut rng);
        let metric = model.metric().expect("metric");
        let start = TangentVector::from_f64(&x0, &v0);
        let speed0 = metric.inner(&x0, &v0, &v0).expect("metric");
        let traj = integrate_geodesic(model, &start, 2.0, 1e-3).expect("domain");
        traj.states
            .iter()
            .map(|s| (metric.inner(&s.base, &s.vec, &s.vec).expect("metric") - speed0).abs())
            .fold(0.0f64, f64::max)
    });
    finish(cfg, name, n, max, 1e-8, format!("worst_probe={worst}"))
}

/// The headline cross-validation: along each curved model the Jacobi flow,
/// the geodesic variation and the classical Jacobi equation must agree, the
/// covariant deviation velocity must match the classical `P`, and the
/// equation residual must stay at roundoff.
fn jacobi_three_way(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let seed = cfg.seed ^ salt("jacobi_three_way");
    let models = curved_models();

    let t_max = 2.0;
    let h = 1e-3;
    let s_eps = 1e-4;

    struct Defects {
        variation: f64,
        classical: f64,
        covariant: f64,
        residual: f64,
    }

    let per_model = batch::map_batch(models, |model| {
        let mut rng = probe_rng(seed, salt(&model.name));
        let (x0, v0, j0, nabla_j0) = flow_case(&model, &mut rng);
        let y0 =
            JacobiState::from_covariant(&model, &x0, &v0, &j0, &nabla_j0).expect("in domain");

        let flow = integrate_jacobi_flow(&model, &y0, t_max, h).expect("flow");
        let classical = classical_jacobi_oracle(
            &model,
            &TangentVector::from_f64(&x0, &v0),
            &j0,
            &nabla_j0,
            t_max,
            h,
        )
        .expect("oracle");
        let x_of_s = |s: f64| {
            TangentVector::new(
                (0..model.dim).map(|i| x0[i] + s * y0.j[i]).collect(),
                (0..model.dim).map(|i| v0[i] + s * y0.j_dot[i]).collect(),
            )
        };
        let varia = variation_oracle(&model, x_of_s, t_max, h, s_eps).expect("variation");

        let mut d = Defects {
            variation: 0.0,
            classical: 0.0,
            covariant: 0.0,
            residual: 0.0,
        };
        for (i, state) in flow.states.iter().enumerate() {
            d.variation = d
                .variation
                .max(linalg::max_abs_diff(&state.j, &varia.states[i]));
            d.classical = d
                .classical
                .max(linalg::max_abs_diff(&state.j, &classical.states[i].j));
            let p = covariant_deviation_velocity(&model, state).expect("domain");
            d.covariant = d
                .covariant
                .max(linalg::max_abs_diff(&p, &classical.states[i].p));
            d.residual = d.residual.max(linalg::max_abs(
                &jacobi_residual(&model, state).expect("domain"),
            ));
        }
        d
    });

    let cases = per_model.len();
    let fold = |f: fn(&Defects) -> f64| per_model.iter().map(f).fold(0.0f64, f64::max);
    let mut out = finish(
        cfg,
        "jacobi_flow_vs_variation",
        cases,
        fold(|d| d.variation),
        1e-5,
        String::new(),
    );
    out.extend(finish(
        cfg,
        "jacobi_flow_vs_classical",
        cases,
        fold(|d| d.classical),
        1e-6,
        String::new(),
    ));
    out.extend(finish(
        cfg,
        "covariant_deviation_matches_oracle",
        cases,
        fold(|d| d.covariant),
        1e-6,
        String::new(),
    ));
    out.extend(finish(
        cfg,
        "jacobi_residual_along_flow",
        cases,
        fold(|d| d.residual),
        1e-12,
        String::new(),
    ));
    out
}

fn jacobi_closed_forms(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let models = standard_models();
    let sphere = models
        .iter()
        .find(|m| m.name.starts_with("sphere"))
        .expect("sphere model");
    let half_plane = models
        .iter()
        .find(|m| m.name == "half-plane")
        .expect("half-plane model");
    let flat = models
        .iter()
        .find(|m| m.name == "euclidean-2d")
        .expect("flat model");
    let h = 1e-3;

    // sphere: unit-speed start away from the chart center, normal deviation
    let sphere_defect = {
        let metric = sphere.metric().expect("metric");
        let x0 = [0.5, 0.0];
        let v0 = [0.0, 0.625];
        let normal = [0.625, 0.0];
        let y0 = JacobiState::from_covariant(sphere, &x0, &v0, &[0.0, 0.0], &normal)
            .expect("domain");
        let traj = integrate_jacobi_flow(sphere, &y0, std::f64::consts::PI, h).expect("flow");
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| (metric.norm(&s.x, &s.j).expect("metric") - t.sin().abs()).abs())
            .fold(0.0f64, f64::max)
    };

    let half_plane_defect = {
        let metric = half_plane.metric().expect("metric");
        let y0 = JacobiState::from_covariant(
            half_plane,
            &[0.0, 1.0],
            &[1.0, 0.0],
            &[0.0, 0.0],
            &[0.0, 1.0],
        )
        .expect("domain");
        let traj = integrate_jacobi_flow(half_plane, &y0, 2.0, h).expect("flow");
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| (metric.norm(&s.x, &s.j).expect("metric") - t.sinh()).abs())
            .fold(0.0f64, f64::max)
    };

    let flat_defect = {
        let j0 = [0.3, -0.2];
        let nabla = [0.1, 0.7];
        let y0 = JacobiState::from_covariant(flat, &[0.0, 0.0], &[1.0, 0.5], &j0, &nabla)
            .expect("domain");
        let traj = integrate_jacobi_flow(flat, &y0, 2.0, h).expect("flow");
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| {
                (0..2)
                    .map(|i| (s.j[i] - (j0[i] + t * nabla[i])).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max)
    };

    let mut out = finish(
        cfg,
        "jacobi_closed_form_sphere",
        1,
        sphere_defect,
        1e-6,
        String::new(),
    );
    out.extend(finish(
        cfg,
        "jacobi_closed_form_half_plane",
        1,
        half_plane_defect,
        1e-5,
        String::new(),
    ));
    out.extend(finish(
        cfg,
        "jacobi_flat_exact",
        1,
        flat_defect,
        1e-12,
        String::new(),
    ));
    out
}

fn geodesic_subsystem_bit_identical(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "geodesic_subsystem_bit_identical";
    let seed = cfg.seed ^ salt(name);
    let models = curved_models();
    let cases = models.len();
    let defects = batch::map_batch(models, |model| {
        let mut rng = probe_rng(seed, salt(&model.name));
        let (x0, v0, j0, nabla_j0) = flow_case(&model, &mut rng);
        let y0 =
            JacobiState::from_covariant(&model, &x0, &v0, &j0, &nabla_j0).expect("domain");
        let flow = integrate_jacobi_flow(&model, &y0, 1.0, 1e-3).expect("flow");
        let geod = integrate_geodesic(&model, &TangentVector::from_f64(&x0, &v0), 1.0, 1e-3)
            .expect("geodesic");
        let mut mismatches = 0usize;
        for (a, b) in flow.states.iter().zip(&geod.states) {
            for i in 0..model.dim {
                if a.x[i].to_bits() != b.base[i].to_bits()
                    || a.xi[i].to_bits() != b.vec[i].to_bits()
                {
                    mismatches += 1;
                }
            }
        }
        mismatches as f64
    });
    let worst = defects.into_iter().fold(0.0f64, f64::max);
    finish(cfg, name, cases, worst, 0.0, String::new())
}

fn rk4_convergence_order(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "rk4_convergence_order";
    let models = standard_models();
    let half_plane = models
        .iter()
        .find(|m| m.name == "half-plane")
        .expect("half-plane model");
    let x0 = TangentVector::from_f64(&[0.0, 1.0], &[1.0, 0.0]);
    let exact = [1.0f64.tanh(), 1.0 / 1.0f64.cosh()];
    let errors: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&h| {
            let end = geo(half_plane, &x0, 1.0, h).expect("domain");
            linalg::max_abs_diff(&end, &exact)
        })
        .collect();
    let r1 = errors[0] / errors[1];
    let r2 = errors[1] / errors[2];
    let defect = (14.0 - r1.min(r2)).max(0.0);
    let note = format!("ratios={r1:.1},{r2:.1}");
    finish(cfg, name, 3, defect, 0.0, note)
}

fn variation_oracle_convergence(cfg: &VerifyConfig) -> Vec<CheckReport> {
    let name = "variation_oracle_convergence";
    let models = standard_models();
    let sphere = models
        .iter()
        .find(|m| m.name.starts_with("sphere"))
        .expect("sphere model");
    let x0 = vec![0.5, 0.0];
    let v0 = vec![0.0, 0.625];
    let y0 = JacobiState::from_covariant(sphere, &x0, &v0, &[0.0, 0.0], &[0.625, 0.0])
        .expect("domain");
    let flow = integrate_jacobi_flow(sphere, &y0, 1.0, 1e-3).expect("flow");

    let mismatch = |s_eps: f64| -> f64 {
        let x_of_s = |s: f64| {
            TangentVector::new(
                (0..2).map(|i| x0[i] + s * y0.j[i]).collect(),
                (0..2).map(|i| v0[i] + s * y0.j_dot[i]).collect(),
            )
        };
        let varia = variation_oracle(sphere, x_of_s, 1.0, 1e-3, s_eps).expect("variation");
        flow.states
            .iter()
            .zip(&varia.states)
            .map(|(a, b)| linalg::max_abs_diff(&a.j, b))
            .fold(0.0f64, f64::max)
    };

    let floor = 1e-9;
    let m: Vec<f64> = [2e-3, 1e-3, 5e-4].iter().map(|&s| mismatch(s)).collect();
    let mut defect = 0.0f64;
    for w in m.windows(2) {
        if w[1] > floor {
            defect = defect.max((3.0 - w[0] / w[1]).max(0.0));
        }
    }
    let note = format!("mismatches={:e},{:e},{:e}", m[0], m[1], m[2]);
    finish(cfg, name, 3, defect, 0.0, note)
}
