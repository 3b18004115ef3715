//! Property battery over a model and its grid, plus tail diagnostics.
//!
//! [`run_suite`] never fails as a whole: a check that errors is recorded as a
//! failed entry with the error text.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{self, Mat4};
use crate::energy;
use crate::field::{self, Repr, SpinorField};
use crate::model::{self, Nonlinearity, ProblemModel};
use crate::nehari::{self, InnerOptions};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Signed slack: non-negative iff the check holds.
    pub margin: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Environment {
    pub n: usize,
    pub half_length: f64,
    pub mass: f64,
    pub v_max: f64,
    pub k_max: f64,
    pub nonlinearity: String,
    pub seed: u64,
    pub rng: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub environment: Environment,
    pub checks: Vec<Check>,
}

impl DiagnosticsReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Names of the property checks, in report order.
pub const CANONICAL: [&str; 12] = [
    "anticommutation",
    "projector_algebra",
    "parseval_roundtrip",
    "spectral_gap",
    "nehari_excess_sign",
    "derivative_fd",
    "energy_signs",
    "scalar_h",
    "fiber_domination",
    "fiber_uniqueness",
    "cq_identity",
    "superlevel_bound",
];

/// `margin ≥ 0` passes.
fn check(name: &str, margin: f64, tolerance: f64, samples: usize, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed: margin >= 0.0 && margin.is_finite(),
        margin,
        tolerance,
        samples,
        detail,
    }
}

fn failed(name: &str, err: Error) -> Check {
    Check {
        name: name.to_string(),
        passed: false,
        margin: f64::NAN,
        tolerance: f64::NAN,
        samples: 0,
        detail: err.to_string(),
    }
}

fn mat_err(a: &Mat4, b: &Mat4) -> f64 {
    algebra::max_abs(&(a - b))
}

fn anticommutation() -> Result<Check> {
    let (alpha, beta) = algebra::dirac_matrices();
    let id = Mat4::identity();
    let zero = Mat4::zeros();
    let mut worst = 0.0f64;
    for j in 0..3 {
        for k in 0..3 {
            let target = if j == k { id * Complex64::new(2.0, 0.0) } else { zero };
            worst = worst.max(mat_err(&(alpha[j] * alpha[k] + alpha[k] * alpha[j]), &target));
        }
        worst = worst.max(mat_err(&(alpha[j] * beta + beta * alpha[j]), &zero));
    }
    worst = worst.max(mat_err(&(beta * beta), &id));
    let tol = 1e-15;
    Ok(check("anticommutation", tol - worst, tol, 16, format!("max deviation {worst:e}")))
}

fn projector_algebra(rng: &mut ChaCha8Rng, a: f64) -> Result<Check> {
    let samples = 1000;
    let id = Mat4::identity();
    let zero = Mat4::zeros();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let k: [f64; 3] = std::array::from_fn(|_| rng.random_range(-20.0..20.0));
        let sys = algebra::mode_system(k, a)?;
        let (pp, pm) = (sys.p_plus, sys.p_minus);
        worst = worst
            .max(mat_err(&(pp * pp), &pp))
            .max(mat_err(&(pm * pm), &pm))
            .max(mat_err(&(pp + pm), &id))
            .max(mat_err(&(pp * pm), &zero));
    }
    let tol = 1e-13;
    Ok(check("projector_algebra", tol - worst, tol, samples, format!("max deviation {worst:e}")))
}

fn parseval(rng: &mut ChaCha8Rng, model: &ProblemModel) -> Result<Check> {
    let samples = 5;
    let grid = *model.grid();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = SpinorField::random(grid, Repr::Physical, rng);
        let uf = u.to_frequency();
        let phys: f64 = u.data().iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume();
        let freq: f64 = uf.data().iter().map(|z| z.norm_sqr()).sum();
        worst = worst.max((phys - freq).abs() / phys);
        let back = uf.to_physical();
        let scale = u.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(back.max_abs_diff(&u)? / scale);
    }
    let tol = 1e-12;
    Ok(check("parseval_roundtrip", tol - worst, tol, samples, format!("max relative deviation {worst:e}")))
}

fn spectral_gap(rng: &mut ChaCha8Rng, model: &ProblemModel) -> Result<Check> {
    let samples = 100;
    let op = model.operator();
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let u = SpinorField::random(*model.grid(), Repr::Physical, rng);
        let l2 = field::l2_norm(&u);
        let g = op.graph_norm(&u)?;
        worst = worst.min((g * g - op.mass() * l2 * l2) / (g * g));
    }
    Ok(check("spectral_gap", worst, 0.0, samples, format!("min (‖u‖² − a‖u‖₂²)/‖u‖² = {worst:e}")))
}

fn nehari_excess_sign(rng: &mut ChaCha8Rng, nl: &Nonlinearity) -> Result<Check> {
    let samples = 10_000;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let t = 10f64.powf(rng.random_range(-6.0..3.0));
        let (f, big_f) = nl.f_and_big_f(t);
        let scale = (0.5 * f * t * t).abs().max(big_f.abs()).max(f64::MIN_POSITIVE);
        worst = worst.min((0.5 * f * t * t - big_f) / scale);
    }
    let tol = 1e-12;
    Ok(check("nehari_excess_sign", worst + tol, tol, samples, format!("min scaled ½f(t)t² − F(t) = {worst:e}")))
}

fn derivative_fd(rng: &mut ChaCha8Rng, model: &ProblemModel) -> Result<Check> {
    let samples = 20;
    let op = model.operator();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut u = nehari::random_bump(op, rng);
        let (_, minus) = op.project_pm(&nehari::random_bump(op, rng).scaled(-1.0))?;
        u.axpy(rng.random_range(0.0..1.0), &minus)?;
        u.scale(rng.random_range(0.5..3.0) / op.graph_norm(&u)?.max(f64::MIN_POSITIVE));
        // a component along the gradient keeps |Φ′(u)v| ≥ ½‖Φ′(u)‖
        let g = op.graph_dual(&energy::residual_l2(&u, model)?)?;
        let mut v = nehari::random_bump(op, rng).scaled(0.5);
        v.axpy(1.0 / op.graph_norm(&g)?, &g)?;
        let d = energy::derivative_along(&u, &v, model)?;
        let h = 1e-4;
        let fp = energy::energy(&u.lin_comb(1.0, &v, h)?, model)?.total;
        let fm = energy::energy(&u.lin_comb(1.0, &v, -h)?, model)?.total;
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - d).abs() / d.abs().max(1e-12));
    }
    let tol = 1e-6;
    Ok(check("derivative_fd", tol - worst, tol, samples, format!("max relative error {worst:e}")))
}

fn energy_signs(rng: &mut ChaCha8Rng, model: &ProblemModel) -> Result<Check> {
    let samples = 20;
    let op = model.operator();
    let mut max_minus_phi = f64::NEG_INFINITY;
    let mut max_gap = 0.0f64;
    let mut min_excess = f64::INFINITY;
    for _ in 0..samples {
        let v = nehari::random_minus(op, rng).scaled(10f64.powf(rng.random_range(-1.0..1.0)));
        max_minus_phi = max_minus_phi.max(energy::energy(&v, model)?.total);
        let mut u = SpinorField::random(*model.grid(), Repr::Physical, rng);
        u.scale(rng.random_range(0.1..3.0) / op.graph_norm(&u)?);
        let phi = energy::energy(&u, model)?.total;
        let d = energy::derivative_along(&u, &u, model)?;
        let scale = phi.abs().max(d.abs()).max(1.0);
        max_gap = max_gap.max(energy::nehari_identity_gap(&u, model)?.abs() / scale);
        min_excess = min_excess.min(phi - 0.5 * d);
    }
    let tol = 1e-10;
    let margin = (-max_minus_phi).min(tol - max_gap).min(min_excess + tol);
    Ok(check(
        "energy_signs",
        margin,
        tol,
        samples,
        format!("max Φ on E⁻ {max_minus_phi:e}; max scaled identity gap {max_gap:e}; min Φ − ½Φ′(u)u {min_excess:e}"),
    ))
}

fn scalar_h(rng: &mut ChaCha8Rng, nl: &Nonlinearity) -> Result<Check> {
    let samples = 10_000;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let u: algebra::Spinor = std::array::from_fn(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
        let v: algebra::Spinor = std::array::from_fn(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
        let t = rng.random_range(0.0..3.0);
        worst = worst.max(nehari::scalar_h(t, &u, &v, nl));
    }
    Ok(check("scalar_h", -worst, 0.0, samples, format!("max h = {worst:e}")))
}

fn fiber_opts(seed: u64) -> InnerOptions {
    InnerOptions { seed, max_iter: 3000, ..InnerOptions::default() }
}

fn fiber_domination(rng: &mut ChaCha8Rng, model: &ProblemModel, seed: u64) -> Result<Check> {
    let op = model.operator();
    let samples = 50;
    let w = nehari::random_bump(op, rng);
    let sol = nehari::inner_maximize(&w, model, &fiber_opts(seed), None)?;
    let u = &sol.u;
    let norm = sol.norm;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let t = if i % 5 == 0 { 1.0 } else { rng.random_range(0.0..2.0) };
        let v = nehari::random_minus(op, rng).scaled(norm * rng.random_range(0.01..0.5));
        // points t·u + v of the fiber through u
        let mut p = u.to_frequency().scaled(t);
        p.axpy(1.0, &v)?;
        worst = worst.max(energy::energy(&p, model)?.total - sol.value);
    }
    let tol = 1e-9;
    Ok(check("fiber_domination", tol - worst, tol, samples, format!("max Φ(tu + v) − Φ(u) = {worst:e}")))
}

fn fiber_uniqueness(rng: &mut ChaCha8Rng, model: &ProblemModel, seed: u64) -> Result<Check> {
    let op = model.operator();
    let fibers = 20;
    let opts = fiber_opts(seed);
    let mut worst_spread = 0.0f64;
    let mut worst_t = 0.0f64;
    let mut worst_v = 0.0f64;
    for _ in 0..fibers {
        let w = nehari::random_bump(op, rng);
        let sol = nehari::inner_maximize(&w, model, &opts, None)?;
        worst_spread = worst_spread.max(sol.spread);
        // the maximizer is on the Nehari set: its own fiber returns (1, u⁻)
        let again = nehari::inner_maximize(&sol.u, model, &opts, None)?;
        let (_, u_minus) = op.project_pm(&sol.u.to_frequency())?;
        let dv = again.point.v.lin_comb(1.0, &u_minus, -1.0)?;
        worst_t = worst_t.max((again.point.t - 1.0).abs());
        worst_v = worst_v.max(op.graph_norm(&dv)? / sol.scale());
    }
    let tol = opts.unique_tol;
    let margin = (tol - worst_spread).min(tol - worst_t).min(tol - worst_v);
    Ok(check(
        "fiber_uniqueness",
        margin,
        tol,
        fibers,
        format!("max spread {worst_spread:e}; max |t − 1| {worst_t:e}; max scaled ‖v − u⁻‖ {worst_v:e}"),
    ))
}

/// `min_{t>0} (V t^{2−q} + t^{3−q})` by a log-spaced scan and golden-section refinement.
fn cq_brute(q: f64, v: f64) -> f64 {
    let g = |s: f64| {
        let t = s.exp();
        v * t.powf(2.0 - q) + t.powf(3.0 - q)
    };
    let (lo, hi, steps) = (-30.0f64, 30.0f64, 6000);
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps).map(|i| lo + i as f64 * h).min_by(|a, b| g(*a).total_cmp(&g(*b))).expect("non-empty scan");
    let (mut a, mut b) = (best - h, best + h);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    g(0.5 * (a + b))
}

fn cq_identity(rng: &mut ChaCha8Rng) -> Result<Check> {
    let samples = 50;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let q = rng.random_range(2.05..2.95);
        let v = 10f64.powf(rng.random_range(-1.0..1.0));
        let closed = model::cq_constant(q)? * v.powf(3.0 - q);
        worst = worst.max((closed - cq_brute(q, v)).abs() / closed);
    }
    let tol = 1e-7;
    Ok(check("cq_identity", tol - worst, tol, samples, format!("max relative error {worst:e}")))
}

fn superlevel_bound(rng: &mut ChaCha8Rng, model: &ProblemModel) -> Result<Check> {
    let samples = 100;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let u = SpinorField::random(*model.grid(), Repr::Physical, rng).scaled(rng.random_range(0.1..3.0));
        let t0: f64 = rng.random_range(0.01..2.0);
        let t1 = t0 + rng.random_range(0.01..5.0);
        let lhs = t0.powi(3) * superlevel_measure(&u, t0, t1)?;
        let rhs = field::lq_norm(&u, 3.0)?.powi(3);
        worst = worst.max((lhs - rhs) / rhs);
    }
    let tol = 1e-12;
    Ok(check("superlevel_bound", tol - worst, tol, samples, format!("max (t0³|A| − ‖u‖₃³)/‖u‖₃³ = {worst:e}")))
}

fn condition_entries(model: &ProblemModel) -> Vec<Check> {
    let mut out = Vec::new();
    match model::check_f_conditions(model.nonlinearity(), 1000) {
        Ok(report) => {
            for c in report.checks {
                out.push(Check {
                    name: format!("condition_{}", c.name),
                    passed: c.passed,
                    margin: c.margin,
                    tolerance: 0.0,
                    samples: 1000,
                    detail: c.detail,
                });
            }
        }
        Err(e) => out.push(failed("condition_f", e)),
    }
    match model::check_vk_conditions(model.potentials(), model.grid(), model.mass(), 2.5) {
        Ok(report) => out.push(Check {
            name: "condition_vk0".into(),
            passed: report.vk0.passed,
            margin: report.vk0.margin,
            tolerance: 0.0,
            samples: model.grid().points(),
            detail: report.vk0.detail,
        }),
        Err(e) => out.push(failed("condition_vk0", e)),
    }
    out
}

fn describe(nl: &Nonlinearity) -> String {
    match nl {
        Nonlinearity::Power { p } => format!("power p={p}"),
        Nonlinearity::Table(_) => "table".into(),
    }
}

type Job<'a> = Box<dyn Fn() -> Result<Check> + Sync + 'a>;

/// Runs every check; deterministic for a fixed seed.
pub fn run_suite(model: &ProblemModel, seed: u64) -> DiagnosticsReport {
    let grid = *model.grid();
    let nl = model.nonlinearity();
    let a = model.mass();
    let rng_for = |i: u64| ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i));
    let jobs: Vec<(&str, Job<'_>)> = vec![
        (CANONICAL[0], Box::new(anticommutation)),
        (CANONICAL[1], Box::new(move || projector_algebra(&mut rng_for(1), a))),
        (CANONICAL[2], Box::new(move || parseval(&mut rng_for(2), model))),
        (CANONICAL[3], Box::new(move || spectral_gap(&mut rng_for(3), model))),
        (CANONICAL[4], Box::new(move || nehari_excess_sign(&mut rng_for(4), nl))),
        (CANONICAL[5], Box::new(move || derivative_fd(&mut rng_for(5), model))),
        (CANONICAL[6], Box::new(move || energy_signs(&mut rng_for(6), model))),
        (CANONICAL[7], Box::new(move || scalar_h(&mut rng_for(7), nl))),
        (CANONICAL[8], Box::new(move || fiber_domination(&mut rng_for(8), model, seed))),
        (CANONICAL[9], Box::new(move || fiber_uniqueness(&mut rng_for(9), model, seed))),
        (CANONICAL[10], Box::new(move || cq_identity(&mut rng_for(10)))),
        (CANONICAL[11], Box::new(move || superlevel_bound(&mut rng_for(11), model))),
    ];
    let mut checks: Vec<Check> = jobs
        .par_iter()
        .map(|(name, job)| job().unwrap_or_else(|e| failed(name, e)))
        .collect();
    checks.extend(condition_entries(model));
    DiagnosticsReport {
        environment: Environment {
            n: grid.n(),
            half_length: grid.half_length(),
            mass: a,
            v_max: model.potentials().v_max(),
            k_max: model.potentials().k_max(),
            nonlinearity: describe(nl),
            seed,
            rng: "ChaCha8",
        },
        checks,
    }
}

/// `∫_{|x|>r} K|u|^q / ∫ K|u|^q` over the grid.
pub fn tail_fraction(u: &SpinorField, r: f64, q: f64, model: &ProblemModel) -> Result<f64> {
    let grid = *model.grid();
    u.grid().ensure_same(&grid)?;
    if !(r >= 0.0 && r < grid.half_length()) {
        return Err(Error::InvalidArgument(format!("radius must lie in [0, L), got {r}")));
    }
    if !(2.0..=3.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("q must lie in [2, 3], got {q}")));
    }
    let u = u.to_physical();
    let k = model.k();
    let (mut outside, mut total) = (0.0, 0.0);
    for idx in 0..grid.points() {
        let w = k[idx] * field::spinor_norm_sqr(&u.at(idx)).powf(0.5 * q);
        total += w;
        if grid.radius(idx) > r {
            outside += w;
        }
    }
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("tail fraction of a field with ∫K|u|^q = 0".into()));
    }
    Ok(outside / total)
}

/// Measure of `{t0 ≤ |u| ≤ t1}`, counted in grid cells.
pub fn superlevel_measure(u: &SpinorField, t0: f64, t1: f64) -> Result<f64> {
    if !(t0 > 0.0 && t0 < t1) {
        return Err(Error::InvalidArgument(format!("need 0 < t0 < t1, got t0={t0}, t1={t1}")));
    }
    let u = u.to_physical();
    let grid = *u.grid();
    let count = (0..grid.points())
        .filter(|&idx| {
            let m = u.modulus_at(idx);
            m >= t0 && m <= t1
        })
        .count();
    Ok(count as f64 * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::model::Profile;

    #[test]
    fn superlevel_of_constant_and_zero() {
        let grid = Grid::new(8, 2.0).unwrap();
        let z = SpinorField::zeros(grid, Repr::Physical);
        assert_eq!(superlevel_measure(&z, 0.1, 1.0).unwrap(), 0.0);
        let c = SpinorField::from_fn(grid, |_| [Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_eq!(superlevel_measure(&c, 0.1, 1.0).unwrap(), grid.box_volume());
        assert!(superlevel_measure(&c, 1.0, 1.0).is_err());
    }

    #[test]
    fn tail_fraction_of_constant_is_volume_ratio() {
        let grid = Grid::new(8, 2.0).unwrap();
        let m = ProblemModel::new(grid, 1.0, Profile::Constant(0.2), Profile::Constant(1.0), Nonlinearity::power(2.5).unwrap()).unwrap();
        let c = SpinorField::from_fn(grid, |_| [Complex64::new(0.0, 0.3); 4]);
        let r = 1.2;
        let inside = (0..grid.points()).filter(|&i| grid.radius(i) <= r).count() as f64;
        let expect = 1.0 - inside / grid.points() as f64;
        assert!((tail_fraction(&c, r, 2.5, &m).unwrap() - expect).abs() < 1e-14);
        let z = SpinorField::zeros(grid, Repr::Physical);
        assert!(tail_fraction(&z, r, 2.5, &m).is_err());
        assert!(tail_fraction(&c, 2.0, 2.5, &m).is_err());
    }

    #[test]
    fn cq_brute_known_value() {
        assert!((cq_brute(2.5, 4.0) - 4.0).abs() < 1e-10);
    }
}
