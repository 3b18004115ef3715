//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Time limits count everything the criterion needs, including shared solves.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{constant_model, grid_maximize, SingleMode};
use ndirac::algebra::{self, Mat4, Spinor};
use ndirac::energy;
use ndirac::field::{self, Grid, Repr, SpinorField};
use ndirac::model::{self, Nonlinearity, ProblemModel};
use ndirac::nehari::{self, InnerOptions};
use ndirac::solver::{self, GroundStateResult, SolveOptions};
use ndirac::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn e2s(e: ndirac::Error) -> String {
    e.to_string()
}

fn gaussian_spinor<R: Rng>(rng: &mut R, scale: f64) -> Spinor {
    std::array::from_fn(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * scale)
}

fn default_model() -> ProblemModel {
    constant_model(16, 8.0, 0.2, 1.0, 2.5)
}

/// Localized unit-norm field in `E⁻`.
fn minus_bump<R: Rng>(model: &ProblemModel, rng: &mut R) -> SpinorField {
    let op = model.operator();
    let l = model.grid().half_length();
    let centre: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.25 * l..0.25 * l));
    let sigma = rng.random_range(0.7..1.5);
    let s = gaussian_spinor(rng, 1.0);
    let f = SpinorField::from_fn(*model.grid(), |x| {
        let r2: f64 = (0..3).map(|j| (x[j] - centre[j]).powi(2)).sum();
        let e = (-r2 / (2.0 * sigma * sigma)).exp();
        s.map(|z| z * e)
    });
    let m = op.project(&f.into_frequency(), -1.0).unwrap();
    m.scaled(1.0 / op.graph_norm(&m).unwrap())
}

fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let (alpha, beta) = algebra::dirac_matrices();
    let id = Mat4::identity();
    let mut worst = 0.0f64;
    for j in 0..3 {
        for k in 0..3 {
            let expect = if j == k { id * Complex64::from(2.0) } else { Mat4::zeros() };
            worst = worst.max(max_abs(&(alpha[j] * alpha[k] + alpha[k] * alpha[j] - expect)));
        }
        worst = worst.max(max_abs(&(alpha[j] * beta + beta * alpha[j])));
    }
    worst = worst.max(max_abs(&(beta * beta - id)));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let k: [f64; 3] = std::array::from_fn(|_| rng.random_range(-30.0..30.0));
        let a = rng.random_range(0.1..3.0);
        let sys = algebra::mode_system(k, a).map_err(e2s)?;
        let d = algebra::dirac_symbol(k, a).map_err(e2s)?;
        let lam = sys.lambda;
        let (pp, pm) = (&sys.p_plus, &sys.p_minus);
        for err in [
            max_abs(&(d * d - id * Complex64::from(lam * lam))) / (lam * lam),
            max_abs(&(pp * pp - pp)),
            max_abs(&(pm * pm - pm)),
            max_abs(&(pp * pm)),
            max_abs(&(pp + pm - id)),
            max_abs(&(pp - pp.adjoint())),
            max_abs(&(d * pp - pp * Complex64::from(lam))) / lam,
            max_abs(&(d * pm + pm * Complex64::from(lam))) / lam,
        ] {
            worst = worst.max(err);
        }
    }
    ensure(worst <= 1e-13, || format!("worst identity error {worst:.2e} > 1e-13"))?;
    Ok(format!("1000 modes, worst identity error {worst:.2e} <= 1e-13"))
}

fn criterion_2() -> Outcome {
    let m = default_model();
    let op = m.operator();
    let a = m.mass();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    for i in 0..100 {
        let u = match i % 3 {
            0 => SpinorField::random(*m.grid(), Repr::Physical, &mut rng),
            1 => nehari::random_bump(op, &mut rng).lin_comb(1.0, &minus_bump(&m, &mut rng), 0.7).map_err(e2s)?,
            // spectrally narrow fields sit close to the bound
            _ => solver::initial_guess(&m, i as u64, solver::InitialKind::Random { sigma: 4.0 }).map_err(e2s)?,
        };
        let l2 = field::l2_norm(&u);
        let g = op.graph_norm(&u).map_err(e2s)?;
        if a * l2 * l2 > g * g {
            violations += 1;
        }
        min_ratio = min_ratio.min(g * g / (a * l2 * l2));
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok(format!("100 fields, 0 violations, min ‖u‖²/(a‖u‖₂²) = {min_ratio:.6}"))
}

fn criterion_3() -> Outcome {
    let m = default_model();
    let op = m.operator();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let u = nehari::random_bump(op, &mut rng)
            .scaled(rng.random_range(0.5..4.0))
            .lin_comb(1.0, &minus_bump(&m, &mut rng), rng.random_range(0.0..1.0))
            .map_err(e2s)?;
        let v = nehari::random_bump(op, &mut rng).lin_comb(1.0, &minus_bump(&m, &mut rng), rng.random_range(-1.0..1.0)).map_err(e2s)?;
        let h = 1e-4;
        let phi = |s: f64| energy::energy(&u.lin_comb(1.0, &v, s).unwrap(), &m).unwrap().total;
        let fd = (phi(h) - phi(-h)) / (2.0 * h);
        let exact = energy::derivative_along(&u, &v, &m).map_err(e2s)?;
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    ensure(worst <= 1e-6, || format!("worst relative error {worst:.2e} > 1e-6"))?;
    Ok(format!("20 pairs at n=16, worst relative error {worst:.2e} <= 1e-6"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for p in [2.2, 2.5, 2.8] {
        let nl = Nonlinearity::power(p).map_err(e2s)?;
        for _ in 0..10_000 {
            let (su, sv) = (10f64.powf(rng.random_range(-1.0..1.0)), 10f64.powf(rng.random_range(-1.0..1.0)));
            let u = gaussian_spinor(&mut rng, su);
            let v = gaussian_spinor(&mut rng, sv);
            let t = rng.random_range(0.0..5.0);
            worst = worst.max(nehari::scalar_h(t, &u, &v, &nl));
        }
    }
    ensure(worst < 0.0, || format!("h reached {worst:.3e} >= 0"))?;
    Ok(format!("3 x 10^4 samples, p in {{2.2, 2.5, 2.8}}, max h = {worst:.3e} < 0"))
}

fn criterion_5() -> Outcome {
    let (v, k, p) = (0.2, 1.0, 2.5);
    let m = constant_model(8, 2.0, v, k, p);
    let grid = *m.grid();
    let opts = InnerOptions { tol: 1e-10, ..InnerOptions::default() };
    let mut worst = 0.0f64;
    for (i, modes) in [[0i64, 0, 0], [1, 0, -1], [2, 1, 3]].into_iter().enumerate() {
        let mode = SingleMode::new(&grid, modes, m.mass());
        let sigma = mode.spinor(0.7 + 0.3 * i as f64, [Complex64::new(0.3, -0.2), Complex64::new(0.1 * i as f64, 0.4)]);
        let u = mode.field(&grid, &sigma);
        let sol = nehari::inner_maximize(&u, &m, &opts, None).map_err(e2s)?;
        // the fiber of a single mode is spanned by t and the two E⁻ coefficients
        let amp = 0.7 + 0.3 * i as f64;
        let (brute, _) = grid_maximize(
            |x: &[f64; 5]| mode.value(amp * x[0], [x[1], x[2], x[3], x[4]], v, k, p),
            [0.0, -20.0, -20.0, -20.0, -20.0],
            [100.0, 20.0, 20.0, 20.0, 20.0],
            10,
            50,
        );
        worst = worst.max((sol.value - brute).abs());
    }
    ensure(worst <= 1e-4, || format!("worst value gap {worst:.2e} > 1e-4"))?;
    Ok(format!("3 single-mode fibers, worst |inner - brute force| = {worst:.2e} <= 1e-4"))
}

fn criterion_6(gs: &GroundStateResult, model: &ProblemModel) -> Outcome {
    let op = model.operator();
    let sol = nehari::inner_maximize(&gs.u_star, model, &InnerOptions::default(), None).map_err(e2s)?;
    let (_, minus) = op.project_pm(&gs.u_star.to_frequency()).map_err(e2s)?;
    let dv = sol.point.v.lin_comb(1.0, &minus, -1.0).map_err(e2s)?;
    let rel = op.graph_norm(&dv).map_err(e2s)? / op.graph_norm(&minus).map_err(e2s)?;
    let dt = (sol.point.t - 1.0).abs();
    ensure(dt <= 1e-4 && rel <= 1e-4, || format!("|t* - 1| = {dt:.2e}, ‖v* - u*⁻‖/‖u*⁻‖ = {rel:.2e}"))?;
    Ok(format!("|t* - 1| = {dt:.2e} <= 1e-4, ‖v* - u*⁻‖/‖u*⁻‖ = {rel:.2e} <= 1e-4"))
}

fn ground_state_opts(seed: u64) -> SolveOptions {
    // tight enough that the absolute dual residual lands below 1e-6 at ‖u*‖ ≈ 20
    SolveOptions { tol_outer: 4e-8, starts: 1, seed, ..SolveOptions::default() }
}

fn criterion_7(runs: &[GroundStateResult; 2], model: &ProblemModel) -> Outcome {
    let mut msgs = Vec::new();
    for gs in runs {
        ensure(gs.converged(), || format!("seed {}: {:?} after {} iterations", gs.seed, gs.termination, gs.iterations))?;
        let grad = energy::gradient_norm(&gs.u_star, model).map_err(e2s)?;
        ensure(grad <= 1e-6, || format!("seed {}: full-gradient residual {grad:.2e} > 1e-6", gs.seed))?;
        ensure(gs.c > 0.0, || format!("seed {}: c = {}", gs.seed, gs.c))?;
        let phi = energy::energy(&gs.u_star, model).map_err(e2s)?.total;
        let excess = phi - 0.5 * energy::derivative_along(&gs.u_star, &gs.u_star, model).map_err(e2s)?;
        ensure(excess >= 0.0, || format!("seed {}: Φ - ½Φ′u = {excess:.3e} < 0", gs.seed))?;
        msgs.push(format!("seed {} c={:.9} |Φ′|={grad:.1e} ({} it)", gs.seed, gs.c, gs.iterations));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut max_minus = f64::NEG_INFINITY;
    for i in 0..20 {
        let u = if i % 2 == 0 { minus_bump(model, &mut rng) } else { nehari::random_minus(model.operator(), &mut rng) };
        let e = energy::energy(&u.scaled(10f64.powf(rng.random_range(-2.0..2.0))), model).map_err(e2s)?.total;
        max_minus = max_minus.max(e);
    }
    ensure(max_minus < 0.0, || format!("Φ = {max_minus:.3e} >= 0 on E⁻"))?;
    let gap = (runs[0].c - runs[1].c).abs() / runs[0].c;
    ensure(gap <= 1e-4, || format!("seeds disagree: relative gap {gap:.2e} > 1e-4"))?;
    Ok(format!("{}; Φ < 0 on 20 E⁻ samples; seed gap {gap:.1e} <= 1e-4", msgs.join(", ")))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let q = rng.random_range(2.02..2.98);
        let v = 10f64.powf(rng.random_range(-2.0..1.0));
        let g = |t: f64| v * t.powf(2.0 - q) + t.powf(3.0 - q);
        let (neg_min, _) = grid_maximize(|x: &[f64; 1]| -g(x[0].exp()), [-40.0], [40.0], 2000, 30);
        let closed = model::cq_constant(q).map_err(e2s)? * v.powf(3.0 - q);
        worst = worst.max((-neg_min - closed).abs() / closed);
    }
    ensure(worst <= 1e-7, || format!("worst relative gap {worst:.2e} > 1e-7"))?;
    Ok(format!("50 (q, V) samples, worst relative gap {worst:.2e} <= 1e-7"))
}

fn criterion_9(gs: &GroundStateResult, model: &ProblemModel) -> Outcome {
    let op = model.operator();
    let (plus, minus) = op.project_pm(&gs.u_star.to_frequency()).map_err(e2s)?;
    let top = energy::energy(&gs.u_star, model).map_err(e2s)?.total;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut closest = f64::INFINITY;
    for _ in 0..50 {
        let t = rng.random_range(0.0..3.0);
        let size = gs.norm * rng.random_range(0.0..1.0);
        let v = minus.lin_comb(1.0, &nehari::random_minus(op, &mut rng), size).map_err(e2s)?;
        let z = plus.lin_comb(t, &v, 1.0).map_err(e2s)?;
        let val = energy::energy(&z, model).map_err(e2s)?.total;
        closest = closest.min(top - val);
    }
    ensure(closest >= -1e-12 * top, || format!("fiber point exceeds the maximizer by {:.3e}", -closest))?;
    let alpha = gs.alpha_numeric;
    let delta = gs.delta_numeric;
    ensure(alpha > 0.0 && delta > 0.0, || format!("α = {alpha}, δ = {delta}"))?;
    let min_m = gs.trace.iter().map(|e| e.m_value).fold(f64::INFINITY, f64::min);
    let min_plus = gs.trace.iter().map(|e| e.plus_norm).fold(f64::INFINITY, f64::min);
    ensure(min_m >= alpha, || format!("trace value {min_m} < α = {alpha}"))?;
    ensure(min_plus >= delta, || format!("trace ‖u⁺‖ {min_plus} < δ = {delta}"))?;
    Ok(format!(
        "50 fiber points below max (min gap {closest:.3e}); {} iterates: min Φ {min_m:.4} >= α {alpha:.3e}, min ‖u⁺‖ {min_plus:.4} >= δ {delta:.4}",
        gs.trace.len()
    ))
}

fn criterion_10(coarse: &GroundStateResult, model: &ProblemModel) -> Outcome {
    let opts = SolveOptions { starts: 1, seed: coarse.seed, ..SolveOptions::default() };
    let m24 = model.on_grid(Grid::new(24, 8.0).map_err(e2s)?).map_err(e2s)?;
    let r24 = solver::refine(coarse, &m24, &opts).map_err(e2s)?;
    let m32 = model.on_grid(Grid::new(32, 8.0).map_err(e2s)?).map_err(e2s)?;
    let r32 = solver::refine(&r24, &m32, &opts).map_err(e2s)?;
    ensure(r24.converged() && r32.converged(), || "refined solve did not converge".into())?;
    let (c16, c24, c32) = (coarse.c, r24.c, r32.c);
    let (g1, g2) = ((c24 - c16).abs(), (c32 - c24).abs());
    ensure(g2 < g1, || format!("gaps not decreasing: |c24 - c16| = {g1:.3e}, |c32 - c24| = {g2:.3e}"))?;
    Ok(format!("c16={c16:.6} c24={c24:.6} c32={c32:.6}, gaps {g1:.3e} > {g2:.3e}"))
}

struct Report {
    failed: usize,
}

impl Report {
    fn record(&mut self, id: usize, limit: f64, elapsed: f64, outcome: Outcome) {
        let timed = format!("{elapsed:.2} s, limit {limit} s");
        match outcome {
            Ok(msg) if elapsed < limit => println!("PASS criterion {id}: {msg} ({timed})"),
            Ok(msg) => {
                self.failed += 1;
                println!("FAIL criterion {id}: over time; {msg} ({timed})");
            }
            Err(msg) => {
                self.failed += 1;
                println!("FAIL criterion {id}: {msg} ({timed})");
            }
        }
    }

    fn run(&mut self, id: usize, limit: f64, f: impl FnOnce() -> Outcome) {
        let t = Instant::now();
        let outcome = f();
        self.record(id, limit, t.elapsed().as_secs_f64(), outcome);
    }
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    report.run(1, 1.0, criterion_1);
    report.run(2, 1.0, criterion_2);
    report.run(3, 10.0, criterion_3);
    report.run(4, 1.0, criterion_4);
    report.run(5, 30.0, criterion_5);
    report.run(8, 1.0, criterion_8);

    let model = default_model();
    let t = Instant::now();
    let solve = |seed| solver::minimize_ground_state(&model, &ground_state_opts(seed));
    let first = solve(0);
    let first_time = t.elapsed().as_secs_f64();
    let second = solve(1);
    let both_time = t.elapsed().as_secs_f64();

    match &first {
        Ok(gs) => {
            let t = Instant::now();
            let out = criterion_6(gs, &model);
            report.record(6, 60.0, first_time + t.elapsed().as_secs_f64(), out);
        }
        Err(e) => report.record(6, 60.0, first_time, Err(format!("ground-state solve failed: {e}"))),
    }
    let t = Instant::now();
    let out = match (&first, &second) {
        (Ok(a), Ok(b)) => criterion_7(&[a.clone(), b.clone()], &model),
        (Err(e), _) | (_, Err(e)) => Err(format!("ground-state solve failed: {e}")),
    };
    report.record(7, 300.0, both_time + t.elapsed().as_secs_f64(), out);
    match &first {
        Ok(gs) => {
            let t = Instant::now();
            let out = criterion_9(gs, &model);
            report.record(9, 300.0, first_time + t.elapsed().as_secs_f64(), out);
            let t = Instant::now();
            let out = criterion_10(gs, &model);
            report.record(10, 1200.0, first_time + t.elapsed().as_secs_f64(), out);
        }
        Err(e) => {
            report.record(9, 300.0, first_time, Err(format!("ground-state solve failed: {e}")));
            report.record(10, 1200.0, first_time, Err(format!("ground-state solve failed: {e}")));
        }
    }

    if report.failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", report.failed);
        ExitCode::FAILURE
    }
}
