//! Ground states by descent of the reduced functional on the unit sphere of `E⁺`.
//!
//! Each sphere point `w` is lifted to the Nehari set by [`inner_maximize`];
//! steps are `w ← (w + s d)/‖·‖` along a limited-memory quasi-Newton
//! direction `d` in the graph inner product (plain `−∇m` with
//! Barzilai–Borwein lengths when `memory = 0`), with Armijo backtracking.
//! Stopping uses the full graph-dual gradient of `Φ`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::Spinor;
use crate::energy;
use crate::field::{self, Grid, Repr, SpinorField};
use crate::model::{self, ProblemModel};
use crate::nehari::{self, FiberSolution, InnerOptions, NehariPoint, NehariResidual};
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    /// `e^{−|x|²/2σ²}` times a constant spinor; a random unit spinor when `None`.
    GaussianBump { sigma: f64, spinor: Option<Spinor> },
    /// Random Fourier coefficients with a Gaussian spectral envelope of width `1/sigma`.
    Random { sigma: f64 },
}

impl Default for InitialKind {
    fn default() -> Self {
        InitialKind::GaussianBump { sigma: 1.0, spinor: None }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol_outer: f64,
    pub max_outer: usize,
    pub step0: f64,
    pub armijo_c: f64,
    pub starts: usize,
    pub seed: u64,
    pub initial: InitialKind,
    pub inner: InnerOptions,
    /// Skip the `(VK₀)` and `(f)` pre-checks.
    pub force: bool,
    /// Exponent for the mountain-pass floor; defaults to the power exponent, or 2.5.
    pub floor_exponent: Option<f64>,
    /// Curvature pairs kept for the quasi-Newton direction; 0 gives plain
    /// gradient steps with Barzilai–Borwein lengths.
    pub memory: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_outer: 1e-6,
            max_outer: 500,
            step0: 1.0,
            armijo_c: 1e-4,
            starts: 3,
            seed: 0,
            initial: InitialKind::default(),
            inner: InnerOptions::default(),
            force: false,
            floor_exponent: None,
            memory: 8,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {x}")))
            }
        };
        positive("tol_outer", self.tol_outer)?;
        positive("step0", self.step0)?;
        positive("armijo_c", self.armijo_c)?;
        positive("inner tol", self.inner.tol)?;
        positive("unique_tol", self.inner.unique_tol)?;
        if self.max_outer == 0 || self.starts == 0 || self.inner.max_iter == 0 {
            return Err(Error::InvalidArgument("max_outer, starts and inner max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// Backtracking fell below `s = 1e−12`.
    NoDescent,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub m_value: f64,
    /// Full graph-dual gradient norm of `Φ` at `u_w`.
    pub residual: f64,
    /// Step accepted after this point (0 on the last entry).
    pub step: f64,
    pub inner_iters: usize,
    /// `‖u⁺‖ = t_w`
    pub plus_norm: f64,
    pub residual_self: f64,
    pub residual_minus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StartSummary {
    pub seed: u64,
    pub c: f64,
    pub residual: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug, Clone, Serialize)]
pub struct Refinement {
    pub coarse_n: usize,
    pub c_coarse: f64,
    pub delta_c: f64,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    /// Physical representation.
    pub u_star: SpinorField,
    /// Unit `E⁺` direction, frequency representation.
    pub w: SpinorField,
    pub point: NehariPoint,
    pub c: f64,
    /// `‖u*‖`
    pub norm: f64,
    pub residuals: NehariResidual,
    pub residual_full: f64,
    pub trace: Vec<TraceEntry>,
    pub termination: Termination,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub wall_time: f64,
    pub seed: u64,
    /// Fiber parameter from re-projecting `u_star` without a warm start.
    pub t_check: f64,
    /// `‖v_check − u*⁻‖ / ‖u*⁻‖`
    pub v_check_rel: f64,
    /// Multi-start spread of that re-projection.
    pub spread: f64,
    pub alpha_numeric: f64,
    pub delta_numeric: f64,
    pub rho_numeric: f64,
    pub embedding_constant: f64,
    pub starts: Vec<StartSummary>,
    pub refinement: Option<Refinement>,
}

impl GroundStateResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn scale(&self) -> f64 {
        self.norm.max(1.0)
    }
}

fn unit_spinor<R: Rng + ?Sized>(rng: &mut R) -> Spinor {
    let mut s: Spinor = std::array::from_fn(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let n = field::spinor_norm_sqr(&s).sqrt();
    for z in &mut s {
        *z /= n;
    }
    s
}

/// Unit-graph-norm `E⁺` starting direction.
pub fn initial_guess(model: &ProblemModel, seed: u64, kind: InitialKind) -> Result<SpinorField> {
    let op = model.operator();
    let grid = *op.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..16 {
        let mut f = match kind {
            InitialKind::GaussianBump { sigma, spinor } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!("bump width must be positive, got {sigma}")));
                }
                let s = match spinor {
                    Some(s) if attempt == 0 => s,
                    _ => unit_spinor(&mut rng),
                };
                SpinorField::from_fn(grid, |x| {
                    let e = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * sigma * sigma)).exp();
                    s.map(|z| z * e)
                })
                .into_frequency()
            }
            InitialKind::Random { sigma } => {
                let mut f = SpinorField::random(grid, Repr::Frequency, &mut rng);
                let np = grid.points();
                let data = f.data_mut();
                for idx in 0..np {
                    let k = grid.wavevector(idx);
                    let e = (-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * sigma * sigma / 2.0).exp();
                    for c in 0..4 {
                        data[c * np + idx] *= e;
                    }
                }
                f
            }
        };
        op.project_in_place(&mut f, 1.0);
        let n = op.graph_norm(&f)?;
        if n > 1e-12 {
            f.scale(1.0 / n);
            return Ok(f);
        }
    }
    Err(Error::DegenerateFiber)
}

/// `δ` in `‖u⁺‖ ≥ δ` on the Nehari set, from `Φ(u) ≤ ½(1 + V∞/a)‖u⁺‖²` and `Φ ≥ α` there.
pub fn delta_numeric(alpha: f64, model: &ProblemModel) -> f64 {
    let vmax = model.potentials().v_max().max(0.0);
    (2.0 * alpha / (1.0 + vmax / model.mass())).sqrt()
}

/// Rejects models failing `(VK₀)` or the `(f)` conditions.
pub fn precheck(model: &ProblemModel) -> Result<()> {
    let vk = model::check_vk_conditions(model.potentials(), model.grid(), model.mass(), 2.5)?;
    if !vk.vk0.passed {
        return Err(Error::ModelRejected(format!("(VK0): {}", vk.vk0.detail)));
    }
    let fr = model::check_f_conditions(model.nonlinearity(), 1000)?;
    if let Some(c) = fr.checks.iter().find(|c| !c.passed) {
        return Err(Error::ModelRejected(format!("({}): {}", c.name, c.detail)));
    }
    Ok(())
}

struct Floor {
    rho: f64,
    alpha: f64,
    delta: f64,
    emb: f64,
}

fn floor(model: &ProblemModel, opts: &SolveOptions) -> Result<Floor> {
    let p = opts.floor_exponent.or(model.nonlinearity().exponent()).unwrap_or(2.5);
    let emb = nehari::estimate_embedding_constant(model.operator(), p, 60, 2, opts.seed)?;
    let mp = nehari::mountain_pass_constants(model, emb, p)?;
    Ok(Floor { rho: mp.rho, alpha: mp.alpha, delta: delta_numeric(mp.alpha, model), emb })
}

struct StartOutcome {
    seed: u64,
    w: SpinorField,
    sol: FiberSolution,
    residual: f64,
    trace: Vec<TraceEntry>,
    termination: Termination,
    iterations: usize,
    inner_iterations: usize,
}

fn line_opts(opts: &SolveOptions) -> InnerOptions {
    InnerOptions { starts: 1, ..opts.inner.clone() }
}

fn tangent_residual(model: &ProblemModel, sol: &FiberSolution) -> Result<(f64, NehariResidual)> {
    let full = sol.gradient_norm(model.operator());
    let res = nehari::nehari_residual(&sol.u, model)?;
    Ok((full, res))
}

fn descend(model: &ProblemModel, opts: &SolveOptions, seed: u64, w0: SpinorField) -> Result<StartOutcome> {
    let op = model.operator();
    let inner = line_opts(opts);
    let mut w = w0;
    let mut sol = nehari::inner_maximize(&w, model, &inner, None)?;
    let mut inner_total = sol.iterations;
    let mut trace = Vec::new();
    let mut prev: Option<(SpinorField, SpinorField)> = None;
    let mut history: Vec<(SpinorField, SpinorField, f64)> = Vec::new();
    let mut step = opts.step0;
    let mut termination = Termination::MaxIterations;
    let mut iter = 0;
    let mut residual;
    let mut inner_here = sol.iterations;
    loop {
        let (full, res) = tangent_residual(model, &sol)?;
        residual = full;
        trace.push(TraceEntry {
            iter,
            m_value: sol.value,
            residual: full,
            step: 0.0,
            inner_iters: inner_here,
            plus_norm: sol.point.t,
            residual_self: res.r_self,
            residual_minus: res.r_minus,
        });
        if full <= opts.tol_outer * sol.scale() {
            termination = Termination::Converged;
            break;
        }
        if iter >= opts.max_outer {
            break;
        }
        let grad = nehari::reduced_gradient(&w, &sol, model)?;
        let g2 = op.graph_inner_freq(grad.data(), grad.data());
        if let Some((pw, pg)) = &prev {
            let dw = w.lin_comb(1.0, pw, -1.0)?;
            let dg = grad.lin_comb(1.0, pg, -1.0)?;
            let sy = op.graph_inner_freq(dw.data(), dg.data());
            let ss = op.graph_inner_freq(dw.data(), dw.data());
            let yy = op.graph_inner_freq(dg.data(), dg.data());
            // Barzilai–Borwein length for plain gradient steps
            step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e6) } else { (2.0 * step).min(1e6) };
            if opts.memory > 0 && sy > 1e-12 * (ss * yy).sqrt() {
                if history.len() == opts.memory {
                    history.remove(0);
                }
                history.push((dw, dg, 1.0 / sy));
            }
        }
        let (dir, slope, s0) = match quasi_newton(op, &history, &grad, &w) {
            Some((d, slope)) => (d, slope, 1.0),
            None => {
                history.clear();
                (grad.scaled(-1.0), -g2, step)
            }
        };

        let mut s = s0;
        let accepted = loop {
            let mut trial = w.clone();
            trial.axpy(s, &dir)?;
            let n = op.graph_norm(&trial)?;
            trial.scale(1.0 / n);
            match nehari::inner_maximize(&trial, model, &inner, Some(&sol.point)) {
                Ok(ts) => {
                    inner_total += ts.iterations;
                    if ts.value <= sol.value + opts.armijo_c * s * slope {
                        break Some((s, trial, ts));
                    }
                }
                Err(Error::MaxIterations { iterations, .. }) => inner_total += iterations,
                Err(Error::UnboundedFiber(_)) | Err(Error::DegenerateFiber) => {}
                Err(e) => return Err(e),
            }
            s *= 0.5;
            if s < 1e-12 {
                break None;
            }
        };
        let Some((s, trial, ts)) = accepted else {
            termination = Termination::NoDescent;
            break;
        };
        trace.last_mut().expect("entry pushed").step = s;
        inner_here = ts.iterations;
        prev = Some((std::mem::replace(&mut w, trial), grad));
        sol = ts;
        if history.is_empty() {
            step = s;
        }
        iter += 1;
    }
    Ok(StartOutcome {
        seed,
        w,
        sol,
        residual,
        trace,
        termination,
        iterations: iter,
        inner_iterations: inner_total,
    })
}

/// Two-loop recursion in the graph inner product, projected onto the tangent
/// space at `w`. `None` when there is no history or the result is not a
/// descent direction.
fn quasi_newton(
    op: &crate::field::DiracOperator,
    history: &[(SpinorField, SpinorField, f64)],
    grad: &SpinorField,
    w: &SpinorField,
) -> Option<(SpinorField, f64)> {
    let (s_last, y_last, _) = history.last()?;
    let ip = |a: &SpinorField, b: &SpinorField| op.graph_inner_freq(a.data(), b.data());
    let mut q = grad.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * ip(s, &q);
        q.axpy(-a, y).ok()?;
        alphas.push(a);
    }
    q.scale(ip(s_last, y_last) / ip(y_last, y_last));
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * ip(y, &q);
        q.axpy(a - b, s).ok()?;
    }
    q.axpy(-ip(&q, w) / ip(w, w), w).ok()?;
    q.scale(-1.0);
    let slope = ip(grad, &q);
    let g2 = ip(grad, grad);
    let qq = ip(&q, &q);
    (slope < -1e-8 * (g2 * qq).sqrt()).then_some((q, slope))
}

fn start_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Selection among starts: converged ones first, then the lowest energy;
/// energies within `1e−8` relative count as tied and are separated by the
/// lower residual, then the lower energy.
fn select(outcomes: &[StartOutcome]) -> usize {
    let any_conv = outcomes.iter().any(|o| o.termination == Termination::Converged);
    let pool: Vec<usize> = (0..outcomes.len())
        .filter(|&i| !any_conv || outcomes[i].termination == Termination::Converged)
        .collect();
    let c_min = pool.iter().map(|&i| outcomes[i].sol.value).fold(f64::INFINITY, f64::min);
    let tie = 1e-8 * c_min.abs().max(f64::MIN_POSITIVE);
    pool.into_iter()
        .filter(|&i| outcomes[i].sol.value - c_min <= tie)
        .min_by(|&a, &b| {
            outcomes[a]
                .residual
                .total_cmp(&outcomes[b].residual)
                .then(outcomes[a].sol.value.total_cmp(&outcomes[b].sol.value))
        })
        .expect("at least one start")
}

fn assemble(
    model: &ProblemModel,
    opts: &SolveOptions,
    outcomes: Vec<StartOutcome>,
    started: Instant,
    floor: Floor,
) -> Result<GroundStateResult> {
    let op = model.operator();
    let best = select(&outcomes);
    let starts = outcomes
        .iter()
        .map(|o| StartSummary {
            seed: o.seed,
            c: o.sol.value,
            residual: o.residual,
            iterations: o.iterations,
            termination: o.termination,
        })
        .collect();
    let o = outcomes.into_iter().nth(best).expect("index in range");
    let u_star = o.sol.u.clone();
    let residuals = nehari::nehari_residual(&u_star, model)?;
    let c = energy::energy(&u_star, model)?.total;

    // self-consistency: re-project u* onto its own fiber from a cold start
    let check = nehari::inner_maximize(&u_star, model, &opts.inner, None)?;
    let (_, u_minus) = op.project_pm(&u_star.to_frequency())?;
    let dv = check.point.v.lin_comb(1.0, &u_minus, -1.0)?;
    let um = op.graph_norm(&u_minus)?;
    let v_check_rel = if um > 0.0 { op.graph_norm(&dv)? / um } else { op.graph_norm(&dv)? };

    Ok(GroundStateResult {
        u_star,
        w: o.w,
        point: o.sol.point.clone(),
        c,
        norm: o.sol.norm,
        residuals,
        residual_full: o.residual,
        trace: o.trace,
        termination: o.termination,
        iterations: o.iterations,
        inner_iterations: o.inner_iterations,
        wall_time: started.elapsed().as_secs_f64(),
        seed: o.seed,
        t_check: check.point.t,
        v_check_rel,
        spread: check.spread,
        alpha_numeric: floor.alpha,
        delta_numeric: floor.delta,
        rho_numeric: floor.rho,
        embedding_constant: floor.emb,
        starts,
        refinement: None,
    })
}

/// Minimizes the reduced functional from `opts.starts` independent starts.
pub fn minimize_ground_state(model: &ProblemModel, opts: &SolveOptions) -> Result<GroundStateResult> {
    opts.validate()?;
    if !opts.force {
        precheck(model)?;
    }
    let started = Instant::now();
    let fl = floor(model, opts)?;
    let outcomes: Vec<Result<StartOutcome>> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let seed = start_seed(opts.seed, i);
            let w0 = initial_guess(model, seed, opts.initial)?;
            descend(model, opts, seed, w0)
        })
        .collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    assemble(model, opts, outcomes, started, fl)
}

/// Spectral interpolation of a field onto a finer grid with the same box:
/// the coefficients at shared mode numbers are copied, the rest are zero.
pub fn interpolate(u: &SpinorField, fine: Grid) -> Result<SpinorField> {
    let coarse = *u.grid();
    if fine.half_length() != coarse.half_length() || fine.n() <= coarse.n() {
        return Err(Error::InvalidGrid(format!(
            "refinement needs a strictly finer grid on the same box, got n {} -> {}, L {} -> {}",
            coarse.n(),
            fine.n(),
            coarse.half_length(),
            fine.half_length()
        )));
    }
    let uf = u.to_frequency();
    let mut out = SpinorField::zeros(fine, Repr::Frequency);
    let (nc, nf) = (coarse.points(), fine.points());
    let src = uf.data();
    let dst = out.data_mut();
    for idx in 0..nc {
        let [jx, jy, jz] = coarse.unflatten(idx);
        let m = [coarse.mode_number(jx), coarse.mode_number(jy), coarse.mode_number(jz)];
        let j = m.map(|mi| fine.mode_index(mi).expect("coarse modes exist on the finer grid"));
        let fidx = fine.flatten(j);
        for c in 0..4 {
            dst[c * nf + fidx] = src[c * nc + idx];
        }
    }
    Ok(out)
}

/// Re-minimizes on `fine_model`'s grid from the interpolated coarse state.
pub fn refine(result: &GroundStateResult, fine_model: &ProblemModel, opts: &SolveOptions) -> Result<GroundStateResult> {
    opts.validate()?;
    let started = Instant::now();
    let coarse_n = result.u_star.grid().n();
    let mut w0 = interpolate(&result.u_star, *fine_model.grid())?;
    let op = fine_model.operator();
    op.project_in_place(&mut w0, 1.0);
    let n = op.graph_norm(&w0)?;
    if !(n > 0.0) {
        return Err(Error::DegenerateFiber);
    }
    w0.scale(1.0 / n);
    let fl = floor(fine_model, opts)?;
    let outcome = descend(fine_model, opts, result.seed, w0)?;
    let mut out = assemble(fine_model, opts, vec![outcome], started, fl)?;
    out.refinement = Some(Refinement { coarse_n, c_coarse: result.c, delta_c: out.c - result.c });
    Ok(out)
}
