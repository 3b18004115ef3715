//! The generalized Nehari set and the fiber maximization that parametrizes it.
//!
//! For `u ∉ E⁻` the fiber is `Ê(u) = R⁺u⁺ ⊕ E⁻` and `γ_u(t, v) = Φ(t u⁺ + v)`.
//! `Φ` has a unique maximizer on every fiber, and that maximizer is the unique
//! point of `Ê(u)` on the Nehari set `𝓜`. [`inner_maximize`] finds it by
//! alternating a bracketed root find of `∂_t γ` with preconditioned ascent in
//! `v`; for fixed `t` the `v`-problem is strongly concave whenever `‖V‖∞ < a`.
//!
//! The reduced functional `m(w) = max_{Ê(w)} Φ` on the unit sphere of `E⁺` and
//! its Riemannian gradient are built on top of the fiber solve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{self, Spinor};
use crate::energy;
use crate::field::{self, DiracOperator, Repr, SpinorField};
use crate::model::{Nonlinearity, ProblemModel};
use crate::{Error, Result};

/// Options for [`inner_maximize`].
#[derive(Debug, Clone, Serialize)]
pub struct InnerOptions {
    /// Stationarity tolerance, relative to `max(1, ‖t u⁺ + v‖)`.
    pub tol: f64,
    /// Allowed disagreement between multi-start maximizers (same scaling).
    pub unique_tol: f64,
    /// Sufficient-increase constant of the `v` line search.
    pub armijo: f64,
    pub max_iter: usize,
    /// Total number of starts; the first is the warm start (or `(1, u⁻)`).
    pub starts: usize,
    pub seed: u64,
    /// Size of the random `E⁻` perturbations of the extra starts.
    pub perturbation: f64,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            unique_tol: 1e-6,
            armijo: 1e-4,
            max_iter: 5000,
            starts: 2,
            seed: 0,
            perturbation: 0.1,
        }
    }
}

/// A point `t u⁺ + v` of the fiber `Ê(u)`; `v` is kept in frequency representation.
#[derive(Debug, Clone)]
pub struct NehariPoint {
    pub t: f64,
    pub v: SpinorField,
}

/// Discrete membership residuals for `𝓜`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NehariResidual {
    /// `Φ′(u)u`
    pub r_self: f64,
    /// Graph-dual norm of `Φ′(u)` restricted to `E⁻`.
    pub r_minus: f64,
}

impl NehariResidual {
    pub fn passes(&self, tol: f64, scale: f64) -> bool {
        self.r_self.abs() <= tol * scale && self.r_minus <= tol * scale
    }
}

/// Result of maximizing `Φ` over one fiber.
#[derive(Debug, Clone)]
pub struct FiberSolution {
    pub point: NehariPoint,
    /// `Φ(t u⁺ + v)`
    pub value: f64,
    pub iterations: usize,
    /// `t u⁺ + v`, physical representation.
    pub u: SpinorField,
    /// `∂_t γ = Φ′(u)u⁺` at the solution.
    pub dt: f64,
    /// `‖P₋ ∇Φ(u)‖` in the graph norm.
    pub r_minus: f64,
    /// `P₊` part of the graph-dual gradient of `Φ` at `u`, frequency representation.
    pub grad_plus: SpinorField,
    /// `‖t u⁺ + v‖`
    pub norm: f64,
    /// Graph norm of the fiber direction `u⁺`.
    pub plus_norm: f64,
    /// Largest scaled distance between multi-start maximizers.
    pub spread: f64,
}

impl FiberSolution {
    pub fn scale(&self) -> f64 {
        self.norm.max(1.0)
    }

    /// Graph-dual norm of the full `Φ′(u)`.
    pub fn gradient_norm(&self, op: &DiracOperator) -> f64 {
        let gp = op.graph_inner_freq(self.grad_plus.data(), self.grad_plus.data());
        (gp + self.r_minus * self.r_minus).sqrt()
    }
}

/// Precomputed data of one fiber direction `w = u⁺`.
struct Fiber<'a> {
    model: &'a ProblemModel,
    w_freq: SpinorField,
    w_phys: SpinorField,
    w_norm2: f64,
}

/// Iterate state: `v` in both representations plus `‖v‖²`.
#[derive(Clone)]
struct State {
    t: f64,
    v_freq: SpinorField,
    v_phys: SpinorField,
    v_norm2: f64,
}

struct Gradient {
    plus: SpinorField,
    minus: SpinorField,
    minus_norm2: f64,
}

#[inline]
fn combine(np: usize, idx: usize, t: f64, w: &[num_complex::Complex64], v: &[num_complex::Complex64]) -> Spinor {
    [
        w[idx] * t + v[idx],
        w[np + idx] * t + v[np + idx],
        w[2 * np + idx] * t + v[2 * np + idx],
        w[3 * np + idx] * t + v[3 * np + idx],
    ]
}

impl<'a> Fiber<'a> {
    fn new(model: &'a ProblemModel, w_freq: SpinorField) -> Result<Self> {
        let op = model.operator();
        let w_norm2 = op.graph_inner_freq(w_freq.data(), w_freq.data());
        if !(w_norm2 > 0.0) {
            return Err(Error::DegenerateFiber);
        }
        let w_phys = w_freq.to_physical();
        Ok(Self { model, w_freq, w_phys, w_norm2 })
    }

    fn op(&self) -> &DiracOperator {
        self.model.operator()
    }

    fn state(&self, t: f64, v_freq: SpinorField) -> State {
        let v_norm2 = self.op().graph_inner_freq(v_freq.data(), v_freq.data());
        let v_phys = v_freq.to_physical();
        State { t, v_freq, v_phys, v_norm2 }
    }

    /// `Σ_x [½V|u|² − K F(|u|)] dx³` at `u = t w + v`.
    fn local_energy(&self, t: f64, v: &SpinorField) -> f64 {
        let (vv, kk, nl) = (self.model.v(), self.model.k(), self.model.nonlinearity());
        let np = v.grid().points();
        let (w, vd) = (self.w_phys.data(), v.data());
        let mut sum = 0.0;
        for idx in 0..np {
            let m2 = field::spinor_norm_sqr(&combine(np, idx, t, w, vd));
            sum += 0.5 * vv[idx] * m2 - kk[idx] * nl.big_f(m2.sqrt());
        }
        sum * v.grid().cell_volume()
    }

    /// Change of the local energy from `u = t w + v` to `u + s g`, summed
    /// pointwise from `|u + s g|² − |u|²` so that it stays accurate when the
    /// change is far below the size of the energy itself.
    fn local_increase(&self, t: f64, v: &SpinorField, s: f64, g: &SpinorField) -> f64 {
        let (vv, kk, nl) = (self.model.v(), self.model.k(), self.model.nonlinearity());
        let np = v.grid().points();
        let (w, vd, gd) = (self.w_phys.data(), v.data(), g.data());
        let mut sum = 0.0;
        for idx in 0..np {
            let u = combine(np, idx, t, w, vd);
            let gi = [gd[idx], gd[np + idx], gd[2 * np + idx], gd[3 * np + idx]];
            let m2 = field::spinor_norm_sqr(&u);
            let delta = (2.0 * s * field::spinor_re_dot(&u, &gi) + s * s * field::spinor_norm_sqr(&gi)).max(-m2);
            sum += 0.5 * vv[idx] * delta - kk[idx] * big_f_increment(nl, m2.sqrt(), delta);
        }
        sum * v.grid().cell_volume()
    }

    fn value(&self, st: &State) -> f64 {
        0.5 * st.t * st.t * self.w_norm2 - 0.5 * st.v_norm2 + self.local_energy(st.t, &st.v_phys)
    }

    /// `∂_t γ(t, v) = t‖w‖² + Re∫(V − K f(|u|)) u·w̄`.
    fn dt(&self, t: f64, v_phys: &SpinorField) -> f64 {
        let (vv, kk, nl) = (self.model.v(), self.model.k(), self.model.nonlinearity());
        let np = v_phys.grid().points();
        let (w, vd) = (self.w_phys.data(), v_phys.data());
        let mut sum = 0.0;
        for idx in 0..np {
            let s = combine(np, idx, t, w, vd);
            let m = field::spinor_norm_sqr(&s).sqrt();
            let c = vv[idx] - kk[idx] * nl.f(m);
            let wi = [w[idx], w[np + idx], w[2 * np + idx], w[3 * np + idx]];
            sum += c * field::spinor_re_dot(&s, &wi);
        }
        t * self.w_norm2 + sum * v_phys.grid().cell_volume()
    }

    /// Graph-dual gradient of `Φ` at `t w + v`, split into `E±` parts.
    fn gradient(&self, st: &State) -> Gradient {
        let (vv, kk, nl) = (self.model.v(), self.model.k(), self.model.nonlinearity());
        let op = self.op();
        let grid = *op.grid();
        let np = grid.points();
        let (w, vd) = (self.w_phys.data(), st.v_phys.data());
        let mut rho = SpinorField::zeros(grid, Repr::Physical);
        for idx in 0..np {
            let s = combine(np, idx, st.t, w, vd);
            let m = field::spinor_norm_sqr(&s).sqrt();
            let c = vv[idx] - kk[idx] * nl.f(m);
            rho.set(idx, s.map(|z| z * c));
        }
        let rho = rho.into_frequency();
        let mut plus = SpinorField::zeros(grid, Repr::Frequency);
        let mut minus = SpinorField::zeros(grid, Repr::Frequency);
        let lambda = op.lambda();
        let a = op.mass();
        for idx in 0..np {
            let l = lambda[idx];
            let r = rho.at(idx).map(|z| z / l);
            let p = algebra::apply_projector(grid.wavevector(idx), a, l, 1.0, &r);
            let wv = self.w_freq.at(idx);
            let vv = st.v_freq.at(idx);
            let mut gp = [num_complex::Complex64::new(0.0, 0.0); 4];
            let mut gm = gp;
            for c in 0..4 {
                gp[c] = wv[c] * st.t + p[c];
                gm[c] = (r[c] - p[c]) - vv[c];
            }
            plus.set(idx, gp);
            minus.set(idx, gm);
        }
        // r − P₊r leaves an E⁺ residue of size eps·‖r‖, which the large E⁺
        // derivative turns into a wrong-signed slope once g₋ is small
        op.project_in_place(&mut minus, -1.0);
        let minus_norm2 = op.graph_inner_freq(minus.data(), minus.data());
        Gradient { plus, minus, minus_norm2 }
    }

    /// Maximizes `t ↦ γ(t, v)` starting from `t0` by bracketing a sign change of
    /// `∂_t γ` (positive below, negative above) and an Illinois root find.
    fn solve_t(&self, t0: f64, v_phys: &SpinorField, tol: f64) -> Result<f64> {
        let d = |t: f64| self.dt(t, v_phys);
        let t0 = if t0 > 0.0 { t0 } else { 1.0 };
        let d0 = d(t0);
        if !d0.is_finite() {
            return Err(Error::NonFinite("fiber t-derivative"));
        }
        if d0.abs() <= tol {
            return Ok(t0);
        }
        let (mut lo, mut d_lo, mut hi, mut d_hi);
        if d0 > 0.0 {
            lo = t0;
            d_lo = d0;
            hi = t0.max(1.0) * 2.0;
            d_hi = d(hi);
            while d_hi > 0.0 {
                lo = hi;
                d_lo = d_hi;
                hi *= 2.0;
                if hi > T_CAP {
                    return Err(Error::UnboundedFiber(T_CAP));
                }
                d_hi = d(hi);
            }
        } else {
            hi = t0;
            d_hi = d0;
            lo = 0.5 * t0;
            d_lo = d(lo);
            while d_lo <= 0.0 {
                hi = lo;
                d_hi = d_lo;
                lo *= 0.5;
                if lo < 1e-14 * t0 {
                    // maximum at the boundary t = 0
                    return Ok(0.0);
                }
                d_lo = d(lo);
            }
        }
        if d_hi.abs() <= tol {
            return Ok(hi);
        }
        // Illinois variant of regula falsi
        let mut side = 0i8;
        let mut best = (lo, d_lo);
        for _ in 0..200 {
            let x = (lo * d_hi - hi * d_lo) / (d_hi - d_lo);
            let x = if x > lo && x < hi { x } else { 0.5 * (lo + hi) };
            let dx = d(x);
            if dx.abs() < best.1.abs() {
                best = (x, dx);
            }
            if dx.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(x);
            }
            if dx > 0.0 {
                lo = x;
                d_lo = dx;
                if side == 1 {
                    d_hi *= 0.5;
                }
                side = 1;
            } else {
                hi = x;
                d_hi = dx;
                if side == -1 {
                    d_lo *= 0.5;
                }
                side = -1;
            }
        }
        Ok(best.0)
    }

    fn norm(&self, st: &State) -> f64 {
        (st.t * st.t * self.w_norm2 + st.v_norm2).sqrt()
    }

    /// Alternating ascent from one start.
    fn ascend(&self, mut st: State, opts: &InnerOptions) -> Result<FiberSolution> {
        let op = self.op();
        let mut step = 1.0;
        let mut last_dt = f64::NAN;
        let mut last_rm = f64::NAN;
        for iter in 0..opts.max_iter {
            let scale = self.norm(&st).max(1.0);
            let t_tol = 0.1 * opts.tol * scale / (st.t * self.w_norm2.sqrt()).max(1.0);
            st.t = self.solve_t(st.t, &st.v_phys, t_tol)?;
            let scale = self.norm(&st).max(1.0);
            let dt = self.dt(st.t, &st.v_phys);
            let grad = self.gradient(&st);
            let r_minus = grad.minus_norm2.sqrt();
            let vg = op.graph_inner_freq(st.v_freq.data(), grad.minus.data());
            // Φ′(u)u = t ∂_t γ − ⟨g₋, v⟩
            let r_self = st.t * dt - vg;
            last_dt = dt;
            last_rm = r_minus;
            if !(r_minus.is_finite() && dt.is_finite()) {
                return Err(Error::NonFinite("fiber gradient"));
            }
            let tol = opts.tol * scale;
            if dt.abs() <= tol && r_minus <= tol && r_self.abs() <= tol {
                return Ok(self.finish(st, grad, dt, iter));
            }

            // backtracking ascent along the E⁻ gradient
            let g_phys = grad.minus.to_physical();
            let g2 = grad.minus_norm2;
            let mut s = step;
            let accepted = loop {
                let gain = -(s * vg + 0.5 * s * s * g2) + self.local_increase(st.t, &st.v_phys, s, &g_phys);
                if gain.is_finite() && gain >= opts.armijo * s * g2 {
                    break Some(s);
                }
                s *= 0.5;
                if s < 1e-12 {
                    break None;
                }
            };
            let Some(s) = accepted else {
                return Err(Error::MaxIterations {
                    iterations: iter,
                    dt,
                    r_minus,
                    best: Box::new(self.finish(st, grad, dt, iter)),
                });
            };
            st.v_freq.axpy(s, &grad.minus)?;
            st.v_phys.axpy(s, &g_phys)?;
            st.v_norm2 = op.graph_inner_freq(st.v_freq.data(), st.v_freq.data());
            step = if s == step { (2.0 * s).min(MAX_STEP) } else { s };
        }
        let grad = self.gradient(&st);
        let dt = self.dt(st.t, &st.v_phys);
        Err(Error::MaxIterations {
            iterations: opts.max_iter,
            dt: last_dt,
            r_minus: last_rm,
            best: Box::new(self.finish(st, grad, dt, opts.max_iter)),
        })
    }

    fn finish(&self, st: State, grad: Gradient, dt: f64, iterations: usize) -> FiberSolution {
        let value = self.value(&st);
        let norm = self.norm(&st);
        let mut u = self.w_phys.scaled(st.t);
        u.axpy(1.0, &st.v_phys).expect("same grid");
        FiberSolution {
            value,
            iterations,
            u,
            dt,
            r_minus: grad.minus_norm2.sqrt(),
            grad_plus: grad.plus,
            norm,
            plus_norm: self.w_norm2.sqrt(),
            spread: 0.0,
            point: NehariPoint { t: st.t, v: st.v_freq },
        }
    }
}

const T_CAP: f64 = 1048576.0; // 2^20
const MAX_STEP: f64 = 8.0;
/// `‖u⁺‖ ≤ DEGENERATE·‖u‖` counts as `u ∈ E⁻`.
const DEGENERATE: f64 = 1e-10;

fn ensure_nondegenerate(op: &DiracOperator, plus: &SpinorField, u: &SpinorField) -> Result<()> {
    let pn = op.graph_inner_freq(plus.data(), plus.data()).sqrt();
    let un = op.graph_inner_freq(u.data(), u.data()).sqrt();
    if pn > DEGENERATE * un {
        Ok(())
    } else {
        Err(Error::DegenerateFiber)
    }
}

/// `F(b) − F(a)` for `b² = a² + delta`.
fn big_f_increment(nl: &Nonlinearity, a: f64, delta: f64) -> f64 {
    let b = (a * a + delta).max(0.0).sqrt();
    let h = if a + b > 0.0 { delta / (a + b) } else { 0.0 };
    if h.abs() <= 1e-2 * a.max(b) {
        // Simpson on F(b) − F(a) = ∫_a^b f(s) s ds
        let m = a + 0.5 * h;
        h / 6.0 * (nl.f(a) * a + 4.0 * nl.f(m) * m + nl.f(b) * b)
    } else {
        nl.big_f(b) - nl.big_f(a)
    }
}

/// Random element of `E⁻` with unit graph norm.
pub fn random_minus<R: Rng + ?Sized>(op: &DiracOperator, rng: &mut R) -> SpinorField {
    let mut f = SpinorField::random(*op.grid(), Repr::Frequency, rng);
    op.project_in_place(&mut f, -1.0);
    let n = op.graph_inner_freq(f.data(), f.data()).sqrt();
    f.scale(1.0 / n);
    f
}

/// Random element of `E⁺` with unit graph norm.
pub fn random_plus<R: Rng + ?Sized>(op: &DiracOperator, rng: &mut R) -> SpinorField {
    let mut f = SpinorField::random(*op.grid(), Repr::Frequency, rng);
    op.project_in_place(&mut f, 1.0);
    let n = op.graph_inner_freq(f.data(), f.data()).sqrt();
    f.scale(1.0 / n);
    f
}

/// Localized random element of `E⁺` with unit graph norm: a Gaussian of width
/// `0.7..1.5` centred within `L/4` of the origin, times a random spinor.
pub fn random_bump<R: Rng + ?Sized>(op: &DiracOperator, rng: &mut R) -> SpinorField {
    let grid = *op.grid();
    let l = grid.half_length();
    let centre: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.25 * l..0.25 * l));
    let sigma = rng.random_range(0.7..1.5);
    let spinor: Spinor = std::array::from_fn(|_| num_complex::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let f = SpinorField::from_fn(grid, |x| {
        let r2: f64 = (0..3).map(|j| (x[j] - centre[j]).powi(2)).sum();
        let e = (-r2 / (2.0 * sigma * sigma)).exp();
        spinor.map(|z| z * e)
    });
    let mut f = f.into_frequency();
    op.project_in_place(&mut f, 1.0);
    let n = op.graph_inner_freq(f.data(), f.data()).sqrt();
    f.scale(1.0 / n);
    f
}

/// `γ_u(t, v) = Φ(t u⁺ + v)`.
pub fn gamma(u: &SpinorField, t: f64, v: &SpinorField, model: &ProblemModel) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("fiber parameter t must be >= 0, got {t}")));
    }
    let op = model.operator();
    let uf = u.to_frequency();
    let plus = op.project(&uf, 1.0)?;
    ensure_nondegenerate(op, &plus, &uf)?;
    let point = plus.lin_comb(t, &v.to_frequency(), 1.0)?;
    Ok(energy::energy(&point, model)?.total)
}

/// `∂_t γ_u(t, v) = Φ′(t u⁺ + v) u⁺`.
pub fn gamma_dt(u: &SpinorField, t: f64, v: &SpinorField, model: &ProblemModel) -> Result<f64> {
    let op = model.operator();
    let plus = op.project(&u.to_frequency(), 1.0)?;
    let point = plus.lin_comb(t, &v.to_frequency(), 1.0)?;
    energy::derivative_along(&point, &plus, model)
}

/// The scalar function from the uniqueness argument,
/// `h(t) = Re f(|u|)u·(t²u/2 − u/2 + t v) + F(|u|) − F(|t u + v|)`,
/// negative for every `t ≥ 0` when `v ≠ 0`.
pub fn scalar_h(t: f64, u4: &Spinor, v4: &Spinor, nl: &Nonlinearity) -> f64 {
    let mu = field::spinor_norm_sqr(u4).sqrt();
    let (fu, big_fu) = nl.f_and_big_f(mu);
    let mut dir = [num_complex::Complex64::new(0.0, 0.0); 4];
    let mut tuv = dir;
    for c in 0..4 {
        dir[c] = u4[c] * (0.5 * t * t - 0.5) + v4[c] * t;
        tuv[c] = u4[c] * t + v4[c];
    }
    fu * field::spinor_re_dot(u4, &dir) + big_fu - nl.big_f(field::spinor_norm_sqr(&tuv).sqrt())
}

/// Maximizes `Φ` over the fiber `Ê(u)`.
///
/// The first start is `warm_start` if given, otherwise `(1, u⁻)`; further
/// starts add random `E⁻` perturbations and rescale `t`. All starts must reach
/// the same point within `opts.unique_tol`; the highest value is returned.
pub fn inner_maximize(
    u: &SpinorField,
    model: &ProblemModel,
    opts: &InnerOptions,
    warm_start: Option<&NehariPoint>,
) -> Result<FiberSolution> {
    let op = model.operator();
    let uf = u.to_frequency();
    uf.grid().ensure_same(op.grid())?;
    let (plus, minus) = op.project_pm(&uf)?;
    ensure_nondegenerate(op, &plus, &uf)?;
    let fiber = Fiber::new(model, plus)?;

    let (t0, v0) = match warm_start {
        Some(p) => (p.t, p.v.to_frequency()),
        None => (1.0, minus),
    };
    let v0_norm = op.graph_inner_freq(v0.data(), v0.data()).sqrt();
    let starts: Vec<(f64, SpinorField)> = (0..opts.starts.max(1))
        .map(|i| {
            if i == 0 {
                return (t0, v0.clone());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64));
            let t = t0.max(1e-3) * rng.random_range(0.5..2.0);
            let mut v = v0.clone();
            let dir = random_minus(op, &mut rng);
            v.axpy(opts.perturbation * (1.0 + v0_norm), &dir).expect("same grid");
            (t, v)
        })
        .collect();

    let solutions: Vec<Result<FiberSolution>> = starts
        .into_par_iter()
        .map(|(t, v)| fiber.ascend(fiber.state(t, v), opts))
        .collect();
    let solutions = solutions.into_iter().collect::<Result<Vec<_>>>()?;

    let best_idx = solutions
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .map(|(i, _)| i)
        .expect("at least one start");
    let spread = solutions
        .iter()
        .map(|s| fiber_distance(&fiber, s, &solutions[best_idx]))
        .fold(0.0, f64::max);
    let mut best = solutions.into_iter().nth(best_idx).expect("index in range");
    best.spread = spread;
    if spread > opts.unique_tol {
        return Err(Error::FiberNotUnique { spread, tol: opts.unique_tol });
    }
    Ok(best)
}

fn fiber_distance(fiber: &Fiber<'_>, a: &FiberSolution, b: &FiberSolution) -> f64 {
    let op = fiber.op();
    let dv = a.point.v.lin_comb(1.0, &b.point.v, -1.0).expect("same grid");
    let d2 = (a.point.t - b.point.t).powi(2) * fiber.w_norm2 + op.graph_inner_freq(dv.data(), dv.data());
    d2.sqrt() / b.scale()
}

/// `(Φ′(u)u, ‖P₋∇Φ(u)‖)`.
pub fn nehari_residual(u: &SpinorField, model: &ProblemModel) -> Result<NehariResidual> {
    let op = model.operator();
    let r = energy::residual_l2(u, model)?;
    let r_self = field::l2_inner(&r, u)?;
    let mut g = op.graph_dual(&r)?;
    op.project_in_place(&mut g, -1.0);
    let r_minus = op.graph_inner_freq(g.data(), g.data()).sqrt();
    Ok(NehariResidual { r_self, r_minus })
}

/// Radius and energy floor of the mountain-pass geometry on `E⁺`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MountainPass {
    pub rho: f64,
    pub alpha: f64,
    /// Combined constant `C` in `Φ(w) ≥ (½ − Cε)‖w‖² − C A_ε ‖w‖^p`.
    pub c: f64,
    pub eps: f64,
    pub a_eps: f64,
}

/// `A_ε` such that `|f(s)s| ≤ ε s + A_ε s^{p−1}`; exact for the power kind
/// with exponent `p`, sampled otherwise.
fn a_epsilon(nl: &Nonlinearity, eps: f64, p: f64) -> f64 {
    match nl {
        Nonlinearity::Power { p: q } if (*q - p).abs() < 1e-15 => 1.0,
        _ => crate::model::log_samples(crate::model::SAMPLE_MIN, crate::model::SAMPLE_MAX, 2000)
            .into_iter()
            .map(|s| ((nl.f(s).abs() - eps) * s.powf(2.0 - p)).max(0.0))
            .fold(0.0, f64::max),
    }
}

/// `(ρ, α)` with `Φ(w) ≥ α` for every `w ∈ E⁺` with `‖w‖ = ρ`.
///
/// `emb_c` bounds the embedding `‖w‖_p ≤ emb_c ‖w‖`. With `ε = 1/(4C)` the
/// lower bound `ρ²(¼ − C A_ε ρ^{p−2})` is maximized at
/// `ρ^{p−2} = 1/(2p C A_ε)`, giving `α = ρ²(p−2)/(4p)`.
pub fn mountain_pass_constants(model: &ProblemModel, emb_c: f64, p: f64) -> Result<MountainPass> {
    if !(p > 2.0 && p < 3.0) {
        return Err(Error::InvalidArgument(format!("p must lie in (2, 3), got {p}")));
    }
    if !(emb_c > 0.0 && emb_c.is_finite()) {
        return Err(Error::InvalidArgument(format!("embedding constant must be positive, got {emb_c}")));
    }
    let k_max = model.potentials().k_max().max(0.0);
    let a = model.mass();
    let c = (k_max / (2.0 * a)).max(k_max * emb_c.powf(p) / p).max(f64::MIN_POSITIVE);
    let eps = 1.0 / (4.0 * c);
    let a_eps = a_epsilon(model.nonlinearity(), eps, p).max(f64::MIN_POSITIVE);
    let rho = (1.0 / (2.0 * p * c * a_eps)).powf(1.0 / (p - 2.0));
    let alpha = rho * rho * (0.25 - c * a_eps * rho.powf(p - 2.0));
    Ok(MountainPass { rho, alpha, c, eps, a_eps })
}

/// Lower estimate of `sup ‖w‖_p / ‖w‖` over the discrete space by nonlinear
/// power iteration `w ← G⁻¹(|w|^{p−2}w) / ‖·‖`, which increases `‖w‖_p`
/// monotonically. Starts from a point spike and from `extra_starts` random fields.
pub fn estimate_embedding_constant(op: &DiracOperator, p: f64, iterations: usize, extra_starts: usize, seed: u64) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent must be >= 2, got {p}")));
    }
    let grid = *op.grid();
    let mut starts = Vec::new();
    let mut spike = SpinorField::zeros(grid, Repr::Physical);
    spike.set(grid.flatten([grid.n() / 2; 3]), [num_complex::Complex64::new(1.0, 0.0), Default::default(), Default::default(), Default::default()]);
    starts.push(spike);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra_starts {
        starts.push(SpinorField::random(grid, Repr::Physical, &mut rng));
    }
    let ratio = |w: &SpinorField| -> Result<f64> { Ok(field::lq_norm(&w.to_physical(), p)? / op.graph_norm(w)?) };
    let mut best = 0.0f64;
    for w0 in starts {
        let mut w = w0;
        let n = op.graph_norm(&w)?;
        w.scale(1.0 / n);
        for _ in 0..iterations {
            let phys = w.to_physical();
            let mut h = SpinorField::zeros(grid, Repr::Physical);
            for idx in 0..grid.points() {
                let s = phys.at(idx);
                let m = field::spinor_norm_sqr(&s).sqrt();
                let c = if m > 0.0 { m.powf(p - 2.0) } else { 0.0 };
                h.set(idx, s.map(|z| z * c));
            }
            let mut next = op.graph_dual(&h)?;
            let n = op.graph_norm(&next)?;
            if !(n > 0.0) {
                break;
            }
            next.scale(1.0 / n);
            w = next;
        }
        best = best.max(ratio(&w)?);
    }
    Ok(best)
}

/// `m(w)` for a unit `w ∈ E⁺`, with the fiber maximizer.
pub fn reduced_value(
    w: &SpinorField,
    model: &ProblemModel,
    opts: &InnerOptions,
    warm_start: Option<&NehariPoint>,
) -> Result<(f64, FiberSolution)> {
    let sol = inner_maximize(w, model, opts, warm_start)?;
    Ok((sol.value, sol))
}

/// Riemannian gradient of `m` at the unit `w ∈ E⁺`:
/// `t_w (g₊ − ⟨g₊, w⟩ w)` where `g₊` is the `E⁺` part of the graph-dual
/// gradient of `Φ` at `t_w w + v_w`. Frequency representation.
pub fn reduced_gradient(w: &SpinorField, sol: &FiberSolution, model: &ProblemModel) -> Result<SpinorField> {
    let op = model.operator();
    let wf = w.to_frequency();
    let gp = &sol.grad_plus;
    wf.grid().ensure_same(gp.grid())?;
    let ww = op.graph_inner_freq(wf.data(), wf.data());
    let proj = op.graph_inner_freq(gp.data(), wf.data()) / ww;
    let mut out = gp.clone();
    out.axpy(-proj, &wf)?;
    out.scale(sol.point.t);
    Ok(out)
}
