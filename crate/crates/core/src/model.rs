//! Problem data: the nonlinearity `(f, F)`, the potentials `(V, K)`, and
//! sampled checkers for the structural hypotheses on both.

use serde::Serialize;

use crate::field::{DiracOperator, Grid};
use crate::{Error, Result};

/// The scalar nonlinearity `f` and its primitive `F(t) = ∫₀ᵗ f(s) s ds`.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `f(s) = s^{p−2}`, `F(t) = t^p / p`, with `f(0) = 0`.
    Power { p: f64 },
    /// Piecewise-linear `f` through `(s, f)` knots, constant beyond both ends.
    Table(TabulatedNonlinearity),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedNonlinearity {
    s: Vec<f64>,
    f: Vec<f64>,
    // F at each knot
    big_f: Vec<f64>,
}

// ∫_{s0}^{s1} (f0 + m (s − s0)) s ds
fn segment_integral(s0: f64, s1: f64, f0: f64, m: f64) -> f64 {
    let c = f0 - m * s0;
    0.5 * c * (s1 * s1 - s0 * s0) + m * (s1.powi(3) - s0.powi(3)) / 3.0
}

impl TabulatedNonlinearity {
    pub fn new(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidArgument("table nonlinearity needs at least two knots".into()));
        }
        if knots.iter().any(|(s, f)| !s.is_finite() || !f.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument("table knots must be finite with s >= 0".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("table knots must have distinct s".into()));
        }
        let (s, f): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
        let mut big_f = Vec::with_capacity(s.len());
        // constant extension below the first knot
        big_f.push(0.5 * f[0] * s[0] * s[0]);
        for i in 1..s.len() {
            let m = (f[i] - f[i - 1]) / (s[i] - s[i - 1]);
            let prev = big_f[i - 1];
            big_f.push(prev + segment_integral(s[i - 1], s[i], f[i - 1], m));
        }
        Ok(Self { s, f, big_f })
    }

    fn locate(&self, x: f64) -> usize {
        // index i with s[i] <= x < s[i+1]
        self.s.partition_point(|&v| v <= x).saturating_sub(1)
    }

    fn f(&self, x: f64) -> f64 {
        let last = self.s.len() - 1;
        if x <= self.s[0] {
            return self.f[0];
        }
        if x >= self.s[last] {
            return self.f[last];
        }
        let i = self.locate(x);
        let w = (x - self.s[i]) / (self.s[i + 1] - self.s[i]);
        self.f[i] + w * (self.f[i + 1] - self.f[i])
    }

    fn big_f(&self, x: f64) -> f64 {
        let last = self.s.len() - 1;
        if x <= self.s[0] {
            return 0.5 * self.f[0] * x * x;
        }
        if x >= self.s[last] {
            return self.big_f[last] + 0.5 * self.f[last] * (x * x - self.s[last] * self.s[last]);
        }
        let i = self.locate(x);
        let m = (self.f[i + 1] - self.f[i]) / (self.s[i + 1] - self.s[i]);
        self.big_f[i] + segment_integral(self.s[i], x, self.f[i], m)
    }
}

impl Nonlinearity {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("power exponent must be >= 2, got {p}")));
        }
        Ok(Nonlinearity::Power { p })
    }

    pub fn table(knots: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Nonlinearity::Table(TabulatedNonlinearity::new(knots)?))
    }

    /// Growth exponent `p` of the power kind.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Nonlinearity::Power { p } => Some(*p),
            Nonlinearity::Table(_) => None,
        }
    }

    /// `f(s)` for `s ≥ 0` (no argument check).
    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        match self {
            Nonlinearity::Power { p } => {
                if s > 0.0 {
                    s.powf(p - 2.0)
                } else {
                    0.0
                }
            }
            Nonlinearity::Table(t) => t.f(s),
        }
    }

    /// `F(t)` for `t ≥ 0` (no argument check).
    #[inline]
    pub fn big_f(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Power { p } => {
                if t > 0.0 {
                    t.powf(*p) / p
                } else {
                    0.0
                }
            }
            Nonlinearity::Table(tab) => tab.big_f(t),
        }
    }

    /// `(f(s), F(s))` sharing one `powf` for the power kind.
    #[inline]
    pub fn f_and_big_f(&self, s: f64) -> (f64, f64) {
        match self {
            Nonlinearity::Power { p } => {
                if s > 0.0 {
                    let f = s.powf(p - 2.0);
                    (f, f * s * s / p)
                } else {
                    (0.0, 0.0)
                }
            }
            Nonlinearity::Table(t) => (t.f(s), t.big_f(s)),
        }
    }

    pub fn f_eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("f is defined on s >= 0, got {s}")));
        }
        Ok(self.f(s))
    }

    #[allow(non_snake_case)]
    pub fn F_eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("F is defined on t >= 0, got {t}")));
        }
        Ok(self.big_f(t))
    }
}

/// Outcome of one sampled hypothesis check.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    /// Signed distance from the failure boundary; positive when passing.
    pub margin: f64,
    /// Sample point where the margin is attained.
    pub witness: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FConditionReport {
    /// `f1`, `f2`, `f3`, `f4`, `excess`, in that order.
    pub checks: Vec<ConditionCheck>,
    /// `f` strictly increasing on the samples (stronger than the nondecreasing check `f4`).
    pub f4_strict: bool,
}

impl FConditionReport {
    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const SAMPLE_MIN: f64 = 1e-8;
pub const SAMPLE_MAX: f64 = 1e4;

pub fn log_samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn log_slope(y0: f64, y1: f64, x0: f64, x1: f64) -> f64 {
    (y1 / y0).ln() / (x1 / x0).ln()
}

/// Samples `(f₁)–(f₄)` and the inequality `½f(t)t² − F(t) ≥ 0` on
/// log-spaced points of `[1e−8, 1e4]`.
///
/// The limits in `(f₁)`, `(f₂)` and `(f₃)` are judged by log-slopes over the
/// first and last four decades.
pub fn check_f_conditions(nl: &Nonlinearity, sample_count: usize) -> Result<FConditionReport> {
    if sample_count < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {sample_count}")));
    }
    let s = log_samples(SAMPLE_MIN, SAMPLE_MAX, sample_count);
    let f: Vec<f64> = s.iter().map(|&x| nl.f(x)).collect();
    let big_f: Vec<f64> = s.iter().map(|&x| nl.big_f(x)).collect();
    let lo_hi = SAMPLE_MIN * 1e4;
    let hi_lo = SAMPLE_MAX * 1e-4;

    let f1 = {
        let (a, b) = (nl.f(SAMPLE_MIN), nl.f(lo_hi));
        if a == 0.0 {
            ConditionCheck {
                name: "f1".into(),
                passed: true,
                margin: 0.0,
                witness: SAMPLE_MIN,
                detail: "f vanishes at the smallest sample".into(),
            }
        } else {
            let slope = if a > 0.0 && b > 0.0 { log_slope(a, b, SAMPLE_MIN, lo_hi) } else { 0.0 };
            ConditionCheck {
                name: "f1".into(),
                passed: slope > 1e-6 && a < b,
                margin: slope - 1e-6,
                witness: SAMPLE_MIN,
                detail: format!("f({SAMPLE_MIN:e}) = {a:.3e}, log-slope near 0 = {slope:.4}"),
            }
        }
    };

    let f2 = {
        let g = |x: f64| (nl.f(x) * x).abs();
        let slope = log_slope(g(hi_lo), g(SAMPLE_MAX), hi_lo, SAMPLE_MAX);
        let c1 = s
            .iter()
            .zip(&f)
            .filter(|(x, _)| **x <= 1.0)
            .map(|(_, fv)| fv.abs())
            .fold(0.0, f64::max);
        let margin = 2.0 - 1e-6 - slope;
        ConditionCheck {
            name: "f2".into(),
            passed: margin > 0.0 && c1.is_finite(),
            margin,
            witness: SAMPLE_MAX,
            detail: format!(
                "growth exponent of |f(s)s| at infinity = {slope:.4} (needs < 2), sup_(s<=1)|f| = {c1:.3e}"
            ),
        }
    };

    let f3 = {
        let ratio: Vec<f64> = s.iter().zip(&big_f).map(|(t, bf)| bf / (t * t)).collect();
        let mut worst = f64::INFINITY;
        let mut witness = s[0];
        for i in 1..ratio.len() {
            let step = (ratio[i] - ratio[i - 1]) / ratio[i - 1].abs().max(f64::MIN_POSITIVE);
            if step < worst {
                worst = step;
                witness = s[i];
            }
        }
        let top = nl.big_f(SAMPLE_MAX) / (SAMPLE_MAX * SAMPLE_MAX);
        let mid = nl.big_f(hi_lo) / (hi_lo * hi_lo);
        let slope = if top > 0.0 && mid > 0.0 { log_slope(mid, top, hi_lo, SAMPLE_MAX) } else { 0.0 };
        ConditionCheck {
            name: "f3".into(),
            passed: worst >= -1e-12 && slope > 1e-6,
            margin: (slope - 1e-6).min(worst + 1e-12),
            witness,
            detail: format!("F(t)/t^2 log-slope at infinity = {slope:.4}, worst relative step = {worst:.3e}"),
        }
    };

    let (f4, strict) = {
        let mut worst = f64::INFINITY;
        let mut witness = s[0];
        let mut strict = true;
        for i in 1..f.len() {
            let inc = f[i] - f[i - 1];
            if inc <= 0.0 {
                strict = false;
            }
            let rel = inc / f[i].abs().max(f[i - 1].abs()).max(f64::MIN_POSITIVE);
            if rel < worst {
                worst = rel;
                witness = s[i];
            }
        }
        (
            ConditionCheck {
                name: "f4".into(),
                passed: worst >= -1e-12,
                margin: worst + 1e-12,
                witness,
                detail: format!("smallest relative increment of f = {worst:.3e}; strict = {strict}"),
            },
            strict,
        )
    };

    let excess = {
        let mut worst = f64::INFINITY;
        let mut witness = s[0];
        for ((t, fv), bf) in s.iter().zip(&f).zip(&big_f) {
            let gap = 0.5 * fv * t * t - bf;
            let rel = gap / bf.abs().max(f64::MIN_POSITIVE);
            if rel < worst {
                worst = rel;
                witness = *t;
            }
        }
        ConditionCheck {
            name: "excess".into(),
            passed: worst >= -1e-12,
            margin: worst + 1e-12,
            witness,
            detail: format!("min relative (f(t)t^2/2 - F(t))/F(t) = {worst:.3e}"),
        }
    };

    Ok(FConditionReport {
        checks: vec![f1, f2, f3, f4, excess],
        f4_strict: strict,
    })
}

/// A radial profile for one of the potentials.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `amp / (1 + |x|²)^gamma`
    RationalDecay { amp: f64, gamma: f64 },
    /// `amp · exp(−|x| / sigma)`
    Exponential { amp: f64, sigma: f64 },
    /// Values given directly on the grid (flat index order).
    Table(Vec<f64>),
}

impl Profile {
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        let np = grid.points();
        let values = match self {
            Profile::Constant(c) => vec![*c; np],
            Profile::RationalDecay { amp, gamma } => (0..np)
                .map(|i| {
                    let r = grid.radius(i);
                    amp / (1.0 + r * r).powf(*gamma)
                })
                .collect(),
            Profile::Exponential { amp, sigma } => {
                if !(*sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!("decay length must be positive, got {sigma}")));
                }
                (0..np).map(|i| amp * (-grid.radius(i) / sigma).exp()).collect()
            }
            Profile::Table(v) => {
                if v.len() != np {
                    return Err(Error::InvalidArgument(format!(
                        "potential table has {} values, grid has {np}",
                        v.len()
                    )));
                }
                v.clone()
            }
        };
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("potential sampling"));
        }
        Ok(values)
    }
}

/// `(V, K)` sampled on a grid together with their defining profiles.
#[derive(Debug, Clone)]
pub struct PotentialPair {
    pub v_profile: Profile,
    pub k_profile: Profile,
    pub v: Vec<f64>,
    pub k: Vec<f64>,
}

impl PotentialPair {
    pub fn new(grid: &Grid, v_profile: Profile, k_profile: Profile) -> Result<Self> {
        let v = v_profile.sample(grid)?;
        let k = k_profile.sample(grid)?;
        Ok(Self { v_profile, k_profile, v, k })
    }

    pub fn v_max(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn k_max(&self) -> f64 {
        self.k.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Everything that defines one instance of the equation on one grid.
#[derive(Debug, Clone)]
pub struct ProblemModel {
    op: DiracOperator,
    potentials: PotentialPair,
    nonlinearity: Nonlinearity,
}

impl ProblemModel {
    pub fn new(grid: Grid, a: f64, v: Profile, k: Profile, nonlinearity: Nonlinearity) -> Result<Self> {
        let op = DiracOperator::new(grid, a)?;
        let potentials = PotentialPair::new(&grid, v, k)?;
        Ok(Self { op, potentials, nonlinearity })
    }

    /// Same model resampled on another grid.
    pub fn on_grid(&self, grid: Grid) -> Result<Self> {
        Self::new(
            grid,
            self.mass(),
            self.potentials.v_profile.clone(),
            self.potentials.k_profile.clone(),
            self.nonlinearity.clone(),
        )
    }

    pub fn with_nonlinearity(&self, nonlinearity: Nonlinearity) -> Self {
        Self { nonlinearity, ..self.clone() }
    }

    pub fn operator(&self) -> &DiracOperator {
        &self.op
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    pub fn mass(&self) -> f64 {
        self.op.mass()
    }

    pub fn potentials(&self) -> &PotentialPair {
        &self.potentials
    }

    pub fn v(&self) -> &[f64] {
        &self.potentials.v
    }

    pub fn k(&self) -> &[f64] {
        &self.potentials.k
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }
}

/// `C_q = (1/(3−q)) ((q−2)/(3−q))^{2−q}`, the constant with
/// `min_{t>0} (V t^{2−q} + t^{3−q}) = C_q V^{3−q}`.
pub fn cq_constant(q: f64) -> Result<f64> {
    if !(q > 2.0 && q < 3.0) {
        return Err(Error::InvalidArgument(format!("q must lie in (2, 3), got {q}")));
    }
    Ok((1.0 / (3.0 - q)) * ((q - 2.0) / (3.0 - q)).powf(2.0 - q))
}

/// Location `t* = (q−2)V/(3−q)` of that minimum.
pub fn cq_minimizer(q: f64, v: f64) -> f64 {
    (q - 2.0) * v / (3.0 - q)
}

/// Summary of a sequence sampled on shells of increasing radius.
#[derive(Debug, Clone, Serialize)]
pub struct Trend {
    pub first: f64,
    pub peak: f64,
    pub last: f64,
    /// Outermost value at most half the peak.
    pub decaying: bool,
}

impl Trend {
    fn of(values: &[f64]) -> Self {
        let first = values.first().copied().unwrap_or(0.0);
        let last = values.last().copied().unwrap_or(0.0);
        let peak = values.iter().copied().fold(0.0, f64::max);
        Self {
            first,
            peak,
            last,
            decaying: peak > 0.0 && last <= 0.5 * peak,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShellStats {
    pub r_inner: f64,
    pub r_outer: f64,
    pub points: usize,
    pub max_k_over_v: f64,
    pub max_k_over_v_pow: f64,
    pub k_integral: f64,
}

/// Sampled surrogates for `(VK₀)–(VK₃)`.
#[derive(Debug, Clone, Serialize)]
pub struct VkReport {
    pub vk0: ConditionCheck,
    /// `max_x K/V`; the `(VK₂)` surrogate.
    pub sup_k_over_v: f64,
    pub q: f64,
    pub shells: Vec<ShellStats>,
    pub k_over_v_trend: Trend,
    /// `K/V^{3−q}` by shell; the `(VK₃)` surrogate.
    pub vk3_trend: Trend,
    /// `∫_shell K`; the `(VK₁)` surrogate.
    pub k_integral_trend: Trend,
}

pub fn check_vk_conditions(pot: &PotentialPair, grid: &Grid, a: f64, q: f64) -> Result<VkReport> {
    let np = grid.points();
    if pot.v.len() != np || pot.k.len() != np {
        return Err(Error::InvalidArgument("potentials are not sampled on this grid".into()));
    }
    let v_min = pot.v.iter().copied().fold(f64::INFINITY, f64::min);
    let k_min = pot.k.iter().copied().fold(f64::INFINITY, f64::min);
    let v_max = pot.v_max();
    let margin = v_min.min(k_min).min(a - v_max);
    let vk0 = ConditionCheck {
        name: "vk0".into(),
        passed: margin > 0.0,
        margin,
        witness: v_max,
        detail: format!("min V = {v_min:.4e}, min K = {k_min:.4e}, max V = {v_max:.4e}, a = {a}"),
    };

    let sup_k_over_v = pot
        .v
        .iter()
        .zip(&pot.k)
        .map(|(v, k)| if *v > 0.0 { k / v } else { f64::INFINITY })
        .fold(0.0, f64::max);

    let n_shells = grid.n() / 2;
    let width = grid.half_length() / n_shells as f64;
    let mut shells: Vec<ShellStats> = (0..n_shells)
        .map(|i| ShellStats {
            r_inner: i as f64 * width,
            r_outer: (i + 1) as f64 * width,
            points: 0,
            max_k_over_v: 0.0,
            max_k_over_v_pow: 0.0,
            k_integral: 0.0,
        })
        .collect();
    let dv = grid.cell_volume();
    for idx in 0..np {
        let r = grid.radius(idx);
        let bin = (r / width) as usize;
        if bin >= n_shells {
            continue;
        }
        let (v, k) = (pot.v[idx], pot.k[idx]);
        let sh = &mut shells[bin];
        sh.points += 1;
        let kv = if v > 0.0 { k / v } else { f64::INFINITY };
        let kvp = if v > 0.0 { k / v.powf(3.0 - q) } else { f64::INFINITY };
        sh.max_k_over_v = sh.max_k_over_v.max(kv);
        sh.max_k_over_v_pow = sh.max_k_over_v_pow.max(kvp);
        sh.k_integral += k * dv;
    }
    shells.retain(|s| s.points > 0);
    let col = |f: fn(&ShellStats) -> f64| shells.iter().map(f).collect::<Vec<_>>();
    Ok(VkReport {
        vk0,
        sup_k_over_v,
        q,
        k_over_v_trend: Trend::of(&col(|s| s.max_k_over_v)),
        vk3_trend: Trend::of(&col(|s| s.max_k_over_v_pow)),
        k_integral_trend: Trend::of(&col(|s| s.k_integral)),
        shells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_values() {
        let nl = Nonlinearity::power(2.5).unwrap();
        assert!((nl.f_eval(4.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((nl.F_eval(1.0).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(nl.f_eval(0.0).unwrap(), 0.0);
        assert!(nl.f_eval(-1.0).is_err());
        assert!(nl.F_eval(-0.5).is_err());
        assert!(Nonlinearity::power(1.5).is_err());
        let (f, big_f) = nl.f_and_big_f(3.0);
        assert!((f - nl.f(3.0)).abs() < 1e-15 && (big_f - nl.big_f(3.0)).abs() < 1e-13);
    }

    #[test]
    fn table_primitive_matches_closed_form_for_linear_f() {
        // f(s) = s on [0, 2], so F(t) = t³/3 inside the table
        let nl = Nonlinearity::table(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        for t in [0.3, 1.0, 1.7, 2.0] {
            assert!((nl.big_f(t) - t.powi(3) / 3.0).abs() < 1e-14, "{t}");
        }
        // constant extension beyond the last knot
        assert!((nl.f(5.0) - 2.0).abs() < 1e-15);
        assert!((nl.big_f(3.0) - (8.0 / 3.0 + 0.5 * 2.0 * (9.0 - 4.0))).abs() < 1e-13);
    }

    #[test]
    fn power_2_5_passes_every_condition() {
        let rep = check_f_conditions(&Nonlinearity::power(2.5).unwrap(), 500).unwrap();
        assert!(rep.all_passed(), "{rep:?}");
        assert!(rep.f4_strict);
    }

    #[test]
    fn boundary_exponent_fails_f3() {
        let rep = check_f_conditions(&Nonlinearity::power(2.0).unwrap(), 500).unwrap();
        assert!(!rep.get("f3").unwrap().passed);
    }

    #[test]
    fn constant_f_fails_f1() {
        let nl = Nonlinearity::table(vec![(0.0, 1.0), (1.0, 1.0)]).unwrap();
        let rep = check_f_conditions(&nl, 200).unwrap();
        assert!(!rep.get("f1").unwrap().passed);
        assert!(!rep.f4_strict);
        assert!(check_f_conditions(&nl, 50).is_err());
    }

    #[test]
    fn cq_known_value_and_domain() {
        assert!((cq_constant(2.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(cq_constant(2.0).is_err());
        assert!(cq_constant(3.0).is_err());
        assert!((cq_minimizer(2.5, 4.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn constant_potentials_report() {
        let grid = Grid::new(16, 8.0).unwrap();
        let a = 1.0;
        let pot = PotentialPair::new(&grid, Profile::Constant(0.5 * a), Profile::Constant(0.5 * a)).unwrap();
        let rep = check_vk_conditions(&pot, &grid, a, 2.5).unwrap();
        assert!(rep.vk0.passed);
        assert!((rep.sup_k_over_v - 1.0).abs() < 1e-15);
        assert!(!rep.k_integral_trend.decaying);
    }

    #[test]
    fn decaying_potentials_report() {
        let grid = Grid::new(16, 8.0).unwrap();
        let a = 1.0;
        let pot = PotentialPair::new(
            &grid,
            Profile::RationalDecay { amp: 0.5 * a, gamma: 1.0 },
            Profile::Exponential { amp: 1.0, sigma: 1.0 },
        )
        .unwrap();
        let rep = check_vk_conditions(&pot, &grid, a, 2.5).unwrap();
        assert!(rep.vk0.passed);
        assert!(rep.k_over_v_trend.decaying);
        assert!(rep.vk3_trend.decaying);
        assert!(rep.k_integral_trend.decaying);
    }

    #[test]
    fn potential_at_mass_fails_vk0() {
        let grid = Grid::new(8, 4.0).unwrap();
        let pot = PotentialPair::new(&grid, Profile::Constant(1.0), Profile::Constant(1.0)).unwrap();
        assert!(!check_vk_conditions(&pot, &grid, 1.0, 2.5).unwrap().vk0.passed);
    }
}
