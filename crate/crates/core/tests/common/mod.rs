#![allow(dead_code)]

use ndirac::algebra::{self, Spinor};
use ndirac::field::{Grid, SpinorField};
use ndirac::model::{Nonlinearity, ProblemModel, Profile};
use ndirac::Complex64;

pub fn constant_model(n: usize, half_length: f64, v: f64, k: f64, p: f64) -> ProblemModel {
    ProblemModel::new(
        Grid::new(n, half_length).unwrap(),
        1.0,
        Profile::Constant(v),
        Profile::Constant(k),
        Nonlinearity::power(p).unwrap(),
    )
    .unwrap()
}

fn unit(mut s: Spinor) -> Spinor {
    let n = s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut s {
        *z /= n;
    }
    s
}

fn dot(a: &Spinor, b: &Spinor) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// A single Fourier mode with its orthonormal `E⁺` and `E⁻` spinor bases.
pub struct SingleMode {
    pub k: [f64; 3],
    pub lambda: f64,
    pub plus: Spinor,
    pub minus: [Spinor; 2],
    pub volume: f64,
}

impl SingleMode {
    pub fn new(grid: &Grid, m: [i64; 3], a: f64) -> Self {
        let k = m.map(|mi| std::f64::consts::PI * mi as f64 / grid.half_length());
        let lambda = algebra::mode_energy(k, a);
        let e = |j: usize| -> Spinor { std::array::from_fn(|c| Complex64::from(if c == j { 1.0 } else { 0.0 })) };
        let project = |sign: f64, s: &Spinor| algebra::apply_projector(k, a, lambda, sign, s);
        let plus = (0..4)
            .map(|j| project(1.0, &e(j)))
            .max_by(|x, y| algebra_norm(x).total_cmp(&algebra_norm(y)))
            .map(unit)
            .unwrap();
        // Gram-Schmidt on the projected unit vectors
        let mut minus: Vec<Spinor> = Vec::new();
        for j in 0..4 {
            let mut s = project(-1.0, &e(j));
            for b in &minus {
                let c = dot(b, &s);
                for (z, bz) in s.iter_mut().zip(b) {
                    *z -= c * bz;
                }
            }
            if algebra_norm(&s) > 1e-6 && minus.len() < 2 {
                minus.push(unit(s));
            }
        }
        let v = (2.0 * grid.half_length()).powi(3);
        SingleMode { k, lambda, plus, minus: [minus[0], minus[1]], volume: v }
    }

    /// `e^{ik·x} σ` on the grid.
    pub fn field(&self, grid: &Grid, sigma: &Spinor) -> SpinorField {
        SpinorField::from_fn(*grid, |x| {
            let ph = Complex64::from_polar(1.0, self.k[0] * x[0] + self.k[1] * x[1] + self.k[2] * x[2]);
            sigma.map(|z| z * ph)
        })
    }

    /// `σ = t·plus + β₁ minus₁ + β₂ minus₂`.
    pub fn spinor(&self, t: f64, beta: [Complex64; 2]) -> Spinor {
        std::array::from_fn(|c| self.plus[c] * t + self.minus[0][c] * beta[0] + self.minus[1][c] * beta[1])
    }

    /// `Φ(e^{ik·x}(t·plus + β·minus))` for constant `V`, `K` and `F(s) = s^p/p`,
    /// evaluated in closed form: the modulus is constant in `x`.
    pub fn value(&self, t: f64, b: [f64; 4], v: f64, k: f64, p: f64) -> f64 {
        let plus2 = t * t;
        let minus2: f64 = b.iter().map(|x| x * x).sum();
        let s2 = plus2 + minus2;
        self.volume * (0.5 * self.lambda * (plus2 - minus2) + 0.5 * v * s2 - k * s2.powf(0.5 * p) / p)
    }
}

fn algebra_norm(s: &Spinor) -> f64 {
    s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense zooming grid search of `f` over a box; returns `(best value, argmax)`.
pub fn grid_maximize<const D: usize>(
    f: impl Fn(&[f64; D]) -> f64,
    mut lo: [f64; D],
    mut hi: [f64; D],
    points: usize,
    levels: usize,
) -> (f64, [f64; D]) {
    let mut best = (f64::NEG_INFINITY, [0.0; D]);
    for _ in 0..levels {
        let total = points.pow(D as u32);
        for flat in 0..total {
            let mut x = [0.0; D];
            let mut r = flat;
            for d in 0..D {
                let j = r % points;
                r /= points;
                x[d] = lo[d] + (hi[d] - lo[d]) * (j as f64 + 0.5) / points as f64;
            }
            let val = f(&x);
            if val > best.0 {
                best = (val, x);
            }
        }
        for d in 0..D {
            let half = 0.3 * (hi[d] - lo[d]);
            lo[d] = best.1[d] - half;
            hi[d] = best.1[d] + half;
        }
    }
    best
}
