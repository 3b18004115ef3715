//! Spinor fields on the periodic box `[−L, L)³` and their spectral calculus.
//!
//! Storage is component-major: component `c ∈ 0..4` occupies
//! `data[c·n³ .. (c+1)·n³]`, and within a component the flat index is
//! `(z·n + y)·n + x` (x fastest). Frequency index `j` maps to the integer
//! mode `m = j` for `j < n/2` and `m = j − n` otherwise, so `m ∈ [−n/2, n/2)`
//! and `k = π m / L`.
//!
//! The DFT is scaled so that `Σ_x |u(x)|² dx³ = Σ_k |û(k)|²`; every norm is
//! therefore the same number in either representation.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{self, Spinor};
use crate::fft;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Uniform periodic grid with `n` points per axis on `[−L, L)³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    half_length: f64,
}

impl Grid {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        Ok(Self { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Number of grid points `n³`.
    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(3)
    }

    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_length).powi(3)
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    /// Splits a flat index into `(x, y, z)` axis indices.
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    #[inline]
    pub fn flatten(&self, ijk: [usize; 3]) -> usize {
        (ijk[2] * self.n + ijk[1]) * self.n + ijk[0]
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        self.unflatten(idx).map(|j| self.coord(j))
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let p = self.position(idx);
        (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
    }

    /// Integer mode number of axis index `j`.
    #[inline]
    pub fn mode_number(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Axis index of an integer mode number, if representable on this grid.
    pub fn mode_index(&self, m: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if m < -half || m >= half {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.n as i64) as usize)
        }
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let scale = std::f64::consts::PI / self.half_length;
        self.unflatten(idx)
            .map(|j| self.mode_number(j) as f64 * scale)
    }

    pub fn largest_wavenumber(&self) -> f64 {
        std::f64::consts::PI * (self.n / 2) as f64 / self.half_length
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_n: self.n,
                left_l: self.half_length,
                right_n: other.n,
                right_l: other.half_length,
            })
        }
    }
}

/// Which representation a field's data is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Repr {
    Physical,
    Frequency,
}

impl Repr {
    pub fn name(self) -> &'static str {
        match self {
            Repr::Physical => "physical",
            Repr::Frequency => "frequency",
        }
    }
}

/// A C⁴-valued field on a [`Grid`], in physical or frequency representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    repr: Repr,
    data: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(grid: Grid, repr: Repr) -> Self {
        Self {
            grid,
            repr,
            data: vec![ZERO; 4 * grid.points()],
        }
    }

    pub fn from_data(grid: Grid, repr: Repr, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != 4 * grid.points() {
            return Err(Error::InvalidArgument(format!(
                "field data has {} values, expected {}",
                data.len(),
                4 * grid.points()
            )));
        }
        Ok(Self { grid, repr, data })
    }

    /// Physical field sampled from `f(position)`.
    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 3]) -> Spinor) -> Self {
        let mut out = Self::zeros(grid, Repr::Physical);
        for idx in 0..grid.points() {
            out.set(idx, f(grid.position(idx)));
        }
        out
    }

    /// Independent standard complex Gaussian entries, in the given representation.
    pub fn random<R: Rng + ?Sized>(grid: Grid, repr: Repr, rng: &mut R) -> Self {
        let data = (0..4 * grid.points())
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        Self { grid, repr, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Spinor {
        let np = self.grid.points();
        [
            self.data[idx],
            self.data[np + idx],
            self.data[2 * np + idx],
            self.data[3 * np + idx],
        ]
    }

    #[inline]
    pub fn set(&mut self, idx: usize, s: Spinor) {
        let np = self.grid.points();
        for (c, v) in s.into_iter().enumerate() {
            self.data[c * np + idx] = v;
        }
    }

    /// C⁴ Euclidean modulus `|u(x)|` at a grid point (physical representation).
    #[inline]
    pub fn modulus_at(&self, idx: usize) -> f64 {
        spinor_norm_sqr(&self.at(idx)).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub(crate) fn ensure_repr(&self, expected: Repr) -> Result<()> {
        if self.repr == expected {
            Ok(())
        } else {
            Err(Error::ReprMismatch {
                expected: expected.name(),
                found: self.repr.name(),
            })
        }
    }

    fn ensure_compatible(&self, other: &SpinorField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.repr != other.repr {
            return Err(Error::ReprMismatch {
                expected: self.repr.name(),
                found: other.repr.name(),
            });
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale(factor);
        out
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpinorField) -> Result<()> {
        self.ensure_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * alpha;
        }
        Ok(())
    }

    /// `alpha · self + beta · other` as a new field.
    pub fn lin_comb(&self, alpha: f64, other: &SpinorField, beta: f64) -> Result<Self> {
        self.ensure_compatible(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a * alpha + *b * beta)
            .collect();
        Ok(Self {
            grid: self.grid,
            repr: self.repr,
            data,
        })
    }

    pub fn to_frequency(&self) -> SpinorField {
        match self.repr {
            Repr::Frequency => self.clone(),
            Repr::Physical => transform(self.clone(), Repr::Frequency),
        }
    }

    pub fn to_physical(&self) -> SpinorField {
        match self.repr {
            Repr::Physical => self.clone(),
            Repr::Frequency => transform(self.clone(), Repr::Physical),
        }
    }

    pub fn into_frequency(self) -> SpinorField {
        match self.repr {
            Repr::Frequency => self,
            Repr::Physical => transform(self, Repr::Frequency),
        }
    }

    pub fn into_physical(self) -> SpinorField {
        match self.repr {
            Repr::Physical => self,
            Repr::Frequency => transform(self, Repr::Physical),
        }
    }

    /// Largest entrywise difference `max |self − other|`, same grid and representation.
    pub fn max_abs_diff(&self, other: &SpinorField) -> Result<f64> {
        self.ensure_compatible(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

#[inline]
pub fn spinor_norm_sqr(s: &Spinor) -> f64 {
    s.iter().map(|z| z.norm_sqr()).sum()
}

/// `Re(u·v)` with `u·v = Σ uᵢ v̄ᵢ`.
#[inline]
pub fn spinor_re_dot(u: &Spinor, v: &Spinor) -> f64 {
    u.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

fn transform(mut field: SpinorField, target: Repr) -> SpinorField {
    let grid = field.grid;
    let np = grid.points();
    let plans = fft::plans(grid.n());
    let inverse = target == Repr::Physical;
    let forward_scale = (grid.cell_volume() / np as f64).sqrt();
    let scale = if inverse {
        1.0 / (np as f64 * forward_scale)
    } else {
        forward_scale
    };
    for block in field.data.chunks_mut(np) {
        plans.transform(block, inverse);
        for z in block.iter_mut() {
            *z *= scale;
        }
    }
    field.repr = target;
    field
}

/// Forward DFT; the input must be in physical representation.
pub fn dft_forward(u: &SpinorField) -> Result<SpinorField> {
    u.ensure_repr(Repr::Physical)?;
    Ok(transform(u.clone(), Repr::Frequency))
}

/// Inverse DFT; the input must be in frequency representation.
pub fn dft_inverse(u: &SpinorField) -> Result<SpinorField> {
    u.ensure_repr(Repr::Frequency)?;
    Ok(transform(u.clone(), Repr::Physical))
}

/// L² inner product `Re ∫ u·v̄`; representation-independent.
pub fn l2_inner(u: &SpinorField, v: &SpinorField) -> Result<f64> {
    u.grid.ensure_same(&v.grid)?;
    let weight = match u.repr {
        Repr::Physical => u.grid.cell_volume(),
        Repr::Frequency => 1.0,
    };
    let sum = if u.repr == v.repr {
        re_dot_sum(&u.data, &v.data)
    } else {
        let v = match u.repr {
            Repr::Physical => v.to_physical(),
            Repr::Frequency => v.to_frequency(),
        };
        re_dot_sum(&u.data, &v.data)
    };
    Ok(sum * weight)
}

pub fn l2_norm(u: &SpinorField) -> f64 {
    l2_inner(u, u).expect("same field").sqrt()
}

fn re_dot_sum(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// `(∫ |u|^q)^{1/q}` over the box; physical representation, `q ∈ [1, ∞)`.
pub fn lq_norm(u: &SpinorField, q: f64) -> Result<f64> {
    u.ensure_repr(Repr::Physical)?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("L^q exponent must lie in [1, inf), got {q}")));
    }
    let sum: f64 = (0..u.grid.points())
        .map(|idx| spinor_norm_sqr(&u.at(idx)).powf(0.5 * q))
        .sum();
    Ok((sum * u.grid.cell_volume()).powf(1.0 / q))
}

/// The free Dirac operator `−iα·∇ + aβ` on a fixed grid, diagonal in Fourier modes.
#[derive(Debug, Clone)]
pub struct DiracOperator {
    grid: Grid,
    a: f64,
    lambda: Vec<f64>,
}

impl DiracOperator {
    pub fn new(grid: Grid, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidMass(a));
        }
        let lambda = (0..grid.points())
            .map(|idx| algebra::mode_energy(grid.wavevector(idx), a))
            .collect();
        Ok(Self { grid, a, lambda })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mass(&self) -> f64 {
        self.a
    }

    /// `λ(k)` for every mode, in flat index order.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    fn freq(&self, u: &SpinorField) -> Result<SpinorField> {
        self.grid.ensure_same(&u.grid)?;
        Ok(u.to_frequency())
    }

    fn restore(out: SpinorField, repr: Repr) -> SpinorField {
        match repr {
            Repr::Frequency => out,
            Repr::Physical => out.into_physical(),
        }
    }

    /// Applies `P₊` (`sign = 1`) or `P₋` (`sign = −1`) in place; frequency representation.
    pub(crate) fn project_in_place(&self, u: &mut SpinorField, sign: f64) {
        debug_assert_eq!(u.repr, Repr::Frequency);
        for idx in 0..self.grid.points() {
            let k = self.grid.wavevector(idx);
            let s = algebra::apply_projector(k, self.a, self.lambda[idx], sign, &u.at(idx));
            u.set(idx, s);
        }
    }

    /// `u ↦ P±u` for one sign, returned in the input's representation.
    pub fn project(&self, u: &SpinorField, sign: f64) -> Result<SpinorField> {
        let mut f = self.freq(u)?;
        self.project_in_place(&mut f, sign);
        Ok(Self::restore(f, u.repr))
    }

    /// `u = u⁺ + u⁻` with `û±(k) = P±(k) û(k)`, in the input's representation.
    pub fn project_pm(&self, u: &SpinorField) -> Result<(SpinorField, SpinorField)> {
        let f = self.freq(u)?;
        let mut plus = f.clone();
        self.project_in_place(&mut plus, 1.0);
        let mut minus = f;
        self.project_in_place(&mut minus, -1.0);
        Ok((Self::restore(plus, u.repr), Self::restore(minus, u.repr)))
    }

    /// Graph inner product `Re⟨|D|^{1/2}u, |D|^{1/2}v⟩ = Σ_k λ(k) Re(û·v̂)`.
    pub fn graph_inner(&self, u: &SpinorField, v: &SpinorField) -> Result<f64> {
        let uf = self.freq(u)?;
        let vf = self.freq(v)?;
        Ok(self.graph_inner_freq(uf.data(), vf.data()))
    }

    pub(crate) fn graph_inner_freq(&self, u: &[Complex64], v: &[Complex64]) -> f64 {
        let np = self.grid.points();
        let mut sum = 0.0;
        for c in 0..4 {
            let (uc, vc) = (&u[c * np..(c + 1) * np], &v[c * np..(c + 1) * np]);
            for ((a, b), l) in uc.iter().zip(vc).zip(&self.lambda) {
                sum += l * (a.re * b.re + a.im * b.im);
            }
        }
        sum
    }

    pub fn graph_norm(&self, u: &SpinorField) -> Result<f64> {
        Ok(self.graph_inner(u, u)?.sqrt())
    }

    /// Per-mode multiplication `û(k) ↦ D̂(k) û(k)`, returned in the input's representation.
    pub fn apply(&self, u: &SpinorField) -> Result<SpinorField> {
        let mut f = self.freq(u)?;
        for idx in 0..self.grid.points() {
            let k = self.grid.wavevector(idx);
            let s = algebra::apply_symbol(k, self.a, &f.at(idx));
            f.set(idx, s);
        }
        Ok(Self::restore(f, u.repr))
    }

    /// Graph-dual representative of an L² functional: `ĝ(k) = r̂(k)/λ(k)`,
    /// so that `⟨g, h⟩_graph = Re⟨r, h⟩_{L²}` for all `h`. Frequency output.
    pub fn graph_dual(&self, r: &SpinorField) -> Result<SpinorField> {
        let mut f = self.freq(r)?;
        let np = self.grid.points();
        for c in 0..4 {
            for (z, l) in f.data[c * np..(c + 1) * np].iter_mut().zip(&self.lambda) {
                *z /= *l;
            }
        }
        Ok(f)
    }
}
