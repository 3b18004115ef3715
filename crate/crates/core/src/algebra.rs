//! Pauli and Dirac matrices, and the free Dirac symbol at a single frequency.
//!
//! In the standard (Dirac) representation
//!
//! ```text
//! β = [[I₂, 0], [0, −I₂]],   α_k = [[0, σ_k], [σ_k, 0]]
//! ```
//!
//! and the operator `−iα·∇ + aβ` acts on a plane wave `e^{ik·x} s` as the
//! Hermitian 4×4 symbol `D̂(k) = Σ_j k_j α_j + aβ`. Since `D̂(k)² = λ²I` with
//! `λ = √(a² + |k|²)`, the spectral projectors are `P± = ½(I ± D̂/λ)`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

/// A C⁴ spinor value at a single point or mode.
pub type Spinor = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli matrix σ_j, `j ∈ {1, 2, 3}`.
pub fn pauli(j: usize) -> Result<Mat2> {
    let m = match j {
        1 => Mat2::new(ZERO, ONE, ONE, ZERO),
        2 => Mat2::new(ZERO, -I, I, ZERO),
        3 => Mat2::new(ONE, ZERO, ZERO, -ONE),
        _ => return Err(Error::PauliIndex(j)),
    };
    Ok(m)
}

fn block(upper_left: &Mat2, upper_right: &Mat2, lower_left: &Mat2, lower_right: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = upper_left[(r, c)];
            m[(r, c + 2)] = upper_right[(r, c)];
            m[(r + 2, c)] = lower_left[(r, c)];
            m[(r + 2, c + 2)] = lower_right[(r, c)];
        }
    }
    m
}

/// The Dirac matrices `(α₁, α₂, α₃)` and `β`.
pub fn dirac_matrices() -> ([Mat4; 3], Mat4) {
    let zero = Mat2::zeros();
    let id = Mat2::identity();
    let alpha = [1, 2, 3].map(|j| {
        let s = pauli(j).expect("index in range");
        block(&zero, &s, &s, &zero)
    });
    let beta = block(&id, &zero, &zero, &(-id));
    (alpha, beta)
}

fn check_mass(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidMass(a))
    }
}

/// Dense free Dirac symbol `Σ_j k_j α_j + aβ`.
pub fn dirac_symbol(k: [f64; 3], a: f64) -> Result<Mat4> {
    check_mass(a)?;
    let (alpha, beta) = dirac_matrices();
    let mut m = beta * Complex64::from(a);
    for (kj, aj) in k.iter().zip(alpha.iter()) {
        m += aj * Complex64::from(*kj);
    }
    Ok(m)
}

/// `λ(k) = √(a² + |k|²)`.
#[inline]
pub fn mode_energy(k: [f64; 3], a: f64) -> f64 {
    (a * a + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// Applies the symbol `D̂(k)` to a spinor without forming the matrix.
///
/// With `S = Σ k_j σ_j = [[k₃, k₁ − ik₂], [k₁ + ik₂, −k₃]]` the symbol is
/// `[[aI, S], [S, −aI]]`.
#[inline]
pub fn apply_symbol(k: [f64; 3], a: f64, s: &Spinor) -> Spinor {
    let kp = Complex64::new(k[0], k[1]);
    let km = Complex64::new(k[0], -k[1]);
    let k3 = k[2];
    [
        s[0] * a + s[2] * k3 + s[3] * km,
        s[1] * a + s[2] * kp - s[3] * k3,
        s[0] * k3 + s[1] * km - s[2] * a,
        s[0] * kp - s[1] * k3 - s[3] * a,
    ]
}

/// Applies `P₊(k)` (`sign = 1.0`) or `P₋(k)` (`sign = −1.0`) to a spinor.
#[inline]
pub fn apply_projector(k: [f64; 3], a: f64, lambda: f64, sign: f64, s: &Spinor) -> Spinor {
    let d = apply_symbol(k, a, s);
    let c = 0.5 * sign / lambda;
    [
        s[0] * 0.5 + d[0] * c,
        s[1] * 0.5 + d[1] * c,
        s[2] * 0.5 + d[2] * c,
        s[3] * 0.5 + d[3] * c,
    ]
}

/// Closed-form spectral data of the free symbol at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracModeSystem {
    pub k: [f64; 3],
    pub lambda: f64,
    pub p_plus: Mat4,
    pub p_minus: Mat4,
}

/// Builds `λ(k)` and `P±(k) = ½(I ± D̂(k)/λ)`.
pub fn mode_system(k: [f64; 3], a: f64) -> Result<DiracModeSystem> {
    let symbol = dirac_symbol(k, a)?;
    let lambda = mode_energy(k, a);
    let half = Mat4::identity() * Complex64::from(0.5);
    let scaled = symbol * Complex64::from(0.5 / lambda);
    Ok(DiracModeSystem {
        k,
        lambda,
        p_plus: half + scaled,
        p_minus: half - scaled,
    })
}

/// Largest entrywise modulus of `m`.
pub fn max_abs(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pauli_entries() {
        assert_eq!(pauli(1).unwrap(), Mat2::new(ZERO, ONE, ONE, ZERO));
        assert_eq!(pauli(3).unwrap(), Mat2::new(ONE, ZERO, ZERO, -ONE));
        let s2 = pauli(2).unwrap();
        assert_eq!(s2 * s2, Mat2::identity());
        assert!(matches!(pauli(0), Err(Error::PauliIndex(0))));
        assert!(matches!(pauli(4), Err(Error::PauliIndex(4))));
    }

    #[test]
    fn beta_is_diagonal_signature() {
        let (_, beta) = dirac_matrices();
        let expect = Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, -ONE, -ONE));
        assert_eq!(beta, expect);
    }

    #[test]
    fn anticommutators_vanish_exactly() {
        let (alpha, beta) = dirac_matrices();
        assert_eq!(alpha[0] * beta + beta * alpha[0], Mat4::zeros());
        assert_eq!(alpha[1] * alpha[2] + alpha[2] * alpha[1], Mat4::zeros());
        for a in &alpha {
            assert_eq!(a * a, Mat4::identity());
            assert_eq!(a.adjoint(), *a);
        }
        assert_eq!(beta * beta, Mat4::identity());
    }

    #[test]
    fn symbol_at_zero_frequency_is_beta() {
        let (_, beta) = dirac_matrices();
        assert_eq!(dirac_symbol([0.0; 3], 1.0).unwrap(), beta);
        assert!(matches!(dirac_symbol([0.0; 3], 0.0), Err(Error::InvalidMass(_))));
        assert!(matches!(mode_system([0.0; 3], -1.0), Err(Error::InvalidMass(_))));
    }

    #[test]
    fn symbol_squares_to_lambda_squared() {
        let k = [0.3, -1.7, 2.2];
        let a = 0.8;
        let d = dirac_symbol(k, a).unwrap();
        let l2 = mode_energy(k, a).powi(2);
        let err = max_abs(&(d * d - Mat4::identity() * Complex64::from(l2)));
        assert!(err < 1e-14, "{err}");
    }

    #[test]
    fn zero_mode_projectors() {
        let ms = mode_system([0.0; 3], 1.0).unwrap();
        let p = Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, ONE, ZERO, ZERO));
        let m = Mat4::from_diagonal(&nalgebra::Vector4::new(ZERO, ZERO, ONE, ONE));
        assert!(max_abs(&(ms.p_plus - p)) < 1e-15);
        assert!(max_abs(&(ms.p_minus - m)) < 1e-15);
    }

    #[test]
    fn fast_symbol_matches_dense() {
        let k = [0.7, -0.2, 1.3];
        let a = 1.4;
        let s = [c(0.1, 0.2), c(-1.0, 0.5), c(0.3, -0.7), c(2.0, 0.0)];
        let dense = dirac_symbol(k, a).unwrap() * nalgebra::Vector4::from(s);
        let fast = apply_symbol(k, a, &s);
        for i in 0..4 {
            assert!((dense[i] - fast[i]).norm() < 1e-14);
        }
        let ms = mode_system(k, a).unwrap();
        let dense_p = ms.p_minus * nalgebra::Vector4::from(s);
        let fast_p = apply_projector(k, a, ms.lambda, -1.0, &s);
        for i in 0..4 {
            assert!((dense_p[i] - fast_p[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn trace_of_plus_projector_is_two() {
        for k in [[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [-5.0, 0.1, 0.0]] {
            let ms = mode_system(k, 0.5).unwrap();
            assert!((ms.p_plus.trace() - Complex64::from(2.0)).norm() < 1e-14);
            assert!(ms.lambda >= 0.5);
        }
    }
}
