//! The energy `Φ(u) = ½(‖u⁺‖² − ‖u⁻‖²) + ½∫V|u|² − ∫K F(|u|)` and its derivative.
//!
//! `Φ′(u)v = Re⟨r, v⟩_{L²}` with the strong residual `r = D u + V u − K f(|u|) u`.
//! All integrals are uniform-grid sums `Σ_x (·) dx³`.

use serde::Serialize;

use crate::field::{self, Repr, SpinorField};
use crate::model::ProblemModel;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    /// `½‖u⁺‖²`
    pub quad_plus: f64,
    /// `½‖u⁻‖²`
    pub quad_minus: f64,
    /// `½∫V|u|²`
    pub pot: f64,
    /// `∫K F(|u|)`
    pub nonlin: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn recombined(&self) -> f64 {
        self.quad_plus - self.quad_minus + self.pot - self.nonlin
    }
}

/// `(½∫V|u|², ∫K F(|u|))` for a physical field.
pub(crate) fn local_terms(u: &SpinorField, model: &ProblemModel) -> (f64, f64) {
    let (v, k, nl) = (model.v(), model.k(), model.nonlinearity());
    let mut pot = 0.0;
    let mut nonlin = 0.0;
    for idx in 0..u.grid().points() {
        let m2 = field::spinor_norm_sqr(&u.at(idx));
        pot += v[idx] * m2;
        nonlin += k[idx] * nl.big_f(m2.sqrt());
    }
    let dv = u.grid().cell_volume();
    (0.5 * pot * dv, nonlin * dv)
}

/// Pointwise `V u − K f(|u|) u` for a physical field.
pub(crate) fn local_residual(u: &SpinorField, model: &ProblemModel) -> SpinorField {
    let (v, k, nl) = (model.v(), model.k(), model.nonlinearity());
    let mut out = SpinorField::zeros(*u.grid(), Repr::Physical);
    for idx in 0..u.grid().points() {
        let s = u.at(idx);
        let m = field::spinor_norm_sqr(&s).sqrt();
        let c = v[idx] - k[idx] * nl.f(m);
        out.set(idx, s.map(|z| z * c));
    }
    out
}

pub fn energy(u: &SpinorField, model: &ProblemModel) -> Result<EnergyBreakdown> {
    let op = model.operator();
    u.grid().ensure_same(op.grid())?;
    let (plus, minus) = op.project_pm(&u.to_frequency())?;
    let quad_plus = 0.5 * op.graph_inner(&plus, &plus)?;
    let quad_minus = 0.5 * op.graph_inner(&minus, &minus)?;
    let (pot, nonlin) = local_terms(&u.to_physical(), model);
    Ok(EnergyBreakdown {
        quad_plus,
        quad_minus,
        pot,
        nonlin,
        total: quad_plus - quad_minus + pot - nonlin,
    })
}

/// Strong residual `r = D u + V u − K f(|u|) u`, physical representation.
pub fn residual_l2(u: &SpinorField, model: &ProblemModel) -> Result<SpinorField> {
    let op = model.operator();
    u.grid().ensure_same(op.grid())?;
    let phys = u.to_physical();
    let mut r = op.apply(&phys)?;
    r.axpy(1.0, &local_residual(&phys, model))?;
    Ok(r)
}

/// `Φ′(u)v`.
pub fn derivative_along(u: &SpinorField, v: &SpinorField, model: &ProblemModel) -> Result<f64> {
    let r = residual_l2(u, model)?;
    field::l2_inner(&r, v)
}

/// `∫K(½f(|u|)|u|² − F(|u|))`.
pub fn nehari_excess(u: &SpinorField, model: &ProblemModel) -> f64 {
    let u = u.to_physical();
    let (k, nl) = (model.k(), model.nonlinearity());
    let sum: f64 = (0..u.grid().points())
        .map(|idx| {
            let m2 = field::spinor_norm_sqr(&u.at(idx));
            let (f, big_f) = nl.f_and_big_f(m2.sqrt());
            k[idx] * (0.5 * f * m2 - big_f)
        })
        .sum();
    sum * u.grid().cell_volume()
}

/// `Φ(u) − ½Φ′(u)u − ∫K(½f(|u|)|u|² − F(|u|))`, identically zero in exact arithmetic.
pub fn nehari_identity_gap(u: &SpinorField, model: &ProblemModel) -> Result<f64> {
    let phi = energy(u, model)?.total;
    let d = derivative_along(u, u, model)?;
    Ok(phi - 0.5 * d - nehari_excess(u, model))
}

/// Graph-dual norm `‖Φ′(u)‖_{E*} = (Σ_k |r̂(k)|²/λ(k))^{1/2}`.
pub fn gradient_norm(u: &SpinorField, model: &ProblemModel) -> Result<f64> {
    let r = residual_l2(u, model)?;
    let op = model.operator();
    let g = op.graph_dual(&r)?;
    op.graph_norm(&g)
}
