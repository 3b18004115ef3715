mod common;

use common::{constant_model, SingleMode};
use ndirac::field::{self, Grid};
use ndirac::nehari;
use ndirac::solver::{self, InitialKind, SolveOptions, Termination};
use ndirac::{energy, Complex64, Error};

fn small_opts(seed: u64) -> SolveOptions {
    SolveOptions { starts: 1, seed, ..SolveOptions::default() }
}

#[test]
fn initial_guesses_are_unit_plus_fields() {
    let m = constant_model(8, 4.0, 0.2, 1.0, 2.5);
    let op = m.operator();
    let kinds = [
        InitialKind::default(),
        InitialKind::GaussianBump { sigma: 2.0, spinor: Some([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]) },
        InitialKind::Random { sigma: 0.5 },
    ];
    for kind in kinds {
        let w = solver::initial_guess(&m, 3, kind).unwrap();
        assert!((op.graph_norm(&w).unwrap() - 1.0).abs() < 1e-12);
        let minus = op.project(&w, -1.0).unwrap();
        assert!(op.graph_norm(&minus).unwrap() < 1e-12);
    }
    let a = solver::initial_guess(&m, 3, InitialKind::default()).unwrap();
    let b = solver::initial_guess(&m, 3, InitialKind::default()).unwrap();
    assert_eq!(a.max_abs_diff(&b).unwrap(), 0.0);
    assert!(solver::initial_guess(&m, 3, InitialKind::GaussianBump { sigma: 0.0, spinor: None }).is_err());
}

#[test]
fn small_ground_state_is_a_critical_point() {
    let m = constant_model(8, 5.0, 0.2, 1.0, 2.5);
    let r = solver::minimize_ground_state(&m, &small_opts(1)).unwrap();
    assert_eq!(r.termination, Termination::Converged);
    assert!(r.c > 0.0);
    assert!(r.residual_full <= 1e-6 * r.scale());
    let full = energy::gradient_norm(&r.u_star, &m).unwrap();
    assert!(full <= 2e-6 * r.scale(), "{full}");
    assert!((r.t_check - 1.0).abs() < 1e-6);
    assert!(r.v_check_rel < 1e-6);
    assert!((energy::energy(&r.u_star, &m).unwrap().total - r.c).abs() <= 1e-12 * r.c);
    assert!(r.trace.windows(2).all(|w| w[1].m_value <= w[0].m_value));
    assert!(r.trace.iter().all(|e| e.m_value >= r.alpha_numeric && e.plus_norm >= r.delta_numeric));
}

#[test]
fn gradient_descent_without_memory_converges_to_the_same_level() {
    let m = constant_model(8, 3.0, 0.2, 1.0, 2.5);
    let lbfgs = solver::minimize_ground_state(&m, &small_opts(1)).unwrap();
    let plain = solver::minimize_ground_state(&m, &SolveOptions { memory: 0, ..small_opts(1) }).unwrap();
    assert!(plain.converged());
    assert!(plain.iterations > lbfgs.iterations);
    assert!((plain.c - lbfgs.c).abs() <= 1e-6 * lbfgs.c);
}

#[test]
fn halving_k_scales_the_level_by_a_power_of_two() {
    // u ↦ κ^{−1/(p−2)} u maps the K ≡ 1 problem onto K ≡ κ, scaling Φ by κ^{−2/(p−2)}
    let p = 2.5;
    let strong = constant_model(8, 5.0, 0.2, 1.0, p);
    let weak = constant_model(8, 5.0, 0.2, 0.5, p);
    let opts = SolveOptions { tol_outer: 1e-8, ..small_opts(2) };
    let c1 = solver::minimize_ground_state(&strong, &opts).unwrap();
    let c_half = solver::minimize_ground_state(&weak, &opts).unwrap();
    assert!(c_half.c > c1.c);
    let ratio = c_half.c / c1.c;
    let expect = 2f64.powf(2.0 / (p - 2.0));
    assert!((ratio - expect).abs() <= 1e-6 * expect, "{ratio} vs {expect}");
}

#[test]
fn same_seed_is_reproducible() {
    let m = constant_model(8, 5.0, 0.2, 1.0, 2.5);
    let opts = SolveOptions { starts: 2, ..small_opts(7) };
    let a = solver::minimize_ground_state(&m, &opts).unwrap();
    let b = solver::minimize_ground_state(&m, &opts).unwrap();
    assert_eq!(a.c.to_bits(), b.c.to_bits());
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.starts.len(), 2);
}

#[test]
fn rejected_models_need_force() {
    let m = constant_model(8, 5.0, 1.5, 1.0, 2.5);
    let opts = SolveOptions { max_outer: 1, ..small_opts(0) };
    assert!(matches!(solver::minimize_ground_state(&m, &opts), Err(Error::ModelRejected(_))));
    let quad = constant_model(8, 5.0, 0.2, 1.0, 2.0);
    assert!(matches!(solver::minimize_ground_state(&quad, &opts), Err(Error::ModelRejected(_))));
    assert!(SolveOptions { tol_outer: 0.0, ..SolveOptions::default() }.validate().is_err());
    assert!(SolveOptions { starts: 0, ..SolveOptions::default() }.validate().is_err());
}

#[test]
fn iteration_cap_is_reported() {
    let m = constant_model(8, 5.0, 0.2, 1.0, 2.5);
    let r = solver::minimize_ground_state(&m, &SolveOptions { max_outer: 2, ..small_opts(0) }).unwrap();
    assert_eq!(r.termination, Termination::MaxIterations);
    assert_eq!(r.iterations, 2);
    assert_eq!(r.trace.len(), 3);
}

#[test]
fn interpolation_keeps_band_limited_fields() {
    let coarse = Grid::new(8, 3.0).unwrap();
    let fine = Grid::new(12, 3.0).unwrap();
    let mode = SingleMode::new(&coarse, [2, -1, 3], 1.0);
    let s = mode.spinor(1.0, [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.0)]);
    let u = mode.field(&coarse, &s);
    let up = solver::interpolate(&u, fine).unwrap().to_physical();
    let expect = mode.field(&fine, &s);
    assert!(up.max_abs_diff(&expect).unwrap() < 1e-13);
    assert!((field::l2_norm(&up) - field::l2_norm(&u)).abs() < 1e-12 * field::l2_norm(&u));
    assert!(solver::interpolate(&u, Grid::new(8, 3.0).unwrap()).is_err());
    assert!(solver::interpolate(&u, Grid::new(12, 4.0).unwrap()).is_err());
}

#[test]
fn refinement_starts_from_the_coarse_state() {
    let m8 = constant_model(8, 5.0, 0.2, 1.0, 2.5);
    let coarse = solver::minimize_ground_state(&m8, &small_opts(1)).unwrap();
    let m12 = m8.on_grid(Grid::new(12, 5.0).unwrap()).unwrap();
    let fine = solver::refine(&coarse, &m12, &small_opts(1)).unwrap();
    assert!(fine.converged());
    let info = fine.refinement.as_ref().unwrap();
    assert_eq!(info.coarse_n, 8);
    assert_eq!(info.c_coarse, coarse.c);
    assert!((info.delta_c - (fine.c - coarse.c)).abs() < 1e-12);
    let cold = solver::minimize_ground_state(&m12, &small_opts(1)).unwrap();
    assert!((cold.c - fine.c).abs() <= 1e-6 * fine.c);
}

#[test]
fn ground_state_is_localized() {
    let m = constant_model(8, 5.0, 0.2, 1.0, 2.5);
    let r = solver::minimize_ground_state(&m, &small_opts(1)).unwrap();
    let tail = ndirac::diagnostics::tail_fraction(&r.u_star, 3.0, 2.5, &m).unwrap();
    assert!(tail < 0.5, "{tail}");
    let res = nehari::nehari_residual(&r.u_star, &m).unwrap();
    assert!(res.passes(1e-6, r.scale()));
}
