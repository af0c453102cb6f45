//! Reference values computed independently with 40-digit arithmetic
//! (mpmath `findroot` and `polyroots`) and frozen here.

use std::f64::consts::E;

use nicholson::bounds::{closed_form_bounds, gamma_exponent_range, permanence_constants};
use nicholson::equilibrium::{delay_robustness, Verdict};
use nicholson::{classify_dynamics, solve_positive_equilibrium, spectral_bound, PatchSystem};

fn pair(d: [f64; 2], beta: [f64; 2], tau: [f64; 2]) -> PatchSystem {
    PatchSystem::single_delay(d.to_vec(), vec![vec![0.0, 1.0], vec![1.0, 0.0]], beta.to_vec(), tau.to_vec()).unwrap()
}

fn close(got: f64, want: f64, tol: f64) {
    assert!((got - want).abs() <= tol, "got {got:.17}, want {want:.17}");
}

#[test]
fn two_patch_equilibrium() {
    let sys = pair([3.0, 2.0], [1.0, 3.0], [5.0, 10.0]);
    close(spectral_bound(&sys.community_matrix()).unwrap().bound, 1.302_775_637_731_994_6, 1e-12);
    let cert = solve_positive_equilibrium(&sys).unwrap().unwrap();
    close(cert.x_star[0], 0.291_386_573_784_600_86, 1e-12);
    close(cert.x_star[1], 0.656_427_874_780_739, 1e-12);
    let v = delay_robustness(&sys, &cert.x_star).unwrap();
    close(v.diagonal_lambdas[0], 2.470_505_082_672_762_6, 1e-11);
    close(v.diagonal_lambdas[1], 1.465_366_494_856_951_6, 1e-11);
    assert_eq!(v.verdict, Verdict::RobustlyStable);
}

#[test]
fn oscillating_pair_equilibrium() {
    let sys = pair([2.0, 2.0], [3.0, 15.0], [1.0, 2.0]);
    let r = classify_dynamics(&sys).unwrap();
    let cert = r.equilibrium.unwrap();
    close(cert.x_star[0], 1.687_898_737_536_285_6, 1e-12);
    close(cert.x_star[1], 2.439_481_279_814_861_3, 1e-12);
    let v = r.delay_robustness.unwrap();
    close(v.diagonal_lambdas[0], 1.618_406_771_491_106_4, 1e-11);
    close(v.diagonal_lambdas[1], 0.117_027_307_154_997_1, 1e-11);
    let det = v.n_hat[(0, 0)] * v.n_hat[(1, 1)] - v.n_hat[(0, 1)] * v.n_hat[(1, 0)];
    close(det, -0.810_6, 1e-4);
    assert_eq!(v.verdict, Verdict::PotentiallyDelayUnstable);
}

#[test]
fn scalar_permanence_floor() {
    let sys = PatchSystem::single_delay(vec![1.0], vec![vec![0.0]], vec![E * E], vec![1.0]).unwrap();
    let pc = permanence_constants(&sys, &[1.0]).unwrap();
    close(pc.m_const, 0.224_528_298_082_957_6, 1e-13);
    close(pc.l_const, E, 1e-13);
}

#[test]
fn closed_form_values() {
    let b = closed_form_bounds(1.0, 2.0).unwrap();
    close(b.lower, 0.487_589_298_719_261, 1e-14);

    let a = vec![vec![0.0, 0.1, 0.1], vec![0.1, 0.0, 0.1], vec![0.1, 0.1, 0.0]];
    let beta = vec![1.2f64.exp(), 1.35f64.exp(), 1.5f64.exp()];
    let sys = PatchSystem::single_delay(vec![1.2; 3], a, beta, vec![1.0, 1.5, 2.0]).unwrap();
    let (lo, hi) = gamma_exponent_range(&sys).unwrap();
    let b = closed_form_bounds(lo, hi).unwrap();
    close(b.lower, 1.052_616_247_387_781, 1e-12);
    close(b.upper, 1.648_721_270_700_128, 1e-12);
}
