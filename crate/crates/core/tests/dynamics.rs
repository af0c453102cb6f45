mod common;

use nicholson::sim::{classify_tail, tail_stats, CONVERGENCE_TOL, DEFAULT_WINDOW_FRACTION};
use nicholson::sweep::{delay_grid, sweep_delay};
use nicholson::{classify_dynamics, integrate_dde, GasCertificate, HistorySpec, PatchSystem, Scenario, TailLabel, ZeroVerdict};

use common::{pair, random_system, rng};

fn max_drift(sys: &PatchSystem, x_star: &[f64], t_end: f64, dt: f64) -> f64 {
    let traj = integrate_dde(sys, &HistorySpec::constant(x_star.to_vec()), t_end, dt).unwrap();
    (0..traj.len())
        .flat_map(|k| traj.state(k).iter().zip(x_star).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

#[test]
fn equilibrium_is_invariant() {
    for sys in [pair(1.0, 1.0, [3.0, 2.0], [1.0, 3.0], [5.0, 10.0]), pair(1.0, 1.0, [2.0, 2.0], [3.0, 15.0], [1.0, 2.0])] {
        let x = classify_dynamics(&sys).unwrap().equilibrium.unwrap().x_star;
        let drift = max_drift(&sys, &x, 500.0, 0.01);
        assert!(drift <= 1e-8, "drift {drift:e}");
    }
}

#[test]
fn certified_systems_converge_from_several_histories() {
    let mut r = rng(31);
    let mut checked = 0;
    while checked < 6 {
        let n = 2 + checked % 3;
        let sys = random_system(&mut r, n, true, 1.0);
        let report = classify_dynamics(&sys).unwrap();
        if report.gas_certificate == GasCertificate::None {
            continue;
        }
        let x = report.equilibrium.unwrap().x_star;
        let histories = [
            HistorySpec::constant(vec![0.05; n]),
            HistorySpec::constant(x.iter().map(|v| 3.0 * v).collect()),
            HistorySpec::Sampled {
                times: vec![-sys.tau_max(), 0.0],
                values: vec![vec![2.0; n], x.iter().map(|v| 0.5 * v).collect()],
            },
        ];
        for h in &histories {
            let traj = integrate_dde(&sys, h, 500.0, 0.01).unwrap();
            let labels = classify_tail(&traj, Some(&x), CONVERGENCE_TOL).unwrap();
            assert!(labels.iter().all(|l| *l == TailLabel::ConvergedToPositive), "{sys:?} {h:?} {labels:?}");
        }
        checked += 1;
    }
}

#[test]
fn subthreshold_systems_die_out() {
    let mut r = rng(32);
    let mut checked = 0;
    while checked < 10 {
        let n = 1 + checked % 4;
        let sys = random_system(&mut r, n, checked % 2 == 0, 0.15);
        let report = classify_dynamics(&sys).unwrap();
        if report.verdict_zero != ZeroVerdict::GloballyStableZero || report.spectral.bound > -0.02 {
            continue;
        }
        let traj = integrate_dde(&sys, &HistorySpec::constant(vec![2.0; n]), 500.0, 0.01).unwrap();
        let tails = tail_stats(&traj, DEFAULT_WINDOW_FRACTION).unwrap();
        assert!(tails.patches.iter().all(|p| p.tail_max < CONVERGENCE_TOL), "{sys:?}");
        checked += 1;
    }
}

#[test]
fn certified_sweep_has_no_transition() {
    let sys = PatchSystem::single_delay(vec![1.0, 1.0], vec![vec![0.0, 0.2], vec![0.2, 0.0]], vec![2.0, 5.0], vec![1.0, 1.0]).unwrap();
    let report = classify_dynamics(&sys).unwrap();
    assert_eq!(report.gas_certificate, GasCertificate::A2);
    let mut sc = Scenario::new("certified", sys);
    sc.t_end = 400.0;
    let rows = sweep_delay(&sc, 1, 0, &delay_grid(1.0, 5.0, 5).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.label == TailLabel::ConvergedToPositive), "{rows:?}");
}
