#![allow(dead_code)]

use nalgebra::DMatrix;
use nicholson::matrix::spectral_bound_of;
use nicholson::PatchSystem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random cooperative matrix with roughly `density` of its off-diagonal
/// entries non-zero.
pub fn cooperative_matrix(rng: &mut TestRng, n: usize, density: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.gen_range(-3.0..3.0)
        } else if rng.gen_bool(density) {
            rng.gen_range(0.0..2.0)
        } else {
            0.0
        }
    })
}

/// Random migration matrix; when `irreducible`, a cycle through every patch
/// is always present.
pub fn migration(rng: &mut TestRng, n: usize, irreducible: bool, density: f64) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if i != j && rng.gen_bool(density) {
                *v = rng.gen_range(0.05..1.0);
            }
        }
    }
    if irreducible && n > 1 {
        for i in 0..n {
            let j = (i + 1) % n;
            if a[j][i] == 0.0 {
                a[j][i] = rng.gen_range(0.05..1.0);
            }
        }
    }
    a
}

/// Random valid system. Each death rate exceeds both its row and column
/// migration sums, so mortality is positive and `D - A` is a non-singular
/// M-matrix. `birth_scale` multiplies the births.
pub fn random_system(rng: &mut TestRng, n: usize, irreducible: bool, birth_scale: f64) -> PatchSystem {
    let a = migration(rng, n, irreducible, 0.4);
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let row: f64 = a[i].iter().sum();
            let col: f64 = (0..n).map(|j| a[j][i]).sum();
            row.max(col) + rng.gen_range(0.2..2.0)
        })
        .collect();
    let beta: Vec<f64> = d.iter().map(|di| di * birth_scale * rng.gen_range(0.1..6.0)).collect();
    let tau: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..4.0)).collect();
    PatchSystem::single_delay(d, a, beta, tau).unwrap()
}

/// Random irreducible system with `|s(M)|` at least `gap`. Birth scales
/// are drawn so that both signs of `s(M)` are common.
pub fn random_irreducible_away_from_threshold(rng: &mut TestRng, n: usize, gap: f64) -> PatchSystem {
    loop {
        let scale = rng.gen_range(0.02..0.6);
        let sys = random_system(rng, n, true, scale);
        let s = spectral_bound_of(sys.community_matrix().entries()).unwrap();
        if s.abs() >= gap {
            return sys;
        }
    }
}

/// Two patches with one delay each.
pub fn pair(a12: f64, a21: f64, d: [f64; 2], beta: [f64; 2], tau: [f64; 2]) -> PatchSystem {
    PatchSystem::single_delay(d.to_vec(), vec![vec![0.0, a12], vec![a21, 0.0]], beta.to_vec(), tau.to_vec()).unwrap()
}
