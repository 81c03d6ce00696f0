use super::*;
use crate::anderson::{aa_run, AAConfig, Memory};
use crate::grid::random_orthogonal;
use crate::problems::AffineProblem;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `G(x) = (I - M) x + b` with `M` SPD, spectrum in `[lo, hi]`.
fn spd_problem(n: usize, lo: f64, hi: f64, seed: u64) -> AffineProblem {
    let q = random_orthogonal(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let d = DVector::from_fn(n, |_, _| rng.random_range(lo..hi));
    let m = &q * DMatrix::from_diagonal(&d) * q.transpose();
    let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    AffineProblem::new(DMatrix::identity(n, n) - m, b, 1.0 / (n as f64 + 1.0)).unwrap()
}

/// As [`spd_problem`] with equispaced eigenvalues of `M`.
fn equispaced_problem(n: usize, lo: f64, hi: f64, seed: u64) -> AffineProblem {
    let q = random_orthogonal(n, seed);
    let d = DVector::from_fn(n, |i, _| lo + (hi - lo) * i as f64 / (n - 1) as f64);
    let m = &q * DMatrix::from_diagonal(&d) * q.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    AffineProblem::new(DMatrix::identity(n, n) - m, b, 1.0 / (n as f64 + 1.0)).unwrap()
}

fn unbounded() -> GmresConfig {
    GmresConfig { restart: None, tol: 1e-12, max_iters: 200, ..GmresConfig::default() }
}

#[test]
fn identity_system_one_iteration() {
    let p = AffineProblem::new(DMatrix::zeros(5, 5), DVector::from_element(5, 3.0), 0.2).unwrap();
    let sys = AffineSystem::new(&p).unwrap();
    let out = gmres_restarted(&sys, &DVector::zeros(5), &unbounded()).unwrap();
    assert!(out.record.converged());
    assert_eq!(out.record.rows.len(), 2);
    assert!((out.x - DVector::from_element(5, 3.0)).norm() < 1e-14);
}

#[test]
fn scaled_identity_one_iteration() {
    let b = DVector::from_vec(vec![1.0, -2.0, 0.5, 4.0]);
    let p = AffineProblem::new(-DMatrix::identity(4, 4), b.clone(), 0.25).unwrap();
    let sys = AffineSystem::new(&p).unwrap();
    let out = gmres_restarted(&sys, &DVector::zeros(4), &unbounded()).unwrap();
    assert_eq!(out.record.rows.len(), 2);
    assert!((out.x - b / 2.0).norm() < 1e-14);
}

#[test]
fn affine_system_is_linear() {
    let p = spd_problem(12, 0.1, 2.0, 3);
    let sys = AffineSystem::new(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
    let v = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
    let lhs = sys.apply(&(&u * 2.0 + &v)).unwrap();
    let rhs = sys.apply(&u).unwrap() * 2.0 + sys.apply(&v).unwrap();
    assert!((lhs - rhs).norm() < 1e-10);
}

#[test]
fn restarted_converges_and_monotone_in_cycle() {
    let p = spd_problem(40, 0.05, 1.9, 8);
    let sys = AffineSystem::new(&p).unwrap();
    let cfg = GmresConfig { restart: Some(7), tol: 1e-10, max_iters: 2000, track_orthogonality: true, ..GmresConfig::default() };
    let out = gmres_restarted(&sys, &DVector::zeros(40), &cfg).unwrap();
    assert!(out.record.converged());
    let rows = &out.record.rows;
    for (j, w) in rows.windows(2).enumerate() {
        if j % 7 != 0 || j == 0 {
            assert!(w[1].res_l2 <= w[0].res_l2 * (1.0 + 1e-10), "row {j}");
        }
    }
    assert!(out.max_basis_defect.unwrap() <= 1e-10);
    let true_res = (sys.rhs() - sys.apply(&out.x).unwrap()).norm();
    assert!(true_res <= 1e-9 * rows[0].res_l2);
    assert!((out.x - p.exact_solution().unwrap()).norm() < 1e-8);
}

#[test]
fn recorded_residual_is_true_residual() {
    let p = spd_problem(20, 0.2, 1.5, 4);
    let sys = AffineSystem::new(&p).unwrap();
    let cfg = GmresConfig { max_iters: 6, ..unbounded() };
    let out = gmres_restarted(&sys, &DVector::zeros(20), &cfg).unwrap();
    assert_eq!(out.record.status, Termination::MaxIters);
    let true_res = (sys.rhs() - sys.apply(&out.x).unwrap()).norm();
    assert!((true_res - out.record.final_residual().unwrap()).abs() < 1e-12);
}

#[test]
fn matches_unbounded_anderson() {
    let n = 32;
    for seed in 0..5 {
        let p = equispaced_problem(n, 0.02, 1.0, seed);
        let sys = AffineSystem::new(&p).unwrap();
        let cfg = GmresConfig { tol: 1e-300, max_iters: 20, ..unbounded() };
        let gm = gmres_restarted(&sys, &DVector::zeros(n), &cfg).unwrap();
        let aa_cfg = AAConfig { memory: Memory::Unbounded, tol: 1e-300, max_iters: 21, reg: 0.0, ..AAConfig::default() };
        let (aa, _) = aa_run(&p, &aa_cfg, &DVector::zeros(n)).unwrap();
        for k in 0..=20 {
            let g = gm.record.rows[k].res_l2;
            let a = aa.rows[k].lsq_res.unwrap();
            assert!((g - a).abs() <= 1e-8 * g, "seed {seed} k={k}: gmres {g} aa {a}");
        }
    }
}

#[test]
fn rejects_zero_restart() {
    let p = spd_problem(4, 0.5, 1.0, 1);
    let sys = AffineSystem::new(&p).unwrap();
    let cfg = GmresConfig { restart: Some(0), ..GmresConfig::default() };
    assert!(gmres_restarted(&sys, &DVector::zeros(4), &cfg).is_err());
}
