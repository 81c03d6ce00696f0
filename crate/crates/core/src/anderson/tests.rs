use super::*;
use crate::norms::NormKind;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Affine {
    a: DMatrix<f64>,
    b: DVector<f64>,
    h: f64,
}

impl Affine {
    fn scalar(a: f64, b: f64) -> Self {
        Self { a: DMatrix::from_element(1, 1, a), b: DVector::from_element(1, b), h: 1.0 }
    }

    /// Symmetric contraction with spectrum in [lo, hi].
    fn random(n: usize, lo: f64, hi: f64, seed: u64) -> Self {
        let q = crate::grid::random_orthogonal(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.random_range(lo..hi)));
        let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        Self { a: &q * d * q.transpose(), b, h: 1.0 / (n as f64 + 1.0) }
    }
}

impl FixedPointProblem for Affine {
    fn dim(&self) -> usize {
        self.b.len()
    }
    fn h(&self) -> f64 {
        self.h
    }
    fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.a * x + &self.b)
    }
    fn is_linear(&self) -> bool {
        true
    }
    fn exact_solution(&self) -> Option<DVector<f64>> {
        let n = self.dim();
        (DMatrix::identity(n, n) - &self.a).lu().solve(&self.b)
    }
}

fn x0(n: usize) -> DVector<f64> {
    DVector::zeros(n)
}

#[test]
fn picard_scalar_sequence() {
    let p = Affine::scalar(0.5, 1.0);
    let cfg = AAConfig::new(0).with_max_iters(3).with_tol(1e-300);
    let (rec, x) = picard_run(&p, &x0(1), &cfg).unwrap();
    assert_eq!(x[0], 1.75);
    assert_eq!(rec.rows.len(), 4);
    assert_eq!(rec.rows[0].res_l2, 1.0);
    assert_eq!(rec.rows[2].res_l2, 0.25);
    assert_eq!(rec.status, Termination::MaxIters);
}

#[test]
fn picard_at_fixed_point() {
    let p = Affine::scalar(0.5, 1.0);
    let (rec, _) = picard_run(&p, &DVector::from_element(1, 2.0), &AAConfig::default()).unwrap();
    assert_eq!(rec.rows[0].res_l2, 0.0);
    assert!(rec.converged());
}

#[test]
fn picard_growth_diverges() {
    let p = Affine::scalar(2.0, 1.0);
    let cfg = AAConfig::new(0).with_max_iters(100);
    let (rec, _) = picard_run(&p, &DVector::from_element(1, 1.0), &cfg).unwrap();
    for w in rec.rows.windows(2) {
        assert_eq!(w[1].res_l2, 2.0 * w[0].res_l2);
    }
    assert_eq!(rec.status, Termination::Diverged);
    assert!(rec.rows.len() <= 101);
}

#[test]
fn scalar_secant_step() {
    let p = Affine::scalar(0.5, 1.0);
    let mut acc = Anderson::new(&AAConfig::new(1), WeightOperator::l2(1, 1.0).unwrap()).unwrap();
    let x0 = DVector::from_element(1, 0.0);
    let s0 = acc.step(&x0, &p.apply(&x0).unwrap()).unwrap();
    assert_eq!(s0.next[0], 1.0);
    let s1 = acc.step(&s0.next, &p.apply(&s0.next).unwrap()).unwrap();
    assert_eq!(s1.gamma[0], -1.0);
    assert_eq!(s1.next[0], 2.0);
}

#[test]
fn scalar_aa_converges_fast() {
    let p = Affine::scalar(0.5, 1.0);
    let cfg = AAConfig::new(1).with_tol(1e-15);
    let (rec, x) = aa_run(&p, &cfg, &x0(1)).unwrap();
    assert!(rec.converged());
    assert!(rec.rows.len() - 1 <= 3);
    assert!((x[0] - 2.0).abs() < 1e-15);
}

#[test]
fn memory_zero_is_picard_bitwise() {
    let p = Affine::random(20, -0.9, 0.9, 7);
    let cfg = AAConfig::new(0).with_norm(NormKind::HM1).with_max_iters(40).with_tol(1e-300);
    let (a, xa) = aa_run(&p, &cfg, &x0(20)).unwrap();
    let (b, xb) = picard_run(&p, &x0(20), &cfg).unwrap();
    assert_eq!(xa, xb);
    let strip = |r: &ConvergenceRecord| r.rows.iter().map(|r| (r.res_l2, r.res_w, r.err_l2)).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn beta_wraps_the_map() {
    let p = Affine::random(10, 0.0, 0.8, 3);
    let beta = 0.6;
    let damped = Affine { a: &p.a * beta + DMatrix::identity(10, 10) * (1.0 - beta), b: &p.b * beta, h: p.h };
    let cfg = AAConfig::new(3).with_max_iters(15).with_tol(1e-300);
    let (_, xa) = aa_run(&p, &cfg.clone().with_beta(beta), &x0(10)).unwrap();
    let (_, xb) = aa_run(&damped, &cfg, &x0(10)).unwrap();
    assert!((xa - xb).norm() < 1e-12);
}

#[test]
fn aa_beats_picard_on_linear() {
    let p = Affine::random(40, 0.0, 0.98, 11);
    let cfg = AAConfig::new(10).with_max_iters(1000);
    let (aa, xa) = aa_run(&p, &cfg, &x0(40)).unwrap();
    let (pic, _) = picard_run(&p, &x0(40), &cfg).unwrap();
    assert!(aa.converged() && pic.converged());
    assert!(aa.rows.len() * 3 < pic.rows.len());
    assert!((xa - p.exact_solution().unwrap()).norm() < 1e-6);
}

#[test]
fn lsq_residual_recorded() {
    let p = Affine::random(12, 0.0, 0.5, 5);
    let (rec, _) = aa_run(&p, &AAConfig::new(3), &x0(12)).unwrap();
    assert_eq!(rec.rows[0].lsq_res, Some(rec.rows[0].res_l2));
    for r in &rec.rows[..rec.rows.len() - 1] {
        assert!(r.lsq_res.unwrap() <= r.res_l2 * (1.0 + 1e-12));
    }
    assert_eq!(rec.rows.last().unwrap().lsq_res, None);
}

#[test]
fn map_failure_kept_in_record() {
    struct Bad;
    impl FixedPointProblem for Bad {
        fn dim(&self) -> usize {
            2
        }
        fn h(&self) -> f64 {
            0.5
        }
        fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
            if x[0] > 1.5 {
                Err(Error::SingularSystem(0))
            } else {
                Ok(x.add_scalar(1.0))
            }
        }
    }
    let (rec, _) = picard_run(&Bad, &x0(2), &AAConfig::default()).unwrap();
    assert_eq!(rec.rows.len(), 2);
    assert_eq!(rec.status, Termination::Failed(Error::SingularSystem(0)));
}

#[test]
fn one_step_parameters() {
    let p = Affine::random(8, 0.1, 0.5, 2);
    let wop = WeightOperator::l2(8, p.h).unwrap();
    assert!(matches!(one_step_aa(&p, &x0(8), 2, 3, &wop), Err(Error::InvalidParameter(_))));
    assert!(matches!(one_step_aa(&p, &x0(8), 2, 0, &wop), Err(Error::InvalidParameter(_))));
}

#[test]
fn one_step_matches_run_prefix() {
    // with k = m the one-step window coincides with Picard history
    let p = Affine::random(10, 0.1, 0.7, 9);
    let wop = WeightOperator::l2(10, p.h).unwrap();
    let e = one_step_aa(&p, &x0(10), 1, 1, &wop).unwrap();
    let x1 = p.apply(&x0(10)).unwrap();
    let mut acc = Anderson::new(&AAConfig::new(1), wop).unwrap();
    acc.observe(&x0(10), &x1).unwrap();
    let out = acc.step(&x1, &p.apply(&x1).unwrap()).unwrap();
    assert!((out.next - p.exact_solution().unwrap() - e).norm() < 1e-14);
}

#[test]
fn full_krylov_one_step_exact() {
    let p = Affine::random(6, 0.1, 0.9, 21);
    let wop = WeightOperator::l2(6, p.h).unwrap();
    let e = one_step_aa(&p, &DVector::from_element(6, 1.0), 6, 6, &wop).unwrap();
    assert!(e.norm() < 1e-9, "{}", e.norm());
}

#[test]
fn constrained_single_column() {
    let wop = WeightOperator::l2(3, 1.0).unwrap();
    let a = constrained_alpha(&[DVector::from_vec(vec![1.0, 2.0, 3.0])], &wop).unwrap();
    assert_eq!(a[0], 1.0);
}

#[test]
fn constrained_matches_unconstrained() {
    let p = Affine::random(30, -0.5, 0.95, 13);
    let cfg = AAConfig::new(4).with_norm(NormKind::HM1).with_max_iters(25).with_tol(1e-300);
    let (r1, x1) = constrained_run(&p, &cfg, &x0(30)).unwrap();
    let (r2, x2) = aa_run(&p, &cfg, &x0(30)).unwrap();
    assert_eq!(r1.rows.len(), r2.rows.len());
    for (a, b) in r1.rows.iter().zip(&r2.rows) {
        assert!((a.res_l2 - b.res_l2).abs() <= 1e-9 * r1.rows[0].res_l2);
    }
    assert!((x1 - x2).norm() < 1e-9);
}

#[test]
fn multisecant_constraint_and_l2_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 9;
    let dx: Vec<_> = (0..3).map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect();
    let df: Vec<_> = (0..3).map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect();
    let wop = WeightOperator::build(NormKind::HM2, n, 0.1).unwrap();
    let s = multisecant_operator(&dx, &df, &wop).unwrap();
    for (x, f) in dx.iter().zip(&df) {
        assert!((&s * f - (x + f)).norm() < 1e-10);
    }
    let l2 = WeightOperator::l2(n, 0.1).unwrap();
    let s2 = multisecant_operator(&dx, &df, &l2).unwrap();
    let d = DMatrix::from_columns(&df);
    let y = DMatrix::from_columns(&dx) + &d;
    let expect = y * (d.transpose() * &d).try_inverse().unwrap() * d.transpose();
    assert!((s2 - expect).norm() < 1e-10);
    let dup = vec![df[0].clone(), df[0].clone()];
    assert_eq!(multisecant_operator(&dx[..2], &dup, &wop), Err(Error::SingularGram));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gamma_scale_invariant(seed in 0u64..1000, c in 1e-3f64..1e3, s in 0u32..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 20;
        let cols: Vec<_> = (0..4).map(|_| DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))).collect();
        let f = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let wop = WeightOperator::build(NormKind::new(s), n, 0.05).unwrap();
        let g1 = solve_gamma(&cols, &f, &wop, 1e-12).unwrap();
        let g2 = solve_gamma(&cols, &f, &wop.scaled(c).unwrap(), 1e-12).unwrap();
        prop_assert!((g1 - g2).norm() < 1e-12 * 10.0);
    }

    #[test]
    fn constrained_sums_to_one(seed in 0u64..1000, m in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<_> = (0..m).map(|_| DVector::from_fn(15, |_, _| rng.random_range(-1.0..1.0))).collect();
        let wop = WeightOperator::build(NormKind::HM1, 15, 0.1).unwrap();
        let a = constrained_alpha(&cols, &wop).unwrap();
        prop_assert!((a.sum() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partial_sums_map_alpha_to_gamma(seed in 0u64..1000, m in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs: Vec<_> = (0..=m).map(|_| DVector::from_fn(15, |_, _| rng.random_range(-1.0..1.0))).collect();
        let wop = WeightOperator::build(NormKind::HM2, 15, 0.1).unwrap();
        let alpha = constrained_alpha(&fs, &wop).unwrap();
        let df: Vec<_> = fs.windows(2).map(|w| &w[1] - &w[0]).collect();
        let gamma = solve_gamma(&df, &fs[m], &wop, 0.0).unwrap();
        let mut acc = 0.0;
        for i in 0..m {
            acc += alpha[i];
            prop_assert!((acc - gamma[i]).abs() < 1e-10 * (1.0 + gamma[i].abs()));
        }
    }
}
