mod common;

use common::*;
use locopath::{lasso_path, soft_threshold, Dataset, Design, Hypothesis, SolutionPath};
use ndarray::{Array1, Axis};
use proptest::prelude::*;
use rand::RngExt;

fn random_lambdas(path: &SolutionPath, count: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let lo = if path.terminated_early() { *path.knots().last().unwrap() } else { 0.0 };
    let hi = path.lambda_max();
    (0..count).map(|_| r.random_range(lo.max(hi * 1e-3)..hi)).collect()
}

fn kkt_at_knots_and_interior(data: &Dataset, excluded: &[usize], offset: Option<&Array1<f64>>, seed: u64) {
    let path = lasso_path(data, excluded, offset).unwrap();
    let mut lambdas: Vec<f64> = path.knots().to_vec();
    lambdas.extend(random_lambdas(&path, 10, seed));
    for l in lambdas {
        let b = path.eval(l).unwrap();
        let v = kkt_violation(data, offset, &b, l, excluded);
        assert!(v <= 1e-8, "KKT violation {v:e} at lambda {l}");
    }
}

#[test]
fn kkt_certificate_on_random_instances() {
    let shapes = [(20, 5), (30, 10), (60, 40), (40, 60), (25, 100), (60, 100), (10, 30)];
    for (i, &(n, p)) in shapes.iter().cycle().take(28).enumerate() {
        let data = random_instance(n, p, 100 + i as u64);
        kkt_at_knots_and_interior(&data, &[], None, i as u64);
        kkt_at_knots_and_interior(&data, &[0, p / 2], None, 7 + i as u64);
    }
}

#[test]
fn kkt_certificate_with_offset() {
    let data = random_instance(50, 30, 5);
    let h = Hypothesis::new(vec![0, 3], vec![1.0, -0.5]).unwrap();
    let off = h.offset(&data).unwrap();
    kkt_at_knots_and_interior(&data, h.constrained(), Some(&off), 1);
}

#[test]
fn fixed_lambda_matches_coordinate_descent() {
    let mut shapes = vec![(40, 60); 20];
    shapes.extend([(30, 8), (50, 20), (25, 25), (60, 10), (35, 90)].iter().cycle().take(30));
    for (i, &(n, p)) in shapes.iter().enumerate() {
        let data = random_instance(n, p, 900 + i as u64);
        let path = lasso_path(&data, &[], None).unwrap();
        for l in random_lambdas(&path, 5, i as u64) {
            let cd = coordinate_descent(data.x(), data.y(), l, &[]);
            let hom = path.eval(l).unwrap();
            let err = (&cd - &hom).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(err <= 1e-6, "instance {i} ({n}x{p}) lambda {l}: {err:e}");
        }
    }
}

#[test]
fn exclusion_equals_column_deletion() {
    for (i, &(n, p)) in [(30, 6), (40, 60), (20, 20)].iter().enumerate() {
        let data = random_instance(n, p, 40 + i as u64);
        for j in [0, p / 2, p - 1] {
            let excl = lasso_path(&data, &[j], None).unwrap();
            let reduced = lasso_path(&data.without_column(j).unwrap(), &[], None).unwrap();
            assert_eq!(excl.knots().len(), reduced.knots().len());
            for (a, b) in excl.knots().iter().zip(reduced.knots()) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
            }
            let mut reinserted = reduced.coefs().clone();
            reinserted = ndarray::concatenate(
                Axis(0),
                &[
                    reinserted.slice(ndarray::s![..j, ..]),
                    Array1::<f64>::zeros(reinserted.ncols()).insert_axis(Axis(0)).view(),
                    reinserted.slice(ndarray::s![j.., ..]),
                ],
            )
            .unwrap();
            let diff = (&reinserted - excl.coefs()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(diff <= 1e-10, "coefficient gap {diff:e}");
        }
    }
}

#[test]
fn knots_are_monotone_and_start_at_max_correlation() {
    for i in 0..20 {
        let data = random_instance(30, 15 + i, 300 + i as u64);
        let h = Hypothesis::new(vec![1], vec![0.7]).unwrap();
        let off = h.offset(&data).unwrap();
        let path = lasso_path(&data, &[1], Some(&off)).unwrap();
        assert!(path.knots().windows(2).all(|w| w[0] > w[1]));
        assert!(path.knots().iter().all(|&k| k >= 0.0));
        let c = data.x().t().dot(&(data.y() - &off));
        let max = (0..data.p()).filter(|&j| j != 1).map(|j| c[j].abs()).fold(0.0, f64::max);
        assert!((path.lambda_max() - max).abs() <= 1e-12 * max);
    }
}

#[test]
fn midpoints_interpolate_linearly() {
    let data = random_instance(40, 60, 17);
    let path = lasso_path(&data, &[], None).unwrap();
    for k in 0..path.knots().len() - 1 {
        let (a, b) = (path.knots()[k], path.knots()[k + 1]);
        let mid = path.eval(0.5 * (a + b)).unwrap();
        let mean = (&path.knot_coefs(k) + &path.knot_coefs(k + 1)) * 0.5;
        for (u, v) in mid.iter().zip(mean.iter()) {
            assert!((u - v).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}

#[test]
fn orthonormal_path_is_soft_thresholding() {
    for i in 0..20 {
        let beta = [2.0, -1.0, 0.5, 0.0, 0.0, 1.5];
        let data = orthonormal_instance(40, 6, &beta, 0.5, 60 + i);
        let ls = ls_orthonormal(&data);
        let path = lasso_path(&data, &[], None).unwrap();
        for l in random_lambdas(&path, 10, i) {
            let b = path.eval(l).unwrap();
            for j in 0..6 {
                assert!((b[j] - soft_threshold(ls[j], l)).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn zero_above_first_knot_and_constant_below_last() {
    let data = random_instance(25, 40, 3);
    let path = lasso_path(&data, &[], None).unwrap();
    assert!(path.eval(path.lambda_max() * 1.5).unwrap().iter().all(|&v| v == 0.0));
    let last = path.knots().len() - 1;
    assert_eq!(path.eval(path.knots()[last] * 0.5).unwrap(), path.knot_coefs(last).to_owned());
    if path.terminated_early() {
        assert!(path.knots()[last] > 0.0);
    }
}

#[test]
fn gram_and_plain_designs_agree() {
    let data = random_instance(40, 60, 23);
    let plain = Design::new(data.x().view()).path(data.y().view(), &[2]).unwrap();
    let gram = Design::with_gram(data.x().view()).path(data.y().view(), &[2]).unwrap();
    assert_eq!(plain.knots().len(), gram.knots().len());
    let diff = (plain.coefs() - gram.coefs()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(diff < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn kkt_holds_for_arbitrary_shapes(n in 5usize..40, p in 1usize..50, seed in 0u64..10_000) {
        let data = random_instance(n, p, seed);
        let path = lasso_path(&data, &[], None).unwrap();
        prop_assert!(path.knots().windows(2).all(|w| w[0] > w[1]));
        for &l in path.knots() {
            let b = path.eval(l).unwrap();
            prop_assert!(kkt_violation(&data, None, &b, l, &[]) <= 1e-8);
        }
    }
}
