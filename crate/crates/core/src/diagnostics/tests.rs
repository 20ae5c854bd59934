use super::*;
use crate::potential::Builtin;
use rand_distr::{Distribution, StandardNormal};

fn normal_batch(n: usize, d: usize, sd: f64, shift: f64, seed: u64) -> SampleBatch {
    let mut rng = Seed::new(seed).rng();
    let v: Vec<f64> = (0..n * d).map(|_| { let z: f64 = StandardNormal.sample(&mut rng); shift + sd * z }).collect();
    SampleBatch::new(d, v)
}

fn gauss(d: usize) -> PotentialModel {
    Builtin::Gaussian.build(d).unwrap()
}

#[test]
fn kl_gaussian_closed_form() {
    assert_eq!(kl_gaussian(2.0, 2.0, 3).unwrap(), 0.0);
    // series of r − 1 − ln r about r = 1
    let x: f64 = 1.0 / 0.95 - 1.0;
    let series = x * x / 2.0 - x.powi(3) / 3.0 + x.powi(4) / 4.0 - x.powi(5) / 5.0 + x.powi(6) / 6.0;
    let k = kl_gaussian(1.0 / 0.95, 1.0, 1).unwrap();
    assert!((k - 0.5 * series).abs() < 1e-10, "{k}");
    assert!((k - 6.69e-4).abs() < 1e-6);
    assert!(kl_gaussian(1.1, 1.0, 1).unwrap() < kl_gaussian(1.2, 1.0, 1).unwrap());
    assert!(kl_gaussian(0.0, 1.0, 1).is_err());
}

#[test]
fn poisson_mad_matches_direct_sum() {
    for m in [0.3, 1.0, 2.5, 7.0] {
        let mut p = (-m as f64).exp();
        let mut direct = 0.0;
        for k in 0..200 {
            if k > 0 {
                p *= m / k as f64;
            }
            direct += p * (k as f64 - m).abs();
        }
        assert!((poisson_mad(m) - direct).abs() < 1e-12, "m={m}");
    }
}

#[test]
fn estimators_vanish_on_target_samples() {
    let s = normal_batch(100_000, 1, 1.0, 0.0, 1);
    let m = gauss(1);
    let q = kl_estimate(&s, &m, KlMethod::Quadrature, Seed::new(2)).unwrap();
    assert!(q.within(0.0, 3.0), "{q:?}");
    let k = kl_estimate(&s, &m, KlMethod::Knn, Seed::new(3)).unwrap();
    assert!(k.within(0.0, 3.0), "{k:?}");
    assert!((q.estimate - k.estimate).abs() <= 3.0 * (q.stderr.powi(2) + k.stderr.powi(2)).sqrt());
    let tv = tv_estimate(&s, &m, Seed::new(4)).unwrap();
    assert!(tv.estimate.abs() <= 3.0 * tv.stderr, "{tv:?}");
    let w = w2_estimate(&s, W2Reference::Model(&m), Seed::new(5)).unwrap();
    assert!(w.estimate.abs() <= 3.0 * w.stderr, "{w:?}");
}

#[test]
fn kl_detects_variance_mismatch_in_2d() {
    let m = gauss(2);
    let s = normal_batch(20_000, 2, 1.2, 0.0, 6);
    let truth = kl_gaussian(1.44, 1.0, 2).unwrap();
    let q = kl_estimate(&s, &m, KlMethod::Quadrature, Seed::new(7)).unwrap();
    let k = kl_estimate(&s, &m, KlMethod::Knn, Seed::new(8)).unwrap();
    assert!((q.estimate - truth).abs() < 0.1 * truth + 3.0 * q.stderr, "{q:?} vs {truth}");
    assert!((k.estimate - truth).abs() < 0.1 * truth + 3.0 * k.stderr, "{k:?} vs {truth}");
}

#[test]
fn quadrature_kl_is_permutation_invariant() {
    let s = normal_batch(2_000, 2, 1.0, 0.0, 9);
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.reverse();
    idx.swap(3, 1000);
    let t = s.select(&idx);
    let m = gauss(2);
    let a = kl_estimate(&s, &m, KlMethod::Quadrature, Seed::new(1)).unwrap();
    let b = kl_estimate(&t, &m, KlMethod::Quadrature, Seed::new(1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tv_near_one_for_disjoint_support() {
    let s = normal_batch(5_000, 1, 1.0, 20.0, 10);
    let tv = tv_estimate(&s, &gauss(1), Seed::new(1)).unwrap();
    assert!(tv.estimate > 0.99, "{tv:?}");
}

#[test]
fn w2_between_gaussians_and_shifts() {
    let a = normal_batch(100_000, 1, 1.0, 0.0, 11);
    let b = normal_batch(100_000, 1, 1.1, 0.0, 12);
    let w = w2_estimate(&a, W2Reference::Batch(&b), Seed::new(13)).unwrap();
    assert!(w.within(0.1, 3.0), "{w:?}");
    let same = w2_estimate(&a, W2Reference::Batch(&a), Seed::new(13)).unwrap();
    assert_eq!(same.estimate, 0.0);

    let p = normal_batch(600, 2, 1.0, 0.0, 14);
    let q = p.map_rows(|r| vec![r[0] + 0.3, r[1] - 0.4]);
    let w = w2_estimate(&p, W2Reference::Batch(&q), Seed::new(15)).unwrap();
    assert!((w.estimate - 0.5).abs() < 1e-9 + 3.0 * w.stderr, "{w:?}");
    assert_eq!(w2_estimate(&p, W2Reference::Batch(&p), Seed::new(15)).unwrap().estimate, 0.0);
    assert!(w2_estimate(&p, W2Reference::Model(&gauss(2)), Seed::new(1)).is_err());
    assert!(matches!(w2_estimate(&normal_batch(10, 1, 1.0, 0.0, 1), W2Reference::Batch(&a), Seed::new(1)), Err(Error::InsufficientSamples { .. })));
}

#[test]
fn w2_triangle_inequality() {
    let a = normal_batch(500, 2, 1.0, 0.0, 21);
    let b = normal_batch(500, 2, 1.3, 0.2, 22);
    let c = normal_batch(500, 2, 0.8, -0.3, 23);
    let ab = w2_estimate(&a, W2Reference::Batch(&b), Seed::new(1)).unwrap();
    let bc = w2_estimate(&b, W2Reference::Batch(&c), Seed::new(2)).unwrap();
    let ac = w2_estimate(&a, W2Reference::Batch(&c), Seed::new(3)).unwrap();
    let se = (ab.stderr.powi(2) + bc.stderr.powi(2) + ac.stderr.powi(2)).sqrt();
    assert!(ac.estimate <= ab.estimate + bc.estimate + 3.0 * se);
}

#[test]
fn small_batches_rejected() {
    let s = normal_batch(50, 1, 1.0, 0.0, 1);
    assert!(matches!(kl_estimate(&s, &gauss(1), KlMethod::Knn, Seed::new(1)), Err(Error::InsufficientSamples { needed: 100, got: 50 })));
    let s = normal_batch(200, 3, 1.0, 0.0, 1);
    assert!(matches!(kl_estimate(&s, &gauss(3), KlMethod::Quadrature, Seed::new(1)), Err(Error::Configuration(_))));
}

fn measured(estimate: f64, stderr: f64) -> Measured {
    Measured::new(estimate, stderr, "fixed", 0.0)
}

#[test]
fn pinsker_and_talagrand_checks() {
    let c = pinsker_check(&measured(0.0, 0.0), &measured(0.0, 0.0));
    assert!(c.pass && c.lhs == 0.0 && c.rhs == 0.0);
    // kl from a matched run, tv from a mismatched one
    let c = pinsker_check(&measured(1e-4, 1e-5), &measured(0.2, 0.005));
    assert!(!c.pass);
    let kl = measured(6.69e-4, 1e-4);
    let w2 = measured(0.0260, 0.002);
    assert!(talagrand_check(&kl, &w2, 1.0).pass);
    assert!(!talagrand_check(&kl, &w2, 1e4).pass);
    assert!((talagrand_check(&kl, &w2, 1.0).rhs - (2.0f64 * 6.69e-4).sqrt()).abs() < 1e-15);
}

#[test]
fn grad_moment_gaussian() {
    let s = normal_batch(50_000, 1, 1.0, 0.0, 31);
    let m = gauss(1);
    let c = grad_moment_check(&s, &m, 2.0).unwrap();
    assert!(c.pass && (c.lhs - 1.0).abs() < 0.03 && c.rhs == 2.0);
    let halved = m.clone().with_smoothness(SmoothnessSpec::single(0.5, 1.0).unwrap());
    assert!(!grad_moment_check(&s, &halved, 2.0).unwrap().pass);
}

use crate::potential::SmoothnessSpec;

#[test]
fn moment_from_kl_constants_double_entry() {
    let diss = DissipativitySpec::new(1.0, 0.1, 2.0).unwrap();
    for d in [1usize, 2, 5] {
        let m = gauss(d).with_dissipativity(diss);
        let (dt, mt) = moment_constants(&m, &diss);
        // β = 2: the (1 − β/2) term drops
        let dt2 = (d as f64 / 2.0) * (std::f64::consts::PI.ln() + 8f64.ln());
        // α = 1, L = 1: (1/2)(2b/a)^{1}; U(0) = 0; ln(2/β) = 0
        let mt2 = 0.5 * 0.2 + 0.1;
        assert!((dt - dt2).abs() < 1e-12 && (mt - mt2).abs() < 1e-12);
        let s = normal_batch(20_000, d, 1.0, 0.0, 40 + d as u64);
        let c = moment_from_kl_check(&s, &m, 0.0).unwrap();
        assert!(c.pass && (c.rhs - 8.0 * (dt2 + mt2)).abs() < 1e-12);
        let strong = gauss(d).with_dissipativity(DissipativitySpec::new(100.0, 0.1, 2.0).unwrap());
        assert!(moment_from_kl_check(&s, &strong, 0.0).unwrap().rhs < c.rhs);
    }
    assert!(moment_from_kl_check(&normal_batch(10, 1, 1.0, 0.0, 1), &gauss(1), 0.0).unwrap().pass);
}

#[test]
fn bias_fit_recovers_power() {
    let etas = [0.02, 0.05, 0.1, 0.2];
    let kls: Vec<f64> = etas.iter().map(|e| 3.0 * e).collect();
    let f = bias_scaling_fit(&etas, &kls).unwrap();
    assert!((f.slope - 1.0).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
    assert!(bias_scaling_fit(&etas[..3], &kls[..3]).is_err());
    assert!(bias_scaling_fit(&etas, &[1.0, 0.0, 1.0, 1.0]).is_err());
}

#[test]
fn smoothing_w2_gaussian() {
    let m = gauss(1);
    let c = smoothing_w2_check(&m, 0.05, 2.0, None, 100_000, Seed::new(50)).unwrap();
    assert!(c.pass && c.lhs < 0.1 * c.rhs, "{c:?}");
    assert!((c.rhs - 8.24 * 0.05f64.powi(2)).abs() < 1e-6);
    let z = smoothing_w2_check(&m, 0.0, 2.0, Some(1.0), 1000, Seed::new(50)).unwrap();
    assert_eq!(z.lhs, 0.0);
    assert!(smoothing_w2_check(&m, 0.06, 2.0, None, 1000, Seed::new(1)).is_err());
}

#[test]
fn report_rows_flag_negatives() {
    let r = DiagnosticsReport { kl: Some(measured(-1e-4, 1e-4)), tv: None, w2: None, checks: vec![Check::new("x", 1.0, 2.0, 0.0)] };
    let rows = r.rows();
    assert_eq!(rows[0][6], "negative");
    assert_eq!(rows[1][0], "fisher");
    assert_eq!(rows[2][6], "true");
    assert_eq!(fmt(0.1), "1.0000000000000001e-1");
    assert!(r.all_pass());
}
