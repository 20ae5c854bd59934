use langevin_core::diagnostics::{assignment, bias_scaling_fit, kl_gaussian, w2_squared_sorted};
use langevin_core::pgauss::PGaussParams;
use langevin_core::potential::{Builtin, SmoothnessSpec};
use langevin_core::ula::{run_chains, step_with_noise, ChainState, InitSpec, Regime, RunOptions};
use langevin_core::Seed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_moment_sandwich(pi in 0usize..4, di in 0usize..4, half in 1u32..3) {
        let p = [1.0, 1.25, 1.5, 2.0][pi];
        let d = [1usize, 2, 8, 64][di];
        let n = 2.0 * half as f64;
        let m = PGaussParams::new(p, d).unwrap().norm_moment(n).unwrap();
        let lo = (d as f64).powf((n / p).floor());
        let hi = (d as f64 + n / 2.0).powf(n / p);
        prop_assert!(lo <= m * (1.0 + 1e-12) && m <= hi * (1.0 + 1e-12), "p={p} d={d} n={n}: {lo} <= {m} <= {hi}");
    }

    #[test]
    fn gaussian_kl_nonnegative(a in 0.01f64..10.0, b in 0.01f64..10.0, d in 1usize..20) {
        let k = kl_gaussian(a, b, d).unwrap();
        prop_assert!(k >= 0.0);
        prop_assert_eq!(kl_gaussian(a, a, d).unwrap(), 0.0);
    }

    #[test]
    fn sorted_w2_shift(mut xs in proptest::collection::vec(-10.0f64..10.0, 2..200), c in -3.0f64..3.0) {
        xs.sort_by(f64::total_cmp);
        let ys: Vec<f64> = xs.iter().map(|x| x + c).collect();
        prop_assert!((w2_squared_sorted(&xs, &ys) - c * c).abs() < 1e-9);
        prop_assert!((w2_squared_sorted(&xs, &ys) - w2_squared_sorted(&ys, &xs)).abs() < 1e-12);
        prop_assert_eq!(w2_squared_sorted(&xs, &xs), 0.0);
    }

    #[test]
    fn assignment_not_worse_than_identity(vals in proptest::collection::vec(0.0f64..5.0, 36)) {
        let cost: Vec<Vec<f64>> = vals.chunks(6).map(|r| r.to_vec()).collect();
        let perm = assignment(&cost);
        let mut seen = [false; 6];
        for &j in &perm { prop_assert!(!seen[j]); seen[j] = true; }
        let best: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        let ident: f64 = (0..6).map(|i| cost[i][i]).sum();
        prop_assert!(best <= ident + 1e-12);
    }

    #[test]
    fn power_law_slope(c in 0.1f64..10.0, k in 0.2f64..3.0) {
        let etas = [0.01, 0.03, 0.1, 0.3];
        let kls: Vec<f64> = etas.iter().map(|e: &f64| c * e.powf(k)).collect();
        let f = bias_scaling_fit(&etas, &kls).unwrap();
        prop_assert!((f.slope - k).abs() < 1e-10);
    }

    #[test]
    fn noiseless_gaussian_step_contracts(x in -100.0f64..100.0, eta in 0.0f64..1.9) {
        let m = Builtin::Gaussian.build(1).unwrap();
        let s = step_with_noise(&ChainState::new(vec![x], 0), &m, eta, &[0.0]).unwrap();
        prop_assert!((s.position[0] - (1.0 - eta) * x).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn scaled_spec(l in 0.1f64..5.0, s in 0.1f64..5.0) {
        let spec = SmoothnessSpec::new(vec![(l, 0.5), (2.0 * l, 1.0)]).unwrap().scaled(s).unwrap();
        prop_assert!((spec.l_max() - 2.0 * l * s).abs() < 1e-12);
        prop_assert!((spec.l_sum() - 3.0 * l * s).abs() < 1e-12);
    }

    #[test]
    fn chain_streams_independent_of_count(seed in any::<u64>(), n in 1usize..6) {
        let m = Builtin::Gaussian.build(2).unwrap();
        let init = InitSpec::Point(vec![0.5, -0.5]);
        let one = run_chains(&m, 0.1, 50, &init, 1, Seed::new(seed), &RunOptions::default()).unwrap();
        let many = run_chains(&m, 0.1, 50, &init, n, Seed::new(seed), &RunOptions::default()).unwrap();
        prop_assert_eq!(one.final_states.row(0), many.final_states.row(0));
    }
}

#[test]
fn regime_names_round_trip() {
    for r in [Regime::Lsi, Regime::Smoothed, Regime::PoincareDissipative, Regime::NonconvexOutsideBall, Regime::Manual] {
        assert_eq!(Regime::parse(r.as_str()).unwrap(), r);
    }
}
