use curvegeom::{build_chart, BoundaryChart, DomainSpec, PlanarDomain};
use flowcalc::{
    big_a, big_abar, check_params, eval_J, eval_Jbar, eval_Theta, profile_bound, q_for_gamma, sigma_max,
    theta_brackets, theta_upper_bound, AuxInputs, AuxParams, FlowError, LEstimates,
};
use proptest::prelude::*;

fn ellipse_chart(a: f64) -> BoundaryChart {
    let dom = PlanarDomain::new(DomainSpec::Ellipse { a, b: 1.0 }).unwrap();
    build_chart(&dom, 2.0).unwrap()
}

fn inputs(chart: &BoundaryChart) -> AuxInputs {
    AuxInputs {
        p: 3.0,
        sigma: 0.1,
        q: 1.5,
        k: 0.5,
        eta: 0.1,
        r0: 1.0,
        r1: 1e-3,
        s1: 1.5,
        k1: chart.max_curvature(),
        tau: chart.tangent_slope_bound(),
        l: 1.0,
    }
}

#[test]
fn gamma_follows_sigma_and_q() {
    let chart = ellipse_chart(2.0);
    let params = AuxParams::new(inputs(&chart)).unwrap();
    assert!((params.gamma() - 0.4).abs() < 1e-15);
    let changed = params.with(|i| i.q = 1.25).unwrap();
    assert!((changed.gamma() - 0.2).abs() < 1e-15);
    assert!(params.with(|i| i.sigma = 0.3).is_err());
    assert!(params.with(|i| i.q = 2.0).is_err());
    assert!(params.with(|i| i.p = 2.0).is_err());
}

#[test]
fn j_examples() {
    let chart = ellipse_chart(2.0);
    let params = AuxParams::new(inputs(&chart)).unwrap();
    let (r, s) = (1.0 / 32.0, 0.7);
    let st = 1.0 - r * chart.curvature(s);
    assert_eq!(eval_J(0.0, -0.3, r, s, &params, &chart).unwrap(), -0.3 / st);
    let flat = params.with(|i| i.k = 0.0).unwrap();
    assert_eq!(eval_J(0.8, -0.3, r, s, &flat, &chart).unwrap(), -0.3 / st);
    let j = eval_J(0.8, -0.3, r, s, &params, &chart).unwrap();
    let expect = -0.3 / st + 0.5 * (s - 0.1) * r.powf(-0.4) * 0.8f64.powf(1.5);
    assert!((j - expect).abs() < 1e-14);
    assert!(matches!(eval_J(0.8, -0.3, 0.0, s, &params, &chart), Err(FlowError::SingularWeight { .. })));
    assert!(eval_J(0.0, -0.3, 0.0, s, &params, &chart).is_ok());

    assert_eq!(eval_Jbar(0.0, -0.2, r, s, &params).unwrap(), -0.2);
    assert_eq!(eval_Jbar(0.9, -0.2, r, 0.0, &params).unwrap(), -0.2);
    let jb = eval_Jbar(0.9, -0.2, r, s, &params).unwrap();
    assert!((jb - (-0.2 + 0.5 * s * r.powf(-0.4) * 0.9f64.powf(1.5))).abs() < 1e-14);
}

#[test]
fn theta_examples() {
    let chart = ellipse_chart(2.0);
    let params = AuxParams::new(inputs(&chart)).unwrap().with(|i| i.k = 0.0).unwrap();
    let (r, s) = (0.05, 0.4);
    let g = params.gamma();
    let x = big_a(r, s, &params, &chart).unwrap();
    let t = eval_Theta(x, 0.3, 0.0, r, s, &params, &chart).unwrap();
    assert!((t + g * (g + 1.0) / (r * r)).abs() < 1e-12);
    assert!(t < 0.0);
    // A → γ as the curvature vanishes.
    let flat = ellipse_chart(1000.0);
    let params = AuxParams::new(inputs(&flat)).unwrap();
    let a = big_a(1.0, 0.0, &params, &flat).unwrap();
    assert!((a - 0.4).abs() < 1e-5, "{a}");
    assert_eq!(big_a(0.0, 0.3, &params, &flat).unwrap(), 0.4);
    assert_eq!(big_abar(0.0, 0.3, &params, &flat).unwrap(), 0.4);
    assert!(eval_Theta(0.4, 0.0, 1.0, r, s, &params, &flat).is_err());
}

#[test]
fn check_params_examples() {
    let chart = ellipse_chart(2.0);
    let base = AuxParams::new(inputs(&chart)).unwrap();
    let ok = base.with(|i| i.q = q_for_gamma(0.01, 0.1)).unwrap();
    let rep = check_params(&ok);
    // 0.1 · min(1/4, 1/9)
    assert!((rep.gamma_bound - 0.1 / 9.0).abs() < 1e-15, "{}", rep.gamma_bound);
    assert!((rep.gamma - 0.01).abs() < 1e-15);
    assert!(rep.hyp_gamma_ok && rep.gamma_margin > 0.0);
    assert_eq!(rep.k_exponent, 0.5);
    assert!(rep.suggested_r1_max > 0.0);

    let bad = base.with(|i| i.q = q_for_gamma(0.02, 0.1)).unwrap();
    let rep = check_params(&bad);
    assert!(!rep.feasible && !rep.hyp_gamma_ok);
    assert_eq!(rep.binding, "hypGamma");

    let tight = ok.with(|i| i.r1 = 10.0 * rep.suggested_r1_max.max(1e-3)).unwrap();
    let rep = check_params(&tight);
    assert!(rep.hyp_gamma_ok && !rep.hyp_r1_ok);
    assert!(rep.binding.starts_with("hypr1:"));
}

#[test]
fn profile_quotient() {
    let chart = ellipse_chart(2.0);
    let params = AuxParams::new(inputs(&chart)).unwrap().with(|i| i.q = 1.1).unwrap();
    assert_eq!(profile_bound(0.0, 0.1, 0.5, &params).unwrap(), 0.0);
    assert!(matches!(profile_bound(1.0, 0.1, 0.1, &params), Err(FlowError::ProfileUndefined { .. })));
    let v = profile_bound(0.2, 0.1, 0.5, &params).unwrap();
    assert!((v - 0.2 * 0.4f64.powf(20.0) * 0.1f64.powf(-0.8)).abs() < 1e-12 * v);
    // r-power 1 − 2σ = 0.8 exceeds the nondegeneracy exponent 1/2 at p = 3.
    assert!(1.0 - 2.0 * params.sigma() > check_params(&params).k_exponent);
}

#[test]
fn l_estimates_take_the_three_suprema() {
    let (p, q) = (3.0, 1.5);
    let samples = [(0.5, 2.0, 0.25), (1.0, 0.5, 1.0), (0.0, 9.0, 0.1)];
    let l = LEstimates::from_samples(samples, p, q);
    assert!((l.l_grad - 1.0f64.max(0.5f64.sqrt() * 0.5f64.sqrt().max(0.0)).max(1.0)).abs() < 1e-15);
    let e = (q - 1.0) * (p - 2.0) / (p - 1.0);
    let lv = (0.5f64.powf(q - 1.0) / 0.25f64.powf(e)).powf(1.0 / (q - 1.0)).max(1.0);
    assert!((l.l_value - lv).abs() < 1e-12);
    assert_eq!(l.max(), l.l_grad_weighted.max(l.l_value).max(l.l_grad));
}

fn feasible_params(chart: &BoundaryChart, p: f64, sfrac: f64, l: f64, gfrac: f64, rfrac: f64, k: f64) -> AuxParams {
    let sigma = sfrac * sigma_max(p);
    let bound = sigma * (0.25f64).min(1.0 / (p * p * l.powf(p - 1.0)));
    let gamma = gfrac * bound;
    let mut inp = AuxInputs {
        p,
        sigma,
        q: q_for_gamma(gamma, sigma),
        k,
        eta: 0.0,
        r0: 1.0,
        r1: 0.0,
        s1: 0.75 * chart.s0,
        k1: chart.max_curvature(),
        tau: chart.tangent_slope_bound(),
        l,
    };
    let probe = AuxParams::new(AuxInputs { r1: 0.0, ..inp }).unwrap();
    inp.r1 = rfrac * probe.report().r1_bound;
    AuxParams::new(inp).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn feasible_parameters_make_both_brackets_nonpositive(
        p in 2.05f64..5.0,
        sfrac in 0.05f64..0.95,
        l in 0.1f64..4.0,
        gfrac in 0.02f64..0.999,
        rfrac in 0.02f64..0.999,
        k in 0.0f64..0.999,
    ) {
        let chart = ellipse_chart(2.0);
        let params = feasible_params(&chart, p, sfrac, l, gfrac, rfrac, k);
        prop_assert!(check_params(&params).feasible);
        let (r1, s1) = (params.r1(), params.s1());
        for i in 1..=64 {
            let r = r1 * i as f64 / 64.0;
            for j in 0..64 {
                let s = s1 * j as f64 / 63.0;
                for x in [big_a(r, s, &params, &chart).unwrap(), big_abar(r, s, &params, &chart).unwrap()] {
                    let (b1, b2) = theta_brackets(x, r, s, &params, &chart).unwrap();
                    prop_assert!(b1 <= 0.0 && b2 <= 0.0, "r={r} s={s} X={x}: {b1} {b2}");
                }
            }
        }
    }

    #[test]
    fn theta_is_below_its_bracket_bound(
        p in 2.05f64..5.0,
        sfrac in 0.05f64..0.95,
        q in 1.01f64..1.99,
        k in 0.0f64..0.999,
        u in 1e-3f64..5.0,
        g in 1e-3f64..20.0,
        r in 1e-3f64..1.5,
        s in 0.0f64..1.9,
        x in 1e-3f64..3.0,
    ) {
        let chart = ellipse_chart(2.0);
        prop_assume!(1.0 - r * chart.curvature(s) > 0.05);
        let sigma = sfrac * sigma_max(p);
        let l = LEstimates::from_samples([(u, g, r)], p, q).max();
        let params = AuxParams::new(AuxInputs {
            p, sigma, q, k, eta: 0.0, r0: 1.0, r1: 0.1, s1: 1.5,
            k1: chart.max_curvature(), tau: chart.tangent_slope_bound(), l,
        }).unwrap();
        let t = eval_Theta(x, u, g, r, s, &params, &chart).unwrap();
        let bound = theta_upper_bound(x, u, g, r, s, &params, &chart).unwrap();
        let scale = flowcalc::theta_terms(x, u, g, r, s, &params, &chart).unwrap()
            .iter().map(|v| v.abs()).sum::<f64>();
        prop_assert!(t <= bound + 1e-10 * scale, "{t} > {bound}");
    }
}
