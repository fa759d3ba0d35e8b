use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use xfeyn_core::amplitude::*;
use xfeyn_core::propagators::{gm_real, Kinematics};
use xfeyn_core::specfun::exact::{binomial, pochhammer, rat};
use xfeyn_core::specfun::{BesselEvalConfig, HalfInt};

fn cfg() -> BesselEvalConfig {
    BesselEvalConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn direct(dim: u32, m: f64, r: f64) -> f64 {
    gm_real(&Kinematics::radial(dim, r, m).unwrap(), &cfg()).unwrap()
}

#[test]
fn taylor_series_at_short_distance() {
    for lambda in 1..=3i64 {
        let dim = 2 * lambda as u32 + 2;
        let v = taylor_eval(HalfInt::from_int(lambda), 1.0, 0.1, 20).unwrap();
        assert!(rel(v, direct(dim, 1.0, 0.1)) < 1e-10, "λ={lambda}");
    }
}

#[test]
fn taylor_partial_sums_converge() {
    for lambda in 1..=3i64 {
        let dim = 2 * lambda as u32 + 2;
        for &(m, r) in &[(1.0, 0.5), (0.5, 0.8), (2.0, 0.2)] {
            let want = direct(dim, m, r);
            let errs: Vec<f64> =
                [1u32, 3, 6, 12].iter().map(|&l| rel(taylor_eval(HalfInt::from_int(lambda), m, r, l).unwrap(), want)).collect();
            assert!(errs.windows(2).all(|w| w[1] < w[0] || w[0] < 1e-14), "λ={lambda} m={m} r={r}: {errs:?}");
            assert!(errs[3] < 1e-12);
        }
    }
}

#[test]
fn asymptotic_series_at_long_distance() {
    let v = asymptotic_eval(HalfInt::ONE, 1.0, 20.0, 6).unwrap();
    assert!(rel(v, direct(4, 1.0, 20.0)) < 1e-8);
    // half-integer order: the series terminates
    let v = asymptotic_eval(HalfInt::HALF, 1.3, 2.0, 3).unwrap();
    assert!(rel(v, direct(3, 1.3, 2.0)) < 1e-14);
}

#[test]
fn single_edge_methods_agree() {
    let orders = AmplitudeOrders::default();
    let single = |x: Vec<f64>, method| {
        let input = AmplitudeInput { dim: 4, edges: vec![(0, 1)], positions: vec![vec![0.0; 4], x], masses: vec![1.0] };
        amplitude_truncated_eval(&input, method, &orders, &cfg()).unwrap()
    };
    let near = vec![0.1, 0.0, 0.0, 0.0];
    assert!(rel(single(near.clone(), EvalMethod::Taylor), single(near, EvalMethod::Direct)) < 1e-10);
    let far = vec![0.0, 20.0, 0.0, 0.0];
    assert!(rel(single(far.clone(), EvalMethod::Asymptotic), single(far, EvalMethod::Direct)) < 1e-8);
}

#[test]
fn path_graph_is_a_product() {
    let orders = AmplitudeOrders::default();
    let positions = vec![vec![0.0, 0.0, 0.0], vec![0.3, 0.1, 0.0], vec![0.3, 0.5, -0.2]];
    let input = AmplitudeInput { dim: 3, edges: vec![(0, 1), (1, 2)], positions: positions.clone(), masses: vec![1.0, 2.0] };
    for method in [EvalMethod::Direct, EvalMethod::Asymptotic] {
        let both = amplitude_truncated_eval(&input, method, &orders, &cfg()).unwrap();
        let mut prod = 1.0;
        for (i, &(s, t)) in input.edges.iter().enumerate() {
            let one = AmplitudeInput { dim: 3, edges: vec![(s, t)], positions: positions.clone(), masses: vec![input.masses[i]] };
            prod *= amplitude_truncated_eval(&one, method, &orders, &cfg()).unwrap();
        }
        assert!(rel(both, prod) < 1e-15);
    }
}

#[test]
fn gegenbauer_method_matches_direct() {
    let orders = AmplitudeOrders { taylor_terms: 12, asymptotic_terms: 6, expansion: ExpansionOrders { radial: 30, degree: None } };
    let input = AmplitudeInput {
        dim: 4,
        edges: vec![(0, 1)],
        positions: vec![vec![0.4, 0.1, 0.0, 0.0], vec![0.1, 0.15, 0.05, 0.0]],
        masses: vec![1.5],
    };
    let g = amplitude_truncated_eval(&input, EvalMethod::Gegenbauer, &orders, &cfg()).unwrap();
    let d = amplitude_truncated_eval(&input, EvalMethod::Direct, &orders, &cfg()).unwrap();
    assert!(rel(g, d) < 1e-7, "{g} vs {d}");
}

#[test]
fn gegenbauer_method_rejects_divergent_ratio() {
    let input = AmplitudeInput { dim: 4, edges: vec![(0, 1)], positions: vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]], masses: vec![1.0] };
    let err = amplitude_truncated_eval(&input, EvalMethod::Gegenbauer, &AmplitudeOrders::default(), &cfg()).unwrap_err();
    assert!(matches!(err, xfeyn_core::Error::DivergentRatio(_)));
    let diag = AmplitudeInput { positions: vec![vec![1.0, 0.0, 0.0, 0.0]; 2], ..input };
    let err = amplitude_truncated_eval(&diag, EvalMethod::Direct, &AmplitudeOrders::default(), &cfg()).unwrap_err();
    assert_eq!(err, xfeyn_core::Error::Diagonal);
}

#[test]
fn unit_weight_partial_sums_at_right_angle() {
    let e = radial_power_expansion(HalfInt::ONE, HalfInt::ONE, ExpansionOrders { radial: 40, degree: None }).unwrap();
    let rho = 2.0;
    let geom = EdgeGeometry::new(rho, rho / 2.0, 0.0).unwrap();
    let sums = e.partial_sums(&geom, 1.0).unwrap();
    let want = 0.8 / (rho * rho);
    assert!(rel(*sums.last().unwrap(), want) < 1e-12);
}

#[test]
fn pole_branch_truncation_decays_geometrically() {
    for k in [1i64, 2, 3] {
        for lam in [1i64, 2, 3] {
            let e = radial_power_expansion(HalfInt::from_int(k), HalfInt::from_int(lam), ExpansionOrders { radial: 30, degree: None }).unwrap();
            for &(t, c) in &[(0.5, 0.3), (0.4, -0.7), (0.25, 0.95)] {
                let geom = EdgeGeometry::new(1.0, t, c).unwrap();
                let sums = e.partial_sums(&geom, 1.0).unwrap();
                let deltas: Vec<f64> = sums.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
                // compare blocks of two orders to smooth over sign changes of C_n(c)
                let blocks: Vec<f64> = deltas.chunks(2).map(|b| b.iter().sum()).collect();
                for w in blocks[4..].windows(2) {
                    if w[0] > 1e-14 {
                        assert!(w[1] <= 0.6 * w[0], "k={k} λ={lam} t={t} c={c}: {blocks:?}");
                    }
                }
                let exact = (1.0 - 2.0 * t * c + t * t).powf(-(k as f64));
                assert!(rel(*sums.last().unwrap(), exact) < 1e-7);
            }
        }
    }
}

type Bivariate = BTreeMap<(u32, u32), BigRational>;

fn add(map: &mut Bivariate, key: (u32, u32), v: BigRational) {
    *map.entry(key).or_insert_with(BigRational::zero) += v;
}

/// Coefficients of `t^n c^a` in `Σ_j w_j u^j`, `u = 2tc - t²`, truncated at `t^N`.
fn substitute(weights: &[BigRational], n_max: u32) -> Bivariate {
    let mut out = Bivariate::new();
    for (j, w) in weights.iter().enumerate() {
        let j = j as u64;
        for i in 0..=j {
            let n = (j + i) as u32;
            if n > n_max {
                continue;
            }
            let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            let c = w * BigRational::from_integer(binomial(j, i) * BigInt::from(2).pow((j - i) as u32) * sign);
            add(&mut out, (n, (j - i) as u32), c);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn strip(series: &BivariateSeries) -> Bivariate {
    series
        .iter()
        .map(|(k, v)| {
            let c = v.constant_part();
            assert_eq!(v.terms().count(), usize::from(!c.is_zero()), "entry {k:?} is not a pure constant");
            (*k, c.as_rational().expect("rational entry"))
        })
        .collect()
}

#[test]
fn power_expansion_resums_to_the_taylor_series() {
    let n_max = 14;
    for &twice_k in &[1i64, 2, 3, 4, 6] {
        let k = HalfInt::from_twice(twice_k);
        // (1-u)^{-k} = Σ_j (k)_j/j! u^j
        let weights: Vec<BigRational> = (0..=n_max as u64)
            .map(|j| pochhammer(&k.to_rational(), j) / BigRational::from_integer(xfeyn_core::specfun::exact::factorial(j)))
            .collect();
        let want = substitute(&weights, n_max);
        for &twice_l in &[1i64, 2, 3, 4] {
            let e = radial_power_expansion(k, HalfInt::from_twice(twice_l), ExpansionOrders { radial: n_max, degree: None }).unwrap();
            let (reg, log) = e.to_bivariate().unwrap();
            assert!(log.is_empty());
            assert_eq!(strip(&reg), want, "k={k} λ={}", HalfInt::from_twice(twice_l));
        }
    }
}

#[test]
fn log_expansion_resums_to_the_taylor_series() {
    let n_max = 12u32;
    for ell in 0..=3u64 {
        // (1-u)^ℓ
        let poly: Vec<BigRational> =
            (0..=ell).map(|j| BigRational::from_integer(binomial(ell, j)) * if j % 2 == 0 { rat(1, 1) } else { rat(-1, 1) }).collect();
        // ½ log(1-u) = -½ Σ_{q≥1} u^q/q
        let log_series: Vec<BigRational> = (0..=n_max as i64).map(|q| if q == 0 { rat(0, 1) } else { rat(-1, 2 * q) }).collect();
        let mut product = vec![BigRational::zero(); n_max as usize + 1];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in log_series.iter().enumerate() {
                if i + j <= n_max as usize {
                    product[i + j] += a * b;
                }
            }
        }
        let want_regular = substitute(&product, n_max);
        let want_log = substitute(&poly, n_max);
        for lam in [1i64, 2, 3] {
            let e = radial_log_expansion(ell as u32, HalfInt::from_int(lam), ExpansionOrders { radial: n_max, degree: None }).unwrap();
            assert_eq!(e.rho_power, 2 * ell as i64);
            let (reg, log) = e.to_bivariate().unwrap();
            assert_eq!(strip(&reg), want_regular, "ℓ={ell} λ={lam}");
            assert_eq!(strip(&log), want_log, "ℓ={ell} λ={lam}");
        }
    }
}

#[test]
fn coefficient_field() {
    let orders = ExpansionOrders { radial: 10, degree: None };
    for lam in 1..=3i64 {
        let lam = HalfInt::from_int(lam);
        for (t, _) in taylor_terms(lam, 4, MassParam::Symbolic).unwrap() {
            let e = edge_gegenbauer_expansion(t, lam, MassParam::Symbolic, orders).unwrap();
            assert!(e.pi_exponents().iter().all(|p| p.is_integer()), "λ={lam} ℓ={}", t.ell);
        }
    }
    for twice in [1i64, 3, 5] {
        let lam = HalfInt::from_twice(twice);
        let e = edge_gegenbauer_expansion(TaylorTermSpec::leading(lam), lam, MassParam::Symbolic, orders).unwrap();
        assert!(!e.regular().is_empty());
        for p in e.pi_exponents() {
            assert_eq!(HalfInt::from_twice(p.twice()), p);
        }
    }
}

#[test]
fn half_integer_leading_term_is_the_massless_limit() {
    // D = 5: G ~ Γ(3/2) 2^{1/2} (2π)^{-5/2} ‖x‖^{-3}
    let lam = HalfInt::from_twice(3);
    let c = taylor_term_coefficient(TaylorTermSpec::leading(lam), lam, MassParam::Symbolic).unwrap();
    let v = c.eval(1.0, 0.7);
    let want = xfeyn_core::propagators::massless_normalization(5).unwrap() * 0.7f64.powi(-3);
    assert!(rel(v, want) < 1e-14);
}

#[test]
fn expansion_table_round_trips() {
    let e = edge_gegenbauer_expansion(TaylorTermSpec::new(1), HalfInt::ONE, MassParam::Symbolic, ExpansionOrders { radial: 6, degree: Some(4) })
        .unwrap();
    let json = serde_json::to_string(&e).unwrap();
    let back: GegenExpansion = serde_json::from_str(&json).unwrap();
    assert_eq!(back, e);
    assert!(e.regular().keys().all(|(n, d)| d <= n && *d <= 4));
}
