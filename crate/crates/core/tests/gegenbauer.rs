use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xfeyn_core::gegenbauer::*;
use xfeyn_core::specfun::HalfInt;

const WEIGHTS: [i64; 6] = [1, 2, 3, 4, 5, 6];

fn lam(twice: i64) -> HalfInt {
    HalfInt::from_twice(twice)
}

#[test]
fn explicit_form_matches_generating_function() {
    for &t in &[1, 2, 3, 4] {
        for n in 0..=12 {
            let p = gegenbauer_coeffs(PolySpec::gegenbauer(lam(t), n)).unwrap();
            for i in 0..=40 {
                let x = -1.0 + i as f64 / 20.0;
                let got = p.eval(x);
                let want = generating_series_coeff(t as f64 / 2.0, n, x);
                let scale = want.abs().max(1.0);
                assert!((got - want).abs() < 1e-12 * scale, "λ={} n={n} x={x}: {got} vs {want}", t as f64 / 2.0);
            }
        }
    }
}

#[test]
fn orthogonality_by_quadrature() {
    for &t in &[1, 2, 3, 4] {
        let l = t as f64 / 2.0;
        for n in 0..=10u32 {
            for m in 0..=10u32 {
                let pn = gegenbauer_coeffs(PolySpec::gegenbauer(lam(t), n)).unwrap();
                let pm = gegenbauer_coeffs(PolySpec::gegenbauer(lam(t), m)).unwrap();
                let nodes = (4.0 * (n as f64 + m as f64 + l + 2.0)).ceil() as usize;
                let gl = GaussLegendre::new(nodes).unwrap();
                // x = cos θ absorbs the endpoint singularity of the weight.
                let val = gl.integrate(0.0, PI, |th| {
                    let x = th.cos();
                    pn.eval(x) * pm.eval(x) * th.sin().powf(2.0 * l)
                });
                if n == m {
                    let want = orthogonality_norm(l, n);
                    assert!(((val - want) / want).abs() < 1e-10, "λ={l} n={n}: {val} vs {want}");
                } else {
                    assert!(val.abs() < 1e-10 * orthogonality_norm(l, n.max(m)), "λ={l} n={n} m={m}: {val}");
                }
            }
        }
    }
}

#[test]
fn conversions_invert_exactly() {
    for &t in &WEIGHTS {
        for n in 0..=10u32 {
            let mono = monomial_to_gegenbauer(n, lam(t)).unwrap();
            let mut x_n = vec![xfeyn_core::specfun::ExactScalar::zero(); n as usize];
            x_n.push(xfeyn_core::specfun::ExactScalar::one());
            assert_eq!(mono.expand(), ExactPoly::from_coeffs(x_n));

            let cheb = chebyshev_to_gegenbauer(n, lam(t)).unwrap();
            assert_eq!(cheb.expand(), chebyshev_poly(n));

            for &s in &WEIGHTS {
                let re = reproject_gegenbauer(lam(s), n, lam(t)).unwrap();
                assert_eq!(re.expand(), gegenbauer_coeffs(PolySpec::gegenbauer(lam(s), n)).unwrap());
            }
            for m in 0..=10u32 {
                let lin = product_linearize(n, m, lam(t)).unwrap();
                let a = gegenbauer_coeffs(PolySpec::gegenbauer(lam(t), n)).unwrap();
                let b = gegenbauer_coeffs(PolySpec::gegenbauer(lam(t), m)).unwrap();
                assert_eq!(lin.expand(), &a * &b, "λ={} n={n} m={m}", lam(t));
            }
        }
    }
}

#[test]
fn weights_below_half_are_rejected() {
    assert!(monomial_to_gegenbauer(3, HalfInt::ZERO).is_err());
    assert!(reproject_gegenbauer(HalfInt::ZERO, 3, lam(2)).is_err());
    assert!(product_linearize(1, 1, HalfInt::ZERO).is_err());
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[test]
fn zonal_reproducing_property_on_the_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(20261017);
    let samples = 1_000_000;
    let w1 = [0.0, 0.0, 1.0];
    let c = 0.95f64;
    let w2 = [(1.0 - c * c).sqrt(), 0.0, c];
    let pts: Vec<[f64; 3]> = (0..samples).map(|_| random_unit(&mut rng)).collect();
    for n in 0..=4u32 {
        let mut acc = 0.0;
        for w in &pts {
            let a = gegenbauer_values(0.5, n, dot(&w1, w))[n as usize];
            let b = gegenbauer_values(0.5, n, dot(w, &w2))[n as usize];
            acc += a * b;
        }
        let estimate = 4.0 * PI * acc / samples as f64;
        let want = zonal_coefficient(3, n).unwrap().to_f64() * gegenbauer_values(0.5, n, c)[n as usize];
        assert!(((estimate - want) / want).abs() < 0.02, "n={n}: {estimate} vs {want}");
    }
}
