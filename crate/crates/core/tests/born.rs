mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xferscat::amplitudes::Side;
use xferscat::born::{born_2d, born_3d, incident_vector};
use xferscat::potentials::{construct_deformation_3d, Potential2D, Potential3D};
use xferscat::Error;

#[test]
fn zero_potential() {
    for side in SIDES {
        assert_eq!(born_2d(&Potential2D::zero(), 1.0, 0.2, 1.0, side).unwrap().f, c(0.0, 0.0));
    }
    assert_eq!(born_3d(&Potential3D::zero(), 1.0, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).unwrap().f, c(0.0, 0.0));
}

#[test]
fn forward_amplitude_is_total_integral() {
    let v = Potential2D::gaussian(c(0.7, -0.2), [0.3, -0.4], [0.8, 1.1], 0.6).unwrap();
    let total = integrate_c(|x| integrate_c(|y| v.eval_position(x, y).unwrap(), -12.0, 12.0), -10.0, 10.0);
    for side in SIDES {
        let t0 = deg(20.0);
        let theta = if side == Side::Left { t0 } else { PI - t0 };
        let b = born_2d(&v, 1.3, t0, theta, side).unwrap();
        assert!(b.q.iter().all(|q| q.abs() < 1e-15));
        let want = -total / (2.0 * (2.0 * PI).sqrt());
        assert!((b.f - want).norm() < 1e-10 * want.norm());
    }
    let v3 = Potential3D::gaussian(c(0.5, 0.5), [0.0, 1.0, -1.0], [1.0, 0.7, 1.3]).unwrap();
    let total = c(0.5, 0.5) * ((2.0 * PI).powf(1.5) * 0.7 * 1.3);
    let f = born_3d(&v3, 2.0, [0.3, 0.2, 1.0], [0.6, 0.4, 2.0]).unwrap().f;
    assert!((f + total / (4.0 * PI)).norm() < 1e-14 * total.norm());
}

#[test]
fn rejects_combs() {
    let comb = Potential2D::delta_comb(vec![c(1.0, 0.0)], 1.0).unwrap();
    assert!(matches!(born_2d(&comb, 1.0, 0.0, 0.5, Side::Left), Err(Error::UnsupportedFamily(_))));
}

#[test]
fn incidence_directions() {
    let [x, y] = incident_vector(2.0, deg(30.0), Side::Left);
    assert!((x - 3f64.sqrt()).abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
    let [x, y] = incident_vector(2.0, deg(30.0), Side::Right);
    assert!((x + 3f64.sqrt()).abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn linear_and_bounded_transfer(
        k in 0.1f64..3.0, t0 in -1.5f64..1.5, th in -3.1f64..3.1,
        a in -1.0f64..1.0, b in -1.0f64..1.0, alpha in 0.1f64..2.0,
    ) {
        let v1 = Potential2D::gaussian(c(a, 0.2), [0.1, 0.3], [1.0, 0.7], 0.2).unwrap();
        let v2 = rational(alpha, 1, 1.2, c(b, -0.4));
        let sum = Potential2D::sum(vec![v1.clone(), v2.clone()]);
        for side in SIDES {
            let r = born_2d(&sum, k, t0, th, side).unwrap();
            let q = r.q[0].hypot(r.q[1]);
            prop_assert!(q <= 2.0 * k * (1.0 + 1e-15));
            let parts = born_2d(&v1, k, t0, th, side).unwrap().f + born_2d(&v2, k, t0, th, side).unwrap().f;
            prop_assert!((r.f - parts).norm() <= 1e-15 * (r.f.norm() + parts.norm()).max(1e-300));
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

#[test]
fn deformed_pair_is_indistinguishable_below_alpha() {
    let v1 = Potential3D::gaussian(c(1.0, 0.0), [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
    let v2 = construct_deformation_3d(&v1, 1.0, c(1.0, 0.5), 1.0, 1.0, 1.0, 1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in [0.5, 1.0] {
        for _ in 0..200 {
            let (s0, s) = (random_unit(&mut rng), random_unit(&mut rng));
            assert_eq!(born_3d(&v1, k, s0, s).unwrap().f, born_3d(&v2, k, s0, s).unwrap().f);
        }
    }
    // back-scattering along the diagonal puts q deep in the deformation's support
    let s = [1.0, 1.0, 0.0];
    let (f1, f2) = (born_3d(&v1, 1.5, [-1.0, -1.0, 0.0], s).unwrap().f, born_3d(&v2, 1.5, [-1.0, -1.0, 0.0], s).unwrap().f);
    assert!((f1 - f2).norm() > 1e-3 * f1.norm());
}
