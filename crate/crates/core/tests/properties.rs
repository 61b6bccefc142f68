use std::sync::Arc;

use fptlab::diffusion::{
    bm_transition_density, daniels_f, daniels_fpt_density, daniels_value, kendall_bm, lamperti_transform,
    linear_boundary_closed_forms, linear_noncross_prob, meander_transition_density, DiffusionModel, Interval,
};
use fptlab::gateaux::{bm_linear_gateaux_closed_lhs, bm_linear_gateaux_quadrature_rhs};
use proptest::prelude::*;

proptest! {
    #[test]
    fn gaussian_kernel_is_non_negative(t in 1e-4f64..50.0, x in -10.0f64..10.0, z in -10.0f64..10.0) {
        prop_assert!(bm_transition_density(t, x, z).unwrap() >= 0.0);
    }

    #[test]
    fn noncrossing_decreases_towards_the_boundary(g0 in 0.1f64..3.0, gt in -1.0f64..3.0, t in 0.1f64..3.0, d1 in 1e-3f64..2.0, dd in 1e-3f64..1.0) {
        let x = 0.0;
        let near = linear_noncross_prob(x, g0, gt, t, gt - d1).unwrap();
        let far = linear_noncross_prob(x, g0, gt, t, gt - d1 - dd).unwrap();
        prop_assert!(far >= near && (0.0..=1.0).contains(&near));
        // strict away from saturation at 1 in floating point
        if near < 0.999 {
            prop_assert!(far > near);
        }
    }

    #[test]
    fn kendall_is_the_flat_linear_density(a in 0.05f64..4.0, t in 1e-3f64..10.0) {
        let (_, dens) = linear_boundary_closed_forms(a, 0.0, t).unwrap();
        prop_assert_eq!(dens, kendall_bm(a, 0.0, t).unwrap());
    }

    #[test]
    fn daniels_identity(t in 1e-3f64..2.0, delta in 0.2f64..1.0, k1 in 0.2f64..2.0, k2 in 0.0f64..1.0) {
        let g = daniels_value(delta, k1, k2, t);
        let lhs = daniels_fpt_density(delta, k1, k2, t).unwrap();
        let rhs = 0.5 * daniels_f(delta, k1, k2, t, 0.0).unwrap() * bm_transition_density(t, 0.0, g).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn pinned_meander_density_is_non_negative(a in 0.01f64..4.0, s in 0.01f64..0.5, y in 0.01f64..3.0, dt in 0.01f64..0.45, z in 0.01f64..4.0) {
        let t = s + dt;
        prop_assert!(meander_transition_density(a, s, y, t, z).unwrap() >= 0.0);
        prop_assert!(meander_transition_density(a, 0.0, 0.0, t, z).unwrap() >= 0.0);
    }

    #[test]
    fn bm_linear_identity(a1 in 0.2f64..2.0, a2 in -2.0f64..2.0, b1 in -2.0f64..2.0, b2 in -2.0f64..2.0) {
        let tol = 1e-6;
        let lhs = bm_linear_gateaux_closed_lhs(a1, a2, b1, b2).unwrap();
        let rhs = bm_linear_gateaux_quadrature_rhs(a1, a2, b1, b2, tol).unwrap();
        prop_assert!((lhs - rhs.value).abs() < 2.0 * tol, "{} vs {}", lhs, rhs.value);
    }
}

#[test]
fn lamperti_round_trip_on_a_grid() {
    let m = DiffusionModel::new(
        Arc::new(|y: f64| 0.5 - y),
        Arc::new(|y: f64| 0.3 + y),
        Arc::new(|_| 1.0),
        Interval::new(-0.3, f64::INFINITY).unwrap(),
    )
    .unwrap();
    let tm = lamperti_transform(&m, 1.0).unwrap();
    for k in 1..60 {
        let y = -0.3 + 0.05 * k as f64;
        let back = tm.inverse_transform(tm.transform(y));
        assert!((back - y).abs() < 1e-8, "y={y}: {back}");
        let pointwise = tm.mu(tm.transform(y)) - ((0.5 - y) / (0.3 + y) - 0.5);
        assert!(pointwise.abs() < 1e-8, "drift at {y}");
    }
}
