use fptlab::diffusion::meander_transition_density;
use fptlab::quadrature::{integrate_to_infinity, QuadOptions};

fn opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-11, rel_tol: 1e-12, max_panels: 4000 }
}

#[test]
fn pinned_meander_from_origin_normalises() {
    for &a in &[0.5, 1.0, 2.0] {
        for &t in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let mass = integrate_to_infinity(
                |z| if z > 0.0 { meander_transition_density(a, 0.0, 0.0, t, z).unwrap() } else { 0.0 },
                0.0,
                opts(),
            );
            assert!((mass.value - 1.0).abs() < 1e-6, "a={a}, t={t}: {}", mass.value);
        }
    }
}

#[test]
fn pinned_meander_from_interior_normalises() {
    for &a in &[0.5, 1.0, 2.0] {
        for &(s, y, t) in &[(0.3, 0.4, 0.7), (0.1, 1.0, 0.9), (0.5, 2.0, 0.6)] {
            let mass = integrate_to_infinity(
                |z| if z > 0.0 { meander_transition_density(a, s, y, t, z).unwrap() } else { 0.0 },
                0.0,
                opts(),
            );
            assert!((mass.value - 1.0).abs() < 1e-6, "a={a}, s={s}, y={y}, t={t}: {}", mass.value);
        }
    }
}

#[test]
fn chapman_kolmogorov() {
    for &a in &[0.5, 1.0, 2.0] {
        for &(s, t) in &[(0.3, 0.7), (0.1, 0.9)] {
            for &z in &[0.25, 1.0, 1.8] {
                let lhs = integrate_to_infinity(
                    |y| {
                        if y > 0.0 {
                            meander_transition_density(a, 0.0, 0.0, s, y).unwrap()
                                * meander_transition_density(a, s, y, t, z).unwrap()
                        } else {
                            0.0
                        }
                    },
                    0.0,
                    opts(),
                );
                let rhs = meander_transition_density(a, 0.0, 0.0, t, z).unwrap();
                assert!((lhs.value - rhs).abs() < 1e-5, "a={a}, s={s}, t={t}, z={z}: {} vs {rhs}", lhs.value);
            }
        }
    }
}
