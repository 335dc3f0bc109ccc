use proptest::prelude::*;

use stokeslab::counterexample::{eval_fields, evaluate, CounterexampleSpec};
use stokeslab::divsolve::solve_div;
use stokeslab::ops::{disc_integral, divergence, integrate_disc};
use stokeslab::stokes::{solve_stokes, ProblemData, StokesConfig};
use stokeslab::{DiscField, DiscGrid, NormOrder, SpaceTimeField, SpaceTimeGrid};

/// Polynomial in `x, y` of degree at most 4, shifted to mean zero.
fn mean_zero_poly(g: &DiscGrid, c: &[f64]) -> DiscField {
    let raw = DiscField::from_fn(g, |r, th| {
        let (x, y) = (r * th.cos(), r * th.sin());
        c[0] * x + c[1] * y + c[2] * x * y + c[3] * x * x * y + c[4] * y.powi(4) + c[5] * x * x
    });
    let mean = disc_integral(&raw).unwrap() / std::f64::consts::PI;
    raw.axpy(-mean, &DiscField::from_fn(g, |_, _| 1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn div_solver_inverts_divergence(c in proptest::collection::vec(-2.0f64..2.0, 6)) {
        let g = DiscGrid::new(96, 8).unwrap();
        let src = mean_zero_poly(&g, &c);
        let sol = solve_div(&src, NormOrder::hilbert()).unwrap();
        let res = integrate_disc(&divergence(&sol.u).unwrap().sub(&src).unwrap(), 2.0).unwrap();
        let scale = integrate_disc(&src, 2.0).unwrap().max(1e-12);
        prop_assert!(res <= 1e-8 * scale);
        prop_assert!(sol.residual_boundary <= 1e-6 * scale.max(1.0));
    }
}

#[test]
fn serialized_problem_solves_identically() {
    let g = DiscGrid::new(48, 4).unwrap();
    let time = SpaceTimeGrid::new(0.0, 0.4, 8).unwrap();
    let f = SpaceTimeField::from_fn(time, |t| {
        DiscField::from_fn_cartesian(&g, |r, th| [(1.0 + t) * r * th.sin(), t * r * r])
    })
    .unwrap();
    let div = SpaceTimeField::from_fn(time, |t| {
        mean_zero_poly(&g, &[t, 0.0, t * t, 0.0, 0.0, 0.0])
    })
    .unwrap();
    let f2 = SpaceTimeField::from_json(&f.to_json().unwrap(), None).unwrap();
    let div2 = SpaceTimeField::from_json(&div.to_json().unwrap(), Some(f2.grid())).unwrap();
    let cfg = StokesConfig::default();
    let a = solve_stokes(
        &ProblemData::new(f, div, NormOrder::hilbert()).unwrap(),
        &cfg,
    )
    .unwrap();
    let b = solve_stokes(
        &ProblemData::new(f2, div2, NormOrder::hilbert()).unwrap(),
        &cfg,
    )
    .unwrap();
    for (x, y) in a.v.slices().iter().zip(b.v.slices()) {
        assert_eq!(x.sub(y).unwrap().max_abs_coeff(), 0.0);
    }
    assert_eq!(a.report, b.report);
}

#[test]
fn sampled_counterexample_matches_pointwise_values() {
    let spec = CounterexampleSpec::new(3, 0.05)
        .unwrap()
        .with_grid(24, 4, 6);
    let fields = eval_fields(&spec).unwrap();
    let time = spec.time().unwrap();
    let nodes = spec.grid().unwrap().radial().nodes().to_vec();
    for k in [0, 3, 6] {
        let t = time.time(k);
        for j in [5, 15, nodes.len() - 1] {
            for th in [0.4, 2.5] {
                let exact = evaluate(3, nodes[j], th, t);
                assert!((fields.psi.slice(k).value_at(0, j, th) - exact.psi).abs() < 1e-10);
                assert!(
                    (fields.g.slice(k).value_at(0, j, th) - exact.g).abs()
                        < 1e-8 * (1.0 + exact.g.abs())
                );
            }
        }
    }
}
