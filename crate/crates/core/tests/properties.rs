use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use proptest::prelude::*;
use quench2d::analysis::{collapse_residual, Curve};
use quench2d::dmrg::local_energies;
use quench2d::ed::DenseOperator;
use quench2d::heatwave::{angular_energy_density, doppler_factor, HeatwaveParams};
use quench2d::lattice::{
    fields_at, front_profile, hamiltonian_mpo, tfi_hamiltonian, LatticeGeometry, ModelParams,
};
use quench2d::mps::{env::contract_expectation, Mps};
use quench2d::store::RunConfig;

fn geometry() -> impl Strategy<Value = LatticeGeometry> {
    prop_oneof![
        (2usize..=7).prop_map(|l| LatticeGeometry::chain(l).unwrap()),
        (2usize..=4, 2usize..=3, any::<bool>())
            .prop_map(|(lx, ly, p)| LatticeGeometry::new(lx, ly, p).unwrap()),
    ]
}

fn params() -> impl Strategy<Value = (ModelParams, f64)> {
    (0.5f64..4.0, 0.5f64..5.0, 0.0f64..1.0, -1.0f64..2.0).prop_map(|(gc, v, tau, t)| {
        (ModelParams::standard(gc, v, tau), t)
    })
}

fn as_matrix(a: &Array3<f64>, left: bool) -> Array2<f64> {
    let (dl, d, dr) = a.dim();
    let flat = a.iter().cloned().collect::<Vec<_>>();
    if left {
        Array2::from_shape_vec((dl * d, dr), flat).unwrap()
    } else {
        Array2::from_shape_vec((dl, d * dr), flat).unwrap()
    }
}

fn identity_error(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (m[[i, j]] - f64::from(i == j)).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn local_energies_sum_to_total((geom, (params, t), seed) in (geometry(), params(), any::<u64>())) {
        let fields = fields_at(&geom, &params, t).unwrap();
        let state = Mps::<f64>::random(geom.n_sites(), 6, seed).unwrap();
        let mpo = hamiltonian_mpo::<f64>(&geom, &fields, params.j).unwrap();
        let total = contract_expectation(&state, &mpo);
        let sum: f64 = local_energies(&state, &geom, &fields, params.j).unwrap().iter().map(|v| v.value).sum();
        prop_assert!((sum - total).abs() < 1e-10 * total.abs().max(1.0));
    }

    #[test]
    fn mpo_matches_dense_hamiltonian((geom, (params, t)) in (geometry(), params())) {
        let fields = fields_at(&geom, &params, t).unwrap();
        let from_mpo = hamiltonian_mpo::<f64>(&geom, &fields, params.j).unwrap().to_dense().unwrap();
        let dense = DenseOperator::new(&tfi_hamiltonian(&geom, &fields, params.j).unwrap()).unwrap().to_dense();
        let diff = (&from_mpo - &dense).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(diff < 1e-12);
    }

    #[test]
    fn canonical_form_is_orthonormal_and_preserves_state(n in 3usize..=8, chi in 1usize..=6, seed in any::<u64>(), c in 0usize..8) {
        let c = c % n;
        let mut state = Mps::<f64>::random(n, chi, seed).unwrap();
        let before = state.to_dense().unwrap();
        state.canonicalize(c).unwrap();
        let after = state.to_dense().unwrap();
        prop_assert!((&before - &after).iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-12);
        prop_assert!((state.norm() - 1.0).abs() < 1e-12);
        for k in 0..n {
            if k < c {
                let m = as_matrix(state.tensor(k), true);
                prop_assert!(identity_error(&m.t().dot(&m)) < 1e-12);
            } else if k > c {
                let m = as_matrix(state.tensor(k), false);
                prop_assert!(identity_error(&m.dot(&m.t())) < 1e-12);
            }
        }
    }

    #[test]
    fn front_profile_is_bounded_and_monotone(x in -20.0f64..20.0, t in -5.0f64..5.0, v in 0.1f64..10.0, tau in 0.0f64..2.0) {
        let f = front_profile(x, t, v, tau).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        let later = front_profile(x, t + 0.1, v, tau).unwrap();
        prop_assert!(later <= f + 1e-15);
        let symmetric = front_profile(-x, t, v, tau).unwrap();
        prop_assert!((symmetric - f).abs() < 1e-15);
    }

    #[test]
    fn doppler_invariants(beta in 0.0f64..0.99, theta in 0.0f64..PI) {
        let fwd = doppler_factor(0.0, beta).unwrap();
        let back = doppler_factor(PI, beta).unwrap();
        prop_assert!((fwd * back - 1.0).abs() < 1e-12);
        let eta = doppler_factor(theta, beta).unwrap();
        prop_assert!(eta >= fwd - 1e-12 && eta <= back + 1e-12);
        let params = HeatwaveParams { length: 5.0, ..HeatwaveParams::new(1.0, 1.0 / beta.max(1e-3), 0.9) };
        let ratio = angular_energy_density(PI, &params).unwrap() / angular_energy_density(0.0, &params).unwrap();
        let b = params.beta();
        let expected = doppler_factor(PI, b).unwrap().powi(-6);
        prop_assert!((ratio - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn collapse_residual_is_scale_invariant(sx in 0.1f64..10.0, sy in 0.1f64..10.0, shift in 0.0f64..0.5) {
        let curve = |label: f64, off: f64| Curve::new(label, (0..12).map(|i| {
            let x = 0.3 * i as f64 + off;
            (x, (1.0 + x * x).sqrt() + 0.05 * label * x)
        }));
        let curves = [curve(2.0, 0.0), curve(3.0, shift), curve(4.0, 0.5 * shift)];
        let scaled: Vec<Curve> = curves
            .iter()
            .map(|c| Curve::new(c.label, c.x.iter().zip(&c.y).map(|(&x, &y)| (sx * x, sy * y))))
            .collect();
        let a = collapse_residual(&curves).unwrap();
        let b = collapse_residual(&scaled).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300));
    }

    #[test]
    fn config_text_round_trip(ly in 1usize..=6, v in 0.5f64..8.0, tau in 0.0f64..1.0, chi in 1usize..600, exact in any::<bool>()) {
        let mut cfg = RunConfig::default();
        cfg.set("geometry.Ly", &ly.to_string()).unwrap();
        cfg.set("quench.v", &v.to_string()).unwrap();
        cfg.set("quench.tau", &tau.to_string()).unwrap();
        cfg.set("mps.chiMax", &chi.to_string()).unwrap();
        cfg.set("mps.exact", &exact.to_string()).unwrap();
        let back = RunConfig::from_text(&cfg.to_text()).unwrap();
        prop_assert_eq!(back.resolved(), cfg.resolved());
    }
}
