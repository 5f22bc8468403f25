mod common;

use nnip_landscape::landscape::{
    displaced, landscape_1d, landscape_directions, uniform_grid, CountingSurface, LandscapeOptions,
    LandscapeProfile, ModelLoss, QuadraticSurface,
};
use nnip_landscape::potential::BASIS_LAYER;
use proptest::prelude::*;

use common::{labelled_set, small_model};

fn quadratic(seed: u64) -> QuadraticSurface {
    let p = small_model(true, seed).params().clone();
    let n = p.len();
    QuadraticSurface::new(p, vec![1.0; n], vec![3.0; n]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_count(n_dir in 1usize..6, half in 1usize..6, cache in any::<bool>(), seed in 0u64..50) {
        let s = CountingSurface::new(quadratic(seed));
        let opts = LandscapeOptions {
            t_grid: uniform_grid(2 * half + 1, -1.0, 1.0),
            n_directions: n_dir,
            seed,
            cache_origin: cache,
            ..LandscapeOptions::default()
        };
        let p = landscape_1d(&s, &opts).unwrap();
        let nt = opts.t_grid.len();
        let expect = if cache { n_dir * (nt - 1) + 1 } else { n_dir * nt };
        prop_assert_eq!(s.count(), expect);
        prop_assert_eq!(p.meta.evaluations, expect);
    }

    #[test]
    fn mean_is_order_independent(seed in 0u64..200, rot in 0usize..5) {
        let opts = LandscapeOptions { n_directions: 5, seed, ..LandscapeOptions::default() };
        let p = landscape_1d(&quadratic(seed), &opts).unwrap();
        let mut e = p.energy.clone();
        let mut f = p.force.clone();
        e.rotate_left(rot);
        f.rotate_left(rot);
        e.swap(0, 4);
        f.swap(0, 4);
        let q = LandscapeProfile::from_curves(p.t_grid.clone(), e, f, p.meta.clone()).unwrap();
        for (a, b) in p.mean_energy.iter().chain(&p.mean_force).zip(q.mean_energy.iter().chain(&q.mean_force)) {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
        }
    }

    #[test]
    fn frozen_blocks_never_perturbed(seed in 0u64..200, t in -2.0f64..2.0) {
        let m = small_model(true, seed);
        let theta = &m.params().values;
        let dirs = landscape_directions(m.params(), 3, seed, &[BASIS_LAYER]).unwrap();
        for d in &dirs {
            let moved = displaced(theta, &[(t, d)]);
            for b in m.partition().blocks.iter().filter(|b| b.layer == BASIS_LAYER) {
                prop_assert_eq!(&moved[b.range()], &theta[b.range()]);
            }
        }
    }

    #[test]
    fn quadratic_profile_is_symmetric(seed in 0u64..200) {
        let p = landscape_1d(&quadratic(seed), &LandscapeOptions { n_directions: 3, seed, ..LandscapeOptions::default() }).unwrap();
        let n = p.t_grid.len();
        for i in 0..n {
            let (a, b) = (p.mean_energy[i], p.mean_energy[n - 1 - i]);
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-12));
        }
        prop_assert_eq!(p.mean_energy[n / 2], 0.0);
    }
}

#[test]
fn parallel_matches_serial_on_a_model() {
    let d = labelled_set(4, 4, 2);
    let m = small_model(true, 3);
    let s = ModelLoss::new(&m, &d);
    let opts = LandscapeOptions {
        n_directions: 3,
        t_grid: uniform_grid(7, -0.5, 0.5),
        ..LandscapeOptions::default()
    };
    let par = landscape_1d(&s, &opts).unwrap();
    let ser = landscape_1d(
        &s,
        &LandscapeOptions {
            parallel: false,
            ..opts
        },
    )
    .unwrap();
    for (a, b) in par.energy.iter().flatten().zip(ser.energy.iter().flatten()) {
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
    }
    for (a, b) in par.force.iter().flatten().zip(ser.force.iter().flatten()) {
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300));
    }
}
