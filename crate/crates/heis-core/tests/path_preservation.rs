//! Cross-module checks of the forward direction: every rigid map, driven
//! through its conformal-factor clock, produces statistically certified
//! horizontal Brownian motion — and the clock built from any horizontal
//! component agrees with the defining one.

use heis_core::catalog::named_map;
use heis_core::experiment::{pushforward_experiment, PushforwardConfig};
use heis_core::field::DEFAULT_FD_STEP;
use heis_core::path::{simulate_hbm, uniform_grid};
use heis_core::point::GroupPoint;
use heis_core::rng::RngSpec;
use heis_core::timechange::sigma_clock_component;

#[test]
fn catalog_pushforwards_pass_the_battery_across_seeds() {
    let maps = [
        ("translation:0.4,-0.2,0.9", 1usize),
        ("rotation:1.3", 1),
        ("compose:dilation:0.5;rotation:0.8;translation:0.1,0.1,0.0", 1),
    ];
    let cfg = PushforwardConfig {
        n_paths: 100,
        ..Default::default()
    };
    for (id, n) in maps {
        let f = named_map(id, n).unwrap();
        let g0 = GroupPoint::origin(n);
        let mut passes = 0;
        for run in 0..10u64 {
            let out =
                pushforward_experiment(&f, &g0, &cfg, &RngSpec::new(3000 + run, 0)).unwrap();
            if out.report.pass {
                passes += 1;
            }
        }
        assert!(passes >= 8, "{id}: only {passes}/10 runs passed");
    }
}

#[test]
fn clock_is_component_independent_for_conformal_maps() {
    // For conformal maps every horizontal component defines the same clock.
    let grid = uniform_grid(0.5, 1e-3);
    let path = simulate_hbm(&GroupPoint::origin(1), &grid, &RngSpec::new(3100, 0)).unwrap();
    for id in ["dilation:2", "rotation:0.9", "compose:rotation:0.4;dilation:1.7"] {
        let f = named_map(id, 1).unwrap();
        let reference = sigma_clock_component(&path, &f, 0, DEFAULT_FD_STEP).unwrap();
        for comp in 1..2 * f.target_dim() {
            let other = sigma_clock_component(&path, &f, comp, DEFAULT_FD_STEP).unwrap();
            for (a, b) in reference.values().iter().zip(other.values()) {
                assert!(
                    (a - b).abs() <= 1e-6 * (1.0 + a.abs()),
                    "{id}: clock from component {comp} diverged ({a} vs {b})"
                );
            }
        }
    }
}

#[test]
fn anisotropic_clock_components_disagree() {
    // The non-conformal counterexample: |∇_H f₁|² = 4 but |∇_H f₂|² = 1.
    let grid = uniform_grid(0.2, 1e-3);
    let path = simulate_hbm(&GroupPoint::origin(1), &grid, &RngSpec::new(3200, 0)).unwrap();
    let f = named_map("anisotropic", 1).unwrap();
    let c0 = sigma_clock_component(&path, &f, 0, DEFAULT_FD_STEP).unwrap();
    let c1 = sigma_clock_component(&path, &f, 1, DEFAULT_FD_STEP).unwrap();
    let end = c0.values().len() - 1;
    let ratio = c0.values()[end] / c1.values()[end];
    assert!((ratio - 4.0).abs() < 1e-9, "clock ratio {ratio}");
}
