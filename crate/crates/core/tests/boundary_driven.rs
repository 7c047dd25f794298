use std::f64::consts::PI;

use strainwave_core::{run_simulation, BoundaryDrive, MaterialParams, SimulationConfig};

/// Left-running wave entering at `x = 1`, valid until it reaches `x = 0`.
fn dalembert(x: f64, t: f64, drive: &BoundaryDrive) -> f64 {
    let retarded = t - (1.0 - x);
    if retarded > 0.0 {
        drive.right_value(retarded)
    } else {
        0.0
    }
}

#[test]
fn linear_law_follows_the_travelling_wave() {
    let config = SimulationConfig {
        t_final: 0.75,
        snapshot_interval: Some(0.25),
        ..SimulationConfig::default()
    };
    let out = run_simulation(&config).unwrap();
    let times: Vec<f64> = out.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 4);
    for (t, want) in times.iter().zip([0.0, 0.25, 0.5, 0.75]) {
        assert!((t - want).abs() < 1e-12, "{times:?}");
    }
    let last = out.snapshots.last().unwrap();
    let amplitude = config.drive.amplitude;
    let worst = out
        .space
        .dof_coords()
        .iter()
        .zip(&last.sigma)
        .map(|(&x, s)| (s - dalembert(x, last.t, &config.drive)).abs())
        .fold(0.0, f64::max);
    // the front carries a slope discontinuity, so nodal errors there are O(h)
    assert!(worst < 0.05 * amplitude, "max nodal error {worst:e}");
    assert_eq!(out.report.max_newton_iterations, 1);
}

#[test]
fn reversing_the_drive_mirrors_the_solution() {
    let base = SimulationConfig {
        material: MaterialParams::new(1.0, 5.0, 1.5).unwrap(),
        n_cells: 60,
        t_final: 0.6,
        drive: BoundaryDrive::new(0.1, 2.0 * PI),
        ..SimulationConfig::default()
    };
    let flipped = SimulationConfig {
        drive: BoundaryDrive::new(-0.1, 2.0 * PI),
        ..base.clone()
    };
    let up = run_simulation(&base).unwrap();
    let down = run_simulation(&flipped).unwrap();
    let (a, b) = (up.snapshots.last().unwrap(), down.snapshots.last().unwrap());
    let peak = a.sigma.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    assert!(peak > 0.05);
    for (s, r) in a.sigma.iter().zip(&b.sigma) {
        assert!((s + r).abs() <= 1e-12 * peak, "{s} vs {r}");
    }
    assert!(up.report.max_newton_iterations > 1);
}

#[test]
fn strain_limiting_speeds_up_the_crest() {
    // f' < 1 away from zero stress, so c > 1 and the crest runs ahead of the
    // linear one (which moves toward x = 0)
    let linear = SimulationConfig {
        n_cells: 100,
        t_final: 0.5,
        drive: BoundaryDrive::new(0.3, 2.0 * PI),
        ..SimulationConfig::default()
    };
    let nonlinear = SimulationConfig {
        material: MaterialParams::new(1.0, 2.0, 1.5).unwrap(),
        ..linear.clone()
    };
    let first_crest = |cfg: &SimulationConfig| {
        let out = run_simulation(cfg).unwrap();
        let s = &out.snapshots.last().unwrap().sigma;
        let x = out.space.dof_coords();
        let i = (1..s.len() - 1).find(|&i| s[i] > 0.1 && s[i] >= s[i - 1] && s[i] > s[i + 1]).unwrap();
        x[i]
    };
    assert!(first_crest(&nonlinear) < first_crest(&linear));
}
