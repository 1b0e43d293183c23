mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sotm::metrics::structural_change;
use sotm::trainer::{train_slice_traced, SweepRow};
use sotm::{
    pca_init, sigma_sweep, standardize, train_pooled_baseline, train_slice, train_sotm, Panel,
    SotmError, TrainConfig,
};

fn random_panel(seed: u64, t_n: usize, n: usize, d: usize) -> Panel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slices: Vec<Units> = (0..t_n).map(|_| random_units(&mut rng, n, d)).collect();
    panel(&slices)
}

#[test]
fn stationary_panel_has_no_structural_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows = random_units(&mut rng, 40, 3);
    let p = panel(&vec![rows; 6]);
    let (z, scaler) = standardize(&p).unwrap();
    for sigma in [0.8, 1.6, 4.0] {
        let model = train_sotm(&z, &scaler, &TrainConfig::new(6, sigma)).unwrap();
        let (_, sc) = structural_change(&model);
        assert!(sc.iter().all(|&v| v < 1e-4), "sigma {sigma}: {sc:?}");
    }
}

#[test]
fn single_period_equals_pooled_baseline() {
    let p = random_panel(3, 1, 30, 2);
    let cfg = TrainConfig::new(5, 1.2);
    let model = train_sotm(&p, &identity_scaler(2), &cfg).unwrap();
    let base = train_pooled_baseline(&p, &cfg).unwrap();
    assert_eq!(model.array(0), &base);
}

#[test]
fn baseline_trains_on_all_rows_together() {
    let p = random_panel(4, 3, 10, 2);
    let cfg = TrainConfig::new(4, 1.0);
    let pooled = p.pooled();
    assert_eq!(pooled.len(), 30);
    let init = pca_init(&pooled, 4).unwrap();
    let direct = train_slice(&init, &pooled, 1.0, 100, 1e-6).unwrap();
    assert_eq!(train_pooled_baseline(&p, &cfg).unwrap(), direct);
}

#[test]
fn later_arrays_start_from_their_predecessor() {
    let p = random_panel(8, 3, 15, 2);
    let cfg = TrainConfig::new(4, 1.0);
    let model = train_sotm(&p, &identity_scaler(2), &cfg).unwrap();
    for t in 1..3 {
        let trace = train_slice_traced(model.array(t - 1), p.slice(t), 1.0, 10, 0.0).unwrap();
        assert_eq!(trace.cycles_run(), 10);
        assert_eq!(&trace.array, model.array(t));
    }
}

#[test]
fn training_is_deterministic() {
    let p = random_panel(9, 4, 25, 3);
    let cfg = TrainConfig::new(5, 1.6);
    let a = train_sotm(&p, &identity_scaler(3), &cfg).unwrap();
    let b = train_sotm(&p, &identity_scaler(3), &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn single_precision_tracks_double() {
    let p = random_panel(10, 3, 20, 2);
    let records: Vec<(String, sotm::TimeLabel, Vec<f32>)> = p
        .slices()
        .iter()
        .zip(p.times())
        .flat_map(|(s, t)| {
            s.entities()
                .iter()
                .zip(s.rows())
                .map(|(&e, r)| {
                    (
                        p.entities()[e].clone(),
                        t.clone(),
                        r.iter().map(|&v| v as f32).collect(),
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let p32 = sotm::PanelF32::from_records(p.variables().to_vec(), records).unwrap();
    let (z64, s64) = standardize(&p).unwrap();
    let (z32, s32) = standardize(&p32).unwrap();
    let cfg = TrainConfig::new(4, 1.2);
    let m64 = train_sotm(&z64, &s64, &cfg).unwrap();
    let m32 = train_sotm(&z32, &s32, &cfg).unwrap();
    for (a, b) in m64.arrays().iter().zip(m32.arrays()) {
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - *y as f64).abs() < 1e-3, "{x} vs {y}");
        }
    }
}

#[test]
fn sweep_rows_follow_the_radius_list() {
    let p = random_panel(12, 3, 20, 2);
    let (z, s) = standardize(&p).unwrap();
    let rows: Vec<SweepRow<f64>> =
        sigma_sweep(&z, &s, &TrainConfig::new(4, 1.0), &[0.5, 1.0, 2.0]).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.sigma).collect::<Vec<_>>(),
        [0.5, 1.0, 2.0]
    );
    assert!(matches!(
        sigma_sweep(&z, &s, &TrainConfig::new(4, 1.0), &[2.0, 1.0]),
        Err(SotmError::InvalidConfig(_))
    ));
}

#[test]
fn invalid_settings_are_rejected() {
    let p = random_panel(13, 2, 10, 2);
    for cfg in [
        TrainConfig::new(1, 1.0),
        TrainConfig::new(4, 0.0),
        TrainConfig::new(4, f64::NAN),
    ] {
        assert!(matches!(
            train_sotm(&p, &identity_scaler(2), &cfg),
            Err(SotmError::InvalidConfig(_))
        ));
    }
    assert!(matches!(
        train_sotm(&p, &identity_scaler(3), &TrainConfig::new(4, 1.0)),
        Err(SotmError::DimensionMismatch { .. })
    ));
}
