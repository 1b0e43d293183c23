mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sotm::{
    destandardize, standardize, train_sotm, MissingPolicy, Model, Panel, SotmError, TrainConfig,
};

fn random_panel(rng: &mut ChaCha8Rng) -> Panel {
    let t_n = rng.random_range(1..=4);
    let n = rng.random_range(3..=12);
    let d = rng.random_range(1..=4);
    let slices: Vec<Units> = (0..t_n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    (0..d)
                        .map(|k| rng.random_range(-50.0..50.0) * (k + 1) as f64)
                        .collect()
                })
                .collect()
        })
        .collect();
    panel(&slices)
}

#[test]
fn standardization_inverts_on_random_panels() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let p = random_panel(&mut rng);
        let (z, scaler) = standardize(&p).unwrap();
        for (s, zs) in p.slices().iter().zip(z.slices()) {
            for (x, zx) in s.rows().zip(zs.rows()) {
                let back = destandardize(zx, &scaler).unwrap();
                for (a, b) in x.iter().zip(&back) {
                    assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn saved_models_reload_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let dir = tempfile::tempdir().unwrap();
    for k in 0..100 {
        let p = random_panel(&mut rng);
        let (z, scaler) = standardize(&p).unwrap();
        let cfg = TrainConfig::new(rng.random_range(2..=5), rng.random_range(0.3..3.0));
        let model = train_sotm(&z, &scaler, &cfg).unwrap();
        let path = dir.path().join(format!("m{k}.json"));
        model.save(&path).unwrap();
        let back = Model::load(&path).unwrap();
        assert_eq!(back, model);
        for (a, b) in model.arrays().iter().zip(back.arrays()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}

#[test]
fn panel_csv_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    for _ in 0..20 {
        let p = random_panel(&mut rng);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = Panel::read_csv(buf.as_slice(), MissingPolicy::Reject).unwrap();
        assert_eq!(back, p);
    }
}

#[test]
fn load_reports_missing_files_as_io() {
    let err = Model::load("/nonexistent/dir/model.json").unwrap_err();
    assert!(err.is_io());
    assert!(matches!(err, SotmError::Io { .. }));
}

proptest! {
    #[test]
    fn scaled_columns_have_zero_mean_unit_std(
        rows in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 2), 3..30)
    ) {
        prop_assume!((0..2).all(|k| rows.iter().any(|r| (r[k] - rows[0][k]).abs() > 1e-6)));
        let p = panel(&[rows]);
        let (z, _) = standardize(&p).unwrap();
        let s = z.slice(0);
        let n = s.len() as f64;
        for k in 0..2 {
            let m = s.rows().map(|r| r[k]).sum::<f64>() / n;
            let v = s.rows().map(|r| (r[k] - m).powi(2)).sum::<f64>() / (n - 1.0);
            prop_assert!(m.abs() < 1e-9);
            prop_assert!((v - 1.0).abs() < 1e-9);
        }
    }
}
