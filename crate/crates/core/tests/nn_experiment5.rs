use chiralchain::chain::Branch;
use chiralchain::nn::*;
use chiralchain::pipeline::*;

fn standardize_pair_sets(
    train: &[(Vec<f64>, Vec<f64>)],
    test: &[(Vec<f64>, Vec<f64>)],
) -> (Vec<(Vec<f64>, Vec<f64>)>, Vec<(Vec<f64>, Vec<f64>)>) {
    let n = train.len() as f64;
    let d = train[0].0.len();
    let mut mu = vec![0.0; d];
    let mut sd = vec![0.0; d];
    for (x, _) in train { for i in 0..d { mu[i] += x[i] / n; } }
    for (x, _) in train { for i in 0..d { sd[i] += (x[i] - mu[i]).powi(2) / n; } }
    for s in sd.iter_mut() { *s = s.sqrt().max(1e-9); }
    let f = |set: &[(Vec<f64>, Vec<f64>)]| set.iter().map(|(x, y)| {
        (x.iter().enumerate().map(|(i, v)| (v - mu[i]) / sd[i]).collect(), y.clone())
    }).collect();
    (f(train), f(test))
}

fn sync(model: &NetworkModel, set: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let am = |v: &[f64]| v.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0 as i64;
    set.iter().filter(|(x, y)| {
        let p = model.infer(x).unwrap();
        (am(&p) - am(y)).abs() <= 1
    }).count() as f64 / set.len() as f64
}

#[test]
#[ignore]
fn experiment_diag() {
    let spec = SweepSpec::paper_default(TargetKind::Otoc, Branch::Plus);
    let records = generate_dataset(&spec).unwrap();
    let (train_recs, test_recs) = split(&records, 0.8, 7).unwrap();
    let (train_pairs, test_pairs) =
        standardize_pair_sets(&to_training_pairs(&train_recs), &to_training_pairs(&test_recs));

    // Full-batch convergence to the expected-loss optimum + seed spread.
    for seed in [1u64, 7, 42] {
        let mut model = NetworkModel::new(&[5, 64, 32, 25], 0.1, seed).unwrap();
        let mut s = seed;
        for (epochs, lr, batch) in [(600usize, 3e-3, 16usize), (600, 1e-3, 64), (600, 3e-4, 256), (400, 1e-4, 1064)] {
            let config = TrainConfig { epochs, learning_rate: lr, batch_size: batch, seed: s, ..Default::default() };
            train(&mut model, &train_pairs, None, &config).unwrap();
            s += 1;
        }
        let infer_train = evaluate_mse(&model, &train_pairs).unwrap();
        let test_mse = evaluate_mse(&model, &test_pairs).unwrap();
        println!(
            "seed {seed}: infer-train {:.3e} test {:.3e} sync-train {:.3} sync-test {:.3}",
            infer_train, test_mse, sync(&model, &train_pairs), sync(&model, &test_pairs)
        );
    }
}
