// Scratch experiment #2: input standardization + lr sweep.
use chiralchain::chain::Branch;
use chiralchain::nn::*;
use chiralchain::pipeline::*;

fn standardize(pairs: &[(Vec<f64>, Vec<f64>)]) -> (Vec<(Vec<f64>, Vec<f64>)>, Vec<f64>, Vec<f64>) {
    let n = pairs.len() as f64;
    let d = pairs[0].0.len();
    let mut mu = vec![0.0; d];
    let mut sd = vec![0.0; d];
    for (x, _) in pairs {
        for i in 0..d { mu[i] += x[i] / n; }
    }
    for (x, _) in pairs {
        for i in 0..d { sd[i] += (x[i] - mu[i]).powi(2) / n; }
    }
    for s in sd.iter_mut() { *s = s.sqrt().max(1e-9); }
    let out = pairs.iter().map(|(x, y)| {
        (x.iter().enumerate().map(|(i, v)| (v - mu[i]) / sd[i]).collect(), y.clone())
    }).collect();
    (out, mu, sd)
}

#[test]
#[ignore]
fn experiment_standardized() {
    let spec = SweepSpec::paper_default(TargetKind::Otoc, Branch::Plus);
    let records = generate_dataset(&spec).unwrap();
    let (train_recs, test_recs) = split(&records, 0.8, 7).unwrap();
    let train_pairs_raw = to_training_pairs(&train_recs);
    let test_pairs_raw = to_training_pairs(&test_recs);
    let (train_pairs, mu, sd) = standardize(&train_pairs_raw);
    let test_pairs: Vec<(Vec<f64>, Vec<f64>)> = test_pairs_raw.iter().map(|(x, y)| {
        (x.iter().enumerate().map(|(i, v)| (v - mu[i]) / sd[i]).collect(), y.clone())
    }).collect();
    for (lr, epochs) in [(1e-3, 300usize), (3e-3, 300), (3e-3, 800), (1e-2, 800)] {
        let mut model = NetworkModel::curve_predictor(7);
        let config = TrainConfig { epochs, learning_rate: lr, seed: 7, ..Default::default() };
        let t0 = std::time::Instant::now();
        let hist = train(&mut model, &train_pairs, None, &config).unwrap();
        let test_mse = evaluate_mse(&model, &test_pairs).unwrap();
        // peak sync on standardized inputs
        let mut synced = 0;
        for (x, y) in &test_pairs {
            let p = model.infer(x).unwrap();
            let am = |v: &[f64]| v.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap().0 as i64;
            if (am(&p) - am(y)).abs() <= 1 { synced += 1; }
        }
        println!(
            "lr {lr} epochs {epochs}: {:?} train {:.3e} test {:.3e} sync {:.3}",
            t0.elapsed(), hist.train_mse.last().unwrap(), test_mse,
            synced as f64 / test_pairs.len() as f64
        );
    }
}
