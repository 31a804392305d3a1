// Scratch experiment (removed later): timing and quality of the full pipeline.
use chiralchain::chain::Branch;
use chiralchain::nn::TrainConfig;
use chiralchain::pipeline::*;

#[test]
#[ignore]
fn experiment_full_otoc_training() {
    let t0 = std::time::Instant::now();
    let spec = SweepSpec::paper_default(TargetKind::Otoc, Branch::Plus);
    let records = generate_dataset(&spec).unwrap();
    println!("dataset: {} records in {:?}", records.len(), t0.elapsed());
    for epochs in [120usize, 300, 500] {
        let t1 = std::time::Instant::now();
        let config = TrainConfig { epochs, seed: 7, ..Default::default() };
        let run = run_training_pipeline(&records, 0.8, &config).unwrap();
        println!(
            "epochs {epochs}: {:?}  initial {:.4e} final {:.4e} ratio {:.1}x sync {:.3}",
            t1.elapsed(),
            run.initial_test_mse,
            run.report.test_mse,
            run.initial_test_mse / run.report.test_mse,
            run.report.peak_sync_fraction
        );
    }
}
