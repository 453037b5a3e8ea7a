// Full-size network (K = 64, 16 x 16 x 100 candidate grid) with the target
// moved to the corner nearest the fusion center.
//
// With the default target at (10, 10, 0) the sensors that see the target are
// about 57 um from the FC, far beyond the FC link's reach, so every detector
// sits on the chance line P_m = 1 - P_fa. Here the target is at
// (-10, -10, 0) and the statistics separate.
//
// ```text
// cargo run --release --example informative_scenario -- 20000
// ```

use molcom_detect::experiments::{run_roc, sweep_k, Detector, ExperimentConfig, TopologyMode};

fn run_example_with(trials: u64) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::table1();
    cfg.network.topology = TopologyMode::Fixed;
    cfg.target = [-10.0, -10.0, 0.0];
    cfg.calibration_trials = trials;
    cfg.evaluation_trials = trials;
    cfg.roc_mu = vec![4e9];
    if trials < 10_000 {
        cfg.roc_pfa = vec![1e-2, 1e-1];
    }

    let roc = run_roc(&cfg)?;
    println!("P_m at mu = 4e9, K = 64, {trials} trials per set");
    println!("{:>8} {:>8} {:>8} {:>8}", "P_fa", "GAD", "G-LRT", "G-LOD");
    for &pfa in &cfg.roc_pfa {
        let pm = |d| roc.point(d, 64, 4e9, pfa).map_or(f64::NAN, |p| p.pm.value);
        println!(
            "{pfa:>8} {:>8.4} {:>8.4} {:>8.4}",
            pm(Detector::Gad),
            pm(Detector::Glrt),
            pm(Detector::Glod)
        );
    }

    cfg.sweep_pfa = 0.1;
    cfg.sweep_mu = 4e9;
    let sweep = sweep_k(&cfg, &[16, 32, 64])?;
    for p in &sweep.points {
        println!(
            "K = {:>2} {:>6}: P_m {:.4} [{:.4}, {:.4}]",
            p.k,
            p.detector.name(),
            p.pm.value,
            p.pm.ci.0,
            p.pm.ci.1
        );
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    run_example_with(1000)
}

fn main() {
    let trials = match std::env::args().nth(1).map(|s| s.parse::<u64>()) {
        None => 1000,
        Some(Ok(n)) => n,
        Some(Err(e)) => {
            eprintln!("trials: {e}");
            std::process::exit(2);
        }
    };
    if let Err(e) = run_example_with(trials) {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
