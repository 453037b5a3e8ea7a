// Monte Carlo ROC of GAD, G-LRT and G-LOD on an eight-sensor network,
// followed by a sweep over nested sensor subsets. Writes CSV to stdout.
//
// ```text
// cargo run --release --example roc_small_network
// ```

use molcom_detect::experiments::{run_roc, sweep_k, write_roc_csv, ExperimentConfig, TopologyMode};

fn config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::table1();
    cfg.network.k = 8;
    cfg.network.edge = 8.0;
    cfg.network.fc = [-14.0, -14.0, 0.0];
    cfg.network.topology = TopologyMode::Fixed;
    cfg.target = [2.0, 2.0, 0.0];
    cfg.grid_side = 6;
    cfg.mu_levels = 10;
    cfg.calibration_trials = 4000;
    cfg.evaluation_trials = 4000;
    cfg.roc_mu = vec![1e7, 3e7];
    cfg.roc_pfa = vec![0.01, 0.05, 0.2];
    cfg.sweep_mu = 2e7;
    cfg.sweep_k = vec![2, 4, 8];
    cfg.sweep_pfa = 0.05;
    cfg
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = config();
    let roc = run_roc(&cfg)?;
    for w in &roc.warnings {
        eprintln!("warning: {w}");
    }
    let stdout = std::io::stdout();
    write_roc_csv(stdout.lock(), &roc.points)?;

    let sweep = sweep_k(&cfg, &cfg.sweep_k)?;
    println!();
    write_roc_csv(stdout.lock(), &sweep.points)?;
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
