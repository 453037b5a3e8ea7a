// Loads the bundled parameter file, applies overrides the way `--set` does,
// and runs the calibrate experiment into a scratch directory.
//
// ```text
// cargo run --release --example run_from_config
// ```

use molcom_detect::cli::{run, Experiment, RunConfig};
use molcom_detect::config::{apply_override, config_from_table, parse_table, TABLE1_TOML};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut table = parse_table(TABLE1_TOML)?;
    apply_override(&mut table, "detection.tau1=18")?;
    let cfg = config_from_table(&table)?;
    println!(
        "K = {}, tau1 = {}, FC at {:?}",
        cfg.network.k, cfg.detection.tau1, cfg.network.fc
    );

    // a bad file is rejected with every problem listed
    let err =
        molcom_detect::config::parse_config("[network]\nk = 0\nedge = \"wide\"\n").unwrap_err();
    println!(
        "{} problems in the bad file, first: {}",
        err.0.len(),
        err.0[0]
    );

    let out = std::env::temp_dir().join("molcom-detect-example");
    let mut job = RunConfig::new(Experiment::Calibrate, &out);
    job.overrides = [
        "network.k=16",
        "sweep.k=[8, 16]",
        "trials.calibration=2000",
        "roc.mu=[4e9]",
        "grid.side=8",
        "grid.mu_levels=20",
    ]
    .map(String::from)
    .to_vec();
    let report = run(&job)?;
    if let Some(e) = report.error {
        return Err(e.into());
    }
    println!(
        "exit {}; manifest:\n{}",
        report.exit_code,
        std::fs::read_to_string(&report.manifest)?
    );
    print!(
        "{}",
        std::fs::read_to_string(out.join(Experiment::Calibrate.output()))?
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
