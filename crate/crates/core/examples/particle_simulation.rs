// Brownian particle simulation of one sensor against the analytical mean,
// then a count histogram against the Poisson law.
//
// ```text
// cargo run --release --example particle_simulation
// ```

use molcom_detect::channel::{Link, ReactionChannelParams};
use molcom_detect::numerics::poisson_pmf;
use molcom_detect::particlesim::{ensemble_histogram, SimConfig, Simulator};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = ReactionChannelParams::table1_ns();
    let link = Link::new(params)?;
    let mu = 3e7;
    let times = vec![2.5e-5, 5e-5, 1e-4];

    let mut cfg = SimConfig::sensor_validation(params, mu, times.clone());
    cfg.seed = 7;
    let sim = Simulator::new(cfg)?;
    println!(
        "binding probability per step {:.4e}",
        sim.binding_probability()
    );
    let means = sim.ensemble_means(200)?;
    println!(
        "{:>9} {:>10} {:>10} {:>8}",
        "t", "analytic", "simulated", "stderr"
    );
    for (t, (m, se)) in times.iter().zip(&means) {
        let exact = link.transient_mean(*t, mu, 1.0)?;
        println!("{t:>9.2e} {exact:>10.3} {m:>10.3} {se:>8.3}");
    }

    // secretion over the last millisecond only; earlier molecules have decayed
    let time = 2e-3;
    let mut cfg = SimConfig::sensor_validation(params, 1e7, vec![time]);
    cfg.release_start = time - 1e-3;
    let hist = ensemble_histogram(&cfg, 300, time)?;
    let mean = link.transient_mean(time, 1e7, 1.0)?;
    println!(
        "count at {time}s: mean {:.2} (analytic {mean:.2}), TV to Poisson {:.3}",
        hist.mean(),
        hist.tv_distance(|k| poisson_pmf(k, mean))
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
