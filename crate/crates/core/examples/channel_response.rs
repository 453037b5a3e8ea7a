// Transient and steady-state mean bound counts of the target-to-sensor link.
//
// ```text
// cargo run --release --example channel_response
// ```

use molcom_detect::channel::{derive_constants, Link, ReactionChannelParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = ReactionChannelParams::table1_ns();
    let c = derive_constants(&params)?;
    println!(
        "coverage {:.4}  absorbing fraction {:.4}  effective k_f {:.4e}",
        c.lambda_coverage, c.phi, c.kf_star
    );

    let link = Link::new(params)?;
    let mu = 1e3;
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>10}",
        "d", "t=50us", "t=250us", "t=1s", "mu*g(d)"
    );
    for d in [1.0, 2.0, 5.0] {
        let steady = mu * link.gain(d)?;
        let row: Vec<f64> = [5e-5, 2.5e-4, 1.0]
            .iter()
            .map(|&t| link.transient_mean(t, mu, d))
            .collect::<Result<_, _>>()?;
        println!(
            "{d:>6} {:>12.5e} {:>12.5e} {:>12.5e} {steady:>10.5e}",
            row[0], row[1], row[2]
        );
        let rel = (row[2] - steady).abs() / steady;
        if rel > 1e-3 {
            return Err(format!("no steady state at d = {d}: rel gap {rel:e}").into());
        }
    }

    // single-molecule activation probability at 1 um
    for t in [1e-5, 1e-4, 1e-3] {
        println!("P(t = {t:e}, d = 1) = {:.6e}", link.activation(t, 1.0)?);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
