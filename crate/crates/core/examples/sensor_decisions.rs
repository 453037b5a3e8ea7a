// Sensor thresholds from a false alarm budget, and the per-sensor
// probabilities of both links for one target.
//
// ```text
// cargo run --example sensor_decisions
// ```

use molcom_detect::channel::{LayoutLimits, Link, NetworkLayout, ReactionChannelParams};
use molcom_detect::detection::{
    link_probs, ns_decide, ns_llr, select_tau1, select_tau2, transition_probs, Channels,
    NoiseModel, Scenario, Thresholds,
};
use molcom_detect::numerics::poisson_tail;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let zeta0 = 10.0;
    for omega in [1e-3, 1e-2, 0.05] {
        let tau = select_tau1(omega, zeta0);
        println!(
            "omega1 = {omega:<6} -> tau1 = {tau} (P_fa = {:.3e})",
            poisson_tail(tau, zeta0)
        );
    }
    let tau2 = select_tau2(0.05, 5.0);

    // the LLR is increasing in y, so thresholding y is the same test
    let gain = 2e-8;
    for y in [10, 16, 25] {
        println!(
            "y = {y:>2}: LLR {:+.3}, decide {}",
            ns_llr(y, 6e8, gain, zeta0)?,
            ns_decide(y, 16)
        );
    }

    let ns = ReactionChannelParams::table1_ns();
    let fc = ReactionChannelParams::table1_fc();
    let layout = NetworkLayout::new(
        [0.0, 0.0, 0.0],
        vec![[1.5, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 4.0, 0.0]],
        [0.0, -3.0, 0.0],
        LayoutLimits::new(ns.receiver_radius, fc.receiver_radius),
    )?;
    let channels = Channels {
        ns: Link::new(ns)?,
        fc: Link::new(fc)?,
        n_release: 1e7,
        elapsed: 0.005,
    };
    let thresholds = Thresholds {
        tau1: 16,
        tau2,
        tau3: 0.0,
    };
    let noise = NoiseModel::uniform(zeta0, 5.0, layout.len());
    let lp = link_probs(
        &Scenario::new(layout.target, 6e8)?,
        &layout,
        &thresholds,
        &noise,
        &channels,
    )?;
    let tp = transition_probs(&lp)?;
    println!("sensor  P_d(TS)   P_fa(SF)  P_d(SF)   rho0      rho1");
    for k in 0..layout.len() {
        println!(
            "{k:>6}  {:.3e} {:.3e} {:.3e} {:.3e} {:.3e}",
            lp.ts[k].p_d, lp.sf[k].p_fa, lp.sf[k].p_d, tp.rho0[k], tp.rho1[k]
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
