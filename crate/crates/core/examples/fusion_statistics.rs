// The three fusion statistics on a three-sensor network, with exact error
// rates from enumerating every decision vector.
//
// ```text
// cargo run --example fusion_statistics
// ```

use molcom_detect::channel::{Link, ReactionChannelParams};
use molcom_detect::detection::{
    exact_exceedance, fisher_info, DecisionVector, DetectionContext, GridSpec, Stage,
};

fn bits(d: &[bool]) -> String {
    d.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let ns = Link::new(ReactionChannelParams::table1_ns())?;
    // sensor-to-FC links given directly as (false alarm, detection)
    let sf = vec![
        Stage::from_probs(0.02, 0.95),
        Stage::from_probs(0.05, 0.9),
        Stage::from_probs(0.01, 0.99),
    ];
    let sensors = vec![[1.5, 0.0, 0.0], [0.0, 2.0, 0.0], [-2.0, -1.0, 0.0]];
    let ctx = DetectionContext::from_parts(ns, sensors, 16, 10.0, sf)?;

    let x_t = [0.3, 0.3, 0.0];
    let mu = 1e7;
    let positions = GridSpec::square_positions(6.0, 6, 0.0);
    let grid = GridSpec::new(positions.clone(), GridSpec::mu_levels(mu, 20))?;
    let gad = ctx.gad_table(&x_t, mu)?;
    let glrt = ctx.glrt_table(&grid)?;
    let glod = ctx.glod_table(&positions)?;

    println!("d    GAD       G-LRT     G-LOD     G-LRT estimate");
    for i in 0..8 {
        let d = DecisionVector::enumerate(3, i);
        let (best, _) = glrt.best(&d).ok_or("no admissible candidate")?;
        let (x, m) = grid.candidate(best);
        println!(
            "{}  {:+8.4}  {:8.4}  {:+8.4}  ({:+.1}, {:+.1}) mu={m:.1e}",
            bits(&d),
            gad.max(&d),
            2.0 * glrt.max(&d),
            glod.max(&d),
            x[0],
            x[1]
        );
    }

    // exact operating points of the G-LRT with no randomization
    let h0 = ctx.transition(&x_t, 0.0)?;
    let h1 = ctx.transition(&x_t, mu)?;
    let stat = |d: &[bool]| 2.0 * glrt.max(d);
    let mut taus: Vec<f64> = (0..8)
        .map(|i| stat(&DecisionVector::enumerate(3, i)))
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    for tau in taus {
        let pfa = exact_exceedance(stat, &h0.rho1, &h0.comp1, tau, 0.0);
        let pd = exact_exceedance(stat, &h1.rho1, &h1.comp1, tau, 0.0);
        println!("tau3 = {tau:8.4}: P_fa {pfa:.4e}  P_m {:.4e}", 1.0 - pd);
    }
    println!(
        "Fisher information at mu = 0: {:.4e}",
        fisher_info(&x_t, 0.0, &ctx)?
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
