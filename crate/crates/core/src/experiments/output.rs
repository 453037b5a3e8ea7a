use super::{CalibrationRow, ChannelValidationRow, PoissonValidationRow, RocPoint};
use std::io::{self, Write};

pub fn write_roc_csv<W: Write>(mut w: W, points: &[RocPoint]) -> io::Result<()> {
    writeln!(
        w,
        "detector,k,mu,target_pfa,achieved_pfa,pfa_ci_low,pfa_ci_high,pm,pm_ci_low,pm_ci_high,tau3,gamma,trials"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.detector.name(),
            p.k,
            p.mu,
            p.target_pfa,
            p.achieved_pfa.value,
            p.achieved_pfa.ci.0,
            p.achieved_pfa.ci.1,
            p.pm.value,
            p.pm.ci.0,
            p.pm.ci.1,
            p.tau3,
            p.gamma,
            p.pm.n
        )?;
    }
    Ok(())
}

pub fn write_calibration_csv<W: Write>(mut w: W, rows: &[CalibrationRow]) -> io::Result<()> {
    writeln!(
        w,
        "detector,k,mu,target_pfa,tau3,gamma,calibration_pfa,ci_low,ci_high,trials"
    )?;
    for r in rows {
        let c = &r.calibration;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.detector.name(),
            r.k,
            r.mu,
            c.omega,
            c.tau3,
            c.gamma,
            c.randomized_pfa,
            c.ci.0,
            c.ci.1,
            c.n
        )?;
    }
    Ok(())
}

pub fn write_channel_csv<W: Write>(mut w: W, rows: &[ChannelValidationRow]) -> io::Result<()> {
    writeln!(w, "k_b,t,analytic,simulated,stderr,gap,asymptote")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.k_b, r.t, r.analytic, r.simulated, r.stderr, r.gap, r.asymptote
        )?;
    }
    Ok(())
}

pub fn write_poisson_csv<W: Write>(mut w: W, rows: &[PoissonValidationRow]) -> io::Result<()> {
    writeln!(w, "k_b,time,mean_analytic,mean_simulated,tv,trials")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.k_b, r.time, r.mean_analytic, r.mean_simulated, r.tv, r.trials
        )?;
    }
    Ok(())
}
