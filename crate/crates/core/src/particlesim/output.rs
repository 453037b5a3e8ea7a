use super::{Histogram, TimeSeries};
use std::io::{self, Write};

/// `time,bound_count`
pub fn write_series_csv<W: Write>(mut w: W, series: &TimeSeries) -> io::Result<()> {
    writeln!(w, "time,bound_count")?;
    for (t, c) in series.times.iter().zip(&series.counts) {
        writeln!(w, "{t},{c}")?;
    }
    Ok(())
}

/// `time,mean,stderr`
pub fn write_means_csv<W: Write>(mut w: W, times: &[f64], means: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "time,mean,stderr")?;
    for (t, (m, se)) in times.iter().zip(means) {
        writeln!(w, "{t},{m},{se}")?;
    }
    Ok(())
}

/// `count,frequency`
pub fn write_histogram_csv<W: Write>(mut w: W, h: &Histogram) -> io::Result<()> {
    writeln!(w, "count,frequency")?;
    for (k, p) in h.pmf.iter().enumerate() {
        writeln!(w, "{k},{p}")?;
    }
    Ok(())
}
