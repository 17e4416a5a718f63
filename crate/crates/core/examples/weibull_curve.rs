//! Traces the p-mean curve of a Weibull law and compares the ends with the
//! closed-form median and mode.

use pmean::dist::DistributionSpec;
use pmean::pmean::{p_grid, trace_curve};

fn main() -> pmean::Result<()> {
    let k = 3.0;
    let spec = DistributionSpec::weibull(k, 1.0)?;
    let curve = trace_curve(&spec, &p_grid(1.0, 8.0, 0.5)?)?;

    println!("{:>5} {:>12} {:>11}", "p", "nu_p", "dnu/dp");
    for pt in curve.solved() {
        println!("{:>5} {:>12.8} {:>11}", pt.p, pt.nu, pt.dnu_sign.as_str());
    }
    println!("median (ln 2)^(1/k)   = {:.8}", 2f64.ln().powf(1.0 / k));
    println!("mode ((k-1)/k)^(1/k)  = {:.8}", ((k - 1.0) / k).powf(1.0 / k));
    Ok(())
}
