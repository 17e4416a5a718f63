//! A convex increasing map of a law with decreasing density is truly
//! positively skewed. The square of an Exponential(1) is Weibull(1/2, 1).

use pmean::criteria::{convex_transform_verdict, ConvexMap};
use pmean::dist::DistributionSpec;
use pmean::pmean::{p_grid, trace_curve};

fn main() -> pmean::Result<()> {
    let base = DistributionSpec::exponential(1.0)?;
    let (verdict, pushed) = convex_transform_verdict(&base, &ConvexMap::square())?;
    println!("{} -> {}", pushed.describe(), verdict.conclusion.as_str());

    let weibull = DistributionSpec::weibull(0.5, 1.0)?;
    for y in [0.1, 1.0, 4.0, 25.0] {
        println!("cdf({y}) = {:.12}  weibull = {:.12}", pushed.cdf(y), weibull.cdf(y));
    }
    let curve = trace_curve(&pushed, &p_grid(1.0, 6.0, 1.0)?)?;
    for pt in curve.solved() {
        println!("p = {}  nu = {:.8}", pt.p, pt.nu);
    }
    Ok(())
}
