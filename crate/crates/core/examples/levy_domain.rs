//! The Lévy law only has moments below 1/2, so p-means exist for p < 3/2.
//! Shows the domain clipping and the single crossing of the two half
//! densities around each p-mean.

use pmean::criteria::crossing_profile;
use pmean::dist::DistributionSpec;
use pmean::pmean::{p_grid, trace_curve, PDomain};

fn main() -> pmean::Result<()> {
    let spec = DistributionSpec::levy(0.0, 1.0)?;
    let domain = PDomain::for_spec(&spec);
    let (grid, warning) = domain.clip(&p_grid(1.0, 3.0, 0.05)?);
    if let Some(w) = warning {
        println!("{w}");
    }
    let curve = trace_curve(&spec, &grid)?;
    for pt in curve.solved() {
        let cp = crossing_profile(&spec, pt.p)?;
        println!("p = {:.2}  nu = {:.6}  crossings = {}", pt.p, pt.nu, cp.crossing_count);
    }
    println!("mode = {:?}", spec.mode());
    Ok(())
}
