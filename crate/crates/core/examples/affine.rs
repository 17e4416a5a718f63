//! Checks that p-means move with affine maps: ν_p(cX + s) = c·ν_p(X) + s.

use pmean::dist::DistributionSpec;
use pmean::pmean::verify_affine_equivariance;

fn main() -> pmean::Result<()> {
    let grid = [1.0, 1.5, 2.0, 3.0, 5.0];
    for (text, c, s) in [("gamma(shape=2)", 3.0, -1.0), ("skew_normal(alpha=4)", 0.5, 10.0), ("beta(a=2,b=5)", -2.0, 1.0)] {
        let spec = DistributionSpec::parse(text)?;
        let r = verify_affine_equivariance(&spec, c, s, &grid)?;
        println!("{text:<22} c = {c:<4} s = {s:<5} max deviation {:.2e}  pass {}", r.max_deviation, r.pass);
    }
    Ok(())
}
