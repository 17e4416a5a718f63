//! Sample p-means of a bivariate skew-normal sample, and how well their
//! direction of travel lines up with the skewness vector.

use pmean::mv::{colinearity_score, mv_pmean, sample_mvsn, trajectory, MVSNSpec};

fn main() -> pmean::Result<()> {
    let grid = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0];
    let spec = MVSNSpec::new(vec![1.0, -1.0], vec![vec![1.0, 0.3], vec![0.3, 2.0]], vec![4.0, 1.0])?;

    let sample = sample_mvsn(&spec, 20_000, 7)?;
    println!("sample mean    {:?}", sample.mean());
    println!("spatial median {:?}", mv_pmean(&sample, 1.0, 1e-10)?);

    let traj = trajectory(&spec, &grid, 20_000, 7)?;
    for (e, t) in traj.entries.iter().zip(&traj.tangents) {
        println!("p = {}  nu = [{:.5}, {:.5}]  tangent {:?}", e.p, e.nu[0], e.nu[1], t.tau);
    }
    match colinearity_score(&traj, &spec.lambda_skew) {
        Ok(c) => println!("smallest cosine with lambda: {c:.5}"),
        Err(e) => println!("no score: {e}"),
    }
    Ok(())
}
