//! p-means of finitely supported and empirical laws.

use pmean::pmean::{discrete_pmean, empirical_pmean};

fn main() -> pmean::Result<()> {
    let binomial = [(0.0, 4.0 / 9.0), (1.0, 4.0 / 9.0), (2.0, 1.0 / 9.0)];
    let bernoulli = [(0.0, 2.0 / 3.0), (1.0, 1.0 / 3.0)];
    for p in [1.0, 2.0, 3.0, 4.0] {
        println!(
            "p = {p}  Binomial(2,1/3): {:.10}  Bernoulli(1/3): {:.10}",
            discrete_pmean(&binomial, p)?,
            discrete_pmean(&bernoulli, p)?
        );
    }
    let data = [0.3, 0.9, 1.1, 1.7, 2.4, 6.0];
    for p in [1.0, 1.5, 2.0, 8.0] {
        println!("sample p-mean, p = {p}: {:.6}", empirical_pmean(&data, p)?);
    }
    Ok(())
}
