//! Runs the full skewness pipeline on a handful of laws and prints which
//! criterion decided each one.

use pmean::criteria::{skew_verdict, VerdictOptions};
use pmean::dist::DistributionSpec;

fn main() -> pmean::Result<()> {
    let laws = [
        "weibull(k=2)",
        "weibull(k=4)",
        "chi_squared(k=3)",
        "skew_normal(alpha=-2)",
        "log_logistic(beta=1.5)",
        "normal(mu=1,sigma=2)",
    ];
    for text in laws {
        let spec = DistributionSpec::parse(text)?;
        let v = skew_verdict(&spec, &VerdictOptions::default())?;
        let by = v.evidence.first().map_or("-", |e| e.criterion.as_str());
        println!("{text:<26} {:<20} via {by}", v.conclusion.as_str());
        if let Some(w) = &v.witness {
            println!("{:<26} witness {w:?}", "");
        }
    }
    Ok(())
}
