//! Sampling overhead and nominal shot cost as functions of robustness.

use nmecut::channels::kappa_nme;
use nmecut::entangle::k_from_robustness;
use nmecut::estimator::shots_for_accuracy;

fn main() -> nmecut::Result<()> {
    let eps = 0.01;
    println!("{:>6} {:>8} {:>8} {:>10}", "R", "k", "kappa", "shots");
    for i in 0..=10 {
        let r = i as f64 / 10.0;
        let k = k_from_robustness(r)?;
        let kappa = kappa_nme(k);
        println!("{r:>6.1} {k:>8.4} {kappa:>8.4} {:>10}", shots_for_accuracy(kappa, eps)?);
    }
    Ok(())
}
