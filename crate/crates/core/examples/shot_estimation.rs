//! Estimates the outcome distribution of a cut wire from finite shots in
//! each allocation mode.

use nmecut::channels::nme_cut;
use nmecut::estimator::{estimate_distribution, exact_recombination, l2_error, AllocationMode};
use nmecut::qmath::{computational_probs, PureState, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nmecut::Result<()> {
    // P(0) = 0.8 with a relative phase, so the compensation terms matter.
    let psi = PureState::normalized(vec![C64::new(0.8f64.sqrt(), 0.0), C64::new(0.0, 0.2f64.sqrt())])?;
    let exact = computational_probs(&psi.density());
    let d = nme_cut(0.3)?;
    println!("exact {:?}, infinite-shot recombination {:?}", exact, exact_recombination(&d, &psi)?);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mode in AllocationMode::ALL {
        for shots in [100, 10_000, 1_000_000] {
            let est = estimate_distribution(&d, &psi, shots, mode, &mut rng)?;
            println!(
                "{mode:<13} {shots:>8} shots  P(0) {:+.5}  l2 {:.5}  per-term {:?}",
                est.probs[0],
                l2_error(&est.probs, &exact)?,
                est.shots_used
            );
        }
    }
    Ok(())
}
