//! Schmidt-decomposes random two-qubit states and maps each onto the NME
//! pair with the same robustness.

use nmecut::entangle::{haar_random_state, schmidt_decompose};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nmecut::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    println!("{:>8} {:>8} {:>10} {:>8} {:>8}", "p0", "p1", "robustness", "k", "kappa");
    for _ in 0..8 {
        let psi = haar_random_state(4, &mut rng)?;
        let s = schmidt_decompose(&psi)?;
        let pair = s.nme_equivalent();
        println!(
            "{:>8.4} {:>8.4} {:>10.4} {:>8.4} {:>8.4}",
            s.p0,
            s.p1,
            s.robustness()?,
            pair.k(),
            nmecut::channels::kappa_nme(pair.k())
        );
    }
    Ok(())
}
