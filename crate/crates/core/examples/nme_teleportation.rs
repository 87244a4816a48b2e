//! Teleports |+⟩ through pairs of decreasing entanglement. The diagonal
//! survives; the coherence shrinks by 2k/(1+k²).

use nmecut::channels::{apply_term_exact, CutTerm};
use nmecut::qmath::PureState;

fn main() -> nmecut::Result<()> {
    let rho = PureState::plus().density();
    println!("{:>5} {:>10} {:>10} {:>10}", "k", "rho_00", "|rho_01|", "expected");
    for k in [1.0, 0.75, 0.5, 0.25, 0.0] {
        let out = apply_term_exact(&CutTerm::teleport(k)?, &rho)?;
        let m = out.matrix();
        println!("{k:>5} {:>10.6} {:>10.6} {:>10.6}", m[(0, 0)].re, m[(0, 1)].norm(), k / (1.0 + k * k));
    }

    // Kraus operators recovered from the circuit.
    let tele = CutTerm::teleport(0.5)?;
    for (i, op) in tele.channel().operators().iter().enumerate() {
        println!("K{i} = {op:?}");
    }
    Ok(())
}
