//! Builds every wire cut and checks that it reproduces the identity channel.

use nmecut::channels::{harada_cut, nme_cut, WireCutDecomposition};

fn show(name: &str, d: &WireCutDecomposition) {
    let coeffs: Vec<String> = d
        .terms()
        .iter()
        .map(|t| format!("{:+.4}*{}", t.coefficient, t.term.label()))
        .collect();
    println!("{name:<12} kappa {:.4}  deviation {:.1e}  {}", d.kappa(), d.identity_deviation(), coeffs.join(" "));
}

fn main() -> nmecut::Result<()> {
    show("harada", &harada_cut()?);
    for k in [0.0, 0.25, 0.5, 1.0, 4.0] {
        show(&format!("nme k={k}"), &nme_cut(k)?);
    }
    Ok(())
}
