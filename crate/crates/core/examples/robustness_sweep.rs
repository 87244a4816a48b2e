//! A small robustness-by-shots sweep written as CSV to stdout.

use nmecut::experiment::{monotonicity_violations, run_sweep, write_records, ExperimentConfig, OutputFormat};

fn main() -> nmecut::Result<()> {
    let config = ExperimentConfig {
        shot_budgets: vec![256, 1024, 4096],
        n_states: 100,
        master_seed: 1,
        ..ExperimentConfig::default()
    };
    let records = run_sweep(&config)?;
    write_records(&records, OutputFormat::Csv, std::io::stdout().lock())?;
    let violations = monotonicity_violations(&records, 2.0);
    eprintln!("{} trend violations beyond 2 standard errors", violations.len());
    Ok(())
}
