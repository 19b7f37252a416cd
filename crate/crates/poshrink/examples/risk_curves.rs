//! Risk-reduction curves: sweep the overall rate scale and measure how much
//! K-L risk each shrinkage prior removes from the Jeffreys baseline.
//! Reproduces the first built-in experiment (d = 3, point vs shifted point).
//!
//! Run with: cargo run --release --example risk_curves

use poshrink::experiments::{emit_plot_data, lambda_grid, run_experiment};

fn main() -> poshrink::Result<()> {
    let grid = lambda_grid(0.1, 10.0, 8);
    let table = run_experiment(1, &grid, 100_000, 0)?;

    println!(
        "{:>8}  {:<12} {:>10} {:>8}",
        "Lambda", "prior", "reduction", "se"
    );
    for row in &table.rows {
        println!(
            "{:>8.3}  {:<12} {:>10.5} {:>8.1e}",
            row.lambda_scale, row.prior, row.reduction, row.se
        );
    }

    let out = std::env::temp_dir().join("risk_curves.csv");
    emit_plot_data(&table, &out)?;
    println!("\nplot data written to {}", out.display());
    Ok(())
}
