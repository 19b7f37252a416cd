//! Regenerates `fixtures/skewed.csv`, the deliberately skewed d = 4 test
//! dataset: three tiny rates and one dominant one, the regime where the
//! mix-subspace prior shines.
//!
//! Counts are drawn from Po(r * lambda_i) for the x column and
//! Po(s * lambda_i) for the y column with the crate's own deterministic
//! substream RNG. The seed is fixed so that x = (1, 1, 1, 25) exactly.
//!
//! Run with: cargo run --example generate_fixture [-- <output-path>]

use poshrink::closed_form::sample_poisson;
use poshrink::rng::substream;

const LAMBDA: [f64; 4] = [0.25, 0.25, 0.25, 25.0];
const R: f64 = 2.0;
const S: f64 = 2.0;
// chosen so the x draw below comes out as (1, 1, 1, 25)
const SEED: u64 = 273_573;

fn main() -> std::io::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures/skewed.csv".to_string());
    let mut rng = substream(SEED, 0);
    let x: Vec<u64> = LAMBDA
        .iter()
        .map(|l| sample_poisson(&mut rng, R * l))
        .collect();
    let y: Vec<u64> = LAMBDA
        .iter()
        .map(|l| sample_poisson(&mut rng, S * l))
        .collect();
    assert_eq!(x, [1, 1, 1, 25], "seed no longer reproduces the fixture");

    let mut out = String::from("unit_id,x,y\n");
    for (i, (xi, yi)) in x.iter().zip(&y).enumerate() {
        out.push_str(&format!("u{},{xi},{yi}\n", i + 1));
    }
    if let Some(dir) = std::path::Path::new(&path).parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, &out)?;
    println!("wrote {path}");
    print!("{out}");
    Ok(())
}
