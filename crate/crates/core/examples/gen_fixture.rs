//! Writes a synthetic timestamp log with 150 ps Gaussian reception noise on
//! link 1 → 2, the bundled fixture of the CLI tests.
//!
//! cargo run -p dstwr-core --example gen_fixture -- crates/cli/tests/fixtures/synthetic_150ps.csv

use std::fs::File;
use std::io::BufWriter;

use dstwr::noise::synthetic::{generate_log, SyntheticLogConfig};
use dstwr::{LinkNoiseModel, TimeSpan};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).ok_or("usage: gen_fixture <output.csv>")?;
    let cfg = SyntheticLogConfig {
        noise: LinkNoiseModel::gaussian(TimeSpan::from_picos(150.0)),
        tx_drift_ppm: 4.0,
        rx_drift_ppm: -6.0,
        seed: 150,
        ..Default::default()
    };
    let log = generate_log(&cfg)?;
    log.log.write(BufWriter::new(File::create(&path)?))?;
    eprintln!("wrote {} events to {path}", log.log.events.len());
    Ok(())
}
