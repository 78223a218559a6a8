//! Writes the experiment config shown in the README. Run with an optional
//! output path (default `mvdr.json`), then feed it to `snrloss experiment`.

use snrloss::mc::{ExperimentConfig, FilterSpec};
use snrloss_core::law::LossLaw;
use snrloss_core::scenario::{build_sigma, make_mvdr, ula_steering, Interferer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "mvdr.json".into());
    let jammer = Interferer {
        angle_deg: -15.0,
        power_db: 20.0,
    };
    let (sigma, _) = build_sigma(8, &[jammer], 1.0)?;
    let v = ula_steering(8, 0.0)?;
    let config = ExperimentConfig {
        scenario: make_mvdr(sigma, v)?,
        filter: FilterSpec::Smi,
        trials: 20_000,
        k: 16,
        seed: 7,
        bins: 100,
        moments: true,
        ks_targets: vec![LossLaw::mvdr(8, 16)?],
    };
    std::fs::write(&path, serde_json::to_string_pretty(&config)?)?;
    println!("wrote {path}");
    Ok(())
}
