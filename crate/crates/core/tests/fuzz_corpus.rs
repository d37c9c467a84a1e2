//! Replays the checked-in fuzz seeds through the same checks the fuzz targets
//! make, so the corpus runs on stable with every `cargo test`.

use std::fs;
use std::path::PathBuf;

use uwoc::config::{Command, ConfigValues};
use uwoc::grid::parse_grid;
use uwoc::sweep::SweepRecord;
use uwoc::BerEstimate;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            let text = fs::read_to_string(&path).unwrap();
            (path, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn config_seeds() {
    let commands = [
        Command::Ber,
        Command::Mc,
        Command::FecLimit,
        Command::OptimizeQ,
        Command::Lmax,
        Command::Sweep,
        Command::Eye,
    ];
    let mut resolved = 0;
    for (path, text) in seeds("fuzz_config") {
        let Ok(values) = ConfigValues::from_toml(&text) else {
            continue;
        };
        for command in commands {
            if let Ok(cfg) = values.resolve(command) {
                assert!(cfg.geometry.validate().is_ok(), "{}", path.display());
                resolved += 1;
            }
        }
    }
    assert!(resolved > 0, "no config seed resolved");
}

#[test]
fn grid_seeds() {
    let mut parsed = 0;
    for (path, text) in seeds("fuzz_grid") {
        if let Ok(grid) = parse_grid(&text) {
            assert!(grid.windows(2).all(|w| w[0] < w[1]), "{}", path.display());
            assert!(grid.iter().all(|v| v.is_finite()), "{}", path.display());
            parsed += 1;
        }
    }
    assert!(parsed >= 2);
}

#[test]
fn sweep_row_seeds() {
    let mut parsed = 0;
    for (path, text) in seeds("fuzz_sweep_row") {
        if let Ok(record) = SweepRecord::parse_csv_row(&text) {
            let row = record.csv_row();
            let again = SweepRecord::parse_csv_row(&row).unwrap();
            assert_eq!(again.csv_row(), row, "{}", path.display());
            parsed += 1;
        }
    }
    assert!(parsed >= 2);
}

#[test]
fn ber_record_seeds() {
    let mut parsed = 0;
    for (path, text) in seeds("fuzz_ber_record") {
        if let Ok(est) = BerEstimate::from_json(&text) {
            let back = BerEstimate::from_json(&est.to_json()).unwrap();
            assert_eq!(back.to_json(), est.to_json(), "{}", path.display());
            parsed += 1;
        }
    }
    assert!(parsed >= 2);
}
