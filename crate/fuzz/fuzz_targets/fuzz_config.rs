#![no_main]

use libfuzzer_sys::fuzz_target;
use uwoc::config::{Command, ConfigValues};

const COMMANDS: [Command; 7] = [
    Command::Ber,
    Command::Mc,
    Command::FecLimit,
    Command::OptimizeQ,
    Command::Lmax,
    Command::Sweep,
    Command::Eye,
];

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(values) = ConfigValues::from_toml(text) else {
        return;
    };
    for command in COMMANDS {
        if let Ok(cfg) = values.resolve(command) {
            assert!(cfg.geometry.validate().is_ok());
            assert!(!cfg.q_grid.is_empty() && !cfg.p_grid.is_empty());
        }
    }
});
