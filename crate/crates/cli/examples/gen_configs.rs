//! Regenerates the bundled experiment configs under `crates/cli/configs/`.
//!
//! Run from the workspace root:
//!
//! ```text
//! cargo run -p nelab-cli --example gen_configs
//! ```

use std::fs;
use std::path::Path;

use nelab_core::ensembles::EnsembleSpec;
use nelab_core::harness::ExperimentConfig;
use nelab_core::symmetry::{level_charge, level_charge_shifted, sigma_z_total, ChargeFamily};

fn write(dir: &Path, name: &str, cfg: &ExperimentConfig) {
    let path = dir.join(name);
    let json = serde_json::to_string_pretty(cfg).expect("serialize config");
    fs::write(&path, json).expect("write config");
    println!("wrote {}", path.display());
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    fs::create_dir_all(&dir).expect("create configs dir");

    // Two-qudit states under the product charge N_A ⊗ N_B with levels
    // {0..d-1}: the concentration-versus-dimension setting. Sample counts
    // shrink with dimension to keep each bundled run around a minute.
    for d in 3..=8usize {
        let family = ChargeFamily::product(level_charge(d), level_charge(d), (d, d))
            .expect("product family");
        let spec = EnsembleSpec::new("sep_sym_measured", (d, d)).with_charge(family);
        let samples = match d {
            3 | 4 => 2000,
            5 => 1000,
            6 => 600,
            7 => 300,
            _ => 150,
        };
        let mut cfg = ExperimentConfig::new(spec, samples, 42);
        cfg.workers = 4;
        write(&dir, &format!("qudit_product_d{d}.json"), &cfg);
    }

    // Two-qudit states under the sum charge with levels {1..d}.
    for d in 2..=4usize {
        let family = ChargeFamily::sum(
            level_charge_shifted(d, 1),
            level_charge_shifted(d, 1),
            (d, d),
        )
        .expect("sum family");
        let spec = EnsembleSpec::new("sep_sym_measured", (d, d)).with_charge(family);
        let mut cfg = ExperimentConfig::new(spec, 2000, 42);
        cfg.workers = 4;
        write(&dir, &format!("qudit_sum_d{d}.json"), &cfg);
    }

    // Multi-qubit states, q qubits per side, total sigma-z local charges,
    // both combination kinds.
    for q in 1..=3usize {
        let dim = 1usize << q;
        for kind in ["product", "sum"] {
            let family = match kind {
                "product" => ChargeFamily::product(sigma_z_total(q), sigma_z_total(q), (dim, dim)),
                _ => ChargeFamily::sum(sigma_z_total(q), sigma_z_total(q), (dim, dim)),
            }
            .expect("qubit family");
            let spec = EnsembleSpec::new("sep_sym_measured", (dim, dim)).with_charge(family);
            let samples = match q {
                1 => 2000,
                2 => 800,
                _ => 200,
            };
            let mut cfg = ExperimentConfig::new(spec, samples, 42);
            cfg.workers = 4;
            write(&dir, &format!("qubits_{kind}_q{q}.json"), &cfg);
        }
    }

    // Small spec files for the gen/ne/decide pipeline walkthrough.
    let family = ChargeFamily::sum(level_charge(2), level_charge(2), (2, 2)).expect("sum family");
    let symsep_spec = EnsembleSpec::new("symsep", (2, 2)).with_charge(family.clone());
    fs::write(
        dir.join("ensemble_symsep_2x2.json"),
        serde_json::to_string_pretty(&symsep_spec).unwrap(),
    )
    .expect("write ensemble spec");
    fs::write(
        dir.join("family_sum_2x2.json"),
        serde_json::to_string_pretty(&family).unwrap(),
    )
    .expect("write family");
    fs::write(
        dir.join("charge_n2.json"),
        serde_json::to_string_pretty(&level_charge(2)).unwrap(),
    )
    .expect("write charge");
    println!("wrote {}", dir.join("ensemble_symsep_2x2.json").display());
    println!("wrote {}", dir.join("family_sum_2x2.json").display());
    println!("wrote {}", dir.join("charge_n2.json").display());
}
