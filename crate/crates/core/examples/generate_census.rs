//! Rewrites the bundled synthetic census files under `crates/core/data/`.

use std::path::Path;

use netpricing_core::harness::data::{generate_census, CENSUS_SEED};

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (features, leads) = generate_census(CENSUS_SEED);
    std::fs::write(dir.join("census_features.csv"), features)?;
    std::fs::write(dir.join("census_leads.csv"), leads)?;
    println!("wrote {}", dir.display());
    Ok(())
}
