//! Bundled 48-segment synthetic census data.
//!
//! `census_features.csv` holds 15 standardizable features per segment, eight
//! demographic (`dem_*`) and seven economic (`econ_*`); `census_leads.csv`
//! holds population and median income, whose product drives arrival weights.
//! Both files are produced by [`generate_census`] with [`CENSUS_SEED`]; run
//! `cargo run -p netpricing-core --example generate_census` to rewrite them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

pub const CENSUS_SEED: u64 = 48;
pub const CENSUS_SEGMENTS: usize = 48;

pub const CENSUS_FEATURES: &str = include_str!("../../data/census_features.csv");
pub const CENSUS_LEADS: &str = include_str!("../../data/census_leads.csv");

/// Prefix that marks a path as one of the bundled files.
pub const BUNDLED_PREFIX: &str = "bundled:";

pub const DEMOGRAPHIC_COLUMNS: [&str; 8] = [
    "dem_median_age",
    "dem_pct_under18",
    "dem_pct_over65",
    "dem_pct_urban",
    "dem_pct_bachelor",
    "dem_household_size",
    "dem_pct_foreign_born",
    "dem_log_density",
];

pub const ECONOMIC_COLUMNS: [&str; 7] = [
    "econ_log_median_income",
    "econ_unemployment",
    "econ_poverty_rate",
    "econ_log_home_value",
    "econ_labor_participation",
    "econ_pct_manufacturing",
    "econ_gini",
];

/// (mean, sd, decimals) used to put latent scores on a readable scale.
const DEMOGRAPHIC_SCALE: [(f64, f64, usize); 8] = [
    (38.5, 2.4, 1),
    (22.8, 1.9, 1),
    (16.4, 2.2, 1),
    (72.0, 13.5, 1),
    (31.0, 5.5, 1),
    (2.55, 0.14, 2),
    (9.5, 5.8, 1),
    (4.3, 1.4, 2),
];

const ECONOMIC_SCALE: [(f64, f64, usize); 7] = [
    (10.95, 0.15, 3),
    (4.6, 1.1, 1),
    (12.8, 2.6, 1),
    (12.3, 0.35, 3),
    (63.0, 3.2, 1),
    (9.8, 3.4, 1),
    (0.465, 0.018, 3),
];

/// Looks up a bundled file by name, with or without the `bundled:` prefix.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.strip_prefix(BUNDLED_PREFIX).unwrap_or(name) {
        "census_features.csv" => Some(CENSUS_FEATURES),
        "census_leads.csv" => Some(CENSUS_LEADS),
        _ => None,
    }
}

pub fn segment_ids() -> Vec<String> {
    (1..=CENSUS_SEGMENTS).map(|i| format!("st{i:02}")).collect()
}

/// Latent regions: a few large blocs and some pairs. Segments left over
/// after these get a region of their own.
const REGION_SIZES: [usize; 8] = [10, 9, 8, 6, 4, 3, 2, 2];
const CENTER_SD: f64 = 1.6;
const WITHIN_SD: f64 = 0.42;
const ECON_SHIFT_SD: f64 = 0.6;

fn write_row(out: &mut String, id: &str, values: &[String]) {
    out.push_str(id);
    for v in values {
        out.push(',');
        out.push_str(v);
    }
    out.push('\n');
}

/// Deterministically generates `(features_csv, leads_csv)`.
pub fn generate_census(seed: u64) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let ids = segment_ids();

    let mut region: Vec<usize> = REGION_SIZES
        .iter()
        .enumerate()
        .flat_map(|(r, &n)| std::iter::repeat_n(r, n))
        .collect();
    region.extend((0..CENSUS_SEGMENTS - region.len()).map(|i| REGION_SIZES.len() + i));
    region.shuffle(&mut rng);
    let regions = region.iter().max().map_or(0, |m| m + 1);

    let dem_dim = DEMOGRAPHIC_COLUMNS.len();
    let econ_dim = ECONOMIC_COLUMNS.len();
    let centers: Vec<Vec<f64>> = (0..regions)
        .map(|_| {
            (0..dem_dim + econ_dim)
                .map(|_| CENTER_SD * normal.sample(&mut rng))
                .collect()
        })
        .collect();
    // Economic profiles split some blocs in two.
    let econ_split: Vec<bool> = (0..regions).map(|_| rng.random_bool(0.4)).collect();
    let econ_shift: Vec<Vec<f64>> = (0..regions)
        .map(|_| (0..econ_dim).map(|_| ECON_SHIFT_SD * normal.sample(&mut rng)).collect())
        .collect();

    let mut features = String::from("id");
    for c in DEMOGRAPHIC_COLUMNS.iter().chain(ECONOMIC_COLUMNS.iter()) {
        features.push(',');
        features.push_str(c);
    }
    features.push('\n');
    let mut latent_income = Vec::with_capacity(CENSUS_SEGMENTS);
    for (i, id) in ids.iter().enumerate() {
        let r = region[i];
        let half = econ_split[r] && rng.random_bool(0.5);
        let mut z: Vec<f64> = centers[r]
            .iter()
            .map(|c| c + WITHIN_SD * normal.sample(&mut rng))
            .collect();
        if half {
            for (k, s) in econ_shift[r].iter().enumerate() {
                z[dem_dim + k] += s;
            }
        }
        latent_income.push(z[dem_dim]);
        let cells: Vec<String> = DEMOGRAPHIC_SCALE
            .iter()
            .chain(ECONOMIC_SCALE.iter())
            .zip(&z)
            .map(|(&(mean, sd, dec), v)| format!("{:.*}", dec, (mean + sd * v).max(0.0)))
            .collect();
        write_row(&mut features, id, &cells);
    }

    let population = LogNormal::<f64>::new(15.0, 0.95).expect("lognormal");
    let mut leads = String::from("id,population,median_income\n");
    for (i, id) in ids.iter().enumerate() {
        let pop = population.sample(&mut rng).round().max(50_000.0);
        let income = (57_000.0 + 7_500.0 * latent_income[i] / CENTER_SD + 2_000.0 * normal.sample(&mut rng))
            .max(30_000.0)
            .round();
        write_row(&mut leads, id, &[format!("{pop}"), format!("{income}")]);
    }
    (features, leads)
}
