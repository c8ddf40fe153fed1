//! Random stream derivation.
//!
//! Every stream is a `ChaCha8Rng` seeded by `splitmix64(fnv1a(key))`, where
//! `key` is the UTF-8 string `"<master>/<part>/<part>/..."`. The environment
//! stream of a replication is keyed by `(master, "env", scenario, rep)` and is
//! shared by every policy, so policies face identical preference draws,
//! covariates and drift. The demand stream is keyed by
//! `(master, "demand", scenario, policy, rep)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(master: u64, parts: &[&str]) -> u64 {
    let mut key = master.to_string();
    for p in parts {
        key.push('/');
        key.push_str(p);
    }
    splitmix64(fnv1a(key.as_bytes()))
}

pub fn stream(master: u64, parts: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, parts))
}

pub fn environment_stream(master: u64, scenario: &str, rep: usize) -> ChaCha8Rng {
    stream(master, &["env", scenario, &rep.to_string()])
}

pub fn demand_stream(master: u64, scenario: &str, policy: &str, rep: usize) -> ChaCha8Rng {
    stream(master, &["demand", scenario, policy, &rep.to_string()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference generator started from state 0.
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(0x9e37_79b9_7f4a_7c15), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a: u64 = environment_stream(7, "s", 0).random();
        let b: u64 = environment_stream(7, "s", 0).random();
        let c: u64 = environment_stream(7, "s", 1).random();
        let d: u64 = demand_stream(7, "s", "psgd", 0).random();
        let e: u64 = demand_stream(7, "s", "oracle", 0).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(d, e);
        assert_ne!(stream_seed(1, &["x"]), stream_seed(2, &["x"]));
    }
}
