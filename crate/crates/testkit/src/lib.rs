//! Reference implementations and random workload generators for tests.
//!
//! Every oracle here is written from the documented semantics, without
//! calling the engine it checks: isomorphism by exhaustive bijection,
//! queries by nested loops over all triples, geo-linking by a quadratic
//! scan with its own distance formula.

pub mod geo;
pub mod graphs;
pub mod ingest;
pub mod iso;
pub mod pipeline;
pub mod sparql;

use rand::rngs::StdRng;
use rand::SeedableRng;

/// Deterministic RNG for a named scenario and case number.
pub fn rng(scenario: &str, case: u64) -> StdRng {
    let seed = scenario.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    });
    StdRng::seed_from_u64(seed ^ case.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}
