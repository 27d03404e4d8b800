//! Experiment runners. Each takes its parameters and a worker pool and
//! returns a [`Report`]; nothing here touches the filesystem.

use fpna_core::datagen::{generate, WordRng};
use fpna_core::exec::map_indexed;
use fpna_core::reduction::{error_bound, replay_sum};
use fpna_core::{Distribution, Engine, Executor, FpArray, KernelGeometry, ReductionPlan, RngAlgorithm, RngSpec, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub mod bench;
pub mod determinism;
pub mod gnn;
pub mod maxvs;
pub mod ops;
pub mod pdf;
pub mod permute;

pub const STREAM_DATA: u64 = 1;
pub const STREAM_SCHEDULE: u64 = 2;
pub const STREAM_PERMUTE: u64 = 3;
pub const STREAM_WEIGHTS: u64 = 4;
pub const STREAM_GRAPH: u64 = 5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of `stream` under the experiment seed `base`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ stream.rotate_left(32)).wrapping_add(index))
}

/// Input data distribution of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Uniform { lo: f64, hi: f64 },
    Normal { mu: f64, sigma: f64 },
    /// Integers uniform in `[lo, hi)`, stored as binary64; sums are exact.
    Integers { lo: i64, hi: i64 },
}

impl DataSpec {
    pub const UNIFORM_1_10: DataSpec = DataSpec::Uniform { lo: 1.0, hi: 10.0 };
    pub const STANDARD_NORMAL: DataSpec = DataSpec::Normal { mu: 0.0, sigma: 1.0 };

    pub fn generate(&self, algorithm: RngAlgorithm, n: usize, seed: u64) -> Result<FpArray> {
        let rng = RngSpec { algorithm, seed };
        match *self {
            DataSpec::Uniform { lo, hi } => Ok(generate(rng, n, Distribution::Uniform { lo, hi })?),
            DataSpec::Normal { mu, sigma } => Ok(generate(rng, n, Distribution::Normal { mu, sigma })?),
            DataSpec::Integers { lo, hi } => {
                if lo >= hi {
                    return Err(HarnessError::usage(format!("empty integer range [{lo}, {hi})")));
                }
                let span = hi.abs_diff(lo);
                let mut g = rng.build();
                let values = (0..n)
                    .map(|_| (lo as i128 + g.next_below(span) as i128) as f64)
                    .collect();
                Ok(FpArray::with_provenance(values, Distribution::Explicit, seed)?)
            }
        }
    }
}

/// `n_t` threads per block; `blocks` defaults to just enough to cover `n`.
pub fn geometry(threads_per_block: usize, blocks: Option<usize>, n: usize) -> Result<KernelGeometry> {
    Ok(match blocks {
        Some(b) => KernelGeometry::new(threads_per_block, b)?,
        None => KernelGeometry::covering(threads_per_block, n)?,
    })
}

/// Replayed nondeterministic sums of one array against its SPS reference.
#[derive(Debug, Clone)]
pub struct ReplaySamples {
    pub s_d: f64,
    pub s_nd: Vec<f64>,
    pub bound: f64,
}

impl ReplaySamples {
    pub fn violations(&self) -> usize {
        self.s_nd
            .iter()
            .filter(|&&s| (self.s_d - s).abs() > self.bound)
            .count()
    }
}

/// One replayed sum of `x` under `variant` per schedule seed. Samples are
/// spread over the engine's workers; results do not depend on the schedule.
pub fn replay_samples<E: Executor>(
    engine: &Engine<E>,
    x: &[f64],
    variant: Variant,
    g: KernelGeometry,
    schedule_seeds: &[u64],
) -> Result<ReplaySamples> {
    if variant.is_deterministic() {
        return Err(HarnessError::usage(format!(
            "{variant} is deterministic; sampling requires spsa or ao"
        )));
    }
    let reference = engine.reduce(x, &ReductionPlan::new(Variant::Sps, g))?;
    let partials = reference.block_partials.unwrap_or_default();
    let units: &[f64] = if variant == Variant::Spsa { &partials } else { x };
    let s_nd = map_indexed(engine.executor(), schedule_seeds.len(), |i| {
        replay_sum(units, schedule_seeds[i]).0
    });
    Ok(ReplaySamples {
        s_d: reference.value,
        s_nd,
        bound: error_bound(x),
    })
}

/// Parses a parameter object, treating `null` as all defaults.
pub fn parse_params<P: serde::de::DeserializeOwned + Default>(v: serde_json::Value) -> Result<P> {
    if v.is_null() {
        return Ok(P::default());
    }
    serde_json::from_value(v).map_err(HarnessError::Spec)
}

pub fn echo<P: Serialize>(p: &P) -> serde_json::Value {
    serde_json::to_value(p).expect("parameters serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpna_core::Serial;

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen = std::collections::BTreeSet::new();
        for stream in 1..4 {
            for i in 0..1000 {
                assert!(seen.insert(derive_seed(42, stream, i)));
            }
        }
        assert_ne!(derive_seed(1, 1, 0), derive_seed(2, 1, 0));
    }

    #[test]
    fn integer_data_is_exact() {
        let a = DataSpec::Integers { lo: -5, hi: 5 }.generate(RngAlgorithm::Mt19937_64, 1000, 3).unwrap();
        assert!(a.iter().all(|v| v.fract() == 0.0 && (-5.0..5.0).contains(v)));
        assert!(DataSpec::Integers { lo: 2, hi: 2 }.generate(RngAlgorithm::Xorwow, 1, 0).is_err());
    }

    #[test]
    fn sampling_rejects_deterministic_variants() {
        let e = Engine::new(Serial);
        let g = KernelGeometry::new(4, 1).unwrap();
        assert!(matches!(
            replay_samples(&e, &[1.0, 2.0], Variant::Tprc, g, &[1]),
            Err(HarnessError::Usage(_))
        ));
    }

    #[test]
    fn replay_samples_agree_with_engine() {
        let x = DataSpec::UNIFORM_1_10.generate(RngAlgorithm::Mt19937_64, 5000, 9).unwrap();
        let g = KernelGeometry::covering(64, x.n()).unwrap();
        let e = Engine::new(Serial);
        let seeds = [3, 4, 5];
        for v in [Variant::Spsa, Variant::Ao] {
            let s = replay_samples(&e, &x, v, g, &seeds).unwrap();
            for (i, &seed) in seeds.iter().enumerate() {
                let direct = e.reduce(&x, &ReductionPlan::replay(v, g, seed)).unwrap().value;
                assert_eq!(s.s_nd[i].to_bits(), direct.to_bits());
            }
            assert_eq!(s.violations(), 0);
        }
    }
}
