//! Deterministic instance generators for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, RawInstance, RawJob, SizeClass};
use crate::numerics::{int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("at least one machine is required")]
    NoMachines,
    #[error("epsilon must lie strictly between 0 and 1")]
    BadEpsilon,
    #[error("the tight family needs at least as many machines as big jobs")]
    TooManyBigJobs,
    #[error("eligibility density must lie in (0, 1]")]
    BadDensity,
}

/// Eligibility structure of a generated family.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Every job eligible on every machine independently with probability
    /// `density` (at least one machine is always granted).
    Uniform { density: f64 },
    /// Machines split into contiguous clusters; jobs live in one cluster
    /// and half of the small jobs bridge into the next cluster, creating
    /// long relocation chains. One cluster degenerates to full density.
    Clustered { clusters: usize },
    /// Big jobs form a near-perfect matching (a cycle of two-machine
    /// eligibility sets) and small jobs overflow onto designated free
    /// machines; while the overflow fits, the optimum is exactly 1.
    Tight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub machines: usize,
    pub big_jobs: usize,
    pub small_jobs: usize,
    pub epsilon: Rational,
    pub family: Family,
    pub seed: u64,
}

/// Generate an instance; identical configs produce identical instances.
pub fn generate(config: &GeneratorConfig) -> Result<Instance, GenError> {
    if config.machines == 0 {
        return Err(GenError::NoMachines);
    }
    if config.epsilon <= int(0) || config.epsilon >= int(1) {
        return Err(GenError::BadEpsilon);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let machines: Vec<String> = (0..config.machines).map(|i| format!("m{i}")).collect();
    let mut jobs = Vec::with_capacity(config.big_jobs + config.small_jobs);

    match &config.family {
        Family::Uniform { density } => {
            if !(*density > 0.0 && *density <= 1.0) {
                return Err(GenError::BadDensity);
            }
            let mut push = |name: String, size: SizeClass, rng: &mut ChaCha8Rng| {
                let mut eligible: Vec<String> = machines
                    .iter()
                    .filter(|_| rng.gen_bool(*density))
                    .cloned()
                    .collect();
                if eligible.is_empty() {
                    eligible.push(machines[rng.gen_range(0..machines.len())].clone());
                }
                jobs.push(RawJob {
                    id: name,
                    size,
                    eligible,
                });
            };
            for i in 0..config.big_jobs {
                push(format!("b{i}"), SizeClass::Big, &mut rng);
            }
            for i in 0..config.small_jobs {
                push(format!("s{i}"), SizeClass::Small, &mut rng);
            }
        }
        Family::Clustered { clusters } => {
            let k = (*clusters).clamp(1, config.machines);
            let cluster_of = |m: usize| m * k / config.machines;
            let members = |c: usize| -> Vec<String> {
                (0..config.machines)
                    .filter(|m| cluster_of(*m) == c)
                    .map(|m| machines[m].clone())
                    .collect()
            };
            for i in 0..config.big_jobs {
                let home = rng.gen_range(0..k);
                jobs.push(RawJob {
                    id: format!("b{i}"),
                    size: SizeClass::Big,
                    eligible: members(home),
                });
            }
            for i in 0..config.small_jobs {
                let home = rng.gen_range(0..k);
                let mut eligible = members(home);
                if k > 1 && rng.gen_bool(0.5) {
                    eligible.extend(members((home + 1) % k));
                }
                jobs.push(RawJob {
                    id: format!("s{i}"),
                    size: SizeClass::Small,
                    eligible,
                });
            }
        }
        Family::Tight => {
            if config.big_jobs > config.machines {
                return Err(GenError::TooManyBigJobs);
            }
            for i in 0..config.big_jobs {
                let mut eligible = vec![machines[i].clone()];
                let next = (i + 1) % config.machines;
                if next != i {
                    eligible.push(machines[next].clone());
                }
                jobs.push(RawJob {
                    id: format!("b{i}"),
                    size: SizeClass::Big,
                    eligible,
                });
            }
            // Free machines host the small jobs round-robin; the designated
            // machine plus a random alternative keeps the search honest.
            let free: Vec<usize> = (config.big_jobs..config.machines).collect();
            for i in 0..config.small_jobs {
                let designated = if free.is_empty() {
                    i % config.machines
                } else {
                    free[i % free.len()]
                };
                let mut eligible = vec![machines[designated].clone()];
                let extra = rng.gen_range(0..config.machines);
                if extra != designated {
                    eligible.push(machines[extra].clone());
                }
                jobs.push(RawJob {
                    id: format!("s{i}"),
                    size: SizeClass::Small,
                    eligible,
                });
            }
        }
    }

    let raw = RawInstance {
        epsilon: config.epsilon.clone(),
        machines,
        jobs,
    };
    Ok(Instance::from_raw(&raw).expect("generated instances are valid by construction"))
}
