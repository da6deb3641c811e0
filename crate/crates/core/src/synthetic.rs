//! Seeded random problem instances for testing and benchmarks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{DgUnit, Microgrid, StorageUnit};

/// Random but always-valid microgrid over a `t`-hour horizon.
pub fn random_microgrid(seed: u64, t: usize) -> Microgrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_max = rng.gen_range(0.5..2.0);
    let p_min = rng.gen_range(0.0..0.3) * p_max;
    let p_initial = rng.gen_range(p_min..=p_max);
    let e_max = rng.gen_range(1.0..4.0);
    let e_initial = rng.gen_range(0.0..e_max);
    Microgrid {
        id: 1,
        attached_bus: 1,
        demand_profile: (0..t).map(|_| rng.gen_range(0.5..3.0)).collect(),
        pv_profile: (0..t).map(|_| rng.gen_range(0.0..1.0)).collect(),
        dg: DgUnit {
            name: format!("mgdg_{seed}"),
            p_min,
            p_max,
            ramp_up: rng.gen_range(0.3..1.0) * p_max,
            ramp_down: rng.gen_range(0.3..1.0) * p_max,
            p_initial,
            bid: rng.gen_range(25.0..45.0),
        },
        storage: StorageUnit {
            e_min: 0.0,
            e_max,
            e_initial,
            p_rate_max: rng.gen_range(0.3..1.0),
            eta_ch: rng.gen_range(0.85..1.0),
            eta_dch: rng.gen_range(0.85..1.0),
        },
        il_cap_fraction: rng.gen_range(0.0..0.3),
        il_bid: (0..t).map(|_| rng.gen_range(20.0..50.0)).collect(),
        exchange_max: rng.gen_range(2.0..6.0),
    }
}

/// Random hourly price vector in [lo, hi).
pub fn random_prices(seed: u64, t: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    (0..t).map(|_| rng.gen_range(lo..hi)).collect()
}
