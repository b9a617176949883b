//! Seeded random states and momenta for randomized checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::quadrature::selection_criterion;
use crate::statistics::FluidState;
use crate::tensor::{eb_compose, OnShellMomentum};

/// Ranges for [`random_state`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingRanges {
    pub mass: (f64, f64),
    pub temperature: (f64, f64),
    /// Range of `xi = mu/T`.
    pub xi: (f64, f64),
    pub max_speed: f64,
    /// Bound on each Cartesian component of `e` and `b`.
    pub omega: f64,
    /// Bound on each Cartesian momentum component, in GeV.
    pub momentum: f64,
    /// States must satisfy `zeta < admissible_below`.
    pub admissible_below: f64,
}

impl Default for SamplingRanges {
    fn default() -> Self {
        SamplingRanges {
            mass: (0.1, 1.5),
            temperature: (0.05, 0.5),
            xi: (-2.0, 2.0),
            max_speed: 0.6,
            omega: 0.6,
            momentum: 2.0,
            admissible_below: 0.95,
        }
    }
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn vector<R: Rng>(rng: &mut R, bound: f64) -> [f64; 3] {
    std::array::from_fn(|_| uniform(rng, (-bound, bound)))
}

/// Velocity uniformly distributed in the ball of radius `max_speed`.
fn velocity<R: Rng>(rng: &mut R, max_speed: f64) -> [f64; 3] {
    loop {
        let v = vector(rng, 1.0);
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 <= 1.0 {
            return v.map(|x| x * max_speed);
        }
    }
}

/// A random state passing the selection criterion. Candidates failing it
/// are redrawn with the spin potential halved.
pub fn random_state<R: Rng>(rng: &mut R, ranges: &SamplingRanges) -> Result<FluidState> {
    let mass = uniform(rng, ranges.mass);
    let temperature = uniform(rng, ranges.temperature);
    let xi = uniform(rng, ranges.xi);
    let v = velocity(rng, ranges.max_speed);
    let mut omega = eb_compose(vector(rng, ranges.omega), vector(rng, ranges.omega));
    loop {
        let s = FluidState::from_velocity(mass, temperature, xi * temperature, v, omega)?;
        if selection_criterion(&s) < ranges.admissible_below {
            return Ok(s);
        }
        omega = omega.scale(0.5);
    }
}

pub fn random_momentum<R: Rng>(rng: &mut R, mass: f64, bound: f64) -> Result<OnShellMomentum> {
    OnShellMomentum::new(mass, vector(rng, bound))
}
