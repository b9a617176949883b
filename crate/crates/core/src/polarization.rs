//! Spin density matrices in closed form, the mean polarization vector and
//! the rigidly rotating vortex.
//!
//! The rest-frame spin vector is `a* = -b*/2`, so every polarization
//! expression is written with `b*` and the occupation splitting ratio
//! `(g+ - g-)/|a*|`, never with the unit vector `a*/|a*|` alone.

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use crate::currents::{CurrentOptions, NodeEvaluator};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_dp_multipliers, MomentumPoint, QuadratureSpec};
use crate::spinor::{pauli, SpinDensity2};
use crate::statistics::{FluidState, Multipliers, Species, Statistics};
use crate::tensor::{b_star_from_eb, eb_compose, norm3, OnShellMomentum};

/// Mean polarization, bounded by 1/2 in magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarizationVector(pub [f64; 3]);

impl PolarizationVector {
    pub fn magnitude(&self) -> f64 {
        norm3(&self.0)
    }
}

/// Global-equilibrium rotation about the z axis with angular velocity
/// `Omega0` at temperature `T0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexParameters {
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "Omega0")]
    pub omega0: f64,
    #[serde(default)]
    pub mu0: f64,
    pub mass: f64,
}

/// Fluid state on the rotation axis: at rest, `e = 0`, `b = -Omega0/T0 z`.
pub fn vortex_state(v: &VortexParameters) -> Result<FluidState> {
    if !(v.t0 > 0.0) {
        return Err(Error::InvalidState(format!("T0 must be positive, got {}", v.t0)));
    }
    if !v.omega0.is_finite() {
        return Err(Error::InvalidState("Omega0 is not finite".into()));
    }
    FluidState::at_rest(v.mass, v.t0, v.mu0, eb_compose([0.0; 3], [0.0, 0.0, -v.omega0 / v.t0]))
}

/// `a*` together with `beta.p` and `sqrt(-a^2)`.
fn rest_frame_spin(s: &FluidState, p: &OnShellMomentum) -> Result<([f64; 3], f64, f64)> {
    if (p.mass() - s.mass()).abs() > 1e-12 * s.mass() {
        return Err(Error::MassMismatch {
            momentum: p.mass(),
            state: s.mass(),
        });
    }
    let eb = s.omega().eb();
    let k = p.three_momentum();
    let a_star = b_star_from_eb(&eb.e, &eb.b, &k, p.energy(), p.mass()).map(|x| -0.5 * x);
    Ok((a_star, s.beta().dot(&p.four_momentum()), norm3(&a_star)))
}

/// `f^+-_rs = (1/2)[(g^{+-+} + g^{+--}) delta_rs + (a*.sigma)_rs (g^{+-+} - g^{+--})/|a*|]`
pub fn spin_density_closed(
    s: &FluidState,
    p: &OnShellMomentum,
    species: Species,
    statistics: Statistics,
) -> Result<SpinDensity2> {
    let (a_star, bp, norm) = rest_frame_spin(s, p)?;
    let w0 = -species.sign() * s.xi() + bp;
    let total = statistics.occupation(w0 - norm) + statistics.occupation(w0 + norm);
    let ratio = statistics.split_ratio(w0, norm);
    let [s1, s2, s3] = pauli();
    let c = |x: f64| Complex::new(x, 0.0);
    let a_sigma = s1 * c(a_star[0]) + s2 * c(a_star[1]) + s3 * c(a_star[2]);
    Ok(SpinDensity2(
        (Matrix2::identity() * c(total) + a_sigma * c(ratio)) * c(0.5),
    ))
}

/// `P = (a*/2|a*|) sum_ij j g_ij / sum_ij g_ij` at one momentum.
pub fn mean_polarization(s: &FluidState, p: &OnShellMomentum, statistics: Statistics) -> Result<PolarizationVector> {
    let (a_star, bp, norm) = rest_frame_spin(s, p)?;
    let mut weighted = 0.0;
    let mut total = 0.0;
    for species in [Species::Particle, Species::Antiparticle] {
        let w0 = -species.sign() * s.xi() + bp;
        weighted += statistics.split_ratio(w0, norm);
        total += statistics.occupation(w0 - norm) + statistics.occupation(w0 + norm);
    }
    if !(total > 0.0) {
        return Ok(PolarizationVector::default());
    }
    Ok(PolarizationVector(a_star.map(|x| 0.5 * x * weighted / total)))
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct AverageOptions {
    pub statistics: Statistics,
    /// Average over particles only instead of particles and antiparticles.
    pub particles_only: bool,
}

/// Momentum average of `P(p)` weighted by the summed occupations,
/// `<P> = sum_ij int dP P g_ij / sum_ij int dP g_ij`.
pub fn averaged_polarization(s: &FluidState, q: &QuadratureSpec) -> Result<PolarizationVector> {
    averaged_polarization_with(s, q, &AverageOptions::default())
}

pub fn averaged_polarization_with(
    s: &FluidState,
    q: &QuadratureSpec,
    options: &AverageOptions,
) -> Result<PolarizationVector> {
    let m = s.multipliers();
    let evaluator = NodeEvaluator::new(
        &m,
        &CurrentOptions {
            statistics: options.statistics,
            fugacity_shift: 0.0,
        },
    );
    let eb = m.omega.eb();
    let species_count = if options.particles_only { 1 } else { 2 };
    let integrand = |p: &MomentumPoint| -> [f64; 4] {
        let ratios = evaluator.split_ratios(p);
        let modes = evaluator.eval_modes(p);
        let weighted: f64 = ratios[..species_count].iter().sum();
        let total: f64 = modes[..2 * species_count].iter().sum();
        let a_star = b_star_from_eb(&eb.e, &eb.b, &p.p, p.energy, m.mass).map(|x| -0.5 * x);
        [
            0.5 * a_star[0] * weighted,
            0.5 * a_star[1] * weighted,
            0.5 * a_star[2] * weighted,
            total,
        ]
    };
    let r = integrate_dp_multipliers(integrand, &m, q)?;
    let [x, y, z, w] = r.value;
    if !(w > 0.0) {
        return Ok(PolarizationVector::default());
    }
    Ok(PolarizationVector([x / w, y / w, z / w]))
}

/// Occupation-weighted moments `(<E_p>, <p_z^2/(E_p + m)>)` for a state.
pub fn energy_moments(s: &FluidState, q: &QuadratureSpec) -> Result<(f64, f64)> {
    let m: Multipliers = s.multipliers();
    let evaluator = NodeEvaluator::new(&m, &CurrentOptions::default());
    let mass = m.mass;
    let r = integrate_dp_multipliers(
        |p: &MomentumPoint| {
            let g: f64 = evaluator.eval_modes(p).iter().sum();
            [g * p.energy, g * p.p[2] * p.p[2] / (p.energy + mass), g]
        },
        &m,
        q,
    )?;
    let [e, pz, w] = r.value;
    Ok((e / w, pz / w))
}

/// `P` of a Boltzmann gas has magnitude `tanh(sqrt(-a^2))/2`.
pub fn boltzmann_polarization_magnitude(spin_norm: f64) -> f64 {
    0.5 * spin_norm.tanh()
}
