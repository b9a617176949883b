//! Fluid state, Lagrange multipliers and the spin-extended mode
//! distributions.
//!
//! Every mode `(i, j)` (species `i = +-1`, spin projection `j = +-1` along the
//! rest-frame spin vector) is governed by one exponent
//!
//! ```text
//! w = -i xi + beta.p - j sqrt(-a^2)
//! ```
//!
//! from which the Fermi-Dirac occupation `1/(e^w + 1)` and the Boltzmann
//! occupation `e^{-w}` both follow. The per-mode currents used by the
//! integrators are written as functions of `w` directly so that no raw
//! exponential of a positive argument is ever formed.

use serde::{Deserialize, Serialize};

use crate::dilog::{li2, neg_li2_neg, PI2_6};
use crate::error::{Error, Result};
use crate::tensor::{a_norm, Antisym2Tensor, FourVector, LorentzTransform, OnShellMomentum};

pub use crate::dilog::dilog;

/// Below this occupation the generating-function integrand is evaluated as
/// `-Li2(-g/(1-g))`; the three-term form cancels for small `g`.
pub const CHI_SERIES_SWITCH: f64 = 0.5;

/// Below this spin norm the ratio `(g+ - g-)/sqrt(-a^2)` is replaced by its limit.
pub const DEGENERATE_SPIN_NORM: f64 = 1e-10;

const EXP_LIMIT: f64 = 700.0;

/// Physical fields at one spacetime point (natural units, GeV).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidState {
    mass: f64,
    temperature: f64,
    mu: f64,
    u: FourVector,
    omega: Antisym2Tensor,
}

impl FluidState {
    pub fn new(mass: f64, temperature: f64, mu: f64, u: FourVector, omega: Antisym2Tensor) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidState(format!("mass must be positive, got {mass}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidState(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidState("chemical potential is not finite".into()));
        }
        let norm = u.dot(&u);
        if (norm - 1.0).abs() > 1e-12 || !(u.time() > 0.0) {
            return Err(Error::InvalidState(format!(
                "four-velocity must satisfy u.u = 1 with u^0 > 0 (u.u = {norm})"
            )));
        }
        if omega.upper_components().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("spin polarization tensor is not finite".into()));
        }
        Ok(FluidState {
            mass,
            temperature,
            mu,
            u,
            omega,
        })
    }

    /// Builds the four-velocity `gamma (1, v)` from a three-velocity.
    pub fn from_velocity(mass: f64, temperature: f64, mu: f64, v: [f64; 3], omega: Antisym2Tensor) -> Result<Self> {
        let v2: f64 = v.iter().map(|x| x * x).sum();
        if !(v2 < 1.0) {
            return Err(Error::InvalidState(format!("|v| must be < 1, got {}", v2.sqrt())));
        }
        let gamma = 1.0 / (1.0 - v2).sqrt();
        let u = FourVector::from_parts(gamma, v.map(|x| gamma * x));
        // renormalize away the last ulp of u.u - 1
        let u = u.scale(1.0 / u.dot(&u).sqrt());
        FluidState::new(mass, temperature, mu, u, omega)
    }

    pub fn at_rest(mass: f64, temperature: f64, mu: f64, omega: Antisym2Tensor) -> Result<Self> {
        FluidState::new(mass, temperature, mu, FourVector::new(1.0, 0.0, 0.0, 0.0), omega)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn velocity(&self) -> FourVector {
        self.u
    }

    pub fn omega(&self) -> Antisym2Tensor {
        self.omega
    }

    /// `xi = mu / T`
    pub fn xi(&self) -> f64 {
        self.mu / self.temperature
    }

    /// `beta^mu = u^mu / T`
    pub fn beta(&self) -> FourVector {
        self.u.scale(1.0 / self.temperature)
    }

    /// `Omega_{mu nu} = T omega_{mu nu}`
    pub fn spin_chemical_potential(&self) -> Antisym2Tensor {
        self.omega.scale(self.temperature)
    }

    pub fn multipliers(&self) -> Multipliers {
        Multipliers {
            mass: self.mass,
            xi: self.xi(),
            beta: self.beta(),
            omega: self.omega,
        }
    }

    pub fn with_omega(&self, omega: Antisym2Tensor) -> Result<Self> {
        FluidState::new(self.mass, self.temperature, self.mu, self.u, omega)
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        FluidState::new(self.mass, temperature, self.mu, self.u, self.omega)
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        FluidState::new(self.mass, self.temperature, mu, self.u, self.omega)
    }

    /// The same physical state seen from a frame related by `lambda`.
    pub fn transformed(&self, lambda: &LorentzTransform) -> Result<Self> {
        let u = lambda.apply(&self.u);
        let u = u.scale(1.0 / u.dot(&u).sqrt());
        FluidState::new(self.mass, self.temperature, self.mu, u, self.omega.transform(lambda))
    }
}

/// Lagrange multipliers `(xi, beta^mu, omega_{mu nu})` with the mass.
///
/// Unlike [`FluidState`] the vector `beta` is not constrained to be
/// proportional to a unit four-velocity, which is what finite-difference
/// checks need.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub mass: f64,
    pub xi: f64,
    pub beta: FourVector,
    pub omega: Antisym2Tensor,
}

impl From<&FluidState> for Multipliers {
    fn from(s: &FluidState) -> Self {
        s.multipliers()
    }
}

impl Multipliers {
    pub fn transformed(&self, lambda: &LorentzTransform) -> Self {
        Multipliers {
            mass: self.mass,
            xi: self.xi,
            beta: lambda.apply(&self.beta),
            omega: self.omega.transform(lambda),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    Particle,
    Antiparticle,
}

impl Species {
    pub fn sign(self) -> f64 {
        match self {
            Species::Particle => 1.0,
            Species::Antiparticle => -1.0,
        }
    }
}

/// Spin projection relative to the rest-frame spin vector `a*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpinProjection {
    Aligned,
    Opposite,
}

impl SpinProjection {
    pub fn sign(self) -> f64 {
        match self {
            SpinProjection::Aligned => 1.0,
            SpinProjection::Opposite => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub species: Species,
    pub spin: SpinProjection,
}

impl ModeLabel {
    pub const ALL: [ModeLabel; 4] = [
        ModeLabel {
            species: Species::Particle,
            spin: SpinProjection::Aligned,
        },
        ModeLabel {
            species: Species::Particle,
            spin: SpinProjection::Opposite,
        },
        ModeLabel {
            species: Species::Antiparticle,
            spin: SpinProjection::Aligned,
        },
        ModeLabel {
            species: Species::Antiparticle,
            spin: SpinProjection::Opposite,
        },
    ];

    pub fn index(self) -> usize {
        match (self.species, self.spin) {
            (Species::Particle, SpinProjection::Aligned) => 0,
            (Species::Particle, SpinProjection::Opposite) => 1,
            (Species::Antiparticle, SpinProjection::Aligned) => 2,
            (Species::Antiparticle, SpinProjection::Opposite) => 3,
        }
    }
}

/// Statistics obeyed by the modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    #[default]
    FermiDirac,
    Boltzmann,
}

impl Statistics {
    /// Occupation `g(w)`.
    #[inline]
    pub fn occupation(self, w: f64) -> f64 {
        match self {
            Statistics::FermiDirac => fd_occupation(w),
            Statistics::Boltzmann => (-w).exp(),
        }
    }

    /// Integrand of the auxiliary current: `-ln(1-g)` for Fermi-Dirac, `g`
    /// for Boltzmann.
    #[inline]
    pub fn aux(self, w: f64) -> f64 {
        match self {
            Statistics::FermiDirac => softplus(-w),
            Statistics::Boltzmann => (-w).exp(),
        }
    }

    /// Entropy integrand, written as `g w + aux(w)`.
    #[inline]
    pub fn entropy(self, w: f64) -> f64 {
        self.occupation(w) * w + self.aux(w)
    }

    /// Generating-function integrand `-Li2(-e^{-w})`.
    #[inline]
    pub fn chi(self, w: f64) -> f64 {
        match self {
            Statistics::FermiDirac => {
                if w >= 0.0 {
                    neg_li2_neg((-w).exp())
                } else {
                    PI2_6 + 0.5 * w * w + li2(-w.exp())
                }
            }
            Statistics::Boltzmann => (-w).exp(),
        }
    }

    /// `(g(w0 - s) - g(w0 + s)) / s`, finite as `s -> 0`.
    #[inline]
    pub fn split_ratio(self, w0: f64, s: f64) -> f64 {
        if s < DEGENERATE_SPIN_NORM {
            match self {
                Statistics::FermiDirac => {
                    let g = fd_occupation(w0);
                    2.0 * g * fd_occupation(-w0)
                }
                Statistics::Boltzmann => 2.0 * (-w0).exp(),
            }
        } else {
            (self.occupation(w0 - s) - self.occupation(w0 + s)) / s
        }
    }
}

/// `1/(e^w + 1)` without overflow.
#[inline]
pub fn fd_occupation(w: f64) -> f64 {
    if w >= 0.0 {
        let e = (-w).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + w.exp())
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x <= 0.0 {
        x.exp().ln_1p()
    } else {
        x + (-x).exp().ln_1p()
    }
}

/// The four occupation numbers at one momentum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeDistribution {
    pub statistics: Statistics,
    values: [f64; 4],
}

impl ModeDistribution {
    pub fn evaluate(s: &FluidState, p: &OnShellMomentum, statistics: Statistics) -> Result<Self> {
        let mut values = [0.0; 4];
        for label in ModeLabel::ALL {
            let w = mode_exponent(s, p, label)?;
            if statistics == Statistics::Boltzmann && -w > EXP_LIMIT {
                return Err(Error::Overflow { exponent: w });
            }
            values[label.index()] = statistics.occupation(w);
        }
        Ok(ModeDistribution { statistics, values })
    }

    pub fn get(&self, label: ModeLabel) -> f64 {
        self.values[label.index()]
    }

    pub fn values(&self) -> [f64; 4] {
        self.values
    }

    /// Sum over spins for one species.
    pub fn species_sum(&self, species: Species) -> f64 {
        ModeLabel::ALL
            .iter()
            .filter(|l| l.species == species)
            .map(|l| self.get(*l))
            .sum()
    }

    /// `g^{i+} - g^{i-}` for one species.
    pub fn species_split(&self, species: Species) -> f64 {
        ModeLabel::ALL
            .iter()
            .filter(|l| l.species == species)
            .map(|l| l.spin.sign() * self.get(*l))
            .sum()
    }
}

fn check_mass(s: &FluidState, p: &OnShellMomentum) -> Result<()> {
    if (p.mass() - s.mass()).abs() > 1e-12 * s.mass() {
        return Err(Error::MassMismatch {
            momentum: p.mass(),
            state: s.mass(),
        });
    }
    Ok(())
}

/// `w = -i xi + beta.p - j sqrt(-a^2)`
pub fn mode_exponent(s: &FluidState, p: &OnShellMomentum, label: ModeLabel) -> Result<f64> {
    check_mass(s, p)?;
    let spin_norm = a_norm(&s.omega(), p)?;
    Ok(-label.species.sign() * s.xi() + s.beta().dot(&p.four_momentum()) - label.spin.sign() * spin_norm)
}

/// `e^{-w}`; errors instead of overflowing.
pub fn g_boltzmann(s: &FluidState, p: &OnShellMomentum, label: ModeLabel) -> Result<f64> {
    let w = mode_exponent(s, p, label)?;
    if -w > EXP_LIMIT {
        return Err(Error::Overflow { exponent: w });
    }
    Ok((-w).exp())
}

/// `1/(e^w + 1)`
pub fn g_fermi_dirac(s: &FluidState, p: &OnShellMomentum, label: ModeLabel) -> Result<f64> {
    Ok(fd_occupation(mode_exponent(s, p, label)?))
}

/// Generating-function integrand for one mode,
/// `1/2 ln^2((1-g)/g) + Li2((g-1)/g) + pi^2/6`.
pub fn chi_mode(g: f64) -> f64 {
    if g < CHI_SERIES_SWITCH {
        neg_li2_neg(g / (1.0 - g))
    } else {
        let l = ((1.0 - g) / g).ln();
        0.5 * l * l + li2((g - 1.0) / g) + PI2_6
    }
}

/// `-[g ln g + (1-g) ln(1-g)]`
pub fn entropy_mode(g: f64) -> f64 {
    let xlogx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    -(xlogx(g) + xlogx(1.0 - g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::eb_compose;
    use approx::assert_abs_diff_eq;

    fn rest_state(xi: f64) -> FluidState {
        FluidState::at_rest(1.0, 1.0, xi, Antisym2Tensor::ZERO).unwrap()
    }

    #[test]
    fn exponent_examples() {
        let p = OnShellMomentum::new(1.0, [0.0; 3]).unwrap();
        for l in ModeLabel::ALL {
            assert_abs_diff_eq!(mode_exponent(&rest_state(0.0), &p, l).unwrap(), 1.0, epsilon = 1e-15);
        }
        let s = rest_state(0.2);
        let w: Vec<f64> = ModeLabel::ALL
            .iter()
            .map(|l| mode_exponent(&s, &p, *l).unwrap())
            .collect();
        assert_abs_diff_eq!(w[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(w[2], 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(w[3], 1.2, epsilon = 1e-15);

        let s = FluidState::at_rest(1.0, 0.5, 0.0, eb_compose([0.0; 3], [0.0, 0.0, 1.0])).unwrap();
        let up = ModeLabel::ALL[0];
        let down = ModeLabel::ALL[1];
        assert_abs_diff_eq!(mode_exponent(&s, &p, up).unwrap(), 2.0 - 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(mode_exponent(&s, &p, down).unwrap(), 2.0 + 0.5, epsilon = 1e-14);
    }

    #[test]
    fn mass_mismatch_is_rejected() {
        let p = OnShellMomentum::new(2.0, [0.0; 3]).unwrap();
        assert!(matches!(
            mode_exponent(&rest_state(0.0), &p, ModeLabel::ALL[0]),
            Err(Error::MassMismatch { .. })
        ));
    }

    #[test]
    fn occupations() {
        assert_eq!(fd_occupation(0.0), 0.5);
        assert_abs_diff_eq!(fd_occupation(1.0), 1.0 / (std::f64::consts::E + 1.0), epsilon = 1e-16);
        assert_abs_diff_eq!(
            Statistics::Boltzmann.occupation(1.0),
            0.36787944117144233,
            epsilon = 1e-16
        );
        let ratio = fd_occupation(20.0) / Statistics::Boltzmann.occupation(20.0);
        assert_abs_diff_eq!(ratio, 1.0 / (1.0 + (-20.0_f64).exp()), epsilon = 1e-15);
        assert!((ratio - 1.0).abs() < 2.1e-9);
        assert!(fd_occupation(-800.0) <= 1.0 && fd_occupation(800.0) >= 0.0);
    }

    #[test]
    fn boltzmann_overflow_guard() {
        let s = rest_state(800.0);
        let p = OnShellMomentum::new(1.0, [0.0; 3]).unwrap();
        assert!(matches!(
            g_boltzmann(&s, &p, ModeLabel::ALL[0]),
            Err(Error::Overflow { .. })
        ));
        assert!(g_fermi_dirac(&s, &p, ModeLabel::ALL[0]).unwrap() <= 1.0);
    }

    #[test]
    fn degenerate_spin_gives_equal_occupations() {
        let s = rest_state(0.3);
        let p = OnShellMomentum::new(1.0, [0.2, 0.1, -0.4]).unwrap();
        let d = ModeDistribution::evaluate(&s, &p, Statistics::Boltzmann).unwrap();
        assert_eq!(d.get(ModeLabel::ALL[0]), d.get(ModeLabel::ALL[1]));
        assert_eq!(d.get(ModeLabel::ALL[2]), d.get(ModeLabel::ALL[3]));
    }

    #[test]
    fn chi_exponent_form_matches_occupation_form() {
        for k in -50..=400 {
            let w = k as f64 * 0.1;
            let by_w = Statistics::FermiDirac.chi(w);
            let by_g = chi_mode(fd_occupation(w));
            assert!(
                (by_w - by_g).abs() <= 1e-12 * by_w.abs().max(1e-300),
                "w = {w}: {by_w} vs {by_g}"
            );
        }
    }

    #[test]
    fn chi_mode_values() {
        assert_abs_diff_eq!(chi_mode(0.5), PI2_6 / 2.0, epsilon = 1e-14);
        assert!(chi_mode(1e-300) >= 0.0 && chi_mode(1e-300) < 1e-299);
        // both branches agree at the switch
        let g = CHI_SERIES_SWITCH;
        let three_term = {
            let l = ((1.0 - g) / g).ln();
            0.5 * l * l + li2((g - 1.0) / g) + PI2_6
        };
        assert!((three_term - neg_li2_neg(g / (1.0 - g))).abs() < 1e-14);
    }

    #[test]
    fn entropy_mode_values() {
        assert_abs_diff_eq!(entropy_mode(0.5), 2.0_f64.ln(), epsilon = 1e-15);
        assert_eq!(entropy_mode(0.0), 0.0);
        assert_eq!(entropy_mode(1.0), 0.0);
        assert!(entropy_mode(1e-12) < 1e-10);
    }

    #[test]
    fn split_ratio_limit() {
        for st in [Statistics::FermiDirac, Statistics::Boltzmann] {
            let exact = st.split_ratio(0.7, 1e-5);
            let limit = st.split_ratio(0.7, 1e-12);
            assert!((exact - limit).abs() < 1e-9 * limit.abs());
        }
    }
}
