//! Momentum-space integration with the measure `dP = d^3p / ((2 pi)^3 E_p)`.
//!
//! The 3D engine is a tensor product of Gauss-Legendre rules: panels in
//! `|p|` on `[0, p_max]`, and single rules in `cos(theta)` and `phi`.
//! Coordinates are those of the frame in which the state is given. Rows of
//! the grid are evaluated in parallel and reduced sequentially with
//! compensated summation, so results do not depend on the worker count.
//!
//! A separate adaptive Gauss-Kronrod rule on `[0, inf)` integrates isotropic
//! integrands and serves as an independent check of the 3D engine.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statistics::{FluidState, Multipliers};
use crate::tensor::{b_star_from_eb, norm3, FourVector};

const RADIAL_PANEL_ORDER: usize = 16;
const MAX_GRID_NODES: usize = 1 << 25;
/// Components smaller than this fraction of the largest one are judged
/// against the largest one.
const CONVERGENCE_FLOOR: f64 = 1e-6;
/// Direction grid for the asymptotic-ratio test.
const SPHERE_THETA: usize = 32;
const SPHERE_PHI: usize = 64;
/// Large-momentum probe, in units of the mass.
const ASYMPTOTIC_PROBE: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub n_radial: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Cutoff in units of the slowest thermal scale.
    pub p_max_mult: f64,
    pub rel_tol: f64,
    pub max_refinements: usize,
    /// Admissible states satisfy `zeta < 1 - selection_margin`.
    pub selection_margin: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            n_radial: 64,
            n_theta: 24,
            n_phi: 24,
            p_max_mult: 40.0,
            rel_tol: 1e-8,
            max_refinements: 8,
            selection_margin: 0.05,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_radial < 8 {
            return Err(Error::InvalidSpec(format!(
                "n_radial must be >= 8, got {}",
                self.n_radial
            )));
        }
        if self.n_theta < 4 || self.n_phi < 4 {
            return Err(Error::InvalidSpec(format!(
                "n_theta and n_phi must be >= 4, got {} and {}",
                self.n_theta, self.n_phi
            )));
        }
        if !(self.p_max_mult >= 5.0 && self.p_max_mult.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "p_max_mult must be >= 5, got {}",
                self.p_max_mult
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.selection_margin >= 0.0 && self.selection_margin < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "selection_margin must lie in [0, 1), got {}",
                self.selection_margin
            )));
        }
        Ok(())
    }

    pub fn admissibility_limit(&self) -> f64 {
        1.0 - self.selection_margin
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult<const K: usize> {
    pub value: [f64; K],
    /// Per-component error estimate (refinement difference plus tail bound).
    pub errors: [f64; K],
    pub error_estimate: f64,
    pub refinements_used: usize,
    pub converged: bool,
}

/// One quadrature node on the mass shell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumPoint {
    pub p: [f64; 3],
    pub energy: f64,
}

impl MomentumPoint {
    pub fn four_momentum(&self) -> FourVector {
        FourVector::from_parts(self.energy, self.p)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Fixed tensor-product grid in spherical momentum coordinates.
#[derive(Clone, Debug)]
pub struct MomentumGrid {
    mass: f64,
    p_max: f64,
    radial: Vec<(f64, f64)>,
    polar: Vec<(f64, f64, f64)>,
    azimuth: Vec<(f64, f64, f64)>,
}

impl MomentumGrid {
    /// `n_radial` is rounded up to whole panels. A zero mass is accepted.
    pub fn new(mass: f64, p_max: f64, n_radial: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        if !(mass >= 0.0) || !(p_max > 0.0) || !p_max.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "bad grid extent: mass {mass}, p_max {p_max}"
            )));
        }
        if n_radial == 0 || n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidSpec("grid dimensions must be positive".into()));
        }
        let order = RADIAL_PANEL_ORDER.min(n_radial);
        let panels = n_radial.div_ceil(order);
        let (x, w) = gauss_legendre(order);
        let width = p_max / panels as f64;
        let mut radial = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let lo = k as f64 * width;
            for (xi, wi) in x.iter().zip(&w) {
                radial.push((lo + 0.5 * width * (xi + 1.0), 0.5 * width * wi));
            }
        }
        let (ct, wt) = gauss_legendre(n_theta);
        let polar = ct
            .iter()
            .zip(&wt)
            .map(|(&c, &w)| (c, (1.0 - c * c).sqrt(), w))
            .collect();
        let (xp, wp) = gauss_legendre(n_phi);
        let azimuth = xp
            .iter()
            .zip(&wp)
            .map(|(&x, &w)| {
                let phi = PI * (x + 1.0);
                (phi.cos(), phi.sin(), PI * w)
            })
            .collect();
        Ok(MomentumGrid {
            mass,
            p_max,
            radial,
            polar,
            azimuth,
        })
    }

    /// Grid for `m` at refinement `level` (every dimension doubled per level).
    pub fn for_multipliers(m: &Multipliers, q: &QuadratureSpec, level: usize) -> Result<Self> {
        q.validate()?;
        let factor = 1usize << level;
        let p_max = momentum_cutoff(m, q)?;
        MomentumGrid::new(m.mass, p_max, q.n_radial * factor, q.n_theta * factor, q.n_phi * factor)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.polar.len() * self.azimuth.len()
    }

    /// `int dP f(p)`, summed in a fixed order.
    pub fn integrate<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(&MomentumPoint) -> [f64; K] + Sync,
    {
        let norm = 1.0 / (8.0 * PI * PI * PI);
        let rows: Vec<[f64; K]> = self
            .radial
            .par_iter()
            .map(|&(r, wr)| {
                let mut acc = [Compensated::default(); K];
                let energy = (self.mass * self.mass + r * r).sqrt();
                let radial_weight = if energy > 0.0 { wr * r * r / energy * norm } else { 0.0 };
                for &(ct, st, wt) in &self.polar {
                    for &(cp, sp, wp) in &self.azimuth {
                        let point = MomentumPoint {
                            p: [r * st * cp, r * st * sp, r * ct],
                            energy,
                        };
                        let weight = radial_weight * wt * wp;
                        let values = f(&point);
                        for (a, v) in acc.iter_mut().zip(values) {
                            a.add(weight * v);
                        }
                    }
                }
                acc.map(|a| a.value())
            })
            .collect();
        let mut total = [Compensated::default(); K];
        for row in &rows {
            for (t, v) in total.iter_mut().zip(row) {
                t.add(*v);
            }
        }
        let out = total.map(|t| t.value());
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("momentum integral".into()));
        }
        Ok(out)
    }
}

/// `sqrt(-a^2)` at momentum `p`, via the rest-frame magnetic vector.
fn spin_norm_at(e: &[f64; 3], b: &[f64; 3], p: &[f64; 3], mass: f64) -> f64 {
    let energy = (mass * mass + p.iter().map(|x| x * x).sum::<f64>()).sqrt();
    0.5 * norm3(&b_star_from_eb(e, b, p, energy, mass))
}

/// Asymptotic growth `h(n) = lim sqrt(-a^2)/|p|` along each probe direction
/// and the decay coefficient `beta.(1, n)`.
fn asymptotic_rates(m: &Multipliers) -> Vec<(f64, f64)> {
    let eb = m.omega.eb();
    let probe = ASYMPTOTIC_PROBE * m.mass;
    let mut rates = Vec::with_capacity((SPHERE_THETA + 1) * SPHERE_PHI);
    for i in 0..=SPHERE_THETA {
        let theta = PI * i as f64 / SPHERE_THETA as f64;
        let (st, ct) = theta.sin_cos();
        for j in 0..SPHERE_PHI {
            let phi = 2.0 * PI * j as f64 / SPHERE_PHI as f64;
            let n = [st * phi.cos(), st * phi.sin(), ct];
            let near = spin_norm_at(&eb.e, &eb.b, &n.map(|x| x * probe), m.mass);
            let far = spin_norm_at(&eb.e, &eb.b, &n.map(|x| x * 2.0 * probe), m.mass);
            let h = (far - near) / probe;
            let decay = m.beta.0[0] - (m.beta.0[1] * n[0] + m.beta.0[2] * n[1] + m.beta.0[3] * n[2]);
            rates.push((h, decay));
            if i == 0 || i == SPHERE_THETA {
                break;
            }
        }
    }
    rates
}

/// Largest ratio of spin-driven growth to thermal decay over directions.
/// Momentum integrals converge only for `zeta < 1`.
pub fn selection_criterion(s: &FluidState) -> f64 {
    selection_criterion_multipliers(&s.multipliers())
}

pub fn selection_criterion_multipliers(m: &Multipliers) -> f64 {
    let mut zeta = 0.0_f64;
    for (h, decay) in asymptotic_rates(m) {
        if decay <= 0.0 {
            return f64::INFINITY;
        }
        zeta = zeta.max(h / decay);
    }
    zeta
}

/// Slowest exponential decay rate of the integrands, in GeV^-1.
fn decay_rate(m: &Multipliers) -> f64 {
    asymptotic_rates(m)
        .into_iter()
        .map(|(h, decay)| decay - h)
        .fold(f64::INFINITY, f64::min)
}

/// Fails with [`Error::Inadmissible`] unless `zeta < 1 - margin`.
pub fn check_admissible(m: &Multipliers, q: &QuadratureSpec) -> Result<f64> {
    let zeta = selection_criterion_multipliers(m);
    let limit = q.admissibility_limit();
    if !(zeta < limit) {
        return Err(Error::Inadmissible { zeta, limit });
    }
    Ok(zeta)
}

/// Radial cutoff `m + (|xi| + p_max_mult)/kappa`, where `kappa` is the
/// slowest decay rate of the integrands. Beyond it every occupation is
/// below `exp(-p_max_mult)`. For a state at rest without spin this is
/// `m + |mu| + p_max_mult T`.
pub fn momentum_cutoff(m: &Multipliers, q: &QuadratureSpec) -> Result<f64> {
    let kappa = decay_rate(m);
    if !(kappa > 0.0) {
        return Err(Error::Inadmissible {
            zeta: selection_criterion_multipliers(m),
            limit: q.admissibility_limit(),
        });
    }
    Ok(m.mass + (m.xi.abs() + q.p_max_mult) / kappa)
}

/// Bound on the integrand mass beyond `p_max`, relative to the integral.
fn tail_bound(m: &Multipliers, p_max: f64) -> f64 {
    let x = decay_rate(m) * p_max;
    let poly = (x * x * x + 3.0 * x * x + 6.0 * x + 6.0) / 6.0;
    (-(x - m.xi.abs())).exp() * poly
}

/// Adaptive integration of `f` against `dP` for state `s`.
pub fn integrate_dp<const K: usize, F>(f: F, s: &FluidState, q: &QuadratureSpec) -> Result<IntegralResult<K>>
where
    F: Fn(&MomentumPoint) -> [f64; K] + Sync,
{
    integrate_dp_multipliers(f, &s.multipliers(), q)
}

pub fn integrate_dp_multipliers<const K: usize, F>(
    f: F,
    m: &Multipliers,
    q: &QuadratureSpec,
) -> Result<IntegralResult<K>>
where
    F: Fn(&MomentumPoint) -> [f64; K] + Sync,
{
    q.validate()?;
    check_admissible(m, q)?;
    let p_max = momentum_cutoff(m, q)?;
    let tail = tail_bound(m, p_max);
    let mut coarse = MomentumGrid::for_multipliers(m, q, 0)?.integrate(&f)?;
    let mut last_error = f64::INFINITY;
    for level in 1..=q.max_refinements {
        let grid = MomentumGrid::for_multipliers(m, q, level)?;
        if grid.node_count() > MAX_GRID_NODES {
            break;
        }
        let fine = grid.integrate(&f)?;
        let scale = fine.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let floor = CONVERGENCE_FLOOR * scale;
        let diffs: [f64; K] = std::array::from_fn(|k| (fine[k] - coarse[k]).abs());
        let converged = diffs
            .iter()
            .zip(&fine)
            .all(|(d, v)| *d <= q.rel_tol * v.abs().max(floor));
        last_error = diffs
            .iter()
            .zip(&fine)
            .map(|(d, v)| d / v.abs().max(floor).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if converged {
            let errors: [f64; K] = std::array::from_fn(|k| diffs[k] + tail * fine[k].abs().max(floor));
            return Ok(IntegralResult {
                value: fine,
                errors,
                error_estimate: errors.iter().fold(0.0, |a, x| a.max(*x)),
                refinements_used: level,
                converged: true,
            });
        }
        coarse = fine;
    }
    Err(Error::NotConverged {
        refinements: q.max_refinements,
        error: last_error,
        tolerance: q.rel_tol,
    })
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    let mut intervals = vec![(a, b, gk15(&f, a, b))];
    for _ in 0..5000 {
        let (total, error) = intervals
            .iter()
            .fold((0.0, 0.0), |(t, e), (_, _, (v, err))| (t + v, e + err));
        if error <= (rel_tol * f64::abs(total)).max(abs_tol) {
            let mut sum = Compensated::default();
            for (_, _, (v, _)) in &intervals {
                sum.add(*v);
            }
            return Ok(sum.value());
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        intervals.push((lo, mid, gk15(&f, lo, mid)));
        intervals.push((mid, hi, gk15(&f, mid, hi)));
    }
    Err(Error::NotConverged {
        refinements: 5000,
        error: f64::NAN,
        tolerance: rel_tol,
    })
}

/// `(1/2 pi^2) int_0^inf p^2 f(p, E_p) / E_p dp`, i.e. `int dP f` for an
/// isotropic integrand, by adaptive Gauss-Kronrod on a compactified axis.
/// `scale` sets the map `p = scale t/(1-t)`.
pub fn radial_integral<F: Fn(f64, f64) -> f64>(f: F, mass: f64, scale: f64, rel_tol: f64) -> Result<f64> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let p = scale * t / (1.0 - t);
        let jac = scale / ((1.0 - t) * (1.0 - t));
        let e = (mass * mass + p * p).sqrt();
        if e == 0.0 {
            return 0.0;
        }
        let v = p * p * f(p, e) / e * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let v = adaptive_gk(g, 0.0, 1.0, rel_tol, 0.0)?;
    Ok(v / (2.0 * PI * PI))
}

/// Independent 1D oracle for isotropic integrands of a state.
pub fn integrate_dp_radial_oracle<F: Fn(f64, f64) -> f64>(f: F, s: &FluidState, q: &QuadratureSpec) -> Result<f64> {
    let scale = s.temperature().max(s.mu().abs()).max(s.mass());
    radial_integral(f, s.mass(), scale, q.rel_tol * 1e-2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{eb_compose, Antisym2Tensor};
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-14);
            // exact for degree 2n-1
            let deg = 2 * n - 1;
            let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let expected = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((integral - expected).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            n_radial: 4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSpec {
            p_max_mult: 3.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn zeta_examples() {
        let s = FluidState::at_rest(1.0, 1.0, 0.0, Antisym2Tensor::ZERO).unwrap();
        assert_eq!(selection_criterion(&s), 0.0);
        let vortex = FluidState::at_rest(1.0, 1.0, 0.0, eb_compose([0.0; 3], [0.0, 0.0, -0.1])).unwrap();
        let zeta = selection_criterion(&vortex);
        // h = |b| sin(theta) / 2m, decay = 1/T
        assert!((zeta - 0.05).abs() < 1e-6, "zeta = {zeta}");
        let doubled = vortex.with_omega(vortex.omega().scale(2.0)).unwrap();
        assert!((selection_criterion(&doubled) - 2.0 * zeta).abs() < 1e-6);
    }

    #[test]
    fn zero_integrand_is_exactly_zero() {
        let s = FluidState::at_rest(0.5, 0.2, 0.0, Antisym2Tensor::ZERO).unwrap();
        let r = integrate_dp(|_| [0.0], &s, &QuadratureSpec::default()).unwrap();
        assert_eq!(r.value[0], 0.0);
        assert!(r.converged);
        let oracle = integrate_dp_radial_oracle(|_, _| 0.0, &s, &QuadratureSpec::default()).unwrap();
        assert_eq!(oracle, 0.0);
    }

    #[test]
    fn massless_exponential_moment() {
        // int dP E exp(-E/T) = (1/2 pi^2) int p^2 exp(-p/T) dp = T^3/pi^2
        let t = 0.3;
        let grid = MomentumGrid::new(0.0, 40.0 * t, 64, 4, 4).unwrap();
        let v = grid.integrate(|pt| [pt.energy * (-pt.energy / t).exp()]).unwrap()[0];
        assert_relative_eq!(v, t * t * t / (PI * PI), max_relative = 1e-12);
        let oracle = radial_integral(|_, e| e * (-e / t).exp(), 0.0, t, 1e-12).unwrap();
        assert_relative_eq!(oracle, t * t * t / (PI * PI), max_relative = 1e-11);
    }

    #[test]
    fn boltzmann_mode_density_massless() {
        // one mode: int dP E e^{xi} e^{-E/T} = e^xi T^3 / pi^2
        let (t, xi) = (0.2_f64, 0.4_f64);
        let v = radial_integral(|_, e| e * (xi - e / t).exp(), 0.0, t, 1e-12).unwrap();
        assert_relative_eq!(v, xi.exp() * t.powi(3) / (PI * PI), max_relative = 1e-11);
    }

    #[test]
    fn isotropic_integrals_ignore_azimuth_resolution() {
        let grid_a = MomentumGrid::new(0.3, 5.0, 32, 8, 4).unwrap();
        let grid_b = MomentumGrid::new(0.3, 5.0, 32, 8, 13).unwrap();
        let f = |pt: &MomentumPoint| [(-pt.energy).exp()];
        let a = grid_a.integrate(f).unwrap()[0];
        let b = grid_b.integrate(f).unwrap()[0];
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn inadmissible_state_is_rejected_before_integration() {
        let s = FluidState::at_rest(0.2, 0.5, 0.0, eb_compose([0.0; 3], [0.0, 0.0, 2.0])).unwrap();
        assert!(selection_criterion(&s) > 1.0);
        let r = integrate_dp(
            |_| -> [f64; 1] { panic!("integrand evaluated") },
            &s,
            &QuadratureSpec::default(),
        );
        assert!(matches!(r, Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let s = FluidState::from_velocity(
            0.3,
            0.2,
            0.1,
            [0.2, -0.1, 0.3],
            eb_compose([0.1, 0.0, 0.2], [0.0, -0.3, 0.1]),
        )
        .unwrap();
        let f = |pt: &MomentumPoint| [(-pt.energy / 0.2).exp() * pt.p[0], pt.energy.sin()];
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| integrate_dp(f, &s, &QuadratureSpec::default()).unwrap().value)
        };
        let one = run(1);
        let four = run(4);
        assert_eq!(one.map(f64::to_bits), four.map(f64::to_bits));
    }
}
