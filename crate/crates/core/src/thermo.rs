//! Finite-difference checks of the thermodynamic relations between the
//! currents.
//!
//! Multipliers are varied one independent component at a time: `xi`, the
//! covariant `beta_l` (with `u.u = 1` released) and the six `omega_{ab}`
//! with `a < b`. Every perturbed state is integrated on the grid of the
//! unperturbed one, so differences carry no quadrature noise. Because the
//! relations hold node by node, the residuals measure only the truncation
//! error of the difference formula.

use serde::{Deserialize, Serialize};

use crate::currents::{
    chi_on_grid, currents_on_grid, evaluate_currents_with, CurrentOptions, CurrentsBundle, BUNDLE_LEN,
};
use crate::error::{Error, Result};
use crate::quadrature::{selection_criterion_multipliers, MomentumGrid, QuadratureSpec};
use crate::statistics::{FluidState, Multipliers, Statistics};
use crate::tensor::{INDEX_PAIRS, METRIC};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceScheme {
    #[default]
    Central,
    Richardson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    pub h_xi: f64,
    /// Step in `beta_l` (GeV^-1). When absent the step is
    /// `h_beta_relative * sqrt(beta.beta)`.
    pub h_beta: Option<f64>,
    pub h_beta_relative: f64,
    pub h_omega: f64,
    pub scheme: DifferenceScheme,
    /// Refinement level of the fixed grid shared by all perturbed states.
    pub grid_level: usize,
    /// Relative step for first derivatives of the generating function.
    pub gf_first_step: f64,
    /// Relative step for second derivatives of the generating function.
    pub gf_second_step: f64,
    pub tolerance: f64,
    pub gf_first_tolerance: f64,
    pub gf_second_tolerance: f64,
    /// Multiple of the quadrature tolerance allowed for the Euler relation.
    pub euler_factor: f64,
    pub boltzmann_rate_tolerance: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            h_xi: 1e-4,
            h_beta: None,
            h_beta_relative: 1e-4,
            h_omega: 1e-4,
            scheme: DifferenceScheme::Central,
            grid_level: 0,
            gf_first_step: 1e-4,
            gf_second_step: 1e-3,
            tolerance: 1e-6,
            gf_first_tolerance: 1e-5,
            gf_second_tolerance: 1e-4,
            euler_factor: 3.0,
            boltzmann_rate_tolerance: 0.2,
        }
    }
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        let steps = [
            self.h_xi,
            self.h_omega,
            self.h_beta.unwrap_or(1.0),
            self.h_beta_relative,
            self.gf_first_step,
            self.gf_second_step,
        ];
        if steps.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidSpec(
                "perturbation steps must be positive and finite".into(),
            ));
        }
        let tols = [
            self.tolerance,
            self.gf_first_tolerance,
            self.gf_second_tolerance,
            self.euler_factor,
            self.boltzmann_rate_tolerance,
        ];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidSpec("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Same spec with every finite-difference step multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        PerturbationSpec {
            h_xi: self.h_xi * factor,
            h_beta: self.h_beta.map(|h| h * factor),
            h_beta_relative: self.h_beta_relative * factor,
            h_omega: self.h_omega * factor,
            gf_first_step: self.gf_first_step * factor,
            gf_second_step: self.gf_second_step * factor,
            ..*self
        }
    }
}

fn beta_scale(m: &Multipliers) -> f64 {
    let b2 = m.beta.dot(&m.beta);
    if b2 > 0.0 {
        b2.sqrt()
    } else {
        m.beta.max_abs()
    }
}

/// One independent multiplier component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Xi,
    /// Covariant component `beta_l`.
    Beta(usize),
    /// Covariant component `omega_{ab}` with `(a, b) = INDEX_PAIRS[k]`.
    Omega(usize),
}

impl Direction {
    pub const ALL: [Direction; 11] = [
        Direction::Xi,
        Direction::Beta(0),
        Direction::Beta(1),
        Direction::Beta(2),
        Direction::Beta(3),
        Direction::Omega(0),
        Direction::Omega(1),
        Direction::Omega(2),
        Direction::Omega(3),
        Direction::Omega(4),
        Direction::Omega(5),
    ];

    pub fn label(&self) -> String {
        match self {
            Direction::Xi => "xi".into(),
            Direction::Beta(l) => format!("beta_{l}"),
            Direction::Omega(k) => {
                let (a, b) = INDEX_PAIRS[*k];
                format!("omega_{a}{b}")
            }
        }
    }

    /// `m` displaced by `h` along this covariant component.
    pub fn apply(&self, m: &Multipliers, h: f64) -> Multipliers {
        let mut out = *m;
        match *self {
            Direction::Xi => out.xi += h,
            Direction::Beta(l) => out.beta.0[l] += METRIC[l] * h,
            Direction::Omega(k) => {
                let (a, b) = INDEX_PAIRS[k];
                let mut upper = out.omega.upper_components();
                upper[k] += METRIC[a] * METRIC[b] * h;
                out.omega = crate::tensor::Antisym2Tensor::from_upper(upper);
            }
        }
        out
    }

    /// First-derivative step from a spec.
    fn step(&self, m: &Multipliers, pert: &PerturbationSpec) -> f64 {
        match self {
            Direction::Xi => pert.h_xi,
            Direction::Beta(_) => pert.h_beta.unwrap_or(pert.h_beta_relative * beta_scale(m)),
            Direction::Omega(_) => pert.h_omega,
        }
    }

    /// Step for the generating-function checks, relative to the size of
    /// the multiplier family.
    fn gf_step(&self, m: &Multipliers, relative: f64) -> f64 {
        match self {
            Direction::Beta(_) => relative * beta_scale(m),
            _ => relative,
        }
    }
}

/// Per-component outcome of an identity check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentResidual {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub residuals: Vec<ComponentResidual>,
    pub max_relative_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Measured order of the difference formula, when it was measured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_order: Option<f64>,
}

impl IdentityReport {
    fn new(name: &str, residuals: Vec<ComponentResidual>, max_relative_residual: f64, tolerance: f64) -> Self {
        IdentityReport {
            name: name.into(),
            passed: max_relative_residual <= tolerance,
            residuals,
            max_relative_residual,
            tolerance,
            convergence_order: None,
        }
    }

    /// Largest `|lhs - rhs|` among the components.
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }
}

fn check_perturbation(m: &Multipliers, q: &QuadratureSpec, direction: &str) -> Result<()> {
    let zeta = selection_criterion_multipliers(m);
    if !(zeta < q.admissibility_limit()) {
        return Err(Error::InadmissiblePerturbation {
            direction: direction.into(),
            zeta,
        });
    }
    Ok(())
}

fn flat_derivative(
    m: &Multipliers,
    grid: &MomentumGrid,
    q: &QuadratureSpec,
    direction: Direction,
    h: f64,
    scheme: DifferenceScheme,
    options: &CurrentOptions,
) -> Result<[f64; BUNDLE_LEN]> {
    let eval = |k: f64| -> Result<[f64; BUNDLE_LEN]> {
        let shifted = direction.apply(m, k * h);
        check_perturbation(&shifted, q, &direction.label())?;
        Ok(currents_on_grid(&shifted, grid, options)?.flatten())
    };
    let (p1, m1) = (eval(1.0)?, eval(-1.0)?);
    match scheme {
        DifferenceScheme::Central => Ok(std::array::from_fn(|i| (p1[i] - m1[i]) / (2.0 * h))),
        DifferenceScheme::Richardson => {
            let (p2, m2) = (eval(2.0)?, eval(-2.0)?);
            Ok(std::array::from_fn(|i| {
                (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h)
            }))
        }
    }
}

/// Derivatives of every current along all eleven directions.
#[derive(Clone, Debug)]
pub struct CurrentDerivatives {
    pub multipliers: Multipliers,
    pub base: CurrentsBundle,
    pub steps: [f64; 11],
    pub derivatives: Vec<CurrentsBundle>,
}

pub fn current_derivatives(s: &FluidState, q: &QuadratureSpec, pert: &PerturbationSpec) -> Result<CurrentDerivatives> {
    derivatives_for(&s.multipliers(), q, pert)
}

fn derivatives_for(m: &Multipliers, q: &QuadratureSpec, pert: &PerturbationSpec) -> Result<CurrentDerivatives> {
    q.validate()?;
    pert.validate()?;
    crate::quadrature::check_admissible(m, q)?;
    let grid = MomentumGrid::for_multipliers(m, q, pert.grid_level)?;
    let options = CurrentOptions::default();
    let base = currents_on_grid(m, &grid, &options)?;
    let steps = Direction::ALL.map(|d| d.step(m, pert));
    let derivatives = Direction::ALL
        .iter()
        .zip(&steps)
        .map(|(d, h)| {
            flat_derivative(m, &grid, q, *d, *h, pert.scheme, &options).map(|f| CurrentsBundle::from_flat(&f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurrentDerivatives {
        multipliers: *m,
        base,
        steps,
        derivatives,
    })
}

/// Weighted residual table: entry `(d, mu)` is `h_d (lhs - rhs)`.
struct Table {
    entries: Vec<ComponentResidual>,
    weights: Vec<f64>,
}

impl Table {
    fn relative(&self) -> f64 {
        let num = self
            .entries
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| (w * e.residual).abs())
            .fold(0.0, f64::max);
        let den = self
            .entries
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| (w * e.rhs).abs().max((w * e.lhs).abs()))
            .fold(0.0, f64::max);
        if num == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    fn weighted_max(&self) -> f64 {
        self.entries
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| (w * e.residual).abs())
            .fold(0.0, f64::max)
    }
}

fn gibbs_duhem_table(d: &CurrentDerivatives) -> Table {
    let base = &d.base;
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    for (k, dir) in Direction::ALL.iter().enumerate() {
        for mu in 0..4 {
            let lhs = d.derivatives[k].ncal.0[mu];
            let rhs = match *dir {
                Direction::Xi => base.n.0[mu],
                Direction::Beta(l) => -base.t[mu][l],
                Direction::Omega(p) => base.s[mu][p],
            };
            entries.push(ComponentResidual {
                label: format!("d{}/Ncal^{mu}", dir.label()),
                lhs,
                rhs,
                residual: lhs - rhs,
            });
            weights.push(d.steps[k]);
        }
    }
    Table { entries, weights }
}

fn first_law_table(d: &CurrentDerivatives) -> Table {
    let m = &d.multipliers;
    let beta = m.beta.lower();
    let omega = m.omega.lower_components();
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    for (k, dir) in Direction::ALL.iter().enumerate() {
        let db = &d.derivatives[k];
        for mu in 0..4 {
            let lhs = db.s_entropy.0[mu];
            let bt: f64 = (0..4).map(|l| beta[l] * db.t[l][mu]).sum();
            let ws: f64 = (0..6).map(|p| omega[p] * db.s[mu][p]).sum();
            let rhs = -m.xi * db.n.0[mu] + bt - ws;
            entries.push(ComponentResidual {
                label: format!("d{}/S_entropy^{mu}", dir.label()),
                lhs,
                rhs,
                residual: lhs - rhs,
            });
            weights.push(d.steps[k]);
        }
    }
    Table { entries, weights }
}

fn measured_order(coarse: f64, fine: f64) -> Option<f64> {
    if coarse > 0.0 && fine > 0.0 {
        Some((coarse / fine).log2())
    } else {
        None
    }
}

/// Gibbs-Duhem, first-law and consistency reports from one set of
/// perturbed integrations, with the convergence order measured by
/// repeating the differences at half the step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermoReports {
    pub gibbs_duhem: IdentityReport,
    pub first_law: IdentityReport,
    pub triangle: IdentityReport,
}

pub fn check_thermodynamics(s: &FluidState, q: &QuadratureSpec, pert: &PerturbationSpec) -> Result<ThermoReports> {
    let m = s.multipliers();
    let coarse = derivatives_for(&m, q, pert)?;
    let half = pert.scaled(0.5);
    let fine = derivatives_for(&m, q, &half)?;

    let gd = gibbs_duhem_table(&coarse);
    let gd_fine = gibbs_duhem_table(&fine);
    let mut gibbs_duhem = IdentityReport::new("gibbs_duhem", gd.entries.clone(), gd.relative(), pert.tolerance);
    // weights are the nominal steps, identical in both tables up to the factor 1/2
    gibbs_duhem.convergence_order = measured_order(gd.weighted_max(), 2.0 * gd_fine.weighted_max());

    let fl = first_law_table(&coarse);
    let fl_fine = first_law_table(&fine);
    let mut first_law = IdentityReport::new("first_law", fl.entries.clone(), fl.relative(), pert.tolerance);
    first_law.convergence_order = measured_order(fl.weighted_max(), 2.0 * fl_fine.weighted_max());

    let triangle = triangle_report(&coarse, &gd, &fl);
    Ok(ThermoReports {
        gibbs_duhem,
        first_law,
        triangle,
    })
}

pub fn check_gibbs_duhem(s: &FluidState, q: &QuadratureSpec, pert: &PerturbationSpec) -> Result<IdentityReport> {
    Ok(check_thermodynamics(s, q, pert)?.gibbs_duhem)
}

pub fn check_first_law(s: &FluidState, q: &QuadratureSpec, pert: &PerturbationSpec) -> Result<IdentityReport> {
    Ok(check_thermodynamics(s, q, pert)?.first_law)
}

/// The differenced Euler relation equals first-law minus Gibbs-Duhem
/// residuals; its size is bounded by theirs.
fn triangle_report(d: &CurrentDerivatives, gd: &Table, fl: &Table) -> IdentityReport {
    let m = &d.multipliers;
    let mut entries = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, dir) in Direction::ALL.iter().enumerate() {
        let db = &d.derivatives[k];
        let base = &d.base;
        let beta = m.beta.lower();
        let omega = m.omega.lower_components();
        for mu in 0..4 {
            // d/d(dir) of the Euler combination by the product rule
            let bt: f64 = (0..4).map(|l| beta[l] * db.t[l][mu]).sum();
            let ws: f64 = (0..6).map(|p| omega[p] * db.s[mu][p]).sum();
            let mut de = db.s_entropy.0[mu] + m.xi * db.n.0[mu] - bt + ws - db.ncal.0[mu];
            de += match *dir {
                Direction::Xi => base.n.0[mu],
                Direction::Beta(l) => -base.t[l][mu],
                Direction::Omega(p) => base.s[mu][p],
            };
            let idx = 4 * k + mu;
            let combined = fl.entries[idx].residual - gd.entries[idx].residual;
            let bound = fl.entries[idx].residual.abs() + gd.entries[idx].residual.abs();
            let scale = fl.entries[idx].lhs.abs().max(gd.entries[idx].lhs.abs()).max(1e-300);
            let mismatch = (de - combined).abs() / scale;
            let excess = ((de.abs() - bound) / scale).max(0.0);
            worst = worst.max(mismatch).max(excess);
            entries.push(ComponentResidual {
                label: format!("d{}/Euler^{mu}", dir.label()),
                lhs: de,
                rhs: combined,
                residual: de - combined,
            });
        }
    }
    IdentityReport::new("triangle", entries, worst, 1e-9)
}

/// Euler relation on the converged bundle, with no differencing.
pub fn check_euler(s: &FluidState, q: &QuadratureSpec, pert: &PerturbationSpec) -> Result<IdentityReport> {
    let m = s.multipliers();
    let bundle = evaluate_currents_with(&m, q, &CurrentOptions::default())?.currents;
    Ok(euler_report(&m, &bundle, pert.euler_factor * q.rel_tol))
}

pub fn euler_report(m: &Multipliers, b: &CurrentsBundle, tolerance: f64) -> IdentityReport {
    let beta = m.beta.lower();
    let omega = m.omega.lower_components();
    let residual = b.euler_residual(m);
    let mut entries = Vec::new();
    let mut scales = [0.0_f64; 4];
    for mu in 0..4 {
        let bt: f64 = (0..4).map(|l| beta[l] * b.t[l][mu]).sum();
        let ws: f64 = (0..6).map(|p| omega[p] * b.s[mu][p]).sum();
        let terms = [b.s_entropy.0[mu], m.xi * b.n.0[mu], bt, ws, b.ncal.0[mu]];
        scales[mu] = terms.iter().fold(0.0, |a, x| a.max(x.abs()));
        entries.push(ComponentResidual {
            label: format!("Euler^{mu}"),
            lhs: b.s_entropy.0[mu],
            rhs: b.s_entropy.0[mu] - residual[mu],
            residual: residual[mu],
        });
    }
    // components that vanish by symmetry are compared with the largest term
    let overall = scales.iter().fold(0.0_f64, |a, x| a.max(*x));
    let rel = residual
        .iter()
        .map(|r| if *r == 0.0 { 0.0 } else { r.abs() / overall })
        .fold(0.0, f64::max);
    IdentityReport::new("euler", entries, rel, tolerance)
}

fn block_relative(fd: &[f64], direct: &[f64]) -> f64 {
    let num = fd.iter().zip(direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let den = direct.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Currents recovered from derivatives of the generating function:
/// `Ncal = -dchi/dbeta`, `N = -d2chi/dxi dbeta`, `T = d2chi/dbeta dbeta`,
/// `S = -d2chi/dbeta domega`.
pub fn check_generating_function(
    s: &FluidState,
    q: &QuadratureSpec,
    pert: &PerturbationSpec,
) -> Result<Vec<IdentityReport>> {
    q.validate()?;
    pert.validate()?;
    let m = s.multipliers();
    crate::quadrature::check_admissible(&m, q)?;
    let grid = MomentumGrid::for_multipliers(&m, q, pert.grid_level)?;
    let options = CurrentOptions::default();
    let direct = currents_on_grid(&m, &grid, &options)?;

    let chi_at = |shifts: &[(Direction, f64)]| -> Result<f64> {
        let mut shifted = m;
        for (d, h) in shifts {
            shifted = d.apply(&shifted, *h);
        }
        let label: Vec<String> = shifts.iter().map(|(d, _)| d.label()).collect();
        check_perturbation(&shifted, q, &label.join("+"))?;
        chi_on_grid(&shifted, &grid, &options)
    };
    let first = |d: Direction, h: f64| -> Result<f64> { Ok((chi_at(&[(d, h)])? - chi_at(&[(d, -h)])?) / (2.0 * h)) };
    let second = |a: Direction, ha: f64, b: Direction, hb: f64| -> Result<f64> {
        if a == b {
            let c0 = chi_at(&[])?;
            Ok((chi_at(&[(a, ha)])? - 2.0 * c0 + chi_at(&[(a, -ha)])?) / (ha * ha))
        } else {
            let pp = chi_at(&[(a, ha), (b, hb)])?;
            let pm = chi_at(&[(a, ha), (b, -hb)])?;
            let mp = chi_at(&[(a, -ha), (b, hb)])?;
            let mm = chi_at(&[(a, -ha), (b, -hb)])?;
            Ok((pp - pm - mp + mm) / (4.0 * ha * hb))
        }
    };
    let beta_dirs = [
        Direction::Beta(0),
        Direction::Beta(1),
        Direction::Beta(2),
        Direction::Beta(3),
    ];

    let mut reports = Vec::new();

    // Ncal^l = -dchi/dbeta_l (contravariant result from a covariant derivative)
    let mut entries = Vec::new();
    let mut fd = Vec::new();
    for (l, d) in beta_dirs.iter().enumerate() {
        let h = d.gf_step(&m, pert.gf_first_step);
        let v = -first(*d, h)?;
        fd.push(v);
        entries.push(ComponentResidual {
            label: format!("Ncal^{l}"),
            lhs: v,
            rhs: direct.ncal.0[l],
            residual: v - direct.ncal.0[l],
        });
    }
    let rel = block_relative(&fd, &direct.ncal.0);
    reports.push(IdentityReport::new(
        "generating_function.Ncal",
        entries,
        rel,
        pert.gf_first_tolerance,
    ));

    // N^l = -d2chi/dxi dbeta_l
    let hx = Direction::Xi.gf_step(&m, pert.gf_second_step);
    let mut entries = Vec::new();
    let mut fd = Vec::new();
    for (l, d) in beta_dirs.iter().enumerate() {
        let h = d.gf_step(&m, pert.gf_second_step);
        let v = -second(Direction::Xi, hx, *d, h)?;
        fd.push(v);
        entries.push(ComponentResidual {
            label: format!("N^{l}"),
            lhs: v,
            rhs: direct.n.0[l],
            residual: v - direct.n.0[l],
        });
    }
    let rel = if direct.n.max_abs() == 0.0 && fd.iter().all(|x| x.abs() <= 1e-8 * direct.t[0][0].abs()) {
        0.0
    } else {
        block_relative(&fd, &direct.n.0)
    };
    reports.push(IdentityReport::new(
        "generating_function.N",
        entries,
        rel,
        pert.gf_second_tolerance,
    ));

    // T^{lm} = d2chi/dbeta_l dbeta_m
    let mut entries = Vec::new();
    let mut fd = Vec::new();
    let mut want = Vec::new();
    for l in 0..4 {
        for mu in l..4 {
            let (a, b) = (beta_dirs[l], beta_dirs[mu]);
            let v = second(
                a,
                a.gf_step(&m, pert.gf_second_step),
                b,
                b.gf_step(&m, pert.gf_second_step),
            )?;
            fd.push(v);
            want.push(direct.t[l][mu]);
            entries.push(ComponentResidual {
                label: format!("T^{l}{mu}"),
                lhs: v,
                rhs: direct.t[l][mu],
                residual: v - direct.t[l][mu],
            });
        }
    }
    let rel = block_relative(&fd, &want);
    reports.push(IdentityReport::new(
        "generating_function.T",
        entries,
        rel,
        pert.gf_second_tolerance,
    ));

    // S^{l,ab} = -d2chi/dbeta_l domega_ab
    let mut entries = Vec::new();
    let mut fd = Vec::new();
    let mut want = Vec::new();
    for (l, bd) in beta_dirs.iter().enumerate() {
        for k in 0..6 {
            let od = Direction::Omega(k);
            let v = -second(
                *bd,
                bd.gf_step(&m, pert.gf_second_step),
                od,
                od.gf_step(&m, pert.gf_second_step),
            )?;
            fd.push(v);
            want.push(direct.s[l][k]);
            entries.push(ComponentResidual {
                label: format!("S^{l},{}", &od.label()[6..]),
                lhs: v,
                rhs: direct.s[l][k],
                residual: v - direct.s[l][k],
            });
        }
    }
    let scale_t = direct.t[0][0].abs();
    let rel = if want.iter().all(|x| *x == 0.0) && fd.iter().all(|x| x.abs() <= 1e-8 * scale_t) {
        0.0
    } else {
        block_relative(&fd, &want)
    };
    reports.push(IdentityReport::new(
        "generating_function.S",
        entries,
        rel,
        pert.gf_second_tolerance,
    ));
    Ok(reports)
}

/// Relative Fermi-Dirac versus Boltzmann gap of every current block under
/// a uniform fugacity suppression, and the rate at which it closes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoltzmannGap {
    pub shift: f64,
    pub block: String,
    pub gap: f64,
}

pub const BOLTZMANN_SHIFTS: [f64; 3] = [4.0, 6.0, 8.0];

pub fn boltzmann_gaps(s: &FluidState, q: &QuadratureSpec, grid_level: usize) -> Result<Vec<BoltzmannGap>> {
    let m = s.multipliers();
    crate::quadrature::check_admissible(&m, q)?;
    let grid = MomentumGrid::for_multipliers(&m, q, grid_level)?;
    let mut out = Vec::new();
    for shift in BOLTZMANN_SHIFTS {
        let fd = currents_on_grid(&m, &grid, &CurrentOptions::default().with_shift(shift))?;
        let b = currents_on_grid(&m, &grid, &CurrentOptions::boltzmann().with_shift(shift))?;
        for ((name, x), (_, y)) in fd.blocks().iter().zip(b.blocks().iter()) {
            let scale = y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if scale == 0.0 {
                continue;
            }
            let gap = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            out.push(BoltzmannGap {
                shift,
                block: (*name).into(),
                gap,
            });
        }
    }
    Ok(out)
}

pub fn check_boltzmann_limit(s: &FluidState, q: &QuadratureSpec, pert: &PerturbationSpec) -> Result<IdentityReport> {
    let gaps = boltzmann_gaps(s, q, pert.grid_level)?;
    let expected = (BOLTZMANN_SHIFTS[1] - BOLTZMANN_SHIFTS[0]).exp();
    let mut entries = Vec::new();
    let mut worst: f64 = 0.0;
    let blocks: Vec<String> = gaps
        .iter()
        .filter(|g| g.shift == BOLTZMANN_SHIFTS[0])
        .map(|g| g.block.clone())
        .collect();
    for block in blocks {
        let series: Vec<f64> = BOLTZMANN_SHIFTS
            .iter()
            .filter_map(|sh| gaps.iter().find(|g| g.shift == *sh && g.block == block).map(|g| g.gap))
            .collect();
        // blocks that cancel exactly (e.g. zero net charge) carry no rate
        let noise = 1e-12;
        if series.len() != 3 || series.iter().any(|g| *g < noise) {
            continue;
        }
        for w in 0..2 {
            let rate = series[w] / series[w + 1];
            let deviation = (rate / expected - 1.0).abs();
            worst = worst.max(deviation);
            entries.push(ComponentResidual {
                label: format!("{block}: gap({})/gap({})", BOLTZMANN_SHIFTS[w], BOLTZMANN_SHIFTS[w + 1]),
                lhs: rate,
                rhs: expected,
                residual: rate - expected,
            });
        }
    }
    Ok(IdentityReport::new(
        "boltzmann_limit",
        entries,
        worst,
        pert.boltzmann_rate_tolerance,
    ))
}

/// Names accepted by [`run_checks`].
pub const CHECK_NAMES: [&str; 5] = [
    "gibbs_duhem",
    "first_law",
    "euler",
    "generating_function",
    "boltzmann_limit",
];

/// Runs the named checks and returns their reports in a fixed order.
pub fn run_checks(
    s: &FluidState,
    q: &QuadratureSpec,
    pert: &PerturbationSpec,
    names: &[String],
) -> Result<Vec<IdentityReport>> {
    for n in names {
        if !CHECK_NAMES.contains(&n.as_str()) {
            return Err(Error::InvalidSpec(format!(
                "unknown check `{n}`; expected one of {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    let wants = |n: &str| names.iter().any(|x| x == n);
    let mut reports = Vec::new();
    if wants("gibbs_duhem") || wants("first_law") {
        let t = check_thermodynamics(s, q, pert)?;
        if wants("gibbs_duhem") {
            reports.push(t.gibbs_duhem);
        }
        if wants("first_law") {
            reports.push(t.first_law);
        }
        if wants("gibbs_duhem") && wants("first_law") {
            reports.push(t.triangle);
        }
    }
    if wants("euler") {
        reports.push(check_euler(s, q, pert)?);
    }
    if wants("generating_function") {
        reports.extend(check_generating_function(s, q, pert)?);
    }
    if wants("boltzmann_limit") {
        reports.push(check_boltzmann_limit(s, q, pert)?);
    }
    Ok(reports)
}

/// Per-mode Euler identity `g w - ln(1-g) = -g ln g - (1-g) ln(1-g)` at a
/// given exponent; returns the absolute difference.
pub fn per_mode_euler_residual(w: f64) -> f64 {
    let g = Statistics::FermiDirac.occupation(w);
    let lhs = Statistics::FermiDirac.entropy(w);
    let rhs = crate::statistics::entropy_mode(g);
    (lhs - rhs).abs()
}
