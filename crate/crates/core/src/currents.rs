//! Conserved and auxiliary currents as momentum integrals of mode sums.
//!
//! With `w_ij = -i xi + beta.p - j s`, `s = sqrt(-a^2)` and occupations
//! `g_ij = g(w_ij)`:
//!
//! ```text
//! N^mu          = sum_ij i int dP p^mu g_ij
//! T^{mu nu}     = sum_ij   int dP p^mu p^nu g_ij
//! S^{l, mu nu}  = (1/2m) sum_ij j int dP p^l g_ij eps^{mu nu a b} a_a p_b / s
//! Ncal^mu       = -sum_ij  int dP p^mu ln(1 - g_ij)
//! S_entropy^mu  = -sum_ij  int dP p^mu [g ln g + (1-g) ln(1-g)]
//! chi           = sum_ij   int dP [-Li2(-e^{-w_ij})]
//! ```
//!
//! The spin tensor is formed as `eps a p` times `sum_j j g_ij / s`, which
//! stays finite when `s -> 0`. All integrands are evaluated on the same grid
//! in a single pass.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::{integrate_dp_multipliers, MomentumGrid, MomentumPoint, QuadratureSpec};
use crate::statistics::{FluidState, ModeLabel, Multipliers, Statistics};
use crate::tensor::{
    b_star_from_eb, epsilon_contract, norm3, spin_four_vector_from_dual, Antisym2Tensor, EBDecomposition, FourVector,
    LorentzTransform, INDEX_PAIRS,
};

/// Number of real components in a flattened bundle.
pub const BUNDLE_LEN: usize = 47;

/// Upper-triangular `(mu, nu)` pairs of the symmetric energy-momentum tensor.
const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct CurrentOptions {
    pub statistics: Statistics,
    /// Uniform fugacity suppression: every exponent becomes `w + shift`.
    pub fugacity_shift: f64,
}

impl CurrentOptions {
    pub fn boltzmann() -> Self {
        CurrentOptions {
            statistics: Statistics::Boltzmann,
            fugacity_shift: 0.0,
        }
    }

    pub fn with_shift(self, shift: f64) -> Self {
        CurrentOptions {
            fugacity_shift: shift,
            ..self
        }
    }
}

/// All integrands at one momentum, before integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeCurrents {
    /// Occupations in [`ModeLabel::ALL`] order.
    pub modes: [f64; 4],
    pub n: FourVector,
    pub t: [[f64; 4]; 4],
    pub s: [[f64; 6]; 4],
    pub ncal: FourVector,
    pub s_entropy: FourVector,
    pub chi: f64,
}

/// Per-state data shared by every node.
#[derive(Clone, Copy, Debug)]
pub(crate) struct NodeEvaluator {
    m: Multipliers,
    dual: Antisym2Tensor,
    eb: EBDecomposition,
    options: CurrentOptions,
}

impl NodeEvaluator {
    pub(crate) fn new(m: &Multipliers, options: &CurrentOptions) -> Self {
        NodeEvaluator {
            m: *m,
            dual: m.omega.dual(),
            eb: m.omega.eb(),
            options: *options,
        }
    }

    /// `sqrt(-a^2)`, evaluated through the rest-frame magnetic vector.
    #[inline]
    pub(crate) fn spin_norm(&self, p: &MomentumPoint) -> f64 {
        0.5 * norm3(&b_star_from_eb(&self.eb.e, &self.eb.b, &p.p, p.energy, self.m.mass))
    }

    /// `beta.p + shift` and `sqrt(-a^2)`.
    #[inline]
    pub(crate) fn exponents(&self, p: &MomentumPoint) -> (f64, f64) {
        let p4 = p.four_momentum();
        (self.m.beta.dot(&p4) + self.options.fugacity_shift, self.spin_norm(p))
    }

    /// Mode exponents in [`ModeLabel::ALL`] order.
    #[inline]
    pub(crate) fn mode_exponents(&self, p: &MomentumPoint) -> [f64; 4] {
        let (bp, s) = self.exponents(p);
        ModeLabel::ALL.map(|l| -l.species.sign() * self.m.xi + bp - l.spin.sign() * s)
    }

    #[inline]
    pub(crate) fn eval_modes(&self, p: &MomentumPoint) -> [f64; 4] {
        let stats = self.options.statistics;
        self.mode_exponents(p).map(|w| stats.occupation(w))
    }

    /// `sum_j j g_ij / s` for `i = +, -`.
    #[inline]
    pub(crate) fn split_ratios(&self, p: &MomentumPoint) -> [f64; 2] {
        let (bp, s) = self.exponents(p);
        let stats = self.options.statistics;
        [
            stats.split_ratio(-self.m.xi + bp, s),
            stats.split_ratio(self.m.xi + bp, s),
        ]
    }

    /// `eps^{mu nu a b} a_a p_b / (2m)` in stored pair order.
    #[inline]
    pub(crate) fn spin_structure(&self, p: &MomentumPoint) -> [f64; 6] {
        let p4 = p.four_momentum();
        let a = spin_four_vector_from_dual(&self.dual, &p4, self.m.mass);
        let y = epsilon_contract(&a, &p4).upper_components();
        y.map(|v| v / (2.0 * self.m.mass))
    }

    pub(crate) fn eval(&self, p: &MomentumPoint) -> NodeCurrents {
        let stats = self.options.statistics;
        let w = self.mode_exponents(p);
        let modes = w.map(|x| stats.occupation(x));
        let mut number = 0.0;
        let mut total = 0.0;
        let mut aux = 0.0;
        let mut entropy = 0.0;
        let mut chi = 0.0;
        for (label, (&g, &wi)) in ModeLabel::ALL.iter().zip(modes.iter().zip(&w)) {
            number += label.species.sign() * g;
            total += g;
            let a = stats.aux(wi);
            aux += a;
            entropy += g * wi + a;
            chi += stats.chi(wi);
        }
        let ratio: f64 = self.split_ratios(p).iter().sum();
        let structure = self.spin_structure(p);
        let p4 = p.four_momentum().0;
        let mut t = [[0.0; 4]; 4];
        let mut s = [[0.0; 6]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                t[mu][nu] = p4[mu] * p4[nu] * total;
            }
            for k in 0..6 {
                s[mu][k] = p4[mu] * structure[k] * ratio;
            }
        }
        NodeCurrents {
            modes,
            n: FourVector(p4.map(|x| x * number)),
            t,
            s,
            ncal: FourVector(p4.map(|x| x * aux)),
            s_entropy: FourVector(p4.map(|x| x * entropy)),
            chi,
        }
    }
}

/// Closed-form integrands at a single momentum.
pub fn node_currents(m: &Multipliers, p: &MomentumPoint, options: &CurrentOptions) -> NodeCurrents {
    NodeEvaluator::new(m, options).eval(p)
}

impl NodeCurrents {
    pub fn flatten(&self) -> [f64; BUNDLE_LEN] {
        let mut out = [0.0; BUNDLE_LEN];
        out[0..4].copy_from_slice(&self.n.0);
        for (k, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
            out[4 + k] = self.t[mu][nu];
        }
        for lambda in 0..4 {
            out[14 + 6 * lambda..20 + 6 * lambda].copy_from_slice(&self.s[lambda]);
        }
        out[38..42].copy_from_slice(&self.ncal.0);
        out[42..46].copy_from_slice(&self.s_entropy.0);
        out[46] = self.chi;
        out
    }
}

/// Integrated currents. Units: GeV^3 for `N`, `S`, `S_entropy`; GeV^4 for
/// `T`, `Ncal` and `chi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentsBundle {
    #[serde(rename = "N")]
    pub n: FourVector,
    #[serde(rename = "T")]
    pub t: [[f64; 4]; 4],
    /// `S^{lambda, mu nu}` as `[lambda][pair]` with pairs `01,02,03,12,13,23`.
    #[serde(rename = "S")]
    pub s: [[f64; 6]; 4],
    #[serde(rename = "Ncal")]
    pub ncal: FourVector,
    #[serde(rename = "S_entropy")]
    pub s_entropy: FourVector,
    pub chi: f64,
}

/// Largest error estimate in each block.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct BundleErrors {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "Ncal")]
    pub ncal: f64,
    #[serde(rename = "S_entropy")]
    pub s_entropy: f64,
    pub chi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurrentsResult {
    pub currents: CurrentsBundle,
    pub errors: BundleErrors,
    pub zeta: f64,
    pub refinements_used: usize,
}

impl CurrentsBundle {
    /// Names of the entries of [`CurrentsBundle::flatten`], e.g. `T^12` or
    /// `S^0,13`.
    pub fn component_labels() -> Vec<String> {
        let mut out: Vec<String> = (0..4).map(|mu| format!("N^{mu}")).collect();
        out.extend(SYM_PAIRS.iter().map(|(mu, nu)| format!("T^{mu}{nu}")));
        for lambda in 0..4 {
            out.extend(INDEX_PAIRS.iter().map(|(a, b)| format!("S^{lambda},{a}{b}")));
        }
        out.extend((0..4).map(|mu| format!("Ncal^{mu}")));
        out.extend((0..4).map(|mu| format!("S_entropy^{mu}")));
        out.push("chi".into());
        out
    }

    pub fn from_flat(v: &[f64; BUNDLE_LEN]) -> Self {
        let mut t = [[0.0; 4]; 4];
        for (k, &(mu, nu)) in SYM_PAIRS.iter().enumerate() {
            t[mu][nu] = v[4 + k];
            t[nu][mu] = v[4 + k];
        }
        let s = std::array::from_fn(|lambda| std::array::from_fn(|k| v[14 + 6 * lambda + k]));
        CurrentsBundle {
            n: FourVector([v[0], v[1], v[2], v[3]]),
            t,
            s,
            ncal: FourVector([v[38], v[39], v[40], v[41]]),
            s_entropy: FourVector([v[42], v[43], v[44], v[45]]),
            chi: v[46],
        }
    }

    pub fn flatten(&self) -> [f64; BUNDLE_LEN] {
        NodeCurrents {
            modes: [0.0; 4],
            n: self.n,
            t: self.t,
            s: self.s,
            ncal: self.ncal,
            s_entropy: self.s_entropy,
            chi: self.chi,
        }
        .flatten()
    }

    /// `S^{lambda, mu nu}` for any index pair.
    pub fn spin(&self, lambda: usize, mu: usize, nu: usize) -> f64 {
        match (mu, nu) {
            _ if mu == nu => 0.0,
            _ if mu < nu => self.s[lambda][pair(mu, nu)],
            _ => -self.s[lambda][pair(nu, mu)],
        }
    }

    pub fn spin_full(&self) -> [[[f64; 4]; 4]; 4] {
        std::array::from_fn(|l| std::array::from_fn(|mu| std::array::from_fn(|nu| self.spin(l, mu, nu))))
    }

    /// Currents seen from the frame reached by `lambda`.
    pub fn transformed(&self, lambda: &LorentzTransform) -> Self {
        let l = &lambda.0;
        let n = lambda.apply(&self.n);
        let t = lambda.apply_rank2(&self.t);
        let full = self.spin_full();
        let mut s = [[0.0; 6]; 4];
        for a in 0..4 {
            for (k, &(mu, nu)) in INDEX_PAIRS.iter().enumerate() {
                let mut acc = 0.0;
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            acc += l[(a, b)] * l[(mu, c)] * l[(nu, d)] * full[b][c][d];
                        }
                    }
                }
                s[a][k] = acc;
            }
        }
        CurrentsBundle {
            n,
            t,
            s,
            ncal: lambda.apply(&self.ncal),
            s_entropy: lambda.apply(&self.s_entropy),
            chi: self.chi,
        }
    }

    /// Blocks as `(name, components)`.
    pub fn blocks(&self) -> [(&'static str, Vec<f64>); 6] {
        let flat = self.flatten();
        [
            ("N", flat[0..4].to_vec()),
            ("T", flat[4..14].to_vec()),
            ("S", flat[14..38].to_vec()),
            ("Ncal", flat[38..42].to_vec()),
            ("S_entropy", flat[42..46].to_vec()),
            ("chi", vec![flat[46]]),
        ]
    }

    /// Largest blockwise relative deviation from `other`. Each block is
    /// measured against its own largest component in `other`, with blocks
    /// that vanish measured against the overall scale.
    pub fn max_relative_deviation(&self, other: &CurrentsBundle) -> f64 {
        let overall = other.flatten().iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        self.blocks()
            .iter()
            .zip(other.blocks().iter())
            .map(|((_, a), (_, b))| {
                let scale = b.iter().fold(1e-12 * overall, |acc, x| acc.max(x.abs()));
                a.iter().zip(b).map(|(x, y)| (x - y).abs() / scale).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `S^mu + xi N^mu - beta_l T^{l mu} + (1/2) omega_{ab} S^{mu, ab} - Ncal^mu`
    pub fn euler_residual(&self, m: &Multipliers) -> [f64; 4] {
        let beta = m.beta.lower();
        let omega = m.omega.lower_components();
        std::array::from_fn(|mu| {
            let bt: f64 = (0..4).map(|l| beta[l] * self.t[l][mu]).sum();
            let ws: f64 = (0..6).map(|k| omega[k] * self.s[mu][k]).sum();
            self.s_entropy.0[mu] + m.xi * self.n.0[mu] - bt + ws - self.ncal.0[mu]
        })
    }
}

fn pair(mu: usize, nu: usize) -> usize {
    INDEX_PAIRS
        .iter()
        .position(|&p| p == (mu, nu))
        .expect("ordered index pair")
}

fn block_errors(errors: &[f64; BUNDLE_LEN]) -> BundleErrors {
    let max = |r: std::ops::Range<usize>| errors[r].iter().fold(0.0_f64, |a, x| a.max(*x));
    BundleErrors {
        n: max(0..4),
        t: max(4..14),
        s: max(14..38),
        ncal: max(38..42),
        s_entropy: max(42..46),
        chi: errors[46],
    }
}

/// Adaptive evaluation of every current for a Fermi-Dirac state.
pub fn evaluate_currents(s: &FluidState, q: &QuadratureSpec) -> Result<CurrentsResult> {
    evaluate_currents_with(&s.multipliers(), q, &CurrentOptions::default())
}

pub fn evaluate_currents_with(m: &Multipliers, q: &QuadratureSpec, options: &CurrentOptions) -> Result<CurrentsResult> {
    let evaluator = NodeEvaluator::new(m, options);
    let result = integrate_dp_multipliers(|p| evaluator.eval(p).flatten(), m, q)?;
    Ok(CurrentsResult {
        currents: CurrentsBundle::from_flat(&result.value),
        errors: block_errors(&result.errors),
        zeta: crate::quadrature::selection_criterion_multipliers(m),
        refinements_used: result.refinements_used,
    })
}

/// Every current on a fixed grid, without refinement.
pub fn currents_on_grid(m: &Multipliers, grid: &MomentumGrid, options: &CurrentOptions) -> Result<CurrentsBundle> {
    let evaluator = NodeEvaluator::new(m, options);
    let flat = grid.integrate(|p| evaluator.eval(p).flatten())?;
    Ok(CurrentsBundle::from_flat(&flat))
}

/// Generating function alone on a fixed grid.
pub fn chi_on_grid(m: &Multipliers, grid: &MomentumGrid, options: &CurrentOptions) -> Result<f64> {
    let evaluator = NodeEvaluator::new(m, options);
    let stats = options.statistics;
    Ok(grid.integrate(|p| [evaluator.mode_exponents(p).iter().map(|&w| stats.chi(w)).sum::<f64>()])?[0])
}

fn integrate_part<const K: usize>(
    s: &FluidState,
    q: &QuadratureSpec,
    extract: impl Fn(&NodeCurrents) -> [f64; K] + Sync,
) -> Result<[f64; K]> {
    let m = s.multipliers();
    let evaluator = NodeEvaluator::new(&m, &CurrentOptions::default());
    Ok(integrate_dp_multipliers(|p| extract(&evaluator.eval(p)), &m, q)?.value)
}

pub fn baryon_current(s: &FluidState, q: &QuadratureSpec) -> Result<FourVector> {
    Ok(FourVector(integrate_part(s, q, |n| n.n.0)?))
}

pub fn energy_momentum(s: &FluidState, q: &QuadratureSpec) -> Result<[[f64; 4]; 4]> {
    let flat = integrate_part(s, q, |n| std::array::from_fn::<f64, 16, _>(|k| n.t[k / 4][k % 4]))?;
    Ok(std::array::from_fn(|mu| std::array::from_fn(|nu| flat[4 * mu + nu])))
}

pub fn spin_tensor(s: &FluidState, q: &QuadratureSpec) -> Result<[[f64; 6]; 4]> {
    let flat = integrate_part(s, q, |n| std::array::from_fn::<f64, 24, _>(|k| n.s[k / 6][k % 6]))?;
    Ok(std::array::from_fn(|l| std::array::from_fn(|k| flat[6 * l + k])))
}

pub fn aux_current(s: &FluidState, q: &QuadratureSpec) -> Result<FourVector> {
    Ok(FourVector(integrate_part(s, q, |n| n.ncal.0)?))
}

pub fn entropy_current(s: &FluidState, q: &QuadratureSpec) -> Result<FourVector> {
    Ok(FourVector(integrate_part(s, q, |n| n.s_entropy.0)?))
}

pub fn generating_function(s: &FluidState, q: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_part(s, q, |n| [n.chi])?[0])
}
