//! Explicit Dirac matrices and bispinors in the Dirac representation.
//!
//! Everything here is a brute-force counterpart of a closed form found
//! elsewhere in the crate: 4x4 traces stand in for the scalar reductions of
//! the currents, and spinor contractions stand in for the closed 2x2 spin
//! density matrices.

use std::sync::OnceLock;

use nalgebra::{Complex, Matrix2, Matrix4, RowVector4, Vector4};
use serde::Serialize;

use crate::currents::{node_currents, CurrentOptions};
use crate::error::{Error, Result};
use crate::quadrature::MomentumPoint;
use crate::statistics::{FluidState, Multipliers, Species, Statistics};
use crate::tensor::{a_norm, epsilon_contract, spin_four_vector, FourVector, OnShellMomentum, INDEX_PAIRS, METRIC};

pub type C64 = Complex<f64>;
pub type SpinorMatrix = Matrix4<C64>;

const EXP_LIMIT: f64 = 700.0;

/// Largest entry modulus.
pub fn max_norm<R: nalgebra::Dim, K: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, K>>(
    m: &nalgebra::Matrix<C64, R, K, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `gamma^mu`, `gamma_5` and `sigma^{mu nu} = (i/2)[gamma^mu, gamma^nu]`.
#[derive(Clone, Debug)]
pub struct DiracBasis {
    pub gamma: [SpinorMatrix; 4],
    pub gamma5: SpinorMatrix,
    pub sigma: [[SpinorMatrix; 4]; 4],
}

pub fn pauli() -> [Matrix2<C64>; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        Matrix2::new(z, one, one, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(one, z, z, -one),
    ]
}

fn blocks(tl: Matrix2<C64>, tr: Matrix2<C64>, bl: Matrix2<C64>, br: Matrix2<C64>) -> SpinorMatrix {
    let mut m = SpinorMatrix::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&tl);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&tr);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&bl);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&br);
    m
}

pub fn dirac_basis() -> &'static DiracBasis {
    static BASIS: OnceLock<DiracBasis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let id = Matrix2::<C64>::identity();
        let zero = Matrix2::<C64>::zeros();
        let [s1, s2, s3] = pauli();
        let gamma = [
            blocks(id, zero, zero, -id),
            blocks(zero, s1, -s1, zero),
            blocks(zero, s2, -s2, zero),
            blocks(zero, s3, -s3, zero),
        ];
        let gamma5 = gamma[0] * gamma[1] * gamma[2] * gamma[3] * c(0.0, 1.0);
        let mut sigma = [[SpinorMatrix::zeros(); 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                let comm = gamma[mu] * gamma[nu] - gamma[nu] * gamma[mu];
                sigma[mu][nu] = comm * c(0.0, 0.5);
            }
        }
        DiracBasis { gamma, gamma5, sigma }
    })
}

/// `gamma^mu v_mu`
pub fn slash(v: &FourVector) -> SpinorMatrix {
    let basis = dirac_basis();
    let mut m = SpinorMatrix::zeros();
    for mu in 0..4 {
        m += basis.gamma[mu] * c(METRIC[mu] * v.0[mu], 0.0);
    }
    m
}

pub fn trace4(m: &SpinorMatrix) -> C64 {
    m.trace()
}

/// Largest entry of `{gamma^mu, gamma^nu} - 2 g^{mu nu}`.
pub fn clifford_defect() -> f64 {
    let basis = dirac_basis();
    let id = SpinorMatrix::identity();
    let mut worst = 0.0_f64;
    for mu in 0..4 {
        for nu in 0..4 {
            let anti = basis.gamma[mu] * basis.gamma[nu] + basis.gamma[nu] * basis.gamma[mu];
            let target = if mu == nu {
                id * c(2.0 * METRIC[mu], 0.0)
            } else {
                SpinorMatrix::zeros()
            };
            worst = worst.max(max_norm(&(anti - target)));
        }
        let g5 = basis.gamma5 * basis.gamma[mu] + basis.gamma[mu] * basis.gamma5;
        worst = worst.max(max_norm(&g5));
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpinorKind {
    U,
    V,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bispinor {
    pub components: Vector4<C64>,
    pub kind: SpinorKind,
    pub r: usize,
}

impl Bispinor {
    /// Dirac adjoint `psi^dagger gamma^0`.
    pub fn bar(&self) -> RowVector4<C64> {
        self.components.adjoint() * dirac_basis().gamma[0]
    }

    /// `bar(self) M other`
    pub fn sandwich(&self, m: &SpinorMatrix, other: &Bispinor) -> C64 {
        (self.bar() * m * other.components)[(0, 0)]
    }
}

/// Free Dirac spinors `u_r(p)`, `v_r(p)` for `r = 1, 2`.
pub fn bispinor(kind: SpinorKind, r: usize, p: &OnShellMomentum) -> Result<Bispinor> {
    if r != 1 && r != 2 {
        return Err(Error::Domain(format!("spin index must be 1 or 2, got {r}")));
    }
    let m = p.mass();
    let e = p.energy();
    let k = p.three_momentum();
    let [s1, s2, s3] = pauli();
    let sp = (s1 * c(k[0], 0.0) + s2 * c(k[1], 0.0) + s3 * c(k[2], 0.0)) / c(e + m, 0.0);
    let norm = c((e + m).sqrt(), 0.0);
    let chi = match (kind, r) {
        (SpinorKind::U, 1) => nalgebra::Vector2::new(c(1.0, 0.0), c(0.0, 0.0)),
        (SpinorKind::U, _) => nalgebra::Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
        (SpinorKind::V, 1) => nalgebra::Vector2::new(c(0.0, 0.0), c(1.0, 0.0)),
        (SpinorKind::V, _) => nalgebra::Vector2::new(c(-1.0, 0.0), c(0.0, 0.0)),
    };
    let lower = sp * chi;
    let components = match kind {
        SpinorKind::U => Vector4::new(chi[0], chi[1], lower[0], lower[1]) * norm,
        SpinorKind::V => Vector4::new(lower[0], lower[1], chi[0], chi[1]) * norm,
    };
    let spinor = Bispinor { components, kind, r };
    let expected = match kind {
        SpinorKind::U => 2.0 * m,
        SpinorKind::V => -2.0 * m,
    };
    let got = spinor.sandwich(&SpinorMatrix::identity(), &spinor);
    if (got - c(expected, 0.0)).norm() > 1e-12 * (2.0 * m).max(e) {
        return Err(Error::InvariantViolation(format!(
            "bispinor normalization {got} differs from {expected}"
        )));
    }
    Ok(spinor)
}

fn spinor_pair(kind: SpinorKind, p: &OnShellMomentum) -> Result<[Bispinor; 2]> {
    Ok([bispinor(kind, 1, p)?, bispinor(kind, 2, p)?])
}

/// Hermitian 2x2 spin density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinDensity2(pub Matrix2<C64>);

impl SpinDensity2 {
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_norm(&(self.0 - self.0.adjoint()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = self.0[(0, 1)];
        let half = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [half - rad, half + rad]
    }

    pub fn max_abs_diff(&self, other: &SpinDensity2) -> f64 {
        max_norm(&(self.0 - other.0))
    }
}

/// Spinor density matrix `X^+-` built from the four mode occupations.
pub fn x_matrix(s: &FluidState, p: &OnShellMomentum, species: Species, statistics: Statistics) -> Result<SpinorMatrix> {
    let m = s.multipliers();
    check_mass(&m, p)?;
    let a = spin_four_vector(&s.omega(), p);
    let spin_norm = a_norm(&s.omega(), p)?;
    let w0 = -species.sign() * m.xi + m.beta.dot(&p.four_momentum());
    if statistics == Statistics::Boltzmann && -(w0 - spin_norm) > EXP_LIMIT {
        return Err(Error::Overflow {
            exponent: w0 - spin_norm,
        });
    }
    let total = statistics.occupation(w0 - spin_norm) + statistics.occupation(w0 + spin_norm);
    let ratio = statistics.split_ratio(w0, spin_norm);
    let g5a = dirac_basis().gamma5 * slash(&a);
    Ok((SpinorMatrix::identity() * c(total, 0.0) + g5a * c(ratio, 0.0)) * c(0.5, 0.0))
}

fn check_mass(m: &Multipliers, p: &OnShellMomentum) -> Result<()> {
    if (p.mass() - m.mass).abs() > 1e-12 * m.mass {
        return Err(Error::MassMismatch {
            momentum: p.mass(),
            state: m.mass,
        });
    }
    Ok(())
}

/// `f+_rs = (1/2m) ubar_r X+ u_s`, `f-_rs = -(1/2m) vbar_s X- v_r`.
pub fn spin_density_from_spinors(
    s: &FluidState,
    p: &OnShellMomentum,
    species: Species,
    statistics: Statistics,
) -> Result<SpinDensity2> {
    let x = x_matrix(s, p, species, statistics)?;
    let inv = 1.0 / (2.0 * p.mass());
    let mut f = Matrix2::<C64>::zeros();
    match species {
        Species::Particle => {
            let u = spinor_pair(SpinorKind::U, p)?;
            for r in 0..2 {
                for t in 0..2 {
                    f[(r, t)] = u[r].sandwich(&x, &u[t]) * inv;
                }
            }
        }
        Species::Antiparticle => {
            let v = spinor_pair(SpinorKind::V, p)?;
            for r in 0..2 {
                for t in 0..2 {
                    f[(r, t)] = -v[t].sandwich(&x, &v[r]) * inv;
                }
            }
        }
    }
    Ok(SpinDensity2(f))
}

/// `sigma^{+ mu nu}_{sr} = (1/2m) ubar_s sigma^{mu nu} u_r` and
/// `sigma^{- mu nu}_{sr} = (1/2m) vbar_r sigma^{mu nu} v_s`, indexed
/// `[mu][nu][(s, r)]`.
pub fn sigma_matrix_elements(species: Species, p: &OnShellMomentum) -> Result<[[Matrix2<C64>; 4]; 4]> {
    let basis = dirac_basis();
    let inv = 1.0 / (2.0 * p.mass());
    let kind = match species {
        Species::Particle => SpinorKind::U,
        Species::Antiparticle => SpinorKind::V,
    };
    let w = spinor_pair(kind, p)?;
    let mut out = [[Matrix2::<C64>::zeros(); 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            for s in 0..2 {
                for r in 0..2 {
                    out[mu][nu][(s, r)] = match species {
                        Species::Particle => w[s].sandwich(&basis.sigma[mu][nu], &w[r]),
                        Species::Antiparticle => w[r].sandwich(&basis.sigma[mu][nu], &w[s]),
                    } * inv;
                }
            }
        }
    }
    Ok(out)
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(a: &SpinorMatrix) -> SpinorMatrix {
    let norm = (0..4)
        .map(|i| (0..4).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / c(2f64.powi(squarings as i32), 0.0);
    let mut result = SpinorMatrix::identity();
    let mut term = SpinorMatrix::identity();
    for k in 1..40 {
        term = term * scaled / c(k as f64, 0.0);
        result += term;
        if max_norm(&term) < 1e-18 * max_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Boltzmann `X^+-` as `exp(+-xi - beta.p) exp(gamma_5 slash(a))`.
pub fn boltzmann_x_exponential(s: &FluidState, p: &OnShellMomentum, species: Species) -> Result<SpinorMatrix> {
    let m = s.multipliers();
    check_mass(&m, p)?;
    let a = spin_four_vector(&s.omega(), p);
    let prefactor = (species.sign() * m.xi - m.beta.dot(&p.four_momentum())).exp();
    Ok(expm(&(dirac_basis().gamma5 * slash(&a))) * c(prefactor, 0.0))
}

/// One line of a trace-identity report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceCheck {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub checks: Vec<TraceCheck>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl TraceReport {
    pub fn failures(&self) -> impl Iterator<Item = &TraceCheck> {
        self.checks.iter().filter(move |c| !(c.residual <= self.tolerance))
    }
}

fn max_rel<const N: usize>(got: &[f64; N], want: &[f64; N], floor: f64) -> f64 {
    let scale = want.iter().fold(floor, |acc, x| acc.max(x.abs()));
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / scale)
        .fold(0.0, f64::max)
}

/// Trace reductions of the number current, energy-momentum tensor and spin
/// tensor integrands at one momentum, each compared against the closed-form
/// mode sums of [`crate::currents`].
pub fn verify_trace_identities(s: &FluidState, p: &OnShellMomentum, statistics: Statistics) -> Result<TraceReport> {
    const TOLERANCE: f64 = 1e-10;
    let basis = dirac_basis();
    let m = p.mass();
    let p4 = p.four_momentum();
    let pslash = slash(&p4);
    let id = SpinorMatrix::identity();
    let plus = pslash + id * c(m, 0.0);
    let minus = pslash - id * c(m, 0.0);
    let xp = x_matrix(s, p, Species::Particle, statistics)?;
    let xm = x_matrix(s, p, Species::Antiparticle, statistics)?;

    let point = MomentumPoint {
        p: p.three_momentum(),
        energy: p.energy(),
    };
    let options = CurrentOptions {
        statistics,
        ..Default::default()
    };
    let closed = node_currents(&s.multipliers(), &point, &options);
    let occupancy: f64 = closed.modes.iter().sum();
    let e = p.energy();

    let mut checks = Vec::new();

    // number current
    let tp = trace4(&(xp * plus)).re / (2.0 * m);
    let tm = trace4(&(xm * minus)).re / (2.0 * m);
    let n_trace: [f64; 4] = std::array::from_fn(|mu| p4.0[mu] * (tp + tm));
    checks.push(TraceCheck {
        name: "number_current_trace",
        residual: max_rel(&n_trace, &closed.n.0, e * occupancy),
    });
    let fp = spin_density_from_spinors(s, p, Species::Particle, statistics)?;
    let fm = spin_density_from_spinors(s, p, Species::Antiparticle, statistics)?;
    let n_def: [f64; 4] = std::array::from_fn(|mu| p4.0[mu] * (fp.trace() - fm.trace()));
    checks.push(TraceCheck {
        name: "number_current_definition",
        residual: max_rel(&n_def, &closed.n.0, e * occupancy),
    });

    // energy-momentum tensor
    let flatten = |t: &[[f64; 4]; 4]| -> [f64; 16] { std::array::from_fn(|k| t[k / 4][k % 4]) };
    let t_trace: [f64; 16] = std::array::from_fn(|k| p4.0[k / 4] * p4.0[k % 4] * (tp - tm));
    let t_closed = flatten(&closed.t);
    checks.push(TraceCheck {
        name: "energy_momentum_trace",
        residual: max_rel(&t_trace, &t_closed, e * e * occupancy),
    });
    let t_def: [f64; 16] = std::array::from_fn(|k| p4.0[k / 4] * p4.0[k % 4] * (fp.trace() + fm.trace()));
    checks.push(TraceCheck {
        name: "energy_momentum_definition",
        residual: max_rel(&t_def, &t_closed, e * e * occupancy),
    });

    // spin tensor, three routes
    let s_closed: [f64; 24] = std::array::from_fn(|k| closed.s[k / 6][k % 6]);
    let spin_floor = e * e / m * occupancy;
    let sig_p = sigma_matrix_elements(Species::Particle, p)?;
    let sig_m = sigma_matrix_elements(Species::Antiparticle, p)?;
    let mut sandwiched = [0.0; 24];
    let mut commuted = [0.0; 24];
    let mut definition = [0.0; 24];
    for (k, &(mu, nu)) in INDEX_PAIRS.iter().enumerate() {
        let sigma = &basis.sigma[mu][nu];
        let a = trace4(&(sigma * plus * xp * plus)) - trace4(&(sigma * minus * xm * minus));
        let b = trace4(&(sigma * xp * plus)) + trace4(&(sigma * xm * minus));
        let d = (sig_p[mu][nu] * fp.0).trace() + (sig_m[mu][nu] * fm.0).trace();
        for lambda in 0..4 {
            sandwiched[lambda * 6 + k] = p4.0[lambda] * a.re / (8.0 * m * m);
            commuted[lambda * 6 + k] = p4.0[lambda] * b.re / (4.0 * m);
            definition[lambda * 6 + k] = p4.0[lambda] * 0.5 * d.re;
        }
    }
    checks.push(TraceCheck {
        name: "spin_tensor_sandwich",
        residual: max_rel(&sandwiched, &s_closed, spin_floor),
    });
    checks.push(TraceCheck {
        name: "spin_tensor_commuted",
        residual: max_rel(&commuted, &s_closed, spin_floor),
    });
    checks.push(TraceCheck {
        name: "spin_tensor_definition",
        residual: max_rel(&definition, &s_closed, spin_floor),
    });

    // tr(sigma gamma5 slash(a) slash(p)) = 4 eps^{mu nu rho sigma} a_rho p_sigma
    let a = spin_four_vector(&s.omega(), p);
    let g5ap = basis.gamma5 * slash(&a) * pslash;
    let eps = epsilon_contract(&a, &p4).upper_components();
    let traced: [f64; 6] = std::array::from_fn(|k| {
        let (mu, nu) = INDEX_PAIRS[k];
        trace4(&(basis.sigma[mu][nu] * g5ap)).re
    });
    let want = eps.map(|x| 4.0 * x);
    let a_scale = a.max_abs().max(s.omega().max_abs() * e / m);
    checks.push(TraceCheck {
        name: "sigma_gamma5_trace",
        residual: max_rel(&traced, &want, 4.0 * a_scale * e),
    });

    // [X, slash(p)] = 0
    let scale = max_norm(&xp).max(max_norm(&xm)) * e;
    let commutator = max_norm(&(xp * pslash - pslash * xp)).max(max_norm(&(xm * pslash - pslash * xm)));
    checks.push(TraceCheck {
        name: "x_commutes_with_pslash",
        residual: if scale > 0.0 { commutator / scale } else { commutator },
    });

    let max_residual = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(TraceReport {
        passed: max_residual <= TOLERANCE && max_residual.is_finite(),
        checks,
        max_residual,
        tolerance: TOLERANCE,
    })
}
