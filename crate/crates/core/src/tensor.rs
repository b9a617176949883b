//! Minkowski four-vectors and rank-2 antisymmetric tensors.
//!
//! Metric signature is (+, -, -, -) and the Levi-Civita symbol is fixed by
//! `eps^{0123} = +1` (so `eps_{0123} = -1`). All stored components are
//! contravariant unless a method name says otherwise.
//!
//! The electric/magnetic split of an antisymmetric tensor follows the
//! Faraday-tensor layout `w^{i0} = e^i`, `w^{ij} = -eps^{ijk} b^k`. With this
//! choice the spin vector in the particle rest frame is `a* = -b*/2`.

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagonal of the metric tensor `g_{mu nu}`.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Independent index pairs of an antisymmetric tensor, in storage order.
pub const INDEX_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Storage slot of the pair `(mu, nu)` with `mu < nu`.
pub fn pair_index(mu: usize, nu: usize) -> Option<usize> {
    INDEX_PAIRS.iter().position(|&(a, b)| a == mu && b == nu)
}

/// Totally antisymmetric symbol with upper indices, `eps^{0123} = +1`.
pub fn levi_civita(idx: [usize; 4]) -> f64 {
    for i in 0..4 {
        if idx[i] > 3 {
            return 0.0;
        }
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    let mut v = idx;
    // selection sort, counting transpositions
    for i in 0..4 {
        let mut min = i;
        for j in (i + 1)..4 {
            if v[j] < v[min] {
                min = j;
            }
        }
        if min != i {
            v.swap(i, min);
            sign = -sign;
        }
    }
    sign
}

/// Contravariant four-vector.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    pub fn from_parts(t: f64, spatial: [f64; 3]) -> Self {
        FourVector([t, spatial[0], spatial[1], spatial[2]])
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Covariant components `a_mu`.
    pub fn lower(&self) -> [f64; 4] {
        let mut out = self.0;
        for (o, g) in out.iter_mut().zip(METRIC) {
            *o *= g;
        }
        out
    }

    /// Builds a contravariant vector from covariant components.
    pub fn from_lower(lower: [f64; 4]) -> Self {
        let mut out = lower;
        for (o, g) in out.iter_mut().zip(METRIC) {
            *o *= g;
        }
        FourVector(out)
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        FourVector(self.0.map(|x| x * factor))
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|x| -x))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, rhs: f64) -> FourVector {
        self.scale(rhs)
    }
}

/// `a^0 b^0 - a.b`
pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> f64 {
    a.0[0] * b.0[0] - a.0[1] * b.0[1] - a.0[2] * b.0[2] - a.0[3] * b.0[3]
}

/// Electric and magnetic parts of an antisymmetric tensor.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct EBDecomposition {
    pub e: [f64; 3],
    pub b: [f64; 3],
}

/// Rank-2 antisymmetric tensor stored as its six independent contravariant
/// components `A^{01}, A^{02}, A^{03}, A^{12}, A^{13}, A^{23}`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Antisym2Tensor {
    upper: [f64; 6],
}

impl Antisym2Tensor {
    pub const ZERO: Antisym2Tensor = Antisym2Tensor { upper: [0.0; 6] };

    /// From the independent upper components in [`INDEX_PAIRS`] order.
    pub fn from_upper(upper: [f64; 6]) -> Self {
        Antisym2Tensor { upper }
    }

    pub fn upper_components(&self) -> [f64; 6] {
        self.upper
    }

    /// Independent covariant components `A_{mu nu}`, `mu < nu`.
    pub fn lower_components(&self) -> [f64; 6] {
        std::array::from_fn(|k| {
            let (mu, nu) = INDEX_PAIRS[k];
            METRIC[mu] * METRIC[nu] * self.upper[k]
        })
    }

    pub fn from_lower(lower: [f64; 6]) -> Self {
        Antisym2Tensor {
            upper: std::array::from_fn(|k| {
                let (mu, nu) = INDEX_PAIRS[k];
                METRIC[mu] * METRIC[nu] * lower[k]
            }),
        }
    }

    /// Full contravariant component `A^{mu nu}`.
    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        match mu.cmp(&nu) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[pair_index(mu, nu).expect("index < 4")],
            std::cmp::Ordering::Greater => -self.upper[pair_index(nu, mu).expect("index < 4")],
        }
    }

    pub fn to_upper_matrix(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|mu| std::array::from_fn(|nu| self.get(mu, nu)))
    }

    pub fn to_lower_matrix(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|mu| std::array::from_fn(|nu| METRIC[mu] * METRIC[nu] * self.get(mu, nu)))
    }

    /// Accepts a full contravariant matrix, rejecting a symmetric part larger
    /// than `1e-12` (relative to the largest entry, absolute below 1).
    pub fn from_upper_matrix(m: &[[f64; 4]; 4]) -> Result<Self> {
        let scale = m.iter().flatten().fold(1.0_f64, |acc, x| acc.max(x.abs()));
        for (mu, row) in m.iter().enumerate() {
            for nu in mu..4 {
                let sym = 0.5 * (row[nu] + m[nu][mu]);
                if sym.abs() > 1e-12 * scale {
                    return Err(Error::InvariantViolation(format!(
                        "tensor is not antisymmetric: symmetric part {sym:.3e} at ({mu},{nu})"
                    )));
                }
            }
        }
        Ok(Antisym2Tensor {
            upper: INDEX_PAIRS.map(|(mu, nu)| 0.5 * (m[mu][nu] - m[nu][mu])),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Antisym2Tensor {
            upper: self.upper.map(|x| x * factor),
        }
    }

    pub fn add(&self, other: &Antisym2Tensor) -> Self {
        Antisym2Tensor {
            upper: std::array::from_fn(|k| self.upper[k] + other.upper[k]),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(|&x| x == 0.0)
    }

    /// `A~^{ab} = 1/2 eps^{abcd} A_{cd}`.
    pub fn dual(&self) -> Antisym2Tensor {
        let lower = self.to_lower_matrix();
        let upper = INDEX_PAIRS.map(|(a, b)| {
            let mut acc = 0.0;
            for (c, row) in lower.iter().enumerate() {
                for (d, value) in row.iter().enumerate() {
                    let eps = levi_civita([a, b, c, d]);
                    if eps != 0.0 {
                        acc += 0.5 * eps * value;
                    }
                }
            }
            acc
        });
        Antisym2Tensor { upper }
    }

    /// `w^{i0} = e^i`, `w^{ij} = -eps^{ijk} b^k`.
    pub fn from_eb(e: [f64; 3], b: [f64; 3]) -> Self {
        eb_compose(e, b)
    }

    pub fn eb(&self) -> EBDecomposition {
        EBDecomposition {
            e: [-self.upper[0], -self.upper[1], -self.upper[2]],
            b: [-self.upper[5], self.upper[4], -self.upper[3]],
        }
    }

    /// `Lambda A Lambda^T` on contravariant indices.
    pub fn transform(&self, lambda: &LorentzTransform) -> Self {
        let m = self.to_upper_matrix();
        let l = &lambda.0;
        let upper = INDEX_PAIRS.map(|(mu, nu)| {
            let mut acc = 0.0;
            for (a, row) in m.iter().enumerate() {
                for (b, value) in row.iter().enumerate() {
                    acc += l[(mu, a)] * l[(nu, b)] * value;
                }
            }
            acc
        });
        Antisym2Tensor { upper }
    }
}

pub fn dual(a: &Antisym2Tensor) -> Antisym2Tensor {
    a.dual()
}

pub fn eb_compose(e: [f64; 3], b: [f64; 3]) -> Antisym2Tensor {
    // w^{0i} = -e^i; w^{12} = -b3, w^{13} = +b2, w^{23} = -b1
    Antisym2Tensor {
        upper: [-e[0], -e[1], -e[2], -b[2], b[1], -b[0]],
    }
}

/// Decomposes a full matrix; rejects non-antisymmetric input.
pub fn eb_decompose(m: &[[f64; 4]; 4]) -> Result<EBDecomposition> {
    Ok(Antisym2Tensor::from_upper_matrix(m)?.eb())
}

/// `Y^{mu nu} = eps^{mu nu alpha beta} a_alpha b_beta` for contravariant inputs.
pub fn epsilon_contract(a: &FourVector, b: &FourVector) -> Antisym2Tensor {
    let al = a.lower();
    let bl = b.lower();
    let upper = INDEX_PAIRS.map(|(mu, nu)| {
        let rest: Vec<usize> = (0..4).filter(|&i| i != mu && i != nu).collect();
        let (k, l) = (rest[0], rest[1]);
        levi_civita([mu, nu, k, l]) * (al[k] * bl[l] - al[l] * bl[k])
    });
    Antisym2Tensor { upper }
}

/// Three-momentum and mass of a particle on the mass shell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnShellMomentum {
    p: [f64; 3],
    mass: f64,
}

impl OnShellMomentum {
    pub fn new(mass: f64, p: [f64; 3]) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::InvalidState(format!("mass must be positive, got {mass}")));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite momentum".into()));
        }
        Ok(OnShellMomentum { p, mass })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn three_momentum(&self) -> [f64; 3] {
        self.p
    }

    pub fn energy(&self) -> f64 {
        (self.mass * self.mass + dot3(&self.p, &self.p)).sqrt()
    }

    pub fn four_momentum(&self) -> FourVector {
        FourVector::from_parts(self.energy(), self.p)
    }
}

/// Lorentz transformation acting on contravariant components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzTransform(pub Matrix4<f64>);

impl LorentzTransform {
    pub fn identity() -> Self {
        LorentzTransform(Matrix4::identity())
    }

    /// Pure boost to a frame moving with three-velocity `v` (|v| < 1).
    pub fn boost(v: [f64; 3]) -> Result<Self> {
        let v2 = dot3(&v, &v);
        if !(v2 < 1.0) {
            return Err(Error::InvalidState(format!(
                "boost speed must be < 1, got |v|^2 = {v2}"
            )));
        }
        let gamma = 1.0 / (1.0 - v2).sqrt();
        // (gamma - 1)/v^2 written without the 0/0 at rest
        let k = gamma * gamma / (gamma + 1.0);
        let mut m = Matrix4::zeros();
        m[(0, 0)] = gamma;
        for i in 0..3 {
            m[(0, i + 1)] = -gamma * v[i];
            m[(i + 1, 0)] = -gamma * v[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] = if i == j { 1.0 } else { 0.0 } + k * v[i] * v[j];
            }
        }
        Ok(LorentzTransform(m))
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        FourVector(std::array::from_fn(|mu| {
            (0..4).map(|nu| self.0[(mu, nu)] * v.0[nu]).sum()
        }))
    }

    /// `Lambda T Lambda^T` for a rank-2 contravariant tensor.
    pub fn apply_rank2(&self, t: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let l = &self.0;
        std::array::from_fn(|mu| {
            std::array::from_fn(|nu| {
                let mut acc = 0.0;
                for (a, row) in t.iter().enumerate() {
                    for (b, value) in row.iter().enumerate() {
                        acc += l[(mu, a)] * l[(nu, b)] * value;
                    }
                }
                acc
            })
        })
    }

    /// Largest entry of `Lambda^T g Lambda - g`.
    pub fn metric_defect(&self) -> f64 {
        let g = Matrix4::from_diagonal(&nalgebra::Vector4::from(METRIC));
        (self.0.transpose() * g * self.0 - g).abs().max()
    }

    pub fn inverse(&self) -> Self {
        // Lambda^{-1} = g Lambda^T g
        let g = Matrix4::from_diagonal(&nalgebra::Vector4::from(METRIC));
        LorentzTransform(g * self.0.transpose() * g)
    }
}

/// Pure boost taking `p` to `(m, 0, 0, 0)`.
pub fn boost_to_prf(p: &OnShellMomentum) -> LorentzTransform {
    let m = p.mass();
    let e = p.energy();
    let q = p.three_momentum();
    let mut l = Matrix4::zeros();
    l[(0, 0)] = e / m;
    for i in 0..3 {
        l[(0, i + 1)] = -q[i] / m;
        l[(i + 1, 0)] = -q[i] / m;
        for j in 0..3 {
            l[(i + 1, j + 1)] = if i == j { 1.0 } else { 0.0 } + q[i] * q[j] / (m * (e + m));
        }
    }
    LorentzTransform(l)
}

/// `a_mu = -(1/2m) w~_{mu nu} p^nu`, returned with the index raised.
pub fn spin_four_vector(omega: &Antisym2Tensor, p: &OnShellMomentum) -> FourVector {
    spin_four_vector_from_dual(&omega.dual(), &p.four_momentum(), p.mass())
}

/// Same as [`spin_four_vector`] with the dual precomputed.
pub(crate) fn spin_four_vector_from_dual(dual: &Antisym2Tensor, p: &FourVector, mass: f64) -> FourVector {
    let lower = dual.to_lower_matrix();
    let a_lower: [f64; 4] =
        std::array::from_fn(|mu| -(0..4).map(|nu| lower[mu][nu] * p.0[nu]).sum::<f64>() / (2.0 * mass));
    FourVector::from_lower(a_lower)
}

/// `sqrt(-a^2)`; fails when `a` comes out timelike beyond roundoff.
pub fn a_norm(omega: &Antisym2Tensor, p: &OnShellMomentum) -> Result<f64> {
    let a = spin_four_vector(omega, p);
    let minus_a2 = -a.dot(&a);
    let scale = a.0.iter().map(|x| x * x).sum::<f64>().max(1.0);
    if minus_a2 < -1e-12 * scale {
        return Err(Error::InvariantViolation(format!(
            "spin four-vector is timelike: -a^2 = {minus_a2:.3e}"
        )));
    }
    Ok(minus_a2.max(0.0).sqrt())
}

/// Magnetic part of the spin polarization tensor in the particle rest frame.
pub fn b_star(omega: &Antisym2Tensor, p: &OnShellMomentum) -> [f64; 3] {
    let EBDecomposition { e, b } = omega.eb();
    b_star_from_eb(&e, &b, &p.three_momentum(), p.energy(), p.mass())
}

pub(crate) fn b_star_from_eb(e: &[f64; 3], b: &[f64; 3], p: &[f64; 3], energy: f64, mass: f64) -> [f64; 3] {
    let pxe = cross3(p, e);
    let pb = dot3(p, b) / (energy + mass);
    std::array::from_fn(|i| (energy * b[i] - pxe[i] - pb * p[i]) / mass)
}
