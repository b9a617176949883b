//! Real dilogarithm `Li2(z)` for `z <= 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const PI2_6: f64 = PI * PI / 6.0;

/// `Li2(z) = -int_0^z ln(1-t)/t dt`, defined here for `z <= 1`.
pub fn dilog(z: f64) -> Result<f64> {
    if z.is_nan() || z > 1.0 {
        return Err(Error::Domain(format!("dilog requires z <= 1, got {z}")));
    }
    Ok(li2(z))
}

pub(crate) fn li2(z: f64) -> f64 {
    if z == 1.0 {
        PI2_6
    } else if z < -1.0 {
        // inversion
        let l = (-z).ln();
        -li2(1.0 / z) - PI2_6 - 0.5 * l * l
    } else if z < -0.5 {
        // Landen: z/(z-1) lands in [1/3, 1/2)
        let l = (-z).ln_1p();
        -series(z / (z - 1.0)) - 0.5 * l * l
    } else if z <= 0.5 {
        series(z)
    } else {
        // reflection
        PI2_6 - z.ln() * (-z).ln_1p() - series(1.0 - z)
    }
}

/// Power series, used for |z| <= 1/2.
fn series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = z;
    let mut k = 1.0;
    loop {
        let term = power / (k * k);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
        power *= z;
        k += 1.0;
    }
    sum
}

/// `-Li2(-x)` for `x >= 0`, the single-polylog form of the generating
/// function integrand.
pub(crate) fn neg_li2_neg(x: f64) -> f64 {
    -li2(-x)
}
