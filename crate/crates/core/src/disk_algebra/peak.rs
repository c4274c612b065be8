use super::{Expr, HoloFunction, NodeSet};
use crate::error::{Error, Result};
use crate::numeric::{cis, C64};

/// `P(z) = prod_j (1 - conj(s_j) z)^{1/m}`. Each base has nonnegative real
/// part on the closed disk, so `Re P > 0` off `S` and `P = 0` exactly on `S`.
pub fn peak_exponent(s: &NodeSet) -> Expr {
    let m = s.len();
    if m == 1 {
        return Expr::CircleFactor { angle: s.angles()[0] };
    }
    Expr::Product {
        factors: s
            .angles()
            .iter()
            .map(|&a| Expr::Pow {
                exponent: 1.0 / m as f64,
                base: Box::new(Expr::CircleFactor { angle: a }),
            })
            .collect(),
    }
}

/// `chi = exp(-P)`: equal to 1 on `S` and of modulus below 1 elsewhere on
/// the closed disk.
pub fn peak_function(s: &NodeSet) -> HoloFunction {
    HoloFunction {
        expr: Expr::Exp {
            arg: Box::new(Expr::Scale {
                factor: C64::new(-1.0, 0.0),
                arg: Box::new(peak_exponent(s)),
            }),
        },
        sup_bound: Some(1.0),
        node_values: s.angles().iter().map(|&a| (a, C64::new(1.0, 0.0))).collect(),
    }
}

/// Disk automorphism `g_a(z) = (z - a z0) / (1 - a conj(z0) z)` fixing `z0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: f64,
    pub z0_angle: f64,
}

pub fn mobius(a: f64, z0_angle: f64) -> Result<Mobius> {
    if !(a.abs() < 1.0) || !z0_angle.is_finite() {
        return Err(Error::InvalidArgument(format!("Mobius parameter |a| must be below 1, got {a}")));
    }
    Ok(Mobius { a, z0_angle })
}

impl Mobius {
    pub fn apply(&self, z: C64) -> C64 {
        let z0 = cis(self.z0_angle);
        (z - self.a * z0) / (1.0 - self.a * z0.conj() * z)
    }

    pub fn inverse(&self, z: C64) -> C64 {
        Mobius { a: -self.a, ..*self }.apply(z)
    }

    pub fn to_expr(&self, arg: Expr) -> Expr {
        Expr::Mobius {
            a: self.a,
            z0_angle: self.z0_angle,
            arg: Box::new(arg),
        }
    }
}
