use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::DiskPoint;
use crate::conformal::ConformalMap;
use crate::numeric::{artanh_exp_neg, expm1, C64, I};

/// Expression tree over primitives that are holomorphic on the open disk
/// and continuous on the closed disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Expr {
    Var,
    Const {
        value: C64,
    },
    /// `sum_k coeffs[k] * arg^k`.
    Poly {
        coeffs: Vec<C64>,
        arg: Box<Expr>,
    },
    /// Interpolating polynomial through `(e^{i angles[j]}, values[j])` in the
    /// variable, evaluated in barycentric form.
    Lagrange {
        angles: Vec<f64>,
        values: Vec<C64>,
    },
    /// `1 - e^{-i angle} z`; vanishes on the circle only at `e^{i angle}`.
    CircleFactor {
        angle: f64,
    },
    /// Principal power, with `0^p = 0`.
    Pow {
        exponent: f64,
        base: Box<Expr>,
    },
    Exp {
        arg: Box<Expr>,
    },
    Scale {
        factor: C64,
        arg: Box<Expr>,
    },
    Sum {
        terms: Vec<Expr>,
    },
    Product {
        factors: Vec<Expr>,
    },
    /// `(w - a z0) / (1 - a conj(z0) w)` with `z0 = e^{i z0_angle}`.
    Mobius {
        a: f64,
        z0_angle: f64,
        arg: Box<Expr>,
    },
    Conformal {
        map: Arc<ConformalMap>,
        arg: Box<Expr>,
    },
    /// `G(g_a(exp(-P)))` with `a = -tanh(shift)`, evaluated in strip
    /// coordinates; `P = 0` gives exactly 1.
    HornStage {
        exponent: Box<Expr>,
        shift: f64,
        map: Arc<ConformalMap>,
    },
}

fn principal_pow(base: C64, exponent: f64) -> C64 {
    if base == C64::new(0.0, 0.0) {
        C64::new(0.0, 0.0)
    } else {
        (base.ln() * exponent).exp()
    }
}

fn barycentric(angles: &[f64], values: &[C64], p: DiskPoint) -> C64 {
    if let Some(t) = p.angle {
        if let Some(j) = angles.iter().position(|&a| a == t) {
            return values[j];
        }
    }
    let nodes: Vec<C64> = angles.iter().map(|&a| crate::numeric::cis(a)).collect();
    if let Some(j) = nodes.iter().position(|&s| s == p.z) {
        return values[j];
    }
    let mut ell = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for (j, sj) in nodes.iter().enumerate() {
        let mut w = C64::new(1.0, 0.0);
        for (k, sk) in nodes.iter().enumerate() {
            if k != j {
                w *= sj - sk;
            }
        }
        let d = p.z - sj;
        ell *= d;
        acc += values[j] / (w * d);
    }
    ell * acc
}

impl Expr {
    pub fn var() -> Box<Expr> {
        Box::new(Expr::Var)
    }

    pub fn eval(&self, p: DiskPoint) -> C64 {
        match self {
            Expr::Var => p.z,
            Expr::Const { value } => *value,
            Expr::Poly { coeffs, arg } => {
                let w = arg.eval(p);
                coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c)
            }
            Expr::Lagrange { angles, values } => barycentric(angles, values, p),
            Expr::CircleFactor { angle } => match p.angle {
                Some(t) => -expm1(I * (t - angle)),
                None => C64::new(1.0, 0.0) - crate::numeric::cis(-angle) * p.z,
            },
            Expr::Pow { exponent, base } => principal_pow(base.eval(p), *exponent),
            Expr::Exp { arg } => arg.eval(p).exp(),
            Expr::Scale { factor, arg } => factor * arg.eval(p),
            Expr::Sum { terms } => terms.iter().map(|t| t.eval(p)).sum(),
            Expr::Product { factors } => factors.iter().map(|f| f.eval(p)).product(),
            Expr::Mobius { a, z0_angle, arg } => {
                let z0 = crate::numeric::cis(*z0_angle);
                let w = arg.eval(p);
                (w - *a * z0) / (1.0 - *a * z0.conj() * w)
            }
            Expr::Conformal { map, arg } => match (arg.as_ref(), p.angle) {
                (Expr::Var, Some(t)) => map.eval_boundary(t),
                _ => map.eval(arg.eval(p)),
            },
            Expr::HornStage { exponent, shift, map } => {
                let big_p = exponent.eval(p);
                match artanh_exp_neg(big_p) {
                    None => map.endpoint_one(),
                    Some(s) => map.eval_strip(s - *shift),
                }
            }
        }
    }

    /// Calls `f` with the base of every fractional power met while evaluating
    /// at `p`.
    pub fn visit_pow_bases(&self, p: DiskPoint, f: &mut dyn FnMut(C64)) {
        match self {
            Expr::Var | Expr::Const { .. } | Expr::Lagrange { .. } | Expr::CircleFactor { .. } => {}
            Expr::Pow { base, .. } => {
                base.visit_pow_bases(p, f);
                f(base.eval(p));
            }
            Expr::Poly { arg, .. }
            | Expr::Exp { arg }
            | Expr::Scale { arg, .. }
            | Expr::Mobius { arg, .. }
            | Expr::Conformal { arg, .. } => arg.visit_pow_bases(p, f),
            Expr::Sum { terms: list } | Expr::Product { factors: list } => {
                for e in list {
                    e.visit_pow_bases(p, f);
                }
            }
            Expr::HornStage { exponent, .. } => exponent.visit_pow_bases(p, f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn at(z: C64) -> DiskPoint {
        DiskPoint::interior(z)
    }

    #[test]
    fn square_of_i_is_minus_one() {
        let f = Expr::Poly {
            coeffs: vec![0.0.into(), 0.0.into(), 1.0.into()],
            arg: Expr::var(),
        };
        assert!((f.eval(at(I)) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn exp_of_affine_at_zero() {
        let f = Expr::Exp {
            arg: Box::new(Expr::Poly {
                coeffs: vec![(-1.0).into(), 1.0.into()],
                arg: Expr::var(),
            }),
        };
        assert!((f.eval(at(0.0.into())) - (-1f64).exp()).norm() < 1e-16);
    }

    #[test]
    fn circle_factor_vanishes_exactly_at_its_node() {
        let f = Expr::CircleFactor { angle: 0.7 };
        assert_eq!(f.eval(DiskPoint::boundary(0.7)), C64::new(0.0, 0.0));
        let g = Expr::CircleFactor { angle: PI };
        assert!((g.eval(at(0.5.into())) - 1.5).norm() < 1e-15);
    }

    #[test]
    fn pow_of_zero_is_zero() {
        let f = Expr::Pow {
            exponent: 0.5,
            base: Box::new(Expr::CircleFactor { angle: 0.0 }),
        };
        assert_eq!(f.eval(DiskPoint::boundary(0.0)), C64::new(0.0, 0.0));
        let z = f.eval(at((-1.0).into()));
        assert!((z - 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn expr_json_round_trip() {
        let f = Expr::Sum {
            terms: vec![
                Expr::Const { value: C64::new(1.0, 2.0) },
                Expr::Mobius { a: -0.5, z0_angle: 0.0, arg: Expr::var() },
            ],
        };
        let s = serde_json::to_string(&f).unwrap();
        let g: Expr = serde_json::from_str(&s).unwrap();
        let z = C64::new(0.2, -0.3);
        assert_eq!(f.eval(at(z)), g.eval(at(z)));
    }
}
