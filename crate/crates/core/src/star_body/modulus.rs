use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{random_direction, StarBody};
use crate::error::{Error, Result};
use crate::numeric::{concave_majorant, norm, Knots, C64};

/// Inflation applied to the sampled modulus before taking the majorant.
const SAMPLING_MARGIN: f64 = 1.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusSampling {
    pub pairs: usize,
    pub bins: usize,
    pub seed: u64,
}

impl Default for ModulusSampling {
    fn default() -> Self {
        ModulusSampling {
            pairs: 10_000,
            bins: 64,
            seed: 0,
        }
    }
}

/// Upper bound `t -> min(L t, m(t))` for the modulus of continuity of a gauge
/// on a ball about the body center, where `m` is the concave majorant of an
/// inflated sampled modulus. Both pieces are concave and nondecreasing, so
/// the bound is subadditive and vanishes at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusBound {
    pub lipschitz: f64,
    pub domain: f64,
    pub knots: Option<Knots>,
}

impl ModulusBound {
    pub fn lipschitz_only(lipschitz: f64, domain: f64) -> Self {
        ModulusBound {
            lipschitz,
            domain,
            knots: None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let lin = self.lipschitz * t;
        match &self.knots {
            Some(k) if t <= self.domain => lin.min(k.eval(t)),
            _ => lin,
        }
    }
}

pub fn modulus_bound(body: &StarBody, hull_radius: f64, sampling: ModulusSampling) -> Result<ModulusBound> {
    let rho = body.kernel_inradius();
    let outer = body.outradius();
    if !(rho > 0.0) || !outer.is_finite() {
        return Err(Error::ModulusUnavailable(format!(
            "kernel radius {rho}, outer radius {outer}"
        )));
    }
    if !(hull_radius.is_finite() && hull_radius > 0.0) {
        return Err(Error::InvalidArgument(format!("hull radius must be positive, got {hull_radius}")));
    }
    let lipschitz = body.lipschitz_bound();
    let domain = 2.0 * hull_radius;
    if sampling.pairs == 0 || sampling.bins < 2 {
        return Ok(ModulusBound::lipschitz_only(lipschitz, domain));
    }

    let dim = body.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let in_ball = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        let u = random_direction(rng, dim);
        let r = hull_radius * rng.gen::<f64>().powf(1.0 / (2 * dim) as f64);
        u.into_iter().map(|z| z * r).collect()
    };
    let width = domain / sampling.bins as f64;
    let mut bin_max = vec![0.0f64; sampling.bins];
    for _ in 0..sampling.pairs {
        let v = in_ball(&mut rng);
        let dir = random_direction(&mut rng, dim);
        let d = domain * rng.gen::<f64>();
        let mut w: Vec<C64> = v.iter().zip(&dir).map(|(a, b)| a + b * d).collect();
        let nw = norm(&w);
        if nw > hull_radius {
            w.iter_mut().for_each(|z| *z *= hull_radius / nw);
        }
        let dist = norm(&v.iter().zip(&w).map(|(a, b)| a - b).collect::<Vec<_>>());
        let dp = (body.gauge_relative(&v) - body.gauge_relative(&w)).abs();
        let bin = ((dist / width) as usize).min(sampling.bins - 1);
        bin_max[bin] = bin_max[bin].max(dp);
    }
    // Cumulative maximum through bin i bounds the modulus on the whole bin,
    // so it is placed at the bin's left edge.
    let mut points = Vec::with_capacity(sampling.bins + 1);
    let mut running = 0.0f64;
    for (i, m) in bin_max.iter().enumerate() {
        running = running.max(*m);
        points.push((i as f64 * width, SAMPLING_MARGIN * running));
    }
    points.push((domain, SAMPLING_MARGIN * running));
    let hull = concave_majorant(&points);
    let knots = if hull.len() >= 2 { Some(Knots::new(hull)?) } else { None };
    Ok(ModulusBound {
        lipschitz,
        domain,
        knots,
    })
}
