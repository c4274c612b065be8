//! Tolerance schedule: the majorant `omega`, the `psi` recursion, the stage
//! angle profiles `theta_k` and the tolerances `eps_n`.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal::CuspProfile;
use crate::error::{Error, Result};
use crate::numeric::UnitTable;
use crate::star_body::ModulusBound;

pub const MAX_DEPTH: usize = 8;
pub const DEFAULT_DEPTH: usize = 5;

/// Factor applied to the grid minimum so that discretisation cannot
/// overshoot the true minimum.
pub const PSI_DEFLATION: f64 = 0.9;

/// Nodes of the stored `psi_k` tables.
pub const PSI_TABLE: usize = 129;

/// Default points per axis of the `psi` minimisation grid.
pub const DEFAULT_PSI_GRID: usize = 257;

/// Stages whose largest angle falls below this are not resolved.
pub const MIN_THETA: f64 = 1e-4;

/// `omega(t) = t + m(t)` on `[0, diam]` for a modulus bound `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Omega {
    pub modulus: ModulusBound,
    pub diam: f64,
}

impl Omega {
    pub fn eval(&self, t: f64) -> f64 {
        t + self.modulus.eval(t)
    }

    /// `T = omega(diam)`, the end of the domain of the inverse.
    pub fn range_max(&self) -> f64 {
        self.eval(self.diam)
    }

    /// Largest `t` with `omega(t) <= s`, to `1e-12` absolute.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        let max = self.range_max();
        if !(s >= 0.0 && s <= max) {
            return Err(Error::OmegaDomain { arg: s, max });
        }
        let (mut lo, mut hi) = (0.0, self.diam);
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(if self.eval(hi) <= s { hi } else { lo })
    }
}

/// `omega = t + modulus(t)` on `[0, diam]`. With `boundary_contact` the
/// range must cover `[0, 1]`.
pub fn build_omega(modulus: ModulusBound, diam: f64, boundary_contact: bool) -> Result<Omega> {
    if !(diam > 0.0 && diam.is_finite()) {
        return Err(Error::InvalidArgument(format!("diameter {diam} must be positive")));
    }
    let omega = Omega { modulus, diam };
    if boundary_contact && omega.range_max() < 1.0 {
        return Err(Error::BoundaryScale(omega.range_max()));
    }
    Ok(omega)
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `psi_1` in closed form and tables for `psi_2, psi_3, ...`.
#[derive(Clone)]
pub struct PsiSequence {
    big_psi: ScalarFn,
    tables: Vec<UnitTable>,
}

impl fmt::Debug for PsiSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiSequence").field("len", &self.len()).finish()
    }
}

impl PsiSequence {
    pub fn len(&self) -> usize {
        1 + self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `psi_k(r)` for `k >= 1`.
    pub fn eval(&self, k: usize, r: f64) -> f64 {
        assert!(k >= 1 && k <= self.len(), "psi index {k} out of range");
        if k == 1 {
            (1.0 - r) * (self.big_psi)(0.5 * r)
        } else {
            self.tables[k - 2].eval(r)
        }
    }

    pub fn big_psi(&self, t: f64) -> f64 {
        (self.big_psi)(t)
    }

    /// `Psi(sum r_i / 2^i) - sum psi_i(r_i)`; nonnegative by construction.
    pub fn slack(&self, r: &[f64]) -> f64 {
        let mut s = 0.0;
        let mut total = 0.0;
        let mut w = 0.5;
        for (i, &ri) in r.iter().enumerate() {
            s += ri * w;
            w *= 0.5;
            total += self.eval(i + 1, ri);
        }
        self.big_psi(s) - total
    }

    pub fn truncated(&self, k: usize) -> PsiSequence {
        PsiSequence {
            big_psi: self.big_psi.clone(),
            tables: self.tables[..k.saturating_sub(1)].to_vec(),
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The recursion `psi_k(r) = (1 - r) min {Psi(sum r_i/2^i) - sum_{i<k} psi_i(r_i)}`
/// with `r_k = r`. The minimum over the tensor grid is exact on the grid:
/// only the Pareto frontier of `(sum r_i/2^i, sum psi_i(r_i))` matters since
/// `Psi` is increasing, and the frontier stays small because all partial sums
/// lie on a fixed lattice.
pub fn psi_sequence(big_psi: ScalarFn, k_max: usize, grid: usize) -> Result<PsiSequence> {
    if k_max > MAX_DEPTH {
        return Err(Error::DepthCap(k_max));
    }
    if k_max == 0 || grid < 3 {
        return Err(Error::InvalidArgument("k_max and grid must be positive".into()));
    }
    check_monotone(&*big_psi)?;
    let mut seq = PsiSequence {
        big_psi,
        tables: Vec::new(),
    };
    let axis = grid - 1;
    let table = PSI_TABLE - 1;
    let base = axis / gcd(axis, table) * table;
    for k in 2..=k_max {
        // lattice unit 1/den for all sums r_i/2^i with i <= k
        let den = base << k;
        let mut best = vec![f64::NEG_INFINITY; den + 1];
        best[0] = 0.0;
        let mut frontier: Vec<(usize, f64)> = vec![(0, 0.0)];
        for i in 1..k {
            let step = den / (axis << i);
            let vals: Vec<f64> = (0..=axis).map(|j| seq.eval(i, j as f64 / axis as f64)).collect();
            best.iter_mut().for_each(|b| *b = f64::NEG_INFINITY);
            for &(key, total) in &frontier {
                for (j, v) in vals.iter().enumerate() {
                    let slot = &mut best[key + j * step];
                    *slot = slot.max(total + v);
                }
            }
            frontier.clear();
            let mut top = f64::NEG_INFINITY;
            for (key, &b) in best.iter().enumerate() {
                if b > top {
                    frontier.push((key, b));
                    top = b;
                }
            }
        }
        let mut memo = vec![f64::NAN; den + 1];
        let unit = 1.0 / den as f64;
        let rstep = den / (table << k);
        let mut values = vec![0.0; PSI_TABLE];
        for (m, out) in values.iter_mut().enumerate().take(table).skip(1) {
            let shift = m * rstep;
            let mut low = f64::INFINITY;
            for &(key, total) in &frontier {
                let idx = key + shift;
                if memo[idx].is_nan() {
                    memo[idx] = seq.big_psi(idx as f64 * unit);
                }
                low = low.min(memo[idx] - total);
            }
            let r = m as f64 / table as f64;
            *out = PSI_DEFLATION * (1.0 - r) * low.max(0.0);
        }
        seq.tables.push(UnitTable { values });
    }
    Ok(seq)
}

fn check_monotone(big_psi: &dyn Fn(f64) -> f64) -> Result<()> {
    if big_psi(0.0) != 0.0 {
        return Err(Error::NonMonotone(0.0));
    }
    let n = 1024;
    let mut prev = 0.0;
    for i in 1..=n {
        let t = i as f64 / n as f64;
        let v = big_psi(t);
        if !(v > prev) {
            return Err(Error::NonMonotone(t));
        }
        prev = v;
    }
    Ok(())
}

/// `w_k = 2^-k` for `k < k_max` and `w_{k_max} = 2^{1 - k_max}`; the sum is 1.
pub fn weights(k_max: usize) -> Vec<f64> {
    (1..=k_max)
        .map(|k| if k < k_max { 0.5f64.powi(k as i32) } else { 0.5f64.powi(k as i32 - 1) })
        .collect()
}

/// `eps_0 = 1` and
/// `eps_{n+1} = min(eps_n, (2^n/m) omega^-1(eps_n / max(m'/m, 1)), 2^-(n+2))`.
pub fn epsilon_sequence(omega: &Omega, m_norm: f64, m_gauge: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(m_norm > 0.0) {
        return Err(Error::InvalidArgument(format!("norm bound {m_norm} must be positive")));
    }
    let c = (m_gauge / m_norm).max(1.0);
    let mut eps = vec![1.0f64];
    for n in 0..k_max {
        let e = eps[n];
        let scale = 2f64.powi(n as i32) / m_norm;
        let next = e.min(scale * omega.inverse(e / c)?).min(0.5f64.powi(n as i32 + 2));
        if !(next > 0.0) {
            return Err(Error::EpsilonUnreachable(next));
        }
        eps.push(next);
    }
    Ok(eps)
}

/// Everything the stage construction needs, at a realised depth.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub omega: Omega,
    pub m_norm: f64,
    pub m_gauge: f64,
    pub requested_k_max: usize,
    pub k_max: usize,
    pub psi: PsiSequence,
    pub weights: Vec<f64>,
    /// `eps[0..=k_max]`.
    pub eps: Vec<f64>,
    /// Stages dropped because their profile was too thin.
    pub unrealizable: Vec<usize>,
}

impl Schedule {
    /// `Psi = omega^-1 / 2`, the `psi` sequence, and the largest depth whose
    /// profiles all reach [`MIN_THETA`].
    pub fn build(omega: Omega, m_norm: f64, m_gauge: f64, k_max: usize, psi_grid: usize) -> Result<Schedule> {
        if k_max > MAX_DEPTH {
            return Err(Error::DepthCap(k_max));
        }
        let om = omega.clone();
        let big_psi: ScalarFn = Arc::new(move |t| 0.5 * om.inverse(t.min(om.range_max())).unwrap_or(f64::NAN));
        let psi = psi_sequence(big_psi, k_max, psi_grid)?;
        let mut sched = Schedule {
            omega,
            m_norm,
            m_gauge,
            requested_k_max: k_max,
            k_max,
            psi,
            weights: weights(k_max),
            eps: Vec::new(),
            unrealizable: Vec::new(),
        };
        loop {
            let thin = (1..=sched.k_max).find(|&k| sched.theta_max(k) < MIN_THETA);
            match thin {
                None => break,
                Some(k) => {
                    sched.unrealizable.extend(k..=sched.k_max);
                    sched.k_max = k - 1;
                    if sched.k_max == 0 {
                        return Err(Error::InvalidArgument("no stage profile is resolvable".into()));
                    }
                    sched.weights = weights(sched.k_max);
                }
            }
        }
        sched.unrealizable.sort_unstable();
        sched.unrealizable.dedup();
        sched.psi = sched.psi.truncated(sched.k_max);
        sched.eps = epsilon_sequence(&sched.omega, m_norm, m_gauge, sched.k_max)?;
        Ok(sched)
    }

    /// `theta_k(r) = min(theta~_k(1 - r) / (m w_k), pi/4)`; for `k < k_max`
    /// this is the usual `2^k theta~_k(1 - r) / m`.
    pub fn theta(&self, k: usize, r: f64) -> f64 {
        theta_of(&self.psi, self.m_norm, self.weights[k - 1], k, r)
    }

    fn theta_max(&self, k: usize) -> f64 {
        (0..=1024).map(|i| self.theta(k, i as f64 / 1024.0)).fold(0.0, f64::max)
    }

    pub fn theta_profile(&self, k: usize) -> Result<CuspProfile> {
        let psi = self.psi.clone();
        let (m, w) = (self.m_norm, self.weights[k - 1]);
        CuspProfile::new(move |r| theta_of(&psi, m, w, k, r), 257)
    }

    pub fn theta_profiles(&self) -> Result<Vec<CuspProfile>> {
        (1..=self.k_max).map(|k| self.theta_profile(k)).collect()
    }

    pub fn summary(&self) -> ScheduleSummary {
        let samples = 65;
        ScheduleSummary {
            requested_k_max: self.requested_k_max,
            k_max: self.k_max,
            unrealizable: self.unrealizable.clone(),
            m_norm: self.m_norm,
            m_gauge: self.m_gauge,
            omega_range: self.omega.range_max(),
            omega: (0..samples)
                .map(|i| {
                    let t = self.omega.diam * i as f64 / (samples - 1) as f64;
                    [t, self.omega.eval(t)]
                })
                .collect(),
            eps: self.eps.clone(),
            weights: self.weights.clone(),
            theta: (1..=self.k_max)
                .map(|k| UnitTable::from_fn(samples, |r| self.theta(k, r)))
                .collect(),
        }
    }
}

fn theta_of(psi: &PsiSequence, m: f64, w: f64, k: usize, r: f64) -> f64 {
    if !(r > 0.0 && r < 1.0) {
        return 0.0;
    }
    (psi.eval(k, 1.0 - r) / (m * w)).min(FRAC_PI_4)
}

/// Tables written to reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSummary {
    pub requested_k_max: usize,
    pub k_max: usize,
    pub unrealizable: Vec<usize>,
    pub m_norm: f64,
    pub m_gauge: f64,
    pub omega_range: f64,
    pub omega: Vec<[f64; 2]>,
    pub eps: Vec<f64>,
    pub weights: Vec<f64>,
    pub theta: Vec<UnitTable>,
}
