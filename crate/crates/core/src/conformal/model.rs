//! Boundary models: real-coefficient function families `F = sum c_k phi_k`
//! whose members are real on a spine segment of the real axis.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use crate::numeric::C64;

/// A family of analytic functions used to map a Jordan domain onto the strip
/// `0 < Im < 1`. Points are carried as `(z, 1 - z)` so that the end of the
/// spine at 1 keeps full relative precision.
pub trait BoundaryModel: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn basis_len(&self, degree: usize) -> usize;

    /// Basis values and derivatives at `z`, with `om = 1 - z`.
    fn basis(&self, z: C64, om: C64, degree: usize, val: &mut [C64], der: &mut [C64]);

    /// Spine `[lo, 1]`; `lo` is the image of the circle point -1.
    fn spine_lo(&self) -> f64;

    /// Whether the fit carries a free imaginary offset.
    fn has_offset(&self) -> bool;

    /// Points where Newton iterates may be taken (branch cuts excluded).
    fn admissible(&self, z: C64, om: C64) -> bool;
}

#[derive(Debug)]
pub struct HornModel;

impl BoundaryModel for HornModel {
    fn name(&self) -> &'static str {
        "horn"
    }

    fn basis_len(&self, degree: usize) -> usize {
        3 + degree
    }

    /// `[-1/z, log z, -log(1 - z), z, ..., z^degree]`.
    fn basis(&self, z: C64, om: C64, degree: usize, val: &mut [C64], der: &mut [C64]) {
        let inv = z.inv();
        val[0] = -inv;
        der[0] = inv * inv;
        val[1] = z.ln();
        der[1] = inv;
        val[2] = -om.ln();
        der[2] = om.inv();
        let mut p = C64::new(1.0, 0.0);
        for k in 1..=degree {
            der[2 + k] = p * k as f64;
            p *= z;
            val[2 + k] = p;
        }
    }

    fn spine_lo(&self) -> f64 {
        0.0
    }

    fn has_offset(&self) -> bool {
        false
    }

    fn admissible(&self, z: C64, om: C64) -> bool {
        z.re > 0.0 && om.re > 0.0
    }
}

/// Calibration family for the unit disk: `[artanh z, z, ..., z^degree]`.
#[derive(Debug)]
pub struct DiskModel;

impl BoundaryModel for DiskModel {
    fn name(&self) -> &'static str {
        "disk"
    }

    fn basis_len(&self, degree: usize) -> usize {
        1 + degree
    }

    fn basis(&self, z: C64, om: C64, degree: usize, val: &mut [C64], der: &mut [C64]) {
        let op = C64::new(1.0, 0.0) + z;
        val[0] = 0.5 * (op.ln() - om.ln());
        der[0] = (op * om).inv();
        let mut p = C64::new(1.0, 0.0);
        for k in 1..=degree {
            der[k] = p * k as f64;
            p *= z;
            val[k] = p;
        }
    }

    fn spine_lo(&self) -> f64 {
        -1.0
    }

    fn has_offset(&self) -> bool {
        true
    }

    fn admissible(&self, z: C64, om: C64) -> bool {
        z.re > -1.0 && om.re > 0.0
    }
}

/// Models addressable by name, used when maps are read back from JSON.
pub struct ModelRegistry {
    models: BTreeMap<&'static str, Arc<dyn BoundaryModel>>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = ModelRegistry {
            models: BTreeMap::new(),
        };
        r.register(Arc::new(HornModel));
        r.register(Arc::new(DiskModel));
        r
    }
}

impl ModelRegistry {
    pub fn register(&mut self, model: Arc<dyn BoundaryModel>) {
        self.models.insert(model.name(), model);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn BoundaryModel>> {
        self.models.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.models.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(m: &dyn BoundaryModel, z: C64) {
        let deg = 4;
        let n = m.basis_len(deg);
        let (mut v0, mut d0) = (vec![C64::default(); n], vec![C64::default(); n]);
        let (mut v1, mut d1) = (vec![C64::default(); n], vec![C64::default(); n]);
        let h = 1e-6;
        m.basis(z, 1.0 - z, deg, &mut v0, &mut d0);
        m.basis(z + h, 1.0 - z - h, deg, &mut v1, &mut d1);
        for k in 0..n {
            let fd = (v1[k] - v0[k]) / h;
            assert!((fd - d0[k]).norm() < 1e-4 * (1.0 + d0[k].norm()), "{} basis {k}", m.name());
        }
    }

    #[test]
    fn derivatives_match_differences() {
        check_derivatives(&HornModel, C64::new(0.4, 0.05));
        check_derivatives(&DiskModel, C64::new(0.2, -0.3));
    }

    #[test]
    fn registry_knows_both_models() {
        let r = ModelRegistry::default();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["disk", "horn"]);
        assert!(r.get("zipper").is_none());
    }
}
