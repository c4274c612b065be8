use nalgebra::{DMatrix, DVector};

/// Convex hull of finitely many points of R^d, queried by Euclidean distance.
///
/// In the plane the hull polygon is built explicitly; in higher dimension the
/// distance is the minimum-norm point of the translated hull (Wolfe's method).
#[derive(Clone, Debug)]
pub struct ConvexHull {
    points: Vec<Vec<f64>>,
    polygon: Option<Vec<[f64; 2]>>,
}

impl ConvexHull {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        let polygon = (points.first().map(Vec::len) == Some(2)).then(|| {
            let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
            monotone_chain(pts)
        });
        ConvexHull { points, polygon }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.polygon {
            Some(poly) => polygon_distance(poly, [x[0], x[1]]),
            None => {
                let shifted: Vec<Vec<f64>> = self
                    .points
                    .iter()
                    .map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect())
                    .collect();
                min_norm_point(&shifted)
            }
        }
    }

    /// Largest ball about the origin inside the hull. Zero when the hull is
    /// lower-dimensional, misses the origin, or lives in more than two
    /// real dimensions.
    pub fn inradius_about_origin(&self) -> f64 {
        let Some(poly) = &self.polygon else { return 0.0 };
        if poly.len() < 3 {
            return 0.0;
        }
        let mut r = f64::INFINITY;
        for i in 0..poly.len() {
            let a = poly[i];
            let b = poly[(i + 1) % poly.len()];
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            // counter-clockwise: origin is inside when left of every edge
            let cross = ex * (-a[1]) - ey * (-a[0]);
            if cross <= 0.0 {
                return 0.0;
            }
            r = r.min(cross / ex.hypot(ey));
        }
        r
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull vertices; collinear input collapses to the two
/// extreme points and coincident input to one.
fn monotone_chain(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len2 = ex * ex + ey * ey;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((x[0] - a[0]) * ex + (x[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
    };
    (x[0] - a[0] - t * ex).hypot(x[1] - a[1] - t * ey)
}

fn polygon_distance(poly: &[[f64; 2]], x: [f64; 2]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => (x[0] - poly[0][0]).hypot(x[1] - poly[0][1]),
        2 => segment_distance(poly[0], poly[1], x),
        n => {
            let mut inside = true;
            let mut d = f64::INFINITY;
            for i in 0..n {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                if cross(a, b, x) < 0.0 {
                    inside = false;
                }
                d = d.min(segment_distance(a, b, x));
            }
            if inside {
                0.0
            } else {
                d
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Norm of the point of `co(q)` closest to the origin.
fn min_norm_point(q: &[Vec<f64>]) -> f64 {
    let d = q[0].len();
    let scale = q.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;
    let start = (0..q.len())
        .min_by(|&i, &j| dot(&q[i], &q[i]).total_cmp(&dot(&q[j], &q[j])))
        .unwrap();
    let mut active = vec![start];
    let mut lambda = vec![1.0];
    let mut x = q[start].clone();
    let combine = |active: &[usize], w: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; d];
        for (&i, &wi) in active.iter().zip(w) {
            for (yk, qk) in y.iter_mut().zip(&q[i]) {
                *yk += wi * qk;
            }
        }
        y
    };
    for _ in 0..(50 * q.len() + 50) {
        let xx = dot(&x, &x);
        let (j, xq) = (0..q.len())
            .map(|j| (j, dot(&x, &q[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xx - xq <= tol || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let m = active.len();
            let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
            for r in 0..m {
                for c in 0..m {
                    a[(r, c)] = dot(&q[active[r]], &q[active[c]]);
                }
                a[(r, m)] = 1.0;
                a[(m, r)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(m + 1);
            rhs[m] = 1.0;
            let mu: Vec<f64> = match a.clone().lu().solve(&rhs) {
                Some(sol) => sol.iter().take(m).copied().collect(),
                None => {
                    let pinv = a.pseudo_inverse(1e-14).unwrap_or_else(|_| DMatrix::zeros(m + 1, m + 1));
                    (pinv * rhs).iter().take(m).copied().collect()
                }
            };
            if mu.iter().all(|&v| v > 1e-14) {
                lambda = mu;
                x = combine(&active, &lambda);
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= 1e-14 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            let keep: Vec<bool> = lambda.iter().map(|&l| l > 1e-14).collect();
            active = active.iter().zip(&keep).filter(|p| *p.1).map(|p| *p.0).collect();
            lambda = lambda.iter().zip(&keep).filter(|p| *p.1).map(|p| *p.0).collect();
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            x = combine(&active, &lambda);
            if active.len() <= 1 {
                break;
            }
        }
    }
    dot(&x, &x).sqrt()
}
