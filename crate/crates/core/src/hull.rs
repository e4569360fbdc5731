//! Min-max polynomial separation probe.
//!
//! Given a finite sample `K` of a manifold patch and a query point `q`, find
//! a polynomial `P` of bounded degree with `P(q) = 1` minimizing
//! `max_K |P|`. A ratio below one witnesses that `q` lies outside the
//! degree-bounded hull of the samples; a ratio near one is only evidence.
//!
//! The optimum is approximated with Lawson's iteratively reweighted least
//! squares: at each step solve the weighted problem
//! `min Σ wᵢ|P(zᵢ)|²` subject to `P(q) = 1`, then reweight `wᵢ ← wᵢ|P(zᵢ)|`.
//! The weighted minimum is also a lower bound for the min-max value, which
//! gives a duality gap.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::{embed, ManifoldSpec};
use crate::numerics::DiskGrid;

pub const MAX_DEGREE: usize = 10;
pub const MAX_CLOUD: usize = 100_000;
pub const MAX_ITER: usize = 20_000;
/// Stop when successive maxima agree to this relative tolerance.
pub const STEP_TOL: f64 = 1e-9;
/// Or when the duality gap closes to this relative tolerance.
pub const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingDensity {
    pub t_counts: Vec<usize>,
    pub radius: f64,
    pub radial_count: usize,
    pub angular_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCloud {
    pub points: Vec<Vec<Complex64>>,
    /// Fingerprint of the manifold the cloud was drawn from, if known.
    pub source: Option<String>,
    pub density: Option<SamplingDensity>,
}

impl SampleCloud {
    pub fn from_points(points: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::ArityMismatch {
                expected: dim,
                got: p.len(),
            });
        }
        Ok(Self {
            points,
            source: None,
            density: None,
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn t_values(t_max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|k| -t_max + 2.0 * t_max * k as f64 / (count - 1) as f64)
        .collect()
}

/// Embeds the product of a per-coordinate `t` grid on `[-T, T]` with a disk
/// grid in `w`. A count of one samples `t = 0` only.
pub fn sample_manifold(spec: &ManifoldSpec, t_counts: &[usize], grid: &DiskGrid) -> Result<SampleCloud> {
    let arity = spec.t_arity();
    if t_counts.len() != arity {
        return Err(Error::ArityMismatch {
            expected: arity,
            got: t_counts.len(),
        });
    }
    let axes: Vec<Vec<f64>> = t_counts.iter().map(|&n| t_values(spec.domain.t_max, n)).collect();
    let mut ts: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        ts = ts
            .iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut t = prefix.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    let mut points = Vec::with_capacity(ts.len() * grid.len());
    for t in &ts {
        for &w in &grid.points {
            points.push(embed(spec, t, w)?.z);
        }
    }
    Ok(SampleCloud {
        points,
        source: None,
        density: Some(SamplingDensity {
            t_counts: t_counts.to_vec(),
            radius: grid.radius,
            radial_count: grid.radial_count,
            angular_count: grid.angular_count,
        }),
    })
}

/// Exponent vectors of all monomials in `dim` variables of total degree
/// `≤ degree`, graded then lexicographic.
pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            if left == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(dim, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=degree as u32 {
        rec(dim, d, &mut Vec::new(), &mut out);
    }
    out
}

fn monomial_row(exps: &[Vec<u32>], z: &[Complex64]) -> Vec<Complex64> {
    exps.iter()
        .map(|e| {
            e.iter()
                .zip(z)
                .fold(Complex64::new(1.0, 0.0), |acc, (&k, &x)| acc * x.powu(k))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationResult {
    pub query: Vec<Complex64>,
    /// `max_K |P|` for the returned polynomial, normalized so `P(q) = 1`.
    pub ratio: f64,
    pub degree: usize,
    /// `P(z) = Σ coefficients[k] · ((z - center)/scale)^exponents[k]`.
    pub coefficients: Vec<Complex64>,
    pub exponents: Vec<Vec<u32>>,
    pub center: Vec<Complex64>,
    pub scale: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best weighted least-squares lower bound on the min-max value.
    pub dual_bound: f64,
}

impl SeparationResult {
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let local: Vec<Complex64> = z
            .iter()
            .zip(&self.center)
            .map(|(x, c)| (x - c) / self.scale)
            .collect();
        monomial_row(&self.exponents, &local)
            .iter()
            .zip(&self.coefficients)
            .map(|(m, c)| m * c)
            .sum()
    }

    /// Recomputes `max_K |P|` from the coefficients alone.
    pub fn reevaluate(&self, cloud: &SampleCloud) -> f64 {
        cloud
            .points
            .iter()
            .map(|z| self.eval(z).norm())
            .fold(0.0, f64::max)
    }

    /// True when `|P(q)| > max_K |P|` in plain re-evaluation.
    pub fn is_witness(&self, cloud: &SampleCloud) -> bool {
        self.eval(&self.query).norm() > self.reevaluate(cloud)
    }
}

/// Approximate min-max separation of `q` from `cloud` by polynomials of
/// total degree `≤ degree`.
pub fn separate(cloud: &SampleCloud, q: &[Complex64], degree: usize) -> Result<SeparationResult> {
    if degree == 0 || degree > MAX_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "degree must lie in 1..={MAX_DEGREE}, got {degree}"
        )));
    }
    if cloud.is_empty() || cloud.len() > MAX_CLOUD {
        return Err(Error::InvalidArgument(format!(
            "cloud size must lie in 1..={MAX_CLOUD}, got {}",
            cloud.len()
        )));
    }
    let dim = cloud.dim();
    if q.len() != dim {
        return Err(Error::ArityMismatch {
            expected: dim,
            got: q.len(),
        });
    }
    if q.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::InvalidArgument("query point is not finite".into()));
    }

    let n = cloud.len() as f64;
    let center: Vec<Complex64> = (0..dim)
        .map(|j| cloud.points.iter().map(|p| p[j]).sum::<Complex64>() / n)
        .collect();
    let dist = |p: &[Complex64]| -> f64 {
        p.iter()
            .zip(&center)
            .map(|(x, c)| (x - c).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let mut scale = cloud.points.iter().map(|p| dist(p)).fold(0.0, f64::max);
    if scale == 0.0 {
        scale = 1.0;
    }
    let local = |p: &[Complex64]| -> Vec<Complex64> {
        p.iter().zip(&center).map(|(x, c)| (x - c) / scale).collect()
    };

    let exps = monomial_exponents(dim, degree);
    let m = exps.len();
    let rows = cloud.len();
    let mut a = DMatrix::<Complex64>::zeros(rows, m);
    for (i, p) in cloud.points.iter().enumerate() {
        for (k, v) in monomial_row(&exps, &local(p)).into_iter().enumerate() {
            a[(i, k)] = v;
        }
    }
    let col_scale: Vec<f64> = (0..m)
        .map(|k| {
            let s = a.column(k).iter().map(|v| v.norm()).fold(0.0, f64::max);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    for (k, s) in col_scale.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let qa = DVector::from_iterator(
        m,
        monomial_row(&exps, &local(q))
            .into_iter()
            .zip(&col_scale)
            .map(|(v, s)| v / s),
    );
    let qa_conj = qa.map(|v| v.conj());

    let mut weights = vec![1.0 / n; rows];
    let mut best: Option<(f64, DVector<Complex64>)> = None;
    let mut dual_bound = 0.0f64;
    let mut prev: Option<f64> = None;
    let mut converged = false;
    let mut iterations = 0;
    let mut b = a.clone();
    for it in 0..MAX_ITER {
        iterations = it + 1;
        for (i, w) in weights.iter().enumerate() {
            let sw = w.sqrt();
            for k in 0..m {
                b[(i, k)] = a[(i, k)] * sw;
            }
        }
        let mut gram = b.adjoint() * &b;
        let trace: f64 = (0..m).map(|k| gram[(k, k)].re).sum();
        for k in 0..m {
            gram[(k, k)] += Complex64::new(1e-15 * trace, 0.0);
        }
        let chol = gram.cholesky().ok_or_else(|| {
            Error::IllConditioned(format!("weighted normal matrix not positive definite at iteration {it}"))
        })?;
        let x = chol.solve(&qa_conj);
        let den = qa.dot(&x);
        if !den.re.is_finite() || den.re <= 0.0 {
            return Err(Error::IllConditioned(format!(
                "normalization {den} at iteration {it}"
            )));
        }
        dual_bound = dual_bound.max((1.0 / den.re).sqrt());
        let coeffs = x / den;
        let resid: Vec<f64> = (&a * &coeffs).iter().map(|v| v.norm()).collect();
        let max = resid.iter().copied().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(bm, _)| max < *bm) {
            best = Some((max, coeffs));
        }
        let best_max = best.as_ref().map_or(max, |(bm, _)| *bm);
        let step_done = prev.is_some_and(|p| (p - max).abs() < STEP_TOL * max);
        if step_done || best_max - dual_bound <= GAP_TOL * best_max {
            converged = true;
            break;
        }
        prev = Some(max);
        let total: f64 = weights.iter().zip(&resid).map(|(w, r)| w * r).sum();
        if !(total > 0.0) {
            // P vanishes on the whole cloud
            converged = true;
            break;
        }
        for (w, r) in weights.iter_mut().zip(&resid) {
            *w *= r / total;
        }
    }

    let (_, scaled) = best.expect("at least one iteration");
    let coefficients: Vec<Complex64> = scaled.iter().zip(&col_scale).map(|(c, s)| c / s).collect();
    let mut result = SeparationResult {
        query: q.to_vec(),
        ratio: 0.0,
        degree,
        coefficients,
        exponents: exps,
        center,
        scale,
        iterations,
        converged,
        dual_bound,
    };
    let at_q = result.eval(q);
    for c in &mut result.coefficients {
        *c /= at_q;
    }
    result.ratio = result.reevaluate(cloud);
    Ok(result)
}

/// [`separate`] over a list of queries, in order.
pub fn hull_scan(cloud: &SampleCloud, queries: &[Vec<Complex64>], degree: usize) -> Vec<Result<SeparationResult>> {
    queries.iter().map(|q| separate(cloud, q, degree)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::BiPoly;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle(count: usize) -> SampleCloud {
        let pts = (0..count)
            .map(|k| vec![Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / count as f64)])
            .collect();
        SampleCloud::from_points(pts).unwrap()
    }

    #[test]
    fn exponents_are_graded() {
        let e = monomial_exponents(2, 2);
        assert_eq!(e.len(), 6);
        assert_eq!(e[0], vec![0, 0]);
        assert_eq!(e[1], vec![1, 0]);
        assert_eq!(e[5], vec![0, 2]);
        assert_eq!(monomial_exponents(3, 8).len(), 165);
    }

    #[test]
    fn circle_outside_point() {
        let cloud = circle(64);
        let res = separate(&cloud, &[c(2.0, 0.0)], 1).unwrap();
        assert!((res.ratio - 0.5).abs() < 1e-6, "{}", res.ratio);
        assert!((res.eval(&[c(2.0, 0.0)]) - 1.0).norm() < 1e-10);
        assert!((res.eval(&[c(1.0, 0.0)]) - 0.5).norm() < 1e-5);
        assert!(res.is_witness(&cloud));
    }

    #[test]
    fn circle_center_is_in_hull() {
        let cloud = circle(64);
        for d in 1..=6 {
            let res = separate(&cloud, &[c(0.0, 0.0)], d).unwrap();
            assert!(res.ratio >= 1.0 - 1e-6, "degree {d}: {}", res.ratio);
        }
    }

    #[test]
    fn cloud_size_and_residual() {
        let spec = ManifoldSpec::surface(1.0, BiPoly::zero(0), 0.5);
        let grid = DiskGrid::new(0.5, 8, 16).unwrap();
        let cloud = sample_manifold(&spec, &[], &grid).unwrap();
        assert_eq!(cloud.len(), 129);
        for p in &cloud.points {
            let w = p[0];
            let z2 = w * w.conj() + (w * w + w.conj() * w.conj());
            assert!((p[1] - z2).norm() <= 1e-14);
        }
    }

    #[test]
    fn far_query_is_cheap_to_separate() {
        let spec = ManifoldSpec::surface(1.0, BiPoly::zero(0), 0.4);
        let grid = DiskGrid::new(0.4, 8, 16).unwrap();
        let cloud = sample_manifold(&spec, &[], &grid).unwrap();
        let res = &hull_scan(&cloud, &[vec![c(0.0, 0.0), c(5.0, 0.0)]], 1)[0];
        let res = res.as_ref().unwrap();
        assert!(res.ratio <= 0.1, "{}", res.ratio);
    }

    #[test]
    fn hyperbolic_probe_regression() {
        let spec = ManifoldSpec::surface(1.0, BiPoly::zero(0), 0.5);
        let grid = DiskGrid::new(0.5, 8, 16).unwrap();
        let cloud = sample_manifold(&spec, &[], &grid).unwrap();
        let res = separate(&cloud, &[c(0.0, 0.0), c(0.0, 0.1)], 4).unwrap();
        assert!(res.is_witness(&cloud));
        assert!((res.ratio - 0.477805902166).abs() <= 1e-6, "{}", res.ratio);
    }

    #[test]
    fn argument_checks() {
        let cloud = circle(8);
        assert!(separate(&cloud, &[c(2.0, 0.0)], 0).is_err());
        assert!(separate(&cloud, &[c(2.0, 0.0)], 11).is_err());
        assert!(separate(&cloud, &[c(2.0, 0.0), c(0.0, 0.0)], 1).is_err());
        assert!(separate(&cloud, &[c(f64::NAN, 0.0)], 1).is_err());
    }
}
