//! Polynomial roots: closed forms through degree four, simultaneous
//! (Aberth-Ehrlich) iteration beyond.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MonicPolynomial;

const MAX_ITERATIONS: usize = 200;
const STEP_TOL: f64 = 1e-13;
const NEWTON_STEPS: usize = 3;
/// Relative distance within which a root and the conjugate of another are
/// taken to be the same conjugate pair.
const PAIR_TOL: f64 = 1e-6;
pub const DEFAULT_REAL_TOL: f64 = 1e-9;
/// Roots closer than this, relative to `1 + |z|`, are always tried as one
/// repeated root.
const CLUSTER_TOL: f64 = 1e-3;
const CLUSTER_NEWTON_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RootMethod {
    Linear,
    Quadratic,
    Cardano,
    Ferrari,
    Iterative,
}

impl fmt::Display for RootMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootMethod::Linear => "LINEAR",
            RootMethod::Quadratic => "QUADRATIC",
            RootMethod::Cardano => "CARDANO",
            RootMethod::Ferrari => "FERRARI",
            RootMethod::Iterative => "ITERATIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub method: RootMethod,
    /// `max_i |p(r_i)|`.
    pub max_poly_residual: f64,
}

/// Roots by closed form when the degree allows it, by iteration otherwise.
pub fn find_roots(poly: &MonicPolynomial) -> Result<RootSet> {
    if poly.degree() <= 4 {
        solve_closed_form(poly)
    } else {
        solve_iterative(poly)
    }
}

/// Radical formulas for degrees 1 through 4, each root polished by up to
/// three Newton steps on the original polynomial.
pub fn solve_closed_form(poly: &MonicPolynomial) -> Result<RootSet> {
    let c = poly.coeffs();
    let (raw, method) = match *c {
        [a] => (vec![Complex64::new(-a, 0.0)], RootMethod::Linear),
        [b, c0] => (quadratic(b, c0).to_vec(), RootMethod::Quadratic),
        [a, b, c0] => (cubic(a, b, c0).to_vec(), RootMethod::Cardano),
        [a, b, c0, d] => (quartic(a, b, c0, d).to_vec(), RootMethod::Ferrari),
        _ => {
            return Err(Error::InvalidPolynomial(format!(
                "closed-form roots need degree 1 to 4, got {}",
                poly.degree()
            )))
        }
    };
    let roots = raw.into_iter().map(|z| polish(poly, z)).collect();
    Ok(finish(poly, roots, method))
}

/// Aberth-Ehrlich simultaneous iteration for any degree.
///
/// Starts from a perturbed circle of radius `1 + max|coeff|`. A root stops
/// moving once its update falls below `1e-13 (1 + |z|)` or its residual is
/// within the rounding bound of the evaluation.
pub fn solve_iterative(poly: &MonicPolynomial) -> Result<RootSet> {
    let n = poly.degree();
    let full = poly.full_coeffs();
    let radius = 1.0 + poly.max_abs_coeff();
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = TAU * k as f64 / n as f64 + 0.4 + 0.1 * perturbation(k);
            Complex64::from_polar(radius, theta)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for k in 0..n {
            let (p, dp) = poly.eval_with_derivative(z[k]);
            if p.norm() <= evaluation_error_bound(&full, z[k]) {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[k] -= step;
            if step.norm() >= STEP_TOL * (1.0 + z[k].norm()) {
                all_done = false;
            }
        }
        if all_done {
            converged = true;
            break;
        }
    }
    let roots: Vec<Complex64> = z.into_iter().map(|r| polish(poly, r)).collect();
    let set = finish(poly, roots, RootMethod::Iterative);
    if !converged {
        return Err(Error::NoConvergence {
            residual: set.max_poly_residual,
        });
    }
    Ok(set)
}

/// Real parts of the roots, provided every imaginary part is within
/// `tol (1 + |r|)`; otherwise the offending roots are returned in the error.
pub fn real_roots_only(set: &RootSet, tol: f64) -> Result<Vec<f64>> {
    let offenders: Vec<Complex64> = set
        .roots
        .iter()
        .copied()
        .filter(|z| z.im.abs() > tol * (1.0 + z.norm()))
        .collect();
    if !offenders.is_empty() {
        return Err(Error::ComplexRootsPresent { roots: offenders });
    }
    Ok(set.roots.iter().map(|z| z.re).collect())
}

/// Full coefficients `[1, c1, ..., cn]` of `prod (s - r_i)`.
pub fn expand_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        out.push(Complex64::new(0.0, 0.0));
        for i in (1..out.len()).rev() {
            let prev = out[i - 1];
            out[i] -= r * prev;
        }
    }
    out
}

/// Fixed pseudo-random offsets in `[0, 1)` (fractional golden-ratio steps).
fn perturbation(k: usize) -> f64 {
    const PHI_FRAC: f64 = 0.618_033_988_749_895;
    ((k as f64 + 1.0) * PHI_FRAC).fract()
}

/// Bound on the rounding error of Horner evaluation at `z`.
fn evaluation_error_bound(full: &[f64], z: Complex64) -> f64 {
    let r = z.norm();
    let sum = full.iter().fold(0.0, |acc, c| acc * r + c.abs());
    4.0 * full.len() as f64 * f64::EPSILON * sum
}

fn polish(poly: &MonicPolynomial, mut z: Complex64) -> Complex64 {
    let mut residual = poly.eval(z).norm();
    for _ in 0..NEWTON_STEPS {
        if residual == 0.0 {
            break;
        }
        let (p, dp) = poly.eval_with_derivative(z);
        if dp.norm() == 0.0 {
            break;
        }
        let candidate = z - p / dp;
        let r = poly.eval(candidate).norm();
        if r.is_nan() || r >= residual {
            break;
        }
        z = candidate;
        residual = r;
    }
    z
}

/// Coefficient distance between `prod (s - r_i)` and `poly`, scaled by
/// `1 + max|coeff|`.
fn backward_error(poly: &MonicPolynomial, roots: &[Complex64]) -> f64 {
    expand_roots(roots)
        .iter()
        .zip(poly.full_coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / (1.0 + poly.max_abs_coeff())
}

/// Full coefficients of the `k`-th derivative.
fn derivative(full: &[f64], k: usize) -> Vec<f64> {
    let n = full.len() - 1;
    full[..=n - k]
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let power = n - i;
            c * (power - k + 1..=power).map(|v| v as f64).product::<f64>()
        })
        .collect()
}

fn horner_with_derivative(full: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in full {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// A root of multiplicity `m` is a simple root of the `(m - 1)`-th
/// derivative, where Newton converges quadratically.
fn refine_multiple(full: &[f64], m: usize, mut z: Complex64) -> Complex64 {
    let q = derivative(full, m - 1);
    for _ in 0..CLUSTER_NEWTON_STEPS {
        let (v, dv) = horner_with_derivative(&q, z);
        let step = v / dv;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Newton on `p(z) / prod (z - r)^m` over the already fixed repeated roots.
fn deflated_newton(
    poly: &MonicPolynomial,
    fixed: &[(Complex64, usize)],
    mut z: Complex64,
) -> Complex64 {
    for _ in 0..CLUSTER_NEWTON_STEPS {
        let (p, dp) = poly.eval_with_derivative(z);
        if p.norm() == 0.0 {
            break;
        }
        let mut s = dp / p;
        for &(r, m) in fixed {
            s -= m as f64 / (z - r);
        }
        let step = s.inv();
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Try to replace each cluster by a refined repeated root, and its mirror
/// cluster by the conjugate. Every multiplicity up to the cluster size is
/// tried; leftover members are re-polished with the repeated root deflated.
/// A candidate is kept only if it lowers the backward error.
fn collapse_clusters(poly: &MonicPolynomial, roots: Vec<Complex64>) -> Vec<Complex64> {
    let n = roots.len();
    let full = poly.full_coeffs();
    // Each disc contains at least one root; overlapping discs form a cluster.
    let radius: Vec<f64> = roots
        .iter()
        .map(|&z| {
            let (p, dp) = poly.eval_with_derivative(z);
            let inclusion = n as f64 * (p.norm() + evaluation_error_bound(&full, z)) / dp.norm();
            let scale = 1.0 + z.norm();
            inclusion.max(CLUSTER_TOL * scale).min(0.1 * scale)
        })
        .collect();
    let near_axis = |i: usize| roots[i].im.abs() <= CLUSTER_TOL * (1.0 + roots[i].norm());
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            let same_side = match (near_axis(i), near_axis(j)) {
                (true, true) => true,
                (false, false) => (roots[i].im > 0.0) == (roots[j].im > 0.0),
                _ => false,
            };
            if same_side && (roots[i] - roots[j]).norm() <= radius[i].max(radius[j]) {
                let (from, to) = (label[i], label[j]);
                label
                    .iter_mut()
                    .filter(|l| **l == from)
                    .for_each(|l| *l = to);
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for l in 0..n {
        let members: Vec<usize> = (0..n).filter(|&i| label[i] == l).collect();
        if members.len() >= 2 {
            clusters.push(members);
        }
    }
    if clusters.is_empty() {
        return roots;
    }

    let centroid = |c: &[usize]| c.iter().map(|&i| roots[i]).sum::<Complex64>() / c.len() as f64;
    let nearest_first = |c: &[usize], z: Complex64| {
        let mut v = c.to_vec();
        v.sort_by(|&a, &b| (roots[a] - z).norm().total_cmp(&(roots[b] - z).norm()));
        v
    };
    let mut best_err = backward_error(poly, &roots);
    let mut best = roots.clone();
    for c in &clusters {
        let center = centroid(c);
        let real = center.im.abs() <= CLUSTER_TOL * (1.0 + center.norm())
            || c.iter().all(|&i| near_axis(i));
        let mirror = if real {
            None
        } else if center.im < 0.0 {
            continue;
        } else {
            let found = clusters
                .iter()
                .filter(|m| centroid(m).im < 0.0)
                .min_by(|a, b| {
                    (centroid(a) - center.conj())
                        .norm()
                        .total_cmp(&(centroid(b) - center.conj()).norm())
                });
            match found {
                Some(m) => Some(m),
                None => continue,
            }
        };
        for m in (2..=c.len()).rev() {
            // Start from the tightest group of m members.
            let start = c
                .iter()
                .map(|&i| {
                    let group = &nearest_first(c, roots[i])[..m];
                    let spread = (roots[group[m - 1]] - roots[i]).norm();
                    (spread, centroid(group))
                })
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, z)| z)
                .unwrap_or(center);
            let start = if real {
                Complex64::new(start.re, 0.0)
            } else {
                start
            };
            let z = refine_multiple(&full, m, start);
            let mut candidate = best.clone();
            let mut fixed = vec![(z, m)];
            let mut leftovers = Vec::new();
            let upper = nearest_first(c, z);
            upper[..m].iter().for_each(|&i| candidate[i] = z);
            leftovers.extend_from_slice(&upper[m..]);
            if let Some(mc) = mirror {
                if mc.len() < m {
                    continue;
                }
                let lower = nearest_first(mc, z.conj());
                lower[..m].iter().for_each(|&i| candidate[i] = z.conj());
                leftovers.extend_from_slice(&lower[m..]);
                fixed.push((z.conj(), m));
            }
            for i in leftovers {
                candidate[i] = deflated_newton(poly, &fixed, candidate[i]);
            }
            let err = backward_error(poly, &candidate);
            if err < best_err {
                best_err = err;
                best = candidate;
            }
        }
    }
    best
}

/// Merge repeated-root clusters, enforce exact conjugate pairs, and sort.
fn finish(poly: &MonicPolynomial, roots: Vec<Complex64>, method: RootMethod) -> RootSet {
    let mut roots = collapse_clusters(poly, roots);
    let mut order: Vec<usize> = (0..roots.len()).collect();
    order.sort_by(|&i, &j| roots[j].im.total_cmp(&roots[i].im));
    let mut used = vec![false; roots.len()];
    for &i in &order {
        if used[i] || roots[i].im <= 0.0 {
            continue;
        }
        let target = roots[i].conj();
        let partner = (0..roots.len())
            .filter(|&j| j != i && !used[j] && roots[j].im <= 0.0)
            .min_by(|&a, &b| {
                (roots[a] - target)
                    .norm()
                    .total_cmp(&(roots[b] - target).norm())
            });
        if let Some(j) = partner {
            if (roots[j] - target).norm() <= PAIR_TOL * (1.0 + roots[i].norm()) {
                let avg = (roots[i] + roots[j].conj()) / 2.0;
                roots[i] = avg;
                roots[j] = avg.conj();
                used[i] = true;
                used[j] = true;
            }
        }
    }
    for (z, u) in roots.iter_mut().zip(&used) {
        if !u && z.im.abs() <= PAIR_TOL * (1.0 + z.norm()) {
            z.im = 0.0;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let max_poly_residual = roots
        .iter()
        .map(|z| poly.eval(*z).norm())
        .fold(0.0, f64::max);
    RootSet {
        roots,
        method,
        max_poly_residual,
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `x^2 + b x + c`.
fn quadratic(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -(b + sign(b) * disc.sqrt()) / 2.0;
        let other = if q == 0.0 { 0.0 } else { c / q };
        [Complex64::new(q, 0.0), Complex64::new(other, 0.0)]
    } else {
        let re = -b / 2.0;
        let im = (-disc).sqrt() / 2.0;
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

/// `x^2 + b x + c` with complex coefficients.
fn complex_quadratic(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let root = (b * b - c * 4.0).sqrt();
    // Choose the sign that avoids cancellation in b + root.
    let root = if (b.conj() * root).re < 0.0 {
        -root
    } else {
        root
    };
    let q = -(b + root) / 2.0;
    if q.norm() == 0.0 {
        [q, q]
    } else {
        [q, c / q]
    }
}

/// `x^3 + a x^2 + b x + c` by Cardano's formula, using the trigonometric
/// form when all three roots are real.
fn cubic(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc < 0.0 {
        // p < 0 here.
        let r = (-p / 3.0).sqrt();
        let phi = (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0).acos();
        let t = |k: f64| Complex64::new(2.0 * r * ((phi - TAU * k) / 3.0).cos() - shift, 0.0);
        [t(0.0), t(1.0), t(2.0)]
    } else {
        let u = -sign(q) * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let v = if u == 0.0 { 0.0 } else { -p / (3.0 * u) };
        let re = -(u + v) / 2.0 - shift;
        let im = (3f64.sqrt() / 2.0) * (u - v);
        [
            Complex64::new(u + v - shift, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    }
}

/// `x^4 + a x^3 + b x^2 + c x + d` by Ferrari's method.
fn quartic(a: f64, b: f64, c: f64, d: f64) -> [Complex64; 4] {
    let shift = a / 4.0;
    let a2 = a * a;
    let p = b - 3.0 * a2 / 8.0;
    let q = c - a * b / 2.0 + a2 * a / 8.0;
    let r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    let scale = 1.0 + a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    let unshift = |y: Complex64| y - shift;

    if q.abs() <= 1e-14 * scale {
        // Biquadratic: y^2 = z with z^2 + p z + r = 0.
        let [z1, z2] = quadratic(p, r);
        let (y1, y2) = (z1.sqrt(), z2.sqrt());
        return [y1, -y1, y2, -y2].map(unshift);
    }

    // Resolvent cubic 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0 in monic form.
    let resolvent = MonicPolynomial::new(vec![p, p * p / 4.0 - r, -q * q / 8.0])
        .expect("finite resolvent coefficients");
    let m = cubic(p, p * p / 4.0 - r, -q * q / 8.0)
        .into_iter()
        .map(|z| polish(&resolvent, z))
        .filter(|z| z.im == 0.0)
        .map(|z| z.re)
        .max_by(|x, y| x.abs().total_cmp(&y.abs()))
        .unwrap_or(0.0);
    let m = Complex64::new(m, 0.0);
    let s = (m * 2.0).sqrt();
    let half_p = Complex64::new(p / 2.0, 0.0);
    let skew = Complex64::new(q, 0.0) / (s * 2.0);
    let [y1, y2] = complex_quadratic(-s, half_p + m + skew);
    let [y3, y4] = complex_quadratic(s, half_p + m - skew);
    [y1, y2, y3, y4].map(unshift)
}
