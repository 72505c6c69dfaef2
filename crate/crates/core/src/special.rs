//! Series and quadrature primitives behind the gain sums.
//!
//! The central object is the term
//!
//! ```text
//! t_n = (2 Xi)^{2n} / [ (2n)! (1 + n nu) sqrt(1 + n mu) ]
//! ```
//!
//! whose sums from `n = 0` (G0) and `n = 1` (|G1|) give the per-seed-photon
//! gains. Three special forms are provided for the limiting cases: the
//! closed form (nu = mu = 0), the 1F2 representation (mu = 0) and the
//! Gaussian ensemble integral (nu = 0).

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("series did not converge within {max_terms} terms (last ratio {last_ratio:e})")]
    NonConvergence { max_terms: usize, last_ratio: f64 },
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
    #[error("unsupported quadrature order {0} (supported: 2..={MAX_HERMITE_ORDER})")]
    UnsupportedOrder(usize),
}

/// Stopping rule for the series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Stop once `|term / partial sum|` drops below this.
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            rel_tol: 1e-14,
            max_terms: 200,
        }
    }
}

impl SeriesOptions {
    pub fn validate(&self) -> Result<(), SpecialError> {
        if !(self.rel_tol > 0.0) {
            return Err(SpecialError::InvalidArgument {
                name: "rel_tol",
                reason: "must be > 0".into(),
            });
        }
        if self.max_terms < 2 {
            return Err(SpecialError::InvalidArgument {
                name: "max_terms",
                reason: "must be >= 2".into(),
            });
        }
        Ok(())
    }
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<(), SpecialError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(SpecialError::InvalidArgument {
            name,
            reason: format!("must be finite and >= 0, got {v}"),
        })
    }
}

/// Ratio `t_{n+1} / t_n`.
#[inline]
fn term_ratio(n: usize, xi: f64, nu: f64, mu: f64) -> f64 {
    let n = n as f64;
    let two_xi_sq = 4.0 * xi * xi;
    two_xi_sq / ((2.0 * n + 1.0) * (2.0 * n + 2.0)) * ((1.0 + n * nu) / (1.0 + (n + 1.0) * nu))
        * ((1.0 + n * mu) / (1.0 + (n + 1.0) * mu)).sqrt()
}

/// The n-th gain-series term, built up by the term recurrence so that no
/// factorial or power is ever formed on its own.
pub fn series_term(n: usize, xi: f64, nu: f64, mu: f64) -> Result<f64, SpecialError> {
    check_nonnegative("xi", xi)?;
    check_nonnegative("nu", nu)?;
    check_nonnegative("mu", mu)?;
    let mut t = 1.0;
    for k in 0..n {
        t *= term_ratio(k, xi, nu, mu);
        if !t.is_finite() {
            return Err(SpecialError::InvalidArgument {
                name: "xi",
                reason: format!("term {n} overflows"),
            });
        }
    }
    Ok(t)
}

/// Sum of the gain series from `start_n` (0 or 1), per seed photon.
pub fn sum_g_series(
    xi: f64,
    nu: f64,
    mu: f64,
    start_n: usize,
    opts: &SeriesOptions,
) -> Result<f64, SpecialError> {
    check_nonnegative("xi", xi)?;
    check_nonnegative("nu", nu)?;
    check_nonnegative("mu", mu)?;
    opts.validate()?;
    if start_n > 1 {
        return Err(SpecialError::InvalidArgument {
            name: "start_n",
            reason: "must be 0 or 1".into(),
        });
    }
    if xi == 0.0 {
        return Ok(if start_n == 0 { 1.0 } else { 0.0 });
    }
    let mut term = series_term(start_n, xi, nu, mu)?;
    let mut sum = term;
    let mut n = start_n;
    let mut ratio = 1.0;
    for _ in 0..opts.max_terms {
        term *= term_ratio(n, xi, nu, mu);
        n += 1;
        sum += term;
        ratio = term / sum;
        // Terms decrease monotonically once 4 Xi^2 < (2n+1)(2n+2).
        if ratio < opts.rel_tol && 4.0 * xi * xi < ((2 * n + 1) * (2 * n + 2)) as f64 {
            return Ok(sum);
        }
    }
    Err(SpecialError::NonConvergence {
        max_terms: opts.max_terms,
        last_ratio: ratio,
    })
}

fn check_pole(name: &'static str, b: f64) -> Result<(), SpecialError> {
    if !b.is_finite() || (b <= 0.0 && b == b.round()) {
        return Err(SpecialError::InvalidArgument {
            name,
            reason: format!("{b} is a nonpositive integer or not finite"),
        });
    }
    Ok(())
}

/// Generalized hypergeometric 1F2(a; b1, b2; z) by direct summation.
pub fn hyp_1f2(a: f64, b1: f64, b2: f64, z: f64, opts: &SeriesOptions) -> Result<f64, SpecialError> {
    check_pole("b1", b1)?;
    check_pole("b2", b2)?;
    if !a.is_finite() {
        return Err(SpecialError::InvalidArgument {
            name: "a",
            reason: "not finite".into(),
        });
    }
    check_nonnegative("z", z)?;
    opts.validate()?;
    if z == 0.0 {
        return Ok(1.0);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ratio = 1.0;
    for n in 0..opts.max_terms {
        let nf = n as f64;
        term *= (a + nf) / ((b1 + nf) * (b2 + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        ratio = (term / sum).abs();
        if ratio < opts.rel_tol && (nf + 1.0) * (nf + 1.0) > z {
            return Ok(sum);
        }
    }
    Err(SpecialError::NonConvergence {
        max_terms: opts.max_terms,
        last_ratio: ratio,
    })
}

/// Largest supported Gauss-Hermite order.
pub const MAX_HERMITE_ORDER: usize = 256;

/// Default order of the ensemble-average quadrature.
pub const DEFAULT_HERMITE_ORDER: usize = 80;

/// Gauss-Hermite rule for the weight `exp(-x^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `sum_i w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Orthonormal Hermite functions' recurrence: returns (p_n(x), p_{n-1}(x)) for
/// the polynomials orthonormal under `exp(-x^2)`.
fn hermite_orthonormal(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = PI.powf(-0.25);
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * p - (kf / (kf + 1.0)).sqrt() * p_prev;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Gauss-Hermite nodes and weights of the given order.
///
/// Nodes start from the Golub-Welsch eigenvalues and are polished by Newton
/// steps on the orthonormal recurrence; weights come from the Christoffel
/// formula `w = 1 / (n p_{n-1}(x)^2)` in orthonormal form.
pub fn gauss_hermite_rule(order: usize) -> Result<QuadratureRule, SpecialError> {
    if !(2..=MAX_HERMITE_ORDER).contains(&order) {
        return Err(SpecialError::UnsupportedOrder(order));
    }
    let jacobi = DMatrix::from_fn(order, order, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    guesses.sort_by(|a, b| a.total_cmp(b));

    let nf = order as f64;
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for &guess in &guesses {
        let mut x = guess;
        for _ in 0..20 {
            let (p, p_prev) = hermite_orthonormal(order, x);
            // d/dx p_n = sqrt(2n) p_{n-1} for the orthonormal family.
            let dp = (2.0 * nf).sqrt() * p_prev;
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, p_prev) = hermite_orthonormal(order, x);
        nodes.push(x);
        weights.push(1.0 / (nf * p_prev * p_prev));
    }
    // Enforce exact symmetry about zero.
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Per-seed-photon |G1| for nu = 0 as the bandwidth ensemble average
///
/// ```text
/// (1/sqrt(pi)) int exp(-x^2) cosh[2 Xi exp(-mu x^2 / 2)] dx - 1
/// ```
///
/// The integrand equals `exp(-(1+mu) x^2) * 2 Xi^2 (sinh y / y)^2` with
/// `y = Xi exp(-mu x^2 / 2)`; the rule is applied after rescaling to that
/// leading Gaussian so the remaining factor is bounded and smooth.
pub fn g1_mu_integral(xi: f64, mu: f64, rule: &QuadratureRule) -> Result<f64, SpecialError> {
    check_nonnegative("xi", xi)?;
    check_nonnegative("mu", mu)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let scale = (1.0 + mu).sqrt();
    let sum = rule.integrate(|t| {
        let x = t / scale;
        let y = xi * (-0.5 * mu * x * x).exp();
        let sinhc = if y < 1e-8 { 1.0 + y * y / 6.0 } else { y.sinh() / y };
        2.0 * xi * xi * sinhc * sinhc
    });
    Ok(sum / (scale * PI.sqrt()))
}
