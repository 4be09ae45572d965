//! Gauss-Lobatto and Gauss-Legendre rules on `[0,1]` and their tensor products.
//!
//! The `n`-point Gauss-Lobatto rule contains both endpoints, has positive
//! weights summing to one, and integrates polynomials of degree `<= 2n-3`
//! exactly. The Gauss-Legendre rule (exact to degree `2n-1`) serves as the
//! high-order reference when an independent "exact" value is needed.

use crate::error::{Error, Result};
use crate::index::multi_indices;
use crate::real::{lit, usz, Real};

/// Largest supported Gauss-Lobatto point count.
pub const MAX_LOBATTO_POINTS: usize = 16;

/// A one-dimensional quadrature rule on `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule1D<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Apply the rule: `sum_i w_i f(x_i)`.
    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        let mut acc = T::zero();
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            acc += w * f(x);
        }
        acc
    }
}

/// Evaluate the Legendre polynomial `P_m` and its derivative at `x` on `[-1,1]`.
fn legendre_with_deriv<T: Real>(m: usize, x: T) -> (T, T) {
    if m == 0 {
        return (T::one(), T::zero());
    }
    let mut p_prev = T::one();
    let mut p = x;
    for j in 1..m {
        let jf = usz::<T>(j);
        let next = ((lit::<T>(2.0) * jf + T::one()) * x * p - jf * p_prev) / (jf + T::one());
        p_prev = p;
        p = next;
    }
    // (1-x^2) P'_m = m (P_{m-1} - x P_m); at the endpoints use the known value.
    let one_minus_x2 = T::one() - x * x;
    let mf = usz::<T>(m);
    let dp = if one_minus_x2.abs() > lit(1e-30) {
        mf * (p_prev - x * p) / one_minus_x2
    } else {
        let sign = if x > T::zero() { T::one() } else { lit::<T>(-1.0).powi(m as i32 + 1) };
        sign * mf * (mf + T::one()) / lit(2.0)
    };
    (p, dp)
}

/// `n`-point Gauss-Lobatto rule on `[0,1]`, `2 <= n <= 16`.
///
/// Interior points are the roots of `P'_{n-1}` found by Newton iteration and
/// symmetrized about `1/2`, so rules are bit-reproducible across platforms.
pub fn gauss_lobatto<T: Real>(n: usize) -> Result<QuadratureRule1D<T>> {
    if n < 2 {
        return Err(Error::InvalidOrder(format!(
            "Gauss-Lobatto rule needs at least 2 points, got {n}"
        )));
    }
    if n > MAX_LOBATTO_POINTS {
        return Err(Error::InvalidOrder(format!(
            "Gauss-Lobatto rule capped at {MAX_LOBATTO_POINTS} points, got {n}"
        )));
    }
    let m = n - 1; // interior points are roots of P'_m
    let mut xs = vec![T::zero(); n];
    xs[0] = lit(-1.0);
    xs[n - 1] = T::one();
    for i in 1..n - 1 {
        // Chebyshev-Gauss-Lobatto initial guess.
        let theta = usz::<T>(i) * T::pi() / usz::<T>(m);
        let mut x = -theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(m, x);
            // g = P'_m, g' = P''_m from the Legendre ODE.
            let g = dp;
            let gp = (lit::<T>(2.0) * x * dp - usz::<T>(m) * usz::<T>(m + 1) * p)
                / (T::one() - x * x);
            let dx = g / gp;
            x -= dx;
            if dx.abs() <= lit::<T>(1e-14) * (T::one() + x.abs()) {
                break;
            }
        }
        xs[i] = x;
    }
    // Weights on [-1,1]: w_i = 2 / (n (n-1) P_{n-1}(x_i)^2).
    let mut ws = vec![T::zero(); n];
    for i in 0..n {
        let (p, _) = legendre_with_deriv(m, xs[i]);
        ws[i] = lit::<T>(2.0) / (usz::<T>(n) * usz::<T>(m) * p * p);
    }
    // Map to [0,1] and symmetrize mirrored pairs exactly.
    let half = lit::<T>(0.5);
    let mut points: Vec<T> = xs.iter().map(|&x| (x + T::one()) * half).collect();
    let mut weights: Vec<T> = ws.iter().map(|&w| w * half).collect();
    points[0] = T::zero();
    points[n - 1] = T::one();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let p = (points[i] + (T::one() - points[j])) * half;
        points[i] = p;
        points[j] = T::one() - p;
        let w = (weights[i] + weights[j]) * half;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = half;
    }
    Ok(QuadratureRule1D { points, weights })
}

/// `n`-point Gauss-Legendre rule on `[0,1]`, exact to degree `2n-1`.
pub fn gauss_legendre<T: Real>(n: usize) -> Result<QuadratureRule1D<T>> {
    if n < 1 {
        return Err(Error::InvalidOrder(
            "Gauss-Legendre rule needs at least 1 point".into(),
        ));
    }
    let mut points = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..n {
        // Standard asymptotic initial guess, descending in x.
        let theta = T::pi() * (usz::<T>(i) + lit(0.75)) / (usz::<T>(n) + half::<T>());
        let mut x = theta.cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= lit::<T>(1e-14) * (T::one() + x.abs()) {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        // x descending on [-1,1] maps to ascending position from the right.
        points[n - 1 - i] = (x + T::one()) * half::<T>();
        weights[n - 1 - i] = w * half::<T>();
    }
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let p = (points[i] + (T::one() - points[j])) * half::<T>();
        points[i] = p;
        points[j] = T::one() - p;
        let w = (weights[i] + weights[j]) * half::<T>();
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        points[n / 2] = half();
    }
    Ok(QuadratureRule1D { points, weights })
}

fn half<T: Real>() -> T {
    lit(0.5)
}

/// Tensor product of a 1D rule over `[0,1]^dim`, `dim` in `1..=3`.
#[derive(Debug, Clone)]
pub struct TensorRule<T> {
    pub dim: usize,
    pub rule: QuadratureRule1D<T>,
}

impl<T: Real> TensorRule<T> {
    pub fn new(dim: usize, rule: QuadratureRule1D<T>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Dimension(format!("tensor rule dimension {dim}")));
        }
        Ok(TensorRule { dim, rule })
    }

    pub fn node_count(&self) -> usize {
        self.rule.len().pow(self.dim as u32)
    }

    /// All tensor nodes with their product weights, axis 1 fastest.
    pub fn nodes(&self) -> Vec<([T; 3], T)> {
        let n = self.rule.len();
        let counts = [n, n, n];
        multi_indices(self.dim, &counts)
            .into_iter()
            .map(|j| {
                let mut pt = [T::zero(); 3];
                let mut w = T::one();
                for a in 0..self.dim {
                    pt[a] = self.rule.points[j[a]];
                    w *= self.rule.weights[j[a]];
                }
                (pt, w)
            })
            .collect()
    }

    /// `sum_a w_a f(a)` over the tensor nodes.
    pub fn integrate(&self, mut f: impl FnMut(&[T; 3]) -> T) -> T {
        let mut acc = T::zero();
        for (pt, w) in self.nodes() {
            acc += w * f(&pt);
        }
        acc
    }
}

/// Tensor Gauss-Lobatto rule with `n` points per axis.
pub fn tensor_gauss_lobatto<T: Real>(dim: usize, n: usize) -> Result<TensorRule<T>> {
    TensorRule::new(dim, gauss_lobatto(n)?)
}

/// High-order Gauss-Legendre tensor rule used as the "exact" reference.
pub fn reference_rule<T: Real>(dim: usize, n: usize) -> Result<TensorRule<T>> {
    TensorRule::new(dim, gauss_legendre(n)?)
}
