//! Nodal tensor-product polynomial spaces on the reference element `[0,1]^d`.
//!
//! Velocity spaces use the `(k+1)`-point Gauss-Lobatto grid per axis, pressure
//! spaces the `k`-point grid, so traces on shared facets match by node index.
//! Everything is stored in barycentric form for conditioning at high order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::index::{multi_indices, pack};
use crate::quadrature::gauss_lobatto;
use crate::real::{lit, Real};

/// Fixed seed for the pseudo-random sample points of [`degree_membership`].
const MEMBERSHIP_SEED: u64 = 0x5eed_1d01;

/// 1D Lagrange basis on distinct nodes, evaluated barycentrically.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis1D<T> {
    pub nodes: Vec<T>,
    bary: Vec<T>,
}

impl<T: Real> LagrangeBasis1D<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidOrder("empty node set".into()));
        }
        let n = nodes.len();
        let mut bary = vec![T::one(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = nodes[i] - nodes[j];
                    if d == T::zero() {
                        return Err(Error::InvalidOrder("repeated interpolation node".into()));
                    }
                    bary[i] /= d;
                }
            }
        }
        Ok(LagrangeBasis1D { nodes, bary })
    }

    /// Gauss-Lobatto nodes for an `n`-point grid; a single midpoint if `n = 1`.
    pub fn gauss_lobatto_grid(n: usize) -> Result<Self> {
        if n == 1 {
            Self::new(vec![lit(0.5)])
        } else {
            Self::new(gauss_lobatto::<T>(n)?.points)
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All basis values `phi_i(t)`.
    pub fn values(&self, t: T) -> Vec<T> {
        let n = self.len();
        if n == 1 {
            return vec![T::one()];
        }
        if let Some(hit) = self.nodes.iter().position(|&x| x == t) {
            let mut v = vec![T::zero(); n];
            v[hit] = T::one();
            return v;
        }
        let mut terms = Vec::with_capacity(n);
        let mut sum = T::zero();
        for i in 0..n {
            let c = self.bary[i] / (t - self.nodes[i]);
            terms.push(c);
            sum += c;
        }
        terms.iter().map(|&c| c / sum).collect()
    }

    /// All basis derivatives `phi_i'(t)`.
    pub fn derivs(&self, t: T) -> Vec<T> {
        let n = self.len();
        if n == 1 {
            return vec![T::zero()];
        }
        if let Some(i) = self.nodes.iter().position(|&x| x == t) {
            // Row i of the differentiation matrix.
            let mut row = vec![T::zero(); n];
            let mut diag = T::zero();
            for j in 0..n {
                if j != i {
                    let d = (self.bary[j] / self.bary[i]) / (self.nodes[i] - self.nodes[j]);
                    row[j] = d;
                    diag -= d;
                }
            }
            row[i] = diag;
            return row;
        }
        let mut c = Vec::with_capacity(n);
        let mut s1 = T::zero();
        let mut s2 = T::zero();
        for i in 0..n {
            let dt = t - self.nodes[i];
            let ci = self.bary[i] / dt;
            c.push((ci, dt));
            s1 += ci;
            s2 += ci / dt;
        }
        (0..n)
            .map(|i| {
                let (ci, dt) = c[i];
                let phi = ci / s1;
                phi * (s2 / s1 - T::one() / dt)
            })
            .collect()
    }
}

/// A polynomial in `P_{k_1,..,k_d}([0,1]^d)` stored by its tensor nodal values.
#[derive(Debug, Clone)]
pub struct TensorPolynomial<T> {
    pub dim: usize,
    pub bases: Vec<LagrangeBasis1D<T>>,
    pub coeffs: Vec<T>,
}

impl<T: Real> TensorPolynomial<T> {
    pub fn from_nodal(dim: usize, bases: Vec<LagrangeBasis1D<T>>, coeffs: Vec<T>) -> Result<Self> {
        if bases.len() != dim {
            return Err(Error::Dimension("one 1D basis per axis required".into()));
        }
        let expect: usize = bases.iter().map(|b| b.len()).product();
        if coeffs.len() != expect {
            return Err(Error::SizeMismatch(format!(
                "coefficient tensor has {} entries, grid has {expect}",
                coeffs.len()
            )));
        }
        Ok(TensorPolynomial { dim, bases, coeffs })
    }

    /// Interpolate `f` on the Gauss-Lobatto grid with `degrees[a] + 1` points per axis.
    pub fn interpolate(
        dim: usize,
        degrees: &[usize],
        mut f: impl FnMut(&[T; 3]) -> T,
    ) -> Result<Self> {
        if degrees.len() != dim || !(1..=3).contains(&dim) {
            return Err(Error::Dimension(format!(
                "need {dim} per-axis degrees, got {}",
                degrees.len()
            )));
        }
        let bases: Vec<_> = degrees
            .iter()
            .map(|&m| LagrangeBasis1D::gauss_lobatto_grid(m + 1))
            .collect::<Result<_>>()?;
        let counts = Self::counts_of(dim, &bases);
        let coeffs = multi_indices(dim, &counts)
            .into_iter()
            .map(|j| {
                let mut pt = [T::zero(); 3];
                for a in 0..dim {
                    pt[a] = bases[a].nodes[j[a]];
                }
                f(&pt)
            })
            .collect();
        Self::from_nodal(dim, bases, coeffs)
    }

    fn counts_of(dim: usize, bases: &[LagrangeBasis1D<T>]) -> [usize; 3] {
        let mut counts = [1usize; 3];
        for a in 0..dim {
            counts[a] = bases[a].len();
        }
        counts
    }

    pub fn node_counts(&self) -> [usize; 3] {
        Self::counts_of(self.dim, &self.bases)
    }

    fn contract(&self, per_axis: &[Vec<T>]) -> T {
        let counts = self.node_counts();
        let mut acc = T::zero();
        for j in multi_indices(self.dim, &counts) {
            let mut prod = self.coeffs[pack(self.dim, &counts, j)];
            for a in 0..self.dim {
                prod *= per_axis[a][j[a]];
            }
            acc += prod;
        }
        acc
    }

    /// Value at an arbitrary point of `[0,1]^d`.
    pub fn eval(&self, x: &[T; 3]) -> T {
        let per_axis: Vec<Vec<T>> = (0..self.dim).map(|a| self.bases[a].values(x[a])).collect();
        self.contract(&per_axis)
    }

    /// Gradient at an arbitrary point; unused components stay zero.
    pub fn grad(&self, x: &[T; 3]) -> [T; 3] {
        let values: Vec<Vec<T>> = (0..self.dim).map(|a| self.bases[a].values(x[a])).collect();
        let mut g = [T::zero(); 3];
        for axis in 0..self.dim {
            let mut per_axis = values.clone();
            per_axis[axis] = self.bases[axis].derivs(x[axis]);
            g[axis] = self.contract(&per_axis);
        }
        g
    }
}

/// Test whether `f` lies in `P_{m_1,..,m_d}([0,1]^d)` up to `tol`.
///
/// `f` is interpolated on the `(m_a + 1)`-point tensor grid and compared at
/// 200 seeded pseudo-random points against `tol * (1 + max |f|)`.
pub fn degree_membership<T: Real>(
    dim: usize,
    mut f: impl FnMut(&[T; 3]) -> T,
    degrees: &[usize],
    tol: T,
) -> Result<bool> {
    let mut max_abs = T::zero();
    let p = TensorPolynomial::interpolate(dim, degrees, |x| {
        let v = f(x);
        max_abs = max_abs.max(v.abs());
        v
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(MEMBERSHIP_SEED);
    let mut samples = Vec::with_capacity(200);
    for _ in 0..200 {
        let mut pt = [T::zero(); 3];
        for a in pt.iter_mut().take(dim) {
            *a = lit(rng.gen::<f64>());
        }
        let v = f(&pt);
        max_abs = max_abs.max(v.abs());
        samples.push((pt, v));
    }
    let allowed = tol * (T::one() + max_abs);
    Ok(samples.iter().all(|(pt, v)| (p.eval(pt) - *v).abs() <= allowed))
}

/// Default tolerance for [`degree_membership`].
pub fn default_membership_tol<T: Real>() -> T {
    lit(1e-10)
}
