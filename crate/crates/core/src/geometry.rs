//! Element geometry maps `F_K: [0,1]^d -> K` with Jacobian and cofactor data.
//!
//! Control points follow the multilinear vertex ordering: counterclockwise on
//! the bottom facet, then the top facet in the same pattern. Cofactor matrices
//! come from the minor formulas; in 3D the cross-product form of the columns
//! is available as an independent route.

use crate::error::{Error, Result};
use crate::real::{lit, usz, Real};

/// Kind of geometry map attached to an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MapKind {
    #[serde(rename = "bilinear2d")]
    Bilinear2d,
    #[serde(rename = "trilinear3d")]
    Trilinear3d,
    #[serde(rename = "affine3d")]
    Affine3d,
}

impl MapKind {
    pub fn dim(self) -> usize {
        match self {
            MapKind::Bilinear2d => 2,
            MapKind::Trilinear3d | MapKind::Affine3d => 3,
        }
    }
}

/// Reference-vertex coordinates of local vertex `v` in multilinear ordering.
pub fn vertex_eps(dim: usize, v: usize) -> [usize; 3] {
    let (base, e3) = if dim == 3 { (v % 4, v / 4) } else { (v, 0) };
    let (e1, e2) = match base {
        0 => (0, 0),
        1 => (1, 0),
        2 => (1, 1),
        3 => (0, 1),
        _ => unreachable!("local vertex out of range"),
    };
    [e1, e2, e3]
}

/// Local vertex index of reference-vertex coordinates, inverse of [`vertex_eps`].
pub fn local_vertex_index(dim: usize, eps: [usize; 3]) -> usize {
    let base = match (eps[0], eps[1]) {
        (0, 0) => 0,
        (1, 0) => 1,
        (1, 1) => 2,
        (0, 1) => 3,
        _ => unreachable!(),
    };
    if dim == 3 {
        base + 4 * eps[2]
    } else {
        base
    }
}

/// Jacobian data of a geometry map at one reference point.
#[derive(Debug, Clone, Copy)]
pub struct Jacobian<T> {
    pub dim: usize,
    /// `matrix[i][a] = (d_a F)_i`, rows are physical components.
    pub matrix: [[T; 3]; 3],
    pub det: T,
    /// Cofactor matrix from the minor formulas, same layout.
    pub cof: [[T; 3]; 3],
}

impl<T: Real> Jacobian<T> {
    /// Column `a` of `J`, i.e. the tangent `d_a F`.
    pub fn col(&self, a: usize) -> [T; 3] {
        [self.matrix[0][a], self.matrix[1][a], self.matrix[2][a]]
    }

    /// Column `j` of `cof(J)`.
    pub fn cof_col(&self, j: usize) -> [T; 3] {
        [self.cof[0][j], self.cof[1][j], self.cof[2][j]]
    }

    /// `cof(J) * g` for a reference gradient `g`.
    pub fn cof_apply(&self, g: &[T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for i in 0..self.dim {
            for a in 0..self.dim {
                out[i] += self.cof[i][a] * g[a];
            }
        }
        out
    }

    /// `J * g` for a reference gradient `g`.
    pub fn apply(&self, g: &[T; 3]) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for i in 0..self.dim {
            for a in 0..self.dim {
                out[i] += self.matrix[i][a] * g[a];
            }
        }
        out
    }
}

pub fn dot3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3<T: Real>(a: &[T; 3]) -> T {
    dot3(a, a).sqrt()
}

/// Sampled shape-regularity quantities of one element.
#[derive(Debug, Clone, Copy)]
pub struct ShapeMetrics<T> {
    /// Element diameter (max distance over vertex-image pairs).
    pub h: T,
    pub det_over_hd_min: T,
    pub det_over_hd_max: T,
    pub sigma_over_h_min: T,
    pub sigma_over_h_max: T,
}

/// A bilinear (2D), trilinear (3D) or affine (3D) element map.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryMap<T> {
    pub kind: MapKind,
    ctrl: Vec<[T; 3]>,
}

impl<T: Real> GeometryMap<T> {
    pub fn bilinear2d(points: [[T; 2]; 4]) -> Self {
        let ctrl = points.iter().map(|p| [p[0], p[1], T::zero()]).collect();
        GeometryMap { kind: MapKind::Bilinear2d, ctrl }
    }

    pub fn trilinear3d(points: [[T; 3]; 8]) -> Self {
        GeometryMap { kind: MapKind::Trilinear3d, ctrl: points.to_vec() }
    }

    /// Affine 3D map stored through its 8 vertex images; the images must be
    /// consistent with a parallelepiped (e.g. `a3 = a2 + a4 - a1`).
    pub fn affine3d(points: [[T; 3]; 8]) -> Result<Self> {
        let map = GeometryMap { kind: MapKind::Affine3d, ctrl: points.to_vec() };
        if !map.is_parallelepiped_consistent() {
            return Err(Error::Generation(
                "vertex images are not a parallelepiped".into(),
            ));
        }
        Ok(map)
    }

    /// Parallelepiped from an origin and three edge vectors.
    pub fn affine3d_from_frame(origin: [T; 3], u: [T; 3], v: [T; 3], w: [T; 3]) -> Self {
        let mut pts = [[T::zero(); 3]; 8];
        for (vtx, p) in pts.iter_mut().enumerate() {
            let e = vertex_eps(3, vtx);
            for c in 0..3 {
                p[c] = origin[c]
                    + usz::<T>(e[0]) * u[c]
                    + usz::<T>(e[1]) * v[c]
                    + usz::<T>(e[2]) * w[c];
            }
        }
        GeometryMap { kind: MapKind::Affine3d, ctrl: pts.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn control_points(&self) -> &[[T; 3]] {
        &self.ctrl
    }

    /// Check the four parallelepiped identities within `1e-12` of the scale.
    pub fn is_parallelepiped_consistent(&self) -> bool {
        if self.dim() != 3 {
            return false;
        }
        let a = &self.ctrl;
        let scale = a
            .iter()
            .map(norm3)
            .fold(T::one(), |acc, v| acc.max(v));
        let tol = lit::<T>(1e-12) * scale;
        let expect = |i: usize, j: usize, c: usize| a[i][c] + a[j][c] - a[0][c];
        let ok3 = (0..3).all(|c| (a[2][c] - expect(1, 3, c)).abs() <= tol);
        let ok6 = (0..3).all(|c| (a[5][c] - expect(1, 4, c)).abs() <= tol);
        let ok8 = (0..3).all(|c| (a[7][c] - expect(3, 4, c)).abs() <= tol);
        let ok7 = (0..3).all(|c| {
            (a[6][c] - (a[1][c] + a[3][c] + a[4][c] - lit::<T>(2.0) * a[0][c])).abs() <= tol
        });
        ok3 && ok6 && ok8 && ok7
    }

    fn factor(e: usize, x: T) -> T {
        if e == 1 {
            x
        } else {
            T::one() - x
        }
    }

    /// Evaluate `F(x)` by multilinear interpolation of the control points.
    pub fn eval(&self, x: &[T; 3]) -> [T; 3] {
        let dim = self.dim();
        let mut out = [T::zero(); 3];
        for (v, p) in self.ctrl.iter().enumerate() {
            let e = vertex_eps(dim, v);
            let mut w = T::one();
            for a in 0..dim {
                w *= Self::factor(e[a], x[a]);
            }
            for c in 0..dim {
                out[c] += w * p[c];
            }
        }
        out
    }

    fn jacobian_matrix(&self, x: &[T; 3]) -> [[T; 3]; 3] {
        let dim = self.dim();
        let mut m = [[T::zero(); 3]; 3];
        for (v, p) in self.ctrl.iter().enumerate() {
            let e = vertex_eps(dim, v);
            for a in 0..dim {
                let mut dw = if e[a] == 1 { T::one() } else { -T::one() };
                for b in 0..dim {
                    if b != a {
                        dw *= Self::factor(e[b], x[b]);
                    }
                }
                for c in 0..dim {
                    m[c][a] += dw * p[c];
                }
            }
        }
        m
    }

    /// Jacobian, determinant and cofactor matrix at `x`.
    ///
    /// Fails with a degenerate-map error when `det J <= 0`.
    pub fn jacobian(&self, x: &[T; 3]) -> Result<Jacobian<T>> {
        let j = self.jacobian_unchecked(x);
        if j.det <= T::zero() {
            return Err(Error::DegenerateMap {
                det: j.det.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(j)
    }

    pub fn jacobian_unchecked(&self, x: &[T; 3]) -> Jacobian<T> {
        let dim = self.dim();
        let m = self.jacobian_matrix(x);
        let (det, cof) = if dim == 2 {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let mut cof = [[T::zero(); 3]; 3];
            cof[0][0] = m[1][1];
            cof[0][1] = -m[1][0];
            cof[1][0] = -m[0][1];
            cof[1][1] = m[0][0];
            (det, cof)
        } else {
            let mut cof = [[T::zero(); 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    // Signed 2x2 minor of the submatrix without row i, column j.
                    let r = [(i + 1) % 3, (i + 2) % 3];
                    let c = [(j + 1) % 3, (j + 2) % 3];
                    let (r0, r1) = (r[0].min(r[1]), r[0].max(r[1]));
                    let (c0, c1) = (c[0].min(c[1]), c[0].max(c[1]));
                    let minor = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
                    let sign = if (i + j) % 2 == 0 { T::one() } else { -T::one() };
                    cof[i][j] = sign * minor;
                }
            }
            let det = m[0][0] * cof[0][0] + m[1][0] * cof[1][0] + m[2][0] * cof[2][0];
            (det, cof)
        };
        Jacobian { dim, matrix: m, det, cof }
    }

    /// The three cofactor columns as cross products of Jacobian columns (3D only).
    pub fn cof_columns_crossproduct(&self, x: &[T; 3]) -> Result<[[T; 3]; 3]> {
        if self.dim() != 3 {
            return Err(Error::Dimension(
                "cross-product cofactor columns exist only in 3D".into(),
            ));
        }
        let m = self.jacobian_matrix(x);
        let col = |a: usize| [m[0][a], m[1][a], m[2][a]];
        Ok([
            cross3(&col(1), &col(2)),
            cross3(&col(2), &col(0)),
            cross3(&col(0), &col(1)),
        ])
    }

    /// Element diameter: max distance over the `2^d` vertex-image pairs.
    pub fn diameter(&self) -> T {
        let mut h = T::zero();
        for i in 0..self.ctrl.len() {
            for j in i + 1..self.ctrl.len() {
                let d = [
                    self.ctrl[i][0] - self.ctrl[j][0],
                    self.ctrl[i][1] - self.ctrl[j][1],
                    self.ctrl[i][2] - self.ctrl[j][2],
                ];
                h = h.max(norm3(&d));
            }
        }
        h
    }

    /// Sampled shape-regularity proxies over the fixed `5^d` tensor grid.
    pub fn shape_metrics(&self) -> Result<ShapeMetrics<T>> {
        let dim = self.dim();
        let h = self.diameter();
        let hd = h.powi(dim as i32);
        let mut det_min = T::max_value().unwrap();
        let mut det_max = T::min_value().unwrap();
        let mut sig_min = T::max_value().unwrap();
        let mut sig_max = T::min_value().unwrap();
        for pt in sample_grid::<T>(dim, 5) {
            let jac = self.jacobian(&pt)?;
            det_min = det_min.min(jac.det / hd);
            det_max = det_max.max(jac.det / hd);
            for sigma in singular_values(&jac) {
                sig_min = sig_min.min(sigma / h);
                sig_max = sig_max.max(sigma / h);
            }
        }
        Ok(ShapeMetrics {
            h,
            det_over_hd_min: det_min,
            det_over_hd_max: det_max,
            sigma_over_h_min: sig_min,
            sigma_over_h_max: sig_max,
        })
    }

    /// Max pointwise deviation of `J` from its value at the element center.
    pub fn jacobian_variation(&self) -> T {
        let dim = self.dim();
        let center = [lit(0.5); 3];
        let j0 = self.jacobian_unchecked(&center);
        let mut dev = T::zero();
        for pt in sample_grid::<T>(dim, 5) {
            let j = self.jacobian_unchecked(&pt);
            for i in 0..dim {
                for a in 0..dim {
                    dev = dev.max((j.matrix[i][a] - j0.matrix[i][a]).abs());
                }
            }
        }
        dev
    }
}

/// Uniform tensor grid with `n` points per axis including the endpoints.
pub fn sample_grid<T: Real>(dim: usize, n: usize) -> Vec<[T; 3]> {
    let step = T::one() / usz::<T>(n - 1);
    let coords: Vec<T> = (0..n).map(|i| usz::<T>(i) * step).collect();
    crate::index::multi_indices(dim, &[n, n, n])
        .into_iter()
        .map(|j| {
            let mut p = [T::zero(); 3];
            for a in 0..dim {
                p[a] = coords[j[a]];
            }
            p
        })
        .collect()
}

/// Singular values of `J` via the symmetric eigenvalues of `J^T J`.
fn singular_values<T: Real>(jac: &Jacobian<T>) -> Vec<T> {
    let d = jac.dim;
    let mut jtj = nalgebra::DMatrix::<T>::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut s = T::zero();
            for i in 0..d {
                s += jac.matrix[i][a] * jac.matrix[i][b];
            }
            jtj[(a, b)] = s;
        }
    }
    let (vals, _) = crate::eig::jacobi_eigen(&jtj).expect("J^T J eigen");
    vals.into_iter().map(|v| v.max(T::zero()).sqrt()).collect()
}

/// The non-affine hexahedron used as the quadrature counterexample.
pub fn counterexample_hexahedron<T: Real>() -> GeometryMap<T> {
    let q = |a: f64, b: f64, c: f64| [lit::<T>(a), lit::<T>(b), lit::<T>(c)];
    GeometryMap::trilinear3d([
        q(0.0, 0.0, 0.0),
        q(1.0, 0.0, 0.0),
        q(0.75, 0.75, 0.0),
        q(0.0, 1.0, 0.0),
        q(0.0, 0.0, 1.0),
        q(0.5, 0.0, 1.0),
        q(0.375, 0.375, 1.0),
        q(0.0, 0.5, 1.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn identity2d() -> GeometryMap<f64> {
        GeometryMap::bilinear2d([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    fn random_trilinear(rng: &mut ChaCha8Rng, amp: f64) -> GeometryMap<f64> {
        let mut pts = [[0.0; 3]; 8];
        for (v, p) in pts.iter_mut().enumerate() {
            let e = vertex_eps(3, v);
            for c in 0..3 {
                p[c] = e[c] as f64 + amp * (rng.gen::<f64>() - 0.5);
            }
        }
        GeometryMap::trilinear3d(pts)
    }

    #[test]
    fn identity_map_fixes_points() {
        let m = identity2d();
        let y = m.eval(&[0.3, 0.4, 0.0]);
        assert_relative_eq!(y[0], 0.3);
        assert_relative_eq!(y[1], 0.4);
        let j = m.jacobian(&[0.3, 0.4, 0.0]).unwrap();
        assert_relative_eq!(j.det, 1.0);
        assert_relative_eq!(j.cof[0][0], 1.0);
        assert_relative_eq!(j.cof[1][1], 1.0);
        assert_relative_eq!(j.cof[0][1], 0.0);
    }

    #[test]
    fn vertex_ordering_matches_multilinear_formula() {
        let hexa = counterexample_hexahedron::<f64>();
        let a2 = hexa.eval(&[1.0, 0.0, 0.0]);
        assert_eq!(a2, [1.0, 0.0, 0.0]);
        let a3 = hexa.eval(&[1.0, 1.0, 0.0]);
        assert_eq!(a3, [0.75, 0.75, 0.0]);
        let a7 = hexa.eval(&[1.0, 1.0, 1.0]);
        assert_eq!(a7, [0.375, 0.375, 1.0]);
    }

    #[test]
    fn anisotropic_scaling_cofactor() {
        let m = GeometryMap::bilinear2d([[0.0, 0.0], [2.0, 0.0], [2.0, 3.0], [0.0, 3.0]]);
        let j = m.jacobian(&[0.5, 0.5, 0.0]).unwrap();
        assert_relative_eq!(j.det, 6.0);
        assert_relative_eq!(j.cof[0][0], 3.0);
        assert_relative_eq!(j.cof[1][1], 2.0);
        assert_relative_eq!(j.cof[0][1], 0.0);
        assert_relative_eq!(j.cof[1][0], 0.0);
    }

    #[test]
    fn cofactor_columns_are_rotated_jacobian_columns_2d() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let m = GeometryMap::bilinear2d([
                [rng.gen(), rng.gen()],
                [1.0 + rng.gen::<f64>(), rng.gen()],
                [1.0 + rng.gen::<f64>(), 1.0 + rng.gen::<f64>()],
                [rng.gen(), 1.0 + rng.gen::<f64>()],
            ]);
            let j = m.jacobian_unchecked(&[rng.gen(), rng.gen(), 0.0]);
            let perp = |v: [f64; 3]| [-v[1], v[0], 0.0];
            let c0 = j.cof_col(0);
            let c1 = j.cof_col(1);
            let e0 = perp(j.col(1));
            let e1 = perp(j.col(0));
            for c in 0..2 {
                assert_relative_eq!(c0[c], -e0[c], epsilon = 1e-14);
                assert_relative_eq!(c1[c], e1[c], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn counterexample_cofactor_column_closed_form() {
        let hexa = counterexample_hexahedron::<f64>();
        let closed = |x: &[f64; 3]| {
            let s = (x[2] - 2.0) / 16.0;
            [s * 2.0 * (x[0] - 4.0), -s * 2.0 * x[0], s * x[0] * (x[0] - 4.0)]
        };
        let at_origin = hexa.cof_columns_crossproduct(&[0.0, 0.0, 0.0]).unwrap()[0];
        assert_relative_eq!(at_origin[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(at_origin[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(at_origin[2], 0.0, epsilon = 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let x = [rng.gen(), rng.gen(), rng.gen()];
            let want = closed(&x);
            let got = hexa.cof_columns_crossproduct(&x).unwrap()[0];
            let minors = hexa.jacobian_unchecked(&x).cof_col(0);
            for c in 0..3 {
                assert_relative_eq!(got[c], want[c], epsilon = 1e-13);
                assert_relative_eq!(minors[c], want[c], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn crossproduct_equals_minor_route_on_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let m = random_trilinear(&mut rng, 0.3);
            for pt in sample_grid::<f64>(3, 3) {
                let cross = m.cof_columns_crossproduct(&pt).unwrap();
                let jac = m.jacobian_unchecked(&pt);
                for col in 0..3 {
                    for c in 0..3 {
                        assert!((cross[col][c] - jac.cof[c][col]).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn affine_diag_cross_columns() {
        let m = GeometryMap::affine3d_from_frame(
            [0.0; 3],
            [2.0, 0.0, 0.0],
            [0.0, 3.0, 0.0],
            [0.0, 0.0, 4.0],
        );
        let cols = m.cof_columns_crossproduct(&[0.2, 0.8, 0.5]).unwrap();
        let want = [[12.0, 0.0, 0.0], [0.0, 8.0, 0.0], [0.0, 0.0, 6.0]];
        for (col, w) in cols.iter().zip(&want) {
            for c in 0..3 {
                assert_relative_eq!(col[c], w[c], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn crossproduct_route_rejected_in_2d() {
        assert!(identity2d().cof_columns_crossproduct(&[0.5, 0.5, 0.0]).is_err());
    }

    #[test]
    fn cofactor_identities_on_seeded_random_jacobians() {
        // det J * J^{-T} = cof J and J_i . C_j = det J * delta_ij, with the
        // inverse coming from LU as the independent route.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..100 {
            let dim = if trial % 2 == 0 { 2 } else { 3 };
            let map: GeometryMap<f64> = if dim == 2 {
                GeometryMap::bilinear2d([
                    [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5],
                    [1.0 + rng.gen::<f64>(), rng.gen::<f64>() - 0.5],
                    [1.0 + rng.gen::<f64>(), 1.0 + rng.gen::<f64>()],
                    [rng.gen::<f64>() - 0.5, 1.0 + rng.gen::<f64>()],
                ])
            } else {
                random_trilinear(&mut rng, 0.4)
            };
            let x = [rng.gen(), rng.gen(), if dim == 3 { rng.gen() } else { 0.0 }];
            let jac = map.jacobian_unchecked(&x);
            let mut jm = DMatrix::<f64>::zeros(dim, dim);
            for i in 0..dim {
                for a in 0..dim {
                    jm[(i, a)] = jac.matrix[i][a];
                }
            }
            let jnorm = jm.amax();
            let inv = jm.clone().try_inverse().expect("nonsingular");
            let want = inv.transpose() * jac.det;
            for i in 0..dim {
                for a in 0..dim {
                    assert!(
                        (jac.cof[i][a] - want[(i, a)]).abs() <= 1e-10 * jnorm * jnorm,
                        "cof mismatch dim={dim}"
                    );
                }
            }
            for i in 0..dim {
                for j in 0..dim {
                    let expect = if i == j { jac.det } else { 0.0 };
                    let got = dot3(&jac.col(i), &jac.cof_col(j));
                    assert!((got - expect).abs() <= 1e-10 * jnorm * jnorm);
                }
            }
        }
    }

    #[test]
    fn shape_metrics_unit_square_and_scaled_cube() {
        let m = identity2d().shape_metrics().unwrap();
        assert_relative_eq!(m.h, 2.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(m.det_over_hd_min, 0.5, max_relative = 1e-13);
        assert_relative_eq!(m.det_over_hd_max, 0.5, max_relative = 1e-13);

        let s = 2.5;
        let cube = GeometryMap::affine3d_from_frame(
            [0.0; 3],
            [s, 0.0, 0.0],
            [0.0, s, 0.0],
            [0.0, 0.0, s],
        );
        let m = cube.shape_metrics().unwrap();
        assert_relative_eq!(m.h, s * 3.0f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(m.sigma_over_h_min, 1.0 / 3.0f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(m.sigma_over_h_max, 1.0 / 3.0f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn counterexample_is_admissible() {
        // Dense-grid determinant check: the hexahedron is a valid element.
        let hexa = counterexample_hexahedron::<f64>();
        let mut det_min = f64::INFINITY;
        for pt in sample_grid::<f64>(3, 9) {
            det_min = det_min.min(hexa.jacobian_unchecked(&pt).det);
        }
        assert!(det_min > 0.0, "min det {det_min}");
        assert!(!hexa.is_parallelepiped_consistent());
    }

    #[test]
    fn affine_map_has_constant_jacobian() {
        let m = GeometryMap::affine3d_from_frame(
            [1.0, -2.0, 0.5],
            [1.0, 0.3, 0.0],
            [-0.2, 1.1, 0.1],
            [0.0, 0.4, 0.9],
        );
        assert!(m.jacobian_variation() <= 1e-13);
        assert!(counterexample_hexahedron::<f64>().jacobian_variation() > 1e-2);
    }

    #[test]
    fn degenerate_jacobian_is_an_error() {
        // Collapsed quadrilateral: third vertex pulled across the diagonal.
        let m = GeometryMap::bilinear2d([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]);
        assert!(m.jacobian(&[0.9, 0.9, 0.0]).is_err());
    }

    #[test]
    fn affine_validation_rejects_the_hexahedron() {
        let pts = {
            let h = counterexample_hexahedron::<f64>();
            let mut p = [[0.0; 3]; 8];
            p.copy_from_slice(h.control_points());
            p
        };
        assert!(GeometryMap::affine3d(pts).is_err());
    }
}
