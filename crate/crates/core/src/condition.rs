//! Checks of the quadrature exactness condition for the mixed-form integrands.
//!
//! For the `(k+1)`-point Gauss-Lobatto rule to reproduce the element integrals
//! exactly, the volume integrand `vhat . cof(J) grad qhat` must lie in
//! `Q_{2k-1}` of the reference element and the facet integrands in `Q_{2k-1}`
//! of each facet. This holds for all bilinear maps in 2D and exactly for the
//! affine maps in 3D; the explicit hexahedron here shows the failure and the
//! resulting quadrature gap.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::GeometryMap;
use crate::index::multi_indices;
use crate::mesh::Mesh;
use crate::poly::{degree_membership, LagrangeBasis1D};
use crate::quadrature::{reference_rule, tensor_gauss_lobatto};
use crate::real::{lit, Real};

/// Full basis-pair sweeps are done up to this many pairs, sampling beyond.
const FULL_SWEEP_CAP: usize = 6000;

/// Seed of the fixed pseudo-random comparison points, shared with
/// [`degree_membership`].
const MEMBERSHIP_SEED: u64 = 0x5eed_1d01;

#[derive(Debug, Clone, Copy)]
pub struct ConditionOptions {
    /// Random basis pairs tested when the full sweep is too large.
    pub samples: usize,
    pub seed: u64,
    /// Relative tolerance of the degree-membership test.
    pub membership_tol: f64,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions { samples: 200, seed: 0, membership_tol: 1e-10 }
    }
}

/// The basis pair on which a membership violation was detected.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Witness {
    pub component: usize,
    pub velocity_node: [usize; 3],
    pub pressure_node: [usize; 3],
}

/// Verdict for one element map and degree `k`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub element: usize,
    pub k: usize,
    pub volume_membership: bool,
    /// One entry per facet `2*axis + side`.
    pub facet_membership: Vec<bool>,
    /// Largest `|I_high_order - I_gauss_lobatto|` over the tested pairs.
    pub max_quadrature_gap: f64,
    /// Scale of the integrals behind the gap.
    pub gap_scale: f64,
    pub witness: Option<Witness>,
}

impl ConditionReport {
    pub fn holds(&self) -> bool {
        self.volume_membership && self.facet_membership.iter().all(|&b| b)
    }
}

/// Geometry and basis tables at a fixed list of evaluation points.
struct PointData<T> {
    cof: Vec<[[T; 3]; 3]>,
    /// `vel_vals[p][axis][i]`.
    vel_vals: Vec<Vec<Vec<T>>>,
    pr_vals: Vec<Vec<Vec<T>>>,
    pr_ders: Vec<Vec<Vec<T>>>,
}

impl<T: Real> PointData<T> {
    fn tabulate(
        map: &GeometryMap<T>,
        vel_basis: &LagrangeBasis1D<T>,
        pr_basis: &LagrangeBasis1D<T>,
        pts: &[[T; 3]],
    ) -> Self {
        let dim = map.dim();
        let mut cof = Vec::with_capacity(pts.len());
        let mut vel_vals = Vec::with_capacity(pts.len());
        let mut pr_vals = Vec::with_capacity(pts.len());
        let mut pr_ders = Vec::with_capacity(pts.len());
        for x in pts {
            cof.push(map.jacobian_unchecked(x).cof);
            vel_vals.push((0..dim).map(|a| vel_basis.values(x[a])).collect());
            pr_vals.push((0..dim).map(|a| pr_basis.values(x[a])).collect());
            pr_ders.push((0..dim).map(|a| pr_basis.derivs(x[a])).collect());
        }
        PointData { cof, vel_vals, pr_vals, pr_ders }
    }

    /// Volume integrand of one basis pair at point `p`.
    fn integrand(&self, dim: usize, p: usize, comp: usize, jv: [usize; 3], jp: [usize; 3]) -> T {
        let mut phi = T::one();
        for a in 0..dim {
            phi *= self.vel_vals[p][a][jv[a]];
        }
        let mut out = T::zero();
        for axis in 0..dim {
            let mut dq = T::one();
            for a in 0..dim {
                dq *= if a == axis {
                    self.pr_ders[p][a][jp[a]]
                } else {
                    self.pr_vals[p][a][jp[a]]
                };
            }
            out += self.cof[p][comp][axis] * dq;
        }
        phi * out
    }

    /// Facet integrand `vhat . cof(J) nhat qhat` at point `p`.
    fn facet_integrand(
        &self,
        dim: usize,
        p: usize,
        comp: usize,
        jv: [usize; 3],
        jp: [usize; 3],
        axis: usize,
        side: usize,
    ) -> T {
        let mut phi = T::one();
        let mut q = T::one();
        for a in 0..dim {
            phi *= self.vel_vals[p][a][jv[a]];
            q *= self.pr_vals[p][a][jp[a]];
        }
        let sign = if side == 1 { T::one() } else { -T::one() };
        phi * sign * self.cof[p][comp][axis] * q
    }
}

/// Interpolation grid plus fixed comparison points for membership sweeps:
/// a function lies in the degree class iff its grid interpolant reproduces it
/// at the comparison points.
struct MembershipGrid<T> {
    grid_pts: Vec<[T; 3]>,
    test_pts: Vec<[T; 3]>,
    /// Maps grid values to interpolant values at the test points.
    eval: DMatrix<T>,
}

impl<T: Real> MembershipGrid<T> {
    fn new(dim: usize, degrees: &[usize]) -> Result<Self> {
        let bases: Vec<LagrangeBasis1D<T>> = degrees
            .iter()
            .map(|&m| LagrangeBasis1D::gauss_lobatto_grid(m + 1))
            .collect::<Result<_>>()?;
        let counts = {
            let mut c = [1usize; 3];
            for a in 0..dim {
                c[a] = bases[a].len();
            }
            c
        };
        let grid_idx = multi_indices(dim, &counts);
        let grid_pts: Vec<[T; 3]> = grid_idx
            .iter()
            .map(|j| {
                let mut p = [T::zero(); 3];
                for a in 0..dim {
                    p[a] = bases[a].nodes[j[a]];
                }
                p
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(MEMBERSHIP_SEED);
        let test_pts: Vec<[T; 3]> = (0..200)
            .map(|_| {
                let mut p = [T::zero(); 3];
                for a in p.iter_mut().take(dim) {
                    *a = lit(rng.gen::<f64>());
                }
                p
            })
            .collect();
        let mut eval = DMatrix::<T>::zeros(test_pts.len(), grid_pts.len());
        for (r, t) in test_pts.iter().enumerate() {
            let per_axis: Vec<Vec<T>> = (0..dim).map(|a| bases[a].values(t[a])).collect();
            for (c, j) in grid_idx.iter().enumerate() {
                let mut v = T::one();
                for a in 0..dim {
                    v *= per_axis[a][j[a]];
                }
                eval[(r, c)] = v;
            }
        }
        Ok(MembershipGrid { grid_pts, test_pts, eval })
    }

    fn test(&self, grid_vals: &DVector<T>, test_vals: &DVector<T>, tol: T) -> bool {
        let interp = &self.eval * grid_vals;
        let mut max_abs = T::zero();
        for v in grid_vals.iter().chain(test_vals.iter()) {
            max_abs = max_abs.max(v.abs());
        }
        let allowed = tol * (T::one() + max_abs);
        (0..test_vals.nrows()).all(|r| (interp[r] - test_vals[r]).abs() <= allowed)
    }
}

/// Embed facet-parameter points into the reference element.
fn embed_facet<T: Real>(pts: &[[T; 3]], dim: usize, axis: usize, side: usize) -> Vec<[T; 3]> {
    let free: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
    pts.iter()
        .map(|p| {
            let mut x = [T::zero(); 3];
            x[axis] = if side == 1 { T::one() } else { T::zero() };
            for (slot, &a) in free.iter().enumerate() {
                x[a] = p[slot];
            }
            x
        })
        .collect()
}

/// Test the integrand degree condition for one element map.
pub fn check_condition<T: Real>(
    map: &GeometryMap<T>,
    element: usize,
    k: usize,
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    if k < 2 {
        return Err(Error::InvalidOrder("condition check needs k >= 2".into()));
    }
    let dim = map.dim();
    let tol = lit::<T>(opts.membership_tol);
    let vel_basis = LagrangeBasis1D::gauss_lobatto_grid(k + 1)?;
    let pr_basis = LagrangeBasis1D::gauss_lobatto_grid(k)?;

    let vels = multi_indices(dim, &[k + 1; 3]);
    let prs = multi_indices(dim, &[k; 3]);
    let pairs: Vec<(usize, [usize; 3], [usize; 3])> = {
        let total = dim * vels.len() * prs.len();
        if total <= FULL_SWEEP_CAP {
            let mut out = Vec::with_capacity(total);
            for comp in 0..dim {
                for &jv in &vels {
                    for &jp in &prs {
                        out.push((comp, jv, jp));
                    }
                }
            }
            out
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..opts.samples)
                .map(|_| {
                    (
                        rng.gen_range(0..dim),
                        vels[rng.gen_range(0..vels.len())],
                        prs[rng.gen_range(0..prs.len())],
                    )
                })
                .collect()
        }
    };

    // Volume membership.
    let grid = MembershipGrid::<T>::new(dim, &vec![2 * k - 1; dim])?;
    let grid_data = PointData::tabulate(map, &vel_basis, &pr_basis, &grid.grid_pts);
    let test_data = PointData::tabulate(map, &vel_basis, &pr_basis, &grid.test_pts);
    let mut volume_membership = true;
    let mut witness = None;
    let mut grid_vals = DVector::<T>::zeros(grid.grid_pts.len());
    let mut test_vals = DVector::<T>::zeros(grid.test_pts.len());
    for &(comp, jv, jp) in &pairs {
        for p in 0..grid.grid_pts.len() {
            grid_vals[p] = grid_data.integrand(dim, p, comp, jv, jp);
        }
        for p in 0..grid.test_pts.len() {
            test_vals[p] = test_data.integrand(dim, p, comp, jv, jp);
        }
        if !grid.test(&grid_vals, &test_vals, tol) {
            volume_membership = false;
            if witness.is_none() {
                witness = Some(Witness { component: comp, velocity_node: jv, pressure_node: jp });
            }
        }
    }

    // Quadrature gap of the volume term over the same pairs.
    let gl = tensor_gauss_lobatto::<T>(dim, k + 1)?.nodes();
    let hi = reference_rule::<T>(dim, 2 * k + 3)?.nodes();
    let gl_pts: Vec<[T; 3]> = gl.iter().map(|&(p, _)| p).collect();
    let hi_pts: Vec<[T; 3]> = hi.iter().map(|&(p, _)| p).collect();
    let gl_data = PointData::tabulate(map, &vel_basis, &pr_basis, &gl_pts);
    let hi_data = PointData::tabulate(map, &vel_basis, &pr_basis, &hi_pts);
    let mut max_gap = T::zero();
    let mut gap_scale = T::one();
    for &(comp, jv, jp) in &pairs {
        let mut a = T::zero();
        for (p, &(_, w)) in gl.iter().enumerate() {
            a += w * gl_data.integrand(dim, p, comp, jv, jp);
        }
        let mut b = T::zero();
        for (p, &(_, w)) in hi.iter().enumerate() {
            b += w * hi_data.integrand(dim, p, comp, jv, jp);
        }
        max_gap = max_gap.max((a - b).abs());
        gap_scale = gap_scale.max(b.abs());
    }

    // Facet terms: only pairs supported on the facet contribute.
    let facet_grid = MembershipGrid::<T>::new(dim - 1, &vec![2 * k - 1; dim - 1])?;
    let mut facet_membership = Vec::with_capacity(2 * dim);
    for axis in 0..dim {
        for side in 0..2 {
            let g_pts = embed_facet(&facet_grid.grid_pts, dim, axis, side);
            let t_pts = embed_facet(&facet_grid.test_pts, dim, axis, side);
            let g_data = PointData::tabulate(map, &vel_basis, &pr_basis, &g_pts);
            let t_data = PointData::tabulate(map, &vel_basis, &pr_basis, &t_pts);
            let vel_extreme = if side == 1 { k } else { 0 };
            let pr_extreme = if side == 1 { k - 1 } else { 0 };
            let mut ok = true;
            let mut gv = DVector::<T>::zeros(g_pts.len());
            let mut tv = DVector::<T>::zeros(t_pts.len());
            for &(comp, jv, jp) in &pairs {
                if jv[axis] != vel_extreme || jp[axis] != pr_extreme {
                    continue;
                }
                for p in 0..g_pts.len() {
                    gv[p] = g_data.facet_integrand(dim, p, comp, jv, jp, axis, side);
                }
                for p in 0..t_pts.len() {
                    tv[p] = t_data.facet_integrand(dim, p, comp, jv, jp, axis, side);
                }
                if !facet_grid.test(&gv, &tv, tol) {
                    ok = false;
                }
            }
            facet_membership.push(ok);
        }
    }

    Ok(ConditionReport {
        element,
        k,
        volume_membership,
        facet_membership,
        max_quadrature_gap: max_gap.to_f64().unwrap_or(f64::NAN),
        gap_scale: gap_scale.to_f64().unwrap_or(f64::NAN),
        witness,
    })
}

/// Run [`check_condition`] on every element of a mesh.
pub fn check_mesh_condition<T: Real>(
    mesh: &Mesh<T>,
    k: usize,
    opts: &ConditionOptions,
) -> Result<Vec<ConditionReport>> {
    mesh.elements
        .iter()
        .enumerate()
        .map(|(el, e)| check_condition(&e.map, el, k, opts))
        .collect()
}

/// Exact integral, tensor Gauss-Lobatto value and their gap for the closed
/// form integrand of the hexahedron counterexample at `k = 2`.
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleGap<T> {
    pub exact: T,
    pub gauss_lobatto: T,
    pub gap: T,
}

pub fn counterexample_gap<T: Real>() -> Result<CounterexampleGap<T>> {
    let integrand = |x: &[T; 3]| -> T {
        lit::<T>(4.0)
            * x[0]
            * x[0]
            * (T::one() - x[0])
            * (x[0] - lit(4.0))
            * x[1]
            * (T::one() - x[1])
            * x[2]
            * (T::one() - x[2])
            * (x[2] - lit(2.0))
    };
    // Degree (4, 2, 4): an 8-point Gauss rule per axis is exact.
    let exact = reference_rule::<T>(3, 8)?.integrate(integrand);
    let gl = tensor_gauss_lobatto::<T>(3, 3)?.integrate(integrand);
    Ok(CounterexampleGap { exact, gauss_lobatto: gl, gap: (exact - gl).abs() })
}

/// Outcome of the cofactor degree test against the parallelogram-face test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Q3Report {
    /// Each cofactor column lies in the one-variable linear space matching
    /// its axis.
    pub q3_holds: bool,
    pub all_faces_parallelograms: bool,
}

/// The two must agree: the cofactor columns degenerate to the affine pattern
/// exactly when every face of the hexahedron is a parallelogram.
pub fn check_q3_equivalence<T: Real>(map: &GeometryMap<T>) -> Result<Q3Report> {
    if map.dim() != 3 {
        return Err(Error::Dimension("the equivalence test is three-dimensional".into()));
    }
    let tol = lit::<T>(1e-10);
    let mut q3_holds = true;
    for col in 0..3 {
        let mut degrees = [0usize; 3];
        degrees[col] = 1;
        for comp in 0..3 {
            let member = degree_membership(
                3,
                |x: &[T; 3]| map.cof_columns_crossproduct(x).unwrap()[col][comp],
                &degrees,
                tol,
            )?;
            if !member {
                q3_holds = false;
            }
        }
    }

    let ctrl = map.control_points();
    let h = map.diameter();
    let par_tol = lit::<T>(1e-12) * h * h;
    let mut all_faces = true;
    for axis in 0..3 {
        for side in 0..2 {
            let corners: Vec<[T; 3]> = crate::mesh::local_facet_vertices(3, axis, side)
                .iter()
                .map(|&l| ctrl[l])
                .collect();
            let sub = |a: &[T; 3], b: &[T; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
            let c1 = crate::geometry::cross3(
                &sub(&corners[1], &corners[0]),
                &sub(&corners[2], &corners[3]),
            );
            let c2 = crate::geometry::cross3(
                &sub(&corners[2], &corners[1]),
                &sub(&corners[3], &corners[0]),
            );
            if crate::geometry::norm3(&c1) > par_tol || crate::geometry::norm3(&c2) > par_tol {
                all_faces = false;
            }
        }
    }
    Ok(Q3Report { q3_holds, all_faces_parallelograms: all_faces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{counterexample_hexahedron, vertex_eps};
    use approx::assert_relative_eq;

    fn random_quad(rng: &mut ChaCha8Rng, amp: f64) -> GeometryMap<f64> {
        let mut pts = [[0.0f64; 2]; 4];
        for (v, p) in pts.iter_mut().enumerate() {
            let e = vertex_eps(2, v);
            for c in 0..2 {
                p[c] = e[c] as f64 + amp * (rng.gen::<f64>() - 0.5);
            }
        }
        GeometryMap::bilinear2d(pts)
    }

    fn random_parallelepiped(rng: &mut ChaCha8Rng, amp: f64) -> GeometryMap<f64> {
        let mut vec3 = || -> [f64; 3] {
            [
                amp * (rng.gen::<f64>() - 0.5),
                amp * (rng.gen::<f64>() - 0.5),
                amp * (rng.gen::<f64>() - 0.5),
            ]
        };
        let o = vec3();
        let mut u = vec3();
        let mut v = vec3();
        let mut w = vec3();
        u[0] += 1.0;
        v[1] += 1.0;
        w[2] += 1.0;
        GeometryMap::affine3d_from_frame(o, u, v, w)
    }

    fn random_hexahedron(rng: &mut ChaCha8Rng, amp: f64) -> GeometryMap<f64> {
        let mut pts = [[0.0f64; 3]; 8];
        for (v, p) in pts.iter_mut().enumerate() {
            let e = vertex_eps(3, v);
            for c in 0..3 {
                p[c] = e[c] as f64 + amp * (rng.gen::<f64>() - 0.5);
            }
        }
        GeometryMap::trilinear3d(pts)
    }

    #[test]
    fn membership_grid_agrees_with_degree_membership() {
        // Same grid, same seeded comparison points: the fast path must give
        // the same verdicts as the reference implementation.
        let grid = MembershipGrid::<f64>::new(2, &[3, 3]).unwrap();
        for (f, expect) in [
            (Box::new(|x: &[f64; 3]| x[0].powi(3) * x[1]) as Box<dyn Fn(&[f64; 3]) -> f64>, true),
            (Box::new(|x: &[f64; 3]| x[0].powi(4)), false),
        ] {
            let gv = DVector::from_iterator(grid.grid_pts.len(), grid.grid_pts.iter().map(&f));
            let tv = DVector::from_iterator(grid.test_pts.len(), grid.test_pts.iter().map(&f));
            assert_eq!(grid.test(&gv, &tv, 1e-10), expect);
            assert_eq!(degree_membership(2, &f, &[3, 3], 1e-10).unwrap(), expect);
        }
    }

    #[test]
    fn bilinear_2d_maps_satisfy_the_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for k in [2usize, 3] {
            let map = random_quad(&mut rng, 0.3);
            let report = check_condition(&map, 0, k, &ConditionOptions::default()).unwrap();
            assert!(report.holds(), "k={k}: {report:?}");
            assert!(
                report.max_quadrature_gap <= 1e-11 * report.gap_scale,
                "gap {} scale {}",
                report.max_quadrature_gap,
                report.gap_scale
            );
        }
    }

    #[test]
    fn affine_3d_maps_satisfy_the_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        for k in [2usize, 3] {
            let map = random_parallelepiped(&mut rng, 0.4);
            let report = check_condition(&map, 0, k, &ConditionOptions::default()).unwrap();
            assert!(report.holds(), "k={k}");
            assert!(report.max_quadrature_gap <= 1e-11 * report.gap_scale);
        }
    }

    #[test]
    fn hexahedron_violates_the_condition_with_a_measurable_gap() {
        let map = counterexample_hexahedron::<f64>();
        let report = check_condition(&map, 0, 2, &ConditionOptions::default()).unwrap();
        assert!(!report.volume_membership);
        assert!(report.witness.is_some());
        assert!(
            report.max_quadrature_gap >= 1e-4,
            "gap {}",
            report.max_quadrature_gap
        );
        assert!(serde_json::to_string(&report).is_ok());
    }

    #[test]
    fn paper_pair_integrand_matches_the_closed_form() {
        // vhat = 64 x1(1-x1) x2(1-x2) x3(1-x3) e3 and qhat = x1 give the
        // quartic integrand whose closed form is checked pointwise.
        let map = counterexample_hexahedron::<f64>();
        let bubble =
            |x: &[f64; 3]| 64.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]) * x[2] * (1.0 - x[2]);
        let f = |x: &[f64; 3]| {
            let cols = map.cof_columns_crossproduct(x).unwrap();
            bubble(x) * cols[0][2]
        };
        let closed = |x: &[f64; 3]| {
            4.0 * x[0] * x[0] * (1.0 - x[0]) * (x[0] - 4.0)
                * x[1] * (1.0 - x[1])
                * x[2] * (1.0 - x[2]) * (x[2] - 2.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..40 {
            let x = [rng.gen(), rng.gen(), rng.gen()];
            assert_relative_eq!(f(&x), closed(&x), epsilon = 1e-12);
        }
        assert!(!degree_membership(3, f, &[3, 3, 3], 1e-10).unwrap());
    }

    #[test]
    fn counterexample_gap_is_one_over_720() {
        // Separable oracle: 4 int x^2(1-x)(x-4) = -17/15, int x(1-x) = 1/6,
        // int x(1-x)(x-2) = -1/4, so the exact value is 17/360; the 3-point
        // rule gives (-7/6)(1/6)(-1/4) = 7/144; the gap is 1/720.
        let g = counterexample_gap::<f64>().unwrap();
        assert_relative_eq!(g.exact, 17.0 / 360.0, epsilon = 1e-15);
        assert_relative_eq!(g.gauss_lobatto, 7.0 / 144.0, epsilon = 1e-15);
        assert_relative_eq!(g.gap, 1.0 / 720.0, epsilon = 1e-12);
    }

    #[test]
    fn q3_equivalence_basic_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        let affine = random_parallelepiped(&mut rng, 0.5);
        let r = check_q3_equivalence(&affine).unwrap();
        assert!(r.q3_holds && r.all_faces_parallelograms);

        let hexa = counterexample_hexahedron::<f64>();
        let r = check_q3_equivalence(&hexa).unwrap();
        assert!(!r.q3_holds && !r.all_faces_parallelograms);
    }

    #[test]
    fn q3_equivalence_on_seeded_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        for trial in 0..60 {
            let map = if trial % 2 == 0 {
                random_hexahedron(&mut rng, 0.25)
            } else {
                random_parallelepiped(&mut rng, 0.5)
            };
            let r = check_q3_equivalence(&map).unwrap();
            assert_eq!(
                r.q3_holds, r.all_faces_parallelograms,
                "trial {trial}: {r:?}"
            );
        }
    }

    #[test]
    fn q3_equivalence_on_a_frustum() {
        // Bottom face is a unit square, top face shrunk: four side faces are
        // trapezoids, so both tests must come out false together.
        let s = 0.6;
        let map = GeometryMap::trilinear3d([
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.2, 0.2, 1.0],
            [0.2 + s, 0.2, 1.0],
            [0.2 + s, 0.2 + s, 1.0],
            [0.2, 0.2 + s, 1.0],
        ]);
        let r = check_q3_equivalence(&map).unwrap();
        assert!(!r.q3_holds && !r.all_faces_parallelograms);
    }

    #[test]
    fn q3_rejects_2d_maps() {
        let m = GeometryMap::bilinear2d([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert!(check_q3_equivalence(&m).is_err());
    }

    #[test]
    fn mesh_sweep_produces_one_report_per_element() {
        let mesh = crate::mesh::StructuredMesh::unit(crate::mesh::StructuredKind::Quad2d, 2)
            .with_distortion(0.2, 1)
            .build::<f64>()
            .unwrap();
        let reports = check_mesh_condition(&mesh, 2, &ConditionOptions::default()).unwrap();
        assert_eq!(reports.len(), 4);
        assert!(reports.iter().all(|r| r.holds()));
    }
}
