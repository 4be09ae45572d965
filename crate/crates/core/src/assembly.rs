//! Assembly of the Taylor-Hood pair: velocity in continuous vector `Q_k`
//! vanishing on the boundary, pressure in continuous `Q_{k-1}`, the mixed form
//! `b(v, q) = -int q div v`, and the Gram matrices of every norm used by the
//! stability measurements.
//!
//! Element integrals are pulled back to the reference element,
//! `b_K = int vhat . cof(J) grad qhat - sum_facets int vhat . cof(J) nhat qhat`,
//! so the `(k+1)`-point Gauss-Lobatto rule is exact whenever the integrand
//! degree condition holds. The global mixed matrix keeps only the volume part;
//! the facet terms cancel across conforming interior facets and vanish on the
//! boundary, and [`mixed_matrix_with_facet_route`] checks exactly that.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::index::multi_indices;
use crate::mesh::{facet_axis_side, Mesh, NodeTable};
use crate::poly::LagrangeBasis1D;
use crate::quadrature::{gauss_legendre, gauss_lobatto, QuadratureRule1D};
use crate::real::Real;

/// Which quadrature backs the element integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadMode {
    /// The `(k+1)`-point tensor Gauss-Lobatto rule of the velocity nodes.
    GaussLobattoKp1,
    /// A `(2k+3)`-point tensor Gauss-Legendre rule, the near-exact reference.
    ReferenceHighOrder,
}

#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    pub mode: QuadMode,
    /// Use only the gradient part in the velocity "H1" norm.
    pub h1_seminorm: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions { mode: QuadMode::ReferenceHighOrder, h1_seminorm: false }
    }
}

/// Norms measurable on assembled systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    VelH1,
    VelL2,
    PrL2,
    PrGrad,
    PrMeshDep,
}

/// Assembled matrices and degree-of-freedom maps for one mesh and degree `k`.
#[derive(Debug, Clone)]
pub struct FemSystem<T> {
    pub k: usize,
    pub dim: usize,
    pub opts: AssembleOptions,
    pub vel_table: NodeTable<T>,
    pub pr_table: NodeTable<T>,
    /// Global velocity node to first of its `dim` dof indices; `None` on the boundary.
    pub vel_dof: Vec<Option<usize>>,
    pub n_vel: usize,
    pub n_pr: usize,
    /// Mixed form, velocity dofs by pressure dofs.
    pub b: DMatrix<T>,
    pub a_l2: DMatrix<T>,
    pub a_grad: DMatrix<T>,
    /// Velocity norm matrix: `a_l2 + a_grad`, or `a_grad` under the seminorm flag.
    pub a_h1: DMatrix<T>,
    pub m_l2: DMatrix<T>,
    pub m_grad: DMatrix<T>,
    /// Mesh-dependent pressure seminorm: `sum_K h_K^2 (grad gram on K)`.
    pub m_h: DMatrix<T>,
    /// Coefficients of the constant pressure.
    pub one_pr: DVector<T>,
    pub h_k: Vec<T>,
}

fn volume_rule<T: Real>(k: usize, mode: QuadMode) -> Result<QuadratureRule1D<T>> {
    match mode {
        QuadMode::GaussLobattoKp1 => gauss_lobatto(k + 1),
        QuadMode::ReferenceHighOrder => gauss_legendre(2 * k + 3),
    }
}

/// Per-axis values and derivatives of a 1D basis at the rule points.
struct BasisAtPoints<T> {
    vals: Vec<Vec<T>>,
    ders: Vec<Vec<T>>,
}

impl<T: Real> BasisAtPoints<T> {
    fn tabulate(basis: &LagrangeBasis1D<T>, points: &[T]) -> Self {
        let vals = points.iter().map(|&t| basis.values(t)).collect();
        let ders = points.iter().map(|&t| basis.derivs(t)).collect();
        BasisAtPoints { vals, ders }
    }
}

/// Scalar basis values and reference gradients at one tensor quadrature point.
fn tensor_basis_at<T: Real>(
    dim: usize,
    tab: &BasisAtPoints<T>,
    jq: [usize; 3],
    n_basis_1d: usize,
    vals: &mut [T],
    grads: &mut [[T; 3]],
) {
    let counts = [n_basis_1d; 3];
    for (flat, jb) in multi_indices(dim, &counts).iter().enumerate() {
        let mut v = T::one();
        for a in 0..dim {
            v *= tab.vals[jq[a]][jb[a]];
        }
        vals[flat] = v;
        for axis in 0..dim {
            let mut g = T::one();
            for a in 0..dim {
                g *= if a == axis { tab.ders[jq[a]][jb[a]] } else { tab.vals[jq[a]][jb[a]] };
            }
            grads[flat][axis] = g;
        }
    }
}

impl<T: Real> FemSystem<T> {
    /// Assemble all matrices for degree `k >= 2` on a valid mesh.
    pub fn assemble(mesh: &Mesh<T>, k: usize, opts: AssembleOptions) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidOrder(format!(
                "Taylor-Hood pairs need k >= 2, got {k}"
            )));
        }
        if opts.mode == QuadMode::GaussLobattoKp1 && !mesh.is_affine() {
            return Err(Error::ConditionViolation(
                "Gauss-Lobatto assembly is only exact on affine 3D elements; \
                 use the high-order mode for non-affine meshes"
                    .into(),
            ));
        }
        let dim = mesh.dim;
        let vel_table = mesh.node_table(k)?;
        let pr_table = mesh.node_table(k - 1)?;

        let mut vel_dof = vec![None; vel_table.n_nodes];
        let mut next = 0usize;
        for g in 0..vel_table.n_nodes {
            if !vel_table.on_boundary[g] {
                vel_dof[g] = Some(next);
                next += dim;
            }
        }
        let n_vel = next;
        let n_pr = pr_table.n_nodes;

        let rule = volume_rule::<T>(k, opts.mode)?;
        let vel_basis = LagrangeBasis1D::gauss_lobatto_grid(k + 1)?;
        let pr_basis = LagrangeBasis1D::gauss_lobatto_grid(k)?;
        let vel_tab = BasisAtPoints::tabulate(&vel_basis, &rule.points);
        let pr_tab = BasisAtPoints::tabulate(&pr_basis, &rule.points);

        let nvl = (k + 1).pow(dim as u32);
        let npl = k.pow(dim as u32);
        let nq = rule.len();

        let mut b = DMatrix::<T>::zeros(n_vel, n_pr);
        let mut a_l2 = DMatrix::<T>::zeros(n_vel, n_vel);
        let mut a_grad = DMatrix::<T>::zeros(n_vel, n_vel);
        let mut m_l2 = DMatrix::<T>::zeros(n_pr, n_pr);
        let mut m_grad = DMatrix::<T>::zeros(n_pr, n_pr);
        let mut m_h = DMatrix::<T>::zeros(n_pr, n_pr);
        let h_k = mesh.diameters();

        let mut vv = vec![T::zero(); nvl];
        let mut gv = vec![[T::zero(); 3]; nvl];
        let mut vp = vec![T::zero(); npl];
        let mut gp = vec![[T::zero(); 3]; npl];
        let mut cgp = vec![[T::zero(); 3]; npl];

        let mut loc_b = DMatrix::<T>::zeros(nvl, npl * dim);
        let mut loc_av = DMatrix::<T>::zeros(nvl, nvl);
        let mut loc_ag = DMatrix::<T>::zeros(nvl, nvl);
        let mut loc_ml = DMatrix::<T>::zeros(npl, npl);
        let mut loc_mg = DMatrix::<T>::zeros(npl, npl);

        for (el, element) in mesh.elements.iter().enumerate() {
            loc_b.fill(T::zero());
            loc_av.fill(T::zero());
            loc_ag.fill(T::zero());
            loc_ml.fill(T::zero());
            loc_mg.fill(T::zero());

            for jq in multi_indices(dim, &[nq, nq, nq]) {
                let mut pt = [T::zero(); 3];
                let mut w = T::one();
                for a in 0..dim {
                    pt[a] = rule.points[jq[a]];
                    w *= rule.weights[jq[a]];
                }
                let jac = element.map.jacobian(&pt).map_err(|_| Error::DegenerateElement {
                    element: el,
                    det: f64::NAN,
                })?;
                tensor_basis_at(dim, &vel_tab, jq, k + 1, &mut vv, &mut gv);
                tensor_basis_at(dim, &pr_tab, jq, k, &mut vp, &mut gp);
                for (c, g) in cgp.iter_mut().zip(&gp) {
                    *c = jac.cof_apply(g);
                }
                let wdet = w * jac.det;
                let winv = w / jac.det;
                for i in 0..nvl {
                    let cgi = jac.cof_apply(&gv[i]);
                    for j in 0..nvl {
                        loc_av[(i, j)] += wdet * vv[i] * vv[j];
                        let cgj = jac.cof_apply(&gv[j]);
                        let mut dot = T::zero();
                        for c in 0..dim {
                            dot += cgi[c] * cgj[c];
                        }
                        loc_ag[(i, j)] += winv * dot;
                    }
                    for bidx in 0..npl {
                        let wv = w * vv[i];
                        for c in 0..dim {
                            loc_b[(i, bidx * dim + c)] += wv * cgp[bidx][c];
                        }
                    }
                }
                for a in 0..npl {
                    for bidx in 0..npl {
                        loc_ml[(a, bidx)] += wdet * vp[a] * vp[bidx];
                        let mut dot = T::zero();
                        for c in 0..dim {
                            dot += cgp[a][c] * cgp[bidx][c];
                        }
                        loc_mg[(a, bidx)] += winv * dot;
                    }
                }
            }

            // Scatter.
            let vn = &vel_table.elem_nodes[el];
            let pn = &pr_table.elem_nodes[el];
            let h2 = h_k[el] * h_k[el];
            for i in 0..nvl {
                let Some(bi) = vel_dof[vn[i]] else { continue };
                for j in 0..nvl {
                    if let Some(bj) = vel_dof[vn[j]] {
                        for c in 0..dim {
                            a_l2[(bi + c, bj + c)] += loc_av[(i, j)];
                            a_grad[(bi + c, bj + c)] += loc_ag[(i, j)];
                        }
                    }
                }
                for (bidx, &gp_) in pn.iter().enumerate() {
                    for c in 0..dim {
                        b[(bi + c, gp_)] += loc_b[(i, bidx * dim + c)];
                    }
                }
            }
            for (a, &ga) in pn.iter().enumerate() {
                for (bidx, &gb) in pn.iter().enumerate() {
                    m_l2[(ga, gb)] += loc_ml[(a, bidx)];
                    m_grad[(ga, gb)] += loc_mg[(a, bidx)];
                    m_h[(ga, gb)] += h2 * loc_mg[(a, bidx)];
                }
            }
        }

        let a_h1 = if opts.h1_seminorm { a_grad.clone() } else { &a_l2 + &a_grad };
        let one_pr = DVector::from_element(n_pr, T::one());

        Ok(FemSystem {
            k,
            dim,
            opts,
            vel_table,
            pr_table,
            vel_dof,
            n_vel,
            n_pr,
            b,
            a_l2,
            a_grad,
            a_h1,
            m_l2,
            m_grad,
            m_h,
            one_pr,
            h_k,
        })
    }

    /// `sqrt(x^T G x)` for the requested norm.
    pub fn norm(&self, kind: NormKind, x: &DVector<T>) -> Result<T> {
        let g = match kind {
            NormKind::VelH1 => &self.a_h1,
            NormKind::VelL2 => &self.a_l2,
            NormKind::PrL2 => &self.m_l2,
            NormKind::PrGrad => &self.m_grad,
            NormKind::PrMeshDep => &self.m_h,
        };
        if x.nrows() != g.nrows() {
            return Err(Error::SizeMismatch(format!(
                "vector has {} entries, norm matrix is {}x{}",
                x.nrows(),
                g.nrows(),
                g.ncols()
            )));
        }
        Ok(x.dot(&(g * x)).max(T::zero()).sqrt())
    }

    /// `b(v, q) = v^T B q`.
    pub fn apply_b(&self, v: &DVector<T>, q: &DVector<T>) -> Result<T> {
        if v.nrows() != self.n_vel || q.nrows() != self.n_pr {
            return Err(Error::SizeMismatch(format!(
                "apply_b: got ({}, {}), system is ({}, {})",
                v.nrows(),
                q.nrows(),
                self.n_vel,
                self.n_pr
            )));
        }
        Ok(v.dot(&(&self.b * q)))
    }

    /// Measure of the domain, `int_Omega 1`.
    pub fn domain_volume(&self) -> T {
        self.one_pr.dot(&(&self.m_l2 * &self.one_pr))
    }

    /// `int_Omega q` for pressure coefficients `q`.
    pub fn pressure_mean(&self, q: &DVector<T>) -> T {
        self.one_pr.dot(&(&self.m_l2 * q))
    }

    /// Subtract the mean so that `int_Omega q = 0`.
    pub fn zero_mean(&self, q: &DVector<T>) -> DVector<T> {
        let shift = self.pressure_mean(q) / self.domain_volume();
        q - &self.one_pr * shift
    }
}

/// Global mixed matrix assembled with explicit facet terms on every element.
///
/// For a conforming mesh the facet contributions cancel pairwise on interior
/// facets and vanish on boundary facets, so this must agree with
/// [`FemSystem::assemble`]'s volume-only matrix to rounding.
pub fn mixed_matrix_with_facet_route<T: Real>(
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
) -> Result<DMatrix<T>> {
    let mut b = sys.b.clone();
    let dim = sys.dim;
    let k = sys.k;
    let facet_rule = volume_rule::<T>(k, sys.opts.mode)?;
    let vel_basis = LagrangeBasis1D::gauss_lobatto_grid(k + 1)?;
    let pr_basis = LagrangeBasis1D::gauss_lobatto_grid(k)?;
    let vel_tab = BasisAtPoints::tabulate(&vel_basis, &facet_rule.points);
    let pr_tab = BasisAtPoints::tabulate(&pr_basis, &facet_rule.points);
    let ends_v = BasisAtPoints::tabulate(&vel_basis, &[T::zero(), T::one()]);
    let ends_p = BasisAtPoints::tabulate(&pr_basis, &[T::zero(), T::one()]);
    let nq = facet_rule.len();
    let nvl = (k + 1).pow(dim as u32);
    let npl = k.pow(dim as u32);
    let mut vv = vec![T::zero(); nvl];
    let mut gv = vec![[T::zero(); 3]; nvl];
    let mut vp = vec![T::zero(); npl];
    let mut gp = vec![[T::zero(); 3]; npl];

    for (el, element) in mesh.elements.iter().enumerate() {
        let vn = &sys.vel_table.elem_nodes[el];
        let pn = &sys.pr_table.elem_nodes[el];
        for facet in 0..2 * dim {
            let (axis, side) = facet_axis_side(facet);
            let free: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
            let sign = if side == 1 { T::one() } else { -T::one() };
            for jf in multi_indices(dim - 1, &[nq, nq, nq]) {
                let mut jq = [0usize; 3];
                let mut w = T::one();
                for (slot, &a) in free.iter().enumerate() {
                    jq[a] = jf[slot];
                    w *= facet_rule.weights[jf[slot]];
                }
                let mut pt = [T::zero(); 3];
                for a in 0..dim {
                    pt[a] = if a == axis {
                        if side == 1 {
                            T::one()
                        } else {
                            T::zero()
                        }
                    } else {
                        facet_rule.points[jq[a]]
                    };
                }
                // Mixed tabulation: rule points on free axes, endpoint on `axis`.
                let pick = |tab: &BasisAtPoints<T>, ends: &BasisAtPoints<T>, a: usize| {
                    if a == axis {
                        (ends.vals[side].clone(), ends.ders[side].clone())
                    } else {
                        (tab.vals[jq[a]].clone(), tab.ders[jq[a]].clone())
                    }
                };
                let jac = element.map.jacobian(&pt)?;
                // Values of all local scalar bases at the facet point.
                tabulate_mixed(dim, k + 1, |a| pick(&vel_tab, &ends_v, a), &mut vv, &mut gv);
                tabulate_mixed(dim, k, |a| pick(&pr_tab, &ends_p, a), &mut vp, &mut gp);
                let cof_n: Vec<T> = (0..dim).map(|c| sign * jac.cof[c][axis]).collect();
                for i in 0..nvl {
                    if vv[i] == T::zero() {
                        continue;
                    }
                    let Some(bi) = sys.vel_dof[vn[i]] else { continue };
                    for (bidx, &gpr) in pn.iter().enumerate() {
                        let scale = w * vv[i] * vp[bidx];
                        for c in 0..dim {
                            b[(bi + c, gpr)] -= scale * cof_n[c];
                        }
                    }
                }
            }
        }
    }
    Ok(b)
}

fn tabulate_mixed<T: Real>(
    dim: usize,
    n_basis_1d: usize,
    pick: impl Fn(usize) -> (Vec<T>, Vec<T>),
    vals: &mut [T],
    grads: &mut [[T; 3]],
) {
    let per_axis: Vec<(Vec<T>, Vec<T>)> = (0..dim).map(pick).collect();
    let counts = [n_basis_1d; 3];
    for (flat, jb) in multi_indices(dim, &counts).iter().enumerate() {
        let mut v = T::one();
        for a in 0..dim {
            v *= per_axis[a].0[jb[a]];
        }
        vals[flat] = v;
        for axis in 0..dim {
            let mut g = T::one();
            for a in 0..dim {
                g *= if a == axis { per_axis[a].1[jb[a]] } else { per_axis[a].0[jb[a]] };
            }
            grads[flat][axis] = g;
        }
    }
}

/// Matrices of one element: the true local `b_K` (volume plus facet terms)
/// and the local velocity/pressure Gram matrices. Velocity nodes on the
/// physical boundary are dropped, everything else is kept.
#[derive(Debug, Clone)]
pub struct LocalSystem<T> {
    pub element: usize,
    pub k: usize,
    pub dim: usize,
    pub h: T,
    pub n_vel: usize,
    pub n_pr: usize,
    /// Local scalar velocity node to first local dof, `None` on the boundary.
    pub vel_keep: Vec<Option<usize>>,
    pub b: DMatrix<T>,
    pub a_l2: DMatrix<T>,
    pub a_grad: DMatrix<T>,
    pub a_h1: DMatrix<T>,
    pub m_l2: DMatrix<T>,
    pub m_grad: DMatrix<T>,
    pub one_pr: DVector<T>,
}

/// Build the local system of one element from an assembled global system.
pub fn local_system<T: Real>(
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
    element: usize,
) -> Result<LocalSystem<T>> {
    let dim = sys.dim;
    let k = sys.k;
    let map = &mesh.elements[element].map;
    let rule = volume_rule::<T>(k, sys.opts.mode)?;
    let vel_basis = LagrangeBasis1D::gauss_lobatto_grid(k + 1)?;
    let pr_basis = LagrangeBasis1D::gauss_lobatto_grid(k)?;
    let vel_tab = BasisAtPoints::tabulate(&vel_basis, &rule.points);
    let pr_tab = BasisAtPoints::tabulate(&pr_basis, &rule.points);
    let nq = rule.len();
    let nvl = (k + 1).pow(dim as u32);
    let npl = k.pow(dim as u32);

    let vn = &sys.vel_table.elem_nodes[element];
    let mut vel_keep = vec![None; nvl];
    let mut next = 0;
    for (i, keep) in vel_keep.iter_mut().enumerate() {
        if !sys.vel_table.on_boundary[vn[i]] {
            *keep = Some(next);
            next += dim;
        }
    }
    let n_vel = next;

    let mut b = DMatrix::<T>::zeros(n_vel, npl);
    let mut a_l2 = DMatrix::<T>::zeros(n_vel, n_vel);
    let mut a_grad = DMatrix::<T>::zeros(n_vel, n_vel);
    let mut m_l2 = DMatrix::<T>::zeros(npl, npl);
    let mut m_grad = DMatrix::<T>::zeros(npl, npl);

    let mut vv = vec![T::zero(); nvl];
    let mut gv = vec![[T::zero(); 3]; nvl];
    let mut vp = vec![T::zero(); npl];
    let mut gp = vec![[T::zero(); 3]; npl];

    for jq in multi_indices(dim, &[nq, nq, nq]) {
        let mut pt = [T::zero(); 3];
        let mut w = T::one();
        for a in 0..dim {
            pt[a] = rule.points[jq[a]];
            w *= rule.weights[jq[a]];
        }
        let jac = map.jacobian(&pt)?;
        tensor_basis_at(dim, &vel_tab, jq, k + 1, &mut vv, &mut gv);
        tensor_basis_at(dim, &pr_tab, jq, k, &mut vp, &mut gp);
        let wdet = w * jac.det;
        let winv = w / jac.det;
        let cgp: Vec<[T; 3]> = gp.iter().map(|g| jac.cof_apply(g)).collect();
        for i in 0..nvl {
            let Some(di) = vel_keep[i] else { continue };
            let cgi = jac.cof_apply(&gv[i]);
            for j in 0..nvl {
                let Some(dj) = vel_keep[j] else { continue };
                let cgj = jac.cof_apply(&gv[j]);
                let mut dot = T::zero();
                for c in 0..dim {
                    dot += cgi[c] * cgj[c];
                }
                for c in 0..dim {
                    a_l2[(di + c, dj + c)] += wdet * vv[i] * vv[j];
                    a_grad[(di + c, dj + c)] += winv * dot;
                }
            }
            for bidx in 0..npl {
                let wv = w * vv[i];
                for c in 0..dim {
                    b[(di + c, bidx)] += wv * cgp[bidx][c];
                }
            }
        }
        for a in 0..npl {
            for bidx in 0..npl {
                m_l2[(a, bidx)] += wdet * vp[a] * vp[bidx];
                let mut dot = T::zero();
                for c in 0..dim {
                    dot += cgp[a][c] * cgp[bidx][c];
                }
                m_grad[(a, bidx)] += winv * dot;
            }
        }
    }

    // Facet terms of the true local b_K.
    let ends_v = BasisAtPoints::tabulate(&vel_basis, &[T::zero(), T::one()]);
    let ends_p = BasisAtPoints::tabulate(&pr_basis, &[T::zero(), T::one()]);
    for facet in 0..2 * dim {
        let (axis, side) = facet_axis_side(facet);
        let free: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
        let sign = if side == 1 { T::one() } else { -T::one() };
        for jf in multi_indices(dim - 1, &[nq, nq, nq]) {
            let mut jq = [0usize; 3];
            let mut w = T::one();
            for (slot, &a) in free.iter().enumerate() {
                jq[a] = jf[slot];
                w *= rule.weights[jf[slot]];
            }
            let mut pt = [T::zero(); 3];
            for a in 0..dim {
                pt[a] = if a == axis {
                    if side == 1 {
                        T::one()
                    } else {
                        T::zero()
                    }
                } else {
                    rule.points[jq[a]]
                };
            }
            let jac = map.jacobian(&pt)?;
            let pick_v = |a: usize| {
                if a == axis {
                    (ends_v.vals[side].clone(), ends_v.ders[side].clone())
                } else {
                    (vel_tab.vals[jq[a]].clone(), vel_tab.ders[jq[a]].clone())
                }
            };
            let pick_p = |a: usize| {
                if a == axis {
                    (ends_p.vals[side].clone(), ends_p.ders[side].clone())
                } else {
                    (pr_tab.vals[jq[a]].clone(), pr_tab.ders[jq[a]].clone())
                }
            };
            tabulate_mixed(dim, k + 1, pick_v, &mut vv, &mut gv);
            tabulate_mixed(dim, k, pick_p, &mut vp, &mut gp);
            let cof_n: Vec<T> = (0..dim).map(|c| sign * jac.cof[c][axis]).collect();
            for i in 0..nvl {
                let Some(di) = vel_keep[i] else { continue };
                if vv[i] == T::zero() {
                    continue;
                }
                for bidx in 0..npl {
                    let scale = w * vv[i] * vp[bidx];
                    for c in 0..dim {
                        b[(di + c, bidx)] -= scale * cof_n[c];
                    }
                }
            }
        }
    }

    let a_h1 = if sys.opts.h1_seminorm { a_grad.clone() } else { &a_l2 + &a_grad };
    Ok(LocalSystem {
        element,
        k,
        dim,
        h: sys.h_k[element],
        n_vel,
        n_pr: npl,
        vel_keep,
        b,
        a_l2,
        a_grad,
        a_h1,
        m_l2,
        m_grad,
        one_pr: DVector::from_element(npl, T::one()),
    })
}
