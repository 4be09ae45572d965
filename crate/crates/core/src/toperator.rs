//! The element-wise pressure-to-velocity map `T`.
//!
//! Nodal values of `v = T q` on each element, with `J` the geometry Jacobian
//! and `qhat` the pulled-back pressure:
//! interior nodes get `J grad qhat`, face-interior nodes `J_i d_i qhat +
//! J_j d_j qhat` (3D), edge-interior nodes `J_i d_i qhat`, and vertices and
//! boundary nodes get zero. Values assigned from neighboring elements must
//! agree; disagreement is an error, not something to average away.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::assembly::{local_system, FemSystem, LocalSystem};
use crate::eig::{jacobi_eigen, sym_gen_eig};
use crate::error::{Error, Result};
use crate::index::multi_indices;
use crate::mesh::{Mesh, NodeClass};
use crate::poly::LagrangeBasis1D;
use crate::quadrature::gauss_lobatto;
use crate::real::{lit, Real};

/// Assembled global map from pressure coefficients to velocity dofs.
#[derive(Debug, Clone)]
pub struct TOperator<T> {
    pub t: DMatrix<T>,
}

impl<T: Real> TOperator<T> {
    pub fn apply(&self, q: &DVector<T>) -> DVector<T> {
        &self.t * q
    }
}

/// Derivatives of all local pressure basis functions at one velocity node,
/// restricted to the active axes of the node class.
fn active_axes(class: NodeClass, dim: usize) -> Vec<usize> {
    match class {
        NodeClass::Interior => (0..dim).collect(),
        NodeClass::Face(p, q) => vec![p, q],
        NodeClass::Edge(t) => vec![t],
        NodeClass::Vertex => Vec::new(),
    }
}

struct CrossTables<T> {
    /// `vals[jv][a]`: pressure 1D basis `a` at velocity 1D node `jv`.
    vals: Vec<Vec<T>>,
    ders: Vec<Vec<T>>,
}

fn cross_tables<T: Real>(k: usize) -> Result<CrossTables<T>> {
    let vel_nodes = gauss_lobatto::<T>(k + 1)?.points;
    let pr_basis = LagrangeBasis1D::gauss_lobatto_grid(k)?;
    Ok(CrossTables {
        vals: vel_nodes.iter().map(|&t| pr_basis.values(t)).collect(),
        ders: vel_nodes.iter().map(|&t| pr_basis.derivs(t)).collect(),
    })
}

/// Build the global operator. Requires the interior-facet vertex assumption
/// and (in 3D) affine elements.
pub fn build_t<T: Real>(mesh: &Mesh<T>, sys: &FemSystem<T>) -> Result<TOperator<T>> {
    if !mesh.is_affine() {
        return Err(Error::ConditionViolation(
            "the pressure-to-velocity map needs affine elements in 3D".into(),
        ));
    }
    if !mesh.validate_t_assumption() {
        return Err(Error::UnsupportedMesh(
            "some element has no vertex with all incident facets interior".into(),
        ));
    }
    let dim = sys.dim;
    let k = sys.k;
    let tables = cross_tables::<T>(k)?;
    let vel_pts = gauss_lobatto::<T>(k + 1)?.points;
    let mut t = DMatrix::<T>::zeros(sys.n_vel, sys.n_pr);
    let mut written: HashMap<(usize, usize), [T; 3]> = HashMap::new();

    for (el, element) in mesh.elements.iter().enumerate() {
        let vn = &sys.vel_table.elem_nodes[el];
        let pn = &sys.pr_table.elem_nodes[el];
        let classes = &sys.vel_table.elem_class[el];
        for (flat, jv) in multi_indices(dim, &[k + 1, k + 1, k + 1]).iter().enumerate() {
            let g = vn[flat];
            let Some(base) = sys.vel_dof[g] else { continue };
            let axes = active_axes(classes[flat], dim);
            if axes.is_empty() {
                continue;
            }
            let mut pt = [T::zero(); 3];
            for a in 0..dim {
                pt[a] = vel_pts[jv[a]];
            }
            let jac = element.map.jacobian(&pt)?;
            for (bidx, jp) in multi_indices(dim, &[k, k, k]).iter().enumerate() {
                let col = pn[bidx];
                let mut v = [T::zero(); 3];
                for &axis in &axes {
                    let mut dq = T::one();
                    for a in 0..dim {
                        dq *= if a == axis {
                            tables.ders[jv[a]][jp[a]]
                        } else {
                            tables.vals[jv[a]][jp[a]]
                        };
                    }
                    let jcol = jac.col(axis);
                    for c in 0..dim {
                        v[c] += jcol[c] * dq;
                    }
                }
                match written.get(&(g, col)) {
                    None => {
                        written.insert((g, col), v);
                        for c in 0..dim {
                            t[(base + c, col)] = v[c];
                        }
                    }
                    Some(prev) => {
                        let mut scale = T::one();
                        let mut diff = T::zero();
                        for c in 0..dim {
                            scale = scale.max(prev[c].abs()).max(v[c].abs());
                            diff = diff.max((prev[c] - v[c]).abs());
                        }
                        if diff > lit::<T>(1e-10) * scale {
                            return Err(Error::InconsistentNodalValues(format!(
                                "element {el}, velocity node {g}, pressure column {col}: \
                                 |delta| = {:?}",
                                diff.to_f64()
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(TOperator { t })
}

/// Local analogue of [`build_t`] on one element, rows matching
/// [`LocalSystem::vel_keep`].
pub fn build_local_t<T: Real>(
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
    ls: &LocalSystem<T>,
) -> Result<DMatrix<T>> {
    let dim = sys.dim;
    let k = sys.k;
    let el = ls.element;
    let tables = cross_tables::<T>(k)?;
    let vel_pts = gauss_lobatto::<T>(k + 1)?.points;
    let classes = &sys.vel_table.elem_class[el];
    let element = &mesh.elements[el];
    let mut t = DMatrix::<T>::zeros(ls.n_vel, ls.n_pr);
    for (flat, jv) in multi_indices(dim, &[k + 1, k + 1, k + 1]).iter().enumerate() {
        let Some(base) = ls.vel_keep[flat] else { continue };
        let axes = active_axes(classes[flat], dim);
        if axes.is_empty() {
            continue;
        }
        let mut pt = [T::zero(); 3];
        for a in 0..dim {
            pt[a] = vel_pts[jv[a]];
        }
        let jac = element.map.jacobian(&pt)?;
        for (bidx, jp) in multi_indices(dim, &[k, k, k]).iter().enumerate() {
            let mut v = [T::zero(); 3];
            for &axis in &axes {
                let mut dq = T::one();
                for a in 0..dim {
                    dq *= if a == axis {
                        tables.ders[jv[a]][jp[a]]
                    } else {
                        tables.vals[jv[a]][jp[a]]
                    };
                }
                let jcol = jac.col(axis);
                for c in 0..dim {
                    v[c] += jcol[c] * dq;
                }
            }
            for c in 0..dim {
                t[(base + c, bidx)] = v[c];
            }
        }
    }
    Ok(t)
}

/// The Gauss-Lobatto sum of weighted squared pressure derivatives over the
/// node classes of one element: the right-hand side of the elementwise
/// coercivity identity.
pub fn sum_of_squares_rhs<T: Real>(
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
    element: usize,
    q_local: &DVector<T>,
) -> Result<T> {
    let dim = sys.dim;
    let k = sys.k;
    if q_local.nrows() != k.pow(dim as u32) {
        return Err(Error::SizeMismatch("local pressure coefficient count".into()));
    }
    let rule = gauss_lobatto::<T>(k + 1)?;
    let tables = cross_tables::<T>(k)?;
    let classes = &sys.vel_table.elem_class[element];
    let vn = &sys.vel_table.elem_nodes[element];
    let map = &mesh.elements[element].map;
    let mut total = T::zero();
    for (flat, jv) in multi_indices(dim, &[k + 1, k + 1, k + 1]).iter().enumerate() {
        if sys.vel_table.on_boundary[vn[flat]] {
            continue;
        }
        let axes = active_axes(classes[flat], dim);
        if axes.is_empty() {
            continue;
        }
        let mut pt = [T::zero(); 3];
        let mut w = T::one();
        for a in 0..dim {
            pt[a] = rule.points[jv[a]];
            w *= rule.weights[jv[a]];
        }
        let det = map.jacobian(&pt)?.det;
        let mut sq = T::zero();
        for &axis in &axes {
            let mut d = T::zero();
            for (bidx, jp) in multi_indices(dim, &[k, k, k]).iter().enumerate() {
                let mut dq = T::one();
                for a in 0..dim {
                    dq *= if a == axis {
                        tables.ders[jv[a]][jp[a]]
                    } else {
                        tables.vals[jv[a]][jp[a]]
                    };
                }
                d += dq * q_local[bidx];
            }
            sq += d * d;
        }
        total += w * det * sq;
    }
    Ok(total)
}

/// Measured T-coercivity constants, global and per element.
#[derive(Debug, Clone)]
pub struct CoercivityReport<T> {
    /// Smallest positive eigenvalue of `sym(T^T B)` against the
    /// mesh-dependent pressure seminorm, constants deflated.
    pub c_t: T,
    /// Square root of the largest eigenvalue of `T^T A_H1 T` against the same.
    pub big_c_t: T,
    pub per_element: Vec<ElementCoercivity<T>>,
}

#[derive(Debug, Clone, Copy)]
pub struct ElementCoercivity<T> {
    pub c: T,
    pub big_c: T,
}

fn sym_part<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * lit::<T>(0.5)
}

/// Measure `c_T` and `C_T` globally and per element.
pub fn coercivity_check<T: Real>(
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
    top: &TOperator<T>,
) -> Result<CoercivityReport<T>> {
    let tb = top.t.transpose() * &sys.b;
    let s = sym_part(&tb);
    let defl = [sys.one_pr.clone()];
    let sol = sym_gen_eig(&s, &sys.m_h, &defl)?;
    let (c_t, _) = sol
        .smallest_positive()
        .ok_or_else(|| Error::DegenerateSystem("coercivity spectrum is all kernel".into()))?;
    let tat = top.t.transpose() * &sys.a_h1 * &top.t;
    let sol = sym_gen_eig(&sym_part(&tat), &sys.m_h, &defl)?;
    let (lmax, _) = sol
        .largest()
        .ok_or_else(|| Error::DegenerateSystem("empty spectrum".into()))?;
    let big_c_t = lmax.max(T::zero()).sqrt();

    let mut per_element = Vec::with_capacity(mesh.n_elements());
    for el in 0..mesh.n_elements() {
        let ls = local_system(mesh, sys, el)?;
        let tk = build_local_t(mesh, sys, &ls)?;
        let h2 = ls.h * ls.h;
        let g = &ls.m_grad * h2;
        let defl = [ls.one_pr.clone()];
        let sk = sym_part(&(tk.transpose() * &ls.b));
        let (c, _) = sym_gen_eig(&sk, &g, &defl)?
            .smallest_positive()
            .ok_or_else(|| Error::DegenerateSystem(format!("element {el} coercivity")))?;
        let ak = sym_part(&(tk.transpose() * &ls.a_h1 * &tk));
        let (l, _) = sym_gen_eig(&ak, &g, &defl)?
            .largest()
            .ok_or_else(|| Error::DegenerateSystem(format!("element {el} bound")))?;
        per_element.push(ElementCoercivity { c, big_c: l.max(T::zero()).sqrt() });
    }
    Ok(CoercivityReport { c_t, big_c_t, per_element })
}

/// Largest normal-trace value of `T q` at the boundary Gauss-Lobatto nodes,
/// over all elements and all pressure basis functions, with the scale it
/// should be compared against.
#[derive(Debug, Clone, Copy)]
pub struct NormalTraceReport<T> {
    pub max_abs: T,
    pub scale: T,
}

pub fn normal_trace_check<T: Real>(
    mesh: &Mesh<T>,
    sys: &FemSystem<T>,
    top: &TOperator<T>,
) -> Result<NormalTraceReport<T>> {
    let dim = sys.dim;
    let k = sys.k;
    let vel_pts = gauss_lobatto::<T>(k + 1)?.points;
    let mut max_abs = T::zero();
    let mut max_v = T::zero();
    let mut max_cof = T::zero();
    for (el, element) in mesh.elements.iter().enumerate() {
        let vn = &sys.vel_table.elem_nodes[el];
        let pn = &sys.pr_table.elem_nodes[el];
        for (flat, jv) in multi_indices(dim, &[k + 1, k + 1, k + 1]).iter().enumerate() {
            let extremes: Vec<(usize, usize)> = (0..dim)
                .filter_map(|a| {
                    if jv[a] == 0 {
                        Some((a, 0))
                    } else if jv[a] == k {
                        Some((a, 1))
                    } else {
                        None
                    }
                })
                .collect();
            if extremes.is_empty() {
                continue;
            }
            let Some(base) = sys.vel_dof[vn[flat]] else { continue };
            let mut pt = [T::zero(); 3];
            for a in 0..dim {
                pt[a] = vel_pts[jv[a]];
            }
            let jac = element.map.jacobian(&pt)?;
            for &col in pn {
                let mut v = [T::zero(); 3];
                let mut vnorm = T::zero();
                for c in 0..dim {
                    v[c] = top.t[(base + c, col)];
                    vnorm += v[c] * v[c];
                }
                max_v = max_v.max(vnorm.sqrt());
                for &(axis, side) in &extremes {
                    let sign = if side == 1 { T::one() } else { -T::one() };
                    let mut trace = T::zero();
                    let mut cnorm = T::zero();
                    for c in 0..dim {
                        let cn = sign * jac.cof[c][axis];
                        trace += v[c] * cn;
                        cnorm += cn * cn;
                    }
                    max_cof = max_cof.max(cnorm.sqrt());
                    max_abs = max_abs.max(trace.abs());
                }
            }
        }
    }
    Ok(NormalTraceReport { max_abs, scale: (max_v * max_cof).max(T::one()) })
}

/// Per-node audit of the operator applied to one pressure field.
#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub element: usize,
    pub local_node: [usize; 3],
    pub global_node: usize,
    pub class: String,
    pub on_boundary: bool,
    pub assigned: Option<Vec<f64>>,
}

pub fn audit<T: Real>(
    sys: &FemSystem<T>,
    top: &TOperator<T>,
    q: &DVector<T>,
) -> Result<Vec<AuditRecord>> {
    if q.nrows() != sys.n_pr {
        return Err(Error::SizeMismatch("pressure coefficient count".into()));
    }
    let v = top.apply(q);
    let dim = sys.dim;
    let k = sys.k;
    let mut out = Vec::new();
    for (el, nodes) in sys.vel_table.elem_nodes.iter().enumerate() {
        for (flat, jv) in multi_indices(dim, &[k + 1, k + 1, k + 1]).iter().enumerate() {
            let g = nodes[flat];
            let class = match sys.vel_table.elem_class[el][flat] {
                NodeClass::Interior => "interior".to_string(),
                NodeClass::Face(p, q) => format!("face({p},{q})"),
                NodeClass::Edge(t) => format!("edge({t})"),
                NodeClass::Vertex => "vertex".to_string(),
            };
            let assigned = sys.vel_dof[g].map(|base| {
                (0..dim).map(|c| v[base + c].to_f64().unwrap_or(f64::NAN)).collect()
            });
            out.push(AuditRecord {
                element: el,
                local_node: *jv,
                global_node: g,
                class,
                on_boundary: sys.vel_table.on_boundary[g],
                assigned,
            });
        }
    }
    Ok(out)
}

/// Largest singular value of the Jacobian at a point (test support).
pub fn jacobian_sigma_max<T: Real>(jac: &crate::geometry::Jacobian<T>) -> T {
    let d = jac.dim;
    let mut jtj = DMatrix::<T>::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut s = T::zero();
            for i in 0..d {
                s += jac.matrix[i][a] * jac.matrix[i][b];
            }
            jtj[(a, b)] = s;
        }
    }
    let (vals, _) = jacobi_eigen(&jtj).expect("small symmetric eigen");
    vals.last().unwrap().max(T::zero()).sqrt()
}
