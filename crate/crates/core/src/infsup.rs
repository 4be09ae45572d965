//! Numerically measured inf-sup constants.
//!
//! Each constant is the square root of the smallest positive eigenvalue of a
//! Schur complement `B^T A^{-1} B` against a pressure Gram matrix, with the
//! constant pressure deflated:
//!
//! * `beta`  — velocity H1 norm against the pressure L2 norm,
//! * `gamma` — velocity L2 norm against the pressure gradient seminorm,
//! * `delta` — velocity H1 norm against the mesh-dependent seminorm
//!   `sum_K h_K^2 |q|_{1,K}^2`.
//!
//! Local (single-element) versions use the element spaces without boundary
//! conditions on interior facets. On the reference element, the two nodal
//! seminorms behind the elementwise analysis are compared spectrally.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::assembly::{FemSystem, LocalSystem, NormKind};
use crate::eig::{jacobi_eigen, schur_complement, sym_gen_eig, KERNEL_RELATIVE_THRESHOLD};
use crate::error::{Error, Result};
use crate::index::multi_indices;
use crate::mesh::Mesh;
use crate::poly::LagrangeBasis1D;
use crate::quadrature::gauss_lobatto;
use crate::real::{lit, Real};

/// A measured constant together with its minimizing pressure mode
/// (zero mean, unit pressure L2 norm).
#[derive(Debug, Clone)]
pub struct InfSupResult<T> {
    pub value: T,
    pub mode: DVector<T>,
}

fn infsup_generic<T: Real>(
    sys: &FemSystem<T>,
    a: &DMatrix<T>,
    g: &DMatrix<T>,
) -> Result<InfSupResult<T>> {
    if sys.n_vel == 0 {
        return Err(Error::DegenerateSystem(
            "no interior velocity degrees of freedom".into(),
        ));
    }
    let s = schur_complement(a, &sys.b)?;
    let sol = sym_gen_eig(&s, g, &[sys.one_pr.clone()])?;
    let (lambda, mode) = sol
        .smallest_positive()
        .ok_or_else(|| Error::DegenerateSystem("inf-sup spectrum is all kernel".into()))?;
    let mode = sys.zero_mean(mode);
    let l2 = sys.norm(NormKind::PrL2, &mode)?;
    let mode = if l2 > T::zero() { mode / l2 } else { mode };
    Ok(InfSupResult { value: lambda.max(T::zero()).sqrt(), mode })
}

/// `beta`: `sup_v b(v,q) / |v|_H1 >= beta |q|_L2`.
pub fn infsup_classical<T: Real>(sys: &FemSystem<T>) -> Result<InfSupResult<T>> {
    infsup_generic(sys, &sys.a_h1, &sys.m_l2)
}

/// `gamma`: `sup_v b(v,q) / |v|_L2 >= gamma |grad q|_L2`.
pub fn infsup_bp<T: Real>(sys: &FemSystem<T>) -> Result<InfSupResult<T>> {
    infsup_generic(sys, &sys.a_l2, &sys.m_grad)
}

/// `delta`: `sup_v b(v,q) / |v|_H1 >= delta |q|_h`.
pub fn infsup_meshdep<T: Real>(sys: &FemSystem<T>) -> Result<InfSupResult<T>> {
    infsup_generic(sys, &sys.a_h1, &sys.m_h)
}

/// Norm pairing of the local inf-sup constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalNormPair {
    /// Velocity H1 norm against `h_K |grad q|`.
    H1OverHGrad,
    /// Velocity L2 norm against `|grad q|`.
    L2OverGrad,
}

/// Remove the constant direction from a positive semidefinite quadratic form
/// by minimizing over constant shifts (a rank-one Schur update). Forms that
/// already kill constants are returned unchanged.
fn deflate_constant_shift<T: Real>(s: &DMatrix<T>, one: &DVector<T>) -> DMatrix<T> {
    let s_one = s * one;
    let pivot = one.dot(&s_one);
    if pivot.abs() <= lit::<T>(1e-14) * s.norm() * one.norm_squared() {
        return s.clone();
    }
    s - &s_one * s_one.transpose() / pivot
}

/// Local inf-sup constant of one element.
///
/// The local form keeps its boundary flux, so constants are not in the kernel
/// of the local Schur complement; the sharp quotient constant minimizes over
/// constant shifts of the pressure before deflation.
pub fn local_infsup<T: Real>(ls: &LocalSystem<T>, pair: LocalNormPair) -> Result<T> {
    if ls.n_vel == 0 {
        return Err(Error::DegenerateSystem(format!(
            "element {} retains no velocity degrees of freedom",
            ls.element
        )));
    }
    let (a, g) = match pair {
        LocalNormPair::H1OverHGrad => (&ls.a_h1, &ls.m_grad * (ls.h * ls.h)),
        LocalNormPair::L2OverGrad => (&ls.a_l2, ls.m_grad.clone()),
    };
    let s = schur_complement(a, &ls.b)?;
    let s = deflate_constant_shift(&s, &ls.one_pr);
    let sol = sym_gen_eig(&s, &g, &[ls.one_pr.clone()])?;
    let (lambda, _) = sol
        .smallest_positive()
        .ok_or_else(|| Error::DegenerateSystem("local inf-sup spectrum is all kernel".into()))?;
    Ok(lambda.max(T::zero()).sqrt())
}

/// Which reference faces count as interior for the nodal seminorm.
#[derive(Debug, Clone, Copy)]
pub struct FaceConfig {
    pub dim: usize,
    /// `interior[axis][side]`.
    pub interior: [[bool; 2]; 3],
}

impl FaceConfig {
    /// The normalized configuration: the `d` faces at coordinate zero are
    /// interior, their opposites lie on the boundary.
    pub fn adjacent_interior(dim: usize) -> Self {
        let mut interior = [[false; 2]; 3];
        for axis in interior.iter_mut().take(dim) {
            axis[0] = true;
        }
        FaceConfig { dim, interior }
    }

    pub fn all_interior(dim: usize) -> Self {
        let mut interior = [[false; 2]; 3];
        for axis in interior.iter_mut().take(dim) {
            *axis = [true, true];
        }
        FaceConfig { dim, interior }
    }

    fn validate(&self) -> Result<()> {
        for axis in 0..self.dim {
            if !self.interior[axis][0] && !self.interior[axis][1] {
                return Err(Error::UnsupportedConfiguration(format!(
                    "no interior face crosses axis {axis}; the kernel argument \
                     needs {} pairwise-adjacent interior faces",
                    self.dim
                )));
            }
        }
        Ok(())
    }
}

/// Spectral comparison of the two nodal seminorms on `Q_{k-1}` of the
/// reference element.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeminormReport<T> {
    /// Smallest positive generalized eigenvalue of `|.|_1^2` against `|.|_2^2`.
    pub lambda_min_pos: T,
    pub lambda_max: T,
    /// Kernel dimension of `|.|_1` alone; the elementwise analysis needs 1.
    pub kernel_dim: usize,
}

/// Matrices of the two seminorms: the class-restricted sum over non-boundary
/// nodes and the full gradient sum over all nodes.
pub fn seminorm_matrices<T: Real>(
    k: usize,
    dim: usize,
    cfg: &FaceConfig,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if k < 2 {
        return Err(Error::InvalidOrder("seminorms live on Q_{k-1} with k >= 2".into()));
    }
    if cfg.dim != dim {
        return Err(Error::Dimension("face configuration dimension mismatch".into()));
    }
    cfg.validate()?;
    let n = k.pow(dim as u32);
    let vel_pts = gauss_lobatto::<T>(k + 1)?.points;
    let pr_basis = LagrangeBasis1D::gauss_lobatto_grid(k)?;
    let vals: Vec<Vec<T>> = vel_pts.iter().map(|&t| pr_basis.values(t)).collect();
    let ders: Vec<Vec<T>> = vel_pts.iter().map(|&t| pr_basis.derivs(t)).collect();
    let mut m1 = DMatrix::<T>::zeros(n, n);
    let mut m2 = DMatrix::<T>::zeros(n, n);
    let pr_counts = [k; 3];
    let mut dq = vec![[T::zero(); 3]; n];
    for jv in multi_indices(dim, &[k + 1, k + 1, k + 1]) {
        // Per-axis derivatives of all pressure basis functions at this node.
        for (bidx, jp) in multi_indices(dim, &pr_counts).iter().enumerate() {
            for axis in 0..dim {
                let mut d = T::one();
                for a in 0..dim {
                    d *= if a == axis { ders[jv[a]][jp[a]] } else { vals[jv[a]][jp[a]] };
                }
                dq[bidx][axis] = d;
            }
        }
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
        for p in 0..n {
            for q in 0..n {
                for axis in 0..dim {
                    m2[(p, q)] += dq[p][axis] * dq[q][axis];
                }
            }
        }
        let on_boundary = extremes.iter().any(|&(a, s)| !cfg.interior[a][s]);
        if on_boundary || extremes.len() == dim {
            continue;
        }
        let active: Vec<usize> =
            (0..dim).filter(|a| !extremes.iter().any(|&(e, _)| e == *a)).collect();
        for p in 0..n {
            for q in 0..n {
                for &axis in &active {
                    m1[(p, q)] += dq[p][axis] * dq[q][axis];
                }
            }
        }
    }
    Ok((m1, m2))
}

pub fn seminorm_equivalence<T: Real>(
    k: usize,
    dim: usize,
    cfg: &FaceConfig,
) -> Result<SeminormReport<T>> {
    let (m1, m2) = seminorm_matrices::<T>(k, dim, cfg)?;
    let (vals1, _) = jacobi_eigen(&m1)?;
    let lmax1 = vals1.last().copied().unwrap_or(T::zero());
    let kernel_dim = vals1
        .iter()
        .filter(|&&v| v <= lit::<T>(KERNEL_RELATIVE_THRESHOLD) * lmax1)
        .count();
    let ones = DVector::from_element(m1.nrows(), T::one());
    let sol = sym_gen_eig(&m1, &m2, &[ones])?;
    let (lambda_min_pos, _) = sol
        .smallest_positive()
        .ok_or_else(|| Error::DegenerateSystem("seminorm pencil is all kernel".into()))?;
    let (lambda_max, _) = sol
        .largest()
        .ok_or_else(|| Error::DegenerateSystem("empty seminorm pencil".into()))?;
    Ok(SeminormReport { lambda_min_pos, lambda_max, kernel_dim })
}

/// One named constant of a [`ConstantReport`].
#[derive(Debug, Clone, Serialize)]
pub struct ConstantEntry {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeBreakdown>,
}

/// Norms of the minimizing pressure mode.
#[derive(Debug, Clone, Serialize)]
pub struct ModeBreakdown {
    pub pr_l2: f64,
    pub pr_grad: f64,
    pub pr_meshdep: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshStats {
    pub n_elements: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub det_over_hd_min: f64,
    pub sigma_over_h_max: f64,
}

/// Measured constants of one run, ready for CSV/JSON export.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantReport {
    pub mesh_id: String,
    pub k: usize,
    pub dim: usize,
    pub n: usize,
    pub theta: f64,
    pub seed: u64,
    pub n_vel_dofs: usize,
    pub n_pr_dofs: usize,
    pub mesh_stats: MeshStats,
    pub constants: Vec<ConstantEntry>,
}

pub fn mesh_stats<T: Real>(mesh: &Mesh<T>) -> Result<MeshStats> {
    let mut h_min = f64::INFINITY;
    let mut h_max = 0.0f64;
    let mut det_min = f64::INFINITY;
    let mut sig_max = 0.0f64;
    for e in &mesh.elements {
        let m = e.map.shape_metrics()?;
        h_min = h_min.min(m.h.to_f64().unwrap());
        h_max = h_max.max(m.h.to_f64().unwrap());
        det_min = det_min.min(m.det_over_hd_min.to_f64().unwrap());
        sig_max = sig_max.max(m.sigma_over_h_max.to_f64().unwrap());
    }
    Ok(MeshStats {
        n_elements: mesh.n_elements(),
        h_min,
        h_max,
        det_over_hd_min: det_min,
        sigma_over_h_max: sig_max,
    })
}

pub fn mode_breakdown<T: Real>(sys: &FemSystem<T>, mode: &DVector<T>) -> Result<ModeBreakdown> {
    Ok(ModeBreakdown {
        pr_l2: sys.norm(NormKind::PrL2, mode)?.to_f64().unwrap(),
        pr_grad: sys.norm(NormKind::PrGrad, mode)?.to_f64().unwrap(),
        pr_meshdep: sys.norm(NormKind::PrMeshDep, mode)?.to_f64().unwrap(),
        mean: sys.pressure_mean(mode).to_f64().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{local_system, AssembleOptions, FemSystem, QuadMode};
    use crate::mesh::{counterexample_mesh, Mesh, StructuredKind, StructuredMesh};
    use approx::assert_relative_eq;

    fn square(n: usize, theta: f64, seed: u64) -> Mesh<f64> {
        StructuredMesh::unit(StructuredKind::Quad2d, n)
            .with_distortion(theta, seed)
            .build()
            .unwrap()
    }

    fn sys_of(mesh: &Mesh<f64>, k: usize) -> FemSystem<f64> {
        FemSystem::assemble(mesh, k, AssembleOptions::default()).unwrap()
    }

    #[test]
    fn single_element_constants_exist() {
        // The interior-facet assumption fails on one element, but the
        // eigenproblems are still well posed; values are small but positive.
        let sys = sys_of(&square(1, 0.0, 0), 2);
        let beta = infsup_classical(&sys).unwrap();
        assert!(beta.value > 0.0);
    }

    #[test]
    fn classical_constant_on_refined_square() {
        let sys = sys_of(&square(4, 0.0, 0), 2);
        let beta = infsup_classical(&sys).unwrap();
        assert!(beta.value > 0.01, "beta = {}", beta.value);
        let breakdown = mode_breakdown(&sys, &beta.mode).unwrap();
        assert!(breakdown.mean.abs() <= 1e-10);
        assert_relative_eq!(breakdown.pr_l2, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn bp_constant_is_stable_under_refinement() {
        let g2 = infsup_bp(&sys_of(&square(2, 0.0, 0), 2)).unwrap().value;
        let g4 = infsup_bp(&sys_of(&square(4, 0.0, 0), 2)).unwrap().value;
        assert!(g4 >= 0.5 * g2, "gamma: {g2} -> {g4}");
        assert!(g4 <= 2.0 * g2);
    }

    #[test]
    fn meshdep_constant_is_stable_under_refinement() {
        let d2 = infsup_meshdep(&sys_of(&square(2, 0.0, 0), 2)).unwrap().value;
        let d4 = infsup_meshdep(&sys_of(&square(4, 0.0, 0), 2)).unwrap().value;
        assert!(d4 >= 0.5 * d2 && d4 <= 2.0 * d2, "delta: {d2} -> {d4}");
    }

    #[test]
    fn sheared_cube_has_positive_bp_constant() {
        let mesh: Mesh<f64> = StructuredMesh::unit(StructuredKind::Parallelepiped3d, 2)
            .with_shear(0.3)
            .build()
            .unwrap();
        let sys = sys_of(&mesh, 2);
        assert!(infsup_bp(&sys).unwrap().value > 0.0);
    }

    #[test]
    fn minimizing_mode_is_scale_invariant_with_the_seminorm_flag() {
        let mesh = square(2, 0.2, 19);
        let scaled = mesh.transformed(|p| [2.0 * p[0], 2.0 * p[1], 0.0]).unwrap();
        let opts = AssembleOptions { mode: QuadMode::ReferenceHighOrder, h1_seminorm: true };
        let s1 = FemSystem::assemble(&mesh, 2, opts).unwrap();
        let s2 = FemSystem::assemble(&scaled, 2, opts).unwrap();
        let m1 = infsup_classical(&s1).unwrap();
        let m2 = infsup_classical(&s2).unwrap();
        // Same nodal coefficients up to sign (modes are L2-normalized, and
        // the scaled domain is 2x larger, so rescale).
        let scale = (s2.domain_volume() / s1.domain_volume()).sqrt();
        let diff_plus = (&m1.mode - &m2.mode * scale).amax();
        let diff_minus = (&m1.mode + &m2.mode * scale).amax();
        assert!(
            diff_plus.min(diff_minus) <= 1e-8,
            "mode changed under scaling: {} / {}",
            diff_plus,
            diff_minus
        );
    }

    #[test]
    fn local_constants_on_the_identity_element() {
        let mesh = square(1, 0.0, 0);
        let sys = sys_of(&mesh, 2);
        let ls = local_system(&mesh, &sys, 0).unwrap();
        let bp = local_infsup(&ls, LocalNormPair::L2OverGrad).unwrap();
        assert!(bp > 0.0);
        let h1 = local_infsup(&ls, LocalNormPair::H1OverHGrad).unwrap();
        assert!(h1 > 0.0);
    }

    #[test]
    fn local_h1_constant_is_scale_invariant_with_seminorm_flag() {
        let mesh = square(2, 0.15, 23);
        let scaled = mesh.transformed(|p| [5.0 * p[0], 5.0 * p[1], 0.0]).unwrap();
        let opts = AssembleOptions { mode: QuadMode::ReferenceHighOrder, h1_seminorm: true };
        let s1 = FemSystem::assemble(&mesh, 2, opts).unwrap();
        let s2 = FemSystem::assemble(&scaled, 2, opts).unwrap();
        for el in 0..mesh.n_elements() {
            let c1 = local_infsup(&local_system(&mesh, &s1, el).unwrap(), LocalNormPair::H1OverHGrad)
                .unwrap();
            let c2 =
                local_infsup(&local_system(&scaled, &s2, el).unwrap(), LocalNormPair::H1OverHGrad)
                    .unwrap();
            assert_relative_eq!(c1, c2, max_relative = 1e-10);
        }
    }

    #[test]
    fn meshdep_dominated_by_grad_gram() {
        // M_h <= (max h)^2 M_grad as quadratic forms.
        let sys = sys_of(&square(3, 0.2, 2), 2);
        let hmax = sys.h_k.iter().cloned().fold(0.0f64, f64::max);
        let diff = &sys.m_grad * (hmax * hmax) - &sys.m_h;
        let (vals, _) = jacobi_eigen(&diff).unwrap();
        let scale = sys.m_grad.norm();
        assert!(vals[0] >= -1e-12 * scale, "smallest eigenvalue {}", vals[0]);
    }

    #[test]
    fn counterexample_mesh_still_yields_finite_constants_with_high_order() {
        let mesh = counterexample_mesh::<f64>();
        let sys = sys_of(&mesh, 2);
        let beta = infsup_classical(&sys).unwrap();
        let gamma = infsup_bp(&sys).unwrap();
        assert!(beta.value.is_finite() && beta.value > 0.0);
        assert!(gamma.value.is_finite() && gamma.value > 0.0);
    }

    #[test]
    fn seminorm_kernel_is_one_dimensional() {
        for dim in [2usize, 3] {
            for k in [2usize, 3, 4] {
                let cfg = FaceConfig::adjacent_interior(dim);
                let rep = seminorm_equivalence::<f64>(k, dim, &cfg).unwrap();
                assert_eq!(rep.kernel_dim, 1, "dim={dim} k={k}");
                assert!(rep.lambda_min_pos > 0.0);
                assert!(rep.lambda_max >= rep.lambda_min_pos);
                assert!(rep.lambda_min_pos >= 1e-8 * rep.lambda_max, "dim={dim} k={k}");
            }
        }
    }

    #[test]
    fn seminorm_grows_with_interior_faces() {
        use rand::{Rng, SeedableRng};
        let k = 3;
        let dim = 2;
        let (m1_three, _) =
            seminorm_matrices::<f64>(k, dim, &FaceConfig::adjacent_interior(dim)).unwrap();
        let (m1_all, _) = seminorm_matrices::<f64>(k, dim, &FaceConfig::all_interior(dim)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let q = DVector::<f64>::from_fn(m1_all.nrows(), |_, _| rng.gen::<f64>() - 0.5);
            let three = q.dot(&(&m1_three * &q));
            let all = q.dot(&(&m1_all * &q));
            assert!(all >= three - 1e-12);
        }
    }

    #[test]
    fn seminorm_rejects_configurations_without_adjacent_faces() {
        let mut cfg = FaceConfig::adjacent_interior(3);
        cfg.interior[1] = [false, false];
        assert!(matches!(
            seminorm_equivalence::<f64>(2, 3, &cfg),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn reports_serialize() {
        let mesh = square(2, 0.0, 0);
        let sys = sys_of(&mesh, 2);
        let beta = infsup_classical(&sys).unwrap();
        let report = ConstantReport {
            mesh_id: "unit-square".into(),
            k: 2,
            dim: 2,
            n: 2,
            theta: 0.0,
            seed: 0,
            n_vel_dofs: sys.n_vel,
            n_pr_dofs: sys.n_pr,
            mesh_stats: mesh_stats(&mesh).unwrap(),
            constants: vec![ConstantEntry {
                name: "beta".into(),
                value: beta.value,
                kernel_dim: None,
                mode: Some(mode_breakdown(&sys, &beta.mode).unwrap()),
            }],
        };
        assert!(serde_json::to_string_pretty(&report).is_ok());
    }
}
