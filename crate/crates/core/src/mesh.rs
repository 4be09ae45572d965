//! Conforming meshes of quadrilaterals (2D) and parallelepipeds / hexahedra
//! (3D), plus the global Gauss-Lobatto node tables used by the finite element
//! spaces.
//!
//! Global node numbering is topological: nodes on shared edges and faces are
//! identified through entity ids and orientation codes, never by coordinate
//! hashing. Facet node positions match across elements because the 1D
//! Gauss-Lobatto point set is symmetric.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    counterexample_hexahedron, local_vertex_index, vertex_eps, GeometryMap, MapKind,
};
use crate::index::{multi_indices, pack};
use crate::quadrature::gauss_lobatto;
use crate::real::{lit, Real};

/// One element: its global vertex indices (multilinear ordering) and map.
#[derive(Debug, Clone)]
pub struct Element<T> {
    pub vertices: Vec<usize>,
    pub map: GeometryMap<T>,
}

/// A conforming mesh. Boundary facets are derived, not stored in files.
#[derive(Debug, Clone)]
pub struct Mesh<T> {
    pub dim: usize,
    pub kind: MapKind,
    pub vertices: Vec<[T; 3]>,
    pub elements: Vec<Element<T>>,
    pub allow_nonaffine: bool,
    boundary_facets: Vec<(usize, usize)>,
}

/// Facet index inside an element: `2 * axis + side`.
pub fn facet_index(axis: usize, side: usize) -> usize {
    2 * axis + side
}

pub fn facet_axis_side(facet: usize) -> (usize, usize) {
    (facet / 2, facet % 2)
}

/// Local vertex indices of a facet; cyclic corner order in 3D.
pub fn local_facet_vertices(dim: usize, axis: usize, side: usize) -> Vec<usize> {
    if dim == 2 {
        let t = 1 - axis;
        let mut eps0 = [0; 3];
        let mut eps1 = [0; 3];
        eps0[axis] = side;
        eps1[axis] = side;
        eps0[t] = 0;
        eps1[t] = 1;
        vec![local_vertex_index(2, eps0), local_vertex_index(2, eps1)]
    } else {
        let free: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        let (p, q) = (free[0], free[1]);
        [(0, 0), (1, 0), (1, 1), (0, 1)]
            .iter()
            .map(|&(s, t)| {
                let mut eps = [0; 3];
                eps[axis] = side;
                eps[p] = s;
                eps[q] = t;
                local_vertex_index(3, eps)
            })
            .collect()
    }
}

/// Local vertex pairs of all element edges, grouped by edge axis.
pub fn local_edges(dim: usize) -> Vec<(usize, usize, usize)> {
    // (axis, from, to) with `from` at eps[axis] = 0.
    let mut out = Vec::new();
    for axis in 0..dim {
        let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
        let combos: &[[usize; 2]] = if dim == 2 {
            &[[0, 0], [1, 0]]
        } else {
            &[[0, 0], [1, 0], [0, 1], [1, 1]]
        };
        for c in combos.iter().take(1 << (dim - 1)) {
            let mut eps0 = [0; 3];
            let mut eps1 = [0; 3];
            for (idx, &o) in others.iter().enumerate() {
                eps0[o] = c[idx];
                eps1[o] = c[idx];
            }
            eps1[axis] = 1;
            out.push((axis, local_vertex_index(dim, eps0), local_vertex_index(dim, eps1)));
        }
    }
    out
}

impl<T: Real> Mesh<T> {
    /// Validate connectivity, build element maps, derive boundary facets.
    pub fn new(
        dim: usize,
        vertices: Vec<[T; 3]>,
        connectivity: Vec<Vec<usize>>,
        kind: MapKind,
        allow_nonaffine: bool,
    ) -> Result<Self> {
        if kind.dim() != dim {
            return Err(Error::Dimension(format!(
                "map kind {:?} does not match mesh dimension {dim}",
                kind
            )));
        }
        if kind == MapKind::Trilinear3d && !allow_nonaffine {
            return Err(Error::UnsupportedMesh(
                "3D elements must be parallelepipeds unless allow_nonaffine is set".into(),
            ));
        }
        let nv = vertices.len();
        let mut elements = Vec::with_capacity(connectivity.len());
        for (el, conn) in connectivity.iter().enumerate() {
            if conn.len() != 1 << dim {
                return Err(Error::NonConforming(format!(
                    "element {el} has {} vertices, expected {}",
                    conn.len(),
                    1 << dim
                )));
            }
            let mut seen = conn.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != conn.len() || *seen.last().unwrap() >= nv {
                return Err(Error::NonConforming(format!(
                    "element {el} has repeated or out-of-range vertices"
                )));
            }
            let map = match kind {
                MapKind::Bilinear2d => {
                    let p = |i: usize| [vertices[conn[i]][0], vertices[conn[i]][1]];
                    GeometryMap::bilinear2d([p(0), p(1), p(2), p(3)])
                }
                MapKind::Trilinear3d => {
                    let mut pts = [[T::zero(); 3]; 8];
                    for (i, p) in pts.iter_mut().enumerate() {
                        *p = vertices[conn[i]];
                    }
                    GeometryMap::trilinear3d(pts)
                }
                MapKind::Affine3d => {
                    let mut pts = [[T::zero(); 3]; 8];
                    for (i, p) in pts.iter_mut().enumerate() {
                        *p = vertices[conn[i]];
                    }
                    GeometryMap::affine3d(pts).map_err(|_| {
                        Error::Generation(format!("element {el} is not a parallelepiped"))
                    })?
                }
            };
            elements.push(Element { vertices: conn.clone(), map });
        }

        // Jacobian positivity over the tensor Gauss-Lobatto sample points.
        let sample = gauss_lobatto::<T>(5)?;
        for (el, element) in elements.iter().enumerate() {
            for j in multi_indices(dim, &[5, 5, 5]) {
                let mut pt = [T::zero(); 3];
                for a in 0..dim {
                    pt[a] = sample.points[j[a]];
                }
                let det = element.map.jacobian_unchecked(&pt).det;
                if det <= T::zero() {
                    return Err(Error::DegenerateElement {
                        element: el,
                        det: det.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }

        // Facet incidence: interior facets appear exactly twice with matching
        // vertex sets and (in 3D) matching corner adjacency.
        let mut facet_use: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
        for (el, element) in elements.iter().enumerate() {
            for axis in 0..dim {
                for side in 0..2 {
                    let locals = local_facet_vertices(dim, axis, side);
                    let mut key: Vec<usize> =
                        locals.iter().map(|&l| element.vertices[l]).collect();
                    key.sort_unstable();
                    facet_use
                        .entry(key)
                        .or_default()
                        .push((el, facet_index(axis, side)));
                }
            }
        }
        let mut boundary_facets = Vec::new();
        for (key, users) in &facet_use {
            match users.len() {
                1 => boundary_facets.push(users[0]),
                2 => {
                    if dim == 3 {
                        let edges = |(el, f): (usize, usize)| -> Vec<(usize, usize)> {
                            let (axis, side) = facet_axis_side(f);
                            let corners: Vec<usize> = local_facet_vertices(3, axis, side)
                                .iter()
                                .map(|&l| elements[el].vertices[l])
                                .collect();
                            (0..4)
                                .map(|i| {
                                    let a = corners[i];
                                    let b = corners[(i + 1) % 4];
                                    (a.min(b), a.max(b))
                                })
                                .collect()
                        };
                        let mut e0 = edges(users[0]);
                        let mut e1 = edges(users[1]);
                        e0.sort_unstable();
                        e1.sort_unstable();
                        if e0 != e1 {
                            return Err(Error::NonConforming(format!(
                                "shared face {key:?} has mismatched corner adjacency"
                            )));
                        }
                    }
                }
                n => {
                    return Err(Error::NonConforming(format!(
                        "facet {key:?} shared by {n} elements"
                    )))
                }
            }
        }
        boundary_facets.sort_unstable();

        Ok(Mesh { dim, kind, vertices, elements, allow_nonaffine, boundary_facets })
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn boundary_facets(&self) -> &[(usize, usize)] {
        &self.boundary_facets
    }

    pub fn is_boundary_facet(&self, element: usize, facet: usize) -> bool {
        self.boundary_facets.binary_search(&(element, facet)).is_ok()
    }

    /// True when every 3D element map is affine (2D meshes always pass).
    pub fn is_affine(&self) -> bool {
        self.kind != MapKind::Trilinear3d
    }

    /// Element diameters `h_K`.
    pub fn diameters(&self) -> Vec<T> {
        self.elements.iter().map(|e| e.map.diameter()).collect()
    }

    /// Every element must own a vertex whose `d` incident facets are all
    /// interior; this is what the element-wise construction of the
    /// pressure-to-velocity map needs.
    pub fn validate_t_assumption(&self) -> bool {
        self.elements.iter().enumerate().all(|(el, _)| {
            (0..(1usize << self.dim)).any(|v| {
                let eps = vertex_eps(self.dim, v);
                (0..self.dim).all(|axis| {
                    !self.is_boundary_facet(el, facet_index(axis, eps[axis]))
                })
            })
        })
    }

    /// Rebuild the mesh with transformed vertex coordinates.
    pub fn transformed(&self, f: impl Fn(&[T; 3]) -> [T; 3]) -> Result<Self> {
        Mesh::new(
            self.dim,
            self.vertices.iter().map(&f).collect(),
            self.elements.iter().map(|e| e.vertices.clone()).collect(),
            self.kind,
            self.allow_nonaffine,
        )
    }

    /// Rebuild the mesh with elements in permuted order.
    pub fn with_relabeled_elements(&self, perm: &[usize]) -> Result<Self> {
        Mesh::new(
            self.dim,
            self.vertices.clone(),
            perm.iter().map(|&p| self.elements[p].vertices.clone()).collect(),
            self.kind,
            self.allow_nonaffine,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let file = MeshFile {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v[..self.dim].iter().map(|c| c.to_f64().unwrap()).collect())
                .collect(),
            elements: self.elements.iter().map(|e| e.vertices.clone()).collect(),
            kind: self.kind,
            allow_nonaffine: self.allow_nonaffine,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MeshFile = serde_json::from_str(text)?;
        let vertices = file
            .vertices
            .iter()
            .map(|v| {
                let mut p = [T::zero(); 3];
                for (a, &c) in v.iter().enumerate().take(3) {
                    p[a] = lit(c);
                }
                p
            })
            .collect();
        Mesh::new(file.dim, vertices, file.elements, file.kind, file.allow_nonaffine)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Mesh::from_json(&std::fs::read_to_string(path)?)
    }

    /// Global Gauss-Lobatto node table for polynomial order `order`.
    pub fn node_table(&self, order: usize) -> Result<NodeTable<T>> {
        NodeTable::build(self, order)
    }
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    elements: Vec<Vec<usize>>,
    kind: MapKind,
    #[serde(default)]
    allow_nonaffine: bool,
}

/// Structured mesh recipe over an axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuredKind {
    Quad2d,
    Parallelepiped3d,
}

#[derive(Debug, Clone)]
pub struct StructuredMesh {
    pub kind: StructuredKind,
    pub subdivisions: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Interior-vertex jitter amplitude relative to the cell size (2D only).
    pub distortion: f64,
    /// Global linear map applied to all vertices (3D only).
    pub shear: Option<[[f64; 3]; 3]>,
    pub seed: u64,
}

impl StructuredMesh {
    pub fn unit(kind: StructuredKind, subdivisions: usize) -> Self {
        StructuredMesh {
            kind,
            subdivisions,
            lo: [0.0; 3],
            hi: [1.0; 3],
            distortion: 0.0,
            shear: None,
            seed: 0,
        }
    }

    pub fn with_distortion(mut self, theta: f64, seed: u64) -> Self {
        self.distortion = theta;
        self.seed = seed;
        self
    }

    /// Shear `x -> x + s*y` as the canonical single-parameter linear map.
    pub fn with_shear(mut self, s: f64) -> Self {
        self.shear = Some([[1.0, s, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        self
    }

    pub fn build<T: Real>(&self) -> Result<Mesh<T>> {
        let n = self.subdivisions;
        if n < 1 {
            return Err(Error::Generation("at least one subdivision required".into()));
        }
        match self.kind {
            StructuredKind::Quad2d => {
                if self.distortion >= 0.5 {
                    return Err(Error::Generation(
                        "distortion must stay below 0.5 to keep elements convex".into(),
                    ));
                }
                let hx = (self.hi[0] - self.lo[0]) / n as f64;
                let hy = (self.hi[1] - self.lo[1]) / n as f64;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
                for j in 0..=n {
                    for i in 0..=n {
                        let mut x = self.lo[0] + i as f64 * hx;
                        let mut y = self.lo[1] + j as f64 * hy;
                        if i > 0 && i < n && j > 0 && j < n && self.distortion > 0.0 {
                            x += (2.0 * rng.gen::<f64>() - 1.0) * self.distortion * hx / 2.0;
                            y += (2.0 * rng.gen::<f64>() - 1.0) * self.distortion * hy / 2.0;
                        }
                        vertices.push([lit::<T>(x), lit::<T>(y), T::zero()]);
                    }
                }
                let vid = |i: usize, j: usize| j * (n + 1) + i;
                let mut connectivity = Vec::with_capacity(n * n);
                for j in 0..n {
                    for i in 0..n {
                        connectivity.push(vec![
                            vid(i, j),
                            vid(i + 1, j),
                            vid(i + 1, j + 1),
                            vid(i, j + 1),
                        ]);
                    }
                }
                Mesh::new(2, vertices, connectivity, MapKind::Bilinear2d, false)
            }
            StructuredKind::Parallelepiped3d => {
                if self.distortion != 0.0 {
                    return Err(Error::Generation(
                        "vertex jitter would break the parallelepiped property in 3D".into(),
                    ));
                }
                let h: Vec<f64> = (0..3).map(|a| (self.hi[a] - self.lo[a]) / n as f64).collect();
                let s = self
                    .shear
                    .unwrap_or([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
                let mut vertices = Vec::with_capacity((n + 1).pow(3));
                for k in 0..=n {
                    for j in 0..=n {
                        for i in 0..=n {
                            let p = [
                                self.lo[0] + i as f64 * h[0],
                                self.lo[1] + j as f64 * h[1],
                                self.lo[2] + k as f64 * h[2],
                            ];
                            let mut q = [0.0; 3];
                            for r in 0..3 {
                                q[r] = s[r][0] * p[0] + s[r][1] * p[1] + s[r][2] * p[2];
                            }
                            vertices.push([lit::<T>(q[0]), lit::<T>(q[1]), lit::<T>(q[2])]);
                        }
                    }
                }
                let vid = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
                let mut connectivity = Vec::with_capacity(n * n * n);
                for k in 0..n {
                    for j in 0..n {
                        for i in 0..n {
                            connectivity.push(vec![
                                vid(i, j, k),
                                vid(i + 1, j, k),
                                vid(i + 1, j + 1, k),
                                vid(i, j + 1, k),
                                vid(i, j, k + 1),
                                vid(i + 1, j, k + 1),
                                vid(i + 1, j + 1, k + 1),
                                vid(i, j + 1, k + 1),
                            ]);
                        }
                    }
                }
                Mesh::new(3, vertices, connectivity, MapKind::Affine3d, false)
            }
        }
    }
}

/// The one-element hexahedron mesh on which the quadrature exactness
/// condition fails; only usable with high-order quadrature.
pub fn counterexample_mesh<T: Real>() -> Mesh<T> {
    let map = counterexample_hexahedron::<T>();
    let vertices: Vec<[T; 3]> = map.control_points().to_vec();
    Mesh::new(
        3,
        vertices,
        vec![(0..8).collect()],
        MapKind::Trilinear3d,
        true,
    )
    .expect("counterexample hexahedron is a valid one-element mesh")
}

/// Entity class of a node relative to one containing element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeClass {
    /// Interior of the element.
    Interior,
    /// Interior of a face spanned by the two given reference axes (3D).
    Face(usize, usize),
    /// Interior of an edge parallel to the given reference axis.
    Edge(usize),
    /// Element vertex.
    Vertex,
}

/// Global Gauss-Lobatto nodes of order `order` over a mesh.
#[derive(Debug, Clone)]
pub struct NodeTable<T> {
    pub order: usize,
    pub dim: usize,
    pub n_nodes: usize,
    pub coords: Vec<[T; 3]>,
    pub on_boundary: Vec<bool>,
    /// Per element: local tensor node (axis 1 fastest) to global node.
    pub elem_nodes: Vec<Vec<usize>>,
    /// Per element: class of each local node.
    pub elem_class: Vec<Vec<NodeClass>>,
}

impl<T: Real> NodeTable<T> {
    fn build(mesh: &Mesh<T>, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidOrder("node table needs order >= 1".into()));
        }
        let dim = mesh.dim;
        let m = order;
        let pts = if m >= 1 {
            gauss_lobatto::<T>(m + 1)?.points
        } else {
            unreachable!()
        };

        // Entity registries in deterministic first-seen order.
        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut face_ids: BTreeMap<[usize; 4], usize> = BTreeMap::new();
        for element in &mesh.elements {
            for &(_, lo, hi) in &local_edges(dim) {
                let a = element.vertices[lo];
                let b = element.vertices[hi];
                let key = (a.min(b), a.max(b));
                let next = edge_ids.len();
                edge_ids.entry(key).or_insert(next);
            }
            if dim == 3 {
                for axis in 0..3 {
                    for side in 0..2 {
                        let mut key = [0usize; 4];
                        for (slot, &l) in local_facet_vertices(3, axis, side).iter().enumerate() {
                            key[slot] = element.vertices[l];
                        }
                        key.sort_unstable();
                        let next = face_ids.len();
                        face_ids.entry(key).or_insert(next);
                    }
                }
            }
        }

        let nv = mesh.vertices.len();
        let per_edge = m - 1;
        let per_face = (m - 1) * (m - 1);
        let per_elem = (m - 1).pow(dim as u32);
        let edge_base = nv;
        let face_base = edge_base + edge_ids.len() * per_edge;
        let elem_base = face_base + face_ids.len() * per_face;
        let n_nodes = elem_base + mesh.n_elements() * per_elem;

        // Boundary entity sets.
        let mut bnd_vertices = vec![false; nv];
        let mut bnd_edges: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        let mut bnd_faces: BTreeMap<[usize; 4], ()> = BTreeMap::new();
        for &(el, f) in &mesh.boundary_facets {
            let (axis, side) = facet_axis_side(f);
            let corners: Vec<usize> = local_facet_vertices(dim, axis, side)
                .iter()
                .map(|&l| mesh.elements[el].vertices[l])
                .collect();
            for &c in &corners {
                bnd_vertices[c] = true;
            }
            if dim == 2 {
                bnd_edges.insert((corners[0].min(corners[1]), corners[0].max(corners[1])), ());
            } else {
                for i in 0..4 {
                    let a = corners[i];
                    let b = corners[(i + 1) % 4];
                    bnd_edges.insert((a.min(b), a.max(b)), ());
                }
                let mut key = [corners[0], corners[1], corners[2], corners[3]];
                key.sort_unstable();
                bnd_faces.insert(key, ());
            }
        }

        let mut coords = vec![[T::zero(); 3]; n_nodes];
        let mut written = vec![false; n_nodes];
        let mut on_boundary = vec![false; n_nodes];
        let mut elem_nodes = Vec::with_capacity(mesh.n_elements());
        let mut elem_class = Vec::with_capacity(mesh.n_elements());
        let counts = [m + 1, m + 1, m + 1];
        let inner = [m.saturating_sub(1).max(1); 3];

        for (el, element) in mesh.elements.iter().enumerate() {
            let mut nodes = Vec::with_capacity((m + 1).pow(dim as u32));
            let mut classes = Vec::with_capacity(nodes.capacity());
            for j in multi_indices(dim, &counts) {
                let extremes: Vec<usize> =
                    (0..dim).filter(|&a| j[a] == 0 || j[a] == m).collect();
                let (global, class, boundary) = if extremes.len() == dim {
                    let mut eps = [0usize; 3];
                    for a in 0..dim {
                        eps[a] = j[a] / m;
                    }
                    let v = element.vertices[local_vertex_index(dim, eps)];
                    (v, NodeClass::Vertex, bnd_vertices[v])
                } else if extremes.is_empty() {
                    let local = pack(dim, &inner, [j[0] - 1, j[1] - 1, j[2].saturating_sub(1)]);
                    (elem_base + el * per_elem + local, NodeClass::Interior, false)
                } else if extremes.len() == dim - 1 {
                    // Edge interior: one free axis.
                    let t = (0..dim).find(|a| !extremes.contains(a)).unwrap();
                    let mut eps0 = [0usize; 3];
                    for &a in &extremes {
                        eps0[a] = j[a] / m;
                    }
                    let mut eps1 = eps0;
                    eps1[t] = 1;
                    let ga = element.vertices[local_vertex_index(dim, eps0)];
                    let gb = element.vertices[local_vertex_index(dim, eps1)];
                    let key = (ga.min(gb), ga.max(gb));
                    let eid = edge_ids[&key];
                    let pos = if ga < gb { j[t] - 1 } else { m - j[t] - 1 };
                    (
                        edge_base + eid * per_edge + pos,
                        NodeClass::Edge(t),
                        bnd_edges.contains_key(&key),
                    )
                } else {
                    // 3D face interior: one extreme axis.
                    let axis = extremes[0];
                    let side = j[axis] / m;
                    let free: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
                    let (p, q) = (free[0], free[1]);
                    let corners: Vec<usize> = local_facet_vertices(3, axis, side)
                        .iter()
                        .map(|&l| element.vertices[l])
                        .collect();
                    let mut key = [corners[0], corners[1], corners[2], corners[3]];
                    key.sort_unstable();
                    let fid = face_ids[&key];
                    let pos = face_canonical_index(&corners, j[p], j[q], m);
                    (
                        face_base + fid * per_face + pos,
                        NodeClass::Face(p, q),
                        bnd_faces.contains_key(&key),
                    )
                };
                if !written[global] {
                    let mut pt = [T::zero(); 3];
                    for a in 0..dim {
                        pt[a] = pts[j[a]];
                    }
                    coords[global] = element.map.eval(&pt);
                    written[global] = true;
                    on_boundary[global] = boundary;
                }
                nodes.push(global);
                classes.push(class);
            }
            elem_nodes.push(nodes);
            elem_class.push(classes);
        }
        debug_assert!(written.iter().all(|&w| w));

        Ok(NodeTable { order: m, dim, n_nodes, coords, on_boundary, elem_nodes, elem_class })
    }

    pub fn nodes_per_element(&self) -> usize {
        (self.order + 1).pow(self.dim as u32)
    }
}

/// Canonical index of a face-interior grid point, invariant under the
/// dihedral reparameterizations the two incident elements may use.
///
/// `corners` are the global vertex ids in cyclic order; `(s, t)` the integer
/// grid coordinates of the node in this element's face parameterization.
fn face_canonical_index(corners: &[usize], s: usize, t: usize, m: usize) -> usize {
    #[derive(Clone, Copy)]
    enum Dir {
        PlusS,
        MinusS,
        PlusT,
        MinusT,
    }
    use Dir::*;
    const TO_NEXT: [Dir; 4] = [PlusS, PlusT, MinusS, MinusT];
    const TO_PREV: [Dir; 4] = [PlusT, MinusS, MinusT, PlusS];
    let r = (0..4).min_by_key(|&i| corners[i]).unwrap();
    let next = corners[(r + 1) % 4];
    let prev = corners[(r + 3) % 4];
    let (u_dir, v_dir) = if next < prev {
        (TO_NEXT[r], TO_PREV[r])
    } else {
        (TO_PREV[r], TO_NEXT[r])
    };
    let apply = |d: Dir| match d {
        PlusS => s,
        MinusS => m - s,
        PlusT => t,
        MinusT => m - t,
    };
    let (u, v) = (apply(u_dir), apply(v_dir));
    (u - 1) + (m - 1) * (v - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Mesh<f64> {
        StructuredMesh::unit(StructuredKind::Quad2d, n).build().unwrap()
    }

    fn unit_cube(n: usize) -> Mesh<f64> {
        StructuredMesh::unit(StructuredKind::Parallelepiped3d, n).build().unwrap()
    }

    #[test]
    fn single_element_counts() {
        let m = unit_square(1);
        assert_eq!(m.n_elements(), 1);
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.boundary_facets().len(), 4);
        assert!(!m.validate_t_assumption());
    }

    #[test]
    fn two_by_two_counts() {
        let m = unit_square(2);
        assert_eq!(m.n_elements(), 4);
        assert_eq!(m.vertices.len(), 9);
        assert_eq!(m.boundary_facets().len(), 8);
        assert!(m.validate_t_assumption());
    }

    #[test]
    fn sheared_cube_is_parallelepiped_mesh() {
        let m: Mesh<f64> = StructuredMesh::unit(StructuredKind::Parallelepiped3d, 2)
            .with_shear(0.3)
            .build()
            .unwrap();
        assert_eq!(m.n_elements(), 8);
        assert!(m.validate_t_assumption());
        for e in &m.elements {
            assert!(e.map.is_parallelepiped_consistent());
        }
    }

    #[test]
    fn counterexample_mesh_shape() {
        let m = counterexample_mesh::<f64>();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.vertices[6], [0.375, 0.375, 1.0]);
        assert!(!m.elements[0].map.is_parallelepiped_consistent());
        assert!(m.allow_nonaffine);
    }

    #[test]
    fn nonaffine_mesh_requires_flag() {
        let m = counterexample_mesh::<f64>();
        let verts = m.vertices.clone();
        let conn = vec![m.elements[0].vertices.clone()];
        assert!(matches!(
            Mesh::<f64>::new(3, verts, conn, MapKind::Trilinear3d, false),
            Err(Error::UnsupportedMesh(_))
        ));
    }

    #[test]
    fn jitter_is_reproducible_and_degenerate_meshes_are_rejected() {
        let a: Mesh<f64> = StructuredMesh::unit(StructuredKind::Quad2d, 3)
            .with_distortion(0.3, 42)
            .build()
            .unwrap();
        let b: Mesh<f64> = StructuredMesh::unit(StructuredKind::Quad2d, 3)
            .with_distortion(0.3, 42)
            .build()
            .unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert!(StructuredMesh::unit(StructuredKind::Quad2d, 3)
            .with_distortion(0.6, 42)
            .build::<f64>()
            .is_err());
    }

    #[test]
    fn triple_shared_facet_is_nonconforming() {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 2.0, 0.0],
            [0.0, 2.0, 0.0],
            [1.0, 3.0, 0.0],
            [0.0, 3.0, 0.0],
        ];
        // Three quads all claiming the edge (2,3).
        let conn = vec![
            vec![0, 1, 2, 3],
            vec![3, 2, 4, 5],
            vec![3, 2, 6, 7],
        ];
        assert!(matches!(
            Mesh::<f64>::new(2, vertices, conn, MapKind::Bilinear2d, false),
            Err(Error::NonConforming(_))
        ));
    }

    #[test]
    fn single_element_order3_class_counts_3d() {
        let m = unit_cube(1);
        let t = m.node_table(3).unwrap();
        assert_eq!(t.n_nodes, 64);
        let count = |class: fn(&NodeClass) -> bool| {
            t.elem_class[0].iter().filter(|c| class(c)).count()
        };
        assert_eq!(count(|c| matches!(c, NodeClass::Interior)), 8);
        assert_eq!(count(|c| matches!(c, NodeClass::Face(_, _))), 24);
        assert_eq!(count(|c| matches!(c, NodeClass::Edge(_))), 24);
        assert_eq!(count(|c| matches!(c, NodeClass::Vertex)), 8);
    }

    #[test]
    fn structured_node_counts() {
        for (n, order) in [(1usize, 2usize), (2, 2), (2, 3), (3, 2)] {
            let t2 = unit_square(n).node_table(order).unwrap();
            assert_eq!(t2.n_nodes, (n * order + 1).pow(2), "2d n={n} order={order}");
            let t3 = unit_cube(n).node_table(order).unwrap();
            assert_eq!(t3.n_nodes, (n * order + 1).pow(3), "3d n={n} order={order}");
        }
        let t = unit_square(2).node_table(3).unwrap();
        assert_eq!(t.n_nodes, 49);
    }

    #[test]
    fn boundary_flags_match_geometry_on_structured_meshes() {
        for mesh in [unit_square(2), unit_square(3)] {
            let t = mesh.node_table(3).unwrap();
            for (g, c) in t.coords.iter().enumerate() {
                let geo = c[0].min(c[1]) < 1e-12 || c[0].max(c[1]) > 1.0 - 1e-12;
                assert_eq!(t.on_boundary[g], geo, "node {g} at {c:?}");
            }
        }
        let mesh = unit_cube(2);
        let t = mesh.node_table(2).unwrap();
        for (g, c) in t.coords.iter().enumerate() {
            let geo = c.iter().any(|&x| x < 1e-12 || x > 1.0 - 1e-12);
            assert_eq!(t.on_boundary[g], geo);
        }
    }

    #[test]
    fn shared_nodes_have_consistent_coordinates_and_classes() {
        for (mesh, order) in [
            (
                StructuredMesh::unit(StructuredKind::Quad2d, 3)
                    .with_distortion(0.25, 7)
                    .build::<f64>()
                    .unwrap(),
                3usize,
            ),
            (
                StructuredMesh::unit(StructuredKind::Parallelepiped3d, 2)
                    .with_shear(0.3)
                    .build::<f64>()
                    .unwrap(),
                3,
            ),
        ] {
            let t = mesh.node_table(order).unwrap();
            let pts = gauss_lobatto::<f64>(order + 1).unwrap().points;
            let h: f64 = mesh.diameters().iter().cloned().fold(0.0, f64::max);
            for (el, nodes) in t.elem_nodes.iter().enumerate() {
                for (local, j) in
                    multi_indices(mesh.dim, &[order + 1, order + 1, order + 1]).iter().enumerate()
                {
                    let mut pt = [0.0; 3];
                    for a in 0..mesh.dim {
                        pt[a] = pts[j[a]];
                    }
                    let phys = mesh.elements[el].map.eval(&pt);
                    let stored = t.coords[nodes[local]];
                    let d: f64 = (0..3).map(|c| (phys[c] - stored[c]).powi(2)).sum::<f64>().sqrt();
                    assert!(d <= 1e-10 * h, "element {el} local {local}: {d}");
                }
            }
        }
    }

    #[test]
    fn interior_facet_nodes_are_identified() {
        let mesh = unit_cube(2);
        let t = mesh.node_table(3).unwrap();
        // Each global node appears in as many elements as contain it; a face
        // node of an interior face must appear exactly twice.
        let mut uses = vec![0usize; t.n_nodes];
        for nodes in &t.elem_nodes {
            let mut seen = nodes.clone();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), nodes.len(), "duplicate node inside an element");
            for &g in nodes {
                uses[g] += 1;
            }
        }
        let interior_face_nodes = uses.iter().filter(|&&u| u == 2).count();
        assert!(interior_face_nodes > 0);
        let total: usize = t.elem_nodes.iter().map(|n| n.len()).sum();
        assert_eq!(total, 8 * 64);
        assert_eq!(t.n_nodes, 343);
    }

    #[test]
    fn json_roundtrip() {
        let mesh: Mesh<f64> = StructuredMesh::unit(StructuredKind::Quad2d, 2)
            .with_distortion(0.2, 3)
            .build()
            .unwrap();
        let text = mesh.to_json().unwrap();
        let back = Mesh::<f64>::from_json(&text).unwrap();
        assert_eq!(mesh.vertices, back.vertices);
        assert_eq!(
            mesh.elements.iter().map(|e| &e.vertices).collect::<Vec<_>>(),
            back.elements.iter().map(|e| &e.vertices).collect::<Vec<_>>()
        );
        assert_eq!(mesh.boundary_facets(), back.boundary_facets());
    }

    #[test]
    fn order_one_table_is_vertex_only() {
        let mesh = unit_square(2);
        let t = mesh.node_table(1).unwrap();
        assert_eq!(t.n_nodes, 9);
        assert!(t
            .elem_class
            .iter()
            .all(|cls| cls.iter().all(|c| matches!(c, NodeClass::Vertex))));
    }
}
