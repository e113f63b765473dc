//! Simplicial meshes of planar domains.
//!
//! A [`TriMesh`] stores nodes, positively oriented triangles, and the full
//! derived edge topology. Edges are deduplicated and sorted by their
//! (lower, higher) vertex-index pair, which fixes a deterministic global
//! edge numbering; local edge `j` of a triangle joins its local vertices
//! `j` and `(j+1) % 3`.
//!
//! Built-in generators cover the unit square: a uniform grid (each cell split
//! by the southwest-northeast diagonal), a crisscross grid (each cell split
//! into four by its center, making every center a singular vertex), and the
//! macro-simplex refinement that splits every triangle of a base mesh into
//! three by its barycenter.
//!
//! The text format is line based: a header `nodes N`, then `N` coordinate
//! rows, a header `triangles T`, then `T` rows of 1-based vertex triples.

use crate::elements::ElementGeometry;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

/// Threshold below which a vertex counts as exactly singular (radians).
pub const SINGULAR_TOL: f64 = 1e-8;

/// Default threshold below which a vertex counts as nearly singular.
pub const DEFAULT_KAPPA0: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct TriMesh {
    /// Node coordinates.
    pub nodes: Vec<[f64; 2]>,
    /// Vertex-index triples, positively oriented.
    pub triangles: Vec<[usize; 3]>,
    /// Deduplicated edges as `[lo, hi]` vertex pairs, sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    /// For each triangle, the global edge index of its three local edges.
    pub edge_of_triangle: Vec<[usize; 3]>,
    /// Incident triangles per edge, ascending; boundary edges have one.
    pub triangles_of_edge: Vec<(usize, Option<usize>)>,
    pub boundary_edge: Vec<bool>,
    pub boundary_vertex: Vec<bool>,
    /// Unit normal per edge: the outward normal of the first (lower-index)
    /// incident triangle.
    pub edge_normal: Vec<[f64; 2]>,
}

/// Lineage data produced by [`TriMesh::uniform_refine`].
#[derive(Clone, Debug)]
pub struct RefinementMap {
    /// Parent triangle of each child triangle.
    pub parent_of_tri: Vec<usize>,
    /// The four children of each parent; the medial child is last.
    pub children: Vec<[usize; 4]>,
    /// New node created at the midpoint of each parent edge.
    pub midnode_of_edge: Vec<usize>,
}

/// Vertex-singularity diagnostics; see [`TriMesh::singularity_report`].
#[derive(Clone, Debug)]
pub struct VertexSingularityReport {
    /// Angle defect per vertex (radians); `f64::INFINITY` where undefined
    /// (no adjacent triangle pair at the vertex).
    pub kappa_per_vertex: Vec<f64>,
    /// Minimum of the defined entries.
    pub kappa_min: f64,
    /// Vertices with a defect below [`SINGULAR_TOL`], ascending.
    pub singular_vertices: Vec<usize>,
    /// Vertices with a defect below the configured threshold, ascending.
    pub nearly_singular_vertices: Vec<usize>,
    /// Threshold used for the nearly singular classification.
    pub kappa0: f64,
}

impl VertexSingularityReport {
    pub fn is_singular(&self) -> bool {
        !self.singular_vertices.is_empty()
    }
}

impl TriMesh {
    /// Build a mesh from raw nodes and triangles, deriving all topology.
    ///
    /// Rejects non-positively-oriented triangles and edges shared by more
    /// than two triangles.
    pub fn from_parts(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = nodes.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references node {v}, only {nv} nodes"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            ElementGeometry::new(t, [nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]])?;
        }

        let mut edge_map: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for j in 0..3 {
                let a = tri[j];
                let b = tri[(j + 1) % 3];
                let key = [a.min(b), a.max(b)];
                edge_map.entry(key).or_default().push(t);
            }
        }

        let mut edges = Vec::with_capacity(edge_map.len());
        let mut triangles_of_edge = Vec::with_capacity(edge_map.len());
        let mut boundary_edge = Vec::with_capacity(edge_map.len());
        let mut index_of = BTreeMap::new();
        for (key, mut tris) in edge_map {
            tris.sort_unstable();
            match tris.len() {
                1 => {
                    triangles_of_edge.push((tris[0], None));
                    boundary_edge.push(true);
                }
                2 => {
                    triangles_of_edge.push((tris[0], Some(tris[1])));
                    boundary_edge.push(false);
                }
                n => {
                    return Err(Error::NonConforming(format!(
                        "edge ({}, {}) belongs to {n} triangles",
                        key[0], key[1]
                    )))
                }
            }
            index_of.insert(key, edges.len());
            edges.push(key);
        }

        let edge_of_triangle: Vec<[usize; 3]> = triangles
            .iter()
            .map(|tri| {
                std::array::from_fn(|j| {
                    let a = tri[j];
                    let b = tri[(j + 1) % 3];
                    index_of[&[a.min(b), a.max(b)]]
                })
            })
            .collect();

        let mut boundary_vertex = vec![false; nv];
        for (e, flag) in boundary_edge.iter().enumerate() {
            if *flag {
                boundary_vertex[edges[e][0]] = true;
                boundary_vertex[edges[e][1]] = true;
            }
        }

        let mut edge_normal = Vec::with_capacity(edges.len());
        for (e, &(t0, _)) in triangles_of_edge.iter().enumerate() {
            let tri = triangles[t0];
            let j = (0..3)
                .find(|&j| {
                    let a = tri[j];
                    let b = tri[(j + 1) % 3];
                    [a.min(b), a.max(b)] == edges[e]
                })
                .expect("edge listed in its incident triangle");
            let a = nodes[tri[j]];
            let b = nodes[tri[(j + 1) % 3]];
            let d = [b[0] - a[0], b[1] - a[1]];
            let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
            edge_normal.push([d[1] / len, -d[0] / len]);
        }

        Ok(TriMesh {
            nodes,
            triangles,
            edges,
            edge_of_triangle,
            triangles_of_edge,
            boundary_edge,
            boundary_vertex,
            edge_normal,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_interior_edges(&self) -> usize {
        self.boundary_edge.iter().filter(|b| !**b).count()
    }

    pub fn geometry(&self, t: usize) -> ElementGeometry {
        let tri = self.triangles[t];
        ElementGeometry::new(t, [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]])
            .expect("triangles validated at construction")
    }

    /// Whether the local walk along edge `j` of triangle `t` agrees with the
    /// global lower-to-higher vertex orientation of that edge.
    pub fn edge_forward(&self, t: usize) -> [bool; 3] {
        let tri = self.triangles[t];
        std::array::from_fn(|j| tri[j] < tri[(j + 1) % 3])
    }

    /// Uniform grid on the unit square with `n x n` cells, each split into
    /// two triangles by the southwest-northeast diagonal.
    pub fn unit_square_uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("resolution must be at least 1".into()));
        }
        let h = 1.0 / n as f64;
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([i as f64 * h, j as f64 * h]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = id(i, j);
                let v10 = id(i + 1, j);
                let v01 = id(i, j + 1);
                let v11 = id(i + 1, j + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        TriMesh::from_parts(nodes, triangles)
    }

    /// Crisscross grid on the unit square: `n x n` cells, each split into
    /// four triangles by its center. Every cell center is a singular vertex.
    pub fn unit_square_crisscross(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("resolution must be at least 1".into()));
        }
        let h = 1.0 / n as f64;
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let base = (n + 1) * (n + 1);
        let mut nodes = Vec::with_capacity(base + n * n);
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([i as f64 * h, j as f64 * h]);
            }
        }
        for j in 0..n {
            for i in 0..n {
                nodes.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            }
        }
        let mut triangles = Vec::with_capacity(4 * n * n);
        for j in 0..n {
            for i in 0..n {
                let c = base + j * n + i;
                let v00 = id(i, j);
                let v10 = id(i + 1, j);
                let v01 = id(i, j + 1);
                let v11 = id(i + 1, j + 1);
                triangles.push([v00, v10, c]);
                triangles.push([v10, v11, c]);
                triangles.push([v11, v01, c]);
                triangles.push([v01, v00, c]);
            }
        }
        TriMesh::from_parts(nodes, triangles)
    }

    /// Near-equilateral triangulation of the unit square: an offset lattice
    /// with `n` columns and rows spaced to keep triangles close to
    /// equilateral (boundary rows clamped to the square). This is the base
    /// family for the macro-simplex grids; barycentric children of
    /// near-equilateral triangles stay well shaped, unlike those of right
    /// triangles.
    pub fn unit_square_equilateral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMesh("resolution must be at least 1".into()));
        }
        let m = ((n as f64) / (3.0f64.sqrt() / 2.0)).round().max(1.0) as usize;
        let mut nodes: Vec<[f64; 2]> = Vec::new();
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for j in 0..=m {
            let y = j as f64 / m as f64;
            let mut xs: Vec<f64> = Vec::new();
            if j % 2 == 0 || j == m {
                for i in 0..=n {
                    xs.push(i as f64 / n as f64);
                }
            } else {
                xs.push(0.0);
                for i in 0..n {
                    xs.push((i as f64 + 0.5) / n as f64);
                }
                xs.push(1.0);
            }
            let mut row = Vec::new();
            for &x in &xs {
                row.push(nodes.len());
                nodes.push([x, y]);
            }
            rows.push(row);
        }
        let mut triangles: Vec<[usize; 3]> = Vec::new();
        for j in 0..m {
            // Triangulate the strip between consecutive rows by advancing
            // whichever side has the nearer next node.
            let a = &rows[j];
            let b = &rows[j + 1];
            let (mut i, mut k) = (0usize, 0usize);
            while i + 1 < a.len() || k + 1 < b.len() {
                let advance_lower = if i + 1 >= a.len() {
                    false
                } else if k + 1 >= b.len() {
                    true
                } else {
                    (nodes[a[i + 1]][0] - nodes[b[k]][0]).abs()
                        <= (nodes[b[k + 1]][0] - nodes[a[i]][0]).abs()
                };
                let tri = if advance_lower {
                    i += 1;
                    [a[i - 1], a[i], b[k]]
                } else {
                    k += 1;
                    [a[i], b[k], b[k - 1]]
                };
                let (pa, pb, pc) = (nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
                let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
                if det.abs() < 1e-14 {
                    continue;
                }
                triangles.push(if det > 0.0 { tri } else { [tri[0], tri[2], tri[1]] });
            }
        }
        TriMesh::from_parts(nodes, triangles)
    }

    /// Split every triangle into three by its barycenter (macro-simplex or
    /// Hsieh-Clough-Tocher refinement).
    pub fn hct_refine(&self) -> Result<TriMesh> {
        let mut nodes = self.nodes.clone();
        let mut triangles = Vec::with_capacity(3 * self.n_triangles());
        for tri in &self.triangles {
            let g = [
                (self.nodes[tri[0]][0] + self.nodes[tri[1]][0] + self.nodes[tri[2]][0]) / 3.0,
                (self.nodes[tri[0]][1] + self.nodes[tri[1]][1] + self.nodes[tri[2]][1]) / 3.0,
            ];
            let c = nodes.len();
            nodes.push(g);
            triangles.push([tri[0], tri[1], c]);
            triangles.push([tri[1], tri[2], c]);
            triangles.push([tri[2], tri[0], c]);
        }
        TriMesh::from_parts(nodes, triangles)
    }

    /// Split every triangle into four congruent children via edge midpoints.
    /// Parent nodes keep their indices; the node on parent edge `e` gets
    /// index `n_nodes + e`.
    pub fn uniform_refine(&self) -> Result<(TriMesh, RefinementMap)> {
        let nv = self.n_nodes();
        let mut nodes = self.nodes.clone();
        for e in &self.edges {
            nodes.push([
                0.5 * (self.nodes[e[0]][0] + self.nodes[e[1]][0]),
                0.5 * (self.nodes[e[0]][1] + self.nodes[e[1]][1]),
            ]);
        }
        let midnode_of_edge: Vec<usize> = (0..self.n_edges()).map(|e| nv + e).collect();
        let mut triangles = Vec::with_capacity(4 * self.n_triangles());
        let mut parent_of_tri = Vec::with_capacity(4 * self.n_triangles());
        let mut children = Vec::with_capacity(self.n_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let e = self.edge_of_triangle[t];
            let m01 = midnode_of_edge[e[0]];
            let m12 = midnode_of_edge[e[1]];
            let m20 = midnode_of_edge[e[2]];
            let base = triangles.len();
            triangles.push([tri[0], m01, m20]);
            triangles.push([m01, tri[1], m12]);
            triangles.push([m20, m12, tri[2]]);
            triangles.push([m01, m12, m20]);
            parent_of_tri.extend_from_slice(&[t, t, t, t]);
            children.push([base, base + 1, base + 2, base + 3]);
        }
        let mesh = TriMesh::from_parts(nodes, triangles)?;
        Ok((mesh, RefinementMap { parent_of_tri, children, midnode_of_edge }))
    }

    /// Triangles incident to each vertex.
    pub fn vertex_stars(&self) -> Vec<Vec<usize>> {
        let mut stars = vec![Vec::new(); self.n_nodes()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                stars[v].push(t);
            }
        }
        stars
    }

    /// Interior angle of triangle `t` at vertex `v` (a vertex of `t`).
    fn angle_at(&self, t: usize, v: usize) -> f64 {
        let tri = self.triangles[t];
        let i = tri.iter().position(|&x| x == v).expect("vertex of triangle");
        let p = self.nodes[tri[i]];
        let q = self.nodes[tri[(i + 1) % 3]];
        let r = self.nodes[tri[(i + 2) % 3]];
        let u = [q[0] - p[0], q[1] - p[1]];
        let w = [r[0] - p[0], r[1] - p[1]];
        let cross = u[0] * w[1] - u[1] * w[0];
        let dot = u[0] * w[0] + u[1] * w[1];
        cross.abs().atan2(dot)
    }

    /// Order the triangles around vertex `v` consecutively (a cycle for
    /// interior vertices, a path for boundary vertices).
    fn ordered_star(&self, v: usize, star: &[usize]) -> Vec<usize> {
        if star.len() <= 1 {
            return star.to_vec();
        }
        // Adjacency through edges incident to v.
        let other_vertices = |t: usize| -> [usize; 2] {
            let tri = self.triangles[t];
            let i = tri.iter().position(|&x| x == v).unwrap();
            [tri[(i + 1) % 3], tri[(i + 2) % 3]]
        };
        let neighbor_through = |t: usize, w: usize| -> Option<usize> {
            let key = [v.min(w), v.max(w)];
            let e = self
                .edges
                .binary_search(&key)
                .expect("edge of incident triangle exists");
            let (t0, t1) = self.triangles_of_edge[e];
            if t0 == t { t1 } else { Some(t0) }
        };
        // Choose a starting triangle: for boundary fans, one bordering a
        // boundary edge at v; otherwise the lowest index.
        let start = star
            .iter()
            .copied()
            .find(|&t| {
                other_vertices(t)
                    .iter()
                    .any(|&w| neighbor_through(t, w).is_none())
            })
            .unwrap_or_else(|| star.iter().copied().min().unwrap());
        let mut ordered = vec![start];
        let mut prev: Option<usize> = None;
        loop {
            let t = *ordered.last().unwrap();
            let mut next = None;
            for w in other_vertices(t) {
                if let Some(nb) = neighbor_through(t, w) {
                    if Some(nb) != prev && star.contains(&nb) {
                        next = Some(nb);
                        break;
                    }
                }
            }
            match next {
                Some(nb) if nb != start && ordered.len() < star.len() => {
                    prev = Some(t);
                    ordered.push(nb);
                }
                _ => break,
            }
        }
        ordered
    }

    /// Compute the angle-defect singularity measure per vertex.
    ///
    /// For an interior vertex with consecutively ordered triangle angles
    /// `theta_1..theta_m`, the defect is the maximum of
    /// `|theta_i + theta_{i+1} - pi|` over cyclically adjacent pairs;
    /// boundary vertices use the non-cyclic pairs. Vertices with no adjacent
    /// pair get `infinity` and are excluded from the minimum.
    pub fn singularity_report(&self, kappa0: f64) -> VertexSingularityReport {
        let stars = self.vertex_stars();
        let mut kappa_per_vertex = vec![f64::INFINITY; self.n_nodes()];
        for v in 0..self.n_nodes() {
            let star = self.ordered_star(v, &stars[v]);
            let m = star.len();
            if m < 2 {
                continue;
            }
            let angles: Vec<f64> = star.iter().map(|&t| self.angle_at(t, v)).collect();
            let interior = !self.boundary_vertex[v];
            let pairs = if interior { m } else { m - 1 };
            let mut kappa: f64 = 0.0;
            for i in 0..pairs {
                let s = angles[i] + angles[(i + 1) % m];
                kappa = kappa.max((s - std::f64::consts::PI).abs());
            }
            kappa_per_vertex[v] = kappa;
        }
        let kappa_min = kappa_per_vertex
            .iter()
            .copied()
            .filter(|k| k.is_finite())
            .fold(f64::INFINITY, f64::min);
        let singular_vertices: Vec<usize> = (0..self.n_nodes())
            .filter(|&v| !self.boundary_vertex[v] && kappa_per_vertex[v] < SINGULAR_TOL)
            .collect();
        let nearly_singular_vertices: Vec<usize> = (0..self.n_nodes())
            .filter(|&v| !self.boundary_vertex[v] && kappa_per_vertex[v] < kappa0)
            .collect();
        VertexSingularityReport {
            kappa_per_vertex,
            kappa_min,
            singular_vertices,
            nearly_singular_vertices,
            kappa0,
        }
    }

    /// Check every structural invariant; used by tests and file input.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            let tri = self.triangles[t];
            ElementGeometry::new(t, [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]])?;
        }
        // Incidence counts.
        for (e, &(t0, t1)) in self.triangles_of_edge.iter().enumerate() {
            let expect_boundary = t1.is_none();
            if expect_boundary != self.boundary_edge[e] {
                return Err(Error::InvalidMesh(format!("edge {e} boundary flag mismatch")));
            }
            let key = self.edges[e];
            let count = self
                .triangles
                .iter()
                .filter(|tri| {
                    (0..3).any(|j| {
                        let a = tri[j];
                        let b = tri[(j + 1) % 3];
                        [a.min(b), a.max(b)] == key
                    })
                })
                .count();
            let expected = if expect_boundary { 1 } else { 2 };
            if count != expected {
                return Err(Error::InvalidMesh(format!(
                    "edge {e} has {count} incident triangles, expected {expected}"
                )));
            }
            let _ = t0;
        }
        // Normals: unit length and outward for the first incident triangle.
        for e in 0..self.n_edges() {
            let nu = self.edge_normal[e];
            let len = (nu[0] * nu[0] + nu[1] * nu[1]).sqrt();
            if (len - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMesh(format!("edge {e} normal not unit")));
            }
            let t0 = self.triangles_of_edge[e].0;
            let geom = self.geometry(t0);
            let tri = self.triangles[t0];
            let j = (0..3)
                .find(|&j| {
                    let a = tri[j];
                    let b = tri[(j + 1) % 3];
                    [a.min(b), a.max(b)] == self.edges[e]
                })
                .unwrap();
            let out = geom.edge_normal(j);
            if (out[0] - nu[0]).abs() > 1e-12 || (out[1] - nu[1]).abs() > 1e-12 {
                return Err(Error::InvalidMesh(format!("edge {e} normal orientation")));
            }
        }
        // Boundary edges form closed loops; Euler characteristic matches.
        let mut incident_boundary = vec![0usize; self.n_nodes()];
        for e in 0..self.n_edges() {
            if self.boundary_edge[e] {
                incident_boundary[self.edges[e][0]] += 1;
                incident_boundary[self.edges[e][1]] += 1;
            }
        }
        for (v, &c) in incident_boundary.iter().enumerate() {
            if c != 0 && c != 2 {
                return Err(Error::NonConforming(format!(
                    "boundary vertex {v} touches {c} boundary edges"
                )));
            }
        }
        let loops = self.count_boundary_loops();
        let euler = self.n_nodes() as i64 - self.n_edges() as i64 + self.n_triangles() as i64;
        if euler != 2 - loops as i64 {
            return Err(Error::InvalidMesh(format!(
                "Euler relation violated: V-E+T = {euler}, boundary loops = {loops}"
            )));
        }
        Ok(())
    }

    fn count_boundary_loops(&self) -> usize {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in 0..self.n_edges() {
            if self.boundary_edge[e] {
                adj.entry(self.edges[e][0]).or_default().push(e);
                adj.entry(self.edges[e][1]).or_default().push(e);
            }
        }
        let mut seen = vec![false; self.n_edges()];
        let mut loops = 0;
        for e0 in 0..self.n_edges() {
            if !self.boundary_edge[e0] || seen[e0] {
                continue;
            }
            loops += 1;
            let mut e = e0;
            let mut v = self.edges[e0][0];
            loop {
                seen[e] = true;
                let w = if self.edges[e][0] == v { self.edges[e][1] } else { self.edges[e][0] };
                let next = adj[&w].iter().copied().find(|&f| f != e);
                match next {
                    Some(f) if !seen[f] => {
                        e = f;
                        v = w;
                    }
                    _ => break,
                }
            }
        }
        loops
    }

    /// Reject nodes lying strictly inside another edge (hanging nodes).
    fn check_hanging_nodes(&self) -> Result<()> {
        let tol = 1e-12;
        for pair in self.edges.iter() {
            let a = self.nodes[pair[0]];
            let b = self.nodes[pair[1]];
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let (lox, hix) = (a[0].min(b[0]) - tol, a[0].max(b[0]) + tol);
            let (loy, hiy) = (a[1].min(b[1]) - tol, a[1].max(b[1]) + tol);
            for (v, p) in self.nodes.iter().enumerate() {
                if v == pair[0] || v == pair[1] {
                    continue;
                }
                if p[0] < lox || p[0] > hix || p[1] < loy || p[1] > hiy {
                    continue;
                }
                let ap = [p[0] - a[0], p[1] - a[1]];
                let cross = d[0] * ap[1] - d[1] * ap[0];
                let s = (ap[0] * d[0] + ap[1] * d[1]) / len2;
                if cross.abs() < tol * len2.sqrt().max(1.0) && s > tol && s < 1.0 - tol {
                    return Err(Error::NonConforming(format!(
                        "node {v} hangs on edge ({}, {})",
                        pair[0], pair[1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parse the plain-text mesh format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let expect_kw = |tok: Option<&str>, kw: &str| -> Result<()> {
            match tok {
                Some(t) if t == kw => Ok(()),
                other => Err(Error::MeshFormat(format!("expected '{kw}', found {other:?}"))),
            }
        };
        expect_kw(tokens.next(), "nodes")?;
        let nv: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MeshFormat("node count".into()))?;
        let mut nodes = Vec::with_capacity(nv);
        for i in 0..nv {
            let mut coord = [0.0; 2];
            for c in &mut coord {
                *c = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::MeshFormat(format!("coordinate of node {}", i + 1)))?;
            }
            nodes.push(coord);
        }
        expect_kw(tokens.next(), "triangles")?;
        let nt: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::MeshFormat("triangle count".into()))?;
        let mut triangles = Vec::with_capacity(nt);
        for i in 0..nt {
            let mut tri = [0usize; 3];
            for v in &mut tri {
                let idx: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::MeshFormat(format!("vertex of triangle {}", i + 1)))?;
                if idx == 0 || idx > nv {
                    return Err(Error::MeshFormat(format!(
                        "triangle {} references node {idx}, valid range is 1..={nv}",
                        i + 1
                    )));
                }
                *v = idx - 1;
            }
            triangles.push(tri);
        }
        if tokens.next().is_some() {
            return Err(Error::MeshFormat("trailing content after triangle list".into()));
        }
        let mesh = TriMesh::from_parts(nodes, triangles)?;
        mesh.validate()?;
        mesh.check_hanging_nodes()?;
        Ok(mesh)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        TriMesh::parse(&text)
    }

    /// Serialize in the plain-text format (1-based triangle indices).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nodes {}", self.n_nodes());
        for n in &self.nodes {
            let _ = writeln!(out, "{} {}", n[0], n[1]);
        }
        let _ = writeln!(out, "triangles {}", self.n_triangles());
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Built-in grid families understood by the generators and the CLI.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    Crisscross,
    /// Macro-simplex (barycentric) split of the near-equilateral lattice;
    /// the family behind the published low-order studies.
    Hct,
    /// Macro-simplex split of the uniform right-triangle grid.
    HctUniform,
    FromFile(std::path::PathBuf),
}

impl GridKind {
    /// Build the mesh at resolution `1/h = n`. For `FromFile` the resolution
    /// is ignored.
    pub fn build(&self, n: usize) -> Result<TriMesh> {
        match self {
            GridKind::Uniform => TriMesh::unit_square_uniform(n),
            GridKind::Crisscross => TriMesh::unit_square_crisscross(n),
            GridKind::Hct => TriMesh::unit_square_equilateral(n)?.hct_refine(),
            GridKind::HctUniform => TriMesh::unit_square_uniform(n)?.hct_refine(),
            GridKind::FromFile(path) => TriMesh::from_file(path),
        }
    }

    /// Whether meshes of this family are macro-simplex grids (required for
    /// the low-order methods `k <= 1`).
    pub fn is_macro_simplex(&self) -> bool {
        matches!(self, GridKind::Hct | GridKind::HctUniform)
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(GridKind::Uniform),
            "crisscross" => Ok(GridKind::Crisscross),
            "hct" => Ok(GridKind::Hct),
            "hct-uniform" => Ok(GridKind::HctUniform),
            other => {
                if let Some(path) = other.strip_prefix("file:") {
                    Ok(GridKind::FromFile(path.into()))
                } else {
                    Err(Error::Config(format!(
                        "unknown grid kind '{other}' (expected uniform, crisscross, hct, \
                         hct-uniform, or file:PATH)"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            GridKind::Uniform => "uniform".into(),
            GridKind::Crisscross => "crisscross".into(),
            GridKind::Hct => "hct".into(),
            GridKind::HctUniform => "hct-uniform".into(),
            GridKind::FromFile(p) => format!("file:{}", p.display()),
        }
    }
}
