//! Triangular meshes with the circumcenter geometry used by the finite-volume operators.
//!
//! Every triangle stores its circumcenter `x_K`; every edge stores the distance `d_σ` between
//! the circumcenters on either side (or from the midpoint to `x_K` on the boundary), the
//! transmissibility `τ_σ = |σ| / d_σ` and the linear-interpolation weight `α_{K,L}`.
//! The schemes built on top assume an acute triangulation so that `x_K` lies inside `K`;
//! [`Mesh::validate`] reports any violation instead of refusing to build the mesh.

use std::collections::HashMap;
use std::fmt;

use nalgebra::Vector2;
use thiserror::Error;

pub type Vec2 = Vector2<f64>;

/// Angles at or above `90° - ACUTE_TOLERANCE_DEG` are reported as acuteness failures.
pub const ACUTE_TOLERANCE_DEG: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error at {file} line {line}: {message}")]
    Parse {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("geometry error: {0}")]
    Geometry(String),
}

#[derive(Debug, Clone)]
pub struct Triangle {
    /// Counterclockwise vertex indices.
    pub vertices: [usize; 3],
    /// `edges[i]` joins `vertices[i]` and `vertices[(i + 1) % 3]`.
    pub edges: [usize; 3],
    pub area: f64,
    pub circumcenter: Vec2,
    pub circumradius: f64,
}

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoints ordered counterclockwise as seen from `k_triangle`.
    pub vertices: [usize; 2],
    pub midpoint: Vec2,
    pub length: f64,
    pub k_triangle: usize,
    pub l_triangle: Option<usize>,
    /// Unit normal pointing out of `k_triangle`.
    pub normal_from_k: Vec2,
    pub d_sigma: f64,
    pub tau_sigma: f64,
    /// `α_{K,L} = d(x_L, x_σ) / d(x_K, x_L)`; 1 on boundary edges.
    pub alpha_k_l: f64,
}

impl Edge {
    #[inline]
    pub fn is_interior(&self) -> bool {
        self.l_triangle.is_some()
    }

    /// `α_{L,K} = 1 - α_{K,L}`.
    #[inline]
    pub fn alpha_l_k(&self) -> f64 {
        1.0 - self.alpha_k_l
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MeshStats {
    pub min_tau: f64,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_edge_over_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QualityIssue {
    NotAcute { triangle: usize, angle_deg: f64 },
    ClosureDefect { triangle: usize, defect: f64 },
    CircumcenterOffPerpendicular { edge: usize, deviation: f64 },
    BoundaryEdgeAdjacency { edge: usize },
    AsymmetricAdjacency { triangle: usize, edge: usize },
}

impl fmt::Display for QualityIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QualityIssue::NotAcute {
                triangle,
                angle_deg,
            } => {
                write!(
                    f,
                    "triangle {triangle} has an angle of {angle_deg:.9} degrees (must be < 90)"
                )
            }
            QualityIssue::ClosureDefect { triangle, defect } => {
                write!(f, "triangle {triangle}: sum |σ| n_K,σ = {defect:.3e}")
            }
            QualityIssue::CircumcenterOffPerpendicular { edge, deviation } => {
                write!(
                    f,
                    "edge {edge}: circumcenters deviate {deviation:.3e} from the edge bisector"
                )
            }
            QualityIssue::BoundaryEdgeAdjacency { edge } => {
                write!(f, "boundary edge {edge} does not have exactly one triangle")
            }
            QualityIssue::AsymmetricAdjacency { triangle, edge } => {
                write!(
                    f,
                    "triangle {triangle} lists edge {edge} which does not point back to it"
                )
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct QualityReport {
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_tau: f64,
    pub min_edge_over_h: f64,
    pub max_closure_defect: f64,
    pub max_perpendicular_deviation: f64,
    pub failures: Vec<QualityIssue>,
}

impl QualityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    triangles: Vec<Triangle>,
    edges: Vec<Edge>,
    h: f64,
    interior_edges: Vec<usize>,
    boundary_edges: Vec<usize>,
    stats: MeshStats,
}

impl Mesh {
    /// Builds a mesh from coordinates and triangle connectivity (0-based).
    ///
    /// Clockwise triangles are reoriented. Degenerate triangles, repeated triangles and edges
    /// shared by more than two triangles (or by two overlapping triangles) are rejected.
    pub fn from_parts(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>) -> Result<Mesh, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Topology("mesh has no triangles".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(MeshError::Geometry(format!(
                    "vertex {i} has non-finite coordinates"
                )));
            }
        }
        let scale = bounding_scale(&vertices);

        let mut seen = HashMap::new();
        let mut oriented = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::Topology(format!(
                        "triangle {t} references vertex {v}, mesh has {}",
                        vertices.len()
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::Topology(format!(
                    "triangle {t} repeats a vertex"
                )));
            }
            let mut key = *tri;
            key.sort_unstable();
            if let Some(prev) = seen.insert(key, t) {
                return Err(MeshError::Topology(format!(
                    "triangle {t} repeats triangle {prev}"
                )));
            }
            let [a, b, c] = *tri;
            let signed = cross(vertices[b] - vertices[a], vertices[c] - vertices[a]) * 0.5;
            if signed.is_nan() || signed.abs() <= 1e-14 * scale * scale {
                return Err(MeshError::Geometry(format!("triangle {t} has zero area")));
            }
            oriented.push(if signed > 0.0 { [a, b, c] } else { [a, c, b] });
        }

        // Edge discovery in triangle order keeps numbering deterministic.
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_verts: Vec<[usize; 2]> = Vec::new();
        let mut edge_tris: Vec<(usize, Option<usize>)> = Vec::new();
        let mut tri_edges = Vec::with_capacity(oriented.len());
        for (t, tri) in oriented.iter().enumerate() {
            let mut local = [0usize; 3];
            for i in 0..3 {
                let a = tri[i];
                let b = tri[(i + 1) % 3];
                let key = (a.min(b), a.max(b));
                match edge_index.get(&key) {
                    None => {
                        let id = edge_verts.len();
                        edge_index.insert(key, id);
                        edge_verts.push([a, b]);
                        edge_tris.push((t, None));
                        local[i] = id;
                    }
                    Some(&id) => {
                        let (k, l) = &mut edge_tris[id];
                        if l.is_some() {
                            return Err(MeshError::Topology(format!(
                                "edge ({}, {}) is shared by more than two triangles",
                                key.0, key.1
                            )));
                        }
                        // A consistent orientation traverses a shared edge in opposite directions.
                        if edge_verts[id] != [b, a] {
                            return Err(MeshError::Topology(format!(
                                "triangles {k} and {t} overlap along edge ({}, {})",
                                key.0, key.1
                            )));
                        }
                        *l = Some(t);
                        local[i] = id;
                    }
                }
            }
            tri_edges.push(local);
        }

        let triangles: Vec<Triangle> = oriented
            .iter()
            .zip(&tri_edges)
            .map(|(tri, edges)| {
                let [a, b, c] = tri.map(|v| vertices[v]);
                let area = 0.5 * cross(b - a, c - a);
                let circumcenter = circumcenter(a, b, c);
                Triangle {
                    vertices: *tri,
                    edges: *edges,
                    area,
                    circumcenter,
                    circumradius: (a - circumcenter).norm(),
                }
            })
            .collect();

        let mut edges = Vec::with_capacity(edge_verts.len());
        for (verts, &(k, l)) in edge_verts.iter().zip(&edge_tris) {
            let p = vertices[verts[0]];
            let q = vertices[verts[1]];
            let t = q - p;
            let length = t.norm();
            let midpoint = (p + q) * 0.5;
            let normal_from_k = Vec2::new(t.y, -t.x) / length;
            let xk = triangles[k].circumcenter;
            let (d_sigma, alpha_k_l) = match l {
                Some(l) => {
                    let xl = triangles[l].circumcenter;
                    let d = (xl - xk).norm();
                    let alpha = if d > 0.0 {
                        (xl - midpoint).norm() / d
                    } else {
                        0.5
                    };
                    (d, alpha)
                }
                None => ((midpoint - xk).norm(), 1.0),
            };
            edges.push(Edge {
                vertices: *verts,
                midpoint,
                length,
                k_triangle: k,
                l_triangle: l,
                normal_from_k,
                d_sigma,
                tau_sigma: length / d_sigma,
                alpha_k_l,
            });
        }

        let h = triangles.iter().map(|t| t.circumradius).fold(0.0, f64::max);
        let interior_edges = (0..edges.len())
            .filter(|&e| edges[e].is_interior())
            .collect();
        let boundary_edges = (0..edges.len())
            .filter(|&e| !edges[e].is_interior())
            .collect();

        let mut mesh = Mesh {
            vertices,
            triangles,
            edges,
            h,
            interior_edges,
            boundary_edges,
            stats: MeshStats {
                min_tau: 0.0,
                min_angle_deg: 0.0,
                max_angle_deg: 0.0,
                min_edge_over_h: 0.0,
            },
        };
        mesh.stats = mesh.compute_stats();
        Ok(mesh)
    }

    /// Reads a mesh in the Triangle `.node` / `.ele` text format.
    ///
    /// Indices are 1-based unless the first node is numbered 0, in which case the whole pair of
    /// files is read as 0-based (the convention of the Triangle generator itself).
    pub fn load(node_text: &str, ele_text: &str) -> Result<Mesh, MeshError> {
        let (base, vertices) = parse_nodes(node_text)?;
        let triangles = parse_elements(ele_text, base, vertices.len())?;
        Mesh::from_parts(vertices, triangles)
    }

    /// Rhombus of `rows x cols` cells, each split into two equilateral triangles of edge `side`.
    ///
    /// Vertex `(i, j)` sits at `side * (i + j / 2, j * sqrt(3) / 2)`.
    pub fn equilateral(rows: usize, cols: usize, side: f64) -> Result<Mesh, MeshError> {
        if rows == 0 || cols == 0 {
            return Err(MeshError::Topology(
                "rows and cols must be at least 1".into(),
            ));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(MeshError::Geometry(format!(
                "side must be positive, got {side}"
            )));
        }
        let height = 3f64.sqrt() / 2.0;
        let idx = |i: usize, j: usize| j * (cols + 1) + i;
        let mut vertices = Vec::with_capacity((rows + 1) * (cols + 1));
        for j in 0..=rows {
            for i in 0..=cols {
                vertices.push(Vec2::new(
                    side * (i as f64 + 0.5 * j as f64),
                    side * height * j as f64,
                ));
            }
        }
        let mut triangles = Vec::with_capacity(2 * rows * cols);
        for j in 0..rows {
            for i in 0..cols {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                triangles.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        Mesh::from_parts(vertices, triangles)
    }

    /// Splits every triangle into four similar children through its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(
            self.edges
                .iter()
                .map(|e| (self.vertices[e.vertices[0]] + self.vertices[e.vertices[1]]) * 0.5),
        );
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let [a, b, c] = t.vertices;
            let [eab, ebc, eca] = t.edges.map(|e| nv + e);
            triangles.push([a, eab, eca]);
            triangles.push([eab, b, ebc]);
            triangles.push([eca, ebc, c]);
            triangles.push([eab, ebc, eca]);
        }
        Mesh::from_parts(vertices, triangles).expect("refinement of a valid mesh is valid")
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Maximum circumradius.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn interior_edges(&self) -> &[usize] {
        &self.interior_edges
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn stats(&self) -> MeshStats {
        self.stats
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.triangles.iter().map(|t| t.area).collect()
    }

    /// Outward unit normal of `triangle` on `edge`; `n_{L,σ} = -n_{K,σ}`.
    pub fn outward_normal(&self, triangle: usize, edge: usize) -> Vec2 {
        let e = &self.edges[edge];
        if e.k_triangle == triangle {
            e.normal_from_k
        } else {
            debug_assert_eq!(e.l_triangle, Some(triangle));
            -e.normal_from_k
        }
    }

    /// Interior angles of a triangle in degrees.
    pub fn angles_deg(&self, triangle: usize) -> [f64; 3] {
        let p = self.triangles[triangle].vertices.map(|v| self.vertices[v]);
        let mut out = [0.0; 3];
        for i in 0..3 {
            let u = p[(i + 1) % 3] - p[i];
            let w = p[(i + 2) % 3] - p[i];
            out[i] = u.angle(&w).to_degrees();
        }
        out
    }

    /// True when every triangle is equilateral and every interior weight is 1/2.
    pub fn is_uniform(&self, tol: f64) -> bool {
        let side = self.edges[0].length;
        self.edges
            .iter()
            .all(|e| (e.length - side).abs() <= tol * side)
            && self
                .interior_edges
                .iter()
                .all(|&e| (self.edges[e].alpha_k_l - 0.5).abs() <= tol)
    }

    fn compute_stats(&self) -> MeshStats {
        let mut min_angle = f64::INFINITY;
        let mut max_angle = 0.0f64;
        for t in 0..self.triangles.len() {
            for a in self.angles_deg(t) {
                min_angle = min_angle.min(a);
                max_angle = max_angle.max(a);
            }
        }
        let min_tau = self
            .edges
            .iter()
            .map(|e| e.tau_sigma)
            .fold(f64::INFINITY, f64::min);
        let min_len = self
            .edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min);
        MeshStats {
            min_tau,
            min_angle_deg: min_angle,
            max_angle_deg: max_angle,
            min_edge_over_h: min_len / self.h,
        }
    }

    /// Checks the structural and geometric assumptions of the scheme.
    pub fn validate(&self) -> QualityReport {
        self.validate_with_tolerance(ACUTE_TOLERANCE_DEG)
    }

    pub fn validate_with_tolerance(&self, acute_tol_deg: f64) -> QualityReport {
        let mut failures = Vec::new();
        let mut max_closure = 0.0f64;
        for (t, tri) in self.triangles.iter().enumerate() {
            for a in self.angles_deg(t) {
                if a >= 90.0 - acute_tol_deg {
                    failures.push(QualityIssue::NotAcute {
                        triangle: t,
                        angle_deg: a,
                    });
                    break;
                }
            }
            let mut sum = Vec2::zeros();
            let mut perimeter = 0.0;
            for &e in &tri.edges {
                let edge = &self.edges[e];
                if edge.k_triangle != t && edge.l_triangle != Some(t) {
                    failures.push(QualityIssue::AsymmetricAdjacency {
                        triangle: t,
                        edge: e,
                    });
                }
                sum += self.outward_normal(t, e) * edge.length;
                perimeter += edge.length;
            }
            let defect = sum.norm() / perimeter;
            max_closure = max_closure.max(defect);
            if defect > 1e-13 {
                failures.push(QualityIssue::ClosureDefect {
                    triangle: t,
                    defect,
                });
            }
        }
        let mut incidence = vec![0usize; self.edges.len()];
        for tri in &self.triangles {
            for &e in &tri.edges {
                incidence[e] += 1;
            }
        }
        let mut max_perp = 0.0f64;
        for (i, e) in self.edges.iter().enumerate() {
            let k = &self.triangles[e.k_triangle];
            if !k.edges.contains(&i) {
                failures.push(QualityIssue::AsymmetricAdjacency {
                    triangle: e.k_triangle,
                    edge: i,
                });
            }
            match e.l_triangle {
                Some(l) => {
                    if !self.triangles[l].edges.contains(&i) || l == e.k_triangle {
                        failures.push(QualityIssue::AsymmetricAdjacency {
                            triangle: l,
                            edge: i,
                        });
                    }
                    let tangent = Vec2::new(-e.normal_from_k.y, e.normal_from_k.x);
                    let dev = [k.circumcenter, self.triangles[l].circumcenter]
                        .iter()
                        .map(|x| (x - e.midpoint).dot(&tangent).abs())
                        .fold(0.0, f64::max);
                    max_perp = max_perp.max(dev);
                    if dev > 1e-12 * self.h {
                        failures.push(QualityIssue::CircumcenterOffPerpendicular {
                            edge: i,
                            deviation: dev,
                        });
                    }
                }
                None => {
                    if incidence[i] != 1 {
                        failures.push(QualityIssue::BoundaryEdgeAdjacency { edge: i });
                    }
                }
            }
        }
        QualityReport {
            min_angle_deg: self.stats.min_angle_deg,
            max_angle_deg: self.stats.max_angle_deg,
            min_tau: self.stats.min_tau,
            min_edge_over_h: self.stats.min_edge_over_h,
            max_closure_defect: max_closure,
            max_perpendicular_deviation: max_perp,
            failures,
        }
    }
}

#[inline]
pub(crate) fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn circumcenter(a: Vec2, b: Vec2, c: Vec2) -> Vec2 {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * cross(ab, ac);
    let ab2 = ab.norm_squared();
    let ac2 = ac.norm_squared();
    a + Vec2::new(ac.y * ab2 - ab.y * ac2, ab.x * ac2 - ac.x * ab2) / d
}

fn bounding_scale(vertices: &[Vec2]) -> f64 {
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm().max(f64::MIN_POSITIVE)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let content = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_num<T: std::str::FromStr>(
    file: &'static str,
    line: usize,
    token: &str,
) -> Result<T, MeshError> {
    token.parse().map_err(|_| MeshError::Parse {
        file,
        line,
        message: format!("cannot parse `{token}`"),
    })
}

fn parse_nodes(text: &str) -> Result<(usize, Vec<Vec2>), MeshError> {
    const FILE: &str = ".node";
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or(MeshError::Parse {
        file: FILE,
        line: 0,
        message: "empty file".into(),
    })?;
    if header.len() < 2 {
        return Err(MeshError::Parse {
            file: FILE,
            line: hline,
            message: "header must read `<count> 2 <attributes> <markers>`".into(),
        });
    }
    let count: usize = parse_num(FILE, hline, header[0])?;
    let dim: usize = parse_num(FILE, hline, header[1])?;
    if dim != 2 {
        return Err(MeshError::Parse {
            file: FILE,
            line: hline,
            message: format!("dimension must be 2, got {dim}"),
        });
    }
    let mut base = None;
    let mut vertices = Vec::with_capacity(count);
    for (line, tokens) in lines.take(count) {
        if tokens.len() < 3 {
            return Err(MeshError::Parse {
                file: FILE,
                line,
                message: "expected `<index> <x> <y>`".into(),
            });
        }
        let index: usize = parse_num(FILE, line, tokens[0])?;
        let base = *base.get_or_insert(index.min(1));
        if index != vertices.len() + base {
            return Err(MeshError::Parse {
                file: FILE,
                line,
                message: format!("expected node {}, found {index}", vertices.len() + base),
            });
        }
        let x: f64 = parse_num(FILE, line, tokens[1])?;
        let y: f64 = parse_num(FILE, line, tokens[2])?;
        vertices.push(Vec2::new(x, y));
    }
    if vertices.len() != count {
        return Err(MeshError::Parse {
            file: FILE,
            line: hline,
            message: format!("header announces {count} nodes, found {}", vertices.len()),
        });
    }
    Ok((base.unwrap_or(1), vertices))
}

fn parse_elements(
    text: &str,
    base: usize,
    n_vertices: usize,
) -> Result<Vec<[usize; 3]>, MeshError> {
    const FILE: &str = ".ele";
    let mut lines = data_lines(text);
    let (hline, header) = lines.next().ok_or(MeshError::Parse {
        file: FILE,
        line: 0,
        message: "empty file".into(),
    })?;
    if header.len() < 2 {
        return Err(MeshError::Parse {
            file: FILE,
            line: hline,
            message: "header must read `<count> 3 <attributes>`".into(),
        });
    }
    let count: usize = parse_num(FILE, hline, header[0])?;
    let per: usize = parse_num(FILE, hline, header[1])?;
    if per != 3 {
        return Err(MeshError::Parse {
            file: FILE,
            line: hline,
            message: format!("only 3-node triangles are supported, got {per}"),
        });
    }
    let mut triangles = Vec::with_capacity(count);
    for (line, tokens) in lines.take(count) {
        if tokens.len() < 4 {
            return Err(MeshError::Parse {
                file: FILE,
                line,
                message: "expected `<index> <v1> <v2> <v3>`".into(),
            });
        }
        let mut tri = [0usize; 3];
        for (slot, token) in tri.iter_mut().zip(&tokens[1..4]) {
            let v: usize = parse_num(FILE, line, token)?;
            if v < base || v - base >= n_vertices {
                return Err(MeshError::Parse {
                    file: FILE,
                    line,
                    message: format!("vertex index {v} out of range"),
                });
            }
            *slot = v - base;
        }
        triangles.push(tri);
    }
    if triangles.len() != count {
        return Err(MeshError::Parse {
            file: FILE,
            line: hline,
            message: format!(
                "header announces {count} triangles, found {}",
                triangles.len()
            ),
        });
    }
    Ok(triangles)
}

/// Writes the mesh in Triangle `.node` / `.ele` format with 1-based indices.
pub fn to_triangle_format(mesh: &Mesh) -> (String, String) {
    use std::fmt::Write;
    let mut node = format!("{} 2 0 0\n", mesh.vertices.len());
    for (i, v) in mesh.vertices.iter().enumerate() {
        writeln!(node, "{} {:.17e} {:.17e}", i + 1, v.x, v.y).unwrap();
    }
    let mut ele = format!("{} 3 0\n", mesh.triangles.len());
    for (i, t) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = t.vertices;
        writeln!(ele, "{} {} {} {}", i + 1, a + 1, b + 1, c + 1).unwrap();
    }
    (node, ele)
}
