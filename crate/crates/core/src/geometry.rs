//! Domains and conforming triangulations.
//!
//! The canonical flat domains are the unit square, the unit disk, a concentric
//! annulus and simple polygons. Disk and annulus meshes carry quadratic edge
//! geometry: every boundary edge stores the true boundary midpoint, which the
//! isoparametric assembly and the arc-corrected perimeter use.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("h_target must lie in (0, 1], got {0}")]
    BadHTarget(f64),
    #[error("annulus inner radius must lie in (0, 1), got {0}")]
    BadAnnulusRadius(f64),
    #[error("polygon must have at least 3 vertices")]
    PolygonTooSmall,
    #[error("polygon must be counterclockwise and simple (self-intersection detected)")]
    PolygonSelfIntersection,
    #[error("triangle {0} has non-positive signed area")]
    DegenerateTriangle(usize),
    #[error("malformed mesh file: {0}")]
    BadMeshFile(String),
}

/// Domain selector with its analytic geometric data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    UnitSquare,
    UnitDisk,
    Annulus { inner_radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

/// Geometric domain description. `boundary_curvature_integral` is ∫_{∂Ω} H ds
/// with outward normal convention: 2π for simply connected smooth domains,
/// 0 for the annulus. For polygons the sum of exterior angles (2π) is stored
/// and flagged distributional; smooth-boundary formulas do not apply there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub analytic_area: f64,
    pub analytic_perimeter: f64,
    pub boundary_curvature_integral: f64,
    pub curvature_is_distributional: bool,
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        DomainSpec {
            kind: DomainKind::UnitSquare,
            analytic_area: 1.0,
            analytic_perimeter: 4.0,
            boundary_curvature_integral: 2.0 * PI,
            curvature_is_distributional: true,
        }
    }

    pub fn unit_disk() -> Self {
        DomainSpec {
            kind: DomainKind::UnitDisk,
            analytic_area: PI,
            analytic_perimeter: 2.0 * PI,
            boundary_curvature_integral: 2.0 * PI,
            curvature_is_distributional: false,
        }
    }

    pub fn annulus(inner_radius: f64) -> Result<Self, MeshError> {
        if !(inner_radius > 0.0 && inner_radius < 1.0) {
            return Err(MeshError::BadAnnulusRadius(inner_radius));
        }
        Ok(DomainSpec {
            kind: DomainKind::Annulus { inner_radius },
            analytic_area: PI * (1.0 - inner_radius * inner_radius),
            analytic_perimeter: 2.0 * PI * (1.0 + inner_radius),
            boundary_curvature_integral: 0.0,
            curvature_is_distributional: false,
        })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self, MeshError> {
        if vertices.len() < 3 {
            return Err(MeshError::PolygonTooSmall);
        }
        let area = shoelace_area(&vertices);
        if area <= 0.0 || polygon_self_intersects(&vertices) {
            return Err(MeshError::PolygonSelfIntersection);
        }
        let n = vertices.len();
        let perimeter: f64 = (0..n)
            .map(|i| dist(vertices[i], vertices[(i + 1) % n]))
            .sum();
        Ok(DomainSpec {
            kind: DomainKind::Polygon { vertices },
            analytic_area: area,
            analytic_perimeter: perimeter,
            boundary_curvature_integral: 2.0 * PI,
            curvature_is_distributional: true,
        })
    }

    /// True if the domain boundary is curved (disk / annulus).
    pub fn has_curved_boundary(&self) -> bool {
        matches!(self.kind, DomainKind::UnitDisk | DomainKind::Annulus { .. })
    }

    /// Projects a point near the boundary component `tag` onto the analytic
    /// boundary. Straight-sided domains return the point unchanged.
    pub fn project_to_boundary(&self, p: [f64; 2], tag: u32) -> [f64; 2] {
        match &self.kind {
            DomainKind::UnitDisk => normalize_to_radius(p, 1.0),
            DomainKind::Annulus { inner_radius } => {
                let r = if tag == 1 { *inner_radius } else { 1.0 };
                normalize_to_radius(p, r)
            }
            _ => p,
        }
    }
}

fn normalize_to_radius(p: [f64; 2], r: f64) -> [f64; 2] {
    let n = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if n == 0.0 {
        [r, 0.0]
    } else {
        [p[0] * r / n, p[1] * r / n]
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn shoelace_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            v[i][0] * v[j][1] - v[j][0] * v[i][1]
        })
        .sum::<f64>()
}

fn segments_properly_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let cross = |o: [f64; 2], p: [f64; 2], q: [f64; 2]| {
        (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
    };
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn polygon_self_intersects(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in (i + 1)..n {
            // skip adjacent edges (shared vertex)
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            if segments_properly_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// Edge key with canonical vertex order.
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Conforming triangulation. Triangles are counterclockwise; boundary edges
/// carry one tag per connected boundary component (outer = 0, inner = 1).
#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<([usize; 2], u32)>,
    /// Map from canonical boundary-edge key to the true-boundary midpoint.
    pub curved_edge_midpoints: BTreeMap<(usize, usize), [f64; 2]>,
    pub h_max: f64,
    /// The domain this mesh discretizes, when known (needed to re-project
    /// curved midpoints under refinement).
    pub domain: Option<DomainSpec>,
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// All undirected edges, in deterministic first-appearance order over
    /// triangles; each maps to a contiguous edge id.
    pub fn edge_ids(&self) -> BTreeMap<(usize, usize), usize> {
        let mut ids = BTreeMap::new();
        let mut next = 0usize;
        for t in &self.triangles {
            for k in 0..3 {
                let key = edge_key(t[k], t[(k + 1) % 3]);
                ids.entry(key).or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                });
            }
        }
        ids
    }

    pub fn num_edges(&self) -> usize {
        self.edge_ids().len()
    }

    pub fn euler_characteristic(&self) -> isize {
        self.num_vertices() as isize - self.num_edges() as isize + self.num_triangles() as isize
    }

    /// Vertices lying on any boundary edge.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut flags = vec![false; self.num_vertices()];
        for (e, _) in &self.boundary_edges {
            flags[e[0]] = true;
            flags[e[1]] = true;
        }
        (0..self.num_vertices()).filter(|&v| flags[v]).collect()
    }

    pub fn recompute_h_max(&mut self) {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                h = h.max(dist(self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]));
            }
        }
        self.h_max = h;
    }

    /// Structural validation: positive areas, boundary edges belong to exactly
    /// one triangle and form closed loops.
    pub fn validate(&self) -> Result<(), MeshError> {
        for t in 0..self.num_triangles() {
            if self.triangle_area(t) <= 0.0 {
                return Err(MeshError::DegenerateTriangle(t));
            }
        }
        // Count how many triangles contain each edge.
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *counts.entry(edge_key(t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        for (e, _) in &self.boundary_edges {
            let c = counts.get(&edge_key(e[0], e[1])).copied().unwrap_or(0);
            if c != 1 {
                return Err(MeshError::BadMeshFile(format!(
                    "boundary edge {:?} belongs to {} triangles",
                    e, c
                )));
            }
        }
        // Closed loops: every boundary vertex has exactly two incident boundary edges.
        let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
        for (e, _) in &self.boundary_edges {
            *deg.entry(e[0]).or_insert(0) += 1;
            *deg.entry(e[1]).or_insert(0) += 1;
        }
        if deg.values().any(|&d| d != 2) {
            return Err(MeshError::BadMeshFile(
                "boundary edges do not form closed loops".into(),
            ));
        }
        Ok(())
    }
}

pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Generates a conforming triangulation with `h_max <= 1.5 * h_target`.
///
/// Square: structured grid with one diagonal family (keeps the x↔y mesh
/// symmetry). Disk: deterministic polar-graded "spiderweb" with 12 sectors,
/// so the dihedral mesh symmetry keeps analytic eigenvalue pairs exactly
/// degenerate up to angular index 5. Annulus: structured polar band.
pub fn generate_mesh(spec: &DomainSpec, h_target: f64) -> Result<Mesh, MeshError> {
    if !(h_target > 0.0 && h_target <= 1.0) {
        return Err(MeshError::BadHTarget(h_target));
    }
    let mut mesh = match &spec.kind {
        DomainKind::UnitSquare => square_mesh(h_target),
        DomainKind::UnitDisk => disk_mesh(h_target),
        DomainKind::Annulus { inner_radius } => annulus_mesh(*inner_radius, h_target),
        DomainKind::Polygon { vertices } => polygon_mesh(vertices, h_target)?,
    };
    mesh.domain = Some(spec.clone());
    attach_curved_midpoints(&mut mesh);
    mesh.recompute_h_max();
    mesh.validate()?;
    Ok(mesh)
}

fn square_mesh(h: f64) -> Mesh {
    let n = (1.0 / h).ceil().max(1.0) as usize;
    let nv = n + 1;
    let mut vertices = Vec::with_capacity(nv * nv);
    for j in 0..nv {
        for i in 0..nv {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let vid = |i: usize, j: usize| j * nv + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            // diagonal from (i, j) to (i+1, j+1)
            triangles.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
            triangles.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary_edges.push(([vid(i, 0), vid(i + 1, 0)], 0));
        boundary_edges.push(([vid(i + 1, n), vid(i, n)], 0));
        boundary_edges.push(([vid(0, i + 1), vid(0, i)], 0));
        boundary_edges.push(([vid(n, i), vid(n, i + 1)], 0));
    }
    Mesh {
        vertices,
        triangles,
        boundary_edges,
        curved_edge_midpoints: BTreeMap::new(),
        h_max: 0.0,
        domain: None,
    }
}

const DISK_SECTORS: usize = 12;

fn disk_mesh(h: f64) -> Mesh {
    let nr = (1.0 / h).ceil().max(1.0) as usize;
    let k = DISK_SECTORS;
    // ring i (1-based) has k*i vertices at radius i/nr
    let mut vertices = vec![[0.0, 0.0]];
    let mut ring_start = vec![0usize; nr + 1]; // ring 0 is the center vertex
    for i in 1..=nr {
        ring_start[i] = vertices.len();
        let m = k * i;
        let r = i as f64 / nr as f64;
        for j in 0..m {
            let th = 2.0 * PI * j as f64 / m as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let ring_vertex = |ring: usize, j: usize, start: &[usize]| -> usize {
        if ring == 0 {
            0
        } else {
            start[ring] + j % (k * ring)
        }
    };
    let mut triangles = Vec::with_capacity(k * nr * nr);
    // center fan
    for j in 0..k {
        triangles.push([
            0,
            ring_vertex(1, j, &ring_start),
            ring_vertex(1, j + 1, &ring_start),
        ]);
    }
    // bands between ring i-1 and ring i
    for i in 2..=nr {
        for s in 0..k {
            let out = |j: usize| ring_vertex(i, s * i + j, &ring_start);
            let inn = |j: usize| ring_vertex(i - 1, s * (i - 1) + j, &ring_start);
            for j in 0..i - 1 {
                triangles.push([inn(j), out(j), out(j + 1)]);
                triangles.push([inn(j), out(j + 1), inn(j + 1)]);
            }
            triangles.push([inn(i - 1), out(i - 1), out(i)]);
        }
    }
    let m = k * nr;
    let mut boundary_edges = Vec::with_capacity(m);
    for j in 0..m {
        boundary_edges.push((
            [
                ring_vertex(nr, j, &ring_start),
                ring_vertex(nr, j + 1, &ring_start),
            ],
            0,
        ));
    }
    // enforce counterclockwise orientation
    let mut mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        curved_edge_midpoints: BTreeMap::new(),
        h_max: 0.0,
        domain: None,
    };
    for t in 0..mesh.triangles.len() {
        if mesh.triangle_area(t) < 0.0 {
            mesh.triangles[t].swap(1, 2);
        }
    }
    mesh
}

fn annulus_mesh(inner: f64, h: f64) -> Mesh {
    let nr = (((1.0 - inner) / h).ceil() as usize).max(1);
    // angular spacing bounded by h on the outer circle keeps every diagonal
    // under sqrt(2) h
    let nth_raw = ((2.0 * PI / h).ceil() as usize).max(DISK_SECTORS);
    // round up to a multiple of the sector count for dihedral symmetry
    let nth = nth_raw.div_ceil(DISK_SECTORS) * DISK_SECTORS;
    let mut vertices = Vec::with_capacity((nr + 1) * nth);
    for i in 0..=nr {
        let r = inner + (1.0 - inner) * i as f64 / nr as f64;
        for j in 0..nth {
            let th = 2.0 * PI * j as f64 / nth as f64;
            vertices.push([r * th.cos(), r * th.sin()]);
        }
    }
    let vid = |i: usize, j: usize| i * nth + j % nth;
    let mut triangles = Vec::with_capacity(2 * nr * nth);
    for i in 0..nr {
        for j in 0..nth {
            triangles.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
            triangles.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    let mut boundary_edges = Vec::with_capacity(2 * nth);
    for j in 0..nth {
        boundary_edges.push(([vid(nr, j), vid(nr, j + 1)], 0)); // outer
        boundary_edges.push(([vid(0, j + 1), vid(0, j)], 1)); // inner
    }
    Mesh {
        vertices,
        triangles,
        boundary_edges,
        curved_edge_midpoints: BTreeMap::new(),
        h_max: 0.0,
        domain: None,
    }
}

fn polygon_mesh(pts: &[[f64; 2]], h: f64) -> Result<Mesh, MeshError> {
    // Ear clipping, then uniform refinement until h_max <= 1.5 h.
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut triangles = Vec::new();
    let is_ear = |idx: &[usize], i: usize| -> bool {
        let n = idx.len();
        let (a, b, c) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
        if signed_area(pts[a], pts[b], pts[c]) <= 0.0 {
            return false;
        }
        for &p in idx {
            if p == a || p == b || p == c {
                continue;
            }
            if point_in_triangle(pts[p], pts[a], pts[b], pts[c]) {
                return false;
            }
        }
        true
    };
    while idx.len() > 3 {
        let n = idx.len();
        let mut clipped = false;
        for i in 0..n {
            if is_ear(&idx, i) {
                let (a, b, c) = (idx[(i + n - 1) % n], idx[i], idx[(i + 1) % n]);
                triangles.push([a, b, c]);
                idx.remove(i);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(MeshError::PolygonSelfIntersection);
        }
    }
    triangles.push([idx[0], idx[1], idx[2]]);

    let n = pts.len();
    let boundary_edges = (0..n).map(|i| ([i, (i + 1) % n], 0)).collect();
    let mut mesh = Mesh {
        vertices: pts.to_vec(),
        triangles,
        boundary_edges,
        curved_edge_midpoints: BTreeMap::new(),
        h_max: 0.0,
        domain: None,
    };
    mesh.recompute_h_max();
    while mesh.h_max > 1.5 * h {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

fn point_in_triangle(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let s1 = signed_area(a, b, p);
    let s2 = signed_area(b, c, p);
    let s3 = signed_area(c, a, p);
    (s1 >= 0.0 && s2 >= 0.0 && s3 >= 0.0) || (s1 <= 0.0 && s2 <= 0.0 && s3 <= 0.0)
}

fn attach_curved_midpoints(mesh: &mut Mesh) {
    let Some(spec) = mesh.domain.clone() else {
        return;
    };
    if !spec.has_curved_boundary() {
        return;
    }
    let mut map = BTreeMap::new();
    for (e, tag) in &mesh.boundary_edges {
        let a = mesh.vertices[e[0]];
        let b = mesh.vertices[e[1]];
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        map.insert(edge_key(e[0], e[1]), spec.project_to_boundary(mid, *tag));
    }
    mesh.curved_edge_midpoints = map;
}

/// Splits every triangle into four by connecting edge midpoints. New boundary
/// vertices and curved child-edge midpoints are re-projected to the analytic
/// boundary when the domain is known.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let edge_ids = mesh.edge_ids();
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.resize(nv + edge_ids.len(), [0.0, 0.0]);

    let boundary_tag: BTreeMap<(usize, usize), u32> = mesh
        .boundary_edges
        .iter()
        .map(|(e, t)| (edge_key(e[0], e[1]), *t))
        .collect();

    for (&(a, b), &id) in &edge_ids {
        let pa = mesh.vertices[a];
        let pb = mesh.vertices[b];
        let mut mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
        if let Some(tag) = boundary_tag.get(&(a, b)) {
            if let Some(spec) = &mesh.domain {
                if spec.has_curved_boundary() {
                    mid = spec.project_to_boundary(mid, *tag);
                }
            }
        }
        vertices[nv + id] = mid;
    }

    let mid_of = |a: usize, b: usize| nv + edge_ids[&edge_key(a, b)];
    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    for t in &mesh.triangles {
        let [a, b, c] = *t;
        let (mab, mbc, mca) = (mid_of(a, b), mid_of(b, c), mid_of(c, a));
        triangles.push([a, mab, mca]);
        triangles.push([mab, b, mbc]);
        triangles.push([mca, mbc, c]);
        triangles.push([mab, mbc, mca]);
    }

    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for (e, tag) in &mesh.boundary_edges {
        let m = mid_of(e[0], e[1]);
        boundary_edges.push(([e[0], m], *tag));
        boundary_edges.push(([m, e[1]], *tag));
    }

    let mut out = Mesh {
        vertices,
        triangles,
        boundary_edges,
        curved_edge_midpoints: BTreeMap::new(),
        h_max: 0.0,
        domain: mesh.domain.clone(),
    };
    attach_curved_midpoints(&mut out);
    out.recompute_h_max();
    out
}

/// Discrete area (sum of straight-triangle areas) and perimeter (boundary edge
/// lengths; arc-corrected by the quadratic edge geometry when curved midpoints
/// are present).
pub fn mesh_quantities(mesh: &Mesh) -> MeshQuantities {
    let area = (0..mesh.num_triangles())
        .map(|t| mesh.triangle_area(t))
        .sum();
    let mut perimeter = 0.0;
    for (e, _) in &mesh.boundary_edges {
        let a = mesh.vertices[e[0]];
        let b = mesh.vertices[e[1]];
        match mesh.curved_edge_midpoints.get(&edge_key(e[0], e[1])) {
            Some(&m) => perimeter += quadratic_arc_length(a, m, b),
            None => perimeter += dist(a, b),
        }
    }
    MeshQuantities { area, perimeter }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuantities {
    pub area: f64,
    pub perimeter: f64,
}

/// Arc length of the quadratic curve through `a`, `m` (parameter 1/2), `b`,
/// by 4-point Gauss-Legendre quadrature of |x'(s)|.
pub fn quadratic_arc_length(a: [f64; 2], m: [f64; 2], b: [f64; 2]) -> f64 {
    // x(s) = a*(1-s)(1-2s) + m*4s(1-s) + b*s(2s-1), s in [0,1]
    // x'(s) = a*(4s-3) + m*(4-8s) + b*(4s-1)
    const GP: [(f64, f64); 4] = [
        (0.069_431_844_202_973_71, 0.173_927_422_568_726_9),
        (0.330_009_478_207_571_9, 0.326_072_577_431_273_1),
        (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
        (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
    ];
    let mut len = 0.0;
    for (s, w) in GP {
        let da = 4.0 * s - 3.0;
        let dm = 4.0 - 8.0 * s;
        let db = 4.0 * s - 1.0;
        let dx = da * a[0] + dm * m[0] + db * b[0];
        let dy = da * a[1] + dm * m[1] + db * b[1];
        len += w * (dx * dx + dy * dy).sqrt();
    }
    len
}

const MESH_MAGIC: &str = "SLLMESH 1";

/// Writes the line-based mesh format: magic line, `nv nt nb` header, vertex,
/// triangle and boundary lines, then optional curved-midpoint lines
/// `edge_i edge_j mx my` until end of file. All indices 0-based.
pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MESH_MAGIC}");
    let _ = writeln!(
        s,
        "{} {} {}",
        mesh.num_vertices(),
        mesh.num_triangles(),
        mesh.boundary_edges.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.16e} {:.16e}", v[0], v[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for (e, tag) in &mesh.boundary_edges {
        let _ = writeln!(s, "{} {} {}", e[0], e[1], tag);
    }
    for (&(a, b), m) in &mesh.curved_edge_midpoints {
        let _ = writeln!(s, "{} {} {:.16e} {:.16e}", a, b, m[0], m[1]);
    }
    s
}

pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let magic = lines
        .next()
        .ok_or_else(|| MeshError::BadMeshFile("empty file".into()))?;
    if magic.trim() != MESH_MAGIC {
        return Err(MeshError::BadMeshFile(format!(
            "bad magic line {magic:?}, expected {MESH_MAGIC:?}"
        )));
    }
    let header = lines
        .next()
        .ok_or_else(|| MeshError::BadMeshFile("missing header".into()))?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| MeshError::BadMeshFile(format!("bad header: {e}")))?;
    if counts.len() != 3 {
        return Err(MeshError::BadMeshFile("header must be `nv nt nb`".into()));
    }
    let (nv, nt, nb) = (counts[0], counts[1], counts[2]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = lines
            .next()
            .ok_or_else(|| MeshError::BadMeshFile("missing vertex line".into()))?;
        let xy: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| MeshError::BadMeshFile(format!("bad vertex: {e}")))?;
        if xy.len() != 2 {
            return Err(MeshError::BadMeshFile("vertex line must be `x y`".into()));
        }
        vertices.push([xy[0], xy[1]]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let line = lines
            .next()
            .ok_or_else(|| MeshError::BadMeshFile("missing triangle line".into()))?;
        let ijk: Vec<usize> = line
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| MeshError::BadMeshFile(format!("bad triangle: {e}")))?;
        if ijk.len() != 3 {
            return Err(MeshError::BadMeshFile("triangle line must be `i j k`".into()));
        }
        triangles.push([ijk[0], ijk[1], ijk[2]]);
    }
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let line = lines
            .next()
            .ok_or_else(|| MeshError::BadMeshFile("missing boundary line".into()))?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(MeshError::BadMeshFile("boundary line must be `i j tag`".into()));
        }
        let i = f[0]
            .parse::<usize>()
            .map_err(|e| MeshError::BadMeshFile(e.to_string()))?;
        let j = f[1]
            .parse::<usize>()
            .map_err(|e| MeshError::BadMeshFile(e.to_string()))?;
        let tag = f[2]
            .parse::<u32>()
            .map_err(|e| MeshError::BadMeshFile(e.to_string()))?;
        boundary_edges.push(([i, j], tag));
    }
    let mut curved = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(MeshError::BadMeshFile(
                "curved line must be `edge_i edge_j mx my`".into(),
            ));
        }
        let a = f[0]
            .parse::<usize>()
            .map_err(|e| MeshError::BadMeshFile(e.to_string()))?;
        let b = f[1]
            .parse::<usize>()
            .map_err(|e| MeshError::BadMeshFile(e.to_string()))?;
        let mx = f[2]
            .parse::<f64>()
            .map_err(|e| MeshError::BadMeshFile(e.to_string()))?;
        let my = f[3]
            .parse::<f64>()
            .map_err(|e| MeshError::BadMeshFile(e.to_string()))?;
        curved.insert(edge_key(a, b), [mx, my]);
    }
    let mut mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        curved_edge_midpoints: curved,
        h_max: 0.0,
        domain: None,
    };
    mesh.recompute_h_max();
    mesh.validate()?;
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn square_h_half_is_the_3x3_grid() {
        let mesh = generate_mesh(&DomainSpec::unit_square(), 0.5).unwrap();
        assert_eq!(mesh.num_vertices(), 9);
        assert_eq!(mesh.num_triangles(), 8);
        assert_eq!(mesh.boundary_edges.len(), 8);
        assert!(mesh.h_max <= 1.5 * 0.5);
    }

    #[test]
    fn disk_boundary_vertices_on_unit_circle() {
        let mesh = generate_mesh(&DomainSpec::unit_disk(), 0.5).unwrap();
        for v in mesh.boundary_vertices() {
            let p = mesh.vertices[v];
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() <= 1e-12, "radius {r}");
        }
        assert!(!mesh.curved_edge_midpoints.is_empty());
    }

    #[test]
    fn annulus_euler_characteristic_zero() {
        let spec = DomainSpec::annulus(0.5).unwrap();
        let mesh = generate_mesh(&spec, 0.25).unwrap();
        assert_eq!(mesh.euler_characteristic(), 0);
    }

    #[test]
    fn square_disk_euler_characteristic_one() {
        for spec in [DomainSpec::unit_square(), DomainSpec::unit_disk()] {
            let mesh = generate_mesh(&spec, 0.3).unwrap();
            assert_eq!(mesh.euler_characteristic(), 1);
        }
    }

    #[test]
    fn refine_splits_four_ways_and_doubles_boundary() {
        let mesh = generate_mesh(&DomainSpec::unit_square(), 0.5).unwrap();
        let fine = refine_uniform(&mesh);
        assert_eq!(fine.num_triangles(), 32);
        assert_eq!(fine.boundary_edges.len(), 2 * mesh.boundary_edges.len());
        assert_eq!(fine.euler_characteristic(), 1);
        fine.validate().unwrap();
    }

    #[test]
    fn refine_preserves_straight_area_exactly() {
        let spec =
            DomainSpec::polygon(vec![[0.0, 0.0], [2.0, 0.0], [1.5, 1.0], [0.0, 1.5]]).unwrap();
        let mesh = generate_mesh(&spec, 0.9).unwrap();
        let a0 = mesh_quantities(&mesh).area;
        let fine = refine_uniform(&mesh);
        let a1 = mesh_quantities(&fine).area;
        assert_relative_eq!(a0, a1, max_relative = 1e-12);
        assert_relative_eq!(a0, spec.analytic_area, max_relative = 1e-12);
    }

    #[test]
    fn disk_perimeter_increases_towards_analytic_under_refinement() {
        let spec = DomainSpec::unit_disk();
        let mut mesh = generate_mesh(&spec, 0.5).unwrap();
        // straight-chord perimeter is monotone towards 2π under refinement
        let straight = |m: &Mesh| -> f64 {
            m.boundary_edges
                .iter()
                .map(|(e, _)| dist(m.vertices[e[0]], m.vertices[e[1]]))
                .sum()
        };
        let mut last = straight(&mesh);
        for _ in 0..3 {
            mesh = refine_uniform(&mesh);
            let p = straight(&mesh);
            assert!(p > last);
            assert!(p < spec.analytic_perimeter);
            last = p;
        }
    }

    #[test]
    fn square_quantities_exact() {
        for h in [0.5, 0.25, 0.2] {
            let mesh = generate_mesh(&DomainSpec::unit_square(), h).unwrap();
            let q = mesh_quantities(&mesh);
            assert_relative_eq!(q.area, 1.0, max_relative = 1e-12);
            assert_relative_eq!(q.perimeter, 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn disk_quantities_accuracy() {
        let mesh = generate_mesh(&DomainSpec::unit_disk(), 0.1).unwrap();
        let q = mesh_quantities(&mesh);
        assert!((q.area - PI).abs() / PI < 0.01, "area {}", q.area);
        // curved quadratic edges: perimeter within 0.1% of 2π
        assert!(
            (q.perimeter - 2.0 * PI).abs() / (2.0 * PI) < 0.001,
            "perimeter {}",
            q.perimeter
        );
        // straight-chord comparison for reference
        let mut straight_mesh = mesh.clone();
        straight_mesh.curved_edge_midpoints.clear();
        let qs = mesh_quantities(&straight_mesh);
        assert!(qs.perimeter < q.perimeter);
    }

    #[test]
    fn curved_midpoints_reprojected_on_refine() {
        let spec = DomainSpec::unit_disk();
        let mesh = generate_mesh(&spec, 0.4).unwrap();
        let fine = refine_uniform(&mesh);
        for (_, m) in &fine.curved_edge_midpoints {
            let r = (m[0] * m[0] + m[1] * m[1]).sqrt();
            assert!((r - 1.0).abs() <= 1e-12);
        }
        // new boundary vertices also on the circle
        for v in fine.boundary_vertices() {
            let p = fine.vertices[v];
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn mesh_file_round_trip() {
        let spec = DomainSpec::unit_disk();
        let mesh = generate_mesh(&spec, 0.4).unwrap();
        let text = write_mesh(&mesh);
        let back = read_mesh(&text).unwrap();
        assert_eq!(back.num_vertices(), mesh.num_vertices());
        assert_eq!(back.triangles, mesh.triangles);
        assert_eq!(back.boundary_edges, mesh.boundary_edges);
        assert_eq!(
            back.curved_edge_midpoints.len(),
            mesh.curved_edge_midpoints.len()
        );
        for (k, v) in &mesh.curved_edge_midpoints {
            let w = back.curved_edge_midpoints[k];
            assert_eq!(v[0], w[0]);
            assert_eq!(v[1], w[1]);
        }
    }

    #[test]
    fn h_target_out_of_range_rejected() {
        assert!(generate_mesh(&DomainSpec::unit_square(), 0.0).is_err());
        assert!(generate_mesh(&DomainSpec::unit_square(), 1.5).is_err());
    }

    #[test]
    fn self_intersecting_polygon_rejected() {
        let r = DomainSpec::polygon(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(r.is_err());
    }

    #[test]
    fn annulus_bad_radius_rejected() {
        assert!(DomainSpec::annulus(0.0).is_err());
        assert!(DomainSpec::annulus(1.0).is_err());
    }

    #[test]
    fn quadratic_arc_length_matches_circle_arc() {
        // chord of angle 0.2 rad on the unit circle with true midpoint
        let th = 0.2_f64;
        let a = [1.0, 0.0];
        let b = [th.cos(), th.sin()];
        let m = [(th / 2.0).cos(), (th / 2.0).sin()];
        let arc = quadratic_arc_length(a, m, b);
        assert_relative_eq!(arc, th, max_relative = 5e-6);
    }
}
