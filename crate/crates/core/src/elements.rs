//! Reference-element machinery: quadrature rules, Lagrange P1/P2 shape
//! functions, the (possibly curved) quadratic geometry map, and the Morley
//! plate element basis.

use crate::geometry::{edge_key, Mesh};

/// Quadrature point on the reference triangle {ξ,η ≥ 0, ξ+η ≤ 1}.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub xi: f64,
    pub eta: f64,
    /// Weight normalized so that the rule integrates over the reference
    /// triangle directly (weights sum to 1/2).
    pub w: f64,
}

/// Degree-2 rule: edge midpoints.
pub const RULE_DEG2: [QuadPoint; 3] = [
    QuadPoint {
        xi: 0.5,
        eta: 0.0,
        w: 1.0 / 6.0,
    },
    QuadPoint {
        xi: 0.5,
        eta: 0.5,
        w: 1.0 / 6.0,
    },
    QuadPoint {
        xi: 0.0,
        eta: 0.5,
        w: 1.0 / 6.0,
    },
];

/// Degree-4 six-point rule (two symmetric orbits).
pub fn rule_deg4() -> [QuadPoint; 6] {
    const A1: f64 = 0.445_948_490_915_965;
    const W1: f64 = 0.223_381_589_678_011 / 2.0;
    const A2: f64 = 0.091_576_213_509_771;
    const W2: f64 = 0.109_951_743_655_322 / 2.0;
    [
        QuadPoint {
            xi: A1,
            eta: A1,
            w: W1,
        },
        QuadPoint {
            xi: 1.0 - 2.0 * A1,
            eta: A1,
            w: W1,
        },
        QuadPoint {
            xi: A1,
            eta: 1.0 - 2.0 * A1,
            w: W1,
        },
        QuadPoint {
            xi: A2,
            eta: A2,
            w: W2,
        },
        QuadPoint {
            xi: 1.0 - 2.0 * A2,
            eta: A2,
            w: W2,
        },
        QuadPoint {
            xi: A2,
            eta: 1.0 - 2.0 * A2,
            w: W2,
        },
    ]
}

/// P1 shape values (λ0, λ1, λ2).
pub fn p1_values(xi: f64, eta: f64) -> [f64; 3] {
    [1.0 - xi - eta, xi, eta]
}

/// Constant P1 reference gradients.
pub const P1_GRADS: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// P2 shape values, local node order [v0, v1, v2, e01, e12, e20].
pub fn p2_values(xi: f64, eta: f64) -> [f64; 6] {
    let l0 = 1.0 - xi - eta;
    let l1 = xi;
    let l2 = eta;
    [
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l0 * l1,
        4.0 * l1 * l2,
        4.0 * l2 * l0,
    ]
}

/// P2 reference gradients at (ξ, η).
pub fn p2_gradients(xi: f64, eta: f64) -> [[f64; 2]; 6] {
    let l0 = 1.0 - xi - eta;
    let l1 = xi;
    let l2 = eta;
    // dλ0 = (-1,-1), dλ1 = (1,0), dλ2 = (0,1)
    [
        [-(4.0 * l0 - 1.0), -(4.0 * l0 - 1.0)],
        [4.0 * l1 - 1.0, 0.0],
        [0.0, 4.0 * l2 - 1.0],
        [4.0 * (l0 - l1), -4.0 * l1],
        [4.0 * l2, 4.0 * l1],
        [-4.0 * l2, 4.0 * (l0 - l2)],
    ]
}

/// Local edges of a triangle in the node order used by P2/Morley.
pub const LOCAL_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Geometry of one (possibly curved) element: the six geometry nodes of the
/// quadratic map. Straight elements keep `curved == false` and use the
/// constant affine Jacobian.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub nodes: [[f64; 2]; 6],
    pub curved: bool,
    affine_jac: [[f64; 2]; 2],
    affine_det: f64,
}

impl ElementGeometry {
    pub fn from_mesh(mesh: &Mesh, tri: usize) -> Self {
        let [a, b, c] = mesh.triangles[tri];
        let pa = mesh.vertices[a];
        let pb = mesh.vertices[b];
        let pc = mesh.vertices[c];
        let mut nodes = [
            pa,
            pb,
            pc,
            mid(pa, pb),
            mid(pb, pc),
            mid(pc, pa),
        ];
        let mut curved = false;
        if !mesh.curved_edge_midpoints.is_empty() {
            let verts = [a, b, c];
            for (le, (i, j)) in LOCAL_EDGES.iter().enumerate() {
                let key = edge_key(verts[*i], verts[*j]);
                if let Some(&m) = mesh.curved_edge_midpoints.get(&key) {
                    nodes[3 + le] = m;
                    curved = true;
                }
            }
        }
        let jac = [
            [pb[0] - pa[0], pc[0] - pa[0]],
            [pb[1] - pa[1], pc[1] - pa[1]],
        ];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        ElementGeometry {
            nodes,
            curved,
            affine_jac: jac,
            affine_det: det,
        }
    }

    /// Jacobian matrix dx/dξ and its determinant at a reference point.
    pub fn jacobian(&self, xi: f64, eta: f64) -> ([[f64; 2]; 2], f64) {
        if !self.curved {
            return (self.affine_jac, self.affine_det);
        }
        let g = p2_gradients(xi, eta);
        let mut j = [[0.0; 2]; 2];
        for k in 0..6 {
            j[0][0] += self.nodes[k][0] * g[k][0];
            j[0][1] += self.nodes[k][0] * g[k][1];
            j[1][0] += self.nodes[k][1] * g[k][0];
            j[1][1] += self.nodes[k][1] * g[k][1];
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        (j, det)
    }

    /// Physical coordinates of a reference point.
    pub fn map(&self, xi: f64, eta: f64) -> [f64; 2] {
        if !self.curved {
            let l = p1_values(xi, eta);
            return [
                l[0] * self.nodes[0][0] + l[1] * self.nodes[1][0] + l[2] * self.nodes[2][0],
                l[0] * self.nodes[0][1] + l[1] * self.nodes[1][1] + l[2] * self.nodes[2][1],
            ];
        }
        let n = p2_values(xi, eta);
        let mut p = [0.0; 2];
        for k in 0..6 {
            p[0] += n[k] * self.nodes[k][0];
            p[1] += n[k] * self.nodes[k][1];
        }
        p
    }

    /// Physical gradients of the P2 shapes and the Jacobian determinant.
    pub fn p2_physical_gradients(&self, xi: f64, eta: f64) -> ([[f64; 2]; 6], f64) {
        let (j, det) = self.jacobian(xi, eta);
        let inv = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        // inverse transpose applied to reference gradients: ∇x N = J⁻ᵀ ∇ξ N
        let gref = p2_gradients(xi, eta);
        let mut g = [[0.0; 2]; 6];
        for k in 0..6 {
            g[k][0] = inv[0][0] * gref[k][0] + inv[1][0] * gref[k][1];
            g[k][1] = inv[0][1] * gref[k][0] + inv[1][1] * gref[k][1];
        }
        (g, det)
    }

    /// Physical gradients of the P1 shapes and the Jacobian determinant.
    pub fn p1_physical_gradients(&self, xi: f64, eta: f64) -> ([[f64; 2]; 3], f64) {
        let (j, det) = self.jacobian(xi, eta);
        let inv = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        let mut g = [[0.0; 2]; 3];
        for (k, gr) in P1_GRADS.iter().enumerate() {
            g[k][0] = inv[0][0] * gr[0] + inv[1][0] * gr[1];
            g[k][1] = inv[0][1] * gr[0] + inv[1][1] * gr[1];
        }
        (g, det)
    }
}

fn mid(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
}

/// Morley element on a straight triangle. Degrees of freedom: values at the
/// three vertices, then normal derivatives at the three edge midpoints, taken
/// against the global edge normal (the 90° clockwise rotation of the tangent
/// that runs from the smaller to the larger global vertex index).
#[derive(Debug, Clone)]
pub struct MorleyElement {
    /// Polynomial coefficients per basis function in centered, scaled
    /// monomials [1, X, Y, X², XY, Y²]; X = (x-cx)/s, Y = (y-cy)/s.
    coeffs: [[f64; 6]; 6],
    center: [f64; 2],
    scale: f64,
    pub area: f64,
}

impl MorleyElement {
    pub fn new(mesh: &Mesh, tri: usize) -> Self {
        let verts = mesh.triangles[tri];
        let p: [[f64; 2]; 3] = [
            mesh.vertices[verts[0]],
            mesh.vertices[verts[1]],
            mesh.vertices[verts[2]],
        ];
        let area = crate::geometry::signed_area(p[0], p[1], p[2]);
        let center = [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ];
        let scale = area.abs().sqrt();
        let local = |q: [f64; 2]| [(q[0] - center[0]) / scale, (q[1] - center[1]) / scale];

        // rows: 3 vertex values, 3 edge-midpoint normal derivatives
        let mut c = nalgebra::DMatrix::<f64>::zeros(6, 6);
        let mono = |q: [f64; 2]| -> [f64; 6] {
            let [x, y] = q;
            [1.0, x, y, x * x, x * y, y * y]
        };
        for (r, q) in p.iter().enumerate() {
            let row = mono(local(*q));
            for (k, v) in row.iter().enumerate() {
                c[(r, k)] = *v;
            }
        }
        for (le, (i, j)) in LOCAL_EDGES.iter().enumerate() {
            let (ga, gb) = (verts[*i], verts[*j]);
            let (a, b) = if ga < gb { (p[*i], p[*j]) } else { (p[*j], p[*i]) };
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let n = [t[1], -t[0]];
            let m = local(mid(a, b));
            // d/dn of monomials in local coords, then divide by scale
            let row = [
                0.0,
                n[0] / scale,
                n[1] / scale,
                2.0 * m[0] * n[0] / scale,
                (m[1] * n[0] + m[0] * n[1]) / scale,
                2.0 * m[1] * n[1] / scale,
            ];
            for (k, v) in row.iter().enumerate() {
                c[(3 + le, k)] = *v;
            }
        }
        let inv = c.try_inverse().expect("Morley constraint matrix invertible");
        let mut coeffs = [[0.0; 6]; 6];
        for basis in 0..6 {
            for k in 0..6 {
                coeffs[basis][k] = inv[(k, basis)];
            }
        }
        MorleyElement {
            coeffs,
            center,
            scale,
            area,
        }
    }

    /// Physical Hessians (uxx, uxy, uyy); constant per basis function.
    pub fn hessians(&self) -> [[f64; 3]; 6] {
        let s2 = self.scale * self.scale;
        let mut h = [[0.0; 3]; 6];
        for (b, c) in self.coeffs.iter().enumerate() {
            h[b] = [2.0 * c[3] / s2, c[4] / s2, 2.0 * c[5] / s2];
        }
        h
    }

    /// Physical gradient of basis `b` at physical point `q`.
    pub fn gradient(&self, b: usize, q: [f64; 2]) -> [f64; 2] {
        let x = (q[0] - self.center[0]) / self.scale;
        let y = (q[1] - self.center[1]) / self.scale;
        let c = &self.coeffs[b];
        [
            (c[1] + 2.0 * c[3] * x + c[4] * y) / self.scale,
            (c[2] + c[4] * x + 2.0 * c[5] * y) / self.scale,
        ]
    }

    /// Value of basis `b` at physical point `q`.
    pub fn value(&self, b: usize, q: [f64; 2]) -> f64 {
        let x = (q[0] - self.center[0]) / self.scale;
        let y = (q[1] - self.center[1]) / self.scale;
        let c = &self.coeffs[b];
        c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
    }
}
