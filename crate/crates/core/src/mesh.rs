//! Structured tetrahedral meshes of box domains.
//!
//! A [`BoxGrid`] is a tensor grid of strictly increasing coordinate lines
//! together with a sub-box `omega` (the ferromagnet) whose faces lie on grid
//! lines. [`tetrahedralize`] splits every hexahedral cell into six Kuhn
//! tetrahedra around the cell diagonal from its lowest to its highest corner,
//! so neighbouring cells triangulate their shared faces identically.

use crate::error::{EllgError, Result};
use crate::fem::element::TetGeometry;
use crate::linalg::{CsrMatrix, Triplets};
use crate::vec3::{self, Vec3};

/// Local vertex pairs of the six tetrahedron edges.
pub const LOCAL_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

const AXIS_NAMES: [&str; 3] = ["x", "y", "z"];

/// Tensor grid of coordinate lines with a resolved sub-box `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    lines: [Vec<f64>; 3],
    /// Index range `(lo, hi)` of the omega faces along each axis.
    omega: [(usize, usize); 3],
}

/// Validate coordinate lines and locate `omega_box` on them.
///
/// `omega_box` is `(min corner, max corner)`; each corner coordinate has to
/// coincide with a grid line up to a relative tolerance of `1e-10`.
pub fn build_box_grid(
    lines_x: Vec<f64>,
    lines_y: Vec<f64>,
    lines_z: Vec<f64>,
    omega_box: (Vec3, Vec3),
) -> Result<BoxGrid> {
    let lines = [lines_x, lines_y, lines_z];
    let mut omega = [(0, 0); 3];
    for axis in 0..3 {
        let l = &lines[axis];
        if l.len() < 2 {
            return Err(EllgError::Mesh(format!(
                "{} lines need at least 2 entries, got {}",
                AXIS_NAMES[axis],
                l.len()
            )));
        }
        for (i, w) in l.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(EllgError::Mesh(format!(
                    "{} lines not strictly increasing at index {}: {} then {}",
                    AXIS_NAMES[axis],
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        let tol = 1e-10 * (l[l.len() - 1] - l[0]);
        let locate = |c: f64| -> Result<usize> {
            l.iter().position(|&x| (x - c).abs() <= tol).ok_or_else(|| {
                EllgError::Mesh(format!(
                    "omega not resolved: {} = {} is not a grid line",
                    AXIS_NAMES[axis], c
                ))
            })
        };
        let lo = locate(omega_box.0[axis])?;
        let hi = locate(omega_box.1[axis])?;
        if hi <= lo {
            return Err(EllgError::Mesh(format!(
                "omega box is empty along {}",
                AXIS_NAMES[axis]
            )));
        }
        omega[axis] = (lo, hi);
    }
    Ok(BoxGrid { lines, omega })
}

/// Uniformly spaced lines from `lo` to `hi` with spacing close to `h`.
/// The end points are reproduced exactly.
pub fn uniform_lines(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = ((hi - lo) / h).round().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / n as f64
            }
        })
        .collect()
}

/// Offsets of `layers` geometrically graded lines (ratio 2) whose total
/// extent is `pad`: `s, 3s, 7s, ...` with `s = pad / (2^layers - 1)`.
pub fn graded_offsets(pad: f64, layers: usize) -> Vec<f64> {
    let s = pad / ((1u64 << layers) - 1) as f64;
    let mut out = Vec::with_capacity(layers);
    let mut acc = 0.0;
    let mut width = s;
    for i in 0..layers {
        acc += width;
        width *= 2.0;
        out.push(if i + 1 == layers { pad } else { acc });
    }
    out
}

/// Extend the omega grid lines outward by graded layers on every side.
///
/// `pad = [x, y, z_lo, z_hi]`; x and y pads are applied on both sides.
/// The omega lines themselves are kept unchanged, so the mesh inside omega is
/// identical to the mesh of omega alone.
pub fn build_outer_grid(omega_lines: [Vec<f64>; 3], pad: [f64; 4], layers: usize) -> Result<BoxGrid> {
    if let Some(p) = pad.iter().find(|p| !(**p > 0.0)) {
        return Err(EllgError::Mesh(format!("outer pad must be positive, got {p}")));
    }
    if layers == 0 {
        return Err(EllgError::Mesh("at least one outer layer is required".into()));
    }
    let pads = [(pad[0], pad[0]), (pad[1], pad[1]), (pad[2], pad[3])];
    let mut omega_box = (vec3::ZERO, vec3::ZERO);
    let mut out: [Vec<f64>; 3] = Default::default();
    for axis in 0..3 {
        let l = &omega_lines[axis];
        if l.len() < 2 {
            return Err(EllgError::Mesh("omega lines need at least 2 entries".into()));
        }
        let (lo, hi) = (l[0], l[l.len() - 1]);
        omega_box.0[axis] = lo;
        omega_box.1[axis] = hi;
        let mut v: Vec<f64> = graded_offsets(pads[axis].0, layers)
            .into_iter()
            .rev()
            .map(|d| lo - d)
            .collect();
        v.extend_from_slice(l);
        v.extend(graded_offsets(pads[axis].1, layers).into_iter().map(|d| hi + d));
        out[axis] = v;
    }
    let [x, y, z] = out;
    build_box_grid(x, y, z, omega_box)
}

impl BoxGrid {
    pub fn lines(&self, axis: usize) -> &[f64] {
        &self.lines[axis]
    }

    pub fn omega_index_range(&self, axis: usize) -> (usize, usize) {
        self.omega[axis]
    }

    pub fn node_count(&self) -> usize {
        self.lines.iter().map(Vec::len).product()
    }

    pub fn cell_count(&self) -> usize {
        self.lines.iter().map(|l| l.len() - 1).product()
    }

    pub fn omega_min(&self) -> Vec3 {
        [0, 1, 2].map(|a| self.lines[a][self.omega[a].0])
    }

    pub fn omega_max(&self) -> Vec3 {
        [0, 1, 2].map(|a| self.lines[a][self.omega[a].1])
    }

    pub fn domain_min(&self) -> Vec3 {
        [0, 1, 2].map(|a| self.lines[a][0])
    }

    pub fn domain_max(&self) -> Vec3 {
        [0, 1, 2].map(|a| *self.lines[a].last().unwrap())
    }

    fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let nx = self.lines[0].len();
        let ny = self.lines[1].len();
        i + nx * (j + ny * k)
    }
}

fn volume(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    let e1 = vec3::sub(b, a);
    let e2 = vec3::sub(c, a);
    let e3 = vec3::sub(d, a);
    vec3::dot(e1, vec3::cross(e2, e3)) / 6.0
}

/// Tetrahedral triangulation of Omega with the ferromagnet omega resolved.
///
/// Edges are globally oriented from the lower to the higher node index and
/// ordered lexicographically. Omega nodes get a local numbering (the order of
/// `omega_nodes`), which is the numbering used by all nodal fields.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    tet_edges: Vec<[(usize, f64); 6]>,
    omega_tets: Vec<usize>,
    omega_nodes: Vec<usize>,
    omega_local: Vec<Option<usize>>,
}

/// Kuhn subdivision of every grid cell into six tetrahedra.
pub fn tetrahedralize(grid: &BoxGrid) -> Mesh {
    let [lx, ly, lz] = &grid.lines;
    let mut nodes = Vec::with_capacity(grid.node_count());
    for &z in lz {
        for &y in ly {
            for &x in lx {
                nodes.push([x, y, z]);
            }
        }
    }
    // monotone lattice paths 000 -> 111, one per axis permutation
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::with_capacity(6 * grid.cell_count());
    let mut omega_tets = Vec::new();
    let inside = |axis: usize, c: usize| c >= grid.omega[axis].0 && c < grid.omega[axis].1;
    for k in 0..lz.len() - 1 {
        for j in 0..ly.len() - 1 {
            for i in 0..lx.len() - 1 {
                let in_omega = inside(0, i) && inside(1, j) && inside(2, k);
                for perm in PERMS {
                    let mut corner = [i, j, k];
                    let mut tet = [grid.node_index(i, j, k), 0, 0, 0];
                    for (slot, axis) in perm.iter().enumerate() {
                        corner[*axis] += 1;
                        tet[slot + 1] = grid.node_index(corner[0], corner[1], corner[2]);
                    }
                    if volume(nodes[tet[0]], nodes[tet[1]], nodes[tet[2]], nodes[tet[3]]) < 0.0 {
                        tet.swap(2, 3);
                    }
                    if in_omega {
                        omega_tets.push(tets.len());
                    }
                    tets.push(tet);
                }
            }
        }
    }
    Mesh::from_parts(nodes, tets, omega_tets)
}

/// Unique globally oriented edges and the per-tet `(edge, sign)` map.
pub fn extract_edges(tets: &[[usize; 4]]) -> (Vec<[usize; 2]>, Vec<[(usize, f64); 6]>) {
    let mut edges: Vec<[usize; 2]> = tets
        .iter()
        .flat_map(|t| LOCAL_EDGES.iter().map(move |&(a, b)| sorted_pair(t[a], t[b])))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let tet_edges = tets
        .iter()
        .map(|t| {
            LOCAL_EDGES.map(|(a, b)| {
                let key = sorted_pair(t[a], t[b]);
                let e = edges.binary_search(&key).expect("edge collected above");
                (e, if t[a] < t[b] { 1.0 } else { -1.0 })
            })
        })
        .collect();
    (edges, tet_edges)
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Mesh {
    /// Build a mesh from raw nodes and tets. Tets with negative orientation
    /// are flipped; `omega_tets` selects the ferromagnet sub-mesh.
    pub fn from_parts(nodes: Vec<Vec3>, mut tets: Vec<[usize; 4]>, omega_tets: Vec<usize>) -> Mesh {
        for t in &mut tets {
            if volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]) < 0.0 {
                t.swap(2, 3);
            }
        }
        let (edges, tet_edges) = extract_edges(&tets);
        let mut omega_nodes: Vec<usize> = omega_tets.iter().flat_map(|&t| tets[t]).collect();
        omega_nodes.sort_unstable();
        omega_nodes.dedup();
        let mut omega_local = vec![None; nodes.len()];
        for (l, &g) in omega_nodes.iter().enumerate() {
            omega_local[g] = Some(l);
        }
        Mesh {
            nodes,
            tets,
            edges,
            tet_edges,
            omega_tets,
            omega_nodes,
            omega_local,
        }
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn tet_edges(&self) -> &[[(usize, f64); 6]] {
        &self.tet_edges
    }

    pub fn omega_tets(&self) -> &[usize] {
        &self.omega_tets
    }

    /// Global indices of the nodes in the closure of omega, ascending.
    pub fn omega_nodes(&self) -> &[usize] {
        &self.omega_nodes
    }

    /// Local omega index of global node `g`, if it lies in omega.
    pub fn omega_local(&self, g: usize) -> Option<usize> {
        self.omega_local[g]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_omega_nodes(&self) -> usize {
        self.omega_nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn tet_vertices(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|n| self.nodes[n])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        let [a, b, c, d] = self.tet_vertices(t);
        volume(a, b, c, d)
    }

    pub fn geometry(&self, t: usize) -> TetGeometry {
        TetGeometry::new(self.tet_vertices(t))
    }

    /// Omega-local node indices of an omega tet.
    pub fn omega_tet_local(&self, t: usize) -> [usize; 4] {
        self.tets[t].map(|g| self.omega_local[g].expect("tet lies in omega"))
    }

    pub fn volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    pub fn omega_volume(&self) -> f64 {
        self.omega_tets.iter().map(|&t| self.tet_volume(t)).sum()
    }

    /// Maximal element diameter over all tets of Omega.
    pub fn h(&self) -> f64 {
        self.max_diameter(0..self.tets.len())
    }

    /// Maximal element diameter over the omega sub-mesh.
    pub fn h_omega(&self) -> f64 {
        self.max_diameter(self.omega_tets.iter().copied())
    }

    fn max_diameter(&self, tets: impl Iterator<Item = usize>) -> f64 {
        tets.map(|t| {
            let v = self.tet_vertices(t);
            LOCAL_EDGES
                .iter()
                .map(|&(a, b)| vec3::norm(vec3::sub(v[a], v[b])))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
    }

    pub fn is_edge_in_omega(&self, e: usize) -> bool {
        let [a, b] = self.edges[e];
        self.omega_local[a].is_some() && self.omega_local[b].is_some()
    }
}

/// Result of checking the non-positivity of off-diagonal P1 stiffness entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleAuditReport {
    pub worst_offdiag: f64,
    pub violating_pairs: usize,
    pub passed: bool,
    /// Round-off allowance: `1e-14 * max |diagonal entry|`.
    pub tolerance: f64,
}

impl std::fmt::Display for AngleAuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "angle condition {}: worst off-diagonal stiffness entry {:.6e} (tolerance {:.1e}), {} violating pairs",
            if self.passed { "PASSED" } else { "FAILED" },
            self.worst_offdiag,
            self.tolerance,
            self.violating_pairs
        )
    }
}

/// Audit `int grad(phi_i) . grad(phi_j) <= 0` for all hat functions `i != j`
/// over omega (`omega_only`) or all of Omega.
pub fn audit_angle_condition(mesh: &Mesh, omega_only: bool) -> AngleAuditReport {
    let tets: Vec<usize> = if omega_only {
        mesh.omega_tets().to_vec()
    } else {
        (0..mesh.tets().len()).collect()
    };
    let mut trip = Triplets::new(mesh.num_nodes(), mesh.num_nodes());
    for &t in &tets {
        let g = mesh.geometry(t);
        let k = g.stiffness();
        let nodes = mesh.tets()[t];
        for a in 0..4 {
            for b in 0..4 {
                trip.push(nodes[a], nodes[b], k[a][b]);
            }
        }
    }
    let k = CsrMatrix::from_triplets(trip);
    let scale = k.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let tolerance = 1e-14 * scale;
    let mut worst = f64::NEG_INFINITY;
    let mut violating = 0;
    for (i, j, v) in k.iter() {
        if i < j {
            worst = worst.max(v);
            if v > tolerance {
                violating += 1;
            }
        }
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    AngleAuditReport {
        worst_offdiag: worst,
        violating_pairs: violating,
        passed: worst <= tolerance,
        tolerance,
    }
}

/// Kuhn mesh of `[0,1]^3` with `n` cells per side and omega = Omega.
pub fn unit_cube_mesh(n: usize) -> Mesh {
    let l = uniform_lines(0.0, 1.0, 1.0 / n as f64);
    let grid = build_box_grid(l.clone(), l.clone(), l, ([0.0; 3], [1.0; 3])).expect("valid unit cube grid");
    tetrahedralize(&grid)
}
