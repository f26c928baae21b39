use crate::linalg::{CsrMatrix, Triplets};
use crate::mesh::Mesh;
use crate::vec3::{self, Vec3};

use super::element::{LocalEdgeDofs, TetGeometry};
use super::quadrature::Quadrature;
use super::{EdgeFamily, NodalField};

/// Scalar P1 mass matrix on omega, 4-point quadrature (exact).
pub fn assemble_nodal_mass(mesh: &Mesh) -> CsrMatrix {
    let n = mesh.num_omega_nodes();
    let q = Quadrature::degree2();
    let mut trip = Triplets::with_capacity(n, n, 16 * mesh.omega_tets().len());
    for &t in mesh.omega_tets() {
        let g = mesh.geometry(t);
        let nodes = mesh.omega_tet_local(t);
        let s = g.jacobian_scale();
        for i in 0..4 {
            for j in 0..4 {
                let v: f64 = q.iter().map(|(p, w)| w * p[i] * p[j]).sum();
                trip.push(nodes[i], nodes[j], s * v);
            }
        }
    }
    CsrMatrix::from_triplets(trip)
}

/// Scalar P1 stiffness matrix on omega.
pub fn assemble_nodal_stiffness(mesh: &Mesh) -> CsrMatrix {
    let n = mesh.num_omega_nodes();
    let mut trip = Triplets::with_capacity(n, n, 16 * mesh.omega_tets().len());
    for &t in mesh.omega_tets() {
        let k = mesh.geometry(t).stiffness();
        let nodes = mesh.omega_tet_local(t);
        for i in 0..4 {
            for j in 0..4 {
                trip.push(nodes[i], nodes[j], k[i][j]);
            }
        }
    }
    CsrMatrix::from_triplets(trip)
}

fn local_dofs(mesh: &Mesh, t: usize, family: EdgeFamily) -> LocalEdgeDofs {
    LocalEdgeDofs::new(&mesh.tet_edges()[t], mesh.num_edges(), family)
}

/// Edge-element mass matrix over Omega.
pub fn assemble_edge_mass(mesh: &Mesh, family: EdgeFamily) -> CsrMatrix {
    let n = family.num_dofs(mesh);
    let q = Quadrature::degree2();
    let mut trip = Triplets::with_capacity(n, n, 144 * mesh.tets().len());
    for t in 0..mesh.tets().len() {
        let g = mesh.geometry(t);
        let d = local_dofs(mesh, t, family);
        let s = g.jacobian_scale();
        let mut local = [[0.0; 12]; 12];
        for (p, w) in q.iter() {
            let phi = d.values(&g, p);
            for i in 0..d.count {
                for j in 0..d.count {
                    local[i][j] += s * w * vec3::dot(phi[i], phi[j]);
                }
            }
        }
        for i in 0..d.count {
            for j in 0..d.count {
                trip.push(d.dofs[i], d.dofs[j], local[i][j]);
            }
        }
    }
    CsrMatrix::from_triplets(trip)
}

/// `(curl N_i, curl N_j)` over Omega; curls are constant per tet.
pub fn assemble_curl_curl(mesh: &Mesh, family: EdgeFamily) -> CsrMatrix {
    let n = family.num_dofs(mesh);
    let mut trip = Triplets::with_capacity(n, n, 36 * mesh.tets().len());
    for t in 0..mesh.tets().len() {
        let g = mesh.geometry(t);
        let d = local_dofs(mesh, t, family);
        let c = d.curls(&g);
        // gradient DOFs are curl-free
        for i in 0..6 {
            for j in 0..6 {
                trip.push(d.dofs[i], d.dofs[j], g.volume * vec3::dot(c[i], c[j]));
            }
        }
    }
    CsrMatrix::from_triplets(trip)
}

/// Rectangular coupling `B[e, 3z + c] = int_omega lambda_z (N_e)_c`,
/// assembled over omega tets only.
pub fn assemble_node_edge_coupling(mesh: &Mesh, family: EdgeFamily) -> CsrMatrix {
    let rows = family.num_dofs(mesh);
    let cols = 3 * mesh.num_omega_nodes();
    let q = Quadrature::degree2();
    let mut trip = Triplets::with_capacity(rows, cols, 144 * mesh.omega_tets().len());
    for &t in mesh.omega_tets() {
        let g = mesh.geometry(t);
        let d = local_dofs(mesh, t, family);
        let nodes = mesh.omega_tet_local(t);
        let s = g.jacobian_scale();
        let mut local = [[[0.0; 3]; 4]; 12];
        for (p, w) in q.iter() {
            let phi = d.values(&g, p);
            for i in 0..d.count {
                for z in 0..4 {
                    for c in 0..3 {
                        local[i][z][c] += s * w * p[z] * phi[i][c];
                    }
                }
            }
        }
        for i in 0..d.count {
            for z in 0..4 {
                for c in 0..3 {
                    trip.push(d.dofs[i], 3 * nodes[z] + c, local[i][z][c]);
                }
            }
        }
    }
    CsrMatrix::from_triplets(trip)
}

/// Matrix of `x -> m x x`: entry `[d][c] = (m x e_c)_d`.
pub fn cross_matrix(m: Vec3) -> [[f64; 3]; 3] {
    [
        [0.0, -m[2], m[1]],
        [m[2], 0.0, -m[0]],
        [-m[1], m[0], 0.0],
    ]
}

/// Local 3x3 blocks `int_T (m_h x phi_j) . phi_i` for the four vertex hat
/// functions, with `m_h` the P1 field through the vertex values `m`.
/// The integrand is cubic; the degree-3 rule integrates it exactly.
pub fn local_cross_blocks(g: &TetGeometry, m: &[Vec3; 4]) -> [[[[f64; 3]; 3]; 4]; 4] {
    let q = Quadrature::degree3();
    let s = g.jacobian_scale();
    let mut out = [[[[0.0; 3]; 3]; 4]; 4];
    for (p, w) in q.iter() {
        let mq = (0..4).fold(vec3::ZERO, |acc, l| vec3::axpy(acc, p[l], m[l]));
        let x = cross_matrix(mq);
        for i in 0..4 {
            for j in 0..4 {
                let f = s * w * p[i] * p[j];
                for d in 0..3 {
                    for c in 0..3 {
                        out[i][j][d][c] += f * x[d][c];
                    }
                }
            }
        }
    }
    out
}

/// `S(m)` on the 3V nodal basis: `S[3i + d, 3j + c] = int_omega (m_h x e_c lambda_j) . e_d lambda_i`.
pub fn assemble_cross_term(mesh: &Mesh, m: &NodalField) -> CsrMatrix {
    let n = 3 * mesh.num_omega_nodes();
    let mut trip = Triplets::with_capacity(n, n, 96 * mesh.omega_tets().len());
    for &t in mesh.omega_tets() {
        let g = mesh.geometry(t);
        let nodes = mesh.omega_tet_local(t);
        let blocks = local_cross_blocks(&g, &nodes.map(|z| m.0[z]));
        for i in 0..4 {
            for j in 0..4 {
                for d in 0..3 {
                    for c in 0..3 {
                        if d != c {
                            trip.push(3 * nodes[i] + d, 3 * nodes[j] + c, blocks[i][j][d][c]);
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(trip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{discrete_gradient, interpolate_edge, interpolate_nodal};
    use crate::linalg::dot;
    use crate::mesh::{unit_cube_mesh, LOCAL_EDGES};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FAMILIES: [EdgeFamily; 2] = [EdgeFamily::FirstKind, EdgeFamily::SecondKind];

    fn single_tet() -> Mesh {
        Mesh::from_parts(
            vec![[0.1, 0.0, 0.0], [1.3, 0.2, 0.1], [0.2, 0.9, -0.1], [0.3, 0.1, 1.1]],
            vec![[0, 1, 2, 3]],
            vec![0],
        )
    }

    /// `int_T lambda_i lambda_j = |T| (1 + delta_ij) / 20`
    fn mass_ij(vol: f64, i: usize, j: usize) -> f64 {
        vol * if i == j { 2.0 } else { 1.0 } / 20.0
    }

    /// `int_T lambda_i lambda_j lambda_l` for the cross-term oracle.
    fn triple(vol: f64, i: usize, j: usize, l: usize) -> f64 {
        let mut c = [0u32; 4];
        c[i] += 1;
        c[j] += 1;
        c[l] += 1;
        let fact = |n: u32| (1..=n).product::<u32>() as f64;
        6.0 * vol * c.iter().map(|&k| fact(k)).product::<f64>() / fact(6)
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = vec3::norm(v);
            if n > 0.1 && n <= 1.0 {
                return vec3::scale(1.0 / n, v);
            }
        }
    }

    #[test]
    fn nodal_mass_closed_form() {
        let mesh = single_tet();
        let vol = mesh.tet_volume(0);
        let m = assemble_nodal_mass(&mesh);
        for i in 0..4 {
            for j in 0..4 {
                assert!((m.get(i, j) - mass_ij(vol, i, j)).abs() < 1e-15);
            }
        }
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn partition_of_unity_volumes() {
        let mesh = unit_cube_mesh(3);
        let ones = vec![1.0; mesh.num_omega_nodes()];
        let m = assemble_nodal_mass(&mesh);
        assert!((m.quad_form(&ones) - 1.0).abs() < 1e-12);
        for fam in FAMILIES {
            let me = assemble_edge_mass(&mesh, fam);
            let h = interpolate_edge(&mesh, fam, |_| [1.0, 0.0, 0.0]);
            assert!((me.quad_form(h.coeffs()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stiffness_kernel_and_linear_energy() {
        let mesh = unit_cube_mesh(3);
        let k = assemble_nodal_stiffness(&mesh);
        let scale = k.max_abs();
        let ones = vec![1.0; mesh.num_omega_nodes()];
        assert!(k.matvec(&ones).iter().all(|v| v.abs() <= 1e-13 * scale));
        let x: Vec<f64> = mesh.omega_nodes().iter().map(|&g| mesh.nodes()[g][0]).collect();
        assert!((k.quad_form(&x) - 1.0).abs() < 1e-13);
        assert!(k.asymmetry() < 1e-15);
    }

    #[test]
    fn edge_mass_matches_closed_form_on_single_tet() {
        let mesh = single_tet();
        let g = mesh.geometry(0);
        let vol = g.volume;
        let me = assemble_edge_mass(&mesh, EdgeFamily::FirstKind);
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            for (l, &(c, d)) in LOCAL_EDGES.iter().enumerate() {
                let gd = |x: usize, y: usize| vec3::dot(g.grads[x], g.grads[y]);
                let exact = mass_ij(vol, a, c) * gd(b, d) - mass_ij(vol, a, d) * gd(b, c)
                    - mass_ij(vol, b, c) * gd(a, d)
                    + mass_ij(vol, b, d) * gd(a, c);
                let (ek, sk) = mesh.tet_edges()[0][k];
                let (el, sl) = mesh.tet_edges()[0][l];
                assert!((me.get(ek, el) - sk * sl * exact).abs() < 1e-13, "{k} {l}");
            }
        }
    }

    #[test]
    fn edge_mass_is_spd_on_one_cell() {
        let mesh = unit_cube_mesh(1);
        for fam in FAMILIES {
            let me = assemble_edge_mass(&mesh, fam);
            let n = me.nrows();
            assert_eq!(n, 19 * fam.dofs_per_edge());
            let d = nalgebra::DMatrix::from_fn(n, n, |i, j| me.get(i, j));
            let eig = d.symmetric_eigen();
            assert!(eig.eigenvalues.min() > 0.0, "{fam}: {}", eig.eigenvalues.min());
        }
    }

    #[test]
    fn curl_curl_annihilates_gradients_and_constants() {
        let mesh = unit_cube_mesh(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for fam in FAMILIES {
            let c = assemble_curl_curl(&mesh, fam);
            let scale = c.max_abs();
            let h = interpolate_edge(&mesh, fam, |_| [0.3, -1.0, 2.0]);
            assert!(c.matvec(h.coeffs()).iter().all(|v| v.abs() <= 1e-13 * scale * 3.0));
            for _ in 0..20 {
                let s: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let gs = discrete_gradient(&mesh, fam, &s);
                assert!(c.matvec(gs.coeffs()).iter().all(|v| v.abs() <= 1e-13 * scale));
            }
            // positive semidefinite
            for _ in 0..10 {
                let x: Vec<f64> = (0..c.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                assert!(c.quad_form(&x) >= -1e-13 * scale * dot(&x, &x));
            }
        }
    }

    #[test]
    fn coupling_reproduces_omega_volume() {
        // omega is a sub-box of a larger Omega
        let grid = crate::mesh::build_box_grid(
            vec![0.0, 0.5, 1.0, 1.5],
            vec![0.0, 0.5, 1.0],
            vec![0.0, 0.25, 0.5, 1.0],
            ([0.5, 0.0, 0.25], [1.5, 0.5, 0.5]),
        )
        .unwrap();
        let mesh = crate::mesh::tetrahedralize(&grid);
        let omega_vol = 1.0 * 0.5 * 0.25;
        for fam in FAMILIES {
            let b = assemble_node_edge_coupling(&mesh, fam);
            let v = interpolate_nodal(&mesh, |_| [1.0, 0.0, 0.0]).to_flat();
            let z = interpolate_edge(&mesh, fam, |_| [1.0, 0.0, 0.0]);
            let val = dot(z.coeffs(), &b.matvec(&v));
            assert!((val - omega_vol).abs() < 1e-13, "{fam}: {val}");
            assert!(b.matvec(&vec![0.0; v.len()]).iter().all(|&x| x == 0.0));
            let lhs = dot(&b.matvec(&v), z.coeffs());
            let rhs = dot(&v, &b.tr_matvec(z.coeffs()));
            assert!((lhs - rhs).abs() < 1e-15);
        }
    }

    #[test]
    fn cross_term_is_skew() {
        let mesh = unit_cube_mesh(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = NodalField((0..mesh.num_omega_nodes()).map(|_| random_unit(&mut rng)).collect());
        let s = assemble_cross_term(&mesh, &m);
        let scale = s.max_abs();
        for _ in 0..20 {
            let x: Vec<f64> = (0..s.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(s.quad_form(&x).abs() <= 1e-13 * scale * dot(&x, &x));
        }
        let zero = assemble_cross_term(&mesh, &NodalField::zeros(mesh.num_omega_nodes()));
        assert_eq!(zero.nnz(), 0);
    }

    #[test]
    fn cross_term_matches_triple_product_integrals() {
        let mesh = single_tet();
        let vol = mesh.tet_volume(0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = NodalField((0..4).map(|_| random_unit(&mut rng)).collect());
        let s = assemble_cross_term(&mesh, &m);
        for i in 0..4 {
            for j in 0..4 {
                for d in 0..3 {
                    for c in 0..3 {
                        let exact: f64 = (0..4)
                            .map(|l| triple(vol, i, j, l) * vec3::cross(m.0[l], vec3::unit(c))[d])
                            .sum();
                        assert!((s.get(3 * i + d, 3 * j + c) - exact).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn cross_term_constant_m_is_mass_times_generator() {
        let mesh = single_tet();
        let vol = mesh.tet_volume(0);
        let s = assemble_cross_term(&mesh, &NodalField::uniform(4, [0.0, 0.0, 1.0]));
        let gen = cross_matrix([0.0, 0.0, 1.0]);
        for i in 0..4 {
            for j in 0..4 {
                for d in 0..3 {
                    for c in 0..3 {
                        let exact = mass_ij(vol, i, j) * gen[d][c];
                        assert!((s.get(3 * i + d, 3 * j + c) - exact).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn single_tet_curl_curl_closed_form() {
        let mesh = single_tet();
        let g = mesh.geometry(0);
        let c = assemble_curl_curl(&mesh, EdgeFamily::FirstKind);
        for (k, &(a, b)) in LOCAL_EDGES.iter().enumerate() {
            for (l, &(p, q)) in LOCAL_EDGES.iter().enumerate() {
                let ck = vec3::scale(2.0, vec3::cross(g.grads[a], g.grads[b]));
                let cl = vec3::scale(2.0, vec3::cross(g.grads[p], g.grads[q]));
                let (ek, sk) = mesh.tet_edges()[0][k];
                let (el, sl) = mesh.tet_edges()[0][l];
                let exact = sk * sl * g.volume * vec3::dot(ck, cl);
                assert!((c.get(ek, el) - exact).abs() < 1e-12 * (1.0 + exact.abs()));
            }
        }
    }
}
