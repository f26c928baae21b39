#![allow(dead_code)]

use ellg::fem::{evaluate_edge_field, interpolate_edge};
use ellg::io::parse_config;
use ellg::vec3::{self, Vec3};
use ellg::{EdgeFamily, EdgeField, Mesh, SimConfig};

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre01(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n from the Chebyshev guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Collapsed (Duffy) tensor rule on the reference tet: barycentric points
/// and weights summing to 1/6. Exact well beyond degree `2 n - 3`.
pub fn tet_rule(n: usize) -> Vec<([f64; 4], f64)> {
    let g = gauss_legendre01(n);
    let mut out = Vec::new();
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            for &(w, ww) in &g {
                let x = u;
                let y = v * (1.0 - u);
                let z = w * (1.0 - u) * (1.0 - v);
                let jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
                out.push(([1.0 - x - y - z, x, y, z], wu * wv * ww * jac));
            }
        }
    }
    out
}

/// `(||F - I F||^2, ||curl F - curl I F||^2)` over the whole mesh.
pub fn interpolation_errors(
    mesh: &Mesh,
    family: EdgeFamily,
    f: impl Fn(Vec3) -> Vec3 + Copy,
    curl_f: impl Fn(Vec3) -> Vec3,
    rule: &[([f64; 4], f64)],
) -> (f64, f64) {
    let h = interpolate_edge(mesh, family, f);
    let (mut l2, mut curl) = (0.0, 0.0);
    for t in 0..mesh.tets().len() {
        let g = mesh.geometry(t);
        // the interpolant is affine per tet, so its curl is sum grad(lambda_i) x value_i
        let mut c = [0.0; 3];
        for i in 0..4 {
            let mut l = [0.0; 4];
            l[i] = 1.0;
            c = vec3::add(c, vec3::cross(g.grads[i], evaluate_edge_field(mesh, family, &h, t, &l)));
        }
        for (lambda, w) in rule {
            let x = g.point(lambda);
            let d = vec3::sub(f(x), evaluate_edge_field(mesh, family, &h, t, lambda));
            let dc = vec3::sub(curl_f(x), c);
            l2 += 6.0 * g.volume * w * vec3::dot(d, d);
            curl += 6.0 * g.volume * w * vec3::dot(dc, dc);
        }
    }
    (l2, curl)
}

pub fn smooth_field(x: Vec3) -> Vec3 {
    let pi = std::f64::consts::PI;
    [(pi * x[1]).sin() * x[2], (pi * x[2]).cos() * x[0], (x[0] * x[1]).exp()]
}

pub fn smooth_field_curl(x: Vec3) -> Vec3 {
    let pi = std::f64::consts::PI;
    // F = (sin(pi y) z, x cos(pi z), exp(x y))
    let e = (x[0] * x[1]).exp();
    [
        x[0] * e + pi * x[0] * (pi * x[2]).sin(),
        (pi * x[1]).sin() - x[1] * e,
        (pi * x[2]).cos() - pi * x[2] * (pi * x[1]).cos(),
    ]
}

pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Unit cube, one cell, omega = Omega, uniform m and an applied field along z.
pub fn macrospin_config(dt: f64) -> SimConfig {
    let text = format!(
        r#"
[mesh]
omega_min = [0.0, 0.0, 0.0]
omega_max = [1.0, 1.0, 1.0]
cell = [1.0, 1.0, 1.0]

[llg]
alpha = 0.5
ce = 1.0

[eddy]
mu0 = 1.0
sigma = 1e6

[field]
h_ext = [0.0, 0.0, 1.0]

[initial]
m0 = [1.0, 0.0, 0.0]

[time]
dt = {dt:e}
t_end = 1.0
"#
    );
    parse_config(&text).expect("macrospin config")
}

/// Uniform-mode ODE of the coupled system: `m' = v(m, H + H_ext)` with the
/// tangent-plane velocity, and `H' = -m'`.
pub struct MacrospinOde {
    pub alpha: f64,
    pub h_ext: Vec3,
}

impl MacrospinOde {
    fn rhs(&self, y: &[Vec3; 2]) -> [Vec3; 2] {
        let (m, h) = (y[0], y[1]);
        let heff = vec3::add(h, self.h_ext);
        let w = vec3::sub(heff, vec3::scale(vec3::dot(heff, m), m));
        let mxw = vec3::cross(m, w);
        let a = self.alpha;
        let v = vec3::scale(1.0 / (1.0 + a * a), vec3::sub(vec3::scale(a, w), mxw));
        [v, vec3::scale(-1.0, v)]
    }

    fn rk4(&self, y: [Vec3; 2], dt: f64) -> [Vec3; 2] {
        let add = |y: &[Vec3; 2], k: &[Vec3; 2], s: f64| [vec3::axpy(y[0], s, k[0]), vec3::axpy(y[1], s, k[1])];
        let k1 = self.rhs(&y);
        let k2 = self.rhs(&add(&y, &k1, dt / 2.0));
        let k3 = self.rhs(&add(&y, &k2, dt / 2.0));
        let k4 = self.rhs(&add(&y, &k3, dt));
        let mut out = y;
        for c in 0..2 {
            for i in 0..3 {
                out[c][i] += dt / 6.0 * (k1[c][i] + 2.0 * k2[c][i] + 2.0 * k3[c][i] + k4[c][i]);
            }
        }
        out
    }

    /// `m(t_j)` for `t_j = j k`, `j = 0..=steps`, with RK4 substeps of at
    /// most `1e-5`.
    pub fn trajectory(&self, m0: Vec3, h0: Vec3, k: f64, steps: usize) -> Vec<Vec3> {
        let sub = (k / 1e-5).ceil() as usize;
        let dt = k / sub as f64;
        let mut y = [m0, h0];
        let mut out = vec![m0];
        for _ in 0..steps {
            for _ in 0..sub {
                y = self.rk4(y, dt);
            }
            out.push(y[0]);
        }
        out
    }
}

pub fn angle_deg(a: Vec3, b: Vec3) -> f64 {
    let c = vec3::dot(a, b) / (vec3::norm(a) * vec3::norm(b));
    let s = vec3::norm(vec3::cross(a, b)) / (vec3::norm(a) * vec3::norm(b));
    s.atan2(c).to_degrees()
}

/// Max angle over time between the simulated nodal magnetization and the
/// macrospin reference.
pub fn macrospin_deviation(dt: f64) -> f64 {
    let cfg = macrospin_config(dt);
    let mut sim = ellg::Simulation::new(&cfg).expect("macrospin setup");
    let steps = sim.num_steps();
    let ode = MacrospinOde {
        alpha: cfg.llg.alpha,
        h_ext: cfg.field.h_ext,
    };
    let m0 = cfg.initial.m0;
    let reference = ode.trajectory(m0, vec3::scale(-1.0, m0), dt, steps);
    let mut worst: f64 = 0.0;
    for j in 1..=steps {
        sim.step().expect("macrospin step");
        for &m in sim.magnetization().values() {
            worst = worst.max(angle_deg(m, reference[j]));
        }
    }
    worst
}

pub fn edge_norm_sq(ops: &ellg::Operators, h: &EdgeField) -> f64 {
    ops.edge_l2_sq(h.coeffs()).expect("edge norm")
}

/// Small film inside a padded box; cheap enough for many runs.
pub fn small_film_config() -> SimConfig {
    parse_config(
        r#"
[mesh]
omega_min = [0.0, 0.0, 0.0]
omega_max = [0.4, 0.2, 0.1]
cell = [0.1, 0.1, 0.1]
pad = [0.1, 0.1, 0.1, 0.1]

[llg]
alpha = 0.5
ce = 1.0

[eddy]
mu0 = 1.0
sigma = 1.0

[field]
ca = 0.5
easy_axis = [1.0, 0.0, 0.0]
h_ext = [0.3, 0.0, 1.0]

[initial]
m0 = [0.6, 0.8, 0.0]

[time]
dt = 0.01
t_end = 0.05
"#,
    )
    .expect("small film config")
}
