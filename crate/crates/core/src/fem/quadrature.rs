//! Quadrature rules on the reference tetrahedron in barycentric form.

/// Rule with barycentric points and weights summing to the reference
/// volume `1/6`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl Quadrature {
    /// Centroid rule, exact for degree 1.
    pub fn centroid() -> Self {
        Quadrature {
            points: vec![[0.25; 4]],
            weights: vec![1.0 / 6.0],
            degree: 1,
        }
    }

    /// Four-point rule, exact for degree 2.
    pub fn degree2() -> Self {
        let a = 0.585_410_196_624_968_5;
        let b = 0.138_196_601_125_010_5;
        Quadrature {
            points: (0..4)
                .map(|i| {
                    let mut p = [b; 4];
                    p[i] = a;
                    p
                })
                .collect(),
            weights: vec![1.0 / 24.0; 4],
            degree: 2,
        }
    }

    /// Five-point rule, exact for degree 3 (negative centroid weight).
    pub fn degree3() -> Self {
        let mut points = vec![[0.25; 4]];
        let mut weights = vec![-2.0 / 15.0];
        for i in 0..4 {
            let mut p = [1.0 / 6.0; 4];
            p[i] = 0.5;
            points.push(p);
            weights.push(3.0 / 40.0);
        }
        Quadrature {
            points,
            weights,
            degree: 3,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; 4], f64)> {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

/// Two-point Gauss-Legendre rule on `[0, 1]`: `(s, weight)`.
pub const GAUSS2_UNIT: [(f64, f64); 2] = [
    (0.211_324_865_405_187_1, 0.5),
    (0.788_675_134_594_812_9, 0.5),
];
