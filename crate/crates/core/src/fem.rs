//! Linear triangle geometry and quadrature on the (ρ, z) half-plane.

use std::f64::consts::PI;

/// Barycentric quadrature rule; weights sum to one and are scaled by the area.
#[derive(Debug, Clone, Copy)]
pub struct TriangleRule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

const A1: f64 = 0.059_715_871_789_770;
const B1: f64 = 0.470_142_064_105_115;
const W1: f64 = 0.132_394_152_788_506;
const A2: f64 = 0.797_426_985_353_087;
const B2: f64 = 0.101_286_507_323_456;
const W2: f64 = 0.125_939_180_544_827;

/// Edge-midpoint rule, exact for quadratics.
pub const RULE_3: TriangleRule = TriangleRule {
    points: &[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

/// Seven-point rule exact for polynomials of degree five. All points are
/// strictly inside the triangle, so 1/ρ integrands never hit the axis.
pub const RULE_7: TriangleRule = TriangleRule {
    points: &[
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        [A1, B1, B1],
        [B1, A1, B1],
        [B1, B1, A1],
        [A2, B2, B2],
        [B2, A2, B2],
        [B2, B2, A2],
    ],
    weights: &[0.225, W1, W1, W1, W2, W2, W2],
};

/// Three-point Gauss-Legendre rule on [0, 1].
pub const EDGE_GAUSS_3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// P1 triangle in the meridian plane.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub vertices: [[f64; 2]; 3],
    /// Unsigned area in m²
    pub area: f64,
    /// ∂N_k/∂ρ and ∂N_k/∂z
    pub grad: [[f64; 2]; 3],
}

impl Triangle {
    pub fn new(vertices: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = vertices;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let mut grad = [[0.0; 2]; 3];
        for k in 0..3 {
            let a = vertices[(k + 1) % 3];
            let b = vertices[(k + 2) % 3];
            grad[k] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
        }
        Triangle {
            vertices,
            area: 0.5 * det.abs(),
            grad,
        }
    }

    pub fn signed_area(vertices: &[[f64; 2]; 3]) -> f64 {
        let [p0, p1, p2] = vertices;
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn point(&self, bary: &[f64; 3]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for k in 0..3 {
            p[0] += bary[k] * self.vertices[k][0];
            p[1] += bary[k] * self.vertices[k][1];
        }
        p
    }

    pub fn centroid(&self) -> [f64; 2] {
        self.point(&[1.0 / 3.0; 3])
    }

    /// Barycentric coordinates of an arbitrary point.
    pub fn barycentric(&self, p: [f64; 2]) -> [f64; 3] {
        let c = self.centroid();
        let mut l = [0.0; 3];
        for k in 0..3 {
            l[k] = 1.0 / 3.0 + self.grad[k][0] * (p[0] - c[0]) + self.grad[k][1] * (p[1] - c[1]);
        }
        l
    }

    /// Iterates `(ρ, z, shape values, area weight)` over a rule.
    pub fn quadrature<'a>(&'a self, rule: &'a TriangleRule) -> impl Iterator<Item = ([f64; 2], [f64; 3], f64)> + 'a {
        rule.points
            .iter()
            .zip(rule.weights)
            .map(move |(bary, &w)| (self.point(bary), *bary, w * self.area))
    }

    /// ∫ 2πρ dS over the triangle (exact).
    pub fn volume(&self) -> f64 {
        2.0 * PI * self.area * (self.vertices[0][0] + self.vertices[1][0] + self.vertices[2][0]) / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_monomials() {
        let t = Triangle::new([[0.2, 0.0], [1.0, 0.1], [0.4, 0.9]]);
        // ∫ ρ^a z^b against a fine subdivision reference is overkill; use the
        // degree-5 rule as the oracle for degree-2 accuracy of the 3-point rule
        for (a, b) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let f = |p: [f64; 2]| p[0].powi(a) * p[1].powi(b);
            let r3: f64 = t.quadrature(&RULE_3).map(|(p, _, w)| f(p) * w).sum();
            let r7: f64 = t.quadrature(&RULE_7).map(|(p, _, w)| f(p) * w).sum();
            assert!((r3 - r7).abs() < 1e-14, "{a} {b}");
        }
        let area: f64 = t.quadrature(&RULE_7).map(|(_, _, w)| w).sum();
        assert!((area - t.area).abs() < 1e-15);
    }

    #[test]
    fn seven_point_rule_is_degree_five() {
        // reference triangle: ∫ x^a y^b = a! b! / (a + b + 2)!
        let t = Triangle::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let fact = |n: i32| (1..=n).map(|k| k as f64).product::<f64>();
        for a in 0..=5 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let q: f64 = t.quadrature(&RULE_7).map(|(p, _, w)| p[0].powi(a) * p[1].powi(b) * w).sum();
                assert!((q - exact).abs() < 1e-14, "x^{a} y^{b}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn shape_gradients_reproduce_linears() {
        let t = Triangle::new([[0.2, 0.0], [1.0, 0.1], [0.4, 0.9]]);
        // f = 3ρ - 2z + 1 interpolated at the vertices has gradient (3, -2)
        let vals: Vec<f64> = t.vertices.iter().map(|p| 3.0 * p[0] - 2.0 * p[1] + 1.0).collect();
        let g0: f64 = (0..3).map(|k| vals[k] * t.grad[k][0]).sum();
        let g1: f64 = (0..3).map(|k| vals[k] * t.grad[k][1]).sum();
        assert!((g0 - 3.0).abs() < 1e-13 && (g1 + 2.0).abs() < 1e-13);
        let b = t.barycentric(t.vertices[1]);
        assert!((b[0]).abs() < 1e-13 && (b[1] - 1.0).abs() < 1e-13 && b[2].abs() < 1e-13);
    }

    #[test]
    fn volume_is_pappus() {
        let t = Triangle::new([[1.0, 0.0], [2.0, 0.0], [1.0, 1.0]]);
        let q: f64 = t.quadrature(&RULE_7).map(|(p, _, w)| 2.0 * PI * p[0] * w).sum();
        assert!((q - t.volume()).abs() < 1e-13);
    }
}
