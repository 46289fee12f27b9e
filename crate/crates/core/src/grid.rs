//! Node-centered uniform grids and the finite difference kernels shared by
//! every solver.
//!
//! Fields are stored row-major with `y` as the slow index: node `(i, j)` sits
//! at `(j * dx, i * dx)`. Boundary nodes carry Dirichlet data and are never
//! touched by interior updates.
//!
//! The forward gradient is zero-closed at the last column/row and the backward
//! divergence treats out-of-range neighbours as zero, which makes
//! `-backward_divergence` the exact adjoint of `forward_gradient`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid must have at least 3 nodes per side, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("expected {expected} values for the grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field shapes differ: {a:?} vs {b:?}")]
    ShapeMismatch {
        a: (usize, usize),
        b: (usize, usize),
    },
    #[error("field csv line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Scalar values on an `nx` by `ny` node grid with uniform spacing `dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    nx: usize,
    ny: usize,
    dx: f64,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(nx: usize, ny: usize, dx: f64) -> Result<Self, GridError> {
        Self::from_vec(nx, ny, dx, vec![0.0; nx * ny])
    }

    pub fn constant(nx: usize, ny: usize, dx: f64, c: f64) -> Result<Self, GridError> {
        Self::from_vec(nx, ny, dx, vec![c; nx * ny])
    }

    pub fn from_vec(nx: usize, ny: usize, dx: f64, values: Vec<f64>) -> Result<Self, GridError> {
        if nx < 3 || ny < 3 {
            return Err(GridError::TooSmall { nx, ny });
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(GridError::BadSpacing(dx));
        }
        if values.len() != nx * ny {
            return Err(GridError::LengthMismatch {
                expected: nx * ny,
                got: values.len(),
            });
        }
        Ok(Self { nx, ny, dx, values })
    }

    /// `n` by `n` nodes covering `[0,1]²`, so `dx = 1/(n-1)`.
    pub fn unit_square(n: usize) -> Result<Self, GridError> {
        if n < 3 {
            return Err(GridError::TooSmall { nx: n, ny: n });
        }
        Self::zeros(n, n, 1.0 / (n - 1) as f64)
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        dx: f64,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let mut field = Self::zeros(nx, ny, dx)?;
        for i in 0..ny {
            for j in 0..nx {
                field.values[i * nx + j] = f(j as f64 * dx, i as f64 * dx);
            }
        }
        Ok(field)
    }

    /// A zero field with the same shape and spacing.
    pub fn zeros_like(&self) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            dx: self.dx,
            values: vec![0.0; self.values.len()],
        }
    }

    /// Same shape and spacing, values produced node-by-node.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            dx: self.dx,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nx + j
    }

    /// Value at row `i` (y) and column `j` (x).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nx + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.nx + j] = v;
    }

    /// Physical coordinates `(x1, x2)` of node `(i, j)`.
    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (j as f64 * self.dx, i as f64 * self.dx)
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.ny || j + 1 == self.nx
    }

    /// Shape and spacing agree. Spacing is compared exactly; fields built for
    /// the same grid always share the same `dx` bits.
    pub fn same_grid(&self, other: &ScalarField) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<(), GridError> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(GridError::ShapeMismatch {
                a: self.shape(),
                b: other.shape(),
            })
        }
    }

    /// Overwrites boundary nodes with those of `src`.
    pub fn copy_boundary_from(&mut self, src: &ScalarField) {
        let (nx, ny) = (self.nx, self.ny);
        for j in 0..nx {
            self.values[j] = src.values[j];
            let k = (ny - 1) * nx + j;
            self.values[k] = src.values[k];
        }
        for i in 1..ny - 1 {
            let k = i * nx;
            self.values[k] = src.values[k];
            self.values[k + nx - 1] = src.values[k + nx - 1];
        }
    }

    /// Iterator over `(i, j)` of interior nodes in storage order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> {
        let (nx, ny) = (self.nx, self.ny);
        (1..ny - 1).flat_map(move |i| (1..nx - 1).map(move |j| (i, j)))
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Plain-text dump: a `nx,ny,dx` header line, then `ny` lines of `nx`
    /// comma-separated values in storage order. Values carry 17 significant
    /// digits so [`ScalarField::from_csv`] restores them exactly.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut out = String::with_capacity(24 * self.values.len() + 32);
        let _ = writeln!(out, "{},{},{}", self.nx, self.ny, self.dx);
        for row in self.values.chunks(self.nx) {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`ScalarField::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let bad = |line: usize, reason: String| GridError::Parse { line, reason };
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
        let (_, header) = lines
            .next()
            .ok_or_else(|| bad(1, "missing header".into()))?;
        let parts: Vec<&str> = header.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad(1, format!("expected `nx,ny,dx`, got `{header}`")));
        }
        let nx: usize = parts[0].parse().map_err(|e| bad(1, format!("nx: {e}")))?;
        let ny: usize = parts[1].parse().map_err(|e| bad(1, format!("ny: {e}")))?;
        let dx: f64 = parts[2].parse().map_err(|e| bad(1, format!("dx: {e}")))?;
        let mut values = Vec::with_capacity(nx.saturating_mul(ny));
        let mut rows = 0;
        for (line, text) in lines.filter(|(_, l)| !l.is_empty()) {
            let before = values.len();
            for tok in text.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|e| bad(line, format!("`{}`: {e}", tok.trim())))?;
                values.push(v);
            }
            if values.len() - before != nx {
                return Err(bad(
                    line,
                    format!("expected {nx} values, got {}", values.len() - before),
                ));
            }
            rows += 1;
        }
        if rows != ny {
            return Err(bad(rows + 1, format!("expected {ny} rows, got {rows}")));
        }
        Self::from_vec(nx, ny, dx, values)
    }
}

/// Two scalar components on a shared grid: gradients and dual variables.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub px: ScalarField,
    pub py: ScalarField,
}

impl VectorField {
    pub fn new(px: ScalarField, py: ScalarField) -> Result<Self, GridError> {
        px.check_same_grid(&py)?;
        Ok(Self { px, py })
    }

    pub fn zeros_like(u: &ScalarField) -> Self {
        Self {
            px: u.zeros_like(),
            py: u.zeros_like(),
        }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let mut out = self.px.zeros_like();
        for (k, m) in out.values.iter_mut().enumerate() {
            *m = self.px.values[k].hypot(self.py.values[k]);
        }
        out
    }

    /// Largest pointwise magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.px
            .values
            .iter()
            .zip(&self.py.values)
            .map(|(x, y)| x.hypot(*y))
            .fold(0.0, f64::max)
    }
}

/// Forward differences, zero at the last column (x) and last row (y).
pub fn forward_gradient(u: &ScalarField) -> VectorField {
    let mut out = VectorField::zeros_like(u);
    forward_gradient_into(u, &mut out);
    out
}

/// In-place variant of [`forward_gradient`]; `out` must match `u`'s grid.
pub fn forward_gradient_into(u: &ScalarField, out: &mut VectorField) {
    let (nx, ny) = u.shape();
    let inv = 1.0 / u.dx;
    let v = &u.values;
    let gx = &mut out.px.values;
    let gy = &mut out.py.values;
    for i in 0..ny {
        let row = i * nx;
        for j in 0..nx {
            let k = row + j;
            gx[k] = if j + 1 < nx {
                (v[k + 1] - v[k]) * inv
            } else {
                0.0
            };
            gy[k] = if i + 1 < ny {
                (v[k + nx] - v[k]) * inv
            } else {
                0.0
            };
        }
    }
}

/// Backward differences with out-of-range neighbours read as zero.
pub fn backward_divergence(p: &VectorField) -> ScalarField {
    let mut out = p.px.zeros_like();
    backward_divergence_into(p, &mut out);
    out
}

pub fn backward_divergence_into(p: &VectorField, out: &mut ScalarField) {
    let (nx, ny) = p.px.shape();
    let inv = 1.0 / p.px.dx;
    let px = &p.px.values;
    let py = &p.py.values;
    let o = &mut out.values;
    for i in 0..ny {
        let row = i * nx;
        for j in 0..nx {
            let k = row + j;
            let west = if j > 0 { px[k - 1] } else { 0.0 };
            let south = if i > 0 { py[k - nx] } else { 0.0 };
            o[k] = (px[k] - west + py[k] - south) * inv;
        }
    }
}

/// Standard 5-point Laplacian on interior nodes; boundary output is 0.
pub fn five_point_laplacian(u: &ScalarField) -> ScalarField {
    let (nx, ny) = u.shape();
    let inv2 = 1.0 / (u.dx * u.dx);
    let v = &u.values;
    let mut out = u.zeros_like();
    for i in 1..ny - 1 {
        for j in 1..nx - 1 {
            let k = i * nx + j;
            out.values[k] = (v[k + 1] + v[k - 1] + v[k + nx] + v[k - nx] - 4.0 * v[k]) * inv2;
        }
    }
    out
}

pub fn linf_norm(u: &ScalarField) -> f64 {
    u.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `dx * sqrt(Σ u²)`, the discrete L² norm on the unit square.
pub fn weighted_l2_norm(u: &ScalarField) -> f64 {
    u.dx * u.values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(nx: usize, ny: usize, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..nx * ny).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_vec(nx, ny, 1.0 / (nx - 1) as f64, vals).unwrap()
    }

    fn zero_boundary(mut u: ScalarField) -> ScalarField {
        let z = u.zeros_like();
        u.copy_boundary_from(&z);
        u
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            ScalarField::zeros(2, 5, 0.1),
            Err(GridError::TooSmall { .. })
        ));
        assert!(matches!(
            ScalarField::zeros(4, 4, 0.0),
            Err(GridError::BadSpacing(_))
        ));
        assert!(matches!(
            ScalarField::from_vec(3, 3, 0.5, vec![0.0; 8]),
            Err(GridError::LengthMismatch {
                expected: 9,
                got: 8
            })
        ));
    }

    #[test]
    fn unit_square_spacing_and_layout() {
        let u = ScalarField::unit_square(5).unwrap();
        assert_eq!(u.dx(), 0.25);
        let f = ScalarField::from_fn(5, 4, 0.25, |x1, x2| 10.0 * x2 + x1).unwrap();
        // row index is y, column index is x
        assert_eq!(f.get(2, 3), 10.0 * 0.5 + 0.75);
        assert_eq!(f.values()[2 * 5 + 3], f.get(2, 3));
        assert!(f.is_boundary(0, 2) && f.is_boundary(3, 2) && f.is_boundary(1, 4));
        assert!(!f.is_boundary(1, 1));
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let u = ScalarField::constant(6, 7, 0.2, 7.0).unwrap();
        let g = forward_gradient(&u);
        assert!(g.px.values().iter().all(|&v| v == 0.0));
        assert!(g.py.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_of_linear_x1() {
        let n = 9;
        let u = ScalarField::from_fn(n, n, 1.0 / 8.0, |x1, _| x1).unwrap();
        let g = forward_gradient(&u);
        for i in 0..n {
            for j in 0..n {
                let expect = if j < n - 1 { 1.0 } else { 0.0 };
                assert!((g.px.get(i, j) - expect).abs() < 1e-12);
                assert_eq!(g.py.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn gradient_matches_elementwise_oracle() {
        let u = random_field(8, 8, 3);
        let g = forward_gradient(&u);
        let dx = u.dx();
        for i in 0..8 {
            for j in 0..8 {
                let ox = if j == 7 {
                    0.0
                } else {
                    (u.get(i, j + 1) - u.get(i, j)) / dx
                };
                let oy = if i == 7 {
                    0.0
                } else {
                    (u.get(i + 1, j) - u.get(i, j)) / dx
                };
                assert!((g.px.get(i, j) - ox).abs() <= 1e-12);
                assert!((g.py.get(i, j) - oy).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn divergence_of_zero_is_zero() {
        let u = ScalarField::zeros(5, 5, 0.25).unwrap();
        let d = backward_divergence(&VectorField::zeros_like(&u));
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_of_constant_vector_field_vanishes_inside() {
        let n = 10;
        let u = ScalarField::from_fn(n, n, 1.0 / 9.0, |x1, _| x1).unwrap();
        let d = backward_divergence(&forward_gradient(&u));
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                if j < n - 2 {
                    assert!(d.get(i, j).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn adjoint_identity_direct_sum() {
        let u = zero_boundary(random_field(8, 8, 11));
        let p = VectorField::new(random_field(8, 8, 12), random_field(8, 8, 13)).unwrap();
        let g = forward_gradient(&u);
        let d = backward_divergence(&p);
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for k in 0..64 {
            lhs += g.px.values()[k] * p.px.values()[k] + g.py.values()[k] * p.py.values()[k];
            rhs += u.values()[k] * d.values()[k];
        }
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        assert!((lhs + rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn laplacian_exact_on_constants_and_quadratics() {
        let n = 11;
        let dx = 0.1;
        let c = ScalarField::constant(n, n, dx, 3.5).unwrap();
        assert!(five_point_laplacian(&c)
            .values()
            .iter()
            .all(|v| v.abs() < 1e-12));
        let q = ScalarField::from_fn(n, n, dx, |x1, _| x1 * x1).unwrap();
        let l = five_point_laplacian(&q);
        for (i, j) in q.interior() {
            assert!((l.get(i, j) - 2.0).abs() < 1e-9, "{}", l.get(i, j));
        }
        assert_eq!(l.get(0, 3), 0.0);
    }

    #[test]
    fn laplacian_is_div_grad_inside() {
        let u = random_field(8, 8, 5);
        let l = five_point_laplacian(&u);
        let dd = backward_divergence(&forward_gradient(&u));
        let scale = 1.0 / (u.dx() * u.dx());
        for (i, j) in u.interior() {
            assert!((l.get(i, j) - dd.get(i, j)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn csv_layout() {
        let z = ScalarField::zeros(3, 3, 0.5).unwrap();
        let text = z.to_csv();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("3,3,0.5"));
        let rest: Vec<&str> = lines.collect();
        assert_eq!(rest.len(), 3);
        for l in rest {
            let vals: Vec<f64> = l.split(',').map(|t| t.parse().unwrap()).collect();
            assert_eq!(vals, vec![0.0; 3]);
        }
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(matches!(
            ScalarField::from_csv(""),
            Err(GridError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ScalarField::from_csv("3,3\n"),
            Err(GridError::Parse { line: 1, .. })
        ));
        let short = "3,3,0.5\n0,0,0\n0,0\n0,0,0\n";
        assert!(matches!(
            ScalarField::from_csv(short),
            Err(GridError::Parse { line: 3, .. })
        ));
        let missing = "3,3,0.5\n0,0,0\n0,0,0\n";
        assert!(matches!(
            ScalarField::from_csv(missing),
            Err(GridError::Parse { .. })
        ));
        let junk = "3,3,0.5\n0,x,0\n0,0,0\n0,0,0\n";
        assert!(matches!(
            ScalarField::from_csv(junk),
            Err(GridError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn norms() {
        let z = ScalarField::zeros(4, 4, 0.5).unwrap();
        assert_eq!(linf_norm(&z), 0.0);
        assert_eq!(weighted_l2_norm(&z), 0.0);
        let mut s = z.clone();
        s.set(2, 1, -3.0);
        assert_eq!(linf_norm(&s), 3.0);
        let u = random_field(7, 9, 9);
        let mut m: f64 = 0.0;
        let mut ss = 0.0;
        for i in 0..9 {
            for j in 0..7 {
                m = m.max(u.get(i, j).abs());
                ss += u.get(i, j) * u.get(i, j);
            }
        }
        assert!((linf_norm(&u) - m).abs() <= 1e-12);
        assert!((weighted_l2_norm(&u) - u.dx() * ss.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn copy_boundary_leaves_interior() {
        let mut u = ScalarField::zeros(5, 4, 0.25).unwrap();
        let g = ScalarField::constant(5, 4, 0.25, 1.0).unwrap();
        u.copy_boundary_from(&g);
        for i in 0..4 {
            for j in 0..5 {
                let expect = if u.is_boundary(i, j) { 1.0 } else { 0.0 };
                assert_eq!(u.get(i, j), expect);
            }
        }
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(seed in any::<u64>(), nx in 3usize..9, ny in 3usize..9, mag in -300i32..300) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let scale = 10f64.powi(mag);
            let vals = (0..nx * ny).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
            let u = ScalarField::from_vec(nx, ny, 1.0 / 7.0, vals).unwrap();
            let back = ScalarField::from_csv(&u.to_csv()).unwrap();
            prop_assert_eq!(back, u);
        }

        #[test]
        fn adjointness_property(nx in 5usize..=16, ny in 5usize..=16, seed in any::<u64>()) {
            let u = zero_boundary(random_field(nx, ny, seed));
            let p = VectorField::new(
                random_field(nx, ny, seed ^ 1),
                random_field(nx, ny, seed ^ 2),
            ).unwrap();
            let g = forward_gradient(&u);
            let d = backward_divergence(&p);
            let lhs: f64 = (0..nx * ny)
                .map(|k| g.px.values()[k] * p.px.values()[k] + g.py.values()[k] * p.py.values()[k])
                .sum();
            let rhs: f64 = u.values().iter().zip(d.values()).map(|(a, b)| a * b).sum();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            prop_assert!((lhs + rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn kernels_are_linear_and_shape_preserving(
            n in 5usize..=12, alpha in -3.0f64..3.0, beta in -3.0f64..3.0, seed in any::<u64>()
        ) {
            let u = random_field(n, n, seed);
            let v = random_field(n, n, seed.wrapping_add(7));
            let comb = ScalarField::from_vec(
                n, n, u.dx(),
                u.values().iter().zip(v.values()).map(|(a, b)| alpha * a + beta * b).collect(),
            ).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);

            let gc = forward_gradient(&comb);
            let (gu, gv) = (forward_gradient(&u), forward_gradient(&v));
            prop_assert!(gc.px.same_grid(&u));
            for k in 0..n * n {
                prop_assert!(close(gc.px.values()[k], alpha * gu.px.values()[k] + beta * gv.px.values()[k]));
                prop_assert!(close(gc.py.values()[k], alpha * gu.py.values()[k] + beta * gv.py.values()[k]));
            }

            let lc = five_point_laplacian(&comb);
            let (lu, lv) = (five_point_laplacian(&u), five_point_laplacian(&v));
            prop_assert!(lc.same_grid(&u));
            for k in 0..n * n {
                prop_assert!(close(lc.values()[k], alpha * lu.values()[k] + beta * lv.values()[k]));
            }

            let pc = VectorField::new(comb.clone(), comb.clone()).unwrap();
            let dc = backward_divergence(&pc);
            let du = backward_divergence(&VectorField::new(u.clone(), u.clone()).unwrap());
            let dv = backward_divergence(&VectorField::new(v.clone(), v.clone()).unwrap());
            prop_assert!(dc.same_grid(&u));
            for k in 0..n * n {
                prop_assert!(close(dc.values()[k], alpha * du.values()[k] + beta * dv.values()[k]));
            }
        }
    }
}
