//! Kernels, the unbiased MMD estimator between two points, Euclidean
//! distance for singleton points, and the dense pairwise distance matrix.
//!
//! For points `X = {x_i}` and `Y = {y_i}` of equal size `q ≥ 2` the estimator is
//!
//! ```text
//! S   = 1/(q²−q) · Σ_{i≠j} [ k(x_i,x_j) + k(y_i,y_j) − k(x_i,y_j) − k(x_j,y_i) ]
//! MMD = sqrt(max(S, 0))
//! ```
//!
//! The two cross terms have equal sums over ordered pairs, so the numerator is
//! computed as `W_xx + W_yy − 2·C_xy` where `W` are within-point sums (cached
//! per point) and `C_xy = Σ_{i≠j} k(x_i, y_j)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Point;
use crate::error::{Error, Result};

/// A symmetric kernel with its parameters resolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    /// `k(x, y) = x · y`
    Linear,
    /// `k(x, y) = exp(−γ ‖x − y‖²)`
    Gaussian { gamma: f64 },
}

impl Kernel {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        if gamma.is_finite() && gamma > 0.0 {
            Ok(Kernel::Gaussian { gamma })
        } else {
            Err(Error::Kernel(format!(
                "gaussian bandwidth must be > 0, got {gamma}"
            )))
        }
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(x, y),
            Kernel::Gaussian { gamma } => (-gamma * squared_distance(x, y)).exp(),
        }
    }
}

/// Pipeline-level kernel choice. A Gaussian without explicit bandwidth uses
/// `γ = 1/H'` where `H'` is the dimension the kernel is applied in.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelChoice {
    #[default]
    Linear,
    Gaussian {
        gamma: Option<f64>,
    },
}

impl KernelChoice {
    pub fn resolve(&self, dim: usize) -> Result<Kernel> {
        match *self {
            KernelChoice::Linear => Ok(Kernel::Linear),
            KernelChoice::Gaussian { gamma: Some(g) } => Kernel::gaussian(g),
            KernelChoice::Gaussian { gamma: None } => {
                if dim == 0 {
                    return Err(Error::Kernel("cannot derive bandwidth for H'=0".into()));
                }
                Kernel::gaussian(1.0 / dim as f64)
            }
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

pub fn kernel_eval(kernel: &Kernel, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x.len(), y.len())?;
    Ok(kernel.eval_unchecked(x, y))
}

pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x.len(), y.len())?;
    Ok(squared_distance(x, y).sqrt())
}

/// Per-point quantities reused across every pair the point takes part in.
struct Summary {
    /// Σ_i x_i, only populated for the linear kernel.
    sum: Vec<f64>,
    /// Σ_{i≠j} k(x_i, x_j)
    within: f64,
}

fn summarize(kernel: &Kernel, point: &Point) -> Summary {
    match kernel {
        Kernel::Linear => {
            let mut sum = vec![0.0; point.dim()];
            let mut self_dots = 0.0;
            for v in point.vectors() {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                self_dots += dot(v, v);
            }
            let within = dot(&sum, &sum) - self_dots;
            Summary { sum, within }
        }
        Kernel::Gaussian { .. } => Summary {
            sum: Vec::new(),
            within: off_diagonal_sum(kernel, point, point),
        },
    }
}

/// Σ_{i≠j} k(x_i, y_j) by direct enumeration.
fn off_diagonal_sum(kernel: &Kernel, x: &Point, y: &Point) -> f64 {
    let mut total = 0.0;
    for i in 0..x.q() {
        let xi = x.vector(i);
        for j in 0..y.q() {
            if i != j {
                total += kernel.eval_unchecked(xi, y.vector(j));
            }
        }
    }
    total
}

fn cross_sum(kernel: &Kernel, x: &Point, sx: &Summary, y: &Point, sy: &Summary) -> f64 {
    match kernel {
        Kernel::Linear => {
            let paired: f64 = x.vectors().zip(y.vectors()).map(|(a, b)| dot(a, b)).sum();
            dot(&sx.sum, &sy.sum) - paired
        }
        Kernel::Gaussian { .. } => off_diagonal_sum(kernel, x, y),
    }
}

fn mmd_from_parts(q: usize, within_x: f64, within_y: f64, cross: f64) -> f64 {
    let pairs = (q * q - q) as f64;
    let estimate = ((within_x + within_y) - 2.0 * cross) / pairs;
    estimate.max(0.0).sqrt()
}

fn check_pair(x: &Point, y: &Point) -> Result<()> {
    check_dims(x.dim(), y.dim())?;
    if x.q() != y.q() {
        return Err(Error::MixedPointSize(x.q(), y.q()));
    }
    if x.q() < 2 {
        return Err(Error::MmdTooFewVectors(x.q()));
    }
    Ok(())
}

/// Unbiased MMD between two equal-size points, clamped at zero before the root.
pub fn mmd_unbiased(kernel: &Kernel, x: &Point, y: &Point) -> Result<f64> {
    check_pair(x, y)?;
    let sx = summarize(kernel, x);
    let sy = summarize(kernel, y);
    let cross = cross_sum(kernel, x, &sx, y, &sy);
    Ok(mmd_from_parts(x.q(), sx.within, sy.within, cross))
}

/// Dense symmetric pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates and wraps a row-major square matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let size = rows.len();
        let mut data = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::DistanceMatrix(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        let matrix = DistanceMatrix { size, data };
        matrix.validate()?;
        Ok(matrix)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.size {
            if self.get(i, i) != 0.0 {
                return Err(Error::DistanceMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in 0..self.size {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::DistanceMatrix(format!(
                        "entry ({i},{j}) = {v} is not a finite non-negative distance"
                    )));
                }
                if v != self.get(j, i) {
                    return Err(Error::DistanceMatrix(format!(
                        "asymmetric entries at ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    /// Multiplies every entry by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        DistanceMatrix {
            size: self.size,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

/// Pairwise distances between points: unbiased MMD when `q ≥ 2`, Euclidean
/// between the single vectors when `q = 1`.
///
/// Each unordered pair is evaluated once; pairs run in parallel.
pub fn distance_matrix(points: &[Point], kernel: &Kernel) -> Result<DistanceMatrix> {
    let size = points.len();
    if let Some(first) = points.first() {
        for pt in &points[1..] {
            if pt.q() != first.q() {
                return Err(Error::MixedPointSize(first.q(), pt.q()));
            }
            check_dims(first.dim(), pt.dim())?;
        }
    }
    let q = points.first().map_or(0, Point::q);
    let pairs: Vec<(usize, usize)> = (0..size)
        .flat_map(|i| (i + 1..size).map(move |j| (i, j)))
        .collect();

    let values: Vec<f64> = if q == 1 {
        pairs
            .par_iter()
            .map(|&(i, j)| squared_distance(points[i].vector(0), points[j].vector(0)).sqrt())
            .collect()
    } else {
        let summaries: Vec<Summary> = points.par_iter().map(|pt| summarize(kernel, pt)).collect();
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let (x, y) = (&points[i], &points[j]);
                let cross = cross_sum(kernel, x, &summaries[i], y, &summaries[j]);
                mmd_from_parts(q, summaries[i].within, summaries[j].within, cross)
            })
            .collect()
    };

    let mut data = vec![0.0; size * size];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        data[i * size + j] = v;
        data[j * size + i] = v;
    }
    Ok(DistanceMatrix { size, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ActorId;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(vectors: &[&[f64]]) -> Point {
        let owned: Vec<Vec<f64>> = vectors.iter().map(|v| v.to_vec()).collect();
        Point::new(ActorId(0), 0, &owned).unwrap()
    }

    /// Literal double loop over ordered pairs i≠j with the four-term h[i,j].
    fn mmd_reference(kernel: &Kernel, x: &Point, y: &Point) -> f64 {
        let q = x.q();
        let k = |a: &[f64], b: &[f64]| kernel_eval(kernel, a, b).unwrap();
        let mut total = 0.0;
        for i in 0..q {
            for j in 0..q {
                if i == j {
                    continue;
                }
                total += k(x.vector(i), x.vector(j)) + k(y.vector(i), y.vector(j))
                    - k(x.vector(i), y.vector(j))
                    - k(x.vector(j), y.vector(i));
            }
        }
        (total / (q * q - q) as f64).max(0.0).sqrt()
    }

    fn random_point(rng: &mut ChaCha8Rng, q: usize, dim: usize) -> Point {
        let vs: Vec<Vec<f64>> = (0..q)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        Point::new(ActorId(0), 0, &vs).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(
            kernel_eval(&Kernel::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            11.0
        );
        let g1 = Kernel::gaussian(1.0).unwrap();
        assert_eq!(kernel_eval(&g1, &[0.3, -1.0], &[0.3, -1.0]).unwrap(), 1.0);
        let g = Kernel::gaussian(0.5).unwrap();
        let v = kernel_eval(&g, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert!((v - 0.13534).abs() < 1e-5);
        assert!(matches!(
            kernel_eval(&Kernel::Linear, &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Kernel::gaussian(0.0).is_err());
        assert!(Kernel::gaussian(f64::NAN).is_err());
    }

    #[test]
    fn default_bandwidth_tracks_dimension() {
        let k = KernelChoice::Gaussian { gamma: None }.resolve(4).unwrap();
        assert_eq!(k, Kernel::Gaussian { gamma: 0.25 });
        let k = KernelChoice::Gaussian { gamma: Some(2.0) }
            .resolve(4)
            .unwrap();
        assert_eq!(k, Kernel::Gaussian { gamma: 2.0 });
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert_eq!(euclidean(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        let v = euclidean(&[1.0, 1.0, 1.0], &[0.0; 3]).unwrap();
        assert!((v - 1.73205).abs() < 1e-5);
        assert!(euclidean(&[1.0], &[]).is_err());
    }

    #[test]
    fn mmd_hand_cases() {
        let x = point(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let y = point(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let v = mmd_unbiased(&Kernel::Linear, &x, &y).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);

        // raw estimate is -1, clamped to 0
        let x = point(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let y = point(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(mmd_unbiased(&Kernel::Linear, &x, &y).unwrap(), 0.0);

        let x = point(&[&[0.3, -1.2], &[2.0, 0.7], &[-0.4, 0.1]]);
        assert_eq!(mmd_unbiased(&Kernel::Linear, &x, &x.clone()).unwrap(), 0.0);
        let g = Kernel::gaussian(0.7).unwrap();
        assert_eq!(mmd_unbiased(&g, &x, &x.clone()).unwrap(), 0.0);
    }

    #[test]
    fn mmd_rejects_singletons_and_mismatches() {
        let a = point(&[&[1.0, 2.0]]);
        assert_eq!(
            mmd_unbiased(&Kernel::Linear, &a, &a.clone()),
            Err(Error::MmdTooFewVectors(1))
        );
        let b = point(&[&[1.0, 2.0], &[0.0, 0.0]]);
        let c = point(&[&[1.0, 2.0], &[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(
            mmd_unbiased(&Kernel::Linear, &b, &c),
            Err(Error::MixedPointSize(2, 3))
        );
        let d = point(&[&[1.0], &[0.0]]);
        assert!(matches!(
            mmd_unbiased(&Kernel::Linear, &b, &d),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mmd_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = rng.gen_range(2..=8);
            let dim = rng.gen_range(1..=6);
            let x = random_point(&mut rng, q, dim);
            let y = random_point(&mut rng, q, dim);
            for kernel in [Kernel::Linear, Kernel::gaussian(0.3).unwrap()] {
                let fast = mmd_unbiased(&kernel, &x, &y).unwrap();
                let slow = mmd_reference(&kernel, &x, &y);
                assert!((fast - slow).abs() < 1e-9, "{kernel:?}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn identical_points_give_zero_matrix() {
        let x = point(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.5]]);
        let dm = distance_matrix(&[x.clone(), x], &Kernel::Linear).unwrap();
        assert_eq!(dm.row(0), &[0.0, 0.0]);
        assert_eq!(dm.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn singleton_points_use_euclidean() {
        let pts: Vec<Point> = [0.0, 3.0, 4.0].iter().map(|&v| point(&[&[v]])).collect();
        let dm = distance_matrix(&pts, &Kernel::Linear).unwrap();
        assert_eq!(dm.get(0, 1), 3.0);
        assert_eq!(dm.get(0, 2), 4.0);
        assert_eq!(dm.get(1, 2), 1.0);
        dm.validate().unwrap();
    }

    #[test]
    fn matrix_matches_reference_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point> = (0..6).map(|_| random_point(&mut rng, 4, 3)).collect();
        for kernel in [Kernel::Linear, Kernel::gaussian(1.0 / 3.0).unwrap()] {
            let dm = distance_matrix(&pts, &kernel).unwrap();
            dm.validate().unwrap();
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    let want = if i == j {
                        0.0
                    } else {
                        mmd_reference(&kernel, &pts[i], &pts[j])
                    };
                    assert!((dm.get(i, j) - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn mixed_point_sizes_rejected() {
        let a = point(&[&[1.0], &[2.0]]);
        let b = point(&[&[1.0], &[2.0], &[3.0]]);
        assert_eq!(
            distance_matrix(&[a, b], &Kernel::Linear),
            Err(Error::MixedPointSize(2, 3))
        );
    }

    #[test]
    fn from_rows_validates() {
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
    }

    fn pair_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        (2usize..7, 1usize..5).prop_flat_map(|(q, dim)| {
            let vecs = prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), q);
            (vecs.clone(), vecs)
        })
    }

    proptest! {
        #[test]
        fn joint_relabeling_invariance((xs, ys) in pair_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut order: Vec<usize> = (0..xs.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let px: Vec<Vec<f64>> = order.iter().map(|&i| xs[i].clone()).collect();
            let py: Vec<Vec<f64>> = order.iter().map(|&i| ys[i].clone()).collect();
            let mk = |v: &[Vec<f64>]| Point::new(ActorId(0), 0, v).unwrap();
            for kernel in [Kernel::Linear, Kernel::gaussian(0.5).unwrap()] {
                let a = mmd_unbiased(&kernel, &mk(&xs), &mk(&ys)).unwrap();
                let b = mmd_unbiased(&kernel, &mk(&px), &mk(&py)).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn linear_homogeneity((xs, ys) in pair_strategy(), c in 0.0f64..5.0) {
            let mk = |v: &[Vec<f64>], s: f64| {
                let scaled: Vec<Vec<f64>> = v.iter().map(|r| r.iter().map(|x| x * s).collect()).collect();
                Point::new(ActorId(0), 0, &scaled).unwrap()
            };
            let base = mmd_unbiased(&Kernel::Linear, &mk(&xs, 1.0), &mk(&ys, 1.0)).unwrap();
            let scaled = mmd_unbiased(&Kernel::Linear, &mk(&xs, c), &mk(&ys, c)).unwrap();
            prop_assert!((scaled - c * base).abs() < 1e-9 * (1.0 + c * base));
        }

        #[test]
        fn euclidean_triangle_inequality(
            vs in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 3..8)
        ) {
            let pts: Vec<Point> = vs.iter().map(|v| Point::new(ActorId(0), 0, std::slice::from_ref(v)).unwrap()).collect();
            let dm = distance_matrix(&pts, &Kernel::Linear).unwrap();
            dm.validate().unwrap();
            let s = dm.size();
            for i in 0..s { for j in 0..s { for k in 0..s {
                prop_assert!(dm.get(i, k) <= dm.get(i, j) + dm.get(j, k) + 1e-9);
            }}}
        }
    }
}
