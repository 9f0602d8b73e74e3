use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::geometry::{seeded_rng, PointCloud};

/// A linear map `R^d -> R^m`, `m < d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearMap {
    out_dim: usize,
    in_dim: usize,
    matrix: Vec<f64>,
    lipschitz: f64,
}

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;

impl LinearMap {
    /// Wraps an `m × d` row-major matrix; the Lipschitz constant is computed.
    pub fn new(out_dim: usize, in_dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if out_dim == 0 || out_dim >= in_dim {
            return Err(invalid(format!("need 1 <= m < d, got m={out_dim}, d={in_dim}")));
        }
        if matrix.len() != out_dim * in_dim {
            return Err(Error::DimensionMismatch { expected: out_dim * in_dim, got: matrix.len() });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(invalid("matrix entries must be finite"));
        }
        let mut map = Self { out_dim, in_dim, matrix, lipschitz: 1.0 };
        map.lipschitz = lipschitz_of(&map);
        if !(map.lipschitz > 0.0) {
            return Err(invalid("the zero map has no positive Lipschitz constant"));
        }
        Ok(map)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.in_dim..(i + 1) * self.in_dim]
    }

    pub fn apply_point(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.matrix.chunks_exact(self.in_dim)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, cloud: &PointCloud) -> Result<PointCloud> {
        if cloud.dim() != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, got: cloud.dim() });
        }
        Ok(cloud.map_points(self.out_dim, |p, o| self.apply_point(p, o)))
    }
}

fn check_dims(d: usize, m: usize) -> Result<()> {
    if m == 0 || m >= d {
        return Err(invalid(format!("need 1 <= m < d, got d={d}, m={m}")));
    }
    Ok(())
}

fn gaussian_matrix(d: usize, m: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..m * d).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Modified Gram-Schmidt with one reorthogonalization pass, in place over rows.
fn orthonormalize_rows(a: &mut [f64], d: usize) -> Result<()> {
    let m = a.len() / d;
    for i in 0..m {
        for _pass in 0..2 {
            for j in 0..i {
                let (done, rest) = a.split_at_mut(i * d);
                let qj = &done[j * d..(j + 1) * d];
                let ri = &mut rest[..d];
                let dot: f64 = qj.iter().zip(ri.iter()).map(|(x, y)| x * y).sum();
                for (r, q) in ri.iter_mut().zip(qj) {
                    *r -= dot * q;
                }
            }
        }
        let ri = &mut a[i * d..(i + 1) * d];
        let norm = ri.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Err(Error::RankDeficient { requested: m, achieved: i });
        }
        ri.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(())
}

/// Gaussian matrix with orthonormalized rows, so `L = 1`.
pub fn random_projection(d: usize, m: usize, seed: u64) -> Result<LinearMap> {
    check_dims(d, m)?;
    let mut a = gaussian_matrix(d, m, seed);
    orthonormalize_rows(&mut a, d)?;
    Ok(LinearMap { out_dim: m, in_dim: d, matrix: a, lipschitz: 1.0 })
}

/// Raw Gaussian matrix with `N(0, 1/m)` entries (Johnson-Lindenstrauss scaling).
pub fn gaussian_projection(d: usize, m: usize, seed: u64) -> Result<LinearMap> {
    check_dims(d, m)?;
    let s = 1.0 / (m as f64).sqrt();
    let a = gaussian_matrix(d, m, seed).into_iter().map(|x| x * s).collect();
    LinearMap::new(m, d, a)
}

/// Keeps the first `m` coordinates.
pub fn coordinate_projection(d: usize, m: usize) -> Result<LinearMap> {
    check_dims(d, m)?;
    let mut a = vec![0.0; m * d];
    for i in 0..m {
        a[i * d + i] = 1.0;
    }
    Ok(LinearMap { out_dim: m, in_dim: d, matrix: a, lipschitz: 1.0 })
}

/// Top singular value by power iteration on the `m × m` Gram matrix `A Aᵀ`.
pub fn lipschitz_of(map: &LinearMap) -> f64 {
    let m = map.out_dim;
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let g: f64 = map.row(i).iter().zip(map.row(j)).map(|(a, b)| a * b).sum();
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    // Deterministic start with distinct entries, so it is not orthogonal to a
    // coordinate-aligned top eigenvector.
    let mut v: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut w = vec![0.0; m];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        for i in 0..m {
            w[i] = (0..m).map(|j| gram[i * m + j] * v[j]).sum();
        }
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut v, &mut w);
        let done = (next - lambda).abs() <= POWER_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

/// Principal component analysis of a cloud.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pca {
    /// Rows are the top principal directions.
    pub map: LinearMap,
    pub mean: Vec<f64>,
    /// Variance captured by each retained direction over the total variance.
    pub explained_variance_ratio: Vec<f64>,
}

/// Rows are the top-`m` principal directions of the centred cloud, each signed
/// so its largest-magnitude entry is positive.
pub fn pca(cloud: &PointCloud, m: usize) -> Result<Pca> {
    let d = cloud.dim();
    check_dims(d, m)?;
    let n = cloud.count();
    if n < 2 {
        return Err(invalid(format!("PCA needs at least two points, got {n}")));
    }
    let mut mean = vec![0.0; d];
    for p in cloud.points() {
        mean.iter_mut().zip(p).for_each(|(a, x)| *a += x);
    }
    mean.iter_mut().for_each(|a| *a /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut c = vec![0.0; d];
    for p in cloud.points() {
        c.iter_mut().zip(p.iter().zip(&mean)).for_each(|(ci, (x, mu))| *ci = x - mu);
        for i in 0..d {
            for j in 0..=i {
                cov[(i, j)] += c[i] * c[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[(j, i)] = cov[(i, j)];
        }
    }
    cov /= (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|x| x.max(0.0)).sum();
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order.iter().filter(|&&k| eig.eigenvalues[k] > 1e-12 * top.max(f64::MIN_POSITIVE)).count();
    if rank < m {
        return Err(Error::RankDeficient { requested: m, achieved: rank });
    }
    let mut a = vec![0.0; m * d];
    for (r, &k) in order.iter().take(m).enumerate() {
        let col = eig.eigenvectors.column(k);
        let pivot = (0..d).fold(0, |best, i| if col[i].abs() > col[best].abs() { i } else { best });
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            a[r * d + i] = sign * col[i];
        }
    }
    let ratios = order.iter().take(m).map(|&k| eig.eigenvalues[k].max(0.0) / total).collect();
    Ok(Pca {
        map: LinearMap { out_dim: m, in_dim: d, matrix: a, lipschitz: 1.0 },
        mean,
        explained_variance_ratio: ratios,
    })
}

/// The linear part of [`pca`]; translations do not affect any audited quantity.
pub fn pca_projection(cloud: &PointCloud, m: usize) -> Result<LinearMap> {
    Ok(pca(cloud, m)?.map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_uniform_ball, sq_dist};
    use rand::Rng;

    fn rows_orthonormal(map: &LinearMap) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..map.out_dim() {
            for j in 0..map.out_dim() {
                let dot: f64 = map.row(i).iter().zip(map.row(j)).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    #[test]
    fn random_projection_is_orthonormal_and_contracting() {
        assert!(random_projection(5, 5, 0).is_err());
        assert!(random_projection(5, 0, 0).is_err());
        let map = random_projection(10, 4, 3).unwrap();
        assert!(rows_orthonormal(&map) < 1e-10);
        assert_eq!(map, random_projection(10, 4, 3).unwrap());
        assert!((lipschitz_of(&map) - 1.0).abs() < 1e-8);
        let x = sample_uniform_ball(10, 1.0, 200, 9).unwrap();
        let y = map.apply(&x).unwrap();
        for i in 0..200 {
            for j in 0..i {
                assert!(sq_dist(y.point(i), y.point(j)) <= sq_dist(x.point(i), x.point(j)) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn coordinate_projection_examples() {
        let map = coordinate_projection(3, 2).unwrap();
        let mut out = [0.0; 2];
        map.apply_point(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, [1.0, 2.0]);
        assert_eq!(map.lipschitz(), 1.0);
        assert!((lipschitz_of(&map) - 1.0).abs() < 1e-12);
        assert!(coordinate_projection(3, 3).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let diag = LinearMap::new(2, 3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((diag.lipschitz() - 3.0).abs() < 1e-10);
        let swapped = LinearMap::new(2, 3, vec![1.0, 0.0, 0.0, 0.0, 3.0, 0.0]).unwrap();
        assert!((swapped.lipschitz() - 3.0).abs() < 1e-10);
        assert!(LinearMap::new(1, 2, vec![0.0, 0.0]).is_err());
        assert!(LinearMap::new(2, 2, vec![0.0; 4]).is_err());
    }

    #[test]
    fn lipschitz_matches_svd_oracle() {
        let mut rng = seeded_rng(77);
        for trial in 0..40 {
            let d = rng.random_range(2..12);
            let m = rng.random_range(1..d);
            let map = gaussian_projection(d, m, trial).unwrap();
            let a = DMatrix::from_row_slice(m, d, map.matrix());
            let top = a.singular_values().max();
            assert!((map.lipschitz() / top - 1.0).abs() < 1e-8, "d={d} m={m}");
        }
    }

    #[test]
    fn pca_recovers_a_line() {
        let dir = [1.0 / 3.0, -2.0 / 3.0, 2.0 / 3.0];
        let pts: Vec<[f64; 3]> = (0..50)
            .map(|i| {
                let t = i as f64 / 7.0 - 3.0;
                [1.0 + t * dir[0], 2.0 + t * dir[1], -1.0 + t * dir[2]]
            })
            .collect();
        let cloud = PointCloud::from_rows(&pts).unwrap();
        let p = pca(&cloud, 1).unwrap();
        // Largest-magnitude entries of dir are tied; the recovered direction is ±dir.
        let dot: f64 = p.map.row(0).iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-10);
        assert!((p.explained_variance_ratio[0] - 1.0).abs() < 1e-10);
        assert!(matches!(pca(&cloud, 2), Err(Error::RankDeficient { requested: 2, achieved: 1 })));
    }

    #[test]
    fn pca_sign_convention_and_determinism() {
        let x = sample_uniform_ball(5, 1.0, 300, 4).unwrap();
        let x = x.map_points(5, |p, o| {
            for i in 0..5 {
                o[i] = p[i] * (5 - i) as f64;
            }
        });
        let a = pca(&x, 3).unwrap();
        assert_eq!(a, pca(&x, 3).unwrap());
        for r in 0..3 {
            let row = a.map.row(r);
            let pivot = row.iter().copied().fold(0.0f64, |b, v| if v.abs() > b.abs() { v } else { b });
            assert!(pivot > 0.0);
        }
        assert!(rows_orthonormal(&a.map) < 1e-10);
    }

    #[test]
    fn pca_isotropic_variance_ratio() {
        let mut rng = seeded_rng(5);
        let (d, m, n) = (6, 2, 10_000);
        let data: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = PointCloud::from_flat(d, data).unwrap();
        let p = pca(&x, m).unwrap();
        let captured: f64 = p.explained_variance_ratio.iter().sum();
        assert!((captured - m as f64 / d as f64).abs() < 0.03, "captured {captured}");
    }

    #[test]
    fn pca_is_idempotent_on_projected_data() {
        let x = sample_uniform_ball(4, 1.0, 200, 6).unwrap();
        let x = x.map_points(4, |p, o| {
            o.copy_from_slice(p);
            o[0] *= 4.0;
            o[1] *= 2.0;
        });
        let p = pca(&x, 2).unwrap();
        // Reconstruct onto the principal plane, then project again.
        let recon = x.map_points(4, |pt, o| {
            let c: Vec<f64> = pt.iter().zip(&p.mean).map(|(a, b)| a - b).collect();
            o.copy_from_slice(&p.mean);
            for r in 0..2 {
                let coef: f64 = p.map.row(r).iter().zip(&c).map(|(a, b)| a * b).sum();
                o.iter_mut().zip(p.map.row(r)).for_each(|(v, w)| *v += coef * w);
            }
        });
        let once = p.map.apply(&x).unwrap();
        let twice = p.map.apply(&recon).unwrap();
        for i in 0..200 {
            for r in 0..2 {
                assert!((once.point(i)[r] - twice.point(i)[r]).abs() < 1e-10);
            }
        }
        let q = pca(&recon, 2).unwrap();
        for r in 0..2 {
            let dot: f64 = p.map.row(r).iter().zip(q.map.row(r)).map(|(a, b)| a * b).sum();
            assert!((dot - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rotated_coordinate_projection_has_same_fiber_statistics() {
        // Composing the projection with an orthogonal change of coordinates in the
        // domain gives another orthonormal projection; on a rotation-invariant
        // sample the count of points in a thin slab around the fibre through the
        // origin stays within Monte Carlo noise.
        let (d, m, n) = (5, 2, 40_000);
        let x = sample_uniform_ball(d, 1.0, n, 10).unwrap();
        let coord = coordinate_projection(d, m).unwrap();
        let rot = random_projection(d, m, 21).unwrap();
        let slab = |map: &LinearMap| {
            let y = map.apply(&x).unwrap();
            y.points().filter(|p| p.iter().map(|v| v * v).sum::<f64>() < 0.09).count() as f64
        };
        let (a, b) = (slab(&coord), slab(&rot));
        let sigma = (a.max(b) * (1.0 - a.max(b) / n as f64)).sqrt();
        assert!((a - b).abs() < 5.0 * sigma * std::f64::consts::SQRT_2, "{a} vs {b}");
    }
}
