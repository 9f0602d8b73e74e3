use super::{sq_dist, PointCloud};
use crate::error::{invalid, Error, Result};

/// How a neighbourhood was selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborhoodQuery {
    /// Open ball: members satisfy `‖x_j - x_i‖ < radius`.
    Radius(f64),
    /// The `k` closest points, ties broken by smaller index.
    Count(usize),
}

/// A set of points around a query point, never containing the query itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center_index: usize,
    pub member_indices: Vec<usize>,
    pub query: NeighborhoodQuery,
}

impl Neighborhood {
    pub fn radius(&self) -> Option<f64> {
        match self.query {
            NeighborhoodQuery::Radius(r) => Some(r),
            NeighborhoodQuery::Count(_) => None,
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self.query {
            NeighborhoodQuery::Count(k) => Some(k),
            NeighborhoodQuery::Radius(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        self.member_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_indices.is_empty()
    }
}

fn check_index(cloud: &PointCloud, i: usize) -> Result<()> {
    if i >= cloud.count() {
        return Err(Error::IndexOutOfRange { index: i, count: cloud.count() });
    }
    Ok(())
}

/// All `j != i` strictly within `r` of point `i`, in increasing index order.
pub fn neighbors_within(cloud: &PointCloud, i: usize, r: f64) -> Result<Neighborhood> {
    check_index(cloud, i)?;
    if !(r >= 0.0) {
        return Err(invalid(format!("radius must be nonnegative, got {r}")));
    }
    let center = cloud.point(i);
    let r2 = r * r;
    let member_indices = cloud
        .points()
        .enumerate()
        .filter(|&(j, p)| j != i && sq_dist(p, center) < r2)
        .map(|(j, _)| j)
        .collect();
    Ok(Neighborhood { center_index: i, member_indices, query: NeighborhoodQuery::Radius(r) })
}

/// The `k` nearest points to point `i` (excluding `i`), ordered by distance and
/// then by index.
pub fn k_nearest(cloud: &PointCloud, i: usize, k: usize) -> Result<Neighborhood> {
    check_index(cloud, i)?;
    if k == 0 || k >= cloud.count() {
        return Err(invalid(format!("k must lie in 1..{}, got {k}", cloud.count())));
    }
    let center = cloud.point(i);
    let mut cand: Vec<(f64, usize)> = cloud
        .points()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, p)| (sq_dist(p, center), j))
        .collect();
    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, by_key);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_key);
    Ok(Neighborhood {
        center_index: i,
        member_indices: cand.into_iter().map(|(_, j)| j).collect(),
        query: NeighborhoodQuery::Count(k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_uniform_ball;
    use rand::{Rng, SeedableRng};

    #[test]
    fn coincident_points_are_neighbors() {
        let c = PointCloud::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(neighbors_within(&c, 0, 0.1).unwrap().member_indices, vec![1]);
        assert_eq!(neighbors_within(&c, 1, 0.1).unwrap().member_indices, vec![0]);
        assert!(neighbors_within(&c, 0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn out_of_range() {
        let c = PointCloud::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(matches!(neighbors_within(&c, 2, 1.0), Err(Error::IndexOutOfRange { .. })));
        assert!(k_nearest(&c, 5, 1).is_err());
        assert!(k_nearest(&c, 0, 2).is_err());
        assert!(k_nearest(&c, 0, 0).is_err());
    }

    #[test]
    fn collinear_knn() {
        let c = PointCloud::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        let nb = k_nearest(&c, 0, 2).unwrap();
        assert_eq!(nb.member_indices, vec![1, 2]);
        assert_eq!(nb.k(), Some(2));
        assert_eq!(nb.radius(), None);
        assert_eq!(k_nearest(&c, 2, 3).unwrap().member_indices, vec![1, 3, 0]);
    }

    #[test]
    fn ties_break_by_index() {
        let c = PointCloud::from_rows(&[[0.0], [1.0], [-1.0], [1.0]]).unwrap();
        assert_eq!(k_nearest(&c, 0, 2).unwrap().member_indices, vec![1, 2]);
    }

    #[test]
    fn matches_exhaustive_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for t in 0..100 {
            let n = rng.random_range(2..=200usize);
            let d = rng.random_range(1..=4usize);
            let c = sample_uniform_ball(d, 1.0, n, 1000 + t).unwrap();
            let i = rng.random_range(0..n);
            let r = rng.random_range(0.0..1.0);
            let k = rng.random_range(1..n);

            let dists: Vec<f64> =
                (0..n).map(|j| c.point(i).iter().zip(c.point(j)).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()).collect();
            let want_ball: Vec<usize> = (0..n).filter(|&j| j != i && dists[j] < r).collect();
            assert_eq!(neighbors_within(&c, i, r).unwrap().member_indices, want_ball);

            let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            order.sort_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap().then(a.cmp(&b)));
            order.truncate(k);
            assert_eq!(k_nearest(&c, i, k).unwrap().member_indices, order);
        }
    }
}
