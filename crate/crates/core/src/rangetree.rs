//! Static layered range tree answering one-sided dominance queries.
//!
//! The outer level is a segment tree over the points sorted by the first
//! coordinate. Every node carries an associated structure of one dimension
//! less over the points below it; the last coordinate is a sorted array with
//! prefix minima of the payload. A query for `coords <= bounds` turns the first
//! coordinate into a prefix of the sorted order, which splits into `O(log N)`
//! canonical nodes, giving `O(log^d N)` node visits overall.
//!
//! Among all qualifying points the one with the smallest payload is returned.

use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RangePoint {
    pub coords: Vec<i64>,
    pub payload: u64,
}

impl RangePoint {
    pub fn new(coords: Vec<i64>, payload: u64) -> Self {
        Self { coords, payload }
    }

    pub fn dominated_by(&self, bounds: &[i64]) -> bool {
        self.coords.iter().zip(bounds).all(|(c, b)| c <= b)
    }
}

#[derive(Debug)]
enum Level {
    /// Last axis: `keys` ascending, `best[k]` = id of the smallest payload among
    /// the first `k + 1` entries.
    Array { keys: Vec<i64>, best: Vec<u32> },
    Tree { keys: Vec<i64>, nodes: Vec<Node> },
}

#[derive(Debug)]
struct Node {
    lo: u32,
    hi: u32,
    children: Option<(u32, u32)>,
    assoc: Level,
}

#[derive(Debug)]
pub struct RangeTree {
    dim: usize,
    points: Vec<RangePoint>,
    root: Option<Level>,
    stored_entries: u64,
    visits: AtomicU64,
}

impl RangeTree {
    /// Builds the tree. Duplicate coordinates are fine; payloads must be unique.
    pub fn build(points: Vec<RangePoint>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("range tree dimension must be >= 1".into()));
        }
        if points.len() > u32::MAX as usize {
            return Err(Error::Guard {
                what: "range tree size",
                actual: points.len() as u64,
                limit: u32::MAX as u64,
            });
        }
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if p.coords.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.coords.len(),
                });
            }
            if !seen.insert(p.payload) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate payload {} in range tree input",
                    p.payload
                )));
            }
        }
        let mut stored = 0u64;
        let root = if points.is_empty() {
            None
        } else {
            let ids: Vec<u32> = (0..points.len() as u32).collect();
            Some(build_level(&points, ids, 0, dim, &mut stored))
        };
        Ok(Self {
            dim,
            points,
            root,
            stored_entries: stored,
            visits: AtomicU64::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[RangePoint] {
        &self.points
    }

    /// Total keys stored across all levels (the space measure).
    pub fn stored_entries(&self) -> u64 {
        self.stored_entries
    }

    /// Node visits accumulated over all queries so far.
    pub fn visits(&self) -> u64 {
        self.visits.load(Ordering::Relaxed)
    }

    pub fn reset_visits(&self) {
        self.visits.store(0, Ordering::Relaxed);
    }

    /// The smallest-payload point with `coords[i] <= bounds[i]` for every `i`.
    pub fn query_dominated(&self, bounds: &[i64]) -> Result<Option<&RangePoint>> {
        self.query_counted(bounds).map(|(p, _)| p)
    }

    /// Like [`Self::query_dominated`] but also returns this query's visit count.
    pub fn query_counted(&self, bounds: &[i64]) -> Result<(Option<&RangePoint>, u64)> {
        if bounds.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: bounds.len(),
            });
        }
        let Some(root) = &self.root else {
            return Ok((None, 0));
        };
        let mut visits = 0u64;
        let best = query_level(&self.points, root, bounds, 0, &mut visits);
        self.visits.fetch_add(visits, Ordering::Relaxed);
        Ok((best.map(|id| &self.points[id as usize]), visits))
    }
}

fn build_level(points: &[RangePoint], mut ids: Vec<u32>, axis: usize, dim: usize, stored: &mut u64) -> Level {
    ids.sort_by_key(|&id| (points[id as usize].coords[axis], points[id as usize].payload));
    let keys: Vec<i64> = ids.iter().map(|&id| points[id as usize].coords[axis]).collect();
    *stored += keys.len() as u64;
    if axis + 1 == dim {
        let mut best = Vec::with_capacity(ids.len());
        let mut cur = ids[0];
        for &id in &ids {
            if points[id as usize].payload < points[cur as usize].payload {
                cur = id;
            }
            best.push(cur);
        }
        return Level::Array { keys, best };
    }
    let mut nodes = Vec::with_capacity(2 * ids.len());
    build_nodes(points, &ids, 0, ids.len() as u32, axis, dim, &mut nodes, stored);
    Level::Tree { keys, nodes }
}

#[allow(clippy::too_many_arguments)]
fn build_nodes(
    points: &[RangePoint],
    sorted: &[u32],
    lo: u32,
    hi: u32,
    axis: usize,
    dim: usize,
    nodes: &mut Vec<Node>,
    stored: &mut u64,
) -> u32 {
    let idx = nodes.len() as u32;
    let assoc = build_level(points, sorted[lo as usize..hi as usize].to_vec(), axis + 1, dim, stored);
    nodes.push(Node {
        lo,
        hi,
        children: None,
        assoc,
    });
    if hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let l = build_nodes(points, sorted, lo, mid, axis, dim, nodes, stored);
        let r = build_nodes(points, sorted, mid, hi, axis, dim, nodes, stored);
        nodes[idx as usize].children = Some((l, r));
    }
    idx
}

/// Number of keys `<= bound`, counting each probe as a visit.
fn upper_bound(keys: &[i64], bound: i64, visits: &mut u64) -> usize {
    let (mut lo, mut hi) = (0usize, keys.len());
    while lo < hi {
        *visits += 1;
        let mid = lo + (hi - lo) / 2;
        if keys[mid] <= bound {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

fn better(points: &[RangePoint], a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => {
            if points[y as usize].payload < points[x as usize].payload {
                Some(y)
            } else {
                Some(x)
            }
        }
        (x, None) => x,
        (None, y) => y,
    }
}

fn query_level(points: &[RangePoint], level: &Level, bounds: &[i64], axis: usize, visits: &mut u64) -> Option<u32> {
    match level {
        Level::Array { keys, best } => {
            *visits += 1;
            let k = upper_bound(keys, bounds[axis], visits);
            (k > 0).then(|| best[k - 1])
        }
        Level::Tree { keys, nodes } => {
            let k = upper_bound(keys, bounds[axis], visits) as u32;
            if k == 0 {
                *visits += 1;
                return None;
            }
            query_prefix(points, nodes, 0, k, bounds, axis, visits)
        }
    }
}

fn query_prefix(
    points: &[RangePoint],
    nodes: &[Node],
    idx: u32,
    k: u32,
    bounds: &[i64],
    axis: usize,
    visits: &mut u64,
) -> Option<u32> {
    let node = &nodes[idx as usize];
    *visits += 1;
    if node.lo >= k {
        return None;
    }
    if node.hi <= k {
        return query_level(points, &node.assoc, bounds, axis + 1, visits);
    }
    let (l, r) = node.children.expect("partially covered node has children");
    let left = query_prefix(points, nodes, l, k, bounds, axis, visits);
    let right = query_prefix(points, nodes, r, k, bounds, axis, visits);
    better(points, left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn naive<'a>(points: &'a [RangePoint], bounds: &[i64]) -> Option<&'a RangePoint> {
        points
            .iter()
            .filter(|p| p.dominated_by(bounds))
            .min_by_key(|p| p.payload)
    }

    fn random_points(r: &mut SplitMix64, n: usize, d: usize, range: i64) -> Vec<RangePoint> {
        (0..n)
            .map(|i| RangePoint::new((0..d).map(|_| r.range_i64(-range, range)).collect(), i as u64))
            .collect()
    }

    #[test]
    fn empty_tree() {
        let t = RangeTree::build(vec![], 2).unwrap();
        assert_eq!(t.len(), 0);
        assert!(t.query_dominated(&[i64::MAX, i64::MAX]).unwrap().is_none());
    }

    #[test]
    fn small_examples() {
        let pts = vec![
            RangePoint::new(vec![1, 5], 0),
            RangePoint::new(vec![3, 2], 1),
            RangePoint::new(vec![4, 4], 2),
        ];
        let t = RangeTree::build(pts.clone(), 2).unwrap();
        assert_eq!(t.len(), 3);
        let all: HashSet<_> = pts.iter().collect();
        assert_eq!(t.points().iter().collect::<HashSet<_>>(), all);
        assert_eq!(t.query_dominated(&[3, 3]).unwrap().unwrap().coords, vec![3, 2]);
        assert!(t.query_dominated(&[0, 0]).unwrap().is_none());
        // everything qualifies -> smallest payload
        assert_eq!(t.query_dominated(&[10, 10]).unwrap().unwrap().payload, 0);
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(
            RangeTree::build(vec![RangePoint::new(vec![1], 0)], 2),
            Err(Error::DimensionMismatch { .. })
        ));
        let t = RangeTree::build(vec![RangePoint::new(vec![1, 2], 0)], 2).unwrap();
        assert!(matches!(
            t.query_dominated(&[1]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(RangeTree::build(
            vec![RangePoint::new(vec![1], 0), RangePoint::new(vec![2], 0)],
            1
        )
        .is_err());
    }

    #[test]
    fn duplicates_resolved_by_payload() {
        let pts = vec![
            RangePoint::new(vec![2, 2], 9),
            RangePoint::new(vec![2, 2], 4),
            RangePoint::new(vec![2, 2], 7),
        ];
        let t = RangeTree::build(pts, 2).unwrap();
        assert_eq!(t.query_dominated(&[2, 2]).unwrap().unwrap().payload, 4);
        assert!(t.query_dominated(&[2, 1]).unwrap().is_none());
    }

    #[test]
    fn self_membership_4096_3d() {
        let mut r = SplitMix64::new(17);
        let pts = random_points(&mut r, 4096, 3, 1000);
        let t = RangeTree::build(pts.clone(), 3).unwrap();
        for p in &pts {
            let hit = t.query_dominated(&p.coords).unwrap().unwrap();
            assert!(hit.dominated_by(&p.coords));
            assert!(hit.payload <= p.payload);
        }
    }

    #[test]
    fn matches_naive_scan_2d() {
        let mut r = SplitMix64::new(5);
        let pts = random_points(&mut r, 1000, 2, 500);
        let t = RangeTree::build(pts.clone(), 2).unwrap();
        for _ in 0..1000 {
            let b = [r.range_i64(-600, 600), r.range_i64(-600, 600)];
            assert_eq!(t.query_dominated(&b).unwrap(), naive(&pts, &b));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let mut r = SplitMix64::new(8);
        let pts = random_points(&mut r, 300, 3, 50);
        let a = RangeTree::build(pts.clone(), 3).unwrap();
        let b = RangeTree::build(pts, 3).unwrap();
        for _ in 0..200 {
            let q: Vec<i64> = (0..3).map(|_| r.range_i64(-60, 60)).collect();
            assert_eq!(a.query_counted(&q).unwrap(), b.query_counted(&q).unwrap());
        }
        assert_eq!(a.visits(), b.visits());
    }

    #[test]
    fn space_is_n_log_pow() {
        let mut r = SplitMix64::new(3);
        for (d, n) in [(1usize, 1024usize), (2, 1024), (3, 1024)] {
            let t = RangeTree::build(random_points(&mut r, n, d, 1 << 20), d).unwrap();
            let log = (n as f64).log2() + 1.0;
            let bound = (n as f64) * log.powi(d as i32 - 1) * 2.0;
            assert!((t.stored_entries() as f64) <= bound, "d={d}: {}", t.stored_entries());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn agrees_with_scan(seed in any::<u64>(), d in 1usize..=3, n in 0usize..80) {
                let mut r = SplitMix64::new(seed);
                let pts = random_points(&mut r, n, d, 6);
                let t = RangeTree::build(pts.clone(), d).unwrap();
                for _ in 0..40 {
                    let b: Vec<i64> = (0..d).map(|_| r.range_i64(-7, 7)).collect();
                    prop_assert_eq!(t.query_dominated(&b).unwrap(), naive(&pts, &b));
                }
            }
        }
    }
}
