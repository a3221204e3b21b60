//! Freiman 2-isomorphisms between subsets of `Z` or `Z^2`.
//!
//! A bijection `phi: A -> B` is an F2-isomorphism when
//! `a1 + a2 = a3 + a4  <=>  phi(a1) + phi(a2) = phi(a3) + phi(a4)`.
//! Such maps preserve `|2A|`, which is what lets a bi-arithmetic progression
//! be studied as a subset of the two-lines set
//! `{(i,0) : i < l1} ∪ {(j,1) : j < l2}`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::{self, Debug};
use std::hash::Hash;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::progressions::BpCover;
use crate::sumset::SumsetStats;

/// Element type of a torsion-free carrier group (here `Z` or `Z^2`).
pub trait Carrier: Copy + Eq + Hash + Ord + Debug + Add<Output = Self> {}

impl Carrier for i64 {}

/// A point of `Z^2`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point(pub i64, pub i64);

impl Add for Point {
    type Output = Point;

    fn add(self, rhs: Point) -> Point {
        Point(self.0 + rhs.0, self.1 + rhs.1)
    }
}

impl Carrier for Point {}

impl Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// A finite subset of `Z^2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarSet {
    pub points: BTreeSet<Point>,
}

impl PlanarSet {
    pub fn new<I: IntoIterator<Item = Point>>(points: I) -> Result<Self> {
        let points: BTreeSet<Point> = points.into_iter().collect();
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(PlanarSet { points })
    }

    /// `{(i,0) : i < l1} ∪ {(j,1) : j < l2}`.
    pub fn two_lines(l1: u64, l2: u64) -> Result<Self> {
        let row = |len: u64, y: i64| (0..len as i64).map(move |x| Point(x, y));
        PlanarSet::new(row(l1, 0).chain(row(l2, 1)))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parses `(x,y);(x,y);...`.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |offset| Error::Parse { offset, kind: crate::error::ParseErrorKind::MalformedToken };
        let mut pts = Vec::new();
        let mut offset = 0;
        for part in text.split(';') {
            let lead = part.len() - part.trim_start().len();
            let body = part.trim();
            let at = offset + lead;
            let inner = body
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| err(at))?;
            let (x, y) = inner.split_once(',').ok_or_else(|| err(at))?;
            let x: i64 = x.trim().parse().map_err(|_| err(at + 1))?;
            let y: i64 = y.trim().parse().map_err(|_| err(at + 1))?;
            pts.push(Point(x, y));
            offset += part.len() + 1;
        }
        PlanarSet::new(pts).map_err(|_| err(0))
    }

    pub fn render(&self) -> String {
        self.points.iter().map(|p| format!("({},{})", p.0, p.1)).collect::<Vec<_>>().join(";")
    }

    /// True when all points lie on one straight line.
    pub fn is_collinear(&self) -> bool {
        let pts: Vec<Point> = self.points.iter().copied().collect();
        if pts.len() <= 2 {
            return true;
        }
        let (p0, p1) = (pts[0], pts[1]);
        pts[2..].iter().all(|q| {
            (p1.0 - p0.0) as i128 * (q.1 - p0.1) as i128 == (p1.1 - p0.1) as i128 * (q.0 - p0.0) as i128
        })
    }
}

fn check_bijection<T: Carrier, U: Carrier>(pairs: &[(T, U)]) -> Result<()> {
    let src: HashSet<T> = pairs.iter().map(|p| p.0).collect();
    let dst: HashSet<U> = pairs.iter().map(|p| p.1).collect();
    if src.len() != pairs.len() {
        return Err(Error::NotBijection("repeated source element".into()));
    }
    if dst.len() != pairs.len() {
        return Err(Error::NotBijection("two elements share an image".into()));
    }
    Ok(())
}

/// Checks the F2 condition for the map `pairs[i].0 -> pairs[i].1`.
///
/// Runs in `O(k^2)`: the map is an F2-isomorphism iff "source pair sum"
/// and "target pair sum" determine each other over all unordered pairs.
pub fn is_f2_isomorphism<T: Carrier, U: Carrier>(pairs: &[(T, U)]) -> Result<bool> {
    check_bijection(pairs)?;
    let mut forward: HashMap<T, U> = HashMap::new();
    let mut backward: HashMap<U, T> = HashMap::new();
    for (i, &(a1, b1)) in pairs.iter().enumerate() {
        for &(a2, b2) in &pairs[i..] {
            let (s, t) = (a1 + a2, b1 + b2);
            if *forward.entry(s).or_insert(t) != t || *backward.entry(t).or_insert(s) != s {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The `O(k^4)` check straight from the definition.
pub fn is_f2_isomorphism_definitional<T: Carrier, U: Carrier>(pairs: &[(T, U)]) -> Result<bool> {
    check_bijection(pairs)?;
    for &(a1, b1) in pairs {
        for &(a2, b2) in pairs {
            for &(a3, b3) in pairs {
                for &(a4, b4) in pairs {
                    if (a1 + a2 == a3 + a4) != (b1 + b2 == b3 + b4) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Pairs the `i`-th smallest element of `a` with the `perm[i]`-th smallest of `b`.
pub fn pairing(a: &IntSet, b: &IntSet, perm: &[usize]) -> Result<Vec<(i64, i64)>> {
    if a.len() != b.len() {
        return Err(Error::NotBijection(format!("|A| = {} but |B| = {}", a.len(), b.len())));
    }
    if perm.len() != a.len() {
        return Err(Error::NotBijection(format!("permutation has {} entries, expected {}", perm.len(), a.len())));
    }
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::NotBijection(format!("{perm:?} is not a permutation")));
        }
    }
    let (ae, be) = (a.elements(), b.elements());
    Ok((0..a.len()).map(|i| (ae[i] as i64, be[perm[i]] as i64)).collect())
}

/// `P(x0; x1, x2; b1, b2) = {x0 + i*x1 + j*x2 : 0 <= i < b1, 0 <= j < b2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct F2Progression {
    pub x0: i64,
    pub x1: i64,
    pub x2: i64,
    pub b1: u64,
    pub b2: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F2Rank {
    One,
    Two,
    Invalid,
}

impl F2Progression {
    pub fn new(x0: i64, x1: i64, x2: i64, b1: u64, b2: u64) -> Result<Self> {
        if b2 == 0 || b1 < b2 {
            return Err(Error::InvalidParameters(format!("need b1 >= b2 > 0, got b1={b1}, b2={b2}")));
        }
        Ok(F2Progression { x0, x1, x2, b1, b2 })
    }

    pub fn image(&self, i: u64, j: u64) -> i64 {
        self.x0 + i as i64 * self.x1 + j as i64 * self.x2
    }

    /// Grid points paired with their images, in row-major order.
    pub fn grid_pairs(&self) -> Vec<(Point, i64)> {
        let mut out = Vec::with_capacity((self.b1 * self.b2) as usize);
        for j in 0..self.b2 {
            for i in 0..self.b1 {
                out.push((Point(i as i64, j as i64), self.image(i, j)));
            }
        }
        out
    }

    /// Whether the grid map is an F2-isomorphism. Since the map is affine,
    /// `phi(p) + phi(q) = 2*x0 + sigma(p + q)` with `sigma` linear, so the
    /// condition is that `sigma` is injective on the doubled grid
    /// `[0, 2b1-2] x [0, 2b2-2]` (which also gives injectivity of `phi`).
    pub fn is_proper(&self) -> bool {
        let mut seen = HashSet::with_capacity(((2 * self.b1 - 1) * (2 * self.b2 - 1)) as usize);
        for j in 0..(2 * self.b2 - 1) {
            for i in 0..(2 * self.b1 - 1) {
                let v = i as i128 * self.x1 as i128 + j as i128 * self.x2 as i128;
                if !seen.insert(v) {
                    return false;
                }
            }
        }
        true
    }

    pub fn rank(&self) -> F2Rank {
        if !self.is_proper() {
            F2Rank::Invalid
        } else if self.b2 > 1 {
            F2Rank::Two
        } else {
            F2Rank::One
        }
    }
}

pub fn f2_rank(p: &F2Progression) -> F2Rank {
    p.rank()
}

/// `a` placed on the two-lines set by position inside each window of a BP.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoLinesEmbedding {
    pub image: PlanarSet,
    /// `(element of a, its image)`, in increasing order of the element.
    pub pairing: Vec<(u64, Point)>,
    pub l1: u64,
    pub l2: u64,
}

impl TwoLinesEmbedding {
    pub fn as_pairs(&self) -> Vec<(i64, Point)> {
        self.pairing.iter().map(|&(x, p)| (x as i64, p)).collect()
    }
}

pub fn embed_bp_as_two_lines(c: &BpCover, a: &IntSet) -> Result<TwoLinesEmbedding> {
    let mut pairing = Vec::with_capacity(a.len());
    for x in a.iter() {
        let p = if let Some(i) = c.i.index_of(x) {
            Point(i as i64, 0)
        } else if let Some(j) = c.j.index_of(x) {
            Point(j as i64, 1)
        } else {
            return Err(Error::NotCovered);
        };
        pairing.push((x, p));
    }
    let image = PlanarSet::new(pairing.iter().map(|p| p.1))?;
    Ok(TwoLinesEmbedding { image, pairing, l1: c.i.length, l2: c.j.length })
}

pub fn planar_sumset(p: &PlanarSet) -> PlanarSet {
    let pts: Vec<Point> = p.points.iter().copied().collect();
    let mut sums = BTreeSet::new();
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i..] {
            sums.insert(a + b);
        }
    }
    PlanarSet { points: sums }
}

pub fn planar_sumset_stats(p: &PlanarSet) -> SumsetStats {
    SumsetStats::from_counts(p.len() as u64, planar_sumset(p).len() as u64, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progressions::{bp_cover, ApWindow};
    use crate::sumset::stats;
    use proptest::prelude::*;

    fn set(v: &[u64]) -> IntSet {
        IntSet::new(v.iter().copied()).unwrap()
    }

    fn identity(a: &IntSet) -> Vec<(i64, i64)> {
        a.iter().map(|x| (x as i64, x as i64)).collect()
    }

    #[test]
    fn identity_and_affine_maps() {
        let a = set(&[0, 1, 2, 4, 9]);
        assert!(is_f2_isomorphism(&identity(&a)).unwrap());
        let affine: Vec<(i64, i64)> = a.iter().map(|x| (x as i64, 2 * x as i64 + 5)).collect();
        assert!(is_f2_isomorphism(&affine).unwrap());
        assert!(is_f2_isomorphism_definitional(&affine).unwrap());
    }

    #[test]
    fn order_preserving_map_onto_interval_fails() {
        let pairs = pairing(&set(&[0, 1, 2, 4]), &set(&[0, 1, 2, 3]), &[0, 1, 2, 3]).unwrap();
        assert!(!is_f2_isomorphism(&pairs).unwrap());
        assert!(!is_f2_isomorphism_definitional(&pairs).unwrap());
    }

    #[test]
    fn bijection_errors() {
        assert!(matches!(is_f2_isomorphism(&[(1i64, 2i64), (1, 3)]), Err(Error::NotBijection(_))));
        assert!(matches!(is_f2_isomorphism(&[(1i64, 2i64), (3, 2)]), Err(Error::NotBijection(_))));
        assert!(matches!(pairing(&set(&[0, 1]), &set(&[0, 1]), &[0, 0]), Err(Error::NotBijection(_))));
        assert!(matches!(pairing(&set(&[0, 1]), &set(&[0, 1, 2]), &[0, 1]), Err(Error::NotBijection(_))));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(F2Progression::new(0, 1, 0, 5, 1).unwrap().rank(), F2Rank::One);
        assert_eq!(F2Progression::new(0, 3, 1, 3, 2).unwrap().rank(), F2Rank::Two);
        assert_eq!(F2Progression::new(0, 1, 2, 4, 2).unwrap().rank(), F2Rank::Invalid);
        assert!(F2Progression::new(0, 1, 1, 2, 3).is_err());
    }

    #[test]
    fn rank_agrees_with_generic_check() {
        for x1 in -4i64..=4 {
            for x2 in -6i64..=6 {
                for (b1, b2) in [(3, 1), (3, 2), (4, 2), (3, 3)] {
                    let p = F2Progression::new(1, x1, x2, b1, b2).unwrap();
                    let generic = is_f2_isomorphism(&p.grid_pairs()).unwrap_or(false);
                    assert_eq!(p.is_proper(), generic, "{p:?}");
                }
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let a = set(&[0, 1, 3, 4, 6]);
        let c = BpCover::new(ApWindow::new(0, 3, 3).unwrap(), ApWindow::new(1, 3, 2).unwrap()).unwrap();
        let e = embed_bp_as_two_lines(&c, &a).unwrap();
        assert_eq!(e.image, PlanarSet::two_lines(3, 2).unwrap());
        assert!(is_f2_isomorphism(&e.as_pairs()).unwrap());

        let ex16: IntSet = "0-12,45,57".parse().unwrap();
        let c = bp_cover(&ex16).unwrap();
        let e = embed_bp_as_two_lines(&c, &ex16).unwrap();
        assert_eq!((e.l1, e.l2), (13, 13));
        assert!(is_f2_isomorphism(&e.as_pairs()).unwrap());
        assert_eq!(planar_sumset_stats(&e.image).doubling, stats(&ex16).doubling);

        let pair = set(&[0, 1]);
        let c = BpCover::new(ApWindow::new(0, 1, 1).unwrap(), ApWindow::new(1, 1, 1).unwrap()).unwrap();
        let e = embed_bp_as_two_lines(&c, &pair).unwrap();
        assert_eq!(e.image, PlanarSet::parse("(0,0);(0,1)").unwrap());

        assert_eq!(embed_bp_as_two_lines(&c, &set(&[0, 5])), Err(Error::NotCovered));
    }

    #[test]
    fn planar_stats_examples() {
        let m = PlanarSet::two_lines(3, 2).unwrap();
        let st = planar_sumset_stats(&m);
        assert_eq!((st.k, st.doubling, st.deficiency_b), (5, 12, 0));
        let row = PlanarSet::two_lines(7, 0).unwrap();
        assert_eq!(planar_sumset_stats(&row).doubling, 13);
        assert_eq!(planar_sumset_stats(&PlanarSet::parse("(0,0);(1,1)").unwrap()).doubling, 3);
    }

    #[test]
    fn planar_literals() {
        let p = PlanarSet::parse("(0,0); (2,-1);(1,1)").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(PlanarSet::parse(&p.render()).unwrap(), p);
        assert!(PlanarSet::parse("(0,0);1,2").is_err());
        assert!(!p.is_collinear());
        assert!(PlanarSet::two_lines(5, 0).unwrap().is_collinear());
    }

    proptest! {
        #[test]
        fn separated_grids_are_proper(x1 in 1i64..20, b1 in 1u64..8, b2 in 1u64..8, extra in 1i64..30, x0 in -50i64..50) {
            let (b1, b2) = (b1.max(b2), b1.min(b2));
            let x2 = 2 * b1 as i64 * x1 + extra;
            let p = F2Progression::new(x0, x1, x2, b1, b2).unwrap();
            prop_assert_ne!(p.rank(), F2Rank::Invalid);
        }

        #[test]
        fn isomorphisms_preserve_doubling(v in proptest::collection::btree_set(0u64..60, 1..12), p in 1i64..6, q in 0i64..40) {
            let a = IntSet::new(v).unwrap();
            let img = a.affine_image(p, q).unwrap();
            let pairs: Vec<(i64, i64)> = a.iter().zip(img.iter()).map(|(x, y)| (x as i64, y as i64)).collect();
            prop_assert!(is_f2_isomorphism(&pairs).unwrap());
            prop_assert_eq!(stats(&a).doubling, stats(&img).doubling);
        }
    }
}
