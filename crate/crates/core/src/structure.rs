//! Finite structural features: residue-class decompositions with fullness
//! ratios, and forward/backward triangle profiles.
//!
//! Asymptotic notions ("almost all of", "noticeably more than half") are
//! replaced by a single margin `theta`; results depending on it are
//! heuristics, not exact statements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::IntSet;

/// Default margin used by the CLI and reports.
pub const DEFAULT_THETA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueClass {
    pub residue: u64,
    pub elements: IntSet,
    pub min: u64,
    pub max: u64,
    /// Positions of the class between `min` and `max`: `(max - min)/d + 1`.
    pub slots: u64,
    /// `|A_r| * d / (max - min + d)`, in `(0, 1]`.
    pub fullness: f64,
}

impl ResidueClass {
    /// Full up to margin `theta`: fullness at least `1 - theta`.
    pub fn is_full(&self, theta: f64) -> bool {
        self.fullness >= 1.0 - theta
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueDecomposition {
    pub modulus: u64,
    pub classes: Vec<ResidueClass>,
}

impl ResidueDecomposition {
    pub fn reassemble(&self) -> IntSet {
        IntSet::new(self.classes.iter().flat_map(|c| c.elements.iter())).expect("classes are nonempty")
    }
}

/// Splits `a` by `x mod d`; classes are listed by increasing residue.
pub fn residue_decomposition(a: &IntSet, d: u64) -> Result<ResidueDecomposition> {
    if d == 0 {
        return Err(Error::InvalidParameters("modulus must be positive".into()));
    }
    let mut buckets: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
    for x in a.iter() {
        buckets.entry(x % d).or_default().push(x);
    }
    let classes = buckets
        .into_iter()
        .map(|(residue, v)| {
            let elements = IntSet::from_sorted_unchecked(v);
            let (min, max) = (elements.first(), elements.last());
            let slots = (max - min) / d + 1;
            ResidueClass {
                residue,
                fullness: elements.len() as f64 / slots as f64,
                elements,
                min,
                max,
                slots,
            }
        })
        .collect();
    Ok(ResidueDecomposition { modulus: d, classes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleKind {
    Forward,
    Backward,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleVerdict {
    pub kind: TriangleKind,
    pub window: [u64; 2],
    pub margin: f64,
    /// The forward inequalities hold for `A ∩ window`.
    pub forward_holds: bool,
    /// The forward inequalities hold for the reflection of `A ∩ window`.
    pub backward_holds: bool,
}

const EPS: f64 = 1e-9;

/// Forward test on positions relative to the window start, `w = hi - lo`:
/// at most `(1/2 + theta) w` points in total, and for every `x` with
/// `theta w <= x <= (1 - theta) w`, at least `(1/2 + theta^2) x` points in `[0, x)`.
fn forward_holds(rel: &[u64], w: u64, theta: f64) -> bool {
    let wf = w as f64;
    if rel.len() as f64 > (0.5 + theta) * wf + EPS {
        return false;
    }
    let from = (theta * wf - EPS).ceil().max(0.0) as u64;
    let to = ((1.0 - theta) * wf + EPS).floor() as u64;
    let slope = 0.5 + theta * theta;
    let mut idx = 0;
    for x in from..=to {
        while idx < rel.len() && rel[idx] < x {
            idx += 1;
        }
        if (idx as f64) < slope * x as f64 - EPS {
            return false;
        }
    }
    true
}

/// Classifies `A ∩ [lo, hi]` as a forward triangle (front-loaded, about half
/// dense), a backward triangle (its reflection `lo + hi - x` is forward) or
/// neither. A window satisfying both tests is reported as `Neither`, so that
/// reflecting the input always swaps `Forward` and `Backward`.
pub fn triangle_profile(a: &IntSet, lo: u64, hi: u64, theta: f64) -> Result<TriangleVerdict> {
    if hi <= lo {
        return Err(Error::DegenerateWindow { lo, hi });
    }
    if !(theta > 0.0 && theta < 0.25) {
        return Err(Error::InvalidParameters(format!("margin {theta} outside (0, 1/4)")));
    }
    let w = hi - lo;
    let rel: Vec<u64> = a.iter().filter(|&x| x >= lo && x <= hi).map(|x| x - lo).collect();
    let mirrored: Vec<u64> = rel.iter().rev().map(|&x| w - x).collect();
    let fwd = forward_holds(&rel, w, theta);
    let bwd = forward_holds(&mirrored, w, theta);
    let kind = match (fwd, bwd) {
        (true, false) => TriangleKind::Forward,
        (false, true) => TriangleKind::Backward,
        _ => TriangleKind::Neither,
    };
    Ok(TriangleVerdict { kind, window: [lo, hi], margin: theta, forward_holds: fwd, backward_holds: bwd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sumset::double;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[u64]) -> IntSet {
        IntSet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn residue_examples() {
        let r = residue_decomposition(&set(&[0, 2, 4, 6]), 2).unwrap();
        assert_eq!(r.classes.len(), 1);
        assert_eq!((r.classes[0].residue, r.classes[0].fullness), (0, 1.0));

        let r = residue_decomposition(&set(&[0, 3, 6, 1, 4]), 3).unwrap();
        let summary: Vec<(u64, f64)> = r.classes.iter().map(|c| (c.residue, c.fullness)).collect();
        assert_eq!(summary, vec![(0, 1.0), (1, 1.0)]);

        let r = residue_decomposition(&set(&[0, 4, 6]), 2).unwrap();
        assert_eq!(r.classes[0].fullness, 0.75);
        assert_eq!(r.classes[0].slots, 4);
        assert!(r.classes[0].is_full(0.25));
        assert!(!r.classes[0].is_full(0.2));

        assert!(residue_decomposition(&set(&[1]), 0).is_err());
    }

    #[test]
    fn triangle_examples() {
        let front = IntSet::interval(0, 10).unwrap();
        assert_eq!(triangle_profile(&front, 0, 20, 0.05).unwrap().kind, TriangleKind::Forward);
        let back = IntSet::interval(10, 20).unwrap();
        assert_eq!(triangle_profile(&back, 0, 20, 0.05).unwrap().kind, TriangleKind::Backward);
        let evens = IntSet::new((0..=10).map(|i| 2 * i)).unwrap();
        assert_eq!(triangle_profile(&evens, 0, 20, 0.05).unwrap().kind, TriangleKind::Neither);
    }

    #[test]
    fn triangle_errors() {
        let a = set(&[0, 1]);
        assert_eq!(triangle_profile(&a, 3, 3, 0.05), Err(Error::DegenerateWindow { lo: 3, hi: 3 }));
        assert!(triangle_profile(&a, 0, 3, 0.3).is_err());
        assert!(triangle_profile(&a, 0, 3, 0.0).is_err());
    }

    /// Density falling linearly from 1 to 0 across `[lo, lo + w]`.
    fn linear_triangle(rng: &mut ChaCha8Rng, lo: u64, w: u64) -> IntSet {
        let pts = (0..=w).filter(|&x| rng.gen_bool(1.0 - x as f64 / w as f64)).map(|x| x + lo);
        IntSet::new(std::iter::once(lo).chain(pts)).unwrap()
    }

    proptest! {
        #[test]
        fn reflection_swaps_kinds(v in proptest::collection::btree_set(0u64..60, 1..40), lo in 0u64..20, len in 1u64..50, theta in 0.01f64..0.24) {
            let a = IntSet::new(v).unwrap();
            let hi = lo + len;
            let mirrored = IntSet::new(a.iter().filter(|&x| x >= lo && x <= hi).map(|x| lo + hi - x));
            let p = triangle_profile(&a, lo, hi, theta).unwrap();
            if let Ok(m) = mirrored {
                let q = triangle_profile(&m, lo, hi, theta).unwrap();
                prop_assert_eq!(p.kind == TriangleKind::Forward, q.kind == TriangleKind::Backward);
                prop_assert_eq!(p.kind == TriangleKind::Backward, q.kind == TriangleKind::Forward);
            } else {
                prop_assert_eq!(p.kind, TriangleKind::Neither);
            }
        }

        #[test]
        fn classes_partition_the_set(v in proptest::collection::btree_set(0u64..500, 1..60), d in 1u64..12) {
            let a = IntSet::new(v).unwrap();
            let r = residue_decomposition(&a, d).unwrap();
            prop_assert_eq!(r.reassemble(), a.clone());
            prop_assert_eq!(r.classes.iter().map(|c| c.elements.len()).sum::<usize>(), a.len());
            for c in &r.classes {
                prop_assert!(c.fullness > 0.0 && c.fullness <= 1.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Sumset of a forward triangle fills most of `[2lo + θw, lo + hi - θw]`.
        #[test]
        fn forward_triangles_fill_their_sumset(seed in any::<u64>(), lo in 0u64..100, w in 200u64..600, theta in 0.01f64..=0.05) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = linear_triangle(&mut rng, lo, w);
            let hi = lo + w;
            let verdict = triangle_profile(&t, lo, hi, theta).unwrap();
            prop_assume!(verdict.kind == TriangleKind::Forward);
            let two = double(&t);
            let from = (2 * lo) as f64 + theta * w as f64;
            let to = (lo + hi) as f64 - theta * w as f64;
            let (from, to) = (from.ceil() as u64, to.floor() as u64);
            let mut longest = 0u64;
            let mut run = 0u64;
            for x in from..=to {
                if two.contains(x) { run += 1; longest = longest.max(run); } else { run = 0; }
            }
            prop_assert!(longest as f64 >= (1.0 - 4.0 * theta) * (to - from + 1) as f64);
        }
    }
}
