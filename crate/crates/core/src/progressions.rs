//! Minimal arithmetic-progression (AP) and bi-arithmetic-progression (BP)
//! covers.
//!
//! A BP is a pair of APs `I`, `J` with a common difference `d` such that
//! `I+I`, `I+J` and `J+J` are pairwise disjoint. Its length is `|I| + |J|`.
//!
//! # Search space for [`bp_cover`]
//!
//! Let `A` have `k >= 3` elements and span `s`.
//!
//! * Only `d <= s` needs to be tried: an AP with difference `d > s` meets
//!   `[min A, max A]` in at most one point, so two of them cover at most two
//!   elements.
//! * Each of `I`, `J` lies in a single residue class mod `d`. If `A` meets
//!   three or more classes, no BP of difference `d` contains it. If it meets
//!   exactly two, the partition `A ∩ I`, `A ∩ J` is forced.
//! * If `A` lies in one class, `I` and `J` lie in the same class too, and the
//!   three sumsets are then disjoint only if `I` lies entirely below `J` (or
//!   vice versa): were the windows to interleave, `2I` and `I+J` would
//!   overlap. So `A ∩ I` is a prefix of `A` and only the `k - 1` order splits
//!   need checking.
//! * For a fixed partition the tightest windows are best: shrinking a window
//!   shrinks every sumset, which preserves disjointness, and shortens the cover.
//!
//! Ties between minimal covers are broken by smaller `d`, then smaller
//! `I.start`, then smaller `|I|`; `I` is always the part holding `min A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::IntSet;

/// `{start + i*diff : 0 <= i < length}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ApWindow {
    pub start: u64,
    pub diff: u64,
    pub length: u64,
}

impl ApWindow {
    pub fn new(start: u64, diff: u64, length: u64) -> Result<Self> {
        if diff == 0 || length == 0 {
            return Err(Error::InvalidParameters("progression needs diff >= 1 and length >= 1".into()));
        }
        let w = ApWindow { start, diff, length };
        (length - 1)
            .checked_mul(diff)
            .and_then(|x| x.checked_add(start))
            .ok_or(Error::Overflow("computing the last term of a progression"))?;
        Ok(w)
    }

    /// Tight window of difference `diff` from `lo` to `hi`; `diff` must divide `hi - lo`.
    fn spanning(lo: u64, hi: u64, diff: u64) -> Self {
        debug_assert_eq!((hi - lo) % diff, 0);
        ApWindow { start: lo, diff, length: (hi - lo) / diff + 1 }
    }

    pub fn last(&self) -> u64 {
        self.start + (self.length - 1) * self.diff
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= self.start && x <= self.last() && (x - self.start) % self.diff == 0
    }

    /// Position of `x` in the progression, if present.
    pub fn index_of(&self, x: u64) -> Option<u64> {
        self.contains(x).then(|| (x - self.start) / self.diff)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.length).map(move |i| self.start + i * self.diff)
    }

    pub fn to_set(&self) -> IntSet {
        IntSet::from_sorted_unchecked(self.iter().collect())
    }
}

/// A bi-arithmetic progression `I ∪ J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BpCover {
    pub i: ApWindow,
    pub j: ApWindow,
    pub total_length: u64,
}

impl BpCover {
    pub fn new(i: ApWindow, j: ApWindow) -> Result<Self> {
        if !is_valid_bp(&i, &j)? {
            return Err(Error::InvalidParameters("sumsets of the two progressions overlap".into()));
        }
        Ok(BpCover { i, j, total_length: i.length + j.length })
    }

    pub fn diff(&self) -> u64 {
        self.i.diff
    }

    pub fn contains(&self, x: u64) -> bool {
        self.i.contains(x) || self.j.contains(x)
    }

    pub fn covers(&self, a: &IntSet) -> bool {
        a.iter().all(|x| self.contains(x))
    }

    /// True when either window is a single point.
    pub fn has_singleton_part(&self) -> bool {
        self.i.length == 1 || self.j.length == 1
    }

    pub fn to_set(&self) -> IntSet {
        IntSet::new(self.i.iter().chain(self.j.iter())).expect("windows are nonempty")
    }
}

/// The shortest AP containing `a`: difference `gcd(a - min a)`, from `min a` to
/// `max a`. Every AP containing `a` has a difference dividing that gcd, so
/// none is shorter. Singletons get difference 1.
pub fn ap_cover(a: &IntSet) -> ApWindow {
    let g = a.difference_gcd();
    let diff = if g == 0 { 1 } else { g };
    ApWindow::spanning(a.first(), a.last(), diff)
}

/// Closed AP `[lo, lo + (n-1) d]` in i128, used for sumset disjointness.
#[derive(Clone, Copy)]
struct Run {
    lo: i128,
    n: i128,
}

impl Run {
    fn hi(&self, d: i128) -> i128 {
        self.lo + (self.n - 1) * d
    }

    fn meets(&self, other: &Run, d: i128) -> bool {
        (self.lo - other.lo).rem_euclid(d) == 0 && self.lo <= other.hi(d) && other.lo <= self.hi(d)
    }
}

/// Whether `I+I`, `I+J`, `J+J` are pairwise disjoint. Each sumset is itself an
/// AP of difference `d`; two such APs meet iff their starts agree mod `d` and
/// their ranges overlap.
pub fn is_valid_bp(i: &ApWindow, j: &ApWindow) -> Result<bool> {
    if i.diff != j.diff {
        return Err(Error::DifferenceMismatch(i.diff, j.diff));
    }
    let d = i.diff as i128;
    let (si, sj) = (i.start as i128, j.start as i128);
    let (li, lj) = (i.length as i128, j.length as i128);
    let ii = Run { lo: 2 * si, n: 2 * li - 1 };
    let ij = Run { lo: si + sj, n: li + lj - 1 };
    let jj = Run { lo: 2 * sj, n: 2 * lj - 1 };
    Ok(!(ii.meets(&ij, d) || ii.meets(&jj, d) || ij.meets(&jj, d)))
}

type TieKey = (u64, u64, u64, u64);

fn tie_key(c: &BpCover) -> TieKey {
    (c.total_length, c.i.diff, c.i.start, c.i.length)
}

/// Shortest valid BP containing `a` whose parts both meet `a`, or `None`.
pub fn bp_cover(a: &IntSet) -> Option<BpCover> {
    search_bp(a, None)
}

/// First valid BP (in the search order of [`bp_cover`]) with total length at
/// most `budget`; `None` if the minimum exceeds the budget.
pub fn bp_cover_within(a: &IntSet, budget: u64) -> Option<BpCover> {
    search_bp(a, Some(budget))
}

fn search_bp(a: &IntSet, budget: Option<u64>) -> Option<BpCover> {
    let k = a.len();
    if k < 2 {
        return None;
    }
    if let Some(b) = budget {
        if b < k as u64 {
            return None;
        }
    }
    let elems = a.elements();
    let base = a.first();
    let span = a.span();
    let g = a.difference_gcd();
    let mut best: Option<BpCover> = None;
    let consider = |cand: BpCover, best: &mut Option<BpCover>| -> bool {
        if let Some(b) = budget {
            if cand.total_length <= b {
                *best = Some(cand);
                return true;
            }
            return false;
        }
        if best.as_ref().is_none_or(|cur| tie_key(&cand) < tie_key(cur)) {
            *best = Some(cand);
        }
        false
    };

    for d in 1..=span {
        if let Some(cur) = &best {
            // Totals never drop below k, and later d lose the tie-break.
            if cur.total_length == k as u64 {
                break;
            }
        }
        if g % d == 0 {
            // One residue class: order splits.
            for s in 1..k {
                let i = ApWindow::spanning(elems[0], elems[s - 1], d);
                let j = ApWindow::spanning(elems[s], elems[k - 1], d);
                if is_valid_bp(&i, &j).unwrap_or(false) {
                    let c = BpCover { i, j, total_length: i.length + j.length };
                    if consider(c, &mut best) {
                        return best;
                    }
                }
            }
            continue;
        }
        // Two residue classes at most; class 0 holds min a.
        let mut other: Option<u64> = None;
        let lo0 = base;
        let mut hi0 = base;
        let (mut lo1, mut hi1) = (0, 0);
        let mut ok = true;
        for &x in elems {
            let r = (x - base) % d;
            if r == 0 {
                hi0 = x;
            } else {
                match other {
                    None => {
                        other = Some(r);
                        lo1 = x;
                        hi1 = x;
                    }
                    Some(o) if o == r => hi1 = x,
                    Some(_) => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if !ok || other.is_none() {
            continue;
        }
        let i = ApWindow::spanning(lo0, hi0, d);
        let j = ApWindow::spanning(lo1, hi1, d);
        let total = i.length + j.length;
        if let Some(cur) = &best {
            if total >= cur.total_length {
                continue;
            }
        }
        if is_valid_bp(&i, &j).unwrap_or(false) {
            let c = BpCover { i, j, total_length: total };
            if consider(c, &mut best) {
                return best;
            }
        }
    }
    if budget.is_some() {
        None
    } else {
        best
    }
}
