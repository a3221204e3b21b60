//! Finite sets of non-negative integers: parsing, rendering and affine
//! normalization.
//!
//! Every quantity this crate computes (doubling, cover lengths, verdicts) is
//! invariant under `x -> p*x + q` with `p != 0`, so analyses are usually run on
//! the [`NormalForm`] representative: minimum 0, gcd 1, and the
//! lexicographically smaller of the set and its reflection.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, ParseErrorKind, Result};

/// Upper bound on how many elements a single literal may expand to.
pub const MAX_LITERAL_ELEMENTS: u64 = 1 << 26;

/// A nonempty finite set of non-negative integers, stored sorted.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct IntSet {
    elems: Vec<u64>,
}

impl IntSet {
    /// Builds a set from arbitrary elements; duplicates are merged.
    pub fn new<I: IntoIterator<Item = u64>>(elems: I) -> Result<Self> {
        let mut v: Vec<u64> = elems.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(IntSet { elems: v })
    }

    /// Caller guarantees `elems` is nonempty and strictly increasing.
    pub(crate) fn from_sorted_unchecked(elems: Vec<u64>) -> Self {
        debug_assert!(!elems.is_empty());
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        IntSet { elems }
    }

    /// `{lo, lo+1, ..., hi}`.
    pub fn interval(lo: u64, hi: u64) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidParameters(format!("interval [{lo}, {hi}] is empty")));
        }
        Ok(IntSet { elems: (lo..=hi).collect() })
    }

    pub(crate) fn from_mask(mask: u128) -> Self {
        let mut elems = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            elems.push(m.trailing_zeros() as u64);
            m &= m - 1;
        }
        IntSet::from_sorted_unchecked(elems)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    /// Always false; kept for API symmetry with collections.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    #[inline]
    pub fn elements(&self) -> &[u64] {
        &self.elems
    }

    #[inline]
    pub fn first(&self) -> u64 {
        self.elems[0]
    }

    #[inline]
    pub fn last(&self) -> u64 {
        self.elems[self.elems.len() - 1]
    }

    #[inline]
    pub fn span(&self) -> u64 {
        self.last() - self.first()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elems.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u64> + ExactSizeIterator + '_ {
        self.elems.iter().copied()
    }

    /// Number of elements in the closed interval `[lo, hi]`.
    pub fn count_in(&self, lo: u64, hi: u64) -> usize {
        if hi < lo {
            return 0;
        }
        let a = self.elems.partition_point(|&x| x < lo);
        let b = self.elems.partition_point(|&x| x <= hi);
        b - a
    }

    /// gcd of `A - min A`; zero for singletons.
    pub fn difference_gcd(&self) -> u64 {
        let m = self.first();
        self.elems.iter().fold(0u64, |g, &x| g.gcd(&(x - m)))
    }

    /// `A - min A`.
    pub fn translated_to_zero(&self) -> IntSet {
        let m = self.first();
        IntSet::from_sorted_unchecked(self.elems.iter().map(|&x| x - m).collect())
    }

    /// `min A + max A - A`.
    pub fn reflect(&self) -> IntSet {
        let t = self.first() + self.last();
        IntSet::from_sorted_unchecked(self.elems.iter().rev().map(|&x| t - x).collect())
    }

    /// Image under `x -> p*x + q`. Fails if any image is negative or overflows.
    pub fn affine_image(&self, p: i64, q: i64) -> Result<IntSet> {
        if p == 0 {
            return Err(Error::InvalidParameters("affine map needs p != 0".into()));
        }
        let mut out = Vec::with_capacity(self.len());
        for &x in &self.elems {
            let y = (p as i128) * (x as i128) + q as i128;
            if y < 0 {
                return Err(Error::InvalidParameters(format!("image {y} is negative")));
            }
            out.push(u64::try_from(y).map_err(|_| Error::Overflow("applying an affine map"))?);
        }
        IntSet::new(out)
    }

    /// Indicator bit vector of `A - min A` over `[0, span]`.
    pub fn to_bitset(&self) -> Bitset {
        let m = self.first();
        Bitset::from_positions(self.span() as usize + 1, self.elems.iter().map(|&x| (x - m) as usize))
    }

    /// Canonical rendering with maximal runs as ranges, e.g. `0-13,26,52`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut i = 0;
        while i < self.elems.len() {
            let start = self.elems[i];
            let mut j = i;
            while j + 1 < self.elems.len() && self.elems[j + 1] == self.elems[j] + 1 {
                j += 1;
            }
            if !out.is_empty() {
                out.push(',');
            }
            let end = self.elems[j];
            if end == start {
                out.push_str(&start.to_string());
            } else {
                out.push_str(&format!("{start}-{end}"));
            }
            i = j + 1;
        }
        out
    }
}

impl TryFrom<Vec<u64>> for IntSet {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        IntSet::new(v)
    }
}

impl From<IntSet> for Vec<u64> {
    fn from(s: IntSet) -> Self {
        s.elems
    }
}

impl fmt::Debug for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.render())
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for IntSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_set(s)
    }
}

/// Parses `term(,term)*` where `term = int | int-int` (inclusive range).
/// Spaces around terms are tolerated.
pub fn parse_set(text: &str) -> Result<IntSet> {
    let err = |offset, kind| Error::Parse { offset, kind };
    let mut elems: Vec<u64> = Vec::new();
    let mut offset = 0;
    for term in text.split(',') {
        let lead = term.len() - term.trim_start().len();
        let body = term.trim();
        let at = offset + lead;
        if body.is_empty() {
            let kind = if text.trim().is_empty() {
                ParseErrorKind::EmptyResult
            } else {
                ParseErrorKind::MalformedToken
            };
            return Err(err(at, kind));
        }
        let number = |s: &str, pos: usize| -> Result<u64> {
            if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err(pos, ParseErrorKind::MalformedToken));
            }
            s.parse::<u64>().map_err(|_| err(pos, ParseErrorKind::MalformedToken))
        };
        match body.find('-') {
            None => elems.push(number(body, at)?),
            Some(dash) => {
                let lo = number(&body[..dash], at)?;
                let hi = number(&body[dash + 1..], at + dash + 1)?;
                if hi < lo {
                    return Err(err(at, ParseErrorKind::DescendingRange));
                }
                if hi - lo >= MAX_LITERAL_ELEMENTS || elems.len() as u64 + (hi - lo) >= MAX_LITERAL_ELEMENTS {
                    return Err(err(at, ParseErrorKind::RangeTooLarge));
                }
                elems.extend(lo..=hi);
            }
        }
        offset += term.len() + 1;
    }
    IntSet::new(elems).map_err(|_| err(0, ParseErrorKind::EmptyResult))
}

/// Affine canonical representative together with the transform that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub set: IntSet,
    /// Subtracted translation (the original minimum).
    pub shift: u64,
    /// Divided gcd of `A - min A`; 1 for singletons.
    pub scale: u64,
    pub reflected: bool,
}

impl NormalForm {
    /// Maps the canonical set back onto the original input.
    pub fn denormalize(&self) -> IntSet {
        let base = if self.reflected { self.set.reflect() } else { self.set.clone() };
        IntSet::from_sorted_unchecked(base.iter().map(|x| x * self.scale + self.shift).collect())
    }
}

pub fn normalize(a: &IntSet) -> NormalForm {
    let shift = a.first();
    let g = a.difference_gcd();
    let scale = if g == 0 { 1 } else { g };
    let scaled = IntSet::from_sorted_unchecked(a.iter().map(|x| (x - shift) / scale).collect());
    let mirror = scaled.reflect();
    // Palindromes keep reflected = false.
    let (set, reflected) = if mirror.elems < scaled.elems { (mirror, true) } else { (scaled, false) };
    NormalForm { set, shift, scale, reflected }
}

pub fn affine_equivalent(a: &IntSet, b: &IntSet) -> bool {
    a.len() == b.len() && normalize(a).set == normalize(b).set
}
