//! Search for sets of a given size whose minimal covers exceed both
//! structural budgets (`2k - 1 + 2b` for an AP, `k + b` for a BP) at the
//! smallest possible deficiency `b`.
//!
//! Exhaustive mode is a depth-first branch and bound over sets
//! `0 = x0 < x1 < ... < x(k-1) <= max_span`, run with an increasing cap on
//! `b`. Appending a new maximum adds at least two new sums, so a prefix `P`
//! with `r` elements still to come is cut once `|2P| + 2r > 3k - 3 + cap`.
//! When the node budget is exceeded the search falls back to randomized
//! restarts with local moves; that mode makes no completeness claim.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::{normalize, IntSet};
use crate::progressions::{ap_cover, bp_cover, bp_cover_within};
use crate::sumset::stats;
use crate::verify::{check_main, enumerate_canonical, worker_pool};

/// Exact ratio `num/den` in lowest terms, ordered by value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        let g = num.gcd(&den).max(1);
        Ratio { num: num / g, den: den / g }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub set: IntSet,
    pub k: u64,
    pub b: i64,
    pub ap_len: u64,
    pub bp_len: Option<u64>,
    /// `|2A| / |A|`.
    pub ratio: Ratio,
    /// No returned record with the same `k` has a smaller `b`.
    pub frontier: bool,
    /// The size and deficiency hypotheses of the main claim hold.
    pub applicable: bool,
}

/// Recomputes every field of a record from the set alone.
pub fn certify(set: &IntSet) -> SearchRecord {
    let s = stats(set);
    SearchRecord {
        set: set.clone(),
        k: s.k,
        b: s.deficiency_b,
        ap_len: ap_cover(set).length,
        bp_len: bp_cover(set).map(|c| c.total_length),
        ratio: Ratio::new(s.doubling, s.k),
        frontier: false,
        applicable: check_main(set).applicable,
    }
}

/// `b >= 0` and neither an AP of length `2k - 1 + 2b` nor a BP of length
/// `k + b` contains the set. The AP test runs first.
pub fn fails_structure(a: &IntSet) -> bool {
    let s = stats(a);
    let (k, b) = (s.k, s.deficiency_b);
    b >= 0 && ap_cover(a).length >= 2 * k + 2 * b as u64 && bp_cover_within(a, k + b as u64).is_none()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Randomized,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub k: u64,
    pub max_span: u64,
    /// Node budget for the exhaustive phase.
    pub budget: u64,
    pub seed: u64,
    pub restarts: u64,
    /// Local moves per restart in randomized mode.
    pub steps: u64,
    pub workers: usize,
    pub max_records: usize,
}

impl SearchConfig {
    pub fn new(k: u64, max_span: u64) -> Self {
        SearchConfig {
            k,
            max_span,
            budget: 200_000_000,
            seed: 0,
            restarts: 16,
            steps: 4_000,
            workers: 1,
            max_records: 1_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub k: u64,
    pub max_span: u64,
    pub mode: SearchMode,
    /// Nodes visited by the exhaustive phase.
    pub nodes: u64,
    /// Sets scored by the randomized phase.
    pub evaluations: u64,
    /// The exhaustive phase ran out of budget; records are partial.
    pub budget_exhausted: bool,
    /// More records were found than `max_records`.
    pub truncated: bool,
    pub min_b: Option<i64>,
    pub records: Vec<SearchRecord>,
}

/// Largest span the exhaustive phase supports (sums must fit in 128 bits).
pub const MAX_EXHAUSTIVE_SPAN: u64 = 63;

pub fn frontier_search(cfg: &SearchConfig) -> Result<SearchOutcome> {
    if cfg.k < 3 {
        return Err(Error::InvalidParameters(format!("k = {} below 3", cfg.k)));
    }
    if cfg.max_span + 1 < cfg.k {
        return Err(Error::InvalidParameters(format!("{} elements do not fit in [0, {}]", cfg.k, cfg.max_span)));
    }
    let pool = worker_pool(cfg.workers)?;
    if cfg.max_span <= MAX_EXHAUSTIVE_SPAN {
        let ex = pool.install(|| exhaustive(cfg));
        if !ex.exhausted {
            return Ok(finish(cfg, SearchMode::Exhaustive, ex.nodes, 0, false, ex.found));
        }
        let (evaluations, found) = pool.install(|| randomized(cfg));
        return Ok(finish(cfg, SearchMode::Randomized, ex.nodes, evaluations, true, found));
    }
    let (evaluations, found) = pool.install(|| randomized(cfg));
    Ok(finish(cfg, SearchMode::Randomized, 0, evaluations, false, found))
}

fn finish(cfg: &SearchConfig, mode: SearchMode, nodes: u64, evaluations: u64, exhausted: bool, found: Vec<IntSet>) -> SearchOutcome {
    let mut records: Vec<SearchRecord> = found.iter().map(certify).collect();
    records.sort_by(|x, y| (x.b, &x.set).cmp(&(y.b, &y.set)));
    records.dedup_by(|x, y| x.set == y.set);
    let truncated = records.len() > cfg.max_records;
    records.truncate(cfg.max_records);
    let min_b = records.first().map(|r| r.b);
    for r in &mut records {
        r.frontier = Some(r.b) == min_b;
    }
    SearchOutcome {
        k: cfg.k,
        max_span: cfg.max_span,
        mode,
        nodes,
        evaluations,
        budget_exhausted: exhausted,
        truncated,
        min_b,
        records,
    }
}

struct Exhaustive {
    nodes: u64,
    exhausted: bool,
    found: Vec<IntSet>,
}

fn exhaustive(cfg: &SearchConfig) -> Exhaustive {
    let k = cfg.k;
    let max_b = k * (k + 1) / 2 + 3 - 3 * k;
    let mut nodes = 0u64;
    for cap in 0..=max_b {
        let remaining = cfg.budget.saturating_sub(nodes);
        // Subtrees are rooted at the second element; each gets the whole
        // remaining budget so the outcome is independent of scheduling.
        let parts: Vec<(u64, Vec<u64>)> = (1..=cfg.max_span + 2 - k)
            .into_par_iter()
            .map(|x1| {
                let mut dfs = Dfs { k, max_span: cfg.max_span, limit: 3 * k - 3 + cap, nodes: 0, budget: remaining, found: Vec::new() };
                let mask = 1u64 | (1 << x1);
                let sums = 1u128 | (1 << x1) | (1 << (2 * x1));
                dfs.descend(mask, sums, x1, 2);
                (dfs.nodes, dfs.found)
            })
            .collect();
        let pass: u64 = parts.iter().map(|p| p.0).sum();
        nodes = nodes.saturating_add(pass);
        if pass > remaining {
            return Exhaustive { nodes, exhausted: true, found: Vec::new() };
        }
        let found: Vec<IntSet> = parts.into_iter().flat_map(|p| p.1).map(|m| IntSet::from_mask(m as u128)).collect();
        if !found.is_empty() {
            return Exhaustive { nodes, exhausted: false, found };
        }
    }
    Exhaustive { nodes, exhausted: false, found: Vec::new() }
}

struct Dfs {
    k: u64,
    max_span: u64,
    limit: u64,
    nodes: u64,
    budget: u64,
    found: Vec<u64>,
}

impl Dfs {
    fn descend(&mut self, mask: u64, sums: u128, top: u64, size: u64) {
        self.nodes += 1;
        if self.nodes > self.budget {
            return;
        }
        let left = self.k - size;
        if sums.count_ones() as u64 + 2 * left > self.limit {
            return;
        }
        if left == 0 {
            self.leaf(mask, sums, top);
            return;
        }
        for x in top + 1..=self.max_span + 1 - left {
            let next = sums | ((mask as u128) << x) | (1u128 << (2 * x));
            self.descend(mask | (1 << x), next, x, size + 1);
            if self.nodes > self.budget {
                return;
            }
        }
    }

    fn leaf(&mut self, mask: u64, sums: u128, top: u64) {
        let mut g = 0u64;
        let mut m = mask & !1;
        while m != 0 && g != 1 {
            g = g.gcd(&(m.trailing_zeros() as u64));
            m &= m - 1;
        }
        if g != 1 {
            return;
        }
        let mirror = mask.reverse_bits() >> (63 - top);
        let diff = mask ^ mirror;
        if diff != 0 && mask & (diff & diff.wrapping_neg()) == 0 {
            return;
        }
        let b = sums.count_ones() as i64 - (3 * self.k as i64 - 3);
        if b < 0 || top + 1 < 2 * self.k + 2 * b as u64 {
            return;
        }
        if bp_cover_within(&IntSet::from_mask(mask as u128), self.k + b as u64).is_none() {
            self.found.push(mask);
        }
    }
}

/// Lower is better; sets that satisfy a budget score above every failing set.
fn score(a: &IntSet, k: u64) -> i64 {
    let b = stats(a).deficiency_b;
    if fails_structure(a) {
        b
    } else {
        b.max(0) + 2 * k as i64 + 1
    }
}

fn random_start(rng: &mut ChaCha8Rng, k: u64, span: u64) -> IntSet {
    let mut picked = std::collections::BTreeSet::from([0, span]);
    while (picked.len() as u64) < k {
        picked.insert(rng.gen_range(1..span));
    }
    IntSet::new(picked).expect("nonempty")
}

/// One local move preserving `|A|`; the result is translated to start at 0.
fn neighbour(rng: &mut ChaCha8Rng, a: &IntSet, max_span: u64) -> Option<IntSet> {
    let mut v: Vec<u64> = a.elements().to_vec();
    let k = v.len();
    match rng.gen_range(0..3) {
        0 => {
            let x = rng.gen_range(0..=max_span);
            if a.contains(x) {
                return None;
            }
            v.remove(rng.gen_range(0..k));
            v.push(x);
        }
        1 => {
            let i = rng.gen_range(1..k);
            let reach = (max_span / 4).max(1) as i64;
            let delta = rng.gen_range(-reach..=reach);
            for x in &mut v[i..] {
                *x = (*x as i64 + delta).try_into().ok()?;
            }
        }
        _ => {
            let i = rng.gen_range(1..k);
            let delta: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
            for x in &mut v[i..] {
                *x = (*x as i64 + delta).try_into().ok()?;
            }
        }
    }
    let next = IntSet::new(v).ok()?;
    (next.len() == k && next.span() <= max_span).then(|| next.translated_to_zero())
}

fn randomized(cfg: &SearchConfig) -> (u64, Vec<IntSet>) {
    let runs: Vec<(u64, Vec<IntSet>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r);
            let mut cur = random_start(&mut rng, cfg.k, cfg.max_span);
            let mut cur_score = score(&cur, cfg.k);
            let mut best: BTreeMap<(i64, IntSet), ()> = BTreeMap::new();
            let mut evaluations = 1u64;
            let note = |a: &IntSet, s: i64, best: &mut BTreeMap<(i64, IntSet), ()>| {
                if s <= 2 * cfg.k as i64 && fails_structure(a) {
                    best.insert((s, normalize(a).set), ());
                    if best.len() > cfg.max_records {
                        best.pop_last();
                    }
                }
            };
            note(&cur, cur_score, &mut best);
            for _ in 0..cfg.steps {
                let Some(next) = neighbour(&mut rng, &cur, cfg.max_span) else { continue };
                evaluations += 1;
                let s = score(&next, cfg.k);
                note(&next, s, &mut best);
                if s <= cur_score || rng.gen_bool(0.05) {
                    cur = next;
                    cur_score = s;
                }
            }
            (evaluations, best.into_keys().map(|(_, set)| set).collect())
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.0).sum();
    (evaluations, runs.into_iter().flat_map(|r| r.1).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBucket {
    pub ratio: Ratio,
    pub total: u64,
    /// Inside the budget for its deficiency: `k + b2` when `b < 0`, otherwise
    /// an AP within `2k - 1 + 2b` or a BP within `k + b`.
    pub structured: u64,
    pub unstructured: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioHistogram {
    pub max_span: u64,
    pub buckets: Vec<HistogramBucket>,
}

impl RatioHistogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("num,den,ratio,total,structured,unstructured\n");
        for b in &self.buckets {
            out.push_str(&format!(
                "{},{},{:.6},{},{},{}\n",
                b.ratio.num,
                b.ratio.den,
                b.ratio.value(),
                b.total,
                b.structured,
                b.unstructured
            ));
        }
        out
    }
}

pub fn is_structured(a: &IntSet) -> bool {
    let s = stats(a);
    let (k, b) = (s.k as i64, s.deficiency_b);
    let ap = ap_cover(a).length as i64;
    if b < 0 {
        ap <= k + s.deficiency_b2
    } else {
        ap <= 2 * k - 1 + 2 * b || bp_cover_within(a, (k + b) as u64).is_some()
    }
}

fn histogram_of<I: IntoParallelIterator<Item = IntSet>>(sets: I) -> Vec<HistogramBucket> {
    let counts = sets
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<Ratio, (u64, u64)>, a| {
            let s = stats(&a);
            let e = acc.entry(Ratio::new(s.doubling, s.k)).or_default();
            e.0 += 1;
            e.1 += is_structured(&a) as u64;
            acc
        })
        .reduce(BTreeMap::new, |mut x, y| {
            for (r, (t, s)) in y {
                let e = x.entry(r).or_default();
                e.0 += t;
                e.1 += s;
            }
            x
        });
    counts
        .into_iter()
        .map(|(ratio, (total, structured))| HistogramBucket { ratio, total, structured, unstructured: total - structured })
        .collect()
}

/// Doubling ratios of every canonical set up to `max_span`.
pub fn ratio_histogram(max_span: u64) -> Result<RatioHistogram> {
    let sets: Vec<IntSet> = enumerate_canonical(max_span)?.collect();
    Ok(RatioHistogram { max_span, buckets: histogram_of(sets) })
}

/// Doubling ratios of an arbitrary collection, such as a parametric family.
pub fn ratio_histogram_of(sets: Vec<IntSet>) -> RatioHistogram {
    let max_span = sets.iter().map(IntSet::span).max().unwrap_or(0);
    RatioHistogram { max_span, buckets: histogram_of(sets) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Family;
    use std::collections::BTreeSet;

    /// All `k`-subsets of `[0, span]` containing 0, without pruning.
    fn oracle_frontier(k: u64, span: u64) -> (Option<i64>, BTreeSet<IntSet>) {
        let mut best: Option<i64> = None;
        let mut sets = BTreeSet::new();
        for interior in 0u64..1 << span {
            if interior.count_ones() as u64 != k - 1 {
                continue;
            }
            let a = IntSet::from_mask((1 | (interior << 1)) as u128);
            if !fails_structure(&a) {
                continue;
            }
            let b = stats(&a).deficiency_b;
            if best.is_none_or(|x| b < x) {
                best = Some(b);
                sets.clear();
            }
            if best == Some(b) {
                sets.insert(normalize(&a).set);
            }
        }
        (best, sets)
    }

    #[test]
    fn exhaustive_matches_oracle() {
        for (k, span) in [(4, 12), (5, 14), (6, 16), (7, 16)] {
            let out = frontier_search(&SearchConfig::new(k, span)).unwrap();
            assert_eq!(out.mode, SearchMode::Exhaustive);
            let (b, sets) = oracle_frontier(k, span);
            assert_eq!(out.min_b, b, "k={k}");
            let got: BTreeSet<IntSet> = out.records.iter().map(|r| r.set.clone()).collect();
            assert_eq!(got, sets, "k={k}");
        }
    }

    #[test]
    fn records_recertify() {
        let out = frontier_search(&SearchConfig::new(6, 20)).unwrap();
        assert!(!out.records.is_empty());
        for r in &out.records {
            let mut again = certify(&r.set);
            again.frontier = r.frontier;
            assert_eq!(&again, r);
            assert!(fails_structure(&r.set));
            assert!(r.frontier);
        }
    }

    #[test]
    fn tiny_k_is_never_applicable() {
        let out = frontier_search(&SearchConfig::new(3, 12)).unwrap();
        assert!(out.records.iter().all(|r| !r.applicable));
        assert!(frontier_search(&SearchConfig::new(2, 12)).is_err());
        assert!(frontier_search(&SearchConfig::new(8, 5)).is_err());
    }

    #[test]
    fn budget_exhaustion_falls_back_to_random_moves() {
        let mut cfg = SearchConfig::new(7, 30);
        cfg.budget = 1_000;
        cfg.restarts = 4;
        cfg.steps = 300;
        let out = frontier_search(&cfg).unwrap();
        assert!(out.budget_exhausted);
        assert_eq!(out.mode, SearchMode::Randomized);
        for r in &out.records {
            assert!(fails_structure(&r.set));
            assert_eq!(normalize(&r.set).set, r.set);
        }
        cfg.workers = 3;
        assert_eq!(frontier_search(&cfg).unwrap(), out);
    }

    #[test]
    fn large_spans_use_random_moves() {
        let mut cfg = SearchConfig::new(9, 200);
        cfg.restarts = 2;
        cfg.steps = 200;
        let out = frontier_search(&cfg).unwrap();
        assert_eq!((out.mode, out.budget_exhausted, out.nodes), (SearchMode::Randomized, false, 0));
    }

    #[test]
    fn ratio_ordering_and_reduction() {
        assert_eq!(Ratio::new(10, 4), Ratio { num: 5, den: 2 });
        assert!(Ratio::new(7, 3) < Ratio::new(5, 2));
    }

    #[test]
    fn histogram_small_span() {
        let h = ratio_histogram(8).unwrap();
        let total: u64 = h.buckets.iter().map(|b| b.total).sum();
        assert_eq!(total, enumerate_canonical(8).unwrap().count() as u64);
        assert!(h.buckets.windows(2).all(|w| w[0].ratio < w[1].ratio));
        assert!(h.buckets.iter().all(|b| b.structured + b.unstructured == b.total));
        let csv = h.to_csv();
        assert_eq!(csv.lines().count(), h.buckets.len() + 1);
    }

    #[test]
    fn histogram_of_intervals_approaches_two() {
        let sets: Vec<IntSet> = (1..40).map(|n| IntSet::interval(0, n).unwrap()).collect();
        let h = ratio_histogram_of(sets);
        let last = h.buckets.iter().map(|b| b.ratio).filter(|r| r.den == 40).max().unwrap();
        assert_eq!(last, Ratio::new(79, 40));
        assert!(h.buckets.iter().all(|b| b.ratio < Ratio::new(2, 1)));
    }

    #[test]
    fn histogram_of_block_family() {
        for a in 1..8u64 {
            let set = Family::Ex12 { a, c: 6 * a + 1 }.materialize().unwrap();
            let h = ratio_histogram_of(vec![set]);
            assert_eq!(h.buckets[0].ratio, Ratio::new(10 * a - 5, 3 * a));
        }
    }
}
