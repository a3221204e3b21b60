//! Claim verdicts, canonical enumeration of small sets, parallel sweeps and
//! the parametric example families.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::{normalize, IntSet, NormalForm};
use crate::progressions::{ap_cover, bp_cover, bp_cover_within, ApWindow, BpCover};
use crate::structure::{residue_decomposition, triangle_profile, ResidueDecomposition, TriangleVerdict, DEFAULT_THETA};
use crate::sumset::{stats, SumsetStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClaimId {
    /// Small doubling below `3k - 3`: AP of length at most `k + b2`.
    #[serde(rename = "freiman_small_b")]
    FreimanSmallB,
    /// `|2A| = 3k - 3`: AP of length at most `2k - 1`, or a BP.
    #[serde(rename = "3k3")]
    ThreeKMinusThree,
    /// `0 <= b < k/3 - 2`: AP within `2k - 1 + 2b` or BP within `k + b`.
    #[serde(rename = "main")]
    Main,
    /// `0 <= b` and `|2A| <= alpha k`: same conclusion as `Main`.
    #[serde(rename = "weak")]
    Weak,
}

impl ClaimId {
    pub const ALL: [ClaimId; 4] = [ClaimId::FreimanSmallB, ClaimId::ThreeKMinusThree, ClaimId::Main, ClaimId::Weak];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::FreimanSmallB => "freiman_small_b",
            ClaimId::ThreeKMinusThree => "3k3",
            ClaimId::Main => "main",
            ClaimId::Weak => "weak",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClaimId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| Error::InvalidParameters(format!("unknown claim `{s}`")))
    }
}

/// Rational ratio bound `num/den` for the weak claim; must lie in `(3, 10/3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alpha {
    pub num: u64,
    pub den: u64,
}

impl Alpha {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num <= 3 * den || 3 * num >= 10 * den {
            return Err(Error::InvalidParameters(format!("alpha {num}/{den} outside (3, 10/3)")));
        }
        let g = num.gcd(&den);
        Ok(Alpha { num: num / g, den: den / g })
    }
}

impl Default for Alpha {
    fn default() -> Self {
        Alpha { num: 33, den: 10 }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    /// Accepts `p/q` or a decimal such as `3.25`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameters(format!("malformed alpha `{s}`"));
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            return Alpha::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 9 || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int: u64 = int.parse().map_err(|_| bad())?;
        let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        Alpha::new(int * den + frac, den)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub set: IntSet,
    pub k: u64,
    pub b: i64,
    pub ap_len: u64,
    pub bp_len: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Ap { window: ApWindow },
    /// `exact` is set when the set equals the progression pair itself.
    Bp { cover: BpCover, exact: bool },
    Violation(ViolationRecord),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub claim: ClaimId,
    pub applicable: bool,
    /// Present iff `applicable`.
    pub holds: Option<bool>,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn not_applicable(claim: ClaimId) -> Self {
        Verdict { claim, applicable: false, holds: None, witness: None }
    }

    pub fn is_violation(&self) -> bool {
        self.holds == Some(false)
    }
}

/// Shared per-set quantities; the BP search runs at most once.
struct Context<'a> {
    a: &'a IntSet,
    stats: SumsetStats,
    ap: ApWindow,
    bp: Option<Option<BpCover>>,
}

impl<'a> Context<'a> {
    fn new(a: &'a IntSet) -> Self {
        Context { a, stats: stats(a), ap: ap_cover(a), bp: None }
    }

    fn bp(&mut self) -> Option<BpCover> {
        let a = self.a;
        self.bp.get_or_insert_with(|| bp_cover(a)).clone()
    }

    fn violation(&mut self) -> Witness {
        let bp_len = self.bp().map(|c| c.total_length);
        Witness::Violation(ViolationRecord {
            set: self.a.clone(),
            k: self.stats.k,
            b: self.stats.deficiency_b,
            ap_len: self.ap.length,
            bp_len,
        })
    }

    fn freiman_small_b(&mut self) -> Verdict {
        let (k, b2) = (self.stats.k as i64, self.stats.deficiency_b2);
        if !(k > 3 && self.stats.deficiency_b < 0) {
            return Verdict::not_applicable(ClaimId::FreimanSmallB);
        }
        let holds = self.ap.length as i64 <= k + b2;
        let witness = if holds { Witness::Ap { window: self.ap } } else { self.violation() };
        Verdict { claim: ClaimId::FreimanSmallB, applicable: true, holds: Some(holds), witness: Some(witness) }
    }

    fn three_k_minus_three(&mut self) -> Verdict {
        let k = self.stats.k;
        if !(k > 6 && self.stats.deficiency_b == 0) {
            return Verdict::not_applicable(ClaimId::ThreeKMinusThree);
        }
        let witness = if self.ap.length < 2 * k {
            Witness::Ap { window: self.ap }
        } else if let Some(cover) = self.bp() {
            let exact = cover.total_length == k;
            Witness::Bp { cover, exact }
        } else {
            return Verdict {
                claim: ClaimId::ThreeKMinusThree,
                applicable: true,
                holds: Some(false),
                witness: Some(self.violation()),
            };
        };
        Verdict { claim: ClaimId::ThreeKMinusThree, applicable: true, holds: Some(true), witness: Some(witness) }
    }

    /// The shared conclusion of `Main` and `Weak`; assumes `b >= 0`.
    fn structured(&mut self, claim: ClaimId) -> Verdict {
        let (k, b) = (self.stats.k, self.stats.deficiency_b as u64);
        let witness = if self.ap.length < 2 * k + 2 * b {
            Some(Witness::Ap { window: self.ap })
        } else {
            let cached = self.bp.clone().flatten();
            match cached {
                Some(c) if c.total_length <= k + b => Some(c),
                Some(_) => None,
                None if self.bp.is_some() => None,
                None => bp_cover_within(self.a, k + b),
            }
            .map(|cover| Witness::Bp { exact: cover.total_length == k, cover })
        };
        match witness {
            Some(w) => Verdict { claim, applicable: true, holds: Some(true), witness: Some(w) },
            None => Verdict { claim, applicable: true, holds: Some(false), witness: Some(self.violation()) },
        }
    }

    fn main(&mut self) -> Verdict {
        let (k, b) = (self.stats.k as i64, self.stats.deficiency_b);
        if !(b >= 0 && 3 * b < k - 6) {
            return Verdict::not_applicable(ClaimId::Main);
        }
        self.structured(ClaimId::Main)
    }

    fn weak(&mut self, alpha: Alpha) -> Verdict {
        let (k, b) = (self.stats.k as u128, self.stats.deficiency_b);
        let doubling = self.stats.doubling as u128;
        if !(b >= 0 && alpha.den as u128 * doubling <= alpha.num as u128 * k) {
            return Verdict::not_applicable(ClaimId::Weak);
        }
        self.structured(ClaimId::Weak)
    }

    fn check(&mut self, claim: ClaimId, alpha: Alpha) -> Verdict {
        match claim {
            ClaimId::FreimanSmallB => self.freiman_small_b(),
            ClaimId::ThreeKMinusThree => self.three_k_minus_three(),
            ClaimId::Main => self.main(),
            ClaimId::Weak => self.weak(alpha),
        }
    }
}

pub fn check_freiman_small_b(a: &IntSet) -> Verdict {
    Context::new(a).freiman_small_b()
}

pub fn check_3k3(a: &IntSet) -> Verdict {
    Context::new(a).three_k_minus_three()
}

pub fn check_main(a: &IntSet) -> Verdict {
    Context::new(a).main()
}

pub fn check_weak(a: &IntSet, alpha: Alpha) -> Verdict {
    Context::new(a).weak(alpha)
}

/// Runs the requested claims against one set, sharing the sumset and covers.
pub fn check_claims(a: &IntSet, claims: &BTreeSet<ClaimId>, alpha: Alpha) -> BTreeMap<ClaimId, Verdict> {
    let mut ctx = Context::new(a);
    claims.iter().map(|&c| (c, ctx.check(c, alpha))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub theta: f64,
    pub alpha: Alpha,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { theta: DEFAULT_THETA, alpha: Alpha::default() }
    }
}

/// Largest modulus in the residue section of a report.
pub const REPORT_MAX_MODULUS: u64 = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub input: IntSet,
    pub normal_form: NormalForm,
    pub stats: SumsetStats,
    pub ap: ApWindow,
    pub bp: Option<BpCover>,
    pub bp_has_singleton_part: Option<bool>,
    pub residues: Vec<ResidueDecomposition>,
    /// Profile over `[min A, max A]`; absent for singletons.
    pub triangle: Option<TriangleVerdict>,
    pub verdicts: BTreeMap<ClaimId, Verdict>,
}

pub fn analyze(a: &IntSet, opts: &AnalyzeOptions) -> Result<StructureReport> {
    let mut ctx = Context::new(a);
    let bp = ctx.bp();
    let verdicts = ClaimId::ALL.iter().map(|&c| (c, ctx.check(c, opts.alpha))).collect();
    let residues = (1..=REPORT_MAX_MODULUS).map(|d| residue_decomposition(a, d)).collect::<Result<_>>()?;
    let triangle = if a.span() > 0 { Some(triangle_profile(a, a.first(), a.last(), opts.theta)?) } else { None };
    Ok(StructureReport {
        input: a.clone(),
        normal_form: normalize(a),
        stats: ctx.stats,
        ap: ctx.ap,
        bp_has_singleton_part: bp.as_ref().map(BpCover::has_singleton_part),
        bp,
        residues,
        triangle,
        verdicts,
    })
}

/// Largest span accepted by [`enumerate_canonical`].
pub const MAX_ENUM_SPAN: u64 = 62;

fn mask_gcd(mask: u64) -> u64 {
    let mut g = 0u64;
    let mut m = mask & !1;
    while m != 0 {
        g = g.gcd(&(m.trailing_zeros() as u64));
        if g == 1 {
            break;
        }
        m &= m - 1;
    }
    g
}

/// `mask` (bits `0..=span`) is no larger than its mirror image in the
/// element-wise lexicographic order of sorted elements.
fn reflection_canonical(mask: u64, span: u64) -> bool {
    let mirror = mask.reverse_bits() >> (63 - span);
    let diff = mask ^ mirror;
    diff == 0 || mask & (diff & diff.wrapping_neg()) != 0
}

/// Canonical representatives with at least two elements: minimum 0, gcd of
/// elements 1, maximum at most `max_span`, and no larger than their
/// reflection. Ordered by maximum, then by the bit pattern of the interior.
pub fn enumerate_canonical(max_span: u64) -> Result<impl Iterator<Item = IntSet>> {
    if max_span == 0 || max_span > MAX_ENUM_SPAN {
        return Err(Error::InvalidParameters(format!("max_span {max_span} outside [1, {MAX_ENUM_SPAN}]")));
    }
    Ok((1..=max_span).flat_map(|m| {
        (0..1u64 << (m - 1)).filter_map(move |interior| {
            let mask = 1 | (interior << 1) | (1 << m);
            (mask_gcd(mask) == 1 && reflection_canonical(mask, m)).then(|| IntSet::from_mask(mask as u128))
        })
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub max_span: u64,
    pub claims: BTreeSet<ClaimId>,
    pub workers: usize,
    /// Refuse to run when more canonical sets than this would be examined.
    pub max_sets: u64,
    pub alpha: Alpha,
}

impl SweepConfig {
    pub fn new(max_span: u64, claims: impl IntoIterator<Item = ClaimId>) -> Self {
        SweepConfig {
            max_span,
            claims: claims.into_iter().collect(),
            workers: 1,
            max_sets: 50_000_000,
            alpha: Alpha::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimSummary {
    pub max_span: u64,
    pub claim: ClaimId,
    pub applicable: u64,
    pub holds: u64,
    pub violations: Vec<ViolationRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub max_span: u64,
    pub sets_examined: u64,
    pub claims: Vec<ClaimSummary>,
}

impl SweepSummary {
    pub fn violation_count(&self) -> usize {
        self.claims.iter().map(|c| c.violations.len()).sum()
    }
}

const SHARD: usize = 512;

pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameters(format!("thread pool: {e}")))
}

/// Checks every canonical set up to `max_span`. Shards have a fixed size and
/// are merged in index order, so the result does not depend on `workers`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    if cfg.claims.is_empty() {
        return Err(Error::InvalidParameters("no claims selected".into()));
    }
    let mut sets = Vec::new();
    for s in enumerate_canonical(cfg.max_span)? {
        if sets.len() as u64 >= cfg.max_sets {
            return Err(Error::ResourceCeiling(format!(
                "more than {} canonical sets at max_span {}",
                cfg.max_sets, cfg.max_span
            )));
        }
        sets.push(s);
    }
    let claims: Vec<ClaimId> = cfg.claims.iter().copied().collect();
    let empty = || vec![(0u64, 0u64, Vec::new()); claims.len()];
    let shards: Vec<Vec<(u64, u64, Vec<ViolationRecord>)>> = worker_pool(cfg.workers)?.install(|| {
        sets.par_chunks(SHARD)
            .map(|chunk| {
                let mut acc = empty();
                for a in chunk {
                    let verdicts = check_claims(a, &cfg.claims, cfg.alpha);
                    for (slot, v) in acc.iter_mut().zip(verdicts.values()) {
                        if v.applicable {
                            slot.0 += 1;
                        }
                        match (&v.holds, &v.witness) {
                            (Some(true), _) => slot.1 += 1,
                            (Some(false), Some(Witness::Violation(r))) => slot.2.push(r.clone()),
                            _ => {}
                        }
                    }
                }
                acc
            })
            .collect()
    });
    let mut totals = empty();
    for shard in shards {
        for (t, s) in totals.iter_mut().zip(shard) {
            t.0 += s.0;
            t.1 += s.1;
            t.2.extend(s.2);
        }
    }
    let claims = claims
        .into_iter()
        .zip(totals)
        .map(|(claim, (applicable, holds, mut violations))| {
            violations.sort_by(|x, y| x.set.cmp(&y.set));
            ClaimSummary { max_span: cfg.max_span, claim, applicable, holds, violations }
        })
        .collect();
    Ok(SweepSummary { max_span: cfg.max_span, sets_examined: sets.len() as u64, claims })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// Three blocks `[0,a-1] ∪ [c,c+a-1] ∪ [2c,2c+a-1]`, `k = 3a`, `c > 2k`.
    Ex12 { a: u64, c: u64 },
    /// `[0,k-3] ∪ {k+10, 2k+20}`, `k > 15`.
    Ex15 { k: u64 },
    /// `[0,k-3] ∪ {3k, 3k+12}`, `k > 14`.
    Ex16 { k: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Ex12 { .. } => "ex12",
            Family::Ex15 { .. } => "ex15",
            Family::Ex16 { .. } => "ex16",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Family::Ex12 { a, c } => a >= 1 && c > 6 * a,
            Family::Ex15 { k } => k > 15,
            Family::Ex16 { k } => k > 14,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("invalid parameters for {self:?}")))
        }
    }

    pub fn k(&self) -> u64 {
        match *self {
            Family::Ex12 { a, .. } => 3 * a,
            Family::Ex15 { k } | Family::Ex16 { k } => k,
        }
    }

    pub fn span(&self) -> u64 {
        match *self {
            Family::Ex12 { a, c } => 2 * c + a - 1,
            Family::Ex15 { k } => 2 * k + 20,
            Family::Ex16 { k } => 3 * k + 12,
        }
    }

    /// The deficiency every member of the family has.
    pub fn expected_b(&self) -> i64 {
        match *self {
            Family::Ex12 { a, .. } => a as i64 - 2,
            Family::Ex15 { .. } | Family::Ex16 { .. } => 11,
        }
    }

    pub fn materialize(&self) -> Result<IntSet> {
        self.validate()?;
        match *self {
            Family::Ex12 { a, c } => IntSet::new((0..3).flat_map(|i| (i * c)..(i * c + a))),
            Family::Ex15 { k } => IntSet::new((0..=k - 3).chain([k + 10, 2 * k + 20])),
            Family::Ex16 { k } => IntSet::new((0..=k - 3).chain([3 * k, 3 * k + 12])),
        }
    }

    /// Every valid member with span at most `max_span`, ordered by family then parameters.
    pub fn all_within(max_span: u64) -> Vec<Family> {
        let mut out = Vec::new();
        for a in 1.. {
            if (Family::Ex12 { a, c: 6 * a + 1 }).span() > max_span {
                break;
            }
            for c in (6 * a + 1).. {
                let f = Family::Ex12 { a, c };
                if f.span() > max_span {
                    break;
                }
                out.push(f);
            }
        }
        out.extend((16..).map(|k| Family::Ex15 { k }).take_while(|f| f.span() <= max_span));
        out.extend((15..).map(|k| Family::Ex16 { k }).take_while(|f| f.span() <= max_span));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRow {
    #[serde(flatten)]
    pub family: Family,
    pub k: u64,
    pub doubling: u64,
    pub b: i64,
    pub expected_b: i64,
    pub matches: bool,
}

pub fn family_row(f: Family) -> Result<FamilyRow> {
    let s = stats(&f.materialize()?);
    Ok(FamilyRow {
        family: f,
        k: s.k,
        doubling: s.doubling,
        b: s.deficiency_b,
        expected_b: f.expected_b(),
        matches: s.deficiency_b == f.expected_b(),
    })
}

/// The deficiency identity for every family member with span at most `max_span`.
pub fn family_table(max_span: u64) -> Result<Vec<FamilyRow>> {
    Family::all_within(max_span).into_iter().map(family_row).collect()
}
