//! Sumsets `A + B` and the deficiency statistics built on `|2A|`.
//!
//! Three engines produce bit-identical results:
//! * `Sparse` materializes all `|A|*|B|` sums and sorts them,
//! * `Shift` ORs shifted copies of one indicator vector into an accumulator,
//! * `Fft` convolves the two indicator vectors in floating point and
//!   thresholds the counts at 1/2.
//!
//! [`Engine::Auto`] picks the cheapest by a simple cost model whose weights
//! live in [`SumsetConfig`].

use std::sync::{Mutex, OnceLock};

use num_integer::Integer;
use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::intset::IntSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Auto,
    Sparse,
    Shift,
    Fft,
}

/// Cost-model weights for [`Engine::Auto`]. Each engine's estimated cost is
/// its weight times a work count; the smallest estimate wins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsetConfig {
    pub engine: Engine,
    /// Per generated pair sum (including the sort).
    pub sparse_weight: f64,
    /// Per 64-bit word touched by a shifted OR.
    pub shift_weight: f64,
    /// Per butterfly, `n log2 n` per transform.
    pub fft_weight: f64,
    /// Largest transform length the FFT engine accepts.
    pub fft_max_len: usize,
}

impl Default for SumsetConfig {
    fn default() -> Self {
        SumsetConfig {
            engine: Engine::Auto,
            sparse_weight: 4.0,
            shift_weight: 1.0,
            fft_weight: 6.0,
            fft_max_len: 1 << 24,
        }
    }
}

impl SumsetConfig {
    pub fn with_engine(engine: Engine) -> Self {
        SumsetConfig { engine, ..Default::default() }
    }

    /// Engine chosen for the given operand shapes.
    pub fn choose(&self, a: &IntSet, b: &IntSet) -> Engine {
        if self.engine != Engine::Auto {
            return self.engine;
        }
        let (ka, kb) = (a.len() as f64, b.len() as f64);
        let width = (a.span() + b.span() + 1) as f64;
        let pairs = ka * kb;
        let sparse = self.sparse_weight * pairs * (pairs.log2() + 1.0);
        let shift = self.shift_weight * ka.min(kb) * (width / 64.0 + 1.0) + width / 64.0;
        let n = fft_len(a, b);
        let fft = if n > self.fft_max_len {
            f64::INFINITY
        } else {
            let n = n as f64;
            self.fft_weight * 3.0 * n * n.log2()
        };
        if sparse <= shift && sparse <= fft {
            Engine::Sparse
        } else if shift <= fft {
            Engine::Shift
        } else {
            Engine::Fft
        }
    }
}

fn fft_len(a: &IntSet, b: &IntSet) -> usize {
    ((a.span() + b.span() + 1) as usize).next_power_of_two()
}

/// `{x + y : x in a, y in b}` with the default configuration.
pub fn sumset(a: &IntSet, b: &IntSet) -> Result<IntSet> {
    sumset_with(a, b, &SumsetConfig::default())
}

pub fn sumset_with(a: &IntSet, b: &IntSet, cfg: &SumsetConfig) -> Result<IntSet> {
    let offset = a.first().checked_add(b.first()).ok_or(Error::Overflow("adding set minima"))?;
    a.last().checked_add(b.last()).ok_or(Error::Overflow("adding set maxima"))?;
    let width = a.span() as usize + b.span() as usize + 1;
    let mut engine = cfg.choose(a, b);
    if engine == Engine::Fft && fft_len(a, b) > cfg.fft_max_len {
        engine = Engine::Shift;
    }
    let relative: Vec<u64> = match engine {
        Engine::Sparse | Engine::Auto => sparse_relative(a, b),
        Engine::Shift => shift_relative(a, b, width).iter_ones().map(|x| x as u64).collect(),
        Engine::Fft => fft_relative(a, b, width),
    };
    Ok(IntSet::from_sorted_unchecked(relative.into_iter().map(|x| x + offset).collect()))
}

/// 2A.
pub fn double(a: &IntSet) -> IntSet {
    sumset(a, a).expect("2A of a u64 set overflowed")
}

fn sparse_relative(a: &IntSet, b: &IntSet) -> Vec<u64> {
    let (ma, mb) = (a.first(), b.first());
    let mut sums = Vec::with_capacity(a.len() * b.len());
    for x in a.iter() {
        for y in b.iter() {
            sums.push(x - ma + y - mb);
        }
    }
    sums.sort_unstable();
    sums.dedup();
    sums
}

fn shift_relative(a: &IntSet, b: &IntSet, width: usize) -> Bitset {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let pattern = large.to_bitset();
    let ms = small.first();
    let mut acc = Bitset::new(width);
    for x in small.iter() {
        acc.or_shifted(&pattern, (x - ms) as usize);
    }
    acc
}

fn fft_relative(a: &IntSet, b: &IntSet, width: usize) -> Vec<u64> {
    // Plans hold precomputed twiddles; the planner memoizes them by length.
    static PLANNER: OnceLock<Mutex<RealFftPlanner<f64>>> = OnceLock::new();
    let n = width.next_power_of_two().max(2);
    let (forward, inverse) = {
        let mut planner = PLANNER.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
        (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
    };
    let spectrum = |s: &IntSet| {
        let mut input = forward.make_input_vec();
        let m = s.first();
        for x in s.iter() {
            input[(x - m) as usize] = 1.0;
        }
        let mut out = forward.make_output_vec();
        forward.process(&mut input, &mut out).expect("buffer lengths match the plan");
        out
    };
    let mut prod = spectrum(a);
    if a == b {
        prod.iter_mut().for_each(|z| *z = *z * *z);
    } else {
        prod.iter_mut().zip(spectrum(b)).for_each(|(z, w)| *z = *z * w);
    }
    // Spectra of real signals are real at DC and Nyquist; drop rounding noise.
    let last = prod.len() - 1;
    prod[0].im = 0.0;
    prod[last].im = 0.0;
    let mut counts = inverse.make_output_vec();
    inverse.process(&mut prod, &mut counts).expect("buffer lengths match the plan");
    let threshold = 0.5 * n as f64;
    counts[..width].iter().enumerate().filter(|(_, &c)| c > threshold).map(|(i, _)| i as u64).collect()
}

/// Cardinality statistics of `2A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumsetStats {
    pub k: u64,
    /// |2A|
    pub doubling: u64,
    /// b3 = |2A| - (3k - 3); negative below the 3k-3 threshold.
    pub deficiency_b: i64,
    /// b2 = |2A| - (2k - 1).
    pub deficiency_b2: i64,
    /// max - min for integer sets; absent for planar sets.
    pub span: Option<u64>,
}

impl SumsetStats {
    pub fn from_counts(k: u64, doubling: u64, span: Option<u64>) -> Self {
        let (k_i, d_i) = (k as i64, doubling as i64);
        SumsetStats {
            k,
            doubling,
            deficiency_b: d_i - (3 * k_i - 3),
            deficiency_b2: d_i - (2 * k_i - 1),
            span,
        }
    }
}

pub fn stats(a: &IntSet) -> SumsetStats {
    SumsetStats::from_counts(a.len() as u64, double(a).len() as u64, Some(a.span()))
}

/// Lower bound from the Lev–Smeliansky inequality together with the
/// normalization that was applied to meet its hypotheses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevSmelianskyBound {
    pub bound: u64,
    /// max of the (normalized) set playing the role of `A`.
    pub m: u64,
    /// max of the (normalized) set playing the role of `B`.
    pub n: u64,
    /// True when the arguments were swapped so that `m >= n`.
    pub swapped: bool,
    /// Common factor divided out of both sets.
    pub scale: u64,
}

/// For `A, B` with `0 in A ∩ B`, `|A|, |B| >= 2`, `gcd(A) = 1` and
/// `m = max A >= n = max B`:
/// `|A+B| >= min(m + |B|, |A| + 2|B| - 3)` if `m = n`, and
/// `|A+B| >= min(m + |B|, |A| + 2|B| - 2)` if `m > n`.
///
/// Both sets are translated to start at 0, divided by their common gcd and
/// swapped if needed; `|A+B|` is invariant under all three.
pub fn lev_smeliansky_bound(a: &IntSet, b: &IntSet) -> Result<LevSmelianskyBound> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Inapplicable("both sets need at least two elements".into()));
    }
    let a0 = a.translated_to_zero();
    let b0 = b.translated_to_zero();
    let common = a0.difference_gcd().gcd(&b0.difference_gcd());
    let scale_down = |s: &IntSet| IntSet::from_sorted_unchecked(s.iter().map(|x| x / common).collect());
    let (a1, b1) = (scale_down(&a0), scale_down(&b0));
    let (big, small, swapped) = if a1.last() > b1.last() {
        (a1, b1, false)
    } else if b1.last() > a1.last() {
        (b1, a1, true)
    } else if a1.difference_gcd() == 1 {
        (a1, b1, false)
    } else {
        (b1, a1, true)
    };
    if big.difference_gcd() != 1 {
        return Err(Error::Inapplicable(format!(
            "gcd of the longer set is {} after normalization",
            big.difference_gcd()
        )));
    }
    let (m, n) = (big.last(), small.last());
    let (ka, kb) = (big.len() as u64, small.len() as u64);
    let second = if m == n { ka + 2 * kb - 3 } else { ka + 2 * kb - 2 };
    Ok(LevSmelianskyBound { bound: (m + kb).min(second), m, n, swapped, scale: common })
}
