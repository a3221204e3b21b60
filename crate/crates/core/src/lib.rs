//! Computational toolkit for inverse sumset problems on finite integer sets.
//!
//! The crate computes sumsets and the deficiency `b = |2A| - (3|A| - 3)`,
//! finds minimal arithmetic-progression and bi-arithmetic-progression covers,
//! checks Freiman 2-isomorphisms, verifies structure theorems exhaustively on
//! small sets and searches for sets at the boundary of the conjectured
//! structure.

pub mod bitset;
pub mod error;
pub mod intset;
pub mod isomorphism;
pub mod progressions;
pub mod search;
pub mod structure;
pub mod sumset;
pub mod verify;

pub use error::{Error, ParseErrorKind, Result};
pub use intset::{affine_equivalent, normalize, parse_set, IntSet, NormalForm};
pub use sumset::{lev_smeliansky_bound, stats, sumset, sumset_with, Engine, SumsetConfig, SumsetStats};
pub use progressions::{ap_cover, bp_cover, bp_cover_within, is_valid_bp, ApWindow, BpCover};
pub use verify::{analyze, enumerate_canonical, sweep, AnalyzeOptions, ClaimId, Family, StructureReport, SweepConfig, SweepSummary, Verdict};
pub use search::{frontier_search, ratio_histogram, RatioHistogram, SearchConfig, SearchOutcome, SearchRecord};
