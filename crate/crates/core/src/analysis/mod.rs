//! Decision procedures and searches over matrices and calculi.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub mod approx;
pub mod closure;
pub mod compare;
pub mod enumerate;
pub mod soundness;

pub use approx::{
    falsify, mc_sequence, minimal_covers, sequential_approximation_check, FalsificationCertificate, FalsifyOutcome,
    McSequence, MinimalCovers, SequentialReport,
};
pub use compare::{compare, taut_equal, CompareMode, CompareProof, CompareVerdict, EqualVerdict};
pub use enumerate::{enumerate_covers, search_covers, Cover, CoverEnumeration, EnumOptions};
pub use soundness::{check_strong_soundness, check_t_soundness, CoverReport, TSoundness};

/// Three-valued outcome of a bounded decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

/// Resource limits shared by the searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of distinct elements in a function closure.
    pub closure_cap: usize,
    /// Maximum number of search nodes visited while enumerating matrices.
    pub enumeration_cap: u64,
    pub time_cap: Option<Duration>,
    /// Never fall back to bounded comparison when the closure gives up.
    pub exact_only: bool,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            closure_cap: 1_000_000,
            enumeration_cap: 10_000_000,
            time_cap: None,
            exact_only: false,
        }
    }
}

impl Budget {
    pub fn with_closure_cap(mut self, cap: usize) -> Self {
        self.closure_cap = cap;
        self
    }

    pub fn with_enumeration_cap(mut self, cap: u64) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn with_time_cap(mut self, cap: Duration) -> Self {
        self.time_cap = Some(cap);
        self
    }

    pub fn with_exact_only(mut self, exact_only: bool) -> Self {
        self.exact_only = exact_only;
        self
    }

    pub fn deadline(&self) -> Deadline {
        Deadline(self.time_cap.map(|d| Instant::now() + d))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn passed(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

/// Runs `f` on a thread pool of the given size (all cores when `None`).
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}
