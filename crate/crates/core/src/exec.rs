//! Execution strategy for the numeric kernels.
//!
//! Every reduction is split into fixed-size chunks whose partial sums are
//! combined left to right, so the sequential and parallel paths produce
//! bit-identical results regardless of thread scheduling. Sums use
//! Neumaier compensation; entropies over a million letters need it to
//! stay within 1e-12 of the closed form.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of elements folded sequentially inside one chunk.
pub const CHUNK: usize = 1 << 14;

/// How a kernel distributes its work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Strategy {
    /// All strategies compiled into this build.
    pub fn all() -> &'static [Strategy] {
        #[cfg(feature = "parallel")]
        {
            &[Strategy::Sequential, Strategy::Parallel]
        }
        #[cfg(not(feature = "parallel"))]
        {
            &[Strategy::Sequential]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Strategy::Parallel => "parallel",
        }
    }

    /// Sums `term(i)` for `i in 0..n` with a fixed chunked association.
    pub fn sum<F>(self, n: usize, term: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let chunk_sum = |c: usize| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            (start..end).fold(Neumaier::default(), |acc, i| acc.add(term(i)))
        };
        let chunks = n.div_ceil(CHUNK);
        let partials: Vec<Neumaier> = match self {
            Strategy::Sequential => (0..chunks).map(chunk_sum).collect(),
            #[cfg(feature = "parallel")]
            Strategy::Parallel => (0..chunks).into_par_iter().map(chunk_sum).collect(),
        };
        partials
            .into_iter()
            .fold(Neumaier::default(), |acc, p| acc.add(p.sum).add(p.comp))
            .total()
    }

    /// Evaluates `f(i)` for `i in 0..n`, preserving index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Strategy::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Strategy::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }

    /// Maps over a slice, preserving order.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            Strategy::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Strategy::Parallel => items.par_iter().map(f).collect(),
        }
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    terms.into_iter().fold(Neumaier::default(), Neumaier::add).total()
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(self, x: f64) -> Self {
        let t = self.sum + x;
        if !t.is_finite() {
            return Neumaier { sum: t, comp: 0.0 };
        }
        let comp = if self.sum.abs() >= x.abs() {
            self.comp + ((self.sum - t) + x)
        } else {
            self.comp + ((x - t) + self.sum)
        };
        Neumaier { sum: t, comp }
    }

    fn total(self) -> f64 {
        if self.sum.is_finite() {
            self.sum + self.comp
        } else {
            self.sum
        }
    }
}
