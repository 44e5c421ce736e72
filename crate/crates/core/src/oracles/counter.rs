use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

#[derive(Debug, Default)]
pub struct QueryCounter {
    forward: AtomicU64,
    inverse: AtomicU64,
    controlled_reflections: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryCounts {
    pub forward: u64,
    pub inverse: u64,
    pub controlled_reflections: u64,
}

impl QueryCounts {
    /// Forward plus inverse calls.
    pub fn total(&self) -> u64 {
        self.forward + self.inverse
    }
}

impl QueryCounter {
    pub fn snapshot(&self) -> QueryCounts {
        QueryCounts {
            forward: self.forward.load(Ordering::SeqCst),
            inverse: self.inverse.load(Ordering::SeqCst),
            controlled_reflections: self.controlled_reflections.load(Ordering::SeqCst),
        }
    }

    pub fn reset(&self) {
        self.forward.store(0, Ordering::SeqCst);
        self.inverse.store(0, Ordering::SeqCst);
        self.controlled_reflections.store(0, Ordering::SeqCst);
    }

    pub(crate) fn add(&self, forward: u64, inverse: u64, reflections: u64) {
        self.forward.fetch_add(forward, Ordering::SeqCst);
        self.inverse.fetch_add(inverse, Ordering::SeqCst);
        self.controlled_reflections.fetch_add(reflections, Ordering::SeqCst);
    }
}

#[derive(Debug, Clone)]
pub struct ChargeItem {
    pub counter: Arc<QueryCounter>,
    pub label: String,
    /// Derived oracles are tallied on their own counter but excluded from
    /// [`Charge::queries`], which counts calls to primitive oracles only.
    pub derived: bool,
    pub forward: u64,
    pub inverse: u64,
    pub reflections: u64,
}

/// Symbolic query cost of one use of some circuit: how many forward and
/// inverse calls it makes to each oracle. Composes by addition and scaling.
#[derive(Debug, Clone, Default)]
pub struct Charge {
    items: Vec<ChargeItem>,
}

impl Charge {
    pub fn none() -> Self {
        Self::default()
    }

    pub(crate) fn single(counter: &Arc<QueryCounter>, label: &str, derived: bool, forward: u64, inverse: u64) -> Self {
        Self {
            items: vec![ChargeItem {
                counter: counter.clone(),
                label: label.to_string(),
                derived,
                forward,
                inverse,
                reflections: 0,
            }],
        }
    }

    pub fn items(&self) -> &[ChargeItem] {
        &self.items
    }

    /// Calls to primitive oracles, forward plus inverse.
    pub fn queries(&self) -> u64 {
        self.items.iter().filter(|i| !i.derived).map(|i| i.forward + i.inverse).sum()
    }

    pub fn reflections(&self) -> u64 {
        self.items.iter().filter(|i| !i.derived).map(|i| i.reflections).max().unwrap_or(0)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            items: self
                .items
                .iter()
                .map(|i| ChargeItem { forward: i.inverse, inverse: i.forward, ..i.clone() })
                .collect(),
        }
    }

    pub fn plus(&self, other: &Charge) -> Self {
        let mut items = self.items.clone();
        for o in &other.items {
            if let Some(i) = items.iter_mut().find(|i| Arc::ptr_eq(&i.counter, &o.counter)) {
                i.forward += o.forward;
                i.inverse += o.inverse;
                i.reflections += o.reflections;
            } else {
                items.push(o.clone());
            }
        }
        Self { items }
    }

    pub fn times(&self, k: u64) -> Self {
        Self {
            items: self
                .items
                .iter()
                .map(|i| ChargeItem {
                    forward: i.forward * k,
                    inverse: i.inverse * k,
                    reflections: i.reflections * k,
                    ..i.clone()
                })
                .collect(),
        }
    }

    /// Circuit alternating `forward_uses` applications of `U` with
    /// `inverse_uses` of `U†`.
    pub fn alternating(&self, forward_uses: u64, inverse_uses: u64) -> Self {
        self.times(forward_uses).plus(&self.adjoint().times(inverse_uses))
    }

    /// Adds `r` controlled reflections, recorded on every oracle involved.
    pub fn with_reflections(&self, r: u64) -> Self {
        Self {
            items: self
                .items
                .iter()
                .map(|i| ChargeItem { reflections: i.reflections + r, ..i.clone() })
                .collect(),
        }
    }

    /// Writes the charge to the underlying counters.
    pub fn record(&self) {
        for i in &self.items {
            i.counter.add(i.forward, i.inverse, i.reflections);
        }
    }
}
