//! Process-wide memo of the expensive builders, keyed by exact parameter bits.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{build_p, build_q, build_s, ApproxPolynomial};
use crate::error::Result;

type Slot = Arc<OnceLock<Result<Arc<ApproxPolynomial>>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    P(u64, u64),
    Q(u64, u64, u64),
    S(u64, u64),
}

fn slot(key: Key) -> Slot {
    static TABLE: OnceLock<Mutex<HashMap<Key, Slot>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = table.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(key).or_default().clone()
}

fn memo(key: Key, build: impl FnOnce() -> Result<ApproxPolynomial>) -> Result<Arc<ApproxPolynomial>> {
    slot(key).get_or_init(|| build().map(Arc::new)).clone()
}

pub fn cached_p(t: f64, eta: f64) -> Result<Arc<ApproxPolynomial>> {
    memo(Key::P(t.to_bits(), eta.to_bits()), || build_p(t, eta))
}

pub fn cached_q(t: f64, beta: f64, eta: f64) -> Result<Arc<ApproxPolynomial>> {
    memo(Key::Q(t.to_bits(), beta.to_bits(), eta.to_bits()), || build_q(t, beta, eta))
}

pub fn cached_s(beta: f64, eta: f64) -> Result<Arc<ApproxPolynomial>> {
    memo(Key::S(beta.to_bits(), eta.to_bits()), || build_s(beta, eta))
}
