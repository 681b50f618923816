//! Process-wide audit counters for the growth laws checked on every
//! blow-up and every derivative-ideal computation. The counters let test
//! suites assert "zero violations across a whole run" without threading a
//! recorder object through every call site.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;

use crate::chart::DataVector;

static BLOWUP_CHECKS: AtomicU64 = AtomicU64::new(0);
static BLOWUP_VIOLATIONS: AtomicU64 = AtomicU64::new(0);
static DERIV_CHECKS: AtomicU64 = AtomicU64::new(0);
static DERIV_VIOLATIONS: AtomicU64 = AtomicU64::new(0);

/// Snapshot of the audit counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditSnapshot {
    pub blowup_checks: u64,
    pub blowup_violations: u64,
    pub derivative_checks: u64,
    pub derivative_violations: u64,
}

pub fn snapshot() -> AuditSnapshot {
    AuditSnapshot {
        blowup_checks: BLOWUP_CHECKS.load(Ordering::SeqCst),
        blowup_violations: BLOWUP_VIOLATIONS.load(Ordering::SeqCst),
        derivative_checks: DERIV_CHECKS.load(Ordering::SeqCst),
        derivative_violations: DERIV_VIOLATIONS.load(Ordering::SeqCst),
    }
}

/// Check the single-blow-up growth laws d' <= (2*d*mu)^(2^(n+2)) and
/// q' <= n*q, recording a violation if either fails.
pub fn record_blowup(before: &DataVector, after: &DataVector) {
    BLOWUP_CHECKS.fetch_add(1, Ordering::SeqCst);
    let base = 2 * before.d.max(1) * before.mu.max(1);
    let exp = 1u64 << (before.n.min(24) + 2);
    let d_bound = BigInt::from(base).pow(exp as u32);
    let d_ok = BigInt::from(after.d) <= d_bound;
    let q_ok = after.q <= before.n.max(1) * before.q;
    if !d_ok || !q_ok {
        BLOWUP_VIOLATIONS.fetch_add(1, Ordering::SeqCst);
    }
}

/// Check the derivative-ideal degree law: output degree <= d1 + n*(d2 - 1),
/// where d1 bounds the generator degrees and d2 the derivation-coefficient
/// degrees.
pub fn record_derivative(d1: u64, d2: u64, n: u64, observed: u64) {
    DERIV_CHECKS.fetch_add(1, Ordering::SeqCst);
    let bound = d1 + n * d2.saturating_sub(1);
    if observed > bound {
        DERIV_VIOLATIONS.fetch_add(1, Ordering::SeqCst);
    }
}
