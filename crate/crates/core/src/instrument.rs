//! Ground-truth-aware trace auditing.
//!
//! The audit replays a finished trace against the world that generated it,
//! maintaining the knowledge counters
//!
//! - `c_i^t`: user types that rated item `i` strictly before step `t`,
//! - `d_u^t`: item types user `u` rated strictly before step `t`,
//!
//! and classifying every recommendation into one of four disjoint
//! bad-recommendation categories (or none):
//!
//! - `B1`: `c < s_I` and `d < s_U`,
//! - `B2`: `c < s_I`, `d >= s_U`, and no user of the same type rated the
//!   item before,
//! - `B3`: `c >= s_I`, `d < s_U`, and the user never rated this item type
//!   before,
//! - `B4`: `c >= s_I`, `d >= s_U`, and the (user type, item type) pair was
//!   never seen before.
//!
//! Steps are simultaneous: every classification at step `t` uses only
//! state from steps before `t`.
//!
//! This module is a measurement tool. It reads hidden types, so nothing in
//! it may ever feed back into an algorithm.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::algorithm::{ItemClusters, Partition, Trace};
use crate::math::sqrt;
use crate::model::{ItemId, LatentWorld};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstrumentError {
    #[error("trace references {what} inconsistent with the world")]
    WorldMismatch { what: &'static str },
    #[error("counting constraint {index} violated: lhs={lhs} rhs={rhs}")]
    ConstraintViolated { index: usize, lhs: i128, rhs: i128 },
}

/// Aggregates of one audited trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStats {
    pub n_users: usize,
    pub horizon: u64,
    pub s_i: u32,
    pub s_u: u32,
    /// Final `c_i^{T+1}` per item seen in the trace.
    pub c_final: BTreeMap<ItemId, u32>,
    /// Final `d_u^{T+1}` per user.
    pub d_final: Vec<u32>,
    /// Events per category `B1..B4`.
    pub bad_counts: [u64; 4],
    /// Disliked events per category `B1..B4`.
    pub bad_dislikes: [u64; 4],
    /// Items with `c >= s_I`.
    pub i_strong: u64,
    /// Sum of final `c` over items with `0 < c < s_I`.
    pub i_weak_mass: u64,
    /// Items rated at least once.
    pub i_total: u64,
    /// Users with final `d < s_U` (numerator of the weak-user fraction;
    /// kept as an exact count so constraint checks stay integral).
    pub u_weak_count: u64,
    /// `gamma_* = min_u d_u^{T+1}`.
    pub gamma_star: u32,
    /// `pi_* =` maximum number of users of any one type.
    pub pi_star: u64,
    /// Times a new user type rates an item while fewer than `s_I` types
    /// have rated it, counted sequentially within each step; equals
    /// `I_strong * s_I + I_weak_mass` exactly (the counting identity behind
    /// the first constraint) and never exceeds `B1 + B2`.
    pub first_type_lowc: u64,
}

impl TraceStats {
    pub fn bad_total(&self) -> u64 {
        self.bad_counts.iter().sum()
    }
}

/// Replay `trace` against `world`, computing counters and classifying
/// every recommendation.
pub fn audit(
    trace: &Trace,
    world: &LatentWorld,
    s_i: u32,
    s_u: u32,
) -> Result<TraceStats, InstrumentError> {
    let n = trace.n_users;
    if n != world.config.n_users {
        return Err(InstrumentError::WorldMismatch { what: "user count" });
    }
    let q_u = world.config.n_user_types;
    let q_i = world.config.n_item_types;

    let user_ty: Vec<usize> = world.user_types().to_vec();
    let item_ty = |i: ItemId| -> Result<usize, InstrumentError> {
        world
            .item_type_get(i)
            .ok_or(InstrumentError::WorldMismatch { what: "item type" })
    };

    // Knowledge state, strictly-before-t views.
    let mut types_rated_item: BTreeMap<ItemId, BTreeSet<usize>> = BTreeMap::new();
    let mut item_types_rated_by: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); n];
    let mut pair_seen = alloc::vec![false; q_u * q_i];

    let mut bad_counts = [0u64; 4];
    let mut bad_dislikes = [0u64; 4];
    let mut first_type_lowc = 0u64;

    let mut idx = 0usize;
    while idx < trace.rows.len() {
        let t = trace.rows[idx].t;
        let step_rows = &trace.rows[idx..];
        let step_len = step_rows.iter().take_while(|r| r.t == t).count();
        let step = &step_rows[..step_len];
        if step.len() != n {
            return Err(InstrumentError::WorldMismatch {
                what: "step row count",
            });
        }

        // Classify against pre-step state.
        for row in step {
            if row.user >= n {
                return Err(InstrumentError::WorldMismatch { what: "user id" });
            }
            let w = user_ty[row.user];
            let j = item_ty(row.item)?;
            let c = types_rated_item
                .get(&row.item)
                .map_or(0, |s| s.len() as u32);
            let d = item_types_rated_by[row.user].len() as u32;
            let type_rated_item_before = types_rated_item
                .get(&row.item)
                .is_some_and(|s| s.contains(&w));
            let user_rated_type_before = item_types_rated_by[row.user].contains(&j);
            let pair = pair_seen[w * q_i + j];

            let category = if c < s_i && d < s_u {
                Some(0)
            } else if c < s_i && d >= s_u && !type_rated_item_before {
                Some(1)
            } else if c >= s_i && d < s_u && !user_rated_type_before {
                Some(2)
            } else if c >= s_i && d >= s_u && !pair {
                Some(3)
            } else {
                None
            };
            if let Some(b) = category {
                bad_counts[b] += 1;
                if row.rating == -1 {
                    bad_dislikes[b] += 1;
                }
            }
        }

        // Apply the step. The first-type-while-weak identity is counted
        // here, sequentially: simultaneous ratings of one item would
        // otherwise all see the frozen pre-step count and overshoot the
        // exact identity `I_strong * s_I + I_weak`.
        for row in step {
            let w = user_ty[row.user];
            let j = item_ty(row.item)?;
            let types = types_rated_item.entry(row.item).or_default();
            if (types.len() as u32) < s_i && !types.contains(&w) {
                first_type_lowc += 1;
            }
            types.insert(w);
            item_types_rated_by[row.user].insert(j);
            pair_seen[w * q_i + j] = true;
        }
        idx += step_len;
    }

    let c_final: BTreeMap<ItemId, u32> = types_rated_item
        .iter()
        .map(|(&i, s)| (i, s.len() as u32))
        .collect();
    let d_final: Vec<u32> = item_types_rated_by
        .iter()
        .map(|s| s.len() as u32)
        .collect();

    let i_strong = c_final.values().filter(|&&c| c >= s_i).count() as u64;
    let i_weak_mass: u64 = c_final
        .values()
        .filter(|&&c| c > 0 && c < s_i)
        .map(|&c| c as u64)
        .sum();
    let i_total = c_final.values().filter(|&&c| c > 0).count() as u64;
    let u_weak_count = d_final.iter().filter(|&&d| d < s_u).count() as u64;
    let gamma_star = d_final.iter().copied().min().unwrap_or(0);

    Ok(TraceStats {
        n_users: n,
        horizon: trace.horizon(),
        s_i,
        s_u,
        c_final,
        d_final,
        bad_counts,
        bad_dislikes,
        i_strong,
        i_weak_mass,
        i_total,
        u_weak_count,
        gamma_star,
        pi_star: world.max_type_multiplicity() as u64,
        first_type_lowc,
    })
}

/// One counting constraint: both sides as exact integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintCheck {
    pub index: usize,
    pub lhs: i128,
    pub rhs: i128,
    pub holds: bool,
}

/// The five deterministic counting constraints on a trace's bad events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintReport {
    pub checks: [ConstraintCheck; 5],
}

impl ConstraintReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn first_violation(&self) -> Option<InstrumentError> {
        self.checks.iter().find(|c| !c.holds).map(|c| {
            InstrumentError::ConstraintViolated {
                index: c.index,
                lhs: c.lhs,
                rhs: c.rhs,
            }
        })
    }
}

/// Check, exactly in integers (the weak-user fraction and `pi_*` ratio are
/// cleared of denominators first):
///
/// 1. `B1 + B2 >= I_strong * s_I + I_weak >= I_total`
/// 2. `B1 + B3 >= (N - U_weak) * s_U`
/// 3. `B1 + B3 >= U_weak * gamma_*`
/// 4. `bad * pi_* >= gamma_* * N`
/// 5. `bad >= T*N - I_strong*(N - s_I) - I_weak*(pi_* - 1)`
///
/// These hold for every algorithm and every trace; a violation is an
/// implementation bug, not a model event.
pub fn verify_constraints(
    stats: &TraceStats,
    horizon: u64,
    n_users: usize,
    s_i: u32,
    s_u: u32,
) -> ConstraintReport {
    let n = n_users as i128;
    let t = horizon as i128;
    let s_i = s_i as i128;
    let s_u = s_u as i128;
    let b1 = stats.bad_counts[0] as i128;
    let b2 = stats.bad_counts[1] as i128;
    let b3 = stats.bad_counts[2] as i128;
    let bad = stats.bad_total() as i128;
    let i_strong = stats.i_strong as i128;
    let i_weak = stats.i_weak_mass as i128;
    let i_total = stats.i_total as i128;
    let u_weak = stats.u_weak_count as i128;
    let gamma = stats.gamma_star as i128;
    let pi = stats.pi_star as i128;

    let mid = i_strong * s_i + i_weak;
    // The trailing `mid >= I_total` leg presumes s_I >= 1; at s_I = 0 the
    // strong/weak split degenerates (every rated item counts as strong
    // with zero required bad events) and only the first leg is claimed.
    let c1 = ConstraintCheck {
        index: 1,
        lhs: b1 + b2,
        rhs: mid,
        holds: b1 + b2 >= mid && (s_i == 0 || mid >= i_total),
    };
    let c2 = ConstraintCheck {
        index: 2,
        lhs: b1 + b3,
        rhs: (n - u_weak) * s_u,
        holds: b1 + b3 >= (n - u_weak) * s_u,
    };
    let c3 = ConstraintCheck {
        index: 3,
        lhs: b1 + b3,
        rhs: u_weak * gamma,
        holds: b1 + b3 >= u_weak * gamma,
    };
    let c4 = ConstraintCheck {
        index: 4,
        lhs: bad * pi,
        rhs: gamma * n,
        holds: bad * pi >= gamma * n,
    };
    let rhs5 = t * n - i_strong * (n - s_i) - i_weak * (pi - 1);
    let c5 = ConstraintCheck {
        index: 5,
        lhs: bad,
        rhs: rhs5,
        holds: bad >= rhs5,
    };
    ConstraintReport {
        checks: [c1, c2, c3, c4, c5],
    }
}

/// Dislike rate of one bad-event category; `rate` is `None` when the
/// category never fired.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryRate {
    pub events: u64,
    pub dislikes: u64,
    pub rate: Option<f64>,
    /// Binomial standard error of the rate; `None` with the rate.
    pub stderr: Option<f64>,
}

/// Per-category dislike rates over one or more audited traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadRates {
    pub categories: [CategoryRate; 4],
}

pub fn empirical_bad_fraction<'a>(
    runs: impl IntoIterator<Item = (&'a Trace, &'a LatentWorld)>,
    s_i: u32,
    s_u: u32,
) -> Result<BadRates, InstrumentError> {
    let mut events = [0u64; 4];
    let mut dislikes = [0u64; 4];
    for (trace, world) in runs {
        let stats = audit(trace, world, s_i, s_u)?;
        for b in 0..4 {
            events[b] += stats.bad_counts[b];
            dislikes[b] += stats.bad_dislikes[b];
        }
    }
    Ok(BadRates {
        categories: core::array::from_fn(|b| rate_of(events[b], dislikes[b])),
    })
}

/// Aggregate already-computed audits into per-category rates.
pub fn aggregate_bad_rates(stats: &[TraceStats]) -> BadRates {
    let mut events = [0u64; 4];
    let mut dislikes = [0u64; 4];
    for s in stats {
        for b in 0..4 {
            events[b] += s.bad_counts[b];
            dislikes[b] += s.bad_dislikes[b];
        }
    }
    BadRates {
        categories: core::array::from_fn(|b| rate_of(events[b], dislikes[b])),
    }
}

fn rate_of(events: u64, dislikes: u64) -> CategoryRate {
    if events == 0 {
        return CategoryRate {
            events,
            dislikes,
            rate: None,
            stderr: None,
        };
    }
    let p = dislikes as f64 / events as f64;
    CategoryRate {
        events,
        dislikes,
        rate: Some(p),
        stderr: Some(sqrt(p * (1.0 - p) / events as f64)),
    }
}

/// Ground-truth purity: no cluster contains two users of different types.
pub fn partition_is_pure(partition: &Partition, world: &LatentWorld) -> bool {
    partition.clusters.iter().all(|members| {
        members
            .windows(2)
            .all(|w| world.user_types()[w[0]] == world.user_types()[w[1]])
    })
}

/// Explored items placed into some cluster whose representative has a
/// different true type (the per-item misclassification event).
pub fn misclassified_items(clusters: &ItemClusters, world: &LatentWorld) -> BTreeSet<ItemId> {
    let mut out = BTreeSet::new();
    for (k, members) in clusters.members.iter().enumerate() {
        let rep = clusters.reps[k];
        let rep_ty = world.item_type_get(rep);
        for &i in members {
            if i != rep && world.item_type_get(i) != rep_ty {
                out.insert(i);
            }
        }
    }
    out
}
