//! Closed-form evaluation of the model's regret curves, thresholds, lower
//! bounds, regime classification, and heuristic cost optimizer.
//!
//! All logarithms are base 2. Curves are reported unscaled (no universal
//! constants applied); callers that compare empirical data against them fit
//! a single constant instead.

use alloc::vec::Vec;

use crate::math::{ceil_u64, floor_plus, log2, powf, sqrt};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error("no unique regime row matches T={t} ({matches} rows match)")]
    AmbiguousRegime { t: u64, matches: usize },
}

/// Operating regimes of the optimal regret curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Cold,
    Item,
    User,
    Hybrid,
    Asymptotic,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Cold => "cold",
            Regime::Item => "item",
            Regime::User => "user",
            Regime::Hybrid => "hybrid",
            Regime::Asymptotic => "asymptotic",
        }
    }
}

/// `r_U = ceil(2 log2(N q_U^2))`: comparisons needed to cluster users.
pub fn r_user(n: u64, q_u: u64) -> u64 {
    let x = n as f64 * q_u as f64 * q_u as f64;
    ceil_u64(2.0 * log2(x))
}

/// `r_I = ceil(2 log2(N q_I))`: comparisons needed to cluster items.
pub fn r_item(n: u64, q_i: u64) -> u64 {
    ceil_u64(2.0 * log2(n as f64 * q_i as f64))
}

/// `k_Item(T) = 16 log2 T + 2 sqrt(q_I r_I T / N)`.
pub fn k_item(n: u64, q_i: u64, t: u64) -> f64 {
    let r_i = r_item(n, q_i) as f64;
    16.0 * log2(t as f64) + 2.0 * sqrt(q_i as f64 * r_i * t as f64 / n as f64)
}

/// `k_Hybrid(T) = 8 r_U + 2 sqrt(r_I q_I T / q_U)`.
pub fn k_hybrid(n: u64, q_u: u64, q_i: u64, t: u64) -> f64 {
    let r_u = r_user(n, q_u) as f64;
    let r_i = r_item(n, q_i) as f64;
    8.0 * r_u + 2.0 * sqrt(r_i * q_i as f64 * t as f64 / q_u as f64)
}

/// Every threshold and scale constant the curves depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    pub t5: f64,
    pub s_u: u32,
    pub s_i: u32,
    pub eta: f64,
    pub r_u: u64,
    pub r_i: u64,
    /// Largest integer T with `k_Item(T) <= r_U`; 0 when none.
    pub t_item: u64,
    /// Largest integer T with `k_Hybrid(T) <= q_I / 3`; 0 when none.
    pub t_hybrid: u64,
}

/// Largest integer `t >= 1` with `f(t) <= cap`, for nondecreasing `f`.
/// Returns 0 when even `f(1) > cap`. Exponential bracket + bisection.
fn max_t_below(cap: f64, f: impl Fn(u64) -> f64) -> u64 {
    if f(1) > cap {
        return 0;
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while f(hi) <= cap {
        lo = hi;
        if hi >= 1 << 50 {
            return hi;
        }
        hi *= 2;
    }
    // Invariant: f(lo) <= cap < f(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) <= cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Clamped log2(log2(x)): 0 whenever `x <= 2`.
fn loglog2(x: f64) -> f64 {
    if x <= 2.0 {
        0.0
    } else {
        log2(log2(x))
    }
}

/// `s_U` of the regularity thresholds: `floor_+(log2 q_U - loglog q_I - loglog N - 12)`.
pub fn s_user(n: u64, q_u: u64, q_i: u64) -> u32 {
    floor_plus(log2(q_u as f64) - loglog2(q_i as f64) - loglog2(n as f64) - 12.0)
}

/// `s_I` of the regularity thresholds: `floor_+(0.99 log2 q_I - 4 loglog N - 12)`.
pub fn s_item(n: u64, q_i: u64) -> u32 {
    floor_plus(0.99 * log2(q_i as f64) - 4.0 * loglog2(n as f64) - 12.0)
}

pub fn thresholds(n: u64, q_u: u64, q_i: u64) -> Thresholds {
    let (nf, qu, qi) = (n as f64, q_u as f64, q_i as f64);
    let r_u = r_user(n, q_u);
    let r_i = r_item(n, q_i);
    Thresholds {
        t1: log2(qu),
        t2: qi / nf,
        t3: qi / qu,
        t4: nf * log2(qu) * log2(qu) / qi,
        t5: qi * qu,
        s_u: s_user(n, q_u, q_i),
        s_i: s_item(n, q_i),
        eta: 1.0 / 13.0,
        r_u,
        r_i,
        t_item: max_t_below(r_u as f64, |t| k_item(n, q_i, t)),
        t_hybrid: max_t_below(qi / 3.0, |t| k_hybrid(n, q_u, q_i, t)),
    }
}

/// The optimal-regret table row matching `(N, q_U, q_I, T)`: value and
/// regime label. Rows are matched literally by their printed range and
/// condition; zero or multiple matches surface as an error.
pub fn regret_curve_r(n: u64, q_u: u64, q_i: u64, t: u64) -> Result<(f64, Regime), TheoryError> {
    let th = thresholds(n, q_u, q_i);
    let (nf, qu, qi) = (n as f64, q_u as f64, q_i as f64);
    let (lqu, lqi) = (log2(qu), log2(qi));
    let tf = t as f64;

    let item_first = th.t2 <= th.t1; // T2 <= T1
    let user_first = th.t1 < th.t2; // T1 < T2
    let structured = lqi <= qu; // log q_I <= q_U

    let mut matches: Vec<(f64, Regime)> = Vec::new();
    // Cold: [1, min{T1, T2}]
    if tf <= th.t1.min(th.t2) {
        matches.push((tf, Regime::Cold));
    }
    // Item: (T2, T4], needs T2 <= T1
    if item_first && th.t2 < tf && tf <= th.t4 {
        matches.push((1.0 + sqrt(qi * tf / nf), Regime::Item));
    }
    // User: (T1, T3], needs T1 < T2 and log q_I <= q_U
    if user_first && structured && th.t1 < tf && tf <= th.t3 {
        matches.push((lqu + qu * tf / nf, Regime::User));
    }
    // Hybrid: (T3, T5] under T1 < T2, or (T4, T5] under T2 <= T1;
    // both also need log q_I <= q_U.
    let hybrid_range = (user_first && th.t3 < tf && tf <= th.t5)
        || (item_first && th.t4 < tf && tf <= th.t5);
    if structured && hybrid_range {
        matches.push((lqu + sqrt(qi * qu * tf) / nf, Regime::Hybrid));
    }
    // Asymptotic, three printed variants.
    if structured && tf > th.t5 {
        matches.push((lqu + qi * qu / nf + lqi * tf / nf, Regime::Asymptotic));
    }
    if !structured && user_first && tf > th.t1 {
        matches.push((lqu + qu * tf / nf, Regime::Asymptotic));
    }
    if !structured && item_first && tf > th.t4 {
        matches.push((lqu + qu * tf / nf, Regime::Asymptotic));
    }

    match matches.len() {
        1 => Ok(matches[0]),
        m => Err(TheoryError::AmbiguousRegime { t, matches: m }),
    }
}

/// The algorithm's guarantee curves `(R_U(T), R_I(T))`.
pub fn upper_curves(n: u64, q_u: u64, q_i: u64, t: u64) -> (f64, f64) {
    let th = thresholds(n, q_u, q_i);
    upper_curves_with(&th, n, q_u, q_i, t)
}

/// Same as [`upper_curves`] with precomputed thresholds.
pub fn upper_curves_with(th: &Thresholds, n: u64, q_u: u64, q_i: u64, t: u64) -> (f64, f64) {
    let (nf, qu, qi) = (n as f64, q_u as f64, q_i as f64);
    let (r_u, r_i) = (th.r_u as f64, th.r_i as f64);
    let tf = t as f64;
    let reg_u = r_u + qu * tf / nf;
    let reg_i = if t < th.t_item {
        log2(tf) + sqrt(qi * r_i * tf / nf)
    } else if t < th.t_hybrid {
        r_u + sqrt(qi * qu * r_i * tf) / nf
    } else {
        r_u + qu / nf * qi * log2(nf * qi) + r_i * tf / nf
    };
    (reg_u, reg_i)
}

/// Six-term information-theoretic lower bound on per-user regret
/// (unscaled: the true bound carries an unspecified universal constant).
/// The value is cross-checked against the gamma-minimax it was derived
/// from.
pub fn lower_bound(n: u64, q_u: u64, q_i: u64, t: u64) -> f64 {
    let closed = lower_bound_closed(n, q_u, q_i, t);
    let grid = minimax_bad_lower(n, q_u, q_i, t) / n as f64;
    // The closed form is the analytic evaluation of the minimax plus the
    // trivial per-user floor, so it must dominate the grid optimum up to
    // a bounded constant. A breach means a broken formula.
    debug_assert!(
        64.0 * closed >= grid,
        "closed form fails to dominate minimax: closed={closed} grid={grid}"
    );
    closed
}

/// The six-term max of the closed-form lower bound, divided by N.
pub fn lower_bound_closed(n: u64, q_u: u64, q_i: u64, t: u64) -> f64 {
    let (nf, qu, qi, tf) = (n as f64, q_u as f64, q_i as f64, t as f64);
    let s_u = s_user(n, q_u, q_i) as f64;
    let s_i = s_item(n, q_i) as f64;
    let lqi = log2(qi).max(1.0);
    let terms = [
        nf,
        (nf * tf).min(nf * s_u).min(sqrt(qi)),
        (qu * tf).min(sqrt(qi)),
        (nf * tf / lqi).min(sqrt(tf * qi * nf)).min(nf * s_u),
        (qu * tf / lqi).min(sqrt(tf * qi * qu)),
        (tf * s_i).min(tf * qu),
    ];
    terms.iter().fold(f64::MIN, |a, &b| a.max(b)) / nf
}

/// Bad-recommendation minimax `min_{gamma >= 1} max{f1, f2, f3}` evaluated
/// by a geometric grid plus local refinement (total count, not per-user).
pub fn minimax_bad_lower(n: u64, q_u: u64, q_i: u64, t: u64) -> f64 {
    let (nf, qu, qi, tf) = (n as f64, q_u as f64, q_i as f64, t as f64);
    let s_u = s_user(n, q_u, q_i) as f64;
    let s_i = s_item(n, q_i) as f64;
    let lqi = log2(qi).max(1.0);

    let objective = |gamma: f64| -> f64 {
        let f1 = if gamma < tf / (8.0 * lqi) {
            tf * qi / gamma
        } else {
            sqrt(qi)
        };
        let f2 = (qu * gamma).max(nf * s_u.min(gamma));
        let f3 = tf * s_i.min(qu);
        f1.max(f2).max(f3)
    };

    let hi = (tf.max(qi) * 2.0).max(2.0);
    let mut best = f64::MAX;
    let mut best_g = 1.0;
    let steps = 512;
    for k in 0..=steps {
        let g = powf(hi, k as f64 / steps as f64); // 1..hi geometric
        let v = objective(g);
        if v < best {
            best = v;
            best_g = g;
        }
    }
    // Local refinement around the grid winner.
    let mut lo = (best_g / 2.0).max(1.0);
    let mut up = best_g * 2.0;
    for _ in 0..60 {
        let m1 = lo + (up - lo) / 3.0;
        let m2 = up - (up - lo) / 3.0;
        let (v1, v2) = (objective(m1), objective(m2));
        if v1 < best {
            best = v1;
        }
        if v2 < best {
            best = v2;
        }
        if v1 <= v2 {
            up = m2;
        } else {
            lo = m1;
        }
    }
    best
}

/// Heuristic-optimizer regimes: which exploration pathway the approximate
/// cost model selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicRegime {
    /// User-user: cluster users, representatives only.
    S1,
    /// Hybrid, partially-learned item space.
    S2,
    /// Hybrid, fully-learned item space.
    S3,
    /// Item-item, partially-learned item space.
    S4,
    /// Item-item, fully-learned item space.
    S5,
}

impl HeuristicRegime {
    pub fn name(self) -> &'static str {
        match self {
            HeuristicRegime::S1 => "S1",
            HeuristicRegime::S2 => "S2",
            HeuristicRegime::S3 => "S3",
            HeuristicRegime::S4 => "S4",
            HeuristicRegime::S5 => "S5",
        }
    }
}

/// Output of [`heuristic_params`]: optimal budgets, the regime they come
/// from, and the per-user cost value `min{f, g}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicChoice {
    pub i_usr: u64,
    pub i_rep: u64,
    pub i_exp: u64,
    pub regime: HeuristicRegime,
    pub cost: f64,
}

/// Approximate cost-model optimizer: evaluates the user-side cost `f` and
/// item-side cost `g`, returns the cheaper regime with its closed-form
/// optimal budgets. Real-valued budgets are rounded up; negative ones
/// clamp to zero.
pub fn heuristic_params(n: u64, t: u64, q_u: u64, q_i: u64) -> HeuristicChoice {
    let (nf, qu, qi, tf) = (n as f64, q_u as f64, q_i as f64, t as f64);
    let r_u = r_user(n, q_u) as f64;
    // r_I is a divisor below; it is 0 only for the degenerate 1x1 model.
    let r_i = (r_item(n, q_i) as f64).max(1.0);

    // f: use user structure (I_usr = r_U), three T ranges.
    let (f_val, f_regime, f_rep, f_exp) = if tf <= qi * r_i / qu || qu <= r_i {
        (r_u / 2.0 + qu * tf / nf, HeuristicRegime::S1, 2.0 * tf, 0.0)
    } else if tf <= qi * qu / r_i {
        (
            r_u / 2.0 + 2.0 / nf * sqrt(qu * qi * r_i * tf) - qi * r_i / nf,
            HeuristicRegime::S2,
            2.0 * sqrt(tf * qi * r_i / qu),
            2.0 * sqrt(tf * qi * qu / r_i) - 2.0 * qi,
        )
    } else {
        (
            r_u / 2.0 + qi / nf * (qu - r_i) + r_i * tf / nf,
            HeuristicRegime::S3,
            2.0 * qi,
            2.0 * tf - 2.0 * qi,
        )
    };

    // g: ignore user structure (I_usr = 0), two T ranges.
    let (g_val, g_regime, g_rep, g_exp) = if tf <= qi * nf / r_i {
        (
            2.0 * sqrt(qi * r_i * tf / nf),
            HeuristicRegime::S4,
            2.0 * sqrt(qi * r_i * tf / nf),
            2.0 * sqrt(qi * tf * nf / r_i),
        )
    } else {
        (
            qi + r_i * tf / nf,
            HeuristicRegime::S5,
            2.0 * qi,
            2.0 * tf,
        )
    };

    if f_val <= g_val {
        HeuristicChoice {
            i_usr: r_u as u64,
            i_rep: ceil_u64(f_rep),
            i_exp: ceil_u64(f_exp),
            regime: f_regime,
            cost: f_val,
        }
    } else {
        HeuristicChoice {
            i_usr: 0,
            i_rep: ceil_u64(g_rep),
            i_exp: ceil_u64(g_exp),
            regime: g_regime,
            cost: g_val,
        }
    }
}

/// The exploration cost model the heuristic optimizer minimizes, already
/// reduced over `I_usr in {0, r_U}` and with `I_exp` at its optimum:
/// `2N * regret` as a function of `I_rep`, using `ell = min{I_rep/2, q_I}`.
/// Exposed so oracles can grid-search it.
pub fn heuristic_cost_at(n: u64, t: u64, q_u: u64, q_i: u64, i_rep: f64) -> f64 {
    let (nf, qu, qi, tf) = (n as f64, q_u as f64, q_i as f64, t as f64);
    let r_u = r_user(n, q_u) as f64;
    let r_i = (r_item(n, q_i) as f64).max(1.0);
    let ell = (i_rep / 2.0).min(qi).max(f64::MIN_POSITIVE);
    let clustered =
        nf * r_u + i_rep * qu + 2.0 * qi * r_i / ell * (tf - i_rep / 2.0).max(0.0);
    let unclustered = i_rep * nf + 2.0 * qi * r_i / ell * tf;
    clustered.min(unclustered)
}

/// Cold-start bounds `(upper, lower)` for the optimal algorithm and for
/// any algorithm.
pub fn coldstart_bounds(n: u64, q_u: u64, q_i: u64) -> (f64, f64) {
    let (nf, qu, qi) = (n as f64, q_u as f64, q_i as f64);
    let (ln, lqu, lqi) = (log2(nf), log2(qu), log2(qi));
    let lnqi = log2(nf * qi);
    let upper = (ln * ln).min((qi * lqi / nf * lnqi * lnqi).max(16.0));
    let lower = (ln * lqu).min((qi * lqi * lqi / nf).max(16.0));
    (upper, lower)
}

/// Model and lower-bound assumptions, reported by name when violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    MinUsers,
    UsersVsUserTypes,
    UserTypesVsLogN,
    ItemTypesVsLogN,
    UserTypesVsLogItemTypesSq,
    ItemTypesVsLogNFifth,
}

impl Assumption {
    pub fn name(self) -> &'static str {
        match self {
            Assumption::MinUsers => "N>100",
            Assumption::UsersVsUserTypes => "N>20*q_U*log2(q_U)^2",
            Assumption::UserTypesVsLogN => "q_U>100*log2(N)",
            Assumption::ItemTypesVsLogN => "q_I>100*log2(N)",
            Assumption::UserTypesVsLogItemTypesSq => "q_U>log2(q_I)^2",
            Assumption::ItemTypesVsLogNFifth => "q_I>log2(N)^5",
        }
    }
}

/// Violated assumptions for `(N, q_U, q_I)`; empty means every inequality
/// holds.
pub fn check_assumptions(n: u64, q_u: u64, q_i: u64) -> Vec<Assumption> {
    let (nf, qu, qi) = (n as f64, q_u as f64, q_i as f64);
    let (ln, lqu, lqi) = (log2(nf), log2(qu), log2(qi));
    let mut out = Vec::new();
    if nf <= 100.0 {
        out.push(Assumption::MinUsers);
    }
    if nf <= 20.0 * qu * lqu * lqu {
        out.push(Assumption::UsersVsUserTypes);
    }
    if qu <= 100.0 * ln {
        out.push(Assumption::UserTypesVsLogN);
    }
    if qi <= 100.0 * ln {
        out.push(Assumption::ItemTypesVsLogN);
    }
    if qu <= lqi * lqi {
        out.push(Assumption::UserTypesVsLogItemTypesSq);
    }
    if qi <= powf(ln, 5.0) {
        out.push(Assumption::ItemTypesVsLogNFifth);
    }
    out
}

/// One evaluated point of every theoretical curve at horizon `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryPoint {
    pub t: u64,
    pub r: f64,
    pub regime: Regime,
    pub r_u_curve: f64,
    pub r_i_curve: f64,
    pub lower: f64,
    pub violations: Vec<Assumption>,
}

pub fn theory_point(n: u64, q_u: u64, q_i: u64, t: u64) -> Result<TheoryPoint, TheoryError> {
    let (r, regime) = regret_curve_r(n, q_u, q_i, t)?;
    let (r_u_curve, r_i_curve) = upper_curves(n, q_u, q_i, t);
    Ok(TheoryPoint {
        t,
        r,
        regime,
        r_u_curve,
        r_i_curve,
        lower: lower_bound(n, q_u, q_i, t),
        violations: check_assumptions(n, q_u, q_i),
    })
}
