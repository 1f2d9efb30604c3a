//! The clustering-based recommendation algorithm, its parameter selection,
//! baselines, and the anytime (doubling) wrapper.
//!
//! A fixed-horizon run has two phases. Explore clusters the users by their
//! feedback on a shared item set, learns each user cluster's preference for
//! a set of representative items, and optionally clusters further items
//! around those representatives. Exploit then feeds every user unseen items
//! from their exploitation set, falling back to fresh items when the set
//! runs dry. All scheduling is deterministic given the algorithm seed; the
//! only random draw is the user permutation used to assign raters during
//! item clustering.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::math::{ceil_div, ceil_u64, log2};
use crate::model::{
    generate_world, Environment, ItemId, LatentWorld, ModelConfig, ModelError, Rating, UserId,
};
use crate::rng::Stream;
use crate::theory;

/// Strategy selector for [`run`] and [`run_anytime`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyTag {
    /// Full algorithm with parameters from [`select_params`].
    Recsys,
    /// Fresh item to every user at every step; never reads feedback.
    Random,
    /// Force the no-item-clustering parameter set.
    UserUser,
    /// Item-clustering parameter set with user clustering disabled; a
    /// derived baseline mirroring the item-item regimes of the cost model.
    ItemItem,
    /// Budgets from the approximate cost-model optimizer.
    Heuristic,
}

impl StrategyTag {
    pub const ALL: [StrategyTag; 5] = [
        StrategyTag::Recsys,
        StrategyTag::Random,
        StrategyTag::UserUser,
        StrategyTag::ItemItem,
        StrategyTag::Heuristic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyTag::Recsys => "recsys",
            StrategyTag::Random => "random",
            StrategyTag::UserUser => "useruser",
            StrategyTag::ItemItem => "itemitem",
            StrategyTag::Heuristic => "heuristic",
        }
    }
}

impl core::str::FromStr for StrategyTag {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "recsys" => Ok(StrategyTag::Recsys),
            "random" => Ok(StrategyTag::Random),
            "useruser" => Ok(StrategyTag::UserUser),
            "itemitem" => Ok(StrategyTag::ItemItem),
            "heuristic" => Ok(StrategyTag::Heuristic),
            other => Err(ModelError::BadSnapshot(alloc::format!(
                "unknown strategy `{other}`"
            ))),
        }
    }
}

/// Exploration budgets plus the regime flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgParams {
    pub r_u: u64,
    pub r_i: u64,
    pub i_usr: u64,
    pub i_rep: u64,
    pub i_exp: u64,
    /// Target number of item types to learn; clamped to `[1, q_I]`.
    pub ell: f64,
    pub item_clust: bool,
}

/// The `ell` three-branch rule, clamped to `[1, q_I]`.
fn ell_rule(n: u64, q_u: u64, q_i: u64, t: u64) -> f64 {
    let r_u = theory::r_user(n, q_u) as f64;
    let k_item = theory::k_item(n, q_i, t);
    let raw = if k_item <= r_u {
        k_item
    } else {
        let k_hybrid = theory::k_hybrid(n, q_u, q_i, t);
        if k_hybrid <= q_i as f64 / 3.0 {
            k_hybrid
        } else {
            q_i as f64
        }
    };
    raw.clamp(1.0, q_i as f64)
}

/// Parameter set used when item clustering is off: learn users, explore
/// representatives only.
pub fn no_item_clust_params(n: u64, q_u: u64, q_i: u64, t: u64) -> AlgParams {
    let r_u = theory::r_user(n, q_u);
    let i_rep = 6 * t;
    AlgParams {
        r_u,
        r_i: theory::r_item(n, q_i),
        i_usr: r_u,
        i_rep,
        i_exp: 0,
        ell: (i_rep as f64 / 2.0).min(q_i as f64).max(1.0),
        item_clust: false,
    }
}

/// Parameter set used when item clustering is on.
pub fn item_clust_params(n: u64, q_u: u64, q_i: u64, t: u64) -> AlgParams {
    let r_u = theory::r_user(n, q_u);
    let ell = ell_rule(n, q_u, q_i, t);
    let i_rep = if ell <= q_i as f64 / 3.0 {
        ceil_u64(3.0 * ell)
    } else {
        ceil_u64(q_i as f64 * log2((n * q_i) as f64))
    };
    AlgParams {
        r_u,
        r_i: theory::r_item(n, q_i),
        i_usr: if ell > r_u as f64 { r_u } else { 0 },
        i_rep,
        i_exp: ceil_u64(16.0 * q_i as f64 / ell * t as f64),
        ell,
        item_clust: true,
    }
}

/// Choose between the two parameter sets by comparing the predicted regret
/// curves `R_U(T)` and `R_I(T)`.
pub fn select_params(n: u64, q_u: u64, q_i: u64, t: u64) -> AlgParams {
    let (reg_u, reg_i) = theory::upper_curves(n, q_u, q_i, t);
    if reg_i < reg_u {
        item_clust_params(n, q_u, q_i, t)
    } else {
        no_item_clust_params(n, q_u, q_i, t)
    }
}

/// Budgets from the heuristic cost optimizer, packed as `AlgParams`.
pub fn heuristic_alg_params(n: u64, q_u: u64, q_i: u64, t: u64) -> AlgParams {
    let hc = theory::heuristic_params(n, t, q_u, q_i);
    AlgParams {
        r_u: theory::r_user(n, q_u),
        r_i: theory::r_item(n, q_i),
        i_usr: hc.i_usr,
        i_rep: hc.i_rep,
        i_exp: hc.i_exp,
        ell: (hc.i_rep as f64 / 2.0).min(q_i as f64).max(1.0),
        item_clust: hc.i_exp > 0,
    }
}

/// User clustering output: cluster label per user and the label fibers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub cluster_of: Vec<usize>,
    pub clusters: Vec<Vec<UserId>>,
}

impl Partition {
    /// One user per cluster.
    pub fn trivial(n_users: usize) -> Self {
        Partition {
            cluster_of: (0..n_users).collect(),
            clusters: (0..n_users).map(|u| alloc::vec![u]).collect(),
        }
    }

    fn from_labels(cluster_of: Vec<usize>, n_clusters: usize) -> Self {
        let mut clusters = alloc::vec![Vec::new(); n_clusters];
        for (u, &w) in cluster_of.iter().enumerate() {
            clusters[w].push(u);
        }
        Partition {
            cluster_of,
            clusters,
        }
    }

    pub fn min_cluster_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).min().unwrap_or(0)
    }
}

/// Per-cluster preferences for the representatives: `prefs[w][k]` is the
/// cluster-`w` rating of `reps[k]`.
pub type PrefTable = Vec<Vec<Rating>>;

/// Item clusters around the representatives: `members[k]` is `S_{reps[k]}`
/// and always contains `reps[k]` itself. Clusters may overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemClusters {
    pub reps: Vec<ItemId>,
    pub members: Vec<Vec<ItemId>>,
}

/// Per-user exploitation sets; users in the same cluster get the same set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploitSets {
    pub per_user: Vec<BTreeSet<ItemId>>,
}

/// Which part of the algorithm issued a recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    UserClust,
    FindPrefs,
    ItemClust,
    Exploit,
    Filler,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::UserClust => "usr-clust",
            Phase::FindPrefs => "find-prefs",
            Phase::ItemClust => "item-clust",
            Phase::Exploit => "exploit",
            Phase::Filler => "filler",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    pub t: u64,
    pub user: UserId,
    pub item: ItemId,
    pub rating: Rating,
    pub phase: Phase,
}

/// Full interaction trace: one row per (step, user), grouped by step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub n_users: usize,
    pub rows: Vec<StepRecord>,
}

impl Trace {
    pub fn new(n_users: usize) -> Self {
        Trace {
            n_users,
            rows: Vec::new(),
        }
    }

    pub fn horizon(&self) -> u64 {
        (self.rows.len() / self.n_users) as u64
    }
}

/// Per-user cumulative regret prefix curve: entry `t-1` is
/// `(1/N) * sum_{s<=t} #dislikes at s`.
pub fn regret_of(trace: &Trace) -> Vec<f64> {
    let n = trace.n_users as f64;
    let horizon = trace.horizon() as usize;
    let mut dislikes = alloc::vec![0u64; horizon];
    for row in &trace.rows {
        if row.rating == -1 {
            dislikes[(row.t - 1) as usize] += 1;
        }
    }
    let mut curve = Vec::with_capacity(horizon);
    let mut acc = 0u64;
    for d in dislikes {
        acc += d;
        curve.push(acc as f64 / n);
    }
    curve
}

/// Step driver shared by all phases: enforces the absolute step cap and
/// labels trace rows.
struct Ctx<'a> {
    env: &'a mut Environment,
    trace: &'a mut Trace,
    limit: u64,
}

impl Ctx<'_> {
    fn exhausted(&self) -> bool {
        self.env.t >= self.limit
    }

    fn step(&mut self, recs: &[(ItemId, Phase)]) -> Result<Vec<Rating>, ModelError> {
        debug_assert!(!self.exhausted());
        let items: Vec<ItemId> = recs.iter().map(|&(i, _)| i).collect();
        let ratings = self.env.step(&items)?;
        let t = self.env.t;
        for (u, (&(item, phase), &rating)) in recs.iter().zip(ratings.iter()).enumerate() {
            self.trace.rows.push(StepRecord {
                t,
                user: u,
                item,
                rating,
                phase,
            });
        }
        Ok(ratings)
    }
}

/// Recommend every item in `items` to every user, then group users by
/// exact feedback equality when `items.len() >= r_u`, else return the
/// trivial partition. `Ok(None)` means the step cap was hit mid-phase.
fn user_clustering_in(
    ctx: &mut Ctx<'_>,
    items: &[ItemId],
    r_u: u64,
) -> Result<Option<Partition>, ModelError> {
    let n = ctx.env.n_users();
    let mut feedback = alloc::vec![Vec::with_capacity(items.len()); n];
    for &item in items {
        if ctx.exhausted() {
            return Ok(None);
        }
        let recs = alloc::vec![(item, Phase::UserClust); n];
        let ratings = ctx.step(&recs)?;
        for (u, r) in ratings.into_iter().enumerate() {
            feedback[u].push(r);
        }
    }
    if (items.len() as u64) < r_u {
        return Ok(Some(Partition::trivial(n)));
    }
    // Fewest groups with exact agreement = group by feedback vector.
    // Cluster ids in order of first appearance.
    let mut ids: BTreeMap<Vec<Rating>, usize> = BTreeMap::new();
    let mut cluster_of = Vec::with_capacity(n);
    for fb in feedback {
        let next = ids.len();
        let id = *ids.entry(fb).or_insert(next);
        cluster_of.push(id);
    }
    let k = ids.len();
    Ok(Some(Partition::from_labels(cluster_of, k)))
}

/// Each cluster rates each representative exactly once, via one member per
/// step; finished clusters take fresh filler items until the smallest
/// cluster catches up. Consumes `ceil(I_rep / min_w |P_w|)` steps.
fn find_prefs_in(
    ctx: &mut Ctx<'_>,
    reps: &[ItemId],
    partition: &Partition,
) -> Result<Option<PrefTable>, ModelError> {
    let n = ctx.env.n_users();
    let k = partition.clusters.len();
    let mut prefs: PrefTable = alloc::vec![alloc::vec![0; reps.len()]; k];
    let mut next_rep = alloc::vec![0usize; k];
    while next_rep.iter().any(|&r| r < reps.len()) {
        if ctx.exhausted() {
            return Ok(None);
        }
        // (user, rep index or filler) assignments for this step.
        let mut recs = alloc::vec![(0, Phase::Filler); n];
        let mut assigned: Vec<(UserId, usize)> = Vec::new();
        for (w, members) in partition.clusters.iter().enumerate() {
            for (slot, &u) in members.iter().enumerate() {
                let rep_idx = next_rep[w] + slot;
                if rep_idx < reps.len() {
                    recs[u] = (reps[rep_idx], Phase::FindPrefs);
                    assigned.push((u, rep_idx));
                } else {
                    recs[u] = (0, Phase::Filler); // placeholder, fixed below
                }
            }
            next_rep[w] = (next_rep[w] + members.len()).min(reps.len());
        }
        for rec in recs.iter_mut() {
            if rec.1 == Phase::Filler {
                rec.0 = ctx.env.fresh_item();
            }
        }
        let ratings = ctx.step(&recs)?;
        for (u, rep_idx) in assigned {
            prefs[partition.cluster_of[u]][rep_idx] = ratings[u];
        }
    }
    Ok(Some(prefs))
}

/// Rate every item of `exp` by `r_i` users chosen by the repeated random
/// permutation block scheme, record first-seen-wins cluster preferences,
/// and cluster `exp` around the representatives. Consumes
/// `ceil(I_exp * r_I / N)` steps, padding leftover slots with fresh items.
fn item_clustering_in(
    ctx: &mut Ctx<'_>,
    reps: &[ItemId],
    exp: &[ItemId],
    partition: &Partition,
    prefs: &PrefTable,
    r_i: u64,
    rng: &mut Stream,
) -> Result<Option<ItemClusters>, ModelError> {
    let n = ctx.env.n_users();
    // First rating seen per (item, cluster); later contradictions (possible
    // only under a clustering error) are ignored.
    let mut cluster_pref: BTreeMap<ItemId, BTreeMap<usize, Rating>> = BTreeMap::new();

    if !exp.is_empty() && r_i > 0 {
        let mut perm: Vec<UserId> = (0..n).collect();
        rng.shuffle(&mut perm);
        let total_slots = exp.len() as u64 * r_i;
        let steps = ceil_div(total_slots, n as u64);
        for s in 0..steps {
            if ctx.exhausted() {
                return Ok(None);
            }
            let mut recs: Vec<(ItemId, Phase)> = Vec::with_capacity(n);
            let mut raters: Vec<(UserId, ItemId)> = Vec::new();
            for offset in 0..n as u64 {
                let pos = s * n as u64 + offset;
                let u = perm[(pos % n as u64) as usize];
                let item_idx = (pos / r_i) as usize;
                if item_idx < exp.len() && !ctx.env.history.has_rated(u, exp[item_idx]) {
                    recs.push((exp[item_idx], Phase::ItemClust));
                    raters.push((u, exp[item_idx]));
                } else {
                    // Padding, or a duplicate rater slot when r_I exceeds a
                    // full pass over the permutation.
                    recs.push((ctx.env.fresh_item(), Phase::Filler));
                }
            }
            // recs above are ordered by position; reorder per user id.
            let mut per_user = alloc::vec![(0u64, Phase::Filler); n];
            for (offset, rec) in recs.into_iter().enumerate() {
                let pos = s * n as u64 + offset as u64;
                per_user[perm[(pos % n as u64) as usize]] = rec;
            }
            let ratings = ctx.step(&per_user)?;
            for (u, item) in raters {
                let w = partition.cluster_of[u];
                cluster_pref
                    .entry(item)
                    .or_default()
                    .entry(w)
                    .or_insert(ratings[u]);
            }
        }
    }

    // S_j = {j} plus every explored item consistent with j on all clusters
    // that rated it.
    let mut members = Vec::with_capacity(reps.len());
    for (k, &rep) in reps.iter().enumerate() {
        let mut set = alloc::vec![rep];
        for &i in exp {
            let rated = match cluster_pref.get(&i) {
                Some(m) => m,
                None => continue,
            };
            if rated.iter().all(|(&w, &r)| prefs[w][k] == r) {
                set.push(i);
            }
        }
        members.push(set);
    }
    Ok(Some(ItemClusters {
        reps: reps.to_vec(),
        members,
    }))
}

/// Everything Explore produces, for exploitation and for diagnostics.
#[derive(Debug, Clone)]
pub struct ExploreOutcome {
    pub partition: Partition,
    pub prefs: PrefTable,
    pub item_clusters: ItemClusters,
    pub sets: ExploitSets,
    /// Steps consumed; equals `I_usr + ceil(I_rep/min|P_w|) + ceil(r_I I_exp/N)`.
    pub t_exp: u64,
}

fn build_sets(partition: &Partition, prefs: &PrefTable, clusters: &ItemClusters, n: usize) -> ExploitSets {
    let mut per_user = alloc::vec![BTreeSet::new(); n];
    for (w, members) in partition.clusters.iter().enumerate() {
        let mut set: BTreeSet<ItemId> = BTreeSet::new();
        for (k, s_k) in clusters.members.iter().enumerate() {
            if prefs[w][k] == 1 {
                set.extend(s_k.iter().copied());
            }
        }
        for &u in members {
            per_user[u] = set.clone();
        }
    }
    ExploitSets { per_user }
}

fn explore_in(
    ctx: &mut Ctx<'_>,
    params: &AlgParams,
    rng: &mut Stream,
) -> Result<Option<ExploreOutcome>, ModelError> {
    let n = ctx.env.n_users();
    let t_start = ctx.env.t;
    let usr_items = ctx.env.fresh_items(params.i_usr as usize);
    let reps = ctx.env.fresh_items(params.i_rep as usize);
    let exp = ctx.env.fresh_items(params.i_exp as usize);

    let Some(partition) = user_clustering_in(ctx, &usr_items, params.r_u)? else {
        return Ok(None);
    };
    let Some(prefs) = find_prefs_in(ctx, &reps, &partition)? else {
        return Ok(None);
    };
    let Some(item_clusters) =
        item_clustering_in(ctx, &reps, &exp, &partition, &prefs, params.r_i, rng)?
    else {
        return Ok(None);
    };

    let t_exp = ctx.env.t - t_start;
    let expected = params.i_usr
        + ceil_div(params.i_rep, partition.min_cluster_size() as u64)
        + ceil_div(params.r_i * params.i_exp, n as u64);
    assert_eq!(t_exp, expected, "exploration budget accounting");

    let sets = build_sets(&partition, &prefs, &item_clusters, n);
    Ok(Some(ExploreOutcome {
        partition,
        prefs,
        item_clusters,
        sets,
        t_exp,
    }))
}

/// Until step `horizon`: each user gets the smallest unseen item of their
/// exploitation set, else a fresh item.
fn exploit_in(ctx: &mut Ctx<'_>, sets: &ExploitSets, horizon: u64) -> Result<(), ModelError> {
    let n = ctx.env.n_users();
    let mut cursor: Vec<Option<ItemId>> = alloc::vec![None; n];
    while ctx.env.t < horizon && !ctx.exhausted() {
        let mut recs = Vec::with_capacity(n);
        for (u, last) in cursor.iter_mut().enumerate() {
            let mut pick = None;
            let range = match *last {
                None => sets.per_user[u].range(..),
                Some(prev) => sets.per_user[u].range((
                    core::ops::Bound::Excluded(prev),
                    core::ops::Bound::Unbounded,
                )),
            };
            for &i in range {
                *last = Some(i);
                if !ctx.env.history.has_rated(u, i) {
                    pick = Some(i);
                    break;
                }
            }
            match pick {
                Some(i) => recs.push((i, Phase::Exploit)),
                None => recs.push((ctx.env.fresh_item(), Phase::Filler)),
            }
        }
        ctx.step(&recs)?;
    }
    Ok(())
}

// Public single-phase wrappers (no step cap), used directly by tests and
// analysis tools.

pub fn user_clustering(
    env: &mut Environment,
    items: &[ItemId],
    r_u: u64,
) -> Result<Partition, ModelError> {
    let mut trace = Trace::new(env.n_users());
    let mut ctx = Ctx {
        env,
        trace: &mut trace,
        limit: u64::MAX,
    };
    Ok(user_clustering_in(&mut ctx, items, r_u)?.expect("uncapped"))
}

pub fn find_prefs(
    env: &mut Environment,
    reps: &[ItemId],
    partition: &Partition,
) -> Result<PrefTable, ModelError> {
    let mut trace = Trace::new(env.n_users());
    let mut ctx = Ctx {
        env,
        trace: &mut trace,
        limit: u64::MAX,
    };
    Ok(find_prefs_in(&mut ctx, reps, partition)?.expect("uncapped"))
}

pub fn item_clustering(
    env: &mut Environment,
    reps: &[ItemId],
    exp: &[ItemId],
    partition: &Partition,
    prefs: &PrefTable,
    r_i: u64,
    rng: &mut Stream,
) -> Result<ItemClusters, ModelError> {
    let mut trace = Trace::new(env.n_users());
    let mut ctx = Ctx {
        env,
        trace: &mut trace,
        limit: u64::MAX,
    };
    Ok(item_clustering_in(&mut ctx, reps, exp, partition, prefs, r_i, rng)?.expect("uncapped"))
}

pub fn explore(
    env: &mut Environment,
    params: &AlgParams,
    rng: &mut Stream,
) -> Result<ExploreOutcome, ModelError> {
    let mut trace = Trace::new(env.n_users());
    let mut ctx = Ctx {
        env,
        trace: &mut trace,
        limit: u64::MAX,
    };
    Ok(explore_in(&mut ctx, params, rng)?.expect("uncapped"))
}

pub fn exploit(env: &mut Environment, sets: &ExploitSets, horizon: u64) -> Result<(), ModelError> {
    let mut trace = Trace::new(env.n_users());
    let mut ctx = Ctx {
        env,
        trace: &mut trace,
        limit: u64::MAX,
    };
    exploit_in(&mut ctx, sets, horizon)
}

/// Diagnostics of one algorithm segment (one fixed-horizon run, or one
/// doubling interval).
#[derive(Debug, Clone)]
pub struct SegmentDiag {
    pub start_t: u64,
    pub horizon: u64,
    pub params: Option<AlgParams>,
    pub outcome: Option<ExploreOutcome>,
}

/// A finished run: the trace, the world that generated it (for auditing),
/// and per-segment diagnostics.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub world: LatentWorld,
    pub diags: Vec<SegmentDiag>,
}

fn params_for(tag: StrategyTag, n: u64, q_u: u64, q_i: u64, t: u64) -> Option<AlgParams> {
    match tag {
        StrategyTag::Random => None,
        StrategyTag::Recsys => Some(select_params(n, q_u, q_i, t)),
        StrategyTag::UserUser => Some(no_item_clust_params(n, q_u, q_i, t)),
        StrategyTag::ItemItem => {
            let mut p = item_clust_params(n, q_u, q_i, t);
            p.i_usr = 0;
            Some(p)
        }
        StrategyTag::Heuristic => Some(heuristic_alg_params(n, q_u, q_i, t)),
    }
}

/// Drive one strategy segment: the algorithm believes the horizon is
/// `assumed_t` steps from `start`; `limit` is the absolute step cap.
fn run_segment(
    ctx: &mut Ctx<'_>,
    tag: StrategyTag,
    assumed_t: u64,
    seg_stream: &mut Stream,
) -> Result<SegmentDiag, ModelError> {
    let start_t = ctx.env.t;
    let n = ctx.env.n_users();
    let cfg = ctx.env.world.config;
    let seg_end = (start_t + assumed_t).min(ctx.limit);

    if tag == StrategyTag::Random {
        while ctx.env.t < seg_end {
            let items = ctx.env.fresh_items(n);
            let recs: Vec<(ItemId, Phase)> =
                items.into_iter().map(|i| (i, Phase::Filler)).collect();
            ctx.step(&recs)?;
        }
        return Ok(SegmentDiag {
            start_t,
            horizon: assumed_t,
            params: None,
            outcome: None,
        });
    }

    let params = params_for(
        tag,
        n as u64,
        cfg.n_user_types as u64,
        cfg.n_item_types as u64,
        assumed_t,
    )
    .expect("non-random strategy has params");

    let saved_limit = ctx.limit;
    ctx.limit = seg_end;
    let outcome = explore_in(ctx, &params, seg_stream)?;
    if let Some(ref oc) = outcome {
        exploit_in(ctx, &oc.sets, seg_end)?;
    }
    ctx.limit = saved_limit;
    Ok(SegmentDiag {
        start_t,
        horizon: assumed_t,
        params: Some(params),
        outcome,
    })
}

/// Fixed-horizon run with explicit exploration budgets instead of a
/// strategy's parameter rule.
pub fn run_with_params(
    config: ModelConfig,
    t: u64,
    params: &AlgParams,
    alg_seed: u64,
) -> Result<RunOutput, ModelError> {
    let world = generate_world(config);
    let mut env = Environment::new(world);
    let mut trace = Trace::new(config.n_users);
    let mut diags = Vec::new();
    if t > 0 {
        let mut ctx = Ctx {
            env: &mut env,
            trace: &mut trace,
            limit: t,
        };
        let mut seg_stream = Stream::new(alg_seed).substream(0);
        let outcome = explore_in(&mut ctx, params, &mut seg_stream)?;
        if let Some(ref oc) = outcome {
            exploit_in(&mut ctx, &oc.sets, t)?;
        }
        diags.push(SegmentDiag {
            start_t: 0,
            horizon: t,
            params: Some(*params),
            outcome,
        });
    }
    Ok(RunOutput {
        trace,
        world: env.world,
        diags,
    })
}

/// End-to-end fixed-horizon run of a strategy on a fresh world.
pub fn run(
    config: ModelConfig,
    t: u64,
    tag: StrategyTag,
    alg_seed: u64,
) -> Result<RunOutput, ModelError> {
    let world = generate_world(config);
    let mut env = Environment::new(world);
    let mut trace = Trace::new(config.n_users);
    let mut diags = Vec::new();
    if t > 0 {
        let mut ctx = Ctx {
            env: &mut env,
            trace: &mut trace,
            limit: t,
        };
        let mut seg_stream = Stream::new(alg_seed).substream(0);
        diags.push(run_segment(&mut ctx, tag, t, &mut seg_stream)?);
    }
    Ok(RunOutput {
        trace,
        world: env.world,
        diags,
    })
}

/// Anytime wrapper: restart the fixed-horizon strategy on doubling
/// intervals of length 2, 4, 8, ... until `t_max` total steps. Restarts
/// share the environment, so fresh items drawn in later intervals are
/// globally fresh and the no-repeat rule holds across the whole trace.
pub fn run_anytime(
    config: ModelConfig,
    t_max: u64,
    tag: StrategyTag,
    alg_seed: u64,
) -> Result<RunOutput, ModelError> {
    let world = generate_world(config);
    let mut env = Environment::new(world);
    let mut trace = Trace::new(config.n_users);
    let mut diags = Vec::new();
    let root = Stream::new(alg_seed);
    let mut interval = 0u64;
    while env.t < t_max {
        let len = 1u64 << (interval + 1); // 2, 4, 8, ...
        let mut ctx = Ctx {
            env: &mut env,
            trace: &mut trace,
            limit: t_max,
        };
        let mut seg_stream = root.substream(interval);
        diags.push(run_segment(&mut ctx, tag, len, &mut seg_stream)?);
        interval += 1;
    }
    Ok(RunOutput {
        trace,
        world: env.world,
        diags,
    })
}
