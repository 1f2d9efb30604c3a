//! Generative environment for the latent-type preference model.
//!
//! A world holds hidden user types, a hidden sign preference matrix, and a
//! lazily-typed infinite item stream: item `i`'s type is a pure function of
//! `(world seed, i)`, sampled on first rating and immutable afterwards.
//! Fresh item ids therefore have i.i.d. uniform types, which realizes the
//! model's "new random items" without materializing an infinite set.
//!
//! The [`Environment`] enforces the two interaction rules: exactly one
//! recommendation per user per step, and no item repeated to the same user.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::rng::Stream;

pub type UserId = usize;
pub type ItemId = u64;
/// Feedback value: `+1` like, `-1` dislike.
pub type Rating = i8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown user id {0}")]
    UnknownUser(UserId),
    #[error("item {item} was already recommended to user {user}")]
    RepeatViolation { user: UserId, item: ItemId },
    #[error("step needs one item per user: expected {expected}, got {got}")]
    MissingUser { expected: usize, got: usize },
    #[error("bad world snapshot: {0}")]
    BadSnapshot(String),
}

/// Static parameters of a world. Two configs with equal fields generate
/// bitwise-identical worlds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub n_users: usize,
    pub n_user_types: usize,
    pub n_item_types: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(n_users: usize, n_user_types: usize, n_item_types: usize, seed: u64) -> Self {
        assert!(n_users >= 1 && n_user_types >= 1 && n_item_types >= 1);
        ModelConfig {
            n_users,
            n_user_types,
            n_item_types,
            seed,
        }
    }
}

// Substream labels for world generation.
const LBL_USER_TYPES: u64 = 1;
const LBL_PREFS: u64 = 2;
const LBL_ITEM_TYPES: u64 = 3;

/// Hidden ground truth: user types, lazily-typed item stream, and the
/// `q_U x q_I` sign preference matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatentWorld {
    pub config: ModelConfig,
    user_type: Vec<usize>,
    item_type: BTreeMap<ItemId, usize>,
    /// Key of the item-typing substream; type of item `i` is a pure
    /// function of `(item_key, i)`.
    item_key: u64,
    /// Row-major `q_U x q_I` matrix of `{-1, +1}`.
    pref: Vec<i8>,
}

/// Sample a full world from a config. User types and the preference matrix
/// are drawn eagerly; item types stay lazy.
pub fn generate_world(config: ModelConfig) -> LatentWorld {
    let root = Stream::new(config.seed);
    let mut types = root.substream(LBL_USER_TYPES);
    let user_type = (0..config.n_users)
        .map(|_| types.uniform(config.n_user_types as u64) as usize)
        .collect();
    let mut prefs = root.substream(LBL_PREFS);
    let pref = (0..config.n_user_types * config.n_item_types)
        .map(|_| prefs.sign())
        .collect();
    LatentWorld {
        config,
        user_type,
        item_type: BTreeMap::new(),
        item_key: root.substream_key(LBL_ITEM_TYPES),
        pref,
    }
}

impl LatentWorld {
    /// Build a world from explicit parts (snapshot import, hand-written
    /// test worlds). Future lazy item types still derive from the seed.
    pub fn from_parts(
        config: ModelConfig,
        user_type: Vec<usize>,
        item_type: BTreeMap<ItemId, usize>,
        pref: Vec<i8>,
    ) -> Result<Self, ModelError> {
        if user_type.len() != config.n_users {
            return Err(ModelError::BadSnapshot("user_type length mismatch".into()));
        }
        if pref.len() != config.n_user_types * config.n_item_types {
            return Err(ModelError::BadSnapshot("pref_matrix size mismatch".into()));
        }
        if user_type.iter().any(|&w| w >= config.n_user_types)
            || item_type.values().any(|&j| j >= config.n_item_types)
            || pref.iter().any(|&x| x != 1 && x != -1)
        {
            return Err(ModelError::BadSnapshot("entry out of range".into()));
        }
        Ok(LatentWorld {
            config,
            user_type,
            item_type,
            item_key: Stream::new(config.seed).substream_key(LBL_ITEM_TYPES),
            pref,
        })
    }

    pub fn user_type(&self, u: UserId) -> Result<usize, ModelError> {
        self.user_type
            .get(u)
            .copied()
            .ok_or(ModelError::UnknownUser(u))
    }

    pub fn user_types(&self) -> &[usize] {
        &self.user_type
    }

    /// Type of item `i`, sampling and recording it on first use.
    pub fn item_type_of(&mut self, i: ItemId) -> usize {
        let q_i = self.config.n_item_types as u64;
        let key = self.item_key;
        *self
            .item_type
            .entry(i)
            .or_insert_with(|| Stream::from_key(key).substream(i).uniform(q_i) as usize)
    }

    /// Type of item `i` if already sampled.
    pub fn item_type_get(&self, i: ItemId) -> Option<usize> {
        self.item_type.get(&i).copied()
    }

    pub fn sampled_item_types(&self) -> &BTreeMap<ItemId, usize> {
        &self.item_type
    }

    pub fn pref_entry(&self, user_ty: usize, item_ty: usize) -> i8 {
        self.pref[user_ty * self.config.n_item_types + item_ty]
    }

    pub fn pref_matrix(&self) -> &[i8] {
        &self.pref
    }

    /// `L_{u,i}`: the preference of user `u` for item `i`. Idempotent; lazy
    /// item typing is recorded on first call.
    pub fn rating(&mut self, u: UserId, i: ItemId) -> Result<Rating, ModelError> {
        let w = self.user_type(u)?;
        let j = self.item_type_of(i);
        Ok(self.pref_entry(w, j))
    }

    /// Highest user count over all user types (`pi_*`).
    pub fn max_type_multiplicity(&self) -> usize {
        let mut counts = alloc::vec![0usize; self.config.n_user_types];
        for &w in &self.user_type {
            counts[w] += 1;
        }
        counts.into_iter().max().unwrap_or(0)
    }
}

/// Append-only interaction history: per-user recommendation sequences and
/// the inverse index `rated_by`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryLog {
    recs: Vec<Vec<(u64, ItemId, Rating)>>,
    rated_by: BTreeMap<ItemId, BTreeSet<UserId>>,
}

impl HistoryLog {
    fn new(n_users: usize) -> Self {
        HistoryLog {
            recs: alloc::vec![Vec::new(); n_users],
            rated_by: BTreeMap::new(),
        }
    }

    pub fn recs(&self, u: UserId) -> &[(u64, ItemId, Rating)] {
        &self.recs[u]
    }

    /// Users that have rated item `i` so far.
    pub fn rated_by(&self, i: ItemId) -> Option<&BTreeSet<UserId>> {
        self.rated_by.get(&i)
    }

    pub fn has_rated(&self, u: UserId, i: ItemId) -> bool {
        self.rated_by.get(&i).is_some_and(|s| s.contains(&u))
    }
}

/// Mutable simulation state. Strictly sequential: one `step` call advances
/// every user by one recommendation.
#[derive(Debug, Clone)]
pub struct Environment {
    pub world: LatentWorld,
    pub history: HistoryLog,
    pub t: u64,
    next_fresh_item: ItemId,
}

impl Environment {
    pub fn new(world: LatentWorld) -> Self {
        let n = world.config.n_users;
        Environment {
            world,
            history: HistoryLog::new(n),
            t: 0,
            next_fresh_item: 0,
        }
    }

    pub fn n_users(&self) -> usize {
        self.world.config.n_users
    }

    /// `k` previously-unseen item ids. Their types are sampled lazily on
    /// first rating, so fresh ids are distributionally "new random items".
    pub fn fresh_items(&mut self, k: usize) -> Vec<ItemId> {
        let start = self.next_fresh_item;
        self.next_fresh_item += k as u64;
        (start..self.next_fresh_item).collect()
    }

    pub fn fresh_item(&mut self) -> ItemId {
        self.fresh_items(1)[0]
    }

    /// Advance one time step: `recs[u]` is recommended to user `u`, all
    /// feedback is returned. Enforces the one-per-user and no-repeat rules.
    pub fn step(&mut self, recs: &[ItemId]) -> Result<Vec<Rating>, ModelError> {
        let n = self.n_users();
        if recs.len() != n {
            return Err(ModelError::MissingUser {
                expected: n,
                got: recs.len(),
            });
        }
        for (u, &i) in recs.iter().enumerate() {
            if self.history.has_rated(u, i) {
                return Err(ModelError::RepeatViolation { user: u, item: i });
            }
        }
        let t = self.t + 1;
        let mut out = Vec::with_capacity(n);
        for (u, &i) in recs.iter().enumerate() {
            let r = self.world.rating(u, i)?;
            self.history.recs[u].push((t, i, r));
            self.history.rated_by.entry(i).or_default().insert(u);
            if i >= self.next_fresh_item {
                self.next_fresh_item = i + 1;
            }
            out.push(r);
        }
        self.t = t;
        Ok(out)
    }
}

/// Plain-text world snapshot. Round-trips exactly through
/// [`parse_snapshot`].
pub fn snapshot(world: &LatentWorld) -> String {
    let c = world.config;
    let mut s = String::new();
    s.push_str("recsim-world v1\n");
    s.push_str(&alloc::format!("n_users {}\n", c.n_users));
    s.push_str(&alloc::format!("n_user_types {}\n", c.n_user_types));
    s.push_str(&alloc::format!("n_item_types {}\n", c.n_item_types));
    s.push_str(&alloc::format!("seed {}\n", c.seed));
    s.push_str("user_type");
    for &w in &world.user_type {
        s.push_str(&alloc::format!(" {}", w));
    }
    s.push('\n');
    s.push_str("item_type");
    for (&i, &j) in &world.item_type {
        s.push_str(&alloc::format!(" {}:{}", i, j));
    }
    s.push('\n');
    s.push_str("pref_matrix\n");
    for w in 0..c.n_user_types {
        for j in 0..c.n_item_types {
            s.push(if world.pref_entry(w, j) == 1 { '+' } else { '-' });
        }
        s.push('\n');
    }
    s
}

pub fn parse_snapshot(text: &str) -> Result<LatentWorld, ModelError> {
    let bad = |m: &str| ModelError::BadSnapshot(m.to_string());
    let mut lines = text.lines();
    if lines.next() != Some("recsim-world v1") {
        return Err(bad("missing header"));
    }
    let mut field = |name: &str| -> Result<u64, ModelError> {
        let line = lines.next().ok_or_else(|| bad("truncated"))?;
        let rest = line
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| bad(name))?;
        rest.parse().map_err(|_| bad(name))
    };
    let n_users = field("n_users")? as usize;
    let n_user_types = field("n_user_types")? as usize;
    let n_item_types = field("n_item_types")? as usize;
    let seed = field("seed")?;
    if n_users < 1 || n_user_types < 1 || n_item_types < 1 {
        return Err(bad("zero dimension"));
    }
    let config = ModelConfig::new(n_users, n_user_types, n_item_types, seed);

    let ut_line = lines.next().ok_or_else(|| bad("truncated"))?;
    let ut_rest = ut_line.strip_prefix("user_type").ok_or_else(|| bad("user_type"))?;
    let user_type: Vec<usize> = ut_rest
        .split_whitespace()
        .map(|tok| tok.parse().map_err(|_| bad("user_type entry")))
        .collect::<Result<_, _>>()?;

    let it_line = lines.next().ok_or_else(|| bad("truncated"))?;
    let it_rest = it_line.strip_prefix("item_type").ok_or_else(|| bad("item_type"))?;
    let mut item_type = BTreeMap::new();
    for tok in it_rest.split_whitespace() {
        let (i, j) = tok.split_once(':').ok_or_else(|| bad("item_type entry"))?;
        let i: ItemId = i.parse().map_err(|_| bad("item id"))?;
        let j: usize = j.parse().map_err(|_| bad("item type"))?;
        item_type.insert(i, j);
    }

    if lines.next() != Some("pref_matrix") {
        return Err(bad("missing pref_matrix"));
    }
    let mut pref = Vec::with_capacity(n_user_types * n_item_types);
    for _ in 0..n_user_types {
        let row = lines.next().ok_or_else(|| bad("truncated matrix"))?;
        if row.len() != n_item_types {
            return Err(bad("matrix row length"));
        }
        for ch in row.chars() {
            pref.push(match ch {
                '+' => 1,
                '-' => -1,
                _ => return Err(bad("matrix entry")),
            });
        }
    }
    LatentWorld::from_parts(config, user_type, item_type, pref)
}
