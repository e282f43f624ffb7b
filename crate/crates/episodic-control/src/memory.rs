//! Non-parametric value memory: one key/value buffer per action.
//!
//! Each buffer stores `(embedding key, best observed return, write stamp)`
//! entries. Writing the same key again keeps the maximum of the old and new
//! return, so an entry's value never decreases under the default rule. When a
//! buffer is full the entry with the smallest stamp (least recently written)
//! is evicted. Value estimation first looks for a bit-identical key and
//! otherwise averages the values of the k nearest stored keys in Euclidean
//! distance.
//!
//! Reads never touch stamps: only writes count as "use" for eviction, so
//! estimation is entirely side-effect-free apart from the hit/query counters
//! behind [`EpisodicValueStore::match_rate`].

use crate::error::{EcError, Result};

/// A fixed-dimension observation key with all-finite components.
///
/// Equality is bitwise on the underlying `f64` patterns, which makes "the
/// same state seen again" a well-defined event for deterministic embeddings.
#[derive(Debug, Clone)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    /// Wraps a vector as a key. Rejects empty vectors and non-finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(EcError::InvalidArgument(
                "embedding must have at least one component".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EcError::NonFinite { context: "embedding component" });
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Euclidean distance to another embedding of the same dimension.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(EcError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(squared_distance(&self.values, &other.values).sqrt())
    }
}

impl PartialEq for Embedding {
    fn eq(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Eq for Embedding {}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared distance with early abandoning: returns `None` as soon as the
/// partial sum strictly exceeds `bound`, since such a candidate can never
/// displace the current k-th neighbour (ties on distance are kept so the
/// stamp tie-break still sees them). The result is bit-equal to the full sum
/// whenever it is returned, because the summation order is unchanged.
fn squared_distance_bounded(a: &[f64], b: &[f64], bound: f64) -> Option<f64> {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut sum = 0.0;
    let mut i = 0;
    while i < n {
        let end = (i + 8).min(n);
        while i < end {
            let d = a[i] - b[i];
            sum += d * d;
            i += 1;
        }
        if sum > bound {
            return None;
        }
    }
    Some(sum)
}

/// One remembered `(key, value, stamp)` triple.
#[derive(Debug, Clone)]
pub struct MemoryEntry {
    pub key: Embedding,
    pub value: f64,
    pub stamp: u64,
}

/// How a write combines with an existing entry for the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// Keep the larger of the stored and the new return (the default).
    /// Values are monotone non-decreasing over an entry's lifetime.
    MaxReturn,
    /// Replace the stored return outright. Kept as a switchable variant for
    /// comparison runs; quality under this rule is deliberately not tuned.
    Overwrite,
}

/// A bounded buffer of entries for a single action.
#[derive(Debug, Clone)]
pub struct ActionBuffer {
    capacity: usize,
    entries: Vec<MemoryEntry>,
}

impl ActionBuffer {
    /// Creates an empty buffer holding at most `capacity` entries.
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(EcError::InvalidArgument("buffer capacity must be at least 1".into()));
        }
        Ok(Self { capacity, entries: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> &[MemoryEntry] {
        &self.entries
    }

    /// Index of the entry whose key is bit-identical to `key`, if any.
    fn position_exact(&self, key: &Embedding) -> Option<usize> {
        self.entries.iter().position(|e| e.key == *key)
    }

    /// The entry whose key is bit-identical to `key`, if any.
    pub fn exact_match(&self, key: &Embedding) -> Option<&MemoryEntry> {
        self.position_exact(key).map(|i| &self.entries[i])
    }

    /// Inserts a new entry or combines with the existing one for this key.
    ///
    /// `stamp` must be strictly greater than every stamp already in use;
    /// [`EpisodicValueStore`] guarantees this with a store-wide clock. The
    /// stamp is refreshed on every write that touches the entry, including
    /// max-rule writes that leave the value unchanged. Inserting into a full
    /// buffer first evicts the least recently written entry.
    pub fn write(&mut self, key: &Embedding, value: f64, stamp: u64, rule: UpdateRule) -> Result<()> {
        if !value.is_finite() {
            return Err(EcError::NonFinite { context: "stored return" });
        }
        if let Some(i) = self.position_exact(key) {
            let entry = &mut self.entries[i];
            entry.value = match rule {
                UpdateRule::MaxReturn => entry.value.max(value),
                UpdateRule::Overwrite => value,
            };
            entry.stamp = stamp;
            return Ok(());
        }
        if self.entries.len() == self.capacity {
            self.evict()?;
        }
        self.entries.push(MemoryEntry { key: key.clone(), value, stamp });
        Ok(())
    }

    /// Removes and returns the entry with the smallest stamp.
    ///
    /// Only defined for a full buffer: evicting while below capacity would
    /// discard memory for no reason, so it is rejected.
    pub fn evict(&mut self) -> Result<MemoryEntry> {
        if self.entries.len() < self.capacity {
            return Err(EcError::BufferBelowCapacity {
                len: self.entries.len(),
                capacity: self.capacity,
            });
        }
        let oldest = self
            .entries
            .iter()
            .enumerate()
            .min_by_key(|(_, e)| e.stamp)
            .map(|(i, _)| i)
            .expect("full buffer has at least one entry");
        Ok(self.entries.swap_remove(oldest))
    }

    /// The k nearest entries to `query` in Euclidean distance, closest first.
    ///
    /// Distance ties are broken towards the smaller stamp so the result is a
    /// deterministic function of the buffer contents. Asking for more
    /// neighbours than the buffer holds returns every entry.
    pub fn knn(&self, query: &Embedding, k: usize) -> Result<Vec<(&MemoryEntry, f64)>> {
        match self.scan(query, k, false)? {
            BufferLookup::Nearest(neighbours) => Ok(neighbours),
            BufferLookup::Exact(_) => unreachable!("scan only stops early when asked to"),
        }
    }

    /// One pass combining the exact lookup with the neighbour search: returns
    /// the bit-identical entry when one is stored, otherwise the k nearest as
    /// [`knn`](Self::knn) would. Cheaper than calling both in sequence.
    pub fn lookup(&self, query: &Embedding, k: usize) -> Result<BufferLookup<'_>> {
        self.scan(query, k, true)
    }

    fn scan(&self, query: &Embedding, k: usize, stop_on_exact: bool) -> Result<BufferLookup<'_>> {
        if k == 0 {
            return Err(EcError::InvalidArgument("k must be at least 1".into()));
        }
        if self.entries.is_empty() {
            // The caller knows which action this buffer belongs to; report a
            // generic index here.
            return Err(EcError::EmptyBuffer { action: usize::MAX });
        }
        let dim = self.entries[0].key.dim();
        if query.dim() != dim {
            return Err(EcError::DimensionMismatch { expected: dim, got: query.dim() });
        }
        // `best` is kept sorted ascending by (squared distance, stamp).
        let mut best: Vec<(f64, u64, usize)> = Vec::with_capacity(k + 1);
        for (idx, entry) in self.entries.iter().enumerate() {
            let bound = if best.len() == k { best[k - 1].0 } else { f64::INFINITY };
            let sq = match squared_distance_bounded(entry.key.values(), query.values(), bound) {
                Some(sq) => sq,
                None => continue,
            };
            // A bit-identical key always reaches this point: its partial sums
            // are all 0.0, which never exceeds a non-negative bound. The bit
            // comparison is reserved for distance-zero candidates, so the
            // common path pays nothing for it.
            if stop_on_exact && sq == 0.0 && entry.key == *query {
                return Ok(BufferLookup::Exact(entry));
            }
            let candidate = (sq, entry.stamp);
            let pos = best
                .partition_point(|&(d, s, _)| d < candidate.0 || (d == candidate.0 && s < candidate.1));
            if pos < k {
                best.insert(pos, (sq, entry.stamp, idx));
                if best.len() > k {
                    best.pop();
                }
            }
        }
        Ok(BufferLookup::Nearest(
            best.into_iter().map(|(sq, _, idx)| (&self.entries[idx], sq.sqrt())).collect(),
        ))
    }
}

/// Result of [`ActionBuffer::lookup`]: an exact hit or the nearest entries.
#[derive(Debug)]
pub enum BufferLookup<'a> {
    /// The stored entry whose key is bit-identical to the query.
    Exact(&'a MemoryEntry),
    /// No bit-identical key stored: the k nearest entries, closest first,
    /// each paired with its Euclidean distance.
    Nearest(Vec<(&'a MemoryEntry, f64)>),
}

/// The full episodic value memory: one [`ActionBuffer`] per action, a
/// store-wide write clock, and exact-match statistics.
#[derive(Debug, Clone)]
pub struct EpisodicValueStore {
    buffers: Vec<ActionBuffer>,
    dim: usize,
    clock: u64,
    hit_count: u64,
    query_count: u64,
}

impl EpisodicValueStore {
    /// Creates an empty store for `num_actions` actions, each with its own
    /// buffer of `capacity` entries, keyed by `dim`-dimensional embeddings.
    pub fn new(num_actions: usize, capacity: usize, dim: usize) -> Result<Self> {
        if num_actions == 0 {
            return Err(EcError::InvalidArgument("store needs at least one action".into()));
        }
        if dim == 0 {
            return Err(EcError::InvalidArgument("embedding dimension must be at least 1".into()));
        }
        let buffers = (0..num_actions)
            .map(|_| ActionBuffer::new(capacity))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { buffers, dim, clock: 0, hit_count: 0, query_count: 0 })
    }

    pub fn num_actions(&self) -> usize {
        self.buffers.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn buffer(&self, action: usize) -> Result<&ActionBuffer> {
        self.buffers
            .get(action)
            .ok_or(EcError::InvalidAction { action, num_actions: self.buffers.len() })
    }

    /// Entry counts per action, in action order.
    pub fn occupancy(&self) -> Vec<usize> {
        self.buffers.iter().map(|b| b.len()).collect()
    }

    pub fn hit_count(&self) -> u64 {
        self.hit_count
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    fn check_key(&self, key: &Embedding) -> Result<()> {
        if key.dim() != self.dim {
            return Err(EcError::DimensionMismatch { expected: self.dim, got: key.dim() });
        }
        Ok(())
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.buffers.len() {
            return Err(EcError::InvalidAction { action, num_actions: self.buffers.len() });
        }
        Ok(())
    }

    /// Records that taking `action` at `key` eventually earned `ret`.
    ///
    /// A new key is inserted (evicting the least recently written entry if
    /// the buffer is full); a key already present keeps the maximum of its
    /// stored value and `ret`. Either way the entry's stamp is refreshed from
    /// the store-wide clock.
    pub fn update(&mut self, key: &Embedding, action: usize, ret: f64) -> Result<()> {
        self.update_with_rule(key, action, ret, UpdateRule::MaxReturn)
    }

    /// [`update`](Self::update) with an explicit combination rule.
    pub fn update_with_rule(
        &mut self,
        key: &Embedding,
        action: usize,
        ret: f64,
        rule: UpdateRule,
    ) -> Result<()> {
        self.check_action(action)?;
        self.check_key(key)?;
        if !ret.is_finite() {
            return Err(EcError::NonFinite { context: "stored return" });
        }
        self.clock += 1;
        self.buffers[action].write(key, ret, self.clock, rule)
    }

    /// Value estimate for taking `action` at `key`.
    ///
    /// A bit-identical stored key returns its stored value and counts as an
    /// exact hit; otherwise the estimate is the arithmetic mean of the values
    /// of the k nearest stored keys (all of them when fewer than k exist).
    /// Every estimate against a non-empty buffer increments the query count.
    /// An empty buffer is an error: the caller decides what "no information"
    /// means (the episodic controller treats it as a value of zero).
    pub fn estimate(&mut self, key: &Embedding, action: usize, k: usize) -> Result<f64> {
        self.check_action(action)?;
        self.check_key(key)?;
        if k == 0 {
            return Err(EcError::InvalidArgument("k must be at least 1".into()));
        }
        if self.buffers[action].is_empty() {
            return Err(EcError::EmptyBuffer { action });
        }
        self.query_count += 1;
        match self.buffers[action].lookup(key, k)? {
            BufferLookup::Exact(entry) => {
                self.hit_count += 1;
                Ok(entry.value)
            }
            BufferLookup::Nearest(neighbours) => {
                let sum: f64 = neighbours.iter().map(|(e, _)| e.value).sum();
                Ok(sum / neighbours.len() as f64)
            }
        }
    }

    /// Fraction of estimates that found a bit-identical key.
    ///
    /// Undefined until at least one estimate has been made.
    pub fn match_rate(&self) -> Result<f64> {
        if self.query_count == 0 {
            return Err(EcError::UndefinedStatistic {
                what: "exact-match rate",
                why: "no value estimates have been made yet".into(),
            });
        }
        Ok(self.hit_count as f64 / self.query_count as f64)
    }

    /// Serializes the store as line-oriented text.
    ///
    /// Format: a header `EC-STORE v1 F=<dim> actions=<n>` followed by one
    /// line per entry, `action,value,stamp,v1,...,vF`, in buffer order.
    /// Numbers use shortest round-trip decimal, so reloading reproduces the
    /// exact bit patterns. Hit/query statistics are per-session and are not
    /// serialized.
    pub fn snapshot_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("EC-STORE v1 F={} actions={}\n", self.dim, self.buffers.len()));
        for (action, buffer) in self.buffers.iter().enumerate() {
            for entry in buffer.entries() {
                out.push_str(&format!("{},{},{}", action, entry.value, entry.stamp));
                for v in entry.key.values() {
                    out.push_str(&format!(",{}", v));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Rebuilds a store from [`snapshot_text`](Self::snapshot_text) output.
    ///
    /// The snapshot does not record capacity, so the caller supplies it; the
    /// write clock resumes above the largest stamp in the file, preserving
    /// eviction order relative to future writes.
    pub fn from_snapshot_text(text: &str, capacity: usize) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(EcError::Format {
            kind: "store snapshot",
            message: "empty file".into(),
        })?;
        let (dim, actions) = parse_store_header(header)?;
        let mut store = Self::new(actions, capacity, dim)?;
        for (lineno, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let bad = |message: String| EcError::Format {
                kind: "store snapshot",
                message: format!("line {}: {}", lineno + 1, message),
            };
            let action: usize = parts
                .next()
                .ok_or_else(|| bad("missing action".into()))?
                .parse()
                .map_err(|e| bad(format!("bad action: {e}")))?;
            let value: f64 = parts
                .next()
                .ok_or_else(|| bad("missing value".into()))?
                .parse()
                .map_err(|e| bad(format!("bad value: {e}")))?;
            let stamp: u64 = parts
                .next()
                .ok_or_else(|| bad("missing stamp".into()))?
                .parse()
                .map_err(|e| bad(format!("bad stamp: {e}")))?;
            let key: Vec<f64> = parts
                .map(|p| p.parse::<f64>().map_err(|e| bad(format!("bad component: {e}"))))
                .collect::<Result<_>>()?;
            if key.len() != dim {
                return Err(bad(format!("key has {} components, header says {}", key.len(), dim)));
            }
            if action >= actions {
                return Err(bad(format!("action {} out of range", action)));
            }
            let key = Embedding::new(key)?;
            if store.buffers[action].len() == capacity {
                return Err(bad(format!("more than {} entries for action {}", capacity, action)));
            }
            store.buffers[action].write(&key, value, stamp, UpdateRule::Overwrite)?;
            store.clock = store.clock.max(stamp);
        }
        Ok(store)
    }

    /// Writes [`snapshot_text`](Self::snapshot_text) to a file.
    pub fn write_snapshot(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.snapshot_text())?;
        Ok(())
    }

    /// Reads a store back from a snapshot file.
    pub fn read_snapshot(path: &std::path::Path, capacity: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_snapshot_text(&text, capacity)
    }
}

fn parse_store_header(header: &str) -> Result<(usize, usize)> {
    let bad = |message: String| EcError::Format { kind: "store snapshot", message };
    let mut parts = header.split_whitespace();
    if parts.next() != Some("EC-STORE") || parts.next() != Some("v1") {
        return Err(bad(format!("unrecognized header: {header:?}")));
    }
    let mut dim = None;
    let mut actions = None;
    for part in parts {
        if let Some(v) = part.strip_prefix("F=") {
            dim = Some(v.parse::<usize>().map_err(|e| bad(format!("bad F: {e}")))?);
        } else if let Some(v) = part.strip_prefix("actions=") {
            actions = Some(v.parse::<usize>().map_err(|e| bad(format!("bad actions: {e}")))?);
        } else {
            return Err(bad(format!("unexpected header field {part:?}")));
        }
    }
    match (dim, actions) {
        (Some(d), Some(a)) => Ok((d, a)),
        _ => Err(bad("header must carry F= and actions=".into())),
    }
}
