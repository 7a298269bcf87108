//! Bulk-loaded R-tree over object bounding boxes.
//!
//! Nodes live in an arena and are packed bottom-up with sort-tile-recursive
//! ordering: entries are sorted by center x, cut into vertical slices of
//! `S * max` entries, each slice sorted by center y and chunked into nodes.
//! The index is immutable once built.

use crate::error::{Error, Result};
use crate::region::{BoundingBox, RegionSet};

/// Node fill limits. The root may hold fewer than `min_entries`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexConfig {
    pub max_entries: usize,
    pub min_entries: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            max_entries: 16,
            min_entries: 6,
        }
    }
}

impl IndexConfig {
    fn validate(&self) -> Result<()> {
        if self.max_entries < 2 || self.min_entries < 1 || 2 * self.min_entries > self.max_entries + 1 {
            return Err(Error::IndexBuild(format!(
                "fanout {}/{} is not usable",
                self.max_entries, self.min_entries
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Children {
    Leaf(Vec<(u64, BoundingBox)>),
    Inner(Vec<usize>),
}

#[derive(Debug, Clone)]
struct Node {
    envelope: BoundingBox,
    children: Children,
}

/// Shape summary of a built index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexStats {
    pub entries: usize,
    pub height: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    nodes: Vec<Node>,
    root: usize,
    height: usize,
    len: usize,
    config: IndexConfig,
}

/// Builds an index with the default 16/6 fanout.
pub fn build_index(regions: &RegionSet) -> Result<SpatialIndex> {
    SpatialIndex::build(regions, IndexConfig::default())
}

fn center2(b: &BoundingBox) -> (i64, i64) {
    (b.min_x + b.max_x, b.min_y + b.max_y)
}

/// Orders items in sort-tile-recursive sequence and cuts them into groups of
/// at most `max`, topping up a short trailing group from its predecessor.
fn str_groups<T>(mut items: Vec<T>, key: impl Fn(&T) -> BoundingBox, cfg: IndexConfig) -> Vec<Vec<T>> {
    let m = cfg.max_entries;
    let groups = items.len().div_ceil(m);
    let slices = (groups as f64).sqrt().ceil() as usize;
    let per_slice = slices * m;
    items.sort_by_key(|t| (center2(&key(t)).0, center2(&key(t)).1));
    let mut ordered = Vec::with_capacity(items.len());
    let mut rest = items;
    while !rest.is_empty() {
        let tail = rest.split_off(per_slice.min(rest.len()));
        let mut slice = std::mem::replace(&mut rest, tail);
        slice.sort_by_key(|t| (center2(&key(t)).1, center2(&key(t)).0));
        ordered.extend(slice);
    }

    let mut out: Vec<Vec<T>> = Vec::with_capacity(groups);
    let mut iter = ordered.into_iter().peekable();
    while iter.peek().is_some() {
        out.push(iter.by_ref().take(m).collect());
    }
    let n = out.len();
    if n > 1 && out[n - 1].len() < cfg.min_entries {
        let total = out[n - 2].len() + out[n - 1].len();
        let keep = total - total / 2;
        let moved = out[n - 2].split_off(keep);
        let last = std::mem::take(&mut out[n - 1]);
        out[n - 1] = moved.into_iter().chain(last).collect();
    }
    out
}

fn envelope_of(boxes: impl IntoIterator<Item = BoundingBox>) -> BoundingBox {
    boxes
        .into_iter()
        .reduce(|a, b| a.union(&b))
        .expect("groups are never empty")
}

impl SpatialIndex {
    pub fn build(regions: &RegionSet, config: IndexConfig) -> Result<Self> {
        config.validate()?;
        if regions.is_empty() {
            return Err(Error::IndexBuild("region set is empty".into()));
        }
        let entries: Vec<(u64, BoundingBox)> = regions.objects().iter().map(|o| (o.object_id, o.bbox)).collect();
        Ok(Self::from_entries(entries, config))
    }

    /// Builds from raw `(id, box)` pairs; ids need not be unique.
    pub fn from_entries(entries: Vec<(u64, BoundingBox)>, config: IndexConfig) -> Self {
        let len = entries.len();
        let mut nodes = Vec::new();
        let mut level: Vec<usize> = str_groups(entries, |e| e.1, config)
            .into_iter()
            .map(|group| {
                nodes.push(Node {
                    envelope: envelope_of(group.iter().map(|e| e.1)),
                    children: Children::Leaf(group),
                });
                nodes.len() - 1
            })
            .collect();
        let mut height = 1;
        while level.len() > 1 {
            let envs: Vec<BoundingBox> = nodes.iter().map(|n| n.envelope).collect();
            level = str_groups(level, |&i| envs[i], config)
                .into_iter()
                .map(|group| {
                    nodes.push(Node {
                        envelope: envelope_of(group.iter().map(|&i| envs[i])),
                        children: Children::Inner(group),
                    });
                    nodes.len() - 1
                })
                .collect();
            height += 1;
        }
        SpatialIndex {
            root: level[0],
            nodes,
            height,
            len,
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of levels; a lone leaf root has height 1.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root_envelope(&self) -> BoundingBox {
        self.nodes[self.root].envelope
    }

    /// Ids of all objects whose box intersects `window`, ascending.
    pub fn query_window(&self, window: &BoundingBox) -> Vec<u64> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if !node.envelope.intersects(window) {
                continue;
            }
            match &node.children {
                Children::Leaf(entries) => {
                    out.extend(entries.iter().filter(|(_, b)| b.intersects(window)).map(|(id, _)| *id))
                }
                Children::Inner(kids) => stack.extend(kids),
            }
        }
        out.sort_unstable();
        out
    }

    /// Ids of all objects whose box owns pixel `(x, y)`.
    pub fn query_point(&self, x: i64, y: i64) -> Vec<u64> {
        let window = BoundingBox {
            min_x: x,
            min_y: y,
            max_x: x + 1,
            max_y: y + 1,
        };
        self.query_window(&window)
    }

    /// Every stored entry, in tree order.
    pub fn entries(&self) -> Vec<(u64, BoundingBox)> {
        let mut out = Vec::with_capacity(self.len);
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            match &self.nodes[i].children {
                Children::Leaf(entries) => out.extend(entries.iter().copied()),
                Children::Inner(kids) => stack.extend(kids.iter().rev()),
            }
        }
        out
    }

    /// Walks the whole tree checking envelope containment, fill limits,
    /// uniform leaf depth and the entry count.
    pub fn audit(&self) -> Result<IndexStats> {
        let fail = |msg: String| Err(Error::IndexBuild(format!("audit: {msg}")));
        let mut entries = 0usize;
        let mut reached = 0usize;
        let mut stack = vec![(self.root, 1usize)];
        while let Some((i, depth)) = stack.pop() {
            reached += 1;
            let node = &self.nodes[i];
            let count = match &node.children {
                Children::Leaf(e) => e.len(),
                Children::Inner(k) => k.len(),
            };
            if count == 0 || count > self.config.max_entries {
                return fail(format!("node {i} holds {count} children"));
            }
            if i != self.root && count < self.config.min_entries {
                return fail(format!("node {i} is underfull ({count})"));
            }
            match &node.children {
                Children::Leaf(e) => {
                    if depth != self.height {
                        return fail(format!("leaf {i} at depth {depth} of {}", self.height));
                    }
                    for (id, b) in e {
                        if !node.envelope.contains(b) {
                            return fail(format!("entry {id} escapes leaf {i}"));
                        }
                    }
                    entries += e.len();
                }
                Children::Inner(kids) => {
                    for &k in kids {
                        if !node.envelope.contains(&self.nodes[k].envelope) {
                            return fail(format!("node {k} escapes parent {i}"));
                        }
                        stack.push((k, depth + 1));
                    }
                }
            }
        }
        if entries != self.len {
            return fail(format!("{entries} entries reachable, {} stored", self.len));
        }
        if reached != self.nodes.len() {
            return fail(format!("{} of {} nodes reachable", reached, self.nodes.len()));
        }
        Ok(IndexStats {
            entries,
            height: self.height,
            nodes: self.nodes.len(),
        })
    }
}
