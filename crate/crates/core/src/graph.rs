//! Creational dependency graph: asset types, prerequisite edges with counts,
//! and the reachability structure every dependency value hangs off.
//!
//! A [`CreationalGraph`] accepts any candidate asset/edge lists, including
//! broken ones, so that [`CreationalGraph::validate`] can report every problem
//! at once. Edges that name unknown assets or loop onto themselves are kept in
//! [`CreationalGraph::edges`] for reporting but do not take part in
//! reachability.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::validation::{Issue, ValidationReport};

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// Symbolic identifier of an asset type, e.g. `Base` or `MissileGS`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssetId(String);

impl AssetId {
    pub fn new(id: impl Into<String>) -> Self {
        AssetId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AssetId {
    fn from(s: &str) -> Self {
        AssetId(s.to_owned())
    }
}

impl From<String> for AssetId {
    fn from(s: String) -> Self {
        AssetId(s)
    }
}

impl Borrow<str> for AssetId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("unknown asset id `{0}`")]
    UnknownAsset(AssetId),
}

// ---------------------------------------------------------------------------
// Nodes, edges, holdings
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetType {
    pub id: AssetId,
    pub display_name: String,
}

impl AssetType {
    pub fn new(id: impl Into<String>, display_name: impl Into<String>) -> Self {
        AssetType {
            id: AssetId::new(id),
            display_name: display_name.into(),
        }
    }
}

/// `product` may only be created while the owner holds at least
/// `required_count` live instances of `prerequisite`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreationalEdge {
    pub prerequisite: AssetId,
    pub product: AssetId,
    #[serde(default = "default_required_count")]
    pub required_count: u32,
}

fn default_required_count() -> u32 {
    1
}

impl CreationalEdge {
    pub fn new(prerequisite: impl Into<AssetId>, product: impl Into<AssetId>, required_count: u32) -> Self {
        CreationalEdge {
            prerequisite: prerequisite.into(),
            product: product.into(),
            required_count,
        }
    }
}

/// Live asset counts owned by one player. Absent keys mean zero; zero counts
/// are never stored, so two holdings compare equal iff their counts agree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Holdings {
    counts: BTreeMap<AssetId, u32>,
}

impl Holdings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, asset: &str) -> u32 {
        self.counts.get(asset).copied().unwrap_or(0)
    }

    pub fn set(&mut self, asset: AssetId, count: u32) {
        if count == 0 {
            self.counts.remove(&asset);
        } else {
            self.counts.insert(asset, count);
        }
    }

    pub fn add(&mut self, asset: &AssetId, count: u32) {
        let current = self.count(asset.as_str());
        self.set(asset.clone(), current.saturating_add(count));
    }

    /// Removes `count` instances. Returns `false` and leaves the holdings
    /// untouched when fewer than `count` are owned.
    pub fn remove(&mut self, asset: &AssetId, count: u32) -> bool {
        let current = self.count(asset.as_str());
        if current < count {
            return false;
        }
        self.set(asset.clone(), current - count);
        true
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total_instances(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AssetId, u32)> {
        self.counts.iter().map(|(a, &c)| (a, c))
    }
}

impl<A: Into<AssetId>> FromIterator<(A, u32)> for Holdings {
    fn from_iter<I: IntoIterator<Item = (A, u32)>>(iter: I) -> Self {
        let mut h = Holdings::new();
        for (a, c) in iter {
            let a = a.into();
            h.add(&a, c);
        }
        h
    }
}

/// A prerequisite that is not satisfied by some holdings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingPrerequisite {
    pub prerequisite: AssetId,
    pub required_count: u32,
    pub have_count: u32,
}

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

/// Immutable creational dependency graph.
#[derive(Debug, Clone)]
pub struct CreationalGraph {
    assets: Vec<AssetType>,
    edges: Vec<CreationalEdge>,
    index: HashMap<AssetId, usize>,
    /// Product indices per prerequisite, over well-formed edges only.
    children: Vec<Vec<usize>>,
    /// Well-formed incoming edges per product, as indices into `edges`.
    incoming: Vec<Vec<usize>>,
    /// Transitive closure, one bit row per asset.
    closure: Vec<Vec<u64>>,
}

impl CreationalGraph {
    pub fn new(assets: Vec<AssetType>, edges: Vec<CreationalEdge>) -> Self {
        let mut index = HashMap::with_capacity(assets.len());
        for (i, a) in assets.iter().enumerate() {
            index.entry(a.id.clone()).or_insert(i);
        }
        let n = assets.len();
        let mut children = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (ei, e) in edges.iter().enumerate() {
            let (Some(&p), Some(&c)) = (index.get(&e.prerequisite), index.get(&e.product)) else {
                continue;
            };
            if p == c {
                continue;
            }
            if !children[p].contains(&c) {
                children[p].push(c);
            }
            incoming[c].push(ei);
        }
        let closure = transitive_closure(&children);
        CreationalGraph {
            assets,
            edges,
            index,
            children,
            incoming,
            closure,
        }
    }

    pub fn assets(&self) -> &[AssetType] {
        &self.assets
    }

    pub fn edges(&self) -> &[CreationalEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn contains(&self, asset: &str) -> bool {
        self.index.contains_key(asset)
    }

    pub fn asset(&self, id: &str) -> Result<&AssetType, GraphError> {
        self.index_of(id).map(|i| &self.assets[i])
    }

    pub(crate) fn index_of(&self, id: &str) -> Result<usize, GraphError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownAsset(AssetId::new(id)))
    }

    /// Asset ids in ascending order.
    pub fn sorted_ids(&self) -> Vec<AssetId> {
        let mut ids: Vec<AssetId> = self.index.keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Assets with no incoming well-formed edge, in declaration order.
    pub fn roots(&self) -> Vec<AssetId> {
        self.assets
            .iter()
            .enumerate()
            .filter(|(i, a)| self.index[&a.id] == *i && self.incoming[*i].is_empty())
            .map(|(_, a)| a.id.clone())
            .collect()
    }

    /// Well-formed edges whose product is `asset`.
    pub fn incoming_edges(&self, asset: &str) -> Result<Vec<&CreationalEdge>, GraphError> {
        let i = self.index_of(asset)?;
        Ok(self.incoming[i].iter().map(|&e| &self.edges[e]).collect())
    }

    /// Whether a directed path of creational edges leads from `ancestor` to
    /// `descendant`. Strict: an asset never reaches itself.
    pub fn reachable(&self, ancestor: &str, descendant: &str) -> Result<bool, GraphError> {
        let from = self.index_of(ancestor)?;
        let to = self.index_of(descendant)?;
        if from == to {
            return Ok(false);
        }
        let mut seen = vec![false; self.assets.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                if c == to {
                    return Ok(true);
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        Ok(false)
    }

    /// Every asset strictly reachable from `asset`, read off the precomputed
    /// transitive closure.
    pub fn descendants(&self, asset: &str) -> Result<BTreeSet<AssetId>, GraphError> {
        let i = self.index_of(asset)?;
        let row = &self.closure[i];
        Ok((0..self.assets.len())
            .filter(|&j| j != i && bit(row, j))
            .map(|j| self.assets[j].id.clone())
            .collect())
    }

    pub(crate) fn closure_contains(&self, from: usize, to: usize) -> bool {
        from != to && bit(&self.closure[from], to)
    }

    /// Prerequisites of `asset` that `holdings` does not satisfy.
    pub fn missing_prerequisites(
        &self,
        asset: &str,
        holdings: &Holdings,
    ) -> Result<Vec<MissingPrerequisite>, GraphError> {
        let i = self.index_of(asset)?;
        Ok(self.incoming[i]
            .iter()
            .map(|&e| &self.edges[e])
            .filter_map(|e| {
                let have = holdings.count(e.prerequisite.as_str());
                (have < e.required_count).then(|| MissingPrerequisite {
                    prerequisite: e.prerequisite.clone(),
                    required_count: e.required_count,
                    have_count: have,
                })
            })
            .collect())
    }

    pub fn can_create(&self, asset: &str, holdings: &Holdings) -> Result<bool, GraphError> {
        let i = self.index_of(asset)?;
        Ok(self.incoming[i].iter().all(|&e| {
            let e = &self.edges[e];
            holdings.count(e.prerequisite.as_str()) >= e.required_count
        }))
    }

    /// All assets creatable from `holdings`.
    pub fn creation_frontier(&self, holdings: &Holdings) -> BTreeSet<AssetId> {
        self.index
            .iter()
            .filter(|(id, _)| self.can_create(id.as_str(), holdings).unwrap_or(false))
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Kahn's algorithm over well-formed edges. `None` when a cycle remains.
    pub fn topological_order(&self) -> Option<Vec<AssetId>> {
        let (order, _) = self.kahn();
        (order.len() == self.assets.len()).then(|| order.into_iter().map(|i| self.assets[i].id.clone()).collect())
    }

    fn kahn(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.assets.len();
        let mut indeg = vec![0usize; n];
        for cs in &self.children {
            for &c in cs {
                indeg[c] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &c in &self.children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        (order, indeg)
    }

    /// Checks every graph invariant and reports each violation.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        let mut seen_ids = HashSet::new();
        for a in &self.assets {
            if !seen_ids.insert(&a.id) {
                report.error(Issue::DuplicateAsset { asset: a.id.clone() });
            }
        }

        let mut seen_pairs = HashSet::new();
        for e in &self.edges {
            let mut well_formed = true;
            for id in [&e.prerequisite, &e.product] {
                if !self.contains(id.as_str()) {
                    report.error(Issue::UnknownAsset { asset: id.clone() });
                    well_formed = false;
                }
            }
            if e.prerequisite == e.product {
                report.error(Issue::SelfEdge {
                    asset: e.prerequisite.clone(),
                });
                well_formed = false;
            }
            if e.required_count == 0 {
                report.error(Issue::ZeroRequiredCount {
                    prerequisite: e.prerequisite.clone(),
                    product: e.product.clone(),
                });
            }
            if well_formed && !seen_pairs.insert((&e.prerequisite, &e.product)) {
                report.error(Issue::DuplicateEdge {
                    prerequisite: e.prerequisite.clone(),
                    product: e.product.clone(),
                });
            }
        }

        let (order, indeg) = self.kahn();
        if order.len() < self.assets.len() {
            let remaining: Vec<bool> = indeg.iter().map(|&d| d > 0).collect();
            if let Some(path) = self.find_cycle(&remaining) {
                report.error(Issue::Cycle {
                    path: path.into_iter().map(|i| self.assets[i].id.clone()).collect(),
                });
            }
        }

        let roots: Vec<usize> = (0..self.assets.len())
            .filter(|&i| self.incoming[i].is_empty())
            .collect();
        if roots.is_empty() {
            report.warn(Issue::NoRoots);
        }
        for (i, a) in self.assets.iter().enumerate() {
            if self.index[&a.id] != i || self.incoming[i].is_empty() {
                continue;
            }
            if !roots.iter().any(|&r| self.closure_contains(r, i)) {
                report.warn(Issue::UnreachableFromRoot { asset: a.id.clone() });
            }
        }
        let components = self.weak_components();
        if components > 1 {
            report.warn(Issue::DisconnectedComponents { count: components });
        }
        report
    }

    /// Finds one cycle among nodes flagged in `within`, returned as a closed
    /// path whose first and last entries coincide.
    fn find_cycle(&self, within: &[bool]) -> Option<Vec<usize>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.assets.len()];
        for start in (0..self.assets.len()).filter(|&i| within[i]) {
            if state[start] != 0 {
                continue;
            }
            let mut path = vec![start];
            let mut cursor = vec![0usize];
            state[start] = 1;
            while let Some(&v) = path.last() {
                let k = cursor.last_mut().expect("cursor tracks path");
                if let Some(&c) = self.children[v].get(*k) {
                    *k += 1;
                    if !within[c] {
                        continue;
                    }
                    match state[c] {
                        0 => {
                            state[c] = 1;
                            path.push(c);
                            cursor.push(0);
                        }
                        1 => {
                            let at = path.iter().position(|&p| p == c).expect("on-stack node is on path");
                            let mut cycle = path[at..].to_vec();
                            cycle.push(c);
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    path.pop();
                    cursor.pop();
                }
            }
        }
        None
    }

    fn weak_components(&self) -> usize {
        let n = self.assets.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (p, cs) in self.children.iter().enumerate() {
            for &c in cs {
                let (a, b) = (find(&mut parent, p), find(&mut parent, c));
                parent[a] = b;
            }
        }
        let live: HashSet<usize> = self.index.values().copied().collect();
        live.into_iter()
            .map(|i| find(&mut parent, i))
            .collect::<HashSet<_>>()
            .len()
    }
}

fn bit(row: &[u64], j: usize) -> bool {
    row[j / 64] >> (j % 64) & 1 == 1
}

/// Warshall's algorithm on bit rows.
fn transitive_closure(children: &[Vec<usize>]) -> Vec<Vec<u64>> {
    let n = children.len();
    let words = n.div_ceil(64);
    let mut rows = vec![vec![0u64; words]; n];
    for (i, cs) in children.iter().enumerate() {
        for &c in cs {
            rows[i][c / 64] |= 1 << (c % 64);
        }
    }
    for k in 0..n {
        let via = rows[k].clone();
        for row in rows.iter_mut() {
            if bit(row, k) {
                for (w, v) in row.iter_mut().zip(&via) {
                    *w |= v;
                }
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> CreationalGraph {
        CreationalGraph::new(
            vec![
                AssetType::new("A", "A"),
                AssetType::new("B", "B"),
                AssetType::new("C", "C"),
            ],
            vec![CreationalEdge::new("A", "B", 1), CreationalEdge::new("B", "C", 5)],
        )
    }

    #[test]
    fn two_cycle_reports_full_path() {
        let g = CreationalGraph::new(
            vec![AssetType::new("A", "A"), AssetType::new("B", "B")],
            vec![CreationalEdge::new("A", "B", 1), CreationalEdge::new("B", "A", 1)],
        );
        let report = g.validate();
        assert_eq!(
            report.errors,
            vec![Issue::Cycle {
                path: vec!["A".into(), "B".into(), "A".into()]
            }]
        );
        assert!(report.warnings.contains(&Issue::NoRoots));
        assert!(g.topological_order().is_none());
    }

    #[test]
    fn empty_graph_warns_no_roots() {
        let report = CreationalGraph::new(vec![], vec![]).validate();
        assert!(report.errors.is_empty());
        assert_eq!(report.warnings, vec![Issue::NoRoots]);
    }

    #[test]
    fn malformed_edges_are_reported() {
        let g = CreationalGraph::new(
            vec![
                AssetType::new("A", "A"),
                AssetType::new("B", "B"),
                AssetType::new("A", "again"),
            ],
            vec![
                CreationalEdge::new("A", "B", 1),
                CreationalEdge::new("A", "B", 2),
                CreationalEdge::new("A", "A", 1),
                CreationalEdge::new("A", "Z", 1),
                CreationalEdge::new("B", "A", 0),
            ],
        );
        let errors = g.validate().errors;
        assert!(errors.contains(&Issue::DuplicateAsset { asset: "A".into() }));
        assert!(errors.contains(&Issue::DuplicateEdge {
            prerequisite: "A".into(),
            product: "B".into()
        }));
        assert!(errors.contains(&Issue::SelfEdge { asset: "A".into() }));
        assert!(errors.contains(&Issue::UnknownAsset { asset: "Z".into() }));
        assert!(errors.contains(&Issue::ZeroRequiredCount {
            prerequisite: "B".into(),
            product: "A".into()
        }));
    }

    #[test]
    fn disconnected_assets_warn_only() {
        let g = CreationalGraph::new(vec![AssetType::new("A", "A"), AssetType::new("B", "B")], vec![]);
        let report = g.validate();
        assert!(report.is_clean());
        assert_eq!(report.warnings, vec![Issue::DisconnectedComponents { count: 2 }]);
    }

    #[test]
    fn strict_reachability_and_unknown_ids() {
        let g = chain();
        assert!(g.reachable("A", "C").unwrap());
        assert!(!g.reachable("C", "A").unwrap());
        assert!(!g.reachable("B", "B").unwrap());
        assert_eq!(g.reachable("A", "Q"), Err(GraphError::UnknownAsset("Q".into())));
        assert!(g.descendants("Q").is_err());
        assert!(g.can_create("Q", &Holdings::new()).is_err());
    }

    #[test]
    fn required_count_gates_creation() {
        let g = chain();
        let four: Holdings = [("A", 1), ("B", 4)].into_iter().collect();
        assert!(!g.can_create("C", &four).unwrap());
        assert_eq!(
            g.missing_prerequisites("C", &four).unwrap(),
            vec![MissingPrerequisite {
                prerequisite: "B".into(),
                required_count: 5,
                have_count: 4
            }]
        );
        let five: Holdings = [("A", 1), ("B", 5)].into_iter().collect();
        assert!(g.can_create("C", &five).unwrap());
        assert_eq!(g.creation_frontier(&five).len(), 3);
    }

    #[test]
    fn holdings_never_go_negative() {
        let mut h: Holdings = [("A", 2)].into_iter().collect();
        assert!(!h.remove(&"A".into(), 3));
        assert_eq!(h.count("A"), 2);
        assert!(h.remove(&"A".into(), 2));
        assert!(h.is_empty());
    }
}
