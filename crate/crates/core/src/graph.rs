//! Immutable DAG over named vertices with ancestral queries.
//!
//! Vertices are addressed by name at the API surface and by a dense
//! [`NodeId`] internally. Ancestors and descendants are strict: a vertex is
//! never its own ancestor or descendant.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Dense handle of a vertex inside one [`Dag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Set of vertices with ascending-index iteration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet(BTreeSet<NodeId>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: NodeId) -> Self {
        Self(BTreeSet::from([v]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.contains(&v)
    }

    pub fn insert(&mut self, v: NodeId) -> bool {
        self.0.insert(v)
    }

    pub fn remove(&mut self, v: NodeId) -> bool {
        self.0.remove(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        Self(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        Self(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        Self(self.0.difference(&other.0).copied().collect())
    }

    pub fn without(&self, v: NodeId) -> VertexSet {
        let mut out = self.clone();
        out.remove(v);
        out
    }

    pub fn with(&self, v: NodeId) -> VertexSet {
        let mut out = self.clone();
        out.insert(v);
        out
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn first_common(&self, other: &VertexSet) -> Option<NodeId> {
        self.0.intersection(&other.0).next().copied()
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.0.iter().copied().collect()
    }
}

impl FromIterator<NodeId> for VertexSet {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = NodeId;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, NodeId>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

pub(crate) fn validate_name(name: &str) -> Result<()> {
    let bad = name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || c == ',' || c == ';' || c == '#')
        || name.contains("->");
    if bad {
        return Err(Error::InvalidName(name.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    edges: BTreeSet<(NodeId, NodeId)>,
    topo: Vec<NodeId>,
}

impl Dag {
    /// Builds and validates a DAG. Nodes keep the order given in `nodes`.
    pub fn build<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Dag> {
        let mut names = Vec::with_capacity(nodes.len());
        let mut index = HashMap::new();
        for n in nodes {
            let n = n.as_ref();
            validate_name(n)?;
            if index.insert(n.to_string(), NodeId(names.len())).is_some() {
                return Err(Error::DuplicateNode(n.to_string()));
            }
            names.push(n.to_string());
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::UnknownNode(n.to_string()))
        };
        let mut parents = vec![Vec::new(); names.len()];
        let mut children = vec![Vec::new(); names.len()];
        let mut edge_set = BTreeSet::new();
        for (u, v) in edges {
            let (pu, cv) = (lookup(u.as_ref())?, lookup(v.as_ref())?);
            if pu == cv {
                return Err(Error::Cycle(vec![names[pu.0].clone(), names[pu.0].clone()]));
            }
            if !edge_set.insert((pu, cv)) {
                return Err(Error::DuplicateEdge(
                    names[pu.0].clone(),
                    names[cv.0].clone(),
                ));
            }
            parents[cv.0].push(pu);
            children[pu.0].push(cv);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort();
        }
        let mut dag = Dag {
            names,
            index,
            parents,
            children,
            edges: edge_set,
            topo: Vec::new(),
        };
        dag.topo = dag.kahn().ok_or_else(|| Error::Cycle(dag.find_cycle()))?;
        Ok(dag)
    }

    /// Kahn's algorithm with smallest-index tie-break.
    fn kahn(&self) -> Option<Vec<NodeId>> {
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<NodeId> = (0..self.len())
            .map(NodeId)
            .filter(|v| indeg[v.0] == 0)
            .collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &self.children[v.0] {
                indeg[c.0] -= 1;
                if indeg[c.0] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    fn find_cycle(&self) -> Vec<String> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.len()];
        let mut stack: Vec<NodeId> = Vec::new();
        fn dfs(
            g: &Dag,
            v: NodeId,
            state: &mut [u8],
            stack: &mut Vec<NodeId>,
        ) -> Option<Vec<NodeId>> {
            state[v.0] = 1;
            stack.push(v);
            for &c in &g.children[v.0] {
                if state[c.0] == 1 {
                    let start = stack.iter().position(|&s| s == c).unwrap();
                    let mut cyc = stack[start..].to_vec();
                    cyc.push(c);
                    return Some(cyc);
                }
                if state[c.0] == 0 {
                    if let Some(cyc) = dfs(g, c, state, stack) {
                        return Some(cyc);
                    }
                }
            }
            stack.pop();
            state[v.0] = 2;
            None
        }
        for v in 0..self.len() {
            if state[v] == 0 {
                if let Some(cyc) = dfs(self, NodeId(v), &mut state, &mut stack) {
                    return cyc.into_iter().map(|n| self.names[n.0].clone()).collect();
                }
            }
        }
        Vec::new()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.names.len()).map(NodeId)
    }

    pub fn all(&self) -> VertexSet {
        self.nodes().collect()
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Result<NodeId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    /// Resolves a list of names into a set.
    pub fn set<S: AsRef<str>>(&self, names: &[S]) -> Result<VertexSet> {
        names.iter().map(|n| self.id(n.as_ref())).collect()
    }

    pub fn set_names(&self, set: &VertexSet) -> Vec<String> {
        set.iter().map(|v| self.names[v.0].clone()).collect()
    }

    pub fn fmt_set(&self, set: &VertexSet) -> String {
        format!("{{{}}}", self.set_names(set).join(", "))
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.has_edge(u, v) || self.has_edge(v, u)
    }

    pub fn parent_ids(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v.0]
    }

    pub fn child_ids(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.0]
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if v.0 < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(format!("#{}", v.0)))
        }
    }

    pub fn parents(&self, v: NodeId) -> Result<VertexSet> {
        self.check(v)?;
        Ok(self.parents[v.0].iter().copied().collect())
    }

    pub fn children(&self, v: NodeId) -> Result<VertexSet> {
        self.check(v)?;
        Ok(self.children[v.0].iter().copied().collect())
    }

    pub fn ancestors(&self, v: NodeId) -> Result<VertexSet> {
        self.check(v)?;
        Ok(self.reach(&[v], |u| &self.parents[u.0]))
    }

    pub fn descendants(&self, v: NodeId) -> Result<VertexSet> {
        self.check(v)?;
        Ok(self.reach(&[v], |u| &self.children[u.0]))
    }

    pub fn non_descendants(&self, v: NodeId) -> Result<VertexSet> {
        let de = self.descendants(v)?;
        Ok(self
            .nodes()
            .filter(|&u| u != v && !de.contains(u))
            .collect())
    }

    /// Strict descendants of a set: vertices reachable by a nonempty directed
    /// path from some member.
    pub fn descendants_of_set(&self, set: &VertexSet) -> VertexSet {
        self.reach(&set.to_vec(), |u| &self.children[u.0])
    }

    /// Members of `set` together with all their ancestors.
    pub fn ancestral_closure(&self, set: &VertexSet) -> VertexSet {
        self.reach(&set.to_vec(), |u| &self.parents[u.0]).union(set)
    }

    fn reach<'a>(&'a self, start: &[NodeId], next: impl Fn(NodeId) -> &'a [NodeId]) -> VertexSet {
        let mut seen = vec![false; self.len()];
        let mut queue: VecDeque<NodeId> = start.iter().copied().collect();
        let mut out = VertexSet::new();
        while let Some(u) = queue.pop_front() {
            for &w in next(u) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    out.insert(w);
                    queue.push_back(w);
                }
            }
        }
        out
    }

    /// Deterministic topological order (smallest index first among ready nodes).
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }
}

impl fmt::Display for Dag {
    /// Writes the DAG in the line-based text format. Lines are ordered so
    /// that nodes first appear in index order, which makes parsing the
    /// output reproduce this DAG exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut seen = vec![false; self.len()];
        let mut written = BTreeSet::new();
        for v in self.nodes() {
            if seen[v.0] {
                continue;
            }
            match self.parents[v.0].iter().find(|p| seen[p.0]) {
                Some(&u) => {
                    writeln!(f, "{} -> {}", self.name(u), self.name(v))?;
                    written.insert((u, v));
                }
                None => writeln!(f, "{}", self.name(v))?,
            }
            seen[v.0] = true;
        }
        for e in self.edges.difference(&written) {
            writeln!(f, "{} -> {}", self.name(e.0), self.name(e.1))?;
        }
        Ok(())
    }
}
