//! d-separation and path classification.
//!
//! Two independent routes answer a d-separation query: a linear-time
//! reachability sweep ([`is_d_separated`]) and exhaustive simple-path
//! enumeration ([`is_d_separated_by_paths`]). Tests require them to agree.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, VertexSet};

/// Default cap on the number of simple paths a single enumeration may produce.
pub const DEFAULT_PATH_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    /// The edge points toward the next vertex on the path.
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathKind {
    Backdoor,
    Mediator,
    Other,
}

/// A simple path in the skeleton with the orientation of each edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub vertices: Vec<NodeId>,
    pub directions: Vec<Direction>,
}

impl Path {
    pub fn source(&self) -> NodeId {
        self.vertices[0]
    }

    pub fn target(&self) -> NodeId {
        *self.vertices.last().unwrap()
    }

    pub fn interior(&self) -> &[NodeId] {
        let n = self.vertices.len();
        if n <= 2 {
            &[]
        } else {
            &self.vertices[1..n - 1]
        }
    }

    /// Whether interior vertex at position `i` (1 ≤ i < len-1) is a collider.
    pub fn is_collider_at(&self, i: usize) -> bool {
        self.directions[i - 1] == Direction::Forward && self.directions[i] == Direction::Backward
    }

    pub fn kind(&self) -> PathKind {
        match self.directions.first() {
            Some(Direction::Backward) => PathKind::Backdoor,
            Some(Direction::Forward)
                if self.vertices.len() > 2
                    && self.directions.iter().all(|&d| d == Direction::Forward) =>
            {
                PathKind::Mediator
            }
            _ => PathKind::Other,
        }
    }

    /// Renders the path as e.g. `A <- G2 -> Y`.
    pub fn render(&self, g: &Dag) -> String {
        let mut s = g.name(self.vertices[0]).to_string();
        for (v, d) in self.vertices[1..].iter().zip(&self.directions) {
            s.push_str(match d {
                Direction::Forward => " -> ",
                Direction::Backward => " <- ",
            });
            s.push_str(g.name(*v));
        }
        s
    }
}

/// All simple paths between `x` and `y` in the skeleton, optionally capped in
/// length (number of edges). Order is deterministic: depth-first with
/// neighbours visited by ascending index.
pub fn enumerate_paths(g: &Dag, x: NodeId, y: NodeId, max_len: Option<usize>) -> Result<Vec<Path>> {
    enumerate_paths_capped(g, x, y, max_len, DEFAULT_PATH_CAP)
}

pub fn enumerate_paths_capped(
    g: &Dag,
    x: NodeId,
    y: NodeId,
    max_len: Option<usize>,
    cap: usize,
) -> Result<Vec<Path>> {
    if x == y {
        return Err(Error::SameEndpoints);
    }
    g.parents(x)?;
    g.parents(y)?;
    let mut out = Vec::new();
    let mut on_path = vec![false; g.len()];
    let mut verts = vec![x];
    let mut dirs = Vec::new();
    on_path[x.0] = true;
    walk(
        g,
        y,
        max_len,
        cap,
        &mut on_path,
        &mut verts,
        &mut dirs,
        &mut out,
        false,
    )?;
    Ok(out)
}

/// Directed paths from `x` to `y` only.
fn enumerate_directed(g: &Dag, x: NodeId, y: NodeId) -> Result<Vec<Path>> {
    if x == y {
        return Err(Error::SameEndpoints);
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; g.len()];
    let mut verts = vec![x];
    let mut dirs = Vec::new();
    on_path[x.0] = true;
    walk(
        g,
        y,
        None,
        DEFAULT_PATH_CAP,
        &mut on_path,
        &mut verts,
        &mut dirs,
        &mut out,
        true,
    )?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    g: &Dag,
    target: NodeId,
    max_len: Option<usize>,
    cap: usize,
    on_path: &mut [bool],
    verts: &mut Vec<NodeId>,
    dirs: &mut Vec<Direction>,
    out: &mut Vec<Path>,
    directed_only: bool,
) -> Result<()> {
    let v = *verts.last().unwrap();
    if v == target {
        if out.len() >= cap {
            return Err(Error::PathBudgetExceeded(cap));
        }
        out.push(Path {
            vertices: verts.clone(),
            directions: dirs.clone(),
        });
        return Ok(());
    }
    if max_len.is_some_and(|m| dirs.len() >= m) {
        return Ok(());
    }
    // merge children (Forward) and parents (Backward) by ascending index
    let mut next: Vec<(NodeId, Direction)> = g
        .child_ids(v)
        .iter()
        .map(|&c| (c, Direction::Forward))
        .collect();
    if !directed_only {
        next.extend(g.parent_ids(v).iter().map(|&p| (p, Direction::Backward)));
        next.sort_by_key(|&(w, _)| w);
    }
    for (w, d) in next {
        if on_path[w.0] {
            continue;
        }
        on_path[w.0] = true;
        verts.push(w);
        dirs.push(d);
        let r = walk(
            g,
            target,
            max_len,
            cap,
            on_path,
            verts,
            dirs,
            out,
            directed_only,
        );
        verts.pop();
        dirs.pop();
        on_path[w.0] = false;
        r?;
    }
    Ok(())
}

/// Blocking rule on a single path: some interior vertex is a conditioned
/// non-collider, or a collider with neither itself nor a descendant in `z`.
pub fn is_path_blocked(g: &Dag, p: &Path, z: &VertexSet) -> Result<bool> {
    for end in [p.source(), p.target()] {
        if z.contains(end) {
            return Err(Error::EndpointInConditioningSet(g.name(end).to_string()));
        }
    }
    Ok(path_blocked(g, p, z))
}

fn path_blocked(g: &Dag, p: &Path, z: &VertexSet) -> bool {
    (1..p.vertices.len().saturating_sub(1)).any(|i| {
        let v = p.vertices[i];
        if p.is_collider_at(i) {
            !z.contains(v)
                && g.descendants_of_set(&VertexSet::singleton(v))
                    .is_disjoint(z)
        } else {
            z.contains(v)
        }
    })
}

/// Directed paths contain no colliders, so blocking reduces to an interior
/// vertex being conditioned on.
pub fn is_mediator_path_blocked(p: &Path, z: &VertexSet) -> bool {
    p.interior().iter().any(|&v| z.contains(v))
}

fn check_disjoint(g: &Dag, xs: &VertexSet, ys: &VertexSet, z: &VertexSet) -> Result<()> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptySet);
    }
    for (a, b) in [(xs, ys), (xs, z), (ys, z)] {
        if let Some(v) = a.first_common(b) {
            return Err(Error::SetsOverlap(g.name(v).to_string()));
        }
    }
    Ok(())
}

/// Reachability ("Bayes ball") d-separation test, linear in the graph size.
pub fn is_d_separated(g: &Dag, xs: &VertexSet, ys: &VertexSet, z: &VertexSet) -> Result<bool> {
    check_disjoint(g, xs, ys, z)?;
    let reach = reachable(g, xs, z);
    Ok(ys.iter().all(|y| !reach[y.0]))
}

/// Vertices connected to `xs` by an active trail given `z`.
fn reachable(g: &Dag, xs: &VertexSet, z: &VertexSet) -> Vec<bool> {
    let n = g.len();
    let anc_z = g.ancestral_closure(z);
    // state index: 2*v + 0 for "arrived from a child" (moving up),
    //              2*v + 1 for "arrived from a parent" (moving down)
    let mut visited = vec![false; 2 * n];
    let mut reach = vec![false; n];
    let mut stack: Vec<(NodeId, bool)> = xs.iter().map(|x| (x, false)).collect();
    while let Some((v, down)) = stack.pop() {
        let s = 2 * v.0 + usize::from(down);
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let in_z = z.contains(v);
        if !in_z {
            reach[v.0] = true;
        }
        if !down {
            if !in_z {
                stack.extend(g.parent_ids(v).iter().map(|&p| (p, false)));
                stack.extend(g.child_ids(v).iter().map(|&c| (c, true)));
            }
        } else {
            if !in_z {
                stack.extend(g.child_ids(v).iter().map(|&c| (c, true)));
            }
            if anc_z.contains(v) {
                stack.extend(g.parent_ids(v).iter().map(|&p| (p, false)));
            }
        }
    }
    reach
}

/// Path-enumeration d-separation test. Exponential; used as an oracle.
pub fn is_d_separated_by_paths(
    g: &Dag,
    xs: &VertexSet,
    ys: &VertexSet,
    z: &VertexSet,
) -> Result<bool> {
    check_disjoint(g, xs, ys, z)?;
    Ok(first_open_path(g, xs, ys, z)?.is_none())
}

/// First path (in enumeration order) between the two sets that `z` leaves open.
pub fn first_open_path(
    g: &Dag,
    xs: &VertexSet,
    ys: &VertexSet,
    z: &VertexSet,
) -> Result<Option<Path>> {
    for x in xs {
        for y in ys {
            for p in enumerate_paths(g, x, y, None)? {
                if !path_blocked(g, &p, z) {
                    return Ok(Some(p));
                }
            }
        }
    }
    Ok(None)
}

/// Simple paths from `x` to `y` whose first edge points into `x`.
pub fn backdoor_paths(g: &Dag, x: NodeId, y: NodeId) -> Result<Vec<Path>> {
    Ok(enumerate_paths(g, x, y, None)?
        .into_iter()
        .filter(|p| p.kind() == PathKind::Backdoor)
        .collect())
}

/// Directed paths from `a` to `y` with at least one intermediate vertex.
pub fn mediator_paths(g: &Dag, a: NodeId, y: NodeId) -> Result<Vec<Path>> {
    Ok(enumerate_directed(g, a, y)?
        .into_iter()
        .filter(|p| p.vertices.len() > 2)
        .collect())
}
