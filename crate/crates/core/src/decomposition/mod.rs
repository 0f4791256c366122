//! Tree decompositions and buffered cop decompositions: data types,
//! literal property validators and a heuristic cop-decomposition builder.

mod cop;
mod tree;

pub use cop::{
    heuristic_cop_decomposition, validate_buffered_cop_decomposition, BcdReport, BcdViolation,
    BufferedCopDecomposition, CopAchieved, CopParams, Supernode,
};
pub use tree::{validate_tree_decomposition, TdReport, TdViolation, TreeDecomposition};

/// Parent/child structure of a rooted tree, with Euler-tour intervals for
/// O(1) ancestor queries.
#[derive(Debug, Clone)]
pub struct RootedTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub depth: Vec<usize>,
    /// Nodes in breadth-first order from the root.
    pub bfs: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
}

impl RootedTree {
    /// Builds the rooted tree on `0..nodes`; fails unless `edges` form a
    /// single tree.
    pub fn from_edges(nodes: usize, edges: &[(usize, usize)], root: usize) -> Result<Self, String> {
        if nodes == 0 {
            return Err("tree has no nodes".into());
        }
        if root >= nodes {
            return Err(format!("root {root} out of range"));
        }
        if edges.len() + 1 != nodes {
            return Err(format!(
                "{} nodes need {} tree edges, found {}",
                nodes,
                nodes - 1,
                edges.len()
            ));
        }
        let mut adj = vec![Vec::new(); nodes];
        for &(a, b) in edges {
            if a >= nodes || b >= nodes {
                return Err(format!("tree edge {a}-{b} out of range"));
            }
            if a == b {
                return Err(format!("tree edge {a}-{b} is a loop"));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let mut parent = vec![None; nodes];
        let mut depth = vec![0; nodes];
        let mut seen = vec![false; nodes];
        let mut bfs = vec![root];
        seen[root] = true;
        let mut head = 0;
        while head < bfs.len() {
            let u = bfs[head];
            head += 1;
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    depth[w] = depth[u] + 1;
                    bfs.push(w);
                }
            }
        }
        if bfs.len() != nodes {
            return Err("tree is disconnected (or has a cycle)".into());
        }
        Ok(Self::from_parents(root, parent, depth, bfs))
    }

    /// Builds from a parent array; fails on cycles or several roots.
    pub fn from_parent_array(parent: &[Option<usize>]) -> Result<Self, String> {
        let n = parent.len();
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(format!("expected exactly one root, found {}", roots.len()));
        }
        let edges: Vec<(usize, usize)> = parent
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (p, i)))
            .collect();
        if edges.iter().any(|&(p, _)| p >= n) {
            return Err("parent out of range".into());
        }
        let t = Self::from_edges(n, &edges, roots[0])?;
        if t.parent != parent {
            return Err("parent array is not consistent with a rooted tree".into());
        }
        Ok(t)
    }

    fn from_parents(root: usize, parent: Vec<Option<usize>>, depth: Vec<usize>, bfs: Vec<usize>) -> Self {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        for &v in &bfs {
            if let Some(p) = parent[v] {
                children[p].push(v);
            }
        }
        let mut tin = vec![0; n];
        let mut tout = vec![0; n];
        let mut clock = 0;
        let mut stack = vec![(root, false)];
        while let Some((u, exiting)) = stack.pop() {
            if exiting {
                tout[u] = clock;
                continue;
            }
            tin[u] = clock;
            clock += 1;
            stack.push((u, true));
            for &c in children[u].iter().rev() {
                stack.push((c, false));
            }
        }
        RootedTree {
            root,
            parent,
            children,
            depth,
            bfs,
            tin,
            tout,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// `a` is an ancestor of `b` (reflexive).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.tin[a] <= self.tin[b] && self.tout[b] <= self.tout[a]
    }

    /// Ancestors of `v` from the root down to `v` itself.
    pub fn path_from_root(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// `v` followed by all its descendants in preorder.
    pub fn subtree(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children[u].iter().rev());
        }
        out
    }
}
