//! Dominator trees over the invitation graph.
//!
//! Vertex `a` dominates `i` when every owner-to-`i` path passes through `a`.
//! The dominated set of `a` is then the subtree of `a` in the dominator tree,
//! which we store as a contiguous preorder interval.
//!
//! The tree is built with the iterative data-flow algorithm of Cooper,
//! Harvey and Kennedy over a reverse postorder. For the graph sizes this crate
//! works with it is faster in practice than Lengauer-Tarjan.

use std::collections::{BTreeSet, VecDeque};

use crate::error::Result;
use crate::graph::GeneratedGraph;
use crate::network::AgentId;

const UNDEF: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DomTree {
    /// Immediate dominator; the root maps to itself.
    pub idom: Vec<usize>,
    /// Dominator-tree preorder.
    pub preorder: Vec<usize>,
    /// `preorder[tin[v]..tout[v]]` is the dominated set of `v`.
    pub tin: Vec<usize>,
    pub tout: Vec<usize>,
}

impl DomTree {
    /// Every vertex in `succ` must be reachable from `root`.
    pub fn compute(succ: &[Vec<usize>], root: usize) -> DomTree {
        let n = succ.len();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, outs) in succ.iter().enumerate() {
            for &v in outs {
                pred[v].push(u);
            }
        }

        // Iterative DFS postorder.
        let mut post_num = vec![UNDEF; n];
        let mut postorder = Vec::with_capacity(n);
        let mut visited = vec![false; n];
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        visited[root] = true;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < succ[u].len() {
                let v = succ[u][*next];
                *next += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                post_num[u] = postorder.len();
                postorder.push(u);
                stack.pop();
            }
        }
        debug_assert_eq!(postorder.len(), n, "unreachable vertex in dominator input");

        let mut idom = vec![UNDEF; n];
        idom[root] = root;
        let mut changed = true;
        while changed {
            changed = false;
            for &b in postorder.iter().rev() {
                if b == root {
                    continue;
                }
                let mut new_idom = UNDEF;
                for &p in &pred[b] {
                    if idom[p] == UNDEF {
                        continue;
                    }
                    new_idom = if new_idom == UNDEF { p } else { intersect(&idom, &post_num, p, new_idom) };
                }
                if idom[b] != new_idom {
                    idom[b] = new_idom;
                    changed = true;
                }
            }
        }

        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            if v != root {
                children[idom[v]].push(v);
            }
        }
        let mut preorder = Vec::with_capacity(n);
        let mut tin = vec![0; n];
        let mut tout = vec![0; n];
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        tin[root] = 0;
        preorder.push(root);
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < children[u].len() {
                let v = children[u][*next];
                *next += 1;
                tin[v] = preorder.len();
                preorder.push(v);
                stack.push((v, 0));
            } else {
                tout[u] = preorder.len();
                stack.pop();
            }
        }
        DomTree { idom, preorder, tin, tout }
    }

    pub fn dominates(&self, a: usize, v: usize) -> bool {
        self.tin[a] <= self.tin[v] && self.tin[v] < self.tout[a]
    }

    pub fn subtree(&self, a: usize) -> &[usize] {
        &self.preorder[self.tin[a]..self.tout[a]]
    }

    pub fn subtree_size(&self, a: usize) -> usize {
        self.tout[a] - self.tin[a]
    }
}

fn intersect(idom: &[usize], post_num: &[usize], mut a: usize, mut b: usize) -> usize {
    while a != b {
        while post_num[a] < post_num[b] {
            a = idom[a];
        }
        while post_num[b] < post_num[a] {
            b = idom[b];
        }
    }
    a
}

/// Reference implementation of [`GeneratedGraph::dominated_set`]: deletes `i`
/// and searches from the owner. Quadratic when applied to every vertex;
/// intended for cross-checking.
pub fn oracle_dominated_set(g: &GeneratedGraph, i: &AgentId) -> Result<BTreeSet<AgentId>> {
    let target = g.require_bidder(i)?;
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    seen[target] = true;
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in g.out_edges(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    let mut out: BTreeSet<AgentId> = (0..n).filter(|&v| !seen[v]).map(|v| g.id(v).clone()).collect();
    out.insert(i.clone());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond() {
        // 0 -> 1, 0 -> 2, 1 -> 3, 2 -> 3, 3 -> 4
        let succ = vec![vec![1, 2], vec![3], vec![3], vec![4], vec![]];
        let t = DomTree::compute(&succ, 0);
        assert_eq!(t.idom, vec![0, 0, 0, 0, 3]);
        assert!(t.dominates(3, 4));
        assert!(!t.dominates(1, 3));
        assert_eq!(t.subtree_size(0), 5);
        assert_eq!(t.subtree_size(3), 2);
        assert_eq!(t.subtree_size(1), 1);
    }

    #[test]
    fn chain_with_back_edges() {
        let succ = vec![vec![1], vec![2, 0], vec![3, 1], vec![2]];
        let t = DomTree::compute(&succ, 0);
        assert_eq!(t.idom, vec![0, 0, 1, 2]);
        let mut sub: Vec<usize> = t.subtree(1).to_vec();
        sub.sort();
        assert_eq!(sub, vec![1, 2, 3]);
    }
}
