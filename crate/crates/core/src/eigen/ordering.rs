//! Fill-reducing ordering: approximate minimum degree on the quotient graph
//! with element absorption.
//!
//! The optional guard mask handles saddle-point blocks with a zero diagonal:
//! a guarded node (a pressure dof) only becomes eligible for elimination once
//! at least one of its unguarded neighbors has been eliminated, which makes
//! its Schur-complement pivot nonzero for a definite leading block.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Returns `perm` with `perm[new] = old`.
pub fn min_degree_ordering(adjacency: &[Vec<usize>], guarded: Option<&[bool]>) -> Vec<usize> {
    let n = adjacency.len();
    if n == 0 {
        return Vec::new();
    }
    let mut node_adj: Vec<Vec<usize>> = adjacency.to_vec();
    let mut node_elems: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elems: Vec<Vec<usize>> = Vec::new();
    let mut alive = vec![true; n];
    let mut eligible: Vec<bool> = match guarded {
        Some(g) => g.iter().map(|&x| !x).collect(),
        None => vec![true; n],
    };
    // reverse guard lists: eliminating u enables its guarded neighbors
    let mut enables: Vec<Vec<usize>> = vec![Vec::new(); n];
    if let Some(g) = guarded {
        for v in 0..n {
            if g[v] {
                for &u in &adjacency[v] {
                    if !g[u] {
                        enables[u].push(v);
                    }
                }
            }
        }
    }

    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    let mut degree = vec![0usize; n];
    let mut deg_mark = vec![usize::MAX; n];
    let mut deg_stamp = 0usize;
    // exact external degree: |node_adj ∪ (∪ adjacent element vertex sets)| \ v
    let mut exact_degree = |v: usize,
                            alive: &[bool],
                            node_adj: &[Vec<usize>],
                            node_elems: &[Vec<usize>],
                            elems: &[Vec<usize>]|
     -> usize {
        deg_stamp += 1;
        deg_mark[v] = deg_stamp;
        let mut d = 0usize;
        for &u in &node_adj[v] {
            if alive[u] && deg_mark[u] != deg_stamp {
                deg_mark[u] = deg_stamp;
                d += 1;
            }
        }
        for &e in &node_elems[v] {
            for &u in &elems[e] {
                if alive[u] && deg_mark[u] != deg_stamp {
                    deg_mark[u] = deg_stamp;
                    d += 1;
                }
            }
        }
        d
    };
    for v in 0..n {
        degree[v] = exact_degree(v, &alive, &node_adj, &node_elems, &elems);
        if eligible[v] {
            heap.push(Reverse((degree[v], v)));
        }
    }

    let mut perm = Vec::with_capacity(n);
    let mut mark = vec![usize::MAX; n];
    let mut stamp = 0usize;

    while perm.len() < n {
        let p = loop {
            match heap.pop() {
                Some(Reverse((d, v))) => {
                    if alive[v] && eligible[v] && d == degree[v] {
                        break Some(v);
                    }
                }
                None => break None,
            }
        };
        let p = match p {
            Some(p) => p,
            None => {
                // only guarded nodes left: release them in index order
                let mut released = false;
                for v in 0..n {
                    if alive[v] && !eligible[v] {
                        eligible[v] = true;
                        heap.push(Reverse((degree[v], v)));
                        released = true;
                    }
                }
                if !released {
                    break;
                }
                continue;
            }
        };

        alive[p] = false;
        perm.push(p);
        for &v in &enables[p] {
            if alive[v] && !eligible[v] {
                eligible[v] = true;
                heap.push(Reverse((degree[v], v)));
            }
        }

        // new element: alive neighbors of p through nodes and elements
        stamp += 1;
        let mut new_elem: Vec<usize> = Vec::new();
        for &v in &node_adj[p] {
            if alive[v] && mark[v] != stamp {
                mark[v] = stamp;
                new_elem.push(v);
            }
        }
        let absorbed: Vec<usize> = node_elems[p].clone();
        for &e in &absorbed {
            for &v in &elems[e] {
                if alive[v] && mark[v] != stamp {
                    mark[v] = stamp;
                    new_elem.push(v);
                }
            }
            elems[e].clear();
        }
        new_elem.sort_unstable();
        let eid = elems.len();
        elems.push(new_elem.clone());

        for &v in &new_elem {
            // drop p and absorbed elements; connections inside the element are
            // represented by the element itself
            node_adj[v].retain(|&u| alive[u] && mark[u] != stamp);
            node_elems[v].retain(|e| !absorbed.contains(e));
            node_elems[v].push(eid);
        }
        for &v in &new_elem {
            degree[v] = exact_degree(v, &alive, &node_adj, &node_elems, &elems);
            if eligible[v] {
                heap.push(Reverse((degree[v], v)));
            }
        }
    }
    perm
}

/// Lower-triangle nonzero count of the LDLᵀ factor for a given ordering
/// (row-count symbolic elimination; used to sanity-check ordering quality).
pub fn symbolic_fill(adjacency: &[Vec<usize>], perm: &[usize]) -> usize {
    let n = adjacency.len();
    let mut inv = vec![0usize; n];
    for (k, &old) in perm.iter().enumerate() {
        inv[old] = k;
    }
    let mut parent = vec![usize::MAX; n];
    let mut mark = vec![usize::MAX; n];
    let mut count = 0usize;
    for k in 0..n {
        mark[k] = k;
        for &u in &adjacency[perm[k]] {
            let mut i = inv[u];
            if i >= k {
                continue;
            }
            // row k of L contains every node on the etree path from i to k
            while mark[i] != k {
                mark[i] = k;
                count += 1;
                if parent[i] == usize::MAX {
                    parent[i] = k;
                    break;
                }
                i = parent[i];
            }
        }
    }
    count + n
}
