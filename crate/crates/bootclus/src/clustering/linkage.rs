//! Agglomerative hierarchical clustering with average or complete linkage,
//! and dendrogram cutting.
//!
//! Clusters are merged by recomputing inter-cluster dissimilarities from the
//! member lists at every step (O(n^3) overall), which keeps the arithmetic
//! simple and exactly reproducible at desk scale. Ties are broken toward the
//! earliest pair in cluster-creation order.

use serde::{Deserialize, Serialize};

use crate::data::{DissimilarityMatrix, Partition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Average,
    Complete,
}

/// One agglomeration step. Cluster ids 0..n are the leaves; the cluster
/// created at step s gets id n + s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

/// Stepwise dendrogram: n - 1 merges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramModel {
    pub n: usize,
    pub merges: Vec<Merge>,
}

struct ActiveCluster {
    id: usize,
    /// Member object indexes, ascending.
    members: Vec<usize>,
}

fn inter_cluster(d: &DissimilarityMatrix, a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    match linkage {
        Linkage::Complete => {
            let mut m = 0.0f64;
            for &i in a {
                for &j in b {
                    m = m.max(d.get(i, j));
                }
            }
            m
        }
        Linkage::Average => {
            let mut s = 0.0f64;
            for &i in a {
                for &j in b {
                    s += d.get(i, j);
                }
            }
            s / (a.len() * b.len()) as f64
        }
    }
}

pub fn linkage_cluster(d: &DissimilarityMatrix, linkage: Linkage) -> Result<DendrogramModel> {
    let n = d.n();
    if n < 2 {
        return Err(Error::config("linkage: n >= 2 required"));
    }
    let mut active: Vec<ActiveCluster> = (0..n)
        .map(|i| ActiveCluster { id: i, members: vec![i] })
        .collect();
    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let h = inter_cluster(d, &active[a].members, &active[b].members, linkage);
                if best.map_or(true, |(_, _, bh)| h < bh) {
                    best = Some((a, b, h));
                }
            }
        }
        let (a, b, height) = best.unwrap();
        let cb = active.remove(b);
        let ca = active.remove(a);
        let mut members = ca.members;
        members.extend(cb.members);
        members.sort_unstable();
        merges.push(Merge { a: ca.id, b: cb.id, height });
        active.push(ActiveCluster { id: n + step, members });
    }
    Ok(DendrogramModel { n, merges })
}

/// Partition into exactly k clusters by applying only the first n - k merges.
/// Clusters are numbered by their smallest member index.
pub fn cut_tree(tree: &DendrogramModel, k: usize) -> Result<Partition> {
    let n = tree.n;
    if k < 1 || k > n {
        return Err(Error::config(format!("cut_tree: k = {} out of range 1..={}", k, n)));
    }
    // members[id] is populated as clusters come into existence.
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    members.resize(2 * n - 1, None);
    for (step, m) in tree.merges.iter().take(n - k).enumerate() {
        let ma = members[m.a].take().ok_or_else(|| Error::data("merge refers to a consumed cluster"))?;
        let mb = members[m.b].take().ok_or_else(|| Error::data("merge refers to a consumed cluster"))?;
        let mut joined = ma;
        joined.extend(mb);
        joined.sort_unstable();
        members[n + step] = Some(joined);
    }
    let mut clusters: Vec<Vec<usize>> = members.into_iter().flatten().collect();
    clusters.sort_by_key(|c| c[0]);
    let mut labels = vec![None; n];
    for (c, cluster) in clusters.iter().enumerate() {
        for &i in cluster {
            labels[i] = Some(c);
        }
    }
    Partition::new(labels, k, None)
}
