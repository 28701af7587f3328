//! Serving-set construction: position-based virtual clusters, the
//! user-centric and full-cell-free baselines, CPU bookkeeping sets and
//! backhaul-load counters.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{wrap_distance, NetworkLayout};

/// Candidate virtual clusters built from AP neighborhoods.
#[derive(Debug, Clone)]
pub struct ClusterCatalog {
    /// G_m per AP: the AP itself followed by its L−1 nearest APs in
    /// non-decreasing wrap-distance order, distance ties by ascending index.
    pub neighbor_sets: Vec<Vec<usize>>,
    /// The J unique neighbor sets, compared as unordered sets; kept in
    /// first-occurrence order, each stored sorted ascending.
    pub virtual_clusters: Vec<Vec<usize>>,
}

impl ClusterCatalog {
    /// J, the number of distinct virtual clusters.
    pub fn num_virtual_clusters(&self) -> usize {
        self.virtual_clusters.len()
    }
}

/// CPU-side bookkeeping for one scheme's serving choice.
#[derive(Debug, Clone)]
pub struct ServingAssignment {
    /// Decoding AP set per user, sorted ascending.
    pub served_by: Vec<Vec<usize>>,
    /// K_m: the users each AP decodes (inverse of `served_by`).
    pub users_of_ap: Vec<Vec<usize>>,
    /// D_{k,n} = served_by[k] ∩ C_n, per user per cell-centric cluster.
    pub decode_sets: Vec<Vec<Vec<usize>>>,
    /// B_k: indices of the CPUs that cooperate on user k.
    pub cpu_sets: Vec<Vec<usize>>,
}

impl ServingAssignment {
    pub fn new(
        served_by: Vec<Vec<usize>>,
        cell_centric_clusters: &[Vec<usize>],
        num_aps: usize,
    ) -> Self {
        let mut users_of_ap = vec![Vec::new(); num_aps];
        for (k, set) in served_by.iter().enumerate() {
            for &m in set {
                users_of_ap[m].push(k);
            }
        }
        let (decode_sets, cpu_sets) = derive_cpu_sets(&served_by, cell_centric_clusters);
        ServingAssignment {
            served_by,
            users_of_ap,
            decode_sets,
            cpu_sets,
        }
    }
}

/// Build the position-based virtual clusters: each AP's neighborhood of
/// itself plus its L−1 nearest APs, deduplicated as unordered sets.
pub fn build_pbvc(layout: &NetworkLayout, l: usize) -> Result<ClusterCatalog> {
    let m = layout.ap_positions.len();
    if l < 1 || l > m {
        return Err(Error::Config(format!(
            "cluster size L={l} must lie in 1..=M={m}"
        )));
    }
    let mut neighbor_sets = Vec::with_capacity(m);
    for a in 0..m {
        let dist: Vec<f64> = (0..m)
            .map(|b| wrap_distance(layout.ap_positions[a], layout.ap_positions[b], layout.side))
            .collect();
        let mut order: Vec<usize> = (0..m).filter(|&b| b != a).collect();
        order.sort_by(|&p, &q| dist[p].total_cmp(&dist[q]).then(p.cmp(&q)));
        let mut g = Vec::with_capacity(l);
        g.push(a);
        g.extend_from_slice(&order[..l - 1]);
        neighbor_sets.push(g);
    }
    let mut virtual_clusters: Vec<Vec<usize>> = Vec::new();
    for g in &neighbor_sets {
        let mut sorted = g.clone();
        sorted.sort_unstable();
        if !virtual_clusters.contains(&sorted) {
            virtual_clusters.push(sorted);
        }
    }
    Ok(ClusterCatalog {
        neighbor_sets,
        virtual_clusters,
    })
}

/// User-centric serving sets: for each user the L APs with the largest
/// channel gain, gain ties by ascending index. Sets are sorted ascending.
pub fn build_uc_sets(beta: &DMatrix<f64>, l: usize) -> Vec<Vec<usize>> {
    let (k_users, m_aps) = beta.shape();
    assert!(l >= 1 && l <= m_aps, "L={l} must lie in 1..=M={m_aps}");
    (0..k_users)
        .map(|k| {
            let mut order: Vec<usize> = (0..m_aps).collect();
            order.sort_by(|&p, &q| beta[(k, q)].total_cmp(&beta[(k, p)]).then(p.cmp(&q)));
            let mut set = order[..l].to_vec();
            set.sort_unstable();
            set
        })
        .collect()
}

/// Full-cell-free serving sets: every AP decodes every user.
pub fn build_fcf_sets(m: usize, k: usize) -> Vec<Vec<usize>> {
    vec![(0..m).collect(); k]
}

/// Split each user's serving set across the cell-centric clusters
/// (D_{k,n}) and list the cooperating CPUs (B_k).
pub fn derive_cpu_sets(
    served_by: &[Vec<usize>],
    cell_centric_clusters: &[Vec<usize>],
) -> (Vec<Vec<Vec<usize>>>, Vec<Vec<usize>>) {
    let n = cell_centric_clusters.len();
    let num_aps = cell_centric_clusters
        .iter()
        .flat_map(|c| c.iter().copied())
        .max()
        .map_or(0, |m| m + 1);
    let mut cluster_of = vec![usize::MAX; num_aps];
    for (idx, cluster) in cell_centric_clusters.iter().enumerate() {
        for &m in cluster {
            cluster_of[m] = idx;
        }
    }
    let mut decode_sets = Vec::with_capacity(served_by.len());
    let mut cpu_sets = Vec::with_capacity(served_by.len());
    for set in served_by {
        let mut d = vec![Vec::new(); n];
        for &m in set {
            d[cluster_of[m]].push(m);
        }
        cpu_sets.push((0..n).filter(|&j| !d[j].is_empty()).collect());
        decode_sets.push(d);
    }
    (decode_sets, cpu_sets)
}

/// Backhaul counters: total AP–user decode pairs on the fronthaul and total
/// CPU–user cooperation pairs on the inter-CPU link.
pub fn backhaul_load(assignment: &ServingAssignment) -> (u64, u64) {
    let ap_user_pairs = assignment.served_by.iter().map(|s| s.len() as u64).sum();
    let cpu_coop_pairs = assignment.cpu_sets.iter().map(|s| s.len() as u64).sum();
    (ap_user_pairs, cpu_coop_pairs)
}
