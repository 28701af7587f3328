//! User→VC matching: weight-matrix construction, an exact Munkres solver for
//! the sum-rate-maximizing one-to-one assignment, and an exhaustive oracle.

use nalgebra::DMatrix;

use crate::channel::ChannelStats;
use crate::clustering::ClusterCatalog;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::sinr::sinr_closed_form;

/// K×J matrix of per-(user, VC) spectral efficiencies log2(1+SINR),
/// bits/symbol.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    pub f: DMatrix<f64>,
}

/// A user→VC matching and its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    /// VC index per user; pairwise distinct under the one-to-one rule.
    pub assigned_vc: Vec<usize>,
    /// Sum of the selected weight-matrix entries.
    pub objective: f64,
}

/// Build the association weights: f_{k,j} = log2(1 + SINR) of user k served
/// by VC j, evaluated at uniform maximum transmit power.
pub fn build_weight_matrix(
    catalog: &ClusterCatalog,
    stats: &ChannelStats,
    config: &SimConfig,
) -> Result<WeightMatrix> {
    let k_users = stats.num_users();
    let eta = vec![config.p_max_w; k_users];
    let j = catalog.num_virtual_clusters();
    let mut f = DMatrix::zeros(k_users, j);
    for (jdx, vc) in catalog.virtual_clusters.iter().enumerate() {
        for k in 0..k_users {
            let sinr = sinr_closed_form(k, vc, stats, &eta, config.n_ap)?;
            f[(k, jdx)] = (1.0 + sinr).log2();
        }
    }
    Ok(WeightMatrix { f })
}

/// Maximum-weight one-to-one assignment of the K rows to distinct columns,
/// K ≤ J, via the Munkres method: flip to minimization around the largest
/// entry, reduce, then alternate minimum line covers with reductions by the
/// smallest uncovered element until K lines are needed.
pub fn hungarian_max(f: &DMatrix<f64>) -> Result<AssociationResult> {
    let (k, j) = f.shape();
    if k == 0 || j == 0 {
        return Err(Error::Contract("empty weight matrix".into()));
    }
    if k > j {
        return Err(Error::Contract(format!(
            "dimension error: {k} users but only {j} virtual clusters; \
             a one-to-one assignment needs K ≤ J (enable VC sharing to relax)"
        )));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("non-finite weight-matrix entry".into()));
    }
    let f_plus = f.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let cost = f.map(|v| f_plus - v);
    let assigned_vc = munkres_min(cost);
    let objective = assigned_vc.iter().enumerate().map(|(r, &c)| f[(r, c)]).sum();
    Ok(AssociationResult { assigned_vc, objective })
}

/// Matching with VC reuse: each column is replicated ⌈K/J⌉ times so several
/// users may share a VC when K > J. Falls back to [`hungarian_max`] when
/// K ≤ J.
pub fn hungarian_max_shared(f: &DMatrix<f64>) -> Result<AssociationResult> {
    let (k, j) = f.shape();
    if k <= j {
        return hungarian_max(f);
    }
    if j == 0 {
        return Err(Error::Contract("empty weight matrix".into()));
    }
    let reps = k.div_ceil(j);
    let wide = DMatrix::from_fn(k, j * reps, |r, c| f[(r, c / reps)]);
    let result = hungarian_max(&wide)?;
    let assigned_vc: Vec<usize> = result.assigned_vc.iter().map(|&c| c / reps).collect();
    let objective = assigned_vc.iter().enumerate().map(|(r, &c)| f[(r, c)]).sum();
    Ok(AssociationResult { assigned_vc, objective })
}

/// Exhaustive maximization over all injective row→column maps. Guarded to
/// K ≤ 9 and J ≤ 9; this is the test oracle for [`hungarian_max`].
pub fn brute_force_max(f: &DMatrix<f64>) -> Result<AssociationResult> {
    let (k, j) = f.shape();
    if k > 9 || j > 9 {
        return Err(Error::Contract(format!(
            "brute-force matching refuses K={k}, J={j} (guard is 9)"
        )));
    }
    if k == 0 || j == 0 || k > j {
        return Err(Error::Contract(format!(
            "brute-force matching needs 1 ≤ K ≤ J, got K={k}, J={j}"
        )));
    }
    let mut best_objective = f64::NEG_INFINITY;
    let mut best: Vec<usize> = Vec::new();
    let mut current = vec![0usize; k];
    search(f, 0, 0, 0.0, &mut current, &mut best, &mut best_objective);
    Ok(AssociationResult { assigned_vc: best, objective: best_objective })
}

fn search(
    f: &DMatrix<f64>,
    row: usize,
    used: u32,
    sum: f64,
    current: &mut Vec<usize>,
    best: &mut Vec<usize>,
    best_objective: &mut f64,
) {
    let (k, j) = f.shape();
    if row == k {
        if sum > *best_objective {
            *best_objective = sum;
            *best = current.clone();
        }
        return;
    }
    for c in 0..j {
        if used & (1 << c) == 0 {
            current[row] = c;
            search(f, row + 1, used | (1 << c), sum + f[(row, c)], current, best, best_objective);
        }
    }
}

/// Munkres minimization on a non-negative rows×cols matrix with
/// rows ≤ cols. Zero ties during scanning resolve to the smallest row, then
/// the smallest column.
fn munkres_min(mut cost: DMatrix<f64>) -> Vec<usize> {
    let (rows, cols) = cost.shape();
    debug_assert!(rows >= 1 && rows <= cols);

    // Row reduction always; column reduction only in the square case. With
    // fewer rows than columns an assignment uses a strict subset of the
    // columns, so subtracting per-column constants would reorder the optima.
    for r in 0..rows {
        let min = (0..cols).map(|c| cost[(r, c)]).fold(f64::INFINITY, f64::min);
        for c in 0..cols {
            cost[(r, c)] -= min;
        }
    }
    if rows == cols {
        for c in 0..cols {
            let min = (0..rows).map(|r| cost[(r, c)]).fold(f64::INFINITY, f64::min);
            for r in 0..rows {
                cost[(r, c)] -= min;
            }
        }
    }

    let mut star_in_row: Vec<Option<usize>> = vec![None; rows];
    let mut star_in_col: Vec<Option<usize>> = vec![None; cols];
    let mut prime_in_row: Vec<Option<usize>> = vec![None; rows];
    let mut covered_row = vec![false; rows];
    let mut covered_col = vec![false; cols];

    // greedy initial starring
    for r in 0..rows {
        for c in 0..cols {
            if cost[(r, c)] == 0.0 && star_in_row[r].is_none() && star_in_col[c].is_none() {
                star_in_row[r] = Some(c);
                star_in_col[c] = Some(r);
            }
        }
    }

    loop {
        // the minimum line cover: one vertical line per starred column
        for (c, cov) in covered_col.iter_mut().enumerate() {
            *cov = star_in_col[c].is_some();
        }
        if covered_col.iter().filter(|&&cov| cov).count() == rows {
            break;
        }

        'priming: loop {
            let mut zero = None;
            'scan: for r in 0..rows {
                if covered_row[r] {
                    continue;
                }
                for c in 0..cols {
                    if !covered_col[c] && cost[(r, c)] == 0.0 {
                        zero = Some((r, c));
                        break 'scan;
                    }
                }
            }
            match zero {
                Some((r, c)) => {
                    prime_in_row[r] = Some(c);
                    match star_in_row[r] {
                        Some(sc) => {
                            covered_row[r] = true;
                            covered_col[sc] = false;
                        }
                        None => {
                            augment(r, c, &mut star_in_row, &mut star_in_col, &prime_in_row);
                            prime_in_row.iter_mut().for_each(|p| *p = None);
                            covered_row.iter_mut().for_each(|v| *v = false);
                            covered_col.iter_mut().for_each(|v| *v = false);
                            break 'priming;
                        }
                    }
                }
                None => {
                    // reduce by the smallest uncovered element: subtract it
                    // from everything uncovered, add it to the doubly covered
                    let mut min = f64::INFINITY;
                    for r in 0..rows {
                        if covered_row[r] {
                            continue;
                        }
                        for c in 0..cols {
                            if !covered_col[c] && cost[(r, c)] < min {
                                min = cost[(r, c)];
                            }
                        }
                    }
                    debug_assert!(min.is_finite() && min > 0.0);
                    for r in 0..rows {
                        for c in 0..cols {
                            if covered_row[r] {
                                cost[(r, c)] += min;
                            }
                            if !covered_col[c] {
                                cost[(r, c)] -= min;
                            }
                        }
                    }
                }
            }
        }
    }

    star_in_row
        .into_iter()
        .map(|c| c.expect("every row is starred at termination"))
        .collect()
}

/// Grow the matching along the alternating star/prime path rooted at the
/// uncovered primed zero (r, c).
fn augment(
    r: usize,
    c: usize,
    star_in_row: &mut [Option<usize>],
    star_in_col: &mut [Option<usize>],
    prime_in_row: &[Option<usize>],
) {
    let mut path = vec![(r, c)];
    while let Some(sr) = star_in_col[path.last().unwrap().1] {
        let pc = prime_in_row[sr].expect("row on the alternating path has a prime");
        path.push((sr, path.last().unwrap().1)); // starred zero, same column
        path.push((sr, pc)); // primed zero, same row
    }
    for (idx, &(pr, pc)) in path.iter().enumerate() {
        if idx % 2 == 1 {
            star_in_row[pr] = None;
            star_in_col[pc] = None;
        }
    }
    for (idx, &(pr, pc)) in path.iter().enumerate() {
        if idx % 2 == 0 {
            star_in_row[pr] = Some(pc);
            star_in_col[pc] = Some(pr);
        }
    }
}
