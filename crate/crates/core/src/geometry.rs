//! Network drops: AP/user placement on a wrap-around square, toroidal
//! distances, and the fixed grid partition of APs into cell-centric clusters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SimConfig;
use crate::error::{Error, Result};

/// A position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }
}

/// One network drop: AP and user positions plus the cell-centric partition.
#[derive(Debug, Clone)]
pub struct NetworkLayout {
    /// AP positions; x, y in [0, side), z = AP height.
    pub ap_positions: Vec<Point3>,
    /// User positions; x, y in [0, side), z = user height.
    pub user_positions: Vec<Point3>,
    /// Deployment square side, meters.
    pub side: f64,
    /// Disjoint AP index sets C_1..C_N covering all APs; each sorted ascending.
    pub cell_centric_clusters: Vec<Vec<usize>>,
}

/// Distance between two points on the wrap-around square: the minimum over
/// the nine planar images in x and y; the height difference enters directly.
pub fn wrap_distance(a: Point3, b: Point3, side: f64) -> f64 {
    debug_assert!(side > 0.0);
    let dz = a.z - b.z;
    let mut best = f64::INFINITY;
    for ix in -1i32..=1 {
        for iy in -1i32..=1 {
            let dx = a.x - b.x + f64::from(ix) * side;
            let dy = a.y - b.y + f64::from(iy) * side;
            let h = dx * dx + dy * dy;
            if h < best {
                best = h;
            }
        }
    }
    (best + dz * dz).sqrt()
}

/// Assign each AP to the grid tile containing its (x, y). `n` must be a
/// perfect square g²; tiles are indexed row-major (row from y, column from x).
pub fn cell_centric_partition(
    ap_positions: &[Point3],
    side: f64,
    n: usize,
) -> Result<Vec<Vec<usize>>> {
    if n < 1 {
        return Err(Error::Config("cluster count N must be at least 1".into()));
    }
    let g = (n as f64).sqrt().round() as usize;
    if g * g != n {
        return Err(Error::Config(format!(
            "cluster count N={n} must be a perfect square for the grid partition"
        )));
    }
    let tile = side / g as f64;
    let mut clusters = vec![Vec::new(); n];
    for (i, p) in ap_positions.iter().enumerate() {
        let col = ((p.x / tile) as usize).min(g - 1);
        let row = ((p.y / tile) as usize).min(g - 1);
        clusters[row * g + col].push(i);
    }
    Ok(clusters)
}

/// Draw one network drop: APs and users i.i.d. uniform over the square,
/// heights from the config, cell-centric clusters from the grid partition.
/// Identical (config, seed) pairs yield bit-identical layouts.
pub fn drop_network(config: &SimConfig, seed: u64) -> Result<NetworkLayout> {
    if config.m < 1 || config.k < 1 {
        return Err(Error::Config(format!(
            "need at least one AP and one user (M={}, K={})",
            config.m, config.k
        )));
    }
    // NaN fails the predicate and is rejected with the sign check
    let positive = |v: f64| v > 0.0;
    if !positive(config.side_m) {
        return Err(Error::Config(format!(
            "area side must be positive, got {}",
            config.side_m
        )));
    }
    let side = config.side_m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // scaling the top of the unit range can round up to `side` itself; on
    // the torus that point is the origin
    let coordinate = |rng: &mut ChaCha8Rng| -> f64 {
        let v = rng.random::<f64>() * side;
        if v >= side {
            0.0
        } else {
            v
        }
    };
    let place = |count: usize, height: f64, rng: &mut ChaCha8Rng| -> Vec<Point3> {
        (0..count)
            .map(|_| {
                let x = coordinate(rng);
                let y = coordinate(rng);
                Point3::new(x, y, height)
            })
            .collect()
    };
    let ap_positions = place(config.m, config.ap_height_m, &mut rng);
    let user_positions = place(config.k, config.user_height_m, &mut rng);
    let cell_centric_clusters = cell_centric_partition(&ap_positions, side, config.n_clusters)?;
    if let Some(idx) = cell_centric_clusters.iter().position(|c| c.is_empty()) {
        // Can only happen when M is small relative to N; every CPU must own
        // at least one AP.
        return Err(Error::Config(format!(
            "cell-centric cluster {idx} received no AP (M={} too small for N={})",
            config.m, config.n_clusters
        )));
    }
    Ok(NetworkLayout {
        ap_positions,
        user_positions,
        side,
        cell_centric_clusters,
    })
}
