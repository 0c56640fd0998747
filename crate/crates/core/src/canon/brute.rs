use num_bigint::BigUint;

use super::search::{AutReport, SearchStatus};
use super::Partition;
use crate::cfi::Graph;

/// Largest graph [`brute_force_automorphisms`] accepts.
pub const BRUTE_FORCE_MAX_VERTICES: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("brute force is limited to {max} vertices, graph has {vertices}")]
pub struct TooLarge {
    pub vertices: u32,
    pub max: u32,
}

/// Enumerates every automorphism. The generators are one automorphism per
/// (first moved point, image) pair, which generate the whole group.
pub fn brute_force_automorphisms(g: &Graph) -> Result<AutReport, TooLarge> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(TooLarge {
            vertices: n,
            max: BRUTE_FORCE_MAX_VERTICES,
        });
    }
    let mut count: u64 = 0;
    let mut generators: Vec<Vec<u32>> = Vec::new();
    let mut keys = std::collections::BTreeSet::new();
    // The smallest image of v names its orbit.
    let mut labels: Vec<u32> = (0..n).collect();
    let mut perm = vec![u32::MAX; n as usize];
    let mut used = vec![false; n as usize];
    extend(g, 0, &mut perm, &mut used, &mut |p: &[u32]| {
        count += 1;
        if let Some(first) = (0..n).find(|&v| p[v as usize] != v) {
            if keys.insert((first, p[first as usize])) {
                generators.push(p.to_vec());
            }
        }
        for (l, &image) in labels.iter_mut().zip(p) {
            *l = (*l).min(image);
        }
    });
    Ok(AutReport {
        generators,
        group_size: BigUint::from(count),
        orbit_partition: Partition::from_labels(&labels),
        search_nodes: count,
        status: SearchStatus::Complete,
    })
}

fn extend(g: &Graph, v: u32, perm: &mut [u32], used: &mut [bool], out: &mut impl FnMut(&[u32])) {
    let n = g.vertex_count();
    if v == n {
        out(perm);
        return;
    }
    for image in 0..n {
        if used[image as usize] || g.color(image) != g.color(v) || g.degree(image) != g.degree(v) {
            continue;
        }
        let consistent = (0..v).all(|u| g.has_edge(u, v) == g.has_edge(perm[u as usize], image));
        if !consistent {
            continue;
        }
        perm[v as usize] = image;
        used[image as usize] = true;
        extend(g, v + 1, perm, used, out);
        used[image as usize] = false;
    }
    perm[v as usize] = u32::MAX;
}
