use std::collections::HashMap;

use crate::error::{Error, Result};

pub const DEFAULT_HIERARCHY_CAP: usize = 200_000;

/// Multi-index `n = (n_0, ..., n_{N_k})` labelling one auxiliary operator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HierarchyIndex {
    pub counts: Vec<u16>,
}

impl HierarchyIndex {
    pub fn zero(n_exponentials: usize) -> Self {
        Self { counts: vec![0; n_exponentials] }
    }

    pub fn depth(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    fn shifted(&self, k: usize, up: bool) -> Option<Self> {
        let mut counts = self.counts.clone();
        if up {
            counts[k] = counts[k].checked_add(1)?;
        } else {
            counts[k] = counts[k].checked_sub(1)?;
        }
        Some(Self { counts })
    }
}

/// Binomial coefficient with overflow reported as `None`.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n.checked_sub(k)?);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// All indices with `Σ n_k ≤ depth`, ordered by depth and then
/// lexicographically descending within a level (`e_0` before `e_1`).
pub fn enumerate_hierarchy(
    n_exponentials: usize,
    depth: usize,
    cap: usize,
) -> Result<Vec<HierarchyIndex>> {
    if n_exponentials == 0 {
        return Err(Error::InvalidParameter(
            "hierarchy needs at least one exponential".into(),
        ));
    }
    let count = binomial(n_exponentials + depth, depth).unwrap_or(usize::MAX);
    if count > cap {
        return Err(Error::HierarchyTooLarge { count, cap });
    }
    let mut out = Vec::with_capacity(count);
    let mut current = vec![0u16; n_exponentials];
    for level in 0..=depth {
        compositions(&mut current, 0, level, &mut out);
    }
    debug_assert_eq!(out.len(), count);
    Ok(out)
}

fn compositions(current: &mut Vec<u16>, pos: usize, remaining: usize, out: &mut Vec<HierarchyIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u16;
        out.push(HierarchyIndex { counts: current.clone() });
        return;
    }
    for take in (0..=remaining).rev() {
        current[pos] = take as u16;
        compositions(current, pos + 1, remaining - take, out);
    }
    current[pos] = 0;
}

/// Enumerated hierarchy with neighbour lookup tables.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub indices: Vec<HierarchyIndex>,
    pub depth: usize,
    lookup: HashMap<HierarchyIndex, usize>,
    up: Vec<Vec<Option<usize>>>,
    down: Vec<Vec<Option<usize>>>,
}

impl Hierarchy {
    pub fn new(n_exponentials: usize, depth: usize, cap: usize) -> Result<Self> {
        let indices = enumerate_hierarchy(n_exponentials, depth, cap)?;
        let lookup: HashMap<_, _> = indices.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let neighbours = |up: bool| -> Vec<Vec<Option<usize>>> {
            indices
                .iter()
                .map(|n| {
                    (0..n_exponentials)
                        .map(|k| n.shifted(k, up).and_then(|m| lookup.get(&m).copied()))
                        .collect()
                })
                .collect()
        };
        let up = neighbours(true);
        let down = neighbours(false);
        Ok(Self { indices, depth, lookup, up, down })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn n_exponentials(&self) -> usize {
        self.indices[0].counts.len()
    }

    pub fn position(&self, index: &HierarchyIndex) -> Option<usize> {
        self.lookup.get(index).copied()
    }

    /// Position of `n + e_k`, if inside the truncation.
    pub fn up(&self, ado: usize, k: usize) -> Option<usize> {
        self.up[ado][k]
    }

    /// Position of `n − e_k`, if `n_k > 0`.
    pub fn down(&self, ado: usize, k: usize) -> Option<usize> {
        self.down[ado][k]
    }
}
