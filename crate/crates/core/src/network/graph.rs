use std::collections::BTreeMap;

use crate::dyads::Dyad;
use crate::ingest::Id;
use crate::mixture::Assignment;

/// Vessels joined by partner-at-sea dyads. `adjacency` is a dense,
/// symmetric, zero-diagonal dyad-count matrix over `nodes`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartnerNetwork {
    pub nodes: Vec<Id>,
    adjacency: Vec<u32>,
}

impl PartnerNetwork {
    /// Aggregates `(vessel, vessel, dyads)` triples; self-pairs are ignored.
    pub fn from_edges<'a>(edges: impl IntoIterator<Item = (&'a str, &'a str, u32)>) -> Self {
        let mut pairs: BTreeMap<(Id, Id), u32> = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b || w == 0 {
                continue;
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            *pairs.entry((Id::from(a), Id::from(b))).or_default() += w;
        }
        let mut nodes: Vec<Id> = pairs.keys().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        nodes.sort();
        nodes.dedup();
        let n = nodes.len();
        let index = |v: &Id| nodes.binary_search(v).expect("node listed");
        let mut adjacency = vec![0u32; n * n];
        for ((a, b), w) in &pairs {
            let (i, j) = (index(a), index(b));
            adjacency[i * n + j] += w;
            adjacency[j * n + i] += w;
        }
        PartnerNetwork { nodes, adjacency }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self, u: usize, v: usize) -> u32 {
        self.adjacency[u * self.len() + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        let n = self.len();
        &self.adjacency[u * n..(u + 1) * n]
    }

    /// Total partner dyads of a vessel.
    pub fn node_weight(&self, u: usize) -> u32 {
        self.row(u).iter().sum()
    }

    /// Number of distinct partners.
    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().filter(|&&w| w > 0).count()
    }

    /// Edges `(u, v, weight)` with `u < v`, row-major.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let n = self.len();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let w = self.weight(u, v);
                if w > 0 {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn total_weight(&self) -> u64 {
        self.edges().iter().map(|e| e.2 as u64).sum()
    }

    /// Connected components, each sorted, largest first.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for (v, &w) in self.row(u).iter().enumerate() {
                    if w > 0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        out
    }
}

/// Network of cluster-1 dyads.
pub fn build_network(assignments: &[Assignment], dyads: &[Dyad]) -> PartnerNetwork {
    PartnerNetwork::from_edges(
        assignments
            .iter()
            .filter(|a| a.label == 0)
            .map(|a| (&*dyads[a.dyad].vessel_a, &*dyads[a.dyad].vessel_b, 1)),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoyaltyReport {
    pub nodes: usize,
    pub exclusive_vessels: Vec<Id>,
    /// Exclusive share of partnered vessels; absent for an empty network.
    pub loyalty_index: Option<f64>,
}

pub fn loyalty(network: &PartnerNetwork) -> LoyaltyReport {
    let exclusive_vessels: Vec<Id> = (0..network.len())
        .filter(|&u| network.degree(u) == 1)
        .map(|u| network.nodes[u].clone())
        .collect();
    let loyalty_index = (!network.is_empty()).then(|| exclusive_vessels.len() as f64 / network.len() as f64);
    LoyaltyReport {
        nodes: network.len(),
        exclusive_vessels,
        loyalty_index,
    }
}
