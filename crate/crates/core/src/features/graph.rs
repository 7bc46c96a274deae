//! Undirected transaction graph and the local clustering coefficient.

use std::collections::{BTreeMap, BTreeSet};

use crate::series::EpochConfig;
use crate::txio::{Address, Ledger};

/// Adjacency index over the undirected transaction graph: two addresses are
/// neighbors when at least one transaction links them, in either direction.
/// Self-loops are ignored.
#[derive(Debug, Clone, Default)]
pub struct NeighborIndex {
    adjacency: BTreeMap<Address, BTreeSet<Address>>,
}

impl NeighborIndex {
    pub fn from_ledger(ledger: &Ledger, cfg: &EpochConfig) -> NeighborIndex {
        let mut adjacency: BTreeMap<Address, BTreeSet<Address>> = BTreeMap::new();
        for tx in ledger.transactions() {
            if tx.is_error && !cfg.include_failed {
                continue;
            }
            let Some(to) = &tx.to_addr else { continue };
            if to == &tx.from_addr {
                continue;
            }
            adjacency
                .entry(tx.from_addr.clone())
                .or_default()
                .insert(to.clone());
            adjacency
                .entry(to.clone())
                .or_default()
                .insert(tx.from_addr.clone());
        }
        NeighborIndex { adjacency }
    }

    pub fn neighbors(&self, addr: &Address) -> Option<&BTreeSet<Address>> {
        self.adjacency.get(addr)
    }

    pub fn contains(&self, addr: &Address) -> bool {
        self.adjacency.contains_key(addr)
    }

    fn has_edge(&self, a: &Address, b: &Address) -> bool {
        self.adjacency.get(a).is_some_and(|n| n.contains(b))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("address {0} is not in the transaction graph")]
pub struct UnknownAddress(pub Address);

/// Watts-Strogatz local clustering coefficient:
/// `2 * edges_among_neighbors / (k * (k - 1))`, or 0 when degree < 2.
pub fn clustering_coefficient(
    graph: &NeighborIndex,
    addr: &Address,
) -> Result<f64, UnknownAddress> {
    let neighbors = graph
        .neighbors(addr)
        .ok_or_else(|| UnknownAddress(addr.clone()))?;
    let k = neighbors.len();
    if k < 2 {
        return Ok(0.0);
    }
    let list: Vec<&Address> = neighbors.iter().collect();
    let mut links = 0usize;
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            if graph.has_edge(list[i], list[j]) {
                links += 1;
            }
        }
    }
    Ok(2.0 * links as f64 / (k * (k - 1)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::txio::Transaction;
    use crate::wei::Wei;
    use std::collections::BTreeMap;

    fn addr(tag: u8) -> Address {
        Address::parse(&format!("0x{:040x}", tag as u128)).unwrap()
    }

    fn edge(n: u64, from: &Address, to: &Address) -> Transaction {
        Transaction {
            tx_hash: format!("0x{n:064x}"),
            block_number: n,
            timestamp: n + 1,
            from_addr: from.clone(),
            to_addr: Some(to.clone()),
            value: Wei::from_u64(1),
            gas: 21000,
            gas_price: Wei::from_u64(1),
            is_error: false,
        }
    }

    fn graph_of(pairs: &[(u8, u8)]) -> NeighborIndex {
        let txs = pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| edge(i as u64, &addr(a), &addr(b)))
            .collect();
        let ledger = Ledger::new(txs, BTreeMap::new(), None).unwrap();
        NeighborIndex::from_ledger(&ledger, &EpochConfig::default())
    }

    #[test]
    fn triangle_has_full_clustering() {
        let g = graph_of(&[(1, 2), (2, 3), (3, 1)]);
        for tag in 1..=3 {
            assert_eq!(clustering_coefficient(&g, &addr(tag)).unwrap(), 1.0);
        }
    }

    #[test]
    fn star_center_has_zero_clustering() {
        let g = graph_of(&[(1, 2), (1, 3), (1, 4)]);
        assert_eq!(clustering_coefficient(&g, &addr(1)).unwrap(), 0.0);
        // leaves have degree 1
        assert_eq!(clustering_coefficient(&g, &addr(2)).unwrap(), 0.0);
    }

    #[test]
    fn one_edge_among_three_neighbors() {
        let g = graph_of(&[(1, 2), (1, 3), (1, 4), (2, 3)]);
        let cc = clustering_coefficient(&g, &addr(1)).unwrap();
        assert!((cc - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_address_errors() {
        let g = graph_of(&[(1, 2)]);
        assert!(clustering_coefficient(&g, &addr(9)).is_err());
    }

    #[test]
    fn self_loops_and_duplicate_txs_ignored() {
        let g = graph_of(&[(1, 1), (1, 2), (2, 1), (1, 2)]);
        let n = g.neighbors(&addr(1)).unwrap();
        assert_eq!(n.len(), 1);
    }
}
