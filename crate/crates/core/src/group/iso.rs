//! Isomorphism testing for multiplication tables.
//!
//! Recovered tables need not come from a group, so the search works on
//! arbitrary Latin squares. Elements are pruned by their power profile
//! (pre-period and period of `x, x*x, (x*x)*x, ...`), which equals the
//! element order for groups. Every assignment is propagated through the
//! tables, so once a generating set is mapped the rest is forced.

use serde::{Deserialize, Serialize};

use super::MultiplicationTable;
use crate::error::{Error, Result};

/// A bijection of `0..n`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Permutation(inv)
    }

    /// `(pi . M)_{ij} = pi(M_{pi^-1(i), pi^-1(j)})`.
    pub fn act_on_table(&self, m: &MultiplicationTable) -> MultiplicationTable {
        let inv = self.inverse();
        let n = m.size();
        MultiplicationTable::new(
            (0..n)
                .map(|i| (0..n).map(|j| self.apply(m.get(inv.apply(i), inv.apply(j)))).collect())
                .collect(),
        )
    }
}

pub fn is_latin_square(m: &MultiplicationTable) -> bool {
    let n = m.size();
    if m.entries.iter().any(|row| row.len() != n) {
        return false;
    }
    let mut seen = vec![0usize; n];
    for (stamp, row) in m.entries.iter().enumerate() {
        for &v in row {
            if v >= n || seen[v] == stamp + 1 {
                return false;
            }
            seen[v] = stamp + 1;
        }
    }
    let mut seen = vec![0usize; n];
    for j in 0..n {
        for i in 0..n {
            let v = m.entries[i][j];
            if seen[v] == j + 1 {
                return false;
            }
            seen[v] = j + 1;
        }
    }
    true
}

fn power_profile(m: &MultiplicationTable, x: usize) -> (usize, usize) {
    let n = m.size();
    let mut first_seen = vec![usize::MAX; n];
    let mut p = x;
    let mut k = 0;
    while first_seen[p] == usize::MAX {
        first_seen[p] = k;
        p = m.get(p, x);
        k += 1;
    }
    (first_seen[p], k - first_seen[p])
}

struct Search<'a> {
    a: &'a MultiplicationTable,
    b: &'a MultiplicationTable,
    pa: Vec<(usize, usize)>,
    pb: Vec<(usize, usize)>,
    map: Vec<Option<usize>>,
    used: Vec<bool>,
    trail: Vec<usize>,
}

impl Search<'_> {
    fn undo(&mut self, len: usize) {
        while self.trail.len() > len {
            let x = self.trail.pop().unwrap();
            let y = self.map[x].take().unwrap();
            self.used[y] = false;
        }
    }

    fn set(&mut self, x: usize, y: usize) -> bool {
        if self.used[y] || self.pa[x] != self.pb[y] {
            return false;
        }
        self.map[x] = Some(y);
        self.used[y] = true;
        self.trail.push(x);
        true
    }

    /// Assigns `x -> y` and closes under the table; false on contradiction.
    fn assign(&mut self, x: usize, y: usize) -> bool {
        let start = self.trail.len();
        if !self.set(x, y) {
            return false;
        }
        let mut cursor = start;
        while cursor < self.trail.len() {
            let u = self.trail[cursor];
            cursor += 1;
            let mut k = 0;
            while k < self.trail.len() {
                let v = self.trail[k];
                k += 1;
                for (l, r) in [(u, v), (v, u)] {
                    let w = self.a.get(l, r);
                    let target = self.b.get(self.map[l].unwrap(), self.map[r].unwrap());
                    match self.map[w] {
                        Some(t) if t != target => return false,
                        Some(_) => {}
                        None => {
                            if !self.set(w, target) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    fn run(&mut self) -> bool {
        let Some(x) = (0..self.map.len()).find(|&x| self.map[x].is_none()) else {
            return true;
        };
        let mark = self.trail.len();
        for y in 0..self.map.len() {
            if self.used[y] || self.pa[x] != self.pb[y] {
                continue;
            }
            if self.assign(x, y) && self.run() {
                return true;
            }
            self.undo(mark);
        }
        false
    }
}

/// Finds `pi` with `pi . a == b`, if any. Deterministic: candidates are
/// tried in ascending index order.
pub fn tables_isomorphic(
    a: &MultiplicationTable,
    b: &MultiplicationTable,
) -> Result<Option<Permutation>> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch(a.size(), b.size()));
    }
    for t in [a, b] {
        if !is_latin_square(t) {
            return Err(Error::MalformedTable("rows and columns must be permutations".into()));
        }
    }
    let n = a.size();
    let pa: Vec<_> = (0..n).map(|x| power_profile(a, x)).collect();
    let pb: Vec<_> = (0..n).map(|x| power_profile(b, x)).collect();
    let mut ca = pa.clone();
    let mut cb = pb.clone();
    ca.sort_unstable();
    cb.sort_unstable();
    if ca != cb {
        return Ok(None);
    }
    let mut search = Search {
        a,
        b,
        pa,
        pb,
        map: vec![None; n],
        used: vec![false; n],
        trail: Vec::with_capacity(n),
    };
    if search.run() {
        let pi = Permutation(search.map.into_iter().map(Option::unwrap).collect());
        debug_assert_eq!(&pi.act_on_table(a), b);
        Ok(Some(pi))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_cyclic, make_dihedral, make_product, parse_group_spec};

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn brute_force(a: &MultiplicationTable, b: &MultiplicationTable) -> bool {
        permutations(a.size()).into_iter().any(|p| &Permutation(p).act_on_table(a) == b)
    }

    #[test]
    fn reflexive_with_identity_witness() {
        let t = make_cyclic(6).unwrap().table();
        let pi = tables_isomorphic(&t, &t).unwrap().unwrap();
        assert_eq!(pi, Permutation::identity(6));
    }

    #[test]
    fn c6_vs_c2xc3() {
        let c6 = make_cyclic(6).unwrap().table();
        let p = make_product(&make_cyclic(2).unwrap(), &make_cyclic(3).unwrap()).unwrap().table();
        let pi = tables_isomorphic(&c6, &p).unwrap().unwrap();
        assert_eq!(pi.act_on_table(&c6), p);
    }

    #[test]
    fn c4_vs_klein() {
        let c4 = make_cyclic(4).unwrap().table();
        let v4 = parse_group_spec("C2xC2").unwrap().table();
        assert!(tables_isomorphic(&c4, &v4).unwrap().is_none());
        assert!(!brute_force(&c4, &v4));
    }

    #[test]
    fn d3_vs_c6() {
        let d3 = make_dihedral(3).unwrap().table();
        let c6 = make_cyclic(6).unwrap().table();
        assert!(tables_isomorphic(&d3, &c6).unwrap().is_none());
    }

    #[test]
    fn agrees_with_exhaustive_search_small_orders() {
        let tables: Vec<MultiplicationTable> = ["C1", "C2", "C3", "C4", "C2xC2", "C5", "C6", "C2xC3", "C3xC2", "D3"]
            .iter()
            .map(|s| parse_group_spec(s).unwrap().table())
            .collect();
        // plus relabelled and opposite tables
        let mut all = tables.clone();
        for t in &tables {
            let n = t.size();
            let shift = Permutation((0..n).map(|i| (i + 1) % n).collect());
            all.push(shift.act_on_table(t));
            all.push(MultiplicationTable::new(
                (0..n).map(|i| (0..n).map(|j| t.get(j, i)).collect()).collect(),
            ));
        }
        for a in &all {
            for b in &all {
                if a.size() != b.size() {
                    continue;
                }
                let fast = tables_isomorphic(a, b).unwrap();
                assert_eq!(fast.is_some(), brute_force(a, b));
                assert_eq!(fast.is_some(), tables_isomorphic(b, a).unwrap().is_some());
                if let Some(pi) = fast {
                    assert_eq!(&pi.act_on_table(a), b);
                }
            }
        }
    }

    #[test]
    fn rejects_malformed_tables() {
        let good = make_cyclic(2).unwrap().table();
        let bad = MultiplicationTable::new(vec![vec![0, 0], vec![1, 1]]);
        assert!(matches!(tables_isomorphic(&good, &bad), Err(Error::MalformedTable(_))));
        let small = make_cyclic(3).unwrap().table();
        assert!(matches!(tables_isomorphic(&good, &small), Err(Error::DimensionMismatch(2, 3))));
    }

    #[test]
    fn handles_larger_groups() {
        let a = parse_group_spec("C4xC2xC2").unwrap().table();
        let b = parse_group_spec("C2xC4xC2").unwrap().table();
        assert!(tables_isomorphic(&a, &b).unwrap().is_some());
        let c = parse_group_spec("C4xC4").unwrap().table();
        assert!(tables_isomorphic(&a, &c).unwrap().is_none());
        let d8 = parse_group_spec("D8").unwrap().table();
        let d4c2 = parse_group_spec("D4xC2").unwrap().table();
        assert!(tables_isomorphic(&d8, &d4c2).unwrap().is_none());
    }
}
