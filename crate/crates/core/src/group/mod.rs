//! Finite groups given by explicit multiplication tables.
//!
//! Elements are dense indices `0..order`. Constructors fix the ordering:
//! cyclic groups list residues ascending, products are lexicographic in
//! their factors (`(a, b) -> a * |B| + b`), and dihedral groups list the
//! rotations `r^k` followed by the reflections `s r^k`.

mod iso;
mod signal;
mod spec;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use iso::{is_latin_square, tables_isomorphic, Permutation};
pub use signal::Signal;
pub use spec::parse_group_spec;

pub const DEFAULT_MAX_ORDER: usize = 64;

static MAX_ORDER: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_ORDER);

/// Current cap on group orders accepted by the constructors.
pub fn max_order() -> usize {
    MAX_ORDER.load(Ordering::Relaxed)
}

/// Changes the process-wide order cap.
pub fn set_max_order(max: usize) {
    MAX_ORDER.store(max.max(1), Ordering::Relaxed);
}

fn check_order(order: usize) -> Result<()> {
    let max = max_order();
    if order > max {
        return Err(Error::OrderTooLarge { order, max });
    }
    Ok(())
}

/// Constructor tag of a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Cyclic(usize),
    Dihedral(usize),
    /// Direct product of non-product factors, first factor most significant.
    Product(Vec<GroupKind>),
}

impl GroupKind {
    pub fn order(&self) -> usize {
        match self {
            GroupKind::Cyclic(d) => *d,
            GroupKind::Dihedral(n) => 2 * n,
            GroupKind::Product(fs) => fs.iter().map(GroupKind::order).product(),
        }
    }

    /// Flattened list of non-product factors.
    pub fn factors(&self) -> Vec<GroupKind> {
        match self {
            GroupKind::Product(fs) => fs.clone(),
            other => vec![other.clone()],
        }
    }

    pub fn build(&self) -> Result<FiniteGroup> {
        match self {
            GroupKind::Cyclic(d) => make_cyclic(*d),
            GroupKind::Dihedral(n) => make_dihedral(*n),
            GroupKind::Product(fs) => {
                let mut iter = fs.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| Error::InvalidOrder("empty product".into()))?;
                iter.try_fold(first.build()?, |acc, f| make_product(&acc, &f.build()?))
            }
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Cyclic(d) => write!(f, "C{d}"),
            GroupKind::Dihedral(n) => write!(f, "D{n}"),
            GroupKind::Product(fs) => {
                for (i, k) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("x")?;
                    }
                    write!(f, "{k}")?;
                }
                Ok(())
            }
        }
    }
}

/// Row-major `order x order` table of element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiplicationTable {
    pub entries: Vec<Vec<usize>>,
}

impl MultiplicationTable {
    pub fn new(entries: Vec<Vec<usize>>) -> Self {
        MultiplicationTable { entries }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    #[inline]
    pub fn get(&self, g: usize, h: usize) -> usize {
        self.entries[g][h]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|g| (0..g).all(|h| self.entries[g][h] == self.entries[h][g]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGroup {
    order: usize,
    mult: Vec<usize>,
    inv: Vec<usize>,
    identity: usize,
    kind: GroupKind,
    factor_spec: Option<Vec<usize>>,
}

impl FiniteGroup {
    fn from_table(mult: Vec<usize>, order: usize, kind: GroupKind, factor_spec: Option<Vec<usize>>) -> Self {
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| mult[e * order + g] == g && mult[g * order + e] == g))
            .expect("constructor produced a table without identity");
        let inv = (0..order)
            .map(|g| {
                (0..order)
                    .find(|&h| mult[g * order + h] == identity)
                    .expect("constructor produced a table without inverses")
            })
            .collect();
        FiniteGroup { order, mult, inv, identity, kind, factor_spec }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mult[g * self.order + h]
    }

    #[inline]
    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    /// Cyclic factor orders, present only for commutative constructions.
    pub fn factor_spec(&self) -> Option<&[usize]> {
        self.factor_spec.as_deref()
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.order).all(|g| (0..g).all(|h| self.mul(g, h) == self.mul(h, g)))
    }

    pub fn table(&self) -> MultiplicationTable {
        MultiplicationTable::new(self.mult.chunks(self.order).map(<[usize]>::to_vec).collect())
    }

    /// Smallest `k >= 1` with `g^k = 1`.
    pub fn element_order(&self, g: usize) -> usize {
        let mut p = g;
        let mut k = 1;
        while p != self.identity {
            p = self.mul(p, g);
            k += 1;
        }
        k
    }

    /// Exhaustive check of associativity, identity and inverse laws.
    pub fn check_axioms(&self) -> std::result::Result<(), String> {
        let n = self.order;
        for g in 0..n {
            if self.mul(self.identity, g) != g || self.mul(g, self.identity) != g {
                return Err(format!("identity law fails at {g}"));
            }
            let gi = self.inv(g);
            if self.mul(gi, g) != self.identity || self.mul(g, gi) != self.identity {
                return Err(format!("inverse law fails at {g}"));
            }
            for h in 0..n {
                let gh = self.mul(g, h);
                for k in 0..n {
                    if self.mul(gh, k) != self.mul(g, self.mul(h, k)) {
                        return Err(format!("associativity fails at ({g}, {h}, {k})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `(g . x)_h = x_{g^-1 h}`.
    pub fn act(&self, g: usize, x: &Signal) -> Result<Signal> {
        self.check_signal(x)?;
        self.check_element(g)?;
        let gi = self.inv(g);
        Ok(Signal::new((0..self.order).map(|h| x[self.mul(gi, h)]).collect()))
    }

    /// `(x * y)_g = sum_h x_h y_{h^-1 g}`.
    pub fn convolve(&self, x: &Signal, y: &Signal) -> Result<Signal> {
        self.check_signal(x)?;
        self.check_signal(y)?;
        let mut out = vec![num_complex::Complex64::new(0.0, 0.0); self.order];
        for h in 0..self.order {
            let hi = self.inv(h);
            for (g, o) in out.iter_mut().enumerate() {
                *o += x[h] * y[self.mul(hi, g)];
            }
        }
        Ok(Signal::new(out))
    }

    pub fn delta(&self, g: usize) -> Signal {
        Signal::delta(self.order, g)
    }

    pub(crate) fn check_signal(&self, x: &Signal) -> Result<()> {
        if x.len() != self.order {
            return Err(Error::Shape { expected: self.order, got: x.len() });
        }
        Ok(())
    }

    pub(crate) fn check_element(&self, g: usize) -> Result<()> {
        if g >= self.order {
            return Err(Error::Shape { expected: self.order, got: g });
        }
        Ok(())
    }
}

/// Cyclic group `C_d` of integers modulo `d`.
pub fn make_cyclic(d: usize) -> Result<FiniteGroup> {
    if d == 0 {
        return Err(Error::InvalidOrder("cyclic order must be at least 1".into()));
    }
    check_order(d)?;
    let mult = (0..d * d).map(|i| (i / d + i % d) % d).collect();
    Ok(FiniteGroup::from_table(mult, d, GroupKind::Cyclic(d), Some(vec![d])))
}

/// Direct product `A x B` with `(a, b) -> a * |B| + b`.
pub fn make_product(a: &FiniteGroup, b: &FiniteGroup) -> Result<FiniteGroup> {
    let order = a
        .order
        .checked_mul(b.order)
        .ok_or(Error::OrderTooLarge { order: usize::MAX, max: max_order() })?;
    check_order(order)?;
    let nb = b.order;
    let mut mult = vec![0; order * order];
    for g in 0..order {
        let (ga, gb) = (g / nb, g % nb);
        for h in 0..order {
            let (ha, hb) = (h / nb, h % nb);
            mult[g * order + h] = a.mul(ga, ha) * nb + b.mul(gb, hb);
        }
    }
    let mut factors = a.kind.factors();
    factors.extend(b.kind.factors());
    let factor_spec = match (&a.factor_spec, &b.factor_spec) {
        (Some(fa), Some(fb)) => Some(fa.iter().chain(fb).copied().collect()),
        _ => None,
    };
    Ok(FiniteGroup::from_table(mult, order, GroupKind::Product(factors), factor_spec))
}

/// Dihedral group `D_n` of order `2n`: rotations `r^k` at index `k`,
/// reflections `s r^k` at index `n + k`.
pub fn make_dihedral(n: usize) -> Result<FiniteGroup> {
    if n < 3 {
        return Err(Error::InvalidOrder(format!("dihedral D{n} needs n >= 3")));
    }
    let order = 2 * n;
    check_order(order)?;
    // s^a r^i * s^b r^j = s^(a+b) r^((-1)^b i + j)
    let mut mult = vec![0; order * order];
    for g in 0..order {
        let (a, i) = (g / n, g % n);
        for h in 0..order {
            let (b, j) = (h / n, h % n);
            let twisted = if b == 1 { (n - i) % n } else { i };
            let k = (twisted + j) % n;
            mult[g * order + h] = ((a + b) % 2) * n + k;
        }
    }
    Ok(FiniteGroup::from_table(mult, order, GroupKind::Dihedral(n), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn random_signal(n: usize, seed: u64) -> Signal {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Signal::new((0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
    }

    #[test]
    fn trivial_group() {
        let g = make_cyclic(1).unwrap();
        assert_eq!(g.table().entries, vec![vec![0]]);
        assert!(matches!(make_cyclic(0), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn cyclic_tables() {
        let c6 = make_cyclic(6).unwrap();
        assert!(c6.table().is_symmetric());
        assert_eq!(make_cyclic(5).unwrap().mul(2, 4), 1);
        assert_eq!(c6.factor_spec(), Some(&[6][..]));
    }

    #[test]
    fn products() {
        let c2 = make_cyclic(2).unwrap();
        let c3 = make_cyclic(3).unwrap();
        let c6 = make_product(&c2, &c3).unwrap();
        assert_eq!(c6.order(), 6);
        assert!(c6.table().is_symmetric());
        assert_eq!(c6.factor_spec(), Some(&[2, 3][..]));

        let c222 = make_product(&make_product(&c2, &c2).unwrap(), &c2).unwrap();
        assert_eq!(c222.order(), 8);
        for g in 0..8 {
            assert_eq!(c222.inv(g), g);
        }
        assert_eq!(c222.kind().to_string(), "C2xC2xC2");

        let d4 = make_dihedral(4).unwrap();
        let triv = make_cyclic(1).unwrap();
        assert_eq!(make_product(&triv, &d4).unwrap().table(), d4.table());
        assert!(make_product(&d4, &d4).unwrap().factor_spec().is_none());
    }

    #[test]
    fn product_order_cap() {
        let c8 = make_cyclic(8).unwrap();
        let c9 = make_cyclic(9).unwrap();
        assert!(matches!(make_product(&c8, &c9), Err(Error::OrderTooLarge { order: 72, max: 64 })));
    }

    #[test]
    fn dihedral_relations() {
        let d3 = make_dihedral(3).unwrap();
        assert_eq!(d3.order(), 6);
        assert!(!d3.table().is_symmetric());
        let (r, s) = (1, 3);
        assert_ne!(d3.mul(s, r), d3.mul(r, s));
        // s r s = r^-1
        assert_eq!(d3.mul(d3.mul(s, r), s), d3.inv(r));
        let d4 = make_dihedral(4).unwrap();
        assert_eq!(d4.mul(4, 4), d4.identity());
        assert_eq!(d4.element_order(1), 4);
        assert!(matches!(make_dihedral(2), Err(Error::InvalidOrder(_))));
    }

    #[test]
    fn dihedral_table_matches_permutation_model() {
        // D_3 acting on the vertices of a triangle: r(v) = v + 1, s(v) = -v.
        let d3 = make_dihedral(3).unwrap();
        let perm = |g: usize| -> [usize; 3] {
            let (a, k) = (g / 3, g % 3);
            let mut p = [0; 3];
            for (v, out) in p.iter_mut().enumerate() {
                // s^a r^k applied as r^k first, then s^a
                let w = (v + k) % 3;
                *out = if a == 1 { (3 - w) % 3 } else { w };
            }
            p
        };
        for g in 0..6 {
            for h in 0..6 {
                let (pg, ph) = (perm(g), perm(h));
                let composed: Vec<usize> = (0..3).map(|v| pg[ph[v]]).collect();
                assert_eq!(composed, perm(d3.mul(g, h)).to_vec(), "g={g} h={h}");
            }
        }
    }

    #[test]
    fn axioms_for_all_constructors() {
        for spec in ["C1", "C7", "C12", "C2xC2xC2", "C4xC3", "D3", "D4", "D5", "D8", "D3xC2", "C64"] {
            let g = parse_group_spec(spec).unwrap();
            g.check_axioms().unwrap_or_else(|e| panic!("{spec}: {e}"));
            assert_eq!(g.is_commutative(), g.factor_spec().is_some(), "{spec}");
        }
    }

    #[test]
    fn action_laws() {
        let d3 = make_dihedral(3).unwrap();
        let x = random_signal(6, 1);
        assert_eq!(d3.act(d3.identity(), &x).unwrap(), x);
        for g in 0..6 {
            assert_eq!(d3.act(g, &d3.delta(0)).unwrap(), d3.delta(g));
            for h in 0..6 {
                let lhs = d3.act(g, &d3.act(h, &x).unwrap()).unwrap();
                // compose the coordinate permutations directly
                let direct: Vec<Complex64> =
                    (0..6).map(|k| x[d3.mul(d3.inv(h), d3.mul(d3.inv(g), k))]).collect();
                assert_eq!(lhs.values(), &direct[..]);
                assert_eq!(lhs, d3.act(d3.mul(g, h), &x).unwrap());
            }
        }
        assert!(matches!(d3.act(0, &random_signal(5, 2)), Err(Error::Shape { .. })));
    }

    #[test]
    fn convolution_identities() {
        for spec in ["C4", "D3", "C2xC3", "D4"] {
            let g = parse_group_spec(spec).unwrap();
            let n = g.order();
            let (x, y, z) = (random_signal(n, 3), random_signal(n, 4), random_signal(n, 5));
            let unit = g.convolve(&g.delta(g.identity()), &x).unwrap();
            assert!(unit.max_abs_diff(&x) < 1e-12);
            for h in 0..n {
                let lhs = g.convolve(&g.delta(h), &x).unwrap();
                assert!(lhs.max_abs_diff(&g.act(h, &x).unwrap()) < 1e-12);
            }
            let left = g.convolve(&g.convolve(&x, &y).unwrap(), &z).unwrap();
            let right = g.convolve(&x, &g.convolve(&y, &z).unwrap()).unwrap();
            assert!(left.max_abs_diff(&right) < 1e-10, "{spec}");
        }
    }
}
