//! Irreducible unitary representations and the group Fourier transform.
//!
//! Conventions: the transform is `x̂_ρ = Σ_g ρ(g)^† x_g`, so translating a
//! signal acts on the right of each block, `(g·x)^_ρ = x̂_ρ ρ(g)^†`, and
//! convolution multiplies blocks as `(x⋆y)^_ρ = ŷ_ρ x̂_ρ`. The transform is
//! unitary up to `|G|` for the pairing `⟨A, B⟩ = dim · tr(A^† B)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupKind, Signal};
use crate::linalg::{frobenius, frobenius_diff, identity, isometry_defect, kron, trace, CMatrix, ONE, ZERO};
use crate::specnet::{WeightSlot, WeightTensor};

/// A unitary matrix-valued homomorphism, one matrix per group element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Irrep {
    pub dim: usize,
    pub label: String,
    #[serde(with = "matrix_list")]
    pub matrices: Vec<CMatrix>,
}

mod matrix_list {
    use num_complex::Complex64;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::linalg::CMatrix;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            ms.iter()
                .map(|m| crate::io::row_major(m).into_iter().map(|v| [v.re, v.im]).collect::<Vec<_>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        raw.into_iter()
            .map(|flat| {
                let dim = (flat.len() as f64).sqrt().round() as usize;
                if dim * dim != flat.len() {
                    return Err(D::Error::custom("irrep matrix is not square"));
                }
                let vals: Vec<Complex64> = flat.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                Ok(CMatrix::from_row_slice(dim, dim, &vals))
            })
            .collect()
    }
}

impl Irrep {
    pub fn new(label: impl Into<String>, matrices: Vec<CMatrix>) -> Self {
        let dim = matrices.first().map_or(0, CMatrix::nrows);
        Irrep { dim, label: label.into(), matrices }
    }

    #[inline]
    pub fn at(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn character(&self) -> Vec<Complex64> {
        self.matrices.iter().map(trace).collect()
    }

    /// Largest `‖ρ(gh) − ρ(g)ρ(h)‖_F`.
    pub fn homomorphism_residual(&self, group: &FiniteGroup) -> f64 {
        let n = group.order();
        let mut worst: f64 = 0.0;
        for g in 0..n {
            for h in 0..n {
                let prod = self.at(g) * self.at(h);
                worst = worst.max(frobenius_diff(self.at(group.mul(g, h)), &prod));
            }
        }
        worst
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.matrices.iter().map(isometry_defect).fold(0.0, f64::max)
    }

    /// `Σ_g |tr ρ(g)|²`, equal to `|G|` exactly for irreducible representations.
    pub fn character_norm(&self) -> f64 {
        self.character().iter().map(Complex64::norm_sqr).sum()
    }

    fn tensor(&self, other: &Irrep, order_b: usize) -> Irrep {
        let n = self.matrices.len() * order_b;
        let matrices = (0..n)
            .map(|g| kron(self.at(g / order_b), other.at(g % order_b)))
            .collect();
        Irrep::new(format!("{}⊗{}", self.label, other.label), matrices)
    }
}

/// The complete list of irreducible unitary representations of a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IrrepSet {
    pub irreps: Vec<Irrep>,
}

/// Residuals of the structural checks run by [`IrrepSet::check`].
#[derive(Clone, Debug, Serialize)]
pub struct IrrepCheck {
    pub homomorphism: f64,
    pub unitarity: f64,
    /// Largest `|Σ_g |χ(g)|² − |G||` over the irreps.
    pub character_norm: f64,
    pub dimension_sum: usize,
    pub complete: bool,
    pub distinct_characters: bool,
    pub schur: f64,
}

impl IrrepCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.homomorphism <= tol
            && self.unitarity <= tol
            && self.character_norm <= tol
            && self.complete
            && self.distinct_characters
            && self.schur <= tol
    }
}

impl IrrepSet {
    pub fn new(irreps: Vec<Irrep>) -> Self {
        IrrepSet { irreps }
    }

    pub fn len(&self) -> usize {
        self.irreps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.irreps.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.irreps.iter().map(|r| r.dim).collect()
    }

    pub fn get(&self, i: usize) -> &Irrep {
        &self.irreps[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Irrep> {
        self.irreps.iter()
    }

    pub fn order(&self) -> usize {
        self.irreps.first().map_or(0, |r| r.matrices.len())
    }

    /// Index of the trivial representation, if present.
    pub fn trivial_index(&self) -> Option<usize> {
        self.irreps
            .iter()
            .position(|r| r.dim == 1 && r.matrices.iter().all(|m| (m[(0, 0)] - ONE).norm() < 1e-9))
    }

    pub fn check(&self, group: &FiniteGroup) -> IrrepCheck {
        let n = group.order() as f64;
        let dimension_sum = self.irreps.iter().map(|r| r.dim * r.dim).sum();
        let chars: Vec<Vec<Complex64>> = self.irreps.iter().map(Irrep::character).collect();
        let distinct_characters = chars.iter().enumerate().all(|(i, a)| {
            chars[..i]
                .iter()
                .all(|b| a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) > 1e-6)
        });
        IrrepCheck {
            homomorphism: self.irreps.iter().map(|r| r.homomorphism_residual(group)).fold(0.0, f64::max),
            unitarity: self.irreps.iter().map(Irrep::unitarity_residual).fold(0.0, f64::max),
            character_norm: self.irreps.iter().map(|r| (r.character_norm() - n).abs()).fold(0.0, f64::max),
            dimension_sum,
            complete: dimension_sum == group.order(),
            distinct_characters,
            schur: verify_schur(self),
        }
    }
}

/// Block-diagonal Fourier coefficients, one `d_i x d_i` block per irrep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficients {
    #[serde(with = "block_list")]
    pub blocks: Vec<CMatrix>,
}

mod block_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::CMatrix;

    #[derive(Serialize, Deserialize)]
    struct Block(#[serde(with = "crate::io::square_matrix")] CMatrix);

    pub fn serialize<S: Serializer>(bs: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(bs.iter().map(|b| Block(b.clone())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        Ok(Vec::<Block>::deserialize(d)?.into_iter().map(|b| b.0).collect())
    }
}

impl FourierCoefficients {
    /// `Σ_i d_i ‖x̂_i‖²_F`.
    pub fn weighted_norm_sqr(&self) -> f64 {
        self.blocks.iter().map(|b| b.nrows() as f64 * frobenius(b).powi(2)).sum()
    }

    pub fn max_abs_diff(&self, other: &FourierCoefficients) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| crate::linalg::max_abs(&(a - b)))
            .fold(0.0, f64::max)
    }
}

fn cyclic_characters(factors: &[usize]) -> Vec<Irrep> {
    let order: usize = factors.iter().product();
    let digits = |mut g: usize| -> Vec<usize> {
        let mut out = vec![0; factors.len()];
        for (j, &d) in factors.iter().enumerate().rev() {
            out[j] = g % d;
            g /= d;
        }
        out
    };
    (0..order)
        .map(|k| {
            let kd = digits(k);
            let matrices = (0..order)
                .map(|g| {
                    let gd = digits(g);
                    let phase: f64 = factors
                        .iter()
                        .zip(kd.iter().zip(&gd))
                        .map(|(&d, (&kj, &gj))| ((kj * gj) % d) as f64 / d as f64)
                        .sum();
                    CMatrix::from_element(1, 1, Complex64::from_polar(1.0, 2.0 * PI * phase))
                })
                .collect();
            let label = format!("chi{kd:?}").replace(' ', "");
            Irrep::new(label, matrices)
        })
        .collect()
}

fn dihedral_irreps(n: usize) -> Vec<Irrep> {
    let order = 2 * n;
    let scalar = |f: &dyn Fn(usize, usize) -> f64| -> Vec<CMatrix> {
        (0..order)
            .map(|g| CMatrix::from_element(1, 1, Complex64::new(f(g / n, g % n), 0.0)))
            .collect()
    };
    let sign = |e: usize| if e % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = vec![
        Irrep::new("trivial", scalar(&|_, _| 1.0)),
        Irrep::new("sign", scalar(&|a, _| sign(a))),
    ];
    if n % 2 == 0 {
        out.push(Irrep::new("alt", scalar(&|_, k| sign(k))));
        out.push(Irrep::new("sign_alt", scalar(&|a, k| sign(a + k))));
    }
    let reflection = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    for j in 1..=(n - 1) / 2 {
        let theta = 2.0 * PI * j as f64 / n as f64;
        let matrices = (0..order)
            .map(|g| {
                let (a, k) = (g / n, g % n);
                let t = theta * k as f64;
                let rot = CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::new(t.cos(), 0.0),
                        Complex64::new(-t.sin(), 0.0),
                        Complex64::new(t.sin(), 0.0),
                        Complex64::new(t.cos(), 0.0),
                    ],
                );
                if a == 1 {
                    &reflection * rot
                } else {
                    rot
                }
            })
            .collect();
        out.push(Irrep::new(format!("rho{j}"), matrices));
    }
    out
}

fn irreps_of_kind(kind: &GroupKind) -> Result<Vec<Irrep>> {
    match kind {
        GroupKind::Cyclic(d) => Ok(cyclic_characters(&[*d])),
        GroupKind::Dihedral(n) => Ok(dihedral_irreps(*n)),
        GroupKind::Product(factors) => {
            let mut acc: Option<(Vec<Irrep>, usize)> = None;
            for f in factors {
                if matches!(f, GroupKind::Product(_)) {
                    return Err(Error::UnsupportedGroup(format!("nested product {f}")));
                }
                let next = irreps_of_kind(f)?;
                let nb = f.order();
                acc = Some(match acc {
                    None => (next, nb),
                    Some((prev, na)) => {
                        let combined = prev
                            .iter()
                            .flat_map(|a| next.iter().map(move |b| a.tensor(b, nb)))
                            .collect();
                        (combined, na * nb)
                    }
                });
            }
            acc.map(|(v, _)| v).ok_or_else(|| Error::UnsupportedGroup("empty product".into()))
        }
    }
}

/// All irreducible unitary representations of a constructor-built group.
///
/// Commutative groups get the characters of their cyclic factorization,
/// indexed like the elements (so character `k · l` has index `mul(k, l)`);
/// dihedral groups use the real rotation/reflection form; mixed products
/// take Kronecker products of the factor irreps.
pub fn irreps(group: &FiniteGroup) -> Result<IrrepSet> {
    let set = match (group.factor_spec(), group.kind()) {
        (Some(factors), _) => cyclic_characters(factors),
        (None, GroupKind::Cyclic(_)) => {
            return Err(Error::UnsupportedGroup("cyclic group without factorization".into()))
        }
        (None, kind) => irreps_of_kind(kind)?,
    };
    if set.iter().map(|r| r.dim * r.dim).sum::<usize>() != group.order() {
        return Err(Error::UnsupportedGroup(format!("{} has no constructible dual", group.kind())));
    }
    Ok(IrrepSet::new(set))
}

fn check_shapes(group: &FiniteGroup, irreps: &IrrepSet) -> Result<()> {
    if irreps.order() != group.order() {
        return Err(Error::Shape { expected: group.order(), got: irreps.order() });
    }
    Ok(())
}

/// `x̂_i = Σ_g ρ_i(g)^† x_g`.
pub fn fourier_transform(group: &FiniteGroup, irreps: &IrrepSet, x: &Signal) -> Result<FourierCoefficients> {
    group.check_signal(x)?;
    check_shapes(group, irreps)?;
    let blocks = irreps
        .iter()
        .map(|r| {
            let mut acc = CMatrix::zeros(r.dim, r.dim);
            for (g, m) in r.matrices.iter().enumerate() {
                if x[g] != ZERO {
                    acc += m.adjoint() * x[g];
                }
            }
            acc
        })
        .collect();
    Ok(FourierCoefficients { blocks })
}

/// `x_g = (1/|G|) Σ_i d_i tr(ρ_i(g) x̂_i)`.
pub fn inverse_fourier(group: &FiniteGroup, irreps: &IrrepSet, c: &FourierCoefficients) -> Result<Signal> {
    check_shapes(group, irreps)?;
    if c.blocks.len() != irreps.len() {
        return Err(Error::Shape { expected: irreps.len(), got: c.blocks.len() });
    }
    for (b, r) in c.blocks.iter().zip(irreps.iter()) {
        if b.shape() != (r.dim, r.dim) {
            return Err(Error::Shape { expected: r.dim, got: b.nrows() });
        }
    }
    let n = group.order();
    let values = (0..n)
        .map(|g| {
            let s: Complex64 = irreps
                .iter()
                .zip(&c.blocks)
                .map(|(r, b)| trace(&(r.at(g) * b)) * r.dim as f64)
                .sum();
            s / n as f64
        })
        .collect();
    Ok(Signal::new(values))
}

/// The ground-truth weights `W_i(g) = ρ_i(g)^†`, so that `W(x) = x̂`.
pub fn fourier_weight_tensor(group: &FiniteGroup, irreps: &IrrepSet) -> Result<WeightTensor> {
    check_shapes(group, irreps)?;
    let slots = irreps
        .iter()
        .map(|r| WeightSlot::from_blocks(&r.matrices.iter().map(CMatrix::adjoint).collect::<Vec<_>>()))
        .collect();
    WeightTensor::new(group.kind().to_string(), slots)
}

/// Largest deviation from `Σ_g conj(ρ_i(g)_{ab}) ρ_j(g)_{cd} = (|G|/d_i) δ_ij δ_ac δ_bd`.
pub fn verify_schur(irreps: &IrrepSet) -> f64 {
    let n = irreps.order();
    let mut worst: f64 = 0.0;
    for (i, ri) in irreps.iter().enumerate() {
        for (j, rj) in irreps.iter().enumerate() {
            for a in 0..ri.dim {
                for b in 0..ri.dim {
                    for c in 0..rj.dim {
                        for d in 0..rj.dim {
                            let s: Complex64 =
                                (0..n).map(|g| ri.at(g)[(a, b)].conj() * rj.at(g)[(c, d)]).sum();
                            let expected = if i == j && a == c && b == d { n as f64 / ri.dim as f64 } else { 0.0 };
                            worst = worst.max((s - expected).norm());
                        }
                    }
                }
            }
        }
    }
    worst
}

/// Identity blocks, the transform of `δ_identity`.
pub fn identity_coefficients(irreps: &IrrepSet) -> FourierCoefficients {
    FourierCoefficients { blocks: irreps.iter().map(|r| identity(r.dim)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_group_spec;
    use rand::{Rng, SeedableRng};

    fn random_signal(rng: &mut impl Rng, n: usize) -> Signal {
        Signal::new((0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
    }

    #[test]
    fn dimensions() {
        let c5 = parse_group_spec("C5").unwrap();
        assert_eq!(irreps(&c5).unwrap().dims(), vec![1; 5]);
        assert_eq!(irreps(&parse_group_spec("D3").unwrap()).unwrap().dims(), vec![1, 1, 2]);
        assert_eq!(irreps(&parse_group_spec("D4").unwrap()).unwrap().dims(), vec![1, 1, 1, 1, 2]);
        assert_eq!(irreps(&parse_group_spec("D6").unwrap()).unwrap().dims(), vec![1, 1, 1, 1, 2, 2]);
        let triv = irreps(&parse_group_spec("C1").unwrap()).unwrap();
        assert_eq!(triv.len(), 1);
        assert_eq!(triv.trivial_index(), Some(0));
    }

    #[test]
    fn structural_checks_hold_up_to_order_16() {
        for spec in ["C1", "C2", "C6", "C12", "C16", "C2xC2xC2", "C4xC4", "C2xC3", "D3", "D4", "D5", "D8", "D3xC2", "C2xD4"] {
            let g = parse_group_spec(spec).unwrap();
            let set = irreps(&g).unwrap();
            let check = set.check(&g);
            assert!(check.passes(1e-10), "{spec}: {check:?}");
        }
    }

    #[test]
    fn commutative_character_products_follow_the_table() {
        let g = parse_group_spec("C2xC4").unwrap();
        let set = irreps(&g).unwrap();
        for k in 0..8 {
            for l in 0..8 {
                let kl = g.mul(k, l);
                for e in 0..8 {
                    let prod = set.get(k).at(e)[(0, 0)] * set.get(l).at(e)[(0, 0)];
                    assert!((prod - set.get(kl).at(e)[(0, 0)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn schur_residuals() {
        for spec in ["C6", "D3"] {
            let set = irreps(&parse_group_spec(spec).unwrap()).unwrap();
            assert!(verify_schur(&set) <= 1e-12, "{spec}");
        }
        let mut set = irreps(&parse_group_spec("D3").unwrap()).unwrap();
        for m in &mut set.irreps[2].matrices {
            *m *= Complex64::new(2.0, 0.0);
        }
        assert!(verify_schur(&set) >= 1.0);
    }

    #[test]
    fn transform_examples() {
        let c4 = parse_group_spec("C4").unwrap();
        let set = irreps(&c4).unwrap();
        let hat = fourier_transform(&c4, &set, &c4.delta(0)).unwrap();
        assert_eq!(hat, identity_coefficients(&set));
        let ones = Signal::from_real(&[1.0; 4]);
        let hat = fourier_transform(&c4, &set, &ones).unwrap();
        assert!((hat.blocks[0][(0, 0)] - 4.0).norm() < 1e-12);
        for b in &hat.blocks[1..] {
            assert!(b[(0, 0)].norm() < 1e-12);
        }

        let d3 = parse_group_spec("D3").unwrap();
        let set = irreps(&d3).unwrap();
        for g in 0..6 {
            let hat = fourier_transform(&d3, &set, &d3.delta(g)).unwrap();
            for (b, r) in hat.blocks.iter().zip(set.iter()) {
                assert!(frobenius_diff(b, &r.at(g).adjoint()) < 1e-14);
            }
        }
        let back = inverse_fourier(&d3, &set, &identity_coefficients(&set)).unwrap();
        assert!(back.max_abs_diff(&d3.delta(0)) < 1e-12);
    }

    #[test]
    fn round_trip_parseval_and_equivariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for spec in ["C6", "D3", "C2xC2xC2", "D4"] {
            let g = parse_group_spec(spec).unwrap();
            let set = irreps(&g).unwrap();
            let n = g.order();
            let mut worst_round: f64 = 0.0;
            for _ in 0..100 {
                let x = random_signal(&mut rng, n);
                let hat = fourier_transform(&g, &set, &x).unwrap();
                worst_round = worst_round.max(inverse_fourier(&g, &set, &hat).unwrap().max_abs_diff(&x));
                let lhs = hat.weighted_norm_sqr();
                let rhs = n as f64 * x.norm_sqr();
                assert!((lhs - rhs).abs() <= 1e-9 * rhs, "{spec} parseval");
            }
            assert!(worst_round <= 1e-10, "{spec} round trip {worst_round}");

            let x = random_signal(&mut rng, n);
            let hat = fourier_transform(&g, &set, &x).unwrap();
            for e in 0..n {
                let moved = fourier_transform(&g, &set, &g.act(e, &x).unwrap()).unwrap();
                for ((m, b), r) in moved.blocks.iter().zip(&hat.blocks).zip(set.iter()) {
                    assert!(frobenius_diff(m, &(b * r.at(e).adjoint())) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn convolution_theorem() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for spec in ["C4", "C6", "D3"] {
            let g = parse_group_spec(spec).unwrap();
            let set = irreps(&g).unwrap();
            for _ in 0..10 {
                let x = random_signal(&mut rng, g.order());
                let y = random_signal(&mut rng, g.order());
                let conv = fourier_transform(&g, &set, &g.convolve(&x, &y).unwrap()).unwrap();
                let xh = fourier_transform(&g, &set, &x).unwrap();
                let yh = fourier_transform(&g, &set, &y).unwrap();
                for ((c, a), b) in conv.blocks.iter().zip(&xh.blocks).zip(&yh.blocks) {
                    assert!(frobenius_diff(c, &(b * a)) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn fourier_weights_are_unitary_up_to_order() {
        for spec in ["C5", "D3", "C2xC2xC2"] {
            let g = parse_group_spec(spec).unwrap();
            let w = fourier_weight_tensor(&g, &irreps(&g).unwrap()).unwrap();
            let n = g.order();
            let defect = w.gram() - identity(n) * Complex64::new(n as f64, 0.0);
            assert!(crate::linalg::max_abs(&defect) < 1e-12);
            assert!(w.identity_slice_defect(g.identity()) < 1e-15);
        }
        // C_d: conjugated DFT rows
        let c4 = parse_group_spec("C4").unwrap();
        let w = fourier_weight_tensor(&c4, &irreps(&c4).unwrap()).unwrap();
        for k in 0..4 {
            for g in 0..4 {
                let expected = Complex64::from_polar(1.0, -2.0 * PI * (k * g) as f64 / 4.0);
                assert!((w.slot(k).get(0, 0, g) - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let c4 = parse_group_spec("C4").unwrap();
        let set = irreps(&c4).unwrap();
        assert!(matches!(fourier_transform(&c4, &set, &Signal::zeros(3)), Err(Error::Shape { .. })));
        let bad = FourierCoefficients { blocks: vec![identity(1); 3] };
        assert!(inverse_fourier(&c4, &set, &bad).is_err());
    }

    #[test]
    fn json_layout() {
        let d3 = parse_group_spec("D3").unwrap();
        let set = irreps(&d3).unwrap();
        let v: serde_json::Value = serde_json::to_value(&set).unwrap();
        assert_eq!(v[2]["dim"], 2);
        assert_eq!(v[2]["matrices"].as_array().unwrap().len(), 6);
        assert_eq!(v[2]["matrices"][0][0], serde_json::json!([1.0, 0.0]));
        let back: IrrepSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, set);
    }
}
