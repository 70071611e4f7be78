//! Spectral invariants of signals on finite groups.
//!
//! For commutative groups the order-`n` spectrum at `(ρ_1, …, ρ_n)` is
//! `x̂_{ρ_1} ⋯ x̂_{ρ_n} · conj(x̂_{ρ_1⋯ρ_n})`. For general groups the product
//! character is replaced by a numerical Clebsch–Gordan decomposition of
//! `V_1 ⊗ ⋯ ⊗ V_n` and the spectrum is an operator on that tensor space.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Signal};
use crate::linalg::{
    closest_unitary, column_space, frobenius, frobenius_diff, kron_all, random_complex_gaussian, random_hermitian,
    trace, CMatrix,
};
use crate::repr::{fourier_transform, FourierCoefficients, IrrepSet};

/// Relative cutoff below which a Fourier coefficient counts as vanishing.
pub const DEGENERACY_TOL: f64 = 1e-8;
pub const CG_INTERTWINING_TOL: f64 = 1e-8;
const CG_MAX_ATTEMPTS: usize = 5;
const EIGEN_TIE_TOL: f64 = 1e-6;

/// A multi-index `(ρ_1, …, ρ_n)` of irreps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpectrumIndex(pub Vec<usize>);

impl SpectrumIndex {
    pub fn new(multi_index: Vec<usize>, irreps: &IrrepSet) -> Result<Self> {
        if multi_index.is_empty() {
            return Err(Error::Precondition("spectrum order must be at least 1".into()));
        }
        if let Some(&bad) = multi_index.iter().find(|&&i| i >= irreps.len()) {
            return Err(Error::Shape { expected: irreps.len(), got: bad });
        }
        Ok(SpectrumIndex(multi_index))
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    /// Every multi-index of length `n` over `k` irreps, lexicographically.
    pub fn all(k: usize, n: usize) -> Vec<SpectrumIndex> {
        let total = k.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let mut idx = vec![0; n];
                for slot in idx.iter_mut().rev() {
                    *slot = code % k;
                    code /= k;
                }
                SpectrumIndex(idx)
            })
            .collect()
    }

    fn label(&self) -> String {
        self.0.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
    }
}

fn require_commutative(irreps: &IrrepSet) -> Result<()> {
    if irreps.iter().any(|r| r.dim != 1) {
        return Err(Error::UnsupportedGroup(
            "scalar spectra need a commutative group; use spectrum_nc".into(),
        ));
    }
    Ok(())
}

fn character_values(irreps: &IrrepSet, i: usize) -> Vec<Complex64> {
    irreps.get(i).matrices.iter().map(|m| m[(0, 0)]).collect()
}

/// Index of the character equal to the pointwise product of `idx`.
pub fn character_product(irreps: &IrrepSet, idx: &[usize]) -> Result<usize> {
    require_commutative(irreps)?;
    let n = irreps.order();
    let mut prod = vec![Complex64::new(1.0, 0.0); n];
    for &i in idx {
        for (p, v) in prod.iter_mut().zip(character_values(irreps, i)) {
            *p *= v;
        }
    }
    (0..irreps.len())
        .find(|&k| character_values(irreps, k).iter().zip(&prod).all(|(a, b)| (a - b).norm() < 1e-9))
        .ok_or_else(|| Error::Precondition("character set is not closed under products".into()))
}

/// `β_ρ(x) = x̂_{ρ_1} ⋯ x̂_{ρ_n} · conj(x̂_{ρ_1⋯ρ_n})` for commutative groups.
pub fn spectrum_commutative(
    group: &FiniteGroup,
    irreps: &IrrepSet,
    idx: &SpectrumIndex,
    x: &Signal,
) -> Result<Complex64> {
    let hat = fourier_transform(group, irreps, x)?;
    commutative_from_coefficients(irreps, idx, &hat)
}

/// Same as [`spectrum_commutative`] for an already transformed signal.
pub fn commutative_from_coefficients(
    irreps: &IrrepSet,
    idx: &SpectrumIndex,
    hat: &FourierCoefficients,
) -> Result<Complex64> {
    require_commutative(irreps)?;
    let scalar = |i: usize| hat.blocks[i][(0, 0)];
    let target = character_product(irreps, &idx.0)?;
    Ok(idx.0.iter().map(|&i| scalar(i)).product::<Complex64>() * scalar(target).conj())
}

/// One irreducible summand `T` of a tensor product, embedded by an isometry
/// `U` with `U ρ_T(g) = ρ_⊗(g) U`.
#[derive(Clone, Debug)]
pub struct CgComponent {
    pub target: usize,
    pub isometry: CMatrix,
}

#[derive(Clone, Debug)]
pub struct CgDecomposition {
    pub parent_dims: Vec<usize>,
    pub components: Vec<CgComponent>,
    /// Largest `‖U ρ_T(g) − ρ_⊗(g) U‖_F` over components and elements.
    pub residual: f64,
}

impl CgDecomposition {
    pub fn total_dim(&self) -> usize {
        self.parent_dims.iter().product()
    }

    /// Columns of all isometries side by side; unitary when the split is complete.
    pub fn basis(&self) -> CMatrix {
        let d = self.total_dim();
        let cols: usize = self.components.iter().map(|c| c.isometry.ncols()).sum();
        let mut out = CMatrix::zeros(d, cols);
        let mut at = 0;
        for c in &self.components {
            out.columns_mut(at, c.isometry.ncols()).copy_from(&c.isometry);
            at += c.isometry.ncols();
        }
        out
    }

    pub fn target_dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.isometry.ncols()).collect()
    }
}

/// `ρ_{i_1}(g) ⊗ ⋯ ⊗ ρ_{i_n}(g)` for every `g`.
pub fn tensor_representation(irreps: &IrrepSet, idx: &[usize]) -> Vec<CMatrix> {
    (0..irreps.order())
        .map(|g| {
            let factors: Vec<&CMatrix> = idx.iter().map(|&i| irreps.get(i).at(g)).collect();
            kron_all(&factors)
        })
        .collect()
}

fn intertwining_residual(rep: &[CMatrix], irreps: &IrrepSet, c: &CgComponent) -> f64 {
    rep.iter()
        .enumerate()
        .map(|(g, r)| frobenius_diff(&(&c.isometry * irreps.get(c.target).at(g)), &(r * &c.isometry)))
        .fold(0.0, f64::max)
}

fn try_decompose(irreps: &IrrepSet, rep: &[CMatrix], rng: &mut ChaCha8Rng) -> Option<Vec<CgComponent>> {
    let order = rep.len() as f64;
    let dim = rep[0].nrows();
    let mut components = Vec::new();
    for (j, irrep) in irreps.iter().enumerate() {
        let dj = irrep.dim;
        let character = irrep.character();
        // isotypic projector
        let mut proj = CMatrix::zeros(dim, dim);
        for (r, chi) in rep.iter().zip(&character) {
            proj += r * chi.conj();
        }
        proj *= Complex64::new(dj as f64 / order, 0.0);
        let multiplicity = (trace(&proj).re / dj as f64).round() as usize;
        if multiplicity == 0 {
            continue;
        }
        let space = column_space(&proj, 1e-6);
        if space.ncols() != multiplicity * dj {
            return None;
        }
        let copies: Vec<CMatrix> = if multiplicity == 1 {
            vec![space]
        } else {
            // a random Hermitian element of the commutant, compressed to the isotypic space
            let seed_matrix = random_hermitian(rng, dim);
            let mut commutant = CMatrix::zeros(dim, dim);
            for r in rep {
                commutant += r * &seed_matrix * r.adjoint();
            }
            let compressed = space.adjoint() * &commutant * &space;
            let compressed = (&compressed + compressed.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = compressed.symmetric_eigen();
            let mut order_idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order_idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let mut clusters: Vec<Vec<usize>> = Vec::new();
            for &k in &order_idx {
                match clusters.last_mut() {
                    Some(c) if (eig.eigenvalues[k] - eig.eigenvalues[*c.last().unwrap()]).abs() < EIGEN_TIE_TOL => {
                        c.push(k)
                    }
                    _ => clusters.push(vec![k]),
                }
            }
            if clusters.iter().any(|c| c.len() != dj) {
                return None;
            }
            clusters
                .iter()
                .map(|c| {
                    let vecs = CMatrix::from_fn(space.ncols(), dj, |r, col| eig.eigenvectors[(r, c[col])]);
                    &space * vecs
                })
                .collect()
        };
        for copy in copies {
            // align the basis of the copy with ρ_j via an averaged intertwiner
            let probe = random_complex_gaussian(rng, dj, dj, 1.0);
            let mut inter = CMatrix::zeros(dj, dj);
            for (g, r) in rep.iter().enumerate() {
                let sigma = copy.adjoint() * r * &copy;
                inter += sigma * &probe * irrep.at(g).adjoint();
            }
            if frobenius(&inter) < 1e-8 {
                return None;
            }
            components.push(CgComponent { target: j, isometry: copy * closest_unitary(&inter) });
        }
    }
    Some(components)
}

/// Numerically decomposes `V_{i_1} ⊗ ⋯ ⊗ V_{i_n}` into irreducible summands.
///
/// Isotypic components come from character projectors; components with
/// multiplicity above one are split along the eigenspaces of a random
/// Hermitian element of the commutant drawn from `seed`. Up to five fresh
/// samples are tried before giving up.
pub fn clebsch_gordan(irreps: &IrrepSet, multi_index: &SpectrumIndex, seed: u64) -> Result<CgDecomposition> {
    let parent_dims: Vec<usize> = multi_index.0.iter().map(|&i| irreps.get(i).dim).collect();
    let total: usize = parent_dims.iter().product();
    let rep = tensor_representation(irreps, &multi_index.0);
    let mut best = f64::INFINITY;
    for attempt in 0..CG_MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let Some(components) = try_decompose(irreps, &rep, &mut rng) else {
            continue;
        };
        let cols: usize = components.iter().map(|c| c.isometry.ncols()).sum();
        let residual = components
            .iter()
            .map(|c| intertwining_residual(&rep, irreps, c))
            .fold(0.0, f64::max);
        let decomposition = CgDecomposition { parent_dims: parent_dims.clone(), components, residual };
        let orthogonality = crate::linalg::isometry_defect(&decomposition.basis());
        if cols == total && residual <= CG_INTERTWINING_TOL && orthogonality <= CG_INTERTWINING_TOL {
            return Ok(decomposition);
        }
        best = best.min(residual.max(orthogonality));
    }
    Err(Error::DecompositionFailed { attempts: CG_MAX_ATTEMPTS, residual: best })
}

/// Operator-valued spectrum `(x̂_{i_1} ⊗ ⋯ ⊗ x̂_{i_n}) · U (⊕_j x̂_{T_j}^†) U^†`.
pub fn spectrum_nc(
    group: &FiniteGroup,
    irreps: &IrrepSet,
    idx: &SpectrumIndex,
    x: &Signal,
    cg: &CgDecomposition,
) -> Result<CMatrix> {
    let hat = fourier_transform(group, irreps, x)?;
    Ok(nc_from_coefficients(idx, &hat, cg))
}

/// Same as [`spectrum_nc`] for an already transformed signal.
pub fn nc_from_coefficients(idx: &SpectrumIndex, hat: &FourierCoefficients, cg: &CgDecomposition) -> CMatrix {
    let factors: Vec<&CMatrix> = idx.0.iter().map(|&i| &hat.blocks[i]).collect();
    let tensor = kron_all(&factors);
    let d = tensor.nrows();
    let mut sum = CMatrix::zeros(d, d);
    for c in &cg.components {
        sum += &c.isometry * hat.blocks[c.target].adjoint() * c.isometry.adjoint();
    }
    tensor * sum
}

/// Finds `g` with `x = g · y` from the ratio `η(ρ) = x̂_ρ / ŷ_ρ`, which must be
/// the conjugate of a character evaluation `ρ(g)`.
///
/// `n` is the spectral order the completeness argument is phrased in; the
/// argument needs it even, and odd values only log a warning.
pub fn completeness_recover(
    group: &FiniteGroup,
    irreps: &IrrepSet,
    x: &Signal,
    y: &Signal,
    n: usize,
) -> Result<usize> {
    require_commutative(irreps)?;
    if n < 2 || n % 2 == 1 {
        log::warn!("completeness of spectra is only guaranteed for even orders, got {n}");
    }
    for (name, s) in [("x", x), ("y", y)] {
        if !s.is_real(1e-12 * s.norm().max(1.0)) {
            return Err(Error::Precondition(format!("{name} must be real-valued")));
        }
    }
    let xh = fourier_transform(group, irreps, x)?;
    let yh = fourier_transform(group, irreps, y)?;
    let k = irreps.len();
    let mut eta = Vec::with_capacity(k);
    for i in 0..k {
        let (a, b) = (xh.blocks[i][(0, 0)], yh.blocks[i][(0, 0)]);
        if a.norm() <= DEGENERACY_TOL * x.norm() || b.norm() <= DEGENERACY_TOL * y.norm() {
            return Err(Error::DegenerateInput(format!("Fourier coefficient {i} vanishes")));
        }
        eta.push(a / b);
    }
    const TOL: f64 = 1e-6;
    if eta.iter().any(|e| (e.norm() - 1.0).abs() > TOL) {
        return Err(Error::NotRelated);
    }
    for i in 0..k {
        for j in 0..k {
            let ij = character_product(irreps, &[i, j])?;
            if (eta[i] * eta[j] - eta[ij]).norm() > TOL {
                return Err(Error::NotRelated);
            }
        }
    }
    let g = (0..group.order())
        .find(|&g| (0..k).all(|i| (eta[i] - irreps.get(i).at(g)[(0, 0)].conj()).norm() < TOL))
        .ok_or(Error::NotRelated)?;
    let moved = group.act(g, y)?;
    if moved.max_abs_diff(x) > 1e-8 * x.norm().max(1.0) {
        return Err(Error::NotRelated);
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenerationReport {
    pub order: usize,
    /// Monomials `x̂_{ρ_1} ⋯ x̂_{ρ_n} conj(x̂_{ρ_{n+1}})` enumerated.
    pub candidates: usize,
    /// Monomials invariant under every group element.
    pub invariant: usize,
    /// Whether invariance held exactly when `ρ_{n+1} = ρ_1 ⋯ ρ_n`.
    pub matches_spectra: bool,
}

/// Enumerates degree-`n+1` monomials with one conjugate and checks that the
/// invariant ones are exactly the order-`n` spectra.
pub fn spectra_generate_check(group: &FiniteGroup, irreps: &IrrepSet, n: usize) -> Result<GenerationReport> {
    require_commutative(irreps)?;
    if irreps.order() != group.order() {
        return Err(Error::Shape { expected: group.order(), got: irreps.order() });
    }
    let k = irreps.len();
    let chars: Vec<Vec<Complex64>> = (0..k).map(|i| character_values(irreps, i)).collect();
    let mut invariant = 0;
    let mut matches = true;
    let candidates = SpectrumIndex::all(k, n + 1);
    for idx in &candidates {
        let (head, last) = idx.0.split_at(n);
        // g acts on x̂_ρ by conj(ρ(g)), so the monomial picks up conj(Π ρ_k(g)) · ρ_{n+1}(g)
        let is_invariant = (0..group.order()).all(|g| {
            let factor = head.iter().map(|&i| chars[i][g]).product::<Complex64>().conj() * chars[last[0]][g];
            (factor - 1.0).norm() < 1e-9
        });
        let is_spectrum = character_product(irreps, head)? == last[0];
        invariant += usize::from(is_invariant);
        matches &= is_invariant == is_spectrum;
    }
    Ok(GenerationReport { order: n, candidates: candidates.len(), invariant, matches_spectra: matches })
}

/// Writes one row per multi-index: `multi_index,dim,re_0,im_0,…` with the
/// operator flattened row-major; shorter rows are padded with empty fields.
pub fn write_spectra_csv<W: Write>(out: W, rows: &[(SpectrumIndex, CMatrix)]) -> Result<()> {
    let width = rows.iter().map(|(_, m)| m.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["multi_index".to_string(), "dim".to_string()];
    for k in 0..width {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    w.write_record(&header)?;
    for (idx, m) in rows {
        let mut record = vec![idx.label(), m.nrows().to_string()];
        let flat = crate::io::row_major(m);
        for k in 0..width {
            match flat.get(k) {
                Some(v) => {
                    record.push(format!("{:e}", v.re));
                    record.push(format!("{:e}", v.im));
                }
                None => {
                    record.push(String::new());
                    record.push(String::new());
                }
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
