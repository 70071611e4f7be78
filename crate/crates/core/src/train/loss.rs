use std::borrow::Borrow;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OrbitPair;
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{kron_power, CMatrix, ZERO};
use crate::specnet::{conj_tensor_sum, WeightSlot, WeightTensor};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub invariance: f64,
    pub orthogonality: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.invariance + self.orthogonality
    }

    pub fn is_finite(&self) -> bool {
        self.invariance.is_finite() && self.orthogonality.is_finite()
    }
}

fn check<P: Borrow<OrbitPair>>(group: &FiniteGroup, w: &WeightTensor, batch: &[P], n: usize) -> Result<()> {
    if w.order() != group.order() {
        return Err(Error::Shape { expected: group.order(), got: w.order() });
    }
    if batch.is_empty() {
        return Err(Error::Precondition("batch must be nonempty".into()));
    }
    if n == 0 {
        return Err(Error::Precondition("spectral order must be at least 1".into()));
    }
    for p in batch {
        w.check_signal(&p.borrow().x)?;
        w.check_signal(&p.borrow().y)?;
    }
    Ok(())
}

/// Invariance and orthogonality terms of the contrastive objective. The
/// invariance term is averaged over the pairs of the batch.
pub fn loss<P: Borrow<OrbitPair>>(
    group: &FiniteGroup,
    w: &WeightTensor,
    batch: &[P],
    n: usize,
    eta: f64,
) -> Result<LossTerms> {
    check(group, w, batch, n)?;
    let mut invariance = 0.0;
    for s in w.slots() {
        for p in batch {
            let p = p.borrow();
            invariance += if n == 1 {
                let a = apply(s, p.x.values());
                let b = apply(s, p.y.values());
                frob_sqr(&hermitian_gap(&a, &b, s.dim()))
            } else {
                let fx = spectral_output(s, n, p.x.values());
                let fy = spectral_output(s, n, p.y.values());
                (fx - fy).norm_squared()
            };
        }
    }
    invariance /= batch.len() as f64;
    let (_, defect) = gram_defect(w);
    Ok(LossTerms { invariance, orthogonality: eta * defect.iter().map(|v| v.norm_sqr()).sum::<f64>() })
}

/// Loss terms and the gradient on the interleaved real view of `w`.
pub fn loss_and_grad<P: Borrow<OrbitPair>>(
    group: &FiniteGroup,
    w: &WeightTensor,
    batch: &[P],
    n: usize,
    eta: f64,
) -> Result<(LossTerms, Vec<f64>)> {
    check(group, w, batch, n)?;
    // Wirtinger derivatives ∂L/∂W̄, laid out like the slot data.
    let mut wbar: Vec<Vec<Complex64>> = w.slots().iter().map(|s| vec![ZERO; s.data().len()]).collect();
    let mut invariance = 0.0;
    for (s, out) in w.slots().iter().zip(wbar.iter_mut()) {
        let mut scratch = Scratch::new(s.dim());
        for p in batch {
            invariance += if n == 1 {
                linear_pair_grad(s, p.borrow(), out, &mut scratch)
            } else {
                tensor_pair_grad(s, n, p.borrow(), out)
            };
        }
    }
    let inv_scale = 1.0 / batch.len() as f64;
    invariance *= inv_scale;
    wbar.iter_mut().flatten().for_each(|v| *v *= inv_scale);
    let order = w.order();
    let (m, defect) = gram_defect(w);
    let orthogonality = eta * defect.iter().map(|v| v.norm_sqr()).sum::<f64>();
    // ∂/∂M̄ of η‖M^†M − |G|I‖² is 2η M E.
    let me = &m * &defect;
    let mut row = 0;
    for (s, out) in w.slots().iter().zip(wbar.iter_mut()) {
        let scale = (s.dim() as f64).sqrt() * 2.0 * eta;
        for ab in 0..s.dim() * s.dim() {
            for g in 0..order {
                out[ab * order + g] += me[(row, g)] * scale;
            }
            row += 1;
        }
    }
    let mut grad = Vec::with_capacity(2 * w.len());
    for v in wbar.iter().flatten() {
        grad.push(2.0 * v.re);
        grad.push(2.0 * v.im);
    }
    Ok((LossTerms { invariance, orthogonality }, grad))
}

/// Rows `√d_i W_i(g)_{ab}` stacked into a matrix `M`, and `M^†M − |G|I`.
fn gram_defect(w: &WeightTensor) -> (CMatrix, CMatrix) {
    let order = w.order();
    let rows: usize = w.slots().iter().map(|s| s.dim() * s.dim()).sum();
    let mut m = CMatrix::zeros(rows, order);
    let mut r = 0;
    for s in w.slots() {
        let c = Complex64::new((s.dim() as f64).sqrt(), 0.0);
        for ab in 0..s.dim() * s.dim() {
            for g in 0..order {
                m[(r, g)] = s.data()[ab * order + g] * c;
            }
            r += 1;
        }
    }
    let mut defect = m.adjoint() * &m;
    for g in 0..order {
        defect[(g, g)] -= Complex64::new(order as f64, 0.0);
    }
    (m, defect)
}

fn apply(s: &WeightSlot, x: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; s.dim() * s.dim()];
    apply_into(s, x, &mut out);
    out
}

fn apply_into(s: &WeightSlot, x: &[Complex64], out: &mut [Complex64]) {
    let order = s.order();
    for (row, v) in s.data().chunks(order).zip(out.iter_mut()) {
        *v = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

fn hermitian_gap(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    hermitian_gap_into(a, b, d, &mut out);
    out
}

/// `A A^† − B B^†` for row-major `d × d` matrices.
fn hermitian_gap_into(a: &[Complex64], b: &[Complex64], d: usize, out: &mut [Complex64]) {
    for r in 0..d {
        for c in 0..d {
            let mut v = ZERO;
            for k in 0..d {
                v += a[r * d + k] * a[c * d + k].conj() - b[r * d + k] * b[c * d + k].conj();
            }
            out[r * d + c] = v;
        }
    }
}

fn frob_sqr(m: &[Complex64]) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum()
}

fn matmul_into(a: &[Complex64], b: &[Complex64], d: usize, out: &mut [Complex64]) {
    out.fill(ZERO);
    for r in 0..d {
        for k in 0..d {
            let v = a[r * d + k];
            for c in 0..d {
                out[r * d + c] += v * b[k * d + c];
            }
        }
    }
}

struct Scratch {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    gap: Vec<Complex64>,
    da: Vec<Complex64>,
    db: Vec<Complex64>,
}

impl Scratch {
    fn new(d: usize) -> Self {
        let z = vec![ZERO; d * d];
        Scratch { a: z.clone(), b: z.clone(), gap: z.clone(), da: z.clone(), db: z }
    }
}

/// Order-1 term `‖AA^† − BB^†‖²` with `∂/∂W̄(g) = 2DA x̄_g − 2DB ȳ_g`.
fn linear_pair_grad(s: &WeightSlot, p: &OrbitPair, out: &mut [Complex64], sc: &mut Scratch) -> f64 {
    let d = s.dim();
    let order = s.order();
    let (x, y) = (p.x.values(), p.y.values());
    apply_into(s, x, &mut sc.a);
    apply_into(s, y, &mut sc.b);
    hermitian_gap_into(&sc.a, &sc.b, d, &mut sc.gap);
    matmul_into(&sc.gap, &sc.a, d, &mut sc.da);
    matmul_into(&sc.gap, &sc.b, d, &mut sc.db);
    for ab in 0..d * d {
        let (u, v) = (sc.da[ab] * 2.0, sc.db[ab] * 2.0);
        let row = &mut out[ab * order..(ab + 1) * order];
        for g in 0..order {
            row[g] += u * x[g].conj() - v * y[g].conj();
        }
    }
    frob_sqr(&sc.gap)
}

fn spectral_output(s: &WeightSlot, n: usize, x: &[Complex64]) -> CMatrix {
    kron_power(&s.apply(x), n) * conj_tensor_sum(s, n, x)
}

/// Coefficients `G` with `tr(N (X_1 ⊗ ⋯ ⊗ dX_k ⊗ ⋯ ⊗ X_n)) = Σ_{ab} G_{ab} dX_{ab}`.
fn partial_contraction(nmat: &CMatrix, factors: &[&CMatrix], k: usize, d: usize) -> CMatrix {
    let n = factors.len();
    let size = d.pow(n as u32);
    let digits = |mut code: usize| {
        let mut out = vec![0; n];
        for slot in out.iter_mut().rev() {
            *slot = code % d;
            code /= d;
        }
        out
    };
    let mut g = CMatrix::zeros(d, d);
    for i in 0..size {
        let id = digits(i);
        for j in 0..size {
            let jd = digits(j);
            let mut prod = nmat[(j, i)];
            for (m, f) in factors.iter().enumerate() {
                if m != k {
                    prod *= f[(id[m], jd[m])];
                }
            }
            g[(id[k], jd[k])] += prod;
        }
    }
    g
}

/// Adds the gradient of `±2 Re tr(U^† φ(x))` given upstream `U`, for `φ = A^{⊗n} C`.
fn tensor_output_grad(s: &WeightSlot, n: usize, x: &[Complex64], upstream: &CMatrix, out: &mut [Complex64]) {
    let d = s.dim();
    let order = s.order();
    let a = s.apply(x);
    let c = conj_tensor_sum(s, n, x);
    let head = &c * upstream.adjoint();
    let a_factors: Vec<&CMatrix> = vec![&a; n];
    let mut abar = CMatrix::zeros(d, d);
    for k in 0..n {
        abar += partial_contraction(&head, &a_factors, k, d).map(|v| v.conj());
    }
    let tail = upstream.adjoint() * kron_power(&a, n);
    for g in 0..order {
        let xg = x[g].conj();
        let mut local = abar.map(|v| v * xg);
        if x[g] != ZERO {
            let v = s.block(g).adjoint();
            let v_factors: Vec<&CMatrix> = vec![&v; n];
            for k in 0..n {
                local += partial_contraction(&tail, &v_factors, k, d).transpose() * xg;
            }
        }
        for r in 0..d {
            for c in 0..d {
                out[(r * d + c) * order + g] += local[(r, c)];
            }
        }
    }
}

fn tensor_pair_grad(s: &WeightSlot, n: usize, p: &OrbitPair, out: &mut [Complex64]) -> f64 {
    let diff = spectral_output(s, n, p.x.values()) - spectral_output(s, n, p.y.values());
    tensor_output_grad(s, n, p.x.values(), &diff, out);
    tensor_output_grad(s, n, p.y.values(), &(-&diff), out);
    diff.norm_squared()
}
