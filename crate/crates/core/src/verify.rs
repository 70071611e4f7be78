//! Self-test suite over the algebraic invariants of a group.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::group::{FiniteGroup, Signal};
use crate::invariants::{clebsch_gordan, commutative_from_coefficients, nc_from_coefficients, SpectrumIndex};
use crate::linalg::frobenius_diff;
use crate::recover::{compute_l, recover_table};
use crate::repr::{fourier_transform, fourier_weight_tensor, inverse_fourier, irreps, verify_schur, FourierCoefficients};

pub const SCHUR_TOL: f64 = 1e-9;
pub const PARSEVAL_TOL: f64 = 1e-9;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const SPECTRA_TOL: f64 = 1e-9;
pub const CG_TOL: f64 = 1e-8;
const SIGNALS: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub family: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(family: &'static str, residual: f64, tolerance: f64) -> Self {
        Check { family, residual, tolerance, passed: residual <= tolerance }
    }

    fn flag(family: &'static str, ok: bool) -> Self {
        Check { family, residual: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, passed: ok }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub group: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn random_signal(rng: &mut impl Rng, n: usize) -> Signal {
    Signal::new((0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
}

/// Runs every invariant family on `group` with seeded random signals.
pub fn verify_group(group: &FiniteGroup, seed: u64) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = group.order();
    let set = irreps(group)?;
    let mut checks = vec![Check::flag("group axioms", group.check_axioms().is_ok())];

    let structure = set.check(group);
    checks.push(Check::flag("irreducible representations", structure.passes(SCHUR_TOL)));
    checks.push(Check::new("schur orthogonality", verify_schur(&set), SCHUR_TOL));

    let signals: Vec<Signal> = (0..SIGNALS).map(|_| random_signal(&mut rng, order)).collect();
    let (mut parseval, mut round_trip): (f64, f64) = (0.0, 0.0);
    for x in &signals {
        let hat = fourier_transform(group, &set, x)?;
        let energy = order as f64 * x.norm_sqr();
        parseval = parseval.max((hat.weighted_norm_sqr() - energy).abs() / energy.max(1.0));
        round_trip = round_trip.max(inverse_fourier(group, &set, &hat)?.max_abs_diff(x));
    }
    checks.push(Check::new("parseval", parseval, PARSEVAL_TOL));
    checks.push(Check::new("fourier round trip", round_trip, ROUND_TRIP_TOL));

    let k = set.len();
    let indices: Vec<SpectrumIndex> = SpectrumIndex::all(k, 1).into_iter().chain(SpectrumIndex::all(k, 2)).collect();
    let mut spectra: f64 = 0.0;
    let mut cg_residual: f64 = 0.0;
    let orbits: Vec<Vec<FourierCoefficients>> = signals
        .iter()
        .map(|x| (0..order).map(|g| fourier_transform(group, &set, &group.act(g, x)?)).collect())
        .collect::<Result<_>>()?;
    for (n, idx) in indices.iter().enumerate() {
        if group.is_commutative() {
            for orbit in &orbits {
                let base = commutative_from_coefficients(&set, idx, &orbit[0])?;
                for hat in orbit {
                    let moved = commutative_from_coefficients(&set, idx, hat)?;
                    spectra = spectra.max((moved - base).norm() / base.norm().max(1.0));
                }
            }
        } else {
            let cg = clebsch_gordan(&set, idx, seed.wrapping_add(n as u64))?;
            cg_residual = cg_residual.max(cg.residual);
            for orbit in &orbits {
                let base = nc_from_coefficients(idx, &orbit[0], &cg);
                let scale = crate::linalg::frobenius(&base).max(1.0);
                for hat in orbit {
                    spectra = spectra.max(frobenius_diff(&nc_from_coefficients(idx, hat, &cg), &base) / scale);
                }
            }
        }
    }
    checks.push(Check::new("spectra invariance", spectra, SPECTRA_TOL));
    if !group.is_commutative() {
        checks.push(Check::new("clebsch-gordan intertwining", cg_residual, CG_TOL));
    }

    let w = fourier_weight_tensor(group, &set)?;
    let report = recover_table(&w);
    checks.push(Check::flag("recovery from exact weights", report.table == group.table()));
    checks.push(Check::new("orthogonality defect of exact weights", compute_l(&w), SCHUR_TOL));
    Ok(VerifyReport { group: group.kind().to_string(), checks })
}

/// Group specs of every supported group of order at most `max`: cyclic and
/// dihedral groups and their direct products, up to factor reordering.
pub fn supported_specs(max: usize) -> Vec<String> {
    let mut atoms: Vec<(String, usize)> = (2..=max).map(|n| (format!("C{n}"), n)).collect();
    atoms.extend((3..).take_while(|n| 2 * n <= max).map(|n| (format!("D{n}"), 2 * n)));
    let mut out = vec!["C1".to_string()];
    fn extend(atoms: &[(String, usize)], start: usize, prefix: &mut Vec<usize>, order: usize, max: usize, out: &mut Vec<String>) {
        if !prefix.is_empty() {
            out.push(prefix.iter().map(|&i| atoms[i].0.as_str()).collect::<Vec<_>>().join("x"));
        }
        for i in start..atoms.len() {
            if order * atoms[i].1 <= max {
                prefix.push(i);
                extend(atoms, i, prefix, order * atoms[i].1, max, out);
                prefix.pop();
            }
        }
    }
    extend(&atoms, 0, &mut Vec::new(), 1, max, &mut out);
    out
}
