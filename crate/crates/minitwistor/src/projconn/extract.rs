//! Extraction of the Christoffel symbols from a splitting.
//!
//! With theta splitting tau, the per-chart combinations
//! `Phi_ab = dd phi + theta_a d_b phi + theta_b d_a phi` glue into a global
//! section of the normal bundle, hence expand in the Kodaira basis:
//! `Phi_ab(z) = Gamma^c_ab d_c phi(z)` with t-dependent coefficients. The
//! coefficients are recovered least-squares over circle samples in both
//! charts; the reported residual certifies that Phi really is global.

use super::{Christoffel, ChristoffelField};
use crate::cech::{split_cocycle_from_sweep, Cochain0Form, ConstantConvention, SplitDiagnostics};
use crate::error::{Error, Result};
use crate::exact::{RatFunc, Scalar};
use crate::family::{sym_count, sym_index, sym_pairs, AnnulusSweep, ExactCocycleQuotient, Family};
use nalgebra::DMatrix;
use num_complex::Complex64;

type C = Complex64;

#[derive(Clone, Copy, Debug)]
pub struct PipelineOpts {
    pub radius: f64,
    /// Window size for the splitting quadrature.
    pub k: usize,
    /// Circle samples per chart for the least-squares solve.
    pub n_samples: usize,
    pub convention: ConstantConvention,
}

impl Default for PipelineOpts {
    fn default() -> Self {
        PipelineOpts {
            radius: 1.0,
            k: 256,
            n_samples: 24,
            convention: ConstantConvention::Plus,
        }
    }
}

impl PipelineOpts {
    /// Smaller window for inner loops (geodesic right-hand sides); the
    /// quadrature converges geometrically so K = 64 keeps full accuracy for
    /// the built-in families.
    pub fn fast() -> Self {
        PipelineOpts {
            k: 64,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub gamma: Christoffel,
    /// max |A x - b| over all samples and index pairs.
    pub residual: f64,
    pub theta: Cochain0Form,
    pub split: SplitDiagnostics,
}

/// Full pipeline at one parameter point: sweep, split, least squares.
pub fn extract_connection(fam: &Family, t: &[C], opts: &PipelineOpts) -> Result<Extraction> {
    let sweep = fam.sweep(t, opts.radius, opts.k)?;
    let (theta, split) = split_cocycle_from_sweep(fam, &sweep, opts.convention)?;
    let (gamma, residual) = extract_from_sweep(fam, &sweep, &theta, opts.n_samples)?;
    if residual > fam.tol.extraction {
        return Err(Error::ResidualExceeded {
            what: "connection extraction least squares",
            value: residual,
            tol: fam.tol.extraction,
        });
    }
    Ok(Extraction {
        gamma,
        residual,
        theta,
        split,
    })
}

/// The extraction pipeline as a Christoffel field (evaluating it runs the
/// sweep-split-solve chain at each requested point).
pub fn pipeline_field(fam: std::sync::Arc<Family>, opts: PipelineOpts) -> ChristoffelField {
    let m = fam.m();
    ChristoffelField::from_fn(m, move |t| Ok(extract_connection(&fam, t, &opts)?.gamma))
}

/// Least-squares solve on an existing sweep with a given splitting.
pub fn extract_from_sweep(
    fam: &Family,
    sweep: &AnnulusSweep,
    theta: &Cochain0Form,
    n_samples: usize,
) -> Result<(Christoffel, f64)> {
    let m = fam.m();
    let k = sweep.z.len();
    let n = n_samples.min(k);
    if n < m {
        return Err(Error::RankDeficient);
    }
    let stride = (k / n).max(1);
    let idxs: Vec<usize> = (0..n).map(|j| (j * stride) % k).collect();
    let pairs = sym_pairs(m);

    // rows: chart-1 samples then chart-2 samples
    let mut a = DMatrix::from_element(2 * n, m, C::new(0.0, 0.0));
    let mut b = DMatrix::from_element(2 * n, pairs.len(), C::new(0.0, 0.0));
    for (row, &ki) in idxs.iter().enumerate() {
        let z = sweep.z[ki];
        let zh = sweep.zh[ki];
        let th1: Vec<C> = (0..m).map(|al| theta.eval1(al, z)).collect::<Result<_>>()?;
        let th2: Vec<C> = (0..m).map(|al| theta.eval2(al, zh)).collect::<Result<_>>()?;
        for gamma in 0..m {
            a[(row, gamma)] = sweep.dphi1[gamma][ki];
            a[(n + row, gamma)] = sweep.dphi2[gamma][ki];
        }
        for (pi, &(al, be)) in pairs.iter().enumerate() {
            let p = sym_index(m, al, be);
            b[(row, pi)] = sweep.ddphi1[p][ki]
                + th1[al] * sweep.dphi1[be][ki]
                + th1[be] * sweep.dphi1[al][ki];
            b[(n + row, pi)] = sweep.ddphi2[p][ki]
                + th2[al] * sweep.dphi2[be][ki]
                + th2[be] * sweep.dphi2[al][ki];
        }
    }

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin / smax < 1e-10 {
        return Err(Error::RankDeficient);
    }
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|_| Error::SolverFailure("least-squares solve"))?;
    let res_mat = &a * &x - &b;
    let residual = res_mat.iter().map(|v| v.norm()).fold(0.0, f64::max);

    let mut gamma = Christoffel::zero(m);
    for (pi, &(al, be)) in pairs.iter().enumerate() {
        for g in 0..m {
            gamma.set(g, al, be, x[(g, pi)]);
        }
    }
    Ok((gamma, residual))
}

/// Exact extraction for root-free families at Gaussian-rational t: the
/// expansion `Phi_ab = Gamma^c_ab d_c phi` is solved exactly from m sample
/// points and verified at further points, so the result is exact (and its
/// residual genuinely zero) rather than least-squares.
pub fn extract_connection_exact(
    quotient: &ExactCocycleQuotient,
    theta1: &[RatFunc],
    m: usize,
) -> Result<Vec<Scalar>> {
    let z_var = &quotient.z_var;
    // sample points away from poles of everything involved
    let candidates: Vec<Scalar> = [
        (5, 4),
        (-4, 3),
        (7, 5),
        (-9, 5),
        (13, 8),
        (-11, 8),
        (3, 2),
        (-5, 4),
        (17, 10),
    ]
    .iter()
    .map(|&(n, d)| Scalar::from_ratio(n, d))
    .collect();
    let eval_at = |r: &RatFunc, z: &Scalar| -> Result<Scalar> {
        let mut pt = std::collections::BTreeMap::new();
        pt.insert(z_var.clone(), z.clone());
        r.eval_scalar(&pt)
    };
    // Phi_ab as exact rational functions of z
    let pairs = sym_pairs(m);
    let mut phi_ab: Vec<RatFunc> = Vec::with_capacity(pairs.len());
    for (pi, &(al, be)) in pairs.iter().enumerate() {
        let mut v = quotient.ddphi1[pi].clone();
        v = v.add(&theta1[al].mul(&quotient.dphi1[be]));
        v = v.add(&theta1[be].mul(&quotient.dphi1[al]));
        phi_ab.push(v);
    }
    // pick m usable sample points (all denominators nonzero)
    let usable: Vec<&Scalar> = candidates
        .iter()
        .filter(|z| {
            quotient
                .dphi1
                .iter()
                .chain(phi_ab.iter())
                .all(|r| eval_at(r, z).is_ok())
        })
        .collect();
    if usable.len() < m + 2 {
        return Err(Error::RankDeficient);
    }
    // solve the m x m system per pair by exact Gaussian elimination
    let mut out = vec![Scalar::zero(); m * sym_count(m)];
    let mut basis = vec![vec![Scalar::zero(); m]; m];
    for (row, z) in usable.iter().take(m).enumerate() {
        for gamma in 0..m {
            basis[row][gamma] = eval_at(&quotient.dphi1[gamma], z)?;
        }
    }
    for (pi, phi) in phi_ab.iter().enumerate() {
        let rhs: Vec<Scalar> = usable
            .iter()
            .take(m)
            .map(|z| eval_at(phi, z))
            .collect::<Result<_>>()?;
        let sol = solve_exact(&basis, &rhs)?;
        // verify at the remaining sample points: Phi must be in the span
        for z in usable.iter().skip(m) {
            let mut acc = eval_at(phi, z)?;
            for gamma in 0..m {
                acc = &acc - &(&sol[gamma] * &eval_at(&quotient.dphi1[gamma], z)?);
            }
            if !acc.is_zero() {
                return Err(Error::InvariantViolation {
                    name: "global section expansion",
                    detail: "Phi is not an exact combination of the Kodaira basis".into(),
                });
            }
        }
        for gamma in 0..m {
            out[gamma * sym_count(m) + pi] = sol[gamma].clone();
        }
    }
    Ok(out)
}

fn solve_exact(a: &[Vec<Scalar>], b: &[Scalar]) -> Result<Vec<Scalar>> {
    let n = b.len();
    let mut m: Vec<Vec<Scalar>> = a.iter().map(|r| r.to_vec()).collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(Error::RankDeficient)?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].recip()?;
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..n {
                let delta = &factor * &m[col][c];
                m[r][c] = &m[r][c] - &delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] = &rhs[r] - &delta;
        }
    }
    (0..n)
        .map(|i| Ok(&rhs[i] * &m[i][i].recip()?))
        .collect()
}

