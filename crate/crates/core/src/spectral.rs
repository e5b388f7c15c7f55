//! Correlation models, eigenvalue spectra and the partial-fraction
//! expansion of the beamformed channel gain.
//!
//! With MRT/MRC beamforming the end-to-end gain of a node with correlation
//! matrix Ξ is `γ = γ̄ ‖Ξ^{1/2} h‖²`, a weighted sum of exponentials whose
//! weights are the eigenvalues of Ξ scaled by the mean channel power Ω.
//! Grouping equal weights χ_i with multiplicity α_i, the CDF is
//!
//! ```text
//! F(γ) = 1 − Σ_i Σ_{j=1}^{α_i} ϑ_ij Σ_{k<j} (γ/(γ̄χ_i))^k / k! · exp(−γ/(γ̄χ_i))
//! ```
//!
//! where ϑ_ij are the coefficients of the partial-fraction expansion
//! `Π_l (1 + sχ_l)^{−α_l} = Σ_{i,j} ϑ_ij (1 + sχ_i)^{−j}`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::real::{Dd, Real};
use crate::specfun::kernel;

/// Relative eigenvalue gap below which two eigenvalues count as coincident.
pub const COINCIDENCE_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationModel {
    /// Uncorrelated antennas.
    Identity { size: usize },
    /// Exponential model with entries `rho^|i−j|`, `0 ≤ rho < 1`.
    Exponential { size: usize, rho: f64 },
    /// Distinct positive eigenvalues with multiplicities.
    ExplicitSpectrum(Vec<(f64, u32)>),
}

impl CorrelationModel {
    pub fn size(&self) -> usize {
        match self {
            CorrelationModel::Identity { size } | CorrelationModel::Exponential { size, .. } => *size,
            CorrelationModel::ExplicitSpectrum(s) => s.iter().map(|&(_, m)| m as usize).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CorrelationModel::Identity { size } => check_size(*size),
            CorrelationModel::Exponential { size, rho } => {
                check_size(*size)?;
                if !(0.0..1.0).contains(rho) {
                    return Err(Error::InvalidParameter(format!(
                        "exponential correlation coefficient {rho} must lie in [0, 1)"
                    )));
                }
                Ok(())
            }
            CorrelationModel::ExplicitSpectrum(spectrum) => {
                if spectrum.is_empty() {
                    return Err(Error::InvalidParameter("explicit spectrum is empty".into()));
                }
                for &(lambda, m) in spectrum {
                    if !(lambda > 0.0) || !lambda.is_finite() {
                        return Err(Error::InvalidParameter(format!(
                            "eigenvalue {lambda} must be finite and positive"
                        )));
                    }
                    if m == 0 {
                        return Err(Error::InvalidParameter("multiplicity must be at least 1".into()));
                    }
                }
                check_distinct(spectrum.iter().map(|&(l, _)| l))
            }
        }
    }

    /// The correlation matrix, or `None` for an explicit spectrum.
    pub fn matrix(&self) -> Option<DMatrix<f64>> {
        match self {
            CorrelationModel::Identity { size } => Some(DMatrix::identity(*size, *size)),
            CorrelationModel::Exponential { size, rho } => Some(DMatrix::from_fn(*size, *size, |i, j| {
                rho.powi((i as i32 - j as i32).abs())
            })),
            CorrelationModel::ExplicitSpectrum(_) => None,
        }
    }
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::InvalidParameter("antenna count must be at least 1".into()));
    }
    Ok(())
}

fn check_distinct(values: impl Iterator<Item = f64>) -> Result<()> {
    let values: Vec<f64> = values.collect();
    for (a, &x) in values.iter().enumerate() {
        for &y in &values[a + 1..] {
            let gap = (x - y).abs() / x.abs().max(y.abs());
            if gap < COINCIDENCE_GAP {
                return Err(Error::CoincidentEigenvalues {
                    first: x,
                    second: y,
                    gap,
                });
            }
        }
    }
    Ok(())
}

/// Distinct eigenvalues with multiplicities, sorted descending.
pub fn eigen_spectrum(model: &CorrelationModel) -> Result<Vec<(f64, u32)>> {
    model.validate()?;
    match model {
        CorrelationModel::Identity { size } => Ok(vec![(1.0, *size as u32)]),
        CorrelationModel::Exponential { size, rho } if *rho == 0.0 => Ok(vec![(1.0, *size as u32)]),
        CorrelationModel::Exponential { size, .. } => {
            let n = *size;
            let xi = model.matrix().expect("matrix model");
            let eig = SymmetricEigen::new(xi.clone());
            let mut pairs: Vec<(f64, usize)> =
                eig.eigenvalues.iter().copied().enumerate().map(|(i, l)| (l, i)).collect();
            pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
            for &(lambda, col) in &pairs {
                let v = eig.eigenvectors.column(col);
                let resid = (&xi * v - v * lambda).norm();
                if resid > 1e-12 * n as f64 {
                    return Err(Error::NonConvergence(format!(
                        "eigenvalue {lambda} has residual {resid:e}"
                    )));
                }
                if !(lambda > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "correlation matrix is not full rank (eigenvalue {lambda:e})"
                    )));
                }
            }
            let spectrum: Vec<(f64, u32)> = pairs.iter().map(|&(l, _)| (l, 1)).collect();
            check_distinct(spectrum.iter().map(|&(l, _)| l))?;
            Ok(spectrum)
        }
        CorrelationModel::ExplicitSpectrum(s) => {
            let mut s = s.clone();
            s.sort_by(|a, b| b.0.total_cmp(&a.0));
            Ok(s)
        }
    }
}

/// One distinct scaled eigenvalue χ = λΩ with its expansion coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTerm {
    pub chi: f64,
    pub multiplicity: u32,
    /// `theta[j − 1]` is ϑ_ij.
    pub theta: Vec<Dd>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralExpansion {
    terms: Vec<SpectralTerm>,
    antennas: usize,
    omega: f64,
}

impl SpectralExpansion {
    pub fn new(model: &CorrelationModel, omega: f64) -> Result<Self> {
        expansion_coefficients(&eigen_spectrum(model)?, omega)
    }

    pub fn terms(&self) -> &[SpectralTerm] {
        &self.terms
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// True when every multiplicity is one.
    pub fn all_simple(&self) -> bool {
        self.terms.iter().all(|t| t.multiplicity == 1)
    }

    /// True for a single eigenvalue, the uncorrelated case.
    pub fn is_single(&self) -> bool {
        self.terms.len() == 1
    }

    /// Iterates `(χ_i, j, ϑ_ij)`.
    pub fn coefficients(&self) -> impl Iterator<Item = (f64, u32, Dd)> + '_ {
        self.terms.iter().flat_map(|t| {
            t.theta
                .iter()
                .enumerate()
                .map(move |(j, &th)| (t.chi, j as u32 + 1, th))
        })
    }

    /// Σ ϑ_ij, which is one.
    pub fn theta_sum(&self) -> f64 {
        self.coefficients().map(|(_, _, th)| th).sum::<Dd>().to_f64()
    }

    /// Σ ϑ_ij j χ_i, the mean of γ/γ̄, which is NΩ.
    pub fn theta_mean(&self) -> f64 {
        self.coefficients()
            .map(|(chi, j, th)| th * Dd::from(chi) * Dd::from(j as f64))
            .sum::<Dd>()
            .to_f64()
    }

    pub fn cdf<T: Real>(&self, snr: T, gamma: T) -> T {
        let mut tail = T::zero();
        for (chi, j, th) in self.coefficients() {
            let x = gamma / (snr * T::from_f64(chi));
            let mut term = T::one();
            let mut poly = T::one();
            for k in 1..j {
                term = term * x / T::from_f64(k as f64);
                poly += term;
            }
            tail += T::from_dd(th) * poly * (-x).exp();
        }
        T::one() - tail
    }

    pub fn pdf<T: Real>(&self, snr: T, gamma: T) -> T {
        let mut acc = T::zero();
        for (chi, j, th) in self.coefficients() {
            let scale = snr * T::from_f64(chi);
            let x = gamma / scale;
            acc += T::from_dd(th) * x.powi(j as i32 - 1) * (-x).exp()
                / (kernel::factorial::<T>(j - 1) * scale);
        }
        acc
    }
}

/// Builds the expansion for a spectrum of distinct eigenvalues scaled by Ω.
pub fn expansion_coefficients(spectrum: &[(f64, u32)], omega: f64) -> Result<SpectralExpansion> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mean channel power {omega} must be finite and positive"
        )));
    }
    CorrelationModel::ExplicitSpectrum(spectrum.to_vec()).validate()?;
    let chi: Vec<f64> = spectrum.iter().map(|&(l, _)| l * omega).collect();
    check_distinct(chi.iter().copied())?;
    let alpha: Vec<u32> = spectrum.iter().map(|&(_, m)| m).collect();
    let antennas = alpha.iter().map(|&a| a as usize).sum();

    let terms = if chi.len() == 1 {
        let mut theta = vec![Dd::ZERO; alpha[0] as usize];
        theta[alpha[0] as usize - 1] = Dd::ONE;
        vec![SpectralTerm {
            chi: chi[0],
            multiplicity: alpha[0],
            theta,
        }]
    } else if alpha.iter().all(|&a| a == 1) {
        distinct_coefficients(&chi)
    } else {
        general_coefficients(&chi, &alpha)
    };
    Ok(SpectralExpansion {
        terms,
        antennas,
        omega,
    })
}

/// ϑ_i = χ_i^{N−1} / Π_{l≠i}(χ_i − χ_l)
fn distinct_coefficients(chi: &[f64]) -> Vec<SpectralTerm> {
    let n = chi.len();
    chi.iter()
        .enumerate()
        .map(|(i, &ci)| {
            let ci_d = Dd::from(ci);
            let mut th = ci_d.powi(n as i32 - 1);
            for (l, &cl) in chi.iter().enumerate() {
                if l != i {
                    th = th / (ci_d - Dd::from(cl));
                }
            }
            SpectralTerm {
                chi: ci,
                multiplicity: 1,
                theta: vec![th],
            }
        })
        .collect()
}

/// Repeated eigenvalues. With y = 1/χ the product factors as
/// `Π χ_l^{−α_l} Π (s + y_l)^{−α_l}`; around s = −y_i the cofactor
/// `g(s) = Π_{l≠i}(s + y_l)^{−α_l}` is expanded in a Taylor series through
/// g' = g·(ln g)', and the coefficient of (s + y_i)^{−j} is g_{α_i − j}.
fn general_coefficients(chi: &[f64], alpha: &[u32]) -> Vec<SpectralTerm> {
    let y: Vec<Dd> = chi.iter().map(|&c| Dd::from(c).recip()).collect();
    let mut ln_norm = Dd::ZERO;
    for (&c, &a) in chi.iter().zip(alpha) {
        ln_norm -= Dd::from(a as f64) * Dd::from(c).ln();
    }
    chi.iter()
        .enumerate()
        .map(|(i, &ci)| {
            let order = alpha[i] as usize;
            // h_p: Taylor coefficients of (ln g)' about s = −y_i
            let h: Vec<Dd> = (0..order)
                .map(|p| {
                    let mut acc = Dd::ZERO;
                    for (l, &al) in alpha.iter().enumerate() {
                        if l == i {
                            continue;
                        }
                        let d = y[l] - y[i];
                        let mut t = Dd::from(al as f64) / d.powi(p as i32 + 1);
                        if p % 2 == 1 {
                            t = -t;
                        }
                        acc -= t;
                    }
                    acc
                })
                .collect();
            let mut g = Vec::with_capacity(order);
            let mut g0 = Dd::ONE;
            for (l, &al) in alpha.iter().enumerate() {
                if l != i {
                    g0 = g0 / (y[l] - y[i]).powi(al as i32);
                }
            }
            g.push(g0);
            for n in 0..order.saturating_sub(1) {
                let s: Dd = (0..=n).map(|m| g[m] * h[n - m]).sum();
                g.push(s / Dd::from((n + 1) as f64));
            }
            let ci_d = Dd::from(ci);
            let theta = (1..=order)
                .map(|j| g[order - j] * ci_d.powi(j as i32) * ln_norm.exp())
                .collect();
            SpectralTerm {
                chi: ci,
                multiplicity: alpha[i],
                theta,
            }
        })
        .collect()
}

fn check_gain_args(snr: f64, gamma: f64) -> Result<()> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::InvalidParameter(format!("mean SNR {snr} must be finite and positive")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gain {gamma} must be nonnegative")));
    }
    Ok(())
}

/// CDF of the beamformed gain at mean SNR `snr`.
pub fn gain_cdf(expansion: &SpectralExpansion, snr: f64, gamma: f64) -> Result<f64> {
    check_gain_args(snr, gamma)?;
    if gamma == 0.0 {
        return Ok(0.0);
    }
    Ok(expansion
        .cdf(Dd::from(snr), Dd::from(gamma))
        .to_f64()
        .clamp(0.0, 1.0))
}

/// Density of the beamformed gain at mean SNR `snr`.
pub fn gain_pdf(expansion: &SpectralExpansion, snr: f64, gamma: f64) -> Result<f64> {
    check_gain_args(snr, gamma)?;
    Ok(expansion.pdf(Dd::from(snr), Dd::from(gamma)).to_f64().max(0.0))
}
