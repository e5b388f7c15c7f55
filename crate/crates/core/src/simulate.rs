//! Monte Carlo estimates of the outage probabilities.
//!
//! Trials are split into fixed blocks. Block `b` draws from a ChaCha8
//! stream keyed by `(seed, b)`, and blocks report integer event counts, so
//! the estimate depends only on the seed and the trial count and never on
//! how many worker threads run.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{InterferenceProfile, Network, Scenario};
use crate::outage::User;
use crate::spectral::{CorrelationModel, SpectralExpansion};

pub const MIN_TRIALS: u64 = 10_000;
const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p: f64,
    /// Binomial standard error; `3/trials` when no event was seen.
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_count(events: u64, trials: u64, seed: u64) -> Self {
        let p = events as f64 / trials as f64;
        let stderr = if events == 0 {
            3.0 / trials as f64
        } else {
            (p * (1.0 - p) / trials as f64).sqrt()
        };
        McEstimate { p, stderr, trials, seed }
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (value - self.p).abs() <= k * self.stderr
    }
}

/// γ_n = γ̄ Σ_i χ_i (sum of α_i unit exponentials), the eigenbasis form of
/// γ̄‖Ξ^{1/2}h‖².
pub fn sample_channel_gain<R: Rng + ?Sized>(expansion: &SpectralExpansion, snr: f64, rng: &mut R) -> f64 {
    let mut g = 0.0;
    for term in expansion.terms() {
        let mut s = 0.0;
        for _ in 0..term.multiplicity {
            s += unit_exp(rng);
        }
        g += term.chi * s;
    }
    snr * g
}

/// γ_3 = Σ_ℓ γ̄_ℓ · (unit exponential).
pub fn sample_interference<R: Rng + ?Sized>(profile: &InterferenceProfile, rng: &mut R) -> f64 {
    profile.inr().iter().map(|&m| m * unit_exp(rng)).sum()
}

fn unit_exp<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Distribution::<f64>::sample(&Exp1, rng)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "Monte Carlo needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Counts trials for which `event(γ_1, γ_2, γ_3)` holds.
fn count_events<F>(net: &Network, trials: u64, seed: u64, event: F) -> u64
where
    F: Fn(f64, f64, f64) -> bool + Sync,
{
    let blocks = trials.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let n = BLOCK.min(trials - b * BLOCK);
            let mut hits = 0u64;
            for _ in 0..n {
                let g1 = sample_channel_gain(&net.node1, net.snr, &mut rng);
                let g2 = sample_channel_gain(&net.node2, net.snr, &mut rng);
                let g3 = sample_interference(&net.interference, &mut rng);
                if event(g1, g2, g3) {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

/// γ_{S_n} < γ_th, written without division.
fn below(g1: f64, g2: f64, g3: f64, own: f64, c: f64, gth: f64) -> bool {
    g1 * g2 < gth * (own * (g3 + 1.0) + c)
}

pub fn estimate_network_user_outage(net: &Network, user: User, trials: u64, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    let (c, gth) = (net.gain.c, net.gamma_th);
    let hits = count_events(net, trials, seed, |g1, g2, g3| {
        let own = match user {
            User::One => g1,
            User::Two => g2,
        };
        below(g1, g2, g3, own, c, gth)
    });
    Ok(McEstimate::from_count(hits, trials, seed))
}

pub fn estimate_network_system_outage(net: &Network, trials: u64, seed: u64) -> Result<McEstimate> {
    check_trials(trials)?;
    let (c, gth) = (net.gain.c, net.gamma_th);
    let hits = count_events(net, trials, seed, |g1, g2, g3| {
        below(g1, g2, g3, g1, c, gth) || below(g1, g2, g3, g2, c, gth)
    });
    Ok(McEstimate::from_count(hits, trials, seed))
}

pub fn estimate_user_outage(scenario: &Scenario, user: User, trials: u64, seed: u64) -> Result<McEstimate> {
    estimate_network_user_outage(&scenario.resolve()?, user, trials, seed)
}

/// Pr(min(γ_S1, γ_S2) < γ_th) from shared draws; interference allowed.
pub fn estimate_system_outage(scenario: &Scenario, trials: u64, seed: u64) -> Result<McEstimate> {
    estimate_network_system_outage(&scenario.resolve()?, trials, seed)
}

/// Sample mean of γ_1 + γ_2 + γ_3 + 1, the defining expectation of C.
pub fn estimate_gain_constant(scenario: &Scenario, trials: u64, seed: u64) -> Result<f64> {
    check_trials(trials)?;
    let net = scenario.resolve()?;
    let mut rng = block_rng(seed, 0);
    let mut sum = 0.0;
    for _ in 0..trials {
        sum += sample_channel_gain(&net.node1, net.snr, &mut rng)
            + sample_channel_gain(&net.node2, net.snr, &mut rng)
            + sample_interference(&net.interference, &mut rng)
            + 1.0;
    }
    Ok(sum / trials as f64)
}

/// One trial of the physical model, formed both from the antenna vectors
/// and from the scalar gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitDraw {
    /// SINRs at S_1, S_2 from the combined received signal.
    pub from_vectors: [f64; 2],
    /// The same SINRs from γ_1, γ_2, γ_3 and C.
    pub from_gains: [f64; 2],
}

/// Square root of the correlation matrix of a node.
pub fn correlation_sqrt(model: &CorrelationModel) -> Result<DMatrix<f64>> {
    model.validate()?;
    let m = match model.matrix() {
        Some(m) => m,
        None => {
            let diag: Vec<f64> = match model {
                CorrelationModel::ExplicitSpectrum(s) => s
                    .iter()
                    .flat_map(|&(l, k)| std::iter::repeat_n(l, k as usize))
                    .collect(),
                _ => unreachable!(),
            };
            DMatrix::from_diagonal(&DVector::from_vec(diag))
        }
    };
    let eig = SymmetricEigen::new(m);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

fn complex_gaussian<R: Rng + ?Sized>(n: usize, power: f64, rng: &mut R) -> DVector<Complex64> {
    let s = (power / 2.0).sqrt();
    DVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// Draws h_1, h_2 and the interferer channels, applies MRT at the far source
/// and MRC at the receiving source, and returns the post-combining SINR with
/// unit noise power and transmit power γ̄.
pub fn explicit_draw<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<ExplicitDraw> {
    let net = scenario.resolve()?;
    let (omega1, omega2) = scenario.channel_powers()?;
    let roots = [correlation_sqrt(&scenario.node1)?, correlation_sqrt(&scenario.node2)?];
    let omegas = [omega1, omega2];
    let eff: Vec<DVector<Complex64>> = (0..2)
        .map(|n| {
            let h = complex_gaussian(roots[n].nrows(), omegas[n], rng);
            roots[n].map(|x| Complex64::new(x, 0.0)) * h
        })
        .collect();
    // Interference power at the relay, P_ℓ|g_ℓ|²/N_0.
    let interference: f64 = net
        .interference
        .inr()
        .iter()
        .map(|&m| complex_gaussian(1, m, rng)[0].norm_sqr())
        .sum();

    let ps = net.snr;
    let inv_g2 = net.gain.c / ps;
    let mut from_vectors = [0.0; 2];
    for rx in 0..2 {
        let tx = 1 - rx;
        let w_t = eff[tx].map(|z| z.conj()).unscale(eff[tx].norm());
        let w_r = eff[rx].adjoint().unscale(eff[rx].norm());
        // Gain of the forward path: w_R (Ξ^{1/2}h)_rx (Ξ^{1/2}h)_tx^T w_T.
        let first_hop = eff[tx].transpose() * &w_t;
        let back = (&w_r * &eff[rx])[(0, 0)];
        let signal = ps * (back * first_hop[(0, 0)]).norm_sqr();
        let relay_noise = back.norm_sqr() * (interference + 1.0);
        let own_noise = w_r.norm_squared() * inv_g2;
        from_vectors[rx] = signal / (relay_noise + own_noise);
    }

    let g1 = ps * eff[0].norm_squared();
    let g2 = ps * eff[1].norm_squared();
    let c = net.gain.c;
    let from_gains = [
        g1 * g2 / (g1 * (interference + 1.0) + c),
        g1 * g2 / (g2 * (interference + 1.0) + c),
    ];
    Ok(ExplicitDraw {
        from_vectors,
        from_gains,
    })
}
