//! Exact user outage.
//!
//! For user 2 the outage event γ_S2 < γ_th is γ_1 < γ_th(γ_3 + 1) + Cγ_th/γ_2,
//! so the outage probability is the expectation of F_γ1 over γ_2 and γ_3.
//! Expanding F_γ1 binomially, the γ_2 integral of each term is a Bessel K
//! function and the γ_3 integral a finite sum over the interferers:
//!
//! ```text
//! P = 1 − Σ_{i,j} Σ_{k<j} ϑ_1ij/k! (γ_th/a)^k e^{−γ_th/a} Σ_{l≤k} C(k,l) C^{k−l}
//!       Σ_{r,t} ϑ_2rt/(Γ(t) b^t) · 2 (Cγ_th b/a)^{ν/2} K_ν(2√(Cγ_th/(ab)))
//!       Σ_{s≤l} l!/(l−s)! Σ_ℓ β_ℓ (γ_th/a + 1/γ̄_ℓ)^{−s−1}
//! ```
//!
//! with a = γ̄χ_1i, b = γ̄χ_2r and ν = l + t − k. User 1 is the same
//! expression with the two sources exchanged. All sums are accumulated in
//! double-double arithmetic: at high SNR the result is a difference of
//! order 1e−15 between one and a sum of order one.

use crate::error::{Error, Result};
use crate::model::{InterferenceProfile, Network, Scenario};
use crate::outage::{Method, OutageResult, User};
use crate::real::{Dd, Real};
use crate::spectral::CorrelationModel;
use crate::specfun::kernel;

/// The network seen from `user`: `node2` is the user's own source.
pub fn oriented(network: &Network, user: User) -> Network {
    match user {
        User::Two => network.clone(),
        User::One => network.swapped(),
    }
}

/// 2 (Cγ_th b/a)^{ν/2} K_ν(2√(Cγ_th/(ab))), combined through logarithms
/// so that neither factor overflows on its own.
pub(crate) fn bessel_part(nu: i32, c_gth: Dd, a: Dd, b: Dd) -> Dd {
    let z = (Dd::from(4.0) * c_gth / (a * b)).sqrt();
    let ln = Dd::LN2
        + Dd::from(nu as f64 / 2.0) * (c_gth * b / a).ln()
        + kernel::ln_bessel_k(nu.unsigned_abs(), z);
    ln.exp()
}

/// E[(γ_3 + 1)^l e^{−x γ_3}] = Σ_{s≤l} l!/(l−s)! Σ_ℓ β_ℓ (x + 1/γ̄_ℓ)^{−s−1};
/// one when there is no interference.
pub(crate) fn interference_factor(l: u32, x: Dd, profile: &InterferenceProfile) -> Dd {
    if profile.is_empty() {
        return Dd::ONE;
    }
    let mut total = Dd::ZERO;
    for (&inr, &beta) in profile.inr().iter().zip(profile.beta()) {
        let p = x + Dd::from(inr).recip();
        let mut falling = Dd::ONE;
        let mut pw = p.recip();
        let mut acc = pw;
        for s in 1..=l {
            falling *= Dd::from((l - s + 1) as f64);
            pw = pw / p;
            acc += falling * pw;
        }
        total += beta * acc;
    }
    total
}

/// Σ of the closed-form terms; the outage is one minus this.
fn general_sum(net: &Network) -> Dd {
    let snr = Dd::from(net.snr);
    let gth = Dd::from(net.gamma_th);
    let c = Dd::from(net.gain.c);
    let c_gth = c * gth;
    let mut total = Dd::ZERO;
    for (chi1, j, th1) in net.node1.coefficients() {
        if th1.abs().to_f64() < 1e-300 {
            continue;
        }
        let a = snr * Dd::from(chi1);
        let x = gth / a;
        let e = (-x).exp();
        let mut xk = Dd::ONE;
        for k in 0..j {
            if k > 0 {
                xk = xk * x / Dd::from(k as f64);
            }
            for l in 0..=k {
                let outer = th1
                    * xk
                    * e
                    * kernel::binomial::<Dd>(k, l)
                    * c.powi((k - l) as i32)
                    * interference_factor(l, x, &net.interference);
                let mut inner = Dd::ZERO;
                for (chi2, t, th2) in net.node2.coefficients() {
                    if th2.abs().to_f64() < 1e-300 {
                        continue;
                    }
                    let b = snr * Dd::from(chi2);
                    let nu = l as i32 + t as i32 - k as i32;
                    inner += th2 / (kernel::factorial::<Dd>(t - 1) * b.powi(t as i32))
                        * bessel_part(nu, c_gth, a, b);
                }
                total += outer * inner;
            }
        }
    }
    total
}

fn require_interference(net: &Network) -> Result<()> {
    if net.interference.is_empty() {
        return Err(Error::Unsupported(
            "the interference closed form needs at least one interferer; \
             use the interference-free user outage or the system outage instead"
                .into(),
        ));
    }
    Ok(())
}

/// General correlated closed form on a resolved network.
pub fn network_user_outage_exact(network: &Network, user: User) -> Result<OutageResult> {
    require_interference(network)?;
    Ok(evaluate_general(&oriented(network, user), Method::ExactGeneral))
}

/// User outage with γ_3 ≡ 0.
pub fn network_user_outage_interference_free(network: &Network, user: User) -> Result<OutageResult> {
    if !network.interference.is_empty() {
        return Err(Error::Unsupported(
            "interference-free user outage requested for a scenario with interferers".into(),
        ));
    }
    Ok(evaluate_general(&oriented(network, user), Method::ExactGeneral))
}

fn evaluate_general(net: &Network, method: Method) -> OutageResult {
    if net.gamma_th == 0.0 {
        return OutageResult::new(0.0, method);
    }
    OutageResult::new((Dd::ONE - general_sum(net)).to_f64(), method)
}

/// Distinct eigenvalues at both sources: only j = t = 1 survive.
pub fn network_user_outage_exponential(network: &Network, user: User) -> Result<OutageResult> {
    require_interference(network)?;
    if !network.node1.all_simple() || !network.node2.all_simple() {
        return Err(Error::Unsupported(
            "the exponential-correlation form needs distinct eigenvalues at both sources".into(),
        ));
    }
    let net = oriented(network, user);
    if net.gamma_th == 0.0 {
        return Ok(OutageResult::new(0.0, Method::ExactExponential));
    }
    let snr = Dd::from(net.snr);
    let gth = Dd::from(net.gamma_th);
    let c_gth = Dd::from(net.gain.c) * gth;
    let mut total = Dd::ZERO;
    for (chi1, _, th1) in net.node1.coefficients() {
        let a = snr * Dd::from(chi1);
        let x = gth / a;
        let mut inner = Dd::ZERO;
        for (chi2, _, th2) in net.node2.coefficients() {
            let b = snr * Dd::from(chi2);
            inner += th2 / b * bessel_part(1, c_gth, a, b);
        }
        total += th1 * (-x).exp() * inner * interference_factor(0, x, &net.interference);
    }
    Ok(OutageResult::new((Dd::ONE - total).to_f64(), Method::ExactExponential))
}

/// Uncorrelated antennas: a single Erlang term at each source.
pub fn network_user_outage_iid(network: &Network, user: User) -> Result<OutageResult> {
    require_interference(network)?;
    if !network.node1.is_single() || !network.node2.is_single() {
        return Err(Error::Unsupported(
            "the independent-fading form needs uncorrelated antennas at both sources".into(),
        ));
    }
    let net = oriented(network, user);
    if net.gamma_th == 0.0 {
        return Ok(OutageResult::new(0.0, Method::ExactIid));
    }
    let n1 = net.node1.antennas() as u32;
    let n2 = net.node2.antennas() as u32;
    let snr = Dd::from(net.snr);
    let gth = Dd::from(net.gamma_th);
    let c = Dd::from(net.gain.c);
    let a = snr * Dd::from(net.node1.terms()[0].chi);
    let b = snr * Dd::from(net.node2.terms()[0].chi);
    let x = gth / a;
    let w2 = (kernel::factorial::<Dd>(n2 - 1) * b.powi(n2 as i32)).recip();
    let mut total = Dd::ZERO;
    let mut xk = Dd::ONE;
    for k in 0..n1 {
        if k > 0 {
            xk = xk * x / Dd::from(k as f64);
        }
        for l in 0..=k {
            let nu = n2 as i32 + l as i32 - k as i32;
            total += xk
                * kernel::binomial::<Dd>(k, l)
                * c.powi((k - l) as i32)
                * w2
                * bessel_part(nu, c * gth, a, b)
                * interference_factor(l, x, &net.interference);
        }
    }
    total = total * (-x).exp();
    Ok(OutageResult::new((Dd::ONE - total).to_f64(), Method::ExactIid))
}

/// The general form, or its interference-free limit when there are no
/// interferers.
pub fn network_user_outage(network: &Network, user: User) -> Result<OutageResult> {
    if network.interference.is_empty() {
        network_user_outage_interference_free(network, user)
    } else {
        network_user_outage_exact(network, user)
    }
}

pub fn user_outage(scenario: &Scenario, user: User) -> Result<OutageResult> {
    network_user_outage(&scenario.resolve()?, user)
}

pub fn user_outage_exact(scenario: &Scenario, user: User) -> Result<OutageResult> {
    network_user_outage_exact(&scenario.resolve()?, user)
}

/// The exponential-correlation form. A zero correlation coefficient makes
/// every eigenvalue equal; that case is handed to the independent form.
pub fn user_outage_exponential(scenario: &Scenario, user: User) -> Result<OutageResult> {
    let exponential = |m: &CorrelationModel| match m {
        CorrelationModel::Exponential { .. } => true,
        CorrelationModel::ExplicitSpectrum(s) => s.iter().all(|&(_, m)| m == 1),
        CorrelationModel::Identity { .. } => true,
    };
    if !exponential(&scenario.node1) || !exponential(&scenario.node2) {
        return Err(Error::Unsupported(
            "the exponential-correlation form needs exponential or distinct-eigenvalue models".into(),
        ));
    }
    let net = scenario.resolve()?;
    if net.node1.all_simple() && net.node2.all_simple() {
        network_user_outage_exponential(&net, user)
    } else if net.node1.is_single() && net.node2.is_single() {
        network_user_outage_iid(&net, user)
    } else {
        Err(Error::Unsupported(
            "mixing a zero and a nonzero correlation coefficient needs the general form".into(),
        ))
    }
}

pub fn user_outage_iid(scenario: &Scenario, user: User) -> Result<OutageResult> {
    network_user_outage_iid(&scenario.resolve()?, user)
}
