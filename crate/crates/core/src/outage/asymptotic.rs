//! High-SNR expansion of the user outage.
//!
//! With fixed INRs and C ≈ ργ̄, every term of the exact closed form depends
//! on γ̄ only through ε = γ_th/γ̄. Writing u = ρε/(χ_1χ_2), a term is
//!
//! ```text
//! 2 w · (ε/χ_1)^k (ρ/χ_2)^{k−l} u^{ν/2} K_ν(2√u) · e^{−ε/χ_1} · I_l(ε/χ_1)
//! ```
//!
//! and each factor has a power series in ε whose coefficients are affine in
//! ln ε (only the Bessel factor contributes logarithms). Multiplying the
//! three series and summing over the index set, the coefficients of ε^m for
//! m < θ = min(N_1, N_2) cancel against the leading one, and the outage is
//!
//! ```text
//! P ≈ (A + B ln ε) ε^θ
//! ```
//!
//! B vanishes unless N_1 = N_2.

use crate::error::{Error, Result};
use crate::model::{Interference, InterferenceProfile, Network, Scenario};
use crate::outage::exact::oriented;
use crate::outage::User;
use crate::real::{Dd, Real};
use crate::specfun::kernel;

/// `a + b ln ε`
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogCoef {
    a: Dd,
    b: Dd,
}

impl LogCoef {
    const ZERO: LogCoef = LogCoef {
        a: Dd::ZERO,
        b: Dd::ZERO,
    };

    fn scale(self, s: Dd) -> LogCoef {
        LogCoef {
            a: self.a * s,
            b: self.b * s,
        }
    }

    fn add(self, o: LogCoef) -> LogCoef {
        LogCoef {
            a: self.a + o.a,
            b: self.b + o.b,
        }
    }

    fn at(self, ln_eps: Dd) -> Dd {
        self.a + self.b * ln_eps
    }
}

/// Series of u^{ν/2} K_ν(2√u) as `(power of u, constant, coefficient of ln u)`,
/// keeping powers up to `max_power`.
fn bessel_u_series(nu: i32, max_power: i32) -> Vec<(i32, Dd, Dd)> {
    let half = Dd::from(0.5);
    let fact = |n: i32| kernel::factorial::<Dd>(n as u32);
    let psi = |n: i32| kernel::digamma::<Dd>(n as u32);
    let sign = |e: i32| if e.rem_euclid(2) == 0 { Dd::ONE } else { -Dd::ONE };
    let mut out = vec![];
    if nu == 0 {
        for w in 0..=max_power.max(-1) {
            let d = fact(w) * fact(w);
            out.push((w, psi(w + 1) / d, -half / d));
        }
        return out;
    }
    let n = nu.abs();
    // ν > 0 carries the series as is; ν < 0 is u^{−n} times it
    let shift = if nu > 0 { 0 } else { -n };
    for w in 0..n {
        let p = w + shift;
        if p <= max_power {
            out.push((p, half * sign(w) * fact(n - w - 1) / fact(w), Dd::ZERO));
        }
    }
    let mut w = 0;
    while n + w + shift <= max_power {
        let d = fact(w) * fact(n + w);
        let s = sign(n + 1) * half / d;
        out.push((n + w + shift, -s * (psi(w + 1) + psi(n + w + 1)), s));
        w += 1;
    }
    out
}

/// ε-series of (ε/χ_1)^k (ρ/χ_2)^{k−l} u^{ν/2} K_ν(2√u) through ε^θ.
fn bessel_factor(l: u32, t: u32, k: u32, rho: Dd, chi1: Dd, chi2: Dd, theta: u32) -> Vec<LogCoef> {
    let nu = l as i32 + t as i32 - k as i32;
    let q = rho / (chi1 * chi2);
    let ln_q = q.ln();
    let pre = (rho / chi2).powi(k as i32 - l as i32) / chi1.powi(k as i32);
    let mut out = vec![LogCoef::ZERO; theta as usize + 1];
    for (p, alpha, beta) in bessel_u_series(nu, theta as i32 - k as i32) {
        let m = k as i32 + p;
        debug_assert!(m >= 0);
        let s = pre * q.powi(p);
        out[m as usize] = out[m as usize].add(LogCoef {
            a: (alpha + beta * ln_q) * s,
            b: beta * s,
        });
    }
    out
}

/// ε-series of e^{−ε/χ_1}.
fn exp_factor(chi1: Dd, theta: u32) -> Vec<Dd> {
    let mut out = Vec::with_capacity(theta as usize + 1);
    let mut c = Dd::ONE;
    for p in 0..=theta {
        if p > 0 {
            c = -c / (chi1 * Dd::from(p as f64));
        }
        out.push(c);
    }
    out
}

/// ε-series of Σ_{s≤l} l!/(l−s)! Σ_ℓ β_ℓ (ε/χ_1 + 1/γ̄_ℓ)^{−s−1}.
fn interference_series(l: u32, chi1: Dd, profile: &InterferenceProfile, theta: u32) -> Vec<Dd> {
    let mut out = vec![Dd::ZERO; theta as usize + 1];
    if profile.is_empty() {
        out[0] = Dd::ONE;
        return out;
    }
    for (&inr, &beta) in profile.inr().iter().zip(profile.beta()) {
        let g = Dd::from(inr);
        let mut falling = Dd::ONE;
        for s in 0..=l {
            if s > 0 {
                falling *= Dd::from((l - s + 1) as f64);
            }
            // γ̄^{s+1} (1 + γ̄ε/χ_1)^{−s−1}
            let base = beta * falling * g.powi(s as i32 + 1);
            for p in 0..=theta {
                let c = base * kernel::binomial::<Dd>(s + p, p) * (-g / chi1).powi(p as i32);
                out[p as usize] += c;
            }
        }
    }
    out
}

fn convolve(a: &[LogCoef], b: &[Dd]) -> Vec<LogCoef> {
    let mut out = vec![LogCoef::ZERO; a.len()];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            if i + j < a.len() {
                out[i + j] = out[i + j].add(x.scale(y));
            }
        }
    }
    out
}

/// Coefficients of ε^0..ε^θ of the outage with all index sums carried out.
fn outage_series(net: &Network, rho: Dd, theta: u32) -> Vec<LogCoef> {
    let mut total = vec![LogCoef::ZERO; theta as usize + 1];
    for (chi1, j, th1) in net.node1.coefficients() {
        if th1.abs().to_f64() < 1e-300 {
            continue;
        }
        let chi1 = Dd::from(chi1);
        let e = exp_factor(chi1, theta);
        for k in 0..j {
            for l in 0..=k {
                let ei = convolve(
                    &e.iter().map(|&a| LogCoef { a, b: Dd::ZERO }).collect::<Vec<_>>(),
                    &interference_series(l, chi1, &net.interference, theta),
                );
                let ei: Vec<Dd> = ei.iter().map(|c| c.a).collect();
                let w1 = Dd::from(2.0) * th1 * kernel::binomial::<Dd>(k, l) / kernel::factorial::<Dd>(k);
                for (chi2, t, th2) in net.node2.coefficients() {
                    if th2.abs().to_f64() < 1e-300 {
                        continue;
                    }
                    let w = w1 * th2 / kernel::factorial::<Dd>(t - 1);
                    let bes = bessel_factor(l, t, k, rho, chi1, Dd::from(chi2), theta);
                    for (m, c) in convolve(&bes, &ei).into_iter().enumerate() {
                        total[m] = total[m].add(c.scale(w));
                    }
                }
            }
        }
    }
    // P = 1 − Σ
    let mut p: Vec<LogCoef> = total.iter().map(|c| c.scale(-Dd::ONE)).collect();
    p[0].a += Dd::ONE;
    p
}

/// Leading high-SNR behaviour of one user's outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticExpansion {
    /// Diversity order min(N_1, N_2).
    pub theta: u32,
    /// c_θ = `constant + log_coefficient · ln(γ_th/γ̄)`.
    pub constant: f64,
    pub log_coefficient: f64,
    pub gamma_th: f64,
}

impl AsymptoticExpansion {
    pub fn coefficient(&self, snr: f64) -> f64 {
        self.constant + self.log_coefficient * (self.gamma_th / snr).ln()
    }

    /// c_θ (γ_th/γ̄)^θ
    pub fn evaluate(&self, snr: f64) -> f64 {
        self.coefficient(snr) * (self.gamma_th / snr).powi(self.theta as i32)
    }
}

fn check(net: &Network) -> Result<u32> {
    if !(net.gamma_th > 0.0) {
        return Err(Error::InvalidParameter("the expansion needs a positive threshold".into()));
    }
    Ok(net.node1.antennas().min(net.node2.antennas()) as u32)
}

fn expansion(theta: u32, c: LogCoef, gamma_th: f64) -> AsymptoticExpansion {
    AsymptoticExpansion {
        theta,
        constant: c.a.to_f64(),
        log_coefficient: c.b.to_f64(),
        gamma_th,
    }
}

/// Leading coefficient from the general index sums, together with the
/// lower-order coefficients (which vanish analytically) for diagnostics.
pub fn general_expansion(network: &Network, user: User) -> Result<(AsymptoticExpansion, Vec<(f64, f64)>)> {
    let net = oriented(network, user);
    let theta = check(&net)?;
    let rho = Dd::from(net.gain.rho_asym);
    let series = outage_series(&net, rho, theta);
    let lower = series[..theta as usize]
        .iter()
        .map(|c| (c.a.to_f64(), c.b.to_f64()))
        .collect();
    Ok((expansion(theta, series[theta as usize], net.gamma_th), lower))
}

/// Leading coefficient for distinct eigenvalues at both sources, where only
/// the ν = 1 Bessel term survives.
pub fn exponential_expansion(network: &Network, user: User) -> Result<AsymptoticExpansion> {
    let net = oriented(network, user);
    let theta = check(&net)?;
    if !net.node1.all_simple() || !net.node2.all_simple() {
        return Err(Error::Unsupported(
            "the exponential-correlation expansion needs distinct eigenvalues".into(),
        ));
    }
    let rho = Dd::from(net.gain.rho_asym);
    let half = Dd::from(0.5);
    let mut c = LogCoef::ZERO;
    for (chi1, _, th1) in net.node1.coefficients() {
        let chi1 = Dd::from(chi1);
        // I_c = Σ β γ̄^{c+1} (−γ̄/χ_1)^c
        let ic: Vec<Dd> = (0..=theta)
            .map(|p| {
                net.interference
                    .inr()
                    .iter()
                    .zip(net.interference.beta())
                    .map(|(&g, &b)| {
                        let g = Dd::from(g);
                        b * g * (-g / chi1).powi(p as i32)
                    })
                    .sum::<Dd>()
            })
            .collect();
        let ic = if net.interference.is_empty() {
            (0..=theta).map(|p| if p == 0 { Dd::ONE } else { Dd::ZERO }).collect()
        } else {
            ic
        };
        let eb = exp_factor(chi1, theta);
        for (chi2, _, th2) in net.node2.coefficients() {
            let q = rho / (chi1 * Dd::from(chi2));
            let ln_q = q.ln();
            for a in 0..=theta {
                let b1 = if a == 0 {
                    LogCoef { a: half, b: Dd::ZERO }
                } else {
                    let w = a - 1;
                    let d = kernel::factorial::<Dd>(w) * kernel::factorial::<Dd>(w + 1);
                    let s = half * q.powi(a as i32) / d;
                    let psi = kernel::digamma::<Dd>(w + 1) + kernel::digamma::<Dd>(w + 2);
                    LogCoef {
                        a: s * (ln_q - psi),
                        b: s,
                    }
                };
                let mut rest = Dd::ZERO;
                for b in 0..=(theta - a) {
                    rest += eb[b as usize] * ic[(theta - a - b) as usize];
                }
                c = c.add(b1.scale(Dd::from(-2.0) * th1 * th2 * rest));
            }
        }
    }
    Ok(expansion(theta, c, net.gamma_th))
}

pub fn network_asymptotic_outage(network: &Network, user: User) -> Result<AsymptoticExpansion> {
    if network.node1.all_simple() && network.node2.all_simple() {
        exponential_expansion(network, user)
    } else {
        Ok(general_expansion(network, user)?.0)
    }
}

/// The expansion holds for INRs that stay fixed as γ̄ grows; scenarios with
/// SNR-proportional interference are rejected (their outage floors).
pub fn asymptotic_outage(scenario: &Scenario, user: User) -> Result<AsymptoticExpansion> {
    if let Interference::ProportionalToSnr(_) = scenario.interference {
        return Err(Error::Unsupported(
            "interference that scales with the SNR has zero diversity; no power-law expansion exists".into(),
        ));
    }
    network_asymptotic_outage(&scenario.resolve()?, user)
}

/// The ε^θ coefficient of the Bessel factor
/// (ε/χ_1)^k (ρ/χ_2)^{k−l} u^{ν/2} K_ν(2√u), ν = l + t − k, multiplied by
/// χ_1^θ and evaluated with ln u = ln(ργ_th/(γ̄χ_1χ_2)).
///
/// The three branches ν > 0, ν = 0 and ν < 0 come from the three shapes of
/// the small-argument series of K_ν.
#[allow(clippy::too_many_arguments)]
pub fn phi_term(
    l: u32,
    t: u32,
    k: u32,
    rho: f64,
    chi1: f64,
    chi2: f64,
    gamma_th: f64,
    snr: f64,
    theta: u32,
) -> Result<f64> {
    for (name, v) in [("rho", rho), ("chi1", chi1), ("chi2", chi2), ("gamma_th", gamma_th), ("snr", snr)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be finite and positive")));
        }
    }
    if l > k || t == 0 {
        return Err(Error::InvalidParameter(format!(
            "indices (l, t, k) = ({l}, {t}, {k}) need l ≤ k and t ≥ 1"
        )));
    }
    let chi1_d = Dd::from(chi1);
    let series = bessel_factor(l, t, k, Dd::from(rho), chi1_d, Dd::from(chi2), theta);
    let ln_eps = (Dd::from(gamma_th) / Dd::from(snr)).ln();
    Ok((series[theta as usize].at(ln_eps) * chi1_d.powi(theta as i32)).to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{db_to_linear, ChannelPowers};
    use crate::outage::exact::network_user_outage_exact;
    use crate::outage::exact::network_user_outage_interference_free;
    use crate::spectral::CorrelationModel;

    fn scenario(n1: usize, n2: usize, rho: f64, snr_db: f64, inr_db: &[f64]) -> Scenario {
        let model = |n| CorrelationModel::Exponential { size: n, rho };
        Scenario {
            node1: model(n1),
            node2: model(n2),
            snr: db_to_linear(snr_db),
            gamma_th: db_to_linear(5.0),
            powers: ChannelPowers::Geometry {
                omega0: 1.0,
                kappa: 0.5,
                mu: 4.0,
            },
            interference: if inr_db.is_empty() {
                Interference::None
            } else {
                Interference::Fixed(inr_db.iter().map(|&d| db_to_linear(d)).collect())
            },
        }
    }

    /// Exact outage with C replaced by ρ_asym γ̄, the quantity the expansion
    /// approximates term by term.
    fn exact_with_linear_gain(s: &Scenario, user: User) -> f64 {
        let mut net = s.resolve().unwrap();
        net.gain.c = net.gain.rho_asym * net.snr;
        if net.interference.is_empty() {
            network_user_outage_interference_free(&net, user).unwrap().p
        } else {
            network_user_outage_exact(&net, user).unwrap().p
        }
    }

    /// Trapezoid rule for K_ν in double-double, as in the special-function
    /// tests; independent of the series used by the expansion.
    fn bessel_k_quadrature(nu: u32, x: Dd) -> Dd {
        let h = Dd::from(1.0 / 64.0);
        let half = Dd::from(0.5);
        let mut sum = (-x).exp() * half;
        let mut i = 1;
        loop {
            let t = h * Dd::from(i as f64);
            let et = t.exp();
            let en = (Dd::from(nu as f64) * t).exp();
            let v = (-(x * (et + et.recip()) * half)).exp() * (en + en.recip()) * half;
            sum += v;
            if v.to_f64() < 1e-40 * sum.to_f64() {
                break;
            }
            i += 1;
        }
        sum * h
    }

    #[test]
    fn diversity_orders() {
        for &((n1, n2), th) in &[((3, 2), 2), ((2, 2), 2), ((3, 3), 3), ((2, 4), 2)] {
            let e = asymptotic_outage(&scenario(n1, n2, 0.5, 30.0, &[1.0]), User::Two).unwrap();
            assert_eq!(e.theta, th);
        }
    }

    #[test]
    fn exponential_path_matches_general() {
        for &(n1, n2) in &[(3, 2), (2, 2), (3, 3), (2, 4), (4, 1)] {
            for &rho in &[0.2, 0.5, 0.8] {
                for inr in [&[1.0][..], &[1.0, 2.0, 3.0][..], &[][..]] {
                    let net = scenario(n1, n2, rho, 30.0, inr).resolve().unwrap();
                    for user in [User::One, User::Two] {
                        let (g, _) = general_expansion(&net, user).unwrap();
                        let e = exponential_expansion(&net, user).unwrap();
                        for snr in [1e3, 1e5] {
                            let (a, b) = (g.coefficient(snr), e.coefficient(snr));
                            assert!(((a - b) / a).abs() < 1e-8, "({n1},{n2}) rho={rho}: {a} vs {b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lower_orders_cancel() {
        for &(n1, n2, rho) in &[(3, 2, 0.5), (3, 3, 0.8), (4, 4, 0.3)] {
            let net = scenario(n1, n2, rho, 30.0, &[1.0, 3.0]).resolve().unwrap();
            let (e, lower) = general_expansion(&net, User::Two).unwrap();
            let scale = e.constant.abs().max(1.0);
            for (a, b) in lower {
                assert!(a.abs() < 1e-20 * scale.max(1e6) && b.abs() < 1e-20 * scale.max(1e6), "{a} {b}");
            }
        }
        // repeated eigenvalues take the general path only
        let mut s = scenario(3, 3, 0.5, 30.0, &[1.0]);
        s.node1 = CorrelationModel::ExplicitSpectrum(vec![(1.6, 2), (0.3, 1)]);
        let (_, lower) = general_expansion(&s.resolve().unwrap(), User::Two).unwrap();
        for (a, b) in lower {
            assert!(a.abs() < 1e-14 && b.abs() < 1e-14);
        }
    }

    #[test]
    fn residual_vanishes_against_exact() {
        for &(n1, n2, rho, inr) in &[(3, 2, 0.5, &[1.0][..]), (2, 2, 0.8, &[1.0, 2.0, 3.0][..]), (3, 3, 0.2, &[][..])] {
            let mut prev = f64::INFINITY;
            for snr_db in [30.0, 40.0, 50.0, 60.0] {
                let s = scenario(n1, n2, rho, snr_db, inr);
                let exact = exact_with_linear_gain(&s, User::Two);
                let asym = asymptotic_outage(&s, User::Two).unwrap();
                let eps = s.gamma_th / s.snr;
                let r = ((exact - asym.evaluate(s.snr)) / eps.powi(asym.theta as i32)).abs();
                assert!(r < prev, "({n1},{n2}) {snr_db} dB: residual {r} after {prev}");
                prev = r;
            }
            assert!(prev < 1e-2, "({n1},{n2}) final residual {prev}");
        }
    }

    #[test]
    fn phi_branches_against_quadrature_reconstruction() {
        let (rho, chi1, chi2, theta) = (40.0, 12.0, 3.0, 2u32);
        let mut seen = [false; 3];
        for k in 0..=2u32 {
            for l in 0..=k {
                for t in 1..=3u32 {
                    let nu = l as i32 + t as i32 - k as i32;
                    seen[(nu.signum() + 1) as usize] = true;
                    // B(ε) minus its orders below θ, divided by ε^θ, must
                    // approach the ε^θ coefficient
                    let series = bessel_factor(l, t, k, Dd::from(rho), Dd::from(chi1), Dd::from(chi2), theta);
                    let mut errs = vec![];
                    for &eps in &[1e-7, 1e-8, 1e-9] {
                        let e = Dd::from(eps);
                        let u = Dd::from(rho) * e / (Dd::from(chi1) * Dd::from(chi2));
                        let exact = (e / Dd::from(chi1)).powi(k as i32)
                            * (Dd::from(rho) / Dd::from(chi2)).powi(k as i32 - l as i32)
                            * (Dd::from(nu as f64 / 2.0) * u.ln()).exp()
                            * bessel_k_quadrature(nu.unsigned_abs(), Dd::from(2.0) * u.sqrt());
                        let ln_eps = e.ln();
                        let mut lower = Dd::ZERO;
                        for (m, c) in series.iter().enumerate().take(theta as usize) {
                            lower += c.at(ln_eps) * e.powi(m as i32);
                        }
                        let phi = phi_term(l, t, k, rho, chi1, chi2, eps, 1.0, theta).unwrap();
                        let got = ((exact - lower) / e.powi(theta as i32)).to_f64() * chi1.powi(theta as i32);
                        errs.push((got - phi).abs() / phi.abs().max(1e-300));
                    }
                    assert!(errs[2] < 1e-6, "(l,t,k)=({l},{t},{k}): {errs:?}");
                    assert!(errs[2] < errs[0], "(l,t,k)=({l},{t},{k}): {errs:?}");
                }
            }
        }
        assert_eq!(seen, [true, true, true]);
    }

    #[test]
    fn rejects_proportional_interference() {
        let mut s = scenario(2, 2, 0.5, 30.0, &[1.0]);
        s.interference = Interference::ProportionalToSnr(vec![0.1]);
        assert!(matches!(asymptotic_outage(&s, User::Two), Err(Error::Unsupported(_))));
    }

    #[test]
    fn correlation_costs_array_gain_only() {
        for &(n1, n2) in &[(3, 2), (2, 2), (3, 3)] {
            let c: Vec<f64> = [0.0, 0.2, 0.5, 0.8]
                .iter()
                .map(|&r| {
                    let mut s = scenario(n1, n2, r, 40.0, &[1.0]);
                    if r == 0.0 {
                        s.node1 = CorrelationModel::Identity { size: n1 };
                        s.node2 = CorrelationModel::Identity { size: n2 };
                    }
                    let e = asymptotic_outage(&s, User::Two).unwrap();
                    assert_eq!(e.theta, n1.min(n2) as u32);
                    e.coefficient(s.snr)
                })
                .collect();
            assert!(c.windows(2).all(|w| w[0] < w[1]), "({n1},{n2}): {c:?}");
        }
    }
}
