//! System outage Pr(min(γ_S1, γ_S2) < γ_th) without interference.
//!
//! Without interference the two SINRs are γ_1γ_2/(γ_1 + C) and
//! γ_1γ_2/(γ_2 + C), so the smaller one belongs to the source with the
//! stronger channel. The outage splits as I_1 + I_2 with
//!
//! ```text
//! I_1 = Pr(γ_S1 < γ_th, γ_1 > γ_2)
//!     = ∫_ε^∞ f_1(x) F_2(γ_th + γ_th C/x) dx  +  ∫_0^ε f_1(x) F_2(x) dx
//!     =            J_1                       +          J_2
//! ```
//!
//! where ε is the positive root of x² − γ_th x − γ_th C = 0, and I_2 is I_1
//! with the sources exchanged. In J_1 the factor e^{−γ_th C/(b x)} is
//! expanded in a Taylor series, leaving integrals of the form
//! `∫_ε^∞ x^{m−1} e^{−x/a} dx = ε^m E_{1−m}(ε/a)`; J_2 is a lower incomplete
//! gamma function.

use crate::error::{Error, Result};
use crate::model::{Network, Scenario};
use crate::outage::{Method, OutageResult};
use crate::quad;
use crate::real::{Dd, Real};
use crate::spectral::SpectralExpansion;
use crate::specfun::kernel;

/// Consecutive growing terms after which the series is abandoned for
/// numerical integration.
const GROWTH_LIMIT: usize = 10;

/// Truncation of the infinite sum in J_1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    max_terms: usize,
    tolerance: f64,
    fixed: bool,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_terms: 50,
            tolerance: 1e-12,
            fixed: false,
        }
    }
}

impl SeriesControl {
    /// `max_terms ≥ 5`, `0 < tolerance ≤ 1e−6`.
    pub fn new(max_terms: usize, tolerance: f64) -> Result<Self> {
        if max_terms < 5 {
            return Err(Error::InvalidParameter(format!(
                "series needs at least 5 terms, got {max_terms}"
            )));
        }
        if !(tolerance > 0.0 && tolerance <= 1e-6) {
            return Err(Error::InvalidParameter(format!(
                "series tolerance {tolerance} must lie in (0, 1e-6]"
            )));
        }
        Ok(SeriesControl {
            max_terms,
            tolerance,
            fixed: false,
        })
    }

    /// Exactly `terms` terms with no stopping rule and no safeguard, for
    /// truncation studies.
    pub fn fixed(terms: usize) -> Result<Self> {
        Ok(SeriesControl {
            fixed: true,
            ..SeriesControl::new(terms, 1e-6)?
        })
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// ε = (γ_th + √(γ_th² + 4γ_th C)) / 2
pub fn epsilon_root(gamma_th: f64, c: f64) -> f64 {
    epsilon_root_dd(Dd::from(gamma_th), Dd::from(c)).to_f64()
}

fn epsilon_root_dd(gth: Dd, c: Dd) -> Dd {
    (gth + (gth * gth + Dd::from(4.0) * gth * c).sqrt()) / Dd::from(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParts {
    pub i1: f64,
    pub i2: f64,
    pub method: Method,
    /// Largest number of series terms used by either half.
    pub terms_used: usize,
}

impl SystemParts {
    pub fn result(&self) -> OutageResult {
        OutageResult::new(self.i1 + self.i2, self.method)
    }
}

enum SeriesOutcome {
    Converged { value: Dd, terms: usize },
    Diverging,
}

struct Pair<'a> {
    own: &'a SpectralExpansion,
    other: &'a SpectralExpansion,
}

/// Contribution of Taylor index s to the J_1 sum, over all other indices.
fn j1_term(p: &Pair, snr: Dd, gth: Dd, c: Dd, eps: Dd, s: u32) -> Dd {
    let mut total = Dd::ZERO;
    for (chi1, j, th1) in p.own.coefficients() {
        if th1.abs().to_f64() < 1e-300 {
            continue;
        }
        let a = snr * Dd::from(chi1);
        let x = eps / a;
        let w1 = th1 / (kernel::factorial::<Dd>(j - 1) * a.powi(j as i32));
        for (chi2, t, th2) in p.other.coefficients() {
            if th2.abs().to_f64() < 1e-300 {
                continue;
            }
            let b = snr * Dd::from(chi2);
            let z = -(gth * c / b);
            let zs = z.powi(s as i32) / kernel::factorial::<Dd>(s);
            let e_b = (-(gth / b)).exp();
            let mut gk = Dd::ONE;
            for k in 0..t {
                if k > 0 {
                    gk = gk * gth / (b * Dd::from(k as f64));
                }
                for l in 0..=k {
                    let order = s as i32 + k as i32 - j as i32 - l as i32 + 1;
                    let pw = eps.powi(j as i32 + l as i32 - k as i32 - s as i32);
                    total += w1
                        * th2
                        * gk
                        * e_b
                        * kernel::binomial::<Dd>(k, l)
                        * c.powi((k - l) as i32)
                        * zs
                        * pw
                        * kernel::exp_integral(order, x);
                }
            }
        }
    }
    total
}

/// Sums the J_1 series. `base` is the rest of the half, so that the stopping
/// rule is relative to the probability itself rather than to the sum, which
/// is close to one at high SNR.
fn j1_series(p: &Pair, snr: Dd, gth: Dd, c: Dd, eps: Dd, base: Dd, control: SeriesControl) -> Result<SeriesOutcome> {
    let mut sum = Dd::ZERO;
    let mut prev = f64::INFINITY;
    let mut growth = 0;
    let mut decreasing = false;
    if control.fixed {
        for s in 0..control.max_terms {
            sum += j1_term(p, snr, gth, c, eps, s as u32);
        }
        return Ok(SeriesOutcome::Converged {
            value: sum,
            terms: control.max_terms,
        });
    }
    for s in 0..control.max_terms {
        let term = j1_term(p, snr, gth, c, eps, s as u32);
        sum += term;
        let mag = term.abs().to_f64();
        if mag > prev {
            growth += 1;
            decreasing = false;
            if growth > GROWTH_LIMIT {
                return Ok(SeriesOutcome::Diverging);
            }
        } else {
            growth = 0;
            decreasing = s > 0;
        }
        prev = mag;
        let scale = (base - sum).abs().to_f64();
        if decreasing && mag <= control.tolerance * scale {
            return Ok(SeriesOutcome::Converged { value: sum, terms: s + 1 });
        }
    }
    if decreasing {
        Ok(SeriesOutcome::Converged {
            value: sum,
            terms: control.max_terms,
        })
    } else {
        Err(Error::NonConvergence(format!(
            "terms still growing after {} terms (γ_th C/(γ̄χ) too large); raise the term limit",
            control.max_terms
        )))
    }
}

/// Σ over the J_2 incomplete gamma terms.
fn j2_sum(p: &Pair, snr: Dd, eps: Dd) -> Dd {
    let mut total = Dd::ZERO;
    for (chi1, j, th1) in p.own.coefficients() {
        if th1.abs().to_f64() < 1e-300 {
            continue;
        }
        let a = snr * Dd::from(chi1);
        let w1 = th1 / (kernel::factorial::<Dd>(j - 1) * a.powi(j as i32));
        for (chi2, t, th2) in p.other.coefficients() {
            if th2.abs().to_f64() < 1e-300 {
                continue;
            }
            let b = snr * Dd::from(chi2);
            let rate = a.recip() + b.recip();
            for k in 0..t {
                total += w1 * th2 / (kernel::factorial::<Dd>(k) * b.powi(k as i32))
                    * rate.powi(-(j as i32) - k as i32)
                    * kernel::lower_gamma(j + k, eps * rate);
            }
        }
    }
    total
}

/// One half, I = J_1 + J_2, by the series. `None` when the series has to
/// be abandoned.
fn half_series(p: &Pair, net: &Network, control: SeriesControl) -> Result<Option<(Dd, usize)>> {
    let snr = Dd::from(net.snr);
    let gth = Dd::from(net.gamma_th);
    let c = Dd::from(net.gain.c);
    let eps = epsilon_root_dd(gth, c);
    let f_eps = p.own.cdf(snr, eps);
    let j2 = f_eps - j2_sum(p, snr, eps);
    let (s1, terms) = match j1_series(p, snr, gth, c, eps, Dd::ONE - f_eps + j2, control)? {
        SeriesOutcome::Converged { value, terms } => (value, terms),
        SeriesOutcome::Diverging => return Ok(None),
    };
    let j1 = Dd::ONE - f_eps - s1;
    Ok(Some((j1 + j2, terms)))
}

/// One half by one-dimensional integration of f_own(x) F_other(min(x, γ_th + γ_th C/x)).
fn half_quadrature(p: &Pair, net: &Network) -> f64 {
    let snr = net.snr;
    let gth = net.gamma_th;
    let c = net.gain.c;
    let eps = epsilon_root(gth, c);
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let y = if x < eps { x } else { gth + gth * c / x };
        let f2 = p.other.cdf(Dd::from(snr), Dd::from(y)).to_f64();
        p.own.pdf(snr, x) * f2
    };
    let scale = snr * p.own.omega() * p.own.antennas() as f64;
    let mut breaks = vec![0.0, eps];
    for m in [0.1, 1.0, 4.0, 16.0] {
        if m * scale > eps {
            breaks.push(m * scale);
        }
    }
    breaks.sort_by(f64::total_cmp);
    quad::integrate_with_breaks(integrand, &breaks, 1e-300, 1e-12).value
}

fn require_no_interference(net: &Network) -> Result<()> {
    if !net.interference.is_empty() {
        return Err(Error::Unsupported(
            "the system outage closed form is interference-free; use Monte Carlo with interferers".into(),
        ));
    }
    if !(net.gamma_th > 0.0) {
        return Err(Error::InvalidParameter("system outage needs a positive threshold".into()));
    }
    Ok(())
}

pub fn network_system_outage(network: &Network, control: SeriesControl) -> Result<SystemParts> {
    require_no_interference(network)?;
    let first = Pair {
        own: &network.node1,
        other: &network.node2,
    };
    let second = Pair {
        own: &network.node2,
        other: &network.node1,
    };
    match (half_series(&first, network, control)?, half_series(&second, network, control)?) {
        (Some((i1, n1)), Some((i2, n2))) => Ok(SystemParts {
            i1: i1.to_f64().max(0.0),
            i2: i2.to_f64().max(0.0),
            method: Method::SystemExact,
            terms_used: n1.max(n2),
        }),
        _ => Ok(SystemParts {
            i1: half_quadrature(&first, network),
            i2: half_quadrature(&second, network),
            method: Method::SystemQuadrature,
            terms_used: 0,
        }),
    }
}

pub fn system_outage_parts(scenario: &Scenario, control: SeriesControl) -> Result<SystemParts> {
    network_system_outage(&scenario.resolve()?, control)
}

pub fn system_outage_exact(scenario: &Scenario, control: SeriesControl) -> Result<OutageResult> {
    Ok(system_outage_parts(scenario, control)?.result())
}

/// Signed contributions of Taylor indices `0..terms` to the J_1 sum of the
/// first half.
pub fn series_convergence_report(scenario: &Scenario, terms: usize) -> Result<Vec<f64>> {
    let net = scenario.resolve()?;
    require_no_interference(&net)?;
    let p = Pair {
        own: &net.node1,
        other: &net.node2,
    };
    let snr = Dd::from(net.snr);
    let gth = Dd::from(net.gamma_th);
    let c = Dd::from(net.gain.c);
    let eps = epsilon_root_dd(gth, c);
    Ok((0..terms)
        .map(|s| j1_term(&p, snr, gth, c, eps, s as u32).to_f64())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{db_to_linear, ChannelPowers, Interference};
    use crate::outage::exact::network_user_outage_interference_free;
    use crate::outage::User;
    use crate::spectral::CorrelationModel;

    fn scenario(n1: usize, n2: usize, rho: f64, snr_db: f64, kappa: f64) -> Scenario {
        let model = |n| CorrelationModel::Exponential { size: n, rho };
        Scenario {
            node1: model(n1),
            node2: model(n2),
            snr: db_to_linear(snr_db),
            gamma_th: db_to_linear(5.0),
            powers: ChannelPowers::Geometry {
                omega0: 1.0,
                kappa,
                mu: 4.0,
            },
            interference: Interference::None,
        }
    }

    /// J_1 + J_2 as genuine double integrals of the two densities.
    fn double_integral(own: &SpectralExpansion, other: &SpectralExpansion, net: &Network) -> f64 {
        let (snr, gth, c) = (net.snr, net.gamma_th, net.gain.c);
        let eps = epsilon_root(gth, c);
        let inner = |upper: f64| {
            let b = snr * other.omega() * other.antennas() as f64;
            let mut br = vec![0.0];
            for m in [0.1, 1.0, 4.0] {
                if m * b < upper {
                    br.push(m * b);
                }
            }
            br.push(upper);
            br.windows(2)
                .map(|w| quad::integrate(|y| other.pdf(snr, y), w[0], w[1], 1e-300, 1e-12).value)
                .sum::<f64>()
        };
        let scale = snr * own.omega() * own.antennas() as f64;
        let j2 = quad::integrate(|x| own.pdf(snr, x) * inner(x), 0.0, eps, 1e-300, 1e-10).value;
        let mut br = vec![eps];
        for m in [0.1, 1.0, 4.0, 16.0] {
            if m * scale > eps {
                br.push(m * scale);
            }
        }
        let j1 = quad::integrate_with_breaks(|x| own.pdf(snr, x) * inner(gth + gth * c / x), &br, 1e-300, 1e-10).value;
        j1 + j2
    }

    #[test]
    fn epsilon_examples() {
        assert!((epsilon_root(2.0, 3.0) - (1.0 + 7f64.sqrt())).abs() < 1e-14);
        assert!((epsilon_root(2.0, 1e-14) - 2.0).abs() < 1e-12);
        for &(g, c) in &[(3.16, 800.0), (0.1, 1e7), (10.0, 1.0)] {
            let e = epsilon_root(g, c);
            assert!(((e * e - g * e - g * c) / (g * c)).abs() < 1e-12);
            assert!(e > g);
        }
    }

    #[test]
    fn series_control_validation() {
        assert!(SeriesControl::new(4, 1e-12).is_err());
        assert!(SeriesControl::new(5, 1e-5).is_err());
        assert!(SeriesControl::new(5, 0.0).is_err());
        assert!(SeriesControl::new(5, 1e-6).is_ok());
        assert_eq!(SeriesControl::default().max_terms(), 50);
    }

    #[test]
    fn matches_double_integral() {
        for &(n1, n2, rho, snr, kappa) in &[(2, 2, 0.5, 10.0, 0.5), (2, 4, 0.3, 15.0, 0.3), (3, 1, 0.7, 5.0, 0.6)] {
            let s = scenario(n1, n2, rho, snr, kappa);
            let net = s.resolve().unwrap();
            let parts = network_system_outage(&net, SeriesControl::default()).unwrap();
            assert_eq!(parts.method, Method::SystemExact);
            let q1 = double_integral(&net.node1, &net.node2, &net);
            let q2 = double_integral(&net.node2, &net.node1, &net);
            assert!((parts.i1 - q1).abs() < 1e-7, "I1 {} vs {q1}", parts.i1);
            assert!((parts.i2 - q2).abs() < 1e-7, "I2 {} vs {q2}", parts.i2);
        }
    }

    #[test]
    fn symmetric_halves_agree() {
        let parts = system_outage_parts(&scenario(2, 2, 0.5, 20.0, 0.5), SeriesControl::default()).unwrap();
        assert!(((parts.i1 - parts.i2) / parts.i1).abs() < 1e-10);
    }

    #[test]
    fn exchange_swaps_halves() {
        let s = scenario(2, 4, 0.5, 15.0, 0.3);
        let mut t = scenario(4, 2, 0.5, 15.0, 0.7);
        t.powers = ChannelPowers::Geometry {
            omega0: 1.0,
            kappa: 0.7,
            mu: 4.0,
        };
        let a = system_outage_parts(&s, SeriesControl::default()).unwrap();
        let b = system_outage_parts(&t, SeriesControl::default()).unwrap();
        assert!(((a.i1 - b.i2) / a.i1).abs() < 1e-10);
        assert!(((a.i2 - b.i1) / a.i2).abs() < 1e-10);
    }

    #[test]
    fn bounded_by_user_outages() {
        for &(n1, n2, kappa) in &[(2, 2, 0.5), (2, 4, 0.3), (2, 4, 0.7)] {
            for i in 0..=8 {
                let s = scenario(n1, n2, 0.5, 5.0 * i as f64, kappa);
                let net = s.resolve().unwrap();
                let sys = network_system_outage(&net, SeriesControl::default()).unwrap().result().p;
                let p1 = network_user_outage_interference_free(&net, User::One).unwrap().p;
                let p2 = network_user_outage_interference_free(&net, User::Two).unwrap().p;
                let tol = 1e-10 * sys;
                assert!(sys >= p1.max(p2) - tol, "{sys} < max({p1}, {p2})");
                assert!(sys <= p1 + p2 + tol);
                assert!((0.0..=1.0).contains(&sys));
            }
        }
    }

    #[test]
    fn terms_alternate_and_decay_after_peak() {
        let r = series_convergence_report(&scenario(2, 4, 0.5, 20.0, 0.5), 30).unwrap();
        let peak = (1..r.len()).max_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs())).unwrap();
        for w in r[peak..].windows(2) {
            assert!(w[1].abs() < w[0].abs(), "{r:?}");
            assert!(w[0] * w[1] < 0.0, "{r:?}");
        }
        assert!(r[29].abs() < 1e-30);
    }

    #[test]
    fn fixed_truncation_converges_to_adaptive() {
        let s = scenario(2, 2, 0.5, 20.0, 0.5);
        let adaptive = system_outage_exact(&s, SeriesControl::default()).unwrap().p;
        let five = system_outage_exact(&s, SeriesControl::fixed(5).unwrap()).unwrap().p;
        let fifty = system_outage_exact(&s, SeriesControl::fixed(50).unwrap()).unwrap().p;
        assert!((five - fifty).abs() < 1e-8);
        assert!(((adaptive - fifty) / fifty).abs() < 1e-10);
    }

    #[test]
    fn growing_terms_are_flagged() {
        let s = scenario(2, 4, 0.5, 20.0, 0.3);
        let short = SeriesControl::new(5, 1e-12).unwrap();
        assert!(matches!(system_outage_exact(&s, short), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn matches_quadrature_at_high_snr() {
        for &(kappa, snr) in &[(0.3, 30.0), (0.3, 40.0), (0.7, 25.0), (0.7, 40.0)] {
            let net = scenario(2, 4, 0.3, snr, kappa).resolve().unwrap();
            let parts = network_system_outage(&net, SeriesControl::default()).unwrap();
            let q1 = half_quadrature(&Pair { own: &net.node1, other: &net.node2 }, &net);
            let q2 = half_quadrature(&Pair { own: &net.node2, other: &net.node1 }, &net);
            assert!(((parts.i1 - q1) / q1).abs() < 1e-8, "{} {q1}", parts.i1);
            assert!(((parts.i2 - q2) / q2).abs() < 1e-8, "{} {q2}", parts.i2);
        }
    }

    #[test]
    fn extreme_position_reroutes_to_quadrature() {
        let s = scenario(2, 4, 0.5, 10.0, 0.05);
        let parts = system_outage_parts(&s, SeriesControl::default()).unwrap();
        assert_eq!(parts.method, Method::SystemQuadrature);
        let net = s.resolve().unwrap();
        let p1 = network_user_outage_interference_free(&net, User::One).unwrap().p;
        let p2 = network_user_outage_interference_free(&net, User::Two).unwrap().p;
        let sys = parts.result().p;
        assert!(sys >= p1.max(p2) * (1.0 - 1e-8) && sys <= (p1 + p2) * (1.0 + 1e-8));
    }

    #[test]
    fn rejects_interference() {
        let mut s = scenario(2, 2, 0.5, 10.0, 0.5);
        s.interference = Interference::Fixed(vec![1.0]);
        assert!(matches!(system_outage_exact(&s, SeriesControl::default()), Err(Error::Unsupported(_))));
    }
}
