//! Network scenarios: antennas and correlation at the two sources, channel
//! powers, relay placement, co-channel interference and the fixed relay
//! gain.

use crate::error::{Error, Result};
use crate::real::{Dd, Real};
use crate::spectral::{CorrelationModel, SpectralExpansion};

/// Relative INR gap below which two interferers count as coincident.
pub const INR_COINCIDENCE_GAP: f64 = 1e-6;

/// Path-loss exponent used when none is given.
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 4.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// β_ℓ = γ̄_ℓ^{−1} Π_{k≠ℓ} (1 − γ̄_k/γ̄_ℓ)^{−1}, the partial-fraction
/// weights of the hypoexponential density `f(γ) = Σ β_ℓ e^{−γ/γ̄_ℓ}`.
pub fn beta_coefficients(inr: &[f64]) -> Result<Vec<f64>> {
    Ok(beta_extended(inr)?.into_iter().map(|b| b.to_f64()).collect())
}

fn beta_extended(inr: &[f64]) -> Result<Vec<Dd>> {
    for &g in inr {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "interference-to-noise ratio {g} must be finite and positive"
            )));
        }
    }
    for (a, &x) in inr.iter().enumerate() {
        for &y in &inr[a + 1..] {
            let gap = (x - y).abs() / x.max(y);
            if gap < INR_COINCIDENCE_GAP {
                return Err(Error::CoincidentInterferers {
                    first: x,
                    second: y,
                    gap,
                });
            }
        }
    }
    Ok(inr
        .iter()
        .enumerate()
        .map(|(l, &gl)| {
            let gl = Dd::from(gl);
            let mut b = gl.recip();
            for (k, &gk) in inr.iter().enumerate() {
                if k != l {
                    b = b / (Dd::ONE - Dd::from(gk) / gl);
                }
            }
            b
        })
        .collect())
}

/// Aggregate interference at the relay: L independent exponential
/// interferers with distinct mean INRs.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceProfile {
    inr: Vec<f64>,
    beta: Vec<Dd>,
}

impl InterferenceProfile {
    pub fn new(inr: Vec<f64>) -> Result<Self> {
        let beta = beta_extended(&inr)?;
        Ok(InterferenceProfile { inr, beta })
    }

    /// No interference.
    pub fn none() -> Self {
        InterferenceProfile {
            inr: vec![],
            beta: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.inr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inr.is_empty()
    }

    pub fn inr(&self) -> &[f64] {
        &self.inr
    }

    pub fn beta(&self) -> &[Dd] {
        &self.beta
    }

    /// Mean of the aggregate interference, Σ γ̄_ℓ.
    pub fn mean(&self) -> f64 {
        self.inr.iter().sum()
    }
}

/// How the two hop powers Ω_1, Ω_2 are set.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelPowers {
    /// Relay at fraction κ of the S_1–S_2 distance with path-loss exponent μ.
    Geometry { omega0: f64, kappa: f64, mu: f64 },
    Direct { omega1: f64, omega2: f64 },
}

/// How the interferer INRs are set.
#[derive(Debug, Clone, PartialEq)]
pub enum Interference {
    None,
    /// Fixed linear INRs.
    Fixed(Vec<f64>),
    /// INRs proportional to the mean SNR, γ̄_ℓ = ν_ℓ γ̄.
    ProportionalToSnr(Vec<f64>),
}

/// Ω_1 = κ^{−μ}Ω_0 and Ω_2 = (1 − κ)^{−μ}Ω_0.
pub fn scenario_channel_powers(omega0: f64, kappa: f64, mu: f64) -> Result<(f64, f64)> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!("relay position {kappa} must lie in (0, 1)")));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!("path-loss exponent {mu} must be nonnegative")));
    }
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::InvalidParameter(format!("reference power {omega0} must be positive")));
    }
    Ok((kappa.powf(-mu) * omega0, (1.0 - kappa).powf(-mu) * omega0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub node1: CorrelationModel,
    pub node2: CorrelationModel,
    /// Mean transmit SNR γ̄ (linear).
    pub snr: f64,
    /// Outage threshold γ_th (linear).
    pub gamma_th: f64,
    pub powers: ChannelPowers,
    pub interference: Interference,
}

impl Scenario {
    pub fn channel_powers(&self) -> Result<(f64, f64)> {
        match self.powers {
            ChannelPowers::Geometry { omega0, kappa, mu } => scenario_channel_powers(omega0, kappa, mu),
            ChannelPowers::Direct { omega1, omega2 } => {
                for w in [omega1, omega2] {
                    if !(w > 0.0) || !w.is_finite() {
                        return Err(Error::InvalidParameter(format!("channel power {w} must be positive")));
                    }
                }
                Ok((omega1, omega2))
            }
        }
    }

    pub fn inr(&self) -> Vec<f64> {
        match &self.interference {
            Interference::None => vec![],
            Interference::Fixed(v) => v.clone(),
            Interference::ProportionalToSnr(nu) => nu.iter().map(|n| n * self.snr).collect(),
        }
    }

    pub fn antennas(&self) -> (usize, usize) {
        (self.node1.size(), self.node2.size())
    }

    /// Validates the scenario and builds everything the closed forms need.
    pub fn resolve(&self) -> Result<Network> {
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::InvalidParameter(format!("mean SNR {} must be positive", self.snr)));
        }
        if !(self.gamma_th >= 0.0) || !self.gamma_th.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "outage threshold {} must be nonnegative",
                self.gamma_th
            )));
        }
        let (omega1, omega2) = self.channel_powers()?;
        let node1 = SpectralExpansion::new(&self.node1, omega1)?;
        let node2 = SpectralExpansion::new(&self.node2, omega2)?;
        let interference = InterferenceProfile::new(self.inr())?;
        let gain = gain_constant_from(&node1, &node2, self.snr, &interference);
        Ok(Network {
            node1,
            node2,
            snr: self.snr,
            gamma_th: self.gamma_th,
            interference,
            gain,
        })
    }
}

/// The relay gain expressed as `C = P_s / (N_0 G²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainConstant {
    pub c: f64,
    /// Slope of C in γ̄, N_1Ω_1 + N_2Ω_2.
    pub rho_asym: f64,
}

pub fn gain_constant(scenario: &Scenario) -> Result<GainConstant> {
    Ok(scenario.resolve()?.gain)
}

fn gain_constant_from(
    node1: &SpectralExpansion,
    node2: &SpectralExpansion,
    snr: f64,
    interference: &InterferenceProfile,
) -> GainConstant {
    let mean1 = node1.theta_mean();
    let mean2 = node2.theta_mean();
    let c = snr * mean1 + snr * mean2 + interference.mean() + 1.0;
    let rho_asym = node1.antennas() as f64 * node1.omega() + node2.antennas() as f64 * node2.omega();
    GainConstant { c, rho_asym }
}

/// A resolved scenario, oriented so that `node1` is the far-end source of
/// the user under study and `node2` the user's own node.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub node1: SpectralExpansion,
    pub node2: SpectralExpansion,
    pub snr: f64,
    pub gamma_th: f64,
    pub interference: InterferenceProfile,
    pub gain: GainConstant,
}

impl Network {
    /// Exchanges the two sources; C is symmetric and unchanged.
    pub fn swapped(&self) -> Network {
        Network {
            node1: self.node2.clone(),
            node2: self.node1.clone(),
            ..self.clone()
        }
    }

    /// Multiplies C by `factor`. Only meant for negative controls.
    pub fn with_scaled_gain(mut self, factor: f64) -> Network {
        self.gain.c *= factor;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1};

    fn fig_scenario() -> Scenario {
        Scenario {
            node1: CorrelationModel::Exponential { size: 3, rho: 0.5 },
            node2: CorrelationModel::Exponential { size: 2, rho: 0.5 },
            snr: 10.0,
            gamma_th: db_to_linear(5.0),
            powers: ChannelPowers::Geometry {
                omega0: 1.0,
                kappa: 0.5,
                mu: DEFAULT_PATH_LOSS_EXPONENT,
            },
            interference: Interference::Fixed(vec![db_to_linear(1.0)]),
        }
    }

    #[test]
    fn single_interferer() {
        assert_eq!(beta_coefficients(&[2.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn two_interferers_match_convolution() {
        let b = beta_coefficients(&[2.0, 4.0]).unwrap();
        assert!((b[0] + 0.5).abs() < 1e-15 && (b[1] - 0.5).abs() < 1e-15);
        // density of the sum by convolving the two exponential densities
        for &g in &[0.3, 2.0, 9.0] {
            let conv = quad::integrate(
                |x| (-x / 2.0).exp() / 2.0 * (-(g - x) / 4.0).exp() / 4.0,
                0.0,
                g,
                1e-16,
                1e-14,
            )
            .value;
            let pf = b[0] * (-g / 2.0).exp() + b[1] * (-g / 4.0).exp();
            assert!((conv - pf).abs() < 1e-12);
        }
    }

    #[test]
    fn three_interferers_moments() {
        let inr: Vec<f64> = [1.0, 2.0, 3.0].iter().map(|&d| db_to_linear(d)).collect();
        let b = beta_coefficients(&inr).unwrap();
        let m0: f64 = b.iter().zip(&inr).map(|(b, g)| b * g).sum();
        let m1: f64 = b.iter().zip(&inr).map(|(b, g)| b * g * g).sum();
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!((m1 - inr.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn rejects_coincident_inrs() {
        assert!(matches!(
            beta_coefficients(&[2.0, 2.0 * (1.0 + 1e-8)]),
            Err(Error::CoincidentInterferers { .. })
        ));
        assert!(beta_coefficients(&[0.0]).is_err());
    }

    #[test]
    fn channel_powers() {
        assert_eq!(scenario_channel_powers(1.0, 0.5, 4.0).unwrap(), (16.0, 16.0));
        assert_eq!(scenario_channel_powers(1.0, 0.5, 0.0).unwrap(), (1.0, 1.0));
        let (a, b) = scenario_channel_powers(1.0, 0.3, 4.0).unwrap();
        assert!((a - 123.457).abs() < 1e-3 && (b - 4.165).abs() < 1e-3);
        assert!(scenario_channel_powers(1.0, 0.0, 4.0).is_err());
        assert!(scenario_channel_powers(1.0, 1.0, 4.0).is_err());
    }

    #[test]
    fn gain_constant_examples() {
        let g = gain_constant(&fig_scenario()).unwrap();
        assert!((g.c - (480.0 + 320.0 + db_to_linear(1.0) + 1.0)).abs() < 1e-9);
        assert_eq!(g.rho_asym, 80.0);

        let plain = Scenario {
            node1: CorrelationModel::Identity { size: 1 },
            node2: CorrelationModel::Identity { size: 1 },
            snr: 1.0,
            gamma_th: 1.0,
            powers: ChannelPowers::Direct { omega1: 1.0, omega2: 1.0 },
            interference: Interference::None,
        };
        assert_eq!(gain_constant(&plain).unwrap().c, 3.0);

        let mut high = fig_scenario();
        high.snr = 1e6;
        let g = gain_constant(&high).unwrap();
        assert!((g.c / high.snr / g.rho_asym - 1.0).abs() < 1e-3);
    }

    #[test]
    fn db_round_trip() {
        for &x in &[-20.0, 0.0, 1.0, 5.0, 47.3] {
            assert!((linear_to_db(db_to_linear(x)) - x).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn sampled_interference_mean() {
        let inr = [1.3, 2.0, 4.5];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let g: f64 = inr.iter().map(|m| m * Distribution::<f64>::sample(&Exp1, &mut rng)).sum();
            s += g;
            s2 += g * g;
        }
        let mean = s / n as f64;
        let sd = (s2 / n as f64 - mean * mean).sqrt() / (n as f64).sqrt();
        let expected = InterferenceProfile::new(inr.to_vec()).unwrap().mean();
        assert!((mean - expected).abs() < 3.0 * sd);
    }

    #[test]
    fn swapped_network_exchanges_nodes() {
        let n = fig_scenario().resolve().unwrap();
        let s = n.swapped();
        assert_eq!(s.node1, n.node2);
        assert_eq!(s.gain, n.gain);
        assert_eq!(s.swapped(), n);
    }

    proptest! {
        #[test]
        fn beta_moment_invariants(inr in proptest::collection::btree_set(1u32..400, 1..=6)) {
            let inr: Vec<f64> = inr.iter().map(|&k| k as f64 * 0.05).collect();
            let b = beta_coefficients(&inr).unwrap();
            let m0: f64 = b.iter().zip(&inr).map(|(b, g)| b * g).sum();
            let m1: f64 = b.iter().zip(&inr).map(|(b, g)| b * g * g).sum();
            let scale: f64 = b.iter().zip(&inr).map(|(b, g)| (b * g * g).abs()).sum::<f64>().max(1.0);
            prop_assert!((m0 - 1.0).abs() < 1e-9 * scale);
            prop_assert!((m1 - inr.iter().sum::<f64>()).abs() < 1e-9 * scale);
        }
    }
}
