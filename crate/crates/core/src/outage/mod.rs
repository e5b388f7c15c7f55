//! Outage probabilities: exact per-user closed forms, their high-SNR
//! expansion and the interference-free system outage.

use std::fmt;

pub mod asymptotic;
pub mod exact;
pub mod system;

/// The source whose outage is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum User {
    One,
    Two,
}

impl User {
    pub fn index(self) -> u8 {
        match self {
            User::One => 1,
            User::Two => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ExactGeneral,
    ExactExponential,
    ExactIid,
    Asymptotic,
    SystemExact,
    /// System outage rerouted to numerical integration.
    SystemQuadrature,
    MonteCarlo,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ExactGeneral => "exact-general",
            Method::ExactExponential => "exact-exponential",
            Method::ExactIid => "exact-iid",
            Method::Asymptotic => "asymptotic",
            Method::SystemExact => "system-exact",
            Method::SystemQuadrature => "system-quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    pub p: f64,
    pub method: Method,
}

impl OutageResult {
    pub(crate) fn new(p: f64, method: Method) -> Self {
        // closed forms are 1 minus a sum; rounding can leave a few ulps of
        // the sum below zero or above one
        OutageResult {
            p: p.clamp(0.0, 1.0),
            method,
        }
    }
}
