//! Seeded single-sign corruptions used as negative controls.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tamper {
    /// Ring kernel: multiply without Koszul signs.
    NaiveProduct,
    /// Crossed module: flip one `tau_dot` entry.
    TauDot,
    /// Derived group: `X_p - mu_dot(a_p, X_q)` in the product.
    DmMulSign,
    /// Adapted coordinates: `d sigma = -[sigma,sigma]/2 - tau_dot(Sigma)`.
    DSigmaTau,
    /// 1-gauge: sign of `X` in the `j K` image.
    GaugeJK,
    /// Basic data: sign of the `.mu.` term in `Omega_b`.
    OmegaB,
    /// Cocycle: perturb one triple-overlap `T_bar`.
    TBar,
}

impl Tamper {
    pub const ALL: [Tamper; 7] = [
        Tamper::NaiveProduct,
        Tamper::TauDot,
        Tamper::DmMulSign,
        Tamper::DSigmaTau,
        Tamper::GaugeJK,
        Tamper::OmegaB,
        Tamper::TBar,
    ];
}
