//! Kinematics and hyperelastic stress laws in the reference configuration.
//!
//! All tensors are 2x2; `H = du/dX` is the displacement gradient and
//! `F = H + I` the deformation gradient.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Tensor2 = Matrix2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// St. Venant-Kirchhoff.
    #[serde(rename = "svk")]
    Svk,
    #[serde(rename = "nh")]
    NeoHooke,
    /// Small-strain Hooke law, used as the stress measure directly.
    #[serde(rename = "le")]
    LinearElastic,
}

impl Model {
    pub fn tag(self) -> &'static str {
        match self {
            Model::Svk => "svk",
            Model::NeoHooke => "nh",
            Model::LinearElastic => "le",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svk" => Ok(Model::Svk),
            "nh" | "neo-hooke" | "neohooke" => Ok(Model::NeoHooke),
            "le" | "linear" => Ok(Model::LinearElastic),
            other => Err(Error::InvalidParameter(format!(
                "unknown material model '{other}' (valid: svk, nh, le)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub lambda: f64,
    pub mu: f64,
    pub rho0: f64,
    pub model: Model,
}

impl Material {
    pub fn new(model: Model, lambda: f64, mu: f64, rho0: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shear modulus must be positive, got {mu}"
            )));
        }
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reference density must be positive, got {rho0}"
            )));
        }
        if !lambda.is_finite() || lambda <= -mu {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} must exceed -mu = {}",
                -mu
            )));
        }
        Ok(Self {
            lambda,
            mu,
            rho0,
            model,
        })
    }

    /// Builds a material from Poisson's ratio; `lambda = 2 mu nu / (1 - 2 nu)`.
    pub fn from_poisson(model: Model, nu: f64, mu: f64, rho0: f64) -> Result<Self> {
        if !(nu > -1.0 && nu < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "Poisson's ratio must lie in (-1, 0.5), got {nu}"
            )));
        }
        Self::new(model, 2.0 * mu * nu / (1.0 - 2.0 * nu), mu, rho0)
    }

    pub fn nu(&self) -> f64 {
        self.lambda / (2.0 * (self.lambda + self.mu))
    }

    /// Shear wave speed.
    pub fn cs(&self) -> f64 {
        (self.mu / self.rho0).sqrt()
    }

    /// Dilatational wave speed.
    pub fn cd(&self) -> f64 {
        ((self.lambda + 2.0 * self.mu) / self.rho0).sqrt()
    }

    pub fn pk2(&self, h: &Tensor2) -> Result<Tensor2> {
        pk2(self, h)
    }

    /// Stress entering the momentum balance: `F S` for the hyperelastic
    /// laws, the Cauchy stress of small-strain theory for `LinearElastic`.
    pub fn first_piola(&self, h: &Tensor2) -> Result<Tensor2> {
        let s = pk2(self, h)?;
        Ok(match self.model {
            Model::LinearElastic => s,
            Model::Svk | Model::NeoHooke => pk1(h, &s),
        })
    }

    pub fn momentum_flux(&self, h: &Tensor2) -> Tensor2 {
        momentum_flux_law(self, h)
    }
}

/// `E = (H^T + H + H^T H) / 2`.
pub fn green_lagrange(h: &Tensor2) -> Tensor2 {
    0.5 * (h.transpose() + h + h.transpose() * h)
}

/// `C = F^T F` and `J = det F`; fails for `J <= 0`.
pub fn right_cauchy_green(h: &Tensor2) -> Result<(Tensor2, f64)> {
    let f = h + Tensor2::identity();
    let j = f.determinant();
    if j.is_nan() || j <= 0.0 {
        return Err(Error::InvertedElement {
            jacobian: j,
            node: None,
        });
    }
    Ok((f.transpose() * f, j))
}

fn hooke(material: &Material, strain: &Tensor2) -> Tensor2 {
    Tensor2::identity() * (material.lambda * strain.trace()) + 2.0 * material.mu * strain
}

/// Second Piola-Kirchhoff stress.
pub fn pk2(material: &Material, h: &Tensor2) -> Result<Tensor2> {
    match material.model {
        Model::Svk => Ok(hooke(material, &green_lagrange(h))),
        Model::LinearElastic => Ok(hooke(material, &(0.5 * (h + h.transpose())))),
        Model::NeoHooke => {
            let (c, j) = right_cauchy_green(h)?;
            let c_inv = c.try_inverse().ok_or(Error::InvertedElement {
                jacobian: j,
                node: None,
            })?;
            Ok(c_inv * (0.5 * material.lambda * (j * j - 1.0))
                + material.mu * (Tensor2::identity() - c_inv))
        }
    }
}

/// First Piola-Kirchhoff stress `P = (H + I) S`.
pub fn pk1(h: &Tensor2, s: &Tensor2) -> Tensor2 {
    (h + Tensor2::identity()) * s
}

/// Momentum flux carried by the lattice for a given displacement gradient:
/// `-rho0 cs^2 (H + H^T + tr(H) I)`.
pub fn momentum_flux_law(material: &Material, h: &Tensor2) -> Tensor2 {
    -material.mu * (h + h.transpose() + Tensor2::identity() * h.trace())
}
