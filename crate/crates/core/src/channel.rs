//! Channel amplitude laws.
//!
//! Body-channel gains are modelled as positive, heavy-tailed amplitudes. Two
//! families cover the registry: Burr Type XII with CDF
//!
//!   F(x) = 1 - (1 + (x/alpha)^c)^(-k)
//!
//! and Weibull with CDF
//!
//!   F(x) = 1 - exp(-(x/a)^b).
//!
//! Both have closed-form inverses, so sampling is exact inverse-transform:
//! one uniform in `[0, 1)` maps to one amplitude. This keeps every draw a pure
//! function of the random stream.

use std::fmt;

use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {value}")))
    }
}

fn check_probability(u: f64) -> Result<()> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::Domain(u))
    }
}

/// Burr Type XII law with scale `alpha` and shapes `c`, `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurrXii {
    scale: f64,
    c: f64,
    k: f64,
}

impl BurrXii {
    pub fn new(scale: f64, c: f64, k: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        check_positive("c", c)?;
        check_positive("k", k)?;
        Ok(BurrXii { scale, c, k })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let z = (x / self.scale).powf(self.c);
        // 1 - (1 + z)^(-k), evaluated without cancellation for small z.
        -(-self.k * z.ln_1p()).exp_m1()
    }

    /// `alpha * ((1 - u)^(-1/k) - 1)^(1/c)`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.quantile(u))
    }

    fn quantile(&self, u: f64) -> f64 {
        let t = (-(-u).ln_1p() / self.k).exp_m1();
        self.scale * t.powf(1.0 / self.c)
    }
}

/// Weibull law with scale `a` and shape `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    scale: f64,
    shape: f64,
}

impl Weibull {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        check_positive("scale", scale)?;
        check_positive("shape", shape)?;
        Ok(Weibull { scale, shape })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -(-(x / self.scale).powf(self.shape)).exp_m1()
    }

    /// `a * (-ln(1 - u))^(1/b)`.
    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        check_probability(u)?;
        Ok(self.quantile(u))
    }

    fn quantile(&self, u: f64) -> f64 {
        self.scale * (-(-u).ln_1p()).powf(1.0 / self.shape)
    }
}

/// A channel amplitude law `f_k(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    BurrXii(BurrXii),
    Weibull(Weibull),
}

impl DistributionSpec {
    pub fn burr(scale: f64, c: f64, k: f64) -> Result<Self> {
        BurrXii::new(scale, c, k).map(DistributionSpec::BurrXii)
    }

    pub fn weibull(scale: f64, shape: f64) -> Result<Self> {
        Weibull::new(scale, shape).map(DistributionSpec::Weibull)
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::BurrXii(_) => "burr",
            DistributionSpec::Weibull(_) => "weibull",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DistributionSpec::BurrXii(d) => d.cdf(x),
            DistributionSpec::Weibull(d) => d.cdf(x),
        }
    }

    pub fn inverse_cdf(&self, u: f64) -> Result<f64> {
        match self {
            DistributionSpec::BurrXii(d) => d.inverse_cdf(u),
            DistributionSpec::Weibull(d) => d.inverse_cdf(u),
        }
    }
}

impl Distribution<f64> for DistributionSpec {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // `random::<f64>()` is uniform on [0, 1), inside the quantile domain.
        let u: f64 = rng.random();
        match self {
            DistributionSpec::BurrXii(d) => d.quantile(u),
            DistributionSpec::Weibull(d) => d.quantile(u),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::BurrXii(d) => {
                write!(f, "Burr([{:e}, {}, {}])", d.scale, d.c, d.k)
            }
            DistributionSpec::Weibull(d) => write!(f, "Weibull([{:e}, {}])", d.scale, d.shape),
        }
    }
}

/// Draws one channel amplitude `h_k[n]` from `spec`.
pub fn sample_channel<R: Rng + ?Sized>(spec: &DistributionSpec, rng: &mut R) -> f64 {
    spec.sample(rng)
}

/// Channel condition group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    Strong,
    Weak,
}

impl Condition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Strong => "strong",
            Condition::Weak => "weak",
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(Condition::Strong),
            "weak" => Ok(Condition::Weak),
            other => Err(Error::param(
                "condition",
                format!("expected `strong` or `weak`, got `{other}`"),
            )),
        }
    }
}

/// One receive node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProfile {
    pub id: u32,
    pub name: String,
    pub dist: DistributionSpec,
    pub condition: Condition,
}

// (name, family, parameters, condition)
const TABLE1: [(&str, &str, &[f64], Condition); 9] = [
    ("f1", "burr", &[4.71e-7, 2.43, 5.61], Condition::Weak),
    ("f2", "burr", &[9.32e-7, 3.88e1, 5.52e-1], Condition::Strong),
    ("f3", "burr", &[2.29e-8, 1.21e1, 5.07e-1], Condition::Weak),
    ("f4", "burr", &[5.63e-6, 2.40e1, 3.97e-1], Condition::Strong),
    ("f5", "weibull", &[1.76e-6, 3.88], Condition::Weak),
    ("f6", "burr", &[3.83e-7, 7.06, 1.26], Condition::Weak),
    ("f7", "burr", &[1.31e-6, 5.25, 1.47], Condition::Weak),
    ("f8", "weibull", &[1.01e-6, 4.05], Condition::Weak),
    ("f9", "burr", &[7.76e-6, 9.71, 7.87], Condition::Strong),
];

/// The nine measured body-channel models, `f1` through `f9`.
pub fn table1_registry() -> Vec<NodeProfile> {
    TABLE1
        .iter()
        .enumerate()
        .map(|(i, &(name, family, p, condition))| {
            let dist = match family {
                "burr" => DistributionSpec::burr(p[0], p[1], p[2]),
                _ => DistributionSpec::weibull(p[0], p[1]),
            }
            .expect("registry parameters are positive");
            NodeProfile {
                id: i as u32 + 1,
                name: name.to_string(),
                dist,
                condition,
            }
        })
        .collect()
}

/// Looks up a registry entry by name (`"f1"`..`"f9"`).
pub fn registry_entry(name: &str) -> Option<NodeProfile> {
    table1_registry().into_iter().find(|n| n.name == name)
}
