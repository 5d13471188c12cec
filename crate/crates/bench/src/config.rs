//! Experiment configuration. Each experiment has a built-in default setup;
//! a JSON file may override any subset of the keys.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    E1Elliptic,
    E2Helmholtz1d,
    E3Laplace2d,
    E4Helmholtz2d,
    E5Multidomain,
    E6Elastic,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        Self::E1Elliptic,
        Self::E2Helmholtz1d,
        Self::E3Laplace2d,
        Self::E4Helmholtz2d,
        Self::E5Multidomain,
        Self::E6Elastic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::E1Elliptic => "e1_elliptic",
            Self::E2Helmholtz1d => "e2_helmholtz1d",
            Self::E3Laplace2d => "e3_laplace2d",
            Self::E4Helmholtz2d => "e4_helmholtz2d",
            Self::E5Multidomain => "e5_multidomain",
            Self::E6Elastic => "e6_elastic",
        }
    }

    pub fn is_layered(self) -> bool {
        !matches!(self, Self::E1Elliptic | Self::E2Helmholtz1d)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Phase,
    Interleave,
}

impl Ordering {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Phase => "phase",
            Self::Interleave => "interleave",
        }
    }
}

impl FromStr for Ordering {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "phase" => Ok(Self::Phase),
            "interleave" => Ok(Self::Interleave),
            _ => Err(BenchError::Config(format!(
                "unknown ordering '{s}' (phase|interleave)"
            ))),
        }
    }
}

/// A fully specified experiment.
///
/// `params` holds k (E1) or omega (E2) values; the layered experiments use
/// `omega` instead. `subdomains` lists the x-length and modulus factor of each
/// subdomain; `n` counts CFEM elements per subdomain and `baseline` regular
/// elements per subdomain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub params: Vec<f64>,
    pub n: Vec<usize>,
    pub ordering: Ordering,
    pub length: f64,
    pub height: f64,
    pub nz: usize,
    pub omega: f64,
    pub modulus: [f64; 2],
    pub subdomains: Vec<SubdomainConfig>,
    pub nu: f64,
    pub rho: f64,
    pub baseline: Vec<usize>,
    pub reference_nx: usize,
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdomainConfig {
    pub length: f64,
    pub scale: f64,
}

/// Same keys as [`ExperimentConfig`], all optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<ExperimentId>,
    pub params: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
    pub ordering: Option<Ordering>,
    pub length: Option<f64>,
    pub height: Option<f64>,
    pub nz: Option<usize>,
    pub omega: Option<f64>,
    pub modulus: Option<[f64; 2]>,
    pub subdomains: Option<Vec<SubdomainConfig>>,
    pub nu: Option<f64>,
    pub rho: Option<f64>,
    pub baseline: Option<Vec<usize>>,
    pub reference_nx: Option<usize>,
    pub timing: Option<bool>,
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..=b).collect()
}

fn halves(scale_right: f64) -> Vec<SubdomainConfig> {
    vec![
        SubdomainConfig {
            length: 5.0,
            scale: 1.0,
        },
        SubdomainConfig {
            length: 5.0,
            scale: scale_right,
        },
    ]
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentId) -> Self {
        let base = Self {
            experiment,
            params: vec![],
            n: range(1, 40),
            ordering: Ordering::Phase,
            length: 10.0,
            height: 1.0,
            nz: 200,
            omega: 3.0,
            modulus: [1.0, 0.01],
            subdomains: vec![SubdomainConfig {
                length: 10.0,
                scale: 1.0,
            }],
            nu: 0.35,
            rho: 1.0,
            baseline: vec![],
            reference_nx: 4096,
            timing: true,
        };
        let fem = vec![25, 50, 100, 200, 300, 400, 800, 1600];
        match experiment {
            ExperimentId::E1Elliptic => Self {
                params: vec![10.0, 50.0, 100.0, 200.0],
                length: 1.0,
                subdomains: vec![],
                nz: 0,
                omega: 0.0,
                modulus: [1.0, 0.0],
                reference_nx: 0,
                ..base
            },
            ExperimentId::E2Helmholtz1d => Self {
                params: vec![4.0, 10.0, 20.0, 30.0, 40.0],
                length: 1.0,
                subdomains: vec![],
                nz: 0,
                omega: 0.0,
                modulus: [1.0, 0.0],
                reference_nx: 0,
                ..base
            },
            ExperimentId::E3Laplace2d => Self {
                n: range(1, 20),
                omega: 0.0,
                modulus: [1.0, 0.0],
                ordering: Ordering::Interleave,
                baseline: fem,
                ..base
            },
            ExperimentId::E4Helmholtz2d => Self {
                n: range(1, 30),
                ordering: Ordering::Interleave,
                baseline: fem,
                ..base
            },
            ExperimentId::E5Multidomain => Self {
                n: range(1, 30),
                ordering: Ordering::Interleave,
                subdomains: halves(2.0),
                baseline: fem,
                ..base
            },
            ExperimentId::E6Elastic => Self {
                n: vec![5, 10, 15, 20, 24, 28, 32, 40, 50, 60],
                ordering: Ordering::Interleave,
                subdomains: halves(2.0),
                baseline: vec![100, 200, 400, 800],
                ..base
            },
        }
    }

    /// Defaults of `overrides.experiment` (or `fallback`) with the
    /// overrides applied.
    pub fn from_overrides(
        overrides: ConfigOverrides,
        fallback: Option<ExperimentId>,
    ) -> Result<Self, BenchError> {
        let id = overrides
            .experiment
            .or(fallback)
            .ok_or_else(|| BenchError::Config("config does not name an experiment".into()))?;
        if let (Some(a), Some(b)) = (overrides.experiment, fallback) {
            if a != b {
                return Err(BenchError::Config(format!(
                    "config is for {a}, subcommand runs {b}"
                )));
            }
        }
        let mut c = Self::defaults(id);
        let o = overrides;
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { c.$f = v; } )* };
        }
        take!(
            params,
            n,
            ordering,
            length,
            height,
            nz,
            omega,
            modulus,
            subdomains,
            nu,
            rho,
            baseline,
            reference_nx,
            timing
        );
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str, fallback: Option<ExperimentId>) -> Result<Self, BenchError> {
        let o: ConfigOverrides =
            serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        Self::from_overrides(o, fallback)
    }

    pub fn load(path: &Path, fallback: Option<ExperimentId>) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, fallback)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.n.contains(&0) {
            return bad("element counts must be positive");
        }
        if !(self.length > 0.0) {
            return bad("length must be positive");
        }
        if self.experiment.is_layered() {
            if self.nz == 0 || !(self.height > 0.0) {
                return bad("layered experiments need nz >= 1 and height > 0");
            }
            if self.subdomains.is_empty() || self.subdomains.iter().any(|s| !(s.length > 0.0)) {
                return bad("need at least one subdomain of positive length");
            }
            if self.reference_nx == 0 {
                return bad("reference_nx must be positive");
            }
        } else if self.params.is_empty() {
            return bad("params must list at least one k or omega");
        }
        Ok(())
    }
}
