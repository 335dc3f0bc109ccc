use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use crate::commands::CliError;
use stokeslab::stokes::{PressureRecovery, TimeScheme};
use stokeslab::NormOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    /// Zero forcing and zero divergence.
    Zero,
    /// Forcing of an exact divergence-free flow.
    Manufactured,
    /// Zero forcing, divergence sin(pi t) r^2 sin(2 theta).
    Divergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    CrankNicolson,
    ImplicitEuler,
}

impl From<SchemeArg> for TimeScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::CrankNicolson => TimeScheme::CrankNicolson,
            SchemeArg::ImplicitEuler => TimeScheme::ImplicitEuler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PressureArg {
    Poisson,
    Momentum,
}

impl From<PressureArg> for PressureRecovery {
    fn from(p: PressureArg) -> Self {
        match p {
            PressureArg::Poisson => PressureRecovery::Poisson,
            PressureArg::Momentum => PressureRecovery::Momentum,
        }
    }
}

/// Default tolerances per command. Names not listed here are rejected.
pub fn default_tolerances(command: &str) -> BTreeMap<String, f64> {
    let entries: &[(&str, f64)] = match command {
        "counterexample" => &[
            ("alpha_constant", 10.0),
            ("divergence_quadrature", 1e-8),
            ("boundary_divergence", 1e-6),
        ],
        "divsolve" => &[("div_residual", 1e-8), ("boundary", 1e-6)],
        "stokes" => &[("div_residual", 1e-8), ("boundary", 1e-6)],
        "verify" => return crate::verify::default_tolerances(),
        _ => &[],
    };
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn parse_tolerance(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got '{text}'"))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("tolerance '{name}' has a non-numeric value '{value}'"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("tolerance '{name}' must be finite and nonnegative"));
    }
    Ok((name.trim().to_string(), v))
}

/// Everything a run depends on; written next to the outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n_r: usize,
    pub n_theta: usize,
    pub n_t: usize,
    pub s: f64,
    pub l: f64,
    #[serde(skip)]
    pub out: PathBuf,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pressure: Option<PressureArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

impl RunConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        command: &str,
        n_r: usize,
        n_theta: usize,
        n_t: usize,
        s: f64,
        l: f64,
        out: PathBuf,
        seed: u64,
        overrides: &[(String, f64)],
    ) -> Result<Self, CliError> {
        if n_r < 2 {
            return Err(CliError::Usage(format!(
                "--n-r must be at least 2, got {n_r}"
            )));
        }
        if n_t < 2 {
            return Err(CliError::Usage(format!(
                "--n-t must be at least 2, got {n_t}"
            )));
        }
        NormOrder::new(s, l).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut tolerances = default_tolerances(command);
        for (name, value) in overrides {
            match tolerances.get_mut(name) {
                Some(slot) => *slot = *value,
                None => {
                    let known: Vec<&str> = tolerances.keys().map(String::as_str).collect();
                    return Err(CliError::Usage(format!(
                        "unknown tolerance '{name}' for {command}; known: {}",
                        known.join(", ")
                    )));
                }
            }
        }
        Ok(Self {
            command: command.to_string(),
            n_r,
            n_theta,
            n_t,
            s,
            l,
            out,
            seed,
            tolerances,
            modes: None,
            eps: None,
            input: None,
            mode: None,
            data: None,
            scheme: None,
            pressure: None,
            t_end: None,
        })
    }

    pub fn order(&self) -> NormOrder {
        NormOrder::new(self.s, self.l).expect("validated in RunConfig::new")
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_parsing() {
        assert_eq!(
            parse_tolerance("boundary=1e-5").unwrap(),
            ("boundary".to_string(), 1e-5)
        );
        assert!(parse_tolerance("boundary").is_err());
        assert!(parse_tolerance("boundary=x").is_err());
        assert!(parse_tolerance("boundary=-1").is_err());
    }

    #[test]
    fn overrides_must_name_known_tolerances() {
        let ok = RunConfig::new(
            "divsolve",
            16,
            4,
            8,
            2.0,
            2.0,
            "o".into(),
            0,
            &[("boundary".into(), 1e-3)],
        )
        .unwrap();
        assert_eq!(ok.tol("boundary"), 1e-3);
        assert_eq!(ok.tol("div_residual"), 1e-8);
        let bad = RunConfig::new(
            "divsolve",
            16,
            4,
            8,
            2.0,
            2.0,
            "o".into(),
            0,
            &[("nope".into(), 1.0)],
        );
        assert!(matches!(bad, Err(CliError::Usage(_))));
        assert!(matches!(
            RunConfig::new("divsolve", 16, 4, 8, 1.0, 2.0, "o".into(), 0, &[]),
            Err(CliError::Usage(_))
        ));
    }
}
