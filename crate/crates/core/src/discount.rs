//! Time-indexed discount functions.
//!
//! An agent acting at time `k` weights a reward received at time `t >= k` by
//! `weight^k(t)`. A [`DiscountFamily`] is the rule producing these weights for every
//! origin `k`; a [`DiscountVector`] is the materialised slice of weights one origin
//! uses over a finite planning window.
//!
//! Interaction time starts at `t = 1`, so the pole of power discounting at `t = 0` is
//! never evaluated during an episode.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `g^t`, independent of the origin `k`.
pub fn geometric_weight<T: Scalar>(g: T, k: u64, t: u64) -> Result<T> {
    check_geometric(g)?;
    check_order(k, t)?;
    Ok(g.powf(T::from_count(t)))
}

/// `1 / (1 + kappa (t - k))^beta`.
pub fn hyperbolic_weight<T: Scalar>(kappa: T, beta: T, k: u64, t: u64) -> Result<T> {
    check_hyperbolic(kappa, beta)?;
    check_order(k, t)?;
    let delay = T::from_count(t - k);
    Ok((T::one() + kappa * delay).powf(beta).recip())
}

/// `t^(-beta)`, independent of the origin.
pub fn power_weight<T: Scalar>(beta: T, t: u64) -> Result<T> {
    check_power(beta)?;
    if t == 0 {
        return Err(Error::Domain(
            "power discounting is undefined at t = 0 (time starts at 1)".into(),
        ));
    }
    Ok(T::from_count(t).powf(-beta))
}

fn check_order(k: u64, t: u64) -> Result<()> {
    if t < k {
        return Err(Error::Domain(format!(
            "weight requested for t = {t} before origin k = {k}"
        )));
    }
    Ok(())
}

fn check_geometric<T: Scalar>(g: T) -> Result<()> {
    if !(g > T::zero() && g < T::one()) {
        return Err(Error::Domain(format!("geometric g = {g} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_hyperbolic<T: Scalar>(kappa: T, beta: T) -> Result<()> {
    if !(kappa > T::zero()) || !kappa.is_finite() {
        return Err(Error::Domain(format!("hyperbolic kappa = {kappa} must be > 0")));
    }
    if !(beta >= T::one()) || !beta.is_finite() {
        return Err(Error::Domain(format!("hyperbolic beta = {beta} must be >= 1")));
    }
    Ok(())
}

fn check_power<T: Scalar>(beta: T) -> Result<()> {
    if !(beta > T::one()) || !beta.is_finite() {
        return Err(Error::Domain(format!("power beta = {beta} must be > 1")));
    }
    Ok(())
}

/// Explicit per-origin weight tables. `table[k][i]` is `weight^k(k + i)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CustomTable<T> {
    rows: BTreeMap<u64, Vec<T>>,
}

impl<T: Scalar> CustomTable<T> {
    pub fn new() -> Self {
        Self { rows: BTreeMap::new() }
    }

    pub fn insert(&mut self, origin: u64, weights: Vec<T>) -> Result<()> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < T::zero()) {
            return Err(Error::Domain(format!(
                "custom weight {w} at origin {origin} must be finite and non-negative"
            )));
        }
        self.rows.insert(origin, weights);
        Ok(())
    }

    pub fn weight(&self, k: u64, t: u64) -> Result<T> {
        check_order(k, t)?;
        self.rows
            .get(&k)
            .and_then(|row| row.get((t - k) as usize))
            .copied()
            .ok_or_else(|| Error::Domain(format!("custom table has no weight for origin {k}, time {t}")))
    }

    pub fn origins(&self) -> impl Iterator<Item = u64> + '_ {
        self.rows.keys().copied()
    }

    /// Parses lines of the form `k,w_k,w_{k+1},...`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let bad = |what: &str| Error::Config(format!("custom table line {}: {what}", lineno + 1));
            let origin: u64 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("expected origin index"))?;
            let weights = fields
                .map(|f| f.parse::<f64>().map(T::lit).map_err(|_| bad("bad weight")))
                .collect::<Result<Vec<_>>>()?;
            table.insert(origin, weights)?;
        }
        Ok(table)
    }
}

/// A named real parameter of a discount family, used for sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamAxis {
    G,
    Kappa,
    Beta,
}

impl FromStr for ParamAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" | "gamma" => Ok(ParamAxis::G),
            "kappa" => Ok(ParamAxis::Kappa),
            "beta" => Ok(ParamAxis::Beta),
            other => Err(Error::Config(format!("unknown sweep axis '{other}'"))),
        }
    }
}

impl fmt::Display for ParamAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamAxis::G => "g",
            ParamAxis::Kappa => "kappa",
            ParamAxis::Beta => "beta",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscountFamily<T> {
    Geometric { g: T },
    Hyperbolic { kappa: T, beta: T },
    Power { beta: T },
    Custom { table: CustomTable<T> },
}

impl<T: Scalar> DiscountFamily<T> {
    pub fn geometric(g: T) -> Result<Self> {
        check_geometric(g)?;
        Ok(Self::Geometric { g })
    }

    pub fn hyperbolic(kappa: T, beta: T) -> Result<Self> {
        check_hyperbolic(kappa, beta)?;
        Ok(Self::Hyperbolic { kappa, beta })
    }

    pub fn power(beta: T) -> Result<Self> {
        check_power(beta)?;
        Ok(Self::Power { beta })
    }

    pub fn custom(table: CustomTable<T>) -> Self {
        Self::Custom { table }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Geometric { g } => check_geometric(g),
            Self::Hyperbolic { kappa, beta } => check_hyperbolic(kappa, beta),
            Self::Power { beta } => check_power(beta),
            Self::Custom { .. } => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Geometric { .. } => "geometric",
            Self::Hyperbolic { .. } => "hyperbolic",
            Self::Power { .. } => "power",
            Self::Custom { .. } => "custom",
        }
    }

    /// `weight^k(t)` for origin `k` and time `t >= k`.
    pub fn weight(&self, k: u64, t: u64) -> Result<T> {
        match self {
            Self::Geometric { g } => geometric_weight(*g, k, t),
            Self::Hyperbolic { kappa, beta } => hyperbolic_weight(*kappa, *beta, k, t),
            Self::Power { beta } => {
                check_order(k, t)?;
                power_weight(*beta, t)
            }
            Self::Custom { table } => table.weight(k, t),
        }
    }

    /// Materialises the weights origin `k` applies to times `k .. k + len`.
    pub fn vector(&self, origin: u64, len: usize) -> Result<DiscountVector<T>> {
        let weights = (0..len as u64)
            .map(|d| self.weight(origin, origin + d))
            .collect::<Result<Vec<_>>>()?;
        DiscountVector::from_weights(origin, weights)
    }

    /// Returns the same family with one named parameter replaced.
    pub fn with_param(&self, axis: ParamAxis, value: T) -> Result<Self> {
        let next = match (self, axis) {
            (Self::Geometric { .. }, ParamAxis::G) => Self::Geometric { g: value },
            (Self::Hyperbolic { beta, .. }, ParamAxis::Kappa) => Self::Hyperbolic {
                kappa: value,
                beta: *beta,
            },
            (Self::Hyperbolic { kappa, .. }, ParamAxis::Beta) => Self::Hyperbolic {
                kappa: *kappa,
                beta: value,
            },
            (Self::Power { .. }, ParamAxis::Beta) => Self::Power { beta: value },
            (family, axis) => {
                return Err(Error::Config(format!(
                    "{} discounting has no parameter '{axis}'",
                    family.name()
                )))
            }
        };
        next.validate()?;
        Ok(next)
    }

    /// Numerical check that every origin's vector is a positive multiple of the
    /// origin-1 vector: for each `k` in `2..=max_origin`, the ratio
    /// `weight^k(t) / weight^1(t)` must stay within relative tolerance `tol` of its
    /// value at `t = k` for all `t` in `k..=max_time`.
    pub fn is_time_consistent(&self, max_origin: u64, max_time: u64, tol: T) -> Result<bool> {
        if max_origin < 2 {
            return Err(Error::Domain("consistency window needs K >= 2".into()));
        }
        if max_time < max_origin + 2 {
            return Err(Error::Domain("consistency window needs T >= K + 2".into()));
        }
        if !(tol > T::zero()) {
            return Err(Error::Domain(format!("tolerance {tol} must be > 0")));
        }
        self.validate()?;
        let mut consistent = true;
        for k in 2..=max_origin {
            let mut reference = None;
            for t in k..=max_time {
                let base = self.weight(1, t)?;
                if base == T::zero() {
                    return Err(Error::Domain(format!("weight^1({t}) is zero; ratio undefined")));
                }
                let ratio = self.weight(k, t)? / base;
                let r0 = *reference.get_or_insert(ratio);
                if (ratio - r0).abs() > tol * r0 {
                    consistent = false;
                }
            }
        }
        Ok(consistent)
    }
}

/// The weights a single origin applies over a finite window starting at that origin.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscountVector<T> {
    origin: u64,
    weights: Vec<T>,
}

impl<T: Scalar> DiscountVector<T> {
    /// Every weight in the window must be finite and strictly positive.
    pub fn from_weights(origin: u64, weights: Vec<T>) -> Result<Self> {
        if let Some((d, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w <= T::zero())
        {
            return Err(Error::Domain(format!(
                "discount weight {w} at t = {} (origin {origin}) must be finite and > 0",
                origin + d as u64
            )));
        }
        Ok(Self { origin, weights })
    }

    pub fn origin(&self) -> u64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight at absolute time `t`, if inside the window.
    pub fn weight(&self, t: u64) -> Option<T> {
        t.checked_sub(self.origin)
            .and_then(|d| self.weights.get(d as usize))
            .copied()
    }

    /// Weight `offset` steps after the origin. Panics outside the window.
    #[inline]
    pub fn at_offset(&self, offset: usize) -> T {
        self.weights[offset]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::from_weights(self.origin, self.weights.iter().map(|&w| w * c).collect())
    }
}
