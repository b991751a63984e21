use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forms::LocalCondition;
use crate::shapes::ShapeRegion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignatureFilter {
    TotallyReal,
    Complex,
    Any,
}

impl FromStr for SignatureFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "real" | "totally_real" => Ok(Self::TotallyReal),
            "complex" => Ok(Self::Complex),
            "any" => Ok(Self::Any),
            other => Err(Error::InvalidSpec(format!("unknown signature {other:?}"))),
        }
    }
}

impl fmt::Display for SignatureFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TotallyReal => "real",
            Self::Complex => "complex",
            Self::Any => "any",
        })
    }
}

/// A family of cubic rings: discriminant window `dmin < disc <= dmax`,
/// signature, local conditions at finitely many primes and a shape region.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub signature: SignatureFilter,
    pub dmin: i128,
    pub dmax: i128,
    pub maximal_required: bool,
    pub conditions: Vec<LocalCondition>,
    pub region: ShapeRegion,
    /// Also compute regulators when class data is requested.
    pub regulators: bool,
}

impl FamilySpec {
    pub fn new(signature: SignatureFilter, dmin: i128, dmax: i128) -> Self {
        Self {
            signature,
            dmin,
            dmax,
            maximal_required: true,
            conditions: Vec::new(),
            region: ShapeRegion::All,
            regulators: false,
        }
    }

    pub fn with_region(mut self, region: ShapeRegion) -> Self {
        self.region = region;
        self
    }

    pub fn with_conditions(mut self, conditions: Vec<LocalCondition>) -> Self {
        self.conditions = conditions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dmin >= self.dmax {
            return Err(Error::InvalidSpec(format!("empty window ({}, {}]", self.dmin, self.dmax)));
        }
        let mut seen = BTreeSet::new();
        for c in &self.conditions {
            if !seen.insert(c.p) {
                return Err(Error::InvalidSpec(format!("two conditions at p = {}", c.p)));
            }
        }
        Ok(())
    }

    /// The window cut down to the requested signature, or `None` if empty.
    pub fn effective_window(&self) -> Option<(i128, i128)> {
        let (lo, hi) = match self.signature {
            SignatureFilter::TotallyReal => (self.dmin.max(0), self.dmax),
            SignatureFilter::Complex => (self.dmin, self.dmax.min(0)),
            SignatureFilter::Any => (self.dmin, self.dmax),
        };
        (lo < hi).then_some((lo, hi))
    }

    /// Parse `key=value` lines: `signature`, `dmin`, `dmax`, `maximal`,
    /// `cond.P=TYPE`, `region` (a file path, resolved against `base`, or
    /// `all`) and `regulators`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let bad = |msg: String| Error::InvalidSpec(msg);
        let mut spec = FamilySpec::new(SignatureFilter::Any, 0, 0);
        let (mut dmin, mut dmax) = (None, None);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", i + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| v.parse::<i128>().map_err(|_| bad(format!("line {}: bad integer {v:?}", i + 1)));
            let flag = |v: &str| match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(bad(format!("line {}: bad boolean {v:?}", i + 1))),
            };
            match key {
                "signature" => spec.signature = value.parse()?,
                "dmin" => dmin = Some(int(value)?),
                "dmax" => dmax = Some(int(value)?),
                "maximal" => spec.maximal_required = flag(value)?,
                "regulators" => spec.regulators = flag(value)?,
                "region" => {
                    spec.region = if value == "all" {
                        ShapeRegion::All
                    } else {
                        let path = base.map(|b| b.join(value)).unwrap_or_else(|| value.into());
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| bad(format!("region file {}: {e}", path.display())))?;
                        text.parse().map_err(|e| bad(format!("region file {}: {e}", path.display())))?
                    }
                }
                _ => {
                    let Some(p) = key.strip_prefix("cond.") else {
                        return Err(bad(format!("line {}: unknown key {key:?}", i + 1)));
                    };
                    let cond: LocalCondition = format!("{p}:{value}")
                        .parse()
                        .map_err(|e| bad(format!("line {}: {e}", i + 1)))?;
                    spec.conditions.push(cond);
                }
            }
        }
        spec.dmin = dmin.ok_or_else(|| bad("missing dmin".into()))?;
        spec.dmax = dmax.ok_or_else(|| bad("missing dmax".into()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }
}
