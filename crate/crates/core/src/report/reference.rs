//! Printed literature values shipped in `data/reference.toml`.
//!
//! These are comparison constants, never inputs to a computation.

use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

const RAW: &str = include_str!("../../data/reference.toml");

/// A printed decimal together with the number of digits after the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Printed {
    pub value: f64,
    pub decimals: u32,
}

impl Printed {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let value: f64 = t
            .parse()
            .map_err(|_| Error::InvalidRequest(format!("reference value `{t}` is not a number")))?;
        let decimals = t.split_once('.').map_or(0, |(_, frac)| frac.len() as u32);
        Ok(Printed { value, decimals })
    }

    /// One unit in the last printed digit.
    pub fn last_digit(&self) -> f64 {
        10f64.powi(-(self.decimals as i32))
    }
}

impl<'de> Deserialize<'de> for Printed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Printed::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table1Row {
    pub t: f64,
    pub f0: Printed,
    pub f2: Printed,
    pub f3: Printed,
    pub f4: Printed,
    pub f_accu: Printed,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table1 {
    pub description: String,
    pub z: f64,
    pub rows: Vec<Table1Row>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table2Row {
    pub lambda: f64,
    pub beta: f64,
    pub f0: Printed,
    pub f2: Printed,
    pub f3: Printed,
    pub f_exa: Printed,
    pub f1_kr: Printed,
    pub f3_kr: Printed,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table2 {
    pub description: String,
    pub rows: Vec<Table2Row>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReferenceData {
    pub version: u32,
    pub table1: Table1,
    pub table2: Table2,
}

pub fn reference() -> &'static ReferenceData {
    static DATA: OnceLock<ReferenceData> = OnceLock::new();
    DATA.get_or_init(|| toml::from_str(RAW).expect("bundled reference data parses"))
}
