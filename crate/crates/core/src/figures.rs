//! Data behind the exchange-energy plots: `J(B)` at several electric fields,
//! `J(E)` at several magnetic fields and `J(d)` at several magnetic fields.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{find_switches, provenance_header, sweep, Axis, SweepSpec, SwitchPoint, DEFAULT_RESIDUAL_TOL};
use crate::units::{FieldConfig, MaterialParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FigureId {
    /// `J(B)` for several `E`.
    JOfB,
    /// `J(E)` for several `B`.
    JOfE,
    /// `J(d)` for several `B`.
    JOfD,
}

impl FigureId {
    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(FigureId::JOfB),
            2 => Ok(FigureId::JOfE),
            4 => Ok(FigureId::JOfD),
            _ => Err(Error::InvalidArgument(format!(
                "unknown figure {n} (expected 1, 2 or 4)"
            ))),
        }
    }

    pub fn number(self) -> u32 {
        match self {
            FigureId::JOfB => 1,
            FigureId::JOfE => 2,
            FigureId::JOfD => 4,
        }
    }

    fn axes(self) -> (Axis, Axis) {
        match self {
            FigureId::JOfB => (Axis::B, Axis::E),
            FigureId::JOfE => (Axis::E, Axis::B),
            FigureId::JOfD => (Axis::D, Axis::B),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureConfig {
    pub material: MaterialParams,
    /// Half-distance in units of `a_B` when it is not the swept axis.
    pub d: f64,
    pub range: (f64, f64),
    pub steps: usize,
    /// Values of the second axis, one curve each.
    pub curves: Vec<f64>,
}

impl FigureConfig {
    pub fn default_for(id: FigureId) -> Self {
        let material = MaterialParams::gaas().with_c_override(2.36);
        match id {
            FigureId::JOfB => Self {
                material,
                d: 0.7,
                range: (0.0, 5.0),
                steps: 201,
                curves: vec![0.0, 0.5e5, 1.0e5, 1.5e5],
            },
            FigureId::JOfE => Self {
                material,
                d: 0.7,
                range: (0.0, 5.0e5),
                steps: 201,
                curves: vec![1.0, 1.5, 2.0, 2.5],
            },
            FigureId::JOfD => Self {
                material,
                d: 0.7,
                range: (0.1, 1.5),
                steps: 141,
                curves: vec![0.0, 1.0, 1.5, 2.0],
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// Value of the fixed second axis.
    pub param: f64,
    pub j_mev: Vec<f64>,
    pub switches: Vec<SwitchPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub id: FigureId,
    pub config: FigureConfig,
    pub x: Vec<f64>,
    pub curves: Vec<Curve>,
}

pub fn figure(id: FigureId, config: &FigureConfig) -> Result<FigureData> {
    if config.curves.is_empty() {
        return Err(Error::invalid("curves", "need at least one curve"));
    }
    let (vary, param_axis) = id.axes();
    let base = FieldConfig::with_a_over_ab(&config.material, 0.0, 0.0, config.d);
    let mut x = Vec::new();
    let mut curves = Vec::with_capacity(config.curves.len());
    for &param in &config.curves {
        let spec = SweepSpec {
            vary,
            from: config.range.0,
            to: config.range.1,
            steps: config.steps,
            fixed: param_axis.apply(&config.material, &base, param),
            material: config.material,
        };
        let rows = sweep(&spec)?;
        x = rows.iter().map(|r| r.x).collect();
        let j_mev = rows.iter().map(|r| r.j_mev.unwrap_or(f64::NAN)).collect();
        let switches = find_switches(&spec, DEFAULT_RESIDUAL_TOL)?;
        curves.push(Curve { param, j_mev, switches });
    }
    Ok(FigureData {
        id,
        config: config.clone(),
        x,
        curves,
    })
}

impl FigureData {
    pub fn to_csv(&self) -> String {
        let (vary, param_axis) = self.id.axes();
        let mut out = format!("# dotx figure {}\n", self.id.number());
        let base = FieldConfig::with_a_over_ab(&self.config.material, 0.0, 0.0, self.config.d);
        out.push_str(&provenance_header(&self.config.material, &base));
        let _ = writeln!(out, "# x: {}  curves: {}", vary.label(), param_axis.label());
        for c in &self.curves {
            for s in &c.switches {
                let _ = writeln!(
                    out,
                    "# switch: {}={} at {}={} direction={}",
                    param_axis.label(),
                    c.param,
                    vary.label(),
                    s.value,
                    serde_json::to_string(&s.direction)
                        .unwrap_or_default()
                        .trim_matches('"')
                );
            }
        }
        out.push_str(vary.label());
        for c in &self.curves {
            let _ = write!(out, ",J_meV@{}={}", param_axis.label(), c.param);
        }
        out.push('\n');
        for (i, x) in self.x.iter().enumerate() {
            let _ = write!(out, "{x}");
            for c in &self.curves {
                let _ = write!(out, ",{}", c.j_mev[i]);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for n in [1, 2, 4] {
            assert_eq!(FigureId::from_number(n).unwrap().number(), n);
        }
        assert!(FigureId::from_number(3).is_err());
    }

    #[test]
    fn field_curve_ordering() {
        let id = FigureId::JOfB;
        let f = figure(id, &FigureConfig::default_for(id)).unwrap();
        // J rises with E at every B
        for i in 0..f.x.len() {
            for w in f.curves.windows(2) {
                assert!(w[1].j_mev[i] > w[0].j_mev[i]);
            }
        }
        let first: Vec<f64> = f.curves.iter().map(|c| c.switches[0].value).collect();
        assert!(first.windows(2).all(|w| w[1] >= w[0]), "{first:?}");
        assert!(first[0] > 1.2 && first[0] < 1.5);
    }

    #[test]
    fn distance_curves() {
        let id = FigureId::JOfD;
        let f = figure(id, &FigureConfig::default_for(id)).unwrap();
        assert!(f.curves[0].j_mev.iter().all(|&j| j > 0.0));
        let d_star = |k: usize| f.curves[k].switches[0].value;
        assert!(d_star(3) < d_star(2));
        assert!(d_star(2) < d_star(1));
    }

    #[test]
    fn csv_is_rectangular() {
        let id = FigureId::JOfE;
        let f = figure(id, &FigureConfig::default_for(id)).unwrap();
        let csv = f.to_csv();
        assert!(csv.starts_with("# dotx figure 2\n"));
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 202);
        assert!(data.iter().all(|l| l.split(',').count() == 5));
        assert_eq!(csv, figure(id, &FigureConfig::default_for(id)).unwrap().to_csv());
    }
}
