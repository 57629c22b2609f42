use std::path::{Path, PathBuf};

use dotx_core::oracle::OracleSettings;
use dotx_core::{Error, FieldConfig, MaterialParams, Result};

use crate::args::{PointArgs, QuadratureArgs};

pub const MATERIAL_PATH_ENV: &str = "DOTX_MATERIAL_PATH";
pub const DEFAULT_A_OVER_AB: f64 = 0.7;

/// Fully resolved inputs of one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub material: MaterialParams,
    pub fields: FieldConfig,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_point(point: &PointArgs, output_path: Option<PathBuf>) -> Result<Self> {
        let material = resolve_material(&point.material, point.c_override)?;
        let fields = match (point.a_nm, point.a_over_ab) {
            (Some(a), _) => FieldConfig::new(point.b_tesla, point.e_field, a),
            (None, d) => {
                FieldConfig::with_a_over_ab(&material, point.b_tesla, point.e_field, d.unwrap_or(DEFAULT_A_OVER_AB))
            }
        };
        fields.validate()?;
        if let Some(p) = &output_path {
            check_output(p)?;
        }
        Ok(Self {
            material,
            fields,
            output_path,
        })
    }
}

pub fn resolve_material(spec: &str, c_override: Option<f64>) -> Result<MaterialParams> {
    let dir = std::env::var_os(MATERIAL_PATH_ENV).map(PathBuf::from);
    let mut m = MaterialParams::resolve(spec, dir.as_deref())?;
    if let Some(c) = c_override {
        m = m.with_c_override(c);
    }
    m.validate()?;
    Ok(m)
}

pub fn oracle_settings(q: &QuadratureArgs) -> Result<OracleSettings> {
    let mut s = OracleSettings::default();
    if let Some(n) = q.gh_order {
        s.single_particle.order = n;
    }
    if let Some(t) = q.coulomb_tol {
        s.coulomb.rel_tol = t;
    }
    s.validate()?;
    Ok(s)
}

/// The parent directory of an output file must exist.
pub fn check_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(Error::Io(format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}
