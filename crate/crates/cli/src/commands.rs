use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dotx_core::figures::{figure, FigureConfig, FigureId};
use dotx_core::oracle::{compare_with_closed_form, ComparisonStatus, OracleRecord, OracleSettings};
use dotx_core::sweep::{
    find_switch, find_switches, sweep, sweep_csv, switching_scenario, Axis, Scenario, ScenarioSpec, SweepSpec,
    SwitchPoint,
};
use dotx_core::units::CoulombSource;
use dotx_core::{derive_parameters, exchange_energy_lab, DerivedParams, Error, FieldConfig, MaterialParams, Result};
use serde::Serialize;

use crate::args::{DataFormat, Format, PointArgs, QuadratureArgs, RangeArgs};
use crate::config::{check_output, oracle_settings, resolve_material, RunConfig};

pub const EXIT_ORACLE_EXCEEDED: i32 = 4;

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn c_provenance(p: &DerivedParams) -> String {
    match p.c_source {
        CoulombSource::Override => format!("c: override {}", p.c_coulomb),
        CoulombSource::Derived => format!("c: derived {}", p.c_coulomb),
    }
}

#[derive(Serialize)]
struct Resolved<'a, T> {
    material: &'a MaterialParams,
    fields: &'a FieldConfig,
    derived: DerivedParams,
    #[serde(flatten)]
    result: T,
}

pub fn eval(point: &PointArgs, format: Format) -> Result<i32> {
    let cfg = RunConfig::from_point(point, None)?;
    let p = derive_parameters(&cfg.material, &cfg.fields)?;
    let br = exchange_energy_lab(&cfg.material, &cfg.fields)?;
    let out = match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Eval {
                breakdown: dotx_core::ExchangeBreakdown,
            }
            to_json(&Resolved {
                material: &cfg.material,
                fields: &cfg.fields,
                derived: p,
                result: Eval { breakdown: br },
            })?
        }
        Format::Text => {
            let m = &cfg.material;
            let f = &cfg.fields;
            let mut s = String::new();
            let _ = writeln!(s, "{}", c_provenance(&p));
            let _ = writeln!(
                s,
                "material: effective_mass={} dielectric_const={} confinement_energy_mev={}",
                m.effective_mass, m.dielectric_const, m.confinement_energy_mev
            );
            let _ = writeln!(s, "fields: B_T={} E_V_per_m={} a_nm={}", f.b_tesla, f.e_field, f.a_nm);
            let _ = writeln!(s, "bohr_radius_nm: {}", p.bohr_radius_nm);
            let _ = writeln!(s, "b: {}", p.b);
            let _ = writeln!(s, "d: {}", p.d);
            let _ = writeln!(s, "efield_ratio: {}", p.efield_ratio);
            let _ = writeln!(s, "S: {}", p.overlap());
            let _ = writeln!(s, "prefactor: {}", br.prefactor);
            let _ = writeln!(s, "coulomb_term: {}", br.coulomb_term);
            let _ = writeln!(s, "quartic_term: {}", br.quartic_term);
            let _ = writeln!(s, "efield_term: {}", br.efield_term);
            let _ = writeln!(s, "J_dimensionless: {}", br.j_dimensionless);
            let _ = writeln!(s, "J_meV: {}", br.j_mev);
            s
        }
    };
    emit(None, &out)?;
    Ok(0)
}

fn sweep_spec(cfg: &RunConfig, range: &RangeArgs, steps: usize) -> Result<SweepSpec> {
    let spec = SweepSpec {
        vary: range.vary.parse()?,
        from: range.from,
        to: range.to,
        steps,
        fixed: cfg.fields,
        material: cfg.material,
    };
    spec.validate()?;
    Ok(spec)
}

fn describe(sp: &SwitchPoint) -> String {
    let dir = serde_json::to_value(sp.direction)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    format!(
        "switch {}={} ({dir}, |J|={:e} meV)",
        sp.axis.label(),
        sp.value,
        sp.residual
    )
}

pub fn sweep_cmd(point: &PointArgs, range: &RangeArgs, steps: usize, out: Option<PathBuf>) -> Result<i32> {
    let cfg = RunConfig::from_point(point, out)?;
    let spec = sweep_spec(&cfg, range, steps)?;
    let rows = sweep(&spec)?;
    let switches = find_switches(&spec, dotx_core::sweep::DEFAULT_RESIDUAL_TOL)?;
    emit(cfg.output_path.as_deref(), &sweep_csv(&spec, &rows))?;
    let mut summary = format!("{} rows, {} sign change(s)\n", rows.len(), switches.len());
    for sp in &switches {
        let _ = writeln!(summary, "{}", describe(sp));
    }
    if cfg.output_path.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(0)
}

pub fn switch_cmd(point: &PointArgs, range: &RangeArgs, tol: f64, out: Option<PathBuf>) -> Result<i32> {
    let cfg = RunConfig::from_point(point, out)?;
    let axis: Axis = range.vary.parse()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let sp = find_switch(axis, &cfg.material, &cfg.fields, (range.from, range.to), tol)?;
    let json = to_json(&Resolved {
        material: &cfg.material,
        fields: &cfg.fields,
        derived: derive_parameters(&cfg.material, &cfg.fields)?,
        result: SwitchOut { switch: sp },
    })?;
    emit(cfg.output_path.as_deref(), &json)?;
    if cfg.output_path.is_some() {
        println!("{}", describe(&sp));
    }
    Ok(0)
}

#[derive(Serialize)]
struct SwitchOut {
    switch: SwitchPoint,
}

pub fn scenario_cmd(
    point: &PointArgs,
    b_hold: f64,
    e_overshoot: f64,
    steps_per_phase: usize,
    format: DataFormat,
    out: Option<PathBuf>,
) -> Result<i32> {
    let cfg = RunConfig::from_point(point, out)?;
    let spec = ScenarioSpec {
        b_hold,
        e_overshoot,
        steps_per_phase,
        ..ScenarioSpec::new(cfg.material, cfg.fields.a_nm)
    };
    let sc = switching_scenario(&spec)?;
    let text = match format {
        DataFormat::Json => to_json(&sc)?,
        DataFormat::Csv => scenario_csv(&sc),
    };
    emit(cfg.output_path.as_deref(), &text)?;
    if cfg.output_path.is_some() {
        println!("{}", describe(&sc.b_star));
        println!("{}", describe(&sc.e_star));
    }
    Ok(0)
}

fn scenario_csv(sc: &Scenario) -> String {
    let mut s = String::from("# dotx scenario\n");
    let fixed = FieldConfig::new(sc.spec.b_hold, 0.0, sc.spec.a_nm);
    s.push_str(&dotx_core::sweep::provenance_header(&sc.spec.material, &fixed));
    let _ = writeln!(s, "# B_star_T: {}", sc.b_star.value);
    let _ = writeln!(s, "# E_star_V_per_m: {}", sc.e_star.value);
    s.push_str("phase,step,B_T,E_V_per_m,J_meV,sign\n");
    for st in &sc.steps {
        let sign = serde_json::to_value(st.sign)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let phase = serde_json::to_value(st.phase)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            "{phase},{},{},{},{},{sign}",
            st.step, st.b_tesla, st.e_field, st.j_mev
        );
    }
    s
}

pub fn figure_cmd(id: u32, out: &Path, material: &str, c_override: Option<f64>, derived_c: bool) -> Result<i32> {
    let fid = FigureId::from_number(id)?;
    if !out.is_dir() {
        std::fs::create_dir_all(out).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    }
    let mut config = FigureConfig::default_for(fid);
    let mut mat = resolve_material(material, None)?;
    if !derived_c {
        mat = mat.with_c_override(c_override.unwrap_or(2.36));
    }
    mat.validate()?;
    config.material = mat;
    let data = figure(fid, &config)?;
    let path = out.join(format!("fig{id}.csv"));
    emit(Some(&path), &data.to_csv())?;
    println!("wrote {}", path.display());
    for c in &data.curves {
        for sp in &c.switches {
            println!("curve {}: {}", c.param, describe(sp));
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct OracleSummary {
    points: usize,
    agree: usize,
    below_noise_floor: usize,
    exceeded: usize,
    incomplete: usize,
    max_rel_discrepancy: f64,
}

#[derive(Serialize)]
struct OracleReport<'a> {
    material: &'a MaterialParams,
    e_field: f64,
    threshold: f64,
    settings: &'a OracleSettings,
    records: &'a [OracleRecord],
    summary: OracleSummary,
}

#[allow(clippy::too_many_arguments)]
pub fn oracle_cmd(
    material: &str,
    c_override: Option<f64>,
    b_values: &[f64],
    d_values: &[f64],
    e_field: f64,
    threshold: f64,
    quadrature: &QuadratureArgs,
    out: &Path,
) -> Result<i32> {
    let mat = resolve_material(material, c_override)?;
    let settings = oracle_settings(quadrature)?;
    check_output(out)?;
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be > 0, got {threshold}"
        )));
    }
    if b_values.is_empty() || d_values.is_empty() {
        return Err(Error::InvalidArgument("oracle grid is empty".into()));
    }
    let mut records = Vec::with_capacity(b_values.len() * d_values.len());
    for &b in b_values {
        for &d in d_values {
            let fields = FieldConfig::with_a_over_ab(&mat, b, e_field, d);
            records.push(compare_with_closed_form(&mat, &fields, &settings, threshold)?);
        }
    }
    let count = |s: ComparisonStatus| records.iter().filter(|r| r.status == s).count();
    let summary = OracleSummary {
        points: records.len(),
        agree: count(ComparisonStatus::Agree),
        below_noise_floor: count(ComparisonStatus::BelowNoiseFloor),
        exceeded: count(ComparisonStatus::Exceeded),
        incomplete: count(ComparisonStatus::Incomplete),
        max_rel_discrepancy: records
            .iter()
            .filter(|r| r.status != ComparisonStatus::Incomplete)
            .map(|r| r.rel_discrepancy)
            .fold(0.0, f64::max),
    };
    let failed = summary.exceeded + summary.incomplete;
    println!(
        "{} points: {} agree, {} below noise floor, {} exceeded, {} incomplete; max rel discrepancy {:e}",
        summary.points,
        summary.agree,
        summary.below_noise_floor,
        summary.exceeded,
        summary.incomplete,
        summary.max_rel_discrepancy
    );
    let report = OracleReport {
        material: &mat,
        e_field,
        threshold,
        settings: &settings,
        records: &records,
        summary,
    };
    emit(Some(out), &to_json(&report)?)?;
    if failed > 0 {
        for r in records
            .iter()
            .filter(|r| matches!(r.status, ComparisonStatus::Exceeded | ComparisonStatus::Incomplete))
        {
            eprintln!(
                "B={} T d={}: j_oracle={} j_closed_form={} rel={:e} ({:?})",
                r.params.fields.b_tesla, r.params.derived.d, r.j_oracle, r.j_closed_form, r.rel_discrepancy, r.status
            );
            for (k, u) in &r.upsilon {
                eprintln!("  {k} = {} +- {:e}", u.value, u.error);
            }
            for f in &r.failures {
                eprintln!("  failure: {f}");
            }
        }
        return Ok(EXIT_ORACLE_EXCEEDED);
    }
    Ok(0)
}
