//! Parameter sweeps over (initial state, s, r, λt), CSV output, and the
//! analytic-versus-oracle verification run.
//!
//! Rows are produced in grid order: initial state outermost, then s, then
//! r, with λt varying fastest. Grid points are evaluated in parallel but the
//! output order never depends on scheduling.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic::{negativity_closed_form, AtomXState, InitialAtoms, WeightTable};
use crate::entanglement::negativity_general;
use crate::error::{Error, Result};
use crate::fieldprep::{
    inject, inject_oracle, squeezed_state, tail_weight, CavityFieldState, CouplingParam, SqueezeParam,
    TruncationPolicy, DEFAULT_TAIL_TOL,
};
use crate::jcdynamics::{reduced_atoms, JCParams, UnitaryRoute};
use crate::tensorops::{max_abs_diff, DensityOperator, HERMITIAN_TOL_CONSTRUCTED, HERMITIAN_TOL_EVOLVED};

/// Largest allowed |analytic − oracle| on any reduced-state entry.
pub const ENGINE_TOL: f64 = 1e-8;
/// Largest allowed gap between the closed-form and eigenvalue measures.
pub const MEASURE_TOL: f64 = 1e-10;
/// Largest allowed gap between the two injected-field constructions.
pub const INJECTION_TOL: f64 = 1e-10;

pub const CSV_HEADER: &str = "s,r,lambda_t,initial,measure,n_max,tail_weight,engine,disagreement";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Oracle,
    Both,
}

impl Engine {
    pub fn label(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Oracle => "oracle",
            Self::Both => "both",
        }
    }

    fn needs_oracle(self) -> bool {
        matches!(self, Self::Oracle | Self::Both)
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "analytic" => Ok(Self::Analytic),
            "oracle" => Ok(Self::Oracle),
            "both" => Ok(Self::Both),
            other => Err(Error::Config(format!(
                "unknown engine '{other}' (expected analytic, oracle or both)"
            ))),
        }
    }
}

/// `steps` evenly spaced points from `start` to `stop` inclusive; a single
/// step means just `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaTGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl LambdaTGrid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.start, self.stop, self.steps)
    }
}

pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..steps)
            .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub s_values: Vec<f64>,
    pub r_values: Vec<f64>,
    pub lambda_t: LambdaTGrid,
    pub initial: Vec<InitialAtoms>,
    pub engine: Engine,
    pub tail_tol: f64,
    pub n_max_override: Option<usize>,
    pub output_path: PathBuf,
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            s_values: vec![0.65],
            r_values: vec![0.0],
            lambda_t: LambdaTGrid {
                start: 0.0,
                stop: 15.0,
                steps: 151,
            },
            initial: vec![InitialAtoms::Gg],
            engine: Engine::Analytic,
            tail_tol: DEFAULT_TAIL_TOL,
            n_max_override: None,
            output_path: PathBuf::from("sweep.csv"),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Measure against s at λt = 11 for three reflection coefficients.
    Fig2,
    /// Time series at s = 0.65 for four reflection coefficients and both
    /// initial preparations.
    Fig3,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            other => Err(Error::Config(format!("unknown preset '{other}' (expected fig2 or fig3)"))),
        }
    }
}

impl SweepConfig {
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Fig2 => Self {
                s_values: linspace(0.0, 2.0, 41),
                r_values: vec![0.0, 0.25, 0.7],
                lambda_t: LambdaTGrid {
                    start: 11.0,
                    stop: 11.0,
                    steps: 1,
                },
                initial: vec![InitialAtoms::Gg],
                output_path: PathBuf::from("fig2.csv"),
                ..Self::default()
            },
            Preset::Fig3 => Self {
                s_values: vec![0.65],
                r_values: vec![0.0, 0.25, 0.7, 0.99],
                lambda_t: LambdaTGrid {
                    start: 0.0,
                    stop: 15.0,
                    steps: 151,
                },
                initial: vec![InitialAtoms::Gg, InitialAtoms::Ee],
                output_path: PathBuf::from("fig3.csv"),
                ..Self::default()
            },
        }
    }

    /// Grid checked by `verify` when no overrides are given.
    pub fn verification_grid() -> Self {
        Self {
            s_values: vec![0.3, 0.65, 1.0],
            r_values: vec![0.0, 0.25, 0.7, 0.99],
            lambda_t: LambdaTGrid {
                start: 0.0,
                stop: 15.0,
                steps: 16,
            },
            initial: vec![InitialAtoms::Gg, InitialAtoms::Ee],
            engine: Engine::Both,
            output_path: PathBuf::from("verify.csv"),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.s_values.is_empty() {
            return bad("no s values".into());
        }
        if let Some(s) = self.s_values.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return bad(format!("s must be finite and >= 0, got {s}"));
        }
        if self.r_values.is_empty() {
            return bad("no r values".into());
        }
        if let Some(r) = self.r_values.iter().find(|r| !r.is_finite() || !(0.0..=1.0).contains(*r)) {
            return bad(format!("r must lie in [0, 1], got {r}"));
        }
        let lt = &self.lambda_t;
        if lt.steps < 1 {
            return bad("lt_steps must be at least 1".into());
        }
        if !lt.start.is_finite() || !lt.stop.is_finite() || lt.start < 0.0 {
            return bad(format!("invalid interaction-time range {}..{}", lt.start, lt.stop));
        }
        if lt.stop < lt.start {
            return bad(format!("lt_stop {} is below lt_start {}", lt.stop, lt.start));
        }
        if self.initial.is_empty() {
            return bad("no initial state".into());
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return bad(format!("tail_tol must lie in (0, 1), got {}", self.tail_tol));
        }
        if self.n_max_override == Some(0) {
            return bad("n_max must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    pub fn policy(&self) -> TruncationPolicy {
        match self.n_max_override {
            Some(n) => TruncationPolicy::Cutoff(n),
            None => TruncationPolicy::TailTolerance(self.tail_tol),
        }
    }

    pub fn num_points(&self) -> usize {
        self.initial.len() * self.s_values.len() * self.r_values.len() * self.lambda_t.steps
    }
}

/// Partial configuration from a key=value file or the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub s_values: Option<Vec<f64>>,
    pub r_values: Option<Vec<f64>>,
    pub lt_start: Option<f64>,
    pub lt_stop: Option<f64>,
    pub lt_steps: Option<usize>,
    pub initial: Option<Vec<InitialAtoms>>,
    pub engine: Option<Engine>,
    pub tail_tol: Option<f64>,
    pub n_max: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("'{item}' is not a finite number")))
        })
        .collect()
}

pub fn parse_initial_list(text: &str) -> Result<Vec<InitialAtoms>> {
    text.split(',').map(str::parse).collect()
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{}' for {key}", value.trim())))
}

fn parse_finite(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_scalar(key, value)?;
    if !v.is_finite() {
        return Err(Error::Config(format!("{key} must be finite")));
    }
    Ok(v)
}

impl ConfigOverrides {
    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// ignored; keys may use `-` or `_`. Later lines win.
    pub fn parse_kv(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            out.set(&key, value)
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(e))))?;
        }
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "s" => self.s_values = Some(parse_f64_list(value)?),
            "r" => self.r_values = Some(parse_f64_list(value)?),
            "lt_start" => self.lt_start = Some(parse_finite(key, value)?),
            "lt_stop" => self.lt_stop = Some(parse_finite(key, value)?),
            "lt_steps" => self.lt_steps = Some(parse_scalar(key, value)?),
            "initial" => self.initial = Some(parse_initial_list(value)?),
            "engine" => self.engine = Some(value.parse()?),
            "tail_tol" => self.tail_tol = Some(parse_finite(key, value)?),
            "n_max" => self.n_max = Some(parse_scalar(key, value)?),
            "out" => {
                if value.is_empty() {
                    return Err(Error::Config("out must not be empty".into()));
                }
                self.output_path = Some(PathBuf::from(value))
            }
            "threads" => self.threads = Some(parse_scalar(key, value)?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Fields set in `self` replace those in `config`.
    pub fn apply(&self, config: &mut SweepConfig) {
        if let Some(v) = &self.s_values {
            config.s_values = v.clone();
        }
        if let Some(v) = &self.r_values {
            config.r_values = v.clone();
        }
        if let Some(v) = self.lt_start {
            config.lambda_t.start = v;
        }
        if let Some(v) = self.lt_stop {
            config.lambda_t.stop = v;
        }
        if let Some(v) = self.lt_steps {
            config.lambda_t.steps = v;
        }
        if let Some(v) = &self.initial {
            config.initial = v.clone();
        }
        if let Some(v) = self.engine {
            config.engine = v;
        }
        if let Some(v) = self.tail_tol {
            config.tail_tol = v;
        }
        if let Some(v) = self.n_max {
            config.n_max_override = Some(v);
        }
        if let Some(v) = &self.output_path {
            config.output_path = v.clone();
        }
        if let Some(v) = self.threads {
            config.threads = Some(v);
        }
    }
}

fn strip_prefix(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub s: f64,
    pub r: f64,
    pub lambda_t: f64,
    pub initial: InitialAtoms,
    pub measure: f64,
    pub n_max: usize,
    pub tail_weight: f64,
    pub engine: Engine,
    /// Largest |analytic − oracle| over the reduced-state entries (engine = both).
    pub disagreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Formats with 12 significant digits, dropping trailing zeros.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                format_sig12(row.s),
                format_sig12(row.r),
                format_sig12(row.lambda_t),
                row.initial,
                format_sig12(row.measure),
                row.n_max,
                format_sig12(row.tail_weight),
                row.engine.label(),
                row.disagreement.map(format_sig12).unwrap_or_default(),
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Everything shared by the grid points of one (s, r) pair.
struct Group {
    s: SqueezeParam,
    coupling: CouplingParam,
    n_max: usize,
    tail_weight: f64,
    table: WeightTable,
    field: Option<CavityFieldState>,
}

impl Group {
    fn build(s: f64, r: f64, config: &SweepConfig, with_oracle: bool) -> Result<Self> {
        let s = SqueezeParam::new(s)?;
        let coupling = CouplingParam::from_reflection(r)?;
        let n_max = config.policy().resolve(s)?;
        let field = if with_oracle {
            let psi = squeezed_state(s, TruncationPolicy::Cutoff(n_max))?;
            Some(inject_oracle(&psi, coupling)?)
        } else {
            None
        };
        Ok(Self {
            s,
            coupling,
            n_max,
            tail_weight: tail_weight(s, n_max),
            table: WeightTable::new(s, coupling, n_max),
            field,
        })
    }

    fn oracle_state(&self, initial: InitialAtoms, params: JCParams) -> Result<DensityOperator> {
        let field = self.field.as_ref().expect("oracle field built");
        reduced_atoms(&initial.atom_state(), field, params, UnitaryRoute::HamiltonianExponential)
    }
}

#[derive(Debug, Clone, Copy)]
struct PointIndex {
    initial: InitialAtoms,
    group: usize,
    lambda_t: f64,
}

fn grid_points(config: &SweepConfig) -> Vec<PointIndex> {
    let lts = config.lambda_t.values();
    let groups = config.s_values.len() * config.r_values.len();
    let mut points = Vec::with_capacity(config.num_points());
    for &initial in &config.initial {
        for group in 0..groups {
            for &lambda_t in &lts {
                points.push(PointIndex {
                    initial,
                    group,
                    lambda_t,
                });
            }
        }
    }
    points
}

fn build_groups(config: &SweepConfig, with_oracle: bool) -> Result<Vec<Group>> {
    let pairs: Vec<(f64, f64)> = config
        .s_values
        .iter()
        .flat_map(|&s| config.r_values.iter().map(move |&r| (s, r)))
        .collect();
    pairs
        .par_iter()
        .map(|&(s, r)| Group::build(s, r, config, with_oracle))
        .collect()
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn location(point: &PointIndex, group: &Group) -> String {
    format!(
        "s={} r={} lambda_t={} initial={}",
        format_sig12(group.s.value()),
        format_sig12(group.coupling.r()),
        format_sig12(point.lambda_t),
        point.initial
    )
}

fn evaluate(point: &PointIndex, group: &Group, engine: Engine) -> Result<SweepRow> {
    let params = JCParams::new(point.lambda_t)?;
    let (measure, disagreement) = match engine {
        Engine::Analytic => (negativity_closed_form(&group.table.xstate(point.initial, params)), None),
        Engine::Oracle => (negativity_general(&group.oracle_state(point.initial, params)?)?.measure, None),
        Engine::Both => {
            let x = group.table.xstate(point.initial, params);
            let oracle = group.oracle_state(point.initial, params)?;
            let gap = max_abs_diff(x.to_density().matrix(), oracle.matrix());
            if !(gap < ENGINE_TOL) {
                return Err(Error::EngineDisagreement {
                    disagreement: gap,
                    tolerance: ENGINE_TOL,
                    location: location(point, group),
                });
            }
            (negativity_closed_form(&x), Some(gap))
        }
    };
    Ok(SweepRow {
        s: group.s.value(),
        r: group.coupling.r(),
        lambda_t: point.lambda_t,
        initial: point.initial,
        measure,
        n_max: group.n_max,
        tail_weight: group.tail_weight,
        engine,
        disagreement,
    })
}

/// Evaluates every grid point. Does not write any file.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    with_pool(config.threads, || {
        let groups = build_groups(config, config.engine.needs_oracle())?;
        let rows = grid_points(config)
            .par_iter()
            .map(|p| evaluate(p, &groups[p.group], config.engine))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepResult { rows })
    })?
}

/// [`run_sweep`] followed by writing the CSV to `config.output_path`.
pub fn run_sweep_to_file(config: &SweepConfig) -> Result<SweepResult> {
    let result = run_sweep(config)?;
    result.write_csv(&config.output_path)?;
    Ok(result)
}

/// Deliberate corruption of the closed-form weights, for exercising the
/// failure path of [`verify_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultInjection {
    /// Photon level whose squeezing amplitude is scaled.
    pub level: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldCheck {
    pub s: f64,
    pub r: f64,
    pub n_max: usize,
    /// max |inject − inject_oracle| over all entries.
    pub injection_gap: f64,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyPoint {
    pub s: f64,
    pub r: f64,
    pub lambda_t: f64,
    pub initial: InitialAtoms,
    pub n_max: usize,
    pub measure: f64,
    /// max |analytic − oracle| over the 4×4 reduced state.
    pub disagreement: f64,
    /// |closed-form measure − eigenvalue measure| on the analytic state.
    pub measure_gap: f64,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub fields: Vec<FieldCheck>,
    pub points: Vec<VerifyPoint>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.fields.iter().all(|f| f.violations.is_empty()) && self.points.iter().all(|p| p.violations.is_empty())
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyPoint> {
        self.points.iter().filter(|p| !p.violations.is_empty())
    }

    pub fn max_disagreement(&self) -> f64 {
        self.points.iter().map(|p| p.disagreement).fold(0.0, f64::max)
    }

    pub fn max_measure_gap(&self) -> f64 {
        self.points.iter().map(|p| p.measure_gap).fold(0.0, f64::max)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for field in &self.fields {
            writeln!(
                f,
                "field s={} r={} n_max={} injection_gap={:.3e} {}{}",
                format_sig12(field.s),
                format_sig12(field.r),
                field.n_max,
                field.injection_gap,
                if field.violations.is_empty() { "ok" } else { "FAIL" },
                field.violations.iter().map(|v| format!(" [{v}]")).collect::<String>(),
            )?;
        }
        for p in &self.points {
            writeln!(
                f,
                "point s={} r={} lambda_t={} initial={} n_max={} measure={} disagreement={:.3e} measure_gap={:.3e} {}{}",
                format_sig12(p.s),
                format_sig12(p.r),
                format_sig12(p.lambda_t),
                p.initial,
                p.n_max,
                format_sig12(p.measure),
                p.disagreement,
                p.measure_gap,
                if p.violations.is_empty() { "ok" } else { "FAIL" },
                p.violations.iter().map(|v| format!(" [{v}]")).collect::<String>(),
            )?;
        }
        let failed = self.fields.iter().filter(|x| !x.violations.is_empty()).count()
            + self.points.iter().filter(|x| !x.violations.is_empty()).count();
        writeln!(
            f,
            "summary: {} fields, {} points, {} failed, max disagreement {:.3e}, max measure gap {:.3e} -> {}",
            self.fields.len(),
            self.points.len(),
            failed,
            self.max_disagreement(),
            self.max_measure_gap(),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

pub fn verify(config: &SweepConfig) -> Result<VerifyReport> {
    verify_with(config, None)
}

fn check_field(group: &Group) -> Result<FieldCheck> {
    let mut violations = Vec::new();
    let oracle = group.field.as_ref().expect("oracle field built");
    let psi = squeezed_state(group.s, TruncationPolicy::Cutoff(group.n_max))?;
    let coeff = inject(&psi, group.coupling)?;
    let gap = max_abs_diff(coeff.rho().matrix(), oracle.rho().matrix());
    if !(gap < INJECTION_TOL) {
        violations.push(format!("injection gap {gap:.3e} >= {INJECTION_TOL:e}"));
    }
    for (name, field) in [("coefficient", &coeff), ("oracle", oracle)] {
        if let Err(e) = field.rho().validate(HERMITIAN_TOL_CONSTRUCTED) {
            violations.push(format!("{name} field: {e}"));
        }
    }
    Ok(FieldCheck {
        s: group.s.value(),
        r: group.coupling.r(),
        n_max: group.n_max,
        injection_gap: gap,
        violations,
    })
}

fn check_point(point: &PointIndex, group: &Group) -> Result<VerifyPoint> {
    let params = JCParams::new(point.lambda_t)?;
    let mut violations = Vec::new();
    let x: AtomXState = group.table.xstate(point.initial, params);
    let oracle = group.oracle_state(point.initial, params)?;

    let disagreement = max_abs_diff(x.to_density().matrix(), oracle.matrix());
    if !(disagreement < ENGINE_TOL) {
        violations.push(format!("analytic vs oracle {disagreement:.3e} >= {ENGINE_TOL:e}"));
    }
    if let Err(e) = x.validate() {
        violations.push(format!("analytic state: {e}"));
    }
    if let Err(e) = oracle.validate(HERMITIAN_TOL_EVOLVED) {
        violations.push(format!("oracle state: {e}"));
    }
    if (x.b - x.c).abs() >= 1e-10 {
        violations.push(format!("B - C = {:.3e}", x.b - x.c));
    }
    let closed = negativity_closed_form(&x);
    let generic = negativity_general(&x.to_density())?.measure;
    let measure_gap = (closed - generic).abs();
    if !(measure_gap < MEASURE_TOL) {
        violations.push(format!("measure gap {measure_gap:.3e} >= {MEASURE_TOL:e}"));
    }
    if group.s.value() == 0.0 && closed >= 1e-12 {
        violations.push(format!("measure {closed:e} without squeezing"));
    }
    Ok(VerifyPoint {
        s: group.s.value(),
        r: group.coupling.r(),
        lambda_t: point.lambda_t,
        initial: point.initial,
        n_max: group.n_max,
        measure: closed,
        disagreement,
        measure_gap,
        violations,
    })
}

/// Runs both engines over the grid, checking engine agreement, state
/// validity, and the closed-form measure at every point, plus the two field
/// constructions for every (s, r).
pub fn verify_with(config: &SweepConfig, fault: Option<FaultInjection>) -> Result<VerifyReport> {
    let mut config = config.clone();
    config.engine = Engine::Both;
    config.validate()?;
    with_pool(config.threads, || {
        let mut groups = build_groups(&config, true)?;
        if let Some(fault) = fault {
            for g in &mut groups {
                g.table.corrupt_level(fault.level, fault.factor);
            }
        }
        let fields = groups.par_iter().map(check_field).collect::<Result<Vec<_>>>()?;
        let points = grid_points(&config)
            .par_iter()
            .map(|p| check_point(p, &groups[p.group]))
            .collect::<Result<Vec<_>>>()?;
        Ok(VerifyReport { fields, points })
    })?
}
