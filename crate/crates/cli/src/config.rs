//! Experiment configuration: a TOML file with `[system]`, an optional
//! `[blowup]`, any number of `[[probe]]` tables and `[output]`.
//!
//! Parsing rejects unknown keys. [`validate`] then builds the system and the
//! blow-up stage so that every probe's prerequisites are checked before any
//! probe runs.

use std::path::{Path, PathBuf};

use minlab_core::blowup::{build_stage, BlownIndexSet, FiberKind, SkewBase, StageSpace, SuspensionBase, Weights};
use minlab_core::circle::{golden, DenjoyPoint, DenjoySystem, GapSchedule, RotationSystem};
use minlab_core::pseudoarc::crooked_map;
use minlab_core::skew::{KleinSystem, RoofFunction, SkewSystem, TorusPoint};
use minlab_core::suspension::{suspend, CantorPoint, CantorSystem, Odometer, SuspensionPoint, SuspensionSystem};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Parse(String),

    #[error("line {line}, key `{key}`: {message}")]
    Invalid { line: usize, key: String, message: String },
}

/// A real parameter: a number or one of the names `golden` and `silver`
/// (`(sqrt 5 - 1)/2` and `sqrt 2 - 1`).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Real {
    Number(f64),
    Named(NamedReal),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedReal {
    Golden,
    Silver,
}

impl Real {
    pub fn value(self) -> f64 {
        match self {
            Real::Number(x) => x,
            Real::Named(NamedReal::Golden) => golden(),
            Real::Named(NamedReal::Silver) => 2f64.sqrt() - 1.0,
        }
    }
}

fn golden_real() -> Real {
    Real::Named(NamedReal::Golden)
}

fn default_seeds() -> Vec<f64> {
    vec![0.0]
}

fn default_odometer_depth() -> u32 {
    24
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    rename_all_fields = "camelCase",
    deny_unknown_fields
)]
pub enum SystemConfig {
    Rotation {
        #[serde(default = "golden_real")]
        alpha: Real,
    },
    Denjoy {
        #[serde(default = "golden_real")]
        alpha: Real,
        #[serde(default = "default_seeds")]
        seeds: Vec<f64>,
        gap_scale: Option<f64>,
        gap_ratio: Option<f64>,
    },
    OdometerSuspension {
        #[serde(default = "default_odometer_depth")]
        depth: u32,
        #[serde(default = "golden_real")]
        time: Real,
    },
    DenjoySuspension {
        #[serde(default = "golden_real")]
        alpha: Real,
        #[serde(default = "default_seeds")]
        seeds: Vec<f64>,
        gap_scale: Option<f64>,
        gap_ratio: Option<f64>,
        #[serde(default = "golden_real")]
        time: Real,
    },
    Skew {
        #[serde(default = "golden_real")]
        alpha: Real,
        harmonics: Vec<(u32, f64)>,
    },
    Klein {
        #[serde(default = "golden_real")]
        alpha: Real,
        harmonics: Vec<(u32, f64)>,
    },
}

impl SystemConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            SystemConfig::Rotation { .. } => "rotation",
            SystemConfig::Denjoy { .. } => "denjoy",
            SystemConfig::OdometerSuspension { .. } => "odometer-suspension",
            SystemConfig::DenjoySuspension { .. } => "denjoy-suspension",
            SystemConfig::Skew { .. } => "skew",
            SystemConfig::Klein { .. } => "klein",
        }
    }

    fn harmonics(&self) -> Option<&[(u32, f64)]> {
        match self {
            SystemConfig::Skew { harmonics, .. } | SystemConfig::Klein { harmonics, .. } => Some(harmonics),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupMode {
    TwoSided,
    BackwardOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberKindName {
    Interval,
    Pseudoarc,
}

fn default_fiber_kind() -> FiberKindName {
    FiberKindName::Interval
}

fn default_weights() -> f64 {
    0.5
}

fn default_level() -> u32 {
    2
}

fn default_tower_depth() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BlowupConfig {
    pub mode: BlowupMode,
    pub n: u32,
    #[serde(default = "default_fiber_kind")]
    pub fiber_kind: FiberKindName,
    /// Ratio of the geometric fiber weights.
    #[serde(default = "default_weights")]
    pub weights: f64,
    #[serde(default = "default_level")]
    pub crooked_level: u32,
    #[serde(default = "default_tower_depth")]
    pub tower_depth: usize,
    /// Seed of the blown orbit: `[x, s]` for suspensions, `[x, y]` for skews.
    pub seed_point: Option<[f64; 2]>,
}

fn default_orbit_steps() -> usize {
    1000
}

fn default_density_n() -> usize {
    10_000
}

fn default_samples() -> usize {
    10_000
}

fn default_max_n() -> u32 {
    10
}

fn default_slope_point() -> [f64; 2] {
    [0.13, 0.42]
}

fn default_betas() -> Vec<f64> {
    vec![-3.0, -0.5, 0.0, 0.7, 2.0]
}

fn default_radii() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

fn default_slope_tol() -> f64 {
    1e-4
}

fn default_equivariance_samples() -> usize {
    100_000
}

fn default_equivariance_tol() -> f64 {
    1e-12
}

fn default_radius() -> i64 {
    2
}

fn yes() -> bool {
    true
}

fn default_k1() -> i64 {
    1
}

fn default_k2() -> i64 {
    2
}

fn default_product_target() -> [f64; 2] {
    [0.0, 0.25]
}

fn default_product_steps() -> usize {
    1_000_000
}

fn default_drift_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(
    tag = "kind",
    rename_all = "lowercase",
    rename_all_fields = "camelCase",
    deny_unknown_fields
)]
pub enum ProbeConfig {
    Orbit {
        #[serde(default = "default_orbit_steps")]
        steps: usize,
        start: Option<[f64; 2]>,
    },
    Density {
        #[serde(default = "default_density_n")]
        n: usize,
        eps: f64,
        start: Option<[f64; 2]>,
    },
    Fibers {},
    Witness {},
    Almost11 {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_max_n")]
        max_n: u32,
    },
    Slope {
        #[serde(default = "default_slope_point")]
        point: [f64; 2],
        #[serde(default = "default_betas")]
        betas: Vec<f64>,
        #[serde(default = "default_radii")]
        radii: Vec<f64>,
        #[serde(default = "default_slope_tol")]
        tol: f64,
    },
    Equivariance {
        #[serde(default = "default_equivariance_samples")]
        samples: usize,
        #[serde(default = "default_equivariance_tol")]
        tol: f64,
    },
    Tiling {
        #[serde(default = "default_radius")]
        radius: i64,
        #[serde(default)]
        allow_swap: bool,
        #[serde(default = "yes")]
        monotone: bool,
    },
    Product {
        #[serde(default = "default_k1")]
        k1: i64,
        #[serde(default = "default_k2")]
        k2: i64,
        #[serde(default = "golden_real")]
        alpha: Real,
        #[serde(default)]
        start: [f64; 2],
        #[serde(default = "default_product_target")]
        target: [f64; 2],
        #[serde(default = "default_product_steps")]
        steps: usize,
        contrast_beta: Option<Real>,
        #[serde(default = "default_drift_tol")]
        drift_tol: f64,
    },
}

pub const PROBE_KINDS: [(&str, &str); 9] = [
    ("orbit", "iterate the system and record the orbit"),
    (
        "density",
        "covering radius of an orbit (circle) or a grid density certificate (suspension)",
    ),
    ("fibers", "fiber diameters of the blow-up stage against 2 w_i"),
    ("witness", "two fiber points with one image (backward-only blow-up)"),
    ("almost11", "fiber-size histogram against the 1/n thresholds"),
    ("slope", "secant slopes of radial segments against beta + r'(x)"),
    ("equivariance", "p o F = G o p on random points of the torus"),
    (
        "tiling",
        "enumerate lattice automorphisms of a tiling window and classify them",
    ),
    ("product", "invariant drift and orbit margin for a product of rotations"),
];

impl ProbeConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ProbeConfig::Orbit { .. } => "orbit",
            ProbeConfig::Density { .. } => "density",
            ProbeConfig::Fibers {} => "fibers",
            ProbeConfig::Witness {} => "witness",
            ProbeConfig::Almost11 { .. } => "almost11",
            ProbeConfig::Slope { .. } => "slope",
            ProbeConfig::Equivariance { .. } => "equivariance",
            ProbeConfig::Tiling { .. } => "tiling",
            ProbeConfig::Product { .. } => "product",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

fn default_directory() -> PathBuf {
    PathBuf::from("minlab-out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    pub seed: u64,
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: Spanned<SystemConfig>,
    pub blowup: Option<Spanned<BlowupConfig>>,
    #[serde(default, rename = "probe")]
    pub probes: Vec<Spanned<ProbeConfig>>,
    pub output: OutputConfig,
}

pub enum BuiltSystem {
    Rotation(RotationSystem),
    Denjoy(DenjoySystem),
    Suspension { system: SuspensionSystem, time: f64 },
    Skew(SkewSystem),
    Klein(KleinSystem),
}

pub enum Stage {
    Suspension(StageSpace<SuspensionBase>),
    Skew(StageSpace<SkewBase>),
}

/// A parsed config together with the objects its probes run on.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub system: BuiltSystem,
    pub stage: Option<Stage>,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_string()))
}

pub fn load_config(path: &Path) -> Result<Experiment, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    validate(&text, parse_config(&text)?)
}

/// Parse and validate in one step.
pub fn parse_experiment(text: &str) -> Result<Experiment, ConfigError> {
    validate(text, parse_config(text)?)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Locator<'a> {
    text: &'a str,
}

impl Locator<'_> {
    /// Error at the line of the last segment of `key` within the spanned
    /// table, or at the table header when the key is absent.
    fn at<T>(&self, spanned: &Spanned<T>, key: impl Into<String>, message: impl Into<String>) -> ConfigError {
        let key = key.into();
        let span = spanned.span();
        let field = key.rsplit('.').next().unwrap_or(&key);
        let start = span.start.min(self.text.len());
        let mut offset = start;
        let mut line = line_of(self.text, start);
        for (k, l) in self.text[start..].split_inclusive('\n').enumerate() {
            if k > 0 && l.trim_start().starts_with('[') {
                break;
            }
            let rest = l.trim_start().strip_prefix(field).map(str::trim_start);
            if rest.is_some_and(|r| r.starts_with('=')) {
                line = line_of(self.text, offset);
                break;
            }
            offset += l.len();
        }
        ConfigError::Invalid {
            line,
            key,
            message: message.into(),
        }
    }
}

fn schedule(seeds: &[f64], scale: Option<f64>, ratio: Option<f64>) -> Result<GapSchedule, String> {
    match (scale, ratio) {
        (None, None) => Ok(GapSchedule::half_circle(seeds.len())),
        (Some(s), Some(r)) => Ok(GapSchedule::geometric(s, r, minlab_core::circle::DEFAULT_DEPTH)),
        _ => Err("gapScale and gapRatio must be given together".into()),
    }
}

fn build_system(cfg: &SystemConfig) -> Result<BuiltSystem, String> {
    let core = |e: minlab_core::Error| e.to_string();
    Ok(match cfg {
        SystemConfig::Rotation { alpha } => BuiltSystem::Rotation(RotationSystem::new(alpha.value()).map_err(core)?),
        SystemConfig::Denjoy {
            alpha,
            seeds,
            gap_scale,
            gap_ratio,
        } => {
            let s = schedule(seeds, *gap_scale, *gap_ratio)?;
            BuiltSystem::Denjoy(DenjoySystem::new(alpha.value(), seeds, s).map_err(core)?)
        }
        SystemConfig::OdometerSuspension { depth, time } => BuiltSystem::Suspension {
            system: suspend(CantorSystem::Odometer(Odometer::new(*depth).map_err(core)?)).map_err(core)?,
            time: time.value(),
        },
        SystemConfig::DenjoySuspension {
            alpha,
            seeds,
            gap_scale,
            gap_ratio,
            time,
        } => {
            let s = schedule(seeds, *gap_scale, *gap_ratio)?;
            let h = DenjoySystem::new(alpha.value(), seeds, s).map_err(core)?;
            BuiltSystem::Suspension {
                system: suspend(CantorSystem::Denjoy(h)).map_err(core)?,
                time: time.value(),
            }
        }
        SystemConfig::Skew { alpha, harmonics } => BuiltSystem::Skew(
            SkewSystem::new(alpha.value(), RoofFunction::general(harmonics).map_err(core)?).map_err(core)?,
        ),
        SystemConfig::Klein { alpha, harmonics } => {
            let f = SkewSystem::new(alpha.value(), RoofFunction::general(harmonics).map_err(core)?).map_err(core)?;
            BuiltSystem::Klein(KleinSystem::new(f).map_err(core)?)
        }
    })
}

/// A point of a suspension from `[x, s]`: a word for odometer bases, a
/// Cantor angle for Denjoy bases.
pub fn suspension_point(sys: &SuspensionSystem, [x, s]: [f64; 2]) -> minlab_core::Result<SuspensionPoint> {
    let base = match sys.base() {
        CantorSystem::Odometer(o) => {
            let size = 1u64 << o.depth();
            CantorPoint::Word(((x.rem_euclid(1.0) * size as f64) as u64).min(size - 1))
        }
        CantorSystem::Denjoy(_) => CantorPoint::Denjoy(DenjoyPoint::cantor(x)),
    };
    sys.point(base, s)
}

fn build_stage_for(system: &BuiltSystem, b: &BlowupConfig) -> Result<Stage, String> {
    let core = |e: minlab_core::Error| e.to_string();
    let indices = match b.mode {
        BlowupMode::TwoSided => BlownIndexSet::TwoSided(b.n),
        BlowupMode::BackwardOnly => BlownIndexSet::BackwardOnly(b.n),
    };
    let weights = Weights::geometric(b.weights).map_err(core)?;
    let fiber = match b.fiber_kind {
        FiberKindName::Interval => FiberKind::Interval,
        FiberKindName::Pseudoarc => FiberKind::Tower {
            bonding: crooked_map(b.crooked_level).map_err(core)?,
            depth: b.tower_depth,
        },
    };
    match system {
        BuiltSystem::Suspension { system, time } => {
            let default = match system.base() {
                CantorSystem::Odometer(_) => [0.0, 0.0],
                CantorSystem::Denjoy(_) => [0.3, 0.2],
            };
            let seed = suspension_point(system, b.seed_point.unwrap_or(default)).map_err(core)?;
            let base = SuspensionBase::new(system, *time).map_err(core)?;
            Ok(Stage::Suspension(
                build_stage(base, seed, indices, fiber, weights).map_err(core)?,
            ))
        }
        BuiltSystem::Skew(f) => {
            if b.fiber_kind == FiberKindName::Pseudoarc {
                return Err("pseudoarc fibers need a suspension system".into());
            }
            let [x, y] = b.seed_point.unwrap_or([0.1, 0.2]);
            let stage = build_stage(SkewBase::new(f.clone()), TorusPoint::new(x, y), indices, fiber, weights);
            Ok(Stage::Skew(stage.map_err(core)?))
        }
        _ => Err("a blow-up needs an odometer-suspension, denjoy-suspension or skew system".into()),
    }
}

/// Check cross-section consistency and build the system and stage.
pub fn validate(text: &str, config: ExperimentConfig) -> Result<Experiment, ConfigError> {
    let loc = Locator { text };
    let sys_cfg = config.system.get_ref();
    let odd = sys_cfg
        .harmonics()
        .map(|h| h.iter().all(|&(k, a)| k % 2 == 1 || a == 0.0))
        .unwrap_or(true);
    let wants_equivariance = config
        .probes
        .iter()
        .any(|p| matches!(p.get_ref(), ProbeConfig::Equivariance { .. }));
    if !odd && (wants_equivariance || matches!(sys_cfg, SystemConfig::Klein { .. })) {
        return Err(loc.at(
            &config.system,
            "system.harmonics",
            "equivariance requires odd harmonics",
        ));
    }
    let system = build_system(sys_cfg).map_err(|m| loc.at(&config.system, "system", m))?;

    let stage = match &config.blowup {
        Some(b) => Some(build_stage_for(&system, b.get_ref()).map_err(|m| loc.at(b, "blowup", m))?),
        None => None,
    };

    for (i, p) in config.probes.iter().enumerate() {
        let key = format!("probe[{}].kind", i + 1);
        let fail = |m: String| Err(loc.at(p, key.clone(), m));
        let kind = p.get_ref().kind();
        match p.get_ref() {
            ProbeConfig::Fibers {} | ProbeConfig::Almost11 { .. } | ProbeConfig::Witness {} if stage.is_none() => {
                return fail(format!("{kind} probe requires a [blowup] section"));
            }
            ProbeConfig::Witness {} => {
                let mode = config.blowup.as_ref().map(|b| b.get_ref().mode);
                if mode != Some(BlowupMode::BackwardOnly) {
                    return fail("witness probe requires blowup mode backward-only".into());
                }
            }
            ProbeConfig::Almost11 { samples, max_n } if *samples == 0 || *max_n == 0 => {
                return fail("almost11 needs samples >= 1 and maxN >= 1".into());
            }
            ProbeConfig::Density { eps, n, .. } => {
                if matches!(system, BuiltSystem::Skew(_) | BuiltSystem::Klein(_)) {
                    return fail("density probe requires a circle or suspension system".into());
                }
                if !(*eps > 0.0 && *eps <= 1.0) || *n == 0 {
                    return fail("density needs 0 < eps <= 1 and n >= 1".into());
                }
            }
            ProbeConfig::Slope { radii, betas, .. } => {
                if !matches!(system, BuiltSystem::Skew(_) | BuiltSystem::Klein(_)) {
                    return fail("slope probe requires a skew or klein system".into());
                }
                if radii.is_empty() || betas.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
                    return fail("slope needs nonempty betas and positive radii".into());
                }
            }
            ProbeConfig::Equivariance { samples, .. } => {
                if !matches!(system, BuiltSystem::Skew(_) | BuiltSystem::Klein(_)) {
                    return fail("equivariance probe requires a skew or klein system".into());
                }
                if *samples == 0 {
                    return fail("equivariance needs samples >= 1".into());
                }
            }
            ProbeConfig::Tiling { radius, .. } if !(0..=minlab_core::rigidity::MAX_WINDOW_RADIUS).contains(radius) => {
                return fail(format!(
                    "tiling radius must lie in 0..={}",
                    minlab_core::rigidity::MAX_WINDOW_RADIUS
                ));
            }
            ProbeConfig::Product { k1, k2, steps, .. } if (*k1 == 0 && *k2 == 0) || *steps == 0 => {
                return fail("product needs (k1, k2) != (0, 0) and steps >= 1".into());
            }
            _ => {}
        }
    }
    if config.output.formats.is_empty() {
        return Err(ConfigError::Invalid {
            line: text
                .lines()
                .position(|l| l.trim_start().starts_with("formats"))
                .map_or(0, |l| l + 1),
            key: "output.formats".into(),
            message: "at least one format is required".into(),
        });
    }
    Ok(Experiment { config, system, stage })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
kind = "rotation"

[[probe]]
kind = "density"
eps = 3e-4

[output]
seed = 7
"#;

    fn invalid(text: &str) -> (usize, String, String) {
        match parse_experiment(text) {
            Err(ConfigError::Invalid { line, key, message }) => (line, key, message),
            Err(e) => panic!("expected a cross-section error, got {e}"),
            Ok(_) => panic!("expected an error"),
        }
    }

    #[test]
    fn minimal_config_parses() {
        let exp = parse_experiment(MINIMAL).unwrap();
        assert_eq!(
            exp.config.system.get_ref(),
            &SystemConfig::Rotation { alpha: golden_real() }
        );
        assert_eq!(exp.config.probes.len(), 1);
        assert_eq!(exp.config.output.seed, 7);
        assert_eq!(exp.config.output.formats.len(), 3);
        assert!(matches!(exp.system, BuiltSystem::Rotation(_)));
    }

    #[test]
    fn even_harmonic_with_klein_probe() {
        let text = r#"
[system]
kind = "skew"
harmonics = [[1, 0.05], [2, 0.01]]

[[probe]]
kind = "equivariance"

[output]
seed = 1
"#;
        let (line, key, message) = invalid(text);
        assert_eq!(message, "equivariance requires odd harmonics");
        assert_eq!(key, "system.harmonics");
        assert_eq!(line, 4);
        let klein = text
            .replace("\"skew\"", "\"klein\"")
            .replace("[[probe]]\nkind = \"equivariance\"\n", "");
        assert_eq!(invalid(&klein).2, "equivariance requires odd harmonics");
    }

    #[test]
    fn witness_needs_backward_only() {
        let text = r#"
[system]
kind = "odometer-suspension"

[blowup]
mode = "two-sided"
n = 4

[[probe]]
kind = "fibers"

[[probe]]
kind = "witness"

[output]
seed = 1
"#;
        let (line, key, message) = invalid(text);
        assert_eq!(line, 13);
        assert_eq!(key, "probe[2].kind");
        assert!(message.contains("backward-only"), "{message}");
        assert!(parse_experiment(&text.replace("two-sided", "backward-only")).is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_location() {
        let text = MINIMAL.replace("eps = 3e-4", "eps = 3e-4\nepsilon = 1");
        match parse_experiment(&text) {
            Err(ConfigError::Parse(m)) => {
                assert!(m.contains("line 5"), "{m}");
                assert!(m.contains("epsilon"), "{m}");
            }
            _ => panic!("unknown key accepted"),
        }
        let text = MINIMAL.replace("[output]", "[outputs]");
        assert!(matches!(parse_experiment(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn seed_is_mandatory() {
        let text = MINIMAL.replace("seed = 7", "directory = \"x\"");
        match parse_experiment(&text) {
            Err(ConfigError::Parse(m)) => assert!(m.contains("seed"), "{m}"),
            _ => panic!("missing seed accepted"),
        }
    }

    #[test]
    fn type_mismatch_is_a_parse_error() {
        let text = MINIMAL.replace("eps = 3e-4", "eps = \"small\"");
        assert!(matches!(parse_experiment(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn blowup_needs_a_suitable_system() {
        let text = MINIMAL.replace("[[probe]]", "[blowup]\nmode = \"two-sided\"\nn = 2\n\n[[probe]]");
        let (line, key, _) = invalid(&text);
        assert_eq!((line, key.as_str()), (5, "blowup"));
    }

    #[test]
    fn probe_prerequisites() {
        let fibers = MINIMAL.replace("kind = \"density\"\neps = 3e-4", "kind = \"fibers\"");
        assert!(invalid(&fibers).2.contains("[blowup]"));
        let slope = MINIMAL.replace("kind = \"density\"\neps = 3e-4", "kind = \"slope\"");
        assert!(invalid(&slope).2.contains("skew"));
        let tiling = MINIMAL.replace("kind = \"density\"\neps = 3e-4", "kind = \"tiling\"\nradius = 9");
        assert!(invalid(&tiling).2.contains("radius"));
    }

    #[test]
    fn named_reals() {
        assert_eq!(Real::Named(NamedReal::Golden).value(), golden());
        assert_eq!(Real::Named(NamedReal::Silver).value(), 2f64.sqrt() - 1.0);
        let text = MINIMAL.replace("kind = \"rotation\"", "kind = \"rotation\"\nalpha = \"silver\"");
        let exp = parse_experiment(&text).unwrap();
        assert_eq!(
            exp.config.system.get_ref(),
            &SystemConfig::Rotation {
                alpha: Real::Named(NamedReal::Silver)
            }
        );
        let rational = MINIMAL.replace("kind = \"rotation\"", "kind = \"denjoy\"\nalpha = 0.5");
        assert!(invalid(&rational).2.contains("rational"));
    }
}
