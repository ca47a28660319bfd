use minlab_core::blowup::{almost_one_to_one_report, BaseSystem, StageSpace};
use minlab_core::circle::{eps_density, gap_spectrum, CirclePoint, DenjoyPoint};
use minlab_core::dynamics::orbit;
use minlab_core::rigidity::{
    classify_product_structure, contrast_minima, enumerate_automorphisms, product_nonminimality_report,
    product_rotation_invariant, EnumerationFlags, TilingWindow,
};
use minlab_core::skew::{klein_distance, klein_project, KleinSystem, SkewSystem, TorusPoint};
use minlab_core::suspension::{
    certify_minimal_time, time_t_map, CantorPoint, CantorSystem, SuspensionPoint, SuspensionSystem,
};
use minlab_core::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cells;
use crate::config::{suspension_point, BuiltSystem, Experiment, ProbeConfig, Stage};
use crate::plot::{Plot, Style, Table};

/// What a probe produced. Artifacts are written by the runner according to
/// the configured formats.
pub struct ProbeOutput {
    pub passed: bool,
    pub message: String,
    pub metrics: Value,
    pub csv: Option<Table>,
    pub svg: Option<String>,
}

impl ProbeOutput {
    fn new(passed: bool, message: impl Into<String>, metrics: Value) -> Self {
        ProbeOutput {
            passed,
            message: message.into(),
            metrics,
            csv: None,
            svg: None,
        }
    }

    fn with_csv(mut self, t: Table) -> Self {
        self.csv = Some(t);
        self
    }

    fn with_svg(mut self, s: String) -> Self {
        self.svg = Some(s);
        self
    }
}

/// Powers of ten below `n`, then `n` itself.
fn checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(10usize), |c| c.checked_mul(10))
        .take_while(|&c| c < n)
        .collect();
    out.push(n);
    out
}

pub fn run_probe(exp: &Experiment, probe: &ProbeConfig, seed: u64) -> Result<ProbeOutput> {
    match probe {
        ProbeConfig::Orbit { steps, start } => orbit_probe(&exp.system, *steps, start.unwrap_or_default()),
        ProbeConfig::Density { n, eps, start } => density_probe(&exp.system, *n, *eps, *start),
        ProbeConfig::Fibers {} => match stage(exp) {
            Stage::Suspension(x) => fibers_probe(x),
            Stage::Skew(x) => fibers_probe(x),
        },
        ProbeConfig::Witness {} => match stage(exp) {
            Stage::Suspension(x) => witness_probe(x),
            Stage::Skew(x) => witness_probe(x),
        },
        ProbeConfig::Almost11 { samples, max_n } => match stage(exp) {
            Stage::Suspension(x) => almost11_probe(x, *samples, *max_n, seed),
            Stage::Skew(x) => almost11_probe(x, *samples, *max_n, seed),
        },
        ProbeConfig::Slope {
            point,
            betas,
            radii,
            tol,
        } => slope_probe(skew(&exp.system), *point, betas, radii, *tol),
        ProbeConfig::Equivariance { samples, tol } => equivariance_probe(skew(&exp.system), *samples, *tol, seed),
        ProbeConfig::Tiling {
            radius,
            allow_swap,
            monotone,
        } => tiling_probe(
            *radius,
            EnumerationFlags {
                allow_swap: *allow_swap,
                monotone: *monotone,
            },
        ),
        ProbeConfig::Product {
            k1,
            k2,
            alpha,
            start,
            target,
            steps,
            contrast_beta,
            drift_tol,
        } => product_probe(
            (*k1, *k2),
            alpha.value(),
            TorusPoint::new(start[0], start[1]),
            TorusPoint::new(target[0], target[1]),
            *steps,
            contrast_beta.map(|b| b.value()),
            *drift_tol,
        ),
    }
}

fn stage(exp: &Experiment) -> &Stage {
    exp.stage.as_ref().expect("validated: probe requires a blow-up stage")
}

fn skew(system: &BuiltSystem) -> &SkewSystem {
    match system {
        BuiltSystem::Skew(f) => f,
        BuiltSystem::Klein(g) => g.skew(),
        _ => unreachable!("validated: probe requires a skew or klein system"),
    }
}

/// A plotting coordinate for the base of a suspension point.
fn base_coordinate(sys: &SuspensionSystem, p: &SuspensionPoint) -> f64 {
    match (sys.base(), &p.base) {
        (CantorSystem::Odometer(o), CantorPoint::Word(w)) => o.embed(*w),
        (CantorSystem::Denjoy(h), CantorPoint::Denjoy(d)) => h.embed(d).angle(),
        _ => f64::NAN,
    }
}

fn scatter(title: &str, x: &str, y: &str, pts: Vec<(f64, f64)>) -> String {
    Plot {
        title,
        x_label: x,
        y_label: y,
        log_x: false,
        log_y: false,
        style: Style::Scatter,
    }
    .render(&[(title, pts)])
}

fn orbit_probe(system: &BuiltSystem, steps: usize, [x, y]: [f64; 2]) -> Result<ProbeOutput> {
    let mut table;
    let pts: Vec<(f64, f64)>;
    let (xl, yl);
    match system {
        BuiltSystem::Rotation(r) => {
            table = Table::new(&["n", "x"]);
            let o = orbit(r, CirclePoint::new(x), steps)?;
            for (n, p) in o.iter().enumerate() {
                table.row(cells![n, p.angle()]);
            }
            pts = o.iter().enumerate().map(|(n, p)| (n as f64, p.angle())).collect();
            (xl, yl) = ("n", "x");
        }
        BuiltSystem::Denjoy(h) => {
            table = Table::new(&["n", "embedded", "projected"]);
            let o = orbit(h, DenjoyPoint::cantor(x), steps)?;
            for (n, p) in o.iter().enumerate() {
                table.row(cells![n, h.embed(p).angle(), h.semiconjugacy(p).angle()]);
            }
            pts = o
                .iter()
                .enumerate()
                .map(|(n, p)| (n as f64, h.embed(p).angle()))
                .collect();
            (xl, yl) = ("n", "embedded angle");
        }
        BuiltSystem::Suspension { system, time } => {
            table = Table::new(&["n", "base", "s"]);
            let map = time_t_map(system, *time)?;
            let o = orbit(&map, suspension_point(system, [x, y])?, steps)?;
            let mut v = Vec::with_capacity(o.len());
            for (n, p) in o.iter().enumerate() {
                let b = base_coordinate(system, p);
                table.row(cells![n, b, p.s]);
                v.push((b, p.s));
            }
            pts = v;
            (xl, yl) = ("base", "height s");
        }
        BuiltSystem::Skew(f) => {
            table = Table::new(&["n", "x", "y"]);
            let o = orbit(f, TorusPoint::new(x, y), steps)?;
            for (n, p) in o.iter().enumerate() {
                table.row(cells![n, p.x, p.y]);
            }
            pts = o.iter().map(|p| (p.x, p.y)).collect();
            (xl, yl) = ("x", "y");
        }
        BuiltSystem::Klein(g) => {
            table = Table::new(&["n", "x", "y"]);
            let o = orbit(g, klein_project(TorusPoint::new(x, y)), steps)?;
            let reps: Vec<TorusPoint> = o.iter().map(|q| q.representative()).collect();
            for (n, p) in reps.iter().enumerate() {
                table.row(cells![n, p.x, p.y]);
            }
            pts = reps.iter().map(|p| (p.x, p.y)).collect();
            (xl, yl) = ("x", "y");
        }
    }
    let svg = scatter("orbit", xl, yl, pts);
    Ok(
        ProbeOutput::new(true, format!("{} orbit points", table.len()), json!({ "steps": steps }))
            .with_csv(table)
            .with_svg(svg),
    )
}

fn density_probe(system: &BuiltSystem, n: usize, eps: f64, start: Option<[f64; 2]>) -> Result<ProbeOutput> {
    let circle: Vec<CirclePoint> = match system {
        BuiltSystem::Rotation(r) => orbit(r, CirclePoint::new(start.unwrap_or_default()[0]), n)?,
        BuiltSystem::Denjoy(h) => {
            let x0 = start.map_or(0.3, |s| s[0]);
            orbit(h, DenjoyPoint::cantor(x0), n)?
                .iter()
                .map(|p| h.semiconjugacy(p))
                .collect()
        }
        BuiltSystem::Suspension { system, time } => {
            let default = match system.base() {
                CantorSystem::Odometer(_) => [0.0, 0.0],
                CantorSystem::Denjoy(_) => [0.3, 0.0],
            };
            let p = suspension_point(system, start.unwrap_or(default))?;
            let r = certify_minimal_time(system, *time, eps, n, &p)?;
            let mut table = Table::new(&["t", "eps", "N", "coveringRadius", "cellsMissed"]);
            table.row(cells![r.t, r.eps, r.n, r.covering_radius, r.cells_missed]);
            let passed = r.cells_missed == 0;
            let message = format!("{} cells missed, covering radius {}", r.cells_missed, r.covering_radius);
            return Ok(
                ProbeOutput::new(passed, message, serde_json::to_value(&r).expect("report serializes")).with_csv(table),
            );
        }
        _ => unreachable!("validated: density requires a circle or suspension system"),
    };
    let mut table = Table::new(&["n", "coveringRadius"]);
    let mut series = Vec::new();
    for c in checkpoints(n) {
        let d = eps_density(&circle[..c])?;
        table.row(cells![c, d]);
        series.push((c as f64, d));
    }
    let last = series.last().expect("at least one checkpoint").1;
    let gaps = gap_spectrum(&circle, 1e-9)?;
    let svg = Plot {
        title: "largest gap of the orbit",
        x_label: "n",
        y_label: "covering radius",
        log_x: true,
        log_y: true,
        style: Style::Line,
    }
    .render(&[("largest gap", series)]);
    let metrics = json!({ "n": n, "eps": eps, "coveringRadius": last, "gapLengths": gaps });
    Ok(ProbeOutput::new(
        last < eps,
        format!("covering radius {last} at n = {n} (eps {eps})"),
        metrics,
    )
    .with_csv(table)
    .with_svg(svg))
}

fn fibers_probe<B: BaseSystem>(x: &StageSpace<B>) -> Result<ProbeOutput> {
    let mut table = Table::new(&["index", "diameter", "formula"]);
    let mut worst: f64 = 0.0;
    let mut pts = Vec::new();
    for i in x.indices().indices() {
        let d = x.fiber_diameter(i)?;
        let f = x.fiber_diameter_formula(i);
        worst = worst.max((d - f).abs());
        table.row(cells![i, d, f]);
        pts.push((i as f64, d));
    }
    let svg = Plot {
        title: "fiber diameters",
        x_label: "fiber index",
        y_label: "diameter",
        log_x: false,
        log_y: true,
        style: Style::Scatter,
    }
    .render(&[("diameter", pts)]);
    let passed = worst <= 1e-12;
    let metrics = json!({ "fibers": table.len(), "maxDeviation": worst });
    Ok(
        ProbeOutput::new(passed, format!("largest deviation from 2 w_i: {worst:e}"), metrics)
            .with_csv(table)
            .with_svg(svg),
    )
}

fn witness_probe<B: BaseSystem>(x: &StageSpace<B>) -> Result<ProbeOutput>
where
    B::Point: serde::Serialize,
{
    let w = x.noninvertibility_witness()?;
    let passed = w.images_equal && w.image_distance == 0.0 && w.separation > 0.0;
    let message = format!("separation {}, image distance {}", w.separation, w.image_distance);
    Ok(ProbeOutput::new(
        passed,
        message,
        serde_json::to_value(&w).expect("witness serializes"),
    ))
}

fn almost11_probe<B: BaseSystem>(x: &StageSpace<B>, samples: usize, max_n: u32, seed: u64) -> Result<ProbeOutput> {
    let thresholds: Vec<u32> = (1..=max_n).collect();
    let r = almost_one_to_one_report(x, samples, &thresholds, seed)?;
    let mut table = Table::new(&["n", "measured", "expected"]);
    for t in &r.thresholds {
        table.row(cells![t.n, t.measured, t.expected]);
    }
    let passed = r.thresholds_match();
    let message = format!(
        "singleton fraction {}, thresholds {}",
        r.singleton_fraction,
        if passed { "match" } else { "differ" }
    );
    Ok(ProbeOutput::new(passed, message, serde_json::to_value(&r).expect("report serializes")).with_csv(table))
}

fn slope_probe(f: &SkewSystem, [x, y]: [f64; 2], betas: &[f64], radii: &[f64], tol: f64) -> Result<ProbeOutput> {
    let p = TorusPoint::new(x, y);
    let mut table = Table::new(&["beta", "radius", "slope", "target", "error"]);
    let mut series = Vec::new();
    let mut passed = true;
    let mut worst_final: f64 = 0.0;
    for &beta in betas {
        let target = beta + f.roof().derivative(p.x);
        let errors: Vec<(f64, f64)> = radii
            .iter()
            .map(|&r| {
                let s = f.radial_secant_slope(p, beta, r);
                table.row(cells![beta, r, s, target, (s - target).abs()]);
                (r, (s - target).abs())
            })
            .collect();
        let last = errors.last().expect("radii nonempty").1;
        passed &= errors.windows(2).all(|w| w[1].1 < w[0].1) && last < tol;
        worst_final = worst_final.max(last);
        series.push((format!("beta = {beta}"), errors));
    }
    let named: Vec<(&str, Vec<(f64, f64)>)> = series.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
    let svg = Plot {
        title: "secant slope error",
        x_label: "radius",
        y_label: "error",
        log_x: true,
        log_y: true,
        style: Style::Line,
    }
    .render(&named);
    let metrics = json!({ "point": [x, y], "tol": tol, "worstFinalError": worst_final });
    Ok(ProbeOutput::new(
        passed,
        format!("worst error at the smallest radius {worst_final:e}"),
        metrics,
    )
    .with_csv(table)
    .with_svg(svg))
}

fn equivariance_probe(f: &SkewSystem, samples: usize, tol: f64, seed: u64) -> Result<ProbeOutput> {
    let g = KleinSystem::new(f.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = TorusPoint::random(&mut rng);
        worst = worst.max(klein_distance(klein_project(f.apply(p)), g.induced(klein_project(p))));
    }
    let metrics = json!({ "samples": samples, "tol": tol, "maxError": worst });
    Ok(ProbeOutput::new(
        worst < tol,
        format!("max error {worst:e} over {samples} points"),
        metrics,
    ))
}

fn tiling_probe(radius: i64, flags: EnumerationFlags) -> Result<ProbeOutput> {
    let w = TilingWindow::new(radius)?;
    let maps = enumerate_automorphisms(&w, flags)?;
    let verdict = classify_product_structure(&maps, flags)?;
    let mut table = Table::new(&["form", "a", "b"]);
    for m in &maps {
        if let Some((a, b)) = m.as_translation() {
            table.row(cells!["translation", a, b]);
        } else if let Some((a, b)) = m.as_swap_translation() {
            table.row(cells!["swap", a, b]);
        } else {
            table.row(cells!["other", "", ""]);
        }
    }
    let passed = verdict.all_decomposable() && verdict.swap_squares_translate;
    let metrics = serde_json::to_value(&verdict).expect("verdict serializes");
    let message = format!(
        "{} maps, decomposable: {}",
        verdict.automorphism_count, verdict.decomposable
    );
    Ok(ProbeOutput::new(passed, message, metrics).with_csv(table))
}

fn product_probe(
    (k1, k2): (i64, i64),
    alpha: f64,
    start: TorusPoint,
    target: TorusPoint,
    steps: usize,
    contrast_beta: Option<f64>,
    drift_tol: f64,
) -> Result<ProbeOutput> {
    let inv = product_rotation_invariant(k1, k2, alpha, start, steps)?;
    let marks = checkpoints(steps);
    let margin = product_nonminimality_report(k1, k2, alpha, start, target, steps, &marks)?;
    let contrast = contrast_beta.map(|beta| contrast_minima(alpha, beta, start, target, &marks));
    let mut table = Table::new(&["n", "orbitMinimum", "bound", "contrastMinimum"]);
    for (k, &(n, m)) in margin.checkpoints.iter().enumerate() {
        let c = contrast.as_ref().map_or(String::new(), |c| c[k].1.to_string());
        table.row(cells![n, m, margin.bound, c]);
    }
    let mut passed = inv.max_drift < drift_tol && margin.respects_bound(1e-12);
    if let Some(c) = &contrast {
        passed &= c.last().is_some_and(|&(_, m)| m < margin.bound);
    }
    let mut series = vec![(
        "product orbit",
        margin.checkpoints.iter().map(|&(n, m)| (n as f64, m)).collect(),
    )];
    if let Some(c) = &contrast {
        series.push(("independent rotations", c.iter().map(|&(n, m)| (n as f64, m)).collect()));
    }
    let svg = Plot {
        title: "closest approach to the target",
        x_label: "N",
        y_label: "minimum distance",
        log_x: true,
        log_y: true,
        style: Style::Line,
    }
    .render(&series);
    let metrics = json!({
        "invariant": inv,
        "margin": margin,
        "contrast": contrast,
    });
    let message = format!(
        "drift {:e}, minimum {} against bound {}",
        inv.max_drift, margin.min_distance, margin.bound
    );
    Ok(ProbeOutput::new(passed, message, metrics).with_csv(table).with_svg(svg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_experiment;

    fn run(text: &str) -> Vec<ProbeOutput> {
        let exp = parse_experiment(text).unwrap();
        exp.config
            .probes
            .iter()
            .map(|p| run_probe(&exp, p.get_ref(), exp.config.output.seed).unwrap())
            .collect()
    }

    #[test]
    fn checkpoint_ladder() {
        assert_eq!(checkpoints(10_000), vec![10, 100, 1000, 10_000]);
        assert_eq!(checkpoints(5), vec![5]);
        assert_eq!(checkpoints(250), vec![10, 100, 250]);
    }

    #[test]
    fn golden_density_passes() {
        let out = run("[system]\nkind = \"rotation\"\n[[probe]]\nkind = \"density\"\neps = 3e-4\n[output]\nseed = 1\n");
        assert!(out[0].passed, "{}", out[0].message);
        let csv = out[0].csv.as_ref().unwrap().to_csv();
        assert!(csv.starts_with("n,coveringRadius\n10,"));
        assert!(csv.ends_with("10000,0.0001730702715718735\n"), "{csv}");
    }

    #[test]
    fn backward_only_suspension_fibers() {
        let out = run(concat!(
            "[system]\nkind = \"odometer-suspension\"\n",
            "[blowup]\nmode = \"backward-only\"\nn = 8\n",
            "[[probe]]\nkind = \"fibers\"\n[[probe]]\nkind = \"witness\"\n",
            "[[probe]]\nkind = \"almost11\"\nsamples = 500\n",
            "[output]\nseed = 3\n"
        ));
        assert!(out.iter().all(|o| o.passed));
        let csv = out[0].csv.as_ref().unwrap().to_csv();
        assert_eq!(csv.lines().nth(1), Some("-8,0.0078125,0.0078125"));
        assert_eq!(csv.lines().last(), Some("-1,1,1"));
        assert_eq!(out[1].metrics["separation"], 0.5);
        assert_eq!(out[1].metrics["imageDistance"], 0.0);
    }

    #[test]
    fn tiling_verdicts() {
        let out = run("[system]\nkind = \"rotation\"\n[[probe]]\nkind = \"tiling\"\n[[probe]]\nkind = \"tiling\"\nallowSwap = true\n[output]\nseed = 1\n");
        assert_eq!(out[0].metrics["group"], "Z");
        assert_eq!(out[1].metrics["group"], "Z_x_Z2");
        assert!(out.iter().all(|o| o.passed));
    }

    #[test]
    fn skew_probes() {
        let out = run(concat!(
            "[system]\nkind = \"klein\"\nharmonics = [[1, 0.05], [3, 0.01]]\n",
            "[[probe]]\nkind = \"slope\"\n[[probe]]\nkind = \"equivariance\"\nsamples = 2000\n",
            "[[probe]]\nkind = \"orbit\"\nsteps = 50\n",
            "[output]\nseed = 1\n"
        ));
        assert!(
            out.iter().all(|o| o.passed),
            "{:?}",
            out.iter().map(|o| &o.message).collect::<Vec<_>>()
        );
        assert_eq!(out[2].csv.as_ref().unwrap().len(), 50);
    }

    #[test]
    fn product_with_contrast() {
        let out = run(concat!(
            "[system]\nkind = \"rotation\"\n",
            "[[probe]]\nkind = \"product\"\nsteps = 100000\ncontrastBeta = \"silver\"\n",
            "[output]\nseed = 1\n"
        ));
        assert!(out[0].passed, "{}", out[0].message);
        assert_eq!(out[0].csv.as_ref().unwrap().len(), 5);
    }

    #[test]
    fn failing_assertion_is_reported_not_raised() {
        let out = run(
            "[system]\nkind = \"rotation\"\n[[probe]]\nkind = \"density\"\nn = 100\neps = 1e-4\n[output]\nseed = 1\n",
        );
        assert!(!out[0].passed);
    }
}
