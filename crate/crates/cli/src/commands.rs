use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use subtile::cocycle::{default_window, lyapunov_field};
use subtile::deformation::{sample_frequencies, DEFAULT_MIN_MINOR};
use subtile::geometry::{classify_embedded, collared_prototiles_auto, realize_supertile, svg_string};
use subtile::spectral::{twisted_box_bruteforce, ConstantPsi, ParallelogramIndicators, WeightedIndicators};
use subtile::substitution::DEFAULT_MAX_LEVEL;
use subtile::{
    box_decomposition, classify_cubic, dim_lower_bound, dim_lower_bound_zero, eigenvalue_test, kenyon_system,
    lift, lyapunov as lyapunov_at, pf_data, rho_default, sample_deformations, twisted_box_integral, twisted_supertile_bruteforce,
    twisted_supertile_integral, Coloring, CubicParams, EigenVerdict, KenyonLayout, ShapeMatrix, SpectralError,
    SubstitutionError, SubstitutionSystem, TestFunction, TorusPoint,
};

use crate::error::{lib, CliError};
use crate::manifest::{RunManifest, SCHEMA_VERSION};
use crate::model::{ModelSpec, CATALOG};
use crate::{ColoringArg, Layout, LyapunovArgs, ModelArgs, PsiArg, RenderArgs, TwistedArgs, VeechArgs};

/// Deepest supertile level any command expands, from `TILINGS_MAX_LEVEL`.
fn level_cap() -> Result<usize, CliError> {
    match std::env::var("TILINGS_MAX_LEVEL") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("TILINGS_MAX_LEVEL={v:?} is not a level"))),
        Err(_) => Ok(DEFAULT_MAX_LEVEL),
    }
}

fn check_level(level: usize) -> Result<(), CliError> {
    let max = level_cap()?;
    if level > max {
        return Err(lib(SubstitutionError::LevelCap { level, max }));
    }
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Prints to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn layout(l: Layout) -> KenyonLayout {
    match l {
        Layout::Printed => KenyonLayout::Printed,
        Layout::Geometric => KenyonLayout::Geometric,
    }
}

fn load(args: &ModelArgs) -> Result<(ModelSpec, SubstitutionSystem), CliError> {
    let spec = ModelSpec::parse(&args.model)?;
    let sys = spec.load(layout(args.layout))?;
    Ok((spec, sys))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => emit(text)?,
    }
    Ok(())
}

pub fn classify(p: u32, q: u32, r: u32, as_json: bool) -> Result<(), CliError> {
    let params = CubicParams::new(p, q, r).map_err(lib)?;
    let class = classify_cubic(params).map_err(lib)?;
    let system = kenyon_system(params).ok().map(|k| k.system);
    let pf = system
        .as_ref()
        .map(|s| pf_data(&s.substitution_matrix()))
        .transpose()
        .map_err(lib)?;
    let verdict = match class.weak_mixing() {
        Some(true) => "YES",
        Some(false) => "NO",
        None => "n/a",
    };
    if as_json {
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "params": params,
            "class": class,
            "weak_mixing": class.weak_mixing(),
            "pf": pf,
        });
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
        return emit(&(text + "\n"));
    }
    let mut text = format!("{params}: {}", class.tag);
    if let Some(lam) = class.lambda {
        let _ = write!(
            text,
            "\nlambda = {} + {}i, |lambda| = {}\nreal root = {}",
            num(lam.re),
            num(lam.im),
            num(lam.norm()),
            num(class.real_root)
        );
    }
    if let Some(pf) = pf {
        let _ = write!(
            text,
            "\nPF eigenvalue = {}, second modulus = {}\nfrequencies = [{}]",
            num(pf.pf_value),
            num(pf.second_modulus),
            pf.right.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
        );
    }
    emit(&format!("{text}\n{}; weak mixing: {verdict}\n", class.tag))
}

pub fn models_list() -> Result<(), CliError> {
    let text: String = CATALOG
        .iter()
        .map(|(name, description)| format!("{name:<14} {description}\n"))
        .collect();
    emit(&text)
}

pub fn lyapunov(args: LyapunovArgs) -> Result<(), CliError> {
    let (spec, sys) = load(&args.model)?;
    let window = args.window.unwrap_or_else(|| default_window(args.n));
    let z_fixed = args.z.clone().unwrap_or_else(|| vec![0.0; sys.s]);
    if z_fixed.len() != sys.s {
        return Err(CliError::Usage(format!("--z needs {} coordinates", sys.s)));
    }
    let (header, points, lams): (String, Vec<TorusPoint>, Option<Vec<f64>>) = match (&args.lam, args.grid) {
        (Some(lam), _) => {
            if lam.len() != sys.d {
                return Err(CliError::Usage(format!("--lam needs {} coordinates", sys.d)));
            }
            (String::from("point_id,lam_x,lam_y"), vec![lift(&sys.default_shape, lam)], Some(lam.clone()))
        }
        (None, Some(k)) => {
            if k == 0 || sys.s < 2 {
                return Err(CliError::Usage("--grid needs K >= 1 and s >= 2".into()));
            }
            let points = (0..k * k)
                .map(|idx| {
                    let mut z = z_fixed.clone();
                    z[0] = (idx / k) as f64 / k as f64;
                    z[1] = (idx % k) as f64 / k as f64;
                    TorusPoint::new(z)
                })
                .collect();
            (String::from("point_id"), points, None)
        }
        (None, None) => (String::from("point_id"), vec![TorusPoint::new(z_fixed.clone())], None),
    };
    let chis = lyapunov_field(&sys, &points, args.n, window).map_err(lib)?;
    let mut csv = header;
    for i in 1..=sys.s {
        let _ = write!(csv, ",z{i}");
    }
    csv.push_str(",chi_plus\n");
    for (i, (z, chi)) in points.iter().zip(&chis).enumerate() {
        let _ = write!(csv, "{i}");
        if let Some(lam) = &lams {
            let _ = write!(csv, ",{},{}", num(lam[0]), num(lam[1]));
        }
        for c in z.coords() {
            let _ = write!(csv, ",{}", num(*c));
        }
        let _ = writeln!(csv, ",{}", num(*chi));
    }
    write_output(args.out.as_deref(), &csv)?;
    if let Some(out) = &args.out {
        RunManifest::new(Some(spec), None)
            .with("n", args.n)
            .with("window", window)
            .with("grid", args.grid)
            .with("z", &args.z)
            .with("lam", &args.lam)
            .with("norm", "pf-weighted")
            .write_beside(out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanRow {
    sample_id: usize,
    lam: Vec<f64>,
    verdict: &'static str,
    escape_fraction: f64,
    min_tail_epsilon: f64,
}

pub fn veech_scan(args: VeechArgs) -> Result<(), CliError> {
    let (spec, sys) = load(&args.model)?;
    if sys.d != 2 {
        return Err(CliError::Usage("veech-scan writes planar frequencies; d must be 2".into()));
    }
    let rho = args.rho.unwrap_or_else(|| rho_default(&sys));
    if !(rho > 0.0 && rho < 0.5) {
        return Err(lib(subtile::DeformationError::BadRho(rho)));
    }
    if args.n < 3 {
        return Err(CliError::Usage("--n must be at least 3".into()));
    }
    let shapes = sample_deformations(&sys.default_shape, args.radius, args.samples, args.seed, DEFAULT_MIN_MINOR)
        .map_err(lib)?;
    let rows: Vec<Vec<ScanRow>> = shapes
        .par_iter()
        .enumerate()
        .map(|(i, shape)| {
            let lams = match &args.lam {
                Some(lam) => vec![lam.clone()],
                None => {
                    // frequencies use their own stream family, disjoint from the shapes
                    let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ 0x5eed_f00d);
                    rng.set_stream(i as u64);
                    sample_frequencies(sys.d, args.lams, args.lam_min, args.lam_max, &mut rng)
                }
            };
            lams.into_iter()
                .map(|lam| {
                    let test = eigenvalue_test(&sys, shape, &lam, args.n, args.tol).map_err(lib)?;
                    Ok(ScanRow {
                        sample_id: i,
                        verdict: match test.verdict {
                            EigenVerdict::CandidateEigenvalue => "CandidateEigenvalue",
                            EigenVerdict::Rejected { .. } => "Rejected",
                        },
                        escape_fraction: 1.0 - test.sequence.fraction_below(rho),
                        min_tail_epsilon: test.min_tail_epsilon,
                        lam,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("sample_id,lam_x,lam_y,verdict,escape_fraction,min_tail_epsilon\n");
    let mut candidates = 0;
    for row in rows.iter().flatten() {
        if row.verdict == "CandidateEigenvalue" {
            candidates += 1;
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.sample_id,
            num(row.lam[0]),
            num(row.lam[1]),
            row.verdict,
            num(row.escape_fraction),
            num(row.min_tail_epsilon)
        );
    }
    std::fs::write(&args.out, csv)?;
    RunManifest::new(Some(spec), Some(args.seed))
        .with("samples", args.samples)
        .with("lams", args.lams)
        .with("lam", &args.lam)
        .with("lam_min", args.lam_min)
        .with("lam_max", args.lam_max)
        .with("radius", args.radius)
        .with("n", args.n)
        .with("rho", rho)
        .with("tol", args.tol)
        .with("min_minor", DEFAULT_MIN_MINOR)
        .write_beside(&args.out)?;
    let total: usize = rows.iter().map(Vec::len).sum();
    eprintln!("{candidates} of {total} rows are candidate eigenvalues");
    Ok(())
}

pub fn render(args: RenderArgs) -> Result<(), CliError> {
    let spec = ModelSpec::parse(&args.model)?;
    // only the shifted digits tile, so geometry always uses them
    let sys = spec.load(KenyonLayout::Geometric)?;
    check_level(args.level)?;
    let shape = sys.default_shape.clone();
    let collar = args.collar || matches!(args.coloring, ColoringArg::Class);
    let mut manifest = RunManifest::new(Some(spec), None)
        .with("level", args.level)
        .with("root", args.root)
        .with("collar", collar)
        .with("depth", args.depth);
    let (realized, coloring) = if collar {
        let max_level = level_cap()?.min(16);
        let atlas = collared_prototiles_auto(&sys, &shape, args.depth, max_level).map_err(lib)?;
        emit(&format!(
            "collared prototiles: {} ({}-corona, saturated at level {})\n",
            atlas.count, atlas.corona_depth, atlas.level
        ))?;
        manifest = manifest.with("collared_count", atlas.count).with("collar_level", atlas.level);
        let (realized, classes) =
            classify_embedded(&sys, &shape, &atlas, args.root, args.level, 4).map_err(lib)?;
        let coloring = match args.coloring {
            ColoringArg::Class => Coloring::ByClass(classes),
            ColoringArg::Type => Coloring::ByType,
        };
        (realized, coloring)
    } else {
        let (realized, _) = realize_supertile(&sys, &shape, args.root, args.level).map_err(lib)?;
        (realized, Coloring::ByType)
    };
    std::fs::write(&args.out, svg_string(&realized, &coloring))?;
    emit(&format!("tiles: {}\n", realized.len()))?;
    manifest.with("tiles", realized.len()).write_beside(&args.out)?;
    Ok(())
}

fn test_function(psi: PsiArg, sys: &SubstitutionSystem, shape: &ShapeMatrix) -> Result<Box<dyn TestFunction>, CliError> {
    Ok(match psi {
        PsiArg::Indicators => Box::new(ParallelogramIndicators::new(sys, shape).map_err(lib)?),
        PsiArg::MeanZero => Box::new(WeightedIndicators::mean_zero(sys, shape).map_err(lib)?),
        PsiArg::Ones => Box::new(ConstantPsi(vec![Complex64::new(1.0, 0.0); sys.m])),
    })
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

pub fn twisted(args: TwistedArgs) -> Result<(), CliError> {
    let (spec, sys) = load(&args.model)?;
    if args.lam.len() != sys.d {
        return Err(CliError::Usage(format!("--lam needs {} coordinates", sys.d)));
    }
    if args.j >= sys.m {
        return Err(lib(SubstitutionError::BadPrototile(args.j)));
    }
    check_level(args.n)?;
    let shape = sample_deformations(&sys.default_shape, args.radius, 1, args.seed, DEFAULT_MIN_MINOR)
        .map_err(lib)?
        .remove(0);
    let psi = test_function(args.psi, &sys, &shape)?;
    let (fast, brute, mode) = match args.box_half_width {
        None => {
            let fast = twisted_supertile_integral(&sys, &shape, &args.lam, args.j, args.n, psi.as_ref());
            let brute = match twisted_supertile_bruteforce(&sys, &shape, &args.lam, args.j, args.n, psi.as_ref()) {
                Ok(v) => Some(v),
                Err(SpectralError::TooDeep { .. })
                | Err(SpectralError::Substitution(SubstitutionError::TooManyTiles { .. })) => None,
                Err(e) => return Err(lib(e)),
            };
            (fast, brute, json!({"supertile": {"j": args.j, "n": args.n}}))
        }
        Some(half_width) => {
            let (realized, hierarchy) = realize_supertile(&sys, &shape, args.j, args.n).map_err(lib)?;
            let dec = box_decomposition(&realized, &hierarchy, realized.centroid(), half_width).map_err(lib)?;
            let fast = twisted_box_integral(&sys, &realized, &hierarchy, &dec, &args.lam, psi.as_ref());
            let brute = twisted_box_bruteforce(&sys, &realized, &dec.bbox, &args.lam, psi.as_ref());
            let mode = json!({"box": {
                "half_width": half_width,
                "inside": {"j": args.j, "n": args.n},
                "per_level": dec.per_level(),
                "leftover_tiles": dec.leftover.len(),
                "bound_constant": dec.bound_constant(sys.d, sys.theta),
            }});
            (fast, Some(brute), mode)
        }
    };
    let relative_error = brute.map(|b| (fast - b).norm() / (1.0 + b.norm()));
    let z = lift(&shape, &args.lam);
    let chi = lyapunov_at(&sys, &z, args.lyapunov_n, default_window(args.lyapunov_n))
        .map_err(lib)?
        .chi_plus;
    let at_zero = args.lam.iter().all(|&x| x == 0.0);
    let bound_zero = if at_zero {
        Some(dim_lower_bound_zero(&sys.substitution_matrix(), sys.d, sys.theta).map_err(lib)?)
    } else {
        None
    };
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "model": spec,
        "system": sys.name,
        "lam": args.lam,
        "psi": psi.description(),
        "domain": mode,
        "fast": pair(fast),
        "brute": brute.map(pair),
        "relative_error": relative_error,
        "chi_plus": chi,
        "lyapunov_n": args.lyapunov_n,
        "dim_lower_bound": dim_lower_bound(chi, sys.d, sys.theta),
        "dim_lower_bound_zero": bound_zero,
        "radius": args.radius,
        "seed": args.seed,
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))? + "\n";
    write_output(args.out.as_deref(), &text)?;
    if let Some(out) = &args.out {
        RunManifest::new(Some(spec), Some(args.seed))
            .with("lam", &args.lam)
            .with("j", args.j)
            .with("n", args.n)
            .with("box_half_width", args.box_half_width)
            .with("radius", args.radius)
            .with("lyapunov_n", args.lyapunov_n)
            .write_beside(out)?;
    }
    Ok(())
}

pub fn export_model(model: ModelArgs, out: Option<PathBuf>) -> Result<(), CliError> {
    let (_, sys) = load(&model)?;
    let text = sys.to_json().map_err(|e| CliError::Usage(e.to_string()))? + "\n";
    write_output(out.as_deref(), &text)
}

pub fn import_model(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)?;
    let sys = SubstitutionSystem::from_json(&text).map_err(lib)?;
    let pf = pf_data(&sys.substitution_matrix()).map_err(lib)?;
    let mut text = format!("name: {}\n", sys.name);
    let _ = writeln!(text, "prototiles m = {}, address rank s = {}, dimension d = {}", sys.m, sys.s, sys.d);
    let _ = writeln!(text, "expansion theta = {}", num(sys.theta));
    let _ = writeln!(text, "substitution matrix: {:?}", sys.substitution_matrix().to_rows());
    let _ = writeln!(text, "PF eigenvalue = {}, second modulus = {}", num(pf.pf_value), num(pf.second_modulus));
    let geometry = if sys.prototile_edges.is_some() { "parallelograms" } else { "none" };
    let _ = writeln!(text, "geometry: {geometry}");
    emit(&text)
}
