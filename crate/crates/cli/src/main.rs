//! nodal-lab: spherical harmonics and their nodal sets from the command line.
//!
//! Results go to stdout (or `--out`) as JSON and are byte-identical across
//! reruns with the same arguments and seeds; a run manifest (including wall
//! time) goes to stderr so it never perturbs the reproducible payload.

mod json;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use nodal_core::mean_measure::{
    mc_mean_common_zeros, mc_mean_nodal_length_with_circles, mean_measure_closed, MeanSpec,
};
use nodal_core::nodal_geometry::{
    common_zeros, critical_points, crofton_length, inner_radius, nodal_length, trace_nodal,
};
use nodal_core::nullcone::{poles_with_seed, reconstruct};
use nodal_core::prescribed_zeros::{harmonic_vanishing_at, interpolate_with_tol};
use nodal_core::{legendre, SphereMesh};

use json::{
    point_from_array, point_to_array, ComplexHarmonicJson, ConstructInput, HarmonicJson,
    InterpolateInput, PairInput, PolesJson,
};

#[derive(Parser)]
#[command(
    name = "nodal-lab",
    version,
    about = "Spherical harmonics on S^2: prescribed zeros, poles, nodal geometry, mean intersections"
)]
struct Cli {
    /// Write the result JSON to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum McKind {
    Length,
    Zeros,
}

#[derive(Subcommand)]
enum Command {
    /// Legendre roots and the theta_n bound for one degree.
    Roots {
        #[arg(long)]
        degree: usize,
    },
    /// Build a harmonic vanishing at prescribed points.
    Construct {
        /// JSON file: {"degree", "points": [[x,y,z],..], "y": [x,y,z]}
        #[arg(long)]
        input: PathBuf,
    },
    /// Minimal-norm kernel interpolation of point values.
    Interpolate {
        /// JSON file: {"degree", "points": [[x,y,z],..], "values": [..]}
        #[arg(long)]
        input: PathBuf,
        /// Relative singular-value cutoff for independence.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Pole lines of a complex harmonic on the null cone.
    Poles {
        /// JSON file: {"re": harmonic, "im": harmonic}
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rebuild a harmonic (up to scale) from 2n distinct pole lines.
    Reconstruct {
        /// JSON file: {"degree", "roots": [[re1,im1,re2,im2],..]}
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Trace the nodal curves of a harmonic.
    Trace {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        mesh_level: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Nodal length by mesh polylines and by Crofton sampling.
    Length {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        mesh_level: u32,
        #[arg(long, default_value_t = 1000)]
        circles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Inner radius of the nodal complement.
    Inr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        mesh_level: u32,
    },
    /// Common zeros of a pair of harmonics.
    CommonZeros {
        /// JSON file: {"u": harmonic, "v": harmonic}
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        mesh_level: u32,
    },
    /// Critical points of a non-zonal harmonic.
    Critical {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        mesh_level: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run an invariant suite: kernel, nullcone, geometry, mean, or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mean intersection measures: closed forms and Monte Carlo checks.
    ///
    /// `mean --closed m k n1 .. nk` evaluates the closed form on S^m;
    /// `mean --mc length n` / `mean --mc zeros n1 n2` verify on S^2.
    Mean {
        #[arg(long)]
        closed: bool,
        #[arg(long, value_enum)]
        mc: Option<McKind>,
        /// For --closed: m k n1..nk. For --mc length: n. For --mc zeros: n1 n2.
        args: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 200)]
        circles: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct Manifest {
    command: Vec<String>,
    version: &'static str,
    wall_time_ms: u128,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("NODAL_LAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let started = Instant::now();
    let result = run(&cli.command);
    let manifest = Manifest {
        command: argv,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_ms: started.elapsed().as_millis(),
    };
    let _ = writeln!(
        std::io::stderr(),
        "{}",
        serde_json::to_string(&manifest).expect("manifest")
    );
    match result {
        Ok(payload) => {
            if emit(&cli.out, &payload).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(message) => {
            let err = json!({"error": {"message": message}});
            println!("{}", serde_json::to_string_pretty(&err).expect("error json"));
            ExitCode::from(1)
        }
    }
}

fn emit(out: &Option<PathBuf>, payload: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload),
        None => {
            print!("{payload}");
            std::io::stdout().flush()
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialize result");
    s.push('\n');
    s
}

fn run(cmd: &Command) -> Result<String, String> {
    match cmd {
        Command::Roots { degree } => {
            if *degree == 0 {
                return Err("degree must be positive".into());
            }
            let r = legendre::roots(*degree);
            let (theta, bound, ok) = legendre::theta_bound_check(*degree);
            Ok(pretty(&json!({
                "degree": degree,
                "roots": r.roots,
                "theta_n": theta,
                "bound": bound,
                "ok": ok,
            })))
        }
        Command::Construct { input } => {
            let spec: ConstructInput = read_json(input)?;
            let points = spec
                .points
                .iter()
                .map(|&p| point_from_array(p))
                .collect::<Result<Vec<_>, _>>()?;
            let y = point_from_array(spec.y)?;
            let v = harmonic_vanishing_at(&points, spec.degree, &y).map_err(|e| e.to_string())?;
            Ok(pretty(&HarmonicJson::from_harmonic(&v)))
        }
        Command::Interpolate { input, tol } => {
            let spec: InterpolateInput = read_json(input)?;
            let points = spec
                .points
                .iter()
                .map(|&p| point_from_array(p))
                .collect::<Result<Vec<_>, _>>()?;
            let u = interpolate_with_tol(&points, &spec.values, spec.degree, *tol)
                .map_err(|e| e.to_string())?;
            Ok(pretty(&HarmonicJson::from_harmonic(&u)))
        }
        Command::Poles { input, seed } => {
            let p: ComplexHarmonicJson = read_json(input)?;
            let degree = p.re.degree;
            let harmonic = p.into_harmonic()?;
            let ps = poles_with_seed(&harmonic, *seed).map_err(|e| e.to_string())?;
            Ok(pretty(&PolesJson::from_pole_set(degree, &ps)))
        }
        Command::Reconstruct { input, seed } => {
            let spec: PolesJson = read_json(input)?;
            let degree = spec.degree;
            let ps = spec.into_pole_set();
            let p = reconstruct(&ps, degree, *seed).map_err(|e| e.to_string())?;
            Ok(pretty(&ComplexHarmonicJson::from_harmonic(&p)))
        }
        Command::Trace {
            input,
            mesh_level,
            format,
        } => {
            let u = read_json::<HarmonicJson>(input)?.into_harmonic()?;
            let mesh = SphereMesh::new(*mesh_level);
            let curves = trace_nodal(&u, &mesh).map_err(|e| e.to_string())?;
            match format {
                Format::Json => {
                    let components: Vec<Vec<[f64; 3]>> = curves
                        .components
                        .iter()
                        .map(|c| c.iter().map(point_to_array).collect())
                        .collect();
                    Ok(pretty(&json!({
                        "components": components,
                        "regular": curves.regular,
                        "mesh_level": mesh_level,
                    })))
                }
                Format::Csv => {
                    let mut out = String::from("component,vertex,x,y,z\n");
                    for (ci, comp) in curves.components.iter().enumerate() {
                        for (vi, p) in comp.iter().enumerate() {
                            out.push_str(&format!(
                                "{ci},{vi},{},{},{}\n",
                                p.x(),
                                p.y(),
                                p.z()
                            ));
                        }
                    }
                    Ok(out)
                }
            }
        }
        Command::Length {
            input,
            mesh_level,
            circles,
            seed,
        } => {
            let u = read_json::<HarmonicJson>(input)?.into_harmonic()?;
            let mesh = SphereMesh::new(*mesh_level);
            let curves = trace_nodal(&u, &mesh).map_err(|e| e.to_string())?;
            let mesh_len = nodal_length(&curves);
            let (est, stderr) = crofton_length(&u, *circles, *seed);
            Ok(pretty(&json!({
                "mesh_length": mesh_len,
                "crofton_estimate": est,
                "crofton_stderr": stderr,
                "regular": curves.regular,
                "mesh_level": mesh_level,
                "circles": circles,
            })))
        }
        Command::Inr { input, mesh_level } => {
            let u = read_json::<HarmonicJson>(input)?.into_harmonic()?;
            let n = u.degree();
            let mesh = SphereMesh::new(*mesh_level);
            let inr = inner_radius(&u, &mesh).map_err(|e| e.to_string())?;
            let theta = if n >= 1 {
                legendre::roots(n).theta_n
            } else {
                std::f64::consts::PI
            };
            Ok(pretty(&json!({
                "inner_radius": inr,
                "theta_n": theta,
                "arcsin_inv_n": if n >= 1 { (1.0 / n as f64).asin() } else { 0.0 },
                "mesh_edge": mesh.max_edge_arc(),
                "mesh_level": mesh_level,
            })))
        }
        Command::CommonZeros { input, mesh_level } => {
            let pair: PairInput = read_json(input)?;
            let u = pair.u.into_harmonic()?;
            let v = pair.v.into_harmonic()?;
            let mesh = SphereMesh::new(*mesh_level);
            let cz = common_zeros(&u, &v, &mesh).map_err(|e| e.to_string())?;
            Ok(pretty(&json!({
                "zeros": cz.zeros.iter().map(|z| point_to_array(&z.point)).collect::<Vec<_>>(),
                "near_singular": cz.zeros.iter().map(|z| z.near_singular).collect::<Vec<_>>(),
                "count": cz.count(),
                "regular_count": cz.regular_count(),
                "unresolved_triangles": cz.unresolved,
                "mesh_level": mesh_level,
            })))
        }
        Command::Critical {
            input,
            mesh_level,
            seed,
        } => {
            let u = read_json::<HarmonicJson>(input)?.into_harmonic()?;
            let mesh = SphereMesh::new(*mesh_level);
            let pts = critical_points(&u, &mesh, *seed).map_err(|e| e.to_string())?;
            Ok(pretty(&json!({
                "points": pts.iter().map(point_to_array).collect::<Vec<_>>(),
                "count": pts.len(),
                "mesh_level": mesh_level,
            })))
        }
        Command::Verify { suite, seed } => {
            let known = ["kernel", "nullcone", "geometry", "mean", "all"];
            if !known.contains(&suite.as_str()) {
                return Err(format!(
                    "unknown suite {suite:?}; expected one of {known:?}"
                ));
            }
            let reports = verify::run_suites(suite, *seed);
            let pass = reports.iter().all(|r| r.pass);
            let payload = pretty(&json!({"suites": reports, "pass": pass}));
            if pass {
                Ok(payload)
            } else {
                Err(format!(
                    "verification failed:\n{}",
                    payload.trim_end()
                ))
            }
        }
        Command::Mean {
            closed,
            mc,
            args,
            samples,
            circles,
            seed,
        } => {
            if *closed && mc.is_some() {
                return Err("choose either --closed or --mc".into());
            }
            if *closed {
                if args.len() < 3 {
                    return Err("usage: mean --closed m k n1 .. nk".into());
                }
                let (m, k) = (args[0], args[1]);
                let degrees = args[2..].to_vec();
                if degrees.len() != k {
                    return Err(format!("expected {k} degrees, got {}", degrees.len()));
                }
                let spec = MeanSpec::new(m, degrees).map_err(|e| e.to_string())?;
                return Ok(pretty(&json!({"closed_form": mean_measure_closed(&spec)})));
            }
            match mc {
                Some(McKind::Length) => {
                    if args.len() != 1 {
                        return Err("usage: mean --mc length n".into());
                    }
                    let n = args[0];
                    let spec = MeanSpec::new(2, vec![n]).map_err(|e| e.to_string())?;
                    let est = mc_mean_nodal_length_with_circles(n, *samples, *circles, *seed);
                    Ok(pretty(&json!({
                        "closed_form": mean_measure_closed(&spec),
                        "mc_mean": est.mean,
                        "mc_stderr": est.stderr,
                        "rejected": est.rejected,
                        "samples": samples,
                        "circles": circles,
                    })))
                }
                Some(McKind::Zeros) => {
                    if args.len() != 2 {
                        return Err("usage: mean --mc zeros n1 n2".into());
                    }
                    let (n1, n2) = (args[0], args[1]);
                    let spec = MeanSpec::new(2, vec![n1, n2]).map_err(|e| e.to_string())?;
                    let est =
                        mc_mean_common_zeros(n1, n2, *samples, *seed).map_err(|e| e.to_string())?;
                    Ok(pretty(&json!({
                        "closed_form": mean_measure_closed(&spec),
                        "mc_mean": est.mean,
                        "mc_stderr": est.stderr,
                        "rejected": est.rejected,
                        "samples": samples,
                    })))
                }
                None => Err("choose --closed or --mc {length|zeros}".into()),
            }
        }
    }
}
