//! Command-line interface: family verification, connection extraction,
//! geodesic traces, Weyl-structure computation, and reproduction reports.
//!
//! Exit codes: 0 on pass, 1 on numeric failure (a tolerance was exceeded),
//! 2 on input errors (bad config, unparsable expressions, unknown builder).

use clap::{Parser, Subcommand};
use minitwistor::cech::ConstantConvention;
use minitwistor::config::load_family;
use minitwistor::error::{Error, Result};
use minitwistor::family::{normal_transition, tau_cocycle, Family};
use minitwistor::projconn::{
    extract_connection, geodesic_integrate, pipeline_field, GeodesicOpts, PipelineOpts,
};
use minitwistor::report::{reproduce_report, GridSpec};
use minitwistor::weyl::{
    conformal_from_family, solve_ab, weyl_compatibility_residual, weyl_connection_at,
    einstein_weyl_residual, MetricField, OneFormField, WeylStructure,
};
use num_complex::Complex64;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "minitwistor",
    about = "Canonical projective connections and Einstein-Weyl structures on moduli of rational curves",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a family config: construction invariants, cocycle checks,
    /// and a trial splitting.
    Verify {
        config: PathBuf,
        /// Tolerance overrides as key=value (e.g. --tol residual=1e-8).
        #[arg(long)]
        tol: Vec<String>,
        /// Window size for the trial splitting.
        #[arg(long, default_value_t = 256)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Extract the canonical connection at a parameter point (JSON).
    Connection {
        config: PathBuf,
        /// Comma-separated parameter values, each "re" or "re+imi".
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 256)]
        k: usize,
        #[arg(long)]
        tol: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a geodesic of the extracted connection; CSV trajectory.
    Geodesic {
        config: PathBuf,
        #[arg(long)]
        t: String,
        /// Initial direction, comma-separated complex entries.
        #[arg(long)]
        v: String,
        #[arg(long, default_value_t = 1.0)]
        smax: f64,
        #[arg(long)]
        tol: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the Weyl structure (g, a, b, omega, D, residuals) at a point.
    Weyl {
        config: PathBuf,
        #[arg(long)]
        t: String,
        #[arg(long)]
        tol: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the closed-form tables for a built-in family over a grid.
    Reproduce {
        /// Builder name (quadric-11 | branched-cover-12) or a config path.
        family: String,
        /// Grid as n,lo,hi (default 3,-0.15,0.15).
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include wall-clock timings (breaks byte-for-byte determinism).
        #[arg(long, default_value_t = false)]
        timings: bool,
        #[arg(long)]
        tol: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json")]
        format: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse complex number `{s}`"));
    if !s.contains('i') {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    }
    let body = s.strip_suffix('i').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx];
        if (c == b'+' || c == b'-') && bytes[idx - 1] != b'e' && bytes[idx - 1] != b'E' {
            split = Some(idx);
            break;
        }
    }
    let (re_str, im_str) = match split {
        Some(idx) => (&body[..idx], &body[idx..]),
        None => ("0", body),
    };
    let re = if re_str.is_empty() {
        0.0
    } else {
        re_str.parse::<f64>().map_err(|_| bad())?
    };
    let im = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re, im))
}

fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    s.split(',').map(parse_complex).collect()
}

fn parse_grid(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("grid must be n,lo,hi (got `{s}`)")));
    }
    Ok(GridSpec {
        n: parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Config("bad grid size".into()))?,
        lo: parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Config("bad grid lower bound".into()))?,
        hi: parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Config("bad grid upper bound".into()))?,
    })
}

fn load_with_overrides(path: &PathBuf, tol: &[String]) -> Result<Family> {
    let mut fam = load_family(path)?;
    apply_tol(&mut fam, tol)?;
    Ok(fam)
}

fn apply_tol(fam: &mut Family, tol: &[String]) -> Result<()> {
    for spec in tol {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("tolerance override must be key=value, got `{spec}`")))?;
        let v: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("bad tolerance value `{value}`")))?;
        fam.tol.set(key.trim(), v)?;
    }
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cvec(v: &[Complex64]) -> serde_json::Value {
    serde_json::json!(v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn nested(g: &minitwistor::projconn::Christoffel) -> serde_json::Value {
    serde_json::json!(g
        .to_nested()
        .iter()
        .map(|plane| plane
            .iter()
            .map(|row| row.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
            .collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Verify {
            config,
            tol,
            k,
            out,
            format,
        } => {
            let fam = load_with_overrides(&config, &tol)?;
            let mut checks = Vec::new();
            let compat = fam.compatibility_residual(20, 0xC0FFEE)?;
            checks.push(("chart compatibility", compat, fam.tol.compatibility));
            let probe: Vec<Complex64> = fam
                .t0
                .iter()
                .enumerate()
                .map(|(i, t)| t + Complex64::new(0.04 + 0.01 * i as f64, 0.0))
                .collect();
            let nt = normal_transition(&fam, &probe, 1.0, k.min(128))?;
            let td = tau_cocycle(&fam, &probe, 1.0, k.min(128))?;
            checks.push(("cocycle antisymmetry", td.antisymmetry, 1e-10));
            let ext = extract_connection(
                &fam,
                &probe,
                &PipelineOpts {
                    k,
                    ..Default::default()
                },
            )?;
            checks.push((
                "splitting relation residual",
                ext.split.relation_residual,
                fam.tol.residual,
            ));
            checks.push(("extraction residual", ext.residual, fam.tol.extraction));
            let pass = checks.iter().all(|(_, v, tol)| v <= tol);
            let payload = serde_json::json!({
                "family": fam.name,
                "normal_bundle_degree": nt.degree,
                "checks": checks.iter().map(|(name, v, tol)| serde_json::json!({
                    "name": name, "residual": v, "tolerance": tol, "pass": v <= tol
                })).collect::<Vec<_>>(),
                "pass": pass,
            });
            let text = if format == "json" {
                serde_json::to_string_pretty(&payload).expect("serializes")
            } else {
                let mut s = format!(
                    "family {} (normal bundle degree {})\n",
                    fam.name, nt.degree
                );
                for (name, v, tol) in &checks {
                    s.push_str(&format!(
                        "{name:<32} {v:>12.3e} (tol {tol:.1e}) {}\n",
                        if v <= tol { "ok" } else { "FAIL" }
                    ));
                }
                s
            };
            emit(&out, &text)?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Connection {
            config,
            t,
            k,
            tol,
            out,
        } => {
            let fam = load_with_overrides(&config, &tol)?;
            let t = parse_complex_list(&t)?;
            let ext = extract_connection(
                &fam,
                &t,
                &PipelineOpts {
                    k,
                    ..Default::default()
                },
            )?;
            let payload = serde_json::json!({
                "family": fam.name,
                "t": t.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "gamma": nested(&ext.gamma),
                "extraction_residual": ext.residual,
                "split": {
                    "tail": ext.split.tail,
                    "reconstruction": ext.split.reconstruction,
                    "relation_residual": ext.split.relation_residual,
                    "k": ext.split.k_used,
                },
            });
            emit(&out, &serde_json::to_string_pretty(&payload).expect("serializes"))?;
            Ok(0)
        }
        Command::Geodesic {
            config,
            t,
            v,
            smax,
            tol,
            out,
        } => {
            let fam = Arc::new(load_with_overrides(&config, &tol)?);
            let t = parse_complex_list(&t)?;
            let v = parse_complex_list(&v)?;
            let field = pipeline_field(fam.clone(), PipelineOpts::fast());
            let opts = GeodesicOpts {
                validity_radius: Some((fam.t0.clone(), fam.validity_radius)),
                ..Default::default()
            };
            let path = geodesic_integrate(&field, &t, &v, smax, &opts)?;
            let mut csv = String::from("s");
            for i in 0..fam.m() {
                csv.push_str(&format!(",t{i}_re,t{i}_im"));
            }
            csv.push('\n');
            for sample in &path.samples {
                csv.push_str(&format!("{}", sample.s));
                for c in &sample.t {
                    csv.push_str(&format!(",{},{}", c.re, c.im));
                }
                csv.push('\n');
            }
            emit(&out, &csv)?;
            Ok(0)
        }
        Command::Weyl {
            config,
            t,
            tol,
            out,
        } => {
            let fam = load_with_overrides(&config, &tol)?;
            let t = parse_complex_list(&t)?;
            let ext = extract_connection(&fam, &t, &PipelineOpts::default())?;
            // the cover family carries exact reference metric data; other
            // families get the conformal representative from tangency
            let metric: MetricField = if fam.name == "branched-cover-12" {
                minitwistor::reference::cover_metric()
            } else {
                let fam_arc = Arc::new(load_with_overrides(&config, &[])?);
                MetricField::from_fn(3, move |tt| conformal_from_family(&fam_arc, tt, 64))
            };
            let g_at = metric.eval(&t)?;
            let (a, b, ab_res) = solve_ab(&ext.gamma, &metric, &t)?;
            let omega: Vec<Complex64> =
                a.iter().zip(b.iter()).map(|(x, y)| x - 2.0 * y).collect();
            let om_field = {
                let om = omega.clone();
                OneFormField::from_fn(fam.m(), move |_| Ok(om.clone()))
            };
            let d = weyl_connection_at(&metric, &om_field, &t)?;
            let ws = WeylStructure {
                metric: metric.clone(),
                omega: om_field,
                connection: {
                    let metric = metric.clone();
                    let fam_arc = Arc::new(load_with_overrides(&config, &[])?);
                    let opts = PipelineOpts::fast();
                    minitwistor::projconn::ChristoffelField::from_fn(fam.m(), move |tt| {
                        let e = extract_connection(&fam_arc, tt, &opts)?;
                        let (aa, bb, _) = solve_ab(&e.gamma, &metric, tt)?;
                        let om: Vec<Complex64> =
                            aa.iter().zip(bb.iter()).map(|(x, y)| x - 2.0 * y).collect();
                        let omf = OneFormField::from_fn(tt.len(), move |_| Ok(om.clone()));
                        weyl_connection_at(&metric, &omf, tt)
                    })
                },
            };
            let compat = weyl_compatibility_residual(&ws, &t)?;
            let ew = einstein_weyl_residual(&ws, &t, 1e-3)?;
            let (_, proj_res) =
                minitwistor::projconn::projective_difference(&d, &ext.gamma);
            let payload = serde_json::json!({
                "family": fam.name,
                "t": t.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "metric": (0..3).map(|i| (0..3).map(|j| {
                    let v = g_at.get(i, j); [v.re, v.im]
                }).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "a": cvec(&a),
                "b": cvec(&b),
                "omega": cvec(&omega),
                "weyl_connection": nested(&d),
                "solve_ab_residual": ab_res,
                "compatibility_residual": compat,
                "einstein_weyl_residual": ew,
                "projective_difference_to_extracted": proj_res,
            });
            emit(&out, &serde_json::to_string_pretty(&payload).expect("serializes"))?;
            let pass = ab_res <= fam.tol.weyl
                && proj_res <= fam.tol.weyl
                && ew <= fam.tol.einstein_weyl;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Reproduce {
            family,
            grid,
            seed,
            timings,
            tol,
            out,
            format,
        } => {
            let mut fam = match family.as_str() {
                "quadric-11" => minitwistor::family::build_quadric_11()?,
                "branched-cover-12" => minitwistor::family::build_branched_cover_12()?,
                path => load_family(&PathBuf::from(path))?,
            };
            apply_tol(&mut fam, &tol)?;
            let grid = match grid {
                Some(g) => parse_grid(&g)?,
                None => GridSpec::default(),
            };
            let report = reproduce_report(&fam, grid, seed, timings)?;
            let text = if format == "json" {
                report.to_json()
            } else {
                report.render_text()
            };
            emit(&out, &text)?;
            Ok(if report.overall_pass { 0 } else { 1 })
        }
    }
}
