use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use actkit::census::{classify, enumerate_monoids_after};
use actkit::classes::{check_lemma_renshaw, membership_report, ActPredicate, MorphismClassSpec};
use actkit::closure::{cell_closure_bounded, find_precover_bounded, ClosureUniverse};
use actkit::colimit::{pushout_in, verify_pushout_square, Convention};
use actkit::flatness::{default_bound, flatness_report};
use actkit::json::{self, act_value, Parser};
use actkit::verify::{run_suite, VerifyConfig, SUITES};
use actkit::{tensor, ActMorphism, Error, Monoid};
use anyhow::Context;
use clap::{Args, Parser as ClapParser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(ClapParser)]
#[command(name = "actkit", version, about = "Finite monoid acts: flatness, purity, pushouts, closure and census")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args, Clone)]
struct Options {
    /// Witness bound for k-flatness and stability
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    max_size: Option<usize>,
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    #[arg(long, global = true)]
    max_order: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 20140501)]
    seed: u64,
    #[arg(long, global = true, env = "ACTKIT_JOBS", default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Monoid properties and flatness counts of small right acts
    Classify {
        #[arg(long)]
        monoid: PathBuf,
    },
    /// Flatness report and structure of one act
    ActCheck {
        #[arg(long)]
        act: PathBuf,
    },
    /// Class memberships of one morphism
    MorphismCheck {
        #[arg(long)]
        morphism: PathBuf,
        /// Only this class, e.g. F-Mono or U-class:strongly-flat
        #[arg(long)]
        class: Option<String>,
    },
    /// Tensor product of a right act and a left act
    Tensor {
        #[arg(long)]
        right: PathBuf,
        #[arg(long)]
        left: PathBuf,
    },
    /// Pushout of a span {"f": A → B, "g": A → C}
    Pushout {
        #[arg(long)]
        span: PathBuf,
        #[arg(long)]
        emit_dot: Option<PathBuf>,
        /// Reject an empty apex
        #[arg(long)]
        strict: bool,
    },
    /// Bounded cellular closure of a list of generators
    Closure {
        #[arg(long)]
        generators: PathBuf,
        /// Monoid of the universe when the list is empty
        #[arg(long)]
        monoid: Option<PathBuf>,
    },
    /// Monoids up to isomorphism, one JSON line each
    Census {
        /// Continue after the last line of this file, appending to it
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Bounded precover search for an act
    Precover {
        #[arg(long)]
        act: PathBuf,
        /// Act class, e.g. strongly-flat, k-flat, condition-p
        #[arg(long, default_value = "strongly-flat")]
        class: String,
    },
    /// Run one acceptance suite, or all of them
    Verify { suite: String },
}

/// Carries the exit status along with the report.
struct Outcome {
    report: Value,
    status: u8,
}

impl From<Value> for Outcome {
    fn from(report: Value) -> Self {
        Outcome { report, status: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli.opts, &out.report) {
                eprintln!("{}", json!({ "error": "io", "message": format!("{e:#}") }));
                return ExitCode::from(1);
            }
            ExitCode::from(out.status)
        }
        Err(e) => {
            let diag = match e.downcast_ref::<Error>() {
                Some(Error::Schema { path, message }) => {
                    json!({ "error": "schema", "path": path, "message": message })
                }
                Some(inner) => json!({ "error": kind(inner), "message": inner.to_string() }),
                None => json!({ "error": "input", "message": format!("{e:#}") }),
            };
            eprintln!("{diag}");
            ExitCode::from(1)
        }
    }
}

fn kind(e: &Error) -> String {
    let debug = format!("{e:?}");
    debug.split(['(', ' ', '{']).next().unwrap_or("error").to_string()
}

fn bound(v: Option<usize>, default: usize, name: &str) -> anyhow::Result<usize> {
    let b = v.unwrap_or(default);
    anyhow::ensure!(b > 0, "--{name} must be positive");
    Ok(b)
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let o = &cli.opts;
    anyhow::ensure!(o.jobs > 0, "--jobs must be positive");
    Ok(match &cli.command {
        Command::Classify { monoid } => {
            let m = json::load_monoid(monoid)?;
            let k = bound(o.k, default_bound(&m), "k")?;
            let size = bound(o.max_size, 3, "max-size")?;
            serde_json::to_value(classify(&m, size, k)?)?.into()
        }
        Command::ActCheck { act } => {
            let a = json::load_act(act)?;
            let k = bound(o.k, default_bound(a.monoid()), "k")?;
            let structure = if a.is_empty() {
                Value::Null
            } else {
                json!({
                    "indecomposable": a.is_indecomposable()?,
                    "locally_cyclic": a.is_locally_cyclic()?,
                    "cyclic": a.is_cyclic()?,
                    "components": a.connected_components().len(),
                    "fixed_points": a.fixed_points(),
                })
            };
            let flatness = match a.side() {
                actkit::Side::Right if !a.is_empty() => serde_json::to_value(flatness_report(&a, k)?)?,
                _ => Value::Null,
            };
            json!({ "act": act_value(&a), "k": k, "structure": structure, "flatness": flatness }).into()
        }
        Command::MorphismCheck { morphism, class } => {
            let f = json::load_morphism(morphism)?;
            let k = bound(o.k, default_bound(f.dom().monoid()), "k")?;
            let specs = match class {
                Some(c) => vec![MorphismClassSpec::parse(c, k)?],
                None => vec![
                    MorphismClassSpec::mono(),
                    MorphismClassSpec::pure_mono(),
                    MorphismClassSpec::stable_mono(k),
                    MorphismClassSpec::f_mono(k),
                    MorphismClassSpec::sf_mono(),
                    MorphismClassSpec::f_pure_mono(k),
                ],
            };
            let reports = specs
                .iter()
                .map(|s| Ok(serde_json::to_value(membership_report(&f, s)?)?))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let renshaw = if f.is_injective() && !f.dom().is_empty() {
                serde_json::to_value(check_lemma_renshaw(&f, k)?)?
            } else {
                Value::Null
            };
            json!({
                "morphism": json::morphism_value(&f),
                "k": k,
                "classes": reports,
                "flat_quotient_check": renshaw,
            })
            .into()
        }
        Command::Tensor { right, left } => {
            let a = json::load_act(right)?;
            let x = json::load_act(left)?;
            let t = tensor(&a, &x)?;
            json!({
                "size": t.num_classes(),
                "labels": t.labels(),
                "classes": t.classes(),
            })
            .into()
        }
        Command::Pushout { span, emit_dot, strict } => {
            let (f, g) = json::load_span(span)?;
            let convention = if *strict { Convention::Strict } else { Convention::WithEmpty };
            let sq = pushout_in(&f, &g, convention)?;
            if let Some(path) = emit_dot {
                fs::write(path, sq.to_dot()).with_context(|| format!("writing {}", path.display()))?;
            }
            let mut v = sq.to_value();
            v["universal_property_verified"] = json!(verify_pushout_square(&sq));
            v.into()
        }
        Command::Closure { generators, monoid } => {
            let gens = load_generators(generators)?;
            let m: Arc<Monoid> = match (gens.first(), monoid) {
                (Some(g), _) => g.dom().monoid().clone(),
                (None, Some(path)) => json::load_monoid(path)?,
                (None, None) => anyhow::bail!("an empty generator list needs --monoid"),
            };
            let u = ClosureUniverse::new(
                m,
                bound(o.max_size, 3, "max-size")?,
                bound(o.max_steps, 4, "max-steps")?,
                gens,
            )?;
            let c = cell_closure_bounded(&u, o.jobs)?;
            Outcome {
                status: if c.partial { 2 } else { 0 },
                report: c.to_value(),
            }
        }
        Command::Census { resume } => return census(o, resume.as_deref()),
        Command::Precover { act, class } => {
            let a = json::load_act(act)?;
            let k = bound(o.k, default_bound(a.monoid()), "k")?;
            let pred = ActPredicate::parse(class, k)?;
            let cert = find_precover_bounded(&a, pred, bound(o.max_size, 3, "max-size")?)?;
            serde_json::to_value(cert)?.into()
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                anyhow::ensure!(SUITES.contains(&suite.as_str()), "unknown suite {suite}; expected one of {SUITES:?} or all");
                vec![suite.as_str()]
            };
            let cfg = VerifyConfig {
                seed: o.seed,
                max_order: o.max_order,
                max_size: o.max_size,
                k: o.k,
                max_steps: o.max_steps,
                jobs: o.jobs,
            };
            let mut reports = Vec::new();
            let mut all_pass = true;
            for n in names {
                let r = run_suite(n, &cfg)?;
                all_pass &= r.passed;
                reports.push(serde_json::to_value(r)?);
            }
            Outcome {
                status: if all_pass { 0 } else { 1 },
                report: json!({ "all_passed": all_pass, "suites": reports }),
            }
        }
    })
}

/// A JSON array of morphisms, or an object with a "generators" array.
fn load_generators(path: &Path) -> anyhow::Result<Vec<ActMorphism>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let (list, at) = match &v {
        Value::Array(a) => (a, "$"),
        _ => match v.get("generators").and_then(Value::as_array) {
            Some(a) => (a, "$.generators"),
            None => {
                return Err(Error::Schema {
                    path: "$".into(),
                    message: "expected an array of morphisms or {\"generators\": [...]}".into(),
                }
                .into())
            }
        },
    };
    let mut p = Parser::with_base(path.parent().map(Path::to_path_buf).unwrap_or_default());
    let gens = list
        .iter()
        .enumerate()
        .map(|(i, g)| p.morphism(g, &format!("{at}[{i}]")))
        .collect::<actkit::Result<Vec<_>>>()?;
    Ok(gens)
}

fn last_line(path: &Path) -> anyhow::Result<Option<String>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut last = None;
    for line in BufReader::new(f).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            last = Some(line);
        }
    }
    Ok(last)
}

/// Streams census entries as JSON lines in chunks, so an interrupted run
/// can be resumed from the last complete line.
fn census(o: &Options, resume: Option<&Path>) -> anyhow::Result<Outcome> {
    let max_order = bound(o.max_order, 3, "max-order")?;
    let act_size = bound(o.max_size, 2, "max-size")?;
    let last = match resume {
        Some(path) => match last_line(path)? {
            Some(line) => {
                let v: Value = serde_json::from_str(&line).context("last census line")?;
                let m = Parser::new().monoid(&v["monoid"], "$.monoid")?;
                Some((*m).clone())
            }
            None => None,
        },
        None => None,
    };
    let monoids = enumerate_monoids_after(max_order, last.as_ref());
    let target = resume.map(Path::to_path_buf).or_else(|| o.out.clone());
    let mut sink: Box<dyn Write> = match (&target, resume) {
        (Some(path), Some(_)) => Box::new(OpenOptions::new().append(true).open(path)?),
        (Some(path), None) => Box::new(fs::File::create(path)?),
        (None, _) => Box::new(std::io::stdout().lock()),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(o.jobs).build()?;
    let mut written = 0;
    for chunk in monoids.chunks(16) {
        let lines: Vec<actkit::Result<String>> = pool.install(|| {
            use rayon::prelude::*;
            chunk
                .par_iter()
                .map(|m| {
                    let k = o.k.unwrap_or_else(|| default_bound(m));
                    let e = classify(m, act_size, k)?;
                    Ok(serde_json::to_string(&serde_json::to_value(e).expect("plain data")).expect("plain data"))
                })
                .collect()
        });
        for line in lines {
            writeln!(sink, "{}", line?)?;
            written += 1;
        }
        sink.flush()?;
    }
    let summary = json!({ "entries_written": written, "max_order": max_order, "resumed": last.is_some() });
    if target.is_some() {
        // the entries went to the file; print only the summary
        println!("{}", render(o.format, &summary));
    } else {
        eprintln!("{summary}");
    }
    Ok(Outcome {
        report: Value::Null,
        status: 0,
    })
}

fn emit(o: &Options, report: &Value) -> anyhow::Result<()> {
    if report.is_null() {
        return Ok(());
    }
    let text = render(o.format, report);
    match &o.out {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}").and_then(|_| out.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}

fn render(format: Format, v: &Value) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(v).expect("plain data"),
        Format::Table => {
            let mut out = String::new();
            if let Some(suites) = v.get("suites").and_then(Value::as_array) {
                for s in suites {
                    out += &format!(
                        "{:>2} {:<20} {} checked={} violations={} adjudicated={} {}ms  {}\n",
                        s["criterion"], s["suite"].as_str().unwrap_or(""),
                        if s["passed"] == json!(true) { "PASS" } else { "FAIL" },
                        s["checked"], s["violations"], s["adjudicated"], s["elapsed_ms"],
                        s["summary"].as_str().unwrap_or("")
                    );
                }
                return out.trim_end().to_string();
            }
            table(v, 0, &mut out);
            out.trim_end().to_string()
        }
    }
}

/// Arrays without objects inside print on one line.
fn plain(v: &Value) -> bool {
    match v {
        Value::Object(_) => false,
        Value::Array(a) => a.iter().all(plain),
        _ => true,
    }
}

fn table(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (key, val) in map {
                if !plain(val) {
                    out.push_str(&format!("{pad}{key}:\n"));
                    table(val, depth + 1, out);
                } else {
                    out.push_str(&format!("{pad}{key}: {}\n", val));
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                out.push_str(&format!("{pad}[{i}]\n"));
                table(item, depth + 1, out);
            }
        }
        other => out.push_str(&format!("{pad}{other}\n")),
    }
}
