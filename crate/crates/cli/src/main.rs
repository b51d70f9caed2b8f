use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hemilab::building::{Building, BuildingSpec};
use hemilab::filtration::Filtration;
use hemilab::homology::{homotopy_cm, reduced_homology_bounded};
use hemilab::metric::{classify, Class, Pole, PoleSpec};
use hemilab::supports::Hemispheres;
use hemilab::verify::{self, CheckKind, Job, PoleSelection, Status, VerdictReport};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "hemilab", version, about = "Hemisphere complexes of finite spherical buildings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a building and store its complex file in the cache.
    Generate(GenerateArgs),
    /// Classify vertices as LT / EQ / GT with respect to a pole.
    Classify(PoleArgs),
    /// Compute the restriction filtration of the closed hemisphere complex.
    Filtrate(PoleArgs),
    /// Reduced integral homology of the building or of a hemisphere complex.
    Homology(HomologyArgs),
    /// Run verification checks and write a verdict report.
    Verify(VerifyArgs),
    /// Write the 1-skeleton as a DOT graph, with vertex classes when a pole is given.
    ExportDot(DotArgs),
    /// Summarise a verdict report.
    Report(ReportArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Building spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    io: SpecArgs,
    /// Cache directory (default: $HEMILAB_CACHE or ./.cache).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct PoleArgs {
    #[command(flatten)]
    io: SpecArgs,
    /// Pole: a JSON file, `vertex:ID` or `barycenter:ID,ID,…`.
    #[arg(long)]
    pole: String,
}

#[derive(Copy, Clone, ValueEnum)]
enum Which {
    Building,
    Gt,
    Ge,
    Eq,
}

#[derive(Args)]
struct HomologyArgs {
    #[command(flatten)]
    io: SpecArgs,
    #[arg(long)]
    pole: Option<String>,
    /// Which complex; hemisphere complexes require --pole.
    #[arg(long, value_enum, default_value = "building")]
    complex: Which,
    #[arg(long, default_value_t = 200_000)]
    max_cells: usize,
    /// Also run the homotopy Cohen–Macaulay link suite.
    #[arg(long)]
    cm: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Job file; overrides --spec/--pole/--checks.
    #[arg(long, conflicts_with_all = ["spec", "pole", "checks"])]
    job: Option<PathBuf>,
    #[arg(long, required_unless_present = "job")]
    spec: Option<PathBuf>,
    /// Pole(s); default: every vertex and edge midpoint.
    #[arg(long)]
    pole: Vec<String>,
    /// Comma-separated checks (default: all).
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_cells: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DotArgs {
    #[command(flatten)]
    io: SpecArgs,
    #[arg(long)]
    pole: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Verdict report produced by `verify`.
    report: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failed;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<hemilab::Error>() {
                Some(h) if h.is_size_bound() => 3,
                Some(hemilab::Error::Input(_)) | Some(hemilab::Error::Json(_)) => 2,
                Some(_) => 1,
                None => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn read_spec(path: &Path) -> anyhow::Result<BuildingSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!(hemilab::Error::input(format!("{}: {e}", path.display()))))
}

fn parse_pole(s: &str) -> anyhow::Result<PoleSpec> {
    let p = Path::new(s);
    if !s.starts_with("vertex:") && !s.starts_with("barycenter:") && p.exists() {
        let text = std::fs::read_to_string(p)?;
        return serde_json::from_str(&text).map_err(|e| anyhow!(hemilab::Error::input(format!("{s}: {e}"))));
    }
    Ok(PoleSpec::parse_shorthand(s)?)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Content hash of the canonical spec: formatting of the spec file does not matter.
pub fn cache_key(spec: &BuildingSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("serializable");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

fn cache_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HEMILAB_CACHE").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(".cache"))
}

fn class_name(c: Class) -> &'static str {
    match c {
        Class::LT => "LT",
        Class::EQ => "EQ",
        Class::GT => "GT",
    }
}

fn run(cmd: Command) -> anyhow::Result<Result<(), Failed>> {
    match cmd {
        Command::Generate(a) => {
            let spec = read_spec(&a.io.spec)?;
            let dir = cache_dir(a.cache);
            let path = dir.join(format!("{}.complex.json", cache_key(&spec)));
            let text = if path.exists() {
                std::fs::read_to_string(&path)?
            } else {
                let b = Building::build(&spec)?;
                let text = json(&b.complex().to_file());
                std::fs::create_dir_all(&dir)?;
                std::fs::write(&path, &text)?;
                text
            };
            match a.io.out {
                Some(out) => std::fs::write(out, &text)?,
                None => {
                    let file: hemilab::complex::ComplexFile = serde_json::from_str(&text)?;
                    let summary = serde_json::json!({
                        "cache": path.display().to_string(),
                        "vertices": file.vertices.len(),
                        "facets": file.facets.len(),
                    });
                    print!("{}", json(&summary));
                }
            }
        }
        Command::Classify(a) => {
            let b = Building::build(&read_spec(&a.io.spec)?)?;
            let pole = Pole::from_spec(&b, &parse_pole(&a.pole)?)?;
            let classes = classify(&b, &pole)?;
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            let mut per: BTreeMap<u32, &str> = BTreeMap::new();
            for v in b.complex().vertex_ids() {
                let c = class_name(classes.class(v).ok_or_else(|| anyhow!("vertex {v} unclassified"))?);
                *counts.entry(c).or_default() += 1;
                per.insert(v, c);
            }
            emit(a.io.out.as_deref(), &json(&serde_json::json!({ "counts": counts, "classes": per })))?;
        }
        Command::Filtrate(a) => {
            let b = Building::build(&read_spec(&a.io.spec)?)?;
            let pole = Pole::from_spec(&b, &parse_pole(&a.pole)?)?;
            let f = Filtration::new(Hemispheres::of_building(&b, classify(&b, &pole)?))?;
            let checks: BTreeMap<&str, _> = f.check_all()?.into_iter().collect();
            let ok = checks.values().all(|t| t.passed());
            let heights: Vec<_> = f
                .image()
                .iter()
                .map(|s| Ok(serde_json::json!({ "simplex": s, "height": f.height(s)? })))
                .collect::<hemilab::Result<_>>()?;
            let doc = serde_json::json!({
                "rank": f.rank(),
                "stages": f.stages(),
                "image": heights,
                "checks": checks,
            });
            emit(a.io.out.as_deref(), &json(&doc))?;
            if !ok {
                return Ok(Err(Failed));
            }
        }
        Command::Homology(a) => {
            let b = Building::build(&read_spec(&a.io.spec)?)?;
            let x = match a.complex {
                Which::Building => b.complex().clone(),
                which => {
                    let p = a.pole.as_deref().ok_or_else(|| anyhow!(hemilab::Error::input("--complex gt|ge|eq needs --pole")))?;
                    let pole = Pole::from_spec(&b, &parse_pole(p)?)?;
                    let h = Hemispheres::of_building(&b, classify(&b, &pole)?);
                    match which {
                        Which::Gt => h.gt(),
                        Which::Ge => h.ge(),
                        _ => h.eq(),
                    }
                }
            };
            let profile = reduced_homology_bounded(&x, a.max_cells)?;
            let mut doc = serde_json::json!({ "profile": profile });
            let mut ok = true;
            if a.cm {
                let cm = homotopy_cm(&x, a.max_cells)?;
                ok = cm.passed();
                doc["cohen_macaulay"] = serde_json::to_value(&cm)?;
            }
            emit(a.io.out.as_deref(), &json(&doc))?;
            if !ok {
                return Ok(Err(Failed));
            }
        }
        Command::Verify(a) => {
            let mut job = match &a.job {
                Some(p) => Job::from_json(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
                None => {
                    let mut job = Job::new(read_spec(a.spec.as_deref().expect("clap enforces --spec"))?);
                    if !a.pole.is_empty() {
                        job.poles = PoleSelection::List(a.pole.iter().map(|p| parse_pole(p)).collect::<anyhow::Result<_>>()?);
                    }
                    if !a.checks.is_empty() {
                        job.checks = a.checks.iter().map(|c| CheckKind::parse(c.trim())).collect::<hemilab::Result<_>>()?;
                    }
                    job
                }
            };
            if let Some(s) = a.seed {
                job.seed = s;
            }
            if let Some(m) = a.max_cells {
                job.bounds.max_cells = m;
            }
            let report = verify::run(&job)?;
            let mut text = report.to_json();
            text.push('\n');
            emit(a.out.as_deref(), &text)?;
            if a.out.is_some() {
                eprint!("{}", summarise(&report));
            }
            if !report.passed() {
                return Ok(Err(Failed));
            }
        }
        Command::ExportDot(a) => {
            let b = Building::build(&read_spec(&a.io.spec)?)?;
            let classes = match &a.pole {
                Some(p) => Some(classify(&b, &Pole::from_spec(&b, &parse_pole(p)?)?)?),
                None => None,
            };
            let x = b.complex();
            let mut dot = String::from("graph building {\n  node [shape=circle];\n");
            for v in x.vertex_ids() {
                let label = &x.vertex_info(v).expect("vertex").label;
                let mut attrs = format!("label=\"{}\", type={}", label.replace('"', "'"), x.vtype(v).expect("vertex"));
                if let Some(c) = classes.as_ref().and_then(|cl| cl.class(v)) {
                    let colour = match c {
                        Class::LT => "lightblue",
                        Class::EQ => "gold",
                        Class::GT => "salmon",
                    };
                    write!(attrs, ", class={}, style=filled, fillcolor={colour}", class_name(c))?;
                }
                writeln!(dot, "  {v} [{attrs}];")?;
            }
            for e in x.simplices_of_dim(1) {
                writeln!(dot, "  {} -- {};", e.vertices()[0], e.vertices()[1])?;
            }
            dot.push_str("}\n");
            emit(a.io.out.as_deref(), &dot)?;
        }
        Command::Report(a) => {
            let text = std::fs::read_to_string(&a.report).with_context(|| format!("reading {}", a.report.display()))?;
            let report: VerdictReport =
                serde_json::from_str(&text).map_err(|e| anyhow!(hemilab::Error::input(format!("{}: {e}", a.report.display()))))?;
            emit(a.out.as_deref(), &summarise(&report))?;
            if !report.passed() {
                return Ok(Err(Failed));
            }
        }
    }
    Ok(Ok(()))
}

fn summarise(r: &VerdictReport) -> String {
    let mut s = String::new();
    let tag = |st: Status| match st {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Advisory => "ADVISORY",
        Status::Skipped => "SKIP",
    };
    for v in &r.verdicts {
        let check = serde_json::to_value(v.check).expect("serializable");
        let _ = write!(s, "{:<8} {} {} [{}]", tag(v.status), check.as_str().unwrap_or("?"), v.part, v.instance);
        if let Some(n) = &v.note {
            let _ = write!(s, " — {n}");
        }
        s.push('\n');
        for w in v.witnesses.iter().take(3) {
            let _ = writeln!(s, "         witness: {w}");
        }
    }
    let m = &r.summary;
    let _ = writeln!(s, "pass {} fail {} advisory {} skipped {}", m.pass, m.fail, m.advisory, m.skipped);
    s
}
