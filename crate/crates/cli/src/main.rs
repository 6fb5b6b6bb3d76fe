mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spatialsurf::algebra::{
    check_quandle, conjugation_mcq, cyclic_rack, dihedral_quandle, group_to_text, mgr_from_rack, mgr_to_alg,
    parse_alg, parse_group_table, product_rack, rack_to_alg, stabilizer_order, AnyAlgebra, FiniteRack,
    GroupTable,
};
use spatialsurf::coloring::{count_colorings_bruteforce, count_colorings_jobs, enumerate_colorings};
use spatialsurf::diagram::{parse_diagram, parse_diagram_unchecked, Diagram};
use spatialsurf::family::{corpus, make_dn, make_dn_prime, trefoil_base, trivial_base, Tangle};
use spatialsurf::moves::{
    apply_move, check_allowed, find_sites, parse_log, random_walk, serialize_log, MoveKind, MoveSite, ALL_MOVES,
    SURFACE_MOVES,
};
use spatialsurf::seifert::{
    build_vk, congruence_witness_search, congruent_transform, gcd_profile_jobs, profiles_distinguish,
    random_unimodular, IntMatrix,
};

use report::Report;

#[derive(Parser)]
#[command(name = "spatialsurf", version, about = "Coloring and Seifert-matrix invariants of spatial surfaces")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print one JSON object instead of plain lines.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for counting and minor enumeration.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build or check Cayley tables.
    Algebra {
        #[command(subcommand)]
        cmd: AlgebraCmd,
    },
    /// Count colorings of a diagram.
    Color(ColorArgs),
    /// Apply, replay or randomly walk Reidemeister moves.
    Moves(MovesArgs),
    /// Minor-gcd profiles of Seifert matrices.
    Seifert {
        #[command(subcommand)]
        cmd: SeifertCmd,
    },
    /// The D_n / D_n' family and the test corpus.
    Family {
        #[command(subcommand)]
        cmd: FamilyCmd,
    },
    /// Validate a diagram or print its surface statistics.
    Diagram {
        #[command(subcommand)]
        cmd: DiagramCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MakeKind {
    Dihedral,
    Cyclic,
    Product,
    Mcq,
    Mgr,
    Group,
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// `dihedral n | cyclic n | product f1 f2 | mcq group-file | mgr rack-file | group cyclic|symmetric n`
    Make {
        kind: MakeKind,
        args: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exhaustively check the axioms of a `.alg` file.
    Check { file: PathBuf },
}

#[derive(Args)]
struct ColorArgs {
    diagram: PathBuf,
    algebra: PathBuf,
    /// List up to N colorings.
    #[arg(long, value_name = "N")]
    enumerate: Option<usize>,
    /// Cross-check against brute force.
    #[arg(long)]
    oracle: bool,
    /// Fail unless the count equals this.
    #[arg(long, value_name = "COUNT")]
    expect: Option<String>,
}

#[derive(Args)]
struct MovesArgs {
    diagram: PathBuf,
    /// `KINDS STEPS [SEED]`; KINDS is a comma list such as R2,R3 or `surface` / `all`.
    #[arg(long, num_args = 2..=3, value_names = ["KINDS", "STEPS", "SEED"])]
    walk: Option<Vec<String>>,
    /// Apply one site, e.g. `R2 expand-pos a b`. Repeatable.
    #[arg(long, value_name = "SITE")]
    apply: Vec<String>,
    /// Replay a move log file.
    #[arg(long, value_name = "LOG")]
    replay: Option<PathBuf>,
    /// List the available sites.
    #[arg(long)]
    sites: bool,
    /// Only allow spatial-surface moves (R2, R3, R5, R6).
    #[arg(long)]
    surface: bool,
    /// Write the resulting diagram here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the applied moves here.
    #[arg(long, value_name = "FILE")]
    log: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SeifertCmd {
    /// Minor-gcd profile of a matrix file.
    Profile { file: PathBuf },
    /// The matrix V_k built around V (a matrix file or `empty`).
    Family {
        v: String,
        #[arg(allow_hyphen_values = true)]
        k: i64,
    },
    /// Whether two profiles differ.
    Distinguish { a: PathBuf, b: PathBuf },
    /// P^T M P.
    Transform { m: PathBuf, p: PathBuf },
    /// Search for a unimodular P with small entries and P^T A P = B.
    Witness {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 2)]
        bound: i64,
    },
    /// Check that seeded random unimodular congruences keep the profile.
    Invariance {
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Dn,
    Dnp,
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// Generate D_n or D_n'.
    Gen {
        which: Which,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        /// `trivial`, `trefoil` or a tangle file.
        #[arg(long, default_value = "trivial")]
        base: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the corpus as `.sgd` files.
    Corpus {
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Coloring counts of D_n and D_n' and their ratio.
    Ratio {
        /// Algebra file; defaults to the MGR built from R_3 x C_2.
        #[arg(long)]
        alg: Option<PathBuf>,
        #[arg(long, default_value = "trivial")]
        base: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2)]
        from: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2)]
        to: i64,
    },
}

#[derive(Subcommand)]
enum DiagramCmd {
    /// Report violations of the diagram rules and of the Y-condition.
    Check { file: PathBuf },
    /// Euler characteristic, boundary components and genus.
    Stats { file: PathBuf },
}

/// Normal completion; `false` when a requested check failed.
type Outcome = Result<bool>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command: Vec<String> = std::env::args().skip(1).collect();
    let mut report = Report::new(command.join(" "), cli.seed);
    let jobs = cli.jobs.max(1);
    let res = match &cli.cmd {
        Cmd::Algebra { cmd } => algebra(&mut report, cmd),
        Cmd::Color(a) => color(&mut report, a, jobs),
        Cmd::Moves(a) => moves(&mut report, a, cli.seed),
        Cmd::Seifert { cmd } => seifert(&mut report, cmd, cli.seed, jobs),
        Cmd::Family { cmd } => family(&mut report, cmd, jobs),
        Cmd::Diagram { cmd } => diagram(&mut report, cmd),
    };
    match res {
        Ok(ok) => {
            report.emit(cli.json);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_alg(r: &mut Report, path: &Path) -> Result<AnyAlgebra> {
    let text = r.read(path)?;
    parse_alg(&text).with_context(|| path.display().to_string())
}

fn read_rack(r: &mut Report, path: &Path) -> Result<FiniteRack> {
    match read_alg(r, path)? {
        AnyAlgebra::Rack(x) => Ok(x),
        AnyAlgebra::Mgr(m) => Ok(m.underlying_rack()),
    }
}

fn read_diagram(r: &mut Report, path: &Path) -> Result<Diagram> {
    let text = r.read(path)?;
    parse_diagram(&text).with_context(|| path.display().to_string())
}

fn read_matrix(r: &mut Report, path: &Path) -> Result<IntMatrix> {
    let text = r.read(path)?;
    IntMatrix::parse(&text).with_context(|| path.display().to_string())
}

fn num_arg<T: std::str::FromStr>(args: &[String], i: usize, what: &str) -> Result<T> {
    args.get(i)
        .ok_or_else(|| anyhow!("missing {what}"))?
        .parse()
        .map_err(|_| anyhow!("bad {what} `{}`", args[i]))
}

fn arity(args: &[String], n: usize, usage: &str) -> Result<()> {
    if args.len() != n {
        bail!("usage: algebra make {usage}");
    }
    Ok(())
}

fn algebra(r: &mut Report, cmd: &AlgebraCmd) -> Outcome {
    match cmd {
        AlgebraCmd::Make { kind, args, output } => {
            let text = match kind {
                MakeKind::Dihedral => {
                    arity(args, 1, "dihedral <n>")?;
                    rack_to_alg(&dihedral_quandle(num_arg(args, 0, "n")?)?)
                }
                MakeKind::Cyclic => {
                    arity(args, 1, "cyclic <n>")?;
                    rack_to_alg(&cyclic_rack(num_arg(args, 0, "n")?)?)
                }
                MakeKind::Product => {
                    arity(args, 2, "product <rack1> <rack2>")?;
                    let a = read_rack(r, Path::new(&args[0]))?;
                    let b = read_rack(r, Path::new(&args[1]))?;
                    rack_to_alg(&product_rack(&a, &b))
                }
                MakeKind::Mcq => {
                    arity(args, 1, "mcq <group-file>")?;
                    let text = r.read(Path::new(&args[0]))?;
                    mgr_to_alg(&conjugation_mcq(&parse_group_table(&text)?))
                }
                MakeKind::Mgr => {
                    arity(args, 1, "mgr <rack-file>")?;
                    let rack = read_rack(r, Path::new(&args[0]))?;
                    mgr_to_alg(&mgr_from_rack(&rack)?)
                }
                MakeKind::Group => {
                    arity(args, 2, "group cyclic|symmetric <n>")?;
                    let n = num_arg(args, 1, "n")?;
                    let g = match args[0].as_str() {
                        "cyclic" => GroupTable::cyclic(n)?,
                        "symmetric" => GroupTable::symmetric(n)?,
                        other => bail!("unknown group family `{other}`"),
                    };
                    group_to_text(&g)
                }
            };
            let size = text.split_whitespace().nth(1).unwrap_or("0").parse::<u64>().unwrap_or(0);
            r.put("size", size);
            match output {
                Some(p) => {
                    write_out(p, &text)?;
                    r.put("written", p.display().to_string());
                }
                None => r.put_line("table", text.clone(), text.trim_end()),
            }
            Ok(true)
        }
        AlgebraCmd::Check { file } => {
            let x = read_alg(r, file)?;
            r.put("kind", x.kind());
            r.put("size", spatialsurf::algebra::Algebra::size(&x) as u64);
            let rep = x.check();
            r.put("axioms", if rep.passed { "pass" } else { "fail" });
            for (i, v) in rep.violations.iter().enumerate() {
                r.put_line(format!("violation.{i}"), v.to_string(), format!("violation {v}"));
            }
            if rep.truncated {
                r.put("violations_truncated", true);
            }
            if rep.passed {
                if let AnyAlgebra::Rack(rack) = &x {
                    r.put("quandle", check_quandle(rack).passed);
                    r.put("stabilizer_order", stabilizer_order(rack)? as u64);
                }
            }
            Ok(rep.passed)
        }
    }
}

fn color(r: &mut Report, a: &ColorArgs, jobs: usize) -> Outcome {
    let d = read_diagram(r, &a.diagram)?;
    let x = read_alg(r, &a.algebra)?;
    let count = count_colorings_jobs(&d, &x, jobs)?;
    r.put("count", count.to_string());
    let mut ok = true;
    if a.oracle {
        let brute = count_colorings_bruteforce(&d, &x)?;
        r.put("oracle", brute.to_string());
        let agree = brute == count;
        r.put("oracle_agrees", agree);
        ok &= agree;
    }
    if let Some(want) = &a.expect {
        let matches = want.trim() == count.to_string();
        r.put("expect_matches", matches);
        ok &= matches;
    }
    if let Some(cap) = a.enumerate {
        let e = enumerate_colorings(&d, &x, cap)?;
        for (i, c) in e.colorings.iter().enumerate() {
            let text: Vec<String> = c.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
            r.put_line(format!("coloring.{i}"), json!(c.assignment), format!("coloring {}", text.join(" ")));
        }
        r.put("enumeration_truncated", e.truncated);
    }
    Ok(ok)
}

fn parse_kinds(s: &str) -> Result<Vec<MoveKind>> {
    match s {
        "all" => Ok(ALL_MOVES.to_vec()),
        "surface" => Ok(SURFACE_MOVES.to_vec()),
        _ => s
            .split(',')
            .map(|k| k.trim().parse::<MoveKind>().map_err(|e| anyhow!("{e}")))
            .collect(),
    }
}

fn moves(r: &mut Report, a: &MovesArgs, global_seed: u64) -> Outcome {
    let mut d = read_diagram(r, &a.diagram)?;
    let legal: &[MoveKind] = if a.surface { &SURFACE_MOVES } else { &ALL_MOVES };
    let mut log: Vec<MoveSite> = Vec::new();

    if let Some(path) = &a.replay {
        let text = r.read(path)?;
        for site in parse_log(&text)? {
            check_allowed(&[site.kind], a.surface)?;
            d = apply_move(&d, &site)?;
            log.push(site);
        }
    }
    for s in &a.apply {
        let site: MoveSite = s.parse()?;
        check_allowed(&[site.kind], a.surface)?;
        d = apply_move(&d, &site)?;
        log.push(site);
    }
    if let Some(w) = &a.walk {
        let kinds = parse_kinds(&w[0])?;
        check_allowed(&kinds, a.surface)?;
        let steps: usize = w[1].parse().map_err(|_| anyhow!("bad step count `{}`", w[1]))?;
        let seed = match w.get(2) {
            Some(s) => s.parse().map_err(|_| anyhow!("bad seed `{s}`"))?,
            None => global_seed,
        };
        let (next, steps_log) = random_walk(&d, &kinds, steps, seed)?;
        d = next;
        log.extend(steps_log);
    }

    for (i, s) in log.iter().enumerate() {
        r.put_line(format!("step.{i}"), s.to_string(), format!("step {i}: {s}"));
    }
    r.put("applied", log.len() as u64);
    if a.sites {
        let mut i = 0;
        for &k in legal {
            for s in find_sites(&d, k) {
                r.put_line(format!("site.{i}"), s.to_string(), format!("site {s}"));
                i += 1;
            }
        }
    }
    if let Some(p) = &a.log {
        write_out(p, &serialize_log(&log))?;
    }
    match &a.output {
        Some(p) => {
            write_out(p, &d.to_sgd())?;
            r.put("written", p.display().to_string());
        }
        None if !a.sites => {
            let text = d.to_sgd();
            r.put_line("diagram", text.clone(), text.trim_end());
        }
        None => {}
    }
    Ok(true)
}

fn seifert(r: &mut Report, cmd: &SeifertCmd, seed: u64, jobs: usize) -> Outcome {
    match cmd {
        SeifertCmd::Profile { file } => {
            let m = read_matrix(r, file)?;
            let p = gcd_profile_jobs(&m, jobs);
            r.put("profile", p.to_string());
            Ok(true)
        }
        SeifertCmd::Family { v, k } => {
            let v = if v == "empty" { IntMatrix::zero(0) } else { read_matrix(r, Path::new(v))? };
            let m = build_vk(&v, *k);
            r.put_line("matrix", m.to_text(), m.to_text().trim_end());
            Ok(true)
        }
        SeifertCmd::Distinguish { a, b } => {
            let (ma, mb) = (read_matrix(r, a)?, read_matrix(r, b)?);
            r.put("profile_a", gcd_profile_jobs(&ma, jobs).to_string());
            r.put("profile_b", gcd_profile_jobs(&mb, jobs).to_string());
            r.put("distinguish", profiles_distinguish(&ma, &mb)?);
            Ok(true)
        }
        SeifertCmd::Transform { m, p } => {
            let (mm, pp) = (read_matrix(r, m)?, read_matrix(r, p)?);
            let t = congruent_transform(&mm, &pp)?;
            r.put_line("matrix", t.to_text(), t.to_text().trim_end());
            Ok(true)
        }
        SeifertCmd::Witness { a, b, bound } => {
            let (ma, mb) = (read_matrix(r, a)?, read_matrix(r, b)?);
            match congruence_witness_search(&ma, &mb, *bound)? {
                Some(p) => {
                    r.put("found", true);
                    r.put_line("witness", p.to_text(), p.to_text().trim_end());
                }
                None => r.put("found", false),
            }
            Ok(true)
        }
        SeifertCmd::Invariance { file, trials } => {
            let m = read_matrix(r, file)?;
            let base = gcd_profile_jobs(&m, jobs);
            let mut kept = 0u64;
            for t in 0..*trials {
                let p = random_unimodular(m.size(), 12, seed.wrapping_add(t));
                if gcd_profile_jobs(&congruent_transform(&m, &p)?, jobs) == base {
                    kept += 1;
                }
            }
            r.put("profile", base.to_string());
            r.put("trials", *trials);
            r.put("preserved", kept);
            Ok(kept == *trials)
        }
    }
}

fn base_tangle(r: &mut Report, name: &str) -> Result<Tangle> {
    match name {
        "trivial" => Ok(trivial_base()),
        "trefoil" => Ok(trefoil_base()),
        path => {
            let text = r.read(Path::new(path))?;
            Tangle::parse(&text).with_context(|| path.to_string())
        }
    }
}

fn default_mgr() -> AnyAlgebra {
    let rack = product_rack(&dihedral_quandle(3).unwrap(), &cyclic_rack(2).unwrap());
    AnyAlgebra::Mgr(mgr_from_rack(&rack).unwrap())
}

fn family(r: &mut Report, cmd: &FamilyCmd, jobs: usize) -> Outcome {
    match cmd {
        FamilyCmd::Gen { which, n, base, output } => {
            let b = base_tangle(r, base)?;
            let d = match which {
                Which::Dn => make_dn(*n, &b),
                Which::Dnp => make_dn_prime(*n, &b),
            };
            r.put("valid", d.is_valid() && d.satisfies_y());
            r.put("vertices", d.num_vertices() as u64);
            r.put("crossings", d.num_crossings() as u64);
            match output {
                Some(p) => {
                    write_out(p, &d.to_sgd())?;
                    r.put("written", p.display().to_string());
                }
                None => {
                    let text = d.to_sgd();
                    r.put_line("diagram", text.clone(), text.trim_end());
                }
            }
            Ok(true)
        }
        FamilyCmd::Corpus { output } => {
            std::fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;
            for (name, d) in corpus() {
                let p = output.join(format!("{name}.sgd"));
                let text = d.to_sgd();
                write_out(&p, &text)?;
                r.put(format!("file.{name}"), report::sha256_hex(text.as_bytes()));
            }
            Ok(true)
        }
        FamilyCmd::Ratio { alg, base, from, to } => {
            let x = match alg {
                Some(p) => read_alg(r, p)?,
                None => default_mgr(),
            };
            let b = base_tangle(r, base)?;
            let mut all_two = true;
            for n in *from..=*to {
                let a = count_colorings_jobs(&make_dn(n, &b), &x, jobs)?;
                let c = count_colorings_jobs(&make_dn_prime(n, &b), &x, jobs)?;
                let ratio = if a == Default::default() {
                    "undefined".to_string()
                } else if &c % &a == Default::default() {
                    (&c / &a).to_string()
                } else {
                    format!("{c}/{a}")
                };
                all_two &= ratio == "2";
                r.put_line(
                    format!("n={n}"),
                    json!({ "dn": a.to_string(), "dnp": c.to_string(), "ratio": ratio }),
                    format!("n={n} dn={a} dnp={c} ratio={ratio}"),
                );
            }
            r.put("all_ratio_2", all_two);
            Ok(true)
        }
    }
}

fn diagram(r: &mut Report, cmd: &DiagramCmd) -> Outcome {
    match cmd {
        DiagramCmd::Check { file } => {
            let text = r.read(file)?;
            let d = parse_diagram_unchecked(&text).with_context(|| file.display().to_string())?;
            let violations = d.validate();
            for (i, v) in violations.iter().enumerate() {
                r.put_line(format!("violation.{i}"), v.to_string(), format!("violation {v}"));
            }
            let y = violations.is_empty() && d.satisfies_y();
            r.put("valid", violations.is_empty());
            r.put("y_oriented", y);
            Ok(y)
        }
        DiagramCmd::Stats { file } => {
            let d = read_diagram(r, file)?;
            let s = d.surface_stats();
            r.put("components", s.components as u64);
            r.put("euler", s.euler);
            r.put("boundary", s.boundary as u64);
            r.put("genus", s.genus);
            Ok(true)
        }
    }
}
