//! Batch front end.  Commands either compute (printing a file or a
//! report to stdout) or verify (printing witnesses and a final result
//! line).  Exit codes: 0 all checks passed, 1 a verification failed,
//! 2 unreadable or malformed input, 3 a standing hypothesis failed.
//!
//! Reports are line-oriented and deterministic: a fixed seed and fixed
//! inputs reproduce stdout and any trace file byte for byte.  The env
//! var DGKIT_FIELD overrides the field declared in input files and the
//! default field of the verification suites.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use dgkit::category::DgPresentation;
use dgkit::dgmodule::check_hlc;
use dgkit::field::FieldSpec;
use dgkit::fixtures;
use dgkit::holim::{split_cone_compare, verify_hocolim_cohomology, verify_truncation_colimit};
use dgkit::io;
use dgkit::resolution::{
    reconstruct, render_trace, resolve, verify_comparison, verify_quasi_ff, CohVerdict,
};
use dgkit::sample::{truncation_sequence, Sampler};
use dgkit::tstructure::{derived_projective_check, heart_compare};
use dgkit::twisted::{make_one_sided, stupid_truncate, totalize, tw_cone, TwistedComplex};

#[derive(Parser)]
#[command(
    name = "dgkit",
    version,
    about = "Exact twisted-complex calculus over small dg-categories"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the category axioms of a .dgc file.
    Validate { file: PathBuf },
    /// Print hom dimensions of the degree-zero homotopy category.
    H0 { file: PathBuf },
    /// Check local coherence: nonpositive hom cohomology, weak kernels,
    /// finitely presented representable cohomology.
    Hlc { file: PathBuf },
    /// Print cohomology dimensions of a module (.dgm) or of the
    /// totalization of a twisted complex (.twc).
    Cohomology {
        file: PathBuf,
        /// Inclusive degree range, written a..b.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        range: (i32, i32),
    },
    /// Totalize a twisted complex; the module is written to stdout.
    Tot { file: PathBuf },
    /// Cone of a closed degree-0 one-sided morphism whose source is the
    /// given complex; the cone is written to stdout.
    Cone { file: PathBuf, map: PathBuf },
    /// Drop all entries below an index; the truncation is written to stdout.
    Truncate {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: i32,
    },
    /// Straighten a closed morphism out of the given complex to a
    /// one-sided representative; the result is written to stdout.
    ReduceOnesided { file: PathBuf, map: PathBuf },
    /// Resolve a module by representables, one cohomological level per
    /// step, and verify each comparison map.
    Resolve {
        category: PathBuf,
        module: PathBuf,
        /// Number of levels to descend below the top one.
        #[arg(long)]
        window: usize,
        /// Write the full resolution trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Resolve a module and certify that the comparison map is a
    /// quasi-isomorphism on the reliable window.
    Reconstruct {
        category: PathBuf,
        module: PathBuf,
        #[arg(long)]
        window: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a seeded verification suite over a file or, by default, over
    /// the built-in fixture categories.
    Verify {
        suite: Suite,
        /// A .twc file for the truncation suite, a .dgc file otherwise.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    QuasiFf,
    Truncation,
    Hocolim,
    Comparison,
    Heart,
    DerivedProj,
}

/// A command stopped early: the exit code plus any lines not yet
/// printed.  Code 2 goes to stderr, verdict codes to stdout.
struct Failure {
    code: u8,
    lines: Vec<String>,
}

type CmdResult = Result<(), Failure>;

fn bad_input(msg: impl Into<String>) -> Failure {
    Failure { code: 2, lines: vec![msg.into()] }
}

fn verdict(code: u8) -> Failure {
    Failure { code, lines: Vec::new() }
}

impl From<io::FormatError> for Failure {
    fn from(e: io::FormatError) -> Failure {
        bad_input(e.message)
    }
}

fn parse_range(s: &str) -> Result<(i32, i32), String> {
    let Some((a, b)) = s.split_once("..") else {
        return Err(format!("range {s:?} is not of the form a..b"));
    };
    let lo: i32 = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let hi: i32 = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    if lo > hi {
        return Err(format!("range {s:?} has start above end"));
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let over = match io::field_override_from_env() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, over) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for line in &f.lines {
                if f.code == 2 {
                    eprintln!("error: {line}");
                } else {
                    println!("{line}");
                }
            }
            ExitCode::from(f.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| bad_input(format!("cannot read {}: {e}", path.display())))
}

fn sibling(path: &Path, relative: &str) -> PathBuf {
    match path.parent() {
        Some(dir) => dir.join(relative),
        None => PathBuf::from(relative),
    }
}

fn load_category(path: &Path, over: Option<FieldSpec>) -> Result<Arc<DgPresentation>, Failure> {
    let text = read_text(path)?;
    Ok(Arc::new(io::category_from_str(&text, over)?))
}

fn load_valid_category(
    path: &Path,
    over: Option<FieldSpec>,
) -> Result<Arc<DgPresentation>, Failure> {
    let q = load_category(path, over)?;
    q.validate()
        .map_err(|e| bad_input(format!("{} is not a dg-category: {e}", path.display())))?;
    Ok(q)
}

/// A twisted complex together with the category path its file declared,
/// so derived outputs can reference the same category.
fn load_twisted(
    path: &Path,
    over: Option<FieldSpec>,
) -> Result<(TwistedComplex, Arc<DgPresentation>, String), Failure> {
    let text = read_text(path)?;
    let cat_rel = io::twisted_category_path(&text)?;
    let cat = load_valid_category(&sibling(path, &cat_rel), over)?;
    let x = io::twisted_from_str(&text, &cat)?;
    Ok((x, cat, cat_rel))
}

fn file_stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string()
}

fn run(command: Command, over: Option<FieldSpec>) -> CmdResult {
    match command {
        Command::Validate { file } => cmd_validate(&file, over),
        Command::H0 { file } => cmd_h0(&file, over),
        Command::Hlc { file } => cmd_hlc(&file, over),
        Command::Cohomology { file, range } => cmd_cohomology(&file, range, over),
        Command::Tot { file } => cmd_tot(&file, over),
        Command::Cone { file, map } => cmd_cone(&file, &map, over),
        Command::Truncate { file, at } => cmd_truncate(&file, at, over),
        Command::ReduceOnesided { file, map } => cmd_reduce(&file, &map, over),
        Command::Resolve { category, module, window, trace } => {
            cmd_resolve(&category, &module, window, trace.as_deref(), over)
        }
        Command::Reconstruct { category, module, window, trace } => {
            cmd_reconstruct(&category, &module, window, trace.as_deref(), over)
        }
        Command::Verify { suite, file, samples, seed } => {
            cmd_verify(suite, file.as_deref(), samples, seed, over)
        }
    }
}

fn cmd_validate(file: &Path, over: Option<FieldSpec>) -> CmdResult {
    let q = load_category(file, over)?;
    let cells: usize = q.homs.values().map(|s| s.basis.len()).sum();
    match q.validate() {
        Ok(()) => {
            println!(
                "category {}: {} objects, {} hom basis elements, field {}",
                file_stem(file),
                q.object_count(),
                cells,
                q.field
            );
            println!("result: PASS");
            Ok(())
        }
        Err(e) => {
            println!("witness: {e}");
            println!("result: FAIL");
            Err(verdict(1))
        }
    }
}

fn cmd_h0(file: &Path, over: Option<FieldSpec>) -> CmdResult {
    let q = load_valid_category(file, over)?;
    let h0 = q.h0_category();
    for a in 0..q.object_count() {
        for b in 0..q.object_count() {
            println!("h0 {}->{}: dim {}", q.objects[a], q.objects[b], h0.dim(a, b));
        }
    }
    Ok(())
}

fn cmd_hlc(file: &Path, over: Option<FieldSpec>) -> CmdResult {
    let q = load_valid_category(file, over)?;
    let report = check_hlc(&q);
    match &report.nonpositive {
        Ok(()) => println!("hom cohomology vanishes in positive degrees"),
        Err((a, b, deg, dim)) => println!(
            "witness: H^{deg} of hom({}, {}) has dimension {dim}",
            q.objects[*a], q.objects[*b]
        ),
    }
    for w in &report.weak_kernels {
        if !w.ok {
            println!(
                "witness: no weak kernel for class {} of hom({}, {})",
                w.class, q.objects[w.pair.0], q.objects[w.pair.1]
            );
        }
    }
    for (a, deg, ok) in &report.representables_fp {
        if !ok {
            println!(
                "witness: representable {} has non-finitely-presented cohomology in degree {deg}",
                q.objects[*a]
            );
        }
    }
    if report.all_ok() {
        println!("weak kernels: {} classes checked", report.weak_kernels.len());
        println!("result: PASS");
        Ok(())
    } else {
        println!("result: FAIL");
        Err(verdict(3))
    }
}

fn cmd_cohomology(file: &Path, range: (i32, i32), over: Option<FieldSpec>) -> CmdResult {
    let ext = file.extension().and_then(|e| e.to_str()).unwrap_or("");
    let (module, cat) = match ext {
        "dgm" => {
            let (m, cat) = io::read_module(file, over)?;
            cat.validate()
                .map_err(|e| bad_input(format!("referenced category is invalid: {e}")))?;
            (m, cat)
        }
        "twc" => {
            let (x, cat, _) = load_twisted(file, over)?;
            (totalize(&x).module, cat)
        }
        _ => return Err(bad_input("cohomology expects a .dgm or .twc file")),
    };
    for n in range.0..=range.1 {
        for (obj, v) in module.values.iter().enumerate() {
            println!("H^{n}({}) dim={}", cat.objects[obj], v.cohomology(n).dim());
        }
    }
    Ok(())
}

fn cmd_tot(file: &Path, over: Option<FieldSpec>) -> CmdResult {
    let (x, _, cat_rel) = load_twisted(file, over)?;
    let t = totalize(&x);
    print!("{}", io::module_to_string(&t.module, &cat_rel));
    Ok(())
}

fn load_map_against(
    map: &Path,
    x: &TwistedComplex,
    over: Option<FieldSpec>,
) -> Result<(dgkit::twisted::TwMorphism, String), Failure> {
    let text = read_text(map)?;
    let cat_rel = io::tw_morphism_category_path(&text)?;
    let cat = load_valid_category(&sibling(map, &cat_rel), over)?;
    let f = io::tw_morphism_from_str(&text, &cat)?;
    if &f.source != x {
        return Err(bad_input("the morphism's source is not the given twisted complex"));
    }
    Ok((f, cat_rel))
}

fn cmd_cone(file: &Path, map: &Path, over: Option<FieldSpec>) -> CmdResult {
    let (x, _, _) = load_twisted(file, over)?;
    let (f, cat_rel) = load_map_against(map, &x, over)?;
    if f.degree != 0 {
        return Err(bad_input(format!("cone needs a degree-0 morphism, got degree {}", f.degree)));
    }
    if !f.is_closed() {
        return Err(bad_input("cone needs a closed morphism"));
    }
    if !f.is_one_sided() {
        return Err(bad_input("cone needs a one-sided morphism; try reduce-onesided first"));
    }
    let c = tw_cone(&f);
    print!("{}", io::twisted_to_string(&c.complex, &cat_rel));
    Ok(())
}

fn cmd_truncate(file: &Path, at: i32, over: Option<FieldSpec>) -> CmdResult {
    let (x, _, cat_rel) = load_twisted(file, over)?;
    print!("{}", io::twisted_to_string(&stupid_truncate(&x, at), &cat_rel));
    Ok(())
}

fn cmd_reduce(file: &Path, map: &Path, over: Option<FieldSpec>) -> CmdResult {
    let (x, _, _) = load_twisted(file, over)?;
    let (f, cat_rel) = load_map_against(map, &x, over)?;
    if !f.is_closed() {
        return Err(bad_input("reduce-onesided needs a closed morphism"));
    }
    match make_one_sided(&f) {
        Ok(r) => {
            print!("{}", io::tw_morphism_to_string(&r.reduced, &cat_rel));
            Ok(())
        }
        Err(e) => {
            println!("witness: {e}");
            println!("result: FAIL");
            Err(verdict(1))
        }
    }
}

fn render_verdicts(verdicts: &[(i32, CohVerdict)]) -> String {
    let mut out = String::new();
    for (k, (i, v)) in verdicts.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let tag = match v {
            CohVerdict::Iso => "iso",
            CohVerdict::Epi => "epi",
            CohVerdict::Defect => "defect",
        };
        let _ = write!(out, "{i}:{tag}");
    }
    out
}

/// Degrees where a step's comparison map falls short of its contract:
/// isomorphisms strictly above the level, at least a surjection at it.
fn step_defects(level: i32, verdicts: &[(i32, CohVerdict)]) -> Vec<i32> {
    verdicts
        .iter()
        .filter(|(i, v)| {
            (*i > level && *v != CohVerdict::Iso) || (*i == level && *v == CohVerdict::Defect)
        })
        .map(|(i, _)| *i)
        .collect()
}

fn load_module_pair(
    category: &Path,
    module: &Path,
    over: Option<FieldSpec>,
) -> Result<(Arc<DgPresentation>, dgkit::dgmodule::DgModule), Failure> {
    let cat = load_valid_category(category, over)?;
    let text = read_text(module)?;
    let m = io::module_from_str(&text, &cat)?;
    Ok((cat, m))
}

fn write_trace_file(path: &Path, trace: &dgkit::resolution::ResolutionTrace) -> CmdResult {
    std::fs::write(path, render_trace(trace))
        .map_err(|e| bad_input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_resolve(
    category: &Path,
    module: &Path,
    window: usize,
    trace_path: Option<&Path>,
    over: Option<FieldSpec>,
) -> CmdResult {
    let (_, m) = load_module_pair(category, module, over)?;
    let trace = match resolve(&m, window) {
        Ok(t) => t,
        Err(e) => {
            println!("{e}");
            println!("result: FAIL");
            return Err(verdict(3));
        }
    };
    if let Some(p) = trace_path {
        write_trace_file(p, &trace)?;
    }
    println!("levels {}..{}", trace.hi, trace.lo);
    match trace.terminated_at {
        Some(n) => println!("terminated: defect acyclic at level {n}"),
        None => println!("ran the full window without termination"),
    }
    let mut ok = true;
    for step in &trace.steps {
        println!(
            "step level={} cover={} verdicts={}",
            step.level,
            step.cover.len(),
            render_verdicts(&step.verdicts)
        );
        for i in step_defects(step.level, &step.verdicts) {
            println!("witness: level {} comparison fails in degree {i}", step.level);
            ok = false;
        }
    }
    if ok {
        println!("result: PASS");
        Ok(())
    } else {
        println!("result: FAIL");
        Err(verdict(1))
    }
}

fn cmd_reconstruct(
    category: &Path,
    module: &Path,
    window: usize,
    trace_path: Option<&Path>,
    over: Option<FieldSpec>,
) -> CmdResult {
    let (_, m) = load_module_pair(category, module, over)?;
    let rec = match reconstruct(&m, window) {
        Ok(r) => r,
        Err(e) => {
            println!("{e}");
            println!("result: FAIL");
            return Err(verdict(3));
        }
    };
    if let Some(p) = trace_path {
        write_trace_file(p, &rec.trace)?;
    }
    println!("window {}..{}", rec.window.0, rec.window.1);
    println!("assembled {} entries across indices", rec.x.size());
    for (i, d) in &rec.cone_cohomology {
        println!("cone H^{i} dim={d}");
        if *d != 0 {
            println!("witness: comparison cone has cohomology in degree {i}");
        }
    }
    if rec.qis_ok {
        println!("result: PASS");
        Ok(())
    } else {
        println!("result: FAIL");
        Err(verdict(1))
    }
}

fn suite_categories(
    suite: Suite,
    file: Option<&Path>,
    over: Option<FieldSpec>,
) -> Result<Vec<(String, Arc<DgPresentation>)>, Failure> {
    match file {
        Some(path) => {
            let cat = load_valid_category(path, over)?;
            Ok(vec![(file_stem(path), cat)])
        }
        None => {
            let field = over.unwrap_or(FieldSpec::Prime(101));
            let _ = suite;
            Ok(fixtures::shipped(field)
                .into_iter()
                .map(|(name, q)| (name.to_string(), Arc::new(q)))
                .collect())
        }
    }
}

fn cmd_verify(
    suite: Suite,
    file: Option<&Path>,
    samples: usize,
    seed: u64,
    over: Option<FieldSpec>,
) -> CmdResult {
    if samples == 0 {
        return Err(bad_input("--samples must be at least 1"));
    }
    let ok = match suite {
        Suite::Truncation => verify_suite_truncation(file, samples, seed, over)?,
        Suite::QuasiFf => verify_suite_quasi_ff(file, samples, seed, over)?,
        Suite::Hocolim => verify_suite_hocolim(file, samples, seed, over)?,
        Suite::Comparison => verify_suite_comparison(file, samples, seed, over)?,
        Suite::Heart => verify_suite_heart(file, samples, seed, over)?,
        Suite::DerivedProj => verify_suite_derived_proj(file, samples, seed, over)?,
    };
    if ok {
        println!("result: PASS");
        Ok(())
    } else {
        println!("result: FAIL");
        Err(verdict(1))
    }
}

fn verify_suite_truncation(
    file: Option<&Path>,
    samples: usize,
    seed: u64,
    over: Option<FieldSpec>,
) -> Result<bool, Failure> {
    let mut ok = true;
    if let Some(path) = file {
        let (x, _, _) = load_twisted(path, over)?;
        let rep = verify_truncation_colimit(&x);
        println!(
            "suite=truncation file={} union={} ses={} split={} triangle={} qis={}",
            file_stem(path),
            rep.union_ok,
            rep.ses_ok,
            rep.split_ok,
            rep.triangle_ok,
            rep.qis_ok
        );
        ok &= rep.all_ok();
        return Ok(ok);
    }
    for (fi, (name, cat)) in suite_categories(Suite::Truncation, None, over)?.iter().enumerate() {
        let mut s = Sampler::new(seed.wrapping_add(fi as u64));
        for k in 0..samples {
            let x = s.twisted_complex(cat, 4, 2);
            let rep = verify_truncation_colimit(&x);
            println!(
                "suite=truncation fixture={name} sample={k} union={} ses={} split={} triangle={} qis={}",
                rep.union_ok, rep.ses_ok, rep.split_ok, rep.triangle_ok, rep.qis_ok
            );
            ok &= rep.all_ok();
        }
    }
    Ok(ok)
}

fn verify_suite_quasi_ff(
    file: Option<&Path>,
    samples: usize,
    seed: u64,
    over: Option<FieldSpec>,
) -> Result<bool, Failure> {
    let mut ok = true;
    for (fi, (name, cat)) in suite_categories(Suite::QuasiFf, file, over)?.iter().enumerate() {
        let mut s = Sampler::new(seed.wrapping_add(fi as u64));
        let pairs: Vec<_> = (0..samples)
            .map(|_| (s.twisted_complex(cat, 4, 2), s.twisted_complex(cat, 4, 2)))
            .collect();
        let rep = verify_quasi_ff(&pairs, (-6, 6));
        println!(
            "suite=quasi-ff fixture={name} pairs={} mismatches={}",
            rep.checked,
            rep.mismatches.len()
        );
        for (idx, p, a, b) in &rep.mismatches {
            println!(
                "witness: pair {idx} degree {p}: twisted hom dim {a}, module hom dim {b}"
            );
        }
        ok &= rep.mismatches.is_empty();
    }
    Ok(ok)
}

fn verify_suite_hocolim(
    file: Option<&Path>,
    samples: usize,
    seed: u64,
    over: Option<FieldSpec>,
) -> Result<bool, Failure> {
    let mut ok = true;
    for (fi, (name, cat)) in suite_categories(Suite::Hocolim, file, over)?.iter().enumerate() {
        let mut s = Sampler::new(seed.wrapping_add(fi as u64));
        for k in 0..samples {
            let x = s.twisted_complex(cat, 4, 2);
            let mut line_ok = true;
            if let Some((seq, hi)) = truncation_sequence(&x) {
                let rep = verify_hocolim_cohomology(&seq, hi, (hi - 7, hi + 1), None);
                if !rep.hypothesis_ok() {
                    for d in &rep.hypothesis_failures {
                        println!(
                            "witness: sample {k} sequence step {} needs {} in degree {}",
                            d.position, d.needed, d.degree
                        );
                    }
                    line_ok = false;
                }
                if !rep.conclusion_failures.is_empty() || !rep.stable_rank_ok {
                    for d in &rep.conclusion_failures {
                        println!(
                            "witness: sample {k} colimit inclusion {} fails ({}) in degree {}",
                            d.position, d.needed, d.degree
                        );
                    }
                    line_ok = false;
                }
            }
            let (f, g, sigma, rho) = s.split_quadruple(cat);
            match split_cone_compare(&f, &g, &sigma, &rho) {
                Ok(cmp) => {
                    if !cmp.phi_psi_defect.is_zero() {
                        println!("witness: sample {k} cone comparison is not split on the nose");
                        line_ok = false;
                    }
                }
                Err(e) => {
                    println!("witness: sample {k} split data rejected: {e}");
                    line_ok = false;
                }
            }
            println!("suite=hocolim fixture={name} sample={k} ok={line_ok}");
            ok &= line_ok;
        }
    }
    Ok(ok)
}

fn verify_suite_comparison(
    file: Option<&Path>,
    samples: usize,
    seed: u64,
    over: Option<FieldSpec>,
) -> Result<bool, Failure> {
    let mut ok = true;
    for (fi, (name, cat)) in suite_categories(Suite::Comparison, file, over)?.iter().enumerate() {
        let mut s = Sampler::new(seed.wrapping_add(fi as u64));
        let mods: Vec<_> = (0..samples).map(|_| s.hfp_module(cat)).collect();
        let rep = verify_comparison(cat, &mods, 6);
        println!(
            "suite=comparison fixture={name} samples={} texact_failures={} hom_mismatches={} image_failures={}",
            samples,
            rep.texact_failures.len(),
            rep.hom_mismatches.len(),
            rep.image_failures.len()
        );
        for note in &rep.notes {
            println!("note: {note}");
        }
        ok &= rep.texact_failures.is_empty()
            && rep.hom_mismatches.is_empty()
            && rep.image_failures.is_empty();
    }
    Ok(ok)
}

fn verify_suite_heart(
    file: Option<&Path>,
    samples: usize,
    seed: u64,
    over: Option<FieldSpec>,
) -> Result<bool, Failure> {
    let mut ok = true;
    for (fi, (name, cat)) in suite_categories(Suite::Heart, file, over)?.iter().enumerate() {
        let mut s = Sampler::new(seed.wrapping_add(fi as u64));
        let mods: Vec<_> = (0..samples).map(|_| s.heart_module(cat)).collect();
        let rep = heart_compare(cat, &mods);
        println!(
            "suite=heart fixture={name} samples={} pairs={} mismatches={} fp_failures={} outside_heart={}",
            samples,
            rep.pair_dims.len(),
            rep.mismatches.len(),
            rep.fp_failures.len(),
            rep.not_in_heart.len()
        );
        for w in &rep.warnings {
            println!("note: {w}");
        }
        for (a, b) in &rep.mismatches {
            println!("witness: hom dims differ between samples {a} and {b}");
        }
        for i in &rep.fp_failures {
            println!("witness: sample {i} has no finite presentation in the heart");
        }
        ok &= rep.all_ok();
    }
    Ok(ok)
}

fn verify_suite_derived_proj(
    file: Option<&Path>,
    samples: usize,
    seed: u64,
    over: Option<FieldSpec>,
) -> Result<bool, Failure> {
    let mut ok = true;
    for (fi, (name, cat)) in suite_categories(Suite::DerivedProj, file, over)?.iter().enumerate() {
        let mut s = Sampler::new(seed.wrapping_add(fi as u64));
        let mods: Vec<_> = (0..samples).map(|_| s.hfp_module(cat)).collect();
        for a in 0..cat.object_count() {
            let rep = derived_projective_check(cat, a, &mods);
            println!(
                "suite=derived-proj fixture={name} object={} samples={} mismatches={}",
                cat.objects[a],
                samples,
                rep.mismatches.len()
            );
            for w in &rep.warnings {
                println!("note: {w}");
            }
            for i in &rep.mismatches {
                println!(
                    "witness: enriched and degree-zero hom dims differ on sample {i} for object {}",
                    cat.objects[a]
                );
            }
            ok &= rep.all_ok();
        }
    }
    Ok(ok)
}
