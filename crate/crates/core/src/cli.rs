//! The `fqline` command line. [`run`] returns the exit code and the text
//! that would be printed, so the binary is a thin wrapper.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cochain::{alpha_cyclic, Cochain};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupHom};
use crate::groupoid::GroupoidCocycle;
use crate::lift::{LiftPath, TorusRep};
use crate::moduli::{
    dehn_character, enumerate_bundles, klein_character, orbit_characters, orbit_stabilizer, r_diff_with, window_for,
    SurfaceRep, SL2Z,
};

/// How many times a failed window solve is retried with `W + 2`.
pub const WINDOW_RETRIES: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "fqline", about = "Exact line-bundle data of finite-group Chern-Simons theory on surfaces")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Plain, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Csv,
}

/// Where the 3-cocycle comes from.
#[derive(Debug, Clone, Args)]
pub struct LevelArgs {
    /// Level N of the cyclic cocycle pulled back along the character.
    #[arg(long, required_unless_present = "cocycle")]
    pub level: Option<i64>,

    /// Character to ℤ/m as `m:i0,i1,...` (images of each element).
    #[arg(long)]
    pub character: Option<String>,

    /// Read α from a cochain file instead.
    #[arg(long, conflicts_with_all = ["level", "character"])]
    pub cocycle: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that α is a closed normalized 3-cocycle and whether it is exact.
    VerifyAlpha {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        alpha: LevelArgs,
    },
    /// List holonomy tuples of a genus 1 or 2 surface.
    Enumerate {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 1)]
        genus: usize,
    },
    /// Conjugation orbits with their stabilizers.
    Orbits {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 1)]
        genus: usize,
    },
    /// The matrix character r_diff(ρ, A) for ρ = (g, h).
    Character {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        alpha: LevelArgs,
        /// Holonomies as `g,h`.
        #[arg(long)]
        rep: String,
        /// Matrix entries `a,b,c,d`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
        #[arg(long)]
        window: Option<i64>,
        #[arg(long, default_value = "auto")]
        path: String,
    },
    /// The closed form N·b/n² on Γ₁(n).
    Klein {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        level: i64,
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Dehn twist character Σ_j α(g, gʲ, g).
    Dehn {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        alpha: LevelArgs,
        #[arg(long)]
        elt: usize,
    },
    /// Dimension of the space of sections over genus-1 moduli.
    Dim {
        #[arg(long)]
        group: String,
        #[command(flatten)]
        alpha: LevelArgs,
    },
    /// Validate a groupoid cocycle file and count sections.
    GroupoidCheck {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.exit_code() {
                0 => CliOutput { code: 0, stdout: text, stderr: String::new() },
                code => CliOutput { code, stdout: String::new(), stderr: text },
            };
        }
    };
    match dispatch(&cli) {
        Ok(stdout) => CliOutput { code: 0, stdout, stderr: String::new() },
        Err(e) => CliOutput { code: 1, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// The character used for `--level` when none is given: the identity for
/// cyclic groups, the first factor for the Klein four-group and the sign
/// for S₃.
pub fn default_character(group: &Arc<FiniteGroup>) -> Result<GroupHom> {
    let c2 = || Arc::new(FiniteGroup::cyclic(2).expect("order 2"));
    match group.label() {
        l if l.starts_with("cyclic:") => Ok(GroupHom::identity(group.clone())),
        "klein4" => GroupHom::new(group.clone(), c2(), vec![0, 0, 1, 1]),
        "s3" => GroupHom::new(group.clone(), c2(), vec![0, 1, 1, 0, 0, 1]),
        l => Err(Error::Parse(format!("group {l} needs an explicit --character or --cocycle"))),
    }
}

pub fn parse_character(group: &Arc<FiniteGroup>, text: &str) -> Result<GroupHom> {
    let bad = || Error::Parse(format!("character must look like m:i0,i1,..., got {text:?}"));
    let (m, images) = text.split_once(':').ok_or_else(bad)?;
    let m: usize = m.trim().parse().map_err(|_| bad())?;
    let images: Vec<usize> = images.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
    GroupHom::new(group.clone(), Arc::new(FiniteGroup::cyclic(m)?), images)
}

pub fn resolve_alpha(group: &Arc<FiniteGroup>, args: &LevelArgs) -> Result<Cochain> {
    if let Some(path) = &args.cocycle {
        let c = Cochain::from_file(path)?;
        if **c.group() != **group {
            return Err(Error::GroupMismatch(format!("cocycle file is over {}", c.group().label())));
        }
        return Ok(c);
    }
    let level = args.level.ok_or_else(|| Error::Parse("missing --level".into()))?;
    let phi = match &args.character {
        Some(text) => parse_character(group, text)?,
        None => default_character(group)?,
    };
    let a = alpha_cyclic(phi.target().order(), level)?;
    if phi.source() == phi.target() && phi.images().iter().enumerate().all(|(i, &x)| i == x) {
        return Ok(a);
    }
    a.pullback(&GroupHom::new(phi.source().clone(), a.group().clone(), phi.images().to_vec())?)
}

fn parse_pair(text: &str) -> Result<(usize, usize)> {
    let v: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad element {t:?}"))))
        .collect::<Result<_>>()?;
    match v[..] {
        [g, h] => Ok((g, h)),
        _ => Err(Error::Parse(format!("--rep needs two elements, got {text:?}"))),
    }
}

fn group(spec: &str) -> Result<Arc<FiniteGroup>> {
    Ok(Arc::new(FiniteGroup::from_spec(spec)?))
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

/// Runs the command, growing the window by 2 when a windowed lift cannot
/// be certified or does not cover the arguments.
pub fn character_with_retry(rep: &TorusRep, alpha: &Cochain, m: &SL2Z, path: LiftPath, window: Option<i64>) -> Result<crate::QZ> {
    let mut w = window.unwrap_or_else(|| window_for(m));
    let mut attempt = 0;
    loop {
        match r_diff_with(rep, alpha, m, path, Some(w)) {
            Err(Error::OutsideWindow(..) | Error::LiftVerification(_) | Error::WindowInfeasible(_)) if attempt < WINDOW_RETRIES => {
                w += 2;
                attempt += 1;
            }
            other => return other,
        }
    }
}

fn dispatch(cli: &Cli) -> Result<String> {
    let csv = cli.format == Format::Csv;
    let mut out = String::new();
    match &cli.command {
        Command::VerifyAlpha { group: spec, alpha } => {
            let g = group(spec)?;
            let a = resolve_alpha(&g, alpha)?;
            let report = a.validate();
            let class = if report.closed { if a.coboundary_solve()?.is_exact() { "exact" } else { "nontrivial" } } else { "n/a" };
            if csv {
                writeln!(out, "closed,normalized,class").unwrap();
                writeln!(out, "{},{},{}", report.closed, report.normalized, class).unwrap();
            } else {
                writeln!(out, "closed: {}", report.closed).unwrap();
                writeln!(out, "normalized: {}", report.normalized).unwrap();
                writeln!(out, "class: {class}").unwrap();
            }
        }
        Command::Enumerate { group: spec, genus } => {
            let g = group(spec)?;
            let reps = enumerate_bundles(&g, *genus)?;
            if csv {
                let cols: Vec<String> = (1..=*genus).flat_map(|i| [format!("g{i}"), format!("h{i}")]).collect();
                writeln!(out, "{}", cols.join(",")).unwrap();
                for r in &reps {
                    writeln!(out, "{}", join(r.images(), ",")).unwrap();
                }
            } else {
                for r in &reps {
                    writeln!(out, "{}", join(r.images(), " ")).unwrap();
                }
                writeln!(out, "total: {}", reps.len()).unwrap();
            }
        }
        Command::Orbits { group: spec, genus } => {
            let g = group(spec)?;
            let mut seen = std::collections::BTreeSet::new();
            if csv {
                writeln!(out, "representative,orbit_size,stabilizer").unwrap();
            }
            let mut count = 0;
            for rep in enumerate_bundles(&g, *genus)? {
                if seen.contains(rep.images()) {
                    continue;
                }
                let os = orbit_stabilizer(&rep);
                seen.extend(os.orbit.iter().map(|r: &SurfaceRep| r.images().to_vec()));
                count += 1;
                if csv {
                    writeln!(out, "{},{},{}", join(rep.images(), " "), os.orbit.len(), join(&os.stabilizer, " ")).unwrap();
                } else {
                    writeln!(out, "({}) orbit {} stabilizer {{{}}}", join(rep.images(), ","), os.orbit.len(), join(&os.stabilizer, ","))
                        .unwrap();
                }
            }
            if !csv {
                writeln!(out, "orbits: {count}").unwrap();
            }
        }
        Command::Character { group: spec, alpha, rep, matrix, window, path } => {
            let g = group(spec)?;
            let a = resolve_alpha(&g, alpha)?;
            let (x, y) = parse_pair(rep)?;
            let rep = TorusRep::new(g, x, y)?;
            let m: SL2Z = matrix.parse()?;
            let v = character_with_retry(&rep, &a, &m, path.parse()?, *window)?;
            value_line(&mut out, csv, "character", v);
        }
        Command::Klein { n, level, matrix } => {
            let m: SL2Z = matrix.parse()?;
            value_line(&mut out, csv, "character", klein_character(*n, *level, &m)?);
        }
        Command::Dehn { group: spec, alpha, elt } => {
            let g = group(spec)?;
            let a = resolve_alpha(&g, alpha)?;
            value_line(&mut out, csv, "character", dehn_character(&a, *elt)?);
        }
        Command::Dim { group: spec, alpha } => {
            let g = group(spec)?;
            let a = resolve_alpha(&g, alpha)?;
            let orbits = orbit_characters(&g, &a)?;
            let dim = orbits.iter().filter(|o| o.vanishes()).count();
            if csv {
                writeln!(out, "representative,orbit_size,character_vanishes").unwrap();
                for o in &orbits {
                    let r = o.representative.pair();
                    writeln!(out, "{} {},{},{}", r.0, r.1, o.orbit_size, o.vanishes()).unwrap();
                }
                writeln!(out, "dimension,,{dim}").unwrap();
            } else {
                writeln!(out, "{dim}").unwrap();
            }
        }
        Command::GroupoidCheck { file } => {
            let r = GroupoidCocycle::from_file(file)?;
            let report = r.validate();
            let p = r.presentation();
            if csv {
                writeln!(out, "objects,morphisms,valid,violations,sections").unwrap();
                let dim = if report.is_valid() { r.sections_dim()?.to_string() } else { String::new() };
                writeln!(out, "{},{},{},{},{dim}", p.objects(), p.morphisms().len(), report.is_valid(), report.violations.len()).unwrap();
            } else {
                writeln!(out, "objects: {}", p.objects()).unwrap();
                writeln!(out, "morphisms: {}", p.morphisms().len()).unwrap();
                writeln!(out, "cocycle: {report}").unwrap();
                for v in &report.violations {
                    writeln!(out, "  {}", v.describe(p)).unwrap();
                }
                if report.is_valid() {
                    writeln!(out, "sections: {}", r.sections_dim()?).unwrap();
                }
            }
        }
    }
    Ok(out)
}

fn value_line(out: &mut String, csv: bool, name: &str, v: crate::QZ) {
    if csv {
        writeln!(out, "{name}\n{v}").unwrap();
    } else {
        writeln!(out, "{v}").unwrap();
    }
}
