//! Command-line front end: covers, certification, verification, lift
//! export, and size benchmarking. Logs go to stderr; machine-readable
//! output (JSON, SDPA, tables) goes to stdout or `--out`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::abelian::{make_group, FourierFunction, GroupElement, GroupSpec};
use crate::certify::{real_certificate, sparse_sos, verify_certificate, SosCertificate};
use crate::covers::{
    find_translations, halfcube_cover, hexagon_cover, power_cycle_cover, ChordalCover,
    TranslationStrategy,
};
use crate::error::{Error, Result};
use crate::graphs::{cayley_graph, min_fill_cover};
use crate::moments::{build_lift, export_sdpa, find_equalizing_involution, real_lift};

#[derive(Parser)]
#[command(
    name = "sparsos",
    version,
    about = "Sparse sum-of-squares certificates and PSD lifts on finite abelian groups"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Construct chordal covers of Cayley graphs.
    Cover {
        #[command(subcommand)]
        kind: CoverCmd,
    },
    /// Certify a nonnegative function as a sparse sum of squares.
    Certify {
        /// Function JSON file.
        #[arg(long)]
        function: PathBuf,
        /// Cover JSON file (mutually exclusive with --auto).
        #[arg(long, conflicts_with = "auto")]
        cover: Option<PathBuf>,
        /// Select a cover automatically from the function's support.
        #[arg(long)]
        auto: bool,
        /// Convert the certificate to real-valued terms.
        #[arg(long)]
        real: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a certificate against a function.
    Verify {
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
        /// Residual tolerance (default: SPARSOS_TOL or 1e-8).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Emit a PSD lift description of a moment polytope.
    Lift {
        #[arg(long, value_enum)]
        polytope: Polytope,
        /// Group order for tc, dimension for cut.
        #[arg(long, alias = "N")]
        n: Option<u64>,
        /// Degree for tc.
        #[arg(long)]
        d: Option<u64>,
        /// Group spec for custom, e.g. "Z6", "Z2^4", "Z4xZ3".
        #[arg(long)]
        group: Option<String>,
        /// Support file for custom: JSON list of coordinate vectors.
        #[arg(long)]
        support: Option<PathBuf>,
        /// Cover JSON file for custom.
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Emit a real symmetric lift via an equalizing involution.
        #[arg(long)]
        real: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Encode the y_1 = 1 pin as paired inequalities instead of
        /// eliminating it (SDPA only).
        #[arg(long)]
        paired_pins: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size comparisons against LP lower bounds.
    Bench {
        #[command(subcommand)]
        kind: BenchCmd,
    },
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Cover of the d-th power of the N-cycle (d = 1: the cycle itself).
    Cycle {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cover of the Cayley graph of weight-2 characters on Z_2^n.
    Halfcube {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Min-fill cover plus translation search for an arbitrary Cayley graph.
    Generic {
        #[arg(long)]
        group: String,
        #[arg(long)]
        support: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::Greedy)]
        strategy: Strategy,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Table of |T′| vs 3d·log₂d vs the quoted LP lower bound, N = d².
    Sizes {
        #[arg(long)]
        max_d: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Polytope {
    Tc,
    Cut,
    Custom,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Sdpa,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Greedy,
    Exhaustive,
}

/// Parses the group mini-language: "Z6", "Z2^4", "Z4xZ3".
pub fn parse_group_spec(spec: &str) -> Result<GroupSpec> {
    let mut moduli = Vec::new();
    for part in spec.split(['x', 'X']) {
        let body = part
            .strip_prefix('Z')
            .or_else(|| part.strip_prefix('z'))
            .ok_or_else(|| Error::Parse(format!("group factor `{part}` must start with Z")))?;
        let (modulus, power) = match body.split_once('^') {
            Some((m, e)) => (m, e),
            None => (body, "1"),
        };
        let m: u64 = modulus
            .parse()
            .map_err(|_| Error::Parse(format!("bad modulus in `{part}`")))?;
        let e: u32 = power
            .parse()
            .map_err(|_| Error::Parse(format!("bad exponent in `{part}`")))?;
        if e == 0 {
            return Err(Error::Parse(format!("zero exponent in `{part}`")));
        }
        moduli.extend(std::iter::repeat(m).take(e as usize));
    }
    make_group(&moduli)
}

fn default_tol() -> f64 {
    std::env::var("SPARSOS_TOL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(1e-8)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::from)
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

/// Signed representative of a cyclic residue, for readable support sets.
fn signed_residue(group: &GroupSpec, e: &GroupElement) -> i64 {
    let n = group.order() as i64;
    let k = e.coords()[0] as i64;
    if 2 * k > n {
        k - n
    } else {
        k
    }
}

fn describe_support(cover: &ChordalCover) -> String {
    let group = cover.group();
    if group.rank() == 1 {
        let mut vals: Vec<i64> = cover
            .fourier_support()
            .iter()
            .map(|e| signed_residue(group, e))
            .collect();
        vals.sort_unstable();
        format!(
            "{{{}}}",
            vals.iter()
                .map(i64::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        )
    } else {
        format!(
            "{{{}}}",
            cover
                .fourier_support()
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
}

/// Reads a support file: a JSON list of signed coordinate vectors.
fn read_support(group: &GroupSpec, path: &Path) -> Result<BTreeSet<GroupElement>> {
    let raw: Vec<Vec<i64>> = serde_json::from_str(&read_file(path)?)?;
    raw.iter().map(|c| group.element(c)).collect()
}

/// Deterministic cover selection from a function's Fourier support:
/// degree-d support on Z_N with d | N gets the power-cycle cover, weight ≤ 2
/// support on Z_2^n gets the half-cube cover, anything else a min-fill
/// cover with greedy translations.
fn auto_cover(f: &FourierFunction) -> Result<ChordalCover> {
    let group = f.group();
    let mut s = f.support(1e-10);
    s.remove(&group.identity());

    if group.rank() == 1 && !s.is_empty() {
        let d = s
            .iter()
            .map(|e| signed_residue(group, e).unsigned_abs())
            .max()
            .unwrap();
        let n = group.order();
        if d >= 1 && n % d == 0 && n / d >= 2 {
            return power_cycle_cover(n, d);
        }
    }
    if group.moduli().iter().all(|&m| m == 2) {
        let max_weight = s
            .iter()
            .map(|e| e.coords().iter().filter(|&&c| c != 0).count())
            .max()
            .unwrap_or(0);
        if max_weight <= 2 {
            return halfcube_cover(group.rank() as u64);
        }
    }
    generic_cover(group, &s, TranslationStrategy::Greedy)
}

fn generic_cover(
    group: &GroupSpec,
    s: &BTreeSet<GroupElement>,
    strategy: TranslationStrategy,
) -> Result<ChordalCover> {
    let base = cayley_graph(group, s)?;
    let (cover, _) = min_fill_cover(&base);
    find_translations(group, &base, &cover, strategy)
}

fn cmd_cover(kind: CoverCmd) -> Result<()> {
    let (cover, bound, out) = match kind {
        CoverCmd::Cycle { n, d, out } => {
            let d = d.unwrap_or(1);
            let cover = power_cycle_cover(n, d)?;
            let bound = 3.0 * d as f64 * ((n / d) as f64).log2();
            (cover, Some(bound), out)
        }
        CoverCmd::Halfcube { n, out } => (halfcube_cover(n)?, None, out),
        CoverCmd::Generic {
            group,
            support,
            strategy,
            out,
        } => {
            let group = parse_group_spec(&group)?;
            let s = read_support(&group, &support)?;
            let strategy = match strategy {
                Strategy::Greedy => TranslationStrategy::Greedy,
                Strategy::Exhaustive => TranslationStrategy::Exhaustive,
            };
            (generic_cover(&group, &s, strategy)?, None, out)
        }
    };
    eprintln!(
        "fourier support: {} (|T| = {})",
        describe_support(&cover),
        cover.fourier_support().len()
    );
    if let Some(bound) = bound {
        eprintln!("size bound 3d*log2(N/d) = {bound:.2}");
    }
    emit(&cover.to_json(), &out)
}

fn cmd_certify(
    function: PathBuf,
    cover: Option<PathBuf>,
    auto: bool,
    real: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let f = FourierFunction::from_json(&read_file(&function)?)?;
    let cover = match cover {
        Some(path) => ChordalCover::from_json(&read_file(&path)?)?,
        None if auto => auto_cover(&f)?,
        None => {
            return Err(Error::InvalidParameter(
                "provide --cover FILE or --auto".into(),
            ))
        }
    };
    let mut cert = sparse_sos(&f, &cover)?;
    if real {
        cert = real_certificate(&cert)?;
        cert.residual = verify_certificate(&f, &cert, 1e-10)?;
    }
    eprintln!(
        "certificate: {} terms on support of size {}, residual {:.3e}",
        cert.terms.len(),
        cert.declared_support.len(),
        cert.residual
    );
    emit(&cert.to_json(), &out)
}

fn cmd_verify(function: PathBuf, certificate: PathBuf, tol: Option<f64>) -> Result<()> {
    let tol = tol.unwrap_or_else(default_tol);
    let f = FourierFunction::from_json(&read_file(&function)?)?;
    let cert = SosCertificate::from_json(&read_file(&certificate)?)?;
    let residual = verify_certificate(&f, &cert, 1e-10)?;
    let scale = f.max_abs_on_group().max(1.0);
    if residual <= tol * scale {
        eprintln!("PASS: residual {residual:.3e} <= {:.3e}", tol * scale);
        Ok(())
    } else {
        eprintln!("FAIL: residual {residual:.3e} > {:.3e}", tol * scale);
        Err(Error::CertificateInvalid(format!(
            "residual {residual:.3e} exceeds tolerance"
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_lift(
    polytope: Polytope,
    n: Option<u64>,
    d: Option<u64>,
    group: Option<String>,
    support: Option<PathBuf>,
    cover: Option<PathBuf>,
    real: bool,
    format: Format,
    paired_pins: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let missing = |what: &str| Error::InvalidParameter(format!("--{what} is required here"));
    let (group, s, cover, tc_params) = match polytope {
        Polytope::Tc => {
            let n = n.ok_or_else(|| missing("n"))?;
            let d = d.ok_or_else(|| missing("d"))?;
            // The N = 6, d = 1 instance gets the hand-tuned hexagon cover,
            // reproducing the planar description of size 4.
            let cover = if n == 6 && d == 1 {
                hexagon_cover()
            } else {
                power_cycle_cover(n, d)?
            };
            let group = cover.group().clone();
            let mut s = BTreeSet::new();
            for k in 1..=d as i64 {
                s.insert(group.element(&[k])?);
                s.insert(group.element(&[-k])?);
            }
            (group, s, cover, Some((n, d)))
        }
        Polytope::Cut => {
            let n = n.ok_or_else(|| missing("n"))?;
            let cover = halfcube_cover(n)?;
            let group = cover.group().clone();
            let mut s = BTreeSet::new();
            for i in 0..n as usize {
                for j in (i + 1)..n as usize {
                    let mut c = vec![0i64; n as usize];
                    c[i] = 1;
                    c[j] = 1;
                    s.insert(group.element(&c)?);
                }
            }
            (group, s, cover, None)
        }
        Polytope::Custom => {
            let group = parse_group_spec(&group.ok_or_else(|| missing("group"))?)?;
            let s = read_support(&group, &support.ok_or_else(|| missing("support"))?)?;
            let cover = ChordalCover::from_json(&read_file(&cover.ok_or_else(|| missing("cover"))?)?)?;
            (group, s, cover, None)
        }
    };
    let mut lift = build_lift(&group, &s, &cover)?;
    if real {
        let t: BTreeSet<GroupElement> = lift.t().iter().cloned().collect();
        let (_, sigma) = find_equalizing_involution(&group, &t).ok_or_else(|| {
            Error::BadInvolution("the Fourier support has no equalizing involution".into())
        })?;
        lift = real_lift(&lift, &sigma)?;
    }
    match tc_params {
        Some((n, d)) => eprintln!(
            "size {} vs bound 3d*log2(N/d) = {:.2} vs {n} vertices",
            lift.size(),
            3.0 * d as f64 * ((n / d) as f64).log2()
        ),
        None => eprintln!("size {}", lift.size()),
    }
    let text = match format {
        Format::Json => lift.to_json(),
        Format::Sdpa => export_sdpa(&lift, paired_pins)?,
    };
    emit(&text, &out)
}

fn cmd_bench_sizes(max_d: u64) -> Result<()> {
    println!(
        "{:>4} {:>8} {:>6} {:>12} {:>10} {:>8}",
        "d", "N=d^2", "|T'|", "3d*log2(d)", "LP bound", "ratio"
    );
    for d in 1..=max_d {
        if d == 1 {
            println!("{:>4} skipped: N = 1 is degenerate", 1);
            continue;
        }
        let n = d * d;
        let cover = power_cycle_cover(n, d)?;
        let t_size = cover.fourier_support().len();
        let bound = 3.0 * d as f64 * (d as f64).log2();
        let lp = n.min((d + 1) * (d + 2) / 2);
        println!(
            "{:>4} {:>8} {:>6} {:>12.2} {:>10} {:>8.3}",
            d,
            n,
            t_size,
            bound,
            lp,
            t_size as f64 / lp as f64
        );
    }
    Ok(())
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Cover { kind } => cmd_cover(kind),
        Cmd::Certify {
            function,
            cover,
            auto,
            real,
            out,
        } => cmd_certify(function, cover, auto, real, out),
        Cmd::Verify {
            function,
            certificate,
            tol,
        } => cmd_verify(function, certificate, tol),
        Cmd::Lift {
            polytope,
            n,
            d,
            group,
            support,
            cover,
            real,
            format,
            paired_pins,
            out,
        } => cmd_lift(
            polytope, n, d, group, support, cover, real, format, paired_pins, out,
        ),
        Cmd::Bench { kind } => match kind {
            BenchCmd::Sizes { max_d } => cmd_bench_sizes(max_d),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_mini_language_parses() {
        assert_eq!(parse_group_spec("Z6").unwrap().moduli(), &[6]);
        assert_eq!(parse_group_spec("Z2^4").unwrap().moduli(), &[2, 2, 2, 2]);
        assert_eq!(parse_group_spec("Z4xZ3").unwrap().moduli(), &[4, 3]);
        assert_eq!(parse_group_spec("z3^2xZ5").unwrap().moduli(), &[3, 3, 5]);
        assert!(parse_group_spec("6").is_err());
        assert!(parse_group_spec("Zx").is_err());
        assert!(parse_group_spec("Z2^0").is_err());
    }

    #[test]
    fn auto_cover_is_deterministic_and_pattern_aware() {
        use num_complex::Complex64;
        use std::collections::BTreeMap;

        // Degree-2 function on Z_12 -> power-cycle cover.
        let group = make_group(&[12]).unwrap();
        let coeffs = BTreeMap::from([
            (group.element(&[0]).unwrap(), Complex64::new(2.0, 0.0)),
            (group.element(&[2]).unwrap(), Complex64::new(0.5, 0.0)),
            (group.element(&[-2]).unwrap(), Complex64::new(0.5, 0.0)),
        ]);
        let f = FourierFunction::new(group.clone(), coeffs).unwrap();
        let c1 = auto_cover(&f).unwrap();
        let c2 = auto_cover(&f).unwrap();
        assert_eq!(c1.to_json(), c2.to_json());
        let expect = power_cycle_cover(12, 2).unwrap();
        assert_eq!(c1.to_json(), expect.to_json());

        // Quadratic on Z_2^3 -> half-cube cover.
        let group = make_group(&[2, 2, 2]).unwrap();
        let coeffs = BTreeMap::from([
            (group.element(&[0, 0, 0]).unwrap(), Complex64::new(1.0, 0.0)),
            (group.element(&[1, 1, 0]).unwrap(), Complex64::new(0.25, 0.0)),
        ]);
        let f = FourierFunction::new(group.clone(), coeffs).unwrap();
        let cover = auto_cover(&f).unwrap();
        assert_eq!(cover.to_json(), halfcube_cover(3).unwrap().to_json());

        // Constant function on Z_5 falls back to the generic path.
        let group = make_group(&[5]).unwrap();
        let coeffs = BTreeMap::from([(group.identity(), Complex64::new(1.0, 0.0))]);
        let f = FourierFunction::new(group.clone(), coeffs).unwrap();
        let cover = auto_cover(&f).unwrap();
        assert_eq!(cover.fourier_support().len(), 1);
    }

    #[test]
    fn signed_residues_are_balanced() {
        let group = make_group(&[8]).unwrap();
        let vals: Vec<i64> = (0..8)
            .map(|k| signed_residue(&group, &group.element(&[k]).unwrap()))
            .collect();
        assert_eq!(vals, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }
}
