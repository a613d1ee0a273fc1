use std::path::Path;

use proxima_core::analysis::{markov_samples, periodic_spectrum, theorem_b_check, DominationThresholds};
use proxima_core::analysis::{DominationVerdict, GapMode};
use proxima_core::format::{cocycle_to_json, demo, read_cocycle, DEMO_NAMES};
use proxima_core::synthesis::{build_proximal_periodic_with, verify_theorem_a};
use proxima_core::thermo::{pressure, theorem_c_experiment, TheoremCOptions};
use proxima_core::typicality::{excursions, find_typical_pair, typicality_check};
use proxima_core::{Error, Result, SynthesisOptions, TypicalPair, TypicalityCertificate, WindowCocycle, Word};

use crate::output::{csv, emit, json, Status};
use crate::{Certify, Cli, Command, Format};

pub fn run(cli: &Cli) -> Result<Status> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Check(a) => {
            json_only(cli.format, "check")?;
            let cocycle = read_cocycle(&a.input.input)?;
            let cert = match (&a.symbol, &a.excursion) {
                (Some(s), Some(e)) => {
                    let pair = TypicalPair::new(cocycle.base(), *s, Word::parse(e)?)?;
                    typicality_check(&cocycle, &pair, a.certify.tol)?
                }
                _ => search(&cocycle, &a.certify)?,
            };
            let status = if cert.passed { Status::Pass } else { Status::Negative };
            emit(out, &json("check", status, &cert))?;
            Ok(status)
        }
        Command::Synthesize(a) => {
            json_only(cli.format, "synthesize")?;
            let cocycle = read_cocycle(&a.input.input)?;
            let cert = search(&cocycle, &a.certify)?;
            if !cert.passed {
                return negative_certificate(out, "synthesize", &cert);
            }
            let word = Word::parse(&a.word)?;
            let report = build_proximal_periodic_with(&cocycle, &cert, &word, a.tau, &synthesis_options(a.ell_cap))?;
            emit(out, &json("synthesize", Status::Pass, &report))?;
            Ok(Status::Pass)
        }
        Command::VerifyBound(a) => {
            if a.samples == 0 || a.n_min == 0 || a.n_max < a.n_min {
                return Err(Error::InvalidArgument("need samples > 0 and 0 < n-min <= n-max".into()));
            }
            let cocycle = read_cocycle(&a.input.input)?;
            let cert = search(&cocycle, &a.certify)?;
            if !cert.passed {
                return negative_certificate(out, "verify-bound", &cert);
            }
            let words: Vec<Word> = (0..a.samples)
                .map(|i| {
                    let n = if a.samples == 1 { a.n_min } else { a.n_min + i * (a.n_max - a.n_min) / (a.samples - 1) };
                    markov_samples(cocycle.base(), n, 1, a.seed.wrapping_add(i as u64)).remove(0)
                })
                .collect();
            let report = verify_theorem_a(&cocycle, &cert, &words, a.tau, &synthesis_options(a.ell_cap))?;
            let bytes = match cli.format {
                Format::Json => json("verify-bound", Status::Pass, &report),
                Format::Csv => csv(
                    &["word", "n", "bound_value", "n_q", "k", "ell_used", "error"],
                    report.samples.iter().map(|s| {
                        vec![
                            s.word.to_string(),
                            s.n.to_string(),
                            opt(s.bound_value),
                            opt(s.n_q),
                            opt(s.k),
                            opt(s.ell_used),
                            s.error.clone().unwrap_or_default(),
                        ]
                    }),
                )?,
            };
            emit(out, &bytes)?;
            Ok(Status::Pass)
        }
        Command::Dominate(a) => {
            let cocycle = read_cocycle(&a.input.input)?;
            let ns = n_range(a.n_min, a.n_max)?;
            let mode = match (a.samples, a.seed) {
                (Some(count), Some(seed)) => GapMode::Sampled { count, seed },
                _ => GapMode::default(),
            };
            let cert = find_typical_pair(&cocycle, a.certify.max_excursion, a.certify.tol)?;
            let report = theorem_b_check(
                &cocycle,
                cert.as_ref(),
                a.index,
                a.max_period,
                &ns,
                mode,
                DominationThresholds::default(),
            )?;
            let status = match report.verdict {
                DominationVerdict::DominatedEvidence => Status::Pass,
                DominationVerdict::NoEvidence => Status::Negative,
            };
            let bytes = match cli.format {
                Format::Json => json("dominate", status, &report),
                Format::Csv => csv(
                    &["n", "min_gap", "argmin", "words", "exhaustive"],
                    report.gap_profile.rows.iter().map(|r| {
                        vec![
                            r.n.to_string(),
                            r.min_gap.to_string(),
                            r.argmin.to_string(),
                            r.words.to_string(),
                            r.exhaustive.to_string(),
                        ]
                    }),
                )?,
            };
            emit(out, &bytes)?;
            Ok(status)
        }
        Command::Spectrum(a) => {
            if a.max_period == 0 {
                return Err(Error::InvalidArgument("max-period must be positive".into()));
            }
            let cocycle = read_cocycle(&a.input.input)?;
            let spectrum = periodic_spectrum(&cocycle, a.max_period)?;
            let bytes = match cli.format {
                Format::Json => {
                    let vectors: Vec<_> = spectrum.iter().map(|(_, l)| l).collect();
                    json("spectrum", Status::Pass, &vectors)
                }
                Format::Csv => {
                    let names: Vec<String> = (1..=cocycle.dim()).map(|j| format!("lambda_{j}")).collect();
                    let mut header = vec!["period", "word"];
                    header.extend(names.iter().map(String::as_str));
                    csv(
                        &header,
                        spectrum.iter().map(|(q, l)| {
                            let mut row = vec![q.len().to_string(), q.to_string()];
                            row.extend(l.values.iter().map(f64::to_string));
                            row
                        }),
                    )?
                }
            };
            emit(out, &bytes)?;
            Ok(Status::Pass)
        }
        Command::Pressure(a) => {
            let cocycle = read_cocycle(&a.input.input)?;
            let est = pressure(&cocycle, a.s, &n_range(a.n_min, a.n_max)?)?;
            let bytes = match cli.format {
                Format::Json => json("pressure", Status::Pass, &est),
                Format::Csv => {
                    csv(&["n", "p_n"], est.rows.iter().map(|r| vec![r.n.to_string(), r.p_n.to_string()]))?
                }
            };
            emit(out, &bytes)?;
            Ok(Status::Pass)
        }
        Command::Compare(a) => {
            json_only(cli.format, "compare")?;
            let ca = read_cocycle(&a.input.input)?;
            let cb = read_cocycle(&a.other)?;
            let cert = search(&ca, &a.certify)?;
            if !cert.passed {
                return negative_certificate(out, "compare", &cert);
            }
            let opts = TheoremCOptions {
                max_period: a.max_period,
                tol: a.spread_tol,
                n_range: n_range(a.n_min, a.n_max)?,
                samples: a.samples,
                seed: a.seed,
                tau: a.tau,
                synthesis: synthesis_options(a.ell_cap),
                ..TheoremCOptions::default()
            };
            match theorem_c_experiment(&ca, &cb, &cert.pair, &opts) {
                Ok(report) => {
                    emit(out, &json("compare", Status::Pass, &report))?;
                    Ok(Status::Pass)
                }
                Err(Error::NotConstant(witness)) => {
                    emit(out, &json("compare", Status::Negative, &witness))?;
                    Ok(Status::Negative)
                }
                Err(e) => Err(e),
            }
        }
        Command::Demo(a) => {
            if a.list {
                emit(out, format!("{}\n", DEMO_NAMES.join("\n")).as_bytes())?;
                return Ok(Status::Pass);
            }
            let name = a.name.as_deref().unwrap_or_default();
            let cocycle = demo(name).map_err(|_| {
                Error::InvalidArgument(format!("unknown demo `{name}`; available: {}", DEMO_NAMES.join(", ")))
            })?;
            emit(out, cocycle_to_json(&cocycle).as_bytes())?;
            Ok(Status::Pass)
        }
    }
}

/// The first passing certificate, or the failing certificate of the first
/// candidate pair so that the margins can be reported.
fn search(a: &WindowCocycle, c: &Certify) -> Result<TypicalityCertificate> {
    if let Some(cert) = find_typical_pair(a, c.max_excursion, c.tol)? {
        return Ok(cert);
    }
    let s = a.base().fixed_symbols()[0];
    let e = excursions(a.base(), s, c.max_excursion)
        .into_iter()
        .next()
        .ok_or(Error::NotTypical(c.max_excursion))?;
    typicality_check(a, &TypicalPair::new(a.base(), s, e)?, c.tol)
}

fn negative_certificate(out: Option<&Path>, command: &str, cert: &TypicalityCertificate) -> Result<Status> {
    eprintln!("no typical pair with excursions up to the given length; reporting the first candidate");
    emit(out, &json(command, Status::Negative, cert))?;
    Ok(Status::Negative)
}

fn json_only(f: Format, command: &str) -> Result<()> {
    match f {
        Format::Json => Ok(()),
        Format::Csv => Err(Error::InvalidArgument(format!("`{command}` writes JSON only"))),
    }
}

fn n_range(lo: usize, hi: usize) -> Result<Vec<usize>> {
    if lo == 0 || hi < lo {
        return Err(Error::InvalidArgument(format!("bad n range {lo}..={hi}")));
    }
    Ok((lo..=hi).collect())
}

fn synthesis_options(ell_cap: Option<usize>) -> SynthesisOptions {
    let mut o = SynthesisOptions::default();
    if let Some(c) = ell_cap {
        o.ell_cap = c;
    }
    o
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
