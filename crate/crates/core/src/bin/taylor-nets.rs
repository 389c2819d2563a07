use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use taylor_nets::error::Error;
use taylor_nets::io::{gen_random, parse_net, serialize_net, GenParams};
use taylor_nets::iso::{equiv, iso_check, IsoMode};
use taylor_nets::net::Net;
use taylor_nets::rebuild::{rebuild_from_pair, round_trip};
use taylor_nets::relsem::{format_point, generate_injective_atomic, result, AtomSupply};
use taylor_nets::taylor::{expand, make_k_heterogeneous, make_uniform};
use taylor_nets::validate::{validate, Mode};

#[derive(Parser)]
#[command(name = "taylor-nets", about = "Proof structures, their Taylor expansion and its inversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a net against one of the structural classes.
    Validate {
        file: PathBuf,
        /// ground, simple-diff, in-ps, ps, diff-in-ps or diff-ps.
        #[arg(long, default_value = "ps")]
        mode: Mode,
    },
    /// Write the expansion of a net along a generated pseudo-experiment.
    #[command(group(ArgGroup::new("experiment").required(true).args(["k", "uniform"])))]
    Expand {
        file: PathBuf,
        /// Use a k-heterogeneous pseudo-experiment.
        #[arg(long)]
        k: Option<usize>,
        /// Take every box exactly N times.
        #[arg(long)]
        uniform: Option<usize>,
        /// Expand only boxes whose content has at least this depth.
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short)]
        o: PathBuf,
    },
    /// Rebuild a net from its k-heterogeneous term and its 1-experiment term.
    Rebuild {
        term0: PathBuf,
        term1exp: PathBuf,
        #[arg(short)]
        o: PathBuf,
    },
    /// Look for an isomorphism between two nets.
    Iso {
        a: PathBuf,
        b: PathBuf,
        /// Require shallow conclusions to be sent to themselves.
        #[arg(long)]
        fix_conclusions: bool,
    },
    /// Print the result of an injective atomic k-heterogeneous experiment.
    Experiment {
        file: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Print a random PS.
    Gen {
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        boxes: usize,
        #[arg(long, default_value_t = 3)]
        cosize: usize,
        #[arg(long, default_value_t = 40)]
        ports: usize,
        #[arg(long)]
        cuts: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate, expand and rebuild random nets, counting successes.
    Roundtrip {
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

enum Outcome {
    Yes,
    No,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_net(path: &Path) -> Result<Net, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_net(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_net(path: &Path, net: &Net) -> Result<(), String> {
    fs::write(path, serialize_net(net)).map_err(|e| format!("{}: {e}", path.display()))
}

fn lib(e: Error) -> String {
    e.to_string()
}

fn run(command: Command) -> Result<Outcome, String> {
    match command {
        Command::Validate { file, mode } => {
            let report = validate(&read_net(&file)?, mode);
            println!("{report}");
            Ok(if report.is_ok() { Outcome::Yes } else { Outcome::No })
        }
        Command::Expand { file, k, uniform, level, seed, o } => {
            let net = read_net(&file)?;
            let e = match (k, uniform) {
                (Some(k), _) if k < 2 => return Err("--k must be at least 2".into()),
                (Some(k), _) => make_k_heterogeneous(&net, k, seed).map_err(lib)?,
                (None, Some(n)) => make_uniform(&net, n),
                (None, None) => unreachable!("clap requires one of --k and --uniform"),
            };
            write_net(&o, &expand(&net, &e, level).map_err(lib)?.term)?;
            Ok(Outcome::Yes)
        }
        Command::Rebuild { term0, term1exp, o } => {
            let khet = read_net(&term0)?;
            let one = read_net(&term1exp)?;
            write_net(&o, &rebuild_from_pair(&one, &khet).map_err(lib)?)?;
            Ok(Outcome::Yes)
        }
        Command::Iso { a, b, fix_conclusions } => {
            let mode = if fix_conclusions { IsoMode::FixConclusions } else { IsoMode::Free };
            match iso_check(&read_net(&a)?, &read_net(&b)?, mode) {
                Some(_) => {
                    println!("isomorphic");
                    Ok(Outcome::Yes)
                }
                None => {
                    println!("not isomorphic");
                    Ok(Outcome::No)
                }
            }
        }
        Command::Experiment { file, k, seed } => {
            if k < 2 {
                return Err("--k must be at least 2".into());
            }
            let net = read_net(&file)?;
            let p = make_k_heterogeneous(&net, k, seed).map_err(lib)?;
            let e = generate_injective_atomic(&net, &p, &mut AtomSupply::new()).map_err(lib)?;
            println!("{}", format_point(&result(&e, &net)));
            Ok(Outcome::Yes)
        }
        Command::Gen { depth, boxes, cosize, ports, cuts, seed } => {
            let params = GenParams {
                max_depth: depth,
                max_boxes_per_level: boxes,
                max_boxes: boxes,
                max_cosize: cosize,
                max_ports: ports,
                allow_cuts: cuts,
                seed,
            };
            print!("{}", serialize_net(&gen_random(&params)));
            Ok(Outcome::Yes)
        }
        Command::Roundtrip { trials, seed, depth } => {
            let (mut done, mut good, mut skipped) = (0usize, 0usize, 0usize);
            let mut draw = seed;
            while done < trials {
                if skipped > 20 * trials.max(1) {
                    return Err(format!("gave up after {skipped} draws too large to expand"));
                }
                let params = GenParams {
                    max_depth: depth,
                    max_boxes_per_level: 3,
                    max_boxes: 6,
                    max_cosize: 4,
                    max_ports: 40,
                    allow_cuts: false,
                    seed: draw,
                };
                draw += 1;
                let net = gen_random(&params);
                match round_trip(&net, params.seed) {
                    Err(Error::TooLarge { .. }) => skipped += 1,
                    Ok(back) => {
                        done += 1;
                        if equiv(&back, &net) {
                            good += 1;
                        } else {
                            eprintln!("seed {}: rebuilt net is not ≡ to the original", params.seed);
                        }
                    }
                    Err(e) => {
                        done += 1;
                        eprintln!("seed {}: {e}", params.seed);
                    }
                }
            }
            println!("{good}/{done} ≡ ({skipped} draws skipped as too large)");
            Ok(if good == done { Outcome::Yes } else { Outcome::No })
        }
    }
}
