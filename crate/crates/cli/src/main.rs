//! Command-line front end: key generation, encryption, decryption, cost
//! estimation and distinguisher experiments.
//!
//! Exit codes: 0 success, 2 bad arguments or parameters, 3 I/O failure,
//! 4 decryption failure, 5 malformed input file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expgab::analysis::{
    distinguish, random_block_code, random_expanded_code, random_expanded_gabidulin, security_report, AnalysisError,
    BlockCode, CostReport, Distinguished, Verdict, SUGGESTED_PARAMETERS,
};
use expgab::pke::{
    decode_ciphertext, decode_private_key, decode_public_key, decrypt, encode_ciphertext, encode_private_key,
    encode_public_key, encrypt, keygen, FormatError, PkeError, SchemeParams,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("decryption failed: {0}")]
    Decrypt(PkeError),
    #[error("{0}")]
    Format(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Decrypt(_) => 4,
            CliError::Format(_) => 5,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::UnsupportedField(_) => CliError::Usage(e.to_string()),
            other => CliError::Format(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "expgab", version, about = "Encryption over expanded Gabidulin codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// 1 or 2
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    proposal: u8,
    #[arg(long)]
    q: u32,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    lambda: usize,
}

impl ParamArgs {
    fn params(&self) -> Result<SchemeParams, CliError> {
        SchemeParams::new(self.proposal, self.q, self.m, self.n, self.k, self.lambda).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair.
    Keygen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Prefix for the default key file names.
        #[arg(long, default_value = "expgab")]
        out: String,
        #[arg(long)]
        pk: Option<PathBuf>,
        #[arg(long)]
        sk: Option<PathBuf>,
    },
    /// Encrypt a raw plaintext (one byte per element, K bytes).
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decrypt a ciphertext file.
    Decrypt {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attack costs, security level, key size and rate.
    Estimate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), required_unless_present = "tables")]
        proposal: Option<u8>,
        #[arg(long, required_unless_present = "tables")]
        q: Option<u32>,
        #[arg(long, required_unless_present = "tables")]
        m: Option<usize>,
        #[arg(long, required_unless_present = "tables")]
        n: Option<usize>,
        #[arg(long, required_unless_present = "tables")]
        k: Option<usize>,
        #[arg(long, required_unless_present = "tables")]
        lambda: Option<usize>,
        #[arg(long)]
        csv: bool,
        /// All published parameter sets, as CSV.
        #[arg(long)]
        tables: bool,
    },
    /// Twisted Frobenius dimension test on seeded random instances.
    Distinguish {
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Adds a public-key column for this proposal...
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), requires = "lambda")]
        proposal: Option<u8>,
        /// ...with this lambda.
        #[arg(long, requires = "proposal")]
        lambda: Option<usize>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: bool,
    },
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_keygen(params: &ParamArgs, seed: u64, out: &str, pk: Option<PathBuf>, sk: Option<PathBuf>) -> Result<(), CliError> {
    let params = params.params()?;
    if params.dims().q > 256 {
        return Err(CliError::Usage("key files store one byte per element, so q must be at most 256".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (public, private) = keygen(&params, &mut rng).map_err(|e| CliError::Usage(e.to_string()))?;
    let pk_path = pk.unwrap_or_else(|| PathBuf::from(format!("{out}.pk")));
    let sk_path = sk.unwrap_or_else(|| PathBuf::from(format!("{out}.sk")));
    write(&pk_path, &encode_public_key(&public)?)?;
    write(&sk_path, &encode_private_key(&private)?)?;
    println!(
        "wrote {} and {} (K = {}, N = {}, t = {})",
        pk_path.display(),
        sk_path.display(),
        params.big_k(),
        params.big_n(),
        params.t()
    );
    Ok(())
}

fn cmd_encrypt(pk: &Path, input: &Path, out: &Path, seed: u64) -> Result<(), CliError> {
    let public = decode_public_key(&read(pk)?)?;
    let x: Vec<u16> = read(input)?.into_iter().map(u16::from).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let ct = encrypt(&public, &x, &mut rng).map_err(|e| CliError::Format(format!("plaintext: {e}")))?;
    write(out, &encode_ciphertext(public.params(), &ct)?)
}

fn cmd_decrypt(sk: &Path, input: &Path, out: &Path) -> Result<(), CliError> {
    let private = decode_private_key(&read(sk)?)?;
    let ct = decode_ciphertext(&read(input)?, private.params())?;
    let x = decrypt(&private, &ct).map_err(CliError::Decrypt)?;
    let bytes: Vec<u8> = x.into_iter().map(|v| v as u8).collect();
    write(out, &bytes)
}

fn cmd_estimate(params: Option<SchemeParams>, csv: bool) -> Result<(), CliError> {
    match params {
        None => {
            println!("{}", CostReport::csv_header());
            for row in SUGGESTED_PARAMETERS {
                println!("{}", security_report(&row.params()).csv_row());
            }
        }
        Some(p) => {
            let report = security_report(&p);
            if csv {
                println!("{}\n{}", CostReport::csv_header(), report.csv_row());
            } else {
                println!("{report}");
            }
        }
    }
    Ok(())
}

/// Public code read in blocks: `m` for Proposal II, `λ` for Proposal I.
fn public_block_code(params: &SchemeParams, rng: &mut ChaCha20Rng) -> Result<BlockCode, CliError> {
    let (public, _) = keygen(params, rng).map_err(|e| CliError::Usage(e.to_string()))?;
    let d = params.dims();
    let block = match params {
        SchemeParams::I(_) => d.lambda,
        SchemeParams::II(_) => d.m,
    };
    BlockCode::new(public.generator().clone(), block).map_err(|e| CliError::Usage(format!("public code: {e}")))
}

fn usage(e: AnalysisError) -> CliError {
    CliError::Usage(e.to_string())
}

struct Tally {
    name: &'static str,
    dims: Vec<usize>,
    structured: usize,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            dims: Vec::new(),
            structured: 0,
        }
    }

    fn push(&mut self, d: &Distinguished) {
        self.dims.push(d.dim);
        if d.verdict == Verdict::ExpandedGabidulinLike {
            self.structured += 1;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_distinguish(
    q: u32,
    m: usize,
    n: usize,
    k: usize,
    pk_params: Option<SchemeParams>,
    trials: usize,
    seed: u64,
    csv: bool,
) -> Result<(), CliError> {
    if q < 3 {
        return Err(CliError::Usage(format!(
            "q = {q}: distinguisher experiments are only run over fields with q >= 3"
        )));
    }
    if !(m >= 2 && 0 < k && k < n && n <= m) {
        return Err(CliError::Usage("need m >= 2 and 0 < k < n <= m".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut tallies = vec![Tally::new("expanded-gabidulin"), Tally::new("expanded-random"), Tally::new("plain-random")];
    if pk_params.is_some() {
        tallies.push(Tally::new("public-key"));
    }
    if csv {
        let names: Vec<String> = tallies.iter().map(|t| format!("{0}_dim,{0}_verdict,{0}_dual_dim", t.name)).collect();
        println!("trial,{}", names.join(","));
    }
    for trial in 0..trials {
        let (_, _, egab) = random_expanded_gabidulin(q, m, n, k, &mut rng).map_err(usage)?;
        let mut codes = vec![
            egab,
            random_expanded_code(q, m, n, k, &mut rng).map_err(usage)?,
            random_block_code(q, m, n, k, &mut rng).map_err(usage)?,
        ];
        if let Some(p) = &pk_params {
            codes.push(public_block_code(p, &mut rng)?);
        }
        let results: Vec<Distinguished> = codes.iter().map(distinguish).collect::<Result<_, _>>().map_err(usage)?;
        for (t, r) in tallies.iter_mut().zip(&results) {
            t.push(r);
        }
        if csv {
            let cells: Vec<String> = results.iter().map(|r| format!("{},{},{}", r.dim, r.verdict, r.dual_dim)).collect();
            println!("{trial},{}", cells.join(","));
        }
    }
    if !csv {
        println!("q={q} m={m} n={n} k={k} trials={trials} seed={seed}");
        println!("expanded Gabidulin law: (k+1)m = {}; random law: min(nm, 2km) = {}", (k + 1) * m, (n * m).min(2 * k * m));
        for t in &tallies {
            let dims: Vec<String> = t.dims.iter().map(|d| d.to_string()).collect();
            println!("{:<20} flagged {:>3}/{trials}  dims {}", t.name, t.structured, dims.join(" "));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Command::Keygen { params, seed, out, pk, sk } => cmd_keygen(&params, seed, &out, pk, sk),
        Command::Encrypt { pk, input, out, seed } => cmd_encrypt(&pk, &input, &out, seed),
        Command::Decrypt { sk, input, out } => cmd_decrypt(&sk, &input, &out),
        Command::Estimate {
            proposal,
            q,
            m,
            n,
            k,
            lambda,
            csv,
            tables,
        } => {
            if tables {
                return cmd_estimate(None, true);
            }
            // clap enforces presence when --tables is absent
            let args = ParamArgs {
                proposal: proposal.unwrap_or_default(),
                q: q.unwrap_or_default(),
                m: m.unwrap_or_default(),
                n: n.unwrap_or_default(),
                k: k.unwrap_or_default(),
                lambda: lambda.unwrap_or_default(),
            };
            cmd_estimate(Some(args.params()?), csv)
        }
        Command::Distinguish {
            q,
            m,
            n,
            k,
            proposal,
            lambda,
            trials,
            seed,
            csv,
        } => {
            let pk_params = match (proposal, lambda) {
                (Some(p), Some(l)) => Some(SchemeParams::new(p, q, m, n, k, l).map_err(|e| CliError::Usage(e.to_string()))?),
                _ => None,
            };
            cmd_distinguish(q, m, n, k, pk_params, trials, seed, csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
