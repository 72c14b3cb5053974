//! `tnrss`: key generation, signing, threshold redaction and verification.
//!
//! Exit codes: 0 accept/success, 1 reject, 2 usage or validation error,
//! 3 I/O error, 4 cryptographic failure.

mod docfile;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::rngs::OsRng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use tnrss::encoding::{BlockSet, Profile};
use tnrss::redact_protocol::{thr_red_with, RedactError, RedactionInfo, RedactorState};
use tnrss::rss_core::{
    keygen_with_profile, sign, verify, PublicKey, RedactorKey, RedactorVerificationSet, SchemeError,
    SecretKey,
};
use tnrss::security_harness::{
    run_correctness_suite, run_forgery_check, run_forgery_demo, run_one_time_check,
    run_threshold_boundary_check, run_transparency_check, CorrectnessConfig,
};

use docfile::DocumentFile;

const PROFILE_ENV: &str = "TNRSS_PROFILE";

#[derive(Parser)]
#[command(name = "tnrss", version, about = "t-out-of-n redactable signatures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate signer keys and n redactor key shares.
    Keygen {
        #[arg(long = "t")]
        t: u32,
        #[arg(long = "n")]
        n: u32,
        #[arg(long)]
        out_dir: PathBuf,
        /// Skip writing rvs.tnr (per-redactor verification points).
        #[arg(long)]
        no_verification_set: bool,
    },
    /// Sign a document file under a fresh document id.
    Sign {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        doc: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce one redactor's redaction information for a signed document.
    Redinf {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        rk: PathBuf,
        #[arg(long)]
        doc: PathBuf,
        /// Comma-separated block positions to vote for removal (may be empty).
        #[arg(long = "mod", default_value = "")]
        mod_indices: String,
        /// Directory holding the redactor's replay journal.
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Combine redaction information and write the redacted document.
    Combine {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        doc: PathBuf,
        #[arg(long = "ri", num_args = 0.., required = false)]
        ri: Vec<PathBuf>,
        /// Discard shares that do not match these verification points.
        #[arg(long)]
        rvs: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a signed document; exit 0 on accept, 1 on reject.
    Verify {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        doc: PathBuf,
    },
    /// Security demonstrations.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Run the seeded self-test suites.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Forge a signature by redacting one document twice.
    Forgery {
        /// Keep replay protection on; the second redaction is refused.
        #[arg(long)]
        protected: bool,
        #[arg(long, default_value_t = 5)]
        seed: u64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self {
            code: 3,
            message: format!("{}: {err}", path.display()),
        }
    }

    fn crypto(message: impl Into<String>) -> Self {
        Self { code: 4, message: message.into() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn profile() -> CliResult<Profile> {
    match std::env::var(PROFILE_ENV) {
        Ok(s) => s.parse().map_err(|e| Failure::validation(format!("{PROFILE_ENV}: {e}"))),
        Err(_) => Ok(Profile::default()),
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let profile = profile()?;
    match cli.command {
        Command::Keygen { t, n, out_dir, no_verification_set } => {
            cmd_keygen(profile, t, n, &out_dir, !no_verification_set)
        }
        Command::Sign { sk, doc, out } => cmd_sign(profile, &sk, &doc, &out),
        Command::Redinf { pk, rk, doc, mod_indices, state, out } => {
            cmd_redinf(profile, &pk, &rk, &doc, &mod_indices, &state, &out)
        }
        Command::Combine { pk, doc, ri, rvs, out } => cmd_combine(profile, &pk, &doc, &ri, rvs.as_deref(), &out),
        Command::Verify { pk, doc } => cmd_verify(profile, &pk, &doc),
        Command::Demo { which: Demo::Forgery { protected, seed } } => cmd_demo(protected, seed),
        Command::Selftest { seed } => cmd_selftest(seed),
    }
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

fn fingerprint(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

fn check_profile(expected: Profile, found: Profile, path: &Path) -> CliResult<()> {
    if expected != found {
        return Err(Failure::validation(format!(
            "{}: key uses profile {found}, but {PROFILE_ENV} selects {expected}",
            path.display()
        )));
    }
    Ok(())
}

fn load_pk(profile: Profile, path: &Path) -> CliResult<PublicKey> {
    let pk = PublicKey::from_bytes(&read(path)?)
        .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    check_profile(profile, pk.profile, path)?;
    Ok(pk)
}

fn load_doc(path: &Path) -> CliResult<docfile::LoadedDocument> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let file: DocumentFile = serde_json::from_str(&text)
        .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    file.load().map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

fn store_doc(path: &Path, file: &DocumentFile) -> CliResult<()> {
    let mut json = serde_json::to_string_pretty(file).expect("document serializes");
    json.push('\n');
    write(path, json.as_bytes())
}

fn signed_parts(
    loaded: &docfile::LoadedDocument,
    path: &Path,
) -> CliResult<(tnrss::rss_core::Document, tnrss::rss_core::Signature)> {
    let doc = loaded
        .document()
        .ok_or_else(|| Failure::validation(format!("{}: document has no did", path.display())))?;
    let sig = loaded
        .signature
        .ok_or_else(|| Failure::validation(format!("{}: document has no signature", path.display())))?;
    Ok((doc, sig))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_keygen(profile: Profile, t: u32, n: u32, out_dir: &Path, with_rvs: bool) -> CliResult<ExitCode> {
    let keys = keygen_with_profile(t, n, profile, &mut OsRng).map_err(|e| match e {
        SchemeError::InvalidParams(_) => Failure::validation(e.to_string()),
        other => Failure::crypto(other.to_string()),
    })?;
    fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;

    let mut files = vec![
        ("pk.tnr".to_string(), keys.public.to_bytes()),
        ("sk.tnr".to_string(), keys.secret.to_bytes()),
    ];
    for rk in &keys.redactors {
        files.push((format!("rk-{}.tnr", rk.index), rk.to_bytes()));
    }
    if with_rvs {
        files.push(("rvs.tnr".to_string(), keys.verification.to_bytes()));
    }
    for (name, bytes) in &files {
        let path = out_dir.join(name);
        write(&path, bytes)?;
        println!("{:<12} {}", name, fingerprint(bytes));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sign(profile: Profile, sk_path: &Path, doc_path: &Path, out: &Path) -> CliResult<ExitCode> {
    let sk = SecretKey::from_bytes(&read(sk_path)?)
        .map_err(|e| Failure::validation(format!("{}: {e}", sk_path.display())))?;
    check_profile(profile, sk.profile, sk_path)?;
    let loaded = load_doc(doc_path)?;
    let (doc, sig) = sign(&sk, &loaded.block_set(), &loaded.adm, &mut OsRng)
        .map_err(|e| Failure::validation(e.to_string()))?;
    store_doc(out, &DocumentFile::store(&loaded.ordered, &doc.adm, Some(&doc.did), Some(&sig)))?;
    println!("signed {} blocks, did {}", doc.blocks.len(), doc.did);
    Ok(ExitCode::SUCCESS)
}

fn parse_mod(spec: &str, loaded: &docfile::LoadedDocument) -> CliResult<BlockSet> {
    let mut seen = BTreeSet::new();
    let mut out = BlockSet::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let i: usize = part
            .parse()
            .map_err(|_| Failure::validation(format!("--mod: {part:?} is not a block index")))?;
        let block = loaded
            .ordered
            .get(i)
            .ok_or_else(|| Failure::validation(format!("--mod: index {i} out of range")))?;
        if !seen.insert(i) {
            return Err(Failure::validation(format!("--mod: index {i} listed twice")));
        }
        out.insert(block.clone());
    }
    Ok(out)
}

fn cmd_redinf(
    profile: Profile,
    pk_path: &Path,
    rk_path: &Path,
    doc_path: &Path,
    mod_spec: &str,
    state_dir: &Path,
    out: &Path,
) -> CliResult<ExitCode> {
    let pk = load_pk(profile, pk_path)?;
    let rk = RedactorKey::from_bytes(&read(rk_path)?)
        .map_err(|e| Failure::validation(format!("{}: {e}", rk_path.display())))?;
    check_profile(profile, rk.profile, rk_path)?;
    let loaded = load_doc(doc_path)?;
    let (doc, sig) = signed_parts(&loaded, doc_path)?;
    let vote = parse_mod(mod_spec, &loaded)?;

    fs::create_dir_all(state_dir).map_err(|e| Failure::io(state_dir, e))?;
    let journal = state_dir.join(format!("redactor-{}.journal", rk.index));
    let mut state = RedactorState::with_journal(rk, &journal).map_err(|e| match e {
        RedactError::Journal(io) => Failure::io(&journal, io),
        other => Failure::io(&journal, other),
    })?;
    let info = state.red_inf(&pk, &doc, &sig, &vote).map_err(|e| match e {
        RedactError::DidReplayed | RedactError::InvalidMod(_) => Failure::validation(format!("{e:?}: {e}")),
        RedactError::Journal(io) => Failure::io(&journal, io),
        other => Failure::crypto(format!("{other:?}: {other}")),
    })?;
    write(out, &info.to_bytes())?;
    println!("redactor {} voted for {} blocks", info.redactor_index, info.shares.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_combine(
    profile: Profile,
    pk_path: &Path,
    doc_path: &Path,
    ri_paths: &[PathBuf],
    rvs_path: Option<&Path>,
    out: &Path,
) -> CliResult<ExitCode> {
    let pk = load_pk(profile, pk_path)?;
    let loaded = load_doc(doc_path)?;
    let (doc, sig) = signed_parts(&loaded, doc_path)?;
    let infos = ri_paths
        .iter()
        .map(|p| {
            RedactionInfo::from_bytes(&read(p)?)
                .map_err(|e| Failure::validation(format!("{}: {e}", p.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rvs = rvs_path
        .map(|p| {
            let set = RedactorVerificationSet::from_bytes(&read(p)?)
                .map_err(|e| Failure::validation(format!("{}: {e}", p.display())))?;
            check_profile(profile, set.profile, p)?;
            Ok(set)
        })
        .transpose()?;

    let (redacted, updated) = thr_red_with(&pk, &doc, &sig, &infos, rvs.as_ref()).map_err(|e| match e {
        RedactError::CombineFailed => Failure::crypto(format!("{e:?}: {e}")),
        other => Failure::validation(format!("{other:?}: {other}")),
    })?;
    let kept: Vec<_> = loaded
        .ordered
        .iter()
        .filter(|b| redacted.blocks.contains(*b))
        .cloned()
        .collect();
    store_doc(out, &DocumentFile::store(&kept, &redacted.adm, Some(&redacted.did), Some(&updated)))?;
    println!(
        "removed {} of {} blocks",
        loaded.ordered.len() - kept.len(),
        loaded.ordered.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(profile: Profile, pk_path: &Path, doc_path: &Path) -> CliResult<ExitCode> {
    let pk = load_pk(profile, pk_path)?;
    let loaded = load_doc(doc_path)?;
    let (doc, sig) = signed_parts(&loaded, doc_path)?;
    if verify(&pk, &doc, &sig) {
        println!("ACCEPT");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("REJECT");
        Ok(ExitCode::from(1))
    }
}

fn cmd_demo(protected: bool, seed: u64) -> CliResult<ExitCode> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys = tnrss::rss_core::keygen(2, 3, &mut rng).map_err(|e| Failure::crypto(e.to_string()))?;
    let transcript = run_forgery_demo(&keys.public, &keys.secret, &keys.redactors, protected, &mut rng);
    print!("{}", transcript.render_text());
    let expected = if protected {
        transcript.forged.is_none() && transcript.blocked.is_some()
    } else {
        transcript.is_novel_forgery()
    };
    Ok(if expected { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_selftest(seed: u64) -> CliResult<ExitCode> {
    let journal_dir = std::env::temp_dir().join(format!("tnrss-selftest-{}-{seed}", std::process::id()));
    let _ = fs::remove_dir_all(&journal_dir);
    fs::create_dir_all(&journal_dir).map_err(|e| Failure::io(&journal_dir, e))?;

    let mut correctness = CorrectnessConfig::standard(seed, 2);
    correctness.grid.truncate(3);
    let reports = vec![
        run_correctness_suite(&correctness),
        run_transparency_check(50, seed),
        run_threshold_boundary_check(2, 3, 3, seed),
        run_threshold_boundary_check(3, 5, 3, seed),
        run_one_time_check(10, seed, Some(&journal_dir)),
        run_forgery_check(seed),
    ];
    let _ = fs::remove_dir_all(&journal_dir);

    for r in &reports {
        print!("{}", r.render_text());
    }
    for r in &reports {
        println!("{}", r.summary_json());
    }
    let all = reports.iter().all(|r| r.passed());
    println!("selftest {}", if all { "PASSED" } else { "FAILED" });
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
