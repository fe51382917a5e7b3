//! Command-line surface: table searches, density counts, witness
//! construction, certification and verification.
//!
//! Machine-readable output goes to stdout (or --out); progress and
//! summaries go to stderr. The same argv and seed always produce identical
//! bytes.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use rug::Integer;

use covercert::certify;
use covercert::coverings;
use covercert::factorbase::{self, PrimitiveOutcome};
use covercert::tables::{self, DensityTarget, GoodDigitTable, PairTable};
use covercert::witness::{self, WitnessKind};

const USAGE: &str = "covercert <command> [options]

commands:
  tables g                       digit table: members with witness digits
  tables pairs                   pair census and pair witness window
  tables tenprimes               (prime, k) assignment for every r in [1,640]
  tables exceptions --bound N    count and list r in [1,N] with no witness route
  density --x N                  exact satisfying count and fraction up to N
  density --bound J              closed-form density defect bound after J+1 digits
  witness --r R [--a A] [--kind sierpinski|riesel]
                                 construct a witness and emit its certificate
  witness --covering FILE --kind K [--a A]
                                 construct (r, k) over a covering from a file
  certify --in FILE              turn a witness file into a certificate
  verify --in FILE               verify a certificate (exit 0 ok, 1 refuted, 2 malformed)
  covering standard --tau T [--a A]
                                 emit the binary covering with primitive primes
  covering verify --in FILE --m M
                                 check coverage multiplicity and primitivity
  zsigmondy --a A --b B --n N    least primitive prime of a^n - b^n

options:
  --seed N        randomness seed for root splitting (default 0)
  --cache DIR     table cache directory (default $COVERCERT_CACHE or ./covercert-cache)
  --recompute     ignore cached tables and rebuild them
  --jobs N        worker threads for searches (default 1)
  --out FILE      write machine output to FILE instead of stdout
  --emit cert|witness   what `witness` prints (default cert)
";

enum Failure {
    Usage(String),
    Run(covercert::Error),
    Io(String),
}

impl From<covercert::Error> for Failure {
    fn from(e: covercert::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

struct Opts {
    positionals: Vec<String>,
    flags: HashMap<String, String>,
    recompute: bool,
    verbose: bool,
    help: bool,
}

impl Opts {
    fn parse(args: &[String]) -> Result<Opts, Failure> {
        let mut positionals = Vec::new();
        let mut flags = HashMap::new();
        let mut recompute = false;
        let mut verbose = false;
        let mut help = false;
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if arg == "--recompute" {
                recompute = true;
            } else if arg == "-v" || arg == "--verbose" {
                verbose = true;
            } else if arg == "-h" || arg == "--help" || arg == "help" {
                help = true;
            } else if let Some(name) = arg.strip_prefix("--") {
                let value = it
                    .next()
                    .ok_or_else(|| Failure::Usage(format!("--{name} needs a value")))?;
                flags.insert(name.to_string(), value.clone());
            } else {
                positionals.push(arg.clone());
            }
        }
        Ok(Opts {
            positionals,
            flags,
            recompute,
            verbose,
            help,
        })
    }

    fn flag_u64(&self, name: &str) -> Result<Option<u64>, Failure> {
        match self.flags.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Failure::Usage(format!("--{name} wants an integer"))),
        }
    }

    fn flag_int(&self, name: &str) -> Result<Option<Integer>, Failure> {
        match self.flags.get(name) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Failure::Usage(format!("--{name} wants an integer"))),
        }
    }

    fn seed(&self) -> Result<u64, Failure> {
        Ok(self.flag_u64("seed")?.unwrap_or(0))
    }

    fn cache_dir(&self) -> PathBuf {
        if let Some(dir) = self.flags.get("cache") {
            return PathBuf::from(dir);
        }
        if let Ok(dir) = std::env::var("COVERCERT_CACHE") {
            if !dir.is_empty() {
                return PathBuf::from(dir);
            }
        }
        PathBuf::from("covercert-cache")
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match self.flags.get("out") {
            Some(path) => fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            ExitCode::from(64)
        }
        Err(Failure::Run(e)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(args: &[String]) -> Result<u8, Failure> {
    let opts = Opts::parse(args)?;
    let jobs = opts.flag_u64("jobs")?.unwrap_or(1).max(1) as usize;
    with_jobs(jobs, || run(&opts))
}

#[cfg(feature = "parallel")]
fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<T>(_jobs: usize, f: impl FnOnce() -> T) -> T {
    f()
}

fn run(opts: &Opts) -> Result<u8, Failure> {
    let command = match opts.positionals.first() {
        Some(c) => c,
        None if opts.help => {
            print!("{USAGE}");
            return Ok(0);
        }
        None => return Err(Failure::Usage("missing command".into())),
    };
    if opts.help {
        print!("{}", command_help(command));
        return Ok(0);
    }
    match command.as_str() {
        "tables" => run_tables(opts),
        "density" => run_density(opts),
        "witness" => run_witness(opts),
        "certify" => run_certify(opts),
        "verify" => run_verify(opts),
        "covering" => run_covering(opts),
        "zsigmondy" => run_zsigmondy(opts),
        other => Err(Failure::Usage(format!("unknown command `{other}`"))),
    }
}

fn command_help(command: &str) -> String {
    let text = match command {
        "tables" => {
            "covercert tables g|pairs|tenprimes|exceptions [--bound N]

g           The base-641 digit census: digits d admitting a k with
            C(k, d) ≡ -1 (mod 641), with the least witness k per digit.
            Evaluated through Lucas' theorem on base-641 digit products.
pairs       The ordered-pair census over the non-witnessed digits: pairs
            (d', d'') with no (k', k'') solving
            C(k',d')C(k'',d'') ≡ -1 (mod 641), plus the least witness pair
            for every ordered pair in [1,515]^2.
tenprimes   For every r in [1, 640], the first prime p (ascending through
            the eleven-prime set whose members divide some 2^(2^t)+1 with a
            second prime in the cofactor) such that C(k, r) ≡ -1 (mod p)
            is solvable, with the least such k.
exceptions  Counts r in [1, --bound N] whose base-641 digits admit neither
            a single-digit witness nor a workable digit pair.
"
        }
        "density" => {
            "covercert density --x N | --bound J

--x N       Exact count of r in [1, N] admitting a witness route, as used
            by the density statement that the satisfying fraction tends
            to 1. N may have one or two base-641 digits.
--bound J   The closed-form bound ((641-395)^(J+1)-1)/(641^(J+1)-1) on the
            defect 1 - S(641^(J+1)-1)/(641^(J+1)-1), as an exact rational.
"
        }
        "witness" => {
            "covercert witness --r R [--a A] [--kind sierpinski|riesel] [--emit cert|witness]
covercert witness --covering FILE --kind sierpinski|riesel|both [--a A]

Constructs k (and, with --covering, also r) such that C(k, r) * a^n ± 1
is divisible by a covering prime for every n: the Sierpinski/Riesel
witness constructions over covering systems of two-power congruence
classes, driven by Lucas' theorem digit surgery and the Chinese remainder
theorem. For base 2 the digit tables at 641 are used when the digits of r
allow it, falling back to the eleven-prime assignment for r in [1, 640];
other bases use the odd-r construction over primitive prime divisors
(Zsigmondy). With --covering, the generalized construction manufactures r
and k over any supplied (a,1)-primitive m-covering; kind `both` needs a
partitioned covering and certifies both signs at once.
"
        }
        "certify" => {
            "covercert certify --in WITNESS_FILE

Packages a witness file into a certificate: one class per covering
congruence carrying its prime and sign, plus the congruence ledger.
"
        }
        "verify" => {
            "covercert verify --in CERT_FILE

Re-checks a certificate from scratch: class coverage over one full
period, primality of the class primes, the divisibility
C(k,r) * a^n ± 1 ≡ 0 at each class with the order condition a^m ≡ 1 that
propagates it, the magnitude condition making every divisor proper, the
gcd conditions against a-1, the power-of-a exclusion, and oddness for
base 2. Exit 0 verified, 1 refuted, 2 malformed.
"
        }
        "covering" => {
            "covercert covering standard --tau T [--a A --b B]
covercert covering verify --in FILE [--m M]

standard    Emits { 0 (mod 2^T) } ∪ { 2^(l-1) (mod 2^l) : 1 <= l <= T }
            with distinct primitive primes of a^m - b^m attached to each
            class (Zsigmondy primitive divisors).
verify      Scans one full period for multiplicity-M coverage and, when
            primes are present, re-checks that each is a primitive divisor
            for its class modulus and all are distinct.
"
        }
        "zsigmondy" => {
            "covercert zsigmondy --a A --b B --n N

Least prime dividing A^N - B^N but no earlier A^i - B^i, or `exception`
in the two excluded cases ((A,B) = (2,1) with N = 6; A+B a power of two
with N = 2).
"
        }
        _ => USAGE,
    };
    text.to_string()
}

// ---- cached tables ------------------------------------------------------

fn cached<T>(
    opts: &Opts,
    name: &str,
    parse: impl Fn(&str) -> covercert::Result<T>,
    compute: impl FnOnce() -> covercert::Result<T>,
    write: impl Fn(&T) -> String,
) -> Result<T, Failure> {
    let dir = opts.cache_dir();
    let path = dir.join(name);
    if !opts.recompute {
        if let Ok(text) = fs::read_to_string(&path) {
            match parse(&text) {
                Ok(t) => {
                    if opts.verbose {
                        eprintln!("loaded {}", path.display());
                    }
                    return Ok(t);
                }
                Err(e) => eprintln!("cache {} is stale ({e}); recomputing", path.display()),
            }
        }
    }
    eprintln!("computing {name} ...");
    let value = compute()?;
    fs::create_dir_all(&dir)?;
    fs::write(&path, write(&value))?;
    Ok(value)
}

fn good_digits(opts: &Opts) -> Result<GoodDigitTable, Failure> {
    cached(
        opts,
        "g-641.txt",
        tables::parse_good_digits,
        || Ok(tables::compute_good_digits(641)),
        tables::write_good_digits,
    )
}

fn pair_table(opts: &Opts, g: &GoodDigitTable) -> Result<PairTable, Failure> {
    cached(
        opts,
        "pairs-641.txt",
        tables::parse_pair_table,
        || Ok(tables::compute_pair_table(g)),
        tables::write_pair_table,
    )
}

// ---- subcommands ---------------------------------------------------------

fn run_tables(opts: &Opts) -> Result<u8, Failure> {
    let which = opts
        .positionals
        .get(1)
        .ok_or_else(|| Failure::Usage("tables wants g|pairs|tenprimes|exceptions".into()))?;
    match which.as_str() {
        "g" => {
            let g = good_digits(opts)?;
            let odd = g.members.iter().filter(|&&m| m % 2 == 1).count();
            eprintln!(
                "members {} (odd {}, even {})",
                g.members.len(),
                odd,
                g.members.len() - odd
            );
            opts.emit(&tables::write_good_digits(&g))?;
            Ok(0)
        }
        "pairs" => {
            let g = good_digits(opts)?;
            let pt = pair_table(opts, &g)?;
            let window_clean = pt
                .bad_pairs
                .iter()
                .all(|&(a, b)| !((1..=515).contains(&a) && (1..=515).contains(&b)));
            eprintln!(
                "bad digits {}; failing ordered pairs {}; pair window clean: {}",
                pt.bad.len(),
                pt.bad_pairs.len(),
                window_clean
            );
            opts.emit(&tables::write_pair_table(&pt))?;
            Ok(0)
        }
        "tenprimes" => {
            let seed = opts.seed()?;
            let tw = cached(
                opts,
                "tenprimes.txt",
                tables::parse_ten_primes,
                || tables::verify_ten_primes(seed),
                tables::write_ten_primes,
            )?;
            eprintln!("assigned {} residues", tw.assignments.len());
            opts.emit(&tables::write_ten_primes(&tw))?;
            Ok(0)
        }
        "exceptions" => {
            let bound = opts
                .flag_u64("bound")?
                .ok_or_else(|| Failure::Usage("exceptions wants --bound N".into()))?;
            if bound > 641 * 641 {
                return Err(Failure::Usage(
                    "the census covers one- and two-digit values: --bound at most 410881".into(),
                ));
            }
            let g = good_digits(opts)?;
            let pt = pair_table(opts, &g)?;
            let (count, list) = tables::count_exceptional(bound, &g, &pt);
            let mut out = format!("count {count}\n");
            for r in list {
                out.push_str(&format!("{r}\n"));
            }
            opts.emit(&out)?;
            Ok(0)
        }
        other => Err(Failure::Usage(format!(
            "unknown tables subcommand `{other}`"
        ))),
    }
}

fn run_density(opts: &Opts) -> Result<u8, Failure> {
    let g = good_digits(opts)?;
    if let Some(j) = opts.flag_u64("bound")? {
        let j = u32::try_from(j).map_err(|_| Failure::Usage("--bound too large".into()))?;
        let bound = tables::density_bound(j, &g);
        let out = format!("j {j}\nbound {bound}\ndecimal {:.10}\n", bound.to_f64());
        opts.emit(&out)?;
        return Ok(0);
    }
    let x = opts
        .flag_u64("x")?
        .ok_or_else(|| Failure::Usage("density wants --x N or --bound J".into()))?;
    if !(1..=641 * 641).contains(&x) {
        return Err(Failure::Usage(
            "--x must lie in [1, 410881] (one- or two-digit values)".into(),
        ));
    }
    let pt = pair_table(opts, &g)?;
    let sat = tables::density_count(x, &g, &pt, DensityTarget::Sierpinski);
    let out = format!(
        "x {x}\nsatisfying {sat}\nfraction {sat}/{x}\ndecimal {:.10}\n",
        sat as f64 / x as f64
    );
    opts.emit(&out)?;
    Ok(0)
}

fn parse_kind(opts: &Opts) -> Result<WitnessKind, Failure> {
    match opts.flags.get("kind") {
        None => Ok(WitnessKind::Sierpinski),
        Some(s) => WitnessKind::parse(s)
            .ok_or_else(|| Failure::Usage("kind must be sierpinski, riesel, or both".into())),
    }
}

fn run_witness(opts: &Opts) -> Result<u8, Failure> {
    let kind = parse_kind(opts)?;
    let seed = opts.seed()?;

    let w = if let Some(path) = opts.flags.get("covering") {
        let text = fs::read_to_string(path)?;
        let file = coverings::parse_covering(&text)?;
        let a = opts.flag_int("a")?.unwrap_or_else(|| file.a.clone());
        if a != file.a {
            return Err(Failure::Usage(format!(
                "--a {a} disagrees with the covering file (a={})",
                file.a
            )));
        }
        let pc = file.into_primitive()?;
        witness::witness_infr(&a, &pc, kind)?
    } else {
        let r = opts
            .flag_int("r")?
            .ok_or_else(|| Failure::Usage("witness wants --r R or --covering FILE".into()))?;
        let a = opts.flag_int("a")?.unwrap_or_else(|| Integer::from(2));
        if a < 2 {
            return Err(Failure::Usage("--a must be at least 2".into()));
        }
        match kind {
            WitnessKind::Both => {
                return Err(Failure::Usage(
                    "kind both needs --covering FILE with a partition".into(),
                ))
            }
            WitnessKind::Sierpinski if a == 2 => {
                let g = good_digits(opts)?;
                let pt = pair_table(opts, &g)?;
                match witness::witness_sierpinski(&r, &g, &pt) {
                    Ok(w) => w,
                    Err(covercert::Error::ConditionUnsatisfied) => match r.to_u64() {
                        Some(small) if (1..=640).contains(&small) => {
                            witness::witness_small_r(small, seed)?
                        }
                        _ => return Err(covercert::Error::ConditionUnsatisfied.into()),
                    },
                    Err(e) => return Err(e.into()),
                }
            }
            _ => witness::witness_oddr(&a, &r, kind, 8)?,
        }
    };

    let r_str = w.r.to_string();
    let r_disp = if r_str.len() > 40 {
        format!("<{} digits>", r_str.len())
    } else {
        r_str
    };
    eprintln!(
        "witness: a={} r={} k has {} digits, {} covering classes",
        w.base,
        r_disp,
        w.k.to_string().len(),
        w.covering.covering.congruences.len()
    );
    match opts.flags.get("emit").map(String::as_str) {
        None | Some("cert") => {
            let cert = certify::build_certificate(&w);
            opts.emit(&certify::serialize(&cert))?;
        }
        Some("witness") => {
            opts.emit(&certify::serialize_witness(&w))?;
        }
        Some(other) => return Err(Failure::Usage(format!("unknown --emit `{other}`"))),
    }
    Ok(0)
}

fn run_certify(opts: &Opts) -> Result<u8, Failure> {
    let path = opts
        .flags
        .get("in")
        .ok_or_else(|| Failure::Usage("certify wants --in FILE".into()))?;
    let text = fs::read_to_string(path)?;
    let w = certify::parse_witness(&text)?;
    let cert = certify::build_certificate(&w);
    opts.emit(&certify::serialize(&cert))?;
    Ok(0)
}

fn run_verify(opts: &Opts) -> Result<u8, Failure> {
    let path = opts
        .flags
        .get("in")
        .ok_or_else(|| Failure::Usage("verify wants --in FILE".into()))?;
    let text = fs::read_to_string(path)?;
    let cert = match certify::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Ok(2);
        }
    };
    let report = certify::verify_certificate(&cert);
    opts.emit(&format!("{report}\n"))?;
    Ok(if report.verdict() { 0 } else { 1 })
}

fn run_covering(opts: &Opts) -> Result<u8, Failure> {
    let which = opts
        .positionals
        .get(1)
        .ok_or_else(|| Failure::Usage("covering wants standard|verify".into()))?;
    match which.as_str() {
        "standard" => {
            let tau = opts
                .flag_u64("tau")?
                .ok_or_else(|| Failure::Usage("covering standard wants --tau T".into()))?;
            if !(1..=62).contains(&tau) {
                return Err(Failure::Usage("--tau must lie in [1, 62]".into()));
            }
            let tau = tau as u32;
            let a = opts.flag_int("a")?.unwrap_or_else(|| Integer::from(2));
            let b = opts.flag_int("b")?.unwrap_or_else(|| Integer::from(1));
            let c = coverings::standard_binary_covering(tau);
            let pc = coverings::attach_primitive_primes(&c, &a, &b)?;
            opts.emit(&coverings::write_covering(&pc))?;
            Ok(0)
        }
        "verify" => {
            let path = opts
                .flags
                .get("in")
                .ok_or_else(|| Failure::Usage("covering verify wants --in FILE".into()))?;
            let m = opts.flag_u64("m")?.unwrap_or(1);
            let text = fs::read_to_string(path)?;
            let mut file = coverings::parse_covering(&text)?;
            if let Some(a) = opts.flag_int("a")? {
                file.a = a;
            }
            if let Some(b) = opts.flag_int("b")? {
                file.b = b;
            }
            let system = coverings::CoveringSystem::new(file.classes.clone());
            let report = coverings::verify_covering(&system, m)?;
            let mut out = format!(
                "covers {}\nmin-multiplicity {}\n",
                report.covers, report.min_multiplicity
            );
            let mut ok = report.covers;
            if file.primes.is_some() {
                let mut pc = file.into_primitive()?;
                pc.multiplicity = m.max(1);
                let primitive_ok = pc.verify()?;
                out.push_str(&format!("primitive {primitive_ok}\n"));
                ok = ok && primitive_ok;
            }
            opts.emit(&out)?;
            Ok(if ok { 0 } else { 1 })
        }
        other => Err(Failure::Usage(format!(
            "unknown covering subcommand `{other}`"
        ))),
    }
}

fn run_zsigmondy(opts: &Opts) -> Result<u8, Failure> {
    let a = opts
        .flag_int("a")?
        .ok_or_else(|| Failure::Usage("zsigmondy wants --a A".into()))?;
    let b = opts.flag_int("b")?.unwrap_or_else(|| Integer::from(1));
    let n = opts
        .flag_u64("n")?
        .ok_or_else(|| Failure::Usage("zsigmondy wants --n N".into()))?;
    if b < 1 || a <= b || n < 2 {
        return Err(Failure::Usage("need a > b >= 1 and n >= 2".into()));
    }
    match factorbase::primitive_prime(&a, &b, n)? {
        PrimitiveOutcome::Prime(p) => opts.emit(&format!("primitive {p}\n"))?,
        PrimitiveOutcome::Exception => opts.emit("exception\n")?,
    }
    Ok(0)
}
