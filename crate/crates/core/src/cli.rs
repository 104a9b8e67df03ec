//! The `cryptonn` command line.
//!
//! Exit codes: 0 success, 1 verification failure or trajectory mismatch,
//! 2 usage or input error, 3 cryptographic or bound error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::authority::{AuthorityState, JsonTransport, PublicKeys};
use crate::bench::{self, BenchContext, BenchOp};
use crate::client::{client_prepare, quantize_batches, sha256_hex, ClientBundle, ClientOptions};
use crate::encoding::FixedPointCodec;
use crate::error::{Error, Result};
use crate::group::group_gen;
use crate::mnist::{Dataset, PixelScaling};
use crate::nn::{build_lenet5, build_mlp, Hyperparams, LayerSpec, Network, OutputKind};
use crate::parallel::Workers;
use crate::secure_matrix::SecureFunction;
use crate::train::{
    accuracy, predict_with, run_lockstep, write_run_log, Checkpoint, EncryptedBackend, LockstepOutcome, PlainBackend,
    Trainer,
};
use crate::verify::{Verifier, VerifyOptions};

pub const MSK_FILE: &str = "authority.msk.json";
pub const MPK_FILE: &str = "public.mpk.json";

#[derive(Parser, Debug)]
#[command(
    name = "cryptonn",
    version,
    about = "Neural-network training over functionally encrypted data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the authority's key material.
    Setup(SetupArgs),
    /// Encrypt a dataset into a client bundle.
    Encrypt(EncryptArgs),
    /// Train a model on an encrypted bundle.
    Train(TrainArgs),
    /// Predict classes with a trained checkpoint.
    Predict(PredictArgs),
    /// Time the primitive operations.
    Bench(BenchArgs),
    /// Run the oracle-equivalence suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Mlp,
    Lenet5,
}

impl Preset {
    fn conv(self) -> Option<crate::secure_conv::ConvSpec> {
        match self {
            Preset::Mlp => None,
            Preset::Lenet5 => match build_lenet5()[0] {
                LayerSpec::Conv(spec) => Some(spec),
                _ => unreachable!("LeNet-5 starts with a convolution"),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scaling {
    Raw,
    Unit,
    Standardize,
}

impl From<Scaling> for PixelScaling {
    fn from(s: Scaling) -> Self {
        match s {
            Scaling::Raw => PixelScaling::Raw,
            Scaling::Unit => PixelScaling::Unit,
            Scaling::Standardize => PixelScaling::Standardize,
        }
    }
}

#[derive(Args, Debug)]
pub struct SetupArgs {
    /// Security parameter: bit length of the group modulus.
    #[arg(long, default_value_t = 256)]
    pub lambda: u32,
    /// Vector lengths to provision inner-product keys for.
    #[arg(long, value_delimiter = ',', default_value = "10,25,64,784")]
    pub etas: Vec<usize>,
    /// Functions the authority will issue keys for.
    #[arg(long, value_delimiter = ',', default_value = "dot-product,add,sub,mul,div")]
    pub functions: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overwrite existing key files.
    #[arg(long)]
    pub force: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Where a dataset comes from: IDX image/label files or one CSV file.
#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    #[arg(long, requires = "labels", conflicts_with = "csv")]
    pub images: Option<PathBuf>,
    #[arg(long, requires = "images")]
    pub labels: Option<PathBuf>,
    /// `label,f0,f1,…` rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Image shape of CSV rows as `h,w,c`.
    #[arg(long, value_delimiter = ',')]
    pub image_shape: Option<Vec<usize>>,
    /// Use only the first N samples.
    #[arg(long)]
    pub limit: Option<usize>,
}

impl DataArgs {
    fn present(&self) -> bool {
        self.images.is_some() || self.csv.is_some()
    }

    fn load(&self) -> Result<Dataset> {
        let ds = match (&self.images, &self.labels, &self.csv) {
            (Some(i), Some(l), None) => Dataset::load_idx(i, l)?,
            (None, None, Some(c)) => {
                let shape = match self.image_shape.as_deref() {
                    None => None,
                    Some(&[h, w, c]) => Some([h, w, c]),
                    Some(other) => return Err(Error::InvalidParams(format!("image shape {other:?} is not h,w,c"))),
                };
                Dataset::load_csv(c, shape)?
            }
            _ => return Err(Error::InvalidParams("give --images with --labels, or --csv".into())),
        };
        Ok(match self.limit {
            Some(n) => ds.take(n),
            None => ds,
        })
    }
}

#[derive(Args, Debug)]
pub struct EncryptArgs {
    #[arg(long)]
    pub mpk: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long, default_value_t = 64)]
    pub batch: usize,
    #[arg(long, default_value_t = 2)]
    pub scale_digits: u32,
    /// Largest quantized magnitude.
    #[arg(long, default_value_t = 25_500)]
    pub value_bound: i64,
    #[arg(long, value_enum, default_value_t = Scaling::Standardize)]
    pub scaling: Scaling,
    /// Model the bundle is prepared for; lenet5 encrypts convolution windows.
    #[arg(long, value_enum, default_value_t = Preset::Mlp)]
    pub preset: Preset,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Authority key file; the authority runs in-process behind a JSON transport.
    #[arg(long)]
    pub msk: PathBuf,
    /// Public key file, checked against the authority's.
    #[arg(long)]
    pub mpk: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Preset::Mlp)]
    pub preset: Preset,
    /// Hidden layer widths of the mlp preset.
    #[arg(long, value_delimiter = ',', default_value = "32")]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    /// Stop after this many iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Must match the bundle's batch size when given.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Must match the bundle's codec when given.
    #[arg(long)]
    pub scale_digits: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also compute the cross-entropy from the encrypted labels.
    #[arg(long)]
    pub secure_loss: bool,
    /// Train the quantized plaintext reference in lockstep and compare.
    #[arg(long)]
    pub reference_check: bool,
    /// Plaintext copy of the training data for --reference-check.
    #[command(flatten)]
    pub reference: ReferenceDataArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Run log; defaults to the checkpoint path with `.log.jsonl`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ReferenceDataArgs {
    #[arg(long = "ref-images", requires = "ref_labels")]
    pub ref_images: Option<PathBuf>,
    #[arg(long = "ref-labels", requires = "ref_images")]
    pub ref_labels: Option<PathBuf>,
    #[arg(long = "ref-csv")]
    pub ref_csv: Option<PathBuf>,
    #[arg(long = "ref-image-shape", value_delimiter = ',')]
    pub ref_image_shape: Option<Vec<usize>>,
    #[arg(long = "ref-limit")]
    pub ref_limit: Option<usize>,
}

impl ReferenceDataArgs {
    fn as_data(&self) -> DataArgs {
        DataArgs {
            images: self.ref_images.clone(),
            labels: self.ref_labels.clone(),
            csv: self.ref_csv.clone(),
            image_shape: self.ref_image_shape.clone(),
            limit: self.ref_limit,
        }
    }
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Encrypted input; needs --msk for the keys.
    #[arg(long, requires = "msk")]
    pub bundle: Option<PathBuf>,
    #[arg(long)]
    pub msk: Option<PathBuf>,
    /// Plaintext input, or true labels for an encrypted bundle.
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Write one class id per line.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "enc,keyderive,dec-add,dec-mul,dec-dot")]
    pub ops: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "100,500,1000,1500,2000")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub workers: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    pub lambda: u32,
    /// Each cell reports the fastest of this many runs.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV.
    #[arg(long, requires = "out")]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Largest vector length and matrix side.
    #[arg(long, default_value_t = 16)]
    pub max_dim: usize,
    #[arg(long, default_value_t = 64)]
    pub lambda: u32,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Flip one ciphertext bit per trial; every suite must then fail.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// A command's result: exit code 0 or 1.
type Outcome = Result<i32>;

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_crypto() {
        3
    } else {
        2
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Setup(a) => setup(a),
        Command::Encrypt(a) => encrypt(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Verify(a) => verify(a),
    }
}

fn workers(n: usize) -> Result<Workers> {
    if n == 0 {
        return Err(Error::InvalidParams("--workers must be at least 1".into()));
    }
    Ok(Workers::new(n))
}

pub fn save_public_keys(pk: &PublicKeys, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(pk)?).map_err(|e| Error::io(path, e))
}

pub fn load_public_keys(path: &Path) -> Result<PublicKeys> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pk: PublicKeys = serde_json::from_slice(&bytes).map_err(|e| {
        Error::malformed(
            format!("{} line {}, column {}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })?;
    pk.params.validate()?;
    Ok(pk)
}

fn setup(a: SetupArgs) -> Outcome {
    let permitted = a
        .functions
        .iter()
        .map(|s| s.parse())
        .collect::<Result<BTreeSet<SecureFunction>>>()?;
    if a.etas.contains(&0) {
        return Err(Error::InvalidParams("vector lengths must be positive".into()));
    }
    let msk_path = a.out.join(MSK_FILE);
    let mpk_path = a.out.join(MPK_FILE);
    if !a.force {
        for p in [&msk_path, &mpk_path] {
            if p.exists() {
                return Err(Error::InvalidParams(format!(
                    "{} exists; pass --force to overwrite",
                    p.display()
                )));
            }
        }
    }
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let t = Instant::now();
    let params = group_gen(a.lambda, Some(a.seed));
    let authority = AuthorityState::setup(&params, &a.etas, permitted, &mut ChaCha20Rng::seed_from_u64(a.seed));
    authority.save_secret(&msk_path)?;
    save_public_keys(authority.public_keys(), &mpk_path)?;
    println!(
        "{}-bit group, keys for vector lengths {:?}, functions {}",
        params.modulus.bits(),
        authority.public_keys().etas(),
        authority
            .permitted()
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!(
        "wrote {} and {} in {:.1}s",
        msk_path.display(),
        mpk_path.display(),
        t.elapsed().as_secs_f64()
    );
    Ok(0)
}

fn encrypt(a: EncryptArgs) -> Outcome {
    let pk = load_public_keys(&a.mpk)?;
    let ds = a.data.load()?;
    let opts = ClientOptions {
        codec: FixedPointCodec::new(a.scale_digits, a.value_bound)?,
        batch_size: a.batch,
        scaling: a.scaling.into(),
        conv: a.preset.conv(),
        ..Default::default()
    };
    let w = workers(a.workers)?;
    let t = Instant::now();
    let bundle = client_prepare(&ds, a.classes, &pk, &opts, &mut ChaCha20Rng::seed_from_u64(a.seed), &w)?;
    let bytes = bundle.to_bytes()?;
    fs::write(&a.out, &bytes).map_err(|e| Error::io(&a.out, e))?;
    let stats = bundle.stats();
    let sizes: Vec<String> = bundle.batches.iter().map(|b| b.size.to_string()).collect();
    println!(
        "samples {}  batches {} ({})",
        ds.len(),
        bundle.batches.len(),
        sizes.join(", ")
    );
    println!(
        "inner-product ciphertexts {} ({} group elements)  element ciphertexts {}",
        stats.feip_ciphertexts, stats.feip_elements, stats.febo_ciphertexts
    );
    println!(
        "wrote {} bytes to {} in {:.1}s",
        bytes.len(),
        a.out.display(),
        t.elapsed().as_secs_f64()
    );
    println!("sha256 {}", sha256_hex(&bytes));
    Ok(0)
}

fn load_bundle(path: &Path) -> Result<(ClientBundle, String)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let digest = sha256_hex(&bytes);
    let bundle = ClientBundle::from_bytes(&bytes).map_err(|e| match e {
        Error::MalformedInput { position, message } => Error::MalformedInput {
            position: format!("{} {position}", path.display()),
            message,
        },
        other => other,
    })?;
    Ok((bundle, digest))
}

fn model_layers(preset: Preset, hidden: &[usize], bundle: &ClientBundle) -> Result<Vec<LayerSpec>> {
    let s = &bundle.shapes;
    match preset {
        Preset::Mlp => {
            if s.conv.is_some() {
                return Err(Error::InvalidParams(
                    "bundle holds convolution windows; use --preset lenet5".into(),
                ));
            }
            let mut widths = vec![s.feature_len];
            widths.extend(hidden);
            widths.push(s.classes);
            build_mlp(&widths, OutputKind::SoftmaxCrossEntropy)
        }
        Preset::Lenet5 => {
            if s.conv != preset.conv() || s.classes != 10 {
                return Err(Error::InvalidParams("bundle was not prepared for lenet5".into()));
            }
            Ok(build_lenet5())
        }
    }
}

fn train(a: TrainArgs) -> Outcome {
    let (bundle, digest) = load_bundle(&a.bundle)?;
    if let Some(b) = a.batch {
        if b != bundle.shapes.batch_size {
            return Err(Error::InvalidParams(format!(
                "--batch {b}, bundle batch size is {}",
                bundle.shapes.batch_size
            )));
        }
    }
    if let Some(d) = a.scale_digits {
        if d != bundle.codec.scale_digits() {
            return Err(Error::InvalidParams(format!(
                "--scale-digits {d}, bundle uses {}",
                bundle.codec.scale_digits()
            )));
        }
    }
    let authority = AuthorityState::load_secret(&a.msk)?;
    if let Some(p) = &a.mpk {
        if &load_public_keys(p)? != authority.public_keys() {
            return Err(Error::KeyMismatch(format!(
                "{} does not belong to {}",
                p.display(),
                a.msk.display()
            )));
        }
    }
    bundle.check_keys(authority.public_keys())?;
    let transport = JsonTransport::new(&authority);
    let pk = authority.public_keys();
    let hp = Hyperparams {
        learning_rate: a.lr,
        batch_size: bundle.shapes.batch_size,
        epochs: a.epochs,
        iterations: a.iters,
        seed: a.seed,
        ..Default::default()
    };
    let layers = model_layers(a.preset, &a.hidden, &bundle)?;
    let net = Network::new(layers, hp.init, hp.seed)?;
    let w = workers(a.workers)?;
    println!("bundle sha256 {digest}");
    println!(
        "{} samples in {} batches, {} parameters",
        bundle.shapes.samples,
        bundle.batches.len(),
        net.parameter_count()
    );

    let backend = EncryptedBackend::new(&bundle, pk, &transport, w);
    let mut secure = Trainer::new(net.clone(), hp, bundle.codec, backend)?;
    secure.secure_loss = a.secure_loss;
    let quiet = a.quiet;
    let print = |r: &crate::train::IterationRecord| {
        if !quiet {
            println!(
                "iter {:4}  cost {:.6}  batch_acc {:.4}  {:.0} ms",
                r.iter, r.cost, r.batch_acc, r.timing_ms
            );
        }
    };
    let started = Instant::now();
    let (log, matched) = if a.reference_check {
        let data = a.reference.as_data();
        if !data.present() {
            return Err(Error::InvalidParams(
                "--reference-check needs --ref-images/--ref-labels or --ref-csv".into(),
            ));
        }
        let ds = data.load()?;
        let opts = ClientOptions {
            codec: bundle.codec,
            batch_size: bundle.shapes.batch_size,
            scaling: bundle.scaling,
            conv: bundle.shapes.conv,
            ..Default::default()
        };
        if ds.len() != bundle.shapes.samples || ds.feature_len != bundle.shapes.feature_len {
            return Err(Error::ShapeMismatch(format!(
                "reference data has {} samples of {} features, bundle {} of {}",
                ds.len(),
                ds.feature_len,
                bundle.shapes.samples,
                bundle.shapes.feature_len
            )));
        }
        let plain = PlainBackend {
            codec: bundle.codec,
            conv: bundle.shapes.conv,
            batch_size: bundle.shapes.batch_size,
            batches: quantize_batches(&ds, bundle.shapes.classes, &opts)?,
        };
        let mut reference = Trainer::new(net, hp, bundle.codec, plain)?;
        reference.secure_loss = a.secure_loss;
        let (outcome, log) = run_lockstep(&mut secure, &mut reference, print)?;
        (log, Some(outcome))
    } else {
        let log = secure.run(|r, _| {
            print(r);
            Ok(())
        })?;
        (log, None)
    };

    Checkpoint::of(&secure, bundle.scaling).save(&a.out)?;
    let log_path = a.log.clone().unwrap_or_else(|| a.out.with_extension("log.jsonl"));
    write_run_log(&log_path, &log)?;
    let issued = authority.issuance();
    println!(
        "{} iterations in {:.1}s; keys issued: {} inner-product, {} element-wise in {} requests",
        log.len(),
        started.elapsed().as_secs_f64(),
        issued.feip_keys,
        issued.febo_keys,
        issued.requests
    );
    println!("wrote {} and {}", a.out.display(), log_path.display());
    match matched {
        None => Ok(0),
        Some(LockstepOutcome::ExactMatch { iterations }) => {
            println!("reference check: EXACT MATCH over {iterations} iterations");
            Ok(0)
        }
        Some(LockstepOutcome::Diverged { iteration, detail }) => {
            println!("reference check: MISMATCH at iteration {iteration}: {detail}");
            Ok(1)
        }
    }
}

fn predict(a: PredictArgs) -> Outcome {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let net = ck.network()?;
    let w = workers(a.workers)?;
    let (pred, truth) = match (&a.bundle, &a.msk) {
        (Some(bpath), Some(msk)) => {
            let (bundle, digest) = load_bundle(bpath)?;
            println!("bundle sha256 {digest}");
            let authority = AuthorityState::load_secret(msk)?;
            bundle.check_keys(authority.public_keys())?;
            let transport = JsonTransport::new(&authority);
            let backend = EncryptedBackend::new(&bundle, authority.public_keys(), &transport, w);
            let pred = predict_with(&net, &bundle.codec, &backend)?;
            let truth = if a.data.present() {
                Some(a.data.load()?.labels)
            } else {
                None
            };
            (pred, truth)
        }
        _ => {
            let ds = a.data.load()?;
            let conv = match net.layers.first() {
                Some(LayerSpec::Conv(spec)) => Some(*spec),
                _ => None,
            };
            let classes = net.output_len();
            let opts = ClientOptions {
                codec: ck.codec,
                batch_size: ck.hyperparams.batch_size,
                scaling: ck.scaling,
                conv,
                ..Default::default()
            };
            let plain = PlainBackend {
                codec: ck.codec,
                conv,
                batch_size: opts.batch_size,
                batches: quantize_batches(&ds, classes, &opts)?,
            };
            (predict_with(&net, &ck.codec, &plain)?, Some(ds.labels))
        }
    };
    if let Some(path) = &a.out {
        let text: String = pred.iter().map(|c| format!("{c}\n")).collect();
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    match truth {
        Some(t) if t.len() == pred.len() => println!("{} predictions, accuracy {:.4}", pred.len(), accuracy(&pred, &t)),
        _ => println!("{} predictions", pred.len()),
    }
    Ok(0)
}

fn bench_cmd(a: BenchArgs) -> Outcome {
    let ops = a.ops.iter().map(|s| s.parse()).collect::<Result<Vec<BenchOp>>>()?;
    if a.workers.contains(&0) {
        return Err(Error::InvalidParams("--workers must be at least 1".into()));
    }
    let rows = if a.sizes.iter().all(|&s| s == 0) {
        Vec::new()
    } else {
        let ctx = BenchContext::new(&group_gen(a.lambda, Some(a.seed)), a.seed);
        ctx.run(&ops, &a.sizes, &a.workers, a.repeats, a.seed)?
    };
    match &a.out {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            bench::write_csv(f, &rows)?;
            if let Some(gp) = &a.gnuplot {
                let script = bench::gnuplot_script(&path.display().to_string(), &rows);
                fs::write(gp, script).map_err(|e| Error::io(gp, e))?;
            }
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => bench::write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(0)
}

fn verify(a: VerifyArgs) -> Outcome {
    let opts = VerifyOptions {
        trials: a.trials,
        max_dim: a.max_dim,
        seed: a.seed,
        inject_fault: a.inject_fault,
        workers: workers(a.workers)?,
    };
    let t = Instant::now();
    let v = Verifier::new(&group_gen(a.lambda, Some(a.seed)), opts)?;
    let reports = v.run_all();
    for r in &reports {
        println!("{r}");
    }
    let ok = reports.iter().all(|r| r.passed());
    println!(
        "{} in {:.1}s",
        if ok { "all suites passed" } else { "VERIFICATION FAILED" },
        t.elapsed().as_secs_f64()
    );
    Ok(if ok { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_flags() {
        let cli = Cli::try_parse_from([
            "cryptonn",
            "train",
            "--bundle",
            "b.json",
            "--msk",
            "k.json",
            "--preset",
            "mlp",
            "--lr",
            "0.1",
            "--epochs",
            "2",
            "--iters",
            "5",
            "--batch",
            "64",
            "--workers",
            "4",
            "--seed",
            "3",
            "--scale-digits",
            "2",
            "--secure-loss",
            "--reference-check",
            "--ref-csv",
            "x.csv",
            "--out",
            "c.json",
        ])
        .unwrap();
        let Command::Train(t) = cli.command else { panic!() };
        assert_eq!((t.lr, t.epochs, t.iters, t.workers), (0.1, 2, Some(5), 4));
        assert!(t.secure_loss && t.reference_check);
        let cli = Cli::try_parse_from(["cryptonn", "setup", "--lambda", "64", "--out", "k", "--force"]).unwrap();
        let Command::Setup(s) = cli.command else { panic!() };
        assert_eq!(s.etas, vec![10, 25, 64, 784]);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["cryptonn", "train"]), 2);
        assert_eq!(run(["cryptonn", "frobnicate"]), 2);
        assert_eq!(run(["cryptonn", "bench", "--ops", "dec-pow", "--sizes", "1"]), 2);
        assert_eq!(run(["cryptonn", "verify", "--workers", "0", "--trials", "1"]), 2);
    }

    #[test]
    fn zero_size_bench_is_empty() {
        assert_eq!(run(["cryptonn", "bench", "--sizes", "0"]), 0);
    }

    #[test]
    fn setup_refuses_to_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let args = ["cryptonn", "setup", "--lambda", "64", "--etas", "2,3", "--out", out];
        assert_eq!(run(args), 0);
        assert_eq!(run(args), 2);
        let mut forced = args.to_vec();
        forced.push("--force");
        assert_eq!(run(forced), 0);
        let pk = load_public_keys(&dir.path().join(MPK_FILE)).unwrap();
        assert_eq!(pk.etas(), vec![2, 3]);
    }
}
