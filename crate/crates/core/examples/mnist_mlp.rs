//! Trains a 784-32-10 network on the bundled MNIST subset with the training
//! data encrypted, checking every iteration against the quantized plaintext
//! reference.
//!
//! cargo run --release --example mnist_mlp -- [epochs] [lambda]

use std::path::PathBuf;

use cryptonn::authority::AuthorityState;
use cryptonn::client::{client_prepare, quantize_batches, ClientOptions};
use cryptonn::group::group_gen;
use cryptonn::mnist::Dataset;
use cryptonn::nn::{build_mlp, Hyperparams, Network, OutputKind};
use cryptonn::parallel::Workers;
use cryptonn::secure_matrix::SecureFunction;
use cryptonn::train::{accuracy, predict_with, run_lockstep, EncryptedBackend, PlainBackend, Trainer};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn main() -> cryptonn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs: usize = args.get(1).map_or(1, |s| s.parse().expect("epochs"));
    let lambda: u32 = args.get(2).map_or(64, |s| s.parse().expect("lambda"));

    let train = Dataset::load_idx(
        &data("mnist-train-images-idx3-ubyte.gz"),
        &data("mnist-train-labels-idx1-ubyte.gz"),
    )?;
    let test = Dataset::load_idx(
        &data("mnist-test-images-idx3-ubyte.gz"),
        &data("mnist-test-labels-idx1-ubyte.gz"),
    )?;
    let opts = ClientOptions::default();
    let classes = 10;

    let params = group_gen(lambda, Some(1));
    let etas = [classes, train.feature_len, opts.batch_size];
    let permitted = SecureFunction::ALL.into_iter().collect();
    let authority = AuthorityState::setup(&params, &etas, permitted, &mut ChaCha20Rng::seed_from_u64(2));
    let workers = Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get()));

    let t0 = std::time::Instant::now();
    let bundle = client_prepare(
        &train,
        classes,
        authority.public_keys(),
        &opts,
        &mut ChaCha20Rng::seed_from_u64(3),
        &workers,
    )?;
    let test_bundle = client_prepare(
        &test,
        classes,
        authority.public_keys(),
        &opts,
        &mut ChaCha20Rng::seed_from_u64(4),
        &workers,
    )?;
    println!(
        "encrypted {} + {} samples in {:.1}s",
        train.len(),
        test.len(),
        t0.elapsed().as_secs_f64()
    );

    let hp = Hyperparams {
        epochs,
        ..Default::default()
    };
    let net = Network::new(
        build_mlp(&[784, 32, 10], OutputKind::SoftmaxCrossEntropy)?,
        hp.init,
        hp.seed,
    )?;
    let pk = authority.public_keys();
    let mut secure = Trainer::new(
        net.clone(),
        hp,
        opts.codec,
        EncryptedBackend::new(&bundle, pk, &authority, workers.clone()),
    )?;
    let reference_backend = PlainBackend {
        codec: opts.codec,
        conv: None,
        batch_size: opts.batch_size,
        batches: quantize_batches(&train, classes, &opts)?,
    };
    let mut reference = Trainer::new(net, hp, opts.codec, reference_backend)?;

    let (outcome, _) = run_lockstep(&mut secure, &mut reference, |r| {
        println!(
            "iter {:3}  cost {:.4}  batch acc {:.3}  {:.0} ms",
            r.iter, r.cost, r.batch_acc, r.timing_ms
        );
    })?;
    println!("lockstep: {outcome:?}");

    let test_backend = EncryptedBackend::new(&test_bundle, pk, &authority, workers);
    let pred = predict_with(&secure.net, &opts.codec, &test_backend)?;
    println!("test accuracy {:.3}", accuracy(&pred, &test.labels));
    let log = authority.issuance();
    println!(
        "keys issued: {} FEIP, {} FEBO in {} requests",
        log.feip_keys, log.febo_keys, log.requests
    );
    Ok(())
}
