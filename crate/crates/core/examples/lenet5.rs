//! LeNet-5 with its first convolution computed over encrypted images.
//!
//! Every sample contributes 784 encrypted windows plus a 784x25 patch
//! matrix, so this runs on a handful of digits.
//!
//! cargo run --release --example lenet5 -- [samples] [iterations]

use std::path::PathBuf;

use cryptonn::authority::AuthorityState;
use cryptonn::client::{client_prepare, quantize_batches, ClientOptions};
use cryptonn::group::group_gen;
use cryptonn::mnist::Dataset;
use cryptonn::nn::{build_lenet5, Hyperparams, LayerSpec, Network};
use cryptonn::parallel::Workers;
use cryptonn::secure_matrix::SecureFunction;
use cryptonn::train::{run_lockstep, EncryptedBackend, PlainBackend, Trainer};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn main() -> cryptonn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let samples: usize = args.get(1).map_or(4, |s| s.parse().expect("samples"));
    let iterations: usize = args.get(2).map_or(2, |s| s.parse().expect("iterations"));

    let ds = Dataset::load_idx(
        &data("mnist-train-images-idx3-ubyte.gz"),
        &data("mnist-train-labels-idx1-ubyte.gz"),
    )?
    .take(samples);
    let layers = build_lenet5();
    let LayerSpec::Conv(c1) = layers[0] else { unreachable!() };
    let opts = ClientOptions {
        batch_size: samples.div_ceil(2).max(1),
        conv: Some(c1),
        ..Default::default()
    };
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let params = group_gen(64, Some(1));
    let etas = [10, c1.window_len(), c1.positions()];
    let authority = AuthorityState::setup(&params, &etas, SecureFunction::ALL.into_iter().collect(), &mut rng);
    let pk = authority.public_keys();
    let workers = Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get()));

    let t = std::time::Instant::now();
    let bundle = client_prepare(&ds, 10, pk, &opts, &mut rng, &workers)?;
    let stats = bundle.stats();
    println!(
        "encrypted {samples} images in {:.1}s: {} inner-product ciphertexts",
        t.elapsed().as_secs_f64(),
        stats.feip_ciphertexts
    );

    let hp = Hyperparams {
        learning_rate: 0.1,
        batch_size: opts.batch_size,
        epochs: iterations,
        iterations: Some(iterations),
        ..Default::default()
    };
    let net = Network::new(layers, hp.init, hp.seed)?;
    println!("{} parameters", net.parameter_count());
    let mut secure = Trainer::new(
        net.clone(),
        hp,
        opts.codec,
        EncryptedBackend::new(&bundle, pk, &authority, workers),
    )?;
    let plain = PlainBackend {
        codec: opts.codec,
        conv: Some(c1),
        batch_size: opts.batch_size,
        batches: quantize_batches(&ds, 10, &opts)?,
    };
    let mut reference = Trainer::new(net, hp, opts.codec, plain)?;
    let (outcome, _) = run_lockstep(&mut secure, &mut reference, |r| {
        println!(
            "iter {}  cost {:.4}  batch acc {:.3}  {:.0} ms",
            r.iter, r.cost, r.batch_acc, r.timing_ms
        );
    })?;
    println!("{outcome:?}");
    Ok(())
}
