//! Counts the keys and bytes exchanged with the authority during one
//! training iteration of a 784-32-10 network on a batch of 64.
//!
//! The server sends its 32x784 weight matrix once and receives 32 row keys
//! for the forward product, sends the 10x64 prediction with the label
//! commitments and receives 640 element-wise keys, then sends the 32x64
//! first-layer gradient and receives 32 keys for the weight gradient.

use cryptonn::authority::{AuthorityState, JsonTransport};
use cryptonn::client::{client_prepare, ClientOptions};
use cryptonn::group::group_gen;
use cryptonn::mnist::Dataset;
use cryptonn::nn::{build_mlp, Hyperparams, Network, OutputKind};
use cryptonn::parallel::Workers;
use cryptonn::secure_matrix::SecureFunction;
use cryptonn::train::{EncryptedBackend, Trainer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn main() -> cryptonn::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let n = 64;
    let ds = Dataset {
        image_shape: Some([28, 28, 1]),
        feature_len: 784,
        features: (0..n * 784).map(|_| rng.gen_range(0.0..255.0f64).round()).collect(),
        labels: (0..n).map(|i| i % 10).collect(),
    };
    let opts = ClientOptions::default();
    let lambda = 256;
    let params = group_gen(lambda, Some(1));
    let authority = AuthorityState::setup(
        &params,
        &[10, 64, 784],
        SecureFunction::ALL.into_iter().collect(),
        &mut rng,
    );
    let transport = JsonTransport::new(&authority);
    let pk = authority.public_keys();
    let workers = Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get()));
    let bundle = client_prepare(&ds, 10, pk, &opts, &mut rng, &workers)?;

    let hp = Hyperparams {
        iterations: Some(1),
        ..Default::default()
    };
    let net = Network::new(
        build_mlp(&[784, 32, 10], OutputKind::SoftmaxCrossEntropy)?,
        hp.init,
        hp.seed,
    )?;
    let mut trainer = Trainer::new(
        net,
        hp,
        opts.codec,
        EncryptedBackend::new(&bundle, pk, &transport, workers),
    )?;
    authority.reset_issuance();
    trainer.step(0)?;

    let log = authority.issuance();
    println!("one iteration at lambda = {lambda}:");
    for (f, count) in &log.by_function {
        println!("  {:<12} {count} requests", f.name());
    }
    println!("  requests       {}", log.requests);
    println!("  request bytes  {}", log.request_bytes);
    println!("  response bytes {}", log.response_bytes);
    println!(
        "  {} inner-product keys + {} element-wise keys = 2 x 32 + 10 x 64",
        log.feip_keys, log.febo_keys
    );
    Ok(())
}
