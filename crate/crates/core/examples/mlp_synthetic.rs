//! Trains a small sigmoid network on encrypted two-class data and checks
//! the run against the quantized plaintext reference after every step.

use cryptonn::authority::AuthorityState;
use cryptonn::client::{client_prepare, quantize_batches, ClientOptions};
use cryptonn::group::group_gen;
use cryptonn::mnist::{Dataset, PixelScaling};
use cryptonn::nn::{build_mlp, Hyperparams, Network, OutputKind};
use cryptonn::parallel::Workers;
use cryptonn::secure_matrix::SecureFunction;
use cryptonn::train::{accuracy, run_lockstep, EncryptedBackend, PlainBackend, Trainer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn blobs(n: usize, features: usize, rng: &mut ChaCha20Rng) -> Dataset {
    let mut xs = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let c = i % 2;
        for k in 0..features {
            let centre = if (k % 2 == 0) == (c == 0) { 1.0 } else { -1.0 };
            xs.push(centre + rng.gen_range(-0.8..0.8));
        }
        labels.push(c);
    }
    Dataset {
        image_shape: None,
        feature_len: features,
        features: xs,
        labels,
    }
}

fn main() -> cryptonn::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let ds = blobs(64, 16, &mut rng);
    let opts = ClientOptions {
        batch_size: 16,
        scaling: PixelScaling::Raw,
        ..Default::default()
    };
    let params = group_gen(64, Some(1));
    let authority = AuthorityState::setup(&params, &[2, 16], SecureFunction::ALL.into_iter().collect(), &mut rng);
    let pk = authority.public_keys();
    let bundle = client_prepare(&ds, 2, pk, &opts, &mut rng, &Workers::serial())?;

    let hp = Hyperparams {
        batch_size: 16,
        epochs: 5,
        ..Default::default()
    };
    let net = Network::new(build_mlp(&[16, 8, 2], OutputKind::SigmoidMse)?, hp.init, hp.seed)?;
    let mut secure = Trainer::new(
        net.clone(),
        hp,
        opts.codec,
        EncryptedBackend::new(&bundle, pk, &authority, Workers::serial()),
    )?;
    let plain = PlainBackend {
        codec: opts.codec,
        conv: None,
        batch_size: 16,
        batches: quantize_batches(&ds, 2, &opts)?,
    };
    let mut reference = Trainer::new(net, hp, opts.codec, plain)?;
    let (outcome, _) = run_lockstep(&mut secure, &mut reference, |r| {
        println!("iter {:2}  cost {:.4}  batch acc {:.3}", r.iter, r.cost, r.batch_acc);
    })?;
    println!("{outcome:?}");
    println!("training accuracy {:.3}", accuracy(&secure.predict()?, &ds.labels));
    Ok(())
}
