//! Basic-operation functional encryption: one key per ciphertext computes
//! `x + y`, `x - y`, `x * y` or an exact `x / y`.

use cryptonn::febo::{self, BasicOp};
use cryptonn::group::group_gen;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> cryptonn::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let params = group_gen(256, Some(1));
    let (mpk, msk) = febo::setup(&params, &mut rng);

    let x = 84;
    let ct = febo::encrypt(&mpk, x, &mut rng);
    for (op, y) in [
        (BasicOp::Add, 16),
        (BasicOp::Sub, 100),
        (BasicOp::Mul, -3),
        (BasicOp::Div, 7),
    ] {
        let sk = febo::key_derive(&msk, &ct.cmt, op, y)?;
        let z = febo::decrypt(&mpk, &sk, &ct, op, y, 10_000)?;
        println!("x {op:?} {y} = {z}");
    }

    let sk = febo::key_derive(&msk, &ct.cmt, BasicOp::Div, 5)?;
    println!(
        "84 / 5: {:?}",
        febo::decrypt(&mpk, &sk, &ct, BasicOp::Div, 5, 10_000)
            .unwrap_err()
            .to_string()
    );

    // keys are bound to the commitment of one ciphertext
    let other = febo::encrypt(&mpk, x, &mut rng);
    let sk = febo::key_derive(&msk, &ct.cmt, BasicOp::Add, 1)?;
    println!(
        "same plaintext, fresh ciphertext: {}",
        febo::decrypt(&mpk, &sk, &other, BasicOp::Add, 1, 10_000).unwrap_err()
    );
    Ok(())
}
