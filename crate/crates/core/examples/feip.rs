//! Inner-product functional encryption: the key holder learns `<x, y>` and
//! nothing else about `x`.

use cryptonn::feip;
use cryptonn::group::group_gen;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> cryptonn::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let params = group_gen(256, Some(1));
    let (mpk, msk) = feip::setup(&params, 4, &mut rng);

    let x = [3, -1, 4, 1];
    let ct = feip::encrypt(&mpk, &x, &mut rng)?;

    for y in [[1, 0, 0, 0], [1, 1, 1, 1], [2, -7, 1, 8]] {
        let sk = feip::key_derive(&msk, &y)?;
        let z = feip::decrypt(&mpk, &ct, &sk, &y, 10_000)?;
        println!("<x, {y:?}> = {z}");
    }

    // a key only opens the vector it was derived for
    let sk = feip::key_derive(&msk, &[1, 1, 1, 1])?;
    match feip::decrypt(&mpk, &ct, &sk, &[1, 1, 1, 2], 10_000) {
        Err(e) => println!("wrong vector: {e}"),
        Ok(z) => println!("unexpected: {z}"),
    }
    Ok(())
}
