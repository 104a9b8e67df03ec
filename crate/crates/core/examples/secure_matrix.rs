//! Secure matrix computation between a client's encrypted matrix and a
//! server's plaintext matrix, with keys served by the authority.

use cryptonn::authority::AuthorityState;
use cryptonn::encoding::FixedPointCodec;
use cryptonn::group::group_gen;
use cryptonn::parallel::Workers;
use cryptonn::secure_matrix::{self, SecureFunction, Views};
use ndarray::array;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> cryptonn::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let params = group_gen(256, Some(1));
    let authority = AuthorityState::setup(&params, &[3], SecureFunction::ALL.into_iter().collect(), &mut rng);
    let pk = authority.public_keys();
    let codec = FixedPointCodec::default();
    let workers = Workers::new(2);

    // client: X is 3x2, encrypted for both products and element-wise ops
    let x = codec.quantize_matrix(&array![[0.5, -1.25], [2.0, 0.0], [1.5, 3.0]])?;
    let enc = secure_matrix::pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &workers)?;

    // server: W·X
    let w = codec.quantize_matrix(&array![[1.0, 0.5, -2.0], [0.25, 0.0, 1.0]])?;
    let keys = secure_matrix::pre_process_key_derive(&w, SecureFunction::DotProduct, &authority, Some(&enc))?;
    let z = secure_matrix::secure_computation(&enc, SecureFunction::DotProduct, &keys, &w, pk, &codec, &workers)?;
    println!("W·X =\n{}", codec.dequantize_matrix(&z)?);

    // server: X - P element by element
    let p = codec.quantize_matrix(&array![[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]])?;
    let keys = secure_matrix::pre_process_key_derive(&p, SecureFunction::Sub, &authority, Some(&enc))?;
    let z = secure_matrix::secure_computation(&enc, SecureFunction::Sub, &keys, &p, pk, &codec, &workers)?;
    println!("X - P =\n{}", codec.dequantize_matrix(&z)?);

    let log = authority.issuance();
    println!(
        "issued {} inner-product and {} element-wise keys",
        log.feip_keys, log.febo_keys
    );
    Ok(())
}
