//! Secure convolution: the client encrypts every window of an image, the
//! server obtains one key per kernel and decrypts the feature map.

use cryptonn::authority::AuthorityState;
use cryptonn::encoding::{FixedPointCodec, QuantTensor};
use cryptonn::group::group_gen;
use cryptonn::parallel::Workers;
use cryptonn::secure_conv::{self, ConvSpec};
use cryptonn::secure_matrix::SecureFunction;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn main() -> cryptonn::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    // 5x5x1 input, padding 1, 3x3 filter, stride 2 -> 3x3 output
    let spec = ConvSpec::new([5, 5, 1], 3, 1, 2, 1)?;
    let params = group_gen(256, Some(1));
    let authority = AuthorityState::setup(
        &params,
        &[spec.window_len()],
        SecureFunction::ALL.into_iter().collect(),
        &mut rng,
    );
    let pk = authority.public_keys();
    let codec = FixedPointCodec::new(0, 100)?;
    let workers = Workers::serial();

    let image = QuantTensor::new(vec![5, 5], 0, (0..25).collect())?;
    let kernel = QuantTensor::new(vec![3, 3], 0, vec![0, 1, 0, 1, -4, 1, 0, 1, 0])?;

    let enc = secure_conv::pre_process_encryption(&image, &spec, pk, &mut rng, &workers)?;
    println!("{} windows of length {}", enc.windows.len(), spec.window_len());
    let key = secure_conv::pre_process_key_derive(&kernel, &spec, &authority)?;
    let map = secure_conv::secure_convolution(&enc, &key, &kernel, pk, &codec, &workers)?;
    for row in map.data.chunks(spec.out_width()) {
        println!("{row:?}");
    }
    let plain = secure_conv::plain_convolution(&image, &[kernel], &spec)?;
    println!("equals plaintext convolution: {}", plain.data == map.data);
    Ok(())
}
