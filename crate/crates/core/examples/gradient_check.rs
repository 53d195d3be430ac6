//! Compares backpropagated gradients with central differences for every cell kind.
//!
//! cargo run --example gradient_check

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rnntc::corpus::TokenSequence;
use rnntc::recurrent::{gradient_check, CellKind, ModelConfig, RecurrentClassifier};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq = TokenSequence::from_ids(vec![0, 0, 4, 9, 2, 7]);
    let mut y = Array1::zeros(4);
    y[2] = 1.0;
    for kind in CellKind::ALL {
        let cfg = ModelConfig::new(kind, 10, 4, 5, 4, seq.len());
        let model = RecurrentClassifier::new(cfg, &mut ChaCha8Rng::seed_from_u64(11))?;
        let check = gradient_check(&model, &seq, y.view(), 1e-5)?;
        println!(
            "{:<5} {:>5} components, max relative error {:.2e} at {}[{}]",
            kind.display_name(),
            check.n_checked,
            check.max_rel_error,
            check.worst.0,
            check.worst.1
        );
    }
    Ok(())
}
