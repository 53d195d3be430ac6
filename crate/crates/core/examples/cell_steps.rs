//! Single steps of each recurrent cell on hand-sized vectors.
//!
//! cargo run --example cell_steps

use ndarray::array;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rnntc::recurrent::{
    gru_compose, gru_gates, lstm_compose, lstm_gates, srnn_step, GruParams, LstmParams, SrnnParams,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = array![0.5, -1.0, 0.25];
    let h_prev = array![0.1, 0.0];

    let mut srnn = SrnnParams::zeros(2, 3);
    srnn.b_h.fill(1.0);
    println!("sRNN  h = {}", srnn_step(x.view(), h_prev.view(), &srnn)?);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let gru = GruParams::random(2, 3, true, &mut rng);
    let g = gru_gates(x.view(), h_prev.view(), &gru)?;
    println!("GRU   z = {}, r = {}, h' = {}", g.z, g.r, g.candidate);
    println!(
        "      h = {}",
        gru_compose(g.z.view(), h_prev.view(), g.candidate.view())?
    );

    let lstm = LstmParams::random(2, 3, &mut rng);
    let c_prev = array![0.3, -0.2];
    let gates = lstm_gates(x.view(), h_prev.view(), &lstm)?;
    println!(
        "LSTM  f = {}, i = {}, g = {}, o = {}",
        gates.forget, gates.input, gates.candidate, gates.output
    );
    let (c, h) = lstm_compose(&gates, c_prev.view())?;
    println!("      C = {c}, h = {h}");
    Ok(())
}
