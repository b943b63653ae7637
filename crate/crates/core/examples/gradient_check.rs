//! Compares back-propagated gradients with central finite differences on a
//! few random small networks.
//!
//!     cargo run --example gradient_check

use enas::nn::{Activation, MlpConfig, Network, Optimizer};
use enas::seed;
use enas::Matrix;
use rand::Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = seed::rng(5);
    for trial in 0..5 {
        let hidden = rng.random_range(1..=3);
        let nodes = rng.random_range(1..=5);
        let inputs = rng.random_range(1..=4);
        let mut activations: Vec<Activation> =
            (0..=hidden).map(|_| Activation::ALL[rng.random_range(0..Activation::ALL.len())]).collect();
        activations.push(Activation::Sigmoid);
        let config = MlpConfig::new(hidden, nodes, activations, Optimizer::Adam, 1, 1, trial);
        let mut net = Network::glorot(inputs, &config, &mut rng)?;

        let rows = 6;
        let x = Matrix::from_vec(rows, inputs, (0..rows * inputs).map(|_| rng.random_range(-1.0..1.0)).collect());
        let y: Vec<u8> = (0..rows).map(|_| rng.random_range(0..=1)).collect();
        let (_, analytic) = net.loss_and_gradient(&x, &y)?;

        let h = 1e-6;
        let mut worst = 0.0f64;
        for i in 0..analytic.len() {
            let orig = net.params()[i];
            net.params_mut()[i] = orig + h;
            let up = net.loss(&x, &y)?;
            net.params_mut()[i] = orig - h;
            let down = net.loss(&x, &y)?;
            net.params_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        println!("net {:?}: {} params, worst relative error {worst:.2e}", net.dims(), analytic.len());
    }
    Ok(())
}
