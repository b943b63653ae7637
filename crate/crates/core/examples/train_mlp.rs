//! Trains one network on a hold-out split of Pima and reports its F-measure.
//!
//!     cargo run --release --example train_mlp -- [adam|adamax|rmsprop|sgd]

use std::path::Path;

use enas::dataset::{load_csv, LabelColumn, LabelMapping};
use enas::fitness::f_measure;
use enas::nn::{self, Activation, MlpConfig, Optimizer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let optimizer: Optimizer = std::env::args().nth(1).as_deref().unwrap_or("adam").parse()?;
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/pima.csv");
    let mapping = LabelMapping::from_pairs([("tested_negative", 0), ("tested_positive", 1)]);
    let data = load_csv(&path, &LabelColumn::Last, &mapping)?.normalize_min_max().shuffle(3);
    let split = data.kfold_split(5, 3)?;
    let train = data.subset(&split.train_indices(0));
    let test = data.subset(split.test_indices(0));

    let activations = vec![Activation::Relu, Activation::Relu, Activation::Tanh, Activation::Sigmoid];
    let config = MlpConfig::new(2, 32, activations, optimizer, 50, 16, 42);
    let model = nn::train(&config, train.features(), train.labels())?;
    for (epoch, loss) in model.loss_history.iter().enumerate().step_by(5) {
        println!("epoch {:>3}  loss {loss:.5}", epoch + 1);
    }
    let pred = model.predict(test.features())?;
    println!(
        "{optimizer}: {} epochs{}, held-out F1 {:.3}",
        model.epochs_run,
        if model.stopped_early { " (stopped early)" } else { "" },
        f_measure(&pred, test.labels())?
    );
    Ok(())
}
