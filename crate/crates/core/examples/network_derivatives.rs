//! Values, input derivatives and a loss gradient of a small swish network.

use fracpinn::nn::{evaluate, grad_params, Activation, Mlp, MlpSpec};

fn main() -> fracpinn::Result<()> {
    let spec = MlpSpec::new(3, vec![16, 16], 1, Activation::Swish)?;
    let net = Mlp::init(spec, 7);
    let x = [0.2, 0.5, -0.3];
    let rec = evaluate(&net.spec, &net.params, &x, true, 2)?;
    let jet = rec.input_jet.expect("requested");
    println!("value          {:.6}", rec.value[0]);
    println!("d/dx           {:?}", jet.first[0]);
    println!("d2/dx2         {:?}", jet.second.expect("order 2"));
    println!("parameters     {}", net.params.len());

    // mean squared error against a target over a few points
    let inputs: Vec<Vec<f64>> = (0..5).map(|i| vec![0.1 * i as f64, 0.0, 1.0]).collect();
    let (loss, grad) = grad_params(&net.spec, &net.params, &inputs, |outs| {
        let n = outs.len() as f64;
        outs.iter().map(|&o| (o - 1.0).square()).reduce(|a, b| a + b).expect("non-empty") / n
    })?;
    let norm = grad.as_slice().iter().map(|g| g * g).sum::<f64>().sqrt();
    println!("loss           {loss:.6}");
    println!("|gradient|     {norm:.6}");
    Ok(())
}
