//! Finite-difference validation of whole-model gradients.
//!
//! For each trainable architecture, builds the loss of one labeled equation,
//! backpropagates, then perturbs a sample of parameter coordinates by ±ε and
//! compares the analytic gradient to the central difference quotient. This is
//! the same check run (much more thoroughly) by the test suite; here it
//! prints the worst relative error per architecture so you can see the tape
//! engine working across every cell type.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use rand::seq::IteratorRandom;
use rand::Rng;

use treesmu::cells::{Architecture, ModelConfig};
use treesmu::expr::{Equation, Label};
use treesmu::graph::Graph;
use treesmu::model::Model;
use treesmu::rng::{stream, tag};
use treesmu::vocab::Vocab;

const EPS: f64 = 1e-5;
const COORDS: usize = 25;

fn main() {
    let eq = Equation::parse("(= (+ (sin x) (* 2 (cos y))) (sqrt (+ 1 x)))", Label::Correct)
        .expect("well-formed equation");
    println!("equation: {}", eq.text());
    println!("checking {COORDS} random coordinates per architecture, eps = {EPS:.0e}\n");

    let archs = [
        Architecture::TreeRnn,
        Architecture::TreeLstm,
        Architecture::TreeSmu,
        Architecture::TreeQueue,
        Architecture::SeqLstm,
    ];
    for arch in archs {
        let cfg = ModelConfig {
            hidden: 6,
            stack: 3,
            top_k: 2,
            noop: arch == Architecture::TreeSmu,
            ..ModelConfig::new(arch)
        };
        let model = Model::new(cfg, Vocab::canonical()).unwrap();
        let mut store = model.init_params(42);

        // Analytic gradients from one reverse sweep.
        let mut g = Graph::new();
        let (_, loss) = model.equation_loss(&mut g, &store, &eq, &mut None).unwrap();
        g.backward(loss).unwrap();
        let grads = g.param_grads();

        // Sample coordinates across all touched parameters.
        let mut rng = stream(7, &[tag::INIT, arch as u64]);
        let keys: Vec<String> = grads.keys().cloned().collect();
        let mut worst: f64 = 0.0;
        let mut worst_at = String::new();
        for _ in 0..COORDS {
            let key = keys.iter().choose(&mut rng).unwrap().clone();
            let i = rng.random_range(0..grads[&key].len());

            let orig = store.get(&key).unwrap().data()[i];
            store.get_mut(&key).unwrap().data_mut()[i] = orig + EPS;
            g.forward(&store).unwrap();
            let up = g.value(loss).item();
            store.get_mut(&key).unwrap().data_mut()[i] = orig - EPS;
            g.forward(&store).unwrap();
            let down = g.value(loss).item();
            store.get_mut(&key).unwrap().data_mut()[i] = orig;

            let numeric = (up - down) / (2.0 * EPS);
            let analytic = grads[&key].data()[i];
            // The difference quotient carries absolute rounding noise of
            // roughly ulp(loss)/(2ε) ≈ 1e-11, so coordinates whose true
            // gradient sits below ~1e-6 cannot be resolved relatively;
            // the denominator floor keeps those from reading as failures.
            let scale = analytic.abs().max(numeric.abs()).max(1e-6);
            let rel = (numeric - analytic).abs() / scale;
            if rel > worst {
                worst = rel;
                worst_at = format!("{key}[{i}]");
            }
        }
        let verdict = if worst <= 1e-4 { "ok" } else { "FAIL" };
        println!(
            "{:<11}  {} parameter tensors, worst rel err {:.3e} at {:<18} {}",
            arch.name(),
            grads.len(),
            worst,
            worst_at,
            verdict
        );
        assert!(worst <= 1e-4, "{}: gradient mismatch", arch.name());
    }
    println!("\nall architectures pass the finite-difference check");
}
