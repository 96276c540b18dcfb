//! The autodiff tape from first principles.
//!
//! Builds a tiny computation — `y = v · (W·x + b)` followed by a sigmoid —
//! directly on the tape, runs one reverse sweep, and checks every parameter
//! gradient against central finite differences. No models, no equations:
//! just the engine the rest of the crate stands on.
//!
//! ```bash
//! cargo run --example autodiff_basics
//! ```

use treesmu::graph::{sigmoid, Graph};
use treesmu::params::ParamStore;
use treesmu::tensor::Tensor;

fn main() {
    // Named parameters live in a store; the tape binds them by key.
    let mut store = ParamStore::new();
    store.insert("w", Tensor::from_vec(2, 3, vec![0.2, -0.1, 0.4, 0.0, 0.3, -0.5]));
    store.insert("b", Tensor::column(vec![0.1, -0.2]));
    store.insert("v", Tensor::column(vec![1.5, -0.7]));

    // Construction is eager: every node's value is computed as it is pushed.
    let mut g = Graph::new();
    let w = g.param(&store, "w").unwrap();
    let b = g.param(&store, "b").unwrap();
    let v = g.param(&store, "v").unwrap();
    let x = g.constant(Tensor::column(vec![0.5, -1.0, 2.0]));

    let wx = g.matmul(w, x).unwrap();
    let z = g.add(wx, b).unwrap();
    let y = g.dot(v, z).unwrap();
    let p = g.sigmoid_node(y);

    println!("tape has {} nodes", g.len());
    println!("y = v · (W·x + b)      = {:+.6}", g.value(y).item());
    println!("p = sigmoid(y)          = {:+.6}", g.value(p).item());

    // One reverse sweep fills the gradient of y with respect to everything.
    g.backward(y).unwrap();
    let grads = g.param_grads();

    // dy/dv is just z, dy/db is v, dy/dW is v xᵀ — all visible in the store.
    println!("\nanalytic gradients of y:");
    for key in ["w", "b", "v"] {
        println!("  d y / d {key:1} = {:?}", grads[key].data());
    }

    // Central finite differences, one coordinate at a time. Rebuilding the
    // graph is unnecessary: `forward` re-reads the store and re-runs the tape.
    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for key in ["w", "b", "v"] {
        let n = store.get(key).unwrap().data().len();
        for i in 0..n {
            let orig = store.get(key).unwrap().data()[i];
            store.get_mut(key).unwrap().data_mut()[i] = orig + eps;
            g.forward(&store).unwrap();
            let up = g.value(y).item();
            store.get_mut(key).unwrap().data_mut()[i] = orig - eps;
            g.forward(&store).unwrap();
            let down = g.value(y).item();
            store.get_mut(key).unwrap().data_mut()[i] = orig;

            let numeric = (up - down) / (2.0 * eps);
            let analytic = grads[key].data()[i];
            let rel = (numeric - analytic).abs() / analytic.abs().max(1e-12);
            worst = worst.max(rel);
        }
    }
    println!("\nworst relative error vs central differences: {worst:.3e}");
    assert!(worst < 1e-7, "gradient check failed");

    // The same sweep through the sigmoid: dp/dy = p(1-p).
    g.forward(&store).unwrap();
    g.backward(p).unwrap();
    let pv = sigmoid(g.value(y).item());
    let dv = g.param_grads()["v"].data()[0] / grads["v"].data()[0];
    println!("dp/dy from tape = {dv:.6}, p(1-p) = {:.6}", pv * (1.0 - pv));
    println!("\nall gradients verified");
}
