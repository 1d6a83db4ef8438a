//! The 15-qubit melbourne coupling map: a naive CNOT chain breaks it, a
//! breadth-first tree from q6 respects it.
//!
//! cargo run --example melbourne_layout

use std::f64::consts::FRAC_PI_2;

use catent::{build_cat_chain, build_cat_on_topology, melbourne_coupling, validate_circuit, CatParams, Circuit};

fn main() -> catent::Result<()> {
    let map = melbourne_coupling();
    println!("{} qubits, {} edges", map.num_qubits(), map.edge_count());
    for q in 0..map.num_qubits() {
        println!("  q{q:<2} neighbours {:?}", map.neighbors(q));
    }

    let params = CatParams::new(FRAC_PI_2);
    let chain = build_cat_chain(15, params)?;
    match validate_circuit(&chain, &map)? {
        Ok(()) => println!("chain: valid"),
        Err(violations) => {
            println!("chain: {} CNOTs off the map", violations.len());
            for v in &violations {
                println!("  {v}");
            }
        }
    }

    let tree = build_cat_on_topology(&map, 6, params)?;
    println!("tree from q6: valid = {}", validate_circuit(&tree, &map)?.is_ok());
    for (q, parent) in map.bfs_tree(6)? {
        if let Some(p) = parent {
            println!("  cx {p} -> {q}");
        }
    }

    // Text round trip; the parsed circuit carries no cat tag.
    let text = tree.to_text();
    let parsed = Circuit::from_text(&text)?;
    assert_eq!(parsed.ops(), tree.ops());

    // A 5-qubit register: first five qubits reached from q6, relabelled.
    let (sub, physical) = map.bfs_subgraph(6, 5)?;
    println!("5-qubit sub-register {physical:?} with edges {:?}", sub.edges().collect::<Vec<_>>());
    Ok(())
}
