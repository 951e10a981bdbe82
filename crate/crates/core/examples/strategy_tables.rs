//! Print the shape, Rice parameter and skip data of every node size.
//!
//! `cargo run --example strategy_tables [leaf] [max_m]`

use recsplit::strategy::{table_size, SplitStrategy};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let leaf = args.next().flatten().unwrap_or(8);
    let max_m = args.next().flatten().unwrap_or(40);

    let strategy = SplitStrategy::new(leaf, table_size(100));
    println!(
        "leaf {leaf}: lower aggregation {}, upper aggregation {}",
        strategy.lower_aggr(),
        strategy.upper_aggr()
    );
    println!("   m  fanout  unit  last  rice  depth  fixed  nodes");
    for m in 2..=max_m {
        if m <= leaf {
            println!("{m:>4}  leaf                {:>4}", strategy.leaf_rice(m));
            continue;
        }
        let node = strategy.node_spec(m);
        println!(
            "{m:>4}  {:>6}  {:>4}  {:>4}  {:>4}  {:>5}  {:>5}  {:>5}",
            node.fanout,
            node.unit,
            node.last,
            node.rice,
            strategy.depth(m),
            node.subtree_fixed_bits,
            node.subtree_nodes
        );
    }

    // Past the table the parameter comes from a closed form.
    let big = strategy.table_max() * 3;
    let (fixed, nodes) = strategy.skip_info(big);
    println!("m={big}: rice {}, subtree {fixed} fixed bits over {nodes} nodes", strategy.rice(big));
}
