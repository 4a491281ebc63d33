macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(subspaces, "subspaces.rs");
example!(transfer_function, "transfer_function.rs");
example!(design_rate, "design_rate.rs");
example!(threshold_table, "threshold_table.rs");
example!(exit_curve, "exit_curve.rs");
example!(sample_graph, "sample_graph.rs");
example!(decode_graph, "decode_graph.rs");
example!(monte_carlo, "monte_carlo.rs");

#[test]
fn subspaces_runs() {
    subspaces::run_example().unwrap();
}

#[test]
fn transfer_function_runs() {
    transfer_function::run_example().unwrap();
}

#[test]
fn design_rate_runs() {
    design_rate::run_example().unwrap();
}

#[test]
fn threshold_table_runs() {
    threshold_table::run_example().unwrap();
}

#[test]
fn exit_curve_runs() {
    exit_curve::run_example().unwrap();
}

#[test]
fn sample_graph_runs() {
    sample_graph::run_example().unwrap();
}

#[test]
fn decode_graph_runs() {
    decode_graph::run_example().unwrap();
}

#[test]
fn monte_carlo_runs() {
    monte_carlo::run_example().unwrap();
}
