use critgraph_py::critgraph_module;
use pyo3::prelude::*;

// One interpreter per process, so everything runs in a single test.
#[test]
fn module_works_from_python() {
    pyo3::append_to_inittab!(critgraph_module);
    Python::attach(|py| {
        py.run(
            cr#"
import json
import critgraph
from critgraph import Graph, PotentialParams

k6 = Graph.complete(6)
assert k6.to_graph6() == "E~~w"
assert critgraph.potential(k6) == "268/15"
assert critgraph.is_critical(k6, 6)

g = Graph.cycle(5).join(Graph.complete(3))
assert critgraph.chromatic_number(g) == 6
assert critgraph.check_density_theorems(g)["k_ore"] is False
ledger = json.loads(critgraph.run_discharge(g))
assert len({s["total"] for s in ledger["stages"]}) == 1

h, trace = critgraph.generate_k_ore(6, 1, 3)
assert h.n == 11 and critgraph.is_k_ore(h, 6)
assert trace["kind"] == "node"
assert PotentialParams.tight(6, "1/105") == PotentialParams.k6()

for bad in (lambda: Graph.from_graph6("!!"), lambda: k6.degree(9), lambda: PotentialParams.tight(6, "1/10")):
    try:
        bad()
    except (ValueError, IndexError):
        pass
    else:
        raise AssertionError("no error raised")
"#,
            None,
            None,
        )
        .unwrap();
    });
}
