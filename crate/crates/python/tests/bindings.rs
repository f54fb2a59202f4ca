use pyo3::ffi::c_str;
use pyo3::prelude::*;

use groundness_py::groundness_py;

fn with_module<F: FnOnce(Python<'_>)>(f: F) {
    static INIT: std::sync::Once = std::sync::Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(groundness_py);
        Python::initialize();
    });
    Python::attach(f);
}

#[test]
fn lattice_operations() {
    with_module(|py| {
        py.run(
            c_str!(
                r#"
import groundness_py as g
x, y = g.AbsFun(["10", "11"]), g.AbsFun(["01", "11"])
assert x.join(y).models == ["01", "10", "11"]
assert x.with_domain("def").join(y.with_domain("def")).is_top()
assert g.chain_f(2, 3).is_top() and g.chain_f(2, 0).is_bottom()
assert g.intersection_close(["01", "10"]) == ["00", "01", "10"]
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}

#[test]
fn analysis_round_trip() {
    with_module(|py| {
        py.run(
            c_str!(
                r#"
import groundness_py as g
p = g.Program.generate("pos-linear", 3)
assert g.Program.parse(p.render()) == p
r = g.analyze(p, "pos")
assert r.strict_increases["p/3"] == 7
assert not r.fixpoint["s/6"].is_intersection_closed()
try:
    g.analyze(p, max_rounds=1)
    raise AssertionError
except g.NoFixpointError:
    pass
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
