#![no_main]

use libfuzzer_sys::fuzz_target;

use graphheat::graph::{AntitreeConvention, ShellRule, VertexId, WeightedGraph};

// Shell-rule descriptors come from config files; parsing, evaluation
// (including overflow paths) and the family constructors built on them
// must never panic.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rule) = ShellRule::parse(text) {
            for m in [0u32, 1, 7, 4096, u32::MAX] {
                let _ = rule.eval(m);
            }
            if let Ok(tree) = WeightedGraph::tree(rule.clone(), 8) {
                let _ = tree.neighbors(&VertexId::radial(3, 1));
                let _ = tree.family_radial_profile(6);
            }
            if let Ok(at) = WeightedGraph::antitree(rule, AntitreeConvention::A, 8) {
                let _ = at.neighbors(&VertexId::radial(2, 0));
                let _ = at.measure(&VertexId::radial(4, 0));
                let _ = at.antitree_nominal_degrees(3);
            }
        }
    }
});
