//! Shared inputs for the benchmarks.

use ctimer_core::{gen_bridge, gen_oximeter, prepare, BridgeSpec, OximeterSpec, Program, Rate, Strategy, TimerWidth};

pub fn bridge_program(times: &[u64], strategy: Strategy) -> Program {
    let spec = BridgeSpec {
        times: times.to_vec(),
        strategy,
        ..BridgeSpec::default()
    };
    let src = gen_bridge(&spec).expect("valid bridge spec");
    prepare(&spec.file_name(), &src, &Default::default(), TimerWidth::W64)
        .expect("generated bridge program lowers")
        .0
}

pub fn oximeter_source(rate: Rate) -> String {
    gen_oximeter(&OximeterSpec {
        error_rate: rate,
        ..OximeterSpec::default()
    })
    .expect("valid oximeter spec")
}

pub fn oximeter_program(rate: Rate) -> Program {
    let src = oximeter_source(rate);
    prepare("oximeter.c", &src, &Default::default(), TimerWidth::W64)
        .expect("generated oximeter program lowers")
        .0
}
