//! Instance acquisition: TSPLIB file parsing and writing, plus synthetic
//! generators (the tightness family, grid-office maps, planted clusters).

mod generators;
mod tsplib;

pub use generators::{
    gen_lower_bound, gen_office, gen_planted, GenError, GridOfficeMap, LowerBoundInstance,
};
pub use tsplib::{
    instance_to_graph, parse_tsplib, write_explicit, EdgeWeightType, ExplicitFormat, ParseError,
    TspLibInstance,
};
