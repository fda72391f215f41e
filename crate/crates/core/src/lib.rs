pub mod ir;
pub mod parser;
pub mod qubit_manager;
pub mod lowering;
pub mod scheduler;
pub mod flamegraph;
pub mod simulator;
pub mod stdlib;
