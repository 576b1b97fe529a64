pub mod dsl;
pub mod rank;
pub mod synth;
pub mod sample;
pub mod rewrite;
pub mod codegen;
pub mod pipeline;
pub mod bench;
