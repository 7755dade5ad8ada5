pub mod channels;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod linalg;
pub mod liouville;
pub mod matrix;
pub mod presets;
pub mod states;
pub mod steady;
