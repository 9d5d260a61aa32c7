pub mod cli;
pub mod exactmath;
pub mod formulas;
pub mod guess;
pub mod opalgebra;
pub mod walks;
