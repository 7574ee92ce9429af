pub mod biortho;
pub mod grassmann;
pub mod graded;
pub mod constructor;
pub mod entanglement;
pub mod config;
pub mod report;
pub mod verify;
