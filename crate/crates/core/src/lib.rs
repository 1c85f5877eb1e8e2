pub mod cli;
pub mod config;
pub mod error;
pub mod frame;
pub mod ghisd;
pub mod landscape;
pub mod state;
pub mod systems;
