pub mod error;
pub mod io;
pub mod lap;
pub mod linalg;
pub mod random_graphs;
pub mod ds_init;
pub mod faq;
