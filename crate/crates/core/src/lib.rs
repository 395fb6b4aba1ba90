pub mod error;
pub mod intertwine;
pub mod numeric;
pub mod poly;
pub mod rho;
pub mod roots;
pub mod spectrum;
