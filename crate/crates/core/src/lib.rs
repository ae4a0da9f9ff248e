pub mod linalg;
pub mod ncgraph;
pub mod pauli;
pub mod stabilizer;
