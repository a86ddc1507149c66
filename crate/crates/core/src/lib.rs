pub mod dialogue;
pub mod experiment;
pub mod nl;
pub mod rl;
pub mod stl;
pub mod synthesis;
pub mod world;
