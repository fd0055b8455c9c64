pub mod decay;
pub mod identities;
pub mod lln;
pub mod sanov;
pub mod runs;
