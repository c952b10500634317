pub mod eval;
pub mod frontend;
pub mod labeler;
pub mod model;
pub mod pipeline;
pub mod graphs;
pub mod slicer;
pub mod syvc;
pub mod vectorizer;
