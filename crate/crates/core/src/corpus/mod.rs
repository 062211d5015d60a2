//! Fixture programs and the seeded corpus generator.

pub mod fixtures;
mod generator;

pub use generator::{generate_corpus, ground_truth_csv, write_corpus, ClassMix, Corpus, CorpusSpec, GroundTruth};
